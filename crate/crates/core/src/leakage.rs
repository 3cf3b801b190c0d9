//! Leakage-based hybrid beamformer design (M-SLNR-ANLNR).
//!
//! The analog stage `v_a` is shared by all `K` sub-arrays, so the design
//! variables are `M` analog phases, a `K`-dimensional digital beamformer
//! `v_d` and a `K`-dimensional artificial-noise beamformer `w`. The optimizer
//! alternates between
//!
//! 1. cyclic coordinate ascent on the analog phases, each coordinate solved
//!    in closed form ([`optimal_phase`]), and
//! 2. the SLNR-optimal digital beamformer for the current analog stage
//!    ([`solve_digital`]),
//!
//! until the SLNR stops improving, then fits `w` by maximizing the ANLNR
//! ([`solve_an`]).

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{effective_channel, AnalogBeam};
use crate::linalg::{fix_global_phase, inner, normalize, solve_rank_one_regularized};
use crate::math::{asin, atan2, cos, hypot, pow10, sin, sqrt, wrap_phase};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Transmit power split and receiver noise, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    total_power: f64,
    alloc_factor: f64,
    noise_var: f64,
}

impl LinkBudget {
    pub fn new(total_power: f64, alloc_factor: f64, noise_var: f64) -> Result<Self> {
        if !(total_power > 0.0) || !total_power.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "total power {total_power} must be positive"
            )));
        }
        if !(0.0..=1.0).contains(&alloc_factor) {
            return Err(Error::InvalidConfig(alloc::format!(
                "power allocation factor {alloc_factor} outside [0, 1]"
            )));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "noise variance {noise_var} must be positive"
            )));
        }
        Ok(Self {
            total_power,
            alloc_factor,
            noise_var,
        })
    }

    /// Unit noise variance and `P = 10^(snr_db / 10)`.
    pub fn from_snr_db(snr_db: f64, alloc_factor: f64) -> Result<Self> {
        Self::new(pow10(snr_db / 10.0), alloc_factor, 1.0)
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn alloc_factor(&self) -> f64 {
        self.alloc_factor
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// `alpha P`.
    pub fn signal_power(&self) -> f64 {
        self.alloc_factor * self.total_power
    }

    /// `(1 - alpha) P`.
    pub fn an_power(&self) -> f64 {
        (1.0 - self.alloc_factor) * self.total_power
    }

    /// Upper bound on the SLNR for unit-norm beamformers: `alpha P / sigma^2`.
    pub fn slnr_bound(&self) -> f64 {
        self.signal_power() / self.noise_var
    }
}

/// `power |g_want^H v|^2 / (power |g_leak^H v|^2 + noise)`.
///
/// SLNR and ANLNR are both this ratio with the roles of the two receivers
/// exchanged; exposed at effective-channel level so the fully digital
/// baseline can reuse it with `g = h`.
pub fn leakage_ratio(
    g_want: &[Complex64],
    g_leak: &[Complex64],
    v: &[Complex64],
    power: f64,
    noise_var: f64,
) -> f64 {
    power * inner(g_want, v).norm_sqr() / (power * inner(g_leak, v).norm_sqr() + noise_var)
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

fn effective_pair(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_a: &AnalogBeam,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_len("eavesdropper channel", h_b.len(), h_e.len())?;
    Ok((effective_channel(h_b, v_a)?, effective_channel(h_e, v_a)?))
}

/// Signal-to-leakage-and-noise ratio of the desired user.
pub fn slnr(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_a: &AnalogBeam,
    v_d: &[Complex64],
    budget: &LinkBudget,
) -> Result<f64> {
    let (g_b, g_e) = effective_pair(h_b, h_e, v_a)?;
    check_len("digital beamformer", g_b.len(), v_d.len())?;
    Ok(leakage_ratio(
        &g_b,
        &g_e,
        v_d,
        budget.signal_power(),
        budget.noise_var,
    ))
}

/// Artificial-noise-to-leakage-and-noise ratio at the eavesdropper.
pub fn anlnr(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_a: &AnalogBeam,
    w: &[Complex64],
    budget: &LinkBudget,
) -> Result<f64> {
    let (g_b, g_e) = effective_pair(h_b, h_e, v_a)?;
    check_len("artificial-noise beamformer", g_b.len(), w.len())?;
    Ok(leakage_ratio(
        &g_e,
        &g_b,
        w,
        budget.an_power(),
        budget.noise_var,
    ))
}

/// Per-element contributions `c_i = M^{-1/2} sum_k conj(h[k, i]) v_d[k]`, so
/// that `h^H V_A v_d = sum_i exp(j phi_i) c_i`.
fn element_coefficients(h: &[Complex64], v_d: &[Complex64], m: usize) -> Vec<Complex64> {
    let scale = 1.0 / sqrt(m as f64);
    (0..m)
        .map(|i| {
            h.iter()
                .skip(i)
                .step_by(m)
                .zip(v_d)
                .map(|(x, d)| x.conj() * d)
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// One receiver's share of the single-phase decomposition
/// `|h^H V_A v_d|^2 = |exp(j phi_m) a + b|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideTerms {
    /// Contribution of element `m`, without its phase.
    pub a: Complex64,
    /// Contribution of every other element, phases included.
    pub b: Complex64,
    /// `Re(a conj(b))`.
    pub r: f64,
    /// `Im(a conj(b))`.
    pub i: f64,
    /// `power (|a|^2 + |b|^2)` plus the noise variance on the eavesdropper side.
    pub x: f64,
}

impl SideTerms {
    fn new(a: Complex64, b: Complex64, power: f64, noise: f64) -> Self {
        let cross = a * b.conj();
        Self {
            a,
            b,
            r: cross.re,
            i: cross.im,
            x: power * (a.norm_sqr() + b.norm_sqr()) + noise,
        }
    }
}

/// Coefficients of the SLNR restricted to one analog phase `phi`:
///
/// ```text
/// SLNR(phi) = (X_B + 2p (R_B cos phi - I_B sin phi)) / (X_E + 2p (R_E cos phi - I_E sin phi)),  p = alpha P
/// ```
///
/// Its stationary points solve `y1 sin phi + y2 cos phi = 2p (R_E I_B - R_B I_E)`,
/// i.e. `sin(phi + phi_y) = 2p (R_E I_B - R_B I_E) / hypot(y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseUpdateTerms {
    pub bob: SideTerms,
    pub eve: SideTerms,
    /// `X_B R_E - X_E R_B`.
    pub y1: f64,
    /// `X_B I_E - X_E I_B`.
    pub y2: f64,
    /// `atan2(y2, y1)`.
    pub phi_y: f64,
    /// `alpha P`.
    pub signal_power: f64,
}

impl PhaseUpdateTerms {
    pub fn from_sides(
        a_b: Complex64,
        b_b: Complex64,
        a_e: Complex64,
        b_e: Complex64,
        budget: &LinkBudget,
    ) -> Self {
        let p = budget.signal_power();
        let bob = SideTerms::new(a_b, b_b, p, 0.0);
        let eve = SideTerms::new(a_e, b_e, p, budget.noise_var);
        let y1 = bob.x * eve.r - eve.x * bob.r;
        let y2 = bob.x * eve.i - eve.x * bob.i;
        Self {
            bob,
            eve,
            y1,
            y2,
            phi_y: atan2(y2, y1),
            signal_power: p,
        }
    }

    fn numerator(&self, phi: f64) -> f64 {
        let p2 = 2.0 * self.signal_power;
        self.bob.x + p2 * (self.bob.r * cos(phi) - self.bob.i * sin(phi))
    }

    fn denominator(&self, phi: f64) -> f64 {
        let p2 = 2.0 * self.signal_power;
        self.eve.x + p2 * (self.eve.r * cos(phi) - self.eve.i * sin(phi))
    }

    /// SLNR as a function of the single phase being updated.
    pub fn slnr_at(&self, phi: f64) -> f64 {
        self.numerator(phi) / self.denominator(phi)
    }

    /// Right-hand side of the stationarity condition, `2p (R_E I_B - R_B I_E)`.
    pub fn stationarity_rhs(&self) -> f64 {
        2.0 * self.signal_power * (self.eve.r * self.bob.i - self.bob.r * self.eve.i)
    }

    /// Analytic `d SLNR / d phi`.
    pub fn derivative_at(&self, phi: f64) -> f64 {
        let p = self.signal_power;
        let d = self.denominator(phi);
        2.0 * p * (self.y1 * sin(phi) + self.y2 * cos(phi) - self.stationarity_rhs()) / (d * d)
    }
}

/// Builds the single-phase decomposition for element `m` (1-based).
pub fn phase_update_terms(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_d: &[Complex64],
    phases: &[f64],
    m: usize,
    budget: &LinkBudget,
) -> Result<PhaseUpdateTerms> {
    let size = phases.len();
    if m == 0 || m > size {
        return Err(Error::IndexOutOfRange {
            what: "element",
            index: m,
            len: size,
        });
    }
    check_len("eavesdropper channel", h_b.len(), h_e.len())?;
    check_len("digital beamformer", h_b.len() / size, v_d.len())?;
    check_len("channel", size * v_d.len(), h_b.len())?;
    let c_b = element_coefficients(h_b, v_d, size);
    let c_e = element_coefficients(h_e, v_d, size);
    let rest = |c: &[Complex64]| -> Complex64 {
        c.iter()
            .zip(phases)
            .enumerate()
            .filter(|(i, _)| *i != m - 1)
            .map(|(_, (ci, &p))| Complex64::from_polar(1.0, p) * ci)
            .sum()
    };
    Ok(PhaseUpdateTerms::from_sides(
        c_b[m - 1],
        rest(&c_b),
        c_e[m - 1],
        rest(&c_e),
        budget,
    ))
}

/// Relative tolerance below which the restriction is treated as flat.
const FLAT_TOL: f64 = 1e-10;
/// How far past `[-1, 1]` the `arcsin` argument may drift and still be clamped.
const ARCSIN_SLACK: f64 = 1e-9;

/// Exact maximizer of [`PhaseUpdateTerms::slnr_at`], wrapped into `(-pi, pi]`.
///
/// The stationarity condition has two roots per period, `xi - phi_y` and
/// `pi - xi - phi_y` with `xi = asin(rhs / hypot(y1, y2))`; one is the maximum
/// and the other the minimum, so both are evaluated and the larger SLNR wins.
pub fn optimal_phase(terms: &PhaseUpdateTerms) -> Result<f64> {
    let rho = hypot(terms.y1, terms.y2);
    let coupling = [terms.bob.r, terms.bob.i, terms.eve.r, terms.eve.i]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = terms.bob.x.abs().max(terms.eve.x.abs()) * coupling;
    if !(rho > FLAT_TOL * scale) {
        return Err(Error::FlatDirection);
    }
    let argument = terms.stationarity_rhs() / rho;
    if !(argument.abs() <= 1.0 + ARCSIN_SLACK) {
        return Err(Error::Conditioning { argument });
    }
    let xi = asin(argument.clamp(-1.0, 1.0));
    let first = wrap_phase(xi - terms.phi_y);
    let second = wrap_phase(PI - xi - terms.phi_y);
    Ok(if terms.slnr_at(second) > terms.slnr_at(first) {
        second
    } else {
        first
    })
}

fn relative_change(new: f64, old: f64) -> f64 {
    let scale = new.abs().max(old.abs());
    if scale == 0.0 {
        0.0
    } else {
        (new - old).abs() / scale
    }
}

/// Result of [`analog_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogSweep {
    pub beam: AnalogBeam,
    pub slnr: f64,
    /// Full passes over `m = 1..=M` performed.
    pub sweeps: usize,
    pub converged: bool,
    /// SLNR before the first update and after every single-coordinate update.
    pub history: Vec<f64>,
}

/// Cyclic coordinate ascent over the analog phases with `v_d` fixed.
///
/// Coordinates are visited in order `m = 1, ..., M`. A flat coordinate keeps
/// its phase. Stops when a full sweep changes the SLNR by less than `tol`
/// relative, or after `max_inner` sweeps.
pub fn analog_sweep(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_d: &[Complex64],
    phases_init: &[f64],
    budget: &LinkBudget,
    tol: f64,
    max_inner: usize,
) -> Result<AnalogSweep> {
    let size = phases_init.len();
    if size == 0 {
        return Err(Error::InvalidConfig(
            "analog beam needs at least one phase".into(),
        ));
    }
    check_len("eavesdropper channel", h_b.len(), h_e.len())?;
    check_len("channel", size * v_d.len(), h_b.len())?;

    let c_b = element_coefficients(h_b, v_d, size);
    let c_e = element_coefficients(h_e, v_d, size);
    let mut phases: Vec<f64> = phases_init.iter().map(|&p| wrap_phase(p)).collect();
    let total = |c: &[Complex64], phases: &[f64]| -> Complex64 {
        c.iter()
            .zip(phases)
            .map(|(ci, &p)| Complex64::from_polar(1.0, p) * ci)
            .sum()
    };
    let p = budget.signal_power();
    let ratio = |s_b: Complex64, s_e: Complex64| {
        p * s_b.norm_sqr() / (p * s_e.norm_sqr() + budget.noise_var)
    };

    let mut current = ratio(total(&c_b, &phases), total(&c_e, &phases));
    let mut history = alloc::vec![current];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_inner {
        let before = current;
        // Refresh the running sums once per sweep to keep rounding from drifting.
        let mut s_b = total(&c_b, &phases);
        let mut s_e = total(&c_e, &phases);
        for m in 0..size {
            let old_b = Complex64::from_polar(1.0, phases[m]) * c_b[m];
            let old_e = Complex64::from_polar(1.0, phases[m]) * c_e[m];
            let terms =
                PhaseUpdateTerms::from_sides(c_b[m], s_b - old_b, c_e[m], s_e - old_e, budget);
            match optimal_phase(&terms) {
                Ok(phi) => {
                    let candidate = terms.slnr_at(phi);
                    if candidate >= terms.slnr_at(phases[m]) {
                        phases[m] = phi;
                        let rot = Complex64::from_polar(1.0, phi);
                        s_b += rot * c_b[m] - old_b;
                        s_e += rot * c_e[m] - old_e;
                    }
                }
                Err(Error::FlatDirection) => {}
                Err(e) => return Err(e),
            }
            let next = ratio(s_b, s_e);
            // Exact 1-D maximization cannot lose ground; clamp rounding noise.
            current = next.max(current);
            history.push(current);
        }
        sweeps += 1;
        if relative_change(current, before) < tol {
            converged = true;
            break;
        }
    }
    Ok(AnalogSweep {
        beam: AnalogBeam::from_phases(phases)?,
        slnr: current,
        sweeps,
        converged,
        history,
    })
}

/// Unit-norm maximizer of `power |g_want^H v|^2 / (power_leak |g_leak^H v|^2 + noise)`
/// over `v`, with the global phase fixed.
///
/// The numerator matrix `g_want g_want^H` has rank one, so the dominant
/// generalized eigenvector is `(power_leak g_leak g_leak^H + noise I)^{-1} g_want`
/// up to scale.
pub fn leakage_beamformer(
    g_want: &[Complex64],
    g_leak: &[Complex64],
    leak_power: f64,
    noise_var: f64,
) -> Result<Vec<Complex64>> {
    check_len("leakage channel", g_want.len(), g_leak.len())?;
    if g_want.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::DegenerateChannel(
            "intended receiver has a zero channel",
        ));
    }
    let mut v = solve_rank_one_regularized(g_leak, leak_power, noise_var, g_want);
    normalize(&mut v)?;
    fix_global_phase(&mut v);
    Ok(v)
}

/// SLNR-optimal digital beamformer for a fixed analog stage.
pub fn solve_digital(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_a: &AnalogBeam,
    budget: &LinkBudget,
) -> Result<Vec<Complex64>> {
    let (g_b, g_e) = effective_pair(h_b, h_e, v_a)?;
    leakage_beamformer(&g_b, &g_e, budget.signal_power(), budget.noise_var)
}

/// ANLNR-optimal artificial-noise beamformer for a fixed analog stage.
pub fn solve_an(
    h_b: &[Complex64],
    h_e: &[Complex64],
    v_a: &AnalogBeam,
    budget: &LinkBudget,
) -> Result<Vec<Complex64>> {
    let (g_b, g_e) = effective_pair(h_b, h_e, v_a)?;
    leakage_beamformer(&g_e, &g_b, budget.an_power(), budget.noise_var)
}

/// Iteration controls for [`optimize_hybrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol_outer: f64,
    pub tol_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_outer: 1e-6,
            tol_inner: 1e-8,
            max_outer: 30,
            max_inner: 50,
        }
    }
}

/// Starting point for [`optimize_hybrid`].
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    /// `v_d` from a normalized complex Gaussian draw, phases uniform on
    /// `(-pi, pi]`.
    Random { seed: u64 },
    /// Explicit starting point; `digital` is normalized before use.
    Given {
        phases: Vec<f64>,
        digital: Vec<Complex64>,
    },
}

impl Initialization {
    fn materialize(
        self,
        n_subarrays: usize,
        subarray_size: usize,
    ) -> Result<(Vec<f64>, Vec<Complex64>)> {
        match self {
            Initialization::Random { seed } => {
                let mut rng = rng_from_seed(seed);
                let mut digital: Vec<Complex64> = (0..n_subarrays)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                normalize(&mut digital)?;
                let phases = (0..subarray_size)
                    .map(|_| PI - 2.0 * PI * rng.random::<f64>())
                    .collect();
                Ok((phases, digital))
            }
            Initialization::Given {
                phases,
                mut digital,
            } => {
                check_len("initial phases", subarray_size, phases.len())?;
                check_len("initial digital beamformer", n_subarrays, digital.len())?;
                normalize(&mut digital)?;
                Ok((phases, digital))
            }
        }
    }
}

/// Output of [`optimize_hybrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSolution {
    pub analog: AnalogBeam,
    /// `v_d`, unit norm.
    pub digital: Vec<Complex64>,
    /// `w`, unit norm.
    pub an: Vec<Complex64>,
    /// SLNR at the starting point followed by the SLNR after each outer
    /// iteration.
    pub slnr_trace: Vec<f64>,
    pub outer_iterations: usize,
    /// Analog sweeps summed over all outer iterations.
    pub inner_sweeps: usize,
    /// False when `max_outer` was reached first; the solution is still the
    /// best found.
    pub converged: bool,
}

impl HybridSolution {
    pub fn analog_phases(&self) -> &[f64] {
        self.analog.phases()
    }

    pub fn analog_vector(&self) -> Vec<Complex64> {
        self.analog.vector()
    }

    pub fn final_slnr(&self) -> f64 {
        *self
            .slnr_trace
            .last()
            .expect("trace holds the starting point")
    }
}

/// Alternating SLNR maximization over `(v_a, v_d)` followed by the ANLNR
/// artificial-noise design.
pub fn optimize_hybrid(
    h_b: &[Complex64],
    h_e: &[Complex64],
    subarray_size: usize,
    budget: &LinkBudget,
    options: &SolverOptions,
    init: Initialization,
) -> Result<HybridSolution> {
    if subarray_size == 0 || h_b.is_empty() || h_b.len() % subarray_size != 0 {
        return Err(Error::DimensionMismatch {
            what: "channel length as a multiple of the sub-array size",
            expected: subarray_size * (h_b.len() / subarray_size.max(1)).max(1),
            found: h_b.len(),
        });
    }
    check_len("eavesdropper channel", h_b.len(), h_e.len())?;
    let n_subarrays = h_b.len() / subarray_size;
    let (phases, mut digital) = init.materialize(n_subarrays, subarray_size)?;
    let mut analog = AnalogBeam::from_phases(phases.iter().map(|&p| wrap_phase(p)).collect())?;

    let mut current = slnr(h_b, h_e, &analog, &digital, budget)?;
    let mut slnr_trace = alloc::vec![current];
    let mut inner_sweeps = 0;
    let mut converged = false;
    let mut outer_iterations = 0;
    while outer_iterations < options.max_outer {
        let sweep = analog_sweep(
            h_b,
            h_e,
            &digital,
            analog.phases(),
            budget,
            options.tol_inner,
            options.max_inner,
        )?;
        inner_sweeps += sweep.sweeps;
        analog = sweep.beam;
        let candidate = solve_digital(h_b, h_e, &analog, budget)?;
        let candidate_slnr = slnr(h_b, h_e, &analog, &candidate, budget)?;
        let after_analog = slnr(h_b, h_e, &analog, &digital, budget)?;
        // The closed form is the exact maximizer; only rounding can make it
        // look worse, in which case the previous beamformer is kept.
        let next = if candidate_slnr >= after_analog * (1.0 - 1e-13) {
            digital = candidate;
            candidate_slnr
        } else {
            after_analog
        };
        outer_iterations += 1;
        let change = relative_change(next, current);
        current = next;
        slnr_trace.push(current);
        if change < options.tol_outer {
            converged = true;
            break;
        }
    }
    let an = solve_an(h_b, h_e, &analog, budget)?;
    Ok(HybridSolution {
        analog,
        digital,
        an,
        slnr_trace,
        outer_iterations,
        inner_sweeps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{ArrayConfig, ArrayParams, PolarPosition};
    use crate::linalg::{norm, CMatrix};
    use crate::rng::derive_seed;
    use alloc::vec;
    use rand::Rng;

    struct Instance {
        h_b: Vec<Complex64>,
        h_e: Vec<Complex64>,
        m: usize,
        k: usize,
    }

    fn random_instance(seed: u64, k: usize, m: usize) -> Instance {
        let mut rng = rng_from_seed(seed);
        let cfg =
            ArrayConfig::with_random_frequencies(ArrayParams::with_partition(k, m), seed).unwrap();
        let mut pos = || {
            PolarPosition::new(rng.random_range(0.0..PI), rng.random_range(0.0..1500.0)).unwrap()
        };
        let (b, e) = (pos(), pos());
        Instance {
            h_b: cfg.steering_vector(&b).into_inner(),
            h_e: cfg.steering_vector(&e).into_inner(),
            m,
            k,
        }
    }

    fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        normalize(&mut v).unwrap();
        v
    }

    fn random_phases(rng: &mut impl Rng, m: usize) -> Vec<f64> {
        (0..m).map(|_| rng.random_range(-PI..PI)).collect()
    }

    fn budget() -> LinkBudget {
        LinkBudget::new(10.0, 0.6, 0.5).unwrap()
    }

    /// Dense `V_A^H h h^H V_A`.
    fn gram(h: &[Complex64], beam: &AnalogBeam) -> CMatrix {
        let g = effective_channel(h, beam).unwrap();
        let mut out = CMatrix::zeros(g.len());
        out.add_outer(1.0, &g);
        out
    }

    #[test]
    fn budget_validation() {
        assert!(LinkBudget::new(0.0, 0.5, 1.0).is_err());
        assert!(LinkBudget::new(1.0, 1.5, 1.0).is_err());
        assert!(LinkBudget::new(1.0, 0.5, 0.0).is_err());
        let b = LinkBudget::from_snr_db(10.0, 0.25).unwrap();
        assert!((b.total_power() - 10.0).abs() < 1e-12);
        assert!((b.signal_power() - 2.5).abs() < 1e-12);
        assert!((b.an_power() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn slnr_examples() {
        let inst = random_instance(1, 4, 3);
        let mut rng = rng_from_seed(2);
        let beam = AnalogBeam::from_phases(random_phases(&mut rng, inst.m)).unwrap();
        let v_d = random_unit(&mut rng, inst.k);

        let silent = LinkBudget::new(10.0, 0.0, 0.5).unwrap();
        assert_eq!(
            slnr(&inst.h_b, &inst.h_e, &beam, &v_d, &silent).unwrap(),
            0.0
        );

        // Eve sees only noise when her effective channel is orthogonal to v_d.
        let g_e = effective_channel(&inst.h_e, &beam).unwrap();
        let mut v_perp: Vec<Complex64> = v_d.clone();
        let proj = inner(&g_e, &v_perp) / crate::linalg::norm_sqr(&g_e);
        v_perp
            .iter_mut()
            .zip(&g_e)
            .for_each(|(v, g)| *v -= g * proj);
        normalize(&mut v_perp).unwrap();
        let b = budget();
        let g_b = effective_channel(&inst.h_b, &beam).unwrap();
        let want = b.signal_power() * inner(&g_b, &v_perp).norm_sqr() / b.noise_var();
        let got = slnr(&inst.h_b, &inst.h_e, &beam, &v_perp, &b).unwrap();
        assert!((got - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn slnr_and_anlnr_match_dense_quadratic_forms() {
        let b = budget();
        for seed in 0..50 {
            let inst = random_instance(seed, 2 + seed as usize % 6, 1 + seed as usize % 5);
            let mut rng = rng_from_seed(derive_seed(seed, 9));
            let beam = AnalogBeam::from_phases(random_phases(&mut rng, inst.m)).unwrap();
            let v = random_unit(&mut rng, inst.k);

            let gb = gram(&inst.h_b, &beam);
            let ge = gram(&inst.h_e, &beam);
            let mut denom_s = CMatrix::scaled_identity(inst.k, b.noise_var());
            let mut denom_a = denom_s.clone();
            let geff = effective_channel(&inst.h_e, &beam).unwrap();
            let gbeff = effective_channel(&inst.h_b, &beam).unwrap();
            denom_s.add_outer(b.signal_power(), &geff);
            denom_a.add_outer(b.an_power(), &gbeff);

            let want_s = b.signal_power() * gb.quad_form(&v) / denom_s.quad_form(&v);
            let got_s = slnr(&inst.h_b, &inst.h_e, &beam, &v, &b).unwrap();
            assert!((want_s - got_s).abs() < 1e-12 * want_s.max(1.0));

            let want_a = b.an_power() * ge.quad_form(&v) / denom_a.quad_form(&v);
            let got_a = anlnr(&inst.h_b, &inst.h_e, &beam, &v, &b).unwrap();
            assert!((want_a - got_a).abs() < 1e-12 * want_a.max(1.0));
        }
    }

    #[test]
    fn anlnr_examples() {
        let inst = random_instance(4, 5, 2);
        let mut rng = rng_from_seed(3);
        let beam = AnalogBeam::from_phases(random_phases(&mut rng, 2)).unwrap();
        let w = random_unit(&mut rng, 5);
        let full_signal = LinkBudget::new(10.0, 1.0, 0.5).unwrap();
        assert_eq!(
            anlnr(&inst.h_b, &inst.h_e, &beam, &w, &full_signal).unwrap(),
            0.0
        );
    }

    #[test]
    fn phase_update_decomposition_matches_dense_evaluation() {
        let b = budget();
        for seed in 0..40 {
            let k = 2 + seed as usize % 7;
            let m = 1 + seed as usize % 6;
            let inst = random_instance(seed, k, m);
            let mut rng = rng_from_seed(derive_seed(seed, 4));
            let phases = random_phases(&mut rng, m);
            let v_d = random_unit(&mut rng, k);
            let beam = AnalogBeam::from_phases(phases.clone()).unwrap();
            let g_b = effective_channel(&inst.h_b, &beam).unwrap();
            let g_e = effective_channel(&inst.h_e, &beam).unwrap();
            for mm in 1..=m {
                let t = phase_update_terms(&inst.h_b, &inst.h_e, &v_d, &phases, mm, &b).unwrap();
                let rot = Complex64::from_polar(1.0, phases[mm - 1]);
                let dense_b = inner(&g_b, &v_d).norm_sqr();
                let dense_e = inner(&g_e, &v_d).norm_sqr();
                assert!(((rot * t.bob.a + t.bob.b).norm_sqr() - dense_b).abs() < 1e-12);
                assert!(((rot * t.eve.a + t.eve.b).norm_sqr() - dense_e).abs() < 1e-12);
                let cross = t.bob.a * t.bob.b.conj();
                assert_eq!((t.bob.r, t.bob.i), (cross.re, cross.im));
                assert!(
                    (libm::sin(t.phi_y).powi(2) + libm::cos(t.phi_y).powi(2) - 1.0).abs() < 1e-12
                );
                let dense_slnr = slnr(&inst.h_b, &inst.h_e, &beam, &v_d, &b).unwrap();
                assert!(
                    (t.slnr_at(phases[mm - 1]) - dense_slnr).abs() < 1e-10 * dense_slnr.max(1.0)
                );
            }
        }
    }

    #[test]
    fn phase_update_terms_edge_cases() {
        let inst = random_instance(3, 4, 1);
        let b = budget();
        let mut rng = rng_from_seed(1);
        let v_d = random_unit(&mut rng, 4);
        let t = phase_update_terms(&inst.h_b, &inst.h_e, &v_d, &[0.3], 1, &b).unwrap();
        assert_eq!(t.bob.b, Complex64::new(0.0, 0.0));
        assert_eq!(t.eve.b, Complex64::new(0.0, 0.0));
        assert_eq!(optimal_phase(&t), Err(Error::FlatDirection));

        let inst = random_instance(3, 4, 3);
        let zero = vec![Complex64::new(0.0, 0.0); 4];
        let t = phase_update_terms(&inst.h_b, &inst.h_e, &zero, &[0.1, 0.2, 0.3], 2, &b).unwrap();
        for side in [t.bob, t.eve] {
            assert_eq!(side.a, Complex64::new(0.0, 0.0));
            assert_eq!(side.b, Complex64::new(0.0, 0.0));
        }
        assert!(phase_update_terms(&inst.h_b, &inst.h_e, &zero, &[0.1, 0.2, 0.3], 0, &b).is_err());
        assert!(phase_update_terms(&inst.h_b, &inst.h_e, &zero, &[0.1, 0.2, 0.3], 4, &b).is_err());
    }

    #[test]
    fn optimal_phase_without_eavesdropper_is_single_cosine_maximizer() {
        let b = budget();
        let mut rng = rng_from_seed(17);
        for _ in 0..100 {
            let a_b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b_b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let zero = Complex64::new(0.0, 0.0);
            let t = PhaseUpdateTerms::from_sides(a_b, b_b, zero, zero, &b);
            assert_eq!(t.eve.x, b.noise_var());
            let want = atan2(-t.bob.i, t.bob.r);
            let got = optimal_phase(&t).unwrap();
            assert!(wrap_phase(got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn optimal_phase_flags_flat_direction() {
        let side = |x, r, i| SideTerms {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            r,
            i,
            x,
        };
        let t = PhaseUpdateTerms {
            bob: side(1.0, 0.3, 0.0),
            eve: side(1.0, 0.0, 0.2),
            y1: 0.0,
            y2: 0.0,
            phi_y: 0.0,
            signal_power: 1.0,
        };
        assert!(t.stationarity_rhs() != 0.0);
        assert_eq!(optimal_phase(&t), Err(Error::FlatDirection));
    }

    #[test]
    fn optimal_phase_rejects_out_of_range_argument() {
        let side = |x, r, i| SideTerms {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            r,
            i,
            x,
        };
        // Hand-built terms with |rhs| > hypot(y1, y2); unreachable from real channels.
        let t = PhaseUpdateTerms {
            bob: side(1.0, 0.0, 1.0),
            eve: side(1.0, 1.0, 0.0),
            y1: 0.1,
            y2: 0.0,
            phi_y: 0.0,
            signal_power: 1.0,
        };
        assert!(matches!(optimal_phase(&t), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn optimal_phase_beats_grid_and_is_stationary() {
        let b = budget();
        for seed in 0..60 {
            let k = 2 + seed as usize % 7;
            let m = 2 + seed as usize % 7;
            let inst = random_instance(seed + 100, k, m);
            let mut rng = rng_from_seed(seed);
            let phases = random_phases(&mut rng, m);
            let v_d = random_unit(&mut rng, k);
            let mm = 1 + rng.random_range(0..m);
            let t = phase_update_terms(&inst.h_b, &inst.h_e, &v_d, &phases, mm, &b).unwrap();
            let phi = optimal_phase(&t).unwrap();
            assert!(phi > -PI && phi <= PI);
            let best = t.slnr_at(phi);
            let grid = (0..10_000)
                .map(|i| t.slnr_at(-PI + 2.0 * PI * (i + 1) as f64 / 10_000.0))
                .fold(f64::MIN, f64::max);
            assert!(best >= grid * (1.0 - 1e-6), "seed {seed}: {best} < {grid}");
            assert!(t.derivative_at(phi).abs() < 1e-6);
            let h = 1e-5;
            let fd = (t.slnr_at(phi + h) - t.slnr_at(phi - h)) / (2.0 * h);
            assert!(fd.abs() < 1e-4, "finite difference {fd}");
        }
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let b = budget();
        let inst = random_instance(5, 6, 4);
        let mut rng = rng_from_seed(6);
        let phases = random_phases(&mut rng, 4);
        let v_d = random_unit(&mut rng, 6);
        let t = phase_update_terms(&inst.h_b, &inst.h_e, &v_d, &phases, 3, &b).unwrap();
        for i in 0..50 {
            let phi = -PI + 2.0 * PI * i as f64 / 50.0;
            let h = 1e-6;
            let fd = (t.slnr_at(phi + h) - t.slnr_at(phi - h)) / (2.0 * h);
            let an = t.derivative_at(phi);
            assert!(
                (fd - an).abs() < 1e-6 * (1.0 + an.abs()),
                "{phi}: {fd} vs {an}"
            );
        }
    }

    #[test]
    fn analog_sweep_single_element_zero_eve() {
        let cfg =
            ArrayConfig::with_random_frequencies(ArrayParams::with_partition(3, 1), 1).unwrap();
        let h_b = cfg.steering_vector(&PolarPosition::from_degrees(45.0, 600.0).unwrap());
        let h_e = vec![Complex64::new(0.0, 0.0); 3];
        let mut rng = rng_from_seed(3);
        let v_d = random_unit(&mut rng, 3);
        let b = budget();
        let s = analog_sweep(&h_b, &h_e, &v_d, &[1.0], &b, 1e-8, 50).unwrap();
        assert_eq!(s.sweeps, 1);
        assert!(s.converged);
        // M = 1: the phase is global and leaves the SLNR unchanged.
        let want = b.signal_power() * inner(&h_b, &v_d).norm_sqr() / b.noise_var();
        assert!((s.slnr - want).abs() < 1e-12 * want);
    }

    #[test]
    fn analog_sweep_is_monotone_per_coordinate() {
        let b = budget();
        for seed in 0..30 {
            let inst = random_instance(seed, 3 + seed as usize % 5, 2 + seed as usize % 6);
            let mut rng = rng_from_seed(derive_seed(seed, 1));
            let v_d = random_unit(&mut rng, inst.k);
            let init = random_phases(&mut rng, inst.m);
            let s = analog_sweep(&inst.h_b, &inst.h_e, &v_d, &init, &b, 1e-8, 50).unwrap();
            assert!(s.history.windows(2).all(|w| w[1] >= w[0]));
            let dense = slnr(&inst.h_b, &inst.h_e, &s.beam, &v_d, &b).unwrap();
            assert!((dense - s.slnr).abs() < 1e-9 * dense.max(1.0));
        }
    }

    #[test]
    fn analog_sweep_reaches_multistart_best() {
        let b = budget();
        for seed in 0..10 {
            let inst = random_instance(seed + 50, 4, 3);
            let mut rng = rng_from_seed(derive_seed(seed, 2));
            let v_d = random_unit(&mut rng, inst.k);
            let init = random_phases(&mut rng, inst.m);
            let run = analog_sweep(&inst.h_b, &inst.h_e, &v_d, &init, &b, 1e-8, 500).unwrap();
            let best = (0..20)
                .map(|_| {
                    let start = random_phases(&mut rng, inst.m);
                    analog_sweep(&inst.h_b, &inst.h_e, &v_d, &start, &b, 1e-12, 2000)
                        .unwrap()
                        .slnr
                })
                .fold(f64::MIN, f64::max);
            // Coordinate ascent can stall in a local optimum; accept the
            // multistart best or a stationary point no worse than 1e-4 below it.
            let gap = (best - run.slnr) / best;
            assert!(
                gap < 1e-4 || is_coordinatewise_optimal(&inst, &v_d, &run.beam, &b),
                "seed {seed}: gap {gap}"
            );
        }
    }

    fn is_coordinatewise_optimal(
        inst: &Instance,
        v_d: &[Complex64],
        beam: &AnalogBeam,
        b: &LinkBudget,
    ) -> bool {
        (1..=inst.m).all(|mm| {
            let t = phase_update_terms(&inst.h_b, &inst.h_e, v_d, beam.phases(), mm, b).unwrap();
            match optimal_phase(&t) {
                Ok(phi) => t.slnr_at(phi) <= t.slnr_at(beam.phases()[mm - 1]) * (1.0 + 1e-6),
                Err(_) => true,
            }
        })
    }

    #[test]
    fn digital_and_an_reductions() {
        let inst = random_instance(8, 5, 3);
        let beam = AnalogBeam::from_phases(vec![0.2, -1.0, 2.5]).unwrap();
        let g_b = effective_channel(&inst.h_b, &beam).unwrap();
        let g_e = effective_channel(&inst.h_e, &beam).unwrap();
        let parallel =
            |v: &[Complex64], g: &[Complex64]| inner(v, g).norm() / norm(g) > 1.0 - 1e-12;

        let no_signal_power = LinkBudget::new(4.0, 0.0, 1.0).unwrap();
        let v = solve_digital(&inst.h_b, &inst.h_e, &beam, &no_signal_power).unwrap();
        assert!(parallel(&v, &g_b));

        let all_signal = LinkBudget::new(4.0, 1.0, 1.0).unwrap();
        let w = solve_an(&inst.h_b, &inst.h_e, &beam, &all_signal).unwrap();
        assert!(parallel(&w, &g_e));

        let zero = vec![Complex64::new(0.0, 0.0); inst.h_b.len()];
        let v = solve_digital(&inst.h_b, &zero, &beam, &budget()).unwrap();
        assert!(parallel(&v, &g_b));
        let w = solve_an(&zero, &inst.h_e, &beam, &budget()).unwrap();
        assert!(parallel(&w, &g_e));

        assert!(solve_digital(&zero, &inst.h_e, &beam, &budget()).is_err());
    }

    #[test]
    fn eigen_solutions_dominate_random_unit_vectors() {
        let b = budget();
        for seed in 0..20 {
            let inst = random_instance(seed + 300, 2 + seed as usize % 7, 1 + seed as usize % 4);
            let mut rng = rng_from_seed(seed);
            let beam = AnalogBeam::from_phases(random_phases(&mut rng, inst.m)).unwrap();
            let v = solve_digital(&inst.h_b, &inst.h_e, &beam, &b).unwrap();
            let w = solve_an(&inst.h_b, &inst.h_e, &beam, &b).unwrap();
            assert!((norm(&v) - 1.0).abs() < 1e-12 && (norm(&w) - 1.0).abs() < 1e-12);
            let best_s = slnr(&inst.h_b, &inst.h_e, &beam, &v, &b).unwrap();
            let best_a = anlnr(&inst.h_b, &inst.h_e, &beam, &w, &b).unwrap();
            for _ in 0..5_000 {
                let x = random_unit(&mut rng, inst.k);
                assert!(
                    slnr(&inst.h_b, &inst.h_e, &beam, &x, &b).unwrap() <= best_s * (1.0 + 1e-12)
                );
                assert!(
                    anlnr(&inst.h_b, &inst.h_e, &beam, &x, &b).unwrap() <= best_a * (1.0 + 1e-12)
                );
            }
        }
    }

    #[test]
    fn scalar_problem_solves_in_one_outer_iteration() {
        let cfg =
            ArrayConfig::with_random_frequencies(ArrayParams::with_partition(1, 1), 4).unwrap();
        let h_b = cfg.steering_vector(&PolarPosition::from_degrees(45.0, 600.0).unwrap());
        let h_e = cfg.steering_vector(&PolarPosition::from_degrees(120.0, 300.0).unwrap());
        let b = budget();
        let sol = optimize_hybrid(
            &h_b,
            &h_e,
            1,
            &b,
            &SolverOptions::default(),
            Initialization::Random { seed: 9 },
        )
        .unwrap();
        assert_eq!(sol.outer_iterations, 1);
        assert!(sol.converged);
        assert!((sol.digital[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((sol.analog_vector()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solution_invariants_hold() {
        let b = budget();
        for seed in 0..20 {
            let inst = random_instance(seed + 700, 2 + seed as usize % 7, 1 + seed as usize % 5);
            let sol = optimize_hybrid(
                &inst.h_b,
                &inst.h_e,
                inst.m,
                &b,
                &SolverOptions::default(),
                Initialization::Random { seed },
            )
            .unwrap();
            let amp = 1.0 / (inst.m as f64).sqrt();
            assert!(sol
                .analog_vector()
                .iter()
                .all(|x| (x.norm() - amp).abs() < 1e-12));
            assert!((norm(&sol.digital) - 1.0).abs() < 1e-12);
            assert!((norm(&sol.an) - 1.0).abs() < 1e-12);
            assert!(sol.slnr_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            assert!(sol.slnr_trace.iter().all(|&s| s <= b.slnr_bound() + 1e-9));
            assert_eq!(sol.slnr_trace.len(), sol.outer_iterations + 1);
        }
    }

    #[test]
    fn alternation_matches_multistart_on_small_instances() {
        let b = budget();
        let opts = SolverOptions {
            tol_outer: 1e-10,
            tol_inner: 1e-10,
            max_outer: 200,
            max_inner: 200,
        };
        let mut within = 0;
        for seed in 0..10 {
            let inst = random_instance(seed + 900, 4, 2);
            let run = optimize_hybrid(
                &inst.h_b,
                &inst.h_e,
                2,
                &b,
                &SolverOptions::default(),
                Initialization::Random { seed },
            )
            .unwrap();
            let best = (0..50)
                .map(|s| {
                    optimize_hybrid(
                        &inst.h_b,
                        &inst.h_e,
                        2,
                        &b,
                        &opts,
                        Initialization::Random {
                            seed: derive_seed(seed, s),
                        },
                    )
                    .unwrap()
                    .final_slnr()
                })
                .fold(f64::MIN, f64::max);
            assert!(run.final_slnr() <= best * (1.0 + 1e-9));
            if (best - run.final_slnr()) / best < 1e-3 {
                within += 1;
            }
        }
        assert!(
            within >= 9,
            "only {within}/10 runs reached the multistart best"
        );
    }

    #[test]
    fn given_initialization_is_validated() {
        let inst = random_instance(1, 4, 2);
        let bad = Initialization::Given {
            phases: vec![0.0; 3],
            digital: vec![Complex64::new(1.0, 0.0); 4],
        };
        assert!(optimize_hybrid(
            &inst.h_b,
            &inst.h_e,
            2,
            &budget(),
            &SolverOptions::default(),
            bad
        )
        .is_err());
        assert!(optimize_hybrid(
            &inst.h_b,
            &inst.h_e,
            3,
            &budget(),
            &SolverOptions::default(),
            Initialization::Random { seed: 0 }
        )
        .is_err());
    }
}
