//! Receiver SINR, secrecy rate, SINR surfaces and FLOP counts.
//!
//! The received SINR at a location with array response `h` is
//! `alpha P |g^H v_d|^2 / ((1 - alpha) P |g^H w|^2 + sigma^2)` where `g` is
//! the effective channel of the design (`V_A^H h`, or `h` itself for the
//! fully digital scheme). The secrecy rate uses squared magnitudes and the
//! noise variance in both denominators.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::array::{ArrayConfig, PolarPosition};
use crate::leakage::LinkBudget;
use crate::linalg::inner;
use crate::math::{log10, log2};
use crate::schemes::{SchemeId, TransmitDesign};
use crate::{Error, Result};

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * log10(x)
}

/// SINR for an already-computed effective channel.
pub fn sinr_effective(
    g: &[Complex64],
    v_d: &[Complex64],
    w: &[Complex64],
    budget: &LinkBudget,
) -> f64 {
    budget.signal_power() * inner(g, v_d).norm_sqr()
        / (budget.an_power() * inner(g, w).norm_sqr() + budget.noise_var())
}

/// SINR of a receiver with array response `h`.
pub fn sinr_at(h: &[Complex64], design: &TransmitDesign, budget: &LinkBudget) -> Result<f64> {
    let g = design.effective_channel(h)?;
    Ok(sinr_effective(&g, &design.digital, &design.an, budget))
}

/// `log2(1 + SINR_B) - log2(1 + SINR_E)`; negative when Eve is better off.
pub fn secrecy_rate(
    h_b: &[Complex64],
    h_e: &[Complex64],
    design: &TransmitDesign,
    budget: &LinkBudget,
) -> Result<f64> {
    let bob = sinr_at(h_b, design, budget)?;
    let eve = sinr_at(h_e, design, budget)?;
    Ok(log2(1.0 + bob) - log2(1.0 + eve))
}

/// [`secrecy_rate`] floored at zero.
pub fn secrecy_rate_clamped(
    h_b: &[Complex64],
    h_e: &[Complex64],
    design: &TransmitDesign,
    budget: &LinkBudget,
) -> Result<f64> {
    secrecy_rate(h_b, h_e, design, budget).map(|sr| sr.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub position: PolarPosition,
    pub sinr_linear: f64,
}

impl SinrSample {
    pub fn sinr_db(&self) -> f64 {
        to_db(self.sinr_linear)
    }
}

/// Points `start, start + step, ...` up to `stop` inclusive (with a small
/// allowance for rounding). Built by multiplication so long grids do not
/// accumulate error.
pub fn stepped_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "grid step {step} must be positive and bounds finite"
        )));
    }
    if stop < start {
        return Err(Error::EmptyGrid);
    }
    let count = ((stop - start) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// SINR over the Cartesian product of `angles_rad` and `ranges_m`, angle-major.
pub fn sinr_surface(
    config: &ArrayConfig,
    design: &TransmitDesign,
    budget: &LinkBudget,
    angles_rad: &[f64],
    ranges_m: &[f64],
) -> Result<Vec<SinrSample>> {
    if angles_rad.is_empty() || ranges_m.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut out = Vec::with_capacity(angles_rad.len() * ranges_m.len());
    for &theta in angles_rad {
        for &range in ranges_m {
            let position = PolarPosition::new(theta, range)?;
            let h = config.steering_vector(&position);
            out.push(SinrSample {
                position,
                sinr_linear: sinr_at(&h, design, budget)?,
            });
        }
    }
    Ok(out)
}

/// Hybrid design cost: `T (3K^3 + 3K^2 + 5KN) + 3K^3 + 2K(2N + K)`.
pub fn flops_hybrid(n_subarrays: u64, n_antennas: u64, iterations: u64) -> u128 {
    let k = n_subarrays as u128;
    let n = n_antennas as u128;
    let t = iterations as u128;
    t * (3 * k * k * k + 3 * k * k + 5 * k * n) + 3 * k * k * k + 2 * k * (2 * n + k)
}

/// Fully digital design cost: `3N^3 + 4N^2`.
pub fn flops_fdb(n_antennas: u64) -> u128 {
    let n = n_antennas as u128;
    3 * n * n * n + 4 * n * n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopReport {
    pub scheme: SchemeId,
    pub n_antennas: u64,
    pub n_subarrays: u64,
    pub iterations: u64,
    pub flops: u128,
}

impl FlopReport {
    pub fn hybrid(n_antennas: u64, n_subarrays: u64, iterations: u64) -> Self {
        Self {
            scheme: SchemeId::HybridMslnrAnlnr,
            n_antennas,
            n_subarrays,
            iterations,
            flops: flops_hybrid(n_subarrays, n_antennas, iterations),
        }
    }

    /// The fully digital scheme has `K = N` RF chains and no iterations.
    pub fn fdb(n_antennas: u64) -> Self {
        Self {
            scheme: SchemeId::Fdb,
            n_antennas,
            n_subarrays: n_antennas,
            iterations: 0,
            flops: flops_fdb(n_antennas),
        }
    }
}
