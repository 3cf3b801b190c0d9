//! Comparison schemes and a scheme-agnostic view of a finished design.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::array::{effective_channel, AnalogBeam};
use crate::leakage::{leakage_beamformer, slnr, HybridSolution, Initialization, LinkBudget};
use crate::linalg::{fix_global_phase, inner, norm, norm_sqr, normalize};
use crate::math::atan2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// Proposed hybrid SLNR/ANLNR design.
    HybridMslnrAnlnr,
    /// Fully digital leakage design, one RF chain per antenna.
    Fdb,
    /// Hybrid equal-amplitude design (Bob-matched, zero-forced AN).
    EaHybrid,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [
        SchemeId::HybridMslnrAnlnr,
        SchemeId::Fdb,
        SchemeId::EaHybrid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::HybridMslnrAnlnr => "hybrid_mslnr_anlnr",
            SchemeId::Fdb => "fdb",
            SchemeId::EaHybrid => "ea_hybrid",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown scheme `{s}`")))
    }
}

/// Fully digital beamformers, both of length `N` and unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FdbSolution {
    pub digital: Vec<Complex64>,
    pub an: Vec<Complex64>,
}

/// Leakage design with the analog stage replaced by the identity:
/// `v_d ~ (alpha P h_E h_E^H + sigma^2 I)^{-1} h_B` and
/// `w ~ ((1 - alpha) P h_B h_B^H + sigma^2 I)^{-1} h_E`.
pub fn solve_fdb(h_b: &[Complex64], h_e: &[Complex64], budget: &LinkBudget) -> Result<FdbSolution> {
    Ok(FdbSolution {
        digital: leakage_beamformer(h_b, h_e, budget.signal_power(), budget.noise_var())?,
        an: leakage_beamformer(h_e, h_b, budget.an_power(), budget.noise_var())?,
    })
}

/// Hybrid starting point that best reproduces a fully digital beamformer.
///
/// Element `m` of the analog stage takes the phase of element `m` relative to
/// element 1, pooled over all sub-arrays; `v_d` is the least-squares fit
/// `V_A^H f` (the columns of `V_A` are orthonormal).
pub fn fdb_warm_start(fdb: &FdbSolution, subarray_size: usize) -> Result<Initialization> {
    let f = &fdb.digital;
    if subarray_size == 0 || f.is_empty() || f.len() % subarray_size != 0 {
        return Err(Error::DimensionMismatch {
            what: "fully digital beamformer as a multiple of the sub-array size",
            expected: subarray_size * (f.len() / subarray_size.max(1)).max(1),
            found: f.len(),
        });
    }
    let phases: Vec<f64> = (0..subarray_size)
        .map(|m| {
            let pooled: Complex64 = f
                .chunks_exact(subarray_size)
                .map(|block| block[m] * block[0].conj())
                .sum();
            atan2(pooled.im, pooled.re)
        })
        .collect();
    let beam = AnalogBeam::from_phases(phases.clone())?;
    let digital = effective_channel(f, &beam)?;
    Ok(Initialization::Given { phases, digital })
}

/// Equal-amplitude hybrid baseline.
///
/// The analog phases conjugate-match the desired user's phase pattern across
/// the first sub-array, `v_d` is the normalized effective channel of the
/// desired user (so `g_B^H v_d` is real positive), and `w` is the unit vector
/// in the null space of `g_B^H` closest to `g_E`, which zero-forces the
/// artificial noise at the desired user. Needs `K >= 2`.
pub fn solve_ea(
    h_b: &[Complex64],
    h_e: &[Complex64],
    subarray_size: usize,
    budget: &LinkBudget,
) -> Result<HybridSolution> {
    if subarray_size == 0 || h_b.len() % subarray_size != 0 || h_b.len() != h_e.len() {
        return Err(Error::DimensionMismatch {
            what: "channel length as a multiple of the sub-array size",
            expected: subarray_size * (h_b.len() / subarray_size.max(1)).max(1),
            found: h_b.len(),
        });
    }
    let k = h_b.len() / subarray_size;
    if k < 2 {
        return Err(Error::InvalidConfig(
            "the equal-amplitude scheme needs at least two sub-arrays".into(),
        ));
    }
    let phases = h_b[..subarray_size]
        .iter()
        .map(|z| atan2(z.im, z.re))
        .collect();
    let analog = AnalogBeam::from_phases(phases)?;
    let g_b = effective_channel(h_b, &analog)?;
    let g_e = effective_channel(h_e, &analog)?;

    let gain = norm(&g_b);
    if !(gain > 0.0) {
        return Err(Error::DegenerateChannel(
            "desired user has a zero effective channel",
        ));
    }
    let digital: Vec<Complex64> = g_b.iter().map(|z| z / gain).collect();

    let mut an = project_out(&g_e, &g_b);
    if norm(&an) <= 1e-12 * norm(&g_e).max(f64::MIN_POSITIVE) {
        // Eve is indistinguishable from Bob after the analog stage; any unit
        // vector orthogonal to g_B zero-forces the noise equally well.
        an = (0..k)
            .map(|j| {
                let mut e = alloc::vec![Complex64::new(0.0, 0.0); k];
                e[j] = Complex64::new(1.0, 0.0);
                project_out(&e, &g_b)
            })
            .max_by(|a, b| norm_sqr(a).total_cmp(&norm_sqr(b)))
            .expect("k >= 2");
    }
    normalize(&mut an)?;
    fix_global_phase(&mut an);

    let value = slnr(h_b, h_e, &analog, &digital, budget)?;
    Ok(HybridSolution {
        analog,
        digital,
        an,
        slnr_trace: alloc::vec![value],
        outer_iterations: 0,
        inner_sweeps: 0,
        converged: true,
    })
}

/// `x - u (u^H x) / |u|^2`.
fn project_out(x: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
    let coeff = inner(u, x) / norm_sqr(u);
    x.iter().zip(u).map(|(xi, ui)| xi - ui * coeff).collect()
}

/// Transmit-side beamformers of any scheme.
///
/// Hybrid designs carry their analog stage; the fully digital design has
/// none and its effective channel is the array response itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitDesign {
    pub scheme: SchemeId,
    pub analog: Option<AnalogBeam>,
    pub digital: Vec<Complex64>,
    pub an: Vec<Complex64>,
}

impl TransmitDesign {
    pub fn hybrid(scheme: SchemeId, solution: &HybridSolution) -> Self {
        Self {
            scheme,
            analog: Some(solution.analog.clone()),
            digital: solution.digital.clone(),
            an: solution.an.clone(),
        }
    }

    /// The channel seen by the digital stage for array response `h`.
    pub fn effective_channel(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = match &self.analog {
            Some(beam) => effective_channel(h, beam)?,
            None => h.to_vec(),
        };
        if g.len() != self.digital.len() || g.len() != self.an.len() {
            return Err(Error::DimensionMismatch {
                what: "beamformer",
                expected: g.len(),
                found: self.digital.len(),
            });
        }
        Ok(g)
    }
}

impl From<&HybridSolution> for TransmitDesign {
    fn from(solution: &HybridSolution) -> Self {
        Self::hybrid(SchemeId::HybridMslnrAnlnr, solution)
    }
}

impl From<&FdbSolution> for TransmitDesign {
    fn from(solution: &FdbSolution) -> Self {
        Self {
            scheme: SchemeId::Fdb,
            analog: None,
            digital: solution.digital.clone(),
            an: solution.an.clone(),
        }
    }
}
