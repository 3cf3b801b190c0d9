//! Experiment configuration.
//!
//! A TOML file whose tables mirror the model: `[array]`, `[bob]`, `[eve]`,
//! `[budget]`, `[sweep]`, `[seeds]`, `[solver]`, `[surface]`, `[flops]` and
//! `[output]`. Every key is optional; an empty file reproduces the reference
//! deployment (N = 128 in 32 sub-arrays of 4, 3 GHz carrier, 20 MHz over
//! 1024 sub-carriers, Bob at 45 deg / 600 m, Eve at 120 deg / 300 m).
//!
//! ```toml
//! [array]
//! n_subarrays = 16
//! subarray_size = 8
//! n_antennas = 128
//!
//! [budget]
//! total_power = 31.6
//! alloc_factor = 0.9
//!
//! [seeds]
//! master = 7
//! trials = 20
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use spwt_core::array::{ArrayConfig, ArrayParams, PolarPosition};
use spwt_core::leakage::{LinkBudget, SolverOptions};
use spwt_core::metrics::stepped_grid;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArraySection,
    pub bob: PositionSection,
    pub eve: PositionSection,
    pub budget: BudgetSection,
    pub sweep: SweepSection,
    pub seeds: SeedSection,
    pub solver: SolverSection,
    pub surface: SurfaceSection,
    pub flops: FlopsSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            array: ArraySection::default(),
            bob: PositionSection {
                angle_deg: 45.0,
                distance_m: 600.0,
            },
            eve: PositionSection {
                angle_deg: 120.0,
                distance_m: 300.0,
            },
            budget: BudgetSection::default(),
            sweep: SweepSection::default(),
            seeds: SeedSection::default(),
            solver: SolverSection::default(),
            surface: SurfaceSection::default(),
            flops: FlopsSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub n_antennas: Option<usize>,
    pub n_subarrays: usize,
    pub subarray_size: usize,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub n_subcarriers: usize,
    /// Defaults to half a carrier wavelength.
    pub element_spacing_m: Option<f64>,
    /// Explicit 1-based sub-carrier indices; disables random allocation.
    pub freq_indices: Option<Vec<u32>>,
    /// Draw a fresh allocation for every trial (otherwise one draw from
    /// `freq_seed` is shared by all trials).
    pub reseed_frequencies: bool,
    pub freq_seed: Option<u64>,
}

impl Default for ArraySection {
    fn default() -> Self {
        let p = ArrayParams::default();
        Self {
            n_antennas: None,
            n_subarrays: p.n_subarrays,
            subarray_size: p.subarray_size,
            carrier_hz: p.carrier_hz,
            subcarrier_spacing_hz: p.subcarrier_spacing_hz,
            n_subcarriers: p.n_subcarriers,
            element_spacing_m: None,
            freq_indices: None,
            reseed_frequencies: true,
            freq_seed: None,
        }
    }
}

impl ArraySection {
    pub fn params(&self) -> ArrayParams {
        ArrayParams {
            n_antennas: self
                .n_antennas
                .unwrap_or(self.n_subarrays * self.subarray_size),
            n_subarrays: self.n_subarrays,
            subarray_size: self.subarray_size,
            carrier_hz: self.carrier_hz,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz,
            n_subcarriers: self.n_subcarriers,
            element_spacing_m: self.element_spacing_m,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PositionSection {
    pub angle_deg: f64,
    pub distance_m: f64,
}

impl Default for PositionSection {
    fn default() -> Self {
        Self {
            angle_deg: 90.0,
            distance_m: 0.0,
        }
    }
}

impl PositionSection {
    pub fn position(&self) -> Result<PolarPosition, CliError> {
        Ok(PolarPosition::from_degrees(
            self.angle_deg,
            self.distance_m,
        )?)
    }
}

/// Operating point for `design` and `convergence`. Linear units.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub total_power: f64,
    pub alloc_factor: f64,
    pub noise_var: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            // 15 dB over unit noise.
            total_power: 10f64.powf(1.5),
            alloc_factor: 0.5,
            noise_var: 1.0,
        }
    }
}

impl BudgetSection {
    pub fn budget(&self) -> Result<LinkBudget, CliError> {
        Ok(LinkBudget::new(
            self.total_power,
            self.alloc_factor,
            self.noise_var,
        )?)
    }

    /// `P / sigma^2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.total_power / self.noise_var).log10()
    }
}

/// SNR axis is `P / sigma^2` in dB with `sigma^2 = 1`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_grid_db: Vec<f64>,
    pub alpha_list: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            alpha_list: vec![0.1, 0.5, 0.9],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub master: u64,
    pub trials: usize,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            master: 1,
            trials: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Random,
    FdbWarmStart,
}

impl InitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitKind::Random => "random",
            InitKind::FdbWarmStart => "fdb_warm_start",
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Starting point of the hybrid solver in `design`, `surface` and `sweep-snr`.
    pub init: InitKind,
    pub tol_outer: f64,
    pub tol_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            init: InitKind::Random,
            tol_outer: o.tol_outer,
            tol_inner: o.tol_inner,
            max_outer: o.max_outer,
            max_inner: o.max_inner,
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol_outer: self.tol_outer,
            tol_inner: self.tol_inner,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    pub angle_start_deg: f64,
    pub angle_stop_deg: f64,
    pub angle_step_deg: f64,
    pub range_start_m: f64,
    pub range_stop_m: f64,
    pub range_step_m: f64,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        Self {
            angle_start_deg: 0.0,
            angle_stop_deg: 180.0,
            angle_step_deg: 1.0,
            range_start_m: 0.0,
            range_stop_m: 1200.0,
            range_step_m: 10.0,
        }
    }
}

impl SurfaceSection {
    pub fn angles_deg(&self) -> Result<Vec<f64>, CliError> {
        Ok(stepped_grid(
            self.angle_start_deg,
            self.angle_stop_deg,
            self.angle_step_deg,
        )?)
    }

    pub fn ranges_m(&self) -> Result<Vec<f64>, CliError> {
        Ok(stepped_grid(
            self.range_start_m,
            self.range_stop_m,
            self.range_step_m,
        )?)
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FlopsSection {
    pub n_antennas: Vec<u64>,
    pub subarray_sizes: Vec<u64>,
    pub iterations: u64,
}

impl Default for FlopsSection {
    fn default() -> Self {
        Self {
            n_antennas: vec![16, 32, 64, 96, 128, 192, 256, 384, 512],
            subarray_sizes: vec![2, 4, 8],
            iterations: 3,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File name suffix: `<command>_<tag>.csv`.
    pub tag: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            tag: "run".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.array.freq_indices {
            Some(eta) => {
                ArrayConfig::new(self.array.params(), eta.clone())?;
            }
            None => {
                spwt_core::array::allocate_frequencies(
                    self.array.n_subcarriers,
                    self.array.n_subarrays,
                    0,
                )?;
                ArrayConfig::new(
                    self.array.params(),
                    (1..=self.array.n_subarrays as u32).collect(),
                )?;
            }
        }
        self.bob.position()?;
        self.eve.position()?;
        self.budget.budget()?;
        if self.seeds.trials == 0 {
            return Err(CliError::Config("seeds.trials must be at least 1".into()));
        }
        if let Some(a) = self
            .sweep
            .alpha_list
            .iter()
            .find(|a| !(0.0..=1.0).contains(*a))
        {
            return Err(CliError::Config(format!(
                "sweep.alpha_list entry {a} outside [0, 1]"
            )));
        }
        if let Some(s) = self.sweep.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(CliError::Config(format!(
                "sweep.snr_grid_db entry {s} is not finite"
            )));
        }
        let s = &self.solver;
        if s.tol_outer.is_nan()
            || s.tol_inner.is_nan()
            || s.tol_outer < 0.0
            || s.tol_inner < 0.0
            || s.max_outer == 0
            || s.max_inner == 0
        {
            return Err(CliError::Config(
                "solver tolerances must be non-negative and iteration caps positive".into(),
            ));
        }
        self.surface.angles_deg()?;
        self.surface.ranges_m()?;
        if self.surface.angle_start_deg < 0.0 || self.surface.angle_stop_deg > 180.0 {
            return Err(CliError::Config(
                "surface angles must lie in [0, 180] deg".into(),
            ));
        }
        if self.surface.range_start_m < 0.0 {
            return Err(CliError::Config(
                "surface ranges must be non-negative".into(),
            ));
        }
        if self.output.tag.is_empty()
            || !self
                .output
                .tag
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(CliError::Config(format!(
                "output.tag `{}` must be non-empty [A-Za-z0-9_-]",
                self.output.tag
            )));
        }
        Ok(())
    }
}
