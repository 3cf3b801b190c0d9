//! The five studies behind the CLI subcommands.
//!
//! Trial `t` uses the sub-seed `derive_seed(master, t)`; the sub-carrier
//! allocation and the solver initialization each draw from their own stream
//! of that sub-seed, so raising `seeds.trials` leaves earlier trials intact.

use log::warn;
use spwt_core::array::{ArrayConfig, SteeringVector};
use spwt_core::leakage::{
    leakage_ratio, optimize_hybrid, slnr, Initialization, LinkBudget, SolverOptions,
};
use spwt_core::metrics::{flops_fdb, flops_hybrid, sinr_at, sinr_surface, to_db, SinrSample};
use spwt_core::rng::{derive_seed, stream};
use spwt_core::schemes::{
    fdb_warm_start, solve_ea, solve_fdb, FdbSolution, SchemeId, TransmitDesign,
};
use spwt_core::Complex64;

use crate::config::{ExperimentConfig, InitKind};
use crate::error::CliError;
use crate::table::{num, Table};

/// Stream id reserved for the shared (non-reseeded) allocation.
const SHARED_FREQUENCIES: u64 = u64::MAX;

/// Everything a trial needs before any solver runs.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub trial: usize,
    pub seed: u64,
    pub init_seed: u64,
    pub array: ArrayConfig,
    pub h_b: SteeringVector,
    pub h_e: SteeringVector,
}

pub fn trial_setup(cfg: &ExperimentConfig, trial: usize) -> Result<TrialSetup, CliError> {
    let seed = derive_seed(cfg.seeds.master, trial as u64);
    let params = cfg.array.params();
    let array = match &cfg.array.freq_indices {
        Some(eta) => ArrayConfig::new(params, eta.clone())?,
        None => {
            let freq_seed = if cfg.array.reseed_frequencies {
                derive_seed(seed, stream::FREQUENCIES)
            } else {
                cfg.array.freq_seed.unwrap_or_else(|| {
                    derive_seed(
                        derive_seed(cfg.seeds.master, SHARED_FREQUENCIES),
                        stream::FREQUENCIES,
                    )
                })
            };
            ArrayConfig::with_random_frequencies(params, freq_seed)?
        }
    };
    let h_b = array.steering_vector(&cfg.bob.position()?);
    let h_e = array.steering_vector(&cfg.eve.position()?);
    Ok(TrialSetup {
        trial,
        seed,
        init_seed: derive_seed(seed, stream::INIT),
        array,
        h_b,
        h_e,
    })
}

fn setups(cfg: &ExperimentConfig) -> Result<Vec<TrialSetup>, CliError> {
    (0..cfg.seeds.trials).map(|t| trial_setup(cfg, t)).collect()
}

/// One scheme evaluated at one operating point.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub design: TransmitDesign,
    pub sinr_bob: f64,
    pub sinr_eve: f64,
    pub secrecy_rate: f64,
    pub slnr: f64,
    pub outer_iterations: usize,
    /// SLNR per outer iteration (hybrid only; single entry otherwise).
    pub slnr_trace: Vec<f64>,
}

impl SchemeOutcome {
    fn evaluate(
        setup: &TrialSetup,
        design: TransmitDesign,
        slnr_value: f64,
        budget: &LinkBudget,
        outer_iterations: usize,
        slnr_trace: Vec<f64>,
    ) -> Result<Self, CliError> {
        let sinr_bob = sinr_at(&setup.h_b, &design, budget)?;
        let sinr_eve = sinr_at(&setup.h_e, &design, budget)?;
        Ok(Self {
            design,
            sinr_bob,
            sinr_eve,
            secrecy_rate: (1.0 + sinr_bob).log2() - (1.0 + sinr_eve).log2(),
            slnr: slnr_value,
            outer_iterations,
            slnr_trace,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.design.scheme
    }
}

fn initialization(
    setup: &TrialSetup,
    fdb: &FdbSolution,
    kind: InitKind,
) -> Result<Initialization, CliError> {
    Ok(match kind {
        InitKind::Random => Initialization::Random {
            seed: setup.init_seed,
        },
        InitKind::FdbWarmStart => fdb_warm_start(fdb, setup.array.subarray_size())?,
    })
}

/// Runs the hybrid, fully digital and equal-amplitude schemes for one trial.
/// The equal-amplitude scheme is left out (with a warning) when `K < 2`.
pub fn design_all(
    setup: &TrialSetup,
    budget: &LinkBudget,
    options: &SolverOptions,
    init: InitKind,
) -> Result<Vec<SchemeOutcome>, CliError> {
    let m = setup.array.subarray_size();
    let mut out = Vec::with_capacity(3);

    let fdb = solve_fdb(&setup.h_b, &setup.h_e, budget)?;
    let hybrid = optimize_hybrid(
        &setup.h_b,
        &setup.h_e,
        m,
        budget,
        options,
        initialization(setup, &fdb, init)?,
    )?;
    if !hybrid.converged {
        warn!(
            "trial {}: hybrid solver stopped at max_outer = {} before converging",
            setup.trial, options.max_outer
        );
    }
    out.push(SchemeOutcome::evaluate(
        setup,
        TransmitDesign::from(&hybrid),
        hybrid.final_slnr(),
        budget,
        hybrid.outer_iterations,
        hybrid.slnr_trace.clone(),
    )?);

    let fdb_slnr = leakage_ratio(
        &setup.h_b,
        &setup.h_e,
        &fdb.digital,
        budget.signal_power(),
        budget.noise_var(),
    );
    out.push(SchemeOutcome::evaluate(
        setup,
        TransmitDesign::from(&fdb),
        fdb_slnr,
        budget,
        0,
        vec![fdb_slnr],
    )?);

    if setup.array.n_subarrays() >= 2 {
        let ea = solve_ea(&setup.h_b, &setup.h_e, m, budget)?;
        let ea_slnr = slnr(&setup.h_b, &setup.h_e, &ea.analog, &ea.digital, budget)?;
        out.push(SchemeOutcome::evaluate(
            setup,
            TransmitDesign::hybrid(SchemeId::EaHybrid, &ea),
            ea_slnr,
            budget,
            0,
            vec![ea_slnr],
        )?);
    } else {
        warn!(
            "trial {}: equal-amplitude scheme needs K >= 2, skipped",
            setup.trial
        );
    }
    Ok(out)
}

/// `design` study: every trial at the `[budget]` operating point.
#[derive(Debug, Clone)]
pub struct DesignStudy {
    pub alpha: f64,
    pub snr_db: f64,
    pub slnr_bound: f64,
    pub trials: Vec<(TrialSetup, Vec<SchemeOutcome>)>,
}

pub fn run_design(cfg: &ExperimentConfig) -> Result<DesignStudy, CliError> {
    let budget = cfg.budget.budget()?;
    let options = cfg.solver.options();
    let trials = setups(cfg)?
        .into_iter()
        .map(|s| design_all(&s, &budget, &options, cfg.solver.init).map(|o| (s, o)))
        .collect::<Result<_, _>>()?;
    Ok(DesignStudy {
        alpha: budget.alloc_factor(),
        snr_db: cfg.budget.snr_db(),
        slnr_bound: budget.slnr_bound(),
        trials,
    })
}

impl DesignStudy {
    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(
            "design",
            vec![
                "scheme", "trial", "seed", "alpha", "snr_db", "metric", "value",
            ],
        );
        for (setup, outcomes) in &self.trials {
            for o in outcomes {
                let metrics = [
                    ("sinr_bob_db", to_db(o.sinr_bob)),
                    ("sinr_eve_db", to_db(o.sinr_eve)),
                    ("secrecy_rate", o.secrecy_rate),
                    ("slnr_db", to_db(o.slnr)),
                    ("outer_iterations", o.outer_iterations as f64),
                ];
                for (name, value) in metrics {
                    t.push(vec![
                        o.scheme().to_string(),
                        setup.trial.to_string(),
                        setup.seed.to_string(),
                        num(self.alpha),
                        num(self.snr_db),
                        name.into(),
                        num(value),
                    ]);
                }
            }
        }
        t
    }

    /// Beamformer entries; the analog stage also gets its phases.
    pub fn vectors_table(&self) -> Table {
        let mut t = Table::new(
            "design_vectors",
            vec!["scheme", "trial", "seed", "vector", "index", "re", "im"],
        );
        for (setup, outcomes) in &self.trials {
            for o in outcomes {
                let mut emit = |name: &str, v: &[Complex64]| {
                    for (i, z) in v.iter().enumerate() {
                        t.push(vec![
                            o.scheme().to_string(),
                            setup.trial.to_string(),
                            setup.seed.to_string(),
                            name.into(),
                            (i + 1).to_string(),
                            num(z.re),
                            num(z.im),
                        ]);
                    }
                };
                if let Some(beam) = &o.design.analog {
                    emit("analog", &beam.vector());
                }
                emit("digital", &o.design.digital);
                emit("an", &o.design.an);
            }
        }
        t
    }
}

/// `surface` study: hybrid design of trial 0 evaluated over the grid.
pub fn run_surface(cfg: &ExperimentConfig) -> Result<Vec<SinrSample>, CliError> {
    let budget = cfg.budget.budget()?;
    let setup = trial_setup(cfg, 0)?;
    let fdb = solve_fdb(&setup.h_b, &setup.h_e, &budget)?;
    let hybrid = optimize_hybrid(
        &setup.h_b,
        &setup.h_e,
        setup.array.subarray_size(),
        &budget,
        &cfg.solver.options(),
        initialization(&setup, &fdb, cfg.solver.init)?,
    )?;
    let angles: Vec<f64> = cfg
        .surface
        .angles_deg()?
        .into_iter()
        .map(f64::to_radians)
        .collect();
    Ok(sinr_surface(
        &setup.array,
        &TransmitDesign::from(&hybrid),
        &budget,
        &angles,
        &cfg.surface.ranges_m()?,
    )?)
}

pub fn surface_table(samples: &[SinrSample]) -> Table {
    let mut t = Table::new("surface", vec!["angle_deg", "range_m", "sinr_db"]);
    for s in samples {
        t.push(vec![
            num(s.position.angle_deg()),
            num(s.position.distance_m()),
            num(s.sinr_db()),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scheme: SchemeId,
    pub trial: usize,
    pub seed: u64,
    pub alpha: f64,
    pub snr_db: f64,
    pub secrecy_rate: f64,
}

/// `sweep-snr` study: secrecy rate of every scheme over `alpha_list x
/// snr_grid_db x trials`, with `P = 10^(snr/10)` and unit noise.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>, CliError> {
    if cfg.sweep.snr_grid_db.is_empty() || cfg.sweep.alpha_list.is_empty() {
        return Err(CliError::Config(
            "sweep-snr needs non-empty sweep.snr_grid_db and sweep.alpha_list".into(),
        ));
    }
    let options = cfg.solver.options();
    let setups = setups(cfg)?;
    let mut out = Vec::new();
    for &alpha in &cfg.sweep.alpha_list {
        for &snr_db in &cfg.sweep.snr_grid_db {
            let budget = LinkBudget::from_snr_db(snr_db, alpha)?;
            for setup in &setups {
                for o in design_all(setup, &budget, &options, cfg.solver.init)? {
                    out.push(SweepRecord {
                        scheme: o.scheme(),
                        trial: setup.trial,
                        seed: setup.seed,
                        alpha,
                        snr_db,
                        secrecy_rate: o.secrecy_rate,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Trial-averaged secrecy rate per `(scheme, alpha, snr_db)`, in first-seen order.
pub fn sweep_means(records: &[SweepRecord]) -> Vec<(SchemeId, f64, f64, f64)> {
    let mut keys: Vec<(SchemeId, f64, f64)> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for r in records {
        let key = (r.scheme, r.alpha, r.snr_db);
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                sums.push((0.0, 0));
                keys.len() - 1
            }
        };
        sums[idx].0 += r.secrecy_rate;
        sums[idx].1 += 1;
    }
    keys.into_iter()
        .zip(sums)
        .map(|((s, a, snr), (sum, n))| (s, a, snr, sum / n as f64))
        .collect()
}

pub fn sweep_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(
        "sweep_snr",
        vec![
            "scheme", "trial", "seed", "alpha", "snr_db", "metric", "value",
        ],
    );
    for r in records {
        t.push(vec![
            r.scheme.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            num(r.alpha),
            num(r.snr_db),
            "secrecy_rate".into(),
            num(r.secrecy_rate),
        ]);
    }
    for (scheme, alpha, snr_db, mean) in sweep_means(records) {
        t.push(vec![
            scheme.to_string(),
            "mean".into(),
            String::new(),
            num(alpha),
            num(snr_db),
            "secrecy_rate_mean".into(),
            num(mean),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub init: InitKind,
    pub trial: usize,
    pub seed: u64,
    pub slnr_trace: Vec<f64>,
    pub converged: bool,
}

/// `convergence` study: SLNR traces at the `[budget]` operating point from a
/// random start and from the fully digital warm start.
pub fn run_convergence(
    cfg: &ExperimentConfig,
) -> Result<(LinkBudget, Vec<ConvergenceRecord>), CliError> {
    let budget = cfg.budget.budget()?;
    let options = cfg.solver.options();
    let mut out = Vec::new();
    for setup in setups(cfg)? {
        let m = setup.array.subarray_size();
        let fdb = solve_fdb(&setup.h_b, &setup.h_e, &budget)?;
        for kind in [InitKind::Random, InitKind::FdbWarmStart] {
            let init = initialization(&setup, &fdb, kind)?;
            let sol = optimize_hybrid(&setup.h_b, &setup.h_e, m, &budget, &options, init)?;
            out.push(ConvergenceRecord {
                init: kind,
                trial: setup.trial,
                seed: setup.seed,
                slnr_trace: sol.slnr_trace,
                converged: sol.converged,
            });
        }
    }
    Ok((budget, out))
}

pub fn convergence_table(budget: &LinkBudget, records: &[ConvergenceRecord]) -> Table {
    let mut t = Table::new(
        "convergence",
        vec![
            "init",
            "trial",
            "seed",
            "alpha",
            "snr_db",
            "iteration",
            "metric",
            "value",
        ],
    );
    let snr_db = to_db(budget.total_power() / budget.noise_var());
    for r in records {
        for (i, s) in r.slnr_trace.iter().enumerate() {
            t.push(vec![
                r.init.as_str().into(),
                r.trial.to_string(),
                r.seed.to_string(),
                num(budget.alloc_factor()),
                num(snr_db),
                i.to_string(),
                "slnr_db".into(),
                num(to_db(*s)),
            ]);
        }
    }
    t
}

/// First outer iteration whose relative SLNR change drops below `tol`.
pub fn iterations_to_converge(trace: &[f64], tol: f64) -> Option<usize> {
    trace
        .windows(2)
        .position(|w| {
            let scale = w[1].abs().max(w[0].abs());
            scale == 0.0 || (w[1] - w[0]).abs() / scale < tol
        })
        .map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlopPoint {
    Counted {
        n_antennas: u64,
        subarray_size: u64,
        iterations: u64,
        hybrid: u128,
        fdb: u128,
    },
    /// `N` not divisible by `M`.
    Skipped { n_antennas: u64, subarray_size: u64 },
}

/// `flops` study: hybrid and fully digital cost for every `(N, M)` pair.
pub fn run_flops(cfg: &ExperimentConfig) -> Vec<FlopPoint> {
    let f = &cfg.flops;
    let mut out = Vec::new();
    for &m in &f.subarray_sizes {
        for &n in &f.n_antennas {
            if m == 0 || n % m != 0 {
                warn!("flops: N = {n} is not divisible by M = {m}, point skipped");
                out.push(FlopPoint::Skipped {
                    n_antennas: n,
                    subarray_size: m,
                });
                continue;
            }
            out.push(FlopPoint::Counted {
                n_antennas: n,
                subarray_size: m,
                iterations: f.iterations,
                hybrid: flops_hybrid(n / m, n, f.iterations),
                fdb: flops_fdb(n),
            });
        }
    }
    out
}

pub fn flops_table(points: &[FlopPoint]) -> Table {
    let mut t = Table::new(
        "flops",
        vec![
            "scheme",
            "n_antennas",
            "subarray_size",
            "n_subarrays",
            "iterations",
            "flops",
            "note",
        ],
    );
    for p in points {
        match *p {
            FlopPoint::Counted {
                n_antennas,
                subarray_size,
                iterations,
                hybrid,
                fdb,
            } => {
                t.push(vec![
                    SchemeId::HybridMslnrAnlnr.to_string(),
                    n_antennas.to_string(),
                    subarray_size.to_string(),
                    (n_antennas / subarray_size).to_string(),
                    iterations.to_string(),
                    hybrid.to_string(),
                    String::new(),
                ]);
                t.push(vec![
                    SchemeId::Fdb.to_string(),
                    n_antennas.to_string(),
                    subarray_size.to_string(),
                    n_antennas.to_string(),
                    "0".into(),
                    fdb.to_string(),
                    String::new(),
                ]);
            }
            FlopPoint::Skipped {
                n_antennas,
                subarray_size,
            } => t.push(vec![
                String::new(),
                n_antennas.to_string(),
                subarray_size.to_string(),
                String::new(),
                String::new(),
                String::new(),
                "skipped: N not divisible by M".into(),
            ]),
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            "[array]\nn_subarrays = 8\nsubarray_size = 2\n[seeds]\ntrials = 3\n[sweep]\nsnr_grid_db = [0.0, 10.0]\nalpha_list = [0.5]\n",
        )
        .unwrap()
    }

    #[test]
    fn trial_setups_are_stable_under_more_trials() {
        let mut cfg = small_cfg();
        let a = trial_setup(&cfg, 1).unwrap();
        cfg.seeds.trials = 50;
        let b = trial_setup(&cfg, 1).unwrap();
        assert_eq!(a.array, b.array);
        assert_eq!(a.init_seed, b.init_seed);
        assert_ne!(trial_setup(&cfg, 2).unwrap().array, a.array);
    }

    #[test]
    fn shared_allocation_when_not_reseeding() {
        let mut cfg = small_cfg();
        cfg.array.reseed_frequencies = false;
        let a = trial_setup(&cfg, 0).unwrap();
        let b = trial_setup(&cfg, 1).unwrap();
        assert_eq!(a.array, b.array);
        assert_ne!(a.init_seed, b.init_seed);

        cfg.array.freq_indices = Some(vec![3, 9, 27, 81, 243, 729, 1000, 1]);
        assert_eq!(trial_setup(&cfg, 4).unwrap().array.freq_indices()[2], 27);
    }

    #[test]
    fn sweep_means_average_trials() {
        let cfg = small_cfg();
        let records = run_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 3 * 2 * 3);
        let means = sweep_means(&records);
        assert_eq!(means.len(), 3 * 2);
        for (scheme, alpha, snr, mean) in &means {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == *scheme && r.alpha == *alpha && r.snr_db == *snr)
                .map(|r| r.secrecy_rate)
                .collect();
            assert!((xs.iter().sum::<f64>() / xs.len() as f64 - mean).abs() < 1e-15);
        }
        let table = sweep_table(&records);
        assert_eq!(table.rows.len(), records.len() + means.len());
    }

    #[test]
    fn flops_reports_skipped_points() {
        let mut cfg = small_cfg();
        cfg.flops.n_antennas = vec![128, 100];
        cfg.flops.subarray_sizes = vec![4, 8];
        let points = run_flops(&cfg);
        assert_eq!(points.len(), 4);
        assert!(points.contains(&FlopPoint::Skipped {
            n_antennas: 100,
            subarray_size: 8
        }));
        let t = flops_table(&points);
        assert_eq!(t.rows.len(), 2 + 2 + 2 + 1);
        assert!(t.rows.iter().any(|r| r[6].starts_with("skipped")));
    }

    #[test]
    fn iterations_to_converge_counts_outer_steps() {
        assert_eq!(
            iterations_to_converge(&[1.0, 2.0, 2.0001, 2.0001], 1e-3),
            Some(2)
        );
        assert_eq!(iterations_to_converge(&[1.0, 2.0, 3.0], 1e-3), None);
        assert_eq!(iterations_to_converge(&[0.0, 0.0], 1e-3), Some(1));
    }
}
