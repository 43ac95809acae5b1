//! Paired Monte Carlo ensembles under common random numbers.
//!
//! Each path index derives an independent noise substream from the master
//! seed. The baseline trajectory is simulated first; if the trigger fires at
//! `τ`, the converted branch copies the baseline up to `τ`, retires an `α`
//! fraction of debt there, and replays the identical noise from `τ` onward.
//! Differences between the branches therefore reflect the mechanism alone.
//!
//! Results are bitwise independent of the worker count: paths are processed
//! in fixed-size chunks, each chunk accumulates sequentially in path-index
//! order, and chunk partials are merged in chunk order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{
    apply_conversion, compute_payout, detect_hitting_times, HittingTimes, TokenPayout, TriggerSpec,
};
use crate::model::{grid_steps, resume_path, simulate_path, ModelConfig, PathRecord};
use crate::noise::{path_rng, PathNoise};

/// Sovereign default barrier: a branch defaults when its debt ratio reaches
/// 140% of GDP at any grid point within the horizon.
pub const DEFAULT_BARRIER: f64 = 1.40;

/// Tolerance for the pathwise dominance check: a grid point where converted
/// debt exceeds baseline debt by more than this counts as a violation.
pub const DOMINANCE_TOL: f64 = 1e-12;

/// Fixed chunk width for the deterministic parallel reduction. Compile-time
/// constant so the summation tree never depends on the worker count.
const CHUNK: usize = 64;

/// Ensemble dimensions and the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub n_paths: usize,
    /// Simulation horizon in years; the grid covers `[0, horizon]`.
    pub horizon: f64,
    /// Euler step in years.
    pub dt: f64,
    /// 64-bit master seed; path `i` uses substream `i`.
    pub seed: u64,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        SimulationPlan {
            n_paths: 10_000,
            horizon: 10.0,
            dt: 0.01,
            seed: 12345,
        }
    }
}

impl SimulationPlan {
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::invalid(
                format!("{field}.n_paths"),
                "must be at least 1".to_string(),
            ));
        }
        grid_steps(self.horizon, self.dt).map_err(|e| match e {
            Error::Invalid { field: f, message } => Error::Invalid {
                field: format!("{field}.{f}"),
                message,
            },
            other => other,
        })?;
        Ok(())
    }

    /// Number of Euler steps per path.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Baseline and converted trajectories for one path, with trigger, payout,
/// and default outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPathResult {
    pub baseline: PathRecord,
    pub converted: PathRecord,
    pub hitting: HittingTimes,
    /// Present only when the path triggered.
    pub payout: Option<TokenPayout>,
    pub default_baseline: bool,
    pub default_converted: bool,
}

impl PairedPathResult {
    /// Grid points after `τ` where converted debt exceeds baseline debt by
    /// more than [`DOMINANCE_TOL`]. Zero on every path is the empirical
    /// pathwise-dominance check.
    pub fn dominance_violations(&self) -> usize {
        match self.hitting.tau_index {
            Some(k_tau) => (k_tau..self.baseline.debt.len())
                .filter(|&k| self.converted.debt[k] > self.baseline.debt[k] + DOMINANCE_TOL)
                .count(),
            None => 0,
        }
    }
}

/// Per-path outcome kept by the ensemble aggregation.
///
/// Final debts are evaluated at the token maturity grid index (the grid end
/// when the plan horizon equals the maturity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub final_debt_baseline: f64,
    pub final_debt_converted: f64,
    pub hitting: HittingTimes,
    pub payout: Option<TokenPayout>,
    pub default_baseline: bool,
    pub default_converted: bool,
    pub dominance_violations: usize,
}

/// Aggregated ensemble output: per-path summaries in path-index order plus
/// pointwise mean debt trajectories for both branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub plan: SimulationPlan,
    /// Grid index at which maturity statistics are read.
    pub maturity_index: usize,
    pub times: Vec<f64>,
    pub mean_debt_baseline: Vec<f64>,
    pub mean_debt_converted: Vec<f64>,
    pub paths: Vec<PathSummary>,
    pub trigger_count: usize,
    pub dominance_violations: usize,
}

impl EnsembleResult {
    pub fn trigger_rate(&self) -> f64 {
        self.trigger_count as f64 / self.paths.len() as f64
    }
}

/// Simulate one paired path.
///
/// The substream is derived from `(plan.seed, path_index)`. The baseline is
/// simulated over the full grid; hitting times are detected on it; when
/// triggered, the converted branch restarts from
/// `((1-α)·D_τ⁻, g_τ, R_τ)` and replays the same noise. Default flags record
/// whether each branch ever reached [`DEFAULT_BARRIER`], checked inclusively
/// at every grid point.
pub fn run_paired_path(
    cfg: &ModelConfig,
    spec: &TriggerSpec,
    plan: &SimulationPlan,
    path_index: usize,
) -> Result<PairedPathResult> {
    if path_index >= plan.n_paths {
        return Err(Error::invalid(
            "path_index",
            format!("index {path_index} outside plan of {} paths", plan.n_paths),
        ));
    }
    let mut rng = path_rng(plan.seed, path_index as u64);
    let noise = PathNoise::generate(cfg, plan.horizon, plan.dt, &mut rng)?;
    let baseline = simulate_path(cfg, plan.horizon, plan.dt, &noise)?;
    let hitting = detect_hitting_times(&baseline, spec);

    let converted = if let Some(k_tau) = hitting.tau_index {
        let mut branch = baseline.clone();
        branch.debt[k_tau] = apply_conversion(baseline.debt[k_tau], spec.alpha)?;
        resume_path(cfg, &mut branch, k_tau, &noise)?;
        branch
    } else {
        baseline.clone()
    };

    let payout = if hitting.triggered {
        Some(compute_payout(&converted, &hitting, spec)?)
    } else {
        None
    };

    let crossed = |rec: &PathRecord| rec.debt.iter().any(|&d| d >= DEFAULT_BARRIER);
    Ok(PairedPathResult {
        default_baseline: crossed(&baseline),
        default_converted: crossed(&converted),
        baseline,
        converted,
        hitting,
        payout,
    })
}

struct ChunkAccum {
    sum_debt_baseline: Vec<f64>,
    sum_debt_converted: Vec<f64>,
    summaries: Vec<PathSummary>,
}

fn run_chunk(
    cfg: &ModelConfig,
    spec: &TriggerSpec,
    plan: &SimulationPlan,
    maturity_index: usize,
    range: std::ops::Range<usize>,
) -> Result<ChunkAccum> {
    let grid_len = plan.steps() + 1;
    let mut acc = ChunkAccum {
        sum_debt_baseline: vec![0.0; grid_len],
        sum_debt_converted: vec![0.0; grid_len],
        summaries: Vec::with_capacity(range.len()),
    };
    for path_index in range {
        let paired = run_paired_path(cfg, spec, plan, path_index).map_err(|e| Error::Path {
            path_index,
            source: Box::new(e),
        })?;
        for (s, &d) in acc.sum_debt_baseline.iter_mut().zip(&paired.baseline.debt) {
            *s += d;
        }
        for (s, &d) in acc.sum_debt_converted.iter_mut().zip(&paired.converted.debt) {
            *s += d;
        }
        acc.summaries.push(PathSummary {
            final_debt_baseline: paired.baseline.debt[maturity_index],
            final_debt_converted: paired.converted.debt[maturity_index],
            hitting: paired.hitting,
            payout: paired.payout,
            default_baseline: paired.default_baseline,
            default_converted: paired.default_converted,
            dominance_violations: paired.dominance_violations(),
        });
    }
    Ok(acc)
}

/// Run the full paired ensemble.
///
/// Aggregation is bitwise identical for any worker count; a failing path
/// aborts the run and reports the lowest failing index.
pub fn run_ensemble(
    cfg: &ModelConfig,
    spec: &TriggerSpec,
    plan: &SimulationPlan,
) -> Result<EnsembleResult> {
    cfg.validate("model")?;
    spec.validate("trigger")?;
    plan.validate("plan")?;
    if plan.horizon < spec.horizon {
        return Err(Error::invalid(
            "plan.horizon",
            format!(
                "grid must cover the token maturity; horizon {} < maturity {}",
                plan.horizon, spec.horizon
            ),
        ));
    }
    let steps = plan.steps();
    let maturity_index = ((spec.horizon / plan.dt).round() as usize).min(steps);

    let n_chunks = plan.n_paths.div_ceil(CHUNK);
    let chunks: Vec<Result<ChunkAccum>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(plan.n_paths);
            run_chunk(cfg, spec, plan, maturity_index, lo..hi)
        })
        .collect();

    let grid_len = steps + 1;
    let mut sum_base = vec![0.0; grid_len];
    let mut sum_conv = vec![0.0; grid_len];
    let mut paths = Vec::with_capacity(plan.n_paths);
    for chunk in chunks {
        let acc = chunk?;
        for (s, v) in sum_base.iter_mut().zip(&acc.sum_debt_baseline) {
            *s += v;
        }
        for (s, v) in sum_conv.iter_mut().zip(&acc.sum_debt_converted) {
            *s += v;
        }
        paths.extend(acc.summaries);
    }

    let n = plan.n_paths as f64;
    let trigger_count = paths.iter().filter(|p| p.hitting.triggered).count();
    let dominance_violations = paths.iter().map(|p| p.dominance_violations).sum();
    Ok(EnsembleResult {
        plan: *plan,
        maturity_index,
        times: (0..grid_len).map(|k| k as f64 * plan.dt).collect(),
        mean_debt_baseline: sum_base.into_iter().map(|s| s / n).collect(),
        mean_debt_converted: sum_conv.into_iter().map(|s| s / n).collect(),
        paths,
        trigger_count,
        dominance_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GeneratorMatrix, Regime};

    fn zero_noise_config() -> ModelConfig {
        let mut cfg = ModelConfig::default();
        for p in cfg.params_by_regime.iter_mut() {
            p.sigma = 0.0;
            p.kappa = 0.0;
            p.eta = 0.0;
            p.xi = 0.0;
        }
        cfg.q = GeneratorMatrix {
            lambda01: 0.0,
            lambda10: 0.0,
        };
        cfg.g0 = 0.02;
        cfg
    }

    fn small_plan(n: usize) -> SimulationPlan {
        SimulationPlan {
            n_paths: n,
            ..SimulationPlan::default()
        }
    }

    #[test]
    fn near_zero_alpha_is_a_no_op() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec {
            alpha: 1e-9,
            ..TriggerSpec::default()
        };
        let plan = small_plan(20);
        for i in 0..plan.n_paths {
            let paired = run_paired_path(&cfg, &spec, &plan, i).unwrap();
            assert!(
                (paired.converted.final_debt() - paired.baseline.final_debt()).abs() <= 1e-6,
                "path {i}"
            );
        }
    }

    #[test]
    fn zero_noise_hitting_times_match_ode_solutions() {
        // τ_D = 10 ln(5/3) ≈ 5.11, τ_g = 10 ln 2 ≈ 6.93, τ = max ≈ 6.93.
        let cfg = zero_noise_config();
        let spec = TriggerSpec::default();
        let plan = small_plan(1);
        let paired = run_paired_path(&cfg, &spec, &plan, 0).unwrap();
        assert!(paired.hitting.triggered);
        let tau_d = paired.hitting.tau_d.unwrap();
        let tau_g = paired.hitting.tau_g.unwrap();
        let tau = paired.hitting.tau.unwrap();
        assert!((tau_d - 5.1083).abs() <= 0.011, "tau_d = {tau_d}");
        assert!((tau_g - 6.9315).abs() <= 0.011, "tau_g = {tau_g}");
        assert_eq!(tau, tau_g.max(tau_d));

        let k_tau = paired.hitting.tau_index.unwrap();
        let expected = 0.7 * paired.baseline.debt[k_tau];
        assert_eq!(paired.converted.debt[k_tau], expected);
    }

    #[test]
    fn branches_share_noise_before_tau_and_growth_everywhere() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = small_plan(50);
        let mut saw_trigger = false;
        for i in 0..plan.n_paths {
            let paired = run_paired_path(&cfg, &spec, &plan, i).unwrap();
            assert_eq!(paired.baseline.growth, paired.converted.growth);
            assert_eq!(paired.baseline.regimes, paired.converted.regimes);
            match paired.hitting.tau_index {
                Some(k_tau) => {
                    saw_trigger = true;
                    assert_eq!(
                        paired.baseline.debt[..k_tau],
                        paired.converted.debt[..k_tau]
                    );
                }
                None => assert_eq!(paired.baseline, paired.converted),
            }
        }
        assert!(saw_trigger, "default config should trigger some of 50 paths");
    }

    #[test]
    fn paired_path_is_deterministic() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = small_plan(5);
        let a = run_paired_path(&cfg, &spec, &plan, 3).unwrap();
        let b = run_paired_path(&cfg, &spec, &plan, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn path_index_outside_plan_is_rejected() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = small_plan(5);
        assert!(run_paired_path(&cfg, &spec, &plan, 5).is_err());
    }

    #[test]
    fn singleton_ensemble_wraps_the_single_path() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = small_plan(1);
        let ensemble = run_ensemble(&cfg, &spec, &plan).unwrap();
        let paired = run_paired_path(&cfg, &spec, &plan, 0).unwrap();
        assert_eq!(ensemble.paths.len(), 1);
        assert_eq!(ensemble.mean_debt_baseline, paired.baseline.debt);
        assert_eq!(ensemble.mean_debt_converted, paired.converted.debt);
        assert_eq!(
            ensemble.paths[0].final_debt_baseline,
            paired.baseline.final_debt()
        );
    }

    #[test]
    fn ensemble_is_identical_across_worker_counts() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = SimulationPlan {
            n_paths: 100,
            ..SimulationPlan::default()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_ensemble(&cfg, &spec, &plan))
            .unwrap();
        let eight = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_ensemble(&cfg, &spec, &plan))
            .unwrap();
        assert_eq!(single, eight);
    }

    #[test]
    fn dominance_holds_on_the_shipped_seed() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = SimulationPlan {
            n_paths: 200,
            ..SimulationPlan::default()
        };
        let ensemble = run_ensemble(&cfg, &spec, &plan).unwrap();
        assert_eq!(ensemble.dominance_violations, 0);
        assert!(ensemble.trigger_count > 0);
    }

    #[test]
    fn plan_must_cover_the_token_maturity() {
        let cfg = ModelConfig::default();
        let spec = TriggerSpec::default();
        let plan = SimulationPlan {
            horizon: 5.0,
            ..small_plan(1)
        };
        let err = run_ensemble(&cfg, &spec, &plan).unwrap_err();
        assert!(err.to_string().contains("plan.horizon"));
    }

    #[test]
    fn invalid_plan_is_rejected() {
        let plan = SimulationPlan {
            n_paths: 0,
            ..SimulationPlan::default()
        };
        assert!(plan.validate("plan").is_err());
        let plan = SimulationPlan {
            dt: 0.0,
            ..SimulationPlan::default()
        };
        let err = plan.validate("plan").unwrap_err();
        assert!(err.to_string().contains("plan.dt"), "{err}");
    }
}
