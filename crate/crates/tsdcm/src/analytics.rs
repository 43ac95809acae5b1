//! Ensemble statistics and empirical diagnostics of the mechanism's claims.
//!
//! Covers the comparative outputs (mean trajectories, final-debt percentile
//! tables, default probabilities, token payout moments, the conversion-
//! fraction sweep) and the diagnostics: activation probability across
//! horizons, pathwise dominance violation counts, the expected-debt-reduction
//! gap, and the net-fiscal-benefit accounting with its sufficient condition.
//!
//! Untriggered paths contribute zero payout to all payout statistics.

use serde::{Deserialize, Serialize};

use crate::ensemble::{run_ensemble, EnsembleResult, SimulationPlan};
use crate::error::{Error, Result};
use crate::mechanism::TriggerSpec;
use crate::model::ModelConfig;

/// Normal z-value for two-sided 95% confidence intervals.
const Z_95: f64 = 1.96;

/// Which branch of the paired ensemble a statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Baseline,
    Converted,
}

/// Nearest-rank percentile: the `⌈q/100·n⌉`-th order statistic (1-based),
/// with `q = 0` mapping to the minimum. Interpolation-free, so results are
/// reproducible across implementations.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("values", "percentile of an empty sample"));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::invalid(
            "q",
            format!("must lie in [0, 100]; got {q}"),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64) / 100.0).ceil() as usize;
    Ok(sorted[rank.max(1) - 1])
}

/// A proportion with its binomial standard error `√(p̂(1-p̂)/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub p_hat: f64,
    pub standard_error: f64,
    pub count: usize,
    pub n: usize,
}

impl BinomialEstimate {
    fn from_count(count: usize, n: usize) -> Self {
        let p_hat = count as f64 / n as f64;
        BinomialEstimate {
            p_hat,
            standard_error: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
            count,
            n,
        }
    }
}

/// Fraction of paths whose selected branch reached the default barrier.
pub fn default_probability(results: &EnsembleResult, branch: Branch) -> Result<BinomialEstimate> {
    if results.paths.is_empty() {
        return Err(Error::invalid("results", "empty ensemble"));
    }
    let count = results
        .paths
        .iter()
        .filter(|p| match branch {
            Branch::Baseline => p.default_baseline,
            Branch::Converted => p.default_converted,
        })
        .count();
    Ok(BinomialEstimate::from_count(count, results.paths.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        MeanStd {
            mean: mean(values),
            std: sample_std(values),
        }
    }
}

/// Final-debt distribution at maturity for one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub mean: f64,
    pub count: usize,
}

fn distribution_summary(values: &[f64]) -> Result<DistributionSummary> {
    Ok(DistributionSummary {
        p10: percentile(values, 10.0)?,
        p50: percentile(values, 50.0)?,
        p90: percentile(values, 90.0)?,
        mean: mean(values),
        count: values.len(),
    })
}

/// Token payout moments (mean and sample std) per component, over all paths
/// with untriggered paths entering as zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoutStats {
    pub pi1: MeanStd,
    pub pi2: MeanStd,
    pub total: MeanStd,
    pub pv: MeanStd,
}

/// One-run summary: distribution tables, default probabilities, payout
/// moments, and the pointwise mean debt trajectories of both branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n_paths: usize,
    pub trigger_count: usize,
    pub trigger_rate: f64,
    /// Mean activation time over triggered paths; absent when none triggered.
    pub mean_tau: Option<f64>,
    pub final_debt_baseline: DistributionSummary,
    pub final_debt_converted: DistributionSummary,
    /// Mean final baseline debt minus mean final converted debt.
    pub mean_final_debt_reduction: f64,
    /// The same reduction as a fraction of the baseline mean.
    pub relative_final_debt_reduction: f64,
    pub default_baseline: BinomialEstimate,
    pub default_converted: BinomialEstimate,
    pub payout: PayoutStats,
    pub mean_debt_baseline: Vec<f64>,
    pub mean_debt_converted: Vec<f64>,
}

/// Compute the comparative statistics for one ensemble.
pub fn summarize(results: &EnsembleResult) -> Result<SummaryStats> {
    if results.paths.is_empty() {
        return Err(Error::invalid("results", "empty ensemble"));
    }
    let finals_base: Vec<f64> = results.paths.iter().map(|p| p.final_debt_baseline).collect();
    let finals_conv: Vec<f64> = results
        .paths
        .iter()
        .map(|p| p.final_debt_converted)
        .collect();
    let component = |f: fn(&crate::mechanism::TokenPayout) -> f64| -> Vec<f64> {
        results
            .paths
            .iter()
            .map(|p| p.payout.as_ref().map_or(0.0, f))
            .collect()
    };
    let taus: Vec<f64> = results.paths.iter().filter_map(|p| p.hitting.tau).collect();
    let base_summary = distribution_summary(&finals_base)?;
    let conv_summary = distribution_summary(&finals_conv)?;
    let reduction = base_summary.mean - conv_summary.mean;
    Ok(SummaryStats {
        n_paths: results.paths.len(),
        trigger_count: results.trigger_count,
        trigger_rate: results.trigger_rate(),
        mean_tau: (!taus.is_empty()).then(|| mean(&taus)),
        mean_final_debt_reduction: reduction,
        relative_final_debt_reduction: reduction / base_summary.mean,
        final_debt_baseline: base_summary,
        final_debt_converted: conv_summary,
        default_baseline: default_probability(results, Branch::Baseline)?,
        default_converted: default_probability(results, Branch::Converted)?,
        payout: PayoutStats {
            pi1: MeanStd::of(&component(|p| p.pi1)),
            pi2: MeanStd::of(&component(|p| p.pi2)),
            total: MeanStd::of(&component(|p| p.total)),
            pv: MeanStd::of(&component(|p| p.pv)),
        },
        mean_debt_baseline: results.mean_debt_baseline.clone(),
        mean_debt_converted: results.mean_debt_converted.clone(),
    })
}

/// Conversion-fraction sensitivity: mean final converted debt and payout
/// dispersion per `α`, all runs sharing the plan's seed (common random
/// numbers across the sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub alphas: Vec<f64>,
    pub mean_final_debt: Vec<f64>,
    pub payout_mean: Vec<f64>,
    pub payout_std: Vec<f64>,
}

/// Run one full paired ensemble per conversion fraction.
pub fn sweep_alpha(
    cfg: &ModelConfig,
    spec: &TriggerSpec,
    plan: &SimulationPlan,
    alphas: &[f64],
) -> Result<SensitivityResult> {
    if alphas.is_empty() {
        return Err(Error::invalid("alphas", "sweep needs at least one alpha"));
    }
    let mut result = SensitivityResult {
        alphas: alphas.to_vec(),
        mean_final_debt: Vec::with_capacity(alphas.len()),
        payout_mean: Vec::with_capacity(alphas.len()),
        payout_std: Vec::with_capacity(alphas.len()),
    };
    for (i, &alpha) in alphas.iter().enumerate() {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::invalid(
                format!("alphas[{i}]"),
                format!("must lie in (0, 1); got {alpha}"),
            ));
        }
        let swept = TriggerSpec {
            alpha,
            ..spec.clone()
        };
        let ensemble = run_ensemble(cfg, &swept, plan)?;
        let finals: Vec<f64> = ensemble
            .paths
            .iter()
            .map(|p| p.final_debt_converted)
            .collect();
        let totals: Vec<f64> = ensemble
            .paths
            .iter()
            .map(|p| p.payout.as_ref().map_or(0.0, |q| q.total))
            .collect();
        result.mean_final_debt.push(mean(&finals));
        result.payout_mean.push(mean(&totals));
        result.payout_std.push(sample_std(&totals));
    }
    Ok(result)
}

/// Regime-0 drift evaluated at the trigger thresholds.
///
/// Activation is drift-guaranteed when the debt drift at `D*` points down
/// (`a0 - b0·D* < 0`, i.e. the debt equilibrium `a0/b0` lies below the
/// threshold) and the growth drift at `g*` points up (`c0 - d0·g* > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConditions {
    pub debt_drift_at_threshold: f64,
    pub growth_drift_at_threshold: f64,
    pub hold: bool,
}

impl DriftConditions {
    pub fn evaluate(cfg: &ModelConfig, spec: &TriggerSpec) -> Self {
        let p0 = &cfg.params_by_regime[0];
        let debt_drift = p0.a - p0.b * spec.d_star;
        let growth_drift = p0.c - p0.d * spec.g_star;
        DriftConditions {
            debt_drift_at_threshold: debt_drift,
            growth_drift_at_threshold: growth_drift,
            hold: debt_drift < 0.0 && growth_drift > 0.0,
        }
    }
}

/// Activation probability at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationPoint {
    pub horizon: f64,
    pub estimate: BinomialEstimate,
}

/// Expected-debt-reduction gap `E[D_T⁰] - E[D_T^C] - α·D*·P̂(τ≤T)` at one
/// horizon, with a 95% confidence interval. The claim predicts the gap is
/// nonnegative; it is reported, not asserted, because it leans on a
/// post-conversion drift assumption the model does not guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebtReductionGap {
    pub horizon: f64,
    pub gap: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Multi-horizon empirical diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub drift: DriftConditions,
    pub activation: Vec<ActivationPoint>,
    /// Whether activation probability is nondecreasing across the horizons.
    pub activation_nondecreasing: bool,
    /// False when the drift conditions fail; the monotonicity check is then
    /// reported but not counted as an assertion.
    pub monotonicity_asserted: bool,
    /// Grid points violating pathwise dominance, summed over all runs.
    pub dominance_violations: usize,
    pub debt_reduction_gaps: Vec<DebtReductionGap>,
}

impl PropositionReport {
    /// True when every asserted diagnostic held.
    pub fn passed(&self) -> bool {
        self.dominance_violations == 0 && (!self.monotonicity_asserted || self.activation_nondecreasing)
    }
}

/// Run the ensemble at each plan horizon and collect the diagnostics.
///
/// Plans must share `n_paths`, `dt`, and `seed` and have strictly increasing
/// horizons, so their noise substreams nest: a path triggered by a shorter
/// horizon is triggered in every longer run, which makes the monotonicity
/// check meaningful pathwise rather than only in distribution.
pub fn proposition_diagnostics(
    cfg: &ModelConfig,
    spec: &TriggerSpec,
    plans: &[SimulationPlan],
) -> Result<PropositionReport> {
    if plans.is_empty() {
        return Err(Error::invalid("plans", "need at least one plan"));
    }
    for (i, pair) in plans.windows(2).enumerate() {
        if pair[1].horizon <= pair[0].horizon {
            return Err(Error::invalid(
                format!("plans[{}].horizon", i + 1),
                "horizons must be strictly increasing",
            ));
        }
        if pair[1].n_paths != pair[0].n_paths
            || pair[1].dt != pair[0].dt
            || pair[1].seed != pair[0].seed
        {
            return Err(Error::invalid(
                format!("plans[{}]", i + 1),
                "plans must share n_paths, dt, and seed",
            ));
        }
    }
    let drift = DriftConditions::evaluate(cfg, spec);
    let mut activation = Vec::with_capacity(plans.len());
    let mut gaps = Vec::with_capacity(plans.len());
    let mut dominance_violations = 0;
    for plan in plans {
        let spec_t = TriggerSpec {
            horizon: plan.horizon,
            ..spec.clone()
        };
        let ensemble = run_ensemble(cfg, &spec_t, plan)?;
        let estimate = BinomialEstimate::from_count(ensemble.trigger_count, ensemble.paths.len());
        activation.push(ActivationPoint {
            horizon: plan.horizon,
            estimate,
        });
        let gap_terms: Vec<f64> = ensemble
            .paths
            .iter()
            .map(|p| {
                let triggered = if p.hitting.triggered { 1.0 } else { 0.0 };
                (p.final_debt_baseline - p.final_debt_converted)
                    - spec_t.alpha * spec_t.d_star * triggered
            })
            .collect();
        let (gap, se) = mean_and_se(&gap_terms);
        gaps.push(DebtReductionGap {
            horizon: plan.horizon,
            gap,
            ci_low: gap - Z_95 * se,
            ci_high: gap + Z_95 * se,
        });
        dominance_violations += ensemble.dominance_violations;
    }
    let nondecreasing = activation
        .windows(2)
        .all(|w| w[1].estimate.p_hat >= w[0].estimate.p_hat);
    Ok(PropositionReport {
        drift,
        activation,
        activation_nondecreasing: nondecreasing,
        monotonicity_asserted: drift.hold,
        dominance_violations,
        debt_reduction_gaps: gaps,
    })
}

/// Net-fiscal-benefit accounting at maturity.
///
/// `lhs` estimates `E[D_T⁰ - D_T^C - Π_T]` and `rhs` the bound
/// `α·D*·P̂(τ≤T) - β·E[overshoot] - γ·E[growth integral]`, both in debt-ratio
/// units (the notional is applied only for display elsewhere). The
/// sufficient condition `α·D* > β·D* + γ·(T - τ̄)·g*` substitutes the mean
/// activation time of triggered paths for `τ̄`, or `T` when no path
/// triggered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub lhs: f64,
    pub lhs_se: f64,
    pub lhs_ci_low: f64,
    pub lhs_ci_high: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub rhs_ci_low: f64,
    pub rhs_ci_high: f64,
    pub activation_probability: f64,
    pub mean_payout_overshoot: f64,
    pub mean_payout_growth_bonus: f64,
    pub mean_tau_triggered: Option<f64>,
    pub sufficient_condition_lhs: f64,
    pub sufficient_condition_rhs: f64,
    pub sufficient_condition: bool,
}

/// Estimate both sides of the net-benefit inequality from a paired ensemble.
pub fn theorem_report(results: &EnsembleResult, spec: &TriggerSpec) -> Result<TheoremReport> {
    if results.paths.is_empty() {
        return Err(Error::invalid("results", "empty ensemble"));
    }
    let lhs_terms: Vec<f64> = results
        .paths
        .iter()
        .map(|p| {
            let payout = p.payout.as_ref().map_or(0.0, |q| q.total);
            p.final_debt_baseline - p.final_debt_converted - payout
        })
        .collect();
    let rhs_terms: Vec<f64> = results
        .paths
        .iter()
        .map(|p| {
            let triggered = if p.hitting.triggered { 1.0 } else { 0.0 };
            let (pi1, pi2) = p.payout.as_ref().map_or((0.0, 0.0), |q| (q.pi1, q.pi2));
            spec.alpha * spec.d_star * triggered - pi1 - pi2
        })
        .collect();
    let (lhs, lhs_se) = mean_and_se(&lhs_terms);
    let (rhs, rhs_se) = mean_and_se(&rhs_terms);

    let taus: Vec<f64> = results.paths.iter().filter_map(|p| p.hitting.tau).collect();
    let mean_tau = (!taus.is_empty()).then(|| mean(&taus));
    let tau_bar = mean_tau.unwrap_or(spec.horizon);
    let sufficient_lhs = spec.alpha * spec.d_star;
    let sufficient_rhs =
        spec.beta * spec.d_star + spec.gamma * (spec.horizon - tau_bar) * spec.g_star;

    let pi1s: Vec<f64> = results
        .paths
        .iter()
        .map(|p| p.payout.as_ref().map_or(0.0, |q| q.pi1))
        .collect();
    let pi2s: Vec<f64> = results
        .paths
        .iter()
        .map(|p| p.payout.as_ref().map_or(0.0, |q| q.pi2))
        .collect();

    Ok(TheoremReport {
        lhs,
        lhs_se,
        lhs_ci_low: lhs - Z_95 * lhs_se,
        lhs_ci_high: lhs + Z_95 * lhs_se,
        rhs,
        rhs_se,
        rhs_ci_low: rhs - Z_95 * rhs_se,
        rhs_ci_high: rhs + Z_95 * rhs_se,
        activation_probability: results.trigger_rate(),
        mean_payout_overshoot: mean(&pi1s),
        mean_payout_growth_bonus: mean(&pi2s),
        mean_tau_triggered: mean_tau,
        sufficient_condition_lhs: sufficient_lhs,
        sufficient_condition_rhs: sufficient_rhs,
        sufficient_condition: sufficient_lhs > sufficient_rhs,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 denominator); zero for fewer than two
/// observations.
fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    (mean(values), sample_std(values) / (values.len() as f64).sqrt())
}
