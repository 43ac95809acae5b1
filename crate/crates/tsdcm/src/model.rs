//! Regime-switching jump-diffusion dynamics for the sovereign debt ratio and
//! GDP growth rate.
//!
//! The macro regime `R_t ∈ {expansion, crisis}` follows a two-state
//! continuous-time Markov chain with generator
//!
//! ```text
//! Q = [ -λ01   λ01 ]
//!     [  λ10  -λ10 ]
//! ```
//!
//! Conditional on the regime `r`, debt-to-GDP `D_t` and growth `g_t` evolve as
//!
//! ```text
//! dD = (a_r - b_r D) dt + σ_r D dW  + D (e^Z - 1) dN,   Z ~ Normal(μJ_r, σJ_r)
//! dg = (c_r - d_r g) dt + η_r g dW' + g (e^Z - 1) dM,   Z ~ Normal(μK_r, σK_r)
//! ```
//!
//! discretized with an Euler–Maruyama scheme on a fixed grid. Jumps are
//! multiplicative with factor `e^Z`, so a jump can move the state in either
//! direction while debt stays strictly positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::PathNoise;

/// Lower bound applied to the debt ratio after every Euler step. Keeps the
/// state inside the model's `D > 0` domain even for extreme diffusion draws.
pub const DEBT_FLOOR: f64 = 1e-12;

/// Macro regime indicator: 0 = expansion, 1 = crisis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Regime {
    Expansion,
    Crisis,
}

impl Regime {
    pub fn index(self) -> usize {
        match self {
            Regime::Expansion => 0,
            Regime::Crisis => 1,
        }
    }

    pub fn other(self) -> Regime {
        match self {
            Regime::Expansion => Regime::Crisis,
            Regime::Crisis => Regime::Expansion,
        }
    }
}

impl From<Regime> for u8 {
    fn from(r: Regime) -> u8 {
        r.index() as u8
    }
}

impl TryFrom<u8> for Regime {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Regime::Expansion),
            1 => Ok(Regime::Crisis),
            other => Err(format!("regime must be 0 or 1; got {other}")),
        }
    }
}

/// Per-regime drift, diffusion, and jump parameters for the debt and growth
/// equations.
///
/// Rates (`a`, `b`, `c`, `d`, `kappa`, `xi`) are per year; `sigma` and `eta`
/// are per square-root year; jump log-moments are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    /// Base fiscal expansion rate in the debt drift `a - b D`.
    pub a: f64,
    /// Debt mean-reversion rate.
    pub b: f64,
    /// Debt diffusion volatility.
    pub sigma: f64,
    /// Intensity of the debt jump process, events per year.
    pub kappa: f64,
    /// Log-mean of the multiplicative debt jump factor.
    pub mu_j: f64,
    /// Log-std of the multiplicative debt jump factor.
    pub sigma_j: f64,
    /// Growth drift intercept in `c - d g`.
    pub c: f64,
    /// Growth mean-reversion rate.
    pub d: f64,
    /// Growth diffusion volatility.
    pub eta: f64,
    /// Intensity of the growth jump process, events per year.
    pub xi: f64,
    /// Log-mean of the multiplicative growth jump factor.
    pub mu_k: f64,
    /// Log-std of the multiplicative growth jump factor.
    pub sigma_k: f64,
}

impl RegimeParams {
    /// Shipped expansion-regime calibration (regime 0).
    pub fn expansion_default() -> Self {
        RegimeParams {
            a: 0.05,
            b: 0.10,
            sigma: 0.02,
            kappa: 0.05,
            mu_j: -0.10,
            sigma_j: 0.30,
            c: 0.004,
            d: 0.1,
            eta: 0.5,
            xi: 0.0,
            mu_k: 0.0,
            sigma_k: 0.0,
        }
    }

    /// Shipped crisis-regime calibration (regime 1).
    pub fn crisis_default() -> Self {
        RegimeParams {
            a: 0.12,
            b: 0.06,
            sigma: 0.05,
            kappa: 0.10,
            mu_j: 0.20,
            sigma_j: 0.50,
            c: 0.004,
            d: 0.1,
            eta: 0.5,
            xi: 0.0,
            mu_k: 0.0,
            sigma_k: 0.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let checks = [
            ("a", self.a),
            ("b", self.b),
            ("sigma", self.sigma),
            ("kappa", self.kappa),
            ("mu_j", self.mu_j),
            ("sigma_j", self.sigma_j),
            ("c", self.c),
            ("d", self.d),
            ("eta", self.eta),
            ("xi", self.xi),
            ("mu_k", self.mu_k),
            ("sigma_k", self.sigma_k),
        ];
        for (name, value) in checks {
            if !value.is_finite() {
                return Err(Error::invalid(
                    format!("{field}.{name}"),
                    format!("must be finite; got {value}"),
                ));
            }
        }
        let nonnegative = [
            ("b", self.b),
            ("d", self.d),
            ("sigma", self.sigma),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("xi", self.xi),
            ("sigma_j", self.sigma_j),
            ("sigma_k", self.sigma_k),
        ];
        for (name, value) in nonnegative {
            if value < 0.0 {
                return Err(Error::invalid(
                    format!("{field}.{name}"),
                    format!("must be nonnegative; got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Two-state CTMC generator: `lambda01` is the expansion→crisis rate,
/// `lambda10` the crisis→expansion rate, both per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub lambda01: f64,
    pub lambda10: f64,
}

impl Default for GeneratorMatrix {
    fn default() -> Self {
        GeneratorMatrix {
            lambda01: 0.12,
            lambda10: 0.08,
        }
    }
}

impl GeneratorMatrix {
    /// Stationary distribution `(π0, π1)` of the chain; `(1, 0)` by convention
    /// when both rates vanish.
    pub fn stationary(&self) -> (f64, f64) {
        let s = self.lambda01 + self.lambda10;
        if s == 0.0 {
            (1.0, 0.0)
        } else {
            (self.lambda10 / s, self.lambda01 / s)
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        for (name, value) in [("lambda01", self.lambda01), ("lambda10", self.lambda10)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(
                    format!("{field}.{name}"),
                    format!("must be a finite nonnegative rate; got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Row-stochastic one-step regime transition matrix `exp(Q·dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    p: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn prob(&self, from: Regime, to: Regime) -> f64 {
        self.p[from.index()][to.index()]
    }

    /// Probability of leaving `from` in one step.
    pub fn switch_prob(&self, from: Regime) -> f64 {
        self.prob(from, from.other())
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.p
    }
}

/// Matrix exponential `exp(Q·dt)` for the two-state generator, in closed form.
///
/// With `s = λ01 + λ10` and stationary weights `π0 = λ10/s`, `π1 = λ01/s`:
///
/// ```text
/// P00 = π0 + π1 e^{-s·dt}    P01 = 1 - P00
/// P11 = π1 + π0 e^{-s·dt}    P10 = 1 - P11
/// ```
///
/// A zero generator yields the identity. Rows sum to one to within 1e-15.
pub fn transition_matrix(q: &GeneratorMatrix, dt: f64) -> Result<TransitionMatrix> {
    q.validate("q")?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::invalid("dt", format!("must be positive; got {dt}")));
    }
    let s = q.lambda01 + q.lambda10;
    if s == 0.0 {
        return Ok(TransitionMatrix {
            p: [[1.0, 0.0], [0.0, 1.0]],
        });
    }
    let decay = (-s * dt).exp();
    let (pi0, pi1) = q.stationary();
    let p00 = pi0 + pi1 * decay;
    let p11 = pi1 + pi0 * decay;
    Ok(TransitionMatrix {
        p: [[p00, 1.0 - p00], [1.0 - p11, p11]],
    })
}

/// Advance the regime one grid step using a single uniform draw.
///
/// Switches iff `u` falls below the switch probability, so the regime is a
/// deterministic function of `(current, p, u)`.
pub fn sample_regime_step(current: Regime, p: &TransitionMatrix, u: f64) -> Regime {
    if u < p.switch_prob(current) {
        current.other()
    } else {
        current
    }
}

/// One Euler–Maruyama step of the debt ratio.
///
/// `dw` is the Brownian increment over the step (`Normal(0, dt)`), and
/// `jump_z` holds one standard-normal draw per Poisson jump in the step; each
/// jump multiplies debt by `e^{μJ + σJ·z}`. The result is floored at
/// [`DEBT_FLOOR`].
pub fn debt_step(d: f64, p: &RegimeParams, dt: f64, dw: f64, jump_z: &[f64]) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid("d", format!("must be positive; got {d}")));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive; got {dt}")));
    }
    let jump_sum: f64 = jump_z
        .iter()
        .map(|&z| (p.mu_j + p.sigma_j * z).exp() - 1.0)
        .sum();
    let next = d + (p.a - p.b * d) * dt + p.sigma * d * dw + d * jump_sum;
    Ok(next.max(DEBT_FLOOR))
}

/// One Euler–Maruyama step of the growth rate.
///
/// Same structure as [`debt_step`] with jump factor `e^{μK + σK·z}`, but no
/// positivity floor: growth may change sign through the drift, and the
/// multiplicative diffusion and jump terms vanish as `g → 0`.
pub fn growth_step(g: f64, p: &RegimeParams, dt: f64, dw: f64, jump_z: &[f64]) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive; got {dt}")));
    }
    let jump_sum: f64 = jump_z
        .iter()
        .map(|&z| (p.mu_k + p.sigma_k * z).exp() - 1.0)
        .sum();
    Ok(g + (p.c - p.d * g) * dt + p.eta * g * dw + g * jump_sum)
}

/// Full model configuration: per-regime parameters, regime generator,
/// Brownian correlation, and the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Index 0 = expansion, 1 = crisis.
    pub params_by_regime: [RegimeParams; 2],
    pub q: GeneratorMatrix,
    /// Correlation between the debt and growth Brownian drivers, in [-1, 1].
    pub rho: f64,
    /// Initial debt-to-GDP ratio (fraction of GDP).
    pub d0: f64,
    /// Initial growth rate (fraction per year).
    pub g0: f64,
    /// Initial regime.
    pub r0: Regime,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            params_by_regime: [
                RegimeParams::expansion_default(),
                RegimeParams::crisis_default(),
            ],
            q: GeneratorMatrix::default(),
            rho: 0.0,
            d0: 1.0,
            g0: 0.04,
            r0: Regime::Expansion,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        for (i, params) in self.params_by_regime.iter().enumerate() {
            params.validate(&format!("{field}.params_by_regime[{i}]"))?;
        }
        self.q.validate(&format!("{field}.q"))?;
        if !self.rho.is_finite() || !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid(
                format!("{field}.rho"),
                format!("must lie in [-1, 1]; got {}", self.rho),
            ));
        }
        if !self.d0.is_finite() || self.d0 <= 0.0 {
            return Err(Error::invalid(
                format!("{field}.d0"),
                format!("must be positive; got {}", self.d0),
            ));
        }
        if !self.g0.is_finite() {
            return Err(Error::invalid(
                format!("{field}.g0"),
                format!("must be finite; got {}", self.g0),
            ));
        }
        Ok(())
    }

    pub fn params(&self, r: Regime) -> &RegimeParams {
        &self.params_by_regime[r.index()]
    }
}

/// Gridded trajectory of `(t, R_t, D_t, g_t)` for one simulated path.
///
/// All arrays share length `M + 1` with `times[k] = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub dt: f64,
    pub times: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub debt: Vec<f64>,
    pub growth: Vec<f64>,
}

impl PathRecord {
    /// Allocate a record for `steps` Euler steps (`steps + 1` grid points)
    /// with the time grid filled in and state arrays zeroed.
    pub fn with_grid(dt: f64, steps: usize) -> Self {
        PathRecord {
            dt,
            times: (0..=steps).map(|k| k as f64 * dt).collect(),
            regimes: vec![Regime::Expansion; steps + 1],
            debt: vec![0.0; steps + 1],
            growth: vec![0.0; steps + 1],
        }
    }

    /// Number of Euler steps (`M`); grid points number `M + 1`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_debt(&self) -> f64 {
        *self.debt.last().expect("non-empty grid")
    }

    /// Grid index of time `t`, clamped to the last point.
    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.dt).round() as usize).min(self.steps())
    }
}

/// Number of Euler steps for a horizon/step pair, validating both.
pub fn grid_steps(horizon: f64, dt: f64) -> Result<usize> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::invalid(
            "horizon",
            format!("must be positive; got {horizon}"),
        ));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::invalid("dt", format!("must be positive; got {dt}")));
    }
    let steps = (horizon / dt).round();
    if steps < 1.0 {
        return Err(Error::invalid(
            "dt",
            format!("horizon {horizon} shorter than one step of {dt}"),
        ));
    }
    Ok(steps as usize)
}

/// Simulate one path on the grid `t_k = k·dt`, `k = 0..=round(horizon/dt)`.
///
/// Per step: advance the regime with [`sample_regime_step`], form the
/// correlated Brownian increments `dw = √dt·z_D` and
/// `dw' = ρ·dw + √(1-ρ²)·√dt·z_g`, then apply [`debt_step`] and
/// [`growth_step`] under the post-draw regime. The result is a deterministic
/// function of `(cfg, horizon, dt, noise)`.
pub fn simulate_path(
    cfg: &ModelConfig,
    horizon: f64,
    dt: f64,
    noise: &PathNoise,
) -> Result<PathRecord> {
    cfg.validate("model")?;
    let steps = grid_steps(horizon, dt)?;
    if noise.steps() != steps {
        return Err(Error::invalid(
            "noise",
            format!("stream has {} steps; grid needs {steps}", noise.steps()),
        ));
    }
    let mut record = PathRecord::with_grid(dt, steps);
    record.debt[0] = cfg.d0;
    record.growth[0] = cfg.g0;
    record.regimes[0] = cfg.r0;
    resume_path(cfg, &mut record, 0, noise)?;
    Ok(record)
}

/// Re-run the dynamics of `record` from grid index `from` onward, consuming
/// the same noise stream from that step. The state at `from` is taken as the
/// new initial condition; entries `from + 1..` are overwritten.
///
/// Used to branch a converted trajectory off a baseline one under common
/// random numbers: both branches see identical regime draws, Brownian
/// increments, jump counts, and jump sizes per grid step.
pub fn resume_path(
    cfg: &ModelConfig,
    record: &mut PathRecord,
    from: usize,
    noise: &PathNoise,
) -> Result<()> {
    let steps = record.steps();
    if noise.steps() != steps {
        return Err(Error::invalid(
            "noise",
            format!("stream has {} steps; grid needs {steps}", noise.steps()),
        ));
    }
    if from > steps {
        return Err(Error::invalid(
            "from",
            format!("resume index {from} beyond grid end {steps}"),
        ));
    }
    let p = transition_matrix(&cfg.q, record.dt)?;
    let sqrt_dt = record.dt.sqrt();
    let cross = (1.0 - cfg.rho * cfg.rho).sqrt();
    let mut regime = record.regimes[from];
    let mut cursor = noise.cursor_at(from);
    for k in from..steps {
        let step = cursor.next_step();
        regime = sample_regime_step(regime, &p, step.u_regime);
        let params = cfg.params(regime);
        let dw_debt = sqrt_dt * step.z_debt;
        let dw_growth = cfg.rho * dw_debt + cross * (sqrt_dt * step.z_growth);
        record.debt[k + 1] = debt_step(record.debt[k], params, record.dt, dw_debt, step.debt_jump_z)?;
        record.growth[k + 1] =
            growth_step(record.growth[k], params, record.dt, dw_growth, step.growth_jump_z)?;
        record.regimes[k + 1] = regime;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::path_rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Noise-free configuration: frozen regime 0, zero diffusion and jumps.
    pub(crate) fn deterministic_config() -> ModelConfig {
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
        cfg
    }

    #[test]
    fn transition_matrix_matches_closed_form_example() {
        let q = GeneratorMatrix {
            lambda01: 0.12,
            lambda10: 0.08,
        };
        let p = transition_matrix(&q, 0.01).unwrap().rows();
        assert!(close(p[0][0], 0.99880120, 1e-8), "P00 = {}", p[0][0]);
        assert!(close(p[0][1], 0.00119880, 1e-8), "P01 = {}", p[0][1]);
        for row in p {
            assert!(close(row[0] + row[1], 1.0, 1e-15));
        }
    }

    #[test]
    fn transition_matrix_zero_generator_is_identity() {
        let q = GeneratorMatrix {
            lambda01: 0.0,
            lambda10: 0.0,
        };
        let p = transition_matrix(&q, 1.0).unwrap().rows();
        assert_eq!(p, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn transition_matrix_long_run_rows_reach_stationary_distribution() {
        let q = GeneratorMatrix {
            lambda01: 0.12,
            lambda10: 0.08,
        };
        let p = transition_matrix(&q, 1e6).unwrap().rows();
        for row in p {
            assert!(close(row[0], 0.4, 1e-12));
            assert!(close(row[1], 0.6, 1e-12));
        }
    }

    #[test]
    fn transition_matrix_rejects_bad_dt() {
        let q = GeneratorMatrix::default();
        assert!(transition_matrix(&q, 0.0).is_err());
        assert!(transition_matrix(&q, -1.0).is_err());
        assert!(transition_matrix(&q, f64::NAN).is_err());
    }

    #[test]
    fn regime_step_follows_switch_probability() {
        let q = GeneratorMatrix {
            lambda01: 0.12,
            lambda10: 0.08,
        };
        let p = transition_matrix(&q, 0.01).unwrap();
        // Switch probabilities at dt = 0.01 are ~0.0012 and ~0.0008.
        assert_eq!(
            sample_regime_step(Regime::Expansion, &p, 0.0005),
            Regime::Crisis
        );
        assert_eq!(
            sample_regime_step(Regime::Expansion, &p, 0.5),
            Regime::Expansion
        );
        assert_eq!(
            sample_regime_step(Regime::Crisis, &p, 0.00079),
            Regime::Expansion
        );
    }

    #[test]
    fn debt_step_pure_drift() {
        let mut p = RegimeParams::expansion_default();
        p.sigma = 0.0;
        let next = debt_step(1.0, &p, 0.01, 0.0, &[]).unwrap();
        assert!(close(next, 0.9995, 1e-15), "got {next}");
    }

    #[test]
    fn debt_step_pure_diffusion() {
        let mut p = RegimeParams::expansion_default();
        p.a = 0.0;
        p.b = 0.0;
        p.sigma = 0.02;
        let next = debt_step(1.0, &p, 1.0, 0.1, &[]).unwrap();
        assert!(close(next, 1.002, 1e-15), "got {next}");
    }

    #[test]
    fn debt_step_identity_jump() {
        let mut p = RegimeParams::expansion_default();
        p.a = 0.0;
        p.b = 0.0;
        p.sigma = 0.0;
        p.mu_j = 0.0;
        let next = debt_step(1.0, &p, 0.01, 0.0, &[0.0]).unwrap();
        assert!(close(next, 1.0, 1e-15), "got {next}");
    }

    #[test]
    fn debt_step_floors_extreme_negative_moves() {
        let mut p = RegimeParams::expansion_default();
        p.a = 0.0;
        p.sigma = 1.0;
        let next = debt_step(1.0, &p, 0.01, -50.0, &[]).unwrap();
        assert_eq!(next, DEBT_FLOOR);
    }

    #[test]
    fn debt_step_rejects_bad_inputs() {
        let p = RegimeParams::expansion_default();
        assert!(debt_step(0.0, &p, 0.01, 0.0, &[]).is_err());
        assert!(debt_step(-1.0, &p, 0.01, 0.0, &[]).is_err());
        assert!(debt_step(1.0, &p, 0.0, 0.0, &[]).is_err());
    }

    #[test]
    fn growth_step_drift_fixed_point() {
        let p = RegimeParams::expansion_default();
        // c/d = 0.04 is the drift equilibrium.
        let next = growth_step(0.04, &p, 0.01, 0.0, &[]).unwrap();
        assert!(close(next, 0.04, 1e-15), "got {next}");
        let from_below = growth_step(0.02, &p, 0.01, 0.0, &[]).unwrap();
        assert!(close(from_below, 0.02002, 1e-15), "got {from_below}");
    }

    #[test]
    fn growth_step_pure_diffusion() {
        let mut p = RegimeParams::expansion_default();
        p.c = 0.0;
        p.d = 0.0;
        p.eta = 0.02;
        let next = growth_step(0.05, &p, 1.0, -0.1, &[]).unwrap();
        assert!(close(next, 0.0499, 1e-15), "got {next}");
    }

    #[test]
    fn growth_step_allows_negative_growth() {
        let p = RegimeParams::expansion_default();
        let next = growth_step(-0.02, &p, 0.01, 0.0, &[]).unwrap();
        assert!(next < 0.0);
        assert!(growth_step(0.04, &p, -0.01, 0.0, &[]).is_err());
    }

    #[test]
    fn simulate_path_matches_debt_ode() {
        // With all noise off, dD = (a - bD) dt has solution
        // D(t) = a/b + (d0 - a/b) e^{-bt}; D(10) = 0.5 + 0.5 e^{-1}.
        let cfg = deterministic_config();
        let dt = 0.01;
        let mut rng = path_rng(1, 0);
        let noise = PathNoise::generate(&cfg, 10.0, dt, &mut rng).unwrap();
        let path = simulate_path(&cfg, 10.0, dt, &noise).unwrap();
        let exact = 0.5 + 0.5 * (-1.0f64).exp();
        assert!(
            (path.final_debt() - exact).abs() <= 5.0 * dt,
            "D(10) = {}, exact {exact}",
            path.final_debt()
        );
    }

    #[test]
    fn simulate_path_matches_growth_ode() {
        // g(t) = c/d + (g0 - c/d) e^{-dt}; the gap halves at t = 10 ln 2.
        let mut cfg = deterministic_config();
        cfg.g0 = 0.02;
        let dt = 0.01;
        let mut rng = path_rng(1, 0);
        let noise = PathNoise::generate(&cfg, 10.0, dt, &mut rng).unwrap();
        let path = simulate_path(&cfg, 10.0, dt, &noise).unwrap();
        let k = path.index_at(10.0 * std::f64::consts::LN_2);
        assert!(
            (path.growth[k] - 0.03).abs() <= 5.0 * dt,
            "g = {}",
            path.growth[k]
        );
    }

    #[test]
    fn simulate_path_grid_shape() {
        let cfg = ModelConfig::default();
        let mut rng = path_rng(12345, 3);
        let noise = PathNoise::generate(&cfg, 10.0, 0.01, &mut rng).unwrap();
        let path = simulate_path(&cfg, 10.0, 0.01, &noise).unwrap();
        assert_eq!(path.times.len(), 1001);
        assert_eq!(path.debt.len(), 1001);
        assert_eq!(path.growth.len(), 1001);
        assert_eq!(path.regimes.len(), 1001);
        assert!(close(path.times[1000], 10.0, 1e-12));
        assert!(path.debt.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn simulate_path_is_deterministic() {
        let cfg = ModelConfig::default();
        let mut rng = path_rng(12345, 7);
        let noise = PathNoise::generate(&cfg, 10.0, 0.01, &mut rng).unwrap();
        let a = simulate_path(&cfg, 10.0, 0.01, &noise).unwrap();
        let b = simulate_path(&cfg, 10.0, 0.01, &noise).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulate_path_rejects_empty_grid() {
        let cfg = ModelConfig::default();
        let mut rng = path_rng(1, 0);
        let noise = PathNoise::generate(&cfg, 10.0, 0.01, &mut rng).unwrap();
        assert!(simulate_path(&cfg, 0.0, 0.01, &noise).is_err());
        assert!(simulate_path(&cfg, 10.0, -0.01, &noise).is_err());
        // Noise stream sized for a different grid is refused.
        assert!(simulate_path(&cfg, 5.0, 0.01, &noise).is_err());
    }

    #[test]
    fn euler_error_halves_with_step_size() {
        let cfg = deterministic_config();
        let max_err = |dt: f64| {
            let mut rng = path_rng(1, 0);
            let noise = PathNoise::generate(&cfg, 10.0, dt, &mut rng).unwrap();
            let path = simulate_path(&cfg, 10.0, dt, &noise).unwrap();
            path.times
                .iter()
                .zip(&path.debt)
                .map(|(&t, &d)| (d - (0.5 + 0.5 * (-0.1 * t).exp())).abs())
                .fold(0.0f64, f64::max)
        };
        let ratio = max_err(0.02) / max_err(0.01);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn long_run_regime_occupancy_matches_stationary_distribution() {
        // Fixed seed; occupancy over 10^4 years should sit near π0 = 0.4.
        let mut cfg = deterministic_config();
        cfg.q = GeneratorMatrix::default();
        let mut rng = path_rng(12345, 0);
        let noise = PathNoise::generate(&cfg, 1e4, 0.01, &mut rng).unwrap();
        let path = simulate_path(&cfg, 1e4, 0.01, &noise).unwrap();
        let in_expansion = path
            .regimes
            .iter()
            .filter(|r| **r == Regime::Expansion)
            .count();
        let frac = in_expansion as f64 / path.regimes.len() as f64;
        assert!((frac - 0.4).abs() <= 0.02, "occupancy {frac}");
    }
}
