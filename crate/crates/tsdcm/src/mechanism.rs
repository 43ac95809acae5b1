//! Trigger detection, one-time debt conversion, and token payout.
//!
//! The mechanism activates at `τ = max(τ_D, τ_g)`, where `τ_D` is the first
//! grid time with `D ≤ D*` and `τ_g` the first with `g ≥ g*`, both detected on
//! the baseline path. At `τ` a fraction `α` of debt is retired and creditors
//! receive a token paying, at maturity `T`,
//!
//! ```text
//! Π = β·max(D_τ - D*, 0) + γ·∫_τ^T (g_s - g*)⁺ ds
//! ```
//!
//! with `D_τ` the post-conversion debt. The integral is a left-endpoint
//! Riemann sum on the simulation grid, matching the Euler scheme's order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PathRecord;

/// The full mechanism contract: thresholds, conversion fraction, payout
/// coefficients, maturity, and discounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerSpec {
    /// Debt threshold `D*`, fraction of GDP.
    pub d_star: f64,
    /// Growth threshold `g*`, fraction per year.
    pub g_star: f64,
    /// Conversion fraction `α` in (0, 1).
    pub alpha: f64,
    /// Overshoot payout coefficient `β ≥ 0`.
    pub beta: f64,
    /// Growth-bonus coefficient `γ ≥ 0`.
    pub gamma: f64,
    /// Token maturity `T` in years.
    pub horizon: f64,
    /// Continuous annual discount rate for present value.
    pub discount_rate: f64,
    /// Currency units per unit of debt ratio; scales dimensionless payouts
    /// for display. The shipped default of 100 is a reporting convention,
    /// not a calibrated value.
    pub notional: f64,
}

impl Default for TriggerSpec {
    fn default() -> Self {
        TriggerSpec {
            d_star: 0.80,
            g_star: 0.03,
            alpha: 0.3,
            beta: 1.0,
            gamma: 1.0,
            horizon: 10.0,
            discount_rate: 0.03,
            notional: 100.0,
        }
    }
}

impl TriggerSpec {
    pub fn validate(&self, field: &str) -> Result<()> {
        let finite = [
            ("d_star", self.d_star),
            ("g_star", self.g_star),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("horizon", self.horizon),
            ("discount_rate", self.discount_rate),
            ("notional", self.notional),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::invalid(
                    format!("{field}.{name}"),
                    format!("must be finite; got {value}"),
                ));
            }
        }
        if self.alpha <= 0.0 || self.alpha >= 1.0 {
            return Err(Error::invalid(
                format!("{field}.alpha"),
                format!("must lie in (0, 1); got {}", self.alpha),
            ));
        }
        if self.d_star <= 0.0 {
            return Err(Error::invalid(
                format!("{field}.d_star"),
                format!("must be positive; got {}", self.d_star),
            ));
        }
        if self.horizon <= 0.0 {
            return Err(Error::invalid(
                format!("{field}.horizon"),
                format!("must be positive; got {}", self.horizon),
            ));
        }
        for (name, value) in [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("discount_rate", self.discount_rate),
            ("notional", self.notional),
        ] {
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

/// First hitting times of the two trigger conditions on a path.
///
/// `triggered` holds exactly when both conditions were met within the
/// maturity horizon; `tau = max(tau_d, tau_g)` is then the activation time
/// and `tau_index` its grid index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub tau_d: Option<f64>,
    pub tau_g: Option<f64>,
    pub tau: Option<f64>,
    pub tau_index: Option<usize>,
    pub triggered: bool,
}

/// Token payout split into its overshoot and growth-bonus components.
///
/// `pi1`, `pi2`, and `total` are in debt-ratio units; `pv` applies the
/// notional and discounts from maturity to time zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenPayout {
    pub pi1: f64,
    pub pi2: f64,
    pub total: f64,
    pub pv: f64,
}

/// Scan a path for the first grid times with `D ≤ D*` and `g ≥ g*`.
///
/// Comparisons are inclusive and the scan starts at `t_0`, so an initial
/// state already past a threshold hits at time zero. Only grid points with
/// `t ≤ spec.horizon` count. Both conditions are evaluated on the same
/// (baseline) path: activation is decided by pre-conversion dynamics.
pub fn detect_hitting_times(path: &PathRecord, spec: &TriggerSpec) -> HittingTimes {
    let mut hit_d: Option<usize> = None;
    let mut hit_g: Option<usize> = None;
    for k in 0..path.times.len() {
        if path.times[k] > spec.horizon {
            break;
        }
        if hit_d.is_none() && path.debt[k] <= spec.d_star {
            hit_d = Some(k);
        }
        if hit_g.is_none() && path.growth[k] >= spec.g_star {
            hit_g = Some(k);
        }
        if hit_d.is_some() && hit_g.is_some() {
            break;
        }
    }
    match (hit_d, hit_g) {
        (Some(kd), Some(kg)) => {
            let k = kd.max(kg);
            HittingTimes {
                tau_d: Some(path.times[kd]),
                tau_g: Some(path.times[kg]),
                tau: Some(path.times[k]),
                tau_index: Some(k),
                triggered: true,
            }
        }
        (d, g) => HittingTimes {
            tau_d: d.map(|k| path.times[k]),
            tau_g: g.map(|k| path.times[k]),
            tau: None,
            tau_index: None,
            triggered: false,
        },
    }
}

/// Retire a fraction `alpha` of the debt at the activation time:
/// `D_τ = (1 - α)·D_{τ⁻}`.
pub fn apply_conversion(d_pre: f64, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 1); got {alpha}"),
        ));
    }
    if !(d_pre > 0.0) {
        return Err(Error::invalid(
            "d_pre",
            format!("must be positive; got {d_pre}"),
        ));
    }
    Ok((1.0 - alpha) * d_pre)
}

/// Token payout for a triggered path, evaluated on the converted branch.
///
/// `pi1 = β·max(D_τ - D*, 0)` uses the post-conversion debt at `τ`;
/// `pi2 = γ·Σ_{τ ≤ t_k < T} (g_k - g*)⁺·dt`. The present value discounts the
/// total from maturity at the continuous rate and applies the notional.
pub fn compute_payout(
    converted: &PathRecord,
    ht: &HittingTimes,
    spec: &TriggerSpec,
) -> Result<TokenPayout> {
    if !ht.triggered {
        return Err(Error::invalid(
            "hitting",
            "payout requires a triggered path".to_string(),
        ));
    }
    let k_tau = ht.tau_index.expect("triggered implies tau_index");
    let pi1 = spec.beta * (converted.debt[k_tau] - spec.d_star).max(0.0);
    let mut integral = 0.0;
    for k in k_tau..converted.times.len() {
        if converted.times[k] >= spec.horizon {
            break;
        }
        integral += (converted.growth[k] - spec.g_star).max(0.0) * converted.dt;
    }
    let pi2 = spec.gamma * integral;
    let total = pi1 + pi2;
    let pv = discount(total * spec.notional, spec.discount_rate, spec.horizon);
    Ok(TokenPayout {
        pi1,
        pi2,
        total,
        pv,
    })
}

/// Present value under continuous compounding: `value·e^{-rate·time}`.
pub fn discount(value: f64, rate: f64, time: f64) -> f64 {
    value * (-rate * time).exp()
}
