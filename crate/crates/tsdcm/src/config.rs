//! JSON run configuration: schema, shipped defaults, loading, validation.
//!
//! The schema mirrors the library types — `model`, `trigger`, `plan`,
//! `output_dir` — and every field is optional: missing fields take the
//! shipped defaults, so `{}` is the default run. Unknown fields are rejected
//! so typos surface as parse errors, and validation failures name the
//! offending field path.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::SimulationPlan;
use crate::error::{Error, Result};
use crate::mechanism::TriggerSpec;
use crate::model::{GeneratorMatrix, ModelConfig, Regime, RegimeParams};

/// Version of the configuration schema accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// A fully resolved, validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub trigger: TriggerSpec,
    pub plan: SimulationPlan,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model: ModelConfig::default(),
            trigger: TriggerSpec::default(),
            plan: SimulationPlan::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!(
                    "unsupported version {}; this build reads {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        self.model.validate("model")?;
        self.trigger.validate("trigger")?;
        self.plan.validate("plan")?;
        if self.plan.horizon < self.trigger.horizon {
            return Err(Error::invalid(
                "plan.horizon",
                format!(
                    "must cover the token maturity trigger.horizon; {} < {}",
                    self.plan.horizon, self.trigger.horizon
                ),
            ));
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }
}

// Raw mirror of the schema with every field optional, merged against the
// defaults after parsing. Regime parameters default per index, which is why
// the merge is explicit rather than `#[serde(default)]`.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    schema_version: Option<u32>,
    model: Option<RawModelConfig>,
    trigger: Option<RawTriggerSpec>,
    plan: Option<RawSimulationPlan>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelConfig {
    params_by_regime: Option<[RawRegimeParams; 2]>,
    q: Option<RawGeneratorMatrix>,
    rho: Option<f64>,
    d0: Option<f64>,
    g0: Option<f64>,
    r0: Option<u8>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegimeParams {
    a: Option<f64>,
    b: Option<f64>,
    sigma: Option<f64>,
    kappa: Option<f64>,
    mu_j: Option<f64>,
    sigma_j: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    eta: Option<f64>,
    xi: Option<f64>,
    mu_k: Option<f64>,
    sigma_k: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeneratorMatrix {
    lambda01: Option<f64>,
    lambda10: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriggerSpec {
    d_star: Option<f64>,
    g_star: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    horizon: Option<f64>,
    discount_rate: Option<f64>,
    notional: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulationPlan {
    n_paths: Option<usize>,
    horizon: Option<f64>,
    dt: Option<f64>,
    seed: Option<u64>,
}

fn merge_regime(raw: RawRegimeParams, defaults: RegimeParams) -> RegimeParams {
    RegimeParams {
        a: raw.a.unwrap_or(defaults.a),
        b: raw.b.unwrap_or(defaults.b),
        sigma: raw.sigma.unwrap_or(defaults.sigma),
        kappa: raw.kappa.unwrap_or(defaults.kappa),
        mu_j: raw.mu_j.unwrap_or(defaults.mu_j),
        sigma_j: raw.sigma_j.unwrap_or(defaults.sigma_j),
        c: raw.c.unwrap_or(defaults.c),
        d: raw.d.unwrap_or(defaults.d),
        eta: raw.eta.unwrap_or(defaults.eta),
        xi: raw.xi.unwrap_or(defaults.xi),
        mu_k: raw.mu_k.unwrap_or(defaults.mu_k),
        sigma_k: raw.sigma_k.unwrap_or(defaults.sigma_k),
    }
}

fn merge(raw: RawRunConfig) -> Result<RunConfig> {
    let defaults = RunConfig::default();
    let model = match raw.model {
        Some(m) => {
            let [raw0, raw1] = m.params_by_regime.unwrap_or_default();
            ModelConfig {
                params_by_regime: [
                    merge_regime(raw0, RegimeParams::expansion_default()),
                    merge_regime(raw1, RegimeParams::crisis_default()),
                ],
                q: match m.q {
                    Some(q) => GeneratorMatrix {
                        lambda01: q.lambda01.unwrap_or(defaults.model.q.lambda01),
                        lambda10: q.lambda10.unwrap_or(defaults.model.q.lambda10),
                    },
                    None => defaults.model.q,
                },
                rho: m.rho.unwrap_or(defaults.model.rho),
                d0: m.d0.unwrap_or(defaults.model.d0),
                g0: m.g0.unwrap_or(defaults.model.g0),
                r0: match m.r0 {
                    Some(v) => Regime::try_from(v)
                        .map_err(|msg| Error::invalid("model.r0", msg))?,
                    None => defaults.model.r0,
                },
            }
        }
        None => defaults.model,
    };
    let trigger = match raw.trigger {
        Some(t) => TriggerSpec {
            d_star: t.d_star.unwrap_or(defaults.trigger.d_star),
            g_star: t.g_star.unwrap_or(defaults.trigger.g_star),
            alpha: t.alpha.unwrap_or(defaults.trigger.alpha),
            beta: t.beta.unwrap_or(defaults.trigger.beta),
            gamma: t.gamma.unwrap_or(defaults.trigger.gamma),
            horizon: t.horizon.unwrap_or(defaults.trigger.horizon),
            discount_rate: t.discount_rate.unwrap_or(defaults.trigger.discount_rate),
            notional: t.notional.unwrap_or(defaults.trigger.notional),
        },
        None => defaults.trigger,
    };
    let plan = match raw.plan {
        Some(p) => SimulationPlan {
            n_paths: p.n_paths.unwrap_or(defaults.plan.n_paths),
            horizon: p.horizon.unwrap_or(defaults.plan.horizon),
            dt: p.dt.unwrap_or(defaults.plan.dt),
            seed: p.seed.unwrap_or(defaults.plan.seed),
        },
        None => defaults.plan,
    };
    Ok(RunConfig {
        schema_version: raw.schema_version.unwrap_or(SCHEMA_VERSION),
        model,
        trigger,
        plan,
        output_dir: raw.output_dir.unwrap_or(defaults.output_dir),
    })
}

/// Parse a configuration document, fill defaults, and validate.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let raw: RawRunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let config = merge(raw)?;
    config.validate()?;
    Ok(config)
}

/// Load and validate a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text, path)
}
