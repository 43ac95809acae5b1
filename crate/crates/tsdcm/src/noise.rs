//! Reproducible per-path noise streams.
//!
//! Every Monte Carlo path owns an independent ChaCha8 substream selected by
//! `(master seed, path index)`: the seed keys the cipher and the path index
//! selects the stream, so substreams for distinct indices never overlap
//! regardless of how many values each consumes.
//!
//! The draw order per grid step is fixed and is part of the reproducibility
//! contract:
//!
//! 1. one uniform in `[0, 1)` for the regime transition,
//! 2. one standard normal for the debt diffusion,
//! 3. one standard normal for the (independent part of the) growth diffusion,
//! 4. the debt jump count `~ Poisson(κ_r·dt)`, then one standard normal per jump,
//! 5. the growth jump count `~ Poisson(ξ_r·dt)`, then one standard normal per jump,
//!
//! where `r` is the regime after this step's transition draw. A zero jump
//! intensity consumes no draws. All noise for a path is materialized up front
//! in a [`PathNoise`] so a converted branch can replay the identical
//! increments from the conversion step onward (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::Result;
use crate::model::{grid_steps, sample_regime_step, transition_matrix, ModelConfig};

/// Independent generator for one path of the ensemble.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Raw draws for one Euler step. Normals are unit variance; the simulation
/// scales them by `√dt` and applies the Brownian correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct StepDraws {
    u_regime: f64,
    z_debt: f64,
    z_growth: f64,
    n_debt_jumps: u32,
    n_growth_jumps: u32,
}

/// Borrowed view of one step's noise, with jump draws resolved to slices.
pub struct StepNoise<'a> {
    pub u_regime: f64,
    pub z_debt: f64,
    pub z_growth: f64,
    pub debt_jump_z: &'a [f64],
    pub growth_jump_z: &'a [f64],
}

/// Pre-generated noise for every step of one path.
///
/// Jump normals are stored flat; per-step slices are recovered from the
/// stored counts while iterating.
#[derive(Debug, Clone, PartialEq)]
pub struct PathNoise {
    steps: Vec<StepDraws>,
    debt_jump_z: Vec<f64>,
    growth_jump_z: Vec<f64>,
}

impl PathNoise {
    /// Draw the full noise stream for a path on the grid
    /// `round(horizon/dt)` steps wide.
    ///
    /// Jump counts depend on the regime trajectory, so the regime chain is
    /// advanced here with the same transition arithmetic the simulation
    /// replays later from the stored uniforms.
    pub fn generate<R: Rng>(
        cfg: &ModelConfig,
        horizon: f64,
        dt: f64,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate("model")?;
        let n_steps = grid_steps(horizon, dt)?;
        let p = transition_matrix(&cfg.q, dt)?;

        // Jump-count distributions are regime-indexed; None encodes a zero
        // rate, which must consume no draws.
        let poisson = |rate: f64| -> Option<Poisson<f64>> {
            (rate > 0.0).then(|| Poisson::new(rate).expect("positive finite rate"))
        };
        let debt_jumps = [
            poisson(cfg.params_by_regime[0].kappa * dt),
            poisson(cfg.params_by_regime[1].kappa * dt),
        ];
        let growth_jumps = [
            poisson(cfg.params_by_regime[0].xi * dt),
            poisson(cfg.params_by_regime[1].xi * dt),
        ];

        let mut steps = Vec::with_capacity(n_steps);
        let mut debt_jump_z = Vec::new();
        let mut growth_jump_z = Vec::new();
        let mut regime = cfg.r0;
        for _ in 0..n_steps {
            let u_regime: f64 = rng.gen();
            regime = sample_regime_step(regime, &p, u_regime);
            let z_debt = StandardNormal.sample(rng);
            let z_growth = StandardNormal.sample(rng);
            let n_debt_jumps = draw_count(&debt_jumps[regime.index()], rng);
            for _ in 0..n_debt_jumps {
                debt_jump_z.push(StandardNormal.sample(rng));
            }
            let n_growth_jumps = draw_count(&growth_jumps[regime.index()], rng);
            for _ in 0..n_growth_jumps {
                growth_jump_z.push(StandardNormal.sample(rng));
            }
            steps.push(StepDraws {
                u_regime,
                z_debt,
                z_growth,
                n_debt_jumps,
                n_growth_jumps,
            });
        }
        Ok(PathNoise {
            steps,
            debt_jump_z,
            growth_jump_z,
        })
    }

    /// Number of Euler steps this stream covers.
    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// Cursor positioned at `from_step`, resolving the flat jump-draw offsets
    /// for that step.
    pub fn cursor_at(&self, from_step: usize) -> NoiseCursor<'_> {
        let head = &self.steps[..from_step.min(self.steps.len())];
        NoiseCursor {
            noise: self,
            step: from_step,
            debt_offset: head.iter().map(|s| s.n_debt_jumps as usize).sum(),
            growth_offset: head.iter().map(|s| s.n_growth_jumps as usize).sum(),
        }
    }
}

fn draw_count<R: Rng>(dist: &Option<Poisson<f64>>, rng: &mut R) -> u32 {
    match dist {
        Some(d) => {
            let n = d.sample(rng);
            if n >= u32::MAX as f64 {
                u32::MAX
            } else {
                n as u32
            }
        }
        None => 0,
    }
}

/// Sequential reader over a [`PathNoise`].
pub struct NoiseCursor<'a> {
    noise: &'a PathNoise,
    step: usize,
    debt_offset: usize,
    growth_offset: usize,
}

impl<'a> NoiseCursor<'a> {
    /// Noise for the current step; advances the cursor.
    pub fn next_step(&mut self) -> StepNoise<'a> {
        let draws = &self.noise.steps[self.step];
        let nd = draws.n_debt_jumps as usize;
        let ng = draws.n_growth_jumps as usize;
        let debt_jump_z = &self.noise.debt_jump_z[self.debt_offset..self.debt_offset + nd];
        let growth_jump_z = &self.noise.growth_jump_z[self.growth_offset..self.growth_offset + ng];
        self.step += 1;
        self.debt_offset += nd;
        self.growth_offset += ng;
        StepNoise {
            u_regime: draws.u_regime,
            z_debt: draws.z_debt,
            z_growth: draws.z_growth,
            debt_jump_z,
            growth_jump_z,
        }
    }
}
