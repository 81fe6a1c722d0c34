//! Seeded random problem generation.
//!
//! Every consumer gets its own stream: a base seed is mixed with a stable tag
//! (e.g. the axiom name) and then with the trial index, so trials can run in
//! any order or in parallel and still draw identical problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive agent-count range.
    pub n_range: (usize, usize),
    /// Inclusive income range.
    pub income_range: (f64, f64),
    /// Needs are drawn from `[lo, hi]`, `lo >= 0`, `hi > 0`.
    pub need_range: (f64, f64),
    /// Relative size of the first continuity perturbation.
    pub perturbation_scale: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 42,
            trials: 1000,
            n_range: (1, 6),
            income_range: (-10.0, 10.0),
            need_range: (0.0, 10.0),
            perturbation_scale: 1e-2,
        }
    }
}

impl SampleConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        let (n_lo, n_hi) = self.n_range;
        let (y_lo, y_hi) = self.income_range;
        let (z_lo, z_hi) = self.need_range;
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if n_lo == 0 || n_lo > n_hi {
            return bad("n_range must satisfy 1 <= min <= max");
        }
        if !(y_lo.is_finite() && y_hi.is_finite() && y_lo <= y_hi) {
            return bad("income_range must be finite with lo <= hi");
        }
        if !(z_lo.is_finite() && z_hi.is_finite() && z_lo >= 0.0 && z_hi > 0.0 && z_lo <= z_hi) {
            return bad("need_range must satisfy 0 <= lo <= hi, hi > 0");
        }
        if !(self.perturbation_scale.is_finite() && self.perturbation_scale > 0.0) {
            return bad("perturbation_scale must be positive");
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn mix_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across runs and platforms.
pub fn tag_of(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-consumer problem generator.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    cfg: &'a SampleConfig,
    stream: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(cfg: &'a SampleConfig, tag: &str) -> Self {
        Sampler {
            cfg,
            stream: mix_seed(cfg.seed, tag_of(tag)),
        }
    }

    pub fn config(&self) -> &SampleConfig {
        self.cfg
    }

    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix_seed(self.stream, trial as u64))
    }

    pub fn agent_count<R: Rng>(&self, rng: &mut R, min_agents: usize) -> usize {
        let lo = self.cfg.n_range.0.max(min_agents);
        let hi = self.cfg.n_range.1.max(lo);
        rng.random_range(lo..=hi)
    }

    pub fn income<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.cfg.income_range;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }

    pub fn incomes<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.income(rng)).collect()
    }

    pub fn need<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.cfg.need_range;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }

    /// Needs whose total is safely positive.
    pub fn needs<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let floor = 1e-3 * self.cfg.need_range.1;
        loop {
            let z: Vec<f64> = (0..n).map(|_| self.need(rng)).collect();
            if z.iter().sum::<f64>() > floor {
                return z;
            }
        }
    }

    /// A random problem with at least `min_agents` agents (clamped into the
    /// configured range).
    pub fn problem<R: Rng>(&self, rng: &mut R, min_agents: usize) -> Problem {
        let n = self.agent_count(rng, min_agents);
        let needs = self.needs(rng, n);
        let incomes = self.incomes(rng, n);
        Problem::from_profiles(incomes, needs).expect("sampled problem is valid")
    }

    /// A random problem whose ratio `Y / Z` equals `t` up to rounding.
    pub fn problem_with_ratio<R: Rng>(&self, rng: &mut R, min_agents: usize, t: f64) -> Problem {
        let n = self.agent_count(rng, min_agents);
        let needs = self.needs(rng, n);
        let mut incomes = self.incomes(rng, n);
        let target = t * needs.iter().sum::<f64>();
        let shift = (target - incomes.iter().sum::<f64>()) / n as f64;
        incomes.iter_mut().for_each(|y| *y += shift);
        Problem::from_profiles(incomes, needs).expect("sampled problem is valid")
    }
}

/// `cfg.trials` problems drawn from the stream named `tag`.
pub fn sample_problems(cfg: &SampleConfig, tag: &str) -> Result<Vec<Problem>> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg, tag);
    Ok((0..cfg.trials)
        .map(|k| sampler.problem(&mut sampler.trial_rng(k), 1))
        .collect())
}
