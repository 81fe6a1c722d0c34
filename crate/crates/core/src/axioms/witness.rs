//! Concrete, re-runnable axiom trials.
//!
//! A [`Witness`] pins down every input of one trial (problems, factors,
//! coalitions, directions), so a failing trial can be replayed against the
//! rule and shrunk without touching the random stream again.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::Serialize;

use super::Axiom;
use crate::error::Result;
use crate::problem::{max_abs_diff, Problem};
use crate::rules::{evaluate, RuleSpec};
use crate::sampling::Sampler;

/// Halvings of the first continuity step.
pub const CONTINUITY_STEPS: u32 = 40;

/// Halving rounds attempted when shrinking a counterexample.
pub const SHRINK_ROUNDS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Homogeneity {
        problem: Problem,
        factor: f64,
    },
    EqualTreatment {
        problem: Problem,
        first: usize,
        second: usize,
    },
    /// Probes `problem + delta_k * direction`, `delta_k = scale * 2^-k`.
    Continuity {
        problem: Problem,
        income_direction: Vec<f64>,
        need_direction: Vec<f64>,
        scale: f64,
        steps: u32,
    },
    Nat {
        problem: Problem,
        reallocated: Problem,
        coalition: Vec<usize>,
    },
    Stability {
        problem: Problem,
    },
    Dummy {
        problem: Problem,
        agent: usize,
    },
    IncomeAdditivity {
        problem: Problem,
        extra_incomes: Vec<f64>,
    },
    DualIncomeAdditivity {
        problem: Problem,
        extra_incomes: Vec<f64>,
    },
}

/// What a trial computed. The trial is violated when
/// `deviation > tol * magnitude`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    pub deviation: f64,
    /// `max(1, |Y|, Z)` over every problem the trial touched.
    pub magnitude: f64,
}

impl Outcome {
    pub fn threshold(&self, tol: f64) -> f64 {
        tol * self.magnitude
    }

    pub fn violates(&self, tol: f64) -> bool {
        self.deviation > self.threshold(tol)
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn drop_index<T: Clone>(v: &[T], k: usize) -> Vec<T> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, x)| x.clone())
        .collect()
}

/// Index of `i` after removing `k`, assuming `i != k`.
fn shift(i: usize, k: usize) -> usize {
    if i > k {
        i - 1
    } else {
        i
    }
}

impl Witness {
    pub fn axiom(&self) -> Axiom {
        match self {
            Witness::Homogeneity { .. } => Axiom::Homogeneity,
            Witness::EqualTreatment { .. } => Axiom::EqualTreatment,
            Witness::Continuity { .. } => Axiom::Continuity,
            Witness::Nat { .. } => Axiom::Nat,
            Witness::Stability { .. } => Axiom::Stability,
            Witness::Dummy { .. } => Axiom::Dummy,
            Witness::IncomeAdditivity { .. } => Axiom::IncomeAdditivity,
            Witness::DualIncomeAdditivity { .. } => Axiom::DualIncomeAdditivity,
        }
    }

    /// The base problem of the trial.
    pub fn problem(&self) -> &Problem {
        match self {
            Witness::Homogeneity { problem, .. }
            | Witness::EqualTreatment { problem, .. }
            | Witness::Continuity { problem, .. }
            | Witness::Nat { problem, .. }
            | Witness::Stability { problem }
            | Witness::Dummy { problem, .. }
            | Witness::IncomeAdditivity { problem, .. }
            | Witness::DualIncomeAdditivity { problem, .. } => problem,
        }
    }

    /// Draws one trial for `axiom`.
    pub fn sample<R: Rng>(axiom: Axiom, sampler: &Sampler<'_>, rng: &mut R) -> Witness {
        let cfg = sampler.config();
        match axiom {
            Axiom::Homogeneity => {
                let problem = sampler.problem(rng, 1);
                // (0, 10]
                let factor = 10.0 * (1.0 - rng.random::<f64>());
                Witness::Homogeneity { problem, factor }
            }
            Axiom::EqualTreatment => loop {
                let p = sampler.problem(rng, 2);
                let pair = sample_indices(rng, p.len(), 2);
                let (first, second) = (pair.index(0), pair.index(1));
                let mut y = p.incomes().to_vec();
                let mut z = p.needs().to_vec();
                y[second] = y[first];
                z[second] = z[first];
                if let Ok(problem) = p.with_profiles(y, z) {
                    break Witness::EqualTreatment {
                        problem,
                        first,
                        second,
                    };
                }
            },
            Axiom::Continuity => {
                let problem = sampler.problem(rng, 1);
                let n = problem.len();
                let income_span = problem.incomes().iter().fold(1.0f64, |m, y| m.max(y.abs()));
                let mean_need = problem.total_need() / n as f64;
                let income_direction = (0..n)
                    .map(|_| income_span * rng.random_range(-1.0..=1.0))
                    .collect();
                // Shrinking needs stay proportional to z_i so z stays >= 0.
                let need_direction = problem
                    .needs()
                    .iter()
                    .map(|&z| {
                        let u: f64 = rng.random_range(-1.0..=1.0);
                        if u < 0.0 {
                            u * z
                        } else {
                            u * z.max(mean_need)
                        }
                    })
                    .collect();
                Witness::Continuity {
                    problem,
                    income_direction,
                    need_direction,
                    scale: cfg.perturbation_scale.min(1.0),
                    steps: CONTINUITY_STEPS,
                }
            }
            Axiom::Nat => {
                let problem = sampler.problem(rng, 2);
                let n = problem.len();
                let size = rng.random_range(2..=n);
                let mut coalition = sample_indices(rng, n, size).into_vec();
                coalition.sort_unstable();

                let (lo, hi) = cfg.income_range;
                let spread = ((hi - lo) / 2.0).max(1.0);
                let shocks: Vec<f64> = (0..size).map(|_| rng.random_range(-spread..=spread)).collect();
                let mean_shock = shocks.iter().sum::<f64>() / size as f64;

                let group_need: f64 = coalition.iter().map(|&i| problem.needs()[i]).sum();
                let weights: Vec<f64> = (0..size)
                    .map(|_| -(1.0 - rng.random::<f64>()).ln())
                    .collect();
                let weight_sum: f64 = weights.iter().sum();

                let mut y = problem.incomes().to_vec();
                let mut z = problem.needs().to_vec();
                for (slot, &i) in coalition.iter().enumerate() {
                    y[i] += shocks[slot] - mean_shock;
                    z[i] = group_need * weights[slot] / weight_sum;
                }
                let reallocated = problem
                    .with_profiles(y, z)
                    .expect("reallocation keeps aggregates");
                Witness::Nat {
                    problem,
                    reallocated,
                    coalition,
                }
            }
            Axiom::Stability => Witness::Stability {
                problem: sampler.problem(rng, 1),
            },
            Axiom::Dummy => loop {
                let p = sampler.problem(rng, 2);
                let agent = rng.random_range(0..p.len());
                let mut y = p.incomes().to_vec();
                let mut z = p.needs().to_vec();
                y[agent] = 0.0;
                z[agent] = 0.0;
                if let Ok(problem) = p.with_profiles(y, z) {
                    break Witness::Dummy { problem, agent };
                }
            },
            Axiom::IncomeAdditivity | Axiom::DualIncomeAdditivity => {
                let problem = sampler.problem(rng, 1);
                let extra_incomes = sampler.incomes(rng, problem.len());
                if axiom == Axiom::IncomeAdditivity {
                    Witness::IncomeAdditivity {
                        problem,
                        extra_incomes,
                    }
                } else {
                    Witness::DualIncomeAdditivity {
                        problem,
                        extra_incomes,
                    }
                }
            }
        }
    }

    /// Runs the trial against `rule`.
    pub fn evaluate(&self, rule: &RuleSpec) -> Result<Outcome> {
        let eval = |p: &Problem| evaluate(rule, p).map(|x| x.into_values());
        Ok(match self {
            Witness::Homogeneity { problem, factor } => {
                let scaled = problem.scaled(*factor)?;
                let expected: Vec<f64> = eval(problem)?.iter().map(|x| factor * x).collect();
                let observed = eval(&scaled)?;
                Outcome {
                    deviation: max_abs_diff(&expected, &observed),
                    expected,
                    observed,
                    magnitude: problem.magnitude().max(scaled.magnitude()),
                }
            }
            Witness::EqualTreatment {
                problem,
                first,
                second,
            } => {
                let x = eval(problem)?;
                Outcome {
                    expected: vec![x[*first]],
                    observed: vec![x[*second]],
                    deviation: (x[*first] - x[*second]).abs(),
                    magnitude: problem.magnitude(),
                }
            }
            Witness::Continuity {
                problem,
                income_direction,
                need_direction,
                scale,
                steps,
            } => {
                let base = eval(problem)?;
                let mut gaps = Vec::with_capacity(*steps as usize + 1);
                let mut last = base.clone();
                let mut magnitude = problem.magnitude();
                for k in 0..=*steps {
                    let delta = scale * 0.5f64.powi(k as i32);
                    let y = problem
                        .incomes()
                        .iter()
                        .zip(income_direction)
                        .map(|(y, d)| y + delta * d)
                        .collect();
                    let z = problem
                        .needs()
                        .iter()
                        .zip(need_direction)
                        .map(|(z, d)| (z + delta * d).max(0.0))
                        .collect();
                    let moved = problem.with_profiles(y, z)?;
                    magnitude = magnitude.max(moved.magnitude());
                    last = eval(&moved)?;
                    gaps.push(max_abs_diff(&last, &base));
                }
                // The tail must shrink; early steps may still be outside the
                // locally linear regime.
                let tail = gaps.len() / 2;
                let rebound = gaps[tail..]
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(0.0, f64::max);
                let final_gap = *gaps.last().expect("at least one step");
                Outcome {
                    expected: base,
                    observed: last,
                    deviation: final_gap.max(rebound),
                    magnitude,
                }
            }
            Witness::Nat {
                problem,
                reallocated,
                coalition,
            } => {
                let x = eval(problem)?;
                let x2 = eval(reallocated)?;
                let before: f64 = coalition.iter().map(|&i| x[i]).sum();
                let after: f64 = coalition.iter().map(|&i| x2[i]).sum();
                Outcome {
                    expected: vec![before],
                    observed: vec![after],
                    deviation: (before - after).abs(),
                    magnitude: problem.magnitude().max(reallocated.magnitude()),
                }
            }
            Witness::Stability { problem } => {
                let x = eval(problem)?;
                let again = problem.with_incomes(x.clone())?;
                let x2 = eval(&again)?;
                Outcome {
                    deviation: max_abs_diff(&x, &x2),
                    expected: x,
                    observed: x2,
                    magnitude: problem.magnitude().max(again.magnitude()),
                }
            }
            Witness::Dummy { problem, agent } => {
                let x = eval(problem)?;
                Outcome {
                    expected: vec![0.0],
                    observed: vec![x[*agent]],
                    deviation: x[*agent].abs(),
                    magnitude: problem.magnitude(),
                }
            }
            Witness::IncomeAdditivity {
                problem,
                extra_incomes,
            } => {
                let other = problem.with_incomes(extra_incomes.clone())?;
                let joint = problem.with_incomes(add(problem.incomes(), extra_incomes))?;
                let expected = add(&eval(problem)?, &eval(&other)?);
                let observed = eval(&joint)?;
                Outcome {
                    deviation: max_abs_diff(&expected, &observed),
                    expected,
                    observed,
                    magnitude: problem.magnitude().max(other.magnitude()).max(joint.magnitude()),
                }
            }
            Witness::DualIncomeAdditivity {
                problem,
                extra_incomes,
            } => {
                // z + R(y + y', z) = R(y, z) + R(z + y', z)
                let shifted = problem.with_incomes(add(problem.needs(), extra_incomes))?;
                let joint = problem.with_incomes(add(problem.incomes(), extra_incomes))?;
                let expected = add(&eval(problem)?, &eval(&shifted)?);
                let observed = add(problem.needs(), &eval(&joint)?);
                Outcome {
                    deviation: max_abs_diff(&expected, &observed),
                    expected,
                    observed,
                    magnitude: problem.magnitude().max(shifted.magnitude()).max(joint.magnitude()),
                }
            }
        })
    }

    /// Same trial with its perturbation halved, when it has one.
    pub fn halved(&self) -> Option<Witness> {
        match self {
            Witness::Homogeneity { problem, factor } => Some(Witness::Homogeneity {
                problem: problem.clone(),
                factor: 1.0 + (factor - 1.0) / 2.0,
            }),
            Witness::Continuity {
                problem,
                income_direction,
                need_direction,
                scale,
                steps,
            } => Some(Witness::Continuity {
                problem: problem.clone(),
                income_direction: income_direction.clone(),
                need_direction: need_direction.clone(),
                scale: scale / 2.0,
                steps: *steps,
            }),
            Witness::Nat {
                problem,
                reallocated,
                coalition,
            } => {
                let mid = |a: &[f64], b: &[f64]| -> Vec<f64> {
                    a.iter().zip(b).map(|(u, v)| u + (v - u) / 2.0).collect()
                };
                let halfway = problem
                    .with_profiles(
                        mid(problem.incomes(), reallocated.incomes()),
                        mid(problem.needs(), reallocated.needs()),
                    )
                    .ok()?;
                Some(Witness::Nat {
                    problem: problem.clone(),
                    reallocated: halfway,
                    coalition: coalition.clone(),
                })
            }
            Witness::IncomeAdditivity {
                problem,
                extra_incomes,
            } => Some(Witness::IncomeAdditivity {
                problem: problem.clone(),
                extra_incomes: extra_incomes.iter().map(|y| y / 2.0).collect(),
            }),
            Witness::DualIncomeAdditivity {
                problem,
                extra_incomes,
            } => Some(Witness::DualIncomeAdditivity {
                problem: problem.clone(),
                extra_incomes: extra_incomes.iter().map(|y| y / 2.0).collect(),
            }),
            Witness::EqualTreatment { .. } | Witness::Stability { .. } | Witness::Dummy { .. } => None,
        }
    }

    /// Same trial with agent `k` removed, when `k` is not essential to it.
    pub fn without_agent(&self, k: usize) -> Option<Witness> {
        let p = self.problem();
        if p.len() <= 1 || k >= p.len() {
            return None;
        }
        let smaller = p.without_agent(k).ok()?;
        Some(match self {
            Witness::Homogeneity { factor, .. } => Witness::Homogeneity {
                problem: smaller,
                factor: *factor,
            },
            Witness::EqualTreatment { first, second, .. } => {
                if k == *first || k == *second {
                    return None;
                }
                Witness::EqualTreatment {
                    problem: smaller,
                    first: shift(*first, k),
                    second: shift(*second, k),
                }
            }
            Witness::Continuity {
                income_direction,
                need_direction,
                scale,
                steps,
                ..
            } => Witness::Continuity {
                problem: smaller,
                income_direction: drop_index(income_direction, k),
                need_direction: drop_index(need_direction, k),
                scale: *scale,
                steps: *steps,
            },
            Witness::Nat {
                reallocated,
                coalition,
                ..
            } => {
                if coalition.contains(&k) {
                    return None;
                }
                Witness::Nat {
                    problem: smaller,
                    reallocated: reallocated.without_agent(k).ok()?,
                    coalition: coalition.iter().map(|&i| shift(i, k)).collect(),
                }
            }
            Witness::Stability { .. } => Witness::Stability { problem: smaller },
            Witness::Dummy { agent, .. } => {
                if k == *agent {
                    return None;
                }
                Witness::Dummy {
                    problem: smaller,
                    agent: shift(*agent, k),
                }
            }
            Witness::IncomeAdditivity { extra_incomes, .. } => Witness::IncomeAdditivity {
                problem: smaller,
                extra_incomes: drop_index(extra_incomes, k),
            },
            Witness::DualIncomeAdditivity { extra_incomes, .. } => Witness::DualIncomeAdditivity {
                problem: smaller,
                extra_incomes: drop_index(extra_incomes, k),
            },
        })
    }

    /// Shrinks a violating trial: halve the perturbation while the violation
    /// persists, then drop inessential agents one at a time.
    pub fn shrink(self, first: Outcome, rule: &RuleSpec, tol: f64) -> (Witness, Outcome) {
        let still_violates = |w: &Witness| match w.evaluate(rule) {
            Ok(o) if o.violates(tol) => Some(o),
            _ => None,
        };
        let (mut best, mut outcome) = (self, first);
        for _ in 0..SHRINK_ROUNDS {
            match best.halved().and_then(|c| still_violates(&c).map(|o| (c, o))) {
                Some((c, o)) => {
                    best = c;
                    outcome = o;
                }
                None => break,
            }
        }
        'agents: loop {
            for k in 0..best.problem().len() {
                if let Some((c, o)) = best
                    .without_agent(k)
                    .and_then(|c| still_violates(&c).map(|o| (c, o)))
                {
                    best = c;
                    outcome = o;
                    continue 'agents;
                }
            }
            break;
        }
        (best, outcome)
    }
}
