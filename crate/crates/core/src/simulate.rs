//! Monte Carlo careers under a fixed stationary policy.
//!
//! Each period starts from the state carried over from the previous period.
//! The policy picks an action, switch actions redraw the relevant components,
//! and the income earned in the period is that of the resulting state. This
//! matches the Bellman timing, so the expected discounted total from a state
//! equals the policy's value there.
//!
//! Every trial `k` gets its own ChaCha stream `(seed, k)`, and each period
//! consumes exactly one candidate `θ'` and one candidate `ε'` whether or not
//! they are used. Different policies therefore see the same random numbers
//! period by period.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::solver::{Action, ModelConfig, StationaryPolicy};

/// Draws support indices from a finite pmf.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    index: WeightedIndex<f64>,
}

impl PmfSampler {
    pub fn new(dist: &DiscreteDistribution) -> Result<Self> {
        let index = WeightedIndex::new(dist.probs())
            .map_err(|e| Error::invalid("probs", format!("cannot sample: {e}")))?;
        Ok(PmfSampler { index })
    }

    pub fn sample_index<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// The RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Fixed { theta: f64, epsilon: f64 },
    /// `θ0 ~ F`, `ε0 ~ G`.
    Draw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CareerTrajectory {
    pub beta: f64,
    pub initial_state: (f64, f64),
    /// State held (and paid) during period `t`, after that period's action.
    pub states: Vec<(f64, f64)>,
    pub actions: Vec<Action>,
    pub incomes: Vec<f64>,
    pub discounted_total: f64,
}

impl CareerTrajectory {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }

    /// Running discounted income after each period.
    pub fn discounted_cumulative(&self) -> Vec<f64> {
        let mut discount = 1.0;
        let mut total = 0.0;
        self.incomes
            .iter()
            .map(|g| {
                total += discount * g;
                discount *= self.beta;
                total
            })
            .collect()
    }
}

struct Simulator<'a> {
    config: &'a ModelConfig,
    policy: &'a StationaryPolicy,
    field: PmfSampler,
    topic: PmfSampler,
}

impl<'a> Simulator<'a> {
    fn new(config: &'a ModelConfig, policy: &'a StationaryPolicy) -> Result<Self> {
        if policy.dims() != config.grid().dims() {
            return Err(Error::invalid(
                "policy",
                format!(
                    "dimensions {:?} do not match grid {:?}",
                    policy.dims(),
                    config.grid().dims()
                ),
            ));
        }
        Ok(Simulator {
            config,
            policy,
            field: PmfSampler::new(config.field())?,
            topic: PmfSampler::new(config.topic())?,
        })
    }

    fn initial_indices(&self, initial: InitialState, rng: &mut ChaCha8Rng) -> Result<(usize, usize)> {
        let grid = self.config.grid();
        match initial {
            InitialState::Draw => Ok((self.field.sample_index(rng), self.topic.sample_index(rng))),
            InitialState::Fixed { theta, epsilon } => {
                let i = grid.theta_index(theta).ok_or_else(|| {
                    Error::invalid("initial_state", format!("theta {theta} is not on the grid"))
                })?;
                let j = grid.epsilon_index(epsilon).ok_or_else(|| {
                    Error::invalid("initial_state", format!("epsilon {epsilon} is not on the grid"))
                })?;
                Ok((i, j))
            }
        }
    }

    /// Returns the discounted total; records the path into `trace` if given.
    fn run(
        &self,
        initial: InitialState,
        horizon: usize,
        rng: &mut ChaCha8Rng,
        mut trace: Option<&mut CareerTrajectory>,
    ) -> Result<f64> {
        let grid = self.config.grid();
        let beta = self.config.beta();
        let (mut i, mut j) = self.initial_indices(initial, rng)?;
        if let Some(t) = trace.as_deref_mut() {
            t.initial_state = (grid.theta_values[i], grid.epsilon_values[j]);
        }
        let mut discount = 1.0;
        let mut total = 0.0;
        for _ in 0..horizon {
            let new_theta = self.field.sample_index(rng);
            let new_eps = self.topic.sample_index(rng);
            let action = self.policy.at(i, j);
            match action {
                Action::Stay => {}
                Action::NewTopic => j = new_eps,
                Action::NewField => {
                    i = new_theta;
                    j = new_eps;
                }
            }
            let (theta, eps) = (grid.theta_values[i], grid.epsilon_values[j]);
            let income = theta + eps;
            total += discount * income;
            discount *= beta;
            if let Some(t) = trace.as_deref_mut() {
                t.states.push((theta, eps));
                t.actions.push(action);
                t.incomes.push(income);
            }
        }
        Ok(total)
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    Ok(())
}

/// Simulate one career on trial stream 0 of `seed`.
pub fn simulate_career(
    config: &ModelConfig,
    policy: &StationaryPolicy,
    initial: InitialState,
    horizon: usize,
    seed: u64,
) -> Result<CareerTrajectory> {
    check_horizon(horizon)?;
    let sim = Simulator::new(config, policy)?;
    let mut trajectory = CareerTrajectory {
        beta: config.beta(),
        initial_state: (0.0, 0.0),
        states: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        incomes: Vec::with_capacity(horizon),
        discounted_total: 0.0,
    };
    let mut rng = trial_rng(seed, 0);
    trajectory.discounted_total = sim.run(initial, horizon, &mut rng, Some(&mut trajectory))?;
    Ok(trajectory)
}

/// Discounted totals of `trials` independent careers, indexed by trial.
pub fn discounted_totals(
    config: &ModelConfig,
    policy: &StationaryPolicy,
    initial: InitialState,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_horizon(horizon)?;
    let sim = Simulator::new(config, policy)?;
    (0..trials as u64)
        .map(|k| sim.run(initial, horizon, &mut trial_rng(seed, k), None))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub name: String,
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl PolicySummary {
    pub fn from_samples(name: impl Into<String>, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        PolicySummary {
            name: name.into(),
            trials: samples.len(),
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// Compare policies under common random numbers.
pub fn compare_policies(
    config: &ModelConfig,
    policies: &[(&str, &StationaryPolicy)],
    initial: InitialState,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<PolicySummary>> {
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2 trials"));
    }
    policies
        .iter()
        .map(|&(name, policy)| {
            let totals = discounted_totals(config, policy, initial, trials, horizon, seed)?;
            Ok(PolicySummary::from_samples(name, &totals))
        })
        .collect()
}
