//! Value-function iteration for the three-action career model.
//!
//! Each period a researcher holding `(θ, ε)` earns `θ + ε` and may keep the
//! state, redraw `ε ~ G`, or redraw both `θ ~ F` and `ε ~ G`. The Bellman
//! operator is
//!
//! ```text
//! T v(θ, ε) = max( θ + ε + β v(θ, ε),
//!                  θ + E[ε'] + β E_G v(θ, ε'),
//!                  E[θ'] + E[ε'] + β E_{F×G} v(θ', ε') )
//! ```
//!
//! A switching researcher earns the freshly drawn income in the switching
//! period, and continues from the freshly drawn state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};

/// Absolute slack used when comparing branch values in the argmax.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Change nothing.
    Stay,
    /// Redraw the topic component within the current field.
    NewTopic,
    /// Redraw both field and topic components.
    NewField,
}

impl Action {
    /// Tie-break order: earlier entries win exact ties.
    pub const ALL: [Action; 3] = [Action::Stay, Action::NewTopic, Action::NewField];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Stay => "stay",
            Action::NewTopic => "new_topic",
            Action::NewField => "new_field",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "stay" => Ok(Action::Stay),
            "new_topic" => Ok(Action::NewTopic),
            "new_field" => Ok(Action::NewField),
            other => Err(Error::Validation(format!("unknown action `{other}`"))),
        }
    }
}

/// Row-major matrix indexed by `(theta index, epsilon index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> StateMatrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        StateMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> StateMatrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(
                "matrix",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(StateMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        StateMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / cols, k % cols, v))
    }
}

impl<T: Copy> StateMatrix<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }
}

pub type ValueFunction = StateMatrix<f64>;
pub type StationaryPolicy = StateMatrix<Action>;

impl StateMatrix<f64> {
    pub fn sup_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
}

impl GridSpec {
    pub fn dims(&self) -> (usize, usize) {
        (self.theta_values.len(), self.epsilon_values.len())
    }

    pub fn cells(&self) -> usize {
        self.theta_values.len() * self.epsilon_values.len()
    }

    pub fn theta_index(&self, theta: f64) -> Option<usize> {
        find_on_axis(&self.theta_values, theta)
    }

    pub fn epsilon_index(&self, epsilon: f64) -> Option<usize> {
        find_on_axis(&self.epsilon_values, epsilon)
    }
}

fn find_on_axis(axis: &[f64], x: f64) -> Option<usize> {
    const SNAP: f64 = 1e-9;
    axis.iter().position(|&v| (v - x).abs() <= SNAP)
}

/// One solvable instance: discount factor plus field (`F`) and topic (`G`)
/// distributions. The state grid is the product of the two supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    grid: GridSpec,
    beta: f64,
    field: DiscreteDistribution,
    topic: DiscreteDistribution,
}

impl ModelConfig {
    pub fn new(beta: f64, field: DiscreteDistribution, topic: DiscreteDistribution) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid(
                "beta",
                format!("discount must lie in [0, 1), got {beta}"),
            ));
        }
        let grid = GridSpec {
            theta_values: field.support().to_vec(),
            epsilon_values: topic.support().to_vec(),
        };
        Ok(ModelConfig {
            grid,
            beta,
            field,
            topic,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `F`, the distribution of the field component `θ`.
    pub fn field(&self) -> &DiscreteDistribution {
        &self.field
    }

    /// `G`, the distribution of the topic component `ε`.
    pub fn topic(&self) -> &DiscreteDistribution {
        &self.topic
    }

    /// Largest attainable per-period income divided by `1 - β`.
    pub fn value_upper_bound(&self) -> f64 {
        let max_theta = *self.grid.theta_values.last().unwrap();
        let max_eps = *self.grid.epsilon_values.last().unwrap();
        (max_theta + max_eps) / (1.0 - self.beta)
    }
}

/// Right-hand-side branch values of one Bellman backup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionValues {
    pub stay: StateMatrix<f64>,
    pub new_topic: StateMatrix<f64>,
    pub new_field: StateMatrix<f64>,
}

impl ActionValues {
    pub fn for_action(&self, action: Action) -> &StateMatrix<f64> {
        match action {
            Action::Stay => &self.stay,
            Action::NewTopic => &self.new_topic,
            Action::NewField => &self.new_field,
        }
    }

    /// Branch maximum and its action, Stay ≻ NewTopic ≻ NewField on ties.
    pub fn best(&self, i: usize, j: usize) -> (Action, f64) {
        let mut best = (Action::Stay, self.stay.at(i, j));
        for action in [Action::NewTopic, Action::NewField] {
            let v = self.for_action(action).at(i, j);
            if v > best.1 + TIE_TOLERANCE {
                best = (action, v);
            }
        }
        best
    }

    pub fn policy(&self) -> StationaryPolicy {
        let (rows, cols) = self.stay.dims();
        StateMatrix::from_fn(rows, cols, |i, j| self.best(i, j).0)
    }
}

/// Apply the Bellman operator once. Expectations are exact finite sums.
pub fn bellman_backup(config: &ModelConfig, v: &ValueFunction) -> Result<(ValueFunction, ActionValues)> {
    let (rows, cols) = config.grid.dims();
    if v.dims() != (rows, cols) {
        return Err(Error::invalid(
            "value_function",
            format!(
                "dimensions {:?} do not match grid {rows}x{cols}",
                v.dims()
            ),
        ));
    }
    let beta = config.beta;
    let theta = &config.grid.theta_values;
    let eps = &config.grid.epsilon_values;
    let topic_probs = config.topic.probs();
    let mean_field = config.field.mean();
    let mean_topic = config.topic.mean();

    // E_G v(θ_i, ·) per row, then E_F of that.
    let row_avg: Vec<f64> = (0..rows)
        .map(|i| v.row(i).iter().zip(topic_probs).map(|(x, p)| x * p).sum())
        .collect();
    let full_avg: f64 = row_avg
        .iter()
        .zip(config.field.probs())
        .map(|(x, p)| x * p)
        .sum();

    let field_value = mean_field + mean_topic + beta * full_avg;
    let stay = StateMatrix::from_fn(rows, cols, |i, j| theta[i] + eps[j] + beta * v.at(i, j));
    let new_topic = StateMatrix::from_fn(rows, cols, |i, _| theta[i] + mean_topic + beta * row_avg[i]);
    let new_field = StateMatrix::filled(rows, cols, field_value);
    let values = ActionValues {
        stay,
        new_topic,
        new_field,
    };
    let next = StateMatrix::from_fn(rows, cols, |i, j| values.best(i, j).1);
    Ok((next, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub value: ValueFunction,
    pub policy: StationaryPolicy,
    pub action_values: ActionValues,
    pub iterations: usize,
    pub sup_norm_residual: f64,
    /// `‖T(v_k) - v_k‖` for every sweep, in order.
    pub residuals: Vec<f64>,
}

impl SolveResult {
    pub fn action_share(&self, action: Action) -> f64 {
        action_share(&self.policy, action)
    }
}

pub fn action_share(policy: &StationaryPolicy, action: Action) -> f64 {
    let n = policy.as_slice().len();
    policy.as_slice().iter().filter(|&&a| a == action).count() as f64 / n as f64
}

/// Value iteration from `v ≡ 0`.
///
/// Stops once `‖T(v) - v‖ < tolerance (1 - β) / (2β)`, which bounds the
/// distance of the returned `T(v)` from the fixed point by `tolerance / 2`.
/// With `β = 0` one backup is exact.
pub fn solve(config: &ModelConfig, tolerance: f64, max_iterations: usize) -> Result<SolveResult> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid("tolerance", format!("must be positive, got {tolerance}")));
    }
    if max_iterations == 0 {
        return Err(Error::invalid("max_iterations", "must be at least 1"));
    }
    let beta = config.beta;
    let (rows, cols) = config.grid.dims();
    let threshold = if beta > 0.0 {
        tolerance * (1.0 - beta) / (2.0 * beta)
    } else {
        f64::INFINITY
    };

    let mut v = StateMatrix::filled(rows, cols, 0.0);
    let mut residuals = Vec::new();
    for iteration in 1..=max_iterations {
        let (next, action_values) = bellman_backup(config, &v)?;
        let residual = next.sup_distance(&v);
        residuals.push(residual);
        let done = beta == 0.0 || residual < threshold;
        if done || iteration == max_iterations {
            let result = SolveResult {
                policy: action_values.policy(),
                value: next,
                action_values,
                iterations: iteration,
                sup_norm_residual: residual,
                residuals,
            };
            if done {
                return Ok(result);
            }
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
                partial: Box::new(result),
            });
        }
        v = next;
    }
    unreachable!("loop returns on the last iteration")
}

/// Reservation-value summary of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyThresholds {
    /// Smallest `θ` whose row contains no NewField cell; `None` if every row does.
    pub theta_bar: Option<f64>,
    /// For each `θ ≥ theta_bar`, the smallest `ε` where Stay is chosen, or
    /// `None` when that row never stays.
    pub epsilon_bar: Vec<(f64, Option<f64>)>,
}

pub fn policy_thresholds(grid: &GridSpec, policy: &StationaryPolicy) -> PolicyThresholds {
    let theta_row = (0..policy.rows()).find(|&i| policy.row(i).iter().all(|&a| a != Action::NewField));
    let Some(start) = theta_row else {
        return PolicyThresholds {
            theta_bar: None,
            epsilon_bar: Vec::new(),
        };
    };
    let epsilon_bar = (start..policy.rows())
        .map(|i| {
            let eps = policy
                .row(i)
                .iter()
                .position(|&a| a == Action::Stay)
                .map(|j| grid.epsilon_values[j]);
            (grid.theta_values[i], eps)
        })
        .collect();
    PolicyThresholds {
        theta_bar: Some(grid.theta_values[start]),
        epsilon_bar,
    }
}
