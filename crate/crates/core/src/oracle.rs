//! Brute-force verification on tiny grids.
//!
//! Every stationary deterministic policy is evaluated exactly by solving
//! `(I - β P_π) v = r_π`, and the cell-wise best is compared with value
//! iteration. Stationary policies suffice for discounted problems, so the
//! maximum over this finite set is the true optimum.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{self, Action, ModelConfig, StateMatrix, StationaryPolicy, ValueFunction};

pub const DEFAULT_EVALUATION_CAP: usize = 16;
pub const DEFAULT_ENUMERATION_CAP: usize = 9;

/// Slack when checking that one policy attains the cell-wise maximum.
const ATTAINMENT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub evaluation_cap: usize,
    pub enumeration_cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            evaluation_cap: DEFAULT_EVALUATION_CAP,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl Oracle {
    /// Exact value of following `policy` forever.
    pub fn evaluate_policy(&self, config: &ModelConfig, policy: &StationaryPolicy) -> Result<ValueFunction> {
        let grid = config.grid();
        let cells = grid.cells();
        if cells > self.evaluation_cap {
            return Err(Error::GridTooLarge {
                cells,
                limit: self.evaluation_cap,
            });
        }
        if policy.dims() != grid.dims() {
            return Err(Error::invalid(
                "policy",
                format!("dimensions {:?} do not match grid {:?}", policy.dims(), grid.dims()),
            ));
        }
        let (rows, cols) = grid.dims();
        let beta = config.beta();
        let field_p = config.field().probs();
        let topic_p = config.topic().probs();
        let mean_field = config.field().mean();
        let mean_topic = config.topic().mean();

        let mut system = DMatrix::<f64>::identity(cells, cells);
        let mut reward = DVector::<f64>::zeros(cells);
        for (i, j, &action) in policy.iter_cells() {
            let c = i * cols + j;
            let theta = grid.theta_values[i];
            let eps = grid.epsilon_values[j];
            match action {
                Action::Stay => {
                    reward[c] = theta + eps;
                    system[(c, c)] -= beta;
                }
                Action::NewTopic => {
                    reward[c] = theta + mean_topic;
                    for (jj, &q) in topic_p.iter().enumerate() {
                        system[(c, i * cols + jj)] -= beta * q;
                    }
                }
                Action::NewField => {
                    reward[c] = mean_field + mean_topic;
                    for (ii, &p) in field_p.iter().enumerate() {
                        for (jj, &q) in topic_p.iter().enumerate() {
                            system[(c, ii * cols + jj)] -= beta * p * q;
                        }
                    }
                }
            }
        }
        let solution = system
            .lu()
            .solve(&reward)
            .ok_or_else(|| Error::Validation("singular policy-evaluation system".into()))?;
        StateMatrix::from_vec(rows, cols, solution.iter().copied().collect())
    }

    /// Evaluate all `3^cells` stationary policies and return the cell-wise
    /// maximum together with the first policy (in enumeration order, all-Stay
    /// first) that attains it everywhere.
    pub fn enumerate_and_maximize(&self, config: &ModelConfig) -> Result<(ValueFunction, StationaryPolicy)> {
        let grid = config.grid();
        let cells = grid.cells();
        if cells > self.enumeration_cap {
            return Err(Error::GridTooLarge {
                cells,
                limit: self.enumeration_cap,
            });
        }
        let (rows, cols) = grid.dims();
        let count = 3usize.pow(cells as u32);
        let mut values = Vec::with_capacity(count);
        let mut best = vec![f64::NEG_INFINITY; cells];
        for index in 0..count {
            let policy = decode_policy(index, rows, cols);
            let v = self.evaluate_policy(config, &policy)?;
            for (b, &x) in best.iter_mut().zip(v.as_slice()) {
                *b = b.max(x);
            }
            values.push(v);
        }

        let mut smallest_gap = f64::INFINITY;
        for (index, v) in values.iter().enumerate() {
            let gap = v
                .as_slice()
                .iter()
                .zip(&best)
                .map(|(x, b)| b - x)
                .fold(0.0, f64::max);
            if gap <= ATTAINMENT_SLACK {
                let best = StateMatrix::from_vec(rows, cols, best)?;
                return Ok((best, decode_policy(index, rows, cols)));
            }
            smallest_gap = smallest_gap.min(gap);
        }
        Err(Error::NoUniformMaximizer { gap: smallest_gap })
    }
}

/// Policy number `index` in base 3, cell 0 as the least significant digit.
pub fn decode_policy(mut index: usize, rows: usize, cols: usize) -> StationaryPolicy {
    StateMatrix::from_fn(rows, cols, |_, _| {
        let action = Action::ALL[index % 3];
        index /= 3;
        action
    })
}

pub fn evaluate_policy(config: &ModelConfig, policy: &StationaryPolicy) -> Result<ValueFunction> {
    Oracle::default().evaluate_policy(config, policy)
}

pub fn enumerate_and_maximize(config: &ModelConfig) -> Result<(ValueFunction, StationaryPolicy)> {
    Oracle::default().enumerate_and_maximize(config)
}

/// Cell-wise comparison of enumeration against value iteration.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub mismatches: Vec<CellMismatch>,
    pub oracle_policy: StationaryPolicy,
    pub solver_policy: StationaryPolicy,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellMismatch {
    pub theta: f64,
    pub epsilon: f64,
    pub oracle: f64,
    pub solver: f64,
}

impl OracleComparison {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn compare_with_solver(
    config: &ModelConfig,
    solve_tolerance: f64,
    max_iterations: usize,
    match_tolerance: f64,
) -> Result<OracleComparison> {
    let (oracle_value, oracle_policy) = enumerate_and_maximize(config)?;
    let solved = solver::solve(config, solve_tolerance, max_iterations)?;
    let grid = config.grid();
    let mut mismatches = Vec::new();
    let mut max_abs_diff: f64 = 0.0;
    for (i, j, &o) in oracle_value.iter_cells() {
        let s = solved.value.at(i, j);
        let diff = (o - s).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff > match_tolerance {
            mismatches.push(CellMismatch {
                theta: grid.theta_values[i],
                epsilon: grid.epsilon_values[j],
                oracle: o,
                solver: s,
            });
        }
    }
    Ok(OracleComparison {
        max_abs_diff,
        tolerance: match_tolerance,
        mismatches,
        oracle_policy,
        solver_policy: solved.policy,
    })
}
