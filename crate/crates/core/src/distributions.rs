//! Finite discrete income distributions.
//!
//! The field component `θ` is drawn from `F` and the topic component `ε` from
//! `G`. Both live on a finite, evenly spaced income grid, so every expectation
//! the solver needs is an exact finite sum.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Probabilities must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Closed income interval `[lo, hi]` that grid-based distributions are spread over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for IncomeRange {
    fn default() -> Self {
        IncomeRange { lo: 0.0, hi: 5.0 }
    }
}

impl IncomeRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid(
                "income_range",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(IncomeRange { lo, hi })
    }

    /// `points` evenly spaced values from `lo` to `hi` inclusive. A single
    /// point sits at `lo`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![self.lo];
        }
        let last = (points - 1) as f64;
        (0..points)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / last)
            .collect()
    }
}

/// A probability mass function over a strictly increasing finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("support", "must contain at least one value"));
        }
        if support.len() != probs.len() {
            return Err(Error::invalid(
                "probs",
                format!(
                    "length {} does not match support length {}",
                    probs.len(),
                    support.len()
                ),
            ));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("support", "values must be finite"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("support", "values must be strictly increasing"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probs", "probabilities must be finite and >= 0"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(
                "probs",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(DiscreteDistribution { support, probs })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x * p).sum()
    }
}

/// Uniform distribution on `grid_points` evenly spaced values over `[0, 5]`.
pub fn uniform_on_grid(grid_points: usize) -> Result<DiscreteDistribution> {
    uniform_on_range(grid_points, IncomeRange::default())
}

pub fn uniform_on_range(grid_points: usize, range: IncomeRange) -> Result<DiscreteDistribution> {
    if grid_points == 0 {
        return Err(Error::invalid("grid_points", "must be at least 1"));
    }
    let p = 1.0 / grid_points as f64;
    DiscreteDistribution::new(range.grid(grid_points), vec![p; grid_points])
}

/// Beta-binomial with `n = grid_points - 1` trials, outcome `k` mapped
/// linearly onto `[0, 5]`.
pub fn beta_binomial_on_grid(grid_points: usize, a: f64, b: f64) -> Result<DiscreteDistribution> {
    beta_binomial_on_range(grid_points, a, b, IncomeRange::default())
}

pub fn beta_binomial_on_range(
    grid_points: usize,
    a: f64,
    b: f64,
    range: IncomeRange,
) -> Result<DiscreteDistribution> {
    if grid_points == 0 {
        return Err(Error::invalid("grid_points", "must be at least 1"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", format!("shape must be positive, got {a}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid("b", format!("shape must be positive, got {b}")));
    }
    let n = grid_points - 1;
    let mut probs: Vec<f64> = (0..=n)
        .map(|k| beta_binomial_ln_pmf(n, k, a, b).exp())
        .collect();
    // Rounding in ln Γ grows with n; renormalize so the sum stays within tolerance.
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    DiscreteDistribution::new(range.grid(grid_points), probs)
}

/// `ln [C(n,k) B(k+a, n-k+b) / B(a,b)]`.
pub fn beta_binomial_ln_pmf(n: usize, k: usize, a: f64, b: f64) -> f64 {
    debug_assert!(k <= n);
    let (nf, kf) = (n as f64, k as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    ln_choose + ln_beta(kf + a, nf - kf + b) - ln_beta(a, b)
}

/// Two-component mixture: weight `mass` on a point mass at zero and
/// `1 - mass` on `base`. Zero is inserted into the support if absent.
pub fn inflate_at_zero(base: &DiscreteDistribution, mass: f64) -> Result<DiscreteDistribution> {
    if !(0.0..=1.0).contains(&mass) {
        return Err(Error::invalid(
            "zero_mass",
            format!("must lie in [0, 1], got {mass}"),
        ));
    }
    let keep = 1.0 - mass;
    let mut support = Vec::with_capacity(base.len() + 1);
    let mut probs = Vec::with_capacity(base.len() + 1);
    let mut zero_seen = false;
    for (x, p) in base.iter() {
        if !zero_seen && x > 0.0 {
            support.push(0.0);
            probs.push(mass);
            zero_seen = true;
        }
        if x == 0.0 {
            support.push(0.0);
            probs.push(mass + keep * p);
            zero_seen = true;
        } else {
            support.push(x);
            probs.push(keep * p);
        }
    }
    if !zero_seen {
        support.push(0.0);
        probs.push(mass);
    }
    DiscreteDistribution::new(support, probs)
}

/// Tagged distribution description as it appears in run-config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform,
    BetaBinomial { a: f64, b: f64 },
    ZeroInflatedBetaBinomial { a: f64, b: f64, zero_mass: f64 },
}

impl DistributionSpec {
    pub fn build(&self, grid_points: usize, range: IncomeRange) -> Result<DiscreteDistribution> {
        match *self {
            DistributionSpec::Uniform => uniform_on_range(grid_points, range),
            DistributionSpec::BetaBinomial { a, b } => {
                beta_binomial_on_range(grid_points, a, b, range)
            }
            DistributionSpec::ZeroInflatedBetaBinomial { a, b, zero_mass } => {
                let base = beta_binomial_on_range(grid_points, a, b, range)?;
                inflate_at_zero(&base, zero_mass)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_examples() {
        let d = uniform_on_grid(2).unwrap();
        assert_eq!(d.support(), &[0.0, 5.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);

        let d = uniform_on_grid(1).unwrap();
        assert_eq!(d.support(), &[0.0]);
        assert_eq!(d.probs(), &[1.0]);

        let d = uniform_on_grid(6).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(d.probs().iter().all(|&p| p == 1.0 / 6.0));
    }

    #[test]
    fn zero_grid_points_rejected() {
        assert!(matches!(
            uniform_on_grid(0),
            Err(Error::InvalidParameter { name: "grid_points", .. })
        ));
        assert!(beta_binomial_on_grid(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn beta_binomial_with_unit_shapes_is_uniform() {
        let d = beta_binomial_on_grid(2, 1.0, 1.0).unwrap();
        assert!(close(d.probs()[0], 0.5, 1e-14) && close(d.probs()[1], 0.5, 1e-14));
        let d = beta_binomial_on_grid(3, 1.0, 1.0).unwrap();
        for p in d.probs() {
            assert!(close(*p, 1.0 / 3.0, 1e-14));
        }
    }

    #[test]
    fn beta_binomial_matches_exact_rationals() {
        // Exact values of BetaBinom(n=10, a=10, b=10) from factorial ratios:
        // pmf(0) = 323/70035, pmf(5) = 2002/10005.
        let d = beta_binomial_on_grid(11, 10.0, 10.0).unwrap();
        assert!(close(d.probs()[0], 323.0 / 70035.0, 1e-12));
        assert!(close(d.probs()[5], 2002.0 / 10005.0, 1e-12));
        assert!(close(d.probs()[10], 323.0 / 70035.0, 1e-12));
        assert_eq!(d.support()[5], 2.5);
        let mode = (0..11)
            .max_by(|&i, &j| d.probs()[i].total_cmp(&d.probs()[j]))
            .unwrap();
        assert_eq!(d.support()[mode], 2.5);
        for k in 0..=10 {
            assert!(close(d.probs()[k], d.probs()[10 - k], 1e-12));
        }
    }

    #[test]
    fn beta_binomial_rejects_bad_shapes() {
        assert!(matches!(
            beta_binomial_on_grid(5, 0.0, 1.0),
            Err(Error::InvalidParameter { name: "a", .. })
        ));
        assert!(matches!(
            beta_binomial_on_grid(5, 1.0, -2.0),
            Err(Error::InvalidParameter { name: "b", .. })
        ));
    }

    #[test]
    fn beta_binomial_large_n_is_finite() {
        let d = beta_binomial_on_grid(10_001, 10.0, 10.0).unwrap();
        assert!(d.probs().iter().all(|p| p.is_finite()));
        assert!(close(d.probs().iter().sum::<f64>(), 1.0, 1e-12));
        assert!(close(d.mean(), 2.5, 1e-9));
    }

    #[test]
    fn inflate_examples() {
        let d = inflate_at_zero(&DiscreteDistribution::point_mass(0.0).unwrap(), 0.6).unwrap();
        assert_eq!(d.support(), &[0.0]);
        assert!(close(d.probs()[0], 1.0, 1e-15));

        let d = inflate_at_zero(&uniform_on_grid(2).unwrap(), 0.6).unwrap();
        assert_eq!(d.support(), &[0.0, 5.0]);
        assert!(close(d.probs()[0], 0.8, 1e-15));
        assert!(close(d.probs()[1], 0.2, 1e-15));

        let d = inflate_at_zero(&beta_binomial_on_grid(11, 10.0, 10.0).unwrap(), 0.6).unwrap();
        assert!(close(d.probs()[0], 0.6 + 0.4 * 323.0 / 70035.0, 1e-12));
        assert!(close(d.probs().iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn inflate_inserts_missing_zero() {
        let base = DiscreteDistribution::new(vec![1.0, 2.0], vec![0.25, 0.75]).unwrap();
        let d = inflate_at_zero(&base, 0.5).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0, 2.0]);
        assert_eq!(d.probs(), &[0.5, 0.125, 0.375]);
    }

    #[test]
    fn inflate_rejects_bad_mass() {
        let base = uniform_on_grid(3).unwrap();
        assert!(inflate_at_zero(&base, -0.1).is_err());
        assert!(inflate_at_zero(&base, 1.5).is_err());
        assert!(inflate_at_zero(&base, f64::NAN).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(uniform_on_grid(2).unwrap().mean(), 2.5);
        assert_eq!(DiscreteDistribution::point_mass(3.0).unwrap().mean(), 3.0);
        let zi = inflate_at_zero(&beta_binomial_on_grid(11, 10.0, 10.0).unwrap(), 0.6).unwrap();
        // Direct summation over the exact-rational pmf would give 0.4 * 2.5.
        assert!(close(zi.mean(), 1.0, 1e-12));
    }

    #[test]
    fn new_validates() {
        assert!(DiscreteDistribution::new(vec![], vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn spec_tags_parse() {
        let spec: DistributionSpec =
            toml::from_str("kind = \"zero_inflated_beta_binomial\"\na = 10.0\nb = 10.0\nzero_mass = 0.6")
                .unwrap();
        assert_eq!(
            spec,
            DistributionSpec::ZeroInflatedBetaBinomial { a: 10.0, b: 10.0, zero_mass: 0.6 }
        );
        let spec: DistributionSpec = toml::from_str("kind = \"uniform\"").unwrap();
        assert_eq!(spec, DistributionSpec::Uniform);
    }

    proptest! {
        #[test]
        fn constructors_are_normalized(n in 1usize..300, a in 0.05f64..50.0, b in 0.05f64..50.0, m in 0.0f64..=1.0) {
            for d in [
                uniform_on_grid(n).unwrap(),
                beta_binomial_on_grid(n, a, b).unwrap(),
                inflate_at_zero(&beta_binomial_on_grid(n, a, b).unwrap(), m).unwrap(),
            ] {
                prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
                prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn symmetric_shapes_give_symmetric_pmf(n in 1usize..400, a in 0.05f64..50.0) {
            let d = beta_binomial_on_grid(n, a, a).unwrap();
            let p = d.probs();
            for k in 0..n {
                prop_assert!((p[k] - p[n - 1 - k]).abs() <= 1e-12);
            }
        }

        #[test]
        fn zero_inflation_scales_mean(n in 1usize..200, a in 0.1f64..30.0, b in 0.1f64..30.0, m in 0.0f64..=1.0) {
            let base = beta_binomial_on_grid(n, a, b).unwrap();
            let zi = inflate_at_zero(&base, m).unwrap();
            prop_assert!((zi.mean() - (1.0 - m) * base.mean()).abs() <= 1e-12);
            let same = inflate_at_zero(&base, 0.0).unwrap();
            prop_assert_eq!(same.support(), base.support());
            for (p, q) in same.probs().iter().zip(base.probs()) {
                prop_assert!((p - q).abs() <= 1e-15);
            }
        }

        #[test]
        fn uniform_mean_is_midpoint(n in 2usize..2000) {
            prop_assert!((uniform_on_grid(n).unwrap().mean() - 2.5).abs() <= 1e-12);
        }
    }
}
