//! Social measurements over coin endowments and utilities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coins below this are clamped when a positive endowment is required.
pub const C_MIN: f64 = 1e-6;

/// Gini index `Σ_i Σ_j |C_i − C_j| / (2 N Σ C)`. An all-zero vector counts
/// as perfectly equal.
pub fn gini(c: &[f64]) -> f64 {
    let n = c.len() as f64;
    let total: f64 = c.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut diff = 0.0;
    for x in c {
        for y in c {
            diff += (x - y).abs();
        }
    }
    diff / (2.0 * n * total)
}

/// `1 − N/(N−1) · gini`, in `[0, 1]`. A lone agent is perfectly equal.
pub fn equality(c: &[f64]) -> f64 {
    if c.len() < 2 {
        return 1.0;
    }
    let n = c.len() as f64;
    (1.0 - n / (n - 1.0) * gini(c)).clamp(0.0, 1.0)
}

pub fn productivity(c: &[f64]) -> f64 {
    c.iter().sum()
}

pub fn maximin(c: &[f64]) -> f64 {
    c.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Inverse-income weights `ω_i ∝ 1/C_i`, normalised to sum to one.
pub fn inverse_income_weights(c: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = c.iter().map(|&x| 1.0 / x.max(C_MIN)).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|w| w / total).collect()
}

/// Utilitarian welfare `Σ ω_i u_i` with inverse-income weights.
pub fn swf_inverse_income(u: &[f64], c: &[f64]) -> f64 {
    inverse_income_weights(c).iter().zip(u).map(|(w, u)| w * u).sum()
}

/// Equality times productivity.
pub fn swf_eq_prod(c: &[f64]) -> f64 {
    equality(c) * productivity(c)
}

/// The planner's welfare objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    InverseIncome,
    EqTimesProd,
}

impl Objective {
    pub const ALL: [Objective; 2] = [Objective::InverseIncome, Objective::EqTimesProd];

    pub fn name(self) -> &'static str {
        match self {
            Objective::InverseIncome => "inverse_income",
            Objective::EqTimesProd => "eq_times_prod",
        }
    }

    pub fn swf(self, u: &[f64], c: &[f64]) -> f64 {
        match self {
            Objective::InverseIncome => swf_inverse_income(u, c),
            Objective::EqTimesProd => swf_eq_prod(c),
        }
    }
}

/// Which quantity the maximin metric takes the minimum of.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximinBasis {
    #[default]
    Coin,
    Utility,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub step: u64,
    pub eq: f64,
    pub gini: f64,
    pub prod: f64,
    pub maximin: f64,
    pub swf_inverse_income: f64,
    pub swf_eq_times_prod: f64,
}

impl MetricsSnapshot {
    pub fn compute(step: u64, coins: &[f64], utilities: &[f64], basis: MaximinBasis) -> Self {
        MetricsSnapshot {
            step,
            eq: equality(coins),
            gini: gini(coins),
            prod: productivity(coins),
            maximin: match basis {
                MaximinBasis::Coin => maximin(coins),
                MaximinBasis::Utility => maximin(utilities),
            },
            swf_inverse_income: swf_inverse_income(utilities, coins),
            swf_eq_times_prod: swf_eq_prod(coins),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum CorrelationError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooShort(usize),
    #[error("zero variance: correlation undefined")]
    ZeroVariance,
}

/// Pearson correlation coefficient.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(CorrelationError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let c = [1.0, 2.0, 3.0];
        assert!((gini(&c) - 8.0 / 36.0).abs() < 1e-12);
        assert!((equality(&c) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(productivity(&c), 6.0);
        assert_eq!(maximin(&c), 1.0);
        assert!((swf_eq_prod(&c) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn extremes() {
        assert_eq!(gini(&[5.0; 4]), 0.0);
        assert_eq!(equality(&[5.0; 4]), 1.0);
        assert_eq!(equality(&[5.0]), 1.0);
        assert_eq!(gini(&[0.0, 0.0, 0.0, 7.0]), 0.75);
        assert_eq!(equality(&[0.0, 0.0, 0.0, 7.0]), 0.0);
        assert_eq!(swf_eq_prod(&[0.0, 0.0, 0.0, 7.0]), 0.0);
        assert_eq!(swf_eq_prod(&[2.5; 4]), 10.0);
        assert_eq!(gini(&[0.0; 3]), 0.0);
        assert_eq!(productivity(&[0.0; 3]), 0.0);
        assert_eq!(maximin(&[4.0; 3]), 4.0);
    }

    #[test]
    fn inverse_income_examples() {
        let w = inverse_income_weights(&[1.0, 3.0]);
        assert_eq!(w, vec![0.75, 0.25]);
        assert_eq!(swf_inverse_income(&[2.0, 4.0], &[1.0, 3.0]), 2.5);
        assert_eq!(swf_inverse_income(&[1.0, 2.0, 6.0], &[4.0; 3]), 3.0);
    }

    #[test]
    fn correlation_cases() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let affine: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((correlate(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlate(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((correlate(&x, &affine).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(correlate(&x, &[3.0; 4]), Err(CorrelationError::ZeroVariance));
        assert_eq!(correlate(&x[..2], &x[..2]), Err(CorrelationError::TooShort(2)));
    }

    fn coins() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1000.0, 2..12).prop_filter("positive total", |c| c.iter().sum::<f64>() > 0.0)
    }

    proptest! {
        #[test]
        fn bounds_hold(c in coins()) {
            let n = c.len() as f64;
            let (g, e) = (gini(&c), equality(&c));
            prop_assert!(g >= 0.0 && g <= (n - 1.0) / n + 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
            prop_assert!(swf_eq_prod(&c) <= productivity(&c) + 1e-9);
            prop_assert!(maximin(&c) <= productivity(&c) / n + 1e-9);
        }

        #[test]
        fn gini_scale_invariant(c in coins(), k in 0.01f64..100.0) {
            let scaled: Vec<f64> = c.iter().map(|x| x * k).collect();
            prop_assert!((gini(&scaled) - gini(&c)).abs() < 1e-12);
        }

        #[test]
        fn inverse_weights_sum_to_one(c in prop::collection::vec(0.0f64..100.0, 1..10)) {
            let s: f64 = inverse_income_weights(&c).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn productivity_matches_fold(c in prop::collection::vec(0i64..100_000, 0..20)) {
            let as_f: Vec<f64> = c.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(productivity(&as_f), c.iter().sum::<i64>() as f64);
        }
    }
}
