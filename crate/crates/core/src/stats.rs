//! Goodness-of-fit helpers for comparing simulations with exact laws.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::poly::rational_to_f64;
use crate::seat::ExactDistribution;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson chi-square test of observed counts against an exact law.
///
/// Consecutive outcomes are pooled until each bin expects at least five
/// observations; a short final bin is merged into its predecessor.
/// Observations outside the support of the law give an infinite statistic.
pub fn chi_square(observed: &BTreeMap<usize, u64>, law: &ExactDistribution) -> ChiSquareTest {
    let total: u64 = observed.values().sum();
    let n = total as f64;
    let outside = observed
        .iter()
        .any(|(k, c)| *c > 0 && law.prob(*k) == num_traits::Zero::zero());
    if outside {
        return ChiSquareTest {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
            bins: 0,
        };
    }

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for (k, p) in law.pmf() {
        cur.0 += rational_to_f64(p) * n;
        cur.1 += observed.get(k).copied().unwrap_or(0) as f64;
        if cur.0 >= 5.0 {
            bins.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if cur.0 > 0.0 || cur.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }

    let statistic: f64 = bins.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map(|d| d.sf(statistic))
            .unwrap_or(0.0)
    };
    ChiSquareTest {
        statistic,
        dof,
        p_value,
        bins: bins.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Rational;

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_4).abs() < 1e-12);
    }

    #[test]
    fn perfect_fit_has_zero_statistic() {
        let law = ExactDistribution::from_pmf(BTreeMap::from([
            (1, Rational::new(1.into(), 4.into())),
            (3, Rational::new(3.into(), 4.into())),
        ]));
        let obs = BTreeMap::from([(1, 250), (3, 750)]);
        let t = chi_square(&obs, &law);
        assert_eq!(t.dof, 1);
        assert!(t.statistic.abs() < 1e-12);
        assert!(t.passes(1e-3));
    }

    #[test]
    fn impossible_outcome_fails() {
        let law = ExactDistribution::point_mass(2);
        let obs = BTreeMap::from([(2, 10), (3, 1)]);
        assert!(!chi_square(&obs, &law).passes(1e-3));
    }

    #[test]
    fn gross_misfit_fails() {
        let law = ExactDistribution::from_pmf(BTreeMap::from([
            (0, Rational::new(1.into(), 2.into())),
            (1, Rational::new(1.into(), 2.into())),
        ]));
        let obs = BTreeMap::from([(0, 700), (1, 300)]);
        assert!(!chi_square(&obs, &law).passes(1e-3));
    }
}
