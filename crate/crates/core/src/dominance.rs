//! First-order stochastic dominance between exact laws: the relation
//! ladder between the `A`, `B`, `X`, `Y` families, the sandwich of `X_n`
//! between `A`/`B` laws, and the small-grid counterexamples to monotonicity
//! under induced subgraphs.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::pgf::PgfEngine;
use crate::poly::{fmt_rational, Rational};
use crate::seat::{exact_distribution, ExactDistribution, FamilyTag, SeatGrid};
use FamilyTag::{A, B, X, Y};

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceVerdict {
    pub relation: String,
    pub n: usize,
    pub holds: bool,
    /// First `x` with `F_lhs(x) > F_rhs(x)`, or else the `x` of least slack.
    pub witness: i64,
    /// `F_rhs(witness) - F_lhs(witness)`; negative exactly when violated.
    #[serde(serialize_with = "ser_rational")]
    pub slack: Rational,
    /// Whether the relation is expected to hold. Probes are reported only.
    pub asserted: bool,
}

/// Whether `lhs + shift ≥ rhs` in distribution: `P(lhs + shift ≤ x) ≤
/// P(rhs ≤ x)` for every `x`. Ties are not violations.
pub fn sd_ge(lhs: &ExactDistribution, rhs: &ExactDistribution, shift: i64) -> DominanceVerdict {
    let points: BTreeSet<i64> = lhs
        .pmf()
        .keys()
        .map(|&k| k as i64 + shift)
        .chain(rhs.pmf().keys().map(|&k| k as i64))
        .collect();
    let mut best: Option<(i64, Rational)> = None;
    for &x in &points {
        let slack = rhs.cdf(x) - lhs.cdf(x - shift);
        if slack.is_negative() {
            best = Some((x, slack));
            break;
        }
        if best.as_ref().is_none_or(|(_, s)| slack < *s) {
            best = Some((x, slack));
        }
    }
    let (witness, slack) = best.unwrap_or((0, Rational::zero()));
    DominanceVerdict {
        relation: String::new(),
        n: 0,
        holds: !slack.is_negative(),
        witness,
        slack,
        asserted: true,
    }
}

/// `shift + lhs_family_{n+lhs_offset} ≥ rhs_family_{n+rhs_offset}`.
#[derive(Clone, Copy, Debug)]
struct Relation {
    label: &'static str,
    shift: i64,
    lhs: (FamilyTag, i64),
    rhs: (FamilyTag, i64),
    asserted: bool,
}

const fn rel(label: &'static str, shift: i64, lhs: (FamilyTag, i64), rhs: (FamilyTag, i64)) -> Relation {
    Relation {
        label,
        shift,
        lhs,
        rhs,
        asserted: true,
    }
}

const LADDER: [Relation; 17] = [
    rel("(0a) 1+B_n >= A_n", 1, (B, 0), (A, 0)),
    rel("(0b) 1+A_n >= B_n", 1, (A, 0), (B, 0)),
    rel("(1a) A_n >= A_{n-1}", 0, (A, 0), (A, -1)),
    rel("(1b) B_n >= B_{n-1}", 0, (B, 0), (B, -1)),
    rel("(1c) Y_n >= Y_{n-1}", 0, (Y, 0), (Y, -1)),
    rel("(2a) A_n >= Y_n", 0, (A, 0), (Y, 0)),
    rel("(2b) B_n >= Y_n", 0, (B, 0), (Y, 0)),
    rel("(2c) Y_n >= X_{n-1}", 0, (Y, 0), (X, -1)),
    rel("(3a) 1+B_{n-1} >= A_n", 1, (B, -1), (A, 0)),
    rel("(3b) 1+A_{n-1} >= B_n", 1, (A, -1), (B, 0)),
    rel("(3c) 1+Y_{n-1} >= Y_n", 1, (Y, -1), (Y, 0)),
    rel("(4a) 1+A_{n-1} >= Y_n", 1, (A, -1), (Y, 0)),
    rel("(4b) 1+B_{n-1} >= Y_n", 1, (B, -1), (Y, 0)),
    rel("(4c) 1+Y_n >= X_n", 1, (Y, 0), (X, 0)),
    rel("(5a) 1+Y_n >= A_{n-1}", 1, (Y, 0), (A, -1)),
    rel("(5b) 1+Y_n >= B_{n-1}", 1, (Y, 0), (B, -1)),
    rel("(5c) 1+X_n >= Y_n", 1, (X, 0), (Y, 0)),
];

const SANDWICH: [Relation; 4] = [
    rel("sandwich A_{n+1} >= X_n", 0, (A, 1), (X, 0)),
    rel("sandwich B_{n+1} >= X_n", 0, (B, 1), (X, 0)),
    rel("sandwich X_n >= A_{n-1}-2", 2, (X, 0), (A, -1)),
    rel("sandwich X_n >= B_{n-1}-2", 2, (X, 0), (B, -1)),
];

const COMPOSED: [Relation; 4] = [
    rel("composed A_n >= X_{n-1}", 0, (A, 0), (X, -1)),
    rel("composed B_n >= X_{n-1}", 0, (B, 0), (X, -1)),
    rel("composed 2+X_n >= A_{n-1}", 2, (X, 0), (A, -1)),
    rel("composed 2+X_n >= B_{n-1}", 2, (X, 0), (B, -1)),
];

const PROBES: [Relation; 2] = [
    Relation {
        asserted: false,
        ..rel("probe X_n >= A_{n-1}-1", 1, (X, 0), (A, -1))
    },
    Relation {
        asserted: false,
        ..rel("probe X_n >= B_{n-1}-1", 1, (X, 0), (B, -1))
    },
];

/// Exact laws of `A, B, X, Y` for indices `0..=n`.
struct Laws {
    by_family: Vec<(FamilyTag, Vec<ExactDistribution>)>,
}

impl Laws {
    fn new(n: usize) -> Self {
        let mut engine = PgfEngine::new();
        let by_family = [A, B, X, Y]
            .into_iter()
            .map(|tag| (tag, (0..=n).map(|k| engine.distribution(tag, k)).collect()))
            .collect();
        Laws { by_family }
    }

    fn get(&self, tag: FamilyTag, n: usize) -> &ExactDistribution {
        let (_, laws) = self.by_family.iter().find(|(t, _)| *t == tag).expect("family is tabulated");
        &laws[n]
    }
}

fn check(laws: &Laws, r: &Relation, n: usize) -> DominanceVerdict {
    let idx = |off: i64| (n as i64 + off) as usize;
    let mut v = sd_ge(laws.get(r.lhs.0, idx(r.lhs.1)), laws.get(r.rhs.0, idx(r.rhs.1)), r.shift);
    v.relation = r.label.to_string();
    v.n = n;
    v.asserted = r.asserted;
    v
}

/// Every ladder relation, the sandwich, the composed relations and the
/// `-1` probes for `1 ≤ n ≤ n_max`.
pub fn verify_ladder(n_max: usize) -> Vec<DominanceVerdict> {
    let laws = Laws::new(n_max + 1);
    let all: Vec<&Relation> = LADDER.iter().chain(&SANDWICH).chain(&COMPOSED).chain(&PROBES).collect();
    (1..=n_max)
        .into_par_iter()
        .flat_map_iter(|n| all.iter().map(move |r| (n, *r)).collect::<Vec<_>>())
        .map(|(n, r)| check(&laws, r, n))
        .collect()
}

/// Whether every asserted verdict holds.
pub fn all_hold(verdicts: &[DominanceVerdict]) -> bool {
    verdicts.iter().filter(|v| v.asserted).all(|v| v.holds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedLaw {
    pub name: String,
    pub grid: String,
    pub law: ExactDistribution,
    #[serde(serialize_with = "ser_rational")]
    pub mean: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub laws: Vec<NamedLaw>,
    /// `P(X_H1 ≥ 3)`.
    #[serde(serialize_with = "ser_rational")]
    pub h1_tail: Rational,
    /// `P(X_G1 ≥ 3)`.
    #[serde(serialize_with = "ser_rational")]
    pub g1_tail: Rational,
    pub verdicts: Vec<DominanceVerdict>,
}

pub const H1: &str = ".O\nOOO";
pub const G1: &str = "OO\nOOO";
pub const H2: &str = "O\n.O";
pub const G2: &str = "O\nOO";

fn named(name: &str, text: &str) -> NamedLaw {
    let grid = SeatGrid::parse(text).expect("fixed grid parses");
    let law = exact_distribution(&grid).expect("fixed grid is small");
    NamedLaw {
        name: name.to_string(),
        grid: text.to_string(),
        mean: law.mean(),
        law,
    }
}

/// `H_i` is an induced subgraph of `G_i`, yet neither `G1 ≥ H1` in
/// distribution nor `E[X_G2] ≥ E[X_H2]`.
pub fn counterexample_report() -> CounterexampleReport {
    let laws: Vec<NamedLaw> = [("H1", H1), ("G1", G1), ("H2", H2), ("G2", G2)]
        .into_iter()
        .map(|(n, t)| named(n, t))
        .collect();
    let verdict = |label: &str, l: usize, r: usize| {
        let mut v = sd_ge(&laws[l].law, &laws[r].law, 0);
        v.relation = label.to_string();
        v.asserted = false;
        v
    };
    let verdicts = vec![
        verdict("G1 >= H1", 1, 0),
        verdict("H1 >= G1", 0, 1),
        verdict("G2 >= H2", 3, 2),
        verdict("H2 >= G2", 2, 3),
    ];
    let tail = |d: &ExactDistribution| Rational::from_integer(1.into()) - d.cdf(2);
    CounterexampleReport {
        h1_tail: tail(&laws[0].law),
        g1_tail: tail(&laws[1].law),
        laws,
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn law(pairs: &[(usize, Rational)]) -> ExactDistribution {
        ExactDistribution::from_pmf(pairs.iter().cloned().collect::<BTreeMap<_, _>>())
    }

    #[test]
    fn point_masses() {
        let v = sd_ge(&ExactDistribution::point_mass(1), &ExactDistribution::point_mass(0), 0);
        assert!(v.holds);
        let v = sd_ge(&ExactDistribution::point_mass(0), &ExactDistribution::point_mass(1), 0);
        assert!(!v.holds && v.witness == 0 && v.slack == q(-1, 1));
        assert!(sd_ge(&ExactDistribution::point_mass(0), &ExactDistribution::point_mass(1), 1).holds);
    }

    #[test]
    fn small_grid_witnesses() {
        let r = counterexample_report();
        let g1_h1 = &r.verdicts[0];
        assert!(!g1_h1.holds);
        assert_eq!(g1_h1.witness, 2);
        assert_eq!(g1_h1.slack, q(1, 4) - q(7, 15));
        let h1_g1 = &r.verdicts[1];
        assert!(!h1_g1.holds && h1_g1.witness == 1);
        assert_eq!(r.h1_tail, q(3, 4));
        assert_eq!(r.g1_tail, q(8, 15));
        assert_eq!(r.laws[0].law, law(&[(1, q(1, 4)), (3, q(3, 4))]));
        assert_eq!(r.laws[1].law, law(&[(2, q(7, 15)), (3, q(8, 15))]));
        assert_eq!(r.laws[2].mean, q(2, 1));
        assert_eq!(r.laws[3].mean, q(5, 3));
    }

    #[test]
    fn ladder_holds() {
        let vs = verify_ladder(12);
        assert_eq!(vs.len(), 12 * 27);
        for v in vs.iter().filter(|v| v.asserted) {
            assert!(v.holds, "{v:?}");
        }
        let first = vs.iter().find(|v| v.n == 1 && v.relation.starts_with("(0a)")).unwrap();
        assert!(first.holds && first.slack.is_zero());
    }
}
