//! Exact probability generating functions from the first-seat recurrences,
//! and exact moments.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::poly::{fmt_rational, rational_to_f64, PolyAccumulator, Rational, RationalPoly};
use crate::seat::{ExactDistribution, FamilyTag};

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

/// `Σ mult·a·b` over the listed pairs, computed in parallel chunks.
fn sum_products(pairs: &[(&RationalPoly, &RationalPoly, bool)]) -> RationalPoly {
    let two = q(2, 1);
    pairs
        .par_iter()
        .fold(PolyAccumulator::new, |mut acc, (a, b, double)| {
            if *double {
                acc.add_product(&a.scale(&two), b);
            } else {
                acc.add_product(a, b);
            }
            acc
        })
        .map(PolyAccumulator::finish)
        .reduce(RationalPoly::zero, |x, y| &x + &y)
}

/// Pairs `(f(k), f(m-k))` for `k = lo..=m-lo`, folded by symmetry.
fn symmetric_pairs<'a>(
    f: impl Fn(i64) -> &'a RationalPoly,
    lo: i64,
    m: i64,
) -> Vec<(&'a RationalPoly, &'a RationalPoly, bool)> {
    let mut out = Vec::new();
    let mut k = lo;
    while 2 * k <= m {
        out.push((f(k), f(m - k), 2 * k != m));
        k += 1;
    }
    out
}

/// Memoized PGFs of all five families.
///
/// The two-row families are built jointly, since each recurrence consumes
/// the others; every index below `n` is computed before `n`. Negative
/// indices stand for the empty grid and have PGF 1.
#[derive(Debug, Clone)]
pub struct PgfEngine {
    a: Vec<RationalPoly>,
    b: Vec<RationalPoly>,
    y: Vec<RationalPoly>,
    z: Vec<RationalPoly>,
    x: HashMap<usize, RationalPoly>,
    unit: RationalPoly,
}

impl Default for PgfEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl PgfEngine {
    pub fn new() -> Self {
        PgfEngine {
            a: vec![RationalPoly::one()],
            b: vec![RationalPoly::t()],
            y: vec![RationalPoly::one()],
            z: vec![RationalPoly::one()],
            x: HashMap::new(),
            unit: RationalPoly::one(),
        }
    }

    fn at<'a>(seq: &'a [RationalPoly], unit: &'a RationalPoly, k: i64) -> &'a RationalPoly {
        if k < 0 {
            unit
        } else {
            &seq[k as usize]
        }
    }

    fn extend_two_row(&mut self, n: usize) {
        while self.a.len() <= n {
            let m = self.a.len() as i64;
            let (a, b, y, unit) = (&self.a, &self.b, &self.y, &self.unit);
            let fa = |k: i64| Self::at(a, unit, k);
            let fb = |k: i64| Self::at(b, unit, k);
            let fy = |k: i64| Self::at(y, unit, k);

            let pairs: Vec<_> = (1..=m).map(|k| (fa(k - 2), fb(m - k), false)).collect();
            let an = sum_products(&pairs).scale(&q(1, m)).shift(1);

            let mut pairs = symmetric_pairs(fb, 0, m - 2);
            pairs.extend(symmetric_pairs(fa, -1, m - 2));
            let bn = sum_products(&pairs).scale(&q(1, 2 * m)).shift(1);

            let mut pairs: Vec<_> = (0..=m - 2).map(|k| (fy(k), fb(m - 2 - k), false)).collect();
            pairs.extend((0..m).map(|k| (fy(k), fa(m - 2 - k), false)));
            let yn = sum_products(&pairs).scale(&q(1, 2 * m - 1)).shift(1);

            self.a.push(an);
            self.b.push(bn);
            self.y.push(yn);
        }
    }

    fn extend_one_row(&mut self, n: usize) {
        while self.z.len() <= n {
            let m = self.z.len() as i64;
            let (z, unit) = (&self.z, &self.unit);
            let fz = |k: i64| Self::at(z, unit, k);
            // k-2 + (m-k-1) = m-3 with both indices >= -1
            let pairs = symmetric_pairs(fz, -1, m - 3);
            let zn = sum_products(&pairs).scale(&q(1, m)).shift(1);
            self.z.push(zn);
        }
    }

    pub fn a(&mut self, n: usize) -> &RationalPoly {
        self.extend_two_row(n);
        &self.a[n]
    }

    pub fn b(&mut self, n: usize) -> &RationalPoly {
        self.extend_two_row(n);
        &self.b[n]
    }

    pub fn y(&mut self, n: usize) -> &RationalPoly {
        self.extend_two_row(n);
        &self.y[n]
    }

    pub fn z(&mut self, n: usize) -> &RationalPoly {
        self.extend_one_row(n);
        &self.z[n]
    }

    /// `X_n = (t/n) Σ_{0≤k<n} Y_k Y_{n-1-k}`, splitting at the first
    /// occupied column pair.
    pub fn x(&mut self, n: usize) -> RationalPoly {
        if n == 0 {
            return RationalPoly::one();
        }
        if let Some(p) = self.x.get(&n) {
            return p.clone();
        }
        self.extend_two_row(n - 1);
        let y = &self.y;
        let pairs = symmetric_pairs(|k| &y[k as usize], 0, n as i64 - 1);
        let p = sum_products(&pairs).scale(&q(1, n as i64)).shift(1);
        self.x.insert(n, p.clone());
        p
    }

    pub fn pgf(&mut self, tag: FamilyTag, n: usize) -> RationalPoly {
        match tag {
            FamilyTag::X => self.x(n),
            FamilyTag::Y => self.y(n).clone(),
            FamilyTag::A => self.a(n).clone(),
            FamilyTag::B => self.b(n).clone(),
            FamilyTag::Z => self.z(n).clone(),
        }
    }

    pub fn distribution(&mut self, tag: FamilyTag, n: usize) -> ExactDistribution {
        ExactDistribution::from_pgf(&self.pgf(tag, n))
    }

    pub fn moments(&mut self, tag: FamilyTag, n: usize) -> MomentReport {
        MomentReport::from_pgf(n, &self.pgf(tag, n))
    }
}

/// PGF of one family with a fresh engine.
pub fn pgf(tag: FamilyTag, n: usize) -> RationalPoly {
    PgfEngine::new().pgf(tag, n)
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

/// Exact mean, central moments and cumulants of a law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub mean: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub variance: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub m3: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub m4: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub kappa3: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub kappa4: Rational,
}

impl MomentReport {
    pub fn from_pgf(n: usize, p: &RationalPoly) -> Self {
        // raw power sums over the shared denominator, then binomial shift
        let mut raw = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (k, c) in p.numerators().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let kk = BigInt::from(k);
            let mut w = c.clone();
            for r in raw.iter_mut() {
                *r += &w;
                w *= &kk;
            }
        }
        let den = p.denominator();
        let r: Vec<Rational> = raw
            .iter()
            .map(|s| Rational::new(s.clone(), den.clone()) / Rational::new(raw[0].clone(), den.clone()))
            .collect();
        let mean = r[1].clone();
        let m2 = &r[2] - &mean * &mean;
        let m3 = &r[3] - q(3, 1) * &mean * &r[2] + q(2, 1) * &mean * &mean * &mean;
        let mu2 = &mean * &mean;
        let m4 = &r[4] - q(4, 1) * &mean * &r[3] + q(6, 1) * &mu2 * &r[2] - q(3, 1) * &mu2 * &mu2;
        let kappa4 = &m4 - q(3, 1) * &m2 * &m2;
        MomentReport {
            n,
            mean,
            variance: m2,
            kappa3: m3.clone(),
            m3,
            m4,
            kappa4,
        }
    }

    pub fn mean_f64(&self) -> f64 {
        rational_to_f64(&self.mean)
    }

    pub fn variance_f64(&self) -> f64 {
        rational_to_f64(&self.variance)
    }
}

/// `E(Z_n) = Σ_{0≤k<n} (n-k)(-2)^k/(k+1)!`.
pub fn one_row_mean(n: usize) -> Rational {
    let mut sum = Rational::zero();
    let mut term = Rational::one(); // (-2)^k/(k+1)!
    for k in 0..n {
        sum += &term * Rational::from_integer(BigInt::from(n - k));
        term *= q(-2, k as i64 + 2);
    }
    sum
}

/// Page's closed form for `V(Z_n)`.
pub fn page_variance(n: usize) -> Rational {
    let mu = one_row_mean(n);
    let binom2 = |m: i64| q(m * (m - 1) / 2, 1);
    let mut v = binom2(n as i64 + 1) - &mu * &mu;
    let mut term = q(1, 2); // (-2)^k/(k+2)!
    for k in 0..n.saturating_sub(1) {
        let ki = k as i64;
        let poly = Rational::from_integer(BigInt::from(2).pow(k as u32) * BigInt::from(ki - 2))
            + q(ki * ki + 4 * ki + 6, 1);
        v -= &term * binom2(n as i64 - ki) * poly;
        term *= q(-2, ki + 3);
    }
    v
}
