//! Dense polynomials in `t` with exact rational coefficients.
//!
//! A [`RationalPoly`] keeps integer numerators over a single shared
//! denominator. Probability generating functions of the seating process have
//! coefficients whose denominators are large but highly structured, so a
//! common denominator turns every product into plain integer convolution.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Formats a rational as `"p/q"`, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    // invariants: den > 0, gcd(den, all num) == 1, no trailing zeros
    num: Vec<BigInt>,
    den: BigInt,
}

impl RationalPoly {
    pub fn zero() -> Self {
        RationalPoly {
            num: Vec::new(),
            den: BigInt::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut num = vec![BigInt::zero(); degree + 1];
        num[degree] = c.numer().clone();
        RationalPoly {
            num,
            den: c.denom().clone(),
        }
    }

    pub fn from_coeffs(coeffs: &[Rational]) -> Self {
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self::from_scaled(num, den)
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Self::from_scaled(coeffs.into_iter().map(BigInt::from).collect(), BigInt::one())
    }

    /// Builds `sum(num[i] t^i) / den` and normalizes.
    pub fn from_scaled(num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut p = RationalPoly { num, den };
        if p.den.is_negative() {
            p.den = -p.den;
            for c in p.num.iter_mut() {
                *c = -&*c;
            }
        }
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.num.last().is_some_and(Zero::is_zero) {
            self.num.pop();
        }
        if self.num.is_empty() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                return;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if !g.is_one() {
            for c in self.num.iter_mut() {
                if !c.is_zero() {
                    *c = &*c / &g;
                }
            }
            self.den = &self.den / &g;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.num.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.num.iter().position(|c| !c.is_zero())
    }

    /// Number of stored coefficients (`degree + 1`, or 0 for the zero polynomial).
    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        match self.num.get(i) {
            Some(c) => Rational::new(c.clone(), self.den.clone()),
            None => Rational::zero(),
        }
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.num.len()).map(|i| self.coeff(i)).collect()
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs().iter().map(rational_to_f64).collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_scaled(
            self.num.iter().map(|a| a * c.numer()).collect(),
            &self.den * c.denom(),
        )
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut num = vec![BigInt::zero(); k];
        num.extend(self.num.iter().cloned());
        RationalPoly {
            num,
            den: self.den.clone(),
        }
    }

    /// `p(-t)`.
    pub fn reflect(&self) -> Self {
        RationalPoly {
            num: self
                .num
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
            den: self.den.clone(),
        }
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, t: &Rational) -> Rational {
        let Some(d) = self.degree() else {
            return Rational::zero();
        };
        // sum a_i p^i q^(d-i) / (den q^d)
        let p = t.numer();
        let q = t.denom();
        let mut qpow = Vec::with_capacity(d + 1);
        qpow.push(BigInt::one());
        for j in 0..d {
            let next = &qpow[j] * q;
            qpow.push(next);
        }
        // homogenized Horner: coefficient i carries q^(d - i)
        let mut acc = BigInt::zero();
        for (i, c) in self.num.iter().enumerate().rev() {
            acc = acc * p + c * &qpow[d - i];
        }
        Rational::new(acc, &self.den * &qpow[d])
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let c = self.coeffs_f64();
        c.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        let c = self.coeffs_f64();
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc * t + a)
    }

    /// Value at `t = 1`.
    pub fn sum_coeffs(&self) -> Rational {
        let s: BigInt = self.num.iter().sum();
        Rational::new(s, self.den.clone())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs().iter().map(fmt_rational).collect()
    }
}

impl Default for RationalPoly {
    fn default() -> Self {
        Self::zero()
    }
}

fn aligned(a: &RationalPoly, b: &RationalPoly) -> (BigInt, BigInt, BigInt) {
    let l = a.den.lcm(&b.den);
    let fa = &l / &a.den;
    let fb = &l / &b.den;
    (l, fa, fb)
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let (l, fa, fb) = aligned(self, rhs);
        let n = self.num.len().max(rhs.num.len());
        let num = (0..n)
            .map(|i| {
                let x = self.num.get(i).map(|c| c * &fa).unwrap_or_default();
                let y = rhs.num.get(i).map(|c| c * &fb).unwrap_or_default();
                x + y
            })
            .collect();
        RationalPoly::from_scaled(num, l)
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        self + &(-rhs)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly {
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut num = vec![BigInt::zero(); self.num.len() + rhs.num.len() - 1];
        convolve_into(&mut num, &self.num, &rhs.num, None);
        RationalPoly::from_scaled(num, &self.den * &rhs.den)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `out[i + j] += scale * a[i] * b[j]`, skipping zero coefficients.
fn convolve_into(out: &mut [BigInt], a: &[BigInt], b: &[BigInt], scale: Option<&BigInt>) {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let long_nz: Vec<(usize, &BigInt)> = long
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    for (i, x) in short.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let x = match scale {
            Some(s) => x * s,
            None => x.clone(),
        };
        for &(j, y) in &long_nz {
            out[i + j] += &x * y;
        }
    }
}

/// Sums many polynomial products over a lazily grown common denominator.
///
/// Used by the recurrences, where each new polynomial is a sum of `O(n)`
/// products whose denominators mostly divide one another.
#[derive(Clone, Debug)]
pub struct PolyAccumulator {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Default for PolyAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl PolyAccumulator {
    pub fn new() -> Self {
        PolyAccumulator {
            num: Vec::new(),
            den: BigInt::one(),
        }
    }

    /// Makes the accumulator denominator a multiple of `d` and returns the
    /// factor that lifts a numerator over `d` to the shared denominator.
    fn align(&mut self, d: &BigInt) -> BigInt {
        let (q, r) = self.den.div_rem(d);
        if r.is_zero() {
            return q;
        }
        let l = self.den.lcm(d);
        let up = &l / &self.den;
        for c in self.num.iter_mut() {
            if !c.is_zero() {
                *c *= &up;
            }
        }
        self.den = l;
        &self.den / d
    }

    fn reserve(&mut self, len: usize) {
        if self.num.len() < len {
            self.num.resize(len, BigInt::zero());
        }
    }

    pub fn add_product(&mut self, a: &RationalPoly, b: &RationalPoly) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let d = &a.den * &b.den;
        let m = self.align(&d);
        self.reserve(a.num.len() + b.num.len() - 1);
        let scale = if m.is_one() { None } else { Some(&m) };
        convolve_into(&mut self.num, &a.num, &b.num, scale);
    }

    pub fn add_poly(&mut self, a: &RationalPoly) {
        if a.is_zero() {
            return;
        }
        let m = self.align(&a.den);
        self.reserve(a.num.len());
        for (i, c) in a.num.iter().enumerate() {
            if !c.is_zero() {
                self.num[i] += c * &m;
            }
        }
    }

    /// Adds `c * t^k * a`.
    pub fn add_scaled_shifted(&mut self, a: &RationalPoly, c: &Rational, k: usize) {
        if a.is_zero() || c.is_zero() {
            return;
        }
        let d = &a.den * c.denom();
        let m = self.align(&d) * c.numer();
        self.reserve(a.num.len() + k);
        for (i, x) in a.num.iter().enumerate() {
            if !x.is_zero() {
                self.num[i + k] += x * &m;
            }
        }
    }

    pub fn finish(self) -> RationalPoly {
        RationalPoly::from_scaled(self.num, self.den)
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalPoly({self})")
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} t")?,
                _ => write!(f, "{c} t^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        let coeffs = raw
            .iter()
            .map(|s| {
                parse_rational(s)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RationalPoly::from_coeffs(&coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn normalizes_common_factor() {
        let p = RationalPoly::from_scaled(vec![2.into(), 4.into(), 0.into()], 6.into());
        assert_eq!(p.coeffs(), vec![q(1, 3), q(2, 3)]);
        assert_eq!(p.denominator(), &BigInt::from(3));
        assert_eq!(p.degree(), Some(1));
    }

    #[test]
    fn product_and_eval() {
        let a = RationalPoly::from_coeffs(&[q(1, 2), q(1, 3)]);
        let b = RationalPoly::from_coeffs(&[q(0, 1), q(3, 4)]);
        let c = &a * &b;
        assert_eq!(c.coeffs(), vec![q(0, 1), q(3, 8), q(1, 4)]);
        let t = q(-2, 5);
        assert_eq!(c.eval(&t), a.eval(&t) * b.eval(&t));
        assert_eq!(c.sum_coeffs(), q(5, 8));
    }

    #[test]
    fn accumulator_matches_naive_sum() {
        let a = RationalPoly::from_coeffs(&[q(1, 2), q(1, 3)]);
        let b = RationalPoly::from_coeffs(&[q(1, 5), q(0, 1), q(2, 7)]);
        let mut acc = PolyAccumulator::new();
        acc.add_product(&a, &b);
        acc.add_product(&b, &b);
        acc.add_poly(&a);
        acc.add_scaled_shifted(&b, &q(-3, 11), 2);
        let naive = &(&(&a * &b) + &(&b * &b)) + &a;
        let naive = &naive + &b.scale(&q(-3, 11)).shift(2);
        assert_eq!(acc.finish(), naive);
    }

    #[test]
    fn reflect_and_shift() {
        let p = RationalPoly::from_integers([1, 2, 3]);
        assert_eq!(p.reflect().coeffs(), RationalPoly::from_integers([1, -2, 3]).coeffs());
        assert_eq!(p.shift(2).low_degree(), Some(2));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let p = RationalPoly::from_coeffs(&[q(0, 1), q(1, 3), q(2, 3)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["0/1","1/3","2/3"]"#);
        let back: RationalPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
