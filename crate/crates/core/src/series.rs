//! Truncated power series in `z` whose coefficients are polynomials in `t`,
//! the closed-form bivariate generating functions, and coefficient
//! asymptotics for the mean and second moment.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{fmt_rational, rational_to_f64, PolyAccumulator, Rational, RationalPoly};

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn int(a: i64) -> Rational {
    Rational::from_integer(a.into())
}

/// `∫_0^1 v^{-1/2}(1+v)^m dv = Σ_k C(m,k)·2/(2k+1)`.
fn half_integral(m: usize) -> Rational {
    let mut binom = BigInt::one();
    let mut sum = Rational::zero();
    for k in 0..=m {
        sum += Rational::new(&binom * 2, BigInt::from(2 * k + 1));
        binom = binom * BigInt::from(m - k) / BigInt::from(k + 1);
    }
    sum
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// A power series in `z` truncated after `z^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZSeries {
    terms: Vec<RationalPoly>,
}

impl ZSeries {
    pub fn zero(order: usize) -> Self {
        ZSeries {
            terms: vec![RationalPoly::zero(); order + 1],
        }
    }

    pub fn constant(c: RationalPoly, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.terms[0] = c;
        s
    }

    /// Pads with zeros or truncates to `order`.
    pub fn from_terms(mut terms: Vec<RationalPoly>, order: usize) -> Self {
        terms.resize(order + 1, RationalPoly::zero());
        ZSeries { terms }
    }

    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn term(&self, n: usize) -> &RationalPoly {
        &self.terms[n]
    }

    pub fn terms(&self) -> &[RationalPoly] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<RationalPoly> {
        self.terms
    }

    fn zip(&self, other: &Self, f: impl Fn(&RationalPoly, &RationalPoly) -> RationalPoly) -> Self {
        let order = self.order().min(other.order());
        ZSeries {
            terms: (0..=order).map(|n| f(&self.terms[n], &other.terms[n])).collect(),
        }
    }

    /// Multiplies every coefficient by a polynomial in `t`.
    pub fn scale_poly(&self, p: &RationalPoly) -> Self {
        ZSeries {
            terms: self.terms.iter().map(|c| c * p).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ZSeries {
            terms: self.terms.iter().map(|x| x.scale(c)).collect(),
        }
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul_series(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let terms = (0..=order)
            .into_par_iter()
            .map(|n| {
                let mut acc = PolyAccumulator::new();
                for k in 0..=n {
                    acc.add_product(&self.terms[k], &other.terms[n - k]);
                }
                acc.finish()
            })
            .collect();
        ZSeries { terms }
    }

    fn leading_inverse(&self) -> Result<Rational> {
        let c0 = &self.terms[0];
        match c0.degree() {
            Some(0) => Ok(c0.coeff(0).recip()),
            _ => Err(Error::NotInvertible),
        }
    }

    /// `self / other`; the constant term of `other` must be a nonzero
    /// constant. The inner sum puts `other`'s coefficients first so sparse
    /// denominators stay cheap.
    pub fn div_series(&self, other: &Self) -> Result<Self> {
        let inv = other.leading_inverse()?;
        let order = self.order().min(other.order());
        let mut out: Vec<RationalPoly> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = PolyAccumulator::new();
            acc.add_poly(&self.terms[n]);
            let minus = int(-1);
            let partial: Vec<RationalPoly> = (1..=n)
                .collect::<Vec<_>>()
                .par_chunks(16)
                .map(|ks| {
                    let mut a = PolyAccumulator::new();
                    for &k in ks {
                        a.add_product(&other.terms[k], &out[n - k]);
                    }
                    a.finish()
                })
                .collect();
            for p in &partial {
                acc.add_scaled_shifted(p, &minus, 0);
            }
            out.push(acc.finish().scale(&inv));
        }
        Ok(ZSeries { terms: out })
    }

    pub fn reciprocal(&self) -> Result<Self> {
        Self::constant(RationalPoly::one(), self.order()).div_series(self)
    }

    pub fn derivative(&self) -> Self {
        let order = self.order();
        let mut terms: Vec<RationalPoly> = (1..=order)
            .map(|n| self.terms[n].scale(&int(n as i64)))
            .collect();
        terms.push(RationalPoly::zero());
        ZSeries { terms }
    }

    /// `∫_0^z`: term `n` is `term_{n-1}/n`, with zero constant term. The
    /// top term is dropped to keep the order.
    pub fn antiderivative(&self) -> Self {
        let order = self.order();
        let mut terms = vec![RationalPoly::zero()];
        terms.extend((1..=order).map(|n| self.terms[n - 1].scale(&q(1, n as i64))));
        ZSeries { terms }
    }

    /// Multiplies by `z^k`, keeping the order.
    pub fn shift_z(&self, k: usize) -> Self {
        let order = self.order();
        let mut terms = vec![RationalPoly::zero(); k.min(order + 1)];
        terms.extend(self.terms.iter().take(order + 1 - terms.len()).cloned());
        ZSeries { terms }
    }

    /// Substitutes `t -> -t`.
    pub fn reflect(&self) -> Self {
        ZSeries {
            terms: self.terms.iter().map(RationalPoly::reflect).collect(),
        }
    }

    /// Substitutes a rational value for `t`.
    pub fn eval_t(&self, t: &Rational) -> Vec<Rational> {
        self.terms.iter().map(|p| p.eval(t)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(RationalPoly::is_zero)
    }

    /// One row per power of `z`; columns are the `t` coefficients.
    pub fn to_csv(&self) -> String {
        let width = self.terms.iter().map(RationalPoly::len).max().unwrap_or(0).max(1);
        let mut out = String::from("n");
        for i in 0..width {
            let _ = write!(out, ",t^{i}");
        }
        out.push('\n');
        for (n, p) in self.terms.iter().enumerate() {
            let _ = write!(out, "{n}");
            for i in 0..width {
                let _ = write!(out, ",{}", fmt_rational(&p.coeff(i)));
            }
            out.push('\n');
        }
        out
    }
}

impl Add for &ZSeries {
    type Output = ZSeries;
    fn add(self, o: &ZSeries) -> ZSeries {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &ZSeries {
    type Output = ZSeries;
    fn sub(self, o: &ZSeries) -> ZSeries {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul for &ZSeries {
    type Output = ZSeries;
    fn mul(self, o: &ZSeries) -> ZSeries {
        self.mul_series(o)
    }
}

impl Neg for &ZSeries {
    type Output = ZSeries;
    fn neg(self) -> ZSeries {
        ZSeries {
            terms: self.terms.iter().map(|p| -p).collect(),
        }
    }
}

/// `P/t` where `P(z,t) = (1+t)(1-tz) - (1-t)e^{-tz}`.
pub fn series_p_reduced(order: usize) -> ZSeries {
    let one_minus_t = RationalPoly::from_integers([1, -1]);
    let terms = (0..=order)
        .map(|n| match n {
            0 => RationalPoly::constant(int(2)),
            1 => RationalPoly::monomial(int(-2), 1),
            _ => {
                let sign = if n % 2 == 0 { -1 } else { 1 };
                let c = Rational::new(BigInt::from(sign), factorial(n));
                one_minus_t.scale(&c).shift(n - 1)
            }
        })
        .collect();
    ZSeries { terms }
}

/// `Q/t` where `Q(z,t) = (1+t) - (1-t)e^{-tz} - ((1-t)/2)·tz·e^{-tz/2}
/// ∫_0^1 v^{-1/2} e^{-tzv/2} dv`, expanded with exact half-integer moments.
pub fn series_q_reduced(order: usize) -> ZSeries {
    let one_minus_t = RationalPoly::from_integers([1, -1]);
    let terms = (0..=order)
        .map(|n| {
            if n == 0 {
                return RationalPoly::constant(int(2));
            }
            let sign = if n % 2 == 0 { -1 } else { 1 };
            let exp_part = Rational::new(BigInt::from(sign), factorial(n));
            // (-1/2)^{n-1} I_{n-1} / (n-1)!, halved and negated
            let m = n - 1;
            let msign = if m % 2 == 0 { -1 } else { 1 };
            let int_part = Rational::new(BigInt::from(msign), factorial(m) * BigInt::from(2).pow(m as u32 + 1))
                * half_integral(m);
            one_minus_t.scale(&(exp_part + int_part)).shift(n - 1)
        })
        .collect();
    ZSeries { terms }
}

pub fn series_p(order: usize) -> ZSeries {
    series_p_reduced(order).scale_poly(&RationalPoly::t())
}

pub fn series_q(order: usize) -> ZSeries {
    series_q_reduced(order).scale_poly(&RationalPoly::t())
}

/// `U = 2t(1+t)/P`.
pub fn series_u(order: usize) -> ZSeries {
    let num = ZSeries::constant(RationalPoly::from_integers([2, 2]), order);
    num.div_series(&series_p_reduced(order))
        .expect("P/t has constant term 2")
}

/// `V(z,t) = U(z,-t)`.
pub fn series_v(order: usize) -> ZSeries {
    series_u(order).reflect()
}

pub fn series_ga(order: usize) -> ZSeries {
    let u = series_u(order);
    (&u + &u.reflect()).scale(&q(1, 2))
}

pub fn series_gb(order: usize) -> ZSeries {
    let u = series_u(order);
    (&u - &u.reflect()).scale(&q(1, 2))
}

/// `G_Y = Q/P`, dividing out the common factor `t` first.
pub fn series_gy(order: usize) -> ZSeries {
    series_q_reduced(order)
        .div_series(&series_p_reduced(order))
        .expect("P/t has constant term 2")
}

/// `G_X = 1 + t∫_0^z G_Y(u)² du`.
pub fn series_gx(order: usize) -> ZSeries {
    let gy = series_gy(order);
    let sq = gy.mul_series(&gy);
    let mut gx = sq.antiderivative().scale_poly(&RationalPoly::t());
    gx.terms[0] = RationalPoly::one();
    gx
}

/// `X_n` from the `Y` laws: `(t/n) Σ_{0≤k<n} Y_k Y_{n-1-k}`. Needs
/// `y.len() >= n`.
pub fn x_from_y(y: &[RationalPoly], n: usize) -> RationalPoly {
    if n == 0 {
        return RationalPoly::one();
    }
    let two = int(2);
    let half = (n - 1) / 2;
    let sum = (0..=half)
        .into_par_iter()
        .map(|k| {
            let j = n - 1 - k;
            let mut a = PolyAccumulator::new();
            if k == j {
                a.add_product(&y[k], &y[j]);
            } else {
                a.add_product(&y[k].scale(&two), &y[j]);
            }
            a.finish()
        })
        .reduce(RationalPoly::zero, |a, b| &a + &b);
    sum.scale(&q(1, n as i64)).shift(1)
}

/// Law of `X_n` through the series route, `O(n³)` coefficient operations.
pub fn x_law(n: usize) -> RationalPoly {
    if n == 0 {
        return RationalPoly::one();
    }
    let y = series_gy(n - 1).into_terms();
    x_from_y(&y, n)
}

/// Upper bound `ε_k` on `|f_k|` for a coefficient sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DecayBound {
    /// `c·ratio^k` with `0 < ratio < 1`.
    Geometric { c: f64, ratio: f64 },
    /// `c·base^k/(k+shift)!`.
    Factorial { c: f64, base: f64, shift: usize },
}

impl DecayBound {
    fn ln_eps(&self, k: usize) -> f64 {
        match *self {
            DecayBound::Geometric { c, ratio } => c.ln() + k as f64 * ratio.ln(),
            DecayBound::Factorial { c, base, shift } => {
                c.ln() + k as f64 * base.ln() - ln_factorial(k + shift)
            }
        }
    }

    pub fn eps(&self, k: usize) -> f64 {
        self.ln_eps(k).exp()
    }

    /// Bound on `Σ_{k≥start} k^p ε_k`.
    pub fn weighted_tail(&self, start: usize, p: u32) -> f64 {
        let ln_term = |k: usize| p as f64 * (k.max(1) as f64).ln() + self.ln_eps(k);
        // term ratios decrease in k; move forward until the ratio is below 1/2
        let mut k = start;
        let mut head = 0.0;
        loop {
            let ratio = (ln_term(k + 1) - ln_term(k)).exp();
            if ratio <= 0.5 {
                return head + ln_term(k).exp() / (1.0 - ratio);
            }
            head += ln_term(k).exp();
            k += 1;
            if k > start + 100_000 {
                return f64::INFINITY;
            }
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Coefficient prefix of an entire function, optionally with a decay bound.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSeq {
    pub values: Vec<Rational>,
    pub decay: Option<DecayBound>,
}

impl RationalSeq {
    pub fn new(values: Vec<Rational>, decay: Option<DecayBound>) -> Self {
        RationalSeq { values, decay }
    }

    pub fn get(&self, n: usize) -> Rational {
        self.values.get(n).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn mul(&self, other: &RationalSeq) -> Vec<Rational> {
        let len = self.len().min(other.len());
        (0..len)
            .map(|n| (0..=n).fold(Rational::zero(), |acc, k| acc + &self.values[k] * &other.values[n - k]))
            .collect()
    }

    /// `f^{(j)}(1) = Σ_k k(k-1)…(k-j+1) f_k` over the first `terms`
    /// coefficients, with a bound on the omitted tail.
    pub fn derivative_at_one(&self, j: usize, terms: usize) -> Result<(Rational, f64)> {
        let decay = self.decay.ok_or(Error::MissingDecayBound)?;
        let terms = terms.min(self.len());
        let mut sum = Rational::zero();
        for k in j..terms {
            let falling: BigInt = ((k - j + 1)..=k).fold(BigInt::one(), |a, i| a * i);
            sum += Rational::from_integer(falling) * &self.values[k];
        }
        Ok((sum, decay.weighted_tail(terms, j as u32)))
    }
}

fn exp_neg_coeffs(len: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(len);
    let mut c = Rational::one();
    for k in 0..len {
        out.push(c.clone());
        c = -c / int(k as i64 + 1);
    }
    out
}

fn poly_seq(coeffs: &[i64], len: usize) -> RationalSeq {
    let mut v: Vec<Rational> = coeffs.iter().map(|&c| int(c)).collect();
    v.resize(len.max(coeffs.len()), Rational::zero());
    v.truncate(len);
    RationalSeq::new(v, None)
}

/// `f1(z) = 1 + z - (z²/2)∫_0^1 v^{-1/2}(1-v)e^{-(1+v)z/2} dv`, through
/// `z^order`. `|[z^n]f1| ≤ 4/n!`.
pub fn series_f1(order: usize) -> RationalSeq {
    let mut values = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let v = match n {
            0 | 1 => Rational::one(),
            _ => {
                let m = n - 2;
                // J_m = ∫ v^{-1/2}(1-v)(1+v)^m dv
                let jm = half_integral(m) - half_integral_shifted(m);
                let sign = if m % 2 == 0 { -1 } else { 1 };
                Rational::new(BigInt::from(sign), factorial(m) * BigInt::from(2).pow(m as u32 + 1)) * jm
            }
        };
        values.push(v);
    }
    RationalSeq::new(
        values,
        Some(DecayBound::Factorial {
            c: 4.0,
            base: 1.0,
            shift: 0,
        }),
    )
}

/// `∫_0^1 v^{1/2}(1+v)^m dv = Σ_k C(m,k)·2/(2k+3)`.
fn half_integral_shifted(m: usize) -> Rational {
    let mut binom = BigInt::one();
    let mut sum = Rational::zero();
    for k in 0..=m {
        sum += Rational::new(&binom * 2, BigInt::from(2 * k + 3));
        binom = binom * BigInt::from(m - k) / BigInt::from(k + 1);
    }
    sum
}

/// `f2 = f1²/2 - e^{-z}f1 + (z²-z+2)f1 + (1-z)(1+2z)e^{-z} - (1-z)²(3+2z)/2`.
/// `|[z^n]f2| ≤ 8·2^n/n!`.
pub fn series_f2(order: usize) -> RationalSeq {
    let len = order + 1;
    let f1 = series_f1(order);
    let e = RationalSeq::new(exp_neg_coeffs(len), None);
    let f1sq = f1.mul(&f1);
    let ef1 = e.mul(&f1);
    let pf1 = poly_seq(&[2, -1, 1], len).mul(&f1);
    // (1-z)(1+2z) = 1 + z - 2z²
    let pe = poly_seq(&[1, 1, -2], len).mul(&e);
    // (1-z)²(3+2z) = 3 - 4z - z² + 2z³
    let tail = poly_seq(&[3, -4, -1, 2], len);
    let values = (0..len)
        .map(|n| &f1sq[n] * q(1, 2) - &ef1[n] + &pf1[n] + &pe[n] - tail.get(n) * q(1, 2))
        .collect();
    RationalSeq::new(
        values,
        Some(DecayBound::Factorial {
            c: 8.0,
            base: 2.0,
            shift: 0,
        }),
    )
}

/// `[z^n]∫_0^z f(u)/(1-u)^m du = (1/n) Σ_{k<n} C(n-k+m-2, m-1) f_k`.
fn integrate_over_pole(f: &RationalSeq, m: usize, order: usize) -> RationalSeq {
    let mut values = vec![Rational::zero()];
    for n in 1..=order {
        let mut s = Rational::zero();
        for k in 0..n {
            s += Rational::from_integer(binomial(n - k + m - 2, m - 1)) * f.get(k);
        }
        values.push(s / int(n as i64));
    }
    RationalSeq::new(values, None)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |a, i| a * (n - i) / (i + 1))
}

/// Exact means `E(X_n)` as `M_X = ∫_0^z f1(u)/(1-u)³ du`.
pub fn series_mx(order: usize) -> RationalSeq {
    integrate_over_pole(&series_f1(order), 3, order)
}

/// Exact second moments `E(X_n²)` as `S_X = ∫_0^z f2(u)/(1-u)⁴ du`.
pub fn series_sx(order: usize) -> RationalSeq {
    integrate_over_pole(&series_f2(order), 4, order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailMode {
    /// `[z^n] f(z)/(1-z)^m`.
    Direct,
    /// `[z^n] ∫_0^z f(u)/(1-u)^m du`.
    Integrated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffTail {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    /// Bound on the coefficient remainder of the expansion.
    pub remainder_bound: f64,
    /// Bound on the truncation of the `f^{(j)}(1)` sums.
    pub truncation_bound: f64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

impl CoeffTail {
    pub fn error_bound(&self) -> f64 {
        self.remainder_bound + self.truncation_bound
    }

    pub fn value_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

/// Evaluates the polynomial-in-`n` main term of `[z^n] f(z)/(1-z)^m` (or of
/// its integrated form) from the values `f^{(j)}(1)`, each summed from the
/// coefficient sequence until the tail drops below `10^{-digits}`.
pub fn coeff_tail(f: &RationalSeq, m: usize, n: usize, mode: TailMode, digits: u32) -> Result<CoeffTail> {
    let decay = f.decay.ok_or(Error::MissingDecayBound)?;
    if m == 0 {
        return Err(Error::InvalidArgument("pole order m must be at least 1".into()));
    }
    if mode == TailMode::Integrated && n == 0 {
        return Err(Error::InvalidArgument("integrated mode needs n >= 1".into()));
    }
    let target = 10f64.powi(-(digits as i32));
    let mut terms = m;
    while terms < f.len() && decay.weighted_tail(terms, m as u32) > target {
        terms += 1;
    }
    let (top, base) = match mode {
        TailMode::Direct => (n + m - 1, n + m),
        TailMode::Integrated => (n + m - 2, n + m - 1),
    };
    let mut value = Rational::zero();
    let mut truncation = 0.0;
    let mut j_fact = BigInt::one();
    for j in 0..m {
        if j > 0 {
            j_fact *= j;
        }
        let (d, tail) = f.derivative_at_one(j, terms)?;
        let b = binomial(top - j, m - 1 - j);
        let w = Rational::new(b.clone(), j_fact.clone());
        let signed = if j % 2 == 0 { w } else { -w };
        value += &signed * d;
        truncation += b.to_f64().unwrap_or(f64::INFINITY) / j_fact.to_f64().unwrap_or(f64::INFINITY) * tail;
    }
    let mut remainder = decay.weighted_tail(base, m as u32 - 1);
    if mode == TailMode::Integrated {
        value /= int(n as i64);
        remainder /= n as f64;
        truncation /= n as f64;
    }
    Ok(CoeffTail {
        value,
        remainder_bound: remainder,
        truncation_bound: truncation,
    })
}

/// Taylor coefficients in `z` of the one-row bivariate generating function
/// at a real `t > 0`, in double precision.
pub fn one_row_series_f64(t: f64, order: usize) -> Vec<f64> {
    let s = t.sqrt();
    // e^{2sz} coefficients
    let mut e = vec![1.0; order + 1];
    for k in 1..=order {
        e[k] = e[k - 1] * 2.0 * s / k as f64;
    }
    let at = |v: &[f64], k: isize| if k < 0 { 0.0 } else { v[k as usize] };
    let num: Vec<f64> = (0..=order)
        .map(|k| s * ((1.0 + s) * e[k] + if k == 0 { 1.0 - s } else { 0.0 }))
        .collect();
    let den: Vec<f64> = (0..=order)
        .map(|k| {
            let ki = k as isize;
            let lhs = (1.0 + s) * (e[k] - s * at(&e, ki - 1));
            let rhs = (1.0 - s)
                * match k {
                    0 => 1.0,
                    1 => s,
                    _ => 0.0,
                };
            lhs - rhs
        })
        .collect();
    let mut out = vec![0.0; order + 1];
    for n in 0..=order {
        let mut acc = num[n];
        for k in 1..=n {
            acc -= den[k] * out[n - k];
        }
        out[n] = acc / den[0];
    }
    out
}

/// Whether every coefficient sign is consistent with a probability law.
pub fn is_nonnegative(p: &RationalPoly) -> bool {
    p.numerators().iter().all(|c| !c.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgf::PgfEngine;
    use crate::seat::FamilyTag;

    fn poly(c: &[(i64, i64)]) -> RationalPoly {
        RationalPoly::from_coeffs(&c.iter().map(|&(a, b)| q(a, b)).collect::<Vec<_>>())
    }

    #[test]
    fn leading_terms() {
        assert_eq!(series_u(4).term(0), &RationalPoly::from_integers([1, 1]));
        assert_eq!(series_gb(4).term(0), &RationalPoly::t());
        assert_eq!(series_gy(4).term(0), &RationalPoly::one());
        assert_eq!(series_gy(4).term(2), &poly(&[(0, 1), (1, 3), (2, 3)]));
        let gx = series_gx(4);
        assert_eq!(gx.term(0), &RationalPoly::one());
        assert_eq!(gx.term(1), &RationalPoly::t());
        assert_eq!(gx.term(3), &poly(&[(0, 1), (0, 1), (2, 9), (7, 9)]));
        assert!(series_q_reduced(3).term(1).is_zero());
    }

    #[test]
    fn families_match_recurrence() {
        let mut e = PgfEngine::new();
        let (ga, gb, gy, gx) = (series_ga(20), series_gb(20), series_gy(20), series_gx(20));
        for n in 0..=20 {
            assert_eq!(ga.term(n), e.a(n), "A {n}");
            assert_eq!(gb.term(n), e.b(n), "B {n}");
            assert_eq!(gy.term(n), e.y(n), "Y {n}");
            assert_eq!(gx.term(n), &e.pgf(FamilyTag::X, n), "X {n}");
        }
        assert_eq!(x_law(17), e.x(17));
    }

    #[test]
    fn bernoulli_and_riccati_residuals_vanish() {
        let n = 16;
        let t = ZSeries::constant(RationalPoly::t(), n);
        let z = ZSeries::constant(RationalPoly::one(), n).shift_z(1);
        let half = q(1, 2);
        let u = series_u(n);
        let v = series_v(n);
        let tz = &t * &z;
        let res_u = &(&u.derivative() - &(&t * &u)) - &(&tz.scale(&half) * &(&u * &u));
        let res_v = &(&v.derivative() + &(&t * &v)) + &(&tz.scale(&half) * &(&v * &v));
        // the derivative loses the top coefficient
        assert!(res_u.terms()[..n].iter().all(RationalPoly::is_zero));
        assert!(res_v.terms()[..n].iter().all(RationalPoly::is_zero));

        let (ga, gb, gy) = (series_ga(n), series_gb(n), series_gy(n));
        assert_eq!(&ga + &gb, u);
        assert_eq!(&ga - &gb, v);
        let one = ZSeries::constant(RationalPoly::one(), n);
        let zz = &z * &z;
        let coef = &(&one + &tz) + &(&(&t * &zz) * &(&ga + &gb));
        let res = &(&(&z * &gy.derivative()).scale(&q(2, 1)) - &(&coef * &gy)) + &one;
        assert!(res.terms()[..n].iter().all(RationalPoly::is_zero));
    }

    #[test]
    fn gy_at_minus_one() {
        let vals = series_gy(30).eval_t(&int(-1));
        for (n, v) in vals.iter().enumerate() {
            let want = Rational::new(factorial(n) * BigInt::from(-2).pow(n as u32), factorial(2 * n));
            assert_eq!(v, &want, "n={n}");
        }
    }

    #[test]
    fn f1_values() {
        let f1 = series_f1(40);
        assert_eq!(f1.get(0), int(1));
        assert_eq!(f1.get(1), int(1));
        assert_eq!(f1.get(2), q(-2, 3));
        let ratio = rational_to_f64(&(f1.get(40) * Rational::from_integer(factorial(40)) / int(-2)));
        assert!((ratio - (1.0 + 2.0 / 41.0)).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn f1_gamma_sum_form() {
        // Σ_j C(n-2,j)(-1)^j 2(j+1)!/(2j+3)!!
        let f1 = series_f1(25);
        for n in 2..=25 {
            let m = n - 2;
            let mut s = Rational::zero();
            let mut dfac = BigInt::from(3);
            for j in 0..=m {
                if j > 0 {
                    dfac *= 2 * j + 3;
                }
                let term = Rational::new(binomial(m, j) * 2 * factorial(j + 1), dfac.clone());
                s += if j % 2 == 0 { term } else { -term };
            }
            let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
            let want = s * Rational::new(sign.into(), factorial(m));
            assert_eq!(f1.get(n), want, "n={n}");
        }
    }

    #[test]
    fn decay_bounds_hold() {
        let f1 = series_f1(120);
        let f2 = series_f2(120);
        for n in 0..=120 {
            assert!(rational_to_f64(&f1.get(n)).abs() <= f1.decay.unwrap().eps(n), "f1 {n}");
            assert!(rational_to_f64(&f2.get(n)).abs() <= f2.decay.unwrap().eps(n), "f2 {n}");
        }
    }

    #[test]
    fn f2_ratio_bounded() {
        let f2 = series_f2(40);
        let r: Vec<f64> = (5..=40)
            .map(|n| rational_to_f64(&f2.get(n)).abs() * rational_to_f64(&Rational::from_integer(factorial(n))) / 2f64.powi(n as i32))
            .collect();
        assert!(r.iter().all(|x| *x < 8.0), "{r:?}");
    }

    #[test]
    fn moment_series_match_exact() {
        let mx = series_mx(20);
        let sx = series_sx(20);
        let mut e = PgfEngine::new();
        for n in 1..=20 {
            let m = e.moments(FamilyTag::X, n);
            assert_eq!(mx.get(n), m.mean, "mean {n}");
            assert_eq!(sx.get(n), &m.variance + &m.mean * &m.mean, "second {n}");
        }
    }

    #[test]
    fn coeff_tail_exponential() {
        let e = RationalSeq::new(
            exp_neg_coeffs(80),
            Some(DecayBound::Factorial {
                c: 1.0,
                base: 1.0,
                shift: 0,
            }),
        );
        for n in [3usize, 8, 15] {
            let r = coeff_tail(&e, 1, n, TailMode::Direct, 40).unwrap();
            let exact: Rational = exp_neg_coeffs(n + 1).into_iter().fold(Rational::zero(), |a, b| a + b);
            let err = rational_to_f64(&(exact - &r.value)).abs();
            let fact = rational_to_f64(&Rational::from_integer(factorial(n + 1)));
            assert!(err <= r.error_bound(), "n={n}");
            let slack = if n >= 15 { 1.1 } else { 1.5 };
            assert!(r.error_bound() <= slack / fact, "n={n}");
            assert!((r.value_f64() - (-1f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn coeff_tail_reproduces_mean() {
        let f1 = series_f1(120);
        let r = coeff_tail(&f1, 3, 30, TailMode::Integrated, 50).unwrap();
        let exact = series_mx(30).get(30);
        let err = rational_to_f64(&(exact - &r.value)).abs();
        assert!(err <= r.error_bound(), "{err} vs {}", r.error_bound());
    }

    #[test]
    fn coeff_tail_requires_decay() {
        let s = RationalSeq::new(vec![int(1)], None);
        assert_eq!(
            coeff_tail(&s, 1, 3, TailMode::Direct, 20).unwrap_err(),
            Error::MissingDecayBound
        );
    }

    #[test]
    fn one_row_series_matches_exact() {
        let mut e = PgfEngine::new();
        for t in [0.5, 2.0] {
            let c = one_row_series_f64(t, 20);
            for (n, v) in c.iter().enumerate() {
                let exact = e.z(n).eval_f64(t);
                assert!((v - exact).abs() < 1e-9 * exact.abs().max(1.0), "t={t} n={n}: {v} {exact}");
            }
        }
    }

    #[test]
    fn csv_dump() {
        let csv = series_gy(2).to_csv();
        assert_eq!(csv, "n,t^0,t^1,t^2\n0,1/1,0/1,0/1\n1,0/1,1/1,0/1\n2,0/1,1/3,2/3\n");
    }
}
