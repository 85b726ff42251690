//! Fixed-point ball arithmetic on big integers.
//!
//! A [`Ball`] at precision `p` holds a midpoint `m` and radius `r` and
//! stands for every real in `[(m - r)/2^p, (m + r)/2^p]`. Every operation
//! widens the radius enough to keep the true result inside, so printed
//! digits can be certified.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::Rational;

/// Bits needed for `digits` decimal digits plus guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 64
}

/// Rounds `a / 2^k` to nearest.
fn shr_round(a: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return a.clone();
    }
    let half = BigInt::one() << (k - 1);
    let (q, _) = (a + &half).div_mod_floor(&(BigInt::one() << k));
    q
}

fn shr_ceil(a: &BigInt, k: u32) -> BigInt {
    debug_assert!(!a.is_negative());
    let d = BigInt::one() << k;
    (a + &d - 1u8) / d
}

#[derive(Clone, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

impl Ball {
    pub fn exact_int(v: i64, prec: u32) -> Self {
        Ball {
            mid: BigInt::from(v) << prec,
            rad: BigInt::zero(),
            prec,
        }
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Ball {
            mid: v << prec,
            rad: BigInt::zero(),
            prec,
        }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let num = r.numer() << prec;
        let (q, rem) = num.div_mod_floor(r.denom());
        Ball {
            mid: q,
            rad: if rem.is_zero() { BigInt::zero() } else { BigInt::one() },
            prec,
        }
    }

    pub fn from_ratio(p: i64, q: i64, prec: u32) -> Self {
        Self::from_rational(&Rational::new(p.into(), q.into()), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_f64(&self) -> f64 {
        ratio_f64(&self.mid, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid_f64()
    }

    pub fn radius_f64(&self) -> f64 {
        ratio_f64(&self.rad, self.prec)
    }

    /// Lower end `(m - r)/2^p` as an exact rational.
    pub fn lower(&self) -> Rational {
        Rational::new(&self.mid - &self.rad, BigInt::one() << self.prec)
    }

    pub fn upper(&self) -> Rational {
        Rational::new(&self.mid + &self.rad, BigInt::one() << self.prec)
    }

    pub fn midpoint(&self) -> Rational {
        Rational::new(self.mid.clone(), BigInt::one() << self.prec)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    /// Sign if the ball excludes zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.contains_zero() {
            None
        } else {
            Some(self.mid.sign().cmp(&Sign::NoSign))
        }
    }

    pub fn add_radius_units(&mut self, units: &BigInt) {
        self.rad += units;
    }

    /// Widens by `|e|` where `e` is given as a real in value units.
    pub fn add_error(&mut self, e: &Rational) {
        let units = (e.abs() * Rational::from_integer(BigInt::one() << self.prec)).ceil();
        self.rad += units.to_integer();
    }

    /// Changes precision, rounding outward.
    pub fn with_prec(&self, prec: u32) -> Ball {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = prec - self.prec;
                Ball {
                    mid: &self.mid << k,
                    rad: &self.rad << k,
                    prec,
                }
            }
            Ordering::Less => {
                let k = self.prec - prec;
                Ball {
                    mid: shr_round(&self.mid, k),
                    rad: shr_ceil(&self.rad, k) + 1u8,
                    prec,
                }
            }
        }
    }

    fn align(&self, other: &Ball) -> (Ball, Ball) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn add(&self, o: &Ball) -> Ball {
        let (a, b) = self.align(o);
        Ball {
            mid: a.mid + b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        let (a, b) = self.align(o);
        Ball {
            mid: a.mid - b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }

    pub fn neg(&self) -> Ball {
        Ball {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Ball {
        Ball {
            mid: self.mid.abs(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        let (a, b) = self.align(o);
        let p = a.prec;
        let mid = shr_round(&(&a.mid * &b.mid), p);
        let err = a.mid.abs() * &b.rad + b.mid.abs() * &a.rad + &a.rad * &b.rad;
        Ball {
            mid,
            rad: shr_ceil(&err, p) + 1u8,
            prec: p,
        }
    }

    pub fn mul_int(&self, k: i64) -> Ball {
        Ball {
            mid: &self.mid * k,
            rad: &self.rad * k.unsigned_abs(),
            prec: self.prec,
        }
    }

    pub fn mul_bigint(&self, k: &BigInt) -> Ball {
        Ball {
            mid: &self.mid * k,
            rad: &self.rad * k.abs(),
            prec: self.prec,
        }
    }

    pub fn div_int(&self, k: i64) -> Ball {
        assert!(k != 0, "division by zero");
        let (q, r) = self.mid.div_mod_floor(&BigInt::from(k));
        let kabs = BigInt::from(k.unsigned_abs());
        Ball {
            mid: q,
            rad: (&self.rad + &kabs - 1u8) / &kabs + if r.is_zero() { 0u8 } else { 1u8 },
            prec: self.prec,
        }
    }

    pub fn div(&self, o: &Ball) -> Result<Ball> {
        let (a, b) = self.align(o);
        let p = a.prec;
        let bl = b.mid.abs() - &b.rad;
        if !bl.is_positive() {
            return Err(Error::InvalidArgument("division by a ball containing zero".into()));
        }
        let (mid, _) = (&a.mid << p).div_mod_floor(&b.mid);
        // |a/b - am/bm| <= (ar·|bm| + |am|·br) / (|bm|·(|bm| - br))
        let num = (&a.rad * b.mid.abs() + a.mid.abs() * &b.rad) << p;
        let den = b.mid.abs() * &bl;
        Ok(Ball {
            mid,
            rad: (num + &den - 1u8) / den + 1u8,
            prec: p,
        })
    }

    pub fn square(&self) -> Ball {
        self.mul(self)
    }

    pub fn powi(&self, k: u32) -> Ball {
        let mut out = Ball::exact_int(1, self.prec);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn sqrt(&self) -> Result<Ball> {
        let p = self.prec;
        let lo = &self.mid - &self.rad;
        if !lo.is_positive() {
            if self.mid.is_zero() && self.rad.is_zero() {
                return Ok(self.clone());
            }
            return Err(Error::InvalidArgument("square root of a ball reaching zero".into()));
        }
        let mid = (&self.mid << p).sqrt();
        let s_lo = (&lo << p).sqrt().max(BigInt::one());
        let rad = ((&self.rad << p) + &s_lo * 2u8 - 1u8) / (&s_lo * 2u8) + 2u8;
        Ok(Ball { mid, rad, prec: p })
    }

    pub fn cbrt(&self) -> Result<Ball> {
        let p = self.prec;
        let lo = &self.mid - &self.rad;
        if !lo.is_positive() {
            return Err(Error::InvalidArgument("cube root needs a positive ball".into()));
        }
        let mid = (&self.mid << (2 * p)).cbrt();
        let c = (&lo << (2 * p)).cbrt().max(BigInt::one());
        let den = &c * &c * 3u8;
        let rad = ((&self.rad << (2 * p)) + &den - 1u8) / den + 2u8;
        Ok(Ball { mid, rad, prec: p })
    }

    /// `exp(x)`: halve the argument until it is tiny, sum the Taylor series
    /// with a factorial tail bound, then square back.
    pub fn exp(&self) -> Ball {
        let p = self.prec;
        let mag = self.mid_f64().abs() + self.radius_f64();
        let k = if mag < 1e-3 { 0 } else { (mag.log2() + 10.0).ceil().max(0.0) as u32 };
        let wp = p + k + 32;
        let x = self.with_prec(wp);
        let r = Ball {
            mid: shr_round(&x.mid, k),
            rad: shr_ceil(&x.rad, k) + 1u8,
            prec: wp,
        };
        let rmag = mag / 2f64.powi(k as i32) + 1e-300;
        let mut sum = Ball::exact_int(1, wp);
        let mut term = Ball::exact_int(1, wp);
        let mut j = 1i64;
        let target = -(wp as f64);
        let mut ln_term = 0.0f64;
        loop {
            term = term.mul(&r).div_int(j);
            sum = sum.add(&term);
            ln_term += (rmag / (j + 1) as f64).log2();
            j += 1;
            if ln_term < target - 2.0 {
                break;
            }
        }
        // tail after the last added term: bounded by twice the next term
        let tail_units = BigInt::from(4u8);
        sum.rad += tail_units;
        for _ in 0..k {
            sum = sum.square();
        }
        sum.with_prec(p)
    }

    /// `erf(x) = (2/√π) e^{-x²} Σ 2^n x^{2n+1}/(2n+1)!!`, a series of
    /// positive terms.
    pub fn erf(&self, pi: &Ball) -> Ball {
        let p = self.prec;
        let wp = p + 32;
        let x = self.with_prec(wp);
        let x2 = x.square();
        let two_x2 = x2.mul_int(2);
        let xmag = (self.mid_f64().abs() + self.radius_f64()).max(1e-300);
        let mut term = x.clone();
        let mut sum = x.clone();
        let mut n = 1i64;
        let mut ln_term = xmag.log2();
        loop {
            term = term.mul(&two_x2).div_int(2 * n + 1);
            sum = sum.add(&term);
            ln_term += (2.0 * xmag * xmag / (2 * n + 1) as f64).log2();
            let ratio = 2.0 * xmag * xmag / (2 * n + 3) as f64;
            n += 1;
            if ratio <= 0.5 && ln_term < -(wp as f64) - 2.0 {
                break;
            }
        }
        sum.rad += 4u8;
        let scale = x2.neg().exp().mul_int(2).div(&pi.with_prec(wp).sqrt().expect("pi > 0"));
        sum.mul(&scale.expect("sqrt(pi) > 0")).with_prec(p)
    }

    /// Decimal digits after the point, truncated toward zero, when every
    /// point of the ball truncates to the same string.
    pub fn to_decimal(&self, digits: usize) -> Option<String> {
        let a = truncate_decimal(&self.lower(), digits);
        let b = truncate_decimal(&self.upper(), digits);
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    /// Midpoint truncated to `digits`, without certification.
    pub fn mid_decimal(&self, digits: usize) -> String {
        truncate_decimal(&self.midpoint(), digits)
    }
}

fn ratio_f64(a: &BigInt, prec: u32) -> f64 {
    let bits = a.bits() as i64;
    let shift = (bits - 60).max(0) as u32;
    let top = (a >> shift).to_f64().unwrap_or(0.0);
    top * 2f64.powi(shift as i32 - prec as i32)
}

/// `x` truncated toward zero to `digits` decimals.
pub fn truncate_decimal(x: &Rational, digits: usize) -> String {
    let scaled = x.abs() * Rational::from_integer(BigInt::from(10).pow(digits as u32));
    let int = scaled.to_integer();
    let s = int.to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (whole, frac) = s.split_at(s.len() - digits);
    let sign = if x.is_negative() && !int.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ball({} ± {:e})", self.mid_decimal(20), self.radius_f64())
    }
}

/// `atan(1/x)·2^p` in fixed point via the alternating series.
fn atan_inv(x: u64, prec: u32) -> Ball {
    let wp = prec + 16;
    let x2 = BigInt::from(x) * x;
    let mut power = (BigInt::one() << wp) / x; // 2^wp / x^{2k+1}
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    let mut terms = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
        terms += 1;
    }
    // each division truncates by < 1 unit; the first omitted term is < 1 unit
    Ball {
        mid: sum,
        rad: BigInt::from(2 * terms + 2),
        prec: wp,
    }
    .with_prec(prec)
}

/// `π = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi(prec: u32) -> Ball {
    let wp = prec + 16;
    atan_inv(5, wp).mul_int(16).sub(&atan_inv(239, wp).mul_int(4)).with_prec(prec)
}

pub fn e(prec: u32) -> Ball {
    Ball::exact_int(1, prec).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI_50: &str = "3.14159265358979323846264338327950288419716939937510";
    const E_50: &str = "2.71828182845904523536028747135266249775724709369995";
    const ERF_HALF_SQRT2_40: &str = "0.6826894921370858971704650912640758449558";

    #[test]
    fn pi_and_e_digits() {
        let p = bits_for_digits(60);
        assert_eq!(pi(p).to_decimal(50).unwrap(), PI_50);
        assert_eq!(e(p).to_decimal(50).unwrap(), E_50);
        let p = bits_for_digits(1000);
        assert!(pi(p).to_decimal(990).unwrap().starts_with(PI_50));
    }

    #[test]
    fn erf_of_inverse_sqrt2() {
        let p = bits_for_digits(50);
        let x = Ball::exact_int(2, p).sqrt().unwrap();
        let x = Ball::exact_int(1, p).div(&x).unwrap();
        assert_eq!(x.erf(&pi(p)).to_decimal(40).unwrap(), ERF_HALF_SQRT2_40);
    }

    #[test]
    fn exp_of_negative_and_large() {
        let p = bits_for_digits(40);
        let e1 = e(p);
        let inv = Ball::exact_int(-1, p).exp();
        let one = e1.mul(&inv);
        assert!(one.contains(&Rational::from_integer(1.into())));
        let e10 = Ball::exact_int(10, p).exp();
        assert_eq!(e10.to_decimal(20).unwrap(), "22026.46579480671651695790");
    }

    #[test]
    fn roots() {
        let p = bits_for_digits(40);
        let s5 = Ball::exact_int(5, p).sqrt().unwrap();
        assert_eq!(s5.to_decimal(30).unwrap(), "2.236067977499789696409173668731");
        let c = Ball::exact_int(2, p).cbrt().unwrap();
        assert_eq!(c.to_decimal(30).unwrap(), "1.259921049894873164767210607278");
    }

    #[test]
    fn truncation_not_rounding() {
        let x = Rational::new(2.into(), 3.into());
        assert_eq!(truncate_decimal(&x, 3), "0.666");
        assert_eq!(truncate_decimal(&-x, 3), "-0.666");
        assert_eq!(truncate_decimal(&Rational::new(5.into(), 1.into()), 2), "5.00");
        assert_eq!(truncate_decimal(&Rational::new((-1).into(), 1000.into()), 2), "0.00");
    }

    #[test]
    fn ball_ops_contain_truth() {
        let p = 80;
        let third = Ball::from_ratio(1, 3, p);
        let seventh = Ball::from_ratio(1, 7, p);
        let prod = third.mul(&seventh);
        assert!(prod.contains(&Rational::new(1.into(), 21.into())));
        let quo = third.div(&seventh).unwrap();
        assert!(quo.contains(&Rational::new(7.into(), 3.into())));
        let diff = third.sub(&seventh).div_int(-3);
        assert!(diff.contains(&Rational::new((-4).into(), 63.into())));
        assert!(Ball::exact_int(0, p).div(&Ball::exact_int(0, p)).is_err());
    }

    #[test]
    fn uncertified_digits_refused() {
        let mut b = Ball::from_ratio(1, 3, 20);
        b.add_error(&Rational::new(1.into(), 1000.into()));
        assert!(b.to_decimal(2).is_some());
        assert!(b.to_decimal(5).is_none());
    }
}
