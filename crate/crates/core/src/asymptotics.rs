//! Closed-form constants at certified precision and the checks that tie
//! them to the exact laws: factorial errors of the mean and variance,
//! cumulant lines, CLT/LLT distances, the quasi-power approximation and
//! the one-row variance baseline.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pgf::{MomentReport, PgfEngine};
use crate::poly::RationalPoly;
use crate::precision::{bits_for_digits, e, pi, Ball};
use crate::seat::ExactDistribution;
use crate::series::x_law;
use crate::spectral::{self, CutPolicy};
use crate::stats::normal_cdf;

/// Above this size the laws of `X_n` come from the series route.
const SERIES_ROUTE_FROM: usize = 60;
const MAX_ESCALATION_DIGITS: u32 = 4000;

/// The constants as balls at one working precision.
#[derive(Clone, Debug)]
pub struct ConstantBalls {
    pub mu: Ball,
    pub sigma2: Ball,
    pub phi: Ball,
    pub c0: Ball,
    pub c1: Ball,
    pub c2: Ball,
    pub c3: Ball,
    pub c4: Ball,
    pub kappa3_slope: Ball,
    pub kappa4_slope: Ball,
    pub jamming_2row: Ball,
    pub jamming_1row: Ball,
    /// `e^{-4}`, the one-row variance slope.
    pub one_row_sigma2: Ball,
}

impl ConstantBalls {
    pub fn new(prec: u32) -> Self {
        let wp = prec + 64;
        let e1 = e(wp);
        let pi = pi(wp);
        let one = Ball::exact_int(1, wp);
        let inv_e = one.div(&e1).expect("e > 0");
        let inv_e2 = inv_e.square();
        let inv_e3 = inv_e2.mul(&inv_e);
        let inv_e4 = inv_e2.square();
        let e2 = e1.square();

        let half = Ball::from_ratio(1, 2, wp);
        let phi = half.sqrt().expect("1/2 > 0").erf(&pi);
        let pe = pi.mul(&e1);
        let s = pe.mul_int(2).sqrt().expect("2πe > 0"); // √(2πe)
        let s_phi = s.mul(&phi);
        let phi2 = phi.square();
        let phi3 = phi2.mul(&phi);
        let phi4 = phi2.square();

        let mu = one.sub(&inv_e.div_int(2));
        let sigma2 = inv_e2.mul_int(3).div_int(4);
        let c0 = pi
            .div(&e1.mul_int(2))
            .expect("e > 0")
            .sqrt()
            .expect("π/2e > 0")
            .mul(&phi)
            .sub(&one);
        let c1 = inv_e.div_int(2).mul(&s_phi.sub(&one));
        let c2 = inv_e2
            .div_int(4)
            .mul(&pe.mul(&phi2).neg().sub(&s_phi.mul_int(2)).add(&Ball::exact_int(5, wp)));
        let s3 = pe.mul_int(2).mul(&s); // (2πe)^{3/2}
        let c3 = inv_e3.div_int(16).mul(
            &s3.mul(&phi3)
                .add(&pe.mul_int(12).mul(&phi2))
                .sub(&s_phi.mul(&e2.mul_int(4).sub(&Ball::exact_int(15, wp))))
                .sub(&Ball::exact_int(64, wp))
                .add(&e2.mul_int(4)),
        );
        let c4 = inv_e4.div_int(16).mul(
            &pe.square()
                .mul(&phi4)
                .mul_int(-3)
                .sub(&s3.mul(&phi3).mul_int(6))
                .add(&pe.mul_int(2).mul(&e2.mul_int(4).sub(&Ball::exact_int(21, wp))).mul(&phi2))
                .add(&s_phi.mul_int(4).mul(&e2.mul_int(4).sub(&Ball::exact_int(11, wp))))
                .add(&Ball::exact_int(280, wp))
                .sub(&e2.mul_int(40)),
        );
        let kappa3_slope = inv_e3.div_int(8).mul(&e2.mul_int(2).sub(&Ball::exact_int(17, wp)));
        let kappa4_slope = inv_e4.div_int(8).mul(&e2.mul_int(-12).add(&Ball::exact_int(71, wp)));
        let jamming_2row = Ball::exact_int(2, wp).sub(&inv_e).div_int(4);
        let jamming_1row = one.sub(&inv_e2).div_int(2);

        let p = |b: Ball| b.with_prec(prec);
        ConstantBalls {
            mu: p(mu),
            sigma2: p(sigma2),
            phi: p(phi),
            c0: p(c0),
            c1: p(c1),
            c2: p(c2),
            c3: p(c3),
            c4: p(c4),
            kappa3_slope: p(kappa3_slope),
            kappa4_slope: p(kappa4_slope),
            jamming_2row: p(jamming_2row),
            jamming_1row: p(jamming_1row),
            one_row_sigma2: p(inv_e4),
        }
    }
}

/// Decimal strings truncated to `digits` places, every digit certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantSet {
    pub digits: u32,
    pub mu: String,
    pub sigma2: String,
    pub phi: String,
    pub c0: String,
    pub c1: String,
    pub c2: String,
    pub c3: String,
    pub c4: String,
    pub kappa3_slope: String,
    pub kappa4_slope: String,
    pub jamming_2row: String,
    pub jamming_1row: String,
}

/// Truncated decimals of `balls` with `digits` places, or `None` when a
/// ball straddles a truncation boundary.
fn certified(balls: &ConstantBalls, digits: u32) -> Option<ConstantSet> {
    let d = digits as usize;
    Some(ConstantSet {
        digits,
        mu: balls.mu.to_decimal(d)?,
        sigma2: balls.sigma2.to_decimal(d)?,
        phi: balls.phi.to_decimal(d)?,
        c0: balls.c0.to_decimal(d)?,
        c1: balls.c1.to_decimal(d)?,
        c2: balls.c2.to_decimal(d)?,
        c3: balls.c3.to_decimal(d)?,
        c4: balls.c4.to_decimal(d)?,
        kappa3_slope: balls.kappa3_slope.to_decimal(d)?,
        kappa4_slope: balls.kappa4_slope.to_decimal(d)?,
        jamming_2row: balls.jamming_2row.to_decimal(d)?,
        jamming_1row: balls.jamming_1row.to_decimal(d)?,
    })
}

pub fn constants(digits: u32) -> Result<ConstantSet> {
    if digits < 10 {
        return Err(Error::InvalidArgument("constants need at least 10 digits".into()));
    }
    let mut bits = bits_for_digits(digits);
    for _ in 0..8 {
        if let Some(set) = certified(&ConstantBalls::new(bits), digits) {
            return Ok(set);
        }
        bits *= 2;
    }
    Err(Error::PrecisionEscalation {
        n: 0,
        digits: bits as usize,
    })
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Exact law of `X_n`, by the recurrence for small `n` and the series
/// route beyond.
pub fn x_pgf(engine: &mut PgfEngine, n: usize) -> RationalPoly {
    if n < SERIES_ROUTE_FROM {
        engine.x(n)
    } else {
        x_law(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorialErrorRow {
    pub n: usize,
    /// `(E(X_n) - μn - c1)(n+3)!/2`.
    pub mean_error: f64,
    /// `(V(X_n) - σ²n - c2)(n+4)!/2^{n+5}`.
    pub variance_error: f64,
    /// `E(X_n) - μn - c1`, unscaled.
    pub mean_gap: f64,
    /// `V(X_n) - σ²n - c2`, unscaled.
    pub variance_gap: f64,
    /// Working precision used for this row.
    pub digits: u32,
}

/// A scaled error is resolved once its radius is below this fraction of
/// its magnitude, or below this absolute size.
const RESOLVED: f64 = 1e-6;

fn resolved(b: &Ball) -> bool {
    b.radius_f64() <= RESOLVED * b.mid_f64().abs().max(1.0)
}

fn factorial_row(m: &MomentReport, digits: u32) -> Result<FactorialErrorRow> {
    let n = m.n;
    let mut d = digits;
    loop {
        let prec = bits_for_digits(d);
        let c = ConstantBalls::new(prec);
        let nb = Ball::exact_int(n as i64, prec);
        let mean_gap = Ball::from_rational(&m.mean, prec).sub(&c.mu.mul(&nb)).sub(&c.c1);
        let var_gap = Ball::from_rational(&m.variance, prec).sub(&c.sigma2.mul(&nb)).sub(&c.c2);
        let mean_err = mean_gap.mul_bigint(&factorial(n + 3)).div_int(2);
        let two_pow = BigInt::one() << (n + 5);
        let var_err = var_gap
            .mul_bigint(&factorial(n + 4))
            .div(&Ball::from_bigint(&two_pow, prec))?;
        if resolved(&mean_err) && resolved(&var_err) {
            return Ok(FactorialErrorRow {
                n,
                mean_error: mean_err.to_f64(),
                variance_error: var_err.to_f64(),
                mean_gap: mean_gap.to_f64(),
                variance_gap: var_gap.to_f64(),
                digits: d,
            });
        }
        d *= 2;
        if d > MAX_ESCALATION_DIGITS {
            return Err(Error::PrecisionEscalation { n, digits: d as usize });
        }
    }
}

/// Scaled mean and variance errors for `1 ≤ n ≤ n_max`, raising the
/// working precision per row until the scaled values are resolved.
pub fn factorial_error_profile(n_max: usize, digits: u32) -> Result<Vec<FactorialErrorRow>> {
    if n_max > 100 {
        return Err(Error::InvalidArgument("factorial_error_profile needs n_max <= 100".into()));
    }
    let mut engine = PgfEngine::new();
    let moments: Vec<MomentReport> = (1..=n_max).map(|n| engine.moments(crate::FamilyTag::X, n)).collect();
    moments.par_iter().map(|m| factorial_row(m, digits.max(10))).collect()
}

pub fn factorial_error_csv(rows: &[FactorialErrorRow]) -> String {
    let mut s = String::from("n,mean_error,variance_error,digits\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{:e},{}", r.n, r.mean_error, r.variance_error, r.digits);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantCheck {
    pub n: usize,
    pub kappa3: f64,
    pub kappa4: f64,
    pub kappa3_deviation: f64,
    pub kappa4_deviation: f64,
}

pub fn cumulant_check_from(m: &MomentReport) -> CumulantCheck {
    let prec = bits_for_digits(40);
    let c = ConstantBalls::new(prec);
    let nb = Ball::exact_int(m.n as i64, prec);
    let k3 = Ball::from_rational(&m.kappa3, prec);
    let k4 = Ball::from_rational(&m.kappa4, prec);
    CumulantCheck {
        n: m.n,
        kappa3: k3.to_f64(),
        kappa4: k4.to_f64(),
        kappa3_deviation: k3.sub(&c.kappa3_slope.mul(&nb)).sub(&c.c3).to_f64(),
        kappa4_deviation: k4.sub(&c.kappa4_slope.mul(&nb)).sub(&c.c4).to_f64(),
    }
}

/// Exact `κ3, κ4` of `X_n` minus their asymptotic lines.
pub fn cumulant_check(n: usize) -> Result<CumulantCheck> {
    if n == 0 {
        return Err(Error::InvalidArgument("cumulant_check needs n >= 1".into()));
    }
    let p = x_pgf(&mut PgfEngine::new(), n);
    Ok(cumulant_check_from(&MomentReport::from_pgf(n, &p)))
}

fn mu_sigma() -> (f64, f64) {
    let e = std::f64::consts::E;
    (1.0 - 0.5 / e, 0.75f64.sqrt() / e)
}

/// `sup_x |P((X - μn)/(σ√n) ≤ x) - Φ(x)|` for a law of `X_n`. The sup of a
/// step function against a continuous one is reached at a jump, from one
/// side or the other.
pub fn kolmogorov_distance(law: &ExactDistribution, n: usize) -> f64 {
    let (mu, sigma) = mu_sigma();
    let scale = sigma * (n as f64).sqrt();
    let mut below = 0.0f64;
    let mut sup = 0.0f64;
    for (&k, p) in law.pmf() {
        let phi = normal_cdf((k as f64 - mu * n as f64) / scale);
        let above = below + crate::poly::rational_to_f64(p);
        sup = sup.max((phi - below).abs()).max((above - phi).abs());
        below = above;
    }
    sup
}

pub fn clt_report(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("clt_report needs n >= 1".into()));
    }
    let p = x_pgf(&mut PgfEngine::new(), n);
    Ok(kolmogorov_distance(&ExactDistribution::from_pgf(&p), n))
}

/// `P(X_n = ⌊μn + xσ√n⌋)·σ√(2πn)·e^{x²/2}` for a law of `X_n`.
pub fn llt_ratio(law: &ExactDistribution, n: usize, x: f64) -> Result<f64> {
    let nf = n as f64;
    if x.abs() > nf.powf(1.0 / 6.0) {
        return Err(Error::InvalidArgument(format!("llt needs |x| <= n^(1/6), got {x}")));
    }
    let (mu, sigma) = mu_sigma();
    let k = (mu * nf + x * sigma * nf.sqrt()).floor();
    if k < 0.0 {
        return Ok(0.0);
    }
    let p = crate::poly::rational_to_f64(&law.prob(k as usize));
    Ok(p * sigma * (2.0 * PI * nf).sqrt() * (x * x / 2.0).exp())
}

pub fn llt_report(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("llt_report needs n >= 1".into()));
    }
    let p = x_pgf(&mut PgfEngine::new(), n);
    llt_ratio(&ExactDistribution::from_pgf(&p), n, x)
}

/// `|log X_n(e^s) - (s + 2 log R_0(e^s) - (n+1) log ρ_0(e^s))|` for real `s`.
pub fn quasi_power_defect(p: &RationalPoly, n: usize, s: f64) -> Result<f64> {
    let t = Complex64::new(s.exp(), 0.0);
    let lhs = p.eval_f64(t.re).ln();
    let rhs = if s == 0.0 {
        0.0
    } else {
        let b = spectral::branches(t, 0..=0, CutPolicy::Reject)?;
        let b = b.first().ok_or_else(|| Error::InvalidArgument("no principal pole".into()))?;
        (s + 2.0 * b.residue.ln() - (n as f64 + 1.0) * b.rho.ln()).re
    };
    Ok((lhs - rhs).abs())
}

/// `|X_n(t) - t R_0² ρ_0^{-n-1}|`.
pub fn leading_term_defect(p: &RationalPoly, n: usize, t: Complex64) -> Result<f64> {
    Ok((p.eval_complex(t) - spectral::xnt_leading(n, t)?).norm())
}

/// `min_{k≠0, |k|≤k_max} |ρ_k(t)|`, which sets the decay of
/// [`leading_term_defect`].
pub fn subdominant_radius(t: Complex64, k_max: i64) -> Result<f64> {
    let bs = spectral::branches(t, -k_max..=k_max, CutPolicy::UpperSide)?;
    Ok(bs.iter().filter(|b| b.k != 0).map(|b| b.rho.norm()).fold(f64::INFINITY, f64::min))
}

/// Largest `|c|·2^{-52}`-scale rounding in evaluating `p` at `|t| ≤ r`.
pub fn eval_noise(p: &RationalPoly, r: f64) -> f64 {
    let mag: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| crate::poly::rational_to_f64(c).abs() * r.powi(k as i32))
        .sum();
    mag * (p.len() as f64 + 1.0) * f64::EPSILON
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneRowVarianceRow {
    pub n: usize,
    /// `V(Z_n) - e^{-4}(n+3)`.
    pub gap: f64,
    /// `gap·(n+2)!/4^n`.
    pub scaled: f64,
}

/// The gap between `V(Z_n)` and `e^{-4}(n+3)`, exact up to the ball for `e^{-4}`.
pub fn one_row_variance_profile(n_max: usize) -> Vec<OneRowVarianceRow> {
    let prec = bits_for_digits(60 + 2 * n_max as u32);
    let c = ConstantBalls::new(prec);
    let mut engine = PgfEngine::new();
    (1..=n_max)
        .map(|n| {
            let v = engine.moments(crate::FamilyTag::Z, n).variance;
            let gap = Ball::from_rational(&v, prec).sub(&c.one_row_sigma2.mul_int(n as i64 + 3));
            let scaled = gap
                .mul_bigint(&factorial(n + 2))
                .div(&Ball::from_bigint(&(BigInt::one() << (2 * n)), prec))
                .expect("4^n > 0");
            OneRowVarianceRow {
                n,
                gap: gap.to_f64(),
                scaled: scaled.to_f64(),
            }
        })
        .collect()
}
