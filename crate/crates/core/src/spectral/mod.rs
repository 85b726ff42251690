//! Poles and residues of `G_Y(z,t) = Q/P` through Lambert W, and the
//! branch-sum identities for `X_n(t)` and `Y_n(t)`.
//!
//! The zeros of `P(z,t) = (1+t)(1-tz) - (1-t)e^{-tz}` are
//! `ρ_k(t) = (1 + W_k(ζ))/t` with `ζ = -e^{-1}(1-t)/(1+t)`.

mod lambert;
pub mod quadrature;

use std::f64::consts::{E, PI};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lambert::{lambert_w, upper_side};

use crate::error::{Error, Result};
use crate::poly::Rational;

const QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutPolicy {
    /// Refuse `t` on the cut of the requested branch.
    #[default]
    Reject,
    /// Evaluate real `t` on a cut with `ζ` taken from the upper half plane.
    UpperSide,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_t(t: Complex64) -> Result<()> {
    if t.norm() == 0.0 {
        return Err(Error::InvalidArgument("t = 0 has no poles".into()));
    }
    if (t + 1.0).norm() < 1e-8 {
        return Err(Error::InvalidArgument(
            "the spectral route is undefined at t = -1; use the exact t = -1 formula".into(),
        ));
    }
    Ok(())
}

pub fn zeta(t: Complex64) -> Complex64 {
    upper_side(-(1.0 - t) / (1.0 + t) / E)
}

/// Whether `t` lies on the cut of `ρ_k`: `[-1, 0]` for `k = 0`,
/// `[-1, 1]` otherwise.
pub fn on_cut(k: i64, t: Complex64) -> bool {
    if t.im != 0.0 {
        return false;
    }
    let hi = if k == 0 { 0.0 } else { 1.0 };
    (-1.0..=hi).contains(&t.re)
}

/// `ρ_k(t)`, or `None` when the pole sits at infinity (`t = 1`, `k ≠ 0`).
pub fn rho(k: i64, t: Complex64, policy: CutPolicy) -> Result<Option<Complex64>> {
    check_t(t)?;
    if k != 0 && t == c(1.0, 0.0) {
        return Ok(None);
    }
    if policy == CutPolicy::Reject && on_cut(k, t) {
        return Err(Error::CutViolation {
            k,
            t: format!("{t}"),
        });
    }
    let w = lambert_w(k, zeta(t))?;
    Ok(Some((1.0 + w) / t))
}

/// `2∫_0^1 g(u) e^{-a(1+u²)} du`, i.e. `∫_0^1 v^{-1/2} g(√v) e^{-a(1+v)} dv`
/// after `v = u²`.
fn half_moment(a: Complex64, weight: impl Fn(f64) -> f64 + Sync) -> Result<Complex64> {
    let f = |u: f64| (-a * (1.0 + u * u)).exp() * weight(u);
    let scale = f(0.0).norm() + f(1.0).norm() + 1.0;
    Ok(quadrature::integrate(f, 0.0, 1.0, QUAD_TOL * scale)? * 2.0)
}

/// `J(z,t) = ∫_0^1 v^{-1/2} e^{-tz(1+v)/2} dv`.
pub fn j_integral(z: Complex64, t: Complex64) -> Result<Complex64> {
    half_moment(t * z / 2.0, |_| 1.0)
}

/// `∫_0^1 v^{-1/2}(1+v) e^{-tz(1+v)/2} dv`.
fn j1_integral(z: Complex64, t: Complex64) -> Result<Complex64> {
    half_moment(t * z / 2.0, |u| 1.0 + u * u)
}

pub fn eval_p(z: Complex64, t: Complex64) -> Complex64 {
    (1.0 + t) * (1.0 - t * z) - (1.0 - t) * (-t * z).exp()
}

pub fn eval_p_prime(z: Complex64, t: Complex64) -> Complex64 {
    -t * (1.0 + t) + t * (1.0 - t) * (-t * z).exp()
}

pub fn eval_p_second(z: Complex64, t: Complex64) -> Complex64 {
    -t * t * (1.0 - t) * (-t * z).exp()
}

pub fn eval_q(z: Complex64, t: Complex64) -> Result<Complex64> {
    let j = j_integral(z, t)?;
    Ok(1.0 + t - (1.0 - t) * (-t * z).exp() - (1.0 - t) / 2.0 * t * z * j)
}

pub fn eval_q_prime(z: Complex64, t: Complex64) -> Result<Complex64> {
    let j = j_integral(z, t)?;
    let j1 = j1_integral(z, t)?;
    Ok(t * (1.0 - t) * (-t * z).exp() - (1.0 - t) / 2.0 * (t * j - t * t * z / 2.0 * j1))
}

/// `|2P'Q' - QP'' - (t²(1-t)/2)·P·J|`, which vanishes identically.
pub fn pq_residual(z: Complex64, t: Complex64) -> Result<f64> {
    let lhs = 2.0 * eval_p_prime(z, t) * eval_q_prime(z, t)? - eval_q(z, t)? * eval_p_second(z, t);
    let rhs = t * t * (1.0 - t) / 2.0 * eval_p(z, t) * j_integral(z, t)?;
    Ok((lhs - rhs).norm())
}

/// `G_Y(z,t) = Q/P` from the closed form.
pub fn gy_closed_form(z: Complex64, t: Complex64) -> Result<Complex64> {
    Ok(eval_q(z, t)? / eval_p(z, t))
}

/// `R(ρ,t) = (1/t)(1 - ((1-t)/(2(1+t)))·J(ρ,t))`, equal to `-Q/P'` at a pole.
pub fn residue(rho: Complex64, t: Complex64) -> Result<Complex64> {
    let j = j_integral(rho, t)?;
    Ok((1.0 - (1.0 - t) / (2.0 * (1.0 + t)) * j) / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchData {
    pub k: i64,
    pub rho: Complex64,
    pub residue: Complex64,
    /// `|P(ρ_k, t)|`.
    pub defect: f64,
}

/// Poles and residues for `k` in `k_range`; poles at infinity are omitted.
pub fn branches(t: Complex64, k_range: RangeInclusive<i64>, policy: CutPolicy) -> Result<Vec<BranchData>> {
    check_t(t)?;
    let ks: Vec<i64> = k_range.collect();
    let rows: Vec<Option<BranchData>> = ks
        .par_iter()
        .map(|&k| -> Result<Option<BranchData>> {
            let Some(r) = rho(k, t, policy)? else {
                return Ok(None);
            };
            Ok(Some(BranchData {
                k,
                rho: r,
                residue: residue(r, t)?,
                defect: eval_p(r, t).norm(),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// A truncated branch sum with a heuristic estimate of the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralValue {
    pub value: Complex64,
    pub tail_estimate: f64,
    pub branches: usize,
}

/// Tail of `Σ_{|k|>K}` when terms decay like `|k|^{-(n-1)}`: roughly
/// `2·T_K·K/(n-2)` with `T_K` the larger edge term.
fn tail_estimate(edge_terms: &[f64], k_max: i64, n: usize) -> f64 {
    let t_k = edge_terms.iter().copied().fold(0.0, f64::max);
    2.0 * t_k * k_max.max(1) as f64 / (n as f64 - 2.0).max(1.0)
}

fn branch_sum(
    n: usize,
    t: Complex64,
    k_max: i64,
    term: impl Fn(&BranchData) -> Complex64,
) -> Result<SpectralValue> {
    if n == 0 {
        return Err(Error::InvalidArgument("the branch sums need n >= 1".into()));
    }
    let bs = branches(t, -k_max..=k_max, CutPolicy::UpperSide)?;
    let value = bs.iter().map(&term).sum();
    let edges: Vec<f64> = bs
        .iter()
        .filter(|b| b.k.abs() == k_max && k_max > 0)
        .map(|b| term(b).norm())
        .collect();
    Ok(SpectralValue {
        value,
        tail_estimate: tail_estimate(&edges, k_max, n),
        branches: bs.len(),
    })
}

/// `X_n(t) ≈ t Σ_{|k|≤K} R_k² ρ_k^{-n-1}`. Real `t` on a cut is evaluated
/// from the upper side.
pub fn xnt_spectral(n: usize, t: Complex64, k_max: i64) -> Result<SpectralValue> {
    branch_sum(n, t, k_max, |b| t * b.residue * b.residue * b.rho.powi(-(n as i32) - 1))
}

/// `Y_n(t) ≈ Σ_{|k|≤K} R_k ρ_k^{-n-1}`.
pub fn ynt_spectral(n: usize, t: Complex64, k_max: i64) -> Result<SpectralValue> {
    branch_sum(n, t, k_max, |b| b.residue * b.rho.powi(-(n as i32) - 1))
}

/// The dominant term `t R_0² ρ_0^{-n-1}`.
pub fn xnt_leading(n: usize, t: Complex64) -> Result<Complex64> {
    let b = branches(t, 0..=0, CutPolicy::Reject)?;
    let b = b.first().ok_or_else(|| Error::InvalidArgument("no principal pole".into()))?;
    Ok(t * b.residue * b.residue * b.rho.powi(-(n as i32) - 1))
}

/// `1 + Σ R_k (1/(ρ_k - z) - 1/ρ_k)` over the given branches.
pub fn gy_partial_fractions(z: Complex64, branches: &[BranchData]) -> Complex64 {
    branches
        .iter()
        .map(|b| b.residue * (1.0 / (b.rho - z) - 1.0 / b.rho))
        .sum::<Complex64>()
        + 1.0
}

/// `Σ_{ℓ≠j} R_ℓ/(ρ_ℓ(ρ_ℓ-ρ_j)) - (-1/ρ_j + R_j/ρ_j²)` for the branch with
/// index `j`.
pub fn sum_rule_defect(j: i64, branches: &[BranchData]) -> Option<Complex64> {
    let bj = branches.iter().find(|b| b.k == j)?;
    let sum: Complex64 = branches
        .iter()
        .filter(|b| b.k != j)
        .map(|b| b.residue / (b.rho * (b.rho - bj.rho)))
        .sum();
    Some(sum - (-1.0 / bj.rho + bj.residue / (bj.rho * bj.rho)))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// `X_n(-1) = -((-2)^{n-1}/n) Σ_{0≤k<n} k!(n-1-k)!/((2k)!(2n-2-2k)!)`.
pub fn xn_at_minus_one(n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut sum = Rational::new(0.into(), 1.into());
    for k in 0..n {
        sum += Rational::new(
            factorial(k) * factorial(n - 1 - k),
            factorial(2 * k) * factorial(2 * n - 2 - 2 * k),
        );
    }
    let lead = Rational::new(-BigInt::from(-2).pow(n as u32 - 1), BigInt::from(n));
    Ok(lead * sum)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln(n!4^n/(2n)!)`.
fn ln_central_ratio(n: usize) -> f64 {
    ln_factorial(n) + n as f64 * 4f64.ln() - ln_factorial(2 * n)
}

/// The printed approximation `2·n!(-4)^n/((2n)!√(πn))·(1 + 9/(8n))`.
///
/// This is off from the exact values by a factor that grows like `πn/4`;
/// see [`xn_minus_one_saddle_point`].
pub fn xn_minus_one_asymptotic(n: usize) -> f64 {
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (2f64.ln() + ln_central_ratio(n) - 0.5 * (PI * nf).ln()).exp() * (1.0 + 9.0 / (8.0 * nf))
}

/// `(√(πn)/2)·n!(-4)^n/(2n)!·(1 - 9/(8n))`, from the saddle point at
/// `v = 1/2` of `∫_0^1 (1 ± 2√(v(1-v)))^{n-1} dv`.
pub fn xn_minus_one_saddle_point(n: usize) -> f64 {
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (ln_central_ratio(n) + 0.5 * (PI * nf).ln() - 2f64.ln()).exp() * (1.0 - 9.0 / (8.0 * nf))
}

/// CSV table `k,rho_re,rho_im,r_re,r_im,defect`.
pub fn branches_csv(bs: &[BranchData]) -> String {
    let mut out = String::from("k,rho_re,rho_im,r_re,r_im,defect\n");
    for b in bs {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            b.k, b.rho.re, b.rho.im, b.residue.re, b.residue.im, b.defect
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgf::PgfEngine;
    use crate::poly::rational_to_f64;
    use crate::seat::FamilyTag;

    fn unit(theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, theta)
    }

    #[test]
    fn principal_pole_at_one() {
        let b = branches(c(1.0, 0.0), -3..=3, CutPolicy::Reject).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].rho - 1.0).norm() < 1e-15);
        assert!((b[0].residue - 1.0).norm() < 1e-15);
    }

    #[test]
    fn cut_policy() {
        assert!(matches!(
            rho(1, c(0.5, 0.0), CutPolicy::Reject),
            Err(Error::CutViolation { k: 1, .. })
        ));
        assert!(rho(0, c(0.5, 0.0), CutPolicy::Reject).is_ok());
        assert!(matches!(
            rho(0, c(-0.5, 0.0), CutPolicy::Reject),
            Err(Error::CutViolation { k: 0, .. })
        ));
        assert!(rho(1, c(0.5, 0.0), CutPolicy::UpperSide).is_ok());
        assert!(branches(c(-1.0, 0.0), 0..=0, CutPolicy::UpperSide).is_err());
    }

    #[test]
    fn pole_defects_small() {
        let ts = [unit(PI / 3.0), unit(PI / 2.0), unit(2.0), c(0.3, 0.0), c(0.9, 0.0)];
        for t in ts {
            for b in branches(t, -20..=20, CutPolicy::UpperSide).unwrap() {
                assert!(b.defect < 1e-10, "t={t} k={} defect={}", b.k, b.defect);
            }
        }
    }

    #[test]
    fn residue_matches_quotient() {
        let t = unit(PI / 3.0);
        for b in branches(t, -5..=5, CutPolicy::Reject).unwrap() {
            let r = -eval_q(b.rho, t).unwrap() / eval_p_prime(b.rho, t);
            assert!((r - b.residue).norm() < 1e-9 * b.residue.norm().max(1.0), "k={}", b.k);
        }
    }

    #[test]
    fn x_identity_small_cases() {
        let mut e = PgfEngine::new();
        for (n, t) in [(20, unit(PI / 3.0)), (10, c(0.5, 0.0))] {
            let exact = e.x(n).eval_complex(t);
            let s = xnt_spectral(n, t, 50).unwrap();
            assert!((s.value - exact).norm() < 1e-8, "n={n}: {} vs {exact}", s.value);
        }
        let one = xnt_spectral(20, c(1.0, 0.0), 0).unwrap();
        assert!((one.value - 1.0).norm() < 1e-14);
    }

    #[test]
    fn y_identity() {
        let mut e = PgfEngine::new();
        let t = unit(PI / 4.0);
        for n in [5usize, 12, 20] {
            let exact = e.y(n).eval_complex(t);
            let s = ynt_spectral(n, t, 60).unwrap();
            assert!((s.value - exact).norm() < 1e-8 + 10.0 * s.tail_estimate, "n={n}");
        }
    }

    #[test]
    fn conjugate_closure_on_real_t() {
        // for real t the pole set is closed under conjugation; on the cut the
        // labels are not symmetric, so compare sets away from the edges
        for t in [c(0.5, 0.0), c(2.0, 0.0)] {
            let bs = branches(t, -12..=12, CutPolicy::UpperSide).unwrap();
            for b in bs.iter().filter(|b| b.k.abs() <= 10) {
                let found = bs.iter().any(|o| (o.rho - b.rho.conj()).norm() < 1e-9);
                assert!(found, "t={t} k={}", b.k);
            }
        }
        // off the real axis ρ_{-k}(conj t) = conj ρ_k(t)
        let t = unit(1.0);
        let a = branches(t, -5..=5, CutPolicy::Reject).unwrap();
        let b = branches(t.conj(), -5..=5, CutPolicy::Reject).unwrap();
        for x in &a {
            let y = b.iter().find(|y| y.k == -x.k).unwrap();
            assert!((x.rho.conj() - y.rho).norm() < 1e-10);
        }
    }

    #[test]
    fn pq_identity_samples() {
        let zs = [c(0.3, 0.1), c(-1.0, 2.0), c(2.5, -0.7)];
        let ts = [unit(0.4), c(0.7, 0.0), c(1.5, -0.3)];
        for z in zs {
            for t in ts {
                assert!(pq_residual(z, t).unwrap() < 1e-9, "z={z} t={t}");
            }
        }
    }

    #[test]
    fn partial_fractions_converge() {
        let t = unit(PI / 3.0);
        let z = c(0.2, 0.1);
        let want = gy_closed_form(z, t).unwrap();
        let err = |k: i64| {
            let bs = branches(t, -k..=k, CutPolicy::Reject).unwrap();
            (gy_partial_fractions(z, &bs) - want).norm()
        };
        let (e5, e40) = (err(5), err(40));
        assert!(e40 < e5 && e40 < 1e-3, "{e5} {e40}");
    }

    #[test]
    fn sum_rule_converges() {
        let t = unit(PI / 3.0);
        let d = |k: i64| {
            let bs = branches(t, -k..=k, CutPolicy::Reject).unwrap();
            sum_rule_defect(0, &bs).unwrap().norm()
        };
        assert!(d(60) < d(10));
        assert!(d(60) < 1e-2);
    }

    #[test]
    fn minus_one_values() {
        assert_eq!(xn_at_minus_one(1).unwrap(), Rational::new((-1).into(), 1.into()));
        assert_eq!(xn_at_minus_one(3).unwrap(), Rational::new((-5).into(), 9.into()));
        let mut e = PgfEngine::new();
        let m1 = Rational::new((-1).into(), 1.into());
        for n in 1..=12 {
            assert_eq!(xn_at_minus_one(n).unwrap(), e.pgf(FamilyTag::X, n).eval(&m1));
        }
        let exact = rational_to_f64(&xn_at_minus_one(30).unwrap());
        let ratio = exact / xn_minus_one_saddle_point(30);
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
        let printed = exact / xn_minus_one_asymptotic(30);
        assert!((printed / (PI * 30.0 / 4.0) - 1.0).abs() < 0.1, "{printed}");
    }
}
