//! Branches of the Lambert W function, `W e^W = z`.
//!
//! Each branch is polished by Halley iteration from a seed chosen by
//! region, and the result is checked to lie on the requested branch.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;

/// Rounds `-0.0` imaginary parts up so the principal logarithm of a
/// negative real is `ln|z| + iπ` (the upper side of the cut).
pub fn upper_side(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

fn is_real_in_neg_branch_segment(z: Complex64) -> bool {
    z.im == 0.0 && z.re >= -1.0 / E && z.re < 0.0
}

fn seed(k: i64, z: Complex64) -> Complex64 {
    let branch_gap = z * E + 1.0;
    if k == -1 && is_real_in_neg_branch_segment(z) {
        if branch_gap.re < 0.25 {
            let p = (2.0 * branch_gap.re).sqrt();
            return Complex64::new(-1.0 - p - p * p / 3.0 - 11.0 * p * p * p / 72.0, 0.0);
        }
        let l1 = (-z.re).ln();
        return Complex64::new(l1 - (-l1).ln(), 0.0);
    }
    if k == 0 && z.norm() < 0.3 {
        // W(z) = Σ (-k)^{k-1} z^k / k!
        return z - z * z + z.powi(3) * 1.5 - z.powi(4) * (8.0 / 3.0) + z.powi(5) * (125.0 / 24.0);
    }
    let near_branch_point = branch_gap.norm() < 0.3;
    if near_branch_point && (k == 0 || (k == -1 && z.im >= 0.0) || (k == 1 && z.im < 0.0)) {
        let mut p = (branch_gap * 2.0).sqrt();
        if k != 0 {
            p = -p;
        }
        return -1.0 + p - p * p / 3.0 + p * p * p * (11.0 / 72.0);
    }
    if k == 0 && z.norm() < 3.0 && (z + 1.0).norm() > 0.5 {
        return (z + 1.0).ln();
    }
    let l1 = z.ln() + Complex64::new(0.0, 2.0 * PI * k as f64);
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

/// Which branch `w` lies on, from `Im(w + ln w - ln z) = 2πk`.
fn branch_of(w: Complex64, z: Complex64) -> i64 {
    ((w + w.ln() - z.ln()).im / (2.0 * PI)).round() as i64
}

/// `W_k(z)`. A real `z` on a branch cut is taken from above.
pub fn lambert_w(k: i64, z: Complex64) -> Result<Complex64> {
    let z = upper_side(z);
    if z == Complex64::new(0.0, 0.0) {
        if k == 0 {
            return Ok(z);
        }
        return Err(Error::InvalidArgument(format!("W_{k}(0) is infinite")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument("non-finite argument".into()));
    }
    if k == 0 && (z + 1.0 / E).norm() < 1e-300 {
        return Ok(Complex64::new(-1.0, 0.0));
    }

    let mut w = seed(k, z);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (wp1 * 2.0);
        let step = f / denom;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * w.norm().max(1e-300) {
            converged = true;
            break;
        }
    }
    // very close to the branch point the last step can stall at ~1e-8
    // relative; accept if the defining equation holds
    let residual = (w * w.exp() - z).norm();
    if !converged && residual > 1e-13 * z.norm() {
        return Err(Error::NoConvergence {
            k,
            z: format!("{z}"),
        });
    }
    let real_exception = k == -1 && is_real_in_neg_branch_segment(z) && w.im == 0.0 && w.re <= -1.0;
    let real_principal = k == 0 && z.im == 0.0 && z.re >= -1.0 / E && w.im == 0.0 && w.re >= -1.0;
    if !(real_exception || real_principal) && branch_of(w, z) != k {
        return Err(Error::NoConvergence {
            k,
            z: format!("{z}"),
        });
    }
    Ok(w)
}
