//! Bessel function of the first kind, order zero.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 5.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `J₀(x)` for finite real `x`, absolute error below `1e-12` on `|x| ≤ 1e3`.
///
/// Power series for `|x| ≤ 5`, Miller's backward recurrence normalised by
/// `1 = J₀ + 2 Σ J₂ₖ` on `(5, 25]`, Hankel's asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("J0 needs a finite argument, got {x}")));
    }
    Ok(j0_unchecked(x))
}

/// `J₀` without the finiteness check, for hot quadrature loops.
pub(crate) fn j0_unchecked(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x)
    } else if x <= ASYMPTOTIC_LIMIT {
        miller(x)
    } else {
        hankel(x)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    let start = 2 * (((x + 36.0) / 2.0).ceil() as usize);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut even_sum = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            even_sum += cur;
        }
        if k - 1 == 0 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    j0 / (j0 + 2.0 * even_sum)
}

fn hankel(x: f64) -> f64 {
    // a_k = Π_{j≤k} (−(2j−1)²) / (k! 8^k)
    let inv = 1.0 / x;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let term = a * pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if last < 1e-18 {
            break;
        }
        let j = (k + 1) as f64;
        let odd = 2.0 * j - 1.0;
        a *= -(odd * odd) / (j * 8.0);
        pow *= inv;
    }
    // cos(x − π/4) = (cos x + sin x)/√2, sin(x − π/4) = (sin x − cos x)/√2
    let (s, c) = x.sin_cos();
    let cos_shift = FRAC_1_SQRT_2 * (c + s);
    let sin_shift = FRAC_1_SQRT_2 * (s - c);
    (2.0 / (PI * x)).sqrt() * (p * cos_shift - q * sin_shift)
}

/// McMahon's approximation to the `k`-th positive zero of `J₀` (`k ≥ 1`);
/// within `2e-3` of the true zero already at `k = 1`.
pub fn j0_zero_approx(k: usize) -> f64 {
    let beta = (k as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3))
}
