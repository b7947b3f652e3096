//! Lattice points of `L_τ` in the ellipses `|m + nτ|² ≤ r`, smoothed counts
//! `Σ H(|m + nτ|²)` and the error term of the Gauss circle problem.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{count_le, enumerate_le, quad_form, ComplexModulus, Form, LatticePoint};
use crate::numeric::CompensatedSum;

/// The CM modulus `τ_D` of the ring of integers of `Q(√−D)`: `(1 + i√D)/2`
/// when `D ≡ 3 (mod 4)`, `i√D` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CMModulus {
    pub d: u64,
    pub tau: ComplexModulus,
}

impl CMModulus {
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("D must be positive"));
        }
        if !is_squarefree(d) {
            return Err(Error::domain(format!("D = {d} is not squarefree")));
        }
        // |τ_D|² is an integer or a quarter-integer, kept exact via from_form
        let tau = if d % 4 == 3 {
            ComplexModulus::from_form(0.5, (1 + d) as f64 / 4.0)?
        } else {
            ComplexModulus::from_form(0.0, d as f64)?
        };
        Ok(Self { d, tau })
    }

    /// `"half-integral"` or `"imaginary"`.
    pub fn convention(&self) -> &'static str {
        if self.d % 4 == 3 {
            "half-integral"
        } else {
            "imaginary"
        }
    }
}

fn is_squarefree(d: u64) -> bool {
    let mut k = 2u64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Blend between 1 and 0 across `[r − ε, r + ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Blend {
    /// `6t⁵ − 15t⁴ + 10t³`, which is C².
    Quintic,
    /// `ψ(t) / (ψ(t) + ψ(1 − t))` with `ψ(t) = e^{−1/t}`, which is C^∞.
    Exp,
}

/// A smooth nonincreasing step with `H = 1` on `(−∞, r − ε]` and `H = 0` on `[r + ε, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothStep {
    pub r: f64,
    pub eps: f64,
    pub blend: Blend,
}

impl SmoothStep {
    pub fn new(r: f64, eps: f64, blend: Blend) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("radius must be positive, got {r}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::domain(format!("width must be positive, got {eps}")));
        }
        Ok(Self { r, eps, blend })
    }

    pub fn quintic(r: f64, eps: f64) -> Result<Self> {
        Self::new(r, eps, Blend::Quintic)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let t = (s - (self.r - self.eps)) / (2.0 * self.eps);
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let rise = match self.blend {
            Blend::Quintic => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
            Blend::Exp => {
                let psi = |x: f64| (-1.0 / x).exp();
                let (a, b) = (psi(t), psi(1.0 - t));
                a / (a + b)
            }
        };
        1.0 - rise
    }
}

/// `N(r) = #{(m, n) : |m + nτ|² ≤ r}` by a per-row integer scan.
pub fn count_exact(tau: &ComplexModulus, r: f64) -> Result<u64> {
    if r.is_nan() {
        return Err(Error::domain("radius is NaN"));
    }
    if r < 0.0 {
        return Ok(0);
    }
    count_le(tau, r, Form::Primal)
}

/// `Σ H(|m + nτ|²)` over the points with `|m + nτ|² ≤ r + ε`.
pub fn count_smoothed(tau: &ComplexModulus, step: &SmoothStep) -> Result<f64> {
    let points = enumerate_le(tau, step.r + step.eps, Form::Primal)?;
    Ok(points.iter().map(|&p| step.eval(quad_form(tau, p))).collect::<CompensatedSum>().value())
}

/// The smoothed count with the exact counts that bracket it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothedCount {
    pub lower: u64,
    pub value: f64,
    pub upper: u64,
}

pub fn smoothed_bracket(tau: &ComplexModulus, step: &SmoothStep) -> Result<SmoothedCount> {
    Ok(SmoothedCount {
        lower: count_exact(tau, step.r - step.eps)?,
        value: count_smoothed(tau, step)?,
        upper: count_exact(tau, step.r + step.eps)?,
    })
}

/// The ellipse coordinates `u = Im²τ · n`, `v = m + Re τ (1 − Im τ) n` of a
/// lattice point.
pub fn ellipse_coordinates(tau: &ComplexModulus, p: LatticePoint) -> (f64, f64) {
    let (m, n) = (p.m as f64, p.n as f64);
    (tau.im() * tau.im() * n, m + tau.re() * (1.0 - tau.im()) * n)
}

/// `(1 + Re²τ)/Im²τ · u² + 2 Re τ/Im τ · uv + v²`, which equals `|m + nτ|²`
/// at the coordinates of [`ellipse_coordinates`].
pub fn ellipse_form(tau: &ComplexModulus, u: f64, v: f64) -> f64 {
    let (re, im) = (tau.re(), tau.im());
    (1.0 + re * re) / (im * im) * u * u + 2.0 * re / im * u * v + v * v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleRow {
    pub r: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub area: f64,
    pub error: f64,
    pub error_over_sqrt_r: f64,
}

/// `N(r)` against the area `πr / Im τ` at `r = r_max · k / samples`, `k = 1..=samples`.
pub fn circle_error_scan(tau: &ComplexModulus, r_max: f64, samples: usize) -> Result<Vec<CircleRow>> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::domain(format!("r_max must be positive, got {r_max}")));
    }
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    (1..=samples)
        .into_par_iter()
        .map(|k| {
            let r = r_max * k as f64 / samples as f64;
            let n = count_exact(tau, r)?;
            let area = std::f64::consts::PI * r / tau.im();
            let error = n as f64 - area;
            Ok(CircleRow {
                r,
                n,
                area,
                error,
                error_over_sqrt_r: error / r.sqrt(),
            })
        })
        .collect()
}

/// `max |N(r) − area| / √r` over the scan.
pub fn max_normalised_error(rows: &[CircleRow]) -> f64 {
    rows.iter().fold(0.0, |a, row| a.max(row.error_over_sqrt_r.abs()))
}

pub fn write_circle_csv<W: Write>(rows: &[CircleRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
