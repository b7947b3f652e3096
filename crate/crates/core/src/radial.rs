//! Radial Fourier transform on `L_τ` through the `J₀` kernel, one- and
//! two-dimensional Poisson summation checks, and the convolution operator
//! `K_f` on `L²(C/L_τ)` diagonalised on torus characters.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::{j0_unchecked, j0_zero_approx};
use crate::error::{Error, Result};
use crate::lattice::{dual_form, enumerate_le, mu_multiplicity, quad_form, ComplexModulus, Form, LatticePoint, RadialProfile};
use crate::numeric::{integrate_panels, CompensatedSum};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// A transform value with its error budget (quadrature estimate plus the
/// truncated tail of the integral).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: f64,
    pub abs_error: f64,
}

/// `(π / Im τ) ∫₀^∞ f(s) J₀(2π ρ √s) ds` at the dual radius `ρ`.
pub fn hankel_radial(f: &RadialProfile, tau: &ComplexModulus, rho: f64, abs_tol: f64) -> Result<TransformValue> {
    if f.is_zero() {
        return Ok(TransformValue {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::domain(format!("dual radius must be finite and ≥ 0, got {rho}")));
    }
    let cut = f.cutoff()?;
    let scale = PI / tau.im();
    let tol = abs_tol / scale;
    let q = if rho == 0.0 {
        integrate_panels(&|s: f64| f.eval(s), &[0.0, cut], tol)
    } else {
        // s = t²: 2t f(t²) J₀(2πρt) on [0, √cut], split at the zeros of J₀
        let top = cut.sqrt();
        let k = 2.0 * PI * rho;
        let mut breaks = vec![0.0];
        for i in 1.. {
            let t = j0_zero_approx(i) / k;
            if t >= top {
                break;
            }
            breaks.push(t);
        }
        breaks.push(top);
        integrate_panels(&|t: f64| 2.0 * t * f.eval(t * t) * j0_unchecked(k * t), &breaks, tol)
    };
    if !q.converged {
        return Err(Error::numeric(format!(
            "radial transform quadrature did not converge (ρ = {rho}, error {:.3e})",
            q.abs_error * scale
        )));
    }
    Ok(TransformValue {
        value: scale * q.value,
        abs_error: scale * q.abs_error + scale * f.integral_tail_bound()?,
    })
}

/// The transform at dual lattice index `p`.
pub fn radial_hat(f: &RadialProfile, tau: &ComplexModulus, p: LatticePoint) -> Result<TransformValue> {
    radial_hat_with_tol(f, tau, p, DEFAULT_ABS_TOL)
}

pub fn radial_hat_with_tol(
    f: &RadialProfile,
    tau: &ComplexModulus,
    p: LatticePoint,
    abs_tol: f64,
) -> Result<TransformValue> {
    hankel_radial(f, tau, dual_form(tau, p).sqrt(), abs_tol)
}

/// Both sides of a Poisson summation identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub tail_bound: f64,
}

impl PoissonReport {
    fn new(lhs: f64, rhs: f64, lhs_terms: usize, rhs_terms: usize, tail_bound: f64) -> Self {
        Self {
            lhs,
            rhs,
            abs_gap: (lhs - rhs).abs(),
            lhs_terms,
            rhs_terms,
            tail_bound,
        }
    }
}

/// `∫ f(|x|) e^{−2πiνx} dx = 2 ∫₀^X f(x) cos(2πνx) dx` for an even function on
/// the line, cut at the profile's radius `X`.
pub fn fourier_even(f: &RadialProfile, nu: f64, abs_tol: f64) -> Result<TransformValue> {
    if f.is_zero() {
        return Ok(TransformValue {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let cut = f.cutoff()?;
    let nu = nu.abs();
    let mut breaks = vec![0.0];
    if nu > 0.0 {
        let step = 0.5 / nu;
        let mut x = step;
        while x < cut {
            breaks.push(x);
            x += step;
        }
    }
    breaks.push(cut);
    let w = 2.0 * PI * nu;
    let q = integrate_panels(&|x: f64| f.eval(x) * (w * x).cos(), &breaks, abs_tol / 2.0);
    if !q.converged {
        return Err(Error::numeric(format!("Fourier quadrature did not converge at ν = {nu}")));
    }
    Ok(TransformValue {
        value: 2.0 * q.value,
        abs_error: 2.0 * q.abs_error + 2.0 * f.integral_tail_bound()?,
    })
}

/// `Σ_{|n|≤N} f(n)` against `Σ_{|n|≤N} f̂(n)` for an even profile on the line
/// (`f` is read as a function of `|x|`).
pub fn poisson_1d(f: &RadialProfile, truncation: usize) -> Result<PoissonReport> {
    if truncation < 1 {
        return Err(Error::domain("truncation must be at least 1"));
    }
    if f.is_zero() {
        return Ok(PoissonReport::new(0.0, 0.0, 0, 0, 0.0));
    }
    let n_max = truncation as i64;
    let mut lhs = CompensatedSum::new();
    for n in -n_max..=n_max {
        lhs.add(f.eval(n.unsigned_abs() as f64));
    }
    let hats: Vec<TransformValue> = (0..=truncation)
        .into_par_iter()
        .map(|n| fourier_even(f, n as f64, DEFAULT_ABS_TOL * 1e-2))
        .collect::<Result<_>>()?;
    let mut rhs = CompensatedSum::new();
    let mut err = CompensatedSum::new();
    for n in -n_max..=n_max {
        let h = hats[n.unsigned_abs() as usize];
        rhs.add(h.value);
        err.add(h.abs_error);
    }
    // lhs truncation: Σ_{|n|>N} |f(n)| ≤ 2C e^{−a(N+1)} / (1 − e^{−a})
    let lhs_tail = match f.support() {
        crate::lattice::Support::Compact { .. } => 0.0,
        crate::lattice::Support::Schwartz { tail, .. } => {
            2.0 * tail.constant * (-tail.rate * (truncation as f64 + 1.0)).exp() / (1.0 - (-tail.rate).exp())
        }
    };
    let terms = 2 * truncation + 1;
    Ok(PoissonReport::new(lhs.value(), rhs.value(), terms, terms, lhs_tail + err.value()))
}

/// Profile with a Schwartz truncation filled in from `cut` when missing.
fn truncated_at(f: &RadialProfile, cut: f64) -> RadialProfile {
    match f.support() {
        crate::lattice::Support::Schwartz { truncation: None, .. } => f.clone().with_truncation(cut),
        _ => f.clone(),
    }
}

/// Two-dimensional Poisson summation on `L_τ`: the lattice sum over
/// `Q(m, n) ≤ primal_cut` against the transform summed over dual indices
/// with dual form `≤ dual_cut`.
///
/// A Schwartz profile without its own truncation is cut at `primal_cut`.
/// `tail_bound` covers the primal truncation and the quadrature errors; the
/// dual truncation is not bounded.
pub fn poisson_2d(f: &RadialProfile, tau: &ComplexModulus, primal_cut: f64, dual_cut: f64) -> Result<PoissonReport> {
    if !(primal_cut >= 0.0 && dual_cut >= 0.0) {
        return Err(Error::domain("cuts must be nonnegative"));
    }
    if f.is_zero() {
        return Ok(PoissonReport::new(0.0, 0.0, 0, 0, 0.0));
    }
    let f = truncated_at(f, primal_cut);
    let primal = enumerate_le(tau, primal_cut, Form::Primal)?;
    let lhs = primal
        .iter()
        .map(|&p| f.eval(quad_form(tau, p)))
        .collect::<CompensatedSum>()
        .value();
    let spectrum = kf_spectrum(&f, tau, dual_cut)?;
    let lhs_tail = f.lattice_tail_bound(tau)?;
    Ok(PoissonReport::new(
        lhs,
        spectrum.trace,
        primal.len(),
        spectrum.eigenvalues.len(),
        lhs_tail + spectrum.abs_error,
    ))
}

/// The right-hand side for `τ = i` indexed by the multiplicity `μ(r)`:
/// `Σ_{r ≤ dual_cut} μ(r) f̂(r)`.
pub fn square_lattice_multiplicity_sum(f: &RadialProfile, dual_cut: f64) -> Result<f64> {
    if !(dual_cut >= 0.0) {
        return Err(Error::domain("cut must be nonnegative"));
    }
    let tau = ComplexModulus::i();
    let top = dual_cut.floor() as u64;
    let terms: Vec<(u64, f64)> = (0..=top)
        .into_par_iter()
        .filter_map(|r| {
            let mult = mu_multiplicity(r);
            if mult == 0 {
                return None;
            }
            Some(hankel_radial(f, &tau, (r as f64).sqrt(), DEFAULT_ABS_TOL).map(|v| (mult, v.value)))
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().map(|&(m, v)| m as f64 * v).collect::<CompensatedSum>().value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KfEigenvalue {
    pub index: LatticePoint,
    pub value: f64,
}

/// `K_f` on `L²(C/L_τ)` in the character basis: `K_f` acts on the character
/// of dual index `p` by the scalar `f̂(p)`. Only this diagonal data is kept,
/// so products of such operators commute by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KfSpectrum {
    pub eigenvalues: Vec<KfEigenvalue>,
    pub trace: f64,
    pub abs_error: f64,
}

/// Eigenvalues of `K_f` for all dual indices with dual form `≤ dual_cut`;
/// exact zeros are dropped.
pub fn kf_spectrum(f: &RadialProfile, tau: &ComplexModulus, dual_cut: f64) -> Result<KfSpectrum> {
    if f.is_zero() {
        return Ok(KfSpectrum {
            eigenvalues: Vec::new(),
            trace: 0.0,
            abs_error: 0.0,
        });
    }
    let dual = enumerate_le(tau, dual_cut, Form::Dual)?;
    let values: Vec<TransformValue> = dual
        .par_iter()
        .map(|&p| radial_hat(f, tau, p))
        .collect::<Result<_>>()?;
    let mut trace = CompensatedSum::new();
    let mut err = CompensatedSum::new();
    let mut eigenvalues = Vec::with_capacity(dual.len());
    for (&index, v) in dual.iter().zip(&values) {
        err.add(v.abs_error);
        if v.value != 0.0 {
            trace.add(v.value);
            eigenvalues.push(KfEigenvalue { index, value: v.value });
        }
    }
    Ok(KfSpectrum {
        eigenvalues,
        trace: trace.value(),
        abs_error: err.value(),
    })
}

impl KfSpectrum {
    /// Spectrum of `K_f K_g` on the common index set.
    pub fn compose(&self, other: &KfSpectrum) -> KfSpectrum {
        let mut eigenvalues = Vec::new();
        let mut j = 0;
        for a in &self.eigenvalues {
            while j < other.eigenvalues.len() && other.eigenvalues[j].index < a.index {
                j += 1;
            }
            if j < other.eigenvalues.len() && other.eigenvalues[j].index == a.index {
                let value = a.value * other.eigenvalues[j].value;
                if value != 0.0 {
                    eigenvalues.push(KfEigenvalue { index: a.index, value });
                }
            }
        }
        let trace = eigenvalues.iter().map(|e| e.value).collect::<CompensatedSum>().value();
        KfSpectrum {
            eigenvalues,
            trace,
            abs_error: 0.0,
        }
    }

    pub fn value_at(&self, p: LatticePoint) -> Option<f64> {
        self.eigenvalues
            .binary_search_by(|e| e.index.cmp(&p))
            .ok()
            .map(|i| self.eigenvalues[i].value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_line(a: f64) -> RadialProfile {
        RadialProfile::gaussian_line(a, 6.0).unwrap()
    }

    #[test]
    fn hat_of_gaussian_matches_closed_form() {
        // ∫₀^∞ e^{−πs} J₀(2πρ√s) ds = e^{−πρ²}/π
        let g = RadialProfile::gaussian(PI).unwrap().with_truncation(14.0);
        let i = ComplexModulus::i();
        let h = radial_hat(&g, &i, LatticePoint::new(1, 0)).unwrap();
        assert!((h.value - (-PI).exp()).abs() < 1e-10);
        assert!((h.value - 0.043_213_9).abs() < 1e-7);
        let h0 = radial_hat(&g, &i, LatticePoint::ORIGIN).unwrap();
        assert!((h0.value - 1.0).abs() < 1e-10);
        for p in [LatticePoint::new(2, 1), LatticePoint::new(-3, 2)] {
            let rho2 = dual_form(&i, p);
            assert!((radial_hat(&g, &i, p).unwrap().value - (-PI * rho2).exp()).abs() < 1e-10);
        }
        assert_eq!(radial_hat(&RadialProfile::zero(), &i, LatticePoint::new(1, 0)).unwrap().value, 0.0);
    }

    #[test]
    fn hat_at_origin_is_scaled_integral() {
        let tau = ComplexModulus::new(0.3, 1.7).unwrap();
        let f = RadialProfile::bump(1.0, 4.0).unwrap();
        let direct = crate::numeric::integrate(&|s| f.eval(s), 0.0, 4.0, 1e-13).value;
        let h = radial_hat(&f, &tau, LatticePoint::ORIGIN).unwrap();
        assert!((h.value - PI / tau.im() * direct).abs() < 1e-10);
    }

    #[test]
    fn poisson_1d_gaussian_self_dual() {
        let r = poisson_1d(&gaussian_line(PI), 6).unwrap();
        assert!((r.lhs - 1.086_435).abs() < 1e-6);
        assert!(r.abs_gap <= 1e-10, "{r:?}");
    }

    #[test]
    fn poisson_1d_gaussian_pair() {
        let r = poisson_1d(&gaussian_line(2.0 * PI), 8).unwrap();
        let lhs: f64 = (-8i32..=8).map(|n| (-2.0 * PI * f64::from(n * n)).exp()).sum();
        let rhs: f64 = (-8i32..=8).map(|n| (-PI * f64::from(n * n) / 2.0).exp()).sum::<f64>() / 2f64.sqrt();
        assert!((r.lhs - lhs).abs() < 1e-14);
        assert!((r.rhs - rhs).abs() < 1e-10);
        assert!(r.abs_gap <= 1e-10);
    }

    #[test]
    fn poisson_zero_profile() {
        let z = RadialProfile::zero();
        let r = poisson_1d(&z, 3).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = poisson_2d(&z, &ComplexModulus::i(), 10.0, 10.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn poisson_2d_two_i_against_theta_products() {
        let tau = ComplexModulus::new(0.0, 2.0).unwrap();
        let g = RadialProfile::gaussian(PI).unwrap();
        let r = poisson_2d(&g, &tau, 36.0, 36.0).unwrap();
        let theta = |q: f64| -> f64 { (-12i32..=12).map(|n| (-PI * q * f64::from(n * n)).exp()).sum() };
        let lhs = theta(1.0) * theta(4.0);
        let rhs = 0.5 * theta(1.0) * theta(0.25);
        assert!((r.lhs - lhs).abs() < 1e-13);
        assert!((lhs - rhs).abs() < 1e-13);
        assert!(r.abs_gap <= 1e-6);
    }

    #[test]
    fn square_lattice_multiplicity_indexing_agrees() {
        let g = RadialProfile::gaussian(PI).unwrap().with_truncation(16.0);
        let spectral = kf_spectrum(&g, &ComplexModulus::i(), 25.0).unwrap().trace;
        let by_mu = square_lattice_multiplicity_sum(&g, 25.0).unwrap();
        assert!((spectral - by_mu).abs() < 1e-9);
    }

    #[test]
    fn compose_is_commutative() {
        let tau = ComplexModulus::new(0.1, 1.2).unwrap();
        let a = kf_spectrum(&RadialProfile::gaussian(2.0).unwrap().with_truncation(20.0), &tau, 9.0).unwrap();
        let b = kf_spectrum(&RadialProfile::gaussian(4.0).unwrap().with_truncation(12.0), &tau, 9.0).unwrap();
        assert_eq!(a.compose(&b), b.compose(&a));
        let origin = a.value_at(LatticePoint::ORIGIN).unwrap() * b.value_at(LatticePoint::ORIGIN).unwrap();
        assert_eq!(a.compose(&b).value_at(LatticePoint::ORIGIN), Some(origin));
    }

    #[test]
    fn kf_zero_is_empty() {
        let s = kf_spectrum(&RadialProfile::zero(), &ComplexModulus::i(), 36.0).unwrap();
        assert!(s.eigenvalues.is_empty());
        assert_eq!(s.trace, 0.0);
    }
}
