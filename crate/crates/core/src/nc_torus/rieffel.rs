//! The Powers–Rieffel projection `P = M_{h₁}S⁻¹ + M_R + M_{h₂}S` and the
//! element `b₀` obtained by replacing its middle symbol with the derivative
//! of `f ∘ φ`, where `f(φ(x)) = ρ(x) = ∫₀ˣ R`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::algebra::{ShiftPoly, SampledCircleFunction};
use super::elements::{Construction, TraceElement};
use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate_panels};
use crate::pseudo_lattice::Approximant;

/// The trapezoid `R`: rising on `[0, ε]`, equal to 1 on `[ε, θ]`, falling
/// on `[θ, θ + ε]` and zero on `[θ + ε, 1)`, so that `∫₀¹ R = θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieffelFunction {
    pub theta: f64,
    pub eps: f64,
}

impl RieffelFunction {
    pub fn new(theta: f64, eps: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::domain(format!("θ must lie in (0, 1), got {theta}")));
        }
        if !(eps > 0.0 && eps < theta.min(1.0 - theta)) {
            return Err(Error::domain(format!("need 0 < ε < min(θ, 1 − θ), got ε = {eps}, θ = {theta}")));
        }
        Ok(Self { theta, eps })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        let (t, e) = (self.theta, self.eps);
        if x < e {
            x / e
        } else if x <= t {
            1.0
        } else if x < t + e {
            1.0 - (x - t) / e
        } else {
            0.0
        }
    }

    fn kinks(&self) -> [f64; 4] {
        [0.0, self.eps, self.theta, self.theta + self.eps]
    }

    /// `ρ(k/q)` for `k = 0..=q`, by cumulative quadrature over the cells with
    /// the kinks of `R` as breakpoints.
    pub fn antiderivative_grid(&self, q: usize) -> Vec<f64> {
        let mut rho = Vec::with_capacity(q + 1);
        rho.push(0.0);
        let mut acc = 0.0;
        for k in 0..q {
            let (a, b) = (k as f64 / q as f64, (k + 1) as f64 / q as f64);
            let mut breaks = vec![a];
            breaks.extend(self.kinks().iter().copied().filter(|&c| c > a && c < b));
            breaks.push(b);
            acc += integrate_panels(&|x| self.eval(x), &breaks, 1e-15).value;
            rho.push(acc);
        }
        rho
    }

    /// Cell averages `q (ρ((k+1)/q) − ρ(k/q))`.
    pub fn cell_averages(&self, q: usize) -> SampledCircleFunction {
        let rho = self.antiderivative_grid(q);
        discrete_derivative(&rho)
    }

    /// Indices of the cells meeting the descending ramp `(θ, θ + ε)`.
    fn descending_cells(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        let qf = q as f64;
        (0..q).filter(move |&k| {
            let (a, b) = (k as f64 / qf, (k + 1) as f64 / qf);
            b > self.theta && a < self.theta + self.eps
        })
    }
}

fn discrete_derivative(values: &[f64]) -> SampledCircleFunction {
    let q = values.len() - 1;
    let d = values.windows(2).map(|w| q as f64 * (w[1] - w[0])).collect();
    SampledCircleFunction::new(d).expect("finite differences of finite values")
}

/// Symbols of `P` built from cell averages `R̄` of `R`: `h₂ = √(R̄ − R̄²)` on
/// the cells of the descending ramp and `h₁ = h₂(· + θ)` through the adjoint.
fn projection_parts(r: &RieffelFunction, approx: &Approximant) -> Result<(SampledCircleFunction, SampledCircleFunction)> {
    let q = approx.q as usize;
    let rbar = r.cell_averages(q);
    let mut h2 = vec![0.0; q];
    for k in r.descending_cells(q) {
        let v = rbar.samples()[k];
        h2[k] = (v - v * v).max(0.0).sqrt();
    }
    Ok((rbar, SampledCircleFunction::new(h2)?))
}

fn check_eps(approx: &Approximant, eps: f64) -> Result<()> {
    let r = approx.ratio();
    let lim = r.min(1.0 - r).min(approx.theta).min(1.0 - approx.theta);
    if !(eps > 0.0 && eps < lim) {
        return Err(Error::domain(format!("ε = {eps} must lie in (0, {lim})")));
    }
    if eps * (approx.q as f64) < 4.0 {
        return Err(Error::domain(format!(
            "ε·q = {} leaves fewer than 4 samples on a ramp",
            eps * approx.q as f64
        )));
    }
    Ok(())
}

/// Assembles `M_{h₁}S⁻¹ + M_mid + M_{h₂}S` with `M_{h₁}S⁻¹ = (M_{h₂}S)*`.
fn three_term(approx: &Approximant, mid: &SampledCircleFunction, h2: &SampledCircleFunction) -> Result<ShiftPoly> {
    let q = approx.q as usize;
    let t = ShiftPoly::monomial(h2.on_orbit(approx.p, q)?, 1);
    ShiftPoly::diagonal(mid.on_orbit(approx.p, q)?).add(&t)?.add(&t.adjoint())
}

/// The Rieffel projection at the approximant `p/q` of `θ`, with the witness
/// functions built for `θ` itself. It is an exact projection only when
/// `θ = p/q`; otherwise its defects measure how well `A_{p/q}` models `A_θ`.
pub fn rieffel_projection(approx: &Approximant, eps: f64) -> Result<TraceElement> {
    check_eps(approx, eps)?;
    let r = RieffelFunction::new(approx.theta, eps)?;
    let (rbar, h2) = projection_parts(&r, approx)?;
    let core = three_term(approx, &rbar, &h2)?;
    Ok(TraceElement::single(*approx, core, approx.ratio(), Construction::Projection))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieffelReport {
    pub p: i64,
    pub q: i64,
    pub theta: f64,
    pub eps: f64,
    pub trace: f64,
    /// `|tr P − p/q|`.
    pub trace_error: f64,
    /// `|tr P − θ|`.
    pub theta_gap: f64,
    /// `‖P² − P‖₂` (normalised Hilbert–Schmidt).
    pub hs_defect: f64,
    /// `‖P² − P‖` (operator norm).
    pub op_defect: f64,
    /// `max |P − P*|`.
    pub adjoint_defect: f64,
    /// `max_λ min(|λ|, |1 − λ|)` over the spectrum of `P`.
    pub cluster_distance: f64,
}

pub fn rieffel_report(approx: &Approximant, eps: f64) -> Result<RieffelReport> {
    let p = rieffel_projection(approx, eps)?;
    let core = p.core();
    let defect = core.mul(core)?.sub(core)?;
    let dense = core.to_dense();
    let spectrum = symmetric_eigenvalues(&dense)?;
    let dd = defect.to_dense();
    let op_defect = symmetric_eigenvalues(&dd)?.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let trace = p.trace();
    Ok(RieffelReport {
        p: approx.p,
        q: approx.q,
        theta: approx.theta,
        eps,
        trace,
        trace_error: (trace - approx.ratio()).abs(),
        theta_gap: (trace - approx.theta).abs(),
        hs_defect: defect.hs_norm(),
        op_defect,
        adjoint_defect: core.adjoint_defect(),
        cluster_distance: spectrum.iter().fold(0.0f64, |a, &l| a.max(l.abs().min((1.0 - l).abs()))),
    })
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::try_new(sym, 1e-14, 10_000)
        .ok_or_else(|| Error::numeric("symmetric eigensolver did not converge"))?;
    Ok(e.eigenvalues.iter().copied().collect())
}

/// `f̃ = f + (θ − f(θ)) · bump_δ(· − θ)`, so that `f̃(θ) = θ`.
#[derive(Clone, Copy)]
pub struct Surgery<'a> {
    f: &'a dyn Fn(f64) -> f64,
    theta: f64,
    jump: f64,
    width: f64,
}

impl<'a> Surgery<'a> {
    pub fn new(f: &'a dyn Fn(f64) -> f64, theta: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::domain("surgery width must be positive"));
        }
        let ft = f(theta);
        if !ft.is_finite() {
            return Err(Error::domain(format!("f(θ) is not finite at θ = {theta}")));
        }
        Ok(Self {
            f,
            theta,
            jump: theta - ft,
            width,
        })
    }

    pub fn applied(&self) -> bool {
        self.jump != 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let base = (self.f)(x);
        if self.jump == 0.0 {
            return base;
        }
        let t = (x - self.theta) / self.width;
        if t.abs() >= 1.0 {
            base
        } else if t == 0.0 {
            self.theta
        } else {
            base + self.jump * (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSolution {
    /// Grid `x_k = k/q`, `k = 0..=q`.
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
    /// `max_k |f̃(φ(x_k)) − ρ(x_k)|`.
    pub max_residual: f64,
    pub surgery_applied: bool,
    pub f_theta: f64,
    pub f_tilde_theta: f64,
}

const PHI_TOL: f64 = 1e-8;
/// How far below θ the branch search may descend.
const SEARCH_SPAN: f64 = 2.0;

/// Solves `f̃(φ(x)) = ρ(x)` on the grid `k/q`, from `φ(1) = θ` downwards, along
/// a branch on which `f̃` is nondecreasing.
pub fn phi_solve(f: &dyn Fn(f64) -> f64, rieffel: &RieffelFunction, q: usize, surgery_width: f64) -> Result<PhiSolution> {
    if q < 2 {
        return Err(Error::domain("need at least two grid cells"));
    }
    let theta = rieffel.theta;
    let ft = Surgery::new(f, theta, surgery_width)?;
    let surgery_applied = ft.applied();
    let rho = rieffel.antiderivative_grid(q);
    let g = |y: f64| ft.eval(y);
    let floor = theta - SEARCH_SPAN;
    let step = SEARCH_SPAN / (8.0 * q as f64);
    let fail = |sample: usize, reason: String| Error::Construction {
        sample,
        reason,
        surgery_applied,
    };

    let mut phi = vec![0.0; q + 1];
    let mut upper = theta;
    for k in (0..=q).rev() {
        let target = rho[k];
        let mut hi = upper;
        let mut g_hi = g(hi);
        if g_hi < target - PHI_TOL {
            return Err(fail(k, format!("f̃ stays below ρ = {target} on the branch")));
        }
        let root = loop {
            if g_hi <= target {
                // only reachable at the top of the scan, within PHI_TOL
                break hi;
            }
            let lo = (hi - step).max(floor);
            let g_lo = g(lo);
            if g_lo <= target {
                break bisect(|y| g(y) - target, lo, hi).unwrap_or(lo);
            }
            if g_lo > g_hi {
                // f̃ turns upward: accept a touching minimum, else the branch ends
                let y = local_min(&g, lo, hi + step);
                if (g(y) - target).abs() <= PHI_TOL {
                    break y;
                }
                return Err(fail(k, format!("no monotone branch of f̃ reaches ρ = {target}")));
            }
            if lo <= floor {
                return Err(fail(k, format!("f̃ does not reach ρ = {target} within [θ − {SEARCH_SPAN}, θ]")));
            }
            hi = lo;
            g_hi = g_lo;
        };
        phi[k] = root;
        upper = root;
    }
    let max_residual = phi
        .iter()
        .zip(&rho)
        .fold(0.0f64, |a, (&y, &r)| a.max((g(y) - r).abs()));
    if max_residual > PHI_TOL {
        let k = phi.iter().zip(&rho).position(|(&y, &r)| (g(y) - r).abs() > PHI_TOL).unwrap_or(0);
        return Err(fail(k, format!("residual {max_residual:.3e} exceeds {PHI_TOL:e}")));
    }
    Ok(PhiSolution {
        x: (0..=q).map(|k| k as f64 / q as f64).collect(),
        phi,
        rho,
        max_residual,
        surgery_applied,
        f_theta: f(theta),
        f_tilde_theta: ft.eval(theta),
    })
}

fn local_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Serialize)]
pub struct B0Report {
    #[serde(skip)]
    pub element: TraceElement,
    pub trace: f64,
    pub f_theta: f64,
    pub f_tilde_theta: f64,
    pub surgery_applied: bool,
    pub phi_residual: f64,
}

/// `b₀ = M_{h₁}S⁻¹ + M_{(f̃∘φ)′} + M_{h₂}S`; the middle symbol is the forward
/// difference of `f̃ ∘ φ` on the grid, so its trace telescopes to
/// `f̃(φ(1)) − f̃(φ(0)) = f̃(θ)`.
pub fn b0_build(f: &dyn Fn(f64) -> f64, approx: &Approximant, eps: f64, surgery_width: f64) -> Result<B0Report> {
    check_eps(approx, eps)?;
    let r = RieffelFunction::new(approx.theta, eps)?;
    let q = approx.q as usize;
    let sol = phi_solve(f, &r, q, surgery_width)?;
    let ft = Surgery::new(f, approx.theta, surgery_width)?;
    let composed: Vec<f64> = sol.phi.iter().map(|&y| ft.eval(y)).collect();
    let mid = discrete_derivative(&composed);
    let (_, h2) = projection_parts(&r, approx)?;
    let core = three_term(approx, &mid, &h2)?;
    let element = TraceElement::single(*approx, core, sol.f_tilde_theta, Construction::Lemma1);
    Ok(B0Report {
        trace: element.trace(),
        element,
        f_theta: sol.f_theta,
        f_tilde_theta: sol.f_tilde_theta,
        surgery_applied: sol.surgery_applied,
        phi_residual: sol.max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_approx(p: i64, q: i64) -> Approximant {
        Approximant::new(p, q, 0.5 * (5f64.sqrt() - 1.0)).unwrap()
    }

    #[test]
    fn rieffel_function_integrates_to_theta() {
        let r = RieffelFunction::new(0.618, 0.1).unwrap();
        let rho = r.antiderivative_grid(377);
        assert!((rho[377] - 0.618).abs() < 1e-14);
        assert!(RieffelFunction::new(0.3, 0.3).is_err());
    }

    #[test]
    fn exact_projection_at_rational_theta() {
        let a = Approximant::rational(2, 5).unwrap();
        let a_big = Approximant::rational(144, 377).unwrap();
        assert!(rieffel_projection(&a, 0.1).is_err()); // ε·q < 4
        let rep = rieffel_report(&a_big, 0.1).unwrap();
        assert!(rep.hs_defect < 1e-13, "{rep:?}");
        assert!(rep.trace_error < 1e-14);
        assert!(rep.cluster_distance < 1e-12);
    }

    #[test]
    fn projection_is_self_adjoint() {
        let p = rieffel_projection(&golden_approx(233, 377), 0.1).unwrap();
        assert!(p.adjoint_defect() <= 1e-12);
        assert!((p.trace() - golden_approx(233, 377).theta).abs() < 1e-14);
    }

    #[test]
    fn b0_of_identity_is_the_projection() {
        let a = golden_approx(233, 377);
        let id = |x: f64| x;
        let b0 = b0_build(&id, &a, 0.1, 0.05).unwrap();
        assert!(!b0.surgery_applied);
        let p = rieffel_projection(&a, 0.1).unwrap();
        let diff = b0.element.core().sub(p.core()).unwrap();
        assert!(diff.max_entry() <= 1e-12, "{}", diff.max_entry());
    }

    #[test]
    fn phi_of_identity_is_rho() {
        let r = RieffelFunction::new(0.4, 0.1).unwrap();
        let id = |x: f64| x;
        let s = phi_solve(&id, &r, 200, 0.05).unwrap();
        for (y, rho) in s.phi.iter().zip(&s.rho) {
            assert!((y - rho).abs() < 1e-12);
        }
        assert!((id(s.phi[0]) - s.rho[0]).abs() <= 1e-12);
    }

    #[test]
    fn phi_with_surgery_on_square() {
        let r = RieffelFunction::new(0.5, 0.1).unwrap();
        let sq = |x: f64| x * x;
        let s = phi_solve(&sq, &r, 200, 0.1).unwrap();
        assert!(s.surgery_applied);
        assert!((s.phi[200] - 0.5).abs() < 1e-8);
        assert_eq!(s.f_tilde_theta, 0.5);
        assert_eq!(s.f_theta, 0.25);
        // oracle: independent root solve per sample
        let ft = Surgery::new(&sq, 0.5, 0.1).unwrap();
        for k in (10..=200).step_by(10) {
            let want = bisect(|y| ft.eval(y) - s.rho[k], 0.0, 0.5).unwrap();
            assert!((s.phi[k] - want).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn b0_trace_telescopes_to_f_theta() {
        let a = golden_approx(233, 377);
        // f(θ) = θ, increasing on [0, θ]
        let t = a.theta;
        let f = move |x: f64| x + 0.3 * x * (x - t);
        let b0 = b0_build(&f, &a, 0.1, 0.05).unwrap();
        assert!(!b0.surgery_applied);
        assert!((b0.trace - f(t)).abs() <= 1e-3);
        assert!(b0.element.adjoint_defect() <= 1e-12);
    }

    #[test]
    fn constant_function_has_no_branch() {
        let a = golden_approx(233, 377);
        let c = |_: f64| 0.4;
        match b0_build(&c, &a, 0.1, 0.05) {
            Err(Error::Construction { surgery_applied, .. }) => assert!(surgery_applied),
            other => panic!("expected construction error, got {other:?}"),
        }
    }
}
