//! `A_f = Σ_j b_j` over the pseudo-lattice points pulled back from `L_τ`,
//! and the comparison `Σ f(L_τ) = Tr(A_f)`.

use rayon::prelude::*;
use serde::Serialize;

use super::elements::{trace_element_at, Fidelity, TraceElement};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_le, lattice_sum, quad_form, ComplexModulus, Form, LatticePoint, RadialProfile};
use crate::numeric::CompensatedSum;
use crate::pseudo_lattice::{IndexBijection, PseudoLattice};
use crate::radial::kf_spectrum;

#[derive(Debug, Clone)]
pub struct AfOperator {
    pub elements: Vec<(LatticePoint, TraceElement)>,
    pub total_trace: f64,
    pub fidelity: Fidelity,
    pub q: i64,
}

impl AfOperator {
    pub fn max_adjoint_defect(&self) -> f64 {
        self.elements.iter().fold(0.0, |a, (_, e)| a.max(e.adjoint_defect()))
    }
}

/// One element per primal point `p` with `Q(p) ≤` the profile's cutoff, built
/// for `β = F(p)` with `f(β) := f(Q(F⁻¹(β)))`.
pub fn assemble_af(
    f: &RadialProfile,
    tau: &ComplexModulus,
    lattice: &PseudoLattice,
    bijection: &IndexBijection,
    q: i64,
    fidelity: Fidelity,
) -> Result<AfOperator> {
    let approx = lattice.approximant_at_least(q)?;
    if f.is_zero() {
        return Ok(AfOperator {
            elements: Vec::new(),
            total_trace: 0.0,
            fidelity,
            q: approx.q,
        });
    }
    let cut = f.cutoff()?;
    let points = enumerate_le(tau, cut, Form::Primal)?;
    let reach = points.iter().map(|p| p.m.abs().max(p.n.abs())).max().unwrap_or(0);
    if reach > bijection.window {
        return Err(Error::usage(format!(
            "bijection window {} does not cover indices up to {reach}",
            bijection.window
        )));
    }
    let pulled_back = |beta: f64| -> f64 {
        match bijection.inverse(beta) {
            Ok(p) => f.eval(quad_form(tau, p)),
            Err(_) => f64::NAN,
        }
    };
    let elements: Vec<(LatticePoint, TraceElement)> = points
        .par_iter()
        .map(|&p| {
            let coeffs = bijection.coefficients(p);
            trace_element_at(&pulled_back, coeffs, bijection.mu, &approx, fidelity).map(|e| (p, e))
        })
        .collect::<Result<_>>()?;
    let total_trace = elements.iter().map(|(_, e)| e.trace()).collect::<CompensatedSum>().value();
    Ok(AfOperator {
        elements,
        total_trace,
        fidelity,
        q: approx.q,
    })
}

/// `C` in the lemma-faithful bound `gap ≤ N_pts · C / q`, frozen from one
/// calibration sweep (worst observed `gap · q / N_pts` was 0.0161 at q = 55).
pub const FAITHFUL_GAP_CONSTANT: f64 = 0.025;

pub fn faithful_gap_bound(n_points: usize, q: i64) -> f64 {
    n_points as f64 * FAITHFUL_GAP_CONSTANT / q as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub q: i64,
    pub mode: String,
    pub n_points: usize,
    /// `N_pts · C / q` in lemma-faithful mode.
    pub bound: Option<f64>,
    pub kf_trace: Option<f64>,
    pub kf_gap: Option<f64>,
}

/// Compares the lattice sum with `Tr(A_f)`, and with the trace of `K_f` when
/// a dual cut is given.
pub fn theorem1_verify(
    f: &RadialProfile,
    tau: &ComplexModulus,
    lattice: &PseudoLattice,
    bijection: &IndexBijection,
    q: i64,
    fidelity: Fidelity,
    dual_cut: Option<f64>,
) -> Result<Theorem1Report> {
    let lhs = lattice_sum(f, tau)?.value;
    let af = assemble_af(f, tau, lattice, bijection, q, fidelity)?;
    let kf_trace = match dual_cut {
        Some(cut) => Some(kf_spectrum(f, tau, cut)?.trace),
        None => None,
    };
    Ok(Theorem1Report {
        lhs,
        rhs: af.total_trace,
        gap: (lhs - af.total_trace).abs(),
        q: af.q,
        mode: fidelity.label().to_string(),
        n_points: af.elements.len(),
        bound: match fidelity {
            Fidelity::ConstantSymbol => None,
            Fidelity::LemmaFaithful { .. } => Some(faithful_gap_bound(af.elements.len(), af.q)),
        },
        kf_trace,
        kf_gap: kf_trace.map(|k| (lhs - k).abs()),
    })
}

/// `max_j ‖b_j b'_j − b'_j b_j‖₂` over elements at the same lattice index.
pub fn commutator_defect(a: &AfOperator, b: &AfOperator) -> Result<f64> {
    if a.elements.is_empty() || b.elements.is_empty() {
        return Ok(0.0);
    }
    if a.q != b.q {
        return Err(Error::usage(format!("representation sizes differ: {} vs {}", a.q, b.q)));
    }
    if a.elements.len() != b.elements.len() || a.elements.iter().zip(&b.elements).any(|(x, y)| x.0 != y.0) {
        return Err(Error::usage("index sets are not aligned"));
    }
    let norms: Vec<f64> = a
        .elements
        .par_iter()
        .zip(&b.elements)
        .map(|((_, x), (_, y))| x.commutator_norm(y))
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}
