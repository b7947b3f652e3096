//! Elements of `A_θ ⊗ M_k` realising a prescribed trace value `f(β)` for a
//! pseudo-lattice point `β = μ(m + nθ)`.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use super::algebra::ShiftPoly;
use super::rieffel::RieffelFunction;
use crate::contfrac::cf_expand_interval;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::pseudo_lattice::{Approximant, PseudoLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Projection,
    Lemma1,
    Lemma2,
    #[serde(rename = "lemma3i")]
    Lemma3i,
    #[serde(rename = "lemma3ii")]
    Lemma3ii,
    Lemma4,
    ConstantSymbol,
    Zero,
}

/// How the core element `a ∈ A_θ` is realised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Fidelity {
    /// `a = t · 1`: exact traces, always diagonal.
    ConstantSymbol,
    /// `a = (t/θ) (M_{h₁}S⁻¹ + M_R̄ + M_{h₂}S)` with the Rieffel symbols of the
    /// representation's own rotation number `p/q`, so `tr a = t · (p/q)/θ`.
    /// `off_diagonal = false` drops `h₁, h₂`.
    LemmaFaithful { eps: f64, off_diagonal: bool },
}

impl Fidelity {
    pub fn faithful(eps: f64) -> Self {
        Fidelity::LemmaFaithful {
            eps,
            off_diagonal: false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Fidelity::ConstantSymbol => "constant-symbol",
            Fidelity::LemmaFaithful { off_diagonal: false, .. } => "lemma-faithful",
            Fidelity::LemmaFaithful { off_diagonal: true, .. } => "lemma-faithful-full",
        }
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `b = diag(s·a, ..., s·a) ⊕ (±I)^{⊕|m|}` with `|n|` signed copies of the
/// core `a` (sign `s = sgn n`) and `|m|` signed identity blocks; its trace is
/// `n · tr(a) + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceElement {
    approximant: Approximant,
    core: ShiftPoly,
    copies: i64,
    identity_shift: i64,
    target: f64,
    tag: Construction,
}

impl TraceElement {
    pub(crate) fn single(approximant: Approximant, core: ShiftPoly, target: f64, tag: Construction) -> Self {
        Self {
            approximant,
            core,
            copies: 1,
            identity_shift: 0,
            target,
            tag,
        }
    }

    pub fn zero(approximant: Approximant) -> Self {
        Self {
            approximant,
            core: ShiftPoly::zero(approximant.q as usize),
            copies: 0,
            identity_shift: 0,
            target: 0.0,
            tag: Construction::Zero,
        }
    }

    pub fn approximant(&self) -> &Approximant {
        &self.approximant
    }

    pub fn core(&self) -> &ShiftPoly {
        &self.core
    }

    pub fn copies(&self) -> i64 {
        self.copies
    }

    pub fn identity_shift(&self) -> i64 {
        self.identity_shift
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn tag(&self) -> Construction {
        self.tag
    }

    /// Number of `q × q` blocks.
    pub fn blocks(&self) -> usize {
        (self.copies.unsigned_abs() + self.identity_shift.unsigned_abs()) as usize
    }

    /// `n · tr(a) + m`, with `tr` the normalised trace on each block.
    pub fn trace(&self) -> f64 {
        let mut s = CompensatedSum::new();
        s.add(self.copies as f64 * self.core.trace());
        s.add(self.identity_shift as f64);
        s.value()
    }

    /// `max |b − b*|`; identity blocks are exactly self-adjoint.
    pub fn adjoint_defect(&self) -> f64 {
        if self.copies == 0 {
            0.0
        } else {
            self.core.adjoint_defect()
        }
    }

    /// The block-diagonal matrix itself.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let q = self.approximant.q as usize;
        let n = self.blocks() * q;
        let mut m = DMatrix::zeros(n, n);
        let core = self.core.to_dense() * (self.copies.signum() as f64);
        for b in 0..self.copies.unsigned_abs() as usize {
            m.view_mut((b * q, b * q), (q, q)).copy_from(&core);
        }
        let sign = self.identity_shift.signum() as f64;
        let start = self.copies.unsigned_abs() as usize * q;
        for i in start..n {
            m[(i, i)] = sign;
        }
        m
    }

    /// `‖[b, b']‖₂` for elements with the same block layout: the blocks pair up
    /// as `s s' [a, a']` and identities commute with everything.
    pub fn commutator_norm(&self, other: &TraceElement) -> Result<f64> {
        if self.approximant.q != other.approximant.q {
            return Err(Error::usage("elements live in representations of different size"));
        }
        let shared = self.copies.unsigned_abs().min(other.copies.unsigned_abs());
        if shared == 0 {
            return Ok(0.0);
        }
        let c = self.core.mul(&other.core)?.sub(&other.core.mul(&self.core)?)?;
        Ok(c.hs_norm())
    }
}

/// The core element of the requested fidelity with target trace `t` in the
/// representation of `approx`.
fn core_element(t: f64, approx: &Approximant, fidelity: Fidelity) -> Result<ShiftPoly> {
    let q = approx.q as usize;
    match fidelity {
        Fidelity::ConstantSymbol => Ok(ShiftPoly::diagonal(vec![t; q])),
        Fidelity::LemmaFaithful { eps, off_diagonal } => {
            let proj = rational_projection(approx, eps, off_diagonal)?;
            Ok(proj.scale(t / approx.theta))
        }
    }
}

/// The Rieffel projection of `A_{p/q}` itself, optionally without `h₁, h₂`.
fn rational_projection(approx: &Approximant, eps: f64, off_diagonal: bool) -> Result<ShiftPoly> {
    let exact = Approximant::rational(approx.p, approx.q)?;
    let r = RieffelFunction::new(exact.ratio(), eps)?;
    if eps * (approx.q as f64) < 4.0 {
        return Err(Error::domain(format!("ε·q = {} leaves fewer than 4 samples on a ramp", eps * approx.q as f64)));
    }
    if off_diagonal {
        let p = super::rieffel::rieffel_projection(&exact, eps)?;
        Ok(p.core().clone())
    } else {
        Ok(ShiftPoly::diagonal(r.cell_averages(approx.q as usize).on_orbit(approx.p, approx.q as usize)?))
    }
}

/// Builds `b` with `tr b = f(β)` for `β = μ(m + nθ)`:
/// `g₁(x) = f(μx)`, `g₂(y) = g₁(y + m) − m`, `g₃(x) = g₂(nx)/n`, a core `a` with
/// `tr a = g₃(θ)`, then `|n|` signed copies of `a` and `m` signed identities.
pub fn trace_element_at(
    f: &dyn Fn(f64) -> f64,
    (m, n): (i64, i64),
    mu: f64,
    approx: &Approximant,
    fidelity: Fidelity,
) -> Result<TraceElement> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain(format!("μ must be positive, got {mu}")));
    }
    let theta = approx.theta;
    let g1 = |x: f64| f(mu * x);
    let g2 = |y: f64| g1(y + m as f64) - m as f64;
    let beta_value = g1(m as f64 + n as f64 * theta);
    if !beta_value.is_finite() {
        return Err(Error::domain(format!("f is not finite at β = {}", mu * (m as f64 + n as f64 * theta))));
    }
    if beta_value == 0.0 {
        return Ok(TraceElement::zero(*approx));
    }
    let (copies, t) = if n == 0 {
        (1, g2(0.0))
    } else {
        (n, g2(n as f64 * theta) / n as f64)
    };
    // |n| copies of sgn(n)·a carry n·tr(a)
    let core = core_element(t, approx, fidelity)?;
    let tag = match fidelity {
        Fidelity::ConstantSymbol => Construction::ConstantSymbol,
        _ if mu != 1.0 => Construction::Lemma4,
        _ if m != 0 => Construction::Lemma3ii,
        _ if n != 1 => Construction::Lemma3i,
        _ => Construction::Lemma1,
    };
    Ok(TraceElement {
        approximant: *approx,
        core,
        copies,
        identity_shift: m,
        target: beta_value,
        tag,
    })
}

/// Writes `β/μ = m + nθ` with `|m|, |n| ≤ window`.
pub fn decompose(beta: f64, lattice: &PseudoLattice, window: i64) -> Result<(i64, i64)> {
    let y = beta / lattice.mu;
    let tol = 1e-9 * (1.0 + y.abs());
    let mut best: Option<(f64, i64, i64)> = None;
    for n in -window..=window {
        let m = (y - n as f64 * lattice.theta).round();
        let err = (m + n as f64 * lattice.theta - y).abs();
        if err <= tol && best.is_none_or(|b| err < b.0) {
            best = Some((err, m as i64, n));
        }
    }
    best.map(|(_, m, n)| (m, n))
        .ok_or_else(|| Error::domain(format!("{beta} is not μ(m + nθ) with |n| ≤ {window}")))
}

/// Window used when `(m, n)` is not supplied.
pub const DECOMPOSE_WINDOW: i64 = 10_000;

/// Dispatch on a pseudo-lattice point at the first convergent with
/// `q ≥ rep_size_hint`.
pub fn trace_element(
    f: &dyn Fn(f64) -> f64,
    beta: f64,
    coefficients: Option<(i64, i64)>,
    lattice: &PseudoLattice,
    rep_size_hint: i64,
    fidelity: Fidelity,
) -> Result<TraceElement> {
    let mn = match coefficients {
        Some(c) => c,
        None => decompose(beta, lattice, DECOMPOSE_WINDOW)?,
    };
    let approx = lattice.approximant_at_least(rep_size_hint)?;
    trace_element_at(f, mn, lattice.mu, &approx, fidelity)
}

/// An element with trace `f({mθ})`, realised directly in `A_{{mθ}}` at a
/// convergent of `{mθ}` with `q ≥ rep_size_hint`. Only the trace is carried
/// over to `A_θ`; no embedding of matrices is built.
pub fn lemma2_element(
    f: &dyn Fn(f64) -> f64,
    m: i64,
    lattice: &PseudoLattice,
    rep_size_hint: i64,
    fidelity: Fidelity,
) -> Result<TraceElement> {
    if m == 0 {
        return Err(Error::domain("m must be nonzero"));
    }
    let frac = lattice.theta_interval().scale(m).fractional_part()?;
    let cf = cf_expand_interval(&frac, 80)?;
    let beta = frac.midpoint_f64();
    let fidelity = match fidelity {
        Fidelity::LemmaFaithful { eps, off_diagonal } => Fidelity::LemmaFaithful {
            eps: eps.min(0.25 * beta.min(1.0 - beta)),
            off_diagonal,
        },
        c => c,
    };
    let eps = match fidelity {
        Fidelity::LemmaFaithful { eps, .. } => eps,
        Fidelity::ConstantSymbol => 1.0,
    };
    let q_floor = rep_size_hint.max((4.0 / eps).ceil() as i64 + 1);
    let conv = crate::contfrac::convergents(&cf.quotients)?;
    let c = conv
        .iter()
        .find(|c| c.q >= i128::from(q_floor) && c.p > 0 && c.p < c.q)
        .ok_or_else(|| Error::domain(format!("no convergent of {{{m}θ}} with q ≥ {q_floor}")))?;
    let p = i64::try_from(c.p).map_err(|_| Error::numeric("convergent exceeds 64-bit range"))?;
    let q = i64::try_from(c.q).map_err(|_| Error::numeric("convergent exceeds 64-bit range"))?;
    let approx = Approximant::new(p, q, beta)?;
    let mut e = trace_element_at(f, (0, 1), 1.0, &approx, fidelity)?;
    if e.tag != Construction::Zero {
        e.tag = Construction::Lemma2;
    }
    Ok(e)
}
