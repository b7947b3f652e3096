//! The lattice `L_τ = Z + τZ`: its quadratic form `|m + nτ|²`, the dual form,
//! point enumeration by per-row scanning, radial test functions and lattice
//! sums.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// A point `τ` of the upper half-plane.
///
/// `|τ|²` is stored alongside `Re τ` and `Im τ` so that moduli with integral
/// or half-integral forms (`i`, `2i`, `(1 + i√7)/2`, ...) evaluate their
/// quadratic form exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexModulus {
    re: f64,
    im: f64,
    norm_sq: f64,
}

impl ComplexModulus {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::domain("modulus components must be finite"));
        }
        if im <= 0.0 {
            return Err(Error::domain(format!("Im τ must be positive, got {im}")));
        }
        Ok(Self {
            re,
            im,
            norm_sq: re * re + im * im,
        })
    }

    /// Builds `τ` from `Re τ` and `|τ|²`.
    pub fn from_form(re: f64, norm_sq: f64) -> Result<Self> {
        if !re.is_finite() || !norm_sq.is_finite() {
            return Err(Error::domain("modulus components must be finite"));
        }
        let im_sq = norm_sq - re * re;
        if im_sq <= 0.0 {
            return Err(Error::domain(format!(
                "|τ|² = {norm_sq} does not exceed Re²τ = {}",
                re * re
            )));
        }
        Ok(Self {
            re,
            im: im_sq.sqrt(),
            norm_sq,
        })
    }

    /// The square lattice `τ = i`.
    pub fn i() -> Self {
        Self {
            re: 0.0,
            im: 1.0,
            norm_sq: 1.0,
        }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Gram matrix of the basis `(1, τ)` under `Re(z w̄)`.
    pub fn gram(&self) -> [[f64; 2]; 2] {
        [[1.0, self.re], [self.re, self.norm_sq]]
    }

    /// Largest distance from a lattice point to a point of its fundamental cell.
    pub fn cell_diameter(&self) -> f64 {
        let one_plus = ((1.0 + self.re).powi(2) + self.im * self.im).sqrt();
        1f64.max(self.norm_sq.sqrt()).max(one_plus)
    }
}

impl fmt::Display for ComplexModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub m: i64,
    pub n: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { m: 0, n: 0 };

    pub fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }
}

/// Which quadratic form an enumeration or count refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Primal,
    Dual,
}

/// `m² + 2mn Re τ + n² |τ|²`.
pub fn quad_form(tau: &ComplexModulus, p: LatticePoint) -> f64 {
    let (m, n) = (p.m as f64, p.n as f64);
    m * m + 2.0 * m * n * tau.re + n * n * tau.norm_sq
}

/// `(m² |τ|² − 2mn Re τ + n²) / Im² τ`, the squared length of the dual
/// lattice vector indexed by `(m, n)`.
pub fn dual_form(tau: &ComplexModulus, p: LatticePoint) -> f64 {
    let (m, n) = (p.m as f64, p.n as f64);
    (m * m * tau.norm_sq - 2.0 * m * n * tau.re + n * n) / (tau.im * tau.im)
}

pub fn form_value(tau: &ComplexModulus, p: LatticePoint, form: Form) -> f64 {
    match form {
        Form::Primal => quad_form(tau, p),
        Form::Dual => dual_form(tau, p),
    }
}

/// Inclusive range of the scan variable `k` in one row for which `inside(k)`
/// holds, seeded from the real interval `[centre - half, centre + half]` and
/// corrected against the exact predicate.
fn row_range(centre: f64, half: f64, inside: impl Fn(i64) -> bool) -> Option<(i64, i64)> {
    let mut lo = (centre - half).ceil() as i64;
    let mut hi = (centre + half).floor() as i64;
    if lo > hi {
        // empty seed: the row may still hold a boundary point lost to rounding
        let k = centre.round() as i64;
        if !inside(k) {
            return None;
        }
        lo = k;
        hi = k;
    }
    while lo <= hi && !inside(lo) {
        lo += 1;
    }
    while hi >= lo && !inside(hi) {
        hi -= 1;
    }
    if lo > hi {
        return None;
    }
    while inside(lo - 1) {
        lo -= 1;
    }
    while inside(hi + 1) {
        hi += 1;
    }
    Some((lo, hi))
}

/// Visits every row of the region `form ≤ bound` as `(row, lo, hi)`, where
/// the row index is `n` for the primal form (scan variable `m`) and `m` for
/// the dual form (scan variable `n`).
fn for_each_row(tau: &ComplexModulus, bound: f64, form: Form, mut visit: impl FnMut(i64, i64, i64)) {
    // Primal: (m + n Re τ)² + n² Im² τ ≤ bound.
    // Dual:   (n − m Re τ)² + m² Im² τ ≤ bound · Im² τ.
    let (scale, shift) = match form {
        Form::Primal => (1.0, tau.re),
        Form::Dual => (tau.im * tau.im, -tau.re),
    };
    let budget = bound * scale;
    let rows = (budget.sqrt() / tau.im).floor() as i64 + 1;
    for row in -rows..=rows {
        let r = row as f64;
        let slack = budget - r * r * tau.im * tau.im;
        let half = slack.max(0.0).sqrt();
        let centre = -r * shift;
        let inside = |k: i64| {
            let p = match form {
                Form::Primal => LatticePoint::new(k, row),
                Form::Dual => LatticePoint::new(row, k),
            };
            form_value(tau, p, form) <= bound
        };
        if let Some((lo, hi)) = row_range(centre, half, inside) {
            visit(row, lo, hi);
        }
    }
}

fn check_bound(bound: f64) -> Result<()> {
    if bound.is_nan() || bound < 0.0 {
        return Err(Error::domain(format!("bound must be nonnegative, got {bound}")));
    }
    if bound.is_infinite() {
        return Err(Error::domain("bound must be finite"));
    }
    Ok(())
}

/// Every `(m, n)` with `form ≤ bound`, in lexicographic order.
pub fn enumerate_le(tau: &ComplexModulus, bound: f64, form: Form) -> Result<Vec<LatticePoint>> {
    check_bound(bound)?;
    let mut points = Vec::new();
    for_each_row(tau, bound, form, |row, lo, hi| {
        for k in lo..=hi {
            points.push(match form {
                Form::Primal => LatticePoint::new(k, row),
                Form::Dual => LatticePoint::new(row, k),
            });
        }
    });
    points.sort_unstable();
    Ok(points)
}

/// Number of `(m, n)` with `form ≤ bound`, without materialising the points.
pub fn count_le(tau: &ComplexModulus, bound: f64, form: Form) -> Result<u64> {
    check_bound(bound)?;
    let mut count = 0u64;
    for_each_row(tau, bound, form, |_, lo, hi| count += (hi - lo + 1) as u64);
    Ok(count)
}

/// Decay model `|f(s)| ≤ constant · exp(−rate · s)` for Schwartz-mode profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub constant: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// `f(s) = 0` for `s > bound`.
    Compact { bound: f64 },
    /// Rapid decay; sums are cut at `truncation` and the remainder bounded
    /// through the tail model.
    Schwartz {
        truncation: Option<f64>,
        tail: TailModel,
    },
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial function `f(u, v) = f(u² + v²)`, evaluated on the squared radius.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Evaluator,
    support: Support,
    label: String,
    zero: bool,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialProfile {
    pub fn compact(
        label: impl Into<String>,
        bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::domain(format!("support bound must be finite and ≥ 0, got {bound}")));
        }
        Ok(Self {
            eval: Arc::new(f),
            support: Support::Compact { bound },
            label: label.into(),
            zero: false,
        })
    }

    pub fn schwartz(
        label: impl Into<String>,
        tail: TailModel,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(tail.rate > 0.0 && tail.constant >= 0.0) {
            return Err(Error::domain("tail model needs rate > 0 and constant ≥ 0"));
        }
        Ok(Self {
            eval: Arc::new(f),
            support: Support::Schwartz {
                truncation: None,
                tail,
            },
            label: label.into(),
            zero: false,
        })
    }

    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_| 0.0),
            support: Support::Compact { bound: 0.0 },
            label: "zero".into(),
            zero: true,
        }
    }

    /// `exp(−a s)`, a Gaussian in the plane.
    pub fn gaussian(a: f64) -> Result<Self> {
        Self::schwartz(
            format!("exp(-{a}s)"),
            TailModel {
                constant: 1.0,
                rate: a,
            },
            move |s| (-a * s).exp(),
        )
    }

    /// `exp(−a x²)` as an even function on the line, cut at `|x| = cut`.
    /// Its tail model uses `e^{−a x²} ≤ e^{−a x}` for `x ≥ 1`.
    pub fn gaussian_line(a: f64, cut: f64) -> Result<Self> {
        if !(a > 0.0 && cut > 0.0) {
            return Err(Error::domain("line Gaussian needs a > 0 and cut > 0"));
        }
        Ok(Self::schwartz(
            format!("exp(-{a}x^2)"),
            TailModel {
                constant: 1.0,
                rate: a,
            },
            move |x| (-a * x * x).exp(),
        )?
        .with_truncation(cut))
    }

    /// `height · exp(1 − 1/(1 − (s/radius)²))` on `[0, radius)`, zero beyond;
    /// a C^∞ bump with `f(0) = height`.
    pub fn bump(height: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain("bump radius must be positive"));
        }
        Self::compact(format!("bump({height},{radius})"), radius, move |s| {
            let t = s / radius;
            if t.abs() >= 1.0 {
                0.0
            } else {
                height * (1.0 - 1.0 / (1.0 - t * t)).exp()
            }
        })
    }

    /// Sets the cut radius for a Schwartz-mode profile; no effect on compact ones.
    pub fn with_truncation(mut self, radius: f64) -> Self {
        if let Support::Schwartz { tail, .. } = self.support {
            self.support = Support::Schwartz {
                truncation: Some(radius),
                tail,
            };
        }
        self
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.support, Support::Compact { .. })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if let Support::Compact { bound } = self.support {
            if s > bound {
                return 0.0;
            }
        }
        (self.eval)(s)
    }

    /// Radius beyond which sums and integrals are cut.
    pub fn cutoff(&self) -> Result<f64> {
        match self.support {
            Support::Compact { bound } => Ok(bound),
            Support::Schwartz {
                truncation: Some(r), ..
            } => {
                if r.is_finite() && r >= 0.0 {
                    Ok(r)
                } else {
                    Err(Error::usage(format!("invalid truncation radius {r}")))
                }
            }
            Support::Schwartz { truncation: None, .. } => Err(Error::usage(format!(
                "profile {} has unbounded support and no truncation radius",
                self.label
            ))),
        }
    }

    /// Bound on `Σ |f(Q(m, n))|` over lattice points with `Q > cutoff`.
    ///
    /// Uses `#{Q ≤ t} ≤ π(√t + d)² / Im τ` with `d` the cell diameter.
    pub fn lattice_tail_bound(&self, tau: &ComplexModulus) -> Result<f64> {
        match self.support {
            Support::Compact { .. } => Ok(0.0),
            Support::Schwartz { tail, .. } => {
                let b = self.cutoff()?;
                let d = tau.cell_diameter();
                Ok(2.0 * std::f64::consts::PI * tail.constant / tau.im()
                    * (-tail.rate * b).exp()
                    * (b + 1.0 / tail.rate + d * d))
            }
        }
    }

    /// Bound on `∫_cutoff^∞ |f(s)| ds`.
    pub fn integral_tail_bound(&self) -> Result<f64> {
        match self.support {
            Support::Compact { .. } => Ok(0.0),
            Support::Schwartz { tail, .. } => {
                let b = self.cutoff()?;
                Ok(tail.constant * (-tail.rate * b).exp() / tail.rate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSum {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// `Σ_{m,n} f(m² + 2mn Re τ + n² |τ|²)`, including the origin.
pub fn lattice_sum(f: &RadialProfile, tau: &ComplexModulus) -> Result<LatticeSum> {
    if f.is_zero() {
        return Ok(LatticeSum {
            value: 0.0,
            terms: 0,
            tail_bound: 0.0,
        });
    }
    let cut = f.cutoff()?;
    let points = enumerate_le(tau, cut, Form::Primal)?;
    let value = points
        .iter()
        .map(|&p| f.eval(quad_form(tau, p)))
        .collect::<CompensatedSum>()
        .value();
    Ok(LatticeSum {
        value,
        terms: points.len(),
        tail_bound: f.lattice_tail_bound(tau)?,
    })
}

/// `r₂(r)` by direct search over `m² + n² = r`.
pub fn r2_brute(r: u64) -> u64 {
    if r == 0 {
        return 1;
    }
    let mut count = 0;
    let top = r.isqrt();
    for m in 0..=top {
        let rest = r - m * m;
        let n = rest.isqrt();
        if n * n == rest {
            // each nonnegative pair stands for its sign orbit
            count += match (m == 0, n == 0) {
                (true, true) => 1,
                (true, false) | (false, true) => 2,
                (false, false) => 4,
            };
        }
    }
    count
}

/// `r₂(r) = 4 (d₁(r) − d₃(r))` where `d_k` counts divisors `≡ k (mod 4)`.
pub fn r2_divisor(r: u64) -> u64 {
    if r == 0 {
        return 1;
    }
    let mut chi_sum: i64 = 0;
    let mut d = 1;
    while d * d <= r {
        if r % d == 0 {
            chi_sum += chi4(d);
            let e = r / d;
            if e != d {
                chi_sum += chi4(e);
            }
        }
        d += 1;
    }
    (4 * chi_sum) as u64
}

fn chi4(d: u64) -> i64 {
    match d % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// The multiplicity `μ(r) = #{(m, n) : m² + n² = r}`.
pub fn mu_multiplicity(r: u64) -> u64 {
    let value = r2_divisor(r);
    if cfg!(debug_assertions) && r <= 10_000 {
        debug_assert_eq!(value, r2_brute(r), "r2 mismatch at {r}");
    }
    value
}
