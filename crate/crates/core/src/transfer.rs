//! The Gauss–Kuzmin–Wirsing operator `(L_s f)(z) = Σ_{n≥1} (n+z)^{−2s} f(1/(n+z))`
//! on Taylor coefficients at `z = 1`, its spectrum, `det(1 − L_s²)`, and the
//! exploratory comparison with the diagonal model of `Ĥ_D(s)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gauss_circle::{CMModulus, SmoothStep};
use crate::lattice::{enumerate_le, quad_form, Form};

/// Terms summed directly before the Hurwitz-zeta tail takes over.
const DIRECT_TERMS: usize = 200;
const MIN_NODES: usize = 64;
pub const BASIS_CENTER: f64 = 1.0;
pub const DOMAIN_RADIUS: f64 = 1.5;
pub const QUADRATURE_RADIUS: f64 = 1.0;

// B_2, B_4, ..., B_16
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct C {
        re: f64,
        im: f64,
    }
    C { re: z.re, im: z.im }.serialize(s)
}

fn ser_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    struct W<'a>(&'a Complex64);
    impl Serialize for W<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            ser_complex(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&W(z))?;
    }
    seq.end()
}

fn check_s(s: Complex64) -> Result<()> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain("s must be finite"));
    }
    if s.re <= 0.5 {
        return Err(Error::Divergence(format!("Σ (n+z)^(−2s) needs Re s > 1/2, got {s}")));
    }
    Ok(())
}

/// Hurwitz `ζ(σ, a)` by Euler–Maclaurin with no direct terms; accurate when
/// `|σ| ≪ 2π|a|`, which holds for the tails used here.
fn hurwitz_zeta_tail(sigma: Complex64, a: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut acc = a.powc(one - sigma) / (sigma - one) + 0.5 * a.powc(-sigma);
    let inv_a2 = (a * a).inv();
    // rising = σ(σ+1)…(σ+2j−2), power = a^{−σ−2j+1}
    let mut rising = sigma;
    let mut power = a.powc(-sigma - one);
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let jj = (j + 1) as f64;
        acc += b / fact * rising * power;
        rising *= (sigma + 2.0 * jj - 1.0) * (sigma + 2.0 * jj);
        power *= inv_a2;
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    }
    acc
}

/// `(L_s (· − 1)^k)(z)` for `k = 0..dim`.
fn apply_to_monomials(s: Complex64, z: Complex64, dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for n in 1..=DIRECT_TERMS {
        let base = z + n as f64;
        let weight = base.powc(-2.0 * s);
        let w1 = base.inv() - 1.0;
        let mut p = weight;
        for slot in out.iter_mut() {
            *slot += p;
            p *= w1;
        }
    }
    // Σ_{n>N} (n+z)^{−2s} (1/(n+z) − 1)^k = Σ_j C(k,j) (−1)^{k−j} ζ(2s+j, N+1+z)
    let a = z + (DIRECT_TERMS + 1) as f64;
    let zetas: Vec<Complex64> = (0..dim).map(|j| hurwitz_zeta_tail(2.0 * s + j as f64, a)).collect();
    let mut binom = vec![1.0f64; dim];
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            for j in (1..k).rev() {
                binom[j] += binom[j - 1];
            }
            binom[k] = 1.0;
        }
        let mut tail = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            tail += sign * binom[j] * zetas[j];
        }
        *slot += tail;
    }
    out
}

/// `L_s` truncated to the Taylor monomials `(z − 1)^k`, `k < dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTruncation {
    pub s: Complex64,
    pub dim: usize,
    /// Column `k` holds the Taylor coefficients of `L_s (z − 1)^k`.
    pub matrix: DMatrix<Complex64>,
    pub nodes: usize,
}

impl TransferTruncation {
    /// Leading `k × k` block, which is the truncation at `dim = k`.
    pub fn leading(&self, k: usize) -> TransferTruncation {
        TransferTruncation {
            s: self.s,
            dim: k,
            matrix: self.matrix.view((0, 0), (k, k)).into_owned(),
            nodes: self.nodes,
        }
    }
}

/// Builds the truncation by Cauchy quadrature on `|z − 1| = 1` with
/// `max(4·dim, 64)` nodes.
pub fn build_gkw(s: Complex64, dim: usize) -> Result<TransferTruncation> {
    check_s(s)?;
    if dim < 2 {
        return Err(Error::domain(format!("dim must be at least 2, got {dim}")));
    }
    let nodes = (4 * dim).max(MIN_NODES);
    let samples: Vec<Vec<Complex64>> = (0..nodes)
        .into_par_iter()
        .map(|l| {
            let z = BASIS_CENTER + Complex64::from_polar(QUADRATURE_RADIUS, 2.0 * PI * l as f64 / nodes as f64);
            apply_to_monomials(s, z, dim)
        })
        .collect();
    let mut matrix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for j in 0..dim {
        let scale = QUADRATURE_RADIUS.powi(-(j as i32)) / nodes as f64;
        for (l, column_values) in samples.iter().enumerate() {
            let twiddle = Complex64::from_polar(1.0, -2.0 * PI * ((j * l) % nodes) as f64 / nodes as f64);
            for k in 0..dim {
                matrix[(j, k)] += column_values[k] * twiddle;
            }
        }
        for k in 0..dim {
            matrix[(j, k)] *= scale;
        }
    }
    if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::numeric("non-finite transfer matrix entry"));
    }
    Ok(TransferTruncation { s, dim, matrix, nodes })
}

/// Descending modulus; ties broken by real then imaginary part.
fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

pub fn eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    let scale = matrix.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let schur = Schur::try_new(matrix.clone(), 1e-15, 100_000).ok_or_else(|| {
        Error::numeric(format!("Schur iteration did not converge (dim {n}, max entry {scale:e})"))
    })?;
    let (_, t) = schur.unpack();
    let sub = (1..n).fold(0.0f64, |a, i| a.max(t[(i, i - 1)].norm()));
    if sub > 1e-10 * scale.max(1.0) {
        return Err(Error::numeric(format!(
            "Schur factor not triangular: subdiagonal {sub:e} against max entry {scale:e}"
        )));
    }
    let mut ev: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    sort_spectrum(&mut ev);
    Ok(ev)
}

/// `max_{μ ∈ small} min_{λ ∈ large} |λ − μ|`.
fn drift(small: &[Complex64], large: &[Complex64]) -> f64 {
    small
        .iter()
        .map(|m| large.iter().map(|l| (l - m).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    #[serde(serialize_with = "ser_complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub dim: usize,
    #[serde(serialize_with = "ser_complex")]
    pub s: Complex64,
    /// Largest distance from an eigenvalue of the `dim − 5` truncation to the
    /// spectrum at `dim`.
    pub stability_gap: f64,
    pub basis_center: f64,
    pub domain_radius: f64,
}

pub fn spectrum(t: &TransferTruncation) -> Result<SpectrumReport> {
    let ev = eigenvalues(&t.matrix)?;
    let smaller = t.dim.saturating_sub(5).max(1);
    let gap = drift(&eigenvalues(&t.leading(smaller).matrix)?, &ev);
    Ok(SpectrumReport {
        eigenvalues: ev,
        dim: t.dim,
        s: t.s,
        stability_gap: gap,
        basis_center: BASIS_CENTER,
        domain_radius: DOMAIN_RADIUS,
    })
}

/// Null vector of `T − λ` from the smallest singular value, scaled so that
/// its leading coefficient is `1/2` (the value of `1/(1+z)` at `z = 1`).
pub fn eigenvector(t: &TransferTruncation, lambda: Complex64) -> Result<Vec<Complex64>> {
    let shifted = &t.matrix - DMatrix::from_diagonal_element(t.dim, t.dim, lambda);
    let svd = SVD::try_new(shifted, false, true, 1e-15, 100_000)
        .ok_or_else(|| Error::numeric("SVD did not converge"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::numeric("SVD returned no right singular vectors"))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &sv)| if sv < bv { (i, sv) } else { (bi, bv) });
    let row: Vec<Complex64> = v_t.row(idx).iter().map(|z| z.conj()).collect();
    if row[0].norm() < 1e-300 {
        return Err(Error::numeric("eigenvector has vanishing leading coefficient"));
    }
    let k = Complex64::new(0.5, 0.0) / row[0];
    Ok(row.into_iter().map(|z| z * k).collect())
}

/// Taylor coefficients `(−1)^k / 2^{k+1}` of `1/(1+z)` at `z = 1`.
pub fn gauss_density_coefficients(dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powi(k as i32 + 1))
        .collect()
}

/// `‖(T − I)v‖₂ / ‖v‖₂` for `v` the Gauss density coefficients.
pub fn gauss_density_residual(t: &TransferTruncation) -> f64 {
    let v = gauss_density_coefficients(t.dim);
    let mut num = 0.0;
    for j in 0..t.dim {
        let mut r = Complex64::new(-v[j], 0.0);
        for (k, &vk) in v.iter().enumerate() {
            r += t.matrix[(j, k)] * vk;
        }
        num += r.norm_sqr();
    }
    (num / v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FredholmDet {
    #[serde(serialize_with = "ser_complex")]
    pub s: Complex64,
    pub dim: usize,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// Estimate of the omitted factors from the geometric decay of `|λᵢ|`.
    pub tail_bound: f64,
}

/// `Π (1 − λᵢ²)` over the truncated spectrum.
pub fn fredholm_det(s: Complex64, dim: usize) -> Result<FredholmDet> {
    let ev = eigenvalues(&build_gkw(s, dim)?.matrix)?;
    Ok(fredholm_from_spectrum(s, &ev))
}

pub fn fredholm_from_spectrum(s: Complex64, ev: &[Complex64]) -> FredholmDet {
    let value = ev.iter().fold(Complex64::new(1.0, 0.0), |acc, l| acc * (1.0 - l * l));
    // ratio from the last few eigenvalues clear of rounding noise
    let reliable: Vec<f64> = ev.iter().map(|z| z.norm()).filter(|&m| m > 1e-13).collect();
    let tail_bound = match reliable.len() {
        0 | 1 => 0.0,
        n => {
            let window = &reliable[n.saturating_sub(6)..];
            let steps = (window.len() - 1) as f64;
            let ratio = (window[window.len() - 1] / window[0]).powf(1.0 / steps).min(0.99);
            let last = reliable[n - 1];
            let tail_sq = last * last * ratio * ratio / (1.0 - ratio * ratio);
            value.norm() * tail_sq.exp_m1()
        }
    };
    FredholmDet {
        s,
        dim: ev.len(),
        value,
        tail_bound,
    }
}

/// `Σ_{i≥1} λᵢ sⁱ` over the supplied spectrum.
pub fn hd_series(spectrum: &[f64], s: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = s;
    for &l in spectrum {
        acc += l * power;
        power *= s;
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Divergence(format!("Σ λᵢ sⁱ overflows at s = {s}")));
    }
    Ok(acc)
}

/// The diagonal model of `Ĥ_D`: values `H(|m + nτ_D|²)` over the lattice,
/// sorted descending and truncated to `dim` (padded with zeros).
pub fn hd_spectrum(cm: &CMModulus, step: &SmoothStep, dim: usize) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = enumerate_le(&cm.tau, step.r + step.eps, Form::Primal)?
        .into_iter()
        .map(|p| step.eval(quad_form(&cm.tau, p)))
        .filter(|&h| h > 0.0)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(dim, 0.0);
    Ok(values)
}

/// Index-wise `(max, ℓ²)` distance between two spectra; the shorter list is
/// padded with zeros.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    let n = a.len().max(b.len());
    let zero = Complex64::new(0.0, 0.0);
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for i in 0..n {
        let d = (a.get(i).copied().unwrap_or(zero) - b.get(i).copied().unwrap_or(zero)).norm();
        max = max.max(d);
        sq += d * d;
    }
    (max, sq.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub dim: usize,
    pub hd_spectrum: Vec<f64>,
    #[serde(serialize_with = "ser_complex")]
    pub hd_trace: Complex64,
    /// Spectrum of `exp(−Ĥ_D(s))`, i.e. `exp(−λᵢ sⁱ)`.
    #[serde(serialize_with = "ser_complex_vec")]
    pub exp_eigenvalues: Vec<Complex64>,
    #[serde(serialize_with = "ser_complex_vec")]
    pub gkw_eigenvalues: Vec<Complex64>,
    pub max_distance: f64,
    pub l2_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub d: u64,
    pub tau_convention: &'static str,
    /// The transfer operator is always taken at level 1.
    pub level: u32,
    pub ordering: &'static str,
    #[serde(serialize_with = "ser_complex")]
    pub s: Complex64,
    pub step: SmoothStep,
    pub rows: Vec<ConjectureRow>,
}

/// Side-by-side spectra of `exp(−Ĥ_D(s))` and `L_s` with no verdict.
pub fn conjecture_compare(d: u64, s: Complex64, dims: &[usize], step: &SmoothStep) -> Result<ConjectureReport> {
    check_s(s)?;
    let cm = CMModulus::new(d)?;
    let mut rows = Vec::with_capacity(dims.len());
    for &dim in dims {
        let hd = hd_spectrum(&cm, step, dim)?;
        let hd_trace = hd_series(&hd, s)?;
        let mut power = s;
        let mut exp_ev = Vec::with_capacity(dim);
        for &l in &hd {
            exp_ev.push((-l * power).exp());
            power *= s;
        }
        sort_spectrum(&mut exp_ev);
        let gkw = spectrum(&build_gkw(s, dim)?)?.eigenvalues;
        let (max_distance, l2_distance) = spectral_distance(&exp_ev, &gkw);
        rows.push(ConjectureRow {
            dim,
            hd_spectrum: hd,
            hd_trace,
            exp_eigenvalues: exp_ev,
            gkw_eigenvalues: gkw,
            max_distance,
            l2_distance,
        });
    }
    Ok(ConjectureReport {
        d,
        tau_convention: cm.convention(),
        level: 1,
        ordering: "descending",
        s,
        step: *step,
        rows,
    })
}

/// Rows `index, re, im, modulus`.
pub fn write_eigenvalue_csv<W: Write>(ev: &[Complex64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "re", "im", "modulus"])?;
    for (i, z) in ev.iter().enumerate() {
        w.write_record([(i + 1).to_string(), z.re.to_string(), z.im.to_string(), z.norm().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
