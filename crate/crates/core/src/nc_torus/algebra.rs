//! Clock/shift representations of the rotation algebra at a rational
//! rotation number, and elements stored as finite sums `Σ_k M_{g_k} S^k`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// The pair `U = diag(e^{2πijp/q})`, `V e_j = e_{j−1}` on `C^q`, so that
/// `VU = e^{2πip/q} UV`.
///
/// `U` is multiplication by `e^{2πix}` on the orbit `x_j = {jp/q}`, and the
/// shift `S = V⁻¹` conjugates `M_g` into `M_{g(· − p/q)}`.
#[derive(Debug, Clone)]
pub struct TorusRep {
    pub p: i64,
    pub q: usize,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

pub fn build_rep(p: i64, q: i64) -> Result<TorusRep> {
    if q < 2 || p <= 0 || p >= q {
        return Err(Error::domain(format!("need 0 < p < q and q ≥ 2, got {p}/{q}")));
    }
    if num_integer::gcd(p, q) != 1 {
        return Err(Error::domain(format!("p = {p} and q = {q} are not coprime")));
    }
    let qs = q as usize;
    let omega = |k: i64| Complex64::from_polar(1.0, 2.0 * PI * ((k * p).rem_euclid(q)) as f64 / q as f64);
    let u = DMatrix::from_fn(qs, qs, |i, j| if i == j { omega(i as i64) } else { Complex64::new(0.0, 0.0) });
    let v = DMatrix::from_fn(qs, qs, |i, j| {
        if i == (j + qs - 1) % qs {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(TorusRep { p, q: qs, u, v })
}

impl TorusRep {
    /// `max |VU − e^{2πip/q} UV|`.
    pub fn commutation_defect(&self) -> f64 {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI * self.p as f64 / self.q as f64);
        let lhs = &self.v * &self.u;
        let rhs = (&self.u * &self.v) * zeta;
        max_abs(&(lhs - rhs))
    }

    /// `max(|U*U − I|, |V*V − I|)`.
    pub fn unitarity_defect(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.q, self.q);
        let du = max_abs(&(self.u.adjoint() * &self.u - &id));
        let dv = max_abs(&(self.v.adjoint() * &self.v - &id));
        du.max(dv)
    }

    /// Normalised trace `(1/q) Σ X_jj`.
    pub fn trace(&self, x: &DMatrix<Complex64>) -> Complex64 {
        let re: CompensatedSum = (0..self.q).map(|i| x[(i, i)].re).collect();
        let im: CompensatedSum = (0..self.q).map(|i| x[(i, i)].im).collect();
        Complex64::new(re.value(), im.value()) / self.q as f64
    }

    /// The orbit point `x_j = {jp/q}` carried by basis vector `e_j`.
    pub fn orbit_point(&self, j: usize) -> f64 {
        ((j as i64 * self.p).rem_euclid(self.q as i64)) as f64 / self.q as f64
    }

    /// `M_g` as a dense matrix.
    pub fn multiplication(&self, g: &SampledCircleFunction) -> Result<DMatrix<Complex64>> {
        let d = g.on_orbit(self.p, self.q)?;
        Ok(DMatrix::from_fn(self.q, self.q, |i, j| {
            if i == j {
                Complex64::new(d[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A real function on the circle sampled at `k/q`, `k = 0..q−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCircleFunction {
    samples: Vec<f64>,
}

impl SampledCircleFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("need at least one sample"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(q: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..q).map(|k| g(k as f64 / q as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Periodic indexing.
    pub fn at(&self, k: i64) -> f64 {
        self.samples[k.rem_euclid(self.samples.len() as i64) as usize]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The diagonal of `M_g` in the basis `e_j`: entry `j` is `g({jp/q})`.
    pub fn on_orbit(&self, p: i64, q: usize) -> Result<Vec<f64>> {
        if self.samples.len() != q {
            return Err(Error::usage(format!("symbol has {} samples, representation size is {q}", self.samples.len())));
        }
        Ok((0..q).map(|j| self.at(j as i64 * p)).collect())
    }
}

/// `X = Σ_k M_{g_k} S^k` on `C^q`, with `k` taken mod `q` and `g_k` stored as
/// its diagonal in the basis `e_j`.
///
/// Since `(S^k ξ)_j = ξ_{j−k}`, the term `M_g S^k` occupies the entries
/// `(j, j − k)`, and distinct shifts never share an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPoly {
    q: usize,
    terms: BTreeMap<usize, Vec<f64>>,
}

impl ShiftPoly {
    pub fn zero(q: usize) -> Self {
        Self {
            q,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(q: usize) -> Self {
        Self::diagonal(vec![1.0; q])
    }

    pub fn diagonal(d: Vec<f64>) -> Self {
        Self::monomial(d, 0)
    }

    /// `M_g S^k` with `g` given by its diagonal.
    pub fn monomial(d: Vec<f64>, k: i64) -> Self {
        let q = d.len();
        let mut terms = BTreeMap::new();
        if d.iter().any(|&x| x != 0.0) {
            terms.insert(k.rem_euclid(q as i64) as usize, d);
        }
        Self { q, terms }
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn coefficient(&self, k: i64) -> Option<&[f64]> {
        self.terms.get(&(k.rem_euclid(self.q as i64) as usize)).map(Vec::as_slice)
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    fn check_size(&self, other: &ShiftPoly) -> Result<()> {
        if self.q != other.q {
            return Err(Error::usage(format!("sizes differ: {} vs {}", self.q, other.q)));
        }
        Ok(())
    }

    pub fn add(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.check_size(other)?;
        let mut terms = self.terms.clone();
        for (&k, h) in &other.terms {
            let e = terms.entry(k).or_insert_with(|| vec![0.0; self.q]);
            for (a, b) in e.iter_mut().zip(h) {
                *a += b;
            }
        }
        Ok(ShiftPoly { q: self.q, terms })
    }

    pub fn sub(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> ShiftPoly {
        ShiftPoly {
            q: self.q,
            terms: self
                .terms
                .iter()
                .map(|(&k, g)| (k, g.iter().map(|x| c * x).collect()))
                .collect(),
        }
    }

    /// `(M_g S^k)(M_h S^l) = M_{g · h_{· − k}} S^{k+l}`.
    pub fn mul(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.check_size(other)?;
        let q = self.q;
        let mut terms: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (&k, g) in &self.terms {
            for (&l, h) in &other.terms {
                let e = terms.entry((k + l) % q).or_insert_with(|| vec![0.0; q]);
                for j in 0..q {
                    e[j] += g[j] * h[(j + q - k) % q];
                }
            }
        }
        Ok(ShiftPoly { q, terms })
    }

    /// `(M_g S^k)* = M_{g_{· + k}} S^{−k}`.
    pub fn adjoint(&self) -> ShiftPoly {
        let q = self.q;
        let terms = self
            .terms
            .iter()
            .map(|(&k, g)| ((q - k) % q, (0..q).map(|j| g[(j + k) % q]).collect()))
            .collect();
        ShiftPoly { q, terms }
    }

    /// Normalised trace: only the `S⁰` term has a diagonal.
    pub fn trace(&self) -> f64 {
        self.terms
            .get(&0)
            .map_or(0.0, |g| g.iter().copied().collect::<CompensatedSum>().value() / self.q as f64)
    }

    /// `‖X‖₂ = tr(X*X)^{1/2}`, the normalised Hilbert–Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        let s: CompensatedSum = self.terms.values().flatten().map(|x| x * x).collect();
        (s.value() / self.q as f64).sqrt()
    }

    /// `max |X_ij|`.
    pub fn max_entry(&self) -> f64 {
        self.terms.values().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `max |X − X*|` entrywise.
    pub fn adjoint_defect(&self) -> f64 {
        self.sub(&self.adjoint()).map_or(f64::INFINITY, |d| d.max_entry())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let q = self.q;
        let mut m = DMatrix::zeros(q, q);
        for (&k, g) in &self.terms {
            for j in 0..q {
                m[(j, (j + q - k) % q)] += g[j];
            }
        }
        m
    }
}
