//! Pseudo-lattices `Λ = μ(Z + θZ)`: the GL(2, Z) action on θ, equivalence by
//! continued-fraction tails, the index bijection between `L_τ` and `Λ`, and
//! the Bratteli data of the Effros–Shen tower.

use std::io::Write;

use serde::Serialize;

use crate::contfrac::{cf_expand_interval, convergents, CfExpansion, CfTermination, Convergent, RealInterval};
use crate::error::{Error, Result};
use crate::lattice::{ComplexModulus, LatticePoint};

/// Quotients requested when a pseudo-lattice caches its expansion.
pub const DEFAULT_CF_DEPTH: usize = 80;
/// An expansion that runs out of precision before this many quotients is
/// treated as rational.
const MIN_IRRATIONAL_QUOTIENTS: usize = 8;

/// A rational approximant `p/q` of an irrational `θ`, with `θ` itself kept
/// for constructions that refer to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximant {
    pub p: i64,
    pub q: i64,
    pub theta: f64,
}

impl Approximant {
    pub fn new(p: i64, q: i64, theta: f64) -> Result<Self> {
        if q < 2 || p <= 0 || p >= q {
            return Err(Error::domain(format!("need 0 < p < q and q ≥ 2, got {p}/{q}")));
        }
        if num_integer::gcd(p, q) != 1 {
            return Err(Error::domain(format!("{p}/{q} is not in lowest terms")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::domain(format!("θ must lie in (0, 1), got {theta}")));
        }
        Ok(Self { p, q, theta })
    }

    /// `θ = p/q` exactly.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        Self::new(p, q, p as f64 / q as f64)
    }

    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PseudoLattice {
    pub mu: f64,
    pub theta: f64,
    #[serde(skip)]
    theta_interval: RealInterval,
    pub cf: CfExpansion,
    pub convergents: Vec<Convergent>,
}

impl PseudoLattice {
    /// `μ(Z + θZ)`; `θ` is reduced to `(0, 1)` by dropping its integer part.
    pub fn new(mu: f64, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::domain("θ must be finite"));
        }
        let interval = RealInterval::from_f64(theta)?;
        Self::from_interval(mu, &interval, DEFAULT_CF_DEPTH)
    }

    pub fn from_interval(mu: f64, theta: &RealInterval, depth: usize) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!("μ must be positive, got {mu}")));
        }
        let theta_interval = theta.fractional_part()?;
        let cf = cf_expand_interval(&theta_interval, depth)?;
        let looks_rational = match cf.termination {
            CfTermination::Rational => true,
            CfTermination::Precision => cf.quotients.len() < MIN_IRRATIONAL_QUOTIENTS,
            CfTermination::Depth => false,
        };
        if looks_rational {
            return Err(Error::domain(format!(
                "θ = {} is rational at working precision ({:?})",
                theta_interval.midpoint_f64(),
                cf.quotients
            )));
        }
        // deep convergents may leave the 128-bit range; keep the ones that fit
        let mut convergents_list = Vec::new();
        for len in (1..=cf.quotients.len()).rev() {
            if let Ok(c) = convergents(&cf.quotients[..len]) {
                convergents_list = c;
                break;
            }
        }
        Ok(Self {
            mu,
            theta: theta_interval.midpoint_f64(),
            theta_interval,
            cf,
            convergents: convergents_list,
        })
    }

    /// `θ` chosen as the fractional part of `policy(τ)`. The map from complex
    /// tori to θ is not computable in closed form, so callers supply it.
    pub fn from_policy(mu: f64, tau: &ComplexModulus, policy: impl Fn(&ComplexModulus) -> f64) -> Result<Self> {
        let raw = policy(tau);
        Self::new(mu, raw - raw.floor())
    }

    pub fn theta_interval(&self) -> &RealInterval {
        &self.theta_interval
    }

    /// The convergent `p_k/q_k` (`k ≥ 1`).
    pub fn approximant(&self, k: usize) -> Result<Approximant> {
        let c = self
            .convergents
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::domain(format!("convergent {k} not available")))?;
        self.to_approximant(c)
    }

    /// The first convergent with `q_k ≥ q_min` and `q_k ≥ 2`.
    pub fn approximant_at_least(&self, q_min: i64) -> Result<Approximant> {
        let c = self
            .convergents
            .iter()
            .find(|c| c.q >= i128::from(q_min.max(2)) && c.p > 0)
            .ok_or_else(|| Error::domain(format!("no convergent with q ≥ {q_min}")))?;
        self.to_approximant(c)
    }

    fn to_approximant(&self, c: &Convergent) -> Result<Approximant> {
        let p = i64::try_from(c.p).map_err(|_| Error::numeric("convergent exceeds 64-bit range"))?;
        let q = i64::try_from(c.q).map_err(|_| Error::numeric("convergent exceeds 64-bit range"))?;
        Approximant::new(p, q, self.theta)
    }
}

/// `μ(m + nθ)`.
pub fn pseudo_point(lattice: &PseudoLattice, m: i64, n: i64) -> f64 {
    lattice.mu * (m as f64 + n as f64 * lattice.theta)
}

/// An integer 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntMatrix2(pub [[i64; 2]; 2]);

impl IntMatrix2 {
    pub const IDENTITY: IntMatrix2 = IntMatrix2([[1, 0], [0, 1]]);

    pub fn det(&self) -> i64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn mul(&self, other: &IntMatrix2) -> IntMatrix2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = other.0;
        IntMatrix2([[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]])
    }

    fn check_unimodular(&self) -> Result<()> {
        let det = self.det();
        if det != 1 && det != -1 {
            return Err(Error::domain(format!("matrix determinant {det} is not ±1")));
        }
        Ok(())
    }
}

/// `(aθ + b)/(cθ + d)` for `|det M| = 1`.
pub fn gl2z_act(m: &IntMatrix2, theta: f64) -> Result<f64> {
    m.check_unimodular()?;
    let [[a, b], [c, d]] = m.0;
    let den = c as f64 * theta + d as f64;
    if den == 0.0 {
        return Err(Error::domain("cθ + d = 0"));
    }
    Ok((a as f64 * theta + b as f64) / den)
}

/// The same action on an enclosing interval, exactly.
pub fn gl2z_act_interval(m: &IntMatrix2, theta: &RealInterval) -> Result<RealInterval> {
    m.check_unimodular()?;
    let [[a, b], [c, d]] = m.0;
    theta.mobius(a, b, c, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailEquivalence {
    pub equivalent: bool,
    /// Shifts `(i, j)` with `a_{i+k}(θ₁) = a_{j+k}(θ₂)` for `k = 1..=depth`.
    pub witness: Option<(usize, usize)>,
    /// Too few reliable quotients to decide at this depth.
    pub inconclusive: bool,
}

/// Searches shifts `i, j ≤ depth` for which the quotient streams of `{θ₁}`
/// and `{θ₂}` agree on `depth` further terms.
pub fn tail_equivalent_interval(t1: &RealInterval, t2: &RealInterval, depth: usize) -> Result<TailEquivalence> {
    if depth < 1 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let a = cf_expand_interval(&t1.fractional_part()?, 2 * depth)?;
    let b = cf_expand_interval(&t2.fractional_part()?, 2 * depth)?;
    let (qa, qb) = (&a.quotients, &b.quotients);
    let mut short = false;
    for total in 0..=2 * depth {
        // smallest i + j first, then smallest i
        for i in 0..=total.min(depth) {
            let j = total - i;
            if j > depth {
                continue;
            }
            if i + depth > qa.len() || j + depth > qb.len() {
                let exhausted = |cf: &CfExpansion, need: usize| cf.termination != CfTermination::Rational && need > cf.quotients.len();
                short |= exhausted(&a, i + depth) || exhausted(&b, j + depth);
                continue;
            }
            if qa[i..i + depth] == qb[j..j + depth] {
                return Ok(TailEquivalence {
                    equivalent: true,
                    witness: Some((i, j)),
                    inconclusive: false,
                });
            }
        }
    }
    Ok(TailEquivalence {
        equivalent: false,
        witness: None,
        inconclusive: short,
    })
}

pub fn tail_equivalent(theta1: f64, theta2: f64, depth: usize) -> Result<TailEquivalence> {
    tail_equivalent_interval(&RealInterval::from_f64(theta1)?, &RealInterval::from_f64(theta2)?, depth)
}

/// Level `k` of the Effros–Shen tower `M_{q_k} ⊕ M_{q_{k−1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BratteliLevel {
    pub k: usize,
    pub a_k: u64,
    pub dims: (i128, i128),
}

/// Levels `1..=k` built from the convergent denominators; level `k` arises
/// from level `k − 1` through the incidence matrix `[[a_k, 1], [1, 0]]`.
pub fn effros_shen_levels(cf: &[u64], k: usize) -> Result<Vec<BratteliLevel>> {
    if k < 1 {
        return Err(Error::domain("level must be at least 1"));
    }
    if cf.len() < k {
        return Err(Error::domain(format!("level {k} needs {k} partial quotients, have {}", cf.len())));
    }
    let conv = convergents(&cf[..k])?;
    let mut prev_q = 1i128;
    Ok(conv
        .iter()
        .map(|c| {
            let level = BratteliLevel {
                k: c.k,
                a_k: c.a,
                dims: (c.q, prev_q),
            };
            prev_q = c.q;
            level
        })
        .collect())
}

/// Writes rows `k, a_k, p_k, q_k`.
pub fn write_convergents_csv<W: Write>(rows: &[Convergent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "a_k", "p_k", "q_k"])?;
    for c in rows {
        w.write_record([c.k.to_string(), c.a.to_string(), c.p.to_string(), c.q.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Which coordinate of `(m, n)` multiplies θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `(m, n) ↦ μ(m + nθ)`.
    Standard,
    /// `(m, n) ↦ μ(n + mθ)`.
    Swapped,
}

/// The correspondence between lattice indices of `L_τ` and points of
/// `μ(Z + θZ)`, restricted to `|m|, |n| ≤ window` for the inverse search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexBijection {
    pub mu: f64,
    pub theta: f64,
    pub direction: Direction,
    pub window: i64,
}

impl IndexBijection {
    pub fn new(lattice: &PseudoLattice, direction: Direction, window: i64) -> Result<Self> {
        if window < 0 {
            return Err(Error::domain("window must be nonnegative"));
        }
        Ok(Self {
            mu: lattice.mu,
            theta: lattice.theta,
            direction,
            window,
        })
    }

    /// The integer and θ coefficients of the image of `p`.
    pub fn coefficients(&self, p: LatticePoint) -> (i64, i64) {
        match self.direction {
            Direction::Standard => (p.m, p.n),
            Direction::Swapped => (p.n, p.m),
        }
    }

    pub fn forward(&self, p: LatticePoint) -> f64 {
        let (int, mult) = self.coefficients(p);
        self.mu * (int as f64 + mult as f64 * self.theta)
    }

    /// The index `p` in the window whose image is nearest to `beta`; fails when
    /// none lies within a relative `1e-9` of it.
    pub fn inverse(&self, beta: f64) -> Result<LatticePoint> {
        let y = beta / self.mu;
        let mut best: Option<(f64, i64, i64)> = None;
        for mult in -self.window..=self.window {
            let int = (y - mult as f64 * self.theta).round();
            if int.abs() > self.window as f64 {
                continue;
            }
            let err = (int + mult as f64 * self.theta - y).abs();
            if best.is_none_or(|b| err < b.0) {
                best = Some((err, int as i64, mult));
            }
        }
        let tol = 1e-9 * (1.0 + y.abs());
        match best {
            Some((err, int, mult)) if err <= tol => Ok(match self.direction {
                Direction::Standard => LatticePoint::new(int, mult),
                Direction::Swapped => LatticePoint::new(mult, int),
            }),
            _ => Err(Error::domain(format!("{beta} is not a pseudo-lattice point within the window"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> PseudoLattice {
        PseudoLattice::from_interval(1.0, &RealInterval::golden(), 60).unwrap()
    }

    #[test]
    fn pseudo_point_examples() {
        let g = golden();
        assert_eq!(pseudo_point(&g, 0, 0), 0.0);
        assert!((pseudo_point(&g, 1, 1) - 1.618_034).abs() < 1e-6);
        let two = PseudoLattice::new(2.0, 0.3819).unwrap();
        assert_eq!(pseudo_point(&two, 1, 0), 2.0);
    }

    #[test]
    fn theta_is_normalised() {
        let l = PseudoLattice::new(1.0, 2f64.sqrt()).unwrap();
        assert!((l.theta - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(l.cf.quotients.iter().take(15).all(|&a| a == 2));
        assert!(PseudoLattice::new(1.0, 0.25).is_err());
        assert!(PseudoLattice::new(0.0, 0.3).is_err());
    }

    #[test]
    fn gl2z_examples() {
        let t = 0.377;
        assert_eq!(gl2z_act(&IntMatrix2::IDENTITY, t).unwrap(), t);
        assert_eq!(gl2z_act(&IntMatrix2([[1, 1], [0, 1]]), t).unwrap(), t + 1.0);
        let s = 2f64.sqrt() - 1.0;
        let swapped = gl2z_act(&IntMatrix2([[0, 1], [1, 0]]), s).unwrap();
        assert!((swapped - (2f64.sqrt() + 1.0)).abs() < 1e-14);
        assert!(gl2z_act(&IntMatrix2([[2, 0], [0, 1]]), t).is_err());
        assert!(gl2z_act(&IntMatrix2([[1, 0], [1, -1]]), 1.0).is_err());
    }

    #[test]
    fn tail_examples() {
        let g = RealInterval::golden();
        let s = RealInterval::silver();
        let same = tail_equivalent_interval(&g, &g, 10).unwrap();
        assert_eq!(same.witness, Some((0, 0)));
        let inv = gl2z_act_interval(&IntMatrix2([[0, 1], [1, 2]]), &s).unwrap();
        assert!(tail_equivalent_interval(&s, &inv, 10).unwrap().equivalent);
        let diff = tail_equivalent_interval(&g, &s, 10).unwrap();
        assert!(!diff.equivalent && !diff.inconclusive);
        let f = tail_equivalent((5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0, 10).unwrap();
        assert!(!f.equivalent);
    }

    #[test]
    fn tail_witness_reports_shift() {
        // [0; 3, 1, 1, 1, ...] has the golden tail after one quotient
        let g = RealInterval::golden();
        let shifted = gl2z_act_interval(&IntMatrix2([[0, 1], [1, 3]]), &g).unwrap();
        let t = tail_equivalent_interval(&shifted, &g, 8).unwrap();
        assert_eq!(t.witness, Some((1, 0)));
    }

    #[test]
    fn effros_shen_examples() {
        let g = golden();
        let levels = effros_shen_levels(&g.cf.quotients, 5).unwrap();
        assert_eq!(levels.last().unwrap().dims, (8, 5));
        let s = PseudoLattice::from_interval(1.0, &RealInterval::silver(), 40).unwrap();
        assert_eq!(effros_shen_levels(&s.cf.quotients, 2).unwrap()[1].dims, (5, 2));
        assert_eq!(effros_shen_levels(&s.cf.quotients, 1).unwrap()[0].dims, (2, 1));
        for w in levels.windows(3) {
            let (a, lv1, lv2) = (i128::from(w[2].a_k), w[1].dims, w[0].dims);
            assert_eq!(w[2].dims.0, a * lv1.0 + lv2.0);
            assert_eq!(w[2].dims.1, a * lv1.1 + lv2.1);
        }
        assert!(effros_shen_levels(&[1, 1], 0).is_err());
    }

    #[test]
    fn bijection_round_trip() {
        let g = golden();
        for direction in [Direction::Standard, Direction::Swapped] {
            let bij = IndexBijection::new(&g, direction, 12).unwrap();
            for m in -12..=12 {
                for n in -12..=12 {
                    let p = LatticePoint::new(m, n);
                    assert_eq!(bij.inverse(bij.forward(p)).unwrap(), p);
                }
            }
        }
    }

    #[test]
    fn approximants_follow_convergents() {
        let g = golden();
        let a = g.approximant_at_least(300).unwrap();
        assert_eq!((a.p, a.q), (233, 377));
        assert!((a.theta - g.theta).abs() == 0.0);
        assert_eq!(g.approximant(5).unwrap().q, 8);
        assert!(Approximant::new(2, 4, 0.5).is_err());
        assert!(Approximant::new(0, 5, 0.5).is_err());
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_convergents_csv(&convergents(&[2, 2]).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,a_k,p_k,q_k\n1,2,1,2\n2,2,2,5\n");
    }
}
