//! Regular continued fractions computed in exact rational interval
//! arithmetic, and their convergents.
//!
//! A real input is carried as a rational interval `[lo, hi]` known to contain
//! it. Each partial quotient is emitted only when `⌊1/x⌋` agrees at both ends,
//! so a quotient is never produced from rounding noise.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// A closed rational interval containing a real number.
#[derive(Clone, PartialEq, Eq)]
pub struct RealInterval {
    lo: BigRational,
    hi: BigRational,
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealInterval[{:e}, width {:e}]", self.midpoint_f64(), self.width_f64())
    }
}

fn pow10(d: usize) -> BigInt {
    num_traits::pow(BigInt::from(10u32), d)
}

impl RealInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain("interval endpoints out of order"));
        }
        Ok(Self { lo, hi })
    }

    pub fn exact(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    /// The set of reals that round to `x`: `x` widened by half an ulp per side.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("expected a finite number, got {x}")));
        }
        let exact = |v: f64| BigRational::from_float(v).expect("finite float");
        let two = BigRational::from_integer(BigInt::from(2));
        let centre = exact(x);
        let lo = (&centre + exact(x.next_down())) / &two;
        let hi = (&centre + exact(x.next_up())) / &two;
        Ok(Self { lo, hi })
    }

    /// A decimal literal such as `0.14159...`; a literal with `d` fractional
    /// digits is widened by `10^{−d}` on each side.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let valid = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !valid(int_part) || !valid(frac_part) {
            return Err(Error::domain(format!("not a decimal number: {s:?}")));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
        if neg {
            numer = -numer;
        }
        let denom = pow10(frac_part.len());
        let value = BigRational::new(numer, denom.clone());
        let slack = BigRational::new(BigInt::one(), denom);
        Ok(Self {
            lo: &value - &slack,
            hi: value + slack,
        })
    }

    /// `(√5 − 1)/2` to 60 digits.
    pub fn golden() -> Self {
        Self::quadratic_surd(5, 1, 2)
    }

    /// `√2 − 1` to 60 digits.
    pub fn silver() -> Self {
        Self::quadratic_surd(2, 1, 1)
    }

    /// `(√d − shift)/div` with `√d` bracketed by integer square roots at 60 digits.
    fn quadratic_surd(d: u32, shift: i64, div: i64) -> Self {
        const DIGITS: usize = 60;
        let scale = pow10(DIGITS);
        let radicand = BigUint::from(d) * num_traits::pow(BigUint::from(10u32), 2 * DIGITS);
        let root = BigInt::from(radicand.sqrt());
        let make = |r: BigInt| {
            (BigRational::new(r, scale.clone()) - BigRational::from_integer(BigInt::from(shift)))
                / BigRational::from_integer(BigInt::from(div))
        };
        Self {
            lo: make(root.clone()),
            hi: make(root + 1),
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn midpoint_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    pub fn width_f64(&self) -> f64 {
        (&self.hi - &self.lo).to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// `k · x` for an integer `k`.
    pub fn scale(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    /// Subtracts the common integer part of both endpoints.
    ///
    /// Fails when the interval straddles an integer.
    pub fn fractional_part(&self) -> Result<Self> {
        let f = self.lo.floor();
        if self.hi.floor() != f {
            return Err(Error::domain("interval straddles an integer; fractional part undetermined"));
        }
        Ok(Self {
            lo: &self.lo - &f,
            hi: &self.hi - f,
        })
    }

    /// Image under the Möbius map `x ↦ (ax + b)/(cx + d)`; fails when the pole
    /// `cx + d = 0` can lie in the interval.
    pub fn mobius(&self, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let r = |v: i64| BigRational::from_integer(BigInt::from(v));
        let den = |x: &BigRational| r(c) * x + r(d);
        let (dl, dh) = (den(&self.lo), den(&self.hi));
        if dl.is_zero() || dh.is_zero() || dl.is_positive() != dh.is_positive() {
            return Err(Error::domain("cθ + d vanishes on the input"));
        }
        let map = |x: &BigRational| (r(a) * x + r(b)) / den(x);
        // monotone away from the pole
        let (u, v) = (map(&self.lo), map(&self.hi));
        Ok(if u <= v { Self { lo: u, hi: v } } else { Self { lo: v, hi: u } })
    }
}

/// Why an expansion stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CfTermination {
    /// The requested number of quotients was produced.
    Depth,
    /// A remainder vanished exactly: the input is rational.
    Rational,
    /// The input interval no longer determines the next quotient, so the input
    /// is indistinguishable from a rational at its precision. The last quotient
    /// is the one of the interval's lower end.
    Precision,
}

/// Partial quotients `a₁, a₂, ...` of `x = [0; a₁, a₂, ...]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfExpansion {
    pub quotients: Vec<u64>,
    pub termination: CfTermination,
}

impl CfExpansion {
    /// True when the expansion stopped early because the input is, or cannot be
    /// told apart from, a rational.
    pub fn rational_flag(&self) -> bool {
        self.termination != CfTermination::Depth
    }
}

fn floor_u64(x: &BigRational) -> Option<u64> {
    x.floor().to_integer().to_u64()
}

/// Continued fraction of a real `x ∈ (0, 1)` given by an enclosing interval.
pub fn cf_expand_interval(x: &RealInterval, depth: usize) -> Result<CfExpansion> {
    if depth < 1 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let mut centre = x.midpoint();
    if !(centre.is_positive() && centre < BigRational::one()) {
        return Err(Error::domain(format!("expected x in (0, 1), got {}", x.midpoint_f64())));
    }
    let mut lo = x.lo.clone();
    let mut hi = x.hi.clone();
    let mut quotients = Vec::new();
    while quotients.len() < depth {
        if !lo.is_positive() {
            return Ok(CfExpansion {
                quotients,
                termination: CfTermination::Precision,
            });
        }
        let (inv_lo, inv_hi) = (hi.recip(), lo.recip());
        let (a_min, a_max) = (floor_u64(&inv_lo), floor_u64(&inv_hi));
        let a = match (a_min, a_max) {
            (Some(a), Some(b)) if a == b => a,
            (_, last) => {
                if let Some(b) = last {
                    quotients.push(b);
                }
                return Ok(CfExpansion {
                    quotients,
                    termination: CfTermination::Precision,
                });
            }
        };
        quotients.push(a);
        let a_r = BigRational::from_integer(BigInt::from(a));
        centre = centre.recip() - &a_r;
        if centre.is_zero() {
            return Ok(CfExpansion {
                quotients,
                termination: CfTermination::Rational,
            });
        }
        lo = inv_lo - &a_r;
        hi = inv_hi - a_r;
    }
    Ok(CfExpansion {
        quotients,
        termination: CfTermination::Depth,
    })
}

/// Continued fraction of a double, read as the interval of reals that round
/// to it.
pub fn cf_expand(x: f64, depth: usize) -> Result<CfExpansion> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("expected x in (0, 1), got {x}")));
    }
    cf_expand_interval(&RealInterval::from_f64(x)?, depth)
}

/// A convergent `p_k / q_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: usize,
    pub a: u64,
    pub p: i128,
    pub q: i128,
}

/// Convergents `p_k/q_k` of `[0; a₁, ..., a_n]` for `k = 1..n`, from
/// `p₋₁ = 1, q₋₁ = 0, p₀ = 0, q₀ = 1`.
pub fn convergents(cf: &[u64]) -> Result<Vec<Convergent>> {
    if cf.is_empty() {
        return Err(Error::usage("continued fraction must be nonempty"));
    }
    let overflow = || Error::numeric("convergent exceeds 128-bit range");
    let (mut p_prev, mut q_prev) = (1i128, 0i128);
    let (mut p, mut q) = (0i128, 1i128);
    let mut out = Vec::with_capacity(cf.len());
    for (i, &a) in cf.iter().enumerate() {
        let a_i = i128::from(a);
        let p_next = a_i.checked_mul(p).and_then(|x| x.checked_add(p_prev)).ok_or_else(overflow)?;
        let q_next = a_i.checked_mul(q).and_then(|x| x.checked_add(q_prev)).ok_or_else(overflow)?;
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        out.push(Convergent { k: i + 1, a, p, q });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    /// Euclid on the big-integer numerator/denominator of a decimal truncation.
    fn euclid_oracle(numer: &str, digits: usize, depth: usize) -> Vec<u64> {
        let mut a: BigInt = numer.parse().unwrap();
        let mut b = pow10(digits);
        let mut out = Vec::new();
        // x = a / b, expand b / a repeatedly
        while out.len() < depth && !a.is_zero() {
            let (quot, rem) = b.div_rem(&a);
            out.push(quot.to_u64().unwrap());
            b = a;
            a = rem;
        }
        out
    }

    const PI_FRAC: &str = "14159265358979323846264338327950288419716939937510";

    #[test]
    fn golden_is_all_ones() {
        let cf = cf_expand_interval(&RealInterval::golden(), 60).unwrap();
        assert_eq!(cf.termination, CfTermination::Depth);
        assert!(cf.quotients.iter().all(|&a| a == 1));
        let cf = cf_expand((5f64.sqrt() - 1.0) / 2.0, 30).unwrap();
        assert_eq!(cf.quotients, vec![1; 30]);
    }

    #[test]
    fn silver_is_all_twos() {
        let cf = cf_expand_interval(&RealInterval::silver(), 50).unwrap();
        assert_eq!(cf.quotients, vec![2; 50]);
        assert_eq!(cf_expand(2f64.sqrt() - 1.0, 15).unwrap().quotients, vec![2; 15]);
    }

    #[test]
    fn pi_matches_euclid_oracle() {
        let x = RealInterval::parse_decimal(&format!("0.{PI_FRAC}")).unwrap();
        let cf = cf_expand_interval(&x, 4).unwrap();
        assert_eq!(cf.quotients, vec![7, 15, 1, 292]);
        let deep = cf_expand_interval(&x, 30).unwrap();
        assert_eq!(deep.quotients, euclid_oracle(PI_FRAC, 50, 30));
        assert_eq!(cf_expand(std::f64::consts::PI - 3.0, 4).unwrap().quotients, vec![7, 15, 1, 292]);
    }

    #[test]
    fn rationals_are_flagged() {
        let third = RealInterval::exact(BigRational::new(1.into(), 3.into()));
        let cf = cf_expand_interval(&third, 10).unwrap();
        assert_eq!(cf.quotients, vec![3]);
        assert_eq!(cf.termination, CfTermination::Rational);
        let cf = cf_expand(1.0 / 7.0, 10).unwrap();
        assert_eq!(cf.quotients, vec![7]);
        assert!(cf.rational_flag());
        let cf = cf_expand(0.5, 10).unwrap();
        assert_eq!(cf.quotients, vec![2]);
    }

    #[test]
    fn rejects_outside_unit_interval() {
        for x in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(cf_expand(x, 3).is_err(), "{x}");
        }
        assert!(cf_expand(0.3, 0).is_err());
    }

    #[test]
    fn convergent_examples() {
        let pq = |v: Vec<Convergent>| v.iter().map(|c| (c.p, c.q)).collect::<Vec<_>>();
        assert_eq!(
            pq(convergents(&[1, 1, 1, 1, 1]).unwrap()),
            vec![(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]
        );
        assert_eq!(pq(convergents(&[2, 2]).unwrap()), vec![(1, 2), (2, 5)]);
        assert_eq!(pq(convergents(&[7]).unwrap()), vec![(1, 7)]);
        assert!(convergents(&[]).is_err());
        assert!(convergents(&[u64::MAX; 8]).is_err());
    }

    #[test]
    fn reconstruction_error_below_one_over_q_squared() {
        let x = RealInterval::parse_decimal(&format!("0.{PI_FRAC}")).unwrap();
        let cf = cf_expand_interval(&x, 20).unwrap();
        let mid = x.midpoint();
        for c in convergents(&cf.quotients).unwrap() {
            let approx = BigRational::new(c.p.into(), c.q.into());
            let err = (&mid - approx).abs();
            let bound = BigRational::new(1.into(), (c.q * c.q).into());
            assert!(err < bound, "k={}", c.k);
        }
    }

    #[test]
    fn decimal_parsing() {
        let x = RealInterval::parse_decimal("0.25").unwrap();
        assert_eq!(x.midpoint(), BigRational::new(1.into(), 4.into()));
        assert!((x.width_f64() - 0.02).abs() < 1e-15);
        assert!(RealInterval::parse_decimal("0.2.5").is_err());
        assert!(RealInterval::parse_decimal("abc").is_err());
        assert!(RealInterval::parse_decimal("").is_err());
        assert_eq!(RealInterval::parse_decimal("-1.5").unwrap().midpoint_f64(), -1.5);
    }
}
