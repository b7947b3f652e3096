use std::f64::consts::PI;

use proptest::prelude::*;

use nctorus_core::lattice::{count_le, dual_form, enumerate_le, lattice_sum, mu_multiplicity, quad_form, r2_brute};
use nctorus_core::radial::{kf_spectrum, poisson_2d, radial_hat};
use nctorus_core::{ComplexModulus, Form, LatticePoint, RadialProfile, TailModel};

fn brute(tau: &ComplexModulus, bound: f64, form: Form) -> Vec<LatticePoint> {
    let reach = 3 + (bound.sqrt() * (1.0 + tau.norm_sq().sqrt()) / tau.im().min(1.0)).ceil() as i64;
    let mut v = Vec::new();
    for m in -reach..=reach {
        for n in -reach..=reach {
            let p = LatticePoint::new(m, n);
            let val = match form {
                Form::Primal => quad_form(tau, p),
                Form::Dual => dual_form(tau, p),
            };
            if val <= bound {
                v.push(p);
            }
        }
    }
    v
}

fn modulus() -> impl Strategy<Value = ComplexModulus> {
    (-0.5f64..0.5, 0.6f64..2.5).prop_map(|(re, im)| ComplexModulus::new(re, im).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_brute_force(tau in modulus(), bound in 0.0f64..30.0) {
        for form in [Form::Primal, Form::Dual] {
            let fast = enumerate_le(&tau, bound, form).unwrap();
            prop_assert_eq!(&fast, &brute(&tau, bound, form));
            prop_assert_eq!(count_le(&tau, bound, form).unwrap() as usize, fast.len());
        }
    }

    #[test]
    fn forms_are_even(tau in modulus(), m in -50i64..50, n in -50i64..50) {
        let p = LatticePoint::new(m, n);
        let q = LatticePoint::new(-m, -n);
        prop_assert_eq!(quad_form(&tau, p), quad_form(&tau, q));
        prop_assert_eq!(dual_form(&tau, p), dual_form(&tau, q));
        prop_assert!(quad_form(&tau, p) >= 0.0);
    }

    #[test]
    fn counts_are_monotone(tau in modulus(), a in 0.0f64..40.0, b in 0.0f64..40.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(count_le(&tau, lo, Form::Primal).unwrap() <= count_le(&tau, hi, Form::Primal).unwrap());
    }

    #[test]
    fn hat_of_gaussian_is_gaussian(tau in modulus(), m in -3i64..=3, n in -3i64..=3) {
        // exp(−π s) is self-dual; on L_τ its transform at a dual index has the
        // covolume factor 1/Im τ
        let g = RadialProfile::gaussian(PI).unwrap().with_truncation(14.0);
        let p = LatticePoint::new(m, n);
        let h = radial_hat(&g, &tau, p).unwrap();
        let expected = (-PI * dual_form(&tau, p)).exp() / tau.im();
        prop_assert!((h.value - expected).abs() < 1e-9, "{} vs {}", h.value, expected);
    }
}

#[test]
fn divisor_formula_matches_brute_force() {
    for r in 0..=10_000u64 {
        assert_eq!(mu_multiplicity(r), r2_brute(r), "r = {r}");
    }
    assert_eq!(mu_multiplicity(25), 12);
    assert_eq!(mu_multiplicity(3), 0);
}

/// `(1 + s) e^{−πs}`, bounded by `e^{−(π−1)s}` since `1 + s ≤ e^s`.
fn poly_gaussian() -> RadialProfile {
    let tail = TailModel {
        constant: 1.0,
        rate: PI - 1.0,
    };
    RadialProfile::schwartz("(1+s)exp(-pi s)", tail, |s| (1.0 + s) * (-PI * s).exp())
        .unwrap()
        .with_truncation(36.0)
}

#[test]
fn kf_trace_is_the_lattice_sum() {
    let profiles = [
        RadialProfile::gaussian(PI).unwrap().with_truncation(36.0),
        RadialProfile::gaussian(2.0).unwrap().with_truncation(36.0),
        poly_gaussian(),
    ];
    let moduli = [
        ComplexModulus::i(),
        ComplexModulus::new(0.0, 2.0).unwrap(),
        ComplexModulus::new(0.5, 3f64.sqrt() / 2.0).unwrap(),
    ];
    for f in &profiles {
        for tau in &moduli {
            let lhs = lattice_sum(f, tau).unwrap().value;
            let k = kf_spectrum(f, tau, 64.0).unwrap();
            assert!((k.trace - lhs).abs() <= 1e-6, "{f:?} at {tau}: {} vs {lhs}", k.trace);
        }
    }
}

#[test]
fn poisson_2d_gaussian_on_two_moduli() {
    let g = RadialProfile::gaussian(PI).unwrap();
    for tau in [ComplexModulus::i(), ComplexModulus::new(0.0, 2.0).unwrap()] {
        let r = poisson_2d(&g, &tau, 36.0, 36.0).unwrap();
        assert!(r.abs_gap <= 1e-6, "{tau}: {r:?}");
        assert!(r.abs_gap <= r.tail_bound + 1e-12 || r.abs_gap <= 1e-12);
    }
}
