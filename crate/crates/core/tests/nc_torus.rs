use proptest::prelude::*;

use nctorus_core::nc_torus::{assemble_af, commutator_defect, theorem1_verify, trace_element_at, ShiftPoly};
use nctorus_core::{ComplexModulus, Direction, Fidelity, IndexBijection, PseudoLattice, RadialProfile, RealInterval};

fn poly(q: usize, terms: &[(i64, Vec<f64>)]) -> ShiftPoly {
    terms
        .iter()
        .fold(ShiftPoly::zero(q), |acc, (k, d)| acc.add(&ShiftPoly::monomial(d.clone(), *k)).unwrap())
}

fn poly_strategy(q: usize) -> impl Strategy<Value = ShiftPoly> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(-2.0f64..2.0, q)), 0..4).prop_map(move |t| poly(q, &t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_dense(x in poly_strategy(7), y in poly_strategy(7)) {
        let sparse = x.mul(&y).unwrap().to_dense();
        let dense = x.to_dense() * y.to_dense();
        prop_assert!((sparse - dense).amax() <= 1e-12);
    }

    #[test]
    fn adjoint_is_transpose(x in poly_strategy(6)) {
        prop_assert!((x.adjoint().to_dense() - x.to_dense().transpose()).amax() == 0.0);
    }

    #[test]
    fn trace_is_cyclic(x in poly_strategy(5), y in poly_strategy(5)) {
        let xy = x.mul(&y).unwrap().trace();
        let yx = y.mul(&x).unwrap().trace();
        prop_assert!((xy - yx).abs() <= 1e-12);
    }

    #[test]
    fn element_trace_is_the_value(m in -6i64..=6, n in -6i64..=6, faithful in any::<bool>()) {
        let l = PseudoLattice::from_interval(1.0, &RealInterval::golden(), 60).unwrap();
        let approx = l.approximant_at_least(144).unwrap();
        let f = |x: f64| (-x * x).exp() + 0.25;
        let beta = m as f64 + n as f64 * l.theta;
        let fid = if faithful { Fidelity::faithful(0.1) } else { Fidelity::ConstantSymbol };
        let e = trace_element_at(&f, (m, n), 1.0, &approx, fid).unwrap();
        prop_assert!(e.adjoint_defect() <= 1e-12);
        if faithful {
            // the core trace is off by the factor (p/q)/θ
            let slack = (f(beta) - m as f64).abs() * (approx.ratio() / approx.theta - 1.0).abs();
            prop_assert!((e.trace() - f(beta)).abs() <= slack + 1e-12);
        } else {
            prop_assert!((e.trace() - f(beta)).abs() <= 1e-12);
        }
    }
}

fn golden() -> (PseudoLattice, IndexBijection) {
    let l = PseudoLattice::from_interval(1.0, &RealInterval::golden(), 60).unwrap();
    let b = IndexBijection::new(&l, Direction::Standard, 40).unwrap();
    (l, b)
}

#[test]
fn faithful_gap_shrinks_with_q() {
    let (l, b) = golden();
    let f = RadialProfile::bump(1.0, 12.0).unwrap();
    let gaps: Vec<f64> = [55, 144, 377]
        .iter()
        .map(|&q| {
            let r = theorem1_verify(&f, &ComplexModulus::i(), &l, &b, q, Fidelity::faithful(0.1), None).unwrap();
            assert!(r.gap <= r.bound.unwrap(), "{r:?}");
            r.gap
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn constant_symbol_elements_commute_exactly() {
    let (l, b) = golden();
    let tau = ComplexModulus::new(0.5, 1.0).unwrap();
    let a1 = assemble_af(&RadialProfile::bump(1.0, 8.0).unwrap(), &tau, &l, &b, 55, Fidelity::ConstantSymbol).unwrap();
    let a2 = assemble_af(&RadialProfile::bump(3.0, 8.0).unwrap(), &tau, &l, &b, 55, Fidelity::ConstantSymbol).unwrap();
    assert_eq!(commutator_defect(&a1, &a2).unwrap(), 0.0);
    assert!(a1.max_adjoint_defect() <= 1e-12);
}

#[test]
fn off_diagonal_elements_stay_self_adjoint() {
    let (l, b) = golden();
    let fid = Fidelity::LemmaFaithful { eps: 0.1, off_diagonal: true };
    let a = assemble_af(&RadialProfile::bump(1.0, 6.0).unwrap(), &ComplexModulus::i(), &l, &b, 55, fid).unwrap();
    assert!(a.max_adjoint_defect() <= 1e-12);
}
