use num_complex::Complex64;

use nctorus_core::transfer::{build_gkw, eigenvector, fredholm_det, gauss_density_coefficients, gauss_density_residual, spectrum};

fn s(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// Wirsing's constant, |λ₂| of the Gauss map transfer operator
const WIRSING: f64 = 0.303_663_002_898_732_6;

#[test]
fn leading_eigenvalues_at_one() {
    let r = spectrum(&build_gkw(s(1.0), 40).unwrap()).unwrap();
    assert!((r.eigenvalues[0] - 1.0).norm() <= 1e-12);
    assert!((r.eigenvalues[1].norm() - WIRSING).abs() <= 1e-9, "{}", r.eigenvalues[1]);
    // real eigenvalues of alternating sign
    for (k, l) in r.eigenvalues.iter().take(6).enumerate() {
        assert!(l.im.abs() <= 1e-10 && l.re.signum() == if k % 2 == 0 { 1.0 } else { -1.0 }, "λ_{} = {l}", k + 1);
    }
}

#[test]
fn top_of_spectrum_is_stable_in_dim() {
    for x in [0.8, 1.0, 1.5, 3.0] {
        let a = spectrum(&build_gkw(s(x), 40).unwrap()).unwrap().eigenvalues;
        let b = spectrum(&build_gkw(s(x), 50).unwrap()).unwrap().eigenvalues;
        for k in 0..5 {
            assert!((a[k] - b[k]).norm() <= 1e-8, "s = {x}, k = {k}: {} vs {}", a[k], b[k]);
        }
    }
}

#[test]
fn eigenvector_is_the_gauss_density() {
    let t = build_gkw(s(1.0), 40).unwrap();
    assert!(gauss_density_residual(&t) <= 1e-8);
    let v = eigenvector(&t, s(1.0)).unwrap();
    let g = gauss_density_coefficients(40);
    let worst = v.iter().zip(&g).take(20).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn determinant_vanishes_only_at_one() {
    assert!(fredholm_det(s(1.0), 40).unwrap().value.norm() <= 1e-6);
    assert!(fredholm_det(s(2.0), 40).unwrap().value.norm() > 0.1);
    // continuity on [0.75, 2]: halving the step roughly halves each increment
    let d = |x: f64| fredholm_det(s(x), 40).unwrap().value;
    let h = 0.05;
    for k in 0..25 {
        let x = 0.75 + h * k as f64;
        let (a, m, b) = (d(x), d(x + h / 2.0), d(x + h));
        let whole = (b - a).norm();
        let half = (m - a).norm().max((b - m).norm());
        assert!(a.re.is_finite() && half <= 0.6 * whole + 1e-9, "s = {x}: {whole} vs {half}");
    }
}
