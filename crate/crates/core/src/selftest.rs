//! Quick invariant suites, one per CLI subcommand.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::contfrac::{cf_expand_interval, convergents, RealInterval};
use crate::error::{Error, Result};
use crate::gauss_circle::{count_exact, ellipse_coordinates, ellipse_form, smoothed_bracket, SmoothStep};
use crate::lattice::{enumerate_le, lattice_sum, mu_multiplicity, quad_form, r2_brute, ComplexModulus, Form, LatticePoint, RadialProfile};
use crate::nc_torus::{commutator_defect, assemble_af, rieffel_report, theorem1_verify, Fidelity};
use crate::pseudo_lattice::{effros_shen_levels, gl2z_act_interval, tail_equivalent_interval, Direction, IndexBijection, IntMatrix2, PseudoLattice};
use crate::radial::{kf_spectrum, poisson_1d, poisson_2d};
use crate::transfer::{build_gkw, fredholm_det, gauss_density_residual, hd_series, spectral_distance, spectrum, conjecture_compare};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub const SUITES: [&str; 11] = [
    "poisson1d",
    "poisson2d",
    "mu",
    "cf",
    "bratteli",
    "rieffel",
    "theorem1",
    "circle",
    "gkw-spectrum",
    "zeta-det",
    "conjecture",
];

type Probe = fn() -> Result<(bool, String)>;

fn check(name: &'static str, probe: Probe) -> Check {
    match probe() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn golden() -> Result<(PseudoLattice, IndexBijection)> {
    let l = PseudoLattice::from_interval(1.0, &RealInterval::golden(), 60)?;
    let b = IndexBijection::new(&l, Direction::Standard, 40)?;
    Ok((l, b))
}

fn probes(suite: &str) -> Result<Vec<(&'static str, Probe)>> {
    let v: Vec<(&'static str, Probe)> = match suite {
        "poisson1d" => vec![
            ("gaussian self-dual within 1e-10", || {
                let r = poisson_1d(&RadialProfile::gaussian_line(PI, 6.0)?, 8)?;
                Ok((r.abs_gap <= 1e-10, format!("gap {:e}", r.abs_gap)))
            }),
            ("tail bound covers truncation", || {
                let f = RadialProfile::gaussian_line(0.5, 12.0)?;
                let r = poisson_1d(&f, 3)?;
                Ok((r.abs_gap <= r.tail_bound, format!("gap {:e}, bound {:e}", r.abs_gap, r.tail_bound)))
            }),
        ],
        "poisson2d" => vec![
            ("gaussian at τ = i within 1e-6", || {
                let r = poisson_2d(&RadialProfile::gaussian(PI)?, &ComplexModulus::i(), 36.0, 36.0)?;
                Ok((r.abs_gap <= 1e-6, format!("gap {:e}", r.abs_gap)))
            }),
            ("K_f trace equals lattice sum", || {
                let f = RadialProfile::gaussian(2.0)?.with_truncation(30.0);
                let tau = ComplexModulus::new(0.5, 1.0)?;
                let gap = (kf_spectrum(&f, &tau, 30.0)?.trace - lattice_sum(&f, &tau)?.value).abs();
                Ok((gap <= 1e-6, format!("gap {gap:e}")))
            }),
        ],
        "mu" => vec![
            ("divisor formula matches brute force to 2000", || {
                let bad = (0..=2000u64).find(|&r| mu_multiplicity(r) != r2_brute(r));
                Ok((bad.is_none(), format!("first mismatch {bad:?}")))
            }),
            ("μ(25) = 12, μ(3) = 0", || {
                Ok((mu_multiplicity(25) == 12 && mu_multiplicity(3) == 0, "fixed values".into()))
            }),
        ],
        "cf" => vec![
            ("golden ratio expands to ones", || {
                let cf = cf_expand_interval(&RealInterval::golden(), 40)?;
                Ok((cf.quotients.iter().all(|&a| a == 1) && cf.quotients.len() == 40, format!("{} quotients", cf.quotients.len())))
            }),
            ("|θ − p/q| < 1/q² on convergents", || {
                let cf = cf_expand_interval(&RealInterval::silver(), 20)?;
                let theta = RealInterval::silver().midpoint_f64();
                let ok = convergents(&cf.quotients)?
                    .iter()
                    .all(|c| (theta - c.p as f64 / c.q as f64).abs() < 1.0 / (c.q as f64 * c.q as f64));
                Ok((ok, "silver ratio, 20 convergents".into()))
            }),
            ("GL(2,Z) images share a tail", || {
                let g = RealInterval::golden();
                let m = IntMatrix2([[2, 1], [1, 1]]);
                let t = tail_equivalent_interval(&g, &gl2z_act_interval(&m, &g)?, 40)?;
                Ok((t.equivalent, format!("{t:?}")))
            }),
        ],
        "bratteli" => vec![("dimensions follow the convergent recurrence", || {
            let cf = cf_expand_interval(&RealInterval::golden(), 20)?.quotients;
            let levels = effros_shen_levels(&cf, 12)?;
            let ok = levels.windows(2).all(|w| w[1].dims.0 == w[1].a_k as i128 * w[0].dims.0 + w[0].dims.1 && w[1].dims.1 == w[0].dims.0);
            Ok((ok, format!("{} levels", levels.len())))
        })],
        "rieffel" => vec![("defects shrink along convergents", || {
            let (l, _) = golden()?;
            let r: Vec<_> = [55, 144, 377]
                .iter()
                .map(|&q| rieffel_report(&l.approximant_at_least(q)?, 0.1))
                .collect::<Result<_>>()?;
            let ok = r.windows(2).all(|w| w[1].hs_defect < w[0].hs_defect && w[1].trace_error < w[0].trace_error)
                && r.iter().all(|x| x.adjoint_defect <= 1e-12);
            Ok((ok, format!("hs {:e} → {:e}", r[0].hs_defect, r[2].hs_defect)))
        })],
        "theorem1" => vec![
            ("constant-symbol gap ≤ 1e-12", || {
                let (l, b) = golden()?;
                let r = theorem1_verify(&RadialProfile::bump(1.0, 10.0)?, &ComplexModulus::i(), &l, &b, 144, Fidelity::ConstantSymbol, None)?;
                Ok((r.gap <= 1e-12, format!("gap {:e}", r.gap)))
            }),
            ("diagonal faithful elements commute", || {
                let (l, b) = golden()?;
                let tau = ComplexModulus::i();
                let f = Fidelity::faithful(0.1);
                let a1 = assemble_af(&RadialProfile::bump(1.0, 6.0)?, &tau, &l, &b, 55, f)?;
                let a2 = assemble_af(&RadialProfile::bump(2.0, 6.0)?, &tau, &l, &b, 55, f)?;
                let d = commutator_defect(&a1, &a2)?;
                Ok((d <= 1e-12, format!("defect {d:e}")))
            }),
        ],
        "circle" => vec![
            ("N(25) = 81 at τ = i", || {
                let n = count_exact(&ComplexModulus::i(), 25.0)?;
                Ok((n == 81, format!("N = {n}")))
            }),
            ("row scan matches enumeration", || {
                let tau = ComplexModulus::from_form(0.5, 2.0)?;
                let bad = (0..=200).find(|&r| {
                    let r = r as f64 * 0.5;
                    count_exact(&tau, r).ok() != enumerate_le(&tau, r, Form::Primal).ok().map(|v| v.len() as u64)
                });
                Ok((bad.is_none(), format!("first mismatch {bad:?}")))
            }),
            ("smoothed count is bracketed", || {
                let b = smoothed_bracket(&ComplexModulus::i(), &SmoothStep::quintic(25.0, 0.3)?)?;
                Ok((b.lower as f64 <= b.value && b.value <= b.upper as f64, format!("{b:?}")))
            }),
            ("ellipse coordinates reproduce the form", || {
                let tau = ComplexModulus::new(0.3, 1.7)?;
                let mut worst = 0.0f64;
                for (m, n) in [(3, -2), (-5, 7), (1, 1), (0, 4)] {
                    let p = LatticePoint::new(m, n);
                    let (u, v) = ellipse_coordinates(&tau, p);
                    worst = worst.max((ellipse_form(&tau, u, v) - quad_form(&tau, p)).abs());
                }
                Ok((worst <= 1e-10, format!("max deviation {worst:e}")))
            }),
        ],
        "gkw-spectrum" => vec![
            ("λ₁ = 1 at s = 1", || {
                let r = spectrum(&build_gkw(Complex64::new(1.0, 0.0), 30)?)?;
                let e = (r.eigenvalues[0] - 1.0).norm();
                Ok((e <= 1e-8, format!("|λ₁ − 1| = {e:e}")))
            }),
            ("Gauss density is fixed", || {
                let r = gauss_density_residual(&build_gkw(Complex64::new(1.0, 0.0), 40)?);
                Ok((r <= 1e-8, format!("residual {r:e}")))
            }),
        ],
        "zeta-det" => vec![
            ("det vanishes at s = 1", || {
                let d = fredholm_det(Complex64::new(1.0, 0.0), 40)?;
                Ok((d.value.norm() <= 1e-6, format!("|det| = {:e}", d.value.norm())))
            }),
            ("det stable in dim at s = 2", || {
                let s = Complex64::new(2.0, 0.0);
                let g = (fredholm_det(s, 40)?.value - fredholm_det(s, 50)?.value).norm();
                Ok((g <= 1e-8, format!("drift {g:e}")))
            }),
        ],
        "conjecture" => vec![
            ("hd series of {1, 1/2} at 1/2", || {
                let v = hd_series(&[1.0, 0.5], Complex64::new(0.5, 0.0))?;
                Ok(((v.re - 0.625).abs() < 1e-15, format!("{v}")))
            }),
            ("report is well formed", || {
                let r = conjecture_compare(1, Complex64::new(1.0, 0.0), &[10], &SmoothStep::quintic(4.0, 0.5)?)?;
                let row = &r.rows[0];
                let self_dist = spectral_distance(&row.gkw_eigenvalues, &row.gkw_eigenvalues);
                Ok((!row.exp_eigenvalues.is_empty() && !row.gkw_eigenvalues.is_empty() && self_dist == (0.0, 0.0), format!("max distance {:e}", row.max_distance)))
            }),
        ],
        other => return Err(Error::usage(format!("no selftest suite named {other:?}"))),
    };
    Ok(v)
}

pub fn run(suite: &str) -> Result<SelftestReport> {
    let checks: Vec<Check> = probes(suite)?.into_iter().map(|(name, p)| check(name, p)).collect();
    Ok(SelftestReport {
        suite: suite.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
