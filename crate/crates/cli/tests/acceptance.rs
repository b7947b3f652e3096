//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;

use nctorus_core::gauss_circle::{circle_error_scan, count_exact, max_normalised_error};
use nctorus_core::lattice::{count_le, lattice_sum, mu_multiplicity, r2_brute};
use nctorus_core::nc_torus::{assemble_af, commutator_defect, rieffel_projection, rieffel_report, theorem1_verify, FAITHFUL_GAP_CONSTANT};
use nctorus_core::radial::{kf_spectrum, poisson_1d, poisson_2d};
use nctorus_core::transfer::{build_gkw, eigenvector, fredholm_det, gauss_density_coefficients, spectrum};
use nctorus_core::{
    CMModulus, ComplexModulus, Direction, Fidelity, Form, IndexBijection, PseudoLattice, RadialProfile, RealInterval, Result, TailModel,
};

const POISSON_1D_TOL: f64 = 1e-10;
const POISSON_1D_SECS: f64 = 1.0;
const POISSON_2D_TOL: f64 = 1e-6;
const POISSON_2D_SECS: f64 = 30.0;
const KF_TOL: f64 = 1e-6;
const MU_BRUTE_LIMIT: u64 = 10_000;
const RIEFFEL_FINAL_TRACE_TOL: f64 = 1e-2;
const RIEFFEL_REGRESSION_REL: f64 = 1e-6;
// calibration run at ε = 0.1 along golden convergents
const RIEFFEL_TRACE_ERROR: [f64; 3] = [1.478294e-4, 2.156681e-5, 3.146529e-6];
const RIEFFEL_HS_DEFECT: [f64; 3] = [3.684618e-4, 5.497497e-5, 8.090509e-6];
const FROZEN_C: f64 = 0.025;
const CONSTANT_SYMBOL_TOL: f64 = 1e-12;
const FAITHFUL_COMMUTATOR_TOL: f64 = 1e-12;
const ADJOINT_TOL: f64 = 1e-12;
const CIRCLE_BRUTE_LIMIT: f64 = 1000.0;
const CIRCLE_NORMALISED_MAX: f64 = 10.0;
const CIRCLE_MILLION_SECS: f64 = 1.0;
const LAMBDA1_TOL: f64 = 1e-8;
const EIGENVECTOR_TOL: f64 = 1e-6;
const WIRSING: f64 = 0.3036630;
const LAMBDA2_TOL: f64 = 1e-5;
const DET_TOL: f64 = 1e-6;

type Verdict = Result<(bool, String)>;

fn golden() -> Result<(PseudoLattice, IndexBijection)> {
    let l = PseudoLattice::from_interval(1.0, &RealInterval::golden(), 60)?;
    let b = IndexBijection::new(&l, Direction::Standard, 40)?;
    Ok((l, b))
}

fn bumps() -> Result<Vec<RadialProfile>> {
    [(1.0, 4.0), (1.0, 10.0), (2.5, 16.0), (-0.7, 25.0), (0.3, 36.0)]
        .iter()
        .map(|&(h, r)| RadialProfile::bump(h, r))
        .collect()
}

fn c1() -> Verdict {
    let t = Instant::now();
    let r = poisson_1d(&RadialProfile::gaussian_line(PI, 6.0)?, 8)?;
    let secs = t.elapsed().as_secs_f64();
    Ok((r.abs_gap <= POISSON_1D_TOL && secs < POISSON_1D_SECS, format!("gap {:.3e}, {secs:.3} s", r.abs_gap)))
}

fn c2() -> Verdict {
    let t = Instant::now();
    let f = RadialProfile::gaussian(PI)?;
    let mut worst = 0.0f64;
    for tau in [ComplexModulus::i(), ComplexModulus::new(0.0, 2.0)?] {
        worst = worst.max(poisson_2d(&f, &tau, 36.0, 36.0)?.abs_gap);
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((worst <= POISSON_2D_TOL && secs < POISSON_2D_SECS, format!("max gap {worst:.3e}, {secs:.2} s")))
}

fn c3() -> Verdict {
    let poly = RadialProfile::schwartz(
        "(1+s)exp(-pi s)",
        TailModel {
            constant: 1.0,
            rate: PI - 1.0,
        },
        |s| (1.0 + s) * (-PI * s).exp(),
    )?;
    let profiles = [RadialProfile::gaussian(PI)?, RadialProfile::gaussian(2.0)?, poly];
    let moduli = [ComplexModulus::i(), ComplexModulus::new(0.0, 2.0)?, CMModulus::new(3)?.tau];
    let mut worst = 0.0f64;
    for f in &profiles {
        let f = f.clone().with_truncation(36.0);
        for tau in &moduli {
            worst = worst.max((kf_spectrum(&f, tau, 64.0)?.trace - lattice_sum(&f, tau)?.value).abs());
        }
    }
    Ok((worst <= KF_TOL, format!("max |tr K_f − Σ f| {worst:.3e} over 3 × 3")))
}

fn c4() -> Verdict {
    let mismatch = (0..=MU_BRUTE_LIMIT).find(|&r| mu_multiplicity(r) != r2_brute(r));
    let fixed = mu_multiplicity(25) == 12 && mu_multiplicity(3) == 0;
    Ok((mismatch.is_none() && fixed, format!("r ≤ {MU_BRUTE_LIMIT}, first mismatch {mismatch:?}, μ(25) = {}, μ(3) = {}", mu_multiplicity(25), mu_multiplicity(3))))
}

fn c5() -> Verdict {
    let (l, _) = golden()?;
    let r = [55, 144, 377]
        .iter()
        .map(|&q| rieffel_report(&l.approximant_at_least(q)?, 0.1))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = r.windows(2).all(|w| w[1].hs_defect < w[0].hs_defect && w[1].trace_error < w[0].trace_error);
    let rel = |x: f64, y: f64| (x - y).abs() <= RIEFFEL_REGRESSION_REL * y + 5e-13;
    let frozen = r
        .iter()
        .enumerate()
        .all(|(i, x)| rel(x.trace_error, RIEFFEL_TRACE_ERROR[i]) && rel(x.hs_defect, RIEFFEL_HS_DEFECT[i]));
    let last = r[2].trace_error;
    Ok((
        decreasing && frozen && last <= RIEFFEL_FINAL_TRACE_TOL,
        format!("q = {}, {}, {}: trace error {:.3e} → {last:.3e}, hs {:.3e} → {:.3e}, frozen {frozen}", r[0].q, r[1].q, r[2].q, r[0].trace_error, r[0].hs_defect, r[2].hs_defect),
    ))
}

fn c6() -> Verdict {
    let (l, b) = golden()?;
    let moduli = [ComplexModulus::i(), ComplexModulus::new(0.5, 1.0)?];
    let mut const_worst = 0.0f64;
    let mut bound_ok = FAITHFUL_GAP_CONSTANT == FROZEN_C;
    let mut decreasing = true;
    let mut ratio = 0.0f64;
    for f in bumps()? {
        for tau in &moduli {
            const_worst = const_worst.max(theorem1_verify(&f, tau, &l, &b, 144, Fidelity::ConstantSymbol, None)?.gap);
            let mut prev = f64::INFINITY;
            for q in [55, 144, 377] {
                let r = theorem1_verify(&f, tau, &l, &b, q, Fidelity::faithful(0.1), None)?;
                let bound = r.n_points as f64 * FROZEN_C / r.q as f64;
                bound_ok &= r.gap <= bound;
                decreasing &= r.gap < prev;
                ratio = ratio.max(r.gap * r.q as f64 / r.n_points as f64);
                prev = r.gap;
            }
        }
    }
    Ok((
        const_worst <= CONSTANT_SYMBOL_TOL && bound_ok && decreasing,
        format!("constant-symbol max gap {const_worst:.3e}; faithful max gap·q/N {ratio:.4} vs C = {FROZEN_C}, decreasing {decreasing}"),
    ))
}

fn c7() -> Verdict {
    let (l, b) = golden()?;
    // commutators pair elements index by index, so the family shares one support
    let profiles = [1.0, 2.5, -0.7, 0.3, 4.0]
        .iter()
        .map(|&h| RadialProfile::bump(h, 16.0))
        .collect::<Result<Vec<_>>>()?;
    let mixed = bumps()?;
    let mut const_defect = 0.0f64;
    let mut faithful_defect = 0.0f64;
    let mut adjoint = 0.0f64;
    for tau in [ComplexModulus::i(), ComplexModulus::new(0.5, 1.0)?] {
        let build = |fid: Fidelity| -> Result<Vec<_>> { profiles.iter().map(|f| assemble_af(f, &tau, &l, &b, 55, fid)).collect() };
        let constant = build(Fidelity::ConstantSymbol)?;
        let faithful = build(Fidelity::faithful(0.1))?;
        let full = build(Fidelity::LemmaFaithful { eps: 0.1, off_diagonal: true })?;
        for i in 0..profiles.len() {
            for j in 0..profiles.len() {
                const_defect = const_defect.max(commutator_defect(&constant[i], &constant[j])?);
                faithful_defect = faithful_defect.max(commutator_defect(&faithful[i], &faithful[j])?);
            }
        }
        for a in constant.iter().chain(&faithful).chain(&full) {
            adjoint = adjoint.max(a.max_adjoint_defect());
        }
        for f in &mixed {
            for fid in [Fidelity::ConstantSymbol, Fidelity::faithful(0.1), Fidelity::LemmaFaithful { eps: 0.1, off_diagonal: true }] {
                adjoint = adjoint.max(assemble_af(f, &tau, &l, &b, 144, fid)?.max_adjoint_defect());
            }
        }
    }
    for q in [55, 144, 377] {
        adjoint = adjoint.max(rieffel_projection(&l.approximant_at_least(q)?, 0.1)?.adjoint_defect());
    }
    Ok((
        const_defect == 0.0 && faithful_defect <= FAITHFUL_COMMUTATOR_TOL && adjoint <= ADJOINT_TOL,
        format!("commutator constant {const_defect:e}, faithful {faithful_defect:.3e}; adjoint {adjoint:.3e}"),
    ))
}

fn c8() -> Verdict {
    let tau = ComplexModulus::i();
    let n25 = count_exact(&tau, 25.0)?;
    let moduli = [tau, ComplexModulus::new(0.0, 2.0)?, CMModulus::new(3)?.tau, CMModulus::new(7)?.tau];
    let mut mismatch = None;
    'outer: for m in &moduli {
        for k in 0..=(4.0 * CIRCLE_BRUTE_LIMIT) as u64 {
            let r = k as f64 / 4.0;
            // the general enumerator is the brute-force reference
            if count_exact(m, r)? != count_le(m, r, Form::Primal)? {
                mismatch = Some((m.re(), m.im(), r));
                break 'outer;
            }
        }
    }
    let worst = max_normalised_error(&circle_error_scan(&tau, 1e6, 1000)?);
    let t = Instant::now();
    let big = count_exact(&tau, 1e6)?;
    let secs = t.elapsed().as_secs_f64();
    Ok((
        n25 == 81 && mismatch.is_none() && worst <= CIRCLE_NORMALISED_MAX && secs < CIRCLE_MILLION_SECS,
        format!("N(25) = {n25}, mismatch {mismatch:?}, max |N − πr|/√r {worst:.3}, N(10⁶) = {big} in {secs:.4} s"),
    ))
}

fn c9() -> Verdict {
    let one = Complex64::new(1.0, 0.0);
    let t = build_gkw(one, 40)?;
    let ev = spectrum(&t)?.eigenvalues;
    let l1 = (ev[0] - 1.0).norm();
    let v = eigenvector(&t, ev[0])?;
    let g = gauss_density_coefficients(40);
    let vec_err = v.iter().zip(&g).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    let oracle = spectrum(&build_gkw(one, 60)?)?.eigenvalues[1].norm();
    let l2 = ev[1].norm();
    let det = fredholm_det(one, 40)?.value.norm();
    let ok = l1 <= LAMBDA1_TOL
        && vec_err <= EIGENVECTOR_TOL
        && (l2 - WIRSING).abs() <= LAMBDA2_TOL
        && (l2 - oracle).abs() <= LAMBDA2_TOL
        && det <= DET_TOL;
    Ok((ok, format!("|λ₁ − 1| {l1:.2e}, eigenvector {vec_err:.2e}, |λ₂| {l2:.8} (dim 60: {oracle:.8}), |det| {det:.2e}")))
}

const SUBCOMMANDS: [&[&str]; 16] = [
    &["poisson1d"],
    &["poisson2d", "--tau", "0.5,1", "--primal-cut", "25", "--dual-cut", "25"],
    &["mu", "--r", "325"],
    &["cf", "--theta", "golden", "--depth", "30"],
    &["cf", "--format", "csv", "--theta", "silver"],
    &["bratteli", "--levels", "12"],
    &["rieffel"],
    &["rieffel", "--format", "csv"],
    &["theorem1", "--profile", "bump", "--dual-cut", "36"],
    &["theorem1", "--profile", "bump", "--mode", "faithful", "--q", "144"],
    &["circle", "--r-max", "10000", "--samples", "200"],
    &["circle", "--format", "csv", "--tau-d", "7", "--smooth-eps", "0.2"],
    &["gkw-spectrum"],
    &["gkw-spectrum", "--format", "csv", "--s", "1.5,0.5"],
    &["zeta-det", "--s", "2"],
    &["conjecture", "--dims", "10,20"],
];

fn run_cli(args: &[&str], threads: &str) -> std::io::Result<(i32, Vec<u8>)> {
    let out = Command::new(env!("CARGO_BIN_EXE_nctorus")).args(args).args(["--threads", threads]).output()?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn c10() -> Verdict {
    let mut first_bad = None;
    for args in SUBCOMMANDS {
        let a = run_cli(args, "1").map_err(nctorus_core::Error::from)?;
        let b = run_cli(args, "1").map_err(nctorus_core::Error::from)?;
        let c = run_cli(args, "4").map_err(nctorus_core::Error::from)?;
        if a.0 != 0 || a.1.is_empty() || a != b || a != c {
            first_bad = Some(args.join(" "));
            break;
        }
    }
    let mut covered: Vec<&str> = SUBCOMMANDS.iter().map(|a| a[0]).collect();
    covered.dedup();
    let all = covered.len() == nctorus_core::selftest::SUITES.len();
    Ok((first_bad.is_none() && all, format!("{} invocations over {} subcommands, first difference {first_bad:?}", SUBCOMMANDS.len(), covered.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("Poisson 1D", c1),
        ("Poisson 2D", c2),
        ("K_f consistency", c3),
        ("μ(r)", c4),
        ("Rieffel projection", c5),
        ("Theorem 1", c6),
        ("commutativity and self-adjointness", c7),
        ("Gauss circle", c8),
        ("transfer operator", c9),
        ("determinism", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("criterion {}: {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
