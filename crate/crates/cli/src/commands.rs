use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use nctorus_core::contfrac::{cf_expand_interval, convergents};
use nctorus_core::gauss_circle::{circle_error_scan, max_normalised_error, smoothed_bracket, write_circle_csv, Blend};
use nctorus_core::lattice::mu_multiplicity;
use nctorus_core::nc_torus::{rieffel_report, theorem1_verify};
use nctorus_core::pseudo_lattice::{effros_shen_levels, write_convergents_csv};
use nctorus_core::radial::{poisson_1d, poisson_2d};
use nctorus_core::transfer::{
    build_gkw, conjecture_compare, eigenvector, fredholm_det, gauss_density_coefficients, gauss_density_residual,
    spectrum, write_eigenvalue_csv,
};
use nctorus_core::{
    CMModulus, ComplexModulus, Direction, Error, Fidelity, IndexBijection, PseudoLattice, RadialProfile, RealInterval,
    SmoothStep,
};

use crate::output::Outcome;
use crate::Status;

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn output(e: impl std::fmt::Display) -> Self {
        Failure {
            status: Status::Numeric,
            message: format!("output failed: {e}"),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Validation,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            status: if e.is_validation() { Status::Validation } else { Status::Numeric },
            message: e.to_string(),
        }
    }
}

type Outcomes = Result<Outcome, Failure>;

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(Failure::output)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok((num(re)?, 0.0)),
        [re, im] => Ok((num(re)?, num(im)?)),
        _ => Err(format!("expected re or re,im, got {s:?}")),
    }
}

fn modulus(pair: (f64, f64)) -> Result<ComplexModulus, Failure> {
    Ok(ComplexModulus::new(pair.0, pair.1)?)
}

fn complex(pair: (f64, f64)) -> Complex64 {
    Complex64::new(pair.0, pair.1)
}

/// `golden`, `silver` or a decimal literal, read as an interval.
fn theta_interval(theta: &str) -> Result<RealInterval, Failure> {
    match theta {
        "golden" => Ok(RealInterval::golden()),
        "silver" => Ok(RealInterval::silver()),
        s => Ok(RealInterval::parse_decimal(s)?),
    }
}

const CF_DEPTH: usize = 80;

fn lattice(mu: f64, theta: &str) -> Result<PseudoLattice, Failure> {
    Ok(PseudoLattice::from_interval(mu, &theta_interval(theta)?, CF_DEPTH)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Gaussian,
    Bump,
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    /// Radial profile f(|x|²).
    #[arg(long, value_enum, default_value_t = ProfileKind::Gaussian)]
    pub profile: ProfileKind,
    /// Gaussian rate a in exp(−a s).
    #[arg(long, default_value_t = PI)]
    pub a: f64,
    /// Bump height f(0).
    #[arg(long, default_value_t = 1.0)]
    pub height: f64,
    /// Bump support radius in s = |x|².
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
}

impl ProfileArgs {
    fn build(&self, cut: f64) -> Result<RadialProfile, Failure> {
        Ok(match self.profile {
            ProfileKind::Gaussian => RadialProfile::gaussian(self.a)?.with_truncation(cut),
            ProfileKind::Bump => RadialProfile::bump(self.height, self.radius)?,
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Poisson1dArgs {
    #[arg(long, default_value_t = PI)]
    pub a: f64,
    #[arg(long, default_value_t = 8)]
    pub truncation: usize,
    /// Quadrature cut |x| ≤ cut.
    #[arg(long, default_value_t = 6.0)]
    pub cut: f64,
}

pub fn poisson1d(a: &Poisson1dArgs) -> Outcomes {
    let r = poisson_1d(&RadialProfile::gaussian_line(a.a, a.cut)?, a.truncation)?;
    Ok(Outcome::new(to_value(a)?, to_value(&r)?))
}

#[derive(Args, Debug, Serialize)]
pub struct Poisson2dArgs {
    #[arg(long, default_value = "0,1", value_parser = parse_pair)]
    pub tau: (f64, f64),
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, default_value_t = 36.0)]
    pub primal_cut: f64,
    #[arg(long, default_value_t = 36.0)]
    pub dual_cut: f64,
}

pub fn poisson2d(a: &Poisson2dArgs) -> Outcomes {
    let f = a.profile.build(a.primal_cut)?;
    let r = poisson_2d(&f, &modulus(a.tau)?, a.primal_cut, a.dual_cut)?;
    Ok(Outcome::new(to_value(a)?, to_value(&r)?))
}

#[derive(Args, Debug, Serialize)]
pub struct MuArgs {
    #[arg(long)]
    pub r: Option<u64>,
}

pub fn mu(a: &MuArgs) -> Outcomes {
    let r = a.r.ok_or_else(|| Failure::invalid("mu needs --r"))?;
    let m = mu_multiplicity(r);
    let mut o = Outcome::new(to_value(a)?, json!({ "r": r, "mu": m }));
    o.text = Some(format!("{m}\n"));
    Ok(o)
}

#[derive(Args, Debug, Serialize)]
pub struct CfArgs {
    /// `golden`, `silver` or a decimal in (0, 1).
    #[arg(long, default_value = "golden")]
    pub theta: String,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
}

pub fn cf(a: &CfArgs) -> Outcomes {
    let cf = cf_expand_interval(&theta_interval(&a.theta)?, a.depth)?;
    let conv = convergents(&cf.quotients)?;
    let mut csv = Vec::new();
    write_convergents_csv(&conv, &mut csv)?;
    let result = json!({
        "quotients": cf.quotients,
        "termination": cf.termination,
        "rational": cf.rational_flag(),
        "convergents": conv,
    });
    Ok(Outcome::new(to_value(a)?, result).with_csv(csv))
}

#[derive(Args, Debug, Serialize)]
pub struct BratteliArgs {
    #[arg(long, default_value = "golden")]
    pub theta: String,
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
}

pub fn bratteli(a: &BratteliArgs) -> Outcomes {
    let cf = cf_expand_interval(&theta_interval(&a.theta)?, a.levels)?;
    let levels = effros_shen_levels(&cf.quotients, a.levels)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "a_k", "q_k", "q_k_minus_1"]).map_err(Failure::output)?;
    for l in &levels {
        w.write_record([l.k.to_string(), l.a_k.to_string(), l.dims.0.to_string(), l.dims.1.to_string()])
            .map_err(Failure::output)?;
    }
    let csv = w.into_inner().map_err(Failure::output)?;
    Ok(Outcome::new(to_value(a)?, json!({ "levels": levels })).with_csv(csv))
}

#[derive(Args, Debug, Serialize)]
pub struct RieffelArgs {
    #[arg(long, default_value = "golden")]
    pub theta: String,
    /// Smallest representation sizes; each picks the first convergent with q ≥ value.
    #[arg(long, default_value = "55,144,377", value_delimiter = ',', action = clap::ArgAction::Set)]
    pub q: Vec<i64>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

pub fn rieffel(a: &RieffelArgs) -> Outcomes {
    let l = lattice(1.0, &a.theta)?;
    let reports = a
        .q
        .iter()
        .map(|&q| Ok(rieffel_report(&l.approximant_at_least(q)?, a.eps)?))
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &reports {
        w.serialize(r).map_err(Failure::output)?;
    }
    let csv = w.into_inner().map_err(Failure::output)?;
    Ok(Outcome::new(to_value(a)?, json!({ "reports": reports })).with_csv(csv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Constant,
    Faithful,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Standard,
    Swapped,
}

#[derive(Args, Debug, Serialize)]
pub struct Theorem1Args {
    #[arg(long, default_value = "0,1", value_parser = parse_pair)]
    pub tau: (f64, f64),
    #[arg(long, default_value = "golden")]
    pub theta: String,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 377)]
    pub q: i64,
    #[arg(long, value_enum, default_value_t = Mode::Constant)]
    pub mode: Mode,
    /// Ramp width of the faithful-mode projections.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Keep the off-diagonal h terms in faithful mode.
    #[arg(long)]
    pub off_diagonal: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Truncation of a Gaussian profile in s = |x|².
    #[arg(long, default_value_t = 36.0)]
    pub cut: f64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Standard)]
    pub direction: DirectionArg,
    /// Largest |m|, |n| the index bijection admits.
    #[arg(long, default_value_t = 40)]
    pub window: i64,
    /// Also compare with tr K_f over dual points up to this cut.
    #[arg(long)]
    pub dual_cut: Option<f64>,
}

pub fn theorem1(a: &Theorem1Args) -> Outcomes {
    let l = lattice(a.mu, &a.theta)?;
    let dir = match a.direction {
        DirectionArg::Standard => Direction::Standard,
        DirectionArg::Swapped => Direction::Swapped,
    };
    let b = IndexBijection::new(&l, dir, a.window)?;
    let fidelity = match a.mode {
        Mode::Constant => Fidelity::ConstantSymbol,
        Mode::Faithful => Fidelity::LemmaFaithful {
            eps: a.eps,
            off_diagonal: a.off_diagonal,
        },
    };
    let f = a.profile.build(a.cut)?;
    let r = theorem1_verify(&f, &modulus(a.tau)?, &l, &b, a.q, fidelity, a.dual_cut)?;
    Ok(Outcome::new(to_value(a)?, to_value(&r)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlendArg {
    Quintic,
    Exp,
}

impl From<BlendArg> for Blend {
    fn from(b: BlendArg) -> Self {
        match b {
            BlendArg::Quintic => Blend::Quintic,
            BlendArg::Exp => Blend::Exp,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CircleArgs {
    #[arg(long, default_value = "0,1", value_parser = parse_pair)]
    pub tau: (f64, f64),
    /// Use the CM modulus τ_D instead of --tau.
    #[arg(long)]
    pub tau_d: Option<u64>,
    #[arg(long, default_value_t = 100.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Also report the smoothed count at r_max with this width.
    #[arg(long)]
    pub smooth_eps: Option<f64>,
    #[arg(long, value_enum, default_value_t = BlendArg::Quintic)]
    pub blend: BlendArg,
}

pub fn circle(a: &CircleArgs) -> Outcomes {
    let cm = a.tau_d.map(CMModulus::new).transpose()?;
    let tau = match &cm {
        Some(c) => c.tau,
        None => modulus(a.tau)?,
    };
    let rows = circle_error_scan(&tau, a.r_max, a.samples)?;
    let smoothed = match a.smooth_eps {
        Some(eps) => Some(smoothed_bracket(&tau, &SmoothStep::new(a.r_max, eps, a.blend.into())?)?),
        None => None,
    };
    let mut csv = Vec::new();
    write_circle_csv(&rows, &mut csv)?;
    let result = json!({
        "tau": tau,
        "cm": cm.map(|c| json!({ "d": c.d, "convention": c.convention() })),
        "max_error_over_sqrt_r": max_normalised_error(&rows),
        "smoothed": smoothed,
        "rows": rows,
    });
    Ok(Outcome::new(to_value(a)?, result).with_csv(csv))
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "1", value_parser = parse_pair)]
    pub s: (f64, f64),
    #[arg(long, default_value_t = 40)]
    pub dim: usize,
}

pub fn gkw_spectrum(a: &SpectrumArgs) -> Outcomes {
    let t = build_gkw(complex(a.s), a.dim)?;
    let r = spectrum(&t)?;
    let v = eigenvector(&t, r.eigenvalues[0])?;
    let gauss = gauss_density_coefficients(a.dim);
    let eigvec_error = v.iter().zip(&gauss).map(|(x, g)| (x - g).norm()).fold(0.0, f64::max);
    let mut csv = Vec::new();
    write_eigenvalue_csv(&r.eigenvalues, &mut csv)?;
    let result = json!({
        "spectrum": r,
        "lambda1": { "re": r.eigenvalues[0].re, "im": r.eigenvalues[0].im },
        "eigenvector_vs_gauss_density": eigvec_error,
        "gauss_density_residual": gauss_density_residual(&t),
        "quadrature_nodes": t.nodes,
    });
    Ok(Outcome::new(to_value(a)?, result).with_csv(csv))
}

#[derive(Args, Debug, Serialize)]
pub struct ZetaArgs {
    #[arg(long, default_value = "1", value_parser = parse_pair)]
    pub s: (f64, f64),
    #[arg(long, default_value_t = 40)]
    pub dim: usize,
}

pub fn zeta_det(a: &ZetaArgs) -> Outcomes {
    let d = fredholm_det(complex(a.s), a.dim)?;
    Ok(Outcome::new(to_value(a)?, json!({ "det": d, "modulus": d.value.norm() })))
}

#[derive(Args, Debug, Serialize)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 1)]
    pub d: u64,
    #[arg(long, default_value = "1", value_parser = parse_pair)]
    pub s: (f64, f64),
    #[arg(long, default_value = "30", value_delimiter = ',', action = clap::ArgAction::Set)]
    pub dims: Vec<usize>,
    /// Radius of the smooth step H.
    #[arg(long, default_value_t = 4.0)]
    pub r: f64,
    /// Half-width of the smooth step H.
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    #[arg(long, value_enum, default_value_t = BlendArg::Quintic)]
    pub blend: BlendArg,
}

pub fn conjecture(a: &ConjectureArgs) -> Outcomes {
    let step = SmoothStep::new(a.r, a.width, a.blend.into())?;
    let r = conjecture_compare(a.d, complex(a.s), &a.dims, &step)?;
    Ok(Outcome::new(to_value(a)?, to_value(&r)?))
}
