//! The subcommands. Each returns the full text of its output.

use std::fmt::Write as _;
use std::sync::Arc;

use leray_core::domain::{ClassTag, DomainModel};
use leray_core::duality::{square_grid, verify_duality, DualPair, DUALITY_TOL};
use leray_core::measure::{levi_norm, Admissibility, BoundaryMeasure, Failure};
use leray_core::operator::{apply_to_monomial, leray_kernel_density, InteriorPoint, MonomialFunction, INTERIOR_MARGIN};
use leray_core::spectrum::{essential_spectrum, ks_piece_norm, piece_norm_with_tol, OperatorKind, PieceNorm};
use leray_core::Endpoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::spec::{DomainSpec, MeasureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// `[0, n_max]^2`.
    Square,
    /// `(n, n)` for `n <= n_max`.
    Diagonal,
    /// `(n0, m)` for `m <= n_max`.
    Column,
}

/// Everything a run depends on, echoed into its output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub domain: DomainSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_values: Option<Vec<f64>>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: &'static str, domain: &DomainModel, format: Format) -> Self {
        RunConfig {
            command,
            domain: DomainSpec::of_model(domain),
            measure: None,
            n_max: None,
            grid: None,
            n0: None,
            report_n: None,
            kind: None,
            tol: None,
            q_values: None,
            format,
        }
    }

    fn json(&self) -> Value {
        serde_json::to_value(self).expect("config is serializable")
    }

    fn csv_header(&self) -> String {
        format!("# leray {}\n# config: {}\n", self.command, serde_json::to_string(self).expect("config is serializable"))
    }
}

/// A float as JSON; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn json_only(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::spec(format!("{} only writes json", cfg.command))),
    }
}

// ---------------------------------------------------------------------------
// domain-info

const INFO_GRID: usize = 2048;

fn notes(d: &DomainModel) -> Vec<String> {
    let prof = d.profile();
    let mut out = Vec::new();
    if d.class_tag() == ClassTag::TildeR {
        for end in [Endpoint::Left, Endpoint::Right] {
            let p = prof.endpoint(end).p;
            if p == 1.0 {
                out.push(format!("R-membership fails: p̆* unbounded at {end}"));
            } else if p.is_infinite() {
                out.push(format!("R-membership fails: p̆ unbounded at {end}"));
            }
        }
    }
    if let Some(i) = prof.interior() {
        let what = if i.p == 1.0 { "reaches 1" } else { "is unbounded" };
        out.push(format!("profile {what} at interior point s={}", i.at));
    }
    out
}

fn range(v: impl Iterator<Item = f64>) -> Value {
    let (lo, hi) = v.filter(|x| !x.is_nan()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    json!([num(lo), num(hi)])
}

pub fn domain_info(d: &DomainModel, cfg: &RunConfig) -> Result<String, CliError> {
    let prof = d.profile();
    let ends = [prof.endpoint(Endpoint::Left).p, prof.endpoint(Endpoint::Right).p];
    let interior: Vec<f64> = (1..INFO_GRID).map(|j| j as f64 / INFO_GRID as f64).collect();
    let samples: Vec<(f64, f64, (f64, f64), Option<[f64; 3]>)> = interior
        .iter()
        .map(|&s| {
            let k = d.curvatures(s).ok().map(|c| [c.kappa1, c.kappa2, c.kappa3]);
            (s, prof.p(s), d.radii(s), k)
        })
        .collect();
    match cfg.format {
        Format::Json => {
            let ps = ends.iter().copied().chain(samples.iter().map(|x| x.1));
            let k = |i: usize| range(samples.iter().filter_map(|x| x.3.map(|c| c[i])));
            let v = json!({
                "config": cfg.json(),
                "class": d.class_tag().as_str(),
                "b1": num(d.b1()),
                "b2": num(d.b2()),
                "exact_exponent": d.exact_exponent().map(num),
                "endpoint_p": nums(&ends),
                "p_range": range(ps),
                "curvature": { "kappa1": k(0), "kappa2": k(1), "kappa3": k(2) },
                "levi_norm": range(interior.iter().map(|&s| levi_norm(d, s))),
                "notes": notes(d),
            });
            Ok(pretty(&v))
        }
        Format::Csv => {
            let mut out = cfg.csv_header();
            writeln!(out, "# class: {}", d.class_tag().as_str()).unwrap();
            out.push_str("s,p,r1,r2,kappa1,kappa2,kappa3\n");
            for (s, p, (r1, r2), k) in &samples {
                let k = k.unwrap_or([f64::NAN; 3]);
                writeln!(out, "{},{},{},{},{},{},{}", fmt17(*s), fmt17(*p), fmt17(*r1), fmt17(*r2), fmt17(k[0]), fmt17(k[1]), fmt17(k[2]))
                    .unwrap();
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// piece-norms

pub fn grid_points(grid: Grid, n_max: u32, n0: u32) -> Vec<(u32, u32)> {
    match grid {
        Grid::Square => square_grid(n_max),
        Grid::Diagonal => (0..=n_max).map(|n| (n, n)).collect(),
        Grid::Column => (0..=n_max).map(|m| (n0, m)).collect(),
    }
}

/// Piece norms over `points` in parallel, sorted by `(n, m)`.
pub fn sweep(mu: &BoundaryMeasure, points: &[(u32, u32)], tol: f64) -> Result<Vec<PieceNorm>, CliError> {
    let mut out = points
        .par_iter()
        .map(|&(n, m)| piece_norm_with_tol(mu, n, m, tol))
        .collect::<leray_core::Result<Vec<_>>>()?;
    out.sort_by_key(|p| (p.n, p.m));
    out.dedup_by_key(|p| (p.n, p.m));
    Ok(out)
}

pub fn piece_norms(mu: &BoundaryMeasure, cfg: &RunConfig) -> Result<String, CliError> {
    mu.require_admissible()?;
    let points = grid_points(cfg.grid.unwrap_or(Grid::Square), cfg.n_max.unwrap_or(0), cfg.n0.unwrap_or(0));
    let rows = sweep(mu, &points, cfg.tol.unwrap_or(leray_core::spectrum::PIECE_TOL))?;
    match cfg.format {
        Format::Csv => {
            let mut out = cfg.csv_header();
            out.push_str("n,m,norm_sq,ks_norm,logI_m1,logI_0,logI_p1\n");
            for p in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    p.n,
                    p.m,
                    fmt17(p.norm_sq),
                    fmt17(ks_piece_norm(p)),
                    fmt17(p.log_i_minus1.ln()),
                    fmt17(p.log_i_0.ln()),
                    fmt17(p.log_i_plus1.ln())
                )
                .unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|p| {
                    json!({
                        "n": p.n,
                        "m": p.m,
                        "norm_sq": num(p.norm_sq),
                        "ks_norm": num(ks_piece_norm(p)),
                        "logI_m1": num(p.log_i_minus1.ln()),
                        "logI_0": num(p.log_i_0.ln()),
                        "logI_p1": num(p.log_i_plus1.ln()),
                    })
                })
                .collect();
            Ok(pretty(&json!({ "config": cfg.json(), "rows": rows })))
        }
    }
}

// ---------------------------------------------------------------------------
// spectrum

pub fn spectrum(mu: &BoundaryMeasure, kind: OperatorKind, cfg: &RunConfig) -> Result<String, CliError> {
    let r = essential_spectrum(mu, kind, cfg.report_n.unwrap_or(leray_core::spectrum::DEFAULT_REPORT_N))?;
    let kind = match r.kind {
        OperatorKind::LstarL => "lstarl",
        OperatorKind::KerzmanStein => "ks",
    };
    match cfg.format {
        Format::Json => {
            let v = json!({
                "config": cfg.json(),
                "kind": kind,
                "q": num(r.q),
                "endpoint_p": nums(&r.endpoint_p),
                "branch": {
                    "lower": num(r.branch.lower),
                    "upper": num(r.branch.upper),
                    "argmin": num(r.branch.argmin),
                    "argmax": num(r.branch.argmax),
                },
                "family_left": nums(&r.family_left),
                "family_right": nums(&r.family_right),
                "includes_zero": r.includes_zero,
                "essential_norm": num(r.essential_norm),
            });
            Ok(pretty(&v))
        }
        Format::Csv => {
            let mut out = cfg.csv_header();
            writeln!(out, "# essential_norm: {}", fmt17(r.essential_norm)).unwrap();
            out.push_str("series,index,value\n");
            writeln!(out, "branch_lower,0,{}", fmt17(r.branch.lower)).unwrap();
            writeln!(out, "branch_upper,0,{}", fmt17(r.branch.upper)).unwrap();
            for (name, fam) in [("family_left", &r.family_left), ("family_right", &r.family_right)] {
                for (i, x) in fam.iter().enumerate() {
                    writeln!(out, "{name},{i},{}", fmt17(*x)).unwrap();
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// dual

/// Default side of the square grid checked by `dual`.
pub const DUAL_GRID: u32 = 10;

/// Returns the output and whether the verification passed.
pub fn dual(mu: Arc<BoundaryMeasure>, cfg: &RunConfig) -> Result<(String, bool), CliError> {
    json_only(cfg)?;
    let pair = DualPair::new(mu)?;
    let grid_n = cfg.n_max.unwrap_or(DUAL_GRID);
    let r = verify_duality(&pair, &square_grid(grid_n))?;
    let pd = &pair.polar;
    let v = json!({
        "config": cfg.json(),
        "polar": serde_json::to_value(DomainSpec::of_model(pd)).expect("spec"),
        "polar_class": pd.class_tag().as_str(),
        "polar_endpoint_p": nums(&[pd.profile().endpoint(Endpoint::Left).p, pd.profile().endpoint(Endpoint::Right).p]),
        "dual_measure": pair.measure_dual.label(),
        "verification": {
            "grid": [0, grid_n],
            "checked": r.checked,
            "max_discrepancy": num(r.max_discrepancy),
            "worst": [r.worst.0, r.worst.1],
            "tolerance": DUALITY_TOL,
            "passed": r.passed,
        },
    });
    Ok((pretty(&v), r.passed))
}

// ---------------------------------------------------------------------------
// admissible

pub fn admissible(d: Arc<DomainModel>, qs: &[f64], named: Option<MeasureSpec>, cfg: &RunConfig) -> Result<String, CliError> {
    let mut measures: Vec<BoundaryMeasure> = qs.iter().map(|&q| MeasureSpec::OrderQ { q }.build(d.clone())).collect();
    if let Some(m) = named {
        measures.push(m.build(d.clone()));
    }
    let threshold = match d.class_tag() {
        ClassTag::OutsideTildeR => None,
        _ => MeasureSpec::Mu0.build(d.clone()).admissibility().threshold,
    };
    let rows: Vec<_> = measures
        .iter()
        .map(|m| {
            let r = m.admissibility();
            let failure = match r.failure {
                Some(Failure::Endpoint { k, endpoint }) => format!("I_{k} diverges at {endpoint}"),
                Some(Failure::Interior { k, at }) => format!("I_{k} diverges at s={at}"),
                None => String::new(),
            };
            (m.order_q(), m.label().to_string(), r, failure)
        })
        .collect();
    match cfg.format {
        Format::Csv => {
            let mut out = cfg.csv_header();
            match threshold {
                Some(t) => writeln!(out, "# threshold: |q| < {}", fmt17(t)).unwrap(),
                None => writeln!(out, "# threshold: none (class {})", d.class_tag().as_str()).unwrap(),
            }
            out.push_str("q,measure,verdict,boundary_case,numeric,failure\n");
            for (q, label, r, failure) in &rows {
                let q = q.map(fmt17).unwrap_or_default();
                writeln!(out, "{q},{label},{},{},{},{failure}", r.verdict.as_str(), r.boundary_case, r.numeric).unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(q, label, r, failure)| {
                    json!({
                        "q": q.map(num),
                        "measure": label,
                        "verdict": r.verdict.as_str(),
                        "admissible": r.verdict == Admissibility::Admissible,
                        "boundary_case": r.boundary_case,
                        "numeric": r.numeric,
                        "failure": if failure.is_empty() { Value::Null } else { json!(failure) },
                    })
                })
                .collect();
            Ok(pretty(&json!({
                "config": cfg.json(),
                "class": d.class_tag().as_str(),
                "threshold": threshold.map(num),
                "rows": rows,
            })))
        }
    }
}

// ---------------------------------------------------------------------------
// kernel-eval

pub struct KernelQuery {
    pub w1: Complex64,
    pub w2: Complex64,
    pub n: u32,
    pub m: u32,
    /// Boundary point `(s, theta1, theta2)` for the kernel density.
    pub at: Option<(f64, f64, f64)>,
}

fn cnum(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn kernel_eval(d: &DomainModel, query: &KernelQuery, cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg)?;
    let w = InteriorPoint::checked(d, query.w1, query.w2, INTERIOR_MARGIN)?;
    let f = MonomialFunction::holomorphic(i64::from(query.n), i64::from(query.m));
    let lf = apply_to_monomial(d, &f, w)?;
    let direct = query.w1.powi(query.n as i32) * query.w2.powi(query.m as i32);
    let coefficient = if direct.norm() > 0.0 { Some(lf / direct) } else { None };
    let density = match query.at {
        Some((s, t1, t2)) => Some(json!({
            "s": num(s),
            "theta1": num(t1),
            "theta2": num(t2),
            "density": cnum(leray_kernel_density(d, s, t1, t2, w)?),
        })),
        None => None,
    };
    if !(lf.re.is_finite() && lf.im.is_finite()) {
        return Err(CliError::numerical("transform of the monomial is not finite"));
    }
    Ok(pretty(&json!({
        "config": cfg.json(),
        "point": [cnum(query.w1), cnum(query.w2)],
        "monomial": [query.n, query.m],
        "transform": cnum(lf),
        "monomial_value": cnum(direct),
        "coefficient": coefficient.map(cnum),
        "kernel": density,
    })))
}
