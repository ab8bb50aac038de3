//! Norms of the Fourier pieces `L_{n,m}` and the spectral data assembled
//! from them.
//!
//! Each piece is a rank-one projection whose squared norm is
//!
//! ```text
//! |L_{n,m}|^2 = I_{-1} I_{1} / I_0^2,
//! I_k = int_0^1 (r1^{2k} s^{1-k})^n (r2^{2k} (1-s)^{1-k})^m w^k ds.
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use crate::domain::{conjugate_exponent, ClassTag, PowerLaw};
use crate::error::{domain_err, Endpoint, Error, Result};
use crate::measure::BoundaryMeasure;
use crate::numerics::{integrate_peaked_log, log_beta, log_gamma, EndpointExponents, LogValue};

/// Relative tolerance of the piece integrals.
pub const PIECE_TOL: f64 = 1e-11;
/// Default number of discrete eigenvalues listed per family.
pub const DEFAULT_REPORT_N: usize = 32;
/// Grid size for the continuous branch.
const BRANCH_GRID: usize = 2048;
/// Largest `n_max` swept on the full grid; larger sweeps use a lattice.
const FULL_GRID_MAX: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PieceNorm {
    pub n: u32,
    pub m: u32,
    pub log_i_minus1: LogValue,
    pub log_i_0: LogValue,
    pub log_i_plus1: LogValue,
    pub norm_sq: f64,
}

impl PieceNorm {
    /// Angle `theta` with `sec theta = |L_{n,m}|`.
    pub fn theta(&self) -> f64 {
        (1.0 / self.norm_sq.sqrt()).min(1.0).acos()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

/// Norm of the corresponding piece of the Kerzman-Stein operator.
pub fn ks_piece_norm(pn: &PieceNorm) -> f64 {
    (pn.norm_sq - 1.0).max(0.0).sqrt()
}

/// Law of `r^2` at an end, from the law of `G` there.
fn radius_sq_law(mu: &BoundaryMeasure, end: Endpoint) -> PowerLaw {
    let e = mu.domain().profile().endpoint(end);
    let p_law = if e.p.is_infinite() { e.pp_law } else { PowerLaw::ONE };
    e.g_law.plus(PowerLaw::new(1.0, 0.0)).plus(p_law)
}

fn measure_laws(mu: &BoundaryMeasure) -> [PowerLaw; 2] {
    mu.endpoint_laws().unwrap_or_else(|| {
        let e = mu.exponents(1.0);
        [PowerLaw::new(e.left, 0.0), PowerLaw::new(e.right, 0.0)]
    })
}

/// Quadrature exponent for a law, or the divergence it implies.
fn exponent_of(law: PowerLaw, k: i32, end: Endpoint) -> Result<f64> {
    if !law.integrable() {
        return Err(Error::NotAdmissible { k, endpoint: end });
    }
    Ok(if law.power <= -1.0 { -0.999 } else { law.power })
}

/// `ln I_{n,m,k}` by peaked quadrature.
fn log_piece_integral(mu: &BoundaryMeasure, n: u32, m: u32, k: i32, tol: f64) -> Result<LogValue> {
    let (nf, mf, kf) = (f64::from(n), f64::from(m), f64::from(k));
    if k == 0 {
        return Ok(LogValue::from_log(log_beta(nf + 1.0, mf + 1.0)?));
    }
    let d = mu.domain();
    let w = measure_laws(mu);
    let lin = PowerLaw::new(1.0, 0.0);
    let g_law = |end: Endpoint| radius_sq_law(mu, end).scale(kf).plus(lin.scale(1.0 - kf));
    let left = g_law(Endpoint::Left).scale(nf).plus(w[0].scale(kf));
    let right = g_law(Endpoint::Right).scale(mf).plus(w[1].scale(kf));
    let exps = EndpointExponents::new(
        exponent_of(left, k, Endpoint::Left)?,
        exponent_of(right, k, Endpoint::Right)?,
    );
    if let Some((at, a)) = mu.interior_law() {
        if kf * a <= -1.0 {
            return Err(Error::NotAdmissible { k, endpoint: if at < 0.5 { Endpoint::Left } else { Endpoint::Right } });
        }
    }

    let total = nf + mf;
    let peak = if total == 0.0 { 0.5 } else { nf / total };
    let width = if nf == 0.0 || mf == 0.0 {
        1.0 / (total + 1.0)
    } else {
        let (ps, pc) = (peak, 1.0 - peak);
        let c = 2.0 * kf * d.profile().inv_p(ps, pc) + 1.0 - kf;
        let a = (2.0 * nf * mf / (c.max(1e-6) * total * total * total)).sqrt();
        a.max(1.0 / (total + 1.0)).min(0.25)
    };
    let log_core = |s: f64, sc: f64| {
        let (l1, l2) = d.log_radii(s, sc);
        let mut v = kf * mu.log_omega(s, sc);
        if n > 0 {
            v += nf * (2.0 * kf * l1 + (1.0 - kf) * s.ln());
        }
        if m > 0 {
            v += mf * (2.0 * kf * l2 + (1.0 - kf) * sc.ln());
        }
        v
    };
    // adaptive refinement can place a node exactly on an integrable interior pole
    let log_f = |s: f64, sc: f64| {
        let v = log_core(s, sc);
        if v == f64::INFINITY {
            let s2 = s * (1.0 + 4.0 * f64::EPSILON);
            log_core(s2, 1.0 - s2)
        } else {
            v
        }
    };
    integrate_peaked_log(log_f, peak, width, exps, tol)
}

pub fn piece_norm(mu: &BoundaryMeasure, n: u32, m: u32) -> Result<PieceNorm> {
    piece_norm_with_tol(mu, n, m, PIECE_TOL)
}

pub fn piece_norm_with_tol(mu: &BoundaryMeasure, n: u32, m: u32, tol: f64) -> Result<PieceNorm> {
    let lm = log_piece_integral(mu, n, m, -1, tol)?;
    let l0 = log_piece_integral(mu, n, m, 0, tol)?;
    let lp = log_piece_integral(mu, n, m, 1, tol)?;
    let norm_sq = (lm.ln() + lp.ln() - 2.0 * l0.ln()).exp();
    if !norm_sq.is_finite() {
        return Err(Error::NonFinite(norm_sq));
    }
    Ok(PieceNorm { n, m, log_i_minus1: lm, log_i_0: l0, log_i_plus1: lp, norm_sq })
}

/// The eigenvalue `lambda_{p,q,n}` of `L*L` carried by the discrete family
/// of an endpoint with exponent `p`.
pub fn lambda_pqn(p: f64, q: f64, n: u32) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain_err("lambda needs 1 < p < inf"));
    }
    let ps = conjugate_exponent(p);
    let nf = f64::from(n);
    let beta = 1.0 / p - 1.0 / ps;
    let a1 = 2.0 * nf / p + 1.0 + q * beta;
    let a2 = 2.0 * nf / ps + 1.0 - q * beta;
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(domain_err(range_message(p, q)));
    }
    let l = log_gamma(a1)? + log_gamma(a2)? - 2.0 * log_gamma(nf + 1.0)? - a1 * (2.0 / p).ln() - a2 * (2.0 / ps).ln();
    Ok(l.exp())
}

fn range_message(p: f64, q: f64) -> alloc::string::String {
    alloc::format!("|q| = {} is beyond the admissible range |q| < |p/(p-2)| = {} for p = {p}", q.abs(), (p / (p - 2.0)).abs())
}

/// `sqrt(p p*) / 2`, infinite when `p` is 1 or infinite.
pub fn branch_value(p: f64) -> f64 {
    if p == 1.0 || p.is_infinite() {
        f64::INFINITY
    } else {
        (p * conjugate_exponent(p)).sqrt() / 2.0
    }
}

/// Limit of `|L_{n,m}|^2` as `n, m -> inf` with `n/m -> u`.
pub fn asymptotic_diagonal_limit(d: &crate::domain::DomainModel, u: f64) -> f64 {
    let s = if u.is_infinite() { 1.0 } else { u / (1.0 + u) };
    branch_value(d.profile().p(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    LstarL,
    KerzmanStein,
}

/// Closed range of the continuous part of the essential spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub lower: f64,
    pub upper: f64,
    pub argmin: f64,
    pub argmax: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub kind: OperatorKind,
    pub q: f64,
    /// Profile values at `s = 0` and `s = 1`.
    pub endpoint_p: [f64; 2],
    pub branch: Branch,
    /// Eigenvalue families of the ends `s = 0` and `s = 1`, indexed by `n`.
    pub family_left: Vec<f64>,
    pub family_right: Vec<f64>,
    pub includes_zero: bool,
    pub essential_norm: f64,
}

fn branch_of(d: &crate::domain::DomainModel) -> Branch {
    let mut b = Branch { lower: f64::INFINITY, upper: f64::NEG_INFINITY, argmin: 0.0, argmax: 0.0 };
    let prof = d.profile();
    let mut visit = |s: f64, p: f64| {
        let v = branch_value(p);
        if v < b.lower {
            b.lower = v;
            b.argmin = s;
        }
        if v > b.upper {
            b.upper = v;
            b.argmax = s;
        }
    };
    visit(0.0, prof.endpoint(Endpoint::Left).p);
    for j in 1..BRANCH_GRID {
        let s = j as f64 / BRANCH_GRID as f64;
        visit(s, prof.p(s));
    }
    visit(1.0, prof.endpoint(Endpoint::Right).p);
    b
}

/// Essential spectrum of `L*L` or of the Kerzman-Stein operator, for class
/// P and R domains with an order-q measure.
pub fn essential_spectrum(mu: &BoundaryMeasure, kind: OperatorKind, report_n: usize) -> Result<SpectrumReport> {
    let d = mu.domain();
    let class = d.class_tag();
    if !matches!(class, ClassTag::P | ClassTag::R) {
        return Err(Error::UnsupportedClass(class));
    }
    let q = mu.order_q().ok_or_else(|| domain_err("essential spectrum needs a measure of some order q"))?;
    mu.require_admissible()?;
    let p = [d.profile().endpoint(Endpoint::Left).p, d.profile().endpoint(Endpoint::Right).p];
    let family = |p: f64| (0..report_n).map(|n| lambda_pqn(p, q, n as u32)).collect::<Result<Vec<f64>>>();
    let (fl, fr) = (family(p[0])?, family(p[1])?);
    let branch = branch_of(d);
    let top = fl.iter().chain(fr.iter()).fold(branch.upper, |a, b| a.max(*b));
    let report = SpectrumReport {
        kind: OperatorKind::LstarL,
        q,
        endpoint_p: p,
        branch,
        family_left: fl,
        family_right: fr,
        includes_zero: true,
        essential_norm: top.sqrt(),
    };
    Ok(match kind {
        OperatorKind::LstarL => report,
        OperatorKind::KerzmanStein => to_kerzman_stein(report),
    })
}

fn ks_magnitude(lambda: f64) -> f64 {
    (lambda - 1.0).max(0.0).sqrt()
}

fn to_kerzman_stein(r: SpectrumReport) -> SpectrumReport {
    let top = r.essential_norm * r.essential_norm;
    SpectrumReport {
        kind: OperatorKind::KerzmanStein,
        branch: Branch {
            lower: ks_magnitude(r.branch.lower),
            upper: ks_magnitude(r.branch.upper),
            ..r.branch
        },
        family_left: r.family_left.iter().map(|l| ks_magnitude(*l)).collect(),
        family_right: r.family_right.iter().map(|l| ks_magnitude(*l)).collect(),
        essential_norm: ks_magnitude(top),
        ..r
    }
}

/// Result of a sweep for `|L| = sup |L_{n,m}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    /// Largest observed `|L_{n,m}|`.
    pub sup: f64,
    pub sup_norm_sq: f64,
    pub arg: (u32, u32),
    /// Asymptotic bound on the pieces, `inf` when the profile reaches 1 or
    /// infinity.
    pub ceiling: f64,
    pub saturated: bool,
    /// `(n, |L_{n,n}|^2)` along the sampled diagonal.
    pub diagonal: Vec<(u32, f64)>,
    /// The diagonal is increasing and exceeds every finite ceiling.
    pub unbounded_trend: bool,
}

/// Indices swept by [`operator_norm_estimate`]: all of `0..=n_max` when
/// small, otherwise small values plus a geometric lattice.
pub fn sweep_indices(n_max: u32) -> Vec<u32> {
    if n_max <= FULL_GRID_MAX {
        return (0..=n_max).collect();
    }
    let mut v: Vec<u32> = (0..=16).collect();
    let mut x = 16.0f64;
    loop {
        x *= 1.25;
        let k = x.round() as u32;
        if k >= n_max {
            break;
        }
        v.push(k);
    }
    v.push(n_max);
    v
}

/// `sqrt(max |L_{n,m}|^2)` over the asymptotic data: the essential norm for
/// class P and R, otherwise the top of the branch.
fn ceiling_of(mu: &BoundaryMeasure) -> f64 {
    if let Ok(r) = essential_spectrum(mu, OperatorKind::LstarL, DEFAULT_REPORT_N) {
        return r.essential_norm;
    }
    branch_of(mu.domain()).upper.sqrt()
}

/// Sweeps the pieces with `n, m <= n_max` through `piece` (which may be a
/// cached or parallel evaluator) and compares with the asymptotic ceiling.
pub fn operator_norm_estimate_with<F>(mu: &BoundaryMeasure, n_max: u32, mut piece: F) -> Result<NormEstimate>
where
    F: FnMut(&[(u32, u32)]) -> Result<Vec<PieceNorm>>,
{
    let idx = sweep_indices(n_max);
    let mut grid = Vec::with_capacity(idx.len() * idx.len());
    for &n in &idx {
        for &m in &idx {
            grid.push((n, m));
        }
    }
    let pieces = piece(&grid)?;
    let mut best = (f64::NEG_INFINITY, (0, 0));
    let mut diagonal = Vec::new();
    for pn in &pieces {
        if pn.norm_sq > best.0 {
            best = (pn.norm_sq, (pn.n, pn.m));
        }
        if pn.n == pn.m {
            diagonal.push((pn.n, pn.norm_sq));
        }
    }
    diagonal.sort_by_key(|x| x.0);
    let ceiling = ceiling_of(mu);
    let sup = best.0.sqrt();
    let (a, b) = best.1;
    let saturated = ceiling.is_finite()
        && ((sup - ceiling).abs() <= 1e-4 || (sup > ceiling && a.max(b) <= n_max / 2));
    let tail = &diagonal[diagonal.len().saturating_sub(6)..];
    let increasing = tail.len() >= 3 && tail.windows(2).all(|w| w[1].1 > w[0].1);
    let unbounded_trend = increasing && (!ceiling.is_finite() || sup > ceiling + 1e-3);
    Ok(NormEstimate { sup, sup_norm_sq: best.0, arg: best.1, ceiling, saturated, diagonal, unbounded_trend })
}

pub fn operator_norm_estimate(mu: &BoundaryMeasure, n_max: u32) -> Result<NormEstimate> {
    operator_norm_estimate_with(mu, n_max, |grid| grid.iter().map(|&(n, m)| piece_norm(mu, n, m)).collect())
}
