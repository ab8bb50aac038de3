//! Convex complete Reinhardt domains described by a generator profile.
//!
//! A domain is fixed by a profile `p(s)` on `[0, 1]` (the osculating exponent
//! along the boundary) and two scale constants `b1`, `b2`. The boundary radii
//! are recovered from
//!
//! ```text
//! ln r1(s) = ln b1 - int_s^1 dt / (t p(t))
//! ln r2(s) = ln b2 - int_0^s dt / ((1 - t) p(t))
//! ```
//!
//! Profiles are handled through `1/p`, which stays finite where `p` blows up.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{domain_err, Endpoint, Error, Result};
use crate::numerics::{gk_local, log_add_exp};

/// Membership of a domain in the nested classes P, R, R~.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassTag {
    /// A weighted `l^p` ball.
    P,
    R,
    TildeR,
    OutsideTildeR,
}

impl ClassTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassTag::P => "P",
            ClassTag::R => "R",
            ClassTag::TildeR => "TildeR",
            ClassTag::OutsideTildeR => "OutsideTildeR",
        }
    }
}

/// Declared convergence of the Dini-type tail integral at an endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    DiniConvergent,
    DiniDivergent,
    Unknown,
}

/// Asymptotic law `s^power * ln(1/s)^log_power` near an endpoint
/// (with `s` replaced by `1 - s` at the right end).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub power: f64,
    pub log_power: f64,
}

impl PowerLaw {
    pub const ONE: PowerLaw = PowerLaw { power: 0.0, log_power: 0.0 };

    pub fn new(power: f64, log_power: f64) -> Self {
        PowerLaw { power, log_power }
    }

    pub fn scale(self, c: f64) -> Self {
        PowerLaw::new(c * self.power, c * self.log_power)
    }

    pub fn plus(self, o: PowerLaw) -> Self {
        PowerLaw::new(self.power + o.power, self.log_power + o.log_power)
    }

    /// Whether the law is integrable at its endpoint.
    pub fn integrable(self) -> bool {
        self.power > -1.0 || (self.power == -1.0 && self.log_power < -1.0)
    }
}

/// Behaviour of a profile at one end of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointData {
    /// Limit of the profile, in `[1, inf]`.
    pub p: f64,
    pub regularity: Regularity,
    /// Both divergence conditions needed for a generator hold at this end.
    pub stretched: bool,
    /// Law of `r1^2 r2^2 / (p s (1 - s))`.
    pub g_law: PowerLaw,
    /// Law of `p p*`.
    pub pp_law: PowerLaw,
}

impl EndpointData {
    fn regular(p: f64) -> Self {
        EndpointData {
            p,
            regularity: Regularity::DiniConvergent,
            stretched: true,
            g_law: PowerLaw::new(2.0 / p - 1.0, 0.0),
            pp_law: PowerLaw::ONE,
        }
    }

    fn conjugate(&self) -> Self {
        EndpointData {
            p: conjugate_exponent(self.p),
            regularity: self.regularity,
            stretched: self.stretched,
            g_law: self.g_law.scale(-1.0).plus(self.pp_law.scale(-1.0)),
            pp_law: self.pp_law,
        }
    }
}

/// An interior point where the profile reaches 1 or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorDegeneracy {
    pub at: f64,
    /// Profile value there: 1 or infinity.
    pub p: f64,
    /// Two-sided power of `r1^2 r2^2 / (p s (1 - s))` in `|s - at|`.
    pub g_power: f64,
    /// Two-sided power of `p p*` in `|s - at|`.
    pub pp_power: f64,
}

impl InteriorDegeneracy {
    fn conjugate(&self) -> Self {
        InteriorDegeneracy {
            at: self.at,
            p: conjugate_exponent(self.p),
            g_power: -self.g_power - self.pp_power,
            pp_power: self.pp_power,
        }
    }
}

/// `p / (p - 1)`, mapping 1 and infinity to each other.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

// ---------------------------------------------------------------------------
// tabulated profiles

/// Monotone piecewise-cubic interpolant on a uniform grid over `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::InvalidProfile("tabulated profile needs at least 3 nodes".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 1.0) {
            return Err(Error::InvalidProfile(format!("tabulated value {v} is not a finite number >= 1")));
        }
        let h = 1.0 / (n - 1) as f64;
        let delta: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = alloc::vec![0.0; n];
        for k in 1..n - 1 {
            let (a, b) = (delta[k - 1], delta[k]);
            slopes[k] = if a * b <= 0.0 { 0.0 } else { 2.0 / (1.0 / a + 1.0 / b) };
        }
        let end_slope = |d0: f64, d1: f64| {
            let d = 0.5 * (3.0 * d0 - d1);
            if d * d0 <= 0.0 {
                0.0
            } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                d
            }
        };
        slopes[0] = end_slope(delta[0], delta[1]);
        slopes[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
        Ok(Tabulated { values, slopes })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.values.len();
        let scaled = s.clamp(0.0, 1.0) * (n - 1) as f64;
        let k = (scaled.floor() as usize).min(n - 2);
        let t = scaled - k as f64;
        let h = 1.0 / (n - 1) as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (3.0 * t2 - 2.0 * t3) * self.values[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    /// Numerical Dini tail test at one end: the contributions of dyadic
    /// shells approaching the endpoint must decay geometrically.
    fn dini_tail(&self, end: Endpoint) -> Result<Regularity> {
        let n = self.values.len();
        let h = 1.0 / (n - 1) as f64;
        let (p_end, eval): (f64, Box<dyn Fn(f64) -> f64 + '_>) = match end {
            Endpoint::Left => (self.values[0], Box::new(move |t: f64| self.eval(t))),
            Endpoint::Right => (self.values[n - 1], Box::new(move |t: f64| self.eval(1.0 - t))),
        };
        let mut shells = Vec::new();
        for k in 0..40 {
            let hi = h * 0.5f64.powi(k);
            let lo = 0.5 * hi;
            let c = gk_local(&mut |t: f64| (1.0 / eval(t) - 1.0 / p_end) / t, lo, hi, 1e-18);
            shells.push(c.abs());
        }
        let last = shells[shells.len() - 1];
        let prev = shells[shells.len() - 2];
        if last < 1e-16 && prev < 1e-16 {
            return Ok(Regularity::DiniConvergent);
        }
        let ratio = last / prev;
        if ratio < 0.9 {
            Ok(Regularity::DiniConvergent)
        } else if ratio > 0.98 {
            Ok(Regularity::DiniDivergent)
        } else {
            Err(Error::Inconclusive(format!("Dini tail ratio {ratio:.3} at {end}")))
        }
    }
}

// ---------------------------------------------------------------------------
// generator profiles

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    Constant(f64),
    Tabulated(Tabulated),
    /// Dips to 1 at `s = 1/2`; `1 + 2(2s - 1)^2` for `|s - 1/2| <= inner`,
    /// blended smoothly into 2 for `|s - 1/2| >= outer`.
    Example1 { inner: f64, outer: f64 },
    /// `|s - 1/2|^(-nu)` for `|s - 1/2| <= inner`, blended into 2 beyond `outer`.
    Example2 { nu: f64, inner: f64, outer: f64 },
    /// `ln(10/s) / (ln(10/s) - 1/2)`.
    Example3,
    /// Pointwise conjugate exponent of another profile.
    Conjugate(Box<GeneratorProfile>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorProfile {
    kind: ProfileKind,
    ends: [EndpointData; 2],
    interior: Option<InteriorDegeneracy>,
}

/// `C^infinity` step: 0 for `t <= 0`, 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

fn blend_weight(s: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - (s - 0.5).abs()) / (outer - inner))
}

const LN_10: f64 = core::f64::consts::LN_10;

impl GeneratorProfile {
    pub fn constant(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(domain_err(format!("constant profile needs 1 < p < inf, got {p}")));
        }
        let e = EndpointData::regular(p);
        Ok(GeneratorProfile { kind: ProfileKind::Constant(p), ends: [e, e], interior: None })
    }

    /// Profile interpolated from values on a uniform grid over `[0, 1]`.
    /// Endpoint Dini behaviour is left `Unknown` and tested numerically.
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        let table = Tabulated::new(values)?;
        let v = table.values();
        let (p0, p1) = (v[0], v[v.len() - 1]);
        if p0 <= 1.0 || p1 <= 1.0 {
            return Err(Error::InvalidProfile("tabulated endpoint values must exceed 1".into()));
        }
        let mut ends = [EndpointData::regular(p0), EndpointData::regular(p1)];
        ends[0].regularity = Regularity::Unknown;
        ends[1].regularity = Regularity::Unknown;
        let interior = v.iter().position(|x| *x == 1.0).map(|k| InteriorDegeneracy {
            at: k as f64 / (v.len() - 1) as f64,
            p: 1.0,
            g_power: 0.0,
            pp_power: -2.0,
        });
        Ok(GeneratorProfile { kind: ProfileKind::Tabulated(table), ends, interior })
    }

    pub fn example1(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer && outer < 0.5) {
            return Err(domain_err("example1 needs 0 < inner < outer < 1/2"));
        }
        let e = EndpointData::regular(2.0);
        Ok(GeneratorProfile {
            kind: ProfileKind::Example1 { inner, outer },
            ends: [e, e],
            interior: Some(InteriorDegeneracy { at: 0.5, p: 1.0, g_power: 0.0, pp_power: -2.0 }),
        })
    }

    pub fn example1_default() -> Self {
        Self::example1(0.25, 0.45).expect("default parameters are valid")
    }

    /// Blend radii default to `0.45 * 2^(-1/nu)` and twice that, which keeps
    /// the profile at least 2 everywhere.
    pub fn example2(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(domain_err(format!("example2 needs 0 < nu < 1, got {nu}")));
        }
        let outer = 0.9 * 2f64.powf(-1.0 / nu);
        Self::example2_with(nu, 0.5 * outer, outer)
    }

    pub fn example2_with(nu: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(domain_err(format!("example2 needs 0 < nu < 1, got {nu}")));
        }
        if !(0.0 < inner && inner < outer && outer < 0.5 && outer <= 2f64.powf(-1.0 / nu)) {
            return Err(domain_err("example2 needs 0 < inner < outer <= min(1/2, 2^(-1/nu))"));
        }
        let e = EndpointData::regular(2.0);
        Ok(GeneratorProfile {
            kind: ProfileKind::Example2 { nu, inner, outer },
            ends: [e, e],
            interior: Some(InteriorDegeneracy { at: 0.5, p: f64::INFINITY, g_power: nu, pp_power: -nu }),
        })
    }

    pub fn example3() -> Self {
        let p1 = LN_10 / (LN_10 - 0.5);
        let left = EndpointData {
            p: 1.0,
            regularity: Regularity::DiniDivergent,
            stretched: true,
            g_law: PowerLaw::new(1.0, 1.0),
            pp_law: PowerLaw::new(0.0, 1.0),
        };
        GeneratorProfile { kind: ProfileKind::Example3, ends: [left, EndpointData::regular(p1)], interior: None }
    }

    /// Overrides the endpoint regularity of a tabulated profile.
    pub fn with_regularity(mut self, left: Regularity, right: Regularity) -> Self {
        self.ends[0].regularity = left;
        self.ends[1].regularity = right;
        self
    }

    /// The profile `p* = p / (p - 1)`. Conjugating twice returns the original.
    pub fn conjugate(&self) -> GeneratorProfile {
        match &self.kind {
            ProfileKind::Conjugate(inner) => (**inner).clone(),
            ProfileKind::Constant(p) => {
                GeneratorProfile::constant(conjugate_exponent(*p)).expect("conjugate of p > 1 is > 1")
            }
            _ => GeneratorProfile {
                kind: ProfileKind::Conjugate(Box::new(self.clone())),
                ends: [self.ends[0].conjugate(), self.ends[1].conjugate()],
                interior: self.interior.map(|d| d.conjugate()),
            },
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn endpoint(&self, end: Endpoint) -> &EndpointData {
        match end {
            Endpoint::Left => &self.ends[0],
            Endpoint::Right => &self.ends[1],
        }
    }

    pub fn interior(&self) -> Option<&InteriorDegeneracy> {
        self.interior.as_ref()
    }

    /// `1 / p` at the point `(s, 1 - s)`.
    pub fn inv_p(&self, s: f64, sc: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(p) => 1.0 / p,
            ProfileKind::Tabulated(t) => {
                if s <= 0.5 {
                    1.0 / t.eval(s)
                } else {
                    1.0 / t.eval(1.0 - sc)
                }
            }
            ProfileKind::Example1 { inner, outer } => {
                let x = s - 0.5;
                let w = blend_weight(s, *inner, *outer);
                1.0 / (w * (1.0 + 8.0 * x * x) + 2.0 * (1.0 - w))
            }
            ProfileKind::Example2 { nu, inner, outer } => {
                let ax = (s - 0.5).abs();
                if ax == 0.0 {
                    return 0.0;
                }
                let w = blend_weight(s, *inner, *outer);
                let xn = ax.powf(*nu);
                xn / (w + 2.0 * (1.0 - w) * xn)
            }
            ProfileKind::Example3 => {
                if s <= 0.0 {
                    return 1.0;
                }
                let l = LN_10 - s.ln();
                1.0 - 0.5 / l
            }
            ProfileKind::Conjugate(inner) => 1.0 - inner.inv_p(s, sc),
        }
    }

    /// The profile value, possibly infinite.
    pub fn p(&self, s: f64) -> f64 {
        self.p_pair(s, 1.0 - s)
    }

    pub fn p_pair(&self, s: f64, sc: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(p) => *p,
            _ => {
                let inv = self.inv_p(s, sc);
                if inv == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / inv
                }
            }
        }
    }

    /// The conjugate exponent `p / (p - 1)` at `s`.
    pub fn p_conjugate(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(p) => conjugate_exponent(*p),
            _ => {
                let c = 1.0 - self.inv_p(s, 1.0 - s);
                if c == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / c
                }
            }
        }
    }

    fn base_tabulated(&self) -> Option<&Tabulated> {
        match &self.kind {
            ProfileKind::Tabulated(t) => Some(t),
            ProfileKind::Conjugate(inner) => inner.base_tabulated(),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        for j in 0..=2048 {
            let s = f64::from(j) / 2048.0;
            let v = self.inv_p(s, 1.0 - s);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProfile(format!("1/p = {v} out of [0, 1] at s = {s}")));
            }
        }
        Ok(())
    }
}

/// Class membership of the domain generated by `profile`.
///
/// Closed-form families are classified from their declared endpoint data;
/// tabulated profiles with unknown endpoint regularity get a numerical Dini
/// tail test, which fails loudly when inconclusive.
pub fn classify(profile: &GeneratorProfile) -> Result<ClassTag> {
    if let ProfileKind::Constant(_) = profile.kind {
        return Ok(ClassTag::P);
    }
    if profile.interior.is_some() {
        return Ok(ClassTag::OutsideTildeR);
    }
    let mut reg = [profile.ends[0].regularity, profile.ends[1].regularity];
    if let Some(t) = profile.base_tabulated() {
        for (i, end) in [Endpoint::Left, Endpoint::Right].into_iter().enumerate() {
            if reg[i] == Regularity::Unknown {
                reg[i] = t.dini_tail(end)?;
            }
        }
    }
    let finite = profile.ends.iter().all(|e| e.p > 1.0 && e.p.is_finite());
    if finite && reg.iter().all(|r| *r == Regularity::DiniConvergent) {
        return Ok(ClassTag::R);
    }
    if profile.ends.iter().all(|e| e.stretched) {
        return Ok(ClassTag::TildeR);
    }
    Ok(ClassTag::OutsideTildeR)
}

// ---------------------------------------------------------------------------
// radius reconstruction

const FINE_STEPS: usize = 4096;
const FINE_FIRST: usize = 64;
const COARSE_PER_UNIT: f64 = 16.0;
/// Below `e^LN_FLOOR` the integrand is frozen at its floor value; parameters
/// that small only appear in analytic tail corrections.
const LN_FLOOR: f64 = -700.0;

/// Neumaier running sum; thousands of table cells are accumulated.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) -> f64 {
        let t = self.sum + x;
        self.carry += if self.sum.abs() >= x.abs() { (self.sum - t) + x } else { (x - t) + self.sum };
        self.sum = t;
        self.sum + self.carry
    }
}

/// Cumulative values of `T(x) = int_x^{1/2} h(t)/t dt` on a uniform grid for
/// `x >= 1/64` and on a grid in `ln x` below that.
#[derive(Clone, Debug)]
struct HalfTable {
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

impl HalfTable {
    fn build<H: Fn(f64) -> f64>(h: &H) -> Self {
        let cells = FINE_STEPS - FINE_FIRST;
        let mut fine = alloc::vec![0.0; cells + 1];
        let node = |j: usize| j as f64 / FINE_STEPS as f64;
        let mid = FINE_STEPS / 2 - FINE_FIRST;
        let mut acc = Compensated::default();
        for i in (0..mid).rev() {
            let (a, b) = (node(i + FINE_FIRST), node(i + 1 + FINE_FIRST));
            fine[i] = acc.add(gk_local(&mut |t| h(t) / t, a, b, 1e-18));
        }
        let mut acc = Compensated::default();
        for i in mid..cells {
            let (a, b) = (node(i + FINE_FIRST), node(i + 1 + FINE_FIRST));
            fine[i + 1] = acc.add(-gk_local(&mut |t| h(t) / t, a, b, 1e-18));
        }
        let mut acc = Compensated { sum: fine[0], carry: 0.0 };
        let u0 = (FINE_FIRST as f64 / FINE_STEPS as f64).ln();
        let steps = ((u0 - LN_FLOOR) * COARSE_PER_UNIT).ceil() as usize;
        let mut coarse = Vec::with_capacity(steps + 1);
        coarse.push(fine[0]);
        for k in 0..steps {
            let hi = u0 - k as f64 / COARSE_PER_UNIT;
            let lo = u0 - (k + 1) as f64 / COARSE_PER_UNIT;
            let cell = gk_local(&mut |w: f64| h(w.exp()), lo, hi, 1e-18);
            coarse.push(acc.add(cell));
        }
        HalfTable { fine, coarse }
    }

    fn at_one(&self) -> f64 {
        self.fine[self.fine.len() - 1]
    }

    fn eval<H: Fn(f64) -> f64>(&self, h: &H, x: f64) -> f64 {
        if x <= 0.0 {
            return if h(0.0) > 0.0 { f64::INFINITY } else { self.coarse[self.coarse.len() - 1] };
        }
        let first = FINE_FIRST as f64 / FINE_STEPS as f64;
        if x >= first {
            let j = ((x * FINE_STEPS as f64).round() as usize).clamp(FINE_FIRST, FINE_STEPS);
            let xj = j as f64 / FINE_STEPS as f64;
            self.fine[j - FINE_FIRST] + gk_local(&mut |t| h(t) / t, x, xj, 1e-18)
        } else {
            let u0 = first.ln();
            let u = x.ln();
            let last = self.coarse.len() - 1;
            let u_last = u0 - last as f64 / COARSE_PER_UNIT;
            if u < u_last {
                return self.coarse[last] + (u_last - u) * h(u_last.exp());
            }
            let k = (((u0 - u) * COARSE_PER_UNIT).round() as usize).min(last);
            let uk = u0 - k as f64 / COARSE_PER_UNIT;
            self.coarse[k] + gk_local(&mut |w: f64| h(w.exp()), u, uk, 1e-18)
        }
    }
}

#[derive(Clone, Debug)]
enum Radii {
    /// `r_j = b_j s^(1/p)`, exact.
    Power(f64),
    Tables { left: HalfTable, right: HalfTable },
}

/// Osculating weighted `l^p` ball `a1|z1|^p + a2|z2|^p < 1` at a boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OsculationData {
    pub s: f64,
    pub p: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Principal curvatures of the boundary at parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureData {
    pub s: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

#[derive(Clone, Debug)]
pub struct DomainModel {
    profile: GeneratorProfile,
    b1: f64,
    b2: f64,
    class_tag: ClassTag,
    radii: Radii,
}

/// Built-in domains from the profile families above.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinExample {
    Example1 { inner: f64, outer: f64 },
    Example2 { nu: f64 },
    Example3,
}

impl DomainModel {
    /// The ball `a1|z1|^p + a2|z2|^p < 1`, with exact radii.
    pub fn from_pball(p: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
            return Err(domain_err("p-ball weights must be positive and finite"));
        }
        let profile = GeneratorProfile::constant(p)?;
        Ok(DomainModel {
            profile,
            b1: a1.powf(-1.0 / p),
            b2: a2.powf(-1.0 / p),
            class_tag: ClassTag::P,
            radii: Radii::Power(p),
        })
    }

    /// The domain generated by `profile` with scales `b1`, `b2`; radii are
    /// reconstructed by quadrature.
    pub fn from_generator(profile: GeneratorProfile, b1: f64, b2: f64) -> Result<Self> {
        if !(b1 > 0.0 && b2 > 0.0 && b1.is_finite() && b2.is_finite()) {
            return Err(domain_err("scale constants must be positive and finite"));
        }
        profile.validate()?;
        let class_tag = classify(&profile)?;
        let left = HalfTable::build(&|t: f64| profile.inv_p(t, 1.0 - t));
        let right = HalfTable::build(&|t: f64| profile.inv_p(1.0 - t, t));
        Ok(DomainModel { profile, b1, b2, class_tag, radii: Radii::Tables { left, right } })
    }

    pub fn builtin(which: BuiltinExample) -> Result<Self> {
        match which {
            BuiltinExample::Example1 { inner, outer } => {
                Self::from_generator(GeneratorProfile::example1(inner, outer)?, 1.0, 1.0)
            }
            BuiltinExample::Example2 { nu } => Self::from_generator(GeneratorProfile::example2(nu)?, 1.0, 1.0),
            BuiltinExample::Example3 => {
                Self::from_generator(GeneratorProfile::example3(), LN_10.sqrt(), 1.0)
            }
        }
    }

    pub fn profile(&self) -> &GeneratorProfile {
        &self.profile
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn class_tag(&self) -> ClassTag {
        self.class_tag
    }

    /// Exponent of an exactly represented p-ball.
    pub fn exact_exponent(&self) -> Option<f64> {
        match self.radii {
            Radii::Power(p) => Some(p),
            Radii::Tables { .. } => None,
        }
    }

    /// `(ln r1, ln r2)` at the point `(s, 1 - s)`.
    pub fn log_radii(&self, s: f64, sc: f64) -> (f64, f64) {
        match &self.radii {
            Radii::Power(p) => (self.b1.ln() + s.ln() / p, self.b2.ln() + sc.ln() / p),
            Radii::Tables { left, right } => {
                let h1 = |t: f64| self.profile.inv_p(t, 1.0 - t);
                let h2 = |t: f64| self.profile.inv_p(1.0 - t, t);
                let l1 = if sc == 0.0 { self.b1.ln() } else { self.b1.ln() - (left.eval(&h1, s) - left.at_one()) };
                let l2 = if s == 0.0 { self.b2.ln() } else { self.b2.ln() - (right.eval(&h2, sc) - right.at_one()) };
                (l1, l2)
            }
        }
    }

    /// `(r1(s), r2(s))`.
    pub fn radii(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let (l1, l2) = self.log_radii(s, 1.0 - s);
        (l1.exp(), l2.exp())
    }

    /// The parameter `s` at which the first radius equals `r1`.
    pub fn s_of_r1(&self, r1: f64) -> Result<f64> {
        if !(0.0..=self.b1).contains(&r1) {
            return Err(domain_err(format!("r1 = {r1} outside [0, {}]", self.b1)));
        }
        if r1 == 0.0 {
            return Ok(0.0);
        }
        if r1 == self.b1 {
            return Ok(1.0);
        }
        if let Radii::Power(p) = self.radii {
            return Ok((r1 / self.b1).powf(p).min(1.0));
        }
        let target = r1.ln();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_radii(mid, 1.0 - mid).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if self.radii(hi).0 - self.radii(lo).0 <= 1e-13 * self.b1 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `(ln(s/r1), ln((1-s)/r2))` at `(s, 1 - s)`.
    pub(crate) fn log_dual_radii(&self, s: f64, sc: f64) -> (f64, f64) {
        let (l1, l2) = self.log_radii(s, sc);
        (s.ln() - l1, sc.ln() - l2)
    }

    /// `ln((s/r1)^2 + ((1-s)/r2)^2)`.
    pub(crate) fn log_q(&self, s: f64, sc: f64) -> f64 {
        let (a, b) = self.log_dual_radii(s, sc);
        log_add_exp(2.0 * a, 2.0 * b)
    }

    pub fn osculate(&self, s: f64) -> Result<OsculationData> {
        if !(s > 0.0 && s < 1.0) {
            return Err(domain_err("osculate needs 0 < s < 1"));
        }
        let sc = 1.0 - s;
        let p = self.profile.p_pair(s, sc);
        if !p.is_finite() {
            return Err(domain_err(format!("osculating exponent is infinite at s = {s}")));
        }
        let (l1, l2) = self.log_radii(s, sc);
        Ok(OsculationData { s, p, a1: (s.ln() - p * l1).exp(), a2: (sc.ln() - p * l2).exp() })
    }

    pub fn curvatures(&self, s: f64) -> Result<CurvatureData> {
        if !(s > 0.0 && s < 1.0) {
            return Err(domain_err("curvatures need 0 < s < 1"));
        }
        let sc = 1.0 - s;
        let (l1, l2) = self.log_radii(s, sc);
        let lq = self.log_q(s, sc);
        let inv = self.profile.inv_p(s, sc);
        let p_minus_one = match self.profile.kind {
            ProfileKind::Constant(p) => p - 1.0,
            _ if inv == 0.0 => f64::INFINITY,
            _ => (1.0 - inv) / inv,
        };
        let kappa3 = if p_minus_one == 0.0 {
            0.0
        } else {
            p_minus_one * (s.ln() + sc.ln() - 2.0 * l1 - 2.0 * l2 - 1.5 * lq).exp()
        };
        Ok(CurvatureData {
            s,
            kappa1: (s.ln() - 2.0 * l1 - 0.5 * lq).exp(),
            kappa2: (sc.ln() - 2.0 * l2 - 0.5 * lq).exp(),
            kappa3,
        })
    }
}
