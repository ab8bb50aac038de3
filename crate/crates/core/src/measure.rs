//! Rotation-invariant boundary measures `(1/4pi^2) w(s) ds dtheta1 dtheta2`.
//!
//! Densities are evaluated through `ln w(s)`. Where the asymptotic law of `w`
//! at the ends of `[0, 1]` is known it is carried along and drives both the
//! admissibility verdict and the endpoint substitution in quadrature.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use crate::domain::{DomainModel, PowerLaw};
use crate::error::{Endpoint, Error, Result};
use crate::numerics::{integrate_log, EndpointExponents, DEFAULT_TOL};

/// A continuous positive factor on `[0, 1]`, called with `(s, 1 - s)`.
pub type Factor = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Density {
    /// `w = 1`.
    Flat,
    /// `w = phi * G^q` with `G = r1^2 r2^2 / (p s (1 - s))`.
    OrderQ { q: f64, phi: Option<Factor> },
    /// `w = G * sqrt((s/r1)^2 + ((1-s)/r2)^2)`.
    Surface,
    /// `w = (G / 2)^(2/3)`.
    Fefferman,
    /// `1 / w` of another measure, kept in that measure's coordinates.
    Reciprocal(Arc<BoundaryMeasure>),
    /// Arbitrary density with optional declared endpoint laws.
    Custom { omega: Factor, laws: Option<[PowerLaw; 2]> },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Flat => f.write_str("Flat"),
            Density::OrderQ { q, phi } => {
                f.debug_struct("OrderQ").field("q", q).field("phi", &phi.as_ref().map(|_| "..")).finish()
            }
            Density::Surface => f.write_str("Surface"),
            Density::Fefferman => f.write_str("Fefferman"),
            Density::Reciprocal(m) => f.debug_tuple("Reciprocal").field(&m.label).finish(),
            Density::Custom { laws, .. } => f.debug_struct("Custom").field("laws", laws).finish(),
        }
    }
}

/// Verdict of the admissibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    NotAdmissible,
    Inconclusive,
}

impl Admissibility {
    pub fn as_str(&self) -> &'static str {
        match self {
            Admissibility::Admissible => "Admissible",
            Admissibility::NotAdmissible => "NotAdmissible",
            Admissibility::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub verdict: Admissibility,
    /// The measure sits exactly on the threshold of the exponent rule.
    pub boundary_case: bool,
    /// Largest `|q|` for which an order-q measure on this domain is admissible.
    pub threshold: Option<f64>,
    /// Where `w` or `1/w` fails to be integrable.
    pub failure: Option<Failure>,
    /// Whether the verdict comes from declared laws or from sampling.
    pub numeric: bool,
}

/// Which integral diverges and where.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Failure {
    /// `k = 1` for `int w`, `k = -1` for `int 1/w`.
    Endpoint { k: i32, endpoint: Endpoint },
    Interior { k: i32, at: f64 },
}

#[derive(Clone, Debug)]
pub struct BoundaryMeasure {
    domain: Arc<DomainModel>,
    density: Density,
    order_q: Option<f64>,
    label: String,
}

/// Sample points for the numerical endpoint slope.
const SLOPE_NEAR: f64 = -150.0 * core::f64::consts::LN_2;
const SLOPE_FAR: f64 = -300.0 * core::f64::consts::LN_2;
/// Half-width of the undecided band around `|slope| = 1`.
const SLOPE_BAND: f64 = 0.01;

/// `w = phi * G^q`; `phi` defaults to 1.
pub fn order_q_measure(d: Arc<DomainModel>, q: f64, phi: Option<Factor>) -> BoundaryMeasure {
    let label = format!("order_q(q={q})");
    BoundaryMeasure { domain: d, density: Density::OrderQ { q, phi }, order_q: Some(q), label }
}

pub fn surface_measure(d: Arc<DomainModel>) -> BoundaryMeasure {
    BoundaryMeasure { domain: d, density: Density::Surface, order_q: Some(1.0), label: "surface".into() }
}

pub fn fefferman_measure(d: Arc<DomainModel>) -> BoundaryMeasure {
    BoundaryMeasure { domain: d, density: Density::Fefferman, order_q: Some(2.0 / 3.0), label: "fefferman".into() }
}

/// The flat measure `w = 1`, of order 0.
pub fn mu0(d: Arc<DomainModel>) -> BoundaryMeasure {
    BoundaryMeasure { domain: d, density: Density::Flat, order_q: Some(0.0), label: "mu0".into() }
}

/// Size of the Levi form in the normalisation where the unit sphere gives 1/2.
pub fn levi_norm(d: &DomainModel, s: f64) -> f64 {
    let sc = 1.0 - s;
    (-(4f64.ln()) - log_g(d, s, sc) - 1.5 * d.log_q(s, sc)).exp()
}

/// `ln(r1^2 r2^2 / (p s (1 - s)))`.
pub(crate) fn log_g(d: &DomainModel, s: f64, sc: f64) -> f64 {
    let (l1, l2) = d.log_radii(s, sc);
    2.0 * (l1 + l2) + d.profile().inv_p(s, sc).ln() - s.ln() - sc.ln()
}

impl BoundaryMeasure {
    /// A measure with an arbitrary density. Without `laws`, admissibility is
    /// decided by sampling near the endpoints.
    pub fn custom(
        d: Arc<DomainModel>,
        omega: Factor,
        laws: Option<[PowerLaw; 2]>,
        label: impl Into<String>,
    ) -> Self {
        BoundaryMeasure { domain: d, density: Density::Custom { omega, laws }, order_q: None, label: label.into() }
    }

    /// `1/w`, attached to `domain`. The order, when present, is kept.
    pub fn reciprocal(self: &Arc<Self>, domain: Arc<DomainModel>) -> Self {
        BoundaryMeasure {
            domain,
            density: Density::Reciprocal(self.clone()),
            order_q: self.order_q,
            label: format!("reciprocal({})", self.label),
        }
    }

    pub fn domain(&self) -> &DomainModel {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<DomainModel> {
        &self.domain
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn order_q(&self) -> Option<f64> {
        self.order_q
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ln w` at `(s, 1 - s)`.
    pub fn log_omega(&self, s: f64, sc: f64) -> f64 {
        let d = &*self.domain;
        match &self.density {
            Density::Flat => 0.0,
            Density::OrderQ { q, phi } => {
                let base = if *q == 0.0 { 0.0 } else { q * log_g(d, s, sc) };
                match phi {
                    Some(f) => base + f(s, sc).ln(),
                    None => base,
                }
            }
            Density::Surface => log_g(d, s, sc) + 0.5 * d.log_q(s, sc),
            Density::Fefferman => (2.0 / 3.0) * (log_g(d, s, sc) - core::f64::consts::LN_2),
            Density::Reciprocal(m) => -m.log_omega(s, sc),
            Density::Custom { omega, .. } => omega(s, sc).ln(),
        }
    }

    pub fn omega(&self, s: f64) -> f64 {
        self.log_omega(s, 1.0 - s).exp()
    }

    /// Asymptotic laws of `w` at `s = 0` and `s = 1`, when known.
    pub fn endpoint_laws(&self) -> Option<[PowerLaw; 2]> {
        let prof = self.domain.profile();
        let g = [prof.endpoint(Endpoint::Left).g_law, prof.endpoint(Endpoint::Right).g_law];
        match &self.density {
            Density::Flat => Some([PowerLaw::ONE; 2]),
            Density::OrderQ { q, .. } => Some([g[0].scale(*q), g[1].scale(*q)]),
            // the sqrt factor tends to 1/b2 at s = 0 and 1/b1 at s = 1
            Density::Surface => Some(g),
            Density::Fefferman => Some([g[0].scale(2.0 / 3.0), g[1].scale(2.0 / 3.0)]),
            Density::Reciprocal(m) => m.endpoint_laws().map(|l| [l[0].scale(-1.0), l[1].scale(-1.0)]),
            Density::Custom { laws, .. } => *laws,
        }
    }

    /// Power of `|s - at|` in `w` at an interior degeneracy of the profile.
    pub fn interior_law(&self) -> Option<(f64, f64)> {
        if let Density::Reciprocal(m) = &self.density {
            return m.interior_law().map(|(at, a)| (at, -a));
        }
        let deg = self.domain.profile().interior()?;
        let power = match &self.density {
            Density::Flat | Density::Custom { .. } => 0.0,
            Density::OrderQ { q, .. } => q * deg.g_power,
            Density::Surface => deg.g_power,
            Density::Fefferman => (2.0 / 3.0) * deg.g_power,
            Density::Reciprocal(_) => unreachable!(),
        };
        Some((deg.at, power))
    }

    /// Quadrature exponents for `w^k`.
    pub fn exponents(&self, k: f64) -> EndpointExponents {
        match self.endpoint_laws() {
            Some([l, r]) => EndpointExponents::new(hint(l.scale(k)), hint(r.scale(k))),
            None => {
                let (a, b) = self.numeric_slopes();
                EndpointExponents::new(k * a, k * b)
            }
        }
    }

    /// `int_0^1 w^k ds` for `k = +-1`; divergence comes back as an error.
    pub fn log_mass(&self, k: f64, tol: f64) -> Result<f64> {
        let lv = integrate_log(|s, sc| k * self.log_omega(s, sc), self.exponents(k), tol)?;
        Ok(lv.ln())
    }

    /// `Ok` for admissible measures, otherwise the divergence as an error.
    pub fn require_admissible(&self) -> Result<()> {
        let r = self.admissibility();
        match r.verdict {
            Admissibility::Admissible => Ok(()),
            Admissibility::Inconclusive => Err(Error::Inconclusive("admissibility of the measure is undecided".into())),
            Admissibility::NotAdmissible => Err(match r.failure {
                Some(Failure::Endpoint { k, endpoint }) => Error::NotAdmissible { k, endpoint },
                Some(Failure::Interior { k, at }) => {
                    Error::NotAdmissible { k, endpoint: if at < 0.5 { Endpoint::Left } else { Endpoint::Right } }
                }
                None => Error::NotAdmissible { k: 1, endpoint: Endpoint::Left },
            }),
        }
    }

    pub fn is_admissible(&self) -> Admissibility {
        self.admissibility().verdict
    }

    pub fn admissibility(&self) -> AdmissibilityReport {
        let threshold = self.threshold();
        let interior = self.interior_law();
        let Some(laws) = self.endpoint_laws() else {
            return self.numeric_admissibility(threshold, interior);
        };
        let mut boundary_case = false;
        let mut failure = None;
        for (law, end) in laws.into_iter().zip([Endpoint::Left, Endpoint::Right]) {
            for k in [1, -1] {
                let l = law.scale(f64::from(k));
                if !l.integrable() {
                    boundary_case |= l.power == -1.0;
                    failure.get_or_insert(Failure::Endpoint { k, endpoint: end });
                }
            }
        }
        if let Some((at, a)) = interior {
            for k in [1, -1] {
                let a = a * f64::from(k);
                if a <= -1.0 {
                    boundary_case |= a == -1.0;
                    failure.get_or_insert(Failure::Interior { k, at });
                }
            }
        }
        let verdict = if failure.is_some() { Admissibility::NotAdmissible } else { Admissibility::Admissible };
        AdmissibilityReport { verdict, boundary_case, threshold, failure, numeric: false }
    }

    /// The admissibility test from sampled endpoint slopes only, ignoring any
    /// declared laws.
    pub fn admissibility_numeric(&self) -> AdmissibilityReport {
        self.numeric_admissibility(self.threshold(), self.interior_law())
    }

    fn numeric_admissibility(&self, threshold: Option<f64>, interior: Option<(f64, f64)>) -> AdmissibilityReport {
        let (a, b) = self.numeric_slopes();
        let mut verdict = Admissibility::Admissible;
        let mut failure = None;
        for (slope, end) in [(a, Endpoint::Left), (b, Endpoint::Right)] {
            if !slope.is_finite() || (slope.abs() - 1.0).abs() <= SLOPE_BAND {
                if verdict == Admissibility::Admissible {
                    verdict = Admissibility::Inconclusive;
                }
            } else if slope.abs() > 1.0 {
                verdict = Admissibility::NotAdmissible;
                let k = if slope < 0.0 { 1 } else { -1 };
                failure.get_or_insert(Failure::Endpoint { k, endpoint: end });
            }
        }
        if let Some((at, p)) = interior {
            if p.abs() >= 1.0 {
                verdict = Admissibility::NotAdmissible;
                failure.get_or_insert(Failure::Interior { k: if p < 0.0 { 1 } else { -1 }, at });
            }
        }
        AdmissibilityReport { verdict, boundary_case: false, threshold, failure, numeric: true }
    }

    /// Local log-log slopes of `w` at both ends, from two deep sample points.
    fn numeric_slopes(&self) -> (f64, f64) {
        let (near, far) = (SLOPE_NEAR.exp(), SLOPE_FAR.exp());
        let left = (self.log_omega(near, 1.0) - self.log_omega(far, 1.0)) / (SLOPE_NEAR - SLOPE_FAR);
        let right = (self.log_omega(1.0, near) - self.log_omega(1.0, far)) / (SLOPE_NEAR - SLOPE_FAR);
        (left, right)
    }

    /// Largest admissible `|q|` for order-q measures on this domain.
    fn threshold(&self) -> Option<f64> {
        self.order_q?;
        let prof = self.domain.profile();
        let mut t = f64::INFINITY;
        for end in [Endpoint::Left, Endpoint::Right] {
            let a = prof.endpoint(end).g_law.power;
            if a != 0.0 {
                t = t.min(1.0 / a.abs());
            }
        }
        if let Some(deg) = prof.interior() {
            if deg.g_power != 0.0 {
                t = t.min(1.0 / deg.g_power.abs());
            }
        }
        Some(t)
    }
}

/// Substitution exponent for a law; integrable laws at the borderline power
/// -1 get a nearby value so the substitution stays defined.
fn hint(l: PowerLaw) -> f64 {
    if l.power <= -1.0 && l.integrable() {
        -0.999
    } else {
        l.power
    }
}

/// `int w` and `int 1/w` in log form, `(ln int w, ln int 1/w)`.
pub fn log_masses(m: &BoundaryMeasure) -> Result<(f64, f64)> {
    Ok((m.log_mass(1.0, DEFAULT_TOL)?, m.log_mass(-1.0, DEFAULT_TOL)?))
}
