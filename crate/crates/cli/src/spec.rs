//! JSON descriptions of domains and measures.

use std::sync::Arc;

use leray_core::domain::{DomainModel, GeneratorProfile, ProfileKind};
use leray_core::measure::{fefferman_measure, mu0, order_q_measure, surface_measure, BoundaryMeasure};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    /// `a1|z1|^p + a2|z2|^p < 1`.
    Pball { p: f64, a1: f64, a2: f64 },
    /// Scales default to those of the built-in examples when omitted.
    Generator {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b2: Option<f64>,
        profile: ProfileSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProfileSpec {
    Constant {
        p: f64,
    },
    /// Values on a uniform grid over `[0, 1]`, endpoints included.
    Tabulated {
        values: Vec<f64>,
    },
    Example1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outer: Option<f64>,
    },
    Example2 {
        nu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outer: Option<f64>,
    },
    Example3,
    /// Pointwise conjugate exponent `p / (p - 1)` of another profile.
    Conjugate {
        of: Box<ProfileSpec>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureSpec {
    OrderQ { q: f64 },
    Surface,
    Fefferman,
    Mu0,
}

/// Reads `arg` as inline JSON when it starts with `{`, otherwise as a path.
pub fn load<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::spec(format!("cannot read {what} file {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::spec(format!("invalid {what} spec: {e}")))
}

impl ProfileSpec {
    pub fn build(&self) -> leray_core::Result<GeneratorProfile> {
        Ok(match self {
            ProfileSpec::Constant { p } => GeneratorProfile::constant(*p)?,
            ProfileSpec::Tabulated { values } => GeneratorProfile::tabulated(values.clone())?,
            ProfileSpec::Example1 { inner, outer } => {
                let d = GeneratorProfile::example1_default();
                let (i0, o0) = match d.kind() {
                    ProfileKind::Example1 { inner, outer } => (*inner, *outer),
                    _ => unreachable!(),
                };
                GeneratorProfile::example1(inner.unwrap_or(i0), outer.unwrap_or(o0))?
            }
            ProfileSpec::Example2 { nu, inner, outer } => match (inner, outer) {
                (None, None) => GeneratorProfile::example2(*nu)?,
                _ => {
                    let (i0, o0) = match GeneratorProfile::example2(*nu)?.kind() {
                        ProfileKind::Example2 { inner, outer, .. } => (*inner, *outer),
                        _ => unreachable!(),
                    };
                    GeneratorProfile::example2_with(*nu, inner.unwrap_or(i0), outer.unwrap_or(o0))?
                }
            },
            ProfileSpec::Example3 => GeneratorProfile::example3(),
            ProfileSpec::Conjugate { of } => of.build()?.conjugate(),
        })
    }

    /// The spec of an existing profile, with every default filled in.
    pub fn of_profile(p: &GeneratorProfile) -> Self {
        match p.kind() {
            ProfileKind::Constant(p) => ProfileSpec::Constant { p: *p },
            ProfileKind::Tabulated(t) => ProfileSpec::Tabulated { values: t.values().to_vec() },
            ProfileKind::Example1 { inner, outer } => ProfileSpec::Example1 { inner: Some(*inner), outer: Some(*outer) },
            ProfileKind::Example2 { nu, inner, outer } => {
                ProfileSpec::Example2 { nu: *nu, inner: Some(*inner), outer: Some(*outer) }
            }
            ProfileKind::Example3 => ProfileSpec::Example3,
            ProfileKind::Conjugate(inner) => ProfileSpec::Conjugate { of: Box::new(Self::of_profile(inner)) },
        }
    }

    fn default_scales(&self) -> (f64, f64) {
        match self {
            ProfileSpec::Example3 => (std::f64::consts::LN_10.sqrt(), 1.0),
            ProfileSpec::Conjugate { of } => {
                let (a, b) = of.default_scales();
                (1.0 / a, 1.0 / b)
            }
            _ => (1.0, 1.0),
        }
    }
}

impl DomainSpec {
    pub fn build(&self) -> leray_core::Result<DomainModel> {
        match self {
            DomainSpec::Pball { p, a1, a2 } => DomainModel::from_pball(*p, *a1, *a2),
            DomainSpec::Generator { b1, b2, profile } => {
                let (d1, d2) = profile.default_scales();
                DomainModel::from_generator(profile.build()?, b1.unwrap_or(d1), b2.unwrap_or(d2))
            }
        }
    }

    /// The spec of a built domain. Exact p-balls come back as `pball`.
    pub fn of_model(d: &DomainModel) -> Self {
        match d.exact_exponent() {
            Some(p) => DomainSpec::Pball { p, a1: d.b1().powf(-p), a2: d.b2().powf(-p) },
            None => DomainSpec::Generator {
                b1: Some(d.b1()),
                b2: Some(d.b2()),
                profile: ProfileSpec::of_profile(d.profile()),
            },
        }
    }
}

impl MeasureSpec {
    pub fn build(&self, d: Arc<DomainModel>) -> BoundaryMeasure {
        match *self {
            MeasureSpec::OrderQ { q } => order_q_measure(d, q, None),
            MeasureSpec::Surface => surface_measure(d),
            MeasureSpec::Fefferman => fefferman_measure(d),
            MeasureSpec::Mu0 => mu0(d),
        }
    }
}
