//! Polar domains and the transfer of measures and spectral data to them.
//!
//! The polar of the domain generated by `(p, b1, b2)` is generated by
//! `(p*, 1/b1, 1/b2)`, and the boundary correspondence keeps `s` fixed with
//! `r1 -> s/r1`, `r2 -> (1-s)/r2`. A measure `w` goes to `1/w`.

use alloc::sync::Arc;

#[allow(unused_imports)]
use num_traits::Float;
use crate::domain::{conjugate_exponent, ClassTag, DomainModel};
use crate::error::{Error, Result};
use crate::measure::BoundaryMeasure;
use crate::spectrum::piece_norm;

/// Agreement required of the two sides in [`verify_duality`].
pub const DUALITY_TOL: f64 = 1e-6;

pub fn polar(d: &DomainModel) -> Result<DomainModel> {
    if d.class_tag() == ClassTag::OutsideTildeR {
        return Err(Error::UnsupportedClass(d.class_tag()));
    }
    let (b1, b2) = (1.0 / d.b1(), 1.0 / d.b2());
    if let Some(p) = d.exact_exponent() {
        let ps = conjugate_exponent(p);
        return DomainModel::from_pball(ps, b1.powf(-ps), b2.powf(-ps));
    }
    DomainModel::from_generator(d.profile().conjugate(), b1, b2)
}

/// Radii of the polar at the point corresponding to `s`.
pub fn t_map(d: &DomainModel, s: f64) -> (f64, f64) {
    let (x, y) = d.log_dual_radii(s, 1.0 - s);
    (x.exp(), y.exp())
}

/// `1/w` on the polar domain. For an order-q measure the result again has
/// order `q` with respect to the polar geometry.
pub fn dual_measure(m: &Arc<BoundaryMeasure>, polar_domain: Arc<DomainModel>) -> Result<BoundaryMeasure> {
    m.require_admissible()?;
    Ok(m.reciprocal(polar_domain))
}

#[derive(Clone, Debug)]
pub struct DualPair {
    pub primal: Arc<DomainModel>,
    pub polar: Arc<DomainModel>,
    pub measure_primal: Arc<BoundaryMeasure>,
    pub measure_dual: BoundaryMeasure,
}

impl DualPair {
    pub fn new(measure: Arc<BoundaryMeasure>) -> Result<Self> {
        let primal = measure.domain_arc().clone();
        let polar = Arc::new(polar(&primal)?);
        let measure_dual = dual_measure(&measure, polar.clone())?;
        Ok(DualPair { primal, polar, measure_primal: measure, measure_dual })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityReport {
    pub max_discrepancy: f64,
    pub worst: (u32, u32),
    pub checked: usize,
    pub passed: bool,
}

/// Compares `|L_{n,m}|^2` on both sides of the pair over `grid`.
pub fn verify_duality(pair: &DualPair, grid: &[(u32, u32)]) -> Result<DualityReport> {
    let mut worst = (0.0f64, (0, 0));
    for &(n, m) in grid {
        let a = piece_norm(&pair.measure_primal, n, m)?.norm_sq;
        let b = piece_norm(&pair.measure_dual, n, m)?.norm_sq;
        let diff = (a - b).abs();
        if diff > worst.0 || diff.is_nan() {
            worst = (diff, (n, m));
        }
    }
    Ok(DualityReport {
        max_discrepancy: worst.0,
        worst: worst.1,
        checked: grid.len(),
        passed: worst.0 < DUALITY_TOL,
    })
}

/// `[0, n]^2` in row order.
pub fn square_grid(n: u32) -> alloc::vec::Vec<(u32, u32)> {
    (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))).collect()
}
