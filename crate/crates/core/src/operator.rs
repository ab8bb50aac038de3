//! The Leray kernel in `(s, theta1, theta2)` coordinates and its action on
//! `(n, m)`-monomials `g(s) e^{i(n theta1 + m theta2)}`.

use alloc::format;
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::DomainModel;
use crate::error::{domain_err, Endpoint, Error, Result};
use crate::numerics::{integrate_peaked_log, integrate_singular_pair, log_gamma, EndpointExponents};

/// Smallest kernel denominator accepted.
const MIN_DENOMINATOR: f64 = 1e-12;
/// Default margin on `|w1| s/r1 + |w2| (1-s)/r2 < 1`.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// A point of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorPoint {
    pub w1: Complex64,
    pub w2: Complex64,
}

impl InteriorPoint {
    /// No interior check; kernel evaluation still rejects near-singular
    /// denominators.
    pub fn new(w1: Complex64, w2: Complex64) -> Self {
        InteriorPoint { w1, w2 }
    }

    /// Requires `|w1| s/r1 + |w2| (1-s)/r2 <= 1 - margin` on a grid in `s`.
    pub fn checked(d: &DomainModel, w1: Complex64, w2: Complex64, margin: f64) -> Result<Self> {
        let (a, b) = (w1.norm(), w2.norm());
        if !(a.is_finite() && b.is_finite()) {
            return Err(domain_err("interior point must be finite"));
        }
        let mut worst = (a / d.b1()).max(b / d.b2());
        for j in 1..2048 {
            let s = f64::from(j) / 2048.0;
            let (x, y) = d.log_dual_radii(s, 1.0 - s);
            worst = worst.max(a * x.exp() + b * y.exp());
        }
        if worst > 1.0 - margin {
            return Err(domain_err(format!("point is not inside the domain with margin {margin} (support {worst})")));
        }
        Ok(InteriorPoint { w1, w2 })
    }
}

/// Density of the Leray kernel against `ds dtheta1 dtheta2`.
pub fn leray_kernel_density(d: &DomainModel, s: f64, theta1: f64, theta2: f64, w: InteriorPoint) -> Result<Complex64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain_err("kernel needs 0 < s < 1"));
    }
    let (x, y) = d.log_dual_radii(s, 1.0 - s);
    let den = Complex64::new(1.0, 0.0)
        - Complex64::from_polar(x.exp(), -theta1) * w.w1
        - Complex64::from_polar(y.exp(), -theta2) * w.w2;
    let r = den.norm();
    if r < MIN_DENOMINATOR {
        return Err(Error::NearSingular(r));
    }
    Ok(Complex64::new(1.0, 0.0) / (4.0 * PI * PI * den * den))
}

/// Radial part of a monomial, called with `(s, 1 - s)`.
pub type Radial = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// `g(s) e^{i(n theta1 + m theta2)}`.
#[derive(Clone)]
pub struct MonomialFunction {
    pub n: i64,
    pub m: i64,
    kind: MonomialKind,
}

#[derive(Clone)]
enum MonomialKind {
    /// `z1^n z2^m`, i.e. `g = r1^n r2^m`.
    Holomorphic,
    /// `g` with its endpoint exponents.
    General { g: Radial, exps: EndpointExponents },
}

impl fmt::Debug for MonomialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MonomialKind::Holomorphic => "holomorphic",
            MonomialKind::General { .. } => "general",
        };
        f.debug_struct("MonomialFunction").field("n", &self.n).field("m", &self.m).field("kind", &kind).finish()
    }
}

impl MonomialFunction {
    pub fn holomorphic(n: i64, m: i64) -> Self {
        MonomialFunction { n, m, kind: MonomialKind::Holomorphic }
    }

    /// `g` behaves like `s^exps.left` near 0 and `(1-s)^exps.right` near 1.
    pub fn new(n: i64, m: i64, g: Radial, exps: EndpointExponents) -> Self {
        MonomialFunction { n, m, kind: MonomialKind::General { g, exps } }
    }

    /// The radial part at `s`.
    pub fn radial(&self, d: &DomainModel, s: f64) -> Complex64 {
        match &self.kind {
            MonomialKind::Holomorphic => {
                let (l1, l2) = d.log_radii(s, 1.0 - s);
                Complex64::new((self.n as f64 * l1 + self.m as f64 * l2).exp(), 0.0)
            }
            MonomialKind::General { g, .. } => g(s, 1.0 - s),
        }
    }
}

/// `ln((n + m + 1)! / (n! m!))`.
fn log_multinomial(n: f64, m: f64) -> Result<f64> {
    Ok(log_gamma(n + m + 2.0)? - log_gamma(n + 1.0)? - log_gamma(m + 1.0)?)
}

/// Laplace peak and width of `s^n (1-s)^m`.
fn peak_and_width(n: f64, m: f64) -> (f64, f64) {
    let t = n + m;
    if n == 0.0 || m == 0.0 {
        (n / t.max(1.0), 1.0 / (t + 1.0))
    } else {
        (n / t, (n * m / (t * t * t)).sqrt())
    }
}

/// `L f (w)` for an `(n, m)`-monomial `f`.
pub fn apply_to_monomial(d: &DomainModel, f: &MonomialFunction, w: InteriorPoint) -> Result<Complex64> {
    if f.n.min(f.m) < 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (n, m) = (f.n as f64, f.m as f64);
    let wpow = w.w1.powi(f.n as i32) * w.w2.powi(f.m as i32);
    match &f.kind {
        MonomialKind::Holomorphic => {
            let c = log_reproduction(d, n, m)?;
            Ok(wpow * c.exp())
        }
        MonomialKind::General { g, exps } => {
            let prof = d.profile();
            let dual_power = |end: Endpoint| 1.0 - 1.0 / prof.endpoint(end).p;
            let total = EndpointExponents::new(
                exps.left + n * dual_power(Endpoint::Left),
                exps.right + m * dual_power(Endpoint::Right),
            );
            let log_weight = |s: f64, sc: f64| {
                let (x, y) = d.log_dual_radii(s, sc);
                n * x + m * y
            };
            let mut shift = f64::NEG_INFINITY;
            for j in 1..256 {
                let s = f64::from(j) / 256.0;
                shift = shift.max(log_weight(s, 1.0 - s));
            }
            let part = |im: bool| {
                integrate_singular_pair(
                    |s, sc| {
                        let v = g(s, sc);
                        let v = if im { v.im } else { v.re };
                        v * (log_weight(s, sc) - shift).exp()
                    },
                    total,
                    1e-11,
                )
            };
            let integral = Complex64::new(part(false)?, part(true)?);
            Ok(wpow * integral * (log_multinomial(n, m)? + shift).exp())
        }
    }
}

/// `ln` of the reproduction coefficient for `z1^n z2^m`.
fn log_reproduction(d: &DomainModel, n: f64, m: f64) -> Result<f64> {
    let (peak, width) = peak_and_width(n, m);
    let log_f = |s: f64, sc: f64| {
        let (l1, l2) = d.log_radii(s, sc);
        let (x, y) = d.log_dual_radii(s, sc);
        // g * (s/r1)^n ((1-s)/r2)^m with g = r1^n r2^m
        n * (l1 + x) + m * (l2 + y)
    };
    let v = integrate_peaked_log(log_f, peak, width, EndpointExponents::new(n, m), 1e-12)?;
    Ok(log_multinomial(n, m)? + v.ln())
}

/// The factor by which `L` scales `z1^n z2^m`; equals 1 on every domain.
pub fn reproduction_coefficient(d: &DomainModel, n: u32, m: u32) -> Result<f64> {
    Ok(log_reproduction(d, f64::from(n), f64::from(m))?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BuiltinExample, GeneratorProfile};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ball() -> DomainModel {
        DomainModel::from_pball(2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let d = ball();
        let k = leray_kernel_density(&d, 0.3, 1.0, 2.0, InteriorPoint::new(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!((k - c(1.0 / (4.0 * PI * PI), 0.0)).norm() < 1e-17);
        let k = leray_kernel_density(&d, 0.25, 0.0, 0.0, InteriorPoint::new(c(0.5, 0.0), c(0.0, 0.0))).unwrap();
        let want = 1.0 / (4.0 * PI * PI * 0.75 * 0.75);
        assert!((k.re - want).abs() < 1e-15 && k.im.abs() < 1e-15);
        // on the boundary point itself the denominator vanishes
        let w = InteriorPoint::new(c(0.5, 0.0), c(0.75f64.sqrt(), 0.0));
        assert!(matches!(leray_kernel_density(&d, 0.25, 0.0, 0.0, w), Err(Error::NearSingular(_))));
        assert!(InteriorPoint::checked(&d, c(0.5, 0.0), c(0.75f64.sqrt(), 0.0), INTERIOR_MARGIN).is_err());
        assert!(InteriorPoint::checked(&d, c(0.5, 0.1), c(0.3, 0.0), INTERIOR_MARGIN).is_ok());
    }

    #[test]
    fn kernel_matches_series() {
        // 1/(1 - x - y)^2 = sum_{j,k} (j+k+1)!/(j! k!) x^j y^k
        let doms = [ball(), DomainModel::from_pball(3.0, 2.0, 1.0).unwrap(), DomainModel::builtin(BuiltinExample::Example3).unwrap()];
        for d in &doms {
            let w = InteriorPoint::new(c(0.05, 0.02), c(-0.03, 0.04));
            for &(s, t1, t2) in &[(0.2, 0.3, 1.1), (0.7, -2.0, 0.5), (0.5, 3.0, -1.0)] {
                let k = leray_kernel_density(d, s, t1, t2, w).unwrap();
                let (x, y) = d.log_dual_radii(s, 1.0 - s);
                let x = Complex64::from_polar(x.exp(), -t1) * w.w1;
                let y = Complex64::from_polar(y.exp(), -t2) * w.w2;
                let mut sum = c(0.0, 0.0);
                for j in 0..40 {
                    for l in 0..40 {
                        let coef = log_multinomial(f64::from(j), f64::from(l)).unwrap().exp();
                        sum += x.powi(j) * y.powi(l) * coef;
                    }
                }
                let want = sum / (4.0 * PI * PI);
                assert!((k - want).norm() < 1e-10 * want.norm(), "{k} vs {want}");
            }
        }
    }

    #[test]
    fn monomial_examples() {
        let d = ball();
        let w = InteriorPoint::new(c(0.3, 0.1), c(-0.2, 0.4));
        let g: Radial = Arc::new(|_, _| c(1.0, 0.0));
        let f = MonomialFunction::new(-1, 3, g.clone(), EndpointExponents::SMOOTH);
        assert_eq!(apply_to_monomial(&d, &f, w).unwrap(), c(0.0, 0.0));
        let f = MonomialFunction::new(0, 0, g, EndpointExponents::SMOOTH);
        assert!((apply_to_monomial(&d, &f, w).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let doms = [ball(), DomainModel::from_pball(4.0, 1.0, 2.0).unwrap(), DomainModel::builtin(BuiltinExample::Example3).unwrap()];
        for d in &doms {
            for &(n, m) in &[(1, 0), (3, 2), (7, 5), (20, 1)] {
                let v = apply_to_monomial(d, &MonomialFunction::holomorphic(n, m), w).unwrap();
                let want = w.w1.powi(n as i32) * w.w2.powi(m as i32);
                assert!((v - want).norm() < 1e-10 * want.norm());
            }
        }
    }

    #[test]
    fn general_radial_reproduces_holomorphic() {
        // the same monomial written through an explicit radial part
        let d = DomainModel::from_pball(3.0, 1.0, 1.0).unwrap();
        let w = InteriorPoint::new(c(0.2, 0.3), c(0.4, -0.1));
        for &(n, m) in &[(0i64, 0i64), (2, 1), (5, 4)] {
            let g: Radial = Arc::new(move |s: f64, sc: f64| c(s.powf(n as f64 / 3.0) * sc.powf(m as f64 / 3.0), 0.0));
            let exps = EndpointExponents::new(n as f64 / 3.0, m as f64 / 3.0);
            let v = apply_to_monomial(&d, &MonomialFunction::new(n, m, g, exps), w).unwrap();
            let want = w.w1.powi(n as i32) * w.w2.powi(m as i32);
            assert!((v - want).norm() < 1e-9 * want.norm(), "{n},{m}: {v} vs {want}");
        }
    }

    #[test]
    fn complex_radial_part() {
        // g = i s^(1/2): the integral is i * 3!/(1! 1!)-weighted beta, checked in closed form
        let d = ball();
        let g: Radial = Arc::new(|s: f64, _| c(0.0, s.sqrt()));
        let f = MonomialFunction::new(1, 1, g, EndpointExponents::new(0.5, 0.0));
        let w = InteriorPoint::new(c(0.5, 0.0), c(0.5, 0.0));
        let v = apply_to_monomial(&d, &f, w).unwrap();
        // (s/r1)(1-s)/r2 = sqrt(s(1-s)); int_0^1 s sqrt(1-s) ds = 4/15
        let want = c(0.0, 6.0 * 4.0 / 15.0 * 0.25);
        assert!((v - want).norm() < 1e-10, "{v}");
    }

    #[test]
    fn reproduction_examples() {
        let doms = [ball(), DomainModel::from_pball(4.0, 1.0, 1.0).unwrap(), DomainModel::builtin(BuiltinExample::Example3).unwrap()];
        for d in &doms {
            for &(n, m) in &[(0, 0), (7, 5), (200, 300), (0, 1000), (1000, 1000)] {
                let r = reproduction_coefficient(d, n, m).unwrap();
                assert!((r - 1.0).abs() < 1e-9, "({n},{m}): {r}");
            }
        }
    }

    #[test]
    fn reproduction_on_tabulated() {
        let v: Vec<f64> = (0..4097).map(|k| 2.0 + 4.0 * (k as f64 / 4096.0) * (1.0 - k as f64 / 4096.0)).collect();
        let d = DomainModel::from_generator(GeneratorProfile::tabulated(v).unwrap(), 1.0, 1.0).unwrap();
        for n in 0..=50 {
            for m in (0..=50).step_by(7) {
                let r = reproduction_coefficient(&d, n, m).unwrap();
                assert!((r - 1.0).abs() < 1e-9, "({n},{m}): {r}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn reproduction_large(n in 0u32..=1000, m in 0u32..=1000) {
            let d = DomainModel::from_pball(3.0, 1.0, 1.0).unwrap();
            let r = reproduction_coefficient(&d, n, m).unwrap();
            prop_assert!((r - 1.0).abs() < 1e-9, "{}", r);
        }

        #[test]
        fn degree_preserving(n in 0i64..8, m in 0i64..8, a in -0.3f64..0.3, b in -0.3f64..0.3, t in 0.0f64..6.0) {
            let d = DomainModel::from_pball(4.0, 1.0, 1.0).unwrap();
            let g: Radial = Arc::new(|s: f64, sc: f64| c(1.0 + s * sc, 0.5 * s));
            let f = MonomialFunction::new(n, m, g, EndpointExponents::SMOOTH);
            let w = InteriorPoint::new(c(0.3, 0.1), c(-0.2, 0.25));
            let w2 = InteriorPoint::new(c(a, 0.2), Complex64::from_polar(0.3 + b.abs(), t));
            let (v, v2) = (apply_to_monomial(&d, &f, w).unwrap(), apply_to_monomial(&d, &f, w2).unwrap());
            let ratio = (w2.w1 / w.w1).powi(n as i32) * (w2.w2 / w.w2).powi(m as i32);
            prop_assert!((v2 - v * ratio).norm() <= 1e-9 * v2.norm().max(1e-300));
        }

        #[test]
        fn kernel_rotation(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, s in 0.01f64..0.99) {
            let d = DomainModel::from_pball(3.0, 1.0, 2.0).unwrap();
            let w = InteriorPoint::new(c(0.2, -0.1), c(0.1, 0.3));
            let rot = InteriorPoint::new(w.w1 * Complex64::from_polar(1.0, alpha), w.w2 * Complex64::from_polar(1.0, beta));
            let k = leray_kernel_density(&d, s, 0.4, -1.2, w).unwrap();
            let kr = leray_kernel_density(&d, s, 0.4 + alpha, -1.2 + beta, rot).unwrap();
            prop_assert!((k - kr).norm() < 1e-12 * k.norm());
        }
    }
}
