//! Time-symmetric Schwarzschild slices in isotropic coordinates.

use super::cap::CappedConformalFactor;
use crate::jet::Jet;
use crate::metric::{conformally_flat, radius_jet, ChartDomain, MetricField};

/// `g = (1 + m/2r)⁴ δ` on `r > m/2`.
#[derive(Clone, Debug)]
pub struct Schwarzschild {
    pub mass: f64,
}

impl MetricField for Schwarzschild {
    fn name(&self) -> String {
        format!("schwarzschild(m={})", self.mass)
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        let r = radius_jet(x);
        let u = r.recip() * (0.5 * self.mass) + 1.0;
        conformally_flat(u.powi(4))
    }

    fn domain(&self) -> ChartDomain {
        ChartDomain::Exterior { radius: 0.5 * self.mass }
    }

    fn af_order(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Schwarzschild outside `cap_radius`, conformally flat with a constant
/// factor inside `cap_radius/2`, joined by a C⁴ monotone blend.
#[derive(Clone, Debug)]
pub struct CappedSchwarzschild {
    pub mass: f64,
    pub cap_radius: f64,
    factor: CappedConformalFactor,
}

impl CappedSchwarzschild {
    pub fn new(mass: f64, cap_radius: f64) -> Self {
        Self { mass, cap_radius, factor: CappedConformalFactor::new(mass, cap_radius) }
    }

    pub fn conformal_factor(&self) -> &CappedConformalFactor {
        &self.factor
    }
}

impl MetricField for CappedSchwarzschild {
    fn name(&self) -> String {
        format!("capped_schwarzschild(m={}, R0={})", self.mass, self.cap_radius)
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        let order = x[0].order();
        let r0 = (x[0].value().powi(2) + x[1].value().powi(2) + x[2].value().powi(2)).sqrt();
        if r0 <= self.factor.r_in() {
            return conformally_flat(Jet::constant(self.factor.inner_value.powi(4), order));
        }
        let r = radius_jet(x);
        let u = r.compose(&self.factor.taylor(r0));
        conformally_flat(u.powi(4))
    }

    fn af_order(&self) -> Option<f64> {
        Some(1.0)
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        vec![self.factor.r_in(), self.cap_radius]
    }
}

/// Areal radius `ρ(1 + m/2ρ)²` of the coordinate sphere `|x| = ρ`.
pub fn areal_radius(mass: f64, rho: f64) -> f64 {
    rho * (1.0 + 0.5 * mass / rho).powi(2)
}
