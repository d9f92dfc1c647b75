//! Asymptotically flat perturbations of the Euclidean metric with a chosen
//! decay order.

use serde::{Deserialize, Serialize};

use super::cap::SmoothStep;
use crate::jet::Jet;
use crate::metric::{conformally_flat, radius_jet, MetricField};

/// A low-degree angular term `amplitude · P(x)/|x|^degree`, where `P` is a
/// real harmonic polynomial.
///
/// Degree 1 components: `x, y, z`. Degree 2 components:
/// `xy, yz, xz, x² − y², 2z² − x² − y²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipoleSeed {
    pub degree: u8,
    pub component: u8,
    pub amplitude: f64,
}

impl MultipoleSeed {
    pub fn is_valid(&self) -> bool {
        match self.degree {
            1 => self.component < 3,
            2 => self.component < 5,
            _ => false,
        }
    }

    fn polynomial(&self, x: &[Jet; 3]) -> Jet {
        let [a, b, c] = *x;
        match (self.degree, self.component) {
            (1, k) => x[k as usize],
            (2, 0) => a * b,
            (2, 1) => b * c,
            (2, 2) => a * c,
            (2, 3) => a * a - b * b,
            (2, 4) => c * c * 2.0 - a * a - b * b,
            _ => unreachable!("invalid multipole seed"),
        }
    }

    /// Angular factor at a unit direction.
    pub fn angular(&self, d: [f64; 3]) -> f64 {
        let x = crate::jet::chart_variables(d, 0);
        self.polynomial(&x).value()
    }
}

/// `g = (1 + χ(r)[2m r^{−τ} + Σ c_s Y_s(x̂) r^{−τ−1}]) δ` with a C⁴ cap χ
/// switching on between `cap_radius/2` and `cap_radius`.
#[derive(Clone, Debug)]
pub struct AfPerturbation {
    pub mass: f64,
    pub tau: f64,
    pub seeds: Vec<MultipoleSeed>,
    pub cap_radius: f64,
}

impl AfPerturbation {
    fn cap(&self) -> SmoothStep {
        SmoothStep { r_in: 0.5 * self.cap_radius, r_out: self.cap_radius }
    }

    /// `σ_11` at a chart point (the perturbation is isotropic).
    pub fn sigma(&self, x: [f64; 3]) -> f64 {
        let v = crate::jet::chart_variables(x, 0);
        self.components(&v)[0].value() - 1.0
    }
}

impl MetricField for AfPerturbation {
    fn name(&self) -> String {
        format!("af_perturbation(m={}, tau={}, seeds={})", self.mass, self.tau, self.seeds.len())
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        let order = x[0].order();
        let r0 = (x[0].value().powi(2) + x[1].value().powi(2) + x[2].value().powi(2)).sqrt();
        let cap = self.cap();
        if r0 <= cap.r_in {
            return conformally_flat(Jet::constant(1.0, order));
        }
        let r = radius_jet(x);
        let chi = r.compose(&cap.taylor(r0));
        let mut sigma = r.powf(-self.tau) * (2.0 * self.mass);
        for s in &self.seeds {
            let fall = r.powf(-self.tau - 1.0 - s.degree as f64);
            sigma += s.polynomial(x) * fall * s.amplitude;
        }
        conformally_flat(chi * sigma + 1.0)
    }

    fn af_order(&self) -> Option<f64> {
        Some(self.tau)
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        vec![0.5 * self.cap_radius, self.cap_radius]
    }
}
