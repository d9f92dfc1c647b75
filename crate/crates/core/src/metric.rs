//! Chart-defined Riemannian 3-metrics and their jet evaluation.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::jet::{chart_variables, Jet, MAX_ORDER};
use crate::linalg::{sym_eigenvalues, Mat3};

/// Storage slot of the symmetric pair `(i, j)` in a 6-component array
/// ordered `11, 12, 13, 22, 23, 33`.
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Region of the chart where a metric formula is valid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartDomain {
    Everywhere,
    /// Open Euclidean ball `|x| < radius` around the chart origin.
    Ball { radius: f64 },
    /// `|x| ≥ radius`.
    Exterior { radius: f64 },
}

impl ChartDomain {
    pub fn contains(&self, x: [f64; 3]) -> bool {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        match *self {
            ChartDomain::Everywhere => x.iter().all(|v| v.is_finite()),
            ChartDomain::Ball { radius } => r < radius,
            ChartDomain::Exterior { radius } => r >= radius,
        }
    }
}

/// A smooth Riemannian metric on a single chart of ℝ³.
///
/// Implementors write the component formulas once, on jets; evaluation at a
/// point is the order-0 case.
pub trait MetricField: Send + Sync + Debug {
    fn name(&self) -> String;

    /// The six components `g_11, g_12, g_13, g_22, g_23, g_33` as functions
    /// of the chart-coordinate jets. No validation happens here.
    fn components(&self, x: &[Jet; 3]) -> [Jet; 6];

    fn domain(&self) -> ChartDomain {
        ChartDomain::Everywhere
    }

    /// Decay order τ when the chart is asymptotically flat.
    fn af_order(&self) -> Option<f64> {
        None
    }

    /// Radii where the metric is only finitely smooth (spline joints).
    /// Radial quadratures split there.
    fn radial_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Largest radius for which geodesic spheres around the chart origin
    /// are trusted to stay embedded.
    fn geodesic_radius_guard(&self) -> Option<f64> {
        None
    }
}

/// Jets of the six metric components at one point.
#[derive(Clone, Copy, Debug)]
pub struct MetricJet {
    pub point: [f64; 3],
    pub components: [Jet; 6],
}

impl MetricJet {
    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.components[sym_index(i, j)]
    }

    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    pub fn value(&self) -> Mat3 {
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j).value();
            }
        }
        g
    }
}

/// Jets of `g_ij` at `x`, reproducing every partial derivative up to `order`.
pub fn jet_eval(metric: &dyn MetricField, x: [f64; 3], order: usize) -> Result<MetricJet> {
    if order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("jet order {order} > {MAX_ORDER}")));
    }
    if !metric.domain().contains(x) {
        return Err(Error::Domain { metric: metric.name(), point: x });
    }
    let vars = chart_variables(x, order);
    let components = metric.components(&vars);
    let jet = MetricJet { point: x, components };
    let min_eigenvalue = sym_eigenvalues(&jet.value())[2];
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { metric: metric.name(), point: x, min_eigenvalue });
    }
    Ok(jet)
}

/// Metric matrix at a point.
pub fn metric_at(metric: &dyn MetricField, x: [f64; 3]) -> Result<Mat3> {
    Ok(jet_eval(metric, x, 0)?.value())
}

/// `|x|` as a jet; the caller guarantees `x ≠ 0`.
pub fn radius_jet(x: &[Jet; 3]) -> Jet {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `f(r) δ_ij` for a scalar jet `f`.
pub fn conformally_flat(f: Jet) -> [Jet; 6] {
    let zero = f * 0.0;
    [f, zero, zero, f, zero, f]
}
