//! Brown–York, Hawking and ADM mass functionals, the isoperimetric term and
//! volume comparison, all evaluated from sampled surfaces.

use std::f64::consts::PI;

use serde::Serialize;

use crate::embedding::{enclosed_volume, minkowski_check, EmbeddedSurface};
use crate::error::{Error, Result};
use crate::grid::SphereGrid;
use crate::metric::{jet_eval, MetricField};
use crate::sphere::{integrate_scalar, Measure, SurfaceGeometry};

/// Brown–York mass `(1/8π)∫(H₀ − H) dΣ`.
pub fn brown_york(surface: &SurfaceGeometry, es: &EmbeddedSurface) -> Result<f64> {
    if es.mean_curvature.len() != surface.len() || es.grid.as_ref() != surface.grid.as_ref() {
        return Err(Error::GridMismatch(es.mean_curvature.len(), surface.len()));
    }
    if !es.converged {
        return Err(Error::EmbeddingNotConverged {
            iterations: es.iterations,
            residual: es.residual,
            history: es.history.clone(),
            surface: Box::new(es.clone()),
        });
    }
    let diff: Vec<f64> = es.mean_curvature.iter().zip(&surface.mean_curvature).map(|(a, b)| a - b).collect();
    Ok(integrate_scalar(surface, &diff, Measure::Induced)? / (8.0 * PI))
}

/// Hawking mass `√(𝒜/16π) (16π − ∫H²)/16π`.
pub fn hawking(surface: &SurfaceGeometry) -> f64 {
    hawking_from(surface.area(), surface.willmore())
}

fn hawking_from(area: f64, int_h2: f64) -> f64 {
    (area / (16.0 * PI)).sqrt() * (16.0 * PI - int_h2) / (16.0 * PI)
}

/// Finite-radius ADM flux `(1/16π)∫(g_ij,i − g_ii,j)ν^j dΣ⁰` over `|x| = r`
/// with the Euclidean normal and measure.
pub fn adm_integral(metric: &dyn MetricField, r: f64, grid: &SphereGrid) -> Result<f64> {
    if metric.af_order().is_none() {
        return Err(Error::NotAsymptoticallyFlat(metric.name()));
    }
    let integrand: Vec<f64> = (0..grid.len())
        .map(|i| {
            let nu = grid.direction(i);
            let jet = jet_eval(metric, nu.map(|c| r * c), 1)?;
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += jet.get(i, j).gradient()[i] * nu[j];
                    s -= jet.get(i, i).gradient()[j] * nu[j];
                }
            }
            Ok(s * r * r)
        })
        .collect::<Result<_>>()?;
    Ok(grid.integrate(&integrand) / (16.0 * PI))
}

/// `2/𝒜 · (V − 𝒜^{3/2}/(6√π))`.
pub fn isoperimetric_term(volume: f64, area: f64) -> f64 {
    2.0 / area * (volume - area.powf(1.5) / (6.0 * PI.sqrt()))
}

/// `V₀ − V`.
pub fn volume_comparison(volume: f64, volume0: f64) -> f64 {
    volume0 - volume
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MassDiagnostics {
    pub embedding_residual: Option<f64>,
    pub embedding_iterations: Option<usize>,
    pub minkowski: Option<(f64, f64)>,
    pub gauss_bonnet_defect: f64,
    pub gauss_lemma_defect: f64,
}

/// Observables of one sphere on a ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassReport {
    pub radius: f64,
    pub area: f64,
    pub int_h: f64,
    pub int_h0: Option<f64>,
    pub int_h2: f64,
    pub m_by: Option<f64>,
    pub m_h: f64,
    pub adm_partial: Option<f64>,
    pub volume: Option<f64>,
    pub volume0: Option<f64>,
    pub iso_term: Option<f64>,
    pub diagnostics: MassDiagnostics,
}

/// Column order of [`MassReport::csv_record`]. Absent values are empty.
pub const MASS_REPORT_COLUMNS: [&str; 18] = [
    "radius",
    "area",
    "int_h",
    "int_h0",
    "int_h2",
    "m_by",
    "m_h",
    "adm_partial",
    "volume",
    "volume0",
    "volume_difference",
    "iso_term",
    "embedding_residual",
    "embedding_iterations",
    "minkowski_h0",
    "minkowski_area",
    "gauss_bonnet_defect",
    "gauss_lemma_defect",
];

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl MassReport {
    /// One CSV row in [`MASS_REPORT_COLUMNS`] order.
    pub fn csv_record(&self) -> Vec<String> {
        let d = &self.diagnostics;
        vec![
            self.radius.to_string(),
            self.area.to_string(),
            self.int_h.to_string(),
            cell(self.int_h0),
            self.int_h2.to_string(),
            cell(self.m_by),
            self.m_h.to_string(),
            cell(self.adm_partial),
            cell(self.volume),
            cell(self.volume0),
            cell(self.volume_difference()),
            cell(self.iso_term),
            cell(d.embedding_residual),
            d.embedding_iterations.map(|v| v.to_string()).unwrap_or_default(),
            cell(d.minkowski.map(|m| m.0)),
            cell(d.minkowski.map(|m| m.1)),
            d.gauss_bonnet_defect.to_string(),
            d.gauss_lemma_defect.to_string(),
        ]
    }

    /// Report from a surface and, when available, its embedding.
    pub fn new(surface: &SurfaceGeometry, es: Option<&EmbeddedSurface>) -> Result<Self> {
        let area = surface.area();
        let int_h = surface.total_mean_curvature();
        let int_h2 = surface.willmore();
        let mut report = MassReport {
            radius: surface.radius,
            area,
            int_h,
            int_h0: None,
            int_h2,
            m_by: None,
            m_h: hawking_from(area, int_h2),
            adm_partial: None,
            volume: None,
            volume0: None,
            iso_term: None,
            diagnostics: MassDiagnostics {
                gauss_bonnet_defect: surface.diagnostics.gauss_bonnet_defect,
                gauss_lemma_defect: surface.diagnostics.gauss_lemma_defect,
                ..Default::default()
            },
        };
        if let Some(es) = es {
            let m_by = brown_york(surface, es)?;
            report.int_h0 = Some(es.total_mean_curvature());
            report.m_by = Some(m_by);
            report.volume0 = Some(enclosed_volume(es)?);
            report.diagnostics.embedding_residual = Some(es.residual);
            report.diagnostics.embedding_iterations = Some(es.iterations);
            report.diagnostics.minkowski = Some(minkowski_check(es));
        }
        Ok(report)
    }

    pub fn with_adm(mut self, adm: f64) -> Self {
        self.adm_partial = Some(adm);
        self
    }

    /// Attach the enclosed volume; fills the isoperimetric term.
    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self.iso_term = Some(isoperimetric_term(volume, self.area));
        self
    }

    /// `V₀ − V` when both volumes are known.
    pub fn volume_difference(&self) -> Option<f64> {
        Some(volume_comparison(self.volume?, self.volume0?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_euclidean, make_schwarzschild_isotropic};
    use crate::sphere::coordinate_sphere;
    use std::sync::Arc;

    #[test]
    fn csv_record_matches_columns() {
        let grid = Arc::new(SphereGrid::new(6, 12).unwrap());
        let s = coordinate_sphere(make_euclidean().metric.as_ref(), 2.0, grid).unwrap();
        let r = MassReport::new(&s, None).unwrap().with_volume(1.0);
        let row = r.csv_record();
        assert_eq!(row.len(), MASS_REPORT_COLUMNS.len());
        assert_eq!(row[0], "2");
        assert!(row[5].is_empty() && !row[11].is_empty());
    }

    #[test]
    fn isoperimetric_examples() {
        let r: f64 = 3.0;
        let a = 4.0 * PI * r * r;
        assert!(isoperimetric_term(4.0 * PI * r.powi(3) / 3.0, a).abs() < 1e-14);
        let iso = isoperimetric_term(4.0 * PI * r.powi(3) / 3.0 + 2.0 * PI * r * r, a);
        assert!((iso - 1.0).abs() < 1e-13);
    }

    #[test]
    fn adm_flux_matches_closed_form() {
        let grid = SphereGrid::new(6, 12).unwrap();
        let e = make_euclidean();
        assert_eq!(adm_integral(e.metric.as_ref(), 5.0, &grid).unwrap(), 0.0);
        let s = make_schwarzschild_isotropic(1.0).unwrap();
        let v = adm_integral(s.metric.as_ref(), 1000.0, &grid).unwrap();
        let exact = (1.0 + 0.5 / 1000.0f64).powi(3);
        assert!((v - exact).abs() < 1e-12, "{}", v - exact);
    }

    #[test]
    fn hawking_on_schwarzschild_is_the_mass() {
        let s = make_schwarzschild_isotropic(1.0).unwrap();
        let grid = Arc::new(SphereGrid::new(6, 12).unwrap());
        for rho in [3.0, 100.0] {
            let surf = coordinate_sphere(s.metric.as_ref(), rho, grid.clone()).unwrap();
            assert!((hawking(&surf) - 1.0).abs() < 1e-10);
        }
    }
}
