//! End-to-end ladders: geodesic spheres about a point or coordinate spheres
//! of an asymptotically flat chart, turned into mass reports and fitted
//! against the predicted expansions.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_at, CurvatureData};
use crate::embedding::{solve_embedding, EmbeddedSurface, EmbeddingOptions, InitialGuess};
use crate::error::{Error, Result};
use crate::expansions::{
    fit_power_series, large_sphere_limit, large_sphere_volume_coefficient, small_sphere_theory, ExpansionFit,
    FitWeights, LimitFit, ReportRow, TheoremReport, TheoryCoefficients,
};
use crate::grid::SphereGrid;
use crate::masses::{adm_integral, MassReport};
use crate::metric::MetricField;
use crate::sphere::{coordinate_region_volume, coordinate_sphere, geodesic_ladder, GeodesicOptions, SurfaceGeometry};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

impl std::str::FromStr for Spacing {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "log" => Ok(Spacing::Log),
            "linear" => Ok(Spacing::Linear),
            other => Err(format!("spacing must be log or linear, got {other:?}")),
        }
    }
}

/// Radii at which spheres are evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Ladder {
    pub fn new(r_min: f64, r_max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let l = Ladder { r_min, r_max, count, spacing };
        match l.validate().into_iter().next() {
            Some(e) => Err(Error::InvalidParameter(e)),
            None => Ok(l),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.r_min > 0.0) || !self.r_min.is_finite() {
            errs.push(format!("ladder.r_min must be positive and finite, got {}", self.r_min));
        }
        if !(self.r_max > self.r_min) || !self.r_max.is_finite() {
            errs.push(format!("ladder.r_max ({}) must exceed ladder.r_min ({})", self.r_max, self.r_min));
        }
        if self.count < 2 {
            errs.push(format!("ladder.count must be at least 2, got {}", self.count));
        }
        errs
    }

    pub fn radii(&self) -> Vec<f64> {
        let n = self.count.max(2);
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Log => self.r_min * (self.r_max / self.r_min).powf(t),
                    Spacing::Linear => self.r_min + (self.r_max - self.r_min) * t,
                }
            })
            .collect()
    }

    /// Curvature length `ℓ = (|Ric|/√12)^{−1/2}`, normalized so the unit
    /// 3-sphere has `ℓ = 1`; infinite for flat data.
    pub fn curvature_length(curv: &CurvatureData) -> f64 {
        let ric = curv.ricci_norm_sq.sqrt();
        if ric > 0.0 {
            (ric / 12f64.sqrt()).powf(-0.5)
        } else {
            f64::INFINITY
        }
    }

    /// Eight log-spaced radii on `[ℓ/40, ℓ/5]`; `[0.025, 0.2]` when flat.
    ///
    /// Beyond `ℓ/5` the degree-12 embedding of strongly anisotropic spheres
    /// stalls above its default tolerance.
    pub fn small_sphere_default(curv: &CurvatureData) -> Self {
        let l = Self::curvature_length(curv);
        let l = if l.is_finite() { l } else { 1.0 };
        Ladder { r_min: 0.025 * l, r_max: 0.2 * l, count: 8, spacing: Spacing::Log }
    }

    /// Ten log-spaced radii on `[50, 2000]` (in units of the chart).
    pub fn large_sphere_default() -> Self {
        Ladder { r_min: 50.0, r_max: 2000.0, count: 10, spacing: Spacing::Log }
    }
}

/// Which initial guess the pipeline hands to the embedding solver.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessPolicy {
    /// Normal-coordinate support function for geodesic spheres, chart
    /// positions for coordinate spheres.
    #[default]
    Auto,
    /// Use `EmbeddingOptions::initial_guess` as given.
    Explicit,
}

fn resolve_guess(policy: &GuessPolicy, opts: &EmbeddingOptions, geodesic: Option<&CurvatureData>) -> EmbeddingOptions {
    let mut opts = opts.clone();
    if *policy == GuessPolicy::Auto {
        opts.initial_guess = match geodesic {
            Some(c) => InitialGuess::NormalCoordinates { scalar: c.scalar, ricci: c.ricci },
            None => InitialGuess::ChartPositions,
        };
    }
    opts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallSphereOptions {
    pub geodesic: GeodesicOptions,
    pub embedding: EmbeddingOptions,
    pub guess: GuessPolicy,
    /// Skip the embedding (no Brown–York mass, no `V₀`).
    pub embed: bool,
    /// Radial Gauss–Legendre nodes per ball volume; 0 disables volumes.
    pub radial_nodes: usize,
}

impl Default for SmallSphereOptions {
    fn default() -> Self {
        Self {
            geodesic: GeodesicOptions::default(),
            embedding: EmbeddingOptions::default(),
            guess: GuessPolicy::Auto,
            embed: true,
            radial_nodes: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SmallSphereRun {
    pub center: [f64; 3],
    pub curvature: CurvatureData,
    pub theory: TheoryCoefficients,
    pub surfaces: Vec<SurfaceGeometry>,
    pub embeddings: Vec<EmbeddedSurface>,
    pub reports: Vec<MassReport>,
}

/// Embed every surface concurrently; results come back in input order.
pub fn embed_all(surfaces: &[SurfaceGeometry], opts: &EmbeddingOptions) -> Result<Vec<EmbeddedSurface>> {
    surfaces
        .par_iter()
        .map(|s| solve_embedding(s, opts).map_err(|e| e.at_radius(s.radius)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Geodesic spheres about `p` at each radius, with masses, volumes and
/// embeddings.
pub fn small_sphere_run(
    metric: &dyn MetricField,
    p: [f64; 3],
    radii: &[f64],
    grid: Arc<SphereGrid>,
    opts: &SmallSphereOptions,
) -> Result<SmallSphereRun> {
    let curvature = curvature_at(metric, p)?;
    let theory = small_sphere_theory(&curvature);
    let ladder = geodesic_ladder(metric, p, radii, grid, opts.radial_nodes, &opts.geodesic)?;
    let embeddings = if opts.embed {
        embed_all(&ladder.spheres, &resolve_guess(&opts.guess, &opts.embedding, Some(&curvature)))?
    } else {
        Vec::new()
    };
    let reports = ladder
        .spheres
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let r = MassReport::new(s, embeddings.get(k)).map_err(|e| e.at_radius(s.radius))?;
            Ok(match ladder.volumes.get(k) {
                Some(&v) => r.with_volume(v),
                None => r,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SmallSphereRun { center: p, curvature, theory, surfaces: ladder.spheres, embeddings, reports })
}

/// Fits of the small-sphere observables against powers of `r`, each with
/// one nuisance exponent beyond the last predicted term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallSphereFits {
    /// `m_BY` against `{r³, r⁵, r⁷}`.
    pub brown_york: Option<ExpansionFit>,
    /// `m_H` against `{r³, r⁵, r⁷}`.
    pub hawking: ExpansionFit,
    /// `𝒜 − 4πr²` against `{r⁴, r⁶, r⁸}`.
    pub area: ExpansionFit,
    /// `V₀ − V` against `{r⁵, r⁷, r⁹}`.
    pub volume: Option<ExpansionFit>,
}

pub fn fit_small_sphere(reports: &[MassReport]) -> Result<SmallSphereFits> {
    let series = |f: &dyn Fn(&MassReport) -> Option<f64>| -> Option<Vec<(f64, f64)>> {
        reports.iter().map(|r| f(r).map(|v| (r.radius, v))).collect()
    };
    let fit = |s: Vec<(f64, f64)>, e: &[f64]| fit_power_series(&s, e, FitWeights::Relative);
    let brown_york = series(&|r| r.m_by).map(|s| fit(s, &[3.0, 5.0, 7.0])).transpose()?;
    let hawking = fit(series(&|r| Some(r.m_h)).expect("always present"), &[3.0, 5.0, 7.0])?;
    let area =
        fit(series(&|r| Some(r.area - 4.0 * PI * r.radius * r.radius)).expect("always present"), &[4.0, 6.0, 8.0])?;
    let volume = series(&|r| r.volume_difference()).map(|s| fit(s, &[5.0, 7.0, 9.0])).transpose()?;
    Ok(SmallSphereFits { brown_york, hawking, area, volume })
}

/// Pass thresholds for [`theorem_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportTolerances {
    /// Relative tolerance on `c3_by`, `c3_h`, `a4`, `v5`.
    pub leading: f64,
    /// Relative tolerance on `c5_by`, `c5_h`, `a6`, `v7`.
    pub subleading: f64,
    /// Absolute deviation accepted when the predicted value is zero, in
    /// units of the curvature scale of the corresponding coefficient.
    pub zero_floor: f64,
}

impl Default for ReportTolerances {
    fn default() -> Self {
        Self { leading: 0.01, subleading: 0.05, zero_floor: 1e-6 }
    }
}

/// Compare fitted coefficients with the predictions from the center's
/// curvature.
pub fn theorem_report(
    curvature: &CurvatureData,
    fits: &SmallSphereFits,
    tol: &ReportTolerances,
) -> TheoremReport {
    let theory = small_sphere_theory(curvature);
    // Natural sizes of the r³ and r⁵ coefficients, used to scale the floor.
    let k2 = curvature.ricci_norm_sq.sqrt() + curvature.scalar.abs();
    let k4 = k2 * k2 + curvature.laplacian_scalar.abs();
    let floor2 = tol.zero_floor * k2.max(1.0);
    let floor4 = tol.zero_floor * k4.max(1.0);
    let mut rows = Vec::new();
    let mut push = |name: &str, theory: f64, fit: Option<&ExpansionFit>, exp: f64, rel: f64, floor: f64| {
        if let Some((c, u)) = fit.and_then(|f| f.coefficient(exp)) {
            rows.push(ReportRow::compare(name, theory, c, u, rel, floor));
        }
    };
    push("c3_by", theory.c3_by, fits.brown_york.as_ref(), 3.0, tol.leading, floor2);
    push("c5_by", theory.c5_by, fits.brown_york.as_ref(), 5.0, tol.subleading, floor4);
    push("c3_h", theory.c3_h, Some(&fits.hawking), 3.0, tol.leading, floor2);
    push("c5_h", theory.c5_h, Some(&fits.hawking), 5.0, tol.subleading, floor4);
    push("a4", theory.a4, Some(&fits.area), 4.0, tol.leading, floor2);
    push("a6", theory.a6, Some(&fits.area), 6.0, tol.subleading, floor4);
    push("v5", theory.v5, fits.volume.as_ref(), 5.0, tol.leading, floor2);
    push("v7", theory.v7, fits.volume.as_ref(), 7.0, tol.subleading, floor4);
    let scalar_flat = curvature.scalar.abs() <= 1e-10 * k2.max(1.0);
    let c5_by_sign_when_scalar_flat = if scalar_flat {
        fits.brown_york.as_ref().and_then(|f| f.coefficient(5.0)).map(|(c, _)| c.signum())
    } else {
        None
    };
    TheoremReport { rows, c5_by_sign_when_scalar_flat }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeSphereOptions {
    pub embedding: EmbeddingOptions,
    pub guess: GuessPolicy,
    /// Skip the embedding (no Brown–York mass, no `V₀`).
    pub embed: bool,
    pub adm: bool,
    /// Radial Gauss–Legendre nodes per segment of the region volume; 0
    /// disables volumes (required for charts that are singular inside).
    pub radial_nodes: usize,
}

impl Default for LargeSphereOptions {
    fn default() -> Self {
        Self {
            embedding: EmbeddingOptions::default(),
            guess: GuessPolicy::Auto,
            embed: true,
            adm: true,
            radial_nodes: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LargeSphereRun {
    pub surfaces: Vec<SurfaceGeometry>,
    pub embeddings: Vec<EmbeddedSurface>,
    pub reports: Vec<MassReport>,
}

/// Coordinate spheres `|x| = r` at each radius with masses, ADM flux and
/// region volumes.
pub fn large_sphere_run(
    metric: &dyn MetricField,
    radii: &[f64],
    grid: Arc<SphereGrid>,
    opts: &LargeSphereOptions,
) -> Result<LargeSphereRun> {
    let surfaces: Vec<SurfaceGeometry> = radii
        .par_iter()
        .map(|&r| coordinate_sphere(metric, r, grid.clone()).map_err(|e| e.at_radius(r)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let embeddings =
        if opts.embed { embed_all(&surfaces, &resolve_guess(&opts.guess, &opts.embedding, None))? } else { Vec::new() };
    let reports = surfaces
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let report = || -> Result<MassReport> {
                let mut r = MassReport::new(s, embeddings.get(k))?;
                if opts.adm {
                    r = r.with_adm(adm_integral(metric, s.radius, &grid)?);
                }
                if opts.radial_nodes > 0 {
                    r = r.with_volume(coordinate_region_volume(metric, s.radius, &grid, opts.radial_nodes)?);
                }
                Ok(r)
            };
            report().map_err(|e| e.at_radius(s.radius))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(LargeSphereRun { surfaces, embeddings, reports })
}

/// Large-radius limits of the ladder observables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LargeSphereFits {
    pub brown_york: Option<LimitFit>,
    pub hawking: LimitFit,
    pub adm: Option<LimitFit>,
    pub isoperimetric: Option<LimitFit>,
    /// Limit of `(V₀ − V)/r²`, predicted to be `−2π m`.
    pub volume_ratio: Option<LimitFit>,
    /// `−2π m` for the supplied mass, when known.
    pub predicted_volume_ratio: Option<f64>,
}

/// Fit every available quantity as `L + b r^{−p} + c r^{−2p}`. Masses use
/// `p = τ`; the volume-type quantities use `p = min(1, 2τ − 1)`.
pub fn fit_large_sphere(reports: &[MassReport], tau: f64, adm_mass: Option<f64>) -> Result<LargeSphereFits> {
    let series = |f: &dyn Fn(&MassReport) -> Option<f64>| -> Option<Vec<(f64, f64)>> {
        reports.iter().map(|r| f(r).map(|v| (r.radius, v))).collect()
    };
    let volume_decay = (2.0 * tau - 1.0).min(1.0);
    Ok(LargeSphereFits {
        brown_york: series(&|r| r.m_by).map(|s| large_sphere_limit(&s, tau)).transpose()?,
        hawking: large_sphere_limit(&series(&|r| Some(r.m_h)).expect("always present"), tau)?,
        adm: series(&|r| r.adm_partial).map(|s| large_sphere_limit(&s, tau)).transpose()?,
        isoperimetric: series(&|r| r.iso_term).map(|s| large_sphere_limit(&s, volume_decay)).transpose()?,
        volume_ratio: series(&|r| r.volume_difference().map(|d| d / (r.radius * r.radius)))
            .map(|s| large_sphere_limit(&s, volume_decay))
            .transpose()?,
        predicted_volume_ratio: adm_mass.map(large_sphere_volume_coefficient),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_euclidean, make_schwarzschild_isotropic, make_space_form};

    #[test]
    fn ladder_radii() {
        let l = Ladder::new(0.05, 0.4, 8, Spacing::Log).unwrap();
        let r = l.radii();
        assert_eq!(r.len(), 8);
        assert!((r[0] - 0.05).abs() < 1e-15 && (r[7] - 0.4).abs() < 1e-15);
        assert!((r[1] / r[0] - r[7] / r[6]).abs() < 1e-12);
        let lin = Ladder { spacing: Spacing::Linear, ..l.clone() }.radii();
        assert!((lin[1] - lin[0] - 0.05).abs() < 1e-15);
        assert_eq!(Ladder { r_min: 0.4, ..l.clone() }.validate().len(), 1);
        assert!(Ladder::new(0.1, 0.2, 1, Spacing::Log).is_err());
    }

    #[test]
    fn default_ladder_follows_curvature() {
        let s3 = make_space_form(1.0, 1).unwrap();
        let c = curvature_at(s3.metric.as_ref(), [0.0; 3]).unwrap();
        let l = Ladder::small_sphere_default(&c);
        assert!((l.r_max - 0.2).abs() < 1e-12 && (l.r_min - 0.025).abs() < 1e-12);
        let s3 = make_space_form(2.0, 1).unwrap();
        let c = curvature_at(s3.metric.as_ref(), [0.0; 3]).unwrap();
        assert!((Ladder::small_sphere_default(&c).r_max - 0.4).abs() < 1e-12);
    }

    #[test]
    fn flat_small_spheres_report_zero() {
        let e = make_euclidean();
        let grid = Arc::new(SphereGrid::for_degree(6));
        let opts = SmallSphereOptions {
            embedding: EmbeddingOptions { degree: 6, ..Default::default() },
            ..Default::default()
        };
        let run = small_sphere_run(e.metric.as_ref(), [0.0; 3], &[0.1, 0.2, 0.3, 0.4, 0.5], grid, &opts).unwrap();
        for r in &run.reports {
            assert!(r.m_by.unwrap().abs() < 1e-12 && r.m_h.abs() < 1e-12);
            assert!(r.volume_difference().unwrap().abs() < 1e-12);
        }
        let fits = fit_small_sphere(&run.reports).unwrap();
        let rep = theorem_report(&run.curvature, &fits, &ReportTolerances::default());
        assert_eq!(rep.rows.len(), 8);
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.c5_by_sign_when_scalar_flat.is_some());
    }

    #[test]
    fn schwarzschild_large_spheres() {
        let s = make_schwarzschild_isotropic(1.0).unwrap();
        let grid = Arc::new(SphereGrid::for_degree(4));
        let opts = LargeSphereOptions {
            embedding: EmbeddingOptions { degree: 4, ..Default::default() },
            ..Default::default()
        };
        let radii = Ladder::large_sphere_default().radii();
        let run = large_sphere_run(s.metric.as_ref(), &radii, grid, &opts).unwrap();
        for r in &run.reports {
            let exact = s.known.brown_york(r.radius).unwrap();
            assert!((r.m_by.unwrap() / exact - 1.0).abs() < 1e-7);
        }
        let fits = fit_large_sphere(&run.reports, 1.0, Some(1.0)).unwrap();
        assert!((fits.brown_york.unwrap().limit - 1.0).abs() < 1e-3);
        assert!((fits.adm.unwrap().limit - 1.0).abs() < 1e-4);
        assert!(fits.volume_ratio.is_none());
    }
}
