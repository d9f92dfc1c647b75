//! Built-in metrics with closed-form reference data.

mod af_perturbation;
pub mod cap;
mod normal_form;
mod schwarzschild;
mod space_form;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use af_perturbation::{AfPerturbation, MultipoleSeed};
pub use normal_form::{NormalForm, NormalFormCoefficients};
pub use schwarzschild::{areal_radius, CappedSchwarzschild, Schwarzschild};
pub use space_form::SpaceForm;

use crate::curvature::curvature_at;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{sym_eigenvalues, Mat3};
use crate::metric::{conformally_flat, MetricField};

/// The flat metric.
#[derive(Clone, Debug, Default)]
pub struct Euclidean;

impl MetricField for Euclidean {
    fn name(&self) -> String {
        "euclidean".into()
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        conformally_flat(Jet::constant(1.0, x[0].order()))
    }

    fn af_order(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Closed-form reference values attached to a catalog entry.
///
/// Sphere quantities refer to geodesic spheres about the chart origin for
/// space forms and to coordinate spheres `|x| = r` for the asymptotically
/// flat entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KnownData {
    Euclidean,
    SpaceForm { radius: f64, sign: i8 },
    Schwarzschild { mass: f64 },
    CappedSchwarzschild { mass: f64, cap_radius: f64, inner_factor: f64 },
    NormalForm,
    AfPerturbation { mass: f64, tau: f64, cap_radius: f64 },
}

impl KnownData {
    pub fn adm_mass(&self) -> Option<f64> {
        match *self {
            KnownData::Euclidean => Some(0.0),
            KnownData::Schwarzschild { mass } | KnownData::CappedSchwarzschild { mass, .. } => Some(mass),
            KnownData::AfPerturbation { mass, tau: 1.0, .. } => Some(mass),
            _ => None,
        }
    }

    /// Exact value of the finite-radius ADM flux integral over `|x| = r`.
    ///
    /// For decay orders below one the flux of the leading term grows like
    /// `m τ r^{1−τ}` and no finite mass exists; the finite-r value is still
    /// exact.
    pub fn adm_flux(&self, r: f64) -> Option<f64> {
        match *self {
            KnownData::Euclidean => Some(0.0),
            KnownData::Schwarzschild { mass } => Some(mass * (1.0 + 0.5 * mass / r).powi(3)),
            KnownData::CappedSchwarzschild { mass, cap_radius, .. } if r >= cap_radius => {
                Some(mass * (1.0 + 0.5 * mass / r).powi(3))
            }
            KnownData::AfPerturbation { mass, tau, cap_radius } if r >= cap_radius => {
                Some(mass * tau * r.powf(1.0 - tau))
            }
            _ => None,
        }
    }

    pub fn scalar_curvature(&self) -> Option<f64> {
        match *self {
            KnownData::Euclidean | KnownData::Schwarzschild { .. } => Some(0.0),
            KnownData::SpaceForm { radius, sign } => Some(6.0 * sign as f64 / (radius * radius)),
            _ => None,
        }
    }

    pub fn ricci_norm_sq(&self) -> Option<f64> {
        match *self {
            KnownData::Euclidean => Some(0.0),
            KnownData::SpaceForm { radius, .. } => Some(12.0 / radius.powi(4)),
            _ => None,
        }
    }

    pub fn laplacian_scalar(&self) -> Option<f64> {
        match *self {
            KnownData::Euclidean | KnownData::SpaceForm { .. } | KnownData::Schwarzschild { .. } => Some(0.0),
            _ => None,
        }
    }

    fn round_schwarzschild(&self, r: f64) -> Option<f64> {
        match *self {
            KnownData::Schwarzschild { mass } => Some(mass),
            KnownData::CappedSchwarzschild { mass, cap_radius, .. } if r >= cap_radius => Some(mass),
            _ => None,
        }
    }

    /// Areal radius `√(𝒜/4π)` of the reference sphere.
    pub fn areal_radius(&self, r: f64) -> Option<f64> {
        if let Some(m) = self.round_schwarzschild(r) {
            return Some(areal_radius(m, r));
        }
        match *self {
            KnownData::Euclidean => Some(r),
            KnownData::SpaceForm { radius: a, sign } => Some(a * warp(sign, r / a)),
            KnownData::CappedSchwarzschild { inner_factor, cap_radius, .. } if r <= 0.5 * cap_radius => {
                Some(inner_factor * inner_factor * r)
            }
            _ => None,
        }
    }

    pub fn area(&self, r: f64) -> Option<f64> {
        self.areal_radius(r).map(|s| 4.0 * PI * s * s)
    }

    pub fn mean_curvature(&self, r: f64) -> Option<f64> {
        if let Some(m) = self.round_schwarzschild(r) {
            let rs = areal_radius(m, r);
            return Some(2.0 / rs * (1.0 - 2.0 * m / rs).sqrt());
        }
        match *self {
            KnownData::Euclidean => Some(2.0 / r),
            KnownData::SpaceForm { radius: a, sign } => Some(2.0 * warp_derivative(sign, r / a) / (a * warp(sign, r / a))),
            _ => None,
        }
    }

    /// Mean curvature of the isometric image in Euclidean space.
    pub fn embedded_mean_curvature(&self, r: f64) -> Option<f64> {
        self.areal_radius(r).map(|s| 2.0 / s)
    }

    pub fn brown_york(&self, r: f64) -> Option<f64> {
        let s = self.areal_radius(r)?;
        let h = self.mean_curvature(r)?;
        Some(0.5 * s * s * (2.0 / s - h))
    }

    pub fn hawking(&self, r: f64) -> Option<f64> {
        let s = self.areal_radius(r)?;
        let h = self.mean_curvature(r)?;
        Some(0.5 * s * (1.0 - 0.25 * h * h * s * s))
    }

    /// Volume of the region bounded by the reference sphere.
    pub fn enclosed_volume(&self, r: f64) -> Option<f64> {
        match *self {
            KnownData::Euclidean => Some(4.0 * PI * r.powi(3) / 3.0),
            KnownData::SpaceForm { radius: a, sign } => {
                let s = sign as f64;
                let x = r / a;
                let sin2 = if sign > 0 { (2.0 * x).sin() } else { (2.0 * x).sinh() };
                Some(2.0 * PI * a.powi(3) * s * (x - 0.5 * sin2))
            }
            KnownData::CappedSchwarzschild { inner_factor, cap_radius, .. } if r <= 0.5 * cap_radius => {
                Some(inner_factor.powi(6) * 4.0 * PI * r.powi(3) / 3.0)
            }
            _ => None,
        }
    }

    /// Volume enclosed by the Euclidean isometric image of the reference sphere.
    pub fn embedded_volume(&self, r: f64) -> Option<f64> {
        self.areal_radius(r).map(|s| 4.0 * PI * s.powi(3) / 3.0)
    }
}

fn warp(sign: i8, x: f64) -> f64 {
    if sign > 0 {
        x.sin()
    } else {
        x.sinh()
    }
}

fn warp_derivative(sign: i8, x: f64) -> f64 {
    if sign > 0 {
        x.cos()
    } else {
        x.cosh()
    }
}

/// An immutable catalog metric plus its reference data.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub metric: Arc<dyn MetricField>,
    pub known: KnownData,
    pub notes: String,
}

impl CatalogEntry {
    pub fn name(&self) -> String {
        self.metric.name()
    }
}

pub fn make_euclidean() -> CatalogEntry {
    CatalogEntry { metric: Arc::new(Euclidean), known: KnownData::Euclidean, notes: "flat baseline".into() }
}

pub fn make_space_form(radius: f64, sign: i8) -> Result<CatalogEntry> {
    if !(radius > 0.0) || radius.is_infinite() {
        return Err(Error::InvalidParameter(format!("space-form radius must be positive, got {radius}")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParameter(format!("space-form sign must be ±1, got {sign}")));
    }
    Ok(CatalogEntry {
        metric: Arc::new(SpaceForm { radius, sign }),
        known: KnownData::SpaceForm { radius, sign },
        notes: "normal coordinates about the chart origin".into(),
    })
}

pub fn make_schwarzschild_isotropic(mass: f64) -> Result<CatalogEntry> {
    if !(mass > 0.0) || mass.is_infinite() {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    Ok(CatalogEntry {
        metric: Arc::new(Schwarzschild { mass }),
        known: KnownData::Schwarzschild { mass },
        notes: "isotropic chart, r > m/2".into(),
    })
}

pub fn make_capped_schwarzschild(mass: f64, cap_radius: f64) -> Result<CatalogEntry> {
    if !(mass > 0.0) || mass.is_infinite() {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    if !(cap_radius > 2.0 * mass) || cap_radius.is_infinite() {
        return Err(Error::InvalidParameter(format!("cap radius must exceed 2m = {}, got {cap_radius}", 2.0 * mass)));
    }
    let metric = CappedSchwarzschild::new(mass, cap_radius);
    let inner_factor = metric.conformal_factor().inner_value;
    Ok(CatalogEntry {
        metric: Arc::new(metric),
        known: KnownData::CappedSchwarzschild { mass, cap_radius, inner_factor },
        notes: "Schwarzschild outside the cap radius, conformally constant inside half of it".into(),
    })
}

/// Deterministic probe points filling a ball (or shell) of the chart.
pub fn probe_points(r_min: f64, r_max: f64, count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            // Radical-inverse radius so radii are spread independently of direction.
            let mut f = 0.0;
            let mut base = 0.5;
            let mut n = i + 1;
            while n > 0 {
                if n & 1 == 1 {
                    f += base;
                }
                base *= 0.5;
                n >>= 1;
            }
            let r = r_min + (r_max - r_min) * f;
            [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
        })
        .collect()
}

fn check_positive_definite(metric: &dyn MetricField, points: &[[f64; 3]]) -> Result<()> {
    for &p in points {
        crate::metric::jet_eval(metric, p, 0)?;
    }
    Ok(())
}

/// Polynomial metric from raw coefficient tensors; positive definiteness is
/// sampled on `10³` points of the ball of radius `ball_radius`.
pub fn make_normal_form(coefficients: NormalFormCoefficients, ball_radius: f64) -> Result<CatalogEntry> {
    if !(ball_radius > 0.0) {
        return Err(Error::InvalidParameter(format!("ball radius must be positive, got {ball_radius}")));
    }
    let metric = NormalForm::new(coefficients, ball_radius)?;
    check_positive_definite(&metric, &probe_points(0.0, 0.999 * ball_radius, 1000))?;
    Ok(CatalogEntry {
        metric: Arc::new(metric),
        known: KnownData::NormalForm,
        notes: "polynomial metric; reference curvature from exact jets at the origin".into(),
    })
}

/// Normal-form metric whose curvature at the origin has the given Ricci
/// tensor, with optional cubic `cubic·x¹|x|²δ` and quartic `quartic·|x|⁴δ`
/// terms that feed `∇R` and `ΔR`.
pub fn make_normal_form_from_ricci(ricci: &Mat3, cubic: f64, quartic: f64, ball_radius: f64) -> Result<CatalogEntry> {
    let mut c = NormalFormCoefficients::zero();
    c.quadratic = NormalForm::quadratic_from_ricci(ricci);
    c.quartic = NormalForm::conformal_quartic(quartic);
    for i in 0..3 {
        for k in 0..3 {
            c.cubic[(((i * 3 + i) * 3) * 3 + k) * 3 + k] = cubic;
        }
    }
    make_normal_form(c, ball_radius)
}

/// Normal-form metric with `R(0) = 0` and `ΔR(0) = 0` but non-zero Ricci
/// tensor `diag(λ₁, λ₂, −λ₁ − λ₂)`; the quartic term is solved for so the
/// Laplacian of the scalar curvature vanishes at the origin.
pub fn make_scalar_flat_normal_form(lambda1: f64, lambda2: f64, ball_radius: f64) -> Result<CatalogEntry> {
    let ricci = [[lambda1, 0.0, 0.0], [0.0, lambda2, 0.0], [0.0, 0.0, -lambda1 - lambda2]];
    if sym_eigenvalues(&ricci).iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter("scalar-flat normal form needs a non-zero Ricci tensor".into()));
    }
    let lap = |q: f64| -> Result<f64> {
        let e = make_normal_form_from_ricci(&ricci, 0.0, q, ball_radius)?;
        Ok(curvature_at(e.metric.as_ref(), [0.0; 3])?.laplacian_scalar)
    };
    // ΔR(0) is affine in the quartic scale.
    let d0 = lap(0.0)?;
    let d1 = lap(1.0)?;
    let q = -d0 / (d1 - d0);
    let mut entry = make_normal_form_from_ricci(&ricci, 0.0, q, ball_radius)?;
    entry.notes = format!("scalar-flat at the origin; quartic scale {q:e} cancels the Laplacian of R");
    Ok(entry)
}

/// Asymptotically flat perturbation with decay order `tau ∈ (1/2, 1]`.
pub fn make_af_perturbation(mass: f64, tau: f64, seeds: Vec<MultipoleSeed>, cap_radius: f64) -> Result<CatalogEntry> {
    if !(tau > 0.5 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("decay order must satisfy 1 ≥ τ > 1/2, got {tau}")));
    }
    if !mass.is_finite() || !(cap_radius > 0.0) {
        return Err(Error::InvalidParameter("mass must be finite and cap radius positive".into()));
    }
    if let Some(s) = seeds.iter().find(|s| !s.is_valid()) {
        return Err(Error::InvalidParameter(format!("unsupported multipole seed {s:?}")));
    }
    let metric = AfPerturbation { mass, tau, seeds, cap_radius };
    check_positive_definite(&metric, &probe_points(1.0, 1.0e4, 1000))?;
    Ok(CatalogEntry {
        metric: Arc::new(metric),
        known: KnownData::AfPerturbation { mass, tau, cap_radius },
        notes: "conformally flat perturbation with multipole seeds".into(),
    })
}

/// Catalog entry addressed by name and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogSpec {
    Euclidean,
    SpaceForm {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one_i8")]
        sign: i8,
    },
    Schwarzschild {
        m: f64,
    },
    CappedSchwarzschild {
        m: f64,
        cap_radius: f64,
    },
    NormalForm {
        /// Ricci tensor at the origin, diagonal entries.
        ricci: [f64; 3],
        #[serde(default)]
        cubic: f64,
        #[serde(default)]
        quartic: f64,
        /// Solve the quartic term so that ΔR vanishes at the origin and
        /// require a traceless Ricci input.
        #[serde(default)]
        scalar_flat: bool,
        #[serde(default = "one")]
        ball_radius: f64,
    },
    AfPerturbation {
        m: f64,
        tau: f64,
        #[serde(default)]
        seeds: Vec<MultipoleSeed>,
        #[serde(default = "two")]
        cap_radius: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn one_i8() -> i8 {
    1
}

impl CatalogSpec {
    /// Field-level parameter problems, without building anything.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |errs: &mut Vec<String>, field: &str, v: f64| {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(format!("metric.{field}: must be positive and finite, got {v}"));
            }
        };
        match self {
            CatalogSpec::Euclidean => {}
            CatalogSpec::SpaceForm { a, sign } => {
                positive(&mut errs, "a", *a);
                if *sign != 1 && *sign != -1 {
                    errs.push(format!("metric.sign: must be +1 or -1, got {sign}"));
                }
            }
            CatalogSpec::Schwarzschild { m } => positive(&mut errs, "m", *m),
            CatalogSpec::CappedSchwarzschild { m, cap_radius } => {
                positive(&mut errs, "m", *m);
                if !(*cap_radius > 2.0 * m) {
                    errs.push(format!("metric.cap_radius: must exceed 2m = {}, got {cap_radius}", 2.0 * m));
                }
            }
            CatalogSpec::NormalForm { ricci, ball_radius, scalar_flat, .. } => {
                positive(&mut errs, "ball_radius", *ball_radius);
                if *scalar_flat && (ricci.iter().sum::<f64>()).abs() > 1e-12 {
                    errs.push("metric.ricci: scalar_flat requires a traceless Ricci diagonal".into());
                }
            }
            CatalogSpec::AfPerturbation { m, tau, seeds, cap_radius } => {
                if !(*tau > 0.5 && *tau <= 1.0) {
                    errs.push(format!("metric.tau: decay order must satisfy 1 ≥ τ > 1/2, got {tau}"));
                }
                if !m.is_finite() {
                    errs.push("metric.m: must be finite".into());
                }
                positive(&mut errs, "cap_radius", *cap_radius);
                for (i, s) in seeds.iter().enumerate() {
                    if !s.is_valid() {
                        errs.push(format!("metric.seeds[{i}]: unsupported degree/component {}/{}", s.degree, s.component));
                    }
                }
            }
        }
        errs
    }

    pub fn build(&self) -> Result<CatalogEntry> {
        match self {
            CatalogSpec::Euclidean => Ok(make_euclidean()),
            CatalogSpec::SpaceForm { a, sign } => make_space_form(*a, *sign),
            CatalogSpec::Schwarzschild { m } => make_schwarzschild_isotropic(*m),
            CatalogSpec::CappedSchwarzschild { m, cap_radius } => make_capped_schwarzschild(*m, *cap_radius),
            CatalogSpec::NormalForm { ricci, cubic, quartic, scalar_flat, ball_radius } => {
                if *scalar_flat {
                    make_scalar_flat_normal_form(ricci[0], ricci[1], *ball_radius)
                } else {
                    let r = [[ricci[0], 0.0, 0.0], [0.0, ricci[1], 0.0], [0.0, 0.0, ricci[2]]];
                    make_normal_form_from_ricci(&r, *cubic, *quartic, *ball_radius)
                }
            }
            CatalogSpec::AfPerturbation { m, tau, seeds, cap_radius } => {
                make_af_perturbation(*m, *tau, seeds.clone(), *cap_radius)
            }
        }
    }

    pub fn is_asymptotically_flat(&self) -> bool {
        matches!(
            self,
            CatalogSpec::Euclidean
                | CatalogSpec::Schwarzschild { .. }
                | CatalogSpec::CappedSchwarzschild { .. }
                | CatalogSpec::AfPerturbation { .. }
        )
    }
}
