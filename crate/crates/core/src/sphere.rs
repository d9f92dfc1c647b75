//! Sampled spheres in a chart metric: geodesic spheres from the exponential
//! map with Jacobi fields, coordinate spheres `|x| = r`, their extrinsic and
//! intrinsic geometry, and enclosed volumes.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{connection_at, riemann_at, riemann_quad, Christoffel};
use crate::error::{Error, Result};
use crate::grid::{gauss_legendre_interval, SphereGrid};
use crate::linalg::{cholesky3, dot3, inner, inverse3, matvec3, pairwise_sum, transpose3, Mat3, IDENTITY};
use crate::metric::{metric_at, ChartDomain, MetricField};
use crate::ode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Geodesic,
    Coordinate,
}

/// Which area element an integral uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Induced area element `dΣ`.
    Induced,
    /// Euclidean area element `dΣ⁰` of the coordinate sphere.
    Euclidean,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SurfaceDiagnostics {
    /// RK4 steps per unit of the largest traced radius (geodesic spheres).
    pub ode_steps: usize,
    /// Two-grid error estimate of the accepted step size.
    pub step_error_estimate: f64,
    /// `max |g(γ′, γ′) − 1|` over all steps and nodes.
    pub gauss_lemma_defect: f64,
    /// `|∫K dΣ − 4π| / 4π`.
    pub gauss_bonnet_defect: f64,
}

/// A sphere sampled on a [`SphereGrid`].
///
/// Surface tensors are stored in the `(θ, φ)` coordinate frame as
/// `[E, F, G]`-style triples `(θθ, θφ, φφ)`. Area elements are densities
/// with respect to the grid's solid-angle weights, so `Σ wᵢ dΣᵢ` is the area.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub kind: SurfaceKind,
    pub radius: f64,
    pub center: [f64; 3],
    pub grid: Arc<SphereGrid>,
    /// Maps a Euclidean unit direction to the initial velocity of the
    /// geodesic (identity for coordinate spheres).
    pub frame: Mat3,
    pub positions: Vec<[f64; 3]>,
    /// Chart components of `∂/∂θ` and `∂/∂φ`.
    pub tangents: Vec<[[f64; 3]; 2]>,
    /// Outward unit normal (chart components of the vector).
    pub normals: Vec<[f64; 3]>,
    pub induced_metric: Vec<[f64; 3]>,
    pub second_fundamental: Vec<[f64; 3]>,
    pub mean_curvature: Vec<f64>,
    pub gauss_curvature: Vec<f64>,
    pub area_element: Vec<f64>,
    pub euclidean_area_element: Option<Vec<f64>>,
    pub diagnostics: SurfaceDiagnostics,
}

impl SurfaceGeometry {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.grid.integrate(&self.area_element)
    }

    /// `∫H dΣ`.
    pub fn total_mean_curvature(&self) -> f64 {
        integrate_scalar(self, &self.mean_curvature, Measure::Induced).expect("own grid")
    }

    /// `∫H² dΣ`.
    pub fn willmore(&self) -> f64 {
        let h2: Vec<f64> = self.mean_curvature.iter().map(|h| h * h).collect();
        integrate_scalar(self, &h2, Measure::Induced).expect("own grid")
    }

    pub fn areal_radius(&self) -> f64 {
        (self.area() / (4.0 * std::f64::consts::PI)).sqrt()
    }

    pub fn min_gauss_curvature(&self) -> (usize, f64) {
        self.gauss_curvature
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
    }
}

/// `Σ wᵢ fᵢ dΣᵢ` with a fixed summation tree.
pub fn integrate_scalar(surface: &SurfaceGeometry, field: &[f64], measure: Measure) -> Result<f64> {
    if field.len() != surface.len() {
        return Err(Error::GridMismatch(field.len(), surface.len()));
    }
    let element = match measure {
        Measure::Induced => &surface.area_element,
        Measure::Euclidean => {
            surface.euclidean_area_element.as_ref().ok_or(Error::MeasureUnavailable("dΣ⁰ (Euclidean)"))?
        }
    };
    let values: Vec<f64> = field.iter().zip(element).map(|(f, a)| f * a).collect();
    Ok(surface.grid.integrate(&values))
}

/// Step-size control for the geodesic/Jacobi integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    /// Target two-grid error per unit arc length.
    pub tolerance: f64,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, min_steps: 8, max_steps: 8192 }
    }
}

type State = [f64; 18];

/// Extrinsic and intrinsic data at one node of a sphere.
#[derive(Clone, Copy, Debug)]
struct NodeGeometry {
    position: [f64; 3],
    tangents: [[f64; 3]; 2],
    normal: [f64; 3],
    h: [f64; 3],
    a: [f64; 3],
    mean: f64,
    gauss: f64,
    density: f64,
}

fn contract_gamma(gamma: &Christoffel, u: &[f64; 3], w: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|k| {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += gamma[k][i][j] * u[i] * w[j];
            }
        }
        s
    })
}

fn slice3(y: &State, at: usize) -> [f64; 3] {
    [y[at], y[at + 1], y[at + 2]]
}

/// Geodesic plus the two Jacobi fields generated by varying θ and φ.
fn geodesic_rhs(metric: &dyn MetricField, y: &State) -> std::result::Result<State, String> {
    let x = slice3(y, 0);
    let v = slice3(y, 3);
    let con = connection_at(metric, x).map_err(|e| e.to_string())?;
    let mut out = [0.0; 18];
    let acc = contract_gamma(&con.christoffel, &v, &v);
    for k in 0..3 {
        out[k] = v[k];
        out[3 + k] = -acc[k];
    }
    for (j_at, dj_at) in [(6, 9), (12, 15)] {
        let jf = slice3(y, j_at);
        let dj = slice3(y, dj_at);
        let turn = contract_gamma(&con.christoffel, &v, &dj);
        for k in 0..3 {
            let mut dg = 0.0;
            for m in 0..3 {
                if jf[m] != 0.0 {
                    let g = &con.d_christoffel[m][k];
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            s += g[i][j] * v[i] * v[j];
                        }
                    }
                    dg += s * jf[m];
                }
            }
            out[j_at + k] = dj[k];
            out[dj_at + k] = -dg - 2.0 * turn[k];
        }
    }
    Ok(out)
}

fn det2(h: &[f64; 3]) -> f64 {
    h[0] * h[2] - h[1] * h[1]
}

/// Shape data from tangents, the covariant derivative of the normal along
/// them, and the ambient curvature.
fn shape(
    g: &Mat3,
    riemann: &crate::curvature::Riemann,
    t: &[[f64; 3]; 2],
    a: [f64; 3],
    sin_theta: f64,
) -> Option<(f64, f64, f64, [f64; 3])> {
    let h = [inner(g, &t[0], &t[0]), inner(g, &t[0], &t[1]), inner(g, &t[1], &t[1])];
    let det = det2(&h);
    if !(det > 0.0) {
        return None;
    }
    let mean = (h[2] * a[0] - 2.0 * h[1] * a[1] + h[0] * a[2]) / det;
    let gauss = (riemann_quad(riemann, &t[0], &t[1]) + det2(&a)) / det;
    Some((mean, gauss, det.sqrt() / sin_theta, h))
}

fn gl_volume_nodes(r: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre_interval(n, 0.0, r)
}

/// Result of tracing one family of geodesics through several radii.
struct Traced {
    spheres: Vec<Vec<NodeGeometry>>,
    /// `densities[k][node]` at the area-only stops.
    densities: Vec<Vec<f64>>,
    steps_per_length: f64,
    error_estimate: f64,
    gauss_lemma_defect: f64,
}

fn initial_state(p: [f64; 3], frame: &Mat3, grid: &SphereGrid, node: usize) -> State {
    let f = grid.frame(node);
    let v = matvec3(frame, &f.d);
    let dt = matvec3(frame, &f.d_theta);
    let dp = matvec3(frame, &f.d_phi);
    let mut y = [0.0; 18];
    y[..3].copy_from_slice(&p);
    y[3..6].copy_from_slice(&v);
    y[9..12].copy_from_slice(&dt);
    y[15..18].copy_from_slice(&dp);
    y
}

/// Pick a step length by halving until the two-grid RK4 estimate
/// `|y_h − y_{h/2}| / 15` over a few probe directions meets the tolerance.
fn choose_step(
    metric: &dyn MetricField,
    p: [f64; 3],
    frame: &Mat3,
    grid: &SphereGrid,
    r_max: f64,
    opts: &GeodesicOptions,
) -> Result<(usize, f64)> {
    let probes: Vec<usize> = (0..6).map(|k| (k * grid.len()) / 6 + grid.n_phi / 3).map(|i| i % grid.len()).collect();
    let rhs = |y: &State| geodesic_rhs(metric, y);
    let run = |node: usize, n: usize| -> Result<State> {
        ode::integrate(&rhs, initial_state(p, frame, grid, node), r_max, n, |_, _| {})
            .map_err(|reason| Error::Ode { node, radius: r_max, reason })
    };
    let mut n = opts.min_steps.max(1);
    let mut coarse: Vec<State> = probes.iter().map(|&i| run(i, n)).collect::<Result<_>>()?;
    loop {
        let fine: Vec<State> = probes.iter().map(|&i| run(i, 2 * n)).collect::<Result<_>>()?;
        let est = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs() / 15.0))
            .fold(0.0, f64::max);
        if est <= opts.tolerance * r_max || 2 * n >= opts.max_steps {
            if est > opts.tolerance * r_max {
                return Err(Error::Ode {
                    node: probes[0],
                    radius: r_max,
                    reason: format!("step budget {} exhausted, error estimate {est:e}", opts.max_steps),
                });
            }
            return Ok((2 * n, est));
        }
        n *= 2;
        coarse = fine;
    }
}

fn geodesic_frame(metric: &dyn MetricField, p: [f64; 3]) -> Result<Mat3> {
    let g = metric_at(metric, p)?;
    let l = cholesky3(&g).ok_or(Error::NotPositiveDefinite {
        metric: metric.name(),
        point: p,
        min_eigenvalue: f64::NAN,
    })?;
    // v = L^{-T} d is g-unit for Euclidean-unit d.
    Ok(transpose3(&inverse3(&l)))
}

fn check_guard(metric: &dyn MetricField, r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {r}")));
    }
    if let Some(guard) = metric.geodesic_radius_guard() {
        if r > guard {
            return Err(Error::RadiusGuard { radius: r, guard });
        }
    }
    Ok(())
}

fn trace_family(
    metric: &dyn MetricField,
    p: [f64; 3],
    frame: &Mat3,
    grid: &SphereGrid,
    full: &[f64],
    area_only: &[f64],
    opts: &GeodesicOptions,
) -> Result<Traced> {
    // Stops in increasing order; `true` marks a full-geometry stop.
    let mut stops: Vec<(f64, bool, usize)> = full.iter().enumerate().map(|(i, &r)| (r, true, i)).collect();
    stops.extend(area_only.iter().enumerate().map(|(i, &r)| (r, false, i)));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r_max = stops.last().map(|s| s.0).unwrap_or(0.0);
    for &(r, _, _) in &stops {
        check_guard(metric, r)?;
    }
    let (n_max, error_estimate) = choose_step(metric, p, frame, grid, r_max, opts)?;
    let h = r_max / n_max as f64;

    let rhs = |y: &State| geodesic_rhs(metric, y);
    let per_node = |node: usize| -> Result<(Vec<NodeGeometry>, Vec<f64>, f64)> {
        let sin_theta = grid.sin_theta(node);
        let mut y = initial_state(p, frame, grid, node);
        let mut s = 0.0;
        let mut spheres = vec![None; full.len()];
        let mut dens = vec![0.0; area_only.len()];
        let mut lemma = 0.0f64;
        for &(t, is_full, slot) in &stops {
            let steps = (((t - s) / h).ceil() as usize).max(1);
            if t > s {
                let mut err = None;
                y = ode::integrate(&rhs, y, t - s, steps, |_, ys| {
                    if err.is_some() {
                        return;
                    }
                    let x = slice3(ys, 0);
                    match metric_at(metric, x) {
                        Ok(g) => {
                            let v = slice3(ys, 3);
                            lemma = lemma.max((inner(&g, &v, &v) - 1.0).abs());
                        }
                        Err(e) => err = Some(e.to_string()),
                    }
                })
                .map_err(|reason| Error::Ode { node, radius: t, reason })?;
                if let Some(reason) = err {
                    return Err(Error::Ode { node, radius: t, reason });
                }
                s = t;
            }
            let x = slice3(&y, 0);
            let v = slice3(&y, 3);
            let jt = [slice3(&y, 6), slice3(&y, 12)];
            if is_full {
                let pc = riemann_at(metric, x).map_err(|e| Error::Ode { node, radius: t, reason: e.to_string() })?;
                let g = &pc.metric;
                let djt = [slice3(&y, 9), slice3(&y, 15)];
                // ∇_r J = J′ + Γ(v, J); A(J_a, J_b) = g(∇_r J_a, J_b).
                let cov: [[f64; 3]; 2] = std::array::from_fn(|a| {
                    let turn = contract_gamma(&pc.christoffel, &v, &jt[a]);
                    std::array::from_fn(|k| djt[a][k] + turn[k])
                });
                let a = [
                    inner(g, &cov[0], &jt[0]),
                    0.5 * (inner(g, &cov[0], &jt[1]) + inner(g, &cov[1], &jt[0])),
                    inner(g, &cov[1], &jt[1]),
                ];
                let (mean, gauss, density, hm) = shape(g, &pc.riemann, &jt, a, sin_theta)
                    .ok_or(Error::ConjugatePoint { node, radius: t })?;
                let speed = inner(g, &v, &v).sqrt();
                spheres[slot] = Some(NodeGeometry {
                    position: x,
                    tangents: jt,
                    normal: v.map(|c| c / speed),
                    h: hm,
                    a,
                    mean,
                    gauss,
                    density,
                });
            } else {
                let g = metric_at(metric, x).map_err(|e| Error::Ode { node, radius: t, reason: e.to_string() })?;
                let hm = [inner(&g, &jt[0], &jt[0]), inner(&g, &jt[0], &jt[1]), inner(&g, &jt[1], &jt[1])];
                let det = det2(&hm);
                if !(det > 0.0) {
                    return Err(Error::ConjugatePoint { node, radius: t });
                }
                dens[slot] = det.sqrt() / sin_theta;
            }
        }
        Ok((spheres.into_iter().map(|s| s.expect("every full stop visited")).collect(), dens, lemma))
    };
    let nodes: Vec<(Vec<NodeGeometry>, Vec<f64>, f64)> =
        (0..grid.len()).into_par_iter().map(per_node).collect::<Result<_>>()?;

    let spheres = (0..full.len()).map(|k| nodes.iter().map(|n| n.0[k]).collect()).collect();
    let densities = (0..area_only.len()).map(|k| nodes.iter().map(|n| n.1[k]).collect()).collect();
    let gauss_lemma_defect = nodes.iter().map(|n| n.2).fold(0.0, f64::max);
    Ok(Traced { spheres, densities, steps_per_length: n_max as f64 / r_max, error_estimate, gauss_lemma_defect })
}

fn assemble(
    kind: SurfaceKind,
    radius: f64,
    center: [f64; 3],
    frame: Mat3,
    grid: Arc<SphereGrid>,
    nodes: Vec<NodeGeometry>,
    euclidean: Option<Vec<f64>>,
    mut diagnostics: SurfaceDiagnostics,
) -> SurfaceGeometry {
    let mut s = SurfaceGeometry {
        kind,
        radius,
        center,
        grid,
        frame,
        positions: nodes.iter().map(|n| n.position).collect(),
        tangents: nodes.iter().map(|n| n.tangents).collect(),
        normals: nodes.iter().map(|n| n.normal).collect(),
        induced_metric: nodes.iter().map(|n| n.h).collect(),
        second_fundamental: nodes.iter().map(|n| n.a).collect(),
        mean_curvature: nodes.iter().map(|n| n.mean).collect(),
        gauss_curvature: nodes.iter().map(|n| n.gauss).collect(),
        area_element: nodes.iter().map(|n| n.density).collect(),
        euclidean_area_element: euclidean,
        diagnostics: SurfaceDiagnostics::default(),
    };
    let total_k = integrate_scalar(&s, &s.gauss_curvature, Measure::Induced).expect("own grid");
    diagnostics.gauss_bonnet_defect = (total_k / (4.0 * std::f64::consts::PI) - 1.0).abs();
    s.diagnostics = diagnostics;
    s
}

/// Geodesic sphere of radius `r` about `p`.
pub fn geodesic_sphere(
    metric: &dyn MetricField,
    p: [f64; 3],
    r: f64,
    grid: Arc<SphereGrid>,
    opts: &GeodesicOptions,
) -> Result<SurfaceGeometry> {
    Ok(geodesic_spheres(metric, p, &[r], grid, opts)?.pop().expect("one radius"))
}

/// Geodesic spheres about `p` for several radii from a single sweep of
/// geodesics.
pub fn geodesic_spheres(
    metric: &dyn MetricField,
    p: [f64; 3],
    radii: &[f64],
    grid: Arc<SphereGrid>,
    opts: &GeodesicOptions,
) -> Result<Vec<SurfaceGeometry>> {
    Ok(geodesic_ladder(metric, p, radii, grid, 0, opts)?.spheres)
}

/// Geodesic spheres together with the volumes of the balls they bound.
#[derive(Clone, Debug)]
pub struct GeodesicLadder {
    pub spheres: Vec<SurfaceGeometry>,
    /// `V(r)` per radius; empty when no radial nodes were requested.
    pub volumes: Vec<f64>,
}

/// Geodesic spheres and, when `n_radial > 0`, ball volumes
/// `V(r) = ∫₀^r 𝒜(t) dt` by `n_radial`-point Gauss–Legendre in `t`.
pub fn geodesic_ladder(
    metric: &dyn MetricField,
    p: [f64; 3],
    radii: &[f64],
    grid: Arc<SphereGrid>,
    n_radial: usize,
    opts: &GeodesicOptions,
) -> Result<GeodesicLadder> {
    if radii.is_empty() {
        return Ok(GeodesicLadder { spheres: Vec::new(), volumes: Vec::new() });
    }
    let frame = geodesic_frame(metric, p)?;
    let mut area_radii = Vec::new();
    let mut area_weights = Vec::new();
    if n_radial > 0 {
        for &r in radii {
            let (t, w) = gl_volume_nodes(r, n_radial);
            area_radii.extend(t);
            area_weights.push(w);
        }
    }
    let traced = trace_family(metric, p, &frame, &grid, radii, &area_radii, opts)?;
    let diagnostics = SurfaceDiagnostics {
        ode_steps: traced.steps_per_length.ceil() as usize,
        step_error_estimate: traced.error_estimate,
        gauss_lemma_defect: traced.gauss_lemma_defect,
        gauss_bonnet_defect: 0.0,
    };
    let volumes = area_weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let terms: Vec<f64> =
                (0..n_radial).map(|j| w[j] * grid.integrate(&traced.densities[k * n_radial + j])).collect();
            pairwise_sum(&terms)
        })
        .collect();
    let spheres = traced
        .spheres
        .into_iter()
        .zip(radii)
        .map(|(nodes, &r)| {
            assemble(SurfaceKind::Geodesic, r, p, frame, grid.clone(), nodes, None, diagnostics.clone())
        })
        .collect();
    Ok(GeodesicLadder { spheres, volumes })
}

/// Volume of the geodesic ball of radius `r` about `p`.
pub fn ball_volume(
    metric: &dyn MetricField,
    p: [f64; 3],
    r: f64,
    grid: Arc<SphereGrid>,
    n_radial: usize,
    opts: &GeodesicOptions,
) -> Result<f64> {
    if n_radial == 0 {
        return Err(Error::InvalidParameter("ball volume needs at least one radial node".into()));
    }
    Ok(geodesic_ladder(metric, p, &[r], grid, n_radial, opts)?.volumes[0])
}

/// Coordinate sphere `|x| = r` of an asymptotically flat chart.
pub fn coordinate_sphere(metric: &dyn MetricField, r: f64, grid: Arc<SphereGrid>) -> Result<SurfaceGeometry> {
    if metric.af_order().is_none() {
        return Err(Error::NotAsymptoticallyFlat(metric.name()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {r}")));
    }
    let per_node = |node: usize| -> Result<NodeGeometry> {
        let f = grid.frame(node);
        let x = f.d.map(|c| r * c);
        let pc = riemann_at(metric, x)?;
        let g = &pc.metric;
        let ginv = inverse3(g);
        // The level-set covector of |x| is the Euclidean direction.
        let up = matvec3(&ginv, &f.d);
        let norm = dot3(&f.d, &up).sqrt();
        let normal = up.map(|c| c / norm);
        let lower = f.d.map(|c| c / norm);
        let t = [f.d_theta.map(|c| r * c), f.d_phi.map(|c| r * c)];
        let second = [f.d_theta_theta, f.d_theta_phi, f.d_phi_phi].map(|v| v.map(|c| r * c));
        let pairs = [(0, 0), (0, 1), (1, 1)];
        let a: [f64; 3] = std::array::from_fn(|q| {
            let (i, j) = pairs[q];
            let gam = contract_gamma(&pc.christoffel, &t[i], &t[j]);
            -(0..3).map(|k| lower[k] * (second[q][k] + gam[k])).sum::<f64>()
        });
        let (mean, gauss, density, h) =
            shape(g, &pc.riemann, &t, a, grid.sin_theta(node))
                .ok_or(Error::ConjugatePoint { node, radius: r })?;
        Ok(NodeGeometry { position: x, tangents: t, normal, h, a, mean, gauss, density })
    };
    let nodes: Vec<NodeGeometry> = (0..grid.len()).into_par_iter().map(per_node).collect::<Result<_>>()?;
    let euclidean = vec![r * r; nodes.len()];
    Ok(assemble(
        SurfaceKind::Coordinate,
        r,
        [0.0; 3],
        IDENTITY,
        grid,
        nodes,
        Some(euclidean),
        SurfaceDiagnostics::default(),
    ))
}

/// Radial quadrature segments on `[0, r]`, split at the metric's
/// breakpoints; long exterior segments use the substitution `ρ = eˢ`.
fn radial_rule(r: f64, breakpoints: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0];
    cuts.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < r));
    cuts.push(r);
    let mut nodes = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a > 0.0 && b / a > 2.0 {
            let pieces = ((b / a).ln() / 10f64.ln()).ceil().max(1.0) as usize;
            let (la, lb) = (a.ln(), b.ln());
            for k in 0..pieces {
                let s0 = la + (lb - la) * k as f64 / pieces as f64;
                let s1 = la + (lb - la) * (k + 1) as f64 / pieces as f64;
                let (s, w) = gauss_legendre_interval(n, s0, s1);
                nodes.extend(s.iter().zip(&w).map(|(s, w)| (s.exp(), w * s.exp())));
            }
        } else {
            let (t, w) = gauss_legendre_interval(n, a, b);
            nodes.extend(t.into_iter().zip(w));
        }
    }
    nodes
}

/// Volume of the chart region `|x| < r`: `∫ √det g` by radial
/// Gauss–Legendre segments times the angular grid.
pub fn coordinate_region_volume(metric: &dyn MetricField, r: f64, grid: &SphereGrid, n_radial: usize) -> Result<f64> {
    if metric.domain() != ChartDomain::Everywhere {
        return Err(Error::InvalidParameter(format!(
            "{} does not cover the interior of the coordinate sphere; use a capped entry",
            metric.name()
        )));
    }
    if !(r > 0.0) || n_radial == 0 {
        return Err(Error::InvalidParameter("region volume needs r > 0 and radial nodes".into()));
    }
    let rule = radial_rule(r, &metric.radial_breakpoints(), n_radial);
    let shells: Vec<f64> = rule
        .par_iter()
        .map(|&(rho, w)| -> Result<f64> {
            let dens: Vec<f64> = (0..grid.len())
                .map(|i| {
                    let x = grid.direction(i).map(|c| rho * c);
                    metric_at(metric, x).map(|g| crate::linalg::det3(&g).sqrt())
                })
                .collect::<Result<_>>()?;
            Ok(w * rho * rho * grid.integrate(&dens))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&shells))
}
