//! Numerical Weyl embedding: a Euclidean surface whose induced metric
//! matches a sampled sphere metric, with its extrinsic data.
//!
//! The unknowns are the real spherical-harmonic coefficients (degrees
//! `1..=L`) of the three Cartesian components. Dropping degree 0 fixes the
//! translation; rotations are left to the damping and the initial guess.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{harmonic_count, real_harmonics, SphereGrid};
use crate::linalg::{cross3, dot3, matvec3, pairwise_sum, Mat3};
use crate::sphere::SurfaceGeometry;

/// Starting surface for the Newton iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialGuess {
    /// Round sphere of the target's areal radius.
    Round,
    /// Small-sphere support function `r + (r³/6)(R/2 − 2 Ric(v, v))` along
    /// each geodesic direction `v`; `ricci` holds chart components at the
    /// center.
    NormalCoordinates { scalar: f64, ricci: Mat3 },
    /// The chart positions of the surface relative to its center.
    ChartPositions,
    /// Caller-provided positions, one per grid node.
    Supplied { positions: Vec<[f64; 3]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingOptions {
    /// Highest harmonic degree `L` (≥ 2).
    pub degree: usize,
    /// Stop when the sup-norm relative metric defect drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Tikhonov parameter relative to the mean diagonal of the normal equations.
    pub damping: f64,
    pub initial_guess: InitialGuess,
    /// Gauss-curvature gate: require `min K > gate_margin · max K`.
    pub gate_margin: f64,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            degree: 12,
            tolerance: 1e-10,
            max_iterations: 30,
            damping: 1e-10,
            initial_guess: InitialGuess::Round,
            gate_margin: 1e-3,
        }
    }
}

impl EmbeddingOptions {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.degree < 2 {
            errs.push(format!("embedding.degree: must be at least 2, got {}", self.degree));
        }
        if !(self.tolerance > 0.0) {
            errs.push(format!("embedding.tolerance: must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            errs.push("embedding.max_iterations: must be at least 1".into());
        }
        if !(self.damping >= 0.0) {
            errs.push(format!("embedding.damping: must be non-negative, got {}", self.damping));
        }
        if !(0.0..1.0).contains(&self.gate_margin) {
            errs.push(format!("embedding.gate_margin: must lie in [0, 1), got {}", self.gate_margin));
        }
        errs
    }
}

/// Euclidean image of a sampled sphere metric.
#[derive(Clone, Debug)]
pub struct EmbeddedSurface {
    pub grid: Arc<SphereGrid>,
    pub degree: usize,
    /// Cartesian coefficients per harmonic slot (degree-0 slot is zero).
    pub coefficients: Vec<[f64; 3]>,
    pub positions: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    /// Support function `X·n₀`.
    pub support: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    /// Gauss curvature of the embedded surface itself.
    pub gauss_curvature: Vec<f64>,
    /// Area density of the embedded surface (solid-angle weights).
    pub euclid_area_element: Vec<f64>,
    /// Intrinsic Gauss curvature and area density of the target metric.
    pub target_gauss_curvature: Vec<f64>,
    pub target_area_element: Vec<f64>,
    /// Sup-norm relative metric defect.
    pub residual: f64,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl EmbeddedSurface {
    fn integrate(&self, values: &[f64], density: &[f64]) -> f64 {
        let v: Vec<f64> = values.iter().zip(density).map(|(a, b)| a * b).collect();
        self.grid.integrate(&v)
    }

    /// `∫H₀ dΣ` with the target area element.
    pub fn total_mean_curvature(&self) -> f64 {
        self.integrate(&self.mean_curvature, &self.target_area_element)
    }

    pub fn area(&self) -> f64 {
        self.grid.integrate(&self.euclid_area_element)
    }
}

/// Positive Gauss curvature with a margin: `min K > margin · max K`.
pub fn gauss_curvature_gate(surface: &SurfaceGeometry, margin: f64) -> bool {
    let k = &surface.gauss_curvature;
    let max = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = k.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > margin * max
}

/// Candidate positions for the Newton iteration.
pub fn initial_guess(surface: &SurfaceGeometry, selector: &InitialGuess) -> Result<Vec<[f64; 3]>> {
    let grid = &surface.grid;
    match selector {
        InitialGuess::Round => {
            let rho = surface.areal_radius();
            Ok((0..grid.len()).map(|i| grid.direction(i).map(|c| rho * c)).collect())
        }
        InitialGuess::NormalCoordinates { scalar, ricci } => {
            if surface.kind != crate::sphere::SurfaceKind::Geodesic {
                return Err(Error::InvalidParameter(
                    "normal-coordinate initial guess needs a geodesic sphere".into(),
                ));
            }
            let r = surface.radius;
            Ok((0..grid.len())
                .map(|i| {
                    let d = grid.direction(i);
                    let v = matvec3(&surface.frame, &d);
                    let ric_vv = dot3(&v, &matvec3(ricci, &v));
                    let support = r + r.powi(3) / 6.0 * (0.5 * scalar - 2.0 * ric_vv);
                    d.map(|c| support * c)
                })
                .collect())
        }
        InitialGuess::ChartPositions => Ok(surface
            .positions
            .iter()
            .map(|x| std::array::from_fn(|k| x[k] - surface.center[k]))
            .collect()),
        InitialGuess::Supplied { positions } => {
            if positions.len() != grid.len() {
                return Err(Error::GridMismatch(positions.len(), grid.len()));
            }
            Ok(positions.clone())
        }
    }
}

/// Harmonic samples on the grid: `tables[q]` is `nodes × harmonics` for
/// `q ∈ {Y, Y_θ, Y_φ, Y_θθ, Y_θφ, Y_φφ}`, degree-0 column dropped.
struct Basis {
    tables: Vec<DMatrix<f64>>,
    degree: usize,
}

impl Basis {
    fn new(grid: &SphereGrid, degree: usize) -> Self {
        let n = grid.len();
        let m = harmonic_count(degree) - 1;
        let mut tables = vec![DMatrix::zeros(n, m); 6];
        for i in 0..n {
            let (t, p) = grid.angles(i);
            let y = real_harmonics(degree, t, p);
            for j in 0..m {
                for (q, table) in tables.iter_mut().enumerate() {
                    table[(i, j)] = y[j + 1][q];
                }
            }
        }
        Self { tables, degree }
    }

    fn columns(&self) -> usize {
        self.tables[0].ncols()
    }

    /// `nodes × 3` matrix of the chosen derivative of X.
    fn eval(&self, q: usize, c: &DMatrix<f64>) -> DMatrix<f64> {
        &self.tables[q] * c
    }
}

/// Scaled target metric components and quadrature weights per node.
struct Target {
    e: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    sin: Vec<f64>,
    sqrt_w: Vec<f64>,
}

fn residuals(basis: &Basis, target: &Target, c: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let xt = basis.eval(1, c);
    let xp = basis.eval(2, c);
    let n = target.e.len();
    let mut r = DVector::zeros(3 * n);
    let mut sup = 0.0f64;
    for i in 0..n {
        let row = |m: &DMatrix<f64>| [m[(i, 0)], m[(i, 1)], m[(i, 2)]];
        let (a, b) = (row(&xt), row(&xp));
        let s = target.sin[i];
        let de = dot3(&a, &a) - target.e[i];
        let df = (dot3(&a, &b) - target.f[i]) / s;
        let dg = (dot3(&b, &b) - target.g[i]) / (s * s);
        sup = sup.max(de.abs()).max(df.abs()).max(dg.abs());
        let w = target.sqrt_w[i];
        r[3 * i] = w * de;
        r[3 * i + 1] = w * std::f64::consts::SQRT_2 * df;
        r[3 * i + 2] = w * dg;
    }
    (r, sup)
}

fn jacobian(basis: &Basis, target: &Target, c: &DMatrix<f64>) -> DMatrix<f64> {
    let xt = basis.eval(1, c);
    let xp = basis.eval(2, c);
    let n = target.e.len();
    let m = basis.columns();
    let (yt, yp) = (&basis.tables[1], &basis.tables[2]);
    let mut jac = DMatrix::zeros(3 * n, 3 * m);
    for k in 0..3 {
        for j in 0..m {
            let mut col = jac.column_mut(k * m + j);
            for i in 0..n {
                let w = target.sqrt_w[i];
                let s = target.sin[i];
                let (at, ap) = (xt[(i, k)], xp[(i, k)]);
                let (bt, bp) = (yt[(i, j)], yp[(i, j)]);
                col[3 * i] = w * 2.0 * at * bt;
                col[3 * i + 1] = w * std::f64::consts::SQRT_2 * (at * bp + ap * bt) / s;
                col[3 * i + 2] = w * 2.0 * ap * bp / (s * s);
            }
        }
    }
    jac
}

/// Extrinsic data of the spectral surface `X = Σ c Y` (unscaled by `scale`).
fn finish(
    surface: &SurfaceGeometry,
    basis: &Basis,
    c: &DMatrix<f64>,
    scale: f64,
    residual: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> EmbeddedSurface {
    let grid = surface.grid.clone();
    let d: Vec<DMatrix<f64>> = (0..6).map(|q| basis.eval(q, c) * scale).collect();
    let n = grid.len();
    let mut out = EmbeddedSurface {
        grid: grid.clone(),
        degree: basis.degree,
        coefficients: vec![[0.0; 3]; basis.columns() + 1],
        positions: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        support: Vec::with_capacity(n),
        mean_curvature: Vec::with_capacity(n),
        gauss_curvature: Vec::with_capacity(n),
        euclid_area_element: Vec::with_capacity(n),
        target_gauss_curvature: surface.gauss_curvature.clone(),
        target_area_element: surface.area_element.clone(),
        residual,
        history,
        iterations,
        converged,
    };
    for j in 0..basis.columns() {
        out.coefficients[j + 1] = std::array::from_fn(|k| scale * c[(j, k)]);
    }
    for i in 0..n {
        let row = |q: usize| [d[q][(i, 0)], d[q][(i, 1)], d[q][(i, 2)]];
        let (x, xt, xp, xtt, xtp, xpp) = (row(0), row(1), row(2), row(3), row(4), row(5));
        let cr = cross3(&xt, &xp);
        let norm = dot3(&cr, &cr).sqrt();
        let nrm = cr.map(|v| v / norm);
        let (e, f, g) = (dot3(&xt, &xt), dot3(&xt, &xp), dot3(&xp, &xp));
        let (l, m, nn) = (dot3(&xtt, &nrm), dot3(&xtp, &nrm), dot3(&xpp, &nrm));
        let det = e * g - f * f;
        out.positions.push(x);
        out.normals.push(nrm);
        out.support.push(dot3(&x, &nrm));
        out.mean_curvature.push(-(e * nn - 2.0 * f * m + g * l) / det);
        out.gauss_curvature.push((l * nn - m * m) / det);
        out.euclid_area_element.push(norm / grid.sin_theta(i));
    }
    out
}

/// Solve for a Euclidean surface isometric to `surface`'s induced metric.
pub fn solve_embedding(surface: &SurfaceGeometry, opts: &EmbeddingOptions) -> Result<EmbeddedSurface> {
    if let Some(e) = opts.validate().into_iter().next() {
        return Err(Error::InvalidParameter(e));
    }
    if !gauss_curvature_gate(surface, opts.gate_margin) {
        let (node, min_k) = surface.min_gauss_curvature();
        let max_k = surface.gauss_curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::GaussCurvatureGate { node, min_k, max_k });
    }
    let grid = &surface.grid;
    if grid.n_theta < opts.degree + 1 || grid.n_phi < 2 * opts.degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "a {}×{} grid cannot resolve harmonics of degree {}",
            grid.n_theta, grid.n_phi, opts.degree
        )));
    }
    let n = grid.len();
    let scale = surface.areal_radius();
    let s2 = scale * scale;
    let target = Target {
        e: surface.induced_metric.iter().map(|h| h[0] / s2).collect(),
        f: surface.induced_metric.iter().map(|h| h[1] / s2).collect(),
        g: surface.induced_metric.iter().map(|h| h[2] / s2).collect(),
        sin: (0..n).map(|i| grid.sin_theta(i)).collect(),
        sqrt_w: grid.weights.iter().map(|w| w.sqrt()).collect(),
    };
    let basis = Basis::new(grid, opts.degree);
    let m = basis.columns();

    // Project the initial guess onto degrees 1..=L.
    let x0 = initial_guess(surface, &opts.initial_guess)?;
    let mut c = DMatrix::zeros(m, 3);
    for j in 0..m {
        for k in 0..3 {
            let v: Vec<f64> = (0..n).map(|i| grid.weights[i] * basis.tables[0][(i, j)] * x0[i][k] / scale).collect();
            c[(j, k)] = pairwise_sum(&v);
        }
    }

    let (mut r, mut sup) = residuals(&basis, &target, &c);
    let mut history = vec![sup];
    let mut iterations = 0;
    while sup > opts.tolerance && iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&basis, &target, &c);
        let mut normal = jac.tr_mul(&jac);
        let rhs = -jac.tr_mul(&r);
        let dim = normal.nrows();
        let mean_diag = normal.trace() / dim as f64;
        let mu = opts.damping * mean_diag;
        for i in 0..dim {
            normal[(i, i)] += mu;
        }
        let chol = normal.cholesky().ok_or(Error::EmbeddingRankDeficient)?;
        // Near-null pivots beyond the three rotations mean the target is
        // not locally rigid at this resolution.
        let l = chol.l_dirty();
        let tiny = (0..dim).filter(|&i| l[(i, i)] * l[(i, i)] < 1e-6 * mean_diag).count();
        if tiny > 3 {
            return Err(Error::EmbeddingRankDeficient);
        }
        let step = chol.solve(&rhs);
        let step = DMatrix::from_column_slice(m, 3, step.as_slice());
        let old = r.norm_squared();
        let mut alpha = 1.0;
        loop {
            let trial = &c + &step * alpha;
            let (tr, ts) = residuals(&basis, &target, &trial);
            if tr.norm_squared() <= old || alpha < 1e-6 {
                c = trial;
                r = tr;
                sup = ts;
                break;
            }
            alpha *= 0.5;
        }
        history.push(sup);
        if history.len() >= 3 {
            // Stagnation at the representable floor: further steps cannot help.
            let k = history.len();
            if history[k - 1] >= 0.999 * history[k - 2] && history[k - 2] >= 0.999 * history[k - 3] {
                break;
            }
        }
    }
    let converged = sup <= opts.tolerance;
    let es = finish(surface, &basis, &c, scale, sup, history.clone(), iterations, converged);
    if !converged {
        return Err(Error::EmbeddingNotConverged { iterations, residual: sup, history, surface: Box::new(es) });
    }
    let volume = enclosed_volume_unchecked(&es);
    if !(volume > 0.0) {
        return Err(Error::Orientation(volume));
    }
    Ok(es)
}

/// Minkowski-formula residuals
/// `|∫H₀ − 2∫K X·n₀| / ∫H₀` and `|2𝒜 − ∫H₀ X·n₀| / 2𝒜`,
/// with `K`, `dΣ` and `𝒜` taken from the target metric so the check also
/// detects an embedding whose metric is wrong.
pub fn minkowski_check(es: &EmbeddedSurface) -> (f64, f64) {
    let int_h0 = es.integrate(&es.mean_curvature, &es.target_area_element);
    let k_support: Vec<f64> = es.target_gauss_curvature.iter().zip(&es.support).map(|(k, s)| k * s).collect();
    let int_k_support = es.integrate(&k_support, &es.target_area_element);
    let h_support: Vec<f64> = es.mean_curvature.iter().zip(&es.support).map(|(h, s)| h * s).collect();
    let int_h_support = es.integrate(&h_support, &es.target_area_element);
    let area = es.grid.integrate(&es.target_area_element);
    (
        (int_h0 - 2.0 * int_k_support).abs() / int_h0.abs(),
        (2.0 * area - int_h_support).abs() / (2.0 * area),
    )
}

fn enclosed_volume_unchecked(es: &EmbeddedSurface) -> f64 {
    es.integrate(&es.support, &es.euclid_area_element) / 3.0
}

/// `V₀ = (1/3)∫X·n₀ dΣ` over the embedded surface.
pub fn enclosed_volume(es: &EmbeddedSurface) -> Result<f64> {
    let v = enclosed_volume_unchecked(es);
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Orientation(v))
    }
}

/// Rotate a set of positions; used to test rigid-motion invariance.
pub fn rotate(positions: &[[f64; 3]], rotation: &Mat3) -> Vec<[f64; 3]> {
    positions.iter().map(|x| matvec3(rotation, x)).collect()
}

/// Rotation about the unit `axis` by `angle`.
pub fn rotation(axis: [f64; 3], angle: f64) -> Mat3 {
    let n = dot3(&axis, &axis).sqrt();
    let [x, y, z] = axis.map(|c| c / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Volume of a round ball, for reference checks.
pub fn round_volume(radius: f64) -> f64 {
    4.0 * PI * radius.powi(3) / 3.0
}
