//! Gauss–Legendre × uniform-φ quadrature on the unit sphere and real
//! spherical harmonics with their angular derivatives.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// nodes in descending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().rev().map(|t| mid + half * t).collect(), w.iter().rev().map(|v| v * half).collect())
}

/// Unit direction and its angular derivatives at one node.
#[derive(Clone, Copy, Debug)]
pub struct DirectionFrame {
    pub d: [f64; 3],
    pub d_theta: [f64; 3],
    pub d_phi: [f64; 3],
    pub d_theta_theta: [f64; 3],
    pub d_theta_phi: [f64; 3],
    pub d_phi_phi: [f64; 3],
}

/// Product grid: Gauss–Legendre in `cos θ`, uniform in `φ`. Poles are never
/// nodes. Node `i` is `(i / n_phi, i % n_phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Solid-angle weights per node; they sum to 4π.
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 3 {
            return Err(Error::InvalidParameter(format!(
                "sphere grid needs n_theta ≥ 2 and n_phi ≥ 3, got {n_theta}×{n_phi}"
            )));
        }
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for wt in &w {
            for _ in 0..n_phi {
                weights.push(wt * dphi);
            }
        }
        Ok(Self { n_theta, n_phi, theta, phi, weights })
    }

    /// Grid sized for spherical harmonics up to `degree`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(2 * degree + 2, 4 * degree + 4).expect("valid grid")
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn angles(&self, node: usize) -> (f64, f64) {
        (self.theta[node / self.n_phi], self.phi[node % self.n_phi])
    }

    pub fn sin_theta(&self, node: usize) -> f64 {
        self.angles(node).0.sin()
    }

    pub fn frame(&self, node: usize) -> DirectionFrame {
        let (t, p) = self.angles(node);
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        DirectionFrame {
            d: [st * cp, st * sp, ct],
            d_theta: [ct * cp, ct * sp, -st],
            d_phi: [-st * sp, st * cp, 0.0],
            d_theta_theta: [-st * cp, -st * sp, -ct],
            d_theta_phi: [-ct * sp, ct * cp, 0.0],
            d_phi_phi: [-st * cp, -st * sp, 0.0],
        }
    }

    pub fn direction(&self, node: usize) -> [f64; 3] {
        self.frame(node).d
    }

    /// `Σ w_i f_i` with a fixed summation tree.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = self.weights.iter().zip(values).map(|(w, f)| w * f).collect();
        pairwise_sum(&terms)
    }
}

/// Number of real harmonics of degree ≤ `degree`.
pub fn harmonic_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Slot of `Y_lm`, `−l ≤ m ≤ l`.
pub fn harmonic_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Value with first and second derivative in one variable.
#[derive(Clone, Copy, Debug)]
struct D2(f64, f64, f64);

impl D2 {
    fn mul(self, o: D2) -> D2 {
        D2(self.0 * o.0, self.1 * o.0 + self.0 * o.1, self.2 * o.0 + 2.0 * self.1 * o.1 + self.0 * o.2)
    }
    fn scale(self, s: f64) -> D2 {
        D2(self.0 * s, self.1 * s, self.2 * s)
    }
    fn sub(self, o: D2) -> D2 {
        D2(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }
}

/// Orthonormal real spherical harmonics `Y_lm(θ, φ)` for `l ≤ degree` with
/// derivatives `[Y, Y_θ, Y_φ, Y_θθ, Y_θφ, Y_φφ]`, slot order of
/// [`harmonic_index`].
pub fn real_harmonics(degree: usize, theta: f64, phi: f64) -> Vec<[f64; 6]> {
    let (st, ct) = theta.sin_cos();
    let x = D2(ct, -st, -ct);
    let s = D2(st, ct, -st);
    // Normalized associated Legendre functions as functions of θ.
    let mut p = vec![vec![D2(0.0, 0.0, 0.0); degree + 1]; degree + 1]; // p[m][l]
    let mut pmm = D2(1.0 / (4.0 * PI).sqrt(), 0.0, 0.0);
    for m in 0..=degree {
        if m > 0 {
            pmm = s.mul(pmm).scale(-((2 * m + 1) as f64 / (2 * m) as f64).sqrt());
        }
        p[m][m] = pmm;
        if m < degree {
            p[m][m + 1] = x.mul(pmm).scale(((2 * m + 3) as f64).sqrt());
        }
        for l in (m + 2)..=degree {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[m][l] = x.mul(p[m][l - 1]).sub(p[m][l - 2].scale(b)).scale(a);
        }
    }
    let mut out = vec![[0.0; 6]; harmonic_count(degree)];
    let sqrt2 = 2f64.sqrt();
    for l in 0..=degree {
        let q = p[0][l];
        out[harmonic_index(l, 0)] = [q.0, q.1, 0.0, q.2, 0.0, 0.0];
        for m in 1..=l {
            let q = p[m][l].scale(sqrt2);
            let mf = m as f64;
            let (sm, cm) = (mf * phi).sin_cos();
            // cos(mφ) for +m, sin(mφ) for −m
            out[harmonic_index(l, m as i64)] =
                [q.0 * cm, q.1 * cm, -mf * q.0 * sm, q.2 * cm, -mf * q.1 * sm, -mf * mf * q.0 * cm];
            out[harmonic_index(l, -(m as i64))] =
                [q.0 * sm, q.1 * sm, mf * q.0 * cm, q.2 * sm, mf * q.1 * cm, -mf * mf * q.0 * sm];
        }
    }
    out
}
