//! Curvature of a chart metric from its Taylor jets.
//!
//! Sign conventions: `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`,
//! `R_abcd = g_ae R^e_bcd`, `Ric_bd = R^a_bad`. With these, the unit round
//! 3-sphere has `R_1212 = 1`, `Ric = 2g` and scalar curvature 6.

use serde::Serialize;

use crate::error::Result;
use crate::jet::Jet;
use crate::linalg::{relative_eigenvalues, Mat3};
use crate::metric::{jet_eval, MetricField, MetricJet};

pub type Christoffel = [[[f64; 3]; 3]; 3];
pub type Riemann = [[[[f64; 3]; 3]; 3]; 3];

type JetMat = [[Jet; 3]; 3];
type JetGamma = [[[Jet; 3]; 3]; 3];
type JetRiemann = [[[[Jet; 3]; 3]; 3]; 3];

/// Pointwise curvature package.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureData {
    pub point: [f64; 3],
    pub metric: Mat3,
    pub inverse_metric: Mat3,
    /// `christoffel[k][i][j] = Γ^k_ij`.
    pub christoffel: Christoffel,
    /// All-lower `R_ijkl`.
    pub riemann: Riemann,
    pub ricci: Mat3,
    /// Eigenvalues of Ric relative to g, descending.
    pub ricci_eigenvalues: [f64; 3],
    pub scalar: f64,
    pub ricci_norm_sq: f64,
    /// `∂_i R`.
    pub grad_scalar: [f64; 3],
    pub laplacian_scalar: f64,
    /// `ricci_derivative[i][j][k] = R_ij;k`.
    pub ricci_derivative: [[[f64; 3]; 3]; 3],
}

fn inverse_jets(g: &MetricJet) -> JetMat {
    let m = |i: usize, j: usize| *g.get(i, j);
    let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(1, 2))
        - m(0, 1) * (m(0, 1) * m(2, 2) - m(1, 2) * m(0, 2))
        + m(0, 2) * (m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2));
    let inv_det = det.recip();
    let mut out = [[m(0, 0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            let cof = m(a, c) * m(b, e) - m(a, e) * m(b, c);
            out[i][j] = cof * inv_det;
            out[j][i] = out[i][j];
        }
    }
    out
}

/// Christoffel symbol jets `Γ^k_ij`, one order below the metric jets.
fn christoffel_jets(g: &MetricJet, ginv: &JetMat) -> JetGamma {
    let order = g.order() - 1;
    let dg: [[[Jet; 3]; 3]; 3] =
        std::array::from_fn(|l| std::array::from_fn(|i| std::array::from_fn(|j| g.get(i, j).d(l))));
    let ginv: JetMat = std::array::from_fn(|a| std::array::from_fn(|b| ginv[a][b].truncate(order)));
    // Lowered symbols Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij).
    let mut lower = [[[Jet::constant(0.0, order); 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let v = (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]) * 0.5;
                lower[l][i][j] = v;
                lower[l][j][i] = v;
            }
        }
    }
    let mut gamma = [[[Jet::constant(0.0, order); 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut s = ginv[k][0] * lower[0][i][j];
                s += ginv[k][1] * lower[1][i][j];
                s += ginv[k][2] * lower[2][i][j];
                gamma[k][i][j] = s;
                gamma[k][j][i] = s;
            }
        }
    }
    gamma
}

/// All-lower Riemann jets, one order below the Christoffel jets.
fn riemann_jets(g: &MetricJet, gamma: &JetGamma) -> JetRiemann {
    let order = gamma[0][0][0].order() - 1;
    let gam: JetGamma = std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|c| gamma[a][b][c].truncate(order)))
    });
    let zero = Jet::constant(0.0, order);
    let mut up = [[[[zero; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in (c + 1)..3 {
                    let mut v = gamma[a][d][b].d(c) - gamma[a][c][b].d(d);
                    for e in 0..3 {
                        v += gam[a][c][e] * gam[e][d][b];
                        v -= gam[a][d][e] * gam[e][c][b];
                    }
                    up[a][b][c][d] = v;
                    up[a][b][d][c] = -v;
                }
            }
        }
    }
    let gl: JetMat = std::array::from_fn(|i| std::array::from_fn(|j| g.get(i, j).truncate(order)));
    let mut low = [[[[zero; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in (c + 1)..3 {
                    let mut v = gl[a][0] * up[0][b][c][d];
                    v += gl[a][1] * up[1][b][c][d];
                    v += gl[a][2] * up[2][b][c][d];
                    low[a][b][c][d] = v;
                    low[a][b][d][c] = -v;
                }
            }
        }
    }
    low
}

fn jet_values3(m: &JetMat) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].value()))
}

/// Metric, Christoffel symbols and their first partials at `x`; this is all
/// the geodesic and Jacobi equations need.
#[derive(Clone, Copy, Debug)]
pub struct Connection {
    pub metric: Mat3,
    pub christoffel: Christoffel,
    /// `d_christoffel[m][k][i][j] = ∂_m Γ^k_ij`.
    pub d_christoffel: [Christoffel; 3],
}

pub fn connection_at(metric: &dyn MetricField, x: [f64; 3]) -> Result<Connection> {
    let g = jet_eval(metric, x, 2)?;
    let ginv = inverse_jets(&g);
    let gamma = christoffel_jets(&g, &ginv);
    let mut christoffel = [[[0.0; 3]; 3]; 3];
    let mut d_christoffel = [[[[0.0; 3]; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let jet = &gamma[k][i][j];
                christoffel[k][i][j] = jet.value();
                let grad = jet.gradient();
                for m in 0..3 {
                    d_christoffel[m][k][i][j] = grad[m];
                }
            }
        }
    }
    Ok(Connection { metric: g.value(), christoffel, d_christoffel })
}

/// Metric, Christoffel symbols and all-lower Riemann tensor at `x` from
/// second-order jets; enough for the extrinsic geometry of a surface.
#[derive(Clone, Copy, Debug)]
pub struct PointCurvature {
    pub metric: Mat3,
    pub christoffel: Christoffel,
    pub riemann: Riemann,
}

pub fn riemann_at(metric: &dyn MetricField, x: [f64; 3]) -> Result<PointCurvature> {
    let g = jet_eval(metric, x, 2)?;
    let ginv = inverse_jets(&g);
    let gamma = christoffel_jets(&g, &ginv);
    let riem = riemann_jets(&g, &gamma);
    let riemann = std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|c| std::array::from_fn(|d| riem[a][b][c][d].value())))
    });
    let christoffel =
        std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| gamma[k][i][j].value())));
    Ok(PointCurvature { metric: g.value(), christoffel, riemann })
}

/// Full curvature package at `x` from fourth-order metric jets.
pub fn curvature_at(metric: &dyn MetricField, x: [f64; 3]) -> Result<CurvatureData> {
    let g = jet_eval(metric, x, 4)?;
    let ginv = inverse_jets(&g);
    let gamma = christoffel_jets(&g, &ginv);
    let riem = riemann_jets(&g, &gamma);
    let order = riem[0][0][0][0].order();
    let ginv2: JetMat = std::array::from_fn(|a| std::array::from_fn(|b| ginv[a][b].truncate(order)));

    let zero = Jet::constant(0.0, order);
    let mut ric = [[zero; 3]; 3];
    for b in 0..3 {
        for d in b..3 {
            let mut v = zero;
            for a in 0..3 {
                for c in 0..3 {
                    v += ginv2[a][c] * riem[a][b][c][d];
                }
            }
            ric[b][d] = v;
            ric[d][b] = v;
        }
    }
    let mut scalar = zero;
    for b in 0..3 {
        for d in 0..3 {
            scalar += ginv2[b][d] * ric[b][d];
        }
    }

    let metric = g.value();
    let inverse_metric = jet_values3(&ginv);
    let christoffel: Christoffel =
        std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| gamma[k][i][j].value())));
    let riemann: Riemann = std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|c| std::array::from_fn(|d| riem[a][b][c][d].value())))
    });
    let ricci = jet_values3(&ric);
    let r = scalar.value();

    let mut ricci_norm_sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    ricci_norm_sq += inverse_metric[i][a] * inverse_metric[j][b] * ricci[i][j] * ricci[a][b];
                }
            }
        }
    }

    let grad_scalar = scalar.gradient();
    let mut laplacian_scalar = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut alpha = [0usize; 3];
            alpha[i] += 1;
            alpha[j] += 1;
            let hess = scalar.partial(alpha)
                - (0..3).map(|k| christoffel[k][i][j] * grad_scalar[k]).sum::<f64>();
            laplacian_scalar += inverse_metric[i][j] * hess;
        }
    }

    let mut ricci_derivative = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        let grads: [[f64; 3]; 3] = std::array::from_fn(|j| ric[i][j].gradient());
        for j in 0..3 {
            for k in 0..3 {
                let mut v = grads[j][k];
                for m in 0..3 {
                    v -= christoffel[m][k][i] * ricci[m][j] + christoffel[m][k][j] * ricci[i][m];
                }
                ricci_derivative[i][j][k] = v;
            }
        }
    }

    let ricci_eigenvalues = relative_eigenvalues(&ricci, &metric).unwrap_or([f64::NAN; 3]);

    Ok(CurvatureData {
        point: x,
        metric,
        inverse_metric,
        christoffel,
        riemann,
        ricci,
        ricci_eigenvalues,
        scalar: r,
        ricci_norm_sq,
        grad_scalar,
        laplacian_scalar,
        ricci_derivative,
    })
}

/// Three-dimensional Riemann tensor rebuilt from the metric and Ricci tensor:
/// `g_ik R_jl − g_il R_jk − g_jk R_il + g_jl R_ik − ½R(g_ik g_jl − g_il g_jk)`.
pub fn riemann_from_ricci(g: &Mat3, ric: &Mat3, scalar: f64) -> Riemann {
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[i][j][k][l] = g[i][k] * ric[j][l] - g[i][l] * ric[j][k] - g[j][k] * ric[i][l]
                        + g[j][l] * ric[i][k]
                        - 0.5 * scalar * (g[i][k] * g[j][l] - g[i][l] * g[j][k]);
                }
            }
        }
    }
    out
}

/// Largest absolute component.
pub fn riemann_max_abs(r: &Riemann) -> f64 {
    r.iter().flatten().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Max violation of the pair symmetries and the first Bianchi identity.
pub fn riemann_symmetry_residual(r: &Riemann) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = r[i][j][k][l];
                    worst = worst
                        .max((v + r[j][i][k][l]).abs())
                        .max((v + r[i][j][l][k]).abs())
                        .max((v - r[k][l][i][j]).abs())
                        .max((v + r[i][k][l][j] + r[i][l][j][k]).abs());
                }
            }
        }
    }
    worst
}

/// Max componentwise difference between two Riemann tensors.
pub fn riemann_difference(a: &Riemann, b: &Riemann) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    worst = worst.max((a[i][j][k][l] - b[i][j][k][l]).abs());
                }
            }
        }
    }
    worst
}

/// `max_j |g^{ik} R_ij;k − ½ ∂_j R|`.
pub fn contracted_bianchi_residual(c: &CurvatureData) -> f64 {
    (0..3)
        .map(|j| {
            let mut div = 0.0;
            for i in 0..3 {
                for k in 0..3 {
                    div += c.inverse_metric[i][k] * c.ricci_derivative[i][j][k];
                }
            }
            (div - 0.5 * c.grad_scalar[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Sectional-curvature numerator `R(u, v, u, v)`.
pub fn riemann_quad(r: &Riemann, u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    s += r[i][j][k][l] * u[i] * v[j] * u[k] * v[l];
                }
            }
        }
    }
    s
}
