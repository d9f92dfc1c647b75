//! Polynomial metrics `δ + quadratic + cubic + quartic` around the chart origin.

use crate::curvature::riemann_from_ricci;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::Mat3;
use crate::metric::{sym_index, ChartDomain, MetricField};

/// Coefficient tensors, row-major flattened: `quadratic[i][j][k][l]`
/// multiplies `x^k x^l` in `g_ij`, and likewise for the cubic (5 indices)
/// and quartic (6 indices) tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalFormCoefficients {
    pub quadratic: Vec<f64>,
    pub cubic: Vec<f64>,
    pub quartic: Vec<f64>,
}

impl NormalFormCoefficients {
    pub fn zero() -> Self {
        Self { quadratic: vec![0.0; 81], cubic: vec![0.0; 243], quartic: vec![0.0; 729] }
    }

    fn check(&self) -> Result<()> {
        for (name, t, n) in [
            ("quadratic", &self.quadratic, 81usize),
            ("cubic", &self.cubic, 243),
            ("quartic", &self.quartic, 729),
        ] {
            if t.len() != n {
                return Err(Error::InvalidParameter(format!("{name} tensor needs {n} entries, got {}", t.len())));
            }
            let inner = n / 9;
            for i in 0..3 {
                for j in 0..3 {
                    for m in 0..inner {
                        let a = t[(i * 3 + j) * inner + m];
                        let b = t[(j * 3 + i) * inner + m];
                        if (a - b).abs() > 1e-14 * (1.0 + a.abs()) {
                            return Err(Error::InvalidParameter(format!(
                                "{name} tensor not symmetric in the metric index pair ({i},{j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Polynomial metric stored as sparse monomials per component.
#[derive(Clone, Debug)]
pub struct NormalForm {
    /// (exponents, coefficient) per component.
    terms: [Vec<([usize; 3], f64)>; 6],
    pub ball_radius: f64,
    pub coefficients: NormalFormCoefficients,
}

fn monomial_exponents(indices: &[usize]) -> [usize; 3] {
    let mut e = [0; 3];
    for &k in indices {
        e[k] += 1;
    }
    e
}

impl NormalForm {
    /// Builds the metric without checking positive definiteness.
    pub fn new(coefficients: NormalFormCoefficients, ball_radius: f64) -> Result<Self> {
        coefficients.check()?;
        let mut terms: [Vec<([usize; 3], f64)>; 6] = Default::default();
        for i in 0..3 {
            for j in i..3 {
                let slot = sym_index(i, j);
                let mut acc: Vec<([usize; 3], f64)> = Vec::new();
                let mut push = |e: [usize; 3], c: f64| {
                    if c == 0.0 {
                        return;
                    }
                    match acc.iter_mut().find(|(ee, _)| *ee == e) {
                        Some(t) => t.1 += c,
                        None => acc.push((e, c)),
                    }
                };
                for k in 0..3 {
                    for l in 0..3 {
                        push(
                            monomial_exponents(&[k, l]),
                            coefficients.quadratic[((i * 3 + j) * 3 + k) * 3 + l],
                        );
                        for m in 0..3 {
                            push(
                                monomial_exponents(&[k, l, m]),
                                coefficients.cubic[(((i * 3 + j) * 3 + k) * 3 + l) * 3 + m],
                            );
                            for n in 0..3 {
                                push(
                                    monomial_exponents(&[k, l, m, n]),
                                    coefficients.quartic[((((i * 3 + j) * 3 + k) * 3 + l) * 3 + m) * 3 + n],
                                );
                            }
                        }
                    }
                }
                acc.retain(|t| t.1 != 0.0);
                terms[slot] = acc;
            }
        }
        Ok(Self { terms, ball_radius, coefficients })
    }

    /// Quadratic coefficients `(1/3)·R_iklj` (symmetrized in `k, l`) for the
    /// 3D curvature tensor with the given Ricci tensor at the origin.
    pub fn quadratic_from_ricci(ricci: &Mat3) -> Vec<f64> {
        let scalar = ricci[0][0] + ricci[1][1] + ricci[2][2];
        let riem = riemann_from_ricci(&crate::linalg::IDENTITY, ricci, scalar);
        let mut q = vec![0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        q[((i * 3 + j) * 3 + k) * 3 + l] = (riem[i][k][l][j] + riem[i][l][k][j]) / 6.0;
                    }
                }
            }
        }
        q
    }

    /// Quartic tensor for `scale·|x|⁴·δ_ij`.
    pub fn conformal_quartic(scale: f64) -> Vec<f64> {
        let mut q = vec![0.0; 729];
        for i in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    q[((((i * 3 + i) * 3 + k) * 3 + k) * 3 + m) * 3 + m] = scale;
                }
            }
        }
        q
    }
}

impl MetricField for NormalForm {
    fn name(&self) -> String {
        format!("normal_form(ball={})", self.ball_radius)
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        let order = x[0].order();
        let one = Jet::constant(1.0, order);
        let powers: [[Jet; 5]; 3] = std::array::from_fn(|v| {
            let mut p = [one; 5];
            for n in 1..5 {
                p[n] = p[n - 1] * x[v];
            }
            p
        });
        std::array::from_fn(|slot| {
            let diag = matches!(slot, 0 | 3 | 5);
            let mut acc = Jet::constant(if diag { 1.0 } else { 0.0 }, order);
            for (e, c) in &self.terms[slot] {
                acc += powers[0][e[0]] * powers[1][e[1]] * powers[2][e[2]] * *c;
            }
            acc
        })
    }

    fn domain(&self) -> ChartDomain {
        ChartDomain::Ball { radius: self.ball_radius }
    }

    fn geodesic_radius_guard(&self) -> Option<f64> {
        Some(0.8 * self.ball_radius)
    }
}
