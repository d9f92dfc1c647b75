//! Constant-curvature metrics in geodesic normal coordinates.

use crate::jet::Jet;
use crate::metric::{ChartDomain, MetricField};

const SERIES_TERMS: usize = 40;

/// `g = F(s) δ + G(s) x xᵀ`, `s = |x|²`, with `F = (a·sin(r/a)/r)²` and
/// `G = (1 − F)/s` (sinh for negative curvature). Both are entire in `s`
/// and are evaluated from their power series, so the origin needs no
/// special treatment.
#[derive(Clone, Debug)]
pub struct SpaceForm {
    pub radius: f64,
    /// +1 spherical, −1 hyperbolic.
    pub sign: i8,
}

impl SpaceForm {
    /// Power-series coefficients in `u = s/a²` of F and of `a²·G`.
    fn series(&self) -> ([f64; SERIES_TERMS], [f64; SERIES_TERMS]) {
        let mut f = [0.0; SERIES_TERMS];
        let mut g = [0.0; SERIES_TERMS];
        let alt = if self.sign > 0 { -1.0 } else { 1.0 };
        // F = Σ alt^k 2^{2k+1} u^k / (2k+2)!,  a²G = −alt Σ alt^k 2^{2k+3} u^k / (2k+4)!
        let mut fact = 2.0; // (2k+2)!
        let mut pow2 = 2.0; // 2^{2k+1}
        let mut sgn = 1.0;
        for k in 0..SERIES_TERMS {
            f[k] = sgn * pow2 / fact;
            let fact4 = fact * (2 * k + 3) as f64 * (2 * k + 4) as f64;
            g[k] = -alt * sgn * pow2 * 4.0 / fact4;
            fact = fact4;
            pow2 *= 4.0;
            sgn *= alt;
        }
        (f, g)
    }

    fn taylor_at(series: &[f64; SERIES_TERMS], u0: f64, order: usize) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (n, o) in out.iter_mut().enumerate().take(order + 1) {
            // Σ_k a_k C(k, n) u0^{k−n}, Horner in u0.
            let mut acc = 0.0;
            for k in (n..SERIES_TERMS).rev() {
                let mut binom = 1.0;
                for i in 0..n {
                    binom *= (k - i) as f64 / (i + 1) as f64;
                }
                acc = acc * u0 + series[k] * binom;
            }
            *o = acc;
        }
        out
    }
}

impl MetricField for SpaceForm {
    fn name(&self) -> String {
        let kind = if self.sign > 0 { "sphere" } else { "hyperbolic" };
        format!("space_form({kind}, a={})", self.radius)
    }

    fn components(&self, x: &[Jet; 3]) -> [Jet; 6] {
        let order = x[0].order();
        let a2 = self.radius * self.radius;
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let u = s / a2;
        let (fs, gs) = self.series();
        let f = u.compose(&Self::taylor_at(&fs, u.value(), order));
        let g = u.compose(&Self::taylor_at(&gs, u.value(), order)) / a2;
        let mut out = [f; 6];
        for i in 0..3 {
            for j in i..3 {
                let mut v = g * x[i] * x[j];
                if i == j {
                    v += f;
                }
                out[crate::metric::sym_index(i, j)] = v;
            }
        }
        out
    }

    fn domain(&self) -> ChartDomain {
        let r = if self.sign > 0 { std::f64::consts::FRAC_PI_2 } else { 3.0 };
        ChartDomain::Ball { radius: r * self.radius }
    }

    fn geodesic_radius_guard(&self) -> Option<f64> {
        Some(if self.sign > 0 { 1.0 } else { 2.0 } * self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_at;

    #[test]
    fn warped_form_matches_closed_form() {
        let sf = SpaceForm { radius: 1.3, sign: 1 };
        let x = [0.3, -0.4, 0.5];
        let g = metric_at(&sf, x).unwrap();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        let f = (1.3 * (r / 1.3).sin() / r).powi(2);
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                let expect = f * d + (1.0 - f) * x[i] * x[j] / r2;
                assert!((g[i][j] - expect).abs() < 1e-14, "{i}{j}");
            }
        }
    }

    #[test]
    fn hyperbolic_warped_form() {
        let sf = SpaceForm { radius: 1.0, sign: -1 };
        let x = [0.5, 0.2, -0.9];
        let g = metric_at(&sf, x).unwrap();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        let f = (r.sinh() / r).powi(2);
        assert!((g[0][0] - (f + (1.0 - f) * x[0] * x[0] / r2)).abs() < 1e-13);
    }

    #[test]
    fn origin_is_euclidean() {
        let sf = SpaceForm { radius: 1.0, sign: 1 };
        let g = metric_at(&sf, [0.0; 3]).unwrap();
        assert_eq!(g, crate::linalg::IDENTITY);
    }
}
