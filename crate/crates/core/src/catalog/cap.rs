//! C⁴ radial blending profiles used to cap asymptotically flat metrics.

use nalgebra::{SMatrix, SVector};

/// Taylor coefficients `f^(k)(r)/k!`, `k = 0..=4`, of a radial profile.
pub type Taylor5 = [f64; 5];

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Degree-9 polynomial on `[0, 1]` with prescribed values and first four
/// derivatives at both ends.
#[derive(Clone, Debug)]
pub struct HermiteC4 {
    coeffs: [f64; 10],
}

impl HermiteC4 {
    /// `left[k]` and `right[k]` are the k-th derivatives at `t = 0` and `t = 1`.
    pub fn new(left: [f64; 5], right: [f64; 5]) -> Self {
        let mut a = SMatrix::<f64, 10, 10>::zeros();
        let mut b = SVector::<f64, 10>::zeros();
        for k in 0..5 {
            // k-th derivative of t^n at 0 is k! when n = k.
            a[(k, k)] = factorial(k);
            b[k] = left[k];
            for n in k..10 {
                a[(5 + k, n)] = factorial(n) / factorial(n - k);
            }
            b[5 + k] = right[k];
        }
        let sol = a.lu().solve(&b).expect("Hermite system is nonsingular");
        let mut coeffs = [0.0; 10];
        coeffs.copy_from_slice(sol.as_slice());
        Self { coeffs }
    }

    /// Derivatives `p^(k)(t)` for `k = 0..=4`.
    pub fn derivatives(&self, t: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for n in (k..10).rev() {
                acc = acc * t + self.coeffs[n] * factorial(n) / factorial(n - k);
            }
            *o = acc;
        }
        out
    }
}

/// Monotone C⁴ step: 0 for `r ≤ r_in`, 1 for `r ≥ r_out`.
#[derive(Clone, Debug)]
pub struct SmoothStep {
    pub r_in: f64,
    pub r_out: f64,
}

impl SmoothStep {
    pub fn taylor(&self, r: f64) -> Taylor5 {
        if r <= self.r_in {
            return [0.0; 5];
        }
        if r >= self.r_out {
            return [1.0, 0.0, 0.0, 0.0, 0.0];
        }
        let h = self.r_out - self.r_in;
        let t = (r - self.r_in) / h;
        // t⁵(126 − 420t + 540t² − 315t³ + 70t⁴)
        let c = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];
        let mut out = [0.0; 5];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for n in (k..10).rev() {
                acc = acc * t + c[n] * factorial(n) / factorial(n - k);
            }
            *o = acc / h.powi(k as i32) / factorial(k);
        }
        out
    }
}

/// Conformal factor equal to `1 + m/2r` outside `r_out`, blended by a
/// degree-9 Hermite polynomial to the constant `1 + m/r_out` at `r_out/2`.
#[derive(Clone, Debug)]
pub struct CappedConformalFactor {
    pub mass: f64,
    pub r_out: f64,
    pub inner_value: f64,
    blend: HermiteC4,
}

impl CappedConformalFactor {
    pub fn new(mass: f64, r_out: f64) -> Self {
        let r_in = 0.5 * r_out;
        let h = r_out - r_in;
        let inner_value = 1.0 + mass / r_out;
        let outer = Self::schwarzschild_derivatives(mass, r_out);
        let right: [f64; 5] = std::array::from_fn(|k| outer[k] * h.powi(k as i32));
        let blend = HermiteC4::new([inner_value, 0.0, 0.0, 0.0, 0.0], right);
        Self { mass, r_out, inner_value, blend }
    }

    fn schwarzschild_derivatives(mass: f64, r: f64) -> [f64; 5] {
        // d^k/dr^k (1 + m/2r) = (m/2)(−1)^k k! r^{−k−1}
        std::array::from_fn(|k| {
            let base = if k == 0 { 1.0 } else { 0.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            base + 0.5 * mass * sign * factorial(k) * r.powi(-(k as i32) - 1)
        })
    }

    pub fn r_in(&self) -> f64 {
        0.5 * self.r_out
    }

    /// Derivatives `u^(k)(r)`, `k = 0..=4`.
    pub fn derivatives(&self, r: f64) -> [f64; 5] {
        if r >= self.r_out {
            return Self::schwarzschild_derivatives(self.mass, r);
        }
        if r <= self.r_in() {
            return [self.inner_value, 0.0, 0.0, 0.0, 0.0];
        }
        let h = self.r_out - self.r_in();
        let t = (r - self.r_in()) / h;
        let p = self.blend.derivatives(t);
        std::array::from_fn(|k| p[k] / h.powi(k as i32))
    }

    pub fn taylor(&self, r: f64) -> Taylor5 {
        let d = self.derivatives(r);
        std::array::from_fn(|k| d[k] / factorial(k))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivatives(r)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_factor_is_c4_at_both_joints() {
        let u = CappedConformalFactor::new(1.0, 10.0);
        for joint in [5.0, 10.0] {
            let lo = u.derivatives(joint - 1e-9);
            let hi = u.derivatives(joint + 1e-9);
            for k in 0..5 {
                let scale = 1.0 + lo[k].abs();
                assert!((lo[k] - hi[k]).abs() < 1e-6 * scale, "joint {joint}, k={k}: {} vs {}", lo[k], hi[k]);
            }
        }
    }

    #[test]
    fn capped_factor_is_monotone_and_matches_outside() {
        let u = CappedConformalFactor::new(1.0, 10.0);
        let mut prev = f64::INFINITY;
        for i in 0..=2000 {
            let r = 4.0 + 8.0 * i as f64 / 2000.0;
            let d = u.derivatives(r);
            assert!(d[1] <= 1e-15, "u' = {} at r = {r}", d[1]);
            assert!(d[0] <= prev + 1e-15);
            prev = d[0];
        }
        assert_eq!(u.value(12.0), 1.0 + 1.0 / 24.0);
    }

    #[test]
    fn smooth_step_endpoints() {
        let s = SmoothStep { r_in: 1.0, r_out: 2.0 };
        assert_eq!(s.taylor(0.5)[0], 0.0);
        assert_eq!(s.taylor(3.0)[0], 1.0);
        assert!((s.taylor(1.5)[0] - 0.5).abs() < 1e-14);
        let near_in = s.taylor(1.0 + 1e-6);
        assert!(near_in.iter().all(|v| v.abs() < 1e-3));
    }
}
