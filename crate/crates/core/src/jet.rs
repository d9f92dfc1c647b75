//! Truncated multivariate Taylor jets in the three chart variables.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α` of a scalar around a base
//! point, `f(x₀ + h) = Σ c_α h^α`, for multi-indices `|α| ≤ order ≤ 4`.
//! Arithmetic is exact truncated polynomial algebra, so derivatives of
//! polynomial metrics come out exact and analytic metrics only need their
//! univariate building blocks (`sqrt`, `powf`, `sin`, ...) expanded to
//! fourth order.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Highest supported total derivative order.
pub const MAX_ORDER: usize = 4;
/// Number of monomials of degree ≤ 4 in three variables.
pub const N_COEFFS: usize = 35;

const COUNT_UPTO: [usize; MAX_ORDER + 1] = [1, 4, 10, 20, 35];

struct Tables {
    exps: [[u8; 3]; N_COEFFS],
    index: [[[u8; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1],
    /// (lhs, rhs, out) sorted by degree of `out`.
    mul: Vec<(u8, u8, u8)>,
    mul_upto: [usize; MAX_ORDER + 1],
    /// Per variable: (out, src, factor) sorted by degree of `out`.
    deriv: [Vec<(u8, u8, f64)>; 3],
    deriv_upto: [[usize; MAX_ORDER + 1]; 3],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exps = [[0u8; 3]; N_COEFFS];
        let mut index = [[[u8::MAX; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1];
        let mut n = 0;
        for deg in 0..=MAX_ORDER {
            for i in (0..=deg).rev() {
                for j in (0..=deg - i).rev() {
                    let k = deg - i - j;
                    exps[n] = [i as u8, j as u8, k as u8];
                    index[i][j][k] = n as u8;
                    n += 1;
                }
            }
        }
        debug_assert_eq!(n, N_COEFFS);
        let degree = |e: [u8; 3]| (e[0] + e[1] + e[2]) as usize;

        let mut mul = Vec::new();
        for a in 0..N_COEFFS {
            for b in 0..N_COEFFS {
                let (ea, eb) = (exps[a], exps[b]);
                let s = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                if degree(s) <= MAX_ORDER {
                    let c = index[s[0] as usize][s[1] as usize][s[2] as usize];
                    mul.push((a as u8, b as u8, c));
                }
            }
        }
        mul.sort_by_key(|&(_, _, c)| (degree(exps[c as usize]), c));
        let mut mul_upto = [0; MAX_ORDER + 1];
        for (o, slot) in mul_upto.iter_mut().enumerate() {
            *slot = mul.iter().filter(|t| degree(exps[t.2 as usize]) <= o).count();
        }

        let mut deriv: [Vec<(u8, u8, f64)>; 3] = Default::default();
        let mut deriv_upto = [[0; MAX_ORDER + 1]; 3];
        for v in 0..3 {
            for out in 0..N_COEFFS {
                let mut e = exps[out];
                if degree(e) + 1 > MAX_ORDER {
                    continue;
                }
                e[v] += 1;
                let src = index[e[0] as usize][e[1] as usize][e[2] as usize];
                deriv[v].push((out as u8, src, e[v] as f64));
            }
            for o in 0..=MAX_ORDER {
                deriv_upto[v][o] = deriv[v]
                    .iter()
                    .filter(|t| degree(exps[t.0 as usize]) <= o)
                    .count();
            }
        }
        Tables { exps, index, mul, mul_upto, deriv, deriv_upto }
    })
}

/// Index of the coefficient for multi-index `alpha`, if it fits in a jet.
pub fn coeff_index(alpha: [usize; 3]) -> Option<usize> {
    if alpha.iter().sum::<usize>() > MAX_ORDER {
        return None;
    }
    Some(tables().index[alpha[0]][alpha[1]][alpha[2]] as usize)
}

/// Multi-index of coefficient slot `i`.
pub fn exponents(i: usize) -> [usize; 3] {
    let e = tables().exps[i];
    [e[0] as usize, e[1] as usize, e[2] as usize]
}

/// Number of coefficient slots used by a jet of the given order.
pub fn coeff_count(order: usize) -> usize {
    COUNT_UPTO[order]
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor polynomial of a scalar in three variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    coeffs: [f64; N_COEFFS],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = [0.0; N_COEFFS];
        coeffs[0] = value;
        Self { coeffs, order }
    }

    /// The chart coordinate `x^var` expanded around `value`.
    pub fn variable(value: f64, var: usize, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    /// Build from raw Taylor coefficients (slot order of [`exponents`]).
    pub fn from_coeffs(coeffs: &[f64], order: usize) -> Self {
        let mut j = Self::constant(0.0, order);
        let n = coeff_count(order).min(coeffs.len());
        j.coeffs[..n].copy_from_slice(&coeffs[..n]);
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Active Taylor coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..coeff_count(self.order)]
    }

    /// Taylor coefficient `c_α`.
    pub fn taylor(&self, alpha: [usize; 3]) -> f64 {
        match coeff_index(alpha) {
            Some(i) if alpha.iter().sum::<usize>() <= self.order => self.coeffs[i],
            _ => panic!("multi-index {alpha:?} beyond jet order {}", self.order),
        }
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn partial(&self, alpha: [usize; 3]) -> f64 {
        let scale: f64 = alpha.iter().map(|&a| factorial(a)).product();
        self.taylor(alpha) * scale
    }

    /// First partials at the base point.
    pub fn gradient(&self) -> [f64; 3] {
        [self.partial([1, 0, 0]), self.partial([0, 1, 0]), self.partial([0, 0, 1])]
    }

    /// Jet of `∂f/∂x^var`; loses one order.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let t = tables();
        let order = self.order - 1;
        let mut out = Jet::constant(0.0, order);
        for &(o, s, f) in &t.deriv[var][..t.deriv_upto[var][order]] {
            out.coeffs[o as usize] = f * self.coeffs[s as usize];
        }
        out
    }

    /// Same polynomial viewed at a lower order.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        let mut out = Jet::constant(0.0, order);
        let n = coeff_count(order);
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    /// Compose with a univariate function given its Taylor coefficients
    /// `f^(k)(u₀)/k!` at `u₀ = self.value()`, `k = 0..=order`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let order = self.order;
        assert!(taylor.len() > order, "need {} univariate coefficients", order + 1);
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(taylor[order], order);
        for k in (0..order).rev() {
            acc *= delta;
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        assert!(u != 0.0, "jet reciprocal of zero constant term");
        let mut t = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / u;
        let mut p = inv;
        for (k, tk) in t.iter_mut().enumerate().take(self.order + 1) {
            *tk = if k % 2 == 0 { p } else { -p };
            p *= inv;
        }
        self.compose(&t)
    }

    /// `self^a` for a positive base.
    pub fn powf(&self, a: f64) -> Jet {
        let u = self.value();
        assert!(u > 0.0, "jet powf needs a positive base, got {u}");
        let mut t = [0.0; MAX_ORDER + 1];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate().take(self.order + 1) {
            *tk = binom * u.powf(a - k as f64);
            binom *= (a - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&t)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = Jet::constant(1.0, self.order);
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = e / factorial(k);
        }
        self.compose(&t)
    }

    pub fn ln(&self) -> Jet {
        let u = self.value();
        assert!(u > 0.0, "jet ln needs a positive argument");
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = u.ln();
        for (k, tk) in t.iter_mut().enumerate().skip(1) {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            *tk = s / (k as f64 * u.powi(k as i32));
        }
        self.compose(&t)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = cycle[k % 4] / factorial(k);
        }
        self.compose(&t)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = cycle[k % 4] / factorial(k);
        }
        self.compose(&t)
    }
}

/// The three chart coordinates as jets around `x`.
pub fn chart_variables(x: [f64; 3], order: usize) -> [Jet; 3] {
    [
        Jet::variable(x[0], 0, order),
        Jet::variable(x[1], 1, order),
        Jet::variable(x[2], 2, order),
    ]
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self += rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        self.order = self.order.min(rhs.order);
        let n = coeff_count(self.order);
        for (a, b) in self.coeffs[..n].iter_mut().zip(&rhs.coeffs[..n]) {
            *a += b;
        }
        self.coeffs[n..].fill(0.0);
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        self.order = self.order.min(rhs.order);
        let n = coeff_count(self.order);
        for (a, b) in self.coeffs[..n].iter_mut().zip(&rhs.coeffs[..n]) {
            *a -= b;
        }
        self.coeffs[n..].fill(0.0);
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let t = tables();
        let order = self.order.min(rhs.order);
        let mut out = Jet::constant(0.0, order);
        for &(a, b, c) in &t.mul[..t.mul_upto[order]] {
            out.coeffs[c as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        out
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for c in self.coeffs.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_jet(coeffs: &[f64]) -> Jet {
        Jet::from_coeffs(coeffs, 4)
    }

    /// Degree-≤4 product by explicit convolution over multi-indices.
    fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; N_COEFFS];
        for i in 0..N_COEFFS {
            for j in 0..N_COEFFS {
                let (ei, ej) = (exponents(i), exponents(j));
                let s = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]];
                if let Some(k) = coeff_index(s) {
                    out[k] += a[i] * b[j];
                }
            }
        }
        out
    }

    #[test]
    fn monomial_table_is_graded() {
        for i in 0..N_COEFFS {
            assert_eq!(coeff_index(exponents(i)), Some(i));
        }
        assert_eq!(exponents(0), [0, 0, 0]);
        assert_eq!(exponents(1), [1, 0, 0]);
        assert_eq!(exponents(3), [0, 0, 1]);
        assert_eq!(coeff_index([5, 0, 0]), None);
    }

    #[test]
    fn derivatives_of_a_monomial() {
        // f = x²y z at (1, 2, 3)
        let [x, y, z] = chart_variables([1.0, 2.0, 3.0], 4);
        let f = x * x * y * z;
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.partial([1, 0, 0]), 12.0);
        assert_eq!(f.partial([2, 0, 0]), 12.0);
        assert_eq!(f.partial([1, 1, 1]), 2.0);
        assert_eq!(f.partial([2, 1, 1]), 2.0);
        assert_eq!(f.partial([0, 0, 2]), 0.0);
        let fx = f.d(0);
        assert_eq!(fx.order(), 3);
        assert_eq!(fx.value(), 12.0);
        assert_eq!(fx.partial([1, 1, 1]), 2.0);
    }

    #[test]
    fn univariate_functions_match_closed_forms() {
        let [x, _, _] = chart_variables([0.7, 0.0, 0.0], 4);
        let checks: [(Jet, [f64; 5]); 4] = [
            (x.sin(), {
                let (s, c) = 0.7f64.sin_cos();
                [s, c, -s, -c, s]
            }),
            (x.exp(), [0.7f64.exp(); 5]),
            (x.sqrt(), {
                let u = 0.7f64;
                [
                    u.sqrt(),
                    0.5 * u.powf(-0.5),
                    -0.25 * u.powf(-1.5),
                    0.375 * u.powf(-2.5),
                    -0.9375 * u.powf(-3.5),
                ]
            }),
            (x.ln(), {
                let u = 0.7f64;
                [u.ln(), 1.0 / u, -1.0 / u.powi(2), 2.0 / u.powi(3), -6.0 / u.powi(4)]
            }),
        ];
        for (jet, expect) in checks {
            for (k, e) in expect.iter().enumerate() {
                let got = jet.partial([k, 0, 0]);
                assert!((got - e).abs() < 1e-12 * (1.0 + e.abs()), "k={k}: {got} vs {e}");
            }
        }
    }

    #[test]
    fn quotient_times_divisor_is_identity() {
        let [x, y, z] = chart_variables([0.3, -0.2, 0.5], 4);
        let a = x * y + z * 2.0 + 1.0;
        let b = x * x + y * z + 3.0;
        let q = a / b;
        let back = q * b;
        for (u, v) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn order_propagates_to_the_minimum() {
        let a = Jet::variable(1.0, 0, 4);
        let b = Jet::variable(1.0, 1, 2);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + b).order(), 2);
        assert_eq!(a.d(0).d(1).order(), 2);
    }

    proptest! {
        #[test]
        fn product_is_truncated_convolution(
            a in proptest::collection::vec(-3i32..=3, N_COEFFS),
            b in proptest::collection::vec(-3i32..=3, N_COEFFS),
        ) {
            // Small integers keep every product exactly representable.
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let prod = poly_jet(&a) * poly_jet(&b);
            let expect = convolve(&a, &b);
            prop_assert_eq!(prod.coeffs(), &expect[..]);
        }

        #[test]
        fn power_rule_matches_repeated_product(v in 0.2f64..3.0, n in 0u32..5) {
            let x = Jet::variable(v, 1, 4) + Jet::variable(0.5, 0, 4);
            let p = x.powi(n);
            let q = x.powf(n as f64);
            for (u, w) in p.coeffs().iter().zip(q.coeffs()) {
                prop_assert!((u - w).abs() <= 1e-11 * (1.0 + u.abs()));
            }
        }
    }
}
