//! Fixed-step classical Runge–Kutta for small autonomous systems.

/// One RK4 step of `y' = f(y)`.
pub fn rk4_step<const N: usize, E>(
    f: &impl Fn(&[f64; N]) -> Result<[f64; N], E>,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let k1 = f(y)?;
    let k2 = f(&axpy(y, 0.5 * h, &k1))?;
    let k3 = f(&axpy(y, 0.5 * h, &k2))?;
    let k4 = f(&axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

/// Integrate over `[0, length]` in `steps` equal steps, calling `observe`
/// after every step with the arc length reached.
pub fn integrate<const N: usize, E>(
    f: &impl Fn(&[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    length: f64,
    steps: usize,
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N], E> {
    let h = length / steps as f64;
    let mut y = y0;
    for k in 0..steps {
        y = rk4_step(f, &y, h)?;
        observe(h * (k + 1) as f64, &y);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_fourth_order() {
        let f = |y: &[f64; 2]| -> Result<[f64; 2], ()> { Ok([y[1], -y[0]]) };
        let err = |n: usize| {
            let y = integrate(&f, [0.0, 1.0], 1.0, n, |_, _| {}).unwrap();
            (y[0] - 1f64.sin()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }
}
