//! Closed-form small- and large-sphere coefficients and their recovery from
//! ladder data by weighted least squares.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::CurvatureData;
use crate::error::{Error, Result};

/// Predicted expansion coefficients.
///
/// `m_BY = c3_by r³ + c5_by r⁵ + …`, `m_H = c3_h r³ + c5_h r⁵ + …`,
/// `𝒜 = 4πr² + a4 r⁴ + a6 r⁶ + …`, `V₀ − V = v5 r⁵ + v7 r⁷ + …` and, for
/// large spheres, `V₀ − V = large_v2 r² + o(r²)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TheoryCoefficients {
    pub c3_by: f64,
    pub c5_by: f64,
    pub c3_h: f64,
    pub c5_h: f64,
    pub a4: f64,
    pub a6: f64,
    pub v5: f64,
    pub v7: f64,
    pub large_v2: Option<f64>,
}

/// Small-sphere coefficients from the curvature at the center.
pub fn small_sphere_theory(c: &CurvatureData) -> TheoryCoefficients {
    let (r, ric2, lap) = (c.scalar, c.ricci_norm_sq, c.laplacian_scalar);
    TheoryCoefficients {
        c3_by: r / 12.0,
        c5_by: (24.0 * ric2 - 13.0 * r * r + 12.0 * lap) / 1440.0,
        c3_h: r / 12.0,
        c5_h: (6.0 * lap - 5.0 * r * r) / 720.0,
        a4: -2.0 * PI * r / 9.0,
        a6: PI / 675.0 * (4.0 * r * r - 2.0 * ric2 - 9.0 * lap),
        v5: -PI * r / 15.0,
        v7: PI / 5670.0 * (173.0 * r * r - 454.0 * ric2 - 27.0 * lap),
        large_v2: None,
    }
}

/// Large-sphere volume-comparison coefficient `−2πm`.
pub fn large_sphere_volume_coefficient(adm_mass: f64) -> f64 {
    -2.0 * PI * adm_mass
}

/// Row weighting for [`fit_power_series`].
#[derive(Clone, Debug, PartialEq)]
pub enum FitWeights {
    /// `1/r^{2·min e}`: equalizes relative error across the ladder.
    Relative,
    Uniform,
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Weighted residual 2-norm.
    pub residual_norm: f64,
    pub radii: Vec<f64>,
    /// Condition number of the column-scaled weighted design.
    pub condition_number: f64,
}

impl ExpansionFit {
    /// Coefficient of the given exponent, if it was fitted.
    pub fn coefficient(&self, exponent: f64) -> Option<(f64, f64)> {
        self.exponents
            .iter()
            .position(|&e| e == exponent)
            .map(|k| (self.coefficients[k], self.uncertainties[k]))
    }
}

/// Weighted linear least squares of `value` against `r^e` for each exponent.
pub fn fit_power_series(samples: &[(f64, f64)], exponents: &[f64], weights: FitWeights) -> Result<ExpansionFit> {
    let (n, k) = (samples.len(), exponents.len());
    if k == 0 {
        return Err(Error::InvalidParameter("no exponents to fit".into()));
    }
    if n < k + 1 {
        return Err(Error::LadderSpan(format!("{n} samples cannot fit {k} coefficients with a residual")));
    }
    let mut radii: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter("fit radii must be positive and finite".into()));
    }
    radii.sort_by(f64::total_cmp);
    if radii.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("fit radii must be distinct".into()));
    }
    let min_e = exponents.iter().copied().fold(f64::INFINITY, f64::min);
    let row_scale: Vec<f64> = match &weights {
        FitWeights::Relative => samples.iter().map(|(r, _)| r.powf(-min_e)).collect(),
        FitWeights::Uniform => vec![1.0; n],
        FitWeights::Custom(w) => {
            if w.len() != n || w.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidParameter("custom fit weights must be positive, one per sample".into()));
            }
            w.iter().map(|v| v.sqrt()).collect()
        }
    };
    let mut a = DMatrix::zeros(n, k);
    let mut b = DVector::zeros(n);
    for (i, (r, v)) in samples.iter().enumerate() {
        for (j, e) in exponents.iter().enumerate() {
            a[(i, j)] = row_scale[i] * r.powf(*e);
        }
        b[i] = row_scale[i] * v;
    }
    let col_norm: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let mut scaled = a.clone();
    for (j, s) in col_norm.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition_number = smax / smin;
    if !(smin > 1e-13 * smax) {
        return Err(Error::RankDeficient(format!(
            "condition number {condition_number:e} for exponents {exponents:?} on radii {:.3e}..{:.3e}",
            radii[0],
            radii[n - 1]
        )));
    }
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let utb = u.tr_mul(&b);
    let mut y = DVector::zeros(k);
    for j in 0..k {
        y[j] = utb[j] / sv[j];
    }
    let z = vt.tr_mul(&y);
    let coefficients: Vec<f64> = (0..k).map(|j| z[j] / col_norm[j]).collect();
    let coef = DVector::from_vec(coefficients.clone());
    let res = &b - &a * &coef;
    let residual_norm = res.norm();
    let dof = (n - k) as f64;
    let sigma2 = residual_norm * residual_norm / dof;
    // (AᵀA)⁻¹ = D⁻¹ V Σ⁻² Vᵀ D⁻¹
    let mut covariance = vec![vec![0.0; k]; k];
    for (p, row) in covariance.iter_mut().enumerate() {
        for (q, c) in row.iter_mut().enumerate() {
            let s: f64 = (0..k).map(|m| vt[(m, p)] * vt[(m, q)] / (sv[m] * sv[m])).sum();
            *c = sigma2 * s / (col_norm[p] * col_norm[q]);
        }
    }
    let uncertainties = (0..k).map(|j| covariance[j][j].sqrt()).collect();
    Ok(ExpansionFit {
        exponents: exponents.to_vec(),
        coefficients,
        uncertainties,
        covariance,
        residual_norm,
        radii,
        condition_number,
    })
}

/// Extrapolated large-radius limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitFit {
    pub limit: f64,
    pub uncertainty: f64,
    /// Decay exponent `p` of the correction terms.
    pub decay: f64,
    pub fit: ExpansionFit,
}

fn check_span(samples: &[(f64, f64)], decades: f64) -> Result<()> {
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let span = (hi / lo).log10();
    if !(span >= decades) {
        return Err(Error::LadderSpan(format!("ladder spans {span:.2} decades, need at least {decades}")));
    }
    Ok(())
}

/// Fit `L + b r^{−p} + c r^{−2p}` and return `L`. The ladder must span at
/// least 1.5 decades.
pub fn large_sphere_limit(samples: &[(f64, f64)], decay: f64) -> Result<LimitFit> {
    if !(decay > 0.0) {
        return Err(Error::InvalidParameter(format!("decay exponent must be positive, got {decay}")));
    }
    check_span(samples, 1.5)?;
    let fit = fit_power_series(samples, &[0.0, -decay, -2.0 * decay], FitWeights::Uniform)?;
    Ok(LimitFit { limit: fit.coefficients[0], uncertainty: fit.uncertainties[0], decay, fit })
}

/// Fit `L + b r^{−p}` with `p` free (golden-section search on `[0.1, 3]`).
/// Diagnostic only: returns the best decay exponent and its limit fit.
pub fn free_decay_fit(samples: &[(f64, f64)]) -> Result<LimitFit> {
    check_span(samples, 1.0)?;
    let cost = |p: f64| -> f64 {
        fit_power_series(samples, &[0.0, -p], FitWeights::Uniform).map(|f| f.residual_norm).unwrap_or(f64::INFINITY)
    };
    let (mut a, mut b) = (0.1f64, 3.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    let p = 0.5 * (a + b);
    let fit = fit_power_series(samples, &[0.0, -p], FitWeights::Uniform)?;
    Ok(LimitFit { limit: fit.coefficients[0], uncertainty: fit.uncertainties[0], decay: p, fit })
}

/// One line of a theory-versus-fit comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub quantity: String,
    pub theory: f64,
    pub fitted: f64,
    pub uncertainty: f64,
    /// `|fitted − theory| / |theory|`; absolute deviation when theory is 0.
    pub rel_dev: f64,
    pub pass: bool,
}

impl ReportRow {
    /// Compare with relative tolerance `tol`; `floor` is the absolute
    /// deviation accepted when the theoretical value is (near) zero.
    pub fn compare(quantity: &str, theory: f64, fitted: f64, uncertainty: f64, tol: f64, floor: f64) -> Self {
        let dev = (fitted - theory).abs();
        let rel_dev = if theory.abs() > floor { dev / theory.abs() } else { dev };
        let pass = dev <= tol * theory.abs() || dev <= floor;
        ReportRow { quantity: quantity.into(), theory, fitted, uncertainty, rel_dev, pass }
    }
}

/// Side-by-side table of predicted and fitted coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub rows: Vec<ReportRow>,
    /// Sign of the fitted `r⁵` Brown–York coefficient, reported when the
    /// scalar curvature at the center vanishes.
    pub c5_by_sign_when_scalar_flat: Option<f64>,
}

impl TheoremReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// Column order of [`TheoremReport::csv_records`].
    pub const COLUMNS: [&'static str; 6] = ["quantity", "theory", "fitted", "uncertainty", "rel_dev", "pass"];

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.quantity.clone(),
                    r.theory.to_string(),
                    r.fitted.to_string(),
                    r.uncertainty.to_string(),
                    r.rel_dev.to_string(),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }

    /// Aligned human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8} {:>14} {:>14} {:>10} {:>10}  {}\n",
            "quantity", "theory", "fitted", "uncert", "rel_dev", "pass"
        );
        for r in &self.rows {
            out += &format!(
                "{:<8} {:>14.6e} {:>14.6e} {:>10.2e} {:>10.2e}  {}\n",
                r.quantity,
                r.theory,
                r.fitted,
                r.uncertainty,
                r.rel_dev,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        if let Some(sign) = self.c5_by_sign_when_scalar_flat {
            out += &format!("scalar curvature vanishes at the center; sign of fitted c5_by: {sign:+}\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn three_sphere_theory() {
        let mut c = crate::curvature::curvature_at(
            crate::catalog::make_space_form(1.0, 1).unwrap().metric.as_ref(),
            [0.0; 3],
        )
        .unwrap();
        c.laplacian_scalar = 0.0;
        let t = small_sphere_theory(&c);
        assert!((t.c3_by - 0.5).abs() < 1e-12);
        assert!((t.c5_by + 0.125).abs() < 1e-12);
        assert!((t.c5_h + 0.25).abs() < 1e-12);
        assert!((t.v5 + 2.0 * PI / 5.0).abs() < 1e-12);
        assert!((t.a4 + 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((t.a6 - 8.0 * PI / 45.0).abs() < 1e-12);
    }

    fn log_ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn exact_polynomial_is_recovered() {
        let s: Vec<(f64, f64)> =
            log_ladder(0.05, 0.4, 8).into_iter().map(|r| (r, 3.0 * r.powi(3) - 0.25 * r.powi(5))).collect();
        let f = fit_power_series(&s, &[3.0, 5.0, 6.0], FitWeights::Relative).unwrap();
        assert!((f.coefficients[0] - 3.0).abs() < 1e-10);
        assert!((f.coefficients[1] + 0.25).abs() < 1e-10);
        assert!(f.coefficients[2].abs() < 1e-10);
    }

    #[test]
    fn three_sphere_brown_york_series() {
        let s: Vec<(f64, f64)> =
            log_ladder(0.05, 0.4, 8).into_iter().map(|r| (r, r.sin() * (1.0 - r.cos()))).collect();
        let f = fit_power_series(&s, &[3.0, 5.0, 7.0], FitWeights::Relative).unwrap();
        assert!((f.coefficients[0] - 0.5).abs() < 1e-4);
        assert!((f.coefficients[1] + 0.125).abs() < 1e-2);
    }

    #[test]
    fn noisy_fit_is_within_three_sigma() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let radii = log_ladder(0.05, 0.4, 8);
        let mut inside = 0;
        for _ in 0..100 {
            let s: Vec<(f64, f64)> = radii
                .iter()
                .map(|&r| (r, 0.5 * r.powi(3) - 0.125 * r.powi(5) + rng.gen_range(-1e-9..1e-9)))
                .collect();
            let f = fit_power_series(&s, &[3.0, 5.0, 7.0], FitWeights::Relative).unwrap();
            let ok = (f.coefficients[0] - 0.5).abs() <= 3.0 * f.uncertainties[0]
                && (f.coefficients[1] + 0.125).abs() <= 3.0 * f.uncertainties[1];
            inside += ok as usize;
        }
        assert!(inside >= 95, "{inside}");
    }

    #[test]
    fn narrow_ladder_is_rank_deficient() {
        let s: Vec<(f64, f64)> = log_ladder(0.1, 0.1 * (1.0 + 1e-9), 6).into_iter().map(|r| (r, r)).collect();
        assert!(matches!(fit_power_series(&s, &[3.0, 5.0, 7.0], FitWeights::Relative), Err(Error::RankDeficient(_))));
        let few = [(0.1, 1.0), (0.2, 2.0)];
        assert!(fit_power_series(&few, &[1.0, 2.0], FitWeights::Uniform).is_err());
    }

    #[test]
    fn schwarzschild_brown_york_limit() {
        let s: Vec<(f64, f64)> = log_ladder(50.0, 2000.0, 10)
            .into_iter()
            .map(|rho| {
                let rs = crate::catalog::areal_radius(1.0, rho);
                (rho, rs * (1.0 - (1.0 - 2.0 / rs).sqrt()))
            })
            .collect();
        let l = large_sphere_limit(&s, 1.0).unwrap();
        assert!((l.limit - 1.0).abs() < 1e-3);
        let free = free_decay_fit(&s).unwrap();
        assert!((0.8..=1.2).contains(&free.decay), "{}", free.decay);
        assert!(large_sphere_limit(&s[..3], 1.0).is_err());
    }

    #[test]
    fn report_rows() {
        let r = ReportRow::compare("c3_by", 0.5, 0.501, 1e-4, 0.01, 1e-9);
        assert!(r.pass && (r.rel_dev - 0.002).abs() < 1e-12);
        let z = ReportRow::compare("c3_by", 0.0, 1e-12, 1e-13, 0.01, 1e-9);
        assert!(z.pass);
        assert!(!ReportRow::compare("c5_by", -0.125, -0.1, 0.0, 0.02, 1e-9).pass);
        let rep = TheoremReport { rows: vec![r, z], c5_by_sign_when_scalar_flat: Some(1.0) };
        let text = rep.to_text();
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("sign of fitted c5_by: +1"));
        assert_eq!(rep.csv_records()[0].len(), TheoremReport::COLUMNS.len());
    }
}
