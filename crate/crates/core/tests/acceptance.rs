//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with the
//! measured numbers; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use quasilocal::catalog::{
    make_af_perturbation, make_capped_schwarzschild, make_euclidean, make_normal_form_from_ricci,
    make_scalar_flat_normal_form, make_schwarzschild_isotropic, make_space_form, CatalogEntry, MultipoleSeed,
};
use quasilocal::curvature::{
    contracted_bianchi_residual, curvature_at, riemann_difference, riemann_from_ricci, riemann_max_abs,
    riemann_symmetry_residual,
};
use quasilocal::embedding::{
    enclosed_volume, initial_guess, minkowski_check, rotate, rotation, solve_embedding, EmbeddingOptions,
    InitialGuess,
};
use quasilocal::expansions::small_sphere_theory;
use quasilocal::grid::SphereGrid;
use quasilocal::masses::brown_york;
use quasilocal::pipeline::{
    fit_large_sphere, fit_small_sphere, large_sphere_run, small_sphere_run, Ladder, LargeSphereOptions,
    LargeSphereRun, SmallSphereFits, SmallSphereOptions, SmallSphereRun, Spacing,
};
use quasilocal::sphere::{coordinate_sphere, geodesic_sphere, GeodesicOptions};
use quasilocal::Error;
use rand::{Rng, SeedableRng};

/// Relative deviation.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn coef(fit: &Option<quasilocal::expansions::ExpansionFit>, e: f64) -> f64 {
    fit.as_ref().and_then(|f| f.coefficient(e)).expect("fitted coefficient").0
}

struct Suite {
    results: Vec<(u32, bool)>,
    /// Worst Minkowski residual of every converged embedding, by source.
    minkowski: Vec<(String, f64)>,
}

impl Suite {
    fn record(&mut self, id: u32, title: &str, started: Instant, outcome: Result<(bool, String), Error>) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!(
            "criterion {id:>2} {} {title} [{:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        self.results.push((id, pass));
    }

    fn collect_minkowski(&mut self, label: &str, embeddings: &[quasilocal::embedding::EmbeddedSurface]) {
        for es in embeddings.iter().filter(|e| e.converged) {
            let (a, b) = minkowski_check(es);
            self.minkowski.push((label.to_string(), a.max(b)));
        }
    }
}

fn small_opts(degree: usize) -> SmallSphereOptions {
    SmallSphereOptions { embedding: EmbeddingOptions { degree, ..Default::default() }, ..Default::default() }
}

fn large_opts(degree: usize, radial_nodes: usize) -> LargeSphereOptions {
    LargeSphereOptions {
        embedding: EmbeddingOptions { degree, ..Default::default() },
        radial_nodes,
        ..Default::default()
    }
}

fn small_run(entry: &CatalogEntry, radii: &[f64], degree: usize) -> Result<SmallSphereRun, Error> {
    let grid = Arc::new(SphereGrid::for_degree(degree));
    small_sphere_run(entry.metric.as_ref(), [0.0; 3], radii, grid, &small_opts(degree))
}

fn small_run_fitted(entry: &CatalogEntry, radii: &[f64]) -> Result<(SmallSphereRun, SmallSphereFits), Error> {
    let run = small_run(entry, radii, 12)?;
    let fits = fit_small_sphere(&run.reports)?;
    Ok((run, fits))
}

fn large_run(entry: &CatalogEntry, radii: &[f64], radial_nodes: usize) -> Result<LargeSphereRun, Error> {
    let grid = Arc::new(SphereGrid::for_degree(8));
    large_sphere_run(entry.metric.as_ref(), radii, grid, &large_opts(8, radial_nodes))
}

fn anisotropic_entry() -> Result<CatalogEntry, Error> {
    let ricci = [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
    make_normal_form_from_ricci(&ricci, 0.0, 1.0, 0.5)
}

fn flat_baseline(s: &mut Suite) -> Result<(bool, String), Error> {
    let e = make_euclidean();
    let radii = [0.5, 1.0, 10.0];
    let small = small_run(&e, &radii, 8)?;
    let large = large_run(&e, &radii, 8)?;
    s.collect_minkowski("flat", &small.embeddings);
    s.collect_minkowski("flat", &large.embeddings);
    let mut worst = 0.0f64;
    for r in small.reports.iter().chain(&large.reports) {
        let values = [r.m_by, Some(r.m_h), r.adm_partial, r.volume_difference()];
        worst = values.iter().flatten().fold(worst, |w, v| w.max(v.abs()));
    }
    Ok((worst <= 1e-9, format!("max |m_BY|, |m_H|, |adm|, |V0-V| = {worst:.2e} (tol 1e-9)")))
}

fn three_sphere_ladder() -> Result<(SmallSphereRun, SmallSphereFits), Error> {
    let radii = Ladder::new(0.05, 0.4, 8, Spacing::Log)?.radii();
    small_run_fitted(&make_space_form(1.0, 1)?, &radii)
}

fn three_sphere_points() -> Result<SmallSphereRun, Error> {
    small_run(&make_space_form(1.0, 1)?, &[0.1, 0.3, 0.5], 12)
}

fn space_form_brown_york(
    s: &mut Suite,
    points: &SmallSphereRun,
    ladder: &(SmallSphereRun, SmallSphereFits),
) -> Result<(bool, String), Error> {
    s.collect_minkowski("S3 points", &points.embeddings);
    s.collect_minkowski("S3 ladder", &ladder.0.embeddings);
    let worst = points
        .reports
        .iter()
        .map(|r| rel(r.m_by.unwrap(), r.radius.sin() * (1.0 - r.radius.cos())))
        .fold(0.0, f64::max);
    let c3 = coef(&ladder.1.brown_york, 3.0);
    let c5 = coef(&ladder.1.brown_york, 5.0);
    let pass = worst <= 1e-6 && rel(c3, 0.5) <= 0.01 && rel(c5, -0.125) <= 0.02;
    Ok((
        pass,
        format!(
            "pointwise rel err {worst:.2e} (tol 1e-6); c3 = {c3:.6} (dev {:.2e}, tol 1%); c5 = {c5:.6} (dev {:.2e}, tol 2%)",
            rel(c3, 0.5),
            rel(c5, -0.125)
        ),
    ))
}

fn space_form_hawking(points: &SmallSphereRun, ladder: &(SmallSphereRun, SmallSphereFits)) -> Result<(bool, String), Error> {
    let worst = points
        .reports
        .iter()
        .chain(&ladder.0.reports)
        .map(|r| rel(r.m_h, 0.5 * r.radius.sin().powi(3)))
        .fold(0.0, f64::max);
    let c5 = ladder.1.hawking.coefficient(5.0).unwrap().0;
    let pass = worst <= 1e-8 && rel(c5, -0.25) <= 0.01;
    Ok((pass, format!("pointwise rel err {worst:.2e} (tol 1e-8); c5_h = {c5:.6} (dev {:.2e}, tol 1%)", rel(c5, -0.25))))
}

fn anisotropic_small_spheres(s: &mut Suite) -> Result<(bool, String), Error> {
    let e = anisotropic_entry()?;
    let radii = Ladder::new(0.025, 0.2, 8, Spacing::Log)?.radii();
    let (run, fits) = small_run_fitted(&e, &radii)?;
    s.collect_minkowski("anisotropic", &run.embeddings);
    let t = small_sphere_theory(&run.curvature);
    let c3 = coef(&fits.brown_york, 3.0);
    let c5 = coef(&fits.brown_york, 5.0);
    let c5h = fits.hawking.coefficient(5.0).unwrap().0;
    let (d3, d5, d5h) = (rel(c3, t.c3_by), rel(c5, t.c5_by), rel(c5h, t.c5_h));
    let pass = d3 <= 0.02 && d5 <= 0.05 && d5h <= 0.05;
    Ok((
        pass,
        format!(
            "Ricci eigenvalues {:?}, ΔR = {:.3}; c3_by {c3:.6}/{:.6} (dev {d3:.2e}); c5_by {c5:.5}/{:.5} (dev {d5:.2e}); c5_h {c5h:.5}/{:.5} (dev {d5h:.2e})",
            run.curvature.ricci_eigenvalues.map(|v| (v * 1e9).round() / 1e9),
            run.curvature.laplacian_scalar,
            t.c3_by,
            t.c5_by,
            t.c5_h
        ),
    ))
}

fn scalar_flat_discriminator(s: &mut Suite) -> Result<(bool, String), Error> {
    let e = make_scalar_flat_normal_form(1.0, 0.5, 0.5)?;
    let radii = Ladder::new(0.025, 0.2, 8, Spacing::Log)?.radii();
    let (run, fits) = small_run_fitted(&e, &radii)?;
    s.collect_minkowski("scalar-flat", &run.embeddings);
    let target = 24.0 * run.curvature.ricci_norm_sq / 1440.0;
    let c5 = coef(&fits.brown_york, 5.0);
    let c5h = fits.hawking.coefficient(5.0).unwrap().0;
    let pass = rel(c5, target) <= 0.05 && c5 > 0.0 && c5h.abs() <= 0.1 * c5;
    Ok((
        pass,
        format!(
            "R = {:.1e}, ΔR = {:.1e}; c5_by = {c5:.6} vs 24|Ric|²/1440 = {target:.6} (dev {:.2e}); |c5_h| = {:.2e} (bound {:.2e})",
            run.curvature.scalar,
            run.curvature.laplacian_scalar,
            rel(c5, target),
            c5h.abs(),
            0.1 * c5
        ),
    ))
}

fn area_expansion(ladder: &(SmallSphereRun, SmallSphereFits)) -> Result<(bool, String), Error> {
    let a4 = ladder.1.area.coefficient(4.0).unwrap().0;
    let a6 = ladder.1.area.coefficient(6.0).unwrap().0;
    let (d4, d6) = (rel(a4, -4.0 * PI / 3.0), rel(a6, 8.0 * PI / 45.0));
    Ok((d4 <= 0.01 && d6 <= 0.05, format!("A4 = {a4:.6} (dev {d4:.2e}, tol 1%); A6 = {a6:.6} (dev {d6:.2e}, tol 5%)")))
}

fn small_volume_comparison(ladder: &(SmallSphereRun, SmallSphereFits)) -> Result<(bool, String), Error> {
    let v5 = coef(&ladder.1.volume, 5.0);
    let d = rel(v5, -2.0 * PI / 5.0);
    let worst = ladder.0.reports.iter().map(|r| r.volume_difference().unwrap()).fold(f64::NEG_INFINITY, f64::max);
    Ok((d <= 0.02 && worst < 0.0, format!("v5 = {v5:.6} (dev {d:.2e}, tol 2%); max(V0-V) on ladder = {worst:.3e} (< 0)")))
}

fn schwarzschild_ladder() -> Result<(CatalogEntry, LargeSphereRun), Error> {
    let e = make_schwarzschild_isotropic(1.0)?;
    let run = large_run(&e, &Ladder::large_sphere_default().radii(), 0)?;
    Ok((e, run))
}

fn large_brown_york(s: &mut Suite, sch: &(CatalogEntry, LargeSphereRun)) -> Result<(bool, String), Error> {
    let (e, run) = sch;
    s.collect_minkowski("Schwarzschild", &run.embeddings);
    let worst = run
        .reports
        .iter()
        .map(|r| {
            let rs = e.known.areal_radius(r.radius).unwrap();
            rel(r.m_by.unwrap(), rs * (1.0 - (1.0 - 2.0 / rs).sqrt()))
        })
        .fold(0.0, f64::max);
    let fits = fit_large_sphere(&run.reports, 1.0, Some(1.0))?;
    let l = fits.brown_york.unwrap();
    let pass = (l.limit - 1.0).abs() <= 1e-3 && worst <= 1e-6;
    Ok((
        pass,
        format!("limit {:.7} ± {:.1e} (tol 1e-3); pointwise rel err {worst:.2e} (tol 1e-6)", l.limit, l.uncertainty),
    ))
}

fn schwarzschild_hawking(sch: &(CatalogEntry, LargeSphereRun)) -> Result<(bool, String), Error> {
    let worst = sch.1.reports.iter().map(|r| (r.m_h - 1.0).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("max |m_H - 1| over {} radii = {worst:.2e} (tol 1e-6)", sch.1.reports.len())))
}

fn adm_integral_check(sch: &(CatalogEntry, LargeSphereRun)) -> Result<(bool, String), Error> {
    let (e, run) = sch;
    let grid = SphereGrid::for_degree(8);
    let at_1000 = quasilocal::masses::adm_integral(e.metric.as_ref(), 1000.0, &grid)?;
    let exact = e.known.adm_flux(1000.0).unwrap();
    let limit = fit_large_sphere(&run.reports, 1.0, Some(1.0))?.adm.unwrap();
    let pass = (at_1000 - exact).abs() <= 1e-8 && (limit.limit - 1.0).abs() <= 1e-4;
    Ok((
        pass,
        format!(
            "adm(1000) = {at_1000:.12} vs m(1+m/2r)³ = {exact:.12} (diff {:.1e}, tol 1e-8); limit {:.8} (tol 1e-4)",
            (at_1000 - exact).abs(),
            limit.limit
        ),
    ))
}

fn capped_ladder() -> Result<LargeSphereRun, Error> {
    large_run(&make_capped_schwarzschild(1.0, 4.0)?, &Ladder::large_sphere_default().radii(), 16)
}

fn large_volume_comparison(s: &mut Suite, run: &LargeSphereRun) -> Result<(bool, String), Error> {
    s.collect_minkowski("capped Schwarzschild", &run.embeddings);
    let fits = fit_large_sphere(&run.reports, 1.0, Some(1.0))?;
    let l = fits.volume_ratio.unwrap();
    let target = fits.predicted_volume_ratio.unwrap();
    let d = rel(l.limit, target);
    Ok((d <= 0.05, format!("(V0-V)/r² limit {:.5} vs -2π = {target:.5} (dev {d:.2e}, tol 5%)", l.limit)))
}

fn isoperimetric_mass(run: &LargeSphereRun) -> Result<(bool, String), Error> {
    let l = fit_large_sphere(&run.reports, 1.0, Some(1.0))?.isoperimetric.unwrap();
    let last = run.reports.last().unwrap().iso_term.unwrap();
    let d = (l.limit - 1.0).abs();
    Ok((d <= 0.05, format!("iso_term limit {:.5} (dev {d:.2e}, tol 5%); value at r = 2000: {last:.5}", l.limit)))
}

fn embedding_invariants(s: &mut Suite) -> Result<(bool, String), Error> {
    let (worst_label, worst) =
        s.minkowski.iter().cloned().fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let count = s.minkowski.len();

    // Rigid-motion invariance on an anisotropic sphere.
    let e = anisotropic_entry()?;
    let grid = Arc::new(SphereGrid::for_degree(12));
    let surface = geodesic_sphere(e.metric.as_ref(), [0.0; 3], 0.15, grid, &GeodesicOptions::default())?;
    let c = curvature_at(e.metric.as_ref(), [0.0; 3])?;
    let guess = InitialGuess::NormalCoordinates { scalar: c.scalar, ricci: c.ricci };
    let opts = EmbeddingOptions { initial_guess: guess.clone(), ..Default::default() };
    let base = solve_embedding(&surface, &opts)?;
    let rotated_guess = rotate(&initial_guess(&surface, &guess)?, &rotation([1.0, 2.0, 3.0], 0.7));
    let turned = solve_embedding(
        &surface,
        &EmbeddingOptions { initial_guess: InitialGuess::Supplied { positions: rotated_guess }, ..Default::default() },
    )?;
    let shift = rel(turned.total_mean_curvature(), base.total_mean_curvature())
        .max(rel(enclosed_volume(&turned)?, enclosed_volume(&base)?))
        .max(rel(brown_york(&surface, &turned)?, brown_york(&surface, &base)?));

    // Negative control: a single Newton step from a round start.
    let control = match solve_embedding(
        &surface,
        &EmbeddingOptions { max_iterations: 1, initial_guess: InitialGuess::Round, ..Default::default() },
    ) {
        Err(Error::EmbeddingNotConverged { surface, .. }) => {
            let (a, b) = minkowski_check(&surface);
            a.max(b)
        }
        Ok(_) => 0.0,
        Err(e) => return Err(e),
    };
    let pass = count > 0 && worst <= 1e-8 && shift <= 1e-9 && control > 1e-8;
    Ok((
        pass,
        format!(
            "worst Minkowski residual over {count} embeddings {worst:.2e} ({worst_label}, tol 1e-8); \
             rotated-guess shift {shift:.2e} (tol 1e-9); unconverged control residual {control:.2e} (> 1e-8)"
        ),
    ))
}

fn decay_suite() -> Result<(bool, String), Error> {
    let tau = 0.6;
    let seeds = vec![
        MultipoleSeed { degree: 2, component: 4, amplitude: 0.5 },
        MultipoleSeed { degree: 1, component: 0, amplitude: 0.3 },
    ];
    let e = make_af_perturbation(1.0, tau, seeds, 2.0)?;
    let grid = Arc::new(SphereGrid::for_degree(8));
    let mut h = Vec::new();
    let mut k = Vec::new();
    for r in [1e2, 1e3, 1e4] {
        let s = coordinate_sphere(e.metric.as_ref(), r, grid.clone())?;
        h.push(s.mean_curvature.iter().map(|v| (v - 2.0 / r).abs()).fold(0.0, f64::max) * r.powf(1.0 + tau));
        k.push(s.gauss_curvature.iter().map(|v| (v - 1.0 / (r * r)).abs()).fold(0.0, f64::max) * r.powf(2.0 + tau));
    }
    // Bounded: the scaled deviation stays within a factor 2 of its first
    // value, and any change between decades shrinks rather than compounds.
    let bounded = |v: &[f64]| v[2] <= 2.0 * v[0] && (v[2] - v[1]).abs() <= (v[1] - v[0]).abs().max(1e-12 * v[0]);
    let pass = bounded(&h) && bounded(&k);
    Ok((
        pass,
        format!("r^(1+τ)|H-2/r| = {:.4?}; r^(2+τ)|K-1/r²| = {:.4?} at r = 1e2, 1e3, 1e4", h, k),
    ))
}

fn curvature_identities() -> Result<(bool, String), Error> {
    let seeds = vec![
        MultipoleSeed { degree: 2, component: 1, amplitude: 0.4 },
        MultipoleSeed { degree: 1, component: 2, amplitude: -0.2 },
    ];
    let entries: Vec<(CatalogEntry, f64, f64)> = vec![
        (make_euclidean(), 0.0, 10.0),
        (make_space_form(1.0, 1)?, 0.0, 1.2),
        (make_space_form(2.0, -1)?, 0.0, 2.0),
        (make_schwarzschild_isotropic(1.0)?, 0.6, 20.0),
        (make_capped_schwarzschild(1.0, 4.0)?, 0.0, 20.0),
        (anisotropic_entry()?, 0.0, 0.45),
        (make_scalar_flat_normal_form(1.0, 0.5, 0.5)?, 0.0, 0.45),
        (make_af_perturbation(1.0, 0.6, seeds.clone(), 2.0)?, 0.0, 30.0),
        (make_af_perturbation(0.5, 1.0, seeds, 3.0)?, 0.0, 30.0),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    let mut worst = [0.0f64; 3];
    for (entry, r_lo, r_hi) in &entries {
        for _ in 0..100 {
            let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            let r = rng.gen_range(*r_lo..*r_hi);
            let p = dir.map(|v| v / n * r);
            let c = curvature_at(entry.metric.as_ref(), p)?;
            let scale = 1.0f64.max(riemann_max_abs(&c.riemann));
            let rebuilt = riemann_from_ricci(&c.metric, &c.ricci, c.scalar);
            worst[0] = worst[0].max(riemann_symmetry_residual(&c.riemann) / scale);
            worst[1] = worst[1].max(contracted_bianchi_residual(&c) / scale);
            worst[2] = worst[2].max(riemann_difference(&c.riemann, &rebuilt) / scale);
        }
    }
    let pass = worst.iter().all(|w| *w <= 1e-8);
    Ok((
        pass,
        format!(
            "{} entries × 100 probes: symmetries + first Bianchi {:.1e}, contracted second Bianchi {:.1e}, 3D reconstruction {:.1e} (tol 1e-8)",
            entries.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
    ))
}

fn main() {
    let mut s = Suite { results: Vec::new(), minkowski: Vec::new() };

    let t = Instant::now();
    let out = flat_baseline(&mut s);
    s.record(1, "flat baseline", t, out);

    let t = Instant::now();
    let s3 = three_sphere_ladder().and_then(|l| Ok((l, three_sphere_points()?)));
    match &s3 {
        Ok((ladder, points)) => {
            let out = space_form_brown_york(&mut s, points, ladder);
            s.record(2, "space-form Brown-York", t, out);
            let t = Instant::now();
            s.record(3, "space-form Hawking", t, space_form_hawking(points, ladder));
        }
        Err(e) => {
            s.record(2, "space-form Brown-York", t, Err(Error::InvalidParameter(e.to_string())));
            s.record(3, "space-form Hawking", t, Err(Error::InvalidParameter(e.to_string())));
        }
    }

    let t = Instant::now();
    let out = anisotropic_small_spheres(&mut s);
    s.record(4, "anisotropic small spheres", t, out);

    let t = Instant::now();
    let out = scalar_flat_discriminator(&mut s);
    s.record(5, "scalar-flat discriminator", t, out);

    let t = Instant::now();
    match &s3 {
        Ok((ladder, _)) => {
            s.record(6, "area expansion", t, area_expansion(ladder));
            let t = Instant::now();
            s.record(7, "small-sphere volume comparison", t, small_volume_comparison(ladder));
        }
        Err(e) => {
            s.record(6, "area expansion", t, Err(Error::InvalidParameter(e.to_string())));
            s.record(7, "small-sphere volume comparison", t, Err(Error::InvalidParameter(e.to_string())));
        }
    }

    let t = Instant::now();
    match schwarzschild_ladder() {
        Ok(sch) => {
            let out = large_brown_york(&mut s, &sch);
            s.record(8, "large-sphere Brown-York limit", t, out);
            let t = Instant::now();
            s.record(9, "Hawking exactness on Schwarzschild", t, schwarzschild_hawking(&sch));
            let t = Instant::now();
            s.record(10, "ADM integral", t, adm_integral_check(&sch));
        }
        Err(e) => {
            for (id, title) in [(8, "large-sphere Brown-York limit"), (9, "Hawking exactness"), (10, "ADM integral")] {
                s.record(id, title, t, Err(Error::InvalidParameter(e.to_string())));
            }
        }
    }

    let t = Instant::now();
    match capped_ladder() {
        Ok(run) => {
            let out = large_volume_comparison(&mut s, &run);
            s.record(11, "large-sphere volume comparison", t, out);
            let t = Instant::now();
            s.record(12, "isoperimetric mass", t, isoperimetric_mass(&run));
        }
        Err(e) => {
            s.record(11, "large-sphere volume comparison", t, Err(Error::InvalidParameter(e.to_string())));
            s.record(12, "isoperimetric mass", t, Err(Error::InvalidParameter(e.to_string())));
        }
    }

    let t = Instant::now();
    let out = embedding_invariants(&mut s);
    s.record(13, "embedding solver invariants", t, out);

    let t = Instant::now();
    s.record(14, "decay suites", t, decay_suite());

    let t = Instant::now();
    s.record(15, "curvature identities", t, curvature_identities());

    let failed: Vec<u32> = s.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria passed", s.results.len() - failed.len(), s.results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
