//! Mode dispatch: build the entry, run the requested pipeline and write the
//! artifacts.

use std::sync::Arc;

use quasilocal::catalog::CatalogEntry;
use quasilocal::curvature::{curvature_at, CurvatureData};
use quasilocal::embedding::{
    enclosed_volume, minkowski_check, solve_embedding, EmbeddedSurface, EmbeddingOptions, InitialGuess,
};
use quasilocal::grid::{harmonic_index, SphereGrid};
use quasilocal::masses::{adm_integral, MassReport, MASS_REPORT_COLUMNS};
use quasilocal::pipeline::{
    fit_large_sphere, fit_small_sphere, large_sphere_run, small_sphere_run, theorem_report, GuessPolicy, Ladder,
    LargeSphereOptions, SmallSphereOptions,
};
use quasilocal::sphere::{coordinate_region_volume, coordinate_sphere, geodesic_ladder, SurfaceGeometry};
use quasilocal::expansions::{ExpansionFit, LimitFit};
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::output::{config_hash, Writer};
use crate::CliError;

/// Everything a mode needs: the resolved configuration, the built entry and
/// the shared grid.
struct Context {
    config: RunConfig,
    entry: CatalogEntry,
    grid: Arc<SphereGrid>,
}

impl Context {
    fn metric(&self) -> &dyn quasilocal::metric::MetricField {
        self.entry.metric.as_ref()
    }

    fn radius(&self) -> f64 {
        self.config.radius.expect("validated for single-surface modes")
    }

    fn coordinate(&self) -> bool {
        self.config.uses_coordinate_spheres()
    }

    fn center_curvature(&self) -> Result<CurvatureData, CliError> {
        Ok(curvature_at(self.metric(), self.config.center)?)
    }

    /// Embedding options with the initial guess resolved for the surface kind.
    fn embedding_options(&self) -> Result<EmbeddingOptions, CliError> {
        let mut opts = self.config.embedding.options();
        if self.config.embedding.initial_guess.is_none() {
            opts.initial_guess = if self.coordinate() {
                InitialGuess::ChartPositions
            } else {
                let c = self.center_curvature()?;
                InitialGuess::NormalCoordinates { scalar: c.scalar, ricci: c.ricci }
            };
        }
        Ok(opts)
    }

    fn guess_policy(&self) -> GuessPolicy {
        if self.config.embedding.initial_guess.is_some() {
            GuessPolicy::Explicit
        } else {
            GuessPolicy::Auto
        }
    }

    fn single_surface(&self) -> Result<SurfaceGeometry, CliError> {
        let r = self.radius();
        let s = if self.coordinate() {
            coordinate_sphere(self.metric(), r, self.grid.clone())
        } else {
            quasilocal::sphere::geodesic_sphere(self.metric(), self.config.center, r, self.grid.clone(), &self.config.geodesic)
        };
        Ok(s.map_err(|e| e.at_radius(r))?)
    }

    fn embed(&self, s: &SurfaceGeometry) -> Result<EmbeddedSurface, CliError> {
        Ok(solve_embedding(s, &self.embedding_options()?).map_err(|e| e.at_radius(s.radius))?)
    }

    /// `V` of the region bounded by the single surface.
    fn volume(&self) -> Result<f64, CliError> {
        let r = self.radius();
        let n = self.config.radial_nodes.unwrap_or(0);
        let v = if self.coordinate() {
            coordinate_region_volume(self.metric(), r, &self.grid, n)
        } else {
            geodesic_ladder(self.metric(), self.config.center, &[r], self.grid.clone(), n, &self.config.geodesic)
                .map(|l| l.volumes[0])
        };
        Ok(v.map_err(|e| e.at_radius(r))?)
    }
}

/// Validate, resolve and execute; returns the paths written.
pub fn run(mut config: RunConfig) -> Result<Vec<std::path::PathBuf>, CliError> {
    config.resolve();
    let entry = config.metric.build()?;
    let g = config.grid.expect("resolved");
    let grid = Arc::new(SphereGrid::new(g.n_theta, g.n_phi)?);
    if config.mode == Mode::SmallSphere && config.ladder.is_none() {
        let c = curvature_at(entry.metric.as_ref(), config.center)?;
        config.ladder = Some(Ladder::small_sphere_default(&c));
    }
    let canonical = {
        // The output directory does not affect results and is left out of
        // the hash so relocated runs compare equal.
        let mut c = config.clone();
        c.output.dir = Default::default();
        c.to_toml()
    };
    let mut w = Writer::new(&config.output.dir, config_hash(&canonical), config.output.format)?;
    w.text("resolved_config.toml", &config.to_toml())?;
    let ctx = Context { config, entry, grid };
    match ctx.config.mode {
        Mode::Curvature => curvature_mode(&ctx, &mut w)?,
        Mode::Surface => surface_mode(&ctx, &mut w)?,
        Mode::Embed => embed_mode(&ctx, &mut w)?,
        Mode::Mass => mass_mode(&ctx, &mut w)?,
        Mode::Volume => volume_mode(&ctx, &mut w)?,
        Mode::SmallSphere => small_sphere_mode(&ctx, &mut w)?,
        Mode::LargeSphere => large_sphere_mode(&ctx, &mut w)?,
    }
    Ok(w.written().to_vec())
}

fn s(v: f64) -> String {
    v.to_string()
}

fn curvature_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let c = ctx.center_curvature()?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let axes = ["1", "2", "3"];
    for (i, a) in axes.iter().enumerate() {
        rows.push(vec![format!("point_{a}"), s(c.point[i])]);
    }
    for i in 0..3 {
        for j in i..3 {
            rows.push(vec![format!("g_{}{}", i + 1, j + 1), s(c.metric[i][j])]);
        }
    }
    for i in 0..3 {
        for j in i..3 {
            rows.push(vec![format!("ricci_{}{}", i + 1, j + 1), s(c.ricci[i][j])]);
        }
    }
    for (i, a) in axes.iter().enumerate() {
        rows.push(vec![format!("ricci_eigenvalue_{a}"), s(c.ricci_eigenvalues[i])]);
    }
    rows.push(vec!["scalar".into(), s(c.scalar)]);
    rows.push(vec!["ricci_norm_sq".into(), s(c.ricci_norm_sq)]);
    for (i, a) in axes.iter().enumerate() {
        rows.push(vec![format!("grad_scalar_{a}"), s(c.grad_scalar[i])]);
    }
    rows.push(vec!["laplacian_scalar".into(), s(c.laplacian_scalar)]);
    for r in &rows {
        println!("{:<20} {}", r[0], r[1]);
    }
    w.table("curvature", &["quantity", "value"], &rows, &c)?;
    Ok(())
}

const SURFACE_COLUMNS: [&str; 8] = ["theta", "phi", "x1", "x2", "x3", "mean_curvature", "gauss_curvature", "area_element"];

fn surface_rows(surface: &SurfaceGeometry) -> Vec<Vec<String>> {
    (0..surface.len())
        .map(|i| {
            let (t, p) = surface.grid.angles(i);
            let x = surface.positions[i];
            vec![
                s(t),
                s(p),
                s(x[0]),
                s(x[1]),
                s(x[2]),
                s(surface.mean_curvature[i]),
                s(surface.gauss_curvature[i]),
                s(surface.area_element[i]),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct SurfaceNodes<'a> {
    theta: Vec<f64>,
    phi: Vec<f64>,
    positions: &'a [[f64; 3]],
    mean_curvature: &'a [f64],
    gauss_curvature: &'a [f64],
    area_element: &'a [f64],
}

fn write_surface(w: &mut Writer, name: &str, surface: &SurfaceGeometry) -> std::io::Result<()> {
    let (theta, phi) = (0..surface.len()).map(|i| surface.grid.angles(i)).unzip();
    let nodes = SurfaceNodes {
        theta,
        phi,
        positions: &surface.positions,
        mean_curvature: &surface.mean_curvature,
        gauss_curvature: &surface.gauss_curvature,
        area_element: &surface.area_element,
    };
    w.table(name, &SURFACE_COLUMNS, &surface_rows(surface), &nodes)
}

const MESH_COLUMNS: [&str; 7] = ["theta", "phi", "x1", "x2", "x3", "mean_curvature", "support"];

#[derive(Serialize)]
struct MeshNodes<'a> {
    theta: Vec<f64>,
    phi: Vec<f64>,
    positions: &'a [[f64; 3]],
    mean_curvature: &'a [f64],
    support: &'a [f64],
}

fn write_mesh(w: &mut Writer, name: &str, es: &EmbeddedSurface) -> std::io::Result<()> {
    let rows: Vec<Vec<String>> = (0..es.positions.len())
        .map(|i| {
            let (t, p) = es.grid.angles(i);
            let x = es.positions[i];
            vec![s(t), s(p), s(x[0]), s(x[1]), s(x[2]), s(es.mean_curvature[i]), s(es.support[i])]
        })
        .collect();
    let (theta, phi) = (0..es.positions.len()).map(|i| es.grid.angles(i)).unzip();
    let nodes = MeshNodes {
        theta,
        phi,
        positions: &es.positions,
        mean_curvature: &es.mean_curvature,
        support: &es.support,
    };
    w.table(name, &MESH_COLUMNS, &rows, &nodes)
}

#[derive(Serialize)]
struct SurfaceSummary {
    radius: f64,
    area: f64,
    areal_radius: f64,
    int_h: f64,
    int_h2: f64,
    min_gauss_curvature: f64,
    max_gauss_curvature: f64,
    ode_steps_per_length: usize,
    step_error_estimate: f64,
    gauss_lemma_defect: f64,
    gauss_bonnet_defect: f64,
}

fn surface_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let surface = ctx.single_surface()?;
    let d = &surface.diagnostics;
    let summary = SurfaceSummary {
        radius: surface.radius,
        area: surface.area(),
        areal_radius: surface.areal_radius(),
        int_h: surface.total_mean_curvature(),
        int_h2: surface.willmore(),
        min_gauss_curvature: surface.min_gauss_curvature().1,
        max_gauss_curvature: surface.gauss_curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ode_steps_per_length: d.ode_steps,
        step_error_estimate: d.step_error_estimate,
        gauss_lemma_defect: d.gauss_lemma_defect,
        gauss_bonnet_defect: d.gauss_bonnet_defect,
    };
    let value = serde_json::to_value(&summary).expect("plain data");
    let rows = key_value_rows(&value);
    print_rows(&rows);
    w.table("surface_summary", &["quantity", "value"], &rows, &summary)?;
    write_surface(w, "surface", &surface)?;
    Ok(())
}

fn key_value_rows(value: &serde_json::Value) -> Vec<Vec<String>> {
    value
        .as_object()
        .map(|o| {
            o.iter()
                .map(|(k, v)| vec![k.clone(), if v.is_null() { String::new() } else { v.to_string() }])
                .collect()
        })
        .unwrap_or_default()
}

fn print_rows(rows: &[Vec<String>]) {
    for r in rows {
        println!("{:<24} {}", r[0], r[1]);
    }
}

#[derive(Serialize)]
struct EmbeddingSummary {
    radius: f64,
    degree: usize,
    converged: bool,
    iterations: usize,
    residual: f64,
    residual_history: Vec<f64>,
    int_h0: f64,
    area: f64,
    volume0: f64,
    minkowski_h0: f64,
    minkowski_area: f64,
}

fn embed_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let surface = ctx.single_surface()?;
    let es = ctx.embed(&surface)?;
    let (m0, m1) = minkowski_check(&es);
    let summary = EmbeddingSummary {
        radius: surface.radius,
        degree: es.degree,
        converged: es.converged,
        iterations: es.iterations,
        residual: es.residual,
        residual_history: es.history.clone(),
        int_h0: es.total_mean_curvature(),
        area: es.area(),
        volume0: enclosed_volume(&es)?,
        minkowski_h0: m0,
        minkowski_area: m1,
    };
    let mut value = serde_json::to_value(&summary).expect("plain data");
    value.as_object_mut().expect("object").remove("residual_history");
    let rows = key_value_rows(&value);
    print_rows(&rows);
    w.table("embedding", &["quantity", "value"], &rows, &summary)?;
    let mut coeffs = Vec::new();
    for l in 1..=es.degree {
        for m in -(l as i64)..=(l as i64) {
            let c = es.coefficients[harmonic_index(l, m)];
            coeffs.push(vec![l.to_string(), m.to_string(), s(c[0]), s(c[1]), s(c[2])]);
        }
    }
    w.table("coefficients", &["l", "m", "x1", "x2", "x3"], &coeffs, &coeffs)?;
    write_mesh(w, "mesh", &es)?;
    Ok(())
}

fn mass_rows(reports: &[MassReport]) -> Vec<Vec<String>> {
    reports.iter().map(MassReport::csv_record).collect()
}

fn mass_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let surface = ctx.single_surface()?;
    let es = ctx.embed(&surface)?;
    let r = surface.radius;
    let mut report = MassReport::new(&surface, Some(&es)).map_err(|e| e.at_radius(r))?;
    if ctx.coordinate() {
        report = report.with_adm(adm_integral(ctx.metric(), r, &ctx.grid).map_err(|e| e.at_radius(r))?);
    }
    if ctx.config.radial_nodes.unwrap_or(0) > 0 {
        report = report.with_volume(ctx.volume()?);
    }
    let rows = mass_rows(std::slice::from_ref(&report));
    for (k, v) in MASS_REPORT_COLUMNS.iter().zip(&rows[0]) {
        println!("{k:<24} {v}");
    }
    w.table("masses", &MASS_REPORT_COLUMNS, &rows, &[&report])?;
    if ctx.config.output.dump_surfaces {
        write_surface(w, "surface", &surface)?;
    }
    if ctx.config.output.dump_meshes {
        write_mesh(w, "mesh", &es)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VolumeRow {
    radius: f64,
    area: f64,
    volume: f64,
    volume0: f64,
    volume_difference: f64,
    iso_term: f64,
}

fn volume_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let surface = ctx.single_surface()?;
    let es = ctx.embed(&surface)?;
    let report = MassReport::new(&surface, Some(&es))
        .map_err(|e| e.at_radius(surface.radius))?
        .with_volume(ctx.volume()?);
    let row = VolumeRow {
        radius: report.radius,
        area: report.area,
        volume: report.volume.expect("attached"),
        volume0: report.volume0.expect("embedded"),
        volume_difference: report.volume_difference().expect("both volumes"),
        iso_term: report.iso_term.expect("attached"),
    };
    let value = serde_json::to_value(&row).expect("plain data");
    let cells: Vec<String> = value.as_object().expect("object").values().map(|v| v.to_string()).collect();
    let columns = ["radius", "area", "volume", "volume0", "volume_difference", "iso_term"];
    for (k, v) in columns.iter().zip(&cells) {
        println!("{k:<24} {v}");
    }
    w.table("volume", &columns, &[cells], &[&row])?;
    Ok(())
}

const FIT_COLUMNS: [&str; 7] =
    ["quantity", "exponent", "coefficient", "uncertainty", "residual_norm", "condition_number", "samples"];

fn fit_rows(name: &str, fit: &ExpansionFit) -> Vec<Vec<String>> {
    (0..fit.exponents.len())
        .map(|k| {
            vec![
                name.to_string(),
                s(fit.exponents[k]),
                s(fit.coefficients[k]),
                s(fit.uncertainties[k]),
                s(fit.residual_norm),
                s(fit.condition_number),
                fit.radii.len().to_string(),
            ]
        })
        .collect()
}

fn write_dumps(ctx: &Context, w: &mut Writer, surfaces: &[SurfaceGeometry], embeddings: &[EmbeddedSurface]) -> std::io::Result<()> {
    if ctx.config.output.dump_surfaces {
        for (k, s) in surfaces.iter().enumerate() {
            write_surface(w, &format!("surface_{k:02}"), s)?;
        }
    }
    if ctx.config.output.dump_meshes {
        for (k, es) in embeddings.iter().enumerate() {
            write_mesh(w, &format!("mesh_{k:02}"), es)?;
        }
    }
    Ok(())
}

fn small_sphere_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let radii = cfg.ladder.as_ref().expect("resolved").radii();
    let opts = SmallSphereOptions {
        geodesic: cfg.geodesic,
        embedding: ctx.config.embedding.options(),
        guess: ctx.guess_policy(),
        embed: true,
        radial_nodes: cfg.radial_nodes.unwrap_or(0),
    };
    let run = small_sphere_run(ctx.metric(), cfg.center, &radii, ctx.grid.clone(), &opts)?;
    w.table("masses", &MASS_REPORT_COLUMNS, &mass_rows(&run.reports), &run.reports)?;
    write_dumps(ctx, w, &run.surfaces, &run.embeddings)?;
    w.json("theory", &run.theory)?;
    let fits = fit_small_sphere(&run.reports)?;
    let mut rows = Vec::new();
    for (name, fit) in [
        ("m_by", fits.brown_york.as_ref()),
        ("m_h", Some(&fits.hawking)),
        ("area_deficit", Some(&fits.area)),
        ("volume_difference", fits.volume.as_ref()),
    ] {
        if let Some(f) = fit {
            rows.extend(fit_rows(name, f));
        }
    }
    w.table("fits", &FIT_COLUMNS, &rows, &fits)?;
    let report = theorem_report(&run.curvature, &fits, &cfg.tolerances);
    w.table("theorem_report", &quasilocal::expansions::TheoremReport::COLUMNS, &report.csv_records(), &report)?;
    let text = report.to_text();
    w.text("theorem_report.txt", &text)?;
    print!("{text}");
    Ok(())
}

const LIMIT_COLUMNS: [&str; 5] = ["quantity", "limit", "uncertainty", "decay", "predicted"];

fn large_sphere_mode(ctx: &Context, w: &mut Writer) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let radii = cfg.ladder.as_ref().expect("resolved").radii();
    let opts = LargeSphereOptions {
        embedding: cfg.embedding.options(),
        guess: ctx.guess_policy(),
        embed: true,
        adm: true,
        radial_nodes: cfg.radial_nodes.unwrap_or(0),
    };
    let run = large_sphere_run(ctx.metric(), &radii, ctx.grid.clone(), &opts)?;
    w.table("masses", &MASS_REPORT_COLUMNS, &mass_rows(&run.reports), &run.reports)?;
    write_dumps(ctx, w, &run.surfaces, &run.embeddings)?;
    let tau = cfg.decay.expect("resolved");
    let mass = cfg.entry_adm_mass();
    let fits = fit_large_sphere(&run.reports, tau, mass)?;
    let limits: Vec<(&str, &LimitFit, Option<f64>)> = [
        ("m_by", fits.brown_york.as_ref(), mass),
        ("m_h", Some(&fits.hawking), None),
        ("adm_partial", fits.adm.as_ref(), mass),
        ("iso_term", fits.isoperimetric.as_ref(), mass),
        ("volume_difference_over_r2", fits.volume_ratio.as_ref(), fits.predicted_volume_ratio),
    ]
    .into_iter()
    .filter_map(|(n, l, p)| l.map(|l| (n, l, p)))
    .collect();
    println!("{:<26} {:>14} {:>10} {:>6} {:>14}", "quantity", "limit", "uncert", "decay", "predicted");
    for (name, l, p) in &limits {
        let p = p.map(|p| format!("{p:.7e}")).unwrap_or_default();
        println!("{name:<26} {:>14.7e} {:>10.2e} {:>6.3} {p:>14}", l.limit, l.uncertainty, l.decay);
    }
    let rows: Vec<Vec<String>> = limits
        .iter()
        .map(|(name, l, p)| {
            vec![name.to_string(), s(l.limit), s(l.uncertainty), s(l.decay), p.map(s).unwrap_or_default()]
        })
        .collect();
    w.table("limits", &LIMIT_COLUMNS, &rows, &fits)?;
    Ok(())
}
