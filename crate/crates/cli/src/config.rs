//! Run configuration: TOML schema, field-level validation and default
//! resolution.
//!
//! Every field is optional except `metric`. Validation collects one message
//! per invalid field and never runs numerics; [`RunConfig::resolve`] then
//! fills the defaults that depend on the selected entry and mode.

use std::path::PathBuf;

use quasilocal::catalog::CatalogSpec;
use quasilocal::embedding::{EmbeddingOptions, InitialGuess};
use quasilocal::pipeline::{Ladder, ReportTolerances};
use quasilocal::sphere::GeodesicOptions;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Curvature,
    #[serde(alias = "single-surface")]
    Surface,
    #[serde(alias = "embed-only")]
    Embed,
    Mass,
    #[default]
    SmallSphere,
    LargeSphere,
    Volume,
}

impl Mode {
    fn uses_ladder(self) -> bool {
        matches!(self, Mode::SmallSphere | Mode::LargeSphere)
    }

    fn uses_radius(self) -> bool {
        matches!(self, Mode::Surface | Mode::Embed | Mode::Mass | Mode::Volume)
    }
}

/// Geodesic spheres about `center`, or coordinate spheres `|x| = r` of an
/// asymptotically flat chart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceChoice {
    #[default]
    Geodesic,
    Coordinate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => Err(format!("format must be csv, json or both, got {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Embedding solver settings. `degree` defaults to 12 for geodesic spheres
/// and 8 for coordinate spheres; without `initial_guess` the solver starts
/// from the normal-coordinate support function (geodesic spheres) or the
/// chart positions (coordinate spheres).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub degree: Option<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_gate_margin")]
    pub gate_margin: f64,
    pub initial_guess: Option<InitialGuess>,
}

fn default_tolerance() -> f64 {
    EmbeddingOptions::default().tolerance
}
fn default_max_iterations() -> usize {
    EmbeddingOptions::default().max_iterations
}
fn default_damping() -> f64 {
    EmbeddingOptions::default().damping
}
fn default_gate_margin() -> f64 {
    EmbeddingOptions::default().gate_margin
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            degree: None,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            damping: default_damping(),
            gate_margin: default_gate_margin(),
            initial_guess: None,
        }
    }
}

impl EmbeddingConfig {
    pub fn options(&self) -> EmbeddingOptions {
        EmbeddingOptions {
            degree: self.degree.unwrap_or(12),
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            damping: self.damping,
            initial_guess: self.initial_guess.clone().unwrap_or(InitialGuess::Round),
            gate_margin: self.gate_margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    /// Write per-node surface tables (`θ, φ, x, H, K, dΣ`).
    #[serde(default)]
    pub dump_surfaces: bool,
    /// Write per-node embedded meshes (`θ, φ, X, H₀, X·n₀`).
    #[serde(default)]
    pub dump_meshes: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), format: Format::Csv, dump_surfaces: false, dump_meshes: false }
    }
}

/// A complete run description. After [`RunConfig::resolve`] every optional
/// field that the selected mode uses is filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub metric: CatalogSpec,
    pub center: [f64; 3],
    pub surface: SurfaceChoice,
    /// Sphere radius for the single-surface modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Radii for the ladder modes; small-sphere ladders default to the
    /// curvature length at the center.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Ladder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Radial Gauss–Legendre nodes for volumes (0 disables volumes).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_nodes: Option<usize>,
    /// Decay exponent for large-sphere limits; defaults to the entry's τ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    pub geodesic: GeodesicOptions,
    pub embedding: EmbeddingConfig,
    pub tolerances: ReportTolerances,
    pub output: OutputConfig,
}

const KEYS: [&str; 13] = [
    "mode",
    "metric",
    "center",
    "surface",
    "radius",
    "ladder",
    "grid",
    "radial_nodes",
    "decay",
    "geodesic",
    "embedding",
    "tolerances",
    "output",
];

fn field<T: DeserializeOwned>(table: &toml::Table, key: &str, errs: &mut Vec<String>) -> Option<T> {
    let value = table.get(key)?.clone();
    match value.try_into::<T>() {
        Ok(v) => Some(v),
        Err(e) => {
            errs.push(format!("{key}: {}", e.message().trim()));
            None
        }
    }
}

/// Parse TOML text into a table, reporting syntax errors.
pub fn parse_table(text: &str) -> Result<toml::Table, Vec<String>> {
    text.parse().map_err(|e: toml::de::Error| vec![e.message().trim().to_string()])
}

/// Geodesic options with every field optional.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodesicConfig {
    tolerance: Option<f64>,
    min_steps: Option<usize>,
    max_steps: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesConfig {
    leading: Option<f64>,
    subleading: Option<f64>,
    zero_floor: Option<f64>,
}

fn positive(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        errs.push(format!("{name}: must be positive and finite, got {v}"));
    }
}

impl RunConfig {
    /// Parse and validate; returns every problem found.
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        Self::from_table(&parse_table(text)?)
    }

    /// Typed configuration from an already-parsed TOML table.
    pub fn from_table(table: &toml::Table) -> Result<Self, Vec<String>> {
        let table = table.clone();
        let mut errs = Vec::new();
        for key in table.keys() {
            if !KEYS.contains(&key.as_str()) {
                errs.push(format!("{key}: unknown field"));
            }
        }
        let mode = field(&table, "mode", &mut errs).unwrap_or_default();
        let metric: Option<CatalogSpec> = field(&table, "metric", &mut errs);
        if !table.contains_key("metric") {
            errs.push("metric: missing (a catalog entry such as { name = \"euclidean\" })".into());
        }
        let center = field(&table, "center", &mut errs).unwrap_or([0.0; 3]);
        let surface = field(&table, "surface", &mut errs).unwrap_or_default();
        let radius = field(&table, "radius", &mut errs);
        let ladder = field(&table, "ladder", &mut errs);
        let grid = field(&table, "grid", &mut errs);
        let radial_nodes = field(&table, "radial_nodes", &mut errs);
        let decay = field(&table, "decay", &mut errs);
        let geodesic = field::<GeodesicConfig>(&table, "geodesic", &mut errs).map_or_else(GeodesicOptions::default, |g| {
            let d = GeodesicOptions::default();
            GeodesicOptions {
                tolerance: g.tolerance.unwrap_or(d.tolerance),
                min_steps: g.min_steps.unwrap_or(d.min_steps),
                max_steps: g.max_steps.unwrap_or(d.max_steps),
            }
        });
        let embedding = field(&table, "embedding", &mut errs).unwrap_or_default();
        let tolerances = field::<TolerancesConfig>(&table, "tolerances", &mut errs).map_or_else(
            ReportTolerances::default,
            |t| {
                let d = ReportTolerances::default();
                ReportTolerances {
                    leading: t.leading.unwrap_or(d.leading),
                    subleading: t.subleading.unwrap_or(d.subleading),
                    zero_floor: t.zero_floor.unwrap_or(d.zero_floor),
                }
            },
        );
        let output = field(&table, "output", &mut errs).unwrap_or_default();
        let Some(metric) = metric else {
            return Err(errs);
        };
        let config = RunConfig {
            mode,
            metric,
            center,
            surface,
            radius,
            ladder,
            grid,
            radial_nodes,
            decay,
            geodesic,
            embedding,
            tolerances,
            output,
        };
        errs.extend(config.validate());
        if errs.is_empty() {
            Ok(config)
        } else {
            Err(errs)
        }
    }

    /// Semantic checks on an already-typed configuration.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = self.metric.validate();
        if self.center.iter().any(|c| !c.is_finite()) {
            errs.push(format!("center: must be finite, got {:?}", self.center));
        }
        let coordinate = self.uses_coordinate_spheres();
        if coordinate && !self.metric.is_asymptotically_flat() {
            errs.push(format!(
                "surface: coordinate spheres need an asymptotically flat entry, {} is not",
                metric_name(&self.metric)
            ));
        }
        if self.mode == Mode::SmallSphere && self.surface == SurfaceChoice::Coordinate {
            errs.push("surface: small-sphere mode uses geodesic spheres".into());
        }
        if self.mode.uses_radius() {
            match self.radius {
                Some(r) => positive(&mut errs, "radius", r),
                None => errs.push(format!("radius: required in {} mode", mode_name(self.mode))),
            }
        }
        if let Some(l) = &self.ladder {
            errs.extend(l.validate());
        }
        if let Some(n) = self.radial_nodes {
            if self.mode == Mode::Volume && n == 0 {
                errs.push("radial_nodes: volume mode needs at least one radial node".into());
            }
            let wants_volume = n > 0 && (self.mode == Mode::Volume || self.mode.uses_ladder());
            if wants_volume && coordinate && !self.metric_is_regular_inside() {
                errs.push(format!(
                    "radial_nodes: {} is singular inside its coordinate spheres; use a capped entry or radial_nodes = 0",
                    metric_name(&self.metric)
                ));
            }
        } else if self.mode == Mode::Volume && coordinate && !self.metric_is_regular_inside() {
            errs.push(format!(
                "metric: volume mode on coordinate spheres needs an entry that is regular inside, {} is not",
                metric_name(&self.metric)
            ));
        }
        if let Some(d) = self.decay {
            positive(&mut errs, "decay", d);
        }
        let g = &self.geodesic;
        positive(&mut errs, "geodesic.tolerance", g.tolerance);
        if g.min_steps == 0 || g.max_steps < g.min_steps {
            errs.push(format!("geodesic: need 1 ≤ min_steps ≤ max_steps, got {} and {}", g.min_steps, g.max_steps));
        }
        let opts = EmbeddingOptions { degree: self.embedding_degree(), ..self.embedding.options() };
        errs.extend(opts.validate().into_iter().map(|e| format!("embedding: {e}")));
        if let Some(grid) = self.grid {
            let l = self.embedding_degree();
            if grid.n_theta < 2 || grid.n_phi < 3 {
                errs.push(format!("grid: need n_theta ≥ 2 and n_phi ≥ 3, got {}×{}", grid.n_theta, grid.n_phi));
            } else if grid.n_theta < l + 1 || grid.n_phi < 2 * l + 1 {
                errs.push(format!(
                    "grid: {}×{} cannot resolve embedding degree {l} (need n_theta ≥ {}, n_phi ≥ {})",
                    grid.n_theta,
                    grid.n_phi,
                    l + 1,
                    2 * l + 1
                ));
            }
        }
        let t = &self.tolerances;
        positive(&mut errs, "tolerances.leading", t.leading);
        positive(&mut errs, "tolerances.subleading", t.subleading);
        positive(&mut errs, "tolerances.zero_floor", t.zero_floor);
        errs
    }

    pub fn uses_coordinate_spheres(&self) -> bool {
        self.mode == Mode::LargeSphere || (self.mode != Mode::SmallSphere && self.surface == SurfaceChoice::Coordinate)
    }

    fn metric_is_regular_inside(&self) -> bool {
        !matches!(self.metric, CatalogSpec::Schwarzschild { .. })
    }

    pub fn embedding_degree(&self) -> usize {
        self.embedding.degree.unwrap_or(if self.uses_coordinate_spheres() { 8 } else { 12 })
    }

    /// Decay order τ of the entry, used for large-sphere limits.
    pub fn entry_decay(&self) -> f64 {
        match self.metric {
            CatalogSpec::AfPerturbation { tau, .. } => tau,
            _ => 1.0,
        }
    }

    /// ADM mass of the entry when it is finite and known in closed form.
    pub fn entry_adm_mass(&self) -> Option<f64> {
        match self.metric {
            CatalogSpec::Euclidean => Some(0.0),
            CatalogSpec::Schwarzschild { m } | CatalogSpec::CappedSchwarzschild { m, .. } => Some(m),
            CatalogSpec::AfPerturbation { m, tau: 1.0, .. } => Some(m),
            _ => None,
        }
    }

    /// Fill every default that depends only on the configuration itself.
    pub fn resolve(&mut self) {
        let degree = self.embedding_degree();
        self.embedding.degree = Some(degree);
        if self.grid.is_none() {
            self.grid = Some(GridConfig { n_theta: 2 * degree + 2, n_phi: 4 * degree + 4 });
        }
        if self.mode == Mode::LargeSphere && self.ladder.is_none() {
            self.ladder = Some(Ladder::large_sphere_default());
        }
        if self.radial_nodes.is_none() {
            let coordinate = self.uses_coordinate_spheres();
            self.radial_nodes = Some(match self.mode {
                Mode::SmallSphere => 8,
                Mode::Volume if coordinate => 16,
                Mode::Volume => 8,
                Mode::LargeSphere if self.metric_is_regular_inside() => 16,
                _ => 0,
            });
        }
        if self.mode == Mode::LargeSphere && self.decay.is_none() {
            self.decay = Some(self.entry_decay());
        }
    }

    /// Canonical TOML text of this configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

pub fn mode_name(mode: Mode) -> String {
    serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn metric_name(spec: &CatalogSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("name").and_then(|n| n.as_str()).map(String::from))
        .unwrap_or_default()
}
