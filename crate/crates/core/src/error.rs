use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is outside the chart domain of {metric}")]
    Domain { metric: String, point: [f64; 3] },

    #[error("metric {metric} is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { metric: String, point: [f64; 3], min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("metric {0} is not asymptotically flat (no decay order)")]
    NotAsymptoticallyFlat(String),

    #[error("radius {radius} exceeds the geodesic-sphere guard {guard}")]
    RadiusGuard { radius: f64, guard: f64 },

    #[error("geodesic integration failed at node {node} (radius {radius}): {reason}")]
    Ode { node: usize, radius: f64, reason: String },

    #[error("induced metric degenerate at node {node} (radius {radius}); conjugate point nearby")]
    ConjugatePoint { node: usize, radius: f64 },

    #[error("Gauss curvature gate failed: min K = {min_k:e} at node {node}, max K = {max_k:e}")]
    GaussCurvatureGate { node: usize, min_k: f64, max_k: f64 },

    #[error("embedding did not converge after {iterations} iterations (residual {residual:e})")]
    EmbeddingNotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        surface: Box<crate::embedding::EmbeddedSurface>,
    },

    #[error("embedding normal equations singular beyond the gauge null space")]
    EmbeddingRankDeficient,

    #[error("embedded surface orientation is inward (signed volume {0:e})")]
    Orientation(f64),

    #[error("surface grids do not match ({0} vs {1} nodes)")]
    GridMismatch(usize, usize),

    #[error("area measure {0} unavailable for this surface")]
    MeasureUnavailable(&'static str),

    #[error("least-squares design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("ladder too narrow: {0}")]
    LadderSpan(String),

    #[error("at radius {radius}: {source}")]
    AtRadius {
        radius: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the radius of the sphere being processed.
    pub fn at_radius(self, radius: f64) -> Self {
        match self {
            e @ Error::AtRadius { .. } => e,
            e => Error::AtRadius { radius, source: Box::new(e) },
        }
    }

    /// The underlying error with any radius context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtRadius { source, .. } => source.root(),
            e => e,
        }
    }
}
