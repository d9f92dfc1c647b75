//! Command-line driver for the quasilocal toolkit: TOML run configuration,
//! mode dispatch and artifact writing.

pub mod config;
pub mod output;
pub mod run;

use quasilocal::Error;

/// Failure of a CLI run, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    /// 0 success, 1 i/o or internal, 2 configuration, 3 geometry,
    /// 4 embedding, 5 fitting.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e.root() {
                Error::InvalidParameter(_) | Error::NotAsymptoticallyFlat(_) => 2,
                Error::Domain { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::RadiusGuard { .. }
                | Error::Ode { .. }
                | Error::ConjugatePoint { .. }
                | Error::GaussCurvatureGate { .. }
                | Error::Orientation(_) => 3,
                Error::EmbeddingNotConverged { .. } | Error::EmbeddingRankDeficient => 4,
                Error::RankDeficient(_) | Error::LadderSpan(_) => 5,
                _ => 1,
            },
        }
    }
}
