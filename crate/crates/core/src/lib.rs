//! Numerical quasi-local mass toolkit for Riemannian 3-manifolds.
//!
//! The pipeline runs from chart metrics ([`metric`], [`catalog`]) through
//! exact Taylor-jet curvature ([`jet`], [`curvature`]) to sampled spheres
//! ([`sphere`]), their Euclidean isometric images ([`embedding`]), the mass
//! functionals ([`masses`]) and asymptotic-coefficient extraction
//! ([`expansions`]).

pub mod catalog;
pub mod curvature;
pub mod embedding;
pub mod error;
pub mod expansions;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod masses;
pub mod metric;
pub mod pipeline;
pub mod ode;
pub mod sphere;

pub use error::{Error, Result};
