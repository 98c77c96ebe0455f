//! Topological summaries of point patterns.
//!
//! Point patterns are turned into alpha filtrations, persistence diagrams,
//! and gridded rank functions. Rank functions live in a weighted L2 space
//! where they can be averaged, decomposed by functional PCA, and used as
//! the statistic of a Monte-Carlo test of complete spatial randomness.

pub mod csr;
pub mod error;
pub mod fpca;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod persistence;
pub mod pointproc;
pub mod rankspace;

pub use error::{Error, Result};
pub use geometry::{alpha_filtration, FilteredComplex, PointPattern, Simplex, Window};
pub use persistence::{compute_persistence, DiagramPoint, PersistenceDiagram};
pub use rankspace::{rank_from_diagram, Grid, RankFunction, WeightFunction};
