//! Data-driven reachability analysis with matrix zonotopes, plus orthogonal
//! basis selection for tighter Girard order reduction.

pub mod error;
pub mod identify;
pub mod numerics;
pub mod projsel;
pub mod propagate;
pub mod reduction;
pub mod sets;
pub mod volume;

pub mod serde_matrix;

pub use error::{Error, Result};
pub use identify::{DataSet, IdentifiedModel, TrueSystem};
pub use numerics::{Matrix, Rng, Vector};
pub use propagate::{ReachRun, RunConfig};
pub use sets::{ConstrainedZonotope, MatrixZonotope, MzGenerators, ReachSet, Zonotope};
pub use volume::{VolumeMethod, VolumeResult};
