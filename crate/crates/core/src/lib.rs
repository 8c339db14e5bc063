//! Vertex models on the honeycomb torus, their holographic reduction to
//! dimer models on the Fisher graph, and exact and Monte Carlo tools for the
//! resulting measures.

pub mod conditioning;
pub mod config;
pub mod error;
pub mod glauber;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod pfaffian;
pub mod reduction;
pub mod signatures;
pub mod spectral;

pub use conditioning::{conditional_probability, ConditionEvent, ConditionOptions};
pub use config::LocalConfig;
pub use error::{Error, Result};
pub use glauber::{OneTwoParams, Observable};
pub use lattice::{CellWeights, Color, EdgeType, FisherTorus, HoneyTorus, TriangleWeights, Vertex};
pub use model::{FisherFile, ModelFile, VertexModel};
pub use pfaffian::{partition_function, LogValue, PartitionResult};
pub use reduction::{reduce_model, EdgeBases, MatchgateSignature, ReducedCell, Reduction};
pub use signatures::{BaseChange, VertexSignature};
pub use spectral::{Classification, InfiniteTarget, SpectralData};
