//! Force decompositions, Fisher information and Hamiltonian structure for
//! reversible and irreversible mean-field jump processes.

pub mod decomposition;
pub mod entropy;
pub mod error;
pub mod flows;
pub mod graph;
pub mod models;
pub mod numeric;
pub mod sampler;

pub use error::{Error, Result};
