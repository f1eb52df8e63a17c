//! Exact verification toolkit for sphere configurations in CP² # N C̄P² and
//! for fixed-point data of cyclic actions on symplectic Calabi–Yau 4-manifolds.
//!
//! Everything is exact: integer lattices, rational linear feasibility and
//! cyclotomic arithmetic. Floats appear only in diagnostics.

pub mod areafeas;
pub mod config_search;
pub mod cyclotomic;
pub mod gindex;
pub mod lattice;
pub mod sphere_enum;

pub use lattice::{adjunction_genus, canonical_tuple, pair, HClass};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("search bound exhausted: {0}")]
    Bound(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}
