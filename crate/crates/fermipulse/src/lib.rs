//! Quantum degeneracy, two-electron interference and Coulomb-repulsion
//! estimates for pulsed nanotip electron sources.
//!
//! The crate evaluates closed-form expressions for the time-dependent
//! degeneracy of a pulsed electron source (one-electron, symmetric and
//! antisymmetric two-electron contributions), position-space detection
//! statistics up to the two-detector coincidence level, a classical
//! estimate of Coulomb repulsion between the two emitted electrons, and a
//! one-parameter fit that resolves the one- and two-electron weights of
//! the source from single-detector click data. Every closed form is
//! arbitrated by a brute-force momentum-space quadrature oracle in
//! [`oracle`].

pub mod constants;
pub mod coulomb;
pub mod degeneracy;
pub mod detection;
pub mod estimation;
pub mod figures;
pub mod oracle;
pub mod runconfig;
pub mod specfun;
pub mod statemodel;
pub mod validate;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input outside the declared accuracy range of a special function.
    #[error("range error: {0}")]
    Range(String),
    /// A numerical procedure failed to converge or produced an
    /// inconsistent result.
    #[error("numerics error: {0}")]
    Numerics(String),
    /// Bad run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
