//! Core library for a compositional environment-design laboratory.
//!
//! A generator policy assembles tasks out of small building blocks: web pages
//! built from form-filling primitives, or gridworlds built from subtasks. A
//! population of learner agents trains on whatever the generator emits. The
//! pieces here are deliberately self-contained: an f64 tape autodiff engine
//! (`nn`), a colored Petri-net task formalism (`petri`), the two concrete
//! environment families (`webenv`, `gridenv`), the two policies (`generator`,
//! `learner`), and exact chain-walk reachability math (`chain`).
//!
//! Everything is deterministic given a seed: RNG streams are split by label,
//! not shared, so results do not depend on scheduling or iteration order.

pub mod chain;
pub mod generator;
pub mod gridenv;
pub mod learner;
pub mod nn;
pub mod petri;
pub mod rng;
pub mod webenv;

use thiserror::Error;

/// Crate-wide error taxonomy. Variants mirror the failure classes the
/// operations can actually hit; messages carry the offending values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("net structure error: {0}")]
    Structure(String),
    #[error("invalid design: {0}")]
    Design(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("numeric fault: {0}")]
    Numeric(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
