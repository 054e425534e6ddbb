//! The registered curriculum algorithms.

pub mod alp;
pub mod cl;
pub mod code;
pub mod dr;
pub mod minimax;
pub mod paired;
