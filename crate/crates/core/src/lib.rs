//! Termination proofs for higher-order rewrite systems via static dependency
//! pairs.

pub mod accessibility;
pub mod certificate;
pub mod filtering;
pub mod order;
pub mod par;
pub mod parse;
pub mod prover;
pub mod rewrite;
pub mod static_dp;
pub mod subst;
pub mod subterm;
pub mod term;
pub mod types;
pub mod usable;
