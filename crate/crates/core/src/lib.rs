//! A saturation-based Horn-clause verifier for security protocols, with
//! user-defined predicates allowed in the premises and conclusions of lemmas,
//! axioms and inductive proofs, plus bundled transparency-log models.

pub mod clause;
pub mod eval;
pub mod fact;
pub mod formula;
pub mod lang;
pub mod sig;
pub mod term;

pub mod clausegen;
pub mod models;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod saturate;
pub mod solve;
