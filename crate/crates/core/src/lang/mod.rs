//! Input specification language: parsing, validation, printing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod validate;

pub use ast::{Conjunct, Pattern, Process, Specification, Statement, StatementKind, UserClause};
pub use parser::{parse, Diagnostic};
pub use pretty::print_spec;
pub use validate::validate;
