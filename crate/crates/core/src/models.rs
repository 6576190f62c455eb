//! Bundled transparency-log models: hash-list and Merkle-tree clause sets
//! with the P1-P7 interface, and the transparent-decryption case study.
//! Model sources ship under `models/` and are embedded here so they can be
//! loaded by id as well as by path.

use crate::lang::ast::Specification;
use crate::lang::parser::{parse, Diagnostic};

pub const HASH_LIST: &str = include_str!("../../../models/hash_list.hsl");
pub const HASH_LIST_INTERFACE: &str = include_str!("../../../models/hash_list_interface.hsl");
pub const MERKLE_TREE: &str = include_str!("../../../models/merkle_tree.hsl");
pub const MERKLE_TREE_INTERFACE: &str =
    include_str!("../../../models/merkle_tree_interface.hsl");
pub const TRANSPARENT_DECRYPTION_INTERFACE: &str =
    include_str!("../../../models/transparent_decryption_interface.hsl");
pub const TRANSPARENT_DECRYPTION_HASH_LIST: &str =
    include_str!("../../../models/transparent_decryption_hash_list.hsl");

pub const SELFCHECK: &[(&str, &str)] = &[
    ("nil", include_str!("../../../models/selfcheck/nil.hsl")),
    (
        "out_secret",
        include_str!("../../../models/selfcheck/out_secret.hsl"),
    ),
    (
        "generator",
        include_str!("../../../models/selfcheck/generator.hsl"),
    ),
    (
        "decryptor",
        include_str!("../../../models/selfcheck/decryptor.hsl"),
    ),
    (
        "member",
        include_str!("../../../models/selfcheck/member.hsl"),
    ),
];

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model id `{0}`")]
    Unknown(String),
    #[error("model failed to parse: {0}")]
    Parse(#[from] Diagnostic),
}

pub fn model_source(id: &str) -> Option<&'static str> {
    match id {
        "hash_list" => Some(HASH_LIST),
        "hash_list_interface" => Some(HASH_LIST_INTERFACE),
        "merkle_tree" => Some(MERKLE_TREE),
        "merkle_tree_interface" => Some(MERKLE_TREE_INTERFACE),
        "transparent_decryption_interface" => Some(TRANSPARENT_DECRYPTION_INTERFACE),
        "transparent_decryption_hash_list" => Some(TRANSPARENT_DECRYPTION_HASH_LIST),
        _ => None,
    }
}

/// Loads a data-structure model fragment by id (`hash_list` or
/// `merkle_tree`), parsed and ready to merge into a larger specification.
pub fn load_model(id: &str) -> Result<Specification, ModelError> {
    let src = match id {
        "hash_list" => HASH_LIST,
        "merkle_tree" => MERKLE_TREE,
        other => return Err(ModelError::Unknown(other.to_string())),
    };
    Ok(parse(src)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStudyMode {
    /// Inline a concrete data-structure model.
    Concrete,
    /// Declare the log predicates blocking and assume P1-P7 as axioms.
    Interface,
}

/// Builds the transparent-decryption case study.
pub fn build_case_study(name: &str, mode: CaseStudyMode) -> Result<Specification, ModelError> {
    if name != "transparent_decryption" {
        return Err(ModelError::Unknown(name.to_string()));
    }
    let src = match mode {
        CaseStudyMode::Interface => TRANSPARENT_DECRYPTION_INTERFACE,
        CaseStudyMode::Concrete => TRANSPARENT_DECRYPTION_HASH_LIST,
    };
    Ok(parse(src)?)
}
