//! Parser, validator and pretty-printer integration tests over the bundled
//! model files.

use hornsat_core::lang::{parse, print_spec, validate, StatementKind};
use hornsat_core::models;

fn bundled() -> Vec<(&'static str, &'static str)> {
    let mut v = vec![
        ("hash_list", models::HASH_LIST),
        ("hash_list_interface", models::HASH_LIST_INTERFACE),
        ("merkle_tree", models::MERKLE_TREE),
        ("merkle_tree_interface", models::MERKLE_TREE_INTERFACE),
        (
            "transparent_decryption_interface",
            models::TRANSPARENT_DECRYPTION_INTERFACE,
        ),
        (
            "transparent_decryption_hash_list",
            models::TRANSPARENT_DECRYPTION_HASH_LIST,
        ),
    ];
    v.extend(models::SELFCHECK.iter().copied());
    v
}

#[test]
fn bundled_models_parse_and_validate() {
    for (name, src) in bundled() {
        let spec = parse(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let diags = validate(&spec);
        assert!(diags.is_empty(), "{name}: {diags:?}");
    }
}

#[test]
fn pretty_parse_pretty_is_fixed_point() {
    for (name, src) in bundled() {
        let spec = parse(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_spec(&spec);
        let spec2 = parse(&printed).unwrap_or_else(|e| panic!("{name} reparse: {e}\n{printed}"));
        let printed2 = print_spec(&spec2);
        assert_eq!(printed, printed2, "{name}: pretty/parse not a fixed point");
    }
}

#[test]
fn transitivity_query_parses_to_expected_shape() {
    let spec = parse(models::HASH_LIST_INTERFACE).unwrap();
    let p5 = &spec.statements[4];
    assert_eq!(p5.kind, StatementKind::Query);
    assert!(p5.induction);
    assert_eq!(p5.premises.len(), 2);
    assert_eq!(p5.conclusion.len(), 1);
    assert_eq!(p5.conclusion[0].facts.len(), 1);
    assert_eq!(p5.idx, 1, "both premises are user predicates");
}

#[test]
fn psk_style_lemma_parses() {
    let src = r#"
type key.
fun honest_id(bitstring, bitstring, bitstring): bitstring.
pred psk(bitstring, bitstring, bitstring, bitstring).
clauses forall i:bitstring, k:bitstring, x:bitstring, s:bitstring; psk(i, k, x, s) -> psk(i, k, x, s).
lemma id:bitstring, k:bitstring, x:bitstring, s:bitstring;
  psk(id, k, x, s) ==> attacker(id) || id = honest_id(s, x, k) [induction].
"#;
    let spec = parse(src).unwrap();
    let l = &spec.statements[0];
    assert!(l.induction);
    assert_eq!(l.premises.len(), 1);
    assert_eq!(l.conclusion.len(), 2);
    assert_eq!(l.conclusion[0].facts.len(), 1);
    assert!(l.conclusion[1].facts.is_empty());
    assert_eq!(l.conclusion[1].formula.atoms.len(), 1);
}

#[test]
fn empty_process_parses_to_nil() {
    let spec = parse("free c: channel.\nprocess 0.\n").unwrap();
    assert!(matches!(
        spec.process,
        Some(hornsat_core::lang::Process::Nil)
    ));
}

#[test]
fn validate_rejects_attacker_fact_in_user_clauses() {
    let src = r#"
pred p(bitstring).
clauses forall x:bitstring; attacker(x) -> p(x).
"#;
    let spec = parse(src).unwrap();
    let diags = validate(&spec);
    assert!(diags.iter().any(|d| d.code == "E-CUSER"), "{diags:?}");
}

#[test]
fn validate_rejects_blocking_conclusion() {
    let src = r#"
pred p(bitstring) [block].
pred q(bitstring).
clauses forall x:bitstring; q(x) -> p(x).
"#;
    let spec = parse(src).unwrap();
    let diags = validate(&spec);
    assert!(diags.iter().any(|d| d.code == "E-BLOCKING-CONCL"), "{diags:?}");
}

#[test]
fn validate_rejects_private_names_in_queries() {
    let src = r#"
free c: channel.
free s: bitstring [private].
event E(bitstring).
process out(c, s).
query x:bitstring; event(E(x)) ==> attacker(s).
"#;
    let spec = parse(src).unwrap();
    let diags = validate(&spec);
    assert!(diags.iter().any(|d| d.code == "E-PRIVATE"), "{diags:?}");
}

#[test]
fn well_formed_hash_list_has_no_diagnostics() {
    let spec = parse(models::HASH_LIST).unwrap();
    assert!(validate(&spec).is_empty());
}

#[test]
fn parse_reports_position_on_error() {
    let err = parse("free c channel.").unwrap_err();
    assert_eq!(err.pos.line, 1);
    assert!(err.code.starts_with("E-"));
}

#[test]
fn load_model_by_id() {
    assert!(models::load_model("hash_list").is_ok());
    assert!(models::load_model("merkle_tree").is_ok());
    assert!(matches!(
        models::load_model("nope"),
        Err(models::ModelError::Unknown(_))
    ));
}
