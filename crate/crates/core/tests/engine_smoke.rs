//! End-to-end engine smoke tests on the bundled data-structure models.

use hornsat_core::lang::parse;
use hornsat_core::models;
use hornsat_core::pipeline::{run, Options};
use hornsat_core::solve::Outcome;

#[test]
fn hash_list_p1_proves() {
    let mut spec = parse(models::HASH_LIST_INTERFACE).unwrap();
    spec.statements.truncate(1);
    let result = run(&spec, &Options::default());
    let v = result.runs[0].verdict.as_ref().unwrap();
    assert_eq!(v.outcome, Outcome::Proved, "failures: {:?}", v.failures);
}

#[test]
fn hash_list_p5_transitivity_proves_by_induction() {
    let mut spec = parse(models::HASH_LIST_INTERFACE).unwrap();
    let p5 = spec.statements[4].clone();
    spec.statements = vec![p5];
    let result = run(&spec, &Options::default());
    let v = result.runs[0].verdict.as_ref().unwrap();
    assert_eq!(v.outcome, Outcome::Proved, "failures: {:?}", v.failures);
}

#[test]
fn hash_list_all_properties_prove() {
    let spec = parse(models::HASH_LIST_INTERFACE).unwrap();
    let result = run(&spec, &Options::default());
    for r in &result.runs {
        let v = r.verdict.as_ref().unwrap();
        assert_eq!(
            v.outcome,
            Outcome::Proved,
            "{} failed: {:?} ({:?})",
            r.statement.name,
            v.failures,
            r.error
        );
    }
    assert_eq!(result.exit_code(), 0);
}
