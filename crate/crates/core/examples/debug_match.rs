use hornsat_core::clause::{Clause, Provenance};
use hornsat_core::fact::Fact;
use hornsat_core::formula::Formula;
use hornsat_core::lang::parse;
use hornsat_core::saturate::{build_sp, inductive_form, Saturator};
use hornsat_core::term::{Term, Var};

fn v(n: &str, id: u64) -> Term {
    Term::Var(Var {
        name: n.into(),
        id,
        sort: None,
    })
}

fn main() {
    let spec = parse(hornsat_core::models::HASH_LIST_INTERFACE).unwrap();
    let p5 = spec.statements[4].clone();
    let ind = inductive_form(&p5, &spec.sig);
    println!("inductive premises:");
    for p in &ind.premises {
        println!("  {p}");
    }
    println!("inductive conclusion: {}", ind.conclusion[0].facts[0]);

    // VPE-step: vpe(makepe(l),h1,h2) -> vpe(makepe(cons(R,l)),h1,H(R,h2))
    let l = v("l", 1);
    let h1 = v("h1", 2);
    let h2 = v("h2", 3);
    let r = v("R", 4);
    let step = Clause::new(
        vec![Fact::pred(
            "verify_pe",
            vec![Term::app("makepe", vec![l.clone()]), h1.clone(), h2.clone()],
        )],
        Formula::default(),
        Fact::pred(
            "verify_pe",
            vec![
                Term::app("makepe", vec![Term::app("cons", vec![r.clone(), l])]),
                h1,
                Term::app("H", vec![r, h2]),
            ],
        ),
        Provenance::UserClause(3),
    );
    let mut sat = Saturator::new(&spec.sig);
    sat.sp = build_sp(&[], &[ind.clone()], Some(&p5));
    match sat.apply_lemma(&step, &ind, true) {
        Some(products) => {
            println!("APPLIED (bug):");
            for p in products {
                println!("  {p}");
            }
        }
        None => println!("not applicable (correct)"),
    }
}
