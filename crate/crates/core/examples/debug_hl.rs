use hornsat_core::clausegen::initial_clauses;
use hornsat_core::lang::parse;
use hornsat_core::models;
use hornsat_core::pipeline::{run_statement, Options};
use hornsat_core::saturate::Limits;

fn main() {
    let which: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let model = std::env::args().nth(2).unwrap_or_else(|| "hash".into());
    let spec = parse(match model.as_str() {
        "merkle" => models::MERKLE_TREE_INTERFACE,
        "td" => models::TRANSPARENT_DECRYPTION_INTERFACE,
        "tdc" => models::TRANSPARENT_DECRYPTION_HASH_LIST,
        _ => models::HASH_LIST_INTERFACE,
    })
    .unwrap();
    let initial = initial_clauses(&spec);
    if std::env::var("DUMP").is_ok() {
        println!("== initial clauses ({}):", initial.len());
        for c in &initial {
            println!("  [{}] {}", c.provenance, c);
        }
    }
    let mut opts = Options::default();
    opts.limits = Limits {
        max_clauses: std::env::var("MAXC").ok().and_then(|s| s.parse().ok()).unwrap_or(500),
        max_steps: std::env::var("MAXS").ok().and_then(|s| s.parse().ok()).unwrap_or(2000),
    };
    if std::env::var("PIPE").is_ok() {
        let t0 = std::time::Instant::now();
        let result = hornsat_core::pipeline::run(&spec, &opts);
        for r in &result.runs {
            println!(
                "{}: {} ({} ms, sat {}, ordered {})",
                r.statement.name,
                if r.assumed {
                    "assumed".into()
                } else {
                    r.verdict
                        .as_ref()
                        .map(|v| format!("{:?}", v.outcome))
                        .unwrap_or_else(|| format!("{:?}", r.error))
                },
                r.time_ms,
                r.saturated_size,
                r.verdict.as_ref().map(|v| v.counters.ordered_clauses).unwrap_or(0),
            );
        }
        println!("exit: {} in {} ms", result.exit_code(), t0.elapsed().as_millis());
        return;
    }
    let stmt = &spec.statements[which];
    {
        use hornsat_core::saturate::{build_sp, inductive_form, Saturator};
        let inductive = if stmt.induction {
            vec![inductive_form(stmt, &spec.sig)]
        } else {
            Vec::new()
        };
        let sp = build_sp(&[], &inductive, Some(stmt));
        let mut sat = Saturator::new(&spec.sig);
        sat.inductive = inductive;
        sat.sp = sp;
        sat.limits = opts.limits;
        if std::env::var("DUMP").is_ok() {
            match sat.saturate(initial.clone()) {
                Ok(c_sat) => {
                    println!("== saturated set ({}):", c_sat.len());
                    for c in &c_sat {
                        println!("  [{}] {}", c.provenance, c);
                    }
                }
                Err(e) => println!("saturation error: {e}"),
            }
        }
    }
    println!("== verifying {} (induction={})", stmt.name, stmt.induction);
    let r = run_statement(&spec, &initial, stmt, &[], &opts);
    println!("saturated: {} clauses", r.saturated_size);
    match &r.verdict {
        Some(v) => {
            println!("outcome: {:?}", v.outcome);
            println!("counters: {:?}", v.counters);
            for t in v.trace.iter().take(200) {
                println!(
                    "  #{} <- {:?} [{}]{} {}",
                    t.id,
                    t.parent,
                    t.rule,
                    if t.discharged { " DISCHARGED" } else { "" },
                    t.clause
                );
            }
            for f in &v.failures {
                println!("  FAIL: {f}");
            }
        }
        None => println!("error: {:?}", r.error),
    }
}

#[allow(dead_code)]
fn dump_sat() {}
