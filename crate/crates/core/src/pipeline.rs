//! Batch driver: run the statement pipeline over a parsed specification,
//! proving lemmas in file order, assuming axioms, and verifying queries.

use std::time::Instant;

use crate::clause::Clause;
use crate::clausegen::initial_clauses;
use crate::lang::ast::{Specification, Statement, StatementKind};
use crate::lang::validate::validate;
use crate::report::{RunReport, StatementReport};
use crate::saturate::{build_sp, inductive_form, Limits, RedundancyBias, SatError, Saturator};
use crate::solve::{Outcome, Solver, Verdict};

#[derive(Debug, Clone)]
pub struct Options {
    pub limits: Limits,
    pub bias: RedundancyBias,
    pub check_depth: usize,
    pub jobs: usize,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            limits: Limits::default(),
            bias: RedundancyBias::default(),
            check_depth: 10,
            jobs: 1,
        }
    }
}

/// Everything the CLI needs to report one statement.
pub struct StatementRun {
    pub statement: Statement,
    pub verdict: Option<Verdict>,
    pub assumed: bool,
    pub saturated_size: usize,
    pub time_ms: u128,
    pub error: Option<String>,
}

pub struct RunResult {
    pub initial: Vec<Clause>,
    pub runs: Vec<StatementRun>,
    pub diagnostics: Vec<String>,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        if !self.diagnostics.is_empty() {
            return 1;
        }
        let mut code = 0;
        for r in &self.runs {
            if r.assumed {
                continue;
            }
            match r.verdict.as_ref().map(|v| v.outcome) {
                Some(Outcome::Proved) => {}
                Some(Outcome::Inconclusive) | None => code = code.max(2),
                Some(Outcome::DisprovedCandidate) => code = code.max(3),
            }
        }
        code
    }

    pub fn report(&self, input: &str) -> RunReport {
        RunReport {
            input: input.to_string(),
            exit_code: self.exit_code(),
            diagnostics: self.diagnostics.clone(),
            statements: self
                .runs
                .iter()
                .map(|r| StatementReport {
                    name: r.statement.name.clone(),
                    kind: r.statement.kind.to_string(),
                    induction: r.statement.induction,
                    outcome: if r.assumed {
                        "assumed".to_string()
                    } else {
                        match (&r.verdict, &r.error) {
                            (Some(v), _) => v.outcome.to_string(),
                            (None, Some(_)) => "inconclusive".to_string(),
                            (None, None) => "skipped".to_string(),
                        }
                    },
                    time_ms: r.time_ms as u64,
                    saturated_clauses: r.saturated_size,
                    ordered_clauses: r
                        .verdict
                        .as_ref()
                        .map(|v| v.counters.ordered_clauses)
                        .unwrap_or(0),
                    resolutions: r
                        .verdict
                        .as_ref()
                        .map(|v| v.counters.resolutions)
                        .unwrap_or(0),
                    failures: r
                        .verdict
                        .as_ref()
                        .map(|v| v.failures.clone())
                        .unwrap_or_default(),
                    note: r.error.clone(),
                })
                .collect(),
        }
    }
}

/// Runs one statement end to end: dedicated saturation (the statement's
/// inductive form participates), then ordered verification.
pub fn run_statement(
    spec: &Specification,
    initial: &[Clause],
    stmt: &Statement,
    proved: &[Statement],
    opts: &Options,
) -> StatementRun {
    let t0 = Instant::now();
    let lemmas: Vec<Statement> = proved.to_vec();
    let inductive: Vec<Statement> = if stmt.induction {
        vec![inductive_form(stmt, &spec.sig)]
    } else {
        Vec::new()
    };
    let sp = build_sp(&lemmas, &inductive, Some(stmt));

    let mut sat = Saturator::new(&spec.sig);
    sat.lemmas = lemmas.clone();
    sat.inductive = inductive.clone();
    sat.sp = sp.clone();
    sat.limits = opts.limits;
    sat.bias = opts.bias;
    let c_sat = match sat.saturate(initial.to_vec()) {
        Ok(c) => c,
        Err(e @ (SatError::ClauseLimit | SatError::StepLimit)) => {
            return StatementRun {
                statement: stmt.clone(),
                verdict: None,
                assumed: false,
                saturated_size: 0,
                time_ms: t0.elapsed().as_millis(),
                error: Some(format!("saturation aborted: {e}")),
            };
        }
    };

    let mut solver = Solver::new(&spec.sig, &c_sat);
    solver.sp = sp;
    solver.lemmas = lemmas;
    solver.limits = opts.limits;
    solver.check_depth = opts.check_depth;
    solver.lemma_mode = stmt.kind == StatementKind::Lemma || stmt.induction;
    let verdict = solver.verify(stmt);

    StatementRun {
        statement: stmt.clone(),
        verdict: Some(verdict),
        assumed: false,
        saturated_size: c_sat.len(),
        time_ms: t0.elapsed().as_millis(),
        error: None,
    }
}

/// The whole pipeline: validation, clause generation, then the statements in
/// file order. Proved lemmas feed forward; axioms are assumed. Consecutive
/// queries may verify in parallel when `jobs > 1` (they never feed forward).
pub fn run(spec: &Specification, opts: &Options) -> RunResult {
    let diags = validate(spec);
    if !diags.is_empty() {
        return RunResult {
            initial: Vec::new(),
            runs: Vec::new(),
            diagnostics: diags.iter().map(|d| d.to_string()).collect(),
        };
    }
    let initial = initial_clauses(spec);
    let mut runs: Vec<StatementRun> = Vec::new();
    let mut proved: Vec<Statement> = Vec::new();

    let mut i = 0;
    while i < spec.statements.len() {
        let stmt = &spec.statements[i];
        match stmt.kind {
            StatementKind::Axiom => {
                proved.push(stmt.clone());
                runs.push(StatementRun {
                    statement: stmt.clone(),
                    verdict: None,
                    assumed: true,
                    saturated_size: 0,
                    time_ms: 0,
                    error: None,
                });
                i += 1;
            }
            StatementKind::Lemma => {
                let run = run_statement(spec, &initial, stmt, &proved, opts);
                let ok = run
                    .verdict
                    .as_ref()
                    .map(|v| v.outcome == Outcome::Proved)
                    .unwrap_or(false);
                if ok {
                    proved.push(stmt.clone());
                }
                runs.push(run);
                i += 1;
            }
            StatementKind::Query => {
                // batch of consecutive queries
                let mut j = i;
                while j < spec.statements.len()
                    && spec.statements[j].kind == StatementKind::Query
                {
                    j += 1;
                }
                let batch: Vec<&Statement> = spec.statements[i..j].iter().collect();
                if opts.jobs > 1 && batch.len() > 1 {
                    let mut slots: Vec<Option<StatementRun>> =
                        (0..batch.len()).map(|_| None).collect();
                    std::thread::scope(|scope| {
                        let proved = &proved;
                        let initial = &initial;
                        let mut handles = Vec::new();
                        for (k, st) in batch.iter().enumerate() {
                            handles.push((
                                k,
                                scope.spawn(move || {
                                    run_statement(spec, initial, st, proved, opts)
                                }),
                            ));
                        }
                        for (k, h) in handles {
                            slots[k] = Some(h.join().expect("statement worker panicked"));
                        }
                    });
                    runs.extend(slots.into_iter().map(|s| s.unwrap()));
                } else {
                    for st in batch {
                        runs.push(run_statement(spec, &initial, st, &proved, opts));
                    }
                }
                i = j;
            }
        }
    }

    RunResult {
        initial,
        runs,
        diagnostics: Vec::new(),
    }
}
