//! JSON run report; the schema ships in `docs/report.schema.json`.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct StatementReport {
    pub name: String,
    pub kind: String,
    pub induction: bool,
    /// proved | disproved-candidate | inconclusive | assumed | skipped
    pub outcome: String,
    pub time_ms: u64,
    pub saturated_clauses: usize,
    pub ordered_clauses: usize,
    pub resolutions: usize,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub input: String,
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
    pub statements: Vec<StatementReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// One human-readable line per statement.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&format!("error: {d}\n"));
        }
        for s in &self.statements {
            out.push_str(&format!(
                "{:<12} {:<28} {:<20} {:>6} ms  (saturated {}, ordered {}, resolutions {})\n",
                s.kind,
                s.name,
                if s.induction {
                    format!("{} [induction]", s.outcome)
                } else {
                    s.outcome.clone()
                },
                s.time_ms,
                s.saturated_clauses,
                s.ordered_clauses,
                s.resolutions
            ));
        }
        out
    }
}
