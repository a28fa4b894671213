use std::fmt::Write;

use serde::Serialize;

use crate::conic::{ClarabelBackend, ConicBackend, SolveStatus, SolverConfig};
use crate::diagnostics::gap_percent;
use crate::netcase::NetworkCase;

use super::{relaxation_kind, solve_relaxation, RelaxArg};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCell {
    pub relaxation: String,
    /// Solver status, `unsupported` when the backend cannot handle the
    /// relaxation, or `error` when building failed.
    pub status: String,
    pub objective: Option<f64>,
    pub gap_percent: Option<f64>,
    pub solve_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub case_name: String,
    pub reference: f64,
    pub cells: Vec<GapCell>,
}

fn arg_name(r: RelaxArg) -> &'static str {
    match r {
        RelaxArg::Pm => "pm",
        RelaxArg::Kim => "kim",
        RelaxArg::Sdp => "sdp",
    }
}

/// One row per case, one cell per requested relaxation.
pub fn run_table(
    cases: &[(NetworkCase, f64)],
    relaxations: &[RelaxArg],
    thetas: &[f64],
    r: f64,
) -> Vec<TableRow> {
    let backend = ClarabelBackend;
    let cfg = SolverConfig::default();
    cases
        .iter()
        .map(|(case, reference)| {
            let cells = relaxations
                .iter()
                .map(|&relax| {
                    let name = arg_name(relax).to_string();
                    let empty = |status: &str| GapCell {
                        relaxation: name.clone(),
                        status: status.to_string(),
                        objective: None,
                        gap_percent: None,
                        solve_time_s: None,
                    };
                    if relax == RelaxArg::Sdp && !backend.supports_psd() {
                        return empty("unsupported");
                    }
                    let kind = relaxation_kind(relax, thetas, r);
                    match solve_relaxation(case, &kind, &cfg) {
                        Ok((_, sol)) => {
                            let optimal = sol.status == SolveStatus::Optimal;
                            GapCell {
                                relaxation: name.clone(),
                                status: sol.status.to_string(),
                                objective: optimal.then_some(sol.objective),
                                gap_percent: if optimal {
                                    gap_percent(sol.objective, *reference).ok()
                                } else {
                                    None
                                },
                                solve_time_s: Some(sol.solve_time_s),
                            }
                        }
                        Err(_) => empty("error"),
                    }
                })
                .collect();
            TableRow {
                case_name: case.name.clone(),
                reference: *reference,
                cells,
            }
        })
        .collect()
}

pub fn table_json(rows: &[TableRow]) -> String {
    serde_json::to_string_pretty(rows).expect("table rows are always serializable") + "\n"
}

pub fn table_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    let _ = write!(out, "{:<24} {:>12}", "case", "reference");
    for c in &first.cells {
        let _ = write!(out, " {:>12}", format!("{} gap%", c.relaxation));
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{:<24} {:>12.2}", row.case_name, row.reference);
        for c in &row.cells {
            let cell = match c.gap_percent {
                // reference objectives carry two decimals, so tiny negatives are rounding
                Some(g) if g.abs() < 0.005 => "0.00".to_string(),
                Some(g) => format!("{g:.2}"),
                None => c.status.clone(),
            };
            let _ = write!(out, " {cell:>12}");
        }
        out.push('\n');
    }
    out
}
