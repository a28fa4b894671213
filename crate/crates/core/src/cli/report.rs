use std::collections::BTreeMap;

use serde::Serialize;

use crate::conic::{SolveStatus, Solution};
use crate::diagnostics::{
    activity_report, gap_percent, triangle_diagnostics, DiagnosticsError, TriangleDiagnostics,
};
use crate::netcase::NetworkCase;
use crate::wopf::{Relaxation, RelaxationKind};
use crate::PGLIB_VERSION;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FamilyActivity {
    pub total: usize,
    pub active: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ActivitySummary {
    pub tol: f64,
    pub total: usize,
    pub active: usize,
    /// Counts keyed by the first label segment (`pm`, `kim`, `thermal`, ...).
    pub families: BTreeMap<String, FamilyActivity>,
    /// Labels of active Kim cones.
    pub active_kim: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub case_name: String,
    pub relaxation: RelaxationKind,
    pub status: SolveStatus,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_percent: Option<f64>,
    pub solve_time_s: f64,
    pub iterations: u32,
    pub triangles: Vec<TriangleDiagnostics>,
    pub activity: ActivitySummary,
    pub backend: String,
    pub pglib_version: String,
}

impl SolveReport {
    pub fn new(
        case: &NetworkCase,
        rel: &Relaxation,
        sol: &Solution,
        reference: Option<f64>,
        tol: f64,
        backend: &str,
    ) -> Result<Self, DiagnosticsError> {
        let optimal = sol.status == SolveStatus::Optimal;
        let gap = match reference {
            Some(r) if optimal => Some(gap_percent(sol.objective, r)?),
            Some(r) => {
                gap_percent(0.0, r)?;
                None
            }
            None => None,
        };
        let (triangles, activity) = if optimal {
            (
                triangle_diagnostics(rel, &sol.x, tol)?,
                summarize(sol, rel, tol),
            )
        } else {
            (Vec::new(), ActivitySummary::default())
        };
        Ok(Self {
            case_name: case.name.clone(),
            relaxation: rel.kind.clone(),
            status: sol.status,
            objective: sol.objective,
            gap_percent: gap,
            solve_time_s: sol.solve_time_s,
            iterations: sol.iterations,
            triangles,
            activity,
            backend: backend.to_string(),
            pglib_version: PGLIB_VERSION.to_string(),
        })
    }
}

fn summarize(sol: &Solution, rel: &Relaxation, tol: f64) -> ActivitySummary {
    let mut s = ActivitySummary {
        tol,
        ..ActivitySummary::default()
    };
    for a in activity_report(sol, &rel.program, tol) {
        let family = a.label.split('/').next().unwrap_or_default().to_string();
        let f = s.families.entry(family.clone()).or_default();
        f.total += 1;
        s.total += 1;
        if a.active {
            f.active += 1;
            s.active += 1;
            if family == "kim" {
                s.active_kim.push(a.label);
            }
        }
    }
    s
}
