use std::fmt::Write;

use anyhow::Context;
use rayon::prelude::*;

use crate::conic::{SolveStatus, SolverConfig};
use crate::netcase::NetworkCase;
use crate::wopf::RelaxationKind;

use super::solve_relaxation;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta1: f64,
    pub theta2: f64,
    pub objective: f64,
    pub status: String,
    pub solve_time_s: f64,
}

/// Solves Kim+PM with `thetas = {θ₁, θ₂}` on a `grid × grid` lattice over
/// `[lo, hi)²`. Rows are ordered by `θ₁`, then `θ₂`.
pub fn run_sweep(
    case: &NetworkCase,
    grid: usize,
    (lo, hi): (f64, f64),
    r: f64,
    jobs: Option<usize>,
) -> anyhow::Result<Vec<SweepRow>> {
    let step = (hi - lo) / grid as f64;
    let points: Vec<(f64, f64)> = (0..grid)
        .flat_map(|a| (0..grid).map(move |b| (lo + a as f64 * step, lo + b as f64 * step)))
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().context("cannot start the worker pool")?;
    let cfg = SolverConfig::default();

    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(t1, t2)| {
                let kind = RelaxationKind::KimPmSoc {
                    thetas: vec![t1, t2],
                    r,
                };
                let (objective, status, solve_time_s) =
                    match solve_relaxation(case, &kind, &cfg) {
                        Ok((_, sol)) => (sol.objective, sol.status.to_string(), sol.solve_time_s),
                        Err(e) => (f64::NAN, format!("error: {e}").replace(',', ";"), 0.0),
                    };
                SweepRow {
                    theta1: t1,
                    theta2: t2,
                    objective,
                    status,
                    solve_time_s,
                }
            })
            .collect()
    });
    Ok(rows)
}

/// Largest objective among optimal rows; ties go to the smallest `(θ₁, θ₂)`.
pub fn best_point(rows: &[SweepRow]) -> Option<&SweepRow> {
    let optimal = SolveStatus::Optimal.as_str();
    rows.iter()
        .filter(|r| r.status == optimal && r.objective.is_finite())
        .fold(None, |best: Option<&SweepRow>, r| match best {
            None => Some(r),
            Some(b) if r.objective > b.objective => Some(r),
            Some(b) if r.objective == b.objective && (r.theta1, r.theta2) < (b.theta1, b.theta2) => {
                Some(r)
            }
            keep => keep,
        })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str("# objective: relaxation objective in $/h (lower bound on the AC optimum); gap% = 100*(ref-objective)/ref\n");
    out.push_str("theta1,theta2,objective,status,solve_time_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{},{:.4}",
            r.theta1, r.theta2, r.objective, r.status, r.solve_time_s
        );
    }
    match best_point(rows) {
        Some(b) => {
            let _ = writeln!(out, "# best,{:.6},{:.6},{:.6}", b.theta1, b.theta2, b.objective);
        }
        None => out.push_str("# best,none\n"),
    }
    out
}
