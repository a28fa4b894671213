//! [`ConicBackend`] on top of the Clarabel interior-point solver.
//!
//! Clarabel solves `min qᵀx s.t. Ax + s = b, s ∈ K`, so every constraint
//! `expr ∈ cone` is written as a row with `A = −coeffs`, `b = constant`.

use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{AffineExpr, ConicBackend, ConicError, ConicProgram, SolveStatus, Solution, SolverConfig};

use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelBackend;

impl ClarabelBackend {
    pub fn new() -> Self {
        Self
    }
}

#[derive(Default)]
struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn len(&self) -> usize {
        self.b.len()
    }

    /// Appends a row whose slack equals `expr·scale`.
    fn push_expr(&mut self, expr: &AffineExpr, scale: f64) {
        let row = self.len();
        for &(var, c) in expr.simplified().terms() {
            self.i.push(row);
            self.j.push(var.0);
            self.v.push(-c * scale);
        }
        self.b.push(expr.constant_term() * scale);
    }

    /// Appends a row whose slack equals `sign·(a·x) + offset`.
    fn push_coeffs(&mut self, coeffs: &[(super::Var, f64)], sign: f64, offset: f64) {
        let row = self.len();
        for &(var, c) in coeffs {
            self.i.push(row);
            self.j.push(var.0);
            self.v.push(-sign * c);
        }
        self.b.push(offset);
    }
}

struct Lowered {
    a: CscMatrix<f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

fn lower(p: &ConicProgram) -> Lowered {
    let n = p.n_vars();
    let mut rows = Rows::default();
    let mut cones = Vec::new();

    // equalities: variable fixings and linear rows with lower == upper
    let start = rows.len();
    for (k, b) in p.var_bounds().iter().enumerate() {
        if b.lower == b.upper {
            rows.push_coeffs(&[(super::Var(k), 1.0)], 1.0, -b.lower);
        }
    }
    for r in p.linear_rows() {
        if r.lower == r.upper {
            rows.push_coeffs(&r.coeffs, 1.0, -r.lower);
        }
    }
    if rows.len() > start {
        cones.push(SupportedConeT::ZeroConeT(rows.len() - start));
    }

    // one-sided inequalities
    let start = rows.len();
    for (k, b) in p.var_bounds().iter().enumerate() {
        if b.lower == b.upper {
            continue;
        }
        let coeffs = [(super::Var(k), 1.0)];
        if b.lower.is_finite() {
            rows.push_coeffs(&coeffs, 1.0, -b.lower);
        }
        if b.upper.is_finite() {
            rows.push_coeffs(&coeffs, -1.0, b.upper);
        }
    }
    for r in p.linear_rows() {
        if r.lower == r.upper {
            continue;
        }
        if r.lower.is_finite() {
            rows.push_coeffs(&r.coeffs, 1.0, -r.lower);
        }
        if r.upper.is_finite() {
            rows.push_coeffs(&r.coeffs, -1.0, r.upper);
        }
    }
    if rows.len() > start {
        cones.push(SupportedConeT::NonnegativeConeT(rows.len() - start));
    }

    for blk in p.soc_blocks() {
        for e in &blk.exprs {
            rows.push_expr(e, 1.0);
        }
        cones.push(SupportedConeT::SecondOrderConeT(blk.exprs.len()));
    }

    // ‖u‖² ≤ 2 t₁ t₂  ⇔  ‖(u, (t₁−t₂)/√2)‖ ≤ (t₁+t₂)/√2
    for blk in p.rsoc_blocks() {
        let (t1, t2) = (&blk.exprs[0], &blk.exprs[1]);
        rows.push_expr(&(t1.clone() + t2.clone()), FRAC_1_SQRT_2);
        rows.push_expr(&(t1.clone() - t2.clone()), FRAC_1_SQRT_2);
        for e in &blk.exprs[2..] {
            rows.push_expr(e, 1.0);
        }
        cones.push(SupportedConeT::SecondOrderConeT(blk.exprs.len()));
    }

    #[cfg(feature = "sdp")]
    for blk in p.psd_blocks() {
        // Clarabel's triangle ordering (upper, column-major) visits the same
        // entries in the same order as our lower, row-major layout;
        // off-diagonals carry a √2 factor.
        for r in 0..blk.dim {
            for c in 0..=r {
                let e = &blk.entries[super::PsdBlock::entry_index(r, c)];
                let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                rows.push_expr(e, scale);
            }
        }
        cones.push(SupportedConeT::PSDTriangleConeT(blk.dim));
    }

    let m = rows.len();
    Lowered {
        a: CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v),
        b: rows.b,
        cones,
    }
}

fn map_status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalFailure,
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn supports_psd(&self) -> bool {
        cfg!(feature = "sdp")
    }

    fn solve(&self, p: &ConicProgram, cfg: &SolverConfig) -> Result<Solution, ConicError> {
        if !p.psd_blocks().is_empty() && !self.supports_psd() {
            return Err(ConicError::Capability {
                backend: self.name().to_string(),
                what: "psd blocks (built without the `sdp` feature)".to_string(),
            });
        }
        let started = Instant::now();
        let n = p.n_vars();
        let lowered = lower(p);

        let mut q = vec![0.0; n];
        for &(v, c) in p.objective().simplified().terms() {
            q[v.0] += c;
        }
        // Clarabel equilibrates A but is sensitive to the size of q.
        let q_scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if q_scale > 0.0 {
            q.iter_mut().for_each(|v| *v /= q_scale);
        }
        let hessian = CscMatrix::<f64>::zeros((n, n));

        let settings = DefaultSettingsBuilder::default()
            .verbose(cfg.verbose)
            .max_iter(cfg.max_iter)
            .tol_feas(cfg.tol_feas)
            .tol_gap_abs(cfg.tol_gap_abs)
            .tol_gap_rel(cfg.tol_gap_rel)
            .max_step_fraction(cfg.max_step_fraction)
            .build()
            .map_err(|e| ConicError::Backend(e.to_string()))?;

        let mut solver = DefaultSolver::new(
            &hessian,
            &q,
            &lowered.a,
            &lowered.b,
            &lowered.cones,
            settings,
        )
        .map_err(|e| ConicError::Backend(format!("{e:?}")))?;
        solver.solve();

        let sol = &solver.solution;
        let mut status = map_status(sol.status);
        let x = sol.x.clone();
        if status == SolveStatus::Optimal {
            let report = p.check_point(&x, cfg.accept_tol)?;
            if report.max_rel_violation > cfg.accept_tol {
                status = SolveStatus::NumericalFailure;
            }
        }
        let objective = if x.iter().all(|v| v.is_finite()) && x.len() == n {
            p.objective_value(&x)
        } else {
            f64::NAN
        };
        Ok(Solution {
            status,
            objective,
            x,
            solve_time_s: started.elapsed().as_secs_f64(),
            iterations: sol.iterations,
        })
    }
}
