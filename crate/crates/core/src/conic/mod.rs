//! Solver-agnostic conic program representation.
//!
//! A [`ConicProgram`] is a linear objective (minimized) over variables with
//! box bounds, subject to two-sided linear rows and cone memberships of affine
//! expressions:
//!
//! * second-order cone `(t; u)`: `‖u‖₂ ≤ t`
//! * rotated second-order cone `(t₁, t₂; u)`: `‖u‖² ≤ 2·t₁·t₂`, `t₁, t₂ ≥ 0`
//! * PSD block of size `d`: the lower triangle (row-major) of a real symmetric
//!   `d×d` matrix that must be positive semidefinite.
//!
//! Every block gets a stable [`BlockId`] and an optional label so residuals can
//! be attributed to named cuts after a solve.

mod backend;
mod check;
mod clarabel;
mod expr;

use serde::Serialize;
use thiserror::Error;

pub use backend::{ConicBackend, SolveStatus, Solution, SolverConfig};
pub use check::{CheckReport, Violation};
pub use clarabel::ClarabelBackend;
pub use expr::{AffineExpr, Var};

/// Solves `p` with the default backend.
pub fn solve(p: &ConicProgram, cfg: &SolverConfig) -> Result<Solution, ConicError> {
    ClarabelBackend.solve(p, cfg)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("variable bounds inverted: lb {lb} > ub {ub}")]
    InvertedBounds { lb: f64, ub: f64 },
    #[error("{kind} block needs at least {min} expressions, got {got}")]
    Arity {
        kind: &'static str,
        min: usize,
        got: usize,
    },
    #[error("psd block of dimension {dim} needs {expected} entries, got {got}")]
    PsdEntries {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("expression references variable {index} but the program has {n_vars}")]
    UnknownVariable { index: usize, n_vars: usize },
    #[error("point has length {got}, program has {n_vars} variables")]
    LengthMismatch { got: usize, n_vars: usize },
    #[error("backend `{backend}` cannot handle {what}")]
    Capability { backend: String, what: String },
    #[error("backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum BlockId {
    Linear(usize),
    Soc(usize),
    Rsoc(usize),
    Psd(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarBounds {
    #[serde(serialize_with = "ser_bound")]
    pub lower: f64,
    #[serde(serialize_with = "ser_bound")]
    pub upper: f64,
}

/// `lower ≤ a·x ≤ upper`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearRow {
    pub coeffs: Vec<(Var, f64)>,
    #[serde(serialize_with = "ser_bound")]
    pub lower: f64,
    #[serde(serialize_with = "ser_bound")]
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl LinearRow {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * x[v.0]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBlock {
    pub exprs: Vec<AffineExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdBlock {
    pub dim: usize,
    /// Lower triangle, row-major: (0,0), (1,0), (1,1), (2,0), ...
    pub entries: Vec<AffineExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PsdBlock {
    /// Position of entry `(row, col)` (either triangle) in `entries`.
    pub fn entry_index(row: usize, col: usize) -> usize {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        r * (r + 1) / 2 + c
    }

    pub fn matrix_at(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |r, c| {
            self.entries[Self::entry_index(r, c)].eval(x)
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConicProgram {
    var_bounds: Vec<VarBounds>,
    var_names: Vec<String>,
    linear_rows: Vec<LinearRow>,
    soc_blocks: Vec<ConeBlock>,
    rsoc_blocks: Vec<ConeBlock>,
    psd_blocks: Vec<PsdBlock>,
    objective: AffineExpr,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.var_bounds.len()
    }

    pub fn var_bounds(&self) -> &[VarBounds] {
        &self.var_bounds
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.var_names[v.0]
    }

    pub fn linear_rows(&self) -> &[LinearRow] {
        &self.linear_rows
    }

    pub fn soc_blocks(&self) -> &[ConeBlock] {
        &self.soc_blocks
    }

    pub fn rsoc_blocks(&self) -> &[ConeBlock] {
        &self.rsoc_blocks
    }

    pub fn psd_blocks(&self) -> &[PsdBlock] {
        &self.psd_blocks
    }

    pub fn objective(&self) -> &AffineExpr {
        &self.objective
    }

    pub fn label(&self, id: BlockId) -> Option<&str> {
        match id {
            BlockId::Linear(i) => self.linear_rows[i].label.as_deref(),
            BlockId::Soc(i) => self.soc_blocks[i].label.as_deref(),
            BlockId::Rsoc(i) => self.rsoc_blocks[i].label.as_deref(),
            BlockId::Psd(i) => self.psd_blocks[i].label.as_deref(),
        }
    }

    pub fn add_variable(&mut self, lb: f64, ub: f64) -> Result<Var, ConicError> {
        let name = format!("x{}", self.n_vars());
        self.add_named_variable(name, lb, ub)
    }

    pub fn add_named_variable(
        &mut self,
        name: impl Into<String>,
        lb: f64,
        ub: f64,
    ) -> Result<Var, ConicError> {
        if lb > ub || lb.is_nan() || ub.is_nan() {
            return Err(ConicError::InvertedBounds { lb, ub });
        }
        self.var_bounds.push(VarBounds {
            lower: lb,
            upper: ub,
        });
        self.var_names.push(name.into());
        Ok(Var(self.var_bounds.len() - 1))
    }

    /// Tightens the bounds of an existing variable to their intersection with `[lb, ub]`.
    pub fn tighten_bounds(&mut self, v: Var, lb: f64, ub: f64) -> Result<(), ConicError> {
        self.check_var(v)?;
        let b = &mut self.var_bounds[v.0];
        let (lo, hi) = (b.lower.max(lb), b.upper.min(ub));
        if lo > hi {
            return Err(ConicError::InvertedBounds { lb: lo, ub: hi });
        }
        b.lower = lo;
        b.upper = hi;
        Ok(())
    }

    fn check_var(&self, v: Var) -> Result<(), ConicError> {
        if v.0 >= self.n_vars() {
            return Err(ConicError::UnknownVariable {
                index: v.0,
                n_vars: self.n_vars(),
            });
        }
        Ok(())
    }

    fn check_expr(&self, e: &AffineExpr) -> Result<(), ConicError> {
        e.terms().iter().try_for_each(|&(v, _)| self.check_var(v))
    }

    /// Adds `lower ≤ expr ≤ upper`; the constant of `expr` moves into the bounds.
    pub fn add_linear(
        &mut self,
        expr: AffineExpr,
        lower: f64,
        upper: f64,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        self.check_expr(&expr)?;
        if lower > upper {
            return Err(ConicError::InvertedBounds {
                lb: lower,
                ub: upper,
            });
        }
        let c = expr.constant_term();
        self.linear_rows.push(LinearRow {
            coeffs: expr.into_terms(),
            lower: lower - c,
            upper: upper - c,
            label,
        });
        Ok(BlockId::Linear(self.linear_rows.len() - 1))
    }

    pub fn add_eq(
        &mut self,
        expr: AffineExpr,
        rhs: f64,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        self.add_linear(expr, rhs, rhs, label)
    }

    /// `expr ≥ 0`
    pub fn add_nonneg(
        &mut self,
        expr: AffineExpr,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        self.add_linear(expr, 0.0, f64::INFINITY, label)
    }

    /// `‖exprs[1..]‖₂ ≤ exprs[0]`
    pub fn add_soc(
        &mut self,
        exprs: Vec<AffineExpr>,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        if exprs.len() < 2 {
            return Err(ConicError::Arity {
                kind: "soc",
                min: 2,
                got: exprs.len(),
            });
        }
        exprs.iter().try_for_each(|e| self.check_expr(e))?;
        self.soc_blocks.push(ConeBlock { exprs, label });
        Ok(BlockId::Soc(self.soc_blocks.len() - 1))
    }

    /// `‖exprs[2..]‖² ≤ 2·exprs[0]·exprs[1]`, `exprs[0], exprs[1] ≥ 0`
    pub fn add_rsoc(
        &mut self,
        exprs: Vec<AffineExpr>,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        if exprs.len() < 3 {
            return Err(ConicError::Arity {
                kind: "rsoc",
                min: 3,
                got: exprs.len(),
            });
        }
        exprs.iter().try_for_each(|e| self.check_expr(e))?;
        self.rsoc_blocks.push(ConeBlock { exprs, label });
        Ok(BlockId::Rsoc(self.rsoc_blocks.len() - 1))
    }

    /// Real symmetric `dim×dim` PSD constraint; `entries` is the lower triangle, row-major.
    pub fn add_psd(
        &mut self,
        dim: usize,
        entries: Vec<AffineExpr>,
        label: Option<String>,
    ) -> Result<BlockId, ConicError> {
        let expected = dim * (dim + 1) / 2;
        if dim == 0 || entries.len() != expected {
            return Err(ConicError::PsdEntries {
                dim,
                expected,
                got: entries.len(),
            });
        }
        entries.iter().try_for_each(|e| self.check_expr(e))?;
        self.psd_blocks.push(PsdBlock {
            dim,
            entries,
            label,
        });
        Ok(BlockId::Psd(self.psd_blocks.len() - 1))
    }

    pub fn set_objective(&mut self, objective: AffineExpr) -> Result<(), ConicError> {
        self.check_expr(&objective)?;
        self.objective = objective;
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    /// Deterministic JSON dump of the whole program, for golden-file tests and debugging.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conic program is always serializable")
    }
}

fn ser_bound<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_indices_are_sequential() {
        let mut p = ConicProgram::new();
        assert_eq!(p.add_variable(0.0, f64::INFINITY).unwrap(), Var(0));
        assert_eq!(p.add_variable(f64::NEG_INFINITY, 2.0).unwrap(), Var(1));
        assert_eq!(p.n_vars(), 2);
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut p = ConicProgram::new();
        assert_eq!(
            p.add_variable(1.0, -1.0),
            Err(ConicError::InvertedBounds { lb: 1.0, ub: -1.0 })
        );
        assert_eq!(p.n_vars(), 0);
    }

    #[test]
    fn block_ids_and_arity() {
        let mut p = ConicProgram::new();
        let t = p.add_variable(0.0, f64::INFINITY).unwrap();
        let u = p.add_variable(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let id = p
            .add_soc(vec![AffineExpr::var(t), AffineExpr::var(u)], None)
            .unwrap();
        assert_eq!(id, BlockId::Soc(0));
        assert!(matches!(
            p.add_soc(vec![AffineExpr::var(t)], None),
            Err(ConicError::Arity { kind: "soc", .. })
        ));
        assert!(matches!(
            p.add_rsoc(vec![AffineExpr::var(t), AffineExpr::var(u)], None),
            Err(ConicError::Arity { kind: "rsoc", .. })
        ));
        let id = p
            .add_rsoc(
                vec![AffineExpr::var(t), AffineExpr::var(t), AffineExpr::var(u)],
                Some("r".into()),
            )
            .unwrap();
        assert_eq!(id, BlockId::Rsoc(0));
        assert_eq!(p.label(id), Some("r"));
        assert_eq!(
            p.add_psd(1, vec![AffineExpr::var(u)], None).unwrap(),
            BlockId::Psd(0)
        );
        assert!(matches!(
            p.add_psd(2, vec![AffineExpr::var(u)], None),
            Err(ConicError::PsdEntries { expected: 3, .. })
        ));
    }

    #[test]
    fn unknown_variable_rejected() {
        let mut p = ConicProgram::new();
        p.add_variable(0.0, 1.0).unwrap();
        assert_eq!(
            p.add_nonneg(AffineExpr::var(Var(3)), None),
            Err(ConicError::UnknownVariable { index: 3, n_vars: 1 })
        );
    }

    #[test]
    fn linear_constant_moves_into_bounds() {
        let mut p = ConicProgram::new();
        let x = p.add_variable(0.0, 1.0).unwrap();
        p.add_linear(AffineExpr::var(x).plus(2.0), 3.0, 5.0, None)
            .unwrap();
        let row = &p.linear_rows()[0];
        assert_eq!((row.lower, row.upper), (1.0, 3.0));
    }

    #[test]
    fn psd_entry_layout() {
        assert_eq!(PsdBlock::entry_index(0, 0), 0);
        assert_eq!(PsdBlock::entry_index(1, 0), 1);
        assert_eq!(PsdBlock::entry_index(0, 1), 1);
        assert_eq!(PsdBlock::entry_index(2, 1), 4);
        assert_eq!(PsdBlock::entry_index(3, 3), 9);
    }

    #[test]
    fn json_dump_is_deterministic_and_encodes_infinity() {
        let build = || {
            let mut p = ConicProgram::new();
            let x = p.add_named_variable("w_0", 0.0, f64::INFINITY).unwrap();
            p.add_soc(
                vec![AffineExpr::constant(1.0), AffineExpr::var(x)],
                Some("cap".into()),
            )
            .unwrap();
            p.set_objective(AffineExpr::var(x)).unwrap();
            p.to_json()
        };
        let a = build();
        assert_eq!(a, build());
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["var_bounds"][0]["upper"], "+inf");
        assert_eq!(v["var_names"][0], "w_0");
        assert_eq!(v["soc_blocks"][0]["label"], "cap");
    }
}
