use serde::Serialize;

use super::{ConicError, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective at `x`, including the constant term. NaN when no point is available.
    pub objective: f64,
    pub x: Vec<f64>,
    pub solve_time_s: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub max_iter: u32,
    /// Fraction of the distance to the cone boundary taken per step.
    pub max_step_fraction: f64,
    /// Points reported as optimal must have a relative `check_point` violation
    /// (see [`super::CheckReport::max_rel_violation`]) within this tolerance.
    pub accept_tol: f64,
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap_abs: 1e-8,
            tol_gap_rel: 1e-8,
            max_iter: 200,
            // the 0.99 default stalls early on rank-deficient SDP optima
            max_step_fraction: 0.9,
            accept_tol: 1e-6,
            verbose: false,
        }
    }
}

/// A conic solver that can take a [`ConicProgram`] to a [`Solution`].
///
/// Implementations must be reentrant: distinct programs may be solved
/// concurrently through one backend instance.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;

    fn supports_psd(&self) -> bool;

    fn solve(&self, program: &ConicProgram, cfg: &SolverConfig) -> Result<Solution, ConicError>;
}
