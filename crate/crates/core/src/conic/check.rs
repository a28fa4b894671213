use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{BlockId, ConicError, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub block: BlockId,
    pub amount: f64,
}

/// Worst violation of every constraint of a program at a given point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub var_bounds: Vec<f64>,
    pub linear: Vec<f64>,
    pub soc: Vec<f64>,
    pub rsoc: Vec<f64>,
    pub psd: Vec<f64>,
    pub max_violation: f64,
    /// Largest violation divided by `1 + ` the magnitude of the values involved.
    pub max_rel_violation: f64,
    pub feasible: bool,
}

impl CheckReport {
    pub fn violation(&self, id: BlockId) -> f64 {
        match id {
            BlockId::Linear(i) => self.linear[i],
            BlockId::Soc(i) => self.soc[i],
            BlockId::Rsoc(i) => self.rsoc[i],
            BlockId::Psd(i) => self.psd[i],
        }
    }

    /// Blocks violated by more than `tol`, worst first.
    pub fn violations(&self, tol: f64) -> Vec<Violation> {
        let tagged = [
            (&self.linear, BlockId::Linear as fn(usize) -> BlockId),
            (&self.soc, BlockId::Soc),
            (&self.rsoc, BlockId::Rsoc),
            (&self.psd, BlockId::Psd),
        ];
        let mut out: Vec<Violation> = tagged
            .iter()
            .flat_map(|(vals, tag)| {
                vals.iter().enumerate().filter_map(move |(i, &amount)| {
                    (amount > tol).then(|| Violation {
                        block: tag(i),
                        amount,
                    })
                })
            })
            .collect();
        out.sort_by(|a, b| b.amount.total_cmp(&a.amount));
        out
    }
}

fn interval_violation(value: f64, lower: f64, upper: f64) -> f64 {
    (lower - value).max(value - upper).max(0.0)
}

/// `‖u‖ − t`, clipped at zero.
fn soc_violation(t: f64, u: impl Iterator<Item = f64>) -> f64 {
    let norm = u.map(|v| v * v).sum::<f64>().sqrt();
    (norm - t).max(0.0)
}

impl ConicProgram {
    /// Evaluates every constraint at `x`.
    ///
    /// Rotated cones are measured through their standard second-order form
    /// `‖(u, (t₁−t₂)/√2)‖ ≤ (t₁+t₂)/√2`; PSD blocks by `max(−λ_min, 0)`.
    pub fn check_point(&self, x: &[f64], tol: f64) -> Result<CheckReport, ConicError> {
        if x.len() != self.n_vars() {
            return Err(ConicError::LengthMismatch {
                got: x.len(),
                n_vars: self.n_vars(),
            });
        }

        let mut max_rel = 0.0f64;
        let mut rel = |viol: f64, scale: f64| {
            max_rel = max_rel.max(viol / (1.0 + scale));
            viol
        };

        let var_bounds: Vec<f64> = self
            .var_bounds()
            .iter()
            .zip(x)
            .map(|(b, &v)| rel(interval_violation(v, b.lower, b.upper), v.abs()))
            .collect();

        let linear: Vec<f64> = self
            .linear_rows()
            .iter()
            .map(|r| {
                let scale = r.coeffs.iter().map(|&(v, c)| (c * x[v.0]).abs()).fold(0.0, f64::max);
                rel(interval_violation(r.value(x), r.lower, r.upper), scale)
            })
            .collect();

        let soc: Vec<f64> = self
            .soc_blocks()
            .iter()
            .map(|b| {
                let t = b.exprs[0].eval(x);
                rel(soc_violation(t, b.exprs[1..].iter().map(|e| e.eval(x))), t.abs())
            })
            .collect();

        let rsoc: Vec<f64> = self
            .rsoc_blocks()
            .iter()
            .map(|b| {
                let t1 = b.exprs[0].eval(x);
                let t2 = b.exprs[1].eval(x);
                let diff = (t1 - t2) / std::f64::consts::SQRT_2;
                let u = b.exprs[2..].iter().map(|e| e.eval(x));
                let t = (t1 + t2) / std::f64::consts::SQRT_2;
                rel(soc_violation(t, u.chain([diff])), t.abs())
            })
            .collect();

        let psd: Vec<f64> = self
            .psd_blocks()
            .iter()
            .map(|b| {
                let eig = SymmetricEigen::new(b.matrix_at(x));
                let scale = eig.eigenvalues.amax();
                rel((-eig.eigenvalues.min()).max(0.0), scale)
            })
            .collect();

        let max_violation = [&var_bounds, &linear, &soc, &rsoc, &psd]
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(0.0, f64::max);

        Ok(CheckReport {
            var_bounds,
            linear,
            soc,
            rsoc,
            psd,
            max_violation,
            max_rel_violation: max_rel,
            feasible: max_violation <= tol,
        })
    }
}
