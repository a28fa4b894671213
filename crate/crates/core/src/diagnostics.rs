//! Post-solve analysis of a relaxation: per-triangle cycle residuals,
//! rank-1 certification, constraint activity and optimality gaps.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::conic::{BlockId, ConicProgram, Solution};
use crate::kimcuts::{kim_soc_row, HermitianBlock3};
use crate::netcase::Triangle;
use crate::wopf::{Relaxation, WIndexMap, WopfError};

/// Default tolerance for certification and activity checks.
pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("reference objective must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("solution vector has {got} entries, program has {n_vars}")]
    LengthMismatch { got: usize, n_vars: usize },
    #[error(transparent)]
    Wopf(#[from] WopfError),
}

/// `100·(reference − relaxed)/reference`.
pub fn gap_percent(relaxed: f64, reference: f64) -> Result<f64, DiagnosticsError> {
    if !(reference > 0.0) {
        return Err(DiagnosticsError::NonPositiveReference(reference));
    }
    Ok(100.0 * (reference - relaxed) / reference)
}

/// Residuals of `W_pk^*·W_qk = W_kk·W_pq^*` for apex `k = 1, 2, 3`, as
/// `[re₁, im₁, re₂, im₂, re₃, im₃]`.
pub fn kvl_residuals(w: &HermitianBlock3) -> [f64; 6] {
    let mut out = [0.0; 6];
    for k in 0..3 {
        let (p, q) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let res = w.entry(p, k).conj() * w.entry(q, k) - w.entry(k, k) * w.entry(p, q).conj();
        out[2 * k] = res.re;
        out[2 * k + 1] = res.im;
    }
    out
}

/// `W_pp·W_qq − |W_pq|²` for the pairs `(1,2)`, `(1,3)`, `(2,3)`.
pub fn pm_residuals(w: &HermitianBlock3) -> [f64; 3] {
    [(0, 1), (0, 2), (1, 2)].map(|(p, q)| {
        w.entry(p, p).re * w.entry(q, q).re - w.entry(p, q).norm_sqr()
    })
}

/// Whether every 2×2 minor is singular and every cycle residual vanishes,
/// with the worst absolute residual.
pub fn rank1_check(w: &HermitianBlock3, tol: f64) -> (bool, f64) {
    let worst = pm_residuals(w)
        .iter()
        .chain(kvl_residuals(w).iter())
        .fold(0.0f64, |m, r| m.max(r.abs()));
    (worst <= tol, worst)
}

/// Voltages `U` with `U·Uᴴ = w` when `w` is rank 1; bus 1 is the angle reference.
pub fn reconstruct_voltages(w: &HermitianBlock3) -> [Complex64; 3] {
    let mag = |p: usize| w.entry(p, p).re.max(0.0).sqrt();
    [
        Complex64::new(mag(0), 0.0),
        Complex64::from_polar(mag(1), -w.entry(0, 1).arg()),
        Complex64::from_polar(mag(2), -w.entry(0, 2).arg()),
    ]
}

/// The 3×3 block of `W` on a triangle's buses at solution `x`.
pub fn triangle_block(map: &WIndexMap, x: &[f64], tri: &Triangle) -> Result<HermitianBlock3, WopfError> {
    let [a, b, c] = tri.buses;
    let diag = |i: usize| x[map.w_diag[i].0];
    let off = |i, j| map.w_value(x, i, j);
    let (w12, w13, w23) = (off(a, b)?, off(a, c)?, off(b, c)?);
    Ok(HermitianBlock3 {
        w11: diag(a),
        w22: diag(b),
        w33: diag(c),
        w12re: w12.re,
        w12im: w12.im,
        w13re: w13.re,
        w13im: w13.im,
        w23re: w23.re,
        w23im: w23.im,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KimSlack {
    pub label: String,
    /// `α·β − ‖u‖²`
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleDiagnostics {
    pub triangle: Triangle,
    pub kvl_residuals: [f64; 6],
    pub pm_residuals: [f64; 3],
    pub kim_slacks: Vec<KimSlack>,
    pub rank1_certified: bool,
    pub worst_residual: f64,
}

/// Per-triangle diagnostics of a solved relaxation.
pub fn triangle_diagnostics(
    rel: &Relaxation,
    x: &[f64],
    tol: f64,
) -> Result<Vec<TriangleDiagnostics>, DiagnosticsError> {
    if x.len() != rel.program.n_vars() {
        return Err(DiagnosticsError::LengthMismatch {
            got: x.len(),
            n_vars: rel.program.n_vars(),
        });
    }
    rel.triangles
        .iter()
        .map(|tri| {
            let w = triangle_block(&rel.map, x, tri)?;
            let kim_slacks = rel
                .kim_cuts
                .iter()
                .filter(|c| c.triangle == *tri)
                .map(|c| KimSlack {
                    label: rel.program.label(c.soc).unwrap_or_default().to_string(),
                    slack: kim_soc_row(&c.params).slack(&w),
                })
                .collect();
            let (rank1_certified, worst_residual) = rank1_check(&w, tol);
            Ok(TriangleDiagnostics {
                triangle: *tri,
                kvl_residuals: kvl_residuals(&w),
                pm_residuals: pm_residuals(&w),
                kim_slacks,
                rank1_certified,
                worst_residual,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockActivity {
    pub block: BlockId,
    pub label: String,
    pub slack: f64,
    pub active: bool,
}

/// Slack of every labeled cone and inequality row at the solution.
///
/// Cones report `t − ‖u‖` (rotated cones through their standard form);
/// linear rows the distance to the nearest finite bound. Equality rows are
/// always active and are left out.
pub fn activity_report(sol: &Solution, p: &ConicProgram, tol: f64) -> Vec<BlockActivity> {
    let x = &sol.x;
    let mut out = Vec::new();
    let mut push = |block: BlockId, label: &Option<String>, slack: f64| {
        if let Some(label) = label {
            out.push(BlockActivity {
                block,
                label: label.clone(),
                slack,
                active: slack <= tol,
            });
        }
    };
    if x.len() != p.n_vars() {
        return Vec::new();
    }

    for (i, row) in p.linear_rows().iter().enumerate() {
        if row.lower == row.upper {
            continue;
        }
        let v = row.value(x);
        push(BlockId::Linear(i), &row.label, (v - row.lower).min(row.upper - v));
    }
    for (i, blk) in p.soc_blocks().iter().enumerate() {
        let t = blk.exprs[0].eval(x);
        let norm = blk.exprs[1..].iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
        push(BlockId::Soc(i), &blk.label, t - norm);
    }
    for (i, blk) in p.rsoc_blocks().iter().enumerate() {
        let (t1, t2) = (blk.exprs[0].eval(x), blk.exprs[1].eval(x));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let norm = blk.exprs[2..]
            .iter()
            .map(|e| e.eval(x).powi(2))
            .sum::<f64>()
            + ((t1 - t2) * s).powi(2);
        push(BlockId::Rsoc(i), &blk.label, (t1 + t2) * s - norm.sqrt());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{AffineExpr, SolveStatus};

    fn uniform() -> HermitianBlock3 {
        HermitianBlock3::from_voltages([Complex64::new(1.0, 0.0); 3])
    }

    #[test]
    fn gap_examples() {
        assert!((gap_percent(5790.5, 5812.64).unwrap() - 0.38).abs() < 0.005);
        assert!((gap_percent(2175.7, 2178.08).unwrap() - 0.11).abs() < 0.005);
        assert_eq!(gap_percent(7.0, 7.0).unwrap(), 0.0);
        assert_eq!(
            gap_percent(1.0, 0.0),
            Err(DiagnosticsError::NonPositiveReference(0.0))
        );
    }

    #[test]
    fn kvl_zero_on_uniform() {
        assert_eq!(kvl_residuals(&uniform()), [0.0; 6]);
    }

    #[test]
    fn kvl_single_real_entry() {
        let w = HermitianBlock3 {
            w12re: 1.0,
            ..HermitianBlock3::identity()
        };
        let r = kvl_residuals(&w);
        assert_eq!(r[4], -1.0);
        assert_eq!(r[5], 0.0);
    }

    #[test]
    fn rank1_examples() {
        assert!(rank1_check(&uniform(), 1e-12).0);
        let (ok, worst) = rank1_check(&HermitianBlock3::identity(), 1e-5);
        assert!(!ok);
        assert_eq!(worst, 1.0);
    }

    #[test]
    fn reconstruction_round_trip() {
        let u = [
            Complex64::from_polar(1.02, 0.3),
            Complex64::from_polar(0.97, -0.1),
            Complex64::from_polar(1.05, 0.2),
        ];
        let w = HermitianBlock3::from_voltages(u);
        let back = HermitianBlock3::from_voltages(reconstruct_voltages(&w));
        for s in crate::kimcuts::Sym::ALL {
            assert!((w.get(s) - back.get(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn activity_of_tight_and_slack_blocks() {
        let mut p = ConicProgram::new();
        let t = p.add_variable(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let u = p.add_variable(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        p.add_soc(vec![AffineExpr::var(t), AffineExpr::var(u)], Some("tight".into()))
            .unwrap();
        p.add_nonneg(AffineExpr::var(t).plus(1.0), Some("loose".into()))
            .unwrap();
        p.add_nonneg(AffineExpr::var(t), None).unwrap();
        let sol = Solution {
            status: SolveStatus::Optimal,
            objective: 0.0,
            x: vec![1.0, 1.0],
            solve_time_s: 0.0,
            iterations: 0,
        };
        let rep = activity_report(&sol, &p, 1e-9);
        assert_eq!(rep.len(), 2);
        let tight = rep.iter().find(|a| a.label == "tight").unwrap();
        assert!(tight.active);
        let loose = rep.iter().find(|a| a.label == "loose").unwrap();
        assert!(!loose.active);
        assert_eq!(loose.slack, 2.0);
    }
}
