//! Bus-injection OPF relaxations in the lifted voltage-product space.
//!
//! Variables `W_ii` (real) and `W_ij = W_ij^re + j·W_ij^im` for bus pairs
//! `i < j` stand for `U_i·U_j^*`. Three relaxations are provided:
//!
//! * PM SOC: the base feasible set plus `|W_ij|² ≤ W_ii·W_jj` per branch pair,
//! * Kim+PM SOC: PM SOC plus the 3-cycle cone family of [`crate::kimcuts`]
//!   on every triangle of the branch graph,
//! * SDP: the base feasible set plus one dense PSD constraint on the full `W`.

mod base;
mod kim;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::conic::{AffineExpr, ConicError, ConicProgram, Var};
use crate::netcase::{enumerate_triangles, NetworkCase, Triangle};

pub use base::{build_base, build_base_with, build_sdp, build_sdp_with, BuildOptions};
pub use kim::{attach_kim, KimCutRef};

/// Default bus-count limit for the dense SDP relaxation.
pub const DEFAULT_DENSE_LIMIT: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum WopfError {
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("dense SDP supports at most {limit} buses, case has {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("no W variable for bus pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("invalid relaxation parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    From,
    To,
}

/// Where each modelling symbol lives in the conic program.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WIndexMap {
    /// `W_ii` per bus.
    pub w_diag: Vec<Var>,
    /// `(W_ij^re, W_ij^im)` per bus pair, keyed with `i < j`.
    pub w_off: BTreeMap<(usize, usize), (Var, Var)>,
    /// `(P_g, Q_g)` per generator; `None` when out of service.
    pub pg: Vec<Option<(Var, Var)>>,
    /// `(P, Q)` per in-service branch end.
    pub flow: BTreeMap<(usize, Side), (Var, Var)>,
    /// Cost epigraph variable per generator, in units of `cost_scale` $/h;
    /// `None` when out of service.
    pub cost_epi: Vec<Option<Var>>,
    pub cost_scale: f64,
}

impl WIndexMap {
    pub fn pair(&self, i: usize, j: usize) -> Result<(Var, Var), WopfError> {
        let key = (i.min(j), i.max(j));
        self.w_off
            .get(&key)
            .copied()
            .ok_or(WopfError::MissingPair(key.0, key.1))
    }

    /// `(re, im)` expressions of `W_ij` in either orientation (`W_ji = W_ij^*`).
    pub fn w_entry(&self, i: usize, j: usize) -> Result<(AffineExpr, AffineExpr), WopfError> {
        let (re, im) = self.pair(i, j)?;
        let sign = if i < j { 1.0 } else { -1.0 };
        Ok((AffineExpr::var(re), AffineExpr::term(im, sign)))
    }

    /// Value of `W_ij` (either orientation) at a solution point.
    pub fn w_value(&self, x: &[f64], i: usize, j: usize) -> Result<num_complex::Complex64, WopfError> {
        if i == j {
            return Ok(num_complex::Complex64::new(x[self.w_diag[i].0], 0.0));
        }
        let (re, im) = self.w_entry(i, j)?;
        Ok(num_complex::Complex64::new(re.eval(x), im.eval(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelaxationKind {
    PmSoc,
    KimPmSoc { thetas: Vec<f64>, r: f64 },
    Sdp,
}

impl RelaxationKind {
    /// Kim+PM with the default parameters `θ = {0, 3π/2}`, `r = 1`.
    pub fn kim_default() -> Self {
        RelaxationKind::KimPmSoc {
            thetas: vec![0.0, 1.5 * std::f64::consts::PI],
            r: 1.0,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            RelaxationKind::PmSoc => "pm",
            RelaxationKind::KimPmSoc { .. } => "kim",
            RelaxationKind::Sdp => "sdp",
        }
    }

    pub fn validate(&self) -> Result<(), WopfError> {
        if let RelaxationKind::KimPmSoc { thetas, r } = self {
            if thetas.is_empty() {
                return Err(WopfError::InvalidParams("at least one theta is required".into()));
            }
            if !(*r >= 0.0) || !r.is_finite() {
                return Err(WopfError::InvalidParams(format!("r must be finite and nonnegative, got {r}")));
            }
            if thetas.iter().any(|t| !t.is_finite()) {
                return Err(WopfError::InvalidParams("thetas must be finite".into()));
            }
        }
        Ok(())
    }
}

/// A built relaxation: the program plus everything needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub kind: RelaxationKind,
    pub program: ConicProgram,
    pub map: WIndexMap,
    pub triangles: Vec<Triangle>,
    pub kim_cuts: Vec<KimCutRef>,
}

/// Builds the requested relaxation for a validated case.
pub fn build_relaxation(case: &NetworkCase, kind: &RelaxationKind) -> Result<Relaxation, WopfError> {
    build_relaxation_with(case, kind, &BuildOptions::default())
}

pub fn build_relaxation_with(
    case: &NetworkCase,
    kind: &RelaxationKind,
    opts: &BuildOptions,
) -> Result<Relaxation, WopfError> {
    kind.validate()?;
    let triangles = enumerate_triangles(case);
    let (mut program, map) = match kind {
        RelaxationKind::Sdp => build_sdp_with(case, opts)?,
        _ => build_base_with(case, opts)?,
    };
    let kim_cuts = match kind {
        RelaxationKind::KimPmSoc { thetas, r } => {
            attach_kim(&mut program, &map, &triangles, thetas, *r)?
        }
        _ => Vec::new(),
    };
    Ok(Relaxation {
        kind: kind.clone(),
        program,
        map,
        triangles,
        kim_cuts,
    })
}
