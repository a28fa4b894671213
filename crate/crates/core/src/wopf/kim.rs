use serde::Serialize;

use super::{WIndexMap, WopfError};
use crate::conic::{AffineExpr, BlockId, ConicProgram};
use crate::kimcuts::{frobenius_row, kim_soc_row, CutKind, KimCutParams, Partition, Sym, SymExpr};
use crate::netcase::Triangle;

/// One Kim cone and its linear companion as placed in the program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KimCutRef {
    pub triangle: Triangle,
    pub params: KimCutParams,
    pub soc: BlockId,
    pub linear: BlockId,
}

/// Binds the nine block symbols of a triangle to program variables.
fn bind(map: &WIndexMap, tri: &Triangle, e: &SymExpr) -> Result<AffineExpr, WopfError> {
    let [a, b, c] = tri.buses;
    let mut out = AffineExpr::zero();
    for &(s, coeff) in &e.0 {
        let var = match s {
            Sym::W11 => map.w_diag[a],
            Sym::W22 => map.w_diag[b],
            Sym::W33 => map.w_diag[c],
            Sym::W12Re => map.pair(a, b)?.0,
            Sym::W12Im => map.pair(a, b)?.1,
            Sym::W13Re => map.pair(a, c)?.0,
            Sym::W13Im => map.pair(a, c)?.1,
            Sym::W23Re => map.pair(b, c)?.0,
            Sym::W23Im => map.pair(b, c)?.1,
        };
        out.push_term(var, coeff);
    }
    Ok(out)
}

/// Appends, per triangle, partition and θ, the cone `u₁² + u₂² ≤ α·β` and
/// the row `β ≥ 0`.
pub fn attach_kim(
    p: &mut ConicProgram,
    map: &WIndexMap,
    triangles: &[Triangle],
    thetas: &[f64],
    r: f64,
) -> Result<Vec<KimCutRef>, WopfError> {
    if !(r >= 0.0) {
        return Err(WopfError::InvalidParams(format!("r must be nonnegative, got {r}")));
    }
    let mut refs = Vec::with_capacity(triangles.len() * 3 * thetas.len());
    for tri in triangles {
        for pair in tri.pairs() {
            map.pair(pair.0, pair.1)?;
        }
        let [a, b, c] = tri.buses;
        let tag = format!("tri({a},{b},{c})");
        for part in Partition::ALL {
            for &theta in thetas {
                let params = KimCutParams::new(part, r, theta);
                let CutKind::Soc { u, alpha, beta } = kim_soc_row(&params).kind else {
                    unreachable!("kim_soc_row always yields a cone");
                };
                let CutKind::Linear(frob) = frobenius_row(&params).kind else {
                    unreachable!("frobenius_row always yields a linear row");
                };
                let soc = p.add_rsoc(
                    vec![
                        bind(map, tri, &alpha)?.scaled(0.5),
                        bind(map, tri, &beta)?,
                        bind(map, tri, &u[0])?,
                        bind(map, tri, &u[1])?,
                    ],
                    Some(format!("kim/{tag}/{}", params.label())),
                )?;
                let linear = p.add_nonneg(
                    bind(map, tri, &frob)?,
                    Some(format!("frob/{tag}/{}", params.label())),
                )?;
                refs.push(KimCutRef {
                    triangle: *tri,
                    params,
                    soc,
                    linear,
                });
            }
        }
    }
    Ok(refs)
}
