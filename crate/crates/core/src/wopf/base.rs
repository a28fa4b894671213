use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Side, WIndexMap, WopfError, DEFAULT_DENSE_LIMIT};
use crate::conic::{AffineExpr, ConicProgram, Var};
use crate::netcase::{branch_pairs, NetworkCase};

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    /// Largest bus count accepted by [`build_sdp_with`].
    pub dense_limit: usize,
    /// Box bounds on `W_ij^re`, `W_ij^im` of branch pairs derived from the
    /// voltage-magnitude and angle-difference limits.
    pub voltage_product_bounds: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            dense_limit: DEFAULT_DENSE_LIMIT,
            voltage_product_bounds: false,
        }
    }
}

/// Base feasible set plus the PM SOC on every branch pair.
pub fn build_base(case: &NetworkCase) -> Result<(ConicProgram, WIndexMap), WopfError> {
    build_base_with(case, &BuildOptions::default())
}

pub fn build_base_with(
    case: &NetworkCase,
    opts: &BuildOptions,
) -> Result<(ConicProgram, WIndexMap), WopfError> {
    let mut b = Builder::new(case, opts);
    b.variables(false)?;
    b.constraints()?;
    b.pm_cones()?;
    Ok((b.p, b.map))
}

/// Base feasible set plus one dense PSD constraint on the full `W`.
pub fn build_sdp(case: &NetworkCase) -> Result<(ConicProgram, WIndexMap), WopfError> {
    build_sdp_with(case, &BuildOptions::default())
}

pub fn build_sdp_with(
    case: &NetworkCase,
    opts: &BuildOptions,
) -> Result<(ConicProgram, WIndexMap), WopfError> {
    let n = case.n_buses();
    if n > opts.dense_limit {
        return Err(WopfError::TooLarge {
            n,
            limit: opts.dense_limit,
        });
    }
    let mut b = Builder::new(case, opts);
    b.variables(true)?;
    b.constraints()?;
    b.psd()?;
    Ok((b.p, b.map))
}

struct Builder<'a> {
    case: &'a NetworkCase,
    opts: &'a BuildOptions,
    p: ConicProgram,
    map: WIndexMap,
    /// Intersected angle-difference window per branch pair, oriented `θ_i − θ_j` for `i < j`.
    windows: BTreeMap<(usize, usize), (f64, f64)>,
}

impl<'a> Builder<'a> {
    fn new(case: &'a NetworkCase, opts: &'a BuildOptions) -> Self {
        let mut windows = BTreeMap::new();
        for (_, br) in case.active_branches() {
            let (f, t) = (br.from_bus, br.to_bus);
            let (key, lo, hi) = if f < t {
                ((f, t), br.angmin, br.angmax)
            } else {
                ((t, f), -br.angmax, -br.angmin)
            };
            let w = windows.entry(key).or_insert((lo, hi));
            w.0 = f64::max(w.0, lo);
            w.1 = f64::min(w.1, hi);
        }
        Self {
            case,
            opts,
            p: ConicProgram::new(),
            map: WIndexMap::default(),
            windows,
        }
    }

    fn id(&self, bus: usize) -> i64 {
        self.case.buses[bus].id
    }

    fn variables(&mut self, all_pairs: bool) -> Result<(), WopfError> {
        let case = self.case;
        for bus in &case.buses {
            let v = self.p.add_named_variable(
                format!("w[{}]", bus.id),
                bus.vmin * bus.vmin,
                bus.vmax * bus.vmax,
            )?;
            self.map.w_diag.push(v);
        }

        let mut pairs: Vec<(usize, usize)> = branch_pairs(case).into_keys().collect();
        if all_pairs {
            let n = case.n_buses();
            pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        }
        for (i, j) in pairs {
            let (a, b) = (self.id(i), self.id(j));
            let re = self.p.add_named_variable(format!("wr[{a},{b}]"), -INF, INF)?;
            let im = self.p.add_named_variable(format!("wi[{a},{b}]"), -INF, INF)?;
            self.map.w_off.insert((i, j), (re, im));
        }

        for (k, g) in case.gens.iter().enumerate() {
            if !g.status {
                self.map.pg.push(None);
                self.map.cost_epi.push(None);
                continue;
            }
            let pg = self.p.add_named_variable(format!("pg[{k}]"), g.pmin, g.pmax)?;
            let qg = self.p.add_named_variable(format!("qg[{k}]"), g.qmin, g.qmax)?;
            let epi = self.p.add_named_variable(format!("cost[{k}]"), -INF, INF)?;
            self.map.pg.push(Some((pg, qg)));
            self.map.cost_epi.push(Some(epi));
        }

        for (l, br) in case.active_branches() {
            let lim = if br.rate_a > 0.0 { br.rate_a } else { INF };
            for side in [Side::From, Side::To] {
                let tag = side_tag(side);
                let p = self.p.add_named_variable(format!("p[{l},{tag}]"), -lim, lim)?;
                let q = self.p.add_named_variable(format!("q[{l},{tag}]"), -lim, lim)?;
                self.map.flow.insert((l, side), (p, q));
            }
        }
        Ok(())
    }

    fn constraints(&mut self) -> Result<(), WopfError> {
        self.flow_definitions()?;
        self.power_balance()?;
        self.thermal_limits()?;
        self.angle_limits()?;
        self.cost()?;
        Ok(())
    }

    /// `P + jQ = a·W_kk − b·W_kl` per branch end, split into real and imaginary rows.
    fn flow_definitions(&mut self) -> Result<(), WopfError> {
        let case = self.case;
        for (l, br) in case.active_branches() {
            let adm = br.admittance();
            let y = adm.y_series;
            let t = adm.tap_complex;
            let tau2 = br.tap * br.tap;
            let ends = [
                (
                    Side::From,
                    br.from_bus,
                    br.to_bus,
                    (y + adm.shunt_from).conj() / tau2,
                    y.conj() / t,
                ),
                (
                    Side::To,
                    br.to_bus,
                    br.from_bus,
                    (y + adm.shunt_to).conj(),
                    y.conj() / t.conj(),
                ),
            ];
            for (side, k, m, a, b) in ends {
                let (pv, qv) = self.map.flow[&(l, side)];
                let wkk = self.map.w_diag[k];
                let (wr, wi) = self.map.w_entry(k, m)?;
                let (p_expr, q_expr) = lifted_flow(a, b, wkk, &wr, &wi);
                let tag = side_tag(side);
                self.p.add_eq(
                    AffineExpr::var(pv) - p_expr,
                    0.0,
                    Some(format!("flow_p/br={l}/{tag}")),
                )?;
                self.p.add_eq(
                    AffineExpr::var(qv) - q_expr,
                    0.0,
                    Some(format!("flow_q/br={l}/{tag}")),
                )?;
            }
        }
        Ok(())
    }

    fn power_balance(&mut self) -> Result<(), WopfError> {
        let case = self.case;
        let n = case.n_buses();
        let mut p_rows: Vec<AffineExpr> = vec![AffineExpr::zero(); n];
        let mut q_rows: Vec<AffineExpr> = vec![AffineExpr::zero(); n];
        for (&(l, side), &(pv, qv)) in &self.map.flow {
            let br = &case.branches[l];
            let bus = match side {
                Side::From => br.from_bus,
                Side::To => br.to_bus,
            };
            p_rows[bus].push_term(pv, 1.0);
            q_rows[bus].push_term(qv, 1.0);
        }
        for (k, g) in case.gens.iter().enumerate() {
            if let Some((pg, qg)) = self.map.pg[k] {
                p_rows[g.bus].push_term(pg, -1.0);
                q_rows[g.bus].push_term(qg, -1.0);
            }
        }
        for (i, bus) in case.buses.iter().enumerate() {
            let w = self.map.w_diag[i];
            let p = std::mem::take(&mut p_rows[i]).with_term(w, bus.gs);
            let q = std::mem::take(&mut q_rows[i]).with_term(w, -bus.bs);
            self.p
                .add_eq(p, -bus.pd, Some(format!("balance_p/bus={}", bus.id)))?;
            self.p
                .add_eq(q, -bus.qd, Some(format!("balance_q/bus={}", bus.id)))?;
        }
        Ok(())
    }

    fn thermal_limits(&mut self) -> Result<(), WopfError> {
        let case = self.case;
        for (&(l, side), &(pv, qv)) in &self.map.flow {
            let rate = case.branches[l].rate_a;
            if rate <= 0.0 {
                continue;
            }
            self.p.add_soc(
                vec![
                    AffineExpr::constant(rate),
                    AffineExpr::var(pv),
                    AffineExpr::var(qv),
                ],
                Some(format!("thermal/br={l}/{}", side_tag(side))),
            )?;
        }
        Ok(())
    }

    fn angle_limits(&mut self) -> Result<(), WopfError> {
        let windows = std::mem::take(&mut self.windows);
        for (&(i, j), &(lo, hi)) in &windows {
            if lo > hi {
                return Err(WopfError::InvalidParams(format!(
                    "empty angle window between buses {} and {}",
                    self.id(i),
                    self.id(j)
                )));
            }
            let (re, im) = self.map.pair(i, j)?;
            let tag = format!("{},{}", self.id(i), self.id(j));
            self.p.tighten_bounds(re, 0.0, INF)?;
            self.p.add_nonneg(
                AffineExpr::var(im).with_term(re, -lo.tan()),
                Some(format!("angle_lo/pair={tag}")),
            )?;
            self.p.add_nonneg(
                AffineExpr::var(re)
                    .scaled(hi.tan())
                    .with_term(im, -1.0),
                Some(format!("angle_hi/pair={tag}")),
            )?;
            if self.opts.voltage_product_bounds {
                let (vi, vj) = (&self.case.buses[i], &self.case.buses[j]);
                let b = product_bounds(vi.vmin * vj.vmin, vi.vmax * vj.vmax, lo, hi);
                self.p.tighten_bounds(re, b.0, b.1)?;
                self.p.tighten_bounds(im, b.2, b.3)?;
            }
        }
        self.windows = windows;
        Ok(())
    }

    /// Epigraph variables are kept in units of the largest cost coefficient so
    /// they stay O(1) next to the per-unit quantities.
    fn cost(&mut self) -> Result<(), WopfError> {
        let case = self.case;
        let scale = case
            .active_gens()
            .map(|(_, g)| {
                let (c2, c1, c0) = g.pu_cost_coeffs(case.base_mva);
                c2.abs().max(c1.abs()).max(c0.abs())
            })
            .fold(1.0, f64::max);
        self.map.cost_scale = scale;
        let mut objective = AffineExpr::zero();
        for (k, g) in case.gens.iter().enumerate() {
            let (Some((pg, _)), Some(epi)) = (self.map.pg[k], self.map.cost_epi[k]) else {
                continue;
            };
            let (c2, c1, c0) = g.pu_cost_coeffs(case.base_mva);
            // s·epi − c1·pg − c0 ≥ c2·pg², divided through by s
            let slack = AffineExpr::var(epi)
                .with_term(pg, -c1 / scale)
                .plus(-c0 / scale);
            let label = Some(format!("cost/gen={k}"));
            if c2 > 0.0 {
                self.p.add_rsoc(
                    vec![
                        AffineExpr::constant(0.5),
                        slack,
                        AffineExpr::term(pg, (c2 / scale).sqrt()),
                    ],
                    label,
                )?;
            } else {
                self.p.add_nonneg(slack, label)?;
            }
            objective.push_term(epi, scale);
        }
        self.p.set_objective(objective)?;
        Ok(())
    }

    /// `(W_ij^re)² + (W_ij^im)² ≤ W_ii·W_jj` on every branch pair.
    fn pm_cones(&mut self) -> Result<(), WopfError> {
        for (&(i, j), &(re, im)) in &self.map.w_off {
            self.p.add_rsoc(
                vec![
                    AffineExpr::term(self.map.w_diag[i], 0.5),
                    AffineExpr::var(self.map.w_diag[j]),
                    AffineExpr::var(re),
                    AffineExpr::var(im),
                ],
                Some(format!("pm/pair={},{}", self.id(i), self.id(j))),
            )?;
        }
        Ok(())
    }

    /// `[[W^re, −W^im], [W^im, W^re]] ⪰ 0`, lower triangle, row-major.
    fn psd(&mut self) -> Result<(), WopfError> {
        let n = self.case.n_buses();
        let dim = 2 * n;
        let re = |map: &WIndexMap, a: usize, b: usize| -> Result<AffineExpr, WopfError> {
            if a == b {
                Ok(AffineExpr::var(map.w_diag[a]))
            } else {
                Ok(map.w_entry(a, b)?.0)
            }
        };
        let im = |map: &WIndexMap, a: usize, b: usize| -> Result<AffineExpr, WopfError> {
            if a == b {
                Ok(AffineExpr::zero())
            } else {
                Ok(map.w_entry(a, b)?.1)
            }
        };
        let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
        for r in 0..dim {
            for c in 0..=r {
                let e = match (r < n, c < n) {
                    (true, true) => re(&self.map, r, c)?,
                    (false, true) => im(&self.map, r - n, c)?,
                    (false, false) => re(&self.map, r - n, c - n)?,
                    (true, false) => unreachable!("column index never exceeds row index"),
                };
                entries.push(e);
            }
        }
        self.p.add_psd(dim, entries, Some("sdp/w".to_string()))?;
        Ok(())
    }
}

fn side_tag(side: Side) -> &'static str {
    match side {
        Side::From => "from",
        Side::To => "to",
    }
}

/// Real and imaginary parts of `a·W_kk − b·W_km` as affine expressions.
fn lifted_flow(
    a: Complex64,
    b: Complex64,
    wkk: Var,
    wr: &AffineExpr,
    wi: &AffineExpr,
) -> (AffineExpr, AffineExpr) {
    let p = AffineExpr::term(wkk, a.re) - wr.clone().scaled(b.re) + wi.clone().scaled(b.im);
    let q = AffineExpr::term(wkk, a.im) - wi.clone().scaled(b.re) - wr.clone().scaled(b.im);
    (p, q)
}

/// `(wr_min, wr_max, wi_min, wi_max)` for `|W_ij| ∈ [lo_mag, hi_mag]` and
/// `arg W_ij ∈ [lo, hi]`.
fn product_bounds(lo_mag: f64, hi_mag: f64, lo: f64, hi: f64) -> (f64, f64, f64, f64) {
    if lo >= 0.0 {
        (
            lo_mag * hi.cos(),
            hi_mag * lo.cos(),
            lo_mag * lo.sin(),
            hi_mag * hi.sin(),
        )
    } else if hi <= 0.0 {
        (
            lo_mag * lo.cos(),
            hi_mag * hi.cos(),
            hi_mag * lo.sin(),
            lo_mag * hi.sin(),
        )
    } else {
        (
            lo_mag * lo.cos().min(hi.cos()),
            hi_mag,
            hi_mag * lo.sin(),
            hi_mag * hi.sin(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::BlockId;
    use crate::netcase::parse_matpower;

    const TWO_BUS: &str = "
mpc.baseMVA = 100;
mpc.bus = [
 1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
 2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
 1 0 0 100 -100 1 100 1 200 0;
];
mpc.branch = [
 1 2 0 0.1 0 0 0 0 0 0 1 -30 30;
];
mpc.gencost = [
 2 0 0 3 0.1 10 0;
];
";

    #[test]
    fn two_bus_structure() {
        let case = parse_matpower(TWO_BUS).unwrap();
        let (p, m) = build_base(&case).unwrap();
        assert_eq!(m.w_diag.len(), 2);
        assert_eq!(m.w_off.len(), 1);
        assert_eq!(m.flow.len(), 2);
        // 4 flow rows, 4 balance rows, 2 angle rows
        assert_eq!(p.linear_rows().len(), 10);
        // unlimited branch: no thermal cones
        assert!(p.soc_blocks().is_empty());
        // cost epigraph and one PM cone
        assert_eq!(p.rsoc_blocks().len(), 2);
        assert_eq!(p.label(BlockId::Rsoc(1)), Some("pm/pair=1,2"));
    }

    #[test]
    fn sdp_fills_every_pair() {
        let case = parse_matpower(TWO_BUS).unwrap();
        let (p, m) = build_sdp(&case).unwrap();
        assert_eq!(m.w_off.len(), 1);
        assert_eq!(p.psd_blocks().len(), 1);
        assert_eq!(p.psd_blocks()[0].dim, 4);
        assert_eq!(p.rsoc_blocks().len(), 1);
    }

    #[test]
    fn sdp_size_limit() {
        let case = parse_matpower(TWO_BUS).unwrap();
        let opts = BuildOptions {
            dense_limit: 1,
            ..BuildOptions::default()
        };
        assert_eq!(
            build_sdp_with(&case, &opts).unwrap_err(),
            WopfError::TooLarge { n: 2, limit: 1 }
        );
    }

    #[test]
    fn product_bounds_symmetric_window() {
        let (a, b, c, d) = product_bounds(0.81, 1.21, -0.5, 0.5);
        assert!((a - 0.81 * 0.5f64.cos()).abs() < 1e-15);
        assert_eq!(b, 1.21);
        assert!((c + 1.21 * 0.5f64.sin()).abs() < 1e-15);
        assert!((d - 1.21 * 0.5f64.sin()).abs() < 1e-15);
    }
}
