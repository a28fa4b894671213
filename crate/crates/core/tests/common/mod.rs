//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use w3cone::cli::{load_case, seed_from_env};
use w3cone::conic::ConicProgram;
use w3cone::kimcuts::{HermitianBlock3, KimCutParams, Partition};
use w3cone::netcase::{Branch, Bus, Generator, NetworkCase};
use w3cone::wopf::{Side, WIndexMap};

pub const CASES: [(&str, f64); 3] = [
    ("pglib_opf_case3_lmbd", 5812.64),
    ("pglib_opf_case5_pjm", 17551.89),
    ("pglib_opf_case14_ieee", 2178.08),
];

pub fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("cases")
        .join(format!("{name}.m"))
}

pub fn bundled(name: &str) -> NetworkCase {
    load_case(&case_path(name)).expect("bundled case parses")
}

/// Deterministic RNG; `salt` separates the streams of different tests.
pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env() ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    // Box-Muller
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    Complex64::from_polar((-2.0 * u1.ln()).sqrt(), std::f64::consts::TAU * u2)
}

/// `B·Bᴴ` for a random complex `3×k` matrix `B`, `k ∈ {1, 2, 3}`.
pub fn random_psd(rng: &mut impl Rng) -> HermitianBlock3 {
    let k = rng.random_range(1..=3);
    let b: Vec<[Complex64; 3]> = (0..k)
        .map(|_| [complex_normal(rng), complex_normal(rng), complex_normal(rng)])
        .collect();
    let m = nalgebra::Matrix3::from_fn(|p, q| {
        b.iter().map(|col| col[p] * col[q].conj()).sum::<Complex64>()
    });
    HermitianBlock3::from_matrix(&m)
}

pub fn random_voltages(rng: &mut impl Rng) -> [Complex64; 3] {
    [complex_normal(rng), complex_normal(rng), complex_normal(rng)]
}

pub fn random_params(rng: &mut impl Rng) -> KimCutParams {
    let partition = Partition::ALL[rng.random_range(0..3)];
    KimCutParams::new(
        partition,
        rng.random_range(0.0..=10.0),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// Every bus triple whose three pairs are joined by an in-service branch.
pub fn brute_force_triangles(case: &NetworkCase) -> Vec<[usize; 3]> {
    let joined: BTreeSet<(usize, usize)> = case
        .branches
        .iter()
        .filter(|b| b.status)
        .map(|b| (b.from_bus.min(b.to_bus), b.from_bus.max(b.to_bus)))
        .collect();
    let n = case.n_buses();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if joined.contains(&(i, j)) && joined.contains(&(i, k)) && joined.contains(&(j, k)) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

pub fn plain_bus(id: i64) -> Bus {
    Bus {
        id,
        vmin: 0.9,
        vmax: 1.1,
        gs: 0.0,
        bs: 0.0,
        pd: 0.0,
        qd: 0.0,
    }
}

pub fn plain_branch(from_bus: usize, to_bus: usize) -> Branch {
    Branch {
        from_bus,
        to_bus,
        r: 0.01,
        x: 0.1,
        b_charge: 0.0,
        tap: 1.0,
        shift: 0.0,
        rate_a: 0.0,
        angmin: -0.5,
        angmax: 0.5,
        status: true,
    }
}

pub fn flexible_gen(bus: usize) -> Generator {
    Generator {
        bus,
        pmin: -100.0,
        pmax: 100.0,
        qmin: -100.0,
        qmax: 100.0,
        cost_c2: 0.01,
        cost_c1: 10.0,
        cost_c0: 5.0,
        status: true,
    }
}

/// Random graph on `n` buses with edge probability `p` (no parallel branches).
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> NetworkCase {
    let mut branches = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                let mut b = if rng.random_bool(0.5) {
                    plain_branch(i, j)
                } else {
                    plain_branch(j, i)
                };
                b.status = rng.random_bool(0.9);
                branches.push(b);
            }
        }
    }
    NetworkCase {
        name: "random".into(),
        base_mva: 100.0,
        buses: (0..n as i64).map(plain_bus).collect(),
        branches,
        gens: vec![flexible_gen(0)],
    }
}

/// Random π-model branch with tap and phase shift.
pub fn random_branch(rng: &mut impl Rng, from_bus: usize, to_bus: usize) -> Branch {
    let tap = if rng.random_bool(0.5) {
        1.0
    } else {
        rng.random_range(0.9..1.1)
    };
    Branch {
        from_bus,
        to_bus,
        r: rng.random_range(0.0..0.1),
        x: rng.random_range(0.01..0.5),
        b_charge: rng.random_range(0.0..0.2),
        tap,
        shift: rng.random_range(-0.3..0.3),
        rate_a: 0.0,
        angmin: -1.0,
        angmax: 1.0,
        status: true,
    }
}

/// Branch end flows `(S_from, S_to)` straight from the π-model currents.
pub fn pi_model_flows(br: &Branch, v_from: Complex64, v_to: Complex64) -> (Complex64, Complex64) {
    let y = Complex64::new(br.r, br.x).inv();
    let ysh = Complex64::new(0.0, br.b_charge / 2.0);
    let t = Complex64::from_polar(br.tap, br.shift);
    let i_from = (y + ysh) / (br.tap * br.tap) * v_from - y / t.conj() * v_to;
    let i_to = -y / t * v_from + (y + ysh) * v_to;
    (v_from * i_from.conj(), v_to * i_to.conj())
}

/// Flow implied by the equality row labelled `label` when `x` holds the `W` values.
pub fn flow_from_row(p: &ConicProgram, x: &[f64], label: &str, flow_var: usize) -> f64 {
    let row = p
        .linear_rows()
        .iter()
        .find(|r| r.label.as_deref() == Some(label))
        .unwrap_or_else(|| panic!("no row {label}"));
    let mut x = x.to_vec();
    x[flow_var] = 0.0;
    // row: flow − g(W) = lower
    -(row.value(&x) - row.lower)
}

/// Fills `W = U·Uᴴ` into a solution vector of the right length.
pub fn lifted_point(p: &ConicProgram, map: &WIndexMap, u: &[Complex64]) -> Vec<f64> {
    let mut x = vec![0.0; p.n_vars()];
    for (i, v) in map.w_diag.iter().enumerate() {
        x[v.0] = u[i].norm_sqr();
    }
    for (&(i, j), &(re, im)) in &map.w_off {
        let w = u[i] * u[j].conj();
        x[re.0] = w.re;
        x[im.0] = w.im;
    }
    x
}

/// A complete feasible point of any relaxation of `case` built from the AC
/// voltages `u`: flows, dispatch and cost epigraphs computed exactly.
/// Generators must cover every bus with wide bounds.
pub fn ac_point(case: &NetworkCase, p: &ConicProgram, map: &WIndexMap, u: &[Complex64]) -> Vec<f64> {
    let mut x = lifted_point(p, map, u);
    let n = case.n_buses();
    let mut inj = vec![Complex64::new(0.0, 0.0); n];
    for (&(l, side), &(pv, qv)) in &map.flow {
        let br = &case.branches[l];
        let (sf, st) = pi_model_flows(br, u[br.from_bus], u[br.to_bus]);
        let (s, bus) = match side {
            Side::From => (sf, br.from_bus),
            Side::To => (st, br.to_bus),
        };
        x[pv.0] = s.re;
        x[qv.0] = s.im;
        inj[bus] += s;
    }
    for (i, bus) in case.buses.iter().enumerate() {
        let w = u[i].norm_sqr();
        inj[i] += Complex64::new(bus.pd + bus.gs * w, bus.qd - bus.bs * w);
    }
    let mut seen = vec![false; n];
    for (k, g) in case.gens.iter().enumerate() {
        let (Some((pg, qg)), Some(epi)) = (map.pg[k], map.cost_epi[k]) else {
            continue;
        };
        let s = if seen[g.bus] {
            Complex64::new(0.0, 0.0)
        } else {
            seen[g.bus] = true;
            inj[g.bus]
        };
        x[pg.0] = s.re;
        x[qg.0] = s.im;
        x[epi.0] = g.cost_pu(s.re, case.base_mva) / map.cost_scale;
    }
    x
}

pub fn wide_gen(bus: usize) -> Generator {
    let mut g = flexible_gen(bus);
    g.pmin = -1e5;
    g.pmax = 1e5;
    g.qmin = -1e5;
    g.qmax = 1e5;
    g
}

/// Small meshed case with a generator at every bus and random π-model branches.
pub fn random_small_case(rng: &mut impl Rng, n: usize) -> NetworkCase {
    let mut branches = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (f, t) = if rng.random_bool(0.5) { (i, j) } else { (j, i) };
            branches.push(random_branch(rng, f, t));
        }
    }
    let mut buses: Vec<_> = (0..n as i64).map(|id| plain_bus(id + 1)).collect();
    for b in &mut buses {
        b.pd = rng.random_range(0.0..1.0);
        b.qd = rng.random_range(-0.2..0.3);
        b.gs = rng.random_range(0.0..0.05);
        b.bs = rng.random_range(-0.1..0.1);
    }
    NetworkCase {
        name: format!("random{n}"),
        base_mva: 100.0,
        buses,
        branches,
        gens: (0..n).map(wide_gen).collect(),
    }
}
