mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use w3cone::netcase::{enumerate_triangles, parse_matpower};

#[test]
fn bundled_case_sizes() {
    let expected = [
        ("pglib_opf_case3_lmbd", 3, 3, 3, 1),
        ("pglib_opf_case5_pjm", 5, 6, 5, 1),
        ("pglib_opf_case14_ieee", 14, 20, 5, 5),
    ];
    for (name, buses, branches, gens, tris) in expected {
        let c = bundled(name);
        assert_eq!(c.n_buses(), buses, "{name}");
        assert_eq!(c.branches.len(), branches, "{name}");
        assert_eq!(c.gens.len(), gens, "{name}");
        assert_eq!(enumerate_triangles(&c).len(), tris, "{name}");
        assert_eq!(c.base_mva, 100.0);
    }
}

#[test]
fn bundled_triangles_match_brute_force() {
    for (name, _) in CASES {
        let c = bundled(name);
        let got: Vec<[usize; 3]> = enumerate_triangles(&c).iter().map(|t| t.buses).collect();
        assert_eq!(got, brute_force_triangles(&c), "{name}");
    }
}

#[test]
fn reparse_is_identical() {
    for (name, _) in CASES {
        let text = std::fs::read_to_string(case_path(name)).unwrap();
        let a = parse_matpower(&text).unwrap();
        let b = parse_matpower(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.canonical_report(), b.canonical_report());
    }
}

#[test]
fn case14_units() {
    let c = bundled("pglib_opf_case14_ieee");
    // bus 9 carries a 19 MVAr shunt
    let b9 = c.buses.iter().find(|b| b.id == 9).unwrap();
    assert!((b9.bs - 0.19).abs() < 1e-15);
    assert!(c.buses.iter().all(|b| b.vmin == 0.94 && b.vmax == 1.06));
}

#[test]
fn random_graph_triangles_match_brute_force() {
    let mut rng = rng(11);
    for _ in 0..100 {
        let n = rng.random_range(1..=20);
        let p = rng.random_range(0.1..0.9);
        let c = random_graph(&mut rng, n, p);
        let got: Vec<[usize; 3]> = enumerate_triangles(&c).iter().map(|t| t.buses).collect();
        assert_eq!(got, brute_force_triangles(&c));
    }
}

proptest! {
    #[test]
    fn per_unit_cost_consistency(k in 0usize..5, pg in -2.0f64..5.0) {
        let c = bundled("pglib_opf_case5_pjm");
        let g = &c.gens[k];
        let pu = g.cost_pu(pg, c.base_mva);
        let mw = g.cost_mw(pg * c.base_mva);
        prop_assert!((pu - mw).abs() <= 1e-12 * mw.abs().max(1.0));
    }

    #[test]
    fn triangle_branch_ids_span_their_pairs(seed in any::<u64>(), n in 3usize..12) {
        let mut r = common::rng(seed);
        let c = random_graph(&mut r, n, 0.5);
        for t in enumerate_triangles(&c) {
            for (pair, &id) in t.pairs().iter().zip(&t.branch_ids) {
                let b = &c.branches[id];
                prop_assert!(b.status);
                prop_assert_eq!((b.from_bus.min(b.to_bus), b.from_bus.max(b.to_bus)), *pair);
            }
        }
    }
}
