mod common;

use common::*;
use w3cone::conic::{solve, SolveStatus, SolverConfig};
use w3cone::diagnostics::{
    activity_report, gap_percent, kvl_residuals, pm_residuals, rank1_check, reconstruct_voltages,
    triangle_diagnostics, DEFAULT_TOL,
};
use w3cone::kimcuts::HermitianBlock3;
use w3cone::wopf::{build_relaxation, RelaxationKind};

#[test]
fn cycle_residuals_vanish_at_rank_one() {
    let mut rng = rng(31);
    for _ in 0..10_000 {
        let w = HermitianBlock3::from_voltages(random_voltages(&mut rng));
        let scale = w.to_matrix().norm_squared();
        for r in kvl_residuals(&w) {
            assert!(r.abs() <= 1e-10 * (1.0 + scale), "{r}");
        }
        for r in pm_residuals(&w) {
            assert!(r.abs() <= 1e-10 * (1.0 + scale), "{r}");
        }
        assert!(rank1_check(&w, 1e-8).0);
    }
}

#[test]
fn reconstruction_reproduces_the_block() {
    let mut rng = rng(32);
    for _ in 0..1000 {
        let w = HermitianBlock3::from_voltages(random_voltages(&mut rng));
        let back = HermitianBlock3::from_voltages(reconstruct_voltages(&w));
        let err = (w.to_matrix() - back.to_matrix()).norm();
        assert!(err <= 1e-9 * (1.0 + w.to_matrix().norm()), "{err}");
    }
}

#[test]
fn higher_rank_blocks_are_not_certified() {
    let mut rng = rng(33);
    let mut rejected = 0;
    for _ in 0..200 {
        let a = HermitianBlock3::from_voltages(random_voltages(&mut rng)).to_matrix();
        let b = HermitianBlock3::from_voltages(random_voltages(&mut rng)).to_matrix();
        let w = HermitianBlock3::from_matrix(&(a + b));
        if !rank1_check(&w, DEFAULT_TOL).0 {
            rejected += 1;
        }
    }
    assert_eq!(rejected, 200);
}

#[test]
fn case14_sdp_triangles_are_rank_one() {
    let case = bundled("pglib_opf_case14_ieee");
    let rel = build_relaxation(&case, &RelaxationKind::Sdp).unwrap();
    let sol = solve(&rel.program, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let diags = triangle_diagnostics(&rel, &sol.x, DEFAULT_TOL).unwrap();
    assert_eq!(diags.len(), 5);
    for d in diags {
        assert!(d.rank1_certified, "{:?}: {}", d.triangle.buses, d.worst_residual);
    }
}

#[test]
fn gap_ladder_does_not_increase() {
    for (name, reference) in CASES {
        let case = bundled(name);
        let gaps: Vec<f64> = [RelaxationKind::PmSoc, RelaxationKind::kim_default(), RelaxationKind::Sdp]
            .iter()
            .map(|kind| {
                let rel = build_relaxation(&case, kind).unwrap();
                let sol = solve(&rel.program, &SolverConfig::default()).unwrap();
                assert_eq!(sol.status, SolveStatus::Optimal);
                gap_percent(sol.objective, reference).unwrap()
            })
            .collect();
        for pair in gaps.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-4, "{name}: {gaps:?}");
        }
    }
}

#[test]
fn kim_diagnostics_report_every_cut() {
    let case = bundled("pglib_opf_case3_lmbd");
    let rel = build_relaxation(&case, &RelaxationKind::kim_default()).unwrap();
    let sol = solve(&rel.program, &SolverConfig::default()).unwrap();
    let diags = triangle_diagnostics(&rel, &sol.x, DEFAULT_TOL).unwrap();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].kim_slacks.len(), 6);
    for s in &diags[0].kim_slacks {
        assert!(s.slack >= -1e-6, "{}: {}", s.label, s.slack);
    }
    let activity = activity_report(&sol, &rel.program, 1e-6);
    assert!(activity.iter().any(|a| a.label.starts_with("kim/") && a.active));
    assert!(triangle_diagnostics(&rel, &sol.x[1..], DEFAULT_TOL).is_err());
}
