mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use cocycle_core::cocycle::{
    cf_label_top, cf_map, describe_worst, sample_form, theta_r, verify_telescoping, ChartSimplex, TELESCOPING_TOL,
};
use cocycle_core::invariant_poly::{invariant_from_symfun, todd_component, InvariantMap};
use cocycle_core::linalg::CMatrix;
use cocycle_core::map_dsl::{parse_map, HoloMap, Holomorphic, MapChain};
use cocycle_core::simplicial::{dk_face, dk_validate, Element, SampledForm};
use cocycle_core::Point;
use common::*;

fn arc(text: &str) -> Arc<dyn Holomorphic> {
    Arc::new(parse_map(text, 2).unwrap())
}

fn chain(maps: &[&Arc<dyn Holomorphic>]) -> Arc<dyn Holomorphic> {
    Arc::new(MapChain::new(2, maps.iter().map(|m| (*m).clone()).collect()).unwrap())
}

fn todd(k: usize) -> InvariantMap {
    invariant_from_symfun(&todd_component(k).unwrap(), k).unwrap()
}

fn sample_points(count: usize) -> Vec<Point> {
    let mut r = rng(99);
    (0..count).map(|_| random_point(&mut r, &[c(0.1, 0.0), c(-0.1, 0.05)], 0.3)).collect()
}

struct Fixture {
    g: Vec<Arc<dyn Holomorphic>>,
    g_inv: Vec<Arc<dyn Holomorphic>>,
}

/// Two exponential twists in opposite directions and a Hénon map, with explicit inverses.
/// Triangular maps twisting one way only give identically zero Todd₂ labels.
fn fixture() -> Fixture {
    Fixture {
        g: vec![arc("z1*exp(z2/3); z2"), arc("z1; z2*exp(z1/4)"), arc("z2; z2^2 + 1/10 - z1")],
        g_inv: vec![arc("z1*exp(-z2/3); z2"), arc("z1; z2*exp(-z1/4)"), arc("z1^2 + 1/10 - z2; z1")],
    }
}

/// `ρ_0 = id`, `ρ_{p+1} = g_p ∘ ρ_p`, so `φ_{p,p+1} = g_p^{-1}`.
fn level3(samples: Vec<Point>, extra: BTreeMap<(usize, usize), Arc<dyn Holomorphic>>) -> ChartSimplex {
    let f = fixture();
    let id: Arc<dyn Holomorphic> = Arc::new(HoloMap::identity(2));
    let rho1 = f.g[0].clone();
    let rho2 = chain(&[&f.g[1], &f.g[0]]);
    let rho3 = chain(&[&f.g[2], &f.g[1], &f.g[0]]);
    ChartSimplex::from_adjacent(vec![id, rho1, rho2, rho3], f.g_inv.clone(), extra, samples).unwrap()
}

fn max_norm(s: &SampledForm) -> f64 {
    s.values.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn telescoping_and_dk_condition_for_three_transitions() {
    let pts = sample_points(24);
    let s = level3(pts.clone(), BTreeMap::new());
    s.check_coherence(1e-9).unwrap();
    let t = todd(2);
    let report = verify_telescoping(&s, &t, &pts, TELESCOPING_TOL).unwrap();
    assert!(report.pass, "{}", describe_worst(&report));
    assert!(report.warnings.is_empty());
    let dk = cf_map(&s, &t).unwrap();
    assert!(dk_validate(&dk, TELESCOPING_TOL).unwrap().pass);
    // The check is not vacuous: face labels are far from zero.
    let biggest = dk.labels().values().map(max_norm).fold(0.0, f64::max);
    assert!(biggest > 1e-3, "labels are all ~0 ({biggest:e})");
}

#[test]
fn corrupted_coherence_is_flagged() {
    let pts = sample_points(24);
    let f = fixture();
    // φ_{0,2} ≠ φ_{0,1} ∘ φ_{1,2}: an extra quadratic shear spoils it.
    let wrong = chain(&[&f.g_inv[0], &f.g_inv[1], &arc("z1; z2 + z1^2/5")]);
    let s = level3(pts.clone(), [((0, 2), wrong)].into());
    assert!(s.check_coherence(1e-9).is_err());
    let t = todd(2);
    let report = verify_telescoping(&s, &t, &pts, TELESCOPING_TOL).unwrap();
    assert!(!report.pass);
    assert!(report.max_residual > 1e3 * TELESCOPING_TOL);
    assert!(!dk_validate(&cf_map(&s, &t).unwrap(), TELESCOPING_TOL).unwrap().pass);
}

#[test]
fn face_simplex_labels_recomputed_independently() {
    let pts = sample_points(12);
    let s = level3(pts.clone(), BTreeMap::new());
    let f = fixture();
    let t = todd(2);
    let dk = cf_map(&s, &t).unwrap();
    // The 2-cell (0, 1, 3), built from scratch: charts ρ_0, ρ_1, ρ_3.
    let id: Arc<dyn Holomorphic> = Arc::new(HoloMap::identity(2));
    let rho3 = chain(&[&f.g[2], &f.g[1], &f.g[0]]);
    let transitions = [
        ((0, 1), f.g_inv[0].clone()),
        ((0, 2), chain(&[&f.g_inv[0], &f.g_inv[1], &f.g_inv[2]])),
        ((1, 2), chain(&[&f.g_inv[1], &f.g_inv[2]])),
    ];
    let face = ChartSimplex::new(vec![id, f.g[0].clone(), rho3], transitions.into(), pts.clone()).unwrap();
    let direct = sample_form(&cf_label_top(&face, &t).unwrap(), &pts).unwrap();
    let stored = dk.label(&[0, 1, 3]).unwrap();
    assert!(stored.sub(&direct).residual() <= 1e-12 * (1.0 + max_norm(&direct)));
}

#[test]
fn faces_commute_with_cf_map() {
    let s = level3(sample_points(10), BTreeMap::new());
    let t = todd(2);
    let whole = cf_map(&s, &t).unwrap();
    for j in 0..=3 {
        let lhs = dk_face(j, &whole).unwrap();
        let rhs = cf_map(&s.face(j).unwrap(), &t).unwrap();
        assert_eq!(lhs.labels().keys().collect::<Vec<_>>(), rhs.labels().keys().collect::<Vec<_>>());
        for (cell, x) in lhs.labels() {
            assert!(x.sub(rhs.label(cell).unwrap()).residual() <= 1e-12, "d_{j}, cell {cell:?}");
        }
    }
}

#[test]
fn restriction_is_natural() {
    let s = level3(sample_points(16), BTreeMap::new());
    let t = todd(2);
    let whole = cf_map(&s, &t).unwrap();
    let keep = [1, 4, 5, 11, 15];
    let part = cf_map(&s.restrict(&keep).unwrap(), &t).unwrap();
    for (cell, x) in part.labels() {
        let full = whole.label(cell).unwrap();
        for (row, &i) in keep.iter().enumerate() {
            assert!(max_diff(&x.values[row], &full.values[i]) <= 1e-13, "cell {cell:?}");
        }
    }
}

#[test]
fn theta_r_matches_direct_formula() {
    // φ_{0,1} = (z1 + z2^2/3, z2), φ_{1,2} = A z + b.
    // θ(φ_{0,1}) = N dz2 with N = [[0, 2/3], [0, 0]], so θ_1 has dz^b coefficient A_{2b} A^{-1} N A.
    let a = CMatrix::from_fn(2, |i, j| [[c(2.0, 0.0), c(1.0, 0.0)], [c(0.0, 1.0), c(1.0, 0.0)]][i][j]);
    let charts = vec![arc("z1; z2"), arc("z1 + z2; 2*z2"), arc("z1/3; z2 - 1/2")];
    let adjacent = vec![arc("z1 + z2^2/3; z2"), arc("2*z1 + z2 + 1/4; i*z1 + z2 - 1")];
    let pts = sample_points(10);
    let s = ChartSimplex::from_adjacent(charts, adjacent, BTreeMap::new(), pts.clone()).unwrap();
    let n = CMatrix::from_fn(2, |i, j| if (i, j) == (0, 1) { c(2.0 / 3.0, 0.0) } else { c(0.0, 0.0) });
    let conj = &(&a.inverse().unwrap() * &n) * &a;
    let theta1 = theta_r(&s, 1).unwrap();
    for p in &pts {
        let got = theta1.eval(p).unwrap();
        for (b, m) in got.iter().enumerate() {
            let expected = conj.scale(a.get(1, b));
            assert!((m - &expected).max_abs() <= 1e-13, "{p:?}");
        }
    }
    // θ_2 = θ(φ_{1,2}) = 0 for the affine transition.
    assert!(theta_r(&s, 2).unwrap().eval(&pts[0]).unwrap().iter().all(|m| m.max_abs() == 0.0));
}

#[test]
fn wedge_degree_above_dimension_is_zero() {
    let s = level3(sample_points(4), BTreeMap::new());
    let label = cf_label_top(&s, &todd(3)).unwrap();
    assert!(label.is_structurally_zero());
    assert!(label.eval(&[c(0.1, 0.0), c(0.0, 0.1)]).unwrap().is_empty());
}

#[test]
fn affine_three_simplex_telescopes_exactly() {
    let charts = vec![arc("z1; z2"), arc("z1 + 1; z2"), arc("z1 + 1; 2*z2"), arc("z1 - z2; 2*z2")];
    let adjacent = vec![arc("z1 - 1; z2"), arc("z1; z2/2"), arc("z1 + z2/2 + 1; z2")];
    let s = ChartSimplex::from_adjacent(charts, adjacent, BTreeMap::new(), sample_points(8)).unwrap();
    let report = verify_telescoping(&s, &todd(2), s.samples(), 0.0).unwrap();
    assert!(report.pass);
    assert_eq!(report.max_residual, 0.0);
}
