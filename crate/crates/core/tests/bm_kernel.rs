mod common;

use std::sync::Arc;

use cocycle_core::bm_kernel::{
    b_n, bm_eval, bm_vertex, classical_prefactor, dbar_closed_check, hartogs_diagonal, parametrix_check, reproducing_integral,
    sphere_probes, HartogsSpec,
};
use cocycle_core::map_dsl::{parse_map, Holomorphic, MapChain};
use cocycle_core::{Complex64, Error, Point};
use common::*;
use rand::Rng;

#[test]
fn kernel_matches_second_transcription() {
    let mut r = rng(1000);
    for trial in 0..1000 {
        let n = 2 + trial % 3;
        let z = random_point(&mut r, &vec![c(0.0, 0.0); n], 1.0);
        let xi = random_point(&mut r, &vec![c(0.0, 0.0); n], 1.0);
        let got = bm_eval(n, &z, &xi).unwrap().coefficients;
        let expected = bm_oracle(n, &z, &xi);
        let scale = expected.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_diff(&got, &expected) <= 1e-12 * scale, "n = {n}, trial {trial}");
    }
}

#[test]
fn b2_is_i_over_two_pi() {
    assert!((b_n(2) - c(0.0, 1.0 / (2.0 * std::f64::consts::PI))).norm() < 1e-16);
}

#[test]
fn homogeneity_along_rays() {
    let mut r = rng(7);
    for _ in 0..100 {
        let n = r.gen_range(2..=4);
        let z = random_point(&mut r, &vec![c(0.0, 0.0); n], 1.0);
        let v = random_point(&mut r, &vec![c(0.0, 0.0); n], 1.0);
        let lambda: f64 = r.gen_range(0.1..5.0);
        let at = |s: f64| {
            let xi: Point = z.iter().zip(&v).map(|(a, b)| a + b * s).collect();
            bm_eval(n, &z, &xi).unwrap().coefficients
        };
        let scaled: Vec<Complex64> = at(1.0).iter().map(|x| x * lambda.powi(1 - 2 * n as i32)).collect();
        let direct = at(lambda);
        let scale = direct.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(max_diff(&direct, &scaled) <= 1e-12 * scale);
    }
}

#[test]
fn diagonal_and_low_dimension_rejected() {
    let z = vec![c(0.3, 0.1), c(0.0, -0.2)];
    assert!(bm_eval(2, &z, &z).is_err());
    assert!(bm_eval(1, &[c(0.0, 0.0)], &[c(1.0, 0.0)]).is_err());
}

#[test]
fn dbar_residual_converges_at_order_two() {
    for (n, radius) in [(2, 1.0), (2, 0.5), (3, 1.0)] {
        let z = vec![c(0.1, -0.2); n];
        let probes = sphere_probes(&z, radius, 12);
        let report = dbar_closed_check(n, &z, &probes, 1e-3).unwrap();
        let ratio = report.ratio.expect("nonzero residual");
        assert!(report.pass && (ratio - 4.0).abs() <= 0.8, "n = {n}, r = {radius}: ratio {ratio}");
    }
}

#[test]
fn dbar_check_rejects_close_probes() {
    let z = vec![c(0.0, 0.0); 2];
    let probes = vec![vec![c(5e-3, 0.0), c(0.0, 0.0)]];
    assert!(matches!(dbar_closed_check(2, &z, &probes, 1e-3), Err(Error::Domain { .. })));
}

#[test]
fn reproducing_integral_is_one_for_every_radius() {
    let z = vec![c(0.2, -0.1), c(-0.3, 0.4)];
    for r in [0.5, 1.0, 2.0] {
        let value = reproducing_integral(&z, r, 32, classical_prefactor(2)).unwrap();
        assert!((value - c(1.0, 0.0)).norm() <= 1e-3, "r = {r}: {value}");
        let doubled = reproducing_integral(&z, r, 32, classical_prefactor(2) * 2.0).unwrap();
        assert!((doubled - c(2.0, 0.0)).norm() <= 2e-3);
    }
}

#[test]
fn quadrature_differences_shrink_beyond_order_sixteen() {
    let z = vec![c(0.0, 0.0); 2];
    let values: Vec<Complex64> =
        (16..=32).step_by(4).map(|o| reproducing_integral(&z, 1.0, o, classical_prefactor(2)).unwrap()).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    for w in diffs.windows(2) {
        // Either strictly shrinking or already at rounding level.
        assert!(w[1] <= w[0] || w[1] < 1e-13, "{diffs:?}");
    }
}

#[test]
fn quadrature_order_floor() {
    assert!(reproducing_integral(&[c(0.0, 0.0), c(0.0, 0.0)], 1.0, 2, classical_prefactor(2)).is_err());
}

fn pairs(count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut r = rng(seed);
    (0..count).map(|_| (random_point(&mut r, &LIBRARY_CENTER, 0.1), random_point(&mut r, &LIBRARY_CENTER, 0.1))).collect()
}

#[test]
fn identity_vertex_is_the_kernel() {
    let id: Arc<dyn Holomorphic> = Arc::new(parse_map("z1; z2", 2).unwrap());
    let ps = pairs(20, 3);
    for (form, (w, w2)) in bm_vertex(&id, &ps).unwrap().iter().zip(&ps) {
        let direct = bm_eval(2, w, w2).unwrap().expand();
        assert!(form.max_abs_diff(&direct) == 0.0);
    }
}

#[test]
fn vertex_is_natural_under_library_maps() {
    let lib = map_library();
    let ps = pairs(10, 4);
    for rho in &lib {
        for psi in &lib {
            let composed: Arc<dyn Holomorphic> = Arc::new(MapChain::new(2, vec![rho.map.clone(), psi.map.clone()]).unwrap());
            let lhs = bm_vertex(&composed, &ps).unwrap();
            for ((w, w2), l) in ps.iter().zip(&lhs) {
                let (jw, jw2) = (psi.map.jet(w).unwrap(), psi.map.jet(w2).unwrap());
                let inner = bm_vertex(&rho.map, &[(jw.value.clone(), jw2.value.clone())]).unwrap();
                let r = inner[0].pullback(&jw.jac, &jw2.jac, w.clone(), w2.clone());
                let scale = 1.0 + r.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(l.max_abs_diff(&r) <= 1e-9 * scale, "{} ∘ {}", rho.name, psi.name);
            }
        }
    }
}

#[test]
fn unitary_affine_charts_preserve_the_kernel() {
    // U = (1/5)[[3, 4i], [4i, 3]] is unitary; the kernel is invariant under z ↦ Uz + b.
    let rho: Arc<dyn Holomorphic> = Arc::new(parse_map("3/5*z1 + 4/5*i*z2 + 1/2; 4/5*i*z1 + 3/5*z2 - i", 2).unwrap());
    let ps = pairs(20, 5);
    for (form, (w, w2)) in bm_vertex(&rho, &ps).unwrap().iter().zip(&ps) {
        let direct = bm_eval(2, w, w2).unwrap().expand();
        let scale = direct.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(form.max_abs_diff(&direct) <= 1e-12 * scale);
    }
}

#[test]
fn real_scaling_chart_leaves_kernel_invariant() {
    // ρ = λ·id with λ > 0 real: pullback multiplies the kernel by λ^{n-1} λ^n / λ^{2n-1} = 1.
    let rho: Arc<dyn Holomorphic> = Arc::new(parse_map("3*z1; 3*z2", 2).unwrap());
    let ps = pairs(10, 6);
    for (form, (w, w2)) in bm_vertex(&rho, &ps).unwrap().iter().zip(&ps) {
        let direct = bm_eval(2, w, w2).unwrap().expand();
        let scale = direct.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(form.max_abs_diff(&direct) <= 1e-12 * scale);
    }
}

fn diagonal_points() -> Vec<Point> {
    let mut r = rng(8);
    (0..6).map(|_| random_point(&mut r, &[c(0.2, 0.1), c(-0.1, 0.3)], 0.3)).collect()
}

#[test]
fn hartogs_recovers_polynomials_exactly() {
    let f = |z: &[Complex64], xi: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> {
        Ok(vec![z[0] * xi[1] + xi[0] * xi[0], (xi[1] - z[1]) * z[0] + c(0.5, -1.0)])
    };
    let pts = diagonal_points();
    let out = hartogs_diagonal(2, &f, &pts, &HartogsSpec::standard(2)).unwrap();
    for (p, z) in out.iter().zip(&pts) {
        let exact = vec![z[0] * z[1] + z[0] * z[0], c(0.5, -1.0)];
        assert!(max_diff(&p.value, &exact) <= 1e-12);
        assert!(p.estimate <= 1e-12);
    }
}

#[test]
fn hartogs_flags_pole_on_the_diagonal() {
    let f = |z: &[Complex64], xi: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> {
        Ok(vec![(z[1] + c(2.0, 0.0)) / (xi[0] - z[0])])
    };
    let err = hartogs_diagonal(2, &f, &diagonal_points(), &HartogsSpec::standard(2)).unwrap_err();
    assert!(matches!(err, Error::Numerical(ref m) if m.contains("non-extendable")), "{err}");
}

#[test]
fn hartogs_sinc_limit() {
    let payload = |z: &[Complex64]| vec![z[0] * z[1] + c(1.0, 0.0), (z[1] * 2.0).exp()];
    let f = move |z: &[Complex64], xi: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> {
        let d = xi[0] - z[0];
        // sinc along directions with d = 0 is 1
        let s = if d.norm() == 0.0 { c(1.0, 0.0) } else { d.sin() / d };
        Ok(payload(z).into_iter().map(|v| v * s).collect())
    };
    let pts = diagonal_points();
    let out = hartogs_diagonal(2, &f, &pts, &HartogsSpec::standard(2)).unwrap();
    for (p, z) in out.iter().zip(&pts) {
        assert!(max_diff(&p.value, &payload(z)) <= 1e-9);
    }
}

#[test]
fn parametrix_condition_on_synthetic_cochains() {
    // ω^0_i = ∂̄f_i and ω^1_{ab} = f_b - f_a with f_i = c_i |z1|^2 + d_i z1 z̄2.
    let coeffs = [(c(1.0, 0.0), c(0.0, 2.0)), (c(-0.5, 0.3), c(1.0, 0.0)), (c(0.2, 0.0), c(-1.0, -1.0))];
    let f = move |i: usize, z: &[Complex64]| coeffs[i].0 * z[0] * z[0].conj() + coeffs[i].1 * z[0] * z[1].conj();
    let lower = move |idx: &[usize], z: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> {
        let (ci, di) = coeffs[idx[0]];
        Ok(vec![ci * z[0], di * z[0]])
    };
    let upper =
        move |idx: &[usize], z: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> { Ok(vec![f(idx[1], z) - f(idx[0], z)]) };
    let probes = sphere_probes(&[c(0.1, 0.0), c(0.0, 0.2)], 0.5, 6);
    let residual = parametrix_check(2, 0, 3, 1, &lower, &upper, &probes, 1e-3).unwrap();
    assert!(residual <= 1e-9, "{residual}");
    // An index-dependent constant added to ω^0 survives δ whenever the indices differ.
    let shifted = move |idx: &[usize], z: &[Complex64]| -> cocycle_core::Result<Vec<Complex64>> {
        let mut v = lower(idx, z)?;
        v[1] += c(idx[0] as f64, 0.0);
        Ok(v)
    };
    let bad = parametrix_check(2, 0, 3, 1, &shifted, &upper, &probes, 1e-3).unwrap();
    assert!(bad > 0.5);
}
