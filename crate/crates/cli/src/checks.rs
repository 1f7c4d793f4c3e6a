//! Execution of scenario checks.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use cocycle_core::bm_kernel::{b_n, classical_prefactor, dbar_closed_check, reproducing_integral, sphere_probes};
use cocycle_core::cech_group::{check_vanishing, cohomologous_witness, mixed_differential, tau_invariant, MixedContext};
use cocycle_core::cocycle::{cf_map, verify_telescoping};
use cocycle_core::forms::{complex_json, point_json, sharp_pullback, theta};
use cocycle_core::invariant_poly::{eval_invariant, Basis, Partition, SymFun};
use cocycle_core::linalg::CMatrix;
use cocycle_core::map_dsl::{library, Holomorphic, MapChain};
use cocycle_core::simplicial::{dk_validate, random, simplicial_identity_failures, Element};
use cocycle_core::{Complex64, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{CheckOutcome, Status};
use crate::scenario::{invariant, CheckFile, CheckKind, InvariantFile, InvariantKind, Scenario};

/// Runs one check. Errors and panics are caught and reported as `error`.
pub fn run_check(scenario: &Scenario, check: &CheckFile) -> CheckOutcome {
    let start = Instant::now();
    let kind = check.kind.type_name();
    let result = catch_unwind(AssertUnwindSafe(|| evaluate(scenario, &check.kind)));
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(Ok(m)) => CheckOutcome {
            name: check.name.clone(),
            kind: kind.into(),
            status: if m.pass { Status::Pass } else { Status::Fail },
            max_residual: m.max_residual,
            tol: m.tol,
            details: m.details,
            seconds,
        },
        Ok(Err(e)) => CheckOutcome::error(&check.name, kind, e.to_string(), seconds),
        Err(panic) => {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            CheckOutcome::error(&check.name, kind, format!("internal error: {message}"), seconds)
        }
    }
}

struct Measured {
    pass: bool,
    max_residual: Option<f64>,
    tol: Option<f64>,
    details: Value,
}

fn evaluate(scn: &Scenario, kind: &CheckKind) -> Result<Measured, CliError> {
    match kind {
        CheckKind::Symfun { kind, k, expect } => symfun(*kind, *k, expect.as_deref()),
        CheckKind::NewtonRoundtrip { max_degree } => newton_roundtrip(*max_degree),
        CheckKind::GlInvariance { invariants, trials, max_n, seed, tol } => {
            gl_invariance(invariants, *trials, *max_n, *seed, *tol)
        }
        CheckKind::ThetaComposition { maps, cloud, tol } => theta_composition(scn, maps, cloud.as_deref(), *tol),
        CheckKind::Telescoping { simplex, invariant: inv, tol } => {
            let s = &scn.simplices[simplex];
            let t = invariant(inv)?;
            let report = verify_telescoping(s, &t, s.samples(), *tol)?;
            let dk = cf_map(s, &t)?;
            let dk_report = dk_validate(&dk, *tol)?;
            let largest_label = dk.labels().values().map(|x| x.residual()).fold(0.0, f64::max);
            let coherence = s.check_coherence(1e-9).err().map(|e| e.to_string());
            Ok(Measured {
                pass: report.pass && dk_report.pass,
                max_residual: Some(report.max_residual.max(dk_report.max_residual)),
                tol: Some(*tol),
                details: json!({
                    "telescoping": report.to_json(),
                    "dk_max_residual": dk_report.max_residual,
                    "dk_failing_cells": dk_report.failing_cells(),
                    "largest_label": largest_label,
                    "coherence_error": coherence,
                }),
            })
        }
        CheckKind::GroupInvariant { atlas, invariant: inv, tol, expect_zero } => {
            let t = invariant(inv)?;
            let ctx = context(scn, inv)?;
            let words = ctx.action.basic_words();
            let tau = tau_invariant(&ctx, scn.atlases[atlas].clone(), t)?;
            let closed = check_vanishing(&mixed_differential(&tau), &ctx.keys_of_total(inv.k + 1, &words), *tol)?;
            let size = check_vanishing(&tau, &ctx.keys_of_total(inv.k, &words), if *expect_zero { 0.0 } else { f64::INFINITY })?;
            let zero_ok = !*expect_zero || (size.pass && size.max_residual == 0.0);
            Ok(Measured {
                pass: closed.pass && zero_ok,
                max_residual: Some(if *expect_zero { closed.max_residual.max(size.max_residual) } else { closed.max_residual }),
                tol: Some(*tol),
                details: json!({
                    "closedness": closed.to_json(),
                    "tau": size.to_json(),
                    "expect_zero": expect_zero,
                }),
            })
        }
        CheckKind::Witness { first, second, invariant: inv, tol } => {
            let t = invariant(inv)?;
            let ctx = context(scn, inv)?;
            let words = ctx.action.basic_words();
            let (a, b) = (scn.atlases[first].clone(), scn.atlases[second].clone());
            let ta = tau_invariant(&ctx, a.clone(), t.clone())?;
            let tb = tau_invariant(&ctx, b.clone(), t.clone())?;
            let w = cohomologous_witness(&ctx, a, b, t)?;
            let keys = ctx.keys_of_total(inv.k, &words);
            let difference = ta.sub(&tb)?;
            let gap = check_vanishing(&mixed_differential(&w).sub(&difference)?, &keys, *tol)?;
            let size = check_vanishing(&difference, &keys, f64::INFINITY)?;
            Ok(Measured {
                pass: gap.pass,
                max_residual: Some(gap.max_residual),
                tol: Some(*tol),
                details: json!({ "gap": gap.to_json(), "tau_difference": size.to_json() }),
            })
        }
        CheckKind::BmDbar { n, probes, step, radius } => {
            let z = base_point(*n);
            let pts = sphere_probes(&z, *radius, *probes);
            let report = dbar_closed_check(*n, &z, &pts, *step)?;
            Ok(Measured { pass: report.pass, max_residual: Some(report.residual_h), tol: None, details: report.to_json() })
        }
        CheckKind::BmReproducing { radii, order, tol } => {
            let z = base_point(2);
            let mut worst: f64 = 0.0;
            let mut rows = Vec::new();
            for &r in radii {
                let value = reproducing_integral(&z, r, *order, classical_prefactor(2))?;
                let unnormalized = reproducing_integral(&z, r, *order, b_n(2))?;
                worst = worst.max((value - 1.0).norm());
                rows.push(json!({ "radius": r, "integral": complex_json(value), "integral_b2": complex_json(unnormalized) }));
            }
            Ok(Measured {
                pass: worst <= *tol,
                max_residual: Some(worst),
                tol: Some(*tol),
                details: json!({ "order": order, "radii": rows }),
            })
        }
        CheckKind::SimplicialIdentities { trials, max_dim, seed } => simplicial_identities(*trials, *max_dim, *seed),
    }
}

fn context(scn: &Scenario, inv: &InvariantFile) -> Result<Arc<MixedContext>, CliError> {
    let cover = scn.cover.clone().ok_or_else(|| CliError::Validation("scenario has no cover".into()))?;
    let action = scn.action.clone().ok_or_else(|| CliError::Validation("scenario has no action".into()))?;
    Ok(MixedContext::new(cover, action, inv.k)?)
}

/// Fixed off-origin base point for kernel checks.
fn base_point(n: usize) -> Point {
    (0..n).map(|j| Complex64::new(0.1 * (j as f64 + 1.0), -0.05 * j as f64)).collect()
}

pub fn invariant_symfun(kind: InvariantKind, k: usize) -> Result<SymFun, CliError> {
    if k == 0 {
        return Err(CliError::Validation("degree k must be at least 1".into()));
    }
    Ok(match kind {
        InvariantKind::Todd => cocycle_core::invariant_poly::todd_component(k)?,
        InvariantKind::Chern => cocycle_core::invariant_poly::chern_character_component(k),
    })
}

fn symfun(kind: InvariantKind, k: usize, expect: Option<&str>) -> Result<Measured, CliError> {
    let f = invariant_symfun(kind, k)?;
    let (e, p) = (f.convert(Basis::Elementary), f.convert(Basis::PowerSum));
    let round_trip = e.convert(Basis::PowerSum) == p && p.convert(Basis::Elementary) == e;
    let line = format!("{e} = {p}");
    let matches = expect.is_none_or(|x| x == line);
    Ok(Measured {
        pass: round_trip && matches,
        max_residual: None,
        tol: None,
        details: json!({ "expansion": line, "expected": expect, "round_trip": round_trip, "json": p.to_json() }),
    })
}

fn newton_roundtrip(max_degree: usize) -> Result<Measured, CliError> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for w in 1..=max_degree {
        for p in Partition::all_of_weight(w) {
            for basis in [Basis::PowerSum, Basis::Elementary] {
                let f = SymFun::new(basis, [(p.clone(), BigRational::from_integer(BigInt::from(1)))]);
                checked += 1;
                if f.convert(basis.other()).convert(basis) != f {
                    failures.push(format!("{f}"));
                }
            }
        }
    }
    Ok(Measured {
        pass: failures.is_empty(),
        max_residual: None,
        tol: None,
        details: json!({ "checked": checked, "failures": failures }),
    })
}

fn gl_invariance(invariants: &[InvariantFile], trials: usize, max_n: usize, seed: u64, tol: f64) -> Result<Measured, CliError> {
    if max_n == 0 {
        return Err(CliError::Validation("max_n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |s: f64| Complex64::new(rng.gen_range(-s..=s), rng.gen_range(-s..=s));
    let mut worst = (0.0_f64, Value::Null);
    for spec in invariants {
        let t = invariant(spec)?;
        for trial in 0..trials {
            let n = 1 + trial % max_n;
            let mats: Vec<CMatrix> = (0..t.arity()).map(|_| CMatrix::from_fn(n, |_, _| draw(1.0))).collect();
            // identity plus a small perturbation keeps the conjugator well conditioned
            let a = CMatrix::from_fn(n, |i, j| draw(0.3) + if i == j { 1.0 } else { 0.0 });
            let inv = a.inverse().ok_or_else(|| cocycle_core::Error::Numerical("singular conjugator".into()))?;
            let conj: Vec<CMatrix> = mats.iter().map(|m| &(&inv * m) * &a).collect();
            let x = eval_invariant(&t, &mats)?;
            let y = eval_invariant(&t, &conj)?;
            let r = (x - y).norm() / (1.0 + x.norm());
            if r > worst.0 || worst.1.is_null() {
                worst = (r, json!({ "invariant": format!("{:?}{}", spec.kind, spec.k), "trial": trial, "n": n }));
            }
        }
    }
    Ok(Measured { pass: worst.0 <= tol, max_residual: Some(worst.0), tol: Some(tol), details: json!({ "worst": worst.1 }) })
}

fn theta_composition(scn: &Scenario, names: &[String], cloud: Option<&str>, tol: f64) -> Result<Measured, CliError> {
    let n = scn.file.n;
    let maps: Vec<(String, Arc<dyn Holomorphic>)> = if names.is_empty() {
        if n != 2 {
            return Err(CliError::Validation("the built-in map library is two-dimensional".into()));
        }
        library::standard().into_iter().map(|m| (m.name().to_string(), Arc::new(m) as Arc<dyn Holomorphic>)).collect()
    } else {
        names.iter().map(|m| (m.clone(), scn.maps[m].clone())).collect()
    };
    let points: Vec<Point> = match cloud {
        Some(c) => scn.clouds[c].clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let center = library::STANDARD_CENTER;
            let r = library::STANDARD_RADIUS;
            (0..50)
                .map(|_| {
                    center.iter().map(|&(a, b)| Complex64::new(a + rng.gen_range(-r..=r), b + rng.gen_range(-r..=r))).collect()
                })
                .collect()
        }
    };
    let mut worst = (0.0_f64, Value::Null);
    let mut nonaffine_pairs = 0;
    for (gn, g) in &maps {
        for (hn, h) in &maps {
            if !g.is_affine() && !h.is_affine() {
                nonaffine_pairs += 1;
            }
            let gh: Arc<dyn Holomorphic> = Arc::new(MapChain::new(n, vec![g.clone(), h.clone()])?);
            let lhs = theta(gh);
            let rhs = sharp_pullback(h.clone(), &theta(g.clone()))?.add(&theta(h.clone()))?;
            for z in &points {
                let (a, b) = (lhs.eval(z)?, rhs.eval(z)?);
                let scale = 1.0 + a.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
                let diff = a.iter().zip(&b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max) / scale;
                if diff > worst.0 || worst.1.is_null() {
                    worst = (diff, json!({ "g": gn, "h": hn, "point": point_json(z) }));
                }
            }
        }
    }
    Ok(Measured {
        pass: worst.0 <= tol,
        max_residual: Some(worst.0),
        tol: Some(tol),
        details: json!({ "pairs": maps.len() * maps.len(), "nonaffine_pairs": nonaffine_pairs, "points": points.len(), "worst": worst.1 }),
    })
}

fn simplicial_identities(trials: usize, max_dim: usize, seed: u64) -> Result<Measured, CliError> {
    if max_dim == 0 {
        return Err(CliError::Validation("max_dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut totals = [0usize; 5];
    let mut failures = Vec::new();
    let mut invalid = 0;
    for trial in 0..trials {
        let dim = 1 + trial % max_dim;
        let c = random::linear_complex(&mut rng, -(dim as i32) - 1).to_graded()?;
        let s = random::valid_simplex(&mut rng, dim, &c)?;
        if !dk_validate(&s, 0.0)?.pass {
            invalid += 1;
        }
        let (counts, fails) = simplicial_identity_failures(&s)?;
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
        failures.extend(fails.into_iter().map(|f| format!("trial {trial}: {f}")));
    }
    failures.truncate(20);
    Ok(Measured {
        pass: failures.is_empty() && invalid == 0,
        max_residual: None,
        tol: None,
        details: json!({
            "trials": trials,
            "invalid_simplices": invalid,
            "instances": { "dd": totals[0], "ds_low": totals[1], "ds_id": totals[2], "ds_high": totals[3], "ss": totals[4] },
            "failures": failures,
        }),
    })
}
