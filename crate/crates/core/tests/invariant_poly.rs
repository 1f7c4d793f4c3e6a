mod common;

use std::collections::BTreeMap;

use cocycle_core::invariant_poly::{
    chern_character_component, eval_invariant, invariant_from_symfun, newton_convert, todd_component, Basis, Partition, SymFun,
    ToddSeries,
};
use cocycle_core::linalg::{CMatrix, SqMatrix};
use common::*;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn todd_matches_listed_expansions() {
    for (k, power, elementary) in TODD_DISPLAY {
        let t = todd_component(k).unwrap();
        assert_eq!(t.convert(Basis::PowerSum).to_string(), power, "Todd_{k} in power sums");
        assert_eq!(t.convert(Basis::Elementary).to_string(), elementary, "Todd_{k} in elementary");
    }
}

#[test]
fn todd_coefficients_exact() {
    let t2 = todd_component(2).unwrap().convert(Basis::Elementary);
    assert_eq!(t2.coefficient(&Partition::new(vec![1, 1]).unwrap()), q(1, 12));
    assert_eq!(t2.coefficient(&Partition::new(vec![2]).unwrap()), q(1, 12));
    let t4 = todd_component(4).unwrap().convert(Basis::Elementary);
    // -S4 + S3 S1 + 3 S2^2 + 4 S2 S1^2 - S1^4, over 720
    let expected = [(vec![4], -1), (vec![3, 1], 1), (vec![2, 2], 3), (vec![2, 1, 1], 4), (vec![1, 1, 1, 1], -1)];
    for (parts, num) in expected {
        assert_eq!(t4.coefficient(&Partition::new(parts.clone()).unwrap()), q(num, 720), "{parts:?}");
    }
}

#[test]
fn newton_round_trip_all_partitions_to_degree_8() {
    for w in 1..=8 {
        for p in Partition::all_of_weight(w) {
            for basis in [Basis::PowerSum, Basis::Elementary] {
                let f = SymFun::new(basis, [(p.clone(), q(3, 7))]);
                let back = newton_convert(&newton_convert(&f, basis.other()), basis);
                assert_eq!(back, f, "{basis:?} {p:?}");
            }
        }
    }
}

fn invariants() -> Vec<(String, cocycle_core::invariant_poly::InvariantMap)> {
    let mut out = Vec::new();
    for k in 1..=4 {
        out.push((format!("Todd{k}"), invariant_from_symfun(&todd_component(k).unwrap(), k).unwrap()));
        out.push((format!("Ch{k}"), invariant_from_symfun(&chern_character_component(k), k).unwrap()));
    }
    out
}

#[test]
fn gl_invariance_random_conjugation() {
    let mut r = rng(2024);
    for (name, t) in invariants() {
        for trial in 0..100 {
            let n = 1 + trial % 4;
            let mats: Vec<CMatrix> = (0..t.arity()).map(|_| random_matrix(&mut r, n, 1.0)).collect();
            let a = random_invertible(&mut r, n);
            let inv = a.inverse().unwrap();
            let conj: Vec<CMatrix> = mats.iter().map(|m| &(&inv * m) * &a).collect();
            let x = eval_invariant(&t, &mats).unwrap();
            let y = eval_invariant(&t, &conj).unwrap();
            assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()), "{name} trial {trial}: {x} vs {y}");
        }
    }
}

#[test]
fn diagonal_consistency_exact() {
    let eigen_sets: [&[(i64, i64)]; 4] =
        [&[(1, 2), (-3, 4)], &[(2, 1), (1, 3), (-1, 5)], &[(7, 3)], &[(1, 1), (2, 1), (3, 1), (-4, 7)]];
    for eig in eigen_sets {
        let lambdas: Vec<BigRational> = eig.iter().map(|&(a, b)| q(a, b)).collect();
        let m = SqMatrix::diagonal(&lambdas);
        for k in 1..=4 {
            for f in [todd_component(k).unwrap(), chern_character_component(k)] {
                let t = invariant_from_symfun(&f, k).unwrap();
                let via_matrices = eval_invariant(&t, &vec![m.clone(); k]).unwrap();
                for basis in [Basis::PowerSum, Basis::Elementary] {
                    assert_eq!(via_matrices, f.convert(basis).evaluate(&lambdas), "k = {k}, {eig:?}");
                }
            }
        }
    }
}

/// Polynomials in two variables with exact coefficients, keyed by exponents.
type Poly2 = BTreeMap<(usize, usize), BigRational>;

fn poly_mul(a: &Poly2, b: &Poly2, max_deg: usize) -> Poly2 {
    let mut out = Poly2::new();
    for (&(i, j), x) in a {
        for (&(k, l), y) in b {
            if i + j + k + l <= max_deg {
                *out.entry((i + k, j + l)).or_insert_with(BigRational::zero) += x * y;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `t / (1 - e^{-t})` coefficients up to `t^d`, from the reciprocal of
/// `(1 - e^{-t})/t = Σ (-1)^m t^m / (m+1)!`.
fn todd_univariate(d: usize) -> Vec<BigRational> {
    let mut fact = BigRational::one();
    let mut g = Vec::new();
    for m in 0..=d {
        fact *= BigRational::from_integer((m as i64 + 1).into());
        let sign = if m % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        g.push(sign / fact.clone());
    }
    let mut inv = vec![BigRational::one()];
    for m in 1..=d {
        let s: BigRational = (1..=m).map(|j| &g[j] * &inv[m - j]).sum();
        inv.push(-s);
    }
    inv
}

#[test]
fn todd_multiplicative_for_two_eigenvalues() {
    let d = 4;
    let uni = todd_univariate(d);
    assert_eq!(uni[1], q(1, 2));
    assert_eq!(uni[2], q(1, 12));
    assert_eq!(uni[4], q(-1, 720));
    let fx: Poly2 = uni.iter().enumerate().map(|(i, c)| ((i, 0), c.clone())).collect();
    let fy: Poly2 = uni.iter().enumerate().map(|(j, c)| ((0, j), c.clone())).collect();
    let product = poly_mul(&fx, &fy, d);
    // Each Todd component evaluated on (x, y) as a polynomial: power sums T_m = x^m + y^m.
    let series = ToddSeries::new(d);
    for k in 1..=d {
        let comp = series.component(k).unwrap().convert(Basis::PowerSum);
        let mut total = Poly2::new();
        for (part, coef) in comp.terms() {
            let mut term: Poly2 = [((0, 0), coef.clone())].into_iter().collect();
            for &m in part.parts() {
                let tm: Poly2 = [((m, 0), BigRational::one()), ((0, m), BigRational::one())].into_iter().collect();
                term = poly_mul(&term, &tm, d);
            }
            for (e, v) in term {
                *total.entry(e).or_insert_with(BigRational::zero) += v;
            }
        }
        total.retain(|_, v| !v.is_zero());
        let expected: Poly2 = product.iter().filter(|((i, j), _)| i + j == k).map(|(e, v)| (*e, v.clone())).collect();
        assert_eq!(total, expected, "degree {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_under_input_permutation(seed in any::<u64>(), k in 2usize..=4, n in 1usize..=3) {
        let mut r = rng(seed);
        let t = invariant_from_symfun(&todd_component(k).unwrap(), k).unwrap();
        let mats: Vec<CMatrix> = (0..k).map(|_| random_matrix(&mut r, n, 1.0)).collect();
        let mut shuffled = mats.clone();
        shuffled.rotate_left(1);
        shuffled.swap(0, k - 1);
        let x = eval_invariant(&t, &mats).unwrap();
        let y = eval_invariant(&t, &shuffled).unwrap();
        prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn conversion_is_linear(a in -20i64..20, b in 1i64..20, w in 1usize..=6) {
        let parts = Partition::all_of_weight(w);
        let f = SymFun::new(Basis::PowerSum, parts.iter().enumerate().map(|(i, p)| (p.clone(), q(a + i as i64, b))));
        let g = SymFun::new(Basis::PowerSum, parts.iter().map(|p| (p.clone(), q(1, 1))));
        let lhs = f.add(&g).unwrap().convert(Basis::Elementary);
        let rhs = f.convert(Basis::Elementary).add(&g.convert(Basis::Elementary)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
