use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::partition::{Partition, Permutation};
use super::symfun::{self, Basis, Degree, SymFun};
use crate::error::{Error, Result};
use crate::linalg::{all_permutations, Scalar, SqMatrix};

/// Largest arity evaluated by the plain average over all of `S_k`.
pub const FULL_AVERAGE_MAX_ARITY: usize = 8;

/// A GL-invariant multilinear map on `k` square matrices, written as a rational combination of
/// symmetrized multi-trace maps indexed by cycle type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantMap {
    arity: usize,
    terms: BTreeMap<Partition, BigRational>,
}

fn check_mats<S: Scalar>(mats: &[SqMatrix<S>], k: usize) -> Result<usize> {
    if mats.len() != k {
        return Err(Error::Arity { expected: k, found: mats.len() });
    }
    let n = mats.first().map(SqMatrix::dim).unwrap_or(0);
    for m in mats {
        if m.dim() != n {
            return Err(Error::Dimension { expected: n, found: m.dim() });
        }
    }
    Ok(n)
}

/// `prod over cycles (c_1 .. c_m) of tr(M_{c_1} .. M_{c_m})`, with `cycles` given as 0-based
/// index lists into `mats`.
fn multi_trace<S: Scalar>(cycles: &[Vec<usize>], mats: &[SqMatrix<S>], relabel: &[usize]) -> S {
    let mut value = S::one();
    for cycle in cycles {
        let mut prod = mats[relabel[cycle[0]]].clone();
        for &c in &cycle[1..] {
            prod = &prod * &mats[relabel[c]];
        }
        value = value * prod.trace();
    }
    value
}

/// The product of trace maps attached to `p`.
#[allow(non_snake_case)]
pub fn eval_T_sigma<S: Scalar>(p: &Permutation, mats: &[SqMatrix<S>]) -> Result<S> {
    check_mats(mats, p.len())?;
    let identity: Vec<usize> = (0..p.len()).collect();
    Ok(multi_trace(&p.cycles(), mats, &identity))
}

/// Canonical permutation with the given cycle type: consecutive blocks in order.
fn block_permutation(shape: &Partition) -> Vec<Vec<usize>> {
    let mut cycles = Vec::new();
    let mut next = 0;
    for &len in shape.parts() {
        cycles.push((next..next + len).collect());
        next += len;
    }
    cycles
}

fn rational(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn factorial(k: usize) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

/// Average of `T_sigma(M_{tau(1)}, .., M_{tau(k)})` over all `tau` in `S_k`.
fn symmetrized_full<S: Scalar>(shape: &Partition, mats: &[SqMatrix<S>]) -> S {
    let cycles = block_permutation(shape);
    let k = shape.weight();
    let mut total = S::zero();
    for tau in all_permutations(k) {
        total = total + multi_trace(&cycles, mats, &tau);
    }
    total * S::from_rational(&rational(BigInt::one(), factorial(k)))
}

/// Same value as [`symmetrized_full`], summing once over each permutation of the given cycle
/// type instead of over all of `S_k`.
///
/// A permutation of cycle type `shape` is enumerated as an assignment of the inputs to
/// ordered blocks, each block a cyclic sequence written with its smallest entry first; blocks
/// of equal length are taken in increasing order of their first entry.
fn symmetrized_grouped<S: Scalar>(shape: &Partition, mats: &[SqMatrix<S>]) -> S {
    let k = shape.weight();
    let lens = shape.parts().to_vec();
    let mut total = S::zero();
    let mut count = BigInt::zero();
    let mut used = vec![false; k];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let identity: Vec<usize> = (0..k).collect();

    struct Ctx<'a, S> {
        lens: &'a [usize],
        mats: &'a [SqMatrix<S>],
        identity: &'a [usize],
    }

    fn rec<S: Scalar>(
        ctx: &Ctx<'_, S>,
        block: usize,
        prev_first: usize,
        used: &mut Vec<bool>,
        cycles: &mut Vec<Vec<usize>>,
        total: &mut S,
        count: &mut BigInt,
    ) {
        if block == ctx.lens.len() {
            *total = total.clone() + multi_trace(cycles, ctx.mats, ctx.identity);
            *count += 1;
            return;
        }
        let len = ctx.lens[block];
        let lo = if block > 0 && ctx.lens[block - 1] == len { prev_first + 1 } else { 0 };
        for start in lo..used.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let mut cycle = vec![start];
            fill(ctx, block, len, start, used, &mut cycle, cycles, total, count);
            used[start] = false;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn fill<S: Scalar>(
        ctx: &Ctx<'_, S>,
        block: usize,
        len: usize,
        start: usize,
        used: &mut Vec<bool>,
        cycle: &mut Vec<usize>,
        cycles: &mut Vec<Vec<usize>>,
        total: &mut S,
        count: &mut BigInt,
    ) {
        if cycle.len() == len {
            cycles.push(cycle.clone());
            rec(ctx, block + 1, start, used, cycles, total, count);
            cycles.pop();
            return;
        }
        for next in start + 1..used.len() {
            if used[next] {
                continue;
            }
            used[next] = true;
            cycle.push(next);
            fill(ctx, block, len, start, used, cycle, cycles, total, count);
            cycle.pop();
            used[next] = false;
        }
    }

    let ctx = Ctx { lens: &lens, mats, identity: &identity };
    rec(&ctx, 0, 0, &mut used, &mut cycles, &mut total, &mut count);
    total * S::from_rational(&rational(BigInt::one(), count))
}

impl InvariantMap {
    /// Builds a map of arity `k`; every partition must have weight `k`.
    pub fn new(arity: usize, terms: impl IntoIterator<Item = (Partition, BigRational)>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::validation("invariant maps need arity >= 1"));
        }
        let mut map = BTreeMap::new();
        for (p, c) in terms {
            if p.weight() != arity {
                return Err(Error::validation(format!("partition {p} has weight {} but arity is {arity}", p.weight())));
            }
            let entry = map.entry(p.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                map.remove(&p);
            }
        }
        Ok(InvariantMap { arity, terms: map })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<Partition, BigRational> {
        &self.terms
    }

    /// Evaluates on `k` square matrices of a common size.
    pub fn eval<S: Scalar>(&self, mats: &[SqMatrix<S>]) -> Result<S> {
        check_mats(mats, self.arity)?;
        let grouped = self.arity > FULL_AVERAGE_MAX_ARITY;
        Ok(self.eval_with(mats, grouped))
    }

    /// Evaluation through the cycle-type enumeration regardless of arity.
    pub fn eval_grouped<S: Scalar>(&self, mats: &[SqMatrix<S>]) -> Result<S> {
        check_mats(mats, self.arity)?;
        Ok(self.eval_with(mats, true))
    }

    fn eval_with<S: Scalar>(&self, mats: &[SqMatrix<S>], grouped: bool) -> S {
        let mut total = S::zero();
        for (shape, c) in &self.terms {
            let v = if grouped { symmetrized_grouped(shape, mats) } else { symmetrized_full(shape, mats) };
            total = total + S::from_rational(c) * v;
        }
        total
    }

    /// The inverse of [`invariant_from_symfun`]: reads the map back as a power-sum polynomial.
    pub fn to_symfun(&self) -> SymFun {
        SymFun::new(Basis::PowerSum, self.terms.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "basis": "power-sum",
            "arity": self.arity,
            "terms": symfun::terms_to_json(&self.terms),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<InvariantMap> {
        let terms = value
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::validation("invariant map JSON needs a `terms` array"))?;
        let terms = symfun::terms_from_json(terms)?;
        let arity = match value.get("arity").and_then(|a| a.as_u64()) {
            Some(a) => a as usize,
            None => terms
                .first()
                .map(|(p, _)| p.weight())
                .ok_or_else(|| Error::validation("cannot infer arity of an empty invariant map"))?,
        };
        InvariantMap::new(arity, terms)
    }
}

/// The invariant map with the single term `{cycle_type(p) -> 1}`.
pub fn symmetrize(p: &Permutation) -> InvariantMap {
    InvariantMap::new(p.len().max(1), [(p.cycle_type(), BigRational::one())]).expect("weight equals arity")
}

/// Evaluates `t` on `mats`.
pub fn eval_invariant<S: Scalar>(t: &InvariantMap, mats: &[SqMatrix<S>]) -> Result<S> {
    t.eval(mats)
}

/// Associates to a homogeneous symmetric function of degree `k` the invariant map sending the
/// monomial `T_{p_1} .. T_{p_r}` to the symmetrized trace map of cycle type `[p_1, .., p_r]`.
/// Elementary-basis input is converted first.
pub fn invariant_from_symfun(f: &SymFun, k: usize) -> Result<InvariantMap> {
    let f = f.convert(Basis::PowerSum);
    if !f.rank_coefficient().is_zero() {
        return Err(Error::validation("the rank marker has no matrix inputs"));
    }
    match f.degree() {
        Degree::Inhomogeneous => Err(Error::validation("symmetric function is not homogeneous")),
        Degree::Homogeneous(d) if d != k && !f.is_zero() => {
            Err(Error::validation(format!("symmetric function has degree {d}, not {k}")))
        }
        _ => InvariantMap::new(k, f.terms().clone()),
    }
}
