//! Matrix-valued holomorphic 1-forms and the scalar `k`-forms obtained by feeding them to
//! invariant maps.
//!
//! Forms are evaluators: a form is only ever inspected at points.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::invariant_poly::InvariantMap;
use crate::linalg::{all_permutations, increasing_subsets, minor, permutation_sign, CMatrix};
use crate::map_dsl::{Holomorphic, MIN_JACOBIAN_DET};
use crate::Point;

type MatrixFn = dyn Fn(&[Complex64]) -> Result<Vec<CMatrix>> + Send + Sync;
type CoeffFn = dyn Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync;

fn clean(z: Complex64) -> Complex64 {
    // adding +0.0 turns -0.0 into +0.0
    Complex64::new(z.re + 0.0, z.im + 0.0)
}

fn check_dim(z: &[Complex64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::Dimension { expected: n, found: z.len() });
    }
    Ok(())
}

/// Jacobian and its inverse, failing on singular points.
fn invertible_jacobian(jac: &CMatrix, z: &[Complex64], what: &str) -> Result<CMatrix> {
    let det = jac.det();
    if !det.is_finite() || det.norm() < MIN_JACOBIAN_DET {
        return Err(Error::domain(z, format!("Jacobian of {what} is singular (|det| = {:e})", det.norm())));
    }
    jac.inverse().ok_or_else(|| Error::domain(z, format!("Jacobian of {what} is singular")))
}

/// `sum_a dz^a ⊗ M_a(z)` with `n x n` complex coefficient matrices.
#[derive(Clone)]
pub struct MatrixOneForm {
    n: usize,
    eval: Arc<MatrixFn>,
    provenance: String,
    structurally_zero: bool,
}

impl fmt::Debug for MatrixOneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixOneForm")
            .field("n", &self.n)
            .field("provenance", &self.provenance)
            .field("structurally_zero", &self.structurally_zero)
            .finish()
    }
}

impl MatrixOneForm {
    pub fn from_fn(
        n: usize,
        provenance: impl Into<String>,
        f: impl Fn(&[Complex64]) -> Result<Vec<CMatrix>> + Send + Sync + 'static,
    ) -> Self {
        MatrixOneForm { n, eval: Arc::new(f), provenance: provenance.into(), structurally_zero: false }
    }

    pub fn zero(n: usize) -> Self {
        MatrixOneForm {
            n,
            eval: Arc::new(move |_| Ok(vec![CMatrix::zeros(n); n])),
            provenance: "0".into(),
            structurally_zero: true,
        }
    }

    /// The form with the same coefficient matrices at every point.
    pub fn constant(mats: Vec<CMatrix>) -> Result<Self> {
        let n = mats.len();
        if mats.iter().any(|m| m.dim() != n) {
            return Err(Error::validation("constant form needs n matrices of size n"));
        }
        Ok(MatrixOneForm::from_fn(n, "constant", move |_| Ok(mats.clone())))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Set when the form is zero by construction (e.g. θ of an affine map).
    pub fn is_structurally_zero(&self) -> bool {
        self.structurally_zero
    }

    /// Coefficient matrices of `dz^1 .. dz^n` at `z`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        check_dim(z, self.n)?;
        let mats = (self.eval)(z)?;
        if mats.len() != self.n || mats.iter().any(|m| m.dim() != self.n) {
            return Err(Error::Dimension { expected: self.n, found: mats.len() });
        }
        if mats.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain(z, format!("non-finite coefficients of {}", self.provenance)));
        }
        Ok(mats)
    }

    pub fn add(&self, other: &MatrixOneForm) -> Result<MatrixOneForm> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        if other.structurally_zero {
            return Ok(self.clone());
        }
        if self.structurally_zero {
            return Ok(other.clone());
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(MatrixOneForm::from_fn(self.n, format!("({}) + ({})", self.provenance, other.provenance), move |z| {
            let x = a.eval(z)?;
            let y = b.eval(z)?;
            Ok(x.iter().zip(&y).map(|(p, q)| p + q).collect())
        }))
    }

    pub fn scale(&self, s: Complex64) -> MatrixOneForm {
        if self.structurally_zero {
            return self.clone();
        }
        let a = self.clone();
        MatrixOneForm::from_fn(self.n, format!("{s} * ({})", self.provenance), move |z| {
            Ok(a.eval(z)?.iter().map(|m| m.scale(&s)).collect())
        })
    }

    pub fn dump(&self, points: &[Point]) -> Result<Value> {
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            let mats = self.eval(p)?;
            let coeffs: Vec<Value> = mats
                .iter()
                .map(|m| {
                    let rows: Vec<Value> =
                        (0..m.dim()).map(|i| Value::Array((0..m.dim()).map(|j| complex_json(*m.get(i, j))).collect())).collect();
                    Value::Array(rows)
                })
                .collect();
            out.push(json!({ "point": point_json(p), "coefficients": coeffs }));
        }
        Ok(Value::Array(out))
    }
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn point_json(p: &[Complex64]) -> Value {
    Value::Array(p.iter().map(|z| complex_json(*z)).collect())
}

/// `θ(f) = J^{-1} dJ`; the coefficient of `dz^a` at `z` is `J(z)^{-1} · ∂J/∂z^a (z)`.
pub fn theta(f: Arc<dyn Holomorphic>) -> MatrixOneForm {
    let n = f.dim();
    if f.is_affine() {
        let mut zero = MatrixOneForm::zero(n);
        zero.provenance = format!("θ({})", f.describe());
        return zero;
    }
    let provenance = format!("θ({})", f.describe());
    let label = f.describe();
    MatrixOneForm::from_fn(n, provenance, move |z| {
        let jet = f.jet(z)?;
        let inv = invertible_jacobian(&jet.jac, z, &label)?;
        Ok(jet.hess.iter().map(|h| &inv * h).collect())
    })
}

/// `φ^♯ ω`: at `x`, the coefficient of `dz^b` is
/// `sum_a ∂φ^a/∂z^b (x) · J(x)^{-1} M_a(φ(x)) J(x)`.
pub fn sharp_pullback(phi: Arc<dyn Holomorphic>, omega: &MatrixOneForm) -> Result<MatrixOneForm> {
    let n = phi.dim();
    if omega.n != n {
        return Err(Error::Dimension { expected: n, found: omega.n });
    }
    let provenance = format!("{}^♯ {}", phi.describe(), omega.provenance);
    if omega.structurally_zero {
        let mut zero = MatrixOneForm::zero(n);
        zero.provenance = provenance;
        return Ok(zero);
    }
    let omega = omega.clone();
    let label = phi.describe();
    Ok(MatrixOneForm::from_fn(n, provenance, move |x| {
        let jet = phi.jet(x)?;
        let inv = invertible_jacobian(&jet.jac, x, &label)?;
        let m = omega.eval(&jet.value)?;
        let conj: Vec<CMatrix> = m.iter().map(|ma| &(&inv * ma) * &jet.jac).collect();
        let mut out = vec![CMatrix::zeros(n); n];
        for (b, slot) in out.iter_mut().enumerate() {
            for (a, ca) in conj.iter().enumerate() {
                let w = *jet.jac.get(a, b);
                if w != Complex64::new(0.0, 0.0) {
                    *slot = &*slot + &ca.scale(&w);
                }
            }
        }
        Ok(out)
    }))
}

/// A holomorphic `k`-form `sum_A w_A dz^A` over increasing `k`-subsets `A` in lexicographic
/// order. When `k > n` the form is identically zero and has no coefficients.
#[derive(Clone)]
pub struct ScalarKForm {
    n: usize,
    k: usize,
    eval: Arc<CoeffFn>,
    provenance: String,
    structurally_zero: bool,
}

impl fmt::Debug for ScalarKForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarKForm")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("provenance", &self.provenance)
            .field("structurally_zero", &self.structurally_zero)
            .finish()
    }
}

/// Number of increasing `k`-subsets of `0..n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl ScalarKForm {
    pub fn from_fn(
        n: usize,
        k: usize,
        provenance: impl Into<String>,
        f: impl Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        if k > n {
            return ScalarKForm::zero(n, k);
        }
        ScalarKForm { n, k, eval: Arc::new(f), provenance: provenance.into(), structurally_zero: false }
    }

    pub fn zero(n: usize, k: usize) -> Self {
        let len = binomial(n, k);
        ScalarKForm {
            n,
            k,
            eval: Arc::new(move |_| Ok(vec![Complex64::new(0.0, 0.0); len])),
            provenance: "0".into(),
            structurally_zero: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.structurally_zero
    }

    /// The increasing index sets labelling the coefficients.
    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        increasing_subsets(self.n, self.k)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(z, self.n)?;
        let c = (self.eval)(z)?;
        if c.len() != binomial(self.n, self.k) {
            return Err(Error::Dimension { expected: binomial(self.n, self.k), found: c.len() });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(z, format!("non-finite coefficients of {}", self.provenance)));
        }
        Ok(c.into_iter().map(clean).collect())
    }

    pub fn add(&self, other: &ScalarKForm) -> Result<ScalarKForm> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &ScalarKForm) -> Result<ScalarKForm> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &ScalarKForm, s: Complex64) -> Result<ScalarKForm> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::validation(format!(
                "cannot add a {}-form on C^{} to a {}-form on C^{}",
                self.k, self.n, other.k, other.n
            )));
        }
        if other.structurally_zero {
            return Ok(self.clone());
        }
        if self.structurally_zero && s == Complex64::new(1.0, 0.0) {
            return Ok(other.clone());
        }
        let (a, b) = (self.clone(), other.clone());
        let op = if s.re > 0.0 { "+" } else { "-" };
        Ok(ScalarKForm::from_fn(self.n, self.k, format!("({}) {op} ({})", self.provenance, other.provenance), move |z| {
            let x = a.eval(z)?;
            let y = b.eval(z)?;
            Ok(x.iter().zip(&y).map(|(p, q)| p + s * q).collect())
        }))
    }

    pub fn scale(&self, s: Complex64) -> ScalarKForm {
        if self.structurally_zero {
            return self.clone();
        }
        let a = self.clone();
        ScalarKForm::from_fn(self.n, self.k, format!("{s} * ({})", self.provenance), move |z| {
            Ok(a.eval(z)?.iter().map(|v| v * s).collect())
        })
    }

    pub fn dump(&self, points: &[Point]) -> Result<Value> {
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            let c = self.eval(p)?;
            out.push(json!({
                "point": point_json(p),
                "coefficients": Value::Array(c.iter().map(|v| complex_json(*v)).collect()),
            }));
        }
        Ok(Value::Array(out))
    }
}

/// `T[ω_1, .., ω_k]`: the coefficient on `dz^A` is
/// `sum_{π ∈ S_k} sign(π) T(M_{1, A_π(1)}, .., M_{k, A_π(k)})`.
pub fn apply_invariant(t: &InvariantMap, omegas: &[MatrixOneForm]) -> Result<ScalarKForm> {
    let k = omegas.len();
    if k != t.arity() {
        return Err(Error::Arity { expected: t.arity(), found: k });
    }
    let n = omegas[0].n;
    if let Some(bad) = omegas.iter().find(|w| w.n != n) {
        return Err(Error::Dimension { expected: n, found: bad.n });
    }
    let provenance = format!("T[{}]", omegas.iter().map(|w| w.provenance.clone()).collect::<Vec<_>>().join(", "));
    if k > n || omegas.iter().any(|w| w.structurally_zero) {
        return Ok(ScalarKForm::zero(n, k).with_provenance(provenance));
    }
    let t = t.clone();
    let omegas = omegas.to_vec();
    let subsets = increasing_subsets(n, k);
    let perms: Vec<(Vec<usize>, f64)> = all_permutations(k)
        .into_iter()
        .map(|p| {
            let s = permutation_sign(&p) as f64;
            (p, s)
        })
        .collect();
    Ok(ScalarKForm::from_fn(n, k, provenance, move |z| {
        let coeffs: Vec<Vec<CMatrix>> = omegas.iter().map(|w| w.eval(z)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(subsets.len());
        for a in &subsets {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, sign) in &perms {
                let mats: Vec<CMatrix> = (0..k).map(|i| coeffs[i][a[p[i]]].clone()).collect();
                acc += t.eval(&mats)? * sign;
            }
            out.push(acc);
        }
        Ok(out)
    }))
}

/// Same value as [`apply_invariant`], assembled by expanding every `ω_i` fully and sorting each
/// wedge monomial `dz^{a_1} ∧ .. ∧ dz^{a_k}` into increasing order.
pub fn apply_invariant_expanded(t: &InvariantMap, omegas: &[MatrixOneForm], z: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = omegas.len();
    if k != t.arity() {
        return Err(Error::Arity { expected: t.arity(), found: k });
    }
    let n = omegas[0].n;
    let subsets = increasing_subsets(n, k);
    let mut out = vec![Complex64::new(0.0, 0.0); subsets.len()];
    if k > n {
        return Ok(out);
    }
    let coeffs: Vec<Vec<CMatrix>> = omegas.iter().map(|w| w.eval(z)).collect::<Result<_>>()?;
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut idx = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            idx.push(c % n);
            c /= n;
        }
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        // sign of the permutation sorting idx
        let perm: Vec<usize> = idx.iter().map(|a| sorted.iter().position(|b| b == a).unwrap()).collect();
        let sign = permutation_sign(&perm) as f64;
        let slot = subsets.iter().position(|s| *s == sorted).unwrap();
        let mats: Vec<CMatrix> = (0..k).map(|i| coeffs[i][idx[i]].clone()).collect();
        out[slot] += t.eval(&mats)? * sign;
    }
    Ok(out.into_iter().map(clean).collect())
}

/// `φ^* w`: the coefficient on `dz^B` is `sum_A w_A(φ(x)) det J[A, B](x)`.
pub fn pullback_kform(phi: Arc<dyn Holomorphic>, w: &ScalarKForm) -> Result<ScalarKForm> {
    let n = phi.dim();
    if w.n != n {
        return Err(Error::Dimension { expected: n, found: w.n });
    }
    let provenance = format!("{}^* {}", phi.describe(), w.provenance);
    if w.structurally_zero {
        return Ok(ScalarKForm::zero(n, w.k).with_provenance(provenance));
    }
    if phi.is_identity() {
        return Ok(w.clone().with_provenance(provenance));
    }
    let k = w.k;
    let subsets = increasing_subsets(n, k);
    let w = w.clone();
    Ok(ScalarKForm::from_fn(n, k, provenance, move |x| {
        let y = phi.eval(x)?;
        let jac = phi.jacobian(x)?;
        let wy = w.eval(&y)?;
        let mut out = Vec::with_capacity(subsets.len());
        for b in &subsets {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, wa) in subsets.iter().zip(&wy) {
                if *wa != Complex64::new(0.0, 0.0) {
                    acc += wa * minor(&jac, a, b);
                }
            }
            out.push(acc);
        }
        Ok(out)
    }))
}
