//! Nonpositively graded complexes, the explicit Dold-Kan labeling of simplices and total
//! complexes of double complexes.
//!
//! A `DKSimplex` of dimension `n` labels every strictly increasing index tuple
//! `(i_0 < .. < i_l)` in `{0..n}` by an element of degree `-l`, subject to
//!
//! ```text
//! sum_j (-1)^j c_{i_0 .. î_j .. i_{l+1}} = d(c_{i_0 .. i_{l+1}})
//! ```
//!
//! Totalization uses the differential `δ + (-1)^p d` on bidegree `(p, q)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{increasing_subsets, rational_to_f64};

/// Elements of a graded piece: an abelian group with a size measure.
pub trait Element: Clone + fmt::Debug + Send + Sync {
    fn add(&self, other: &Self) -> Self;

    fn neg(&self) -> Self;

    fn scale_int(&self, k: i64) -> Self;

    /// Max-abs size, used against tolerances.
    fn residual(&self) -> f64;

    /// `Some` when zero can be decided exactly.
    fn exact_is_zero(&self) -> Option<bool> {
        None
    }

    fn to_json(&self) -> Value;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        match self.exact_is_zero() {
            Some(z) => z,
            None => self.residual() <= tol,
        }
    }
}

/// Exact vector over `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QVec(pub Vec<BigRational>);

impl QVec {
    pub fn zeros(len: usize) -> Self {
        QVec(vec![BigRational::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Element for QVec {
    fn add(&self, other: &Self) -> Self {
        QVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn neg(&self) -> Self {
        QVec(self.0.iter().map(|a| -a).collect())
    }

    fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        QVec(self.0.iter().map(|a| a * &k).collect())
    }

    fn residual(&self) -> f64 {
        self.0.iter().map(|a| rational_to_f64(&a.abs())).fold(0.0, f64::max)
    }

    fn exact_is_zero(&self) -> Option<bool> {
        Some(self.0.iter().all(Zero::is_zero))
    }

    fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(|q| Value::String(q.to_string())).collect())
    }
}

/// A form known only at sample points: one coefficient vector per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledForm {
    pub values: Vec<Vec<Complex64>>,
}

impl SampledForm {
    pub fn zeros(points: usize, len: usize) -> Self {
        SampledForm { values: vec![vec![Complex64::new(0.0, 0.0); len]; points] }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        SampledForm {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
                .collect(),
        }
    }

    /// Max-abs residual at each point.
    pub fn per_point(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().fold(0.0_f64, |m, z| m.max(z.norm()))).collect()
    }
}

impl Element for SampledForm {
    fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    fn neg(&self) -> Self {
        SampledForm { values: self.values.iter().map(|v| v.iter().map(|z| -z).collect()).collect() }
    }

    fn scale_int(&self, k: i64) -> Self {
        let s = k as f64;
        SampledForm { values: self.values.iter().map(|v| v.iter().map(|z| z * s).collect()).collect() }
    }

    fn residual(&self) -> f64 {
        self.per_point().into_iter().fold(0.0, f64::max)
    }

    fn to_json(&self) -> Value {
        Value::Array(self.values.iter().map(|v| Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())).collect())
    }
}

type Differential<E> = dyn Fn(i32, &E) -> Result<E> + Send + Sync;
type Admission<E> = dyn Fn(i32, &E) -> bool + Send + Sync;

/// A cochain complex supported in `min_degree..=max_degree`, with `d` raising degree by one.
#[derive(Clone)]
pub struct GradedComplex<E: Element> {
    name: String,
    min_degree: i32,
    max_degree: i32,
    zeros: BTreeMap<i32, E>,
    d: Arc<Differential<E>>,
    admit: Option<Arc<Admission<E>>>,
}

impl<E: Element> fmt::Debug for GradedComplex<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedComplex")
            .field("name", &self.name)
            .field("min_degree", &self.min_degree)
            .field("max_degree", &self.max_degree)
            .finish()
    }
}

impl<E: Element + 'static> GradedComplex<E> {
    /// `zeros` gives the zero element of every degree in the support; `d(p, x)` must return an
    /// element of degree `p + 1` for `p < max_degree`.
    pub fn new(
        name: impl Into<String>,
        zeros: BTreeMap<i32, E>,
        d: impl Fn(i32, &E) -> Result<E> + Send + Sync + 'static,
    ) -> Result<Self> {
        let (Some(&min_degree), Some(&max_degree)) = (zeros.keys().next(), zeros.keys().next_back()) else {
            return Err(Error::validation("a complex needs at least one degree"));
        };
        if (max_degree - min_degree + 1) as usize != zeros.len() {
            return Err(Error::validation("complex support must be a contiguous range of degrees"));
        }
        Ok(GradedComplex { name: name.into(), min_degree, max_degree, zeros, d: Arc::new(d), admit: None })
    }

    /// A single space in degree `degree`, zero differential.
    pub fn concentrated(name: impl Into<String>, degree: i32, zero: E) -> Self {
        let mut zeros = BTreeMap::new();
        zeros.insert(degree, zero);
        GradedComplex::new(name, zeros, |_, x: &E| Ok(x.clone())).expect("one degree")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.min_degree..=self.max_degree
    }

    pub fn has_degree(&self, p: i32) -> bool {
        self.zeros.contains_key(&p)
    }

    pub fn zero(&self, p: i32) -> Option<&E> {
        self.zeros.get(&p)
    }

    /// `d x` for `x` of degree `p`; the zero map out of the top degree yields `None`.
    pub fn d(&self, p: i32, x: &E) -> Result<Option<E>> {
        if !self.has_degree(p) {
            return Err(Error::validation(format!("degree {p} outside the support of {}", self.name)));
        }
        if p == self.max_degree {
            return Ok(None);
        }
        (self.d)(p, x).map(Some)
    }

    /// Whether `x` may be used as an element of degree `p`.
    pub fn admits(&self, p: i32, x: &E) -> bool {
        self.has_degree(p) && self.admit.as_ref().is_none_or(|f| f(p, x))
    }

    /// Max residual of `d(d(x))` over the given elements of each degree.
    pub fn check_d_squared(&self, samples: &[(i32, E)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (p, x) in samples {
            if let Some(dx) = self.d(*p, x)? {
                if let Some(ddx) = self.d(p + 1, &dx)? {
                    worst = worst.max(ddx.residual());
                }
            }
        }
        Ok(worst)
    }
}

/// Keeps degrees below zero, replaces degree 0 by the kernel of `d` (tested with `tol`) and
/// drops positive degrees.
pub fn smart_truncate<E: Element + 'static>(c: &GradedComplex<E>, tol: f64) -> GradedComplex<E> {
    let zeros: BTreeMap<i32, E> = c.zeros.iter().filter(|(p, _)| **p <= 0).map(|(p, z)| (*p, z.clone())).collect();
    if zeros.is_empty() {
        return c.clone();
    }
    let max_degree = *zeros.keys().next_back().unwrap();
    let original = c.clone();
    let closed = original.clone();
    let previous = c.admit.clone();
    let admit = move |p: i32, x: &E| -> bool {
        if previous.as_ref().is_some_and(|f| !f(p, x)) {
            return false;
        }
        if p != 0 {
            return true;
        }
        match closed.d(0, x) {
            Ok(Some(dx)) => dx.is_zero_within(tol),
            Ok(None) => true,
            Err(_) => false,
        }
    };
    GradedComplex {
        name: format!("τ≤0 {}", c.name),
        min_degree: c.min_degree,
        max_degree,
        zeros,
        d: original.d.clone(),
        admit: Some(Arc::new(admit)),
    }
}

/// Degree of the label of a cell with `len` vertices.
pub fn cell_degree(len: usize) -> i32 {
    -(len as i32 - 1)
}

fn cell_key(cell: &[usize]) -> String {
    cell.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// A labeling of the cells of the standard `n`-simplex by elements of a complex. Cells whose
/// degree lies outside the complex's support carry no label (the space there is zero).
#[derive(Clone, Debug)]
pub struct DKSimplex<E: Element> {
    dim: usize,
    complex: GradedComplex<E>,
    labels: BTreeMap<Vec<usize>, E>,
}

/// Per-cell outcome of [`dk_validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct CellResidual {
    pub cell: Vec<usize>,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DKReport {
    pub cells: Vec<CellResidual>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl DKReport {
    pub fn failing_cells(&self) -> Vec<Vec<usize>> {
        self.cells.iter().filter(|c| !c.pass).map(|c| c.cell.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "cells": self.cells.iter().map(|c| json!({
                "cell": cell_key(&c.cell),
                "residual": c.residual,
                "pass": c.pass,
            })).collect::<Vec<_>>(),
        })
    }
}

/// All nonempty increasing index tuples of `{0..=dim}`, by size then lexicographically.
pub fn all_cells(dim: usize) -> Vec<Vec<usize>> {
    (1..=dim + 1).flat_map(|k| increasing_subsets(dim + 1, k)).collect()
}

impl<E: Element + 'static> DKSimplex<E> {
    /// All labels zero.
    pub fn zero(dim: usize, complex: &GradedComplex<E>) -> Self {
        let mut labels = BTreeMap::new();
        for cell in all_cells(dim) {
            if let Some(z) = complex.zero(cell_degree(cell.len())) {
                labels.insert(cell, z.clone());
            }
        }
        DKSimplex { dim, complex: complex.clone(), labels }
    }

    /// Builds from explicit labels; every cell of a supported degree must be present.
    pub fn from_labels(dim: usize, complex: &GradedComplex<E>, labels: BTreeMap<Vec<usize>, E>) -> Result<Self> {
        for cell in all_cells(dim) {
            let p = cell_degree(cell.len());
            match labels.get(&cell) {
                Some(x) if !complex.admits(p, x) => {
                    return Err(Error::validation(format!("label on ({}) is not admissible in degree {p}", cell_key(&cell))))
                }
                None if complex.has_degree(p) => return Err(Error::MissingLabel(cell_key(&cell))),
                _ => {}
            }
        }
        let labels = labels.into_iter().filter(|(c, _)| complex.has_degree(cell_degree(c.len()))).collect();
        Ok(DKSimplex { dim, complex: complex.clone(), labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn complex(&self) -> &GradedComplex<E> {
        &self.complex
    }

    pub fn labels(&self) -> &BTreeMap<Vec<usize>, E> {
        &self.labels
    }

    /// Label of `cell`, or `None` when its degree is unsupported.
    pub fn label(&self, cell: &[usize]) -> Option<&E> {
        self.labels.get(cell)
    }

    /// Replaces one label (admissibility is checked).
    pub fn set_label(&mut self, cell: Vec<usize>, x: E) -> Result<()> {
        let p = cell_degree(cell.len());
        if cell.windows(2).any(|w| w[0] >= w[1]) || cell.last().is_some_and(|&i| i > self.dim) {
            return Err(Error::validation(format!("({}) is not a cell of the {}-simplex", cell_key(&cell), self.dim)));
        }
        if !self.complex.admits(p, &x) {
            return Err(Error::validation(format!("label on ({}) is not admissible in degree {p}", cell_key(&cell))));
        }
        self.labels.insert(cell, x);
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self.labels.iter().map(|(c, e)| (cell_key(c), e.to_json())).collect();
        Value::Object(map)
    }
}

/// Checks the boundary condition on every cell with at least two vertices, and closedness of
/// vertex labels when the complex has a degree-1 piece.
pub fn dk_validate<E: Element + 'static>(s: &DKSimplex<E>, tol: f64) -> Result<DKReport> {
    let c = &s.complex;
    let mut cells = Vec::new();
    for cell in all_cells(s.dim) {
        let p = cell_degree(cell.len());
        let face_degree = p + 1;
        if cell.len() == 1 {
            if c.has_degree(1) {
                if let Some(x) = s.labels.get(&cell) {
                    let r = c.d(0, x)?.map(|dx| dx.residual()).unwrap_or(0.0);
                    cells.push(CellResidual { cell, residual: r, pass: r <= tol });
                }
            }
            continue;
        }
        let Some(zero) = c.zero(face_degree) else { continue };
        let mut acc = zero.clone();
        for j in 0..cell.len() {
            let mut face = cell.clone();
            face.remove(j);
            let x = s.labels.get(&face).ok_or_else(|| Error::MissingLabel(cell_key(&face)))?;
            acc = if j % 2 == 0 { acc.add(x) } else { acc.sub(x) };
        }
        if c.has_degree(p) {
            let x = s.labels.get(&cell).ok_or_else(|| Error::MissingLabel(cell_key(&cell)))?;
            if let Some(dx) = c.d(p, x)? {
                acc = acc.sub(&dx);
            }
        }
        let pass = acc.is_zero_within(tol);
        cells.push(CellResidual { cell, residual: acc.residual(), pass });
    }
    let max_residual = cells.iter().map(|c| c.residual).fold(0.0, f64::max);
    let pass = cells.iter().all(|c| c.pass);
    Ok(DKReport { cells, max_residual, tol, pass })
}

/// `δ^j`: the coface map skipping `j`.
pub fn coface(j: usize, i: usize) -> usize {
    if i < j {
        i
    } else {
        i + 1
    }
}

/// `σ^j`: the codegeneracy map repeating `j`.
pub fn codegeneracy(j: usize, i: usize) -> usize {
    if i <= j {
        i
    } else {
        i - 1
    }
}

/// The `j`-th face: labels reindexed through `δ^j`.
pub fn dk_face<E: Element + 'static>(j: usize, s: &DKSimplex<E>) -> Result<DKSimplex<E>> {
    if j > s.dim || s.dim == 0 {
        return Err(Error::validation(format!("face index {j} out of range for a {}-simplex", s.dim)));
    }
    let mut labels = BTreeMap::new();
    for cell in all_cells(s.dim - 1) {
        let image: Vec<usize> = cell.iter().map(|&i| coface(j, i)).collect();
        if let Some(x) = s.labels.get(&image) {
            labels.insert(cell, x.clone());
        }
    }
    Ok(DKSimplex { dim: s.dim - 1, complex: s.complex.clone(), labels })
}

/// The `j`-th degeneracy: labels reindexed through `σ^j`; cells hitting `j` twice get zero.
pub fn dk_degeneracy<E: Element + 'static>(j: usize, s: &DKSimplex<E>) -> Result<DKSimplex<E>> {
    if j > s.dim {
        return Err(Error::validation(format!("degeneracy index {j} out of range for a {}-simplex", s.dim)));
    }
    let mut labels = BTreeMap::new();
    for cell in all_cells(s.dim + 1) {
        let Some(zero) = s.complex.zero(cell_degree(cell.len())) else { continue };
        let image: Vec<usize> = cell.iter().map(|&i| codegeneracy(j, i)).collect();
        let repeated = image.windows(2).any(|w| w[0] == w[1]);
        let label = if repeated { zero.clone() } else { s.labels.get(&image).cloned().unwrap_or_else(|| zero.clone()) };
        labels.insert(cell, label);
    }
    Ok(DKSimplex { dim: s.dim + 1, complex: s.complex.clone(), labels })
}

/// Element of a totalization: components indexed by bidegree `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TotalElement<E> {
    pub components: BTreeMap<(i32, i32), E>,
}

impl<E: Element> Element for TotalElement<E> {
    fn add(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        for (k, v) in &other.components {
            let entry = match components.get(k) {
                Some(x) => x.add(v),
                None => v.clone(),
            };
            components.insert(*k, entry);
        }
        TotalElement { components }
    }

    fn neg(&self) -> Self {
        TotalElement { components: self.components.iter().map(|(k, v)| (*k, v.neg())).collect() }
    }

    fn scale_int(&self, k: i64) -> Self {
        TotalElement { components: self.components.iter().map(|(b, v)| (*b, v.scale_int(k))).collect() }
    }

    fn residual(&self) -> f64 {
        self.components.values().map(Element::residual).fold(0.0, f64::max)
    }

    fn exact_is_zero(&self) -> Option<bool> {
        let mut all = true;
        for v in self.components.values() {
            all &= v.exact_is_zero()?;
        }
        Some(all)
    }

    fn to_json(&self) -> Value {
        Value::Object(self.components.iter().map(|((p, q), v)| (format!("{p},{q}"), v.to_json())).collect())
    }
}

type BiDifferential<E> = dyn Fn(i32, i32, &E) -> Result<E> + Send + Sync;

/// A double complex with horizontal `δ: (p, q) → (p + 1, q)` and vertical
/// `d: (p, q) → (p, q + 1)`, commuting.
#[derive(Clone)]
pub struct DoubleComplex<E: Element> {
    pub zeros: BTreeMap<(i32, i32), E>,
    delta: Arc<BiDifferential<E>>,
    d: Arc<BiDifferential<E>>,
}

impl<E: Element + 'static> DoubleComplex<E> {
    pub fn new(
        zeros: BTreeMap<(i32, i32), E>,
        delta: impl Fn(i32, i32, &E) -> Result<E> + Send + Sync + 'static,
        d: impl Fn(i32, i32, &E) -> Result<E> + Send + Sync + 'static,
    ) -> Self {
        DoubleComplex { zeros, delta: Arc::new(delta), d: Arc::new(d) }
    }

    pub fn delta(&self, p: i32, q: i32, x: &E) -> Result<Option<E>> {
        if self.zeros.contains_key(&(p + 1, q)) {
            (self.delta)(p, q, x).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn vertical(&self, p: i32, q: i32, x: &E) -> Result<Option<E>> {
        if self.zeros.contains_key(&(p, q + 1)) {
            (self.d)(p, q, x).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Sign `(-1)^p` of the vertical differential on column `p` in the totalization.
pub fn total_sign(p: i32) -> i64 {
    if p.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Degree `m` piece is the sum over `p + q = m`; `D = δ + (-1)^p d`.
pub fn total_complex<E: Element + 'static>(dc: &DoubleComplex<E>) -> Result<GradedComplex<TotalElement<E>>> {
    let mut zeros: BTreeMap<i32, TotalElement<E>> = BTreeMap::new();
    for (&(p, q), z) in &dc.zeros {
        zeros.entry(p + q).or_insert_with(|| TotalElement { components: BTreeMap::new() }).components.insert((p, q), z.clone());
    }
    let dc = dc.clone();
    let zeros_for_d = zeros.clone();
    GradedComplex::new("Tot", zeros, move |m, x: &TotalElement<E>| {
        let mut out = zeros_for_d.get(&(m + 1)).cloned().ok_or_else(|| Error::validation("degree outside totalization"))?;
        for (&(p, q), v) in &x.components {
            if p + q != m {
                return Err(Error::validation(format!("component ({p},{q}) does not have total degree {m}")));
            }
            if let Some(h) = dc.delta(p, q, v)? {
                let slot = out.components.get_mut(&(p + 1, q)).expect("target bidegree present");
                *slot = slot.add(&h);
            }
            if let Some(w) = dc.vertical(p, q, v)? {
                let slot = out.components.get_mut(&(p, q + 1)).expect("target bidegree present");
                *slot = slot.add(&w.scale_int(total_sign(p)));
            }
        }
        Ok(out)
    })
}

/// Dense exact matrix over `Q` (row-major), used for rank computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigRational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn from_ints(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        QMatrix { rows, cols, data: entries.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn apply(&self, v: &QVec) -> QVec {
        QVec((0..self.rows).map(|i| (0..self.cols).fold(BigRational::zero(), |acc, j| acc + self.get(i, j) * &v.0[j])).collect())
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Rank by fraction-exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows).find(|&r| !m[r * cols + col].is_zero()) else { continue };
            for j in 0..cols {
                m.swap(rank * cols + j, pivot * cols + j);
            }
            let p = m[rank * cols + col].clone();
            for r in 0..rows {
                if r == rank || m[r * cols + col].is_zero() {
                    continue;
                }
                let factor = &m[r * cols + col] / &p;
                for j in col..cols {
                    let v = &m[r * cols + j] - &factor * &m[rank * cols + j];
                    m[r * cols + j] = v;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}

/// A finite complex of `Q`-vector spaces, `maps[p]: C^p → C^{p+1}`.
#[derive(Clone, Debug)]
pub struct LinearComplex {
    pub dims: BTreeMap<i32, usize>,
    pub maps: BTreeMap<i32, QMatrix>,
}

impl LinearComplex {
    pub fn new(dims: BTreeMap<i32, usize>, maps: BTreeMap<i32, QMatrix>) -> Result<Self> {
        for (&p, m) in &maps {
            let src = *dims.get(&p).ok_or_else(|| Error::validation(format!("map out of missing degree {p}")))?;
            let dst = *dims.get(&(p + 1)).ok_or_else(|| Error::validation(format!("map into missing degree {}", p + 1)))?;
            if m.cols != src || m.rows != dst {
                return Err(Error::validation(format!(
                    "map in degree {p} has shape {}x{}, expected {dst}x{src}",
                    m.rows, m.cols
                )));
            }
        }
        Ok(LinearComplex { dims, maps })
    }

    fn map_rank(&self, p: i32) -> usize {
        self.maps.get(&p).map(QMatrix::rank).unwrap_or(0)
    }

    /// `dim H^p = dim C^p - rank d^p - rank d^{p-1}`.
    pub fn cohomology_dims(&self) -> BTreeMap<i32, usize> {
        self.dims.iter().map(|(&p, &dim)| (p, dim - self.map_rank(p) - self.map_rank(p - 1))).collect()
    }

    /// Whether every composite `d^{p+1} d^p` vanishes exactly.
    pub fn is_complex(&self) -> bool {
        self.maps.iter().all(|(p, m)| self.maps.get(&(p + 1)).is_none_or(|n| n.mul(m).is_zero()))
    }

    pub fn to_graded(&self) -> Result<GradedComplex<QVec>> {
        let zeros = self.dims.iter().map(|(&p, &d)| (p, QVec::zeros(d))).collect();
        let maps = self.maps.clone();
        let dims = self.dims.clone();
        GradedComplex::new("linear", zeros, move |p, x: &QVec| {
            Ok(match maps.get(&p) {
                Some(m) => m.apply(x),
                None => QVec::zeros(dims.get(&(p + 1)).copied().unwrap_or(0)),
            })
        })
    }
}

/// Exact double complex of `Q`-vector spaces with horizontal maps `h[(p, q)]` and vertical
/// maps `v[(p, q)]`.
#[derive(Clone, Debug)]
pub struct LinearDoubleComplex {
    pub dims: BTreeMap<(i32, i32), usize>,
    pub h: BTreeMap<(i32, i32), QMatrix>,
    pub v: BTreeMap<(i32, i32), QMatrix>,
}

impl LinearDoubleComplex {
    /// The totalization as block matrices, with the sign convention of [`total_complex`].
    pub fn total(&self) -> Result<LinearComplex> {
        let mut blocks: BTreeMap<i32, Vec<((i32, i32), usize)>> = BTreeMap::new();
        for (&(p, q), &d) in &self.dims {
            blocks.entry(p + q).or_default().push(((p, q), d));
        }
        let offsets = |m: i32| -> BTreeMap<(i32, i32), usize> {
            let mut off = 0;
            let mut out = BTreeMap::new();
            for (b, d) in blocks.get(&m).cloned().unwrap_or_default() {
                out.insert(b, off);
                off += d;
            }
            out
        };
        let dims: BTreeMap<i32, usize> = blocks.iter().map(|(&m, v)| (m, v.iter().map(|(_, d)| d).sum())).collect();
        let mut maps = BTreeMap::new();
        for (&m, &dim) in &dims {
            let Some(&target_dim) = dims.get(&(m + 1)) else { continue };
            let src_off = offsets(m);
            let dst_off = offsets(m + 1);
            let mut big = QMatrix::zeros(target_dim, dim);
            for (&(p, q), &so) in &src_off {
                let sign = BigRational::from_integer(BigInt::from(total_sign(p)));
                let pieces = [
                    (self.h.get(&(p, q)), (p + 1, q), BigRational::from_integer(BigInt::from(1))),
                    (self.v.get(&(p, q)), (p, q + 1), sign),
                ];
                for (mat, target, s) in pieces {
                    let (Some(mat), Some(&to)) = (mat, dst_off.get(&target)) else { continue };
                    for i in 0..mat.rows {
                        for j in 0..mat.cols {
                            let v = big.get(to + i, so + j) + mat.get(i, j) * &s;
                            big.set(to + i, so + j, v);
                        }
                    }
                }
            }
            maps.insert(m, big);
        }
        LinearComplex::new(dims, maps)
    }

    pub fn to_double(&self) -> DoubleComplex<QVec> {
        let zeros = self.dims.iter().map(|(&b, &d)| (b, QVec::zeros(d))).collect();
        let (h, v, dims) = (self.h.clone(), self.v.clone(), self.dims.clone());
        let dims2 = dims.clone();
        DoubleComplex::new(
            zeros,
            move |p, q, x: &QVec| {
                Ok(h.get(&(p, q)).map(|m| m.apply(x)).unwrap_or_else(|| QVec::zeros(dims.get(&(p + 1, q)).copied().unwrap_or(0))))
            },
            move |p, q, x: &QVec| {
                Ok(v.get(&(p, q))
                    .map(|m| m.apply(x))
                    .unwrap_or_else(|| QVec::zeros(dims2.get(&(p, q + 1)).copied().unwrap_or(0))))
            },
        )
    }
}

/// Random exact test data: complexes built from `Q[p]` and `Q --1--> Q` pieces under random
/// integral changes of basis, and DK simplices over them that satisfy the boundary condition.
pub mod random {
    use super::*;
    use rand::Rng;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn identity(n: usize) -> QMatrix {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, q(1));
        }
        m
    }

    /// A product of elementary matrices and its inverse.
    fn change_of_basis<R: Rng>(rng: &mut R, n: usize) -> (QMatrix, QMatrix) {
        let (mut a, mut inv) = (identity(n), identity(n));
        if n < 2 {
            return (a, inv);
        }
        for _ in 0..2 * n {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let k = rng.gen_range(-3i64..=3);
            let (mut e, mut e_inv) = (identity(n), identity(n));
            e.set(i, j, q(k));
            e_inv.set(i, j, q(-k));
            a = e.mul(&a);
            inv = inv.mul(&e_inv);
        }
        (a, inv)
    }

    /// A complex supported in `lo..=0`.
    pub fn linear_complex<R: Rng>(rng: &mut R, lo: i32) -> LinearComplex {
        let free: BTreeMap<i32, usize> = (lo..=0).map(|p| (p, rng.gen_range(0..=1))).collect();
        let pairs: BTreeMap<i32, usize> = (lo..=0).map(|p| (p, if p < 0 { rng.gen_range(0..=2) } else { 0 })).collect();
        // degree p basis: free pieces, sources of pairs at p, targets of pairs from p - 1
        let dims: BTreeMap<i32, usize> =
            (lo..=0).map(|p| (p, free[&p] + pairs[&p] + pairs.get(&(p - 1)).copied().unwrap_or(0))).collect();
        let bases: BTreeMap<i32, (QMatrix, QMatrix)> = (lo..=0).map(|p| (p, change_of_basis(rng, dims[&p]))).collect();
        let mut maps = BTreeMap::new();
        for p in lo..0 {
            let mut d = QMatrix::zeros(dims[&(p + 1)], dims[&p]);
            for k in 0..pairs[&p] {
                d.set(free[&(p + 1)] + pairs[&(p + 1)] + k, free[&p] + k, q(1));
            }
            maps.insert(p, bases[&(p + 1)].0.mul(&d).mul(&bases[&p].1));
        }
        LinearComplex::new(dims, maps).expect("consistent shapes")
    }

    fn vector<R: Rng>(rng: &mut R, len: usize) -> QVec {
        QVec(
            (0..len).map(|_| BigRational::new(BigInt::from(rng.gen_range(-4..=4)), BigInt::from(rng.gen_range(1..=3)))).collect(),
        )
    }

    /// `x_c = d y_c + Σ_j (-1)^j y_{∂_j c}` for random `y` of one degree lower, plus a constant
    /// cycle on the vertices.
    pub fn valid_simplex<R: Rng>(rng: &mut R, dim: usize, c: &GradedComplex<QVec>) -> Result<DKSimplex<QVec>> {
        let len = |p: i32| c.zero(p).map(QVec::len).unwrap_or(0);
        let y: BTreeMap<Vec<usize>, QVec> = all_cells(dim)
            .into_iter()
            .map(|cell| {
                let l = len(cell_degree(cell.len()) - 1);
                (cell, vector(rng, l))
            })
            .collect();
        let constant = vector(rng, len(0));
        let mut labels = BTreeMap::new();
        for cell in all_cells(dim) {
            let p = cell_degree(cell.len());
            let Some(zero) = c.zero(p) else { continue };
            let mut x = if c.has_degree(p - 1) { c.d(p - 1, &y[&cell])?.unwrap_or_else(|| zero.clone()) } else { zero.clone() };
            if cell.len() == 1 {
                x = x.add(&constant);
            } else {
                for j in 0..cell.len() {
                    let mut face = cell.clone();
                    face.remove(j);
                    x = if j % 2 == 0 { x.add(&y[&face]) } else { x.sub(&y[&face]) };
                }
            }
            labels.insert(cell, x);
        }
        DKSimplex::from_labels(dim, c, labels)
    }
}

/// Number of instances of each identity checked by [`simplicial_identity_failures`]:
/// `d_i d_j`, `d_i s_j` (i < j), `d_j s_j = d_{j+1} s_j = id`, `d_i s_j` (i > j + 1), `s_i s_j`.
pub type IdentityCounts = [usize; 5];

/// Checks the five simplicial identities on `s` with exact label equality; returns how many
/// instances were checked and a description of every failure.
pub fn simplicial_identity_failures<E: Element + PartialEq + 'static>(s: &DKSimplex<E>) -> Result<(IdentityCounts, Vec<String>)> {
    let same = |a: &DKSimplex<E>, b: &DKSimplex<E>| a.dim == b.dim && a.labels == b.labels;
    let dim = s.dim;
    let mut counts = [0usize; 5];
    let mut failures = Vec::new();
    let mut record = |slot: usize, ok: bool, what: String| {
        counts[slot] += 1;
        if !ok {
            failures.push(what);
        }
    };
    for j in 0..=dim {
        let g = dk_degeneracy(j, s)?;
        record(2, same(&dk_face(j, &g)?, s) && same(&dk_face(j + 1, &g)?, s), format!("d_{j} s_{j} = d_{} s_{j} = id", j + 1));
        for i in 0..j {
            if dim >= 2 {
                let ok = same(&dk_face(i, &dk_face(j, s)?)?, &dk_face(j - 1, &dk_face(i, s)?)?);
                record(0, ok, format!("d_{i} d_{j} = d_{} d_{i}", j - 1));
            }
            let ok = same(&dk_face(i, &g)?, &dk_degeneracy(j - 1, &dk_face(i, s)?)?);
            record(1, ok, format!("d_{i} s_{j} = s_{} d_{i}", j - 1));
        }
        for i in j + 2..=dim + 1 {
            let ok = same(&dk_face(i, &g)?, &dk_degeneracy(j, &dk_face(i - 1, s)?)?);
            record(3, ok, format!("d_{i} s_{j} = s_{j} d_{}", i - 1));
        }
        for i in 0..=j {
            let ok = same(&dk_degeneracy(i, &g)?, &dk_degeneracy(j + 1, &dk_degeneracy(i, s)?)?);
            record(4, ok, format!("s_{i} s_{j} = s_{} s_{i}", j + 1));
        }
    }
    Ok((counts, failures))
}

/// Converts an exact rational to `i64` when it is a small integer (test helper for reports).
pub fn small_integer(q: &BigRational) -> Option<i64> {
    q.is_integer().then(|| q.numer().to_i64()).flatten()
}
