//! Chart simplices and the Chern-Weil cocycle map.
//!
//! A chart simplex of level `l` is a family of charts `ρ_0 .. ρ_l` out of a common source
//! `W` (known through sample points), with transitions `φ_{p,q} = ρ_p ∘ ρ_q^{-1}`. The
//! cocycle map labels its `k`-cells by `ρ_k^*(T[θ_1, .., θ_k])` with
//! `θ_r = φ_{r,k}^♯ θ(φ_{r-1,r})`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{apply_invariant, binomial, point_json, pullback_kform, sharp_pullback, theta, MatrixOneForm, ScalarKForm};
use crate::invariant_poly::InvariantMap;
use crate::linalg::{format_point, increasing_subsets};
use crate::map_dsl::{Holomorphic, Identity, MapChain};
use crate::parallel::par_map;
use crate::simplicial::{cell_degree, DKSimplex, GradedComplex, SampledForm};
use crate::Point;

/// Tolerance for `φ_{p,q}(ρ_q(w)) = ρ_p(w)`.
pub const COHERENCE_TOL: f64 = 1e-9;
/// Default tolerance for the telescoping identity.
pub const TELESCOPING_TOL: f64 = 1e-7;
/// Fewer samples than this produce a warning.
pub const MIN_RECOMMENDED_SAMPLES: usize = 8;

#[derive(Clone)]
pub struct ChartSimplex {
    n: usize,
    charts: Vec<Arc<dyn Holomorphic>>,
    /// `φ_{p,q}` for `p < q`; `φ_{p,p}` is the identity.
    transitions: BTreeMap<(usize, usize), Arc<dyn Holomorphic>>,
    samples: Vec<Point>,
}

impl fmt::Debug for ChartSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartSimplex")
            .field("n", &self.n)
            .field("level", &self.level())
            .field("charts", &self.charts.iter().map(|c| c.describe()).collect::<Vec<_>>())
            .field("samples", &self.samples.len())
            .finish()
    }
}

fn identity(n: usize) -> Arc<dyn Holomorphic> {
    Arc::new(Identity(n))
}

impl ChartSimplex {
    /// `transitions` must contain `φ_{p,q}` for every `p < q`.
    pub fn new(
        charts: Vec<Arc<dyn Holomorphic>>,
        transitions: BTreeMap<(usize, usize), Arc<dyn Holomorphic>>,
        samples: Vec<Point>,
    ) -> Result<Self> {
        let Some(first) = charts.first() else {
            return Err(Error::validation("a chart simplex needs at least one chart"));
        };
        let n = first.dim();
        for m in charts.iter().chain(transitions.values()) {
            if m.dim() != n {
                return Err(Error::Dimension { expected: n, found: m.dim() });
            }
        }
        for p in &samples {
            if p.len() != n {
                return Err(Error::Dimension { expected: n, found: p.len() });
            }
        }
        let level = charts.len() - 1;
        let mut all = BTreeMap::new();
        for p in 0..=level {
            for q in p + 1..=level {
                let t = transitions.get(&(p, q)).ok_or_else(|| Error::MissingTransition(format!("φ_{{{p},{q}}}")))?;
                all.insert((p, q), t.clone());
            }
        }
        Ok(ChartSimplex { n, charts, transitions: all, samples })
    }

    /// Fills `φ_{p,q}` for `q > p + 1` by composing adjacent transitions, unless given in
    /// `extra`.
    pub fn from_adjacent(
        charts: Vec<Arc<dyn Holomorphic>>,
        adjacent: Vec<Arc<dyn Holomorphic>>,
        extra: BTreeMap<(usize, usize), Arc<dyn Holomorphic>>,
        samples: Vec<Point>,
    ) -> Result<Self> {
        if charts.is_empty() || adjacent.len() + 1 != charts.len() {
            return Err(Error::validation(format!(
                "{} charts need {} adjacent transitions, found {}",
                charts.len(),
                charts.len().saturating_sub(1),
                adjacent.len()
            )));
        }
        let n = charts[0].dim();
        let level = charts.len() - 1;
        let mut transitions = extra;
        for p in 0..level {
            for q in p + 1..=level {
                if transitions.contains_key(&(p, q)) {
                    continue;
                }
                let t: Arc<dyn Holomorphic> =
                    if q == p + 1 { adjacent[p].clone() } else { Arc::new(MapChain::new(n, adjacent[p..q].to_vec())?) };
                transitions.insert((p, q), t);
            }
        }
        ChartSimplex::new(charts, transitions, samples)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.charts.len() - 1
    }

    pub fn charts(&self) -> &[Arc<dyn Holomorphic>] {
        &self.charts
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    /// `φ_{p,q}` for `p <= q`.
    pub fn transition(&self, p: usize, q: usize) -> Result<Arc<dyn Holomorphic>> {
        if p == q && p <= self.level() {
            return Ok(identity(self.n));
        }
        self.transitions.get(&(p, q)).cloned().ok_or_else(|| Error::MissingTransition(format!("φ_{{{p},{q}}}")))
    }

    /// Max over samples and pairs `p < q` of `|φ_{p,q}(ρ_q(w)) - ρ_p(w)|`.
    pub fn coherence_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in &self.samples {
            let images: Vec<Point> = self.charts.iter().map(|c| c.eval(w)).collect::<Result<_>>()?;
            for (&(p, q), t) in &self.transitions {
                let y = t.eval(&images[q])?;
                for (a, b) in y.iter().zip(&images[p]) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn check_coherence(&self, tol: f64) -> Result<()> {
        let r = self.coherence_residual()?;
        if r > tol {
            return Err(Error::validation(format!("chart simplex is incoherent: residual {r:e} exceeds {tol:e}")));
        }
        Ok(())
    }

    /// Sub-simplex on the charts `vertices` (increasing).
    pub fn sub_simplex(&self, vertices: &[usize]) -> Result<ChartSimplex> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) || *vertices.last().unwrap() > self.level() {
            return Err(Error::validation(format!("{vertices:?} is not a face of a {}-simplex", self.level())));
        }
        let charts = vertices.iter().map(|&v| self.charts[v].clone()).collect();
        let mut transitions = BTreeMap::new();
        for (a, &p) in vertices.iter().enumerate() {
            for (b, &q) in vertices.iter().enumerate().skip(a + 1) {
                transitions.insert((a, b), self.transition(p, q)?);
            }
        }
        ChartSimplex::new(charts, transitions, self.samples.clone())
    }

    /// The `j`-th face: chart `j` removed.
    pub fn face(&self, j: usize) -> Result<ChartSimplex> {
        if j > self.level() || self.level() == 0 {
            return Err(Error::validation(format!("face index {j} out of range for level {}", self.level())));
        }
        let vertices: Vec<usize> = (0..=self.level()).filter(|&v| v != j).collect();
        self.sub_simplex(&vertices)
    }

    /// The `j`-th degeneracy: chart `j` repeated, joined to itself by the identity.
    pub fn degeneracy(&self, j: usize) -> Result<ChartSimplex> {
        if j > self.level() {
            return Err(Error::validation(format!("degeneracy index {j} out of range for level {}", self.level())));
        }
        let sigma = |i: usize| if i <= j { i } else { i - 1 };
        let level = self.level() + 1;
        let charts = (0..=level).map(|i| self.charts[sigma(i)].clone()).collect();
        let mut transitions = BTreeMap::new();
        for p in 0..=level {
            for q in p + 1..=level {
                transitions.insert((p, q), self.transition(sigma(p), sigma(q))?);
            }
        }
        ChartSimplex::new(charts, transitions, self.samples.clone())
    }

    /// Same charts, only the samples with the given indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<ChartSimplex> {
        let samples = indices
            .iter()
            .map(|&i| self.samples.get(i).cloned().ok_or_else(|| Error::validation(format!("no sample {i}"))))
            .collect::<Result<_>>()?;
        Ok(ChartSimplex { samples, ..self.clone() })
    }
}

/// `θ_r = φ_{r,l}^♯ θ(φ_{r-1,r})`, a matrix 1-form on the last chart's image.
pub fn theta_r(s: &ChartSimplex, r: usize) -> Result<MatrixOneForm> {
    let l = s.level();
    if r < 1 || r > l {
        return Err(Error::validation(format!("θ_r needs 1 <= r <= {l}, got {r}")));
    }
    let base = theta(s.transition(r - 1, r)?);
    if r == l {
        return Ok(base);
    }
    sharp_pullback(s.transition(r, l)?, &base)
}

/// `ρ_k^*(T[θ_1, .., θ_k])` for a simplex of level `k = arity(T)`.
pub fn cf_label_top(s: &ChartSimplex, t: &InvariantMap) -> Result<ScalarKForm> {
    let k = s.level();
    if k != t.arity() {
        return Err(Error::Arity { expected: t.arity(), found: k });
    }
    let thetas = (1..=k).map(|r| theta_r(s, r)).collect::<Result<Vec<_>>>()?;
    let form = apply_invariant(t, &thetas)?;
    pullback_kform(s.charts[k].clone(), &form)
}

/// Evaluates `form` at every point (in parallel, order preserved).
pub fn sample_form(form: &ScalarKForm, points: &[Point]) -> Result<SampledForm> {
    if form.is_structurally_zero() {
        return Ok(SampledForm::zeros(points.len(), binomial(form.n(), form.k())));
    }
    let values = par_map(points, |p| form.eval(p)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SampledForm { values })
}

/// The complex holding `cf_map` labels: sampled `k`-forms in degree `-k`, zero differential.
pub fn label_complex(n: usize, k: usize, points: usize) -> GradedComplex<SampledForm> {
    GradedComplex::concentrated(format!("Ω^{k}[{k}]"), -(k as i32), SampledForm::zeros(points, binomial(n, k)))
}

/// The cocycle map on a chart simplex of any level: `k`-cells are labeled by the top label of
/// the corresponding face simplex; all other cells carry zero.
pub fn cf_map(s: &ChartSimplex, t: &InvariantMap) -> Result<DKSimplex<SampledForm>> {
    let k = t.arity();
    let complex = label_complex(s.n, k, s.samples.len());
    let mut out = DKSimplex::zero(s.level(), &complex);
    if s.level() < k {
        return Ok(out);
    }
    for cell in increasing_subsets(s.level() + 1, k + 1) {
        debug_assert_eq!(cell_degree(cell.len()), -(k as i32));
        let face = s.sub_simplex(&cell)?;
        let label = sample_form(&cf_label_top(&face, t)?, &s.samples)?;
        out.set_label(cell, label)?;
    }
    Ok(out)
}

/// Outcome of [`verify_telescoping`].
#[derive(Clone, Debug)]
pub struct TelescopingReport {
    pub per_point: Vec<f64>,
    pub max_residual: f64,
    pub worst_point: Option<Point>,
    pub tol: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

impl TelescopingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "worst_point": self.worst_point.as_ref().map(|p| point_json(p)),
            "per_point": self.per_point,
            "warnings": self.warnings,
        })
    }
}

/// `sum_j (-1)^j cf_label_top(d_j s)` at each point, for `s` of level `arity(T) + 1`.
pub fn verify_telescoping(s: &ChartSimplex, t: &InvariantMap, points: &[Point], tol: f64) -> Result<TelescopingReport> {
    if s.level() != t.arity() + 1 {
        return Err(Error::validation(format!("telescoping needs a simplex of level {}, got {}", t.arity() + 1, s.level())));
    }
    let mut total: Option<ScalarKForm> = None;
    for j in 0..=s.level() {
        let label = cf_label_top(&s.face(j)?, t)?;
        let signed = if j % 2 == 0 { label } else { label.scale(Complex64::new(-1.0, 0.0)) };
        total = Some(match total {
            None => signed,
            Some(acc) => acc.add(&signed)?,
        });
    }
    let total = total.expect("at least two faces");
    let sampled = sample_form(&total, points)?;
    let per_point = sampled.per_point();
    let (worst_idx, max_residual) =
        per_point
            .iter()
            .enumerate()
            .fold((None, 0.0_f64), |(wi, wm), (i, &r)| if wi.is_none() || r > wm { (Some(i), r) } else { (wi, wm) });
    let mut warnings = Vec::new();
    if points.len() < MIN_RECOMMENDED_SAMPLES {
        warnings.push(format!("only {} sample points (recommended at least {MIN_RECOMMENDED_SAMPLES})", points.len()));
    }
    Ok(TelescopingReport {
        pass: max_residual <= tol,
        worst_point: worst_idx.map(|i| points[i].clone()),
        per_point,
        max_residual,
        tol,
        warnings,
    })
}

/// Human-readable summary of the worst point of a report.
pub fn describe_worst(report: &TelescopingReport) -> String {
    match &report.worst_point {
        Some(p) => format!("max residual {:e} at {}", report.max_residual, format_point(p)),
        None => "no sample points".into(),
    }
}
