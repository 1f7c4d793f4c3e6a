//! The Bochner-Martinelli kernel `ω⁰(z, ξ)`: evaluation, ∂̄-closedness by finite differences,
//! sphere quadrature on `C²`, the vertex pullback `(ρ×ρ)^*ω⁰`, and diagonal restriction of
//! forms that extend across the diagonal.
//!
//! With `w = ξ - z`, the coefficient stored at 0-based position `i` is
//! `b_n (-1)^{i+1} conj(w_{i+1}) / |w|^{2n}` and multiplies
//! `⋀_{j≠i}(dξ̄_j - dz̄_j) ∧ dξ_1 ∧ .. ∧ dξ_n`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::point_json;
use crate::linalg::{format_point, increasing_subsets, minor, CMatrix};
use crate::map_dsl::Holomorphic;
use crate::Point;

/// `|ξ - z|` below this is treated as the diagonal.
pub const DIAGONAL_CUTOFF: f64 = 1e-12;
pub const MIN_QUAD_ORDER: usize = 4;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `b_n = -(-1)^{n(n-1)} (n-1)! / (2πi)`.
pub fn b_n(n: usize) -> Complex64 {
    let sign = if (n * n.saturating_sub(1)).is_multiple_of(2) { 1.0 } else { -1.0 };
    -sign * factorial(n.saturating_sub(1)) / Complex64::new(0.0, 2.0 * PI)
}

/// The prefactor for which the kernel integrates to 1 over spheres around `z`:
/// `(n-1)! / (2πi)^n`.
pub fn classical_prefactor(n: usize) -> Complex64 {
    factorial(n - 1) / Complex64::new(0.0, 2.0 * PI).powu(n as u32)
}

#[derive(Clone, Debug)]
pub struct BMEvaluation {
    pub n: usize,
    pub z: Point,
    pub xi: Point,
    pub prefactor: Complex64,
    pub coefficients: Vec<Complex64>,
}

/// `ω⁰(z, ξ)` with the paper normalization `b_n`.
pub fn bm_eval(n: usize, z: &[Complex64], xi: &[Complex64]) -> Result<BMEvaluation> {
    bm_eval_with(n, z, xi, b_n(n))
}

pub fn bm_eval_with(n: usize, z: &[Complex64], xi: &[Complex64], prefactor: Complex64) -> Result<BMEvaluation> {
    if n < 2 {
        return Err(Error::validation(format!("the kernel needs n >= 2, got {n}")));
    }
    if z.len() != n || xi.len() != n {
        return Err(Error::Dimension { expected: n, found: if z.len() != n { z.len() } else { xi.len() } });
    }
    let w: Vec<Complex64> = xi.iter().zip(z).map(|(a, b)| a - b).collect();
    let r2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    if r2.sqrt() < DIAGONAL_CUTOFF {
        return Err(Error::domain(xi, format!("|ξ - z| = {:e} is on the diagonal", r2.sqrt())));
    }
    let denom = r2.powi(n as i32);
    let coefficients = w
        .iter()
        .enumerate()
        .map(|(i, wi)| {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            prefactor * sign * wi.conj() / denom
        })
        .collect();
    Ok(BMEvaluation { n, z: z.to_vec(), xi: xi.to_vec(), prefactor, coefficients })
}

impl BMEvaluation {
    /// Evaluates the form on `2n - 1` tangent vectors in the `ξ` factor (`z` held fixed).
    pub fn eval_on_xi(&self, vectors: &[Vec<Complex64>]) -> Result<Complex64> {
        let n = self.n;
        if vectors.len() != 2 * n - 1 {
            return Err(Error::Arity { expected: 2 * n - 1, found: vectors.len() });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (i, c) in self.coefficients.iter().enumerate() {
            let mut rows = Vec::with_capacity(2 * n - 1);
            for j in (0..n).filter(|&j| j != i) {
                rows.push(vectors.iter().map(|v| v[j].conj()).collect::<Vec<_>>());
            }
            for j in 0..n {
                rows.push(vectors.iter().map(|v| v[j]).collect::<Vec<_>>());
            }
            let m = CMatrix::from_rows(rows).expect("square");
            total += c * m.det();
        }
        Ok(total)
    }

    /// Coefficients in the bi-form basis of [`SampledBiForm`].
    pub fn expand(&self) -> SampledBiForm {
        let n = self.n;
        let subsets = increasing_subsets(2 * n, n - 1);
        let mut values = vec![Complex64::new(0.0, 0.0); subsets.len()];
        for (i, c) in self.coefficients.iter().enumerate() {
            let mut rows = CMatrix::zeros(2 * n);
            for (r, j) in (0..n).filter(|&j| j != i).enumerate() {
                rows.set(r, j, Complex64::new(-1.0, 0.0));
                rows.set(r, n + j, Complex64::new(1.0, 0.0));
            }
            let used: Vec<usize> = (0..n - 1).collect();
            for (s, cols) in subsets.iter().enumerate() {
                values[s] += c * minor(&rows, &used, cols);
            }
        }
        SampledBiForm { n, w: self.z.clone(), w2: self.xi.clone(), values }
    }
}

/// An `(n, n-1)`-form on `W × W` at one point `(w, w')`, written
/// `Σ_S values[S] dw̄_S ∧ dw'_1 ∧ .. ∧ dw'_n` over increasing `S` of size `n - 1`, where
/// basis index `j < n` is `dw̄_j` and `n + j` is `dw̄'_j`.
#[derive(Clone, Debug)]
pub struct SampledBiForm {
    pub n: usize,
    pub w: Point,
    pub w2: Point,
    pub values: Vec<Complex64>,
}

impl SampledBiForm {
    pub fn basis(&self) -> Vec<Vec<usize>> {
        increasing_subsets(2 * self.n, self.n - 1)
    }

    /// Pullback along `ψ × ψ` given `Jψ` at both points; `w`, `w2` become the preimages.
    pub fn pullback(&self, jac_w: &CMatrix, jac_w2: &CMatrix, w: Point, w2: Point) -> SampledBiForm {
        let n = self.n;
        let mut m = CMatrix::zeros(2 * n);
        for a in 0..n {
            for b in 0..n {
                m.set(a, b, jac_w.get(a, b).conj());
                m.set(n + a, n + b, jac_w2.get(a, b).conj());
            }
        }
        let basis = self.basis();
        let det = jac_w2.det();
        let values = basis
            .iter()
            .map(|t| basis.iter().zip(&self.values).map(|(s, v)| v * minor(&m, s, t)).sum::<Complex64>() * det)
            .collect();
        SampledBiForm { n, w, w2, values }
    }

    pub fn max_abs_diff(&self, other: &SampledBiForm) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "w": point_json(&self.w),
            "w2": point_json(&self.w2),
            "values": self.values.iter().map(|v| json!([v.re, v.im])).collect::<Vec<_>>(),
        })
    }
}

/// `(ρ×ρ)^*ω⁰` at each off-diagonal pair of source points.
pub fn bm_vertex(rho: &Arc<dyn Holomorphic>, pairs: &[(Point, Point)]) -> Result<Vec<SampledBiForm>> {
    let n = rho.dim();
    pairs
        .iter()
        .map(|(w, w2)| {
            let (a, b) = (rho.jet(w)?, rho.jet(w2)?);
            let kernel = bm_eval(n, &a.value, &b.value)?;
            Ok(kernel.expand().pullback(&a.jac, &b.jac, w.clone(), w2.clone()))
        })
        .collect()
}

/// `|Σ_i (-1)^i ∂c_i/∂ξ̄_i|` by central differences, `c` the coefficient vector as a function
/// of `ξ`.
pub fn dbar_residual(
    n: usize,
    coefficients: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    xi: &[Complex64],
    h: f64,
) -> Result<f64> {
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let shifted = |d: Complex64| -> Result<Complex64> {
            let mut p = xi.to_vec();
            p[i] += d;
            Ok(coefficients(&p)?[i])
        };
        let dx = (shifted(Complex64::new(h, 0.0))? - shifted(Complex64::new(-h, 0.0))?) / (2.0 * h);
        let dy = (shifted(Complex64::new(0.0, h))? - shifted(Complex64::new(0.0, -h))?) / (2.0 * h);
        let dbar = 0.5 * (dx + Complex64::i() * dy);
        total += if i % 2 == 0 { dbar } else { -dbar };
    }
    Ok(total.norm())
}

/// Deterministic points on the sphere of radius `r` around `z`.
pub fn sphere_probes(z: &[Complex64], r: f64, count: usize) -> Vec<Point> {
    let n = z.len();
    (0..count)
        .map(|k| {
            let raw: Vec<Complex64> = (0..n)
                .map(|j| {
                    let t = (k * n + j) as f64 + 0.5;
                    Complex64::new((t * 1.618_033_988_75).sin(), (t * 2.414_213_562_37).cos())
                })
                .collect();
            let norm = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            raw.iter().zip(z).map(|(x, c)| c + x * (r / norm)).collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DbarReport {
    pub probes: usize,
    pub h: f64,
    pub residual_h: f64,
    pub residual_half: f64,
    /// `residual_h / residual_half`; about 4 for a second-order scheme.
    pub ratio: Option<f64>,
    /// `residual_h / h²`.
    pub fitted_c: f64,
    pub pass: bool,
}

impl DbarReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "probes": self.probes,
            "h": self.h,
            "residual_h": self.residual_h,
            "residual_half": self.residual_half,
            "ratio": self.ratio,
            "fitted_c": self.fitted_c,
        })
    }
}

/// Residual scale below which a ∂̄ residual counts as exactly zero.
const DBAR_FLOOR: f64 = 1e-300;

/// ∂̄-closedness of `coefficients` at the probes for steps `h` and `h/2`. Passes when the
/// residual is zero or the step-halving ratio lies in `4 ± 20%`.
pub fn dbar_check_with(
    n: usize,
    z: &[Complex64],
    probes: &[Point],
    h: f64,
    coefficients: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
) -> Result<DbarReport> {
    if !(h > 0.0) {
        return Err(Error::validation(format!("step must be positive, got {h}")));
    }
    for p in probes {
        let d = p.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if d < 10.0 * h {
            return Err(Error::domain(p, format!("probe is within 10h = {:e} of the diagonal", 10.0 * h)));
        }
    }
    let mut residual_h: f64 = 0.0;
    let mut residual_half: f64 = 0.0;
    for p in probes {
        residual_h = residual_h.max(dbar_residual(n, coefficients, p, h)?);
        residual_half = residual_half.max(dbar_residual(n, coefficients, p, h / 2.0)?);
    }
    let ratio = (residual_half > DBAR_FLOOR).then(|| residual_h / residual_half);
    let pass = match ratio {
        None => residual_h <= DBAR_FLOOR,
        Some(r) => (3.2..=4.8).contains(&r),
    };
    Ok(DbarReport { probes: probes.len(), h, residual_h, residual_half, ratio, fitted_c: residual_h / (h * h), pass })
}

/// ∂̄-closedness of `ω⁰(z, ·)` on the given probes.
pub fn dbar_closed_check(n: usize, z: &[Complex64], probes: &[Point], h: f64) -> Result<DbarReport> {
    let zz = z.to_vec();
    dbar_check_with(n, z, probes, h, &move |xi| Ok(bm_eval(n, &zz, xi)?.coefficients))
}

/// `∫_{|ξ - z| = r} ω⁰(z, ξ)` for `n = 2`, with the kernel scaled by `prefactor` in place of
/// `b_2`. Tensor Gauss-Legendre on `ξ - z = r (cos η e^{iα}, sin η e^{iβ})`.
pub fn reproducing_integral(z: &[Complex64], r: f64, order: usize, prefactor: Complex64) -> Result<Complex64> {
    if z.len() != 2 {
        return Err(Error::Dimension { expected: 2, found: z.len() });
    }
    if !(r > 0.0) {
        return Err(Error::validation(format!("radius must be positive, got {r}")));
    }
    if order < MIN_QUAD_ORDER {
        return Err(Error::validation(format!("quadrature order {order} is below the minimum {MIN_QUAD_ORDER}")));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("positive"));
    let nodes: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    let scaled = |a: f64, b: f64| -> Vec<(f64, f64)> {
        nodes.iter().map(|&(x, w)| (0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w)).collect()
    };
    let etas = scaled(0.0, PI / 2.0);
    let angles = scaled(0.0, 2.0 * PI);
    let i = Complex64::i();
    let mut total = Complex64::new(0.0, 0.0);
    for &(eta, w_eta) in &etas {
        let mut partial = Complex64::new(0.0, 0.0);
        for &(alpha, w_alpha) in &angles {
            for &(beta, w_beta) in &angles {
                let (ea, eb) = ((i * alpha).exp(), (i * beta).exp());
                let w = [r * eta.cos() * ea, r * eta.sin() * eb];
                let d_eta = vec![-r * eta.sin() * ea, r * eta.cos() * eb];
                let d_alpha = vec![i * w[0], Complex64::new(0.0, 0.0)];
                let d_beta = vec![Complex64::new(0.0, 0.0), i * w[1]];
                let xi: Point = w.iter().zip(z).map(|(a, b)| a + b).collect();
                let kernel = bm_eval_with(2, z, &xi, prefactor)?;
                let value = kernel.eval_on_xi(&[d_eta.clone(), d_alpha.clone(), d_beta.clone()])?;
                let sign = orientation(&w, &d_eta, &d_alpha, &d_beta);
                partial += value * (sign * w_alpha * w_beta);
            }
        }
        total += partial * w_eta;
    }
    Ok(total)
}

/// Sign of `(outward normal, tangents)` against the complex orientation of `C²`.
fn orientation(w: &[Complex64], a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> f64 {
    let real = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter().flat_map(|x| [Complex64::new(x.re, 0.0), Complex64::new(x.im, 0.0)]).collect()
    };
    let m = CMatrix::from_rows(vec![real(w), real(a), real(b), real(c)]).expect("4x4");
    if m.det().re >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Inputs to [`parametrix_check`]: components `ω^q_{i_0..i_q}` as `(0, s)`-forms on `C^n`
/// given by their coefficients on increasing index sets of size `s`.
pub type ParametrixComponent = dyn Fn(&[usize], &[Complex64]) -> Result<Vec<Complex64>> + Send + Sync;

/// Max over multi-indices and probes of `|∂̄ω^q - δω^{q-1}|`, where `ω^{q-1}` are
/// `(0, s+1)`-forms and `ω^q` are `(0, s)`-forms. Derivatives by central differences with
/// step `h`.
pub fn parametrix_check(
    n: usize,
    s: usize,
    indices: usize,
    q: usize,
    lower: &ParametrixComponent,
    upper: &ParametrixComponent,
    probes: &[Point],
    h: f64,
) -> Result<f64> {
    if q == 0 || s + 1 > n {
        return Err(Error::validation(format!("parametrix check needs q >= 1 and s < n, got q = {q}, s = {s}")));
    }
    let upper_sets = increasing_subsets(n, s);
    let lower_sets = increasing_subsets(n, s + 1);
    let mut worst: f64 = 0.0;
    let mut multi = vec![0usize; q + 1];
    loop {
        for z in probes {
            // ∂̄ of Σ_I a_I dz̄_I is Σ_I Σ_j ∂a_I/∂z̄_j dz̄_j ∧ dz̄_I.
            let mut dbar = vec![Complex64::new(0.0, 0.0); lower_sets.len()];
            for j in 0..n {
                let at = |d: Complex64| -> Result<Vec<Complex64>> {
                    let mut p = z.clone();
                    p[j] += d;
                    upper(&multi, &p)
                };
                let (xp, xm) = (at(Complex64::new(h, 0.0))?, at(Complex64::new(-h, 0.0))?);
                let (yp, ym) = (at(Complex64::new(0.0, h))?, at(Complex64::new(0.0, -h))?);
                for (u, set) in upper_sets.iter().enumerate() {
                    if set.contains(&j) {
                        continue;
                    }
                    let d = 0.5 * ((xp[u] - xm[u]) + Complex64::i() * (yp[u] - ym[u])) / (2.0 * h);
                    let mut merged = set.clone();
                    let pos = merged.iter().filter(|&&x| x < j).count();
                    merged.insert(pos, j);
                    let slot = lower_sets.iter().position(|t| *t == merged).expect("basis set");
                    dbar[slot] += if pos % 2 == 0 { d } else { -d };
                }
            }
            let mut delta = vec![Complex64::new(0.0, 0.0); lower_sets.len()];
            for k in 0..=q {
                let mut face = multi.clone();
                face.remove(k);
                for (acc, v) in delta.iter_mut().zip(lower(&face, z)?) {
                    *acc += if k % 2 == 0 { v } else { -v };
                }
            }
            for (a, b) in dbar.iter().zip(&delta) {
                worst = worst.max((a - b).norm());
            }
        }
        let mut pos = q + 1;
        loop {
            if pos == 0 {
                return Ok(worst);
            }
            pos -= 1;
            multi[pos] += 1;
            if multi[pos] < indices {
                break;
            }
            multi[pos] = 0;
        }
    }
}

/// How [`hartogs_diagonal`] approaches the diagonal: `ξ = z + ε v` for each direction `v` and
/// `ε = eps0 / 2^j`, `j < levels`.
#[derive(Clone, Debug)]
pub struct HartogsSpec {
    pub directions: Vec<Point>,
    pub eps0: f64,
    pub levels: usize,
}

impl HartogsSpec {
    pub fn standard(n: usize) -> Self {
        let mut directions = Vec::new();
        for j in 0..n {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[j] = Complex64::new(1.0, 0.0);
            directions.push(v);
        }
        let s = 1.0 / (n as f64).sqrt();
        directions
            .push((0..n).map(|j| Complex64::new(s * (0.3 * j as f64 + 0.5).cos(), s * (0.3 * j as f64 + 0.5).sin())).collect());
        HartogsSpec { directions, eps0: 0.1, levels: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct HartogsPoint {
    pub z: Point,
    pub value: Vec<Complex64>,
    /// Largest extrapolation residual over directions.
    pub estimate: f64,
    /// Largest disagreement between directional limits.
    pub spread: f64,
}

/// Limit of `F(z, z + εv)` as `ε → 0` at each diagonal point, by Richardson (Neville)
/// extrapolation in `ε`. Fails with a numerical error naming the point when a limit diverges
/// or depends on the direction, i.e. when the sampled data has no holomorphic extension.
pub fn hartogs_diagonal(
    n: usize,
    f: &dyn Fn(&[Complex64], &[Complex64]) -> Result<Vec<Complex64>>,
    diagonal: &[Point],
    spec: &HartogsSpec,
) -> Result<Vec<HartogsPoint>> {
    if n < 2 {
        return Err(Error::validation(format!("diagonal extension needs n >= 2, got {n}")));
    }
    if spec.levels < 2 || spec.directions.is_empty() || !(spec.eps0 > 0.0) {
        return Err(Error::validation("extrapolation needs two levels, one direction and eps0 > 0"));
    }
    let mut out = Vec::with_capacity(diagonal.len());
    for z in diagonal {
        let mut limits: Vec<(Vec<Complex64>, f64)> = Vec::new();
        for v in &spec.directions {
            let mut samples = Vec::with_capacity(spec.levels);
            let mut eps = Vec::with_capacity(spec.levels);
            for j in 0..spec.levels {
                let e = spec.eps0 / f64::powi(2.0, j as i32);
                let xi: Point = z.iter().zip(v).map(|(a, b)| a + b * e).collect();
                let value = f(z, &xi).map_err(|err| {
                    Error::Numerical(format!("non-extendable: evaluation failed near {}: {err}", format_point(z)))
                })?;
                if value.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                    return Err(Error::Numerical(format!("non-extendable: non-finite values near {}", format_point(z))));
                }
                samples.push(value);
                eps.push(e);
            }
            let comps = samples[0].len();
            let mut limit = Vec::with_capacity(comps);
            let mut estimate: f64 = 0.0;
            for c in 0..comps {
                let ys: Vec<Complex64> = samples.iter().map(|s| s[c]).collect();
                let (l, prev) = neville_at_zero(&eps, &ys);
                estimate = estimate.max((l - prev).norm());
                limit.push(l);
            }
            let scale = 1.0 + limit.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if estimate > 1e-6 * scale {
                return Err(Error::Numerical(format!(
                    "non-extendable: limit diverges at {} (extrapolation residual {estimate:e})",
                    format_point(z)
                )));
            }
            limits.push((limit, estimate));
        }
        let worst_est = limits.iter().map(|(_, e)| *e).fold(0.0, f64::max);
        let mut spread: f64 = 0.0;
        for (l, _) in &limits[1..] {
            for (a, b) in l.iter().zip(&limits[0].0) {
                spread = spread.max((a - b).norm());
            }
        }
        let scale = 1.0 + limits[0].0.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if spread > 10.0 * worst_est + 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "non-extendable: directional limits at {} differ by {spread:e}",
                format_point(z)
            )));
        }
        out.push(HartogsPoint { z: z.clone(), value: limits[0].0.clone(), estimate: worst_est, spread });
    }
    Ok(out)
}

/// Value at 0 of the interpolating polynomial through all points, and through all but the
/// last.
fn neville_at_zero(x: &[f64], y: &[Complex64]) -> (Complex64, Complex64) {
    let m = x.len();
    let mut p = y.to_vec();
    let mut prev = p[m - 1];
    for level in 1..m {
        for i in (level..m).rev() {
            let (xi, xj) = (x[i], x[i - level]);
            p[i] = (p[i] * (-xj) - p[i - 1] * (-xi)) / (xi - xj);
        }
        if level == m - 2 {
            prev = p[m - 1];
        }
    }
    (p[m - 1], prev)
}
