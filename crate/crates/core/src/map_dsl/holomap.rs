use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::{CRational, Expr, Node};
use super::parser::{parse_components, Constants};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::Point;

/// Smallest `|det J|` accepted at a domain sample.
pub const MIN_JACOBIAN_DET: f64 = 1e-12;

/// Value, Jacobian and Jacobian differential of a map at a point.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: Point,
    /// `jac[(a, b)] = d f_a / d z_b`
    pub jac: CMatrix,
    /// `hess[c][(a, b)] = d^2 f_a / d z_b d z_c`, i.e. the coefficient of `dz^c` in `dJ`.
    pub hess: Vec<CMatrix>,
}

/// A holomorphic map between opens of `C^n` that can report its 2-jet.
pub trait Holomorphic: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, z: &[Complex64]) -> Result<Point>;

    fn jet(&self, z: &[Complex64]) -> Result<Jet>;

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        Ok(self.jet(z)?.jac)
    }

    /// `true` only when the Jacobian is known to be constant, so that `dJ` vanishes exactly.
    fn is_affine(&self) -> bool {
        false
    }

    /// `true` only for maps known to be the identity.
    fn is_identity(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Sample points of an open set, with an optional membership predicate.
#[derive(Clone, Debug, Default)]
pub struct DomainSpec {
    pub name: String,
    pub samples: Vec<Point>,
    /// Points where this evaluates to a nonzero value count as inside.
    pub predicate: Option<Expr>,
}

impl DomainSpec {
    pub fn new(name: impl Into<String>, samples: Vec<Point>) -> Self {
        DomainSpec { name: name.into(), samples, predicate: None }
    }

    pub fn with_predicate(mut self, predicate: Expr) -> Self {
        self.predicate = Some(predicate);
        self
    }

    /// Predicate test; without a predicate every point is inside.
    pub fn contains(&self, z: &[Complex64]) -> bool {
        match &self.predicate {
            None => true,
            Some(p) => p.eval(z).map(|v| v.norm() != 0.0).unwrap_or(false),
        }
    }
}

/// A holomorphic map given by `n` expression trees, with exact symbolic first and second
/// derivatives precomputed.
#[derive(Clone, Debug)]
pub struct HoloMap {
    n: usize,
    name: String,
    components: Vec<Expr>,
    jac: Vec<Vec<Expr>>,
    /// `hess[c][a][b] = d^2 f_a / dz_b dz_c`
    hess: Vec<Vec<Vec<Expr>>>,
    affine: bool,
    domain: DomainSpec,
}

impl HoloMap {
    /// Builds a map without domain samples.
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::validation("a map needs at least one component"));
        }
        for e in &components {
            if e.required_dim() > n {
                return Err(Error::validation(format!("component `{e}` uses z{} but n = {n}", e.required_dim())));
            }
        }
        let jac: Vec<Vec<Expr>> = components.iter().map(|f| (0..n).map(|b| f.differentiate(b)).collect()).collect();
        let mut hess = vec![vec![vec![Expr::zero(); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let h = jac[a][b].differentiate(c);
                    hess[c][a][b] = h.clone();
                    hess[b][a][c] = h;
                }
            }
        }
        let affine = hess.iter().flatten().flatten().all(Expr::is_zero);
        let name = components.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        Ok(HoloMap { n, name, components, jac, hess, affine, domain: DomainSpec::default() })
    }

    /// Attaches a domain and checks the Jacobian is finite and invertible at every sample.
    pub fn with_domain(mut self, domain: DomainSpec) -> Result<Self> {
        for z in &domain.samples {
            if z.len() != self.n {
                return Err(Error::Dimension { expected: self.n, found: z.len() });
            }
            let j = self.jacobian_at(z)?;
            let det = j.det();
            if !det.is_finite() || det.norm() < MIN_JACOBIAN_DET {
                return Err(Error::domain(z, format!("Jacobian of `{}` is singular (|det| = {:e})", self.name, det.norm())));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn identity(n: usize) -> Self {
        HoloMap::new((0..n).map(Expr::var).collect()).expect("valid identity")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn jacobian_exprs(&self) -> &[Vec<Expr>] {
        &self.jac
    }

    /// `d^2 f_a / dz_b dz_c` as `hess[c][a][b]`.
    pub fn hessian_exprs(&self) -> &[Vec<Vec<Expr>>] {
        &self.hess
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: z.len() });
        }
        Ok(())
    }

    fn jacobian_at(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_point(z)?;
        let mut m = CMatrix::zeros(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                m.set(a, b, self.jac[a][b].eval(z)?);
            }
        }
        Ok(m)
    }

    /// Whether the map is the identity syntactically.
    pub fn is_syntactic_identity(&self) -> bool {
        self.components.iter().enumerate().all(|(i, e)| matches!(e.node(), Node::Var(j) if *j == i))
    }
}

impl Holomorphic for HoloMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[Complex64]) -> Result<Point> {
        self.check_point(z)?;
        self.components.iter().map(|e| e.eval(z)).collect()
    }

    fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        let value = self.eval(z)?;
        let jac = self.jacobian_at(z)?;
        let mut hess = Vec::with_capacity(self.n);
        for c in 0..self.n {
            let mut m = CMatrix::zeros(self.n);
            if !self.affine {
                for a in 0..self.n {
                    for b in 0..self.n {
                        m.set(a, b, self.hess[c][a][b].eval(z)?);
                    }
                }
            }
            hess.push(m);
        }
        Ok(Jet { value, jac, hess })
    }

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.jacobian_at(z)
    }

    fn is_affine(&self) -> bool {
        self.affine
    }

    fn is_identity(&self) -> bool {
        self.is_syntactic_identity()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// The identity of `C^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl Holomorphic for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, z: &[Complex64]) -> Result<Point> {
        if z.len() != self.0 {
            return Err(Error::Dimension { expected: self.0, found: z.len() });
        }
        Ok(z.to_vec())
    }

    fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        let value = self.eval(z)?;
        Ok(Jet { value, jac: CMatrix::identity(self.0), hess: vec![CMatrix::zeros(self.0); self.0] })
    }

    fn is_affine(&self) -> bool {
        true
    }

    fn is_identity(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "id".into()
    }
}

/// Composition `f_0 ∘ f_1 ∘ .. ∘ f_m` of maps, applied right to left.
#[derive(Clone, Debug)]
pub struct MapChain {
    n: usize,
    maps: Vec<Arc<dyn Holomorphic>>,
}

impl MapChain {
    /// Identity factors are dropped; an empty chain is the identity.
    pub fn new(n: usize, maps: Vec<Arc<dyn Holomorphic>>) -> Result<Self> {
        for m in &maps {
            if m.dim() != n {
                return Err(Error::Dimension { expected: n, found: m.dim() });
            }
        }
        let maps = maps.into_iter().filter(|m| !m.is_identity()).collect();
        Ok(MapChain { n, maps })
    }

    pub fn factors(&self) -> &[Arc<dyn Holomorphic>] {
        &self.maps
    }
}

/// 2-jet of `f ∘ g` from the jet of `g` at `z` and the jet of `f` at `g(z)`.
pub fn compose_jets(f: &Jet, g: &Jet) -> Jet {
    let n = g.jac.dim();
    let jac = &f.jac * &g.jac;
    // H_{f∘g}[c][a][b] = sum_{d,e} H_f[e][a][d] Jg[d][b] Jg[e][c] + sum_d Jf[a][d] H_g[c][d][b]
    let mut hess = Vec::with_capacity(n);
    for c in 0..n {
        let mut mixed = CMatrix::zeros(n);
        for (e, fe) in f.hess.iter().enumerate() {
            let w = *g.jac.get(e, c);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            mixed = &mixed + &fe.scale(&w);
        }
        let first = &mixed * &g.jac;
        let second = &f.jac * &g.hess[c];
        hess.push(&first + &second);
    }
    Jet { value: f.value.clone(), jac, hess }
}

impl Holomorphic for MapChain {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[Complex64]) -> Result<Point> {
        let mut p = z.to_vec();
        for m in self.maps.iter().rev() {
            p = m.eval(&p)?;
        }
        Ok(p)
    }

    fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        let mut acc = Identity(self.n).jet(z)?;
        for m in self.maps.iter().rev() {
            let outer = m.jet(&acc.value)?;
            acc = compose_jets(&outer, &acc);
        }
        Ok(acc)
    }

    fn is_affine(&self) -> bool {
        self.maps.iter().all(|m| m.is_affine())
    }

    fn is_identity(&self) -> bool {
        self.maps.is_empty()
    }

    fn describe(&self) -> String {
        if self.maps.is_empty() {
            return "id".into();
        }
        self.maps.iter().map(|m| format!("[{}]", m.describe())).collect::<Vec<_>>().join(" ∘ ")
    }
}

/// Parses `;`-separated components into a map of `C^n`.
pub fn parse_map(text: &str, n: usize) -> Result<HoloMap> {
    parse_map_with(text, n, &Constants::new())
}

pub fn parse_map_with(text: &str, n: usize, constants: &Constants) -> Result<HoloMap> {
    HoloMap::new(parse_components(text, n, constants)?)
}

/// Jacobian of `f` at `z`.
pub fn jacobian(f: &HoloMap, z: &[Complex64]) -> Result<CMatrix> {
    f.jacobian_at(z)
}

/// `f ∘ g` by symbolic substitution. The result has no domain samples.
pub fn compose(f: &HoloMap, g: &HoloMap) -> Result<HoloMap> {
    if f.n != g.n {
        return Err(Error::Dimension { expected: f.n, found: g.n });
    }
    let comps = f.components.iter().map(|e| e.substitute(&g.components)).collect::<Result<Vec<_>>>()?;
    HoloMap::new(comps)
}

/// Built-in families of maps.
pub mod library {
    use super::*;

    fn c(q: &CRational) -> Expr {
        Expr::constant(q.clone())
    }

    /// `z ↦ A z + b`.
    pub fn affine(a: &[Vec<CRational>], b: &[CRational]) -> Result<HoloMap> {
        let n = b.len();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::validation("affine map needs an n×n matrix and length-n offset"));
        }
        let comps = (0..n)
            .map(|i| {
                let mut terms: Vec<Expr> = (0..n).map(|j| Expr::product([c(&a[i][j]), Expr::var(j)])).collect();
                terms.push(c(&b[i]));
                Expr::sum(terms)
            })
            .collect();
        HoloMap::new(comps)
    }

    /// `z_i ↦ s_i z_i^{k_i}`.
    pub fn diagonal_monomial(scales: &[CRational], powers: &[i32]) -> Result<HoloMap> {
        if scales.len() != powers.len() {
            return Err(Error::validation("scales and powers differ in length"));
        }
        let comps =
            scales.iter().zip(powers).enumerate().map(|(i, (s, &k))| Expr::product([c(s), Expr::pow(Expr::var(i), k)])).collect();
        HoloMap::new(comps)
    }

    /// `z_i ↦ (a z_i + b) / (c z_i + d)` in every coordinate.
    pub fn mobius(n: usize, a: &CRational, b: &CRational, cc: &CRational, d: &CRational) -> Result<HoloMap> {
        if (&(a * d) - &(b * cc)).is_zero() {
            return Err(Error::validation("Möbius coefficients must have ad - bc != 0"));
        }
        let comps = (0..n)
            .map(|i| {
                Expr::div(
                    Expr::sum([Expr::product([c(a), Expr::var(i)]), c(b)]),
                    Expr::sum([Expr::product([c(cc), Expr::var(i)]), c(d)]),
                )
            })
            .collect();
        HoloMap::new(comps)
    }

    /// `(z1, z2) ↦ (z2, z2^2 + c - z1)`.
    pub fn henon(cst: &CRational) -> HoloMap {
        HoloMap::new(vec![Expr::var(1), Expr::sum([Expr::pow(Expr::var(1), 2), c(cst), Expr::neg(Expr::var(0))])])
            .expect("valid Hénon map")
    }

    /// Inverse of [`henon`]: `(w1, w2) ↦ (w1^2 + c - w2, w1)`.
    pub fn henon_inverse(cst: &CRational) -> HoloMap {
        HoloMap::new(vec![Expr::sum([Expr::pow(Expr::var(0), 2), c(cst), Expr::neg(Expr::var(1))]), Expr::var(0)])
            .expect("valid Hénon inverse")
    }

    /// Center of a region of `C²` where every map of [`standard`] is biholomorphic and any two
    /// compose: points within 0.15 of it.
    pub const STANDARD_CENTER: [(f64, f64); 2] = [(0.6, 0.1), (0.5, -0.1)];

    /// Radius around [`STANDARD_CENTER`] for sample points.
    pub const STANDARD_RADIUS: f64 = 0.15;

    /// The built-in maps of `C²`, named: two affine maps and six non-affine ones covering
    /// polynomial shears, a diagonal monomial, a Möbius map, a Hénon map and an exponential.
    pub fn standard() -> Vec<HoloMap> {
        let q = CRational::ratio;
        let named = |m: HoloMap, name: &str| m.named(name);
        vec![
            named(affine(&[vec![q(2, 1), q(1, 1)], vec![q(-1, 2), q(1, 1)]], &[q(0, 1), q(0, 1)]).expect("affine"), "linear"),
            named(
                affine(&[vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]], &[q(1, 4), CRational::new(q(0, 1).re, q(-1, 4).re)])
                    .expect("affine"),
                "translate",
            ),
            named(diagonal_monomial(&[q(1, 1), q(1, 1)], &[2, 1]).expect("monomial"), "square"),
            named(mobius(2, &q(2, 1), &q(1, 1), &q(1, 1), &q(3, 1)).expect("mobius"), "mobius"),
            named(henon(&q(1, 10)), "henon"),
            named(parse_map("z1 + z2^2/3; z2", 2).expect("shear"), "shear"),
            named(parse_map("z1; z2 + z1^3/4 - z1/5", 2).expect("cubic shear"), "cubic-shear"),
            named(parse_map("z1*exp(z2/3); z2", 2).expect("exponential twist"), "exp-twist"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn affine_jacobian_is_constant() {
        let f = parse_map("2*z1 + (1/2)*z2 + 3; -z1 + i*z2", 2).unwrap();
        assert!(f.is_affine());
        for z in [[c(0.0, 0.0), c(1.0, 1.0)], [c(-3.0, 2.0), c(0.5, -7.0)]] {
            let j = jacobian(&f, &z).unwrap();
            assert_eq!(*j.get(0, 0), c(2.0, 0.0));
            assert_eq!(*j.get(0, 1), c(0.5, 0.0));
            assert_eq!(*j.get(1, 0), c(-1.0, 0.0));
            assert_eq!(*j.get(1, 1), c(0.0, 1.0));
        }
    }

    #[test]
    fn monomial_jacobian() {
        let f = parse_map("z1^2; z2", 2).unwrap();
        let j = jacobian(&f, &[c(3.0, 0.0), c(5.0, 0.0)]).unwrap();
        assert_eq!(j, CMatrix::diagonal(&[c(6.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn compose_with_identity_is_syntactically_equal() {
        let g = parse_map("z2; z2^2 + 1/3 - z1", 2).unwrap();
        let composed = compose(&HoloMap::identity(2), &g).unwrap();
        assert_eq!(composed.components(), g.components());
    }

    #[test]
    fn henon_inverse_inverts() {
        let cst = CRational::ratio(-1, 5);
        let h = library::henon(&cst);
        let hi = library::henon_inverse(&cst);
        let round = compose(&hi, &h).unwrap();
        for z in [[c(0.3, -0.2), c(1.1, 0.4)], [c(-2.0, 0.5), c(0.0, 3.0)]] {
            let w = round.eval(&z).unwrap();
            assert!((w[0] - z[0]).norm() < 1e-12 && (w[1] - z[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn chain_jet_matches_symbolic_composition() {
        let cst = CRational::new(CRational::ratio(1, 3).re, CRational::ratio(1, 7).re);
        let h: Arc<dyn Holomorphic> = Arc::new(library::henon(&cst));
        let m: Arc<dyn Holomorphic> = Arc::new(parse_map("z1/(1 + z2/4); exp(z1/3)*z2", 2).unwrap());
        let chain = MapChain::new(2, vec![h.clone(), m.clone(), h.clone()]).unwrap();
        let symbolic = compose(
            &library::henon(&cst),
            &compose(&parse_map("z1/(1 + z2/4); exp(z1/3)*z2", 2).unwrap(), &library::henon(&cst)).unwrap(),
        )
        .unwrap();
        let z = [c(0.3, -0.2), c(0.1, 0.4)];
        let a = chain.jet(&z).unwrap();
        let b = symbolic.jet(&z).unwrap();
        assert!((&a.jac - &b.jac).max_abs() < 1e-12);
        for k in 0..2 {
            assert!((&a.hess[k] - &b.hess[k]).max_abs() < 1e-11);
        }
    }

    #[test]
    fn singular_sample_rejected() {
        let f = parse_map("z1^2; z2", 2).unwrap();
        let domain = DomainSpec::new("bad", vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(f.with_domain(domain), Err(Error::Domain { .. })));
    }

    #[test]
    fn predicate_membership() {
        let pred = super::super::parser::parse_expr("z1", 1, &Constants::new()).unwrap();
        let d = DomainSpec::new("punctured", vec![]).with_predicate(pred);
        assert!(d.contains(&[c(1.0, 0.0)]));
        assert!(!d.contains(&[c(0.0, 0.0)]));
    }
}
