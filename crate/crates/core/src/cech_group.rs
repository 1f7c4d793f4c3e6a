//! Čech, bar and mixed differentials on cochains of holomorphic forms, and the τ invariant of
//! a group-equivariant atlas.
//!
//! A cell of bidegree `(m, p)` is a key `(i_0..i_m; g_1..g_p)`; its value is a `k`-form on the
//! cloud of `U_{(i_0..i_m)·(g_1⋯g_p)}`. Group elements are reduced free words in the
//! generators, acting on indices from the right (`i·(gh) = (i·g)·h`) and on points through
//! `ρ(gh) = ρ(g) ∘ ρ(h)`, with `ρ(g)` mapping `U_{i·g}` into `U_i`.
//!
//! Cochains are lazy. Evaluating one on a key expands it into an integer combination of atoms,
//! each a base value pulled back along a word, so `δ² = 0` and `d² = 0` cancel exactly before
//! anything is evaluated numerically.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cocycle::{cf_label_top, ChartSimplex};
use crate::error::{Error, Result};
use crate::forms::{binomial, point_json, pullback_kform, ScalarKForm};
use crate::invariant_poly::InvariantMap;
use crate::linalg::format_point;
use crate::map_dsl::{Expr, Holomorphic, Identity, MapChain};
use crate::parallel::par_map;
use crate::Point;

/// Tolerance for `ρ(g) ∘ ρ(g^{-1}) = id` and `f^{-1} ∘ f = id` on clouds.
pub const INVERSE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

/// A freely reduced word in the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        Word(vec![Letter { generator: g, inverse: false }])
    }

    pub fn generator_inverse(g: usize) -> Self {
        Word(vec![Letter { generator: g, inverse: true }])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Word::identity();
        for l in letters {
            out.push(l);
        }
        out
    }

    fn push(&mut self, l: Letter) {
        match self.0.last() {
            Some(last) if last.generator == l.generator && last.inverse != l.inverse => {
                self.0.pop();
            }
            _ => self.0.push(l),
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| Letter { generator: l.generator, inverse: !l.inverse }).collect())
    }

    pub fn product(words: &[Word]) -> Word {
        words.iter().fold(Word::identity(), |acc, w| acc.mul(w))
    }

    /// Parses `g h^-1 g` or `g*h^-1*g`; `e` or an empty string is the identity.
    pub fn parse(text: &str, names: &[String]) -> Result<Word> {
        let mut letters = Vec::new();
        for token in text.split(|c: char| c == '*' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            if token == "e" || token == "1" {
                continue;
            }
            let (name, inverse) = match token.strip_suffix("^-1") {
                Some(base) => (base, true),
                None => (token, false),
            };
            let generator = names
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| Error::UndefinedSymbol(format!("generator `{name}` in word `{text}`")))?;
            letters.push(Letter { generator, inverse });
        }
        Ok(Word::from_letters(letters))
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".into();
        }
        self.0
            .iter()
            .map(|l| {
                let name = names.get(l.generator).cloned().unwrap_or_else(|| format!("g{}", l.generator));
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// `(i_0..i_m; g_1..g_p)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub indices: Vec<usize>,
    pub words: Vec<Word>,
}

impl CellKey {
    pub fn new(indices: Vec<usize>, words: Vec<Word>) -> Self {
        assert!(!indices.is_empty(), "a cell needs at least one Čech index");
        CellKey { indices, words }
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.indices.len() - 1, self.words.len())
    }

    pub fn total_word(&self) -> Word {
        Word::product(&self.words)
    }

    pub fn display(&self, names: &[String]) -> String {
        let idx = self.indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let words = self.words.iter().map(|w| w.display(names)).collect::<Vec<_>>().join(",");
        format!("({idx}; {words})")
    }
}

/// Which pool points belong to an open set.
#[derive(Clone, Debug)]
pub enum Membership {
    All,
    Ball {
        center: Point,
        radius: f64,
    },
    Polydisc {
        center: Point,
        radii: Vec<f64>,
    },
    /// Inside iff the real part of the expression is positive.
    Predicate(Expr),
}

impl Membership {
    pub fn contains(&self, z: &[Complex64]) -> bool {
        match self {
            Membership::All => true,
            Membership::Ball { center, radius } => {
                z.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() < *radius
            }
            Membership::Polydisc { center, radii } => z.iter().zip(center).zip(radii).all(|((a, b), r)| (a - b).norm() < *r),
            Membership::Predicate(e) => e.eval(z).map(|v| v.re > 0.0).unwrap_or(false),
        }
    }
}

/// Index set, one open per index, and a shared pool of sample points. The cloud of a
/// multi-index is the set of pool points inside every listed open, so restrictions are literal
/// subsets.
#[derive(Clone, Debug)]
pub struct CoverSpec {
    n: usize,
    names: Vec<String>,
    opens: Vec<Membership>,
    pool: Vec<Point>,
}

impl CoverSpec {
    pub fn new(n: usize, names: Vec<String>, opens: Vec<Membership>, pool: Vec<Point>) -> Result<Self> {
        if names.is_empty() || names.len() != opens.len() {
            return Err(Error::validation(format!("{} index names for {} opens", names.len(), opens.len())));
        }
        for p in &pool {
            if p.len() != n {
                return Err(Error::Dimension { expected: n, found: p.len() });
            }
        }
        Ok(CoverSpec { n, names, opens, pool })
    }

    /// The one-open cover `{M}`.
    pub fn trivial(n: usize, pool: Vec<Point>) -> Result<Self> {
        CoverSpec::new(n, vec!["M".into()], vec![Membership::All], pool)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn pool(&self) -> &[Point] {
        &self.pool
    }

    pub fn open(&self, i: usize) -> &Membership {
        &self.opens[i]
    }

    /// Pool indices of the points lying in every open of `indices`.
    pub fn cloud(&self, indices: &[usize]) -> Vec<usize> {
        let distinct: BTreeSet<usize> = indices.iter().copied().collect();
        (0..self.pool.len()).filter(|&p| distinct.iter().all(|&i| self.opens[i].contains(&self.pool[p]))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub map: Arc<dyn Holomorphic>,
    pub inverse: Arc<dyn Holomorphic>,
    /// `i ↦ i·g`.
    pub index_action: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GroupActionSpec {
    n: usize,
    generators: Vec<Generator>,
    inverse_action: Vec<Vec<usize>>,
}

impl GroupActionSpec {
    pub fn new(n: usize, index_count: usize, generators: Vec<Generator>) -> Result<Self> {
        let mut inverse_action = Vec::new();
        for g in &generators {
            if g.map.dim() != n || g.inverse.dim() != n {
                return Err(Error::Dimension { expected: n, found: g.map.dim().max(g.inverse.dim()) });
            }
            if g.index_action.len() != index_count {
                return Err(Error::validation(format!(
                    "generator `{}` acts on {} indices, the cover has {index_count}",
                    g.name,
                    g.index_action.len()
                )));
            }
            let mut inv = vec![usize::MAX; index_count];
            for (i, &j) in g.index_action.iter().enumerate() {
                if j >= index_count || inv[j] != usize::MAX {
                    return Err(Error::validation(format!("index action of `{}` is not a permutation", g.name)));
                }
                inv[j] = i;
            }
            inverse_action.push(inv);
        }
        Ok(GroupActionSpec { n, generators, inverse_action })
    }

    pub fn trivial(n: usize) -> Self {
        GroupActionSpec { n, generators: Vec::new(), inverse_action: Vec::new() }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }

    pub fn act_index(&self, i: usize, w: &Word) -> usize {
        w.letters().iter().fold(i, |i, l| {
            if l.inverse {
                self.inverse_action[l.generator][i]
            } else {
                self.generators[l.generator].index_action[i]
            }
        })
    }

    fn letter_map(&self, l: &Letter) -> Arc<dyn Holomorphic> {
        let g = &self.generators[l.generator];
        if l.inverse {
            g.inverse.clone()
        } else {
            g.map.clone()
        }
    }

    /// `ρ(w)`.
    pub fn map(&self, w: &Word) -> Result<Arc<dyn Holomorphic>> {
        if w.is_identity() {
            return Ok(Arc::new(Identity(self.n)));
        }
        for l in w.letters() {
            if l.generator >= self.generators.len() {
                return Err(Error::UndefinedSymbol(format!("generator #{}", l.generator)));
            }
        }
        if w.letters().len() == 1 {
            return Ok(self.letter_map(&w.letters()[0]));
        }
        Ok(Arc::new(MapChain::new(self.n, w.letters().iter().map(|l| self.letter_map(l)).collect())?))
    }

    /// The identity, each generator and each inverse.
    pub fn basic_words(&self) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        for g in 0..self.generators.len() {
            out.push(Word::generator(g));
            out.push(Word::generator_inverse(g));
        }
        out
    }

    /// Checks `ρ(g) ρ(g^{-1}) = id` and that `ρ(g^{±1})` maps the cloud of `U_{i·g^{±1}}` into
    /// `U_i`. Returns the worst inverse residual.
    pub fn validate(&self, cover: &CoverSpec, tol: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (gi, g) in self.generators.iter().enumerate() {
            for p in cover.pool() {
                for (a, b) in [(&g.map, &g.inverse), (&g.inverse, &g.map)] {
                    let q = a.eval(&b.eval(p)?)?;
                    worst = worst.max(q.iter().zip(p).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
                }
            }
            if worst > tol {
                return Err(Error::validation(format!(
                    "generator `{}` and its inverse do not compose to the identity (residual {worst:e})",
                    g.name
                )));
            }
            for w in [Word::generator(gi), Word::generator_inverse(gi)] {
                let rho = self.map(&w)?;
                for i in 0..cover.len() {
                    let j = self.act_index(i, &w);
                    for p in cover.cloud(&[j]) {
                        let image = rho.eval(&cover.pool()[p])?;
                        if !cover.open(i).contains(&image) {
                            return Err(Error::Domain {
                                point: format_point(&cover.pool()[p]),
                                message: format!(
                                    "ρ({}) maps this point of U_{} outside U_{}",
                                    w.display(&self.names()),
                                    cover.names()[j],
                                    cover.names()[i]
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// A chart `f_i` on `U_i` with its inverse.
#[derive(Clone, Debug)]
pub struct AtlasChart {
    pub map: Arc<dyn Holomorphic>,
    pub inverse: Arc<dyn Holomorphic>,
}

/// One chart per cover index.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub name: String,
    pub charts: Vec<AtlasChart>,
}

impl Atlas {
    pub fn identity(n: usize, indices: usize) -> Self {
        let id: Arc<dyn Holomorphic> = Arc::new(Identity(n));
        Atlas {
            name: "identity".into(),
            charts: (0..indices).map(|_| AtlasChart { map: id.clone(), inverse: id.clone() }).collect(),
        }
    }

    /// Max of `|f_i^{-1}(f_i(w)) - w|` over the clouds of `U_i`.
    pub fn inverse_residual(&self, cover: &CoverSpec) -> Result<f64> {
        if self.charts.len() != cover.len() {
            return Err(Error::validation(format!(
                "atlas `{}` has {} charts for {} cover indices",
                self.name,
                self.charts.len(),
                cover.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for (i, c) in self.charts.iter().enumerate() {
            for p in cover.cloud(&[i]) {
                let w = &cover.pool()[p];
                let back = c.inverse.eval(&c.map.eval(w)?)?;
                worst = worst.max(back.iter().zip(w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }
}

/// Cover, action and form degree shared by cochains.
#[derive(Clone, Debug)]
pub struct MixedContext {
    pub cover: CoverSpec,
    pub action: GroupActionSpec,
    pub k: usize,
}

impl MixedContext {
    pub fn new(cover: CoverSpec, action: GroupActionSpec, k: usize) -> Result<Arc<Self>> {
        if action.n != cover.n {
            return Err(Error::Dimension { expected: cover.n, found: action.n });
        }
        Ok(Arc::new(MixedContext { cover, action, k }))
    }

    pub fn n(&self) -> usize {
        self.cover.n
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.action.names()
    }

    /// Pool indices of the cloud of `U_{(i_0..i_m)·(g_1⋯g_p)}`.
    pub fn cloud(&self, key: &CellKey) -> Vec<usize> {
        let w = key.total_word();
        let moved: Vec<usize> = key.indices.iter().map(|&i| self.action.act_index(i, &w)).collect();
        self.cover.cloud(&moved)
    }

    /// All keys of the bidegree with words drawn from `words` and a nonempty cloud.
    pub fn keys(&self, (m, p): (usize, usize), words: &[Word]) -> Vec<CellKey> {
        let mut out = Vec::new();
        let idx_tuples = tuples(self.cover.len(), m + 1);
        let word_tuples = tuples(words.len(), p);
        for idx in &idx_tuples {
            for wt in &word_tuples {
                let key = CellKey::new(idx.clone(), wt.iter().map(|&w| words[w].clone()).collect());
                if !self.cloud(&key).is_empty() {
                    out.push(key);
                }
            }
        }
        out
    }

    /// Keys of every bidegree with `m + p = total`.
    pub fn keys_of_total(&self, total: usize, words: &[Word]) -> Vec<CellKey> {
        (0..=total).flat_map(|m| self.keys((m, total - m), words)).collect()
    }
}

fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// A base value `c(cell)` pulled back along `ρ(pullback)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomKey {
    pub base: usize,
    pub cell: CellKey,
    pub pullback: Word,
}

pub type FormCombination = BTreeMap<AtomKey, i64>;

fn accumulate(into: &mut FormCombination, from: FormCombination, coef: i64) {
    for (atom, c) in from {
        let entry = into.entry(atom.clone()).or_insert(0);
        *entry += coef * c;
        if *entry == 0 {
            into.remove(&atom);
        }
    }
}

type ValueFn = dyn Fn(&CellKey) -> Result<Option<ScalarKForm>> + Send + Sync;

static NEXT_BASE: AtomicUsize = AtomicUsize::new(0);

struct BaseCochain {
    id: usize,
    bidegrees: BTreeSet<(usize, usize)>,
    value: Box<ValueFn>,
    cache: Mutex<HashMap<CellKey, Option<ScalarKForm>>>,
}

impl BaseCochain {
    fn value(&self, key: &CellKey) -> Result<Option<ScalarKForm>> {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(key) {
            return Ok(v.clone());
        }
        let v = (self.value)(key)?;
        self.cache.lock().expect("cache poisoned").insert(key.clone(), v.clone());
        Ok(v)
    }
}

enum Node {
    Base(Arc<BaseCochain>),
    Cech(Arc<Node>),
    Group(Arc<Node>),
    /// Multiplies by `(-1)^m`, `m` the Čech degree of the key.
    CechSign(Arc<Node>),
    Linear(Vec<(i64, Arc<Node>)>),
}

/// A lazily evaluated cochain with components in a set of bidegrees.
#[derive(Clone)]
pub struct MixedCochain {
    ctx: Arc<MixedContext>,
    node: Arc<Node>,
    bidegrees: BTreeSet<(usize, usize)>,
    name: String,
}

impl fmt::Debug for MixedCochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedCochain").field("name", &self.name).field("bidegrees", &self.bidegrees).finish()
    }
}

impl MixedCochain {
    /// `value` is consulted only on keys whose bidegree is listed; `None` means zero.
    pub fn from_fn(
        ctx: Arc<MixedContext>,
        name: impl Into<String>,
        bidegrees: impl IntoIterator<Item = (usize, usize)>,
        value: impl Fn(&CellKey) -> Result<Option<ScalarKForm>> + Send + Sync + 'static,
    ) -> Self {
        let name = name.into();
        let bidegrees: BTreeSet<(usize, usize)> = bidegrees.into_iter().collect();
        let base = BaseCochain {
            id: NEXT_BASE.fetch_add(1, Ordering::Relaxed),
            bidegrees: bidegrees.clone(),
            value: Box::new(value),
            cache: Mutex::new(HashMap::new()),
        };
        MixedCochain { ctx, node: Arc::new(Node::Base(Arc::new(base))), bidegrees, name }
    }

    pub fn context(&self) -> &Arc<MixedContext> {
        &self.ctx
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bidegrees(&self) -> &BTreeSet<(usize, usize)> {
        &self.bidegrees
    }

    pub fn linear(terms: &[(i64, &MixedCochain)]) -> Result<MixedCochain> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::validation("empty linear combination"));
        };
        for (_, c) in terms {
            if !Arc::ptr_eq(&c.ctx, &first.ctx) {
                return Err(Error::validation("cochains live on different contexts"));
            }
        }
        Ok(MixedCochain {
            ctx: first.ctx.clone(),
            node: Arc::new(Node::Linear(terms.iter().map(|(a, c)| (*a, c.node.clone())).collect())),
            bidegrees: terms.iter().flat_map(|(_, c)| c.bidegrees.iter().copied()).collect(),
            name: terms.iter().map(|(a, c)| format!("{a:+}·{}", c.name)).collect::<Vec<_>>().join(" "),
        })
    }

    pub fn sub(&self, other: &MixedCochain) -> Result<MixedCochain> {
        MixedCochain::linear(&[(1, self), (-1, other)])
    }

    /// The exact combination of atoms this cochain assigns to `key`.
    pub fn expand(&self, key: &CellKey) -> Result<FormCombination> {
        expand(&self.ctx, &self.node, key)
    }

    /// Values at the cloud points of `key`, as `(pool index, coefficients)`.
    pub fn evaluate(&self, key: &CellKey) -> Result<Vec<(usize, Vec<Complex64>)>> {
        let comb = self.expand(key)?;
        let cloud = self.ctx.cloud(key);
        let len = binomial(self.ctx.n(), self.ctx.k);
        let mut bases = BTreeMap::new();
        collect_bases(&self.node, &mut bases);
        let mut forms = Vec::with_capacity(comb.len());
        for (atom, coef) in &comb {
            let base = bases.get(&atom.base).expect("atom of a known base");
            let Some(value) = base.value(&atom.cell)? else { continue };
            let pulled =
                if atom.pullback.is_identity() { value } else { pullback_kform(self.ctx.action.map(&atom.pullback)?, &value)? };
            if !pulled.is_structurally_zero() {
                forms.push((*coef as f64, pulled));
            }
        }
        let mut out = Vec::with_capacity(cloud.len());
        for p in cloud {
            let z = &self.ctx.cover.pool()[p];
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for (coef, f) in &forms {
                for (a, v) in acc.iter_mut().zip(f.eval(z)?) {
                    *a += v * *coef;
                }
            }
            out.push((p, acc));
        }
        Ok(out)
    }
}

fn collect_bases(node: &Node, out: &mut BTreeMap<usize, Arc<BaseCochain>>) {
    match node {
        Node::Base(b) => {
            out.insert(b.id, b.clone());
        }
        Node::Cech(c) | Node::Group(c) | Node::CechSign(c) => collect_bases(c, out),
        Node::Linear(terms) => terms.iter().for_each(|(_, c)| collect_bases(c, out)),
    }
}

fn expand(ctx: &MixedContext, node: &Node, key: &CellKey) -> Result<FormCombination> {
    let (m, p) = key.bidegree();
    let mut out = FormCombination::new();
    match node {
        Node::Base(b) => {
            if !b.bidegrees.contains(&(m, p)) {
                return Ok(out);
            }
            out.insert(AtomKey { base: b.id, cell: key.clone(), pullback: Word::identity() }, 1);
        }
        Node::Cech(c) => {
            if m == 0 {
                return Ok(out);
            }
            for j in 0..=m {
                let mut indices = key.indices.clone();
                indices.remove(j);
                let face = CellKey::new(indices, key.words.clone());
                accumulate(&mut out, expand(ctx, c, &face)?, if j % 2 == 0 { 1 } else { -1 });
            }
        }
        Node::Group(c) => {
            if p == 0 {
                return Ok(out);
            }
            let g1 = &key.words[0];
            let first = CellKey::new(key.indices.iter().map(|&i| ctx.action.act_index(i, g1)).collect(), key.words[1..].to_vec());
            accumulate(&mut out, expand(ctx, c, &first)?, 1);
            for j in 1..p {
                let mut words = key.words[..j - 1].to_vec();
                words.push(key.words[j - 1].mul(&key.words[j]));
                words.extend_from_slice(&key.words[j + 1..]);
                let face = CellKey::new(key.indices.clone(), words);
                accumulate(&mut out, expand(ctx, c, &face)?, if j % 2 == 0 { 1 } else { -1 });
            }
            let last = &key.words[p - 1];
            let top = CellKey::new(key.indices.clone(), key.words[..p - 1].to_vec());
            let pulled = expand(ctx, c, &top)?
                .into_iter()
                .map(|(a, coef)| (AtomKey { pullback: a.pullback.mul(last), ..a }, coef))
                .collect();
            accumulate(&mut out, pulled, if p % 2 == 0 { 1 } else { -1 });
        }
        Node::CechSign(c) => {
            accumulate(&mut out, expand(ctx, c, key)?, if m % 2 == 0 { 1 } else { -1 });
        }
        Node::Linear(terms) => {
            for (coef, c) in terms {
                accumulate(&mut out, expand(ctx, c, key)?, *coef);
            }
        }
    }
    Ok(out)
}

fn shift(bidegrees: &BTreeSet<(usize, usize)>, dm: usize, dp: usize) -> BTreeSet<(usize, usize)> {
    bidegrees.iter().map(|&(m, p)| (m + dm, p + dp)).collect()
}

/// `(δc)_{i_0..i_{m+1}} = Σ_j (-1)^j c_{i_0..î_j..i_{m+1}}`, restricted.
pub fn cech_differential(c: &MixedCochain) -> MixedCochain {
    MixedCochain {
        ctx: c.ctx.clone(),
        node: Arc::new(Node::Cech(c.node.clone())),
        bidegrees: shift(&c.bidegrees, 1, 0),
        name: format!("δ({})", c.name),
    }
}

/// The bar differential: `d_0` drops `g_1` and moves the indices by `g_1`, middle faces
/// multiply adjacent words, the top face pulls back along `ρ(g_{p+1})`.
pub fn group_differential(c: &MixedCochain) -> MixedCochain {
    MixedCochain {
        ctx: c.ctx.clone(),
        node: Arc::new(Node::Group(c.node.clone())),
        bidegrees: shift(&c.bidegrees, 0, 1),
        name: format!("d({})", c.name),
    }
}

/// `D = δ + (-1)^m d` on the component of Čech degree `m`.
pub fn mixed_differential(c: &MixedCochain) -> MixedCochain {
    let group = Arc::new(Node::CechSign(Arc::new(Node::Group(c.node.clone()))));
    MixedCochain {
        ctx: c.ctx.clone(),
        node: Arc::new(Node::Linear(vec![(1, Arc::new(Node::Cech(c.node.clone()))), (1, group)])),
        bidegrees: shift(&c.bidegrees, 1, 0).union(&shift(&c.bidegrees, 0, 1)).copied().collect(),
        name: format!("D({})", c.name),
    }
}

fn chain(n: usize, maps: Vec<Arc<dyn Holomorphic>>) -> Result<Arc<dyn Holomorphic>> {
    let mut maps: Vec<_> = maps.into_iter().filter(|m| !m.is_identity()).collect();
    Ok(match maps.len() {
        0 => Arc::new(Identity(n)),
        1 => maps.remove(0),
        _ => Arc::new(MapChain::new(n, maps)?),
    })
}

/// A vertex of a diagonal chart simplex: the chart `f_index ∘ ρ(h)` of `atlas`.
#[derive(Clone)]
struct DiagVertex {
    atlas: Arc<Atlas>,
    index: usize,
    h: Word,
}

fn diagonal_chart_simplex(ctx: &MixedContext, vertices: &[DiagVertex]) -> Result<ChartSimplex> {
    let n = ctx.n();
    let charts = vertices
        .iter()
        .map(|v| chain(n, vec![v.atlas.charts[v.index].map.clone(), ctx.action.map(&v.h)?]))
        .collect::<Result<Vec<_>>>()?;
    let mut transitions = BTreeMap::new();
    for (p, a) in vertices.iter().enumerate() {
        for (q, b) in vertices.iter().enumerate().skip(p + 1) {
            let t = if Arc::ptr_eq(&a.atlas, &b.atlas) && a.index == b.index && a.h == b.h {
                Arc::new(Identity(n)) as Arc<dyn Holomorphic>
            } else {
                chain(
                    n,
                    vec![
                        a.atlas.charts[a.index].map.clone(),
                        ctx.action.map(&a.h.mul(&b.h.inverse()))?,
                        b.atlas.charts[b.index].inverse.clone(),
                    ],
                )?
            };
            transitions.insert((p, q), t);
        }
    }
    ChartSimplex::new(charts, transitions, Vec::new())
}

/// Lattice paths from `(0, 0)` to `(m, p)` with their shuffle signs. A step is `false` in the
/// Čech direction and `true` in the group direction; the sign counts group steps taken before
/// Čech steps.
pub fn shuffles(m: usize, p: usize) -> Vec<(Vec<bool>, i64)> {
    fn rec(m: usize, p: usize, path: &mut Vec<bool>, out: &mut Vec<(Vec<bool>, i64)>) {
        if m == 0 && p == 0 {
            let mut inversions = 0;
            let mut group_seen = 0;
            for &step in path.iter() {
                if step {
                    group_seen += 1;
                } else {
                    inversions += group_seen;
                }
            }
            out.push((path.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
            return;
        }
        if m > 0 {
            path.push(false);
            rec(m - 1, p, path, out);
            path.pop();
        }
        if p > 0 {
            path.push(true);
            rec(m, p - 1, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, p, &mut Vec::new(), &mut out);
    out
}

/// Vertex `(a, b)` of the product cell `key`: chart `f_{i_a·(g_1⋯g_b)} ∘ ρ(g_{b+1}⋯g_p)`.
fn grid_vertex(ctx: &MixedContext, key: &CellKey, atlas: &Arc<Atlas>, a: usize, b: usize) -> DiagVertex {
    let prefix = Word::product(&key.words[..b]);
    DiagVertex { atlas: atlas.clone(), index: ctx.action.act_index(key.indices[a], &prefix), h: Word::product(&key.words[b..]) }
}

fn path_vertices(key: &CellKey, path: &[bool]) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0)];
    let (mut a, mut b) = (0, 0);
    for &step in path {
        if step {
            b += 1;
        } else {
            a += 1;
        }
        out.push((a, b));
    }
    debug_assert_eq!((a, b), key.bidegree());
    out
}

fn check_atlas(ctx: &MixedContext, atlas: &Atlas) -> Result<()> {
    let r = atlas.inverse_residual(&ctx.cover)?;
    if r > INVERSE_TOL {
        return Err(Error::validation(format!("atlas `{}` is incoherent: f^-1(f(w)) differs from w by {r:e}", atlas.name)));
    }
    Ok(())
}

/// The τ invariant of an equivariant atlas: on a cell of bidegree `(m, p)` with
/// `m + p = arity(T)`, the signed sum over shuffle paths of the cocycle label of the
/// corresponding diagonal chart simplex.
pub fn tau_invariant(ctx: &Arc<MixedContext>, atlas: Arc<Atlas>, t: InvariantMap) -> Result<MixedCochain> {
    let k = t.arity();
    if k != ctx.k {
        return Err(Error::Arity { expected: ctx.k, found: k });
    }
    check_atlas(ctx, &atlas)?;
    let inner = ctx.clone();
    let name = format!("τ[{}]", atlas.name);
    Ok(MixedCochain::from_fn(ctx.clone(), name, (0..=k).map(|m| (m, k - m)), move |key| {
        let (m, p) = key.bidegree();
        let mut acc = ScalarKForm::zero(inner.n(), k);
        for (path, sign) in shuffles(m, p) {
            let vertices: Vec<DiagVertex> =
                path_vertices(key, &path).into_iter().map(|(a, b)| grid_vertex(&inner, key, &atlas, a, b)).collect();
            let label = cf_label_top(&diagonal_chart_simplex(&inner, &vertices)?, &t)?;
            acc = acc.add(&if sign > 0 { label } else { label.scale(Complex64::new(-1.0, 0.0)) })?;
        }
        Ok(Some(acc))
    }))
}

/// A cochain of total degree `arity(T) - 1` whose mixed differential is `τ[first] - τ[second]`,
/// built from the prism between the two atlases over each diagonal simplex.
pub fn cohomologous_witness(
    ctx: &Arc<MixedContext>,
    first: Arc<Atlas>,
    second: Arc<Atlas>,
    t: InvariantMap,
) -> Result<MixedCochain> {
    let k = t.arity();
    if k != ctx.k {
        return Err(Error::Arity { expected: ctx.k, found: k });
    }
    if k == 0 {
        return Err(Error::validation("a witness needs an invariant of arity at least 1"));
    }
    check_atlas(ctx, &first)?;
    check_atlas(ctx, &second)?;
    let inner = ctx.clone();
    let name = format!("W[{}, {}]", first.name, second.name);
    let total = k - 1;
    Ok(MixedCochain::from_fn(ctx.clone(), name, (0..=total).map(|m| (m, total - m)), move |key| {
        let (m, p) = key.bidegree();
        let mut acc = ScalarKForm::zero(inner.n(), k);
        for (path, sign) in shuffles(m, p) {
            let grid = path_vertices(key, &path);
            for s in 0..grid.len() {
                let mut vertices: Vec<DiagVertex> =
                    grid[..=s].iter().map(|&(a, b)| grid_vertex(&inner, key, &second, a, b)).collect();
                vertices.extend(grid[s..].iter().map(|&(a, b)| grid_vertex(&inner, key, &first, a, b)));
                let label = cf_label_top(&diagonal_chart_simplex(&inner, &vertices)?, &t)?;
                let sign = if s % 2 == 0 { sign } else { -sign };
                acc = acc.add(&if sign > 0 { label } else { label.scale(Complex64::new(-1.0, 0.0)) })?;
            }
        }
        Ok(Some(acc))
    }))
}

/// A cochain whose value on each key is a random quadratic polynomial form, seeded by the key.
pub fn random_cochain(ctx: &Arc<MixedContext>, bidegrees: impl IntoIterator<Item = (usize, usize)>, seed: u64) -> MixedCochain {
    let n = ctx.n();
    let k = ctx.k;
    MixedCochain::from_fn(ctx.clone(), format!("random[{seed}]"), bidegrees, move |key| {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        key.hash(&mut h);
        seed.hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let coeffs: Vec<(Complex64, Vec<Complex64>, Vec<Complex64>)> =
            (0..binomial(n, k)).map(|_| (draw(), (0..n).map(|_| draw()).collect(), (0..n).map(|_| draw()).collect())).collect();
        Ok(Some(ScalarKForm::from_fn(n, k, "random", move |z| {
            Ok(coeffs
                .iter()
                .map(|(c, lin, quad)| {
                    c + z.iter().zip(lin).map(|(x, a)| a * x).sum::<Complex64>()
                        + z.iter().zip(quad).map(|(x, a)| a * x * x).sum::<Complex64>()
                })
                .collect())
        })))
    })
}

/// Outcome of [`check_vanishing`].
#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub keys: usize,
    pub points: usize,
    /// Keys whose expansion cancelled exactly, before any evaluation.
    pub exact_keys: usize,
    pub max_residual: f64,
    pub worst_key: Option<String>,
    pub worst_point: Option<Point>,
    pub tol: f64,
    pub pass: bool,
}

impl VanishingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "tol": self.tol,
            "keys": self.keys,
            "points": self.points,
            "exact_keys": self.exact_keys,
            "max_residual": self.max_residual,
            "worst_key": self.worst_key,
            "worst_point": self.worst_point.as_ref().map(|p| point_json(p)),
        })
    }
}

/// Evaluates `c` on every key and reports the largest coefficient modulus.
pub fn check_vanishing(c: &MixedCochain, keys: &[CellKey], tol: f64) -> Result<VanishingReport> {
    let names = c.ctx.generator_names();
    let results = par_map(keys, |key| -> Result<(bool, usize, f64, Option<usize>)> {
        if c.expand(key)?.is_empty() {
            return Ok((true, c.ctx.cloud(key).len(), 0.0, None));
        }
        let values = c.evaluate(key)?;
        let mut worst = (0.0_f64, None);
        for (p, v) in &values {
            let r = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if worst.1.is_none() || r > worst.0 {
                worst = (r, Some(*p));
            }
        }
        Ok((false, values.len(), worst.0, worst.1))
    });
    let mut report = VanishingReport {
        keys: keys.len(),
        points: 0,
        exact_keys: 0,
        max_residual: 0.0,
        worst_key: None,
        worst_point: None,
        tol,
        pass: true,
    };
    for (key, r) in keys.iter().zip(results) {
        let (exact, points, residual, point) = r?;
        report.points += points;
        if exact {
            report.exact_keys += 1;
        }
        if residual > report.max_residual || (report.worst_key.is_none() && point.is_some()) {
            report.max_residual = residual;
            report.worst_key = Some(key.display(&names));
            report.worst_point = point.map(|p| c.ctx.cover.pool()[p].clone());
        }
    }
    report.pass = report.max_residual <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant_poly::{invariant_from_symfun, todd_component};
    use crate::map_dsl::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arc(text: &str) -> Arc<dyn Holomorphic> {
        Arc::new(parse_map(text, 2).unwrap())
    }

    fn pool(count: usize, scale: f64) -> Vec<Point> {
        (0..count)
            .map(|i| {
                let t = i as f64 * 0.61 + 0.2;
                vec![c(scale * t.cos(), scale * 0.7 * (1.7 * t).sin()), c(scale * 0.8 * (2.3 * t).sin(), scale * 0.5 * t.cos())]
            })
            .collect()
    }

    fn todd2() -> InvariantMap {
        invariant_from_symfun(&todd_component(2).unwrap(), 2).unwrap()
    }

    fn henon_action() -> GroupActionSpec {
        let g = Generator {
            name: "h".into(),
            map: arc("z2; z2^2 + 1/10 - z1"),
            inverse: arc("z1^2 + 1/10 - z2; z1"),
            index_action: vec![0, 1],
        };
        GroupActionSpec::new(2, 2, vec![g]).unwrap()
    }

    fn two_chart_atlas(name: &str, twist: &str, untwist: &str) -> Arc<Atlas> {
        Arc::new(Atlas {
            name: name.into(),
            charts: vec![
                AtlasChart { map: arc(twist), inverse: arc(untwist) },
                AtlasChart { map: arc("z1 + z2^2/4; z2"), inverse: arc("z1 - z2^2/4; z2") },
            ],
        })
    }

    fn two_open_henon_ctx(k: usize) -> Arc<MixedContext> {
        let cover =
            CoverSpec::new(2, vec!["A".into(), "B".into()], vec![Membership::All, Membership::All], pool(6, 0.4)).unwrap();
        MixedContext::new(cover, henon_action(), k).unwrap()
    }

    #[test]
    fn words_reduce_and_parse() {
        let names = vec!["g".to_string(), "h".to_string()];
        let w = Word::parse("g h h^-1 g^-1", &names).unwrap();
        assert!(w.is_identity());
        let w = Word::parse("g*h^-1", &names).unwrap();
        assert_eq!(w.display(&names), "g*h^-1");
        assert!(w.mul(&w.inverse()).is_identity());
        assert!(matches!(Word::parse("x", &names), Err(Error::UndefinedSymbol(_))));
    }

    #[test]
    fn shuffle_signs() {
        let s = shuffles(1, 1);
        assert_eq!(s, vec![(vec![false, true], 1), (vec![true, false], -1)]);
        assert_eq!(shuffles(2, 2).len(), 6);
        assert_eq!(shuffles(2, 2).iter().map(|(_, s)| s).sum::<i64>(), 2);
    }

    #[test]
    fn constant_cochain_has_zero_cech_differential() {
        let cover =
            CoverSpec::new(2, vec!["a".into(), "b".into()], vec![Membership::All, Membership::All], pool(5, 0.5)).unwrap();
        let ctx = MixedContext::new(cover, GroupActionSpec::trivial(2), 2).unwrap();
        let constant = MixedCochain::from_fn(ctx.clone(), "1", [(0, 0)], |_| {
            Ok(Some(ScalarKForm::from_fn(2, 2, "1", |_| Ok(vec![Complex64::new(1.0, 0.0)]))))
        });
        let d = cech_differential(&constant);
        let r = check_vanishing(&d, &ctx.keys((1, 0), &[Word::identity()]), 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn differentials_square_to_zero_exactly() {
        let ctx = two_open_henon_ctx(2);
        let words = ctx.action.basic_words();
        let c = random_cochain(&ctx, [(0, 0), (1, 0), (0, 1), (1, 1)], 7);
        let dd = cech_differential(&cech_differential(&c));
        let gg = group_differential(&group_differential(&c));
        let mm = mixed_differential(&mixed_differential(&c));
        for (cochain, bideg) in [(&dd, (2, 1)), (&gg, (1, 2)), (&mm, (1, 2)), (&mm, (2, 1)), (&mm, (0, 3))] {
            for key in ctx.keys(bideg, &words) {
                assert!(cochain.expand(&key).unwrap().is_empty(), "{} at {:?}", cochain.name(), key);
            }
        }
    }

    #[test]
    fn trivial_group_differential_vanishes() {
        let cover = CoverSpec::trivial(2, pool(4, 0.5)).unwrap();
        let ctx = MixedContext::new(cover, GroupActionSpec::trivial(2), 2).unwrap();
        let c = random_cochain(&ctx, [(0, 0), (1, 0)], 3);
        let d = group_differential(&c);
        for key in ctx.keys((0, 1), &[Word::identity()]).into_iter().chain(ctx.keys((1, 1), &[Word::identity()])) {
            assert!(d.expand(&key).unwrap().is_empty());
        }
    }

    #[test]
    fn two_term_bar_formula() {
        let cover = CoverSpec::trivial(2, pool(4, 0.5)).unwrap();
        let ctx = MixedContext::new(
            cover,
            GroupActionSpec::new(
                2,
                1,
                vec![Generator {
                    name: "a".into(),
                    map: arc("2*z1 + 1; z2 - z1"),
                    inverse: arc("(z1 - 1)/2; z2 + (z1 - 1)/2"),
                    index_action: vec![0],
                }],
            )
            .unwrap(),
            2,
        )
        .unwrap();
        let c = random_cochain(&ctx, [(0, 0)], 11);
        let d = group_differential(&c);
        let key = CellKey::new(vec![0], vec![Word::generator(0)]);
        let comb = d.expand(&key).unwrap();
        let base = match c.node.as_ref() {
            Node::Base(b) => b.id,
            _ => unreachable!(),
        };
        let cell = CellKey::new(vec![0], vec![]);
        let expected: FormCombination = [
            (AtomKey { base, cell: cell.clone(), pullback: Word::identity() }, 1),
            (AtomKey { base, cell, pullback: Word::generator(0) }, -1),
        ]
        .into_iter()
        .collect();
        assert_eq!(comb, expected);
    }

    #[test]
    fn affine_tau_is_exactly_zero() {
        let cover =
            CoverSpec::new(2, vec!["a".into(), "b".into()], vec![Membership::All, Membership::All], pool(5, 0.5)).unwrap();
        let action = GroupActionSpec::new(
            2,
            2,
            vec![Generator {
                name: "t".into(),
                map: arc("z1 + 1; z2 + i"),
                inverse: arc("z1 - 1; z2 - i"),
                index_action: vec![1, 0],
            }],
        )
        .unwrap();
        let ctx = MixedContext::new(cover, action, 2).unwrap();
        let atlas = Arc::new(Atlas {
            name: "affine".into(),
            charts: vec![
                AtlasChart { map: arc("2*z1 + z2; z2"), inverse: arc("(z1 - z2)/2; z2") },
                AtlasChart { map: arc("z1 - 3; i*z2"), inverse: arc("z1 + 3; -i*z2") },
            ],
        });
        let tau = tau_invariant(&ctx, atlas, todd2()).unwrap();
        let r = check_vanishing(&tau, &ctx.keys_of_total(2, &ctx.action.basic_words()), 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_residual.to_bits(), 0.0_f64.to_bits());
    }

    #[test]
    fn tau_closed_for_cech_cover() {
        let cover = CoverSpec::new(
            2,
            vec!["0".into(), "1".into(), "2".into()],
            vec![
                Membership::Predicate(crate::map_dsl::parse_expr("z1 + 1/5", 2, &Default::default()).unwrap()),
                Membership::Ball { center: vec![c(0.0, 0.0), c(0.0, 0.0)], radius: 0.45 },
                Membership::All,
            ],
            pool(12, 0.4),
        )
        .unwrap();
        let ctx = MixedContext::new(cover, GroupActionSpec::trivial(2), 2).unwrap();
        let atlas = Arc::new(Atlas {
            name: "poly".into(),
            charts: vec![
                AtlasChart { map: arc("z1; z2 + z1^2/3"), inverse: arc("z1; z2 - z1^2/3") },
                AtlasChart { map: arc("z1 + z2^2/4; z2"), inverse: arc("z1 - z2^2/4; z2") },
                AtlasChart { map: arc("z1 + z2^3/5; z2"), inverse: arc("z1 - z2^3/5; z2") },
            ],
        });
        let tau = tau_invariant(&ctx, atlas, todd2()).unwrap();
        let values = check_vanishing(&tau, &ctx.keys((2, 0), &[Word::identity()]), f64::INFINITY).unwrap();
        assert!(values.max_residual > 1e-6, "τ should not vanish: {}", values.max_residual);
        let d = mixed_differential(&tau);
        let r = check_vanishing(&d, &ctx.keys((3, 0), &[Word::identity()]), 1e-7).unwrap();
        assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn tau_closed_under_mixed_differential() {
        let ctx = two_open_henon_ctx(2);
        let atlas = two_chart_atlas("A", "z1; z2 + z1^2/3", "z1; z2 - z1^2/3");
        let tau = tau_invariant(&ctx, atlas, todd2()).unwrap();
        let words = ctx.action.basic_words();
        let values = check_vanishing(&tau, &ctx.keys((1, 1), &words), f64::INFINITY).unwrap();
        assert!(values.max_residual > 1e-6);
        let r = check_vanishing(&mixed_differential(&tau), &ctx.keys_of_total(3, &words), 1e-7).unwrap();
        assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn witness_differential_matches_difference() {
        let ctx = two_open_henon_ctx(2);
        let a = two_chart_atlas("A", "z1; z2 + z1^2/3", "z1; z2 - z1^2/3");
        let b = two_chart_atlas("B", "z1 + z2^2/2; z2 + (z1 + z2^2/2)^2/3", "z1 - (z2 - z1^2/3)^2/2; z2 - z1^2/3");
        let (ta, tb) = (tau_invariant(&ctx, a.clone(), todd2()).unwrap(), tau_invariant(&ctx, b.clone(), todd2()).unwrap());
        let w = cohomologous_witness(&ctx, a, b, todd2()).unwrap();
        let words = ctx.action.basic_words();
        let gap = MixedCochain::linear(&[(1, &mixed_differential(&w)), (-1, &ta), (1, &tb)]).unwrap();
        let r = check_vanishing(&gap, &ctx.keys_of_total(2, &words), 1e-7).unwrap();
        assert!(r.pass, "{:?}", r);
        let diff = check_vanishing(&ta.sub(&tb).unwrap(), &ctx.keys_of_total(2, &words), f64::INFINITY).unwrap();
        assert!(diff.max_residual > 1e-6);
    }

    #[test]
    fn identical_atlases_give_zero_witness() {
        let ctx = two_open_henon_ctx(2);
        let a = two_chart_atlas("A", "z1; z2 + z1^2/3", "z1; z2 - z1^2/3");
        let w = cohomologous_witness(&ctx, a.clone(), a, todd2()).unwrap();
        let r = check_vanishing(&w, &ctx.keys_of_total(1, &ctx.action.basic_words()), 1e-12).unwrap();
        assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn action_validation() {
        let cover = CoverSpec::trivial(2, pool(4, 0.4)).unwrap();
        let action = henon_action();
        assert!(GroupActionSpec::new(2, 1, action.generators().to_vec()).is_err());
        let one =
            GroupActionSpec::new(2, 1, vec![Generator { index_action: vec![0], ..action.generators()[0].clone() }]).unwrap();
        assert!(one.validate(&cover, INVERSE_TOL).unwrap() < 1e-12);
        let broken = GroupActionSpec::new(
            2,
            1,
            vec![Generator { name: "bad".into(), map: arc("z1 + 1; z2"), inverse: arc("z1 - 2; z2"), index_action: vec![0] }],
        )
        .unwrap();
        assert!(broken.validate(&cover, INVERSE_TOL).is_err());
    }
}
