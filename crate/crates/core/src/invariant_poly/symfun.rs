use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::linalg::Scalar;

/// Generators in which a symmetric function is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Power sums `T_j = t_1^j + .. + t_n^j` (traces of matrix powers).
    PowerSum,
    /// Elementary symmetric polynomials `S_j`.
    Elementary,
}

impl Basis {
    fn symbol(self) -> &'static str {
        match self {
            Basis::PowerSum => "T",
            Basis::Elementary => "S",
        }
    }

    pub fn other(self) -> Basis {
        match self {
            Basis::PowerSum => Basis::Elementary,
            Basis::Elementary => Basis::PowerSum,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Homogeneous(usize),
    Inhomogeneous,
}

/// A symmetric function as an exact-rational polynomial in one family of generators.
///
/// A monomial `X_{p_1} .. X_{p_r}` is keyed by the partition `[p_1, .., p_r]`; the empty
/// partition is the constant `1`. The separate `rank` coefficient multiplies the rank
/// marker `n` (the number of eigenvalues), which only appears in the degree-0 Chern
/// character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymFun {
    basis: Basis,
    terms: BTreeMap<Partition, BigRational>,
    rank: BigRational,
}

type Poly = BTreeMap<Partition, BigRational>;

fn poly_add_into(acc: &mut Poly, other: &Poly, scale: &BigRational) {
    for (p, c) in other {
        let entry = acc.entry(p.clone()).or_insert_with(BigRational::zero);
        *entry += c * scale;
        if entry.is_zero() {
            acc.remove(p);
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (pa, ca) in a {
        for (pb, cb) in b {
            let key = pa.merge(pb);
            let entry = out.entry(key.clone()).or_insert_with(BigRational::zero);
            *entry += ca * cb;
            if entry.is_zero() {
                out.remove(&key);
            }
        }
    }
    out
}

fn monomial(p: Partition) -> Poly {
    let mut m = Poly::new();
    m.insert(p, BigRational::one());
    m
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Expresses each single generator of `from` (degree 1..=max) in the generators of the other
/// basis, using Newton's identities
/// `T_j = sum_{i=1}^{j-1} (-1)^{i-1} S_i T_{j-i} + (-1)^{j-1} j S_j`.
fn generator_table(from: Basis, max: usize) -> Vec<Poly> {
    // table[j] expresses generator j of `from`
    let mut table: Vec<Poly> = vec![monomial(Partition::empty())];
    match from {
        Basis::PowerSum => {
            // T_j in S: recursion uses T_{j-i} already expressed in S.
            for j in 1..=max {
                let mut acc = Poly::new();
                for i in 1..j {
                    let sign = if (i - 1) % 2 == 0 { int(1) } else { int(-1) };
                    let term = poly_mul(&monomial(Partition::single(i)), &table[j - i]);
                    poly_add_into(&mut acc, &term, &sign);
                }
                let sign = if (j - 1) % 2 == 0 { int(1) } else { int(-1) };
                poly_add_into(&mut acc, &monomial(Partition::single(j)), &(sign * int(j as i64)));
                table.push(acc);
            }
        }
        Basis::Elementary => {
            // S_j = (1/j) sum_{i=1}^{j} (-1)^{i-1} S_{j-i} T_i, with S_0 = 1.
            for j in 1..=max {
                let mut acc = Poly::new();
                for i in 1..=j {
                    let sign = if (i - 1) % 2 == 0 { int(1) } else { int(-1) };
                    let term = poly_mul(&table[j - i], &monomial(Partition::single(i)));
                    poly_add_into(&mut acc, &term, &sign);
                }
                let inv_j = BigRational::new(BigInt::one(), BigInt::from(j));
                let scaled: Poly = acc.into_iter().map(|(p, c)| (p, c * &inv_j)).collect();
                table.push(scaled);
            }
        }
    }
    table
}

impl SymFun {
    /// Builds a symmetric function, dropping zero coefficients.
    pub fn new(basis: Basis, terms: impl IntoIterator<Item = (Partition, BigRational)>) -> Self {
        let mut map = Poly::new();
        for (p, c) in terms {
            let entry = map.entry(p.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                map.remove(&p);
            }
        }
        SymFun { basis, terms: map, rank: BigRational::zero() }
    }

    pub fn zero(basis: Basis) -> Self {
        SymFun::new(basis, [])
    }

    /// The single generator `X_j` of `basis`.
    pub fn generator(basis: Basis, j: usize) -> Self {
        SymFun::new(basis, [(Partition::single(j), BigRational::one())])
    }

    /// The rank marker `n` times `coeff`.
    pub fn rank_marker(basis: Basis, coeff: BigRational) -> Self {
        SymFun { basis, terms: Poly::new(), rank: coeff }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn terms(&self) -> &BTreeMap<Partition, BigRational> {
        &self.terms
    }

    pub fn rank_coefficient(&self) -> &BigRational {
        &self.rank
    }

    pub fn coefficient(&self, p: &Partition) -> BigRational {
        self.terms.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.rank.is_zero()
    }

    pub fn degree(&self) -> Degree {
        let mut weights = self.terms.keys().map(Partition::weight);
        if !self.rank.is_zero() {
            return if self.terms.keys().all(|p| p.weight() == 0) { Degree::Homogeneous(0) } else { Degree::Inhomogeneous };
        }
        match weights.next() {
            None => Degree::Homogeneous(0),
            Some(w) => {
                if weights.all(|v| v == w) {
                    Degree::Homogeneous(w)
                } else {
                    Degree::Inhomogeneous
                }
            }
        }
    }

    pub fn scale(&self, s: &BigRational) -> SymFun {
        SymFun {
            basis: self.basis,
            terms: self.terms.iter().map(|(p, c)| (p.clone(), c * s)).filter(|(_, c)| !c.is_zero()).collect(),
            rank: &self.rank * s,
        }
    }

    pub fn add(&self, other: &SymFun) -> Result<SymFun> {
        self.check_basis(other)?;
        let mut terms = self.terms.clone();
        poly_add_into(&mut terms, &other.terms, &BigRational::one());
        Ok(SymFun { basis: self.basis, terms, rank: &self.rank + &other.rank })
    }

    pub fn mul(&self, other: &SymFun) -> Result<SymFun> {
        self.check_basis(other)?;
        if !self.rank.is_zero() || !other.rank.is_zero() {
            return Err(Error::validation("products involving the rank marker are not supported"));
        }
        Ok(SymFun { basis: self.basis, terms: poly_mul(&self.terms, &other.terms), rank: BigRational::zero() })
    }

    fn check_basis(&self, other: &SymFun) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::validation("symmetric functions written in different bases"));
        }
        Ok(())
    }

    /// Rewrites the function in `target` via Newton's identities. Exact; the rank marker and
    /// constants are carried unchanged.
    pub fn convert(&self, target: Basis) -> SymFun {
        if target == self.basis {
            return self.clone();
        }
        let max = self.terms.keys().flat_map(|p| p.parts().iter().copied()).max().unwrap_or(0);
        let table = generator_table(self.basis, max);
        let mut out = Poly::new();
        for (p, c) in &self.terms {
            let mut prod = monomial(Partition::empty());
            for &part in p.parts() {
                prod = poly_mul(&prod, &table[part]);
            }
            poly_add_into(&mut out, &prod, c);
        }
        SymFun { basis: target, terms: out, rank: self.rank.clone() }
    }

    /// Evaluates on an explicit list of eigenvalues.
    pub fn evaluate<S: Scalar>(&self, eigenvalues: &[S]) -> S {
        let max = self.terms.keys().flat_map(|p| p.parts().iter().copied()).max().unwrap_or(0);
        let gens = generator_values(self.basis, eigenvalues, max);
        let mut total = S::zero();
        for (p, c) in &self.terms {
            let mut m = S::from_rational(c);
            for &part in p.parts() {
                m = m * gens[part].clone();
            }
            total = total + m;
        }
        let mut rank = S::zero();
        for _ in eigenvalues {
            rank = rank + S::one();
        }
        total + S::from_rational(&self.rank) * rank
    }

    /// Writes `self` as `content * primitive`, where `primitive` has coprime integer
    /// coefficients and a positive leading coefficient.
    fn content(&self) -> BigRational {
        let coeffs: Vec<&BigRational> = self.terms.values().chain(std::iter::once(&self.rank)).filter(|c| !c.is_zero()).collect();
        if coeffs.is_empty() {
            return BigRational::one();
        }
        let num_gcd = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c.numer()));
        let den_lcm = coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let mut content = BigRational::new(num_gcd, den_lcm);
        let leading = self.ordered_terms().into_iter().next().map(|(_, c)| c.clone());
        if leading.is_some_and(|c| c.is_negative()) {
            content = -content;
        }
        content
    }

    fn ordered_terms(&self) -> Vec<(&Partition, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|(p, _)| p.display_key());
        v
    }

    fn monomial_string(&self, p: &Partition) -> String {
        if p.is_empty() {
            return "1".into();
        }
        let sym = self.basis.symbol();
        let mut factors = Vec::new();
        let parts = p.display_key();
        let mut i = 0;
        while i < parts.len() {
            let j = parts[i..].iter().take_while(|&&q| q == parts[i]).count();
            if j == 1 {
                factors.push(format!("{sym}{}", parts[i]));
            } else {
                factors.push(format!("{sym}{}^{j}", parts[i]));
            }
            i += j;
        }
        factors.join(" ")
    }
}

fn generator_values<S: Scalar>(basis: Basis, t: &[S], max: usize) -> Vec<S> {
    let mut out = vec![S::one()];
    match basis {
        Basis::PowerSum => {
            let mut powers: Vec<S> = t.to_vec();
            for j in 1..=max {
                if j > 1 {
                    for (p, x) in powers.iter_mut().zip(t) {
                        *p = p.clone() * x.clone();
                    }
                }
                out.push(powers.iter().cloned().fold(S::zero(), |a, b| a + b));
            }
        }
        Basis::Elementary => {
            // coefficients of prod (1 + t_i x)
            let mut e = vec![S::zero(); max + 1];
            e[0] = S::one();
            for x in t {
                for j in (1..=max).rev() {
                    e[j] = e[j].clone() + e[j - 1].clone() * x.clone();
                }
            }
            out.extend(e.into_iter().skip(1));
        }
    }
    out
}

fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for SymFun {
    /// Prints as `(content)(c_1 m_1 + c_2 m_2 ..)` with coprime integer `c_i`, e.g.
    /// `(1/24)(3 T1^2 - T2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let content = self.content();
        let mut pieces: Vec<(bool, String)> = Vec::new();
        for (p, c) in self.ordered_terms() {
            let k = c / &content;
            let mono = self.monomial_string(p);
            let mag = k.abs();
            let body = if mag.is_one() {
                mono
            } else if p.is_empty() {
                format_rational(&mag)
            } else {
                format!("{} {}", format_rational(&mag), mono)
            };
            pieces.push((k.is_negative(), body));
        }
        if !self.rank.is_zero() {
            let k = &self.rank / &content;
            let mag = k.abs();
            let body = if mag.is_one() { "n".to_string() } else { format!("{} n", format_rational(&mag)) };
            pieces.push((k.is_negative(), body));
        }
        let mut body = String::new();
        for (i, (neg, text)) in pieces.iter().enumerate() {
            match (i, neg) {
                (0, true) => body.push('-'),
                (0, false) => {}
                (_, true) => body.push_str(" - "),
                (_, false) => body.push_str(" + "),
            }
            body.push_str(text);
        }
        if content.is_one() {
            write!(f, "{body}")
        } else if pieces.len() == 1 {
            write!(f, "({}) {body}", format_rational(&content))
        } else {
            write!(f, "({})({body})", format_rational(&content))
        }
    }
}

/// Newton's-identity basis change.
pub fn newton_convert(f: &SymFun, target: Basis) -> SymFun {
    f.convert(target)
}

/// Exact Taylor data for the Todd series `t / (1 - e^{-t})`.
#[derive(Clone, Debug)]
pub struct ToddSeries {
    k_max: usize,
    /// `log(t / (1 - e^{-t})) = sum_m log_coeffs[m] t^m`
    log_coeffs: Vec<BigRational>,
    components: Vec<SymFun>,
}

/// Default expansion depth.
pub const DEFAULT_TODD_DEPTH: usize = 12;

impl ToddSeries {
    pub fn new(k_max: usize) -> Self {
        let log_coeffs = todd_log_coefficients(k_max);
        // graded exponential: k E_k = sum_{m=1}^k m L_m E_{k-m}, L_m = c_m T_m
        let mut components = vec![SymFun::new(Basis::PowerSum, [(Partition::empty(), BigRational::one())])];
        for k in 1..=k_max {
            let mut acc = SymFun::zero(Basis::PowerSum);
            for m in 1..=k {
                if log_coeffs[m].is_zero() {
                    continue;
                }
                let lm = SymFun::generator(Basis::PowerSum, m).scale(&(&log_coeffs[m] * int(m as i64)));
                let term = lm.mul(&components[k - m]).expect("same basis");
                acc = acc.add(&term).expect("same basis");
            }
            components.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(k))));
        }
        ToddSeries { k_max, log_coeffs, components }
    }

    pub fn depth(&self) -> usize {
        self.k_max
    }

    pub fn log_coefficients(&self) -> &[BigRational] {
        &self.log_coeffs
    }

    /// Degree-`k` part of the Todd polynomial in the power-sum basis.
    pub fn component(&self, k: usize) -> Result<SymFun> {
        if k < 1 {
            return Err(Error::validation("Todd component degree must be >= 1"));
        }
        if k > self.k_max {
            return Err(Error::validation(format!("Todd component {k} exceeds configured expansion depth {}", self.k_max)));
        }
        Ok(self.components[k].clone())
    }
}

impl Default for ToddSeries {
    fn default() -> Self {
        ToddSeries::new(DEFAULT_TODD_DEPTH)
    }
}

/// Taylor coefficients (index 0..=k_max) of `log(t/(1-e^{-t}))`.
fn todd_log_coefficients(k_max: usize) -> Vec<BigRational> {
    let len = k_max + 2;
    // g(t) = (1 - e^{-t})/t = sum_m (-1)^m t^m / (m+1)!
    let mut fact = BigInt::one();
    let mut g = Vec::with_capacity(len);
    for m in 0..len {
        fact *= BigInt::from(m + 1);
        let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        g.push(BigRational::new(sign, fact.clone()));
    }
    // log f = -log g; (log g)' = g'/g. Solve h * g = g' for h = (log g)'.
    let gp: Vec<BigRational> = (0..len - 1).map(|m| &g[m + 1] * int(m as i64 + 1)).collect();
    let mut h: Vec<BigRational> = Vec::with_capacity(len - 1);
    for m in 0..len - 1 {
        let mut acc = gp[m].clone();
        for j in 0..m {
            acc -= &h[j] * &g[m - j];
        }
        h.push(acc / &g[0]);
    }
    let mut c = vec![BigRational::zero(); k_max + 1];
    for m in 1..=k_max {
        c[m] = -(&h[m - 1] / int(m as i64));
    }
    c
}

/// Degree-`k` Todd component at default depth (or deeper when `k` exceeds it).
pub fn todd_component(k: usize) -> Result<SymFun> {
    if k < 1 {
        return Err(Error::validation("Todd component degree must be >= 1"));
    }
    ToddSeries::new(k.max(DEFAULT_TODD_DEPTH)).component(k)
}

/// `Ch_k = T_k / k!`; `Ch_0` is the rank marker `n`.
pub fn chern_character_component(k: usize) -> SymFun {
    if k == 0 {
        return SymFun::rank_marker(Basis::PowerSum, BigRational::one());
    }
    let fact: BigInt = (1..=k).map(BigInt::from).product();
    SymFun::generator(Basis::PowerSum, k).scale(&BigRational::new(BigInt::one(), fact))
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    partition: Vec<usize>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct SymFunJson {
    basis: Basis,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<TermJson>,
}

pub(crate) fn rational_from_strings(num: &str, den: &str) -> Result<BigRational> {
    let n: BigInt = num.trim().parse().map_err(|_| Error::validation(format!("bad integer `{num}`")))?;
    let d: BigInt = den.trim().parse().map_err(|_| Error::validation(format!("bad integer `{den}`")))?;
    if d.is_zero() {
        return Err(Error::validation("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

pub(crate) fn terms_to_json(terms: &BTreeMap<Partition, BigRational>) -> Vec<serde_json::Value> {
    terms
        .iter()
        .map(|(p, c)| {
            serde_json::to_value(TermJson {
                partition: p.parts().to_vec(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .expect("serializable")
        })
        .collect()
}

pub(crate) fn terms_from_json(values: &[serde_json::Value]) -> Result<Vec<(Partition, BigRational)>> {
    values
        .iter()
        .map(|v| {
            let t: TermJson = serde_json::from_value(v.clone()).map_err(|e| Error::validation(e.to_string()))?;
            Ok((Partition::new(t.partition)?, rational_from_strings(&t.num, &t.den)?))
        })
        .collect()
}

impl SymFun {
    pub fn to_json(&self) -> serde_json::Value {
        let json = SymFunJson {
            basis: self.basis,
            terms: self
                .terms
                .iter()
                .map(|(p, c)| TermJson { partition: p.parts().to_vec(), num: c.numer().to_string(), den: c.denom().to_string() })
                .collect(),
            rank: (!self.rank.is_zero()).then(|| TermJson {
                partition: vec![],
                num: self.rank.numer().to_string(),
                den: self.rank.denom().to_string(),
            }),
        };
        serde_json::to_value(json).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<SymFun> {
        let json: SymFunJson = serde_json::from_value(value.clone()).map_err(|e| Error::validation(e.to_string()))?;
        let mut terms = Vec::new();
        for t in json.terms {
            terms.push((Partition::new(t.partition)?, rational_from_strings(&t.num, &t.den)?));
        }
        let mut f = SymFun::new(json.basis, terms);
        if let Some(r) = json.rank {
            f.rank = rational_from_strings(&r.num, &r.den)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn degree_one_conversion() {
        let t1 = SymFun::generator(Basis::PowerSum, 1);
        assert_eq!(t1.convert(Basis::Elementary), SymFun::generator(Basis::Elementary, 1));
    }

    #[test]
    fn t2_is_s1_squared_minus_two_s2() {
        let t2 = SymFun::generator(Basis::PowerSum, 2).convert(Basis::Elementary);
        let expected = SymFun::new(Basis::Elementary, [(p(&[1, 1]), q(1, 1)), (p(&[2]), q(-2, 1))]);
        assert_eq!(t2, expected);
    }

    #[test]
    fn todd_two_in_both_bases() {
        let s_form = SymFun::new(Basis::Elementary, [(p(&[1, 1]), q(1, 12)), (p(&[2]), q(1, 12))]);
        let t_form = SymFun::new(Basis::PowerSum, [(p(&[1, 1]), q(3, 24)), (p(&[2]), q(-1, 24))]);
        assert_eq!(s_form.convert(Basis::PowerSum), t_form);
        assert_eq!(todd_component(2).unwrap(), t_form);
    }

    #[test]
    fn todd_low_components() {
        assert_eq!(todd_component(1).unwrap(), SymFun::new(Basis::PowerSum, [(p(&[1]), q(1, 2))]));
        let t3 = SymFun::new(Basis::PowerSum, [(p(&[1, 1, 1]), q(1, 48)), (p(&[2, 1]), q(-1, 48))]);
        assert_eq!(todd_component(3).unwrap(), t3);
        let s3 = SymFun::new(Basis::Elementary, [(p(&[2, 1]), q(1, 24))]);
        assert_eq!(t3.convert(Basis::Elementary), s3);
        assert!(todd_component(0).is_err());
    }

    #[test]
    fn todd_log_series_matches_known_taylor_coefficients() {
        // t/(1-e^{-t}) = 1 + t/2 + t^2/12 - t^4/720 + ..; log of it = t/2 - t^2/24 + t^4/2880 + ..
        let c = ToddSeries::new(6).log_coefficients().to_vec();
        assert_eq!(c[1], q(1, 2));
        assert_eq!(c[2], q(-1, 24));
        assert_eq!(c[3], q(0, 1));
        assert_eq!(c[4], q(1, 2880));
        assert_eq!(c[5], q(0, 1));
    }

    #[test]
    fn depth_is_enforced() {
        let series = ToddSeries::new(3);
        assert!(series.component(3).is_ok());
        assert!(series.component(4).is_err());
        assert_eq!(todd_component(14).unwrap().degree(), Degree::Homogeneous(14));
    }

    #[test]
    fn chern_components() {
        assert_eq!(chern_character_component(1), SymFun::generator(Basis::PowerSum, 1));
        assert_eq!(chern_character_component(2), SymFun::generator(Basis::PowerSum, 2).scale(&q(1, 2)));
        assert_eq!(chern_character_component(4), SymFun::generator(Basis::PowerSum, 4).scale(&q(1, 24)));
        let ch0 = chern_character_component(0);
        assert_eq!(ch0.degree(), Degree::Homogeneous(0));
        assert_eq!(ch0.evaluate(&[q(3, 1), q(5, 1), q(0, 1)]), q(3, 1));
        assert_eq!(ch0.to_string(), "n");
    }

    #[test]
    fn display_matches_conventional_forms() {
        assert_eq!(todd_component(2).unwrap().to_string(), "(1/24)(3 T1^2 - T2)");
        assert_eq!(todd_component(2).unwrap().convert(Basis::Elementary).to_string(), "(1/12)(S1^2 + S2)");
        assert_eq!(todd_component(3).unwrap().to_string(), "(1/48)(T1^3 - T1 T2)");
        assert_eq!(chern_character_component(3).to_string(), "(1/6) T3");
        assert_eq!(todd_component(1).unwrap().to_string(), "(1/2) T1");
    }

    #[test]
    fn evaluation_on_eigenvalues_agrees_across_bases() {
        let eig = [q(2, 1), q(-1, 3), q(5, 7)];
        for k in 1..=5 {
            let f = todd_component(k).unwrap();
            assert_eq!(f.evaluate(&eig), f.convert(Basis::Elementary).evaluate(&eig));
        }
    }

    #[test]
    fn json_round_trip_keeps_exact_coefficients() {
        let f = todd_component(6).unwrap();
        let back = SymFun::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
        let ch0 = chern_character_component(0);
        assert_eq!(SymFun::from_json(&ch0.to_json()).unwrap(), ch0);
    }

    #[test]
    fn inhomogeneous_detected() {
        let f = SymFun::generator(Basis::PowerSum, 1).add(&SymFun::generator(Basis::PowerSum, 2)).unwrap();
        assert_eq!(f.degree(), Degree::Inhomogeneous);
    }
}
