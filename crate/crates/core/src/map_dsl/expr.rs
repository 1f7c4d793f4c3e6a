use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::rational_to_f64;

/// Below this modulus a denominator counts as zero during evaluation.
pub const SINGULAR_DENOMINATOR: f64 = 1e-300;

/// An exact complex number `re + im i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        CRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        CRational { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        CRational::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        CRational::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn imag_unit() -> Self {
        CRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    /// `None` for zero.
    pub fn recip(&self) -> Option<CRational> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(CRational { re: &self.re / &norm, im: -(&self.im / &norm) })
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn powi(&self, k: i32) -> Option<CRational> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut out = CRational::from_int(1);
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        Some(out)
    }

    /// Parses `a+bi` text with rational `a`, `b` (`1/2-3/4i`, `-2`, `0.25i`, `i`). Anything else
    /// is read as a constant DSL expression, so `(1+2*i)/3` also works.
    pub fn parse(text: &str) -> Result<CRational> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(body) = s.strip_suffix('i') {
            let body = body.strip_suffix('*').unwrap_or(body);
            let split = body
                .char_indices()
                .filter(|&(k, ch)| (ch == '+' || ch == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
                .map(|(k, _)| k)
                .next_back()
                .unwrap_or(0);
            let (re_text, im_text) = body.split_at(split);
            let im_text = match im_text {
                "" | "+" => "1",
                "-" => "-1",
                t => t,
            };
            if let (Ok(re), Ok(im)) = (real_constant(re_text), real_constant(im_text)) {
                return Ok(CRational::new(re, im));
            }
        }
        let e = super::parser::parse_expr(&s, 0, &Default::default())?;
        match e.node() {
            Node::Const(c) => Ok(c.clone()),
            _ => Err(Error::validation(format!("`{text}` is not a constant"))),
        }
    }
}

fn real_constant(text: &str) -> Result<BigRational> {
    if text.is_empty() {
        return Ok(BigRational::zero());
    }
    if text.contains('i') {
        return Err(Error::validation("not a real constant"));
    }
    let e = super::parser::parse_expr(text, 0, &Default::default())?;
    match e.as_const() {
        Some(c) if c.im.is_zero() => Ok(c.re.clone()),
        _ => Err(Error::validation(format!("`{text}` is not a real constant"))),
    }
}

impl Add for &CRational {
    type Output = CRational;
    fn add(self, o: &CRational) -> CRational {
        CRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &CRational {
    type Output = CRational;
    fn sub(self, o: &CRational) -> CRational {
        CRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &CRational {
    type Output = CRational;
    fn mul(self, o: &CRational) -> CRational {
        CRational { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &CRational {
    type Output = CRational;
    fn neg(self) -> CRational {
        CRational { re: -&self.re, im: -&self.im }
    }
}

fn fmt_q(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for CRational {
    /// Always parenthesized so the text is an atom of the DSL: `(3)`, `(-1/2)`, `(1/2+3/4*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "({})", fmt_q(&self.re));
        }
        let im = if self.im.abs().is_one() { "i".to_string() } else { format!("{}*i", fmt_q(&self.im.abs())) };
        let sign = if self.im.is_negative() { "-" } else { "+" };
        if self.re.is_zero() {
            let lead = if self.im.is_negative() { "-" } else { "" };
            write!(f, "({lead}{im})")
        } else {
            write!(f, "({}{sign}{im})", fmt_q(&self.re))
        }
    }
}

/// Expression node. Children are shared, so cloning an [`Expr`] is cheap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(CRational),
    /// Coordinate `z_{i+1}` (0-based index).
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Neg(Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Log(Expr),
}

/// An expression tree in the coordinates `z1..zn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(c: CRational) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(CRational::from_int(n))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(i: usize) -> Expr {
        Expr::wrap(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<&CRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(CRational::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(CRational::is_one)
    }

    /// Flattened sum with constants folded.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = CRational::default();
        let mut rest = Vec::new();
        for t in terms {
            match t.node() {
                Node::Const(c) => constant = &constant + c,
                Node::Sum(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Const(c) => constant = &constant + c,
                            _ => rest.push(u.clone()),
                        }
                    }
                }
                _ => rest.push(t),
            }
        }
        if !constant.is_zero() {
            rest.push(Expr::constant(constant));
        }
        match rest.len() {
            0 => Expr::zero(),
            1 => rest.pop().unwrap(),
            _ => Expr::wrap(Node::Sum(rest)),
        }
    }

    /// Flattened product with constants folded to a single leading factor.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = CRational::from_int(1);
        let mut rest = Vec::new();
        for f in factors {
            match f.node() {
                Node::Const(c) => constant = &constant * c,
                Node::Product(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Const(c) => constant = &constant * c,
                            _ => rest.push(u.clone()),
                        }
                    }
                }
                _ => rest.push(f),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if rest.is_empty() {
            return Expr::constant(constant);
        }
        if !constant.is_one() {
            rest.insert(0, Expr::constant(constant));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::wrap(Node::Product(rest))
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(e)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(inv) = y.recip() {
                return Expr::constant(x * &inv);
            }
        }
        Expr::wrap(Node::Div(a, b))
    }

    pub fn pow(base: Expr, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if let Some(v) = c.powi(k) {
                return Expr::constant(v);
            }
        }
        Expr::wrap(Node::Pow(base, k))
    }

    pub fn exp(e: Expr) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        Expr::wrap(Node::Exp(e))
    }

    pub fn log(e: Expr) -> Expr {
        if e.is_one() {
            return Expr::zero();
        }
        Expr::wrap(Node::Log(e))
    }

    /// One more than the largest coordinate index used (0 for constants).
    pub fn required_dim(&self) -> usize {
        match self.node() {
            Node::Const(_) => 0,
            Node::Var(i) => i + 1,
            Node::Sum(v) | Node::Product(v) => v.iter().map(Expr::required_dim).max().unwrap_or(0),
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.required_dim(),
            Node::Div(a, b) => a.required_dim().max(b.required_dim()),
        }
    }

    /// Whether every transcendental or reciprocal node is absent and the polynomial degree is
    /// at most 1. Conservative: returns `false` for some expressions that are affine.
    pub fn is_affine(&self) -> bool {
        fn degree(e: &Expr) -> Option<usize> {
            match e.node() {
                Node::Const(_) => Some(0),
                Node::Var(_) => Some(1),
                Node::Sum(v) => v.iter().map(degree).try_fold(0, |m, d| d.map(|d| m.max(d))),
                Node::Product(v) => v.iter().map(degree).try_fold(0, |m, d| d.map(|d| m + d)),
                Node::Neg(a) => degree(a),
                Node::Pow(a, k) if *k >= 0 => degree(a).map(|d| d * *k as usize),
                Node::Div(a, b) => match degree(b) {
                    Some(0) => degree(a),
                    _ => None,
                },
                Node::Pow(a, _) => (degree(a) == Some(0)).then_some(0),
                Node::Exp(a) | Node::Log(a) => (degree(a) == Some(0)).then_some(0),
            }
        }
        degree(self).is_some_and(|d| d <= 1)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self.node() {
            Node::Const(c) => Ok(c.to_c64()),
            Node::Var(i) => z.get(*i).copied().ok_or(Error::Dimension { expected: i + 1, found: z.len() }),
            Node::Sum(v) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in v {
                    acc += t.eval(z)?;
                }
                Ok(acc)
            }
            Node::Product(v) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for t in v {
                    acc *= t.eval(z)?;
                }
                Ok(acc)
            }
            Node::Neg(a) => Ok(-a.eval(z)?),
            Node::Div(a, b) => {
                let den = b.eval(z)?;
                if den.norm() < SINGULAR_DENOMINATOR {
                    return Err(Error::domain(z, format!("division by zero in {self}")));
                }
                Ok(a.eval(z)? / den)
            }
            Node::Pow(a, k) => {
                let base = a.eval(z)?;
                if *k < 0 && base.norm() < SINGULAR_DENOMINATOR {
                    return Err(Error::domain(z, format!("negative power of zero in {self}")));
                }
                Ok(base.powi(*k))
            }
            Node::Exp(a) => Ok(a.eval(z)?.exp()),
            Node::Log(a) => {
                let v = a.eval(z)?;
                if v.norm() < SINGULAR_DENOMINATOR {
                    return Err(Error::domain(z, format!("log of zero in {self}")));
                }
                Ok(v.ln())
            }
        }
    }

    /// Exact partial derivative with respect to coordinate `var` (0-based).
    pub fn differentiate(&self, var: usize) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(v) => Expr::sum(v.iter().map(|t| t.differentiate(var))),
            Node::Product(v) => {
                let mut terms = Vec::new();
                for (i, f) in v.iter().enumerate() {
                    let df = f.differentiate(var);
                    if df.is_zero() {
                        continue;
                    }
                    let factors = v.iter().enumerate().map(|(j, g)| if i == j { df.clone() } else { g.clone() });
                    terms.push(Expr::product(factors.collect::<Vec<_>>()));
                }
                Expr::sum(terms)
            }
            Node::Neg(a) => Expr::neg(a.differentiate(var)),
            Node::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                let first = Expr::div(da, b.clone());
                if db.is_zero() {
                    return first;
                }
                let second = Expr::div(Expr::product([a.clone(), db]), Expr::pow(b.clone(), 2));
                Expr::sum([first, Expr::neg(second)])
            }
            Node::Pow(a, k) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::product([Expr::int(*k as i64), Expr::pow(a.clone(), k - 1), da])
            }
            Node::Exp(a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::product([self.clone(), da])
            }
            Node::Log(a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::div(da, a.clone())
            }
        }
    }

    /// Replaces every coordinate `z_{j+1}` by `args[j]`.
    pub fn substitute(&self, args: &[Expr]) -> Result<Expr> {
        Ok(match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => args.get(*i).cloned().ok_or(Error::Dimension { expected: i + 1, found: args.len() })?,
            Node::Sum(v) => Expr::sum(v.iter().map(|t| t.substitute(args)).collect::<Result<Vec<_>>>()?),
            Node::Product(v) => Expr::product(v.iter().map(|t| t.substitute(args)).collect::<Result<Vec<_>>>()?),
            Node::Neg(a) => Expr::neg(a.substitute(args)?),
            Node::Div(a, b) => Expr::div(a.substitute(args)?, b.substitute(args)?),
            Node::Pow(a, k) => Expr::pow(a.substitute(args)?, *k),
            Node::Exp(a) => Expr::exp(a.substitute(args)?),
            Node::Log(a) => Expr::log(a.substitute(args)?),
        })
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Sum(_) => 1,
            Node::Product(_) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(_) | Node::Var(_) | Node::Exp(_) | Node::Log(_) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "z{}", i + 1),
            Node::Sum(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    t.fmt_child(f, 1)?;
                }
                Ok(())
            }
            Node::Product(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    t.fmt_child(f, 3)?;
                }
                Ok(())
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3)
            }
            Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 3)
            }
            Node::Pow(a, k) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{k}")
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::sum([self, o])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::sum([self, Expr::neg(o)])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::product([self, o])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::div(self, o)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Exact partial derivative of `e` in coordinate `var` (0-based).
pub fn differentiate(e: &Expr, var: usize) -> Expr {
    e.differentiate(var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_folding() {
        let e = Expr::sum([Expr::int(2), Expr::var(0), Expr::int(3)]);
        assert_eq!(e, Expr::sum([Expr::var(0), Expr::int(5)]));
        assert!(Expr::product([Expr::var(0), Expr::zero()]).is_zero());
        assert_eq!(Expr::product([Expr::one(), Expr::var(1)]), Expr::var(1));
        assert_eq!(Expr::pow(Expr::int(2), -2), Expr::constant(CRational::ratio(1, 4)));
        assert_eq!(Expr::neg(Expr::neg(Expr::var(0))), Expr::var(0));
    }

    #[test]
    fn derivative_of_product() {
        // d/dz1 (z1^2 z2) = 2 z1 z2
        let e = Expr::product([Expr::pow(Expr::var(0), 2), Expr::var(1)]);
        let d = e.differentiate(0);
        let z = [c(1.5, -0.5), c(0.25, 2.0)];
        let expected = c(2.0, 0.0) * z[0] * z[1];
        assert!((d.eval(&z).unwrap() - expected).norm() < 1e-14);
        assert!(Expr::exp(Expr::var(0)).differentiate(1).is_zero());
    }

    #[test]
    fn derivative_of_reciprocal() {
        let e = Expr::div(Expr::one(), Expr::sum([Expr::var(0), Expr::var(1)]));
        let v = e.differentiate(0).eval(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((v - c(-1.0 / 9.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_evaluation_is_a_domain_error() {
        let e = Expr::div(Expr::one(), Expr::var(0));
        assert!(matches!(e.eval(&[c(0.0, 0.0)]), Err(Error::Domain { .. })));
        assert!(matches!(Expr::log(Expr::var(0)).eval(&[c(0.0, 0.0)]), Err(Error::Domain { .. })));
        assert!(matches!(Expr::pow(Expr::var(0), -1).eval(&[c(0.0, 0.0)]), Err(Error::Domain { .. })));
    }

    #[test]
    fn constant_display() {
        assert_eq!(CRational::ratio(-1, 2).to_string(), "(-1/2)");
        let z = CRational::new(BigRational::new(1.into(), 2.into()), BigRational::new((-3).into(), 4.into()));
        assert_eq!(z.to_string(), "(1/2-3/4*i)");
        assert_eq!(CRational::imag_unit().to_string(), "(i)");
    }

    #[test]
    fn affine_detection() {
        let a = Expr::sum([Expr::product([Expr::int(2), Expr::var(0)]), Expr::var(1), Expr::int(1)]);
        assert!(a.is_affine());
        assert!(!Expr::pow(Expr::var(0), 2).is_affine());
        assert!(Expr::div(Expr::var(0), Expr::int(3)).is_affine());
        assert!(!Expr::div(Expr::one(), Expr::var(0)).is_affine());
    }
}
