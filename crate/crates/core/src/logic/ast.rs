//! Terms and formulas of the ring language with the divisibility predicate `D`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::perfring::Exponent;

/// Maximal number of arguments of `max`, `min` and stages of `lim`.
pub const MAX_ARITY: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Int(i64),
    /// The integer `p`.
    P,
    /// `p^e` for a non-integer `e`; zero in characteristic `p`.
    PPow(Exponent),
    /// `w^e`, the `e`-th power of the model's uniformizer (`p` in mixed
    /// characteristic, `t` in the tilt). `w_i` is `w^(1/p^i)`.
    Unif(Exponent),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, u32),
}

/// Where a quantifier takes its witnesses from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Witness {
    /// A named grid from the environment (capitalized name).
    Grid(String),
    /// Candidate `p`-th roots of the value of the term.
    Root(Term),
    /// Candidate `z` with `x z = y` for `divide(y, x)`.
    Divide(Term, Term),
    /// Monomials whose norm is close to the given rational.
    NormApprox(BigRational),
    /// A single element.
    Elem(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `|s - t|`.
    Dist(Term, Term),
    /// `inf_z |t - s z|`.
    D(Term, Term),
    /// A rational in `[0,1]`.
    Const(BigRational),
    /// `alpha^e`.
    AlphaPow(Exponent),
    Max(Vec<Formula>),
    Min(Vec<Formula>),
    /// Truncated subtraction `max(a - b, 0)`.
    DotMinus(Box<Formula>, Box<Formula>),
    /// `min(1, q * f)` for `q >= 0`.
    Scale(BigRational, Box<Formula>),
    /// Product of two values.
    Mul(Box<Formula>, Box<Formula>),
    Pow(Box<Formula>, u32),
    Sup {
        var: String,
        over: Vec<Witness>,
        body: Box<Formula>,
    },
    Inf {
        var: String,
        over: Vec<Witness>,
        body: Box<Formula>,
    },
    /// A uniform limit: stage `j` is within `eps[j]` of the limit.
    Lim {
        stages: Vec<Formula>,
        eps: Vec<Formula>,
    },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn pow(a: Term, k: u32) -> Term {
        Term::Pow(Box::new(a), k)
    }

    fn prec(&self) -> u8 {
        match self {
            Term::Add(..) | Term::Sub(..) => 0,
            Term::Mul(..) => 1,
            Term::Neg(_) => 2,
            Term::Int(k) if *k < 0 => 2,
            Term::Pow(..) | Term::PPow(_) => 3,
            Term::Unif(e) if *e != Exponent::ONE => 3,
            _ => 4,
        }
    }

    /// Expansion as an integer polynomial in the variables and constant
    /// symbols, or `None` when it would be too large.
    fn expand(&self, char_p: Option<u32>) -> Option<Poly> {
        const LIMIT: usize = 4096;
        let atom = |a: Atom| {
            let mut m = BTreeMap::new();
            m.insert(vec![(a, 1u32)], BigInt::one());
            Some(m)
        };
        let r = match self {
            Term::Var(v) => atom(Atom::Var(v.clone()))?,
            Term::P => match char_p {
                Some(_) => BTreeMap::new(),
                None => atom(Atom::P)?,
            },
            Term::PPow(_) if char_p.is_some() => BTreeMap::new(),
            Term::PPow(e) => atom(Atom::PPow(*e))?,
            Term::Unif(e) => atom(Atom::Unif(*e))?,
            Term::Int(k) => {
                let mut m = BTreeMap::new();
                if *k != 0 {
                    m.insert(Vec::new(), BigInt::from(*k));
                }
                m
            }
            Term::Add(a, b) => poly_add(a.expand(char_p)?, b.expand(char_p)?, 1),
            Term::Sub(a, b) => poly_add(a.expand(char_p)?, b.expand(char_p)?, -1),
            Term::Neg(a) => poly_add(BTreeMap::new(), a.expand(char_p)?, -1),
            Term::Mul(a, b) => poly_mul(&a.expand(char_p)?, &b.expand(char_p)?),
            Term::Pow(a, k) => {
                if *k > 32 {
                    return None;
                }
                let base = a.expand(char_p)?;
                let mut acc: Poly = BTreeMap::new();
                acc.insert(Vec::new(), BigInt::one());
                for _ in 0..*k {
                    acc = poly_mul(&acc, &base);
                    if acc.len() > LIMIT {
                        return None;
                    }
                }
                acc
            }
        };
        let r = match char_p {
            Some(p) => r
                .into_iter()
                .filter_map(|(m, c)| {
                    let c = c % BigInt::from(p);
                    (!c.is_zero()).then_some((m, c))
                })
                .collect(),
            None => r,
        };
        (r.len() <= LIMIT).then_some(r)
    }

    /// True when `self - other` is the zero polynomial (with coefficients
    /// mod `p` in characteristic `p`), so the two terms agree in every ring
    /// of that characteristic.
    pub fn identically_equal(&self, other: &Term, char_p: Option<u32>) -> bool {
        self == other
            || Term::sub(self.clone(), other.clone())
                .expand(char_p)
                .is_some_and(|m| m.is_empty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Var(String),
    P,
    PPow(Exponent),
    Unif(Exponent),
}

type Poly = BTreeMap<Vec<(Atom, u32)>, BigInt>;

fn poly_add(mut a: Poly, b: Poly, sign: i64) -> Poly {
    for (m, c) in b {
        let e = a.entry(m.clone()).or_insert_with(BigInt::zero);
        *e += c * sign;
        if e.is_zero() {
            a.remove(&m);
        }
    }
    a
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out: Poly = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m: BTreeMap<Atom, u32> = ma.iter().cloned().collect();
            for (x, k) in mb {
                *m.entry(x.clone()).or_insert(0) += k;
            }
            out = poly_add(out, BTreeMap::from([(m.into_iter().collect(), ca * cb)]), 1);
        }
    }
    out
}

impl Formula {
    pub fn constant(num: i64, den: i64) -> Formula {
        Formula::Const(BigRational::new(num.into(), den.into()))
    }

    pub fn dotminus(a: Formula, b: Formula) -> Formula {
        Formula::DotMinus(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Formula, k: u32) -> Formula {
        Formula::Pow(Box::new(a), k)
    }

    /// `|t|`, i.e. `dist(t, 0)`.
    pub fn norm(t: Term) -> Formula {
        Formula::Dist(t, Term::Int(0))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Sup { .. } | Formula::Inf { .. } => false,
            Formula::Dist(..) | Formula::D(..) | Formula::Const(_) | Formula::AlphaPow(_) => true,
            Formula::Max(v) | Formula::Min(v) => v.iter().all(|f| f.is_quantifier_free()),
            Formula::DotMinus(a, b) | Formula::Mul(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Scale(_, a) | Formula::Pow(a, _) => a.is_quantifier_free(),
            Formula::Lim { stages, eps } => stages.iter().chain(eps).all(|f| f.is_quantifier_free()),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Sup { .. } | Formula::Inf { .. } => 0,
            Formula::DotMinus(..) => 1,
            Formula::Mul(..) | Formula::Scale(..) => 2,
            Formula::Pow(..) => 3,
            Formula::AlphaPow(e) if *e != Exponent::ONE => 3,
            _ => 4,
        }
    }
}

struct Paren<'a, T>(&'a T, bool);

impl fmt::Display for Paren<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Paren<'_, Formula> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn tp(t: &Term, min: u8) -> Paren<'_, Term> {
    Paren(t, t.prec() < min)
}

fn fp(x: &Formula, min: u8) -> Paren<'_, Formula> {
    Paren(x, x.prec() < min)
}

fn write_exp(f: &mut fmt::Formatter<'_>, base: &str, e: &Exponent) -> fmt::Result {
    if *e == Exponent::ONE {
        write!(f, "{base}")
    } else if e.is_integer() {
        write!(f, "{base}^{e}")
    } else {
        write!(f, "{base}^({e})")
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(k) => write!(f, "{k}"),
            Term::P => write!(f, "p"),
            Term::PPow(e) => write!(f, "p^({e})"),
            Term::Unif(e) => write_exp(f, "w", e),
            Term::Add(a, b) => write!(f, "{} + {}", tp(a, 0), tp(b, 1)),
            Term::Sub(a, b) => write!(f, "{} - {}", tp(a, 0), tp(b, 1)),
            Term::Mul(a, b) => write!(f, "{}*{}", tp(a, 1), tp(b, 2)),
            Term::Neg(a) => write!(f, "-{}", tp(a, 2)),
            Term::Pow(a, k) => write!(f, "{}^{k}", tp(a, 4)),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Grid(g) => write!(f, "{g}"),
            Witness::Root(t) => write!(f, "root({t})"),
            Witness::Divide(y, x) => write!(f, "divide({y}, {x})"),
            Witness::NormApprox(q) => {
                write!(f, "normapprox(")?;
                write_rat(f, q)?;
                write!(f, ")")
            }
            Witness::Elem(t) => write!(f, "{t}"),
        }
    }
}

fn write_over(f: &mut fmt::Formatter<'_>, over: &[Witness]) -> fmt::Result {
    if over.len() == 1 && !matches!(over[0], Witness::Elem(_)) {
        return write!(f, "{}", over[0]);
    }
    write!(f, "{{")?;
    for (i, w) in over.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{w}")?;
    }
    write!(f, "}}")
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[Formula], sep: &str) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Dist(a, b) => write!(f, "dist({a}, {b})"),
            Formula::D(a, b) => write!(f, "D({a}, {b})"),
            Formula::Const(q) => write_rat(f, q),
            Formula::AlphaPow(e) => write_exp(f, "alpha", e),
            Formula::Max(xs) => {
                write!(f, "max(")?;
                write_list(f, xs, ", ")?;
                write!(f, ")")
            }
            Formula::Min(xs) => {
                write!(f, "min(")?;
                write_list(f, xs, ", ")?;
                write!(f, ")")
            }
            Formula::DotMinus(a, b) => write!(f, "{} .- {}", fp(a, 1), fp(b, 2)),
            Formula::Scale(q, a) => {
                write_rat(f, q)?;
                write!(f, " * {}", fp(a, 3))
            }
            Formula::Mul(a, b) => write!(f, "{} * {}", fp(a, 2), fp(b, 3)),
            Formula::Pow(a, k) => write!(f, "{}^{k}", fp(a, 4)),
            Formula::Sup { var, over, body } | Formula::Inf { var, over, body } => {
                let q = if matches!(self, Formula::Sup { .. }) { "sup" } else { "inf" };
                write!(f, "{q} {var} in ")?;
                write_over(f, over)?;
                write!(f, ": {body}")
            }
            Formula::Lim { stages, eps } => {
                write!(f, "lim(")?;
                write_list(f, stages, " | ")?;
                write!(f, "; ")?;
                write_list(f, eps, ", ")?;
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printing() {
        let t = Term::mul(Term::add(Term::var("x"), Term::P), Term::neg(Term::var("y")));
        assert_eq!(t.to_string(), "(x + p)*-y");
        let f = Formula::dotminus(
            Formula::Max(vec![Formula::D(Term::var("x"), Term::var("y")), Formula::AlphaPow(Exponent::ONE)]),
            Formula::dotminus(Formula::constant(1, 2), Formula::constant(0, 1)),
        );
        assert_eq!(f.to_string(), "max(D(x, y), alpha) .- (1/2 .- 0)");
    }

    #[test]
    fn polynomial_identity() {
        let x = Term::var("x");
        let y = Term::var("y");
        let lhs = Term::pow(Term::add(x.clone(), y.clone()), 2);
        let rhs = Term::add(
            Term::add(Term::mul(x.clone(), x.clone()), Term::mul(Term::Int(2), Term::mul(x.clone(), y.clone()))),
            Term::pow(y.clone(), 2),
        );
        assert!(lhs.identically_equal(&rhs, None));
        assert!(!lhs.identically_equal(&Term::add(x.clone(), y.clone()), None));
        let frob = Term::add(Term::pow(x.clone(), 2), Term::pow(y.clone(), 2));
        assert!(lhs.identically_equal(&frob, Some(2)));
        assert!(Term::P.identically_equal(&Term::Int(0), Some(2)));
    }
}
