//! Interval-valued evaluation of formulas in a model.
//!
//! Quantifiers range over finite witness sets. `sup` over a set that is not
//! marked complete only certifies its lower end (the upper end is `1`);
//! `inf` dually certifies only its upper end, unless some witness gives
//! exactly `0`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::ast::{Formula, Term, Witness};
use super::model::Model;
use super::value::{Enclosure, Val};
use crate::error::{Error, Result};
use crate::perfring::{Exponent, Norm, NormBounds};

/// Denominator exponent of the monomials tried by `normapprox`.
const NORMAPPROX_DEN_LOG: u32 = 4;

#[derive(Clone, Debug)]
pub struct WitnessSet<E> {
    pub elems: Vec<E>,
    /// The set exhausts the structure being quantified over.
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct Env<E> {
    vars: Vec<(String, E)>,
    sets: HashMap<String, WitnessSet<E>>,
}

impl<E: Clone> Default for Env<E> {
    fn default() -> Self {
        Env {
            vars: Vec::new(),
            sets: HashMap::new(),
        }
    }
}

impl<E: Clone> Env<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: &str, e: E) -> &mut Self {
        self.vars.push((name.to_string(), e));
        self
    }

    pub fn set(&mut self, name: &str, elems: Vec<E>, complete: bool) -> &mut Self {
        self.sets.insert(name.to_string(), WitnessSet { elems, complete });
        self
    }

    pub fn get(&self, name: &str) -> Option<&E> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    fn pop(&mut self) {
        self.vars.pop();
    }
}

pub fn eval_term<M: Model>(t: &Term, m: &M, env: &Env<M::Elem>) -> Result<M::Elem> {
    Ok(match t {
        Term::Var(v) => env.get(v).cloned().ok_or_else(|| Error::Unbound(v.clone()))?,
        Term::Int(k) => m.int(*k),
        Term::P => m.int(m.params().p as i64),
        Term::PPow(e) => m.p_pow(*e),
        Term::Unif(e) => m.unif(*e),
        Term::Add(a, b) => m.add(&eval_term(a, m, env)?, &eval_term(b, m, env)?)?,
        Term::Sub(a, b) => m.sub(&eval_term(a, m, env)?, &eval_term(b, m, env)?)?,
        Term::Mul(a, b) => m.mul(&eval_term(a, m, env)?, &eval_term(b, m, env)?)?,
        Term::Neg(a) => m.neg(&eval_term(a, m, env)?),
        Term::Pow(a, k) => m.pow(&eval_term(a, m, env)?, *k)?,
    })
}

/// Exponents `e` on a fine grid below the model precision with `alpha^e`
/// closest to `q` from either side.
fn normapprox<M: Model>(m: &M, q: &BigRational) -> Vec<M::Elem> {
    let alpha = m.params().alpha();
    let target = q.to_f64().unwrap_or(1.0).ln() / alpha.to_f64().unwrap_or(0.5).ln();
    let den = (m.params().p as u64).pow(NORMAPPROX_DEN_LOG);
    let prec = m.precision();
    let j = (target * den as f64).floor().max(0.0) as u64;
    let mut out = Vec::new();
    for num in [j, j + 1] {
        let e = Exponent::from_fraction(m.params().p, num, den).unwrap();
        if e < prec {
            out.push(m.unif(e));
        }
    }
    if out.is_empty() {
        out.push(m.int(1));
    }
    out
}

fn witnesses<M: Model>(
    over: &[Witness],
    m: &M,
    env: &Env<M::Elem>,
) -> Result<(Vec<M::Elem>, bool)> {
    let mut elems = Vec::new();
    let mut complete = false;
    for w in over {
        match w {
            Witness::Grid(g) => {
                let set = env
                    .sets
                    .get(g)
                    .ok_or_else(|| Error::Unbound(g.clone()))?;
                complete |= set.complete;
                elems.extend(set.elems.iter().cloned());
            }
            Witness::Root(t) => elems.extend(m.roots(&eval_term(t, m, env)?)),
            Witness::Divide(y, x) => {
                elems.extend(m.divisors(&eval_term(y, m, env)?, &eval_term(x, m, env)?)?)
            }
            Witness::NormApprox(q) => elems.extend(normapprox(m, q)),
            Witness::Elem(t) => elems.push(eval_term(t, m, env)?),
        }
    }
    Ok((elems, complete))
}

fn is_exact_zero(v: &Val) -> bool {
    match v {
        Val::Sym(b) => b.hi == Norm::Zero,
        Val::Num(_, hi) => hi.is_zero(),
    }
}

fn is_exact_one(v: &Val) -> bool {
    match v {
        Val::Sym(b) => b.lo == Norm::one(),
        Val::Num(lo, _) => lo.is_one(),
    }
}

pub fn eval_val<M: Model>(f: &Formula, m: &M, env: &mut Env<M::Elem>) -> Result<Val> {
    let alpha = m.params().alpha();
    Ok(match f {
        Formula::Dist(s, t) => {
            if s.identically_equal(t, m.characteristic()) {
                Val::zero()
            } else {
                m.dist(&eval_term(s, m, env)?, &eval_term(t, m, env)?)?
            }
        }
        Formula::D(s, t) => {
            if s.identically_equal(t, m.characteristic())
                || Term::Int(0).identically_equal(t, m.characteristic())
            {
                Val::zero()
            } else {
                m.d(&eval_term(s, m, env)?, &eval_term(t, m, env)?)?
            }
        }
        Formula::Const(q) if q.is_zero() => Val::zero(),
        Formula::Const(q) if q.is_one() => Val::one(),
        Formula::Const(q) => Val::rat(q.clone()),
        Formula::AlphaPow(e) => Val::Sym(NormBounds::exact(Norm::AlphaPow(*e))),
        Formula::Max(xs) | Formula::Min(xs) => {
            let is_max = matches!(f, Formula::Max(_));
            let mut acc: Option<Val> = None;
            for x in xs {
                let v = eval_val(x, m, env)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) if is_max => Val::max(&a, &v, &alpha),
                    Some(a) => Val::min(&a, &v, &alpha),
                });
            }
            acc.ok_or_else(|| Error::Param("empty max/min".into()))?
        }
        Formula::DotMinus(a, b) => {
            let va = eval_val(a, m, env)?;
            if is_exact_zero(&va) {
                return Ok(Val::zero());
            }
            Val::dotminus(&va, &eval_val(b, m, env)?, &alpha)
        }
        Formula::Scale(q, a) => Val::scale(q, &eval_val(a, m, env)?, &alpha),
        Formula::Mul(a, b) => Val::mul(&eval_val(a, m, env)?, &eval_val(b, m, env)?, &alpha),
        Formula::Pow(a, k) => Val::pow(&eval_val(a, m, env)?, *k),
        Formula::Sup { var, over, body } | Formula::Inf { var, over, body } => {
            let is_sup = matches!(f, Formula::Sup { .. });
            let (elems, complete) = witnesses(over, m, env)?;
            if elems.is_empty() {
                return Err(Error::EmptyWitness(var.clone()));
            }
            let mut acc: Option<Val> = None;
            for e in elems {
                env.bind(var, e);
                let v = eval_val(body, m, env);
                env.pop();
                let v = v?;
                let stop = if is_sup { is_exact_one(&v) } else { is_exact_zero(&v) };
                acc = Some(match acc {
                    None => v,
                    Some(a) if is_sup => Val::max(&a, &v, &alpha),
                    Some(a) => Val::min(&a, &v, &alpha),
                });
                if stop {
                    return Ok(acc.unwrap());
                }
            }
            let v = acc.unwrap();
            if complete {
                v
            } else if is_sup {
                match v {
                    Val::Sym(b) => Val::Sym(NormBounds { lo: b.lo, hi: Norm::one() }),
                    Val::Num(lo, _) => Val::Num(lo, BigRational::one()),
                }
            } else {
                match v {
                    Val::Sym(b) => Val::Sym(NormBounds { lo: Norm::Zero, hi: b.hi }),
                    Val::Num(_, hi) => Val::Num(BigRational::zero(), hi),
                }
            }
        }
        Formula::Lim { stages, eps } => {
            let mut vs = Vec::with_capacity(stages.len());
            for (s, e) in stages.iter().zip(eps) {
                vs.push((eval_val(s, m, env)?, eval_val(e, m, env)?));
            }
            Val::limit(&vs, &alpha)?
        }
    })
}

/// Certified enclosure of the value of `f` under `env`.
pub fn eval<M: Model>(f: &Formula, m: &M, env: &mut Env<M::Elem>) -> Result<Enclosure> {
    let v = eval_val(f, m, env)?;
    Ok(v.enclosure(&m.params().alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::model::{MixedModel, TiltModel};
    use crate::logic::parser::parse_formula;
    use crate::perfring::ModelParams;

    fn mixed(p: u32, a: u64, b: u64) -> MixedModel {
        MixedModel {
            params: ModelParams::with_alpha(p, a, b).unwrap(),
            precision: Exponent::int(2),
        }
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn spec_examples() {
        let m = mixed(2, 1, 2);
        let mut env = Env::new();
        env.bind("x", m.parse_elem("1+p").unwrap());
        let e = eval(&parse_formula("dist(x, x)", 2).unwrap(), &m, &mut env).unwrap();
        assert_eq!(e.to_string(), "0");
        let e = eval(&parse_formula("1/2", 2).unwrap(), &m, &mut env).unwrap();
        assert_eq!((e.lo, e.hi), (q(1, 2), q(1, 2)));
        let e = eval(&parse_formula("dist(p, 0)", 2).unwrap(), &m, &mut env).unwrap();
        assert_eq!((e.lo, e.hi), (q(1, 2), q(1, 2)));
    }

    #[test]
    fn mvf_axiom_on_grid() {
        let m = mixed(2, 1, 2);
        let mut env = Env::new();
        env.set("G", m.grid(1, 1 << 10).unwrap(), false);
        let f = parse_formula(
            "sup x in G: sup y in G: inf z in {divide(y, x), divide(x, y)}: min(dist(x*z, y), dist(y*z, x))",
            2,
        )
        .unwrap();
        let e = eval(&f, &m, &mut env).unwrap();
        assert!(e.contains_zero(), "{e}");
    }

    #[test]
    fn perfect_tilt() {
        let m = TiltModel {
            params: ModelParams::new(3).unwrap(),
            precision: Exponent::int(2),
        };
        let mut env = Env::new();
        env.set("G", m.grid(1, 1 << 10).unwrap(), false);
        let f = parse_formula("sup x in G: inf y in root(x): |x - y^3|", 3).unwrap();
        assert!(eval(&f, &m, &mut env).unwrap().contains_zero());
        let e = eval(&parse_formula("|p|", 3).unwrap(), &m, &mut env).unwrap();
        assert_eq!(e.to_string(), "0");
    }

    #[test]
    fn truncation_slack_and_errors() {
        let m = mixed(3, 1, 3);
        let mut env = Env::new();
        env.bind("x", m.int(9));
        let e = eval(&parse_formula("|x|", 3).unwrap(), &m, &mut env).unwrap();
        assert_eq!((e.lo, e.hi), (q(0, 1), q(1, 9)));
        assert!(matches!(
            eval(&parse_formula("|y|", 3).unwrap(), &m, &mut env),
            Err(Error::Unbound(_))
        ));
        env.set("E", vec![], true);
        assert!(matches!(
            eval(&parse_formula("sup y in E: |y|", 3).unwrap(), &m, &mut env),
            Err(Error::EmptyWitness(_))
        ));
    }
}
