//! Tubular neighborhoods of polynomial zero sets and of their tilts.
//!
//! For a system `f` over the mixed model, `X` is its zero set and
//! `X^flat = {x in O^flat | x^sharp in X}`. Membership of a tilt point `y` in
//! `X^flat_gamma = {y | v(y - X^flat) >= gamma}` is decided by exhausting a
//! finite digit grid of candidates `x`; `x^sharp in X` is tested modulo
//! `p^depth`, so the zero set is the one of `f` at that precision.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::logic::{eval_term, parse_term, Env, MixedModel, Model, Term, TiltModel};
use crate::perfring::{ExtVal, Exponent, MixedElem, ModelParams, TiltElem};
use crate::tilt::sharp;

/// Polynomials in the variables they mention, ordered by name.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub polys: Vec<Term>,
    pub vars: Vec<String>,
}

fn collect_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Term::Neg(a) | Term::Pow(a, _) => collect_vars(a, out),
        _ => {}
    }
}

impl PolySystem {
    pub fn new(polys: Vec<Term>) -> Self {
        let mut vs = BTreeSet::new();
        for f in &polys {
            collect_vars(f, &mut vs);
        }
        PolySystem {
            polys,
            vars: vs.into_iter().collect(),
        }
    }

    /// Parses `;`-separated polynomials such as `y1^2 - p*y1 + p^(3/2)`.
    pub fn parse(text: &str, p: u32) -> Result<Self> {
        let polys = text
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_term(s, p))
            .collect::<Result<Vec<_>>>()?;
        if polys.is_empty() {
            return Err(Error::Param("empty polynomial system".into()));
        }
        Ok(Self::new(polys))
    }

    fn env<E: Clone>(&self, x: &[E]) -> Result<Env<E>> {
        if x.len() != self.vars.len() {
            return Err(Error::Param(format!(
                "the system has {} variables ({}), got {} values",
                self.vars.len(),
                self.vars.join(", "),
                x.len()
            )));
        }
        let mut env = Env::new();
        for (v, e) in self.vars.iter().zip(x) {
            env.bind(v, e.clone());
        }
        Ok(env)
    }

    /// Values `f_i(x)` in a model.
    pub fn eval<M: Model>(&self, m: &M, x: &[M::Elem]) -> Result<Vec<M::Elem>> {
        let env = self.env(x)?;
        self.polys.iter().map(|f| eval_term(f, m, &env)).collect()
    }
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.polys.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// `min_i v(f_i(x)) >= gamma`, with the valuations as certificate.
#[derive(Clone, Debug)]
pub struct ZeroTube {
    pub verdict: Verdict,
    pub valuations: Vec<ExtVal>,
}

impl ZeroTube {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.to_string(),
            "valuations": self.valuations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

fn at_least(v: &ExtVal, gamma: Exponent) -> Option<bool> {
    match v {
        ExtVal::Infinity => Some(true),
        ExtVal::Finite(e) => Some(*e >= gamma),
        ExtVal::AtLeast(e) if *e >= gamma => Some(true),
        ExtVal::AtLeast(_) => None,
    }
}

fn combine(checks: impl IntoIterator<Item = Option<bool>>) -> Verdict {
    let mut unknown = false;
    for c in checks {
        match c {
            Some(false) => return Verdict::False,
            None => unknown = true,
            Some(true) => {}
        }
    }
    if unknown {
        Verdict::Indeterminate
    } else {
        Verdict::True
    }
}

pub fn zero_tube_membership(f: &PolySystem, x: &[MixedElem], gamma: Exponent) -> Result<ZeroTube> {
    let first = x
        .first()
        .ok_or_else(|| Error::Param("no point given".into()))?;
    let precision = x.iter().map(|e| e.precision()).min().unwrap();
    let m = MixedModel {
        params: first.params(),
        precision,
    };
    let vals: Vec<ExtVal> = f.eval(&m, x)?.iter().map(|v| v.valuation()).collect();
    let verdict = combine(vals.iter().map(|v| at_least(v, gamma)));
    Ok(ZeroTube {
        verdict,
        valuations: vals,
    })
}

/// The grid of tilt points searched for witnesses.
#[derive(Clone, Copy, Debug)]
pub struct TiltGrid {
    pub params: ModelParams,
    /// t-adic precision of the candidates.
    pub precision: Exponent,
    /// Exponent denominators divide `p^den_log`.
    pub den_log: u32,
    /// `x^sharp in X` is tested modulo `p^depth`.
    pub depth: u64,
    pub budget: u128,
}

impl TiltGrid {
    /// Number of candidate tuples for `nvars` variables.
    pub fn cardinality(&self, nvars: usize) -> u128 {
        let den = (self.params.p as u64).pow(self.den_log);
        let len = self.precision.grid_len(den) * nvars;
        (self.params.p as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
    }

    fn model(&self) -> TiltModel {
        TiltModel {
            params: self.params,
            precision: self.precision,
        }
    }

    /// All candidate tuples, lexicographic in the digit encodings.
    pub fn points(&self, nvars: usize) -> Result<Vec<Vec<TiltElem>>> {
        let needed = self.cardinality(nvars);
        if needed > self.budget {
            return Err(Error::Budget {
                what: format!("tilt grid search over {nvars} variable(s)"),
                needed,
                budget: self.budget,
            });
        }
        let one = self.model().grid(self.den_log, self.budget)?;
        let mut out: Vec<Vec<TiltElem>> = vec![Vec::new()];
        for _ in 0..nvars {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    one.iter().map(move |e| {
                        let mut v = prefix.clone();
                        v.push(e.clone());
                        v
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// The candidates `x` with `f(x^sharp) = 0 mod p^depth`.
    pub fn zero_set(&self, f: &PolySystem) -> Result<Vec<Vec<TiltElem>>> {
        let need = Exponent::int((self.params.p as u64).pow(self.depth.saturating_sub(1) as u32));
        if self.depth == 0 || self.precision < need {
            return Err(Error::precision(
                format!("sharp modulo p^{}", self.depth),
                format!("t-precision {need}"),
                self.precision,
            ));
        }
        let mm = MixedModel {
            params: self.params,
            precision: Exponent::int(self.depth),
        };
        let mut out = Vec::new();
        for x in self.points(f.vars.len())? {
            let xs = x
                .iter()
                .map(|c| sharp(c, mm.precision))
                .collect::<Result<Vec<_>>>()?;
            if f.eval(&mm, &xs)?.iter().all(|v| v.is_zero()) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct TiltTube {
    pub verdict: Verdict,
    pub witness: Option<Vec<TiltElem>>,
    /// Size of the zero set that was searched.
    pub searched: usize,
}

impl TiltTube {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.to_string(),
            "witness": self.witness.as_ref().map(|w| w.iter().map(|e| e.to_string()).collect::<Vec<_>>()),
            "searched": self.searched,
        })
    }
}

/// Membership of `y` in the `gamma`-tube of an already computed `X^flat`.
pub fn tube_from_zero_set(zero_set: &[Vec<TiltElem>], y: &[TiltElem], gamma: Exponent) -> Result<TiltTube> {
    let mut unknown = false;
    for x in zero_set {
        if x.len() != y.len() {
            return Err(Error::Param("dimension mismatch".into()));
        }
        let checks = x
            .iter()
            .zip(y)
            .map(|(a, b)| Ok(at_least(&b.checked_sub(a)?.valuation(), gamma)))
            .collect::<Result<Vec<_>>>()?;
        match combine(checks) {
            Verdict::True => {
                return Ok(TiltTube {
                    verdict: Verdict::True,
                    witness: Some(x.clone()),
                    searched: zero_set.len(),
                })
            }
            Verdict::Indeterminate => unknown = true,
            Verdict::False => {}
        }
    }
    Ok(TiltTube {
        verdict: if unknown { Verdict::Indeterminate } else { Verdict::False },
        witness: None,
        searched: zero_set.len(),
    })
}

pub fn tilt_tube_membership(f: &PolySystem, y: &[TiltElem], gamma: Exponent, grid: &TiltGrid) -> Result<TiltTube> {
    let zs = grid.zero_set(f)?;
    tube_from_zero_set(&zs, y, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par(p: u32) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn zero_tube_examples() {
        let pr = par(3);
        let n = Exponent::int(3);
        let f = PolySystem::parse("y^3 - p", 3).unwrap();
        let root = MixedElem::parse(pr, n, "p^(1/3)").unwrap();
        let r = zero_tube_membership(&f, &[root], Exponent::new(3, 5, 1).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        let g = PolySystem::parse("y - 1", 3).unwrap();
        let r = zero_tube_membership(&g, &[MixedElem::zero(pr, n)], Exponent::new(3, 1, 1).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        assert_eq!(r.valuations, vec![ExtVal::Finite(Exponent::ZERO)]);
        let r = zero_tube_membership(&f, &[MixedElem::zero(pr, n)], Exponent::int(3)).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        let r = zero_tube_membership(&PolySystem::parse("y", 3).unwrap(), &[MixedElem::zero(pr, n)], Exponent::int(3))
            .unwrap();
        assert_eq!(r.verdict, Verdict::True);
        let r = zero_tube_membership(&PolySystem::parse("y", 3).unwrap(), &[MixedElem::zero(pr, n)], Exponent::int(4))
            .unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn tilt_tube_examples() {
        let pr = par(2);
        let m2 = Exponent::int(2);
        let grid = TiltGrid {
            params: pr,
            precision: m2,
            den_log: 1,
            depth: 2,
            budget: 1 << 12,
        };
        let f = PolySystem::parse("y^2 - p", 2).unwrap();
        let y = TiltElem::t_pow(pr, m2, Exponent::new(2, 1, 1).unwrap());
        let r = tilt_tube_membership(&f, &[y], Exponent::new(2, 3, 1).unwrap(), &grid).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        let g = PolySystem::parse("y - 1", 2).unwrap();
        let t = TiltElem::t_pow(pr, m2, Exponent::ONE);
        for g_num in [1, 2] {
            let gamma = Exponent::new(2, g_num, 1).unwrap();
            let r = tilt_tube_membership(&g, &[t.clone()], gamma, &grid).unwrap();
            assert_eq!(r.verdict, Verdict::False);
        }
        let big = TiltGrid { den_log: 3, budget: 1000, ..grid };
        assert!(matches!(tilt_tube_membership(&f, &[t], m2, &big), Err(Error::Budget { .. })));
    }
}
