//! Formulas about the tilt rewritten as formulas about root sequences in
//! the mixed model, and the distance of a sequence to the set of compatible
//! sequences.
//!
//! A tilt variable `y` becomes the variables `y[0], y[1], ...`, bound to the
//! entries `y[i] = (y^{1/p^i})^sharp` of its root sequence. Since `sharp` is
//! multiplicative, a product term `s` has `s[i] = (s^{1/p^i})^sharp`, and
//!
//! * `D(s,t)` is exactly `D(s[i], t[i])^{p^i}` for every `i`;
//! * `|s - t|` is within `alpha^{p^i}` of `|s[i] - t[i]|^{p^i}`, because
//!   `sharp` is additive modulo `p`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ast::{Formula, Term};
use super::eval::Env;
use super::value::{Enclosure, Val};
use crate::error::{Error, Result};
use crate::perfring::{norm_of, Exponent, MixedElem};
use crate::tilt::OmegaSeq;

fn stage_term(t: &Term, p: u32, i: u32) -> Result<Term> {
    let rec = |a: &Term| stage_term(a, p, i);
    Ok(match t {
        Term::Var(v) => Term::Var(format!("{v}[{i}]")),
        Term::Int(k) => match k.rem_euclid(p as i64) {
            0 => Term::Int(0),
            1 => Term::Int(1),
            _ => {
                return Err(Error::Unsupported(format!(
                    "the integer {k} is not 0 or 1 in the residue field; its sharp is not a digit expansion"
                )))
            }
        },
        Term::P | Term::PPow(_) => Term::Int(0),
        Term::Unif(e) => Term::Unif(e.div_int((p as u64).pow(i))),
        Term::Mul(a, b) => Term::mul(rec(a)?, rec(b)?),
        Term::Pow(a, k) => Term::pow(rec(a)?, *k),
        Term::Neg(a) if p == 2 => rec(a)?,
        Term::Neg(a) => Term::neg(rec(a)?),
        Term::Add(..) | Term::Sub(..) => {
            return Err(Error::Unsupported(format!(
                "sums inside tilt atoms ({t}) are not multiplicative under sharp"
            )))
        }
    })
}

/// Rewrites a quantifier-free formula over the tilt into one over the mixed
/// model, with limits truncated after `depth` stages.
pub fn translate_tilt(f: &Formula, p: u32, depth: u32) -> Result<Formula> {
    if depth == 0 {
        return Err(Error::Param("translation depth must be positive".into()));
    }
    let rec = |g: &Formula| translate_tilt(g, p, depth);
    let boxed = |g: &Formula| -> Result<Box<Formula>> { Ok(Box::new(rec(g)?)) };
    Ok(match f {
        Formula::D(s, t) | Formula::Dist(s, t) => {
            let is_d = matches!(f, Formula::D(..));
            let mut stages = Vec::new();
            let mut eps = Vec::new();
            for i in 0..depth {
                let (si, ti) = (stage_term(s, p, i)?, stage_term(t, p, i)?);
                let atom = if is_d { Formula::D(si, ti) } else { Formula::Dist(si, ti) };
                let q = p.checked_pow(i).ok_or_else(|| Error::Param("translation depth too large".into()))?;
                stages.push(if q == 1 { atom } else { Formula::pow(atom, q) });
                eps.push(if is_d {
                    Formula::constant(0, 1)
                } else {
                    Formula::AlphaPow(Exponent::int(q as u64))
                });
            }
            Formula::Lim { stages, eps }
        }
        Formula::Const(_) | Formula::AlphaPow(_) => f.clone(),
        Formula::Max(xs) => Formula::Max(xs.iter().map(rec).collect::<Result<_>>()?),
        Formula::Min(xs) => Formula::Min(xs.iter().map(rec).collect::<Result<_>>()?),
        Formula::DotMinus(a, b) => Formula::DotMinus(boxed(a)?, boxed(b)?),
        Formula::Mul(a, b) => Formula::Mul(boxed(a)?, boxed(b)?),
        Formula::Scale(q, a) => Formula::Scale(q.clone(), boxed(a)?),
        Formula::Pow(a, k) => Formula::Pow(boxed(a)?, *k),
        Formula::Lim { stages, eps } => Formula::Lim {
            stages: stages.iter().map(rec).collect::<Result<_>>()?,
            eps: eps.iter().map(rec).collect::<Result<_>>()?,
        },
        Formula::Sup { .. } | Formula::Inf { .. } => {
            return Err(Error::Unsupported("translation of quantifiers".into()))
        }
    })
}

/// Binds `name[i]` to the entries of a root sequence.
pub fn bind_omega(env: &mut Env<MixedElem>, name: &str, omega: &OmegaSeq) {
    for (i, e) in omega.entries().iter().enumerate() {
        env.bind(&format!("{name}[{i}]"), e.clone());
    }
}

fn dist_val(a: &MixedElem, b: &MixedElem) -> Result<Val> {
    Ok(Val::Sym(norm_of(a.checked_sub(b)?.valuation())))
}

fn half_pow(i: usize) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::one() << i)
}

/// Enclosure of the distance from `x` to the compatible sequences, in the
/// metric `sup_i |x_i - y_i| 2^{-i}`, via
/// `d_n(x) = inf_y sup_{i<=n} |x_i - y^{p^{n-i}}| 2^{-i}`, which is within
/// `2^{-n-1}` of it. `n` is capped at `x.len() - 1`.
///
/// The lower end uses `|x_i - x_j^{p^{j-i}}| <= 2^j d_n(x)`; the upper end
/// minimizes over the candidates `y = x_n` and the iterated `p`-th roots of
/// each `x_j`.
pub fn dist_to_omega(x: &[MixedElem], n: usize) -> Result<Enclosure> {
    let first = x.first().ok_or_else(|| Error::Param("empty sequence".into()))?;
    let params = first.params();
    let alpha = params.alpha();
    let p = params.p as u64;
    let n = n.min(x.len() - 1);
    let weighted = |v: Val, i: usize| -> (BigRational, BigRational) {
        Val::scale(&half_pow(i), &v, &alpha).interval(&alpha)
    };
    let mut lo = BigRational::zero();
    for j in 1..=n {
        for i in 0..j {
            let v = dist_val(&x[i], &x[j].pow(p.pow((j - i) as u32)))?;
            lo = lo.max(weighted(v, j).0);
        }
    }
    let mut cands = vec![x[n].clone()];
    for (j, xj) in x.iter().enumerate().take(n) {
        let mut y = xj.clone();
        for _ in j..n {
            y = y.pth_root_mod_p().with_precision(xj.precision());
        }
        cands.push(y);
    }
    let mut hi = BigRational::one();
    for y in &cands {
        let mut worst = BigRational::zero();
        for (i, xi) in x.iter().enumerate().take(n + 1) {
            let v = dist_val(xi, &y.pow(p.pow((n - i) as u32)))?;
            worst = worst.max(weighted(v, i).1);
        }
        hi = hi.min(worst);
    }
    let hi = (hi + half_pow(n + 1)).min(BigRational::one());
    Ok(Enclosure {
        lo: lo.clone().min(hi.clone()),
        hi,
        symbolic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::eval;
    use crate::logic::model::{MixedModel, Model, TiltModel};
    use crate::logic::parser::parse_formula;
    use crate::perfring::{ModelParams, TiltElem};
    use crate::tilt::{lift_sequence, root_residues};

    fn omega_of(y: &TiltElem, depth: usize, n: u64) -> OmegaSeq {
        // residues of y^{1/p^i} read in the mixed model
        let y = y.with_precision(Exponent::int(256));
        let res: Vec<MixedElem> = (0..depth + n as usize)
            .map(|i| crate::tilt::lift_residue(&y.inv_frobenius_pow(i as u32), Exponent::ONE))
            .collect();
        lift_sequence(&res, n, depth).unwrap()
    }

    #[test]
    fn d_flat_example() {
        let par = ModelParams::new(2).unwrap();
        let f = parse_formula("D(a, b)", 2).unwrap();
        let tf = translate_tilt(&f, 2, 3).unwrap();
        let tm = TiltModel { params: par, precision: Exponent::int(4) };
        let a = TiltElem::t_pow(par, Exponent::int(4), Exponent::from_fraction(2, 1, 2).unwrap());
        let b = TiltElem::t_pow(par, Exponent::int(4), Exponent::ONE);
        let mut te = Env::new();
        te.bind("a", a.clone()).bind("b", b.clone());
        assert_eq!(eval(&f, &tm, &mut te).unwrap().to_string(), "0");
        let mm = MixedModel { params: par, precision: Exponent::int(3) };
        let mut me = Env::new();
        bind_omega(&mut me, "a", &omega_of(&a, 3, 3));
        bind_omega(&mut me, "b", &omega_of(&b, 3, 3));
        assert_eq!(eval(&tf, &mm, &mut me).unwrap().to_string(), "0");
        // and the other way round
        let g = parse_formula("D(b, a)", 2).unwrap();
        let tg = translate_tilt(&g, 2, 3).unwrap();
        let lhs = eval(&g, &tm, &mut te).unwrap();
        let rhs = eval(&tg, &mm, &mut me).unwrap();
        assert!(lhs.overlaps(&rhs), "{lhs} vs {rhs}");
        assert_eq!(lhs.to_string(), "alpha^(1/2)");
    }

    #[test]
    fn quantifiers_and_sums_are_unsupported() {
        let f = parse_formula("sup x in G: |x|", 2).unwrap();
        assert!(matches!(translate_tilt(&f, 2, 2), Err(Error::Unsupported(_))));
        let f = parse_formula("D(x + y, x)", 2).unwrap();
        assert!(matches!(translate_tilt(&f, 2, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn omega_distance() {
        let par = ModelParams::new(2).unwrap();
        let m = MixedModel { params: par, precision: Exponent::int(3) };
        let x = vec![m.parse_elem("p").unwrap(), m.parse_elem("p^(1/2) + 1").unwrap()];
        let e = dist_to_omega(&x, 2).unwrap();
        assert!(e.lo >= BigRational::new(1.into(), 2.into()), "{e}");
        let r = root_residues(&m.int(1), 5);
        let member = lift_sequence(&r, 3, 3).unwrap();
        let e = dist_to_omega(member.entries(), 2).unwrap();
        assert!(e.contains_zero());
    }
}
