//! Structures in which formulas are evaluated.
//!
//! `MixedModel` and `TiltModel` are the metric valuation rings of the
//! standard perfectoid field and its tilt, known modulo `p^N` and `t^M`.
//! `DiscreteModel` is `O/p` as a discrete structure: `dist` is `0` on equal
//! elements and `1` otherwise, and `D(x,y)` is `0` exactly when `x` divides `y`.

use std::fmt;

use super::value::Val;
use crate::error::{Error, Result};
use crate::perfring::{d_from_valuations, norm_of, ExtVal, Exponent, MixedElem, ModelParams, TiltElem};

pub trait Model {
    type Elem: Clone + fmt::Display + PartialEq;

    fn params(&self) -> ModelParams;
    fn name(&self) -> &'static str;
    fn precision(&self) -> Exponent;
    /// `Some(p)` for the models of characteristic `p`.
    fn characteristic(&self) -> Option<u32>;
    fn int(&self, k: i64) -> Self::Elem;
    /// `p^e` for non-integer `e`.
    fn p_pow(&self, e: Exponent) -> Self::Elem;
    /// `e`-th power of the uniformizer.
    fn unif(&self, e: Exponent) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn dist(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Val>;
    fn d(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Val>;
    /// Candidate `p`-th roots of `a`.
    fn roots(&self, a: &Self::Elem) -> Vec<Self::Elem>;
    /// Candidate `z` with `x z = y`.
    fn divisors(&self, y: &Self::Elem, x: &Self::Elem) -> Result<Vec<Self::Elem>>;
    fn parse_elem(&self, text: &str) -> Result<Self::Elem>;
    fn from_digits(&self, ds: &[(Exponent, u8)]) -> Self::Elem;
    /// The precision at which grid elements live.
    fn grid_precision(&self) -> Exponent {
        self.precision()
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, k: u32) -> Result<Self::Elem> {
        let mut acc = self.int(1);
        for _ in 0..k {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// Every element whose exponents have denominator dividing `p^den_log`.
    fn grid(&self, den_log: u32, budget: u128) -> Result<Vec<Self::Elem>> {
        let p = self.params().p;
        let den = (p as u64).pow(den_log);
        let len = self.grid_precision().grid_len(den);
        let count = (p as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if count > budget {
            return Err(Error::Budget {
                what: format!("{} grid with denominator {den}", self.name()),
                needed: count,
                budget,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut digits = vec![0u8; len];
        loop {
            let ds: Vec<(Exponent, u8)> = digits
                .iter()
                .enumerate()
                .filter(|(_, d)| **d != 0)
                .map(|(j, d)| (Exponent::from_grid(j, den), *d))
                .collect();
            out.push(self.from_digits(&ds));
            // odometer, last position fastest
            let mut i = len;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                digits[i] += 1;
                if (digits[i] as u32) < p {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

fn zero_lift_root(a: &MixedElem) -> MixedElem {
    a.pth_root_mod_p().with_precision(a.precision())
}

#[derive(Clone, Copy, Debug)]
pub struct MixedModel {
    pub params: ModelParams,
    pub precision: Exponent,
}

impl Model for MixedModel {
    type Elem = MixedElem;

    fn params(&self) -> ModelParams {
        self.params
    }

    fn name(&self) -> &'static str {
        "mixed"
    }

    fn characteristic(&self) -> Option<u32> {
        None
    }

    fn precision(&self) -> Exponent {
        self.precision
    }

    fn int(&self, k: i64) -> MixedElem {
        MixedElem::from_int(self.params, self.precision, k)
    }

    fn p_pow(&self, e: Exponent) -> MixedElem {
        MixedElem::monomial(self.params, self.precision, 1, e)
    }

    fn unif(&self, e: Exponent) -> MixedElem {
        self.p_pow(e)
    }

    fn add(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_add(b)
    }

    fn mul(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_mul(b)
    }

    fn neg(&self, a: &MixedElem) -> MixedElem {
        a.neg()
    }

    fn sub(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_sub(b)
    }

    fn pow(&self, a: &MixedElem, k: u32) -> Result<MixedElem> {
        Ok(a.pow(k as u64))
    }

    fn dist(&self, a: &MixedElem, b: &MixedElem) -> Result<Val> {
        Ok(Val::Sym(norm_of(a.checked_sub(b)?.valuation())))
    }

    fn d(&self, a: &MixedElem, b: &MixedElem) -> Result<Val> {
        self.params.check_same(&b.params())?;
        Ok(Val::Sym(d_from_valuations(a.valuation(), b.valuation())))
    }

    fn roots(&self, a: &MixedElem) -> Vec<MixedElem> {
        vec![zero_lift_root(a)]
    }

    fn divisors(&self, y: &MixedElem, x: &MixedElem) -> Result<Vec<MixedElem>> {
        Ok(y.div_lift(x)?.into_iter().collect())
    }

    fn parse_elem(&self, text: &str) -> Result<MixedElem> {
        MixedElem::parse(self.params, self.precision, text)
    }

    fn from_digits(&self, ds: &[(Exponent, u8)]) -> MixedElem {
        MixedElem::from_digits(self.params, self.precision, ds)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TiltModel {
    pub params: ModelParams,
    pub precision: Exponent,
}

impl Model for TiltModel {
    type Elem = TiltElem;

    fn params(&self) -> ModelParams {
        self.params
    }

    fn name(&self) -> &'static str {
        "tilt"
    }

    fn characteristic(&self) -> Option<u32> {
        Some(self.params.p)
    }

    fn precision(&self) -> Exponent {
        self.precision
    }

    fn int(&self, k: i64) -> TiltElem {
        TiltElem::from_int(self.params, self.precision, k)
    }

    fn p_pow(&self, _e: Exponent) -> TiltElem {
        TiltElem::zero(self.params, self.precision)
    }

    fn unif(&self, e: Exponent) -> TiltElem {
        TiltElem::t_pow(self.params, self.precision, e)
    }

    fn add(&self, a: &TiltElem, b: &TiltElem) -> Result<TiltElem> {
        a.checked_add(b)
    }

    fn mul(&self, a: &TiltElem, b: &TiltElem) -> Result<TiltElem> {
        a.checked_mul(b)
    }

    fn neg(&self, a: &TiltElem) -> TiltElem {
        a.neg()
    }

    fn sub(&self, a: &TiltElem, b: &TiltElem) -> Result<TiltElem> {
        a.checked_sub(b)
    }

    fn pow(&self, a: &TiltElem, k: u32) -> Result<TiltElem> {
        Ok(a.pow(k as u64))
    }

    fn dist(&self, a: &TiltElem, b: &TiltElem) -> Result<Val> {
        Ok(Val::Sym(norm_of(a.checked_sub(b)?.valuation())))
    }

    fn d(&self, a: &TiltElem, b: &TiltElem) -> Result<Val> {
        self.params.check_same(&b.params())?;
        Ok(Val::Sym(d_from_valuations(a.valuation(), b.valuation())))
    }

    fn roots(&self, a: &TiltElem) -> Vec<TiltElem> {
        vec![a.inv_frobenius()]
    }

    fn divisors(&self, y: &TiltElem, x: &TiltElem) -> Result<Vec<TiltElem>> {
        self.params.check_same(&y.params())?;
        if x.valuation().finite().is_none() {
            return Ok(if y.is_zero() { vec![self.int(0)] } else { Vec::new() });
        }
        Ok(y.div_exact(x).ok().into_iter().collect())
    }

    fn parse_elem(&self, text: &str) -> Result<TiltElem> {
        TiltElem::parse(self.params, self.precision, text)
    }

    fn from_digits(&self, ds: &[(Exponent, u8)]) -> TiltElem {
        TiltElem::from_digits(self.params, self.precision, ds)
    }
}

/// `O/p` as a discrete ring with the divisibility predicate. Its standard
/// finite truncation is `O_k/p` with `O_k = Z_p[p^{1/p^k}]`, the grid with
/// denominator `p^k`.
#[derive(Clone, Copy, Debug)]
pub struct DiscreteModel {
    pub params: ModelParams,
    pub k: u32,
}

impl DiscreteModel {
    fn divides(a: &MixedElem, b: &MixedElem) -> bool {
        match (a.valuation(), b.valuation()) {
            (_, ExtVal::AtLeast(_)) | (_, ExtVal::Infinity) => true,
            (ExtVal::Finite(va), ExtVal::Finite(vb)) => va <= vb,
            _ => false,
        }
    }

    /// All of `O_k/p`.
    pub fn truncation(&self) -> Result<Vec<MixedElem>> {
        self.grid(self.k, u128::MAX)
    }
}

impl Model for DiscreteModel {
    type Elem = MixedElem;

    fn params(&self) -> ModelParams {
        self.params
    }

    fn name(&self) -> &'static str {
        "discrete"
    }

    fn characteristic(&self) -> Option<u32> {
        Some(self.params.p)
    }

    fn precision(&self) -> Exponent {
        Exponent::ONE
    }

    fn int(&self, k: i64) -> MixedElem {
        MixedElem::from_int(self.params, Exponent::ONE, k)
    }

    fn p_pow(&self, e: Exponent) -> MixedElem {
        MixedElem::monomial(self.params, Exponent::ONE, 1, e)
    }

    fn unif(&self, e: Exponent) -> MixedElem {
        self.p_pow(e)
    }

    fn add(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_add(b)
    }

    fn mul(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_mul(b)
    }

    fn neg(&self, a: &MixedElem) -> MixedElem {
        a.neg()
    }

    fn sub(&self, a: &MixedElem, b: &MixedElem) -> Result<MixedElem> {
        a.checked_sub(b)
    }

    fn pow(&self, a: &MixedElem, k: u32) -> Result<MixedElem> {
        Ok(a.pow(k as u64))
    }

    fn dist(&self, a: &MixedElem, b: &MixedElem) -> Result<Val> {
        Ok(Val::bool(!a.checked_sub(b)?.is_zero()))
    }

    fn d(&self, a: &MixedElem, b: &MixedElem) -> Result<Val> {
        self.params.check_same(&b.params())?;
        Ok(Val::bool(!Self::divides(&a.residue(), &b.residue())))
    }

    fn roots(&self, a: &MixedElem) -> Vec<MixedElem> {
        vec![a.pth_root_mod_p()]
    }

    fn divisors(&self, y: &MixedElem, x: &MixedElem) -> Result<Vec<MixedElem>> {
        Ok(y.residue().div_lift(&x.residue())?.into_iter().collect())
    }

    fn parse_elem(&self, text: &str) -> Result<MixedElem> {
        MixedElem::parse(self.params, Exponent::ONE, text)
    }

    fn from_digits(&self, ds: &[(Exponent, u8)]) -> MixedElem {
        MixedElem::from_digits(self.params, Exponent::ONE, ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let par = ModelParams::new(3).unwrap();
        let d = DiscreteModel { params: par, k: 1 };
        assert_eq!(d.truncation().unwrap().len(), 27);
        let m = MixedModel {
            params: ModelParams::new(2).unwrap(),
            precision: Exponent::int(2),
        };
        let g = m.grid(1, 1000).unwrap();
        assert_eq!(g.len(), 16);
        assert!(matches!(m.grid(3, 100), Err(Error::Budget { .. })));
    }

    #[test]
    fn discrete_predicates() {
        let par = ModelParams::new(3).unwrap();
        let d = DiscreteModel { params: par, k: 1 };
        let w = d.unif(Exponent::from_fraction(3, 1, 3).unwrap());
        let one = d.int(1);
        assert_eq!(d.d(&w, &one).unwrap(), Val::one());
        assert_eq!(d.d(&one, &w).unwrap(), Val::zero());
        assert_eq!(d.dist(&d.pow(&w, 3).unwrap(), &d.int(0)).unwrap(), Val::zero());
        assert_eq!(d.int(3), d.int(0));
    }
}
