//! Truth values: symbolic norm bounds when possible, rational intervals
//! otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perfring::{Exponent, Norm, NormBounds};

/// Exponents above this are bracketed as `[0, alpha^CAP]`.
const EXP_CAP: u64 = 256;
/// Relative precision, in bits, of brackets for irrational powers.
const ROOT_BITS: u64 = 64;
/// Larger numerators are first rounded to a coarser denominator.
const ROOT_NUM_CAP: u64 = 2048;

/// A certified interval `[lo, hi]` containing a formula's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
    /// The same bounds as powers of `alpha`, when they have that form.
    pub symbolic: Option<NormBounds>,
}

impl Enclosure {
    pub fn exact(q: BigRational) -> Self {
        Enclosure {
            lo: q.clone(),
            hi: q,
            symbolic: None,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.is_zero()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lo <= *q && *q <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi || self.symbolic.is_some_and(|s| s.is_exact())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": rat_str(&self.lo),
            "hi": rat_str(&self.hi),
            "symbolic": self.symbolic.map(|s| json!({"lo": s.lo.to_string(), "hi": s.hi.to_string()})),
        })
    }
}

pub fn rat_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.symbolic {
            Some(s) => write!(f, "{s}"),
            None if self.lo == self.hi => write!(f, "{}", rat_str(&self.lo)),
            None => write!(f, "[{}, {}]", rat_str(&self.lo), rat_str(&self.hi)),
        }
    }
}

/// Intermediate value during evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Val {
    Sym(NormBounds),
    Num(BigRational, BigRational),
}

fn norm_min(a: Norm, b: Norm) -> Norm {
    a.min(b)
}

fn norm_mul(a: Norm, b: Norm) -> Norm {
    match (a, b) {
        (Norm::AlphaPow(x), Norm::AlphaPow(y)) => Norm::AlphaPow(x + y),
        _ => Norm::Zero,
    }
}

fn clamp01(q: BigRational) -> BigRational {
    if q.is_negative() {
        BigRational::zero()
    } else if q > BigRational::one() {
        BigRational::one()
    } else {
        q
    }
}

/// Rational bracket `[lo, hi]` of `alpha^e`.
pub fn alpha_pow_bounds(alpha: &BigRational, e: Exponent) -> (BigRational, BigRational) {
    if e.floor() >= EXP_CAP {
        return (BigRational::zero(), alpha.pow(EXP_CAP as i32));
    }
    if e.num() > ROOT_NUM_CAP {
        // coarsen to a denominator K | den with small numerators
        let d = e.den();
        let p = (2..=d).find(|q| d % q == 0).unwrap_or(1);
        let mut k = d;
        while k > 1 && e.floor() * k + k > ROOT_NUM_CAP {
            k /= p;
        }
        let scaled = e.num() as u128 * k as u128;
        let a = (scaled / d as u128) as u64;
        let b = scaled.div_ceil(d as u128) as u64;
        let lo = alpha_pow_bounds(alpha, Exponent::from_fraction(p as u32, b, k).unwrap()).0;
        let hi = alpha_pow_bounds(alpha, Exponent::from_fraction(p as u32, a, k).unwrap()).1;
        return (lo, hi);
    }
    let a = alpha.pow(e.num() as i32);
    let d = e.den();
    if d == 1 {
        return (a.clone(), a);
    }
    // floor(S * a^{1/d}) = floor((S^d * a)^{1/d}) for S = 2^s
    let deficit = (a.denom().bits().saturating_sub(a.numer().bits())) / d + 1;
    let s = ROOT_BITS + deficit;
    let scale = BigInt::one() << s;
    let big = (a.numer() << (s * d)) / a.denom();
    let r = big.nth_root(d as u32);
    let lo = BigRational::new(r.clone(), scale.clone());
    if r.pow(d as u32) * a.denom() == a.numer() << (s * d) {
        return (lo.clone(), lo);
    }
    (lo, BigRational::new(r + 1, scale))
}

pub fn norm_bounds_rat(alpha: &BigRational, n: Norm) -> (BigRational, BigRational) {
    match n {
        Norm::Zero => (BigRational::zero(), BigRational::zero()),
        Norm::AlphaPow(e) => alpha_pow_bounds(alpha, e),
    }
}

impl Val {
    pub fn zero() -> Val {
        Val::Sym(NormBounds::exact(Norm::Zero))
    }

    pub fn one() -> Val {
        Val::Sym(NormBounds::exact(Norm::one()))
    }

    pub fn rat(q: BigRational) -> Val {
        Val::Num(q.clone(), q)
    }

    pub fn bool(b: bool) -> Val {
        if b {
            Val::one()
        } else {
            Val::zero()
        }
    }

    pub fn interval(&self, alpha: &BigRational) -> (BigRational, BigRational) {
        match self {
            Val::Sym(b) => (norm_bounds_rat(alpha, b.lo).0, norm_bounds_rat(alpha, b.hi).1),
            Val::Num(lo, hi) => (lo.clone(), hi.clone()),
        }
    }

    pub fn enclosure(&self, alpha: &BigRational) -> Enclosure {
        let (lo, hi) = self.interval(alpha);
        Enclosure {
            lo,
            hi,
            symbolic: match self {
                Val::Sym(b) => Some(*b),
                Val::Num(..) => None,
            },
        }
    }

    fn num(lo: BigRational, hi: BigRational) -> Val {
        Val::Num(clamp01(lo), clamp01(hi))
    }

    pub fn max(a: &Val, b: &Val, alpha: &BigRational) -> Val {
        match (a, b) {
            (Val::Sym(x), Val::Sym(y)) => Val::Sym(x.max(*y)),
            _ => {
                let (al, ah) = a.interval(alpha);
                let (bl, bh) = b.interval(alpha);
                Val::num(al.max(bl), ah.max(bh))
            }
        }
    }

    pub fn min(a: &Val, b: &Val, alpha: &BigRational) -> Val {
        match (a, b) {
            (Val::Sym(x), Val::Sym(y)) => Val::Sym(NormBounds {
                lo: norm_min(x.lo, y.lo),
                hi: norm_min(x.hi, y.hi),
            }),
            _ => {
                let (al, ah) = a.interval(alpha);
                let (bl, bh) = b.interval(alpha);
                Val::num(al.min(bl), ah.min(bh))
            }
        }
    }

    pub fn dotminus(a: &Val, b: &Val, alpha: &BigRational) -> Val {
        if let (Val::Sym(x), Val::Sym(y)) = (a, b) {
            if x.hi <= y.lo {
                return Val::zero();
            }
            if y.hi == Norm::Zero {
                return a.clone();
            }
        }
        let (al, ah) = a.interval(alpha);
        let (bl, bh) = b.interval(alpha);
        Val::num(al - bh, ah - bl)
    }

    pub fn scale(q: &BigRational, a: &Val, alpha: &BigRational) -> Val {
        if q.is_one() {
            return a.clone();
        }
        let (lo, hi) = a.interval(alpha);
        Val::num(q * lo, q * hi)
    }

    pub fn mul(a: &Val, b: &Val, alpha: &BigRational) -> Val {
        match (a, b) {
            (Val::Sym(x), Val::Sym(y)) => Val::Sym(NormBounds {
                lo: norm_mul(x.lo, y.lo),
                hi: norm_mul(x.hi, y.hi),
            }),
            _ => {
                let (al, ah) = a.interval(alpha);
                let (bl, bh) = b.interval(alpha);
                Val::num(al * bl, ah * bh)
            }
        }
    }

    pub fn pow(a: &Val, k: u32) -> Val {
        match a {
            Val::Sym(x) => Val::Sym(x.pow(k as u64)),
            Val::Num(lo, hi) => Val::num(lo.pow(k as i32), hi.pow(k as i32)),
        }
    }

    /// Intersection of `[lo - eps, hi + eps]` over the stages of a limit.
    pub fn limit(stages: &[(Val, Val)], alpha: &BigRational) -> Result<Val> {
        let all_sym = stages.iter().all(|(v, e)| {
            matches!(v, Val::Sym(_)) && e.interval(alpha).1.is_zero()
        });
        if all_sym {
            let mut lo = Norm::Zero;
            let mut hi = Norm::one();
            for (v, _) in stages {
                if let Val::Sym(b) = v {
                    lo = lo.max(b.lo);
                    hi = hi.min(b.hi);
                }
            }
            if lo > hi {
                return Err(Error::Contract(format!(
                    "limit stages disagree: lower bound {lo} exceeds upper bound {hi}"
                )));
            }
            return Ok(Val::Sym(NormBounds { lo, hi }));
        }
        let mut lo = BigRational::zero();
        let mut hi = BigRational::one();
        for (v, e) in stages {
            let (vl, vh) = v.interval(alpha);
            let eh = e.interval(alpha).1;
            lo = lo.max(&vl - &eh);
            hi = hi.min(&vh + &eh);
        }
        if lo > hi {
            return Err(Error::Contract(format!(
                "limit stages are not within their declared bounds ({} > {})",
                rat_str(&lo),
                rat_str(&hi)
            )));
        }
        Ok(Val::num(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn alpha_brackets() {
        let half = q(1, 2);
        assert_eq!(alpha_pow_bounds(&half, Exponent::int(3)), (q(1, 8), q(1, 8)));
        let (lo, hi) = alpha_pow_bounds(&half, Exponent::from_fraction(2, 1, 2).unwrap());
        assert!(lo < hi);
        assert!(&lo * &lo <= half && half <= &hi * &hi);
        assert!(&hi - &lo < q(1, 1 << 60));
        // exact root: (1/4)^(1/2)
        let (lo, hi) = alpha_pow_bounds(&q(1, 4), Exponent::from_fraction(2, 1, 2).unwrap());
        assert_eq!((lo, hi), (half.clone(), half));
    }

    #[test]
    fn dotminus_of_equal_symbols_is_zero() {
        let a = Val::Sym(NormBounds::exact(Norm::AlphaPow(Exponent::from_fraction(3, 1, 3).unwrap())));
        assert_eq!(Val::dotminus(&a, &a, &q(1, 3)), Val::zero());
    }
}
