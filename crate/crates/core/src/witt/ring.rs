use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perfring::{Exponent, ModelParams, TiltElem};

/// Which Witt operation a strategy hook is asked to perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WittOp {
    Add,
    Mul,
    Neg,
}

/// A commutative coefficient ring for Witt vectors.
pub trait CoeffRing: Clone + Debug {
    type Elem: Clone + PartialEq + Debug + Display;

    fn p(&self) -> u32;
    fn name(&self) -> String;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut k: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `a^{p^k}`; rings that track precision may return a more precise value.
    fn frobenius_pow(&self, a: &Self::Elem, k: u32) -> Self::Elem {
        self.pow(a, (self.p() as u64).pow(k))
    }

    /// Equality of residue classes at the precision both sides carry.
    fn eq_at_precision(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    /// True when multiplication by `p` is injective, so ghost components
    /// determine a Witt vector.
    fn p_torsion_free(&self) -> bool {
        false
    }

    /// `a / p^k` when it exists; only meaningful for torsion-free rings.
    fn exact_div_p_pow(&self, _a: &Self::Elem, _k: u32) -> Option<Self::Elem> {
        None
    }

    /// The unique `p`-th root, for perfect rings of characteristic `p`.
    fn inv_frobenius(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    fn inverse(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    /// Optional fast path for Witt arithmetic through a torsion-free lift.
    fn lifted_op(&self, _op: WittOp, _a: &[Self::Elem], _b: &[Self::Elem]) -> Option<Result<Vec<Self::Elem>>> {
        None
    }

    fn elem_json(&self, a: &Self::Elem) -> Value {
        Value::String(a.to_string())
    }
}

/// The integers.
#[derive(Clone, Debug)]
pub struct Integers {
    pub p: u32,
}

impl CoeffRing for Integers {
    type Elem = BigInt;

    fn p(&self) -> u32 {
        self.p
    }
    fn name(&self) -> String {
        "Z".into()
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_int(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn pow(&self, a: &BigInt, k: u64) -> BigInt {
        num_traits::pow(a.clone(), k as usize)
    }
    fn p_torsion_free(&self) -> bool {
        true
    }
    fn exact_div_p_pow(&self, a: &BigInt, k: u32) -> Option<BigInt> {
        let d = num_traits::pow(BigInt::from(self.p), k as usize);
        let (q, r) = a.div_rem(&d);
        r.is_zero().then_some(q)
    }
    fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
}

/// The rationals.
#[derive(Clone, Debug)]
pub struct Rationals {
    pub p: u32,
}

impl CoeffRing for Rationals {
    type Elem = BigRational;

    fn p(&self) -> u32 {
        self.p
    }
    fn name(&self) -> String {
        "Q".into()
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_int(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn p_torsion_free(&self) -> bool {
        true
    }
    fn exact_div_p_pow(&self, a: &BigRational, k: u32) -> Option<BigRational> {
        Some(a / BigRational::from_integer(num_traits::pow(BigInt::from(self.p), k as usize)))
    }
    fn inverse(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
}

/// `Z / p^n`, with `p^n` below `2^63`.
#[derive(Clone, Debug)]
pub struct IntegersModPN {
    p: u32,
    n: u32,
    modulus: u64,
}

impl IntegersModPN {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        let modulus = (p as u64)
            .checked_pow(n)
            .filter(|m| *m < (1 << 63))
            .ok_or_else(|| Error::Param(format!("{p}^{n} is too large")))?;
        if n == 0 {
            return Err(Error::Param("modulus exponent must be positive".into()));
        }
        Ok(IntegersModPN { p, n, modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elem(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
}

impl CoeffRing for IntegersModPN {
    type Elem = u64;

    fn p(&self) -> u32 {
        self.p
    }
    fn name(&self) -> String {
        format!("Z/{}^{}", self.p, self.n)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn from_int(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.modulus as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a % self.modulus) % self.modulus
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn inverse(&self, a: &u64) -> Option<u64> {
        let e = BigInt::from(*a).extended_gcd(&BigInt::from(self.modulus));
        e.gcd.is_one().then(|| self.from_int(&e.x))
    }
    fn elem_json(&self, a: &u64) -> Value {
        json!(a)
    }
}

/// The tilt `F_p[[t^{1/p^inf}]] / t^M`; elements carry their own precision,
/// `precision` is used for constants.
#[derive(Clone, Debug)]
pub struct TiltRing {
    pub params: ModelParams,
    pub precision: Exponent,
}

impl TiltRing {
    pub fn new(params: ModelParams, precision: Exponent) -> Self {
        TiltRing { params, precision }
    }
}

impl CoeffRing for TiltRing {
    type Elem = TiltElem;

    fn p(&self) -> u32 {
        self.params.p
    }
    fn name(&self) -> String {
        format!("F_{}[[t^(1/p^inf)]]/t^{}", self.params.p, self.precision)
    }
    fn zero(&self) -> TiltElem {
        TiltElem::zero(self.params, self.precision)
    }
    fn one(&self) -> TiltElem {
        TiltElem::one(self.params, self.precision)
    }
    fn from_int(&self, n: &BigInt) -> TiltElem {
        let r = n.mod_floor(&BigInt::from(self.params.p)).to_i64().unwrap();
        TiltElem::from_int(self.params, self.precision, r)
    }
    fn add(&self, a: &TiltElem, b: &TiltElem) -> TiltElem {
        a + b
    }
    fn sub(&self, a: &TiltElem, b: &TiltElem) -> TiltElem {
        a - b
    }
    fn mul(&self, a: &TiltElem, b: &TiltElem) -> TiltElem {
        a * b
    }
    fn neg(&self, a: &TiltElem) -> TiltElem {
        a.neg()
    }
    fn frobenius_pow(&self, a: &TiltElem, k: u32) -> TiltElem {
        a.frobenius_pow(k)
    }
    fn is_zero(&self, a: &TiltElem) -> bool {
        a.is_zero()
    }
    fn pow(&self, a: &TiltElem, k: u64) -> TiltElem {
        a.pow(k)
    }
    fn inv_frobenius(&self, a: &TiltElem) -> Option<TiltElem> {
        Some(a.inv_frobenius())
    }
    fn inverse(&self, a: &TiltElem) -> Option<TiltElem> {
        a.inverse_unit().ok()
    }
    fn lifted_op(&self, op: WittOp, a: &[TiltElem], b: &[TiltElem]) -> Option<Result<Vec<TiltElem>>> {
        Some(super::lifted::tilt_op(self, op, a, b))
    }
    fn elem_json(&self, a: &TiltElem) -> Value {
        serde_json::to_value(a.to_json()).expect("element json")
    }
}
