use std::fmt;

use rand::Rng;

use super::digits::{self, Digits};
use super::exponent::{ExtVal, Exponent};
use super::ModelParams;
use crate::error::{Error, Result};

/// An element of `O/p^N` in the standard mixed-characteristic model.
///
/// Stored as `sum d_e p^e` with `d_e in 1..p` and exponents in `Z[1/p]`
/// below the precision `N`. The precision is usually an integer; fractional
/// precisions (the ideal `p^N` for `N` in `Z[1/p]`) are accepted as well.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MixedElem {
    params: ModelParams,
    precision: Exponent,
    digits: Digits,
}

impl MixedElem {
    pub fn zero(params: ModelParams, precision: Exponent) -> Self {
        MixedElem {
            params,
            precision,
            digits: Vec::new(),
        }
    }

    pub fn one(params: ModelParams, precision: Exponent) -> Self {
        Self::from_int(params, precision, 1)
    }

    pub fn from_int(params: ModelParams, precision: Exponent, n: i64) -> Self {
        Self::from_terms(params, precision, &[(n, Exponent::ZERO)])
    }

    /// `d * p^e`, normalized.
    pub fn monomial(params: ModelParams, precision: Exponent, d: i64, e: Exponent) -> Self {
        Self::from_terms(params, precision, &[(d, e)])
    }

    /// Normalizes an arbitrary integer combination `sum c_i p^{e_i}`.
    pub fn from_terms(params: ModelParams, precision: Exponent, terms: &[(i64, Exponent)]) -> Self {
        let den = digits::grid_den(terms.iter().map(|(_, e)| e).chain([&precision]));
        let len = precision.grid_len(den);
        let mut coef = vec![0i64; len];
        for (c, e) in terms {
            let j = e.grid_index(den);
            if j < len {
                coef[j] += c;
            }
        }
        MixedElem {
            params,
            precision,
            digits: digits::fold_carry(coef, den, params.p),
        }
    }

    /// Builds from a digit list, normalizing anything non-canonical.
    pub fn from_digits(params: ModelParams, precision: Exponent, ds: &[(Exponent, u8)]) -> Self {
        let canonical = ds.windows(2).all(|w| w[0].0 < w[1].0)
            && ds
                .iter()
                .all(|(e, d)| *d > 0 && (*d as u32) < params.p && *e < precision);
        if canonical {
            MixedElem {
                params,
                precision,
                digits: ds.to_vec(),
            }
        } else {
            let terms: Vec<(i64, Exponent)> = ds.iter().map(|(e, d)| (*d as i64, *e)).collect();
            Self::from_terms(params, precision, &terms)
        }
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn precision(&self) -> Exponent {
        self.precision
    }

    pub fn digits(&self) -> &[(Exponent, u8)] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Finite least exponent, or `AtLeast(N)` when the element vanishes mod `p^N`.
    pub fn valuation(&self) -> ExtVal {
        match self.digits.first() {
            Some((e, _)) => ExtVal::Finite(*e),
            None => ExtVal::AtLeast(self.precision),
        }
    }

    /// Certain lower bound on the valuation.
    pub(crate) fn val_floor(&self) -> Exponent {
        self.valuation().lower_bound().unwrap_or(self.precision)
    }

    fn grid(&self, other: &MixedElem, precision: Exponent) -> u64 {
        digits::digits_den(&self.digits)
            .max(digits::digits_den(&other.digits))
            .max(precision.den())
    }

    pub fn checked_add(&self, other: &MixedElem) -> Result<MixedElem> {
        self.params.check_same(&other.params)?;
        Ok(self.linear(other, 1))
    }

    pub fn checked_sub(&self, other: &MixedElem) -> Result<MixedElem> {
        self.params.check_same(&other.params)?;
        Ok(self.linear(other, -1))
    }

    fn linear(&self, other: &MixedElem, sign: i64) -> MixedElem {
        let precision = self.precision.min(other.precision);
        let den = self.grid(other, precision);
        let len = precision.grid_len(den);
        let mut coef = digits::spread(&self.digits, den, len);
        for (c, o) in coef.iter_mut().zip(digits::spread(&other.digits, den, len)) {
            *c += sign * o;
        }
        MixedElem {
            params: self.params,
            precision,
            digits: digits::fold_carry(coef, den, self.params.p),
        }
    }

    pub fn neg(&self) -> MixedElem {
        MixedElem::zero(self.params, self.precision).linear(self, -1)
    }

    /// Product; the result precision is the smaller input precision.
    pub fn checked_mul(&self, other: &MixedElem) -> Result<MixedElem> {
        self.params.check_same(&other.params)?;
        let precision = self.precision.min(other.precision);
        let den = self.grid(other, precision);
        let len = precision.grid_len(den);
        let coef = digits::convolve(&self.digits, &other.digits, den, len);
        Ok(MixedElem {
            params: self.params,
            precision,
            digits: digits::fold_carry(coef, den, self.params.p),
        })
    }

    pub fn pow(&self, mut k: u64) -> MixedElem {
        let mut base = self.clone();
        let mut acc = MixedElem::one(self.params, self.precision);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Reduction to a smaller precision (a no-op if `precision` is larger).
    pub fn truncate(&self, precision: Exponent) -> MixedElem {
        let precision = precision.min(self.precision);
        MixedElem {
            params: self.params,
            precision,
            digits: digits::truncate(&self.digits, precision),
        }
    }

    /// Reinterprets the stored representative at another precision: digits
    /// beyond a smaller precision are dropped, a larger precision treats the
    /// representative as exact (the zero lift).
    pub fn with_precision(&self, precision: Exponent) -> MixedElem {
        MixedElem {
            params: self.params,
            precision,
            digits: digits::truncate(&self.digits, precision),
        }
    }

    /// The image in `O/p`.
    pub fn residue(&self) -> MixedElem {
        self.truncate(Exponent::ONE)
    }

    /// Exact division by `p^k`, defined when `v(self) >= k`.
    pub fn shift_down(&self, k: Exponent) -> Result<MixedElem> {
        let precision = self.precision.checked_sub(k).ok_or_else(|| {
            Error::precision("division by a power of p", k, self.precision)
        })?;
        let mut ds = Vec::with_capacity(self.digits.len());
        for (e, d) in &self.digits {
            let e = e
                .checked_sub(k)
                .ok_or_else(|| Error::Contract(format!("{self} is not divisible by p^{k}")))?;
            ds.push((e, *d));
        }
        Ok(MixedElem {
            params: self.params,
            precision,
            digits: ds,
        })
    }

    /// Multiplication by the exact monomial `p^k`; precision grows by `k`.
    pub fn shift_up(&self, k: Exponent) -> MixedElem {
        MixedElem {
            params: self.params,
            precision: self.precision + k,
            digits: self.digits.iter().map(|(e, d)| (*e + k, *d)).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.digits.first(), Some((e, _)) if e.is_zero())
    }

    /// Inverse of a unit by Newton iteration `x <- x (2 - u x)`.
    pub fn inverse_unit(&self) -> Result<MixedElem> {
        let d0 = match self.digits.first() {
            Some((e, d)) if e.is_zero() => *d as i64,
            _ => return Err(Error::Contract(format!("{self} is not a unit"))),
        };
        let p = self.params.p as i64;
        let inv0 = (1..p).find(|c| (c * d0) % p == 1).expect("digit invertible mod p");
        let one = MixedElem::one(self.params, self.precision);
        let two = MixedElem::from_int(self.params, self.precision, 2);
        let mut x = MixedElem::from_int(self.params, self.precision, inv0);
        for _ in 0..128 {
            let ux = self * &x;
            if (&one - &ux).is_zero() {
                return Ok(x);
            }
            x = &x * &(&two - &ux);
        }
        Err(Error::Internal("Newton inversion did not converge".into()))
    }

    /// Some `z` with `divisor * z == self` at this precision, when one exists.
    ///
    /// `z` is only determined modulo `p^{N - v(divisor)}`; the representative
    /// returned is the zero lift, carried at the precision of `self`.
    pub fn div_lift(&self, divisor: &MixedElem) -> Result<Option<MixedElem>> {
        self.params.check_same(&divisor.params)?;
        let vb = match divisor.valuation() {
            ExtVal::Finite(v) => v,
            _ => return Ok(self.is_zero().then(|| MixedElem::zero(self.params, self.precision))),
        };
        if self.is_zero() {
            return Ok(Some(MixedElem::zero(self.params, self.precision)));
        }
        if self.val_floor() < vb {
            return Ok(None);
        }
        let a = self.shift_down(vb)?;
        let b = divisor.shift_down(vb)?;
        let z = &a * &b.inverse_unit()?;
        Ok(Some(z.with_precision(self.precision)))
    }

    /// A `y` with `y^p = self mod p`, obtained by remapping the digits below
    /// `1` from exponent `e` to `e/p`. The result carries precision `1`.
    pub fn pth_root_mod_p(&self) -> MixedElem {
        let p = self.params.p as u64;
        let ds = self
            .digits
            .iter()
            .take_while(|(e, _)| *e < Exponent::ONE)
            .map(|(e, d)| (e.div_int(p), *d))
            .collect();
        MixedElem {
            params: self.params,
            precision: Exponent::ONE,
            digits: ds,
        }
    }

    /// A random element with exponent denominators dividing `p^den_log`,
    /// each grid digit nonzero with probability `density`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        params: ModelParams,
        precision: Exponent,
        den_log: u32,
        density: f64,
    ) -> MixedElem {
        let den = (params.p as u64).pow(den_log).max(precision.den());
        let len = precision.grid_len(den);
        let ds = (0..len)
            .filter_map(|j| {
                if rng.gen_bool(density) {
                    Some((Exponent::from_grid(j, den), rng.gen_range(1..params.p) as u8))
                } else {
                    None
                }
            })
            .collect();
        MixedElem {
            params,
            precision,
            digits: ds,
        }
    }
}

macro_rules! forward_binop {
    ($ty:ty, $tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&$ty> for &$ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                self.$checked(rhs).expect("operands over different primes")
            }
        }
    };
}
pub(crate) use forward_binop;

forward_binop!(MixedElem, Add, add, checked_add);
forward_binop!(MixedElem, Sub, sub, checked_sub);
forward_binop!(MixedElem, Mul, mul, checked_mul);

impl fmt::Display for MixedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&digits::format_terms(&self.digits, 'p'))
    }
}

impl fmt::Debug for MixedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod p^{}, p={})", self, self.precision, self.params.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: u32, n: u64, k: u32) -> Exponent {
        Exponent::new(p, n, k).unwrap()
    }

    #[test]
    fn add_carries_across_fractional_exponents() {
        let m = ModelParams::new(2).unwrap();
        let a = MixedElem::from_terms(m, Exponent::int(2), &[(1, Exponent::ZERO), (1, e(2, 1, 1))]);
        let s = &a + &a;
        let want = MixedElem::from_digits(m, Exponent::int(2), &[(Exponent::ONE, 1), (e(2, 3, 1), 1)]);
        assert_eq!(s, want);
        assert_eq!(s.to_string(), "p + p^(3/2)");
        assert_eq!(&a + &MixedElem::zero(m, Exponent::int(2)), a);
    }

    #[test]
    fn square_of_one_plus_root() {
        // (1 + X)^2 = 1 + 2X + X^2 with X^2 = p, X = p^{1/2}, p = 2, mod p^3
        let m = ModelParams::new(2).unwrap();
        let n = Exponent::int(3);
        let a = MixedElem::from_terms(m, n, &[(1, Exponent::ZERO), (1, e(2, 1, 1))]);
        let sq = &a * &a;
        let want = MixedElem::from_digits(
            m,
            n,
            &[(Exponent::ZERO, 1), (Exponent::ONE, 1), (e(2, 3, 1), 1)],
        );
        assert_eq!(sq, want);
    }

    #[test]
    fn monomials_multiply_by_exponent_addition() {
        let m = ModelParams::new(2).unwrap();
        let r = MixedElem::monomial(m, Exponent::int(3), 1, e(2, 1, 1));
        assert_eq!(&r * &r, MixedElem::monomial(m, Exponent::int(3), 1, Exponent::ONE));
        let one = MixedElem::one(m, Exponent::int(3));
        assert_eq!(&r * &one, r);
    }

    #[test]
    fn valuation_and_truncation() {
        let m = ModelParams::new(2).unwrap();
        let a = MixedElem::from_terms(m, Exponent::int(4), &[(1, Exponent::ONE), (1, e(2, 3, 1))]);
        assert_eq!(a.valuation(), ExtVal::Finite(Exponent::ONE));
        let z = MixedElem::zero(m, Exponent::int(4));
        assert_eq!(z.valuation(), ExtVal::AtLeast(Exponent::int(4)));
    }

    #[test]
    fn negation_and_minus_one() {
        let m = ModelParams::new(3).unwrap();
        let n = Exponent::int(2);
        let a = MixedElem::from_terms(m, n, &[(1, e(3, 1, 1)), (2, Exponent::ONE)]);
        assert!((&a + &a.neg()).is_zero());
        // -1 = 2 + 2p mod p^2
        let minus_one = MixedElem::from_int(m, n, -1);
        assert_eq!(minus_one.to_string(), "2 + 2*p");
    }

    #[test]
    fn pth_root_examples() {
        let m = ModelParams::new(2).unwrap();
        let n = Exponent::int(2);
        let a = MixedElem::monomial(m, n, 1, e(2, 1, 1));
        let r = a.pth_root_mod_p();
        assert_eq!(r.to_string(), "p^(1/4)");
        assert_eq!(r.pow(2), a.truncate(Exponent::ONE));
        let b = MixedElem::from_terms(m, n, &[(1, Exponent::ZERO), (1, e(2, 1, 1))]);
        let rb = b.pth_root_mod_p();
        assert_eq!(rb.to_string(), "1 + p^(1/4)");
        assert_eq!(rb.pow(2).residue(), b.residue());
        assert_eq!(MixedElem::one(m, n).pth_root_mod_p().to_string(), "1");
    }

    #[test]
    fn division_and_inverse() {
        let m = ModelParams::new(3).unwrap();
        let n = Exponent::int(3);
        let u = MixedElem::from_terms(m, n, &[(2, Exponent::ZERO), (1, e(3, 1, 1)), (1, Exponent::ONE)]);
        let inv = u.inverse_unit().unwrap();
        assert_eq!(&u * &inv, MixedElem::one(m, n));
        let b = MixedElem::monomial(m, n, 1, e(3, 2, 1));
        let a = &b * &u;
        let z = a.div_lift(&b).unwrap().unwrap();
        assert_eq!(&b * &z, a);
        assert!(b.div_lift(&a.shift_up(Exponent::ONE).truncate(n)).unwrap().is_none());
    }

    #[test]
    fn shifts() {
        let m = ModelParams::new(2).unwrap();
        let a = MixedElem::monomial(m, Exponent::int(3), 1, e(2, 3, 1));
        let d = a.shift_down(Exponent::ONE).unwrap();
        assert_eq!(d.precision(), Exponent::int(2));
        assert_eq!(d.to_string(), "p^(1/2)");
        assert!(d.shift_down(Exponent::ONE).is_err());
        assert_eq!(d.shift_up(Exponent::ONE), a);
    }
}
