use std::fmt;

use rand::Rng;

use super::digits::{self, Digits};
use super::exponent::{ExtVal, Exponent};
use super::mixed::forward_binop;
use super::ModelParams;
use crate::error::{Error, Result};

/// An element of the tilt `F_p[[t^{1/p^inf}]] / t^M`.
///
/// Same digit layout as [`super::MixedElem`], but addition is digit-wise
/// mod `p` with no carries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TiltElem {
    params: ModelParams,
    precision: Exponent,
    digits: Digits,
}

impl TiltElem {
    pub fn zero(params: ModelParams, precision: Exponent) -> Self {
        TiltElem {
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

    pub fn monomial(params: ModelParams, precision: Exponent, d: i64, e: Exponent) -> Self {
        Self::from_terms(params, precision, &[(d, e)])
    }

    /// `t^e` with coefficient 1.
    pub fn t_pow(params: ModelParams, precision: Exponent, e: Exponent) -> Self {
        Self::monomial(params, precision, 1, e)
    }

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
        TiltElem {
            params,
            precision,
            digits: digits::fold_mod(&coef, den, params.p),
        }
    }

    pub fn from_digits(params: ModelParams, precision: Exponent, ds: &[(Exponent, u8)]) -> Self {
        let canonical = ds.windows(2).all(|w| w[0].0 < w[1].0)
            && ds
                .iter()
                .all(|(e, d)| *d > 0 && (*d as u32) < params.p && *e < precision);
        if canonical {
            TiltElem {
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

    pub fn valuation(&self) -> ExtVal {
        match self.digits.first() {
            Some((e, _)) => ExtVal::Finite(*e),
            None => ExtVal::AtLeast(self.precision),
        }
    }

    fn grid(&self, other: &TiltElem, precision: Exponent) -> u64 {
        digits::digits_den(&self.digits)
            .max(digits::digits_den(&other.digits))
            .max(precision.den())
    }

    fn linear(&self, other: &TiltElem, sign: i64) -> TiltElem {
        let precision = self.precision.min(other.precision);
        let den = self.grid(other, precision);
        let len = precision.grid_len(den);
        let mut coef = digits::spread(&self.digits, den, len);
        for (c, o) in coef.iter_mut().zip(digits::spread(&other.digits, den, len)) {
            *c += sign * o;
        }
        TiltElem {
            params: self.params,
            precision,
            digits: digits::fold_mod(&coef, den, self.params.p),
        }
    }

    pub fn checked_add(&self, other: &TiltElem) -> Result<TiltElem> {
        self.params.check_same(&other.params)?;
        Ok(self.linear(other, 1))
    }

    pub fn checked_sub(&self, other: &TiltElem) -> Result<TiltElem> {
        self.params.check_same(&other.params)?;
        Ok(self.linear(other, -1))
    }

    pub fn neg(&self) -> TiltElem {
        let p = self.params.p as u8;
        TiltElem {
            params: self.params,
            precision: self.precision,
            digits: self.digits.iter().map(|(e, d)| (*e, p - d)).collect(),
        }
    }

    pub fn checked_mul(&self, other: &TiltElem) -> Result<TiltElem> {
        self.params.check_same(&other.params)?;
        let precision = self.precision.min(other.precision);
        let den = self.grid(other, precision);
        let len = precision.grid_len(den);
        let coef = digits::convolve(&self.digits, &other.digits, den, len);
        Ok(TiltElem {
            params: self.params,
            precision,
            digits: digits::fold_mod(&coef, den, self.params.p),
        })
    }

    /// `self^k` at the precision of `self`. Powers of `p` go through Frobenius.
    pub fn pow(&self, mut k: u64) -> TiltElem {
        let p = self.params.p as u64;
        let mut base = self.clone();
        while k > 0 && k % p == 0 {
            base = base.frobenius().truncate(self.precision);
            k /= p;
        }
        let mut acc = TiltElem::one(self.params, self.precision);
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

    pub fn truncate(&self, precision: Exponent) -> TiltElem {
        let precision = precision.min(self.precision);
        TiltElem {
            params: self.params,
            precision,
            digits: digits::truncate(&self.digits, precision),
        }
    }

    /// Same stored representative at another precision (zero lift upward).
    pub fn with_precision(&self, precision: Exponent) -> TiltElem {
        TiltElem {
            params: self.params,
            precision,
            digits: digits::truncate(&self.digits, precision),
        }
    }

    /// `y -> y^p`: exponents and precision scale by `p`.
    pub fn frobenius(&self) -> TiltElem {
        let p = self.params.p as u64;
        TiltElem {
            params: self.params,
            precision: self.precision.mul_int(p),
            digits: self.digits.iter().map(|(e, d)| (e.mul_int(p), *d)).collect(),
        }
    }

    /// The unique `p`-th root: exponents and precision scale by `1/p`.
    pub fn inv_frobenius(&self) -> TiltElem {
        let p = self.params.p as u64;
        TiltElem {
            params: self.params,
            precision: self.precision.div_int(p),
            digits: self.digits.iter().map(|(e, d)| (e.div_int(p), *d)).collect(),
        }
    }

    /// `inv_frobenius` applied `k` times.
    pub fn inv_frobenius_pow(&self, k: u32) -> TiltElem {
        let q = (self.params.p as u64).pow(k);
        TiltElem {
            params: self.params,
            precision: self.precision.div_int(q),
            digits: self.digits.iter().map(|(e, d)| (e.div_int(q), *d)).collect(),
        }
    }

    pub fn frobenius_pow(&self, k: u32) -> TiltElem {
        let q = (self.params.p as u64).pow(k);
        TiltElem {
            params: self.params,
            precision: self.precision.mul_int(q),
            digits: self.digits.iter().map(|(e, d)| (e.mul_int(q), *d)).collect(),
        }
    }

    /// Division by `t^k`, defined when `v(self) >= k`.
    pub fn shift_down(&self, k: Exponent) -> Result<TiltElem> {
        let precision = self
            .precision
            .checked_sub(k)
            .ok_or_else(|| Error::precision("division by a power of t", k, self.precision))?;
        let mut ds = Vec::with_capacity(self.digits.len());
        for (e, d) in &self.digits {
            let e = e
                .checked_sub(k)
                .ok_or_else(|| Error::Contract(format!("{self} is not divisible by t^{k}")))?;
            ds.push((e, *d));
        }
        Ok(TiltElem {
            params: self.params,
            precision,
            digits: ds,
        })
    }

    pub fn shift_up(&self, k: Exponent) -> TiltElem {
        TiltElem {
            params: self.params,
            precision: self.precision + k,
            digits: self.digits.iter().map(|(e, d)| (*e + k, *d)).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.digits.first(), Some((e, _)) if e.is_zero())
    }

    /// Inverse of a unit by Newton iteration.
    pub fn inverse_unit(&self) -> Result<TiltElem> {
        let d0 = match self.digits.first() {
            Some((e, d)) if e.is_zero() => *d as i64,
            _ => return Err(Error::Contract(format!("{self} is not a unit"))),
        };
        let p = self.params.p as i64;
        let inv0 = (1..p).find(|c| (c * d0) % p == 1).expect("digit invertible mod p");
        let one = TiltElem::one(self.params, self.precision);
        let two = TiltElem::from_int(self.params, self.precision, 2);
        let mut x = TiltElem::from_int(self.params, self.precision, inv0);
        for _ in 0..128 {
            let ux = self * &x;
            if (&one - &ux).is_zero() {
                return Ok(x);
            }
            x = &x * &(&two - &ux);
        }
        Err(Error::Internal("Newton inversion did not converge".into()))
    }

    /// Exact quotient `self / divisor`, requiring `v(self) >= v(divisor)`.
    ///
    /// The result is known modulo `t^{M - v(divisor)}`.
    pub fn div_exact(&self, divisor: &TiltElem) -> Result<TiltElem> {
        self.params.check_same(&divisor.params)?;
        let vb = divisor.valuation().finite().ok_or_else(|| {
            Error::Contract(format!("division by {divisor}, which is zero at precision"))
        })?;
        if let ExtVal::Finite(va) = self.valuation() {
            if va < vb {
                return Err(Error::Contract(format!("{divisor} does not divide {self}")));
            }
        }
        let a = if self.is_zero() {
            TiltElem::zero(self.params, self.precision.saturating_sub(vb))
        } else {
            self.shift_down(vb)?
        };
        let b = divisor.shift_down(vb)?;
        Ok(&a * &b.inverse_unit()?)
    }

    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        params: ModelParams,
        precision: Exponent,
        den_log: u32,
        density: f64,
    ) -> TiltElem {
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
        TiltElem {
            params,
            precision,
            digits: ds,
        }
    }
}

forward_binop!(TiltElem, Add, add, checked_add);
forward_binop!(TiltElem, Sub, sub, checked_sub);
forward_binop!(TiltElem, Mul, mul, checked_mul);

impl fmt::Display for TiltElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&digits::format_terms(&self.digits, 't'))
    }
}

impl fmt::Debug for TiltElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod t^{}, p={})", self, self.precision, self.params.p)
    }
}
