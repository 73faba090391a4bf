use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A nonnegative rational number whose reduced denominator is a power of `p`.
///
/// Exponents index the digits of elements of the standard model and hold
/// the values of its valuations. The prime is not stored: all exponents that
/// meet in one computation share it, so the lcm of two denominators is
/// simply the larger one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Exponent {
    num: u64,
    den: u64,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent { num: 0, den: 1 };
    pub const ONE: Exponent = Exponent { num: 1, den: 1 };

    pub const fn int(n: u64) -> Self {
        Exponent { num: n, den: 1 }
    }

    /// `num / p^den_log`, reduced.
    pub fn new(p: u32, num: u64, den_log: u32) -> Result<Self> {
        let den = (p as u64)
            .checked_pow(den_log)
            .ok_or_else(|| Error::Param(format!("exponent denominator {p}^{den_log} overflows")))?;
        Ok(Self::reduced(num, den))
    }

    /// Builds from a raw fraction; `den` must be a power of the working prime.
    pub fn from_fraction(p: u32, num: u64, den: u64) -> Result<Self> {
        if den == 0 || !is_power_of(den, p as u64) {
            return Err(Error::Param(format!(
                "denominator {den} is not a power of {p}"
            )));
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: u64, den: u64) -> Self {
        if num == 0 {
            return Exponent::ZERO;
        }
        let g = num.gcd(&den);
        Exponent {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// The `k` with `den = p^k`.
    pub fn den_log(&self, p: u32) -> u32 {
        let mut d = self.den;
        let mut k = 0;
        while d > 1 {
            d /= p as u64;
            k += 1;
        }
        k
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn floor(&self) -> u64 {
        self.num / self.den
    }

    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    /// Fractional part, in `[0, 1)`.
    pub fn fract(&self) -> Exponent {
        Exponent::reduced(self.num % self.den, self.den)
    }

    pub fn checked_add(self, other: Exponent) -> Option<Exponent> {
        let den = self.den.max(other.den);
        let a = self.num.checked_mul(den / self.den)?;
        let b = other.num.checked_mul(den / other.den)?;
        Some(Exponent::reduced(a.checked_add(b)?, den))
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(self, other: Exponent) -> Option<Exponent> {
        let den = self.den.max(other.den);
        let a = self.num * (den / self.den);
        let b = other.num * (den / other.den);
        a.checked_sub(b).map(|d| Exponent::reduced(d, den))
    }

    pub fn saturating_sub(self, other: Exponent) -> Exponent {
        self.checked_sub(other).unwrap_or(Exponent::ZERO)
    }

    pub fn mul_int(self, k: u64) -> Exponent {
        Exponent::reduced(self.num * k, self.den)
    }

    pub fn div_int(self, k: u64) -> Exponent {
        Exponent::reduced(self.num, self.den * k)
    }

    /// Position of this exponent on the grid of step `1/grid_den`.
    ///
    /// Panics if `grid_den` is not a multiple of the denominator.
    pub fn grid_index(&self, grid_den: u64) -> usize {
        debug_assert_eq!(grid_den % self.den, 0);
        (self.num * (grid_den / self.den)) as usize
    }

    /// Number of grid points of step `1/grid_den` strictly below `self`.
    pub fn grid_len(&self, grid_den: u64) -> usize {
        // ceil(num * grid_den / den)
        ((self.num as u128 * grid_den as u128).div_ceil(self.den as u128)) as usize
    }

    pub fn from_grid(index: usize, grid_den: u64) -> Exponent {
        Exponent::reduced(index as u64, grid_den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

pub(crate) fn is_power_of(mut n: u64, p: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        self.checked_add(rhs).expect("exponent overflow")
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A valuation value, possibly only known from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtVal {
    Finite(Exponent),
    /// True value is at least this, unknown at the current precision.
    AtLeast(Exponent),
    Infinity,
}

impl ExtVal {
    /// Largest exponent certainly below or equal to the true value.
    pub fn lower_bound(&self) -> Option<Exponent> {
        match self {
            ExtVal::Finite(e) | ExtVal::AtLeast(e) => Some(*e),
            ExtVal::Infinity => None,
        }
    }

    pub fn finite(&self) -> Option<Exponent> {
        match self {
            ExtVal::Finite(e) => Some(*e),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtVal::Finite(_))
    }

    /// Adds a known finite amount; `AtLeast` stays `AtLeast`.
    pub fn shift(self, by: Exponent) -> ExtVal {
        match self {
            ExtVal::Finite(e) => ExtVal::Finite(e + by),
            ExtVal::AtLeast(e) => ExtVal::AtLeast(e + by),
            ExtVal::Infinity => ExtVal::Infinity,
        }
    }

    /// Certified `self <= other`, if decidable.
    pub fn certainly_le(&self, other: &ExtVal) -> Option<bool> {
        use ExtVal::*;
        match (self, other) {
            (_, Infinity) => Some(true),
            (Infinity, _) => Some(false),
            (Finite(a), Finite(b)) => Some(a <= b),
            (Finite(a), AtLeast(b)) => {
                if a <= b {
                    Some(true)
                } else {
                    None
                }
            }
            (AtLeast(a), Finite(b)) => {
                if a > b {
                    Some(false)
                } else {
                    None
                }
            }
            (AtLeast(_), AtLeast(_)) => None,
        }
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVal::Finite(e) => write!(f, "{e}"),
            ExtVal::AtLeast(e) => write!(f, ">={e}"),
            ExtVal::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_orders() {
        let a = Exponent::new(3, 3, 2).unwrap();
        assert_eq!(a, Exponent::new(3, 1, 1).unwrap());
        assert_eq!(a.den_log(3), 1);
        let b = Exponent::new(3, 2, 1).unwrap();
        assert!(a < b);
        assert_eq!(a + b, Exponent::ONE);
        assert_eq!(b.checked_sub(a), Some(a));
        assert_eq!(a.checked_sub(b), None);
    }

    #[test]
    fn rejects_foreign_denominator() {
        assert!(Exponent::from_fraction(2, 1, 6).is_err());
        assert!(Exponent::from_fraction(2, 3, 8).is_ok());
    }

    #[test]
    fn grid_helpers() {
        let e = Exponent::new(2, 3, 1).unwrap();
        assert_eq!(e.grid_index(4), 6);
        assert_eq!(e.grid_len(4), 6);
        assert_eq!(Exponent::new(3, 4, 2).unwrap().grid_len(3), 2);
        assert_eq!(Exponent::from_grid(6, 4), e);
    }

    #[test]
    fn extval_comparisons() {
        let one = ExtVal::Finite(Exponent::ONE);
        assert_eq!(one.certainly_le(&ExtVal::AtLeast(Exponent::int(2))), Some(true));
        assert_eq!(ExtVal::AtLeast(Exponent::ONE).certainly_le(&one), None);
        assert_eq!(ExtVal::Infinity.certainly_le(&one), Some(false));
    }
}
