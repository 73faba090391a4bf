//! Canonical-form arithmetic in the standard perfectoid model.
//!
//! The mixed side is `O/p^N` for `O` the valuation ring of the completion of
//! `Q_p(p^{1/p^inf})`; its tilt is truncated `F_p[[t^{1/p^inf}]]`. Both are
//! stored as sparse base-`p` digit expansions over exponents in `Z[1/p]`,
//! which are unique, so every ring identity is checked by plain equality.

mod digits;
pub mod exponent;
pub mod mixed;
pub mod text;
pub mod tiltelem;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use exponent::{ExtVal, Exponent};
pub use mixed::MixedElem;
pub use tiltelem::TiltElem;

/// Prime and norm normalization shared by all elements of one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: u32,
    pub alpha_num: u64,
    pub alpha_den: u64,
}

impl ModelParams {
    /// `alpha` defaults to `1/p`.
    pub fn new(p: u32) -> Result<Self> {
        Self::with_alpha(p, 1, p as u64)
    }

    pub fn with_alpha(p: u32, alpha_num: u64, alpha_den: u64) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::Param(format!("{p} is not a prime")));
        }
        if p > 251 {
            return Err(Error::Param(format!("prime {p} is too large for byte digits")));
        }
        if alpha_num == 0 || alpha_num >= alpha_den {
            return Err(Error::Param(format!(
                "alpha = {alpha_num}/{alpha_den} is not in (0,1)"
            )));
        }
        Ok(ModelParams {
            p,
            alpha_num,
            alpha_den,
        })
    }

    pub fn alpha(&self) -> BigRational {
        BigRational::new(BigInt::from(self.alpha_num), BigInt::from(self.alpha_den))
    }

    /// `num / p^den_log` as an exponent.
    pub fn exp(&self, num: u64, den_log: u32) -> Exponent {
        Exponent::new(self.p, num, den_log).expect("exponent denominator overflow")
    }

    pub fn check_same(&self, other: &ModelParams) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Param(format!(
                "mismatched primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// A norm value `alpha^e`, carried symbolically by its exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Zero,
    AlphaPow(Exponent),
}

impl Norm {
    pub fn one() -> Self {
        Norm::AlphaPow(Exponent::ZERO)
    }

    /// Norm-scaling by `alpha^e`.
    pub fn scale(self, e: Exponent) -> Norm {
        match self {
            Norm::Zero => Norm::Zero,
            Norm::AlphaPow(a) => Norm::AlphaPow(a + e),
        }
    }

    /// Raise to an integer power.
    pub fn pow(self, k: u64) -> Norm {
        match self {
            Norm::Zero if k > 0 => Norm::Zero,
            Norm::Zero => Norm::one(),
            Norm::AlphaPow(a) => Norm::AlphaPow(a.mul_int(k)),
        }
    }
}

impl Ord for Norm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Norm::Zero, Norm::Zero) => Equal,
            (Norm::Zero, _) => Less,
            (_, Norm::Zero) => Greater,
            // larger exponent, smaller norm
            (Norm::AlphaPow(a), Norm::AlphaPow(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Norm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Zero => write!(f, "0"),
            Norm::AlphaPow(e) if e.is_zero() => write!(f, "1"),
            Norm::AlphaPow(e) => write!(f, "alpha^({e})"),
        }
    }
}

/// Certified bounds `lo <= value <= hi` on a norm-valued quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NormBounds {
    pub lo: Norm,
    pub hi: Norm,
}

impl NormBounds {
    pub fn exact(n: Norm) -> Self {
        NormBounds { lo: n, hi: n }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn scale(self, e: Exponent) -> Self {
        NormBounds {
            lo: self.lo.scale(e),
            hi: self.hi.scale(e),
        }
    }

    pub fn pow(self, k: u64) -> Self {
        NormBounds {
            lo: self.lo.pow(k),
            hi: self.hi.pow(k),
        }
    }

    pub fn max(self, other: NormBounds) -> Self {
        NormBounds {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl fmt::Display for NormBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Norm `|x| = alpha^{v(x)}` from a valuation, with truncation slack.
pub fn norm_of(v: ExtVal) -> NormBounds {
    match v {
        ExtVal::Finite(e) => NormBounds::exact(Norm::AlphaPow(e)),
        ExtVal::AtLeast(e) => NormBounds {
            lo: Norm::Zero,
            hi: Norm::AlphaPow(e),
        },
        ExtVal::Infinity => NormBounds::exact(Norm::Zero),
    }
}

/// `D(x,y) = inf_z |y - xz|`, which is `0` when `v(x) <= v(y)` and `|y|`
/// otherwise, computed from the two valuations.
pub fn d_from_valuations(vx: ExtVal, vy: ExtVal) -> NormBounds {
    match vx.certainly_le(&vy) {
        Some(true) => NormBounds::exact(Norm::Zero),
        Some(false) => norm_of(vy),
        None => NormBounds {
            lo: Norm::Zero,
            hi: norm_of(vy).hi,
        },
    }
}
