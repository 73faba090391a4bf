//! Universal Witt polynomials over the integers.
//!
//! Generated from the ghost recurrences, e.g. for sums
//! `p^i S_i = W_i(x) + W_i(y) - sum_{j<i} p^j S_j^{p^{i-j}}`,
//! and checked to be integral by exact division.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ring::CoeffRing;
use crate::error::{Error, Result};

/// Largest supported Witt length; monomial keys pack `2n` exponents.
pub const MAX_LEN: usize = 5;

const BITS: u32 = 12;
const FIELD: u128 = (1 << BITS) - 1;

/// A monomial packed as 12-bit exponents, variable `k` at bits `12k..`.
type Mono = u128;

fn mono_exp(m: Mono, var: usize) -> u32 {
    ((m >> (BITS * var as u32)) & FIELD) as u32
}

fn mono_var(var: usize, e: u32) -> Mono {
    (e as u128) << (BITS * var as u32)
}

/// A polynomial with integer coefficients in `x_0..x_{n-1}, y_0..y_{n-1}`;
/// variable `x_i` has index `i`, `y_i` has index `n + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Mono, BigInt)>,
}

type Acc = HashMap<Mono, BigInt>;

fn collect(nvars: usize, acc: Acc) -> Poly {
    let mut terms: Vec<(Mono, BigInt)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Poly { nvars, terms }
}

impl Poly {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// `(exponent vector, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &BigInt)> + '_ {
        self.terms
            .iter()
            .map(move |(m, c)| ((0..self.nvars).map(|v| mono_exp(*m, v)).collect(), c))
    }

    fn add_scaled(acc: &mut Acc, other: &Poly, scale: &BigInt) {
        for (m, c) in &other.terms {
            *acc.entry(*m).or_insert_with(BigInt::zero) += c * scale;
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut acc: Acc = HashMap::with_capacity(self.len() * other.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma + mb).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        collect(self.nvars, acc)
    }

    fn pow(&self, mut k: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly {
            nvars: self.nvars,
            terms: vec![(0, BigInt::one())],
        };
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Evaluates in a coefficient ring; `vals[k]` is the value of variable `k`.
    pub fn eval<R: CoeffRing>(&self, ring: &R, vals: &[R::Elem]) -> R::Elem {
        let mut powers: HashMap<(usize, u32), R::Elem> = HashMap::new();
        let mut acc = ring.zero();
        for (m, c) in &self.terms {
            let coef = ring.from_int(c);
            if ring.is_zero(&coef) {
                continue;
            }
            let mut term = coef;
            for (v, val) in vals.iter().enumerate().take(self.nvars) {
                let e = mono_exp(*m, v);
                if e == 0 {
                    continue;
                }
                let pw = powers
                    .entry((v, e))
                    .or_insert_with(|| ring.pow(val, e as u64));
                term = ring.mul(&term, pw);
            }
            acc = ring.add(&acc, &term);
        }
        acc
    }

    /// Sparse text form, e.g. `x1 + y1 - x0*y0`.
    pub fn format(&self, n: usize) -> String {
        let name = |v: usize| {
            if v < n {
                format!("x{v}")
            } else {
                format!("y{}", v - n)
            }
        };
        let mut ts: Vec<(Vec<u32>, &BigInt)> = self.terms().collect();
        // total degree, then lexicographically largest exponent vector first
        ts.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then_with(|| b.0.cmp(&a.0))
        });
        if ts.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (ex, c)) in ts.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mag = c.abs();
            let mono: Vec<String> = ex
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| if *e == 1 { name(v) } else { format!("{}^{e}", name(v)) })
                .collect();
            if mono.is_empty() {
                s.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    s.push_str(&format!("{mag}*"));
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

/// Sum, product and negation polynomials `S_i, P_i, N_i` for `i < n`.
#[derive(Clone, Debug)]
pub struct WittPolySet {
    pub p: u32,
    pub n: usize,
    pub sum: Vec<Poly>,
    pub prod: Vec<Poly>,
    pub neg: Vec<Poly>,
}

#[derive(Serialize)]
pub struct PolyDump {
    pub name: String,
    /// `[exponents of x_0.., y_0.., coefficient]`, coefficient as a decimal string.
    pub terms: Vec<(Vec<u32>, String)>,
}

impl WittPolySet {
    pub fn dump(&self) -> Vec<PolyDump> {
        let mut out = Vec::new();
        for (tag, list) in [("S", &self.sum), ("P", &self.prod), ("N", &self.neg)] {
            for (i, poly) in list.iter().enumerate() {
                out.push(PolyDump {
                    name: format!("{tag}_{i}"),
                    terms: poly.terms().map(|(e, c)| (e, c.to_string())).collect(),
                });
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (tag, list) in [("S", &self.sum), ("P", &self.prod), ("N", &self.neg)] {
            for (i, poly) in list.iter().enumerate() {
                s.push_str(&format!("{tag}_{i} = {}\n", poly.format(self.n)));
            }
        }
        s
    }
}

/// `W_i(vars offset..offset+i)` as a polynomial.
fn ghost_poly(p: u32, nvars: usize, offset: usize, i: usize) -> Poly {
    let mut acc = Acc::new();
    for j in 0..=i {
        let e = (p as u64).pow((i - j) as u32) as u32;
        *acc.entry(mono_var(offset + j, e)).or_insert_with(BigInt::zero) +=
            num_traits::pow(BigInt::from(p), j);
    }
    collect(nvars, acc)
}

/// Solves `p^i Q_i = target_i - sum_{j<i} p^j Q_j^{p^{i-j}}` for `i < n`.
fn solve(p: u32, n: usize, nvars: usize, targets: Vec<Poly>) -> Result<Vec<Poly>> {
    let pb = BigInt::from(p);
    let mut out: Vec<Poly> = Vec::with_capacity(n);
    // powers[j][m] = Q_j^{p^m}
    let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(n);
    for (i, target) in targets.into_iter().enumerate() {
        let mut acc: Acc = target.terms.into_iter().collect();
        for (j, pw) in powers.iter_mut().enumerate() {
            while pw.len() <= i - j {
                let next = pw.last().unwrap().pow(p as u64);
                pw.push(next);
            }
            Poly::add_scaled(&mut acc, &pw[i - j], &-num_traits::pow(pb.clone(), j));
        }
        let d = num_traits::pow(pb.clone(), i);
        let mut q = Acc::with_capacity(acc.len());
        for (m, c) in acc {
            if c.is_zero() {
                continue;
            }
            let (quo, rem) = c.div_rem(&d);
            if !rem.is_zero() {
                return Err(Error::Internal(format!(
                    "non-integral coefficient {c}/{d} in Witt polynomial {i} for p = {p}"
                )));
            }
            q.insert(m, quo);
        }
        let poly = collect(nvars, q);
        powers.push(vec![poly.clone()]);
        out.push(poly);
    }
    Ok(out)
}

/// Generates `S_i, P_i, N_i` for `i < n` without caching.
pub fn generate(p: u32, n: usize) -> Result<WittPolySet> {
    if !crate::perfring::is_prime(p) {
        return Err(Error::Param(format!("{p} is not a prime")));
    }
    if n == 0 || n > MAX_LEN {
        return Err(Error::Param(format!("Witt length {n} outside 1..={MAX_LEN}")));
    }
    if (p as u64).pow(n as u32 - 1) > FIELD as u64 {
        return Err(Error::Param(format!(
            "Witt length {n} too large for p = {p} (degree {p}^{} exceeds {FIELD})",
            n - 1
        )));
    }
    let nvars = 2 * n;
    let wx: Vec<Poly> = (0..n).map(|i| ghost_poly(p, nvars, 0, i)).collect();
    let wy: Vec<Poly> = (0..n).map(|i| ghost_poly(p, nvars, n, i)).collect();
    let sum_t = wx
        .iter()
        .zip(&wy)
        .map(|(a, b)| {
            let mut acc: Acc = a.terms.iter().cloned().collect();
            Poly::add_scaled(&mut acc, b, &BigInt::one());
            collect(nvars, acc)
        })
        .collect();
    let prod_t = wx.iter().zip(&wy).map(|(a, b)| a.mul(b)).collect();
    let neg_t = wx
        .iter()
        .map(|a| {
            let mut acc = Acc::new();
            Poly::add_scaled(&mut acc, a, &-BigInt::one());
            collect(nvars, acc)
        })
        .collect();
    Ok(WittPolySet {
        p,
        n,
        sum: solve(p, n, nvars, sum_t)?,
        prod: solve(p, n, nvars, prod_t)?,
        neg: solve(p, n, nvars, neg_t)?,
    })
}

type Cache = Mutex<HashMap<(u32, usize), Arc<WittPolySet>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached generation. Concurrent callers may both generate; the first
/// insertion wins and every caller sees the same set.
pub fn gen_witt_polys(p: u32, n: usize) -> Result<Arc<WittPolySet>> {
    if let Some(s) = cache().lock().unwrap().get(&(p, n)) {
        return Ok(s.clone());
    }
    let fresh = Arc::new(generate(p, n)?);
    let mut guard = cache().lock().unwrap();
    Ok(guard.entry((p, n)).or_insert(fresh).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_p2_polynomials() {
        let s = gen_witt_polys(2, 2).unwrap();
        assert_eq!(s.sum[0].format(2), "x0 + y0");
        assert_eq!(s.sum[1].format(2), "x1 + y1 - x0*y0");
        assert_eq!(s.prod[0].format(2), "x0*y0");
        assert_eq!(s.prod[1].format(2), "2*x1*y1 + x0^2*y1 + x1*y0^2");
        assert_eq!(s.neg[1].format(2), "-x1 - x0^2");
    }

    #[test]
    fn odd_negation_is_componentwise() {
        let s = gen_witt_polys(3, 3).unwrap();
        for (i, q) in s.neg.iter().enumerate() {
            assert_eq!(q.format(3), format!("-x{i}"));
        }
    }

    #[test]
    fn length_cap() {
        assert!(generate(2, 6).is_err());
        assert!(generate(4, 2).is_err());
    }
}
