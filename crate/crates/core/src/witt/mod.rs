//! Truncated `p`-typical Witt vectors over a pluggable coefficient ring.
//!
//! Ghost components use the normalization `g_n = sum_{i<=n} p^i x_i^{p^{n-i}}`.

mod lifted;
pub mod poly;
pub mod ring;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::error::{Error, Result};
pub use poly::{gen_witt_polys, Poly, WittPolySet, MAX_LEN};
pub use ring::{CoeffRing, Integers, IntegersModPN, Rationals, TiltRing, WittOp};

/// `(x_0, ..., x_{n-1})`, index 0 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVec<E> {
    pub comps: Vec<E>,
}

impl<E> WittVec<E> {
    pub fn new(comps: Vec<E>) -> Self {
        WittVec { comps }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

/// How sums and products are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Ghost transport on torsion-free rings, the lifted path where the ring
    /// offers one, universal polynomials otherwise.
    Auto,
    Polynomial,
    Ghost,
    LiftedGhost,
}

/// Witt arithmetic over a fixed coefficient ring.
#[derive(Clone, Debug)]
pub struct Witt<R: CoeffRing> {
    pub ring: R,
    pub strategy: Strategy,
}

impl<R: CoeffRing> Witt<R> {
    pub fn new(ring: R) -> Self {
        Witt {
            ring,
            strategy: Strategy::Auto,
        }
    }

    pub fn with_strategy(ring: R, strategy: Strategy) -> Self {
        Witt { ring, strategy }
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    fn resolved(&self) -> Strategy {
        match self.strategy {
            Strategy::Auto if self.ring.p_torsion_free() => Strategy::Ghost,
            Strategy::Auto => {
                if self.ring.lifted_op(WittOp::Neg, &[], &[]).is_some() {
                    Strategy::LiftedGhost
                } else {
                    Strategy::Polynomial
                }
            }
            s => s,
        }
    }

    pub fn zero(&self, n: usize) -> WittVec<R::Elem> {
        WittVec::new(vec![self.ring.zero(); n])
    }

    pub fn one(&self, n: usize) -> WittVec<R::Elem> {
        self.teichmuller(&self.ring.one(), n)
    }

    /// `[a] = (a, 0, ..., 0)`.
    pub fn teichmuller(&self, a: &R::Elem, n: usize) -> WittVec<R::Elem> {
        let mut comps = vec![self.ring.zero(); n];
        if n > 0 {
            comps[0] = a.clone();
        }
        WittVec::new(comps)
    }

    /// The image of an integer, by double-and-add.
    pub fn from_int(&self, k: i64, n: usize) -> Result<WittVec<R::Elem>> {
        let mut acc = self.zero(n);
        let mut base = self.one(n);
        let mut m = k.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = self.add(&acc, &base)?;
            }
            m >>= 1;
            if m > 0 {
                base = self.add(&base, &base)?;
            }
        }
        if k < 0 {
            acc = self.neg(&acc)?;
        }
        Ok(acc)
    }

    /// First `m` components.
    pub fn project(&self, w: &WittVec<R::Elem>, m: usize) -> Result<WittVec<R::Elem>> {
        if m == 0 || m > w.len() {
            return Err(Error::Param(format!(
                "cannot project a length-{} Witt vector to length {m}",
                w.len()
            )));
        }
        Ok(WittVec::new(w.comps[..m].to_vec()))
    }

    /// Ghost components `(g_0, ..., g_{n-1})`.
    pub fn ghost(&self, w: &WittVec<R::Elem>) -> Vec<R::Elem> {
        let p = self.p() as u64;
        let r = &self.ring;
        (0..w.len())
            .map(|k| {
                let mut g = r.zero();
                for j in 0..=k {
                    let scale = r.from_int(&num_traits::pow(BigInt::from(p), j));
                    let term = r.pow(&w.comps[j], p.pow((k - j) as u32));
                    g = r.add(&g, &r.mul(&scale, &term));
                }
                g
            })
            .collect()
    }

    /// Inverts the ghost map; needs a torsion-free ring with exact division.
    pub fn from_ghost(&self, g: &[R::Elem]) -> Result<WittVec<R::Elem>> {
        let p = self.p() as u64;
        let r = &self.ring;
        let mut xs: Vec<R::Elem> = Vec::with_capacity(g.len());
        for (k, gk) in g.iter().enumerate() {
            let mut rem = gk.clone();
            for (j, xj) in xs.iter().enumerate() {
                let scale = r.from_int(&num_traits::pow(BigInt::from(p), j));
                rem = r.sub(&rem, &r.mul(&scale, &r.pow(xj, p.pow((k - j) as u32))));
            }
            let x = r.exact_div_p_pow(&rem, k as u32).ok_or_else(|| {
                Error::Contract(format!(
                    "ghost vector is not the image of a Witt vector over {}",
                    r.name()
                ))
            })?;
            xs.push(x);
        }
        Ok(WittVec::new(xs))
    }

    fn align<'a>(
        a: &'a WittVec<R::Elem>,
        b: &'a WittVec<R::Elem>,
    ) -> (&'a [R::Elem], &'a [R::Elem]) {
        let n = a.len().min(b.len());
        (&a.comps[..n], &b.comps[..n])
    }

    fn apply(&self, op: WittOp, a: &[R::Elem], b: &[R::Elem]) -> Result<WittVec<R::Elem>> {
        let n = a.len();
        if n == 0 {
            return Ok(WittVec::new(Vec::new()));
        }
        match self.resolved() {
            Strategy::Ghost => {
                if !self.ring.p_torsion_free() {
                    return Err(Error::Unsupported(format!(
                        "ghost transport over {}, which has p-torsion",
                        self.ring.name()
                    )));
                }
                let ga = self.ghost(&WittVec::new(a.to_vec()));
                let g: Vec<R::Elem> = match op {
                    WittOp::Neg => ga.iter().map(|x| self.ring.neg(x)).collect(),
                    _ => {
                        let gb = self.ghost(&WittVec::new(b.to_vec()));
                        ga.iter()
                            .zip(&gb)
                            .map(|(x, y)| match op {
                                WittOp::Add => self.ring.add(x, y),
                                _ => self.ring.mul(x, y),
                            })
                            .collect()
                    }
                };
                self.from_ghost(&g)
            }
            Strategy::LiftedGhost => match self.ring.lifted_op(op, a, b) {
                Some(res) => res.map(WittVec::new),
                None => Err(Error::Unsupported(format!(
                    "no lifted ghost arithmetic for {}",
                    self.ring.name()
                ))),
            },
            _ => {
                let set = gen_witt_polys(self.p(), n)?;
                let polys = match op {
                    WittOp::Add => &set.sum,
                    WittOp::Mul => &set.prod,
                    WittOp::Neg => &set.neg,
                };
                // variable order x_0..x_{n-1}, y_0..y_{n-1}
                let mut vals: Vec<R::Elem> = a.to_vec();
                if op == WittOp::Neg {
                    vals.extend(std::iter::repeat(self.ring.zero()).take(n));
                } else {
                    vals.extend(b.iter().cloned());
                }
                Ok(WittVec::new(
                    polys.iter().map(|q| q.eval(&self.ring, &vals)).collect(),
                ))
            }
        }
    }

    pub fn add(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>> {
        let (a, b) = Self::align(a, b);
        self.apply(WittOp::Add, a, b)
    }

    pub fn mul(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>> {
        let (a, b) = Self::align(a, b);
        self.apply(WittOp::Mul, a, b)
    }

    pub fn neg(&self, a: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>> {
        self.apply(WittOp::Neg, &a.comps, &[])
    }

    pub fn sub(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>> {
        self.add(a, &self.neg(b)?)
    }

    /// Componentwise image under a ring map (e.g. Frobenius).
    pub fn map(&self, w: &WittVec<R::Elem>, f: impl Fn(&R::Elem) -> R::Elem) -> WittVec<R::Elem> {
        WittVec::new(w.comps.iter().map(f).collect())
    }

    pub fn eq_at_precision(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> bool {
        a.len() == b.len()
            && a
                .comps
                .iter()
                .zip(&b.comps)
                .all(|(x, y)| self.ring.eq_at_precision(x, y))
    }

    /// `p^i [c]` in characteristic `p`: `c^{p^i}` placed at component `i`.
    pub fn teich_times_p_pow(&self, c: &R::Elem, i: usize, n: usize) -> WittVec<R::Elem> {
        let mut comps = vec![self.ring.zero(); n];
        if i < n {
            comps[i] = self.ring.frobenius_pow(c, i as u32);
        }
        WittVec::new(comps)
    }

    /// Coefficients `c_i` with `w = sum_i [c_i] p^i`, over a perfect ring of
    /// characteristic `p`.
    ///
    /// Iterative: after subtracting `sum_{j<i} [c_j] p^j` the remainder
    /// vanishes below component `i`, and its `i`-th component is `c_i^{p^i}`.
    pub fn teich_expand(&self, w: &WittVec<R::Elem>) -> Result<Vec<R::Elem>> {
        let n = w.len();
        let mut rem = w.clone();
        let mut cs = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..i {
                if !self.ring.is_zero(&rem.comps[j]) {
                    return Err(Error::Internal(format!(
                        "Teichmuller remainder has nonzero component {j} at step {i}"
                    )));
                }
            }
            let mut c = rem.comps[i].clone();
            for _ in 0..i {
                c = self.ring.inv_frobenius(&c).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "Teichmuller expansion over {}, which has no inverse Frobenius",
                        self.ring.name()
                    ))
                })?;
            }
            if i + 1 < n {
                // [c] p^i is c^{p^i} = rem_i placed at component i
                let mut term = self.zero(n);
                term.comps[i] = rem.comps[i].clone();
                rem = self.sub(&rem, &term)?;
            }
            cs.push(c);
        }
        Ok(cs)
    }

    /// `sum_i [c_i] p^i`, the inverse of [`Witt::teich_expand`].
    pub fn teich_assemble(&self, cs: &[R::Elem]) -> Result<WittVec<R::Elem>> {
        let n = cs.len();
        let mut acc = self.zero(n);
        for (i, c) in cs.iter().enumerate() {
            acc = self.add(&acc, &self.teich_times_p_pow(c, i, n))?;
        }
        Ok(acc)
    }

    /// Inverse of a Witt vector whose first component is a unit:
    /// `u = [u_0] v` with `1 - v` in the image of Verschiebung, which is nilpotent
    /// when `p` is nilpotent in the coefficients.
    pub fn inverse_unit(&self, u: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>> {
        let n = u.len();
        if n == 0 {
            return Ok(u.clone());
        }
        let inv0 = self
            .ring
            .inverse(&u.comps[0])
            .ok_or_else(|| Error::Contract(format!("{} is not a unit", u.comps[0])))?;
        let t = self.teichmuller(&inv0, n);
        let v = self.mul(&t, u)?;
        let e = self.sub(&self.one(n), &v)?;
        let mut acc = self.one(n);
        let mut pw = self.one(n);
        for _ in 0..256 {
            pw = self.mul(&pw, &e)?;
            if pw.comps.iter().all(|c| self.ring.is_zero(c)) {
                return self.mul(&acc, &t);
            }
            acc = self.add(&acc, &pw)?;
        }
        Err(Error::Unsupported(format!(
            "geometric series for a Witt unit inverse over {} did not terminate",
            self.ring.name()
        )))
    }

    pub fn to_json(&self, w: &WittVec<R::Elem>) -> Value {
        json!({
            "p": self.p(),
            "n": w.len(),
            "components": w.comps.iter().map(|c| self.ring.elem_json(c)).collect::<Vec<_>>(),
        })
    }

    pub fn format(&self, w: &WittVec<R::Elem>) -> String {
        let parts: Vec<String> = w.comps.iter().map(|c| c.to_string()).collect();
        format!("W({})", parts.join("; "))
    }
}
