//! Witt arithmetic over the tilt through a torsion-free lift.
//!
//! Components are lifted digit-wise to `(Z/p^n)[t^{1/p^inf}] / t^M`. There
//! the ghost map can be computed, and the result components are recovered
//! one at a time: if `z_j` agrees with the true component mod `p` for
//! `j < k`, then `p^j z_j^{p^{k-j}}` is correct mod `p^{k+1}`, so
//! `(G_k - sum_{j<k} p^j z_j^{p^{k-j}}) / p^k` is the `k`-th component mod `p`.

use super::ring::{TiltRing, WittOp};
use crate::error::{Error, Result};
use crate::perfring::{Exponent, TiltElem};

/// Dense coefficients on the grid `j / den`, reduced mod `modulus`.
#[derive(Clone)]
struct Lift {
    c: Vec<i128>,
}

struct Ctx {
    den: u64,
    len: usize,
    modulus: i128,
}

impl Ctx {
    fn lift(&self, y: &TiltElem) -> Lift {
        let mut c = vec![0i128; self.len];
        for (e, d) in y.digits() {
            let j = e.grid_index(self.den);
            if j < self.len {
                c[j] = *d as i128;
            }
        }
        Lift { c }
    }

    fn reduce(&self, mut v: Vec<i128>) -> Lift {
        for x in v.iter_mut() {
            *x = x.rem_euclid(self.modulus);
        }
        Lift { c: v }
    }

    fn mul(&self, a: &Lift, b: &Lift) -> Lift {
        let mut out = vec![0i128; self.len];
        let bnz: Vec<(usize, i128)> = b
            .c
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0)
            .map(|(j, x)| (j, *x))
            .collect();
        for (i, x) in a.c.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for &(j, y) in &bnz {
                if i + j >= self.len {
                    break;
                }
                out[i + j] += x * y;
            }
            // keep partial sums bounded
            if i % 64 == 63 {
                for v in out.iter_mut() {
                    *v %= self.modulus;
                }
            }
        }
        self.reduce(out)
    }

    fn pow(&self, a: &Lift, mut k: u64) -> Lift {
        let mut base = a.clone();
        let mut acc: Option<Lift> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(x) => self.mul(&x, &base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc.unwrap_or_else(|| {
            let mut c = vec![0i128; self.len];
            if self.len > 0 {
                c[0] = 1;
            }
            Lift { c }
        })
    }

    fn axpy(&self, acc: &mut Lift, s: i128, x: &Lift) {
        for (a, b) in acc.c.iter_mut().zip(&x.c) {
            *a = (*a + s * b).rem_euclid(self.modulus);
        }
    }
}

/// Cached `x^{p^m}` for `m = 0, 1, ...`.
struct Powers {
    p: u64,
    list: Vec<Lift>,
}

impl Powers {
    fn new(p: u64, x: Lift) -> Self {
        Powers { p, list: vec![x] }
    }

    fn get(&mut self, ctx: &Ctx, m: usize) -> &Lift {
        while self.list.len() <= m {
            let next = ctx.pow(self.list.last().unwrap(), self.p);
            self.list.push(next);
        }
        &self.list[m]
    }
}

fn ghosts(ctx: &Ctx, p: u32, xs: &[TiltElem]) -> Vec<Lift> {
    let n = xs.len();
    let mut pows: Vec<Powers> = xs.iter().map(|x| Powers::new(p as u64, ctx.lift(x))).collect();
    (0..n)
        .map(|k| {
            let mut g = Lift {
                c: vec![0; ctx.len],
            };
            for (j, pw) in pows.iter_mut().enumerate().take(k + 1) {
                let s = (p as i128).pow(j as u32);
                let term = pw.get(ctx, k - j).clone();
                ctx.axpy(&mut g, s, &term);
            }
            g
        })
        .collect()
}

pub(crate) fn tilt_op(ring: &TiltRing, op: WittOp, a: &[TiltElem], b: &[TiltElem]) -> Result<Vec<TiltElem>> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let p = ring.params.p;
    let all = a.iter().chain(b.iter());
    let den = all
        .clone()
        .flat_map(|y| y.digits().iter().map(|(e, _)| e.den()).chain([y.precision().den()]))
        .max()
        .unwrap_or(1)
        .max(ring.precision.den());
    // precision of result component k: everything it depends on
    let mut prec_k = Vec::with_capacity(n);
    let mut m = ring.precision;
    for k in 0..n {
        m = m.min(a[k].precision());
        if let Some(bk) = b.get(k) {
            m = m.min(bk.precision());
        }
        prec_k.push(m);
    }
    let top: Exponent = prec_k[0];
    let modulus = (p as i128)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Param("lift modulus overflow".into()))?;
    let ctx = Ctx {
        den,
        len: top.grid_len(den),
        modulus,
    };
    let ga = ghosts(&ctx, p, a);
    let target: Vec<Lift> = match op {
        WittOp::Add | WittOp::Mul => {
            let gb = ghosts(&ctx, p, b);
            ga.iter()
                .zip(&gb)
                .map(|(x, y)| match op {
                    WittOp::Add => {
                        let mut s = x.clone();
                        ctx.axpy(&mut s, 1, y);
                        s
                    }
                    _ => ctx.mul(x, y),
                })
                .collect()
        }
        WittOp::Neg => ga
            .iter()
            .map(|x| ctx.reduce(x.c.iter().map(|v| -v).collect()))
            .collect(),
    };
    let mut out: Vec<TiltElem> = Vec::with_capacity(n);
    let mut zpows: Vec<Powers> = Vec::with_capacity(n);
    for k in 0..n {
        let mut r = target[k].clone();
        for (j, pw) in zpows.iter_mut().enumerate() {
            let s = (p as i128).pow(j as u32);
            let term = pw.get(&ctx, k - j).clone();
            ctx.axpy(&mut r, -s, &term);
        }
        let pk = (p as i128).pow(k as u32);
        let hi = pk * p as i128;
        let mut terms = Vec::new();
        for (idx, v) in r.c.iter().enumerate() {
            let v = v.rem_euclid(hi);
            if v % pk != 0 {
                return Err(Error::Internal(format!(
                    "lifted ghost residue not divisible by p^{k} at grid point {idx}"
                )));
            }
            let d = (v / pk) as i64;
            if d != 0 {
                terms.push((d, Exponent::from_grid(idx, den)));
            }
        }
        let z = TiltElem::from_terms(ring.params, prec_k[k], &terms);
        zpows.push(Powers::new(p as u64, ctx.lift(&z)));
        out.push(z);
    }
    Ok(out)
}
