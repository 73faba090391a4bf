//! Compatible root sequences, tilting, `sharp`, `theta` and round trips
//! between the mixed model and its tilt.
//!
//! Precision bookkeeping follows the congruence `a = b mod p` implies
//! `a^{p^k} = b^{p^k} mod p^{k+1}`: a tilt element known mod `t^{p^{N-1}}`
//! determines its `sharp` mod `p^N`, and `L` residues determine a tilt
//! element mod `t^{p^{L-1}}`.

pub mod xi;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perfring::{Exponent, MixedElem, ModelParams, TiltElem};
use crate::witt::{TiltRing, Witt, WittVec};

pub use xi::{
    d_xi, d_xi_direct, untilt, untilt_reduce, v_xi, xi_standard, xi_validate, DxiResult, Reduced,
    UntiltElem, XiCheck, XiParam, XiReport,
};

/// Digits of `y` below `min(1, precision)`, read as a mixed element
/// (the digit lift `t^e -> p^e`), carried at `precision`.
pub fn lift_residue(y: &TiltElem, precision: Exponent) -> MixedElem {
    let cut = precision.min(Exponent::ONE).min(y.precision());
    let ds: Vec<(Exponent, u8)> = y
        .digits()
        .iter()
        .copied()
        .take_while(|(e, _)| *e < cut)
        .collect();
    MixedElem::from_digits(y.params(), precision, &ds)
}

/// The residue mod `p` of a mixed element as an element of `F_p[t^{1/p^inf}]/t`.
pub fn residue_to_tilt(x: &MixedElem) -> TiltElem {
    let r = x.residue();
    TiltElem::from_digits(x.params(), r.precision(), r.digits())
}

/// A compatible sequence `(x_0, ..., x_{L-1})` with `x_{i+1}^p = x_i mod p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaSeq {
    params: ModelParams,
    precision: Exponent,
    entries: Vec<MixedElem>,
}

impl OmegaSeq {
    /// Validates compatibility eagerly; entries are truncated to the least
    /// entry precision.
    pub fn new(entries: Vec<MixedElem>) -> Result<OmegaSeq> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Param("empty root sequence".into()))?;
        let params = first.params();
        let precision = entries.iter().map(|e| e.precision()).min().unwrap();
        let entries: Vec<MixedElem> = entries.iter().map(|e| e.truncate(precision)).collect();
        let p = params.p as u64;
        for i in 0..entries.len() - 1 {
            params.check_same(&entries[i + 1].params())?;
            if entries[i + 1].pow(p) != entries[i] {
                return Err(Error::Contract(format!(
                    "entry {} raised to the p-th power is {}, not entry {i} = {}",
                    i + 1,
                    entries[i + 1].pow(p),
                    entries[i]
                )));
            }
        }
        Ok(OmegaSeq {
            params,
            precision,
            entries,
        })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn precision(&self) -> Exponent {
        self.precision
    }

    pub fn entries(&self) -> &[MixedElem] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry residues mod `p`.
    pub fn residues(&self) -> Vec<MixedElem> {
        self.entries.iter().map(|e| e.residue()).collect()
    }

    /// The tilt element: the residue of the last entry with exponents
    /// scaled by `p^{L-1}`, known mod `t^{p^{L-1} min(N, 1)}`.
    pub fn tilt(&self) -> TiltElem {
        let last = self.entries.last().unwrap();
        let y = residue_to_tilt(last);
        y.frobenius_pow(self.entries.len() as u32 - 1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.params.p,
            "N": [self.precision.num(), self.precision.den_log(self.params.p)],
            "entries": self.entries.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Rebuilds a length-`len` root sequence mod `p^n` from residues:
/// `x_i = lift(r_{i+n-1})^{p^{n-1}}`.
///
/// Needs residues up to index `len + n - 2`.
pub fn lift_sequence(residues: &[MixedElem], n: u64, len: usize) -> Result<OmegaSeq> {
    if n == 0 || len == 0 {
        return Err(Error::Param("precision and length must be positive".into()));
    }
    let need = len + n as usize - 1;
    if residues.len() < need {
        return Err(Error::precision(
            format!("lifting a root sequence of length {len} mod p^{n}"),
            format!("residues up to index {}", need - 1),
            format!("residues up to index {}", residues.len() as i64 - 1),
        ));
    }
    let params = residues[0].params();
    let p = params.p as u64;
    let rs: Vec<MixedElem> = residues[..need].iter().map(|r| r.residue()).collect();
    for i in 0..need - 1 {
        params.check_same(&rs[i + 1].params())?;
        if rs[i + 1].pow(p) != rs[i] {
            return Err(Error::Contract(format!(
                "residue {} does not raise to residue {i} under Frobenius",
                i + 1
            )));
        }
    }
    let prec = Exponent::int(n);
    let q = p.pow(n as u32 - 1);
    let entries = (0..len)
        .map(|i| rs[i + n as usize - 1].with_precision(prec).pow(q))
        .collect();
    OmegaSeq::new(entries)
}

/// `r, r^{1/p}, r^{1/p^2}, ...` mod `p`, via the digit-remapping root.
pub fn root_residues(r: &MixedElem, count: usize) -> Vec<MixedElem> {
    let mut out = Vec::with_capacity(count);
    let mut cur = r.residue();
    for _ in 0..count {
        out.push(cur.clone());
        cur = cur.pth_root_mod_p();
    }
    out
}

/// `y^sharp mod p^N` from `y` known mod `t^{p^{ceil(N)-1}}`.
pub fn sharp(y: &TiltElem, n: Exponent) -> Result<MixedElem> {
    let m = n.ceil();
    if m <= 1 {
        if y.precision() < n {
            return Err(Error::precision("sharp", format!("t-precision {n}"), y.precision()));
        }
        return Ok(lift_residue(y, n));
    }
    let k = m as u32 - 1;
    let q = (y.p() as u64).pow(k);
    let need = Exponent::int(q);
    if y.precision() < need {
        return Err(Error::precision(
            format!("sharp mod p^{n}"),
            format!("t-precision {need}"),
            y.precision(),
        ));
    }
    let root = y.inv_frobenius_pow(k);
    let z = lift_residue(&root, Exponent::int(m));
    Ok(z.pow(q).truncate(n))
}

/// `theta(sum [c_i] p^i) = sum c_i^sharp p^i mod p^N`.
pub fn theta(witt: &Witt<TiltRing>, w: &WittVec<TiltElem>, n: Exponent) -> Result<MixedElem> {
    let terms = n.ceil() as usize;
    if w.len() < terms {
        return Err(Error::precision(
            format!("theta mod p^{n}"),
            format!("Witt length {terms}"),
            format!("Witt length {}", w.len()),
        ));
    }
    let cs = witt.teich_expand(&witt.project(w, terms.max(1))?)?;
    let mut acc = MixedElem::zero(witt.ring.params, n);
    for (i, c) in cs.iter().enumerate().take(terms) {
        let shift = Exponent::int(i as u64);
        let rest = n.checked_sub(shift).unwrap();
        let s = sharp(c, rest)?;
        acc = &acc + &s.shift_up(shift);
    }
    Ok(acc)
}

/// Teichmuller digits of a mixed element: `a = sum_i omega_i p^i` where each
/// `omega_i` is the sharp of a tilt element `c_i`. Returns the `c_i`, each
/// known to the precision `theta` needs for it.
pub fn tilt_digits(a: &MixedElem) -> Result<Vec<TiltElem>> {
    let n = a.precision();
    if !n.is_integer() || n.is_zero() {
        return Err(Error::Param(format!("untilting needs a positive integer precision, got {n}")));
    }
    let n = n.num();
    let mut r = a.clone();
    let mut cs = Vec::with_capacity(n as usize);
    for i in 0..n {
        let m = n - i;
        let rs = root_residues(&r, 2 * m as usize - 1);
        let omega = lift_sequence(&rs, m, m as usize)?;
        let c = omega.tilt();
        let back = sharp(&c, Exponent::int(m))?;
        if back != omega.entries()[0] {
            return Err(Error::Internal(format!(
                "sharp of the tilt {c} is {back}, expected {}",
                omega.entries()[0]
            )));
        }
        cs.push(c);
        if m > 1 {
            r = (&r.truncate(Exponent::int(m)) - &back).shift_down(Exponent::ONE)?;
        }
    }
    Ok(cs)
}

/// The Witt vector `sum_i [c_i] p^i` over the tilt whose `theta` is `a`.
pub fn untilt_preimage(a: &MixedElem) -> Result<WittVec<TiltElem>> {
    let cs = tilt_digits(a)?;
    Ok(WittVec::new(
        cs.iter()
            .enumerate()
            .map(|(i, c)| c.frobenius_pow(i as u32))
            .collect(),
    ))
}

/// Mixed element -> root sequences -> tilt -> Witt vector -> `theta`.
pub fn untilt_roundtrip(a: &MixedElem) -> Result<MixedElem> {
    let witt = Witt::new(TiltRing::new(a.params(), Exponent::int(
        (a.p() as u64).pow(a.precision().ceil().saturating_sub(1) as u32),
    )));
    let w = untilt_preimage(a)?;
    theta(&witt, &w, a.precision())
}

/// Smallest `L` with `p^{L-1} >= m`, and `m / p^{L-1}`.
fn depth_for(p: u32, m: Exponent) -> (u32, Exponent) {
    let mut l = 1u32;
    let mut q = 1u64;
    while Exponent::int(q) < m {
        q *= p as u64;
        l += 1;
    }
    (l, m.div_int(q))
}

/// Tilt element -> `(theta([y^{p^{-i}}]))_i` -> tilt of that sequence.
pub fn tilt_roundtrip(y: &TiltElem) -> Result<TiltElem> {
    let m = y.precision();
    let (l, gamma) = depth_for(y.p(), m);
    let entries = (0..l)
        .map(|i| sharp(&y.inv_frobenius_pow(i), gamma))
        .collect::<Result<Vec<_>>>()?;
    let omega = OmegaSeq::new(entries)?;
    Ok(omega.tilt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u32) -> ModelParams {
        ModelParams::new(p).unwrap()
    }

    #[test]
    fn lift_sequence_of_units_and_roots() {
        let par = m(2);
        let one = MixedElem::one(par, Exponent::int(3));
        let ones = vec![one.clone(); 4];
        let s = lift_sequence(&ones, 3, 2).unwrap();
        assert!(s.entries().iter().all(|e| *e == one));

        let rs: Vec<MixedElem> = (0..4)
            .map(|i| MixedElem::monomial(par, Exponent::ONE, 1, Exponent::new(2, 1, i).unwrap()))
            .collect();
        let s = lift_sequence(&rs, 3, 2).unwrap();
        assert_eq!(s.entries()[0].to_string(), "p");
        assert_eq!(s.entries()[1].to_string(), "p^(1/2)");
        assert_eq!(s.tilt().to_string(), "t");
        assert!(matches!(lift_sequence(&rs[..3], 3, 2), Err(Error::Precision { .. })));
    }

    #[test]
    fn incompatible_residues_rejected() {
        let par = m(3);
        let rs = vec![
            MixedElem::monomial(par, Exponent::ONE, 1, Exponent::new(3, 1, 1).unwrap()),
            MixedElem::one(par, Exponent::ONE),
        ];
        assert!(matches!(lift_sequence(&rs, 1, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn sharp_basics() {
        let par = m(2);
        let t = TiltElem::t_pow(par, Exponent::int(4), Exponent::ONE);
        assert_eq!(sharp(&t, Exponent::int(3)).unwrap().to_string(), "p");
        let short = TiltElem::t_pow(par, Exponent::int(2), Exponent::ONE);
        assert!(matches!(sharp(&short, Exponent::int(3)), Err(Error::Precision { .. })));
    }

    #[test]
    fn sharp_is_not_additive() {
        let par = m(2);
        let prec = Exponent::int(4);
        let y = TiltElem::from_terms(par, prec, &[(1, Exponent::ZERO), (1, Exponent::ONE)]);
        let s = sharp(&y, Exponent::int(3)).unwrap();
        let naive = MixedElem::from_int(par, Exponent::int(3), 3);
        assert_ne!(s, naive);
        assert_eq!(s.residue(), naive.residue());
        assert_ne!(s.truncate(Exponent::int(2)), naive.truncate(Exponent::int(2)));
    }

    #[test]
    fn theta_kernel_and_uniformizer() {
        let par = m(2);
        let n = 3;
        let prec = Exponent::int(4);
        let witt = Witt::new(TiltRing::new(par, prec));
        let t = TiltElem::t_pow(par, prec, Exponent::ONE);
        let tt = witt.teichmuller(&t, n);
        assert_eq!(theta(&witt, &tt, Exponent::int(3)).unwrap().to_string(), "p");
        let xi = witt.sub(&tt, &witt.from_int(2, n).unwrap()).unwrap();
        assert!(theta(&witt, &xi, Exponent::int(3)).unwrap().is_zero());
    }

    #[test]
    fn round_trips_small() {
        let par = m(2);
        let a = MixedElem::parse(par, Exponent::int(3), "1 + p^(1/2) + p^(7/4)").unwrap();
        assert_eq!(untilt_roundtrip(&a).unwrap(), a);
        let p = MixedElem::parse(par, Exponent::int(3), "p").unwrap();
        assert_eq!(untilt_roundtrip(&p).unwrap(), p);
        let y = TiltElem::parse(par, Exponent::int(4), "t^(1/2) + t").unwrap();
        assert_eq!(tilt_roundtrip(&y).unwrap(), y);
        let par3 = m(3);
        let y3 = TiltElem::parse(par3, Exponent::int(4), "2 + t^(1/3) + t^(10/3)").unwrap();
        assert_eq!(tilt_roundtrip(&y3).unwrap(), y3);
    }
}
