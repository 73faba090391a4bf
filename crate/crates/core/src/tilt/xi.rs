//! Untilts `W(O)/(xi)` for `xi = [varpi] - p b`: parameter validation, the
//! reduction `x = [y] a mod xi`, `v_xi` and the `D_xi` recursion.

use serde_json::{json, Value};

use super::{sharp, theta};
use crate::error::{Error, Result};
use crate::perfring::{d_from_valuations, norm_of, ExtVal, Exponent, MixedElem, ModelParams, Norm, NormBounds, TiltElem};
use crate::witt::{CoeffRing, TiltRing, Witt, WittVec};

/// `xi = [varpi] - p b` with `b` a Witt vector over the tilt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiParam {
    pub varpi: TiltElem,
    pub b: WittVec<TiltElem>,
}

/// `varpi = t`, `b = 1`, so `xi = [t] - p`.
pub fn xi_standard(params: ModelParams, n: usize, precision: Exponent) -> XiParam {
    let witt = Witt::new(TiltRing::new(params, precision));
    XiParam {
        varpi: TiltElem::t_pow(params, precision, Exponent::ONE),
        b: witt.one(n),
    }
}

impl XiParam {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn xi(&self, witt: &Witt<TiltRing>) -> Result<WittVec<TiltElem>> {
        let n = self.b.len();
        let pb = witt.mul(&witt.from_int(witt.p() as i64, n)?, &self.b)?;
        witt.sub(&witt.teichmuller(&self.varpi, n), &pb)
    }

    /// `varpi = t` exactly and `b = 1`.
    pub fn is_standard(&self) -> bool {
        let d = self.varpi.digits();
        d.len() == 1
            && d[0] == (Exponent::ONE, 1)
            && !self.b.is_empty()
            && self.b.comps[0].digits() == [(Exponent::ZERO, 1)]
            && self.b.comps[1..].iter().all(|c| c.is_zero())
    }

    /// `v(varpi)`, which must be finite and positive.
    pub fn v_varpi(&self) -> Result<Exponent> {
        match self.varpi.valuation() {
            ExtVal::Finite(v) if !v.is_zero() => Ok(v),
            v => Err(Error::Contract(format!(
                "varpi = {} has valuation {v}, not in (0, inf)",
                self.varpi
            ))),
        }
    }

    pub fn to_json(&self, witt: &Witt<TiltRing>) -> Value {
        json!({
            "p": witt.p(),
            "varpi": self.varpi.to_json(),
            "b": witt.to_json(&self.b),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct XiCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct XiReport {
    pub checks: Vec<XiCheck>,
    /// `0 < |varpi| < 1` and `b_0` a unit.
    pub valid: bool,
    /// Window condition against the reference, when one was given.
    pub normalized: Option<bool>,
    /// `v(varpi) = v(p)` and `theta(b) = varpi^sharp / p`.
    pub theta_kernel: bool,
}

/// Checks each condition separately; violations are reported, not raised.
pub fn xi_validate(
    witt: &Witt<TiltRing>,
    varpi: &TiltElem,
    b: &WittVec<TiltElem>,
    varpi_ref: Option<&TiltElem>,
) -> XiReport {
    let mut checks = Vec::new();
    let vw = varpi.valuation();
    let pos = matches!(vw, ExtVal::Finite(v) if !v.is_zero());
    checks.push(XiCheck {
        name: "0 < |varpi| < 1".into(),
        ok: pos,
        detail: format!("v(varpi) = {vw}"),
    });
    let vb0 = b.comps.first().map(|c| c.valuation());
    let unit = matches!(vb0, Some(ExtVal::Finite(v)) if v.is_zero());
    checks.push(XiCheck {
        name: "b_0 is a unit".into(),
        ok: unit,
        detail: match vb0 {
            Some(v) => format!("v(b_0) = {v}"),
            None => "b is empty".into(),
        },
    });
    let valid = pos && unit;

    // xi_0 = varpi, since p b has vanishing first component
    let normalized = varpi_ref.map(|r| {
        let (ok, detail) = match (r.valuation(), vw) {
            (ExtVal::Finite(vr), ExtVal::Finite(v0)) => {
                let hi = vr.mul_int(witt.p() as u64);
                (vr <= v0 && v0 < hi, format!("{vr} <= v(xi_0) = {v0} < {hi}"))
            }
            (vr, v0) => (false, format!("undecidable: v(varpi_ref) = {vr}, v(xi_0) = {v0}")),
        };
        checks.push(XiCheck {
            name: "v(varpi_ref) <= v(xi_0) < p v(varpi_ref)".into(),
            ok,
            detail,
        });
        ok
    });

    let (tk, detail) = match vw {
        ExtVal::Finite(v) if v == Exponent::ONE => theta_kernel_check(witt, varpi, b),
        v => (false, format!("v(varpi) = {v}, not v(p) = 1")),
    };
    checks.push(XiCheck {
        name: "v(varpi) = v(p) and theta(b) = varpi^sharp / p".into(),
        ok: tk,
        detail,
    });
    XiReport {
        checks,
        valid,
        normalized,
        theta_kernel: tk,
    }
}

fn theta_kernel_check(witt: &Witt<TiltRing>, varpi: &TiltElem, b: &WittVec<TiltElem>) -> (bool, String) {
    let n = b.len() as u64;
    if n < 2 {
        return (false, "b needs length at least 2".into());
    }
    let run = || -> Result<(MixedElem, MixedElem)> {
        let lhs = theta(witt, b, Exponent::int(n - 1))?;
        let rhs = sharp(varpi, Exponent::int(n))?.shift_down(Exponent::ONE)?;
        Ok((lhs, rhs))
    };
    match run() {
        Ok((l, r)) => (l == r, format!("theta(b) = {l}, varpi^sharp / p = {r} mod p^{}", n - 1)),
        Err(e) => (false, e.to_string()),
    }
}

/// Result of reducing `x` modulo `(xi, p^n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// `x = [y] a mod (xi, p^n)` with `a` a unit, after `steps` divisions by `p`.
    Factored {
        y: TiltElem,
        a: WittVec<TiltElem>,
        steps: usize,
    },
    /// `x` lies in `(xi, p^n)`.
    Zero { n: usize },
}

/// Whether `y` lies in `(varpi)`, or an error if precision cannot tell.
fn in_varpi(y: &TiltElem, vw: Exponent) -> Result<bool> {
    match y.valuation() {
        ExtVal::Finite(v) => Ok(v >= vw),
        ExtVal::AtLeast(e) if e >= vw => Ok(true),
        ExtVal::AtLeast(e) => Err(Error::precision(
            "deciding membership in (varpi)",
            format!("t-precision {vw}"),
            e,
        )),
        ExtVal::Infinity => Ok(true),
    }
}

/// `(x_1^{1/p}, x_2^{1/p}, ...)`, i.e. `(x - [x_0]) / p`.
fn shift_off_first(x: &WittVec<TiltElem>) -> WittVec<TiltElem> {
    WittVec::new(x.comps[1..].iter().map(|c| c.inv_frobenius()).collect())
}

/// `x' = (x - [x_0]) / p + b [x_0 / varpi]`, so that `x = p x' mod xi`.
fn successor(witt: &Witt<TiltRing>, x: &WittVec<TiltElem>, xi: &XiParam) -> Result<WittVec<TiltElem>> {
    let n = x.len() - 1;
    if n == 0 {
        return Ok(WittVec::new(Vec::new()));
    }
    let z = x.comps[0].div_exact(&xi.varpi)?;
    let rest = shift_off_first(x);
    let bz = witt.mul(&witt.project(&xi.b, n)?, &witt.teichmuller(&z, n))?;
    witt.add(&rest, &bz)
}

/// The reduction `x = [y] a mod (xi, p^n)`.
pub fn untilt_reduce(
    witt: &Witt<TiltRing>,
    x: &WittVec<TiltElem>,
    xi: &XiParam,
    n: usize,
) -> Result<Reduced> {
    if n == 0 || x.len() < n || xi.len() < n {
        return Err(Error::precision(
            format!("reduction mod (xi, p^{n})"),
            format!("Witt length {n}"),
            format!("x has {}, b has {}", x.len(), xi.len()),
        ));
    }
    let vw = xi.v_varpi()?;
    let mut cur = witt.project(x, n)?;
    let mut steps = 0usize;
    loop {
        let len = cur.len();
        if len == 0 {
            return Ok(Reduced::Zero { n });
        }
        let x0 = cur.comps[0].clone();
        if in_varpi(&x0, vw)? {
            cur = successor(witt, &cur, xi)?;
            steps += 1;
            continue;
        }
        let v0 = x0.valuation().finite().expect("decided non-member has finite valuation");
        // x = [x_0] + p z'' with p = [varpi] b^{-1} mod xi
        let b = witt.project(&xi.b, len)?;
        let binv = witt.inverse_unit(&b)?;
        let mut a = witt.one(len);
        if len > 1 {
            let mut zpp = shift_off_first(&cur);
            zpp.comps.push(witt.ring.zero());
            let ratio = xi.varpi.div_exact(&x0)?;
            let corr = witt.mul(&witt.mul(&witt.teichmuller(&ratio, len), &binv)?, &zpp)?;
            a = witt.add(&a, &corr)?;
        }
        for _ in 0..steps {
            a = witt.mul(&a, &binv)?;
        }
        let y = scale_by_varpi_pow(&x0, &xi.varpi, vw, v0, steps);
        return Ok(Reduced::Factored { y, a, steps });
    }
}

/// `varpi^k x0`, at the precision both factors support.
fn scale_by_varpi_pow(x0: &TiltElem, varpi: &TiltElem, vw: Exponent, v0: Exponent, k: usize) -> TiltElem {
    if k == 0 {
        return x0.clone();
    }
    let k64 = k as u64;
    // varpi^k is known mod t^{M + (k-1) v(varpi)}
    let pw = varpi.precision() + vw.mul_int(k64 - 1);
    let wk = varpi.with_precision(pw).pow(k64);
    let prec = (pw + v0).min(x0.precision() + vw.mul_int(k64));
    &wk.with_precision(prec) * &x0.with_precision(prec)
}

/// `v_xi(x) = v(y)` for `x = [y] a mod xi`; `AtLeast(n v(varpi))` when `x`
/// vanishes mod `(xi, p^n)`.
pub fn v_xi(witt: &Witt<TiltRing>, x: &WittVec<TiltElem>, xi: &XiParam, n: usize) -> Result<ExtVal> {
    let vw = xi.v_varpi()?;
    Ok(match untilt_reduce(witt, x, xi, n)? {
        Reduced::Factored { y, .. } => y.valuation(),
        Reduced::Zero { n } => ExtVal::AtLeast(vw.mul_int(n as u64)),
    })
}

/// An element of `W(O)/(xi)` known mod `p^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UntiltElem {
    /// Standard `xi`: the class is identified with `theta(x)`.
    Mixed(MixedElem),
    Reduced(Reduced),
}

pub fn untilt(witt: &Witt<TiltRing>, x: &WittVec<TiltElem>, xi: &XiParam, n: usize) -> Result<UntiltElem> {
    if xi.is_standard() {
        Ok(UntiltElem::Mixed(theta(witt, x, Exponent::int(n as u64))?))
    } else {
        Ok(UntiltElem::Reduced(untilt_reduce(witt, x, xi, n)?))
    }
}

impl UntiltElem {
    pub fn to_json(&self, witt: &Witt<TiltRing>) -> Value {
        match self {
            UntiltElem::Mixed(m) => json!({"kind": "mixed", "value": m.to_json()}),
            UntiltElem::Reduced(Reduced::Factored { y, a, steps }) => json!({
                "kind": "reduced", "y": y.to_json(), "a": witt.to_json(a), "steps": steps,
            }),
            UntiltElem::Reduced(Reduced::Zero { n }) => json!({"kind": "zero", "n": n}),
        }
    }

    pub fn describe(&self, witt: &Witt<TiltRing>) -> String {
        match self {
            UntiltElem::Mixed(m) => m.to_string(),
            UntiltElem::Reduced(Reduced::Factored { y, a, .. }) => {
                format!("[{y}] * {}", witt.format(a))
            }
            UntiltElem::Reduced(Reduced::Zero { n }) => format!("0 (mod xi, p^{n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DxiResult {
    pub bounds: NormBounds,
    /// Recursion steps taken before a base case fired.
    pub steps: usize,
    /// False when all `n` steps were used without reaching a base case.
    pub stabilized: bool,
}

/// `t_n(x, y)`: `D(x_0, y_0)` if `x_0` is not in `(varpi)`, `|y_0|` if only
/// `y_0` is outside, otherwise `|varpi| t_{n-1}(x', y')`.
pub fn d_xi(
    witt: &Witt<TiltRing>,
    x: &WittVec<TiltElem>,
    y: &WittVec<TiltElem>,
    xi: &XiParam,
    n: usize,
) -> Result<DxiResult> {
    if n == 0 || x.len() < n || y.len() < n || xi.len() < n {
        return Err(Error::precision(
            format!("D_xi recursion of depth {n}"),
            format!("Witt length {n}"),
            format!("x: {}, y: {}, b: {}", x.len(), y.len(), xi.len()),
        ));
    }
    let vw = xi.v_varpi()?;
    let mut xc = witt.project(x, n)?;
    let mut yc = witt.project(y, n)?;
    for k in 0..n {
        let scale = vw.mul_int(k as u64);
        let (x0, y0) = (&xc.comps[0], &yc.comps[0]);
        if !in_varpi(x0, vw)? {
            return Ok(DxiResult {
                bounds: d_from_valuations(x0.valuation(), y0.valuation()).scale(scale),
                steps: k,
                stabilized: true,
            });
        }
        if !in_varpi(y0, vw)? {
            return Ok(DxiResult {
                bounds: norm_of(y0.valuation()).scale(scale),
                steps: k,
                stabilized: true,
            });
        }
        xc = successor(witt, &xc, xi)?;
        yc = successor(witt, &yc, xi)?;
    }
    Ok(DxiResult {
        bounds: NormBounds {
            lo: Norm::Zero,
            hi: Norm::AlphaPow(vw.mul_int(n as u64)),
        },
        steps: n,
        stabilized: false,
    })
}

/// `D_xi` from the valuations: `0` when `v_xi(x) <= v_xi(y)`, else `|y|_xi`.
pub fn d_xi_direct(
    witt: &Witt<TiltRing>,
    x: &WittVec<TiltElem>,
    y: &WittVec<TiltElem>,
    xi: &XiParam,
    n: usize,
) -> Result<NormBounds> {
    Ok(d_from_valuations(v_xi(witt, x, xi, n)?, v_xi(witt, y, xi, n)?))
}
