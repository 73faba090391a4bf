//! Text and JSON forms of elements.
//!
//! Text: a signed sum of terms `c`, `c*v^e`, `v^e`, `v` where `v` is `p` or
//! `t` and `e` is `n` or `(a/b)`. Non-canonical input is normalized.
//! JSON: `{p, precision: [num, denlog], digits: [[num, denlog, digit], ...]}`.

use serde::{Deserialize, Serialize};

use super::exponent::Exponent;
use super::{MixedElem, ModelParams, TiltElem};
use crate::error::{Error, Result};

struct Scanner<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::syntax(self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn int(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::syntax(start, "expected an integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::syntax(start, "integer out of range"))
    }
}

/// Parses a sum of `c * var^e` terms into `(coefficient, exponent)` pairs.
pub fn parse_terms(text: &str, var: char, p: u32) -> Result<Vec<(i64, Exponent)>> {
    let mut sc = Scanner {
        s: text.as_bytes(),
        pos: 0,
    };
    let v = var as u8;
    let mut out = Vec::new();
    let mut first = true;
    loop {
        let mut sign = 1i64;
        if sc.eat(b'-') {
            sign = -1;
        } else if !sc.eat(b'+') && !first {
            break;
        }
        first = false;
        let mut coef = 1i64;
        let mut has_coef = false;
        if matches!(sc.peek(), Some(c) if c.is_ascii_digit()) {
            let at = sc.pos;
            coef = i64::try_from(sc.int()?).map_err(|_| Error::syntax(at, "coefficient too large"))?;
            has_coef = true;
        }
        let mut e = Exponent::ZERO;
        let has_mul = has_coef && sc.eat(b'*');
        if sc.eat(v) {
            e = Exponent::ONE;
            if sc.eat(b'^') {
                e = if sc.eat(b'(') {
                    let at = sc.pos;
                    let a = sc.int()?;
                    sc.expect(b'/')?;
                    let b = sc.int()?;
                    sc.expect(b')')?;
                    Exponent::from_fraction(p, a, b).map_err(|err| Error::syntax(at, err.to_string()))?
                } else {
                    Exponent::int(sc.int()?)
                };
            }
        } else if has_mul || !has_coef {
            return Err(Error::syntax(sc.pos, format!("expected a term in `{var}`")));
        }
        out.push((sign * coef, e));
    }
    if sc.peek().is_some() {
        return Err(Error::syntax(sc.pos, "unexpected trailing input"));
    }
    Ok(out)
}

impl MixedElem {
    pub fn parse(params: ModelParams, precision: Exponent, text: &str) -> Result<MixedElem> {
        let terms = parse_terms(text, 'p', params.p)?;
        Ok(MixedElem::from_terms(params, precision, &terms))
    }

    pub fn to_json(&self) -> ElemJson {
        ElemJson::encode(self.p(), self.precision(), self.digits())
    }

    pub fn from_json(j: &ElemJson) -> Result<MixedElem> {
        let (params, prec, ds) = j.decode()?;
        Ok(MixedElem::from_digits(params, prec, &ds))
    }
}

impl TiltElem {
    pub fn parse(params: ModelParams, precision: Exponent, text: &str) -> Result<TiltElem> {
        let terms = parse_terms(text, 't', params.p)?;
        Ok(TiltElem::from_terms(params, precision, &terms))
    }

    pub fn to_json(&self) -> ElemJson {
        ElemJson::encode(self.p(), self.precision(), self.digits())
    }

    pub fn from_json(j: &ElemJson) -> Result<TiltElem> {
        let (params, prec, ds) = j.decode()?;
        Ok(TiltElem::from_digits(params, prec, &ds))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemJson {
    pub p: u32,
    pub precision: [u64; 2],
    pub digits: Vec<[u64; 3]>,
}

impl ElemJson {
    fn encode(p: u32, precision: Exponent, ds: &[(Exponent, u8)]) -> ElemJson {
        ElemJson {
            p,
            precision: [precision.num(), precision.den_log(p) as u64],
            digits: ds
                .iter()
                .map(|(e, d)| [e.num(), e.den_log(p) as u64, *d as u64])
                .collect(),
        }
    }

    fn decode(&self) -> Result<(ModelParams, Exponent, Vec<(Exponent, u8)>)> {
        let params = ModelParams::new(self.p)?;
        let exp = |num: u64, k: u64| -> Result<Exponent> {
            let k = u32::try_from(k).map_err(|_| Error::Param("denominator exponent too large".into()))?;
            Exponent::new(self.p, num, k)
        };
        let precision = exp(self.precision[0], self.precision[1])?;
        let mut ds = Vec::with_capacity(self.digits.len());
        for [n, k, d] in &self.digits {
            if *d >= self.p as u64 {
                return Err(Error::Param(format!("digit {d} out of range for p = {}", self.p)));
            }
            ds.push((exp(*n, *k)?, *d as u8));
        }
        Ok((params, precision, ds))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let m = ModelParams::new(2).unwrap();
        let a = MixedElem::parse(m, Exponent::int(3), "1 + 3*p^(5/4)").unwrap();
        assert_eq!(a.to_string(), "1 + p^(5/4) + p^(9/4)");
        let b = MixedElem::parse(m, Exponent::int(2), "p^(1/2) + p^(1/2) + 2").unwrap();
        assert_eq!(b.to_string(), "p + p^(3/2)");
        let c = MixedElem::parse(m, Exponent::int(2), "-1").unwrap();
        assert_eq!(c.to_string(), "1 + p");
        let y = TiltElem::parse(m, Exponent::int(2), "t^(1/2) + t - t").unwrap();
        assert_eq!(y.to_string(), "t^(1/2)");
    }

    #[test]
    fn rejects_bad_input() {
        let m = ModelParams::new(3).unwrap();
        assert!(matches!(
            MixedElem::parse(m, Exponent::int(2), "p^(1/2)"),
            Err(Error::Syntax { .. })
        ));
        assert!(MixedElem::parse(m, Exponent::int(2), "2*").is_err());
        assert!(MixedElem::parse(m, Exponent::int(2), "t").is_err());
        assert!(MixedElem::parse(m, Exponent::int(2), "1 1").is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = ModelParams::new(3).unwrap();
        let a = MixedElem::parse(m, Exponent::int(2), "2 + p^(1/9) + 2*p^(4/3)").unwrap();
        let j = a.to_json();
        assert_eq!(j.digits[1], [1, 2, 1]);
        let s = serde_json::to_string(&j).unwrap();
        let back: ElemJson = serde_json::from_str(&s).unwrap();
        assert_eq!(MixedElem::from_json(&back).unwrap(), a);
    }
}
