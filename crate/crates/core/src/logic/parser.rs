//! Recursive-descent parser for terms and formulas.
//!
//! ```text
//! formula  := ("sup" | "inf") IDENT "in" over ":" formula | dotminus
//! dotminus := product (".-" product)*
//! product  := RAT "*" power | power ("*" power)*
//! power    := fatom ("^" INT)?
//! fatom    := RAT | "alpha" ("^" exp)? | "D(" term "," term ")" | "dist(" term "," term ")"
//!           | "|" term "|" | ("max" | "min") "(" formula ("," formula)* ")"
//!           | "lim(" formula ("|" formula)* ";" formula ("," formula)* ")" | "(" formula ")"
//! over     := "{" witness ("," witness)* "}" | witness
//! witness  := "root(" term ")" | "divide(" term "," term ")" | "normapprox(" RAT ")"
//!           | UPPER-IDENT | term
//! term     := prod (("+" | "-") prod)*
//! prod     := unary ("*" unary)*
//! unary    := "-" unary | tpow
//! tpow     := tatom ("^" (INT | exp))?
//! tatom    := INT | IDENT ("[" INT "]")? | "(" term ")" | ("add" | "sub" | "mul") "(" term "," term ")"
//!           | "neg(" term ")"
//! exp      := "(" INT ("/" INT)? ")"
//! ```
//!
//! In terms, `p` is the integer `p`, `w` and `t` the uniformizer, `w_i` its
//! `p^i`-th root; `p^(a/b)` and `w^(a/b)` are fractional powers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ast::{Formula, Term, Witness, MAX_ARITY};
use crate::error::{Error, Result};
use crate::perfring::Exponent;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(u64),
    Ident(String),
    Sym(&'static str),
}

const SYMS: [&str; 17] = [
    ".-", "(", ")", ",", "+", "-", "*", "^", "/", "|", ";", ":", "{", "}", "[", "]", "=",
];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i]
                .parse()
                .map_err(|_| Error::syntax(start, "integer literal too large"))?;
            out.push((start, Tok::Num(n)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        for s in SYMS {
            if text[i..].starts_with(s) {
                out.push((i, Tok::Sym(s)));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(Error::syntax(i, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    p: u32,
}

impl Parser {
    fn new(text: &str, p: u32) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
            p,
        })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        };
        Error::syntax(self.offset(), format!("{}, found {found}", msg.into()))
    }

    fn num(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected an identifier")),
        }
    }

    fn is_call(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == name)
            && matches!(self.peek_at(1), Some(Tok::Sym("(")))
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    /// `INT ("/" INT)?`
    fn rational(&mut self) -> Result<BigRational> {
        let at = self.offset();
        let n = self.num()?;
        let d = if self.eat("/") { self.num()? } else { 1 };
        if d == 0 {
            return Err(Error::syntax(at, "zero denominator"));
        }
        Ok(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// `"(" INT ("/" INT)? ")"` or a bare `INT`, as an exponent.
    fn exponent(&mut self) -> Result<Exponent> {
        let at = self.offset();
        let (n, d) = if self.eat("(") {
            let n = self.num()?;
            let d = if self.eat("/") { self.num()? } else { 1 };
            self.expect(")")?;
            (n, d)
        } else {
            (self.num()?, 1)
        };
        Exponent::from_fraction(self.p, n, d).map_err(|e| Error::syntax(at, e.to_string()))
    }

    fn small_int(&self, n: u64, at: usize) -> Result<u32> {
        u32::try_from(n).map_err(|_| Error::syntax(at, "exponent too large"))
    }

    // ---- terms ----

    fn term(&mut self) -> Result<Term> {
        let mut t = self.tprod()?;
        loop {
            if self.eat("+") {
                t = Term::add(t, self.tprod()?);
            } else if self.eat("-") {
                t = Term::sub(t, self.tprod()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn tprod(&mut self) -> Result<Term> {
        let mut t = self.tunary()?;
        while self.eat("*") {
            t = Term::mul(t, self.tunary()?);
        }
        Ok(t)
    }

    fn tunary(&mut self) -> Result<Term> {
        if self.eat("-") {
            return Ok(match self.tunary()? {
                Term::Int(k) if k > 0 => Term::Int(-k),
                t => Term::neg(t),
            });
        }
        self.tpow()
    }

    fn tpow(&mut self) -> Result<Term> {
        let base = self.tatom()?;
        if !self.eat("^") {
            return Ok(base);
        }
        let at = self.offset();
        let e = self.exponent()?;
        match base {
            Term::P if !e.is_integer() => Ok(Term::PPow(e)),
            Term::Unif(u) if u == Exponent::ONE => Ok(Term::Unif(e)),
            b if e.is_integer() => Ok(Term::pow(b, self.small_int(e.num(), at)?)),
            _ => Err(Error::syntax(at, "fractional powers are only allowed on `p` and `w`")),
        }
    }

    fn tatom(&mut self) -> Result<Term> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let k = i64::try_from(n).map_err(|_| Error::syntax(at, "integer too large"))?;
                Ok(Term::Int(k))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Some(Tok::Ident(name)) => {
                for (f, arity) in [("add", 2), ("sub", 2), ("mul", 2), ("neg", 1)] {
                    if self.is_call(f) {
                        self.pos += 2;
                        let a = self.term()?;
                        if arity == 1 {
                            self.expect(")")?;
                            return Ok(Term::neg(a));
                        }
                        self.expect(",")?;
                        let b = self.term()?;
                        self.expect(")")?;
                        return Ok(match f {
                            "add" => Term::add(a, b),
                            "sub" => Term::sub(a, b),
                            _ => Term::mul(a, b),
                        });
                    }
                }
                self.pos += 1;
                match name.as_str() {
                    "p" => return Ok(Term::P),
                    "w" | "t" => return Ok(Term::Unif(Exponent::ONE)),
                    _ => {}
                }
                if let Some(i) = name.strip_prefix("w_").and_then(|s| s.parse::<u32>().ok()) {
                    let e = Exponent::new(self.p, 1, i).map_err(|e| Error::syntax(at, e.to_string()))?;
                    return Ok(Term::Unif(e));
                }
                if self.eat("[") {
                    let i = self.num()?;
                    self.expect("]")?;
                    return Ok(Term::Var(format!("{name}[{i}]")));
                }
                Ok(Term::Var(name))
            }
            _ => Err(self.err("expected a term")),
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> Result<Formula> {
        for q in ["sup", "inf"] {
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == q)
                && matches!(self.peek_at(1), Some(Tok::Ident(_)))
            {
                self.pos += 1;
                let var = self.ident()?;
                match self.peek() {
                    Some(Tok::Ident(s)) if s == "in" => self.pos += 1,
                    _ => return Err(self.err("expected `in`")),
                }
                let over = self.over()?;
                self.expect(":")?;
                let body = Box::new(self.formula()?);
                return Ok(if q == "sup" {
                    Formula::Sup { var, over, body }
                } else {
                    Formula::Inf { var, over, body }
                });
            }
        }
        let mut f = self.fprod()?;
        while self.eat(".-") {
            f = Formula::dotminus(f, self.fprod()?);
        }
        Ok(f)
    }

    fn fprod(&mut self) -> Result<Formula> {
        let mut f = if let (Some(Tok::Num(_)), true) = (self.peek(), self.scale_ahead()) {
            let q = self.rational()?;
            self.expect("*")?;
            Formula::Scale(q, Box::new(self.fpow()?))
        } else {
            self.fpow()?
        };
        while self.eat("*") {
            f = Formula::Mul(Box::new(f), Box::new(self.fpow()?));
        }
        Ok(f)
    }

    /// Looks past `INT ("/" INT)?` for a `*`.
    fn scale_ahead(&self) -> bool {
        let k = if matches!(self.peek_at(1), Some(Tok::Sym("/"))) { 3 } else { 1 };
        matches!(self.peek_at(k), Some(Tok::Sym("*")))
    }

    fn fpow(&mut self) -> Result<Formula> {
        let base = self.fatom()?;
        if !self.eat("^") {
            return Ok(base);
        }
        let at = self.offset();
        let k = self.num()?;
        Ok(Formula::pow(base, self.small_int(k, at)?))
    }

    fn args(&mut self) -> Result<Vec<Formula>> {
        let at = self.offset();
        let mut xs = vec![self.formula()?];
        while self.eat(",") {
            xs.push(self.formula()?);
        }
        self.expect(")")?;
        if xs.len() > MAX_ARITY {
            return Err(Error::syntax(at, format!("more than {MAX_ARITY} arguments")));
        }
        Ok(xs)
    }

    fn term_pair(&mut self) -> Result<(Term, Term)> {
        let a = self.term()?;
        self.expect(",")?;
        let b = self.term()?;
        self.expect(")")?;
        Ok((a, b))
    }

    fn fatom(&mut self) -> Result<Formula> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(_)) => {
                let q = self.rational()?;
                if q > BigRational::one() {
                    return Err(Error::syntax(at, "constant outside [0,1]"));
                }
                Ok(Formula::Const(q))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(Tok::Sym("|")) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect("|")?;
                Ok(Formula::norm(t))
            }
            Some(Tok::Ident(name)) => {
                if name == "alpha" {
                    self.pos += 1;
                    let e = if self.eat("^") { self.exponent()? } else { Exponent::ONE };
                    return Ok(Formula::AlphaPow(e));
                }
                if !self.is_call(&name) {
                    return Err(self.err("expected a formula"));
                }
                self.pos += 2;
                match name.as_str() {
                    "D" => {
                        let (a, b) = self.term_pair()?;
                        Ok(Formula::D(a, b))
                    }
                    "dist" => {
                        let (a, b) = self.term_pair()?;
                        Ok(Formula::Dist(a, b))
                    }
                    "max" => Ok(Formula::Max(self.args()?)),
                    "min" => Ok(Formula::Min(self.args()?)),
                    "lim" => {
                        let mut stages = vec![self.formula()?];
                        while self.eat("|") {
                            stages.push(self.formula()?);
                        }
                        self.expect(";")?;
                        let eps = self.args()?;
                        if eps.len() != stages.len() || stages.len() > MAX_ARITY {
                            return Err(Error::syntax(at, "lim needs one bound per stage"));
                        }
                        Ok(Formula::Lim { stages, eps })
                    }
                    _ => Err(Error::syntax(at, format!("unknown connective `{name}`"))),
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    fn over(&mut self) -> Result<Vec<Witness>> {
        if self.eat("{") {
            let mut ws = vec![self.witness()?];
            while self.eat(",") {
                ws.push(self.witness()?);
            }
            self.expect("}")?;
            Ok(ws)
        } else {
            Ok(vec![self.witness()?])
        }
    }

    fn witness(&mut self) -> Result<Witness> {
        if self.is_call("root") {
            self.pos += 2;
            let t = self.term()?;
            self.expect(")")?;
            return Ok(Witness::Root(t));
        }
        if self.is_call("divide") {
            self.pos += 2;
            let (y, x) = self.term_pair()?;
            return Ok(Witness::Divide(y, x));
        }
        if self.is_call("normapprox") {
            self.pos += 2;
            let q = self.rational()?;
            self.expect(")")?;
            if q.is_zero() || q > BigRational::one() {
                return Err(self.err("normapprox needs a target in (0,1]"));
            }
            return Ok(Witness::NormApprox(q));
        }
        if let Some(Tok::Ident(s)) = self.peek() {
            if s.starts_with(|c: char| c.is_ascii_uppercase()) {
                let s = s.clone();
                self.pos += 1;
                return Ok(Witness::Grid(s));
            }
        }
        Ok(Witness::Elem(self.term()?))
    }
}

/// Parses a formula; `p` fixes the denominators allowed in exponents.
pub fn parse_formula(text: &str, p: u32) -> Result<Formula> {
    let mut ps = Parser::new(text, p)?;
    let f = ps.formula()?;
    ps.done()?;
    Ok(f)
}

pub fn parse_term(text: &str, p: u32) -> Result<Term> {
    let mut ps = Parser::new(text, p)?;
    let t = ps.term()?;
    ps.done()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(s: &str) -> Formula {
        let f = parse_formula(s, 2).unwrap();
        let again = parse_formula(&f.to_string(), 2).unwrap();
        assert_eq!(f, again, "{s} printed as {f}");
        f
    }

    #[test]
    fn spec_examples() {
        let f = rt("max(D(x,y), D(y,x))");
        assert_eq!(
            f,
            Formula::Max(vec![
                Formula::D(Term::var("x"), Term::var("y")),
                Formula::D(Term::var("y"), Term::var("x"))
            ])
        );
        let f = rt("D(x, mul(x,x))");
        assert_eq!(f, Formula::D(Term::var("x"), Term::mul(Term::var("x"), Term::var("x"))));
    }

    #[test]
    fn round_trips() {
        rt("sup x in G: inf z in {divide(y, x), divide(x, y)}: min(dist(x*z, y), dist(y*z, x))");
        rt("1/2 * (alpha^(1/2) .- |x - p^(1/2)|)");
        rt("lim(D(x[0], y[0]) | D(x[1], y[1])^2; 0, 0)");
        rt("inf x in normapprox(1/2): max(|x| .- 1/2, 1/2 .- |x|)");
        rt("(D(w_1, x) * alpha)^3 .- 0 .- 1/3");
        rt("sup x in {x + 1, root(x)}: dist(-(x^2), (-x)^2)");
    }

    #[test]
    fn errors_carry_position() {
        match parse_formula("max(D(x,y), )", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("3/2", 2).is_err());
        assert!(parse_term("x^(1/3)", 3).is_err());
        assert!(parse_term("p^(1/3)", 2).is_err());
    }
}
