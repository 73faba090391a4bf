//! The `tiltlab` command line.
//!
//! Every subcommand prints either human-readable text or a JSON document
//! carrying `schema_version`. Exit codes: 0 success, 1 domain or contract
//! error, 2 precision or budget exhausted, 3 usage error.

use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::approx::{tilt_tube_membership, zero_tube_membership, PolySystem, TiltGrid};
use crate::error::{Error, Result};
use crate::logic::{
    bind_omega, dist_to_omega, eval, eval_term, mvf_on_tilt, parse_formula, parse_term, standard_suite,
    translate_tilt, DiscreteModel, Env, MixedModel, Model, Theory, TiltModel,
};
use crate::perfring::{Exponent, MixedElem, ModelParams, TiltElem};
use crate::tilt::{
    d_xi, d_xi_direct, lift_sequence, root_residues, sharp, theta, tilt_roundtrip, untilt, untilt_roundtrip,
    xi_standard, xi_validate, XiParam,
};
use crate::witt::{gen_witt_polys, CoeffRing, Integers, TiltRing, Witt, WittVec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "tiltlab", version, about = "Finite-precision arithmetic on a perfectoid field and its tilt")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// The residue characteristic.
    #[arg(long, global = true, default_value_t = 2)]
    pub p: u32,
    /// Norm of p as a fraction `a/b`; defaults to `1/p`.
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Working precision: `N` for mod `p^N`, or the t-adic precision where noted.
    #[arg(long, global = true, default_value = "3")]
    pub precision: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the number of candidates a search may enumerate.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub budget: u128,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RingKind {
    Mixed,
    Tilt,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WittRing {
    Int,
    Tilt,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Mixed,
    Tilt,
    Discrete,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a ring expression such as `(1 + p)^2 - p^(1/2)`.
    Arith {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_enum, default_value_t = RingKind::Mixed)]
        ring: RingKind,
        /// `name=element`, repeatable.
        #[arg(long)]
        bind: Vec<String>,
    },
    /// Witt vectors and their universal polynomials.
    Witt {
        #[command(subcommand)]
        op: WittCmd,
    },
    /// Lift compatible residues mod p to a root sequence mod `p^N` and tilt it.
    /// A single residue is extended by its chosen p-th roots.
    Tilt {
        #[arg(required = true)]
        residues: Vec<String>,
        /// Length of the lifted sequence.
        #[arg(long, default_value_t = 3)]
        len: usize,
    },
    /// `y^sharp mod p^N` for a tilt element `y`.
    Sharp {
        #[arg(allow_hyphen_values = true)]
        y: String,
    },
    /// `theta(w) mod p^N` for a Witt expression over the tilt, e.g. `[t] - p*1`.
    Theta {
        #[arg(allow_hyphen_values = true)]
        w: String,
    },
    Xi {
        #[command(subcommand)]
        op: XiCmd,
    },
    Untilt {
        #[command(subcommand)]
        op: UntiltCmd,
    },
    /// The recursion `D_xi(x, y)` next to its valuation-based definition.
    Dxi {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        y: String,
        #[command(flatten)]
        xi: XiArgs,
    },
    Omega {
        #[command(subcommand)]
        op: OmegaCmd,
    },
    /// Evaluate a continuous-logic formula.
    Eval {
        #[arg(allow_hyphen_values = true)]
        formula: String,
        #[arg(long, value_enum, default_value_t = ModelKind::Mixed)]
        model: ModelKind,
        /// `name=element`, repeatable.
        #[arg(long)]
        bind: Vec<String>,
        /// `NAME=k`: the grid with exponent denominators `p^k`, repeatable.
        #[arg(long)]
        grid: Vec<String>,
        /// Truncation index of the discrete model.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Read the formula as one about the tilt and translate it to root
        /// sequences of this length in the mixed model.
        #[arg(long)]
        translate: Option<u32>,
        /// `name=residue`: bind the root sequence of a residue (with `--translate`).
        #[arg(long)]
        omega: Vec<String>,
    },
    /// Run an axiom suite on its standard sample.
    Axioms {
        #[arg(long)]
        theory: String,
        /// Run MVF on the tilt model instead.
        #[arg(long)]
        tilt: bool,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Mixed: untilt and re-theta an element mod `p^N`. Tilt: re-tilt an
    /// element mod `t^N`.
    Roundtrip {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum, default_value_t = RingKind::Mixed)]
        kind: RingKind,
    },
    Approx {
        #[command(subcommand)]
        op: ApproxCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum WittCmd {
    /// Print `S_i`, `P_i`, `N_i` for `i < n`.
    Gen {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    Add(WittBinary),
    Mul(WittBinary),
    /// The Teichmuller vector `[a]`.
    Teich {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = WittRing::Tilt)]
        ring: WittRing,
    },
    /// Coefficients `c_i` with `w = sum [c_i] p^i` over the tilt.
    Expand {
        #[arg(allow_hyphen_values = true)]
        w: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Args, Debug)]
pub struct WittBinary {
    #[arg(allow_hyphen_values = true)]
    pub a: String,
    #[arg(allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = WittRing::Int)]
    pub ring: WittRing,
}

#[derive(Args, Debug, Clone)]
pub struct XiArgs {
    /// Defaults to `t`.
    #[arg(long)]
    pub varpi: Option<String>,
    /// Witt expression over the tilt; defaults to `1`.
    #[arg(long)]
    pub b: Option<String>,
    /// Witt length, i.e. work mod `p^n`.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum XiCmd {
    /// Check `xi = [varpi] - p b` is a valid untilt parameter.
    Validate {
        #[command(flatten)]
        xi: XiArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum UntiltCmd {
    /// Reduce a Witt vector modulo `(xi, p^n)`.
    Reduce {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        xi: XiArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum OmegaCmd {
    /// Enclosure of the distance of `(x_0, x_1, ...)` to compatible root sequences.
    Dist {
        #[arg(required = true)]
        entries: Vec<String>,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ApproxCmd {
    /// Tube membership for the zero set of a polynomial system.
    Tube {
        /// `;`-separated polynomials in variables ordered by name.
        #[arg(long)]
        poly: String,
        /// One coordinate per variable, repeatable.
        #[arg(long, required = true, allow_hyphen_values = true, num_args = 1)]
        point: Vec<String>,
        #[arg(long)]
        gamma: String,
        /// Decide membership of a tilt point in the tube around the tilted zero set.
        #[arg(long)]
        tilt: bool,
        /// Zero set tested mod `p^depth` (tilt side).
        #[arg(long, default_value_t = 2)]
        depth: u64,
        /// Candidate exponents have denominators dividing `p^k` (tilt side).
        #[arg(long, default_value_t = 1)]
        den_log: u32,
    },
}

/// Output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    text: String,
    json: Value,
}

fn report(text: impl Into<String>, json: Value) -> Report {
    Report { text: text.into(), json }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let msg = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: msg,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 3,
                    stdout: String::new(),
                    stderr: msg,
                },
            };
        }
    };
    let name = command_name(&cli.cmd);
    match dispatch(&cli) {
        Ok(r) => {
            let stdout = match cli.global.format {
                Format::Text => {
                    let mut s = r.text;
                    if !s.ends_with('\n') {
                        s.push('\n');
                    }
                    s
                }
                Format::Json => {
                    let doc = json!({"schema_version": SCHEMA_VERSION, "command": name, "result": r.json});
                    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
                }
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = match e {
                Error::Param(_) => 3,
                _ => e.exit_code(),
            };
            let stdout = match cli.global.format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "schema_version": SCHEMA_VERSION,
                        "command": name,
                        "error": e.to_string(),
                        "exit_code": code,
                    }))
                    .unwrap()
                ),
                Format::Text => String::new(),
            };
            Outcome {
                code,
                stdout,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn command_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Arith { .. } => "arith",
        Cmd::Witt { op } => match op {
            WittCmd::Gen { .. } => "witt gen",
            WittCmd::Add(_) => "witt add",
            WittCmd::Mul(_) => "witt mul",
            WittCmd::Teich { .. } => "witt teich",
            WittCmd::Expand { .. } => "witt expand",
        },
        Cmd::Tilt { .. } => "tilt",
        Cmd::Sharp { .. } => "sharp",
        Cmd::Theta { .. } => "theta",
        Cmd::Xi { .. } => "xi validate",
        Cmd::Untilt { .. } => "untilt reduce",
        Cmd::Dxi { .. } => "dxi",
        Cmd::Omega { .. } => "omega dist",
        Cmd::Eval { .. } => "eval",
        Cmd::Axioms { .. } => "axioms",
        Cmd::Roundtrip { .. } => "roundtrip",
        Cmd::Approx { .. } => "approx tube",
    }
}

/// `a` or `a/b` with `b` a power of `p`.
pub fn parse_exponent(text: &str, p: u32) -> Result<Exponent> {
    let bad = || Error::Param(format!("`{text}` is not a non-negative rational with denominator a power of {p}"));
    let (a, b) = match text.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let a: u64 = a.parse().map_err(|_| bad())?;
    let b: u64 = b.parse().map_err(|_| bad())?;
    Exponent::from_fraction(p, a, b).map_err(|_| bad())
}

struct Ctx {
    params: ModelParams,
    precision: Exponent,
    budget: u128,
    seed: u64,
}

impl Ctx {
    fn new(g: &Global) -> Result<Ctx> {
        let params = match &g.alpha {
            None => ModelParams::new(g.p)?,
            Some(a) => {
                let (n, d) = a
                    .split_once('/')
                    .ok_or_else(|| Error::Param(format!("alpha `{a}` must be a fraction a/b")))?;
                let n = n.trim().parse().map_err(|_| Error::Param(format!("bad alpha `{a}`")))?;
                let d = d.trim().parse().map_err(|_| Error::Param(format!("bad alpha `{a}`")))?;
                ModelParams::with_alpha(g.p, n, d)?
            }
        };
        let precision = parse_exponent(&g.precision, g.p)?;
        if precision.is_zero() {
            return Err(Error::Param("precision must be positive".into()));
        }
        Ok(Ctx {
            params,
            precision,
            budget: g.budget,
            seed: g.seed,
        })
    }

    fn p(&self) -> u32 {
        self.params.p
    }

    fn int_precision(&self) -> Result<u64> {
        if !self.precision.is_integer() {
            return Err(Error::Param(format!("this command needs an integer precision, got {}", self.precision)));
        }
        Ok(self.precision.num())
    }

    /// t-adic precision that `sharp` mod `p^N` consumes.
    fn tilt_precision_for(&self, n: u64) -> Exponent {
        Exponent::int((self.p() as u64).pow(n.saturating_sub(1) as u32))
    }

    fn mixed(&self, s: &str) -> Result<MixedElem> {
        MixedElem::parse(self.params, self.precision, s)
    }

    fn tilt_witt(&self, prec: Exponent) -> Witt<TiltRing> {
        Witt::new(TiltRing::new(self.params, prec))
    }
}

fn split_binding(b: &str) -> Result<(&str, &str)> {
    b.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Param(format!("binding `{b}` is not of the form name=value")))
}

/// Parses Witt expressions: `[a]` (Teichmuller), `W(c0; c1; ...)`, integers,
/// `p`, with `+`, `-`, `*` and parentheses.
pub struct WittExpr<'a, R: CoeffRing> {
    witt: &'a Witt<R>,
    n: usize,
    comp: &'a dyn Fn(&str) -> Result<R::Elem>,
    src: &'a str,
    pos: usize,
}

impl<'a, R: CoeffRing> WittExpr<'a, R> {
    pub fn parse(
        witt: &'a Witt<R>,
        n: usize,
        comp: &'a dyn Fn(&str) -> Result<R::Elem>,
        src: &'a str,
    ) -> Result<WittVec<R::Elem>> {
        let mut ps = WittExpr { witt, n, comp, src, pos: 0 };
        let v = ps.sum()?;
        ps.ws();
        if ps.pos < src.len() {
            return Err(Error::syntax(ps.pos, "unexpected trailing input"));
        }
        Ok(v)
    }

    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.src[self.pos..].chars().next()
    }

    fn sum(&mut self) -> Result<WittVec<R::Elem>> {
        let mut acc = self.prod()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.prod()?;
            acc = if c == '+' { self.witt.add(&acc, &rhs)? } else { self.witt.sub(&acc, &rhs)? };
        }
        Ok(acc)
    }

    fn prod(&mut self) -> Result<WittVec<R::Elem>> {
        let mut acc = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let rhs = self.atom()?;
            acc = self.witt.mul(&acc, &rhs)?;
        }
        Ok(acc)
    }

    /// The text up to the bracket matching the one just consumed.
    fn bracketed(&mut self, open: char, close: char) -> Result<&'a str> {
        let start = self.pos;
        let mut depth = 1;
        for (i, c) in self.src[start..].char_indices() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    self.pos = start + i + 1;
                    return Ok(&self.src[start..start + i]);
                }
            }
        }
        Err(Error::syntax(start, format!("missing `{close}`")))
    }

    fn atom(&mut self) -> Result<WittVec<R::Elem>> {
        let start = self.pos;
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let a = self.atom()?;
                self.witt.neg(&a)
            }
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::syntax(self.pos, "expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('[') => {
                self.pos += 1;
                let inner = self.bracketed('[', ']')?;
                Ok(self.witt.teichmuller(&(self.comp)(inner)?, self.n))
            }
            Some('W') if self.src[self.pos..].starts_with("W(") => {
                self.pos += 2;
                let inner = self.bracketed('(', ')')?;
                let parts: Vec<&str> = inner.split(';').collect();
                if parts.len() > self.n {
                    return Err(Error::syntax(start, format!("{} components, expected at most {}", parts.len(), self.n)));
                }
                let mut comps = parts.iter().map(|s| (self.comp)(s.trim())).collect::<Result<Vec<_>>>()?;
                comps.resize(self.n, self.witt.ring.zero());
                Ok(WittVec::new(comps))
            }
            Some('p') => {
                self.pos += 1;
                self.witt.from_int(self.witt.p() as i64, self.n)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.src[self.pos..].chars().take_while(|c| c.is_ascii_digit()).count();
                let k: i64 = self.src[self.pos..self.pos + digits]
                    .parse()
                    .map_err(|_| Error::syntax(self.pos, "integer too large"))?;
                self.pos += digits;
                self.witt.from_int(k, self.n)
            }
            _ => Err(Error::syntax(self.pos, "expected `[a]`, `W(...)`, an integer, `p` or `(`")),
        }
    }
}

fn int_comp(s: &str) -> Result<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| Error::Param(format!("`{s}` is not an integer")))
}

fn witt_json<R: CoeffRing>(witt: &Witt<R>, w: &WittVec<R::Elem>) -> (String, Value) {
    (witt.format(w), witt.to_json(w))
}

fn xi_from_args(ctx: &Ctx, a: &XiArgs, prec: Exponent) -> Result<XiParam> {
    let witt = ctx.tilt_witt(prec);
    let mut xi = xi_standard(ctx.params, a.n, prec);
    if let Some(v) = &a.varpi {
        xi.varpi = TiltElem::parse(ctx.params, prec, v)?;
    }
    if let Some(b) = &a.b {
        let comp = |s: &str| TiltElem::parse(ctx.params, prec, s);
        xi.b = WittExpr::parse(&witt, a.n, &comp, b)?;
    }
    Ok(xi)
}

/// t-precision used for Witt vectors over the tilt mod `p^n`.
fn xi_precision(ctx: &Ctx, n: usize) -> Exponent {
    Exponent::int((ctx.p() as u64).pow(n as u32))
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let ctx = Ctx::new(&cli.global)?;
    let p = ctx.p();
    match &cli.cmd {
        Cmd::Arith { expr, ring, bind } => {
            let t = parse_term(expr, p)?;
            match ring {
                RingKind::Mixed => arith(&MixedModel { params: ctx.params, precision: ctx.precision }, &t, bind),
                RingKind::Tilt => arith(&TiltModel { params: ctx.params, precision: ctx.precision }, &t, bind),
            }
        }
        Cmd::Witt { op } => witt_cmd(&ctx, op),
        Cmd::Tilt { residues, len } => {
            let n = ctx.int_precision()?;
            let one = Exponent::ONE;
            let mut rs = residues
                .iter()
                .map(|s| MixedElem::parse(ctx.params, one, s))
                .collect::<Result<Vec<_>>>()?;
            if rs.len() == 1 {
                rs = root_residues(&rs[0], len + n as usize - 1);
            }
            let omega = lift_sequence(&rs, n, *len)?;
            let y = omega.tilt();
            let text = format!(
                "omega = ({})\ntilt = {y} (mod t^{})",
                omega.entries().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "),
                y.precision()
            );
            Ok(report(text, json!({"omega": omega.to_json(), "tilt": y.to_json(), "tilt_text": y.to_string()})))
        }
        Cmd::Sharp { y } => {
            let n = ctx.precision;
            let y = TiltElem::parse(ctx.params, ctx.tilt_precision_for(n.ceil()), y)?;
            let s = sharp(&y, n)?;
            Ok(report(s.to_string(), json!({"value": s.to_json(), "text": s.to_string()})))
        }
        Cmd::Theta { w } => {
            let n = ctx.precision;
            let len = n.ceil() as usize;
            let witt = ctx.tilt_witt(ctx.tilt_precision_for(n.ceil()));
            let prec = witt.ring.precision;
            let comp = |s: &str| TiltElem::parse(ctx.params, prec, s);
            let wv = WittExpr::parse(&witt, len, &comp, w)?;
            let v = theta(&witt, &wv, n)?;
            Ok(report(v.to_string(), json!({"value": v.to_json(), "text": v.to_string()})))
        }
        Cmd::Xi { op: XiCmd::Validate { xi } } => {
            let prec = xi_precision(&ctx, xi.n);
            let witt = ctx.tilt_witt(prec);
            let x = xi_from_args(&ctx, xi, prec)?;
            let t = TiltElem::t_pow(ctx.params, prec, Exponent::ONE);
            let r = xi_validate(&witt, &x.varpi, &x.b, Some(&t));
            let mut text = String::new();
            for c in &r.checks {
                text.push_str(&format!("[{}] {}: {}\n", if c.ok { "ok" } else { "FAIL" }, c.name, c.detail));
            }
            text.push_str(&format!("valid: {}", r.valid));
            Ok(report(text, serde_json::to_value(&r).unwrap()))
        }
        Cmd::Untilt { op: UntiltCmd::Reduce { x, xi } } => {
            let prec = xi_precision(&ctx, xi.n);
            let witt = ctx.tilt_witt(prec);
            let xp = xi_from_args(&ctx, xi, prec)?;
            let comp = |s: &str| TiltElem::parse(ctx.params, prec, s);
            let xv = WittExpr::parse(&witt, xi.n, &comp, x)?;
            let u = untilt(&witt, &xv, &xp, xi.n)?;
            Ok(report(u.describe(&witt), u.to_json(&witt)))
        }
        Cmd::Dxi { x, y, xi } => {
            let prec = xi_precision(&ctx, xi.n);
            let witt = ctx.tilt_witt(prec);
            let xp = xi_from_args(&ctx, xi, prec)?;
            let comp = |s: &str| TiltElem::parse(ctx.params, prec, s);
            let xv = WittExpr::parse(&witt, xi.n, &comp, x)?;
            let yv = WittExpr::parse(&witt, xi.n, &comp, y)?;
            let r = d_xi(&witt, &xv, &yv, &xp, xi.n)?;
            let direct = d_xi_direct(&witt, &xv, &yv, &xp, xi.n)?;
            let text = format!(
                "{} (steps {}, stabilized {})\ndirect: {direct}",
                r.bounds, r.steps, r.stabilized
            );
            Ok(report(
                text,
                json!({
                    "value": r.bounds.to_string(),
                    "steps": r.steps,
                    "stabilized": r.stabilized,
                    "direct": direct.to_string(),
                }),
            ))
        }
        Cmd::Omega { op: OmegaCmd::Dist { entries, n } } => {
            let xs = entries.iter().map(|s| ctx.mixed(s)).collect::<Result<Vec<_>>>()?;
            let e = dist_to_omega(&xs, *n)?;
            Ok(report(e.to_string(), e.to_json()))
        }
        Cmd::Eval { formula, model, bind, grid, k, translate, omega } => {
            let mut f = parse_formula(formula, p)?;
            if let Some(depth) = translate {
                f = translate_tilt(&f, p, *depth)?;
                let m = MixedModel { params: ctx.params, precision: ctx.precision };
                let mut env = Env::new();
                let n = ctx.int_precision()?;
                for b in omega {
                    let (name, v) = split_binding(b)?;
                    let r = MixedElem::parse(ctx.params, Exponent::ONE, v)?;
                    let rs = root_residues(&r, *depth as usize + n as usize - 1);
                    bind_omega(&mut env, name, &lift_sequence(&rs, n, *depth as usize)?);
                }
                return eval_in(&m, &f, bind, grid, env, ctx.budget);
            }
            match model {
                ModelKind::Mixed => eval_in(
                    &MixedModel { params: ctx.params, precision: ctx.precision },
                    &f,
                    bind,
                    grid,
                    Env::new(),
                    ctx.budget,
                ),
                ModelKind::Tilt => eval_in(
                    &TiltModel { params: ctx.params, precision: ctx.precision },
                    &f,
                    bind,
                    grid,
                    Env::new(),
                    ctx.budget,
                ),
                ModelKind::Discrete => {
                    let m = DiscreteModel { params: ctx.params, k: *k };
                    let mut env = Env::new();
                    env.set("O", m.truncation()?, true);
                    eval_in(&m, &f, bind, grid, env, ctx.budget)
                }
            }
        }
        Cmd::Axioms { theory, tilt, k } => {
            let th: Theory = theory.parse()?;
            let alpha = (ctx.params.alpha_num, ctx.params.alpha_den);
            let r = if *tilt {
                if th != Theory::Mvf {
                    return Err(Error::Param("--tilt runs the MVF suite only".into()));
                }
                mvf_on_tilt(p, alpha, ctx.seed)?
            } else {
                standard_suite(th, p, alpha, *k, ctx.seed)?
            };
            Ok(report(r.to_string(), r.to_json()))
        }
        Cmd::Roundtrip { x, kind } => match kind {
            RingKind::Mixed => {
                let a = ctx.mixed(x)?;
                let b = untilt_roundtrip(&a)?;
                Ok(report(
                    format!("{b}\nidentity: {}", a == b),
                    json!({"input": a.to_json(), "output": b.to_json(), "identity": a == b}),
                ))
            }
            RingKind::Tilt => {
                let y = TiltElem::parse(ctx.params, ctx.precision, x)?;
                let z = tilt_roundtrip(&y)?;
                Ok(report(
                    format!("{z}\nidentity: {}", y == z),
                    json!({"input": y.to_json(), "output": z.to_json(), "identity": y == z}),
                ))
            }
        },
        Cmd::Approx { op: ApproxCmd::Tube { poly, point, gamma, tilt, depth, den_log } } => {
            let f = PolySystem::parse(poly, p)?;
            let gamma = parse_exponent(gamma, p)?;
            if *tilt {
                let grid = TiltGrid {
                    params: ctx.params,
                    precision: ctx.precision,
                    den_log: *den_log,
                    depth: *depth,
                    budget: ctx.budget,
                };
                let y = point
                    .iter()
                    .map(|s| TiltElem::parse(ctx.params, ctx.precision, s))
                    .collect::<Result<Vec<_>>>()?;
                let r = tilt_tube_membership(&f, &y, gamma, &grid)?;
                let mut text = r.verdict.to_string();
                match &r.witness {
                    Some(w) => text.push_str(&format!(
                        "\nwitness: ({})",
                        w.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
                    )),
                    None => text.push_str(&format!("\nsearched {} zero(s)", r.searched)),
                }
                Ok(report(text, r.to_json()))
            } else {
                let x = point.iter().map(|s| ctx.mixed(s)).collect::<Result<Vec<_>>>()?;
                let r = zero_tube_membership(&f, &x, gamma)?;
                let text = format!(
                    "{}\nvaluations: {}",
                    r.verdict,
                    r.valuations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                );
                Ok(report(text, r.to_json()))
            }
        }
    }
}

fn arith<M: Model>(m: &M, t: &crate::logic::Term, bind: &[String]) -> Result<Report>
where
    M::Elem: std::fmt::Display,
{
    let mut env = Env::new();
    for b in bind {
        let (k, v) = split_binding(b)?;
        env.bind(k, m.parse_elem(v)?);
    }
    let v = eval_term(t, m, &env)?;
    let text = v.to_string();
    Ok(report(text.clone(), json!({"text": text})))
}

fn eval_in<M: Model>(
    m: &M,
    f: &crate::logic::Formula,
    bind: &[String],
    grid: &[String],
    mut env: Env<M::Elem>,
    budget: u128,
) -> Result<Report> {
    for b in bind {
        let (k, v) = split_binding(b)?;
        env.bind(k, m.parse_elem(v)?);
    }
    for g in grid {
        let (k, v) = split_binding(g)?;
        let d: u32 = v.parse().map_err(|_| Error::Param(format!("grid `{g}` needs NAME=k")))?;
        env.set(k, m.grid(d, budget)?, false);
    }
    let e = eval(f, m, &mut env)?;
    Ok(report(e.to_string(), e.to_json()))
}

fn witt_cmd(ctx: &Ctx, op: &WittCmd) -> Result<Report> {
    let p = ctx.p();
    match op {
        WittCmd::Gen { n } => {
            let set = gen_witt_polys(p, *n)?;
            Ok(report(
                set.describe(),
                json!({"p": p, "n": n, "polynomials": serde_json::to_value(set.dump()).unwrap()}),
            ))
        }
        WittCmd::Add(b) | WittCmd::Mul(b) => {
            let is_add = matches!(op, WittCmd::Add(_));
            match b.ring {
                WittRing::Int => {
                    let witt = Witt::new(Integers { p });
                    let x = WittExpr::parse(&witt, b.n, &int_comp, &b.a)?;
                    let y = WittExpr::parse(&witt, b.n, &int_comp, &b.b)?;
                    let r = if is_add { witt.add(&x, &y)? } else { witt.mul(&x, &y)? };
                    let (t, j) = witt_json(&witt, &r);
                    Ok(report(t, j))
                }
                WittRing::Tilt => {
                    let witt = ctx.tilt_witt(ctx.precision);
                    let comp = |s: &str| TiltElem::parse(ctx.params, ctx.precision, s);
                    let x = WittExpr::parse(&witt, b.n, &comp, &b.a)?;
                    let y = WittExpr::parse(&witt, b.n, &comp, &b.b)?;
                    let r = if is_add { witt.add(&x, &y)? } else { witt.mul(&x, &y)? };
                    let (t, j) = witt_json(&witt, &r);
                    Ok(report(t, j))
                }
            }
        }
        WittCmd::Teich { a, n, ring } => match ring {
            WittRing::Int => {
                let witt = Witt::new(Integers { p });
                let (t, j) = witt_json(&witt, &witt.teichmuller(&int_comp(a)?, *n));
                Ok(report(t, j))
            }
            WittRing::Tilt => {
                let witt = ctx.tilt_witt(ctx.precision);
                let a = TiltElem::parse(ctx.params, ctx.precision, a)?;
                let (t, j) = witt_json(&witt, &witt.teichmuller(&a, *n));
                Ok(report(t, j))
            }
        },
        WittCmd::Expand { w, n } => {
            let witt = ctx.tilt_witt(ctx.precision);
            let comp = |s: &str| TiltElem::parse(ctx.params, ctx.precision, s);
            let wv = WittExpr::parse(&witt, *n, &comp, w)?;
            let cs = witt.teich_expand(&wv)?;
            let text = cs
                .iter()
                .enumerate()
                .map(|(i, c)| format!("c_{i} = {c}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(report(
                text,
                json!({"coefficients": cs.iter().map(|c| c.to_json()).collect::<Vec<_>>()}),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("tiltlab").chain(args.iter().copied()))
    }

    #[test]
    fn documented_examples() {
        let o = go(&["theta", "--p", "2", "--precision", "3", "[t] - p*1"]);
        assert_eq!((o.code, o.stdout.trim()), (0, "0"), "{o:?}");
        let o = go(&["witt", "gen", "--p", "2", "--n", "2"]);
        assert!(o.stdout.contains("S_1 = x1 + y1 - x0*y0"), "{o:?}");
        let o = go(&["eval", "--model", "mixed", "--p", "2", "dist(x,x)", "--bind", "x=1+p"]);
        assert_eq!((o.code, o.stdout.trim()), (0, "0"), "{o:?}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(go(&["frobnicate"]).code, 3);
        assert_eq!(go(&["eval", "dist(x,"]).code, 3);
        assert_eq!(go(&["--p", "4", "eval", "1"]).code, 3);
        assert_eq!(go(&["omega", "dist", "1", "--precision", "1/3"]).code, 3);
        // varpi = 1 is not topologically nilpotent
        assert_eq!(go(&["dxi", "[t]", "[t]", "--varpi", "1"]).code, 1);
        assert_eq!(
            go(&["approx", "tube", "--tilt", "--poly", "y^2 - p", "--point", "t", "--gamma", "1", "--precision", "2", "--den-log", "4", "--budget", "100"]).code,
            2
        );
    }

    #[test]
    fn json_carries_schema_version() {
        let o = go(&["--format", "json", "--precision", "4", "arith", "(1+p)^2"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["result"]["text"], "1 + p^3");
    }
}
