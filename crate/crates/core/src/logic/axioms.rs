//! Axiom lists of the theories, as formula text, and their evaluation on
//! sample grids.
//!
//! Each axiom is written as a formula whose value is `0` in models: a
//! universal axiom measures its worst violation over the sample `G`, an
//! existential one the best witness found. An axiom passes when its
//! enclosure contains `0`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::eval::{eval, Env};
use super::model::{DiscreteModel, MixedModel, Model, TiltModel};
use super::parser::parse_formula;
use super::value::{rat_str, Enclosure};
use crate::error::{Error, Result};
use crate::perfring::{Exponent, MixedElem, TiltElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theory {
    /// Metric valued fields.
    Mvf,
    /// Mixed characteristic perfectoid, `|p| = alpha`.
    PerfAlpha,
    /// Characteristic `p` perfectoid.
    PerfZero,
    /// Truncated valuation rings.
    Tvr,
    /// Truncated perfectoid rings with pseudo uniformizers `w_i`.
    Tperf,
}

impl Theory {
    pub const ALL: [Theory; 5] = [Theory::Mvf, Theory::PerfAlpha, Theory::PerfZero, Theory::Tvr, Theory::Tperf];

    pub fn name(&self) -> &'static str {
        match self {
            Theory::Mvf => "MVF",
            Theory::PerfAlpha => "PERF_alpha",
            Theory::PerfZero => "PERF_0",
            Theory::Tvr => "TVR",
            Theory::Tperf => "TPERF",
        }
    }

    /// Whether the theory's signature fits a model of the given kind.
    pub fn fits(&self, model: &str) -> bool {
        match self {
            Theory::Mvf => model == "mixed" || model == "tilt",
            Theory::PerfAlpha => model == "mixed",
            Theory::PerfZero => model == "tilt",
            Theory::Tvr | Theory::Tperf => model == "discrete",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Theory> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mvf" => Theory::Mvf,
            "perf_alpha" | "perf-alpha" | "perfalpha" => Theory::PerfAlpha,
            "perf_0" | "perf-0" | "perf0" | "perfzero" => Theory::PerfZero,
            "tvr" => Theory::Tvr,
            "tperf" => Theory::Tperf,
            _ => return Err(Error::Param(format!("unknown theory `{s}`"))),
        })
    }
}

const MVF: [(&str, &str); 4] = [
    ("ultrametric", "sup x in G: sup y in G: |x + y| .- max(|x|, |y|)"),
    ("multiplicative", "sup x in G: sup y in G: max(|x*y| .- |x| * |y|, |x| * |y| .- |x*y|)"),
    ("norm of one", "1 .- |1|"),
    (
        "valuation ring",
        "sup x in G: sup y in G: inf z in {divide(y, x), divide(x, y)}: min(dist(x*z, y), dist(y*z, x))",
    ),
];

const RING: [(&str, &str); 7] = [
    ("additive associativity", "sup x in G: sup y in G: sup z in G: dist((x + y) + z, x + (y + z))"),
    ("multiplicative associativity", "sup x in G: sup y in G: sup z in G: dist((x*y)*z, x*(y*z))"),
    ("distributivity", "sup x in G: sup y in G: sup z in G: dist(x*(y + z), x*y + x*z)"),
    ("commutativity", "sup x in G: sup y in G: max(dist(x + y, y + x), dist(x*y, y*x))"),
    ("neutral elements", "sup x in G: max(dist(x + 0, x), dist(x*1, x))"),
    ("additive inverse", "sup x in G: dist(x + -x, 0)"),
    ("nontrivial", "1 .- dist(1, 0)"),
];

const TVR: [(&str, &str); 3] = [
    (
        "div is divisibility",
        "sup x in G: sup y in G: max(D(x, y) .- (inf z in G: dist(y, x*z)), (inf z in G: dist(y, x*z)) .- D(x, y))",
    ),
    ("div is total", "sup x in G: sup y in G: min(D(x, y), D(y, x))"),
    ("cancellation", "sup x in G: sup y in G: min(dist(x, 0), 1 .- dist(x, y*x), D(y, 1))"),
];

/// `(name, formula text)` for every axiom checked for `theory`.
///
/// `k` is the number of pseudo uniformizers `w_1, ..., w_k` named in TPERF.
pub fn axioms(theory: Theory, p: u32, k: u32) -> Vec<(String, String)> {
    let own = |xs: &[(&str, &str)]| -> Vec<(String, String)> {
        xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    };
    let mut out = Vec::new();
    match theory {
        Theory::Mvf => out.extend(own(&MVF)),
        Theory::PerfAlpha => {
            out.extend(own(&MVF));
            out.push(("|p| = alpha".into(), "max(|p| .- alpha, alpha .- |p|)".into()));
            out.push((
                format!("norm alpha^(1/{p}) attained"),
                format!("inf x in {{w_1}}: max(|x| .- alpha^(1/{p}), alpha^(1/{p}) .- |x|)"),
            ));
            out.push((
                "p-th roots modulo p".into(),
                format!("sup x in G: inf y in root(x): inf z in divide(x - y^{p}, p): |x - y^{p} - p*z|"),
            ));
        }
        Theory::PerfZero => {
            out.extend(own(&MVF));
            out.push(("|p| = 0".into(), "|p|".into()));
            out.push((
                "norm 1/2 approached".into(),
                "inf x in normapprox(1/2): max(|x| .- 1/2, 1/2 .- |x|)".into(),
            ));
            out.push(("perfect".into(), format!("sup x in G: inf y in root(x): |x - y^{p}|")));
        }
        Theory::Tvr => {
            out.extend(own(&RING));
            out.extend(own(&TVR));
        }
        Theory::Tperf => {
            out.extend(own(&RING));
            out.extend(own(&TVR));
            out.push(("p = 0".into(), "dist(p, 0)".into()));
            out.push((
                "frobenius onto".into(),
                format!("sup x in G: inf y in root(x): dist(x, y^{p})"),
            ));
            out.push(("w_1 nonzero".into(), "1 .- dist(w_1, 0)".into()));
            out.push(("w_1^p = 0".into(), format!("dist(w_1^{p}, 0)")));
            out.push((
                "w_1 pseudo uniformizer".into(),
                format!("sup x in G: min(1 .- dist(x^{p}, 0), D(w_1, x))"),
            ));
            for i in 1..k {
                out.push((
                    format!("w_{} ^ p = w_{i}", i + 1),
                    format!("dist(w_{}^{p}, w_{i})", i + 1),
                ));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct AxiomResult {
    pub name: String,
    pub formula: String,
    pub enclosure: Enclosure,
}

impl AxiomResult {
    pub fn pass(&self) -> bool {
        self.enclosure.contains_zero()
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub theory: Theory,
    pub model: String,
    pub p: u32,
    pub sample_size: usize,
    pub axioms: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "theory": self.theory.name(),
            "model": self.model,
            "p": self.p,
            "sample_size": self.sample_size,
            "axioms": self.axioms.iter().map(|a| json!({
                "name": a.name,
                "formula": a.formula,
                "lo": rat_str(&a.enclosure.lo),
                "hi": rat_str(&a.enclosure.hi),
                "pass": a.pass(),
            })).collect::<Vec<_>>(),
            "pass": self.pass(),
        })
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} on the {} model (p = {}, sample of {})",
            self.theory, self.model, self.p, self.sample_size
        )?;
        for a in &self.axioms {
            writeln!(
                f,
                "  {:<5} {:<30} {}",
                if a.pass() { "pass" } else { "FAIL" },
                a.name,
                a.enclosure
            )?;
        }
        Ok(())
    }
}

/// Evaluates the axioms of `theory` in `m`, with the sample bound to `G`
/// in `env`.
pub fn axiom_suite<M: Model>(
    theory: Theory,
    m: &M,
    env: &mut Env<M::Elem>,
    k: u32,
) -> Result<AxiomReport> {
    if !theory.fits(m.name()) {
        return Err(Error::Param(format!(
            "signature mismatch: {theory} is not checked on the {} model",
            m.name()
        )));
    }
    let p = m.params().p;
    let mut axioms_out = Vec::new();
    for (name, text) in axioms(theory, p, k) {
        let f = parse_formula(&text, p)?;
        let enclosure = eval(&f, m, env)?;
        axioms_out.push(AxiomResult {
            name,
            formula: f.to_string(),
            enclosure,
        });
    }
    Ok(AxiomReport {
        theory,
        model: m.name().to_string(),
        p,
        sample_size: 0,
        axioms: axioms_out,
    })
}

/// Number of random elements with denominator `p` added to the sample
/// when the full grid is too large.
const RANDOM_SAMPLE: usize = 24;

/// The documented sample for a metric model at precision 2: every element
/// with denominator `p` when that is at most 64 elements, otherwise the
/// integer grid plus seeded random elements with denominator `p`.
fn sample<M: Model>(m: &M, seed: u64, random: impl Fn(&mut ChaCha8Rng) -> M::Elem) -> Result<Vec<M::Elem>> {
    if let Ok(g) = m.grid(1, 64) {
        return Ok(g);
    }
    let mut g = m.grid(0, u128::MAX)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_SAMPLE {
        g.push(random(&mut rng));
    }
    Ok(g)
}

pub fn mixed_sample(m: &MixedModel, seed: u64) -> Result<Vec<MixedElem>> {
    sample(m, seed, |rng| MixedElem::random(rng, m.params, m.precision, 1, 0.5))
}

pub fn tilt_sample(m: &TiltModel, seed: u64) -> Result<Vec<TiltElem>> {
    sample(m, seed, |rng| TiltElem::random(rng, m.params, m.precision, 1, 0.5))
}

/// Runs a theory on its standard model and sample: metric theories at
/// precision 2, discrete ones on all of `O_k/p`.
pub fn standard_suite(theory: Theory, p: u32, alpha: (u64, u64), k: u32, seed: u64) -> Result<AxiomReport> {
    let params = crate::perfring::ModelParams::with_alpha(p, alpha.0, alpha.1)?;
    let prec = Exponent::int(2);
    match theory {
        Theory::Tvr | Theory::Tperf => {
            let m = DiscreteModel { params, k };
            let g = m.truncation()?;
            let n = g.len();
            let mut env = Env::new();
            env.set("G", g, true);
            let mut r = axiom_suite(theory, &m, &mut env, k)?;
            r.sample_size = n;
            Ok(r)
        }
        Theory::PerfZero => {
            let m = TiltModel { params, precision: prec };
            let g = tilt_sample(&m, seed)?;
            let n = g.len();
            let mut env = Env::new();
            env.set("G", g, false);
            let mut r = axiom_suite(theory, &m, &mut env, k)?;
            r.sample_size = n;
            Ok(r)
        }
        Theory::Mvf | Theory::PerfAlpha => {
            let m = MixedModel { params, precision: prec };
            let g = mixed_sample(&m, seed)?;
            let n = g.len();
            let mut env = Env::new();
            env.set("G", g, false);
            let mut r = axiom_suite(theory, &m, &mut env, k)?;
            r.sample_size = n;
            Ok(r)
        }
    }
}

/// MVF on the tilt model, which `standard_suite` runs on the mixed side.
pub fn mvf_on_tilt(p: u32, alpha: (u64, u64), seed: u64) -> Result<AxiomReport> {
    let params = crate::perfring::ModelParams::with_alpha(p, alpha.0, alpha.1)?;
    let m = TiltModel { params, precision: Exponent::int(2) };
    let g = tilt_sample(&m, seed)?;
    let n = g.len();
    let mut env = Env::new();
    env.set("G", g, false);
    let mut r = axiom_suite(Theory::Mvf, &m, &mut env, 0)?;
    r.sample_size = n;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_axioms_parse() {
        for t in Theory::ALL {
            for (name, text) in axioms(t, 3, 2) {
                parse_formula(&text, 3).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }

    #[test]
    fn tvr_on_o_mod_3() {
        let r = standard_suite(Theory::Tvr, 3, (1, 3), 1, 0).unwrap();
        assert!(r.pass(), "{r}");
        for a in &r.axioms {
            assert!(a.enclosure.is_point(), "{} is not exact: {}", a.name, a.enclosure);
        }
    }

    #[test]
    fn perf_alpha_exact_norm_of_p() {
        let r = standard_suite(Theory::PerfAlpha, 2, (1, 2), 1, 0).unwrap();
        let a = r.axioms.iter().find(|a| a.name == "|p| = alpha").unwrap();
        assert_eq!(a.enclosure.to_string(), "0");
        assert!(r.pass(), "{r}");
    }

    #[test]
    fn signature_mismatch() {
        let m = DiscreteModel {
            params: crate::perfring::ModelParams::new(2).unwrap(),
            k: 1,
        };
        let mut env = Env::new();
        assert!(axiom_suite(Theory::Mvf, &m, &mut env, 1).is_err());
    }
}
