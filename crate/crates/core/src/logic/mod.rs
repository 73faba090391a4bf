//! Continuous-logic formulas over the ring language with `D`: syntax,
//! interval-valued evaluation in the standard models, the translation of
//! tilt formulas to root sequences, and axiom suites.

pub mod ast;
pub mod axioms;
pub mod eval;
pub mod model;
pub mod parser;
pub mod translate;
pub mod value;

pub use ast::{Formula, Term, Witness, MAX_ARITY};
pub use axioms::{axiom_suite, axioms, mvf_on_tilt, standard_suite, AxiomReport, AxiomResult, Theory};
pub use eval::{eval, eval_term, eval_val, Env, WitnessSet};
pub use model::{DiscreteModel, MixedModel, Model, TiltModel};
pub use parser::{parse_formula, parse_term};
pub use translate::{bind_omega, dist_to_omega, translate_tilt};
pub use value::{alpha_pow_bounds, Enclosure, Val};
