//! Implicational bases of formal contexts.
//!
//! * [`context`]: formal contexts, derivation operators and closure.
//! * [`hypergraph`]: hypergraphs and minimal transversal enumeration.
//! * [`bases`]: the base of proper premises and the Duquenne-Guigues base.
//! * [`random`]: seeded single- and multi-parametric random contexts.
//! * [`bounds`]: average-size and almost-sure exponents, regime classifier.
//! * [`harness`]: parameter sweeps, CSV records and exponent fits.

pub mod bases;
pub mod bounds;
pub mod context;
pub mod harness;
pub mod hypergraph;
pub mod io;
pub mod random;
pub mod set;

pub use bases::{Implication, ImplicationBase};
pub use context::FormalContext;
pub use hypergraph::Hypergraph;
pub use set::{AttributeSet, ObjectSet};
