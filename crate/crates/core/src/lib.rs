//! Reversible flowcharts over partial injections: a finite kernel, a point
//! evaluator, operational and denotational semantics, and the RINT language.

pub mod conformance;
pub mod denote;
pub mod flowchart;
pub mod invert;
pub mod kernel;
pub mod point;
pub mod rint;
