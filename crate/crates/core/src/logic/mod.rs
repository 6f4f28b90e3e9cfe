//! Finite structures, first-order formulas, automorphisms and type spaces.

pub mod automorphism;
pub mod eval;
pub mod formula;
pub mod hintikka;
pub mod parse;
pub mod standard;
pub mod structure;
pub mod types;

pub use automorphism::automorphisms;
pub use eval::{eval_formula, eval_term, Assignment, EvalError};
pub use formula::{Formula, Term, TypeAtom};
pub use hintikka::{depth_classes, isolating_formula, DepthClasses};
pub use parse::{parse_formula, parse_structure, parse_term, ParseError};
pub use structure::{FinStructure, Signature, StructureError, SymbolKind};
pub use types::{type_of_tuple, type_space, TypeId, TypeSpace};
