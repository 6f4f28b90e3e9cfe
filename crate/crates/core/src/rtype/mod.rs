//! Types of a randomization as probability measures on classical type
//! spaces.
//!
//! For a constant family `M`, the type of a random tuple `f̄` is the
//! pushforward of the base measure under `w ↦ tp(f̄(w))`, a measure on
//! `S_n(Th(M))`. Every such measure is realized (possibly after splitting
//! base points), and the distance between two types is the total
//! variation of their measures. That last identification is derived, not
//! taken from the literature; the test suite checks it against a coupling
//! brute force.

pub mod categoricity;
pub mod realize;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::logic::parse::{Cursor, Tok};
use crate::logic::{eval_formula, Assignment, EvalError, FinStructure, Formula, ParseError, TypeId, TypeSpace};
use crate::logic::types::type_space_shared;
use crate::randomizer::{RandError, RandomElement, Randomization};
use crate::rational::{fmt_rational, q, Rational};

pub use categoricity::{check_omega_categoricity, measure_battery, CategoricityReport};
pub use realize::{realize, realize_conditional, refine, CondRealization, CondRealizationSpec, Realization};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RtypeError {
    #[error("the randomization is not over a single structure")]
    NonConstantFamily,
    #[error("{got} weights given for a type space of size {expected}")]
    Length { expected: usize, got: usize },
    #[error("weight {0} is negative")]
    NegativeWeight(String),
    #[error("weights sum to {0}, expected 1")]
    TotalNotOne(String),
    #[error("the measures live on different type spaces")]
    SpaceMismatch,
    #[error("distances between types over parameters are not supported")]
    Parameterized,
    #[error("cell {cell} carries mass {got}, but its event has measure {expected}")]
    CellSum { cell: usize, expected: String, got: String },
    #[error("the parameters take the value {0:?}, which has no cell")]
    MissingCell(Vec<usize>),
    #[error("cell {0} does not occur as a value of the parameters")]
    UnknownCell(usize),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Rand(#[from] RandError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A probability measure on a finite type space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RMeasure {
    space: Arc<TypeSpace>,
    weights: Vec<Rational>,
}

impl RMeasure {
    pub fn new(space: Arc<TypeSpace>, weights: Vec<Rational>) -> Result<Self, RtypeError> {
        if weights.len() != space.len() {
            return Err(RtypeError::Length { expected: space.len(), got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(RtypeError::NegativeWeight(fmt_rational(w)));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(RtypeError::TotalNotOne(fmt_rational(&total)));
        }
        Ok(RMeasure { space, weights })
    }

    pub fn point_mass(space: Arc<TypeSpace>, t: TypeId) -> Self {
        let mut weights = vec![Rational::zero(); space.len()];
        weights[t.0] = Rational::one();
        RMeasure { space, weights }
    }

    pub fn uniform(space: Arc<TypeSpace>) -> Self {
        let n = space.len() as i64;
        RMeasure { weights: vec![q(1, n); space.len()], space }
    }

    pub fn space(&self) -> &Arc<TypeSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, t: TypeId) -> &Rational {
        &self.weights[t.0]
    }

    pub fn support(&self) -> Vec<TypeId> {
        self.space.ids().filter(|t| self.weights[t.0].is_positive()).collect()
    }

    /// `ν({q : φ ∈ q})`, with `vars` naming the coordinates of the types.
    pub fn mass_of(&self, phi: &Formula, vars: &[String]) -> Result<Rational, RtypeError> {
        let mut total = Rational::zero();
        for t in self.space.ids() {
            let val: Assignment = vars.iter().cloned().zip(self.space.representative(t).iter().copied()).collect();
            if eval_formula(self.space.structure(), phi, &val)? {
                total += &self.weights[t.0];
            }
        }
        Ok(total)
    }

    /// The image under restriction to the coordinates `coords`.
    pub fn marginal(&self, coords: &[usize], target: Arc<TypeSpace>) -> RMeasure {
        let proj = self.space.projection(coords, &target);
        let mut weights = vec![Rational::zero(); target.len()];
        for t in self.space.ids() {
            weights[proj[t.0].0] += &self.weights[t.0];
        }
        RMeasure { space: target, weights }
    }

    /// Parses `rtype { q0: p/q, q1: p/q, ... }`; omitted types get 0.
    pub fn parse(text: &str, space: Arc<TypeSpace>) -> Result<Self, RtypeError> {
        let mut cur = Cursor::new(text)?;
        cur.expect_keyword("rtype")?;
        cur.expect(&Tok::LBrace)?;
        let mut weights = vec![Rational::zero(); space.len()];
        while !cur.eat(&Tok::RBrace) {
            let name = cur.ident()?;
            let idx = name
                .strip_prefix('q')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&i| i < space.len())
                .ok_or_else(|| RtypeError::UnknownType(name.clone()))?;
            cur.expect(&Tok::Colon)?;
            weights[idx] = cur.rational()?;
            if !cur.eat(&Tok::Comma) {
                cur.expect(&Tok::RBrace)?;
                break;
            }
        }
        cur.finish()?;
        RMeasure::new(space, weights)
    }
}

impl fmt::Display for RMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().enumerate().map(|(i, w)| format!("q{i}: {}", fmt_rational(w))).collect();
        write!(f, "rtype {{ {} }}", parts.join(", "))
    }
}

fn require_constant(rand: &Randomization) -> Result<&FinStructure, RtypeError> {
    rand.constant_structure().ok_or(RtypeError::NonConstantFamily)
}

/// The type of `(f̄, Ā)` over the empty set, as a measure on the joint
/// type space `S_{x̄,W}`.
pub fn rtype_of(rand: &Randomization, fs: &[RandomElement], params: &[RandomElement]) -> Result<RMeasure, RtypeError> {
    let m = require_constant(rand)?;
    let arity = fs.len() + params.len();
    let space = Arc::new(type_space_shared(rand.family()[0].clone(), arity, &[]));
    debug_assert_eq!(space.structure(), m);
    let joint: Vec<RandomElement> = fs.iter().chain(params).cloned().collect();
    rtype_in(rand, &joint, space)
}

/// The pushforward of the base measure under `w ↦ tp(f̄(w))` in `space`.
pub fn rtype_in(rand: &Randomization, fs: &[RandomElement], space: Arc<TypeSpace>) -> Result<RMeasure, RtypeError> {
    let m = require_constant(rand)?;
    if m != space.structure() {
        return Err(RtypeError::SpaceMismatch);
    }
    if fs.len() != space.arity() {
        return Err(RtypeError::Length { expected: space.arity(), got: fs.len() });
    }
    for f in fs {
        rand.check_element(f)?;
    }
    let mut weights = vec![Rational::zero(); space.len()];
    for w in 0..rand.len() {
        let tuple: Vec<usize> = fs.iter().map(|f| f.at(w)).collect();
        weights[space.type_of(&tuple).0] += rand.base().weight(w);
    }
    Ok(RMeasure { space, weights })
}

/// `½ Σ_q |ν₁(q) − ν₂(q)|`.
///
/// Tuples are compared by `μ⟦f̄ ≠ ḡ⟧`. The infimum is attained over some
/// refinement of the base, not necessarily on the base itself.
pub fn d_metric(nu1: &RMeasure, nu2: &RMeasure) -> Result<Rational, RtypeError> {
    if nu1.space != nu2.space && *nu1.space != *nu2.space {
        return Err(RtypeError::SpaceMismatch);
    }
    if !nu1.space.params().is_empty() {
        return Err(RtypeError::Parameterized);
    }
    let sum: Rational = nu1.weights.iter().zip(&nu2.weights).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum * q(1, 2))
}
