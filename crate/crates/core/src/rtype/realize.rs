//! Realizing a measure on a type space by random elements, refining the
//! base where prescribed masses cut through sample points.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::{require_constant, RMeasure, RtypeError};
use crate::logic::parse::{Cursor, Tok};
use crate::logic::types::type_space_shared;
use crate::logic::{TypeId, TypeSpace};
use crate::measure::{FinProbSpace, MeasurableMap};
use crate::randomizer::{RandError, RandomElement, Randomization};
use crate::rational::{fmt_rational, Rational};

/// Overlaps of two interval partitions of `[0, total)`: the first given by
/// `weights`, the second by `masses`. Returns `(i, j, length)` for every
/// nonempty overlap, in order.
fn overlaps(weights: &[Rational], masses: &[Rational]) -> Vec<(usize, usize, Rational)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut left_w = weights.first().cloned().unwrap_or_else(Rational::zero);
    let mut left_m = masses.first().cloned().unwrap_or_else(Rational::zero);
    while i < weights.len() && j < masses.len() {
        if !left_w.is_positive() {
            i += 1;
            left_w = weights.get(i).cloned().unwrap_or_else(Rational::zero);
            continue;
        }
        if !left_m.is_positive() {
            j += 1;
            left_m = masses.get(j).cloned().unwrap_or_else(Rational::zero);
            continue;
        }
        let piece = left_w.clone().min(left_m.clone());
        left_w -= &piece;
        left_m -= &piece;
        out.push((i, j, piece));
    }
    out
}

/// The common refinement of `base` with a partition into blocks of the
/// given masses. Returns the refined space and, per new point, the old
/// point and the block it lies in.
pub fn refine(base: &FinProbSpace, masses: &[Rational]) -> (FinProbSpace, Vec<(usize, usize)>) {
    let pieces = overlaps(base.weights(), masses);
    let weights = pieces.iter().map(|(_, _, w)| w.clone()).collect();
    let space = FinProbSpace::from_weights(weights).expect("overlaps are positive and sum to the total");
    (space, pieces.into_iter().map(|(i, j, _)| (i, j)).collect())
}

fn lift(f: &RandomElement, proj: &MeasurableMap) -> RandomElement {
    RandomElement((0..proj.domain_len()).map(|w| f.at(proj.apply(w))).collect())
}

/// Random elements on a refined base together with the projection to the
/// original base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub rand: Randomization,
    pub elements: Vec<RandomElement>,
    pub projection: MeasurableMap,
}

impl Realization {
    /// A random element of the original randomization, moved to the
    /// refined base.
    pub fn lift(&self, f: &RandomElement) -> RandomElement {
        lift(f, &self.projection)
    }
}

/// A tuple whose type is `nu`: the base is cut into events `B_q` of mass
/// `ν({q})` and the tuple is the representative of `q` on `B_q`.
pub fn realize(rand: &Randomization, nu: &RMeasure) -> Result<Realization, RtypeError> {
    let m = require_constant(rand)?;
    if m != nu.space().structure() {
        return Err(RtypeError::SpaceMismatch);
    }
    let (base, pieces) = refine(rand.base(), nu.weights());
    let space = nu.space();
    let elements = (0..space.arity())
        .map(|i| RandomElement(pieces.iter().map(|&(_, t)| space.representative(TypeId(t))[i]).collect()))
        .collect();
    let projection = MeasurableMap::new(pieces.iter().map(|&(w, _)| w).collect(), rand.len()).expect("old points are in range");
    Ok(Realization { rand: Randomization::constant(m, base), elements, projection })
}

/// One cell of a conditional realization problem: the parameter value
/// `b̄_n` and the masses `β(q, n)` over `S_1(T(b̄_n))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondCell {
    pub values: Vec<usize>,
    pub beta: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondRealizationSpec {
    pub params: Vec<RandomElement>,
    pub cells: Vec<CondCell>,
}

impl CondRealizationSpec {
    /// One line per cell: `cell [b1, b2] { q0: p/q, q1: p/q }`, types
    /// numbered in `S_1` over the cell's values.
    pub fn parse(text: &str, params: Vec<RandomElement>) -> Result<Self, RtypeError> {
        let mut cells = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut cur = Cursor::new(line)?;
            cur.expect_keyword("cell")?;
            cur.expect(&Tok::LBrack)?;
            let mut values = Vec::new();
            while !cur.eat(&Tok::RBrack) {
                values.push(cur.number()?);
                if !cur.eat(&Tok::Comma) {
                    cur.expect(&Tok::RBrack)?;
                    break;
                }
            }
            cur.expect(&Tok::LBrace)?;
            let mut beta: Vec<Rational> = Vec::new();
            while !cur.eat(&Tok::RBrace) {
                let name = cur.ident()?;
                let idx = name.strip_prefix('q').and_then(|d| d.parse::<usize>().ok()).ok_or_else(|| RtypeError::UnknownType(name.clone()))?;
                cur.expect(&Tok::Colon)?;
                if beta.len() <= idx {
                    beta.resize(idx + 1, Rational::zero());
                }
                beta[idx] = cur.rational()?;
                if !cur.eat(&Tok::Comma) {
                    cur.expect(&Tok::RBrace)?;
                    break;
                }
            }
            cur.finish()?;
            cells.push(CondCell { values, beta });
        }
        Ok(CondRealizationSpec { params, cells })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondRealization {
    pub rand: Randomization,
    pub f: RandomElement,
    /// The parameters moved to the refined base.
    pub params: Vec<RandomElement>,
    pub projection: MeasurableMap,
    /// `S_1(T(b̄_n))` per cell.
    pub spaces: Vec<Arc<TypeSpace>>,
    /// The cell of each refined point.
    pub cell_of: Vec<usize>,
}

impl CondRealization {
    /// `μ{r ∈ B_n : tp(f(r)/b̄_n) = q}`.
    pub fn cell_mass(&self, n: usize, t: TypeId) -> Rational {
        (0..self.rand.len())
            .filter(|&r| self.cell_of[r] == n && self.spaces[n].type_of(&[self.f.at(r)]) == t)
            .map(|r| self.rand.base().weight(r).clone())
            .sum()
    }

    /// `μ(B_n)` on the refined base.
    pub fn cell_measure(&self, n: usize) -> Rational {
        (0..self.rand.len()).filter(|&r| self.cell_of[r] == n).map(|r| self.rand.base().weight(r).clone()).sum()
    }
}

/// An `f` with `μ{r ∈ B_n : f(r) ⊨ q} = β(q, n)` for every cell `B_n`
/// (where the parameters equal `b̄_n`) and every `q ∈ S_1(T(b̄_n))`.
pub fn realize_conditional(rand: &Randomization, spec: &CondRealizationSpec) -> Result<CondRealization, RtypeError> {
    let m = require_constant(rand)?;
    for g in &spec.params {
        rand.check_element(g)?;
    }
    for (n, c) in spec.cells.iter().enumerate() {
        if let Some(&value) = c.values.iter().find(|&&v| v >= m.size()) {
            return Err(RandError::ValueOutOfRange { point: n, value, size: m.size() }.into());
        }
    }
    let shared = rand.family()[0].clone();
    let spaces: Vec<Arc<TypeSpace>> = spec.cells.iter().map(|c| Arc::new(type_space_shared(shared.clone(), 1, &c.values))).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.cells.len()];
    for w in 0..rand.len() {
        let value: Vec<usize> = spec.params.iter().map(|g| g.at(w)).collect();
        let n = spec.cells.iter().position(|c| c.values == value).ok_or(RtypeError::MissingCell(value))?;
        members[n].push(w);
    }
    let mut pieces: Vec<(usize, usize, usize, Rational)> = Vec::new();
    for (n, cell) in spec.cells.iter().enumerate() {
        if members[n].is_empty() {
            return Err(RtypeError::UnknownCell(n));
        }
        if cell.beta.len() > spaces[n].len() {
            return Err(RtypeError::Length { expected: spaces[n].len(), got: cell.beta.len() });
        }
        if let Some(b) = cell.beta.iter().find(|b| b.is_negative()) {
            return Err(RtypeError::NegativeWeight(fmt_rational(b)));
        }
        let weights: Vec<Rational> = members[n].iter().map(|&w| rand.base().weight(w).clone()).collect();
        let expected: Rational = weights.iter().sum();
        let got: Rational = cell.beta.iter().sum();
        if expected != got {
            return Err(RtypeError::CellSum { cell: n, expected: fmt_rational(&expected), got: fmt_rational(&got) });
        }
        for (i, t, len) in overlaps(&weights, &cell.beta) {
            pieces.push((members[n][i], n, t, len));
        }
    }
    pieces.sort_by_key(|p| p.0);
    let base = FinProbSpace::from_weights(pieces.iter().map(|p| p.3.clone()).collect()).expect("positive pieces summing to 1");
    let projection = MeasurableMap::new(pieces.iter().map(|p| p.0).collect(), rand.len()).expect("old points are in range");
    let f = RandomElement(pieces.iter().map(|&(_, n, t, _)| spaces[n].representative(TypeId(t))[0]).collect());
    let params = spec.params.iter().map(|g| lift(g, &projection)).collect();
    Ok(CondRealization {
        rand: Randomization::constant(m, base),
        f,
        params,
        projection,
        spaces,
        cell_of: pieces.iter().map(|p| p.1).collect(),
    })
}
