//! Randomizations of finite structures over finite probability spaces.
//!
//! The random elements are all maps `Ω → ∏_w M(w)` and the events all
//! subsets of `Ω`, so the Fullness and Event axioms have exact witnesses.

pub mod axioms;
pub mod cformula;
pub mod corpus;
pub mod simple;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::logic::{eval_formula, Assignment, EvalError, FinStructure, Formula};
use crate::measure::{FinProbSpace, MeasureError};
use crate::rational::{fmt_rational, Rational};

pub use axioms::{atomless_defect, check_axioms, AxiomConfig, AxiomFinding, AxiomReport};
pub use cformula::{eval_cformula, parse_cformula, CFormula, CFormulaError, EventTerm};
pub use simple::{approximate_by_simple, EventAlgebra, Precondition, SimpleApprox, SimpleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandError {
    #[error("point {point} carries a structure whose signature differs from point 0")]
    SignatureMismatch { point: usize },
    #[error("family has {family} structures but the base has {base} points")]
    FamilySize { family: usize, base: usize },
    #[error("random element has {got} values, the base has {expected} points")]
    BaseMismatch { expected: usize, got: usize },
    #[error("value {value} at point {point} is outside a universe of size {size}")]
    ValueOutOfRange { point: usize, value: usize, size: usize },
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("mixture weight {0} is not positive")]
    NonPositiveWeight(String),
    #[error("no parts given")]
    NoParts,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A map from sample points to elements, listed in point order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomElement(pub Vec<usize>);

impl RandomElement {
    pub fn constant(value: usize, len: usize) -> Self {
        RandomElement(vec![value; len])
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn at(&self, w: usize) -> usize {
        self.0[w]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RandomElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", vals.join(", "))
    }
}

/// A subset of the sample space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event(pub Vec<bool>);

impl Event {
    pub fn top(len: usize) -> Self {
        Event(vec![true; len])
    }

    pub fn bot(len: usize) -> Self {
        Event(vec![false; len])
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut e = Self::bot(len);
        for &i in indices {
            e.0[i] = true;
        }
        e
    }

    /// The event whose indicator is the binary expansion of `bits`.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        Event((0..len).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i]).collect()
    }

    pub fn contains(&self, w: usize) -> bool {
        self.0[w]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn zip(&self, other: &Event, op: impl Fn(bool, bool) -> bool) -> Event {
        Event(self.0.iter().zip(&other.0).map(|(a, b)| op(*a, *b)).collect())
    }

    pub fn join(&self, other: &Event) -> Event {
        self.zip(other, |a, b| a || b)
    }

    pub fn meet(&self, other: &Event) -> Event {
        self.zip(other, |a, b| a && b)
    }

    pub fn symdiff(&self, other: &Event) -> Event {
        self.zip(other, |a, b| a != b)
    }

    pub fn minus(&self, other: &Event) -> Event {
        self.zip(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Event {
        Event(self.0.iter().map(|a| !a).collect())
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !a || *b)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", idx.join(","))
    }
}

/// Values of free variables as random elements.
pub type RandomAssignment = BTreeMap<String, RandomElement>;

/// The full randomization of an indexed family `⟨M(w) : w ∈ Ω⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Randomization {
    base: FinProbSpace,
    family: Vec<Arc<FinStructure>>,
}

/// Builds the full randomization of `family` (one structure per base point).
pub fn make_randomization(family: Vec<FinStructure>, base: FinProbSpace) -> Result<Randomization, RandError> {
    if family.len() != base.len() {
        return Err(RandError::FamilySize { family: family.len(), base: base.len() });
    }
    let sig = family[0].signature().clone();
    if let Some(point) = family.iter().position(|m| *m.signature() != sig) {
        return Err(RandError::SignatureMismatch { point });
    }
    let mut shared: Vec<Arc<FinStructure>> = Vec::with_capacity(family.len());
    for m in family {
        match shared.iter().find(|s| ***s == m) {
            Some(s) => shared.push(s.clone()),
            None => shared.push(Arc::new(m)),
        }
    }
    Ok(Randomization { base: base.indexed(), family: shared })
}

impl Randomization {
    /// The randomization of a single structure.
    pub fn constant(m: &FinStructure, base: FinProbSpace) -> Self {
        let m = Arc::new(m.clone());
        Randomization { family: vec![m; base.len()], base: base.indexed() }
    }

    /// Assembles a randomization without checking signatures.
    pub(crate) fn from_parts(base: FinProbSpace, family: Vec<Arc<FinStructure>>) -> Self {
        Randomization { base, family }
    }

    pub fn base(&self) -> &FinProbSpace {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn structure_at(&self, w: usize) -> &FinStructure {
        &self.family[w]
    }

    pub fn family(&self) -> &[Arc<FinStructure>] {
        &self.family
    }

    /// The common structure when the family is constant.
    pub fn constant_structure(&self) -> Option<&FinStructure> {
        let first = &self.family[0];
        self.family.iter().all(|m| Arc::ptr_eq(m, first) || **m == **first).then_some(&**first)
    }

    /// `|K| = ∏_w |M(w)|`, saturating.
    pub fn carrier_size(&self) -> u128 {
        self.family.iter().fold(1u128, |acc, m| acc.saturating_mul(m.size() as u128))
    }

    pub fn check_element(&self, f: &RandomElement) -> Result<(), RandError> {
        if f.len() != self.len() {
            return Err(RandError::BaseMismatch { expected: self.len(), got: f.len() });
        }
        for (point, &value) in f.0.iter().enumerate() {
            let size = self.family[point].size();
            if value >= size {
                return Err(RandError::ValueOutOfRange { point, value, size });
            }
        }
        Ok(())
    }

    /// The `index`-th random element in the mixed-radix enumeration of `K`
    /// (point 0 varies fastest).
    pub fn element_at(&self, mut index: u128) -> RandomElement {
        let mut v = Vec::with_capacity(self.len());
        for m in &self.family {
            let n = m.size() as u128;
            v.push((index % n) as usize);
            index /= n;
        }
        RandomElement(v)
    }

    /// Replaces the base weights, keeping the points. Used to build
    /// deliberately broken instances for the axiom checker.
    pub fn with_weights_unchecked(&self, weights: Vec<Rational>) -> Self {
        let base = FinProbSpace::new_unchecked(self.base.points().to_vec(), weights);
        Randomization { base, family: self.family.clone() }
    }
}

/// `⟦φ(f̄)⟧ = {w : M(w) ⊨ φ(f̄(w))}`.
pub fn event_of(rand: &Randomization, phi: &Formula, args: &RandomAssignment) -> Result<Event, RandError> {
    for f in args.values() {
        rand.check_element(f)?;
    }
    let mut val = Assignment::new();
    let mut out = Vec::with_capacity(rand.len());
    for w in 0..rand.len() {
        for (k, f) in args {
            val.insert(k.clone(), f.at(w));
        }
        out.push(eval_formula(rand.structure_at(w), phi, &val)?);
    }
    Ok(Event(out))
}

/// `μ(e)`.
pub fn mu(rand: &Randomization, e: &Event) -> Rational {
    rand.base.mass(&e.0)
}

/// `d_B(e1, e2) = μ(e1 △ e2)`.
pub fn d_b(rand: &Randomization, e1: &Event, e2: &Event) -> Rational {
    mu(rand, &e1.symdiff(e2))
}

/// `d_K(f, g) = μ⟦f ≠ g⟧`.
pub fn d_k(rand: &Randomization, f: &RandomElement, g: &RandomElement) -> Result<Rational, RandError> {
    rand.check_element(f)?;
    rand.check_element(g)?;
    let differ = Event(f.0.iter().zip(&g.0).map(|(a, b)| a != b).collect());
    Ok(mu(rand, &differ))
}

/// An `f` with `⟦φ(f, ḡ)⟧ = ⟦∃x φ(x, ḡ)⟧` exactly: at each point the least
/// witness, or element 0 where there is none.
pub fn fullness_witness(rand: &Randomization, phi: &Formula, x: &str, args: &RandomAssignment) -> Result<RandomElement, RandError> {
    for f in args.values() {
        rand.check_element(f)?;
    }
    let mut val = Assignment::new();
    let mut out = Vec::with_capacity(rand.len());
    for w in 0..rand.len() {
        for (k, f) in args {
            val.insert(k.clone(), f.at(w));
        }
        let m = rand.structure_at(w);
        let mut pick = 0;
        for a in m.universe() {
            val.insert(x.to_string(), a);
            if eval_formula(m, phi, &val)? {
                pick = a;
                break;
            }
        }
        val.remove(x);
        out.push(pick);
    }
    Ok(RandomElement(out))
}

/// `(f, g)` with `⟦f = g⟧ = e`: both 0 on `e`, 0 and 1 off it.
pub fn event_witness(rand: &Randomization, e: &Event) -> Result<(RandomElement, RandomElement), RandError> {
    if e.len() != rand.len() {
        return Err(RandError::BaseMismatch { expected: rand.len(), got: e.len() });
    }
    let f = RandomElement::constant(0, rand.len());
    let g = RandomElement(e.0.iter().map(|&inside| usize::from(!inside)).collect());
    Ok((f, g))
}

/// A mixture of randomizations and the bookkeeping to move random elements
/// between the parts and the whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexCombination {
    pub rand: Randomization,
    pub weights: Vec<Rational>,
    offsets: Vec<usize>,
}

impl ConvexCombination {
    pub fn parts(&self) -> usize {
        self.weights.len()
    }

    /// Base points of the combined space belonging to part `i`.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn restrict(&self, f: &RandomElement, i: usize) -> RandomElement {
        RandomElement(f.0[self.range(i)].to_vec())
    }

    pub fn join(&self, pieces: &[RandomElement]) -> RandomElement {
        RandomElement(pieces.iter().flat_map(|p| p.0.iter().copied()).collect())
    }
}

/// The randomization over the disjoint union of the parts' bases, with the
/// weights of part `i` scaled by `μ₀(i)`.
pub fn convex_combination(parts: &[(Rational, Randomization)]) -> Result<ConvexCombination, RandError> {
    if parts.is_empty() {
        return Err(RandError::NoParts);
    }
    if let Some((w, _)) = parts.iter().find(|(w, _)| !w.is_positive()) {
        return Err(RandError::NonPositiveWeight(fmt_rational(w)));
    }
    let total: Rational = parts.iter().map(|(w, _)| w).sum();
    if !total.is_one() {
        return Err(RandError::WeightSum(fmt_rational(&total)));
    }
    let sig = parts[0].1.structure_at(0).signature();
    let mut weights = Vec::new();
    let mut family = Vec::new();
    let mut offsets = vec![0];
    for (mu0, r) in parts {
        for w in 0..r.len() {
            if r.structure_at(w).signature() != sig {
                return Err(RandError::SignatureMismatch { point: family.len() });
            }
            weights.push(mu0 * r.base().weight(w));
            family.push(r.family[w].clone());
        }
        offsets.push(family.len());
    }
    let base = FinProbSpace::from_weights(weights)?;
    Ok(ConvexCombination {
        rand: Randomization::from_parts(base, family),
        weights: parts.iter().map(|(w, _)| w.clone()).collect(),
        offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, standard};
    use crate::rational::q;

    fn assign(pairs: &[(&str, &RandomElement)]) -> RandomAssignment {
        pairs.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect()
    }

    #[test]
    fn construction() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(3));
        assert_eq!(r.carrier_size(), 256);
        let fam = vec![standard::m2(), standard::c3()];
        assert!(matches!(
            make_randomization(fam, FinProbSpace::dyadic(1)),
            Err(RandError::SignatureMismatch { point: 1 })
        ));
        let base = FinProbSpace::from_weights(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap();
        assert!(make_randomization(vec![standard::c3(); 3], base).is_ok());
    }

    #[test]
    fn events_and_distances() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(1));
        let f = RandomElement(vec![0, 1]);
        let g = RandomElement::constant(0, 2);
        let eq = parse_formula("x=y", m2.signature()).unwrap();
        let e = event_of(&r, &eq, &assign(&[("x", &f), ("y", &g)])).unwrap();
        assert_eq!(e, Event(vec![true, false]));
        assert_eq!(d_k(&r, &f, &g).unwrap(), q(1, 2));
        assert_eq!(mu(&r, &Event::top(2)), q(1, 1));
        assert_eq!(mu(&r, &Event::bot(2)), q(0, 1));

        let r4 = Randomization::constant(&m2, FinProbSpace::dyadic(2));
        let e1 = Event::from_indices(4, &[0, 1]);
        let e2 = Event::from_indices(4, &[1, 2]);
        assert_eq!(d_b(&r4, &e1, &e2), q(1, 2));
    }

    #[test]
    fn c3_successor() {
        let c3 = standard::c3();
        let r = Randomization::constant(&c3, FinProbSpace::dyadic(2));
        let f = RandomElement(vec![0, 1, 2, 0]);
        let phi = parse_formula("exists z (E(x,z))", c3.signature()).unwrap();
        assert_eq!(event_of(&r, &phi, &assign(&[("x", &f)])).unwrap(), Event::top(4));
        let g = RandomElement::constant(0, 4);
        let theta = parse_formula("E(y,x)", c3.signature()).unwrap();
        let w = fullness_witness(&r, &theta, "x", &assign(&[("y", &g)])).unwrap();
        assert_eq!(w, RandomElement::constant(1, 4));
    }

    #[test]
    fn witnesses_are_exact() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(2));
        let g = RandomElement::constant(0, 4);
        let phi = parse_formula("x != y", m2.signature()).unwrap();
        assert_eq!(fullness_witness(&r, &phi, "x", &assign(&[("y", &g)])).unwrap(), RandomElement::constant(1, 4));
        let eq = parse_formula("x=y", m2.signature()).unwrap();
        for e in [Event::top(4), Event::bot(4), Event::from_indices(4, &[0, 3])] {
            let (f, g) = event_witness(&r, &e).unwrap();
            assert_eq!(event_of(&r, &eq, &assign(&[("x", &f), ("y", &g)])).unwrap(), e);
        }
    }

    #[test]
    fn mixture() {
        let m2 = standard::m2();
        let a = Randomization::constant(&m2, FinProbSpace::dyadic(1));
        let b = Randomization::constant(&m2, FinProbSpace::dyadic(2));
        let cc = convex_combination(&[(q(1, 3), a.clone()), (q(2, 3), b)]).unwrap();
        assert_eq!(cc.rand.len(), 6);
        assert_eq!(cc.rand.base().weight(0), &q(1, 6));
        assert_eq!(cc.rand.base().weight(5), &q(1, 6));
        assert!(matches!(convex_combination(&[(q(1, 2), a)]), Err(RandError::WeightSum(_))));
    }
}
