use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("a probability space needs at least one point")]
    Empty,
    #[error("weight of point {index} is {weight}, expected a positive rational")]
    NonPositiveWeight { index: usize, weight: String },
    #[error("weights sum to {0}, expected 1")]
    TotalNotOne(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("map sends point {point} to {target}, codomain has {size} points")]
    TargetOutOfRange { point: usize, target: usize, size: usize },
    #[error("image measures differ at z{z}: {left} vs {right}")]
    ImageMismatch { z: usize, left: String, right: String },
    #[error("maps have codomains of different sizes ({0} and {1})")]
    CodomainMismatch(usize, usize),
    #[error("duplicate point label at index {0}")]
    DuplicateLabel(usize),
}

/// A finite probability space with strictly positive rational weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinProbSpace<P = usize> {
    points: Vec<P>,
    weights: Vec<Rational>,
}

impl<P: Clone + PartialEq> FinProbSpace<P> {
    pub fn new(points: Vec<P>, weights: Vec<Rational>) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::Empty);
        }
        if points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch { expected: points.len(), got: weights.len() });
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(MeasureError::DuplicateLabel(i));
            }
        }
        for (index, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                return Err(MeasureError::NonPositiveWeight { index, weight: fmt_rational(w) });
            }
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(MeasureError::TotalNotOne(fmt_rational(&total)));
        }
        Ok(FinProbSpace { points, weights })
    }

    /// Skips every check. Only for exercising checkers on broken input.
    pub fn new_unchecked(points: Vec<P>, weights: Vec<Rational>) -> Self {
        FinProbSpace { points, weights }
    }

    pub fn uniform(points: Vec<P>) -> Result<Self, MeasureError> {
        let n = points.len() as i64;
        let w = if n == 0 { Rational::zero() } else { crate::rational::q(1, n) };
        Self::new(points, vec![w; n as usize])
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn index_of(&self, p: &P) -> Option<usize> {
        self.points.iter().position(|x| x == p)
    }
}

impl FinProbSpace<usize> {
    /// Points `0..n` with the given weights.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self, MeasureError> {
        Self::new((0..weights.len()).collect(), weights)
    }

    /// `2^depth` points of weight `2^-depth`.
    pub fn dyadic(depth: u32) -> Self {
        let n = 1usize << depth;
        Self::uniform((0..n).collect()).expect("dyadic space is valid")
    }
}

impl<P> FinProbSpace<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> Rational {
        self.weights.iter().min().cloned().unwrap_or_else(Rational::zero)
    }

    /// Mass of the points selected by `mask`.
    pub fn mass(&self, mask: &[bool]) -> Rational {
        self.weights.iter().zip(mask).filter(|(_, m)| **m).map(|(w, _)| w).sum()
    }

    /// Same weights, points relabelled `0..n`.
    pub fn indexed(&self) -> FinProbSpace<usize> {
        FinProbSpace { points: (0..self.len()).collect(), weights: self.weights.clone() }
    }
}

impl<P: fmt::Display> fmt::Display for FinProbSpace<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (p, w)) in self.points.iter().zip(&self.weights).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {}", fmt_rational(w))?;
        }
        write!(f, "}}")
    }
}

/// A real function on a finite ground set, listed in point order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFn(pub Vec<Rational>);

impl RationalFn {
    pub fn constant(value: Rational, len: usize) -> Self {
        RationalFn(vec![value; len])
    }

    pub fn indicator(mask: &[bool]) -> Self {
        RationalFn(mask.iter().map(|&b| if b { Rational::one() } else { Rational::zero() }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// `h ∘ π`.
    pub fn pull_back(&self, pi: &MeasurableMap) -> RationalFn {
        RationalFn(pi.targets().iter().map(|&y| self.0[y].clone()).collect())
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        RationalFn(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        RationalFn(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// A total map from the points of a domain (by index) to the points of a
/// codomain (by index).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurableMap {
    targets: Vec<usize>,
    codomain_len: usize,
}

impl MeasurableMap {
    pub fn new(targets: Vec<usize>, codomain_len: usize) -> Result<Self, MeasureError> {
        for (point, &target) in targets.iter().enumerate() {
            if target >= codomain_len {
                return Err(MeasureError::TargetOutOfRange { point, target, size: codomain_len });
            }
        }
        Ok(MeasurableMap { targets, codomain_len })
    }

    pub fn identity(len: usize) -> Self {
        MeasurableMap { targets: (0..len).collect(), codomain_len: len }
    }

    /// Builds the map `p ↦ f(p)` onto the listed codomain labels.
    pub fn from_fn<P, Q: PartialEq>(domain: &[P], codomain: &[Q], f: impl Fn(&P) -> Q) -> Result<Self, MeasureError> {
        let mut targets = Vec::with_capacity(domain.len());
        for (point, p) in domain.iter().enumerate() {
            let q = f(p);
            let target = codomain
                .iter()
                .position(|c| *c == q)
                .ok_or(MeasureError::TargetOutOfRange { point, target: codomain.len(), size: codomain.len() })?;
            targets.push(target);
        }
        Ok(MeasurableMap { targets, codomain_len: codomain.len() })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn domain_len(&self) -> usize {
        self.targets.len()
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain_len
    }

    pub fn apply(&self, x: usize) -> usize {
        self.targets[x]
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), MeasureError> {
    if expected == got {
        Ok(())
    } else {
        Err(MeasureError::LengthMismatch { expected, got })
    }
}

/// Image weights on the whole codomain, zeros included.
pub fn image_weights<P>(mu: &FinProbSpace<P>, pi: &MeasurableMap) -> Result<Vec<Rational>, MeasureError> {
    check_len(mu.len(), pi.domain_len())?;
    let mut w = vec![Rational::zero(); pi.codomain_len()];
    for (x, y) in pi.targets().iter().enumerate() {
        w[*y] += mu.weight(x);
    }
    Ok(w)
}

/// The image measure `π̂(μ)`, on the codomain points of positive weight.
/// Points are the codomain indices.
pub fn image_measure<P>(mu: &FinProbSpace<P>, pi: &MeasurableMap) -> Result<FinProbSpace<usize>, MeasureError> {
    let w = image_weights(mu, pi)?;
    let (points, weights): (Vec<usize>, Vec<Rational>) =
        w.into_iter().enumerate().filter(|(_, w)| w.is_positive()).unzip();
    Ok(FinProbSpace { points, weights })
}

/// `E[f | π]` as a function on the codomain; `None` on null fibres.
pub fn cond_exp<P>(mu: &FinProbSpace<P>, f: &RationalFn, pi: &MeasurableMap) -> Result<Vec<Option<Rational>>, MeasureError> {
    check_len(mu.len(), f.len())?;
    let w = image_weights(mu, pi)?;
    let mut num = vec![Rational::zero(); pi.codomain_len()];
    for (x, y) in pi.targets().iter().enumerate() {
        num[*y] += &f.0[x] * mu.weight(x);
    }
    Ok(num.into_iter().zip(w).map(|(n, d)| if d.is_zero() { None } else { Some(n / d) }).collect())
}

/// `⟨φ, μ⟩ = Σ φ(x) μ(x)`.
pub fn pair<P>(phi: &RationalFn, mu: &FinProbSpace<P>) -> Result<Rational, MeasureError> {
    check_len(mu.len(), phi.len())?;
    Ok(phi.0.iter().zip(mu.weights()).map(|(a, w)| a * w).sum())
}

/// `⟨φ, w⟩` for a weight vector that may contain zeros.
pub fn pair_weights(phi: &[Rational], weights: &[Rational]) -> Rational {
    phi.iter().zip(weights).map(|(a, w)| a * w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    #[test]
    fn validation() {
        assert!(FinProbSpace::from_weights(vec![q(1, 2), q(1, 2)]).is_ok());
        assert!(matches!(FinProbSpace::from_weights(vec![q(1, 2), q(1, 3)]), Err(MeasureError::TotalNotOne(_))));
        assert!(matches!(
            FinProbSpace::from_weights(vec![int(1), int(0)]),
            Err(MeasureError::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(FinProbSpace::new(vec!['a', 'a'], vec![q(1, 2), q(1, 2)]), Err(MeasureError::DuplicateLabel(1))));
        assert_eq!(FinProbSpace::dyadic(3).len(), 8);
    }

    #[test]
    fn image_and_conditional() {
        let mu = FinProbSpace::uniform(vec![1, 2, 3, 4]).unwrap();
        let pi = MeasurableMap::new(vec![0, 0, 1, 1], 2).unwrap();
        let img = image_measure(&mu, &pi).unwrap();
        assert_eq!(img.weights(), &[q(1, 2), q(1, 2)]);
        assert_eq!(image_measure(&mu, &MeasurableMap::identity(4)).unwrap().weights(), mu.weights());
        let f = RationalFn(vec![int(0), int(1), int(1), int(1)]);
        assert_eq!(cond_exp(&mu, &f, &pi).unwrap(), vec![Some(q(1, 2)), Some(int(1))]);

        let nu = FinProbSpace::from_weights(vec![q(1, 3), q(1, 6), q(1, 2)]).unwrap();
        let pi2 = MeasurableMap::new(vec![0, 0, 1], 2).unwrap();
        assert_eq!(image_measure(&nu, &pi2).unwrap().weights(), &[q(1, 2), q(1, 2)]);

        let eta = FinProbSpace::from_weights(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        let g = RationalFn(vec![int(1), int(0), int(1)]);
        assert_eq!(cond_exp(&eta, &g, &pi2).unwrap(), vec![Some(q(2, 3)), Some(int(1))]);
    }

    #[test]
    fn null_fibres_are_excluded() {
        let mu = FinProbSpace::uniform(vec![0, 1]).unwrap();
        let pi = MeasurableMap::new(vec![0, 0], 2).unwrap();
        let g = cond_exp(&mu, &RationalFn::constant(q(1, 3), 2), &pi).unwrap();
        assert_eq!(g, vec![Some(q(1, 3)), None]);
        assert_eq!(image_measure(&mu, &pi).unwrap().points(), &[0]);
    }

    #[test]
    fn pairing() {
        let mu = FinProbSpace::from_weights(vec![q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(pair(&RationalFn::constant(int(1), 2), &mu).unwrap(), int(1));
        assert_eq!(pair(&RationalFn::indicator(&[true, false]), &mu).unwrap(), q(1, 3));
        let half = FinProbSpace::from_weights(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(pair(&RationalFn(vec![q(1, 2), q(1, 4)]), &half).unwrap(), q(3, 8));
        assert!(pair(&RationalFn(vec![int(1)]), &half).is_err());
    }
}
