use num_traits::Zero;

use super::space::{cond_exp, image_weights, FinProbSpace, MeasurableMap, MeasureError, RationalFn};
use crate::rational::{fmt_rational, Rational};

/// `X ×_Z Y = {(x, y) : π_X(x) = π_Y(y)}`, points in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberSpace {
    pi_x: MeasurableMap,
    pi_y: MeasurableMap,
    pairs: Vec<(usize, usize)>,
}

impl FiberSpace {
    pub fn new(pi_x: MeasurableMap, pi_y: MeasurableMap) -> Result<Self, MeasureError> {
        if pi_x.codomain_len() != pi_y.codomain_len() {
            return Err(MeasureError::CodomainMismatch(pi_x.codomain_len(), pi_y.codomain_len()));
        }
        let mut pairs = Vec::new();
        for x in 0..pi_x.domain_len() {
            for y in 0..pi_y.domain_len() {
                if pi_x.apply(x) == pi_y.apply(y) {
                    pairs.push((x, y));
                }
            }
        }
        Ok(FiberSpace { pi_x, pi_y, pairs })
    }

    pub fn pi_x(&self) -> &MeasurableMap {
        &self.pi_x
    }

    pub fn pi_y(&self) -> &MeasurableMap {
        &self.pi_y
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Indicator of the rectangle `A ×_Z B` on the fibre points.
    pub fn rectangle(&self, a: &[bool], b: &[bool]) -> Vec<bool> {
        self.pairs.iter().map(|&(x, y)| a[x] && b[y]).collect()
    }

    /// Projection of the fibre space onto `X` (`first`) or `Y`.
    pub fn projection(&self, first: bool) -> MeasurableMap {
        let (targets, len) = if first {
            (self.pairs.iter().map(|p| p.0).collect(), self.pi_x.domain_len())
        } else {
            (self.pairs.iter().map(|p| p.1).collect(), self.pi_y.domain_len())
        };
        MeasurableMap::new(targets, len).expect("fibre pairs index their factors")
    }
}

/// Checks `π̂_X(μ) = π̂_Y(ν)` and returns the common image weights.
pub fn common_image<P, Q>(mu: &FinProbSpace<P>, nu: &FinProbSpace<Q>, fib: &FiberSpace) -> Result<Vec<Rational>, MeasureError> {
    let left = image_weights(mu, &fib.pi_x)?;
    let right = image_weights(nu, &fib.pi_y)?;
    for (z, (l, r)) in left.iter().zip(&right).enumerate() {
        if l != r {
            return Err(MeasureError::ImageMismatch { z, left: fmt_rational(l), right: fmt_rational(r) });
        }
    }
    Ok(left)
}

/// `μ ⊗_Z ν` with weight `μ(x) ν(y) / η(z)` at `(x, y)` over `z`, where `η`
/// is the common image. Points are indices into [`FiberSpace::pairs`].
pub fn fiber_product<P, Q>(mu: &FinProbSpace<P>, nu: &FinProbSpace<Q>, fib: &FiberSpace) -> Result<FinProbSpace<usize>, MeasureError> {
    let eta = common_image(mu, nu, fib)?;
    let weights: Vec<Rational> = fib
        .pairs
        .iter()
        .map(|&(x, y)| mu.weight(x) * nu.weight(y) / &eta[fib.pi_x.apply(x)])
        .collect();
    FinProbSpace::new((0..weights.len()).collect(), weights)
}

fn conditional_probability<P>(mu: &FinProbSpace<P>, set: &[bool], pi: &MeasurableMap) -> Result<Vec<Rational>, MeasureError> {
    let g = cond_exp(mu, &RationalFn::indicator(set), pi)?;
    Ok(g.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect())
}

/// `∫_Z P^μ[A|Z] P^ν[B|Z] dπ̂_X(μ)`.
pub fn rectangle_via_base<P, Q>(mu: &FinProbSpace<P>, nu: &FinProbSpace<Q>, fib: &FiberSpace, a: &[bool], b: &[bool]) -> Result<Rational, MeasureError> {
    let eta = common_image(mu, nu, fib)?;
    let pa = conditional_probability(mu, a, &fib.pi_x)?;
    let pb = conditional_probability(nu, b, &fib.pi_y)?;
    Ok(eta.iter().zip(pa.iter().zip(&pb)).map(|(w, (s, t))| w * s * t).sum())
}

/// `∫_A P^ν[B|Z] ∘ π_X dμ`.
pub fn rectangle_via_left<P, Q>(mu: &FinProbSpace<P>, nu: &FinProbSpace<Q>, fib: &FiberSpace, a: &[bool], b: &[bool]) -> Result<Rational, MeasureError> {
    common_image(mu, nu, fib)?;
    let pb = conditional_probability(nu, b, &fib.pi_y)?;
    Ok((0..mu.len()).filter(|&x| a[x]).map(|x| mu.weight(x) * &pb[fib.pi_x.apply(x)]).sum())
}

/// `∫_B P^μ[A|Z] ∘ π_Y dν`.
pub fn rectangle_via_right<P, Q>(mu: &FinProbSpace<P>, nu: &FinProbSpace<Q>, fib: &FiberSpace, a: &[bool], b: &[bool]) -> Result<Rational, MeasureError> {
    common_image(mu, nu, fib)?;
    let pa = conditional_probability(mu, a, &fib.pi_x)?;
    Ok((0..nu.len()).filter(|&y| b[y]).map(|y| nu.weight(y) * &pa[fib.pi_y.apply(y)]).sum())
}
