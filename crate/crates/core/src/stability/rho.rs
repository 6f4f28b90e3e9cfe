//! `ρ`, its expectation `ρ̂` over fibre products of type measures, and the
//! averaged joint type witnessing the nonforking extension.
//!
//! Over a finite structure `acl(A) = M`, so the set `P̂` of global
//! `φ`-types compatible with `p` is just the set of traces of the
//! realizations of `p`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{cb_rank_mult, CbRank, PhiContext, StabilityError};
use crate::logic::automorphism::automorphisms;
use crate::logic::hintikka::isolating_formula_in;
use crate::logic::types::type_space_shared;
use crate::logic::{FinStructure, Formula, TypeId, TypeSpace};
use crate::measure::{
    extend_measure_eq, fiber_product, pair, verify_certificate, Certificate, Constraint, ConstraintKind, FiberSpace,
    FinProbSpace, LinFeasProblem, MeasurableMap, RationalFn,
};
use crate::rational::{fmt_rational, q, Rational};
use crate::rtype::RMeasure;

fn check_p_space(ctx: &PhiContext, space: &TypeSpace) -> Result<(), StabilityError> {
    if space.structure() != ctx.structure() || !ctx.params().iter().all(|a| space.params().contains(a)) {
        return Err(StabilityError::SpaceMismatch);
    }
    if space.arity() != ctx.x_vars().len() {
        return Err(StabilityError::Arity { expected: ctx.x_vars().len(), got: space.arity() });
    }
    Ok(())
}

/// `P̂`: the distinct traces of the realizations of `p`.
fn p_hat<'a>(ctx: &'a PhiContext, members: &[Vec<usize>]) -> Vec<&'a [bool]> {
    let mut out: Vec<&[bool]> = Vec::new();
    for a in members {
        let t = ctx.trace(a);
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

fn fraction(ctx: &PhiContext, members: &[Vec<usize>], b: &[usize]) -> Result<Rational, StabilityError> {
    let hat = p_hat(ctx, members);
    if hat.is_empty() {
        return Err(StabilityError::Inconsistent);
    }
    let j = ctx.y_index(b);
    let hits = hat.iter().filter(|t| t[j]).count();
    Ok(q(hits as i64, hat.len() as i64))
}

/// `ρ(p, b)` by both definitions: the share of `P̂` containing `φ(x, b)`, and
/// `M(p ∪ {φ(x,b)}, φ, 0) / M(p, φ, 0)`.
pub fn rho_both(ctx: &PhiContext, p_space: &TypeSpace, p: TypeId, b: &[usize]) -> Result<(Rational, Rational), StabilityError> {
    check_p_space(ctx, p_space)?;
    if b.len() != ctx.y_vars().len() {
        return Err(StabilityError::Arity { expected: ctx.y_vars().len(), got: b.len() });
    }
    let pi = isolating_formula_in(p_space, p, ctx.x_vars());
    both_given(ctx, &p_space.members(p), &pi, b)
}

/// `rho_both` for every `b` (indexed like `y`-tuples), with the isolating
/// formula of `p` built once.
pub fn rho_both_row(ctx: &PhiContext, p_space: &TypeSpace, p: TypeId) -> Result<Vec<(Rational, Rational)>, StabilityError> {
    check_p_space(ctx, p_space)?;
    let pi = isolating_formula_in(p_space, p, ctx.x_vars());
    let members = p_space.members(p);
    let count = ctx.structure().size().pow(ctx.y_vars().len() as u32);
    (0..count).map(|j| both_given(ctx, &members, &pi, &ctx.y_tuple(j))).collect()
}

fn both_given(ctx: &PhiContext, members: &[Vec<usize>], pi: &Formula, b: &[usize]) -> Result<(Rational, Rational), StabilityError> {
    let frac = fraction(ctx, members, b)?;
    let den = cb_rank_mult(ctx, pi)?;
    let num = cb_rank_mult(ctx, &Formula::and(vec![pi.clone(), ctx.instance(b)]))?;
    let ratio = match (num, den) {
        (_, CbRank::Inconsistent) => return Err(StabilityError::Inconsistent),
        (n, CbRank::Rank { rank, multiplicity }) => {
            assert_eq!(rank, 0, "a finite structure has a discrete φ-type space");
            q(n.multiplicity() as i64, multiplicity as i64)
        }
    };
    Ok((frac, ratio))
}

/// `ρ(p, b)`; errors when the two definitions disagree.
pub fn rho(ctx: &PhiContext, p_space: &TypeSpace, p: TypeId, b: &[usize]) -> Result<Rational, StabilityError> {
    let (frac, ratio) = rho_both(ctx, p_space, p, b)?;
    if frac != ratio {
        return Err(StabilityError::Disagreement { fraction: fmt_rational(&frac), ratio: fmt_rational(&ratio) });
    }
    Ok(frac)
}

/// `ρ(p, q)` with `b` the least realization of `q`.
pub fn rho_of_type(ctx: &PhiContext, p_space: &TypeSpace, p: TypeId, q_space: &TypeSpace, qt: TypeId) -> Result<Rational, StabilityError> {
    if q_space.structure() != ctx.structure() || q_space.params() != p_space.params() {
        return Err(StabilityError::SpaceMismatch);
    }
    rho(ctx, p_space, p, q_space.representative(qt))
}

/// `S_{x,W} ×_{S_W} S_{y,W}`, coordinates ordered object variables first,
/// then `W`.
#[derive(Debug, Clone)]
pub struct FiberTypeSpace {
    pub sx: Arc<TypeSpace>,
    pub sy: Arc<TypeSpace>,
    pub sw: Arc<TypeSpace>,
    pub fiber: FiberSpace,
}

impl FiberTypeSpace {
    pub fn new(sx: Arc<TypeSpace>, sy: Arc<TypeSpace>, w: usize) -> Result<Self, StabilityError> {
        if sx.structure() != sy.structure() || !sx.params().is_empty() || !sy.params().is_empty() {
            return Err(StabilityError::SpaceMismatch);
        }
        if sx.arity() < w || sy.arity() < w {
            return Err(StabilityError::Arity { expected: w, got: sx.arity().min(sy.arity()) });
        }
        let sw = Arc::new(type_space_shared(sx.shared_structure().clone(), w, &[]));
        let proj = |s: &TypeSpace| {
            let coords: Vec<usize> = (s.arity() - w..s.arity()).collect();
            let t = s.projection(&coords, &sw).into_iter().map(|t| t.0).collect();
            MeasurableMap::new(t, sw.len()).expect("projection lands in S_W")
        };
        let fiber = FiberSpace::new(proj(&sx), proj(&sy))?;
        Ok(FiberTypeSpace { sx, sy, sw, fiber })
    }
}

/// A fibre point `(s, t)` realized as `(a, ā)` and `(b, ā)` with a common
/// parameter tuple.
#[derive(Debug, Clone)]
pub(super) struct AlignedPoint {
    pub weight: Rational,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub params: Vec<usize>,
}

/// Fibre product of `p` and `q` on their supports, with each point aligned.
fn aligned_points(ctx: &PhiContext, p: &RMeasure, q: &RMeasure) -> Result<Vec<AlignedPoint>, StabilityError> {
    let arities = (ctx.x_vars().len(), ctx.y_vars().len(), ctx.w_vars().len());
    aligned_points_in(ctx.structure(), arities, p, q)
}

pub(super) fn aligned_points_in(
    m: &FinStructure,
    (nx, ny, nw): (usize, usize, usize),
    p: &RMeasure,
    q: &RMeasure,
) -> Result<Vec<AlignedPoint>, StabilityError> {
    if p.space().structure() != m || q.space().structure() != m {
        return Err(StabilityError::SpaceMismatch);
    }
    if p.space().arity() != nx + nw {
        return Err(StabilityError::Arity { expected: nx + nw, got: p.space().arity() });
    }
    if q.space().arity() != ny + nw {
        return Err(StabilityError::Arity { expected: ny + nw, got: q.space().arity() });
    }
    let fts = FiberTypeSpace::new(p.space().clone(), q.space().clone(), nw)?;
    let (sp, sq) = (p.support(), q.support());
    let restrict = |supp: &[TypeId], pi: &MeasurableMap| {
        MeasurableMap::new(supp.iter().map(|t| pi.apply(t.0)).collect(), pi.codomain_len()).expect("restriction of a map")
    };
    let mu = FinProbSpace::new(sp.clone(), sp.iter().map(|t| p.weight(*t).clone()).collect())?;
    let nu = FinProbSpace::new(sq.clone(), sq.iter().map(|t| q.weight(*t).clone()).collect())?;
    let fib = FiberSpace::new(restrict(&sp, fts.fiber.pi_x()), restrict(&sq, fts.fiber.pi_y()))?;
    let prod = fiber_product(&mu, &nu, &fib)?;
    let group = automorphisms(m, &[]);
    let mut out = Vec::with_capacity(fib.len());
    for (k, &(i, j)) in fib.pairs().iter().enumerate() {
        let (a_full, b_full) = (p.space().representative(sp[i]), q.space().representative(sq[j]));
        let params = a_full[nx..].to_vec();
        let sigma = group
            .iter()
            .find(|g| b_full[ny..].iter().zip(&params).all(|(&from, &to)| g[from] == to))
            .expect("fibre points share their W-type");
        out.push(AlignedPoint {
            weight: prod.weight(k).clone(),
            a: a_full[..nx].to_vec(),
            b: b_full[..ny].iter().map(|&e| sigma[e]).collect(),
            params,
        });
    }
    Ok(out)
}

/// Type spaces of a fixed arity over varying parameter tuples, built once.
pub(super) struct LocalSpaces {
    structure: Arc<FinStructure>,
    arity: usize,
    cache: HashMap<Vec<usize>, Arc<TypeSpace>>,
}

impl LocalSpaces {
    pub(super) fn new(structure: Arc<FinStructure>, arity: usize) -> Self {
        LocalSpaces { structure, arity, cache: HashMap::new() }
    }

    pub(super) fn over(&mut self, params: &[usize]) -> Arc<TypeSpace> {
        let (m, n) = (&self.structure, self.arity);
        self.cache.entry(params.to_vec()).or_insert_with(|| Arc::new(type_space_shared(m.clone(), n, params))).clone()
    }
}

/// `E^{p ⊗_{S_W} q}[ρ]`, with `W` the parameter variables of `ctx`. Each
/// fibre point `(s, t)` contributes `ρ(tp(a/ā), b)` for realizations
/// `(a, ā) ⊨ s` and `(b, ā) ⊨ t`.
pub fn rho_hat(ctx: &PhiContext, p: &RMeasure, q: &RMeasure) -> Result<Rational, StabilityError> {
    let points = aligned_points(ctx, p, q)?;
    let mut local = LocalSpaces::new(ctx.shared_structure().clone(), ctx.x_vars().len());
    let mut values = Vec::with_capacity(points.len());
    for pt in &points {
        let c = ctx.with_params(&pt.params)?;
        let space = local.over(&pt.params);
        values.push(rho(&c, &space, space.type_of(&pt.a), &pt.b)?);
    }
    let weights = FinProbSpace::new((0..points.len()).collect(), points.iter().map(|p| p.weight.clone()).collect())?;
    Ok(pair(&RationalFn(values), &weights)?)
}

/// The averaged joint type of `(x, ȳ, W)` extending `p` and `q`.
#[derive(Debug, Clone)]
pub struct NonforkingExtension {
    /// On `S_{x,ȳ,W}` over `∅`.
    pub measure: RMeasure,
    pub rho_hat: Rational,
    /// Mass of `φ(x, ȳ, w̄)` under `measure`.
    pub phi_value: Rational,
    /// Marginal equalities and the `φ`-mass, as an equality problem on the
    /// types of `S_{x,ȳ,W}`; the constant function 1 is the last constraint.
    pub problem: LinFeasProblem,
    pub certificate: Certificate,
    /// The certificate is feasible and re-verifies.
    pub certified: bool,
    /// Every fibre point of positive weight passed positive mass on.
    pub positive: bool,
}

/// Splits each fibre point's weight evenly over `P̂(tp(a/ā))`, and each
/// share evenly over the realizations of `tp(a/ā)` with that trace.
pub fn nonforking_extension(ctx: &PhiContext, p: &RMeasure, q: &RMeasure) -> Result<NonforkingExtension, StabilityError> {
    let (nx, ny, nw) = (ctx.x_vars().len(), ctx.y_vars().len(), ctx.w_vars().len());
    let points = aligned_points(ctx, p, q)?;
    let m = ctx.shared_structure().clone();
    let target = Arc::new(type_space_shared(m.clone(), nx + ny + nw, &[]));
    let mut local = LocalSpaces::new(m, nx);
    let mut weights = vec![Rational::zero(); target.len()];
    let mut positive = true;
    let mut rho_hat = Rational::zero();
    for pt in &points {
        let c = ctx.with_params(&pt.params)?;
        let space = local.over(&pt.params);
        let p0 = space.type_of(&pt.a);
        let members = space.members(p0);
        let hat = p_hat(&c, &members);
        rho_hat += &pt.weight * rho(&c, &space, p0, &pt.b)?;
        let share = &pt.weight / Rational::from_integer(hat.len().into());
        let mut passed = Rational::zero();
        for t in &hat {
            let carriers: Vec<&Vec<usize>> = members.iter().filter(|a| c.trace(a) == *t).collect();
            let each = &share / Rational::from_integer(carriers.len().into());
            for a in carriers {
                let joint: Vec<usize> = a.iter().chain(&pt.b).chain(&pt.params).copied().collect();
                weights[target.type_of(&joint).0] += &each;
                passed += &each;
            }
        }
        positive &= passed == pt.weight;
    }
    let measure = RMeasure::new(target.clone(), weights)?;
    let x_w: Vec<usize> = (0..nx).chain(nx + ny..nx + ny + nw).collect();
    let y_w: Vec<usize> = (nx..nx + ny + nw).collect();
    let indicator = |proj: &[TypeId], k: usize| -> Vec<Rational> {
        proj.iter().map(|t| if t.0 == k { Rational::one() } else { Rational::zero() }).collect()
    };
    let mut constraints = Vec::new();
    for (coords, marg) in [(&x_w, p), (&y_w, q)] {
        let proj = target.projection(coords, marg.space());
        for t in marg.space().ids() {
            constraints.push(Constraint { kind: ConstraintKind::Exactly, bound: marg.weight(t).clone(), values: indicator(&proj, t.0) });
        }
    }
    let vars: Vec<String> = ctx.x_vars().iter().chain(ctx.y_vars()).chain(ctx.w_vars()).cloned().collect();
    let mut phi_values = Vec::with_capacity(target.len());
    for t in target.ids() {
        let one = RMeasure::point_mass(target.clone(), t);
        phi_values.push(one.mass_of(ctx.phi(), &vars)?);
    }
    constraints.push(Constraint { kind: ConstraintKind::Exactly, bound: rho_hat.clone(), values: phi_values });
    let problem = LinFeasProblem::new(target.len(), constraints)?;
    let (problem, certificate) = extend_measure_eq(&problem)?;
    let certified = certificate.is_feasible() && verify_certificate(&problem, &certificate);
    let phi_value = measure.mass_of(ctx.phi(), &vars)?;
    Ok(NonforkingExtension { measure, rho_hat, phi_value, problem, certificate, certified, positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, standard, type_space};
    use crate::measure::verify_certificate;

    fn ctx(m: FinStructure, phi: &str, w: &[&str], params: &[usize]) -> PhiContext {
        let f = parse_formula(phi, m.signature()).unwrap();
        PhiContext::new(Arc::new(m), f, &["x"], &["y"], w, params).unwrap()
    }

    #[test]
    fn m2_half() {
        let c = ctx(standard::m2(), "x=y", &[], &[]);
        let s1 = type_space(c.structure(), 1, &[]);
        assert_eq!(rho(&c, &s1, TypeId(0), &[0]).unwrap(), q(1, 2));
        let over0 = type_space(c.structure(), 1, &[0]);
        let p = over0.type_of(&[0]);
        assert_eq!(rho(&c, &over0, p, &[0]).unwrap(), q(1, 1));
        assert_eq!(rho(&c, &over0, p, &[1]).unwrap(), q(0, 1));
    }

    #[test]
    fn both_formulas_agree_exhaustively() {
        for m in [standard::m2(), standard::c3(), standard::l3()] {
            let sig = m.signature().clone();
            let m = Arc::new(m);
            let mut phis = crate::randomizer::corpus::atoms(&sig);
            phis.push(parse_formula("!(x=y)", &sig).unwrap());
            for f in phis {
                let c = PhiContext::new(m.clone(), f, &["x"], &["y"], &[], &[]).unwrap();
                let mut spaces = vec![type_space_shared(m.clone(), 1, &[])];
                spaces.extend((0..m.size()).map(|a| type_space_shared(m.clone(), 1, &[a])));
                for space in &spaces {
                    for p in space.ids() {
                        for b in 0..m.size() {
                            let (f, r) = rho_both(&c, space, p, &[b]).unwrap();
                            assert_eq!(f, r);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn point_masses_give_rho() {
        let c = ctx(standard::l3(), "x<y", &[], &[]);
        let m = c.shared_structure().clone();
        let s1 = Arc::new(type_space_shared(m.clone(), 1, &[]));
        for pt in s1.ids() {
            for qt in s1.ids() {
                let hat = rho_hat(&c, &RMeasure::point_mass(s1.clone(), pt), &RMeasure::point_mass(s1.clone(), qt)).unwrap();
                assert_eq!(hat, rho_of_type(&c, &s1, pt, &s1, qt).unwrap());
            }
        }
    }

    #[test]
    fn m2_uniform_brute_force() {
        let c = ctx(standard::m2(), "x=y", &["w"], &[0]);
        let m = c.shared_structure().clone();
        let s2 = Arc::new(type_space_shared(m.clone(), 2, &[]));
        let p = RMeasure::uniform(s2.clone());
        let qm = RMeasure::new(s2.clone(), vec![q(1, 3), q(2, 3)]).unwrap();
        let hat = rho_hat(&c, &p, &qm).unwrap();
        // brute force: fibre over the single W-type, ρ at each pair of representatives
        let mut direct = Rational::zero();
        for s in s2.ids() {
            for t in s2.ids() {
                let a = s2.representative(s);
                let b = s2.members(t).into_iter().find(|b| b[1] == a[1]).unwrap();
                let cw = c.with_params(&[a[1]]).unwrap();
                let local = type_space_shared(m.clone(), 1, &[a[1]]);
                direct += p.weight(s) * qm.weight(t) * rho(&cw, &local, local.type_of(&a[..1]), &b[..1]).unwrap();
            }
        }
        assert_eq!(hat, direct);
        // x=w w.p. 1/2 and y=w w.p. 1/3 independently; in M2, x=y iff both or neither
        assert_eq!(hat, q(1, 2) * q(1, 3) + q(1, 2) * q(2, 3));
    }

    #[test]
    fn deterministic_parameter_is_definition() {
        // q is the point mass of (b, a) with b = a, so ρ̂ is P[x=w] under p
        let c = ctx(standard::c3(), "E(x,y)", &["w"], &[0]);
        let m = c.shared_structure().clone();
        let s2 = Arc::new(type_space_shared(m.clone(), 2, &[]));
        let p = RMeasure::new(s2.clone(), vec![q(1, 6), q(1, 3), q(1, 2)]).unwrap();
        let qm = RMeasure::point_mass(s2.clone(), s2.type_of(&[0, 0]));
        let phi = parse_formula("E(x,w)", m.signature()).unwrap();
        let value = p.mass_of(&phi, &["x".into(), "w".into()]).unwrap();
        assert_eq!(rho_hat(&c, &p, &qm).unwrap(), value);
    }

    #[test]
    fn mismatched_marginals() {
        let c = ctx(standard::l3(), "x<y", &["w"], &[0]);
        let m = c.shared_structure().clone();
        let s2 = Arc::new(type_space_shared(m, 2, &[]));
        let p = RMeasure::point_mass(s2.clone(), s2.type_of(&[0, 0]));
        let qm = RMeasure::point_mass(s2.clone(), s2.type_of(&[1, 1]));
        assert!(matches!(rho_hat(&c, &p, &qm), Err(StabilityError::Measure(_))));
    }

    #[test]
    fn extension_m2() {
        let c = ctx(standard::m2(), "x=y", &[], &[]);
        let m = c.shared_structure().clone();
        let s1 = Arc::new(type_space_shared(m.clone(), 1, &[]));
        let p = RMeasure::uniform(s1.clone());
        let ext = nonforking_extension(&c, &p, &RMeasure::point_mass(s1.clone(), TypeId(0))).unwrap();
        assert_eq!(ext.phi_value, q(1, 2));
        assert_eq!(ext.rho_hat, q(1, 2));
        assert!(ext.certified && ext.positive);
        assert!(verify_certificate(&ext.problem, &Certificate::Feasible(ext.measure.weights().to_vec())));
        assert_eq!(ext.measure.marginal(&[0], s1.clone()), p);
    }

    #[test]
    fn extension_without_new_variables() {
        let m = Arc::new(standard::l3());
        let f = parse_formula("x<w", m.signature()).unwrap();
        let c = PhiContext::new(m.clone(), f, &["x"], &[], &["w"], &[0]).unwrap();
        let s2 = Arc::new(type_space_shared(m, 2, &[]));
        let weights: Vec<Rational> = (0..s2.len()).map(|i| q(i as i64 + 1, (s2.len() * (s2.len() + 1) / 2) as i64)).collect();
        let p = RMeasure::new(s2.clone(), weights).unwrap();
        let qm = p.marginal(&[1], Arc::new(type_space_shared(s2.shared_structure().clone(), 1, &[])));
        let ext = nonforking_extension(&c, &p, &qm).unwrap();
        assert_eq!(ext.measure.weights(), p.weights());
        assert!(ext.certified);
    }
}
