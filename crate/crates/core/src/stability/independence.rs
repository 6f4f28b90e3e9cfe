//! Independence of random tuples, decided by comparing `P[φ(c̄, b̄, Ā)]`
//! with `ρ̂_φ(tp(c̄, Ā), tp(b̄, Ā))` over a finite fragment of formulas.
//!
//! The fragment holds the atomic formulas in the variables, then every
//! union of joint classes of `(x̄, ȳ, w̄)`-tuples: automorphism orbits by
//! default, or classes of bounded quantifier depth when a depth is given.
//! Unions are enumerated by increasing size up to [`MAX_FRAGMENT`] formulas.

use std::fmt;
use std::sync::Arc;

use super::rho::{aligned_points_in, LocalSpaces};
use super::StabilityError;
use crate::logic::hintikka::isolating_formula_in;
use crate::logic::structure::{tuple_at, tuple_index, MAX_TABLE_CELLS};
use crate::logic::types::type_space_shared;
use crate::logic::{depth_classes, eval_formula, Assignment, FinStructure, Formula, Term, TypeId};
use crate::randomizer::{RandomElement, Randomization};
use crate::rational::{fmt_rational, q, Rational};
use crate::rtype::{rtype_of, RtypeError};

/// Cap on the number of semantically distinct formulas checked.
pub const MAX_FRAGMENT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub formula: Formula,
    pub probability: Rational,
    pub rho_hat: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceVerdict {
    pub independent: bool,
    /// Distinct formulas compared.
    pub checked: usize,
    pub witness: Option<Witness>,
    /// The union enumeration hit [`MAX_FRAGMENT`].
    pub truncated: bool,
    /// `None` for automorphism orbits.
    pub depth: Option<usize>,
}

impl fmt::Display for IndependenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trunc = if self.truncated { " truncated" } else { "" };
        match &self.witness {
            None => write!(f, "PASS independence checked={}{trunc}", self.checked),
            Some(w) => write!(
                f,
                "FAIL independence witness `{}` P={} rho_hat={} checked={}{trunc}",
                w.formula,
                fmt_rational(&w.probability),
                fmt_rational(&w.rho_hat),
                self.checked
            ),
        }
    }
}

fn group_vars(stem: &str, n: usize) -> Vec<String> {
    match n {
        1 => vec![stem.to_string()],
        _ => (1..=n).map(|i| format!("{stem}{i}")).collect(),
    }
}

/// Variable names for `c̄`, `b̄` and `Ā`: `x`, `y`, `w` for single
/// coordinates, otherwise numbered (`x1`, `x2`, ...).
pub fn variable_groups(nx: usize, ny: usize, nw: usize) -> (Vec<String>, Vec<String>, Vec<String>) {
    (group_vars("x", nx), group_vars("y", ny), group_vars("w", nw))
}

/// Atomic formulas over `vars`: equalities between distinct variables
/// first, then relation, function and constant atoms.
fn atoms(m: &FinStructure, vars: &[String]) -> Vec<Formula> {
    let v = |s: &String| Term::Var(s.clone());
    let mut out = Vec::new();
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            out.push(Formula::eq(v(a), v(b)));
        }
    }
    let tuples = |k: usize| (0..vars.len().pow(k as u32)).map(move |i| tuple_at(vars.len(), k, i));
    let sig = m.signature();
    for (name, k) in sig.relations() {
        for t in tuples(*k) {
            out.push(Formula::rel(name, t.iter().map(|&i| v(&vars[i])).collect()));
        }
    }
    for (name, k) in sig.functions() {
        for t in tuples(*k) {
            for r in vars {
                out.push(Formula::eq(Term::App(name.clone(), t.iter().map(|&i| v(&vars[i])).collect()), v(r)));
            }
        }
    }
    for c in sig.constants() {
        for r in vars {
            out.push(Formula::eq(v(r), Term::Const(c.clone())));
        }
    }
    out
}

/// Subsets of `0..k` by increasing size, lexicographic within a size.
fn subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..k).flat_map(move |size| {
        let mut cur: Option<Vec<usize>> = Some((0..size).collect());
        std::iter::from_fn(move || {
            let out = cur.take()?;
            let mut next = out.clone();
            let mut i = size;
            while i > 0 {
                i -= 1;
                if next[i] < k - size + i {
                    next[i] += 1;
                    for j in i + 1..size {
                        next[j] = next[j - 1] + 1;
                    }
                    cur = Some(next);
                    break;
                }
            }
            Some(out)
        })
    })
}

/// `c̄ ⫝_Ā b̄`, read as `P[φ(c̄, b̄, Ā)] = ρ̂_φ(tp(c̄, Ā), tp(b̄, Ā))` for every
/// `φ` in the fragment; the first failure is the witness. `depth` selects
/// bounded-depth classes instead of automorphism orbits.
pub fn check_independence(
    rand: &Randomization,
    c: &[RandomElement],
    b: &[RandomElement],
    a: &[RandomElement],
    depth: Option<usize>,
) -> Result<IndependenceVerdict, StabilityError> {
    rand.constant_structure().ok_or(RtypeError::NonConstantFamily)?;
    let m: Arc<FinStructure> = rand.family()[0].clone();
    let (nx, ny, nw) = (c.len(), b.len(), a.len());
    if nx == 0 {
        return Err(StabilityError::Variables("the first tuple is empty".into()));
    }
    let n = nx + ny + nw;
    let size = m.size();
    let cells = size.checked_pow(n as u32).filter(|&c| c <= MAX_TABLE_CELLS);
    let cells = cells.ok_or(StabilityError::TooLarge(n))?;
    let p = rtype_of(rand, c, a)?;
    let q_measure = rtype_of(rand, b, a)?;
    let points = aligned_points_in(&m, (nx, ny, nw), &p, &q_measure)?;

    let mut local = LocalSpaces::new(m.clone(), nx);
    let realizations: Vec<Vec<Vec<usize>>> = points
        .iter()
        .map(|pt| {
            let space = local.over(&pt.params);
            space.members(space.type_of(&pt.a))
        })
        .collect();
    let joint_index = |x: &[usize], y: &[usize], w: &[usize]| {
        let t: Vec<usize> = x.iter().chain(y).chain(w).copied().collect();
        tuple_index(size, &t)
    };
    let y_tuples: Vec<Vec<usize>> = (0..size.pow(ny as u32)).map(|i| tuple_at(size, ny, i)).collect();
    let observed: Vec<(usize, &Rational)> = (0..rand.len())
        .map(|w| {
            let at = |fs: &[RandomElement]| fs.iter().map(|f| f.at(w)).collect::<Vec<_>>();
            (joint_index(&at(c), &at(b), &at(a)), rand.base().weight(w))
        })
        .collect();

    let compare = |mask: &[bool]| -> (Rational, Rational) {
        let prob: Rational = observed.iter().filter(|(i, _)| mask[*i]).map(|(_, w)| (*w).clone()).sum();
        let mut hat = Rational::from_integer(0.into());
        for (pt, members) in points.iter().zip(&realizations) {
            let mut traces: Vec<Vec<bool>> = Vec::new();
            for x in members {
                let t: Vec<bool> = y_tuples.iter().map(|y| mask[joint_index(x, y, &pt.params)]).collect();
                if !traces.contains(&t) {
                    traces.push(t);
                }
            }
            let j = tuple_index(size, &pt.b);
            let hits = traces.iter().filter(|t| t[j]).count();
            hat += &pt.weight * q(hits as i64, traces.len() as i64);
        }
        (prob, hat)
    };

    let (xv, yv, wv) = variable_groups(nx, ny, nw);
    let vars: Vec<String> = xv.into_iter().chain(yv).chain(wv).collect();
    let mask_of = |phi: &Formula| -> Result<Vec<bool>, StabilityError> {
        (0..cells)
            .map(|i| {
                let val: Assignment = vars.iter().cloned().zip(tuple_at(size, n, i)).collect();
                Ok(eval_formula(&m, phi, &val)?)
            })
            .collect()
    };

    let (class_table, class_count, class_formula): (Vec<usize>, usize, Box<dyn Fn(usize) -> Formula>) = match depth {
        None => {
            let space = Arc::new(type_space_shared(m.clone(), n, &[]));
            let table = (0..cells).map(|i| space.type_of(&tuple_at(size, n, i)).0).collect();
            let vars = vars.clone();
            let count = space.len();
            (table, count, Box::new(move |k| isolating_formula_in(&space, TypeId(k), &vars)))
        }
        Some(d) => {
            let dc = depth_classes(&m, n, d, &[]);
            let vars = vars.clone();
            (dc.table().to_vec(), dc.count(), Box::new(move |k| dc.formula(k, &vars)))
        }
    };

    // ⊥ and ⊤ always agree; every later mask is new
    let mut seen: Vec<Vec<bool>> = vec![vec![false; cells], vec![true; cells]];
    let test = |seen: &mut Vec<Vec<bool>>, mask: Vec<bool>, formula: &dyn Fn() -> Formula| -> Option<Witness> {
        if seen.contains(&mask) {
            return None;
        }
        let (probability, rho_hat) = compare(&mask);
        seen.push(mask);
        (probability != rho_hat).then(|| Witness { formula: formula(), probability, rho_hat })
    };
    let verdict = |witness: Option<Witness>, seen: &[Vec<bool>], truncated: bool| IndependenceVerdict {
        independent: witness.is_none(),
        checked: seen.len() - 2,
        witness,
        truncated,
        depth,
    };

    for phi in atoms(&m, &vars) {
        let mask = mask_of(&phi)?;
        if let Some(w) = test(&mut seen, mask, &|| phi.clone()) {
            return Ok(verdict(Some(w), &seen, false));
        }
    }
    let mut truncated = false;
    for set in subsets(class_count) {
        if seen.len() - 2 >= MAX_FRAGMENT {
            truncated = true;
            break;
        }
        let mask: Vec<bool> = class_table.iter().map(|k| set.contains(k)).collect();
        let formula = || Formula::or(set.iter().map(|&k| class_formula(k)).collect());
        if let Some(w) = test(&mut seen, mask, &formula) {
            return Ok(verdict(Some(w), &seen, false));
        }
    }
    Ok(verdict(None, &seen, truncated))
}
