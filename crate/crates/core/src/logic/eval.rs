//! Tarski semantics over a finite structure.

use std::collections::BTreeMap;

use thiserror::Error;

use super::formula::{Formula, Term};
use super::structure::FinStructure;

pub type Assignment = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("free variable `{0}` has no value")]
    UnassignedVariable(String),
    #[error("element {element} outside universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("symbol `{0}` not in the signature")]
    UnknownSymbol(String),
    #[error("type atom refers to a different structure")]
    ForeignType,
}

struct Env<'a> {
    outer: &'a Assignment,
    bound: Vec<(&'a str, usize)>,
}

impl Env<'_> {
    fn lookup(&self, v: &str) -> Result<usize, EvalError> {
        if let Some((_, e)) = self.bound.iter().rev().find(|(n, _)| *n == v) {
            return Ok(*e);
        }
        self.outer.get(v).copied().ok_or_else(|| EvalError::UnassignedVariable(v.to_string()))
    }
}

pub fn eval_term(m: &FinStructure, t: &Term, val: &Assignment) -> Result<usize, EvalError> {
    term(m, t, &Env { outer: val, bound: Vec::new() })
}

fn term(m: &FinStructure, t: &Term, env: &Env<'_>) -> Result<usize, EvalError> {
    let e = match t {
        Term::Var(v) => env.lookup(v)?,
        Term::Elem(k) => *k,
        Term::Const(c) => {
            let i = m.signature().constant_index(c).ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?;
            m.constant(i)
        }
        Term::App(f, args) => {
            let i = m.signature().function_index(f).ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
            let vals = args.iter().map(|a| term(m, a, env)).collect::<Result<Vec<_>, _>>()?;
            m.apply(i, &vals)
        }
    };
    if e >= m.size() {
        return Err(EvalError::ElementOutOfRange { element: e, size: m.size() });
    }
    Ok(e)
}

/// Satisfaction of `phi` in `m` under `val`; quantifiers range over the universe.
pub fn eval_formula(m: &FinStructure, phi: &Formula, val: &Assignment) -> Result<bool, EvalError> {
    let mut env = Env { outer: val, bound: Vec::new() };
    sat(m, phi, &mut env)
}

fn sat<'a>(m: &FinStructure, phi: &'a Formula, env: &mut Env<'a>) -> Result<bool, EvalError> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(a, b) => term(m, a, env)? == term(m, b, env)?,
        Formula::Rel(r, args) => {
            let i = m.signature().relation_index(r).ok_or_else(|| EvalError::UnknownSymbol(r.clone()))?;
            let vals = args.iter().map(|a| term(m, a, env)).collect::<Result<Vec<_>, _>>()?;
            m.holds(i, &vals)
        }
        Formula::TypeIs(atom) => {
            let space = &atom.space;
            if !std::ptr::eq(space.structure(), m) && space.structure() != m {
                return Err(EvalError::ForeignType);
            }
            let vals = atom.args.iter().map(|a| term(m, a, env)).collect::<Result<Vec<_>, _>>()?;
            space.type_of(&vals) == atom.ty
        }
        Formula::Not(f) => !sat(m, f, env)?,
        Formula::And(fs) => {
            for f in fs {
                if !sat(m, f, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for f in fs {
                if sat(m, f, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !sat(m, a, env)? || sat(m, b, env)?,
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let want = matches!(phi, Formula::Exists(..));
            for e in m.universe() {
                env.bound.push((v.as_str(), e));
                let r = sat(m, body, env);
                env.bound.pop();
                if r? == want {
                    return Ok(want);
                }
            }
            !want
        }
    })
}

/// Tuples `ā` over the universe with `m ⊨ phi(ā)`, for the listed variables.
pub fn extension(m: &FinStructure, phi: &Formula, vars: &[String]) -> Result<Vec<Vec<usize>>, EvalError> {
    let mut out = Vec::new();
    let count = m.size().pow(vars.len() as u32);
    let mut val = Assignment::new();
    for idx in 0..count {
        let tuple = super::structure::tuple_at(m.size(), vars.len(), idx);
        for (v, e) in vars.iter().zip(&tuple) {
            val.insert(v.clone(), *e);
        }
        if eval_formula(m, phi, &val)? {
            out.push(tuple);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, standard};

    fn assign(pairs: &[(&str, usize)]) -> Assignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn basic_examples() {
        let c3 = standard::c3();
        let e = parse_formula("E(x,y)", c3.signature()).unwrap();
        assert!(eval_formula(&c3, &e, &assign(&[("x", 0), ("y", 1)])).unwrap());
        assert!(!eval_formula(&c3, &e, &assign(&[("x", 1), ("y", 0)])).unwrap());
        let l3 = standard::l3();
        let least = parse_formula("forall z (x<z | x=z)", l3.signature()).unwrap();
        let holds: Vec<bool> = (0..3).map(|a| eval_formula(&l3, &least, &assign(&[("x", a)])).unwrap()).collect();
        assert_eq!(holds, vec![true, false, false]);
    }

    #[test]
    fn errors() {
        let m2 = standard::m2();
        let f = parse_formula("x=y", m2.signature()).unwrap();
        assert_eq!(eval_formula(&m2, &f, &assign(&[("x", 0)])), Err(EvalError::UnassignedVariable("y".into())));
        let g = parse_formula("x=#5", m2.signature()).unwrap();
        assert!(matches!(eval_formula(&m2, &g, &assign(&[("x", 0)])), Err(EvalError::ElementOutOfRange { .. })));
    }

    #[test]
    fn bound_variable_shadows_assignment() {
        let m2 = standard::m2();
        let f = parse_formula("exists x (!(x=y)) & x=y", m2.signature()).unwrap();
        assert!(eval_formula(&m2, &f, &assign(&[("x", 1), ("y", 1)])).unwrap());
    }
}
