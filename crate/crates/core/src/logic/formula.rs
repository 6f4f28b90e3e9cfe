//! First-order terms and formulas.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::types::{TypeId, TypeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    /// An element of the universe used as a parameter, written `#k`.
    Elem(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Const(_) | Term::Elem(_) => {}
        }
    }

    fn rename(&self, from: &str, to: &Term) -> Term {
        match self {
            Term::Var(v) if v == from => to.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(from, to)).collect()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Elem(k) => write!(f, "#{k}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                write!(f, ")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// Semantic atom stating that the argument tuple has a given type.
/// Interpreted in the structure the type space was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeAtom {
    pub space: Arc<TypeSpace>,
    pub ty: TypeId,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    /// At least two conjuncts when built through [`Formula::and`] or the parser.
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    TypeIs(TypeAtom),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Self {
        Formula::Rel(name.to_string(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; flattens nested conjunctions, `true` for no conjuncts.
    pub fn and(parts: Vec<Formula>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => flat.extend(inner),
                Formula::True => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// Disjunction; flattens nested disjunctions, `false` for no disjuncts.
    pub fn or(parts: Vec<Formula>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => flat.extend(inner),
                Formula::False => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add_terms = |terms: &[&Term], bound: &Vec<String>| {
            let mut vs = BTreeSet::new();
            for t in terms {
                t.collect_vars(&mut vs);
            }
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => add_terms(&[a, b], bound),
            Formula::Rel(_, args) => add_terms(&args.iter().collect::<Vec<_>>(), bound),
            Formula::TypeIs(atom) => add_terms(&atom.args.iter().collect::<Vec<_>>(), bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Quantifier depth.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Not(f) => f.depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Implies(a, b) => a.depth().max(b.depth()),
            Formula::Exists(_, b) | Formula::Forall(_, b) => 1 + b.depth(),
            _ => 0,
        }
    }

    /// Substitutes `to` for the free occurrences of variable `from`.
    /// `to` must not contain variables bound inside `self`.
    pub fn substitute(&self, from: &str, to: &Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.rename(from, to), b.rename(from, to)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| a.rename(from, to)).collect()),
            Formula::TypeIs(atom) => Formula::TypeIs(TypeAtom {
                space: atom.space.clone(),
                ty: atom.ty,
                args: atom.args.iter().map(|a| a.rename(from, to)).collect(),
            }),
            Formula::Not(f) => Formula::not(f.substitute(from, to)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(from, to)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(from, to)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.substitute(from, to), b.substitute(from, to)),
            Formula::Exists(v, body) if v != from => Formula::exists(v, body.substitute(from, to)),
            Formula::Forall(v, body) if v != from => Formula::forall(v, body.substitute(from, to)),
            Formula::Exists(..) | Formula::Forall(..) => self.clone(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(_) => 2,
            Formula::And(_) => 3,
            _ => 4,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    /// Prints in the grammar accepted by [`crate::logic::parse_formula`]
    /// (`TypeIs` atoms excepted, which print as `tp#k(..)`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Eq(a, b) => write!(f, "{a}={b}"),
            Formula::Rel(name, args) if name == "<" && args.len() == 2 => {
                write!(f, "{}<{}", args[0], args[1])
            }
            Formula::Rel(name, args) => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    write_list(f, args)?;
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::TypeIs(atom) => {
                write!(f, "tp#{}(", atom.ty.0)?;
                write_list(f, &atom.args)?;
                write!(f, ")")
            }
            Formula::Not(inner) => {
                write!(f, "!")?;
                let parens = inner.precedence() < 4 || matches!(**inner, Formula::Eq(..) | Formula::Rel(..));
                let parens = parens && !matches!(&**inner, Formula::Rel(n, a) if n != "<" || a.len() != 2);
                write_child(f, inner, parens)
            }
            Formula::And(parts) | Formula::Or(parts) => {
                let (sep, own) = if matches!(self, Formula::And(_)) { (" & ", 3) } else { (" | ", 2) };
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write_child(f, p, p.precedence() <= own)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                write_child(f, a, a.precedence() <= 1)?;
                write!(f, " -> ")?;
                write_child(f, b, false)
            }
            Formula::Exists(v, body) => write!(f, "exists {v} ({body})"),
            Formula::Forall(v, body) => write!(f, "forall {v} ({body})"),
        }
    }
}
