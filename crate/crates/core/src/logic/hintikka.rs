//! Bounded-depth equivalence of tuples and the Hintikka formulas defining
//! its classes; used to produce isolating formulas for types.

use std::collections::HashMap;

use super::eval::{eval_formula, Assignment};
use super::formula::{Formula, Term};
use super::structure::{tuple_at, tuple_index, FinStructure};
use super::types::{TypeId, TypeSpace};

#[derive(Debug, Clone)]
struct Node {
    rep: Vec<usize>,
    children: Vec<u32>,
}

/// Partition of `M^k` into classes of tuples satisfying the same formulas of
/// quantifier depth at most `depth` with parameters from `params`.
#[derive(Debug, Clone)]
pub struct DepthClasses {
    structure: FinStructure,
    params: Vec<usize>,
    arity: usize,
    depth: usize,
    class_of: Vec<usize>,
    top: Vec<u32>,
    nodes: Vec<Node>,
}

struct Builder<'a> {
    m: &'a FinStructure,
    fixed: Vec<usize>,
    interned: HashMap<(usize, Vec<u32>), u32>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn atomic_key(&self, tuple: &[usize]) -> Vec<u32> {
        let m = self.m;
        let entries: Vec<usize> = self.fixed.iter().chain(tuple).copied().collect();
        let first: Vec<usize> = entries.iter().map(|e| entries.iter().position(|x| x == e).unwrap()).collect();
        let reps: Vec<usize> = (0..entries.len()).filter(|&i| first[i] == i).collect();
        let mut key: Vec<u32> = vec![tuple.len() as u32];
        key.extend(first.iter().map(|&f| f as u32));
        let sig = m.signature();
        for (r, (_, arity)) in sig.relations().iter().enumerate() {
            for idx in 0..reps.len().pow(*arity as u32) {
                let pick = tuple_at(reps.len(), *arity, idx);
                let args: Vec<usize> = pick.iter().map(|&p| entries[reps[p]]).collect();
                key.push(m.holds(r, &args) as u32);
            }
        }
        for (f, (_, arity)) in sig.functions().iter().enumerate() {
            for idx in 0..reps.len().pow(*arity as u32) {
                let pick = tuple_at(reps.len(), *arity, idx);
                let args: Vec<usize> = pick.iter().map(|&p| entries[reps[p]]).collect();
                let v = m.apply(f, &args);
                key.push(entries.iter().position(|&e| e == v).map_or(u32::MAX, |p| p as u32));
            }
        }
        key
    }

    fn intern(&mut self, depth: usize, key: Vec<u32>, rep: &[usize], children: Vec<u32>) -> u32 {
        let next = self.nodes.len() as u32;
        let id = *self.interned.entry((depth, key)).or_insert(next);
        if id == next {
            self.nodes.push(Node { rep: rep.to_vec(), children });
        }
        id
    }

    fn class(&mut self, depth: usize, tuple: &mut Vec<usize>) -> u32 {
        if depth == 0 {
            let key = self.atomic_key(tuple);
            return self.intern(0, key, tuple, Vec::new());
        }
        let mut kids = Vec::with_capacity(self.m.size());
        for b in 0..self.m.size() {
            tuple.push(b);
            kids.push(self.class(depth - 1, tuple));
            tuple.pop();
        }
        kids.sort_unstable();
        kids.dedup();
        let rep = tuple.clone();
        self.intern(depth, kids.clone(), &rep, kids)
    }
}

/// Computes the depth-`depth` classes of `arity`-tuples over `params`.
pub fn depth_classes(m: &FinStructure, arity: usize, depth: usize, params: &[usize]) -> DepthClasses {
    let mut fixed = params.to_vec();
    fixed.extend_from_slice(m.constant_values());
    let mut b = Builder { m, fixed, interned: HashMap::new(), nodes: Vec::new() };
    let cells = m.size().pow(arity as u32);
    let mut class_of = Vec::with_capacity(cells);
    let mut top: Vec<u32> = Vec::new();
    for idx in 0..cells {
        let mut t = tuple_at(m.size(), arity, idx);
        let node = b.class(depth, &mut t);
        let c = match top.iter().position(|&n| n == node) {
            Some(c) => c,
            None => {
                top.push(node);
                top.len() - 1
            }
        };
        class_of.push(c);
    }
    DepthClasses {
        structure: m.clone(),
        params: params.to_vec(),
        arity,
        depth,
        class_of,
        top,
        nodes: b.nodes,
    }
}

/// Default free-variable names for a tuple of the given length.
pub fn default_vars(arity: usize) -> Vec<String> {
    match arity {
        0..=3 => ["x", "y", "z"][..arity].iter().map(|s| s.to_string()).collect(),
        _ => (1..=arity).map(|i| format!("x{i}")).collect(),
    }
}

impl DepthClasses {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn count(&self) -> usize {
        self.top.len()
    }

    pub fn class_of(&self, tuple: &[usize]) -> usize {
        self.class_of[tuple_index(self.structure.size(), tuple)]
    }

    /// Class index per tuple, in lexicographic tuple order.
    pub fn table(&self) -> &[usize] {
        &self.class_of
    }

    pub fn representative(&self, class: usize) -> &[usize] {
        &self.nodes[self.top[class] as usize].rep
    }

    /// A formula of quantifier depth `self.depth()` in `vars` whose
    /// extension is exactly the class.
    pub fn formula(&self, class: usize, vars: &[String]) -> Formula {
        assert_eq!(vars.len(), self.arity);
        let mut names = vars.to_vec();
        let f = self.node_formula(self.top[class], self.depth, &mut names);
        match f {
            Formula::True if !vars.is_empty() => Formula::eq(Term::Var(vars[0].clone()), Term::Var(vars[0].clone())),
            other => other,
        }
    }

    fn node_formula(&self, node: u32, depth: usize, names: &mut Vec<String>) -> Formula {
        let node = &self.nodes[node as usize];
        if depth == 0 {
            return self.atomic_formula(&node.rep, names);
        }
        let v = format!("v{}", names.len());
        names.push(v.clone());
        let kids: Vec<Formula> = node.children.iter().map(|&c| self.node_formula(c, depth - 1, names)).collect();
        names.pop();
        let mut parts: Vec<Formula> = kids.iter().map(|k| Formula::exists(&v, k.clone())).collect();
        parts.push(Formula::forall(&v, Formula::or(kids)));
        Formula::and(parts)
    }

    /// Literals describing the atomic diagram of `tuple` relative to the
    /// parameters and constants; facts about parameters alone are omitted.
    fn atomic_formula(&self, tuple: &[usize], names: &[String]) -> Formula {
        let m = &self.structure;
        let sig = m.signature();
        let mut entries: Vec<(usize, Term, bool)> = Vec::new();
        for &a in &self.params {
            entries.push((a, Term::Elem(a), false));
        }
        for (i, c) in sig.constants().iter().enumerate() {
            entries.push((m.constant(i), Term::Const(c.clone()), false));
        }
        for (e, v) in tuple.iter().zip(names) {
            entries.push((*e, Term::Var(v.clone()), true));
        }
        let mut lits = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..entries.len() {
            let (e, ref t, is_var) = entries[i];
            match reps.iter().find(|&&j| entries[j].0 == e) {
                Some(&j) => {
                    if is_var {
                        lits.push(Formula::eq(entries[j].1.clone(), t.clone()));
                    }
                }
                None => {
                    if is_var {
                        for &j in &reps {
                            lits.push(Formula::not(Formula::eq(entries[j].1.clone(), t.clone())));
                        }
                    }
                    reps.push(i);
                }
            }
        }
        let involves_var = |pick: &[usize]| pick.iter().any(|&p| entries[reps[p]].2);
        for (r, (name, arity)) in sig.relations().iter().enumerate() {
            for idx in 0..reps.len().pow(*arity as u32) {
                let pick = tuple_at(reps.len(), *arity, idx);
                if !involves_var(&pick) {
                    continue;
                }
                let args: Vec<usize> = pick.iter().map(|&p| entries[reps[p]].0).collect();
                let atom = Formula::rel(name, pick.iter().map(|&p| entries[reps[p]].1.clone()).collect());
                lits.push(if m.holds(r, &args) { atom } else { Formula::not(atom) });
            }
        }
        for (f, (name, arity)) in sig.functions().iter().enumerate() {
            for idx in 0..reps.len().pow(*arity as u32) {
                let pick = tuple_at(reps.len(), *arity, idx);
                let args: Vec<usize> = pick.iter().map(|&p| entries[reps[p]].0).collect();
                let value = m.apply(f, &args);
                let app = Term::App(name.clone(), pick.iter().map(|&p| entries[reps[p]].1.clone()).collect());
                for &j in &reps {
                    if !involves_var(&pick) && !entries[j].2 {
                        continue;
                    }
                    let atom = Formula::eq(app.clone(), entries[j].1.clone());
                    lits.push(if entries[j].0 == value { atom } else { Formula::not(atom) });
                }
            }
        }
        Formula::and(lits)
    }
}

fn extension_indices(m: &FinStructure, phi: &Formula, vars: &[String]) -> Vec<bool> {
    let cells = m.size().pow(vars.len() as u32);
    let mut val = Assignment::new();
    (0..cells)
        .map(|idx| {
            for (v, e) in vars.iter().zip(tuple_at(m.size(), vars.len(), idx)) {
                val.insert(v.clone(), e);
            }
            eval_formula(m, phi, &val).expect("hintikka formulas are closed over their variables")
        })
        .collect()
}

/// Drops top-level conjuncts while the extension stays `target`.
fn minimize(m: &FinStructure, phi: Formula, vars: &[String], target: &[bool]) -> Formula {
    let mut parts = match phi {
        Formula::And(parts) => parts,
        other => return other,
    };
    let mut i = 0;
    while i < parts.len() {
        let mut trial = parts.clone();
        trial.remove(i);
        let candidate = Formula::and(trial.clone());
        let keeps = if candidate == Formula::True {
            target.iter().all(|b| *b)
        } else {
            extension_indices(m, &candidate, vars) == target
        };
        if keeps {
            parts = trial;
        } else {
            i += 1;
        }
    }
    match Formula::and(parts) {
        Formula::True if !vars.is_empty() => Formula::eq(Term::Var(vars[0].clone()), Term::Var(vars[0].clone())),
        other => other,
    }
}

/// A formula with parameters from the space's parameter set whose extension
/// is exactly the orbit of `q`, in the default variables.
pub fn isolating_formula(space: &TypeSpace, q: TypeId) -> Formula {
    isolating_formula_in(space, q, &default_vars(space.arity()))
}

pub fn isolating_formula_in(space: &TypeSpace, q: TypeId, vars: &[String]) -> Formula {
    let m = space.structure();
    let k = space.arity();
    let target: Vec<bool> = (0..m.size().pow(k as u32))
        .map(|idx| space.type_of(&tuple_at(m.size(), k, idx)) == q)
        .collect();
    for depth in 0..=m.size() {
        let classes = depth_classes(m, k, depth, space.params());
        let c = classes.class_of(space.representative(q));
        let ext: Vec<bool> = classes.table().iter().map(|&x| x == c).collect();
        if ext == target {
            let phi = classes.formula(c, vars);
            return minimize(m, phi, vars, &target);
        }
    }
    unreachable!("depth |M| separates all orbits of a finite structure")
}
