//! Classical type spaces of a finite structure, as automorphism orbits.

use std::sync::Arc;

use super::automorphism::automorphisms;
use super::structure::{tuple_at, tuple_index, FinStructure, MAX_TABLE_CELLS};

/// Index of a type in its [`TypeSpace`]; types are numbered by their
/// lexicographically least realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub usize);

/// `S_n(Th(M)(A))` for a finite `M`: the orbits of `Aut(M/A)` on `M^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSpace {
    structure: Arc<FinStructure>,
    arity: usize,
    params: Vec<usize>,
    reps: Vec<Vec<usize>>,
    of_tuple: Vec<TypeId>,
    group_order: usize,
}

/// Builds the space of `n`-types over the parameters `params`.
///
/// Panics when `|M|^n` exceeds the table limit or a parameter is out of range.
pub fn type_space(m: &FinStructure, n: usize, params: &[usize]) -> TypeSpace {
    type_space_shared(Arc::new(m.clone()), n, params)
}

pub fn type_space_shared(m: Arc<FinStructure>, n: usize, params: &[usize]) -> TypeSpace {
    assert!(params.iter().all(|&a| a < m.size()), "parameter outside the universe");
    let cells = m.size().checked_pow(n as u32).filter(|c| *c <= MAX_TABLE_CELLS);
    let cells = cells.expect("type space too large");
    let group = automorphisms(&m, params);
    let mut of_tuple = vec![TypeId(usize::MAX); cells];
    let mut reps = Vec::new();
    for idx in 0..cells {
        if of_tuple[idx] != TypeId(usize::MAX) {
            continue;
        }
        let id = TypeId(reps.len());
        let rep = tuple_at(m.size(), n, idx);
        for g in &group {
            let img: Vec<usize> = rep.iter().map(|&e| g[e]).collect();
            of_tuple[tuple_index(m.size(), &img)] = id;
        }
        reps.push(rep);
    }
    let mut params = params.to_vec();
    params.sort_unstable();
    params.dedup();
    TypeSpace { structure: m, arity: n, params, reps, of_tuple, group_order: group.len() }
}

/// `tp(ā/A)`.
pub fn type_of_tuple(m: &FinStructure, tuple: &[usize], params: &[usize]) -> TypeId {
    type_space(m, tuple.len(), params).type_of(tuple)
}

impl TypeSpace {
    pub fn structure(&self) -> &FinStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> &Arc<FinStructure> {
        &self.structure
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The parameter set, sorted and without repetitions.
    pub fn params(&self) -> &[usize] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TypeId> {
        (0..self.reps.len()).map(TypeId)
    }

    pub fn representative(&self, q: TypeId) -> &[usize] {
        &self.reps[q.0]
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn type_of(&self, tuple: &[usize]) -> TypeId {
        assert_eq!(tuple.len(), self.arity, "tuple length differs from type arity");
        self.of_tuple[tuple_index(self.structure.size(), tuple)]
    }

    /// Every realization of `q`, in lexicographic order.
    pub fn members(&self, q: TypeId) -> Vec<Vec<usize>> {
        let n = self.structure.size();
        self.of_tuple
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == q)
            .map(|(idx, _)| tuple_at(n, self.arity, idx))
            .collect()
    }

    pub fn orbit_size(&self, q: TypeId) -> usize {
        self.of_tuple.iter().filter(|t| **t == q).count()
    }

    /// Restriction map to the coordinates `coords` (in order), landing in
    /// `target`. Requires `target`'s parameters to be among ours.
    pub fn projection(&self, coords: &[usize], target: &TypeSpace) -> Vec<TypeId> {
        assert_eq!(coords.len(), target.arity);
        assert!(target.params.iter().all(|a| self.params.contains(a)), "projection would add parameters");
        self.reps
            .iter()
            .map(|rep| {
                let sub: Vec<usize> = coords.iter().map(|&c| rep[c]).collect();
                target.type_of(&sub)
            })
            .collect()
    }
}
