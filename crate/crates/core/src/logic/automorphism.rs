//! Automorphism groups by colour refinement and backtracking.

use std::collections::HashSet;

use super::structure::{tuple_at, FinStructure};

/// Graph facts: holding relation tuples and function graphs `args ++ [value]`,
/// tagged with a symbol index.
fn facts(m: &FinStructure) -> Vec<(usize, Vec<usize>)> {
    let sig = m.signature();
    let mut out = Vec::new();
    for (r, (_, arity)) in sig.relations().iter().enumerate() {
        for (idx, holds) in m.relation_table(r).iter().enumerate() {
            if *holds {
                out.push((r, tuple_at(m.size(), *arity, idx)));
            }
        }
    }
    let base = sig.relations().len();
    for (f, (_, arity)) in sig.functions().iter().enumerate() {
        for (idx, v) in m.function_table(f).iter().enumerate() {
            let mut t = tuple_at(m.size(), *arity, idx);
            t.push(*v);
            out.push((base + f, t));
        }
    }
    out
}

/// Stable colouring: the coarsest equitable refinement of the initial colours
/// given by constants and the fixed set.
pub(crate) fn refine_colors(m: &FinStructure, fix: &[usize]) -> Vec<usize> {
    let n = m.size();
    let facts = facts(m);
    let mut initial: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &c) in m.constant_values().iter().enumerate() {
        initial[c].push(i);
    }
    for (k, &a) in fix.iter().enumerate() {
        initial[a].push(usize::MAX - k);
    }
    let mut colors = rank(&initial);
    loop {
        let mut sigs: Vec<(usize, Vec<(usize, usize, Vec<usize>)>)> =
            colors.iter().map(|&c| (c, Vec::new())).collect();
        for (sym, t) in &facts {
            let tc: Vec<usize> = t.iter().map(|&e| colors[e]).collect();
            for (pos, &e) in t.iter().enumerate() {
                sigs[e].1.push((*sym, pos, tc.clone()));
            }
        }
        for s in &mut sigs {
            s.1.sort();
        }
        let next = rank(&sigs);
        let before = count_distinct(&colors);
        colors = next;
        if count_distinct(&colors) == before {
            return colors;
        }
    }
}

fn count_distinct(v: &[usize]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut sorted = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

/// All automorphisms of `m` fixing every element of `fix`, as image vectors,
/// in lexicographic order (the identity first).
pub fn automorphisms(m: &FinStructure, fix: &[usize]) -> Vec<Vec<usize>> {
    let n = m.size();
    let colors = refine_colors(m, fix);
    let all = facts(m);
    let fact_set: HashSet<(usize, Vec<usize>)> = all.iter().cloned().collect();
    // facts indexed by their largest element, checked once that element is mapped
    let mut by_max: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, t)) in all.iter().enumerate() {
        if let Some(&mx) = t.iter().max() {
            by_max[mx].push(i);
        }
    }
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(0, &colors, &all, &fact_set, &by_max, &mut image, &mut used, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: usize,
    colors: &[usize],
    all: &[(usize, Vec<usize>)],
    fact_set: &HashSet<(usize, Vec<usize>)>,
    by_max: &[Vec<usize>],
    image: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let n = colors.len();
    if a == n {
        out.push(image.clone());
        return;
    }
    for b in 0..n {
        if used[b] || colors[a] != colors[b] {
            continue;
        }
        image[a] = b;
        let ok = by_max[a].iter().all(|&i| {
            let (sym, t) = &all[i];
            let mapped: Vec<usize> = t.iter().map(|&e| image[e]).collect();
            fact_set.contains(&(*sym, mapped))
        });
        if ok {
            used[b] = true;
            search(a + 1, colors, all, fact_set, by_max, image, used, out);
            used[b] = false;
        }
    }
    image[a] = usize::MAX;
}

pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::standard;

    #[test]
    fn small_groups() {
        assert_eq!(automorphisms(&standard::m2(), &[]), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(automorphisms(&standard::l3(), &[]), vec![vec![0, 1, 2]]);
        assert_eq!(
            automorphisms(&standard::c3(), &[]),
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]
        );
        assert_eq!(automorphisms(&standard::c3(), &[1]), vec![vec![0, 1, 2]]);
        assert_eq!(automorphisms(&standard::pure_set(4), &[0]).len(), 6);
    }
}
