//! Two-phase simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// `coeffs · x (rel) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rational>, value: Rational },
}

struct Tableau {
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over the allowed columns. Returns false when unbounded.
    fn run(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        let rhs = self.cols;
        loop {
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.t[i][j].is_zero() {
                        d -= &cost[b] * &self.t[i][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.t[i][rhs] / &self.t[i][c];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Minimizes `objective · x` subject to `rows` and `x ≥ 0`.
pub fn minimize(nvars: usize, rows: &[Row], objective: &[Rational]) -> LpOutcome {
    assert_eq!(objective.len(), nvars);
    let slacks: Vec<Option<usize>> = {
        let mut next = nvars;
        rows.iter()
            .map(|r| match r.rel {
                Relation::Eq => None,
                _ => {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let nslack = slacks.iter().flatten().count();
    let art0 = nvars + nslack;
    let cols = art0 + rows.len();
    let mut t = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.coeffs.len(), nvars);
        let mut v = vec![Rational::zero(); cols + 1];
        v[..nvars].clone_from_slice(&row.coeffs);
        if let Some(s) = slacks[i] {
            v[s] = if row.rel == Relation::Le { Rational::from_integer(1.into()) } else { Rational::from_integer((-1).into()) };
        }
        v[cols] = row.rhs.clone();
        if row.rhs.is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
        v[art0 + i] = Rational::from_integer(1.into());
        t.push(v);
    }
    let mut tab = Tableau { t, basis: (art0..cols).collect(), cols };

    let mut phase1 = vec![Rational::zero(); cols];
    for c in phase1.iter_mut().skip(art0) {
        *c = Rational::from_integer(1.into());
    }
    let everything = vec![true; cols];
    tab.run(&phase1, &everything);
    let infeasibility: Rational = tab.basis.iter().enumerate().filter(|(_, &b)| b >= art0).map(|(i, _)| tab.t[i][cols].clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    for i in 0..tab.t.len() {
        if tab.basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }

    let mut cost = vec![Rational::zero(); cols];
    cost[..nvars].clone_from_slice(objective);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art0).collect();
    if !tab.run(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); nvars];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nvars {
            x[b] = tab.t[i][cols].clone();
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

/// Some `x ≥ 0` satisfying `rows`, if one exists.
pub fn feasible_point(nvars: usize, rows: &[Row]) -> Option<Vec<Rational>> {
    match minimize(nvars, rows, &vec![Rational::zero(); nvars]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}
