//! Local stability machinery for a formula `φ(x, y, w̄)` in a finite
//! structure.
//!
//! A finite structure is its own monster model and every element is
//! algebraic over any parameter set, so the global `φ`-types are exactly
//! the traces `{b : φ(a, b)}` of elements `a`, the space of `φ`-types is
//! finite and discrete, Cantor-Bendixson rank is 0 on every consistent
//! partial type and multiplicity is a count. The rank stratification used
//! for infinite theories degenerates here and is not implemented.

pub mod independence;
pub mod rho;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::logic::structure::{tuple_at, tuple_index};
use crate::logic::{eval_formula, Assignment, EvalError, FinStructure, Formula, Term};
use crate::measure::{ExtensionError, MeasureError};
use crate::randomizer::RandError;
use crate::rtype::RtypeError;

pub use independence::{check_independence, variable_groups, IndependenceVerdict, Witness, MAX_FRAGMENT};
pub use rho::{nonforking_extension, rho, rho_both, rho_both_row, rho_hat, rho_of_type, FiberTypeSpace, NonforkingExtension};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error("variable groups: {0}")]
    Variables(String),
    #[error("{expected} parameter values needed, {got} given")]
    ParamCount { expected: usize, got: usize },
    #[error("expected a tuple of length {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("the type lives on a different structure or type space")]
    SpaceMismatch,
    #[error("the two computations of rho disagree: {fraction} against {ratio}")]
    Disagreement { fraction: String, ratio: String },
    #[error("joint tuples of length {0} are too many to tabulate")]
    TooLarge(usize),
    #[error("the type is not consistent with the formula context")]
    Inconsistent,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Rtype(#[from] RtypeError),
    #[error(transparent)]
    Rand(#[from] RandError),
}

/// `φ(x̄, ȳ, w̄)` in `M` with the parameter variables `w̄` assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiContext {
    structure: Arc<FinStructure>,
    phi: Formula,
    x: Vec<String>,
    y: Vec<String>,
    w: Vec<String>,
    params: Vec<usize>,
    traces: Vec<Vec<bool>>,
}

impl PhiContext {
    pub fn new(m: Arc<FinStructure>, phi: Formula, x: &[&str], y: &[&str], w: &[&str], params: &[usize]) -> Result<Self, StabilityError> {
        let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let (x, y, w) = (owned(x), owned(y), owned(w));
        let all: Vec<&String> = x.iter().chain(&y).chain(&w).collect();
        for (i, v) in all.iter().enumerate() {
            if all[..i].contains(v) {
                return Err(StabilityError::Variables(format!("`{v}` occurs in two groups")));
            }
        }
        if let Some(v) = phi.free_vars().into_iter().find(|v| !all.contains(&v)) {
            return Err(StabilityError::Variables(format!("free variable `{v}` is in no group")));
        }
        if x.is_empty() {
            return Err(StabilityError::Variables("the object variables are empty".into()));
        }
        if params.len() != w.len() {
            return Err(StabilityError::ParamCount { expected: w.len(), got: params.len() });
        }
        if let Some(&p) = params.iter().find(|&&p| p >= m.size()) {
            return Err(RandError::ValueOutOfRange { point: 0, value: p, size: m.size() }.into());
        }
        let mut ctx = PhiContext { structure: m, phi, x, y, w, params: params.to_vec(), traces: Vec::new() };
        ctx.traces = ctx.compute_traces()?;
        Ok(ctx)
    }

    /// The same formula with other parameter values.
    pub fn with_params(&self, params: &[usize]) -> Result<Self, StabilityError> {
        let x: Vec<&str> = self.x.iter().map(String::as_str).collect();
        let y: Vec<&str> = self.y.iter().map(String::as_str).collect();
        let w: Vec<&str> = self.w.iter().map(String::as_str).collect();
        PhiContext::new(self.structure.clone(), self.phi.clone(), &x, &y, &w, params)
    }

    pub fn structure(&self) -> &FinStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> &Arc<FinStructure> {
        &self.structure
    }

    pub fn phi(&self) -> &Formula {
        &self.phi
    }

    pub fn x_vars(&self) -> &[String] {
        &self.x
    }

    pub fn y_vars(&self) -> &[String] {
        &self.y
    }

    pub fn w_vars(&self) -> &[String] {
        &self.w
    }

    pub fn params(&self) -> &[usize] {
        &self.params
    }

    fn x_count(&self) -> usize {
        self.structure.size().pow(self.x.len() as u32)
    }

    fn y_count(&self) -> usize {
        self.structure.size().pow(self.y.len() as u32)
    }

    pub fn x_tuple(&self, index: usize) -> Vec<usize> {
        tuple_at(self.structure.size(), self.x.len(), index)
    }

    pub fn y_tuple(&self, index: usize) -> Vec<usize> {
        tuple_at(self.structure.size(), self.y.len(), index)
    }

    pub fn y_index(&self, b: &[usize]) -> usize {
        tuple_index(self.structure.size(), b)
    }

    pub fn holds(&self, a: &[usize], b: &[usize]) -> Result<bool, StabilityError> {
        let mut val = Assignment::new();
        for (v, e) in self.x.iter().zip(a).chain(self.y.iter().zip(b)).chain(self.w.iter().zip(&self.params)) {
            val.insert(v.clone(), *e);
        }
        Ok(eval_formula(&self.structure, &self.phi, &val)?)
    }

    fn compute_traces(&self) -> Result<Vec<Vec<bool>>, StabilityError> {
        (0..self.x_count())
            .map(|i| {
                let a = self.x_tuple(i);
                (0..self.y_count()).map(|j| self.holds(&a, &self.y_tuple(j))).collect()
            })
            .collect()
    }

    /// `{b : φ(a, b)}` as an indicator over `y`-tuples.
    pub fn trace(&self, a: &[usize]) -> &[bool] {
        &self.traces[tuple_index(self.structure.size(), a)]
    }

    /// `φ(x̄, b̄, w̄)` with `b̄` and the parameters substituted.
    pub fn instance(&self, b: &[usize]) -> Formula {
        let mut out = self.phi.clone();
        for (v, e) in self.y.iter().zip(b).chain(self.w.iter().zip(&self.params)) {
            out = out.substitute(v, &Term::Elem(*e));
        }
        out
    }
}

/// A global `φ`-type, given by its trace and the elements realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiType {
    pub trace: Vec<bool>,
    pub realizations: Vec<Vec<usize>>,
}

impl PhiType {
    pub fn contains(&self, b_index: usize) -> bool {
        self.trace[b_index]
    }
}

/// The distinct traces over `x`-tuples, ordered by first realization.
pub fn phi_type_space(ctx: &PhiContext) -> Vec<PhiType> {
    let mut out: Vec<PhiType> = Vec::new();
    for i in 0..ctx.x_count() {
        let a = ctx.x_tuple(i);
        let t = &ctx.traces[i];
        match out.iter_mut().find(|p| p.trace == *t) {
            Some(p) => p.realizations.push(a),
            None => out.push(PhiType { trace: t.clone(), realizations: vec![a] }),
        }
    }
    out
}

/// The longest `n ≤ bound` with `a_0..a_{n-1}`, `b_0..b_{n-1}` such that
/// `φ(a_i, b_j)` holds iff `i < j`.
pub fn ladder_length(ctx: &PhiContext, bound: usize) -> usize {
    ladder(ctx, bound).len()
}

/// A longest ladder, as pairs `(a_i, b_i)`.
pub fn ladder(ctx: &PhiContext, bound: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn extend(ctx: &PhiContext, bound: usize, cur: &mut Vec<(usize, usize)>, best: &mut Vec<(usize, usize)>) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if cur.len() >= bound {
            return;
        }
        for a in 0..ctx.x_count() {
            if cur.iter().any(|&(_, bi)| ctx.traces[a][bi]) {
                continue;
            }
            for b in 0..ctx.y_count() {
                if ctx.traces[a][b] || !cur.iter().all(|&(ai, _)| ctx.traces[ai][b]) {
                    continue;
                }
                cur.push((a, b));
                extend(ctx, bound, cur, best);
                cur.pop();
                if best.len() >= bound {
                    return;
                }
            }
        }
    }
    let mut best = Vec::new();
    extend(ctx, bound, &mut Vec::new(), &mut best);
    best.into_iter().map(|(a, b)| (ctx.x_tuple(a), ctx.y_tuple(b))).collect()
}

/// Cantor-Bendixson rank and multiplicity of `[π]` in `S_φ(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbRank {
    /// `π` is inconsistent; rank `-∞`.
    Inconsistent,
    Rank { rank: usize, multiplicity: usize },
}

impl CbRank {
    pub fn multiplicity(&self) -> usize {
        match self {
            CbRank::Inconsistent => 0,
            CbRank::Rank { multiplicity, .. } => *multiplicity,
        }
    }
}

impl fmt::Display for CbRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CbRank::Inconsistent => write!(f, "(-inf, 0)"),
            CbRank::Rank { rank, multiplicity } => write!(f, "({rank}, {multiplicity})"),
        }
    }
}

/// `π` has free variables among the object variables; parameters appear as
/// element constants. `[π]` is the set of traces of the realizations of `π`.
pub fn cb_rank_mult(ctx: &PhiContext, pi: &Formula) -> Result<CbRank, StabilityError> {
    let mut seen: Vec<&[bool]> = Vec::new();
    for i in 0..ctx.x_count() {
        let a = ctx.x_tuple(i);
        let val: Assignment = ctx.x.iter().cloned().zip(a.iter().copied()).collect();
        if eval_formula(ctx.structure(), pi, &val)? && !seen.contains(&ctx.traces[i].as_slice()) {
            seen.push(&ctx.traces[i]);
        }
    }
    Ok(if seen.is_empty() { CbRank::Inconsistent } else { CbRank::Rank { rank: 0, multiplicity: seen.len() } })
}
