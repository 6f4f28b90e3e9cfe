//! Approximating a random element by one measurable for a coarser algebra
//! of events.

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use super::{d_b, d_k, mu, Event, RandError, RandomElement, Randomization};
use crate::rational::{fmt_rational, int, q, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimpleError {
    #[error("the atoms do not partition the {0} base points")]
    NotPartition(usize),
    #[error("epsilon {0} is not positive")]
    NonPositiveEps(String),
    #[error("the construction reached d_K = {d_k}, not below epsilon = {eps} ({precondition})")]
    BoundMissed { d_k: String, eps: String, precondition: Precondition },
    #[error(transparent)]
    Rand(#[from] RandError),
}

/// A finite algebra of events, given by its atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventAlgebra {
    atoms: Vec<Event>,
}

impl EventAlgebra {
    /// Atoms must be nonempty, pairwise disjoint and cover the base.
    pub fn from_atoms(atoms: Vec<Event>) -> Result<Self, SimpleError> {
        let n = atoms.first().map_or(0, |a| a.len());
        let mut seen = vec![0usize; n];
        for a in &atoms {
            if a.len() != n || a.indices().is_empty() {
                return Err(SimpleError::NotPartition(n));
            }
            for i in a.indices() {
                seen[i] += 1;
            }
        }
        if n == 0 || seen.iter().any(|&c| c != 1) {
            return Err(SimpleError::NotPartition(n));
        }
        Ok(EventAlgebra { atoms })
    }

    /// The algebra generated by some events.
    pub fn generated_by(len: usize, generators: &[Event]) -> Self {
        let mut atoms = vec![Event::top(len)];
        for g in generators {
            atoms = atoms
                .into_iter()
                .flat_map(|a| [a.meet(g), a.minus(g)])
                .filter(|a| !a.indices().is_empty())
                .collect();
        }
        EventAlgebra { atoms }
    }

    pub fn discrete(len: usize) -> Self {
        EventAlgebra { atoms: (0..len).map(|i| Event::from_indices(len, &[i])).collect() }
    }

    pub fn trivial(len: usize) -> Self {
        EventAlgebra { atoms: vec![Event::top(len)] }
    }

    /// On a base of `2^depth` points, the blocks of `2^(depth - level)`
    /// consecutive points.
    pub fn dyadic_level(depth: u32, level: u32) -> Self {
        let len = 1usize << depth;
        let block = 1usize << depth.saturating_sub(level);
        let atoms = (0..len / block)
            .map(|b| Event::from_indices(len, &(b * block..(b + 1) * block).collect::<Vec<_>>()))
            .collect();
        EventAlgebra { atoms }
    }

    pub fn atoms(&self) -> &[Event] {
        &self.atoms
    }

    pub fn base_len(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.atoms.iter().all(|a| a.is_subset(e) || a.meet(e).indices().is_empty())
    }

    /// `f` is constant on every atom.
    pub fn measurable(&self, f: &RandomElement) -> bool {
        self.atoms.iter().all(|a| {
            let idx = a.indices();
            idx.iter().all(|&w| f.at(w) == f.at(idx[0]))
        })
    }

    /// The member closest to `b` in `d_B`: an atom is included when at least
    /// half of its mass lies in `b`.
    pub fn best_approximant(&self, rand: &Randomization, b: &Event) -> Event {
        let mut out = Event::bot(b.len());
        for a in &self.atoms {
            if mu(rand, &a.meet(b)) >= mu(rand, &a.minus(b)) {
                out = out.join(a);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precondition {
    Met,
    /// The level set `⟦f = value⟧` is the worst approximated one.
    Unmet { value: usize, distance: String, budget: String },
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precondition::Met => write!(f, "density precondition met"),
            Precondition::Unmet { value, distance, budget } => {
                write!(f, "density precondition unmet: level f={value} at d_B={distance}, budget {budget}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleApprox {
    pub g: RandomElement,
    pub d_k: Rational,
    /// Number of level sets kept.
    pub n: usize,
    /// `a_0, ..., a_{n-1}`.
    pub values: Vec<usize>,
    /// `A_m`, the approximants of the level sets.
    pub approximants: Vec<Event>,
    /// `C_m = A_m ∖ ⋃_{k<m} A_k`.
    pub pieces: Vec<Event>,
    /// `ε/2`, `ε/(4n²)` and `ε/(2n)`.
    pub tail_budget: Rational,
    pub level_budget: Rational,
    pub piece_budget: Rational,
    pub precondition: Precondition,
}

impl fmt::Display for SimpleApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "g = {}", self.g)?;
        writeln!(f, "d_K(f,g) = {}", fmt_rational(&self.d_k))?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(
            f,
            "budgets: tail {} level {} piece {}",
            fmt_rational(&self.tail_budget),
            fmt_rational(&self.level_budget),
            fmt_rational(&self.piece_budget)
        )?;
        write!(f, "{}", self.precondition)
    }
}

/// A `g` measurable for `alg` with `d_K(f, g) < eps`.
///
/// The range of `f` is listed in increasing order `a_0 < a_1 < ...`;
/// `n` is least with `μ⟦f ∈ {a_0..a_{n-1}}⟧ > 1 − ε/2`, each level set
/// `B_m` is replaced by its best approximant `A_m`, the `A_m` are made
/// disjoint, and `g` is `a_m` on `C_m` and `a_0` elsewhere. When `f` is
/// already measurable, `g = f`.
pub fn approximate_by_simple(rand: &Randomization, f: &RandomElement, alg: &EventAlgebra, eps: &Rational) -> Result<SimpleApprox, SimpleError> {
    rand.check_element(f)?;
    if alg.base_len() != rand.len() {
        return Err(RandError::BaseMismatch { expected: rand.len(), got: alg.base_len() }.into());
    }
    if !eps.is_positive() {
        return Err(SimpleError::NonPositiveEps(fmt_rational(eps)));
    }
    let len = rand.len();
    let mut values: Vec<usize> = f.values().to_vec();
    values.sort_unstable();
    values.dedup();
    let level = |a: usize| Event(f.values().iter().map(|&v| v == a).collect());

    let tail_budget = eps * q(1, 2);
    let threshold = Rational::one() - &tail_budget;
    let mut n = 0;
    let mut covered = Event::bot(len);
    while n < values.len() && (n == 0 || mu(rand, &covered) <= threshold) {
        covered = covered.join(&level(values[n]));
        n += 1;
    }
    let nn = int(n as i64);
    let level_budget = eps / (int(4) * &nn * &nn);
    let piece_budget = eps / (int(2) * &nn);

    let mut approximants = Vec::with_capacity(n);
    let mut worst: Option<(usize, Rational)> = None;
    for &a in &values[..n] {
        let b = level(a);
        let am = alg.best_approximant(rand, &b);
        let dist = d_b(rand, &am, &b);
        if dist >= level_budget && worst.as_ref().is_none_or(|(_, d)| dist > *d) {
            worst = Some((a, dist.clone()));
        }
        approximants.push(am);
    }
    let precondition = match worst {
        None => Precondition::Met,
        Some((value, d)) => Precondition::Unmet { value, distance: fmt_rational(&d), budget: fmt_rational(&level_budget) },
    };

    let mut pieces = Vec::with_capacity(n);
    let mut used = Event::bot(len);
    for am in &approximants {
        pieces.push(am.minus(&used));
        used = used.join(am);
    }
    let g = if alg.measurable(f) {
        f.clone()
    } else {
        let mut g = vec![values[0]; len];
        for (piece, &a) in pieces.iter().zip(&values) {
            for w in piece.indices() {
                g[w] = a;
            }
        }
        RandomElement(g)
    };
    let dk = d_k(rand, f, &g)?;
    if dk >= *eps {
        return Err(SimpleError::BoundMissed { d_k: fmt_rational(&dk), eps: fmt_rational(eps), precondition });
    }
    debug_assert!(alg.measurable(&g));
    Ok(SimpleApprox { g, d_k: dk, n, values: values[..n].to_vec(), approximants, pieces, tail_budget, level_budget, piece_budget, precondition })
}
