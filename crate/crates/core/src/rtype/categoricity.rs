//! Finite-scale check that every measure on a type space is the type of
//! some random tuple, over a fixed battery of measures and bases.

use std::fmt;
use std::sync::Arc;

use super::{realize, rtype_in, RMeasure};
use crate::logic::structure::MAX_TABLE_CELLS;
use crate::logic::types::type_space_shared;
use crate::logic::{FinStructure, TypeSpace};
use crate::measure::FinProbSpace;
use crate::randomizer::Randomization;
use crate::rational::{q, Rational};

/// Largest type space the battery enumerates measures on.
pub const BATTERY_MAX_TYPES: usize = 4;
/// Largest denominator in the battery.
pub const BATTERY_MAX_DENOMINATOR: i64 = 4;

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| compositions(total - first, parts - 1).into_iter().map(move |rest| [vec![first], rest].concat()))
        .collect()
}

/// All probability measures on `space` whose weights have denominator at
/// most 4, without repetition; empty when the space has more than 4 types.
pub fn measure_battery(space: &Arc<TypeSpace>) -> Vec<RMeasure> {
    if space.len() > BATTERY_MAX_TYPES {
        return Vec::new();
    }
    let mut out: Vec<RMeasure> = Vec::new();
    for d in 1..=BATTERY_MAX_DENOMINATOR {
        for c in compositions(d as usize, space.len()) {
            let weights: Vec<Rational> = c.iter().map(|&k| q(k as i64, d)).collect();
            let nu = RMeasure::new(space.clone(), weights).expect("compositions sum to 1");
            if !out.contains(&nu) {
                out.push(nu);
            }
        }
    }
    out
}

/// Bases used by the battery: one point, four dyadic points, `(1/2,1/3,1/6)`.
pub fn battery_bases() -> Vec<FinProbSpace> {
    vec![
        FinProbSpace::from_weights(vec![q(1, 1)]).expect("valid"),
        FinProbSpace::dyadic(2),
        FinProbSpace::from_weights(vec![q(1, 2), q(1, 3), q(1, 6)]).expect("valid"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArityLine {
    pub n: usize,
    /// `None` when `|M|^n` is too large to tabulate.
    pub types: Option<usize>,
    pub measures: usize,
    pub realized: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricityReport {
    pub structure: String,
    pub lines: Vec<ArityLine>,
}

impl CategoricityReport {
    pub fn pass(&self) -> bool {
        self.lines.iter().all(|l| l.failures.is_empty())
    }

    pub fn type_count(&self, n: usize) -> Option<usize> {
        self.lines.iter().find(|l| l.n == n).and_then(|l| l.types)
    }
}

impl fmt::Display for CategoricityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            let verdict = if l.failures.is_empty() { "PASS" } else { "FAIL" };
            match l.types {
                Some(t) => writeln!(f, "{verdict} types.S{} {}={t} realized {}/{}", l.n, self.structure, l.realized, l.measures)?,
                None => writeln!(f, "{verdict} types.S{} {} not tabulated", l.n, self.structure)?,
            }
            for msg in &l.failures {
                writeln!(f, "FAIL realize.S{} {msg}", l.n)?;
            }
        }
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} omega-categorical {}: every tabulated type space is finite", self.structure)
    }
}

/// `|S_n(Th(M))|` for `n ≤ n_max`, and the realization round trip for every
/// battery measure over every battery base.
pub fn check_omega_categoricity(m: &FinStructure, n_max: usize) -> CategoricityReport {
    let shared = Arc::new(m.clone());
    let mut lines = Vec::new();
    for n in 1..=n_max {
        let fits = m.size().checked_pow(n as u32).is_some_and(|c| c <= MAX_TABLE_CELLS);
        if !fits {
            lines.push(ArityLine { n, types: None, measures: 0, realized: 0, failures: Vec::new() });
            continue;
        }
        let space = Arc::new(type_space_shared(shared.clone(), n, &[]));
        let battery = measure_battery(&space);
        let mut line = ArityLine { n, types: Some(space.len()), measures: 0, realized: 0, failures: Vec::new() };
        for base in battery_bases() {
            let rand = Randomization::constant(m, base);
            for nu in &battery {
                line.measures += 1;
                let back = realize(&rand, nu).and_then(|r| rtype_in(&r.rand, &r.elements, space.clone()));
                match back {
                    Ok(mu) if mu == *nu => line.realized += 1,
                    Ok(mu) => line.failures.push(format!("{nu} came back as {mu}")),
                    Err(e) => line.failures.push(format!("{nu}: {e}")),
                }
            }
        }
        lines.push(line);
    }
    CategoricityReport { structure: m.name().to_string(), lines }
}
