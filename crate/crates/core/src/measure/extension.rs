//! Existence of a probability measure with prescribed integrals, decided by
//! exact linear programming, with checkable certificates either way.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::simplex::{feasible_point, minimize, LpOutcome, Relation, Row};
use crate::rational::{common_denominator, fmt_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `⟨φ, μ⟩ ≤ λ₀(φ)`
    AtMost,
    /// `⟨φ, μ⟩ = λ₀(φ)`
    Exactly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub bound: Rational,
    pub values: Vec<Rational>,
}

/// Constraints on a probability measure over the ground set `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinFeasProblem {
    ground: usize,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("constraint {index} lists {got} values, ground set has {expected}")]
    WrongLength { index: usize, expected: usize, got: usize },
    #[error("empty ground set")]
    EmptyGround,
    #[error("constraint {0} is an inequality; expected only equalities")]
    NotAnEquality(usize),
    #[error("constraint {0} is an equality; expected only inequalities")]
    NotAnInequality(usize),
    #[error("the constant function 1 is assigned {0}, expected 1/1")]
    ConstantOneNotOne(String),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Outcome of a feasibility question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Weights of a measure on the ground set satisfying every constraint;
    /// zero weights allowed.
    Feasible(Vec<Rational>),
    /// Integer coefficients `m_i` (nonnegative on inequalities) with
    /// `Σ m_i φ_i ≥ bound` pointwise and `Σ m_i λ₀(φ_i) < bound`.
    Infeasible { coefficients: Vec<BigInt>, bound: BigInt },
}

impl Certificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Certificate::Feasible(_))
    }
}

impl LinFeasProblem {
    pub fn new(ground: usize, constraints: Vec<Constraint>) -> Result<Self, ExtensionError> {
        if ground == 0 {
            return Err(ExtensionError::EmptyGround);
        }
        for (index, c) in constraints.iter().enumerate() {
            if c.values.len() != ground {
                return Err(ExtensionError::WrongLength { index, expected: ground, got: c.values.len() });
            }
        }
        Ok(LinFeasProblem { ground, constraints })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Parses lines `<= p/q : v1,...,vk` or `= p/q : v1,...,vk`; blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ExtensionError> {
        let mut constraints = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ExtensionError::Format { line: i + 1, msg: msg.to_string() };
            let (kind, rest) = if let Some(r) = line.strip_prefix("<=") {
                (ConstraintKind::AtMost, r)
            } else if let Some(r) = line.strip_prefix('=') {
                (ConstraintKind::Exactly, r)
            } else {
                return Err(err("expected `<=` or `=`"));
            };
            let (bound, values) = rest.split_once(':').ok_or_else(|| err("expected `:`"))?;
            let bound = parse_rational(bound).map_err(|e| err(&e.to_string()))?;
            let values = values
                .split(',')
                .map(|v| parse_rational(v).map_err(|e| err(&e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            constraints.push(Constraint { kind, bound, values });
        }
        let ground = constraints.first().map_or(0, |c| c.values.len());
        Self::new(ground, constraints)
    }

    fn rows(&self) -> Vec<Row> {
        let mut rows: Vec<Row> = self
            .constraints
            .iter()
            .map(|c| Row {
                coeffs: c.values.clone(),
                rel: if c.kind == ConstraintKind::AtMost { Relation::Le } else { Relation::Eq },
                rhs: c.bound.clone(),
            })
            .collect();
        rows.push(Row { coeffs: vec![Rational::one(); self.ground], rel: Relation::Eq, rhs: Rational::one() });
        rows
    }
}

impl fmt::Display for LinFeasProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            let op = if c.kind == ConstraintKind::AtMost { "<=" } else { "=" };
            let vals: Vec<String> = c.values.iter().map(fmt_rational).collect();
            writeln!(f, "{op} {} : {}", fmt_rational(&c.bound), vals.join(","))?;
        }
        Ok(())
    }
}

/// Decides whether some probability measure `μ` on the ground set has
/// `⟨φ_i, μ⟩ ≤ λ₀(φ_i)` for all `i`. If not, returns multiplicities `m_i ≥ 0`
/// and an integer `n` with `Σ m_i φ_i ≥ n` and `Σ m_i λ₀(φ_i) < n`.
pub fn extend_measure_ineq(prob: &LinFeasProblem) -> Result<Certificate, ExtensionError> {
    if let Some(i) = prob.constraints.iter().position(|c| c.kind != ConstraintKind::AtMost) {
        return Err(ExtensionError::NotAnInequality(i));
    }
    Ok(solve(prob))
}

fn solve(prob: &LinFeasProblem) -> Certificate {
    if let Some(x) = feasible_point(prob.ground, &prob.rows()) {
        return Certificate::Feasible(x);
    }
    // Farkas alternative: y ≥ 0 on inequalities, y free on equalities, c free,
    // with Σ y_i φ_i(x) ≥ c for all x and Σ y_i λ_i ≤ c - 1.
    // Variables: y⁺ (k), y⁻ (k, pinned to 0 on inequalities), c⁺, c⁻.
    let k = prob.constraints.len();
    let nvars = 2 * k + 2;
    let mut rows = Vec::new();
    for x in 0..prob.ground {
        let mut coeffs = vec![Rational::zero(); nvars];
        for (i, c) in prob.constraints.iter().enumerate() {
            coeffs[i] = c.values[x].clone();
            coeffs[k + i] = -c.values[x].clone();
        }
        coeffs[2 * k] = -Rational::one();
        coeffs[2 * k + 1] = Rational::one();
        rows.push(Row { coeffs, rel: Relation::Ge, rhs: Rational::zero() });
    }
    let mut coeffs = vec![Rational::zero(); nvars];
    for (i, c) in prob.constraints.iter().enumerate() {
        coeffs[i] = c.bound.clone();
        coeffs[k + i] = -c.bound.clone();
    }
    coeffs[2 * k] = -Rational::one();
    coeffs[2 * k + 1] = Rational::one();
    rows.push(Row { coeffs, rel: Relation::Le, rhs: -Rational::one() });
    for (i, c) in prob.constraints.iter().enumerate() {
        if c.kind == ConstraintKind::AtMost {
            let mut coeffs = vec![Rational::zero(); nvars];
            coeffs[k + i] = Rational::one();
            rows.push(Row { coeffs, rel: Relation::Eq, rhs: Rational::zero() });
        }
    }
    let sol = feasible_point(nvars, &rows).expect("Farkas alternative must be solvable when the primal is not");
    let y: Vec<Rational> = (0..k).map(|i| &sol[i] - &sol[k + i]).collect();
    let c = &sol[2 * k] - &sol[2 * k + 1];
    integer_certificate(&y, &c)
}

fn integer_certificate(y: &[Rational], c: &Rational) -> Certificate {
    let scale = Rational::from_integer(common_denominator(y.iter().chain(std::iter::once(c))));
    let mut ints: Vec<BigInt> = y.iter().map(|v| (v * &scale).to_integer()).collect();
    let mut bound = (c * &scale).to_integer();
    let g = ints.iter().fold(bound.abs(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        ints.iter_mut().for_each(|v| *v /= &g);
        bound /= &g;
    }
    Certificate::Infeasible { coefficients: ints, bound }
}

/// Decides whether some probability measure satisfies every equality
/// `⟨φ_i, μ⟩ = λ₀(φ_i)`, by duplicating each constraint as `φ ≤ λ` and
/// `-φ ≤ -λ` and calling [`extend_measure_ineq`].
///
/// The constant function 1 must be assigned 1; it is appended when absent.
/// An infeasibility certificate has `bound = 0`: integers `m_i` with
/// `Σ m_i φ_i ≥ 0` and `Σ m_i λ₀(φ_i) < 0`, indexed like the constraints
/// of the returned problem.
pub fn extend_measure_eq(prob: &LinFeasProblem) -> Result<(LinFeasProblem, Certificate), ExtensionError> {
    if let Some(i) = prob.constraints.iter().position(|c| c.kind != ConstraintKind::Exactly) {
        return Err(ExtensionError::NotAnEquality(i));
    }
    let is_one = |c: &Constraint| c.values.iter().all(|v| v.is_one());
    let mut prob = prob.clone();
    let one = match prob.constraints.iter().position(is_one) {
        Some(i) => {
            if !prob.constraints[i].bound.is_one() {
                return Err(ExtensionError::ConstantOneNotOne(fmt_rational(&prob.constraints[i].bound)));
            }
            i
        }
        None => {
            prob.constraints.push(Constraint {
                kind: ConstraintKind::Exactly,
                bound: Rational::one(),
                values: vec![Rational::one(); prob.ground],
            });
            prob.constraints.len() - 1
        }
    };
    let k = prob.constraints.len();
    let mut doubled = Vec::with_capacity(2 * k);
    for sign in [Rational::one(), -Rational::one()] {
        for c in &prob.constraints {
            doubled.push(Constraint {
                kind: ConstraintKind::AtMost,
                bound: &c.bound * &sign,
                values: c.values.iter().map(|v| v * &sign).collect(),
            });
        }
    }
    let lambda1 = LinFeasProblem::new(prob.ground, doubled)?;
    let cert = match extend_measure_ineq(&lambda1)? {
        Certificate::Feasible(w) => Certificate::Feasible(w),
        Certificate::Infeasible { coefficients, bound } => {
            let mut m: Vec<BigInt> = (0..k).map(|i| &coefficients[i] - &coefficients[k + i]).collect();
            // Σ m φ ≥ n and Σ m λ < n; move n onto the constant function
            m[one] -= &bound;
            let g = m.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
            if !g.is_zero() && !g.is_one() {
                m.iter_mut().for_each(|v| *v /= &g);
            }
            Certificate::Infeasible { coefficients: m, bound: BigInt::zero() }
        }
    };
    Ok((prob, cert))
}

/// Re-checks a certificate against a problem with exact arithmetic.
pub fn verify_certificate(prob: &LinFeasProblem, cert: &Certificate) -> bool {
    match cert {
        Certificate::Feasible(w) => {
            w.len() == prob.ground
                && w.iter().all(|v| !v.is_negative())
                && w.iter().sum::<Rational>().is_one()
                && prob.constraints.iter().all(|c| {
                    let v: Rational = c.values.iter().zip(w).map(|(a, b)| a * b).sum();
                    match c.kind {
                        ConstraintKind::AtMost => v <= c.bound,
                        ConstraintKind::Exactly => v == c.bound,
                    }
                })
        }
        Certificate::Infeasible { coefficients, bound } => {
            if coefficients.len() != prob.constraints.len() {
                return false;
            }
            let signs_ok = prob
                .constraints
                .iter()
                .zip(coefficients)
                .all(|(c, m)| c.kind == ConstraintKind::Exactly || !m.is_negative());
            let n = Rational::from_integer(bound.clone());
            let pointwise = (0..prob.ground).all(|x| {
                let s: Rational = prob
                    .constraints
                    .iter()
                    .zip(coefficients)
                    .map(|(c, m)| &c.values[x] * Rational::from_integer(m.clone()))
                    .sum();
                s >= n
            });
            let total: Rational = prob
                .constraints
                .iter()
                .zip(coefficients)
                .map(|(c, m)| &c.bound * Rational::from_integer(m.clone()))
                .sum();
            signs_ok && pointwise && total < n
        }
    }
}

/// The least `β` such that adding `⟨ψ, μ⟩ ≤ β` keeps an inequality problem
/// consistent, i.e. the minimum of `⟨ψ, μ⟩` over its solutions; `None` when
/// the problem is already inconsistent.
#[doc(hidden)]
pub fn lambda_tilde(prob: &LinFeasProblem, psi: &[Rational]) -> Option<Rational> {
    assert_eq!(psi.len(), prob.ground);
    match minimize(prob.ground, &prob.rows(), psi) {
        LpOutcome::Optimal { value, .. } => Some(value),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("the simplex is bounded"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn inequality_examples() {
        let p = LinFeasProblem::parse("<= 1/2 : 0,1").unwrap();
        let c = extend_measure_ineq(&p).unwrap();
        assert!(c.is_feasible() && verify_certificate(&p, &c));

        let p = LinFeasProblem::parse("<= 1/4 : 1,0\n<= 1/4 : 0,1").unwrap();
        let c = extend_measure_ineq(&p).unwrap();
        assert_eq!(c, Certificate::Infeasible { coefficients: vec![bi(1), bi(1)], bound: bi(1) });
        assert!(verify_certificate(&p, &c));
    }

    #[test]
    fn equality_examples() {
        let p = LinFeasProblem::parse("= 3/5 : 1,0\n= 2/5 : 0,1").unwrap();
        let (p, c) = extend_measure_eq(&p).unwrap();
        assert_eq!(c, Certificate::Feasible(vec![q(3, 5), q(2, 5)]));
        assert!(verify_certificate(&p, &c));

        let p = LinFeasProblem::parse("= 3/5 : 1,0\n= 3/5 : 0,1\n= 1 : 1,1").unwrap();
        let (p, c) = extend_measure_eq(&p).unwrap();
        assert_eq!(c, Certificate::Infeasible { coefficients: vec![bi(-1), bi(-1), bi(1)], bound: bi(0) });
        assert!(verify_certificate(&p, &c));
    }

    #[test]
    fn constant_one_must_be_one() {
        let p = LinFeasProblem::parse("= 1/2 : 1,1").unwrap();
        assert_eq!(extend_measure_eq(&p), Err(ExtensionError::ConstantOneNotOne("1/2".into())));
        let p = LinFeasProblem::parse("<= 1/2 : 1,1").unwrap();
        assert_eq!(extend_measure_eq(&p), Err(ExtensionError::NotAnEquality(0)));
    }

    #[test]
    fn format_round_trip() {
        let text = "<= 1/2 : 0/1,1/1\n= 1/1 : 1/1,1/1\n";
        let p = LinFeasProblem::parse(text).unwrap();
        assert_eq!(p.to_string(), text);
        assert!(matches!(LinFeasProblem::parse("< 1 : 1"), Err(ExtensionError::Format { line: 1, .. })));
    }

    #[test]
    fn lambda_tilde_is_least_consistent_bound() {
        let p = LinFeasProblem::parse("<= 1/4 : 1,0,0").unwrap();
        assert_eq!(lambda_tilde(&p, &[int(0), int(1), int(1)]), Some(q(3, 4)));
        assert_eq!(lambda_tilde(&p, &[int(1), int(0), int(0)]), Some(int(0)));
        let bad = LinFeasProblem::parse("<= -1 : 1,1").unwrap();
        assert_eq!(lambda_tilde(&bad, &[int(1), int(1)]), None);
    }
}
