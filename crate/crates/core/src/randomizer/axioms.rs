//! The randomization axioms, checked on a finite randomization.
//!
//! Because the carrier is the full product `∏_w M(w)`, a universally
//! quantified first-order condition on random elements holds iff it holds
//! for every tuple of elements at every point. The Validity and Transfer
//! checks use that reduction and additionally sample random tuples.
//! Atomless cannot hold on a finite space; it is reported as a defect.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{corpus, d_b, d_k, event_of, event_witness, fullness_witness, mu, Event, RandomAssignment, RandomElement, Randomization};
use crate::logic::{eval_formula, Assignment, FinStructure, Formula, Term};
use crate::rational::{fmt_rational, q, Rational};

#[derive(Debug, Clone)]
pub struct AxiomConfig {
    /// Sampled random tuples (and event pairs when not exhaustive).
    pub samples: usize,
    pub seed: u64,
    /// Events are enumerated exhaustively when `|Ω|` is at most this.
    pub exhaustive_limit: usize,
    /// Extra formulas for the Validity check, on top of the shipped corpus.
    pub extra_validity: Vec<Formula>,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig { samples: 32, seed: 0, exhaustive_limit: 8, extra_validity: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomFinding {
    pub axiom: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub findings: Vec<AxiomFinding>,
    pub atomless_defect: Rational,
    pub atomless_threshold: Rational,
}

impl AxiomReport {
    /// All axioms other than Atomless hold.
    pub fn exact_pass(&self) -> bool {
        self.findings.iter().all(|f| f.pass)
    }

    pub fn atomless_pass(&self) -> bool {
        self.atomless_defect <= self.atomless_threshold
    }

    pub fn all_pass(&self) -> bool {
        self.exact_pass() && self.atomless_pass()
    }

    pub fn finding(&self, axiom: &str) -> Option<&AxiomFinding> {
        self.findings.iter().find(|f| f.axiom == axiom)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.findings {
            write!(f, "{} {} checked={}", verdict(x.pass), x.axiom, x.checked)?;
            if x.detail.is_empty() {
                writeln!(f)?;
            } else {
                writeln!(f, " {}", x.detail)?;
            }
        }
        write!(
            f,
            "{} Atomless defect={} threshold={}",
            verdict(self.atomless_pass()),
            fmt_rational(&self.atomless_defect),
            fmt_rational(&self.atomless_threshold)
        )
    }
}

/// `max_U min_V |μ(U ⊓ V) − μ(U)/2|` over all events.
///
/// Only the multiset of weights inside `U` matters, so events are grouped
/// by how many points of each distinct weight they contain.
pub fn atomless_defect(rand: &Randomization) -> Rational {
    let mut groups: BTreeMap<Rational, usize> = BTreeMap::new();
    for w in rand.base().weights() {
        *groups.entry(w.clone()).or_default() += 1;
    }
    let weights: Vec<Rational> = groups.keys().cloned().collect();
    let caps: Vec<usize> = groups.values().copied().collect();
    let half = q(1, 2);
    let mut worst = Rational::zero();
    for u in counts_below(&caps) {
        let mu_u: Rational = weights.iter().zip(&u).map(|(w, &c)| w * Rational::from_integer(c.into())).sum();
        let target = &mu_u * &half;
        let mut best: Option<Rational> = None;
        for v in counts_below(&u) {
            let mu_v: Rational = weights.iter().zip(&v).map(|(w, &c)| w * Rational::from_integer(c.into())).sum();
            let gap = (mu_v - &target).abs();
            if best.as_ref().is_none_or(|b| gap < *b) {
                best = Some(gap);
            }
        }
        worst = worst.max(best.expect("the empty sub-event always exists"));
    }
    worst
}

fn counts_below(caps: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in caps {
        out = out.into_iter().flat_map(|prefix| (0..=c).map(move |k| [prefix.clone(), vec![k]].concat())).collect();
    }
    out
}

struct Checker<'a> {
    rand: &'a Randomization,
    cfg: &'a AxiomConfig,
    rng: ChaCha8Rng,
    findings: Vec<AxiomFinding>,
}

impl Checker<'_> {
    fn random_element(&mut self) -> RandomElement {
        let rand = self.rand;
        RandomElement((0..rand.len()).map(|w| self.rng.gen_range(0..rand.structure_at(w).size())).collect())
    }

    fn random_event(&mut self) -> Event {
        let n = self.rand.len();
        Event((0..n).map(|_| self.rng.gen_bool(0.5)).collect())
    }

    fn random_assignment(&mut self, vars: &[String]) -> RandomAssignment {
        vars.iter().map(|v| (v.clone(), self.random_element())).collect()
    }

    fn events(&mut self) -> Vec<Event> {
        let n = self.rand.len();
        if n <= self.cfg.exhaustive_limit {
            (0..1u64 << n).map(|b| Event::from_bits(n, b)).collect()
        } else {
            let mut v = vec![Event::top(n), Event::bot(n)];
            for _ in 0..self.cfg.samples {
                let e = self.random_event();
                v.push(e);
            }
            v
        }
    }

    fn distinct_structures(&self) -> Vec<Arc<FinStructure>> {
        let mut out: Vec<Arc<FinStructure>> = Vec::new();
        for m in self.rand.family() {
            if !out.iter().any(|s| Arc::ptr_eq(s, m) || **s == **m) {
                out.push(m.clone());
            }
        }
        out
    }

    fn record(&mut self, axiom: &'static str, checked: usize, failure: Option<String>) {
        let pass = failure.is_none();
        let detail = failure.unwrap_or_default();
        self.findings.push(AxiomFinding { axiom, pass, checked, detail });
    }

    fn validity(&mut self, formulas: &[Formula]) {
        let mut checked = 0;
        let mut failure = None;
        'outer: for phi in formulas {
            let vars: Vec<String> = phi.free_vars().into_iter().collect();
            for m in self.distinct_structures() {
                for tuple in all_tuples(m.size(), vars.len()) {
                    checked += 1;
                    let val: Assignment = vars.iter().cloned().zip(tuple.iter().copied()).collect();
                    if !eval_formula(&m, phi, &val).unwrap_or(false) {
                        failure = Some(format!("{phi} fails at {tuple:?} in {}", m.name()));
                        break 'outer;
                    }
                }
            }
            for _ in 0..self.cfg.samples {
                checked += 1;
                let args = self.random_assignment(&vars);
                match event_of(self.rand, phi, &args) {
                    Ok(e) if e == Event::top(self.rand.len()) => {}
                    _ => {
                        failure = Some(format!("[[ {phi} ]] is not top"));
                        break 'outer;
                    }
                }
            }
        }
        let note = "corpus=shipped (under-approximates validity)";
        let detail = failure.clone().unwrap_or_else(|| note.to_string());
        self.findings.push(AxiomFinding { axiom: "Validity", pass: failure.is_none(), checked, detail });
    }

    fn boolean(&mut self, formulas: &[Formula]) {
        let vars: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let mut checked = 0;
        let mut failure = None;
        for _ in 0..self.cfg.samples.max(1) {
            let args = self.random_assignment(&vars);
            let evs: Vec<Event> = formulas.iter().map(|phi| event_of(self.rand, phi, &args).expect("corpus evaluates")).collect();
            for (i, phi) in formulas.iter().enumerate() {
                let psi_i = (i * 7 + 3) % formulas.len();
                let psi = &formulas[psi_i];
                let checks = [
                    (Formula::not(phi.clone()), evs[i].complement(), "not"),
                    (Formula::or(vec![phi.clone(), psi.clone()]), evs[i].join(&evs[psi_i]), "or"),
                    (Formula::and(vec![phi.clone(), psi.clone()]), evs[i].meet(&evs[psi_i]), "and"),
                ];
                for (compound, expected, op) in checks {
                    checked += 1;
                    if event_of(self.rand, &compound, &args).expect("corpus evaluates") != expected && failure.is_none() {
                        failure = Some(format!("{op} fails for {phi}"));
                    }
                }
            }
        }
        self.record("Boolean", checked, failure);
    }

    fn distance(&mut self) {
        let eq = Formula::eq(Term::var("x"), Term::var("y"));
        let mut checked = 0;
        let mut failure = None;
        for _ in 0..self.cfg.samples.max(1) {
            let f = self.random_element();
            let g = self.random_element();
            let (u, v) = (self.random_event(), self.random_event());
            let args: RandomAssignment = [("x".to_string(), f.clone()), ("y".to_string(), g.clone())].into();
            let same = mu(self.rand, &event_of(self.rand, &eq, &args).expect("equality evaluates"));
            checked += 2;
            if d_k(self.rand, &f, &g).expect("sampled elements are valid") != Rational::one() - same {
                failure = Some(format!("d_K({f}, {g}) differs from 1 - mu[[x=y]]"));
            }
            let sym: Rational = (0..self.rand.len()).filter(|&w| u.contains(w) != v.contains(w)).map(|w| self.rand.base().weight(w).clone()).sum();
            if d_b(self.rand, &u, &v) != sym {
                failure = Some(format!("d_B({u}, {v}) differs from the weight of the symmetric difference"));
            }
        }
        self.record("Distance", checked, failure);
    }

    fn fullness(&mut self, formulas: &[Formula]) {
        let mut checked = 0;
        let mut failure = None;
        for phi in formulas {
            let exists = Formula::exists("x", phi.clone());
            let others: Vec<String> = exists.free_vars().into_iter().collect();
            for _ in 0..self.cfg.samples.clamp(1, 4) {
                checked += 1;
                let args = self.random_assignment(&others);
                let f = fullness_witness(self.rand, phi, "x", &args).expect("corpus evaluates");
                let mut with_f = args.clone();
                with_f.insert("x".to_string(), f);
                let left = event_of(self.rand, phi, &with_f).expect("corpus evaluates");
                let right = event_of(self.rand, &exists, &args).expect("corpus evaluates");
                if left != right && failure.is_none() {
                    failure = Some(format!("no exact witness for {phi}"));
                }
            }
        }
        self.record("Fullness", checked, failure);
    }

    fn event(&mut self, events: &[Event]) {
        let eq = Formula::eq(Term::var("x"), Term::var("y"));
        let mut failure = None;
        for e in events {
            let (f, g) = event_witness(self.rand, e).expect("event has the base length");
            let args: RandomAssignment = [("x".to_string(), f), ("y".to_string(), g)].into();
            let ok = self.rand.family().iter().all(|m| m.size() >= 2);
            if !ok || event_of(self.rand, &eq, &args).ok().as_ref() != Some(e) {
                failure = Some(format!("no pair with [[x=y]] = {e}"));
                break;
            }
        }
        self.record("Event", events.len(), failure);
    }

    fn measure(&mut self, events: &[Event]) {
        let n = self.rand.len();
        let mut checked = 2;
        let mut failure = None;
        if !mu(self.rand, &Event::top(n)).is_one() {
            failure = Some(format!("mu(top) = {}", fmt_rational(&mu(self.rand, &Event::top(n)))));
        } else if !mu(self.rand, &Event::bot(n)).is_zero() {
            failure = Some("mu(bot) is not 0".to_string());
        }
        let exhaustive = n <= self.cfg.exhaustive_limit;
        let pairs: Vec<(Event, Event)> = if exhaustive {
            events.iter().flat_map(|u| events.iter().map(move |v| (u.clone(), v.clone()))).collect()
        } else {
            (0..self.cfg.samples * 4).map(|_| (self.random_event(), self.random_event())).collect()
        };
        for (u, v) in pairs {
            checked += 1;
            let left = mu(self.rand, &u) + mu(self.rand, &v);
            let right = mu(self.rand, &u.join(&v)) + mu(self.rand, &u.meet(&v));
            if left != right && failure.is_none() {
                failure = Some(format!("additivity fails for {u}, {v}"));
            }
        }
        if let Some(w) = self.rand.base().weights().iter().find(|w| w.is_negative()) {
            failure = failure.or(Some(format!("negative weight {}", fmt_rational(w))));
        }
        self.record("Measure", checked, failure);
    }

    fn transfer(&mut self, sentences: &[Formula]) {
        let n = self.rand.len();
        let mut checked = 0;
        let mut failure = None;
        for s in sentences {
            let truth: Vec<bool> = self
                .rand
                .family()
                .iter()
                .map(|m| eval_formula(m, s, &Assignment::new()).expect("sentences evaluate"))
                .collect();
            let e = event_of(self.rand, s, &RandomAssignment::new()).expect("sentences evaluate");
            let value = mu(self.rand, &e);
            checked += 1;
            if truth.iter().all(|&t| t) && (e != Event::top(n) || !value.is_one()) {
                failure = Some(format!("mu[[ {s} ]] = {} although every point satisfies it", fmt_rational(&value)));
            }
            if truth.iter().all(|&t| !t) && !value.is_zero() {
                failure = Some(format!("mu[[ {s} ]] = {} although no point satisfies it", fmt_rational(&value)));
            }
        }
        self.record("Transfer", checked, failure);
    }
}

fn all_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let count = size.pow(arity as u32);
    (0..count).map(|i| crate::logic::structure::tuple_at(size, arity, i)).collect()
}

/// Checks every axiom on `rand` with the shipped corpora.
pub fn check_axioms(rand: &Randomization, cfg: &AxiomConfig) -> AxiomReport {
    let sig = rand.structure_at(0).signature().clone();
    let formulas = corpus::formulas(&sig);
    let mut validity = corpus::validity(&sig);
    validity.extend(cfg.extra_validity.iter().cloned());
    let sentences = corpus::sentences(&sig);
    let mut c = Checker { rand, cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), findings: Vec::new() };
    let events = c.events();
    c.validity(&validity);
    c.boolean(&formulas);
    c.distance();
    c.fullness(&formulas);
    c.event(&events);
    c.measure(&events);
    c.transfer(&sentences);
    AxiomReport {
        findings: c.findings,
        atomless_defect: atomless_defect(rand),
        atomless_threshold: rand.base().min_weight() * q(1, 2),
    }
}
