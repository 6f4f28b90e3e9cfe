//! Continuous formulas of the randomization signature.
//!
//! Grammar (loosest first):
//! ```text
//! c     := cterm (("-." | "-") cterm)*
//! cterm := p/q | "~" cterm | "(" c ")"
//!        | "mu" "[[" φ "]]" | "P" "[" φ "]" | "mu" "(" ev ")"
//!        | "dK" "(" x "," y ")" | "dB" "(" ev "," ev ")"
//!        | "half" "(" c ")" | "min" "(" c "," c ")" | "max" "(" c "," c ")"
//!        | ("sup" | "inf") v "(" c ")"          also written sup_v, inf_v
//! ev    := evx ("|" evx)*      evx := eva ("^" eva)*      eva := evu ("&" evu)*
//! evu   := "!" evu | "top" | "bot" | "[[" φ "]]" | U | "(" ev ")"
//! ```
//! Lowercase variables range over random elements, capitalised ones over
//! events.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{d_b, d_k, event_of, mu, Event, RandError, RandomAssignment, RandomElement, Randomization};
use crate::logic::parse::{self, Cursor, Tok};
use crate::logic::{Formula, ParseError, Signature};
use crate::rational::{fmt_rational, q, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum EventTerm {
    /// `⟦φ⟧`
    Formula(Formula),
    Var(String),
    Top,
    Bot,
    Not(Box<EventTerm>),
    Join(Box<EventTerm>, Box<EventTerm>),
    Meet(Box<EventTerm>, Box<EventTerm>),
    SymDiff(Box<EventTerm>, Box<EventTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CFormula {
    Const(Rational),
    Prob(EventTerm),
    DistK(String, String),
    DistB(EventTerm, EventTerm),
    /// `1 - u`
    OneMinus(Box<CFormula>),
    /// `max(u - v, 0)`
    Monus(Box<CFormula>, Box<CFormula>),
    Half(Box<CFormula>),
    Min(Box<CFormula>, Box<CFormula>),
    Max(Box<CFormula>, Box<CFormula>),
    Sup(String, Box<CFormula>),
    Inf(String, Box<CFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CFormulaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("constant {0} is outside [0,1]")]
    ConstantOutOfRange(String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("quantifier over `{var}` needs {required} instances, budget is {budget}")]
    BudgetExceeded { var: String, required: u128, budget: u128 },
    #[error(transparent)]
    Rand(#[from] RandError),
}

pub fn is_event_var(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

pub fn parse_cformula(text: &str, sig: &Signature) -> Result<CFormula, CFormulaError> {
    let mut cur = Cursor::new(text)?;
    let c = cformula(&mut cur, sig)?;
    cur.finish()?;
    Ok(c)
}

fn cformula(cur: &mut Cursor, sig: &Signature) -> Result<CFormula, CFormulaError> {
    let mut lhs = cterm(cur, sig)?;
    while cur.eat(&Tok::Monus) || cur.eat(&Tok::Minus) {
        let rhs = cterm(cur, sig)?;
        lhs = CFormula::Monus(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn bracketed_formula(cur: &mut Cursor, sig: &Signature, double: bool) -> Result<Formula, CFormulaError> {
    cur.expect(&Tok::LBrack)?;
    if double {
        cur.expect(&Tok::LBrack)?;
    }
    let f = parse::formula(cur, sig)?;
    cur.expect(&Tok::RBrack)?;
    if double {
        cur.expect(&Tok::RBrack)?;
    }
    Ok(f)
}

fn paren_list(cur: &mut Cursor, sig: &Signature, n: usize) -> Result<Vec<CFormula>, CFormulaError> {
    cur.expect(&Tok::LParen)?;
    let mut out = Vec::new();
    for i in 0..n {
        if i > 0 {
            cur.expect(&Tok::Comma)?;
        }
        out.push(cformula(cur, sig)?);
    }
    cur.expect(&Tok::RParen)?;
    Ok(out)
}

fn cterm(cur: &mut Cursor, sig: &Signature) -> Result<CFormula, CFormulaError> {
    if matches!(cur.peek(), Some(Tok::Num(_))) {
        let r = cur.rational()?;
        if r.is_negative() || r > Rational::one() {
            return Err(CFormulaError::ConstantOutOfRange(fmt_rational(&r)));
        }
        return Ok(CFormula::Const(r));
    }
    if cur.eat(&Tok::Tilde) {
        return Ok(CFormula::OneMinus(Box::new(cterm(cur, sig)?)));
    }
    if cur.eat(&Tok::LParen) {
        let c = cformula(cur, sig)?;
        cur.expect(&Tok::RParen)?;
        return Ok(c);
    }
    let pos = cur.pos();
    let name = cur.ident()?;
    let (quant, var) = match name.split_once('_') {
        Some((q @ ("sup" | "inf"), v)) if !v.is_empty() => (Some(q.to_string()), Some(v.to_string())),
        _ => (None, None),
    };
    if let Some(qn) = quant.or_else(|| (name == "sup" || name == "inf").then(|| name.clone())) {
        let v = match var {
            Some(v) => v,
            None => cur.ident()?,
        };
        cur.expect(&Tok::LParen)?;
        let body = cformula(cur, sig)?;
        cur.expect(&Tok::RParen)?;
        let body = Box::new(body);
        return Ok(if qn == "sup" { CFormula::Sup(v, body) } else { CFormula::Inf(v, body) });
    }
    match name.as_str() {
        "mu" if cur.peek() == Some(&Tok::LBrack) => Ok(CFormula::Prob(EventTerm::Formula(bracketed_formula(cur, sig, true)?))),
        "mu" => {
            cur.expect(&Tok::LParen)?;
            let e = event(cur, sig)?;
            cur.expect(&Tok::RParen)?;
            Ok(CFormula::Prob(e))
        }
        "P" => Ok(CFormula::Prob(EventTerm::Formula(bracketed_formula(cur, sig, false)?))),
        "dK" => {
            cur.expect(&Tok::LParen)?;
            let a = cur.ident()?;
            cur.expect(&Tok::Comma)?;
            let b = cur.ident()?;
            cur.expect(&Tok::RParen)?;
            Ok(CFormula::DistK(a, b))
        }
        "dB" => {
            cur.expect(&Tok::LParen)?;
            let a = event(cur, sig)?;
            cur.expect(&Tok::Comma)?;
            let b = event(cur, sig)?;
            cur.expect(&Tok::RParen)?;
            Ok(CFormula::DistB(a, b))
        }
        "half" => Ok(CFormula::Half(Box::new(paren_list(cur, sig, 1)?.remove(0)))),
        "min" | "max" => {
            let mut args = paren_list(cur, sig, 2)?;
            let b = Box::new(args.pop().unwrap());
            let a = Box::new(args.pop().unwrap());
            Ok(if name == "min" { CFormula::Min(a, b) } else { CFormula::Max(a, b) })
        }
        _ => Err(ParseError::UnknownSymbol { name, pos }.into()),
    }
}

fn event(cur: &mut Cursor, sig: &Signature) -> Result<EventTerm, CFormulaError> {
    let mut lhs = event_xor(cur, sig)?;
    while cur.eat(&Tok::Bar) {
        lhs = EventTerm::Join(Box::new(lhs), Box::new(event_xor(cur, sig)?));
    }
    Ok(lhs)
}

fn event_xor(cur: &mut Cursor, sig: &Signature) -> Result<EventTerm, CFormulaError> {
    let mut lhs = event_and(cur, sig)?;
    while cur.eat(&Tok::Caret) {
        lhs = EventTerm::SymDiff(Box::new(lhs), Box::new(event_and(cur, sig)?));
    }
    Ok(lhs)
}

fn event_and(cur: &mut Cursor, sig: &Signature) -> Result<EventTerm, CFormulaError> {
    let mut lhs = event_unary(cur, sig)?;
    while cur.eat(&Tok::Amp) {
        lhs = EventTerm::Meet(Box::new(lhs), Box::new(event_unary(cur, sig)?));
    }
    Ok(lhs)
}

fn event_unary(cur: &mut Cursor, sig: &Signature) -> Result<EventTerm, CFormulaError> {
    if cur.eat(&Tok::Bang) {
        return Ok(EventTerm::Not(Box::new(event_unary(cur, sig)?)));
    }
    if cur.eat(&Tok::LParen) {
        let e = event(cur, sig)?;
        cur.expect(&Tok::RParen)?;
        return Ok(e);
    }
    if cur.peek() == Some(&Tok::LBrack) {
        return Ok(EventTerm::Formula(bracketed_formula(cur, sig, true)?));
    }
    let pos = cur.pos();
    let name = cur.ident()?;
    match name.as_str() {
        "top" => Ok(EventTerm::Top),
        "bot" => Ok(EventTerm::Bot),
        _ if is_event_var(&name) => Ok(EventTerm::Var(name)),
        _ => Err(ParseError::Syntax { pos, msg: format!("`{name}` is not an event") }.into()),
    }
}

impl EventTerm {
    fn precedence(&self) -> u8 {
        match self {
            EventTerm::Join(..) => 1,
            EventTerm::SymDiff(..) => 2,
            EventTerm::Meet(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for EventTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, e: &EventTerm, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            EventTerm::Formula(phi) => write!(f, "[[ {phi} ]]"),
            EventTerm::Var(v) => write!(f, "{v}"),
            EventTerm::Top => write!(f, "top"),
            EventTerm::Bot => write!(f, "bot"),
            EventTerm::Not(e) => {
                write!(f, "!")?;
                side(f, e, 4)
            }
            EventTerm::Join(a, b) | EventTerm::SymDiff(a, b) | EventTerm::Meet(a, b) => {
                let p = self.precedence();
                let op = match self {
                    EventTerm::Join(..) => "|",
                    EventTerm::SymDiff(..) => "^",
                    _ => "&",
                };
                side(f, a, p)?;
                write!(f, " {op} ")?;
                side(f, b, p + 1)
            }
        }
    }
}

impl fmt::Display for CFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CFormula::Const(r) => write!(f, "{}", fmt_rational(r)),
            CFormula::Prob(EventTerm::Formula(phi)) => write!(f, "mu[[ {phi} ]]"),
            CFormula::Prob(e) => write!(f, "mu({e})"),
            CFormula::DistK(a, b) => write!(f, "dK({a},{b})"),
            CFormula::DistB(a, b) => write!(f, "dB({a}, {b})"),
            CFormula::OneMinus(u) => match **u {
                CFormula::Monus(..) => write!(f, "~({u})"),
                _ => write!(f, "~{u}"),
            },
            CFormula::Monus(a, b) => {
                write!(f, "{a} -. ")?;
                if matches!(**b, CFormula::Monus(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            CFormula::Half(u) => write!(f, "half({u})"),
            CFormula::Min(a, b) => write!(f, "min({a}, {b})"),
            CFormula::Max(a, b) => write!(f, "max({a}, {b})"),
            CFormula::Sup(v, body) => write!(f, "sup {v} ({body})"),
            CFormula::Inf(v, body) => write!(f, "inf {v} ({body})"),
        }
    }
}

struct Ctx<'a> {
    rand: &'a Randomization,
    budget: u128,
    k: RandomAssignment,
    b: BTreeMap<String, Event>,
}

/// Exact value of `phi` in `rand`; quantifiers enumerate all random
/// elements (or all events) as long as each domain is within `budget`.
pub fn eval_cformula(rand: &Randomization, phi: &CFormula, assignment: &RandomAssignment, budget: u128) -> Result<Rational, CFormulaError> {
    eval_cformula_with_events(rand, phi, assignment, &BTreeMap::new(), budget)
}

pub fn eval_cformula_with_events(
    rand: &Randomization,
    phi: &CFormula,
    assignment: &RandomAssignment,
    events: &BTreeMap<String, Event>,
    budget: u128,
) -> Result<Rational, CFormulaError> {
    let mut ctx = Ctx { rand, budget, k: assignment.clone(), b: events.clone() };
    value(&mut ctx, phi)
}

fn event_value(ctx: &Ctx<'_>, e: &EventTerm) -> Result<Event, CFormulaError> {
    let n = ctx.rand.len();
    Ok(match e {
        EventTerm::Formula(phi) => {
            let mut args = RandomAssignment::new();
            for v in phi.free_vars() {
                let f = ctx.k.get(&v).ok_or_else(|| CFormulaError::UnboundVariable(v.clone()))?;
                args.insert(v, f.clone());
            }
            event_of(ctx.rand, phi, &args)?
        }
        EventTerm::Var(v) => ctx.b.get(v).cloned().ok_or_else(|| CFormulaError::UnboundVariable(v.clone()))?,
        EventTerm::Top => Event::top(n),
        EventTerm::Bot => Event::bot(n),
        EventTerm::Not(a) => event_value(ctx, a)?.complement(),
        EventTerm::Join(a, b) => event_value(ctx, a)?.join(&event_value(ctx, b)?),
        EventTerm::Meet(a, b) => event_value(ctx, a)?.meet(&event_value(ctx, b)?),
        EventTerm::SymDiff(a, b) => event_value(ctx, a)?.symdiff(&event_value(ctx, b)?),
    })
}

fn value(ctx: &mut Ctx<'_>, phi: &CFormula) -> Result<Rational, CFormulaError> {
    Ok(match phi {
        CFormula::Const(r) => r.clone(),
        CFormula::Prob(e) => mu(ctx.rand, &event_value(ctx, e)?),
        CFormula::DistK(a, b) => {
            let fa = ctx.k.get(a).ok_or_else(|| CFormulaError::UnboundVariable(a.clone()))?;
            let fb = ctx.k.get(b).ok_or_else(|| CFormulaError::UnboundVariable(b.clone()))?;
            d_k(ctx.rand, fa, fb)?
        }
        CFormula::DistB(a, b) => d_b(ctx.rand, &event_value(ctx, a)?, &event_value(ctx, b)?),
        CFormula::OneMinus(u) => Rational::one() - value(ctx, u)?,
        CFormula::Monus(a, b) => {
            let d = value(ctx, a)? - value(ctx, b)?;
            if d.is_negative() {
                Rational::zero()
            } else {
                d
            }
        }
        CFormula::Half(u) => value(ctx, u)? * q(1, 2),
        CFormula::Min(a, b) => value(ctx, a)?.min(value(ctx, b)?),
        CFormula::Max(a, b) => value(ctx, a)?.max(value(ctx, b)?),
        CFormula::Sup(v, body) | CFormula::Inf(v, body) => {
            let sup = matches!(phi, CFormula::Sup(..));
            let n = ctx.rand.len();
            let events = is_event_var(v);
            let required = if events {
                if n >= 127 {
                    u128::MAX
                } else {
                    1u128 << n
                }
            } else {
                ctx.rand.carrier_size()
            };
            if required > ctx.budget {
                return Err(CFormulaError::BudgetExceeded { var: v.clone(), required, budget: ctx.budget });
            }
            let mut best: Option<Rational> = None;
            let saved_k = ctx.k.remove(v);
            let saved_b = ctx.b.remove(v);
            for i in 0..required {
                if events {
                    ctx.b.insert(v.clone(), Event::from_bits(n, i as u64));
                } else {
                    ctx.k.insert(v.clone(), ctx.rand.element_at(i));
                }
                let x = value(ctx, body)?;
                best = Some(match best {
                    None => x,
                    Some(b) if sup => b.max(x),
                    Some(b) => b.min(x),
                });
                let extreme = if sup { Rational::one() } else { Rational::zero() };
                if best.as_ref() == Some(&extreme) {
                    break;
                }
            }
            ctx.k.remove(v);
            ctx.b.remove(v);
            if let Some(f) = saved_k {
                ctx.k.insert(v.clone(), f);
            }
            if let Some(e) = saved_b {
                ctx.b.insert(v.clone(), e);
            }
            best.expect("quantifier domains are nonempty")
        }
    })
}

/// Free variables, split into random-element and event variables.
pub fn free_vars(phi: &CFormula) -> (Vec<String>, Vec<String>) {
    fn ev(e: &EventTerm, bound: &[String], k: &mut Vec<String>, b: &mut Vec<String>) {
        match e {
            EventTerm::Formula(phi) => {
                for v in phi.free_vars() {
                    if !bound.contains(&v) && !k.contains(&v) {
                        k.push(v);
                    }
                }
            }
            EventTerm::Var(v) => {
                if !bound.contains(v) && !b.contains(v) {
                    b.push(v.clone());
                }
            }
            EventTerm::Top | EventTerm::Bot => {}
            EventTerm::Not(a) => ev(a, bound, k, b),
            EventTerm::Join(x, y) | EventTerm::Meet(x, y) | EventTerm::SymDiff(x, y) => {
                ev(x, bound, k, b);
                ev(y, bound, k, b);
            }
        }
    }
    fn go(c: &CFormula, bound: &mut Vec<String>, k: &mut Vec<String>, b: &mut Vec<String>) {
        match c {
            CFormula::Const(_) => {}
            CFormula::Prob(e) => ev(e, bound, k, b),
            CFormula::DistK(x, y) => {
                for v in [x, y] {
                    if !bound.contains(v) && !k.contains(v) {
                        k.push(v.clone());
                    }
                }
            }
            CFormula::DistB(x, y) => {
                ev(x, bound, k, b);
                ev(y, bound, k, b);
            }
            CFormula::OneMinus(u) | CFormula::Half(u) => go(u, bound, k, b),
            CFormula::Monus(x, y) | CFormula::Min(x, y) | CFormula::Max(x, y) => {
                go(x, bound, k, b);
                go(y, bound, k, b);
            }
            CFormula::Sup(v, body) | CFormula::Inf(v, body) => {
                bound.push(v.clone());
                go(body, bound, k, b);
                bound.pop();
            }
        }
    }
    let (mut k, mut b) = (Vec::new(), Vec::new());
    go(phi, &mut Vec::new(), &mut k, &mut b);
    k.sort();
    b.sort();
    (k, b)
}

/// Convenience for a single random element binding list.
pub fn bind(pairs: &[(&str, &RandomElement)]) -> RandomAssignment {
    pairs.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::standard;
    use crate::measure::FinProbSpace;
    use crate::rational::int;

    const BUDGET: u128 = 1 << 20;

    #[test]
    fn parse_print_round_trip() {
        let sig = standard::c3().signature().clone();
        for text in [
            "mu[[ E(x,y) ]]",
            "~mu[[ x=y ]] -. half(dK(x,y))",
            "sup U (inf V (max(mu(U & V) -. half(mu(U)), half(mu(U)) -. mu(U & V))))",
            "min(1/3, dB([[ x=y ]] | !top, bot ^ U))",
            "inf x (1/1 -. mu[[ x=g ]])",
        ] {
            let c = parse_cformula(text, &sig).unwrap();
            let again = parse_cformula(&c.to_string(), &sig).unwrap();
            assert_eq!(c, again, "{text}");
        }
        assert_eq!(parse_cformula("P[x=y]", &sig).unwrap(), parse_cformula("mu[[x=y]]", &sig).unwrap());
        assert_eq!(parse_cformula("inf_x (1 - mu[[ x = g ]])", &sig).unwrap(), parse_cformula("inf x (1 -. mu[[x=g]])", &sig).unwrap());
        assert!(matches!(parse_cformula("3/2", &sig), Err(CFormulaError::ConstantOutOfRange(_))));
        assert!(parse_cformula("mu[[ E(x) ]]", &sig).is_err());
    }

    #[test]
    fn values() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(1));
        let f = RandomElement(vec![0, 1]);
        let g = RandomElement::constant(0, 2);
        let sig = m2.signature();
        let a = bind(&[("x", &f), ("y", &g), ("g", &g)]);
        let v = |t: &str| eval_cformula(&r, &parse_cformula(t, sig).unwrap(), &a, BUDGET).unwrap();
        assert_eq!(v("mu[[ x = y ]]"), q(1, 2));
        assert_eq!(v("mu[[ forall x (x=x) ]]"), int(1));
        assert_eq!(v("inf_x (1 - mu[[ x = g ]])"), int(0));
        assert_eq!(v("dK(x,y)"), v("~mu[[x=y]]"));
        assert_eq!(v("half(1) -. 3/4"), int(0));
    }

    #[test]
    fn atomless_defect_formula() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(3));
        let phi = parse_cformula(
            "sup U (inf V (max(mu(U & V) -. half(mu(U)), half(mu(U)) -. mu(U & V))))",
            m2.signature(),
        )
        .unwrap();
        assert_eq!(eval_cformula(&r, &phi, &RandomAssignment::new(), BUDGET).unwrap(), q(1, 16));
    }

    #[test]
    fn budget() {
        let m2 = standard::m2();
        let r = Randomization::constant(&m2, FinProbSpace::dyadic(3));
        let phi = parse_cformula("sup x (mu[[x=x]])", m2.signature()).unwrap();
        assert_eq!(
            eval_cformula(&r, &phi, &RandomAssignment::new(), 100),
            Err(CFormulaError::BudgetExceeded { var: "x".into(), required: 256, budget: 100 })
        );
    }
}
