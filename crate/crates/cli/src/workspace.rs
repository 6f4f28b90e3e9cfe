//! The flat workspace file.
//!
//! One declaration per line; a structure block may span several lines.
//! Lines starting with `#` are comments.
//!
//! ```text
//! structure M2 { universe = 2; }
//! space coin = [1/2, 1/2]
//! rand r = M2 over coin
//! rand mix = family [M2, N2] over coin
//! elem f = [0, 1]
//! event E = {0}
//! measure nu = M2^2 rtype { q0: 1/2, q1: 1/2 }
//! measure p = L3^1 over [1] rtype { q0: 1/1 }
//! ```
//!
//! References are resolved when a command runs. Structure names fall back
//! to the built-in structures (`m2`, `c3`, `l3`, `setN`, `cN`, `lN`), space
//! names to `dyadicN` and `uniformN`, and randomization names to `<S>x<n>`,
//! the structure `S` over `n` equally likely points.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use randlab_core::logic::types::type_space_shared;
use randlab_core::logic::{parse_structure, standard, FinStructure};
use randlab_core::measure::FinProbSpace;
use randlab_core::randomizer::{make_randomization, Event, RandomElement, Randomization};
use randlab_core::rational::{fmt_rational, parse_rational, q};
use randlab_core::rtype::RMeasure;
use randlab_core::Rational;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandDecl {
    /// One name for a constant family, otherwise one per base point.
    pub structures: Vec<String>,
    pub family: bool,
    pub base: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureDecl {
    pub structure: String,
    pub arity: usize,
    pub params: Vec<usize>,
    pub weights: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object {
    Structure(FinStructure),
    Space(Vec<Rational>),
    Rand(RandDecl),
    Element(Vec<usize>),
    Event(Vec<usize>),
    Measure(MeasureDecl),
}

impl Object {
    fn kind(&self) -> &'static str {
        match self {
            Object::Structure(_) => "structure",
            Object::Space(_) => "space",
            Object::Rand(_) => "rand",
            Object::Element(_) => "elem",
            Object::Event(_) => "event",
            Object::Measure(_) => "measure",
        }
    }

    fn order(&self) -> usize {
        match self {
            Object::Structure(_) => 0,
            Object::Space(_) => 1,
            Object::Rand(_) => 2,
            Object::Element(_) => 3,
            Object::Event(_) => 4,
            Object::Measure(_) => 5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workspace {
    objects: BTreeMap<String, Object>,
}

fn parse_err(line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Parse(format!("workspace line {line}: {msg}"))
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `[a, b, c]` or `{a, b, c}` with the given delimiters.
fn list<T>(text: &str, open: char, close: char, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let inner = text.trim().strip_prefix(open)?.strip_suffix(close)?.trim();
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|s| item(s.trim())).collect()
}

fn rationals(text: &str) -> Option<Vec<Rational>> {
    list(text, '[', ']', |s| parse_rational(s).ok())
}

fn indices(text: &str) -> Option<Vec<usize>> {
    list(text, '[', ']', |s| s.parse().ok())
}

fn rtype_weights(text: &str) -> Option<Vec<Rational>> {
    let body = text.trim().strip_prefix("rtype")?.trim();
    let entries = list(body, '{', '}', |s| {
        let (name, value) = s.split_once(':')?;
        let idx: usize = name.trim().strip_prefix('q')?.parse().ok()?;
        Some((idx, parse_rational(value).ok()?))
    })?;
    let len = entries.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
    let mut weights = vec![q(0, 1); len];
    for (i, w) in entries {
        weights[i] = w;
    }
    Some(weights)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn join_rationals(items: &[Rational]) -> String {
    items.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Resolution(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_string()).map_err(|e| CliError::Resolution(format!("cannot write {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut ws = Workspace::new();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        while let Some((n, line)) = lines.next() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with("structure") {
                let mut block = line.to_string();
                let depth = |s: &str| s.matches('{').count() as i64 - s.matches('}').count() as i64;
                while depth(&block) > 0 || !block.contains('{') {
                    let (_, more) = lines.next().ok_or_else(|| parse_err(n, "unterminated structure block"))?;
                    block.push(' ');
                    block.push_str(more);
                }
                let s = parse_structure(&block).map_err(|e| parse_err(n, e))?;
                ws.insert(s.name().to_string(), Object::Structure(s)).map_err(|e| parse_err(n, e))?;
                continue;
            }
            let (head, rhs) = line.split_once('=').ok_or_else(|| parse_err(n, "expected `<kind> <name> = ...`"))?;
            let mut words = head.split_whitespace();
            let (kind, name) = match (words.next(), words.next(), words.next()) {
                (Some(k), Some(name), None) if is_name(name) => (k, name.to_string()),
                _ => return Err(parse_err(n, "expected `<kind> <name> = ...`")),
            };
            let rhs = rhs.trim();
            let obj = match kind {
                "space" => {
                    let w = rationals(rhs).ok_or_else(|| parse_err(n, "expected `[p/q, ...]`"))?;
                    FinProbSpace::from_weights(w.clone()).map_err(|e| parse_err(n, e))?;
                    Object::Space(w)
                }
                "rand" => Object::Rand(parse_rand(rhs).ok_or_else(|| parse_err(n, "expected `<S> over <space>` or `family [S, ...] over <space>`"))?),
                "elem" => Object::Element(indices(rhs).ok_or_else(|| parse_err(n, "expected `[v0, v1, ...]`"))?),
                "event" => {
                    let mut idx = list(rhs, '{', '}', |s| s.parse::<usize>().ok()).ok_or_else(|| parse_err(n, "expected `{i, j, ...}`"))?;
                    idx.sort_unstable();
                    idx.dedup();
                    Object::Event(idx)
                }
                "measure" => Object::Measure(parse_measure(rhs).ok_or_else(|| parse_err(n, "expected `<S>^<n> [over [a, ...]] rtype { q0: p/q, ... }`"))?),
                other => return Err(parse_err(n, format!("unknown declaration `{other}`"))),
            };
            ws.insert(name, obj).map_err(|e| parse_err(n, e))?;
        }
        Ok(ws)
    }

    /// Adds an object; names are unique across all kinds.
    pub fn insert(&mut self, name: String, obj: Object) -> Result<(), CliError> {
        if !is_name(&name) {
            return Err(CliError::Parse(format!("`{name}` is not a valid name")));
        }
        if let Some(old) = self.objects.get(&name) {
            return Err(CliError::Parse(format!("`{name}` is already declared as a {}", old.kind())));
        }
        self.objects.insert(name, obj);
        Ok(())
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.objects.len()
    }

    fn missing(&self, kind: &str, name: &str) -> CliError {
        match self.objects.get(name) {
            Some(obj) => CliError::Resolution(format!("`{name}` is a {}, not a {kind}", obj.kind())),
            None => CliError::Resolution(format!("no {kind} named `{name}`")),
        }
    }

    pub fn structure(&self, name: &str) -> Result<FinStructure, CliError> {
        match self.objects.get(name) {
            Some(Object::Structure(s)) => Ok(s.clone()),
            Some(_) => Err(self.missing("structure", name)),
            None => standard::by_name(name).ok_or_else(|| self.missing("structure", name)),
        }
    }

    pub fn space(&self, name: &str) -> Result<FinProbSpace, CliError> {
        match self.objects.get(name) {
            Some(Object::Space(w)) => Ok(FinProbSpace::from_weights(w.clone())?),
            Some(_) => Err(self.missing("space", name)),
            None => builtin_space(name).ok_or_else(|| self.missing("space", name)),
        }
    }

    pub fn rand(&self, name: &str) -> Result<Randomization, CliError> {
        match self.objects.get(name) {
            Some(Object::Rand(d)) => {
                let base = self.space(&d.base)?;
                if d.family {
                    let family = d.structures.iter().map(|s| self.structure(s)).collect::<Result<Vec<_>, _>>()?;
                    Ok(make_randomization(family, base)?)
                } else {
                    Ok(Randomization::constant(&self.structure(&d.structures[0])?, base))
                }
            }
            Some(_) => Err(self.missing("randomization", name)),
            None => {
                let (s, n) = name.rsplit_once('x').ok_or_else(|| self.missing("randomization", name))?;
                let n: usize = n.parse().ok().filter(|&n| n > 0).ok_or_else(|| self.missing("randomization", name))?;
                let m = self.structure(s).map_err(|_| self.missing("randomization", name))?;
                Ok(Randomization::constant(&m, FinProbSpace::uniform((0..n).collect())?))
            }
        }
    }

    /// A named random element, or `#k` for the constant `k`.
    pub fn element(&self, name: &str, rand: &Randomization) -> Result<RandomElement, CliError> {
        let f = match (name.strip_prefix('#'), self.objects.get(name)) {
            (Some(k), _) => {
                let k = k.parse().map_err(|_| CliError::Parse(format!("bad constant `{name}`")))?;
                RandomElement::constant(k, rand.len())
            }
            (None, Some(Object::Element(v))) => RandomElement(v.clone()),
            _ => return Err(self.missing("random element", name)),
        };
        rand.check_element(&f)?;
        Ok(f)
    }

    /// Comma-separated element references; the empty string is the empty tuple.
    pub fn elements(&self, names: &str, rand: &Randomization) -> Result<Vec<RandomElement>, CliError> {
        names.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| self.element(s, rand)).collect()
    }

    pub fn event(&self, name: &str, len: usize) -> Result<Event, CliError> {
        match self.objects.get(name) {
            Some(Object::Event(idx)) => {
                if let Some(&i) = idx.iter().find(|&&i| i >= len) {
                    return Err(CliError::Resolution(format!("event `{name}` contains point {i}, the base has {len}")));
                }
                Ok(Event::from_indices(len, idx))
            }
            _ => Err(self.missing("event", name)),
        }
    }

    pub fn measure(&self, name: &str) -> Result<RMeasure, CliError> {
        match self.objects.get(name) {
            Some(Object::Measure(d)) => {
                let m = self.structure(&d.structure)?;
                if let Some(&a) = d.params.iter().find(|&&a| a >= m.size()) {
                    return Err(CliError::Resolution(format!("measure `{name}`: parameter {a} is outside {}", m.name())));
                }
                let space = Arc::new(type_space_shared(Arc::new(m), d.arity, &d.params));
                if d.weights.len() > space.len() {
                    return Err(CliError::Resolution(format!("measure `{name}` names q{}, the space has {} types", d.weights.len() - 1, space.len())));
                }
                let mut w = d.weights.clone();
                w.resize(space.len(), q(0, 1));
                Ok(RMeasure::new(space, w)?)
            }
            _ => Err(self.missing("measure", name)),
        }
    }
}

fn builtin_space(name: &str) -> Option<FinProbSpace> {
    if let Some(d) = name.strip_prefix("dyadic").and_then(|d| d.parse::<u32>().ok()).filter(|&d| d <= 12) {
        return Some(FinProbSpace::dyadic(d));
    }
    let n = name.strip_prefix("uniform").and_then(|n| n.parse::<usize>().ok()).filter(|&n| n > 0)?;
    FinProbSpace::uniform((0..n).collect()).ok()
}

fn parse_rand(rhs: &str) -> Option<RandDecl> {
    let (left, base) = rhs.rsplit_once(" over ")?;
    let base = base.trim();
    if !is_name(base) {
        return None;
    }
    let left = left.trim();
    match left.strip_prefix("family") {
        Some(rest) => {
            let structures = list(rest, '[', ']', |s| is_name(s).then(|| s.to_string()))?;
            (!structures.is_empty()).then_some(RandDecl { structures, family: true, base: base.to_string() })
        }
        None => is_name(left).then(|| RandDecl { structures: vec![left.to_string()], family: false, base: base.to_string() }),
    }
}

fn parse_measure(rhs: &str) -> Option<MeasureDecl> {
    let at = rhs.find("rtype")?;
    let (head, body) = rhs.split_at(at);
    let weights = rtype_weights(body)?;
    let (space, params) = match head.split_once(" over ") {
        Some((s, p)) => (s.trim(), indices(p)?),
        None => (head.trim(), Vec::new()),
    };
    let (structure, arity) = space.split_once('^')?;
    is_name(structure).then_some(())?;
    Some(MeasureDecl { structure: structure.to_string(), arity: arity.trim().parse().ok()?, params, weights })
}

impl fmt::Display for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<(&String, &Object)> = self.objects.iter().collect();
        items.sort_by_key(|(name, obj)| (obj.order(), *name));
        for (name, obj) in items {
            match obj {
                Object::Structure(s) => writeln!(f, "{s}")?,
                Object::Space(w) => writeln!(f, "space {name} = [{}]", join_rationals(w))?,
                Object::Rand(d) if d.family => writeln!(f, "rand {name} = family [{}] over {}", d.structures.join(", "), d.base)?,
                Object::Rand(d) => writeln!(f, "rand {name} = {} over {}", d.structures[0], d.base)?,
                Object::Element(v) => writeln!(f, "elem {name} = [{}]", join(v))?,
                Object::Event(v) => writeln!(f, "event {name} = {{{}}}", join(v))?,
                Object::Measure(d) => {
                    let params = if d.params.is_empty() { String::new() } else { format!(" over [{}]", join(&d.params)) };
                    let body: Vec<String> = d.weights.iter().enumerate().map(|(i, w)| format!("q{i}: {}", fmt_rational(w))).collect();
                    writeln!(f, "measure {name} = {}^{}{params} rtype {{ {} }}", d.structure, d.arity, body.join(", "))?
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# a shared coin
structure N2 {
  universe = 2;
  relation P/1 = {(0)};
}
space coin = [1/2, 1/2]
rand r = M2 over coin
rand mix = family [N2, N2] over coin
elem f = [0, 1]
event E = {1, 0}
measure nu = M2^2 rtype { q1: 1/2, q0: 1/2 }
measure p = L3^1 over [1] rtype { q2: 1 }
";

    #[test]
    fn round_trip() {
        let ws = Workspace::parse(SAMPLE).unwrap();
        assert_eq!(ws.len(), 8);
        let text = ws.to_string();
        assert_eq!(Workspace::parse(&text).unwrap(), ws);
        assert_eq!(Workspace::parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn resolves_objects() {
        let ws = Workspace::parse(SAMPLE).unwrap();
        let r = ws.rand("r").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(ws.element("f", &r).unwrap(), RandomElement(vec![0, 1]));
        assert_eq!(ws.element("#1", &r).unwrap(), RandomElement(vec![1, 1]));
        assert_eq!(ws.event("E", 2).unwrap(), Event::top(2));
        assert_eq!(ws.measure("nu").unwrap().weights(), &[q(1, 2), q(1, 2)]);
        assert_eq!(ws.measure("p").unwrap().weights().len(), 3);
        assert!(ws.rand("mix").unwrap().constant_structure().is_some());
    }

    #[test]
    fn builtins() {
        let ws = Workspace::new();
        assert_eq!(ws.rand("m2x8").unwrap().len(), 8);
        assert_eq!(ws.space("dyadic2").unwrap().len(), 4);
        assert_eq!(ws.structure("c3").unwrap().size(), 3);
        assert!(matches!(ws.rand("r"), Err(CliError::Resolution(_))));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = Workspace::parse("space a = [1]\nelem a = [0]\n").unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
    }

    #[test]
    fn kind_mismatch_is_resolution_error() {
        let ws = Workspace::parse("elem f = [0]\n").unwrap();
        assert!(matches!(ws.rand("f"), Err(CliError::Resolution(_))));
        assert!(matches!(ws.element("f", &ws.rand("m2x2").unwrap()), Err(CliError::Resolution(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rational() -> impl Strategy<Value = Rational> {
            (0i64..20, 1i64..12).prop_map(|(a, b)| q(a, b))
        }

        fn object() -> impl Strategy<Value = Object> {
            prop_oneof![
                prop::collection::vec(1i64..9, 1..5).prop_map(|raw| {
                    let total: i64 = raw.iter().sum();
                    Object::Space(raw.iter().map(|&r| q(r, total)).collect())
                }),
                prop::collection::vec(0usize..5, 0..6).prop_map(Object::Element),
                prop::collection::btree_set(0usize..8, 0..5).prop_map(|s| Object::Event(s.into_iter().collect())),
                (prop::sample::select(vec!["M2", "C3", "L3"]), prop::bool::ANY, 1usize..4).prop_map(|(s, family, n)| {
                    let structures = if family { vec![s.to_string(); n] } else { vec![s.to_string()] };
                    Object::Rand(RandDecl { structures, family, base: "coin".into() })
                }),
                ("[A-Z][a-z0-9]{0,3}", 1usize..3, prop::collection::vec(0usize..3, 0..2), prop::collection::vec(rational(), 0..5))
                    .prop_map(|(structure, arity, params, weights)| Object::Measure(MeasureDecl { structure, arity, params, weights })),
            ]
        }

        proptest! {
            #[test]
            fn save_load_round_trip(objs in prop::collection::btree_map("[a-z][a-z0-9_]{0,5}", object(), 0..8)) {
                let mut ws = Workspace::new();
                ws.insert("N3".into(), Object::Structure(standard::cycle(3).renamed("N3"))).unwrap();
                for (name, obj) in objs {
                    ws.insert(name, obj).unwrap();
                }
                let text = ws.to_string();
                prop_assert_eq!(Workspace::parse(&text).unwrap(), ws);
            }
        }
    }
}
