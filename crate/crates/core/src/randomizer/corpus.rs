//! Shipped formula lists, instantiated for a given signature.
//!
//! Every formula uses free variables among `x`, `y`, `z`.

use crate::logic::{parse_formula, Formula, Signature, Term};

/// Atomic formulas in `x`, `y` built from the signature, equality first.
pub fn atoms(sig: &Signature) -> Vec<Formula> {
    let mut texts = vec!["x=y".to_string()];
    let args = |k: usize| -> Vec<Vec<&str>> {
        match k {
            0 => vec![vec![]],
            1 => vec![vec!["x"], vec!["y"]],
            2 => vec![vec!["x", "y"], vec!["y", "x"], vec!["x", "x"]],
            _ => vec![(0..k).map(|i| if i % 2 == 0 { "x" } else { "y" }).collect()],
        }
    };
    let call = |name: &str, a: &[&str]| {
        if a.is_empty() {
            name.to_string()
        } else if a.len() == 2 && !name.starts_with(|c: char| c.is_alphabetic()) {
            format!("{}{name}{}", a[0], a[1])
        } else {
            format!("{name}({})", a.join(","))
        }
    };
    for (name, k) in sig.relations() {
        for a in args(*k) {
            texts.push(call(name, &a));
        }
    }
    for (name, k) in sig.functions() {
        for a in args(*k).into_iter().take(2) {
            texts.push(format!("{}=y", call(name, &a)));
        }
    }
    for c in sig.constants() {
        texts.push(format!("x={c}"));
    }
    texts.iter().map(|t| parse_formula(t, sig).expect("generated atom parses")).collect()
}

const EQUALITY: &[&str] = &[
    "x=y",
    "!(x=y)",
    "x=x",
    "true",
    "false",
    "exists z (!(z=x))",
    "exists z (!(z=x) & !(z=y))",
    "forall z (z=x | z=y)",
    "exists z (z=x & z=y)",
    "forall z (z=x)",
    "exists z (exists w (!(z=w)))",
    "forall z (exists w (!(z=w)))",
    "x=y -> forall z (z=x | !(z=y))",
    "exists z (!(z=x)) & !(x=y)",
    "forall z (forall w (z=w | z=x | w=x))",
    "exists z (exists w (!(z=w) & !(z=x) & !(w=x)))",
    "!(exists z (!(z=x) & !(z=y)))",
    "x=y | exists z (!(z=x) & !(z=y))",
    "forall z (z=x -> z=y)",
    "exists z (z=x) & exists w (w=y)",
    "!(x=y) -> exists z (z=x | z=y)",
    "forall z (!(z=x) | !(z=y))",
    "y=x",
    "y=y",
    "!(y=x) & x=x",
    "exists z (!(z=y))",
    "forall z (z=y)",
    "exists z (exists w (!(z=w) & !(z=y) & !(w=y)))",
    "forall z (forall w (z=w | z=y | w=y))",
    "exists z (!(z=x) & z=y)",
    "forall z (z=x | !(z=y))",
    "exists x (!(x=y))",
    "forall x (x=y)",
    "exists y (!(x=y))",
    "forall y (x=y | exists z (!(z=y)))",
    "(x=y -> x=x) & (x=x -> x=y)",
];

fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

/// Variants of one atom `a(x, y)` in `x`, `y`.
fn atom_variants(a: &Formula) -> Vec<Formula> {
    let via_z = Formula::and(vec![a.substitute("y", &var("z")), a.substitute("x", &var("z"))]);
    vec![
        a.clone(),
        Formula::not(a.clone()),
        Formula::exists("y", a.clone()),
        Formula::forall("y", a.clone()),
        Formula::exists("x", a.clone()),
        Formula::forall("x", Formula::exists("y", a.clone())),
        Formula::and(vec![a.clone(), Formula::eq(var("x"), var("y"))]),
        Formula::or(vec![a.clone(), Formula::not(Formula::eq(var("x"), var("y")))]),
        Formula::exists("z", via_z),
    ]
}

/// At least 40 formulas with free variables among `x`, `y`, deduplicated.
pub fn formulas(sig: &Signature) -> Vec<Formula> {
    let mut out: Vec<Formula> = EQUALITY.iter().map(|t| parse_formula(t, sig).expect("corpus formula parses")).collect();
    let atoms = atoms(sig);
    for a in &atoms {
        out.extend(atom_variants(a));
    }
    for pair in atoms.windows(2) {
        out.push(Formula::and(vec![pair[0].clone(), Formula::not(pair[1].clone())]));
        out.push(Formula::implies(pair[0].clone(), pair[1].clone()));
    }
    dedup(out)
}

fn dedup(v: Vec<Formula>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in v {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::and(vec![Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
}

/// Logically valid formulas: propositional tautologies and quantifier and
/// equality laws instantiated with the signature's atoms. A finite sample
/// of the valid formulas, not a decision procedure.
pub fn validity(sig: &Signature) -> Vec<Formula> {
    let atoms = atoms(sig);
    let a = atoms.last().cloned().expect("x=y is always present");
    let b = atoms.first().cloned().expect("x=y is always present");
    let not = Formula::not;
    let and = |p: Formula, q: Formula| Formula::and(vec![p, q]);
    let or = |p: Formula, q: Formula| Formula::or(vec![p, q]);
    let imp = Formula::implies;
    let a_z = a.substitute("y", &var("z"));
    let mut out = vec![
        or(a.clone(), not(a.clone())),
        not(and(a.clone(), not(a.clone()))),
        imp(a.clone(), a.clone()),
        imp(and(a.clone(), b.clone()), a.clone()),
        imp(a.clone(), or(a.clone(), b.clone())),
        imp(not(not(a.clone())), a.clone()),
        or(imp(a.clone(), b.clone()), imp(b.clone(), a.clone())),
        imp(and(imp(a.clone(), b.clone()), a.clone()), b.clone()),
        iff(not(and(a.clone(), b.clone())), or(not(a.clone()), not(b.clone()))),
        parse_formula("x=x", sig).unwrap(),
        parse_formula("x=y -> y=x", sig).unwrap(),
        parse_formula("(x=y & y=z) -> x=z", sig).unwrap(),
        parse_formula("forall x (x=x)", sig).unwrap(),
        parse_formula("exists z (z=x)", sig).unwrap(),
        imp(Formula::forall("z", a_z.clone()), a.clone()),
        imp(a.clone(), Formula::exists("z", a_z.clone())),
        imp(Formula::forall("z", a_z.clone()), Formula::exists("z", a_z)),
        imp(
            Formula::exists("x", Formula::forall("y", a.clone())),
            Formula::forall("y", Formula::exists("x", a.clone())),
        ),
        iff(not(Formula::exists("y", a.clone())), Formula::forall("y", not(a.clone()))),
    ];
    for atom in &atoms {
        let moved = atom.substitute("x", &var("y"));
        out.push(imp(parse_formula("x=y", sig).unwrap(), imp(atom.clone(), moved)));
    }
    dedup(out)
}

/// Sentences used for the Transfer axioms.
pub fn sentences(sig: &Signature) -> Vec<Formula> {
    let mut out: Vec<Formula> = [
        "forall x (x=x)",
        "exists x (exists y (!(x=y)))",
        "forall x (forall y (forall z (x=y | x=z | y=z)))",
        "exists x (exists y (exists z (!(x=y) & !(x=z) & !(y=z))))",
        "forall x (forall y (x=y))",
        "true",
        "false",
    ]
    .iter()
    .map(|t| parse_formula(t, sig).unwrap())
    .collect();
    for a in atoms(sig).iter().skip(1) {
        out.push(Formula::forall("x", Formula::exists("y", a.clone())));
        out.push(Formula::exists("x", Formula::forall("y", a.clone())));
        out.push(Formula::forall("x", Formula::forall("y", a.clone())));
        out.push(Formula::exists("x", Formula::exists("y", a.clone())));
        out.push(Formula::exists("x", a.substitute("y", &var("x"))));
    }
    dedup(out)
}

/// Continuous formulas in `x`, `y` (texts, parsed by the caller).
pub fn cformulas(sig: &Signature) -> Vec<String> {
    let mut out: Vec<String> = vec![
        "mu[[ x=y ]]".into(),
        "dK(x,y)".into(),
        "~mu[[ x=y ]] -. half(dK(x,y))".into(),
        "sup z (mu[[ !(z=x) & !(z=y) ]])".into(),
        "inf z (max(dK(x,z), dK(y,z)))".into(),
        "sup z (min(mu[[ z=x ]], mu[[ !(z=y) ]]))".into(),
        "inf z (dB([[ z=x ]], [[ x=y ]]))".into(),
        "max(mu[[ x=y ]], half(mu[[ x=x ]]))".into(),
    ];
    for a in atoms(sig).iter().skip(1) {
        out.push(format!("mu[[ {a} ]]"));
        out.push(format!("sup z (mu[[ {} ]])", a.substitute("y", &var("z"))));
        out.push(format!("inf z (mu[[ {} ]] -. mu[[ x=z ]])", a.substitute("x", &var("z"))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::standard;

    #[test]
    fn sizes() {
        for m in [standard::m2(), standard::c3(), standard::l3()] {
            let f = formulas(m.signature());
            assert!(f.len() >= 40, "{} has {}", m.name(), f.len());
            assert!(f.iter().all(|phi| phi.free_vars().iter().all(|v| v == "x" || v == "y")));
            assert!(!validity(m.signature()).is_empty());
            assert!(sentences(m.signature()).iter().all(|s| s.free_vars().is_empty()));
        }
    }
}
