use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use randlab_core::logic::hintikka::{default_vars, isolating_formula_in};
use randlab_core::logic::types::type_space_shared;
use randlab_core::logic::{parse_formula, FinStructure, Formula, TypeId, TypeSpace};
use randlab_core::measure::{
    extend_measure_eq, extend_measure_ineq, fiber_product, image_weights, lambda_tilde, verify_certificate, Certificate, ConstraintKind,
    FiberSpace, FinProbSpace, LinFeasProblem, MeasurableMap,
};
use randlab_core::randomizer::cformula::eval_cformula_with_events;
use randlab_core::randomizer::{
    approximate_by_simple, check_axioms, convex_combination, corpus, event_of, mu, parse_cformula, AxiomConfig, Event, EventAlgebra,
    RandomAssignment, Randomization, SimpleError,
};
use randlab_core::rational::{fmt_rational, parse_rational};
use randlab_core::rtype::{check_omega_categoricity, d_metric, realize, rtype_in, rtype_of, RMeasure};
use randlab_core::stability::{
    cb_rank_mult, check_independence, ladder_length, nonforking_extension, phi_type_space, rho, rho_both_row, rho_hat, FiberTypeSpace,
    PhiContext,
};
use randlab_core::Rational;

use crate::error::CliError;
use crate::workspace::{Object, RandDecl, Workspace};

/// Lines to print and whether any check failed.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub failed: bool,
}

impl Report {
    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, pass: bool, id: &str, detail: impl AsRef<str>) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        let detail = detail.as_ref();
        self.lines.push(if detail.is_empty() { format!("{verdict} {id}") } else { format!("{verdict} {id} {detail}") });
        self.failed |= !pass;
    }

    /// Adds the lines of a multi-line report.
    fn extend(&mut self, text: &str) {
        self.lines.extend(text.lines().map(str::to_string));
    }
}

fn list_vars(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// `0,1,2`; the empty string is the empty tuple.
pub fn parse_tuple(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Parse(format!("`{s}` is not an element index"))))
        .collect()
}

fn rational_arg(text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn join_rationals(v: &[Rational]) -> String {
    v.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// `a=b,c=d` pairs.
fn pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| CliError::Parse(format!("expected `name=value`, got `{p}`")))
        })
        .collect()
}

fn check_tuple(m: &FinStructure, t: &[usize], expected: usize, what: &str) -> Result<(), CliError> {
    if t.len() != expected {
        return Err(CliError::Resolution(format!("{what} needs {expected} element(s), got {}", t.len())));
    }
    if let Some(&e) = t.iter().find(|&&e| e >= m.size()) {
        return Err(CliError::Resolution(format!("element {e} is outside {}", m.name())));
    }
    Ok(())
}

fn constant_structure(rand: &Randomization) -> Result<FinStructure, CliError> {
    rand.constant_structure().cloned().ok_or_else(|| CliError::Resolution("the randomization is not over a single structure".into()))
}

fn require_workspace(path: Option<&Path>) -> Result<&Path, CliError> {
    path.ok_or_else(|| CliError::Resolution("--save needs --workspace".into()))
}

pub struct EvalArgs<'a> {
    pub rand: &'a str,
    pub cformula: &'a str,
    pub bind: &'a str,
    pub events: &'a str,
    pub budget: u128,
}

pub fn eval(ws: &Workspace, a: &EvalArgs) -> Result<Report, CliError> {
    let rand = ws.rand(a.rand)?;
    let phi = parse_cformula(a.cformula, rand.structure_at(0).signature())?;
    let mut assignment = RandomAssignment::new();
    for (var, name) in pairs(a.bind)? {
        assignment.insert(var, ws.element(&name, &rand)?);
    }
    let mut events: BTreeMap<String, Event> = BTreeMap::new();
    for (var, name) in pairs(a.events)? {
        events.insert(var, ws.event(&name, rand.len())?);
    }
    let value = eval_cformula_with_events(&rand, &phi, &assignment, &events, a.budget)?;
    let mut r = Report::default();
    r.line(fmt_rational(&value));
    Ok(r)
}

pub fn check_axioms_cmd(ws: &Workspace, rand: &str, samples: usize, seed: u64) -> Result<Report, CliError> {
    let rand = ws.rand(rand)?;
    let report = check_axioms(&rand, &AxiomConfig { samples, seed, ..AxiomConfig::default() });
    let mut r = Report::default();
    r.extend(&report.to_string());
    r.failed = !report.all_pass();
    Ok(r)
}

/// `ν({q : φ ∈ q}) = μ⟦φ(f̄)⟧` for the type of `f̄` and every corpus formula
/// in its variables.
pub fn check_types(ws: &Workspace, rand: &str, tuple: &str) -> Result<Report, CliError> {
    let rand = ws.rand(rand)?;
    let fs = ws.elements(tuple, &rand)?;
    if fs.is_empty() {
        return Err(CliError::Resolution("--tuple is empty".into()));
    }
    let m = constant_structure(&rand)?;
    let vars = default_vars(fs.len());
    let nu = rtype_of(&rand, &fs, &[])?;
    let args: RandomAssignment = vars.iter().cloned().zip(fs.iter().cloned()).collect();
    let mut r = Report::default();
    let mut checked = 0;
    let mut bad = 0;
    for phi in corpus::formulas(m.signature()) {
        if !phi.free_vars().iter().all(|v| vars.contains(v)) {
            continue;
        }
        let lhs = nu.mass_of(&phi, &vars)?;
        let rhs = mu(&rand, &event_of(&rand, &phi, &args)?);
        checked += 1;
        if lhs != rhs {
            bad += 1;
            r.check(false, "types-as-measures", format!("`{phi}` nu={} mu={}", fmt_rational(&lhs), fmt_rational(&rhs)));
        }
    }
    r.check(bad == 0, "types-as-measures", format!("checked={checked} type={nu}"));
    Ok(r)
}

pub fn check_categoricity(ws: &Workspace, structure: &str, n: usize) -> Result<Report, CliError> {
    let m = ws.structure(structure)?;
    let report = check_omega_categoricity(&m, n);
    let mut r = Report::default();
    r.extend(&report.to_string());
    r.failed = !report.pass();
    Ok(r)
}

pub struct PhiArgs<'a> {
    pub structure: &'a str,
    pub phi: &'a str,
    pub x: &'a str,
    pub y: &'a str,
    pub w: &'a str,
    pub params: &'a str,
}

fn phi_context(ws: &Workspace, a: &PhiArgs) -> Result<PhiContext, CliError> {
    let m = Arc::new(ws.structure(a.structure)?);
    let phi = parse_formula(a.phi, m.signature())?;
    let (x, y, w) = (list_vars(a.x), list_vars(a.y), list_vars(a.w));
    let params = parse_tuple(a.params)?;
    check_tuple(&m, &params, w.len(), "--params")?;
    let (x, y, w) = (refs(&x), refs(&y), refs(&w));
    Ok(PhiContext::new(m, phi, &x, &y, &w, &params)?)
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn x_space(ctx: &PhiContext) -> TypeSpace {
    type_space_shared(ctx.shared_structure().clone(), ctx.x_vars().len(), ctx.params())
}

/// Finite ladders, the φ-type count, the CB rank of the whole space and the
/// agreement of both computations of ρ.
pub fn check_stability(ws: &Workspace, a: &PhiArgs) -> Result<Report, CliError> {
    let ctx = phi_context(ws, a)?;
    let m = ctx.structure();
    let x_count = m.size().pow(ctx.x_vars().len() as u32);
    let mut r = Report::default();
    let len = ladder_length(&ctx, x_count + 1);
    r.check(len <= x_count, "ladder", format!("length={len}"));
    r.check(true, "phi-types", format!("count={}", phi_type_space(&ctx).len()));
    let cb = cb_rank_mult(&ctx, &Formula::True)?;
    r.check(true, "cb-rank", format!("{cb}"));
    let sp = x_space(&ctx);
    let mut cases = 0;
    for p in sp.ids() {
        for (j, (frac, ratio)) in rho_both_row(&ctx, &sp, p)?.into_iter().enumerate() {
            cases += 1;
            if frac != ratio {
                let b = ctx.y_tuple(j);
                r.check(false, "rho-consistency", format!("p=q{} b=[{}] fraction={} ratio={}", p.0, join(&b), fmt_rational(&frac), fmt_rational(&ratio)));
            }
        }
    }
    if !r.failed {
        r.check(true, "rho-consistency", format!("cases={cases}"));
    }
    Ok(r)
}

pub fn check_independence_cmd(ws: &Workspace, rand: &str, c: &str, b: &str, a: &str, depth: Option<usize>) -> Result<Report, CliError> {
    let rand = ws.rand(rand)?;
    let (c, b, a) = (ws.elements(c, &rand)?, ws.elements(b, &rand)?, ws.elements(a, &rand)?);
    let verdict = check_independence(&rand, &c, &b, &a, depth)?;
    let mut r = Report::default();
    r.line(verdict.to_string());
    r.failed = !verdict.independent;
    Ok(r)
}

fn type_arg(space: &TypeSpace, text: &str) -> Result<TypeId, CliError> {
    if let Some(i) = text.strip_prefix('q').and_then(|d| d.parse::<usize>().ok()) {
        return if i < space.len() {
            Ok(TypeId(i))
        } else {
            Err(CliError::Resolution(format!("type q{i} does not exist; the space has {} types", space.len())))
        };
    }
    let t = parse_tuple(text)?;
    check_tuple(space.structure(), &t, space.arity(), "--p")?;
    Ok(space.type_of(&t))
}

pub struct RhoArgs<'a> {
    pub phi: PhiArgs<'a>,
    pub p: &'a str,
    pub b: Option<&'a str>,
    pub q: Option<&'a str>,
    pub rho_hat: bool,
    pub certify: bool,
}

pub fn rho_cmd(ws: &Workspace, a: &RhoArgs) -> Result<Report, CliError> {
    let ctx = phi_context(ws, &a.phi)?;
    let mut r = Report::default();
    if !a.rho_hat && !a.certify {
        let sp = x_space(&ctx);
        let p = type_arg(&sp, a.p)?;
        let b = parse_tuple(a.b.ok_or_else(|| CliError::Resolution("--b is required".into()))?)?;
        check_tuple(ctx.structure(), &b, ctx.y_vars().len(), "--b")?;
        r.line(fmt_rational(&rho(&ctx, &sp, p, &b)?));
        return Ok(r);
    }
    let p = ws.measure(a.p)?;
    let q = match (a.q, a.b) {
        (Some(name), _) => ws.measure(name)?,
        (None, Some(b)) if ctx.w_vars().is_empty() => {
            let b = parse_tuple(b)?;
            check_tuple(ctx.structure(), &b, ctx.y_vars().len(), "--b")?;
            let sy = Arc::new(type_space_shared(ctx.shared_structure().clone(), b.len(), &[]));
            let t = sy.type_of(&b);
            RMeasure::point_mass(sy, t)
        }
        _ => return Err(CliError::Resolution("--rho-hat needs --q, or --b when there are no parameter variables".into())),
    };
    if !a.certify {
        r.line(fmt_rational(&rho_hat(&ctx, &p, &q)?));
        return Ok(r);
    }
    let ext = nonforking_extension(&ctx, &p, &q)?;
    let solved = ext.certificate.is_feasible();
    r.line(if solved { "FEASIBLE" } else { "INFEASIBLE" });
    r.line(certificate_line(&ext.certificate));
    r.line(format!("extension {}", ext.measure));
    r.line(format!("rho_hat {}", fmt_rational(&ext.rho_hat)));
    r.check(ext.phi_value == ext.rho_hat, "phi-mass", format!("P[phi]={}", fmt_rational(&ext.phi_value)));
    r.check(ext.certified, "certificate", "verifies");
    r.check(ext.positive, "positivity", "");
    Ok(r)
}

fn certificate_line(c: &Certificate) -> String {
    match c {
        Certificate::Feasible(w) => format!("witness [{}]", join_rationals(w)),
        Certificate::Infeasible { coefficients, bound } => format!("certificate m=[{}] n={bound}", join(coefficients)),
    }
}

pub fn realize_cmd(ws: &mut Workspace, path: Option<&Path>, rand: &str, measure: &str, save: Option<&str>) -> Result<Report, CliError> {
    let r0 = ws.rand(rand)?;
    let m = constant_structure(&r0)?;
    let nu = ws.measure(measure)?;
    if !nu.space().params().is_empty() {
        return Err(CliError::Resolution("realize needs a type over the empty set".into()));
    }
    let real = realize(&r0, &nu)?;
    let mut r = Report::default();
    r.line(format!("base [{}]", join_rationals(real.rand.base().weights())));
    r.line(format!("projection [{}]", join(real.projection.targets())));
    for (i, f) in real.elements.iter().enumerate() {
        r.line(format!("f{} {f}", i + 1));
    }
    let back = rtype_in(&real.rand, &real.elements, nu.space().clone())?;
    r.check(back == nu, "realize", "type of the tuple equals the measure");
    if let Some(name) = save {
        let path = require_workspace(path)?;
        let base = format!("{name}_base");
        ws.insert(base.clone(), Object::Space(real.rand.base().weights().to_vec()))?;
        ws.insert(name.to_string(), Object::Rand(RandDecl { structures: vec![m.name().to_string()], family: false, base }))?;
        for (i, f) in real.elements.iter().enumerate() {
            ws.insert(format!("{name}_f{}", i + 1), Object::Element(f.0.clone()))?;
        }
        ws.save(path)?;
    }
    Ok(r)
}

pub fn dmetric_cmd(ws: &Workspace, a: &str, b: &str) -> Result<Report, CliError> {
    let mut r = Report::default();
    r.line(fmt_rational(&d_metric(&ws.measure(a)?, &ws.measure(b)?)?));
    Ok(r)
}

/// `p ⊗_{S_W} q` over the supports, with `W` the last `w` coordinates.
pub fn fiber_cmd(ws: &Workspace, p: &str, q: &str, w: usize) -> Result<Report, CliError> {
    let (p, q) = (ws.measure(p)?, ws.measure(q)?);
    let fts = FiberTypeSpace::new(p.space().clone(), q.space().clone(), w)?;
    let (sp, sq) = (p.support(), q.support());
    let restrict = |supp: &[TypeId], pi: &MeasurableMap| MeasurableMap::new(supp.iter().map(|t| pi.apply(t.0)).collect(), pi.codomain_len());
    let mu = FinProbSpace::new(sp.clone(), sp.iter().map(|t| p.weight(*t).clone()).collect())?;
    let nu = FinProbSpace::new(sq.clone(), sq.iter().map(|t| q.weight(*t).clone()).collect())?;
    let fib = FiberSpace::new(restrict(&sp, fts.fiber.pi_x())?, restrict(&sq, fts.fiber.pi_y())?)?;
    let prod = fiber_product(&mu, &nu, &fib)?;
    let mut r = Report::default();
    for (k, &(i, j)) in fib.pairs().iter().enumerate() {
        r.line(format!("(q{}, q{}) {}", sp[i].0, sq[j].0, fmt_rational(prod.weight(k))));
    }
    let left = image_weights(&prod, &fib.projection(true))? == mu.weights();
    let right = image_weights(&prod, &fib.projection(false))? == nu.weights();
    r.check(left && right, "marginals", "");
    Ok(r)
}

pub fn extend_cmd(problem: &Path, lambda: Option<&str>) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(problem).map_err(|e| CliError::Resolution(format!("cannot read {}: {e}", problem.display())))?;
    let prob = LinFeasProblem::parse(&text)?;
    let kinds: Vec<ConstraintKind> = prob.constraints().iter().map(|c| c.kind).collect();
    let (solved, cert) = if kinds.iter().all(|&k| k == ConstraintKind::AtMost) {
        let cert = extend_measure_ineq(&prob)?;
        (prob.clone(), cert)
    } else if kinds.iter().all(|&k| k == ConstraintKind::Exactly) {
        extend_measure_eq(&prob)?
    } else {
        return Err(CliError::Resolution("constraints mix `<=` and `=`".into()));
    };
    let mut r = Report::default();
    r.line(if cert.is_feasible() { "FEASIBLE" } else { "INFEASIBLE" });
    r.line(certificate_line(&cert));
    r.check(verify_certificate(&solved, &cert), "certificate", "verifies");
    if let Some(psi) = lambda {
        let psi = psi.split(',').map(|s| rational_arg(s.trim())).collect::<Result<Vec<_>, _>>()?;
        if psi.len() != prob.ground() {
            return Err(CliError::Resolution(format!("--lambda-tilde lists {} values, the ground set has {}", psi.len(), prob.ground())));
        }
        match lambda_tilde(&prob, &psi) {
            Some(v) => r.line(format!("lambda_tilde {}", fmt_rational(&v))),
            None => r.line("lambda_tilde none"),
        }
    }
    Ok(r)
}

pub fn convex_cmd(ws: &mut Workspace, path: Option<&Path>, parts: &str, save: Option<&str>) -> Result<Report, CliError> {
    let mut resolved = Vec::new();
    for part in parts.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (w, name) = part.split_once(':').ok_or_else(|| CliError::Parse(format!("expected `weight:rand`, got `{part}`")))?;
        resolved.push((rational_arg(w)?, ws.rand(name.trim())?));
    }
    let cc = convex_combination(&resolved)?;
    let mut r = Report::default();
    r.line(format!("base [{}]", join_rationals(cc.rand.base().weights())));
    for i in 0..cc.parts() {
        let range = cc.range(i);
        r.line(format!("part {i} points {}..{}", range.start, range.end));
    }
    let report = check_axioms(&cc.rand, &AxiomConfig::default());
    r.extend(&report.to_string());
    r.failed = !report.exact_pass();
    if let Some(name) = save {
        let path = require_workspace(path)?;
        let base = format!("{name}_base");
        let structures: Vec<String> = (0..cc.rand.len()).map(|w| cc.rand.structure_at(w).name().to_string()).collect();
        ws.insert(base.clone(), Object::Space(cc.rand.base().weights().to_vec()))?;
        ws.insert(name.to_string(), Object::Rand(RandDecl { structures, family: true, base }))?;
        ws.save(path)?;
    }
    Ok(r)
}

fn algebra_arg(ws: &Workspace, text: &str, len: usize) -> Result<EventAlgebra, CliError> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "discrete" => Ok(EventAlgebra::discrete(len)),
        "trivial" => Ok(EventAlgebra::trivial(len)),
        "dyadic" => {
            let level: u32 = rest.trim().parse().map_err(|_| CliError::Parse(format!("bad dyadic level `{rest}`")))?;
            if !len.is_power_of_two() {
                return Err(CliError::Resolution(format!("a dyadic algebra needs 2^k base points, the base has {len}")));
            }
            Ok(EventAlgebra::dyadic_level(len.trailing_zeros(), level))
        }
        "atoms" => {
            let atoms = rest
                .split(';')
                .map(|a| parse_tuple(a).and_then(|idx| check_points(&idx, len).map(|_| Event::from_indices(len, &idx))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(EventAlgebra::from_atoms(atoms)?)
        }
        "generated" => {
            let gens = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|e| ws.event(e, len)).collect::<Result<Vec<_>, _>>()?;
            Ok(EventAlgebra::generated_by(len, &gens))
        }
        _ => Err(CliError::Parse(format!("unknown algebra `{text}`; use discrete, trivial, dyadic:L, atoms:0,1;2,3 or generated:E,F"))),
    }
}

fn check_points(idx: &[usize], len: usize) -> Result<(), CliError> {
    match idx.iter().find(|&&i| i >= len) {
        Some(i) => Err(CliError::Resolution(format!("point {i} is outside a base of {len} points"))),
        None => Ok(()),
    }
}

pub struct ApproxArgs<'a> {
    pub rand: &'a str,
    pub f: &'a str,
    pub eps: &'a str,
    pub algebra: &'a str,
    pub save: Option<&'a str>,
}

pub fn approx_cmd(ws: &mut Workspace, path: Option<&Path>, a: &ApproxArgs) -> Result<Report, CliError> {
    let rand = ws.rand(a.rand)?;
    let f = ws.element(a.f, &rand)?;
    let eps = rational_arg(a.eps)?;
    let alg = algebra_arg(ws, a.algebra, rand.len())?;
    let mut r = Report::default();
    match approximate_by_simple(&rand, &f, &alg, &eps) {
        Ok(s) => {
            r.extend(&s.to_string());
            r.check(s.d_k < eps, "approx", format!("d_K={} eps={}", fmt_rational(&s.d_k), fmt_rational(&eps)));
            if let Some(name) = a.save {
                let path = require_workspace(path)?;
                ws.insert(name.to_string(), Object::Element(s.g.0.clone()))?;
                ws.save(path)?;
            }
        }
        Err(e @ SimpleError::BoundMissed { .. }) => r.check(false, "approx", e.to_string()),
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

pub fn types_cmd(ws: &Workspace, structure: &str, n: usize, params: &str, formulas: bool) -> Result<Report, CliError> {
    let m = Arc::new(ws.structure(structure)?);
    let params = parse_tuple(params)?;
    check_tuple(&m, &params, params.len(), "--params")?;
    let sp = type_space_shared(m, n, &params);
    let vars = default_vars(n);
    let mut r = Report::default();
    r.line(format!("{} types", sp.len()));
    for t in sp.ids() {
        let mut line = format!("q{} [{}] orbit={}", t.0, join(sp.representative(t)), sp.orbit_size(t));
        if formulas {
            line.push_str(&format!(" : {}", isolating_formula_in(&sp, t, &vars)));
        }
        r.line(line);
    }
    Ok(r)
}
