use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const COIN: &str = "\
space coin = [1/2, 1/2]
rand r = M2 over coin
rand r1 = M2 over coin
elem f = [0, 1]
elem g = [0, 0]
measure p = M2^1 rtype { q0: 1 }
measure nu = M2^2 rtype { q0: 1/3, q1: 2/3 }
measure mu2 = M2^2 rtype { q0: 1/2, q1: 1/2 }
";

const ORDER: &str = "\
rand lr = L3 over uniform4
elem f = [0, 1, 2, 2]
measure p = L3^1 rtype { q0: 1/4, q1: 1/4, q2: 1/2 }
";

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn randlab(ws: Option<&Path>, args: &[&str]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_randlab"));
    if let Some(p) = ws {
        cmd.arg("--workspace").arg(p);
    }
    let out = cmd.args(args).output().expect("binary runs");
    Out {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn workspace(text: &str) -> (TempDir, std::path::PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ws.txt");
    std::fs::write(&path, text).unwrap();
    (dir, path)
}

#[test]
fn rho_on_m2() {
    let out = randlab(None, &["rho", "--structure", "m2", "--phi", "x=y", "--p", "q0", "--b", "0"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "1/2\n"));
    let by_tuple = randlab(None, &["rho", "--structure", "m2", "--phi", "x=y", "--p", "1", "--b", "0"]);
    assert_eq!(by_tuple.stdout, "1/2\n");
}

#[test]
fn eval_matches_distance_example() {
    let (_d, ws) = workspace(COIN);
    let out = randlab(Some(&ws), &["eval", "--rand", "r1", "--cformula", "mu[[ x = y ]]", "--bind", "x=f,y=g"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "1/2\n"));
    let dk = randlab(Some(&ws), &["eval", "--rand", "r1", "--cformula", "dK(x, y)", "--bind", "x=f,y=g"]);
    assert_eq!(dk.stdout, "1/2\n");
}

#[test]
fn eval_sentence_of_the_theory_is_one() {
    let out = randlab(None, &["eval", "--rand", "c3x4", "--cformula", "mu[[ forall x exists y E(x,y) ]]"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "1/1\n"));
}

#[test]
fn axioms_on_dyadic_m2() {
    let out = randlab(None, &["check", "axioms", "--rand", "m2x8"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.lines().all(|l| l.starts_with("PASS ")));
    assert!(out.stdout.contains("Atomless defect=1/16"));
}

#[test]
fn axioms_fail_atomless_on_odd_base() {
    let (_d, ws) = workspace("space odd = [1/2, 1/3, 1/6]\nrand r = M2 over odd\n");
    let out = randlab(Some(&ws), &["check", "axioms", "--rand", "r"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("FAIL Atomless"));
    assert!(out.stdout.contains("PASS Fullness"));
}

#[test]
fn independence_coin_witness() {
    let (_d, ws) = workspace(COIN);
    let out = randlab(Some(&ws), &["check", "independence", "--rand", "r", "--c", "f", "--b", "f", "--A", ""]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("FAIL independence witness `x=y`"), "{}", out.stdout);
    let over = randlab(Some(&ws), &["check", "independence", "--rand", "r", "--c", "f", "--b", "f", "--A", "f"]);
    assert_eq!(over.code, 0, "{}", over.stdout);
    assert!(over.stdout.starts_with("PASS independence"));
}

#[test]
fn empty_workspace_does_not_resolve() {
    let (_d, ws) = workspace("");
    let out = randlab(Some(&ws), &["check", "axioms", "--rand", "r"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("no randomization named `r`"));
}

#[test]
fn misspelled_names_exit_2() {
    let (_d, ws) = workspace(COIN);
    let out = randlab(Some(&ws), &["eval", "--rand", "r1", "--cformula", "mu[[ x = y ]]", "--bind", "x=ff,y=g"]);
    assert_eq!(out.code, 2);
    assert_eq!(randlab(None, &["types", "--structure", "m3"]).code, 2);
}

#[test]
fn parse_errors_exit_3() {
    let (_d, ws) = workspace(COIN);
    assert_eq!(randlab(Some(&ws), &["eval", "--rand", "r", "--cformula", "mu[[ x = ]]", "--bind", "x=f"]).code, 3);
    assert_eq!(randlab(None, &["rho", "--structure", "m2", "--phi", "x=", "--p", "q0", "--b", "0"]).code, 3);
    let (_e, bad) = workspace("space s = [1/2, 1/3]\n");
    assert_eq!(randlab(Some(&bad), &["check", "axioms", "--rand", "m2x2"]).code, 3);
}

#[test]
fn budget_exit_4() {
    let (_d, ws) = workspace(COIN);
    let args = ["eval", "--rand", "r", "--cformula", "sup x (mu[[ x = y ]])", "--bind", "y=f"];
    let out = randlab(Some(&ws), &[&args[..], &["--budget", "3"]].concat());
    assert_eq!(out.code, 4);
    assert_eq!(randlab(Some(&ws), &args).stdout, "1/1\n");
}

#[test]
fn rho_hat_with_deterministic_b_is_the_definition() {
    let (_d, ws) = workspace(ORDER);
    for b in 0..3 {
        let b = b.to_string();
        let hat = randlab(Some(&ws), &["rho", "--structure", "l3", "--phi", "x<y", "--p", "p", "--b", &b, "--rho-hat"]);
        let bind = format!("x=f,y=#{b}");
        let direct = randlab(Some(&ws), &["eval", "--rand", "lr", "--cformula", "P[ x<y ]", "--bind", &bind]);
        assert_eq!(hat.code, 0, "{}", hat.stderr);
        assert_eq!(hat.stdout, direct.stdout);
    }
}

#[test]
fn certify_is_feasible() {
    let (_d, ws) = workspace(ORDER);
    let out = randlab(Some(&ws), &["rho", "--structure", "l3", "--phi", "x<y", "--p", "p", "--q", "p", "--certify"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.starts_with("FEASIBLE\nwitness ["));
    assert!(out.stdout.contains("PASS certificate"));
}

#[test]
fn stability_suite() {
    let out = randlab(None, &["check", "stability", "--structure", "l3", "--phi", "x<y"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("PASS ladder length=3"));
    assert!(out.stdout.contains("PASS cb-rank (0, 3)"));
    let w = randlab(None, &["check", "stability", "--structure", "c3", "--phi", "E(x,y) | E(y,w)", "--w", "w", "--params", "0"]);
    assert_eq!(w.code, 0, "{}{}", w.stdout, w.stderr);
}

#[test]
fn types_and_categoricity() {
    let out = randlab(None, &["types", "--structure", "c3", "--n", "2"]);
    assert!(out.stdout.starts_with("3 types\n"));
    let cat = randlab(None, &["check", "categoricity", "--structure", "m2", "--n", "2"]);
    assert_eq!(cat.code, 0);
    assert!(cat.stdout.contains("PASS omega-categorical"));
}

#[test]
fn dmetric_and_decimal() {
    let (_d, ws) = workspace(COIN);
    assert_eq!(randlab(Some(&ws), &["dmetric", "nu", "mu2"]).stdout, "1/6\n");
    let dec = randlab(Some(&ws), &["--decimal", "3", "dmetric", "nu", "mu2"]);
    assert_eq!((dec.code, dec.stdout.as_str()), (0, "0.167\n"));
    let fail = randlab(Some(&ws), &["--decimal", "2", "check", "independence", "--rand", "r", "--c", "f", "--b", "f"]);
    assert_eq!(fail.code, 1);
    assert!(fail.stdout.contains("rho_hat=0.50"));
}

#[test]
fn fiber_marginals() {
    let (_d, ws) = workspace(COIN);
    let out = randlab(Some(&ws), &["fiber", "--p", "nu", "--q", "mu2", "--w", "1"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().last(), Some("PASS marginals"));
}

#[test]
fn extend_certificates() {
    let dir = TempDir::new().unwrap();
    let ok = dir.path().join("ok.lfp");
    std::fs::write(&ok, "<= 1/2 : 1,0\n<= 1/2 : 0,1\n").unwrap();
    let out = randlab(None, &["extend", "--problem", ok.to_str().unwrap(), "--lambda-tilde", "1,0"]);
    assert_eq!(out.stdout, "FEASIBLE\nwitness [1/2, 1/2]\nPASS certificate verifies\nlambda_tilde 1/2\n");
    let bad = dir.path().join("bad.lfp");
    std::fs::write(&bad, "<= 1/3 : 1,0\n<= 1/3 : 0,1\n").unwrap();
    let out = randlab(None, &["extend", "--problem", bad.to_str().unwrap()]);
    assert!(out.stdout.starts_with("INFEASIBLE\ncertificate m=["));
    assert!(out.stdout.contains("PASS certificate verifies"));
}

#[test]
fn approx_simple() {
    let out = randlab(None, &["approx-simple", "--rand", "m2x4", "--f", "#1", "--eps", "1/2", "--algebra", "dyadic:1"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("PASS approx d_K=0/1"));
}

#[test]
fn realize_and_convex_save_round_trip() {
    let (_d, ws) = workspace(COIN);
    let out = randlab(Some(&ws), &["realize", "--rand", "r", "--measure", "nu", "--save", "real"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let types = randlab(Some(&ws), &["check", "types", "--rand", "real", "--tuple", "real_f1,real_f2"]);
    assert_eq!(types.code, 0);
    assert!(types.stdout.contains("type=rtype { q0: 1/3, q1: 2/3 }"));
    let mix = randlab(Some(&ws), &["convex", "--parts", "1/3:r,2/3:real", "--save", "mix"]);
    assert_eq!(mix.code, 0, "{}", mix.stdout);
    let saved = std::fs::read_to_string(&ws).unwrap();
    assert!(saved.contains("rand mix = family [M2, M2, M2, M2, M2] over mix_base"));
    let again = randlab(Some(&ws), &["check", "axioms", "--rand", "mix"]);
    assert!(again.stdout.contains("PASS Measure"));
    let dup = randlab(Some(&ws), &["realize", "--rand", "r", "--measure", "nu", "--save", "real"]);
    assert_ne!(dup.code, 0);
    assert_eq!(std::fs::read_to_string(&ws).unwrap(), saved);
}

#[test]
fn output_is_deterministic() {
    let (_d, ws) = workspace(COIN);
    let args = ["check", "independence", "--rand", "r", "--c", "f", "--b", "g"];
    let a = randlab(Some(&ws), &args);
    let b = randlab(Some(&ws), &args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.code, b.code);
}
