use std::path::Path;
use std::process::{Command, Output};

use omega_cfl::fsa::infinitely_many_ones;
use omega_cfl::grammar::zeros_then_one;

fn omega(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omega")).args(args).output().expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_lasso_on_ones_acceptor() {
    let d = tempfile::tempdir().unwrap();
    let m = put(d.path(), "ones.ba", &infinitely_many_ones().to_text());
    let o = omega(&["check-lasso", "--machine", &m, "--word", "(01)^w"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("ACCEPT\nrun: "), "{out}");
    let o = omega(&["check-lasso", "--machine", &m, "--word", "1(0)^w"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "REJECT\n");
}

#[test]
fn check_lasso_on_pushdown_machine() {
    let d = tempfile::tempdir().unwrap();
    let text = "states: p q\nalphabet: a b\nstack: Z0 X\ninitial: p\nstartstack: Z0\nfinal: q\n\
                trans: p a Z0 -> p push(X Z0)\ntrans: p a X -> p push(X X)\ntrans: p b X -> q push()\n\
                trans: q b X -> q push()\ntrans: q a Z0 -> p push(X Z0)\n";
    let m = put(d.path(), "anbn.pda", text);
    let o = omega(&["check-lasso", "--machine", &m, "--word", "(aabb)^w"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "ACCEPT\n"));
    let o = omega(&["check-lasso", "--machine", &m, "--word", "(aab)^w"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(1), "REJECT\n"));
}

#[test]
fn muller_pushdown_lasso_is_unsupported() {
    let d = tempfile::tempdir().unwrap();
    let text = "states: p\nalphabet: 0\nstack: Z0\ninitial: p\nstartstack: Z0\ntable: p\ntrans: p 0 Z0 -> p push(Z0)\n";
    let m = put(d.path(), "m.pda", text);
    assert_eq!(omega(&["check-lasso", "--machine", &m, "--word", "(0)^w"]).status.code(), Some(2));
}

#[test]
fn code_tree_of_constant_tree() {
    let d = tempfile::tempdir().unwrap();
    let t = put(d.path(), "a.tree", "labels: a\nnodes: s\ninitial: s\nnode: s label a left s right s\n");
    let o = omega(&["code-tree", "--tree", &t, "--levels", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "a.A.a.a.A.a.a.a.a.A.a.a.a.a.a.a.a.a.A");
}

#[test]
fn verify_report_is_reproducible() {
    let a = omega(&["verify", "--suite", "coding", "--seed", "7"]);
    let b = omega(&["verify", "--suite", "coding", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("suite coding seed 7\n"));
    assert!(out.lines().skip(1).all(|l| l.starts_with("PASS ")), "{out}");
}

#[test]
fn malformed_inputs_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let bad = put(d.path(), "bad.ba", "states: p\nalphabet: 0\ninitial: r\nfinal: p\n");
    assert_eq!(omega(&["check-lasso", "--machine", &bad, "--word", "(0)^w"]).status.code(), Some(2));
    let m = put(d.path(), "ones.ba", &infinitely_many_ones().to_text());
    assert_eq!(omega(&["check-lasso", "--machine", &m, "--word", "(2)^w"]).status.code(), Some(2));
    assert_eq!(omega(&["check-lasso", "--machine", &m, "--word", "01"]).status.code(), Some(2));
    assert_eq!(omega(&["build-bar", "--machine", &m, "--separator", "1", "--out", "x"]).status.code(), Some(2));
    assert_eq!(omega(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn lambda_image_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let g = put(d.path(), "w.cfg", &zeros_then_one().to_text());
    let expr = d.path().join("w.expr").display().to_string();
    assert_eq!(omega(&["omega-power", "--grammar", &g, "--out", &expr]).status.code(), Some(0));
    let s = put(d.path(), "erase.subst", "source: 0 1\ntarget: 0 1\nmap: 0 -> #\nmap: 1 -> 1\n");
    let out = d.path().join("img.expr").display().to_string();
    let o = omega(&["substitute", "--expr", &expr, "--subst", &s, "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("λ-free"));
}

#[test]
fn omega_power_of_lambda_only_grammar_fails() {
    let d = tempfile::tempdir().unwrap();
    let g = put(d.path(), "l.cfg", "terminals: 0\nnonterminals: S\nS -> #\n");
    let out = d.path().join("l.expr").display().to_string();
    assert_eq!(omega(&["omega-power", "--grammar", &g, "--out", &out]).status.code(), Some(2));
}

#[test]
fn build_bar_writes_sidecar() {
    let d = tempfile::tempdir().unwrap();
    let m = put(d.path(), "ones.ba", &infinitely_many_ones().to_text());
    let out = d.path().join("bar.pda").display().to_string();
    let o = omega(&["build-bar", "--machine", &m, "--separator", "A", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let side = std::fs::read_to_string(format!("{out}.provenance")).unwrap();
    let groups: std::collections::BTreeSet<&str> = side.lines().map(|l| l.split(' ').next().unwrap()).collect();
    // no λ-moves in the base machine, so (m) and (n) are empty
    assert_eq!(groups.len(), 17);
    assert!(!groups.contains("m") && !groups.contains("n"));
    assert!(side.lines().any(|l| l == "b q0 A Z0 -> q_r push(Z0)"), "{side}");
}
