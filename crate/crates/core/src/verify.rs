//! Seeded property suites cross-checking the constructions against the
//! independent procedures in [`crate::oracle`]. Every suite is a pure
//! function of its seed; cases run in parallel and are merged by index.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bar::{bar_as_substitution_expr, bar_language_expr, BarMachine, StateOrigin};
use crate::error::Result;
use crate::fsa::{infinitely_many_ones, BuchiAutomaton, Fsm};
use crate::grammar::{branch_insertion, zeros_ones_balanced, zeros_then_one};
use crate::kleene::{omega_power, OmegaKleeneExpr, Verdict};
use crate::oracle::{self, NamedRule};
use crate::pda::{Bpda, BuchiPds, Pdm, PdsRule, Rule};
use crate::tree::{coding_complement_expr, f_embed, j_leftmost, level_homogeneous_tree, level_nodes, Order, RegularTree};
use crate::words::{sym, Alphabet, Lasso, Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Coding,
    Complement,
    Bar,
    Kc,
    Emptiness,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Coding => "coding",
            Suite::Complement => "complement",
            Suite::Bar => "bar",
            Suite::Kc => "kc",
            Suite::Emptiness => "emptiness",
        };
        f.write_str(name)
    }
}

/// The outcome of one property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failures: &[String], summary: String) -> Check {
        let detail = match failures.first() {
            None => summary,
            Some(first) => format!("{summary}; {} failing, first: {first}", failures.len()),
        };
        Check { name, passed: failures.is_empty(), detail }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("suite {} seed {}\n", self.suite, self.seed);
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
        out
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Report> {
    let checks = match suite {
        Suite::Coding => vec![coding_structure(seed)?, level_order_identity(), embed_round_trip(seed)?],
        Suite::Complement => vec![complement_lemma(seed)?],
        Suite::Bar => vec![
            bar_structure(seed)?,
            two_descriptions(seed)?,
            bar_language(seed)?,
            path_correspondence(seed)?,
        ],
        Suite::Kc => vec![kc_conversion(seed)?, omega_power_image(seed)?],
        Suite::Emptiness => vec![pds_emptiness(seed)?],
    };
    Ok(Report { suite, seed, checks })
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn symbols(tokens: &str) -> Vec<Symbol> {
    tokens.split_whitespace().map(sym).collect()
}

pub fn random_word(r: &mut impl Rng, letters: &[Symbol], len: usize) -> Word {
    (0..len).map(|_| letters.choose(r).expect("letters").clone()).collect()
}

/// A lasso with `|u| ≤ max_u` and `1 ≤ |v| ≤ max_v`.
pub fn random_lasso(r: &mut impl Rng, letters: &[Symbol], max_u: usize, max_v: usize) -> Lasso {
    let u = r.gen_range(0..=max_u);
    let v = r.gen_range(1..=max_v);
    Lasso::new(random_word(r, letters, u), random_word(r, letters, v)).expect("non-empty cycle")
}

/// A regular tree with `1..=max_states` node-states over `1..=max_labels`
/// of `a b c`.
pub fn random_tree(r: &mut impl Rng, max_states: usize, max_labels: usize) -> Result<RegularTree> {
    let n = r.gen_range(1..=max_states);
    let k = r.gen_range(1..=max_labels);
    let labels = Alphabet::new(symbols("a b c")[..k].to_vec())?;
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let nodes = (0..n).map(|_| (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..k))).collect();
    RegularTree::new(labels, names, 0, nodes)
}

/// A Büchi pushdown machine with up to 4 states, λ-moves and pushes of
/// length ≤ 2.
pub fn random_bpda(r: &mut impl Rng) -> Result<Bpda> {
    let n = r.gen_range(1..=4);
    let alphabet = Alphabet::new(if r.gen_bool(0.5) { symbols("0 1") } else { symbols("a b c") })?;
    let mut stack = vec!["Z0".to_string()];
    stack.extend(["X", "Y"].iter().take(r.gen_range(0..=2)).map(|s| s.to_string()));
    let count = r.gen_range(0..=10);
    let rules = (0..count)
        .map(|_| Rule {
            from: r.gen_range(0..n),
            input: if r.gen_bool(0.25) { None } else { Some(r.gen_range(0..alphabet.len())) },
            top: r.gen_range(0..stack.len()),
            to: r.gen_range(0..n),
            push: (0..r.gen_range(0..=2)).map(|_| r.gen_range(0..stack.len())).collect(),
        })
        .collect();
    let finals: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
    let states = (0..n).map(|i| format!("q{i}")).collect();
    Bpda::new(Pdm::new(states, alphabet, stack, 0, 0, rules)?, &finals)
}

/// A nondeterministic finite Büchi automaton over `{0, 1}`.
pub fn random_buchi(r: &mut impl Rng) -> Result<BuchiAutomaton> {
    let n = r.gen_range(1..=4);
    let alphabet = Alphabet::new(symbols("0 1"))?;
    let mut trans = Vec::new();
    for q in 0..n {
        for a in 0..2 {
            for p in 0..n {
                if r.gen_bool(0.4) {
                    trans.push((q, a, p));
                }
            }
        }
    }
    let states = (0..n).map(|i| format!("q{i}")).collect();
    let finals: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
    BuchiAutomaton::new(Fsm::new(states, alphabet, 0, &trans)?, &finals)
}

/// A one-counter system: stack `{Z0, E}` with `Z0` kept at the bottom.
pub fn random_one_counter(r: &mut impl Rng) -> Result<BuchiPds> {
    let n = r.gen_range(1..=4);
    let mut rules = Vec::new();
    for from in 0..n {
        for top in 0..2 {
            for _ in 0..r.gen_range(0..=2) {
                let push = if top == 0 {
                    [vec![0], vec![1, 0]].choose(r).expect("choices").clone()
                } else {
                    [vec![], vec![1], vec![1, 1]].choose(r).expect("choices").clone()
                };
                rules.push(PdsRule { from, top, to: r.gen_range(0..n), push, progress: r.gen_bool(0.8) });
            }
        }
    }
    let repeating = (0..n).map(|_| r.gen_bool(0.4)).collect();
    BuchiPds::new(n, 2, 0, 0, rules, repeating)
}

fn all_words(letters: &[Symbol], n: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|w| letters.iter().map(move |a| w.concat(&Word::from_symbols(vec![a.clone()]))))
            .collect();
    }
    out
}

/// Every normalized lasso with `|u| + |v| ≤ n`.
pub fn all_lassos(letters: &[Symbol], n: usize) -> Vec<Lasso> {
    let mut out = BTreeSet::new();
    for total in 1..=n {
        for v in 1..=total {
            for cycle in all_words(letters, v) {
                for spoke in all_words(letters, total - v) {
                    out.insert(Lasso::new(spoke, cycle.clone()).expect("non-empty cycle").normalize());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Prefix length searched by the factorization oracle.
pub fn oracle_bound(w: &Lasso) -> usize {
    4 * (w.spoke().len() + w.cycle().len()) + 16
}

fn word(text: &str) -> Word {
    Word::parse(text).expect("literal word")
}

fn lasso(text: &str) -> Lasso {
    Lasso::parse(text).expect("literal lasso")
}

/// Replaces one random letter of spoke or cycle.
fn mutate(r: &mut impl Rng, w: &Lasso, letters: &[Symbol]) -> Lasso {
    let mut spoke = w.spoke().symbols().to_vec();
    let mut cycle = w.cycle().symbols().to_vec();
    let i = r.gen_range(0..spoke.len() + cycle.len());
    let slot = if i < spoke.len() { &mut spoke[i] } else { &mut cycle[i - spoke.len()] };
    *slot = letters.choose(r).expect("letters").clone();
    Lasso::new(Word::from_symbols(spoke), Word::from_symbols(cycle)).expect("non-empty cycle")
}

/// Level-by-level agreement of `hPrefix` with the brute-force listing, and
/// the block shape `Σ^{2⁰}A … Σ^{2ᵏ}A`.
pub fn coding_structure(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 1);
    let sep = sym("A");
    let trees = (0..50).map(|_| random_tree(&mut r, 5, 3)).collect::<Result<Vec<_>>>()?;
    let failures: Vec<String> = trees
        .par_iter()
        .enumerate()
        .map(|(i, t)| -> Result<Vec<String>> {
            let mut bad = Vec::new();
            for k in 0..=12 {
                let h = t.h_prefix(k, &sep)?;
                if h != oracle::h_prefix_brute(t, k, &sep) {
                    bad.push(format!("tree {i} levels {k}: listing differs"));
                }
                let seps: Vec<usize> = (0..h.len()).filter(|&j| h.symbols()[j] == sep).collect();
                let expected: Vec<usize> = (0..=k).map(|n| (1usize << (n + 1)) - 1 + n).collect();
                if seps != expected || h.len() != (1 << (k + 1)) - 1 + k + 1 {
                    bad.push(format!("tree {i} levels {k}: block shape"));
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(Check::new("coding-structure", &failures, "50 trees, levels 0-12".into()))
}

/// `revlex[i] = lex[2ⁿ+1−i]` (1-based) for `n ≤ 10`.
pub fn level_order_identity() -> Check {
    let mut failures = Vec::new();
    for n in 0..=10 {
        let lex = level_nodes(n, Order::Lex).nodes;
        let rev = level_nodes(n, Order::RevLex).nodes;
        let size = 1usize << n;
        if lex.len() != size || rev.len() != size {
            failures.push(format!("level {n}: wrong size"));
            continue;
        }
        for i in 1..=size {
            if rev[i - 1] != lex[size + 1 - i - 1] {
                failures.push(format!("level {n} index {i}"));
            }
        }
    }
    Check::new("level-order-identity", &failures, "levels 0-10".into())
}

/// `jLeftmost ∘ fEmbed = normalize`.
pub fn embed_round_trip(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 10);
    let letters = symbols("a b");
    let sigma = Alphabet::new(letters.clone())?;
    let mut failures = Vec::new();
    for _ in 0..200 {
        let w = random_lasso(&mut r, &letters, 6, 6);
        if j_leftmost(&f_embed(&w, &sigma, &sym("A"))?) != w.normalize() {
            failures.push(w.to_string());
        }
    }
    Ok(Check::new("embed-round-trip", &failures, "200 lassos".into()))
}

/// Every lasso is accepted by the machine of the coding complement, and no
/// code prefix carries a complement witness.
pub fn complement_lemma(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 3);
    let sep = sym("A");
    let sigma = Alphabet::new(symbols("0 1"))?;
    let letters = symbols("0 1 A");
    let m = coding_complement_expr(&sigma, &sep)?.to_bpda()?;
    let mut lassos = all_lassos(&letters, 5);
    let exhaustive = lassos.len();
    lassos.extend((0..500).map(|_| random_lasso(&mut r, &letters, 8, 8)));
    let trees = (0..20)
        .map(|_| {
            let sigma_t = Alphabet::new(symbols("0 1"))?;
            let n = r.gen_range(1..=5);
            let names = (0..n).map(|i| format!("s{i}")).collect();
            let nodes = (0..n).map(|_| (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..2))).collect();
            RegularTree::new(sigma_t, names, 0, nodes)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures: Vec<String> = lassos
        .par_iter()
        .map(|w| m.accepts_lasso(w).map(|ok| (!ok).then(|| format!("lasso {w} rejected"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for (i, t) in trees.iter().enumerate() {
        let h = t.h_prefix(10, &sep)?;
        if oracle::has_a1_prefix(h.symbols(), &sep) || oracle::has_b_factor(h.symbols(), &sep) {
            failures.push(format!("tree {i}: witness in code prefix"));
        }
    }
    let summary = format!("{exhaustive} exhaustive + 500 random lassos accepted, 20 code prefixes clean");
    Ok(Check::new("complement-lemma", &failures, summary))
}

fn named_rules(bm: &BarMachine) -> BTreeSet<NamedRule> {
    let m = &bm.bpda.machine;
    let mut out = BTreeSet::new();
    for (r, tags) in m.rules().iter().zip(&bm.groups) {
        for &g in tags {
            out.insert((
                g,
                m.states()[r.from].clone(),
                r.input.map_or("#".to_string(), |a| m.alphabet().symbol(a).to_string()),
                m.stack_alphabet()[r.top].clone(),
                m.states()[r.to].clone(),
                r.push.iter().map(|&z| m.stack_alphabet()[z].clone()).collect(),
            ));
        }
    }
    out
}

fn bar_violations(base: &Bpda, finite: bool) -> Result<Vec<String>> {
    let bm = BarMachine::build(base, &sym("A"))?;
    let m = &bm.bpda.machine;
    let (k, f) = (base.machine.states().len(), base.finals().len());
    let mut bad = Vec::new();
    if m.states().len() != 6 * k + 1 {
        bad.push(format!("|K̄| = {} for |K| = {k}", m.states().len()));
    }
    if bm.bpda.finals().len() != 2 * f {
        bad.push(format!("|F̄| = {} for |F| = {f}", bm.bpda.finals().len()));
    }
    let e = &m.stack_alphabet()[bm.e_symbol];
    let mut gamma: Vec<String> = base.machine.stack_alphabet().to_vec();
    if gamma.contains(e) {
        bad.push("E not fresh".into());
    }
    gamma.push(e.clone());
    if m.stack_alphabet() != gamma.as_slice() {
        bad.push("Γ̄ ≠ Γ ∪ {E}".into());
    }
    if finite && m.stack_alphabet() != ["Z0", e.as_str()] {
        bad.push("finite input: Γ̄ ≠ {Z0, E}".into());
    }
    if bm.groups.iter().any(|g| g.len() != 1) {
        bad.push("rule without exactly one group tag".into());
    }
    if named_rules(&bm) != oracle::rederive_bar(base, "A", e) {
        bad.push("re-derived transition set differs".into());
    }
    let qr = bm.origins.iter().position(|o| *o == StateOrigin::Reject).expect("reject state");
    let escapes = m.rules().iter().zip(&bm.groups).any(|(r, g)| r.from == qr && (r.to != qr || !g.contains(&'k')));
    if escapes || bm.bpda.is_final(qr) {
        bad.push("reject state can leave its sink".into());
    }
    Ok(bad)
}

/// Sizes, stack alphabet and transition set of M̄.
pub fn bar_structure(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 4);
    let mut inputs: Vec<(Bpda, bool)> = (0..20).map(|_| random_bpda(&mut r).map(|m| (m, false))).collect::<Result<_>>()?;
    for _ in 0..10 {
        inputs.push((Bpda::from_buchi(&random_buchi(&mut r)?), true));
    }
    let failures: Vec<String> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, (m, finite))| bar_violations(m, *finite).map(|v| v.into_iter().map(|s| format!("input {i}: {s}")).collect()))
        .collect::<Result<Vec<Vec<String>>>>()?
        .concat();
    Ok(Check::new("bar-structure", &failures, "20 pushdown + 10 finite-state inputs".into()))
}

/// The `(0*·1)^ω` expression.
pub fn ones_expr() -> Result<OmegaKleeneExpr> {
    omega_power(&zeros_then_one())
}

/// M̄ of the expression's machine against the oracle on the substitution
/// image.
pub fn two_descriptions(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 5);
    let sep = sym("A");
    let e = ones_expr()?;
    let bm = BarMachine::build(&e.to_bpda()?, &sep)?;
    let image = bar_as_substitution_expr(&e, &sep)?;
    let letters = symbols("0 1 A");
    let lassos: Vec<Lasso> = (0..200).map(|_| random_lasso(&mut r, &letters, 6, 6)).collect();
    let outcomes = lassos
        .par_iter()
        .map(|w| -> Result<Option<(bool, bool)>> {
            let verdict = image.lasso_oracle(w, oracle_bound(w))?;
            if verdict == Verdict::Unknown {
                return Ok(None);
            }
            Ok(Some((bm.bpda.accepts_lasso(w)?, verdict == Verdict::Yes)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let (mut conclusive, mut accepted) = (0, 0);
    for (w, o) in lassos.iter().zip(&outcomes) {
        let Some((machine, expected)) = o else { continue };
        conclusive += 1;
        accepted += usize::from(*expected);
        if machine != expected {
            failures.push(format!("{w}: machine {machine}, oracle {expected}"));
        }
    }
    if conclusive < 150 {
        failures.push(format!("only {conclusive} conclusive cases"));
    }
    let summary = format!("{conclusive}/200 conclusive, {accepted} in the image");
    Ok(Check::new("two-descriptions", &failures, summary))
}

/// M̄ against the oracle for `g(e) ∪ D·g(e)`, on the lassos of
/// [`two_descriptions`] and on lassos built from inserted blocks.
pub fn bar_language(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 5);
    let sep = sym("A");
    let e = ones_expr()?;
    let bm = BarMachine::build(&e.to_bpda()?, &sep)?;
    let expected = bar_language_expr(&e, &sep)?;
    let letters = symbols("0 1 A");
    let mut lassos: Vec<Lasso> = (0..200).map(|_| random_lasso(&mut r, &letters, 6, 6)).collect();
    let mut extra = rng(seed, 11);
    lassos.extend(inserted_candidates(&mut extra, 200, true));
    let mut failures = Vec::new();
    let want = lassos.len();
    let (conclusive, accepted) = against_oracle(&bm.bpda, &expected, &lassos, want, &mut failures)?;
    failures.retain(|f| !f.starts_with("only "));
    let summary = format!("{conclusive}/{want} conclusive, {accepted} in g(e) ∪ D·g(e)");
    Ok(Check::new("bar-language", &failures, summary))
}

/// Evidence scores of M̄ over level-homogeneous trees against the run of
/// the deterministic base acceptor.
pub fn path_correspondence(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 6);
    let b = infinitely_many_ones();
    let bm = BarMachine::build(&Bpda::from_buchi(&b), &sym("A"))?;
    let letters = symbols("0 1");
    let sigma = Alphabet::new(letters.clone())?;
    let lassos: Vec<Lasso> = (0..100).map(|_| random_lasso(&mut r, &letters, 6, 6)).collect();
    let failures: Vec<String> = lassos
        .par_iter()
        .map(|w| -> Result<Option<String>> {
            let t = level_homogeneous_tree(w, &sigma)?;
            let s = bm.evidence(&t, 12, 2)?;
            let ok = if b.accepts(w)? {
                s[12] >= oracle::deterministic_final_visits(&b, w, 12)
            } else {
                s[10] == s[11] && s[11] == s[12]
            };
            Ok((!ok).then(|| format!("{w}: scores {:?}", &s[10..])))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Check::new("path-correspondence", &failures, "100 lassos, 12 levels".into()))
}

fn balanced_block(n: usize) -> String {
    "0".repeat(n) + &"1".repeat(n)
}

/// Lassos near `(0ⁿ1ⁿ)^ω`, half uniform and half built from blocks.
fn balanced_candidates(r: &mut impl Rng, count: usize) -> Vec<Lasso> {
    let letters = symbols("0 1");
    (0..count)
        .map(|_| {
            if r.gen_bool(0.5) {
                return random_lasso(r, &letters, 6, 6);
            }
            let spoke: String = (0..r.gen_range(0..=2)).map(|_| balanced_block(r.gen_range(1..=3))).collect();
            let cycle: String = (0..r.gen_range(1..=2)).map(|_| balanced_block(r.gen_range(1..=3))).collect();
            let w = Lasso::new(word(&spoke), word(&cycle)).expect("non-empty cycle");
            if r.gen_bool(0.4) {
                mutate(r, &w, &letters)
            } else {
                w
            }
        })
        .collect()
}

/// Compares a machine with the oracle on candidates until `want`
/// conclusive cases are seen.
fn against_oracle(
    m: &Bpda,
    e: &OmegaKleeneExpr,
    candidates: &[Lasso],
    want: usize,
    failures: &mut Vec<String>,
) -> Result<(usize, usize)> {
    let outcomes = candidates
        .par_iter()
        .map(|w| -> Result<Option<(bool, bool)>> {
            match e.lasso_oracle(w, oracle_bound(w))? {
                Verdict::Unknown => Ok(None),
                v => Ok(Some((m.accepts_lasso(w)?, v == Verdict::Yes))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut conclusive, mut accepted) = (0, 0);
    for (w, o) in candidates.iter().zip(outcomes) {
        if conclusive == want {
            break;
        }
        let Some((machine, expected)) = o else { continue };
        conclusive += 1;
        accepted += usize::from(expected);
        if machine != expected {
            failures.push(format!("{w}: machine {machine}, oracle {expected}"));
        }
    }
    if conclusive < want {
        failures.push(format!("only {conclusive} conclusive cases"));
    }
    Ok((conclusive, accepted))
}

/// The ω-KC conversion on `(0*·1)^ω` and `(0ⁿ1ⁿ)^ω`.
pub fn kc_conversion(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 7);
    let letters = symbols("0 1");
    let b = infinitely_many_ones();
    let ones = ones_expr()?.to_bpda()?;
    let lassos: Vec<Lasso> = (0..100).map(|_| random_lasso(&mut r, &letters, 6, 6)).collect();
    let mut failures: Vec<String> = lassos
        .par_iter()
        .map(|w| -> Result<Option<String>> {
            let (got, want) = (ones.accepts_lasso(w)?, b.accepts(w)?);
            Ok((got != want).then(|| format!("(0*1)^w on {w}: machine {got}, acceptor {want}")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let e = omega_power(&zeros_ones_balanced())?;
    let m = e.to_bpda()?;
    for (text, want) in [("(01)^w", true), ("(0)^w", false)] {
        let w = lasso(text);
        let verdict = e.lasso_oracle(&w, oracle_bound(&w))?;
        let expected = if want { Verdict::Yes } else { Verdict::No };
        if m.accepts_lasso(&w)? != want || verdict != expected {
            failures.push(format!("{text}: expected {want}"));
        }
    }
    let candidates = balanced_candidates(&mut r, 1000);
    let (conclusive, accepted) = against_oracle(&m, &e, &candidates, 200, &mut failures)?;
    let summary = format!("100 lassos vs acceptor; {conclusive} conclusive vs oracle, {accepted} members");
    Ok(Check::new("kc-conversion", &failures, summary))
}

/// A word of `D` with `|u| ≤ 1`.
fn short_gap(r: &mut impl Rng) -> String {
    let u = r.gen_range(0..=1);
    let v = 2 * u + r.gen_range(0..=1);
    let mut s = String::new();
    (0..u).for_each(|_| s.push(if r.gen_bool(0.5) { '0' } else { '1' }));
    s.push('A');
    (0..v).for_each(|_| s.push(if r.gen_bool(0.5) { '0' } else { '1' }));
    s
}

/// An image of one `0*·1` block: each letter followed by a gap.
fn inserted_block(r: &mut impl Rng) -> String {
    let base = "0".repeat(r.gen_range(0..=1)) + "1";
    base.chars().map(|c| format!("{c}{}", short_gap(r))).collect()
}

fn inserted_candidates(r: &mut impl Rng, count: usize, leading_gap: bool) -> Vec<Lasso> {
    let letters = symbols("0 1 A");
    (0..count)
        .map(|_| {
            if r.gen_bool(0.5) {
                return random_lasso(r, &letters, 6, 6);
            }
            let mut spoke = if leading_gap && r.gen_bool(0.5) { short_gap(r) } else { String::new() };
            spoke.extend((0..r.gen_range(0..=1)).map(|_| inserted_block(r)));
            let cycle: String = (0..r.gen_range(1..=2)).map(|_| inserted_block(r)).collect();
            let w = Lasso::new(word(&spoke), word(&cycle)).expect("non-empty cycle");
            if r.gen_bool(0.4) {
                mutate(r, &w, &letters)
            } else {
                w
            }
        })
        .collect()
}

/// `omegaPower(g(0*·1))` for the branch-insertion substitution `g`.
pub fn omega_power_image(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 9);
    let sigma = Alphabet::new(symbols("0 1"))?;
    let g = branch_insertion(&sigma, &sym("A"))?;
    let e = omega_power(&g.apply(&zeros_then_one())?)?;
    let m = e.to_bpda()?;
    let mut failures = Vec::new();
    for (text, want) in [("(1A1)^w", true), ("(1A111)^w", false)] {
        let w = lasso(text);
        let verdict = e.lasso_oracle(&w, oracle_bound(&w))?;
        let expected = if want { Verdict::Yes } else { Verdict::No };
        if m.accepts_lasso(&w)? != want || verdict != expected {
            failures.push(format!("{text}: expected {want}"));
        }
    }
    let candidates = inserted_candidates(&mut r, 600, false);
    let (conclusive, accepted) = against_oracle(&m, &e, &candidates, 100, &mut failures)?;
    let summary = format!("fixed cases plus {conclusive} conclusive vs oracle, {accepted} members");
    Ok(Check::new("omega-power-image", &failures, summary))
}

/// Saturation emptiness against the explicit configuration graph.
pub fn pds_emptiness(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 8);
    let mut cases = Vec::new();
    let mut attempts = 0;
    while cases.len() < 50 && attempts < 100_000 {
        attempts += 1;
        let p = random_one_counter(&mut r)?;
        if let Some(nonempty) = oracle::explicit_pds_nonempty(&p, 8) {
            cases.push((p, nonempty));
        }
    }
    let mut failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(i, (p, nonempty))| (p.is_empty() == *nonempty).then(|| format!("instance {i}: expected nonempty={nonempty}")))
        .collect();
    if cases.len() < 50 {
        failures.push(format!("only {} closed instances", cases.len()));
    }
    let nonempty = cases.iter().filter(|c| c.1).count();
    let summary = format!("{} instances ({nonempty} non-empty)", cases.len());
    Ok(Check::new("pds-emptiness", &failures, summary))
}
