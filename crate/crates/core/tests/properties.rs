use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use omega_cfl::bar::BarMachine;
use omega_cfl::fsa::{BuchiAutomaton, Fsm, MullerAutomaton};
use omega_cfl::grammar::{build_b1, build_b2, build_d, zeros_ones_balanced, Cfg, Substitution};
use omega_cfl::kleene::{OmegaKleeneExpr, Verdict};
use omega_cfl::oracle;
use omega_cfl::pda::Bpda;
use omega_cfl::tree::{f_embed, j_leftmost, level_homogeneous_tree, Dir, Node};
use omega_cfl::verify::{oracle_bound, random_buchi, random_one_counter, random_tree};
use omega_cfl::words::{sym, Alphabet, Lasso, Symbol, Word};

fn letters(tokens: &str) -> Vec<Symbol> {
    tokens.split_whitespace().map(sym).collect()
}

fn word_of(tokens: &[Symbol], idx: &[usize]) -> Word {
    idx.iter().map(|&i| tokens[i % tokens.len()].clone()).collect()
}

/// `(spoke, cycle)` as letter indices.
fn lasso_strategy(max_u: usize, max_v: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (prop::collection::vec(0usize..8, 0..=max_u), prop::collection::vec(0usize..8, 1..=max_v))
}

fn lasso_of(tokens: &[Symbol], (u, v): &(Vec<usize>, Vec<usize>)) -> Lasso {
    Lasso::new(word_of(tokens, u), word_of(tokens, v)).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Büchi acceptance by the product graph: some reachable final node lies on
/// a cycle.
fn buchi_brute(b: &BuchiAutomaton, w: &Lasso) -> bool {
    let m = &b.machine;
    let pos = w.position_letters(m.alphabet()).unwrap();
    let succ = |(q, p): (usize, usize)| -> Vec<(usize, usize)> {
        m.successors(q, pos[p]).iter().map(|&r| (r, w.next_position(p))).collect()
    };
    let reach = |from: Vec<(usize, usize)>| -> HashSet<(usize, usize)> {
        let mut seen: HashSet<_> = HashSet::new();
        let mut queue: VecDeque<_> = from.into_iter().collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n) {
                queue.extend(succ(n));
            }
        }
        seen
    };
    let reachable = reach(vec![(m.initial(), 0)]);
    reachable.iter().any(|&(q, p)| b.is_final(q) && reach(succ((q, p))).contains(&(q, p)))
}

/// The unique run of a deterministic machine, until a (state, position)
/// pair repeats; returns the states visited infinitely often.
fn deterministic_infinity(m: &Fsm, w: &Lasso) -> BTreeSet<usize> {
    let pos = w.position_letters(m.alphabet()).unwrap();
    let mut seen = Vec::new();
    let (mut q, mut p) = (m.initial(), 0);
    loop {
        if let Some(i) = seen.iter().position(|&n| n == (q, p)) {
            return seen[i..].iter().map(|&(q, _)| q).collect();
        }
        seen.push((q, p));
        q = m.successors(q, pos[p])[0];
        p = w.next_position(p);
    }
}

fn random_dfa(seed: u64) -> Fsm {
    use rand::Rng;
    let mut r = rng(seed);
    let n = r.gen_range(1..=4);
    let trans: Vec<_> = (0..n).flat_map(|q| (0..2).map(move |a| (q, a))).map(|(q, a)| (q, a, r.gen_range(0..n))).collect();
    let states = (0..n).map(|i| format!("q{i}")).collect();
    Fsm::new(states, Alphabet::from_tokens("0 1").unwrap(), 0, &trans).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_canonical(l in lasso_strategy(6, 6)) {
        let t = letters("a b");
        let w = lasso_of(&t, &l);
        let n = w.normalize();
        prop_assert_eq!(n.normalize(), n.clone());
        prop_assert!(n.spoke().len() <= w.spoke().len() && n.cycle().len() <= w.cycle().len());
        for k in 0..40 {
            prop_assert_eq!(w.at(k), n.at(k));
        }
    }

    #[test]
    fn buchi_acceptance_matches_product_search(seed in any::<u64>(), l in lasso_strategy(4, 4)) {
        let b = random_buchi(&mut rng(seed)).unwrap();
        let w = lasso_of(&letters("0 1"), &l);
        let got = b.accepts_lasso(&w).unwrap();
        prop_assert_eq!(got.is_some(), buchi_brute(&b, &w));
        prop_assert_eq!(got.is_some(), b.accepts(&w.normalize()).unwrap());
        if let Some(run) = got {
            prop_assert!(run.replays(&b.machine, &w));
            prop_assert!(run.infinity.iter().any(|&q| b.is_final(q)));
        }
    }

    #[test]
    fn muller_acceptance_matches_unique_run(seed in any::<u64>(), l in lasso_strategy(4, 4), picks in prop::collection::vec(0u8..16, 0..3)) {
        let m = random_dfa(seed);
        let n = m.states().len();
        let table: Vec<BTreeSet<usize>> = picks.iter().map(|&b| (0..n).filter(|&q| b & (1 << q) != 0).collect()).collect();
        let a = MullerAutomaton::new(m.clone(), table.clone()).unwrap();
        let w = lasso_of(&letters("0 1"), &l);
        let inf = deterministic_infinity(&m, &w);
        let got = a.accepts_lasso(&w).unwrap();
        prop_assert_eq!(got.is_some(), table.contains(&inf));
        if let Some(run) = got {
            prop_assert!(run.replays(&m, &w));
            prop_assert_eq!(run.infinity, inf);
        }
    }

    #[test]
    fn finite_machine_as_pushdown_agrees(seed in any::<u64>(), l in lasso_strategy(4, 4)) {
        let b = random_buchi(&mut rng(seed)).unwrap();
        let w = lasso_of(&letters("0 1"), &l);
        prop_assert_eq!(Bpda::from_buchi(&b).accepts_lasso(&w).unwrap(), b.accepts(&w).unwrap());
    }

    #[test]
    fn saturation_matches_explicit_search(seed in any::<u64>()) {
        let p = random_one_counter(&mut rng(seed)).unwrap();
        if let Some(nonempty) = oracle::explicit_pds_nonempty(&p, 8) {
            prop_assert_eq!(p.is_empty(), !nonempty);
        }
    }

    #[test]
    fn code_prefix_matches_recursive_listing(seed in any::<u64>(), levels in 0usize..8) {
        let t = random_tree(&mut rng(seed), 5, 3).unwrap();
        prop_assert_eq!(t.h_prefix(levels, &sym("A")).unwrap(), oracle::h_prefix_brute(&t, levels, &sym("A")));
    }

    #[test]
    fn leftmost_of_embedding_is_normal_form(l in lasso_strategy(6, 6)) {
        let t = letters("a b");
        let w = lasso_of(&t, &l);
        let sigma = Alphabet::new(t).unwrap();
        prop_assert_eq!(j_leftmost(&f_embed(&w, &sigma, &sym("A")).unwrap()), w.normalize());
    }

    #[test]
    fn homogeneous_tree_paths_spell_the_word(l in lasso_strategy(4, 4), path in prop::collection::vec(any::<bool>(), 6)) {
        let t = letters("a b");
        let w = lasso_of(&t, &l);
        let tree = level_homogeneous_tree(&w, &Alphabet::new(t).unwrap()).unwrap();
        let mut node = Vec::new();
        for (k, &right) in path.iter().enumerate() {
            prop_assert_eq!(tree.label_at(&Node(node.clone())), w.at(k));
            node.push(if right { Dir::R } else { Dir::L });
        }
    }

    #[test]
    fn gap_factor_scan_matches_naive(idx in prop::collection::vec(0usize..3, 0..14)) {
        let w = word_of(&letters("0 1 A"), &idx);
        let sep = sym("A");
        prop_assert_eq!(oracle::has_b_factor(w.symbols(), &sep), oracle::has_b_factor_naive(w.symbols(), &sep));
    }

    #[test]
    fn compressed_simulation_matches_explicit(idx in prop::collection::vec(0usize..3, 0..12), seed in any::<u64>()) {
        let b = random_buchi(&mut rng(seed)).unwrap();
        let bm = BarMachine::build(&Bpda::from_buchi(&b), &sym("A")).unwrap();
        let x: Vec<usize> = idx.clone();
        prop_assert_eq!(bm.compressed_runs(&x, 2).unwrap(), bm.bpda.bounded_runs(&x, 2));
    }

    #[test]
    fn finite_expressions_agree_with_oracle(
        us in prop::collection::vec(prop::collection::vec(0usize..2, 0..3), 1..3),
        vs in prop::collection::vec(prop::collection::vec(0usize..2, 1..4), 1..3),
        l in lasso_strategy(4, 4),
    ) {
        let t = letters("0 1");
        let sigma = Alphabet::new(t.clone()).unwrap();
        let u: Vec<Word> = us.iter().map(|w| word_of(&t, w)).collect();
        let v: Vec<Word> = vs.iter().map(|w| word_of(&t, w)).collect();
        let e = OmegaKleeneExpr::new(vec![(Cfg::finite(&sigma, &u).unwrap(), Cfg::finite(&sigma, &v).unwrap())]).unwrap();
        let w = lasso_of(&t, &l);
        match e.lasso_oracle(&w, oracle_bound(&w)).unwrap() {
            Verdict::Unknown => {}
            v => prop_assert_eq!(e.to_bpda().unwrap().accepts_lasso(&w).unwrap(), v == Verdict::Yes),
        }
    }

    #[test]
    fn morphism_image_membership(idx in prop::collection::vec(0usize..2, 0..5)) {
        let source = Alphabet::from_tokens("0 1").unwrap();
        let target = Alphabet::from_tokens("a b").unwrap();
        let h = Substitution::morphism(source.clone(), target.clone(), vec![Word::parse("ab").unwrap(), Word::parse("b").unwrap()]).unwrap();
        let w = word_of(source.letters(), &idx);
        let image = h.apply(&Cfg::single_word(&source, &w).unwrap()).unwrap();
        let hw = h.apply_word(&w).unwrap();
        prop_assert!(image.member(&hw).unwrap());
        let mut longer = hw.clone();
        longer.push(sym("a"));
        prop_assert!(!image.member(&longer).unwrap());
    }
}

/// Membership in the gap languages against their defining predicates, on
/// every word of length at most 7.
#[test]
fn gap_languages_match_predicates() {
    let sigma = Alphabet::from_tokens("0 1").unwrap();
    let sep = sym("A");
    let t = letters("0 1 A");
    let (d, b1, b2) = (build_d(&sigma, &sep).unwrap(), build_b1(&sigma, &sep).unwrap(), build_b2(&sigma, &sep).unwrap());
    let mut words = vec![Vec::new()];
    for _ in 0..7 {
        let next: Vec<Vec<usize>> = words.iter().flat_map(|w: &Vec<usize>| (0..3).map(move |a| [w.clone(), vec![a]].concat())).collect();
        for w in &words {
            let s = word_of(&t, w);
            assert_eq!(d.member(&s).unwrap(), oracle::in_d(s.symbols(), &sep), "D {s}");
            assert_eq!(b1.member(&s).unwrap(), oracle::in_b1(s.symbols(), &sep), "B1 {s}");
            assert_eq!(b2.member(&s).unwrap(), oracle::in_b2(s.symbols(), &sep), "B2 {s}");
        }
        words = next;
    }
}

/// Earley membership against breadth-first derivation.
#[test]
fn earley_matches_derivations() {
    let sigma = Alphabet::from_tokens("0 1").unwrap();
    for g in [zeros_ones_balanced(), build_d(&sigma, &sym("A")).unwrap(), build_b1(&sigma, &sym("A")).unwrap()] {
        let derived = oracle::derivable_words(&g, 7);
        let k = g.terminals().len();
        let mut words = vec![Vec::new()];
        for _ in 0..=7 {
            for w in &words {
                assert_eq!(g.accepts(w), derived.contains(w), "{w:?}");
            }
            words = words.iter().flat_map(|w| (0..k).map(move |a| [w.clone(), vec![a]].concat())).collect();
        }
    }
}
