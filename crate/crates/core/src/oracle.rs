//! Independent reference implementations used to cross-check the decision
//! procedures: direct predicates, brute-force enumerations and explicit-state
//! searches. None of these share code paths with the procedures they check.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::fsa::BuchiAutomaton;
use crate::graph;
use crate::pda::{Bpda, BuchiPds};
use crate::tree::{Dir, Node, RegularTree};
use crate::words::{Lasso, Symbol, Word};

/// `u·A·v` with `u, v` separator-free and `|v| ∈ {2|u|, 2|u|+1}`.
pub fn in_d(w: &[Symbol], sep: &Symbol) -> bool {
    let seps: Vec<usize> = (0..w.len()).filter(|&i| &w[i] == sep).collect();
    let [i] = seps.as_slice() else { return false };
    let (u, v) = (*i, w.len() - i - 1);
    v == 2 * u || v == 2 * u + 1
}

/// `A·u·A·v·A` with `|v| < 2|u|`.
pub fn in_b1(w: &[Symbol], sep: &Symbol) -> bool {
    let seps: Vec<usize> = (0..w.len()).filter(|&i| &w[i] == sep).collect();
    let [0, i, j] = seps.as_slice() else { return false };
    if *j != w.len() - 1 {
        return false;
    }
    let (u, v) = (i - 1, j - i - 1);
    v < 2 * u
}

/// `A·u·A·v` with `|v| > 2|u|`.
pub fn in_b2(w: &[Symbol], sep: &Symbol) -> bool {
    let seps: Vec<usize> = (0..w.len()).filter(|&i| &w[i] == sep).collect();
    let [0, i] = seps.as_slice() else { return false };
    let (u, v) = (i - 1, w.len() - i - 1);
    v > 2 * u
}

/// True iff `w` starts with a word of `A ∪ Σ² ∪ Σ·A·A ∪ Σ·A·Σ·A ∪ Σ·A·Σ³`.
pub fn has_a1_prefix(w: &[Symbol], sep: &Symbol) -> bool {
    let is_a = |i: usize| w.get(i).map(|s| s == sep);
    let letter = |i: usize| is_a(i) == Some(false);
    let a = |i: usize| is_a(i) == Some(true);
    a(0) || (letter(0) && letter(1))
        || (letter(0) && a(1) && a(2))
        || (letter(0) && a(1) && letter(2) && a(3))
        || (letter(0) && a(1) && letter(2) && letter(3) && letter(4))
}

/// Some factor of `w` lies in `B₁` or `B₂`. A factor of either kind starts
/// at a separator and spans the next gap, so scanning consecutive separator
/// pairs suffices.
pub fn has_b_factor(w: &[Symbol], sep: &Symbol) -> bool {
    let seps: Vec<usize> = (0..w.len()).filter(|&i| &w[i] == sep).collect();
    seps.windows(2).enumerate().any(|(k, pair)| {
        let u = pair[1] - pair[0] - 1;
        // the A-free stretch after the second separator
        let end = seps.get(k + 2).copied().unwrap_or(w.len());
        let v = end - pair[1] - 1;
        (seps.get(k + 2).is_some() && v < 2 * u) || v > 2 * u
    })
}

/// [`has_b_factor`] by testing every factor.
pub fn has_b_factor_naive(w: &[Symbol], sep: &Symbol) -> bool {
    (0..w.len()).any(|i| (i + 1..=w.len()).any(|j| in_b1(&w[i..j], sep) || in_b2(&w[i..j], sep)))
}

/// Level-`n` nodes by recursive listing, `l` before `r`.
pub fn nodes_recursive(n: usize) -> Vec<Node> {
    fn go(prefix: &mut Vec<Dir>, n: usize, out: &mut Vec<Node>) {
        if prefix.len() == n {
            out.push(Node(prefix.clone()));
            return;
        }
        for d in [Dir::L, Dir::R] {
            prefix.push(d);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// The coding prefix built node by node from the defining description.
pub fn h_prefix_brute(t: &RegularTree, levels: usize, sep: &Symbol) -> Word {
    let mut out = Vec::new();
    for n in 0..=levels {
        let mut nodes = nodes_recursive(n);
        if n >= 2 && n % 2 == 0 {
            nodes.reverse();
        }
        out.extend(nodes.iter().map(|x| t.label_at(x).clone()));
        out.push(sep.clone());
    }
    Word::from_symbols(out)
}

/// Number of final states among the states `q₀ … q_n` of a deterministic
/// acceptor's run on the first `n` letters of `w`.
pub fn deterministic_final_visits(b: &BuchiAutomaton, w: &Lasso, n: usize) -> usize {
    let m = &b.machine;
    let mut q = m.initial();
    let mut count = usize::from(b.is_final(q));
    for k in 0..n {
        let a = m.alphabet().index_of(w.at(k)).expect("letter of the alphabet");
        q = m.successors(q, a)[0];
        count += usize::from(b.is_final(q));
    }
    count
}

/// Explicit-state emptiness on the configuration graph of `p` truncated at
/// stack height `max_height`. `None` if a reachable configuration exceeds the
/// bound (the truncation is not reachability-closed).
pub fn explicit_pds_nonempty(p: &BuchiPds, max_height: usize) -> Option<bool> {
    let (c0, z0) = p.initial();
    let start = (c0, vec![z0]);
    let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut nodes = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<(usize, usize, bool, bool)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (c, stack) = nodes[i].clone();
        let Some(&top) = stack.last() else { continue };
        for r in p.rules().iter().filter(|r| r.from == c && r.top == top) {
            // this oracle keeps the top at the end of the vector
            let mut next = stack[..stack.len() - 1].to_vec();
            next.extend(r.push.iter().rev());
            if next.len() > max_height {
                return None;
            }
            let key = (r.to, next);
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    let j = nodes.len();
                    nodes.push(key.clone());
                    index.insert(key, j);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, j, p.is_repeating(r.to), r.progress));
        }
    }
    let mut adj = vec![Vec::new(); nodes.len()];
    for &(a, b, _, _) in &edges {
        adj[a].push(b);
    }
    let (comp, count) = graph::scc(&adj);
    let mut has_r = vec![false; count];
    let mut has_p = vec![false; count];
    for &(a, b, r, prog) in &edges {
        if comp[a] == comp[b] {
            has_r[comp[a]] |= r;
            has_p[comp[a]] |= prog;
        }
    }
    Some((0..count).any(|c| has_r[c] && has_p[c]))
}

/// One transition of M̄ by names: `(group, from, input, top, to, push)`.
pub type NamedRule = (char, String, String, String, String, Vec<String>);

/// The transition set of M̄ re-derived by names from the nineteen schemas.
/// Copies of `q` are named `q^i`, the reject state `q_r`, the new stack
/// symbol `e`; input `#` is λ.
pub fn rederive_bar(m: &Bpda, sep: &str, e: &str) -> BTreeSet<NamedRule> {
    let pdm = &m.machine;
    let k: Vec<&str> = pdm.states().iter().map(String::as_str).collect();
    let sigma: Vec<String> = pdm.alphabet().letters().iter().map(|s| s.to_string()).collect();
    let gamma: Vec<&str> = pdm.stack_alphabet().iter().map(String::as_str).collect();
    let mut gamma_e: Vec<&str> = gamma.clone();
    gamma_e.push(e);
    let up = |q: &str, i: u8| format!("{q}^{i}");
    let q0 = k[pdm.initial()];
    let z0 = gamma[pdm.start_stack()];
    let qr = "q_r".to_string();
    let mut out = BTreeSet::new();
    let mut put = |g: char, from: String, input: &str, top: &str, to: String, push: Vec<&str>| {
        out.insert((g, from, input.to_string(), top.to_string(), to, push.into_iter().map(String::from).collect()));
    };
    let delta: Vec<(&str, String, &str, &str, Vec<&str>)> = pdm
        .rules()
        .iter()
        .map(|r| {
            (
                k[r.from],
                r.input.map_or("#".to_string(), |a| sigma[a].clone()),
                gamma[r.top],
                k[r.to],
                r.push.iter().map(|&z| gamma[z]).collect(),
            )
        })
        .collect();
    for g in crate::bar::GROUPS {
        match g {
            'a' => {
                for (q, a, z, p, nu) in &delta {
                    if *q == q0 && *z == z0 && a != "#" {
                        put(g, q0.into(), a, z0, p.to_string(), nu.clone());
                    }
                }
            }
            'b' => put(g, q0.into(), sep, z0, qr.clone(), vec![z0]),
            'c' => {
                for q in &k {
                    for a in &sigma {
                        for z in &gamma_e {
                            put(g, q.to_string(), a, z, up(q, 1), vec![e, z]);
                        }
                    }
                }
            }
            'd' => {
                for q in &k {
                    for a in &sigma {
                        put(g, up(q, 1), a, e, up(q, 1), vec![e, e]);
                    }
                }
            }
            'e' | 'f' => {
                for q in &k {
                    for z in &gamma_e {
                        let from = if g == 'e' { up(q, 1) } else { q.to_string() };
                        put(g, from, sep, z, up(q, 2), vec![z]);
                    }
                }
            }
            'g' | 'h' => {
                for q in &k {
                    for a in &sigma {
                        if g == 'g' {
                            put(g, up(q, 2), a, e, up(q, 3), vec![e]);
                        } else {
                            put(g, up(q, 3), a, e, up(q, 2), vec![]);
                        }
                    }
                }
            }
            'i' | 'j' => {
                for q in &k {
                    put(g, up(q, if g == 'i' { 2 } else { 3 }), sep, e, qr.clone(), vec![e]);
                }
            }
            'k' => {
                for a in sigma.iter().map(String::as_str).chain([sep]) {
                    for z in &gamma_e {
                        put(g, qr.clone(), a, z, qr.clone(), vec![z]);
                    }
                }
            }
            'l' | 'o' | 'r' => {
                let copy = match g {
                    'l' => 2,
                    'o' => 5,
                    _ => 4,
                };
                for (q, a, z, p, nu) in &delta {
                    if a != "#" {
                        put(g, up(q, copy), a, z, p.to_string(), nu.clone());
                    }
                }
            }
            'm' | 'n' => {
                for (q, a, z, p, nu) in &delta {
                    if a == "#" {
                        put(g, up(q, if g == 'm' { 2 } else { 5 }), "#", z, up(p, 5), nu.clone());
                    }
                }
            }
            'p' | 'q' => {
                for q in &k {
                    for a in &sigma {
                        for z in &gamma {
                            put(g, up(q, if g == 'p' { 5 } else { 2 }), a, z, up(q, 4), vec![z]);
                        }
                    }
                }
            }
            's' => {
                for q in &k {
                    for z in &gamma {
                        put(g, up(q, 4), sep, z, qr.clone(), vec![z]);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Words over `alphabet` of length `≤ n` derivable in the grammar, by
/// breadth-first leftmost derivation with length pruning (λ-free grammars).
pub fn derivable_words(g: &crate::grammar::Cfg, n: usize) -> BTreeSet<Vec<usize>> {
    use crate::grammar::GSym;
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([vec![GSym::N(g.start())]]);
    while let Some(form) = queue.pop_front() {
        let Some(pos) = form.iter().position(|s| matches!(s, GSym::N(_))) else {
            out.insert(form.iter().map(|s| if let GSym::T(t) = s { *t } else { unreachable!() }).collect());
            continue;
        };
        let GSym::N(x) = form[pos] else { unreachable!() };
        for p in g.productions().iter().filter(|p| p.head == x) {
            let mut next = form[..pos].to_vec();
            next.extend_from_slice(&p.body);
            next.extend_from_slice(&form[pos + 1..]);
            // every symbol of a λ-free form yields at least one letter
            if next.len() <= n && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    out
}
