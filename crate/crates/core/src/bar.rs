//! The branch-guessing machine M̄: reads the level-by-level code of a binary
//! tree, guesses a branch and simulates a base Büchi pushdown machine along
//! it, tracking its position inside a level with an `E`-counter on the stack.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grammar::{branch_insertion, build_d};
use crate::kleene::OmegaKleeneExpr;
use crate::pda::{Bpda, Configuration, Pdm, Rule};
use crate::tree::RegularTree;
use crate::words::{Alphabet, Symbol};

/// Where a state of M̄ comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateOrigin {
    /// `q ∈ K`.
    Base(usize),
    /// `qⁱ` for `i ∈ 1..=5`.
    Copy(u8, usize),
    /// `q_r`.
    Reject,
}

/// The rule groups `(a)`–`(s)`.
pub const GROUPS: [char; 19] = [
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's',
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarMachine {
    pub bpda: Bpda,
    pub origins: Vec<StateOrigin>,
    /// Group tags of every rule of `bpda.machine.rules()`, in the same order.
    pub groups: Vec<BTreeSet<char>>,
    pub e_symbol: usize,
    pub separator: Symbol,
    base_states: usize,
    base_stack: usize,
}

/// A name not in `taken`, built from `base` by appending `'`.
fn fresh(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

impl BarMachine {
    /// Builds M̄ from `m` with input separator `separator`. The fresh stack
    /// symbol `E` is named `E` unless taken, then suffixed.
    pub fn build(m: &Bpda, separator: &Symbol) -> Result<BarMachine> {
        let base = &m.machine;
        let sigma = base.alphabet();
        let sigma_bar = sigma.with(separator)?;
        let k = base.states().len();
        let sep = sigma_bar.index_of(separator).expect("separator added");

        let mut taken: HashSet<String> = base.states().iter().cloned().collect();
        let mut names: Vec<String> = base.states().to_vec();
        let mut origins: Vec<StateOrigin> = (0..k).map(StateOrigin::Base).collect();
        let mut copy = vec![[0usize; 6]; k];
        for i in 1..=5u8 {
            for q in 0..k {
                copy[q][i as usize] = names.len();
                names.push(fresh(format!("{}^{i}", base.states()[q]), &mut taken));
                origins.push(StateOrigin::Copy(i, q));
            }
        }
        let qr = names.len();
        names.push(fresh("q_r".into(), &mut taken));
        origins.push(StateOrigin::Reject);

        let mut stack_taken: HashSet<String> = base.stack_alphabet().iter().cloned().collect();
        let mut stack = base.stack_alphabet().to_vec();
        let e = stack.len();
        stack.push(fresh("E".into(), &mut stack_taken));
        let gamma = base.stack_alphabet().len();

        let mut tagged: Vec<(char, Rule)> = Vec::new();
        let mut add = |g: char, from: usize, input: Option<usize>, top: usize, to: usize, push: Vec<usize>| {
            tagged.push((g, Rule { from, input, top, to, push }));
        };
        let q0 = base.initial();
        let z0 = base.start_stack();
        let letters = 0..sigma.len();
        let all_tops = || 0..=gamma;
        let base_rules = base.rules();

        // (a) initial simulation: letter moves of q0 on Z0
        for r in base_rules.iter().filter(|r| r.from == q0 && r.top == z0 && r.input.is_some()) {
            add('a', q0, r.input, z0, r.to, r.push.clone());
        }
        // (b)
        add('b', q0, Some(sep), z0, qr, vec![z0]);
        for q in 0..k {
            let [_, q1, q2, q3, q4, q5] = copy[q];
            for a in letters.clone() {
                // (c) skip a label, start counting
                for z in all_tops() {
                    add('c', q, Some(a), z, q1, vec![e, z]);
                }
                // (d)
                add('d', q1, Some(a), e, q1, vec![e, e]);
                // (g), (h): one E per two letters
                add('g', q2, Some(a), e, q3, vec![e]);
                add('h', q3, Some(a), e, q2, vec![]);
                for z in 0..gamma {
                    // (p), (q): wait one label
                    add('p', q5, Some(a), z, q4, vec![z]);
                    add('q', q2, Some(a), z, q4, vec![z]);
                }
            }
            for z in all_tops() {
                // (e), (f): cross the separator
                add('e', q1, Some(sep), z, q2, vec![z]);
                add('f', q, Some(sep), z, q2, vec![z]);
            }
            // (i), (j): separator too early
            add('i', q2, Some(sep), e, qr, vec![e]);
            add('j', q3, Some(sep), e, qr, vec![e]);
            // (s)
            for z in 0..gamma {
                add('s', q4, Some(sep), z, qr, vec![z]);
            }
        }
        // (k) reject sink
        for x in 0..sigma_bar.len() {
            for z in all_tops() {
                add('k', qr, Some(x), z, qr, vec![z]);
            }
        }
        // (l)–(o), (r): simulation of base moves
        for r in base_rules {
            let (q, q2) = (r.from, copy[r.from][2]);
            let (q4, q5) = (copy[q][4], copy[q][5]);
            match r.input {
                Some(a) => {
                    add('l', q2, Some(a), r.top, r.to, r.push.clone());
                    add('o', q5, Some(a), r.top, r.to, r.push.clone());
                    add('r', q4, Some(a), r.top, r.to, r.push.clone());
                }
                None => {
                    add('m', q2, None, r.top, copy[r.to][5], r.push.clone());
                    add('n', q5, None, r.top, copy[r.to][5], r.push.clone());
                }
            }
        }

        let mut tags: HashMap<Rule, BTreeSet<char>> = HashMap::new();
        for (g, r) in &tagged {
            tags.entry(r.clone()).or_default().insert(*g);
        }
        let rules: Vec<Rule> = tags.keys().cloned().collect();
        let pdm = Pdm::new(names, sigma_bar, stack, q0, z0, rules)?;
        let groups = pdm.rules().iter().map(|r| tags[r].clone()).collect();
        let mut finals = m.finals();
        finals.extend(m.finals().iter().map(|&q| copy[q][5]));
        let bpda = Bpda::new(pdm, &finals)?;
        Ok(BarMachine {
            bpda,
            origins,
            groups,
            e_symbol: e,
            separator: separator.clone(),
            base_states: k,
            base_stack: gamma,
        })
    }

    pub fn base_states(&self) -> usize {
        self.base_states
    }

    pub fn base_stack_symbols(&self) -> usize {
        self.base_stack
    }

    /// The sidecar listing: one `group rule` line per transition.
    pub fn provenance_text(&self) -> String {
        let mut out = String::new();
        let m = &self.bpda.machine;
        for (r, g) in m.rules().iter().zip(&self.groups) {
            let tags: String = g.iter().collect();
            let _ = writeln!(out, "{tags} {}", m.rule_text(r));
        }
        out
    }

    /// Best `F̄`-visit count over partial runs on `hPrefix(t, levels)`, after
    /// each level `0..=levels`.
    pub fn evidence(&self, t: &RegularTree, levels: usize, lambda_budget: usize) -> Result<Vec<usize>> {
        let word = t.h_prefix(levels, &self.separator)?;
        let letters = self.bpda.machine.alphabet().encode(&word)?;
        let sep = self.bpda.machine.alphabet().index_of(&self.separator).expect("separator");
        let mut scores = Vec::with_capacity(levels + 1);
        let mut sim = CounterSim::new(self, lambda_budget)?;
        for &a in &letters {
            sim.read(a);
            if a == sep {
                scores.push(sim.best());
            }
        }
        Ok(scores)
    }

    /// Configurations and best visit counts after reading `x`; the same
    /// quantity as [`Bpda::bounded_runs`], computed with counted `E`-blocks.
    pub fn compressed_runs(&self, x: &[usize], lambda_budget: usize) -> Result<BTreeMap<Configuration, usize>> {
        let mut sim = CounterSim::new(self, lambda_budget)?;
        for &a in x {
            sim.read(a);
        }
        Ok(sim.configurations())
    }
}

/// `barAsSubstitutionExpr`: the image of `e` under `x ↦ x·D`.
pub fn bar_as_substitution_expr(e: &OmegaKleeneExpr, separator: &Symbol) -> Result<OmegaKleeneExpr> {
    let g = branch_insertion(e.alphabet(), separator)?;
    e.substitute(&g)
}

/// The language M̄ accepts on all of `(Σ ∪ {A})^ω`. Groups (c)–(f) also
/// apply in `q₀`, so before its first simulated letter M̄ may read one gap
/// of `D`: the result is `g(e) ∪ D·g(e)`.
pub fn bar_language_expr(e: &OmegaKleeneExpr, separator: &Symbol) -> Result<OmegaKleeneExpr> {
    let image = bar_as_substitution_expr(e, separator)?;
    let d = build_d(e.alphabet(), separator)?;
    let shifted = image
        .pairs()
        .iter()
        .map(|(u, v)| Ok((d.concat(u)?, v.clone())))
        .collect::<Result<Vec<_>>>()?;
    image.union(&OmegaKleeneExpr::new(shifted)?)
}

/// The base alphabet of a bar machine (its input minus the separator).
pub fn base_alphabet(bm: &BarMachine) -> Alphabet {
    let letters = bm
        .bpda
        .machine
        .alphabet()
        .letters()
        .iter()
        .filter(|s| **s != bm.separator)
        .cloned()
        .collect();
    Alphabet::new(letters).expect("non-empty base alphabet")
}

const NONE: i64 = -1;

/// Scores for configurations `(s, Eᵐγ)` with `m = base, base+1, …`.
#[derive(Clone, Debug)]
struct Lane {
    base: usize,
    v: Vec<i64>,
}

impl Lane {
    fn point(m: usize, score: i64) -> Lane {
        Lane { base: m, v: vec![score] }
    }

    fn at(&self, m: usize) -> i64 {
        if m < self.base {
            NONE
        } else {
            self.v.get(m - self.base).copied().unwrap_or(NONE)
        }
    }

    /// Entries with `m ≥ 1`, shifted by `delta ∈ {-1, 0, 1}`, plus `bonus`.
    fn e_top(&self, delta: isize, bonus: i64) -> Option<Lane> {
        let skip = usize::from(self.base == 0);
        if self.v.len() <= skip {
            return None;
        }
        let v: Vec<i64> = self.v[skip..].iter().map(|&s| if s == NONE { NONE } else { s + bonus }).collect();
        if v.iter().all(|&s| s == NONE) {
            return None;
        }
        let base = (self.base + skip) as isize + delta;
        Some(Lane { base: base as usize, v })
    }

    /// Pointwise maximum; true if anything improved.
    fn merge(&mut self, other: &Lane) -> bool {
        let lo = self.base.min(other.base);
        let hi = (self.base + self.v.len()).max(other.base + other.v.len());
        if lo < self.base || hi > self.base + self.v.len() {
            let mut v = vec![NONE; hi - lo];
            v[self.base - lo..self.base - lo + self.v.len()].copy_from_slice(&self.v);
            self.v = v;
            self.base = lo;
        }
        let mut improved = false;
        for (i, &s) in other.v.iter().enumerate() {
            let slot = &mut self.v[other.base - self.base + i];
            if s > *slot {
                *slot = s;
                improved = true;
            }
        }
        improved
    }

    fn best(&self) -> i64 {
        self.v.iter().copied().max().unwrap_or(NONE)
    }
}

/// Exact simulation of a bar machine where the `E`-block on top of the stack
/// is kept as a counter, grouped by state and remaining stack.
struct CounterSim<'a> {
    bm: &'a BarMachine,
    budget: usize,
    lanes: BTreeMap<(usize, Vec<usize>), Lane>,
}

impl<'a> CounterSim<'a> {
    fn new(bm: &'a BarMachine, budget: usize) -> Result<Self> {
        let m = &bm.bpda.machine;
        let e = bm.e_symbol;
        for r in m.rules() {
            if r.top == e {
                if r.input.is_none() {
                    return Err(Error::InvalidMachine("λ-move reading E".into()));
                }
                if !r.push.iter().all(|&z| z == e) || r.push.len() > 2 {
                    return Err(Error::InvalidMachine("E-top move breaks the counter shape".into()));
                }
            } else {
                let lead = r.push.iter().take_while(|&&z| z == e).count();
                if r.push[lead..].contains(&e) {
                    return Err(Error::InvalidMachine("E pushed below a stack symbol".into()));
                }
            }
        }
        let init = m.initial_configuration();
        let score = i64::from(bm.bpda.is_final(init.state));
        let mut sim = CounterSim {
            bm,
            budget,
            lanes: BTreeMap::new(),
        };
        sim.lanes.insert((init.state, init.stack), Lane::point(0, score));
        sim.close();
        Ok(sim)
    }

    fn bonus(&self, state: usize) -> i64 {
        i64::from(self.bm.bpda.is_final(state))
    }

    /// Applies a Γ-top rule to the configuration `(·, γ)` at counter 0.
    fn gamma_move(&self, r: &Rule, gamma: &[usize]) -> (usize, Vec<usize>) {
        let e = self.bm.e_symbol;
        let lead = r.push.iter().take_while(|&&z| z == e).count();
        let mut rest = r.push[lead..].to_vec();
        rest.extend_from_slice(&gamma[1..]);
        (lead, rest)
    }

    fn read(&mut self, a: usize) {
        let m = &self.bm.bpda.machine;
        let e = self.bm.e_symbol;
        let mut next: BTreeMap<(usize, Vec<usize>), Lane> = BTreeMap::new();
        let mut put = |key: (usize, Vec<usize>), lane: Lane| match next.get_mut(&key) {
            Some(old) => {
                old.merge(&lane);
            }
            None => {
                next.insert(key, lane);
            }
        };
        for ((s, gamma), lane) in &self.lanes {
            for r in m.rules_at(*s, e).filter(|r| r.input == Some(a)) {
                let delta = r.push.len() as isize - 1;
                if let Some(l) = lane.e_top(delta, self.bonus(r.to)) {
                    put((r.to, gamma.clone()), l);
                }
            }
            let score = lane.at(0);
            let Some(&top) = gamma.first() else { continue };
            if score == NONE {
                continue;
            }
            for r in m.rules_at(*s, top).filter(|r| r.input == Some(a)) {
                let (lead, rest) = self.gamma_move(r, gamma);
                put((r.to, rest), Lane::point(lead, score + self.bonus(r.to)));
            }
        }
        self.lanes = next;
        self.close();
    }

    /// λ-closure of the counter-0 configurations, at most `budget` layers.
    fn close(&mut self) {
        let m = &self.bm.bpda.machine;
        let mut frontier: Vec<((usize, Vec<usize>), i64)> = self
            .lanes
            .iter()
            .filter(|(_, l)| l.at(0) != NONE)
            .map(|(k, l)| (k.clone(), l.at(0)))
            .collect();
        for _ in 0..self.budget {
            let mut next = Vec::new();
            for ((s, gamma), score) in &frontier {
                let Some(&top) = gamma.first() else { continue };
                for r in m.rules_at(*s, top).filter(|r| r.input.is_none()) {
                    let (lead, rest) = self.gamma_move(r, gamma);
                    let sc = score + self.bonus(r.to);
                    let key = (r.to, rest);
                    let point = Lane::point(lead, sc);
                    let improved = match self.lanes.get_mut(&key) {
                        Some(l) => l.merge(&point),
                        None => {
                            self.lanes.insert(key.clone(), point);
                            true
                        }
                    };
                    if improved && lead == 0 {
                        next.push((key, sc));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }

    fn best(&self) -> usize {
        self.lanes.values().map(Lane::best).max().unwrap_or(0).max(0) as usize
    }

    fn configurations(&self) -> BTreeMap<Configuration, usize> {
        let e = self.bm.e_symbol;
        let mut out = BTreeMap::new();
        for ((s, gamma), lane) in &self.lanes {
            for (i, &score) in lane.v.iter().enumerate() {
                if score == NONE {
                    continue;
                }
                let mut stack = vec![e; lane.base + i];
                stack.extend_from_slice(gamma);
                out.insert(Configuration { state: *s, stack }, score as usize);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::infinitely_many_ones;
    use crate::pda::PushdownAutomaton;
    use crate::tree::level_homogeneous_tree;
    use crate::words::{sym, Lasso};

    fn ones_bpda() -> Bpda {
        Bpda::from_buchi(&infinitely_many_ones())
    }

    #[test]
    fn sizes() {
        let b = ones_bpda();
        let bm = BarMachine::build(&b, &sym("A")).unwrap();
        assert_eq!(bm.bpda.machine.states().len(), 6 * 2 + 1);
        assert_eq!(bm.bpda.finals().len(), 2);
        assert_eq!(bm.bpda.machine.stack_alphabet(), ["Z0", "E"]);
        assert!(bm.groups.iter().all(|g| g.len() == 1));
        assert!(BarMachine::build(&b, &sym("0")).is_err());
    }

    #[test]
    fn fresh_e_symbol() {
        let text = "states: s\nalphabet: a\nstack: E\ninitial: s\nstartstack: E\nfinal: s\ntrans: s a E -> s push(E)\n";
        let PushdownAutomaton::Buchi(b) = PushdownAutomaton::parse(text).unwrap() else { unreachable!() };
        let bm = BarMachine::build(&b, &sym("A")).unwrap();
        assert_eq!(bm.bpda.machine.stack_alphabet(), ["E", "E'"]);
    }

    #[test]
    fn branch_run_on_code_prefix() {
        let bm = BarMachine::build(&ones_bpda(), &sym("A")).unwrap();
        let sigma = Alphabet::from_tokens("0 1").unwrap();
        let t = level_homogeneous_tree(&Lasso::parse("(1)^w").unwrap(), &sigma).unwrap();
        let scores = bm.evidence(&t, 4, 0).unwrap();
        assert_eq!(scores, vec![1, 2, 3, 4, 5]);
        let t = level_homogeneous_tree(&Lasso::parse("(0)^w").unwrap(), &sigma).unwrap();
        assert_eq!(bm.evidence(&t, 4, 0).unwrap(), vec![0; 5]);
    }

    #[test]
    fn compressed_matches_explicit() {
        let bm = BarMachine::build(&ones_bpda(), &sym("A")).unwrap();
        let alphabet = bm.bpda.machine.alphabet().clone();
        for text in ["1A11A1111A", "0A10A0110A", "A1A1", "1AA0", "10A101A"] {
            let x = alphabet.encode(&crate::words::Word::parse(text).unwrap()).unwrap();
            let explicit = bm.bpda.bounded_runs(&x, 2);
            let compressed = bm.compressed_runs(&x, 2).unwrap();
            assert_eq!(explicit, compressed, "{text}");
        }
    }
}
