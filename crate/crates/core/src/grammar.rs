//! Context-free grammars over an [`Alphabet`] of terminals.
//!
//! Membership is decided with an Earley recognizer (nullable-aware predictor),
//! emptiness and λ-derivability with the usual productive/nullable fixpoints.
//! Grammars are immutable; the combinators (`concat`, `union`, `star`) and
//! [`Substitution::apply`] build fresh grammars by renaming nonterminals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{parse_err, Error, Result};
use crate::words::{Alphabet, Symbol, Word};

/// A grammar symbol: terminal letter index or nonterminal index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GSym {
    T(usize),
    N(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub head: usize,
    pub body: Vec<GSym>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    terminals: Alphabet,
    nonterminals: Vec<String>,
    start: usize,
    productions: Vec<Production>,
}

impl Cfg {
    pub fn new(
        terminals: Alphabet,
        nonterminals: Vec<String>,
        start: usize,
        productions: Vec<Production>,
    ) -> Result<Self> {
        if start >= nonterminals.len() {
            return Err(Error::InvalidGrammar("start symbol is not a nonterminal".into()));
        }
        let mut seen = HashSet::new();
        for n in &nonterminals {
            if n.is_empty() || n.contains(char::is_whitespace) || n == "#" || n == "|" {
                return Err(Error::InvalidGrammar(format!("bad nonterminal name `{n}`")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidGrammar(format!("duplicate nonterminal `{n}`")));
            }
            if terminals.letters().iter().any(|t| t.as_str() == n) {
                return Err(Error::InvalidGrammar(format!(
                    "`{n}` is both a terminal and a nonterminal"
                )));
            }
        }
        for p in &productions {
            let ok_head = p.head < nonterminals.len();
            let ok_body = p.body.iter().all(|s| match *s {
                GSym::T(t) => t < terminals.len(),
                GSym::N(n) => n < nonterminals.len(),
            });
            if !ok_head || !ok_body {
                return Err(Error::InvalidGrammar("production mentions an undeclared symbol".into()));
            }
        }
        let productions: Vec<Production> = productions
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Cfg {
            terminals,
            nonterminals,
            start,
            productions,
        })
    }

    /// The grammar of the empty language over `terminals`.
    pub fn empty_language(terminals: &Alphabet) -> Cfg {
        Cfg {
            terminals: terminals.clone(),
            nonterminals: vec!["S".into()],
            start: 0,
            productions: Vec::new(),
        }
    }

    /// `{ w }` for a single word.
    pub fn single_word(terminals: &Alphabet, w: &Word) -> Result<Cfg> {
        Cfg::finite(terminals, std::slice::from_ref(w))
    }

    /// A finite language.
    pub fn finite(terminals: &Alphabet, words: &[Word]) -> Result<Cfg> {
        let mut prods = Vec::new();
        for w in words {
            let body = terminals.encode(w)?.into_iter().map(GSym::T).collect();
            prods.push(Production { head: 0, body });
        }
        Cfg::new(terminals.clone(), vec!["S".into()], 0, prods)
    }

    /// Each letter of `letters` as a one-symbol word; `letters` ⊆ terminals.
    pub fn letters(terminals: &Alphabet, letters: &Alphabet) -> Result<Cfg> {
        let words: Vec<Word> = letters
            .letters()
            .iter()
            .map(|s| Word::from_symbols(vec![s.clone()]))
            .collect();
        Cfg::finite(terminals, &words)
    }

    pub fn terminals(&self) -> &Alphabet {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    fn by_head(&self) -> Vec<Vec<usize>> {
        let mut idx = vec![Vec::new(); self.nonterminals.len()];
        for (i, p) in self.productions.iter().enumerate() {
            idx[p.head].push(i);
        }
        idx
    }

    pub fn nullable(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for p in &self.productions {
                if !nullable[p.head]
                    && p.body.iter().all(|s| matches!(*s, GSym::N(n) if nullable[n]))
                {
                    nullable[p.head] = true;
                    changed = true;
                }
            }
        }
        nullable
    }

    pub fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for p in &self.productions {
                if !productive[p.head]
                    && p.body.iter().all(|s| match *s {
                        GSym::T(_) => true,
                        GSym::N(n) => productive[n],
                    })
                {
                    productive[p.head] = true;
                    changed = true;
                }
            }
        }
        productive
    }

    /// True iff the grammar generates no word.
    pub fn is_empty(&self) -> bool {
        !self.productive()[self.start]
    }

    pub fn generates_lambda(&self) -> bool {
        self.nullable()[self.start]
    }

    /// Removes non-productive, then unreachable nonterminals. The start symbol
    /// always survives, possibly without productions.
    pub fn trim(&self) -> Cfg {
        let productive = self.productive();
        let prods: Vec<&Production> = self
            .productions
            .iter()
            .filter(|p| {
                productive[p.head]
                    && p.body.iter().all(|s| match *s {
                        GSym::T(_) => true,
                        GSym::N(n) => productive[n],
                    })
            })
            .collect();
        let mut reachable = vec![false; self.nonterminals.len()];
        reachable[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(n) = stack.pop() {
            for p in prods.iter().filter(|p| p.head == n) {
                for s in &p.body {
                    if let GSym::N(m) = *s {
                        if !reachable[m] {
                            reachable[m] = true;
                            stack.push(m);
                        }
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nonterminals.len()];
        let mut names = Vec::new();
        for (i, name) in self.nonterminals.iter().enumerate() {
            if reachable[i] {
                remap[i] = names.len();
                names.push(name.clone());
            }
        }
        let productions = prods
            .into_iter()
            .filter(|p| reachable[p.head])
            .map(|p| Production {
                head: remap[p.head],
                body: p
                    .body
                    .iter()
                    .map(|s| match *s {
                        GSym::N(n) => GSym::N(remap[n]),
                        t => t,
                    })
                    .collect(),
            })
            .collect();
        Cfg::new(self.terminals.clone(), names, remap[self.start], productions)
            .expect("trimming preserves validity")
    }

    /// A grammar for `L ∖ {λ}`.
    pub fn without_lambda(&self) -> Cfg {
        let nullable = self.nullable();
        let mut prods = BTreeSet::new();
        for p in &self.productions {
            let optional: Vec<usize> = p
                .body
                .iter()
                .enumerate()
                .filter(|(_, s)| matches!(**s, GSym::N(n) if nullable[n]))
                .map(|(i, _)| i)
                .collect();
            for mask in 0u64..(1u64 << optional.len()) {
                let body: Vec<GSym> = p
                    .body
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| {
                        optional
                            .iter()
                            .position(|o| o == i)
                            .is_none_or(|bit| mask & (1 << bit) == 0)
                    })
                    .map(|(_, s)| *s)
                    .collect();
                if !body.is_empty() {
                    prods.insert(Production { head: p.head, body });
                }
            }
        }
        Cfg::new(
            self.terminals.clone(),
            self.nonterminals.clone(),
            self.start,
            prods.into_iter().collect(),
        )
        .expect("λ-removal preserves validity")
        .trim()
    }

    /// Splits right-hand sides longer than `max` (≥ 2) through fresh nonterminals.
    pub fn split_long_rules(&self, max: usize) -> Cfg {
        assert!(max >= 2);
        let mut names = self.nonterminals.clone();
        let mut taken: HashSet<String> = names.iter().cloned().collect();
        let mut prods = Vec::new();
        for p in &self.productions {
            let mut head = p.head;
            let mut body: &[GSym] = &p.body;
            while body.len() > max {
                let fresh = fresh_name(&format!("{}'", names[p.head]), &mut taken, &self.terminals);
                let id = names.len();
                names.push(fresh);
                let mut prefix = body[..max - 1].to_vec();
                prefix.push(GSym::N(id));
                prods.push(Production { head, body: prefix });
                head = id;
                body = &body[max - 1..];
            }
            prods.push(Production {
                head,
                body: body.to_vec(),
            });
        }
        Cfg::new(self.terminals.clone(), names, self.start, prods).expect("split preserves validity")
    }

    /// Membership of a word given as letter indices.
    pub fn accepts(&self, w: &[usize]) -> bool {
        self.accepted_prefixes(w)[w.len()]
    }

    /// Membership of a word over the terminal alphabet.
    pub fn member(&self, w: &Word) -> Result<bool> {
        Ok(self.accepts(&self.terminals.encode(w)?))
    }

    /// `result[k]` is true iff `w[..k]` is generated. Earley recognition with the
    /// Aycock–Horspool nullable treatment.
    pub fn accepted_prefixes(&self, w: &[usize]) -> Vec<bool> {
        let by_head = self.by_head();
        let nullable = self.nullable();
        let n = w.len();
        let mut sets: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<(usize, usize, usize)>> = vec![HashSet::new(); n + 1];
        let add = |sets: &mut Vec<Vec<_>>, seen: &mut Vec<HashSet<_>>, j: usize, item| {
            if seen[j].insert(item) {
                sets[j].push(item);
            }
        };
        for &p in &by_head[self.start] {
            add(&mut sets, &mut seen, 0, (p, 0, 0));
        }
        let mut accepted = vec![false; n + 1];
        for j in 0..=n {
            let mut k = 0;
            while k < sets[j].len() {
                let (p, dot, origin) = sets[j][k];
                k += 1;
                let body = &self.productions[p].body;
                match body.get(dot) {
                    Some(&GSym::N(b)) => {
                        for &q in &by_head[b] {
                            add(&mut sets, &mut seen, j, (q, 0, j));
                        }
                        if nullable[b] {
                            add(&mut sets, &mut seen, j, (p, dot + 1, origin));
                        }
                    }
                    Some(&GSym::T(a)) => {
                        if j < n && w[j] == a {
                            add(&mut sets, &mut seen, j + 1, (p, dot + 1, origin));
                        }
                    }
                    None => {
                        let head = self.productions[p].head;
                        if origin == 0 && head == self.start {
                            accepted[j] = true;
                        }
                        let waiting: Vec<_> = sets[origin]
                            .iter()
                            .filter(|&&(q, d, _)| {
                                self.productions[q].body.get(d) == Some(&GSym::N(head))
                            })
                            .copied()
                            .collect();
                        for (q, d, o) in waiting {
                            add(&mut sets, &mut seen, j, (q, d + 1, o));
                        }
                    }
                }
            }
        }
        accepted
    }

    /// For a finite labelled graph with `nodes` nodes and letter-labelled edges,
    /// `result[X][i]` is the set of nodes `j` such that `X` derives a word
    /// labelling some walk from `i` to `j`. Least fixpoint over productions.
    pub fn walk_summaries(&self, nodes: usize, edges: &[(usize, usize, usize)]) -> Vec<Vec<NodeSet>> {
        let mut term: Vec<Vec<NodeSet>> = vec![vec![NodeSet::new(nodes); nodes]; self.terminals.len()];
        for &(from, letter, to) in edges {
            term[letter][from].insert(to);
        }
        let mut sum: Vec<Vec<NodeSet>> = vec![vec![NodeSet::new(nodes); nodes]; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for p in &self.productions {
                for i in 0..nodes {
                    let mut frontier = NodeSet::new(nodes);
                    frontier.insert(i);
                    for s in &p.body {
                        let rel = match *s {
                            GSym::T(t) => &term[t],
                            GSym::N(m) => &sum[m],
                        };
                        let mut next = NodeSet::new(nodes);
                        for x in frontier.iter() {
                            next.union_with(&rel[x]);
                        }
                        frontier = next;
                        if frontier.is_empty() {
                            break;
                        }
                    }
                    if sum[p.head][i].union_with(&frontier) {
                        changed = true;
                    }
                }
            }
        }
        sum
    }

    /// Grammar-file text; see [`Cfg::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "terminals: {}", self.terminals.tokens());
        let _ = writeln!(out, "nonterminals: {}", self.nonterminals.join(" "));
        let by_head = self.by_head();
        if by_head[self.start].is_empty() {
            let _ = writeln!(out, "start: {}", self.nonterminals[self.start]);
        }
        let order = std::iter::once(self.start).chain((0..self.nonterminals.len()).filter(|&n| n != self.start));
        for head in order {
            if by_head[head].is_empty() {
                continue;
            }
            let alts: Vec<String> = by_head[head]
                .iter()
                .map(|&p| self.render_body(&self.productions[p].body))
                .collect();
            let _ = writeln!(out, "{} -> {}", self.nonterminals[head], alts.join(" | "));
        }
        out
    }

    fn render_body(&self, body: &[GSym]) -> String {
        if body.is_empty() {
            return "#".into();
        }
        body.iter()
            .map(|s| match *s {
                GSym::T(t) => self.terminals.symbol(t).as_str().to_string(),
                GSym::N(n) => self.nonterminals[n].clone(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses the grammar file format:
    ///
    /// ```text
    /// terminals: a b
    /// nonterminals: S T
    /// S -> a S b | #
    /// ```
    ///
    /// `#` is λ; the first production's head is the start symbol unless a
    /// `start:` line says otherwise.
    pub fn parse(text: &str) -> Result<Cfg> {
        let mut terminals = None;
        let mut names: Option<Vec<String>> = None;
        let mut start_name: Option<String> = None;
        let mut rules: Vec<(usize, String, Vec<Vec<String>>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            if let Some(rest) = line.strip_prefix("terminals:") {
                terminals = Some(Alphabet::from_tokens(rest).map_err(|e| parse_err(lineno, e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("nonterminals:") {
                names = Some(rest.split_whitespace().map(String::from).collect());
            } else if let Some(rest) = line.strip_prefix("start:") {
                start_name = Some(rest.trim().to_string());
            } else if let Some((head, rhs)) = line.split_once("->") {
                let alts = rhs
                    .split('|')
                    .map(|alt| {
                        alt.split_whitespace()
                            .filter(|t| *t != "#")
                            .map(String::from)
                            .collect()
                    })
                    .collect();
                rules.push((lineno, head.trim().to_string(), alts));
            } else {
                return Err(parse_err(lineno, format!("unrecognized line `{line}`")));
            }
        }
        let terminals = terminals.ok_or_else(|| parse_err(0, "missing `terminals:` line"))?;
        let names = match names {
            Some(n) => n,
            None => {
                let mut n: Vec<String> = Vec::new();
                for (_, h, _) in &rules {
                    if !n.contains(h) {
                        n.push(h.clone());
                    }
                }
                n
            }
        };
        let lookup: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let start_name = start_name
            .or_else(|| rules.first().map(|r| r.1.clone()))
            .ok_or_else(|| parse_err(0, "no productions and no `start:` line"))?;
        let start = *lookup
            .get(start_name.as_str())
            .ok_or_else(|| parse_err(0, format!("start `{start_name}` is not declared")))?;
        let mut prods = Vec::new();
        for (lineno, head, alts) in rules {
            let h = *lookup
                .get(head.as_str())
                .ok_or_else(|| parse_err(lineno, format!("undeclared nonterminal `{head}`")))?;
            for alt in alts {
                let body = alt
                    .iter()
                    .map(|tok| {
                        if let Some(&n) = lookup.get(tok.as_str()) {
                            Ok(GSym::N(n))
                        } else {
                            Symbol::new(tok.as_str())
                                .ok()
                                .and_then(|s| terminals.index_of(&s))
                                .map(GSym::T)
                                .ok_or_else(|| parse_err(lineno, format!("undeclared symbol `{tok}`")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                prods.push(Production { head: h, body });
            }
        }
        Cfg::new(terminals, names, start, prods)
    }

    /// `L(self) · L(other)`; both over the same terminals.
    pub fn concat(&self, other: &Cfg) -> Result<Cfg> {
        let mut b = CfgBuilder::new(self.terminals.clone());
        let s = b.fresh("S");
        let x = b.embed(self, "l")?;
        let y = b.embed(other, "r")?;
        b.rule(s, vec![GSym::N(x), GSym::N(y)]);
        Ok(b.build(s))
    }

    /// `L(self) ∪ L(other)`; both over the same terminals.
    pub fn union(&self, other: &Cfg) -> Result<Cfg> {
        let mut b = CfgBuilder::new(self.terminals.clone());
        let s = b.fresh("S");
        let x = b.embed(self, "l")?;
        let y = b.embed(other, "r")?;
        b.rule(s, vec![GSym::N(x)]);
        b.rule(s, vec![GSym::N(y)]);
        Ok(b.build(s))
    }

    /// Kleene star `L(self)*`.
    pub fn star(&self) -> Cfg {
        let mut b = CfgBuilder::new(self.terminals.clone());
        let s = b.fresh("S");
        let x = b.embed(self, "k").expect("same alphabet");
        b.rule(s, vec![]);
        b.rule(s, vec![GSym::N(x), GSym::N(s)]);
        b.build(s)
    }

    /// The same language re-expressed over a larger terminal alphabet.
    pub fn widen(&self, terminals: &Alphabet) -> Result<Cfg> {
        if terminals == &self.terminals {
            return Ok(self.clone());
        }
        let mut b = CfgBuilder::new(terminals.clone());
        let s = b.embed(self, "w")?;
        Ok(b.build(s))
    }
}

/// A small fixed-capacity bit set over graph nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSet {
    bits: Vec<u64>,
}

impl NodeSet {
    pub fn new(capacity: usize) -> Self {
        NodeSet {
            bits: vec![0; capacity.div_ceil(64).max(1)],
        }
    }

    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn union_with(&mut self, other: &NodeSet) -> bool {
        let mut changed = false;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            let merged = *a | *b;
            changed |= merged != *a;
            *a = merged;
        }
        changed
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| wi * 64 + b)
        })
    }
}

fn fresh_name(base: &str, taken: &mut HashSet<String>, terminals: &Alphabet) -> String {
    let clash = |n: &str, taken: &HashSet<String>| {
        taken.contains(n) || terminals.letters().iter().any(|t| t.as_str() == n)
    };
    let mut name = base.to_string();
    let mut k = 1;
    while clash(&name, taken) {
        name = format!("{base}{k}");
        k += 1;
    }
    taken.insert(name.clone());
    name
}

/// Incremental grammar construction with fresh-name management.
pub struct CfgBuilder {
    terminals: Alphabet,
    names: Vec<String>,
    taken: HashSet<String>,
    prods: Vec<Production>,
}

impl CfgBuilder {
    pub fn new(terminals: Alphabet) -> Self {
        CfgBuilder {
            terminals,
            names: Vec::new(),
            taken: HashSet::new(),
            prods: Vec::new(),
        }
    }

    pub fn fresh(&mut self, base: &str) -> usize {
        let name = fresh_name(base, &mut self.taken, &self.terminals);
        self.names.push(name);
        self.names.len() - 1
    }

    /// Terminal by token; panics if undeclared (builder misuse).
    pub fn t(&self, token: &str) -> GSym {
        let s = Symbol::new(token).expect("terminal token");
        GSym::T(self.terminals.index_of(&s).expect("terminal declared"))
    }

    pub fn t_sym(&self, s: &Symbol) -> GSym {
        GSym::T(self.terminals.index_of(s).expect("terminal declared"))
    }

    pub fn rule(&mut self, head: usize, body: Vec<GSym>) {
        self.prods.push(Production { head, body });
    }

    /// Copies `g` in with prefixed nonterminal names; returns the copy's start.
    /// Terminals are matched by symbol and must all exist in this builder.
    pub fn embed(&mut self, g: &Cfg, prefix: &str) -> Result<usize> {
        let tmap = g
            .terminals
            .letters()
            .iter()
            .map(|s| {
                self.terminals
                    .index_of(s)
                    .ok_or_else(|| Error::AlphabetMismatch(format!("terminal `{s}` not available")))
            })
            .collect::<Result<Vec<_>>>()?;
        let base = self.names.len();
        for n in &g.nonterminals {
            let name = fresh_name(&format!("{prefix}.{n}"), &mut self.taken, &self.terminals);
            self.names.push(name);
        }
        for p in &g.productions {
            self.prods.push(Production {
                head: base + p.head,
                body: p
                    .body
                    .iter()
                    .map(|s| match *s {
                        GSym::T(t) => GSym::T(tmap[t]),
                        GSym::N(n) => GSym::N(base + n),
                    })
                    .collect(),
            });
        }
        Ok(base + g.start)
    }

    pub fn build(self, start: usize) -> Cfg {
        Cfg::new(self.terminals, self.names, start, self.prods).expect("builder produces valid grammars")
    }
}

/// The terminal alphabet `Σ ∪ {A}` used by the coding languages.
pub fn with_separator(sigma: &Alphabet, separator: &Symbol) -> Result<Alphabet> {
    sigma.with(separator)
}

fn letter_nt(b: &mut CfgBuilder, sigma: &Alphabet) -> usize {
    let l = b.fresh("L");
    for s in sigma.letters() {
        let t = b.t_sym(s);
        b.rule(l, vec![t]);
    }
    l
}

/// `D = { u·A·v : u, v ∈ Σ*, |v| = 2|u| or |v| = 2|u|+1 }` over `Σ ∪ {A}`.
pub fn build_d(sigma: &Alphabet, separator: &Symbol) -> Result<Cfg> {
    let terminals = with_separator(sigma, separator)?;
    let mut b = CfgBuilder::new(terminals);
    let s = b.fresh("D");
    let l = letter_nt(&mut b, sigma);
    let a = b.t_sym(separator);
    let (s_, l_) = (GSym::N(s), GSym::N(l));
    b.rule(s, vec![l_, s_, l_, l_]);
    b.rule(s, vec![a]);
    b.rule(s, vec![a, l_]);
    Ok(b.build(s))
}

/// `B₁ = { A·u·A·v·A : u, v ∈ Σ*, |v| < 2|u| }`.
pub fn build_b1(sigma: &Alphabet, separator: &Symbol) -> Result<Cfg> {
    let terminals = with_separator(sigma, separator)?;
    let mut b = CfgBuilder::new(terminals);
    let s = b.fresh("B1");
    let p = b.fresh("P");
    let l = letter_nt(&mut b, sigma);
    let a = b.t_sym(separator);
    let (p_, l_) = (GSym::N(p), GSym::N(l));
    b.rule(s, vec![a, p_, a]);
    // each step adds one letter to u and 0..=2 letters to v; the innermost
    // step adds u = 1 letter and |v| ≤ 1, hence |v| ≤ 2|u| - 1 overall
    b.rule(p, vec![l_, p_, l_, l_]);
    b.rule(p, vec![l_, p_, l_]);
    b.rule(p, vec![l_, p_]);
    b.rule(p, vec![l_, a]);
    b.rule(p, vec![l_, a, l_]);
    Ok(b.build(s))
}

/// `B₂ = { A·u·A·v : u, v ∈ Σ*, |v| > 2|u| }`.
pub fn build_b2(sigma: &Alphabet, separator: &Symbol) -> Result<Cfg> {
    let terminals = with_separator(sigma, separator)?;
    let mut b = CfgBuilder::new(terminals);
    let s = b.fresh("B2");
    let q = b.fresh("Q");
    let r = b.fresh("R");
    let l = letter_nt(&mut b, sigma);
    let a = b.t_sym(separator);
    let (q_, r_, l_) = (GSym::N(q), GSym::N(r), GSym::N(l));
    b.rule(s, vec![a, q_]);
    b.rule(q, vec![l_, q_, l_, l_]);
    b.rule(q, vec![a, r_]);
    b.rule(r, vec![l_, r_]);
    b.rule(r, vec![l_]);
    Ok(b.build(s))
}

/// `0*·1` over `{0, 1}`, the base language of the ω-power `(0*·1)^ω`.
pub fn zeros_then_one() -> Cfg {
    Cfg::parse("terminals: 0 1\nnonterminals: W\nW -> 0 W | 1\n").expect("literal grammar")
}

/// `{ 0ⁿ1ⁿ : n ≥ 1 }` over `{0, 1}`.
pub fn zeros_ones_balanced() -> Cfg {
    Cfg::parse("terminals: 0 1\nnonterminals: V\nV -> 0 V 1 | 0 1\n").expect("literal grammar")
}

/// A letter-to-language map, extended letterwise to words and languages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Cfg>,
    words: Vec<Option<Word>>,
}

impl Substitution {
    /// One grammar per source letter, all over the common `target` alphabet.
    pub fn new(source: Alphabet, target: Alphabet, images: Vec<Cfg>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::DomainMismatch(format!(
                "{} images for {} source letters",
                images.len(),
                source.len()
            )));
        }
        let images = images
            .into_iter()
            .map(|g| g.widen(&target))
            .collect::<Result<Vec<_>>>()?;
        let words = vec![None; source.len()];
        Ok(Substitution {
            source,
            target,
            images,
            words,
        })
    }

    /// A morphism: every letter maps to exactly one word.
    pub fn morphism(source: Alphabet, target: Alphabet, words: Vec<Word>) -> Result<Self> {
        let images = words
            .iter()
            .map(|w| Cfg::single_word(&target, w))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Substitution::new(source, target, images)?;
        s.words = words.into_iter().map(Some).collect();
        Ok(s)
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn image(&self, letter: usize) -> &Cfg {
        &self.images[letter]
    }

    pub fn is_morphism(&self) -> bool {
        self.words.iter().all(Option::is_some)
    }

    pub fn is_lambda_free(&self) -> bool {
        self.images.iter().all(|g| !g.generates_lambda())
    }

    /// First source letter whose image contains λ.
    pub fn lambda_letter(&self) -> Option<&Symbol> {
        self.images
            .iter()
            .position(Cfg::generates_lambda)
            .map(|i| self.source.symbol(i))
    }

    /// Image of a word under a morphism; `None` for proper substitutions.
    pub fn apply_word(&self, w: &Word) -> Option<Word> {
        let mut out = Word::empty();
        for s in w.symbols() {
            let i = self.source.index_of(s)?;
            out = out.concat(self.words[i].as_ref()?);
        }
        Some(out)
    }

    /// A grammar for `f(L(g))`.
    pub fn apply(&self, g: &Cfg) -> Result<Cfg> {
        if g.terminals() != &self.source {
            return Err(Error::DomainMismatch(format!(
                "grammar terminals `{}` vs substitution domain `{}`",
                g.terminals().tokens(),
                self.source.tokens()
            )));
        }
        let mut b = CfgBuilder::new(self.target.clone());
        let letter_starts: Vec<usize> = self
            .images
            .iter()
            .enumerate()
            .map(|(i, img)| b.embed(img, &format!("f{i}")))
            .collect::<Result<_>>()?;
        let base = b.names.len();
        for n in &g.nonterminals {
            let name = fresh_name(&format!("g.{n}"), &mut b.taken, &b.terminals);
            b.names.push(name);
        }
        for p in &g.productions {
            let body = p
                .body
                .iter()
                .map(|s| match *s {
                    GSym::T(t) => GSym::N(letter_starts[t]),
                    GSym::N(n) => GSym::N(base + n),
                })
                .collect();
            b.rule(base + p.head, body);
        }
        Ok(b.build(base + g.start))
    }

    /// Substitution-file text: `source:` / `target:` headers, then one
    /// `map: x -> word` line per letter (morphisms only).
    pub fn to_text(&self) -> Option<String> {
        let mut out = String::new();
        let _ = writeln!(out, "source: {}", self.source.tokens());
        let _ = writeln!(out, "target: {}", self.target.tokens());
        for (i, w) in self.words.iter().enumerate() {
            let w = w.as_ref()?;
            let rendered = if w.is_empty() { "#".to_string() } else { w.dotted() };
            let _ = writeln!(out, "map: {} -> {}", self.source.symbol(i), rendered);
        }
        Some(out)
    }
}

impl Substitution {
    /// Parses a substitution file: `source:` and `target:` alphabets, then
    /// one `map:` line per source letter, either `map: x -> word` (`#` for
    /// λ) or `map: x -> grammar FILE` with `FILE` relative to `path`.
    pub fn read_file(path: &Path) -> Result<Substitution> {
        let text = crate::kleene::read(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut source = None;
        let mut target = None;
        let mut maps: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected `key: value`, got `{line}`")))?;
            let rest = rest.trim();
            match key.trim() {
                "source" => source = Some(Alphabet::from_tokens(rest).map_err(|e| parse_err(lineno, e.to_string()))?),
                "target" => target = Some(Alphabet::from_tokens(rest).map_err(|e| parse_err(lineno, e.to_string()))?),
                "map" => {
                    let (x, image) = rest
                        .split_once("->")
                        .ok_or_else(|| parse_err(lineno, "expected `map: x -> image`"))?;
                    maps.push((lineno, x.trim().to_string(), image.trim().to_string()));
                }
                other => return Err(parse_err(lineno, format!("unknown key `{other}`"))),
            }
        }
        let source = source.ok_or_else(|| parse_err(0, "missing `source:` line"))?;
        let target = target.ok_or_else(|| parse_err(0, "missing `target:` line"))?;
        let mut images: Vec<Option<(Option<Word>, Cfg)>> = vec![None; source.len()];
        for (lineno, x, image) in maps {
            let i = source
                .index_of(&Symbol::new(x.as_str()).map_err(|e| parse_err(lineno, e.to_string()))?)
                .ok_or_else(|| parse_err(lineno, format!("`{x}` is not a source letter")))?;
            if images[i].is_some() {
                return Err(parse_err(lineno, format!("second `map:` line for `{x}`")));
            }
            let entry = if let Some(file) = image.strip_prefix("grammar ") {
                let g = Cfg::parse(&crate::kleene::read(&dir.join(file.trim()))?)?;
                (None, g)
            } else {
                let w = if image == "#" {
                    Word::empty()
                } else {
                    Word::parse_with(&image, &target).map_err(|e| parse_err(lineno, e.to_string()))?
                };
                let g = Cfg::single_word(&target, &w)?;
                (Some(w), g)
            };
            images[i] = Some(entry);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| parse_err(0, format!("no `map:` line for `{}`", source.symbol(i)))))
            .collect::<Result<Vec<_>>>()?;
        if images.iter().all(|(w, _)| w.is_some()) {
            let words = images.into_iter().map(|(w, _)| w.expect("checked")).collect();
            return Substitution::morphism(source, target, words);
        }
        Substitution::new(source, target, images.into_iter().map(|(_, g)| g).collect())
    }
}

/// The λ-free morphism `a→bab, b→ba²b, c→ba³b, ↝→ba⁴b, d→ba⁵b, A→ba⁶b`
/// from `{a, b, c, ↝, d, A}` onto `{a, b}`.
pub fn bar_g() -> Substitution {
    let source = Alphabet::from_tokens("a b c ↝ d A").expect("literal alphabet");
    let target = Alphabet::from_tokens("a b").expect("literal alphabet");
    let words = (1..=6)
        .map(|i| Word::parse(&format!("b{}b", "a".repeat(i))).expect("literal word"))
        .collect();
    Substitution::morphism(source, target, words).expect("well-formed morphism")
}

/// The substitution `x → x·D` for every `x ∈ Σ`, into `Σ ∪ {A}`.
pub fn branch_insertion(sigma: &Alphabet, separator: &Symbol) -> Result<Substitution> {
    let d = build_d(sigma, separator)?;
    let target = d.terminals().clone();
    let images = sigma
        .letters()
        .iter()
        .map(|x| {
            let prefix = Cfg::single_word(&target, &Word::from_symbols(vec![x.clone()]))?;
            prefix.concat(&d)
        })
        .collect::<Result<Vec<_>>>()?;
    Substitution::new(sigma.clone(), target, images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::sym;

    fn sigma_a() -> Alphabet {
        Alphabet::from_tokens("a").unwrap()
    }

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn d_membership_examples() {
        let d = build_d(&sigma_a(), &sym("A")).unwrap();
        assert!(d.member(&w("a.A.aa")).unwrap());
        assert!(!d.member(&w("a.A.a")).unwrap());
        assert!(d.member(&w("A")).unwrap());
        assert!(d.member(&w("aa.A.aaaa")).unwrap());
        assert!(d.member(&w("A.a")).unwrap());
        assert!(!d.is_empty());
        assert!(!d.generates_lambda());
    }

    #[test]
    fn separator_clash_rejected() {
        let sigma = Alphabet::from_tokens("a A").unwrap();
        assert!(matches!(build_d(&sigma, &sym("A")), Err(Error::SeparatorClash(_))));
        assert!(build_b1(&sigma, &sym("A")).is_err());
        assert!(build_b2(&sigma, &sym("A")).is_err());
    }

    #[test]
    fn b1_b2_examples() {
        let b1 = build_b1(&sigma_a(), &sym("A")).unwrap();
        let b2 = build_b2(&sigma_a(), &sym("A")).unwrap();
        assert!(b1.member(&w("A.a.A.A")).unwrap());
        assert!(b2.member(&w("A.a.A.aaa")).unwrap());
        assert!(!b1.member(&w("A.a.A.aa.A")).unwrap());
    }

    #[test]
    fn emptiness_and_lambda() {
        let t = Alphabet::from_tokens("a").unwrap();
        assert!(Cfg::empty_language(&t).is_empty());
        let loop_only = Cfg::parse("terminals: a\nS -> a S\n").unwrap();
        assert!(loop_only.is_empty());
        let lam = Cfg::parse("terminals: a\nS -> #\n").unwrap();
        assert!(lam.generates_lambda());
        let one = Cfg::parse("terminals: a\nS -> a\n").unwrap();
        assert!(!one.generates_lambda());
    }

    #[test]
    fn earley_handles_nullable_chains() {
        let g = Cfg::parse("terminals: a b\nS -> X S b | X\nX -> Y Y\nY -> # | a\n").unwrap();
        assert!(g.member(&Word::empty()).unwrap());
        assert!(g.member(&w("b")).unwrap());
        assert!(g.member(&w("aab")).unwrap());
        assert!(g.member(&w("aaab")).unwrap());
        assert!(!g.member(&w("aaaaab")).unwrap());
        assert!(g.member(&w("aaabb")).unwrap());
    }

    #[test]
    fn lambda_removal_and_split() {
        let g = Cfg::parse("terminals: a b\nS -> a S b | #\n").unwrap();
        let h = g.without_lambda();
        assert!(!h.generates_lambda());
        assert!(h.member(&w("ab")).unwrap());
        assert!(h.member(&w("aabb")).unwrap());
        let long = Cfg::parse("terminals: a b\nS -> a b a b a b | a\n").unwrap();
        let split = long.split_long_rules(4);
        assert!(split.productions().iter().all(|p| p.body.len() <= 4));
        assert!(split.member(&w("ababab")).unwrap());
        assert!(!split.member(&w("abab")).unwrap());
    }

    #[test]
    fn combinators() {
        let t = Alphabet::from_tokens("a b").unwrap();
        let a = Cfg::single_word(&t, &w("a")).unwrap();
        let b = Cfg::single_word(&t, &w("b")).unwrap();
        let ab = a.concat(&b).unwrap();
        assert!(ab.member(&w("ab")).unwrap() && !ab.member(&w("ba")).unwrap());
        let u = a.union(&b).unwrap().star();
        assert!(u.member(&Word::empty()).unwrap());
        assert!(u.member(&w("abba")).unwrap());
    }

    #[test]
    fn bar_g_images() {
        let g = bar_g();
        assert!(g.is_lambda_free());
        assert!(g.is_morphism());
        let im = |x: &str| g.apply_word(&Word::parse_with(x, g.source()).unwrap()).unwrap();
        assert_eq!(im("d"), w("baaaaab"));
        assert_eq!(im("aA"), w("bab.baaaaaab"));
        assert_eq!(im("cA"), w("baaab.baaaaaab"));
        assert_eq!(im("↝"), w("baaaab"));
    }

    #[test]
    fn morphism_on_grammar() {
        let g = bar_g();
        let src = g.source().clone();
        let lang = Cfg::single_word(&src, &Word::parse_with("aA", &src).unwrap()).unwrap();
        let image = g.apply(&lang).unwrap();
        assert!(image.member(&w("bab.baaaaaab")).unwrap());
        assert!(!image.member(&w("bab")).unwrap());
    }

    #[test]
    fn substitution_domain_mismatch() {
        let g = bar_g();
        let other = Cfg::parse("terminals: x\nS -> x\n").unwrap();
        assert!(matches!(g.apply(&other), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn branch_insertion_image() {
        let sigma = Alphabet::from_tokens("a b").unwrap();
        let g = branch_insertion(&sigma, &sym("A")).unwrap();
        assert!(g.is_lambda_free());
        let ab = Cfg::single_word(&sigma, &w("ab")).unwrap();
        let image = g.apply(&ab).unwrap();
        assert!(image.member(&w("aAbA")).unwrap());
        assert!(image.member(&w("aAbbAbb")).unwrap());
        assert!(image.member(&w("aAbAa")).unwrap());
        assert!(!image.member(&w("aAbAaa")).unwrap());
        assert!(!image.member(&w("ab")).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let d = build_d(&sigma_a(), &sym("A")).unwrap();
        let text = d.to_text();
        assert_eq!(Cfg::parse(&text).unwrap(), d);
        let empty = Cfg::empty_language(&sigma_a());
        assert_eq!(Cfg::parse(&empty.to_text()).unwrap(), empty);
        assert!(Cfg::parse("terminals: a\nS -> b\n").is_err());
    }

    #[test]
    fn walk_summaries_on_cycle() {
        // two-node cycle 0 -a-> 1 -b-> 0
        let g = Cfg::parse("terminals: a b\nS -> a b | a b S\n").unwrap();
        let sum = g.walk_summaries(2, &[(0, 0, 1), (1, 1, 0)]);
        assert!(sum[g.start()][0].contains(0));
        assert!(!sum[g.start()][0].contains(1));
        assert!(sum[g.start()][1].is_empty());
    }
}
