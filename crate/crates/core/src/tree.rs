//! Regular infinite binary trees and their level-by-level coding.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{parse_err, Error, Result};
use crate::grammar::{build_b1, build_b2, with_separator, Cfg};
use crate::kleene::OmegaKleeneExpr;
use crate::words::{Alphabet, Lasso, Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    L,
    R,
}

/// A node address in `{l, r}*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node(pub Vec<Dir>);

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        for d in &self.0 {
            f.write_str(match d {
                Dir::L => "l",
                Dir::R => "r",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Lex,
    RevLex,
}

/// The `2ⁿ` nodes of level `n` in the given order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelEnumeration {
    pub level: usize,
    pub nodes: Vec<Node>,
}

/// `C_n` in lexicographic order (`l` before `r`) or its reverse.
pub fn level_nodes(n: usize, order: Order) -> LevelEnumeration {
    let mut nodes: Vec<Node> = (0..1usize << n)
        .map(|i| Node((0..n).rev().map(|b| if i >> b & 1 == 0 { Dir::L } else { Dir::R }).collect()))
        .collect();
    if order == Order::RevLex {
        nodes.reverse();
    }
    LevelEnumeration { level: n, nodes }
}

/// Order of level `n` in the coding: level 0 and odd levels lexicographic,
/// even levels from 2 on reverse-lexicographic.
pub fn coding_order(n: usize) -> Order {
    if n >= 2 && n % 2 == 0 {
        Order::RevLex
    } else {
        Order::Lex
    }
}

/// A finitely presented labelling `t: {l, r}* → Σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularTree {
    labels: Alphabet,
    names: Vec<String>,
    initial: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    label: Vec<usize>,
}

impl RegularTree {
    /// `nodes[s] = (left, right, label)`.
    pub fn new(labels: Alphabet, names: Vec<String>, initial: usize, nodes: Vec<(usize, usize, usize)>) -> Result<Self> {
        let n = names.len();
        if n == 0 || nodes.len() != n || initial >= n {
            return Err(Error::InvalidTree("every node-state needs exactly one `node:` entry".into()));
        }
        if nodes.iter().any(|&(l, r, x)| l >= n || r >= n || x >= labels.len()) {
            return Err(Error::InvalidTree("successor or label out of range".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &names {
            if s.is_empty() || s.contains(char::is_whitespace) || !seen.insert(s) {
                return Err(Error::InvalidTree(format!("bad or duplicate node-state `{s}`")));
            }
        }
        Ok(RegularTree {
            labels,
            names,
            initial,
            left: nodes.iter().map(|t| t.0).collect(),
            right: nodes.iter().map(|t| t.1).collect(),
            label: nodes.iter().map(|t| t.2).collect(),
        })
    }

    pub fn labels(&self) -> &Alphabet {
        &self.labels
    }

    pub fn node_states(&self) -> usize {
        self.names.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn left(&self, s: usize) -> usize {
        self.left[s]
    }

    pub fn right(&self, s: usize) -> usize {
        self.right[s]
    }

    pub fn label_of_state(&self, s: usize) -> usize {
        self.label[s]
    }

    pub fn state_at(&self, x: &Node) -> usize {
        x.0.iter().fold(self.initial, |s, d| match d {
            Dir::L => self.left[s],
            Dir::R => self.right[s],
        })
    }

    /// `t(x)`.
    pub fn label_at(&self, x: &Node) -> &Symbol {
        self.labels.symbol(self.label[self.state_at(x)])
    }

    /// Node-states of level `n` in lexicographic order.
    fn level_states(&self, levels: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![self.initial]];
        for _ in 0..levels {
            let prev = out.last().expect("non-empty");
            let next = prev.iter().flat_map(|&s| [self.left[s], self.right[s]]).collect();
            out.push(next);
        }
        out
    }

    /// The coding through level `levels`: each level's labels in coding order,
    /// followed by the separator.
    pub fn h_prefix(&self, levels: usize, separator: &Symbol) -> Result<Word> {
        if self.labels.contains(separator) {
            return Err(Error::SeparatorClash(separator.to_string()));
        }
        let mut out = Vec::with_capacity((2usize << levels) + levels + 1);
        for (n, states) in self.level_states(levels).into_iter().enumerate() {
            let labels = states.iter().map(|&s| self.labels.symbol(self.label[s]).clone());
            match coding_order(n) {
                Order::Lex => out.extend(labels),
                Order::RevLex => out.extend(labels.rev()),
            }
            out.push(separator.clone());
        }
        Ok(Word::from_symbols(out))
    }

    /// The leftmost path `t(λ)t(l)t(ll)…`.
    pub fn leftmost(&self) -> Lasso {
        let mut first_seen = HashMap::new();
        let mut walk = Vec::new();
        let mut s = self.initial;
        while !first_seen.contains_key(&s) {
            first_seen.insert(s, walk.len());
            walk.push(s);
            s = self.left[s];
        }
        let start = first_seen[&s];
        let sym = |s: &usize| self.labels.symbol(self.label[*s]).clone();
        let spoke = walk[..start].iter().map(sym).collect();
        let cycle = walk[start..].iter().map(sym).collect();
        Lasso::new(spoke, cycle).expect("cycle is non-empty").normalize()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "labels: {}", self.labels.tokens());
        let _ = writeln!(out, "nodes: {}", self.names.join(" "));
        let _ = writeln!(out, "initial: {}", self.names[self.initial]);
        for s in 0..self.names.len() {
            let _ = writeln!(
                out,
                "node: {} label {} left {} right {}",
                self.names[s],
                self.labels.symbol(self.label[s]),
                self.names[self.left[s]],
                self.names[self.right[s]]
            );
        }
        out
    }

    /// Parses `labels:`, `nodes:`, `initial:` and
    /// `node: s label x left s1 right s2` lines.
    pub fn parse(text: &str) -> Result<RegularTree> {
        let mut labels = None;
        let mut names: Option<Vec<String>> = None;
        let mut initial = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("unrecognized line `{line}`")))?;
            match key.trim() {
                "labels" => labels = Some(Alphabet::from_tokens(rest).map_err(|e| parse_err(lineno, e.to_string()))?),
                "nodes" => names = Some(rest.split_whitespace().map(String::from).collect()),
                "initial" => initial = Some((lineno, rest.trim().to_string())),
                "node" => entries.push((lineno, rest.split_whitespace().map(String::from).collect::<Vec<_>>())),
                other => return Err(parse_err(lineno, format!("unknown key `{other}`"))),
            }
        }
        let labels: Alphabet = labels.ok_or_else(|| parse_err(0, "missing `labels:` line"))?;
        let names = names.ok_or_else(|| parse_err(0, "missing `nodes:` line"))?;
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let state = |lineno: usize, n: &str| {
            index.get(n).copied().ok_or_else(|| parse_err(lineno, format!("undeclared node-state `{n}`")))
        };
        let (il, iname) = initial.ok_or_else(|| parse_err(0, "missing `initial:` line"))?;
        let init = state(il, &iname)?;
        let mut nodes: Vec<Option<(usize, usize, usize)>> = vec![None; names.len()];
        for (lineno, words) in entries {
            let [s, kl, x, kleft, l, kright, r] = words.as_slice() else {
                return Err(parse_err(lineno, "expected `node: s label x left s1 right s2`"));
            };
            if kl != "label" || kleft != "left" || kright != "right" {
                return Err(parse_err(lineno, "expected `node: s label x left s1 right s2`"));
            }
            let letter = Symbol::new(x.as_str())
                .ok()
                .and_then(|sym| labels.index_of(&sym))
                .ok_or_else(|| parse_err(lineno, format!("label `{x}` not declared")))?;
            let si = state(lineno, s)?;
            if nodes[si].is_some() {
                return Err(parse_err(lineno, format!("node-state `{s}` defined twice")));
            }
            nodes[si] = Some((state(lineno, l)?, state(lineno, r)?, letter));
        }
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| parse_err(0, format!("node-state `{}` has no `node:` line", names[i]))))
            .collect::<Result<Vec<_>>>()?;
        RegularTree::new(labels, names, init, nodes).map_err(|e| parse_err(0, e.to_string()))
    }
}

/// The tree with `w` as leftmost path and the separator everywhere else.
pub fn f_embed(w: &Lasso, sigma: &Alphabet, separator: &Symbol) -> Result<RegularTree> {
    let labels = with_separator(sigma, separator)?;
    let letters = w.position_letters(sigma)?;
    let l = w.positions();
    let sink = l;
    let mut names: Vec<String> = (0..l).map(|p| format!("p{p}")).collect();
    names.push("sink".into());
    let sep = labels.index_of(separator).expect("separator added");
    let mut nodes: Vec<(usize, usize, usize)> = (0..l).map(|p| (w.next_position(p), sink, letters[p])).collect();
    nodes.push((sink, sink, sep));
    RegularTree::new(labels, names, 0, nodes)
}

/// The leftmost path of `t`.
pub fn j_leftmost(t: &RegularTree) -> Lasso {
    t.leftmost()
}

/// The tree with `t(x) = w(|x|)`: every path spells `w`.
pub fn level_homogeneous_tree(w: &Lasso, sigma: &Alphabet) -> Result<RegularTree> {
    let letters = w.position_letters(sigma)?;
    let l = w.positions();
    let names = (0..l).map(|p| format!("p{p}")).collect();
    let nodes = (0..l)
        .map(|p| {
            let n = w.next_position(p);
            (n, n, letters[p])
        })
        .collect();
    RegularTree::new(sigma.clone(), names, 0, nodes)
}

/// The finite prefix set of `A₁`: `A ∪ Σ² ∪ Σ·A·A ∪ Σ·A·Σ·A ∪ Σ·A·Σ³`.
pub fn a1_prefixes(sigma: &Alphabet, separator: &Symbol) -> Vec<Word> {
    let letters: Vec<Word> = sigma.letters().iter().map(|s| Word::from_symbols(vec![s.clone()])).collect();
    let a = Word::from_symbols(vec![separator.clone()]);
    let product = |parts: &[&[Word]]| -> Vec<Word> {
        parts.iter().fold(vec![Word::empty()], |acc, choices| {
            acc.iter().flat_map(|w| choices.iter().map(move |c| w.concat(c))).collect()
        })
    };
    let just_a = std::slice::from_ref(&a);
    let mut out = vec![a.clone()];
    out.extend(product(&[&letters, &letters]));
    out.extend(product(&[&letters, just_a, just_a]));
    out.extend(product(&[&letters, just_a, &letters, just_a]));
    out.extend(product(&[&letters, just_a, &letters, &letters, &letters]));
    out
}

/// An expression for the lassos over `Σ ∪ {A}` that are not codes of trees:
/// a bad start (`A₁`) or a gap pair violating the doubling (`B₁`, `B₂`).
pub fn coding_complement_expr(sigma: &Alphabet, separator: &Symbol) -> Result<OmegaKleeneExpr> {
    let sigma_a = with_separator(sigma, separator)?;
    let any = Cfg::letters(&sigma_a, &sigma_a)?;
    let a1 = Cfg::finite(&sigma_a, &a1_prefixes(sigma, separator))?;
    let star = any.star();
    let b1 = star.concat(&build_b1(sigma, separator)?)?;
    let b2 = star.concat(&build_b2(sigma, separator)?)?;
    OmegaKleeneExpr::new(vec![(a1, any.clone()), (b1, any.clone()), (b2, any)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::sym;

    fn constant(x: &str) -> RegularTree {
        let labels = Alphabet::from_tokens(x).unwrap();
        RegularTree::new(labels, vec!["s".into()], 0, vec![(0, 0, 0)]).unwrap()
    }

    #[test]
    fn level_examples() {
        let show = |n, o| level_nodes(n, o).nodes.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(show(1, Order::Lex), ["l", "r"]);
        assert_eq!(show(3, Order::Lex), ["lll", "llr", "lrl", "lrr", "rll", "rlr", "rrl", "rrr"]);
        assert_eq!(show(0, Order::Lex), ["λ"]);
    }

    #[test]
    fn constant_tree_coding() {
        let t = constant("a");
        let h = t.h_prefix(3, &sym("A")).unwrap();
        assert_eq!(h, Word::parse("a.A.aa.A.aaaa.A.aaaaaaaa.A").unwrap());
        assert_eq!(t.h_prefix(0, &sym("A")).unwrap(), Word::parse("aA").unwrap());
        assert!(constant("A").h_prefix(1, &sym("A")).is_err());
    }

    #[test]
    fn parity_tree_coding() {
        // a at even depth, b at odd depth
        let labels = Alphabet::from_tokens("a b").unwrap();
        let t = RegularTree::new(labels, vec!["e".into(), "o".into()], 0, vec![(1, 1, 0), (0, 0, 1)]).unwrap();
        assert_eq!(t.h_prefix(2, &sym("A")).unwrap(), Word::parse("a.A.bb.A.aaaa.A").unwrap());
        let sigma = Alphabet::from_tokens("0 1").unwrap();
        let h = level_homogeneous_tree(&Lasso::parse("(01)^w").unwrap(), &sigma).unwrap();
        assert_eq!(h.h_prefix(2, &sym("A")).unwrap(), Word::parse("0.A.11.A.0000.A").unwrap());
    }

    #[test]
    fn revlex_levels_reverse_labels() {
        // t(x) = last direction of x
        let labels = Alphabet::from_tokens("x l r").unwrap();
        let t = RegularTree::new(
            labels,
            vec!["root".into(), "L".into(), "R".into()],
            0,
            vec![(1, 2, 0), (1, 2, 1), (1, 2, 2)],
        )
        .unwrap();
        let h = t.h_prefix(2, &sym("A")).unwrap();
        // level 2 in order rr, rl, lr, ll
        assert_eq!(h, Word::parse_with("x.A.l.r.A.r.l.r.l.A", &t.labels().with(&sym("A")).unwrap()).unwrap());
    }

    #[test]
    fn embeddings() {
        let sigma = Alphabet::from_tokens("a b").unwrap();
        let w = Lasso::parse("(ab)^w").unwrap();
        let t = f_embed(&w, &sigma, &sym("A")).unwrap();
        let at = |s: &str| {
            let node = Node(s.chars().map(|c| if c == 'l' { Dir::L } else { Dir::R }).collect());
            t.label_at(&node).to_string()
        };
        assert_eq!((at(""), at("l"), at("ll"), at("lr"), at("r")), ("a".into(), "b".into(), "a".into(), "A".into(), "A".into()));
        assert_eq!(j_leftmost(&t), w);
        assert_eq!(j_leftmost(&constant("a")), Lasso::parse("(a)^w").unwrap());
        let w = Lasso::parse("ab(aab)^w").unwrap();
        assert_eq!(j_leftmost(&level_homogeneous_tree(&w, &sigma).unwrap()), w.normalize());
    }

    #[test]
    fn complement_examples() {
        let sigma = Alphabet::from_tokens("a").unwrap();
        let e = coding_complement_expr(&sigma, &sym("A")).unwrap();
        let m = e.to_bpda().unwrap();
        assert!(m.accepts_lasso(&Lasso::parse("(A)^w").unwrap()).unwrap());
        assert!(m.accepts_lasso(&Lasso::parse("(aAaA)^w").unwrap()).unwrap());
        assert!(m.accepts_lasso(&Lasso::parse("aAaaAaaaa(a)^w").unwrap()).unwrap());
        assert_eq!(a1_prefixes(&sigma, &sym("A")).len(), 5);
    }

    #[test]
    fn file_round_trip() {
        let sigma = Alphabet::from_tokens("a b").unwrap();
        let t = f_embed(&Lasso::parse("a(ba)^w").unwrap(), &sigma, &sym("A")).unwrap();
        assert_eq!(RegularTree::parse(&t.to_text()).unwrap(), t);
        assert!(RegularTree::parse("labels: a\nnodes: s\ninitial: s\n").is_err());
    }
}
