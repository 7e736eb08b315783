//! Finite-state ω-acceptors with Büchi and Muller conditions, decided exactly
//! on lassos through the product with the lasso position graph.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{parse_err, Error, Result};
use crate::graph;
use crate::words::{Alphabet, Lasso, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsm {
    states: Vec<String>,
    alphabet: Alphabet,
    initial: usize,
    /// `delta[q][a]`: sorted successor states.
    delta: Vec<Vec<Vec<usize>>>,
}

impl Fsm {
    pub fn new(
        states: Vec<String>,
        alphabet: Alphabet,
        initial: usize,
        transitions: &[(usize, usize, usize)],
    ) -> Result<Self> {
        check_state_names(&states)?;
        if initial >= states.len() {
            return Err(Error::InvalidMachine("initial state is not declared".into()));
        }
        let mut delta = vec![vec![Vec::new(); alphabet.len()]; states.len()];
        for &(q, a, p) in transitions {
            if q >= states.len() || p >= states.len() || a >= alphabet.len() {
                return Err(Error::InvalidMachine("transition mentions an undeclared symbol".into()));
            }
            delta[q][a].push(p);
        }
        for row in &mut delta {
            for succ in row.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        Ok(Fsm {
            states,
            alphabet,
            initial,
            delta,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn successors(&self, q: usize, a: usize) -> &[usize] {
        &self.delta[q][a]
    }

    pub fn transitions(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (a, succ) in row.iter().enumerate() {
                out.extend(succ.iter().map(|&p| (q, a, p)));
            }
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(|s| s.len() == 1))
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

pub(crate) fn check_state_names(states: &[String]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::InvalidMachine("no states".into()));
    }
    let mut seen = BTreeSet::new();
    for s in states {
        if s.is_empty() || s.contains(char::is_whitespace) {
            return Err(Error::InvalidMachine(format!("bad state name `{s}`")));
        }
        if !seen.insert(s) {
            return Err(Error::InvalidMachine(format!("duplicate state `{s}`")));
        }
    }
    Ok(())
}

/// A run of a finite acceptor on a lasso, as a lasso of product nodes: the
/// run visits `spoke`, then repeats `cycle` forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunWitness {
    pub spoke: Vec<usize>,
    pub cycle: Vec<usize>,
    /// Lasso-graph position of every state in `spoke ++ cycle`.
    pub positions: Vec<usize>,
    pub infinity: BTreeSet<usize>,
}

impl RunWitness {
    /// Checks that the witness is a legal run of `m` on `w` with the stated
    /// infinity set.
    pub fn replays(&self, m: &Fsm, w: &Lasso) -> bool {
        let Ok(letters) = w.position_letters(m.alphabet()) else {
            return false;
        };
        let states: Vec<usize> = self.spoke.iter().chain(&self.cycle).copied().collect();
        if self.cycle.is_empty() || states.len() != self.positions.len() {
            return false;
        }
        if states[0] != m.initial() || self.positions[0] != 0 {
            return false;
        }
        let n = states.len();
        for i in 0..n {
            let (next_state, next_pos) = if i + 1 < n {
                (states[i + 1], self.positions[i + 1])
            } else {
                (states[self.spoke.len()], self.positions[self.spoke.len()])
            };
            let pos = self.positions[i];
            if next_pos != w.next_position(pos) || !m.successors(states[i], letters[pos]).contains(&next_state) {
                return false;
            }
        }
        self.infinity == self.cycle.iter().copied().collect()
    }

    pub fn render(&self, m: &Fsm) -> String {
        let names = |v: &[usize]| v.iter().map(|&q| m.states()[q].as_str()).collect::<Vec<_>>().join(" ");
        format!("run: {} ( {} )^w", names(&self.spoke), names(&self.cycle))
    }
}

/// Product of a machine with a lasso's position graph: node `q·L + p`.
struct Product {
    positions: usize,
    adj: Vec<Vec<usize>>,
}

impl Product {
    fn new(m: &Fsm, w: &Lasso) -> Result<Product> {
        let letters = w.position_letters(m.alphabet())?;
        let l = w.positions();
        let mut adj = vec![Vec::new(); m.states().len() * l];
        for q in 0..m.states().len() {
            for p in 0..l {
                let np = w.next_position(p);
                adj[q * l + p] = m.successors(q, letters[p]).iter().map(|&q2| q2 * l + np).collect();
            }
        }
        Ok(Product { positions: l, adj })
    }

    fn state(&self, node: usize) -> usize {
        node / self.positions
    }

    fn witness(&self, stem: Vec<usize>, cycle: Vec<usize>) -> RunWitness {
        // stem ends at the first cycle node; drop it from the spoke
        let spoke_nodes = &stem[..stem.len() - 1];
        let all: Vec<usize> = spoke_nodes.iter().chain(&cycle).copied().collect();
        RunWitness {
            spoke: spoke_nodes.iter().map(|&n| self.state(n)).collect(),
            cycle: cycle.iter().map(|&n| self.state(n)).collect(),
            positions: all.iter().map(|&n| n % self.positions).collect(),
            infinity: cycle.iter().map(|&n| self.state(n)).collect(),
        }
    }
}

fn stem_to(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    if from == to {
        vec![from]
    } else {
        graph::path(adj, from, to, |_| true).expect("target is reachable")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub machine: Fsm,
    finals: Vec<bool>,
}

impl BuchiAutomaton {
    pub fn new(machine: Fsm, finals: &[usize]) -> Result<Self> {
        let mut f = vec![false; machine.states().len()];
        for &q in finals {
            *f.get_mut(q).ok_or_else(|| Error::InvalidMachine("final state not declared".into()))? = true;
        }
        Ok(BuchiAutomaton { machine, finals: f })
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> Vec<usize> {
        (0..self.finals.len()).filter(|&q| self.finals[q]).collect()
    }

    /// Exact Büchi acceptance of `w`, with an accepting run when there is one.
    pub fn accepts_lasso(&self, w: &Lasso) -> Result<Option<RunWitness>> {
        let prod = Product::new(&self.machine, w)?;
        let init = self.machine.initial() * prod.positions;
        let reach = graph::reachable(&prod.adj, init);
        let (comp, _) = graph::scc(&prod.adj);
        for node in 0..prod.adj.len() {
            if !reach[node] || !self.finals[prod.state(node)] {
                continue;
            }
            let c = comp[node];
            if let Some(cycle) = graph::path(&prod.adj, node, node, |x| comp[x] == c) {
                let stem = stem_to(&prod.adj, init, node);
                let cycle = cycle[..cycle.len() - 1].to_vec();
                return Ok(Some(prod.witness(stem, cycle)));
            }
        }
        Ok(None)
    }

    pub fn accepts(&self, w: &Lasso) -> Result<bool> {
        Ok(self.accepts_lasso(w)?.is_some())
    }

    pub fn to_text(&self) -> String {
        let mut out = header(&self.machine);
        let names: Vec<&str> = self.finals().iter().map(|&q| self.machine.states()[q].as_str()).collect();
        let _ = writeln!(out, "final: {}", names.join(" "));
        out.push_str(&transitions_text(&self.machine));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MullerAutomaton {
    pub machine: Fsm,
    table: Vec<BTreeSet<usize>>,
}

impl MullerAutomaton {
    pub fn new(machine: Fsm, table: Vec<BTreeSet<usize>>) -> Result<Self> {
        let n = machine.states().len();
        if table.iter().any(|t| t.iter().any(|&q| q >= n)) {
            return Err(Error::InvalidMachine("table entry mentions an undeclared state".into()));
        }
        let table = table.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(MullerAutomaton { machine, table })
    }

    pub fn table(&self) -> &[BTreeSet<usize>] {
        &self.table
    }

    /// Exact Muller acceptance: some reachable strongly connected part of the
    /// product restricted to a table entry `T` projects onto exactly `T`.
    pub fn accepts_lasso(&self, w: &Lasso) -> Result<Option<RunWitness>> {
        let prod = Product::new(&self.machine, w)?;
        let init = self.machine.initial() * prod.positions;
        let reach = graph::reachable(&prod.adj, init);
        for entry in &self.table {
            if entry.is_empty() {
                continue;
            }
            let inside = |n: usize| reach[n] && entry.contains(&prod.state(n));
            let restricted: Vec<Vec<usize>> = (0..prod.adj.len())
                .map(|n| {
                    if inside(n) {
                        prod.adj[n].iter().copied().filter(|&m| inside(m)).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            let (comp, count) = graph::scc(&restricted);
            for c in 0..count {
                let members: Vec<usize> = (0..restricted.len()).filter(|&n| comp[n] == c && inside(n)).collect();
                let Some(&root) = members.first() else { continue };
                let projected: BTreeSet<usize> = members.iter().map(|&n| prod.state(n)).collect();
                if &projected != entry {
                    continue;
                }
                if graph::path(&restricted, root, root, |x| comp[x] == c).is_none() {
                    continue;
                }
                // tour visiting one node per state of the entry
                let mut tour = vec![root];
                let mut cur = root;
                for &q in entry {
                    let target = *members.iter().find(|&&n| prod.state(n) == q).expect("projected");
                    if target == cur {
                        continue;
                    }
                    let leg = graph::path(&restricted, cur, target, |x| comp[x] == c).expect("same component");
                    tour.extend_from_slice(&leg[1..]);
                    cur = target;
                }
                let back = graph::path(&restricted, cur, root, |x| comp[x] == c).expect("same component");
                tour.extend_from_slice(&back[1..]);
                tour.pop();
                let stem = stem_to(&prod.adj, init, root);
                return Ok(Some(prod.witness(stem, tour)));
            }
        }
        Ok(None)
    }

    pub fn accepts(&self, w: &Lasso) -> Result<bool> {
        Ok(self.accepts_lasso(w)?.is_some())
    }

    pub fn to_text(&self) -> String {
        let mut out = header(&self.machine);
        for entry in &self.table {
            let names: Vec<&str> = entry.iter().map(|&q| self.machine.states()[q].as_str()).collect();
            let _ = writeln!(out, "table: {}", if names.is_empty() { "#".into() } else { names.join(" ") });
        }
        out.push_str(&transitions_text(&self.machine));
        out
    }
}

fn header(m: &Fsm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states: {}", m.states().join(" "));
    let _ = writeln!(out, "alphabet: {}", m.alphabet().tokens());
    let _ = writeln!(out, "initial: {}", m.states()[m.initial()]);
    out
}

fn transitions_text(m: &Fsm) -> String {
    let mut out = String::new();
    for (q, a, p) in m.transitions() {
        let _ = writeln!(out, "trans: {} {} -> {}", m.states()[q], m.alphabet().symbol(a), m.states()[p]);
    }
    out
}

/// A parsed automaton file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OmegaAutomaton {
    Buchi(BuchiAutomaton),
    Muller(MullerAutomaton),
}

impl OmegaAutomaton {
    pub fn accepts_lasso(&self, w: &Lasso) -> Result<Option<RunWitness>> {
        match self {
            OmegaAutomaton::Buchi(b) => b.accepts_lasso(w),
            OmegaAutomaton::Muller(m) => m.accepts_lasso(w),
        }
    }

    pub fn machine(&self) -> &Fsm {
        match self {
            OmegaAutomaton::Buchi(b) => &b.machine,
            OmegaAutomaton::Muller(m) => &m.machine,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            OmegaAutomaton::Buchi(b) => b.to_text(),
            OmegaAutomaton::Muller(m) => m.to_text(),
        }
    }

    /// Parses the automaton format: `states:`, `alphabet:`, `initial:`, then
    /// either one `final:` line or any number of `table:` lines, and
    /// `trans: q a -> p` lines.
    pub fn parse(text: &str) -> Result<OmegaAutomaton> {
        let mut states: Option<Vec<String>> = None;
        let mut alphabet = None;
        let mut initial = None;
        let mut finals: Option<(usize, Vec<String>)> = None;
        let mut table: Vec<(usize, Vec<String>)> = Vec::new();
        let mut trans = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("unrecognized line `{line}`")))?;
            let words: Vec<String> = rest.split_whitespace().map(String::from).collect();
            match key.trim() {
                "states" => states = Some(words),
                "alphabet" => {
                    alphabet = Some(Alphabet::from_tokens(rest).map_err(|e| parse_err(lineno, e.to_string()))?)
                }
                "initial" => initial = Some((lineno, rest.trim().to_string())),
                "final" => finals = Some((lineno, words)),
                "table" => table.push((lineno, words.into_iter().filter(|w| w != "#").collect())),
                "trans" => trans.push((lineno, words)),
                other => return Err(parse_err(lineno, format!("unknown key `{other}`"))),
            }
        }
        let states = states.ok_or_else(|| parse_err(0, "missing `states:` line"))?;
        let alphabet: Alphabet = alphabet.ok_or_else(|| parse_err(0, "missing `alphabet:` line"))?;
        let index: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let state = |lineno: usize, name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| parse_err(lineno, format!("undeclared state `{name}`")))
        };
        let (il, iname) = initial.ok_or_else(|| parse_err(0, "missing `initial:` line"))?;
        let init = state(il, &iname)?;
        let mut transitions = Vec::new();
        for (lineno, words) in &trans {
            let [q, a, arrow, p] = words.as_slice() else {
                return Err(parse_err(*lineno, "expected `trans: q a -> p`"));
            };
            if arrow != "->" {
                return Err(parse_err(*lineno, "expected `->`"));
            }
            let letter = Symbol::new(a.as_str())
                .ok()
                .and_then(|s| alphabet.index_of(&s))
                .ok_or_else(|| parse_err(*lineno, format!("letter `{a}` not in the alphabet")))?;
            transitions.push((state(*lineno, q)?, letter, state(*lineno, p)?));
        }
        let fsm = Fsm::new(states.clone(), alphabet.clone(), init, &transitions)
            .map_err(|e| parse_err(0, e.to_string()))?;
        match (finals, table.is_empty()) {
            (Some(_), false) => Err(parse_err(0, "both `final:` and `table:` given")),
            (Some((lineno, f)), true) => {
                let f = f.iter().map(|n| state(lineno, n)).collect::<Result<Vec<_>>>()?;
                Ok(OmegaAutomaton::Buchi(BuchiAutomaton::new(fsm, &f)?))
            }
            (None, false) => {
                let t = table
                    .iter()
                    .map(|(lineno, set)| set.iter().map(|n| state(*lineno, n)).collect::<Result<BTreeSet<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(OmegaAutomaton::Muller(MullerAutomaton::new(fsm, t)?))
            }
            (None, true) => Err(parse_err(0, "missing `final:` or `table:` line")),
        }
    }
}

/// The two-state deterministic acceptor of `(0*·1)^ω`: infinitely many 1s.
pub fn infinitely_many_ones() -> BuchiAutomaton {
    let alphabet = Alphabet::from_tokens("0 1").expect("literal alphabet");
    let fsm = Fsm::new(
        vec!["q0".into(), "q1".into()],
        alphabet,
        0,
        &[(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 1, 1)],
    )
    .expect("literal machine");
    BuchiAutomaton::new(fsm, &[1]).expect("literal machine")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_acceptor() {
        let b = infinitely_many_ones();
        assert!(b.machine.is_deterministic());
        let w = Lasso::parse("(01)^w").unwrap();
        let run = b.accepts_lasso(&w).unwrap().unwrap();
        assert!(run.replays(&b.machine, &w));
        assert!(!b.accepts(&Lasso::parse("(0)^w").unwrap()).unwrap());
        assert!(b.accepts(&Lasso::parse("000(1)^w").unwrap()).unwrap());
        assert!(!b.accepts(&Lasso::parse("111(0)^w").unwrap()).unwrap());
    }

    #[test]
    fn empty_final_set_rejects() {
        let b = infinitely_many_ones();
        let none = BuchiAutomaton::new(b.machine.clone(), &[]).unwrap();
        assert!(!none.accepts(&Lasso::parse("(01)^w").unwrap()).unwrap());
    }

    #[test]
    fn muller_examples() {
        let alphabet = Alphabet::from_tokens("0 1").unwrap();
        let one = Fsm::new(vec!["q".into()], alphabet, 0, &[(0, 0, 0), (0, 1, 0)]).unwrap();
        let m = MullerAutomaton::new(one.clone(), vec![BTreeSet::from([0])]).unwrap();
        let w = Lasso::parse("1(01)^w").unwrap();
        let run = m.accepts_lasso(&w).unwrap().unwrap();
        assert!(run.replays(&one, &w));
        let empty = MullerAutomaton::new(one, vec![]).unwrap();
        assert!(!empty.accepts(&w).unwrap());

        let b = infinitely_many_ones();
        let both = MullerAutomaton::new(b.machine.clone(), vec![BTreeSet::from([0, 1])]).unwrap();
        let w = Lasso::parse("(001)^w").unwrap();
        let run = both.accepts_lasso(&w).unwrap().unwrap();
        assert!(run.replays(&b.machine, &w));
        assert!(!both.accepts(&Lasso::parse("(1)^w").unwrap()).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let b = OmegaAutomaton::Buchi(infinitely_many_ones());
        assert_eq!(OmegaAutomaton::parse(&b.to_text()).unwrap(), b);
        let m = OmegaAutomaton::Muller(
            MullerAutomaton::new(infinitely_many_ones().machine, vec![BTreeSet::from([0]), BTreeSet::new()]).unwrap(),
        );
        assert_eq!(OmegaAutomaton::parse(&m.to_text()).unwrap(), m);
        assert!(OmegaAutomaton::parse("states: q\nalphabet: a\ninitial: p\nfinal:\n").is_err());
    }
}
