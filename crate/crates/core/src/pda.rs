//! Pushdown machines with Büchi and Muller conditions.
//!
//! Lasso acceptance for the Büchi condition reduces to emptiness of a Büchi
//! pushdown system (the machine run in lockstep with the lasso's position
//! graph), decided by summary saturation followed by an SCC search over
//! control/top-of-stack heads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{parse_err, Error, Result};
use crate::fsa::{check_state_names, BuchiAutomaton};
use crate::graph;
use crate::words::{Alphabet, Lasso, Symbol};

/// Longest word a single transition may push.
pub const MAX_PUSH: usize = 4;

/// `(from, input, top) → (to, push)`; `input = None` is a λ-move and
/// `push[0]` becomes the new top of stack.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub from: usize,
    pub input: Option<usize>,
    pub top: usize,
    pub to: usize,
    pub push: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdm {
    states: Vec<String>,
    alphabet: Alphabet,
    stack: Vec<String>,
    initial: usize,
    start_stack: usize,
    rules: Vec<Rule>,
    /// `by_head[state * |Γ| + top]`: indices into `rules`.
    by_head: Vec<Vec<usize>>,
}

/// `(q, γ)` with `stack[0]` on top.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: usize,
    pub stack: Vec<usize>,
}

impl Pdm {
    pub fn new(
        states: Vec<String>,
        alphabet: Alphabet,
        stack: Vec<String>,
        initial: usize,
        start_stack: usize,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        check_state_names(&states)?;
        if stack.is_empty() {
            return Err(Error::InvalidMachine("empty stack alphabet".into()));
        }
        let mut seen = BTreeSet::new();
        for z in &stack {
            if z.is_empty() || z == "#" || z.contains(|c: char| c.is_whitespace() || c == '(' || c == ')') {
                return Err(Error::InvalidMachine(format!("bad stack symbol `{z}`")));
            }
            if !seen.insert(z) {
                return Err(Error::InvalidMachine(format!("duplicate stack symbol `{z}`")));
            }
        }
        if initial >= states.len() || start_stack >= stack.len() {
            return Err(Error::InvalidMachine("initial state or start stack symbol not declared".into()));
        }
        for r in &rules {
            if r.push.len() > MAX_PUSH {
                return Err(Error::PushTooLong(r.push.len(), MAX_PUSH));
            }
            let ok = r.from < states.len()
                && r.to < states.len()
                && r.top < stack.len()
                && r.input.is_none_or(|a| a < alphabet.len())
                && r.push.iter().all(|&z| z < stack.len());
            if !ok {
                return Err(Error::InvalidMachine("transition mentions an undeclared symbol".into()));
            }
        }
        let rules: Vec<Rule> = rules.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut by_head = vec![Vec::new(); states.len() * stack.len()];
        for (i, r) in rules.iter().enumerate() {
            by_head[r.from * stack.len() + r.top].push(i);
        }
        Ok(Pdm {
            states,
            alphabet,
            stack,
            initial,
            start_stack,
            rules,
            by_head,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn stack_alphabet(&self) -> &[String] {
        &self.stack
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn start_stack(&self) -> usize {
        self.start_stack
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn stack_index(&self, name: &str) -> Option<usize> {
        self.stack.iter().position(|s| s == name)
    }

    pub fn rules_at(&self, state: usize, top: usize) -> impl Iterator<Item = &Rule> {
        self.by_head[state * self.stack.len() + top].iter().map(|&i| &self.rules[i])
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            state: self.initial,
            stack: vec![self.start_stack],
        }
    }

    /// All configurations reachable from `c` in one move reading `a`
    /// (`None` = λ). Empty stack: no move.
    pub fn step(&self, c: &Configuration, a: Option<usize>) -> Vec<Configuration> {
        let Some(&top) = c.stack.first() else {
            return Vec::new();
        };
        self.rules_at(c.state, top)
            .filter(|r| r.input == a)
            .map(|r| {
                let mut stack = r.push.clone();
                stack.extend_from_slice(&c.stack[1..]);
                Configuration { state: r.to, stack }
            })
            .collect()
    }

    /// Configurations reachable by consuming exactly `x` with at most
    /// `lambda_budget` consecutive λ-moves before, between and after letters,
    /// each with the largest number of `marked` visits (initial state
    /// included) along some such run. Runs needing more λ-moves are pruned.
    pub fn bounded_runs(
        &self,
        x: &[usize],
        lambda_budget: usize,
        marked: impl Fn(usize) -> bool,
    ) -> BTreeMap<Configuration, usize> {
        let init = self.initial_configuration();
        let mut current = BTreeMap::new();
        current.insert(init.clone(), usize::from(marked(init.state)));
        self.lambda_closure(&mut current, lambda_budget, &marked);
        for &a in x {
            let mut next: BTreeMap<Configuration, usize> = BTreeMap::new();
            for (c, &n) in &current {
                for d in self.step(c, Some(a)) {
                    let score = n + usize::from(marked(d.state));
                    let e = next.entry(d).or_insert(score);
                    *e = (*e).max(score);
                }
            }
            current = next;
            self.lambda_closure(&mut current, lambda_budget, &marked);
        }
        current
    }

    fn lambda_closure(
        &self,
        configs: &mut BTreeMap<Configuration, usize>,
        budget: usize,
        marked: &impl Fn(usize) -> bool,
    ) {
        let mut frontier: Vec<(Configuration, usize)> = configs.iter().map(|(c, &n)| (c.clone(), n)).collect();
        for _ in 0..budget {
            let mut next = Vec::new();
            for (c, n) in &frontier {
                for d in self.step(c, None) {
                    let score = n + usize::from(marked(d.state));
                    match configs.get_mut(&d) {
                        Some(old) if *old >= score => {}
                        Some(old) => {
                            *old = score;
                            next.push((d, score));
                        }
                        None => {
                            configs.insert(d.clone(), score);
                            next.push((d, score));
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }

    fn header_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let _ = writeln!(out, "alphabet: {}", self.alphabet.tokens());
        let _ = writeln!(out, "stack: {}", self.stack.join(" "));
        let _ = writeln!(out, "initial: {}", self.states[self.initial]);
        let _ = writeln!(out, "startstack: {}", self.stack[self.start_stack]);
        out
    }

    /// One `trans:` line for a rule.
    pub fn rule_text(&self, r: &Rule) -> String {
        let input = r.input.map_or("#".to_string(), |a| self.alphabet.symbol(a).to_string());
        let push = if r.push.is_empty() {
            "#".to_string()
        } else {
            r.push.iter().map(|&z| self.stack[z].as_str()).collect::<Vec<_>>().join(" ")
        };
        format!(
            "{} {} {} -> {} push({})",
            self.states[r.from], input, self.stack[r.top], self.states[r.to], push
        )
    }

    fn rules_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let _ = writeln!(out, "trans: {}", self.rule_text(r));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bpda {
    pub machine: Pdm,
    finals: Vec<bool>,
}

impl Bpda {
    pub fn new(machine: Pdm, finals: &[usize]) -> Result<Self> {
        let mut f = vec![false; machine.states().len()];
        for &q in finals {
            *f.get_mut(q).ok_or_else(|| Error::InvalidMachine("final state not declared".into()))? = true;
        }
        Ok(Bpda { machine, finals: f })
    }

    /// A finite Büchi automaton as a pushdown machine with stack `{Z0}`
    /// that never changes its stack.
    pub fn from_buchi(b: &BuchiAutomaton) -> Bpda {
        let m = &b.machine;
        let rules = m
            .transitions()
            .into_iter()
            .map(|(q, a, p)| Rule { from: q, input: Some(a), top: 0, to: p, push: vec![0] })
            .collect();
        let pdm = Pdm::new(m.states().to_vec(), m.alphabet().clone(), vec!["Z0".into()], m.initial(), 0, rules)
            .expect("finite machine fits");
        Bpda::new(pdm, &b.finals()).expect("finals are states")
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> Vec<usize> {
        (0..self.finals.len()).filter(|&q| self.finals[q]).collect()
    }

    pub fn bounded_runs(&self, x: &[usize], lambda_budget: usize) -> BTreeMap<Configuration, usize> {
        self.machine.bounded_runs(x, lambda_budget, |q| self.finals[q])
    }

    /// The Büchi pushdown system of runs of this machine on `w`.
    pub fn product_with_lasso(&self, w: &Lasso) -> Result<BuchiPds> {
        let letters = w.position_letters(self.machine.alphabet())?;
        let l = w.positions();
        let m = &self.machine;
        let mut rules = Vec::new();
        for r in m.rules() {
            for i in 0..l {
                match r.input {
                    Some(a) if letters[i] == a => rules.push(PdsRule {
                        from: r.from * l + i,
                        top: r.top,
                        to: r.to * l + w.next_position(i),
                        push: r.push.clone(),
                        progress: true,
                    }),
                    Some(_) => {}
                    None => rules.push(PdsRule {
                        from: r.from * l + i,
                        top: r.top,
                        to: r.to * l + i,
                        push: r.push.clone(),
                        progress: false,
                    }),
                }
            }
        }
        let controls = m.states().len() * l;
        let repeating = (0..controls).map(|c| self.finals[c / l]).collect();
        BuchiPds::new(controls, m.stack_alphabet().len(), m.initial() * l, m.start_stack(), rules, repeating)
    }

    /// Exact: is `w` accepted, i.e. is there a complete run visiting a final
    /// state infinitely often?
    pub fn accepts_lasso(&self, w: &Lasso) -> Result<bool> {
        Ok(!self.product_with_lasso(w)?.is_empty())
    }

    pub fn to_text(&self) -> String {
        let mut out = self.machine.header_text();
        let names: Vec<&str> = self.finals().iter().map(|&q| self.machine.states()[q].as_str()).collect();
        let _ = writeln!(out, "final: {}", names.join(" "));
        out.push_str(&self.machine.rules_text());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mpda {
    pub machine: Pdm,
    table: Vec<BTreeSet<usize>>,
}

impl Mpda {
    pub fn new(machine: Pdm, table: Vec<BTreeSet<usize>>) -> Result<Self> {
        let n = machine.states().len();
        if table.iter().any(|t| t.iter().any(|&q| q >= n)) {
            return Err(Error::InvalidMachine("table entry mentions an undeclared state".into()));
        }
        let table = table.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(Mpda { machine, table })
    }

    pub fn table(&self) -> &[BTreeSet<usize>] {
        &self.table
    }

    /// Configurations reachable on `x`; visit counts are not meaningful for the
    /// Muller condition and are all reported as zero.
    pub fn bounded_runs(&self, x: &[usize], lambda_budget: usize) -> BTreeMap<Configuration, usize> {
        self.machine.bounded_runs(x, lambda_budget, |_| false)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.machine.header_text();
        for entry in &self.table {
            let names: Vec<&str> = entry.iter().map(|&q| self.machine.states()[q].as_str()).collect();
            let _ = writeln!(out, "table: {}", if names.is_empty() { "#".into() } else { names.join(" ") });
        }
        out.push_str(&self.machine.rules_text());
        out
    }
}

/// A parsed pushdown file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PushdownAutomaton {
    Buchi(Bpda),
    Muller(Mpda),
}

impl PushdownAutomaton {
    pub fn machine(&self) -> &Pdm {
        match self {
            PushdownAutomaton::Buchi(b) => &b.machine,
            PushdownAutomaton::Muller(m) => &m.machine,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            PushdownAutomaton::Buchi(b) => b.to_text(),
            PushdownAutomaton::Muller(m) => m.to_text(),
        }
    }

    /// Parses the pushdown format: the automaton format plus `stack:` and
    /// `startstack:` lines, with transitions `trans: q a Z -> p push(β)`
    /// where `a` may be `#` (λ) and `β` may be `#` (pop).
    pub fn parse(text: &str) -> Result<PushdownAutomaton> {
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut table: Vec<(usize, &str)> = Vec::new();
        let mut trans: Vec<(usize, &str)> = Vec::new();
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
                k @ ("states" | "alphabet" | "stack" | "initial" | "startstack" | "final") => {
                    if fields.insert(k, (lineno, rest)).is_some() {
                        return Err(parse_err(lineno, format!("duplicate `{k}:` line")));
                    }
                }
                "table" => table.push((lineno, rest)),
                "trans" => trans.push((lineno, rest)),
                other => return Err(parse_err(lineno, format!("unknown key `{other}`"))),
            }
        }
        let field = |k: &str| fields.get(k).copied().ok_or_else(|| parse_err(0, format!("missing `{k}:` line")));
        let states: Vec<String> = field("states")?.1.split_whitespace().map(String::from).collect();
        let (al, atext) = field("alphabet")?;
        let alphabet = Alphabet::from_tokens(atext).map_err(|e| parse_err(al, e.to_string()))?;
        let stack: Vec<String> = field("stack")?.1.split_whitespace().map(String::from).collect();
        let state_ix: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let stack_ix: HashMap<&str, usize> = stack.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let state = |lineno: usize, n: &str| {
            state_ix.get(n).copied().ok_or_else(|| parse_err(lineno, format!("undeclared state `{n}`")))
        };
        let stack_sym = |lineno: usize, n: &str| {
            stack_ix.get(n).copied().ok_or_else(|| parse_err(lineno, format!("undeclared stack symbol `{n}`")))
        };
        let (il, itext) = field("initial")?;
        let initial = state(il, itext.trim())?;
        let (sl, stext) = field("startstack")?;
        let start = stack_sym(sl, stext.trim())?;
        let mut rules = Vec::new();
        for (lineno, rest) in trans {
            let (lhs, rhs) = rest
                .split_once("->")
                .ok_or_else(|| parse_err(lineno, "expected `trans: q a Z -> p push(β)`"))?;
            let lhs: Vec<&str> = lhs.split_whitespace().collect();
            let [q, a, z] = lhs.as_slice() else {
                return Err(parse_err(lineno, "expected `q a Z` before `->`"));
            };
            let rhs = rhs.trim();
            let (p, push) = rhs
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(lineno, "expected `p push(β)` after `->`"))?;
            let inner = push
                .trim()
                .strip_prefix("push(")
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| parse_err(lineno, "expected `push(β)`"))?;
            let input = if *a == "#" {
                None
            } else {
                Some(
                    Symbol::new(*a)
                        .ok()
                        .and_then(|s| alphabet.index_of(&s))
                        .ok_or_else(|| parse_err(lineno, format!("letter `{a}` not in the alphabet")))?,
                )
            };
            let push = inner
                .split_whitespace()
                .filter(|t| *t != "#")
                .map(|t| stack_sym(lineno, t))
                .collect::<Result<Vec<_>>>()?;
            if push.len() > MAX_PUSH {
                return Err(parse_err(lineno, Error::PushTooLong(push.len(), MAX_PUSH).to_string()));
            }
            rules.push(Rule {
                from: state(lineno, q)?,
                input,
                top: stack_sym(lineno, z)?,
                to: state(lineno, p.trim())?,
                push,
            });
        }
        let pdm = Pdm::new(states.clone(), alphabet, stack, initial, start, rules)
            .map_err(|e| parse_err(0, e.to_string()))?;
        match (fields.get("final"), table.is_empty()) {
            (Some(_), false) => Err(parse_err(0, "both `final:` and `table:` given")),
            (Some(&(lineno, f)), true) => {
                let f = f.split_whitespace().map(|n| state(lineno, n)).collect::<Result<Vec<_>>>()?;
                Ok(PushdownAutomaton::Buchi(Bpda::new(pdm, &f)?))
            }
            (None, false) => {
                let t = table
                    .iter()
                    .map(|&(lineno, set)| {
                        set.split_whitespace()
                            .filter(|n| *n != "#")
                            .map(|n| state(lineno, n))
                            .collect::<Result<BTreeSet<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PushdownAutomaton::Muller(Mpda::new(pdm, t)?))
            }
            (None, true) => Err(parse_err(0, "missing `final:` or `table:` line")),
        }
    }
}

/// An input-free pushdown move; `progress` marks moves that consumed an input
/// letter of the underlying machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PdsRule {
    pub from: usize,
    pub top: usize,
    pub to: usize,
    pub push: Vec<usize>,
    pub progress: bool,
}

/// A pushdown system without input and a repeating control set `R`.
///
/// A run is accepting when it visits `R` infinitely often and makes
/// infinitely many progress moves. For systems where every move is a
/// progress move this is plain Büchi emptiness; products with a lasso mark
/// λ-moves as non-progress so that λ-divergence is not mistaken for reading
/// the whole input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuchiPds {
    controls: usize,
    stack_symbols: usize,
    initial: usize,
    start_stack: usize,
    rules: Vec<PdsRule>,
    repeating: Vec<bool>,
}

const BIT_R: u8 = 1;
const BIT_PROGRESS: u8 = 2;

/// Downward-closed sets of masks over `{R, progress}`, as a 4-bit set.
fn closure_of(mask: u8) -> u8 {
    let mut set = 0u8;
    for m in 0..4u8 {
        if m & mask == m {
            set |= 1 << m;
        }
    }
    set
}

fn maximal_masks(set: u8) -> impl Iterator<Item = u8> {
    (0..4u8).filter(move |&m| set & (1 << m) != 0 && (0..4u8).all(|n| n == m || n & m != m || set & (1 << n) == 0))
}

impl BuchiPds {
    pub fn new(
        controls: usize,
        stack_symbols: usize,
        initial: usize,
        start_stack: usize,
        rules: Vec<PdsRule>,
        repeating: Vec<bool>,
    ) -> Result<Self> {
        if initial >= controls || start_stack >= stack_symbols || repeating.len() != controls {
            return Err(Error::InvalidMachine("bad pushdown system header".into()));
        }
        for r in &rules {
            if r.from >= controls
                || r.to >= controls
                || r.top >= stack_symbols
                || r.push.iter().any(|&z| z >= stack_symbols)
            {
                return Err(Error::InvalidMachine("pushdown-system rule out of range".into()));
            }
        }
        Ok(BuchiPds {
            controls,
            stack_symbols,
            initial,
            start_stack,
            rules,
            repeating,
        })
    }

    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn stack_symbols(&self) -> usize {
        self.stack_symbols
    }

    pub fn initial(&self) -> (usize, usize) {
        (self.initial, self.start_stack)
    }

    pub fn rules(&self) -> &[PdsRule] {
        &self.rules
    }

    pub fn is_repeating(&self, c: usize) -> bool {
        self.repeating[c]
    }

    fn move_mask(&self, r: &PdsRule) -> u8 {
        let mut m = 0;
        if self.repeating[r.to] {
            m |= BIT_R;
        }
        if r.progress {
            m |= BIT_PROGRESS;
        }
        m
    }

    /// True iff no run visits `R` infinitely often (with infinitely many
    /// progress moves). Exact and terminating.
    pub fn is_empty(&self) -> bool {
        if !self.repeating.iter().any(|&r| r) {
            return true;
        }
        let c = self.controls;
        let g = self.stack_symbols;
        // pop[(p*g + z)*c + p']: masks of runs from (p, z·w) to (p', w)
        let mut pop = vec![0u8; c * g * c];
        let mut pop_list: Vec<Vec<(usize, u8)>> = vec![Vec::new(); c * g];
        // parts: (rule, j) has reached control x having popped push[..j]
        let mut part_base = Vec::with_capacity(self.rules.len());
        let mut total = 0;
        for r in &self.rules {
            part_base.push(total);
            total += r.push.len() + 1;
        }
        let mut part = vec![0u8; total * c];
        // parts waiting for a summary of head (x, z)
        let mut waiting: Vec<Vec<(usize, usize)>> = vec![Vec::new(); c * g];
        let mut work: Vec<Work> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            work.push(Work::Part(ri, 0, r.to, closure_of(self.move_mask(r))));
        }
        while let Some(item) = work.pop() {
            match item {
                Work::Part(ri, j, x, masks) => {
                    let slot = &mut part[(part_base[ri] + j) * c + x];
                    let fresh = masks & !*slot;
                    if fresh == 0 {
                        continue;
                    }
                    let first = *slot == 0;
                    *slot |= masks;
                    let all = *slot;
                    let r = &self.rules[ri];
                    if j == r.push.len() {
                        work.push(Work::Pop(r.from, r.top, x, all));
                        continue;
                    }
                    let head = x * g + r.push[j];
                    if first {
                        waiting[head].push((ri, j));
                    }
                    for &(y, m) in &pop_list[head] {
                        work.push(Work::Part(ri, j + 1, y, or_sets(all, m)));
                    }
                }
                Work::Pop(p, z, x, masks) => {
                    let idx = (p * g + z) * c + x;
                    let fresh = masks & !pop[idx];
                    if fresh == 0 {
                        continue;
                    }
                    let first = pop[idx] == 0;
                    pop[idx] |= masks;
                    let all = pop[idx];
                    let head = p * g + z;
                    if first {
                        pop_list[head].push((x, 0));
                    }
                    if let Some(entry) = pop_list[head].iter_mut().find(|e| e.0 == x) {
                        entry.1 = all;
                    }
                    for &(ri, j) in &waiting[head] {
                        let pm = part[(part_base[ri] + j) * c + p];
                        if pm != 0 {
                            work.push(Work::Part(ri, j + 1, x, or_sets(pm, all)));
                        }
                    }
                }
            }
        }
        // head graph: (p, z) → (x, push[j]) after popping push[..j]
        let heads = c * g;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); heads];
        let mut edges: Vec<(usize, usize, u8)> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let from = r.from * g + r.top;
            for j in 0..r.push.len() {
                for x in 0..c {
                    let masks = part[(part_base[ri] + j) * c + x];
                    if masks == 0 {
                        continue;
                    }
                    let to = x * g + r.push[j];
                    adj[from].push(to);
                    for m in maximal_masks(masks) {
                        edges.push((from, to, m));
                    }
                }
            }
        }
        let reach = graph::reachable(&adj, self.initial * g + self.start_stack);
        let (comp, count) = graph::scc(&adj);
        let mut scc_mask = vec![0u8; count];
        for &(a, b, m) in &edges {
            if reach[a] && comp[a] == comp[b] {
                scc_mask[comp[a]] |= m;
            }
        }
        !scc_mask.contains(&(BIT_R | BIT_PROGRESS))
    }
}

enum Work {
    Part(usize, usize, usize, u8),
    Pop(usize, usize, usize, u8),
}

/// `{ a | b : a ∈ A, b ∈ B }` for downward-closed mask sets.
fn or_sets(a: u8, b: u8) -> u8 {
    let mut out = 0;
    for x in 0..4u8 {
        if a & (1 << x) == 0 {
            continue;
        }
        for y in 0..4u8 {
            if b & (1 << y) != 0 {
                out |= closure_of(x | y);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `{0ⁿ1ⁿ : n ≥ 1}^ω` as a one-state-per-phase counter machine.
    fn balanced_blocks() -> Bpda {
        let text = "\
states: s z o f
alphabet: 0 1
stack: Z X
initial: s
startstack: Z
final: f
trans: s 0 Z -> z push(X Z)
trans: z 0 X -> z push(X X)
trans: z 1 X -> o push(#)
trans: o 1 X -> o push(#)
trans: o # Z -> f push(Z)
trans: f 0 Z -> z push(X Z)
";
        match PushdownAutomaton::parse(text).unwrap() {
            PushdownAutomaton::Buchi(b) => b,
            _ => unreachable!(),
        }
    }

    #[test]
    fn step_applies_matching_rules() {
        let b = balanced_blocks();
        let m = &b.machine;
        let c = m.initial_configuration();
        let next = m.step(&c, Some(0));
        assert_eq!(next, vec![Configuration { state: 1, stack: vec![1, 0] }]);
        assert!(m.step(&c, Some(1)).is_empty());
        assert!(m.step(&c, None).is_empty());
        assert!(m.step(&Configuration { state: 0, stack: vec![] }, Some(0)).is_empty());
    }

    #[test]
    fn bounded_runs_basics() {
        let b = balanced_blocks();
        let runs = b.bounded_runs(&[], 0);
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[&b.machine.initial_configuration()], 0);
        let runs = b.bounded_runs(&[0, 1], 1);
        let f = Configuration { state: 3, stack: vec![0] };
        assert_eq!(runs.get(&f), Some(&1));
        assert!(!b.bounded_runs(&[0, 1], 0).contains_key(&f));
    }

    #[test]
    fn balanced_lassos() {
        let b = balanced_blocks();
        assert!(b.accepts_lasso(&Lasso::parse("(01)^w").unwrap()).unwrap());
        assert!(b.accepts_lasso(&Lasso::parse("(0011)^w").unwrap()).unwrap());
        assert!(b.accepts_lasso(&Lasso::parse("0011(01)^w").unwrap()).unwrap());
        assert!(!b.accepts_lasso(&Lasso::parse("(0)^w").unwrap()).unwrap());
        assert!(!b.accepts_lasso(&Lasso::parse("(001)^w").unwrap()).unwrap());
        assert!(!b.accepts_lasso(&Lasso::parse("1(01)^w").unwrap()).unwrap());
        let none = Bpda::new(b.machine.clone(), &[]).unwrap();
        assert!(!none.accepts_lasso(&Lasso::parse("(01)^w").unwrap()).unwrap());
    }

    #[test]
    fn product_size() {
        let b = balanced_blocks();
        let w = Lasso::parse("0(011)^w").unwrap();
        let p = b.product_with_lasso(&w).unwrap();
        assert_eq!(p.controls(), 4 * 4);
        // λ-moves stay at their position
        assert!(p.rules().iter().filter(|r| !r.progress).all(|r| r.from % 4 == r.to % 4));
    }

    #[test]
    fn lambda_divergence_is_not_acceptance() {
        // a λ-loop through a final state after reading one letter
        let text = "\
states: s f
alphabet: a b
stack: Z
initial: s
startstack: Z
final: f
trans: s a Z -> f push(Z)
trans: f # Z -> f push(Z)
";
        let PushdownAutomaton::Buchi(b) = PushdownAutomaton::parse(text).unwrap() else { unreachable!() };
        assert!(!b.accepts_lasso(&Lasso::parse("(a)^w").unwrap()).unwrap());
        let text = text.to_string() + "trans: f a Z -> f push(Z)\n";
        let PushdownAutomaton::Buchi(b) = PushdownAutomaton::parse(&text).unwrap() else { unreachable!() };
        assert!(b.accepts_lasso(&Lasso::parse("(a)^w").unwrap()).unwrap());
        assert!(!b.accepts_lasso(&Lasso::parse("a(b)^w").unwrap()).unwrap());
    }

    #[test]
    fn pds_trivial_cases() {
        let loop_rule = PdsRule { from: 0, top: 0, to: 0, push: vec![0], progress: true };
        let no_r = BuchiPds::new(1, 1, 0, 0, vec![loop_rule.clone()], vec![false]).unwrap();
        assert!(no_r.is_empty());
        let self_loop = BuchiPds::new(1, 1, 0, 0, vec![loop_rule], vec![true]).unwrap();
        assert!(!self_loop.is_empty());
        // repeating state reachable only after popping the bottom symbol
        let pop = PdsRule { from: 0, top: 0, to: 1, push: vec![], progress: true };
        let stuck = BuchiPds::new(2, 1, 0, 0, vec![pop, PdsRule { from: 1, top: 0, to: 1, push: vec![0], progress: true }], vec![false, true]).unwrap();
        assert!(stuck.is_empty());
    }

    #[test]
    fn push_limit() {
        let text = "states: s\nalphabet: a\nstack: Z\ninitial: s\nstartstack: Z\nfinal: s\ntrans: s a Z -> s push(Z Z Z Z Z)\n";
        assert!(PushdownAutomaton::parse(text).is_err());
    }

    #[test]
    fn file_round_trip() {
        let b = PushdownAutomaton::Buchi(balanced_blocks());
        assert_eq!(PushdownAutomaton::parse(&b.to_text()).unwrap(), b);
        let m = PushdownAutomaton::Muller(Mpda::new(balanced_blocks().machine, vec![BTreeSet::from([0, 3])]).unwrap());
        assert_eq!(PushdownAutomaton::parse(&m.to_text()).unwrap(), m);
    }
}
