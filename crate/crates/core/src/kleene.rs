//! ω-Kleene-closure expressions `⋃ Uᵢ·Vᵢ^ω` over context-free grammars.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{parse_err, Error, Result};
use crate::grammar::{Cfg, GSym, Substitution};
use crate::pda::{Bpda, Pdm, Rule};
use crate::words::{Alphabet, Lasso, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaKleeneExpr {
    alphabet: Alphabet,
    pairs: Vec<(Cfg, Cfg)>,
}

impl OmegaKleeneExpr {
    pub fn new(pairs: Vec<(Cfg, Cfg)>) -> Result<Self> {
        let alphabet = pairs
            .first()
            .map(|p| p.0.terminals().clone())
            .ok_or_else(|| Error::InvalidGrammar("an expression needs at least one pair".into()))?;
        for (u, v) in &pairs {
            if u.terminals() != &alphabet || v.terminals() != &alphabet {
                return Err(Error::AlphabetMismatch(format!(
                    "pair over `{}`/`{}`, expected `{}`",
                    u.terminals().tokens(),
                    v.terminals().tokens(),
                    alphabet.tokens()
                )));
            }
        }
        Ok(OmegaKleeneExpr { alphabet, pairs })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn pairs(&self) -> &[(Cfg, Cfg)] {
        &self.pairs
    }

    /// Denotation union: the pair lists concatenated.
    pub fn union(&self, other: &OmegaKleeneExpr) -> Result<OmegaKleeneExpr> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "`{}` vs `{}`",
                self.alphabet.tokens(),
                other.alphabet.tokens()
            )));
        }
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        OmegaKleeneExpr::new(pairs)
    }

    /// Image under a λ-free substitution, componentwise.
    pub fn substitute(&self, f: &Substitution) -> Result<OmegaKleeneExpr> {
        if f.source() != &self.alphabet {
            return Err(Error::DomainMismatch(format!(
                "substitution domain `{}` vs expression alphabet `{}`",
                f.source().tokens(),
                self.alphabet.tokens()
            )));
        }
        if let Some(x) = f.lambda_letter() {
            return Err(Error::NotLambdaFree(x.to_string()));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|(u, v)| Ok((f.apply(u)?, f.apply(v)?)))
            .collect::<Result<Vec<_>>>()?;
        OmegaKleeneExpr::new(pairs)
    }

    /// Blocks used for `Vᵢ^ω`: `Vᵢ ∖ {λ}`. Errors if `Vᵢ = {λ}`.
    fn blocks(&self, i: usize) -> Result<Cfg> {
        let v = &self.pairs[i].1;
        let stripped = v.without_lambda();
        if stripped.is_empty() && !v.is_empty() {
            return Err(Error::OnlyLambda(i + 1));
        }
        Ok(stripped)
    }

    /// A Büchi pushdown acceptor of the denotation.
    ///
    /// The first letter is read in the initial state and remembered in a
    /// pending state until the stack exposes it; afterwards the machine
    /// expands nonterminals with λ-moves and matches terminals on top. A
    /// marker below each component's U- or V-phase restarts the V-phase
    /// through a final state, so final states recur exactly when infinitely
    /// many V-blocks complete.
    pub fn to_bpda(&self) -> Result<Bpda> {
        let sigma = &self.alphabet;
        let mut b = KcBuilder::new(sigma);
        let main = b.state("main");
        let fmain = b.state("fmain");
        let pend: Vec<(usize, usize)> = sigma
            .letters()
            .iter()
            .map(|a| (b.state(&format!("pend.{a}")), b.state(&format!("fpend.{a}"))))
            .collect();
        let z0 = b.stack_symbol("Z0");
        let terminal_syms: Vec<usize> = sigma.letters().iter().map(|a| b.stack_symbol(&format!("t.{a}"))).collect();
        let mut finals = vec![fmain];
        finals.extend(pend.iter().map(|p| p.1));
        for i in 0..self.pairs.len() {
            let v = self.blocks(i)?;
            let u = &self.pairs[i].0;
            if u.is_empty() || v.is_empty() {
                continue;
            }
            let u = u.trim().split_long_rules(4);
            let v = v.split_long_rules(4);
            let marker = b.stack_symbol(&format!("M{}", i + 1));
            let u_syms = b.grammar_symbols(&u, &format!("u{}", i + 1));
            let v_syms = b.grammar_symbols(&v, &format!("v{}", i + 1));
            let u_start = u_syms[u.start()];
            let v_start = v_syms[v.start()];
            for (a, &(p, _)) in pend.iter().enumerate() {
                b.rule(0, Some(a), z0, p, vec![u_start, marker, z0]);
            }
            let expand = |b: &mut KcBuilder, g: &Cfg, syms: &[usize], state: usize| {
                for prod in g.productions() {
                    let push = prod
                        .body
                        .iter()
                        .map(|s| match *s {
                            GSym::T(t) => terminal_syms[t],
                            GSym::N(n) => syms[n],
                        })
                        .collect();
                    b.rule(state, None, syms[prod.head], state, push);
                }
            };
            for &state in std::iter::once(&main).chain(pend.iter().map(|p| &p.0)) {
                expand(&mut b, &u, &u_syms, state);
                expand(&mut b, &v, &v_syms, state);
            }
            b.rule(main, None, marker, fmain, vec![marker]);
            b.rule(fmain, None, marker, main, vec![v_start, marker]);
            for &(p, fp) in &pend {
                b.rule(p, None, marker, fp, vec![marker]);
                b.rule(fp, None, marker, p, vec![v_start, marker]);
            }
        }
        for (a, &t) in terminal_syms.iter().enumerate() {
            b.rule(main, Some(a), t, main, vec![]);
            b.rule(pend[a].0, None, t, main, vec![]);
        }
        b.finish(sigma, z0, &finals)
    }

    /// Independent lasso membership test by explicit factorization; see
    /// [`Verdict`]. `bound` is the length of the prefix searched for a
    /// pumping factorization.
    pub fn lasso_oracle(&self, w: &Lasso, bound: usize) -> Result<Verdict> {
        let letters = w.position_letters(&self.alphabet)?;
        let stream = self.alphabet.encode(&w.prefix(bound))?;
        let mut possible = false;
        for i in 0..self.pairs.len() {
            let u = &self.pairs[i].0;
            let v = self.blocks(i)?;
            if u.is_empty() || v.is_empty() {
                continue;
            }
            if pumping_factorization(u, &v, w, &stream) {
                return Ok(Verdict::Yes);
            }
            possible |= closure_admits(u, &v, w, &letters);
        }
        Ok(if possible { Verdict::Unknown } else { Verdict::No })
    }

    /// Expression-file text referring to grammar files by the given names.
    pub fn to_text(&self, names: &[(String, String)]) -> String {
        let mut out = String::new();
        for (u, v) in names {
            let _ = writeln!(out, "pair:\n  U: {u}\n  V: {v}");
        }
        out
    }

    /// Writes `path` and one grammar file per component next to it, named
    /// `<stem>.u<i>.cfg` / `<stem>.v<i>.cfg`.
    pub fn write_files(&self, path: &Path) -> Result<()> {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "expr".into());
        let mut names = Vec::new();
        for (i, (u, v)) in self.pairs.iter().enumerate() {
            let un = format!("{stem}.u{}.cfg", i + 1);
            let vn = format!("{stem}.v{}.cfg", i + 1);
            write(&dir.join(&un), &u.to_text())?;
            write(&dir.join(&vn), &v.to_text())?;
            names.push((un, vn));
        }
        write(path, &self.to_text(&names))
    }

    /// Parses an expression file: `pair:` blocks with `U:` and `V:` lines
    /// naming grammar files relative to the expression file.
    pub fn read_file(path: &Path) -> Result<OmegaKleeneExpr> {
        let text = read(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut pairs: Vec<(Option<PathBuf>, Option<PathBuf>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            if line == "pair:" {
                pairs.push((None, None));
                continue;
            }
            let current = pairs
                .last_mut()
                .ok_or_else(|| parse_err(lineno, "expected `pair:` before grammar lines"))?;
            if let Some(rest) = line.strip_prefix("U:") {
                current.0 = Some(dir.join(rest.trim()));
            } else if let Some(rest) = line.strip_prefix("V:") {
                current.1 = Some(dir.join(rest.trim()));
            } else {
                return Err(parse_err(lineno, format!("unrecognized line `{line}`")));
            }
        }
        let pairs = pairs
            .into_iter()
            .enumerate()
            .map(|(i, p)| match p {
                (Some(u), Some(v)) => Ok((read_grammar(&u)?, read_grammar(&v)?)),
                _ => Err(parse_err(0, format!("pair {} needs both `U:` and `V:`", i + 1))),
            })
            .collect::<Result<Vec<_>>>()?;
        OmegaKleeneExpr::new(pairs)
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn read_grammar(path: &Path) -> Result<Cfg> {
    Cfg::parse(&read(path)?).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// `V^ω` with `U = {λ}`.
pub fn omega_power(v: &Cfg) -> Result<OmegaKleeneExpr> {
    let u = Cfg::single_word(v.terminals(), &Word::empty())?;
    let e = OmegaKleeneExpr::new(vec![(u, v.clone())])?;
    e.blocks(0)?;
    Ok(e)
}

/// Outcome of [`OmegaKleeneExpr::lasso_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A factorization `x·y₁…yₘ` of a prefix was found whose block part
    /// starts and ends at the same cycle phase, so it pumps.
    Yes,
    /// No component admits a U-prefix followed by infinitely many V-blocks:
    /// the block-boundary relation over lasso positions has no reachable
    /// cycle.
    No,
    /// Membership is possible but no pumping factorization fits the bound.
    Unknown,
}

fn pumping_factorization(u: &Cfg, v: &Cfg, w: &Lasso, stream: &[usize]) -> bool {
    let n = stream.len();
    let spoke = w.spoke().len();
    let period = w.cycle().len();
    let mut reached = vec![false; n + 1];
    for (k, ok) in u.accepted_prefixes(stream).into_iter().enumerate() {
        reached[k] = ok;
    }
    let ends: Vec<Vec<usize>> = (0..=n)
        .map(|k| {
            v.accepted_prefixes(&stream[k..])
                .into_iter()
                .enumerate()
                .filter(|&(len, ok)| ok && len > 0)
                .map(|(len, _)| k + len)
                .collect()
        })
        .collect();
    for k in 0..=n {
        if !reached[k] {
            continue;
        }
        for &e in &ends[k] {
            reached[e] = true;
        }
    }
    // from a reached boundary k ≥ |u|, another boundary at the same phase
    for k in spoke..=n {
        if !reached[k] {
            continue;
        }
        let mut from_k = vec![false; n + 1];
        from_k[k] = true;
        for j in k..=n {
            if !from_k[j] {
                continue;
            }
            for &e in &ends[j] {
                if (e - k) % period == 0 {
                    return true;
                }
                from_k[e] = true;
            }
        }
    }
    false
}

/// Exact closure test over lasso positions: some U-walk from position 0 ends
/// at a position from which the V-block relation reaches a cycle.
fn closure_admits(u: &Cfg, v: &Cfg, w: &Lasso, letters: &[usize]) -> bool {
    let l = w.positions();
    let edges: Vec<(usize, usize, usize)> = (0..l).map(|p| (p, letters[p], w.next_position(p))).collect();
    let u_sum = u.walk_summaries(l, &edges);
    let v_sum = v.walk_summaries(l, &edges);
    let block = &v_sum[v.start()];
    let starts: Vec<usize> = u_sum[u.start()][0].iter().collect();
    // positions reachable through blocks from a U-end
    let mut seen = vec![false; l];
    let mut stack = starts.clone();
    for &s in &starts {
        seen[s] = true;
    }
    while let Some(p) = stack.pop() {
        for q in block[p].iter() {
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    // a seen position lying on a block cycle
    (0..l).filter(|&p| seen[p]).any(|p| {
        let mut visit = vec![false; l];
        let mut stack: Vec<usize> = block[p].iter().collect();
        while let Some(q) = stack.pop() {
            if q == p {
                return true;
            }
            if !visit[q] {
                visit[q] = true;
                stack.extend(block[q].iter());
            }
        }
        false
    })
}

struct KcBuilder {
    states: Vec<String>,
    stack: Vec<String>,
    taken: HashSet<String>,
    rules: Vec<Rule>,
}

impl KcBuilder {
    fn new(_sigma: &Alphabet) -> Self {
        let mut b = KcBuilder {
            states: Vec::new(),
            stack: Vec::new(),
            taken: HashSet::new(),
            rules: Vec::new(),
        };
        b.state("q0");
        b
    }

    fn state(&mut self, name: &str) -> usize {
        self.states.push(name.to_string());
        self.states.len() - 1
    }

    fn stack_symbol(&mut self, base: &str) -> usize {
        let clean: String = base
            .chars()
            .map(|c| if c.is_whitespace() || c == '(' || c == ')' || c == '#' { '_' } else { c })
            .collect();
        let mut name = clean.clone();
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{clean}~{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        self.stack.push(name);
        self.stack.len() - 1
    }

    fn grammar_symbols(&mut self, g: &Cfg, prefix: &str) -> Vec<usize> {
        g.nonterminals()
            .iter()
            .map(|n| self.stack_symbol(&format!("{prefix}.{n}")))
            .collect()
    }

    fn rule(&mut self, from: usize, input: Option<usize>, top: usize, to: usize, push: Vec<usize>) {
        self.rules.push(Rule {
            from,
            input,
            top,
            to,
            push,
        });
    }

    fn finish(self, sigma: &Alphabet, z0: usize, finals: &[usize]) -> Result<Bpda> {
        let pdm = Pdm::new(self.states, sigma.clone(), self.stack, 0, z0, self.rules)?;
        Bpda::new(pdm, finals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::infinitely_many_ones;
    use crate::grammar::{zeros_ones_balanced, zeros_then_one};

    fn l(text: &str) -> Lasso {
        Lasso::parse(text).unwrap()
    }

    #[test]
    fn zeros_then_one_power() {
        let e = omega_power(&zeros_then_one()).unwrap();
        let m = e.to_bpda().unwrap();
        assert!(m.accepts_lasso(&l("(01)^w")).unwrap());
        assert!(!m.accepts_lasso(&l("(0)^w")).unwrap());
        assert!(m.accepts_lasso(&l("0001(1)^w")).unwrap());
        assert_eq!(e.lasso_oracle(&l("(01)^w"), 16).unwrap(), Verdict::Yes);
        assert_eq!(e.lasso_oracle(&l("(0)^w"), 16).unwrap(), Verdict::No);
        let b = infinitely_many_ones();
        for w in ["1(0)^w", "(001)^w", "10(01)^w", "(1)^w"] {
            assert_eq!(m.accepts_lasso(&l(w)).unwrap(), b.accepts(&l(w)).unwrap(), "{w}");
        }
    }

    #[test]
    fn balanced_power() {
        let e = omega_power(&zeros_ones_balanced()).unwrap();
        let m = e.to_bpda().unwrap();
        for (w, expected) in [("(0011)^w", true), ("(01)^w", true), ("(0)^w", false), ("(001)^w", false), ("01(0)^w", false)] {
            assert_eq!(m.accepts_lasso(&l(w)).unwrap(), expected, "{w}");
        }
        assert_eq!(e.lasso_oracle(&l("(0011)^w"), 24).unwrap(), Verdict::Yes);
        assert_eq!(e.lasso_oracle(&l("(001)^w"), 24).unwrap(), Verdict::No);
    }

    #[test]
    fn only_lambda_rejected() {
        let lam = Cfg::parse("terminals: 0 1\nS -> #\n").unwrap();
        assert!(matches!(omega_power(&lam), Err(Error::OnlyLambda(1))));
        let with_lambda = Cfg::parse("terminals: 0 1\nS -> # | 0 1\n").unwrap();
        let m = omega_power(&with_lambda).unwrap().to_bpda().unwrap();
        assert!(m.accepts_lasso(&l("(01)^w")).unwrap());
    }

    #[test]
    fn empty_components_contribute_nothing() {
        let t = zeros_then_one().terminals().clone();
        let e = omega_power(&zeros_then_one()).unwrap();
        let dead = OmegaKleeneExpr::new(vec![(Cfg::empty_language(&t), zeros_then_one())]).unwrap();
        let both = dead.union(&e).unwrap();
        let m = both.to_bpda().unwrap();
        assert!(m.accepts_lasso(&l("(01)^w")).unwrap());
        assert!(!dead.to_bpda().unwrap().accepts_lasso(&l("(01)^w")).unwrap());
        assert_eq!(dead.lasso_oracle(&l("(01)^w"), 10).unwrap(), Verdict::No);
    }

    #[test]
    fn union_alphabet_mismatch() {
        let e = omega_power(&zeros_then_one()).unwrap();
        let other = omega_power(&Cfg::parse("terminals: a\nS -> a\n").unwrap()).unwrap();
        assert!(matches!(e.union(&other), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn spoke_component() {
        let t = zeros_then_one().terminals().clone();
        let u = Cfg::single_word(&t, &Word::parse("11").unwrap()).unwrap();
        let v = Cfg::single_word(&t, &Word::parse("0").unwrap()).unwrap();
        let e = OmegaKleeneExpr::new(vec![(u, v)]).unwrap();
        let m = e.to_bpda().unwrap();
        assert!(m.accepts_lasso(&l("11(0)^w")).unwrap());
        assert!(!m.accepts_lasso(&l("1(0)^w")).unwrap());
        assert!(!m.accepts_lasso(&l("(0)^w")).unwrap());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let e = omega_power(&zeros_ones_balanced()).unwrap();
        let path = dir.path().join("e.expr");
        e.write_files(&path).unwrap();
        assert_eq!(OmegaKleeneExpr::read_file(&path).unwrap(), e);
    }
}
