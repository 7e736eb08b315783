//! Alphabets, finite words and ultimately periodic ω-words.
//!
//! Symbols are short printable tokens rather than characters, so letters such
//! as `↝` or `Z0` are representable. An ω-word is always presented as a
//! [`Lasso`] `u·v^ω`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A letter: a non-empty printable token without whitespace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() {
            return Err(Error::InvalidAlphabet("empty symbol".into()));
        }
        if token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidAlphabet(format!(
                "symbol `{token}` contains whitespace"
            )));
        }
        Ok(Symbol(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_single_char(&self) -> bool {
        self.0.chars().count() == 1
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand used throughout the tests and builders. Panics on malformed tokens.
pub fn sym(token: &str) -> Symbol {
    Symbol::new(token).expect("malformed symbol literal")
}

/// An ordered, duplicate-free, non-empty set of symbols.
#[derive(Clone, Debug)]
pub struct Alphabet {
    letters: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(letters: Vec<Symbol>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        let mut index = HashMap::with_capacity(letters.len());
        for (i, s) in letters.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Alphabet { letters, index })
    }

    /// Builds an alphabet from whitespace-separated tokens, e.g. `"a b c"`.
    pub fn from_tokens(tokens: &str) -> Result<Self> {
        let letters = tokens
            .split_whitespace()
            .map(Symbol::new)
            .collect::<Result<Vec<_>>>()?;
        Alphabet::new(letters)
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.index.contains_key(s)
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.letters[i]
    }

    /// `Σ ∪ {extra}` with `extra` appended last.
    pub fn with(&self, extra: &Symbol) -> Result<Self> {
        if self.contains(extra) {
            return Err(Error::SeparatorClash(extra.to_string()));
        }
        let mut letters = self.letters.clone();
        letters.push(extra.clone());
        Alphabet::new(letters)
    }

    /// Translates a word into letter indices, failing on foreign symbols.
    pub fn encode(&self, w: &Word) -> Result<Vec<usize>> {
        w.symbols()
            .iter()
            .map(|s| self.index_of(s).ok_or_else(|| Error::UnknownSymbol(s.to_string())))
            .collect()
    }

    pub fn decode(&self, letters: &[usize]) -> Word {
        Word::from_symbols(letters.iter().map(|&i| self.letters[i].clone()).collect())
    }

    /// Splits an undotted token string into symbols by greedy longest match.
    fn tokenize(&self, text: &str) -> Result<Vec<Symbol>> {
        let mut out = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let best = self
                .letters
                .iter()
                .filter(|s| rest.starts_with(s.as_str()))
                .max_by_key(|s| s.as_str().len())
                .ok_or_else(|| Error::UnknownSymbol(rest.to_string()))?;
            out.push(best.clone());
            rest = &rest[best.as_str().len()..];
        }
        Ok(out)
    }

    pub fn tokens(&self) -> String {
        self.letters
            .iter()
            .map(Symbol::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A finite word; the empty word λ is the empty sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    /// Parses `"aba"` (one symbol per character) or `"a.A.aa"` style dotted text,
    /// where each dot-separated chunk is again split per character unless the
    /// whole text uses dots between every symbol. Use [`Word::parse_with`] for
    /// multi-character symbols.
    pub fn parse(text: &str) -> Result<Self> {
        let symbols = text
            .split('.')
            .flat_map(|chunk| chunk.chars().map(|c| c.to_string()))
            .map(Symbol::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Word(symbols))
    }

    /// Alphabet-aware parsing: dotted text is split on dots, undotted text is
    /// tokenized by greedy longest match against the alphabet.
    pub fn parse_with(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let symbols = if text.contains('.') {
            text.split('.')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let s = Symbol::new(t)?;
                    if alphabet.contains(&s) {
                        Ok(s)
                    } else {
                        Err(Error::UnknownSymbol(t.to_string()))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            alphabet.tokenize(text)?
        };
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Every symbol separated by dots, e.g. `a.A.a.a.A`.
    pub fn dotted(&self) -> String {
        self.0
            .iter()
            .map(Symbol::as_str)
            .collect::<Vec<_>>()
            .join(".")
    }

    fn needs_dots(&self) -> bool {
        self.0.iter().any(|s| !s.is_single_char())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        if self.needs_dots() {
            f.write_str(&self.dotted())
        } else {
            for s in &self.0 {
                f.write_str(s.as_str())?;
            }
            Ok(())
        }
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// The ultimately periodic ω-word `spoke · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    spoke: Word,
    cycle: Word,
}

impl Lasso {
    pub fn new(spoke: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "lasso cycle must be non-empty".into(),
            });
        }
        Ok(Lasso { spoke, cycle })
    }

    pub fn spoke(&self) -> &Word {
        &self.spoke
    }

    pub fn cycle(&self) -> &Word {
        &self.cycle
    }

    /// `|u| + |v|`: the number of positions of the lasso graph.
    pub fn positions(&self) -> usize {
        self.spoke.len() + self.cycle.len()
    }

    /// Successor in the lasso position graph: positions `0..|u|+|v|`, the last
    /// one looping back to `|u|`.
    pub fn next_position(&self, pos: usize) -> usize {
        if pos + 1 < self.positions() {
            pos + 1
        } else {
            self.spoke.len()
        }
    }

    /// Position in the lasso graph of stream index `k`.
    pub fn position_of(&self, k: usize) -> usize {
        let u = self.spoke.len();
        if k < u {
            k
        } else {
            u + (k - u) % self.cycle.len()
        }
    }

    /// Symbol at lasso-graph position `pos`.
    pub fn symbol_at_position(&self, pos: usize) -> &Symbol {
        let u = self.spoke.len();
        if pos < u {
            &self.spoke.symbols()[pos]
        } else {
            &self.cycle.symbols()[pos - u]
        }
    }

    /// The `k`-th symbol (0-based) of the ω-word.
    pub fn at(&self, k: usize) -> &Symbol {
        self.symbol_at_position(self.position_of(k))
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Word {
        (0..n).map(|k| self.at(k).clone()).collect()
    }

    /// The unique equivalent lasso with minimal spoke, then minimal cycle.
    pub fn normalize(&self) -> Lasso {
        let cyc = self.cycle.symbols();
        let n = cyc.len();
        let period = (1..=n)
            .find(|&p| n % p == 0 && (p..n).all(|i| cyc[i] == cyc[i - p]))
            .unwrap_or(n);
        let mut cycle: Vec<Symbol> = cyc[..period].to_vec();
        let mut spoke: Vec<Symbol> = self.spoke.symbols().to_vec();
        while let (Some(a), Some(b)) = (spoke.last(), cycle.last()) {
            if a != b {
                break;
            }
            spoke.pop();
            cycle.rotate_right(1);
        }
        Lasso {
            spoke: Word(spoke),
            cycle: Word(cycle),
        }
    }

    pub fn same_word(&self, other: &Lasso) -> bool {
        self.normalize() == other.normalize()
    }

    /// `p · w`, normalized.
    pub fn prepend(&self, p: &Word) -> Lasso {
        Lasso {
            spoke: p.concat(&self.spoke),
            cycle: self.cycle.clone(),
        }
        .normalize()
    }

    /// Letter-index views of spoke and cycle over `alphabet`.
    pub fn encode(&self, alphabet: &Alphabet) -> Result<(Vec<usize>, Vec<usize>)> {
        Ok((alphabet.encode(&self.spoke)?, alphabet.encode(&self.cycle)?))
    }

    /// Letter index for every lasso-graph position.
    pub fn position_letters(&self, alphabet: &Alphabet) -> Result<Vec<usize>> {
        let (mut u, v) = self.encode(alphabet)?;
        u.extend(v);
        Ok(u)
    }

    /// Parses `u(v)^w`; `(v)^w` for an empty spoke. Undotted text is one symbol
    /// per character.
    pub fn parse(text: &str) -> Result<Self> {
        let (u, v) = split_lasso_literal(text)?;
        let dotted = text.contains('.');
        let word = |t: &str| -> Result<Word> {
            if dotted {
                t.split('.')
                    .filter(|s| !s.is_empty())
                    .map(Symbol::new)
                    .collect::<Result<Vec<_>>>()
                    .map(Word)
            } else {
                Word::parse(t)
            }
        };
        Lasso::new(word(u)?, word(v)?)
    }

    /// Like [`Lasso::parse`] but resolving multi-character symbols against `alphabet`.
    pub fn parse_with(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let (u, v) = split_lasso_literal(text)?;
        let dotted = text.contains('.');
        let word = |t: &str| -> Result<Word> {
            if dotted && !t.contains('.') && !t.is_empty() {
                let s = Symbol::new(t)?;
                if alphabet.contains(&s) {
                    return Ok(Word(vec![s]));
                }
            }
            Word::parse_with(t, alphabet)
        };
        Lasso::new(word(u)?, word(v)?)
    }
}

fn split_lasso_literal(text: &str) -> Result<(&str, &str)> {
    let text = text.trim();
    let bad = || Error::Parse {
        line: 0,
        msg: format!("malformed lasso literal `{text}`, expected u(v)^w"),
    };
    let body = text.strip_suffix(")^w").ok_or_else(bad)?;
    let open = body.rfind('(').ok_or_else(bad)?;
    let (u, v) = (&body[..open], &body[open + 1..]);
    let u = u.strip_suffix('.').unwrap_or(u);
    if v.is_empty() {
        return Err(bad());
    }
    Ok((u, v))
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dotted = self.spoke.needs_dots() || self.cycle.needs_dots();
        let render = |w: &Word| {
            if dotted {
                w.dotted()
            } else {
                w.symbols().iter().map(Symbol::as_str).collect()
            }
        };
        write!(f, "{}({})^w", render(&self.spoke), render(&self.cycle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(u: &str, v: &str) -> Lasso {
        Lasso::new(Word::parse(u).unwrap(), Word::parse(v).unwrap()).unwrap()
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(lasso("", "ab").prefix(3), Word::parse("aba").unwrap());
        assert_eq!(lasso("0", "1").prefix(1), Word::parse("0").unwrap());
        assert_eq!(lasso("", "a").prefix(0), Word::empty());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(lasso("", "aa").normalize(), lasso("", "a"));
        assert_eq!(lasso("a", "ba").normalize(), lasso("", "ab"));
        assert_eq!(lasso("x", "y").normalize(), lasso("x", "y"));
    }

    #[test]
    fn prepend_examples() {
        let w = lasso("b", "ab");
        assert_eq!(w.prepend(&Word::empty()), w.normalize());
        assert_eq!(lasso("", "1").prepend(&Word::parse("0").unwrap()), lasso("0", "1"));
        // ab · b(ab)^ω streams as a.b.b.a.b.a…, i.e. ab(ba)^ω
        let got = w.prepend(&Word::parse("ab").unwrap());
        assert_eq!(got, lasso("ab", "ba"));
        let expected = Word::parse("ab").unwrap().concat(&w.prefix(20));
        assert_eq!(got.prefix(22), expected);
    }

    #[test]
    fn empty_cycle_rejected() {
        assert!(Lasso::new(Word::parse("a").unwrap(), Word::empty()).is_err());
    }

    #[test]
    fn alphabet_invariants() {
        assert!(Alphabet::from_tokens("").is_err());
        assert!(Alphabet::from_tokens("a a").is_err());
        assert!(Symbol::new("a b").is_err());
        let sigma = Alphabet::from_tokens("a b").unwrap();
        assert!(sigma.with(&sym("a")).is_err());
        assert_eq!(sigma.with(&sym("A")).unwrap().len(), 3);
    }

    #[test]
    fn literal_syntax() {
        let w = Lasso::parse("01(10)^w").unwrap();
        assert_eq!(w, lasso("01", "10"));
        assert_eq!(w.to_string(), "01(10)^w");
        assert_eq!(Lasso::parse("(ab)^w").unwrap(), lasso("", "ab"));
        assert!(Lasso::parse("ab").is_err());
        assert!(Lasso::parse("a()^w").is_err());

        let sigma = Alphabet::from_tokens("a Z0 ↝").unwrap();
        let w = Lasso::parse_with("a.Z0(↝.a)^w", &sigma).unwrap();
        assert_eq!(w.spoke().symbols(), &[sym("a"), sym("Z0")]);
        assert_eq!(w.to_string(), "a.Z0(↝.a)^w");
        assert_eq!(Lasso::parse_with(&w.to_string(), &sigma).unwrap(), w);
        let single = Lasso::parse_with("(Z0)^w", &sigma).unwrap();
        assert_eq!(single.cycle().symbols(), &[sym("Z0")]);
        assert_eq!(Lasso::parse_with(&single.to_string(), &sigma).unwrap(), single);
        assert!(Lasso::parse_with("(q)^w", &sigma).is_err());
    }

    #[test]
    fn word_display() {
        assert_eq!(Word::parse("a.A.aa").unwrap().dotted(), "a.A.a.a");
        assert_eq!(Word::empty().to_string(), "λ");
    }
}
