//! Letters, words, formal inversion, free reduction, word orders, and weights.
//!
//! Letters are opaque symbols with a user-declared involution. A self-inverse
//! generator still uses two formally distinct letters if the user declares
//! both: word operations are governed by formal alphabet identity, never by
//! group identity.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a letter within its alphabet.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter(pub u16);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite sequence of letters; the empty sequence is the empty word.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Prefix with exactly `n` letters, or the whole word when `n` exceeds it.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn suffix_from(&self, i: usize) -> Word {
        Word(self.0[i.min(self.0.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Length of the longest common suffix of two words.
    pub fn common_suffix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .rev()
            .zip(other.0.iter().rev())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Length of the longest common prefix of two words.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Word order kind: both refine length; `srev` breaks length ties at the
/// rightmost differing position, `shortlex` at the leftmost.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Srev,
    Shortlex,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderKind::Srev => write!(f, "srev"),
            OrderKind::Shortlex => write!(f, "shortlex"),
        }
    }
}

/// Finite inverse-closed letter set with involution, total order, and
/// positive rational weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alphabet {
    symbols: Vec<String>,
    inverse: Vec<Letter>,
    rank: Vec<u32>,
    weight: Vec<Rational64>,
}

#[derive(Serialize, Deserialize)]
pub struct AlphabetJson {
    pub letters: Vec<String>,
    pub inverse: BTreeMap<String, String>,
    pub order: Vec<String>,
    pub weight: BTreeMap<String, String>,
}

impl Alphabet {
    /// Builds an alphabet from symbol names, involution pairs, the `≺` order
    /// (ascending), and per-letter weights.
    pub fn new(
        symbols: Vec<String>,
        inverse: &[(String, String)],
        order: &[String],
        weight: &[(String, Rational64)],
    ) -> Result<Self> {
        let n = symbols.len();
        if n == 0 {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidAlphabet("alphabet too large".into()));
        }
        let mut index = BTreeMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate letter `{s}`")));
            }
        }
        let look = |s: &str| -> Result<usize> {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))
        };
        let mut inv = vec![usize::MAX; n];
        for (a, b) in inverse {
            let (ia, ib) = (look(a)?, look(b)?);
            inv[ia] = ib;
            inv[ib] = ia;
        }
        for (i, &j) in inv.iter().enumerate() {
            if j == usize::MAX {
                return Err(Error::InvalidAlphabet(format!(
                    "letter `{}` has no declared inverse",
                    symbols[i]
                )));
            }
            if inv[j] != i {
                return Err(Error::InvalidAlphabet(
                    "involution is not its own inverse".into(),
                ));
            }
        }
        if order.len() != n {
            return Err(Error::InvalidAlphabet(
                "order must list every letter exactly once".into(),
            ));
        }
        let mut rank = vec![u32::MAX; n];
        for (r, s) in order.iter().enumerate() {
            let i = look(s)?;
            if rank[i] != u32::MAX {
                return Err(Error::InvalidAlphabet(format!(
                    "letter `{s}` repeated in order"
                )));
            }
            rank[i] = r as u32;
        }
        let mut wt = vec![Rational64::zero(); n];
        let mut seen = vec![false; n];
        for (s, w) in weight {
            let i = look(s)?;
            if *w <= Rational64::zero() {
                return Err(Error::InvalidAlphabet(format!(
                    "weight of `{s}` must be positive"
                )));
            }
            wt[i] = *w;
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidAlphabet("missing letter weight".into()));
        }
        Ok(Alphabet {
            symbols,
            inverse: inv.into_iter().map(|i| Letter(i as u16)).collect(),
            rank,
            weight: wt,
        })
    }

    /// Inverse-closed alphabet with unit weights, letters ordered as given.
    /// `pairs` lists (letter, inverse-letter); a pair may be self-inverse.
    pub fn with_unit_weights(pairs: &[(&str, &str)]) -> Result<Self> {
        let mut symbols: Vec<String> = Vec::new();
        let mut inv = Vec::new();
        for (a, b) in pairs {
            for s in [a, b] {
                if !symbols.contains(&s.to_string()) {
                    symbols.push(s.to_string());
                }
            }
            inv.push((a.to_string(), b.to_string()));
        }
        let order = symbols.clone();
        let weight: Vec<(String, Rational64)> = symbols
            .iter()
            .map(|s| (s.clone(), Rational64::from_integer(1)))
            .collect();
        Alphabet::new(symbols, &inv, &order, &weight)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.symbols.len()).map(|i| Letter(i as u16))
    }

    /// Letters sorted ascending by `≺`.
    pub fn letters_by_order(&self) -> Vec<Letter> {
        let mut ls: Vec<Letter> = self.letters().collect();
        ls.sort_by_key(|l| self.rank[l.index()]);
        ls
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.symbols[l.index()]
    }

    pub fn symbol_names(&self) -> Vec<String> {
        self.symbols.clone()
    }

    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .map(|i| Letter(i as u16))
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    pub fn inverse(&self, l: Letter) -> Letter {
        self.inverse[l.index()]
    }

    pub fn rank(&self, l: Letter) -> u32 {
        self.rank[l.index()]
    }

    pub fn letter_weight(&self, l: Letter) -> Rational64 {
        self.weight[l.index()]
    }

    pub fn max_letter_weight(&self) -> Rational64 {
        *self.weight.iter().max().expect("nonempty")
    }

    pub fn min_letter_weight(&self) -> Rational64 {
        *self.weight.iter().min().expect("nonempty")
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        for l in w.letters() {
            if l.index() >= self.len() {
                return Err(Error::LetterOutOfRange(l.index(), self.len()));
            }
        }
        Ok(())
    }

    /// Reverses the word and replaces each letter by its involution; the
    /// result represents the group inverse.
    pub fn invert_word(&self, w: &Word) -> Result<Word> {
        self.check_word(w)?;
        Ok(w.letters().iter().rev().map(|&l| self.inverse(l)).collect())
    }

    /// Removes adjacent `a·a⁻¹` pairs until none remain. Cancellation is
    /// formal: declared inverse letters cancel even when the group element
    /// they map to is an involution.
    pub fn free_reduce(&self, w: &Word) -> Result<Word> {
        self.check_word(w)?;
        let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
        for &l in w.letters() {
            if stack.last().copied() == Some(self.inverse(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Ok(Word(stack))
    }

    /// Strict total order comparison. Shorter words come first in both kinds;
    /// at equal length `srev` compares the rightmost differing position and
    /// `shortlex` the leftmost, by `≺`.
    pub fn compare(&self, u: &Word, v: &Word, kind: OrderKind) -> Ordering {
        match u.len().cmp(&v.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match kind {
            OrderKind::Srev => {
                for (a, b) in u.letters().iter().rev().zip(v.letters().iter().rev()) {
                    if a != b {
                        return self.rank(*a).cmp(&self.rank(*b));
                    }
                }
                Ordering::Equal
            }
            OrderKind::Shortlex => {
                for (a, b) in u.letters().iter().zip(v.letters().iter()) {
                    if a != b {
                        return self.rank(*a).cmp(&self.rank(*b));
                    }
                }
                Ordering::Equal
            }
        }
    }

    /// Sum of letter weights; the empty word has weight 0.
    pub fn word_weight(&self, w: &Word) -> Rational64 {
        w.letters()
            .iter()
            .map(|&l| self.letter_weight(l))
            .sum()
    }

    pub fn word_name(&self, w: &Word) -> String {
        w.letters().iter().map(|&l| self.name(l)).collect()
    }

    /// Parses a word in which every letter is a single character.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        s.chars()
            .map(|c| self.letter(&c.to_string()))
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }

    pub fn word_to_names(&self, w: &Word) -> Vec<String> {
        w.letters().iter().map(|&l| self.name(l).to_string()).collect()
    }

    pub fn word_from_names(&self, names: &[String]) -> Result<Word> {
        names
            .iter()
            .map(|n| self.letter(n))
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }

    pub fn to_json(&self) -> AlphabetJson {
        AlphabetJson {
            letters: self.symbols.clone(),
            inverse: self
                .letters()
                .map(|l| (self.name(l).to_string(), self.name(self.inverse(l)).to_string()))
                .collect(),
            order: self
                .letters_by_order()
                .into_iter()
                .map(|l| self.name(l).to_string())
                .collect(),
            weight: self
                .letters()
                .map(|l| (self.name(l).to_string(), self.letter_weight(l).to_string()))
                .collect(),
        }
    }

    pub fn from_json(j: &AlphabetJson) -> Result<Self> {
        let inverse: Vec<(String, String)> = j
            .inverse
            .iter()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        let weight = j
            .weight
            .iter()
            .map(|(s, w)| {
                let r: Rational64 = w
                    .parse()
                    .map_err(|_| Error::InvalidAlphabet(format!("bad rational `{w}`")))?;
                Ok((s.clone(), r))
            })
            .collect::<Result<Vec<_>>>()?;
        Alphabet::new(j.letters.clone(), &inverse, &j.order, &weight)
    }

    /// All words of length exactly `len`, in shortlex order of letter indices.
    pub fn words_of_length(&self, len: usize) -> WordsIter<'_> {
        WordsIter {
            alphabet: self,
            len,
            next: Some(vec![Letter(0); len]),
        }
    }

    /// All words of length at most `maxlen`, shortest first.
    pub fn words_up_to(&self, maxlen: usize) -> impl Iterator<Item = Word> + '_ {
        (0..=maxlen).flat_map(move |n| self.words_of_length(n))
    }
}

pub struct WordsIter<'a> {
    alphabet: &'a Alphabet,
    len: usize,
    next: Option<Vec<Letter>>,
}

impl Iterator for WordsIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.next.take()?;
        let out = Word::new(cur.clone());
        if self.len > 0 {
            let mut v = cur;
            let last = self.alphabet.len() as u16 - 1;
            let mut i = self.len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if v[i].0 < last {
                    v[i].0 += 1;
                    for x in v[i + 1..].iter_mut() {
                        *x = Letter(0);
                    }
                    self.next = Some(v);
                    break;
                }
            }
        }
        Some(out)
    }
}
