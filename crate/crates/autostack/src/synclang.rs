//! Synchronously regular languages of word tuples: padded product alphabets,
//! the padding discipline, and the specific conventions for concatenation,
//! projection, and coordinate restriction.
//!
//! A padded symbol is a tuple with one entry per coordinate, each a letter of
//! that coordinate's alphabet or its padding symbol; the all-padding tuple is
//! excluded from the alphabet. Accepted symbol sequences are well-padded:
//! in every coordinate the padding symbols form a (possibly empty) suffix.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsa::{Dfa, DfaJson, LanguageBound, Nfa, StateId, Sym};
use crate::words::{Alphabet, AlphabetJson, Letter, Word};

/// Product alphabet of 2 or 3 padded coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PaddedAlphabet {
    bases: Vec<Alphabet>,
    pads: Vec<String>,
}

impl PaddedAlphabet {
    pub fn new(bases: Vec<Alphabet>, pads: Vec<String>) -> Result<Self> {
        if bases.len() < 2 || bases.len() > 3 {
            return Err(Error::InvalidAlphabet(format!(
                "padded alphabet arity must be 2 or 3, got {}",
                bases.len()
            )));
        }
        if pads.len() != bases.len() {
            return Err(Error::InvalidAlphabet("one padding symbol per coordinate".into()));
        }
        for (b, p) in bases.iter().zip(&pads) {
            if b.letter(p).is_ok() {
                return Err(Error::InvalidAlphabet(format!(
                    "padding symbol `{p}` collides with a base letter"
                )));
            }
        }
        Ok(PaddedAlphabet { bases, pads })
    }

    /// The usual two-coordinate alphabet over one base, padding written `$`.
    pub fn pair(base: &Alphabet) -> Self {
        PaddedAlphabet {
            bases: vec![base.clone(), base.clone()],
            pads: vec!["$".into(), "$".into()],
        }
    }

    pub fn arity(&self) -> usize {
        self.bases.len()
    }

    pub fn base(&self, coord: usize) -> &Alphabet {
        &self.bases[coord]
    }

    pub fn pad_symbol(&self, coord: usize) -> &str {
        &self.pads[coord]
    }

    /// Number of tuple symbols (the all-padding tuple is excluded).
    pub fn n_symbols(&self) -> usize {
        self.bases.iter().map(|b| b.len() + 1).product::<usize>() - 1
    }

    /// Encodes a tuple (None = padding). The all-padding tuple is rejected.
    pub fn encode(&self, parts: &[Option<Letter>]) -> Result<Sym> {
        if parts.len() != self.arity() {
            return Err(Error::BadCoordinate(parts.len(), self.arity()));
        }
        if parts.iter().all(|p| p.is_none()) {
            return Err(Error::IllPadded("all-padding tuple".into()));
        }
        let mut code = 0usize;
        for (i, p) in parts.iter().enumerate() {
            let radix = self.bases[i].len() + 1;
            let digit = match p {
                Some(l) => {
                    if l.index() >= self.bases[i].len() {
                        return Err(Error::LetterOutOfRange(l.index(), self.bases[i].len()));
                    }
                    l.index()
                }
                None => self.bases[i].len(),
            };
            code = code * radix + digit;
        }
        Ok(code as Sym)
    }

    pub fn decode(&self, sym: Sym) -> Vec<Option<Letter>> {
        let mut code = sym as usize;
        let mut out = vec![None; self.arity()];
        for i in (0..self.arity()).rev() {
            let radix = self.bases[i].len() + 1;
            let digit = code % radix;
            code /= radix;
            out[i] = if digit == self.bases[i].len() {
                None
            } else {
                Some(Letter(digit as u16))
            };
        }
        out
    }

    pub fn symbol_names(&self) -> Vec<String> {
        (0..self.n_symbols() as Sym)
            .map(|s| {
                let parts = self.decode(s);
                let names: Vec<String> = parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| match p {
                        Some(l) => self.bases[i].name(*l).to_string(),
                        None => self.pads[i].clone(),
                    })
                    .collect();
                format!("({})", names.join(","))
            })
            .collect()
    }

    /// Pads a tuple of words into a symbol sequence.
    pub fn pad(&self, words: &[&Word]) -> Result<Vec<Sym>> {
        if words.len() != self.arity() {
            return Err(Error::BadCoordinate(words.len(), self.arity()));
        }
        for (i, w) in words.iter().enumerate() {
            self.bases[i].check_word(w)?;
        }
        let m = words.iter().map(|w| w.len()).max().unwrap_or(0);
        (0..m)
            .map(|j| {
                let parts: Vec<Option<Letter>> = words
                    .iter()
                    .map(|w| w.letters().get(j).copied())
                    .collect();
                self.encode(&parts)
            })
            .collect()
    }

    /// Inverse of [`pad`]; requires a well-padded sequence.
    pub fn unpad(&self, seq: &[Sym]) -> Result<Vec<Word>> {
        let mut words = vec![Word::empty(); self.arity()];
        let mut ended = vec![false; self.arity()];
        for &s in seq {
            if s as usize >= self.n_symbols() {
                return Err(Error::IllPadded(format!("symbol {s} out of range")));
            }
            for (i, p) in self.decode(s).into_iter().enumerate() {
                match p {
                    Some(l) => {
                        if ended[i] {
                            return Err(Error::IllPadded(format!(
                                "letter after padding in coordinate {i}"
                            )));
                        }
                        words[i].push(l);
                    }
                    None => ended[i] = true,
                }
            }
        }
        Ok(words)
    }

    /// Regular filter accepting exactly the well-padded symbol sequences.
    pub fn well_padding_filter(&self) -> Dfa {
        let arity = self.arity();
        let n_states = 1 << arity; // pad-started flags
        let ns = self.n_symbols();
        let sink = n_states as StateId;
        let mut table = vec![vec![sink; ns]; n_states + 1];
        for st in 0..n_states {
            for sym in 0..ns {
                let parts = self.decode(sym as Sym);
                let mut next = st;
                let mut ok = true;
                for (i, p) in parts.iter().enumerate() {
                    let started = st & (1 << i) != 0;
                    match p {
                        Some(_) if started => ok = false,
                        Some(_) => {}
                        None => next |= 1 << i,
                    }
                }
                if ok {
                    table[st][sym] = next as StateId;
                }
            }
        }
        table[n_states] = vec![sink; ns];
        let mut accepting = vec![true; n_states + 1];
        accepting[n_states] = false;
        Dfa::from_table(self.symbol_names(), table, 0, accepting).expect("valid filter")
    }

    pub fn to_json(&self) -> PaddedAlphabetJson {
        PaddedAlphabetJson {
            coordinates: self.bases.iter().map(|b| b.to_json()).collect(),
            pads: self.pads.clone(),
        }
    }

    pub fn from_json(j: &PaddedAlphabetJson) -> Result<Self> {
        PaddedAlphabet::new(
            j.coordinates
                .iter()
                .map(Alphabet::from_json)
                .collect::<Result<Vec<_>>>()?,
            j.pads.clone(),
        )
    }
}

#[derive(Serialize, Deserialize)]
pub struct PaddedAlphabetJson {
    pub coordinates: Vec<AlphabetJson>,
    pub pads: Vec<String>,
}

/// A synchronously regular tuple language: a DFA over a padded product
/// alphabet whose accepted sequences are all well-padded.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SyncLanguage {
    alphabet: PaddedAlphabet,
    machine: Dfa,
}

#[derive(Serialize, Deserialize)]
pub struct SyncLanguageJson {
    pub alphabet: PaddedAlphabetJson,
    pub machine: DfaJson,
}

impl SyncLanguage {
    /// Wraps a machine, enforcing well-padding by intersecting with the
    /// padding filter, and minimizes.
    pub fn new(alphabet: PaddedAlphabet, machine: Dfa) -> Result<Self> {
        if machine.symbols() != alphabet.symbol_names().as_slice() {
            return Err(Error::AlphabetMismatch(
                "machine alphabet does not match padded alphabet".into(),
            ));
        }
        let machine = machine.intersect(&alphabet.well_padding_filter())?;
        Ok(SyncLanguage { alphabet, machine })
    }

    /// Wraps a machine known to accept only well-padded sequences, without
    /// filtering or minimizing. Used where the state layout matters.
    pub fn from_dfa_unchecked(alphabet: PaddedAlphabet, machine: Dfa) -> Self {
        SyncLanguage { alphabet, machine }
    }

    pub fn from_pairs(alphabet: PaddedAlphabet, pairs: &[(Word, Word)]) -> Result<Self> {
        let words: Vec<Vec<Sym>> = pairs
            .iter()
            .map(|(u, v)| alphabet.pad(&[u, v]))
            .collect::<Result<Vec<_>>>()?;
        let machine = Dfa::finite(alphabet.symbol_names(), &words);
        Ok(SyncLanguage { alphabet, machine })
    }

    pub fn empty(alphabet: PaddedAlphabet) -> Self {
        let machine = Dfa::empty_language(alphabet.symbol_names());
        SyncLanguage { alphabet, machine }
    }

    /// All well-padded tuples.
    pub fn full(alphabet: PaddedAlphabet) -> Self {
        let machine = alphabet.well_padding_filter().minimized();
        SyncLanguage { alphabet, machine }
    }

    pub fn alphabet(&self) -> &PaddedAlphabet {
        &self.alphabet
    }

    pub fn machine(&self) -> &Dfa {
        &self.machine
    }

    pub fn minimized(&self) -> SyncLanguage {
        SyncLanguage {
            alphabet: self.alphabet.clone(),
            machine: self.machine.minimized(),
        }
    }

    pub fn contains(&self, words: &[&Word]) -> Result<bool> {
        let seq = self.alphabet.pad(words)?;
        self.machine.accepts(&seq)
    }

    pub fn contains_pair(&self, u: &Word, v: &Word) -> Result<bool> {
        self.contains(&[u, v])
    }

    fn same_alphabet(&self, other: &SyncLanguage) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch("padded alphabets differ".into()));
        }
        Ok(())
    }

    pub fn union(&self, other: &SyncLanguage) -> Result<SyncLanguage> {
        self.same_alphabet(other)?;
        Ok(SyncLanguage {
            alphabet: self.alphabet.clone(),
            machine: self.machine.union(&other.machine)?,
        })
    }

    pub fn intersect(&self, other: &SyncLanguage) -> Result<SyncLanguage> {
        self.same_alphabet(other)?;
        Ok(SyncLanguage {
            alphabet: self.alphabet.clone(),
            machine: self.machine.intersect(&other.machine)?,
        })
    }

    /// Set difference; the result stays well-padded since it is a subset of
    /// `self`.
    pub fn difference(&self, other: &SyncLanguage) -> Result<SyncLanguage> {
        self.same_alphabet(other)?;
        Ok(SyncLanguage {
            alphabet: self.alphabet.clone(),
            machine: self.machine.difference(&other.machine)?,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.machine.is_language_empty()
    }

    pub fn equivalent(&self, other: &SyncLanguage) -> Result<bool> {
        self.same_alphabet(other)?;
        self.machine.equivalent(&other.machine)
    }

    /// Accepted tuples with padded length at most `maxlen`, in shortlex
    /// order of the padded symbol sequences.
    pub fn enumerate_tuples(&self, maxlen: usize) -> Result<Vec<Vec<Word>>> {
        let seqs = self.machine.enumerate_up_to(maxlen);
        seqs.iter().map(|s| self.alphabet.unpad(s)).collect()
    }

    pub fn enumerate_pairs(&self, maxlen: usize) -> Result<Vec<(Word, Word)>> {
        Ok(self
            .enumerate_tuples(maxlen)?
            .into_iter()
            .map(|mut t| {
                let v = t.pop().expect("arity 2");
                let u = t.pop().expect("arity 2");
                (u, v)
            })
            .collect())
    }

    /// Regular language of one coordinate, padding dropped.
    pub fn project(&self, coord: usize) -> Result<Dfa> {
        if coord >= self.alphabet.arity() {
            return Err(Error::BadCoordinate(coord, self.alphabet.arity()));
        }
        let base = self.alphabet.base(coord);
        let mut nfa = Nfa::new(base.symbol_names());
        for q in 0..self.machine.n_states() as StateId {
            nfa.add_state(self.machine.is_accepting(q));
        }
        nfa.add_start(self.machine.start());
        for q in 0..self.machine.n_states() as StateId {
            for s in 0..self.machine.n_symbols() {
                let r = self.machine.step(q, s);
                match self.alphabet.decode(s as Sym)[coord] {
                    Some(l) => nfa.add_edge(q, l.0, r),
                    None => nfa.add_eps(q, r),
                }
            }
        }
        Ok(nfa.determinize_minimize())
    }

    /// Sub-language whose chosen coordinate (unpadded) lies in `x`.
    pub fn coordinate_restrict(&self, coord: usize, x: &Dfa) -> Result<SyncLanguage> {
        if coord >= self.alphabet.arity() {
            return Err(Error::BadCoordinate(coord, self.alphabet.arity()));
        }
        let base = self.alphabet.base(coord);
        if x.symbols() != base.symbol_names().as_slice() {
            return Err(Error::AlphabetMismatch(
                "restriction automaton alphabet does not match coordinate".into(),
            ));
        }
        let ns = self.machine.n_symbols();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut table: Vec<Vec<StateId>> = Vec::new();
        let mut accepting = Vec::new();
        let mut queue = VecDeque::new();
        let start = (self.machine.start(), x.start());
        index.insert(start, 0);
        table.push(vec![0; ns]);
        accepting.push(self.machine.is_accepting(start.0) && x.is_accepting(start.1));
        queue.push_back(start);
        while let Some((a, b)) = queue.pop_front() {
            let qid = index[&(a, b)];
            for s in 0..ns {
                let na = self.machine.step(a, s);
                let nb = match self.alphabet.decode(s as Sym)[coord] {
                    Some(l) => x.step(b, l.index()),
                    None => b,
                };
                let nid = match index.get(&(na, nb)) {
                    Some(&id) => id,
                    None => {
                        let id = accepting.len() as StateId;
                        index.insert((na, nb), id);
                        table.push(vec![0; ns]);
                        accepting
                            .push(self.machine.is_accepting(na) && x.is_accepting(nb));
                        queue.push_back((na, nb));
                        id
                    }
                };
                table[qid as usize][s] = nid;
            }
        }
        let machine =
            Dfa::from_table(self.machine.symbols().to_vec(), table, 0, accepting)?.minimized();
        Ok(SyncLanguage {
            alphabet: self.alphabet.clone(),
            machine,
        })
    }

    pub fn to_json(&self) -> SyncLanguageJson {
        SyncLanguageJson {
            alphabet: self.alphabet.to_json(),
            machine: self.machine.to_json(),
        }
    }

    pub fn from_json(j: &SyncLanguageJson) -> Result<Self> {
        let alphabet = PaddedAlphabet::from_json(&j.alphabet)?;
        let machine = Dfa::from_json(&j.machine)?;
        SyncLanguage::new(alphabet, machine)
    }
}

/// The language `D* = {(w, w)}` of equal pairs, restricted to a regular
/// language when `lang` is given.
pub fn diagonal_of(alphabet: &PaddedAlphabet, lang: &Dfa) -> Result<SyncLanguage> {
    if alphabet.arity() != 2 || alphabet.base(0) != alphabet.base(1) {
        return Err(Error::InvalidAlphabet(
            "diagonal needs two equal coordinates".into(),
        ));
    }
    let base = alphabet.base(0);
    if lang.symbols() != base.symbol_names().as_slice() {
        return Err(Error::AlphabetMismatch("diagonal operand alphabet".into()));
    }
    let ns = alphabet.n_symbols();
    let n = lang.n_states();
    let sink = n as StateId;
    let mut table = vec![vec![sink; ns]; n + 1];
    for q in 0..n {
        for l in base.letters() {
            let sym = alphabet.encode(&[Some(l), Some(l)])? as usize;
            table[q][sym] = lang.step(q as StateId, l.index());
        }
    }
    let mut accepting: Vec<bool> = (0..n as StateId).map(|q| lang.is_accepting(q)).collect();
    accepting.push(false);
    let machine = Dfa::from_table(alphabet.symbol_names(), table, lang.start(), accepting)?
        .minimized();
    Ok(SyncLanguage::from_dfa_unchecked(alphabet.clone(), machine))
}

/// `{(a, a) | a ∈ A}*`.
pub fn diagonal_star(base: &Alphabet) -> SyncLanguage {
    let alphabet = PaddedAlphabet::pair(base);
    let all = Dfa::all_words(base.symbol_names());
    diagonal_of(&alphabet, &all).expect("alphabets match")
}

/// Pairs whose first coordinate is longer than the second by exactly
/// (`Exact`) or at least (`AtLeast`) the given number of letters.
#[derive(Clone, Copy, Debug)]
pub enum SkewBound {
    Exact(usize),
    AtLeast(usize),
}

pub fn skew_language(alphabet: &PaddedAlphabet, bound: SkewBound) -> Result<SyncLanguage> {
    if alphabet.arity() != 2 {
        return Err(Error::BadCoordinate(2, alphabet.arity()));
    }
    let i = match bound {
        SkewBound::Exact(i) | SkewBound::AtLeast(i) => i,
    };
    let ns = alphabet.n_symbols();
    // states 0..=i count pads seen in the second coordinate; i+1 = sink
    let sink = (i + 1) as StateId;
    let mut table = vec![vec![sink; ns]; i + 2];
    for st in 0..=i {
        for sym in 0..ns {
            let parts = alphabet.decode(sym as Sym);
            match (parts[0], parts[1]) {
                (Some(_), Some(_)) if st == 0 => table[st][sym] = 0,
                (Some(_), None) => {
                    let next = st + 1;
                    if next <= i {
                        table[st][sym] = next as StateId;
                    } else if matches!(bound, SkewBound::AtLeast(_)) {
                        table[st][sym] = i as StateId;
                    }
                }
                _ => {}
            }
        }
    }
    let mut accepting = vec![false; i + 2];
    accepting[i] = true;
    let machine = Dfa::from_table(alphabet.symbol_names(), table, 0, accepting)?.minimized();
    Ok(SyncLanguage::from_dfa_unchecked(alphabet.clone(), machine))
}

const CONCAT_ENUM_CAP: usize = 1 << 16;

/// Synchronized concatenation: each coordinate concatenated before padding,
/// pre-existing padding moved to the end. Exact whenever either operand has
/// a finite language; two infinite operands are rejected.
pub fn sync_concat(l: &SyncLanguage, k: &SyncLanguage) -> Result<SyncLanguage> {
    l.same_alphabet(k)?;
    if l.alphabet.arity() != 2 {
        return Err(Error::BadCoordinate(2, l.alphabet.arity()));
    }
    match k.machine.language_bound() {
        LanguageBound::Empty => Ok(SyncLanguage::empty(l.alphabet.clone())),
        LanguageBound::Finite(maxlen) => concat_right_finite(l, k, maxlen),
        LanguageBound::Infinite => match l.machine.language_bound() {
            LanguageBound::Empty => Ok(SyncLanguage::empty(l.alphabet.clone())),
            LanguageBound::Finite(maxlen) => concat_left_finite(l, k, maxlen),
            LanguageBound::Infinite => Err(Error::SyncConcatUnbounded),
        },
    }
}

fn concat_right_finite(l: &SyncLanguage, k: &SyncLanguage, maxlen: usize) -> Result<SyncLanguage> {
    let pairs = k.enumerate_pairs(maxlen)?;
    if pairs.len() > CONCAT_ENUM_CAP {
        return Err(Error::EnumerationGuard(pairs.len()));
    }
    let alpha = &l.alphabet;
    let ml = &l.machine;
    let dist = ml.distance_to_accepting();
    let live = |q: StateId| dist[q as usize] != u32::MAX;
    let ns = alpha.n_symbols();

    // state: (Option<l-state>, Option<v1 progress>, Option<v2 progress>)
    type CState = (Option<StateId>, Option<usize>, Option<usize>);
    let mut nfa = Nfa::new(alpha.symbol_names());

    for (v1, v2) in &pairs {
        let mut index: HashMap<CState, StateId> = HashMap::new();
        let mut queue: VecDeque<CState> = VecDeque::new();
        let accept_of = |st: &CState| {
            st.0.is_none() && st.1 == Some(v1.len()) && st.2 == Some(v2.len())
        };
        let start: CState = (Some(ml.start()), None, None);
        let sid = nfa.add_state(accept_of(&start));
        nfa.add_start(sid);
        index.insert(start, sid);
        queue.push_back(start);
        while let Some(st) = queue.pop_front() {
            let qid = index[&st];
            let (lq, p1, p2) = st;
            let push = |nfa: &mut Nfa,
                            index: &mut HashMap<CState, StateId>,
                            queue: &mut VecDeque<CState>,
                            ns_state: CState|
             -> StateId {
                match index.get(&ns_state) {
                    Some(&id) => id,
                    None => {
                        let id = nfa.add_state(accept_of(&ns_state));
                        index.insert(ns_state, id);
                        queue.push_back(ns_state);
                        id
                    }
                }
            };
            // Epsilon switches from the u-segment to the v-segment. When the
            // second coordinate switches, the l-machine has read its whole
            // padded pair and must be accepting.
            if let Some(q) = lq {
                if p1.is_none() {
                    let nst: CState = if p2.is_some() {
                        (None, Some(0), p2)
                    } else {
                        (Some(q), Some(0), p2)
                    };
                    if p2.is_none() || ml.is_accepting(q) {
                        let id = push(&mut nfa, &mut index, &mut queue, nst);
                        nfa.add_eps(qid, id);
                    }
                }
                if p2.is_none() {
                    let nst: CState = if p1.is_some() {
                        (None, p1, Some(0))
                    } else {
                        (Some(q), p1, Some(0))
                    };
                    if p1.is_none() || ml.is_accepting(q) {
                        let id = push(&mut nfa, &mut index, &mut queue, nst);
                        nfa.add_eps(qid, id);
                    }
                }
            }
            // symbol transitions
            for sym in 0..ns {
                let parts = alpha.decode(sym as Sym);
                let (x, y) = (parts[0], parts[1]);
                // coordinate 1
                let np1 = match p1 {
                    None => {
                        if x.is_none() {
                            continue; // padding cannot appear inside the u-segment
                        }
                        None
                    }
                    Some(i) if i < v1.len() => {
                        if x != Some(v1.letters()[i]) {
                            continue;
                        }
                        Some(i + 1)
                    }
                    Some(i) => {
                        if x.is_some() {
                            continue; // v1 consumed; only padding follows
                        }
                        Some(i)
                    }
                };
                let np2 = match p2 {
                    None => {
                        if y.is_none() {
                            continue;
                        }
                        None
                    }
                    Some(j) if j < v2.len() => {
                        if y != Some(v2.letters()[j]) {
                            continue;
                        }
                        Some(j + 1)
                    }
                    Some(j) => {
                        if y.is_some() {
                            continue;
                        }
                        Some(j)
                    }
                };
                let nlq = match lq {
                    Some(q) => {
                        let c1 = if p1.is_none() { x } else { None };
                        let c2 = if p2.is_none() { y } else { None };
                        // both padded would mean the l-pair already ended
                        let mlsym = alpha.encode(&[c1, c2])?;
                        let nq = ml.step(q, mlsym as usize);
                        if !live(nq) {
                            continue;
                        }
                        Some(nq)
                    }
                    None => None,
                };
                let nst: CState = (nlq, np1, np2);
                let id = push(&mut nfa, &mut index, &mut queue, nst);
                nfa.add_edge(qid, sym as Sym, id);
            }
        }
    }
    SyncLanguage::new(alpha.clone(), nfa.determinize_minimize())
}

fn concat_left_finite(l: &SyncLanguage, k: &SyncLanguage, maxlen: usize) -> Result<SyncLanguage> {
    let pairs = l.enumerate_pairs(maxlen)?;
    if pairs.len() > CONCAT_ENUM_CAP {
        return Err(Error::EnumerationGuard(pairs.len()));
    }
    let alpha = &l.alphabet;
    let mk = &k.machine;
    let ns = alpha.n_symbols();

    // Feeds the k-machine one symbol built from coordinate values; None,None
    // kills the transition (only ill-padded inputs produce it).
    let feed = |q: StateId, c1: Option<Letter>, c2: Option<Letter>| -> Option<StateId> {
        if c1.is_none() && c2.is_none() {
            return None;
        }
        let sym = alpha.encode(&[c1, c2]).ok()?;
        Some(mk.step(q, sym as usize))
    };

    // buffered early-coordinate values: Some(letter) entries then None ones
    type BState = (usize, StateId, VecDeque<Option<Letter>>);
    let mut nfa = Nfa::new(alpha.symbol_names());

    for (u1, u2) in &pairs {
        let d1 = u1.len();
        let d2 = u2.len();
        let m = d1.max(d2);
        let early_is_first = d1 <= d2;
        // drain acceptance: remaining buffered values pair with padding
        let accept_of = |st: &BState| -> bool {
            if st.0 < m {
                return false;
            }
            let mut q = st.1;
            for &e in &st.2 {
                match e {
                    Some(letter) => {
                        let (c1, c2) = if early_is_first {
                            (Some(letter), None)
                        } else {
                            (None, Some(letter))
                        };
                        match feed(q, c1, c2) {
                            Some(nq) => q = nq,
                            None => return false,
                        }
                    }
                    None => break,
                }
            }
            mk.is_accepting(q)
        };

        let mut index: HashMap<BState, StateId> = HashMap::new();
        let mut queue: VecDeque<BState> = VecDeque::new();
        let start: BState = (0, mk.start(), VecDeque::new());
        let sid = nfa.add_state(accept_of(&start));
        nfa.add_start(sid);
        index.insert(start.clone(), sid);
        queue.push_back(start);
        while let Some(st) = queue.pop_front() {
            let qid = index[&st];
            let (pos, kq, ref buf) = st;
            for sym in 0..ns {
                let parts = alpha.decode(sym as Sym);
                let (x, y) = (parts[0], parts[1]);
                let next: Option<BState> = if pos < d1.min(d2) {
                    // both coordinates still inside the u-segment
                    if x == Some(u1.letters()[pos]) && y == Some(u2.letters()[pos]) {
                        Some((pos + 1, kq, buf.clone()))
                    } else {
                        None
                    }
                } else if pos < m {
                    // late coordinate still forced; early one buffers
                    let (late_val, early_val, late_word) = if early_is_first {
                        (y, x, u2)
                    } else {
                        (x, y, u1)
                    };
                    if late_val == Some(late_word.letters()[pos]) {
                        let mut nb = buf.clone();
                        nb.push_back(early_val);
                        Some((pos + 1, kq, nb))
                    } else {
                        None
                    }
                } else {
                    // both coordinates feed the k-machine, offset by the buffer
                    let mut nb = buf.clone();
                    let (early_cur, late_cur) = if early_is_first { (x, y) } else { (y, x) };
                    nb.push_back(early_cur);
                    let early_val = nb.pop_front().expect("just pushed");
                    let (c1, c2) = if early_is_first {
                        (early_val, late_cur)
                    } else {
                        (late_cur, early_val)
                    };
                    feed(kq, c1, c2).map(|nq| (m, nq, nb))
                };
                if let Some(nst) = next {
                    let id = match index.get(&nst) {
                        Some(&id) => id,
                        None => {
                            let id = nfa.add_state(accept_of(&nst));
                            index.insert(nst.clone(), id);
                            queue.push_back(nst);
                            id
                        }
                    };
                    nfa.add_edge(qid, sym as Sym, id);
                }
            }
        }
    }
    SyncLanguage::new(alpha.clone(), nfa.determinize_minimize())
}
