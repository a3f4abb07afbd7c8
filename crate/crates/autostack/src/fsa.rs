//! Deterministic finite automata over arbitrary finite alphabets, with the
//! exact closure operations the constructions need: boolean combinations,
//! concatenation, star, right quotient, determinization, minimization,
//! bounded enumeration, and exact equivalence.
//!
//! Every `Dfa` is complete: a sink state absorbs dead symbols. Minimization
//! merges Nerode-equivalent states and renumbers canonically by breadth-first
//! search from the start state in symbol order, so two automata with equal
//! languages minimize to structurally identical tables.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StateId = u32;
pub type Sym = u16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dfa {
    symbols: Vec<String>,
    /// Flattened transition table: `state * n_symbols + symbol`.
    transitions: Vec<StateId>,
    accepting: Vec<bool>,
    start: StateId,
}

/// Kind of rational/boolean combination.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CombineKind {
    Union,
    Intersect,
    Complement,
    Concat,
    Star,
}

/// Whether a language is empty, finite with a longest word, or infinite.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LanguageBound {
    Empty,
    Finite(usize),
    Infinite,
}

impl Dfa {
    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn step(&self, q: StateId, s: usize) -> StateId {
        self.transitions[q as usize * self.symbols.len() + s]
    }

    pub fn run(&self, from: StateId, seq: &[Sym]) -> StateId {
        seq.iter().fold(from, |q, &s| self.step(q, s as usize))
    }

    fn check_symbols(&self, seq: &[Sym]) -> Result<()> {
        for &s in seq {
            if s as usize >= self.symbols.len() {
                return Err(Error::InvalidAutomaton(format!(
                    "symbol index {s} out of range"
                )));
            }
        }
        Ok(())
    }

    /// True iff the extended transition from the start lands in an accepting
    /// state.
    pub fn accepts(&self, seq: &[Sym]) -> Result<bool> {
        self.check_symbols(seq)?;
        Ok(self.is_accepting(self.run(self.start, seq)))
    }

    fn same_alphabet(&self, other: &Dfa) -> Result<()> {
        if self.symbols != other.symbols {
            return Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.symbols, other.symbols
            )));
        }
        Ok(())
    }

    /// Raw constructor; completes nothing and is only for tables already
    /// total. `transitions[q][s]` must be a valid state id.
    pub fn from_table(
        symbols: Vec<String>,
        transitions: Vec<Vec<StateId>>,
        start: StateId,
        accepting: Vec<bool>,
    ) -> Result<Self> {
        let n = accepting.len();
        if transitions.len() != n {
            return Err(Error::InvalidAutomaton("row count != state count".into()));
        }
        let mut flat = Vec::with_capacity(n * symbols.len());
        for row in &transitions {
            if row.len() != symbols.len() {
                return Err(Error::InvalidAutomaton("row width != symbol count".into()));
            }
            for &t in row {
                if t as usize >= n {
                    return Err(Error::InvalidAutomaton("transition target out of range".into()));
                }
                flat.push(t);
            }
        }
        if start as usize >= n {
            return Err(Error::InvalidAutomaton("start out of range".into()));
        }
        Ok(Dfa {
            symbols,
            transitions: flat,
            accepting,
            start,
        })
    }

    /// The empty language.
    pub fn empty_language(symbols: Vec<String>) -> Dfa {
        Dfa {
            transitions: vec![0; symbols.len()],
            symbols,
            accepting: vec![false],
            start: 0,
        }
    }

    /// All words over the alphabet.
    pub fn all_words(symbols: Vec<String>) -> Dfa {
        Dfa {
            transitions: vec![0; symbols.len()],
            symbols,
            accepting: vec![true],
            start: 0,
        }
    }

    /// The finite language consisting of exactly the given words.
    pub fn finite(symbols: Vec<String>, words: &[Vec<Sym>]) -> Dfa {
        let mut nfa = Nfa::new(symbols);
        let start = nfa.add_state(false);
        nfa.add_start(start);
        for w in words {
            let mut q = start;
            for &s in w {
                let r = nfa.add_state(false);
                nfa.add_edge(q, s, r);
                q = r;
            }
            nfa.set_accepting(q, true);
        }
        nfa.determinize_minimize()
    }

    pub fn literal(symbols: Vec<String>, word: &[Sym]) -> Dfa {
        Dfa::finite(symbols, &[word.to_vec()])
    }

    /// Exact set-theoretic / rational combination.
    pub fn combine(kind: CombineKind, m1: &Dfa, m2: Option<&Dfa>) -> Result<Dfa> {
        match kind {
            CombineKind::Union | CombineKind::Intersect => {
                let m2 = m2.ok_or_else(|| Error::InvalidAutomaton("missing operand".into()))?;
                m1.same_alphabet(m2)?;
                Ok(m1.product(m2, |a, b| match kind {
                    CombineKind::Union => a || b,
                    _ => a && b,
                })
                .minimized())
            }
            CombineKind::Complement => {
                if m2.is_some() {
                    return Err(Error::InvalidAutomaton("complement is unary".into()));
                }
                let mut c = m1.clone();
                for a in c.accepting.iter_mut() {
                    *a = !*a;
                }
                Ok(c.minimized())
            }
            CombineKind::Concat => {
                let m2 = m2.ok_or_else(|| Error::InvalidAutomaton("missing operand".into()))?;
                m1.same_alphabet(m2)?;
                let mut nfa = Nfa::from_dfa(m1);
                let offset = nfa.n_states() as StateId;
                nfa.append_dfa(m2);
                for q in 0..offset {
                    if m1.is_accepting(q) {
                        nfa.set_accepting(q, false);
                        nfa.add_eps(q, offset + m2.start);
                    }
                }
                Ok(nfa.determinize_minimize())
            }
            CombineKind::Star => {
                if m2.is_some() {
                    return Err(Error::InvalidAutomaton("star is unary".into()));
                }
                let mut nfa = Nfa::from_dfa(m1);
                let new_start = nfa.add_state(true);
                nfa.starts.clear();
                nfa.add_start(new_start);
                nfa.add_eps(new_start, m1.start);
                for q in 0..m1.n_states() as StateId {
                    if m1.is_accepting(q) {
                        nfa.add_eps(q, new_start);
                    }
                }
                Ok(nfa.determinize_minimize())
            }
        }
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa> {
        Dfa::combine(CombineKind::Union, self, Some(other))
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa> {
        Dfa::combine(CombineKind::Intersect, self, Some(other))
    }

    pub fn complement(&self) -> Dfa {
        Dfa::combine(CombineKind::Complement, self, None).expect("unary")
    }

    pub fn concat(&self, other: &Dfa) -> Result<Dfa> {
        Dfa::combine(CombineKind::Concat, self, Some(other))
    }

    pub fn star(&self) -> Dfa {
        Dfa::combine(CombineKind::Star, self, None).expect("unary")
    }

    pub fn difference(&self, other: &Dfa) -> Result<Dfa> {
        self.intersect(&other.complement())
    }

    fn product(&self, other: &Dfa, acc: impl Fn(bool, bool) -> bool) -> Dfa {
        let ns = self.symbols.len();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut table: Vec<StateId> = Vec::new();
        let mut accepting = Vec::new();
        let mut queue = VecDeque::new();
        index.insert((self.start, other.start), 0);
        table.resize(ns, 0);
        accepting.push(acc(self.is_accepting(self.start), other.is_accepting(other.start)));
        queue.push_back((self.start, other.start));
        while let Some((a, b)) = queue.pop_front() {
            let qid = index[&(a, b)];
            for s in 0..ns {
                let na = self.step(a, s);
                let nb = other.step(b, s);
                let nid = *index.entry((na, nb)).or_insert_with(|| {
                    let id = accepting.len() as StateId;
                    accepting.push(acc(self.is_accepting(na), other.is_accepting(nb)));
                    table.resize((id as usize + 1) * ns, 0);
                    queue.push_back((na, nb));
                    id
                });
                table[qid as usize * ns + s] = nid;
            }
        }
        Dfa {
            symbols: self.symbols.clone(),
            transitions: table,
            accepting,
            start: 0,
        }
    }

    /// Right quotient `P / S = {w | ∃ s ∈ L(S): ws ∈ L(P)}`: re-marks as
    /// accepting every state of `P` from which some word of `L(S)` reaches an
    /// accepting state.
    pub fn right_quotient(&self, s: &Dfa) -> Result<Dfa> {
        self.same_alphabet(s)?;
        let ns = self.symbols.len();
        let n1 = self.n_states();
        let n2 = s.n_states();
        // reachable1[q * n2 + r] = true iff from (q, r) a pair (acc_P, acc_S)
        // is reachable in the product; computed backward.
        let mut co = vec![false; n1 * n2];
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n1 * n2];
        for q in 0..n1 {
            for r in 0..n2 {
                for sym in 0..ns {
                    let nq = self.step(q as StateId, sym) as usize;
                    let nr = s.step(r as StateId, sym) as usize;
                    preds[nq * n2 + nr].push((q * n2 + r) as u32);
                }
            }
        }
        let mut queue = VecDeque::new();
        for q in 0..n1 {
            for r in 0..n2 {
                if self.accepting[q] && s.accepting[r] {
                    co[q * n2 + r] = true;
                    queue.push_back(q * n2 + r);
                }
            }
        }
        while let Some(i) = queue.pop_front() {
            for &p in &preds[i] {
                if !co[p as usize] {
                    co[p as usize] = true;
                    queue.push_back(p as usize);
                }
            }
        }
        let mut out = self.clone();
        for q in 0..n1 {
            out.accepting[q] = co[q * n2 + s.start as usize];
        }
        Ok(out.minimized())
    }

    /// Aligned suffix language: all words readable from any reachable state
    /// to acceptance. Used to enumerate suffixes of an accepted language.
    pub(crate) fn suffix_language(&self) -> Dfa {
        let mut nfa = Nfa::from_dfa(self);
        nfa.starts = self.reachable_states();
        nfa.determinize_minimize()
    }

    fn reachable_states(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.n_states()];
        let mut queue = VecDeque::new();
        seen[self.start as usize] = true;
        queue.push_back(self.start);
        while let Some(q) = queue.pop_front() {
            for s in 0..self.symbols.len() {
                let r = self.step(q, s);
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    queue.push_back(r);
                }
            }
        }
        (0..self.n_states() as StateId)
            .filter(|&q| seen[q as usize])
            .collect()
    }

    /// Canonical minimal automaton: reachable Nerode classes, renumbered by
    /// BFS from the start in symbol order.
    pub fn minimized(&self) -> Dfa {
        let reach = self.reachable_states();
        let mut remap = vec![u32::MAX; self.n_states()];
        for (i, &q) in reach.iter().enumerate() {
            remap[q as usize] = i as u32;
        }
        let n = reach.len();
        let ns = self.symbols.len();
        let mut table = vec![0u32; n * ns];
        let mut acc = vec![false; n];
        for (i, &q) in reach.iter().enumerate() {
            acc[i] = self.accepting[q as usize];
            for s in 0..ns {
                table[i * ns + s] = remap[self.step(q, s) as usize];
            }
        }
        let start = remap[self.start as usize];

        // Moore partition refinement on the reachable part.
        let mut class: Vec<u32> = acc.iter().map(|&a| a as u32).collect();
        let mut n_classes = 2;
        // single-class case: all accepting or all rejecting
        if acc.iter().all(|&a| a) || acc.iter().all(|&a| !a) {
            class = vec![0; n];
            n_classes = 1;
        }
        loop {
            let mut sig_index: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let mut next_class = vec![0u32; n];
            for q in 0..n {
                let sig: Vec<u32> = (0..ns).map(|s| class[table[q * ns + s] as usize]).collect();
                let key = (class[q], sig);
                let next_id = sig_index.len() as u32;
                let id = *sig_index.entry(key).or_insert(next_id);
                next_class[q] = id;
            }
            let new_count = sig_index.len() as u32;
            if new_count == n_classes {
                class = next_class;
                break;
            }
            n_classes = new_count;
            class = next_class;
        }

        // Build the quotient, then canonical BFS renumbering.
        let nq = n_classes as usize;
        let mut qtable = vec![0u32; nq * ns];
        let mut qacc = vec![false; nq];
        for q in 0..n {
            let c = class[q] as usize;
            qacc[c] = acc[q];
            for s in 0..ns {
                qtable[c * ns + s] = class[table[q * ns + s] as usize];
            }
        }
        let qstart = class[start as usize];

        let mut order = vec![u32::MAX; nq];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        order[qstart as usize] = next;
        next += 1;
        queue.push_back(qstart);
        while let Some(q) = queue.pop_front() {
            for s in 0..ns {
                let r = qtable[q as usize * ns + s];
                if order[r as usize] == u32::MAX {
                    order[r as usize] = next;
                    next += 1;
                    queue.push_back(r);
                }
            }
        }
        // every class is reachable from the start class by construction
        let m = next as usize;
        let mut ftable = vec![0u32; m * ns];
        let mut facc = vec![false; m];
        for q in 0..nq {
            let i = order[q] as usize;
            facc[i] = qacc[q];
            for s in 0..ns {
                ftable[i * ns + s] = order[qtable[q * ns + s] as usize];
            }
        }
        Dfa {
            symbols: self.symbols.clone(),
            transitions: ftable,
            accepting: facc,
            start: 0,
        }
    }

    /// The same transition structure with a different accepting set.
    pub fn with_accepting(&self, accepting: Vec<bool>) -> Result<Dfa> {
        if accepting.len() != self.n_states() {
            return Err(Error::InvalidAutomaton("accepting vector length".into()));
        }
        Ok(Dfa {
            symbols: self.symbols.clone(),
            transitions: self.transitions.clone(),
            accepting,
            start: self.start,
        })
    }

    /// Exact language equality.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool> {
        self.same_alphabet(other)?;
        Ok(self.minimized() == other.minimized())
    }

    /// Number of states of the minimized automaton; a valid pumping constant.
    pub fn pumping_bound(&self) -> usize {
        self.minimized().n_states()
    }

    /// Minimal distance from each state to an accepting state (`u32::MAX` if
    /// none is reachable).
    pub fn distance_to_accepting(&self) -> Vec<u32> {
        let n = self.n_states();
        let ns = self.symbols.len();
        let mut dist = vec![u32::MAX; n];
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for q in 0..n {
            for s in 0..ns {
                preds[self.step(q as StateId, s) as usize].push(q as u32);
            }
        }
        let mut queue = VecDeque::new();
        for q in 0..n {
            if self.accepting[q] {
                dist[q] = 0;
                queue.push_back(q as u32);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q as usize] {
                if dist[p as usize] == u32::MAX {
                    dist[p as usize] = dist[q as usize] + 1;
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// All accepted words of length at most `maxlen`, in shortlex order of
    /// the symbol list.
    pub fn enumerate_up_to(&self, maxlen: usize) -> Vec<Vec<Sym>> {
        let mut out = Vec::new();
        self.enumerate_visit(maxlen, &mut |w| {
            out.push(w.to_vec());
            true
        });
        out
    }

    /// Visits accepted words of length ≤ `maxlen` in shortlex order; stops
    /// early if the visitor returns false.
    pub fn enumerate_visit(&self, maxlen: usize, visit: &mut dyn FnMut(&[Sym]) -> bool) -> bool {
        let dist = self.distance_to_accepting();
        // order words by length, then lexicographically
        for len in 0..=maxlen {
            let mut word: Vec<Sym> = Vec::with_capacity(len);
            if !self.enumerate_rec(self.start, len, &dist, &mut word, visit) {
                return false;
            }
        }
        true
    }

    fn enumerate_rec(
        &self,
        q: StateId,
        remaining: usize,
        dist: &[u32],
        word: &mut Vec<Sym>,
        visit: &mut dyn FnMut(&[Sym]) -> bool,
    ) -> bool {
        if remaining == 0 {
            if self.is_accepting(q) {
                return visit(word);
            }
            return true;
        }
        for s in 0..self.symbols.len() {
            let r = self.step(q, s);
            if dist[r as usize] != u32::MAX && (dist[r as usize] as usize) < remaining {
                word.push(s as Sym);
                let keep = self.enumerate_rec(r, remaining - 1, dist, word, visit);
                word.pop();
                if !keep {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the language is empty, finite (returning the longest word
    /// length), or infinite.
    pub fn language_bound(&self) -> LanguageBound {
        let m = self.minimized();
        let dist = m.distance_to_accepting();
        let live = |q: StateId| dist[q as usize] != u32::MAX;
        if !live(m.start) {
            return LanguageBound::Empty;
        }
        // Longest path in the live subgraph from the start; a cycle means the
        // language is infinite. Every live state reaches acceptance, so the
        // longest live path ends at an accepting state and its length is the
        // longest accepted word.
        let n = m.n_states();
        let ns = m.symbols.len();
        let mut color = vec![0u8; n]; // 0 unseen, 1 active, 2 done
        let mut longest = vec![0usize; n];
        let mut stack: Vec<(StateId, usize)> = vec![(m.start, 0)];
        color[m.start as usize] = 1;
        while let Some(top) = stack.last_mut() {
            let (q, s) = (top.0, top.1);
            if s < ns {
                top.1 += 1;
                let r = m.step(q, s);
                if !live(r) {
                    continue;
                }
                match color[r as usize] {
                    0 => {
                        color[r as usize] = 1;
                        stack.push((r, 0));
                    }
                    1 => return LanguageBound::Infinite,
                    _ => {}
                }
            } else {
                color[q as usize] = 2;
                let mut best = 0usize;
                for sym in 0..ns {
                    let r = m.step(q, sym);
                    if live(r) && color[r as usize] == 2 {
                        best = best.max(1 + longest[r as usize]);
                    }
                }
                longest[q as usize] = best;
                stack.pop();
            }
        }
        LanguageBound::Finite(longest[m.start as usize])
    }

    pub fn is_language_empty(&self) -> bool {
        matches!(self.language_bound(), LanguageBound::Empty)
    }

    pub fn to_json(&self) -> DfaJson {
        let ns = self.symbols.len();
        DfaJson {
            alphabet: self.symbols.clone(),
            states: self.n_states(),
            start: self.start,
            accepting: (0..self.n_states() as StateId)
                .filter(|&q| self.is_accepting(q))
                .collect(),
            transitions: (0..self.n_states())
                .map(|q| self.transitions[q * ns..(q + 1) * ns].to_vec())
                .collect(),
        }
    }

    pub fn from_json(j: &DfaJson) -> Result<Self> {
        let mut accepting = vec![false; j.states];
        for &q in &j.accepting {
            if q as usize >= j.states {
                return Err(Error::InvalidAutomaton("accepting state out of range".into()));
            }
            accepting[q as usize] = true;
        }
        Dfa::from_table(j.alphabet.clone(), j.transitions.clone(), j.start, accepting)
    }

    /// DOT export; accepting states are double circles and the sink (a
    /// non-accepting state with only self-loops) is suppressed.
    pub fn to_dot(&self, name: &str) -> String {
        let ns = self.symbols.len();
        let is_sink = |q: StateId| {
            !self.is_accepting(q) && (0..ns).all(|s| self.step(q, s) == q)
        };
        let mut out = String::new();
        out.push_str(&format!("digraph {name} {{\n  rankdir=LR;\n"));
        for q in 0..self.n_states() as StateId {
            if is_sink(q) {
                continue;
            }
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!("  q{q} [shape={shape}];\n"));
        }
        out.push_str(&format!("  init [shape=point]; init -> q{};\n", self.start));
        for q in 0..self.n_states() as StateId {
            if is_sink(q) {
                continue;
            }
            for s in 0..ns {
                let r = self.step(q, s);
                if is_sink(r) {
                    continue;
                }
                out.push_str(&format!(
                    "  q{q} -> q{r} [label=\"{}\"];\n",
                    self.symbols[s].replace('"', "\\\"")
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
pub struct DfaJson {
    pub alphabet: Vec<String>,
    pub states: usize,
    pub start: StateId,
    pub accepting: Vec<StateId>,
    pub transitions: Vec<Vec<StateId>>,
}

/// Nondeterministic automaton with epsilon moves; the intermediate form for
/// projection, quotient, and concatenation before determinization.
#[derive(Clone, Debug)]
pub struct Nfa {
    symbols: Vec<String>,
    trans: Vec<Vec<Vec<StateId>>>,
    eps: Vec<Vec<StateId>>,
    starts: Vec<StateId>,
    accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(symbols: Vec<String>) -> Self {
        Nfa {
            symbols,
            trans: Vec::new(),
            eps: Vec::new(),
            starts: Vec::new(),
            accepting: Vec::new(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn add_state(&mut self, accepting: bool) -> StateId {
        self.trans.push(vec![Vec::new(); self.symbols.len()]);
        self.eps.push(Vec::new());
        self.accepting.push(accepting);
        (self.accepting.len() - 1) as StateId
    }

    pub fn set_accepting(&mut self, q: StateId, acc: bool) {
        self.accepting[q as usize] = acc;
    }

    pub fn add_start(&mut self, q: StateId) {
        self.starts.push(q);
    }

    pub fn add_edge(&mut self, q: StateId, s: Sym, r: StateId) {
        self.trans[q as usize][s as usize].push(r);
    }

    pub fn add_eps(&mut self, q: StateId, r: StateId) {
        self.eps[q as usize].push(r);
    }

    pub fn from_dfa(d: &Dfa) -> Nfa {
        let mut nfa = Nfa::new(d.symbols.clone());
        for q in 0..d.n_states() as StateId {
            nfa.add_state(d.is_accepting(q));
        }
        for q in 0..d.n_states() as StateId {
            for s in 0..d.symbols.len() {
                nfa.add_edge(q, s as Sym, d.step(q, s));
            }
        }
        nfa.add_start(d.start);
        nfa
    }

    /// Appends the states of a DFA (returning nothing; ids are offset by the
    /// previous state count).
    pub fn append_dfa(&mut self, d: &Dfa) {
        let offset = self.n_states() as StateId;
        for q in 0..d.n_states() as StateId {
            self.add_state(d.is_accepting(q));
        }
        for q in 0..d.n_states() as StateId {
            for s in 0..d.symbols.len() {
                self.add_edge(offset + q, s as Sym, offset + d.step(q, s));
            }
        }
    }

    fn eps_closure(&self, set: &mut Vec<StateId>) {
        let mut seen: Vec<bool> = vec![false; self.n_states()];
        for &q in set.iter() {
            seen[q as usize] = true;
        }
        let mut stack: Vec<StateId> = set.clone();
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q as usize] {
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    set.push(r);
                    stack.push(r);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }

    pub fn determinize(&self) -> Dfa {
        let ns = self.symbols.len();
        let mut start: Vec<StateId> = self.starts.clone();
        start.sort_unstable();
        start.dedup();
        self.eps_closure(&mut start);
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut table: Vec<StateId> = Vec::new();
        let mut accepting: Vec<bool> = Vec::new();
        let mut queue: VecDeque<Vec<StateId>> = VecDeque::new();
        let acc_of = |set: &[StateId], nfa: &Nfa| set.iter().any(|&q| nfa.accepting[q as usize]);
        index.insert(start.clone(), 0);
        accepting.push(acc_of(&start, self));
        table.resize(ns, 0);
        queue.push_back(start);
        while let Some(set) = queue.pop_front() {
            let qid = index[&set];
            for s in 0..ns {
                let mut next: Vec<StateId> = Vec::new();
                for &q in &set {
                    next.extend_from_slice(&self.trans[q as usize][s]);
                }
                next.sort_unstable();
                next.dedup();
                self.eps_closure(&mut next);
                let nid = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = accepting.len() as StateId;
                        index.insert(next.clone(), id);
                        accepting.push(acc_of(&next, self));
                        table.resize((id as usize + 1) * ns, 0);
                        queue.push_back(next);
                        id
                    }
                };
                table[qid as usize * ns + s] = nid;
            }
        }
        Dfa {
            symbols: self.symbols.clone(),
            transitions: table,
            accepting,
            start: 0,
        }
    }

    /// Canonical minimal DFA for the NFA's language.
    pub fn determinize_minimize(&self) -> Dfa {
        self.determinize().minimized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    fn a_star() -> Dfa {
        Dfa::all_words(syms(&["a"]))
    }

    #[test]
    fn accepts_examples() {
        let m = a_star();
        assert!(m.accepts(&[]).unwrap());
        assert!(m.accepts(&[0, 0, 0]).unwrap());
        let ab = Dfa::literal(syms(&["a", "b"]), &[0, 1]);
        assert!(!ab.accepts(&[1, 0]).unwrap());
        assert!(ab.accepts(&[0, 1]).unwrap());
    }

    #[test]
    fn combine_examples() {
        let a = Dfa::literal(syms(&["a", "b"]), &[0]);
        let b = Dfa::literal(syms(&["a", "b"]), &[1]);
        let u = a.union(&b).unwrap();
        assert_eq!(u.enumerate_up_to(3), vec![vec![0], vec![1]]);
        let m = Dfa::finite(syms(&["a", "b"]), &[vec![0, 1], vec![1]]);
        assert!(m.complement().complement().equivalent(&m).unwrap());
    }

    #[test]
    fn intersect_enumeration_oracle() {
        // {a,b}*·{a} ∩ {a}* = nonempty words over {a}
        let sy = syms(&["a", "b"]);
        let all = Dfa::all_words(sy.clone());
        let enda = all.concat(&Dfa::literal(sy.clone(), &[0])).unwrap();
        let astar = Dfa::literal(sy.clone(), &[0]).star();
        let lhs = enda.intersect(&astar).unwrap();
        let expect: Vec<Vec<Sym>> = (1..=6).map(|n| vec![0; n]).collect();
        assert_eq!(lhs.enumerate_up_to(6), expect);
    }

    #[test]
    fn right_quotient_examples() {
        let sy = syms(&["a", "b"]);
        let p = Dfa::finite(sy.clone(), &[vec![0, 1], vec![0, 1, 1]]);
        let s = Dfa::literal(sy.clone(), &[1]);
        let q = p.right_quotient(&s).unwrap();
        assert_eq!(q.enumerate_up_to(4), vec![vec![0], vec![0, 1]]);
        let lambda = Dfa::literal(sy.clone(), &[]);
        assert!(p.right_quotient(&lambda).unwrap().equivalent(&p).unwrap());
    }

    #[test]
    fn right_quotient_brute_force() {
        // exhaustive double-enumeration oracle over random-ish small machines
        let sy = syms(&["a", "b"]);
        let p = Dfa::finite(
            sy.clone(),
            &[vec![0, 0], vec![0, 1, 1], vec![1], vec![1, 0, 0, 1], vec![0, 1, 0, 1, 1]],
        );
        let s = Dfa::finite(sy.clone(), &[vec![1], vec![0, 1], vec![1, 1, 0, 1, 1]]);
        let q = p.right_quotient(&s).unwrap();
        let svocab = s.enumerate_up_to(5);
        let mut expect: Vec<Vec<Sym>> = Vec::new();
        let all = Dfa::all_words(sy.clone());
        for w in all.enumerate_up_to(5) {
            if svocab.iter().any(|t| {
                let mut ws = w.clone();
                ws.extend_from_slice(t);
                p.accepts(&ws).unwrap()
            }) {
                expect.push(w);
            }
        }
        let got: Vec<Vec<Sym>> = q.enumerate_up_to(5);
        assert_eq!(got, expect);
    }

    #[test]
    fn determinize_minimize_examples() {
        // DFA for {a}* with redundant states minimizes to a single state
        let d = Dfa::from_table(
            syms(&["a"]),
            vec![vec![1], vec![2], vec![0]],
            0,
            vec![true, true, true],
        )
        .unwrap();
        assert_eq!(d.minimized().n_states(), 1);
        // NFA with epsilon moves for {a}·{b}*
        let mut nfa = Nfa::new(syms(&["a", "b"]));
        let s0 = nfa.add_state(false);
        let s1 = nfa.add_state(false);
        let s2 = nfa.add_state(true);
        nfa.add_start(s0);
        nfa.add_edge(s0, 0, s1);
        nfa.add_eps(s1, s2);
        nfa.add_edge(s2, 1, s2);
        let d = nfa.determinize_minimize();
        let mut expect = Vec::new();
        for n in 0..6 {
            let mut w = vec![0];
            w.extend(vec![1; n]);
            expect.push(w);
        }
        let mut got = d.enumerate_up_to(6);
        got.sort_by_key(|w| (w.len(), w.clone()));
        expect.sort_by_key(|w: &Vec<Sym>| (w.len(), w.clone()));
        assert_eq!(got, expect);
        // idempotence
        let m = d.minimized();
        assert_eq!(m, m.minimized());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(a_star().enumerate_up_to(2), vec![vec![], vec![0], vec![0, 0]]);
        assert!(Dfa::empty_language(syms(&["a"])).enumerate_up_to(4).is_empty());
        let abstar = Dfa::literal(syms(&["a", "b"]), &[0, 1]).star();
        assert_eq!(
            abstar.enumerate_up_to(5),
            vec![vec![], vec![0, 1], vec![0, 1, 0, 1]]
        );
    }

    #[test]
    fn equivalent_examples() {
        let a = Dfa::literal(syms(&["a", "b"]), &[0]);
        let b = Dfa::literal(syms(&["a", "b"]), &[1]);
        assert!(!a.equivalent(&b).unwrap());
        assert!(a.equivalent(&a.complement().complement()).unwrap());
    }

    #[test]
    fn pumping_bound_examples() {
        assert_eq!(a_star().pumping_bound(), 1);
        let ab = Dfa::literal(syms(&["a", "b"]), &[0, 1]);
        assert_eq!(ab.pumping_bound(), 4); // 3 live states + sink
        let m = ab.minimized();
        assert_eq!(m.pumping_bound(), m.n_states());
    }

    #[test]
    fn language_bound_cases() {
        assert_eq!(
            Dfa::empty_language(syms(&["a"])).language_bound(),
            LanguageBound::Empty
        );
        assert_eq!(a_star().language_bound(), LanguageBound::Infinite);
        let f = Dfa::finite(syms(&["a", "b"]), &[vec![0], vec![0, 1, 1]]);
        assert_eq!(f.language_bound(), LanguageBound::Finite(3));
    }

    #[test]
    fn json_round_trip() {
        let m = Dfa::finite(syms(&["a", "b"]), &[vec![0, 1], vec![1, 1]]);
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back = Dfa::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert!(m.equivalent(&back).unwrap());
    }

    #[test]
    fn suffix_language_of_literal() {
        let m = Dfa::literal(syms(&["a", "b"]), &[0, 1, 1]);
        let suf = m.suffix_language();
        let got = suf.enumerate_up_to(3);
        assert_eq!(got, vec![vec![], vec![1], vec![1, 1], vec![0, 1, 1]]);
    }
}
