//! Prefix-rewriting systems over synchronously regular rule languages, the
//! restriction to minimally reducible left sides, the transformation of a
//! weight non-increasing system into a bounded one, flow-function
//! extraction with the geodesic decrease check, and almost-convexity paths.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::fsa::{Dfa, Nfa, StateId, Sym};
use crate::group::{Ball, Element, GroupSpec};
use crate::synclang::{diagonal_of, skew_language, SkewBound, SyncLanguage, SyncLanguageJson};
use crate::words::{Alphabet, AlphabetJson, Letter, OrderKind, Word};

const DEFAULT_RHS_WINDOW: usize = 64;
const RHS_CANDIDATE_CAP: usize = 1 << 17;
const SUFFIX_ENUM_CAP: usize = 4_000_000;

/// A prefix-rewriting system: a synchronously regular language of rule pairs
/// over a weighted alphabet.
#[derive(Clone, Debug)]
pub struct Cprs {
    alphabet: Alphabet,
    rules: SyncLanguage,
    order: OrderKind,
    lhs: Dfa,
    rhs_window: usize,
    /// Boundedness constant of the construction that produced this system,
    /// when it came out of the bounded-system transformation.
    pub bounded_k: Option<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct CprsJson {
    pub alphabet: AlphabetJson,
    pub rules: SyncLanguageJson,
    pub order: OrderKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_k: Option<usize>,
}

/// One prefix rewrite: `left · w → right · w`.
#[derive(Clone, Debug, Serialize)]
pub struct RewriteStep {
    pub prefix_len: usize,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub result: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RewriteTrace {
    pub start: Vec<String>,
    pub steps: Vec<RewriteStep>,
}

impl Cprs {
    pub fn new(alphabet: Alphabet, rules: SyncLanguage, order: OrderKind) -> Result<Self> {
        if rules.alphabet().arity() != 2
            || rules.alphabet().base(0) != &alphabet
            || rules.alphabet().base(1) != &alphabet
        {
            return Err(Error::AlphabetMismatch(
                "rule language must be pairs over the system alphabet".into(),
            ));
        }
        let lhs = rules.project(0)?;
        Ok(Cprs {
            alphabet,
            rules,
            order,
            lhs,
            rhs_window: DEFAULT_RHS_WINDOW,
            bounded_k: None,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &SyncLanguage {
        &self.rules
    }

    pub fn order(&self) -> OrderKind {
        self.order
    }

    /// Language of left-hand sides.
    pub fn lhs_language(&self) -> &Dfa {
        &self.lhs
    }

    pub fn set_rhs_window(&mut self, window: usize) {
        self.rhs_window = window;
    }

    /// Words with no prefix in the left-hand-side language.
    pub fn irreducible_language(&self) -> Result<Dfa> {
        let all = Dfa::all_words(self.alphabet.symbol_names());
        Ok(self.lhs.concat(&all)?.complement())
    }

    pub fn is_irreducible(&self, w: &Word) -> bool {
        let mut q = self.lhs.start();
        if self.lhs.is_accepting(q) {
            return false;
        }
        for &l in w.letters() {
            q = self.lhs.step(q, l.index());
            if self.lhs.is_accepting(q) {
                return false;
            }
        }
        true
    }

    /// Shortest reducible prefix together with the srev-least right side
    /// enumerable within the window; `None` when `w` is irreducible.
    pub fn reducible_prefix(&self, w: &Word) -> Result<Option<(usize, Word)>> {
        let mut q = self.lhs.start();
        let mut at = None;
        if self.lhs.is_accepting(q) {
            at = Some(0);
        }
        if at.is_none() {
            for (i, &l) in w.letters().iter().enumerate() {
                q = self.lhs.step(q, l.index());
                if self.lhs.is_accepting(q) {
                    at = Some(i + 1);
                    break;
                }
            }
        }
        match at {
            None => Ok(None),
            Some(n) => {
                let p = w.prefix(n);
                let rhs = self.least_rhs(&p)?;
                Ok(Some((n, rhs)))
            }
        }
    }

    /// The srev-least right side paired with exactly `p`; minimal length
    /// first, then srev among that length.
    pub fn least_rhs(&self, p: &Word) -> Result<Word> {
        let m = self.rules.machine();
        let alpha = self.rules.alphabet();
        let letters: Vec<Letter> = self.alphabet.letters().collect();

        // finish(j, q): accept after v ends at position j (forced pads beyond)
        let finish = |j: usize, q: StateId| -> Result<bool> {
            let mut st = q;
            for i in j..p.len() {
                let sym = alpha.encode(&[Some(p.letters()[i]), None])?;
                st = m.step(st, sym as usize);
            }
            Ok(m.is_accepting(st))
        };

        // breadth-first over the number of v-letters consumed
        let mut layer: Vec<StateId> = vec![m.start()];
        let mut layers: Vec<Vec<StateId>> = vec![layer.clone()];
        let mut minlen = None;
        for r in 0..=self.rhs_window {
            for &q in &layer {
                if finish(r, q)? {
                    minlen = Some(r);
                    break;
                }
            }
            if minlen.is_some() {
                break;
            }
            if r == self.rhs_window {
                break;
            }
            let mut next: Vec<StateId> = Vec::new();
            let mut seen: HashSet<StateId> = HashSet::new();
            for &q in &layer {
                for &b in &letters {
                    let c1 = if r < p.len() {
                        Some(p.letters()[r])
                    } else {
                        None
                    };
                    let sym = alpha.encode(&[c1, Some(b)])?;
                    let nq = m.step(q, sym as usize);
                    if seen.insert(nq) {
                        next.push(nq);
                    }
                }
            }
            layer = next;
            layers.push(layer.clone());
        }
        let minlen = minlen.ok_or(Error::RhsWindow(self.rhs_window))?;

        // good[j] = states from which acceptance is reachable with exactly
        // minlen − j more v-letters
        let mut good: Vec<HashSet<StateId>> = vec![HashSet::new(); minlen + 1];
        for &q in &layers[minlen] {
            if finish(minlen, q)? {
                good[minlen].insert(q);
            }
        }
        for j in (0..minlen).rev() {
            for &q in &layers[j] {
                for &b in &letters {
                    let c1 = if j < p.len() {
                        Some(p.letters()[j])
                    } else {
                        None
                    };
                    let sym = alpha.encode(&[c1, Some(b)])?;
                    if good[j + 1].contains(&m.step(q, sym as usize)) {
                        good[j].insert(q);
                        break;
                    }
                }
            }
        }

        // collect all right sides of the minimal length, then take srev-least
        let mut out: Vec<Word> = Vec::new();
        let mut stack: Vec<(usize, StateId, Vec<Letter>)> = vec![(0, m.start(), Vec::new())];
        while let Some((j, q, v)) = stack.pop() {
            if j == minlen {
                if finish(j, q)? {
                    out.push(Word::new(v));
                    if out.len() > RHS_CANDIDATE_CAP {
                        return Err(Error::EnumerationGuard(out.len()));
                    }
                }
                continue;
            }
            for &b in &letters {
                let c1 = if j < p.len() {
                    Some(p.letters()[j])
                } else {
                    None
                };
                let sym = alpha.encode(&[c1, Some(b)])?;
                let nq = m.step(q, sym as usize);
                if good[j + 1].contains(&nq) {
                    let mut nv = v.clone();
                    nv.push(b);
                    stack.push((j + 1, nq, nv));
                }
            }
        }
        out.into_iter()
            .min_by(|a, b| self.alphabet.compare(a, b, OrderKind::Srev))
            .ok_or(Error::RhsWindow(self.rhs_window))
    }

    pub fn rewrite_once(&self, w: &Word) -> Result<Option<Word>> {
        Ok(self.reducible_prefix(w)?.map(|(n, rhs)| {
            rhs.concat(&w.suffix_from(n))
        }))
    }

    /// Leftmost-shortest-prefix strategy with the srev-least right side,
    /// applied until irreducible.
    pub fn normal_form(&self, w: &Word, step_limit: usize) -> Result<(Word, RewriteTrace)> {
        let mut cur = w.clone();
        let mut trace = RewriteTrace {
            start: self.alphabet.word_to_names(w),
            steps: Vec::new(),
        };
        for _ in 0..step_limit {
            match self.reducible_prefix(&cur)? {
                None => return Ok((cur, trace)),
                Some((n, rhs)) => {
                    let left = cur.prefix(n);
                    let next = rhs.concat(&cur.suffix_from(n));
                    trace.steps.push(RewriteStep {
                        prefix_len: n,
                        left: self.alphabet.word_to_names(&left),
                        right: self.alphabet.word_to_names(&rhs),
                        result: self.alphabet.word_to_names(&next),
                    });
                    cur = next;
                }
            }
        }
        if self.reducible_prefix(&cur)?.is_none() {
            return Ok((cur, trace));
        }
        Err(Error::StepLimit(step_limit))
    }

    /// Restriction to rules whose left side is a normal form followed by one
    /// letter. Normal forms are unchanged.
    pub fn restrict_min_reducible(&self) -> Result<Cprs> {
        let irr = self.irreducible_language()?;
        let letters: Vec<Vec<Sym>> = self
            .alphabet
            .letters()
            .map(|l| vec![l.0])
            .collect();
        let one = Dfa::finite(self.alphabet.symbol_names(), &letters);
        let na = irr.concat(&one)?;
        let restricted = self.rules.coordinate_restrict(0, &na)?;
        let mut out = Cprs::new(self.alphabet.clone(), restricted, self.order)?;
        out.rhs_window = self.rhs_window;
        Ok(out)
    }
}

/// Which verification passes to run.
#[derive(Clone, Copy, Debug)]
pub struct Checks {
    pub convergent: bool,
    pub weight_nonincreasing: bool,
    pub property_l: bool,
    pub normal_forms_match: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            convergent: true,
            weight_nonincreasing: true,
            property_l: true,
            normal_forms_match: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub bound: usize,
    pub pass: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub max_len: usize,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const VIOLATION_LIST_CAP: usize = 20;

fn push_violation(list: &mut Vec<String>, v: String) {
    if list.len() < VIOLATION_LIST_CAP {
        list.push(v);
    }
}

impl Cprs {
    /// Verifies convergence, weight monotonicity, the last-letter property,
    /// and agreement of irreducibles with ball normal forms, on all words of
    /// length at most `max_len`.
    pub fn verify(
        &self,
        spec: &GroupSpec,
        ball: &Ball,
        max_len: usize,
        checks: Checks,
    ) -> Result<VerifyReport> {
        let mut out = Vec::new();
        let words: Vec<Word> = self.alphabet.words_up_to(max_len).collect();
        let budget = ball.len() * max_len.max(1);

        if checks.convergent {
            let mut violations = Vec::new();
            let results = exec::map_collect(&words, |w| {
                self.normal_form(w, budget).map(|(nf, _)| nf)
            });
            let mut by_element: BTreeMap<Element, BTreeSet<Word>> = BTreeMap::new();
            for (w, r) in words.iter().zip(&results) {
                match r {
                    Ok(nf) => {
                        by_element
                            .entry(spec.evaluate(w)?)
                            .or_default()
                            .insert(nf.clone());
                    }
                    Err(e) => push_violation(
                        &mut violations,
                        format!("{} fails to terminate: {e}", self.alphabet.word_name(w)),
                    ),
                }
            }
            for (g, nfs) in &by_element {
                if nfs.len() > 1 {
                    push_violation(
                        &mut violations,
                        format!(
                            "element {:?} has {} distinct irreducibles",
                            g,
                            nfs.len()
                        ),
                    );
                }
            }
            // irreducible words must represent pairwise distinct elements
            let mut seen: BTreeMap<Element, Word> = BTreeMap::new();
            for w in &words {
                if self.is_irreducible(w) {
                    let g = spec.evaluate(w)?;
                    if let Some(other) = seen.get(&g) {
                        push_violation(
                            &mut violations,
                            format!(
                                "irreducibles {} and {} represent the same element",
                                self.alphabet.word_name(other),
                                self.alphabet.word_name(w)
                            ),
                        );
                    } else {
                        seen.insert(g, w.clone());
                    }
                }
            }
            out.push(CheckReport {
                check: "convergent".into(),
                bound: max_len,
                pass: violations.is_empty(),
                violations,
            });
        }

        if checks.weight_nonincreasing {
            let mut violations = Vec::new();
            for (u, v) in self.rules.enumerate_pairs(max_len)? {
                if self.alphabet.word_weight(&v) > self.alphabet.word_weight(&u) {
                    push_violation(
                        &mut violations,
                        format!(
                            "wt({}) < wt({})",
                            self.alphabet.word_name(&u),
                            self.alphabet.word_name(&v)
                        ),
                    );
                }
            }
            out.push(CheckReport {
                check: "weight-nonincreasing".into(),
                bound: max_len,
                pass: violations.is_empty(),
                violations,
            });
        }

        if checks.property_l {
            let mut violations = Vec::new();
            for (u, v) in self.rules.enumerate_pairs(max_len)? {
                if u.is_empty() || !self.is_irreducible(&u.prefix(u.len() - 1)) {
                    continue;
                }
                let (nfv, _) = self.normal_form(&v, budget)?;
                if v.last() != nfv.last() {
                    push_violation(
                        &mut violations,
                        format!(
                            "rule ({}, {}): last(v) != last(nf(v)) = {:?}",
                            self.alphabet.word_name(&u),
                            self.alphabet.word_name(&v),
                            nfv.last().map(|l| self.alphabet.name(l).to_string())
                        ),
                    );
                }
            }
            out.push(CheckReport {
                check: "property-L".into(),
                bound: max_len,
                pass: violations.is_empty(),
                violations,
            });
        }

        if checks.normal_forms_match {
            let mut violations = Vec::new();
            for w in &words {
                let g = spec.evaluate(w)?;
                let is_ball_nf = ball.nf_of(&g)? == w;
                if self.is_irreducible(w) != is_ball_nf {
                    push_violation(
                        &mut violations,
                        format!(
                            "{}: irreducible={} but ball-nf={}",
                            self.alphabet.word_name(w),
                            self.is_irreducible(w),
                            is_ball_nf
                        ),
                    );
                }
            }
            out.push(CheckReport {
                check: "normal-forms-match".into(),
                bound: max_len,
                pass: violations.is_empty(),
                violations,
            });
        }

        Ok(VerifyReport {
            max_len,
            checks: out,
        })
    }

    /// Least `c` such that every rule pair enumerated to padded length
    /// `max_len` satisfies |l′| + |r′| ≤ c after stripping the longest
    /// common prefix.
    pub fn boundedness_constant(&self, max_len: usize) -> Result<usize> {
        Ok(self
            .boundedness_profile(&[max_len])?
            .pop()
            .unwrap_or_default())
    }

    /// The constant at several cutoffs, enumerated once.
    pub fn boundedness_profile(&self, max_lens: &[usize]) -> Result<Vec<usize>> {
        let biggest = max_lens.iter().copied().max().unwrap_or(0);
        let pairs = self.rules.enumerate_pairs(biggest)?;
        let mut out = Vec::with_capacity(max_lens.len());
        for &len in max_lens {
            let mut c = 0usize;
            for (u, v) in &pairs {
                if u.len().max(v.len()) > len {
                    continue;
                }
                let p = u.common_prefix_len(v);
                c = c.max(u.len() + v.len() - 2 * p);
            }
            out.push(c);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremAReport {
    pub k: usize,
    pub weight_threshold: String,
    pub s1_rules: usize,
    pub s2_main_candidates: usize,
    pub s2_alt_candidates: usize,
    pub s2_components: usize,
    pub machine_states: usize,
}

fn rational_ceil(r: Rational64) -> i64 {
    r.ceil().to_integer()
}

/// Runs the machine from every state over a fixed symbol sequence.
fn run_vector(m: &Dfa, seq: &[Sym]) -> Vec<StateId> {
    let mut vec: Vec<StateId> = (0..m.n_states() as StateId).collect();
    for &s in seq {
        for q in vec.iter_mut() {
            *q = m.step(*q, s as usize);
        }
    }
    vec
}

impl Cprs {
    /// Transforms a weight non-increasing system with minimally reducible
    /// left sides into a bounded system with the same irreducible words.
    ///
    /// `k_override` replaces the default machine-state-count constant; a
    /// smaller constant is accepted only while every middle word stays within
    /// `2k − 1` letters, which is checked on every suffix pair.
    pub fn theorem_a_construct(
        &self,
        spec: &GroupSpec,
        ball: &Ball,
        k_override: Option<usize>,
    ) -> Result<(Cprs, TheoremAReport)> {
        let alpha = self.rules.alphabet().clone();
        let machine = self.rules.machine();
        let k = k_override.unwrap_or_else(|| machine.pumping_bound());
        let wt_max = self.alphabet.max_letter_weight();
        let wt_min = self.alphabet.min_letter_weight();
        let n_wt = Rational64::from_integer(2 * k as i64) * wt_max;
        let needed = rational_ceil((n_wt + wt_max) / wt_min).max(0) as u32;
        if ball.radius < needed {
            return Err(Error::BallTooSmall {
                needed,
                have: ball.radius,
            });
        }

        // modest weight-monotonicity sanity sweep on the input
        for (u, v) in self.rules.enumerate_pairs(8.min(needed as usize))? {
            if self.alphabet.word_weight(&v) > self.alphabet.word_weight(&u) {
                return Err(Error::WeightIncreasing(
                    self.alphabet.word_name(&u),
                    self.alphabet.word_name(&v),
                ));
            }
        }

        let middle_bound = 2 * k - 1;
        let nf_of = |w: &Word| -> Result<Word> {
            let e = spec.evaluate(w)?;
            Ok(ball.nf_of(&e)?.clone())
        };
        let middle_word = |u2l: &Word, v2: &Word| -> Result<Word> {
            let e = spec.mul(&spec.evaluate(u2l)?, &spec.inv(&spec.evaluate(v2)?));
            let m = ball
                .nf_of(&e)
                .map_err(|_| Error::MiddleBound {
                    word: format!(
                        "nf({}·{}⁻¹)",
                        self.alphabet.word_name(u2l),
                        self.alphabet.word_name(v2)
                    ),
                    bound: middle_bound,
                })?
                .clone();
            if m.len() > middle_bound {
                return Err(Error::MiddleBound {
                    word: self.alphabet.word_name(&m),
                    bound: middle_bound,
                });
            }
            Ok(m)
        };

        // S1: finite enumeration of light minimally reducible words
        let all = Dfa::all_words(self.alphabet.symbol_names());
        let reducible = self.lhs.concat(&all)?;
        let irr = reducible.complement();
        let one = Dfa::finite(
            self.alphabet.symbol_names(),
            &self
                .alphabet
                .letters()
                .map(|l| vec![l.0])
                .collect::<Vec<_>>(),
        );
        let min_red = irr.concat(&one)?.intersect(&reducible)?;
        let s1_len_cap = (rational_ceil(n_wt / wt_min) - 1).max(0) as usize;
        let mut s1_pairs: Vec<(Word, Word)> = Vec::new();
        for seq in min_red.enumerate_up_to(s1_len_cap) {
            let u = Word::new(seq.into_iter().map(Letter).collect());
            if self.alphabet.word_weight(&u) < n_wt {
                let v = nf_of(&u)?;
                s1_pairs.push((u, v));
            }
        }
        let s1_rules = s1_pairs.len();

        // weight window for the heavy suffix
        let u2l_max_len = (rational_ceil((n_wt + wt_max) / wt_min) - 1).max(0) as usize;
        let in_window = |u2l: &Word| -> bool {
            if u2l.is_empty() {
                return false;
            }
            let w_all = self.alphabet.word_weight(u2l);
            let w_body = self
                .alphabet
                .word_weight(&u2l.prefix(u2l.len() - 1));
            w_body < n_wt && w_all >= n_wt
        };

        // main branch: aligned suffix pairs of the rule language
        let suf = machine.suffix_language();
        let enum_len = u2l_max_len + k;
        let mut groups: BTreeMap<Vec<StateId>, Vec<(Word, Word)>> = BTreeMap::new();
        let mut s2_main = 0usize;
        let mut visited = 0usize;
        let mut stop_err: Option<Error> = None;
        suf.enumerate_visit(enum_len, &mut |seq: &[Sym]| {
            visited += 1;
            if visited > SUFFIX_ENUM_CAP {
                stop_err = Some(Error::EnumerationGuard(visited));
                return false;
            }
            let words = match alpha.unpad(seq) {
                Ok(w) => w,
                Err(e) => {
                    stop_err = Some(e);
                    return false;
                }
            };
            let (u2l, v2) = (&words[0], &words[1]);
            if !in_window(u2l) {
                return true;
            }
            let qset: Vec<StateId> = {
                let vec = run_vector(machine, seq);
                (0..machine.n_states() as StateId)
                    .filter(|&q| machine.is_accepting(vec[q as usize]))
                    .collect()
            };
            if qset.is_empty() {
                return true;
            }
            s2_main += 1;
            groups
                .entry(qset)
                .or_default()
                .push((u2l.clone(), v2.clone()));
            true
        });
        if let Some(e) = stop_err {
            return Err(e);
        }

        // alternate branch: right side shorter than the aligned prefix,
        // peeled to its last letter
        let lhs_suf = self.lhs.suffix_language();
        let mut s2_alt = 0usize;
        let mut alt_components: Vec<(Dfa, (Word, Word))> = Vec::new();
        let skew1 = skew_language(&alpha, SkewBound::AtLeast(1))?;
        for seq in lhs_suf.enumerate_up_to(u2l_max_len) {
            let u2l = Word::new(seq.into_iter().map(Letter).collect());
            if !in_window(&u2l) {
                continue;
            }
            // states from which (u2l, λ) reaches acceptance
            let padded = alpha.pad(&[&u2l, &Word::empty()])?;
            let vec = run_vector(machine, &padded);
            let q2: Vec<bool> = (0..machine.n_states())
                .map(|q| machine.is_accepting(vec[q]))
                .collect();
            if !q2.iter().any(|&b| b) {
                continue;
            }
            let quot = machine.with_accepting(q2.clone())?;
            let t0 = SyncLanguage::new(alpha.clone(), quot)?.intersect(&skew1)?;
            for b in self.alphabet.letters() {
                let ends_b = all.concat(&Dfa::literal(
                    self.alphabet.symbol_names(),
                    &[b.0],
                ))?;
                let tb = t0.coordinate_restrict(1, &ends_b)?;
                if tb.is_empty() {
                    continue;
                }
                let p_alt = tb.project(0)?;
                let bw = Word::new(vec![b]);
                let m = middle_word(&u2l, &bw)?;
                s2_alt += 1;
                alt_components.push((p_alt, (u2l.clone(), m.concat(&bw))));
            }
        }

        // assemble components: diagonal of the admissible prefixes followed
        // by the finite tail language; the left factor is unpadded, so plain
        // concatenation of symbol sequences is exact here
        let mut component_machines: Vec<Dfa> = Vec::new();
        if !s1_pairs.is_empty() {
            component_machines
                .push(SyncLanguage::from_pairs(alpha.clone(), &s1_pairs)?.machine().clone());
        }
        let build_component = |p: &Dfa, tails: &[(Word, Word)]| -> Result<Dfa> {
            let diag = diagonal_of(&alpha, p)?;
            let tail_seqs: Vec<Vec<Sym>> = tails
                .iter()
                .map(|(u, v)| alpha.pad(&[u, v]))
                .collect::<Result<Vec<_>>>()?;
            let trie = Dfa::finite(alpha.symbol_names(), &tail_seqs);
            diag.machine().concat(&trie)
        };
        for (qset, cands) in &groups {
            // admissible prefixes: equal-length pairs reaching the class
            let mut nfa = Nfa::new(self.alphabet.symbol_names());
            for q in 0..machine.n_states() as StateId {
                nfa.add_state(qset.contains(&q));
            }
            nfa.add_start(machine.start());
            for q in 0..machine.n_states() as StateId {
                for s in 0..machine.n_symbols() {
                    let parts = alpha.decode(s as Sym);
                    if let (Some(x), Some(_)) = (parts[0], parts[1]) {
                        nfa.add_edge(q, x.0, machine.step(q, s));
                    }
                }
            }
            let p = nfa.determinize_minimize();
            if p.is_language_empty() {
                // no aligned prefix realizes these suffix pairs
                continue;
            }
            // the bounds apply to realized decompositions only
            let mut tails: Vec<(Word, Word)> = Vec::with_capacity(cands.len());
            for (u2l, v2) in cands {
                if v2.len() > u2l.len() + k {
                    return Err(Error::SuffixBound {
                        v2: self.alphabet.word_name(v2),
                        bound: u2l.len() + k,
                    });
                }
                let m = middle_word(u2l, v2)?;
                tails.push((u2l.clone(), m.concat(v2)));
            }
            component_machines.push(build_component(&p, &tails)?);
        }
        for (p, tail) in &alt_components {
            if p.is_language_empty() {
                continue;
            }
            component_machines.push(build_component(p, std::slice::from_ref(tail))?);
        }
        let s2_components = component_machines.len();

        // balanced union fold
        fn fold_union(ms: &[Dfa]) -> Result<Dfa> {
            match ms.len() {
                0 => unreachable!("at least S1 present"),
                1 => Ok(ms[0].clone()),
                n => {
                    let (a, b) = ms.split_at(n / 2);
                    fold_union(a)?.union(&fold_union(b)?)
                }
            }
        }
        if component_machines.is_empty() {
            component_machines.push(Dfa::empty_language(alpha.symbol_names()));
        }
        let s_machine = fold_union(&component_machines)?;
        let s_lang = SyncLanguage::new(alpha, s_machine)?.minimized();
        let machine_states = s_lang.machine().n_states();
        let mut s = Cprs::new(self.alphabet.clone(), s_lang, self.order)?;
        s.rhs_window = self.rhs_window.max(u2l_max_len + middle_bound + k + 2);
        s.bounded_k = Some(k);
        Ok((
            s,
            TheoremAReport {
                k,
                weight_threshold: n_wt.to_string(),
                s1_rules,
                s2_main_candidates: s2_main,
                s2_alt_candidates: s2_alt,
                s2_components,
                machine_states,
            },
        ))
    }
}

/// Finite mapping from directed Cayley-ball edges to replacement path labels.
#[derive(Clone, Debug)]
pub struct FlowTable {
    pub radius: u32,
    entries: BTreeMap<(Element, Letter), Word>,
    pub bound: usize,
}

#[derive(Serialize, Deserialize)]
pub struct FlowEntryJson {
    pub element: crate::group::ElementJson,
    pub letter: String,
    pub label: Vec<String>,
    pub alpha_endpoints: [u32; 2],
}

impl FlowTable {
    pub fn entry(&self, y: &Element, a: Letter) -> Option<&Word> {
        self.entries.get(&(y.clone(), a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Element, Letter), &Word)> {
        self.entries.iter()
    }

    pub fn to_json(&self, spec: &GroupSpec, ball: &Ball) -> Result<Vec<FlowEntryJson>> {
        self.entries
            .iter()
            .map(|((y, a), label)| {
                let tau = spec.mul(y, spec.generator(*a));
                Ok(FlowEntryJson {
                    element: y.to_json(),
                    letter: spec.alphabet.name(*a).to_string(),
                    label: spec.alphabet.word_to_names(label),
                    alpha_endpoints: [ball.geodesic_length(y)?, ball.geodesic_length(&tau)?],
                })
            })
            .collect()
    }

    /// Rebuilds a table from exported entries (labels only; consistency is
    /// re-checked against the ball on verification).
    pub fn from_json(spec: &GroupSpec, radius: u32, entries: &[FlowEntryJson]) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut bound = 0usize;
        for e in entries {
            let y = Element {
                vec: e.element.vec.clone(),
                fin: e.element.fin,
            };
            let a = spec.alphabet.letter(&e.letter)?;
            let label = spec.alphabet.word_from_names(&e.label)?;
            bound = bound.max(label.len());
            map.insert((y, a), label);
        }
        Ok(FlowTable {
            radius,
            entries: map,
            bound,
        })
    }
}

impl Cprs {
    /// Extracts the flow function of this system on all ball edges whose
    /// endpoints lie within the radius: tree and inverse-tree edges map to
    /// themselves, and every other edge maps to the path obtained from the
    /// srev-least rule applying to nf(ι)·label, with the common prefix of
    /// the two sides stripped and the remainder freely reduced.
    pub fn flow_function(&self, spec: &GroupSpec, ball: &Ball) -> Result<FlowTable> {
        let mut entries = BTreeMap::new();
        let mut bound = 0usize;
        for y in ball.elements() {
            let depth = ball.geodesic_length(y)?;
            if depth + 1 > ball.radius {
                continue;
            }
            let nf_y = ball.nf_of(y)?.clone();
            for a in self.alphabet.letters() {
                let tau = spec.mul(y, spec.generator(a));
                let w = {
                    let mut w = nf_y.clone();
                    w.push(a);
                    w
                };
                let tree_edge = ball.nf_of(&tau)? == &w;
                let inverse_edge = nf_y.last() == Some(self.alphabet.inverse(a));
                let label = if tree_edge || inverse_edge {
                    Word::new(vec![a])
                } else {
                    let rhs = self.least_rhs(&w).map_err(|e| match e {
                        Error::RhsWindow(_) => Error::NoRule(self.alphabet.word_name(&w)),
                        other => other,
                    })?;
                    let cp = nf_y.common_prefix_len(&rhs);
                    let s_part = nf_y.suffix_from(cp);
                    let t_part = rhs.suffix_from(cp);
                    self.alphabet
                        .free_reduce(&self.alphabet.invert_word(&s_part)?.concat(&t_part))?
                };
                // same endpoints, by construction
                let end = spec.mul(y, &spec.evaluate(&label)?);
                if end != tau {
                    return Err(Error::NoRule(format!(
                        "flow label for ({}, {}) misses its endpoint",
                        self.alphabet.word_name(&nf_y),
                        self.alphabet.name(a)
                    )));
                }
                bound = bound.max(label.len());
                entries.insert((y.clone(), a), label);
            }
        }
        Ok(FlowTable {
            radius: ball.radius,
            entries,
            bound,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeoReport {
    pub edges: usize,
    pub fixed: usize,
    pub checked: usize,
    pub skipped: usize,
    pub non_geodesic_nfs: usize,
    pub violations: Vec<String>,
}

impl GeoReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.non_geodesic_nfs == 0
    }
}

/// Checks the geodesic decrease property: along every replacement path of a
/// non-fixed edge, each edge is either fixed or has strictly smaller
/// average endpoint depth. Also re-checks the flow axioms (same endpoints,
/// boundedness, fixed tree edges) and that normal forms are geodesic.
pub fn verify_geodesic_autostackable(
    ft: &FlowTable,
    spec: &GroupSpec,
    ball: &Ball,
) -> Result<GeoReport> {
    let mut report = GeoReport {
        edges: 0,
        fixed: 0,
        checked: 0,
        skipped: 0,
        non_geodesic_nfs: 0,
        violations: Vec::new(),
    };
    for g in ball.elements() {
        let e = ball.entry(g).expect("listed");
        if e.nf.len() as u32 != e.length {
            report.non_geodesic_nfs += 1;
        }
    }
    let alpha2 = |a: u32, b: u32| -> Rational64 {
        Rational64::new(a as i64 + b as i64, 2)
    };
    let own_label = |y: &Element, a: Letter| -> Option<bool> {
        ft.entry(y, a).map(|l| l.letters() == [a])
    };
    for ((y, a), label) in ft.iter() {
        report.edges += 1;
        let tau = spec.mul(y, spec.generator(*a));
        // same endpoints axiom
        let end = spec.mul(y, &spec.evaluate(label)?);
        if end != tau {
            report
                .violations
                .push(format!("endpoint mismatch at ({y:?}, {})", spec.alphabet.name(*a)));
            continue;
        }
        if label.len() > ft.bound {
            report
                .violations
                .push(format!("label exceeds recorded bound at ({y:?})"));
        }
        if label.letters() == [*a] {
            report.fixed += 1;
            continue;
        }
        // fixed tree edges axiom: tree and inverse edges must be fixed
        let nf_y = ball.nf_of(y)?;
        let mut w = nf_y.clone();
        w.push(*a);
        if ball.nf_of(&tau).map(|nf| nf == &w).unwrap_or(false)
            || nf_y.last() == Some(spec.alphabet.inverse(*a))
        {
            report.violations.push(format!(
                "tree edge ({}, {}) not fixed",
                spec.alphabet.word_name(nf_y),
                spec.alphabet.name(*a)
            ));
            continue;
        }
        let alpha_e = alpha2(ball.geodesic_length(y)?, ball.geodesic_length(&tau)?);
        let mut v = y.clone();
        let mut ok = true;
        for &l in label.letters() {
            let nv = spec.mul(&v, spec.generator(l));
            match (ball.entry(&v), ball.entry(&nv)) {
                (Some(ev), Some(env)) => {
                    let fixed_here = own_label(&v, l);
                    let alpha_ep = alpha2(ev.length, env.length);
                    match fixed_here {
                        Some(true) => {}
                        _ => {
                            if alpha_ep >= alpha_e {
                                report.violations.push(format!(
                                    "α does not decrease along ({}, {}) at step {}",
                                    spec.alphabet.word_name(ball.nf_of(y)?),
                                    spec.alphabet.name(*a),
                                    spec.alphabet.name(l)
                                ));
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                _ => {
                    report.skipped += 1;
                    ok = false;
                    break;
                }
            }
            v = nv;
        }
        if ok {
            report.checked += 1;
        }
    }
    Ok(report)
}

impl Cprs {
    fn chain_to(
        &self,
        spec: &GroupSpec,
        ball: &Ball,
        target: &Element,
        first: Letter,
        budget_letters: usize,
    ) -> Result<Word> {
        // iterated rewriting toward the normal form of `target`; each
        // iteration replaces the final letter a_i by a_{i+1}
        let target_nf = ball.nf_of(target)?.clone();
        let mut w = {
            let base = spec.mul(target, &spec.inv(spec.generator(first)));
            let mut w = ball.nf_of(&base)?.clone();
            w.push(first);
            w
        };
        let mut path = Word::empty();
        let mut used: Vec<Letter> = vec![first];
        loop {
            if w == target_nf {
                return Ok(path);
            }
            let rhs = self.least_rhs(&w).map_err(|e| match e {
                Error::RhsWindow(_) => Error::NoRule(self.alphabet.word_name(&w)),
                other => other,
            })?;
            // w = c·u·a_i, rhs = c·v·a_{i+1}; the strip never swallows a_i
            let cp = w.common_prefix_len(&rhs).min(w.len() - 1);
            let u_part = w.prefix(w.len() - 1).suffix_from(cp);
            let v_full = rhs.suffix_from(cp.min(rhs.len()));
            if v_full.is_empty() {
                return Err(Error::NoRule(self.alphabet.word_name(&w)));
            }
            let a_next = v_full.last().expect("nonempty");
            let v_part = v_full.prefix(v_full.len() - 1);
            let piece = self
                .alphabet
                .invert_word(&u_part)?
                .concat(&v_part);
            path = path.concat(&piece);
            if used.contains(&a_next) {
                return Err(Error::ChainRepeat(
                    self.alphabet.name(a_next).to_string(),
                ));
            }
            used.push(a_next);
            if used.len() > budget_letters {
                return Err(Error::ChainRepeat("chain exceeded |A| segments".into()));
            }
            let base = spec.mul(target, &spec.inv(spec.generator(a_next)));
            w = ball.nf_of(&base)?.clone();
            w.push(a_next);
        }
    }

    /// A word labeling a path from `g` to `h` every vertex of which stays in
    /// the ball of radius `n`, for sphere points at distance at most 2,
    /// built by iterated rewriting when no interior midpoint exists.
    pub fn almost_convex_path(
        &self,
        spec: &GroupSpec,
        ball: &Ball,
        g: &Element,
        h: &Element,
        n: u32,
    ) -> Result<Word> {
        if n + 2 > ball.radius {
            return Err(Error::AlmostConvexPre(format!(
                "need ball radius ≥ {} for sphere {}",
                n + 2,
                n
            )));
        }
        if ball.geodesic_length(g)? != n || ball.geodesic_length(h)? != n {
            return Err(Error::AlmostConvexPre("endpoints must lie on the sphere".into()));
        }
        let delta = spec.mul(&spec.inv(g), h);
        let d = ball.geodesic_length(&delta)?;
        if d > 2 {
            return Err(Error::AlmostConvexPre("endpoints farther than 2 apart".into()));
        }
        let path = match d {
            0 => Word::empty(),
            1 => {
                let a = self
                    .alphabet
                    .letters()
                    .find(|&a| spec.generator(a) == &delta)
                    .ok_or_else(|| {
                        Error::AlmostConvexPre("distance-1 pair with no connecting letter".into())
                    })?;
                Word::new(vec![a])
            }
            _ => {
                // look for an interior midpoint first
                let mut two_step: Option<(Letter, Letter)> = None;
                let mut fallback: Option<(Letter, Letter)> = None;
                'outer: for a in self.alphabet.letters() {
                    for b in self.alphabet.letters() {
                        let ab = spec.mul(spec.generator(a), spec.generator(b));
                        if ab != delta {
                            continue;
                        }
                        let mid = spec.mul(g, spec.generator(a));
                        let depth = ball.geodesic_length(&mid)?;
                        if depth <= n {
                            two_step = Some((a, b));
                            break 'outer;
                        }
                        if fallback.is_none() {
                            fallback = Some((a, b));
                        }
                    }
                }
                if let Some((a, b)) = two_step {
                    Word::new(vec![a, b])
                } else {
                    // both midpoints above the sphere: route both endpoints
                    // down to the vertex below the midpoint's normal form
                    let (a, b) = fallback.ok_or_else(|| {
                        Error::AlmostConvexPre("no two-letter factorization".into())
                    })?;
                    let mid = spec.mul(g, spec.generator(a));
                    let budget = self.alphabet.len();
                    let from_g = self.chain_to(spec, ball, &mid, a, budget)?;
                    let b_inv = self.alphabet.inverse(b);
                    let from_h = self.chain_to(spec, ball, &mid, b_inv, budget)?;
                    from_g.concat(&self.alphabet.invert_word(&from_h)?)
                }
            }
        };
        // endpoint and interiority checks
        let mut v = g.clone();
        for &l in path.letters() {
            v = spec.mul(&v, spec.generator(l));
            if ball.geodesic_length(&v)? > n {
                return Err(Error::AlmostConvexPre(format!(
                    "path leaves the ball at {}",
                    self.alphabet.word_name(&path)
                )));
            }
        }
        if &v != h {
            return Err(Error::AlmostConvexPre("path misses its endpoint".into()));
        }
        if let Some(k) = self.bounded_k {
            let bound = 2 * (4 * k + 4) * self.alphabet.len();
            if path.len() > bound {
                return Err(Error::AlmostConvexPre(format!(
                    "path length {} exceeds 2(4k+4)|A| = {}",
                    path.len(),
                    bound
                )));
            }
        }
        Ok(path)
    }

    pub fn to_json(&self) -> CprsJson {
        CprsJson {
            alphabet: self.alphabet.to_json(),
            rules: self.rules.to_json(),
            order: self.order,
            bounded_k: self.bounded_k,
        }
    }

    pub fn from_json(j: &CprsJson) -> Result<Self> {
        let alphabet = Alphabet::from_json(&j.alphabet)?;
        let rules = SyncLanguage::from_json(&j.rules)?;
        let mut c = Cprs::new(alphabet, rules, j.order)?;
        c.bounded_k = j.bounded_k;
        Ok(c)
    }
}
