//! Empirical fellow-traveler verification: witness search over Cayley balls,
//! the two-stage witness for words that are geodesic but not normal, the
//! witness automaton over word differences, and the refinement of its
//! language to one with minimal right sides and pinned last letters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::fsa::Dfa;
use crate::group::{fellow_travel_within, Ball, Element, GroupSpec};
use crate::synclang::{skew_language, PaddedAlphabet, SkewBound, SyncLanguage};
use crate::words::{Letter, OrderKind, Word};

/// Outcome of a bounded fellow-traveler search. A returned constant is
/// verified on all words up to `max_len` only; `least_k = None` is evidence
/// toward failure for every constant up to `max_k`, not a proof.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FftpReport {
    pub max_k: u32,
    pub max_len: usize,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub least_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<String>>,
}

fn words_by_element(
    spec: &GroupSpec,
    max_len: usize,
) -> Result<HashMap<Element, Vec<Word>>> {
    let mut map: HashMap<Element, Vec<Word>> = HashMap::new();
    for w in spec.alphabet.words_up_to(max_len) {
        map.entry(spec.evaluate(&w)?).or_default().push(w);
    }
    Ok(map)
}

/// Exact minimal fellow-traveler constant of any witness for `u`, computed
/// by a dynamic program over word differences: at each prefix position the
/// reachable difference elements within `cap` are carried together with the
/// smallest achievable running maximum distance. Returns `None` when `u` is
/// geodesic, `Some(None)` when no witness exists within `cap`.
pub fn min_witness_distance(
    spec: &GroupSpec,
    ball: &Ball,
    u: &Word,
    cap: u32,
) -> Result<Option<Option<u32>>> {
    let g = spec.evaluate(u)?;
    let glen = ball.geodesic_length(&g)? as usize;
    if glen == u.len() {
        return Ok(None);
    }
    // suffix elements σ_n = ū(n)⁻¹·ū and the running maximum of their
    // lengths from each position on
    let n = u.len();
    let mut sigma: Vec<Element> = Vec::with_capacity(n + 1);
    sigma.push(g.clone());
    let mut pre = spec.identity();
    for &l in u.letters() {
        pre = spec.mul(&pre, spec.generator(l));
        sigma.push(spec.mul(&spec.inv(&pre), &g));
    }
    let mut tail_max = vec![0u32; n + 2];
    for m in (1..=n).rev() {
        let d = ball.geodesic_length(&sigma[m])?;
        tail_max[m] = tail_max[m + 1].max(d);
    }

    let gens: Vec<Element> = spec
        .alphabet
        .letters()
        .map(|l| spec.generator(l).clone())
        .collect();
    // layer: difference element → least running maximum
    let mut layer: Vec<(Element, u32)> = vec![(spec.identity(), 0)];
    let mut best: Option<u32> = None;
    for pos in 0..n {
        // finish here: v has length `pos` and must equal ū
        if pos >= glen {
            for (d, val) in &layer {
                if d == &sigma[pos] {
                    let total = (*val).max(tail_max[pos + 1]);
                    if best.is_none_or(|b| total < b) {
                        best = Some(total);
                    }
                }
            }
        }
        if pos == n - 1 {
            break;
        }
        let a_inv = spec.inv(spec.generator(u.letters()[pos]));
        let mut next: Vec<(Element, u32)> = Vec::new();
        for (d, val) in &layer {
            let moved = spec.mul(&a_inv, d);
            for ge in &gens {
                let nd = spec.mul(&moved, ge);
                let dist = match ball.entry(&nd) {
                    Some(e) => e.length,
                    None => continue, // beyond the radius, hence beyond cap
                };
                if dist > cap {
                    continue;
                }
                let nval = (*val).max(dist);
                match next.iter_mut().find(|(e, _)| e == &nd) {
                    Some((_, v)) => {
                        if nval < *v {
                            *v = nval;
                        }
                    }
                    None => next.push((nd, nval)),
                }
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    Ok(Some(best))
}

const FFTP_CHUNK: usize = 8192;

/// Least `k ≤ max_k` such that every non-geodesic word of length ≤ `max_len`
/// has a strictly shorter equal word within fellow-traveler distance `k`.
/// Stops at the first word (in enumeration order) with no such witness.
pub fn fftp_search(
    spec: &GroupSpec,
    ball: &Ball,
    max_k: u32,
    max_len: usize,
) -> Result<FftpReport> {
    if (ball.radius as usize) < max_len || ball.radius < max_k {
        return Err(Error::BallTooSmall {
            needed: max_len.max(max_k as usize) as u32,
            have: ball.radius,
        });
    }
    let words: Vec<Word> = spec.alphabet.words_up_to(max_len).collect();
    let mut least = 0u32;
    for chunk in words.chunks(FFTP_CHUNK) {
        let kappas = exec::map_collect(
            &chunk.iter().collect::<Vec<_>>(),
            |u| -> Result<Option<Option<u32>>> { min_witness_distance(spec, ball, u, max_k) },
        );
        for (u, r) in chunk.iter().zip(kappas) {
            match r? {
                None => {}
                Some(Some(k)) => least = least.max(k),
                Some(None) => {
                    return Ok(FftpReport {
                        max_k,
                        max_len,
                        verified: false,
                        least_k: None,
                        counterexample: Some(spec.alphabet.word_to_names(u)),
                    });
                }
            }
        }
    }
    Ok(FftpReport {
        max_k,
        max_len,
        verified: true,
        least_k: Some(least),
        counterexample: None,
    })
}

/// Words of exact length `len` representing `target`, pruned by ball
/// distances, in enumeration order of letter indices.
fn equal_words_of_length(
    spec: &GroupSpec,
    ball: &Ball,
    target: &Element,
    len: usize,
) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Element, Vec<Letter>)> = vec![(spec.identity(), Vec::new())];
    while let Some((e, w)) = stack.pop() {
        if w.len() == len {
            if &e == target {
                out.push(Word::new(w));
            }
            continue;
        }
        // letters pushed in reverse so the stack pops in index order
        for l in spec.alphabet.letters().collect::<Vec<_>>().into_iter().rev() {
            let ne = spec.mul(&e, spec.generator(l));
            let remaining = len - w.len() - 1;
            let diff = spec.mul(&spec.inv(&ne), target);
            match ball.entry(&diff) {
                Some(entry) if entry.length as usize <= remaining => {
                    let mut nw = w.clone();
                    nw.push(l);
                    stack.push((ne, nw));
                }
                Some(_) => {}
                None => {
                    // distance exceeds the radius, hence the remaining budget
                    if (ball.radius as usize) < remaining {
                        return Err(Error::BallEscape(ball.radius));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A witness for a non-geodesic word: strictly shorter, equal in the group,
/// fellow traveling within `k`. Searched shorter-first, then srev.
pub fn witness(spec: &GroupSpec, ball: &Ball, u: &Word, k: u32) -> Result<Word> {
    let g = spec.evaluate(u)?;
    let glen = ball.geodesic_length(&g)? as usize;
    if glen == u.len() {
        return Err(Error::GeodesicInput);
    }
    for len in glen..u.len() {
        let mut cands = equal_words_of_length(spec, ball, &g, len)?;
        cands.sort_by(|a, b| spec.alphabet.compare(a, b, OrderKind::Srev));
        for v in cands {
            if fellow_travel_within(spec, ball, u, &v, k)?.is_some() {
                return Ok(v);
            }
        }
    }
    Err(Error::NoWitness(k))
}

/// For a word that is not the order-least normal form of its element:
/// a witness when non-geodesic, else the two-stage construction that backs
/// off the longest common suffix with the normal form, producing a word
/// strictly smaller in srev that fellow travels within `2k`.
pub fn lemma_witness(spec: &GroupSpec, ball: &Ball, u: &Word, k: u32) -> Result<Word> {
    let g = spec.evaluate(u)?;
    let nf = ball.nf_of(&g)?.clone();
    if &nf == u {
        return Err(Error::AlreadyNormal(spec.alphabet.word_name(u)));
    }
    let glen = ball.geodesic_length(&g)? as usize;
    let v = if glen < u.len() {
        witness(spec, ball, u, k)?
    } else {
        let cs = u.common_suffix_len(&nf);
        let u1 = u.prefix(u.len() - cs);
        let u2 = u.suffix_from(u.len() - cs);
        let l = nf.letters()[nf.len() - cs - 1];
        let mut u1linv = u1.clone();
        u1linv.push(spec.alphabet.inverse(l));
        let vp = witness(spec, ball, &u1linv, k)?;
        let vpp = if vp.len() == u1.len() - 1 {
            vp
        } else {
            witness(spec, ball, &vp, k)?
        };
        if vpp.len() + 1 != u1.len() {
            return Err(Error::NoWitness(k));
        }
        let mut out = vpp;
        out.push(l);
        out.concat(&u2)
    };
    // postcondition replay
    if spec.alphabet.compare(&v, u, OrderKind::Srev) != std::cmp::Ordering::Less {
        return Err(Error::NoWitness(k));
    }
    match fellow_travel_within(spec, ball, u, &v, 2 * k)? {
        Some(_) => Ok(v),
        None => Err(Error::NoWitness(2 * k)),
    }
}

/// State layout of the witness automaton: one plain and one dollar state per
/// element within `4k`, one accept-on-equal-length state, one failure sink.
pub struct WitnessAutomaton {
    pub language: SyncLanguage,
    pub k: u32,
    pub ball_elements: usize,
}

/// Builds the word-difference automaton accepting exactly the padded pairs
/// `(u, v)` with `u =_G v`, `v <_srev u`, and `u, v` fellow traveling within
/// `4k`.
pub fn build_witness_automaton(
    spec: &GroupSpec,
    ball: &Ball,
    k: u32,
) -> Result<WitnessAutomaton> {
    let k4 = 4 * k;
    if ball.radius < k4 + 2 {
        return Err(Error::BallTooSmall {
            needed: k4 + 2,
            have: ball.radius,
        });
    }
    let base = &spec.alphabet;
    let alpha = PaddedAlphabet::pair(base);
    let mut elems: Vec<Element> = Vec::new();
    for g in ball.elements() {
        if ball.geodesic_length(g)? <= k4 {
            elems.push(g.clone());
        }
    }
    let idx: HashMap<Element, u32> = elems
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i as u32))
        .collect();
    let n4 = elems.len();
    let identity_idx = idx[&spec.identity()];
    let lambda_prime = (2 * n4) as u32;
    let fail = (2 * n4 + 1) as u32;
    let n_states = 2 * n4 + 2;
    let ns = alpha.n_symbols();
    let mut table = vec![vec![fail; ns]; n_states];

    #[derive(Clone, Copy, PartialEq)]
    enum Flavor {
        Plain,
        Dollar,
        LambdaPrime,
    }
    let decomp = |s: u32| -> Option<(u32, Flavor)> {
        if s == fail {
            None
        } else if s == lambda_prime {
            Some((identity_idx, Flavor::LambdaPrime))
        } else if (s as usize) < n4 {
            Some((s, Flavor::Plain))
        } else {
            Some((s - n4 as u32, Flavor::Dollar))
        }
    };

    for s in 0..n_states as u32 {
        let Some((gi, flavor)) = decomp(s) else {
            continue;
        };
        let g = &elems[gi as usize];
        for sym in 0..ns {
            let parts = alpha.decode(sym as u16);
            let (x, y) = (parts[0], parts[1]);
            let Some(a) = x else {
                continue; // padding in the first coordinate fails
            };
            // vterm: a letter after padding in v fails
            if flavor == Flavor::Dollar && y.is_some() {
                continue;
            }
            let b_elt = match y {
                Some(b) => spec.generator(b).clone(),
                None => spec.identity(),
            };
            let diff = spec.mul(
                &spec.mul(&spec.inv(spec.generator(a)), g),
                &b_elt,
            );
            let dlen = ball.geodesic_length(&diff)?;
            if dlen > k4 {
                continue;
            }
            let di = idx[&diff];
            let vterm_dollar = y.is_none();
            let srev_one = match y {
                Some(b) => {
                    base.rank(b) < base.rank(a)
                        || (flavor == Flavor::LambdaPrime && b == a)
                }
                None => false,
            };
            let target = if diff == spec.identity() && !vterm_dollar && srev_one {
                lambda_prime
            } else if vterm_dollar {
                di + n4 as u32
            } else {
                di
            };
            table[s as usize][sym] = target;
        }
    }
    let mut accepting = vec![false; n_states];
    accepting[identity_idx as usize + n4] = true; // identity with v terminated
    accepting[lambda_prime as usize] = true;
    let machine = Dfa::from_table(
        alpha.symbol_names(),
        table,
        identity_idx,
        accepting,
    )?;
    Ok(WitnessAutomaton {
        language: SyncLanguage::from_dfa_unchecked(alpha, machine),
        k,
        ball_elements: n4,
    })
}

/// Exhaustive oracle for the witness automaton's language: all pairs with
/// `|u| ≤ max_len`, `u =_G v`, `v <_srev u`, fellow traveling within `4k`.
pub fn bruteforce_l(
    spec: &GroupSpec,
    ball: &Ball,
    k: u32,
    max_len: usize,
) -> Result<Vec<(Word, Word)>> {
    let k4 = 4 * k;
    if ball.radius < k4 {
        return Err(Error::BallTooSmall {
            needed: k4,
            have: ball.radius,
        });
    }
    let by_elem = words_by_element(spec, max_len)?;
    let words: Vec<Word> = spec.alphabet.words_up_to(max_len).collect();
    let per_u = exec::map_collect(&words, |u| -> Result<Vec<(Word, Word)>> {
        let g = spec.evaluate(u)?;
        let mut out = Vec::new();
        if let Some(cands) = by_elem.get(&g) {
            for v in cands {
                if spec.alphabet.compare(v, u, OrderKind::Srev) != std::cmp::Ordering::Less {
                    continue;
                }
                if fellow_travel_within(spec, ball, u, v, k4)?.is_some() {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in per_u {
        all.extend(r?);
    }
    Ok(all)
}

/// Restricts a pair language so that every proper prefix of the left side is
/// a normal form: the normal forms are computed as the complement of the
/// left-side projection, and the left coordinate is restricted to a normal
/// form followed by one letter.
pub fn to_lprime(m: &SyncLanguage) -> Result<SyncLanguage> {
    let base = m.alphabet().base(0).clone();
    let lhs = m.project(0)?;
    let nlang = lhs.complement();
    let one = Dfa::finite(
        base.symbol_names(),
        &base.letters().map(|l| vec![l.0]).collect::<Vec<_>>(),
    );
    let na = nlang.concat(&one)?;
    m.coordinate_restrict(0, &na)
}

/// The subtraction chain selecting, for every left side, the right sides of
/// minimal length and least last letter: first the pairs whose right side is
/// two letters shorter, then one, then equal length, peeling letters in
/// ascending order within each level. The empty right side precedes every
/// letter class in its level — it is the srev-least word of all, so a left
/// side with an empty partner keeps exactly that partner.
pub fn to_lpp(m: &SyncLanguage) -> Result<SyncLanguage> {
    let base = m.alphabet().base(0).clone();
    let alpha = m.alphabet().clone();
    let full = SyncLanguage::full(alpha.clone());
    let all = Dfa::all_words(base.symbol_names());
    let ends_in = |l: Letter| -> Result<Dfa> {
        all.concat(&Dfa::literal(base.symbol_names(), &[l.0]))
    };
    let empty_word = Dfa::literal(base.symbol_names(), &[]);
    let mut classes: Vec<Dfa> = vec![empty_word];
    classes.extend(
        base.letters_by_order()
            .into_iter()
            .map(ends_in)
            .collect::<Result<Vec<_>>>()?,
    );

    let mut result: Option<SyncLanguage> = None;
    let mut blockers: Option<SyncLanguage> = None;
    for gap in [2usize, 1, 0] {
        let level = m.intersect(&skew_language(&alpha, SkewBound::Exact(gap))?)?;
        let mut level_block: Option<SyncLanguage> = None;
        for class in &classes {
            let mut lia = level.coordinate_restrict(1, class)?;
            if let Some(b) = &blockers {
                lia = lia.difference(b)?;
            }
            if let Some(b) = &level_block {
                lia = lia.difference(b)?;
            }
            if lia.is_empty() {
                continue;
            }
            let covered = full.coordinate_restrict(0, &lia.project(0)?)?;
            level_block = Some(match level_block {
                Some(b) => b.union(&covered)?,
                None => covered,
            });
            result = Some(match result {
                Some(r) => r.union(&lia)?,
                None => lia,
            });
        }
        if let Some(lb) = level_block {
            blockers = Some(match blockers {
                Some(b) => b.union(&lb)?,
                None => lb,
            });
        }
    }
    Ok(result.unwrap_or_else(|| SyncLanguage::empty(alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::group::build_ball;

    fn z2_setup(radius: u32) -> (GroupSpec, Ball) {
        let spec = builtin::z2_spec();
        let ball = build_ball(&spec, radius, OrderKind::Srev, 500_000).unwrap();
        (spec, ball)
    }

    #[test]
    fn z2_fftp_search_small() {
        let (spec, ball) = z2_setup(10);
        let r = fftp_search(&spec, &ball, 6, 4).unwrap();
        assert!(r.verified);
        assert!(r.least_k.unwrap() <= 2);
    }

    #[test]
    fn finite_group_always_within_diameter() {
        // the cyclic group of order 3 as a finite table
        let base = crate::words::Alphabet::with_unit_weights(&[("a", "A")]).unwrap();
        let mul = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let spec = crate::group::GroupSpec::finite_table(base, mul, &[("a", 1), ("A", 2)]).unwrap();
        let ball = build_ball(&spec, 6, OrderKind::Shortlex, 100).unwrap();
        let r = fftp_search(&spec, &ball, 2, 5).unwrap();
        assert!(r.verified, "{r:?}");
    }

    #[test]
    fn witness_examples() {
        let (spec, ball) = z2_setup(8);
        let a = &spec.alphabet;
        let w = witness(&spec, &ball, &a.parse_word("xX").unwrap(), 1).unwrap();
        assert!(w.is_empty());
        let w = witness(&spec, &ball, &a.parse_word("yxY").unwrap(), 2).unwrap();
        assert_eq!(a.word_name(&w), "x");
        assert!(matches!(
            witness(&spec, &ball, &a.parse_word("xx").unwrap(), 2),
            Err(Error::GeodesicInput)
        ));
    }

    #[test]
    fn lemma_witness_geodesic_case() {
        let (spec, ball) = z2_setup(10);
        let a = &spec.alphabet;
        // xy is geodesic but its srev normal form is yx
        let u = a.parse_word("xy").unwrap();
        let v = lemma_witness(&spec, &ball, &u, 2).unwrap();
        assert_eq!(spec.evaluate(&v).unwrap(), spec.evaluate(&u).unwrap());
        assert_eq!(
            a.compare(&v, &u, OrderKind::Srev),
            std::cmp::Ordering::Less
        );
        assert_eq!(v.last(), Some(a.letter("x").unwrap()));
        assert!(matches!(
            lemma_witness(&spec, &ball, &a.parse_word("yx").unwrap(), 2),
            Err(Error::AlreadyNormal(_))
        ));
    }

    #[test]
    fn witness_automaton_state_count_and_samples() {
        let (spec, ball) = z2_setup(12);
        let k = 1u32;
        let wa = build_witness_automaton(&spec, &ball, k).unwrap();
        // elements within 4k plus the dollar copies, the equal-length accept
        // state, and the sink
        let b4k = ball
            .elements()
            .filter(|g| ball.geodesic_length(g).unwrap() <= 4 * k)
            .count();
        assert_eq!(wa.language.machine().n_states(), 2 * b4k + 2);
        let a = &spec.alphabet;
        assert!(!wa
            .language
            .contains_pair(&a.parse_word("x").unwrap(), &a.parse_word("y").unwrap())
            .unwrap());
        assert!(wa
            .language
            .contains_pair(&a.parse_word("xX").unwrap(), &Word::empty())
            .unwrap());
        assert!(wa
            .language
            .contains_pair(&a.parse_word("xy").unwrap(), &a.parse_word("yx").unwrap())
            .unwrap());
    }

    #[test]
    fn bruteforce_l_examples() {
        let (spec, ball) = z2_setup(8);
        let l = bruteforce_l(&spec, &ball, 1, 2).unwrap();
        let a = &spec.alphabet;
        assert!(l.contains(&(a.parse_word("xX").unwrap(), Word::empty())));
        // no pairs with an empty left side
        assert!(l.iter().all(|(u, _)| !u.is_empty()));
        // antisymmetry
        for (u, v) in &l {
            assert!(!l.contains(&(v.clone(), u.clone())));
        }
    }

    #[test]
    fn machine_equals_oracle_small() {
        let (spec, ball) = z2_setup(12);
        let k = 1u32;
        let wa = build_witness_automaton(&spec, &ball, k).unwrap();
        let oracle = bruteforce_l(&spec, &ball, k, 4).unwrap();
        // every accepted pair has |v| ≤ |u|, so padded length = |u| and
        // enumerating to maxlen already captures all pairs with |u| ≤ maxlen
        let mut got: Vec<(Word, Word)> = wa
            .language
            .enumerate_pairs(4)
            .unwrap()
            .into_iter()
            .filter(|(u, _)| u.len() <= 4)
            .collect();
        let mut want = oracle;
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}
