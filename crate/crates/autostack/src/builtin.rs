//! Built-in example groups and rewriting systems.
//!
//! `z2` is free abelian of rank 2 on letters `x, X, y, Y`. `z2xz2` is the
//! semidirect product Z² ⋊ Z₂ on letters `a, A, t, T`, where `t` acts by
//! swapping the two Z-coordinates (so `tat` equals the second commuting
//! generator). `d-infinity` is Z ⋊ Z₂ with `t` acting by negation.

use crate::cprs::Cprs;
use crate::error::Result;
use crate::fsa::Nfa;
use crate::group::{GroupSpec, SignedPerm};
use crate::synclang::{PaddedAlphabet, SyncLanguage};
use crate::words::{Alphabet, OrderKind};

pub fn z2_alphabet() -> Alphabet {
    Alphabet::with_unit_weights(&[("x", "X"), ("y", "Y")]).expect("valid")
}

pub fn z2_spec() -> GroupSpec {
    GroupSpec::free_abelian(
        z2_alphabet(),
        &[
            ("x", vec![1, 0]),
            ("X", vec![-1, 0]),
            ("y", vec![0, 1]),
            ("Y", vec![0, -1]),
        ],
    )
    .expect("valid")
}

pub fn z2xz2_alphabet() -> Alphabet {
    Alphabet::with_unit_weights(&[("a", "A"), ("t", "T")]).expect("valid")
}

pub fn z2xz2_spec() -> GroupSpec {
    GroupSpec::monomial(
        z2xz2_alphabet(),
        2,
        vec![SignedPerm::identity(2), SignedPerm(vec![2, 1])],
        &[
            ("a", vec![1, 0], 0),
            ("A", vec![-1, 0], 0),
            ("t", vec![0, 0], 1),
            ("T", vec![0, 0], 1),
        ],
    )
    .expect("valid")
}

pub fn d_infinity_spec() -> GroupSpec {
    GroupSpec::monomial(
        Alphabet::with_unit_weights(&[("a", "A"), ("t", "T")]).expect("valid"),
        1,
        vec![SignedPerm::identity(1), SignedPerm(vec![-1])],
        &[
            ("a", vec![1], 0),
            ("A", vec![-1], 0),
            ("t", vec![0], 1),
            ("T", vec![0], 1),
        ],
    )
    .expect("valid")
}

/// One item of a synchronized pair pattern: a single symbol or a starred
/// symbol, each coordinate a letter name or `None` for padding.
#[derive(Clone, Copy)]
enum Pat {
    One(Option<&'static str>, Option<&'static str>),
    Run(Option<&'static str>, Option<&'static str>),
}

fn add_pattern(nfa: &mut Nfa, alpha: &PaddedAlphabet, pattern: &[Pat]) -> Result<()> {
    let base0 = alpha.base(0);
    let base1 = alpha.base(1);
    let enc = |x: Option<&str>, y: Option<&str>| -> Result<u16> {
        let lx = x.map(|n| base0.letter(n)).transpose()?;
        let ly = y.map(|n| base1.letter(n)).transpose()?;
        alpha.encode(&[lx, ly])
    };
    let start = nfa.add_state(false);
    nfa.add_start(start);
    let mut q = start;
    for item in pattern {
        match *item {
            Pat::Run(x, y) => {
                nfa.add_edge(q, enc(x, y)?, q);
            }
            Pat::One(x, y) => {
                let r = nfa.add_state(false);
                nfa.add_edge(q, enc(x, y)?, r);
                q = r;
            }
        }
    }
    nfa.set_accepting(q, true);
    Ok(())
}

/// The shortlex rewriting system of the Z² ⋊ Z₂ example over a ≺ A ≺ t ≺ T.
///
/// Normal forms are all prefixes of words of the shape
/// (a-power)(t)(a-power)(t) with nonzero middle power. Left sides are a
/// normal form followed by one letter; every right side is the shortlex
/// normal form of the left side's element. The rule families with a trailing
/// `T` rewrite the formally distinct letter onto the preferred `t`.
pub fn z2xz2_system() -> Result<Cprs> {
    let base = z2xz2_alphabet();
    let alpha = PaddedAlphabet::pair(&base);
    let mut nfa = Nfa::new(alpha.symbol_names());
    let d = || None::<&'static str>;

    let mut pats: Vec<Vec<Pat>> = Vec::new();
    for &x in &["a", "A"] {
        let xb = if x == "a" { "A" } else { "a" };
        // x^m x̄ → x^{m−1}, m ≥ 1
        pats.push(vec![
            Pat::Run(Some(x), Some(x)),
            Pat::One(Some(x), d()),
            Pat::One(Some(xb), d()),
        ]);
        // x^m t t → x^m
        pats.push(vec![
            Pat::Run(Some(x), Some(x)),
            Pat::One(Some("t"), d()),
            Pat::One(Some("t"), d()),
        ]);
        // x^m T → x^m t
        pats.push(vec![Pat::Run(Some(x), Some(x)), Pat::One(Some("T"), Some("t"))]);
        // x^m t T → x^m
        pats.push(vec![
            Pat::Run(Some(x), Some(x)),
            Pat::One(Some("t"), d()),
            Pat::One(Some("T"), d()),
        ]);
        for &y in &["a", "A"] {
            let yb = if y == "a" { "A" } else { "a" };
            // x^m t y^n ȳ → x^m t y^{n−1}, n ≥ 1
            pats.push(vec![
                Pat::Run(Some(x), Some(x)),
                Pat::One(Some("t"), Some("t")),
                Pat::Run(Some(y), Some(y)),
                Pat::One(Some(y), d()),
                Pat::One(Some(yb), d()),
            ]);
            // x^m t y^n t t → x^m t y^n, n ≥ 1
            pats.push(vec![
                Pat::Run(Some(x), Some(x)),
                Pat::One(Some("t"), Some("t")),
                Pat::One(Some(y), Some(y)),
                Pat::Run(Some(y), Some(y)),
                Pat::One(Some("t"), d()),
                Pat::One(Some("t"), d()),
            ]);
            // x^m t y^n T → x^m t y^n t, n ≥ 1
            pats.push(vec![
                Pat::Run(Some(x), Some(x)),
                Pat::One(Some("t"), Some("t")),
                Pat::One(Some(y), Some(y)),
                Pat::Run(Some(y), Some(y)),
                Pat::One(Some("T"), Some("t")),
            ]);
            // x^m t y^n t T → x^m t y^n, n ≥ 1
            pats.push(vec![
                Pat::Run(Some(x), Some(x)),
                Pat::One(Some("t"), Some("t")),
                Pat::One(Some(y), Some(y)),
                Pat::Run(Some(y), Some(y)),
                Pat::One(Some("t"), d()),
                Pat::One(Some("T"), d()),
            ]);
        }
    }
    for &y in &["a", "A"] {
        // a^i t y^j t a^ε → a^{i+ε} t y^j t, split by sign(i) and ε
        // i ≥ 0, ε = +1
        pats.push(vec![
            Pat::Run(Some("a"), Some("a")),
            Pat::One(Some("t"), Some("a")),
            Pat::One(Some(y), Some("t")),
            Pat::Run(Some(y), Some(y)),
            Pat::One(Some("t"), Some(y)),
            Pat::One(Some("a"), Some("t")),
        ]);
        // i ≤ −1, ε = +1 (the trailing a cancels one A)
        pats.push(vec![
            Pat::Run(Some("A"), Some("A")),
            Pat::One(Some("A"), Some("t")),
            Pat::One(Some("t"), Some(y)),
            Pat::Run(Some(y), Some(y)),
            Pat::One(Some(y), Some("t")),
            Pat::One(Some("t"), d()),
            Pat::One(Some("a"), d()),
        ]);
        // i ≤ 0, ε = −1
        pats.push(vec![
            Pat::Run(Some("A"), Some("A")),
            Pat::One(Some("t"), Some("A")),
            Pat::One(Some(y), Some("t")),
            Pat::Run(Some(y), Some(y)),
            Pat::One(Some("t"), Some(y)),
            Pat::One(Some("A"), Some("t")),
        ]);
        // i ≥ 1, ε = −1 (the trailing A cancels one a)
        pats.push(vec![
            Pat::Run(Some("a"), Some("a")),
            Pat::One(Some("a"), Some("t")),
            Pat::One(Some("t"), Some(y)),
            Pat::Run(Some(y), Some(y)),
            Pat::One(Some(y), Some("t")),
            Pat::One(Some("t"), d()),
            Pat::One(Some("A"), d()),
        ]);
    }
    for p in &pats {
        add_pattern(&mut nfa, &alpha, p)?;
    }
    let machine = nfa.determinize_minimize();
    let rules = SyncLanguage::new(alpha, machine)?;
    Cprs::new(base, rules, OrderKind::Shortlex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::build_ball;
    use crate::synclang::SyncLanguage as SL;

    #[test]
    fn z2xz2_rules_match_ball_oracle() {
        // accepted pairs are exactly (minimally reducible u, shortlex nf of u)
        let sys = z2xz2_system().unwrap();
        let spec = z2xz2_spec();
        let base = &spec.alphabet;
        let ball = build_ball(&spec, 7, OrderKind::Shortlex, 100_000).unwrap();
        let nf = |w: &crate::words::Word| {
            ball.nf_of(&spec.evaluate(w).unwrap()).unwrap().clone()
        };
        for u in base.words_up_to(6) {
            let is_nf = |w: &crate::words::Word| nf(w) == *w;
            let minimally_reducible =
                !u.is_empty() && !is_nf(&u) && is_nf(&u.prefix(u.len() - 1));
            let expect_v = nf(&u);
            for v in base.words_up_to(6) {
                let expected = minimally_reducible && v == expect_v;
                let got = sys.rules().contains_pair(&u, &v).unwrap();
                assert_eq!(
                    got,
                    expected,
                    "pair ({}, {})",
                    base.word_name(&u),
                    base.word_name(&v)
                );
            }
        }
    }

    #[test]
    fn z2xz2_rules_well_padded() {
        let sys = z2xz2_system().unwrap();
        let filter = SL::full(sys.rules().alphabet().clone());
        let filtered = sys.rules().intersect(&filter).unwrap();
        assert!(filtered.equivalent(sys.rules()).unwrap());
    }
}
