//! Full pipeline on the infinite dihedral group, a fixture the acceptance
//! suite does not touch: witness search, the witness automaton against its
//! brute-force oracle, refinement, verification, the bounded transformation,
//! the flow table, and the geodesic check.

use autostack::builtin;
use autostack::cprs::{verify_geodesic_autostackable, Checks, Cprs};
use autostack::fftp;
use autostack::group::build_ball;
use autostack::words::{OrderKind, Word};

#[test]
fn d_infinity_end_to_end() {
    let spec = builtin::d_infinity_spec();
    let search_ball = build_ball(&spec, 6, OrderKind::Srev, 1_000_000).unwrap();
    let r = fftp::fftp_search(&spec, &search_ball, 6, 5).unwrap();
    assert!(r.verified, "{r:?}");
    let k = r.least_k.unwrap();

    let ball = build_ball(&spec, (4 * k + 2).max(12), OrderKind::Srev, 1_000_000).unwrap();
    let wa = fftp::build_witness_automaton(&spec, &ball, k).unwrap();

    // machine vs oracle on short pairs
    let mut got: Vec<(Word, Word)> = wa
        .language
        .enumerate_pairs(4)
        .unwrap()
        .into_iter()
        .filter(|(u, _)| u.len() <= 4)
        .collect();
    let mut want = fftp::bruteforce_l(&spec, &ball, k, 4).unwrap();
    got.sort();
    want.sort();
    assert_eq!(got, want);

    let lp = fftp::to_lprime(&wa.language.minimized()).unwrap();
    let lpp = fftp::to_lpp(&lp).unwrap();
    let sys = Cprs::new(spec.alphabet.clone(), lpp, OrderKind::Srev).unwrap();
    let vr = sys.verify(&spec, &ball, 4, Checks::default()).unwrap();
    assert!(vr.pass(), "{vr:?}");

    // smallest constant whose middle bound covers the pair differences
    let kc = ((4 * k + 1) as usize).div_ceil(2);
    let big = build_ball(&spec, (2 * kc + 2) as u32, OrderKind::Srev, 1_000_000).unwrap();
    let (s, report) = sys.theorem_a_construct(&spec, &big, Some(kc)).unwrap();
    assert!(report.s1_rules > 0);
    let vr = s.verify(
        &spec,
        &big,
        4,
        Checks {
            convergent: true,
            weight_nonincreasing: false, // the bounded system may lengthen
            property_l: false,
            normal_forms_match: true,
        },
    )
    .unwrap();
    assert!(vr.pass(), "{vr:?}");

    let small = build_ball(&spec, 4, OrderKind::Srev, 1_000_000).unwrap();
    let ft = s.flow_function(&spec, &small).unwrap();
    let geo = verify_geodesic_autostackable(&ft, &spec, &small).unwrap();
    assert!(geo.pass(), "{:?}", geo.violations);

    // almost-convexity paths across the spheres
    for n in 1..=4u32 {
        let sphere: Vec<_> = big.sphere(n as usize).to_vec();
        for g in &sphere {
            for h in &sphere {
                let d = match big.entry(&spec.mul(&spec.inv(g), h)) {
                    Some(e) => e.length,
                    None => continue,
                };
                if d > 2 {
                    continue;
                }
                let p = s.almost_convex_path(&spec, &big, g, h, n).unwrap();
                let mut v = g.clone();
                for &l in p.letters() {
                    v = spec.mul(&v, spec.generator(l));
                    assert!(big.geodesic_length(&v).unwrap() <= n);
                }
                assert_eq!(&v, h);
            }
        }
    }
}
