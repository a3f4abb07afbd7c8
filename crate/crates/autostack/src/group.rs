//! Computable group backends and Cayley-ball tables: geodesic lengths,
//! order-least normal forms, spheres, and fellow-traveler distances.
//!
//! The monomial-extension backend stores an integer vector and a finite-part
//! index; right multiplication by a generator applies the finite part's
//! signed-permutation action to the generator's translation. This covers the
//! free abelian groups and their extensions by signed permutation actions
//! with exact integer arithmetic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Alphabet, AlphabetJson, OrderKind, Word};

/// A signed permutation of coordinates: entry `i` holds `±(j+1)`, meaning
/// `(f·v)[i] = sgn(e_i) · v[|e_i|−1]`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SignedPerm(pub Vec<i64>);

impl SignedPerm {
    pub fn identity(rank: usize) -> Self {
        SignedPerm((1..=rank as i64).collect())
    }

    fn validate(&self, rank: usize) -> Result<()> {
        if self.0.len() != rank {
            return Err(Error::InvalidGroup("signed permutation rank mismatch".into()));
        }
        let mut seen = vec![false; rank];
        for &e in &self.0 {
            let j = e.unsigned_abs() as usize;
            if e == 0 || j > rank || seen[j - 1] {
                return Err(Error::InvalidGroup("invalid signed permutation".into()));
            }
            seen[j - 1] = true;
        }
        Ok(())
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.0
            .iter()
            .map(|&e| {
                let x = v[e.unsigned_abs() as usize - 1];
                if e < 0 {
                    -x
                } else {
                    x
                }
            })
            .collect()
    }

    /// Matrix composition: `(self ∘ other)·v = self·(other·v)`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        SignedPerm(
            self.0
                .iter()
                .map(|&e| {
                    let x = other.0[e.unsigned_abs() as usize - 1];
                    if e < 0 {
                        -x
                    } else {
                        x
                    }
                })
                .collect(),
        )
    }
}

/// Canonical backend coordinates of a group element. Two words represent the
/// same element iff their keys are identical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Element {
    pub vec: Vec<i64>,
    pub fin: u32,
}

impl Element {
    pub fn to_json(&self) -> ElementJson {
        ElementJson {
            vec: self.vec.clone(),
            fin: self.fin,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
pub struct ElementJson {
    #[serde(default)]
    pub vec: Vec<i64>,
    #[serde(default)]
    pub fin: u32,
}

#[derive(Clone, Debug)]
enum Backend {
    FreeAbelian {
        rank: usize,
    },
    Monomial {
        rank: usize,
        elems: Vec<SignedPerm>,
        mul: Vec<Vec<u32>>,
        inv: Vec<u32>,
    },
    FiniteTable {
        mul: Vec<Vec<u32>>,
        inv: Vec<u32>,
    },
}

/// A computable group with a distinguished generator per alphabet letter.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub alphabet: Alphabet,
    backend: Backend,
    gen_map: Vec<Element>,
}

#[derive(Serialize, Deserialize)]
pub struct GroupSpecJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<u32>>>,
    pub alphabet: AlphabetJson,
    pub generators: BTreeMap<String, ElementJson>,
}

fn close_table(elems: &[SignedPerm]) -> Result<(Vec<Vec<u32>>, Vec<u32>)> {
    let n = elems.len();
    let mut mul = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = elems[i].compose(&elems[j]);
            let k = elems
                .iter()
                .position(|e| *e == c)
                .ok_or_else(|| Error::InvalidGroup("finite action not closed".into()))?;
            mul[i][j] = k as u32;
        }
    }
    let id = elems
        .iter()
        .position(|e| *e == SignedPerm::identity(e.0.len()))
        .ok_or_else(|| Error::InvalidGroup("finite action lacks identity".into()))?;
    if id != 0 {
        return Err(Error::InvalidGroup(
            "finite action must list the identity first".into(),
        ));
    }
    let mut inv = vec![u32::MAX; n];
    for i in 0..n {
        for j in 0..n {
            if mul[i][j] as usize == id {
                inv[i] = j as u32;
            }
        }
        if inv[i] == u32::MAX {
            return Err(Error::InvalidGroup("finite action element has no inverse".into()));
        }
    }
    Ok((mul, inv))
}

impl GroupSpec {
    pub fn free_abelian(alphabet: Alphabet, gens: &[(&str, Vec<i64>)]) -> Result<Self> {
        let rank = gens
            .first()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::InvalidGroup("no generators".into()))?;
        let gen_map = Self::build_gen_map(
            &alphabet,
            gens.iter().map(|(n, v)| {
                (
                    *n,
                    Element {
                        vec: v.clone(),
                        fin: 0,
                    },
                )
            }),
        )?;
        let spec = GroupSpec {
            alphabet,
            backend: Backend::FreeAbelian { rank },
            gen_map,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn monomial(
        alphabet: Alphabet,
        rank: usize,
        action: Vec<SignedPerm>,
        gens: &[(&str, Vec<i64>, u32)],
    ) -> Result<Self> {
        for p in &action {
            p.validate(rank)?;
        }
        let (mul, inv) = close_table(&action)?;
        let gen_map = Self::build_gen_map(
            &alphabet,
            gens.iter().map(|(n, v, f)| {
                (
                    *n,
                    Element {
                        vec: v.clone(),
                        fin: *f,
                    },
                )
            }),
        )?;
        let spec = GroupSpec {
            alphabet,
            backend: Backend::Monomial {
                rank,
                elems: action,
                mul,
                inv,
            },
            gen_map,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite_table(
        alphabet: Alphabet,
        mul: Vec<Vec<u32>>,
        gens: &[(&str, u32)],
    ) -> Result<Self> {
        let n = mul.len();
        if n == 0 || n > 512 {
            return Err(Error::InvalidGroup("table size out of range".into()));
        }
        for row in &mul {
            if row.len() != n || row.iter().any(|&x| x as usize >= n) {
                return Err(Error::InvalidGroup("malformed multiplication table".into()));
            }
        }
        // exhaustive associativity validation; user tables are the main risk
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b] as usize][c] != mul[a][mul[b][c] as usize] {
                        return Err(Error::InvalidGroup(format!(
                            "table not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        if (0..n).any(|a| mul[0][a] as usize != a || mul[a][0] as usize != a) {
            return Err(Error::InvalidGroup("index 0 must be the identity".into()));
        }
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a][b] == 0 {
                    inv[a] = b as u32;
                }
            }
            if inv[a] == u32::MAX {
                return Err(Error::InvalidGroup(format!("element {a} has no inverse")));
            }
        }
        let gen_map = Self::build_gen_map(
            &alphabet,
            gens.iter().map(|(nm, f)| {
                (
                    *nm,
                    Element {
                        vec: Vec::new(),
                        fin: *f,
                    },
                )
            }),
        )?;
        let spec = GroupSpec {
            alphabet,
            backend: Backend::FiniteTable { mul, inv },
            gen_map,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn build_gen_map<'a>(
        alphabet: &Alphabet,
        gens: impl Iterator<Item = (&'a str, Element)>,
    ) -> Result<Vec<Element>> {
        let mut map: Vec<Option<Element>> = vec![None; alphabet.len()];
        for (name, e) in gens {
            let l = alphabet.letter(name)?;
            map[l.index()] = Some(e);
        }
        map.into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.ok_or_else(|| {
                    Error::InvalidGroup(format!("letter index {i} has no generator image"))
                })
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        // generator-map(a⁻¹) must invert generator-map(a)
        for l in self.alphabet.letters() {
            let li = self.alphabet.inverse(l);
            let prod = self.mul(&self.gen_map[l.index()], &self.gen_map[li.index()]);
            if prod != self.identity() {
                return Err(Error::InvalidGroup(format!(
                    "generator image of `{}` does not invert `{}`",
                    self.alphabet.name(li),
                    self.alphabet.name(l)
                )));
            }
        }
        Ok(())
    }

    pub fn identity(&self) -> Element {
        match &self.backend {
            Backend::FreeAbelian { rank } | Backend::Monomial { rank, .. } => Element {
                vec: vec![0; *rank],
                fin: 0,
            },
            Backend::FiniteTable { .. } => Element {
                vec: Vec::new(),
                fin: 0,
            },
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match &self.backend {
            Backend::FreeAbelian { .. } => Element {
                vec: a.vec.iter().zip(&b.vec).map(|(x, y)| x + y).collect(),
                fin: 0,
            },
            Backend::Monomial { elems, mul, .. } => {
                let moved = elems[a.fin as usize].apply(&b.vec);
                Element {
                    vec: a.vec.iter().zip(&moved).map(|(x, y)| x + y).collect(),
                    fin: mul[a.fin as usize][b.fin as usize],
                }
            }
            Backend::FiniteTable { mul, .. } => Element {
                vec: Vec::new(),
                fin: mul[a.fin as usize][b.fin as usize],
            },
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match &self.backend {
            Backend::FreeAbelian { .. } => Element {
                vec: a.vec.iter().map(|x| -x).collect(),
                fin: 0,
            },
            Backend::Monomial { elems, inv, .. } => {
                let fi = inv[a.fin as usize];
                let moved = elems[fi as usize].apply(&a.vec);
                Element {
                    vec: moved.iter().map(|x| -x).collect(),
                    fin: fi,
                }
            }
            Backend::FiniteTable { inv, .. } => Element {
                vec: Vec::new(),
                fin: inv[a.fin as usize],
            },
        }
    }

    pub fn generator(&self, l: crate::words::Letter) -> &Element {
        &self.gen_map[l.index()]
    }

    /// Left-to-right product of generator images.
    pub fn evaluate(&self, w: &Word) -> Result<Element> {
        self.alphabet.check_word(w)?;
        let mut e = self.identity();
        for &l in w.letters() {
            e = self.mul(&e, &self.gen_map[l.index()]);
        }
        Ok(e)
    }

    pub fn to_json(&self) -> GroupSpecJson {
        let (kind, rank, action, table) = match &self.backend {
            Backend::FreeAbelian { rank } => ("free-abelian".to_string(), Some(*rank), None, None),
            Backend::Monomial { rank, elems, .. } => (
                "monomial-extension".to_string(),
                Some(*rank),
                Some(elems.iter().map(|p| p.0.clone()).collect()),
                None,
            ),
            Backend::FiniteTable { mul, .. } => {
                ("finite-table".to_string(), None, None, Some(mul.clone()))
            }
        };
        GroupSpecJson {
            kind,
            rank,
            action,
            table,
            alphabet: self.alphabet.to_json(),
            generators: self
                .alphabet
                .letters()
                .map(|l| {
                    (
                        self.alphabet.name(l).to_string(),
                        self.gen_map[l.index()].to_json(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(j: &GroupSpecJson) -> Result<Self> {
        let alphabet = Alphabet::from_json(&j.alphabet)?;
        match j.kind.as_str() {
            "free-abelian" => {
                let gens: Vec<(String, Vec<i64>)> = j
                    .generators
                    .iter()
                    .map(|(n, e)| (n.clone(), e.vec.clone()))
                    .collect();
                let gens_ref: Vec<(&str, Vec<i64>)> =
                    gens.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
                GroupSpec::free_abelian(alphabet, &gens_ref)
            }
            "monomial-extension" => {
                let rank = j
                    .rank
                    .ok_or_else(|| Error::InvalidGroup("monomial-extension needs rank".into()))?;
                let action = j
                    .action
                    .as_ref()
                    .ok_or_else(|| Error::InvalidGroup("monomial-extension needs action".into()))?
                    .iter()
                    .map(|p| SignedPerm(p.clone()))
                    .collect();
                let gens: Vec<(String, Vec<i64>, u32)> = j
                    .generators
                    .iter()
                    .map(|(n, e)| (n.clone(), e.vec.clone(), e.fin))
                    .collect();
                let gens_ref: Vec<(&str, Vec<i64>, u32)> = gens
                    .iter()
                    .map(|(n, v, f)| (n.as_str(), v.clone(), *f))
                    .collect();
                GroupSpec::monomial(alphabet, rank, action, &gens_ref)
            }
            "finite-table" => {
                let table = j
                    .table
                    .clone()
                    .ok_or_else(|| Error::InvalidGroup("finite-table needs table".into()))?;
                let gens: Vec<(String, u32)> = j
                    .generators
                    .iter()
                    .map(|(n, e)| (n.clone(), e.fin))
                    .collect();
                let gens_ref: Vec<(&str, u32)> =
                    gens.iter().map(|(n, f)| (n.as_str(), *f)).collect();
                GroupSpec::finite_table(alphabet, table, &gens_ref)
            }
            other => Err(Error::InvalidGroup(format!("unknown backend kind `{other}`"))),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: GroupSpecJson = serde_json::from_str(s)?;
        GroupSpec::from_json(&j)
    }
}

#[derive(Clone, Debug)]
pub struct BallEntry {
    pub length: u32,
    pub nf: Word,
}

/// BFS table of a Cayley ball: geodesic length and order-least geodesic
/// normal form for every element within the radius.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: u32,
    pub order: OrderKind,
    entries: HashMap<Element, BallEntry>,
    spheres: Vec<Vec<Element>>,
}

pub const DEFAULT_BALL_LIMIT: usize = 1_000_000;

impl Ball {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, g: &Element) -> Option<&BallEntry> {
        self.entries.get(g)
    }

    pub fn nf_of(&self, g: &Element) -> Result<&Word> {
        self.entries
            .get(g)
            .map(|e| &e.nf)
            .ok_or(Error::OutsideBall(self.radius))
    }

    pub fn geodesic_length(&self, g: &Element) -> Result<u32> {
        self.entries
            .get(g)
            .map(|e| e.length)
            .ok_or(Error::OutsideBall(self.radius))
    }

    /// Elements at distance exactly `n`, in canonical order.
    pub fn sphere(&self, n: usize) -> &[Element] {
        self.spheres.get(n).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// All elements within the ball, sorted by distance then key.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.spheres.iter().flatten()
    }
}

/// BFS by length; ties among candidate normal forms are broken by the full
/// word order, not by discovery order, so `nf` is the order-least geodesic.
pub fn build_ball(spec: &GroupSpec, radius: u32, order: OrderKind, limit: usize) -> Result<Ball> {
    let mut entries: HashMap<Element, BallEntry> = HashMap::new();
    let id = spec.identity();
    entries.insert(
        id.clone(),
        BallEntry {
            length: 0,
            nf: Word::empty(),
        },
    );
    let mut spheres: Vec<Vec<Element>> = vec![vec![id]];
    for n in 0..radius {
        let mut next: BTreeMap<Element, Word> = BTreeMap::new();
        for g in &spheres[n as usize] {
            let gnf = entries[g].nf.clone();
            for l in spec.alphabet.letters() {
                let h = spec.mul(g, spec.generator(l));
                if entries.contains_key(&h) {
                    continue;
                }
                let mut cand = gnf.clone();
                cand.push(l);
                match next.get(&h) {
                    Some(best)
                        if spec.alphabet.compare(best, &cand, order) != Ordering::Greater => {}
                    _ => {
                        next.insert(h, cand);
                    }
                }
            }
        }
        let mut sphere: Vec<Element> = Vec::with_capacity(next.len());
        for (h, nf) in next {
            entries.insert(h.clone(), BallEntry { length: n + 1, nf });
            sphere.push(h);
            if entries.len() > limit {
                return Err(Error::BallLimit(limit));
            }
        }
        spheres.push(sphere);
    }
    Ok(Ball {
        radius,
        order,
        entries,
        spheres,
    })
}

/// True iff `w` is a geodesic for the element it represents.
pub fn is_geodesic(spec: &GroupSpec, ball: &Ball, w: &Word) -> Result<bool> {
    let len = ball.geodesic_length(&spec.evaluate(w)?)?;
    Ok(w.len() as u32 == len)
}

/// `max_n d(ū(n), v̄(n))`, each distance looked up in the ball.
pub fn fellow_travel_distance(spec: &GroupSpec, ball: &Ball, u: &Word, v: &Word) -> Result<u32> {
    fellow_travel_within(spec, ball, u, v, u32::MAX)?.ok_or(Error::BallEscape(ball.radius))
}

/// Like [`fellow_travel_distance`] but returns `None` as soon as the
/// distance is known to exceed `cap`. A prefix difference outside the ball
/// certifies distance > radius, so with `radius ≥ cap` it also yields `None`.
pub fn fellow_travel_within(
    spec: &GroupSpec,
    ball: &Ball,
    u: &Word,
    v: &Word,
    cap: u32,
) -> Result<Option<u32>> {
    spec.alphabet.check_word(u)?;
    spec.alphabet.check_word(v)?;
    let mut gu = spec.identity();
    let mut gv = spec.identity();
    let mut max = 0u32;
    for n in 1..=u.len().max(v.len()) {
        if n <= u.len() {
            gu = spec.mul(&gu, spec.generator(u.letters()[n - 1]));
        }
        if n <= v.len() {
            gv = spec.mul(&gv, spec.generator(v.letters()[n - 1]));
        }
        let diff = spec.mul(&spec.inv(&gu), &gv);
        match ball.entry(&diff) {
            Some(e) => {
                max = max.max(e.length);
                if max > cap {
                    return Ok(None);
                }
            }
            None => {
                if cap < u32::MAX && ball.radius >= cap {
                    return Ok(None);
                }
                return Err(Error::BallEscape(ball.radius));
            }
        }
    }
    Ok(Some(max))
}

#[derive(Serialize, Deserialize)]
pub struct BallEntryJson {
    pub element: ElementJson,
    pub length: u32,
    pub nf: Vec<String>,
}

pub fn ball_to_json(spec: &GroupSpec, ball: &Ball) -> Vec<BallEntryJson> {
    ball.elements()
        .map(|g| {
            let e = ball.entry(g).expect("listed");
            BallEntryJson {
                element: g.to_json(),
                length: e.length,
                nf: spec.alphabet.word_to_names(&e.nf),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn z2xz2_presentation_holds() {
        let spec = builtin::z2xz2_spec();
        let a = &spec.alphabet;
        // b = tat; check [a,b] = 1, t² = 1, (tat)·b⁻¹ = 1
        let id = spec.identity();
        let comm = a.parse_word("atatATAT").unwrap();
        assert_eq!(spec.evaluate(&comm).unwrap(), id);
        assert_eq!(spec.evaluate(&a.parse_word("tt").unwrap()).unwrap(), id);
        let b = spec.evaluate(&a.parse_word("tat").unwrap()).unwrap();
        assert_eq!(spec.mul(&b, &spec.inv(&b)), id);
    }

    #[test]
    fn z2xz2_evaluate_examples() {
        let spec = builtin::z2xz2_spec();
        let a = &spec.alphabet;
        let b = spec.evaluate(&a.parse_word("tat").unwrap()).unwrap();
        assert_eq!(b.vec, vec![0, 1]);
        assert_eq!(b.fin, 0);
        assert_eq!(
            spec.evaluate(&a.parse_word("tt").unwrap()).unwrap(),
            spec.identity()
        );
        let ab = spec.evaluate(&a.parse_word("atat").unwrap()).unwrap();
        assert_eq!(ab.vec, vec![1, 1]);
        assert_eq!(ab.fin, 0);
    }

    #[test]
    fn ball_radius_one_counts() {
        let z2 = builtin::z2_spec();
        let ball = build_ball(&z2, 1, OrderKind::Shortlex, 1000).unwrap();
        assert_eq!(ball.len(), 5); // identity + 4 generators

        let s5 = builtin::z2xz2_spec();
        let ball = build_ball(&s5, 1, OrderKind::Shortlex, 1000).unwrap();
        assert_eq!(ball.len(), 4); // t and T collide
    }

    #[test]
    fn z2_srev_least_nf() {
        let z2 = builtin::z2_spec();
        let ball = build_ball(&z2, 3, OrderKind::Srev, 1000).unwrap();
        let g = Element {
            vec: vec![1, 1],
            fin: 0,
        };
        // brute force over both geodesics xy and yx: srev-least is yx
        let a = &z2.alphabet;
        let xy = a.parse_word("xy").unwrap();
        let yx = a.parse_word("yx").unwrap();
        assert_eq!(z2.evaluate(&xy).unwrap(), g);
        assert_eq!(z2.evaluate(&yx).unwrap(), g);
        assert_eq!(a.compare(&yx, &xy, OrderKind::Srev), Ordering::Less);
        assert_eq!(ball.nf_of(&g).unwrap(), &yx);
    }

    #[test]
    fn z2xz2_shortlex_nf_of_b() {
        let s5 = builtin::z2xz2_spec();
        let ball = build_ball(&s5, 4, OrderKind::Shortlex, 10000).unwrap();
        let b = s5.evaluate(&s5.alphabet.parse_word("tat").unwrap()).unwrap();
        assert_eq!(s5.alphabet.word_name(ball.nf_of(&b).unwrap()), "tat");
        let z2 = builtin::z2_spec();
        let zb = build_ball(&z2, 3, OrderKind::Shortlex, 1000).unwrap();
        let g = z2.evaluate(&z2.alphabet.parse_word("xx").unwrap()).unwrap();
        assert_eq!(z2.alphabet.word_name(zb.nf_of(&g).unwrap()), "xx");
        assert_eq!(zb.geodesic_length(&g).unwrap(), 2);
    }

    #[test]
    fn nf_prefix_closed() {
        for (spec, order) in [
            (builtin::z2_spec(), OrderKind::Srev),
            (builtin::z2xz2_spec(), OrderKind::Shortlex),
            (builtin::d_infinity_spec(), OrderKind::Shortlex),
        ] {
            let ball = build_ball(&spec, 5, order, 100000).unwrap();
            for g in ball.elements() {
                let nf = &ball.entry(g).expect("entry").nf;
                if nf.is_empty() {
                    continue;
                }
                let l = nf.last().unwrap();
                let parent = spec.mul(g, &spec.inv(spec.generator(l)));
                let pnf = ball.nf_of(&parent).unwrap();
                assert_eq!(&nf.prefix(nf.len() - 1), pnf);
            }
        }
    }

    #[test]
    fn bfs_length_equals_brute_force() {
        let spec = builtin::z2xz2_spec();
        let ball = build_ball(&spec, 4, OrderKind::Shortlex, 100000).unwrap();
        let mut best: HashMap<Element, u32> = HashMap::new();
        for w in spec.alphabet.words_up_to(4) {
            let g = spec.evaluate(&w).unwrap();
            let e = best.entry(g).or_insert(w.len() as u32);
            *e = (*e).min(w.len() as u32);
        }
        for (g, len) in best {
            assert_eq!(ball.geodesic_length(&g).unwrap(), len);
        }
    }

    #[test]
    fn evaluate_is_morphism() {
        let spec = builtin::d_infinity_spec();
        let a = &spec.alphabet;
        for u in a.words_up_to(3) {
            for v in a.words_up_to(3) {
                let uv = u.concat(&v);
                assert_eq!(
                    spec.evaluate(&uv).unwrap(),
                    spec.mul(&spec.evaluate(&u).unwrap(), &spec.evaluate(&v).unwrap())
                );
            }
        }
    }

    #[test]
    fn fellow_travel_examples() {
        let z2 = builtin::z2_spec();
        let ball = build_ball(&z2, 6, OrderKind::Srev, 100000).unwrap();
        let a = &z2.alphabet;
        let u = a.parse_word("xy").unwrap();
        assert_eq!(fellow_travel_distance(&z2, &ball, &u, &u).unwrap(), 0);
        assert_eq!(
            fellow_travel_distance(&z2, &ball, &a.parse_word("xX").unwrap(), &Word::empty())
                .unwrap(),
            1
        );
        // the three prefix differences of (yxY, x), by backend arithmetic
        assert_eq!(
            fellow_travel_distance(
                &z2,
                &ball,
                &a.parse_word("yxY").unwrap(),
                &a.parse_word("x").unwrap()
            )
            .unwrap(),
            2
        );
    }

    #[test]
    fn geodesic_checks() {
        let s5 = builtin::z2xz2_spec();
        let ball = build_ball(&s5, 4, OrderKind::Shortlex, 100000).unwrap();
        let a = &s5.alphabet;
        assert!(is_geodesic(&s5, &ball, &Word::empty()).unwrap());
        assert!(!is_geodesic(&s5, &ball, &a.parse_word("tT").unwrap()).unwrap());
        assert!(is_geodesic(&s5, &ball, &a.parse_word("ata").unwrap()).unwrap());
    }

    #[test]
    fn group_json_round_trip() {
        for spec in [
            builtin::z2_spec(),
            builtin::z2xz2_spec(),
            builtin::d_infinity_spec(),
        ] {
            let j = serde_json::to_string(&spec.to_json()).unwrap();
            let back = GroupSpec::from_json_str(&j).unwrap();
            for w in spec.alphabet.words_up_to(3) {
                assert_eq!(spec.evaluate(&w).unwrap(), back.evaluate(&w).unwrap());
            }
        }
    }

    #[test]
    fn ball_limit_guard() {
        let z2 = builtin::z2_spec();
        assert!(matches!(
            build_ball(&z2, 10, OrderKind::Srev, 10),
            Err(Error::BallLimit(10))
        ));
    }
}
