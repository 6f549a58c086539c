//! Quotients of the free algebra by constant-valued commutation and
//! anticommutation relations, computed by normal ordering.
//!
//! A [`RelationSet`] attaches to each governed pair of generators either
//! `g_i g_j - g_j g_i = c_ij` (CCR) or `g_i g_j + g_j g_i = d_ij` (CAR). Words
//! are rewritten by adjacent exchanges until they are sorted with respect to
//! a [`GeneratorOrder`]; every exchange emits the relation constant times
//! the word with the pair removed. Fermionic squares contract to `d_ii / 2`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebra::{Element, Generator, Scalar, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewriteError {
    #[error("generator index must be at least 1")]
    ZeroGenerator,
    #[error("pair (g{i}, g{j}) is declared twice with different data")]
    Duplicate { i: u32, j: u32 },
    #[error("a commutator [g{i}, g{i}] must vanish")]
    SelfCommutator { i: u32 },
    #[error("nonzero commutator between g{i} and fermionic g{j} makes the rewrite system inconsistent")]
    MixedConstant { i: u32, j: u32 },
    #[error("generator g{index} is not classified by the ladder specification")]
    Unclassified { index: u32 },
    #[error("generator g{index} appears twice in the ladder pairing")]
    LadderNotBijective { index: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    /// `g_i g_j - g_j g_i = c`
    Ccr,
    /// `g_i g_j + g_j g_i = d`
    Car,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relation {
    pub i: Generator,
    pub j: Generator,
    pub kind: RelationKind,
    pub constant: Scalar,
}

impl Relation {
    pub fn ccr(i: u32, j: u32, constant: Scalar) -> Result<Self, RewriteError> {
        Relation::new(i, j, RelationKind::Ccr, constant)
    }

    pub fn car(i: u32, j: u32, constant: Scalar) -> Result<Self, RewriteError> {
        Relation::new(i, j, RelationKind::Car, constant)
    }

    pub fn new(i: u32, j: u32, kind: RelationKind, constant: Scalar) -> Result<Self, RewriteError> {
        let gi = Generator::new(i).map_err(|_| RewriteError::ZeroGenerator)?;
        let gj = Generator::new(j).map_err(|_| RewriteError::ZeroGenerator)?;
        Ok(Relation {
            i: gi,
            j: gj,
            kind,
            constant,
        })
    }
}

/// How `x y` is rewritten into `y x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exchange {
    /// No relation; the letters never pass each other.
    Free,
    /// `x y = y x + c`
    Commute(Scalar),
    /// `x y = -y x + d`
    Anticommute(Scalar),
}

/// Constant-valued CCR/CAR relations on a set of governed generators.
///
/// A generator is governed when it occurs in some relation and fermionic
/// when it occurs in some CAR. Undeclared pairs of governed generators
/// anticommute to zero when both are fermionic and commute to zero
/// otherwise; pairs involving an ungoverned generator are free.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelationSet {
    pairs: BTreeMap<(Generator, Generator), (RelationKind, Scalar)>,
    governed: BTreeSet<Generator>,
    fermions: BTreeSet<Generator>,
}

impl RelationSet {
    pub fn new(relations: impl IntoIterator<Item = Relation>) -> Result<Self, RewriteError> {
        let mut pairs: BTreeMap<(Generator, Generator), (RelationKind, Scalar)> = BTreeMap::new();
        for rel in relations {
            let (lo, hi, constant) = match rel.kind {
                RelationKind::Ccr if rel.i == rel.j => {
                    if rel.constant.norm() > 0.0 {
                        return Err(RewriteError::SelfCommutator { i: rel.i.index() });
                    }
                    (rel.i, rel.j, rel.constant)
                }
                RelationKind::Ccr if rel.i > rel.j => (rel.j, rel.i, -rel.constant),
                _ if rel.i > rel.j => (rel.j, rel.i, rel.constant),
                _ => (rel.i, rel.j, rel.constant),
            };
            match pairs.get(&(lo, hi)) {
                Some(&(kind, c)) if kind != rel.kind || c != constant => {
                    return Err(RewriteError::Duplicate {
                        i: lo.index(),
                        j: hi.index(),
                    })
                }
                _ => {
                    pairs.insert((lo, hi), (rel.kind, constant));
                }
            }
        }
        let mut governed = BTreeSet::new();
        let mut fermions = BTreeSet::new();
        for (&(a, b), &(kind, _)) in &pairs {
            governed.insert(a);
            governed.insert(b);
            if kind == RelationKind::Car {
                fermions.insert(a);
                fermions.insert(b);
            }
        }
        for (&(a, b), &(kind, c)) in &pairs {
            if kind == RelationKind::Ccr && c.norm() > 0.0 {
                if let Some(f) = [a, b].into_iter().find(|g| fermions.contains(g)) {
                    let other = if f == a { b } else { a };
                    return Err(RewriteError::MixedConstant {
                        i: other.index(),
                        j: f.index(),
                    });
                }
            }
        }
        Ok(RelationSet {
            pairs,
            governed,
            fermions,
        })
    }

    pub fn is_governed(&self, g: Generator) -> bool {
        self.governed.contains(&g)
    }

    pub fn is_fermionic(&self, g: Generator) -> bool {
        self.fermions.contains(&g)
    }

    pub fn governed(&self) -> impl Iterator<Item = Generator> + '_ {
        self.governed.iter().copied()
    }

    /// Declared relations, each pair once with `i <= j`.
    pub fn relations(&self) -> impl Iterator<Item = Relation> + '_ {
        self.pairs.iter().map(|(&(i, j), &(kind, constant))| Relation {
            i,
            j,
            kind,
            constant,
        })
    }

    /// Exchange rule for the ordered pair `x y`.
    pub fn exchange(&self, x: Generator, y: Generator) -> Exchange {
        if !self.is_governed(x) || !self.is_governed(y) {
            return Exchange::Free;
        }
        let key = if x <= y { (x, y) } else { (y, x) };
        match self.pairs.get(&key) {
            Some(&(RelationKind::Ccr, c)) => Exchange::Commute(if x <= y { c } else { -c }),
            Some(&(RelationKind::Car, d)) => Exchange::Anticommute(d),
            None if self.is_fermionic(x) && self.is_fermionic(y) => Exchange::Anticommute(Scalar::new(0.0, 0.0)),
            None => Exchange::Commute(Scalar::new(0.0, 0.0)),
        }
    }

    /// `(g_i g_j - g_j g_i)` or `(g_i g_j + g_j g_i)` constant for a pair,
    /// with the declared kind.
    pub fn constant(&self, i: Generator, j: Generator) -> Option<(RelationKind, Scalar)> {
        match self.exchange(i, j) {
            Exchange::Free => None,
            Exchange::Commute(c) => Some((RelationKind::Ccr, c)),
            Exchange::Anticommute(d) => Some((RelationKind::Car, d)),
        }
    }

    pub fn to_document(&self) -> RelationDocument {
        RelationDocument {
            pairs: self
                .relations()
                .map(|r| RelationEntry {
                    i: r.i.index(),
                    j: r.j.index(),
                    kind: r.kind,
                    constant: [r.constant.re, r.constant.im],
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &RelationDocument) -> Result<Self, RewriteError> {
        RelationSet::new(
            doc.pairs
                .iter()
                .map(|e| Relation::new(e.i, e.j, e.kind, Scalar::new(e.constant[0], e.constant[1])))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }
}

/// JSON form: `{pairs: [{i, j, kind: "ccr"|"car", constant: [re, im]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDocument {
    pub pairs: Vec<RelationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationEntry {
    pub i: u32,
    pub j: u32,
    pub kind: RelationKind,
    pub constant: [f64; 2],
}

/// Total order on generators used by normal ordering. Listed generators come
/// first in list order, the rest follow by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratorOrder {
    listed: HashMap<Generator, usize>,
}

impl GeneratorOrder {
    /// Order by index.
    pub fn natural() -> Self {
        GeneratorOrder::default()
    }

    pub fn from_sequence(sequence: &[Generator]) -> Self {
        let mut listed = HashMap::new();
        for (k, &g) in sequence.iter().enumerate() {
            listed.entry(g).or_insert(k);
        }
        GeneratorOrder { listed }
    }

    fn rank(&self, g: Generator) -> (u8, usize) {
        match self.listed.get(&g) {
            Some(&k) => (0, k),
            None => (1, g.position()),
        }
    }

    pub fn less(&self, a: Generator, b: Generator) -> bool {
        self.rank(a) < self.rank(b)
    }
}

/// Which reducible position a rewrite pass picks first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RewriteStats {
    /// Exchanges and contractions performed in total.
    pub total_steps: usize,
    /// Longest chain of steps applied to a single word and its in-place
    /// successors; each emitted shorter word starts a new chain.
    pub max_chain_steps: usize,
    /// Length of the longest input word.
    pub max_input_len: usize,
}

/// Normal form of `a` modulo `relations`: every word sorted nondecreasing
/// under `order`, free pairs left in place.
pub fn normal_order(a: &Element, relations: &RelationSet, order: &GeneratorOrder) -> Element {
    normal_order_with(a, relations, order, Strategy::Leftmost).0
}

pub fn normal_order_with(
    a: &Element,
    relations: &RelationSet,
    order: &GeneratorOrder,
    strategy: Strategy,
) -> (Element, RewriteStats) {
    let mut stats = RewriteStats::default();
    let mut work: Vec<(Vec<Generator>, Scalar, usize)> = Vec::new();
    for (w, c) in a.terms() {
        stats.max_input_len = stats.max_input_len.max(w.len());
        work.push((w.letters().to_vec(), *c, 0));
    }
    let mut out = Element::zero();
    let zero = Scalar::new(0.0, 0.0);
    while let Some((mut letters, coeff, chain)) = work.pop() {
        stats.max_chain_steps = stats.max_chain_steps.max(chain);
        let Some((k, rule)) = reducible(&letters, relations, order, strategy) else {
            out.add_term(Word::new(letters), coeff);
            continue;
        };
        stats.total_steps += 1;
        let (x, y) = (letters[k], letters[k + 1]);
        if x == y {
            // fermionic square: x x = d / 2
            let Exchange::Anticommute(d) = rule else {
                unreachable!("only fermionic squares are reducible")
            };
            letters.drain(k..k + 2);
            work.push((letters, coeff * d * 0.5, chain + 1));
            continue;
        }
        let (sign, constant) = match rule {
            Exchange::Commute(c) => (1.0, c),
            Exchange::Anticommute(d) => (-1.0, d),
            Exchange::Free => unreachable!("free pairs are never reducible"),
        };
        if constant != zero {
            let mut shorter = letters.clone();
            shorter.drain(k..k + 2);
            work.push((shorter, coeff * constant, 0));
        }
        letters.swap(k, k + 1);
        work.push((letters, coeff * sign, chain + 1));
    }
    out.prune();
    (out, stats)
}

fn reducible(
    letters: &[Generator],
    relations: &RelationSet,
    order: &GeneratorOrder,
    strategy: Strategy,
) -> Option<(usize, Exchange)> {
    let check = |k: usize| {
        let (x, y) = (letters[k], letters[k + 1]);
        let rule = relations.exchange(x, y);
        match rule {
            Exchange::Free => None,
            Exchange::Anticommute(_) if x == y => Some((k, rule)),
            _ if order.less(y, x) => Some((k, rule)),
            _ => None,
        }
    };
    let n = letters.len().saturating_sub(1);
    match strategy {
        Strategy::Leftmost => (0..n).find_map(check),
        Strategy::Rightmost => (0..n).rev().find_map(check),
    }
}

/// Creation/annihilation roles of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    /// `(annihilator, creator)` pairs.
    pairs: Vec<(Generator, Generator)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderRole {
    Annihilation,
    Creation,
}

impl LadderSpec {
    pub fn new(pairs: Vec<(Generator, Generator)>) -> Result<Self, RewriteError> {
        let mut seen = BTreeSet::new();
        for &(a, c) in &pairs {
            for g in [a, c] {
                if !seen.insert(g) {
                    return Err(RewriteError::LadderNotBijective { index: g.index() });
                }
            }
        }
        Ok(LadderSpec { pairs })
    }

    /// Layout `(a_1, a_1*, a_2, a_2*, ...)`: mode `k` has annihilator
    /// `g_{2k-1}` and creator `g_{2k}`.
    pub fn interleaved(modes: usize) -> Self {
        LadderSpec {
            pairs: (0..modes)
                .map(|k| (Generator::from_position(2 * k), Generator::from_position(2 * k + 1)))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(Generator, Generator)] {
        &self.pairs
    }

    pub fn role(&self, g: Generator) -> Option<LadderRole> {
        self.pairs.iter().find_map(|&(a, c)| {
            if g == a {
                Some(LadderRole::Annihilation)
            } else if g == c {
                Some(LadderRole::Creation)
            } else {
                None
            }
        })
    }

    /// Creators first, annihilators last, each in pairing order.
    pub fn order(&self) -> GeneratorOrder {
        let seq: Vec<Generator> = self
            .pairs
            .iter()
            .map(|p| p.1)
            .chain(self.pairs.iter().map(|p| p.0))
            .collect();
        GeneratorOrder::from_sequence(&seq)
    }
}

/// Ladder algebra on `modes` modes in the interleaved layout: bosons with
/// `[a_k, a_k*] = 1`, all other pairs commuting.
pub fn bosonic_ladder(modes: usize) -> (RelationSet, LadderSpec) {
    mixed_ladder(modes, 0)
}

/// Fermionic ladder algebra: `{c_k, c_k*} = 1`, all other anticommutators 0.
pub fn fermionic_ladder(modes: usize) -> (RelationSet, LadderSpec) {
    mixed_ladder(0, modes)
}

/// Boson modes first, then fermion modes, interleaved layout throughout.
/// Bosons commute with fermions.
pub fn mixed_ladder(bosons: usize, fermions: usize) -> (RelationSet, LadderSpec) {
    let n = 2 * (bosons + fermions) as u32;
    let is_fermion = |g: u32| g > 2 * bosons as u32;
    let one = Scalar::new(1.0, 0.0);
    let zero = Scalar::new(0.0, 0.0);
    let mut rels = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            let partners = i % 2 == 1 && j == i + 1;
            let rel = match (is_fermion(i), is_fermion(j)) {
                (true, true) => Relation::car(i, j, if partners { one } else { zero }),
                (false, false) if i != j => Relation::ccr(i, j, if partners { one } else { zero }),
                (false, false) => continue,
                _ => Relation::ccr(i, j, zero),
            };
            rels.push(rel.expect("indices start at 1"));
        }
    }
    let relations = RelationSet::new(rels).expect("ladder relations are consistent");
    (relations, LadderSpec::interleaved(bosons + fermions))
}

/// Vacuum expectation: normal order with creators left of annihilators and
/// read off the unit coefficient.
pub fn vacuum_expectation(a: &Element, relations: &RelationSet, ladder: &LadderSpec) -> Result<Scalar, RewriteError> {
    for (w, _) in a.terms() {
        for &g in w.letters() {
            if ladder.role(g).is_none() || !relations.is_governed(g) {
                return Err(RewriteError::Unclassified { index: g.index() });
            }
        }
    }
    Ok(normal_order(a, relations, &ladder.order()).constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn w(ix: &[u32]) -> Element {
        Element::word(Word::from_indices(ix).unwrap())
    }

    #[test]
    fn ccr_exchange_emits_constant() {
        // [q, p] = i with q = g1, p = g2
        let r = RelationSet::new([Relation::ccr(1, 2, c(0.0, 1.0)).unwrap()]).unwrap();
        let got = normal_order(&w(&[2, 1]), &r, &GeneratorOrder::natural());
        assert_eq!(got, w(&[1, 2]) - Element::scalar(c(0.0, 1.0)));
    }

    #[test]
    fn ordered_word_is_fixed() {
        let r = RelationSet::new([Relation::ccr(1, 2, c(0.0, 1.0)).unwrap()]).unwrap();
        let a = w(&[1, 1, 2, 2]);
        assert_eq!(normal_order(&a, &r, &GeneratorOrder::natural()), a);
    }

    #[test]
    fn fermionic_square_vanishes() {
        let r = RelationSet::new([
            Relation::car(1, 1, c(0.0, 0.0)).unwrap(),
            Relation::car(1, 2, c(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        assert!(normal_order(&w(&[1, 1]), &r, &GeneratorOrder::natural()).is_zero());
    }

    #[test]
    fn fermionic_square_with_constant() {
        let r = RelationSet::new([Relation::car(1, 1, c(3.0, 0.0)).unwrap()]).unwrap();
        assert_eq!(
            normal_order(&w(&[1, 1, 1]), &r, &GeneratorOrder::natural()),
            Element::g(1).scale(c(1.5, 0.0))
        );
    }

    #[test]
    fn reversed_declaration_flips_commutator_sign() {
        let a = RelationSet::new([Relation::ccr(2, 1, c(0.0, -1.0)).unwrap()]).unwrap();
        let b = RelationSet::new([Relation::ccr(1, 2, c(0.0, 1.0)).unwrap()]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_relation_sets() {
        assert_eq!(
            RelationSet::new([Relation::ccr(1, 1, c(1.0, 0.0)).unwrap()]),
            Err(RewriteError::SelfCommutator { i: 1 })
        );
        assert!(matches!(
            RelationSet::new([
                Relation::ccr(1, 2, c(1.0, 0.0)).unwrap(),
                Relation::car(1, 2, c(1.0, 0.0)).unwrap(),
            ]),
            Err(RewriteError::Duplicate { .. })
        ));
        assert_eq!(
            RelationSet::new([
                Relation::car(2, 2, c(0.0, 0.0)).unwrap(),
                Relation::ccr(1, 2, c(1.0, 0.0)).unwrap(),
            ]),
            Err(RewriteError::MixedConstant { i: 1, j: 2 })
        );
        assert_eq!(Relation::ccr(0, 1, c(0.0, 0.0)), Err(RewriteError::ZeroGenerator));
    }

    #[test]
    fn ungoverned_generators_block_exchanges() {
        let r = RelationSet::new([Relation::ccr(1, 2, c(1.0, 0.0)).unwrap()]).unwrap();
        // g3 is free: the segments on either side are ordered independently
        let got = normal_order(&w(&[2, 1, 3, 2, 1]), &r, &GeneratorOrder::natural());
        let seg = w(&[1, 2]) - Element::unit();
        let expected = &(&seg * &Element::g(3)) * &seg;
        assert_eq!(got, expected);
    }

    #[test]
    fn vacuum_expectations() {
        let (r, l) = bosonic_ladder(1);
        assert_eq!(vacuum_expectation(&w(&[1, 2]), &r, &l).unwrap(), c(1.0, 0.0));
        assert_eq!(vacuum_expectation(&w(&[2, 1]), &r, &l).unwrap(), c(0.0, 0.0));
        // (a + a*)^4 / 4 = 3/4
        let field = Element::g(1) + Element::g(2);
        let fourth = &(&field * &field) * &(&field * &field);
        let v = vacuum_expectation(&fourth.scale(c(0.25, 0.0)), &r, &l).unwrap();
        assert!((v - c(0.75, 0.0)).norm() < 1e-14);
        assert_eq!(
            vacuum_expectation(&Element::g(3), &r, &l),
            Err(RewriteError::Unclassified { index: 3 })
        );
    }

    #[test]
    fn fermionic_vacuum() {
        let (r, l) = fermionic_ladder(1);
        assert_eq!(vacuum_expectation(&w(&[1, 2, 1, 2]), &r, &l).unwrap(), c(1.0, 0.0));
        assert_eq!(vacuum_expectation(&w(&[2, 2]), &r, &l).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn ladder_must_be_bijective() {
        let g = |i| Generator::new(i).unwrap();
        assert_eq!(
            LadderSpec::new(vec![(g(1), g(2)), (g(2), g(3))]),
            Err(RewriteError::LadderNotBijective { index: 2 })
        );
    }

    #[test]
    fn document_round_trip() {
        let (r, _) = mixed_ladder(1, 1);
        let json = serde_json::to_string(&r.to_document()).unwrap();
        let back = RelationSet::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<RelationDocument>(r#"{"pairs":[],"x":1}"#).is_err());
    }
}
