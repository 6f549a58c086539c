//! Generator catalogs: the finite CCR/CAR systems of lattice models and the
//! truncated string-oscillator families.

use serde::{Deserialize, Serialize};

use crate::algebra::{Conjugation, Element, Generator, Scalar};
use crate::qmap::{combine_qmaps, GeneratorMap};
use crate::rewrite::{normal_order, GeneratorOrder, Relation, RelationKind, RelationSet, RewriteError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("need at least one degree of freedom (m + n >= 1)")]
    Empty,
    #[error("string catalogs exist for k = 4 or k = 6, got {0}")]
    UnsupportedFamilyCount(u32),
    #[error("mode cutoff and dimension count must be at least 1")]
    Truncation,
    #[error("relation between {a} and {b} is not central")]
    NotCentral { a: String, b: String },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// A generator catalog: named generators, their images in a target algebra,
/// and the constant relations they satisfy there.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    /// Human-readable name of generator `k + 1`.
    pub labels: Vec<String>,
    pub relations: RelationSet,
    /// Images of the catalog generators in the target algebra.
    pub map: GeneratorMap,
    pub target_labels: Vec<String>,
    pub target_relations: RelationSet,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn generator_document(&self) -> GeneratorDocument {
        GeneratorDocument {
            generators: self
                .labels
                .iter()
                .enumerate()
                .map(|(k, name)| GeneratorEntry {
                    index: k as u32 + 1,
                    name: name.clone(),
                    image: self.map.images()[k].to_string(),
                })
                .collect(),
            target_generators: self.target_labels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDocument {
    pub generators: Vec<GeneratorEntry>,
    pub target_generators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub index: u32,
    pub name: String,
    pub image: String,
}

/// `m` bosonic pairs `(q_a, p_a)` and `n` fermionic pairs `(q~_c, p~_c)`,
/// enumerated `[q_1..q_m, p_1..p_m, q~_1..q~_n, p~_1..p~_n]`, with
///
/// ```text
/// [q_a, p_b] = i d_ab      [q_a, q_b] = [p_a, p_b] = 0
/// {q~_c, p~_d} = i d_cd    {q~_c, q~_d} = {p~_c, p~_d} = 0
/// ```
///
/// and bosons commuting with fermions. The generator map is the identity:
/// the catalog algebra is a quotient of the free algebra on `2m + 2n`
/// generators.
pub fn catalog_phi6(m: usize, n: usize) -> Result<Catalog, CatalogError> {
    if m + n == 0 {
        return Err(CatalogError::Empty);
    }
    let mut labels = Vec::with_capacity(2 * (m + n));
    labels.extend((1..=m).map(|a| format!("q{a}")));
    labels.extend((1..=m).map(|a| format!("p{a}")));
    labels.extend((1..=n).map(|c| format!("q~{c}")));
    labels.extend((1..=n).map(|c| format!("p~{c}")));

    let total = 2 * (m + n) as u32;
    let bosons = 2 * m as u32;
    let i_unit = Scalar::new(0.0, 1.0);
    let zero = Scalar::new(0.0, 0.0);
    let mut rels = Vec::new();
    for i in 1..=total {
        for j in i..=total {
            let (fi, fj) = (i > bosons, j > bosons);
            let rel = match (fi, fj) {
                (false, false) if i == j => continue,
                (false, false) => {
                    let conj = j == i + m as u32 && i <= m as u32;
                    Relation::ccr(i, j, if conj { i_unit } else { zero })?
                }
                (true, true) => {
                    let conj = j == i + n as u32 && i <= bosons + n as u32;
                    Relation::car(i, j, if conj { i_unit } else { zero })?
                }
                _ => Relation::ccr(i, j, zero)?,
            };
            rels.push(rel);
        }
    }
    let relations = RelationSet::new(rels)?;
    Ok(Catalog {
        map: GeneratorMap::identity(labels.len(), Conjugation::Coordinate),
        target_labels: labels.clone(),
        target_relations: relations.clone(),
        labels,
        relations,
    })
}

/// Which oscillator families enter a string catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringFamilies {
    /// `x, p, x~, p~`
    Bosonic,
    /// `x, p, x~, p~` plus the fermionic pair `psi_x, psi_p`.
    WithFermions,
}

impl StringFamilies {
    pub fn from_k(k: u32) -> Result<Self, CatalogError> {
        match k {
            4 => Ok(StringFamilies::Bosonic),
            6 => Ok(StringFamilies::WithFermions),
            other => Err(CatalogError::UnsupportedFamilyCount(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LadderKind {
    /// Self-adjoint zero-mode generator.
    Hermitian,
    /// `a_n`, paired with the next entry `a_{-n}`.
    Lowering,
    Raising,
}

/// The oscillator algebra the catalog generators are built from.
struct OscillatorAlgebra {
    labels: Vec<String>,
    kinds: Vec<LadderKind>,
    fermionic: Vec<bool>,
    relations: Vec<Relation>,
}

impl OscillatorAlgebra {
    fn new() -> Self {
        OscillatorAlgebra {
            labels: Vec::new(),
            kinds: Vec::new(),
            fermionic: Vec::new(),
            relations: Vec::new(),
        }
    }

    fn push(&mut self, label: String, kind: LadderKind, fermionic: bool) -> u32 {
        self.labels.push(label);
        self.kinds.push(kind);
        self.fermionic.push(fermionic);
        self.labels.len() as u32
    }

    /// `a_n`, `a_{-n}` with `[a_n, a_{-n}] = 1` (bosons) or
    /// `{psi_r, psi_{-r}} = 1` (fermions).
    fn ladder_pair(&mut self, lower: String, raise: String, fermionic: bool) -> (u32, u32) {
        let a = self.push(lower, LadderKind::Lowering, fermionic);
        let b = self.push(raise, LadderKind::Raising, fermionic);
        let one = Scalar::new(1.0, 0.0);
        let kind = if fermionic { RelationKind::Car } else { RelationKind::Ccr };
        self.relations
            .push(Relation::new(a, b, kind, one).expect("indices start at 1"));
        (a, b)
    }

    /// Completes the relation table: every undeclared pair commutes or
    /// anticommutes to zero, fermionic squares included.
    fn finish(mut self) -> (Vec<String>, RelationSet, Conjugation) {
        let n = self.labels.len() as u32;
        let declared: std::collections::BTreeSet<(u32, u32)> = self
            .relations
            .iter()
            .map(|r| (r.i.index().min(r.j.index()), r.i.index().max(r.j.index())))
            .collect();
        let zero = Scalar::new(0.0, 0.0);
        for i in 1..=n {
            for j in i..=n {
                if declared.contains(&(i, j)) {
                    continue;
                }
                let (fi, fj) = (self.fermionic[i as usize - 1], self.fermionic[j as usize - 1]);
                let rel = match (fi, fj) {
                    (true, true) => Relation::car(i, j, zero),
                    (false, false) if i == j => continue,
                    _ => Relation::ccr(i, j, zero),
                };
                self.relations.push(rel.expect("indices start at 1"));
            }
        }
        let relations = RelationSet::new(self.relations).expect("oscillator relations are consistent");
        let mut k = nalgebra::DMatrix::<Scalar>::zeros(n as usize, n as usize);
        for (p, kind) in self.kinds.iter().enumerate() {
            let partner = match kind {
                LadderKind::Hermitian => p,
                LadderKind::Lowering => p + 1,
                LadderKind::Raising => p - 1,
            };
            k[(partner, p)] = Scalar::new(1.0, 0.0);
        }
        (self.labels, relations, Conjugation::Matrix(k))
    }
}

/// Self-adjoint combinations `x_n = (a_n + a_{-n}) / 2` and
/// `p_n = i (a_n - a_{-n}) / 2` of a ladder pair.
fn position_momentum(a: u32, b: u32) -> (Element, Element) {
    let (ea, eb) = (Element::g(a), Element::g(b));
    let half = Scalar::new(0.5, 0.0);
    let x = (&ea + &eb).scale(half);
    let p = (&ea - &eb).scale(Scalar::new(0.0, 0.5));
    (x, p)
}

/// Finite truncation of the string oscillator algebra: modes `|n| <=
/// mode_cutoff`, spacetime indices `mu < dims`.
///
/// Catalog generators are, family by family, `x^mu_n`, `p^mu_n` (with the
/// zero modes `x^mu_0`, `p^mu_0`, `[x_0, p_0] = i`), `x~^mu_n`, `p~^mu_n`
/// and for `k = 6` the fermionic `psi_x^mu_r`, `psi_p^mu_r` over
/// `r = 1/2, 1, ..., mode_cutoff` (plus the self-adjoint `psi^mu_0` as
/// `psi_x^mu_0`). Their images are the self-adjoint combinations of ladder
/// operators normalized by `[a_m, a_{-n}] = d_mn` and
/// `{psi_r, psi_{-s}} = d_rs`; the catalog relations are computed by normal
/// ordering those images.
pub fn catalog_phi7(k: u32, mode_cutoff: usize, dims: usize) -> Result<Catalog, CatalogError> {
    let families = StringFamilies::from_k(k)?;
    if mode_cutoff == 0 || dims == 0 {
        return Err(CatalogError::Truncation);
    }
    let mut osc = OscillatorAlgebra::new();
    // catalog family blocks: (label prefix, images)
    let mut blocks: Vec<Vec<(String, Element)>> = Vec::new();

    let mut x = Vec::new();
    let mut p = Vec::new();
    for mu in 0..dims {
        let x0 = osc.push(format!("X^{mu}_0"), LadderKind::Hermitian, false);
        let p0 = osc.push(format!("P^{mu}_0"), LadderKind::Hermitian, false);
        osc.relations
            .push(Relation::ccr(x0, p0, Scalar::new(0.0, 1.0)).expect("indices start at 1"));
        x.push((format!("x^{mu}_0"), Element::g(x0)));
        p.push((format!("p^{mu}_0"), Element::g(p0)));
        for n in 1..=mode_cutoff {
            let (a, b) = osc.ladder_pair(format!("a^{mu}_{n}"), format!("a^{mu}_-{n}"), false);
            let (xi, pi) = position_momentum(a, b);
            x.push((format!("x^{mu}_{n}"), xi));
            p.push((format!("p^{mu}_{n}"), pi));
        }
    }
    blocks.push(x);
    blocks.push(p);

    let mut xt = Vec::new();
    let mut pt = Vec::new();
    for mu in 0..dims {
        for n in 1..=mode_cutoff {
            let (a, b) = osc.ladder_pair(format!("a~^{mu}_{n}"), format!("a~^{mu}_-{n}"), false);
            let (xi, pi) = position_momentum(a, b);
            xt.push((format!("x~^{mu}_{n}"), xi));
            pt.push((format!("p~^{mu}_{n}"), pi));
        }
    }
    blocks.push(xt);
    blocks.push(pt);

    if families == StringFamilies::WithFermions {
        let mut fx = Vec::new();
        let mut fp = Vec::new();
        for mu in 0..dims {
            let z = osc.push(format!("psi^{mu}_0"), LadderKind::Hermitian, true);
            osc.relations
                .push(Relation::car(z, z, Scalar::new(1.0, 0.0)).expect("indices start at 1"));
            fx.push((format!("psi_x^{mu}_0"), Element::g(z)));
            for half_units in 1..=2 * mode_cutoff {
                let r = mode_label(half_units);
                let (a, b) = osc.ladder_pair(format!("psi^{mu}_{r}"), format!("psi^{mu}_-{r}"), true);
                let (xi, pi) = position_momentum(a, b);
                fx.push((format!("psi_x^{mu}_{r}"), xi));
                fp.push((format!("psi_p^{mu}_{r}"), pi));
            }
        }
        blocks.push(fx);
        blocks.push(fp);
    }

    let (target_labels, target_relations, target_conjugation) = osc.finish();
    let maps: Vec<GeneratorMap> = blocks
        .iter()
        .map(|b| {
            GeneratorMap::new(
                b.iter().map(|(_, e)| e.clone()).collect(),
                Conjugation::Coordinate,
                target_conjugation.clone(),
            )
        })
        .collect();
    let map = combine_qmaps(&maps).expect("all families share the oscillator conjugation");
    let labels: Vec<String> = blocks.into_iter().flatten().map(|(l, _)| l).collect();
    let fermionic: Vec<bool> = map
        .images()
        .iter()
        .map(|img| {
            img.terms()
                .flat_map(|(w, _)| w.letters().to_vec())
                .any(|g| target_relations.is_fermionic(g))
        })
        .collect();

    let order = GeneratorOrder::natural();
    let mut rels = Vec::new();
    for i in 0..labels.len() {
        for j in i..labels.len() {
            let (a, b) = (&map.images()[i], &map.images()[j]);
            let both_fermionic = fermionic[i] && fermionic[j];
            if i == j && !both_fermionic {
                continue;
            }
            let bracket = if both_fermionic { a * b + b * a } else { a * b - b * a };
            let reduced = normal_order(&bracket, &target_relations, &order);
            if reduced.degree() > 0 {
                return Err(CatalogError::NotCentral {
                    a: labels[i].clone(),
                    b: labels[j].clone(),
                });
            }
            let kind = if both_fermionic { RelationKind::Car } else { RelationKind::Ccr };
            rels.push(Relation::new(i as u32 + 1, j as u32 + 1, kind, reduced.constant_term())?);
        }
    }
    Ok(Catalog {
        labels,
        relations: RelationSet::new(rels)?,
        map,
        target_labels,
        target_relations,
    })
}

fn mode_label(half_units: usize) -> String {
    if half_units.is_multiple_of(2) {
        (half_units / 2).to_string()
    } else {
        format!("{half_units}/2")
    }
}

/// Index of the catalog generator with the given label.
pub fn find_label(catalog: &Catalog, label: &str) -> Option<Generator> {
    catalog
        .labels
        .iter()
        .position(|l| l == label)
        .map(|p| Generator::new(p as u32 + 1).expect("positions start at 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::RelationKind::{Car, Ccr};

    fn gen(i: u32) -> Generator {
        Generator::new(i).unwrap()
    }

    fn i_unit() -> Scalar {
        Scalar::new(0.0, 1.0)
    }

    #[test]
    fn phi6_single_boson() {
        let cat = catalog_phi6(1, 0).unwrap();
        assert_eq!(cat.labels, vec!["q1", "p1"]);
        let rels: Vec<_> = cat.relations.relations().collect();
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].kind, Ccr);
        assert_eq!(rels[0].constant, i_unit());
    }

    #[test]
    fn phi6_single_fermion() {
        let cat = catalog_phi6(0, 1).unwrap();
        let r = &cat.relations;
        assert_eq!(r.constant(gen(1), gen(2)), Some((Car, i_unit())));
        assert_eq!(r.constant(gen(1), gen(1)), Some((Car, Scalar::new(0.0, 0.0))));
        assert_eq!(r.constant(gen(2), gen(2)), Some((Car, Scalar::new(0.0, 0.0))));
    }

    #[test]
    fn phi6_two_bosons() {
        let cat = catalog_phi6(2, 0).unwrap();
        let r = &cat.relations;
        let zero = Scalar::new(0.0, 0.0);
        assert_eq!(r.constant(gen(1), gen(2)), Some((Ccr, zero)));
        assert_eq!(r.constant(gen(3), gen(4)), Some((Ccr, zero)));
        assert_eq!(r.constant(gen(1), gen(3)), Some((Ccr, i_unit())));
        assert_eq!(r.constant(gen(2), gen(4)), Some((Ccr, i_unit())));
        assert_eq!(r.constant(gen(1), gen(4)), Some((Ccr, zero)));
        assert_eq!(r.constant(gen(3), gen(1)), Some((Ccr, -i_unit())));
    }

    #[test]
    fn phi6_mixed_and_empty() {
        let cat = catalog_phi6(1, 1).unwrap();
        assert_eq!(cat.labels, vec!["q1", "p1", "q~1", "p~1"]);
        assert!(cat.relations.is_fermionic(gen(3)));
        assert!(!cat.relations.is_fermionic(gen(1)));
        assert_eq!(cat.relations.constant(gen(3), gen(4)), Some((Car, i_unit())));
        assert_eq!(catalog_phi6(0, 0), Err(CatalogError::Empty));
    }

    #[test]
    fn phi7_rejects_bad_parameters() {
        assert_eq!(catalog_phi7(5, 1, 1), Err(CatalogError::UnsupportedFamilyCount(5)));
        assert_eq!(catalog_phi7(4, 0, 1), Err(CatalogError::Truncation));
    }

    #[test]
    fn phi7_zero_mode_pair() {
        let cat = catalog_phi7(4, 1, 1).unwrap();
        let x0 = find_label(&cat, "x^0_0").unwrap();
        let p0 = find_label(&cat, "p^0_0").unwrap();
        assert_eq!(cat.relations.constant(x0, p0), Some((Ccr, i_unit())));
    }

    #[test]
    fn phi7_generators_are_self_adjoint_images() {
        for k in [4, 6] {
            let cat = catalog_phi7(k, 2, 2).unwrap();
            assert!(cat.map.is_star_compatible(None, 1e-15).unwrap());
        }
    }
}
