//! States on the free algebra: normalized linear functionals given by
//! moment tables, quasi-free two-point data, or Fock vacua.

pub mod fock;
pub mod wick;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Conjugation, Element, Scalar, Word};
pub use fock::{phi6_realization, FockOracle, FockRepresentation, FockSpec, FockValue};
pub use wick::{wick_evaluate, wick_evaluate_counted, Statistics, TwoPointMatrix};

/// Default tolerance for positive semidefiniteness decisions.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Stored moments must satisfy `omega(w*) = conj(omega(w))` to this tolerance.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("generator g{index} lies outside the state's block of dimension {block_dim}")]
    OutsideBlock { index: u32, block_dim: usize },
    #[error("word of length {degree} exceeds the degree bound {bound}")]
    DegreeExceeded { degree: usize, bound: usize },
    #[error("no moment stored for {0}")]
    MissingMoment(String),
    #[error("stored moments violate hermiticity at {0}")]
    NotHermitian(String),
    #[error("the unit must evaluate to 1")]
    NotNormalized,
    #[error("boson truncation overflow persists up to cutoff {cutoff}")]
    Truncation { cutoff: usize },
    #[error("boson cutoff must be at least 1")]
    InvalidCutoff,
    #[error("malformed state document: {0}")]
    Document(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Explicit moments of words up to a degree bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    block_dim: usize,
    degree_bound: usize,
    moments: BTreeMap<Word, Scalar>,
}

impl MomentTable {
    /// Validates generator range, degree bound and hermiticity of stored
    /// pairs `w`, `reverse(w)`; inserts `omega(1) = 1` if absent.
    pub fn new(
        block_dim: usize,
        degree_bound: usize,
        moments: impl IntoIterator<Item = (Word, Scalar)>,
    ) -> Result<Self, StateError> {
        let mut table = BTreeMap::new();
        for (w, v) in moments {
            if w.max_index() as usize > block_dim {
                return Err(StateError::OutsideBlock {
                    index: w.max_index(),
                    block_dim,
                });
            }
            if w.len() > degree_bound {
                return Err(StateError::DegreeExceeded {
                    degree: w.len(),
                    bound: degree_bound,
                });
            }
            table.insert(w, v);
        }
        match table.get(&Word::unit()) {
            Some(v) if (v - Scalar::new(1.0, 0.0)).norm() > HERMITICITY_TOLERANCE => {
                return Err(StateError::NotNormalized)
            }
            Some(_) => {}
            None => {
                table.insert(Word::unit(), Scalar::new(1.0, 0.0));
            }
        }
        for (w, v) in &table {
            if let Some(u) = table.get(&w.reversed()) {
                if (u - v.conj()).norm() > HERMITICITY_TOLERANCE {
                    return Err(StateError::NotHermitian(w.to_string()));
                }
            }
        }
        Ok(MomentTable {
            block_dim,
            degree_bound,
            moments: table,
        })
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn moments(&self) -> &BTreeMap<Word, Scalar> {
        &self.moments
    }

    fn lookup(&self, w: &Word) -> Result<Scalar, StateError> {
        if let Some(v) = self.moments.get(w) {
            return Ok(*v);
        }
        if let Some(v) = self.moments.get(&w.reversed()) {
            return Ok(v.conj());
        }
        Err(StateError::MissingMoment(w.to_string()))
    }
}

/// A state presented by a concrete evaluation rule.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    /// Words over self-adjoint generators with tabulated moments.
    MomentTable(MomentTable),
    /// Quasi-free state determined by two-point data.
    QuasiFree {
        statistics: Statistics,
        two_point: TwoPointMatrix,
        conjugation: Conjugation,
    },
    /// Vacuum of a truncated Fock space; generators in the interleaved
    /// ladder layout with the pairwise-swap conjugation.
    Fock(FockOracle),
    /// Reduced state on the sub-algebra of the first `level` generators.
    Restricted { inner: Box<State>, level: usize },
}

impl State {
    pub fn quasi_free(statistics: Statistics, two_point: TwoPointMatrix, conjugation: Conjugation) -> Self {
        State::QuasiFree {
            statistics,
            two_point,
            conjugation,
        }
    }

    /// The quasi-free state with the vacuum two-point function of `modes`
    /// ladder modes: `W(a_k, a_k*) = 1`, everything else 0.
    pub fn ladder_vacuum(modes: usize, statistics: Statistics) -> Self {
        let n = 2 * modes;
        let mut w = DMatrix::zeros(n, n);
        for k in 0..modes {
            w[(2 * k, 2 * k + 1)] = Scalar::new(1.0, 0.0);
        }
        State::quasi_free(statistics, TwoPointMatrix::new(w), Conjugation::pair_swap(modes))
    }

    pub fn block_dim(&self) -> usize {
        match self {
            State::MomentTable(t) => t.block_dim,
            State::QuasiFree { two_point, .. } => two_point.block_dim(),
            State::Fock(o) => o.generator_count(),
            State::Restricted { inner, level } => (*level).min(inner.block_dim()),
        }
    }

    /// Longest evaluable word, `None` if unbounded.
    pub fn degree_bound(&self) -> Option<usize> {
        match self {
            State::MomentTable(t) => Some(t.degree_bound),
            State::Restricted { inner, .. } => inner.degree_bound(),
            _ => None,
        }
    }

    pub fn conjugation(&self) -> Conjugation {
        match self {
            State::MomentTable(_) => Conjugation::Coordinate,
            State::QuasiFree { conjugation, .. } => conjugation.clone(),
            State::Fock(o) => Conjugation::pair_swap(o.modes().len()),
            State::Restricted { inner, .. } => inner.conjugation(),
        }
    }

    pub fn evaluate_word(&self, w: &Word) -> Result<Scalar, StateError> {
        let block_dim = self.block_dim();
        if w.max_index() as usize > block_dim {
            return Err(StateError::OutsideBlock {
                index: w.max_index(),
                block_dim,
            });
        }
        if let Some(bound) = self.degree_bound() {
            if w.len() > bound {
                return Err(StateError::DegreeExceeded {
                    degree: w.len(),
                    bound,
                });
            }
        }
        if w.is_unit() {
            return Ok(Scalar::new(1.0, 0.0));
        }
        match self {
            State::MomentTable(t) => t.lookup(w),
            State::QuasiFree {
                statistics,
                two_point,
                ..
            } => Ok(wick_evaluate(two_point, w, *statistics)),
            State::Fock(o) => o.moment_adaptive(&Element::word(w.clone())),
            State::Restricted { inner, .. } => inner.evaluate_word(w),
        }
    }

    /// Linear extension of [`State::evaluate_word`].
    pub fn evaluate(&self, a: &Element) -> Result<Scalar, StateError> {
        let mut total = Scalar::new(0.0, 0.0);
        for (w, c) in a.terms() {
            total += c * self.evaluate_word(w)?;
        }
        Ok(total)
    }

    /// Reduced state on generators `1..=n`; restricting twice keeps the
    /// smaller level.
    pub fn restrict(&self, n: usize) -> State {
        match self {
            State::Restricted { inner, level } => State::Restricted {
                inner: inner.clone(),
                level: (*level).min(n),
            },
            other => State::Restricted {
                inner: Box::new(other.clone()),
                level: n,
            },
        }
    }

    pub fn from_document(doc: &StateDocument) -> Result<Self, StateError> {
        let conjugation = match &doc.conjugation {
            None => Conjugation::Coordinate,
            Some(rows) => Conjugation::matrix(matrix_from_rows(rows)?)?,
        };
        match doc.kind {
            StateKind::MomentTable => {
                let block_dim = doc
                    .block_dim
                    .ok_or_else(|| StateError::Document("moment-table needs block_dim".into()))?;
                let moments = doc
                    .moments
                    .iter()
                    .map(|m| {
                        Word::from_indices(&m.word)
                            .map(|w| (w, Scalar::new(m.value[0], m.value[1])))
                            .map_err(StateError::from)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let bound = doc
                    .degree_bound
                    .unwrap_or_else(|| moments.iter().map(|(w, _)| w.len()).max().unwrap_or(0));
                if doc.conjugation.is_some() {
                    return Err(StateError::Document(
                        "moment tables use the coordinate conjugation".into(),
                    ));
                }
                Ok(State::MomentTable(MomentTable::new(block_dim, bound, moments)?))
            }
            StateKind::QuasiFreeBoson | StateKind::QuasiFreeFermion => {
                let rows = doc
                    .two_point
                    .as_ref()
                    .ok_or_else(|| StateError::Document("quasi-free state needs two_point".into()))?;
                let w = matrix_from_rows(rows)?;
                if let Some(b) = doc.block_dim {
                    if b != w.nrows() {
                        return Err(StateError::Document(format!(
                            "block_dim {b} does not match two_point dimension {}",
                            w.nrows()
                        )));
                    }
                }
                let statistics = if doc.kind == StateKind::QuasiFreeBoson {
                    Statistics::Boson
                } else {
                    Statistics::Fermion
                };
                Ok(State::quasi_free(statistics, TwoPointMatrix::new(w), conjugation))
            }
            StateKind::Fock => {
                let spec = doc
                    .fock
                    .as_ref()
                    .ok_or_else(|| StateError::Document("fock state needs fock parameters".into()))?;
                Ok(State::Fock(FockOracle::from_spec(spec)?))
            }
        }
    }

    pub fn to_document(&self) -> Result<StateDocument, StateError> {
        let mut doc = StateDocument {
            kind: StateKind::Fock,
            block_dim: Some(self.block_dim()),
            degree_bound: self.degree_bound(),
            two_point: None,
            moments: Vec::new(),
            fock: None,
            conjugation: None,
        };
        match self {
            State::MomentTable(t) => {
                doc.kind = StateKind::MomentTable;
                doc.moments = t
                    .moments
                    .iter()
                    .map(|(w, v)| MomentEntry {
                        word: w.indices(),
                        value: [v.re, v.im],
                    })
                    .collect();
            }
            State::QuasiFree {
                statistics,
                two_point,
                conjugation,
            } => {
                doc.kind = match statistics {
                    Statistics::Boson => StateKind::QuasiFreeBoson,
                    Statistics::Fermion => StateKind::QuasiFreeFermion,
                };
                doc.two_point = Some(matrix_to_rows(two_point.matrix()));
                if let Conjugation::Matrix(k) = conjugation {
                    doc.conjugation = Some(matrix_to_rows(k));
                }
            }
            State::Fock(o) => {
                doc.fock = Some(
                    o.to_spec()
                        .ok_or_else(|| StateError::Document("mixed Fock oracles have no document form".into()))?,
                );
            }
            State::Restricted { .. } => {
                return Err(StateError::Document("reduced states have no document form".into()))
            }
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    MomentTable,
    QuasiFreeBoson,
    QuasiFreeFermion,
    Fock,
}

/// JSON form of a state. Matrices are row lists of `[re, im]` entries; the
/// optional `conjugation` matrix applies to quasi-free states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_point: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugation: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    pub word: Vec<u32>,
    pub value: [f64; 2],
}

pub fn matrix_to_rows(m: &DMatrix<Scalar>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Scalar>, StateError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(StateError::Document("matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Scalar::new(rows[i][j][0], rows[i][j][1])))
}

/// `M[I][J] = omega(w_I* w_J)` over `words`, unsymmetrized.
pub fn moment_matrix(state: &State, words: &[Word]) -> Result<DMatrix<Scalar>, StateError> {
    let conj = state.conjugation();
    let stars = words
        .iter()
        .map(|w| Element::word(w.clone()).involute(&conj))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = DMatrix::zeros(words.len(), words.len());
    for (i, s) in stars.iter().enumerate() {
        for (j, w) in words.iter().enumerate() {
            let prod = s * &Element::word(w.clone());
            m[(i, j)] = state.evaluate(&prod)?;
        }
    }
    Ok(m)
}

/// `(M + M*) / 2`.
pub fn hermitize(m: &DMatrix<Scalar>) -> DMatrix<Scalar> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Scalar>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub positive: bool,
}

/// Smallest eigenvalue of the Hermitized moment matrix over all words of
/// length `<= max_degree` in generators `1..=block_dim`.
pub fn positivity_check(
    state: &State,
    block_dim: usize,
    max_degree: usize,
    tol: f64,
) -> Result<PositivityReport, StateError> {
    let words = Word::enumerate(block_dim, max_degree);
    let m = hermitize(&moment_matrix(state, &words)?);
    let min_eigenvalue = min_eigenvalue(&m);
    Ok(PositivityReport {
        min_eigenvalue,
        positive: min_eigenvalue >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(ix: &[u32]) -> Word {
        Word::from_indices(ix).unwrap()
    }

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn negative_table() -> State {
        State::MomentTable(
            MomentTable::new(1, 2, [(w(&[1]), c(0.0, 0.0)), (w(&[1, 1]), c(-1.0, 0.0))]).unwrap(),
        )
    }

    #[test]
    fn unit_evaluates_to_one_for_every_kind() {
        let states = [
            negative_table(),
            State::ladder_vacuum(1, Statistics::Boson),
            State::ladder_vacuum(2, Statistics::Fermion),
            State::Fock(FockOracle::bosons(1, 3).unwrap()),
            State::ladder_vacuum(1, Statistics::Boson).restrict(1),
        ];
        for s in &states {
            assert_eq!(s.evaluate(&Element::unit()).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn odd_quasi_free_moments_vanish() {
        let s = State::ladder_vacuum(1, Statistics::Boson);
        assert_eq!(s.evaluate_word(&w(&[1, 2, 2])).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn negative_second_moment_is_not_positive() {
        let r = positivity_check(&negative_table(), 1, 1, PSD_TOLERANCE).unwrap();
        assert!(!r.positive);
        assert!(r.min_eigenvalue < -0.5);
    }

    #[test]
    fn degree_zero_moment_matrix_is_one() {
        let m = moment_matrix(&negative_table(), &Word::enumerate(1, 0)).unwrap();
        assert_eq!(m, DMatrix::from_element(1, 1, c(1.0, 0.0)));
        assert!(positivity_check(&negative_table(), 1, 0, PSD_TOLERANCE).unwrap().positive);
    }

    #[test]
    fn vacuum_is_positive() {
        let s = State::ladder_vacuum(1, Statistics::Boson);
        let r = positivity_check(&s, 2, 2, PSD_TOLERANCE).unwrap();
        assert!(r.positive, "{r:?}");
    }

    #[test]
    fn moment_table_errors() {
        let t = negative_table();
        assert!(matches!(t.evaluate_word(&w(&[1, 1, 1])), Err(StateError::DegreeExceeded { .. })));
        assert!(matches!(t.evaluate_word(&w(&[2])), Err(StateError::OutsideBlock { .. })));
        let sparse = State::MomentTable(MomentTable::new(2, 2, [(w(&[1, 2]), c(0.0, 1.0))]).unwrap());
        assert_eq!(sparse.evaluate_word(&w(&[2, 1])).unwrap(), c(0.0, -1.0));
        assert!(matches!(sparse.evaluate_word(&w(&[1])), Err(StateError::MissingMoment(_))));
        assert!(matches!(
            MomentTable::new(2, 2, [(w(&[1, 2]), c(0.0, 1.0)), (w(&[2, 1]), c(0.0, 1.0))]),
            Err(StateError::NotHermitian(_))
        ));
        assert!(matches!(
            MomentTable::new(1, 1, [(Word::unit(), c(2.0, 0.0))]),
            Err(StateError::NotNormalized)
        ));
    }

    #[test]
    fn restriction_rejects_higher_generators_and_nests() {
        let s = State::ladder_vacuum(2, Statistics::Boson);
        let r = s.restrict(2);
        assert_eq!(r.evaluate_word(&w(&[1, 2])).unwrap(), c(1.0, 0.0));
        assert!(matches!(r.evaluate_word(&w(&[3])), Err(StateError::OutsideBlock { .. })));
        assert_eq!(s.restrict(3).restrict(2), s.restrict(2));
        assert_eq!(s.restrict(2).restrict(3), s.restrict(2));
    }

    #[test]
    fn document_round_trips() {
        for s in [
            negative_table(),
            State::ladder_vacuum(1, Statistics::Fermion),
            State::Fock(FockOracle::bosons(2, 5).unwrap()),
        ] {
            let json = serde_json::to_string(&s.to_document().unwrap()).unwrap();
            let back = State::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, s);
        }
        let bad = r#"{"kind":"fock","fock":{"modes":1,"statistics":"boson"},"colour":1}"#;
        assert!(serde_json::from_str::<StateDocument>(bad).is_err());
    }
}
