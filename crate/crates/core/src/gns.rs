//! Truncated GNS construction: words of length `<= d` modulo the null
//! space of the Gram form `omega(a* b)`, with operators represented by
//! matrix elements evaluated in an ambient window of degree `D`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::algebra::{AlgebraError, Element, Scalar, Word};
use crate::states::{hermitize, matrix_to_rows, moment_matrix, State, StateError};

/// Relative eigenvalue threshold below which Gram directions are null.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

/// Coefficients below this magnitude do not count towards edge truncation.
const SUPPORT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GnsError {
    #[error("ambient degree {ambient} is below twice the inner degree {inner}")]
    AmbientTooSmall { inner: usize, ambient: usize },
    #[error("operator of degree {degree} needs ambient degree {needed}, window is {ambient}")]
    AmbientExceeded { degree: usize, needed: usize, ambient: usize },
    #[error("operator uses g{index} outside the block of dimension {block_dim}")]
    OutsideBlock { index: u32, block_dim: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The windows of a truncated construction: basis words of length `<= d`
/// over generators `1..=block_dim`, moments evaluated up to degree `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsTruncation {
    pub state: State,
    pub block_dim: usize,
    pub inner_degree: usize,
    pub ambient_degree: usize,
}

impl GnsTruncation {
    pub fn new(state: State, block_dim: usize, inner_degree: usize, ambient_degree: usize) -> Result<Self, GnsError> {
        if ambient_degree < 2 * inner_degree {
            return Err(GnsError::AmbientTooSmall {
                inner: inner_degree,
                ambient: ambient_degree,
            });
        }
        if block_dim > state.block_dim() {
            return Err(StateError::OutsideBlock {
                index: block_dim as u32,
                block_dim: state.block_dim(),
            }
            .into());
        }
        if let Some(bound) = state.degree_bound() {
            if bound < 2 * inner_degree {
                return Err(StateError::DegreeExceeded {
                    degree: 2 * inner_degree,
                    bound,
                }
                .into());
            }
        }
        Ok(GnsTruncation {
            state,
            block_dim,
            inner_degree,
            ambient_degree,
        })
    }

    pub fn basis_words(&self) -> Vec<Word> {
        Word::enumerate(self.block_dim, self.inner_degree)
    }
}

/// `G[I][J] = omega(w_I* w_J)` over the canonical basis words, Hermitized.
pub fn build_gram(t: &GnsTruncation) -> Result<DMatrix<Scalar>, GnsError> {
    Ok(hermitize(&moment_matrix(&t.state, &t.basis_words())?))
}

/// Splits a Hermitian Gram matrix into null directions (eigenvalue `<=
/// tol * max`) and the rest, scaled to unit Gram norm. Returns the kernel
/// rank, the orthonormal columns and the null columns, both in word
/// coordinates and ordered by decreasing eigenvalue.
pub fn quotient_and_orthonormalize(gram: &DMatrix<Scalar>, tol: f64) -> (usize, DMatrix<Scalar>, DMatrix<Scalar>) {
    let n = gram.nrows();
    if n == 0 {
        return (0, DMatrix::zeros(0, 0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(gram.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let max = eig.eigenvalues[order[0]].max(0.0);
    let cut = tol * max;
    let mut ortho = Vec::new();
    let mut kernel = Vec::new();
    for &k in &order {
        let v = fix_phase(eig.eigenvectors.column(k).into_owned());
        let lambda = eig.eigenvalues[k];
        if lambda <= cut || lambda <= 0.0 {
            kernel.push(v);
        } else {
            ortho.push(v / Scalar::new(lambda.sqrt(), 0.0));
        }
    }
    (kernel.len(), columns(n, &ortho), columns(n, &kernel))
}

/// Rotates `v` so that its largest entry (first on ties) is real positive.
fn fix_phase(v: DVector<Scalar>) -> DVector<Scalar> {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() == 0.0 {
        return v;
    }
    let phase = z.conj() / z.norm();
    v.map(|x| x * phase)
}

fn columns(n: usize, cols: &[DVector<Scalar>]) -> DMatrix<Scalar> {
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// A truncated GNS triple: orthonormal classes of basis words, with the
/// cyclic vector expressed in that basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsRep {
    truncation: GnsTruncation,
    basis_words: Vec<Word>,
    gram: DMatrix<Scalar>,
    kernel_rank: usize,
    ortho_basis: DMatrix<Scalar>,
    kernel_basis: DMatrix<Scalar>,
    vacuum_vector: DVector<Scalar>,
}

/// Matrix of an operator in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Represented {
    pub matrix: DMatrix<Scalar>,
    /// Some basis vector is pushed past the inner window by the operator,
    /// so the matrix is a compression rather than an exact restriction.
    pub edge_truncated: bool,
}

impl GnsRep {
    pub fn build(truncation: GnsTruncation) -> Result<Self, GnsError> {
        Self::build_with_tolerance(truncation, KERNEL_TOLERANCE)
    }

    pub fn build_with_tolerance(truncation: GnsTruncation, tol: f64) -> Result<Self, GnsError> {
        let basis_words = truncation.basis_words();
        let gram = build_gram(&truncation)?;
        let (kernel_rank, ortho_basis, kernel_basis) = quotient_and_orthonormalize(&gram, tol);
        // basis_words[0] is the unit word; its class has coordinates O* G e_0
        let vacuum_vector = ortho_basis.adjoint() * gram.column(0);
        Ok(GnsRep {
            truncation,
            basis_words,
            gram,
            kernel_rank,
            ortho_basis,
            kernel_basis,
            vacuum_vector,
        })
    }

    pub fn truncation(&self) -> &GnsTruncation {
        &self.truncation
    }

    pub fn basis_words(&self) -> &[Word] {
        &self.basis_words
    }

    pub fn gram(&self) -> &DMatrix<Scalar> {
        &self.gram
    }

    pub fn kernel_rank(&self) -> usize {
        self.kernel_rank
    }

    /// Dimension of the truncated pre-Hilbert space.
    pub fn rank(&self) -> usize {
        self.ortho_basis.ncols()
    }

    pub fn ortho_basis(&self) -> &DMatrix<Scalar> {
        &self.ortho_basis
    }

    /// Null directions in word coordinates.
    pub fn kernel_basis(&self) -> &DMatrix<Scalar> {
        &self.kernel_basis
    }

    pub fn vacuum_vector(&self) -> &DVector<Scalar> {
        &self.vacuum_vector
    }

    pub fn word_index(&self, w: &Word) -> Option<usize> {
        self.basis_words.binary_search(w).ok()
    }

    /// Norm of the projection of a word-coordinate vector onto the kernel.
    pub fn kernel_component(&self, v: &DVector<Scalar>) -> f64 {
        (self.kernel_basis.adjoint() * v).norm()
    }

    /// `omega(v* v)` for a word-coordinate vector.
    pub fn gram_norm_sq(&self, v: &DVector<Scalar>) -> f64 {
        (v.adjoint() * &self.gram * v)[(0, 0)].re
    }

    /// Element of the algebra with word coordinates `v`.
    pub fn element(&self, v: &DVector<Scalar>) -> Element {
        Element::from_terms(self.basis_words.iter().cloned().zip(v.iter().cloned()))
    }

    /// `M[I][J] = omega(u_I* op u_J)` for the orthonormal columns `u`.
    pub fn represent(&self, op: &Element) -> Result<Represented, GnsError> {
        let t = &self.truncation;
        if op.max_index() as usize > t.block_dim {
            return Err(GnsError::OutsideBlock {
                index: op.max_index(),
                block_dim: t.block_dim,
            });
        }
        let degree = op.degree();
        let needed = 2 * t.inner_degree + degree;
        if needed > t.ambient_degree {
            return Err(GnsError::AmbientExceeded {
                degree,
                needed,
                ambient: t.ambient_degree,
            });
        }
        if let Some(bound) = t.state.degree_bound() {
            if needed > bound {
                return Err(StateError::DegreeExceeded { degree: needed, bound }.into());
            }
        }
        let conj = t.state.conjugation();
        let n = self.basis_words.len();
        let mut raw = DMatrix::zeros(n, n);
        let stars = self
            .basis_words
            .iter()
            .map(|w| Element::word(w.clone()).involute(&conj))
            .collect::<Result<Vec<_>, _>>()?;
        let pushed: Vec<Element> = self
            .basis_words
            .iter()
            .map(|w| op * &Element::word(w.clone()))
            .collect();
        for (i, s) in stars.iter().enumerate() {
            for (j, p) in pushed.iter().enumerate() {
                raw[(i, j)] = t.state.evaluate(&(s * p))?;
            }
        }
        let matrix = self.ortho_basis.adjoint() * raw * &self.ortho_basis;
        let edge_truncated = degree > 0
            && (0..n).any(|i| {
                self.basis_words[i].len() + degree > t.inner_degree
                    && self.ortho_basis.row(i).iter().any(|z| z.norm() > SUPPORT_TOLERANCE)
            });
        Ok(Represented { matrix, edge_truncated })
    }

    /// `<Omega, pi(op) Omega>`.
    pub fn vacuum_expectation(&self, op: &Element) -> Result<Scalar, GnsError> {
        let m = self.represent(op)?.matrix;
        Ok((self.vacuum_vector.adjoint() * m * &self.vacuum_vector)[(0, 0)])
    }

    /// Export with the given operators represented.
    pub fn export(&self, operators: &[(String, Element)]) -> Result<GnsExport, GnsError> {
        let operators = operators
            .iter()
            .map(|(label, op)| {
                let r = self.represent(op)?;
                Ok(OperatorExport {
                    expression: label.clone(),
                    edge_truncated: r.edge_truncated,
                    matrix: matrix_to_rows(&r.matrix),
                })
            })
            .collect::<Result<Vec<_>, GnsError>>()?;
        Ok(GnsExport {
            basis_words: self.basis_words.iter().map(Word::indices).collect(),
            gram: matrix_to_rows(&self.gram),
            kernel_rank: self.kernel_rank,
            ortho_basis: matrix_to_rows(&self.ortho_basis),
            vacuum_vector: self.vacuum_vector.iter().map(|z| [z.re, z.im]).collect(),
            operators,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorExport {
    pub expression: String,
    pub edge_truncated: bool,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// JSON form of a truncated GNS representation. Matrices are row lists of
/// `[re, im]`; `ortho_basis` columns are word-coordinate vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnsExport {
    pub basis_words: Vec<Vec<u32>>,
    pub gram: Vec<Vec<[f64; 2]>>,
    pub kernel_rank: usize,
    pub ortho_basis: Vec<Vec<[f64; 2]>>,
    pub vacuum_vector: Vec<[f64; 2]>,
    pub operators: Vec<OperatorExport>,
}

impl GnsExport {
    /// Long-format CSV of every matrix: `matrix,row,col,re,im`, using the
    /// supplied float formatter.
    pub fn to_csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("matrix,row,col,re,im\n");
        let mut emit = |name: &str, rows: &[Vec<[f64; 2]>]| {
            for (i, row) in rows.iter().enumerate() {
                for (j, z) in row.iter().enumerate() {
                    out.push_str(&format!("{name},{i},{j},{},{}\n", fmt(z[0]), fmt(z[1])));
                }
            }
        };
        emit("gram", &self.gram);
        emit("ortho_basis", &self.ortho_basis);
        for op in &self.operators {
            emit(&csv_field(&op.expression), &op.matrix);
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
