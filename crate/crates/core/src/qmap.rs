//! c-homomorphisms between coordinate test spaces and the *-homomorphisms
//! they induce on the free algebra.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Conjugation, Element, Generator, Scalar};
use crate::expr::{parse_expression, ParseError};
use crate::rewrite::{normal_order, GeneratorOrder, RelationSet};

/// Tolerance for the conjugation compatibility `h C_src = C_tgt h`.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-12;

/// Singular values at or below this (relative to `max(1, sigma_max)`) count
/// as zero when computing ranks.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QMapError {
    #[error("test space dimension must be at least 1")]
    EmptySpace,
    #[error("matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("map does not commute with the conjugations (residual {residual:e})")]
    Incompatible { residual: f64 },
    #[error("generator g{index} is outside the source space of dimension {dim}")]
    IndexOutOfRange { index: u32, dim: usize },
    #[error("cannot combine maps with different target conjugations")]
    ConflictingConjugations,
    #[error("cannot combine an empty list of maps")]
    NothingToCombine,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("image {index}: {source}")]
    Image { index: usize, source: ParseError },
}

/// A finite coordinate block `V_{0,n}` with its conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSpace {
    dim: usize,
    conjugation: Conjugation,
}

impl TestSpace {
    pub fn new(dim: usize, conjugation: Conjugation) -> Result<Self, QMapError> {
        if dim == 0 {
            return Err(QMapError::EmptySpace);
        }
        if let Some(k) = conjugation.block_dim() {
            if k != dim {
                return Err(QMapError::Shape {
                    rows: k,
                    cols: k,
                    expected_rows: dim,
                    expected_cols: dim,
                });
            }
        }
        Ok(TestSpace { dim, conjugation })
    }

    /// `V_{0,n}` with the coordinate conjugation.
    pub fn coordinate(dim: usize) -> Result<Self, QMapError> {
        TestSpace::new(dim, Conjugation::Coordinate)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conjugation(&self) -> &Conjugation {
        &self.conjugation
    }

    fn conjugate(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.conjugation
            .apply_vector(v)
            .expect("vector length matches the space dimension")
    }
}

/// A linear map between test spaces that commutes with the conjugations.
#[derive(Debug, Clone, PartialEq)]
pub struct CHom {
    source: TestSpace,
    target: TestSpace,
    matrix: DMatrix<Scalar>,
}

impl CHom {
    pub fn new(source: TestSpace, target: TestSpace, matrix: DMatrix<Scalar>) -> Result<Self, QMapError> {
        if matrix.nrows() != target.dim || matrix.ncols() != source.dim {
            return Err(QMapError::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected_rows: target.dim,
                expected_cols: source.dim,
            });
        }
        let h = CHom {
            source,
            target,
            matrix,
        };
        let residual = h.compatibility_residual();
        if residual > COMPATIBILITY_TOLERANCE {
            return Err(QMapError::Incompatible { residual });
        }
        Ok(h)
    }

    pub fn identity(space: TestSpace) -> Self {
        let n = space.dim;
        CHom {
            source: space.clone(),
            target: space,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// The canonical projection `P_n` on `V_{0,dim}` as a c-homomorphism.
    pub fn projection(dim: usize, n: usize) -> Result<Self, QMapError> {
        let space = TestSpace::coordinate(dim)?;
        let mut m = DMatrix::<Scalar>::zeros(dim, dim);
        for i in 0..n.min(dim) {
            m[(i, i)] = Scalar::new(1.0, 0.0);
        }
        CHom::new(space.clone(), space, m)
    }

    pub fn source(&self) -> &TestSpace {
        &self.source
    }

    pub fn target(&self) -> &TestSpace {
        &self.target
    }

    pub fn matrix(&self) -> &DMatrix<Scalar> {
        &self.matrix
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::new(0.0, 0.0); self.target.dim];
        for (j, z) in v.iter().enumerate().take(self.source.dim) {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * z;
            }
        }
        out
    }

    /// `max_j |h(C e_j) - C(h e_j)|` over the source basis.
    fn compatibility_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.source.dim {
            let mut e = vec![Scalar::new(0.0, 0.0); self.source.dim];
            e[j] = Scalar::new(1.0, 0.0);
            let lhs = self.apply(&self.source.conjugate(&e));
            let rhs = self.target.conjugate(&self.apply(&e));
            for (a, b) in lhs.iter().zip(&rhs) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    pub fn rank(&self) -> usize {
        matrix_rank(&self.matrix)
    }
}

pub(crate) fn matrix_rank(m: &DMatrix<Scalar>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_THRESHOLD * largest.max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Result of [`check_core`]. In finite dimensions both flags coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreReport {
    pub dense_image: bool,
    pub surjective: bool,
}

/// Decides whether `h` exhibits its source Q-map as a core (dense image) or
/// quotient (surjective) of the target one. In finite dimensions density is
/// surjectivity, decided by rank.
pub fn check_core(h: &CHom) -> CoreReport {
    let onto = h.rank() == h.target.dim;
    CoreReport {
        dense_image: onto,
        surjective: onto,
    }
}

/// Generator images of a Q-map composed with a c-homomorphism: source
/// generator `j` maps to `images[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMap {
    images: Vec<Element>,
    source_conjugation: Conjugation,
    target_conjugation: Conjugation,
}

impl GeneratorMap {
    pub fn new(images: Vec<Element>, source_conjugation: Conjugation, target_conjugation: Conjugation) -> Self {
        GeneratorMap {
            images,
            source_conjugation,
            target_conjugation,
        }
    }

    /// Images over coordinate conjugations on both sides.
    pub fn coordinate(images: Vec<Element>) -> Self {
        GeneratorMap::new(images, Conjugation::Coordinate, Conjugation::Coordinate)
    }

    /// `g_j -> g_j` on `dim` generators.
    pub fn identity(dim: usize, conjugation: Conjugation) -> Self {
        let images = (1..=dim as u32).map(Element::g).collect();
        GeneratorMap::new(images, conjugation.clone(), conjugation)
    }

    /// The universal Q-map composed with `h`: `g_j -> sum_i h[i, j] g_i`.
    pub fn from_chom(h: &CHom) -> Self {
        let images = (0..h.source.dim)
            .map(|j| {
                let column: Vec<Scalar> = h.matrix.column(j).iter().copied().collect();
                crate::algebra::qmap_phi0(&column)
            })
            .collect();
        GeneratorMap::new(
            images,
            h.source.conjugation.clone(),
            h.target.conjugation.clone(),
        )
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn source_dim(&self) -> usize {
        self.images.len()
    }

    pub fn source_conjugation(&self) -> &Conjugation {
        &self.source_conjugation
    }

    pub fn target_conjugation(&self) -> &Conjugation {
        &self.target_conjugation
    }

    /// The Q-map itself on a coordinate vector: `sum_j f_j images[j]`.
    pub fn evaluate(&self, f: &[Scalar]) -> Result<Element, QMapError> {
        if f.len() > self.images.len() {
            return Err(QMapError::IndexOutOfRange {
                index: f.len() as u32,
                dim: self.images.len(),
            });
        }
        let mut out = Element::zero();
        for (z, img) in f.iter().zip(&self.images) {
            out += &img.scale(*z);
        }
        Ok(out)
    }

    /// Largest deviation `|images[j]* - pi(C e_j)|` over the source basis,
    /// optionally comparing normal forms modulo `relations`.
    pub fn star_defect(&self, relations: Option<&RelationSet>) -> Result<f64, QMapError> {
        let normal = |e: Element| match relations {
            Some(r) => normal_order(&e, r, &GeneratorOrder::natural()),
            None => e,
        };
        let mut worst: f64 = 0.0;
        for (j, img) in self.images.iter().enumerate() {
            let lhs = normal(img.involute(&self.target_conjugation)?);
            let conj_gen = self
                .source_conjugation
                .apply_generator(Generator::from_position(j))?;
            let rhs = normal(induce_star_hom(self, &conj_gen)?);
            worst = worst.max(lhs.distance(&rhs));
        }
        Ok(worst)
    }

    pub fn is_star_compatible(&self, relations: Option<&RelationSet>, tol: f64) -> Result<bool, QMapError> {
        Ok(self.star_defect(relations)? <= tol)
    }
}

/// The *-homomorphism induced by a generator map: every word
/// `g_{i1} ... g_{ik}` maps to `images[i1] ... images[ik]`.
pub fn induce_star_hom(map: &GeneratorMap, a: &Element) -> Result<Element, QMapError> {
    a.map_words(|w| {
        let mut img = Element::unit();
        for &g in w.letters() {
            let factor = map.images.get(g.position()).ok_or(QMapError::IndexOutOfRange {
                index: g.index(),
                dim: map.images.len(),
            })?;
            img = &img * factor;
        }
        Ok(img)
    })
}

/// Direct-sum combination: the source space is the concatenation of the
/// sources, generator images are taken block by block.
pub fn combine_qmaps(maps: &[GeneratorMap]) -> Result<GeneratorMap, QMapError> {
    let first = maps.first().ok_or(QMapError::NothingToCombine)?;
    if maps.len() == 1 {
        return Ok(first.clone());
    }
    let target = &first.target_conjugation;
    for m in &maps[1..] {
        let same = match (target.block_dim(), m.target_conjugation.block_dim()) {
            (None, None) => true,
            (Some(a), Some(b)) if a == b => target.agrees_with(&m.target_conjugation, a, COMPATIBILITY_TOLERANCE),
            _ => false,
        };
        if !same {
            return Err(QMapError::ConflictingConjugations);
        }
    }
    let images = maps.iter().flat_map(|m| m.images.iter().cloned()).collect();
    let blocks: Vec<(Conjugation, usize)> = maps
        .iter()
        .map(|m| (m.source_conjugation.clone(), m.images.len()))
        .collect();
    Ok(GeneratorMap::new(
        images,
        Conjugation::direct_sum(&blocks),
        target.clone(),
    ))
}

/// JSON interchange form of a c-homomorphism and/or generator map. `matrix`
/// lists the `target_dim x source_dim` entries row-major as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub source_dim: usize,
    pub target_dim: usize,
    #[serde(default)]
    pub matrix: Vec<[f64; 2]>,
    #[serde(default)]
    pub images: Vec<String>,
}

impl MapDocument {
    pub fn from_chom(h: &CHom) -> Self {
        let mut matrix = Vec::with_capacity(h.matrix.len());
        for i in 0..h.matrix.nrows() {
            for j in 0..h.matrix.ncols() {
                let z = h.matrix[(i, j)];
                matrix.push([z.re, z.im]);
            }
        }
        MapDocument {
            source_dim: h.source.dim,
            target_dim: h.target.dim,
            matrix,
            images: GeneratorMap::from_chom(h)
                .images
                .iter()
                .map(Element::to_string)
                .collect(),
        }
    }

    pub fn from_generator_map(map: &GeneratorMap, target_dim: usize) -> Self {
        MapDocument {
            source_dim: map.source_dim(),
            target_dim,
            matrix: Vec::new(),
            images: map.images.iter().map(Element::to_string).collect(),
        }
    }

    /// Rebuilds the c-homomorphism between coordinate spaces.
    pub fn to_chom(&self) -> Result<CHom, QMapError> {
        let expected = self.source_dim * self.target_dim;
        if self.matrix.len() != expected {
            return Err(QMapError::Shape {
                rows: self.matrix.len(),
                cols: 1,
                expected_rows: expected,
                expected_cols: 1,
            });
        }
        let m = DMatrix::from_row_iterator(
            self.target_dim,
            self.source_dim,
            self.matrix.iter().map(|[re, im]| Scalar::new(*re, *im)),
        );
        CHom::new(
            TestSpace::coordinate(self.source_dim)?,
            TestSpace::coordinate(self.target_dim)?,
            m,
        )
    }

    /// Rebuilds the generator map over coordinate conjugations.
    pub fn to_generator_map(&self) -> Result<GeneratorMap, QMapError> {
        if self.images.is_empty() {
            return Ok(GeneratorMap::from_chom(&self.to_chom()?));
        }
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(index, s)| parse_expression(s).map_err(|source| QMapError::Image { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GeneratorMap::coordinate(images))
    }
}
