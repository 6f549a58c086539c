//! The free *-algebra over the cofinite sequence space.
//!
//! Elements are finite complex linear combinations of [`Word`]s, each word a
//! finite sequence of [`Generator`]s. The product is word concatenation, the
//! unit is the empty word, and the involution reverses words, maps every
//! letter through a [`Conjugation`] and conjugates coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex scalar used for every coefficient in the crate.
pub type Scalar = Complex64;

/// Coefficients at or below this magnitude are dropped on canonicalization.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance used when validating a matrix conjugation `K conj(K) = 1`.
pub const CONJUGATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("generator index must be at least 1")]
    ZeroGenerator,
    #[error("generator g{index} lies outside the conjugation block of dimension {dim}")]
    OutsideBlock { index: u32, dim: usize },
    #[error("conjugation matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("conjugation matrix is not involutive: |K conj(K) - 1| = {residual:e}")]
    NotInvolutive { residual: f64 },
}

/// A basis vector `e_n` of the cofinite sequence space, `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Generator(u32);

impl Generator {
    pub fn new(index: u32) -> Result<Self, AlgebraError> {
        if index == 0 {
            Err(AlgebraError::ZeroGenerator)
        } else {
            Ok(Generator(index))
        }
    }

    /// One-based index.
    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, convenient for indexing matrices.
    pub fn position(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_position(position: usize) -> Self {
        Generator(position as u32 + 1)
    }
}

impl TryFrom<u32> for Generator {
    type Error = AlgebraError;
    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Generator::new(value)
    }
}

impl From<Generator> for u32 {
    fn from(g: Generator) -> u32 {
        g.0
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A finite product of generators. The empty word is the unit.
///
/// Words order first by length and then lexicographically by letters, which
/// is the canonical term order used for printing and for Gram bases.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Generator>) -> Self {
        Word(letters)
    }

    /// Builds a word from one-based indices.
    pub fn from_indices(indices: &[u32]) -> Result<Self, AlgebraError> {
        indices
            .iter()
            .map(|&i| Generator::new(i))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_unit()
    }

    pub fn indices(&self) -> Vec<u32> {
        self.0.iter().map(|g| g.0).collect()
    }

    /// Largest generator index in the word, 0 for the unit.
    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|g| g.0).max().unwrap_or(0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// All words over generators `1..=block_dim` of length at most
    /// `max_len`, in canonical order.
    pub fn enumerate(block_dim: usize, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::unit()];
        let mut layer = vec![Word::unit()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * block_dim);
            for w in &layer {
                for g in 0..block_dim {
                    let mut letters = w.0.clone();
                    letters.push(Generator::from_position(g));
                    next.push(Word(letters));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<Generator>> for Word {
    fn from(letters: Vec<Generator>) -> Self {
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// An antilinear involution on the coordinate test space.
#[derive(Debug, Clone, PartialEq)]
pub enum Conjugation {
    /// Complex conjugation of coordinates; fixes every basis generator.
    Coordinate,
    /// `C(e_j) = sum_i K[i, j] e_i` on generators `1..=K.nrows()`, extended
    /// antilinearly. Requires `K conj(K) = 1`.
    Matrix(DMatrix<Scalar>),
}

impl Conjugation {
    pub fn matrix(k: DMatrix<Scalar>) -> Result<Self, AlgebraError> {
        if k.nrows() != k.ncols() {
            return Err(AlgebraError::NonSquare {
                rows: k.nrows(),
                cols: k.ncols(),
            });
        }
        let n = k.nrows();
        let residual = (&k * k.map(|z| z.conj()) - DMatrix::<Scalar>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if residual > CONJUGATION_TOLERANCE {
            return Err(AlgebraError::NotInvolutive { residual });
        }
        Ok(Conjugation::Matrix(k))
    }

    /// Pairwise swap `g_{2k-1} <-> g_{2k}` for `pairs` consecutive pairs, the
    /// conjugation of a ladder layout `(a_1, a_1*, a_2, a_2*, ...)`.
    pub fn pair_swap(pairs: usize) -> Self {
        let n = 2 * pairs;
        let mut k = DMatrix::<Scalar>::zeros(n, n);
        for p in 0..pairs {
            k[(2 * p, 2 * p + 1)] = Scalar::new(1.0, 0.0);
            k[(2 * p + 1, 2 * p)] = Scalar::new(1.0, 0.0);
        }
        Conjugation::Matrix(k)
    }

    /// Block dimension for the matrix kind, `None` for coordinate.
    pub fn block_dim(&self) -> Option<usize> {
        match self {
            Conjugation::Coordinate => None,
            Conjugation::Matrix(k) => Some(k.nrows()),
        }
    }

    /// Image of a single generator, as a degree-one element.
    pub fn apply_generator(&self, g: Generator) -> Result<Element, AlgebraError> {
        match self {
            Conjugation::Coordinate => Ok(Element::generator(g)),
            Conjugation::Matrix(k) => {
                let j = g.position();
                if j >= k.ncols() {
                    return Err(AlgebraError::OutsideBlock {
                        index: g.index(),
                        dim: k.ncols(),
                    });
                }
                let mut out = Element::zero();
                for i in 0..k.nrows() {
                    out.add_term(Word(vec![Generator::from_position(i)]), k[(i, j)]);
                }
                out.prune();
                Ok(out)
            }
        }
    }

    /// Applies the conjugation to a coordinate vector.
    pub fn apply_vector(&self, v: &[Scalar]) -> Result<Vec<Scalar>, AlgebraError> {
        match self {
            Conjugation::Coordinate => Ok(v.iter().map(|z| z.conj()).collect()),
            Conjugation::Matrix(k) => {
                if v.len() > k.ncols() {
                    return Err(AlgebraError::OutsideBlock {
                        index: v.len() as u32,
                        dim: k.ncols(),
                    });
                }
                let mut out = vec![Scalar::new(0.0, 0.0); k.nrows()];
                for (j, z) in v.iter().enumerate() {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += k[(i, j)] * z.conj();
                    }
                }
                Ok(out)
            }
        }
    }

    /// Equality of actions on the first `dim` generators, to `tol`.
    pub fn agrees_with(&self, other: &Conjugation, dim: usize, tol: f64) -> bool {
        (0..dim).all(|p| {
            let g = Generator::from_position(p);
            match (self.apply_generator(g), other.apply_generator(g)) {
                (Ok(a), Ok(b)) => a.approx_eq(&b, tol),
                _ => false,
            }
        })
    }

    /// Block-diagonal direct sum of conjugations of the given dimensions.
    pub fn direct_sum(parts: &[(Conjugation, usize)]) -> Conjugation {
        if parts.iter().all(|(c, _)| *c == Conjugation::Coordinate) {
            return Conjugation::Coordinate;
        }
        let n: usize = parts.iter().map(|(_, d)| d).sum();
        let mut k = DMatrix::<Scalar>::zeros(n, n);
        let mut offset = 0;
        for (c, d) in parts {
            match c {
                Conjugation::Coordinate => {
                    for i in 0..*d {
                        k[(offset + i, offset + i)] = Scalar::new(1.0, 0.0);
                    }
                }
                Conjugation::Matrix(m) => {
                    let d = (*d).min(m.nrows());
                    for i in 0..d {
                        for j in 0..d {
                            k[(offset + i, offset + j)] = m[(i, j)];
                        }
                    }
                }
            }
            offset += d;
        }
        Conjugation::Matrix(k)
    }
}

/// A finite linear combination of words in canonical form: no zero
/// coefficients, one entry per word.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Element {
    terms: BTreeMap<Word, Scalar>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn unit() -> Self {
        Element::scalar(Scalar::new(1.0, 0.0))
    }

    pub fn scalar(c: Scalar) -> Self {
        Element::term(Word::unit(), c)
    }

    pub fn generator(g: Generator) -> Self {
        Element::term(Word(vec![g]), Scalar::new(1.0, 0.0))
    }

    /// The generator `g_index`; panics on index 0.
    pub fn g(index: u32) -> Self {
        Element::generator(Generator::new(index).expect("generator index must be >= 1"))
    }

    pub fn word(w: Word) -> Self {
        Element::term(w, Scalar::new(1.0, 0.0))
    }

    pub fn term(w: Word, c: Scalar) -> Self {
        let mut e = Element::zero();
        e.add_term(w, c);
        e.prune();
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Scalar)>>(terms: I) -> Self {
        let mut e = Element::zero();
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e.prune();
        e
    }

    /// Adds `c * w` without pruning; call [`Element::prune`] afterwards.
    pub(crate) fn add_term(&mut self, w: Word, c: Scalar) {
        *self.terms.entry(w).or_insert(Scalar::new(0.0, 0.0)) += c;
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_THRESHOLD);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &Word) -> Scalar {
        self.terms.get(w).copied().unwrap_or_default()
    }

    /// Coefficient of the unit word.
    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Word::unit())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal word length; 0 for the zero element.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Largest generator index occurring in any term, 0 if none.
    pub fn max_index(&self) -> u32 {
        self.terms.keys().map(Word::max_index).max().unwrap_or(0)
    }

    pub fn scale(&self, c: Scalar) -> Element {
        Element::from_terms(self.terms.iter().map(|(w, z)| (w.clone(), z * c)))
    }

    /// Maps every word through `f`, summing the resulting elements with the
    /// original coefficients.
    pub fn map_words<E, F>(&self, mut f: F) -> Result<Element, E>
    where
        F: FnMut(&Word) -> Result<Element, E>,
    {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            for (v, d) in f(w)?.terms {
                out.add_term(v, c * d);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Applies the involution defined by `conjugation`.
    pub fn involute(&self, conjugation: &Conjugation) -> Result<Element, AlgebraError> {
        match conjugation {
            Conjugation::Coordinate => Ok(Element::from_terms(
                self.terms.iter().map(|(w, c)| (w.reversed(), c.conj())),
            )),
            Conjugation::Matrix(_) => {
                let mut out = Element::zero();
                for (w, c) in &self.terms {
                    let mut img = Element::scalar(c.conj());
                    for &g in w.letters().iter().rev() {
                        img = &img * &conjugation.apply_generator(g)?;
                    }
                    for (v, d) in img.terms {
                        out.add_term(v, d);
                    }
                }
                out.prune();
                Ok(out)
            }
        }
    }

    /// Involution under the coordinate conjugation: reversal plus complex
    /// conjugation of coefficients.
    pub fn adjoint(&self) -> Element {
        self.involute(&Conjugation::Coordinate)
            .expect("coordinate conjugation is total")
    }

    /// Sup-norm distance of coefficients.
    pub fn distance(&self, other: &Element) -> f64 {
        (self - other)
            .terms
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Element, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Drops every word containing a generator with index `> n`.
    pub fn project(&self, n: usize) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.max_index() as usize <= n)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }
}

/// Zeroes every coordinate beyond `n`, keeping the vector length.
pub fn project_coords(v: &[Scalar], n: usize) -> Vec<Scalar> {
    v.iter()
        .enumerate()
        .map(|(i, z)| if i < n { *z } else { Scalar::new(0.0, 0.0) })
        .collect()
}

/// The universal Q-map: a coordinate vector `v` becomes `sum_n v_n g_n`.
pub fn qmap_phi0(v: &[Scalar]) -> Element {
    Element::from_terms(
        v.iter()
            .enumerate()
            .map(|(i, c)| (Word(vec![Generator::from_position(i)]), *c)),
    )
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*{}", format_scalar(*c), w)?;
        }
        Ok(())
    }
}

/// Formats a scalar as `(re+imi)` using the shortest round-tripping decimal
/// representation of each part.
pub fn format_scalar(c: Scalar) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("({:?}{}{:?}i)", c.re, sign, c.im.abs())
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;
    fn add(self, rhs: &'a Element) -> Element {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), *c);
        }
        out.prune();
        out
    }
}


impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        for (w, c) in &rhs.terms {
            self.add_term(w.clone(), *c);
        }
        self.prune();
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &'a Element) -> Element {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -*c);
        }
        out.prune();
        out
    }
}


impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(Scalar::new(-1.0, 0.0))
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        -&self
    }
}

impl<'a> Mul<&'a Element> for &'a Element {
    type Output = Element;
    fn mul(self, rhs: &'a Element) -> Element {
        let mut out = Element::zero();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out.prune();
        out
    }
}


impl Mul<Scalar> for &Element {
    type Output = Element;
    fn mul(self, rhs: Scalar) -> Element {
        self.scale(rhs)
    }
}

impl Mul<Scalar> for Element {
    type Output = Element;
    fn mul(self, rhs: Scalar) -> Element {
        self.scale(rhs)
    }
}

/// Owned and mixed forms delegating to the reference implementation.
macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Element {
            type Output = Element;
            fn $f(self, rhs: Element) -> Element {
                $tr::$f(&self, &rhs)
            }
        }

        impl $tr<&Element> for Element {
            type Output = Element;
            fn $f(self, rhs: &Element) -> Element {
                $tr::$f(&self, rhs)
            }
        }

        impl $tr<Element> for &Element {
            type Output = Element;
            fn $f(self, rhs: Element) -> Element {
                $tr::$f(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl From<Word> for Element {
    fn from(w: Word) -> Self {
        Element::word(w)
    }
}

impl From<Generator> for Element {
    fn from(g: Generator) -> Self {
        Element::generator(g)
    }
}
