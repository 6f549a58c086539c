//! Quasi-free evaluation: sums over perfect matchings of word positions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{Scalar, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Two-point data `W[i][j] = omega(g_{i+1} g_{j+1})` on a generator block.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointMatrix(DMatrix<Scalar>);

impl TwoPointMatrix {
    /// Panics if `w` is not square.
    pub fn new(w: DMatrix<Scalar>) -> Self {
        assert!(w.is_square(), "two-point matrix must be square");
        TwoPointMatrix(w)
    }

    pub fn block_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Scalar> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.0[(i, j)]
    }
}

/// Quasi-free moment of a word: the sum over all perfect matchings of its
/// positions of the product of `W` at each pair (earlier position first),
/// signed by the matching's permutation parity for fermions. Odd words
/// vanish.
pub fn wick_evaluate(w: &TwoPointMatrix, word: &Word, statistics: Statistics) -> Scalar {
    wick_evaluate_counted(w, word, statistics).0
}

/// Like [`wick_evaluate`], also returning the number of matchings visited.
pub fn wick_evaluate_counted(w: &TwoPointMatrix, word: &Word, statistics: Statistics) -> (Scalar, usize) {
    if word.len() % 2 == 1 {
        return (Scalar::new(0.0, 0.0), 0);
    }
    let letters: Vec<usize> = word.letters().iter().map(|g| g.position()).collect();
    let mut positions: Vec<usize> = (0..letters.len()).collect();
    let mut count = 0;
    let value = matchings(w, &letters, &mut positions, statistics, &mut count);
    (value, count)
}

/// Pairs the first remaining position with each later one in turn; pairing
/// with the `k`-th remaining position crosses `k - 1` others.
fn matchings(
    w: &TwoPointMatrix,
    letters: &[usize],
    positions: &mut Vec<usize>,
    statistics: Statistics,
    count: &mut usize,
) -> Scalar {
    if positions.is_empty() {
        *count += 1;
        return Scalar::new(1.0, 0.0);
    }
    let first = positions.remove(0);
    let mut total = Scalar::new(0.0, 0.0);
    for k in 0..positions.len() {
        let partner = positions.remove(k);
        let factor = w.get(letters[first], letters[partner]);
        let sign = if statistics == Statistics::Fermion && k % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        total += factor * sign * matchings(w, letters, positions, statistics, count);
        positions.insert(k, partner);
    }
    positions.insert(0, first);
    total
}

/// `(2k - 1)!!`, the number of perfect matchings of `2k` points.
pub fn double_factorial_odd(k: usize) -> usize {
    (1..=k).map(|j| 2 * j - 1).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w4() -> TwoPointMatrix {
        // distinct entries so every matching is distinguishable
        TwoPointMatrix::new(DMatrix::from_fn(4, 4, |i, j| {
            Scalar::new(1.0 + i as f64 + 10.0 * j as f64, 0.5 * i as f64 - j as f64)
        }))
    }

    fn word(ix: &[u32]) -> Word {
        Word::from_indices(ix).unwrap()
    }

    #[test]
    fn two_letters_read_the_matrix() {
        let w = w4();
        assert_eq!(wick_evaluate(&w, &word(&[3, 2]), Statistics::Boson), w.get(2, 1));
        assert_eq!(wick_evaluate(&w, &word(&[3, 2]), Statistics::Fermion), w.get(2, 1));
    }

    #[test]
    fn four_letters() {
        let w = w4();
        let x = word(&[1, 2, 3, 4]);
        let p = |a: usize, b: usize| w.get(a, b);
        let boson = p(0, 1) * p(2, 3) + p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
        let fermion = p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
        assert!((wick_evaluate(&w, &x, Statistics::Boson) - boson).norm() < 1e-12);
        assert!((wick_evaluate(&w, &x, Statistics::Fermion) - fermion).norm() < 1e-12);
    }

    #[test]
    fn odd_words_vanish_and_unit_is_one() {
        let w = w4();
        assert_eq!(wick_evaluate(&w, &word(&[1, 2, 3]), Statistics::Boson), Scalar::new(0.0, 0.0));
        assert_eq!(wick_evaluate(&w, &Word::unit(), Statistics::Fermion), Scalar::new(1.0, 0.0));
    }

    #[test]
    fn matching_counts() {
        let w = w4();
        for k in 0..=4 {
            let x = Word::from_indices(&vec![1; 2 * k]).unwrap();
            let (_, n) = wick_evaluate_counted(&w, &x, Statistics::Boson);
            assert_eq!(n, double_factorial_odd(k));
        }
        assert_eq!(double_factorial_odd(3), 15);
    }
}
