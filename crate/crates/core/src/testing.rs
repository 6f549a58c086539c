//! Seeded generators of random algebra data for tests and benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Element, Generator, Scalar, Word};
use crate::qmap::GeneratorMap;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real and imaginary parts uniform in `[-1, 1]`.
pub fn random_scalar(rng: &mut impl Rng) -> Scalar {
    Scalar::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Length uniform in `0..=max_len`, letters uniform in `1..=block_dim`.
pub fn random_word(rng: &mut impl Rng, block_dim: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    random_word_of_length(rng, block_dim, len)
}

pub fn random_word_of_length(rng: &mut impl Rng, block_dim: usize, len: usize) -> Word {
    let letters = (0..len)
        .map(|_| Generator::new(rng.gen_range(1..=block_dim as u32)).expect("index is positive"))
        .collect();
    Word::new(letters)
}

/// Up to `max_terms` random words of degree `<= max_degree` with random
/// coefficients.
pub fn random_element(rng: &mut impl Rng, block_dim: usize, max_degree: usize, max_terms: usize) -> Element {
    let terms = rng.gen_range(1..=max_terms);
    Element::from_terms((0..terms).map(|_| (random_word(rng, block_dim, max_degree), random_scalar(rng))))
}

/// `x + x*` under the coordinate conjugation.
pub fn random_self_adjoint(rng: &mut impl Rng, block_dim: usize, max_degree: usize, max_terms: usize) -> Element {
    let x = random_element(rng, block_dim, max_degree, max_terms);
    &x + &x.adjoint()
}

/// A *-compatible map between coordinate-conjugated spaces: every image is
/// self-adjoint.
pub fn random_generator_map(
    rng: &mut impl Rng,
    source_dim: usize,
    target_dim: usize,
    max_degree: usize,
    max_terms: usize,
) -> GeneratorMap {
    let images = (0..source_dim)
        .map(|_| random_self_adjoint(rng, target_dim, max_degree, max_terms))
        .collect();
    GeneratorMap::coordinate(images)
}
