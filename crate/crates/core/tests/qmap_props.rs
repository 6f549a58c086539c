use nalgebra::DMatrix;
use proptest::prelude::*;
use qtheory::algebra::{qmap_phi0, Conjugation, Element, Scalar};
use qtheory::qmap::{
    check_core, combine_qmaps, induce_star_hom, CHom, GeneratorMap, MapDocument, QMapError, TestSpace,
};
use qtheory::testing::{random_element, random_generator_map, random_scalar, rng};
use rand::Rng;

const TOL: f64 = 1e-12;

fn random_real_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<Scalar> {
    DMatrix::from_fn(rows, cols, |_, _| Scalar::new(r.gen_range(-1.0..=1.0), 0.0))
}

proptest! {
    #[test]
    fn induced_map_is_multiplicative(seed in any::<u64>(), src in 1usize..=4, tgt in 1usize..=4) {
        let mut r = rng(seed);
        let map = random_generator_map(&mut r, src, tgt, 2, 3);
        let a = random_element(&mut r, src, 3, 4);
        let b = random_element(&mut r, src, 3, 4);
        let lhs = induce_star_hom(&map, &(&a * &b)).unwrap();
        let rhs = induce_star_hom(&map, &a).unwrap() * induce_star_hom(&map, &b).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, TOL * (1.0 + rhs.distance(&Element::zero()))));
    }

    #[test]
    fn induced_map_commutes_with_involution(seed in any::<u64>(), src in 1usize..=4, tgt in 1usize..=4) {
        let mut r = rng(seed);
        let map = random_generator_map(&mut r, src, tgt, 2, 3);
        let a = random_element(&mut r, src, 3, 4);
        let lhs = induce_star_hom(&map, &a.adjoint()).unwrap();
        let rhs = induce_star_hom(&map, &a).unwrap().adjoint();
        prop_assert!(lhs.approx_eq(&rhs, TOL * (1.0 + rhs.distance(&Element::zero()))));
    }

    #[test]
    fn identity_map_is_identity(seed in any::<u64>(), dim in 1usize..=5) {
        let a = random_element(&mut rng(seed), dim, 4, 6);
        let id = GeneratorMap::identity(dim, Conjugation::Coordinate);
        prop_assert_eq!(induce_star_hom(&id, &a).unwrap(), a.clone());
        let via_chom = GeneratorMap::from_chom(&CHom::identity(TestSpace::coordinate(dim).unwrap()));
        prop_assert_eq!(induce_star_hom(&via_chom, &a).unwrap(), a);
    }

    /// Evaluating a Q-map directly agrees with evaluating the universal one
    /// and pushing through the induced homomorphism.
    #[test]
    fn universal_map_is_a_core(seed in any::<u64>(), dim in 1usize..=4) {
        let mut r = rng(seed);
        let map = random_generator_map(&mut r, dim, 3, 2, 3);
        let f: Vec<Scalar> = (0..dim).map(|_| random_scalar(&mut r)).collect();
        let direct = map.evaluate(&f).unwrap();
        let through = induce_star_hom(&map, &qmap_phi0(&f)).unwrap();
        prop_assert!(direct.approx_eq(&through, TOL));
    }

    #[test]
    fn projections_are_idempotent_chom(dim in 1usize..=6, n in 0usize..=6) {
        let p = CHom::projection(dim, n).unwrap();
        let m = p.matrix();
        prop_assert_eq!(m * m, m.clone());
        prop_assert_eq!(p.rank(), n.min(dim));
    }

    #[test]
    fn chom_images_compose(seed in any::<u64>(), src in 1usize..=4, tgt in 1usize..=4) {
        let mut r = rng(seed);
        let h = CHom::new(
            TestSpace::coordinate(src).unwrap(),
            TestSpace::coordinate(tgt).unwrap(),
            random_real_matrix(&mut r, tgt, src),
        ).unwrap();
        let map = GeneratorMap::from_chom(&h);
        prop_assert!(map.is_star_compatible(None, TOL).unwrap());
        let report = check_core(&h);
        prop_assert_eq!(report.surjective, h.rank() == tgt);
        prop_assert_eq!(report.dense_image, report.surjective);
    }
}

#[test]
fn complex_matrix_is_not_a_chom_for_coordinate_conjugation() {
    let space = TestSpace::coordinate(2).unwrap();
    let m = DMatrix::from_fn(2, 2, |i, j| Scalar::new(0.0, if i == j { 1.0 } else { 0.0 }));
    assert!(matches!(CHom::new(space.clone(), space, m), Err(QMapError::Incompatible { .. })));
}

#[test]
fn swap_conjugation_admits_complex_maps() {
    // C swaps the two coordinates; H = [[i, 0], [0, -i]] satisfies H C = C conj(H)
    let space = TestSpace::new(2, Conjugation::pair_swap(1)).unwrap();
    let i = Scalar::new(0.0, 1.0);
    let h = DMatrix::from_row_slice(2, 2, &[i, Scalar::new(0.0, 0.0), Scalar::new(0.0, 0.0), -i]);
    let h = CHom::new(space.clone(), space, h).unwrap();
    assert!(GeneratorMap::from_chom(&h).is_star_compatible(None, TOL).unwrap());
}

#[test]
fn rank_deficient_chom_is_not_a_core() {
    let h = CHom::projection(3, 2).unwrap();
    let r = check_core(&h);
    assert!(!r.surjective && !r.dense_image);
    assert!(check_core(&CHom::identity(TestSpace::coordinate(3).unwrap())).surjective);
}

#[test]
fn combined_maps_act_blockwise() {
    let mut r = rng(3);
    let a = random_generator_map(&mut r, 2, 3, 2, 2);
    let b = random_generator_map(&mut r, 1, 3, 2, 2);
    let c = combine_qmaps(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(c.source_dim(), 3);
    assert_eq!(c.images()[..2], a.images()[..]);
    assert_eq!(c.images()[2], b.images()[0]);
    assert!(c.is_star_compatible(None, TOL).unwrap());
    assert!(matches!(combine_qmaps(&[]), Err(QMapError::NothingToCombine)));
}

#[test]
fn map_documents_round_trip() {
    let h = CHom::projection(3, 2).unwrap();
    let doc = MapDocument::from_chom(&h);
    let json = serde_json::to_string(&doc).unwrap();
    let back: MapDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_chom().unwrap(), h);
    let map = random_generator_map(&mut rng(9), 2, 2, 2, 2);
    let doc = MapDocument::from_generator_map(&map, 2);
    let back = doc.to_generator_map().unwrap();
    for (x, y) in back.images().iter().zip(map.images()) {
        assert!(x.approx_eq(y, 1e-15));
    }
}
