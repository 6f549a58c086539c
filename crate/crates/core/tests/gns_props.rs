use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qtheory::algebra::{Element, Generator, Scalar, Word};
use qtheory::gns::{GnsRep, GnsTruncation};
use qtheory::states::{State, Statistics};
use qtheory::testing::{random_element, random_word, rng};

const D: usize = 3;
const OP_DEGREE: usize = 3;
const TOL: f64 = 1e-10;

fn rep(statistics: Statistics) -> GnsRep {
    let t = GnsTruncation::new(State::ladder_vacuum(1, statistics), 2, D, 2 * D + OP_DEGREE).unwrap();
    GnsRep::build(t).unwrap()
}

fn stats(fermion: bool) -> Statistics {
    if fermion {
        Statistics::Fermion
    } else {
        Statistics::Boson
    }
}

/// Word-coordinate vector of an element supported on basis words.
fn coords(rep: &GnsRep, e: &Element) -> DVector<Scalar> {
    let mut v = DVector::zeros(rep.basis_words().len());
    for (w, c) in e.terms() {
        v[rep.word_index(w).expect("inside the inner window")] = *c;
    }
    v
}

/// Orthonormal coordinates of the class of `e`.
fn class(rep: &GnsRep, e: &Element) -> DVector<Scalar> {
    rep.ortho_basis().adjoint() * rep.gram() * coords(rep, e)
}

fn random_monomial(r: &mut impl rand::Rng, len: usize) -> Element {
    Element::word(qtheory::testing::random_word_of_length(r, 2, len))
}

proptest! {
    #[test]
    fn vacuum_reproduces_the_state(seed in any::<u64>(), fermion in any::<bool>()) {
        let rep = rep(stats(fermion));
        let op = random_element(&mut rng(seed), 2, D, 5);
        let lhs = rep.vacuum_expectation(&op).unwrap();
        let rhs = rep.truncation().state.evaluate(&op).unwrap();
        prop_assert!((lhs - rhs).norm() <= TOL, "{lhs} vs {rhs}");
    }

    #[test]
    fn adjoints_are_conjugate_transposes(seed in any::<u64>(), fermion in any::<bool>()) {
        let rep = rep(stats(fermion));
        let op = random_element(&mut rng(seed), 2, OP_DEGREE, 5);
        let star = op.involute(&rep.truncation().state.conjugation()).unwrap();
        let m = rep.represent(&op).unwrap().matrix;
        let ms = rep.represent(&star).unwrap().matrix;
        prop_assert!((ms - m.adjoint()).norm() <= TOL);
    }

    /// `pi(x y) [w] = pi(x) pi(y) [w]` whenever `|w| + |x| + |y| <= d`.
    #[test]
    fn products_act_as_compositions_inside_the_window(
        seed in any::<u64>(),
        fermion in any::<bool>(),
        lx in 0usize..=D,
        ly in 0usize..=D,
    ) {
        prop_assume!(lx + ly <= D);
        let rep = rep(stats(fermion));
        let mut r = rng(seed);
        let x = random_monomial(&mut r, lx);
        let y = random_monomial(&mut r, ly);
        let w = Element::word(random_word(&mut r, 2, D - lx - ly));
        let u = class(&rep, &w);
        let pxy = rep.represent(&(&x * &y)).unwrap().matrix;
        let px = rep.represent(&x).unwrap().matrix;
        let py = rep.represent(&y).unwrap().matrix;
        prop_assert!((&pxy * &u - &px * (&py * &u)).norm() <= TOL);
        prop_assert!((&pxy * &u - class(&rep, &(&(&x * &y) * &w))).norm() <= TOL);
    }
}

#[test]
fn ortho_basis_is_orthonormal_and_vacuum_is_a_unit_vector() {
    for s in [Statistics::Boson, Statistics::Fermion] {
        let rep = rep(s);
        let o = rep.ortho_basis();
        let id = DMatrix::<Scalar>::identity(rep.rank(), rep.rank());
        assert!((o.adjoint() * rep.gram() * o - id).norm() < 1e-9);
        assert!((rep.vacuum_vector().norm() - 1.0).abs() < 1e-10);
        assert_eq!(rep.rank() + rep.kernel_rank(), rep.basis_words().len());
    }
}

#[test]
fn quotient_dimensions_match_fock_space() {
    // boson: 1, a*, a*a*, a*a*a*; fermion: 1, c*
    assert_eq!(rep(Statistics::Boson).rank(), D + 1);
    assert_eq!(rep(Statistics::Fermion).rank(), 2);
}

#[test]
fn nilpotent_fermion_word_is_null() {
    let rep = rep(Statistics::Fermion);
    let cc = Word::from_indices(&[2, 2]).unwrap();
    let i = rep.word_index(&cc).unwrap();
    assert!(rep.gram().row(i).iter().all(|z| *z == Scalar::new(0.0, 0.0)));
    let e = coords(&rep, &Element::word(cc));
    assert!((rep.kernel_component(&e) - 1.0).abs() < 1e-12);
}

#[test]
fn kernel_is_a_left_ideal() {
    for s in [Statistics::Boson, Statistics::Fermion] {
        let rep = rep(s);
        let state = &rep.truncation().state;
        let conj = state.conjugation();
        for k in 0..rep.kernel_basis().ncols() {
            let v = rep.element(&rep.kernel_basis().column(k).into_owned());
            for g in 1..=2 {
                let gv = &Element::generator(Generator::new(g).unwrap()) * &v;
                let norm = state.evaluate(&(&gv.involute(&conj).unwrap() * &gv)).unwrap();
                assert!(norm.norm() < 1e-9, "generator {g}, null vector {k}: {norm}");
            }
        }
    }
}

#[test]
fn creator_matrix_element_on_the_vacuum_is_one() {
    let rep = rep(Statistics::Boson);
    let m = rep.represent(&Element::g(2)).unwrap().matrix;
    let a_star = class(&rep, &Element::g(2));
    let amp = (a_star.adjoint() * m * rep.vacuum_vector())[(0, 0)];
    assert!((amp - Scalar::new(1.0, 0.0)).norm() < TOL);
}

#[test]
fn two_mode_vacuum_reproduces_moments() {
    let t = GnsTruncation::new(State::ladder_vacuum(2, Statistics::Boson), 4, 2, 6).unwrap();
    let rep = GnsRep::build(t).unwrap();
    let mut r = rng(11);
    for _ in 0..20 {
        let op = random_element(&mut r, 4, 2, 4);
        let lhs = rep.vacuum_expectation(&op).unwrap();
        let rhs = rep.truncation().state.evaluate(&op).unwrap();
        assert!((lhs - rhs).norm() <= TOL);
    }
}
