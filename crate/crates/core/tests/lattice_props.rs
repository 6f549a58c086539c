#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use qtheory::algebra::{Conjugation, Element, Scalar, Word};
use qtheory::lattice::{
    convergence_test, embed, ground_two_point, limit_table, EmbeddingScheme, ExperimentConfig, LatticeScalarModel,
    Probe, Verdict,
};
use qtheory::states::{positivity_check, State, Statistics, TwoPointMatrix};

fn flat() -> Probe {
    Probe::interval(0.0, 1.0, 1.0)
}

fn half() -> Probe {
    Probe::interval(0.0, 0.5, 1.0)
}

fn scheme() -> EmbeddingScheme {
    EmbeddingScheme::new(vec![flat(), half()]).unwrap()
}

fn unit_model(n: usize) -> LatticeScalarModel {
    LatticeScalarModel::with_volume(1.0, n, 1.0).unwrap()
}

/// Closed form for two sites: the coupling matrix [[d, -c], [-c, d]] has
/// eigenvectors (1, +-1)/sqrt 2 with eigenvalues d -+ c.
fn two_site_phi_phi(model: &LatticeScalarModel) -> [[f64; 2]; 2] {
    let a = model.spacing();
    let d = 2.0 / (a * a) + model.mass().powi(2);
    let c = 2.0 / (a * a);
    let (lp, lm) = (d - c, d + c);
    let g = |l: f64| 1.0 / (2.0 * a * l.sqrt());
    let diag = 0.5 * (g(lp) + g(lm));
    let off = 0.5 * (g(lp) - g(lm));
    [[diag, off], [off, diag]]
}

#[test]
fn two_site_two_point_matches_closed_form() {
    for (a, m) in [(0.5, 1.0), (0.1, 3.0), (2.0, 0.25)] {
        let model = LatticeScalarModel::new(2, a, m).unwrap();
        let w = ground_two_point(&model);
        let exact = two_site_phi_phi(&model);
        for x in 0..2 {
            for y in 0..2 {
                assert!((w.get(x, y) - Scalar::new(exact[x][y], 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn heavy_flat_probe_sees_a_single_oscillator() {
    // huge mass decouples the sites; the flat mode is exactly 1/(2 m L)
    for m in [1.0, 1e3, 1e6] {
        let model = LatticeScalarModel::with_volume(1.0, 2, m).unwrap();
        let s = embed(&model, &EmbeddingScheme::new(vec![flat()]).unwrap()).unwrap();
        let v = s.evaluate_word(&Word::from_indices(&[1, 1]).unwrap()).unwrap();
        let expected = 1.0 / (2.0 * m * model.volume());
        assert!((v.re - expected).abs() <= 1e-12 * expected.max(1.0), "m = {m}");
        assert_eq!(v.im, 0.0);
    }
}

#[test]
fn site_correlations_are_translation_invariant_and_symmetric() {
    let model = unit_model(12);
    let w = ground_two_point(&model);
    let n = model.sites();
    for x in 0..n {
        for y in 0..n {
            let shifted = w.get((x + 1) % n, (y + 1) % n);
            assert!((w.get(x, y) - shifted).norm() < 1e-12);
            assert!((w.get(x, y) - w.get(y, x)).norm() < 1e-12);
            assert!((w.get(n + x, n + y) - w.get(n + y, n + x)).norm() < 1e-12);
        }
    }
}

#[test]
fn heisenberg_bound_holds_at_every_site() {
    for n in [2, 8, 32] {
        let model = unit_model(n);
        let w = ground_two_point(&model);
        let a = model.spacing();
        for x in 0..n {
            let product = w.get(x, x).re * w.get(n + x, n + x).re;
            assert!(product >= 1.0 / (4.0 * a * a) - 1e-9, "N = {n}, x = {x}");
        }
    }
}

#[test]
fn smeared_fields_obey_the_ccr() {
    for n in [8, 16, 32] {
        let model = unit_model(n);
        let s = embed(&model, &scheme()).unwrap();
        let a = model.spacing();
        for (j, probe) in scheme().probes().iter().enumerate() {
            let f = probe.sample(&model);
            let sum_sq: f64 = f.iter().map(|v| v * v).sum();
            let (phi, pi) = (2 * j as u32 + 1, 2 * j as u32 + 2);
            let comm = &(Element::g(phi) * Element::g(pi)) - &(Element::g(pi) * Element::g(phi));
            let v = s.evaluate(&comm).unwrap();
            assert!((v - Scalar::new(0.0, a * sum_sq)).norm() < 1e-12);
        }
    }
}

#[test]
fn smeared_field_variances_are_real_and_positive() {
    let s = embed(&unit_model(16), &scheme()).unwrap();
    for g in 1..=4 {
        let v = s.evaluate_word(&Word::from_indices(&[g, g]).unwrap()).unwrap();
        assert!(v.re > 0.0 && v.im == 0.0);
    }
}

#[test]
fn embedding_is_deterministic() {
    let a = embed(&unit_model(16), &scheme()).unwrap();
    let b = embed(&unit_model(16), &scheme()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn embedded_states_are_positive() {
    for n in [8, 16, 32] {
        let s = embed(&unit_model(n), &scheme()).unwrap();
        let r = positivity_check(&s, 4, 2, 1e-9).unwrap();
        assert!(r.positive, "N = {n}: {r:?}");
    }
}

proptest! {
    #[test]
    fn restriction_is_compatible(n in 1usize..=4, m in 1usize..=4, size in 4usize..=16) {
        prop_assume!(n <= m);
        let s = embed(&unit_model(size), &scheme()).unwrap();
        let direct = s.restrict(n);
        let nested = s.restrict(m).restrict(n);
        for w in Word::enumerate(n, 4) {
            prop_assert_eq!(direct.evaluate_word(&w).unwrap(), nested.evaluate_word(&w).unwrap());
        }
    }
}

/// Degree-2 moments of the half-interval field converge at second order.
#[test]
fn half_interval_field_refines_quadratically() {
    let probe = EmbeddingScheme::new(vec![half()]).unwrap();
    let states: Vec<State> = [8, 16, 32, 64, 128]
        .iter()
        .map(|&n| embed(&unit_model(n), &probe).unwrap())
        .collect();
    let report = convergence_test(&states, 1, 2, 1e-6).unwrap();
    let level1 = &report.levels[0];
    for r in level1.ratios.iter().flatten() {
        assert!(*r <= 0.6, "{:?}", level1.ratios);
    }
}

#[test]
fn constant_sequence_converges_with_zero_deltas() {
    let s = embed(&unit_model(8), &scheme()).unwrap();
    let report = convergence_test(&[s.clone(), s.clone(), s.clone(), s], 2, 4, 1e-6).unwrap();
    assert_eq!(report.verdict, Verdict::Converged);
    assert!(report.levels.iter().all(|l| l.deltas.iter().all(|d| *d == 0.0)));
}

#[test]
fn alternating_sequence_does_not_converge() {
    let a = embed(&unit_model(8), &scheme()).unwrap();
    let b = embed(&LatticeScalarModel::with_volume(1.0, 8, 2.0).unwrap(), &scheme()).unwrap();
    let report = convergence_test(&[a.clone(), b.clone(), a, b], 2, 4, 1e-6).unwrap();
    assert_eq!(report.levels[0].verdict, Verdict::NotConverged);
    assert_eq!(report.verdict, Verdict::NotConverged);
}

/// Once a sequence has converged, every tabulated word's values settle
/// within eps of the limit table.
#[test]
fn converged_sequences_assemble_into_a_limit_state() {
    // W_i = W + 4^-i E: deltas shrink geometrically
    let base = ground_two_point_on_probes(16);
    let bump = DMatrix::from_fn(4, 4, |i, j| Scalar::new(if i == j { 0.3 } else { 0.05 }, 0.0));
    let states: Vec<State> = (0..14)
        .map(|i| {
            let w = &base + &bump * Scalar::new(0.25f64.powi(i), 0.0);
            State::quasi_free(Statistics::Boson, TwoPointMatrix::new(w), Conjugation::Coordinate)
        })
        .collect();
    let eps = 1e-6;
    let report = convergence_test(&states, 2, 4, eps).unwrap();
    assert_eq!(report.verdict, Verdict::Converged, "{report:?}");
    let limit = State::MomentTable(limit_table(&states, 2, 4).unwrap());
    for w in Word::enumerate(4, 4) {
        let target = limit.evaluate_word(&w).unwrap();
        for s in &states[states.len() - 2..] {
            assert!((s.evaluate_word(&w).unwrap() - target).norm() < eps);
        }
    }
}

fn ground_two_point_on_probes(n: usize) -> DMatrix<Scalar> {
    match embed(&unit_model(n), &scheme()).unwrap() {
        State::QuasiFree { two_point, .. } => two_point.matrix().clone(),
        other => panic!("unexpected state {other:?}"),
    }
}

#[test]
fn experiment_runs_from_json() {
    let text = r#"{"L": 1.0, "m": 1.0, "sizes": [8, 16, 32],
        "probes": [{"breakpoints": [0.0, 1.0], "values": [1.0]}], "dmax": 2}"#;
    let config: ExperimentConfig = serde_json::from_str(text).unwrap();
    let report = config.run().unwrap();
    assert_eq!(report.levels.len(), 2);
    assert_eq!(report.dmax, 2);
    let bad = r#"{"L": 1.0, "m": 0.0, "sizes": [8, 16, 32], "probes": [{"breakpoints": [0.0, 1.0], "values": [1.0]}]}"#;
    let config: ExperimentConfig = serde_json::from_str(bad).unwrap();
    assert!(config.run().is_err());
}

#[test]
fn embedding_matches_direct_smearing() {
    // independent recomputation of <phi(f) phi(g)> from the site matrix
    let model = unit_model(8);
    let w = ground_two_point(&model);
    let a = model.spacing();
    let f = flat().sample(&model);
    let g = half().sample(&model);
    let mut expected = 0.0;
    for x in 0..8 {
        for y in 0..8 {
            expected += a * a * f[x] * g[y] * w.get(x, y).re;
        }
    }
    let s = embed(&model, &scheme()).unwrap();
    let v = s.evaluate_word(&Word::from_indices(&[1, 3]).unwrap()).unwrap();
    assert!((v.re - expected).abs() < 1e-12);
}
