//! Free scalar field on a periodic lattice: ground-state two-point data,
//! embedding through fixed smearing probes, and the Cauchy test for
//! level-wise convergence of reduced states.
//!
//! Site operators obey `[phi_x, pi_y] = i delta_xy / a`, so that smeared
//! fields `phi(f) = a sum_x f(x) phi_x` satisfy
//! `[phi(f), pi(g)] = i a sum_x f(x) g(x)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::algebra::{Conjugation, Scalar, Word};
use crate::states::{MomentTable, State, StateError, Statistics, TwoPointMatrix};

pub const DEFAULT_DMAX: usize = 4;
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("a periodic lattice needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("probe {probe}: {message}")]
    InvalidProbe { probe: usize, message: String },
    #[error("probe {0} has empty support on the lattice")]
    EmptySupport(usize),
    #[error("convergence test needs at least 3 states, got {0}")]
    TooFewStates(usize),
    #[error("state {index} has block dimension {found}, expected {expected}")]
    InconsistentBlock { index: usize, found: usize, expected: usize },
    #[error("experiment needs at least one probe")]
    NoProbes,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Periodic chain of `sites` points with spacing `spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeScalarModel {
    sites: usize,
    spacing: f64,
    mass: f64,
}

impl LatticeScalarModel {
    pub fn new(sites: usize, spacing: f64, mass: f64) -> Result<Self, LatticeError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites));
        }
        if spacing.is_nan() || spacing <= 0.0 {
            return Err(LatticeError::NonPositiveSpacing(spacing));
        }
        if mass.is_nan() || mass <= 0.0 {
            return Err(LatticeError::NonPositiveMass(mass));
        }
        Ok(LatticeScalarModel { sites, spacing, mass })
    }

    /// `sites` points covering the physical volume `length`.
    pub fn with_volume(length: f64, sites: usize, mass: f64) -> Result<Self, LatticeError> {
        Self::new(sites, length / sites as f64, mass)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn volume(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    /// `-Laplacian / a^2 + m^2` with periodic bonds.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let n = self.sites;
        let a2 = self.spacing * self.spacing;
        let mut k = DMatrix::from_diagonal_element(n, n, 2.0 / a2 + self.mass * self.mass);
        for x in 0..n {
            let y = (x + 1) % n;
            k[(x, y)] -= 1.0 / a2;
            k[(y, x)] -= 1.0 / a2;
        }
        k
    }
}

/// Ground-state two-point function on `[phi_0..phi_{N-1}, pi_0..pi_{N-1}]`:
/// `<phi phi> = K^{-1/2} / 2a`, `<pi pi> = K^{1/2} / 2a`,
/// `<phi_x pi_y> = i delta_xy / 2a`.
pub fn ground_two_point(model: &LatticeScalarModel) -> TwoPointMatrix {
    let n = model.sites;
    let a = model.spacing;
    let eig = SymmetricEigen::new(model.coupling_matrix());
    let u = &eig.eigenvectors;
    let spectral = |f: &dyn Fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
        let m = u * d * u.transpose();
        (&m + m.transpose()) * 0.5
    };
    let phiphi = spectral(&|l| 1.0 / (2.0 * a * l.sqrt()));
    let pipi = spectral(&|l| l.sqrt() / (2.0 * a));
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for x in 0..n {
        for y in 0..n {
            w[(x, y)] = Scalar::new(phiphi[(x, y)], 0.0);
            w[(n + x, n + y)] = Scalar::new(pipi[(x, y)], 0.0);
        }
        w[(x, n + x)] = Scalar::new(0.0, 0.5 / a);
        w[(n + x, x)] = Scalar::new(0.0, -0.5 / a);
    }
    TwoPointMatrix::new(w)
}

/// Piecewise-constant profile: `values[i]` on `[breakpoints[i],
/// breakpoints[i+1])`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Probe {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        Probe { breakpoints, values }
    }

    /// The constant `value` on `[start, end)`.
    pub fn interval(start: f64, end: f64, value: f64) -> Self {
        Probe::new(vec![start, end], vec![value])
    }

    fn validate(&self, index: usize) -> Result<(), LatticeError> {
        let bad = |message: &str| LatticeError::InvalidProbe {
            probe: index,
            message: message.to_string(),
        };
        if self.breakpoints.len() != self.values.len() + 1 {
            return Err(bad("needs exactly one more breakpoint than values"));
        }
        if self.breakpoints.iter().chain(&self.values).any(|x| !x.is_finite()) {
            return Err(bad("breakpoints and values must be finite"));
        }
        if self.breakpoints.windows(2).any(|p| p[0] >= p[1]) {
            return Err(bad("breakpoints must be strictly increasing"));
        }
        Ok(())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .find(|(p, _)| p[0] <= x && x < p[1])
            .map_or(0.0, |(_, v)| *v)
    }

    /// Samples at the cell midpoints `(j + 1/2) a`.
    pub fn sample(&self, model: &LatticeScalarModel) -> Vec<f64> {
        (0..model.sites)
            .map(|j| self.value_at((j as f64 + 0.5) * model.spacing))
            .collect()
    }
}

/// Generator `2j - 1` is `phi(f_j)`, generator `2j` is `pi(f_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingScheme {
    probes: Vec<Probe>,
}

impl EmbeddingScheme {
    pub fn new(probes: Vec<Probe>) -> Result<Self, LatticeError> {
        if probes.is_empty() {
            return Err(LatticeError::NoProbes);
        }
        for (i, p) in probes.iter().enumerate() {
            p.validate(i)?;
        }
        Ok(EmbeddingScheme { probes })
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn generator_count(&self) -> usize {
        2 * self.probes.len()
    }

    /// Smearing matrix `C` with `g = sum_s C[g][s] site_s`, sites ordered
    /// as in [`ground_two_point`].
    pub fn smearing(&self, model: &LatticeScalarModel) -> Result<DMatrix<f64>, LatticeError> {
        let n = model.sites;
        let mut c = DMatrix::zeros(self.generator_count(), 2 * n);
        for (j, probe) in self.probes.iter().enumerate() {
            let f = probe.sample(model);
            if f.iter().all(|v| *v == 0.0) {
                return Err(LatticeError::EmptySupport(j));
            }
            for (x, v) in f.iter().enumerate() {
                c[(2 * j, x)] = model.spacing * v;
                c[(2 * j + 1, n + x)] = model.spacing * v;
            }
        }
        Ok(c)
    }
}

/// Ground state pushed forward to the probe generators: quasi-free with
/// `W = C W_site C^T`, self-adjoint generators.
pub fn embed(model: &LatticeScalarModel, scheme: &EmbeddingScheme) -> Result<State, LatticeError> {
    let c = scheme.smearing(model)?.map(|x| Scalar::new(x, 0.0));
    let site = ground_two_point(model);
    let w = &c * site.matrix() * c.transpose();
    Ok(State::quasi_free(Statistics::Boson, TwoPointMatrix::new(w), Conjugation::Coordinate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    NotConverged,
    Inconclusive,
}

/// Cauchy deltas of one reduced level: `deltas[i] = max_w |omega_i(w) -
/// omega_{i+1}(w)|` over words in generators `1..=level` of length `<= dmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub deltas: Vec<f64>,
    /// `deltas[i + 1] / deltas[i]`, `null` where `deltas[i]` is zero.
    pub ratios: Vec<Option<f64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelReport>,
    pub verdict: Verdict,
    pub eps: f64,
    pub dmax: usize,
}

impl ConvergenceReport {
    /// Largest ratio of successive deltas over all levels, ignoring
    /// undefined ratios.
    pub fn max_ratio(&self) -> Option<f64> {
        self.levels
            .iter()
            .flat_map(|l| l.ratios.iter().flatten().copied())
            .reduce(f64::max)
    }

    /// One row per transition, labelled by `labels[i + 1]`, one column per
    /// level.
    pub fn to_csv(&self, labels: &[String], fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("size");
        for l in &self.levels {
            out.push_str(&format!(",level_{}", l.level));
        }
        out.push('\n');
        let rows = self.levels.first().map_or(0, |l| l.deltas.len());
        for i in 0..rows {
            let label = labels.get(i + 1).cloned().unwrap_or_else(|| (i + 1).to_string());
            out.push_str(&label);
            for l in &self.levels {
                out.push(',');
                out.push_str(&fmt(l.deltas[i]));
            }
            out.push('\n');
        }
        out
    }
}

fn level_verdict(deltas: &[f64], eps: f64) -> Verdict {
    let tail = &deltas[deltas.len().saturating_sub(3)..];
    let last = *tail.last().expect("at least two deltas");
    if last < eps && tail.windows(2).all(|p| p[1] <= p[0]) {
        Verdict::Converged
    } else if tail.iter().all(|d| *d >= eps) && tail.windows(2).all(|p| p[1] >= p[0]) {
        Verdict::NotConverged
    } else {
        Verdict::Inconclusive
    }
}

/// Compares consecutive reduced states `restrict(omega_i, n)` for every
/// level `n <= 2K` over all words of length `<= dmax`.
pub fn convergence_test(states: &[State], k: usize, dmax: usize, eps: f64) -> Result<ConvergenceReport, LatticeError> {
    if states.len() < 3 {
        return Err(LatticeError::TooFewStates(states.len()));
    }
    let block = 2 * k;
    for (index, s) in states.iter().enumerate() {
        if s.block_dim() != block {
            return Err(LatticeError::InconsistentBlock {
                index,
                found: s.block_dim(),
                expected: block,
            });
        }
    }
    let mut levels = Vec::with_capacity(block);
    for level in 1..=block {
        let words = Word::enumerate(level, dmax);
        let values = states
            .iter()
            .map(|s| {
                let r = s.restrict(level);
                words.iter().map(|w| r.evaluate_word(w)).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let deltas: Vec<f64> = values
            .windows(2)
            .map(|p| p[0].iter().zip(&p[1]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .collect();
        let ratios = deltas
            .windows(2)
            .map(|p| (p[0] > 0.0).then(|| p[1] / p[0]))
            .collect();
        let verdict = level_verdict(&deltas, eps);
        levels.push(LevelReport {
            level,
            deltas,
            ratios,
            verdict,
        });
    }
    let verdict = if levels.iter().all(|l| l.verdict == Verdict::Converged) {
        Verdict::Converged
    } else if levels.iter().any(|l| l.verdict == Verdict::NotConverged) {
        Verdict::NotConverged
    } else {
        Verdict::Inconclusive
    };
    Ok(ConvergenceReport {
        levels,
        verdict,
        eps,
        dmax,
    })
}

/// Moments of the last state on all words of length `<= dmax`, taken as the
/// limit once a sequence has converged.
pub fn limit_table(states: &[State], k: usize, dmax: usize) -> Result<MomentTable, LatticeError> {
    let last = states.last().ok_or(LatticeError::TooFewStates(0))?;
    let words = Word::enumerate(2 * k, dmax);
    let moments = words
        .into_iter()
        .map(|w| last.evaluate_word(&w).map(|v| (w, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MomentTable::new(2 * k, dmax, moments)?)
}

/// A continuum-limit run: lattices of the given sizes on `[0, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "L")]
    pub length: f64,
    pub m: f64,
    pub sizes: Vec<usize>,
    pub probes: Vec<Probe>,
    #[serde(default = "default_dmax")]
    pub dmax: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_dmax() -> usize {
    DEFAULT_DMAX
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl ExperimentConfig {
    pub fn states(&self) -> Result<Vec<State>, LatticeError> {
        let scheme = EmbeddingScheme::new(self.probes.clone())?;
        self.sizes
            .iter()
            .map(|&n| embed(&LatticeScalarModel::with_volume(self.length, n, self.m)?, &scheme))
            .collect()
    }

    pub fn run(&self) -> Result<ConvergenceReport, LatticeError> {
        convergence_test(&self.states()?, self.probes.len(), self.dmax, self.eps)
    }
}
