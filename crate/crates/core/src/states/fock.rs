//! Truncated Fock spaces with explicit ladder matrices, used as the
//! independent oracle for vacuum moments.
//!
//! Mode `k` (zero-based) owns generator `g_{2k+1}` (annihilator) and
//! `g_{2k+2}` (creator). Bosonic modes keep occupations `0..=cutoff`;
//! fermionic modes carry a Jordan-Wigner string over earlier fermionic
//! modes and are exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::wick::Statistics;
use super::StateError;
use crate::algebra::{Element, Generator, Scalar};
use crate::qmap::GeneratorMap;

/// Default boson occupation cutoff.
pub const DEFAULT_CUTOFF: usize = 12;

/// Adaptive evaluation gives up beyond this cutoff.
pub const MAX_CUTOFF: usize = 1 << 12;

/// A ladder operator on the occupation basis: column `j` has at most one
/// nonzero entry.
#[derive(Debug, Clone, PartialEq)]
struct LadderMatrix {
    columns: Vec<Option<(usize, f64)>>,
    /// Boson mode whose top level this operator would push past the cutoff.
    raises: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOracle {
    modes: Vec<Statistics>,
    cutoff: usize,
    strides: Vec<usize>,
    local_dims: Vec<usize>,
    dim: usize,
    letters: Vec<LadderMatrix>,
}

/// A vacuum moment together with the overflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockValue {
    pub value: Scalar,
    /// Some intermediate vector would have needed an occupation above the
    /// cutoff; `value` is then unreliable.
    pub truncated: bool,
}

/// Serialized form `{modes, statistics, cutoff}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    pub modes: usize,
    pub statistics: Statistics,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

impl FockOracle {
    /// Modes with the given statistics, in order. `cutoff >= 1`.
    pub fn new(modes: Vec<Statistics>, cutoff: usize) -> Result<Self, StateError> {
        if cutoff == 0 {
            return Err(StateError::InvalidCutoff);
        }
        let local_dims: Vec<usize> = modes
            .iter()
            .map(|s| match s {
                Statistics::Boson => cutoff + 1,
                Statistics::Fermion => 2,
            })
            .collect();
        let mut strides = vec![1; modes.len()];
        for k in (0..modes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * local_dims[k + 1];
        }
        let dim = local_dims.iter().product();
        let mut oracle = FockOracle {
            modes,
            cutoff,
            strides,
            local_dims,
            dim,
            letters: Vec::new(),
        };
        oracle.letters = (0..oracle.modes.len())
            .flat_map(|k| [oracle.build(k, false), oracle.build(k, true)])
            .collect();
        Ok(oracle)
    }

    pub fn bosons(modes: usize, cutoff: usize) -> Result<Self, StateError> {
        FockOracle::new(vec![Statistics::Boson; modes], cutoff)
    }

    pub fn fermions(modes: usize) -> Result<Self, StateError> {
        FockOracle::new(vec![Statistics::Fermion; modes], 1)
    }

    /// Boson modes first, then fermion modes.
    pub fn mixed(bosons: usize, fermions: usize, cutoff: usize) -> Result<Self, StateError> {
        let mut modes = vec![Statistics::Boson; bosons];
        modes.extend(vec![Statistics::Fermion; fermions]);
        FockOracle::new(modes, cutoff)
    }

    pub fn from_spec(spec: &FockSpec) -> Result<Self, StateError> {
        FockOracle::new(vec![spec.statistics; spec.modes], spec.cutoff)
    }

    /// Homogeneous oracles only.
    pub fn to_spec(&self) -> Option<FockSpec> {
        let first = *self.modes.first()?;
        self.modes.iter().all(|&s| s == first).then_some(FockSpec {
            modes: self.modes.len(),
            statistics: first,
            cutoff: self.cutoff,
        })
    }

    pub fn modes(&self) -> &[Statistics] {
        &self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of ladder generators, `2 * modes`.
    pub fn generator_count(&self) -> usize {
        2 * self.modes.len()
    }

    /// Same modes, different cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self, StateError> {
        FockOracle::new(self.modes.clone(), cutoff)
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.local_dims[mode]
    }

    fn build(&self, mode: usize, creator: bool) -> LadderMatrix {
        let stats = self.modes[mode];
        let columns = (0..self.dim)
            .map(|j| {
                let n = self.occupation(j, mode);
                let sign = if stats == Statistics::Fermion {
                    let parity: usize = (0..mode)
                        .filter(|&m| self.modes[m] == Statistics::Fermion)
                        .map(|m| self.occupation(j, m))
                        .sum();
                    if parity % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                } else {
                    1.0
                };
                let top = self.local_dims[mode] - 1;
                if creator {
                    (n < top).then(|| (j + self.strides[mode], sign * ((n + 1) as f64).sqrt()))
                } else {
                    (n > 0).then(|| (j - self.strides[mode], sign * (n as f64).sqrt()))
                }
            })
            .collect();
        LadderMatrix {
            columns,
            raises: (creator && stats == Statistics::Boson).then_some(mode),
        }
    }

    /// Dense matrix of a ladder generator.
    pub fn ladder_matrix(&self, g: Generator) -> Result<DMatrix<f64>, StateError> {
        let op = self.letter(g)?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, entry) in op.columns.iter().enumerate() {
            if let Some((i, v)) = entry {
                m[(*i, j)] = *v;
            }
        }
        Ok(m)
    }

    fn letter(&self, g: Generator) -> Result<&LadderMatrix, StateError> {
        self.letters.get(g.position()).ok_or(StateError::OutsideBlock {
            index: g.index(),
            block_dim: self.letters.len(),
        })
    }

    pub fn vacuum(&self) -> Vec<Scalar> {
        let mut v = vec![Scalar::new(0.0, 0.0); self.dim];
        v[0] = Scalar::new(1.0, 0.0);
        v
    }

    fn apply_letter(&self, g: Generator, v: &[Scalar], truncated: &mut bool) -> Result<Vec<Scalar>, StateError> {
        let op = self.letter(g)?;
        if let Some(mode) = op.raises {
            let top = self.local_dims[mode] - 1;
            if v
                .iter()
                .enumerate()
                .any(|(j, z)| *z != Scalar::new(0.0, 0.0) && self.occupation(j, mode) == top)
            {
                *truncated = true;
            }
        }
        let mut out = vec![Scalar::new(0.0, 0.0); self.dim];
        for (j, z) in v.iter().enumerate() {
            if let Some((i, x)) = op.columns[j] {
                out[i] += z * x;
            }
        }
        Ok(out)
    }

    /// Applies an element of the ladder algebra to a vector.
    pub fn apply(&self, a: &Element, v: &[Scalar], truncated: &mut bool) -> Result<Vec<Scalar>, StateError> {
        let mut out = vec![Scalar::new(0.0, 0.0); self.dim];
        for (w, c) in a.terms() {
            let mut x = v.to_vec();
            for &g in w.letters().iter().rev() {
                x = self.apply_letter(g, &x, truncated)?;
            }
            for (o, xi) in out.iter_mut().zip(&x) {
                *o += c * xi;
            }
        }
        Ok(out)
    }

    /// `<vac| a |vac>` at this cutoff.
    pub fn moment(&self, a: &Element) -> Result<FockValue, StateError> {
        let mut truncated = false;
        let v = self.apply(a, &self.vacuum(), &mut truncated)?;
        Ok(FockValue {
            value: v[0],
            truncated,
        })
    }

    /// `<vac| a |vac>`, doubling the cutoff until no truncation occurs.
    pub fn moment_adaptive(&self, a: &Element) -> Result<Scalar, StateError> {
        let first = self.moment(a)?;
        if !first.truncated {
            return Ok(first.value);
        }
        let mut cutoff = self.cutoff;
        loop {
            cutoff *= 2;
            if cutoff > MAX_CUTOFF {
                return Err(StateError::Truncation { cutoff: self.cutoff });
            }
            let v = self.with_cutoff(cutoff)?.moment(a)?;
            if !v.truncated {
                return Ok(v.value);
            }
        }
    }

    /// Represents a generator map whose images live in this ladder algebra.
    pub fn represent(&self, map: &GeneratorMap) -> FockRepresentation {
        FockRepresentation {
            oracle: self.clone(),
            images: map.images().to_vec(),
        }
    }
}

/// Vacuum moments of an algebra whose generators act on a Fock space through
/// ladder-algebra images.
#[derive(Debug, Clone, PartialEq)]
pub struct FockRepresentation {
    oracle: FockOracle,
    images: Vec<Element>,
}

impl FockRepresentation {
    pub fn oracle(&self) -> &FockOracle {
        &self.oracle
    }

    /// `pi(a) v` with `pi(g_j) = images[j]`.
    pub fn apply(&self, a: &Element, v: &[Scalar], truncated: &mut bool) -> Result<Vec<Scalar>, StateError> {
        let mut out = vec![Scalar::new(0.0, 0.0); self.oracle.dim()];
        for (w, c) in a.terms() {
            let mut x = v.to_vec();
            for &g in w.letters().iter().rev() {
                let img = self.images.get(g.position()).ok_or(StateError::OutsideBlock {
                    index: g.index(),
                    block_dim: self.images.len(),
                })?;
                x = self.oracle.apply(img, &x, truncated)?;
            }
            for (o, xi) in out.iter_mut().zip(&x) {
                *o += c * xi;
            }
        }
        Ok(out)
    }

    /// `<vac| pi(a) |vac>` with `pi(g_j) = images[j]`.
    pub fn moment(&self, a: &Element) -> Result<FockValue, StateError> {
        let mut truncated = false;
        let v = self.apply(a, &self.oracle.vacuum(), &mut truncated)?;
        Ok(FockValue {
            value: v[0],
            truncated,
        })
    }
}

/// Fock realization of the lattice CCR/CAR catalog with `m` bosonic and `n`
/// fermionic pairs:
///
/// ```text
/// q_a  -> (b_a + b_a*) / sqrt 2      p_a  -> i (b_a* - b_a) / sqrt 2
/// q~_c -> f_c*                       p~_c -> i f_c
/// ```
///
/// which satisfies `[q, p] = i`, `{q~, p~} = i`, `q~^2 = p~^2 = 0`.
pub fn phi6_realization(m: usize, n: usize, cutoff: usize) -> Result<FockRepresentation, StateError> {
    let oracle = FockOracle::mixed(m, n, cutoff)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ann = |mode: usize| Element::g(2 * mode as u32 + 1);
    let cre = |mode: usize| Element::g(2 * mode as u32 + 2);
    let mut images = Vec::with_capacity(2 * (m + n));
    for a in 0..m {
        images.push((&ann(a) + &cre(a)).scale(Scalar::new(s, 0.0)));
    }
    for a in 0..m {
        images.push((&cre(a) - &ann(a)).scale(Scalar::new(0.0, s)));
    }
    for c in 0..n {
        images.push(cre(m + c));
    }
    for c in 0..n {
        images.push(ann(m + c).scale(Scalar::new(0.0, 1.0)));
    }
    Ok(FockRepresentation { oracle, images })
}
