//! Numeric realizations of a structured system.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spectral::spectral_radius;
use crate::error::{Error, Result};
use crate::fusion::{effective_w, kron_pattern, TopologyDesign};
use crate::pattern::SparsityPattern;

/// Default magnitude range for instantiated entries.
pub const DEFAULT_MAGNITUDE: (f64, f64) = (0.5, 2.0);

/// Independent random streams drawn from one seed.
pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const STREAM_A: u64 = 1;
const STREAM_W: u64 = 2;

/// Random matrix whose support is exactly `pattern`: magnitudes uniform in
/// `magnitude_range`, random sign.
pub fn instantiate(pattern: &SparsityPattern, seed: u64, magnitude_range: (f64, f64)) -> DMatrix<f64> {
    instantiate_with(pattern, &mut ChaCha8Rng::seed_from_u64(seed), magnitude_range)
}

fn instantiate_with(
    pattern: &SparsityPattern,
    rng: &mut ChaCha8Rng,
    (lo, hi): (f64, f64),
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(pattern.rows(), pattern.cols());
    for (r, c) in pattern.iter() {
        let mag = if hi > lo { rng.random_range(lo..hi) } else { lo };
        m[(r, c)] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    m
}

/// Row-stochastic fusion weights on the topology's effective `W` pattern
/// (the identity when estimates are not fused). Raw weights are uniform in
/// `[0.5, 1.5]` before row normalization.
pub fn row_stochastic(topo: &TopologyDesign, seed: u64) -> DMatrix<f64> {
    weights_on(&effective_w(topo), &mut ChaCha8Rng::seed_from_u64(seed))
}

fn weights_on(pattern: &SparsityPattern, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = pattern.rows();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let support: Vec<usize> = pattern.row_support(i).collect();
        if support.len() == 1 {
            w[(i, support[0])] = 1.0;
            continue;
        }
        let raw: Vec<f64> = support.iter().map(|_| rng.random_range(0.5..1.5)).collect();
        let total: f64 = raw.iter().sum();
        for (&j, x) in support.iter().zip(raw) {
            w[(i, j)] = x / total;
        }
    }
    w
}

/// How to realize a structure numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericParams {
    pub seed: u64,
    /// Rescale `A` to this spectral radius when set.
    pub rho_target: Option<f64>,
    /// System noise variance (isotropic).
    pub v: f64,
    /// Measurement noise variance, shared by every agent.
    pub r: f64,
}

impl Default for NumericParams {
    fn default() -> Self {
        Self {
            seed: 0,
            rho_target: None,
            v: 0.0,
            r: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericSystem {
    pub a: DMatrix<f64>,
    pub cs: Vec<DMatrix<f64>>,
    /// Row-stochastic state fusion weights.
    pub w: DMatrix<f64>,
    /// Agents whose measurements agent `i` fuses (always containing `i`).
    pub neighborhoods: Vec<Vec<usize>>,
    /// System noise covariance.
    pub v: DMatrix<f64>,
    /// Per-agent measurement noise variance.
    pub r: Vec<f64>,
}

impl NumericSystem {
    pub fn new(
        a: DMatrix<f64>,
        cs: Vec<DMatrix<f64>>,
        w: DMatrix<f64>,
        neighborhoods: Vec<Vec<usize>>,
        v: DMatrix<f64>,
        r: Vec<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let agents = cs.len();
        if !a.is_square() {
            return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if let Some((i, c)) = cs.iter().enumerate().find(|(_, c)| c.ncols() != n) {
            return Err(Error::Dimension(format!("C_{i} has {} columns, expected {n}", c.ncols())));
        }
        if w.shape() != (agents, agents) {
            return Err(Error::Dimension(format!(
                "W is {}x{}, expected {agents}x{agents}",
                w.nrows(),
                w.ncols()
            )));
        }
        if neighborhoods.len() != agents || r.len() != agents {
            return Err(Error::Dimension(format!(
                "{} neighbourhoods and {} noise levels for {agents} agents",
                neighborhoods.len(),
                r.len()
            )));
        }
        if neighborhoods
            .iter()
            .enumerate()
            .any(|(i, d)| !d.contains(&i) || d.iter().any(|&j| j >= agents))
        {
            return Err(Error::Dimension(
                "each neighbourhood must contain its own agent and valid ids".into(),
            ));
        }
        if v.shape() != (n, n) {
            return Err(Error::Dimension(format!("V is {}x{}, expected {n}x{n}", v.nrows(), v.ncols())));
        }
        if r.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Dimension("measurement variances must be nonnegative".into()));
        }
        Ok(Self {
            a,
            cs,
            w,
            neighborhoods,
            v,
            r,
        })
    }

    /// Realizes a structure with a topology: random `A` (optionally rescaled
    /// to `rho_target`), unit entries in every `C_i`, random row-stochastic `W`.
    pub fn from_structure(
        a: &SparsityPattern,
        cs: &[SparsityPattern],
        topo: &TopologyDesign,
        params: &NumericParams,
    ) -> Result<Self> {
        if topo.agent_count() != cs.len() {
            return Err(Error::Dimension(format!(
                "topology has {} agents, system has {}",
                topo.agent_count(),
                cs.len()
            )));
        }
        let n = a.rows();
        let mut a_num = instantiate_with(a, &mut stream(params.seed, STREAM_A), DEFAULT_MAGNITUDE);
        if let Some(target) = params.rho_target {
            let rho = spectral_radius(&a_num, 1e-12)?;
            if rho > 0.0 {
                a_num *= target / rho;
            }
        }
        let cs_num = cs
            .iter()
            .map(|c| DMatrix::from_fn(c.rows(), c.cols(), |r, k| if c.contains(r, k) { 1.0 } else { 0.0 }))
            .collect();
        let w = weights_on(&effective_w(topo), &mut stream(params.seed, STREAM_W));
        let neighborhoods = (0..cs.len())
            .map(|i| {
                if topo.mode.uses_output_fusion() {
                    topo.neighborhood(i)
                } else {
                    vec![i]
                }
            })
            .collect();
        Self::new(
            a_num,
            cs_num,
            w,
            neighborhoods,
            DMatrix::identity(n, n) * params.v,
            vec![params.r; cs.len()],
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn agent_count(&self) -> usize {
        self.cs.len()
    }

    /// `W ⊗ A`.
    pub fn fused_dynamics(&self) -> DMatrix<f64> {
        self.w.kronecker(&self.a)
    }

    /// Block `i` of `D_C`: the sum of `C_j^T C_j` over the neighbourhood of `i`.
    pub fn measurement_block(&self, i: usize) -> DMatrix<f64> {
        let n = self.n();
        self.neighborhoods[i]
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, &j| acc + self.cs[j].transpose() * &self.cs[j])
    }

    /// Block-diagonal `D_C`.
    pub fn dc(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut d = DMatrix::zeros(n * self.agent_count(), n * self.agent_count());
        for i in 0..self.agent_count() {
            d.view_mut((i * n, i * n), (n, n))
                .copy_from(&self.measurement_block(i));
        }
        d
    }

    /// Structural patterns of the distributed pair realized by this system.
    pub fn structure(&self) -> (SparsityPattern, SparsityPattern) {
        let n = self.n();
        let support = |m: &DMatrix<f64>| {
            SparsityPattern::new(
                m.nrows(),
                m.ncols(),
                (0..m.nrows())
                    .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
                    .filter(|&(r, c)| m[(r, c)] != 0.0),
            )
            .expect("indices come from the matrix")
        };
        let big_a = kron_pattern(&support(&self.w), &support(&self.a));
        let size = n * self.agent_count();
        let mut d = SparsityPattern::empty(size, size);
        for (i, hood) in self.neighborhoods.iter().enumerate() {
            for &j in hood {
                for (r, c) in support(&self.cs[j]).gram().iter() {
                    d.insert(i * n + r, i * n + c).expect("block in bounds");
                }
            }
        }
        (big_a, d)
    }
}
