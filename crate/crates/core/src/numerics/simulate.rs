//! Simulation of the single time-scale networked estimator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::gain::GainMatrix;
use super::rng::gaussian;
use super::system::{stream, NumericSystem};
use crate::error::{Error, Result};

/// Squared-error level above which a run counts as diverging.
pub const DIVERGENCE_LEVEL: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorInit {
    /// Every agent starts at the origin.
    Zero,
    /// Every agent starts at the true initial state.
    Truth,
    /// Explicit per-agent initial estimates.
    Given(Vec<DVector<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub steps: usize,
    pub seed: u64,
    /// Initial state entries are uniform in this range.
    pub x0_range: (f64, f64),
    pub init: EstimatorInit,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            seed: 0,
            x0_range: (0.0, 3.0),
            init: EstimatorInit::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub seed: u64,
    pub steps: usize,
    /// True state at steps `0..=steps`.
    pub states: Vec<DVector<f64>>,
    /// `estimates[k][i]`: agent `i`'s estimate after step `k`.
    pub estimates: Vec<Vec<DVector<f64>>>,
    /// `sq_errors[k][i]`: squared estimation error of agent `i`, summed over states.
    pub sq_errors: Vec<Vec<f64>>,
}

impl SimulationTrace {
    pub fn agent_count(&self) -> usize {
        self.sq_errors.first().map_or(0, Vec::len)
    }

    /// Stacked error `[e^1; ...; e^N]` at step `k`.
    pub fn stacked_error(&self, k: usize) -> DVector<f64> {
        let parts: Vec<f64> = self.estimates[k]
            .iter()
            .flat_map(|xh| (&self.states[k] - xh).iter().copied().collect::<Vec<_>>())
            .collect();
        DVector::from_vec(parts)
    }

    /// Squared-error series of one agent.
    pub fn series(&self, agent: usize) -> Vec<f64> {
        self.sq_errors.iter().map(|row| row[agent]).collect()
    }
}

/// Draws `N(0, cov)` samples through a symmetric square root of `cov`.
struct NoiseShape {
    root: Option<DMatrix<f64>>,
}

impl NoiseShape {
    fn new(cov: &DMatrix<f64>) -> Self {
        if cov.iter().all(|&x| x == 0.0) {
            return Self { root: None };
        }
        let eig = cov.clone().symmetric_eigen();
        let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt);
        Self { root: Some(root) }
    }

    fn sample(&self, rng: &mut impl Rng, n: usize) -> DVector<f64> {
        match &self.root {
            None => DVector::zeros(n),
            Some(root) => root * DVector::from_fn(n, |_, _| gaussian(rng)),
        }
    }
}

/// Runs the estimator for `config.steps` steps.
///
/// Each step propagates the plant with Gaussian noise, then every agent fuses
/// its neighbours' predictions
/// `x̂^i_{k|k-1} = Σ_j w_ij A x̂^j_{k-1}` and corrects with the fused innovation
/// `K^i Σ_{j ∈ D_i} C_j^T (y^j_k - C_j x̂^i_{k|k-1})`.
pub fn simulate_nke(sys: &NumericSystem, k: &GainMatrix, config: &SimConfig) -> Result<SimulationTrace> {
    let n = sys.n();
    let agents = sys.agent_count();
    if config.steps == 0 {
        return Err(Error::Dimension("simulation needs at least one step".into()));
    }
    if k.blocks.len() != agents || k.blocks.iter().any(|b| b.shape() != (n, n)) {
        return Err(Error::Dimension(format!(
            "gain has {} blocks of size {}, system needs {agents} of size {n}",
            k.blocks.len(),
            k.n()
        )));
    }

    let mut rng = stream(config.seed, 0);
    let (lo, hi) = config.x0_range;
    let mut x = DVector::from_fn(n, |_, _| if hi > lo { rng.random_range(lo..hi) } else { lo });
    let mut xh: Vec<DVector<f64>> = match &config.init {
        EstimatorInit::Zero => vec![DVector::zeros(n); agents],
        EstimatorInit::Truth => vec![x.clone(); agents],
        EstimatorInit::Given(v) => {
            if v.len() != agents || v.iter().any(|e| e.len() != n) {
                return Err(Error::Dimension("initial estimates do not match the system".into()));
            }
            v.clone()
        }
    };

    let v_noise = NoiseShape::new(&sys.v);
    let r_noise: Vec<f64> = sys.r.iter().map(|r| r.sqrt()).collect();
    let ct: Vec<DMatrix<f64>> = sys.cs.iter().map(|c| c.transpose()).collect();

    let sq = |x: &DVector<f64>, xh: &[DVector<f64>]| xh.iter().map(|e| (x - e).norm_squared()).collect();
    let mut states = vec![x.clone()];
    let mut sq_errors = vec![sq(&x, &xh)];
    let mut estimates = vec![xh.clone()];

    for _ in 0..config.steps {
        x = &sys.a * &x + v_noise.sample(&mut rng, n);
        let ys: Vec<DVector<f64>> = sys
            .cs
            .iter()
            .zip(&r_noise)
            .map(|(c, &s)| {
                let noise = DVector::from_fn(c.nrows(), |_, _| s * gaussian(&mut rng));
                c * &x + noise
            })
            .collect();
        let propagated: Vec<DVector<f64>> = xh.iter().map(|e| &sys.a * e).collect();
        xh = (0..agents)
            .map(|i| {
                let mut pred = DVector::zeros(n);
                for (j, p) in propagated.iter().enumerate() {
                    let w = sys.w[(i, j)];
                    if w != 0.0 {
                        pred.axpy(w, p, 1.0);
                    }
                }
                let mut innovation = DVector::zeros(n);
                for &j in &sys.neighborhoods[i] {
                    innovation += &ct[j] * (&ys[j] - &sys.cs[j] * &pred);
                }
                pred + &k.blocks[i] * innovation
            })
            .collect();
        sq_errors.push(sq(&x, &xh));
        states.push(x.clone());
        estimates.push(xh.clone());
    }

    Ok(SimulationTrace {
        seed: config.seed,
        steps: config.steps,
        states,
        estimates,
        sq_errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    /// Mean squared error over the second half of the run.
    pub last_half_mean: f64,
    /// Per-step geometric growth of the squared error over the second half
    /// (exponential of the least-squares slope of its logarithm).
    pub growth_ratio: f64,
    pub final_value: f64,
    pub diverging: bool,
}

/// Per-agent summary of a trace.
pub fn summarize(trace: &SimulationTrace) -> Vec<AgentSummary> {
    let start = trace.steps / 2;
    (0..trace.agent_count())
        .map(|i| {
            let series = trace.series(i);
            let tail = &series[start..];
            let half = (trace.steps - start).max(1);
            let last_half_mean = series[series.len() - half..].iter().sum::<f64>() / half as f64;
            let growth_ratio = growth_ratio(tail);
            let final_value = *series.last().expect("trace is nonempty");
            AgentSummary {
                last_half_mean,
                growth_ratio,
                final_value,
                diverging: !final_value.is_finite() || final_value > DIVERGENCE_LEVEL,
            }
        })
        .collect()
}

/// `exp` of the least-squares slope of `ln(series)` against the step index.
pub fn growth_ratio(series: &[f64]) -> f64 {
    if series.len() < 2 {
        return 1.0;
    }
    let logs: Vec<f64> = series.iter().map(|&e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let m = logs.len() as f64;
    let t_mean = (m - 1.0) / 2.0;
    let l_mean = logs.iter().sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, l) in logs.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (l - l_mean);
        den += dt * dt;
    }
    (num / den).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{error_dynamics, NumericParams};
    use crate::testbed;

    fn testbed_system(v: f64, r: f64) -> NumericSystem {
        let tb = testbed::plant();
        let params = NumericParams {
            seed: 5,
            rho_target: Some(1.1),
            v,
            r,
        };
        NumericSystem::from_structure(&tb.a, &tb.cs, &testbed::combined_topology(), &params).unwrap()
    }

    fn some_gain(n: usize, agents: usize) -> GainMatrix {
        GainMatrix {
            blocks: (0..agents)
                .map(|i| DMatrix::from_fn(n, n, |r, c| 0.1 * ((r + 2 * c + i) % 5) as f64 - 0.2))
                .collect(),
        }
    }

    #[test]
    fn exact_start_without_noise_stays_exact() {
        let sys = testbed_system(0.0, 0.0);
        let cfg = SimConfig {
            steps: 30,
            init: EstimatorInit::Truth,
            ..Default::default()
        };
        let t = simulate_nke(&sys, &some_gain(7, 3), &cfg).unwrap();
        assert_eq!(t.sq_errors.len(), 31);
        // Fusion weights sum to one only up to rounding.
        assert!(t.sq_errors.iter().flatten().all(|&e| e < 1e-20));
        let isolated = NumericSystem {
            w: DMatrix::identity(3, 3),
            ..sys
        };
        let t = simulate_nke(&isolated, &some_gain(7, 3), &cfg).unwrap();
        assert!(t.sq_errors.iter().flatten().all(|&e| e == 0.0));
    }

    #[test]
    fn noise_free_error_follows_error_dynamics() {
        let sys = testbed_system(0.0, 0.0);
        let k = some_gain(7, 3);
        let a_hat = error_dynamics(&sys, &k).unwrap();
        let cfg = SimConfig {
            steps: 20,
            seed: 4,
            ..Default::default()
        };
        let t = simulate_nke(&sys, &k, &cfg).unwrap();
        for step in 1..=20 {
            let predicted = &a_hat * t.stacked_error(step - 1);
            let actual = t.stacked_error(step);
            assert!((predicted - &actual).norm() <= 1e-10 * (1.0 + actual.norm()));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let sys = testbed_system(0.05, 0.2);
        let k = some_gain(7, 3);
        let cfg = SimConfig {
            steps: 15,
            seed: 99,
            ..Default::default()
        };
        let a = simulate_nke(&sys, &k, &cfg).unwrap();
        assert_eq!(a, simulate_nke(&sys, &k, &cfg).unwrap());
        let other = SimConfig { seed: 100, ..cfg };
        assert_ne!(a, simulate_nke(&sys, &k, &other).unwrap());
    }

    #[test]
    fn zero_gain_diverges_on_unstable_plant() {
        let sys = testbed_system(0.05, 0.2);
        let t = simulate_nke(&sys, &GainMatrix::zeros(3, 7), &SimConfig::default()).unwrap();
        let s = summarize(&t);
        assert!(s.iter().all(|a| a.growth_ratio > 1.0));
    }

    #[test]
    fn growth_ratio_of_geometric_series() {
        let s: Vec<f64> = (0..10).map(|k| 3.0 * 1.5f64.powi(k)).collect();
        assert!((growth_ratio(&s) - 1.5).abs() < 1e-12);
        assert_eq!(growth_ratio(&[2.0]), 1.0);
    }

    #[test]
    fn rejects_zero_steps() {
        let sys = testbed_system(0.0, 0.0);
        let cfg = SimConfig {
            steps: 0,
            ..Default::default()
        };
        assert!(simulate_nke(&sys, &some_gain(7, 3), &cfg).is_err());
    }
}
