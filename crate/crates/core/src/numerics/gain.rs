//! Block-diagonal estimator gains and the networked error dynamics.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use super::rng::gaussian;
use super::spectral::{gelfand_bound, spectral_radius};
use super::system::{stream, NumericSystem};
use crate::error::{Error, Result};
use crate::structural::generic_observability;

/// One `n x n` gain block per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub blocks: Vec<DMatrix<f64>>,
}

impl GainMatrix {
    pub fn zeros(agents: usize, n: usize) -> Self {
        Self {
            blocks: vec![DMatrix::zeros(n, n); agents],
        }
    }

    pub fn n(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    /// The full block-diagonal `Nn x Nn` gain.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.n();
        let size = n * self.blocks.len();
        let mut k = DMatrix::zeros(size, size);
        for (i, b) in self.blocks.iter().enumerate() {
            k.view_mut((i * n, i * n), (n, n)).copy_from(b);
        }
        k
    }
}

/// `Â = (W ⊗ A) - K D_C (W ⊗ A)`.
pub fn error_dynamics(sys: &NumericSystem, k: &GainMatrix) -> Result<DMatrix<f64>> {
    let n = sys.n();
    if k.blocks.len() != sys.agent_count() || k.blocks.iter().any(|b| b.shape() != (n, n)) {
        return Err(Error::Dimension(format!(
            "gain has {} blocks of size {}, system needs {} of size {n}",
            k.blocks.len(),
            k.n(),
            sys.agent_count()
        )));
    }
    let b = sys.fused_dynamics();
    let db = sys.dc() * &b;
    Ok(&b - k.assemble() * db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    pub seed: u64,
    /// Accept once `ρ(Â) < 1 - margin`.
    pub margin: f64,
    /// Budget of objective evaluations across all restarts.
    pub max_evaluations: usize,
    pub restarts: usize,
    /// Relative tolerance of each spectral radius evaluation.
    pub tol: f64,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            margin: 1e-3,
            max_evaluations: 400_000,
            restarts: 16,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    pub gain: GainMatrix,
    pub rho: f64,
    /// Objective evaluations used.
    pub iterations: usize,
    pub method: String,
}

pub const GAIN_METHOD: &str = "compass-search";

/// Searches for a block-diagonal `K` with `ρ(Â) < 1 - margin`.
///
/// The distributed structure is checked first; an unobservable one fails
/// fast with [`Error::Structural`]. `K = 0` is returned when `W ⊗ A` is
/// already stable. Otherwise a compass search with random restarts runs
/// over the gain entries that actually reach `Â` (columns of `K^i` inside
/// the support of the `i`th block of `D_C`).
pub fn synthesize_gain(sys: &NumericSystem, config: &GainConfig) -> Result<GainResult> {
    let (big_a, d) = sys.structure();
    let report = generic_observability(&big_a, &d)?;
    if !report.observable {
        return Err(Error::Structural(format!(
            "{} subsystem states reach no output, S-rank deficiency {}",
            report.condition_i_violations.len(),
            report.deficiency
        )));
    }

    let n = sys.n();
    let agents = sys.agent_count();
    let target = 1.0 - config.margin;
    let b = sys.fused_dynamics();
    let db = sys.dc() * &b;

    let rho0 = spectral_radius(&b, config.tol)?;
    if rho0 < target {
        return Ok(GainResult {
            gain: GainMatrix::zeros(agents, n),
            rho: rho0,
            iterations: 1,
            method: "zero".into(),
        });
    }

    // Free variables: (agent, row, col) with col in the support of D_i.
    let mut vars = Vec::new();
    for i in 0..agents {
        let block = sys.measurement_block(i);
        for c in 0..n {
            if block.column(c).iter().any(|&x| x != 0.0) {
                vars.extend((0..n).map(|r| (i, r, c)));
            }
        }
    }

    let mut search = Search {
        b: &b,
        db: &db,
        n,
        evaluations: 1,
    };
    let mut rng = stream(config.seed, 0);
    let mut best = (GainMatrix::zeros(agents, n), rho0);
    let per_restart = config.max_evaluations / config.restarts.max(1);

    for restart in 0..config.restarts.max(1) {
        let mut k = match restart {
            0 => GainMatrix::zeros(agents, n),
            1 => least_squares_start(&b, &db, &vars, agents, n),
            _ => {
                let mut k = best.0.clone();
                let spread = restart as f64 / config.restarts as f64;
                for &(i, r, c) in &vars {
                    k.blocks[i][(r, c)] += spread * gaussian(&mut rng);
                }
                k
            }
        };
        let budget = (search.evaluations + per_restart).min(config.max_evaluations);
        for squarings in SMOOTHING_LEVELS {
            let (next, bound) = search.compass(k, &vars, squarings, target, budget, &mut rng);
            k = next;
            if bound < target {
                break;
            }
        }
        let rho = spectral_radius(&search.closed_loop(&k), config.tol)?;
        if rho < best.1 {
            best = (k, rho);
        }
        if best.1 < target || search.evaluations >= config.max_evaluations {
            break;
        }
    }

    if best.1 < target {
        Ok(GainResult {
            gain: best.0,
            rho: best.1,
            iterations: search.evaluations,
            method: GAIN_METHOD.into(),
        })
    } else {
        Err(Error::NoStabilizingGainFound { best_rho: best.1 })
    }
}

/// Per block, the least-squares `K^i` making `B_i - K^i (D B)_i` small.
fn least_squares_start(
    b: &DMatrix<f64>,
    db: &DMatrix<f64>,
    vars: &[(usize, usize, usize)],
    agents: usize,
    n: usize,
) -> GainMatrix {
    let mut k = GainMatrix::zeros(agents, n);
    for (i, block) in k.blocks.iter_mut().enumerate() {
        let cols: Vec<usize> = {
            let mut cs: Vec<usize> = vars.iter().filter(|v| v.0 == i).map(|v| v.2).collect();
            cs.dedup();
            cs
        };
        if cols.is_empty() {
            continue;
        }
        let bi = b.rows(i * n, n).clone_owned();
        let m = DMatrix::from_fn(cols.len(), b.ncols(), |r, c| db[(i * n + cols[r], c)]);
        // K_S minimizes ‖B_i - K_S M‖, i.e. K_S = B_i M^+.
        if let Ok(pinv) = m.clone().pseudo_inverse(1e-10) {
            let ks = bi * pinv;
            for (j, &c) in cols.iter().enumerate() {
                block.column_mut(c).copy_from(&ks.column(j));
            }
        }
    }
    k
}

/// Squaring depths of the smoothed objective, coarse to fine.
const SMOOTHING_LEVELS: [u32; 3] = [3, 5, 7];

struct Search<'a> {
    b: &'a DMatrix<f64>,
    db: &'a DMatrix<f64>,
    n: usize,
    evaluations: usize,
}

impl Search<'_> {
    fn closed_loop(&self, k: &GainMatrix) -> DMatrix<f64> {
        let mut a_hat = self.b.clone();
        for (i, block) in k.blocks.iter().enumerate() {
            let rows = block * self.db.rows(i * self.n, self.n);
            let mut target = a_hat.rows_mut(i * self.n, self.n);
            target -= rows;
        }
        a_hat
    }

    /// Compass search on the Gelfand bound `‖Â^(2^s)‖^(1/2^s)`, which is
    /// smooth in `K` and never below `ρ(Â)`. Stops early once the bound
    /// itself is under `target`.
    fn compass(
        &mut self,
        mut k: GainMatrix,
        vars: &[(usize, usize, usize)],
        squarings: u32,
        target: f64,
        budget: usize,
        rng: &mut impl Rng,
    ) -> (GainMatrix, f64) {
        let mut a_hat = self.closed_loop(&k);
        let mut value = gelfand_bound(&a_hat, squarings);
        self.evaluations += 1;
        let mut step = 0.25;
        let mut order: Vec<usize> = (0..vars.len()).collect();

        while value >= target && step > 1e-7 && self.evaluations < budget {
            order.shuffle(rng);
            let mut improved = false;
            for &v in &order {
                if self.evaluations >= budget || value < target {
                    break;
                }
                let (i, r, c) = vars[v];
                for delta in [step, -step] {
                    // Moving K^i[r, c] by delta shifts row i*n+r of Â by -delta * (D B)[i*n+c, :].
                    let mut trial = a_hat.clone();
                    {
                        let mut row = trial.row_mut(i * self.n + r);
                        row -= self.db.row(i * self.n + c) * delta;
                    }
                    let trial_value = gelfand_bound(&trial, squarings);
                    self.evaluations += 1;
                    if trial_value < value {
                        value = trial_value;
                        a_hat = trial;
                        k.blocks[i][(r, c)] += delta;
                        improved = true;
                        break;
                    }
                }
            }
            step = if improved { (step * 1.5).min(1.0) } else { step * 0.5 };
        }
        (k, value)
    }
}
