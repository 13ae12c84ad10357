//! Spectral radius by repeated squaring and numeric observability rank.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SQUARINGS: usize = 64;
const MIN_SQUARINGS: usize = 3;

/// Spectral radius via `ρ(M) = lim ‖M^m‖^(1/m)` with `m = 2^k`.
///
/// The power is renormalized after every squaring and its log-scale carried
/// separately, so neither overflow nor underflow occurs. Stops once two
/// successive estimates differ by less than `tol` relative.
pub fn spectral_radius(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "spectral radius of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let mut b = m.clone();
    // log of the factor dropped from b so far: M^(2^k) = exp(log_scale) * b
    let mut log_scale = 0.0f64;
    let mut power = 1.0f64;
    let mut previous = f64::INFINITY;
    for k in 0..=MAX_SQUARINGS {
        let norm = b.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(if norm == 0.0 { 0.0 } else { f64::INFINITY });
        }
        let log_total = log_scale + norm.ln();
        let estimate = (log_total / power).exp();
        if k >= MIN_SQUARINGS && (estimate - previous).abs() <= tol * estimate {
            return Ok(estimate);
        }
        previous = estimate;
        b /= norm;
        b = &b * &b;
        log_scale = 2.0 * log_total;
        power *= 2.0;
    }
    Ok(previous)
}

/// `‖M^(2^squarings)‖_F^(1 / 2^squarings)`, an upper bound on `ρ(M)` that
/// is smooth in the entries of `M` and tightens as `squarings` grows.
pub fn gelfand_bound(m: &DMatrix<f64>, squarings: u32) -> f64 {
    let mut b = m.clone();
    let mut log_scale = 0.0f64;
    for _ in 0..squarings {
        let norm = b.norm();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { 0.0 } else { f64::INFINITY };
        }
        b /= norm;
        b = &b * &b;
        log_scale = 2.0 * (log_scale + norm.ln());
    }
    let norm = b.norm();
    if norm == 0.0 {
        return 0.0;
    }
    ((log_scale + norm.ln()) / 2f64.powi(squarings as i32)).exp()
}

/// Numeric rank of the observability matrix `[C; CA; ...; CA^(n-1)]`.
///
/// Builds an orthonormal basis of its row space one Krylov block at a time
/// (so unstable `A` never blows up the entries) and keeps a new direction only
/// when its residual exceeds `1e-9` relative to the candidate.
pub fn numeric_observability_rank(a: &DMatrix<f64>, c: &DMatrix<f64>) -> usize {
    const REL: f64 = 1e-9;
    let n = a.nrows();
    let at = a.transpose();
    let floor = 1e-14 * a.norm().max(c.norm()).max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<f64>> = Vec::new();

    let add = |candidate: DVector<f64>, basis: &mut Vec<DVector<f64>>| -> Option<DVector<f64>> {
        let size = candidate.norm();
        if size <= floor {
            return None;
        }
        let mut v = candidate;
        // Two Gram–Schmidt passes for stability.
        for _ in 0..2 {
            for q in basis.iter() {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let residual = v.norm();
        if residual > REL * size && residual > floor {
            v /= residual;
            basis.push(v.clone());
            Some(v)
        } else {
            None
        }
    };

    let mut frontier: Vec<DVector<f64>> = Vec::new();
    for row in c.row_iter() {
        if let Some(q) = add(row.transpose(), &mut basis) {
            frontier.push(q);
        }
    }
    for _ in 1..n {
        if frontier.is_empty() || basis.len() == n {
            break;
        }
        let next: Vec<DVector<f64>> = frontier.iter().map(|q| &at * q).collect();
        frontier = next
            .into_iter()
            .filter_map(|v| add(v, &mut basis))
            .collect();
    }
    basis.len()
}
