//! Spectral-radius certificates for nonnegative matrices.
//!
//! For a nonnegative matrix `M` and any strictly positive vector `w`, the
//! extreme ratios `min_k (Mw)_k / w_k` and `max_k (Mw)_k / w_k` bracket
//! the spectral radius. Power iteration is used only to shrink that
//! bracket; the bracket from the final iterate is valid whether or not
//! the iteration converged, which is what makes the certificates safe to
//! act on after a fixed iteration budget.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::collocation::SparseNonnegMatrix;

/// Default relative width at which the ratio bracket stops shrinking.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Largest dimension accepted by the dense cross-check.
pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("witness entry {value} at index {index} is not strictly positive")]
    NonpositiveWitness { index: usize, value: f64 },
    #[error("tolerance {tol} must be positive")]
    NonpositiveTolerance { tol: f64 },
    #[error("iterate developed a zero entry at index {index} on iteration {iteration}")]
    ZeroIterate { index: usize, iteration: usize },
    #[error("dense cross-check is limited to {limit} rows; got {n}")]
    SizeLimitExceeded { n: usize, limit: usize },
}

/// Outcome of a power run: a two-sided spectral-radius bracket and the
/// positive witness vector it was measured on.
///
/// `cw_lower <= lambda_est <= cw_upper` always holds, and the bracket is
/// valid for the matrix regardless of `converged`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub lambda_est: f64,
    pub cw_lower: f64,
    pub cw_upper: f64,
    /// Witness vector, normalized to unit maximum.
    pub witness: Vec<f64>,
    /// Number of matrix applications performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Collatz-Wielandt bracket `(min_k (Mw)_k / w_k, max_k (Mw)_k / w_k)`
/// for a strictly positive witness `w`.
pub fn collatz_wielandt(m: &SparseNonnegMatrix, w: &[f64]) -> Result<(f64, f64), SpectralError> {
    check_witness(m.n(), w)?;
    let image = m.apply(w).expect("dimension was checked");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (yk, wk) in image.iter().zip(w) {
        let ratio = yk / wk;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

/// Power iteration with Collatz-Wielandt stopping.
///
/// Starts from `seed` (all ones when absent), applies `m` until the ratio
/// bracket is relatively tighter than `tol` or `max_iter` applications
/// have been spent, and reports the bracket of the final witness.
pub fn power_iterate(
    m: &SparseNonnegMatrix,
    tol: f64,
    max_iter: usize,
    seed: Option<&[f64]>,
) -> Result<SpectralResult, SpectralError> {
    if !(tol > 0.0) {
        return Err(SpectralError::NonpositiveTolerance { tol });
    }
    let n = m.n();
    let mut w = match seed {
        Some(seed) => {
            check_witness(n, seed)?;
            normalized(seed)
        }
        None => vec![1.0; n],
    };
    let mut image = vec![0.0; n];
    let mut result = None;
    for iteration in 1..=max_iter.max(1) {
        m.apply_into(&w, &mut image);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (yk, wk) in image.iter().zip(&w) {
            let ratio = yk / wk;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let converged = hi - lo <= tol * lo && lo > 0.0;
        if converged || iteration == max_iter {
            result = Some(SpectralResult {
                lambda_est: 0.5 * (lo + hi),
                cw_lower: lo,
                cw_upper: hi,
                witness: normalized(&w),
                iterations: iteration,
                converged,
            });
            break;
        }
        if let Some(index) = image.iter().position(|&y| y <= 0.0) {
            return Err(SpectralError::ZeroIterate { index, iteration });
        }
        let scale = 1.0 / image.iter().cloned().fold(0.0, f64::max);
        for (wk, yk) in w.iter_mut().zip(&image) {
            *wk = yk * scale;
        }
    }
    Ok(result.expect("loop runs at least once"))
}

/// Spectral radius by dense eigendecomposition, for cross-checks on
/// small matrices.
pub fn dense_spectral_radius(m: &SparseNonnegMatrix) -> Result<f64, SpectralError> {
    let n = m.n();
    if n > DENSE_LIMIT {
        return Err(SpectralError::SizeLimitExceeded {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for row in 0..n {
        let (cols, vals) = m.row_entries(row);
        for (&col, &val) in cols.iter().zip(vals) {
            dense[(row, col as usize)] += val;
        }
    }
    Ok(dense
        .complex_eigenvalues()
        .iter()
        .map(|ev| ev.norm())
        .fold(0.0, f64::max))
}

fn check_witness(n: usize, w: &[f64]) -> Result<(), SpectralError> {
    if w.len() != n {
        return Err(SpectralError::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    for (index, &value) in w.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(SpectralError::NonpositiveWitness { index, value });
        }
    }
    Ok(())
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let max = w.iter().cloned().fold(0.0, f64::max);
    w.iter().map(|&x| x / max).collect()
}
