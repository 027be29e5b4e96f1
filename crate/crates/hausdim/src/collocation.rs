//! Assembly of the bracket matrices `A_s <= L_s <= B_s`.
//!
//! Each collocation row evaluates the transfer operator at a mesh node:
//! the image of the node under every branch map is interpolated linearly
//! (bilinearly in 2D) from its cell corners, and the interpolation error
//! is absorbed into per-entry multiplicative corrections. Entries of `A`
//! are deflated by the upper error bound and entries of `B` are inflated
//! by the lower one, so the spectral radii of `A` and `B` bracket the
//! spectral radius of the exact operator restricted to its eigencone.
//! For infinite digit alphabets, `B` additionally receives the tail
//! constant in the column of the node at the origin, majorizing all
//! digits beyond the truncation radius.

use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{self, Write};
use thiserror::Error;

use crate::bounds::{tail_constant, BoundProfile1D, BoundProfile2D, BoundsError};
use crate::maps::{IfsProblem, MapError, MoebiusMap2D};
use crate::mesh::{Mesh1D, Mesh2D};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollocationError {
    #[error("expected a {expected} problem")]
    ProblemKindMismatch { expected: &'static str },
    #[error("row list length {got} does not match matrix dimension {expected}")]
    RowCountMismatch { expected: usize, got: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: u32, value: f64 },
    #[error("column {col} in row {row} is outside the {n}-column matrix")]
    ColumnOutOfRange { row: usize, col: u32, n: usize },
    #[error("row {row} has no entries")]
    EmptyRow { row: usize },
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mesh too coarse: interpolation correction reached {max_correction}")]
    MeshTooCoarse { max_correction: f64 },
    #[error("image {image} of node {node} left the meshed domain")]
    ImageOutsideMesh1D { node: f64, image: f64 },
    #[error("image ({image_x}, {image_y}) of node ({node_x}, {node_y}) left the meshed cover")]
    ImageOutsideMesh2D {
        node_x: f64,
        node_y: f64,
        image_x: f64,
        image_y: f64,
    },
    #[error("interpolation point {u} is outside its cell [{x_left}, {x_right}]")]
    PointOutsideCell { x_left: f64, x_right: f64, u: f64 },
    #[error("profile is not convexity-certified; use the two-sided correction")]
    ProfileNotCertified,
    #[error("safety factor {value} must be at least 1")]
    InvalidSafetyFactor { value: f64 },
    #[error("mesh does not contain the origin node required for the tail column")]
    MissingOriginNode,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Row-compressed sparse matrix with nonnegative entries.
///
/// Rows are nonempty, column indices are strictly increasing within each
/// row, and duplicate insertions have been summed. These invariants are
/// established by [`SparseNonnegMatrix::from_rows`] and hold for every
/// assembled matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNonnegMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseNonnegMatrix {
    /// Builds an `n x n` matrix from per-row `(column, value)` lists.
    /// Duplicate columns within a row are summed; negative values and
    /// empty rows are rejected.
    pub fn from_rows(n: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self, CollocationError> {
        if rows.len() != n {
            return Err(CollocationError::RowCountMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (row, mut entries) in rows.into_iter().enumerate() {
            entries.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
            for (col, value) in entries {
                if (col as usize) >= n {
                    return Err(CollocationError::ColumnOutOfRange { row, col, n });
                }
                if !(value >= 0.0) {
                    return Err(CollocationError::NegativeEntry { row, col, value });
                }
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += value,
                    _ => merged.push((col, value)),
                }
            }
            if merged.is_empty() {
                return Err(CollocationError::EmptyRow { row });
            }
            for (col, value) in merged {
                cols.push(col);
                vals.push(value);
            }
            row_ptr.push(cols.len());
        }
        Ok(SparseNonnegMatrix {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `k`.
    pub fn row_entries(&self, k: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[k]..self.row_ptr[k + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    /// Matrix-vector product `M w`.
    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>, CollocationError> {
        if w.len() != self.n {
            return Err(CollocationError::DimensionMismatch {
                expected: self.n,
                got: w.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.apply_into(w, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (k, slot) in out.iter_mut().enumerate() {
            let span = self.row_ptr[k]..self.row_ptr[k + 1];
            let mut acc = 0.0;
            for (&col, &val) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += val * w[col as usize];
            }
            *slot = acc;
        }
    }

    /// Writes the matrix in coordinate form, one `row col value` triple
    /// per line with 17 significant digits.
    pub fn write_coords<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for row in 0..self.n {
            let (cols, vals) = self.row_entries(row);
            for (&col, &val) in cols.iter().zip(vals) {
                writeln!(out, "{row} {col} {val:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Tail correction recorded with an assembled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailContribution {
    pub truncation_radius: f64,
    /// Raw tail constant, before the safety factor.
    pub constant: f64,
}

/// The assembled bracket pair at a fixed exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrices {
    pub a: SparseNonnegMatrix,
    pub b: SparseNonnegMatrix,
    pub s: f64,
    /// Largest cell width of the mesh the pair was assembled on.
    pub h_eff: f64,
    /// Largest multiplicative correction applied to any entry.
    pub max_correction: f64,
    pub tail_used: Option<TailContribution>,
}

/// Assembly tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    /// Multiplier applied to every interpolation correction and to the
    /// tail constant. Must be at least 1; the default leaves one part in
    /// 1e12 of headroom for the arithmetic itself.
    pub safety_factor: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            safety_factor: 1.0 + 1e-12,
        }
    }
}

/// Interpolation error bound for a certified-convex profile: the linear
/// interpolant of the eigenfunction on `[x_left, x_right]` overestimates
/// it at `u` by at most this factor times the function value.
pub fn err_1d(
    x_left: f64,
    x_right: f64,
    u: f64,
    profile: &BoundProfile1D,
) -> Result<f64, CollocationError> {
    if !profile.convexity_certified {
        return Err(CollocationError::ProfileNotCertified);
    }
    Ok(err_1d_two_sided(x_left, x_right, u, profile)?.1)
}

/// Two-sided interpolation error bounds `(err_low, err_high)`.
///
/// `err_high` comes from `d2_upper` and deflates `A`; `err_low` comes
/// from `|d2_lower|` and inflates `B`. For a certified profile
/// `err_low = 0`.
pub fn err_1d_two_sided(
    x_left: f64,
    x_right: f64,
    u: f64,
    profile: &BoundProfile1D,
) -> Result<(f64, f64), CollocationError> {
    let width = x_right - x_left;
    let tol = 1e-9 * width.max(1e-300);
    if !(u >= x_left - tol) || !(u <= x_right + tol) {
        return Err(CollocationError::PointOutsideCell { x_left, x_right, u });
    }
    let overshoot = ((x_right - u) * (u - x_left)).max(0.0);
    let slack = (profile.log_slope * width).exp();
    let err_high = overshoot * 0.5 * profile.d2_upper * slack;
    let err_low = overshoot * 0.5 * profile.d2_lower.abs() * slack;
    Ok((err_low, err_high))
}

/// Entries of one `A` row, the matching `B` row, and the largest
/// correction factor met while building them.
type AssembledRow = (Vec<(u32, f64)>, Vec<(u32, f64)>, f64);

/// Assembles the bracket pair for a one-dimensional problem.
pub fn assemble_1d(
    problem: &IfsProblem,
    mesh: &Mesh1D,
    s: f64,
    profile: &BoundProfile1D,
    opts: &AssembleOptions,
) -> Result<BracketMatrices, CollocationError> {
    let maps = match problem {
        IfsProblem::Interval { maps, .. } => maps,
        _ => {
            return Err(CollocationError::ProblemKindMismatch {
                expected: "one-dimensional interval",
            })
        }
    };
    if !(opts.safety_factor >= 1.0) {
        return Err(CollocationError::InvalidSafetyFactor {
            value: opts.safety_factor,
        });
    }
    let n = mesh.n_nodes();
    let nodes = mesh.nodes();

    let rows: Vec<AssembledRow> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<_, CollocationError> {
            let x = nodes[k];
            let mut row_a = Vec::with_capacity(2 * maps.len());
            let mut row_b = Vec::with_capacity(2 * maps.len());
            let mut max_corr = 0.0f64;
            for map in maps {
                let u = map.eval(x)?;
                let weight = map.weight(x, s)?;
                let cell = mesh
                    .locate(u)
                    .map_err(|_| CollocationError::ImageOutsideMesh1D { node: x, image: u })?;
                let (err_low, err_high) = err_1d_two_sided(cell.x_left, cell.x_right, u, profile)?;
                let err_low = err_low * opts.safety_factor;
                let err_high = err_high * opts.safety_factor;
                if err_high >= 1.0 {
                    return Err(CollocationError::MeshTooCoarse {
                        max_correction: err_high,
                    });
                }
                max_corr = max_corr.max(err_high).max(err_low);
                for (node, stw) in cell.stencil().iter() {
                    if stw > 0.0 {
                        row_a.push((node as u32, weight * (1.0 - err_high) * stw));
                        row_b.push((node as u32, weight * (1.0 + err_low) * stw));
                    }
                }
            }
            Ok((row_a, row_b, max_corr))
        })
        .collect::<Result<_, _>>()?;

    let mut rows_a = Vec::with_capacity(n);
    let mut rows_b = Vec::with_capacity(n);
    let mut max_correction = 0.0f64;
    for (row_a, row_b, corr) in rows {
        rows_a.push(row_a);
        rows_b.push(row_b);
        max_correction = max_correction.max(corr);
    }
    Ok(BracketMatrices {
        a: SparseNonnegMatrix::from_rows(n, rows_a)?,
        b: SparseNonnegMatrix::from_rows(n, rows_b)?,
        s,
        h_eff: mesh.max_spacing(),
        max_correction,
        tail_used: None,
    })
}

/// Folds a point of the full disk onto the upper half-disk; the
/// eigenfunction is symmetric under conjugation.
pub fn fold_point_2d(w: Complex64) -> Complex64 {
    if w.im < 0.0 {
        w.conj()
    } else {
        w
    }
}

/// Assembles the bracket pair for a half-disk problem at exponent `s`.
///
/// Digits are the truncated alphabet of the problem; for infinite
/// alphabets the tail constant (times the safety factor) is added to
/// every row of `B` in the column of the origin node.
pub fn assemble_2d(
    problem: &IfsProblem,
    mesh: &Mesh2D,
    s: f64,
    profile: &BoundProfile2D,
    opts: &AssembleOptions,
) -> Result<BracketMatrices, CollocationError> {
    let digits = match problem {
        IfsProblem::HalfDisk { digits, .. } => digits,
        _ => {
            return Err(CollocationError::ProblemKindMismatch {
                expected: "half-disk",
            })
        }
    };
    if !(opts.safety_factor >= 1.0) {
        return Err(CollocationError::InvalidSafetyFactor {
            value: opts.safety_factor,
        });
    }
    let maps = digits
        .enumerate()?
        .into_iter()
        .map(|(m, digit_im)| MoebiusMap2D::from_lattice(m, digit_im))
        .collect::<Result<Vec<_>, _>>()?;
    let tail = if digits.is_infinite() {
        Some(TailContribution {
            truncation_radius: digits.truncation_radius,
            constant: tail_constant(&digits.kind, s, digits.truncation_radius)?,
        })
    } else {
        None
    };

    let n = mesh.n_nodes();
    let origin = mesh
        .node_index(0, 0)
        .ok_or(CollocationError::MissingOriginNode)?;
    let coef_high = 0.5 * profile.dxx_upper;
    let coef_low = 0.5 * (profile.dxx_lower.abs() + profile.dyy_lower.abs());
    let slack = (profile.log_slope * std::f64::consts::SQRT_2 * mesh.h()).exp();

    struct Scratch {
        vals_a: Vec<f64>,
        vals_b: Vec<f64>,
        touched: Vec<u32>,
    }

    let rows: Vec<AssembledRow> = (0..n)
        .into_par_iter()
        .map_init(
            || Scratch {
                vals_a: vec![0.0; n],
                vals_b: vec![0.0; n],
                touched: Vec::new(),
            },
            |scratch, k| -> Result<_, CollocationError> {
                let (x, y) = mesh.node_point(k);
                let z = Complex64::new(x, y);
                let mut max_corr = 0.0f64;
                for map in &maps {
                    let weight = map.weight(z, s);
                    let image = fold_point_2d(map.eval(z));
                    let cell = mesh.locate(image.re, image.im).map_err(|_| {
                        CollocationError::ImageOutsideMesh2D {
                            node_x: x,
                            node_y: y,
                            image_x: image.re,
                            image_y: image.im,
                        }
                    })?;
                    let overshoot = cell.overshoot();
                    let err_high = overshoot * coef_high * slack * opts.safety_factor;
                    let err_low = overshoot * coef_low * slack * opts.safety_factor;
                    if err_high >= 1.0 {
                        return Err(CollocationError::MeshTooCoarse {
                            max_correction: err_high,
                        });
                    }
                    max_corr = max_corr.max(err_high).max(err_low);
                    for (node, stw) in cell.stencil().iter() {
                        if stw > 0.0 {
                            if scratch.vals_b[node] == 0.0 {
                                scratch.touched.push(node as u32);
                            }
                            scratch.vals_a[node] += weight * (1.0 - err_high) * stw;
                            scratch.vals_b[node] += weight * (1.0 + err_low) * stw;
                        }
                    }
                }
                if let Some(tail) = &tail {
                    if scratch.vals_b[origin] == 0.0 {
                        scratch.touched.push(origin as u32);
                    }
                    scratch.vals_b[origin] += tail.constant * opts.safety_factor;
                }
                scratch.touched.sort_unstable();
                let mut row_a = Vec::with_capacity(scratch.touched.len());
                let mut row_b = Vec::with_capacity(scratch.touched.len());
                for &col in &scratch.touched {
                    let c = col as usize;
                    if scratch.vals_a[c] > 0.0 {
                        row_a.push((col, scratch.vals_a[c]));
                    }
                    if scratch.vals_b[c] > 0.0 {
                        row_b.push((col, scratch.vals_b[c]));
                    }
                    scratch.vals_a[c] = 0.0;
                    scratch.vals_b[c] = 0.0;
                }
                scratch.touched.clear();
                Ok((row_a, row_b, max_corr))
            },
        )
        .collect::<Result<_, _>>()?;

    let mut rows_a = Vec::with_capacity(n);
    let mut rows_b = Vec::with_capacity(n);
    let mut max_correction = 0.0f64;
    for (row_a, row_b, corr) in rows {
        rows_a.push(row_a);
        rows_b.push(row_b);
        max_correction = max_correction.max(corr);
    }
    Ok(BracketMatrices {
        a: SparseNonnegMatrix::from_rows(n, rows_a)?,
        b: SparseNonnegMatrix::from_rows(n, rows_b)?,
        s,
        h_eff: mesh.h(),
        max_correction,
        tail_used: tail,
    })
}
