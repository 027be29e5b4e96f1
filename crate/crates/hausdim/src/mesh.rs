//! Collocation meshes and interpolation stencils.
//!
//! One-dimensional meshes cover an ordered union of disjoint intervals
//! with per-interval uniform nodes; two-dimensional meshes cover the
//! half-disk `|z - 1/2| <= 1/2`, `Im z >= 0`, with the axis-aligned cells
//! of a square lattice of pitch `1/N`. Lookups snap to nearby nodes before
//! resolving a cell, so map images that land within roundoff of a node are
//! treated as sitting on it, and ties resolve to the left (lower) cell.

use thiserror::Error;

use crate::maps::{ContractionMap1D, MapError};

/// Relative node-snapping tolerance, in units of the local spacing.
const SNAP_TOL: f64 = 1e-12;
/// Tolerance for merging adjacent intervals during domain refinement.
const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("interval list is empty")]
    EmptyIntervalList,
    #[error("mesh spacing h = {h} must be positive and finite")]
    InvalidSpacing { h: f64 },
    #[error("interval [{a}, {b}] is degenerate or not finite")]
    InvalidInterval { a: f64, b: f64 },
    #[error("intervals overlap near x = {at}")]
    OverlappingIntervals { at: f64 },
    #[error("point x = {x} lies outside the meshed intervals")]
    OutsideIntervals { x: f64 },
    #[error("point ({x}, {y}) lies outside the meshed half-disk cover")]
    OutsideCoverage { x: f64, y: f64 },
    #[error("2D spacing h = {h} must be the reciprocal of a positive integer")]
    NotUnitFraction { h: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Interpolation stencil: up to four node indices with convex weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpStencil {
    nodes: [usize; 4],
    weights: [f64; 4],
    len: usize,
}

impl InterpStencil {
    fn new(nodes: [usize; 4], weights: [f64; 4], len: usize) -> Self {
        debug_assert!(weights[..len].iter().all(|&w| w >= 0.0));
        debug_assert!((weights[..len].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        InterpStencil {
            nodes,
            weights,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |i| (self.nodes[i], self.weights[i]))
    }
}

/// Containing cell of a 1D query point, with its local coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell1D {
    pub left_node: usize,
    pub right_node: usize,
    pub x_left: f64,
    pub x_right: f64,
    /// Local coordinate in `[0, 1]` measured from `x_left`.
    pub t: f64,
}

impl Cell1D {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn point(&self) -> f64 {
        self.x_left + self.t * self.width()
    }

    pub fn stencil(&self) -> InterpStencil {
        InterpStencil::new(
            [self.left_node, self.right_node, 0, 0],
            [1.0 - self.t, self.t, 0.0, 0.0],
            2,
        )
    }
}

/// Uniform-per-interval collocation mesh on a union of disjoint intervals.
///
/// Each interval `[a_i, b_i]` carries `n_i = ceil(len_i / h)` cells of
/// exact spacing `len_i / n_i <= h` (up to a relative guard when `len_i/h`
/// is within 1e-12 of an integer), and both endpoints are nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    intervals: Vec<(f64, f64)>,
    spacings: Vec<f64>,
    cell_counts: Vec<usize>,
    block_starts: Vec<usize>,
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Largest cell width over all intervals.
    pub fn max_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(0.0, f64::max)
    }

    /// Index of the interval containing node `k`.
    pub fn interval_of_node(&self, k: usize) -> usize {
        debug_assert!(k < self.nodes.len());
        self.block_starts.partition_point(|&start| start <= k) - 1
    }

    /// Resolves the cell containing `u`, snapping to nodes within
    /// `1e-12` of the local spacing and breaking node ties to the left.
    pub fn locate(&self, u: f64) -> Result<Cell1D, MeshError> {
        if !u.is_finite() {
            return Err(MeshError::OutsideIntervals { x: u });
        }
        for (bi, &(a, b)) in self.intervals.iter().enumerate() {
            let spacing = self.spacings[bi];
            let tol = SNAP_TOL * spacing;
            if u < a - tol || u > b + tol {
                continue;
            }
            let cells = self.cell_counts[bi];
            let mut t_lattice = (u - a) / spacing;
            let nearest = t_lattice.round();
            if (t_lattice - nearest).abs() <= SNAP_TOL {
                t_lattice = nearest;
            }
            let mut cell = t_lattice.floor();
            // A query on a node belongs to the cell to its left.
            if t_lattice == cell && cell >= 1.0 {
                cell -= 1.0;
            }
            let cell = (cell.max(0.0) as usize).min(cells - 1);
            let t = (t_lattice - cell as f64).clamp(0.0, 1.0);
            let left = self.block_starts[bi] + cell;
            return Ok(Cell1D {
                left_node: left,
                right_node: left + 1,
                x_left: self.nodes[left],
                x_right: self.nodes[left + 1],
                t,
            });
        }
        Err(MeshError::OutsideIntervals { x: u })
    }
}

/// Forward-invariant subdomain reached after `depth` rounds of applying
/// the maps to `[0, 1]` and merging the images.
///
/// Every map is monotone on `[0, 1]`, so interval images are spanned by
/// the endpoint values. Depth 0 returns `[0, 1]` itself.
pub fn refine_domain_1d(
    maps: &[ContractionMap1D],
    depth: usize,
) -> Result<Vec<(f64, f64)>, MeshError> {
    if maps.is_empty() {
        return Err(MeshError::EmptyIntervalList);
    }
    let mut domain = vec![(0.0_f64, 1.0_f64)];
    for _ in 0..depth {
        let mut images = Vec::with_capacity(domain.len() * maps.len());
        for &(a, b) in &domain {
            for map in maps {
                let fa = map.eval(a)?;
                let fb = map.eval(b)?;
                images.push((fa.min(fb), fa.max(fb)));
            }
        }
        images.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(images.len());
        for (lo, hi) in images {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + MERGE_TOL => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        domain = merged;
    }
    Ok(domain)
}

/// Builds a 1D mesh with spacing at most `h` on each interval.
pub fn build_mesh_1d(intervals: &[(f64, f64)], h: f64) -> Result<Mesh1D, MeshError> {
    if intervals.is_empty() {
        return Err(MeshError::EmptyIntervalList);
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(MeshError::InvalidSpacing { h });
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    for &(a, b) in &sorted {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(MeshError::InvalidInterval { a, b });
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(MeshError::OverlappingIntervals { at: pair[1].0 });
        }
    }

    let mut spacings = Vec::with_capacity(sorted.len());
    let mut cell_counts = Vec::with_capacity(sorted.len());
    let mut block_starts = Vec::with_capacity(sorted.len());
    let mut nodes = Vec::new();
    for &(a, b) in &sorted {
        let len = b - a;
        let quotient = len / h;
        let nearest = quotient.round();
        // Guard against a quotient a hair above an integer producing one
        // spurious extra cell.
        let cells = if nearest >= 1.0 && (quotient - nearest).abs() <= 1e-12 * nearest {
            nearest as usize
        } else {
            quotient.ceil().max(1.0) as usize
        };
        let spacing = len / cells as f64;
        block_starts.push(nodes.len());
        for i in 0..cells {
            nodes.push(a + i as f64 * spacing);
        }
        nodes.push(b);
        spacings.push(spacing);
        cell_counts.push(cells);
    }
    Ok(Mesh1D {
        intervals: sorted,
        spacings,
        cell_counts,
        block_starts,
        nodes,
    })
}

/// Linear interpolation stencil for `u` on a 1D mesh.
pub fn interp_weights_1d(mesh: &Mesh1D, u: f64) -> Result<InterpStencil, MeshError> {
    Ok(mesh.locate(u)?.stencil())
}

/// Containing cell of a 2D query point, with bilinear coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell2D {
    /// Corner node indices in the order bottom-left, bottom-right,
    /// top-left, top-right.
    pub corners: [usize; 4],
    pub x0: f64,
    pub y0: f64,
    pub fx: f64,
    pub fy: f64,
    pub h: f64,
}

impl Cell2D {
    pub fn stencil(&self) -> InterpStencil {
        let (fx, fy) = (self.fx, self.fy);
        InterpStencil::new(
            self.corners,
            [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
            4,
        )
    }

    /// Interpolation overshoot weight
    /// `(x1 - x)(x - x0) + (y1 - y)(y - y0)` of the query point inside
    /// its cell; zero exactly on the corner lattice.
    pub fn overshoot(&self) -> f64 {
        self.h * self.h * (self.fx * (1.0 - self.fx) + self.fy * (1.0 - self.fy))
    }
}

/// Square-cell cover of the upper half-disk `|z - 1/2| <= 1/2`,
/// `Im z >= 0`, on the lattice of pitch `h = 1/N`.
///
/// Core cells are those whose closest point to the disk center
/// `(1/2, 0)` lies strictly inside radius `1/2`; `margin_rings` rounds of
/// 8-neighbor dilation (clamped to `0 <= i < N`, `j >= 0`) absorb map
/// images that fall a cell outside the core. Nodes are the cell corners,
/// ordered by `(j, i)`, so the node at the origin has index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    n: usize,
    h: f64,
    margin_rings: usize,
    nodes: Vec<(i32, i32)>,
    cells: Vec<(i32, i32)>,
    cell_marked: Vec<bool>,
    node_lookup: Vec<i32>,
    lattice_cols: usize,
    lattice_rows: usize,
}

impl Mesh2D {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Lattice coordinates of the nodes, sorted by `(j, i)`.
    pub fn nodes(&self) -> &[(i32, i32)] {
        &self.nodes
    }

    /// Lower-left lattice coordinates of the covered cells.
    pub fn cells(&self) -> &[(i32, i32)] {
        &self.cells
    }

    pub fn node_point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.nodes[k];
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// Index of the node at lattice position `(i, j)`, if present.
    pub fn node_index(&self, i: i32, j: i32) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.lattice_cols || j as usize >= self.lattice_rows {
            return None;
        }
        let raw = self.node_lookup[j as usize * self.lattice_cols + i as usize];
        (raw >= 0).then_some(raw as usize)
    }

    fn cell_at(&self, i: i64, j: i64) -> bool {
        if i < 0 || j < 0 || i as usize >= self.n || j as usize >= self.lattice_rows {
            return false;
        }
        self.cell_marked[j as usize * self.n + i as usize]
    }

    /// Resolves the covered cell containing `(x, y)`, snapping to lattice
    /// lines within `1e-12 h` and breaking ties toward the lower-left.
    pub fn locate(&self, x: f64, y: f64) -> Result<Cell2D, MeshError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(MeshError::OutsideCoverage { x, y });
        }
        let resolve = |w: f64| -> (f64, f64) {
            let mut lattice = w / self.h;
            let nearest = lattice.round();
            if (lattice - nearest).abs() <= SNAP_TOL {
                lattice = nearest;
            }
            let mut cell = lattice.floor();
            if lattice == cell && cell >= 1.0 {
                cell -= 1.0;
            }
            (cell, (lattice - cell).clamp(0.0, 1.0))
        };
        let (ci, fx) = resolve(x);
        let (cj, fy) = resolve(y);
        if ci < 0.0 || cj < 0.0 || !self.cell_at(ci as i64, cj as i64) {
            return Err(MeshError::OutsideCoverage { x, y });
        }
        let (i, j) = (ci as i32, cj as i32);
        let corners = [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i, j + 1),
            self.node_index(i + 1, j + 1),
        ];
        // A marked cell always carries its four corner nodes.
        let corners = corners.map(|c| c.expect("covered cell is missing a corner node"));
        Ok(Cell2D {
            corners,
            x0: i as f64 * self.h,
            y0: j as f64 * self.h,
            fx,
            fy,
            h: self.h,
        })
    }
}

/// Builds the half-disk cover at pitch `h = 1/N` with the given number of
/// margin rings.
pub fn build_mesh_2d(h: f64, margin_rings: usize) -> Result<Mesh2D, MeshError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(MeshError::InvalidSpacing { h });
    }
    let inverse = 1.0 / h;
    let n_guess = inverse.round();
    if n_guess < 1.0 || (inverse - n_guess).abs() > 1e-9 * n_guess {
        return Err(MeshError::NotUnitFraction { h });
    }
    let n = n_guess as usize;
    let h = 1.0 / n as f64;

    // Row capacity: the core stays below j = N/2 + 1 and each ring adds one.
    let lattice_rows = n / 2 + margin_rings + 3;
    let mut marked = vec![false; n * lattice_rows];
    for j in 0..lattice_rows.min(n) {
        let dy = j as f64 * h;
        for i in 0..n {
            let dx = (i as f64 * h - 0.5).max(0.0).max(0.5 - (i + 1) as f64 * h);
            if dx * dx + dy * dy < 0.25 {
                marked[j * n + i] = true;
            }
        }
    }
    for _ in 0..margin_rings {
        let snapshot = marked.clone();
        for j in 0..lattice_rows {
            for i in 0..n {
                if !snapshot[j * n + i] {
                    continue;
                }
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let ii = i as i64 + di;
                        let jj = j as i64 + dj;
                        if ii >= 0 && (ii as usize) < n && jj >= 0 && (jj as usize) < lattice_rows {
                            marked[jj as usize * n + ii as usize] = true;
                        }
                    }
                }
            }
        }
    }

    let lattice_cols = n + 1;
    let mut node_set = vec![false; lattice_cols * lattice_rows];
    let mut cells = Vec::new();
    for j in 0..lattice_rows {
        for i in 0..n {
            if marked[j * n + i] {
                cells.push((i as i32, j as i32));
                node_set[j * lattice_cols + i] = true;
                node_set[j * lattice_cols + i + 1] = true;
                node_set[(j + 1) * lattice_cols + i] = true;
                node_set[(j + 1) * lattice_cols + i + 1] = true;
            }
        }
    }
    let mut nodes = Vec::new();
    let mut node_lookup = vec![-1i32; lattice_cols * lattice_rows];
    for j in 0..lattice_rows {
        for i in 0..lattice_cols {
            if node_set[j * lattice_cols + i] {
                node_lookup[j * lattice_cols + i] = nodes.len() as i32;
                nodes.push((i as i32, j as i32));
            }
        }
    }

    Ok(Mesh2D {
        n,
        h,
        margin_rings,
        nodes,
        cells,
        cell_marked: marked,
        node_lookup,
        lattice_cols,
        lattice_rows,
    })
}

/// Bilinear interpolation stencil for `(x, y)` on the half-disk cover.
pub fn interp_weights_2d(mesh: &Mesh2D, x: f64, y: f64) -> Result<InterpStencil, MeshError> {
    Ok(mesh.locate(x, y)?.stencil())
}
