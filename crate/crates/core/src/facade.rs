//! World-space facade rectangle, the cell grid that projected pixel
//! footprints are rasterized onto, multi-view overlap counts, and
//! outline extraction.
//!
//! Grid cell (row, col) covers u in [col·s, (col+1)·s] and
//! v in [row·s, (row+1)·s] meters, with row 0 at the facade's bottom
//! edge. A cell belongs to a footprint when its center lies inside or on
//! the boundary of the quad; outlines follow the cell boundaries of the
//! flagged region, outer rings counter-clockwise and holes clockwise.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::projection::{FootprintQuad, Point3, Vec3};

/// Planar facade rectangle spanned by two orthonormal axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacadePlane {
    pub corner: Point3,
    pub u_axis: Vec3,
    pub v_axis: Vec3,
    pub width: f64,
    pub height: f64,
}

impl FacadePlane {
    pub fn new(
        corner: Point3,
        u_axis: Vec3,
        v_axis: Vec3,
        width: f64,
        height: f64,
    ) -> Result<Self, FacadeError> {
        if math::abs(u_axis.norm() - 1.0) > 1e-9 || math::abs(v_axis.norm() - 1.0) > 1e-9 {
            return Err(FacadeError::AxisNotUnit);
        }
        if math::abs(u_axis.dot(v_axis)) > 1e-9 {
            return Err(FacadeError::AxesNotOrthogonal);
        }
        if !(width > 0.0) || !(height > 0.0) {
            return Err(FacadeError::NonPositiveExtent { width, height });
        }
        Ok(Self { corner, u_axis, v_axis, width, height })
    }

    /// Facade normal `u_axis × v_axis`.
    pub fn normal(&self) -> Vec3 {
        self.u_axis.cross(self.v_axis)
    }

    /// World position of a facade-local coordinate.
    pub fn point_at(&self, u: f64, v: f64) -> Point3 {
        self.corner + self.u_axis * u + self.v_axis * v
    }

    /// In-plane coordinates of a point assumed to lie on the plane.
    #[inline]
    pub fn plane_uv(&self, p: Point3) -> (f64, f64) {
        let rel = p - self.corner;
        (rel.dot(self.u_axis), rel.dot(self.v_axis))
    }

    /// Facade-local coordinates of `p`, rejecting points farther than
    /// 1e-6 m off the plane.
    pub fn to_local(&self, p: Point3) -> Result<(f64, f64), FacadeError> {
        let offset = (p - self.corner).dot(self.normal());
        if math::abs(offset) > 1e-6 {
            return Err(FacadeError::OffPlane { distance: offset });
        }
        Ok(self.plane_uv(p))
    }
}

/// Rasterized facade: one boolean layer per view plus derived overlap
/// counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FacadeGrid {
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
    layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    name: String,
    flags: Vec<bool>,
}

impl FacadeGrid {
    /// Grid covering the facade with `ceil(extent / cell_size)` cells
    /// per axis.
    pub fn new(facade: &FacadePlane, cell_size: f64) -> Result<Self, FacadeError> {
        if !(cell_size > 0.0) {
            return Err(FacadeError::InvalidCellSize(cell_size));
        }
        // tolerate divisions landing an ulp above an integer
        let cols = math::ceil(facade.width / cell_size - 1e-9) as usize;
        let rows = math::ceil(facade.height / cell_size - 1e-9) as usize;
        Ok(Self { cell_size, cols, rows, layers: Vec::new() })
    }

    pub fn add_layer(&mut self, name: &str) -> Result<(), FacadeError> {
        if self.layers.iter().any(|l| l.name == name) {
            return Err(FacadeError::DuplicateLayer(name.to_string()));
        }
        self.layers.push(Layer {
            name: name.to_string(),
            flags: vec![false; self.cols * self.rows],
        });
        Ok(())
    }

    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers.iter().map(|l| l.name.as_str())
    }

    pub fn layer(&self, name: &str) -> Option<&[bool]> {
        self.layers.iter().find(|l| l.name == name).map(|l| l.flags.as_slice())
    }

    fn layer_mut(&mut self, name: &str) -> Option<&mut Vec<bool>> {
        self.layers.iter_mut().find(|l| l.name == name).map(|l| &mut l.flags)
    }

    /// Center coordinates of a cell, in facade meters.
    #[inline]
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            (col as f64 + 0.5) * self.cell_size,
            (row as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Closed facade-local ring; holes are wound clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlinePolygon {
    pub vertices: Vec<(f64, f64)>,
    pub hole: bool,
}

impl OutlinePolygon {
    /// Shoelace area; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            acc += x0 * y1 - x1 * y0;
        }
        acc / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FacadeError {
    AxisNotUnit,
    AxesNotOrthogonal,
    NonPositiveExtent { width: f64, height: f64 },
    InvalidCellSize(f64),
    DuplicateLayer(String),
    UnknownLayer(String),
    OffPlane { distance: f64 },
}

impl fmt::Display for FacadeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AxisNotUnit => write!(f, "facade axes must be unit length"),
            Self::AxesNotOrthogonal => write!(f, "facade axes must be orthogonal"),
            Self::NonPositiveExtent { width, height } => {
                write!(f, "facade extent {width}x{height} must be positive")
            }
            Self::InvalidCellSize(s) => write!(f, "cell size must be positive, got {s}"),
            Self::DuplicateLayer(name) => write!(f, "layer {name:?} already exists"),
            Self::UnknownLayer(name) => write!(f, "unknown layer {name:?}"),
            Self::OffPlane { distance } => {
                write!(f, "point lies {distance} m off the facade plane")
            }
        }
    }
}

impl core::error::Error for FacadeError {}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    if cross != 0.0 {
        return false;
    }
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Even-odd point-in-polygon with boundary points counted inside.
pub fn point_in_quad(p: (f64, f64), corners: &[(f64, f64); 4]) -> bool {
    for i in 0..4 {
        if on_segment(p, corners[i], corners[(i + 1) % 4]) {
            return true;
        }
    }
    let mut inside = false;
    let mut j = 3;
    for i in 0..4 {
        let (xi, yi) = corners[i];
        let (xj, yj) = corners[j];
        if (yi > p.1) != (yj > p.1) {
            let x_cross = (xj - xi) * (p.1 - yi) / (yj - yi) + xi;
            if p.0 < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Flags every cell whose center lies inside or on the boundary of at
/// least one footprint quad.
pub fn rasterize_footprints(
    quads: &[FootprintQuad],
    grid: &mut FacadeGrid,
    layer: &str,
) -> Result<(), FacadeError> {
    let (cols, rows, cell) = (grid.cols, grid.rows, grid.cell_size);
    let flags = grid
        .layer_mut(layer)
        .ok_or_else(|| FacadeError::UnknownLayer(layer.to_string()))?;
    for quad in quads {
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        let mut min_v = f64::INFINITY;
        let mut max_v = f64::NEG_INFINITY;
        for &(u, v) in &quad.corners {
            min_u = min_u.min(u);
            max_u = max_u.max(u);
            min_v = min_v.min(v);
            max_v = max_v.max(v);
        }
        // candidate cells around the bounding box; exactness comes from
        // the center-inclusion test
        let col_lo = ((min_u / cell) as i64 - 1).max(0) as usize;
        let col_hi = (math::ceil(max_u / cell) as i64 + 1).min(cols as i64) as usize;
        let row_lo = ((min_v / cell) as i64 - 1).max(0) as usize;
        let row_hi = (math::ceil(max_v / cell) as i64 + 1).min(rows as i64) as usize;
        for row in row_lo..row_hi {
            for col in col_lo..col_hi {
                let center = (
                    (col as f64 + 0.5) * cell,
                    (row as f64 + 0.5) * cell,
                );
                if point_in_quad(center, &quad.corners) {
                    flags[row * cols + col] = true;
                }
            }
        }
    }
    Ok(())
}

/// Per-cell count of view layers flagging that cell.
pub fn overlap_count(grid: &FacadeGrid) -> Vec<u32> {
    assert!(!grid.layers.is_empty(), "overlap requires at least one layer");
    let mut counts = vec![0u32; grid.cols * grid.rows];
    for layer in &grid.layers {
        for (count, &flag) in counts.iter_mut().zip(&layer.flags) {
            if flag {
                *count += 1;
            }
        }
    }
    counts
}

// Directed boundary edge directions, interior on the left.
const EAST: u8 = 0;
const NORTH: u8 = 1;
const WEST: u8 = 2;
const SOUTH: u8 = 3;

fn step(v: (i64, i64), dir: u8) -> (i64, i64) {
    match dir {
        EAST => (v.0 + 1, v.1),
        NORTH => (v.0, v.1 + 1),
        WEST => (v.0 - 1, v.1),
        _ => (v.0, v.1 - 1),
    }
}

/// Traces the boundary of the flagged region as closed rings along cell
/// edges. Outer rings come out counter-clockwise, holes clockwise, in
/// facade meters. Diagonally touching cells are kept as separate rings
/// so every ring stays simple.
pub fn extract_outlines(
    cols: usize,
    rows: usize,
    flags: &[bool],
    cell_size: f64,
) -> Vec<OutlinePolygon> {
    assert_eq!(flags.len(), cols * rows, "flag raster does not match grid");
    let flagged = |row: i64, col: i64| -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < rows
            && (col as usize) < cols
            && flags[(row as usize) * cols + col as usize]
    };

    // label 4-connected components; saddle resolution depends on whether
    // the two diagonal cells belong to the same region
    let mut component = vec![usize::MAX; cols * rows];
    let mut next_component = 0usize;
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for row in 0..rows as i64 {
        for col in 0..cols as i64 {
            if !flagged(row, col) || component[(row as usize) * cols + col as usize] != usize::MAX {
                continue;
            }
            stack.push((row, col));
            while let Some((r, c)) = stack.pop() {
                let idx = (r as usize) * cols + c as usize;
                if component[idx] != usize::MAX {
                    continue;
                }
                component[idx] = next_component;
                for (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                    if flagged(nr, nc) && component[(nr as usize) * cols + nc as usize] == usize::MAX {
                        stack.push((nr, nc));
                    }
                }
            }
            next_component += 1;
        }
    }
    let component_at = |row: i64, col: i64| component[(row as usize) * cols + col as usize];

    // collect directed boundary edges with the flagged cell on the left
    let mut edges: Vec<((i64, i64), u8)> = Vec::new();
    for row in 0..rows as i64 {
        for col in 0..cols as i64 {
            if !flagged(row, col) {
                continue;
            }
            if !flagged(row - 1, col) {
                edges.push(((col, row), EAST));
            }
            if !flagged(row, col + 1) {
                edges.push(((col + 1, row), NORTH));
            }
            if !flagged(row + 1, col) {
                edges.push(((col + 1, row + 1), WEST));
            }
            if !flagged(row, col - 1) {
                edges.push(((col, row + 1), SOUTH));
            }
        }
    }

    // index outgoing edges by start vertex; at most two per vertex
    let vkey = |v: (i64, i64)| -> usize { (v.1 as usize) * (cols + 1) + v.0 as usize };
    let mut out_edges = vec![[usize::MAX; 2]; (cols + 1) * (rows + 1)];
    for (idx, &(start, _)) in edges.iter().enumerate() {
        let slot = &mut out_edges[vkey(start)];
        if slot[0] == usize::MAX {
            slot[0] = idx;
        } else {
            slot[1] = idx;
        }
    }

    // At a saddle vertex the walk may turn left (splitting the boundary
    // between the two touching cells) or right (hugging the current
    // region around the pinch). Splitting is correct when the diagonal
    // cells belong to different regions; hugging keeps a single region's
    // outer ring and hole rings from being fused through the pinch.
    let saddle_turn = |vertex: (i64, i64), incoming: u8| -> u8 {
        let (x, y) = vertex;
        let same_region = match incoming {
            NORTH | SOUTH => component_at(y, x) == component_at(y - 1, x - 1),
            _ => component_at(y, x - 1) == component_at(y - 1, x),
        };
        if same_region {
            (incoming + 3) % 4 // right turn
        } else {
            (incoming + 1) % 4 // left turn
        }
    };

    let mut used = vec![false; edges.len()];
    let mut rings = Vec::new();
    for start_idx in 0..edges.len() {
        if used[start_idx] {
            continue;
        }
        let ring_start = edges[start_idx].0;
        let mut lattice: Vec<(i64, i64)> = Vec::new();
        let mut dirs: Vec<u8> = Vec::new();
        let mut current = start_idx;
        loop {
            used[current] = true;
            let (v, dir) = edges[current];
            lattice.push(v);
            dirs.push(dir);
            let end = step(v, dir);
            if end == ring_start {
                break;
            }
            let slot = out_edges[vkey(end)];
            let mut next = usize::MAX;
            let mut unused = 0usize;
            for cand in [slot[0], slot[1]] {
                if cand == usize::MAX || used[cand] {
                    continue;
                }
                unused += 1;
                if next == usize::MAX {
                    next = cand;
                }
            }
            if unused == 2 {
                let want = saddle_turn(end, dir);
                for cand in [slot[0], slot[1]] {
                    if edges[cand].1 == want {
                        next = cand;
                    }
                }
            }
            debug_assert_ne!(next, usize::MAX, "boundary walk left the edge set");
            current = next;
        }

        // drop straight-through vertices
        let n = lattice.len();
        let mut vertices = Vec::new();
        for i in 0..n {
            let incoming = dirs[(i + n - 1) % n];
            if incoming != dirs[i] {
                vertices.push(lattice[i]);
            }
        }

        let mut area2 = 0i64;
        for i in 0..vertices.len() {
            let (x0, y0) = vertices[i];
            let (x1, y1) = vertices[(i + 1) % vertices.len()];
            area2 += x0 * y1 - x1 * y0;
        }
        rings.push(OutlinePolygon {
            vertices: vertices
                .into_iter()
                .map(|(x, y)| (x as f64 * cell_size, y as f64 * cell_size))
                .collect(),
            hole: area2 < 0,
        });
    }
    rings
}
