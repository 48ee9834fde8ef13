use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A planar grid of markers lying in the world `z = 0` plane, centered on the
/// world origin.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetBoard {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    points: Vec<Vector3<f64>>,
}

impl TargetBoard {
    /// Marker positions; index == marker id.
    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn point(&self, id: usize) -> Result<&Vector3<f64>> {
        self.points.get(id).ok_or(Error::UnknownMarker(id))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Builds a `rows x cols` grid. Marker `id = i * cols + j` sits at
/// `(i * spacing, j * spacing, 0)` shifted so the centroid is the origin.
pub fn make_board(rows: usize, cols: usize, spacing: f64) -> Result<TargetBoard> {
    if rows < 2 || cols < 2 {
        return Err(Error::BadDimensions(format!(
            "grid must be at least 2x2, got {rows}x{cols}"
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::BadDimensions(format!("spacing must be positive, got {spacing}")));
    }
    let x0 = 0.5 * (rows - 1) as f64 * spacing;
    let y0 = 0.5 * (cols - 1) as f64 * spacing;
    let points = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| Vector3::new(i as f64 * spacing - x0, j as f64 * spacing - y0, 0.0))
        .collect();
    Ok(TargetBoard {
        rows,
        cols,
        spacing,
        points,
    })
}
