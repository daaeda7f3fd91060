use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform one-dimensional grid, both end points included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

/// Builds a uniform grid on `[x_min, x_max]` with `n_points` nodes.
pub fn make_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid1D> {
    Grid1D::new(x_min, x_max, n_points)
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(LabError::InvalidGrid(format!("non-finite bounds [{x_min}, {x_max}]")));
        }
        if x_min >= x_max {
            return Err(LabError::InvalidGrid(format!("x_min = {x_min} must be below x_max = {x_max}")));
        }
        if n_points < 3 {
            return Err(LabError::InvalidGrid(format!("n_points = {n_points} < 3")));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self { x_min, x_max, n_points, dx })
    }

    /// Symmetric grid `[-half_width, half_width]` with spacing as close to `dx` as
    /// possible and an exact node at the origin.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && half_width > 0.0) {
            return Err(LabError::InvalidGrid(format!("half_width {half_width} and dx {dx} must be positive")));
        }
        let half = (half_width / dx).round().max(1.0) as usize;
        Self::new(-(half as f64) * dx, half as f64 * dx, 2 * half + 1)
    }

    /// Smallest symmetric grid with spacing `dx` reaching at least `half_width`.
    pub fn covering(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && half_width > 0.0 && half_width.is_finite()) {
            return Err(LabError::InvalidGrid(format!("half_width {half_width} and dx {dx} must be positive")));
        }
        let half = (half_width / dx - 1e-9).ceil().max(1.0) as usize;
        Self::new(-(half as f64) * dx, half as f64 * dx, 2 * half + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the node sitting exactly at `x` (up to round-off), if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx;
        let i = s.round();
        if i < 0.0 || i >= self.n_points as f64 {
            return None;
        }
        ((s - i).abs() <= 1e-9).then_some(i as usize)
    }

    /// Node at x = 0; exists only when `dx` divides `x_min`.
    pub fn origin(&self) -> Option<usize> {
        self.node_index(0.0)
    }

    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx).round();
        i.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Largest `r` such that `[-r, r]` fits inside the grid.
    pub fn half_extent(&self) -> f64 {
        self.x_max.min(-self.x_min)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min - 1e-12 * self.dx && x <= self.x_max + 1e-12 * self.dx
    }

    /// Trapezoid quadrature weight of node `i` (without the factor `dx`).
    #[inline]
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_grid() {
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.nodes(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.origin(), Some(1));
    }

    #[test]
    fn wide_grid_origin_index() {
        let g = make_grid(-200.0, 200.0, 4001).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.origin(), Some(2000));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(make_grid(0.0, 1.0, 2).is_err());
        assert!(make_grid(1.0, 0.0, 10).is_err());
        assert!(make_grid(f64::NAN, 1.0, 10).is_err());
        assert!(make_grid(0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn asymmetric_grid_has_no_origin_node() {
        let g = make_grid(-1.0, 2.0, 5).unwrap();
        assert_eq!(g.origin(), None);
    }

    #[test]
    fn symmetric_constructor() {
        let g = Grid1D::symmetric(10.0, 0.05).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g.origin(), Some(200));
        assert_eq!(g.node_index(5.0), Some(300));
    }
}
