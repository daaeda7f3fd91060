//! Local seminorms over `|x − c| < R`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid1D;
use crate::state::{Field, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormOrder {
    #[default]
    L2,
    H1,
}

/// Node range covering `|x − center| ≤ radius`.
pub(crate) fn window(grid: &Grid1D, center: f64, radius: f64) -> Result<(usize, usize)> {
    let tol = 1e-9 * grid.dx();
    if !(radius > 0.0) || center - radius < grid.x_min() - tol || center + radius > grid.x_max() + tol {
        return Err(LabError::InvalidArgument(format!(
            "window {center} ± {radius} exceeds grid [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let lo = ((center - radius - grid.x_min()) / grid.dx() - 1e-9).ceil().max(0.0) as usize;
    let hi = (((center + radius - grid.x_min()) / grid.dx() + 1e-9).floor() as usize).min(grid.len() - 1);
    Ok((lo, hi))
}

/// Trapezoid-rule norm of `field − reference` over the window.
pub fn window_norm(
    grid: &Grid1D,
    field: &Field,
    reference: Option<&Field>,
    center: f64,
    radius: f64,
    order: NormOrder,
) -> Result<f64> {
    if field.len() != grid.len() {
        return Err(LabError::GridMismatch { expected: grid.len(), found: field.len() });
    }
    if let Some(r) = reference {
        if r.len() != grid.len() {
            return Err(LabError::GridMismatch { expected: grid.len(), found: r.len() });
        }
    }
    let (lo, hi) = window(grid, center, radius)?;
    let dx = grid.dx();
    let value = |i: usize| match reference {
        Some(r) => field.get(i) - r.get(i),
        None => field.get(i),
    };
    let mut sum = 0.0;
    for i in lo..=hi {
        let w = if (i == lo || i == hi) && lo != hi { 0.5 * dx } else { dx };
        sum += w * value(i).norm_sqr();
    }
    if order == NormOrder::H1 {
        for i in lo..hi {
            sum += (value(i + 1) - value(i)).norm_sqr() / dx;
        }
    }
    Ok(sum.sqrt())
}

/// Norm of the field over `|x| < radius`.
pub fn local_seminorm(state: &SimState, radius: f64, order: NormOrder) -> Result<f64> {
    window_norm(&state.grid, &state.field, None, 0.0, radius, order)
}

/// Norm of `field − reference` over `|x| < radius`.
pub fn local_distance(state: &SimState, reference: &Field, radius: f64, order: NormOrder) -> Result<f64> {
    window_norm(&state.grid, &state.field, Some(reference), 0.0, radius, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_constant() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        assert_eq!(local_seminorm(&SimState::zero(g, false), 1.0, NormOrder::L2).unwrap(), 0.0);
        let s = SimState::new(g, Field::from_real(vec![1.0; 201]), None).unwrap();
        assert!((local_seminorm(&s, 1.0, NormOrder::L2).unwrap() - 2f64.sqrt()).abs() < 1e-10);
        assert!((local_seminorm(&s, 1.0, NormOrder::H1).unwrap() - 2f64.sqrt()).abs() < 1e-10);
        assert!(local_seminorm(&s, 1.5, NormOrder::L2).is_err());
    }

    #[test]
    fn h1_adds_gradient() {
        let g = Grid1D::new(-1.0, 1.0, 2001).unwrap();
        let s = SimState::new(g, Field::from_real_fn(&g, |x| x), None).unwrap();
        let l2 = local_seminorm(&s, 1.0, NormOrder::L2).unwrap();
        let h1 = local_seminorm(&s, 1.0, NormOrder::H1).unwrap();
        assert!((l2 * l2 - 2.0 / 3.0).abs() < 1e-6);
        assert!((h1 * h1 - l2 * l2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_window() {
        let g = Grid1D::new(-10.0, 10.0, 2001).unwrap();
        let f = Field::from_real_fn(&g, |x| if x > 2.0 { 1.0 } else { 0.0 });
        let n = window_norm(&g, &f, None, 5.0, 2.0, NormOrder::L2).unwrap();
        assert!((n - 2.0).abs() < 1e-10);
    }
}
