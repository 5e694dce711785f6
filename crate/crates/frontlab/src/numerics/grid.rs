use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Uniform vertex grid with `n` cells and `n + 1` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, NumericsError> {
        if !(x_min < x_max) || n < 2 || !x_min.is_finite() || !x_max.is_finite() {
            return Err(NumericsError::InvalidGrid { x_min, x_max, n });
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid starting at `x_min` with spacing exactly `h`; `x_max` is rounded
    /// to the nearest whole number of cells.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self, NumericsError> {
        if !(h > 0.0) {
            return Err(NumericsError::InvalidGrid { x_min, x_max, n: 0 });
        }
        let n = ((x_max - x_min) / h).round() as usize;
        Self::new(x_min, x_min + n as f64 * h, n)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.x_min) / self.h()).round();
        s.clamp(0.0, self.n as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub gx: Grid1D,
    pub gy: Grid1D,
}

impl Grid2D {
    pub fn new(gx: Grid1D, gy: Grid1D) -> Self {
        Self { gx, gy }
    }

    pub fn len(&self) -> usize {
        self.gx.len() * self.gy.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Which coordinates a field is sampled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Moving,
    SelfSimilar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub frame: Frame,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>, frame: Frame) -> Result<Self, NumericsError> {
        check_values(grid.len(), &values)?;
        Ok(Self { grid, values, frame })
    }

    pub fn from_fn(grid: Grid1D, frame: Frame, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self { grid, values, frame }
    }
}

/// Values are stored y-major: row `j` holds the x-profile at `gy.x(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub frame: Frame,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>, frame: Frame) -> Result<Self, NumericsError> {
        check_values(grid.len(), &values)?;
        Ok(Self { grid, values, frame })
    }

    pub fn from_fn(grid: Grid2D, frame: Frame, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.gy.len() {
            let y = grid.gy.x(j);
            values.extend((0..grid.gx.len()).map(|i| f(grid.gx.x(i), y)));
        }
        Self { grid, values, frame }
    }

    /// Copies a 1D profile into every row.
    pub fn extrude(profile: &Field1D, gy: Grid1D) -> Self {
        let grid = Grid2D::new(profile.grid, gy);
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..gy.len() {
            values.extend_from_slice(&profile.values);
        }
        Self {
            grid,
            values,
            frame: profile.frame,
        }
    }

    pub fn nx(&self) -> usize {
        self.grid.gx.len()
    }

    pub fn ny(&self) -> usize {
        self.grid.gy.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.nx();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let nx = self.nx();
        &mut self.values[j * nx..(j + 1) * nx]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx() + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.nx())
    }
}

fn check_values(expected: usize, values: &[f64]) -> Result<(), NumericsError> {
    if values.len() != expected {
        return Err(NumericsError::FieldShape {
            expected,
            got: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite { index });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Grid1D::new(1.0, 1.0, 4).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        let s = Grid1D::with_spacing(-40.0, 60.3, 0.1).unwrap();
        assert_eq!(s.n, 1003);
        assert!((s.h() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn field_shape_and_finiteness() {
        let g = Grid1D::new(0.0, 1.0, 2).unwrap();
        assert!(Field1D::new(g, vec![0.0; 3], Frame::Lab).is_ok());
        assert_eq!(
            Field1D::new(g, vec![0.0; 2], Frame::Lab),
            Err(NumericsError::FieldShape { expected: 3, got: 2 })
        );
        assert_eq!(
            Field1D::new(g, vec![0.0, f64::NAN, 0.0], Frame::Lab),
            Err(NumericsError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn rows_are_x_profiles() {
        let g = Grid2D::new(Grid1D::new(0.0, 2.0, 2).unwrap(), Grid1D::new(0.0, 1.0, 2).unwrap());
        let f = Field2D::from_fn(g, Frame::Moving, |x, y| x + 10.0 * y);
        assert_eq!(f.row(1), &[5.0, 6.0, 7.0]);
        assert_eq!(f.at(2, 2), 12.0);
    }
}
