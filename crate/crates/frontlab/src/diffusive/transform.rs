use crate::numerics::{cubic_sample, Field2D, Frame, Grid1D, Grid2D};

use super::DiffusiveError;

/// `w(tau, xi, y) = e^{x} u(t, x, y) / sqrt(t)` at `x = xi sqrt(t)`,
/// `tau = ln t`. The x-axis of `grid` is the xi-axis; rows are y-major as in
/// [`Field2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarField {
    pub tau: f64,
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl SelfSimilarField {
    pub fn from_fn(tau: f64, grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let field = Field2D::from_fn(grid, Frame::SelfSimilar, f);
        Self {
            tau,
            grid,
            values: field.values,
        }
    }

    pub fn t(&self) -> f64 {
        self.tau.exp()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.gx.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.gx.len() + i]
    }
}

/// The xi-grid whose nodes are the x-nodes in `[0, xi_max sqrt(t)]`
/// divided by `sqrt(t)`, so the transform samples the field without
/// interpolation. Fails when the x-grid does not reach `xi = 8`.
pub fn aligned_xi_grid(gx: &Grid1D, t: f64, xi_max: f64) -> Result<Grid1D, DiffusiveError> {
    let root = t.sqrt();
    let h = gx.h();
    let first = ((0.0 - gx.x_min) / h - 1e-9).ceil().max(0.0) as usize;
    let last_x = (xi_max * root).min(gx.x_max);
    let last = ((last_x - gx.x_min) / h + 1e-9).floor() as usize;
    let reach = gx.x(last) / root;
    if last <= first || reach < 8.0 - 1e-9 {
        return Err(DiffusiveError::DomainTooShort { xi_max: reach });
    }
    Ok(Grid1D::new(gx.x(first) / root, reach, last - first)?)
}

/// Self-similar view of a moving-frame field at time `t`. Values off the
/// x-nodes are taken from the four-point interpolant.
pub fn to_selfsimilar(state: &Field2D, t: f64, xi_grid: Grid1D) -> Result<SelfSimilarField, DiffusiveError> {
    if state.frame != Frame::Moving {
        return Err(DiffusiveError::FrameMismatch(state.frame));
    }
    if xi_grid.x_max < 8.0 - 1e-9 {
        return Err(DiffusiveError::DomainTooShort { xi_max: xi_grid.x_max });
    }
    let root = t.sqrt();
    let gx = state.grid.gx;
    let mut values = Vec::with_capacity(xi_grid.len() * state.ny());
    for row in state.rows() {
        for i in 0..xi_grid.len() {
            let mut x = xi_grid.x(i) * root;
            // absorb roundoff at the two ends of the x-grid
            let slack = 1e-9 * gx.h();
            if x > gx.x_max && x < gx.x_max + slack {
                x = gx.x_max;
            } else if x < gx.x_min && x > gx.x_min - slack {
                x = gx.x_min;
            }
            let u = cubic_sample(gx.x_min, gx.h(), row, x).ok_or(DiffusiveError::OutOfDomain { x })?;
            values.push(x.exp() * u / root);
        }
    }
    Ok(SelfSimilarField {
        tau: t.ln(),
        grid: Grid2D::new(xi_grid, state.grid.gy),
        values,
    })
}

/// Moving-frame field `u = sqrt(t) e^{-x} w` on the x-grid `sqrt(t) * xi`.
pub fn from_selfsimilar(w: &SelfSimilarField) -> Field2D {
    let root = w.t().sqrt();
    let gxi = w.grid.gx;
    let gx = Grid1D {
        x_min: gxi.x_min * root,
        x_max: gxi.x_max * root,
        n: gxi.n,
    };
    let n = gxi.len();
    let values = w
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| root * (-gx.x(k % n)).exp() * v)
        .collect();
    Field2D {
        grid: Grid2D::new(gx, w.grid.gy),
        values,
        frame: Frame::Moving,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moving(t: f64, f: impl Fn(f64, f64) -> f64) -> Field2D {
        let grid = Grid2D::new(
            Grid1D::with_spacing(-20.0, 150.0, 0.05).unwrap(),
            Grid1D::new(0.0, 4.0, 4).unwrap(),
        );
        let _ = t;
        Field2D::from_fn(grid, Frame::Moving, f)
    }

    #[test]
    fn self_similar_profile_is_recovered() {
        let t = 100.0_f64;
        let g = |xi: f64| xi * (-xi * xi / 4.0).exp();
        let u = moving(t, |x, y| (1.0 + 0.1 * y) * t.sqrt() * (-x).exp() * g(x / t.sqrt()));
        let xi = aligned_xi_grid(&u.grid.gx, t, 12.0).unwrap();
        assert_eq!(xi.x_min, 0.0);
        let w = to_selfsimilar(&u, t, xi).unwrap();
        for j in 0..u.ny() {
            for i in 0..xi.len() {
                let exact = (1.0 + 0.1 * u.grid.gy.x(j)) * g(xi.x(i));
                assert!((w.at(i, j) - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn round_trip() {
        let t = 49.0_f64;
        let u = moving(t, |x, y| {
            (1.0 + y) * (-(x - 3.0).powi(2) / 50.0).exp() / (1.0 + (-x).exp())
        });
        let xi = aligned_xi_grid(&u.grid.gx, t, 12.0).unwrap();
        let w = to_selfsimilar(&u, t, xi).unwrap();
        let back = from_selfsimilar(&w);
        let offset = u.grid.gx.nearest(0.0);
        for j in 0..u.ny() {
            for i in 0..back.nx() {
                let a = back.at(i, j);
                let b = u.at(offset + i, j);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} {b}");
                assert!((back.grid.gx.x(i) - u.grid.gx.x(offset + i)).abs() < 1e-9);
            }
        }
        let again = to_selfsimilar(&back, t, xi).unwrap();
        for (a, b) in again.values.iter().zip(&w.values) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn short_domains_and_wrong_frames_are_rejected() {
        let t = 1000.0_f64;
        let u = moving(t, |_, _| 0.5);
        // 150 / sqrt(1000) < 8
        assert!(matches!(
            aligned_xi_grid(&u.grid.gx, t, 12.0),
            Err(DiffusiveError::DomainTooShort { .. })
        ));
        let mut lab = u.clone();
        lab.frame = Frame::Lab;
        let xi = Grid1D::new(0.0, 12.0, 120).unwrap();
        assert!(matches!(
            to_selfsimilar(&lab, 100.0, xi),
            Err(DiffusiveError::FrameMismatch(Frame::Lab))
        ));
        assert!(matches!(
            to_selfsimilar(&u, t, xi),
            Err(DiffusiveError::OutOfDomain { .. })
        ));
    }
}
