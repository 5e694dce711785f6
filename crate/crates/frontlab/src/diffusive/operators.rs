//! Profiles are sampled on uniform grids. Functions of `xi` start at
//! `xi = 0`, vanish there (they are continued as odd functions, which keeps
//! the centred stencils fourth order up to the boundary) and are continued
//! past the last sample by quartic extrapolation, since weighted profiles
//! like `xi e^{-xi^2/8}` have not quite decayed at the far end.

use crate::numerics::{trapezoid, Grid1D};

/// `1 / sqrt(2 sqrt(pi))`: makes `xi e^{-xi^2/8}` a unit vector of
/// `L^2(0, inf)`.
pub const NULL_MODE_NORM: f64 = 0.531_125_966_013_598_4;

/// The unit null mode `xi e^{-xi^2/8} / sqrt(2 sqrt(pi))` of the
/// symmetrized operator.
pub fn null_mode(xi: f64) -> f64 {
    NULL_MODE_NORM * xi * (-xi * xi / 8.0).exp()
}

fn odd_ghosts(w: &[f64], i: isize) -> f64 {
    let n = w.len();
    if i < 0 {
        -w[(-i) as usize]
    } else if i as usize >= n {
        let last = n - 1;
        // quartic through the last five samples, one or two cells out
        let p = |k: usize| w[last - k];
        let one = 5.0 * p(0) - 10.0 * p(1) + 10.0 * p(2) - 5.0 * p(3) + p(4);
        if i as usize == n {
            one
        } else {
            5.0 * one - 10.0 * p(0) + 10.0 * p(1) - 5.0 * p(2) + p(3)
        }
    } else {
        w[i as usize]
    }
}

fn zero_ghosts(w: &[f64], i: isize) -> f64 {
    if i < 0 || i >= w.len() as isize {
        0.0
    } else {
        w[i as usize]
    }
}

// fourth-order centred first and second differences at node i
fn differences(get: impl Fn(isize) -> f64, i: usize, h: f64) -> (f64, f64) {
    let i = i as isize;
    let (m2, m1, c, p1, p2) = (get(i - 2), get(i - 1), get(i), get(i + 1), get(i + 2));
    let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let d2 = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
    (d1, d2)
}

/// `w'' + (xi/2) w' + w` for a profile starting at `xi = 0` with step `h`.
pub fn apply_selfsimilar_operator(w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let (d1, d2) = differences(|k| odd_ghosts(w, k), i, h);
            let xi = i as f64 * h;
            d2 + 0.5 * xi * d1 + w[i]
        })
        .collect()
}

/// `w'' + (3/4 - xi^2/16) w`, the conjugate of the self-similar operator
/// under `w = e^{xi^2/8} v`.
pub fn apply_symmetrized_operator(w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let (_, d2) = differences(|k| odd_ghosts(w, k), i, h);
            let xi = i as f64 * h;
            d2 + (0.75 - xi * xi / 16.0) * w[i]
        })
        .collect()
}

/// `w'' + (zeta/2) w'` on a whole-line grid, zero beyond both ends.
pub fn apply_transverse_operator(w: &[f64], grid: &Grid1D) -> Vec<f64> {
    let h = grid.h();
    (0..w.len())
        .map(|i| {
            let (d1, d2) = differences(|k| zero_ghosts(w, k), i, h);
            d2 + 0.5 * grid.x(i) * d1
        })
        .collect()
}

/// `<w, e_0>` on the grid (trapezoid rule; the integrand is even and
/// decaying, so the rule converges spectrally).
pub fn project_null_mode(w: &[f64], grid: &Grid1D) -> f64 {
    let prod: Vec<f64> = w.iter().enumerate().map(|(i, v)| v * null_mode(grid.x(i))).collect();
    trapezoid(&prod, grid.h())
}

/// `w - <w, e_0> e_0`.
pub fn null_mode_residual(w: &[f64], grid: &Grid1D) -> Vec<f64> {
    let alpha = project_null_mode(w, grid);
    w.iter()
        .enumerate()
        .map(|(i, v)| v - alpha * null_mode(grid.x(i)))
        .collect()
}

/// `int (w')^2 + (xi^2/16 - 3/4) w^2 dxi`, the quadratic form of minus the
/// symmetrized operator.
pub fn quadratic_form(w: &[f64], grid: &Grid1D) -> f64 {
    let h = grid.h();
    let integrand: Vec<f64> = (0..w.len())
        .map(|i| {
            let (d1, _) = differences(|k| odd_ghosts(w, k), i, h);
            let xi = grid.x(i);
            d1 * d1 + (xi * xi / 16.0 - 0.75) * w[i] * w[i]
        })
        .collect();
    trapezoid(&integrand, h)
}
