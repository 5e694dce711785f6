//! Grids, fields, banded solves, interpolation and quadrature.

mod dct;
mod grid;
mod interp;
mod quad;
mod tridiag;

pub use dct::Dct1;
pub use grid::{Field1D, Field2D, Frame, Grid1D, Grid2D};
pub use interp::{cubic_sample, interp_level_crossing, refine_level_crossing};
pub use quad::{simpson, trapezoid};
pub use tridiag::{solve_tridiagonal, CyclicFactor, ThomasFactor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("tridiagonal band lengths inconsistent: diag {diag}, lower {lower}, upper {upper}, rhs {rhs}")]
    BandShape {
        diag: usize,
        lower: usize,
        upper: usize,
        rhs: usize,
    },
    #[error("invalid grid [{x_min}, {x_max}] with {n} cells")]
    InvalidGrid { x_min: f64, x_max: f64, n: usize },
    #[error("field has {got} values but the grid has {expected} points")]
    FieldShape { expected: usize, got: usize },
    #[error("field value at index {index} is not finite")]
    NonFinite { index: usize },
}

/// Error function, absolute error below 1e-15 on the real line.
///
/// Power series below |z| = 3, continued fraction for the complement above.
/// Odd symmetry is exact because only |z| is ever evaluated.
pub fn erf(z: f64) -> f64 {
    let a = z.abs();
    let v = if a < 3.0 { erf_series(a) } else { 1.0 - erfc_fraction(a) };
    if z < 0.0 {
        -v
    } else {
        v
    }
}

/// Complementary error function, with full relative accuracy in the far
/// right tail.
pub fn erfc(z: f64) -> f64 {
    if z >= 3.0 {
        erfc_fraction(z)
    } else {
        1.0 - erf(z)
    }
}

// erf z = 2/sqrt(pi) e^{-z^2} sum 2^n z^{2n+1} / (2n+1)!!, all terms positive
fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
    }
    std::f64::consts::FRAC_2_SQRT_PI * (-z2).exp() * sum
}

// erfc z = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
// evaluated bottom-up; 60 levels are plenty for z >= 3
fn erfc_fraction(z: f64) -> f64 {
    let mut t = z;
    for n in (1..=60).rev() {
        t = z + 0.5 * n as f64 / t;
    }
    (-z * z).exp() / (std::f64::consts::PI.sqrt() * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Maclaurin series summed with compensated accumulation; converges for
    // moderate |z| without cancellation trouble below |z| = 2.
    fn erf_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let mut comp = 0.0;
        for n in 1..200 {
            term *= -z * z / n as f64;
            let add = term / (2 * n + 1) as f64 - comp;
            let next = sum + add;
            comp = (next - sum) - add;
            sum = next;
            if term.abs() < 1e-30 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842700792949715).abs() < 1e-12);
        assert!(erf(6.0) >= 1.0 - 1e-12);
        assert!(erf(-6.0) <= -1.0 + 1e-12);
        for k in 0..=40 {
            let z = -2.0 + 0.1 * k as f64;
            assert!((erf(z) - erf_series(z)).abs() < 1e-13, "z = {z}");
        }
    }

    #[test]
    fn erf_is_odd_and_monotone() {
        let mut prev = -1.0;
        for k in 0..=2400 {
            let z = -12.0 + 0.01 * k as f64;
            let e = erf(z);
            assert_eq!(e, -erf(-z));
            assert!(e >= prev && e.abs() <= 1.0);
            prev = e;
        }
    }

    #[test]
    fn erfc_tail() {
        // erfc(5) from tables
        assert!((erfc(5.0) / 1.537_459_794_428_035e-12 - 1.0).abs() < 1e-13);
        // the two branches agree where they meet
        assert!((erf(3.0 - 1e-15) - erf(3.0)).abs() < 1e-15);
    }
}
