use super::NumericsError;

const PIVOT_FLOOR: f64 = 1e-300;

/// Solves a tridiagonal system with the Thomas algorithm (no pivoting).
///
/// `lower[i]` couples row `i + 1` to unknown `i`; `upper[i]` couples row `i`
/// to unknown `i + 1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let factor = ThomasFactor::new(lower, diag, upper)?;
    if rhs.len() != diag.len() {
        return Err(NumericsError::BandShape {
            diag: diag.len(),
            lower: lower.len(),
            upper: upper.len(),
            rhs: rhs.len(),
        });
    }
    let mut x = rhs.to_vec();
    factor.solve_in_place(&mut x);
    Ok(x)
}

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_mod: Vec<f64>,
}

impl ThomasFactor {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self, NumericsError> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(NumericsError::BandShape {
                diag: n,
                lower: lower.len(),
                upper: upper.len(),
                rhs: n,
            });
        }
        let mut inv_pivot = vec![0.0; n];
        let mut upper_mod = vec![0.0; n.saturating_sub(1)];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i - 1] * prev_upper
            };
            if !(pivot.abs() >= PIVOT_FLOOR) {
                return Err(NumericsError::SingularSystem { row: i, pivot });
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                prev_upper = upper[i] * inv_pivot[i];
                upper_mod[i] = prev_upper;
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            inv_pivot,
            upper_mod,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper_mod[i] * x[i + 1];
        }
    }

    /// Solves `lanes` systems at once, stored interleaved: unknown `i` of
    /// system `b` is `x[i * lanes + b]`. Each system sees exactly the
    /// arithmetic of [`ThomasFactor::solve_in_place`].
    pub fn solve_lanes(&self, x: &mut [f64], lanes: usize) {
        let n = self.len();
        debug_assert_eq!(x.len(), n * lanes);
        let p0 = self.inv_pivot[0];
        x[..lanes].iter_mut().for_each(|v| *v *= p0);
        for i in 1..n {
            let (done, rest) = x.split_at_mut(i * lanes);
            let prev = &done[(i - 1) * lanes..];
            let (l, p) = (self.lower[i - 1], self.inv_pivot[i]);
            for (c, q) in rest[..lanes].iter_mut().zip(prev) {
                *c = (*c - l * q) * p;
            }
        }
        for i in (0..n - 1).rev() {
            let (head, next) = x.split_at_mut((i + 1) * lanes);
            let u = self.upper_mod[i];
            for (c, q) in head[i * lanes..].iter_mut().zip(&next[..lanes]) {
                *c -= u * q;
            }
        }
    }
}

/// Periodic tridiagonal system: the band plus the two corner couplings,
/// solved by a Sherman-Morrison correction of a Thomas solve.
#[derive(Debug, Clone)]
pub struct CyclicFactor {
    inner: ThomasFactor,
    correction: Vec<f64>,
    top_right: f64,
    gamma: f64,
}

impl CyclicFactor {
    /// `top_right` multiplies the last unknown in row 0, `bottom_left` the
    /// first unknown in the last row.
    pub fn new(
        lower: &[f64],
        diag: &[f64],
        upper: &[f64],
        top_right: f64,
        bottom_left: f64,
    ) -> Result<Self, NumericsError> {
        let n = diag.len();
        if n < 3 {
            return Err(NumericsError::BandShape {
                diag: n,
                lower: lower.len(),
                upper: upper.len(),
                rhs: n,
            });
        }
        let gamma = -diag[0];
        let mut d = diag.to_vec();
        d[0] -= gamma;
        d[n - 1] -= bottom_left * top_right / gamma;
        let inner = ThomasFactor::new(lower, &d, upper)?;
        let mut z = vec![0.0; n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        inner.solve_in_place(&mut z);
        let denom = 1.0 + z[0] + top_right * z[n - 1] / gamma;
        if !(denom.abs() >= PIVOT_FLOOR) {
            return Err(NumericsError::SingularSystem {
                row: n - 1,
                pivot: denom,
            });
        }
        Ok(Self {
            inner,
            correction: z,
            top_right,
            gamma,
        })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.inner.len();
        self.inner.solve_in_place(x);
        let z = &self.correction;
        let fact =
            (x[0] + self.top_right * x[n - 1] / self.gamma) / (1.0 + z[0] + self.top_right * z[n - 1] / self.gamma);
        for (xi, zi) in x.iter_mut().zip(z) {
            *xi -= fact * zi;
        }
    }

    /// Interleaved counterpart of [`CyclicFactor::solve_in_place`], see
    /// [`ThomasFactor::solve_lanes`].
    pub fn solve_lanes(&self, x: &mut [f64], lanes: usize) {
        let n = self.inner.len();
        self.inner.solve_lanes(x, lanes);
        let z = &self.correction;
        let denom = 1.0 + z[0] + self.top_right * z[n - 1] / self.gamma;
        let facts: Vec<f64> = (0..lanes)
            .map(|b| (x[b] + self.top_right * x[(n - 1) * lanes + b] / self.gamma) / denom)
            .collect();
        for (row, zi) in x.chunks_exact_mut(lanes).zip(z) {
            for (xi, f) in row.iter_mut().zip(&facts) {
                *xi -= f * zi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn band_mul(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn identity_system() {
        let r = vec![1.0, -2.0, 3.5];
        let x = solve_tridiagonal(&[0.0, 0.0], &[1.0; 3], &[0.0, 0.0], &r).unwrap();
        assert_eq!(x, r);
    }

    #[test]
    fn two_by_two() {
        let x = solve_tridiagonal(&[1.0], &[2.0, 2.0], &[1.0], &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_dominant_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(2.5..4.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &b).unwrap();
        let ax = band_mul(&lower, &diag, &upper, &x);
        let res = ax.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn singular_pivot_is_reported() {
        let err = solve_tridiagonal(&[1.0], &[1.0, 1.0], &[1.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, NumericsError::SingularSystem { row: 1, .. }));
        assert!(matches!(
            solve_tridiagonal(&[], &[0.0], &[], &[1.0]),
            Err(NumericsError::SingularSystem { row: 0, .. })
        ));
    }

    #[test]
    fn lanes_match_single_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let lanes = 5;
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..0.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..0.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(3.0..4.0)).collect();
        let systems: Vec<Vec<f64>> = (0..lanes)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let interleave = |s: &[Vec<f64>]| -> Vec<f64> { (0..n * lanes).map(|k| s[k % lanes][k / lanes]).collect() };

        let f = ThomasFactor::new(&lower, &diag, &upper).unwrap();
        let mut x = interleave(&systems);
        f.solve_lanes(&mut x, lanes);
        let mut single = systems.clone();
        single.iter_mut().for_each(|s| f.solve_in_place(s));
        assert_eq!(x, interleave(&single));

        let f = CyclicFactor::new(&lower, &diag, &upper, -0.3, -0.6).unwrap();
        let mut x = interleave(&systems);
        f.solve_lanes(&mut x, lanes);
        let mut single = systems;
        single.iter_mut().for_each(|s| f.solve_in_place(s));
        assert_eq!(x, interleave(&single));
    }

    #[test]
    fn cyclic_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..0.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..0.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(3.0..4.0)).collect();
        let (tr, bl) = (-0.7, -0.4);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = CyclicFactor::new(&lower, &diag, &upper, tr, bl).unwrap();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let mut ax = band_mul(&lower, &diag, &upper, &x);
        ax[0] += tr * x[n - 1];
        ax[n - 1] += bl * x[0];
        for (a, b) in ax.iter().zip(&b) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
