use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Type-I discrete cosine transform of `n + 1` samples,
/// `X_k = x_0 + (-1)^k x_n + 2 sum_{j=1}^{n-1} x_j cos(pi j k / n)`,
/// computed through an FFT of the even extension. Applying it twice
/// multiplies by `2n`.
///
/// The cosine vectors are the eigenvectors of the three-point Laplacian on a
/// vertex grid with reflected ghosts, with eigenvalues
/// [`Dct1::laplacian_eigenvalue`].
pub struct Dct1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex<f64>>,
}

impl std::fmt::Debug for Dct1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dct1").field("n", &self.n).finish()
    }
}

impl Dct1 {
    /// Transform for `points = n + 1` samples, `points >= 2`.
    pub fn new(points: usize) -> Self {
        assert!(points >= 2, "a cosine transform needs at least two samples");
        let n = points - 1;
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        Self {
            n,
            fft,
            buffer: vec![Complex::new(0.0, 0.0); 2 * n],
        }
    }

    pub fn points(&self) -> usize {
        self.n + 1
    }

    /// In place, unnormalized.
    pub fn transform(&mut self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n + 1);
        for (j, v) in x.iter().enumerate() {
            self.buffer[j] = Complex::new(*v, 0.0);
        }
        for (j, v) in x.iter().enumerate().take(n).skip(1) {
            self.buffer[2 * n - j] = Complex::new(*v, 0.0);
        }
        self.fft.process(&mut self.buffer);
        for (k, v) in x.iter_mut().enumerate() {
            *v = self.buffer[k].re;
        }
    }

    /// Inverse of [`Dct1::transform`].
    pub fn inverse(&mut self, x: &mut [f64]) {
        self.transform(x);
        let scale = 1.0 / (2 * self.n) as f64;
        x.iter_mut().for_each(|v| *v *= scale);
    }

    /// Eigenvalue of the three-point Neumann Laplacian with spacing `h` on
    /// cosine mode `k`: `-(4/h^2) sin^2(pi k / 2n)`.
    pub fn laplacian_eigenvalue(&self, k: usize, h: f64) -> f64 {
        let s = (std::f64::consts::PI * k as f64 / (2 * self.n) as f64).sin();
        -4.0 * s * s / (h * h)
    }
}
