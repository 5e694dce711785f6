//! The critical traveling wave: `U'' + 2U' + U(1-U) = 0`, `U(-inf) = 1`,
//! `U(+inf) = 0`, normalized so that `U(0) = 1/2`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimal speed of the Fisher-KPP nonlinearity `u(1-u)`.
pub const CRITICAL_SPEED: f64 = 2.0;

/// Decay rate of `1 - U` at `x -> -inf` for the critical speed: root of
/// `m^2 + 2m - 1 = 0`.
pub const LEFT_DECAY: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Default window for the tail constant, in the coordinates where the tail
/// reads `(x + k) e^{-x}`.
pub const DEFAULT_TAIL_WINDOW: (f64, f64) = (8.0, 12.0);

const INITIAL_DEFICIT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("wave integration never crossed 1/2 inside the domain (last value {last})")]
    NonConvergence { last: f64 },
    #[error("invalid wave parameters: {0}")]
    InvalidParameter(String),
    #[error("tail window [{lo}, {hi}] outside the admissible range [5, {max}]")]
    WindowOutOfRange { lo: f64, hi: f64, max: f64 },
}

/// Result of fitting the `(x + k) e^{-x}` tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub k_hat: f64,
    /// max over the window of `|e^x U(x) - x - k_hat|` in tail coordinates
    pub max_deviation: f64,
    /// slope `A` of `e^x U(x) ~ A x + B` in the half-level normalization
    pub scale: f64,
    /// `ln A`: the half-level profile is the unit-slope tail profile moved
    /// right by this amount
    pub shift: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveProfile {
    x0: f64,
    h: f64,
    us: Vec<f64>,
    dus: Vec<f64>,
    pub c: f64,
    pub k_hat: f64,
    // right extrapolation (a x + b) e^{-x}, C^1-matched to the last sample
    tail_a: f64,
    tail_b: f64,
}

type State = [f64; 2];

// U'' = -2U' - U(1-U), written for the deficit p = 1 - U while p < 1/2 so
// that the tiny initial deficit is represented without cancellation.
fn rhs_deficit(s: State) -> State {
    [s[1], -2.0 * s[1] + s[0] * (1.0 - s[0])]
}

fn rhs_value(s: State) -> State {
    [s[1], -2.0 * s[1] - s[0] * (1.0 - s[0])]
}

fn rk4(f: fn(State) -> State, s: State, h: f64) -> State {
    let k1 = f(s);
    let k2 = f([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
    let k3 = f([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
    let k4 = f([s[0] + h * k3[0], s[1] + h * k3[1]]);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

struct Trajectory {
    us: Vec<f64>,
    dus: Vec<f64>,
    half: Option<f64>,
}

// Integrates from x0 over n steps starting on the unstable manifold of
// (1, 0) with deficit `delta`; records where U crosses 1/2.
fn integrate(x0: f64, h: f64, n: usize, delta: f64) -> Trajectory {
    let mut us = Vec::with_capacity(n + 1);
    let mut dus = Vec::with_capacity(n + 1);
    let mut s = [delta, LEFT_DECAY * delta];
    let mut on_deficit = true;
    let mut half = None;
    us.push(1.0 - s[0]);
    dus.push(-s[1]);
    for i in 0..n {
        if on_deficit {
            let next = rk4(rhs_deficit, s, h);
            if next[0] >= 0.5 {
                // switch to U itself for the tail
                s = [1.0 - s[0], -s[1]];
                on_deficit = false;
                let next = rk4(rhs_value, s, h);
                half = Some(hermite_root(x0 + i as f64 * h, h, s, next, 0.5));
                s = next;
            } else {
                s = next;
            }
        } else {
            s = rk4(rhs_value, s, h);
        }
        if on_deficit {
            us.push(1.0 - s[0]);
            dus.push(-s[1]);
        } else {
            us.push(s[0]);
            dus.push(s[1]);
        }
    }
    Trajectory { us, dus, half }
}

fn hermite(h: f64, a: State, b: State, t: f64) -> f64 {
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * a[0]
        + (t3 - 2.0 * t2 + t) * h * a[1]
        + (-2.0 * t3 + 3.0 * t2) * b[0]
        + (t3 - t2) * h * b[1]
}

// root of the cubic Hermite interpolant between two decreasing samples
fn hermite_root(xa: f64, h: f64, a: State, b: State, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hermite(h, a, b, mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    xa + 0.5 * (lo + hi) * h
}

/// Integrates the critical wave on `[-half_width, half_width]` with RK4 step
/// close to `step`, translated so that `U(0) = 1/2`.
pub fn compute_wave(half_width: f64, step: f64) -> Result<WaveProfile, WaveError> {
    if !(half_width >= 30.0) || !half_width.is_finite() {
        return Err(WaveError::InvalidParameter(format!(
            "domain half width {half_width} must be at least 30"
        )));
    }
    if !(step > 0.0 && step <= 1e-2) {
        return Err(WaveError::InvalidParameter(format!(
            "integration step {step} must lie in (0, 0.01]"
        )));
    }
    let mut n = (2.0 * half_width / step).ceil() as usize;
    n += n % 2;
    let h = 2.0 * half_width / n as f64;
    let x0 = -half_width;

    // The manifold is parametrized by the deficit: starting at deficit
    // delta * e^{m s} is the same orbit moved left by s. Newton on the
    // half-level position converges in a few passes.
    let mut delta = INITIAL_DEFICIT;
    let mut traj = integrate(x0, h, n, delta);
    for _ in 0..12 {
        let Some(half) = traj.half else {
            return Err(WaveError::NonConvergence {
                last: *traj.us.last().unwrap_or(&f64::NAN),
            });
        };
        if half.abs() < 1e-13 {
            break;
        }
        delta *= (LEFT_DECAY * half).exp();
        traj = integrate(x0, h, n, delta);
    }
    let mid = traj.us[n / 2];
    if (mid - 0.5).abs() > 1e-10 {
        return Err(WaveError::NonConvergence { last: mid });
    }
    let mut profile = WaveProfile::assemble(x0, h, traj.us, traj.dus);
    profile.k_hat = profile.fit_tail_k(DEFAULT_TAIL_WINDOW)?.k_hat;
    Ok(profile)
}

impl WaveProfile {
    /// Profile from uniform samples and derivatives. Used for synthetic
    /// profiles; `k_hat` is left undetermined (NaN).
    pub fn from_samples(x0: f64, h: f64, us: Vec<f64>, dus: Vec<f64>) -> Self {
        Self::assemble(x0, h, us, dus)
    }

    fn assemble(x0: f64, h: f64, us: Vec<f64>, dus: Vec<f64>) -> Self {
        let n = us.len() - 1;
        let xl = x0 + n as f64 * h;
        let (ul, dl) = (us[n], dus[n]);
        let tail_a = (dl + ul) * xl.exp();
        let tail_b = ul * xl.exp() - tail_a * xl;
        Self {
            x0,
            h,
            us,
            dus,
            c: CRITICAL_SPEED,
            k_hat: f64::NAN,
            tail_a,
            tail_b,
        }
    }

    pub fn x_first(&self) -> f64 {
        self.x0
    }

    pub fn x_last(&self) -> f64 {
        self.x0 + (self.us.len() - 1) as f64 * self.h
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.us.len()).map(|i| self.x0 + i as f64 * self.h).collect()
    }

    pub fn us(&self) -> &[f64] {
        &self.us
    }

    pub fn dus(&self) -> &[f64] {
        &self.dus
    }

    /// `U(x)`: cubic Hermite inside the sampled domain, the manifold
    /// exponential to the left, the matched `(a x + b) e^{-x}` tail to the
    /// right.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x <= self.x0 {
            let deficit = 1.0 - self.us[0];
            return 1.0 - deficit * (LEFT_DECAY * (x - self.x0)).exp();
        }
        let n = self.us.len() - 1;
        let s = (x - self.x0) / self.h;
        if s >= n as f64 {
            return (self.tail_a * x + self.tail_b) * (-x).exp();
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        hermite(self.h, [self.us[i], self.dus[i]], [self.us[i + 1], self.dus[i + 1]], t)
    }

    /// `U(x + shift)`.
    pub fn evaluate_shifted(&self, x: f64, shift: f64) -> f64 {
        self.evaluate(x + shift)
    }

    /// The unique `x` with `U(x) = level`, by bisection.
    pub fn inverse_level(&self, level: f64) -> f64 {
        let (mut lo, mut hi) = (self.x0 - 60.0, self.x_last() + 60.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.evaluate(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Fits the tail constant `k` of `U ~ (x + k) e^{-x}`.
    ///
    /// With the half-level normalization the tail is `A (x + B/A) e^{-x}`
    /// with `A != 1`, so the window is read in the unit-slope translate
    /// `U(x + ln A)`: there `e^x U - x` should be flat, and its mean over the
    /// window is `k`.
    pub fn fit_tail_k(&self, window: (f64, f64)) -> Result<TailFit, WaveError> {
        let (lo, hi) = window;
        let max = self.x_last() - 2.0;
        if !(lo >= 5.0 && lo < hi && hi <= max) {
            return Err(WaveError::WindowOutOfRange { lo, hi, max });
        }
        let xs = self.xs();
        let mut shift = 0.0;
        let mut fit = (1.0, 0.0);
        for _ in 0..100 {
            let pts: Vec<(f64, f64)> = xs
                .iter()
                .zip(&self.us)
                .filter(|(x, _)| **x - shift >= lo && **x - shift <= hi)
                .map(|(x, u)| (*x, x.exp() * u))
                .collect();
            if pts.len() < 2 || shift + hi > self.x_last() {
                return Err(WaveError::WindowOutOfRange { lo, hi, max });
            }
            fit = linear_fit(&pts);
            if !(fit.0 > 0.0) {
                return Err(WaveError::NonConvergence { last: fit.0 });
            }
            let next = fit.0.ln();
            let done = (next - shift).abs() < 1e-12;
            shift = next;
            if done {
                break;
            }
        }
        let scale = fit.0;
        let devs: Vec<f64> = xs
            .iter()
            .zip(&self.us)
            .filter(|(x, _)| **x - shift >= lo && **x - shift <= hi)
            .map(|(x, u)| x.exp() * u / scale - (x - shift))
            .collect();
        let k_hat = devs.iter().sum::<f64>() / devs.len() as f64;
        let max_deviation = devs.iter().map(|d| (d - k_hat).abs()).fold(0.0, f64::max);
        Ok(TailFit {
            k_hat,
            max_deviation,
            scale,
            shift,
            window,
        })
    }

    /// Root-mean-square of the centered-difference ODE residual over the
    /// interior samples.
    pub fn ode_residual_rms(&self) -> f64 {
        let h = self.h;
        let u = &self.us;
        let n = u.len();
        let sum: f64 = (1..n - 1)
            .map(|i| {
                let r = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)
                    + self.c * (u[i + 1] - u[i - 1]) / (2.0 * h)
                    + u[i] * (1.0 - u[i]);
                r * r
            })
            .sum();
        (sum / (n - 2) as f64).sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,U")?;
        for (x, u) in self.xs().iter().zip(&self.us) {
            writeln!(out, "{x:.6},{u:.17e}")?;
        }
        Ok(())
    }
}

// least squares y = a x + b
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn wave() -> &'static WaveProfile {
        static W: OnceLock<WaveProfile> = OnceLock::new();
        W.get_or_init(|| compute_wave(40.0, 0.005).unwrap())
    }

    #[test]
    fn normalization_and_limits() {
        let w = wave();
        assert!((w.evaluate(0.0) - 0.5).abs() <= 1e-10);
        assert!(w.us()[0] >= 1.0 - 1e-6);
        assert!(*w.us().last().unwrap() <= 1e-8);
        assert!(w.us().windows(2).all(|p| p[1] < p[0]));
        assert_eq!(w.c, 2.0);
    }

    #[test]
    fn ode_residual_by_independent_stencil() {
        // five-point stencil, independent of the three-point one above
        let w = wave();
        let (h, u) = (w.step(), w.us());
        let mut sum = 0.0;
        for i in 2..u.len() - 2 {
            let d2 = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h * h);
            let d1 = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
            let r = d2 + 2.0 * d1 + u[i] * (1.0 - u[i]);
            sum += r * r;
        }
        assert!((sum / (u.len() - 4) as f64).sqrt() <= 1e-6);
        assert!(w.ode_residual_rms() <= 1e-6);
    }

    #[test]
    fn tail_is_linear_times_exponential() {
        let fit = wave().fit_tail_k((8.0, 12.0)).unwrap();
        assert!(fit.max_deviation <= 1e-2, "{fit:?}");
        assert!((wave().k_hat - fit.k_hat).abs() < 1e-12);
    }

    #[test]
    fn synthetic_tail_constant() {
        let h = 0.01;
        let x0 = 0.0;
        let xs: Vec<f64> = (0..=2000).map(|i| x0 + i as f64 * h).collect();
        let us = xs.iter().map(|x| (x + 3.0) * (-x).exp()).collect();
        let dus = xs.iter().map(|x| (-2.0 - x) * (-x).exp()).collect();
        let p = WaveProfile::from_samples(x0, h, us, dus);
        let fit = p.fit_tail_k((6.0, 10.0)).unwrap();
        assert!((fit.k_hat - 3.0).abs() < 1e-9);
        assert!(fit.shift.abs() < 1e-9);
    }

    #[test]
    fn tail_window_preconditions() {
        let w = wave();
        assert!(matches!(
            w.fit_tail_k((12.0, 8.0)),
            Err(WaveError::WindowOutOfRange { .. })
        ));
        assert!(w.fit_tail_k((4.0, 8.0)).is_err());
        assert!(w.fit_tail_k((8.0, 39.0)).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(compute_wave(20.0, 0.005).is_err());
        assert!(compute_wave(40.0, 0.05).is_err());
    }

    #[test]
    fn shifted_evaluation() {
        let w = wave();
        assert_eq!(w.evaluate_shifted(0.0, 0.0), w.evaluate(0.0));
        assert!((w.evaluate_shifted(-50.0, -3.0) - 1.0).abs() <= 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = rng.gen_range(-60.0..60.0);
            let s = rng.gen_range(-10.0..10.0);
            assert_eq!(w.evaluate_shifted(x, s), w.evaluate_shifted(x + s, 0.0));
        }
        // continuity across both domain edges
        for edge in [w.x_first(), w.x_last()] {
            let d = (w.evaluate(edge - 1e-9) - w.evaluate(edge + 1e-9)).abs();
            assert!(d < 1e-9);
        }
    }

    #[test]
    fn inverse_level_round_trip() {
        let w = wave();
        assert!(w.inverse_level(0.5).abs() < 1e-9);
        assert!((w.inverse_level(w.evaluate(1.0)) - 1.0).abs() < 1e-9);
        for theta in [0.1, 0.3, 0.9] {
            assert!((w.evaluate(w.inverse_level(theta)) - theta).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        wave().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,U\n-40.000000,"));
    }
}
