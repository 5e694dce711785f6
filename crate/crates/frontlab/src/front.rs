//! Level sets of the solution, their offset from the wave, the Bramson fit,
//! and distances to wave translates.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kpp1d::{frame_origin, Run1D};
use crate::kpp2d::Run2D;
use crate::numerics::{refine_level_crossing, Field2D, Frame, Grid1D};
use crate::wave::WaveProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("only {found} of {rows} rows cross the level")]
    NoFront { found: usize, rows: usize },
    #[error("{found} checkpoints in the fit window, at least {needed} required")]
    InsufficientData { found: usize, needed: usize },
    #[error("grids or checkpoints do not line up: {0}")]
    GridMismatch(String),
    #[error("level {0} outside (0.05, 0.95)")]
    InvalidLevel(f64),
}

/// Downward crossing of `level` in one x-profile, refined with a local cubic.
pub fn row_crossing(row: &[f64], grid: &Grid1D, level: f64) -> Option<f64> {
    refine_level_crossing(grid.x_min, grid.h(), row, level)
}

/// Per-row crossings and their offsets from the wave anchor `U^{-1}(level)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontSlice {
    pub sigma: Vec<Option<f64>>,
    pub sigma_inf: Vec<Option<f64>>,
}

pub fn extract_front(state: &Field2D, level: f64, profile: &WaveProfile) -> Result<FrontSlice, FrontError> {
    if !(level > 0.05 && level < 0.95) {
        return Err(FrontError::InvalidLevel(level));
    }
    let anchor = profile.inverse_level(level);
    let sigma: Vec<Option<f64>> = state
        .rows()
        .map(|row| row_crossing(row, &state.grid.gx, level))
        .collect();
    let found = sigma.iter().filter(|s| s.is_some()).count();
    if 2 * found < sigma.len() {
        return Err(FrontError::NoFront {
            found,
            rows: sigma.len(),
        });
    }
    let sigma_inf = sigma.iter().map(|s| s.map(|s| s - anchor)).collect();
    Ok(FrontSlice { sigma, sigma_inf })
}

/// Front positions over time on a y-grid (a single row for 1D runs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub level: f64,
    pub anchor: f64,
    pub frame: Frame,
    pub times: Vec<f64>,
    pub ys: Vec<f64>,
    /// `sigma[k][j]`: crossing at checkpoint `k`, row `j`
    pub sigma: Vec<Vec<Option<f64>>>,
    pub sigma_inf: Vec<Vec<Option<f64>>>,
}

impl FrontTrace {
    pub fn new(level: f64, profile: &WaveProfile, frame: Frame, ys: Vec<f64>) -> Self {
        Self {
            level,
            anchor: profile.inverse_level(level),
            frame,
            times: Vec::new(),
            ys,
            sigma: Vec::new(),
            sigma_inf: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, sigma: Vec<Option<f64>>) {
        let anchor = self.anchor;
        self.sigma_inf
            .push(sigma.iter().map(|s| s.map(|s| s - anchor)).collect());
        self.sigma.push(sigma);
        self.times.push(t);
    }

    pub fn from_run1d(run: &Run1D, level: f64, profile: &WaveProfile) -> Self {
        let mut trace = Self::new(level, profile, run.config.frame, vec![0.0]);
        for c in &run.checkpoints {
            trace.push(c.t, vec![row_crossing(&c.values, &run.config.grid, level)]);
        }
        trace
    }

    /// `(t, sigma_inf)` pairs of row `j` where the crossing exists.
    pub fn column(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        self.times
            .iter()
            .zip(&self.sigma_inf)
            .filter_map(|(t, row)| row[j].map(|s| (*t, s)))
            .unzip()
    }

    /// Checkpoint index closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }

    /// Rows flagged as absent at any checkpoint.
    pub fn missing(&self) -> usize {
        self.sigma.iter().flatten().filter(|s| s.is_none()).count()
    }

    /// CSV with columns `t,y,x_level,sigma_inf` (`t,x_level,sigma_inf` for a
    /// single row); absent crossings are written as empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let one_row = self.ys.len() == 1;
        if one_row {
            writeln!(out, "t,x_level,sigma_inf")?;
        } else {
            writeln!(out, "t,y,x_level,sigma_inf")?;
        }
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.12}")).unwrap_or_default();
        for (k, t) in self.times.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                if one_row {
                    writeln!(out, "{t:.6},{},{}", fmt(self.sigma[k][j]), fmt(self.sigma_inf[k][j]))?;
                } else {
                    writeln!(
                        out,
                        "{t:.6},{y:.6},{},{}",
                        fmt(self.sigma[k][j]),
                        fmt(self.sigma_inf[k][j])
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Least-squares fit of `sigma_lab(t) - 2t = beta ln t + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BramsonFit {
    /// coefficient of `ln t` in the lab-frame position (Bramson: -3/2)
    pub beta_hat: f64,
    pub x_inf: f64,
    pub rms: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits positions recorded in `frame` (lab positions or moving-frame
/// offsets) over checkpoints inside `window`.
pub fn fit_bramson(
    times: &[f64],
    positions: &[f64],
    window: (f64, f64),
    frame: Frame,
) -> Result<BramsonFit, FrontError> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(positions)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, s)| {
            let lab_minus_2t = match frame {
                Frame::Moving => frame_origin(*t) + s - 2.0 * t,
                _ => s - 2.0 * t,
            };
            (t.ln(), lab_minus_2t)
        })
        .collect();
    if pts.len() < 8 {
        return Err(FrontError::InsufficientData {
            found: pts.len(),
            needed: 8,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let beta = sxy / sxx;
    let c = my - beta * mx;
    let rms = (pts.iter().map(|p| (p.1 - beta * p.0 - c).powi(2)).sum::<f64>() / n).sqrt();
    Ok(BramsonFit {
        beta_hat: beta,
        x_inf: -c,
        rms,
        window,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeError {
    /// sup of `|u(x) - U(x - sigma_inf)|` over `[sigma - 40, min(sigma + t^{1/4}, sigma + 10)]`
    pub unweighted: f64,
    /// sup of `e^{x - sigma} |u(x) - U(x - sigma_inf)|` over `[sigma - 40, sigma]`
    pub weighted: f64,
}

/// Distance of one x-profile to the wave translate placed at its crossing.
pub fn shape_error(
    row: &[f64],
    grid: &Grid1D,
    profile: &WaveProfile,
    level: f64,
    t: f64,
) -> Result<ShapeError, FrontError> {
    let sigma = row_crossing(row, grid, level).ok_or(FrontError::NoFront { found: 0, rows: 1 })?;
    let shift = sigma - profile.inverse_level(level);
    let hi = (sigma + t.powf(0.25)).min(sigma + 10.0);
    let mut out = ShapeError {
        unweighted: 0.0,
        weighted: 0.0,
    };
    for (i, u) in row.iter().enumerate() {
        let x = grid.x(i);
        if x < sigma - 40.0 || x > hi {
            continue;
        }
        let d = (u - profile.evaluate(x - shift)).abs();
        out.unweighted = out.unweighted.max(d);
        if x <= sigma {
            out.weighted = out.weighted.max((x - sigma).exp() * d);
        }
    }
    Ok(out)
}

/// Sandwich check of a 2D run between two 1D runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `(t, max violation)` per checkpoint; violation is how far the 2D
    /// field exceeds the upper bound or falls below the lower one
    pub per_checkpoint: Vec<(f64, f64)>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn comparison_check<'a>(run2d: &Run2D, hi: &'a Run1D, lo: &'a Run1D) -> Result<SandwichReport, FrontError> {
    let gx = run2d.config.grid.gx;
    for (name, r) in [("upper", hi), ("lower", lo)] {
        if r.config.grid != gx || r.config.dt != run2d.config.dt || r.config.t0 != run2d.config.t0 {
            return Err(FrontError::GridMismatch(format!(
                "{name} bound uses a different grid or step"
            )));
        }
        if r.config.frame != Frame::Moving {
            return Err(FrontError::GridMismatch(format!(
                "{name} bound is not in the moving frame"
            )));
        }
    }
    let tolerance = 1e-8;
    let mut per_checkpoint = Vec::new();
    for env in &run2d.envelopes {
        let t = env.t;
        let find = |r: &'a Run1D| -> Result<&'a crate::kpp1d::Checkpoint1D, FrontError> {
            r.checkpoints
                .iter()
                .find(|c| (c.t - t).abs() < 1e-9)
                .ok_or_else(|| FrontError::GridMismatch(format!("no 1D checkpoint at t = {t}")))
        };
        let (ch, cl) = (find(hi)?, find(lo)?);
        let mut worst: f64 = 0.0;
        for i in 0..gx.len() {
            worst = worst.max(env.max[i] - ch.values[i]).max(cl.values[i] - env.min[i]);
        }
        per_checkpoint.push((env.t, worst));
    }
    let max_violation = per_checkpoint.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SandwichReport {
        pass: max_violation <= tolerance,
        per_checkpoint,
        max_violation,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid2D;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn wave() -> &'static WaveProfile {
        static W: OnceLock<WaveProfile> = OnceLock::new();
        W.get_or_init(|| crate::wave::compute_wave(40.0, 0.005).unwrap())
    }

    fn shifted_field(s: f64, h: f64) -> Field2D {
        let g = Grid2D::new(
            Grid1D::with_spacing(-30.0, 30.0, h).unwrap(),
            Grid1D::new(0.0, 4.0, 4).unwrap(),
        );
        Field2D::from_fn(g, Frame::Moving, |x, _| wave().evaluate(x - s))
    }

    #[test]
    fn exact_translate_gives_its_shift() {
        let f = shifted_field(1.7, 0.05);
        for level in [0.5, 0.3, 0.8] {
            let slice = extract_front(&f, level, wave()).unwrap();
            for s in &slice.sigma_inf {
                assert!((s.unwrap() - 1.7).abs() < 1e-6, "{level}: {s:?}");
            }
        }
    }

    #[test]
    fn heaviside_crossing_within_a_cell() {
        let g = Grid2D::new(
            Grid1D::with_spacing(-10.0, 10.0, 0.1).unwrap(),
            Grid1D::new(0.0, 1.0, 2).unwrap(),
        );
        let f = Field2D::from_fn(g, Frame::Moving, |x, _| if x <= 0.0 { 1.0 } else { 0.0 });
        let slice = extract_front(&f, 0.5, wave()).unwrap();
        assert!(slice.sigma.iter().all(|s| s.unwrap().abs() <= 0.1));
    }

    #[test]
    fn too_few_rows_is_no_front() {
        let g = Grid2D::new(
            Grid1D::with_spacing(-10.0, 10.0, 0.1).unwrap(),
            Grid1D::new(0.0, 4.0, 4).unwrap(),
        );
        let f = Field2D::from_fn(g, Frame::Moving, |x, y| if y < 1.5 && x < 0.0 { 1.0 } else { 0.0 });
        assert!(matches!(
            extract_front(&f, 0.5, wave()),
            Err(FrontError::NoFront { found: 2, rows: 5 })
        ));
        assert!(matches!(
            extract_front(&f, 0.99, wave()),
            Err(FrontError::InvalidLevel(_))
        ));
    }

    #[test]
    fn translating_the_field_translates_the_front() {
        let a = extract_front(&shifted_field(0.3, 0.1), 0.5, wave()).unwrap();
        let b = extract_front(&shifted_field(0.3 + 2.5, 0.1), 0.5, wave()).unwrap();
        for (p, q) in a.sigma.iter().zip(&b.sigma) {
            assert!((q.unwrap() - p.unwrap() - 2.5).abs() < 1e-6);
        }
    }

    fn log_times() -> Vec<f64> {
        (0..40).map(|k| 10f64.powf(1.0 + k as f64 / 12.0)).collect()
    }

    #[test]
    fn fit_recovers_exact_model() {
        let ts = log_times();
        let s: Vec<f64> = ts.iter().map(|t| 2.0 * t - 1.5 * t.ln() - 3.0).collect();
        let fit = fit_bramson(&ts, &s, (1.0, 1e5), Frame::Lab).unwrap();
        assert!((fit.beta_hat + 1.5).abs() < 1e-9);
        assert!((fit.x_inf - 3.0).abs() < 1e-9);
        assert!(fit.rms < 1e-9);
        // the same trajectory seen from the moving frame is a constant offset
        let m: Vec<f64> = ts.iter().map(|_| -3.0).collect();
        let fit = fit_bramson(&ts, &m, (1.0, 1e5), Frame::Moving).unwrap();
        assert!((fit.beta_hat + 1.5).abs() < 1e-9 && (fit.x_inf - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fit_tolerates_small_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ts = log_times();
        let s: Vec<f64> = ts
            .iter()
            .map(|t| 2.0 * t - 1.5 * t.ln() - 3.0 + rng.gen_range(-1e-3..1e-3))
            .collect();
        let fit = fit_bramson(&ts, &s, (1.0, 1e5), Frame::Lab).unwrap();
        assert!((fit.beta_hat + 1.5).abs() < 0.01);
    }

    #[test]
    fn fit_needs_eight_points() {
        let ts = log_times();
        let s = vec![0.0; ts.len()];
        assert!(matches!(
            fit_bramson(&ts, &s, (10.0, 20.0), Frame::Moving),
            Err(FrontError::InsufficientData { .. })
        ));
    }

    #[test]
    fn shape_error_of_exact_translate_vanishes() {
        let f = shifted_field(2.0, 0.05);
        let e = shape_error(f.row(0), &f.grid.gx, wave(), 0.5, 100.0).unwrap();
        assert!(e.unweighted < 1e-10 && e.weighted < 1e-10, "{e:?}");
    }
}
