//! The transverse heat equation `a_t = a_yy` started at `t = 1`: an exact
//! solution for piecewise-constant data, a Crank-Nicolson stepper with a
//! zero-flux closure, and the bounded self-similar profile with prescribed
//! limits at `±inf`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{erf, erfc, Field1D, Frame, Grid1D, NumericsError, ThomasFactor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("invalid piecewise-constant data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Piecewise-constant function of `y`: `values[k]` on
/// `[breakpoints[k-1], breakpoints[k])`, extended constantly beyond the
/// first and last breakpoints, so there is one more value than breakpoints.
///
/// With `even_symmetric` the breakpoints are positive and describe the
/// half-line `y >= 0`; the function is `f(|y|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub even_symmetric: bool,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, even_symmetric: bool) -> Result<Self, HeatError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(HeatError::InvalidData(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(HeatError::InvalidData(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HeatError::InvalidData("values must be finite".into()));
        }
        if even_symmetric && breakpoints.first().is_some_and(|b| *b <= 0.0) {
            return Err(HeatError::InvalidData("even data take positive breakpoints".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            even_symmetric,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![],
            values: vec![value],
            even_symmetric: false,
        }
    }

    /// Breakpoints and values on the whole line, mirroring even data.
    pub fn full_line(&self) -> (Vec<f64>, Vec<f64>) {
        if !self.even_symmetric {
            return (self.breakpoints.clone(), self.values.clone());
        }
        let mut b: Vec<f64> = self.breakpoints.iter().rev().map(|b| -b).collect();
        b.extend_from_slice(&self.breakpoints);
        let mut v: Vec<f64> = self.values.iter().rev().copied().collect();
        v.extend_from_slice(&self.values[1..]);
        (b, v)
    }

    /// Right-continuous evaluation.
    pub fn evaluate(&self, y: f64) -> f64 {
        let y = if self.even_symmetric { y.abs() } else { y };
        self.values[self.breakpoints.partition_point(|b| *b <= y)]
    }

    /// Exact integral over `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let (b, v) = self.full_line();
        let mut total = 0.0;
        let mut left = lo;
        for (k, value) in v.iter().enumerate() {
            let right = b.get(k).copied().unwrap_or(f64::INFINITY).min(hi);
            if right > left {
                total += value * (right - left);
                left = right;
            }
            if left >= hi {
                break;
            }
        }
        total
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Samples on `grid` as averages over the dual cells
    /// `[y_i - h/2, y_i + h/2]`, halved at the two ends. These are the
    /// initial values for which the stepped solution tracks the exact one
    /// at second order despite the jumps.
    pub fn cell_averages(&self, grid: Grid1D) -> Field1D {
        let h = grid.h();
        let values = (0..grid.len())
            .map(|i| {
                let y = grid.x(i);
                let lo = if i == 0 { y } else { y - 0.5 * h };
                let hi = if i == grid.n { y } else { y + 0.5 * h };
                self.integral(lo, hi) / (hi - lo)
            })
            .collect();
        Field1D {
            grid,
            values,
            frame: Frame::Lab,
        }
    }
}

/// Exact solution at `(t, y)` of the heat equation on the line with data
/// `a0` at `t = 1`; returns `a0(y)` at `t = 1`.
///
/// Written as a sum of smoothed steps,
/// `v_0 + sum_k (v_{k+1} - v_k) erfc((b_k - y) / (2 sqrt(t-1))) / 2`,
/// which keeps full accuracy far from the jumps.
pub fn heat_exact_piecewise(a0: &PiecewiseConstant, t: f64, y: f64) -> f64 {
    if t <= 1.0 {
        return a0.evaluate(y);
    }
    let (b, v) = a0.full_line();
    let scale = 2.0 * (t - 1.0).sqrt();
    let mut total = v[0];
    for (k, bk) in b.iter().enumerate() {
        total += 0.5 * (v[k + 1] - v[k]) * erfc((bk - y) / scale);
    }
    total
}

/// Crank-Nicolson stepping of `a_t = D a_yy` on a vertex grid with zero
/// flux at both ends (ghost values reflected). The trapezoid-weighted mass
/// is conserved exactly by the discrete operator.
#[derive(Debug, Clone)]
pub struct HeatCn {
    factor: ThomasFactor,
    half_r: f64,
    rhs: Vec<f64>,
}

impl HeatCn {
    pub fn new(grid: Grid1D, dt: f64, diffusivity: f64) -> Result<Self, HeatError> {
        let h = grid.h();
        let half_r = 0.5 * diffusivity * dt / (h * h);
        let m = grid.len();
        let mut lower = vec![-half_r; m - 1];
        let mut upper = vec![-half_r; m - 1];
        upper[0] = -2.0 * half_r;
        lower[m - 2] = -2.0 * half_r;
        let factor = ThomasFactor::new(&lower, &vec![1.0 + 2.0 * half_r; m], &upper)?;
        Ok(Self {
            factor,
            half_r,
            rhs: Vec::with_capacity(m),
        })
    }

    pub fn step(&mut self, a: &mut [f64]) {
        let m = a.len();
        let r = self.half_r;
        self.rhs.clear();
        self.rhs.push(a[0] + 2.0 * r * (a[1] - a[0]));
        self.rhs
            .extend((1..m - 1).map(|j| a[j] + r * (a[j - 1] - 2.0 * a[j] + a[j + 1])));
        self.rhs.push(a[m - 1] + 2.0 * r * (a[m - 2] - a[m - 1]));
        self.factor.solve_in_place(&mut self.rhs);
        a.copy_from_slice(&self.rhs);
    }
}

/// Exact solution after `duration` of the heat equation on `[0, length]`
/// with zero flux at both ends, for even data `a0`: the whole-line
/// solution summed over the reflected copies `y + 2 m length`.
pub fn heat_reflected_piecewise(a0: &PiecewiseConstant, length: f64, duration: f64, y: f64) -> f64 {
    if duration <= 0.0 {
        return a0.evaluate(y);
    }
    let (b, v) = a0.full_line();
    let root = 2.0 * duration.sqrt();
    // copies further than 40 kernel widths contribute below 1e-300
    let reach = ((40.0 * root + b.iter().fold(0.0f64, |m, x| m.max(x.abs()))) / (2.0 * length)).ceil() as i64 + 1;
    let mut total = v[0];
    for m in -reach..=reach {
        let shift = 2.0 * length * m as f64;
        for (k, bk) in b.iter().enumerate() {
            total += (v[k + 1] - v[k]) * 0.5 * erfc((bk + shift - y) / root);
        }
    }
    total
}

/// One Crank-Nicolson step of unit diffusivity.
pub fn heat_step_cn(a: &Field1D, dt: f64) -> Result<Field1D, HeatError> {
    let mut out = a.clone();
    HeatCn::new(a.grid, dt, 1.0)?.step(&mut out.values);
    Ok(out)
}

/// Evolves `a` with unit diffusivity over `duration` in steps of at most
/// `dt` (the last step is shortened to land exactly).
pub fn heat_evolve_cn(a: &Field1D, duration: f64, dt: f64) -> Result<Field1D, HeatError> {
    let mut out = a.clone();
    if duration <= 0.0 {
        return Ok(out);
    }
    let steps = (duration / dt).ceil() as usize;
    let dt = duration / steps as f64;
    let mut cn = HeatCn::new(a.grid, dt, 1.0)?;
    for _ in 0..steps {
        cn.step(&mut out.values);
    }
    Ok(out)
}

/// Bounded solution of `-f'' - (z/2) f' = 0` with `f(+inf) = e^{-sigma_plus}`
/// and `f(-inf) = e^{-sigma_minus}`.
pub fn alpha_c_infty(sigma_plus: f64, sigma_minus: f64, zeta: f64) -> f64 {
    let (hi, lo) = ((-sigma_plus).exp(), (-sigma_minus).exp());
    lo + (hi - lo) * 0.5 * (1.0 + erf(zeta / 2.0))
}

/// Position of the merged front from the positions `p_plus`, `p_minus` of
/// the two limiting fronts: `ln((e^{p+} + e^{p-}) / 2)`, i.e. the front
/// whose amplitude `e^{p}` is the mean of the two amplitudes.
pub fn merged_position(p_plus: f64, p_minus: f64) -> f64 {
    let top = p_plus.max(p_minus);
    top + (0.5 * ((p_plus - top).exp() + (p_minus - top).exp())).ln()
}

/// `heat_profile.csv` rows `t,y,a` for one time.
pub fn write_profile_csv<W: Write>(mut out: W, t: f64, a: &Field1D, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "t,y,a")?;
    }
    for (i, v) in a.values.iter().enumerate() {
        writeln!(out, "{t},{},{v}", a.grid.x(i))?;
    }
    Ok(())
}
