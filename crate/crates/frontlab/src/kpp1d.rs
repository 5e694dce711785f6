//! One-dimensional Fisher-KPP, `u_t = u_xx + c(t) u_x + u(1-u)`, in the lab
//! frame (`c = 0`) or in the frame moving with `2t - (3/2) ln t`
//! (`c = 2 - 3/(2t)`).
//!
//! One step is Strang splitting: half a step of the exact logistic flow, a
//! Crank-Nicolson step of the linear part, another logistic half step. The
//! linear part uses the fourth-order compact (Numerov-type) discretization
//! of `u_xx + c u_x`; plain central differences would leave a speed error of
//! `h^2/4` on the `e^{-x}` leading edge, which adds up to O(1) over the
//! long horizons a logarithmic shift needs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Field1D, Frame, Grid1D, NumericsError, ThomasFactor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("time step {dt} exceeds the advective bound dt <= h = {h}")]
    CflViolation { dt: f64, h: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("field is in the {got:?} frame but the solver expects {expected:?}")]
    FrameMismatch { expected: Frame, got: Frame },
    #[error("state value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Origin of the moving frame in lab coordinates.
pub fn frame_origin(t: f64) -> f64 {
    2.0 * t - 1.5 * t.ln()
}

/// Advection coefficient of the linear part at time `t`.
pub fn advection_speed(frame: Frame, t: f64) -> f64 {
    match frame {
        Frame::Moving => 2.0 - 1.5 / t,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solver1DConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub t0: f64,
    pub frame: Frame,
    pub bc_left: f64,
    pub bc_right: f64,
}

impl Solver1DConfig {
    pub fn new(grid: Grid1D, dt: f64, frame: Frame) -> Self {
        Self {
            grid,
            dt,
            t0: 1.0,
            frame,
            bc_left: 1.0,
            bc_right: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0) {
            return Err(SolverError::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t0 >= 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "t0 = {} must be at least 1",
                self.t0
            )));
        }
        for (name, v) in [("bc_left", self.bc_left), ("bc_right", self.bc_right)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SolverError::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.frame == Frame::SelfSimilar {
            return Err(SolverError::InvalidConfig(
                "solver runs in the lab or moving frame".into(),
            ));
        }
        let h = self.grid.h();
        if self.frame == Frame::Moving && self.dt > h {
            return Err(SolverError::CflViolation { dt: self.dt, h });
        }
        Ok(())
    }
}

/// Exact flow of `u' = u(1-u)` over time `s`, given `growth = e^s`.
/// Values outside `[0, 1]` are clipped first (the nonlinearity vanishes there).
#[inline]
pub fn logistic_flow(u: f64, growth: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * growth / (1.0 + u * (growth - 1.0))
}

/// Stencils `(left, centre, right)` of the Crank-Nicolson system
/// `lhs u^{n+1} = rhs u^n` for `u_t = u_xx + c u_x` with the compact scheme
/// `(1 + h^2/12 (D2 + c D0)) u_t = (1 + c^2 h^2/12) D2 u + c D0 u`.
pub fn compact_stencils(c: f64, h: f64, dt: f64) -> ([f64; 3], [f64; 3]) {
    let mass = [1.0 / 12.0 - c * h / 24.0, 10.0 / 12.0, 1.0 / 12.0 + c * h / 24.0];
    let g = (1.0 + c * c * h * h / 12.0) / (h * h);
    let op = [g - c / (2.0 * h), -2.0 * g, g + c / (2.0 * h)];
    let lhs = [
        mass[0] - 0.5 * dt * op[0],
        mass[1] - 0.5 * dt * op[1],
        mass[2] - 0.5 * dt * op[2],
    ];
    let rhs = [
        mass[0] + 0.5 * dt * op[0],
        mass[1] + 0.5 * dt * op[1],
        mass[2] + 0.5 * dt * op[2],
    ];
    (lhs, rhs)
}

/// Whether the linear step is a monotone map at advection `c`: nonnegative
/// right-hand stencil and an M-matrix on the left. Monotone steps carry the
/// comparison principle over to the discrete solutions exactly.
pub fn is_monotone(c: f64, h: f64, dt: f64) -> bool {
    let (lhs, rhs) = compact_stencils(c, h, dt);
    rhs.iter().all(|v| *v >= 0.0) && lhs[0] <= 0.0 && lhs[2] <= 0.0 && lhs[1] > 0.0
}

/// The linear x-step for one advection value, factored once and applied to
/// any number of rows with the same Dirichlet boundary values.
#[derive(Debug, Clone)]
pub struct LinearXStep {
    lhs: [f64; 3],
    rhs: [f64; 3],
    factor: ThomasFactor,
}

impl LinearXStep {
    pub fn new(c: f64, h: f64, dt: f64, points: usize) -> Result<Self, NumericsError> {
        let (lhs, rhs) = compact_stencils(c, h, dt);
        let m = points - 2;
        let factor = ThomasFactor::new(&vec![lhs[0]; m - 1], &vec![lhs[1]; m], &vec![lhs[2]; m - 1])?;
        Ok(Self { lhs, rhs, factor })
    }

    /// Advances `row` in place; `row[0]` and `row[last]` are the boundary
    /// values and stay fixed.
    pub fn apply(&self, row: &mut [f64], scratch: &mut Vec<f64>) {
        let n = row.len();
        let [l, d, r] = self.rhs;
        scratch.clear();
        scratch.extend((1..n - 1).map(|i| l * row[i - 1] + d * row[i] + r * row[i + 1]));
        scratch[0] -= self.lhs[0] * row[0];
        scratch[n - 3] -= self.lhs[2] * row[n - 1];
        self.factor.solve_in_place(scratch);
        row[1..n - 1].copy_from_slice(scratch);
    }

    /// Advances consecutive rows of length `width` stored back to back.
    /// The rows are solved together in interleaved form; each row gets the
    /// same arithmetic as [`LinearXStep::apply`].
    pub fn apply_rows(&self, rows: &mut [f64], width: usize, scratch: &mut Vec<f64>) {
        let lanes = rows.len() / width;
        let m = width - 2;
        let [l, d, r] = self.rhs;
        scratch.resize(width * lanes + m * lanes, 0.0);
        let (packed, rhs) = scratch.split_at_mut(width * lanes);
        for (i, dst) in packed.chunks_exact_mut(lanes).enumerate() {
            for (b, v) in dst.iter_mut().enumerate() {
                *v = rows[b * width + i];
            }
        }
        for (i, out) in rhs.chunks_exact_mut(lanes).enumerate() {
            let near = &packed[i * lanes..(i + 3) * lanes];
            let (left, rest) = near.split_at(lanes);
            let (centre, right) = rest.split_at(lanes);
            for b in 0..lanes {
                out[b] = l * left[b] + d * centre[b] + r * right[b];
            }
        }
        for b in 0..lanes {
            rhs[b] -= self.lhs[0] * packed[b];
            rhs[(m - 1) * lanes + b] -= self.lhs[2] * packed[(width - 1) * lanes + b];
        }
        self.factor.solve_lanes(rhs, lanes);
        for (i, src) in rhs.chunks_exact(lanes).enumerate() {
            for (b, v) in src.iter().enumerate() {
                rows[b * width + i + 1] = *v;
            }
        }
    }
}

/// Reusable stepping state for a 1D run.
#[derive(Debug, Clone)]
pub struct Stepper1D {
    cfg: Solver1DConfig,
    scratch: Vec<f64>,
}

impl Stepper1D {
    pub fn new(cfg: Solver1DConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            scratch: Vec::with_capacity(cfg.grid.len()),
        })
    }

    pub fn config(&self) -> &Solver1DConfig {
        &self.cfg
    }

    /// One Strang step from `t` to `t + dt`.
    pub fn advance(&mut self, u: &mut [f64], t: f64) -> Result<(), SolverError> {
        let dt = self.cfg.dt;
        let growth = (0.5 * dt).exp();
        let c = advection_speed(self.cfg.frame, t + 0.5 * dt);
        let x_step = LinearXStep::new(c, self.cfg.grid.h(), dt, u.len())?;
        u.iter_mut().for_each(|v| *v = logistic_flow(*v, growth));
        x_step.apply(u, &mut self.scratch);
        u.iter_mut().for_each(|v| *v = logistic_flow(*v, growth));
        let n = u.len();
        u[0] = self.cfg.bc_left;
        u[n - 1] = self.cfg.bc_right;
        Ok(())
    }
}

fn check_state(values: &[f64]) -> Result<(), SolverError> {
    match values.iter().position(|v| !(*v >= -1e-9 && *v <= 1.0 + 1e-9)) {
        Some(index) => Err(SolverError::OutOfRange {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// One step of the 1D scheme, returning the new field.
pub fn step_1d(state: &Field1D, t: f64, cfg: &Solver1DConfig) -> Result<Field1D, SolverError> {
    if state.frame != cfg.frame {
        return Err(SolverError::FrameMismatch {
            expected: cfg.frame,
            got: state.frame,
        });
    }
    check_state(&state.values)?;
    let mut stepper = Stepper1D::new(*cfg)?;
    let mut out = state.clone();
    stepper.advance(&mut out.values, t)?;
    Ok(out)
}

/// Samples lab-frame initial data at the start of a run: in the moving
/// frame `u(t0, x) = u0(x + X(t0))`.
pub fn initial_field(grid: Grid1D, frame: Frame, t0: f64, u0: impl Fn(f64) -> f64) -> Field1D {
    let shift = if frame == Frame::Moving { frame_origin(t0) } else { 0.0 };
    Field1D::from_fn(grid, frame, |x| u0(x + shift))
}

/// Indicator `1 - H(x - at)` sampled as 1 for `x <= at`.
pub fn heaviside_datum(at: f64) -> impl Fn(f64) -> f64 + Clone {
    move |x| if x <= at { 1.0 } else { 0.0 }
}

/// Checkpoint step indices: log-spaced times (`per_decade` per decade from
/// `t0`), any extra times, and the final time, each rounded to the step grid.
pub fn checkpoint_steps(t0: f64, t_end: f64, dt: f64, per_decade: usize, extra: &[f64]) -> Vec<usize> {
    let last = ((t_end - t0) / dt).round() as usize;
    let mut steps = vec![0, last];
    if per_decade > 0 {
        let mut k = 0;
        loop {
            let t = t0 * 10f64.powf(k as f64 / per_decade as f64);
            if t > t_end {
                break;
            }
            steps.push(((t - t0) / dt).round() as usize);
            k += 1;
        }
    }
    for &t in extra {
        if t >= t0 && t <= t_end {
            steps.push(((t - t0) / dt).round() as usize);
        }
    }
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Called at every checkpoint of a run.
pub trait Observer1D {
    fn observe(&mut self, t: f64, state: &Field1D);
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint1D {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Run1D {
    pub config: Solver1DConfig,
    pub checkpoints: Vec<Checkpoint1D>,
}

impl Run1D {
    pub fn field(&self, k: usize) -> Field1D {
        Field1D {
            grid: self.config.grid,
            values: self.checkpoints[k].values.clone(),
            frame: self.config.frame,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.t).collect()
    }

    /// Checkpoint closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, c) in self.checkpoints.iter().enumerate() {
            if (c.t - t).abs() < (self.checkpoints[best].t - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Integrates from `u0` at `cfg.t0` to `t_end`, storing the state at every
/// checkpoint of `schedule` and invoking the observers there.
pub fn run_1d(
    u0: &Field1D,
    cfg: &Solver1DConfig,
    t_end: f64,
    schedule: &[usize],
    observers: &mut [&mut dyn Observer1D],
) -> Result<Run1D, SolverError> {
    if !(t_end > cfg.t0) {
        return Err(SolverError::InvalidConfig(format!(
            "t_end = {t_end} must exceed t0 = {}",
            cfg.t0
        )));
    }
    if u0.frame != cfg.frame {
        return Err(SolverError::FrameMismatch {
            expected: cfg.frame,
            got: u0.frame,
        });
    }
    check_state(&u0.values)?;
    let mut stepper = Stepper1D::new(*cfg)?;
    let last = ((t_end - cfg.t0) / cfg.dt).round() as usize;
    let mut u = u0.values.clone();
    let n = u.len();
    u[0] = cfg.bc_left;
    u[n - 1] = cfg.bc_right;
    let mut checkpoints = Vec::new();
    let mut next = schedule.iter().copied().filter(|s| *s <= last).peekable();
    for step in 0..=last {
        let t = cfg.t0 + step as f64 * cfg.dt;
        if next.peek() == Some(&step) {
            next.next();
            let field = Field1D {
                grid: cfg.grid,
                values: u.clone(),
                frame: cfg.frame,
            };
            for obs in observers.iter_mut() {
                obs.observe(t, &field);
            }
            checkpoints.push(Checkpoint1D {
                t,
                values: field.values,
            });
        }
        if step < last {
            stepper.advance(&mut u, t)?;
        }
    }
    Ok(Run1D {
        config: *cfg,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid1D {
        Grid1D::with_spacing(-20.0, 40.0, 0.1).unwrap()
    }

    #[test]
    fn constants_are_steady() {
        let cfg = Solver1DConfig::new(grid(), 0.008, Frame::Moving);
        let ones = Field1D::from_fn(grid(), Frame::Moving, |_| 1.0);
        let mut c = cfg;
        c.bc_right = 1.0;
        let out = step_1d(&ones, 3.0, &c).unwrap();
        assert!(out.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let zeros = Field1D::from_fn(grid(), Frame::Moving, |_| 0.0);
        let out = step_1d(&zeros, 3.0, &cfg).unwrap();
        // the left boundary feeds 1 in; away from it the state stays 0
        let far = grid().nearest(0.0);
        assert!(out.values[far..].iter().all(|v| *v == 0.0 || v.abs() < 1e-300));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = Solver1DConfig::new(grid(), 0.2, Frame::Moving);
        assert!(matches!(cfg.validate(), Err(SolverError::CflViolation { .. })));
        cfg.dt = 0.01;
        cfg.bc_left = 1.5;
        assert!(cfg.validate().is_err());
        let f = Field1D::from_fn(grid(), Frame::Lab, |_| 0.5);
        let cfg = Solver1DConfig::new(grid(), 0.01, Frame::Moving);
        assert!(matches!(step_1d(&f, 1.0, &cfg), Err(SolverError::FrameMismatch { .. })));
    }

    #[test]
    fn strang_step_is_second_order() {
        // smooth front, grid fixed: the one-step difference between dt and
        // two dt/2 steps scales like dt^3
        let g = Grid1D::with_spacing(-30.0, 30.0, 0.1).unwrap();
        let u0 = Field1D::from_fn(g, Frame::Moving, |x| 0.5 * (1.0 - (0.4 * x).tanh()));
        let diff = |dt: f64| {
            let one = step_1d(&u0, 2.0, &Solver1DConfig::new(g, dt, Frame::Moving)).unwrap();
            let half = Solver1DConfig::new(g, dt / 2.0, Frame::Moving);
            let a = step_1d(&u0, 2.0, &half).unwrap();
            let b = step_1d(&a, 2.0 + dt / 2.0, &half).unwrap();
            one.values
                .iter()
                .zip(&b.values)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max)
        };
        let (d1, d2, d3) = (diff(0.08), diff(0.04), diff(0.02));
        let (r1, r2) = (d1 / d2, d2 / d3);
        assert!((r1 - 8.0).abs() < 1.0 && (r2 - 8.0).abs() < 1.0, "{r1} {r2}");
    }

    #[test]
    fn compact_scheme_speed_is_fourth_order() {
        // semi-discrete growth rate of e^{-x} under u_xx + 2 u_x is -1
        for h in [0.1f64, 0.05] {
            let c = 2.0;
            let d2 = (2.0 * h.cosh() - 2.0) / (h * h);
            let d0 = -h.sinh() / h;
            let rate = ((1.0 + c * c * h * h / 12.0) * d2 + c * d0) / (1.0 + h * h / 12.0 * (d2 + c * d0));
            assert!((rate + 1.0).abs() < 2.0 * h.powi(4) * 0.1 + 1e-12, "{rate}");
        }
    }

    #[test]
    fn monotone_window() {
        assert!(is_monotone(2.0, 0.1, 0.008));
        assert!(is_monotone(0.5, 0.1, 0.008));
        assert!(!is_monotone(2.0, 0.1, 0.02));
        assert!(!is_monotone(2.0, 0.1, 0.001));
    }

    #[test]
    fn schedule_is_log_spaced_and_contains_extras() {
        let s = checkpoint_steps(1.0, 100.0, 0.01, 32, &[50.0]);
        assert_eq!(s[0], 0);
        assert_eq!(*s.last().unwrap(), 9900);
        assert!(s.contains(&4900));
        assert_eq!(s.len(), 66);
    }

    #[test]
    fn lab_frame_wave_keeps_speed_two() {
        let profile = crate::wave::compute_wave(40.0, 0.005).unwrap();
        let g = Grid1D::with_spacing(-30.0, 90.0, 0.1).unwrap();
        let cfg = Solver1DConfig::new(g, 0.008, Frame::Lab);
        let u0 = initial_field(g, Frame::Lab, 1.0, |x| profile.evaluate(x));
        let sched = checkpoint_steps(1.0, 21.0, cfg.dt, 0, &[11.0]);
        let run = run_1d(&u0, &cfg, 21.0, &sched, &mut []).unwrap();
        let xs = g.points();
        let pos: Vec<f64> = run
            .checkpoints
            .iter()
            .map(|c| crate::numerics::interp_level_crossing(&xs, &c.values, 0.5).unwrap())
            .collect();
        let speed = (pos[2] - pos[1]) / 10.0;
        assert!((speed - 2.0).abs() < 0.05, "speed {speed}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn ordered_data_stay_ordered_and_in_range(
            a in -5.0f64..5.0, gap in 0.0f64..4.0, bump in 0.0f64..1.0,
        ) {
            let g = Grid1D::with_spacing(-20.0, 30.0, 0.1).unwrap();
            let cfg = Solver1DConfig::new(g, 0.008, Frame::Moving);
            let lo = initial_field(g, Frame::Moving, 1.0, heaviside_datum(a));
            let hi = initial_field(g, Frame::Moving, 1.0, move |x| {
                if x <= a + gap { 1.0 } else { (bump * (-(x - a - gap)).exp()).min(1.0) }
            });
            let sched = checkpoint_steps(1.0, 6.0, cfg.dt, 8, &[]);
            let rl = run_1d(&lo, &cfg, 6.0, &sched, &mut []).unwrap();
            let rh = run_1d(&hi, &cfg, 6.0, &sched, &mut []).unwrap();
            for (cl, ch) in rl.checkpoints.iter().zip(&rh.checkpoints) {
                for (l, h) in cl.values.iter().zip(&ch.values) {
                    prop_assert!(*l <= h + 1e-8);
                    prop_assert!(*l >= -1e-12 && *h <= 1.0 + 1e-12);
                }
                // nonincreasing data stay nonincreasing
                prop_assert!(cl.values.windows(2).all(|w| w[1] <= w[0] + 1e-10));
            }
        }
    }
}
