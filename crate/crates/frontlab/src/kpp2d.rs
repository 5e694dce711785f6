//! Two-dimensional Fisher-KPP in the moving frame,
//! `u_t = u_xx + u_yy + (2 - 3/(2t)) u_x + u(1-u)`.
//!
//! Each step: half logistic step, then an alternating-direction linear step
//! (the compact x-scheme of [`crate::kpp1d`] row by row, then a
//! Crank-Nicolson y-sweep column by column), then the second half logistic
//! step. Rows and columns are independent tridiagonal systems and are
//! distributed over a rayon pool; the arithmetic per row or column does not
//! depend on the partition, so results are identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::front::{row_crossing, FrontTrace};
use crate::kpp1d::{advection_speed, logistic_flow, LinearXStep, SolverError};
use crate::numerics::{CyclicFactor, Field2D, Frame, Grid2D, ThomasFactor};
use crate::wave::WaveProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YBoundary {
    /// zero flux, ghost point reflected across the end rows
    Neumann,
    /// the last row duplicates the first
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solver2DConfig {
    pub grid: Grid2D,
    pub dt: f64,
    pub t0: f64,
    pub y_bc: YBoundary,
    pub bc_left: f64,
    pub bc_right: f64,
    pub threads: usize,
}

impl Solver2DConfig {
    pub fn new(grid: Grid2D, dt: f64, y_bc: YBoundary) -> Self {
        Self {
            grid,
            dt,
            t0: 1.0,
            y_bc,
            bc_left: 1.0,
            bc_right: 0.0,
            threads: 1,
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
        if self.threads == 0 {
            return Err(SolverError::InvalidConfig("threads must be at least 1".into()));
        }
        if self.y_bc == YBoundary::Periodic && self.grid.gy.n < 3 {
            return Err(SolverError::InvalidConfig(
                "periodic y-grid needs at least 3 cells".into(),
            ));
        }
        let h = self.grid.gx.h();
        if self.dt > h {
            return Err(SolverError::CflViolation { dt: self.dt, h });
        }
        Ok(())
    }

    /// The matching 1D configuration along x.
    pub fn x_config(&self) -> crate::kpp1d::Solver1DConfig {
        crate::kpp1d::Solver1DConfig {
            grid: self.grid.gx,
            dt: self.dt,
            t0: self.t0,
            frame: Frame::Moving,
            bc_left: self.bc_left,
            bc_right: self.bc_right,
        }
    }
}

enum YSolve {
    Neumann(ThomasFactor),
    Periodic(CyclicFactor),
}

/// Reusable stepping state: the y-factorization, the worker pool and the
/// column buffer.
pub struct Stepper2D {
    cfg: Solver2DConfig,
    pool: rayon::ThreadPool,
    y_solve: YSolve,
    // dt / (2 h_y^2)
    ry: f64,
    columns: Vec<f64>,
}

impl Stepper2D {
    pub fn new(cfg: Solver2DConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| SolverError::InvalidConfig(format!("thread pool: {e}")))?;
        let hy = cfg.grid.gy.h();
        let ry = 0.5 * cfg.dt / (hy * hy);
        let y_solve = match cfg.y_bc {
            YBoundary::Neumann => {
                let m = cfg.grid.gy.len();
                let mut lower = vec![-ry; m - 1];
                let mut upper = vec![-ry; m - 1];
                upper[0] = -2.0 * ry;
                lower[m - 2] = -2.0 * ry;
                YSolve::Neumann(ThomasFactor::new(&lower, &vec![1.0 + 2.0 * ry; m], &upper)?)
            }
            YBoundary::Periodic => {
                let m = cfg.grid.gy.n;
                YSolve::Periodic(CyclicFactor::new(
                    &vec![-ry; m - 1],
                    &vec![1.0 + 2.0 * ry; m],
                    &vec![-ry; m - 1],
                    -ry,
                    -ry,
                )?)
            }
        };
        Ok(Self {
            columns: vec![0.0; cfg.grid.len()],
            cfg,
            pool,
            y_solve,
            ry,
        })
    }

    pub fn config(&self) -> &Solver2DConfig {
        &self.cfg
    }

    /// One step from `t` to `t + dt` on y-major values.
    pub fn advance(&mut self, u: &mut [f64], t: f64) -> Result<(), SolverError> {
        let cfg = self.cfg;
        let (nx, ny) = (cfg.grid.gx.len(), cfg.grid.gy.len());
        let growth = (0.5 * cfg.dt).exp();
        let c = advection_speed(Frame::Moving, t + 0.5 * cfg.dt);
        let x_step = LinearXStep::new(c, cfg.grid.gx.h(), cfg.dt, nx)?;
        let ry = self.ry;
        let y_solve = &self.y_solve;
        let blocks = &mut self.columns;

        self.pool.install(|| {
            u.par_chunks_mut(nx * ROW_LANES)
                .for_each_init(Vec::new, |scratch, rows| {
                    rows.iter_mut().for_each(|v| *v = logistic_flow(*v, growth));
                    x_step.apply_rows(rows, nx, scratch);
                });
            // y-sweep on column blocks: block q holds columns
            // [q W, q W + w) as ny rows of w contiguous values
            {
                let src: &[f64] = u;
                blocks
                    .par_chunks_mut(COLUMN_WIDTH * ny)
                    .enumerate()
                    .for_each(|(q, block)| {
                        let w = block.len() / ny;
                        let first = q * COLUMN_WIDTH;
                        let column_rows = |j: usize| &src[j * nx + first..j * nx + first + w];
                        y_sweep(column_rows, block, ry, y_solve);
                        block.iter_mut().for_each(|v| *v = logistic_flow(*v, growth));
                    });
            }
            let blocks: &[f64] = blocks;
            u.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
                for (q, dst) in row.chunks_mut(COLUMN_WIDTH).enumerate() {
                    let w = dst.len();
                    let at = q * COLUMN_WIDTH * ny + j * w;
                    dst.copy_from_slice(&blocks[at..at + w]);
                }
                row[0] = cfg.bc_left;
                row[nx - 1] = cfg.bc_right;
            });
        });
        Ok(())
    }
}

// rows per interleaved x-solve, columns per interleaved y-solve
const ROW_LANES: usize = 16;
const COLUMN_WIDTH: usize = 64;

// Crank-Nicolson step of u_yy on a block of columns. `row(j)` is the
// current block row j; the result is written to `out`, row by row.
fn y_sweep<'a>(row: impl Fn(usize) -> &'a [f64], out: &mut [f64], ry: f64, y_solve: &YSolve) {
    let lanes = row(0).len();
    let ny = out.len() / lanes;
    let mut rows = out.chunks_exact_mut(lanes);
    match y_solve {
        YSolve::Neumann(f) => {
            for (j, dst) in rows.by_ref().enumerate() {
                let c = row(j);
                if j == 0 || j == ny - 1 {
                    let n = row(if j == 0 { 1 } else { ny - 2 });
                    for b in 0..lanes {
                        dst[b] = c[b] + 2.0 * ry * (n[b] - c[b]);
                    }
                } else {
                    let (p, n) = (row(j - 1), row(j + 1));
                    for b in 0..lanes {
                        dst[b] = c[b] + ry * (p[b] - 2.0 * c[b] + n[b]);
                    }
                }
            }
            f.solve_lanes(out, lanes);
        }
        YSolve::Periodic(f) => {
            let m = ny - 1;
            for (j, dst) in rows.by_ref().take(m).enumerate() {
                let (p, c, n) = (row((j + m - 1) % m), row(j), row((j + 1) % m));
                for b in 0..lanes {
                    dst[b] = c[b] + ry * (p[b] - 2.0 * c[b] + n[b]);
                }
            }
            f.solve_lanes(&mut out[..m * lanes], lanes);
            out.copy_within(..lanes, m * lanes);
        }
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

/// One step of the 2D scheme, returning the new field.
pub fn step_2d(state: &Field2D, t: f64, cfg: &Solver2DConfig) -> Result<Field2D, SolverError> {
    if state.frame != Frame::Moving {
        return Err(SolverError::FrameMismatch {
            expected: Frame::Moving,
            got: state.frame,
        });
    }
    check_state(&state.values)?;
    let mut stepper = Stepper2D::new(*cfg)?;
    let mut out = state.clone();
    stepper.advance(&mut out.values, t)?;
    Ok(out)
}

/// Called at every checkpoint of a 2D run.
pub trait Observer2D {
    fn observe(&mut self, t: f64, state: &Field2D);
}

/// Pointwise minimum and maximum over y of the field at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub t: f64,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Envelope {
    fn of(t: f64, f: &Field2D) -> Self {
        let nx = f.nx();
        let mut min = vec![f64::INFINITY; nx];
        let mut max = vec![f64::NEG_INFINITY; nx];
        for row in f.rows() {
            for i in 0..nx {
                min[i] = min[i].min(row[i]);
                max[i] = max[i].max(row[i]);
            }
        }
        Self { t, min, max }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// level tracked at every checkpoint
    pub level: f64,
    /// full fields are kept at the checkpoints nearest these times
    pub keep_fields_at: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Run2D {
    pub config: Solver2DConfig,
    pub envelopes: Vec<Envelope>,
    pub front: FrontTrace,
    pub fields: Vec<(f64, Field2D)>,
}

impl Run2D {
    pub fn field_near(&self, t: f64) -> Option<&Field2D> {
        self.fields
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, f)| f)
    }
}

/// Integrates from `u0` (moving frame, at `cfg.t0`) to `t_end`. At every
/// checkpoint it records the y-envelope and the front, keeps the requested
/// fields, and calls the observers.
pub fn run_2d(
    u0: &Field2D,
    cfg: &Solver2DConfig,
    t_end: f64,
    schedule: &[usize],
    profile: &WaveProfile,
    opts: &RunOptions,
    observers: &mut [&mut dyn Observer2D],
) -> Result<Run2D, SolverError> {
    if !(t_end > cfg.t0) {
        return Err(SolverError::InvalidConfig(format!(
            "t_end = {t_end} must exceed t0 = {}",
            cfg.t0
        )));
    }
    if u0.frame != Frame::Moving {
        return Err(SolverError::FrameMismatch {
            expected: Frame::Moving,
            got: u0.frame,
        });
    }
    if u0.grid != cfg.grid {
        return Err(SolverError::InvalidConfig(
            "initial field grid differs from solver grid".into(),
        ));
    }
    check_state(&u0.values)?;
    let mut stepper = Stepper2D::new(*cfg)?;
    let last = ((t_end - cfg.t0) / cfg.dt).round() as usize;
    let keep: Vec<usize> = opts
        .keep_fields_at
        .iter()
        .map(|t| ((t - cfg.t0) / cfg.dt).round() as usize)
        .collect();
    let mut state = u0.clone();
    let nx = state.nx();
    for row in state.values.chunks_exact_mut(nx) {
        row[0] = cfg.bc_left;
        row[nx - 1] = cfg.bc_right;
    }
    let mut run = Run2D {
        config: *cfg,
        envelopes: Vec::new(),
        front: FrontTrace::new(opts.level, profile, Frame::Moving, cfg.grid.gy.points()),
        fields: Vec::new(),
    };
    let mut next = schedule.iter().copied().filter(|s| *s <= last).peekable();
    for step in 0..=last {
        let t = cfg.t0 + step as f64 * cfg.dt;
        if keep.contains(&step) {
            run.fields.push((t, state.clone()));
        }
        if next.peek() == Some(&step) {
            next.next();
            run.envelopes.push(Envelope::of(t, &state));
            let gx = cfg.grid.gx;
            let sigma = state.rows().map(|r| row_crossing(r, &gx, opts.level)).collect();
            run.front.push(t, sigma);
            for obs in observers.iter_mut() {
                obs.observe(t, &state);
            }
        }
        if step < last {
            stepper.advance(&mut state.values, t)?;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpp1d::{initial_field, Stepper1D};
    use crate::numerics::Grid1D;

    fn grid(ny: usize, y_len: f64) -> Grid2D {
        Grid2D::new(
            Grid1D::with_spacing(-20.0, 30.0, 0.1).unwrap(),
            Grid1D::new(0.0, y_len, ny).unwrap(),
        )
    }

    #[test]
    fn y_independent_data_reduce_to_1d() {
        let g = grid(8, 8.0);
        let cfg = Solver2DConfig::new(g, 0.008, YBoundary::Neumann);
        let u1 = initial_field(g.gx, Frame::Moving, 1.0, |x| 0.5 * (1.0 - (0.7 * x).tanh()));
        let mut u2 = Field2D::extrude(&u1, g.gy);
        let mut s2 = Stepper2D::new(cfg).unwrap();
        let mut s1 = Stepper1D::new(cfg.x_config()).unwrap();
        let mut v1 = u1.values.clone();
        for k in 0..100 {
            let t = 1.0 + k as f64 * cfg.dt;
            s2.advance(&mut u2.values, t).unwrap();
            s1.advance(&mut v1, t).unwrap();
        }
        let mut row_dev: f64 = 0.0;
        let mut vs_1d: f64 = 0.0;
        for row in u2.rows() {
            for i in 0..row.len() {
                row_dev = row_dev.max((row[i] - u2.row(0)[i]).abs());
                vs_1d = vs_1d.max((row[i] - v1[i]).abs());
            }
        }
        assert!(row_dev <= 1e-12 && vs_1d <= 1e-10, "{row_dev} {vs_1d}");
    }

    #[test]
    fn ones_are_steady() {
        let g = grid(6, 6.0);
        let mut cfg = Solver2DConfig::new(g, 0.008, YBoundary::Neumann);
        cfg.bc_right = 1.0;
        let f = Field2D::from_fn(g, Frame::Moving, |_, _| 1.0);
        let out = step_2d(&f, 2.0, &cfg).unwrap();
        assert!(out.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn periodic_data_stay_periodic_and_threads_agree() {
        // domain holds two periods of length 10
        let g = grid(40, 20.0);
        let mut cfg = Solver2DConfig::new(g, 0.008, YBoundary::Periodic);
        let u0 = Field2D::from_fn(g, Frame::Moving, |x, y| {
            let s = x + 0.8 * (2.0 * std::f64::consts::PI * y / 10.0).sin();
            if s <= 0.0 {
                1.0
            } else {
                0.0
            }
        });
        let mut run = |threads: usize| {
            cfg.threads = threads;
            let mut st = Stepper2D::new(cfg).unwrap();
            let mut u = u0.clone();
            for k in 0..60 {
                st.advance(&mut u.values, 1.0 + k as f64 * cfg.dt).unwrap();
            }
            u
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.values, b.values);
        let nx = a.nx();
        for j in 0..20 {
            for i in 0..nx {
                assert!((a.at(i, j) - a.at(i, j + 20)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_large_steps() {
        let g = grid(4, 4.0);
        let cfg = Solver2DConfig::new(g, 0.5, YBoundary::Neumann);
        assert!(matches!(Stepper2D::new(cfg), Err(SolverError::CflViolation { .. })));
    }
}
