//! A y-structured front in the moving frame: a bump of the initial
//! interface on |y| < 15 relaxes while the run is checked against the two
//! bounding 1D runs.
//!
//! cargo run --release --example moving_frame_2d

use frontlab::front::comparison_check;
use frontlab::kpp1d::{checkpoint_steps, heaviside_datum, initial_field, run_1d};
use frontlab::kpp2d::{run_2d, RunOptions, Solver2DConfig, YBoundary};
use frontlab::wave::compute_wave;
use frontlab::{Field2D, Frame, Grid1D, Grid2D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t_end: f64 = 200.0;
    let gx = Grid1D::with_spacing(-40.0, 60.0 + 4.0 * t_end.sqrt(), 0.1)?;
    let gy = Grid1D::with_spacing(0.0, 60.0, 1.0)?;
    let mut cfg = Solver2DConfig::new(Grid2D::new(gx, gy), 0.008, YBoundary::Neumann);
    cfg.threads = std::env::var("FRONTLAB_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let wave = compute_wave(40.0, 0.005)?;

    let origin = frontlab::kpp1d::frame_origin(cfg.t0);
    let u0 = Field2D::from_fn(cfg.grid, Frame::Moving, |x, y| {
        let step = if y.abs() < 15.0 { 3.0 } else { 0.0 };
        heaviside_datum(step)(x + origin)
    });
    let schedule = checkpoint_steps(cfg.t0, t_end, cfg.dt, 32, &[]);
    let opts = RunOptions {
        level: 0.5,
        keep_fields_at: vec![],
    };

    let started = std::time::Instant::now();
    let run = run_2d(&u0, &cfg, t_end, &schedule, &wave, &opts, &mut [])?;
    let elapsed = started.elapsed();
    let points = cfg.grid.len() as f64 * ((t_end - cfg.t0) / cfg.dt);
    println!(
        "2D run: {elapsed:.1?}, {:.2} ns per point and step",
        elapsed.as_nanos() as f64 / points
    );

    let bound = |at: f64| {
        let u = initial_field(gx, Frame::Moving, cfg.t0, heaviside_datum(at));
        run_1d(&u, &cfg.x_config(), t_end, &schedule, &mut [])
    };
    let sandwich = comparison_check(&run, &bound(3.0)?, &bound(0.0)?)?;
    println!(
        "sandwich: max violation {:.2e} (pass = {})",
        sandwich.max_violation, sandwich.pass
    );

    let last = run.front.times.len() - 1;
    for j in [0, 10, 15, 20, 40, 60] {
        println!(
            "y = {:4.0}  sigma_inf = {:.4}",
            gy.x(j),
            run.front.sigma_inf[last][j].unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
