//! Heaviside data in the moving frame up to t = 2000: Bramson fit, residual
//! drift of the position and distance to the best wave translate.
//!
//! cargo run --release --example bramson_1d

use frontlab::front::{fit_bramson, shape_error, FrontTrace};
use frontlab::kpp1d::{checkpoint_steps, heaviside_datum, initial_field, run_1d, Solver1DConfig};
use frontlab::wave::compute_wave;
use frontlab::{Frame, Grid1D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t_end: f64 = 2000.0;
    let grid = Grid1D::with_spacing(-40.0, 60.0 + 4.0 * t_end.sqrt(), 0.1)?;
    let cfg = Solver1DConfig::new(grid, 0.008, Frame::Moving);
    let wave = compute_wave(40.0, 0.005)?;
    let u0 = initial_field(grid, Frame::Moving, cfg.t0, heaviside_datum(0.0));
    let schedule = checkpoint_steps(cfg.t0, t_end, cfg.dt, 32, &[500.0, 1000.0, 2000.0]);

    let started = std::time::Instant::now();
    let run = run_1d(&u0, &cfg, t_end, &schedule, &mut [])?;
    println!(
        "{} steps in {:.1?}",
        ((t_end - cfg.t0) / cfg.dt) as usize,
        started.elapsed()
    );

    let trace = FrontTrace::from_run1d(&run, 0.5, &wave);
    let (times, sigma_inf) = trace.column(0);
    let fit = fit_bramson(
        &times,
        &trace.sigma.iter().map(|s| s[0].unwrap()).collect::<Vec<_>>(),
        (50.0, t_end),
        Frame::Moving,
    )?;
    println!(
        "ln t coefficient {:.4}, x_inf {:.4}, rms {:.2e} over {} points",
        fit.beta_hat, fit.x_inf, fit.rms, fit.points
    );

    for t in [100.0, 500.0, 1000.0, 2000.0] {
        let k = trace.nearest(t);
        println!("t = {:6.0}  sigma_inf = {:.5}", times[k], sigma_inf[k]);
    }
    let k = run.nearest(1000.0);
    let shape = shape_error(&run.checkpoints[k].values, &grid, &wave, 0.5, 1000.0)?;
    println!("shape error at t = 1000: {:.2e}", shape.unweighted);
    Ok(())
}
