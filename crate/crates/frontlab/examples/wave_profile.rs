//! The critical travelling wave: ODE residual, tail constant and a few
//! samples of the half-level normalized profile.
//!
//! cargo run --release --example wave_profile

use frontlab::wave::compute_wave;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let started = std::time::Instant::now();
    let wave = compute_wave(40.0, 0.005)?;
    println!(
        "profile on [{}, {}] in {:.1?}",
        wave.x_first(),
        wave.x_last(),
        started.elapsed()
    );
    println!("ODE residual rms {:.2e}", wave.ode_residual_rms());

    let tail = wave.fit_tail_k((8.0, 12.0))?;
    println!(
        "tail (x + k) e^-x: k = {:.4}, flatness {:.2e}, translate ln A = {:.4}",
        tail.k_hat, tail.max_deviation, tail.shift
    );
    for x in [-10.0, -2.0, 0.0, 2.0, 10.0, 20.0] {
        println!("U({x:5.1}) = {:.6e}", wave.evaluate(x));
    }
    println!("U = 0.9 at x = {:.4}", wave.inverse_level(0.9));
    Ok(())
}
