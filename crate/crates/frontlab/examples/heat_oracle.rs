//! Crank-Nicolson heat flow of piecewise-constant transverse data against
//! the erfc closed form, and the reflected-images variant on a half line.
//!
//! cargo run --release --example heat_oracle

use frontlab::heat::{heat_evolve_cn, heat_exact_piecewise, heat_reflected_piecewise, PiecewiseConstant};
use frontlab::Grid1D;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PiecewiseConstant::new(
        vec![-7.0, -2.0, 0.5, 4.0, 9.0],
        vec![1.0, 2.5, 0.5, 3.0, 1.5, 2.0],
        false,
    )?;
    let t_end = 100.0;
    let grid = Grid1D::with_spacing(-110.0, 110.0, 0.05)?;
    let a = heat_evolve_cn(&data.cell_averages(grid), t_end - 1.0, 0.01)?;
    let worst = (0..grid.len())
        .map(|i| (a.values[i] - heat_exact_piecewise(&data, t_end, grid.x(i))).abs())
        .fold(0.0f64, f64::max);
    println!("line, t = {t_end}: max |CN - exact| = {worst:.2e}");
    for y in [-20.0, 0.0, 20.0] {
        println!("  a({t_end}, {y:5.1}) = {:.8}", heat_exact_piecewise(&data, t_end, y));
    }

    // even data on [0, 30] with zero flux at both ends
    let even = PiecewiseConstant::new(vec![3.0, 10.0], vec![2.0, 1.0, 0.5], true)?;
    let half = Grid1D::with_spacing(0.0, 30.0, 0.05)?;
    let b = heat_evolve_cn(&even.cell_averages(half), 20.0, 0.01)?;
    let worst = (0..half.len())
        .map(|i| (b.values[i] - heat_reflected_piecewise(&even, 30.0, 20.0, half.x(i))).abs())
        .fold(0.0f64, f64::max);
    println!("reflecting [0, 30], duration 20: max |CN - images| = {worst:.2e}");
    Ok(())
}
