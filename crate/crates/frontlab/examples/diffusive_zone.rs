//! Self-similar operators of the diffusive zone: the null mode and null
//! direction on a fine grid, then the decay of a datum localized in y
//! under the linear Dirichlet problem.
//!
//! cargo run --release --example diffusive_zone

use frontlab::diffusive::{
    apply_selfsimilar_operator, apply_symmetrized_operator, localized_decay, null_mode, SelfSimilarField,
};
use frontlab::{Grid1D, Grid2D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = 1e-3;
    let g = Grid1D::with_spacing(0.0, 12.0, h)?;
    let xs = g.points();
    let mode: Vec<f64> = xs.iter().map(|x| null_mode(*x)).collect();
    let direction: Vec<f64> = xs.iter().map(|x| x * (-x * x / 4.0).exp()).collect();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!(
        "symmetrized operator on the null mode: {:.2e}",
        sup(&apply_symmetrized_operator(&mode, h))
    );
    println!(
        "self-similar operator on xi e^(-xi^2/4): {:.2e}",
        sup(&apply_selfsimilar_operator(&direction, h))
    );

    let grid = Grid2D::new(
        Grid1D::with_spacing(0.0, 12.0, 0.05)?,
        Grid1D::with_spacing(0.0, 200.0, 0.5)?,
    );
    let v0 = SelfSimilarField::from_fn(
        0.0,
        grid,
        |xi, y| if y < 2.0 { xi * (-xi * xi / 4.0).exp() } else { 0.0 },
    );
    let series = localized_decay(v0, 1.0, 6.0, 0.01)?;
    let first = series[0].1;
    let stride = (series.len() / 8).max(1);
    for (tau, v) in series.iter().step_by(stride) {
        println!(
            "tau = {tau:4.1}  sup |v/xi| = {v:.4e}  against e^(-tau/2): {:.3}",
            v / (first * (-tau / 2.0).exp())
        );
    }
    Ok(())
}
