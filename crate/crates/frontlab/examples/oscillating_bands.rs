//! Band sequences whose transverse heat flow at y = 0 keeps oscillating:
//! the ratio table of each sequence and the predicted amplitude at its
//! probe times.
//!
//! cargo run --release --example oscillating_bands

use frontlab::scenarios::{check_sequence, OscillationSequence};

fn show(name: &str, seq: &OscillationSequence) -> Result<(), Box<dyn std::error::Error>> {
    let report = check_sequence(seq);
    println!(
        "{name}: monotone {}, fixed-ratio only {}",
        report.monotone(),
        report.finite_surrogate
    );
    println!("   n        t_n    x_{{n+1}}/x_n   x_n^2/t_n   x_{{n+1}}^2/t_n");
    for r in &report.rows {
        println!(
            "{:4} {:10.1} {:12.3} {:11.4} {:15.3}",
            r.n, r.t, r.spread, r.inner, r.outer
        );
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
    for (t, a) in seq.predictions()? {
        println!("  a({t:.1}, 0) = {a:.4}   ln a = {:+.4}", a.ln());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("desk", &OscillationSequence::desk())?;
    show("factorial", &OscillationSequence::factorial(17, 4.0))?;
    Ok(())
}
