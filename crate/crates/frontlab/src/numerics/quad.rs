/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(vals: &[f64], h: f64) -> f64 {
    match vals.len() {
        0 | 1 => 0.0,
        n => h * (vals[1..n - 1].iter().sum::<f64>() + 0.5 * (vals[0] + vals[n - 1])),
    }
}

/// Composite Simpson rule on a uniform grid; an odd number of cells closes
/// with a trapezoid on the last cell.
pub fn simpson(vals: &[f64], h: f64) -> f64 {
    let n = vals.len();
    if n < 3 {
        return trapezoid(vals, h);
    }
    let cells = n - 1;
    let even = cells - cells % 2;
    let mut s = vals[0] + vals[even];
    for (i, v) in vals.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if even < cells {
        total += 0.5 * h * (vals[even] + vals[cells]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree() {
        let h = 0.1;
        let lin: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(&lin, h) - 2.0).abs() < 1e-14);
        let cub: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&cub, h) - 0.25).abs() < 1e-14);
    }
}
