/// Largest downward crossing of `level` by the piecewise-linear interpolant.
///
/// Scans from the right for the last pair with `vals[i] >= level > vals[i+1]`.
pub fn interp_level_crossing(xs: &[f64], vals: &[f64], level: f64) -> Option<f64> {
    let i = crossing_cell(vals, level)?;
    let (a, b) = (vals[i], vals[i + 1]);
    Some(xs[i] + (a - level) / (a - b) * (xs[i + 1] - xs[i]))
}

fn crossing_cell(vals: &[f64], level: f64) -> Option<usize> {
    (0..vals.len().saturating_sub(1))
        .rev()
        .find(|&i| vals[i] >= level && vals[i + 1] < level)
}

/// Same crossing as [`interp_level_crossing`], refined with the quintic
/// through the six surrounding samples of a uniform grid starting at `x0`
/// with spacing `h`. Falls back to the linear estimate at the grid edges or
/// when the interpolant does not bracket the level inside the cell.
pub fn refine_level_crossing(x0: f64, h: f64, vals: &[f64], level: f64) -> Option<f64> {
    let i = crossing_cell(vals, level)?;
    let (a, b) = (vals[i], vals[i + 1]);
    let linear = x0 + (i as f64 + (a - level) / (a - b)) * h;
    if i < 2 || i + 3 >= vals.len() {
        return Some(linear);
    }
    let p = &vals[i - 2..i + 4];
    let g = |s: f64| lagrange6(p, s) - level;
    // bisection on s in [0, 1] where g(0) >= 0 > g(1)
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if g(lo) < 0.0 || g(hi) >= 0.0 {
        return Some(linear);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(x0 + (i as f64 + 0.5 * (lo + hi)) * h)
}

// polynomial through p at nodes -2..=3, evaluated at s
fn lagrange6(p: &[f64], s: f64) -> f64 {
    let mut total = 0.0;
    for (k, pk) in p.iter().enumerate() {
        let xk = k as f64 - 2.0;
        let mut w = 1.0;
        for m in 0..6 {
            if m != k {
                let xm = m as f64 - 2.0;
                w *= (s - xm) / (xk - xm);
            }
        }
        total += pk * w;
    }
    total
}

// cubic through p at nodes -1, 0, 1, 2, evaluated at s
fn lagrange4(p: &[f64; 4], s: f64) -> f64 {
    let (sm, s1, s2) = (s + 1.0, s - 1.0, s - 2.0);
    -p[0] * s * s1 * s2 / 6.0 + p[1] * sm * s1 * s2 / 2.0 - p[2] * sm * s * s2 / 2.0 + p[3] * sm * s * s1 / 6.0
}

/// Four-point Lagrange interpolation on a uniform grid (`x0`, `h`).
/// Returns `None` outside `[x0, x0 + (len-1) h]`.
pub fn cubic_sample(x0: f64, h: f64, vals: &[f64], x: f64) -> Option<f64> {
    let n = vals.len();
    let s = (x - x0) / h;
    let last = (n - 1) as f64;
    if !(s >= 0.0 && s <= last) || n < 4 {
        return if n >= 2 && s >= 0.0 && s <= last {
            let i = (s.floor() as usize).min(n - 2);
            let f = s - i as f64;
            Some(vals[i] * (1.0 - f) + vals[i + 1] * f)
        } else {
            None
        };
    }
    let node = s.round();
    if (s - node).abs() < 1e-12 {
        return Some(vals[node as usize]);
    }
    let i = (s.floor() as usize).clamp(1, n - 3);
    let p = [vals[i - 1], vals[i], vals[i + 1], vals[i + 2]];
    Some(lagrange4(&p, s - i as f64))
}
