//! Two-sided barriers `eta_-(tau) xi e^{-xi^2/4} - q_- xi e^{-xi^2/7} <= w
//! <= eta_+(tau) xi e^{-xi^2/4} + q_+ xi e^{-xi^2/7}` read off a sequence of
//! self-similar snapshots.

use serde::Serialize;

use super::{DiffusiveError, SelfSimilarField};

pub const DEFAULT_BARRIER_WINDOW: (f64, f64) = (0.2, 3.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierPair {
    pub taus: Vec<f64>,
    /// Smallest and largest ratio `w / (xi e^{-xi^2/4})` over the window.
    pub eta_minus: Vec<f64>,
    pub eta_plus: Vec<f64>,
    /// Smallest correction amplitudes that make the barriers hold with both
    /// `eta` frozen at the final median ratio.
    pub q_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub eta_limit: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub burn_in: f64,
    /// Least-squares slope of `ln(q_- + q_+)` against `tau` after the
    /// burn-in, when defined.
    pub q_decay_rate: Option<f64>,
    pub pass: bool,
}

/// Ratios on `window` of every snapshot; passes when
/// `eta0 <= eta_- <= eta_+ <= eta1` at every `tau >= burn_in`.
pub fn barrier_check(
    series: &[SelfSimilarField],
    window: (f64, f64),
    eta0: f64,
    eta1: f64,
    burn_in: f64,
) -> Result<BarrierPair, DiffusiveError> {
    let (lo, hi) = window;
    let mut ratios: Vec<Vec<(f64, f64)>> = Vec::with_capacity(series.len());
    for w in series {
        let gx = w.grid.gx;
        let nodes: Vec<usize> = (0..gx.len())
            .filter(|&i| gx.x(i) >= lo && gx.x(i) <= hi && gx.x(i) > 0.0)
            .collect();
        if nodes.is_empty() {
            return Err(DiffusiveError::WindowEmpty { lo, hi });
        }
        let mut snap = Vec::with_capacity(nodes.len() * w.grid.gy.len());
        for j in 0..w.grid.gy.len() {
            for &i in &nodes {
                let xi = gx.x(i);
                snap.push((xi, w.at(i, j) / (xi * (-xi * xi / 4.0).exp())));
            }
        }
        ratios.push(snap);
    }
    if ratios.is_empty() {
        return Err(DiffusiveError::WindowEmpty { lo, hi });
    }

    let eta_limit = {
        let mut last: Vec<f64> = ratios.last().unwrap().iter().map(|p| p.1).collect();
        last.sort_by(f64::total_cmp);
        last[last.len() / 2]
    };
    let mut out = BarrierPair {
        taus: series.iter().map(|w| w.tau).collect(),
        eta_minus: vec![],
        eta_plus: vec![],
        q_minus: vec![],
        q_plus: vec![],
        eta_limit,
        eta0,
        eta1,
        burn_in,
        q_decay_rate: None,
        pass: true,
    };
    for (snap, tau) in ratios.iter().zip(&out.taus.clone()) {
        let eta_m = snap.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let eta_p = snap.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        // (rho - eta) xi e^{-xi^2/4} <= q xi e^{-xi^2/7}  <=>  q >= (rho - eta) e^{-3 xi^2/28}
        let (mut q_m, mut q_p) = (0.0f64, 0.0f64);
        for (xi, rho) in snap {
            let weight = (-3.0 * xi * xi / 28.0).exp();
            let excess = (rho - eta_limit) * weight;
            q_p = q_p.max(excess);
            q_m = q_m.max(-excess);
        }
        if *tau >= burn_in && !(eta0 <= eta_m && eta_m <= eta_p && eta_p <= eta1) {
            out.pass = false;
        }
        out.eta_minus.push(eta_m);
        out.eta_plus.push(eta_p);
        out.q_minus.push(q_m);
        out.q_plus.push(q_p);
    }
    out.q_decay_rate = log_slope(&out.taus, &out.q_minus, &out.q_plus, burn_in);
    Ok(out)
}

fn log_slope(taus: &[f64], qm: &[f64], qp: &[f64], burn_in: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(qm.iter().zip(qp))
        .filter(|(t, (a, b))| **t >= burn_in && *a + *b > 0.0)
        .map(|(t, (a, b))| (*t, (a + b).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mq = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mq)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (var > 0.0).then(|| cov / var)
}
