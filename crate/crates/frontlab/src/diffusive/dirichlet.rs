//! The linear problem
//! `v_tau = L v + (e^tau / eps^2) v_yy + eps^{2 lam} e^{-lam tau} (phi v + psi v_xi + f)`
//! on `xi > 0` with `v = 0` at `xi = 0`, solved in the symmetrized unknown
//! `w = e^{xi^2/8} v`.
//!
//! The y-direction is diagonalized by cosine modes on a zero-flux vertex
//! grid. Because the coefficients do not depend on `y`, each mode `k`
//! satisfies the same xi-equation once the transverse decay
//! `e^{mu_k s(tau)}`, `s(tau) = (e^tau - 1) / eps^2`, is factored out: the
//! growing transverse diffusivity never enters a linear solve. The xi-part
//! is Crank-Nicolson on a three-point operator whose potential is chosen so
//! that the sampled null mode is an exact discrete null vector.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::numerics::{Dct1, Grid1D, Grid2D, ThomasFactor};

use super::operators::null_mode;
use super::{DiffusiveError, SelfSimilarField};

/// `amplitude * cos(frequency * tau + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeCoefficient {
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl TimeCoefficient {
    pub const ZERO: Self = Self {
        amplitude: 0.0,
        frequency: 0.0,
        phase: 0.0,
    };

    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: -std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn value(&self, tau: f64) -> f64 {
        self.amplitude * (self.frequency * tau + self.phase).cos()
    }
}

impl Default for TimeCoefficient {
    fn default() -> Self {
        Self::ZERO
    }
}

/// `in_time(tau) * (1 - (xi/support)^2)^2` for `xi < support`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forcing {
    pub in_time: TimeCoefficient,
    pub support: f64,
}

impl Forcing {
    pub const ZERO: Self = Self {
        in_time: TimeCoefficient::ZERO,
        support: 1.0,
    };

    pub fn value(&self, tau: f64, xi: f64) -> f64 {
        let q = xi / self.support;
        if q >= 1.0 {
            return 0.0;
        }
        let bump = 1.0 - q * q;
        self.in_time.value(tau) * bump * bump
    }
}

impl Default for Forcing {
    fn default() -> Self {
        Self::ZERO
    }
}

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub epsilon: f64,
    /// Exponent of the `eps^{2 lam} e^{-lam tau}` prefactor.
    pub weight_exponent: f64,
    pub potential: TimeCoefficient,
    pub drift: TimeCoefficient,
    pub forcing: Forcing,
    /// Uniform bound the three coefficients must respect.
    pub bound: f64,
    pub epsilon_max: f64,
    /// Initial `v` on a xi-grid starting at 0 and a zero-flux y-grid.
    pub initial: SelfSimilarField,
    pub d_tau: f64,
    pub record_every: f64,
}

impl DirichletProblem {
    pub fn new(epsilon: f64, weight_exponent: f64, initial: SelfSimilarField) -> Self {
        Self {
            epsilon,
            weight_exponent,
            potential: TimeCoefficient::ZERO,
            drift: TimeCoefficient::ZERO,
            forcing: Forcing::ZERO,
            bound: 1.0,
            epsilon_max: 0.2,
            initial,
            d_tau: 0.01,
            record_every: 0.25,
        }
    }

    fn invalid(msg: String) -> DiffusiveError {
        DiffusiveError::InvalidProblem(msg)
    }

    pub fn validate(&self) -> Result<(), DiffusiveError> {
        if !(self.epsilon > 0.0 && self.epsilon <= self.epsilon_max) {
            return Err(Self::invalid(format!(
                "epsilon = {} must lie in (0, {}]",
                self.epsilon, self.epsilon_max
            )));
        }
        if !(self.weight_exponent > 0.0) {
            return Err(Self::invalid(format!(
                "weight exponent {} must be positive",
                self.weight_exponent
            )));
        }
        for (name, c) in [
            ("potential", self.potential),
            ("drift", self.drift),
            ("forcing", self.forcing.in_time),
        ] {
            if !c.amplitude.is_finite() || c.amplitude.abs() > self.bound {
                return Err(Self::invalid(format!(
                    "{name} amplitude {} exceeds the bound {}",
                    c.amplitude, self.bound
                )));
            }
        }
        if !(self.forcing.support > 0.0) {
            return Err(Self::invalid("forcing support must be positive".into()));
        }
        if !(self.d_tau > 0.0 && self.record_every > 0.0) {
            return Err(Self::invalid("time steps must be positive".into()));
        }
        let gx = self.initial.grid.gx;
        if gx.x_min.abs() > 1e-12 {
            return Err(Self::invalid(format!(
                "xi-grid must start at 0, starts at {}",
                gx.x_min
            )));
        }
        if gx.x_max < 8.0 - 1e-9 {
            return Err(DiffusiveError::DomainTooShort { xi_max: gx.x_max });
        }
        if gx.x_max > 30.0 {
            return Err(Self::invalid(format!(
                "xi-grid end {} beyond 30 underflows the weight",
                gx.x_max
            )));
        }
        if gx.n < 4 {
            return Err(Self::invalid("xi-grid needs at least four cells".into()));
        }
        check_initial(&self.initial)
    }

    fn weight(&self, tau: f64) -> f64 {
        let lam = self.weight_exponent;
        self.epsilon.powf(2.0 * lam) * (-lam * tau).exp()
    }
}

// The datum must vanish at xi = 0, be finite, and its weighted profile
// must have decayed at the far end where the Dirichlet condition sits.
fn check_initial(v0: &SelfSimilarField) -> Result<(), DiffusiveError> {
    let gx = v0.grid.gx;
    let n = gx.len();
    let mut sup = 0.0f64;
    for j in 0..v0.grid.gy.len() {
        let row = v0.row(j);
        for (i, v) in row.iter().enumerate() {
            let w = v * (gx.x(i).powi(2) / 8.0).exp();
            if !w.is_finite() {
                return Err(DiffusiveError::InvalidInitialData(format!(
                    "non-finite weighted value at ({i}, {j})"
                )));
            }
            sup = sup.max(w.abs());
        }
    }
    for j in 0..v0.grid.gy.len() {
        let row = v0.row(j);
        if row[0].abs() > 1e-12 * sup.max(1e-300) {
            return Err(DiffusiveError::InvalidInitialData(format!(
                "datum is {} at xi = 0 in row {j}",
                row[0]
            )));
        }
        let far = row[n - 1] * (gx.x_max.powi(2) / 8.0).exp();
        if far.abs() > 1e-4 * sup {
            return Err(DiffusiveError::InvalidInitialData(format!(
                "weighted datum is {far:e} at the far end xi = {}",
                gx.x_max
            )));
        }
    }
    Ok(())
}

/// Per recorded `tau`: `alpha = <w, e_0>`, its transversely heat-evolved
/// part `alpha_c`, the remainder `beta = alpha - alpha_c`, and norms of
/// `r = w - alpha e_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionRecord {
    pub epsilon: f64,
    pub weight_exponent: f64,
    pub y: Grid1D,
    pub taus: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub alpha_c: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    /// `(int sup_y r^2 dxi)^{1/2}`.
    pub r_norm: Vec<f64>,
    /// `sup |r e^{-xi^2/8} / xi| e^{lam tau / 2}`.
    pub vtilde_sup: Vec<f64>,
    /// `sup |v / xi|`.
    pub v_over_xi_sup: Vec<f64>,
    pub beta_sup: Vec<f64>,
    /// Largest one-sided difference quotient of `beta` in `y`.
    pub beta_dy_sup: Vec<f64>,
    /// `max_y |<r, e_0>|`.
    pub orthogonality: Vec<f64>,
    #[serde(skip)]
    pub last: Option<SelfSimilarField>,
}

impl DecompositionRecord {
    /// `sup_tau ||beta||_inf / eps^{2 lam}`.
    pub fn scaled_beta(&self) -> f64 {
        let scale = self.epsilon.powf(2.0 * self.weight_exponent);
        self.beta_sup.iter().fold(0.0f64, |m, b| m.max(*b)) / scale
    }

    pub fn nearest(&self, tau: f64) -> usize {
        let mut best = 0;
        for (k, t) in self.taus.iter().enumerate() {
            if (t - tau).abs() < (self.taus[best] - tau).abs() {
                best = k;
            }
        }
        best
    }

    /// Long form `tau,y,alpha,alpha_c,beta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tau,y,alpha,alpha_c,beta")?;
        for (k, tau) in self.taus.iter().enumerate() {
            for j in 0..self.y.len() {
                writeln!(
                    out,
                    "{tau},{},{:e},{:e},{:e}",
                    self.y.x(j),
                    self.alpha[k][j],
                    self.alpha_c[k][j],
                    self.beta[k][j]
                )?;
            }
        }
        Ok(())
    }

    pub fn write_norms_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "tau,r_norm,vtilde_sup,v_over_xi_sup,beta_sup,beta_dy_sup,orthogonality"
        )?;
        for k in 0..self.taus.len() {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                self.taus[k],
                self.r_norm[k],
                self.vtilde_sup[k],
                self.v_over_xi_sup[k],
                self.beta_sup[k],
                self.beta_dy_sup[k],
                self.orthogonality[k]
            )?;
        }
        Ok(())
    }
}

/// Interior samples of the null mode (the last node is the Dirichlet node)
/// and the potential making them an exact null vector of
/// `D2 + diag(potential)`.
fn balanced_potential(gx: &Grid1D) -> (Vec<f64>, Vec<f64>) {
    let h = gx.h();
    let m = gx.n - 1;
    let e0: Vec<f64> = (1..=m).map(|i| null_mode(gx.x(i))).collect();
    let get = |k: isize| if k < 0 || k >= m as isize { 0.0 } else { e0[k as usize] };
    let potential = (0..m)
        .map(|i| {
            let k = i as isize;
            -(get(k + 1) - 2.0 * get(k) + get(k - 1)) / (h * h * e0[i])
        })
        .collect();
    (e0, potential)
}

struct Band {
    lower: f64,
    upper: f64,
    diag: Vec<f64>,
}

impl Band {
    fn apply_into(&self, z: &[f64], out: &mut [f64], lanes: usize, scale: f64) {
        let m = self.diag.len();
        for i in 0..m {
            let row = &mut out[i * lanes..(i + 1) * lanes];
            let centre = &z[i * lanes..(i + 1) * lanes];
            let d = scale * self.diag[i];
            for (o, c) in row.iter_mut().zip(centre) {
                *o = c + d * c;
            }
            if i > 0 {
                let l = scale * self.lower;
                for (o, q) in row.iter_mut().zip(&z[(i - 1) * lanes..i * lanes]) {
                    *o += l * q;
                }
            }
            if i + 1 < m {
                let u = scale * self.upper;
                for (o, q) in row.iter_mut().zip(&z[(i + 1) * lanes..(i + 2) * lanes]) {
                    *o += u * q;
                }
            }
        }
    }

    // I - scale * band
    fn implicit(&self, scale: f64) -> Result<ThomasFactor, DiffusiveError> {
        let m = self.diag.len();
        let diag: Vec<f64> = self.diag.iter().map(|d| 1.0 - scale * d).collect();
        let lower = vec![-scale * self.lower; m - 1];
        let upper = vec![-scale * self.upper; m - 1];
        Ok(ThomasFactor::new(&lower, &diag, &upper)?)
    }
}

/// Solves the problem to `tau_end`, recording every `record_every` and at
/// the end.
pub fn run_dirichlet(problem: &DirichletProblem, tau_end: f64) -> Result<DecompositionRecord, DiffusiveError> {
    problem.validate()?;
    if !(tau_end > 0.0) {
        return Err(DiffusiveError::InvalidProblem(format!(
            "tau_end = {tau_end} must be positive"
        )));
    }
    let gx = problem.initial.grid.gx;
    let gy = problem.initial.grid.gy;
    let h = gx.h();
    let m = gx.n - 1;
    let lanes = gy.len();
    let xis: Vec<f64> = (1..=m).map(|i| gx.x(i)).collect();
    let (e0, potential) = balanced_potential(&gx);
    let lift: Vec<f64> = xis.iter().map(|x| (x * x / 8.0).exp()).collect();

    let mut dct = Dct1::new(lanes);
    let mut z = vec![0.0; m * lanes];
    let mut column = vec![0.0; lanes];
    for i in 0..m {
        for (j, c) in column.iter_mut().enumerate() {
            *c = problem.initial.at(i + 1, j) * lift[i];
        }
        dct.transform(&mut column);
        z[i * lanes..(i + 1) * lanes].copy_from_slice(&column);
    }
    let alpha0_modes = project_lanes(&z, &e0, h, lanes);
    let mu: Vec<f64> = (0..lanes).map(|k| dct.laplacian_eigenvalue(k, gy.h())).collect();

    let steps = (tau_end / problem.d_tau).round().max(1.0) as usize;
    let dt = tau_end / steps as f64;
    let every = ((problem.record_every / dt).round() as usize).max(1);
    // the cosine transform of a y-constant c has c * 2n in mode 0
    let mode0_scale = 2.0 * gy.n as f64;

    let band_at = |tau: f64| {
        let g = problem.weight(tau);
        let (phi, psi) = (problem.potential.value(tau), problem.drift.value(tau));
        Band {
            lower: 1.0 / (h * h) - g * psi / (2.0 * h),
            upper: 1.0 / (h * h) + g * psi / (2.0 * h),
            diag: xis
                .iter()
                .zip(&potential)
                .map(|(x, v)| -2.0 / (h * h) + v + g * (phi - x * psi / 4.0))
                .collect::<Vec<_>>(),
        }
    };
    let source_at = |tau: f64| -> Vec<f64> {
        let g = problem.weight(tau);
        xis.iter()
            .zip(&lift)
            .map(|(x, l)| mode0_scale * g * l * problem.forcing.value(tau, *x))
            .collect()
    };

    let mut rec = DecompositionRecord {
        epsilon: problem.epsilon,
        weight_exponent: problem.weight_exponent,
        y: gy,
        taus: vec![],
        alpha: vec![],
        alpha_c: vec![],
        beta: vec![],
        r_norm: vec![],
        vtilde_sup: vec![],
        v_over_xi_sup: vec![],
        beta_sup: vec![],
        beta_dy_sup: vec![],
        orthogonality: vec![],
        last: None,
    };
    let ctx = RecordContext {
        problem,
        gx,
        gy,
        e0: &e0,
        xis: &xis,
        lift: &lift,
        mu: &mu,
        alpha0_modes: &alpha0_modes,
    };
    ctx.record(&mut rec, &mut dct, &z, 0.0, false)?;

    let mut rhs = vec![0.0; m * lanes];
    let mut band = band_at(0.0);
    let mut source = source_at(0.0);
    for n in 0..steps {
        let tau_next = (n + 1) as f64 * dt;
        let band_next = band_at(tau_next);
        let source_next = source_at(tau_next);
        band.apply_into(&z, &mut rhs, lanes, 0.5 * dt);
        for i in 0..m {
            rhs[i * lanes] += 0.5 * dt * (source[i] + source_next[i]);
        }
        band_next.implicit(0.5 * dt)?.solve_lanes(&mut rhs, lanes);
        std::mem::swap(&mut z, &mut rhs);
        band = band_next;
        source = source_next;
        if (n + 1) % every == 0 || n + 1 == steps {
            ctx.record(&mut rec, &mut dct, &z, tau_next, n + 1 == steps)?;
        }
    }
    Ok(rec)
}

fn project_lanes(z: &[f64], e0: &[f64], h: f64, lanes: usize) -> Vec<f64> {
    let mut out = vec![0.0; lanes];
    for (i, e) in e0.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(&z[i * lanes..(i + 1) * lanes]) {
            *o += h * e * v;
        }
    }
    out
}

struct RecordContext<'a> {
    problem: &'a DirichletProblem,
    gx: Grid1D,
    gy: Grid1D,
    e0: &'a [f64],
    xis: &'a [f64],
    lift: &'a [f64],
    mu: &'a [f64],
    alpha0_modes: &'a [f64],
}

impl RecordContext<'_> {
    fn record(
        &self,
        rec: &mut DecompositionRecord,
        dct: &mut Dct1,
        z: &[f64],
        tau: f64,
        keep: bool,
    ) -> Result<(), DiffusiveError> {
        let lanes = self.gy.len();
        let m = self.xis.len();
        let h = self.gx.h();
        let s = (tau.exp() - 1.0) / (self.problem.epsilon * self.problem.epsilon);
        let decay: Vec<f64> = self.mu.iter().map(|mu| (mu * s).exp()).collect();

        // w[i * lanes + j] in physical y
        let mut w = vec![0.0; m * lanes];
        let mut column = vec![0.0; lanes];
        for i in 0..m {
            let modes = &z[i * lanes..(i + 1) * lanes];
            for ((c, v), d) in column.iter_mut().zip(modes).zip(&decay) {
                *c = v * d;
            }
            dct.inverse(&mut column);
            w[i * lanes..(i + 1) * lanes].copy_from_slice(&column);
        }
        if let Some(index) = w.iter().position(|v| !v.is_finite()) {
            return Err(crate::numerics::NumericsError::NonFinite { index }.into());
        }
        let alpha = project_lanes(&w, self.e0, h, lanes);
        let mut alpha_c: Vec<f64> = self.alpha0_modes.iter().zip(&decay).map(|(a, d)| a * d).collect();
        dct.inverse(&mut alpha_c);
        let beta: Vec<f64> = alpha.iter().zip(&alpha_c).map(|(a, c)| a - c).collect();

        let growth = (0.5 * self.problem.weight_exponent * tau).exp();
        let mut sup_r2 = vec![0.0f64; m];
        let (mut vtilde, mut v_over_xi) = (0.0f64, 0.0f64);
        let mut r_dot_e0 = vec![0.0; lanes];
        for i in 0..m {
            let scale = 1.0 / (self.lift[i] * self.xis[i]);
            for j in 0..lanes {
                let wij = w[i * lanes + j];
                let r = wij - alpha[j] * self.e0[i];
                sup_r2[i] = sup_r2[i].max(r * r);
                vtilde = vtilde.max((r * scale).abs() * growth);
                v_over_xi = v_over_xi.max((wij * scale).abs());
                r_dot_e0[j] += h * r * self.e0[i];
            }
        }
        let r_norm = (h * sup_r2.iter().sum::<f64>()).sqrt();
        let beta_dy = beta
            .windows(2)
            .map(|p| (p[1] - p[0]).abs() / self.gy.h())
            .fold(0.0f64, f64::max);

        rec.taus.push(tau);
        rec.r_norm.push(r_norm);
        rec.vtilde_sup.push(vtilde);
        rec.v_over_xi_sup.push(v_over_xi);
        rec.beta_sup.push(beta.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        rec.beta_dy_sup.push(beta_dy);
        rec.orthogonality
            .push(r_dot_e0.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        rec.alpha.push(alpha);
        rec.alpha_c.push(alpha_c);
        rec.beta.push(beta);
        if keep {
            let grid = Grid2D::new(self.gx, self.gy);
            let n = self.gx.len();
            let mut values = vec![0.0; grid.len()];
            for j in 0..lanes {
                for i in 0..m {
                    values[j * n + i + 1] = w[i * lanes + j] / self.lift[i];
                }
            }
            rec.last = Some(SelfSimilarField { tau, grid, values });
        }
        Ok(())
    }
}

/// `(tau, sup |v / xi|)` for the problem with all lower-order coefficients
/// switched off, started from `initial`.
pub fn localized_decay(
    initial: SelfSimilarField,
    epsilon: f64,
    tau_end: f64,
    d_tau: f64,
) -> Result<Vec<(f64, f64)>, DiffusiveError> {
    let mut problem = DirichletProblem::new(epsilon, 1.0, initial);
    problem.epsilon_max = problem.epsilon_max.max(epsilon);
    problem.d_tau = d_tau;
    let rec = run_dirichlet(&problem, tau_end)?;
    Ok(rec.taus.into_iter().zip(rec.v_over_xi_sup).collect())
}

/// Energy `(tau, ||w||)` along the flow
/// `w_tau = (w_xixi + (3/4 - xi^2/16) w) + (w_zz - (1/4 + z^2/16) w)` on
/// `(0, Xi) x (-Z, Z)` with zero boundary values, where `z` is the
/// self-similar transverse variable. The two parts commute and are
/// stepped by Crank-Nicolson in turn.
pub fn symmetrized_decay(
    initial: &SelfSimilarField,
    tau_end: f64,
    d_tau: f64,
) -> Result<Vec<(f64, f64)>, DiffusiveError> {
    let gx = initial.grid.gx;
    let gz = initial.grid.gy;
    if gx.x_min.abs() > 1e-12 || gx.n < 4 || gz.n < 4 {
        return Err(DiffusiveError::InvalidProblem(
            "needs xi from 0 and at least four cells per axis".into(),
        ));
    }
    let (mx, mz) = (gx.n - 1, gz.n - 1);
    let (hx, hz) = (gx.h(), gz.h());
    let (_, potential) = balanced_potential(&gx);
    let xi_band = Band {
        lower: 1.0 / (hx * hx),
        upper: 1.0 / (hx * hx),
        diag: potential.iter().map(|v| -2.0 / (hx * hx) + v).collect(),
    };
    let z_band = Band {
        lower: 1.0 / (hz * hz),
        upper: 1.0 / (hz * hz),
        diag: (1..=mz)
            .map(|j| {
                let z = gz.x(j);
                -2.0 / (hz * hz) - 0.25 - z * z / 16.0
            })
            .collect(),
    };
    let steps = (tau_end / d_tau).round().max(1.0) as usize;
    let dt = tau_end / steps as f64;
    let xi_solve = xi_band.implicit(0.5 * dt)?;
    let z_solve = z_band.implicit(0.5 * dt)?;

    // xi-major layout: w[i * mz + j]
    let nx = gx.len();
    let mut w = vec![0.0; mx * mz];
    for i in 0..mx {
        for j in 0..mz {
            w[i * mz + j] = initial.values[(j + 1) * nx + i + 1];
        }
    }
    let energy = |w: &[f64]| (hx * hz * w.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let mut out = vec![(0.0, energy(&w))];
    let mut tmp = vec![0.0; mx * mz];
    for n in 0..steps {
        xi_band.apply_into(&w, &mut tmp, mz, 0.5 * dt);
        xi_solve.solve_lanes(&mut tmp, mz);
        // transpose to z-major, sweep, transpose back
        for i in 0..mx {
            for j in 0..mz {
                w[j * mx + i] = tmp[i * mz + j];
            }
        }
        z_band.apply_into(&w, &mut tmp, mx, 0.5 * dt);
        z_solve.solve_lanes(&mut tmp, mx);
        for j in 0..mz {
            for i in 0..mx {
                w[i * mz + j] = tmp[j * mx + i];
            }
        }
        out.push(((n + 1) as f64 * dt, energy(&w)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::{heat_reflected_piecewise, PiecewiseConstant};
    use proptest::prelude::*;

    fn grid(l_y: f64, h_y: f64, h_xi: f64) -> Grid2D {
        Grid2D::new(
            Grid1D::with_spacing(0.0, 12.0, h_xi).unwrap(),
            Grid1D::with_spacing(0.0, l_y, h_y).unwrap(),
        )
    }

    // v with w = e_0 g(y)
    fn aligned(grid: Grid2D, g: impl Fn(usize) -> f64) -> SelfSimilarField {
        let mut v = SelfSimilarField::from_fn(0.0, grid, |xi, _| null_mode(xi) * (-xi * xi / 8.0).exp());
        let n = grid.gx.len();
        for j in 0..grid.gy.len() {
            let scale = g(j);
            v.values[j * n..(j + 1) * n].iter_mut().for_each(|x| *x *= scale);
        }
        v
    }

    #[test]
    fn null_direction_is_invariant() {
        let v0 = aligned(grid(10.0, 0.5, 0.05), |_| 1.0);
        let mut p = DirichletProblem::new(0.1, 0.4, v0);
        p.record_every = 0.5;
        let rec = run_dirichlet(&p, 3.0).unwrap();
        for k in 0..rec.taus.len() {
            assert!(rec.alpha[k].iter().all(|a| (a - 1.0).abs() <= 1e-10));
            assert!(rec.r_norm[k] <= 1e-10);
            assert!(rec.beta_sup[k] <= 1e-10);
        }
    }

    #[test]
    fn null_component_follows_the_rescaled_heat_flow() {
        let eps = 0.1;
        let l = 60.0;
        let g = grid(l, 0.05, 0.1);
        let data = PiecewiseConstant::new(vec![10.0], vec![2.0, 1.0], true).unwrap();
        let avg = data.cell_averages(g.gy);
        let v0 = aligned(g, |j| avg.values[j]);
        let mut p = DirichletProblem::new(eps, 0.4, v0);
        p.record_every = 0.5;
        let rec = run_dirichlet(&p, 3.0).unwrap();
        for (k, tau) in rec.taus.iter().enumerate().filter(|(_, t)| **t >= 1.0 - 1e-9) {
            let s = (tau.exp() - 1.0) / (eps * eps);
            for j in 0..g.gy.len() {
                let exact = heat_reflected_piecewise(&data, l, s, g.gy.x(j));
                assert!((rec.alpha[k][j] - exact).abs() <= 1e-6, "tau {tau} y {}", g.gy.x(j));
                assert!(rec.beta[k][j].abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn zero_datum_stays_zero_and_shifts_commute() {
        let g = grid(200.0, 0.5, 0.1);
        let zero = SelfSimilarField::from_fn(0.0, g, |_, _| 0.0);
        let decay = localized_decay(zero, 1.0, 2.0, 0.01).unwrap();
        assert!(decay.iter().all(|(_, s)| *s == 0.0));

        let blob = |centre: f64| {
            SelfSimilarField::from_fn(0.0, g, move |xi, y| {
                if (y - centre).abs() < 2.0 {
                    xi * (-xi * xi / 4.0).exp()
                } else {
                    0.0
                }
            })
        };
        let a = localized_decay(blob(60.0), 1.0, 4.0, 0.01).unwrap();
        let b = localized_decay(blob(100.0), 1.0, 4.0, 0.01).unwrap();
        for ((ta, sa), (_, sb)) in a.iter().zip(&b) {
            assert!((sa - sb).abs() <= 1e-10 * sa, "tau {ta}: {sa} vs {sb}");
        }
    }

    #[test]
    fn localized_datum_decays_like_the_envelope() {
        let g = grid(200.0, 0.5, 0.05);
        let v0 = SelfSimilarField::from_fn(0.0, g, |xi, y| if y < 2.0 { xi * (-xi * xi / 4.0).exp() } else { 0.0 });
        let series = localized_decay(v0, 1.0, 6.0, 0.01).unwrap();
        let first = series[0].1;
        let (tau, last) = *series.last().unwrap();
        assert!(last <= 0.1 * first);
        let envelope = (-tau / 2.0).exp() * first;
        assert!(last / envelope <= 2.0 && last / envelope >= 0.5, "{}", last / envelope);
    }

    #[test]
    fn symmetrized_energy_decays_at_half_rate() {
        let g = Grid2D::new(
            Grid1D::with_spacing(0.0, 12.0, 0.05).unwrap(),
            Grid1D::with_spacing(-16.0, 16.0, 0.1).unwrap(),
        );
        let w0 = SelfSimilarField::from_fn(0.0, g, |xi, z| {
            let transverse = if z.abs() < 1.0 { (z * z / 8.0).exp() } else { 0.0 };
            (xi + xi * xi * xi / 5.0) * (-xi * xi / 8.0).exp() * transverse
        });
        let energy = symmetrized_decay(&w0, 5.0, 0.01).unwrap();
        let e0 = energy[0].1;
        for (tau, e) in &energy {
            assert!(*e <= 1.05 * (-tau / 2.0).exp() * e0, "tau {tau}");
        }
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let v0 = aligned(grid(10.0, 0.5, 0.1), |_| 1.0);
        let mut p = DirichletProblem::new(0.3, 0.4, v0.clone());
        assert!(matches!(p.validate(), Err(DiffusiveError::InvalidProblem(_))));
        p.epsilon = 0.1;
        p.drift = TimeCoefficient::cosine(1.5, 1.0);
        assert!(matches!(p.validate(), Err(DiffusiveError::InvalidProblem(_))));
        p.drift = TimeCoefficient::ZERO;
        assert!(p.validate().is_ok());
        let mut bad = v0;
        let n = bad.grid.gx.len();
        bad.values[3 * n] = 0.1;
        p.initial = bad;
        assert!(matches!(p.validate(), Err(DiffusiveError::InvalidInitialData(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn bookkeeping_identities(
            phi in -1.0f64..1.0,
            psi in -1.0f64..1.0,
            amp in -1.0f64..1.0,
            freq in 0.0f64..4.0,
            tilt in -1.0f64..1.0,
        ) {
            let g = grid(8.0, 0.5, 0.1);
            let v0 = SelfSimilarField::from_fn(0.0, g, |xi, y| {
                (null_mode(xi) + tilt * (xi * xi * xi - 6.0 * xi) * 0.1 * (-xi * xi / 8.0).exp()) * (-xi * xi / 8.0).exp() * (1.0 + 0.1 * y)
            });
            let mut p = DirichletProblem::new(0.1, 0.4, v0);
            p.potential = TimeCoefficient::cosine(phi, freq);
            p.drift = TimeCoefficient::sine(psi, 2.0);
            p.forcing = Forcing { in_time: TimeCoefficient::cosine(amp, 3.0), support: 2.0 };
            let rec = run_dirichlet(&p, 1.0).unwrap();
            for k in 0..rec.taus.len() {
                for j in 0..g.gy.len() {
                    let a = rec.alpha[k][j];
                    prop_assert!((a - rec.alpha_c[k][j] - rec.beta[k][j]).abs() <= 1e-14 * (1.0 + a.abs()));
                }
                prop_assert!(rec.orthogonality[k] <= 1e-8);
            }
        }
    }
}
