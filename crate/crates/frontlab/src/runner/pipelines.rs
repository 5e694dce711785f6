use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{Analysis2d, Config, DirichletCheck, ScenarioSpec, StepConfig};
use super::report::dump_field;
use super::{Gate, RunError, RunRecord};
use crate::diffusive::{
    aligned_xi_grid, apply_selfsimilar_operator, apply_symmetrized_operator, localized_decay, null_mode,
    null_mode_residual, project_null_mode, quadratic_form, run_dirichlet, to_selfsimilar, DirichletProblem, Forcing,
    SelfSimilarField,
};
use crate::front::{comparison_check, fit_bramson, shape_error, FrontTrace};
use crate::heat::{heat_evolve_cn, heat_exact_piecewise, heat_reflected_piecewise, merged_position, write_profile_csv};
use crate::kpp1d::{checkpoint_steps, run_1d, Run1D, Solver1DConfig};
use crate::kpp2d::{run_2d, Run2D, RunOptions, Solver2DConfig};
use crate::numerics::{trapezoid, Field1D, Frame, Grid1D, Grid2D};
use crate::scenarios::{
    make_heaviside_trapped, make_oscillating, make_periodic_y, make_two_limit, Datum1D, OscillationSequence, Scenario,
};
use crate::wave::{compute_wave, WaveProfile};

fn table(record: &mut RunRecord, name: &str) -> Result<BufWriter<File>, RunError> {
    let path = record.dir.join(name);
    let file = File::create(&path).map_err(|e| RunError::io(&path, e))?;
    if !record.tables.iter().any(|t| t == name) {
        record.tables.push(name.to_string());
    }
    Ok(BufWriter::new(file))
}

fn finish(mut out: BufWriter<File>, dir: &Path) -> Result<(), RunError> {
    out.flush().map_err(|e| RunError::io(dir, e))
}

fn io(dir: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::io(dir, e)
}

fn fit(record: &mut RunRecord, name: &str, value: impl Serialize) {
    record
        .fits
        .insert(name.to_string(), serde_json::to_value(value).expect("fit serializes"));
}

fn wave_profile(cfg: &Config) -> Result<WaveProfile, RunError> {
    Ok(compute_wave(cfg.wave.half_width, cfg.wave.step)?)
}

pub(super) fn wave(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let w = &cfg.wave;
    let started = std::time::Instant::now();
    let profile = wave_profile(cfg)?;
    let residual = profile.ode_residual_rms();
    let tail = profile.fit_tail_k((w.tail_window[0], w.tail_window[1]))?;
    let elapsed = started.elapsed().as_secs_f64();

    let dir = record.dir.clone();
    let mut out = table(record, "wave.csv")?;
    profile.write_csv(&mut out).map_err(io(&dir))?;
    finish(out, &dir)?;
    let path = dir.join("tail_fit.json");
    std::fs::write(&path, serde_json::to_string_pretty(&tail).expect("fit serializes")).map_err(io(&path))?;

    fit(record, "tail", tail);
    fit(record, "ode_residual_rms", residual);
    record
        .gates
        .push(Gate::at_most("wave_residual_rms", residual, w.residual_max));
    record
        .gates
        .push(Gate::at_most("tail_flatness", tail.max_deviation, w.tail_deviation_max));
    record.gates.push(Gate::at_most("wave_runtime", elapsed, w.runtime_max));
    Ok(())
}

fn x_grid(steps: &StepConfig) -> Result<Grid1D, RunError> {
    Ok(Grid1D::with_spacing(steps.x_min, steps.x_max(), steps.h).map_err(crate::kpp1d::SolverError::from)?)
}

fn schedule(steps: &StepConfig, t0: f64, extra: &[f64]) -> Vec<usize> {
    let mut times = steps.extra_times.clone();
    times.extend_from_slice(&steps.dump_times);
    times.extend_from_slice(extra);
    checkpoint_steps(t0, steps.t_end, steps.dt, steps.per_decade, &times)
}

fn run_datum(datum: &Datum1D, cfg: &Solver1DConfig, t_end: f64, schedule: &[usize]) -> Result<Run1D, RunError> {
    let u0 = datum.field(cfg.grid, Frame::Moving, cfg.t0);
    Ok(run_1d(&u0, cfg, t_end, schedule, &mut [])?)
}

/// `sigma_inf` of the single row of a 1D trace at the checkpoint nearest `t`.
fn sigma_at(trace: &FrontTrace, t: f64) -> f64 {
    trace.sigma_inf[trace.nearest(t)][0].unwrap_or(f64::NAN)
}

pub(super) fn run1d(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let c = cfg.run1d.as_ref().expect("validated");
    let profile = wave_profile(cfg)?;
    let grid = x_grid(&c.steps)?;
    let solver = Solver1DConfig::new(grid, c.steps.dt, Frame::Moving);
    let extra = [
        c.fit_window[0],
        c.fit_window[1],
        c.drift_times[0],
        c.drift_times[1],
        c.shape_time,
    ];
    let run = run_datum(&c.datum, &solver, c.steps.t_end, &schedule(&c.steps, solver.t0, &extra))?;
    let trace = FrontTrace::from_run1d(&run, c.steps.level, &profile);

    let (times, positions): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(&trace.sigma)
        .filter_map(|(t, s)| s[0].map(|s| (*t, s)))
        .unzip();
    let bramson = fit_bramson(&times, &positions, (c.fit_window[0], c.fit_window[1]), Frame::Moving)?;
    let drift = (sigma_at(&trace, c.drift_times[1]) - sigma_at(&trace, c.drift_times[0])).abs();
    let k = run.nearest(c.shape_time);
    let shape = shape_error(
        &run.checkpoints[k].values,
        &grid,
        &profile,
        c.steps.level,
        run.checkpoints[k].t,
    )?;

    let dir = record.dir.clone();
    let mut out = table(record, "front.csv")?;
    trace.write_csv(&mut out).map_err(io(&dir))?;
    finish(out, &dir)?;
    let mut out = table(record, "bramson_fit.csv")?;
    writeln!(out, "beta_hat,x_inf,rms,window_lo,window_hi,points").map_err(io(&dir))?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        bramson.beta_hat, bramson.x_inf, bramson.rms, bramson.window.0, bramson.window.1, bramson.points
    )
    .map_err(io(&dir))?;
    finish(out, &dir)?;
    for (n, &t) in c.steps.dump_times.iter().enumerate() {
        let k = run.nearest(t);
        let f = run.field(k);
        record.checkpoints.push(dump_field(
            &dir,
            n,
            run.checkpoints[k].t,
            &f.values,
            [1, grid.len()],
            json!({ "x": grid }),
            Frame::Moving,
        )?);
    }

    fit(record, "bramson", bramson);
    fit(record, "anchor", trace.anchor);
    fit(record, "shape", shape);
    record.gates.push(Gate::within(
        "bramson_slope",
        bramson.beta_hat,
        Some(c.slope_range[0]),
        Some(c.slope_range[1]),
    ));
    record.gates.push(Gate::at_most("residual_drift", drift, c.drift_max));
    record
        .gates
        .push(Gate::at_most("shape_error", shape.unweighted, c.shape_max));
    record.front = Some(trace);
    Ok(())
}

fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario, RunError> {
    Ok(match spec {
        ScenarioSpec::HeavisideTrapped { x1, x2, blend, notch } => {
            let s = make_heaviside_trapped(*x1, *x2, *blend)?;
            match notch {
                Some(n) => s.with_notch(*n)?,
                None => s,
            }
        }
        ScenarioSpec::TwoLimit { plus, minus, width } => make_two_limit(*plus, *minus, *width)?,
        ScenarioSpec::PeriodicY {
            base,
            amplitude,
            period,
            asymptotic,
        } => make_periodic_y(*base, *amplitude, *period, *asymptotic)?,
        ScenarioSpec::Oscillating { sequence } => {
            make_oscillating(sequence.clone().unwrap_or_else(OscillationSequence::desk))?.0
        }
    })
}

/// Probe times an analysis reads, so that they land on checkpoints.
fn analysis_times(analysis: &Analysis2d, scenario: &Scenario) -> Vec<f64> {
    match analysis {
        Analysis2d::None => vec![],
        Analysis2d::Slaving {
            extract_time, window, ..
        } => vec![*extract_time, window[0], window[1]],
        Analysis2d::Merge { time, window, .. } => vec![*time, window[0], window[1]],
        Analysis2d::Periodic { time, compare_time, .. } => vec![*time, *compare_time],
        Analysis2d::Oscillation { .. } => match &scenario.kind {
            crate::scenarios::ScenarioKind::Oscillating { sequence } => sequence.ts.clone(),
            _ => vec![],
        },
    }
}

pub(super) fn run2d(cfg: &Config, threads: usize, record: &mut RunRecord) -> Result<(), RunError> {
    let c = cfg.run2d.as_ref().expect("validated");
    let profile = wave_profile(cfg)?;
    let scenario = build_scenario(&c.scenario)?;
    let gx = x_grid(&c.steps)?;
    let gy = Grid1D::new(c.y_min, c.y_max, c.y_cells).map_err(crate::kpp1d::SolverError::from)?;
    let grid = Grid2D::new(gx, gy);
    let mut solver = Solver2DConfig::new(grid, c.steps.dt, c.y_boundary);
    solver.threads = threads.max(1);
    let u0 = scenario.initial_field(grid, Frame::Moving, solver.t0)?;

    let probes = analysis_times(&c.analysis, &scenario);
    let steps = schedule(&c.steps, solver.t0, &probes);
    let mut keep = c.steps.dump_times.clone();
    if let Analysis2d::Slaving { extract_time, .. } = c.analysis {
        keep.push(extract_time);
    }
    let opts = RunOptions {
        level: c.steps.level,
        keep_fields_at: keep,
    };
    let run = run_2d(&u0, &solver, c.steps.t_end, &steps, &profile, &opts, &mut [])?;

    // comparison with the two bounding 1D runs
    let x_cfg = solver.x_config();
    let (upper, lower) = scenario.bounds();
    let hi = run_datum(&upper, &x_cfg, c.steps.t_end, &steps)?;
    let lo = run_datum(&lower, &x_cfg, c.steps.t_end, &steps)?;
    let sandwich = comparison_check(&run, &hi, &lo)?;

    let dir = record.dir.clone();
    let mut out = table(record, "front.csv")?;
    run.front.write_csv(&mut out).map_err(io(&dir))?;
    finish(out, &dir)?;
    let mut out = table(record, "sandwich.csv")?;
    writeln!(out, "t,violation").map_err(io(&dir))?;
    for (t, v) in &sandwich.per_checkpoint {
        writeln!(out, "{t},{v:e}").map_err(io(&dir))?;
    }
    finish(out, &dir)?;
    let path = dir.join("scenario.json");
    std::fs::write(&path, scenario.to_json()).map_err(io(&path))?;
    for (k, &t) in c.steps.dump_times.iter().enumerate() {
        let (t_exact, f) = nearest_field(&run, t);
        record.checkpoints.push(dump_field(
            &dir,
            k,
            *t_exact,
            &f.values,
            [gy.len(), gx.len()],
            json!({ "x": gx, "y": gy }),
            Frame::Moving,
        )?);
    }
    fit(record, "sandwich_max_violation", sandwich.max_violation);
    record
        .gates
        .push(Gate::at_most("sandwich", sandwich.max_violation, c.sandwich_tolerance));

    match &c.analysis {
        Analysis2d::None => {}
        Analysis2d::Slaving {
            extract_time,
            window,
            tolerance,
            heat_dt,
            xi_max,
            reference_step,
        } => {
            let reference = match reference_step {
                Some(at) => {
                    let r = run_datum(&Datum1D::Step { at: *at }, &x_cfg, c.steps.t_end, &steps)?;
                    Some(FrontTrace::from_run1d(&r, c.steps.level, &profile))
                }
                None => None,
            };
            slaving(
                record,
                &run,
                *extract_time,
                *window,
                *tolerance,
                *heat_dt,
                *xi_max,
                reference.as_ref(),
            )?;
        }
        Analysis2d::Merge {
            time,
            window,
            tolerance,
        } => {
            let ScenarioSpec::TwoLimit { plus, minus, .. } = &c.scenario else {
                unreachable!("validated")
            };
            let mut limits = Vec::new();
            for d in [plus, minus] {
                let r = run_datum(d, &x_cfg, c.steps.t_end, &steps)?;
                limits.push(FrontTrace::from_run1d(&r, c.steps.level, &profile));
            }
            merge(record, &run.front, &limits[0], &limits[1], *time, *window, *tolerance)?;
        }
        Analysis2d::Periodic {
            time,
            compare_time,
            oscillation_max,
            drift_max,
        } => {
            let row = |t: f64| run.front.sigma_inf[run.front.nearest(t)].clone();
            let (last, earlier) = (row(*time), row(*compare_time));
            let values: Vec<f64> = last.iter().map(|s| s.unwrap_or(f64::NAN)).collect();
            let spread = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
                - values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
            let drift = last
                .iter()
                .zip(&earlier)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    _ => f64::NAN,
                })
                .fold(
                    0.0f64,
                    |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) },
                );
            fit(
                record,
                "periodic_mean",
                values.iter().sum::<f64>() / values.len() as f64,
            );
            record
                .gates
                .push(Gate::at_most("periodic_flatness", spread, *oscillation_max));
            record
                .gates
                .push(Gate::at_most("periodic_convergence", drift, *drift_max));
        }
        Analysis2d::Oscillation {
            tolerance,
            contrast_fraction,
        } => {
            let crate::scenarios::ScenarioKind::Oscillating { sequence } = &scenario.kind else {
                unreachable!("validated")
            };
            // y-independent datum with the same amplitude: its front carries
            // the one-dimensional transient that the prediction leaves out
            let flat = Datum1D::Exponential {
                from: sequence.amplitude.ln(),
                cut: 0.0,
            };
            let r = run_datum(&flat, &x_cfg, c.steps.t_end, &steps)?;
            let reference = FrontTrace::from_run1d(&r, c.steps.level, &profile);
            oscillation(record, &run.front, sequence, *tolerance, *contrast_fraction, &reference)?;
        }
    }
    record.front = Some(run.front);
    record.scenario = Some(scenario);
    Ok(())
}

fn nearest_field(run: &Run2D, t: f64) -> &(f64, crate::numerics::Field2D) {
    run.fields
        .iter()
        .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
        .expect("requested fields are kept")
}

/// Amplitude of the null direction in every row of a moving-frame field:
/// `<e^{xi^2/8} w, e_0>` with `w = e^x u / sqrt(t)`.
pub(crate) fn diffusive_amplitude(field: &crate::numerics::Field2D, t: f64, xi_max: f64) -> Result<Vec<f64>, RunError> {
    let xi = aligned_xi_grid(&field.grid.gx, t, xi_max)?;
    let w = to_selfsimilar(field, t, xi)?;
    Ok((0..field.grid.gy.len())
        .map(|j| {
            let sym: Vec<f64> = w
                .row(j)
                .iter()
                .enumerate()
                .map(|(i, v)| v * (xi.x(i).powi(2) / 8.0).exp())
                .collect();
            project_null_mode(&sym, &xi)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn slaving(
    record: &mut RunRecord,
    run: &Run2D,
    extract_time: f64,
    window: [f64; 2],
    tolerance: f64,
    heat_dt: f64,
    xi_max: f64,
    reference: Option<&FrontTrace>,
) -> Result<(), RunError> {
    let front = &run.front;
    let (t_start, field) = nearest_field(run, extract_time);
    let gy = field.grid.gy;
    let alpha = diffusive_amplitude(field, *t_start, xi_max)?;
    if alpha.iter().any(|a| !(*a > 0.0)) {
        return Err(RunError::Diffusive(
            crate::diffusive::DiffusiveError::InvalidInitialData("non-positive amplitude in the diffusive zone".into()),
        ));
    }
    let mut a = Field1D {
        grid: gy,
        values: alpha.clone(),
        frame: Frame::Lab,
    };
    let mut t_prev = *t_start;
    // (t, per-row sigma_inf - ln a)
    let mut rows: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for (k, &t) in front.times.iter().enumerate() {
        if t < window[0] - 1e-9 || t > window[1] + 1e-9 {
            continue;
        }
        a = heat_evolve_cn(&a, t - t_prev, heat_dt)?;
        t_prev = t;
        let sigma: Vec<f64> = front.sigma_inf[k].iter().map(|s| s.unwrap_or(f64::NAN)).collect();
        let ln_a: Vec<f64> = a.values.iter().map(|v| v.ln()).collect();
        rows.push((t, sigma, ln_a));
    }
    let (_, s0, l0) = &rows[0];
    let c0 = s0.iter().zip(l0).map(|(s, l)| s - l).sum::<f64>() / s0.len() as f64;
    let worst = |shift: &dyn Fn(f64) -> f64| {
        rows.iter()
            .flat_map(|(t, s, l)| s.iter().zip(l).map(move |(s, l)| (s - l - c0 - shift(*t)).abs()))
            .fold(
                0.0f64,
                |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) },
            )
    };
    let measured = worst(&|_| 0.0);

    let dir = record.dir.clone();
    let mut out = table(record, "slaving.csv")?;
    writeln!(out, "t,y,sigma_inf,ln_a,residual").map_err(io(&dir))?;
    for (t, s, l) in &rows {
        for j in 0..gy.len() {
            writeln!(out, "{t},{},{},{},{}", gy.x(j), s[j], l[j], s[j] - l[j] - c0).map_err(io(&dir))?;
        }
    }
    finish(out, &dir)?;
    let mut out = table(record, "amplitude.csv")?;
    writeln!(out, "y,alpha").map_err(io(&dir))?;
    for (j, v) in alpha.iter().enumerate() {
        writeln!(out, "{},{v}", gy.x(j)).map_err(io(&dir))?;
    }
    finish(out, &dir)?;

    fit(record, "slaving_c0", c0);
    fit(record, "slaving_extract_time", *t_start);
    if let Some(r) = reference {
        let r0 = sigma_at(r, rows[0].0);
        let relative = worst(&|t| sigma_at(r, t) - r0);
        fit(record, "slaving_minus_reference", relative);
    }
    record
        .gates
        .push(Gate::at_most("transverse_slaving", measured, tolerance));
    Ok(())
}

fn window_mean(trace: &FrontTrace, window: [f64; 2]) -> f64 {
    let (times, sigma) = trace.column(0);
    let picked: Vec<f64> = times
        .iter()
        .zip(&sigma)
        .filter(|(t, _)| **t >= window[0] - 1e-9 && **t <= window[1] + 1e-9)
        .map(|p| *p.1)
        .collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}

fn merge(
    record: &mut RunRecord,
    front: &FrontTrace,
    plus: &FrontTrace,
    minus: &FrontTrace,
    time: f64,
    window: [f64; 2],
    tolerance: f64,
) -> Result<(), RunError> {
    let j0 = front
        .ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|p| p.0)
        .unwrap_or(0);
    let measured = front.sigma_inf[front.nearest(time)][j0].unwrap_or(f64::NAN);
    let (p_plus, p_minus) = (window_mean(plus, window), window_mean(minus, window));
    let predicted = merged_position(p_plus, p_minus);

    let dir = record.dir.clone();
    let mut out = table(record, "merge.csv")?;
    writeln!(out, "t,sigma_plus,sigma_minus,merged,measured").map_err(io(&dir))?;
    for (k, t) in front.times.iter().enumerate() {
        let (sp, sm) = (sigma_at(plus, *t), sigma_at(minus, *t));
        let m = front.sigma_inf[k][j0].unwrap_or(f64::NAN);
        writeln!(out, "{t},{sp},{sm},{},{m}", merged_position(sp, sm)).map_err(io(&dir))?;
    }
    finish(out, &dir)?;

    fit(
        record,
        "merge",
        json!({
            "y": front.ys[j0],
            "sigma_plus": p_plus,
            "sigma_minus": p_minus,
            "predicted": predicted,
            "measured": measured,
            "same_time_predicted": merged_position(sigma_at(plus, time), sigma_at(minus, time)),
        }),
    );
    record
        .gates
        .push(Gate::at_most("merge_formula", (measured - predicted).abs(), tolerance));
    Ok(())
}

/// One probe of an oscillating run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct OscillationProbe {
    pub n: usize,
    pub t: f64,
    /// transverse heat flow of the contrast profile at `y = 0`
    pub a: f64,
    /// `ln a + c0`
    pub predicted: f64,
    pub measured: f64,
}

fn oscillation(
    record: &mut RunRecord,
    front: &FrontTrace,
    sequence: &OscillationSequence,
    tolerance: f64,
    contrast_fraction: f64,
    reference: &FrontTrace,
) -> Result<(), RunError> {
    let predictions = sequence.predictions()?;
    let j0 = 0;
    let measured: Vec<f64> = predictions
        .iter()
        .map(|(t, _)| front.sigma_inf[front.nearest(*t)][j0].unwrap_or(f64::NAN))
        .collect();
    let c0 = predictions
        .iter()
        .zip(&measured)
        .map(|((_, a), s)| s - a.ln())
        .sum::<f64>()
        / measured.len() as f64;
    let probes: Vec<OscillationProbe> = predictions
        .iter()
        .zip(&measured)
        .enumerate()
        .map(|(k, ((t, a), s))| OscillationProbe {
            n: k + 1,
            t: *t,
            a: *a,
            predicted: a.ln() + c0,
            measured: *s,
        })
        .collect();
    let mismatch = probes
        .iter()
        .map(|p| (p.measured - p.predicted).abs())
        .fold(
            0.0f64,
            |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) },
        );
    // signed: a swing against the predicted direction counts as negative
    let contrast = probes
        .windows(2)
        .map(|w| (w[1].measured - w[0].measured) / (w[1].predicted - w[0].predicted))
        .fold(f64::INFINITY, f64::min);

    let dir = record.dir.clone();
    let mut out = table(record, "oscillation.csv")?;
    writeln!(out, "n,t,a,predicted,measured").map_err(io(&dir))?;
    for p in &probes {
        writeln!(out, "{},{},{},{},{}", p.n, p.t, p.a, p.predicted, p.measured).map_err(io(&dir))?;
    }
    finish(out, &dir)?;
    // same comparison with the flat-datum front subtracted (not gated)
    let relative: Vec<f64> = probes
        .iter()
        .map(|p| p.measured - sigma_at(reference, p.t) - p.a.ln())
        .collect();
    let relative_c0 = relative.iter().sum::<f64>() / relative.len() as f64;
    let relative_mismatch = relative.iter().fold(0.0f64, |m, d| m.max((d - relative_c0).abs()));
    fit(record, "oscillation", &probes);
    fit(record, "oscillation_c0", c0);
    fit(record, "oscillation_minus_reference", relative_mismatch);
    fit(
        record,
        "oscillation_reference",
        probes.iter().map(|p| sigma_at(reference, p.t)).collect::<Vec<_>>(),
    );
    record
        .gates
        .push(Gate::at_most("oscillation_match", mismatch, tolerance));
    record
        .gates
        .push(Gate::at_least("oscillation_contrast", contrast, contrast_fraction));
    Ok(())
}

pub(super) fn heat(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let c = cfg.heat.as_ref().expect("validated");
    let data = c.data.build("heat.data")?;
    let outer = data.breakpoints.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let reach = c.y_reach.unwrap_or(outer + 10.0 * c.t_end.sqrt());
    let lo = if data.even_symmetric { 0.0 } else { -reach };
    let grid = Grid1D::with_spacing(lo, reach, c.h).map_err(crate::heat::HeatError::from)?;
    let a0 = data.cell_averages(grid);
    let a = heat_evolve_cn(&a0, c.t_end - 1.0, c.dt)?;
    let exact: Vec<f64> = (0..grid.len())
        .map(|i| heat_exact_piecewise(&data, c.t_end, grid.x(i)))
        .collect();
    let error = a
        .values
        .iter()
        .zip(&exact)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let dir = record.dir.clone();
    let mut out = table(record, "heat_profile.csv")?;
    write_profile_csv(&mut out, 1.0, &a0, true).map_err(io(&dir))?;
    write_profile_csv(&mut out, c.t_end, &a, false).map_err(io(&dir))?;
    finish(out, &dir)?;
    let mut out = table(record, "heat_error.csv")?;
    writeln!(out, "y,stepped,exact,difference").map_err(io(&dir))?;
    for (i, (stepped, exact)) in a.values.iter().zip(&exact).enumerate() {
        writeln!(out, "{},{stepped},{exact},{:e}", grid.x(i), stepped - exact).map_err(io(&dir))?;
    }
    finish(out, &dir)?;
    fit(record, "heat_max_error", error);
    record.gates.push(Gate::at_most("heat_oracle", error, c.tolerance));

    if let Some(f) = &c.factorial {
        let seq = OscillationSequence::factorial(2 * f.pair + 1, f.contrast);
        let predictions = seq.predictions()?;
        let mut out = table(record, "factorial.csv")?;
        writeln!(out, "n,t,a,limit").map_err(io(&dir))?;
        for (k, (t, a)) in predictions.iter().enumerate() {
            let n = k + 1;
            let limit = if n % 2 == 0 { 1.0 } else { f.contrast };
            writeln!(out, "{n},{t:e},{a},{limit}").map_err(io(&dir))?;
        }
        finish(out, &dir)?;
        // ts[k] is t_{k+1}
        let even = predictions[2 * f.pair - 1].1;
        let odd = predictions[2 * f.pair].1;
        fit(record, "factorial_even", even);
        fit(record, "factorial_odd", odd);
        record
            .gates
            .push(Gate::at_most("factorial_even_limit", (even - 1.0).abs(), f.tolerance));
        record.gates.push(Gate::at_most(
            "factorial_odd_limit",
            (odd - f.contrast).abs(),
            f.tolerance * f.contrast,
        ));
    }
    Ok(())
}

pub(super) fn dirichlet(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let c = cfg.dirichlet.as_ref().expect("validated");
    match c.check {
        DirichletCheck::Spectral => spectral(cfg, record),
        DirichletCheck::Scaling => scaling(cfg, record),
        DirichletCheck::LocalizedDecay => decay_check(cfg, record),
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn spectral(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let s = &cfg.dirichlet.as_ref().expect("validated").spectral;
    let g = Grid1D::with_spacing(0.0, s.xi_max, s.h).map_err(crate::diffusive::DiffusiveError::from)?;
    let xs = g.points();
    let e0: Vec<f64> = xs.iter().map(|x| null_mode(*x)).collect();
    let direction: Vec<f64> = xs.iter().map(|x| x * (-x * x / 4.0).exp()).collect();
    let sym_residual = sup(&apply_symmetrized_operator(&e0, s.h));
    let ss_residual = sup(&apply_selfsimilar_operator(&direction, s.h));

    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut quotients = Vec::with_capacity(s.samples);
    for _ in 0..s.samples {
        let coef: Vec<f64> = (0..s.modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = xs
            .iter()
            .map(|x| {
                coef.iter()
                    .enumerate()
                    .map(|(k, ck)| ck * ((k + 1) as f64 * std::f64::consts::PI * x / s.xi_max).sin())
                    .sum::<f64>()
                    * (-x * x / 32.0).exp()
            })
            .collect();
        let r = null_mode_residual(&w, &g);
        let norm2 = trapezoid(&r.iter().map(|v| v * v).collect::<Vec<_>>(), g.h());
        quotients.push(quadratic_form(&r, &g) / norm2);
    }
    let gap = quotients.iter().copied().fold(f64::INFINITY, f64::min);

    let dir = record.dir.clone();
    let mut out = table(record, "rayleigh.csv")?;
    writeln!(out, "sample,quotient").map_err(io(&dir))?;
    for (k, q) in quotients.iter().enumerate() {
        writeln!(out, "{k},{q}").map_err(io(&dir))?;
    }
    finish(out, &dir)?;
    record
        .gates
        .push(Gate::at_most("null_mode_residual", sym_residual, s.null_max));
    record
        .gates
        .push(Gate::at_most("null_direction_residual", ss_residual, s.null_max));
    record.gates.push(Gate::at_least("spectral_gap", gap, s.gap_min));
    Ok(())
}

fn scaling(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let s = &cfg.dirichlet.as_ref().expect("validated").scaling;
    let profile = s.profile.build("dirichlet.scaling.profile")?;
    let diff = crate::diffusive::DiffusiveError::from;
    let grid = Grid2D::new(
        Grid1D::with_spacing(0.0, s.xi_max, s.h_xi).map_err(diff)?,
        Grid1D::with_spacing(0.0, s.y_length, s.h_y).map_err(diff)?,
    );
    let transverse = profile.cell_averages(grid.gy);
    let nx = grid.gx.len();
    let mut v0 = SelfSimilarField::from_fn(0.0, grid, |xi, _| {
        let hermite = (xi * xi * xi - 6.0 * xi) * (-xi * xi / 8.0).exp();
        (null_mode(xi) + s.remainder * hermite) * (-xi * xi / 8.0).exp()
    });
    for (j, g) in transverse.values.iter().enumerate() {
        v0.values[j * nx..(j + 1) * nx].iter_mut().for_each(|v| *v *= g);
    }

    let dir = record.dir.clone();
    let mut summary = table(record, "scaling.csv")?;
    writeln!(summary, "epsilon,scaled_beta,remainder_ratio,slaving_error").map_err(io(&dir))?;
    let (mut scaled, mut remainder, mut slaving) = (Vec::new(), 0.0f64, 0.0f64);
    for &eps in &s.epsilons {
        let mut problem = DirichletProblem::new(eps, s.weight_exponent, v0.clone());
        problem.potential = s.potential;
        problem.drift = s.drift;
        problem.forcing = Forcing {
            in_time: s.forcing,
            support: s.forcing_support,
        };
        problem.bound = s.bound;
        problem.epsilon_max = problem.epsilon_max.max(eps);
        problem.d_tau = s.d_tau;
        problem.record_every = s.record_every;
        let rec = run_dirichlet(&problem, s.tau_end)?;

        let lam = s.weight_exponent;
        let r0 = rec.r_norm[0];
        let mut ratio = 0.0f64;
        let mut slave = 0.0f64;
        for (k, &tau) in rec.taus.iter().enumerate() {
            if tau >= s.remainder_window[0] - 1e-9 && tau <= s.remainder_window[1] + 1e-9 {
                let bound = (10.0 * eps.powf(2.0 * lam) * (-lam * tau).exp()).max(10.0 * (-0.75 * tau).exp() * r0);
                ratio = ratio.max(rec.r_norm[k] / bound);
            }
            if tau >= s.slaving_from - 1e-9 {
                let heat_time = (tau.exp() - 1.0) / (eps * eps);
                for j in 0..grid.gy.len() {
                    let exact = heat_reflected_piecewise(&profile, s.y_length, heat_time, grid.gy.x(j));
                    slave = slave.max((rec.alpha_c[k][j] - exact).abs());
                }
            }
        }
        let sb = rec.scaled_beta();
        writeln!(summary, "{eps},{sb},{ratio},{slave:e}").map_err(io(&dir))?;
        let tag = format!("{eps}").replace('.', "p");
        let mut out = table(record, &format!("norms_eps{tag}.csv"))?;
        rec.write_norms_csv(&mut out).map_err(io(&dir))?;
        finish(out, &dir)?;
        let mut out = table(record, &format!("decomposition_eps{tag}.csv"))?;
        rec.write_csv(&mut out).map_err(io(&dir))?;
        finish(out, &dir)?;
        scaled.push(sb);
        remainder = remainder.max(ratio);
        slaving = slaving.max(slave);
    }
    finish(summary, &dir)?;
    let max = scaled.iter().copied().fold(0.0, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    fit(record, "scaled_beta", &scaled);
    record.gates.push(Gate::at_most("scaled_beta", max, s.beta_max));
    record
        .gates
        .push(Gate::at_most("beta_epsilon_ratio", max / min, s.beta_ratio_max));
    record.gates.push(Gate::at_most("remainder_decay", remainder, 1.0));
    record
        .gates
        .push(Gate::at_most("alpha_c_slaving", slaving, s.slaving_max));
    Ok(())
}

fn decay_check(cfg: &Config, record: &mut RunRecord) -> Result<(), RunError> {
    let d = &cfg.dirichlet.as_ref().expect("validated").decay;
    let diff = crate::diffusive::DiffusiveError::from;
    let grid = Grid2D::new(
        Grid1D::with_spacing(0.0, d.xi_max, d.h_xi).map_err(diff)?,
        Grid1D::with_spacing(0.0, d.y_length, d.h_y).map_err(diff)?,
    );
    let support = d.support;
    let v0 = SelfSimilarField::from_fn(
        0.0,
        grid,
        |xi, y| {
            if y < support {
                xi * (-xi * xi / 4.0).exp()
            } else {
                0.0
            }
        },
    );
    let series = localized_decay(v0, d.epsilon, d.tau_end, d.d_tau)?;
    let first = series[0].1;
    let last = series.last().expect("at least one record").1;
    let (mut low, mut high) = (f64::INFINITY, 0.0f64);

    let dir = record.dir.clone();
    let mut out = table(record, "decay.csv")?;
    writeln!(out, "tau,sup_v_over_xi,envelope").map_err(io(&dir))?;
    for (tau, v) in &series {
        let envelope = first * (-tau / 2.0).exp();
        writeln!(out, "{tau},{v},{envelope}").map_err(io(&dir))?;
        if *tau >= d.envelope_from - 1e-9 {
            low = low.min(v / envelope);
            high = high.max(v / envelope);
        }
    }
    finish(out, &dir)?;
    record
        .gates
        .push(Gate::at_most("localized_decay", last / first, d.fraction_max));
    record
        .gates
        .push(Gate::at_most("decay_envelope_upper", high, d.envelope_factor));
    record
        .gates
        .push(Gate::at_least("decay_envelope_lower", low, 1.0 / d.envelope_factor));
    Ok(())
}
