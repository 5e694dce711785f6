use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::pipelines::OscillationProbe;
use super::{FieldRef, Gate, RunError, RunRecord};
use crate::front::BramsonFit;
use crate::numerics::Frame;

/// Writes `field_<k>.f64` (little-endian `f64`, row-major, x fastest) and
/// its sidecar `field_<k>.json`.
pub(crate) fn dump_field(
    dir: &Path,
    k: usize,
    t: f64,
    values: &[f64],
    shape: [usize; 2],
    grids: serde_json::Value,
    frame: Frame,
) -> Result<FieldRef, RunError> {
    let stem = format!("field_{k:04}");
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    let data = dir.join(format!("{stem}.f64"));
    std::fs::write(&data, bytes).map_err(|e| RunError::io(&data, e))?;
    let sidecar = json!({
        "file": format!("{stem}.f64"),
        "dtype": "f64",
        "byte_order": "little",
        "layout": "row-major, x index fastest",
        "shape": shape,
        "t": t,
        "frame": frame,
        "grids": grids,
    });
    let side = dir.join(format!("{stem}.json"));
    std::fs::write(&side, serde_json::to_string_pretty(&sidecar).expect("json")).map_err(|e| RunError::io(&side, e))?;
    Ok(FieldRef {
        t,
        file: format!("{stem}.f64"),
    })
}

/// Reads a dump written by the runner back into values.
pub fn read_field_dump(path: &Path) -> std::io::Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "length is not a multiple of 8",
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub gates: usize,
    pub failed: usize,
    pub pass: bool,
    /// one line per gate, `PASS`/`FAIL` first
    pub lines: Vec<String>,
}

fn flatten<'a>(records: &'a [RunRecord], out: &mut Vec<&'a RunRecord>) {
    for r in records {
        out.push(r);
        flatten(&r.members, out);
    }
}

fn relative(from: &Path, to: &Path) -> String {
    to.strip_prefix(from).unwrap_or(to).display().to_string()
}

/// Writes `summary.json` (every gate with measured value and bounds),
/// `gates.csv`, the `bramson_fit.csv` and `oscillation.csv` tables when a
/// record carries those fits, and `plot.gp`, a gnuplot script for the
/// front positions and fit curves.
pub fn emit_report(records: &[RunRecord], dir: &Path) -> std::io::Result<ReportSummary> {
    std::fs::create_dir_all(dir)?;
    let mut all = Vec::new();
    flatten(records, &mut all);

    let mut gates_csv = String::from("run,gate,measured,lower,upper,pass\n");
    let mut lines = Vec::new();
    let mut runs = Vec::new();
    let mut total = 0;
    let mut failed = 0;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &all {
        for g in &r.gates {
            total += 1;
            failed += usize::from(!g.pass);
            let _ = writeln!(
                gates_csv,
                "{},{},{},{},{},{}",
                r.name,
                g.name,
                g.measured,
                opt(g.lower),
                opt(g.upper),
                g.pass
            );
            lines.push(format!("{}: {}", r.name, g.describe()));
        }
        runs.push(json!({
            "name": r.name,
            "pipeline": r.pipeline,
            "dir": relative(dir, &r.dir),
            "config_hash": r.provenance.config_hash,
            "pass": r.gates.iter().all(|g: &Gate| g.pass),
            "gates": r.gates,
        }));
    }
    let summary = ReportSummary {
        gates: total,
        failed,
        pass: failed == 0,
        lines,
    };
    let doc = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "gates": total,
        "failed": failed,
        "pass": summary.pass,
        "runs": runs,
    });
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&doc).expect("json"),
    )?;
    std::fs::write(dir.join("gates.csv"), gates_csv)?;

    let bramson: Vec<(&RunRecord, BramsonFit)> = all
        .iter()
        .filter_map(|r| Some((*r, serde_json::from_value(r.fits.get("bramson")?.clone()).ok()?)))
        .collect();
    if !bramson.is_empty() {
        let mut t = String::from("run,beta_hat,x_inf,rms,window_lo,window_hi,points\n");
        for (r, f) in &bramson {
            let _ = writeln!(
                t,
                "{},{},{},{},{},{},{}",
                r.name, f.beta_hat, f.x_inf, f.rms, f.window.0, f.window.1, f.points
            );
        }
        std::fs::write(dir.join("bramson_fit.csv"), t)?;
    }
    let oscillation: Vec<(&RunRecord, Vec<OscillationProbe>)> = all
        .iter()
        .filter_map(|r| Some((*r, serde_json::from_value(r.fits.get("oscillation")?.clone()).ok()?)))
        .collect();
    if !oscillation.is_empty() {
        let mut t = String::from("run,n,t,predicted,measured\n");
        for (r, probes) in &oscillation {
            for p in probes {
                let _ = writeln!(t, "{},{},{},{},{}", r.name, p.n, p.t, p.predicted, p.measured);
            }
        }
        std::fs::write(dir.join("oscillation.csv"), t)?;
    }
    std::fs::write(dir.join("plot.gp"), plot_script(dir, &all, &bramson))?;
    Ok(summary)
}

fn plot_script(dir: &Path, runs: &[&RunRecord], fits: &[(&RunRecord, BramsonFit)]) -> String {
    let mut s = String::from(
        "# gnuplot script: front positions sigma_inf against t\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale x\n\
         set xlabel 't'\n",
    );
    for r in runs {
        let Some(front) = &r.front else { continue };
        let file = relative(dir, &r.dir.join("front.csv"));
        if front.ys.len() == 1 {
            let _ = writeln!(s, "\nset ylabel 'sigma_inf'\nset title '{}'", r.name);
            let mut plot = format!("plot '{file}' using 1:3 with linespoints title 'measured'");
            if let Some((_, f)) = fits.iter().find(|(q, _)| std::ptr::eq(*q, *r)) {
                // the fit in moving-frame offsets: (beta + 3/2) ln t - x_inf - anchor
                let _ = writeln!(
                    s,
                    "fit_{n}(t) = ({b} + 1.5) * log(t) - ({x}) - ({a})",
                    n = r.name.replace('-', "_"),
                    b = f.beta_hat,
                    x = f.x_inf,
                    a = front.anchor
                );
                let _ = write!(plot, ", fit_{}(x) title 'Bramson fit'", r.name.replace('-', "_"));
            }
            let _ = writeln!(s, "{plot}\npause -1");
        } else {
            let _ = writeln!(
                s,
                "\nset ylabel 'y'\nset zlabel 'sigma_inf'\nset title '{}'\nsplot '{file}' using 1:2:4 with points pt 7 ps 0.3 title 'sigma_inf(t, y)'\npause -1",
                r.name
            );
        }
    }
    s
}
