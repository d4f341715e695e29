//! Trajectory CSV and report JSON.
//!
//! Trajectories are written one row per node with header `t,x,xdot`
//! (plus `piece` for reconstructions). The last node has no interval of its
//! own and repeats the final velocity. Numbers use `{:.16e}`, 17
//! significant digits, so a read-back is bit-exact.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use varelax_core::reconstruct::ReconstructedTrajectory;
use varelax_core::relax::Trajectory;

use crate::error::CliError;

/// Relative mismatch allowed between a stored `xdot` and the difference
/// quotient of the stored states.
const VELOCITY_CONSISTENCY_TOL: f64 = 1e-9;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::parse(path.display().to_string(), format!("{other:?}")),
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

/// Write `t,x,xdot` rows into any sink.
pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "x", "xdot"])?;
    let n = traj.n_t();
    for i in 0..=n {
        let v = traj.velocities[i.min(n - 1)];
        w.write_record([num(traj.times[i]), num(traj.states[i]), num(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trajectory(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    write_trajectory(create(path)?, traj).map_err(|e| csv_err(path, e))
}

pub fn write_reconstructed<W: Write>(out: W, recon: &ReconstructedTrajectory) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "x", "xdot", "piece"])?;
    let m = recon.velocities.len();
    for k in 0..=m {
        let j = k.min(m - 1);
        w.write_record([
            num(recon.times[k]),
            num(recon.states[k]),
            num(recon.velocities[j]),
            recon.piece[j].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_reconstructed(recon: &ReconstructedTrajectory, path: &Path) -> Result<(), CliError> {
    write_reconstructed(create(path)?, recon).map_err(|e| csv_err(path, e))
}

/// Parse a trajectory CSV. Velocities come from the `xdot` column of all
/// rows but the last, after a consistency check against the states.
pub fn read_trajectory_str(text: &str, origin: &str) -> Result<Trajectory, CliError> {
    let err = |msg: String| CliError::parse(origin, msg);
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| err(e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[..3] != ["t", "x", "xdot"] || cols.len() > 4 || cols.get(3).is_some_and(|c| *c != "piece") {
        return Err(err(format!(
            "header must be t,x,xdot[,piece], got {}",
            cols.join(",")
        )));
    }
    let (mut times, mut states, mut xdot) = (Vec::new(), Vec::new(), Vec::new());
    for (r, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let line = r + 2;
        let field = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("line {line}, column {}: expected a finite number", cols[c])))
        };
        times.push(field(0)?);
        states.push(field(1)?);
        xdot.push(field(2)?);
    }
    if times.len() < 2 {
        return Err(err("need at least two rows".into()));
    }
    let mut traj = Trajectory::from_states(times, states).map_err(|e| err(e.to_string()))?;
    for (i, (v, q)) in xdot.iter().zip(&traj.velocities).enumerate() {
        if (v - q).abs() > VELOCITY_CONSISTENCY_TOL * (1.0 + q.abs()) {
            return Err(err(format!(
                "line {}: xdot {v} disagrees with the state difference quotient {q}",
                i + 2
            )));
        }
    }
    let n = traj.n_t();
    traj.velocities = xdot[..n].to_vec();
    Ok(traj)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    read_trajectory_str(&text, &path.display().to_string())
}

/// Pretty JSON with a trailing newline; field order follows the structs.
pub fn report_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn emit_report<T: Serialize>(report: &T, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, report_json(report)).map_err(|e| CliError::io(path, e))
}

/// Plain numeric table for plotting tools.
pub fn emit_columns(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<(), CliError> {
    let mut w = writer(create(path)?);
    let fail = |e| csv_err(path, e);
    w.write_record(header).map_err(fail)?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(num).unwrap_or_default()).collect();
        w.write_record(&cells).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
