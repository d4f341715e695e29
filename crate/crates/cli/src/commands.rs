//! Subcommands. Each one is a pure function of the problem file and the
//! flags; reports go to stdout (or `--out`) as JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use varelax_core::classify::{
    class_e_certificate, fstar_lipschitz_check, growth_constants, hypothesis_check,
    sci_certificate, CheckStatus, ClassECertificate, ClassEVerdict, GrowthConstants,
    HypothesisReport, LipschitzReport, ProbeSettings, SciReport,
};
use varelax_core::conditions::{dubois_reymond_residual, energy_constancy, DrReport, EnergyConstancy};
use varelax_core::reconstruct::{
    compare_costs, decompose_velocities, rearrange, CostComparison, VelocityDecompositionTrack,
};
use varelax_core::relax::{
    coercivity_bound_check, nagumo_penalized_solve, solve_relaxed, value_sweep, CoercivityReport,
    Discretization, Trajectory,
};

use crate::error::{exit, CliError};
use crate::io;
use crate::problem::{parse_problem, Overrides, ProblemFile};

/// Time samples used by the certificates on non-autonomous problems.
const CERT_T_SAMPLES: usize = 17;
/// Time samples for the per-t strict convexity probes.
const SCI_T_SAMPLES: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "varelax", version, about = "Relax, certify and reconstruct fixed-endpoint variational problems")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GlobalOpts {
    /// Override numerics.n_t
    #[arg(long = "n-t", global = true)]
    pub n_t: Option<usize>,
    /// Override numerics.n_x
    #[arg(long = "n-x", global = true)]
    pub n_x: Option<usize>,
    /// Override numerics.velocity_cap
    #[arg(long = "xi-max", global = true)]
    pub xi_max: Option<f64>,
    /// Extra slack added to the relaxed/reconstructed cost gap tolerance
    #[arg(long, global = true, default_value_t = 0.0)]
    pub tol: f64,
    /// Directory for plotting tables (energy.csv, chi.csv, sweep.csv)
    #[arg(long = "plot-data", global = true)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class E, strict convexity at infinity and hypothesis constants
    Classify {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the relaxed problem and check the DuBois-Reymond condition
    Relax {
        problem: PathBuf,
        /// Trajectory CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solve even when the hypothesis check fails
        #[arg(long)]
        force: bool,
    },
    /// Budget-constrained value V(l) along a schedule a:b:k
    Sweep {
        problem: PathBuf,
        #[arg(long = "l-schedule")]
        l_schedule: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: classify, relax, verify, decompose, rearrange, compare
    Solve {
        problem: PathBuf,
        /// Receives relaxed.csv, reconstructed.csv and report.json
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
    /// DuBois-Reymond residual of a trajectory CSV
    Verify {
        problem: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Caratheodory decomposition of the velocities of a trajectory CSV
    Decompose {
        problem: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub class_e: ClassECertificate,
    pub sci: Vec<SciReport>,
    pub hypotheses: HypothesisReport,
    pub growth: Option<GrowthConstants>,
    pub growth_note: Option<String>,
    /// Only for time-dependent integrands.
    pub lipschitz: Option<LipschitzReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub n_t: usize,
    pub value: f64,
    pub theta_value: Option<f64>,
    pub objective: f64,
    pub boundary_contact: bool,
    pub cap_saturated: bool,
}

impl From<&Trajectory> for TrajectorySummary {
    fn from(t: &Trajectory) -> Self {
        Self {
            n_t: t.n_t(),
            value: t.value,
            theta_value: t.theta_value,
            objective: t.objective,
            boundary_contact: t.boundary_contact,
            cap_saturated: t.cap_saturated,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxReport {
    pub hypotheses: HypothesisReport,
    pub trajectory: TrajectorySummary,
    pub dubois_reymond: DrReport,
    pub energy_constancy: Option<EnergyConstancy>,
    pub coercivity: Option<CoercivityReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub dubois_reymond: DrReport,
    pub energy_constancy: Option<EnergyConstancy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionSummary {
    pub pieces: usize,
    pub split_intervals: usize,
    pub support_radius: f64,
    pub f_cost: f64,
    pub g_cost: f64,
    pub total: f64,
    pub mean_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub classification: ClassifyReport,
    pub relaxed: TrajectorySummary,
    pub dubois_reymond: DrReport,
    pub energy_constancy: Option<EnergyConstancy>,
    pub reconstruction: ReconstructionSummary,
    pub comparison: CostComparison,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Run a parsed command line, writing the primary report to `stdout`.
/// Returns the exit code for completed runs.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    let overrides = Overrides {
        n_t: g.n_t,
        n_x: g.n_x,
        xi_max: g.xi_max,
    };
    if !(g.tol.is_finite() && g.tol >= 0.0) {
        return Err(CliError::Usage("--tol must be finite and >= 0".into()));
    }
    if let Some(dir) = &g.plot_data {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let plot = g.plot_data.as_deref();
    match &cli.command {
        Command::Classify { problem, out } => {
            let pf = parse_problem(problem, &overrides)?;
            let rep = classify(&pf)?;
            if let Some(dir) = plot {
                plot_chi(dir, &rep.class_e)?;
            }
            deliver(&rep, out.as_deref(), stdout)?;
            Ok(if rep.pass { exit::OK } else { exit::CERTIFICATE })
        }
        Command::Relax {
            problem,
            out,
            force,
        } => {
            let pf = parse_problem(problem, &overrides)?;
            let (rep, traj) = relax(&pf, *force)?;
            if let Some(path) = out {
                io::emit_trajectory(&traj, path)?;
            }
            if let Some(dir) = plot {
                plot_energy(dir, &rep.dubois_reymond)?;
            }
            write_out(stdout, &io::report_json(&rep))?;
            Ok(exit::OK)
        }
        Command::Sweep {
            problem,
            l_schedule,
            out,
        } => {
            let schedule = parse_schedule(l_schedule)?;
            let pf = parse_problem(problem, &overrides)?;
            if pf.numerics.theta.is_none() {
                return Err(CliError::parse(
                    problem.display().to_string(),
                    "numerics.theta: required by sweep",
                ));
            }
            let rep = value_sweep(&pf.problem, &pf.dp_config(), &schedule)?;
            if let Some(dir) = plot {
                let rows: Vec<Vec<Option<f64>>> = rep
                    .l_schedule
                    .iter()
                    .zip(&rep.values)
                    .map(|(l, v)| vec![Some(*l), *v])
                    .collect();
                io::emit_columns(&dir.join("sweep.csv"), &["l", "V"], &rows)?;
            }
            deliver(&rep, out.as_deref(), stdout)?;
            Ok(if rep.settle_index.is_some() {
                exit::OK
            } else {
                exit::ACCEPTANCE
            })
        }
        Command::Solve { problem, out_dir } => {
            let pf = parse_problem(problem, &overrides)?;
            std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
            let rep = solve(&pf, g.tol, out_dir)?;
            if let Some(dir) = plot {
                plot_chi(dir, &rep.classification.class_e)?;
                plot_energy(dir, &rep.dubois_reymond)?;
            }
            io::emit_report(&rep, &out_dir.join("report.json"))?;
            write_out(stdout, &io::report_json(&rep))?;
            Ok(if rep.pass { exit::OK } else { exit::ACCEPTANCE })
        }
        Command::Verify { problem, traj, out } => {
            let pf = parse_problem(problem, &overrides)?;
            let tr = io::read_trajectory(traj)?;
            let rep = verify(&pf, &tr)?;
            if let Some(dir) = plot {
                plot_energy(dir, &rep.dubois_reymond)?;
            }
            deliver(&rep, out.as_deref(), stdout)?;
            Ok(exit::OK)
        }
        Command::Decompose { problem, traj, out } => {
            let pf = parse_problem(problem, &overrides)?;
            let tr = io::read_trajectory(traj)?;
            let track = decompose_velocities(&pf.problem, &pf.dp_config(), &tr)?;
            deliver(&track, out.as_deref(), stdout)?;
            Ok(exit::OK)
        }
    }
}

fn write_out(stdout: &mut dyn Write, s: &str) -> Result<(), CliError> {
    stdout
        .write_all(s.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn deliver<T: Serialize>(rep: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => io::emit_report(rep, path),
        None => write_out(stdout, &io::report_json(rep)),
    }
}

fn plot_chi(dir: &Path, cert: &ClassECertificate) -> Result<(), CliError> {
    let rows: Vec<Vec<Option<f64>>> = cert
        .radii
        .iter()
        .zip(&cert.chi_values)
        .map(|(r, c)| vec![Some(*r), Some(*c)])
        .collect();
    io::emit_columns(&dir.join("chi.csv"), &["R", "chi"], &rows)
}

fn plot_energy(dir: &Path, rep: &DrReport) -> Result<(), CliError> {
    let rows: Vec<Vec<Option<f64>>> = (0..rep.times.len())
        .map(|i| {
            vec![
                Some(rep.times[i]),
                Some(rep.energy[i]),
                Some(rep.drift[i]),
                Some(rep.residual[i]),
            ]
        })
        .collect();
    io::emit_columns(&dir.join("energy.csv"), &["t", "E", "drift", "residual"], &rows)
}

/// `a:b:k` → k evenly spaced values from a to b.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--l-schedule expects a:b:k with 0 <= a < b and k >= 2, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b && k >= 2) {
        return Err(bad());
    }
    let step = (b - a) / (k - 1) as f64;
    Ok((0..k)
        .map(|i| if i + 1 == k { b } else { a + step * i as f64 })
        .collect())
}

/// At most `m` entries of `xs`, evenly spread and keeping both ends.
fn spread(xs: &[f64], m: usize) -> Vec<f64> {
    if xs.len() <= m {
        return xs.to_vec();
    }
    let last = xs.len() - 1;
    let mut out: Vec<f64> = (0..m).map(|j| xs[j * last / (m - 1)]).collect();
    out.dedup();
    out
}

pub fn classify(pf: &ProblemFile) -> Result<ClassifyReport, CliError> {
    let problem = &pf.problem;
    let cfg = pf.dp_config();
    let disc = Discretization::new(problem, &cfg)?;
    let probe = ProbeSettings {
        grid_points: pf.numerics.probe_points,
        ..ProbeSettings::default()
    };
    let t_nodes = &disc.times;
    let t_cert = spread(t_nodes, CERT_T_SAMPLES);
    let radii = &pf.numerics.radius_schedule;

    let class_e = class_e_certificate(&problem.f, &t_cert, radii, pf.numerics.threshold, &probe)?;

    let sci_times = if problem.f.is_autonomous() {
        vec![t_nodes[0]]
    } else {
        spread(t_nodes, SCI_T_SAMPLES)
    };
    let sci = sci_times
        .iter()
        .map(|&t| sci_certificate(&problem.f, t, &[-1.0, 1.0], &[0.0], radii, &probe))
        .collect::<Result<Vec<_>, _>>()?;

    let hypotheses = hypothesis_check(
        &problem.f,
        &problem.g,
        &disc.probe_box(problem.horizon),
        pf.constants.as_ref(),
    )?;

    let (growth, growth_note) = match problem
        .f
        .sample(t_nodes[0], &disc.velocity_grid)
        .and_then(|s| growth_constants(&s, None))
    {
        Ok(gc) => (Some(gc), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let lipschitz = if problem.f.is_autonomous() {
        None
    } else {
        let cap = problem.velocity_cap;
        let xi_probe = [-0.5 * cap, 0.0, 0.5 * cap];
        Some(fstar_lipschitz_check(
            &problem.f,
            &xi_probe,
            &t_cert,
            &disc.velocity_grid,
        )?)
    };

    let pass = class_e.verdict == ClassEVerdict::Diverges
        && sci.iter().all(|s| s.pass)
        && hypotheses.pass
        && lipschitz.as_ref().is_none_or(|l| l.status != CheckStatus::Fail);
    Ok(ClassifyReport {
        class_e,
        sci,
        hypotheses,
        growth,
        growth_note,
        lipschitz,
        pass,
    })
}

fn solve_trajectory(pf: &ProblemFile) -> Result<Trajectory, CliError> {
    let cfg = pf.dp_config();
    let traj = if cfg.theta.is_some() && cfg.penalty > 0.0 {
        nagumo_penalized_solve(&pf.problem, &cfg)?
    } else {
        solve_relaxed(&pf.problem, &cfg)?
    };
    Ok(traj)
}

fn trajectory_warnings(traj: &Trajectory) -> Vec<String> {
    let mut w = Vec::new();
    if traj.boundary_contact {
        w.push("minimizer touches the state box; widen numerics.state_box".to_string());
    }
    if traj.cap_saturated {
        w.push("minimizer uses the largest admissible step; raise numerics.velocity_cap".to_string());
    }
    w
}

fn autonomous(pf: &ProblemFile) -> bool {
    pf.problem.f.is_autonomous() && pf.problem.g.is_autonomous()
}

pub fn relax(pf: &ProblemFile, force: bool) -> Result<(RelaxReport, Trajectory), CliError> {
    let problem = &pf.problem;
    let cfg = pf.dp_config();
    let disc = Discretization::new(problem, &cfg)?;
    let hypotheses = hypothesis_check(
        &problem.f,
        &problem.g,
        &disc.probe_box(problem.horizon),
        pf.constants.as_ref(),
    )?;
    let mut warnings = Vec::new();
    if !hypotheses.pass {
        if !force {
            return Err(varelax_core::Error::CertificateFailure(
                "hypothesis check failed (pass --force to solve anyway)".into(),
            )
            .into());
        }
        warnings.push("hypothesis check failed; solved because of --force".to_string());
    }
    let traj = solve_trajectory(pf)?;
    warnings.extend(trajectory_warnings(&traj));
    let dubois_reymond = dubois_reymond_residual(problem, &cfg, &traj)?;
    let energy = if autonomous(pf) {
        Some(energy_constancy(problem, &cfg, &traj)?)
    } else {
        None
    };
    let coercivity = match coercivity_bound_check(problem, &cfg, &traj, &hypotheses.constants()) {
        Ok(c) => Some(c),
        Err(e) => {
            warnings.push(format!("coercivity bound skipped: {e}"));
            None
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let rep = RelaxReport {
        hypotheses,
        trajectory: TrajectorySummary::from(&traj),
        dubois_reymond,
        energy_constancy: energy,
        coercivity,
        warnings,
    };
    Ok((rep, traj))
}

pub fn verify(pf: &ProblemFile, traj: &Trajectory) -> Result<VerifyReport, CliError> {
    let cfg = pf.dp_config();
    let dubois_reymond = dubois_reymond_residual(&pf.problem, &cfg, traj)?;
    let energy = if autonomous(pf) {
        Some(energy_constancy(&pf.problem, &cfg, traj)?)
    } else {
        None
    };
    Ok(VerifyReport {
        dubois_reymond,
        energy_constancy: energy,
    })
}

pub fn solve(pf: &ProblemFile, tol: f64, out_dir: &Path) -> Result<SolveReport, CliError> {
    let problem = &pf.problem;
    let cfg = pf.dp_config();
    let classification = classify(pf)?;
    let traj = solve_trajectory(pf)?;
    let warnings = trajectory_warnings(&traj);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let checked = verify(pf, &traj)?;
    let track: VelocityDecompositionTrack = decompose_velocities(problem, &cfg, &traj)?;
    let recon = rearrange(problem, &traj, &track)?;
    let comparison = compare_costs(problem, &cfg, &traj, &recon, tol)?;
    io::emit_trajectory(&traj, &out_dir.join("relaxed.csv"))?;
    io::emit_reconstructed(&recon, &out_dir.join("reconstructed.csv"))?;
    let pass = comparison.pass;
    Ok(SolveReport {
        classification,
        relaxed: TrajectorySummary::from(&traj),
        dubois_reymond: checked.dubois_reymond,
        energy_constancy: checked.energy_constancy,
        reconstruction: ReconstructionSummary {
            pieces: recon.velocities.len(),
            split_intervals: track.nontrivial,
            support_radius: track.support_radius,
            f_cost: recon.f_cost,
            g_cost: recon.g_cost,
            total: recon.total,
            mean_error: recon.mean_error,
        },
        comparison,
        warnings,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_parsing() {
        assert_eq!(parse_schedule("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let s = parse_schedule("0.5:3:26").unwrap();
        assert_eq!(s.len(), 26);
        assert_eq!(s[25], 3.0);
        for bad in ["1:0:3", "0:1:1", "0:1", "a:1:2", "-1:1:3"] {
            assert!(matches!(parse_schedule(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn spread_keeps_ends() {
        let xs: Vec<f64> = (0..=64).map(f64::from).collect();
        let s = spread(&xs, 17);
        assert_eq!(s.len(), 17);
        assert_eq!((s[0], s[16]), (0.0, 64.0));
        assert_eq!(spread(&xs[..3], 17), xs[..3].to_vec());
    }
}
