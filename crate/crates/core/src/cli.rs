//! The `plaque` subcommands. Each command reads a [`RunConfig`], writes its
//! CSV files into an output directory and reports whether every part of
//! the run succeeded.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::continuation::{
    continue_branch, detections_csv, diagram_csv, projection, tangent_cone_switch, track_radial_branch, BranchPoint,
    ContinuationOptions, DetectedBifurcation, SwitchOptions,
};
use crate::error::{Error, Result};
use crate::fb_solver::{
    fields_for_curve, linearized_spectrum, newton_solve, radial_solution, Discretization, FreeBoundarySolution, NewtonOptions,
    Restriction,
};
use crate::output::{fmt_f64, fmt_opt, CsvTable};
use crate::polar_disc::{radial_convergence, BoundaryCurve, ConvergenceLevel};
use crate::spectral::bifurcation_point;

/// Process exit code for a run whose outputs are complete.
pub const EXIT_OK: i32 = 0;
/// Process exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 1;
/// Process exit code for runs that wrote partial results.
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Bifurcate,
    Stability,
    Branch,
    Steady,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Converge => "converge",
            Command::Bifurcate => "bifurcate",
            Command::Stability => "stability",
            Command::Branch => "branch",
            Command::Steady => "steady",
        })
    }
}

/// Files written by a command and the failures it recorded on the way.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }

    fn write(&mut self, table: &CsvTable, dir: &Path, name: &str) -> Result<()> {
        let path = dir.join(name);
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs one subcommand. Configuration problems are returned as errors;
/// numerical failures are recorded in the report next to the partial output.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    match command {
        Command::Converge => cmd_converge(cfg, out),
        Command::Bifurcate => cmd_bifurcate(cfg, out),
        Command::Stability => cmd_stability(cfg, out),
        Command::Branch => cmd_branch(cfg, out),
        Command::Steady => cmd_steady(cfg, out),
    }
}

fn newton(cfg: &RunConfig) -> NewtonOptions {
    NewtonOptions {
        tol: cfg.tol,
        ..NewtonOptions::default()
    }
}

/// Refinement study of the discrete radial fields against the closed form:
/// `converge.csv` with `h,dtheta,err,order`.
pub fn cmd_converge(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    if cfg.grid.ladder.len() < 2 {
        return Err(Error::Config("converge needs a ladder of at least two grids".into()));
    }
    let mut report = RunReport::default();
    let mut table = CsvTable::new(
        format!("radial convergence; {}", cfg.describe(None)),
        &["h", "dtheta", "err", "order"],
    );
    let levels: Vec<Result<ConvergenceLevel>> = cfg
        .grid
        .ladder
        .par_iter()
        .map(|&level| {
            radial_convergence(&cfg.params, &[level], cfg.grid.scheme).map(|mut v| v.remove(0))
        })
        .collect();
    let mut prev: Option<ConvergenceLevel> = None;
    for (level, &(m, n_r)) in levels.into_iter().zip(&cfg.grid.ladder) {
        match level {
            Ok(l) => {
                let order = prev.map(|p| (p.err / l.err).ln() / (p.h / l.h).ln());
                table.push(vec![fmt_f64(l.h), fmt_f64(l.dtheta), fmt_f64(l.err), fmt_opt(order)]);
                prev = Some(l);
            }
            Err(e) => {
                report.failures.push(format!("grid ({m}, {n_r}): {e}"));
                break;
            }
        }
    }
    report.write(&table, out, "converge.csv")?;
    Ok(report)
}

/// Detected against analytic bifurcation points on every ladder grid:
/// `bifurcate_m{m}_nr{n_r}.csv` with `n,L_analytic,L_numeric,abs_err`, and
/// the raw detections next to it.
pub fn cmd_bifurcate(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    if cfg.grid.ladder.is_empty() {
        return Err(Error::Config("bifurcate needs at least one grid in the ladder".into()));
    }
    let modes = &cfg.bifurcate.modes;
    let analytic: Vec<f64> = modes
        .iter()
        .map(|&n| bifurcation_point(&cfg.params, n).map(|b| b.l_n))
        .collect::<Result<_>>()?;
    let l_max = cfg.search_limit(cfg.bifurcate.l_max, modes)?;
    let levels = cfg.grid.levels();
    let tracks: Vec<_> = levels
        .par_iter()
        .map(|disc| track_radial_branch(&cfg.params, disc, 0.0, l_max, &cfg.bifurcate.step))
        .collect();
    let mut report = RunReport::default();
    for (disc, track) in levels.iter().zip(tracks) {
        let tag = format!("m{}_nr{}", disc.m, disc.n_r);
        let comment = format!("bifurcation points, L in [0, {l_max}]; {}", cfg.describe(Some(disc)));
        let mut table = CsvTable::new(comment.clone(), &["n", "L_analytic", "L_numeric", "abs_err"]);
        let detections = match track {
            Ok(t) => {
                if let Some(msg) = t.aborted {
                    report.failures.push(format!("{tag}: {msg}"));
                }
                t.detections
            }
            Err(e) => {
                report.failures.push(format!("{tag}: {e}"));
                Vec::new()
            }
        };
        for (&n, &l_n) in modes.iter().zip(&analytic) {
            match detections.iter().find(|d| d.mode_estimate == n) {
                Some(d) => table.push(vec![
                    n.to_string(),
                    fmt_f64(l_n),
                    fmt_f64(d.l_tilde),
                    fmt_f64((d.l_tilde - l_n).abs()),
                ]),
                None => {
                    report.failures.push(format!("{tag}: no detection for mode {n}"));
                    table.push(vec![n.to_string(), fmt_f64(l_n), String::new(), String::new()]);
                }
            }
        }
        report.write(&table, out, &format!("bifurcate_{tag}.csv"))?;
        report.write(&detections_csv(&detections, &comment), out, &format!("detections_{tag}.csv"))?;
    }
    Ok(report)
}

/// Largest real part of the linearised spectrum of the radial state for each
/// configured `L`: `stability.csv` with `L,re_lambda_max,restriction`, plus
/// the whole spectrum per `L`.
pub fn cmd_stability(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let disc = cfg.grid.discretization();
    let restriction = cfg.stability.restriction;
    let spectra: Vec<_> = cfg
        .stability
        .ldl
        .par_iter()
        .map(|&l| radial_solution(&cfg.params.with_ldl(l), &disc).and_then(|s| linearized_spectrum(&s, restriction)))
        .collect();
    let mut report = RunReport::default();
    let comment = format!("restriction={restriction}; {}", cfg.describe(Some(&disc)));
    let mut table = CsvTable::new(comment.clone(), &["L", "re_lambda_max", "restriction"]);
    for (k, (&l, spectrum)) in cfg.stability.ldl.iter().zip(spectra).enumerate() {
        match spectrum {
            Ok(s) => {
                table.push(vec![fmt_f64(l), fmt_f64(s.re_max()), restriction.to_string()]);
                report.write(&s.to_csv(&format!("L={l}; {comment}")), out, &format!("spectrum_{k:02}.csv"))?;
            }
            Err(e) => {
                report.failures.push(format!("L = {l}: {e}"));
                table.push(vec![fmt_f64(l), String::new(), restriction.to_string()]);
            }
        }
    }
    report.write(&table, out, "stability.csv")?;
    Ok(report)
}

/// Radial track, branch switching at each requested mode and continuation of
/// the new branches: `diagram.csv`, `detections.csv`, `branch_stability.csv`
/// (`point_id,re_lambda_max`) and boundary and field snapshots per point.
pub fn cmd_branch(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let disc = cfg.grid.discretization();
    let modes = &cfg.branch.modes;
    let l_max = cfg.search_limit(cfg.branch.l_max, modes)?;
    let comment = format!("branches of modes {modes:?}; {}", cfg.describe(Some(&disc)));
    let mut report = RunReport::default();
    let track = match track_radial_branch(&cfg.params, &disc, 0.0, l_max, &cfg.branch.track_step) {
        Ok(t) => t,
        Err(e) => {
            report.failures.push(format!("radial track: {e}"));
            report.write(&diagram_csv(&[], &comment), out, "diagram.csv")?;
            return Ok(report);
        }
    };
    if let Some(msg) = &track.aborted {
        report.failures.push(format!("radial track: {msg}"));
    }
    let mut jobs: Vec<(&DetectedBifurcation, f64)> = Vec::new();
    for &n in modes {
        match track.detections.iter().find(|d| d.mode_estimate == n) {
            Some(d) => jobs.extend(cfg.branch.directions.iter().map(|&dir| (d, dir))),
            None => report.failures.push(format!("no detection for mode {n} below L = {l_max}")),
        }
    }
    let runs: Vec<(String, Result<Vec<BranchPoint>>)> = jobs
        .par_iter()
        .map(|&(d, dir)| {
            let id = format!("n{}{}", d.mode_estimate, if dir > 0.0 { "+" } else { "-" });
            (id.clone(), follow(cfg, d, dir, &id))
        })
        .collect();

    let mut points = track.points.clone();
    let mut stab = CsvTable::new(comment.clone(), &["point_id", "re_lambda_max"]);
    for (id, run) in runs {
        match run {
            Ok(branch) => {
                for (k, p) in branch.iter().enumerate() {
                    let point_id = format!("{id}_{k:03}");
                    if let Some(re) = p.re_lambda_max {
                        stab.push(vec![point_id.clone(), fmt_f64(re)]);
                    }
                    write_snapshot(&mut report, &p.solution, out, &point_id, &comment)?;
                }
                points.extend(branch);
            }
            Err(e) => report.failures.push(format!("branch {id}: {e}")),
        }
    }
    report.write(&diagram_csv(&points, &comment), out, "diagram.csv")?;
    report.write(&detections_csv(&track.detections, &comment), out, "detections.csv")?;
    report.write(&stab, out, "branch_stability.csv")?;
    Ok(report)
}

fn follow(cfg: &RunConfig, at: &DetectedBifurcation, direction: f64, id: &str) -> Result<Vec<BranchPoint>> {
    let switch = SwitchOptions {
        amplitude: cfg.branch.amplitude,
        newton: newton(cfg),
        ..SwitchOptions::default()
    };
    let start = BranchPoint::new(id, tangent_cone_switch(at, direction, &switch)?);
    let opts = ContinuationOptions {
        steps: cfg.branch.steps,
        step: cfg.branch.step,
        stability_every: cfg.branch.stability_every,
        newton: NewtonOptions {
            max_iter: 12,
            ..newton(cfg)
        },
        ..ContinuationOptions::default()
    };
    let run = continue_branch(&start, &opts)?;
    match run.aborted {
        Some(msg) => Err(Error::Continuation(format!("{msg} after {} points", run.points.len()))),
        None => Ok(run.points),
    }
}

fn write_snapshot(
    report: &mut RunReport,
    s: &FreeBoundarySolution,
    out: &Path,
    name: &str,
    comment: &str,
) -> Result<()> {
    let grid = s.grid()?;
    let dir = out.join("snapshots");
    let c = format!("{name} L={}; {comment}", s.params.ldl);
    report.write(&s.curve.to_csv(&c), &dir, &format!("{name}_boundary.csv"))?;
    report.write(&s.m_field.to_csv(&grid, &c), &dir, &format!("{name}_m.csv"))?;
    report.write(&s.p_field.to_csv(&grid, &c), &dir, &format!("{name}_p.csv"))?;
    Ok(())
}

/// One steady state at `steady.ldl`, started from the radial state (plus an
/// optional `cos(n theta)` perturbation of the boundary).
pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let disc = cfg.grid.discretization();
    let params = cfg.params.with_ldl(cfg.steady.ldl);
    let comment = format!("steady state; {}", cfg.describe(Some(&disc)));
    let mut report = RunReport::default();
    let solved = solve_steady(cfg, &disc).and_then(|s| {
        let spectrum = if cfg.steady.spectrum {
            Some(linearized_spectrum(&s, Restriction::Full)?)
        } else {
            None
        };
        Ok((s, spectrum))
    });
    match solved {
        Ok((s, spectrum)) => {
            write_snapshot(&mut report, &s, out, "steady", &comment)?;
            let mut summary = CsvTable::new(comment.clone(), &["L", "residual_norm", "projection", "re_lambda_max"]);
            summary.push(vec![
                fmt_f64(params.ldl),
                fmt_f64(s.residual_norm),
                fmt_f64(projection(&s.curve)),
                fmt_opt(spectrum.as_ref().map(|sp| sp.re_max())),
            ]);
            report.write(&summary, out, "steady.csv")?;
            if let Some(sp) = spectrum {
                report.write(&sp.to_csv(&comment), out, "spectrum.csv")?;
            }
        }
        Err(e) => report.failures.push(e.to_string()),
    }
    Ok(report)
}

fn solve_steady(cfg: &RunConfig, disc: &Discretization) -> Result<FreeBoundarySolution> {
    let params = cfg.params.with_ldl(cfg.steady.ldl);
    let radial = radial_solution(&params, disc)?;
    let Some(n) = cfg.steady.mode else {
        return Ok(radial);
    };
    let r0 = radial.curve.values()[0];
    let curve = BoundaryCurve::with_mode(r0, cfg.steady.amplitude, n, disc.m)?;
    let problem = radial.problem()?;
    let start = fields_for_curve(&problem, &curve)?;
    newton_solve(&start, &newton(cfg))
}
