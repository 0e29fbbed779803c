use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::{PartialConfig, RunConfig};
use super::pipeline::{eigen_study, geometry_study, source_study, EigenRow, Problem};
use crate::analyze::ConvergenceTable;
use crate::error::{Error, Result};
use crate::geometry::reconstruct_patches;
use crate::meshgen::{write_off, write_xyz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Reconstruct,
    Solve,
    Eigen,
    Convergence,
}

/// Run settings shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: PartialConfig,
}

/// Exit status for an error: 2 configuration, 3 geometry, 4 solver.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::NotPositiveDefinite
        | Error::SolverStagnation { .. }
        | Error::SolveResidual { .. }
        | Error::MultiplicityMismatch(..) => 4,
        _ => 3,
    }
}

/// Merge the config file (if any) under the flags and validate.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => PartialConfig::read(p)?,
        None => PartialConfig::default(),
    };
    args.settings.clone().over(file).resolve()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

#[derive(serde::Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: CommandKind,
    config: &'a RunConfig,
    resolved_beta: f64,
    resolved_m: usize,
}

fn write_manifest(cmd: CommandKind, cfg: &RunConfig) -> Result<()> {
    let path = cfg.out.join("run_manifest.json");
    let opts = cfg.experiment();
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cmd,
        config: cfg,
        resolved_beta: cfg.beta(),
        resolved_m: opts.reconstruction.fit.point_count(cfg.k),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_err(&path, e))?;
    write_text(&path, &(text + "\n"))
}

/// One line per level, one column per table: `level N_v h err1 err2 ...`.
fn write_dat(tables: &[ConvergenceTable], path: &Path) -> Result<()> {
    let mut s = String::from("# level N_v h");
    for t in tables {
        s.push(' ');
        s.push_str(&t.metric);
    }
    s.push('\n');
    if let Some(first) = tables.first() {
        for (i, r) in first.rows.iter().enumerate() {
            s.push_str(&format!("{} {} {:.6e}", r.level, r.n_vertices, r.h));
            for t in tables {
                s.push_str(&format!(" {:.6e}", t.rows[i].error));
            }
            s.push('\n');
        }
    }
    write_text(path, &s)
}

fn write_tables(cfg: &RunConfig, name: &str, tables: &[ConvergenceTable]) -> Result<()> {
    ConvergenceTable::write_csv(tables, &cfg.out.join(format!("{name}.csv")))?;
    if cfg.dat {
        write_dat(tables, &cfg.out.join(format!("{name}.dat")))?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$e}")).unwrap_or_default()
}

pub fn write_eigen_csv(rows: &[EigenRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "level",
        "N_v",
        "dofs",
        "index",
        "eigenvalue",
        "error",
        "order",
        "l2_error",
    ])
    .map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            r.n_vertices.to_string(),
            r.dofs.to_string(),
            r.index.to_string(),
            format!("{:.12e}", r.eigenvalue),
            fmt_opt(r.error, 6),
            r.order.map(|o| format!("{o:.4}")).unwrap_or_default(),
            fmt_opt(r.function_l2, 6),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn reconstruct(cfg: &RunConfig, problem: &Problem) -> Result<()> {
    let opts = cfg.experiment();
    if problem.surface.is_some() {
        return write_tables(cfg, "geo_errors", &geometry_study(problem, &opts)?);
    }
    // no exact surface: write the reference meshes and reconstructed nodes instead
    for (level, mesh) in problem.levels(opts.levels, opts.knn)?.iter().enumerate() {
        let patches = reconstruct_patches(mesh, &problem.cloud, opts.k, &opts.reconstruction)?;
        write_off(&cfg.out.join(format!("mesh_level{level}.off")), mesh)?;
        let nodes: Vec<_> = patches.iter().flat_map(|p| p.nodes().iter().copied()).collect();
        write_xyz(&cfg.out.join(format!("patch_nodes_level{level}.xyz")), &nodes)?;
    }
    Ok(())
}

fn solve(cfg: &RunConfig, problem: &Problem) -> Result<()> {
    if problem.surface.is_none() {
        return Err(Error::InvalidArgument(
            "solve needs a synthetic surface with a manufactured solution".into(),
        ));
    }
    let (tables, solved) = source_study(problem, &cfg.experiment())?;
    write_tables(cfg, "solution_errors", &tables)?;
    if cfg.dump {
        for s in &solved {
            let path = cfg.out.join(format!("solution_level{}.txt", s.level));
            let mut text = String::with_capacity(24 * s.coefficients.len());
            for c in &s.coefficients {
                text.push_str(&format!("{c:.17e}\n"));
            }
            write_text(&path, &text)?;
        }
    }
    Ok(())
}

fn eigen(cfg: &RunConfig, problem: &Problem) -> Result<()> {
    let rows = eigen_study(problem, &cfg.experiment(), cfg.count)?;
    write_eigen_csv(&rows, &cfg.out.join("eigen_errors.csv"))?;
    if cfg.dat {
        let path = cfg.out.join("eigen_errors.dat");
        let mut s = String::from("# level N_v index eigenvalue error\n");
        for r in &rows {
            s.push_str(&format!(
                "{} {} {} {:.12e} {}\n",
                r.level,
                r.n_vertices,
                r.index,
                r.eigenvalue,
                fmt_opt(r.error, 6)
            ));
        }
        write_text(&path, &s)?;
    }
    Ok(())
}

/// Execute one subcommand with a resolved configuration.
pub fn run_command(cmd: CommandKind, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    write_manifest(cmd, cfg)?;
    let problem = Problem::new(&cfg.surface_choice())?;
    match cmd {
        CommandKind::Reconstruct => reconstruct(cfg, &problem),
        CommandKind::Solve => solve(cfg, &problem),
        CommandKind::Eigen => eigen(cfg, &problem),
        CommandKind::Convergence => {
            reconstruct(cfg, &problem)?;
            if problem.surface.is_some() {
                solve(cfg, &problem)?;
            }
            eigen(cfg, &problem)
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Invocation::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let (cmd, common) = match parsed.command {
        Sub::Reconstruct(c) => (CommandKind::Reconstruct, c),
        Sub::Solve(c) => (CommandKind::Solve, c),
        Sub::Eigen(c) => (CommandKind::Eigen, c),
        Sub::Convergence(c) => (CommandKind::Convergence, c),
    };
    let result = resolve_config(&common).and_then(|cfg| run_command(cmd, &cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pcdg",
    version,
    about = "Laplace-Beltrami DG solvers on point-cloud surfaces"
)]
struct Invocation {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Reconstruct patches and tabulate geometric errors.
    Reconstruct(CommonArgs),
    /// Solve the manufactured source problem and tabulate its errors.
    Solve(CommonArgs),
    /// Compute the smallest eigenpairs and tabulate their errors.
    Eigen(CommonArgs),
    /// All of the above.
    Convergence(CommonArgs),
}
