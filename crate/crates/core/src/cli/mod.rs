//! Command-line driver: `solve`, `sweep`, `eig`, `calderon` and `converge`.
//! Every command reads an [`ExperimentConfig`] and writes CSV files (with a
//! header row) plus a `timing.txt` into the output directory.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

pub use config::{
    parse_tags, CalderonConfig, ConvergeConfig, EigConfig, EpsilonRule, ExperimentConfig, FormulationConfig,
    SceneConfig, SolveConfig, SweepConfig, SweepParameter,
};

use crate::fields::{evaluate_field, l2_error, reference_field, uniform_grid, Densities};
use crate::formulations::{build, predict_accumulation, BlockSystem, FormulationTag, OperatorBlocks};
use crate::geometry::{BoundaryMesh, Scene};
use crate::krylov::{gmres, GmresOptions, SolveReport};
use crate::spectra::{self, calderon_check, SpectrumReport};

#[derive(Debug, Parser)]
#[command(name = "transbem", version, about = "Boundary element experiments for 2D Helmholtz transmission problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Formulation tag; overrides the configured formulation(s).
    #[arg(long, global = true)]
    pub formulation: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build and solve one system; optionally evaluate the field on a grid.
    Solve,
    /// GMRES iteration counts over a range of ω or ε.
    Sweep,
    /// Eigenvalues of A and A² with clustering statistics.
    Eig,
    /// Discrete Calderon identity deviations on a single closed interface.
    Calderon,
    /// Field error against the series solution over several element counts.
    Converge,
}

/// Outcome of a command: whether every requested solve converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub all_converged: bool,
}

/// Collects stage timings for `timing.txt`.
#[derive(Debug, Default)]
struct Timer {
    lines: Vec<(String, f64)>,
}

impl Timer {
    fn time<T>(&mut self, label: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.lines.push((label.into(), t.elapsed().as_secs_f64()));
        out
    }

    fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_file(dir, "timing.txt", |w| {
            for (label, secs) in &self.lines {
                writeln!(w, "{label}: {secs:.3} s")?;
            }
            Ok(())
        })
    }
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
    f(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
    w.flush()?;
    Ok(())
}

/// Parses the command line and runs it; returns the process exit code
/// (0 iff all solves converged, 1 otherwise, 2 on errors).
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> std::process::ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return std::process::ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) if o.all_converged => std::process::ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("some solves did not converge; see the report files");
            std::process::ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let Some(config_path) = &cli.config else {
        bail!("--config is required");
    };
    let cfg = ExperimentConfig::load(config_path)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| cfg.base_dir.join(o)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let tag = cli.formulation.as_deref().map(str::parse::<FormulationTag>).transpose()?;
    let body = || run_command(cli.command, &cfg, tag, &out);
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build()?.install(body),
        None => body(),
    }
}

/// Runs one command with an already loaded configuration.
pub fn run_command(
    command: Command,
    cfg: &ExperimentConfig,
    tag: Option<FormulationTag>,
    out: &Path,
) -> anyhow::Result<Outcome> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut timer = Timer::default();
    let outcome = match command {
        Command::Solve => cmd_solve(cfg, tag, out, &mut timer),
        Command::Sweep => cmd_sweep(cfg, tag, out, &mut timer),
        Command::Eig => cmd_eig(cfg, tag, out, &mut timer),
        Command::Calderon => cmd_calderon(cfg, out, &mut timer),
        Command::Converge => cmd_converge(cfg, tag, out, &mut timer),
    }?;
    timer.write(out)?;
    Ok(outcome)
}

fn gmres_options(cfg: &ExperimentConfig) -> GmresOptions {
    GmresOptions { tol: cfg.solve.tol, max_iter: cfg.solve.max_iter }
}

fn default_tags(scene: &Scene) -> Vec<FormulationTag> {
    use FormulationTag::*;
    if scene.domains().len() == 2 && scene.interfaces().len() == 1 {
        vec![ConventionalBM, CalderonBMBeta1, CalderonBMBetaMinusAlpha]
    } else {
        vec![MultiConventional, MultiCalderonOrig, MultiCalderonMod]
    }
}

fn write_solve_row(w: &mut impl Write, label: &str, system: &BlockSystem, r: &SolveReport) -> std::io::Result<()> {
    writeln!(
        w,
        "{label},{},{},{},{},{:e},{:e}",
        system.dim(),
        r.iterations,
        r.converged,
        r.breakdown,
        r.final_residual(),
        r.true_residual
    )
}

const SOLVE_HEADER: &str = "formulation,dimension,iterations,converged,breakdown,final_residual,true_residual";

fn cmd_solve(cfg: &ExperimentConfig, tag: Option<FormulationTag>, out: &Path, timer: &mut Timer) -> anyhow::Result<Outcome> {
    let scene = cfg.scene()?;
    let kind = cfg.formulation_kind_with(tag)?;
    let mesh = BoundaryMesh::from_scene(&scene)?;
    let blocks = timer.time("assembly", || OperatorBlocks::assemble(&scene, &mesh))?;
    let system = timer.time("build", || build(kind, &scene, &mesh, &blocks))?;
    let report = timer.time("gmres", || gmres(&system, gmres_options(cfg)));
    write_file(out, "solve.csv", |w| {
        writeln!(w, "{SOLVE_HEADER}")?;
        write_solve_row(w, kind.tag.name(), &system, &report)
    })?;
    write_file(out, "residuals.csv", |w| report.write_residuals_csv(w))?;
    let densities = Densities::from_solution(&system, &mesh, &report.solution)?;
    write_file(out, "densities.csv", |w| {
        writeln!(w, "interface,element,x,y,u_re,u_im,w_re,w_im")?;
        for (i, e) in mesh.elements().iter().enumerate() {
            let (u, q) = (densities.u[i], densities.w[i]);
            writeln!(w, "{},{i},{},{},{:e},{:e},{:e},{:e}", e.interface, e.midpoint.x, e.midpoint.y, u.re, u.im, q.re, q.im)?;
        }
        Ok(())
    })?;
    if cfg.solve.field {
        let points = uniform_grid(cfg.solve.grid_points, cfg.solve.grid_half_width);
        let field = timer.time("field", || evaluate_field(&scene, &mesh, &densities, &points))?;
        write_file(out, "field.csv", |w| field.write_csv(w))?;
        if let Some(series) = cfg.oracle(&scene, cfg.converge.truncation)? {
            let reference = reference_field(&series, &points);
            let err = l2_error(&field, &reference)?;
            write_file(out, "field_error.csv", |w| {
                writeln!(w, "points,flagged,l2_error")?;
                writeln!(w, "{},{},{err:e}", field.len(), field.flagged())
            })?;
        }
    }
    Ok(Outcome { all_converged: report.converged })
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub formulation: FormulationTag,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub note: String,
}

/// Scene for one sweep value.
pub fn sweep_scene(base: &Scene, sweep: &SweepConfig, value: f64) -> Result<Scene, crate::Error> {
    Ok(match (sweep.parameter, sweep.rule) {
        (SweepParameter::Omega, _) => base.with_omega(value)?,
        (SweepParameter::Epsilon, EpsilonRule::Single) => base.with_epsilon(sweep.domain, value)?,
        (SweepParameter::Epsilon, EpsilonRule::Reciprocal) => base.with_epsilon(3, value)?.with_epsilon(2, 1.0 / value)?,
    })
}

/// Solves every formulation at every sweep value. Failures are recorded in the
/// rows; rows are sorted by value, then by formulation order.
pub fn run_sweep(
    base: &Scene,
    sweep: &SweepConfig,
    tags: &[FormulationTag],
    opts: GmresOptions,
    make_kind: impl Fn(FormulationTag) -> crate::formulations::FormulationKind + Sync,
) -> Vec<SweepRow> {
    let values = sweep.values();
    let mut rows: Vec<SweepRow> = values
        .par_iter()
        .flat_map_iter(|&value| {
            let prepared = sweep_scene(base, sweep, value).and_then(|scene| {
                let mesh = BoundaryMesh::from_scene(&scene)?;
                let blocks = OperatorBlocks::assemble(&scene, &mesh)?;
                Ok((scene, mesh, blocks))
            });
            let rows: Vec<SweepRow> = tags
                .iter()
                .map(|&tag| {
                    let solved = prepared.as_ref().map_err(|e| e.to_string()).and_then(|(scene, mesh, blocks)| {
                        build(make_kind(tag), scene, mesh, blocks).map_err(|e| e.to_string()).map(|s| gmres(&s, opts))
                    });
                    match solved {
                        Ok(r) => SweepRow {
                            value,
                            formulation: tag,
                            iterations: Some(r.iterations),
                            converged: r.converged,
                            note: String::new(),
                        },
                        Err(note) => SweepRow { value, formulation: tag, iterations: None, converged: false, note },
                    }
                })
                .collect();
            rows
        })
        .collect();
    rows.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then_with(|| {
            let pos = |t| tags.iter().position(|x| *x == t);
            pos(a.formulation).cmp(&pos(b.formulation))
        })
    });
    rows
}

/// `(max, median)` of the iteration counts of one formulation.
pub fn max_and_median(rows: &[SweepRow], tag: FormulationTag) -> Option<(usize, f64)> {
    let mut its: Vec<usize> = rows.iter().filter(|r| r.formulation == tag).filter_map(|r| r.iterations).collect();
    if its.is_empty() {
        return None;
    }
    its.sort_unstable();
    let n = its.len();
    let median = if n % 2 == 1 { its[n / 2] as f64 } else { 0.5 * (its[n / 2 - 1] + its[n / 2]) as f64 };
    Some((its[n - 1], median))
}

fn cmd_sweep(cfg: &ExperimentConfig, tag: Option<FormulationTag>, out: &Path, timer: &mut Timer) -> anyhow::Result<Outcome> {
    let base = cfg.scene()?;
    let tags = match tag {
        Some(t) => vec![t],
        None => parse_tags(&cfg.sweep.formulations, &default_tags(&base))?,
    };
    let make_kind = |t: FormulationTag| cfg.formulation_kind_with(Some(t)).expect("validated configuration");
    let rows = timer.time("sweep", || run_sweep(&base, &cfg.sweep, &tags, gmres_options(cfg), make_kind));
    let parameter = match cfg.sweep.parameter {
        SweepParameter::Omega => "omega",
        SweepParameter::Epsilon => "epsilon",
    };
    write_file(out, "sweep.csv", |w| {
        writeln!(w, "{parameter},formulation,iterations,converged,note")?;
        for r in &rows {
            let its = r.iterations.map(|i| i.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{its},{},{}", r.value, r.formulation, r.converged, r.note.replace(',', ";"))?;
        }
        Ok(())
    })?;
    write_file(out, "sweep_summary.csv", |w| {
        writeln!(w, "formulation,max_iterations,median_iterations,max_over_median")?;
        for &t in &tags {
            if let Some((max, median)) = max_and_median(&rows, t) {
                writeln!(w, "{t},{max},{median},{}", max as f64 / median)?;
            }
        }
        Ok(())
    })?;
    Ok(Outcome { all_converged: rows.iter().all(|r| r.converged) })
}

fn write_spectrum(out: &Path, name: &str, report: &SpectrumReport, truncate: f64) -> anyhow::Result<()> {
    write_file(out, &format!("{name}.csv"), |w| report.write_eigenvalues_csv(w))?;
    let truncated = SpectrumReport { eigenvalues: report.truncated(truncate), ..report.clone() };
    write_file(out, &format!("{name}_truncated.csv"), |w| truncated.write_eigenvalues_csv(w))?;
    write_file(out, &format!("{name}_clustering.csv"), |w| report.write_clustering_csv(w))
}

fn cmd_eig(cfg: &ExperimentConfig, tag: Option<FormulationTag>, out: &Path, timer: &mut Timer) -> anyhow::Result<Outcome> {
    let scene = cfg.scene()?;
    let dim = 2 * scene.total_elements();
    if dim > cfg.eig.cap {
        return Err(crate::error::SpectrumError::TooLarge { dim, cap: cfg.eig.cap }.into());
    }
    let kind = cfg.formulation_kind_with(tag)?;
    let mesh = BoundaryMesh::from_scene(&scene)?;
    let blocks = timer.time("assembly", || OperatorBlocks::assemble(&scene, &mesh))?;
    let system = build(kind, &scene, &mesh, &blocks)?;
    let prediction = match predict_accumulation(kind, &scene) {
        Ok(p) => Some(p),
        Err(crate::Error::Spectrum(crate::error::SpectrumError::UnboundedSpectrum)) => None,
        Err(e) => return Err(e.into()),
    };
    let radius = cfg.eig.radius;
    let a = timer.time("eig A", || spectra::report(format!("{} A", kind.tag), &system.matrix, None, radius))?;
    let a2 = timer.time("eig A^2", || spectra::square_and_report(&system, prediction.clone(), radius))?;
    let mut reports = vec![("eig_A", a), ("eig_A2", a2)];
    if cfg.eig.diagonal_blocks {
        let d = timer.time("eig diag(A^2)", || spectra::square_diagonal_blocks_report(&system, prediction.clone(), radius))?;
        reports.push(("eig_diag_A2", d));
    }
    for (name, r) in &reports {
        write_spectrum(out, name, r, cfg.eig.truncate)?;
    }
    write_file(out, "spectrum_summary.csv", |w| {
        writeln!(w, "matrix,dimension,spectral_radius,dominant_re,dominant_im")?;
        for (name, r) in &reports {
            let d = r.dominant().unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            writeln!(w, "{name},{},{:e},{:e},{:e}", r.eigenvalues.len(), r.spectral_radius, d.re, d.im)?;
        }
        Ok(())
    })?;
    Ok(Outcome { all_converged: true })
}

fn cmd_calderon(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> anyhow::Result<Outcome> {
    let scene = cfg.scene()?;
    if scene.interfaces().len() != 1 || !scene.interfaces()[0].shape.is_closed() {
        bail!("calderon needs a scene with one closed interface");
    }
    let mesh = BoundaryMesh::from_scene(&scene)?;
    let k = cfg.calderon.wavenumber.unwrap_or(scene.omega());
    let report = timer.time("calderon", || calderon_check(&mesh, k))?;
    write_file(out, "calderon.csv", |w| report.write_csv(w))?;
    Ok(Outcome { all_converged: true })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub elements: usize,
    pub formulation: FormulationTag,
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Field errors against the series solution for every element count and formulation.
pub fn run_converge(
    cfg: &ExperimentConfig,
    tags: &[FormulationTag],
    make_kind: impl Fn(FormulationTag) -> crate::formulations::FormulationKind,
) -> anyhow::Result<Vec<ConvergeRow>> {
    let base = cfg.scene()?;
    let Some(series) = cfg.oracle(&base, cfg.converge.truncation)? else {
        bail!("converge needs a scene with a series solution (preset `circle` or `concentric`)");
    };
    let points = uniform_grid(cfg.solve.grid_points, cfg.solve.grid_half_width);
    let reference = reference_field(&series, &points);
    let mut rows = Vec::new();
    for &n in &cfg.converge.elements {
        let scene = cfg.scene_with_elements(Some(n))?;
        let mesh = BoundaryMesh::from_scene(&scene)?;
        let blocks = OperatorBlocks::assemble(&scene, &mesh)?;
        for &t in tags {
            let system = build(make_kind(t), &scene, &mesh, &blocks)?;
            let r = gmres(&system, gmres_options(cfg));
            let densities = Densities::from_solution(&system, &mesh, &r.solution)?;
            let field = evaluate_field(&scene, &mesh, &densities, &points)?;
            rows.push(ConvergeRow {
                elements: scene.total_elements(),
                formulation: t,
                error: l2_error(&field, &reference)?,
                iterations: r.iterations,
                converged: r.converged,
            });
        }
    }
    Ok(rows)
}

fn cmd_converge(cfg: &ExperimentConfig, tag: Option<FormulationTag>, out: &Path, timer: &mut Timer) -> anyhow::Result<Outcome> {
    let base = cfg.scene()?;
    let tags = match tag {
        Some(t) => vec![t],
        None => parse_tags(&cfg.converge.formulations, &default_tags(&base))?,
    };
    let make_kind = |t: FormulationTag| cfg.formulation_kind_with(Some(t)).expect("validated configuration");
    let rows = timer.time("converge", || run_converge(cfg, &tags, make_kind))?;
    write_file(out, "converge.csv", |w| {
        writeln!(w, "elements,formulation,error,iterations,converged")?;
        for r in &rows {
            writeln!(w, "{},{},{:e},{},{}", r.elements, r.formulation, r.error, r.iterations, r.converged)?;
        }
        Ok(())
    })?;
    write_file(out, "slope.csv", |w| {
        writeln!(w, "formulation,slope")?;
        for &t in &tags {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.formulation == t).map(|r| (r.elements as f64, r.error)).unzip();
            if xs.len() >= 2 {
                writeln!(w, "{t},{}", loglog_slope(&xs, &ys))?;
            }
        }
        Ok(())
    })?;
    Ok(Outcome { all_converged: rows.iter().all(|r| r.converged) })
}
