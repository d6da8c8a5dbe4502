use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agpf_cli::bench::{run_matrix, tables, to_csv, to_markdown, BenchMatrix};
use agpf_cli::render::render_svg;
use agpf_cli::solve::{prepared_instance, Bound, Mode};
use agpf_cli::{run_solve, Algorithm, SolutionJson, SolveConfig};
use agpf_core::fading::{FadingSpec, IntensityAssignment};
use agpf_core::instances::{generate_comb, generate_convex, generate_spike, InstanceFile, SPIKE_BEND};
use agpf_core::Point64;
use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agpf", version, about = "Minimum-intensity illumination of polygons with distance fading")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print the solution JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "continuous")]
        alg: Algorithm,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// Separate tolerance for the feasibility stopping test; defaults to --delta.
        #[arg(long)]
        delta_feas: Option<f64>,
        #[arg(long)]
        scale_lambda: Option<f64>,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "max")]
        bound: Bound,
        /// CPU seconds; 0 disables the limit.
        #[arg(long, default_value_t = 120.0)]
        limit_cpu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a coverage heatmap.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random points for the feasibility re-check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write the final LP in CPLEX LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
    /// Render a solution as an SVG coverage heatmap.
    Render {
        solution: PathBuf,
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        size: usize,
    },
    /// Run a benchmark matrix and emit CSV plus Markdown tables.
    Bench {
        matrix: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory for results.csv and tables.md; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Spike {
        length: f64,
        #[arg(long, default_value_t = SPIKE_BEND)]
        bend: f64,
    },
    Convex {
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    Comb {
        teeth: usize,
    },
}

fn read_instance(path: &Path) -> anyhow::Result<InstanceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = InstanceFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if inst.name.is_none() {
        inst.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(inst)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn svg_for(sol: &SolutionJson, inst: &InstanceFile, size: usize) -> anyhow::Result<String> {
    let lambda = sol.params.get("scale_lambda").and_then(|v| v.as_f64());
    let inst = prepared_instance(inst, lambda)?;
    let guards: Vec<Point64> = inst.guard_candidates().iter().map(|g| g.to_f64()).collect();
    if guards.len() != sol.intensities.len() {
        bail!("solution has {} guards but the instance has {}", sol.intensities.len(), guards.len());
    }
    for (g, s) in guards.iter().zip(&sol.intensities) {
        let tol = 1e-9 * (1.0 + g.x.abs().max(g.y.abs()));
        if (g.x - s.x).abs() > tol || (g.y - s.y).abs() > tol {
            bail!("guard ({}, {}) in the solution does not match instance guard ({}, {})", s.x, s.y, g.x, g.y);
        }
    }
    let x = IntensityAssignment::new(sol.intensities.iter().map(|s| s.value).collect())?;
    let fading = FadingSpec::new(sol.alpha)?;
    Ok(render_svg(&inst.polygon.cast(), &guards, &x, &fading, size))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Solve {
            instance,
            alg,
            alpha,
            epsilon,
            delta,
            delta_feas,
            scale_lambda,
            mode,
            bound,
            limit_cpu,
            out,
            svg,
            no_timing,
            seed,
            samples,
            export_lp,
        } => {
            let inst = read_instance(&instance)?;
            let cfg = SolveConfig {
                alg,
                alpha,
                epsilon,
                delta,
                delta_feas,
                scale_lambda,
                mode,
                bound,
                limit_cpu: (limit_cpu > 0.0).then_some(limit_cpu),
                no_timing,
                samples,
                seed,
            };
            let outcome = run_solve(&inst, &cfg);
            emit(out.as_deref(), &outcome.json.to_pretty())?;
            if let (Some(p), Some(lp)) = (export_lp, &outcome.lp) {
                std::fs::write(&p, lp.to_lp_format()).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = svg {
                std::fs::write(&p, svg_for(&outcome.json, &inst, 400)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(outcome.exit_code as u8)
        }
        Cmd::Render { solution, instance, out, size } => {
            let text = std::fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let sol: SolutionJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", solution.display()))?;
            let inst = read_instance(&instance)?;
            emit(out.as_deref(), &svg_for(&sol, &inst, size)?)?;
            Ok(0)
        }
        Cmd::Bench { matrix, jobs, out } => {
            let (m, insts) = BenchMatrix::load(&matrix)?;
            let records = run_matrix(&m, &insts, jobs)?;
            let csv = to_csv(&records);
            let md = to_markdown(&tables(&m, &records));
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("results.csv"), csv)?;
                    std::fs::write(dir.join("tables.md"), md)?;
                }
                None => print!("{csv}\n{md}"),
            }
            Ok(0)
        }
        Cmd::Generate { kind, out } => {
            let inst = match kind {
                GenKind::Spike { length, bend } => generate_spike(length, bend)?,
                GenKind::Convex { n, radius } => generate_convex(n, radius)?,
                GenKind::Comb { teeth } => generate_comb(teeth)?,
            };
            emit(out.as_deref(), &inst.serialize())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
