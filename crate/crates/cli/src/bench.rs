//! Benchmark matrix: every instance under every fading exponent, scaling
//! and algorithm configuration, summarised as success rates, median
//! relative objectives and median relative CPU times.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use agpf_core::instances::{generate_comb, generate_convex, generate_spike, InstanceFile, SPIKE_BEND};
use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::solve::{run_solve, Algorithm, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub alg: Algorithm,
    /// `epsilon` for the discrete algorithms, `delta` for continuous.
    pub param: f64,
}

impl BenchConfig {
    pub fn label(&self) -> String {
        let p = if self.alg == Algorithm::Continuous { "delta" } else { "eps" };
        format!("{} {p}={}", self.alg.name(), self.param)
    }
}

/// Two discrete ring shapes at three step widths plus the continuous
/// solver at three tolerances.
pub fn default_configs() -> Vec<BenchConfig> {
    let mut v = Vec::new();
    for alg in [Algorithm::DiscreteCircle, Algorithm::DiscreteOctagon] {
        for eps in [0.2, 0.6, 1.0] {
            v.push(BenchConfig { alg, param: eps });
        }
    }
    for delta in [0.01, 0.001, 0.0001] {
        v.push(BenchConfig { alg: Algorithm::Continuous, param: delta });
    }
    v
}

fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_lambdas() -> Vec<f64> {
    vec![0.2, 0.5, 1.0, 2.0]
}

fn default_limit() -> f64 {
    120.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchMatrix {
    /// File paths, relative to the matrix file, or generator specs
    /// `gen:convex:<n>:<radius>`, `gen:comb:<teeth>`, `gen:spike:<s>`.
    pub instances: Vec<String>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_configs")]
    pub configs: Vec<BenchConfig>,
    #[serde(default = "default_limit")]
    pub limit_cpu: f64,
    /// Advisory only; not enforced.
    #[serde(default)]
    pub memory_mb: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

impl BenchMatrix {
    pub fn load(path: &Path) -> anyhow::Result<(Self, Vec<InstanceFile>)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: BenchMatrix = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let insts = m.instances.iter().map(|s| load_instance(s, &base)).collect::<anyhow::Result<Vec<_>>>()?;
        Ok((m, insts))
    }
}

pub fn load_instance(spec: &str, base: &Path) -> anyhow::Result<InstanceFile> {
    if let Some(rest) = spec.strip_prefix("gen:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let num = |i: usize| -> anyhow::Result<f64> {
            parts.get(i).ok_or_else(|| anyhow!("generator '{spec}' is missing argument {i}"))?.parse::<f64>().map_err(|e| anyhow!("generator '{spec}': {e}"))
        };
        let inst = match parts[0] {
            "convex" => generate_convex(num(1)? as usize, num(2)?)?,
            "comb" => generate_comb(num(1)? as usize)?,
            "spike" => generate_spike(num(1)?, if parts.len() > 2 { num(2)? } else { SPIKE_BEND })?,
            other => bail!("unknown generator '{other}'"),
        };
        return Ok(inst);
    }
    let path: PathBuf = base.join(spec);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = InstanceFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if inst.name.is_none() {
        inst.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub alg: String,
    pub alpha: f64,
    pub lambda: f64,
    pub param: f64,
    pub status: String,
    /// Infinite for failed runs.
    pub objective: f64,
    pub lower_bound: f64,
    pub cpu_s: f64,
    pub witnesses: usize,
    pub iterations: usize,
    pub config: usize,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.objective.is_finite()
    }
}

/// Runs the full cross product, `jobs` runs at a time.
pub fn run_matrix(m: &BenchMatrix, insts: &[InstanceFile], jobs: usize) -> anyhow::Result<Vec<RunRecord>> {
    let mut cells = Vec::new();
    for (i, _) in insts.iter().enumerate() {
        for &alpha in &m.alphas {
            for &lambda in &m.lambdas {
                for (c, _) in m.configs.iter().enumerate() {
                    cells.push((i, alpha, lambda, c));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let records = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, alpha, lambda, c)| run_cell(m, &insts[i], alpha, lambda, c))
            .collect::<Vec<_>>()
    });
    Ok(records)
}

fn run_cell(m: &BenchMatrix, inst: &InstanceFile, alpha: f64, lambda: f64, c: usize) -> RunRecord {
    let conf = &m.configs[c];
    let mut cfg = SolveConfig {
        alg: conf.alg,
        alpha,
        scale_lambda: Some(lambda),
        limit_cpu: Some(m.limit_cpu),
        no_timing: true,
        ..Default::default()
    };
    if let Some(s) = m.samples {
        cfg.samples = s;
    }
    if conf.alg == Algorithm::Continuous {
        cfg.delta = conf.param;
    } else {
        cfg.epsilon = conf.param;
    }
    let out = run_solve(inst, &cfg);
    let ok = out.exit_code == 0;
    let j = &out.json;
    let stat = |k: &str| j.stats.get(k).and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    RunRecord {
        instance: j.instance.clone(),
        alg: j.algorithm.clone(),
        alpha,
        lambda,
        param: conf.param,
        status: j.status.clone(),
        objective: if ok { j.objective.unwrap_or(f64::INFINITY) } else { f64::INFINITY },
        lower_bound: j.lower_bound().unwrap_or(f64::NAN),
        cpu_s: if ok { out.cpu_seconds } else { f64::INFINITY },
        witnesses: stat("witnesses"),
        iterations: stat("iterations"),
        config: c,
    }
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

pub fn to_csv(records: &[RunRecord]) -> String {
    let mut s = String::from("instance,alg,alpha,lambda,param,status,objective,lower_bound,cpu_s,witnesses,iterations\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.alg,
            r.alpha,
            r.lambda,
            r.param,
            r.status,
            num(r.objective),
            num(r.lower_bound),
            num(r.cpu_s),
            r.witnesses,
            r.iterations
        );
    }
    s
}

/// Median with infinities sorted last; the mean of the middle pair for
/// even counts.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a.is_infinite() || b.is_infinite() {
            f64::INFINITY
        } else {
            (a + b) / 2.0
        }
    }
}

/// Table cell values indexed `[config][(alpha, lambda) column]`.
#[derive(Clone, Debug)]
pub struct Tables {
    pub columns: Vec<(f64, f64)>,
    pub rows: Vec<String>,
    pub success: Vec<Vec<f64>>,
    pub rel_objective: Vec<Vec<f64>>,
    pub rel_time: Vec<Vec<f64>>,
}

pub fn tables(m: &BenchMatrix, records: &[RunRecord]) -> Tables {
    let columns: Vec<(f64, f64)> =
        m.alphas.iter().flat_map(|&a| m.lambdas.iter().map(move |&l| (a, l))).collect();
    let rows: Vec<String> = m.configs.iter().map(BenchConfig::label).collect();
    let group = |r: &RunRecord| (r.instance.clone(), r.alpha.to_bits(), r.lambda.to_bits());
    let best = |r: &RunRecord, f: fn(&RunRecord) -> f64| {
        records.iter().filter(|o| group(o) == group(r)).map(f).fold(f64::INFINITY, f64::min)
    };
    let nc = columns.len();
    let mut success = vec![vec![f64::NAN; nc]; rows.len()];
    let mut rel_objective = success.clone();
    let mut rel_time = success.clone();
    for (ci, _) in m.configs.iter().enumerate() {
        for (k, &(a, l)) in columns.iter().enumerate() {
            let cell: Vec<&RunRecord> =
                records.iter().filter(|r| r.config == ci && r.alpha == a && r.lambda == l).collect();
            if cell.is_empty() {
                continue;
            }
            success[ci][k] = 100.0 * cell.iter().filter(|r| r.succeeded()).count() as f64 / cell.len() as f64;
            let mut objs: Vec<f64> = cell.iter().map(|r| r.objective / best(r, |o| o.objective)).collect();
            // Floor on the fastest time keeps ratios finite for instant runs.
            let mut times: Vec<f64> =
                cell.iter().map(|r| r.cpu_s.max(1e-3) / best(r, |o| o.cpu_s).max(1e-3)).collect();
            rel_objective[ci][k] = median(&mut objs);
            rel_time[ci][k] = median(&mut times);
        }
    }
    Tables { columns, rows, success, rel_objective, rel_time }
}

fn markdown_table(title: &str, t: &Tables, data: &[Vec<f64>], digits: usize) -> String {
    let mut s = format!("### {title}\n\n| configuration |");
    for (a, l) in &t.columns {
        let _ = write!(s, " a={a} L={l} |");
    }
    s.push_str("\n|---|");
    for _ in &t.columns {
        s.push_str("---:|");
    }
    s.push('\n');
    for (row, vals) in t.rows.iter().zip(data) {
        let _ = write!(s, "| {row} |");
        for v in vals {
            if v.is_finite() {
                let _ = write!(s, " {v:.digits$} |");
            } else {
                let _ = write!(s, " {} |", num(*v));
            }
        }
        s.push('\n');
    }
    s.push('\n');
    s
}

pub fn to_markdown(t: &Tables) -> String {
    let mut s = String::new();
    s.push_str(&markdown_table("Success rate (%)", t, &t.success, 0));
    s.push_str(&markdown_table("Median objective relative to the best configuration", t, &t.rel_objective, 3));
    s.push_str(&markdown_table("Median CPU time relative to the fastest configuration", t, &t.rel_time, 2));
    s
}
