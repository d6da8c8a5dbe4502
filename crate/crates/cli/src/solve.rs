use std::time::Instant;

use agpf_core::continuous::{solve_continuous, BoundKind, ContinuousOptions};
use agpf_core::discrete::{solve_discrete, DiscreteMode, DiscreteOptions};
use agpf_core::fading::{FadingSpec, IntensityAssignment, RingMode, StepFadingSpec};
use agpf_core::instances::{scale_instance, InstanceFile};
use agpf_core::lp::{IlluminationLp, LpStatus};
use agpf_core::verify::check_feasibility;
use agpf_core::{Error, Point64};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cpu::{cpu_budget, thread_cpu_seconds};

/// Allowed shortfall below 1 in the independent re-check.
pub const RECHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    DiscreteCircle,
    DiscreteOctagon,
    Continuous,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DiscreteCircle => "discrete-circle",
            Algorithm::DiscreteOctagon => "discrete-octagon",
            Algorithm::Continuous => "continuous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    Separation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Bound {
    Geometric,
    Lipschitz,
    Max,
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub alg: Algorithm,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_feas: Option<f64>,
    pub scale_lambda: Option<f64>,
    pub mode: Mode,
    pub bound: Bound,
    pub limit_cpu: Option<f64>,
    pub no_timing: bool,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            alg: Algorithm::DiscreteCircle,
            alpha: 1.0,
            epsilon: 0.2,
            delta: 1e-3,
            delta_feas: None,
            scale_lambda: None,
            mode: Mode::Full,
            bound: Bound::Max,
            limit_cpu: Some(120.0),
            no_timing: false,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardIntensity {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub instance: String,
    pub algorithm: String,
    pub alpha: f64,
    pub params: Map<String, Value>,
    /// `null` when no solution exists.
    pub objective: Option<f64>,
    pub intensities: Vec<GuardIntensity>,
    pub status: String,
    pub stats: Map<String, Value>,
}

impl SolutionJson {
    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.stats.get("lower_bound").and_then(Value::as_f64)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub json: SolutionJson,
    pub exit_code: i32,
    pub lp: Option<IlluminationLp>,
    pub cpu_seconds: f64,
}

/// Instance after the optional edge-length scaling.
pub fn prepared_instance(inst: &InstanceFile, scale_lambda: Option<f64>) -> Result<InstanceFile, Error> {
    match scale_lambda {
        Some(l) => scale_instance(inst, l),
        None => Ok(inst.clone()),
    }
}

fn params(cfg: &SolveConfig, step: Option<&StepFadingSpec>) -> Map<String, Value> {
    let mut p = Map::new();
    p.insert("scale_lambda".into(), json!(cfg.scale_lambda));
    match cfg.alg {
        Algorithm::Continuous => {
            p.insert("delta".into(), json!(cfg.delta));
            p.insert("delta_feas".into(), json!(cfg.delta_feas.unwrap_or(cfg.delta)));
            p.insert("bound".into(), json!(format!("{:?}", cfg.bound).to_lowercase()));
        }
        _ => {
            p.insert("epsilon".into(), json!(cfg.epsilon));
            p.insert("mode".into(), json!(format!("{:?}", cfg.mode).to_lowercase()));
            if let Some(s) = step {
                p.insert("effective_epsilon".into(), json!(s.effective_epsilon()));
                p.insert("declared_factor".into(), json!(s.declared_factor()));
            }
        }
    }
    p
}

/// Runs one solve, re-checks feasibility under the exact fading function
/// and maps the result to the JSON schema and an exit code.
pub fn run_solve(inst: &InstanceFile, cfg: &SolveConfig) -> SolveOutcome {
    let cpu0 = thread_cpu_seconds();
    let wall0 = Instant::now();
    let name = inst.name.clone().unwrap_or_else(|| "unnamed".into());
    let fail = |status: &str, code: i32, message: String, params: Map<String, Value>, guards: &[Point64]| {
        let mut stats = Map::new();
        stats.insert("message".into(), json!(message));
        SolveOutcome {
            json: SolutionJson {
                instance: name.clone(),
                algorithm: cfg.alg.name().into(),
                alpha: cfg.alpha,
                params,
                objective: None,
                intensities: guards.iter().map(|g| GuardIntensity { x: g.x, y: g.y, value: 0.0 }).collect(),
                status: status.into(),
                stats,
            },
            exit_code: code,
            lp: None,
            cpu_seconds: thread_cpu_seconds() - cpu0,
        }
    };
    let fading = match FadingSpec::new(cfg.alpha) {
        Ok(f) => f,
        Err(e) => return fail("input-error", 1, e.to_string(), params(cfg, None), &[]),
    };
    let step = match cfg.alg {
        Algorithm::Continuous => None,
        Algorithm::DiscreteCircle | Algorithm::DiscreteOctagon => {
            let ring = if cfg.alg == Algorithm::DiscreteCircle { RingMode::Circle } else { RingMode::Octagon };
            match StepFadingSpec::new(cfg.epsilon, ring, &fading) {
                Ok(s) => Some(s),
                Err(e) => return fail("input-error", 1, e.to_string(), params(cfg, None), &[]),
            }
        }
    };
    let prm = params(cfg, step.as_ref());
    let inst = match prepared_instance(inst, cfg.scale_lambda) {
        Ok(i) => i,
        Err(e) => return fail("input-error", 1, e.to_string(), prm, &[]),
    };
    let guards_q = inst.guard_candidates();
    let guards64: Vec<Point64> = guards_q.iter().map(|g| g.to_f64()).collect();
    let poly64 = inst.polygon.cast::<f64>();
    let budget = cpu_budget(cfg.limit_cpu);
    let mut stats = Map::new();

    let (x, objective, lp_status, lp, good_status) = match cfg.alg {
        Algorithm::Continuous => {
            let opts = ContinuousOptions {
                delta: cfg.delta,
                delta_feas: cfg.delta_feas,
                bound: match cfg.bound {
                    Bound::Geometric => BoundKind::Geometric,
                    Bound::Lipschitz => BoundKind::Lipschitz,
                    Bound::Max => BoundKind::Max,
                },
                budget,
                ..Default::default()
            };
            match solve_continuous(&poly64, &guards64, &fading, &opts) {
                Ok(r) => {
                    stats.insert("lower_bound".into(), json!(r.lp_objective));
                    stats.insert("lp_objective".into(), json!(r.lp_objective));
                    stats.insert("outer_iterations".into(), json!(r.outer_iterations));
                    stats.insert("iterations".into(), json!(r.outer_iterations));
                    stats.insert("witnesses".into(), json!(r.lp.row_count()));
                    stats.insert("triangles".into(), json!(r.triangles));
                    stats.insert("triangles_expanded".into(), json!(r.triangles_expanded));
                    stats.insert("deepest_subdivision".into(), json!(r.deepest));
                    stats.insert("darkest_value".into(), json!(r.darkest_value));
                    stats.insert("darkest_lower_bound".into(), json!(r.darkest_lower_bound));
                    stats.insert("repair_factor".into(), json!(r.repair_factor));
                    stats.insert("psp_capped".into(), json!(r.psp_capped));
                    let status = if r.outer_cap_hit { LpStatus::IterationLimit } else { r.solution.status };
                    (r.solution.intensities.clone(), r.solution.objective, status, r.lp, "optimal-within-delta")
                }
                Err(e) => return error_outcome(e, &fail, prm, &guards64),
            }
        }
        _ => {
            let step = step.expect("discrete algorithms carry a step spec");
            let opts = DiscreteOptions {
                mode: if cfg.mode == Mode::Full { DiscreteMode::Full } else { DiscreteMode::Separation },
                budget,
                ..Default::default()
            };
            let result = match cfg.alg {
                Algorithm::DiscreteCircle => solve_discrete(&poly64, &guards64, &fading, &step, &opts),
                _ => solve_discrete(&inst.polygon, &guards_q, &fading, &step, &opts),
            };
            match result {
                Ok(r) => {
                    stats.insert("lower_bound".into(), json!(r.lower_bound));
                    stats.insert("iterations".into(), json!(r.iterations));
                    stats.insert("witnesses".into(), json!(r.witnesses_used));
                    stats.insert("vertices".into(), json!(r.features.vertices));
                    stats.insert("edges".into(), json!(r.features.edges));
                    stats.insert("faces".into(), json!(r.features.faces));
                    stats.insert("rings".into(), json!(r.ring_counts.iter().sum::<usize>()));
                    (r.solution.intensities.clone(), r.solution.objective, r.solution.status, r.lp, "optimal")
                }
                Err(e) => return error_outcome(e, &fail, prm, &guards64),
            }
        }
    };

    let (status, mut code) = match lp_status {
        LpStatus::Optimal => (good_status, 0),
        LpStatus::Infeasible => ("infeasible", 2),
        LpStatus::IterationLimit => ("iteration-limit", 3),
        LpStatus::NumericalFailure => ("solver-failure", 1),
    };
    if code == 0 || code == 3 {
        let check = check_feasibility(&poly64, &guards64, &x, &fading, cfg.samples, cfg.seed);
        stats.insert("recheck_min_illumination".into(), json!(check.min_illumination));
        stats.insert("recheck_samples".into(), json!(check.samples));
        let passed = check.passes(RECHECK_TOL);
        stats.insert("recheck_passed".into(), json!(passed));
        if !passed && code == 0 {
            code = 1;
        }
    }
    let cpu = thread_cpu_seconds() - cpu0;
    if !cfg.no_timing {
        stats.insert("cpu_s".into(), json!(cpu));
        stats.insert("wall_s".into(), json!(wall0.elapsed().as_secs_f64()));
    }
    SolveOutcome {
        json: SolutionJson {
            instance: name,
            algorithm: cfg.alg.name().into(),
            alpha: cfg.alpha,
            params: prm,
            objective: if code == 2 { None } else { Some(objective) },
            intensities: intensities(&guards64, &x),
            status: status.into(),
            stats,
        },
        exit_code: code,
        lp: Some(lp),
        cpu_seconds: cpu,
    }
}

fn intensities(guards: &[Point64], x: &IntensityAssignment) -> Vec<GuardIntensity> {
    guards.iter().zip(x.values()).map(|(g, &v)| GuardIntensity { x: g.x, y: g.y, value: v }).collect()
}

fn error_outcome<F>(e: Error, fail: &F, prm: Map<String, Value>, guards: &[Point64]) -> SolveOutcome
where
    F: Fn(&str, i32, String, Map<String, Value>, &[Point64]) -> SolveOutcome,
{
    match e {
        Error::Infeasible(m) => fail("infeasible", 2, m, prm, guards),
        Error::Budget => fail("cpu-limit", 3, "CPU limit reached".into(), prm, guards),
        Error::Numerical(m) => fail("solver-failure", 1, m, prm, guards),
        other => fail("input-error", 1, other.to_string(), prm, guards),
    }
}
