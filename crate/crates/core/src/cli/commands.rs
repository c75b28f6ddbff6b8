use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::*;
use crate::control_network::{admin_loop, minimize_acr, minimize_pdi_over_laplacian, AdminConfig, AdminTrace};
use crate::control_opinion::{check_bounds, minimize_pdi_shift, AttackPlan, BoundReport};
use crate::dynamics::{equilibrium, fj_iterate};
use crate::graph::{parse_edge_list, power_law_graph, random_graph, two_community_graph, Graph};
use crate::io::{parse_opinions, to_json, write_opinions, write_trajectory, SCHEMA_VERSION};
use crate::metrics::{acr, metrics_from_internal};
use crate::numkit::ProjectedGradientConfig;
use crate::rng;

/// Files a command produced, the first being what goes to stdout.
struct Run {
    command: &'static str,
    inputs: BTreeMap<String, String>,
    params: BTreeMap<String, Value>,
    files: Vec<(String, String)>,
}

impl Run {
    fn new(command: &'static str) -> Self {
        Run {
            command,
            inputs: BTreeMap::new(),
            params: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    fn input(mut self, name: &str, path: &Path) -> Self {
        self.inputs.insert(name.into(), path.display().to_string());
        self
    }

    fn param(mut self, name: &str, value: Value) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    fn file(&mut self, name: &str, content: String) {
        self.files.push((name.into(), content));
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: &'static str,
    command: &'a str,
    tool_version: &'static str,
    seed: u64,
    inputs: &'a BTreeMap<String, String>,
    params: &'a BTreeMap<String, Value>,
    /// Relative to the output directory.
    outputs: Vec<&'a str>,
}

fn read(path: &Path) -> std::result::Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_graph(path: &Path) -> std::result::Result<Graph, CliError> {
    parse_edge_list(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn load_opinions(path: &Path) -> std::result::Result<Vec<f64>, CliError> {
    parse_opinions(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn load_inputs(inputs: &Inputs) -> std::result::Result<(Graph, Vec<f64>), CliError> {
    let g = load_graph(&inputs.graph)?;
    let s = load_opinions(&inputs.opinions)?;
    if g.n() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: s.len(),
        }
        .into());
    }
    Ok((g, s))
}

fn solver_config(a: &SolverArgs) -> ProjectedGradientConfig {
    ProjectedGradientConfig {
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        ..Default::default()
    }
}

fn versioned<T: Serialize>(body: &T) -> Value {
    let mut v = serde_json::to_value(body).expect("serializable");
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    v
}

pub(super) fn execute(cli: &Cli) -> std::result::Result<(), CliError> {
    let run = match &cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Metrics(a) => metrics(a)?,
        Command::DemoEcho => demo_echo()?,
        Command::Admin(a) => admin(a)?,
        Command::Attack(a) => attack(a)?,
        Command::Optimize(c) => optimize(c)?,
        Command::Generate(c) => generate(c, cli.seed)?,
    };
    emit(&run, cli.seed, cli.out.as_deref())
}

fn emit(run: &Run, seed: u64, out: Option<&Path>) -> std::result::Result<(), CliError> {
    let Some(dir) = out else {
        print!("{}", run.files[0].1);
        return Ok(());
    };
    let write = |name: &str, content: &str| {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::Write {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Write {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    for (name, content) in &run.files {
        write(name, content)?;
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: run.command,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed,
        inputs: &run.inputs,
        params: &run.params,
        outputs: run.files.iter().map(|(n, _)| n.as_str()).collect(),
    };
    write("manifest.json", &to_json(&manifest))
}

fn simulate(a: &SimulateArgs) -> std::result::Result<Run, CliError> {
    let (g, s) = load_inputs(&a.inputs)?;
    let z = equilibrium(&g, &s)?;
    let mut run = Run::new("simulate")
        .input("graph", &a.inputs.graph)
        .input("opinions", &a.inputs.opinions)
        .param("tol", json!(a.tol))
        .param("max_iter", json!(a.max_iter))
        .param("trajectory", json!(a.trajectory));
    run.file("equilibrium.csv", write_opinions(&z));
    if a.trajectory {
        let t = fj_iterate(&g, &s, &s, a.tol, a.max_iter)?;
        if !t.converged {
            eprintln!(
                "warning: trajectory stopped after {} steps with change {:e}",
                t.iterations, t.residual
            );
        }
        run.file("trajectory.csv", write_trajectory(&t));
    }
    Ok(run)
}

fn metrics(a: &MetricsArgs) -> std::result::Result<Run, CliError> {
    let (g, s) = load_inputs(&a.inputs)?;
    let reports = a
        .route
        .routes()
        .into_iter()
        .map(|r| metrics_from_internal(&g, &s, a.mu, r))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut body = json!({ "n": g.n(), "reports": reports });
    if a.acr {
        body["acr"] = json!({
            "polarization": acr(&g, MetricMatrixKind::Polarization)?,
            "disagreement": acr(&g, MetricMatrixKind::Disagreement)?,
            "pdi": acr(&g, MetricMatrixKind::Pdi)?,
        });
    }
    let mut run = Run::new("metrics")
        .input("graph", &a.inputs.graph)
        .input("opinions", &a.inputs.opinions)
        .param("mu", json!(a.mu))
        .param("route", json!(format!("{:?}", a.route)))
        .param("acr", json!(a.acr));
    run.file("metrics.json", to_json(&versioned(&body)));
    Ok(run)
}

fn demo_echo() -> std::result::Result<Run, CliError> {
    let demo = crate::demo::echo_demo()?;
    let mut run = Run::new("demo-echo");
    run.file("echo.json", to_json(&versioned(&demo)));
    if !(demo.echo_more_polarized && demo.echo_less_disagreement) {
        return Err(CliError::Check(
            "like-minded network should be more polarized and disagree less".into(),
        ));
    }
    Ok(run)
}

fn admin(a: &AdminArgs) -> std::result::Result<Run, CliError> {
    let (g, s) = load_inputs(&a.inputs)?;
    if a.jobs == 0 {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Check(e.to_string()))?;
    let traces: Vec<AdminTrace> = pool.install(|| {
        a.epsilon
            .par_iter()
            .map(|&eps| {
                let cfg = AdminConfig {
                    epsilon: eps,
                    rounds: a.rounds,
                    ..Default::default()
                };
                admin_loop(&g, &s, &cfg)
            })
            .collect::<crate::Result<Vec<_>>>()
    })?;

    let mut csv = String::from("round,epsilon,polarization,disagreement\n");
    let mut jsonl = String::new();
    let mut finals = String::from("epsilon,rounds,converged,polarization,disagreement\n");
    for t in &traces {
        for r in &t.rounds {
            csv.push_str(&format!("{},{},{},{}\n", r.round, r.epsilon, r.polarization, r.disagreement));
            let record = json!({
                "schema_version": SCHEMA_VERSION,
                "epsilon": r.epsilon,
                "round": r.round,
                "polarization": r.polarization,
                "disagreement": r.disagreement,
                "adjusted_disagreement": r.adjusted_disagreement,
                "weight_change": r.weight_change,
                "z": r.z,
            });
            jsonl.push_str(&serde_json::to_string(&record).expect("serializable"));
            jsonl.push('\n');
        }
        finals.push_str(&format!(
            "{},{},{},{},{}\n",
            t.epsilon,
            t.rounds.len(),
            t.converged,
            t.final_polarization,
            t.final_disagreement
        ));
    }
    let mut run = Run::new("admin")
        .input("graph", &a.inputs.graph)
        .input("opinions", &a.inputs.opinions)
        .param("epsilon", json!(a.epsilon))
        .param("rounds", json!(a.rounds));
    run.file("admin.csv", csv);
    run.file("admin.jsonl", jsonl);
    run.file("admin_final.csv", finals);
    for (idx, t) in traces.iter().enumerate() {
        run.file(&format!("admin_graph_{idx}.edges"), t.final_graph.to_edge_list());
    }
    Ok(run)
}

#[derive(Serialize)]
struct PlanEntry {
    algorithm: &'static str,
    plan: AttackPlan,
    bounds: BoundReport,
}

fn attack(a: &AttackArgs) -> std::result::Result<Run, CliError> {
    let (g, s) = load_inputs(&a.inputs)?;
    let kind: AttackObjective = a.objective.into();
    let mut plans = Vec::new();
    let mut skipped = Vec::new();
    let mut curve = String::from("algorithm,k,objective\n");
    for alg in a.algorithm.algorithms() {
        let plan = match alg.run(&g, &s, a.k, kind) {
            Err(Error::TooLarge(_)) if a.algorithm == AlgorithmArg::All => {
                skipped.push(alg.name());
                continue;
            }
            other => other?,
        };
        let bounds = check_bounds(&plan, &g, &s)?;
        if alg == AttackAlgorithm::BruteForce {
            for k in 0..=a.k {
                let p = if k == a.k { plan.clone() } else { alg.run(&g, &s, k, kind)? };
                curve.push_str(&format!("{},{},{}\n", alg.name(), k, p.objective));
            }
        } else {
            // Greedy and heuristic choices do not depend on the budget, so
            // the trace of the largest run gives every smaller budget.
            curve.push_str(&format!("{},0,{}\n", alg.name(), plan.baseline));
            for (i, v) in plan.objective_trace.iter().enumerate() {
                curve.push_str(&format!("{},{},{}\n", alg.name(), i + 1, v));
            }
        }
        plans.push(PlanEntry {
            algorithm: alg.name(),
            plan,
            bounds,
        });
    }
    let body = json!({
        "n": g.n(),
        "k": a.k,
        "objective": kind,
        "plans": plans,
        "skipped": skipped,
    });
    let mut run = Run::new("attack")
        .input("graph", &a.inputs.graph)
        .input("opinions", &a.inputs.opinions)
        .param("k", json!(a.k))
        .param("objective", json!(kind))
        .param("algorithm", json!(format!("{:?}", a.algorithm)));
    run.file("attack.json", to_json(&versioned(&body)));
    run.file("curve.csv", curve);
    Ok(run)
}

fn optimize(c: &OptimizeCommand) -> std::result::Result<Run, CliError> {
    match c {
        OptimizeCommand::PdiLaplacian { opinions, m, solver } => {
            let s = load_opinions(opinions)?;
            let sol = minimize_pdi_over_laplacian(&s, *m, &solver_config(solver))?;
            let body = json!({ "problem": "pdi_laplacian", "m": m, "solution": sol });
            let mut run = Run::new("optimize pdi-laplacian")
                .input("opinions", opinions)
                .param("m", json!(m))
                .param("max_iters", json!(solver.max_iters))
                .param("grad_tol", json!(solver.grad_tol));
            run.file("report.json", to_json(&versioned(&body)));
            run.file("graph.edges", sol.graph.to_edge_list());
            Ok(run)
        }
        OptimizeCommand::Acr { graph, kind, k, solver } => {
            let g = load_graph(graph)?;
            let kind: MetricMatrixKind = (*kind).into();
            let sol = minimize_acr(&g, kind, *k, &solver_config(solver))?;
            let body = json!({ "problem": "acr", "kind": kind, "k": k, "solution": sol });
            let mut run = Run::new("optimize acr")
                .input("graph", graph)
                .param("kind", json!(kind))
                .param("k", json!(k))
                .param("max_iters", json!(solver.max_iters))
                .param("grad_tol", json!(solver.grad_tol));
            run.file("report.json", to_json(&versioned(&body)));
            run.file("graph.edges", sol.graph.to_edge_list());
            Ok(run)
        }
        OptimizeCommand::Shift { inputs, alpha, solver } => {
            let (g, s) = load_inputs(inputs)?;
            let sol = minimize_pdi_shift(&g, &s, *alpha, &solver_config(solver))?;
            let body = json!({ "problem": "shift", "alpha": alpha, "solution": sol });
            let mut run = Run::new("optimize shift")
                .input("graph", &inputs.graph)
                .input("opinions", &inputs.opinions)
                .param("alpha", json!(alpha))
                .param("max_iters", json!(solver.max_iters))
                .param("grad_tol", json!(solver.grad_tol));
            run.file("report.json", to_json(&versioned(&body)));
            run.file("opinions.csv", write_opinions(&sol.s_new));
            run.file("shift.csv", write_opinions(&sol.d));
            Ok(run)
        }
    }
}

fn generate(c: &GenerateCommand, seed: u64) -> std::result::Result<Run, CliError> {
    match c {
        GenerateCommand::Graph {
            model,
            n,
            p,
            p_in,
            p_out,
            attach,
            wlo,
            whi,
        } => {
            let g = match model {
                GraphModel::Random => random_graph(*n, *p, *wlo, *whi, seed)?,
                GraphModel::TwoCommunity => two_community_graph(*n, *p_in, *p_out, *wlo, *whi, seed)?,
                GraphModel::PowerLaw => power_law_graph(*n, *attach, seed)?,
            };
            let mut run = Run::new("generate graph")
                .param("model", json!(format!("{model:?}")))
                .param("n", json!(n));
            run = match model {
                GraphModel::Random => run.param("p", json!(p)).param("wlo", json!(wlo)).param("whi", json!(whi)),
                GraphModel::TwoCommunity => run
                    .param("p_in", json!(p_in))
                    .param("p_out", json!(p_out))
                    .param("wlo", json!(wlo))
                    .param("whi", json!(whi)),
                GraphModel::PowerLaw => run.param("attach", json!(attach)),
            };
            run.file("graph.edges", g.to_edge_list());
            Ok(run)
        }
        GenerateCommand::Opinions { dist, n, shape, split } => {
            let s = match dist {
                OpinionDist::Uniform => rng::uniform_opinions(*n, seed),
                OpinionDist::PowerLaw => rng::power_law_opinions(*n, *shape, seed),
                OpinionDist::TwoCamp => rng::two_camp_opinions(*n, *split, seed),
            };
            let mut run = Run::new("generate opinions")
                .param("dist", json!(format!("{dist:?}")))
                .param("n", json!(n));
            run = match dist {
                OpinionDist::PowerLaw => run.param("shape", json!(shape)),
                OpinionDist::TwoCamp => run.param("split", json!(split)),
                OpinionDist::Uniform => run,
            };
            run.file("opinions.csv", write_opinions(&s));
            Ok(run)
        }
    }
}
