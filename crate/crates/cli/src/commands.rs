use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use log::{info, warn};
use taskscope::benchgen::{generate_world, ground_truth_necessary, run_bench, BenchMatrix, OracleChoice, WorldSpec};
use taskscope::domain::{Domain, GroundAction};
use taskscope::oracle::{GroundTruthOracle, KeepAllOracle, NoisyOracle, Oracle, OracleError, RemoteOracle, ScriptedOracle};
use taskscope::planners::{mcts_plan, policy_plan, replay_report, MctsConfig, PlanResult, PolicyConfig};
use taskscope::reduction::{classify, reduce as run_reduce, Outcome, ReduceConfig, ReductionError};
use taskscope::taxonomy::{build_taxonomy, TaxonomyGraph, TaxonomySpec};
use taskscope::world::{load_world, save_world, GoalSpec, ObjectId, StateGraph};

use crate::config::{Config, OracleKind};
use crate::{
    BenchArgs, CliError, GenWorldArgs, OracleArgs, PlanArgs, PlannerChoice, ReduceArgs, ValidateArgs, EXIT_FAILURE,
    EXIT_FORMAT_ERROR, EXIT_OBJECTS_MISSING, EXIT_TRANSPORT,
};

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_world(path: &Path) -> Result<StateGraph, CliError> {
    load_world(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_goal(text: &str, world: &StateGraph) -> Result<GoalSpec, CliError> {
    let goal: GoalSpec = text.parse().map_err(|e| CliError::Usage(format!("goal: {e}")))?;
    goal.check_against(world).map_err(|e| CliError::Data(format!("goal: {e}")))?;
    Ok(goal)
}

fn load_taxonomy(path: Option<&Path>, world: &StateGraph) -> Result<TaxonomyGraph, CliError> {
    let spec = match path {
        Some(p) => TaxonomySpec::from_json(&read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => TaxonomySpec::household(),
    };
    let registry = world.objects().filter(|o| !o.is_room() && !o.is_agent()).map(|o| o.class.clone()).collect();
    build_taxonomy(&spec, &registry).map_err(|e| CliError::Data(e.to_string()))
}

/// Merges oracle flags over the configured section.
fn oracle_settings(args: &OracleArgs, cfg: &Config) -> crate::config::OracleSection {
    let mut s = cfg.oracle.clone();
    if let Some(k) = args.oracle {
        s.kind = k;
    }
    if let Some(v) = args.p_drop {
        s.p_drop = v;
    }
    if let Some(v) = args.p_add {
        s.p_add = v;
    }
    if let Some(v) = args.noise_seed {
        s.seed = v;
    }
    if let Some(v) = &args.script {
        s.script = Some(v.clone());
    }
    if let Some(v) = &args.endpoint {
        s.remote.endpoint = v.clone();
    }
    if let Some(v) = &args.model {
        s.remote.model = v.clone();
    }
    s
}

fn scripted(path: Option<&Path>) -> Result<ScriptedOracle, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("the scripted oracle needs --script".into()))?;
    let replies: Vec<String> = serde_json::from_slice(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: expected a JSON array of strings: {e}", path.display())))?;
    Ok(ScriptedOracle::new(replies))
}

fn remote(s: &crate::config::OracleSection) -> Result<RemoteOracle, CliError> {
    RemoteOracle::new(s.remote.clone()).map_err(|e| CliError::Usage(e.to_string()))
}

fn relevance_oracle(
    s: &crate::config::OracleSection,
    taxonomy: &TaxonomyGraph,
    world: &StateGraph,
    truth: &BTreeSet<ObjectId>,
) -> Result<Box<dyn Oracle>, CliError> {
    Ok(match s.kind {
        OracleKind::GroundTruth => Box::new(GroundTruthOracle::new(taxonomy, world, truth)),
        OracleKind::KeepAll => Box::new(KeepAllOracle),
        OracleKind::Noisy => Box::new(
            NoisyOracle::new(GroundTruthOracle::new(taxonomy, world, truth), s.seed, s.p_drop, s.p_add)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        OracleKind::Scripted => Box::new(scripted(s.script.as_deref())?),
        OracleKind::Remote => Box::new(remote(s)?),
    })
}

pub fn gen_world(a: &GenWorldArgs) -> Result<u8, CliError> {
    if a.out.exists() && !a.force {
        return Err(CliError::Exists(a.out.clone()));
    }
    let spec = WorldSpec { seed: a.seed, n_rooms: a.rooms, n_objects: a.objects, ..WorldSpec::default() };
    let world = generate_world(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write(&a.out, &save_world(&world))?;
    println!("{}: {} objects, {} edges", a.out.display(), world.len(), world.edge_count());
    Ok(0)
}

pub fn reduce(a: &ReduceArgs, cfg: &Config) -> Result<u8, CliError> {
    let world = read_world(&a.world)?;
    let goal = read_goal(&a.goal, &world)?;
    let taxonomy = load_taxonomy(a.taxonomy.as_deref(), &world)?;
    let truth = ground_truth_necessary(&world, &goal).necessary;
    let settings = oracle_settings(&a.oracle, cfg);
    let oracle = relevance_oracle(&settings, &taxonomy, &world, &truth)?;
    let rcfg = ReduceConfig { max_iters: a.iters.unwrap_or(cfg.reduce.max_iters), ..cfg.reduce };

    let result = run_reduce(&world, &taxonomy, &goal, oracle.as_ref(), &rcfg);
    let trace = match &result {
        Ok((_, t)) => Some(t),
        Err(e) => e.trace(),
    };
    if let (Some(path), Some(t)) = (&a.trace, trace) {
        write(path, &t.to_json())?;
    }
    if let (Some(path), Ok((state, _))) = (&a.out, &result) {
        write(path, &save_world(&state.graph))?;
    }

    match &result {
        Ok((state, t)) => println!(
            "selected {} objects ({} by taxonomy, {} by relation), kept {} of {}, {} oracle request(s)",
            state.selected().len(),
            state.taxonomy_selected.len(),
            state.relational_selected.len(),
            state.kept.len(),
            world.len(),
            t.requests()
        ),
        Err(e) => eprintln!("reduction failed: {e}"),
    }
    Ok(match classify(&result, &truth) {
        Some(Outcome::Success) => {
            println!("outcome: success");
            0
        }
        Some(Outcome::ObjectsMissing) => {
            let kept = result.as_ref().map(|(s, _)| s.kept.clone()).unwrap_or_default();
            let missing: Vec<String> = truth.difference(&kept).map(|id| id.to_string()).collect();
            println!("outcome: objects_missing ({})", missing.join(", "));
            EXIT_OBJECTS_MISSING
        }
        Some(Outcome::FormatError) => {
            println!("outcome: format_error");
            EXIT_FORMAT_ERROR
        }
        None => match result {
            Err(ReductionError::Oracle { source: OracleError::Transport(_), .. }) => EXIT_TRANSPORT,
            Err(ReductionError::Oracle { source, .. }) => return Err(CliError::Usage(source.to_string())),
            Err(e) => return Err(CliError::Data(e.to_string())),
            Ok(_) => unreachable!("successful reductions always classify"),
        },
    })
}

pub fn plan(a: &PlanArgs, cfg: &Config) -> Result<u8, CliError> {
    let path = a.world.as_ref().or(a.reduced.as_ref()).expect("clap requires one input");
    let world = read_world(path)?;
    let goal = read_goal(&a.goal, &world)?;
    let domain = Domain::household();
    let result = match a.planner {
        PlannerChoice::Mcts => {
            let mut mcfg: MctsConfig = cfg.mcts;
            if let Some(b) = a.budget {
                mcfg.budget = b;
            }
            if let Some(s) = a.seed {
                mcfg.seed = s;
            }
            mcfg.check().map_err(CliError::Usage)?;
            mcts_plan(&world, &goal, &domain, &mcfg)
        }
        PlannerChoice::Policy => {
            let settings = oracle_settings(&a.oracle, cfg);
            let oracle: Box<dyn Oracle> = match settings.kind {
                OracleKind::Scripted => Box::new(scripted(settings.script.as_deref())?),
                OracleKind::Remote => Box::new(remote(&settings)?),
                other => {
                    return Err(CliError::Usage(format!(
                        "the policy planner needs a scripted or remote oracle, not {other:?}"
                    )))
                }
            };
            let pcfg = PolicyConfig { max_len: a.max_len.unwrap_or(cfg.policy.max_len), ..cfg.policy };
            match policy_plan(&world, &goal, &domain, oracle.as_ref(), &pcfg) {
                Ok(r) => r,
                Err(OracleError::Transport(e)) => {
                    eprintln!("oracle transport error: {e}");
                    return Ok(EXIT_TRANSPORT);
                }
                Err(e) => return Err(CliError::Usage(e.to_string())),
            }
        }
    };
    report_plan(&result);
    match &a.out {
        Some(out) => write(out, &result.to_json())?,
        None => print!("{}", String::from_utf8_lossy(&result.to_json())),
    }
    Ok(if result.success { 0 } else { EXIT_FAILURE })
}

fn report_plan(r: &PlanResult) {
    if r.success {
        info!("plan found: {} steps ({} before trimming), {} iterations, {} ms", r.steps, r.raw_steps, r.iterations_used, r.wall_ms);
        for (i, step) in r.plan.iter().enumerate() {
            eprintln!("{i:>3}  {step}");
        }
    } else {
        warn!("no plan: {:?} after {} iterations", r.failure, r.iterations_used);
    }
    eprintln!(
        "success={} steps={} raw_steps={} iterations={} wall_ms={}",
        r.success, r.steps, r.raw_steps, r.iterations_used, r.wall_ms
    );
}

pub fn bench(a: &BenchArgs, jobs: usize) -> Result<u8, CliError> {
    let bytes = read(&a.matrix)?;
    let mut matrix: BenchMatrix = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.matrix.display())))?;
    if let OracleChoice::Remote(rc) = &mut matrix.oracle {
        *rc = rc.clone().with_env();
    }
    matrix.check().map_err(|e| CliError::Usage(format!("{}: {e}", a.matrix.display())))?;
    let taxonomy = match &a.taxonomy {
        Some(p) => TaxonomySpec::from_json(&read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => TaxonomySpec::household(),
    };
    info!("running {} cells on {jobs} worker(s)", matrix.worlds.len() * matrix.subtasks.len() * matrix.tasks_per_n);
    let report = run_bench(&matrix, &taxonomy, jobs).map_err(|e| CliError::Usage(e.to_string()))?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let table = report.summary.table();
    write(&a.out.join("rows.jsonl"), &report.to_jsonl())?;
    write(&a.out.join("summary.json"), &report.summary.to_json())?;
    write(&a.out.join("table.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(0)
}

fn read_plan(path: &Path) -> Result<Vec<GroundAction>, CliError> {
    let bytes = read(path)?;
    if let Ok(r) = serde_json::from_slice::<PlanResult>(&bytes) {
        return Ok(r.plan);
    }
    serde_json::from_slice::<Vec<GroundAction>>(&bytes).map_err(|e| {
        CliError::Data(format!("{}: expected planner output or an array of actions: {e}", path.display()))
    })
}

pub fn validate_plan(a: &ValidateArgs) -> Result<u8, CliError> {
    let world = read_world(&a.world)?;
    let plan = read_plan(&a.plan)?;
    let goal: GoalSpec = a.goal.parse().map_err(|e| CliError::Usage(format!("goal: {e}")))?;
    let report = replay_report(&Domain::household(), &world, &plan, &goal);
    if report.ok {
        println!("valid: {} step(s) reach the goal", plan.len());
        return Ok(0);
    }
    match report.failed_step {
        Some(i) => println!("invalid at step {i}: {}", report.message.unwrap_or_default()),
        None => println!("invalid: {}", report.message.unwrap_or_default()),
    }
    Ok(EXIT_FAILURE)
}
