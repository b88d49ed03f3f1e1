use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use taskscope::benchgen::{compose_task, generate_world, ground_truth_necessary, WorldSpec};
use taskscope::domain::{Domain, PlanState};
use taskscope::planners::{mcts_plan, MctsConfig, PlanResult};
use taskscope::world::{load_world, save_world, GoalSpec};
use tempfile::TempDir;

fn taskscope(args: &[&str]) -> Output {
    cmd(args, &[])
}

fn cmd(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_taskscope"));
    c.args(args);
    for var in ["TASKSCOPE_LLM_ENDPOINT", "TASKSCOPE_LLM_MODEL", "TASKSCOPE_LLM_API_KEY"] {
        c.env_remove(var);
    }
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
    world: PathBuf,
    goal: GoalSpec,
}

/// A generated 280-object world with a one-part task on it.
fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let world = dir.path().join("world.json");
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "0", "--out", p(&world)])), 0);
    let g = load_world(&fs::read(&world).unwrap()).unwrap();
    let (_, goal) = compose_task(&g, 7, 1).unwrap();
    Fixture { dir, world, goal }
}

#[test]
fn gen_world_is_deterministic_and_refuses_overwrites() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "1", "--out", p(&a)])), 0);
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "1", "--out", p(&b)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&a).unwrap(), save_world(&generate_world(&WorldSpec::new(1, 280)).unwrap()));

    let o = taskscope(&["gen-world", "--seed", "2", "--out", p(&a)]);
    assert_eq!(code(&o), 73);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "2", "--out", p(&a), "--force"])), 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let small = dir.path().join("small.json");
    let o = taskscope(&["gen-world", "--seed", "1", "--objects", "10", "--out", p(&small)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("10 objects"));
    assert_eq!(load_world(&fs::read(&small).unwrap()).unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&taskscope(&["frobnicate"])), 64);
    assert_eq!(code(&taskscope(&["plan", "--goal", "open(fridge#3)=true"])), 64);
    assert_eq!(code(&taskscope(&["--log-level", "loud", "validate-plan", "--world", "w", "--plan", "p", "--goal", "g"])), 64);
    assert_eq!(code(&taskscope(&["--help"])), 0);
}

#[test]
fn reduce_exit_codes() {
    let f = fixture();
    let goal = f.goal.to_string();
    let (out, trace) = (f.dir.path().join("reduced.json"), f.dir.path().join("trace.json"));

    let o = taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--out", p(&out), "--trace", p(&trace)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let world = load_world(&fs::read(&f.world).unwrap()).unwrap();
    let reduced = load_world(&fs::read(&out).unwrap()).unwrap();
    let truth = ground_truth_necessary(&world, &f.goal).necessary;
    assert!(truth.is_subset(&reduced.ids()));
    assert!(reduced.len() < world.len());
    let t: serde_json::Value = serde_json::from_slice(&fs::read(&trace).unwrap()).unwrap();
    assert!(t.is_object());

    let o = taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--oracle", "noisy", "--p-drop", "1"]);
    assert_eq!(code(&o), 3);

    let script = f.dir.path().join("script.json");
    fs::write(&script, r#"["I think the fridge matters."]"#).unwrap();
    let o = taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--oracle", "scripted", "--script", p(&script), "--trace", p(&trace)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("format_error"));

    let o = taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--oracle", "remote", "--endpoint", "http://127.0.0.1:9"]);
    assert_eq!(code(&o), 4);

    let o = taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--oracle", "remote"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn reduce_is_deterministic() {
    let f = fixture();
    let goal = f.goal.to_string();
    let run = |tag: &str| {
        let (out, trace) = (f.dir.path().join(format!("r{tag}.json")), f.dir.path().join(format!("t{tag}.json")));
        let o = taskscope(&[
            "reduce", "--world", p(&f.world), "--goal", &goal, "--oracle", "noisy", "--p-drop", "0.2", "--p-add", "0.05",
            "--noise-seed", "3", "--out", p(&out), "--trace", p(&trace),
        ]);
        (code(&o), fs::read(out).ok(), fs::read(trace).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn config_precedence() {
    let f = fixture();
    let goal = f.goal.to_string();
    let config = f.dir.path().join("taskscope.toml");
    fs::write(&config, "[oracle]\nkind = \"noisy\"\np_drop = 1.0\n").unwrap();
    let base = ["--config", p(&config), "reduce", "--world", p(&f.world), "--goal", &goal];

    assert_eq!(code(&taskscope(&base)), 3);
    let mut flagged = base.to_vec();
    flagged.extend(["--oracle", "ground-truth"]);
    assert_eq!(code(&taskscope(&flagged)), 0);

    // endpoint: file < env < flag
    fs::write(&config, "[oracle]\nkind = \"remote\"\n[oracle.remote]\nendpoint = \"\"\ntimeout_secs = 2\n").unwrap();
    assert_eq!(code(&taskscope(&base)), 64);
    let env = [("TASKSCOPE_LLM_ENDPOINT", "http://127.0.0.1:9")];
    assert_eq!(code(&cmd(&base, &env)), 4);
    let mut flagged = base.to_vec();
    flagged.extend(["--endpoint", " "]);
    assert_eq!(code(&cmd(&flagged, &env)), 64);

    fs::write(&config, "[oracle]\nkind = \"psychic\"\n").unwrap();
    assert_eq!(code(&taskscope(&base)), 64);
}

#[test]
fn plan_and_validate_pipeline() {
    let f = fixture();
    let goal = f.goal.to_string();
    let reduced = f.dir.path().join("reduced.json");
    let plan = f.dir.path().join("plan.json");
    assert_eq!(code(&taskscope(&["reduce", "--world", p(&f.world), "--goal", &goal, "--out", p(&reduced)])), 0);

    let o = taskscope(&["plan", "--reduced", p(&reduced), "--goal", &goal, "--planner", "mcts", "--out", p(&plan)]);
    assert_eq!(code(&o), 0);
    let result: PlanResult = serde_json::from_slice(&fs::read(&plan).unwrap()).unwrap();
    assert!(result.success && result.steps == result.plan.len());

    for world in [&reduced, &f.world] {
        let o = taskscope(&["validate-plan", "--world", p(world), "--plan", p(&plan), "--goal", &goal]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }

    // dropping the first action breaks the plan
    let mutated = f.dir.path().join("mutated.json");
    fs::write(&mutated, serde_json::to_vec(&result.plan[1..]).unwrap()).unwrap();
    let o = taskscope(&["validate-plan", "--world", p(&f.world), "--plan", p(&mutated), "--goal", &goal]);
    assert_eq!(code(&o), 1);

    // a different world rejects it at a specific step
    let other = f.dir.path().join("other.json");
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "1", "--out", p(&other)])), 0);
    let o = taskscope(&["validate-plan", "--world", p(&other), "--plan", p(&plan), "--goal", &goal]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("invalid at step"), "{}", stdout(&o));
}

#[test]
fn mcts_fails_on_the_full_world() {
    let f = fixture();
    let o = taskscope(&["plan", "--world", p(&f.world), "--goal", &f.goal.to_string()]);
    assert_eq!(code(&o), 1);
    let r: PlanResult = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!r.success);
    assert_eq!(r.iterations_used, MctsConfig::default().budget);
}

#[test]
fn scripted_policy_fixture() {
    let dir = TempDir::new().unwrap();
    let world_path = dir.path().join("small.json");
    assert_eq!(code(&taskscope(&["gen-world", "--seed", "4", "--objects", "12", "--out", p(&world_path)])), 0);
    let world = load_world(&fs::read(&world_path).unwrap()).unwrap();
    let (_, goal) = compose_task(&world, 1, 1).unwrap();

    // turn a known plan into the action indices the policy will be offered
    let d = Domain::household();
    let known = mcts_plan(&world, &goal, &d, &MctsConfig::default());
    assert!(known.success);
    let mut s = PlanState::from_graph(&world).unwrap();
    let mut replies = Vec::new();
    for a in &known.plan {
        let i = d.affordances(&s).iter().position(|x| x == a).unwrap();
        replies.push(format!("[{i}]"));
        s = d.step(&s, a).unwrap();
    }
    let script = dir.path().join("script.json");
    fs::write(&script, serde_json::to_vec(&replies).unwrap()).unwrap();

    let plan = dir.path().join("plan.json");
    let o = taskscope(&[
        "plan", "--world", p(&world_path), "--goal", &goal.to_string(), "--planner", "policy", "--oracle", "scripted",
        "--script", p(&script), "--out", p(&plan),
    ]);
    assert_eq!(code(&o), 0);
    let r: PlanResult = serde_json::from_slice(&fs::read(&plan).unwrap()).unwrap();
    assert_eq!(r.plan, known.plan);

    let o = taskscope(&["plan", "--world", p(&world_path), "--goal", &goal.to_string(), "--planner", "policy"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn bench_writes_reports_and_rejects_bad_matrices() {
    let dir = TempDir::new().unwrap();
    let matrix = dir.path().join("matrix.json");
    fs::write(&matrix, r#"{"worlds": [0], "n_objects": 40, "subtasks": [1, 2], "tasks_per_n": 2}"#).unwrap();
    let out = dir.path().join("report");
    let o = taskscope(&["--jobs", "2", "bench", "--matrix", p(&matrix), "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let rows = fs::read_to_string(out.join("rows.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 4);
    for line in rows.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["outcome"], "success");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["per_n"].is_array());
    assert_eq!(fs::read_to_string(out.join("table.txt")).unwrap(), stdout(&o));

    for bad in [
        r#"{"worlds": [0], "tasks_per_n": 0}"#,
        r#"{"worlds": [0], "colour": "blue"}"#,
        r#"{"worlds": [0], "planners": ["policy"]}"#,
        r#"{"oracle": {"kind": "remote"}}"#,
        "not json",
    ] {
        fs::write(&matrix, bad).unwrap();
        assert_eq!(code(&taskscope(&["bench", "--matrix", p(&matrix), "--out", p(&out)])), 64, "{bad}");
    }

    // a remote matrix picks its endpoint up from the environment
    fs::write(&matrix, r#"{"worlds": [0], "n_objects": 40, "subtasks": [1], "tasks_per_n": 1, "oracle": {"kind": "remote", "timeout_secs": 2}}"#).unwrap();
    let o = cmd(&["bench", "--matrix", p(&matrix), "--out", p(&out)], &[("TASKSCOPE_LLM_ENDPOINT", "http://127.0.0.1:9")]);
    assert_eq!(code(&o), 0);
    let rows = fs::read_to_string(out.join("rows.jsonl")).unwrap();
    assert!(rows.contains("transport_error"), "{rows}");
}
