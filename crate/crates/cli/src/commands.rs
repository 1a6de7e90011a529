use std::fs;
use std::path::{Path, PathBuf};

use qsynth::agent::DdqnAgent;
use qsynth::baseline::{evaluate_layered, LayerKind, LayeredSpec, LocalGate};
use qsynth::circuit::{export, format_sequence, preset_graph, Action, ExportFormat, GraphPreset};
use qsynth::optim::OptimizerConfig;
use qsynth::par::item_rng;
use qsynth::quantum::{PureState, QuantumState};
use qsynth::stats::{write_summary_csv, SummaryRow};
use qsynth::synth::{
    brute_force_oracle, evaluate, generate_circuit, ghz_state, parse_target_json, preparation_fidelity,
    sample_targets, train as run_training, w_state, write_csv, write_metrics_csv, EpisodeConfig, OracleConfig,
    TargetStructure,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Common};

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn load_agent(path: &Path) -> Result<DdqnAgent, CliError> {
    DdqnAgent::from_json(&read_input(path)?)
        .map_err(|e| CliError::Validation(format!("checkpoint {}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> qsynth::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn optimizer(restarts: usize, seed: u64) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig {
        restarts,
        seed,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn episode_config(common: &Common) -> Result<EpisodeConfig, CliError> {
    let opt = optimizer(common.restarts.unwrap_or(3), common.seed)?;
    Ok(EpisodeConfig {
        local: opt,
        global: opt,
        ..Default::default()
    })
}

fn cnot_pairs(seq: &[Action]) -> Vec<(usize, usize)> {
    seq.iter()
        .filter_map(|a| match *a {
            Action::Cnot { control, target } => Some((control, target)),
            Action::Stop => None,
        })
        .collect()
}

fn fresh_run_dir(root: &Path, seed: u64) -> Result<PathBuf, CliError> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    fs::create_dir_all(root)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", root.display())))?;
    for i in 0.. {
        let name = if i == 0 {
            format!("train-{stamp}-s{seed}")
        } else {
            format!("train-{stamp}-s{seed}-{i}")
        };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::Runtime(format!("cannot create {}: {e}", dir.display()))),
        }
    }
    unreachable!()
}

pub fn train(config: &Path, out_root: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.train.seed = s;
    }
    let seed = cfg.train.seed;
    let graph = cfg.graph()?;
    let mut agent = DdqnAgent::new(graph, cfg.agent.clone(), &mut item_rng(seed, 0))?;

    let dir = fresh_run_dir(out_root, seed)?;
    let ckpt_dir = dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    write_output(&dir.join("seed"), format!("{seed}\n").as_bytes())?;

    let episodes = cfg.train.episodes;
    let report = run_training(&mut agent, &cfg.train, |ep, agent, rows| {
        let path = if ep == episodes {
            dir.join("agent.json")
        } else {
            ckpt_dir.join(format!("agent-{ep:06}.json"))
        };
        agent.save(&path)?;
        let mut buf = Vec::new();
        write_metrics_csv(rows, &mut buf)?;
        fs::write(dir.join("metrics.csv"), buf)?;
        Ok(())
    })?;

    let tail = &report.rows[report.rows.len().saturating_sub(100)..];
    if !tail.is_empty() {
        let f = tail.iter().map(|r| r.fidelity).sum::<f64>() / tail.len() as f64;
        let c = tail.iter().map(|r| r.cnots as f64).sum::<f64>() / tail.len() as f64;
        println!(
            "episodes {episodes}: last {} mean fidelity {f:.4}, mean CNOTs {c:.2}, final T_F {:.4}",
            tail.len(),
            tail.last().map_or(f64::NAN, |r| r.t_f)
        );
    }
    if report.failed_episodes > 0 {
        eprintln!("warning: {} episodes had an optimizer failure", report.failed_episodes);
    }
    println!("wall clock {:.1} s", report.wall_clock_secs);
    println!("{}", dir.display());
    Ok(())
}

pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub n_states: usize,
    pub structure: TargetStructure,
    pub budgets: Vec<usize>,
    pub out: Option<PathBuf>,
    pub per_target: Option<PathBuf>,
    pub histogram: Option<PathBuf>,
    pub common: Common,
}

#[derive(Serialize)]
struct TargetRow {
    budget: Option<usize>,
    index: usize,
    fidelity: f64,
    cnots: usize,
    sequence: String,
}

#[derive(Serialize)]
struct HistRow {
    budget: Option<usize>,
    cnots: usize,
    count: usize,
}

fn budget_label(b: Option<usize>) -> String {
    b.map_or_else(|| "unbounded".into(), |b| b.to_string())
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let agent = load_agent(&args.checkpoint)?;
    let cfg = episode_config(&args.common)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let targets = sample_targets(&args.structure, agent.n_qubits(), args.n_states, &mut rng)?;
    let budgets: Vec<Option<usize>> = if args.budgets.is_empty() {
        vec![None]
    } else {
        args.budgets.iter().map(|&b| Some(b)).collect()
    };

    let (mut summary, mut per_target, mut hist) = (Vec::new(), Vec::new(), Vec::new());
    for budget in budgets {
        let rep = evaluate(&agent, &targets, budget, &cfg, args.common.seed, args.common.threads)?;
        let row = rep.summary("agent");
        println!(
            "budget {}: mean fidelity {:.4}, 95% interval [{:.4}, {:.4}], mean CNOTs {:.2}, {} states",
            budget_label(budget),
            row.mean_fidelity,
            row.interval_lo,
            row.interval_hi,
            row.mean_cnots,
            row.n_states
        );
        let h = rep.histogram();
        let counts: Vec<String> = h
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, c)| format!("{k}:{c}"))
            .collect();
        println!("  CNOT histogram {}", counts.join(" "));
        if rep.failed > 0 {
            eprintln!("warning: {} episodes had an optimizer failure", rep.failed);
        }
        for r in rep.rows() {
            per_target.push(TargetRow {
                budget,
                index: r.index,
                fidelity: r.fidelity,
                cnots: r.cnots,
                sequence: r.sequence,
            });
        }
        hist.extend(h.iter().enumerate().map(|(cnots, &count)| HistRow { budget, cnots, count }));
        summary.push(row);
    }
    if let Some(p) = &args.out {
        write_output(p, &csv_bytes(|b| write_summary_csv(&summary, b))?)?;
    }
    if let Some(p) = &args.per_target {
        write_output(p, &csv_bytes(|b| write_csv(&per_target, b))?)?;
    }
    if let Some(p) = &args.histogram {
        write_output(p, &csv_bytes(|b| write_csv(&hist, b))?)?;
    }
    Ok(())
}

pub fn prepare(checkpoint: &Path, target: &Path, budget: Option<usize>, out: &Path, common: &Common) -> Result<(), CliError> {
    let agent = load_agent(checkpoint)?;
    let psi = parse_target_json(&read_input(target)?)
        .map_err(|e| CliError::Validation(format!("target {}: {e}", target.display())))?;
    if psi.n_qubits() != agent.n_qubits() {
        return Err(CliError::Validation(format!(
            "target has {} qubits, the agent was trained on {}",
            psi.n_qubits(),
            agent.n_qubits()
        )));
    }
    let cfg = episode_config(common)?;
    let prep = generate_circuit(&psi, &agent, budget, &cfg, &mut item_rng(common.seed, 0))?;
    let check = preparation_fidelity(&prep.circuit, &prep.params, &psi)?;

    let txt = out.with_extension("txt");
    let json = out.with_extension("json");
    write_output(&txt, &export(&prep.circuit, &prep.params, ExportFormat::Text)?)?;
    write_output(&json, &export(&prep.circuit, &prep.params, ExportFormat::Json)?)?;
    println!("fidelity {check:.12}");
    println!("cnots {}", prep.circuit.cnot_count());
    println!("sequence {}", format_sequence(&prep.circuit.cnot_sequence()));
    println!("agent choices {}", format_sequence(&cnot_pairs(&prep.sequence)));
    println!("wrote {} and {}", txt.display(), json.display());
    Ok(())
}

pub struct CompareArgs {
    pub checkpoint: PathBuf,
    pub kind: LayerKind,
    pub local_gate: LocalGate,
    pub layers: Vec<usize>,
    pub n_states: usize,
    pub structure: TargetStructure,
    pub out: Option<PathBuf>,
    pub common: Common,
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let agent = load_agent(&args.checkpoint)?;
    let n = agent.n_qubits();
    let cfg = episode_config(&args.common)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let targets = sample_targets(&args.structure, n, args.n_states, &mut rng)?;

    let mut rows: Vec<SummaryRow> = Vec::new();
    for &l in &args.layers {
        let spec = LayeredSpec {
            kind: args.kind,
            n_qubits: n,
            layers: l,
            local_gate: args.local_gate,
        };
        let budget = l * n.saturating_sub(1);
        let rep = evaluate(&agent, &targets, Some(budget), &cfg, args.common.seed, args.common.threads)?;
        let base = evaluate_layered(&spec, &targets, &cfg.global)?;
        for row in [rep.summary("agent"), base.summary("layered")] {
            println!(
                "{:<8} setting {:>3}: mean fidelity {:.4}, 95% interval [{:.4}, {:.4}], mean CNOTs {:.2}",
                row.label,
                row.setting.map_or(0, |s| s),
                row.mean_fidelity,
                row.interval_lo,
                row.interval_hi,
                row.mean_cnots
            );
            rows.push(row);
        }
    }
    if let Some(p) = &args.out {
        write_output(p, &csv_bytes(|b| write_summary_csv(&rows, b))?)?;
    }
    Ok(())
}

fn builtin_state(name: &str, n: usize) -> Result<PureState, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "w" => Ok(w_state(n)?),
        "ghz" => Ok(ghz_state(n)?),
        other => Err(CliError::Validation(format!("unknown built-in state {other:?} (use w or ghz)"))),
    }
}

pub fn oracle(
    target: Option<PathBuf>,
    state: Option<String>,
    qubits: Option<usize>,
    k: usize,
    graph: GraphPreset,
    table: bool,
    common: &Common,
) -> Result<(), CliError> {
    let psi = match (target, state) {
        (Some(path), None) => parse_target_json(&read_input(&path)?)?,
        (None, Some(name)) => builtin_state(&name, qubits.unwrap_or(0))?,
        _ => return Err(CliError::Validation("give exactly one of --target and --state".into())),
    };
    let g = preset_graph(graph, psi.n_qubits())?;
    let mut cfg = OracleConfig {
        seed: common.seed,
        threads: common.threads,
        ..Default::default()
    };
    if let Some(r) = common.restarts {
        cfg.global = optimizer(r, common.seed)?;
    }
    let res = brute_force_oracle(&psi, k, &g, &cfg)?;
    if table {
        println!("# cnots, best fidelity, sequence");
        for row in &res.by_length {
            println!("{}, {:.3}, {}", row.cnots, row.fidelity, format_sequence(&cnot_pairs(&row.sequence)));
        }
        println!("# best with at most {k} CNOTs ({} sequences optimized)", res.evaluated);
    }
    println!("{k}, {:.3}, {}", res.fidelity, format_sequence(&cnot_pairs(&res.sequence)));
    Ok(())
}
