use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use compass_core::readout::{isolated_cluster_stats_of, success_by_instance, IsolatedClusterStats};
use compass_core::report::{self, TrajectoryPlot};
use compass_core::{
    build_eight_spin_gadget, compass_batch, default_chimera_order, derive_seed, exact_batch, generate_chimera,
    histogram, parse_instance, random_pm1_instance, sa_batch, serialize_instance, BatchPlan, IsingInstance,
    OracleResult, RunRecord,
};

use crate::args::{BenchArgs, Common, ExactArgs, Format, Gadget8Args, GenArgs, SaArgs, SourceArgs};

/// Bad input detected by the CLI itself; maps to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub struct Source {
    pub instances: Vec<IsingInstance>,
    pub order: Option<Vec<usize>>,
}

// Instance-generation seeds live in their own stream, apart from run seeds.
const INSTANCE_STREAM: u64 = 0x1d5e_ed00_c0ff_ee00;

pub fn load_instances(source: &SourceArgs, seed: u64) -> Result<Source> {
    if !source.input.is_empty() {
        let mut instances = Vec::with_capacity(source.input.len());
        for path in &source.input {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut inst = parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
            if inst.label().is_empty() {
                inst.set_label(path.display().to_string());
            }
            instances.push(inst);
        }
        return Ok(Source { instances, order: None });
    }
    if source.gadget {
        return Ok(Source {
            instances: vec![build_eight_spin_gadget()],
            order: None,
        });
    }
    let spec = source.chimera_spec();
    let adjacency = generate_chimera(&spec)?;
    let instances = (0..source.instances)
        .map(|i| {
            let inst = random_pm1_instance(&adjacency, derive_seed(seed ^ INSTANCE_STREAM, i as u64, 0));
            inst.with_label(format!("chimera-{}x{}-{i}", spec.rows, spec.cols))
        })
        .collect();
    Ok(Source {
        instances,
        order: Some(default_chimera_order(&spec)),
    })
}

fn nonempty(source: Source) -> Result<Source> {
    if source.instances.is_empty() {
        bail!(UsageError("instance set is empty".into()));
    }
    Ok(source)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, text)
}

fn write_records(common: &Common, records: &[RunRecord]) -> Result<PathBuf> {
    match common.format {
        Format::Csv => write_file(&common.out, "records.csv", report::records_csv(records)),
        Format::Json => write_json(&common.out, "records.json", &records),
    }
}

fn write_oracle(common: &Common, oracle: &[OracleResult]) -> Result<PathBuf> {
    match common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            report::write_oracle(&mut buf, oracle.iter().enumerate())?;
            write_file(&common.out, "oracle.csv", buf)
        }
        Format::Json => {
            let rows: Vec<_> = oracle
                .iter()
                .enumerate()
                .map(|(id, r)| json!({"instance_id": id, "ground_energy": r.ground_energy, "degeneracy": r.degeneracy}))
                .collect();
            write_json(&common.out, "oracle.json", &rows)
        }
    }
}

fn solve(source: &Source, workers: usize) -> Result<Vec<OracleResult>> {
    Ok(exact_batch(&source.instances, source.order.as_deref(), workers)?)
}

fn is_gadget(instances: &[IsingInstance]) -> bool {
    instances.len() == 1 && instances[0] == build_eight_spin_gadget()
}

/// Per-instance success probabilities, histogram and summary shared by
/// `bench` and `sa`.
fn write_batch_outputs(
    common: &Common,
    bins: usize,
    title: &str,
    oracle: &[OracleResult],
    records: &[RunRecord],
    gadget: bool,
    mut summary: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    write_records(common, records)?;
    write_oracle(common, oracle)?;

    let per_instance = success_by_instance(records);
    let mut success = String::from("instance_id,success_probability\n");
    for (id, p) in &per_instance {
        success.push_str(&format!("{id},{p}\n"));
    }
    write_file(&common.out, "success.csv", success)?;

    let probs: Vec<f64> = per_instance.iter().map(|&(_, p)| p).collect();
    let hist = histogram(&probs, bins)?;
    let mut buf = Vec::new();
    report::write_histogram(&mut buf, &hist)?;
    write_file(&common.out, "histogram.csv", buf)?;
    write_file(
        &common.out,
        "histogram.gp",
        report::histogram_plot_script("histogram.csv", "histogram.png", title),
    )?;

    let with_success = probs.iter().filter(|&&p| p > 0.0).count();
    let extreme = probs.iter().filter(|&&p| p <= 0.1 || p >= 0.9).count();
    let mean = probs.iter().sum::<f64>() / probs.len() as f64;
    summary.insert("instances".into(), json!(probs.len()));
    summary.insert("total_runs".into(), json!(records.len()));
    summary.insert("instances_with_success".into(), json!(with_success));
    summary.insert("instances_at_extremes".into(), json!(extreme));
    summary.insert("mean_success_probability".into(), json!(mean));
    summary.insert("histogram".into(), json!(hist));
    if gadget {
        let stats = isolated_cluster_stats_of(records)?;
        summary.insert("isolated_cluster".into(), json!(stats));
    }
    write_json(&common.out, "summary.json", &summary)?;
    println!(
        "{} instances, {} runs: {with_success} with at least one success, mean success probability {mean:.4}",
        probs.len(),
        records.len()
    );
    Ok(())
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let source = nonempty(load_instances(&args.source, args.common.seed)?)?;
    let config = args.drag.config();
    config.validate()?;
    let noise = args.noise.spec(0.0);
    let oracle = solve(&source, args.common.workers)?;
    let ground: Vec<f64> = oracle.iter().map(|r| r.ground_energy).collect();
    let plan = BatchPlan::new(args.runs, args.common.seed).with_workers(args.common.workers);
    let records = compass_batch(&source.instances, &ground, &config, &noise, &plan)?;

    prepare_out(&args.common.out)?;
    let mut summary = serde_json::Map::new();
    summary.insert("solver".into(), json!("compass"));
    summary.insert("drag".into(), json!(config));
    summary.insert("noise".into(), json!(noise));
    summary.insert("runs_per_instance".into(), json!(args.runs));
    summary.insert("master_seed".into(), json!(args.common.seed));
    write_batch_outputs(
        &args.common,
        args.bins,
        "compass model",
        &oracle,
        &records,
        is_gadget(&source.instances),
        summary,
    )
}

pub fn sa(args: &SaArgs) -> Result<()> {
    let source = nonempty(load_instances(&args.source, args.common.seed)?)?;
    let schedule = args.schedule();
    schedule.validate()?;
    let oracle = solve(&source, args.common.workers)?;
    let ground: Vec<f64> = oracle.iter().map(|r| r.ground_energy).collect();
    let plan = BatchPlan::new(args.runs, args.common.seed).with_workers(args.common.workers);
    let records = sa_batch(&source.instances, &ground, &schedule, &plan)?;

    prepare_out(&args.common.out)?;
    let mut summary = serde_json::Map::new();
    summary.insert("solver".into(), json!("sa"));
    summary.insert("schedule".into(), json!(schedule));
    summary.insert("runs_per_instance".into(), json!(args.runs));
    summary.insert("master_seed".into(), json!(args.common.seed));
    write_batch_outputs(
        &args.common,
        args.bins,
        "simulated annealing",
        &oracle,
        &records,
        is_gadget(&source.instances),
        summary,
    )
}

pub fn exact(args: &ExactArgs) -> Result<()> {
    let source = nonempty(load_instances(&args.source, args.common.seed)?)?;
    let oracle = if args.brute {
        source
            .instances
            .iter()
            .map(compass_core::brute_force_ground)
            .collect::<Result<Vec<_>, _>>()?
    } else {
        solve(&source, args.common.workers)?
    };
    match args.common.format {
        Format::Csv => report::write_oracle(std::io::stdout().lock(), oracle.iter().enumerate())?,
        Format::Json => {
            let rows: Vec<_> = oracle
                .iter()
                .enumerate()
                .map(|(id, r)| json!({"instance_id": id, "ground_energy": r.ground_energy, "degeneracy": r.degeneracy}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let source = nonempty(load_instances(&args.source, args.common.seed)?)?;
    prepare_out(&args.common.out)?;
    let width = source.instances.len().saturating_sub(1).to_string().len().max(3);
    for (i, inst) in source.instances.iter().enumerate() {
        write_file(&args.common.out, &format!("instance_{i:0width$}.txt"), serialize_instance(inst))?;
    }
    println!("wrote {} instances to {}", source.instances.len(), args.common.out.display());
    Ok(())
}

#[derive(Serialize)]
struct ScenarioSummary {
    name: &'static str,
    file: String,
    duration: f64,
    hold: f64,
    noise_amplitude: f64,
    final_theta: Vec<f64>,
    drag_end_ke: f64,
    residual_ke: f64,
    kicks: usize,
}

pub fn gadget8(args: &Gadget8Args) -> Result<()> {
    let gadget = build_eight_spin_gadget();
    let slow = args.drag.config();
    slow.validate()?;
    let noise = args.noise.spec(0.02);
    // The fast run keeps the same total time window as the slow one.
    let fast_duration = 200.0;
    let fast = compass_core::DragConfig::new(fast_duration)
        .with_dt(slow.dt)
        .with_bx(slow.bx)
        .with_hold((slow.duration + slow.hold - fast_duration).max(0.0));
    let off = compass_core::NoiseSpec::off();
    let scenarios = [
        ("adiabatic", slow, off),
        ("noisy", slow, noise),
        ("fast", fast, off),
    ];

    let mut traces = Vec::new();
    for (k, (name, config, noise)) in scenarios.iter().enumerate() {
        let seed = derive_seed(args.common.seed, u64::MAX, k as u64);
        let (state, diag, trace) = compass_core::dynamics::run_drag_traced(&gadget, config, noise, seed, args.stride)?;
        traces.push((name, config, noise, state, diag, trace));
    }

    let batch = if args.runs > 0 {
        let plan = BatchPlan::new(args.runs, args.common.seed).with_workers(args.common.workers);
        let records = compass_batch(std::slice::from_ref(&gadget), &[-8.0], &slow, &noise, &plan)?;
        Some(records)
    } else {
        None
    };

    prepare_out(&args.common.out)?;
    let mut scenario_summaries = Vec::new();
    for (name, config, noise, state, diag, trace) in &traces {
        let file = format!("trajectory_{name}.csv");
        let mut buf = Vec::new();
        report::write_trajectory(&mut buf, trace)?;
        write_file(&args.common.out, &file, buf)?;
        scenario_summaries.push(ScenarioSummary {
            name,
            file,
            duration: config.duration,
            hold: config.hold,
            noise_amplitude: if noise.enabled { noise.amplitude } else { 0.0 },
            final_theta: state.theta.clone(),
            drag_end_ke: diag.drag_end_ke,
            residual_ke: diag.residual_ke,
            kicks: diag.kicks,
        });
    }
    let plots: Vec<TrajectoryPlot<'_>> = scenario_summaries
        .iter()
        .map(|s| TrajectoryPlot {
            csv: &s.file,
            title: s.name,
            core_column: 0,
            ancilla_column: 4,
        })
        .collect();
    write_file(
        &args.common.out,
        "trajectories.gp",
        report::trajectory_plot_script(&plots, "trajectories.png"),
    )?;

    let mut stats: Option<IsolatedClusterStats> = None;
    if let Some(records) = &batch {
        write_records(&args.common, records)?;
        stats = Some(isolated_cluster_stats_of(records)?);
    }
    let summary = json!({
        "scenarios": scenario_summaries,
        "batch": stats.map(|s| json!({
            "runs": s.runs,
            "p_s": s.p_s,
            "p_c": s.p_c,
            "noise": noise,
            "duration": slow.duration,
        })),
        "master_seed": args.common.seed,
    });
    write_json(&args.common.out, "summary.json", &summary)?;

    for s in &scenario_summaries {
        println!("{:<10} T={:<6} residual KE {:.3e}", s.name, s.duration, s.residual_ke);
    }
    if let Some(s) = stats {
        println!("{} runs: p_s = {:.4}, p_C = {:.4}", s.runs, s.p_s, s.p_c);
    }
    Ok(())
}
