//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, infeasible synthesis or
//! output error, 2 malformed scenario or usage, 3 integration failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::controller::{
    check_conditions, d_lower, d_upper, delta_min, feasible_interval, min_region_count, synthesize,
    y_hat, ConditionReport, DilutionSchedule, Synthesis,
};
use crate::graph::{compare, empirical_graph, export_dot, predict_graph, TransitionGraph};
use crate::model::{ModelParams, ParamValues, State};
use crate::quantizer::{inflate, make_equidistant, QuantizerKind, RegionSet};
use crate::scenario::{Scenario, ScenarioError};
use crate::simulator::{
    batch_simulate_with_trajectories, detect_chatter, events_jsonl, gnuplot_script, grid, simulate,
    trajectory_csv, BatchRun, Classification, SimConfig, SimMode, Trajectory,
};

pub const THREADS_ENV: &str = "QUANTREACTOR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "quantreactor",
    version,
    about = "Quantized dilution control of a bistable chemostat"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the first initial condition of a scenario.
    Simulate(RunArgs),
    /// Simulate every initial condition and replicate of a scenario.
    Sweep(RunArgs),
    /// Choose a dilution schedule for the scenario's regions.
    Synthesize(SynthArgs),
    /// Check the stabilization conditions; exit 0 iff they all hold.
    Verify(ScenarioArgs),
    /// Predicted transition graph, plus the empirical one when the scenario
    /// has initial conditions.
    Graph(RunArgs),
    /// Regenerate the reference datasets for the built-in setup.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Perfect,
    Random,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Perfect => SimMode::PerfectEvent,
            ModeArg::Random => SimMode::DiscreteRandom,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<ModeArg>,
    /// Write one CSV per trajectory.
    #[arg(long)]
    pub csv_per_trajectory: bool,
    /// Also write a gnuplot script next to each trajectory CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Set-point dilution; overrides the scenario directive.
    #[arg(long)]
    pub d_star: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "repro")]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Failed(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io { .. } => 1,
            CliError::Integration(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::IntegrationFailure { .. } => CliError::Integration(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to stdout and errors to stderr.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(cli.command)),
        Ok(None) => dispatch(cli.command),
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> CliResult<Option<rayon::ThreadPool>> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| CliError::Failed(e.to_string()))
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Synthesize(a) => cmd_synthesize(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Graph(a) => cmd_graph(&a),
        Command::Repro(a) => cmd_repro(&a),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn to_json<S: Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load(a: &RunArgs) -> CliResult<(Scenario, PathBuf)> {
    let mut sc = Scenario::load(&a.scenario)?;
    if let Some(seed) = a.seed {
        sc.sim.seed = seed;
    }
    if let Some(m) = a.mode {
        sc = sc.with_mode(m.into());
    }
    let out = a.out.clone().unwrap_or_else(|| sc.output_dir.clone());
    Ok((sc, out))
}

fn require_schedule(sc: &Scenario) -> CliResult<&DilutionSchedule<f64>> {
    sc.schedule
        .as_ref()
        .ok_or_else(|| CliError::Failed("synthesis found no feasible schedule".into()))
}

fn require_initial(sc: &Scenario) -> CliResult<&[State<f64>]> {
    if sc.initial.is_empty() {
        return Err(CliError::Scenario(ScenarioError::Invalid(
            "no initial conditions in [initial]".into(),
        )));
    }
    Ok(&sc.initial)
}

/// Short key for a classification, used in count tables.
pub fn class_key(c: &Classification) -> String {
    match c {
        Classification::ConvergedToTarget => "converged_to_target".into(),
        Classification::SlidingEquilibrium { boundary } => {
            format!("sliding_equilibrium_{boundary}")
        }
        Classification::TrappedAt { region } => format!("trapped_at_{region}"),
        Classification::Washout => "washout".into(),
        Classification::Undecided => "undecided".into(),
    }
}

fn counts(runs: &[BatchRun<f64>]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in runs {
        let key = match &r.outcome {
            Some(o) => class_key(&o.classification),
            None => "error".into(),
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

fn thresholds(rs: &RegionSet<f64>) -> Vec<f64> {
    let mut t: Vec<f64> = rs.lower()[1..].iter().chain(rs.upper()).copied().collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn cmd_simulate(a: &RunArgs) -> CliResult {
    let (sc, out) = load(a)?;
    let sched = require_schedule(&sc)?;
    let xi0 = require_initial(&sc)?[0];
    let (traj, outcome) = simulate(&sc.params, &sc.regions, sched, xi0, &sc.sim)?;
    write_file(&out, "trajectory.csv", &trajectory_csv(&traj))?;
    write_file(&out, "events.jsonl", &events_jsonl(&traj))?;
    let chatter = detect_chatter(&traj, &sc.sim);
    write_file(
        &out,
        "outcome.json",
        &to_json(&json!({ "initial": xi0, "outcome": outcome, "chatter": chatter })),
    )?;
    if a.gnuplot {
        write_file(
            &out,
            "trajectory.gp",
            &gnuplot_script("trajectory.csv", &thresholds(&sc.regions)),
        )?;
    }
    println!(
        "{} after {} d; limit ({:.6}, {:.6})",
        class_key(&outcome.classification),
        sc.sim.t_max,
        outcome.limit_point.s,
        outcome.limit_point.x
    );
    Ok(())
}

fn sweep_json(sc: &Scenario, runs: &[BatchRun<f64>]) -> serde_json::Value {
    json!({
        "mode": sc.sim.mode,
        "seed": sc.sim.seed,
        "replicates": sc.replicates,
        "counts": counts(runs),
        "runs": runs,
    })
}

fn first_integration_error(runs: &[BatchRun<f64>]) -> Option<String> {
    runs.iter().find_map(|r| {
        r.error.as_ref().map(|e| {
            format!(
                "initial condition {} replicate {}: {e}",
                r.ic_index, r.replicate
            )
        })
    })
}

fn cmd_sweep(a: &RunArgs) -> CliResult {
    let (sc, out) = load(a)?;
    let sched = require_schedule(&sc)?;
    let ics = require_initial(&sc)?;
    let runs = batch_simulate_with_trajectories(
        &sc.params,
        &sc.regions,
        sched,
        ics,
        &sc.sim,
        sc.replicates,
    )?;
    write_file(&out, "sweep.json", &to_json(&sweep_json(&sc, &runs)))?;
    if a.csv_per_trajectory {
        for r in &runs {
            if let Some(t) = &r.trajectory {
                let name = format!("traj_{:03}_{:02}.csv", r.ic_index, r.replicate);
                write_file(&out, &name, &trajectory_csv(t))?;
                if a.gnuplot {
                    let gp = gnuplot_script(&name, &thresholds(&sc.regions));
                    write_file(&out, &name.replace(".csv", ".gp"), &gp)?;
                }
            }
        }
    }
    for (k, v) in counts(&runs) {
        println!("{k}: {v}");
    }
    match first_integration_error(&runs) {
        Some(e) => Err(CliError::Integration(e)),
        None => Ok(()),
    }
}

fn synthesis_json(
    p: &ModelParams<f64>,
    rs: &RegionSet<f64>,
    syn: &Synthesis<f64>,
) -> serde_json::Value {
    let u_n = rs.lower_of(rs.n());
    let dm = delta_min(p, u_n).ok();
    json!({
        "synthesis": syn,
        "y_hat": y_hat(p),
        "delta_min": dm.map(|d| d.0),
        "delta_argmin": dm.map(|d| d.1),
        "min_region_count": min_region_count(p, u_n).ok(),
    })
}

fn cmd_synthesize(a: &SynthArgs) -> CliResult {
    let sc = Scenario::load(&a.scenario)?;
    let out = a.out.clone().unwrap_or_else(|| sc.output_dir.clone());
    let syn = match (a.d_star, &sc.synthesis) {
        (Some(d), _) => synthesize(&sc.params, &sc.regions, d, a.margin.unwrap_or(0.0))?,
        (None, Some(s)) if a.margin.is_none() => s.clone(),
        (None, _) => {
            let d =
                sc.schedule.as_ref().map(|s| s.last()).ok_or_else(|| {
                    CliError::Usage("no set-point dilution: pass --d-star".into())
                })?;
            synthesize(&sc.params, &sc.regions, d, a.margin.unwrap_or(0.0))?
        }
    };
    write_file(
        &out,
        "synthesis.json",
        &to_json(&synthesis_json(&sc.params, &sc.regions, &syn)),
    )?;
    match &syn {
        Synthesis::Feasible { schedule, .. } => {
            let rates: Vec<String> = schedule.iter().map(|d| format!("{d:.6}")).collect();
            println!("feasible: [{}]", rates.join(", "));
            Ok(())
        }
        Synthesis::Infeasible(r) => Err(CliError::Failed(format!(
            "infeasible at region {}: {}",
            r.region, r.reason
        ))),
    }
}

/// Human-readable condition table.
pub fn format_report(r: &ConditionReport<f64>) -> String {
    let mut s = String::new();
    let margin = |m: &Option<f64>| m.map_or("n/a".to_string(), |v| format!("{v:+.6}"));
    for (i, (ok, m)) in r.cond_lb.iter().zip(&r.lb_margins).enumerate() {
        let _ = writeln!(
            s,
            "cond_lb_{}  {}  {}",
            i + 1,
            if *ok { "ok  " } else { "FAIL" },
            margin(m)
        );
    }
    for (i, (ok, m)) in r.cond_ub.iter().zip(&r.ub_margins).enumerate() {
        let _ = writeln!(
            s,
            "cond_ub_{}  {}  {}",
            i + 1,
            if *ok { "ok  " } else { "FAIL" },
            margin(m)
        );
    }
    let _ = writeln!(
        s,
        "cond_top   {}  {}",
        if r.cond_top { "ok  " } else { "FAIL" },
        margin(&r.top_margin)
    );
    if r.pass {
        s.push_str("PASS\n");
    } else {
        let _ = writeln!(s, "FAIL: {}", r.failures().join(", "));
    }
    s
}

fn cmd_verify(a: &ScenarioArgs) -> CliResult {
    let sc = Scenario::load(&a.scenario)?;
    let sched = require_schedule(&sc)?;
    let rep = check_conditions(&sc.params, &sc.regions, sched)?;
    print!("{}", format_report(&rep));
    if rep.pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "conditions fail: {}",
            rep.failures().join(", ")
        )))
    }
}

fn graph_files(out: &Path, stem: &str, g: &TransitionGraph) -> CliResult {
    write_file(out, &format!("{stem}.dot"), &export_dot(g))?;
    write_file(
        out,
        &format!("{stem}.json"),
        &to_json(&json!({ "graph": g.to_json(), "adjacency": g.adjacency() })),
    )
}

fn cmd_graph(a: &RunArgs) -> CliResult {
    let (sc, out) = load(a)?;
    let sched = require_schedule(&sc)?;
    let pred = predict_graph(&sc.params, &sc.regions, sched)?;
    graph_files(&out, "predicted", &pred)?;
    println!(
        "predicted: {} edges, deterministic {}",
        pred.edges().len(),
        pred.is_deterministic()
    );
    if !sc.initial.is_empty() {
        let runs = batch_simulate_with_trajectories(
            &sc.params,
            &sc.regions,
            sched,
            &sc.initial,
            &sc.sim,
            sc.replicates,
        )?;
        let emp = empirical_graph(runs.iter().filter_map(|r| r.outcome.as_ref()))?;
        graph_files(&out, "empirical", &emp)?;
        let diff = compare(&pred, &emp);
        write_file(&out, "compare.json", &to_json(&diff))?;
        println!(
            "empirical: missing {:?}, extra {:?}",
            diff.missing, diff.extra
        );
        if let Some(e) = first_integration_error(&runs) {
            return Err(CliError::Integration(e));
        }
    }
    Ok(())
}

/// Reference plant constants.
pub fn reference_params() -> ModelParams<f64> {
    ModelParams::new(ParamValues {
        mu_max: 0.74,
        k_s: 0.59,
        k_i: 16.4,
        k: 30.0,
        alpha: 11.0,
        s_in: 30.0,
    })
    .expect("reference parameters are valid")
}

pub const REFERENCE_RATES: [f64; 4] = [0.19, 0.29, 0.40, 0.47];
/// Second rate raised so the lower-bound condition of region 2 fails.
pub const FAILURE_A_RATES: [f64; 4] = [0.19, 0.39, 0.40, 0.47];
/// Third rate lowered so the upper-bound condition of region 3 fails.
pub const FAILURE_B_RATES: [f64; 4] = [0.19, 0.29, 0.33, 0.47];

pub fn reference_regions(kind: QuantizerKind) -> RegionSet<f64> {
    let a1 = make_equidistant(4.0, 4, QuantizerKind::Perfect, 0.0).expect("valid");
    match kind {
        QuantizerKind::Perfect => a1,
        QuantizerKind::Uncertain => inflate(&a1, 0.1).expect("valid"),
    }
}

pub fn reference_grid() -> Vec<State<f64>> {
    grid((1.0, 29.0, 7), (0.02, 0.95, 7))
}

/// Samples no closer than `every` apart in time, plus the last one.
fn decimated_csv(traj: &Trajectory<f64>, every: f64) -> String {
    let mut kept = Trajectory::default();
    let mut next = 0.0;
    for s in &traj.samples {
        if s.t + 1e-9 >= next {
            kept.samples.push(*s);
            next = s.t + every;
        }
    }
    if let (Some(l), Some(k)) = (traj.samples.last(), kept.samples.last()) {
        if l.t > k.t {
            kept.samples.push(*l);
        }
    }
    trajectory_csv(&kept)
}

fn tuning_table(
    p: &ModelParams<f64>,
    rs: &RegionSet<f64>,
    name: &str,
    rates: &[f64],
    csv: &mut String,
) -> CliResult<serde_json::Value> {
    let n = rs.n();
    let mut rows = Vec::new();
    for i in 1..=n {
        let (lo, hi) = if i < n {
            let iv = feasible_interval(p, rs.lower_of(i), rs.upper_of(i))?;
            (iv.lo, iv.hi)
        } else {
            (d_lower(p, rs.upper_of(n - 1))?, d_upper(p, rs.lower_of(n))?)
        };
        let _ = writeln!(
            csv,
            "{name},{i},{},{},{lo},{hi},{},{}",
            rs.lower_of(i),
            if i < n {
                rs.upper_of(i).to_string()
            } else {
                "inf".into()
            },
            hi - lo,
            rates[i - 1]
        );
        rows.push(json!({
            "region": i,
            "lower": rs.lower_of(i),
            "upper": if i < n { Some(rs.upper_of(i)) } else { None },
            "d_lower": lo,
            "d_upper": hi,
            "width": hi - lo,
            "rate": rates[i - 1],
            "rate_inside": lo < rates[i - 1] && rates[i - 1] < hi,
        }));
    }
    Ok(json!(rows))
}

struct Study {
    perfect: Vec<BatchRun<f64>>,
    random: Vec<BatchRun<f64>>,
}

fn study(
    p: &ModelParams<f64>,
    rs: &RegionSet<f64>,
    sched: &DilutionSchedule<f64>,
    seed: u64,
    replicates: usize,
) -> CliResult<Study> {
    let ics = reference_grid();
    let cfg = |mode| SimConfig {
        mode,
        t_max: 300.0,
        seed,
        ..SimConfig::default()
    };
    let perfect =
        batch_simulate_with_trajectories(p, rs, sched, &ics, &cfg(SimMode::PerfectEvent), 1)?;
    let random = batch_simulate_with_trajectories(
        p,
        rs,
        sched,
        &ics,
        &cfg(SimMode::DiscreteRandom),
        replicates,
    )?;
    for runs in [&perfect, &random] {
        if let Some(e) = first_integration_error(runs) {
            return Err(CliError::Integration(e));
        }
    }
    Ok(Study { perfect, random })
}

fn write_study(out: &Path, dir: &str, study: &Study, seed: u64) -> CliResult {
    for (mode, runs) in [("perfect", &study.perfect), ("random", &study.random)] {
        let body = json!({ "seed": seed, "counts": counts(runs), "runs": runs });
        write_file(out, &format!("{dir}/sweep_{mode}.json"), &to_json(&body))?;
        for r in runs.iter() {
            if let Some(t) = &r.trajectory {
                let name = format!("{dir}/traj_{mode}/{:03}_{:02}.csv", r.ic_index, r.replicate);
                write_file(out, &name, &decimated_csv(t, 1.0))?;
            }
        }
    }
    Ok(())
}

fn fraction(runs: &[BatchRun<f64>], pred: impl Fn(&Classification) -> bool) -> f64 {
    let hit = runs
        .iter()
        .filter(|r| r.outcome.as_ref().is_some_and(|o| pred(&o.classification)))
        .count();
    hit as f64 / runs.len() as f64
}

fn cmd_repro(a: &ReproArgs) -> CliResult {
    let out = &a.out;
    let p = reference_params();
    let a1 = reference_regions(QuantizerKind::Perfect);
    let a2 = reference_regions(QuantizerKind::Uncertain);
    let nominal = DilutionSchedule::new(REFERENCE_RATES.to_vec())?;
    let fail_a = DilutionSchedule::new(FAILURE_A_RATES.to_vec())?;
    let fail_b = DilutionSchedule::new(FAILURE_B_RATES.to_vec())?;

    // tuning tables
    let mut csv = String::from("set,region,lower,upper,d_lower,d_upper,width,rate\n");
    let t1 = tuning_table(&p, &a1, "A1", &REFERENCE_RATES, &mut csv)?;
    let t2 = tuning_table(&p, &a2, "A2", &REFERENCE_RATES, &mut csv)?;
    write_file(out, "tuning/intervals.csv", &csv)?;
    let mut curve = String::from("s,phi\n");
    for k in 0..=300 {
        let s = p.s_in() * k as f64 / 300.0;
        let _ = writeln!(curve, "{s},{}", p.productivity_phi(s)?);
    }
    write_file(out, "tuning/productivity.csv", &curve)?;
    let syn4 = synthesize(&p, &a1, 0.47, 0.01)?;
    let a1_n3 = make_equidistant(4.0, 3, QuantizerKind::Perfect, 0.0)?;
    let syn3 = synthesize(&p, &a1_n3, 0.47, 0.01)?;
    let tuning = json!({
        "a1": t1,
        "a2": t2,
        "synthesis_n4": synthesis_json(&p, &a1, &syn4),
        "synthesis_n3": synthesis_json(&p, &a1_n3, &syn3),
    });
    write_file(out, "tuning/tuning.json", &to_json(&tuning))?;

    // sweeps
    let rep_a1 = check_conditions(&p, &a1, &nominal)?;
    let rep_a2 = check_conditions(&p, &a2, &nominal)?;
    let nom_a1 = study(&p, &a1, &nominal, a.seed, 3)?;
    let nom_a2 = study(&p, &a2, &nominal, a.seed, 3)?;
    write_study(out, "sweep_a1", &nom_a1, a.seed)?;
    write_study(out, "sweep_a2", &nom_a2, a.seed)?;
    let sa = study(&p, &a1, &fail_a, a.seed, 1)?;
    let sb = study(&p, &a1, &fail_b, a.seed, 1)?;
    write_study(out, "failure_a", &sa, a.seed)?;
    write_study(out, "failure_b", &sb, a.seed)?;

    // graphs
    let mut graphs = serde_json::Map::new();
    for (name, sched, st) in [
        ("nominal", &nominal, &nom_a1),
        ("failure_a", &fail_a, &sa),
        ("failure_b", &fail_b, &sb),
    ] {
        let pred = predict_graph(&p, &a1, sched)?;
        let emp = empirical_graph(st.perfect.iter().filter_map(|r| r.outcome.as_ref()))?;
        graph_files(out, &format!("graphs/{name}_predicted"), &pred)?;
        graph_files(out, &format!("graphs/{name}_empirical"), &emp)?;
        let diff = compare(&pred, &emp);
        graphs.insert(
            name.into(),
            json!({
                "deterministic": pred.is_deterministic(),
                "downward_edges": pred.downward_edges().len(),
                "missing": diff.missing,
                "extra": diff.extra,
            }),
        );
    }

    let converged = |c: &Classification| matches!(c, Classification::ConvergedToTarget);
    let chatter_runs = sa
        .random
        .iter()
        .filter(|r| {
            r.trajectory
                .as_ref()
                .is_some_and(|t| !detect_chatter(t, &SimConfig::<f64>::default()).is_empty())
        })
        .count();
    let summary = json!({
        "seed": a.seed,
        "landmarks": {
            "s_bar": p.s_bar(),
            "mu_s_bar": p.mu_s_bar(),
            "mu_s_in": p.mu_s_in(),
            "s_diamond": p.s_diamond(),
            "phi_max": p.phi_max(),
            "productivity_ratio": p.y_equilibria(0.47)?.0 / p.phi_max(),
        },
        "verify": { "a1": rep_a1.pass, "a2": rep_a2.pass },
        "target_convergence": {
            "a1_perfect": fraction(&nom_a1.perfect, converged),
            "a1_random": fraction(&nom_a1.random, converged),
            "a2_perfect": fraction(&nom_a2.perfect, converged),
            "a2_random": fraction(&nom_a2.random, converged),
        },
        "failure_a": {
            "failures": check_conditions(&p, &a1, &fail_a)?.failures(),
            "perfect": counts(&sa.perfect),
            "random": counts(&sa.random),
            "chatter_runs": chatter_runs,
        },
        "failure_b": {
            "failures": check_conditions(&p, &a1, &fail_b)?.failures(),
            "perfect": counts(&sb.perfect),
            "random": counts(&sb.random),
        },
        "synthesis": { "n4": syn4.is_feasible(), "n3": syn3.is_feasible() },
        "graphs": graphs,
    });
    write_file(out, "summary.json", &to_json(&summary))?;
    println!("wrote {}", out.display());
    Ok(())
}
