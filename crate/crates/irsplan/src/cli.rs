//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use irsplan_core::metrics::effective_power;
use irsplan_core::units::mw_to_dbm;
use irsplan_core::{ChannelKnowledge, CoverageParams, Instance};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::run::{self, Algorithm, Deadline, ReportDoc, SolutionDoc};
use crate::scenario::Scenario;
use crate::tables;
use crate::trace::generate_knowledge_parallel;

#[derive(Debug, Parser)]
#[command(name = "irsplan", version, about = "Multi-IRS deployment planning")]
pub struct Cli {
    /// Worker threads (1 gives bit-reproducible output).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the radio-map tables of a scenario.
    Trace {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the deployment problem.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        knowledge: PathBuf,
        /// bb, refine, fixed-state or max-tile
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        out: PathBuf,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Recorded in the report; every solver is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the ILP as `model.lp`.
        #[arg(long)]
        dump_lp: bool,
        /// Override the scenario's coverage target.
        #[arg(long)]
        eta0: Option<f64>,
    },
    /// Export the per-grid radio map of a solution.
    Map {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        knowledge: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all algorithms over a sweep of coverage targets.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        knowledge: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.6, 0.7, 0.8, 0.9, 1.0])]
        eta_sweep: Vec<f64>,
        /// Seconds, per run.
        #[arg(long)]
        time_limit: Option<f64>,
    },
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn time_limit(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("invalid time limit {s}")))
    })
    .transpose()
}

#[derive(Serialize)]
struct Provenance<'a> {
    scenario_sha256: &'a str,
    tool_version: &'a str,
    tx_power_dbm: f64,
    reflection_coefficient: f64,
    cull_db: f64,
    direct_floor_dbm: f64,
    irs_gain_factor: f64,
    num_grids: usize,
    num_sites: usize,
}

pub fn cmd_trace(scenario: &Path, out: &Path) -> Result<i32> {
    let sc = Scenario::load(scenario)?;
    log::info!(
        "tracing {} grids and {} sites",
        sc.scene.num_grids(),
        sc.scene.sites().len()
    );
    let k = generate_knowledge_parallel(&sc.scene, &sc.tracer, sc.doc.tx_power_dbm);
    tables::save_knowledge(&k, out)?;
    let prov = Provenance {
        scenario_sha256: &sc.sha256,
        tool_version: env!("CARGO_PKG_VERSION"),
        tx_power_dbm: sc.doc.tx_power_dbm,
        reflection_coefficient: sc.tracer.reflection_coefficient,
        cull_db: sc.tracer.cull_threshold_db,
        direct_floor_dbm: sc.tracer.direct_floor_dbm,
        irs_gain_factor: sc.tracer.irs_departure_gain,
        num_grids: sc.scene.num_grids(),
        num_sites: sc.scene.sites().len(),
    };
    write_file(&out.join(tables::PROVENANCE), &to_json(&prov)?)?;
    Ok(0)
}

/// Scenario, knowledge and the dense instance built from them.
pub fn load_problem(scenario: &Path, knowledge: &Path, eta0: Option<f64>) -> Result<(Scenario, ChannelKnowledge, Instance)> {
    let sc = Scenario::load(scenario)?;
    let k = tables::load_knowledge(knowledge)?;
    tables::check_against_scene(&k, &sc.scene, knowledge)?;
    let coverage = match eta0 {
        Some(e) => CoverageParams::from_dbm(sc.doc.p_min_dbm, e).map_err(|e| CliError::Usage(e.to_string()))?,
        None => sc.coverage,
    };
    let inst = Instance::new(&sc.scene, &k, sc.cost, coverage).map_err(|e| CliError::schema(knowledge, e.to_string()))?;
    Ok((sc, k, inst))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_solve(
    scenario: &Path,
    knowledge: &Path,
    algorithm: &str,
    out: &Path,
    limit: Option<f64>,
    seed: Option<u64>,
    dump_lp: bool,
    eta0: Option<f64>,
) -> Result<i32> {
    let algorithm: Algorithm = algorithm.parse()?;
    let limit = time_limit(limit)?;
    let (sc, _k, inst) = load_problem(scenario, knowledge, eta0)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    if dump_lp {
        let model = run::model_for(algorithm, &inst)?;
        write_file(&out.join("model.lp"), model.to_lp_string().as_bytes())?;
    }
    let report = run::run(algorithm, &inst, &Deadline::new(limit))?;
    let sol_doc = SolutionDoc::new(algorithm, &report.solution, &sc.scene, &inst, sc.doc.p_min_dbm, &sc.sha256);
    write_file(&out.join("solution.json"), &to_json(&sol_doc)?)?;
    let rep_doc = ReportDoc::new(&report, sol_doc, seed, limit);
    write_file(&out.join("report.json"), &to_json(&rep_doc)?)?;
    Ok(run::status_exit_code(report.status()))
}

pub fn cmd_map(solution: &Path, knowledge: &Path, out: &Path) -> Result<i32> {
    let bytes = fs::read(solution).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::NotFound {
            what: "solution file".into(),
            path: solution.to_path_buf(),
        },
        _ => CliError::io(solution, e),
    })?;
    let doc: SolutionDoc = serde_json::from_slice(&bytes).map_err(|e| CliError::schema(solution, e.to_string()))?;
    let k = tables::load_knowledge(knowledge)?;
    let placements = doc.placements();
    let p_min_mw = irsplan_core::units::dbm_to_mw(doc.p_min_dbm);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["grid_id", "x", "y", "beta_dbm", "effective_dbm", "covered"])
        .map_err(csv_err)?;
    for g in &doc.grids {
        let p = effective_power(g.id, &placements, &k, doc.elements_per_tile)
            .map_err(|e| CliError::schema(knowledge, e.to_string()))?;
        w.write_record([
            g.id.to_string(),
            g.x.to_string(),
            g.y.to_string(),
            format!("{:.6}", mw_to_dbm(k.beta(g.id))),
            format!("{:.6}", mw_to_dbm(p)),
            u8::from(p >= p_min_mw).to_string(),
        ])
        .map_err(csv_err)?;
    }
    let data = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(out, &data)?;
    Ok(0)
}

pub fn cmd_compare(scenario: &Path, knowledge: &Path, out: &Path, sweep: &[f64], limit: Option<f64>) -> Result<i32> {
    let limit = time_limit(limit)?;
    let (sc, _k, base) = load_problem(scenario, knowledge, None)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["algorithm", "eta0", "cost", "coverage", "wall_time_s", "status"])
        .map_err(csv_err)?;
    for &eta in sweep {
        let cov = CoverageParams::from_dbm(sc.doc.p_min_dbm, eta).map_err(|e| CliError::Usage(e.to_string()))?;
        let inst = base.with_coverage(cov);
        for alg in Algorithm::ALL {
            let r = match run::run(alg, &inst, &Deadline::new(limit)) {
                Ok(r) => r,
                // a baseline that cannot be built (no zero orientation) is reported, not fatal
                Err(CliError::Usage(msg)) => {
                    log::warn!("{alg} at eta0 {eta}: {msg}");
                    w.write_record([alg.name(), &eta.to_string(), "", "", "", "error"])
                        .map_err(csv_err)?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            w.write_record([
                alg.name().to_string(),
                eta.to_string(),
                r.solution.cost.total.to_string(),
                r.solution.coverage_rate.to_string(),
                format!("{:.6}", r.wall_time.as_secs_f64()),
                r.status().as_str().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let data = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&out.join("compare.csv"), &data)?;
    Ok(0)
}

/// Runs the tool on `args` and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => CliError::Usage(String::new()).exit_code(),
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return CliError::Usage(String::new()).exit_code();
        }
        // fails only if a global pool already exists (repeated in-process calls)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Trace { scenario, out } => cmd_trace(&scenario, &out),
        Command::Solve {
            scenario,
            knowledge,
            algorithm,
            out,
            time_limit,
            seed,
            dump_lp,
            eta0,
        } => cmd_solve(&scenario, &knowledge, &algorithm, &out, time_limit, seed, dump_lp, eta0),
        Command::Map {
            solution,
            knowledge,
            out,
        } => cmd_map(&solution, &knowledge, &out),
        Command::Compare {
            scenario,
            knowledge,
            out,
            eta_sweep,
            time_limit,
        } => cmd_compare(&scenario, &knowledge, &out, &eta_sweep, time_limit),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
