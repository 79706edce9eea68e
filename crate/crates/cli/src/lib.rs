//! Command-line surface: wires JSON configs to the region, search, codec
//! and oracle engines and emits machine-readable results.
//!
//! Exit codes: 0 ok, 1 invariant failure, 2 parse, 3 convergence,
//! 4 infeasible, 5 resource.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hjscc_core::codec::{build_codebooks, run_experiment, ChannelMode, SimParams};
use hjscc_core::dmc::capacity;
use hjscc_core::io::{AuxSchema, ChannelSchema, ExperimentSchema, ScenarioSchema};
use hjscc_core::oracle::{exact_leakage, EnumerationBudget, LeakageReport};
use hjscc_core::region::RegionKind;
use hjscc_core::search::{frontier_sweep, SearchParams};
use hjscc_core::verify::run_verify;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable file, malformed JSON, invalid config. Exit 2.
    Parse(String),
    /// Solver hit its iteration cap. Exit 3.
    Convergence(String),
    /// No feasible point anywhere in the request. Exit 4.
    Infeasible(String),
    /// Resource guard tripped (codebook cap, enumeration budget, output IO).
    /// Exit 5.
    Resource(String),
    /// A verified invariant failed. Exit 1.
    InvariantFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvariantFailure(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Resource(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m)
            | CliError::Convergence(m)
            | CliError::Infeasible(m)
            | CliError::Resource(m)
            | CliError::InvariantFailure(m) => write!(f, "{m}"),
        }
    }
}

fn from_core(e: hjscc_core::Error) -> CliError {
    use hjscc_core::Error as E;
    match e {
        E::NoConvergence { .. } => CliError::Convergence(e.to_string()),
        E::NoFeasiblePoint => CliError::Infeasible(e.to_string()),
        E::SizeExplosion { .. } | E::BudgetExceeded { .. } | E::TensorTooLarge { .. } => {
            CliError::Resource(e.to_string())
        }
        other => CliError::Parse(other.to_string()),
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    R1,
    R2,
}

impl From<RegionArg> for RegionKind {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::R1 => RegionKind::R1,
            RegionArg::R2 => RegionKind::R2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hjscc",
    version,
    about = "Distortion-leakage regions and codec simulation for two-phase source-channel coding"
)]
pub struct Cli {
    /// Thread cap for parallel search (0 keeps the library default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity of a DMC from its transition-matrix JSON.
    Capacity {
        /// Channel JSON file.
        #[arg(long)]
        channel: PathBuf,
        /// Duality-gap stopping tolerance in bits.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also write the result JSON (and its manifest) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distortion-leakage frontier sweep, written as CSV.
    Frontier {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Constraint system to search.
        #[arg(long, value_enum, default_value_t = RegionArg::R1)]
        region: RegionArg,
        /// Grid as two comma-separated lists "d1,...;d2,..." of caps.
        #[arg(long)]
        grid: String,
        /// Restarts per grid cell.
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo simulation of the layered-binning scheme.
    Simulate {
        /// Bundled experiment JSON (scenario + aux + sim parameters).
        #[arg(long, conflicts_with_all = ["scenario", "aux"])]
        experiment: Option<PathBuf>,
        /// Scenario JSON (with --aux) as an alternative to --experiment.
        #[arg(long, requires = "aux")]
        scenario: Option<PathBuf>,
        /// Auxiliary-triple JSON.
        #[arg(long, requires = "scenario")]
        aux: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Override the blocklength.
        #[arg(long)]
        n: Option<usize>,
        /// Override the typicality slack.
        #[arg(long)]
        delta: Option<f64>,
        /// Override the experiment seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output summary JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-trial CSV.
        #[arg(long)]
        trial_csv: Option<PathBuf>,
    },
    /// Randomized invariant suites on a scenario.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restarts for the frontier-gap comparison.
        #[arg(long, default_value_t = 4)]
        budget: usize,
        /// Also write the report JSON (and its manifest) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Run manifest written next to every produced file.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    command: &'a str,
    tool_version: &'a str,
    seed: Option<u64>,
    config: serde_json::Value,
    outputs: Vec<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Resource(format!("writing {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(
    command: &str,
    seed: Option<u64>,
    config: serde_json::Value,
    outputs: &[&Path],
) -> CliResult<()> {
    let manifest = RunManifest {
        schema_version: 1,
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(outputs[0]);
    write_output(&path, &serde_json::to_string_pretty(&manifest).unwrap())
}

fn parse_grid(grid: &str) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let parse_list = |part: &str| -> CliResult<Vec<f64>> {
        part.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Parse(format!("grid value {tok:?}: {e}")))
            })
            .collect()
    };
    let (d1, d2) = grid
        .split_once(';')
        .ok_or_else(|| CliError::Parse("grid must be \"d1,...;d2,...\"".into()))?;
    let d1 = parse_list(d1)?;
    let d2 = parse_list(d2)?;
    if d1.is_empty() || d2.is_empty() {
        return Err(CliError::Parse("grid lists must be nonempty".into()));
    }
    Ok((d1, d2))
}

fn fmt_cell(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9}")
    }
}

/// Summary JSON shape for `simulate`.
#[derive(Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    summary: hjscc_core::codec::ExperimentSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    leakage: Option<LeakageReport>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        // Ignore the error when a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match cli.command {
        Command::Capacity { channel, tol, out } => cmd_capacity(&channel, tol, out.as_deref()),
        Command::Frontier {
            scenario,
            region,
            grid,
            budget,
            seed,
            out,
        } => cmd_frontier(&scenario, region.into(), &grid, budget, seed, &out),
        Command::Simulate {
            experiment,
            scenario,
            aux,
            trials,
            n,
            delta,
            seed,
            out,
            trial_csv,
        } => cmd_simulate(
            experiment.as_deref(),
            scenario.as_deref(),
            aux.as_deref(),
            trials,
            n,
            delta,
            seed,
            &out,
            trial_csv.as_deref(),
        ),
        Command::Verify {
            scenario,
            samples,
            seed,
            budget,
            out,
        } => cmd_verify(&scenario, samples, seed, budget, out.as_deref()),
    }
}

fn cmd_capacity(channel: &Path, tol: f64, out: Option<&Path>) -> CliResult<()> {
    if tol <= 0.0 {
        return Err(CliError::Parse("tolerance must be positive".into()));
    }
    let schema: ChannelSchema = read_json(channel)?;
    let ch = schema.to_channel().map_err(from_core)?;
    let result = capacity(&ch, tol).map_err(from_core)?;
    let json = serde_json::to_string_pretty(&result).unwrap();
    println!("{json}");
    if let Some(path) = out {
        write_output(path, &json)?;
        write_manifest(
            "capacity",
            None,
            serde_json::json!({"channel": schema, "tol": tol}),
            &[path],
        )?;
    }
    Ok(())
}

fn cmd_frontier(
    scenario_path: &Path,
    region: RegionKind,
    grid: &str,
    budget: usize,
    seed: u64,
    out: &Path,
) -> CliResult<()> {
    let schema: ScenarioSchema = read_json(scenario_path)?;
    let sc = schema.to_scenario().map_err(from_core)?;
    let (d1_grid, d2_grid) = parse_grid(grid)?;
    let params = SearchParams {
        region,
        budget,
        seed,
        aux_sizes: None,
        max_sweeps: 16,
    };
    let cells = frontier_sweep(&sc, &d1_grid, &d2_grid, &params).map_err(from_core)?;

    let mut csv = String::from("d1_max,d2_max,leakage_lb,d1,d2,feasible,restarts_used\n");
    let mut any_feasible = false;
    for cell in &cells {
        let (leak, d1, d2, feasible) = match &cell.best {
            Some((_, p)) => {
                any_feasible = true;
                (p.leakage_lb, p.d1, p.d2, true)
            }
            None => (f64::NAN, f64::NAN, f64::NAN, false),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_cell(cell.d1_max),
            fmt_cell(cell.d2_max),
            fmt_cell(leak),
            fmt_cell(d1),
            fmt_cell(d2),
            feasible,
            cell.restarts_used
        ));
    }
    write_output(out, &csv)?;
    write_manifest(
        "frontier",
        Some(seed),
        serde_json::json!({
            "scenario": schema,
            "region": match region { RegionKind::R1 => "r1", RegionKind::R2 => "r2" },
            "grid": grid,
            "budget": budget,
        }),
        &[out],
    )?;
    if !any_feasible {
        return Err(CliError::Infeasible(
            "no grid cell admitted a feasible point".into(),
        ));
    }
    println!(
        "frontier: {} cells -> {}",
        cells.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    experiment: Option<&Path>,
    scenario: Option<&Path>,
    aux: Option<&Path>,
    trials: usize,
    n: Option<usize>,
    delta: Option<f64>,
    seed: Option<u64>,
    out: &Path,
    trial_csv: Option<&Path>,
) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::Parse("trials must be at least 1".into()));
    }
    let (exp, config_json) = match (experiment, scenario, aux) {
        (Some(path), _, _) => {
            let exp: ExperimentSchema = read_json(path)?;
            let json = serde_json::to_value(&exp).unwrap();
            (exp, json)
        }
        (None, Some(sc_path), Some(aux_path)) => {
            let scenario: ScenarioSchema = read_json(sc_path)?;
            let aux: AuxSchema = read_json(aux_path)?;
            let sim = SimParams::new(
                n.unwrap_or(8),
                delta.unwrap_or(0.2),
                ChannelMode::IdealPipe,
                seed.unwrap_or(0),
            )
            .map_err(from_core)?;
            let exp = ExperimentSchema {
                schema_version: hjscc_core::io::SCHEMA_VERSION,
                scenario,
                aux,
                sim,
                exact_leakage: false,
            };
            let json = serde_json::to_value(&exp).unwrap();
            (exp, json)
        }
        _ => {
            return Err(CliError::Parse(
                "simulate needs --experiment or both --scenario and --aux".into(),
            ))
        }
    };

    let sc = exp.scenario.to_scenario().map_err(from_core)?;
    let aux_channel = exp.aux.to_aux().map_err(from_core)?;
    let mut sim = exp.sim;
    if let Some(n) = n {
        sim.n = n;
    }
    if let Some(delta) = delta {
        sim.delta = delta;
    }
    if let Some(seed) = seed {
        sim.seed = seed;
    }
    let sim = SimParams::new(sim.n, sim.delta, sim.channel_mode, sim.seed)
        .map(|mut p| {
            p.book_cap = exp.sim.book_cap;
            p
        })
        .map_err(from_core)?;

    let cb = build_codebooks(&aux_channel, &sc, &sim).map_err(from_core)?;
    let (summary, rows) = run_experiment(&cb, &sc, trials).map_err(from_core)?;
    let leakage = if exp.exact_leakage {
        Some(exact_leakage(&cb, &sc, &EnumerationBudget::default()).map_err(from_core)?)
    } else {
        None
    };

    let output = SimulateOutput { summary, leakage };
    let json = serde_json::to_string_pretty(&output).unwrap();
    println!("{json}");
    write_output(out, &json)?;

    let mut outputs: Vec<&Path> = vec![out];
    if let Some(csv_path) = trial_csv {
        let mut csv = String::from("trial,enc_err,dec1_err,dec2_err,d1,d2\n");
        for row in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.trial,
                row.enc_err as u8,
                row.dec1_err as u8,
                row.dec2_err as u8,
                fmt_cell(row.d1),
                fmt_cell(row.d2)
            ));
        }
        write_output(csv_path, &csv)?;
        outputs.push(csv_path);
    }
    write_manifest("simulate", Some(sim.seed), config_json, &outputs)?;
    Ok(())
}

fn cmd_verify(
    scenario_path: &Path,
    samples: usize,
    seed: u64,
    budget: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let schema: ScenarioSchema = read_json(scenario_path)?;
    let sc = schema.to_scenario().map_err(from_core)?;
    let report = run_verify(&sc, samples, seed, budget).map_err(from_core)?;

    println!(
        "leakage-form equivalence: {}/{} checked, max dev {:.3e}",
        report.equivalence_checked, report.samples, report.equivalence_max_dev
    );
    println!(
        "key-rate identity: max dev {:.3e}",
        report.key_identity_max_dev
    );
    println!(
        "r1 => r2 inclusion: {} feasible, {} violations",
        report.inclusion_feasible_r1, report.inclusion_violations
    );
    match (&report.tight_region_cells, &report.tight_region_skipped) {
        (Some(cells), _) => {
            for c in cells {
                println!(
                    "tight-region gap at (d1<={:.4}, d2<={:.4}): r1 {:?} r2 {:?} gap {:?}",
                    c.d1_max, c.d2_max, c.best_r1, c.best_r2, c.gap
                );
            }
        }
        (None, Some(reason)) => println!("tight-region gap check skipped: {reason}"),
        _ => {}
    }

    if let Some(path) = out {
        write_output(path, &serde_json::to_string_pretty(&report).unwrap())?;
        write_manifest(
            "verify",
            Some(seed),
            serde_json::json!({"scenario": schema, "samples": samples, "budget": budget}),
            &[path],
        )?;
    }

    if report.passed() {
        println!("verify: PASS ({} samples)", report.samples);
        Ok(())
    } else {
        Err(CliError::InvariantFailure(format!(
            "invariant failure: {report:?}"
        )))
    }
}
