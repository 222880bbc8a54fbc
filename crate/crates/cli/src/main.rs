//! `aanet` — route, sweep and analyze integrated ground/air/space networks.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 no route,
//! 4 configuration error, 5 data error.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aanet::analysis::{self, DegreeRow, TravelOptions};
use aanet::graph::{build_digraph, degree_distribution};
use aanet::routing;
use aanet::scenario::{self, CorridorConfig, Scenario, Trajectories};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};

const EXIT_IO: u8 = 1;
const EXIT_NO_ROUTE: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_DATA: u8 = 5;

#[derive(Parser)]
#[command(name = "aanet", version, about = "Minimum-delay routing over ground, air and space nodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest-delay route between two nodes of a configured scenario.
    Route(RouteArgs),
    /// Proposed vs. baseline schemes over random realizations; writes sweep.csv.
    Sweep(SweepArgs),
    /// Route from a ground BS to a flight at one instant of a trajectory CSV.
    SnapshotRoute(SnapshotArgs),
    /// Writes the feasible-link digraph as edges.csv.
    GraphExport(ScenarioArgs),
    /// Cumulative out-degree distribution; writes degree_cdd.csv.
    Degree(DegreeArgs),
    /// Routes to a flight over its whole trajectory; writes epochs and CDFs.
    Travel(TravelArgs),
    /// Generates the synthetic North-Atlantic corridor as a trajectory CSV.
    Corridor(CorridorArgs),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// Relay aircraft in the synthetic layout.
    #[arg(long)]
    n: Option<usize>,
    /// Synthetic realization index.
    #[arg(long, default_value_t = 0)]
    realization: u64,
}

#[derive(Args)]
struct RouteArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    realizations: Option<u64>,
    /// Comma-separated relay counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated file sizes in bits.
    #[arg(long, value_delimiter = ',')]
    file_sizes: Option<Vec<f64>>,
}

#[derive(Args)]
struct FlightArgs {
    /// Trajectory CSV; defaults to `flight.csv` in the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    flight: Option<String>,
}

#[derive(Args)]
struct SnapshotArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    flight: FlightArgs,
    /// Epoch seconds.
    #[arg(long)]
    time: i64,
}

#[derive(Args)]
struct DegreeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    realizations: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Use the aircraft of this trajectory CSV at `--time` instead of synthetic layouts.
    #[arg(long, requires = "time")]
    csv: Option<PathBuf>,
    #[arg(long)]
    time: Option<i64>,
}

#[derive(Args)]
struct TravelArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    flight: FlightArgs,
    /// Seconds between epochs.
    #[arg(long)]
    step: Option<i64>,
}

#[derive(Args)]
struct CorridorArgs {
    #[arg(long, default_value_t = 200)]
    flights: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] aanet::Error),
    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use aanet::Error as E;
        match self {
            CliError::Config(ConfigError::Read { .. }) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(E::Io { .. }) | CliError::Io(_) => EXIT_IO,
            CliError::Core(E::Load { .. } | E::Csv { .. } | E::Json { .. } | E::UnknownFlight(_)) => {
                EXIT_DATA
            }
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

type Outcome = Result<ExitCode, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Route(a) => cmd_route(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::SnapshotRoute(a) => cmd_snapshot_route(a),
        Command::GraphExport(a) => cmd_graph_export(a),
        Command::Degree(a) => cmd_degree(a),
        Command::Travel(a) => cmd_travel(a),
        Command::Corridor(a) => cmd_corridor(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(aanet::Error::Load { problems, .. }) = &e {
                for p in problems {
                    eprintln!("  {p}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &common.out_dir {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    Ok(cfg.out_dir.clone())
}

/// Explicit `[[nodes]]` if configured, else a synthetic realization.
fn scenario_for(cfg: &RunConfig, args: &ScenarioArgs) -> Result<Scenario, CliError> {
    if let Some(sc) = cfg.explicit_scenario()? {
        return Ok(sc);
    }
    let mut syn = cfg.synthetic()?;
    if let Some(n) = args.n {
        syn.n_intermediate = n;
    }
    Ok(scenario::generate_realization(&syn, args.realization)?)
}

fn print_route(
    nodes: Vec<aanet::link::Node>,
    params: &aanet::link::LinkParams,
    src: &str,
    dst: &str,
) -> Outcome {
    let g = build_digraph(nodes, params)?;
    let (s, d) = (g.lookup(src)?, g.lookup(dst)?);
    match routing::shortest_path(&g, s, d)? {
        Some(route) => {
            print!("{}", report::route_report(&g, &route));
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("no route from {src} to {dst}");
            Ok(ExitCode::from(EXIT_NO_ROUTE))
        }
    }
}

fn cmd_route(a: RouteArgs) -> Outcome {
    let cfg = load(&a.scenario.common)?;
    let sc = scenario_for(&cfg, &a.scenario)?;
    let src = a.source.unwrap_or(sc.source_id);
    let dst = a.target.unwrap_or(sc.target_id);
    if src.is_empty() || dst.is_empty() {
        return Err(
            ConfigError::Invalid("no route endpoints: set [route] or --source/--target".into()).into()
        );
    }
    print_route(sc.nodes, &sc.params, &src, &dst)
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let cfg = load(&a.common)?;
    let base = cfg.synthetic()?;
    let n_list = a.n.unwrap_or_else(|| cfg.sweep.n_intermediate.clone());
    let sizes = a.file_sizes.unwrap_or_else(|| cfg.sweep.file_sizes_bits.clone());
    let realizations = a.realizations.unwrap_or(cfg.sweep.realizations);
    let records = analysis::run_sweep(&base, &n_list, &sizes, realizations)?;
    let path = out_dir(&cfg)?.join("sweep.csv");
    analysis::emit_csv(&records, &path)?;

    println!(
        "{:>6}  {:>12}  {:<17}  {:>9}  {:>14}  {:>9}",
        "n", "file_bits", "scheme", "routed", "mean_delay_ms", "mean_hops"
    );
    for s in analysis::summarize(&records) {
        let delay = s.mean_delay.map_or("-".to_owned(), |d| format!("{:.3}", d * 1e3));
        let hops = s.mean_hops.map_or("-".to_owned(), |h| format!("{h:.3}"));
        println!(
            "{:>6}  {:>12}  {:<17}  {:>9}  {:>14}  {:>9}",
            s.n_intermediate,
            s.file_size,
            s.scheme.as_str(),
            format!("{}/{}", s.routed, s.realizations),
            delay,
            hops
        );
    }
    println!("wrote {} records to {}", records.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn load_flights(cfg: &RunConfig, f: &FlightArgs) -> Result<(Trajectories, String), CliError> {
    let path = match (&f.csv, &cfg.flight.csv) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => cfg.resolve(p),
        (None, None) => {
            return Err(ConfigError::Invalid("no trajectory CSV: set flight.csv or --csv".into()).into())
        }
    };
    let flights = scenario::load_flight_csv(&path)?;
    let id = f.flight.clone().unwrap_or_else(|| cfg.flight.flight_id.clone());
    if !flights.contains_key(&id) {
        return Err(aanet::Error::UnknownFlight(id).into());
    }
    Ok((flights, id))
}

fn flight_bs(cfg: &RunConfig) -> Result<aanet::link::Node, CliError> {
    let site = scenario::site_preset(&cfg.flight.bs_site).ok_or_else(|| {
        ConfigError::Invalid(format!("flight.bs_site: unknown site `{}`", cfg.flight.bs_site))
    })?;
    Ok(scenario::ground_station("BS", site, &cfg.profiles.ground_bs.profile())?)
}

fn cmd_snapshot_route(a: SnapshotArgs) -> Outcome {
    let cfg = load(&a.common)?;
    let (flights, id) = load_flights(&cfg, &a.flight)?;
    let bs = flight_bs(&cfg)?;
    let aircraft =
        scenario::snapshot(&flights, a.time, cfg.flight.tolerance_s, &cfg.profiles.aircraft.profile())?;
    println!("snapshot t={}: {} aircraft", a.time, aircraft.len());
    if !aircraft.iter().any(|n| n.id == id) {
        println!("no route from {} to {id}: flight has no sample within {} s", bs.id, cfg.flight.tolerance_s);
        return Ok(ExitCode::from(EXIT_NO_ROUTE));
    }
    let src = bs.id.clone();
    let mut nodes = vec![bs];
    nodes.extend(aircraft);
    print_route(nodes, &cfg.params()?, &src, &id)
}

fn cmd_graph_export(a: ScenarioArgs) -> Outcome {
    let cfg = load(&a.common)?;
    let sc = scenario_for(&cfg, &a)?;
    let g = build_digraph(sc.nodes, &sc.params)?;
    let path = out_dir(&cfg)?.join("edges.csv");
    g.export_edge_list(&path)?;
    println!("{} nodes, {} edges -> {}", g.len(), g.edge_count(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_degree(a: DegreeArgs) -> Outcome {
    let cfg = load(&a.common)?;
    let rows = if let (Some(csv), Some(t)) = (&a.csv, a.time) {
        let flights = scenario::load_flight_csv(csv)?;
        let mut nodes = vec![flight_bs(&cfg)?];
        let aircraft =
            scenario::snapshot(&flights, t, cfg.flight.tolerance_s, &cfg.profiles.aircraft.profile())?;
        let n = aircraft.len();
        nodes.extend(aircraft);
        let g = build_digraph(nodes, &cfg.params()?)?;
        DegreeRow::from_distribution(n, &degree_distribution(&g))
    } else {
        let base = cfg.synthetic()?;
        let realizations = a.realizations.unwrap_or(cfg.sweep.realizations);
        let n_list = a.n.unwrap_or_else(|| cfg.sweep.n_intermediate.clone());
        let mut rows = Vec::new();
        for n in n_list {
            let syn = aanet::scenario::SyntheticConfig { n_intermediate: n, ..base.clone() };
            rows.extend(DegreeRow::from_distribution(
                n,
                &analysis::mean_degree_distribution(&syn, realizations)?,
            ));
        }
        rows
    };
    let path = out_dir(&cfg)?.join("degree_cdd.csv");
    analysis::write_degree_csv(&rows, &path)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_travel(a: TravelArgs) -> Outcome {
    let cfg = load(&a.common)?;
    let (flights, id) = load_flights(&cfg, &a.flight)?;
    let bs = flight_bs(&cfg)?;
    let opts = TravelOptions {
        step: a.step.unwrap_or(cfg.flight.step_s),
        tolerance: cfg.flight.tolerance_s,
        aircraft: cfg.profiles.aircraft.profile(),
    };
    let rep = analysis::travel_analysis(&flights, &id, &bs, &[], &cfg.params()?, &opts)?;
    let dir = out_dir(&cfg)?;
    analysis::write_epochs_csv(&rep.epochs, &dir.join("epochs.csv"))?;
    write_cdf(rep.hops.as_ref(), &dir.join("cdf_hops.csv"))?;
    write_cdf(rep.delay.as_ref(), &dir.join("cdf_delay.csv"))?;
    println!("flight {id}: {} epochs, {} without route", rep.epochs.len(), rep.no_route);
    println!("connectivity: {:.4}", rep.connectivity);
    if let (Some(h), Some(d)) = (&rep.hops, &rep.delay) {
        println!("median hops: {}", quantile(&h.values, &h.fractions, 0.5));
        println!("median delay_ms: {:.3}", quantile(&d.values, &d.fractions, 0.5) * 1e3);
    }
    Ok(ExitCode::SUCCESS)
}

fn quantile(values: &[f64], fractions: &[f64], q: f64) -> f64 {
    let i = fractions.partition_point(|&f| f < q);
    values[i.min(values.len() - 1)]
}

fn write_cdf(series: Option<&analysis::CdfSeries>, path: &Path) -> Result<(), CliError> {
    match series {
        Some(s) => analysis::write_cdf_csv(s, path)?,
        // nothing routed: header only
        None => std::fs::write(path, "value,cumulative_fraction\n")
            .with_context(|| format!("writing {}", path.display()))?,
    }
    Ok(())
}

fn cmd_corridor(a: CorridorArgs) -> Outcome {
    let t = scenario::generate_corridor(&CorridorConfig::north_atlantic(a.flights, a.seed))?;
    scenario::save_flight_csv(&t, &a.out)?;
    let samples: usize = t.values().map(Vec::len).sum();
    println!("{} flights, {samples} samples -> {}", t.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}
