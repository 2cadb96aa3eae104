//! Command-line front end: scenario generation, single simulations,
//! optimization campaigns, front merging, and run summaries. All outputs are
//! deterministic given config and seed, and every written table is readable
//! back by `front` and `report`.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlbsim::analysis;
use mlbsim::config::{CampaignSpec, ControllerSpec, SimulateSpec};
use mlbsim::harness::run_campaign;
use mlbsim::mopso::ObjectiveVector;
use mlbsim::scenario::{generate, LayoutParams, Scenario};
use mlbsim::sim::run;
use mlbsim::tables;
use mlbsim::tables::ArchiveRow;

#[derive(Parser)]
#[command(
    name = "mlbsim",
    version,
    about = "Downlink network simulator with handover-margin optimization"
)]
struct Cli {
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a hexagonal three-sector scenario file.
    GenScenario(GenScenarioArgs),
    /// Run one simulation and write its KPI tables.
    Simulate(RunArgs),
    /// Run an optimization campaign and write archive, log, and baseline.
    Optimize(RunArgs),
    /// Merge solution archives into a front and compare hypervolumes.
    Front(FrontArgs),
    /// Summarize KPI tables from one or more run directories.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenScenarioArgs {
    /// Number of three-sector sites (cells = 3x this).
    #[arg(long, default_value_t = 15)]
    sites: u32,
    /// Minimum inter-site distance, km.
    #[arg(long, default_value_t = 1.5)]
    isd_min_km: f64,
    /// Maximum inter-site distance, km.
    #[arg(long, default_value_t = 2.0)]
    isd_max_km: f64,
    /// Service-area margin beyond the outermost sites, m.
    #[arg(long, default_value_t = 1000.0)]
    margin_m: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Scenario file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override the config file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config file's label.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct FrontArgs {
    /// Archive tables to merge (at least one).
    #[arg(required = true)]
    archives: Vec<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Hypervolume reference point as "throughput,p_access"; default is the
    /// component-wise minimum padded by 10% of each span.
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories containing kpi.tsv and cell-loads.tsv (at least one).
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

/// Usage errors (bad flags, malformed configs, missing inputs) exit with 2;
/// failures after a valid launch exit with 3.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        CliError::Usage(e.to_string())
    }

    fn runtime(e: impl ToString) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = cli.verbose;
    let result = match cli.command {
        Command::GenScenario(args) => gen_scenario(args, verbose),
        Command::Simulate(args) => simulate(args, verbose),
        Command::Optimize(args) => optimize(args, verbose),
        Command::Front(args) => front(args, verbose),
        Command::Report(args) => report(args, verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn ensure_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", dir.display())))
}

fn write_table(dir: &Path, name: &str, contents: &str) -> CliResult {
    let path = dir.join(name);
    tables::write_string(&path, contents)
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))
}

fn note(verbose: bool, message: impl AsRef<str>) {
    if verbose {
        eprintln!("{}", message.as_ref());
    }
}

fn gen_scenario(args: GenScenarioArgs, verbose: bool) -> CliResult {
    let params = LayoutParams {
        sites: args.sites,
        isd_min_km: args.isd_min_km,
        isd_max_km: args.isd_max_km,
        margin_m: args.margin_m,
        seed: args.seed,
    };
    let scenario = generate(&params).map_err(CliError::usage)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    scenario.save(&args.out).map_err(CliError::runtime)?;
    note(
        verbose,
        format!("wrote {} ({} cells)", args.out.display(), scenario.cells.len()),
    );
    Ok(())
}

/// Loads the scenario named by a config, resolving relative to the config.
fn load_scenario(config_path: &Path, scenario_rel: &Path) -> Result<Scenario, CliError> {
    Scenario::load(scenario_rel).map_err(|e| {
        CliError::usage(format!("scenario for {}: {e}", config_path.display()))
    })
}

fn simulate(args: RunArgs, verbose: bool) -> CliResult {
    let spec = SimulateSpec::load(&args.config)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.config.display())))?;
    let scenario = load_scenario(&args.config, &spec.scenario_path(&args.config))?;
    let model = scenario.build_model().map_err(CliError::usage)?;
    let neighbors = scenario.neighbor_map();
    let seed = args.seed.unwrap_or(spec.seed);
    let label = args.label.unwrap_or_else(|| spec.label.clone());
    tables::validate_label(&label).map_err(CliError::usage)?;

    // A static controller without explicit loads measures them from a
    // planning run on the same seed first.
    let baseline_loads = if spec.controller.needs_baseline_loads() {
        note(verbose, "measuring baseline loads from a planning run");
        let planning = ControllerSpec::default()
            .build(model.n_cells(), neighbors.as_ref(), None)
            .map_err(CliError::usage)?;
        let report = run(&model, scenario.area, planning, &spec.sim, seed)
            .map_err(CliError::runtime)?;
        Some(report.cell_load_avg)
    } else {
        None
    };
    let controller = spec
        .controller
        .build(model.n_cells(), neighbors.as_ref(), baseline_loads.as_deref())
        .map_err(CliError::usage)?;

    note(verbose, format!("simulating {} cells, seed {seed}", model.n_cells()));
    let report =
        run(&model, scenario.area, controller, &spec.sim, seed).map_err(CliError::runtime)?;

    ensure_dir(&args.out)?;
    let ids: Vec<u32> = scenario.cells.iter().map(|c| c.id).collect();
    let kpi = tables::kpi_to_string(&[analysis::kpi_row(&label, seed, &report)])
        .map_err(CliError::runtime)?;
    write_table(&args.out, "kpi.tsv", &kpi)?;
    let loads = tables::cell_loads_to_string(&analysis::cell_load_rows(&label, &ids, &report))
        .map_err(CliError::runtime)?;
    write_table(&args.out, "cell-loads.tsv", &loads)?;
    let pairs = tables::hm_pairs_to_string(&analysis::hm_pair_rows(&label, &report))
        .map_err(CliError::runtime)?;
    write_table(&args.out, "hm-pairs.tsv", &pairs)?;
    note(
        verbose,
        format!(
            "p_access {:.4}, throughput {:.3e} bps, {} handovers",
            report.p_access, report.throughput_bps, report.handover_count
        ),
    );
    Ok(())
}

fn optimize(args: RunArgs, verbose: bool) -> CliResult {
    let spec = CampaignSpec::load(&args.config)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.config.display())))?;
    let scenario = load_scenario(&args.config, &spec.scenario_path(&args.config))?;
    let mut campaign = spec.to_campaign(scenario).map_err(CliError::usage)?;
    if let Some(seed) = args.seed {
        campaign.seed = seed;
    }
    let label = args.label.unwrap_or_else(|| spec.label.clone());
    tables::validate_label(&label).map_err(CliError::usage)?;

    note(
        verbose,
        format!(
            "campaign {label}: {} cells, {} particles x {} iterations",
            campaign.scenario.cells.len(),
            campaign.swarm.population,
            campaign.swarm.iterations
        ),
    );
    let result = match run_campaign(&campaign) {
        Ok(r) => r,
        Err(e @ mlbsim::harness::HarnessError::Config(_)) => return Err(CliError::usage(e)),
        Err(e) => return Err(CliError::runtime(e)),
    };

    ensure_dir(&args.out)?;
    let baseline_row = ArchiveRow {
        label: format!("{label}-baseline"),
        params: Vec::new(),
        throughput_bps: result.baseline_objectives.f1,
        p_access: result.baseline_objectives.f2,
    };
    let baseline =
        tables::archive_to_string(&[baseline_row]).map_err(CliError::runtime)?;
    write_table(&args.out, "baseline.tsv", &baseline)?;

    if let Some(swarm) = &result.swarm {
        let (archive_rows, eval_rows) = analysis::swarm_rows(&label, swarm);
        let archive = tables::archive_to_string(&archive_rows).map_err(CliError::runtime)?;
        write_table(&args.out, "archive.tsv", &archive)?;
        let log = tables::eval_log_to_string(&eval_rows).map_err(CliError::runtime)?;
        write_table(&args.out, "eval-log.tsv", &log)?;
        note(
            verbose,
            format!(
                "{} evaluations, {} archived solutions",
                result.evaluations_total,
                swarm.archive.len()
            ),
        );
    } else {
        note(verbose, "baseline mode: no optimizer run");
    }
    Ok(())
}

fn parse_reference(text: &str) -> Result<ObjectiveVector, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!(
            "reference {text:?} must be \"throughput,p_access\""
        )));
    }
    let f1: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| CliError::usage(format!("reference throughput: {e}")))?;
    let f2: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| CliError::usage(format!("reference p_access: {e}")))?;
    Ok(ObjectiveVector::new(f1, f2))
}

fn front(args: FrontArgs, verbose: bool) -> CliResult {
    let mut rows = Vec::new();
    for path in &args.archives {
        let text = tables::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        // Accept raw archives and previously merged fronts alike.
        let parsed = tables::archive_from_str(&text)
            .or_else(|_| tables::front_from_str(&text))
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        rows.extend(parsed);
    }
    let merged = analysis::merge_fronts(&rows);
    if merged.is_empty() {
        return Err(CliError::runtime("no finite solutions in the input archives".to_string()));
    }

    // The default reference covers every finite input row, not only the
    // merged front, so dominated archives still score a positive volume.
    let all_points: Vec<ObjectiveVector> = rows
        .iter()
        .map(|r| ObjectiveVector::new(r.throughput_bps, r.p_access))
        .filter(|o| o.f1.is_finite() && o.f2.is_finite())
        .collect();
    let reference = match &args.reference {
        Some(text) => parse_reference(text)?,
        None => analysis::shared_reference(&all_points)
            .expect("merged front nonempty implies points exist"),
    };
    let hv = analysis::hypervolumes_by_label(&rows, &reference)
        .map_err(|e| CliError::runtime(format!("hypervolume: {e}")))?;

    ensure_dir(&args.out)?;
    let front_text = tables::front_to_string(&merged).map_err(CliError::runtime)?;
    write_table(&args.out, "front.tsv", &front_text)?;
    let hv_text = tables::hv_to_string(&hv).map_err(CliError::runtime)?;
    write_table(&args.out, "hv.tsv", &hv_text)?;
    note(
        verbose,
        format!(
            "merged {} rows into a front of {} over reference ({}, {})",
            rows.len(),
            merged.len(),
            reference.f1,
            reference.f2
        ),
    );
    Ok(())
}

fn report(args: ReportArgs, verbose: bool) -> CliResult {
    let mut kpis = Vec::new();
    let mut loads = Vec::new();
    for dir in &args.runs {
        let kpi_path = dir.join("kpi.tsv");
        let text = tables::read_to_string(&kpi_path)
            .map_err(|e| CliError::usage(format!("{}: {e}", kpi_path.display())))?;
        kpis.extend(
            tables::kpi_from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", kpi_path.display())))?,
        );
        let loads_path = dir.join("cell-loads.tsv");
        let text = tables::read_to_string(&loads_path)
            .map_err(|e| CliError::usage(format!("{}: {e}", loads_path.display())))?;
        loads.extend(
            tables::cell_loads_from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", loads_path.display())))?,
        );
    }
    if kpis.is_empty() {
        return Err(CliError::usage("no KPI rows in the given run directories".to_string()));
    }

    let mut labels: Vec<String> = Vec::new();
    for k in &kpis {
        if !labels.contains(&k.label) {
            labels.push(k.label.clone());
        }
    }
    let mut summaries = Vec::with_capacity(labels.len());
    for label in &labels {
        let group_kpis: Vec<_> = kpis.iter().filter(|k| &k.label == label).cloned().collect();
        let group_loads: Vec<_> =
            loads.iter().filter(|l| &l.label == label).cloned().collect();
        let summary = analysis::summarize_group(label, &group_kpis, &group_loads)
            .expect("label came from a nonempty group");
        summaries.push(summary);
    }

    ensure_dir(&args.out)?;
    let text = tables::summary_to_string(&summaries).map_err(CliError::runtime)?;
    write_table(&args.out, "summary.tsv", &text)?;
    note(verbose, format!("summarized {} runs into {} labels", kpis.len(), labels.len()));
    Ok(())
}
