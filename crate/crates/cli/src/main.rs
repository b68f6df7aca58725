use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use rachbound_cli::config::{self, Overrides, SvgRequest};
use rachbound_cli::engine::RunSpec;
use rachbound_cli::rows::Engine;
use rachbound_cli::{classify_error, compare, engine};

/// Performance bounds and simulation for bursty random access with access
/// barring: M contention channels, N devices activated at once.
#[derive(Parser)]
#[command(name = "rachbound", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Violation/backlog bound under a fixed access probability
    BoundStatic(RunArgs),
    /// Violation bound for draining to b_eps >= m under the dynamic policy
    BoundPartial(RunArgs),
    /// Violation bound for full resolution (b_eps = 0) under the dynamic policy
    BoundFull(RunArgs),
    /// Exact transient violation curve (feasible for moderate n)
    Oracle(RunArgs),
    /// Monte-Carlo resolution-time CCDF with confidence intervals
    Simulate(RunArgs),
    /// Largest burst size meeting a QoS target (b_eps, t, eps)
    Dimension(RunArgs),
    /// Check that bound rows dominate simulation rows (exit 4 when not)
    Compare(CompareArgs),
}

impl Command {
    fn engine(&self) -> Option<Engine> {
        match self {
            Command::BoundStatic(_) => Some(Engine::BoundStatic),
            Command::BoundPartial(_) => Some(Engine::BoundPartial),
            Command::BoundFull(_) => Some(Engine::BoundFull),
            Command::Oracle(_) => Some(Engine::Oracle),
            Command::Simulate(_) => Some(Engine::Simulate),
            Command::Dimension(_) => Some(Engine::Dimension),
            Command::Compare(_) => None,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file; its [engine] sections all run, the verb fills in the
    /// engine for headerless files
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output CSV (default: stdout). With --config, allowed only for
    /// single-section files
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write an SVG chart; without a PATH it is named after the CSV
    #[arg(long, value_name = "PATH")]
    svg: Option<Option<PathBuf>>,

    /// Simulation base seed (overrides the config)
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Simulation sample count (overrides the config)
    #[arg(long, value_name = "K")]
    samples: Option<u64>,

    /// Slot duration in ms; scales chart time axes only, CSV stays in slots
    #[arg(long, value_name = "F")]
    slot_ms: Option<f64>,

    /// Worker threads (0 = one per core)
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,

    /// Device count n
    #[arg(short = 'n', long, value_name = "N")]
    devices: Option<u64>,

    /// Preamble count m
    #[arg(short = 'm', long, value_name = "M")]
    preambles: Option<u32>,

    /// Static access probability p in (0, 1]
    #[arg(short = 'p', long, value_name = "P")]
    access_prob: Option<f64>,

    /// static | dynamic | dynamic-est
    #[arg(long, value_name = "POLICY")]
    policy: Option<String>,

    /// exact | estimated backlog knowledge (simulate)
    #[arg(long, value_name = "KIND")]
    knowledge: Option<String>,

    /// Slots: single value, comma list, or a:b[:step]
    #[arg(short = 't', long, value_name = "SPEC")]
    t: Option<String>,

    /// Backlog level whose exceedance is bounded / simulated
    #[arg(long, value_name = "B")]
    b_eps: Option<u64>,

    /// Violation target(s): backlog mode of bound-static, dimension sweeps
    #[arg(long, value_name = "LIST")]
    eps: Option<String>,

    /// Split factor for the full-resolution bound (default 3)
    #[arg(long, value_name = "C")]
    c: Option<f64>,

    /// Series label used in charts
    #[arg(long, value_name = "TEXT")]
    label: Option<String>,

    #[arg(long, value_name = "F", hide_short_help = true)]
    theta_min: Option<f64>,
    #[arg(long, value_name = "F", hide_short_help = true)]
    theta_max: Option<f64>,
    #[arg(long, value_name = "N", hide_short_help = true)]
    theta_grid: Option<usize>,
    #[arg(long, value_name = "F", hide_short_help = true)]
    theta_tol: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    /// CSV with bound (or oracle) rows
    #[arg(value_name = "BOUND_CSV")]
    bound: PathBuf,

    /// CSV with simulate rows
    #[arg(value_name = "SIM_CSV")]
    sim: PathBuf,

    /// Also write the report to a file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err) as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let engine = cli.command.engine();
    match cli.command {
        Command::Compare(args) => run_compare(args),
        Command::BoundStatic(args)
        | Command::BoundPartial(args)
        | Command::BoundFull(args)
        | Command::Oracle(args)
        | Command::Simulate(args)
        | Command::Dimension(args) => run_engine(engine.expect("run verb"), args),
    }
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // Errors only if a pool already exists (tests); the run still works.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run_engine(engine: Engine, args: RunArgs) -> Result<ExitCode> {
    init_threads(args.threads);
    let (spec, notes) = build_spec(engine, &args)?;
    for note in &notes {
        eprintln!("note: {note}");
    }
    let outcome = engine::run(&spec)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(csv) = &outcome.stdout_csv {
        print!("{csv}");
    }
    for summary in &outcome.summaries {
        eprintln!("{summary}");
    }
    if outcome.nonconverged > 0 {
        eprintln!(
            "warning: {} bound point(s) hit the top of the theta window while still \
             descending; the values are valid but possibly loose (widen theta_max)",
            outcome.nonconverged
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn build_spec(engine: Engine, args: &RunArgs) -> Result<(RunSpec, Vec<String>)> {
    let svg_request = args.svg.as_ref().map(|path| match path {
        Some(path) => SvgRequest::Path(path.clone()),
        None => SvgRequest::Derive,
    });

    if let Some(config_path) = &args.config {
        reject_scenario_flags(args)?;
        let mut spec = config::parse_config(config_path, Some(engine))?;
        let overrides = Overrides {
            out: args.out.clone(),
            svg: svg_request,
            seed: args.seed,
            samples: args.samples,
            slot_ms: args.slot_ms,
        };
        let notes = config::apply_overrides(&mut spec, &overrides)?;
        return Ok((spec, notes));
    }

    let mut entries: Vec<(String, String)> = Vec::new();
    let mut push = |key: &str, value: Option<String>| {
        if let Some(value) = value {
            entries.push((key.to_string(), value));
        }
    };
    push("n", args.devices.map(|v| v.to_string()));
    push("m", args.preambles.map(|v| v.to_string()));
    push("p", args.access_prob.map(|v| v.to_string()));
    push("policy", args.policy.clone());
    push("knowledge", args.knowledge.clone());
    push("t", args.t.clone());
    push("b_eps", args.b_eps.map(|v| v.to_string()));
    push("eps", args.eps.clone());
    push("c", args.c.map(|v| v.to_string()));
    push("samples", args.samples.map(|v| v.to_string()));
    push("seed", args.seed.map(|v| v.to_string()));
    push("label", args.label.clone());
    push("theta_min", args.theta_min.map(|v| v.to_string()));
    push("theta_max", args.theta_max.map(|v| v.to_string()));
    push("theta_grid", args.theta_grid.map(|v| v.to_string()));
    push("theta_tol", args.theta_tol.map(|v| v.to_string()));
    push("out", args.out.as_ref().map(|p| p.display().to_string()));
    match &svg_request {
        Some(SvgRequest::Path(path)) => push("svg", Some(path.display().to_string())),
        Some(SvgRequest::Derive) => {
            let out = args.out.as_ref().ok_or_else(|| {
                rachbound_cli::ConfigError(
                    "--svg without a path needs --out to name the chart after".to_string(),
                )
            })?;
            push("svg", Some(out.with_extension("svg").display().to_string()));
        }
        None => {}
    }
    let spec = config::spec_from_entries(engine, &entries, args.slot_ms)?;
    Ok((spec, Vec::new()))
}

fn reject_scenario_flags(args: &RunArgs) -> Result<()> {
    let scenario_flags = [
        ("-n", args.devices.is_some()),
        ("-m", args.preambles.is_some()),
        ("-p", args.access_prob.is_some()),
        ("--policy", args.policy.is_some()),
        ("--knowledge", args.knowledge.is_some()),
        ("-t", args.t.is_some()),
        ("--b-eps", args.b_eps.is_some()),
        ("--eps", args.eps.is_some()),
        ("--c", args.c.is_some()),
        ("--label", args.label.is_some()),
        ("--theta-min", args.theta_min.is_some()),
        ("--theta-max", args.theta_max.is_some()),
        ("--theta-grid", args.theta_grid.is_some()),
        ("--theta-tol", args.theta_tol.is_some()),
    ];
    if let Some((flag, _)) = scenario_flags.iter().find(|(_, set)| *set) {
        return Err(rachbound_cli::ConfigError(format!(
            "{flag} conflicts with --config; scenario parameters live in the config file \
             (only --out, --svg, --seed, --samples, --slot-ms, --threads override it)"
        ))
        .into());
    }
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<ExitCode> {
    let report = compare::compare_files(&args.bound, &args.sim)?;
    print!("{}", report.text);
    if let Some(path) = &args.out {
        std::fs::write(path, &report.text)
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    }
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}
