//! Run descriptions and their execution.
//!
//! A [`RunSpec`] is an ordered list of engine runs, typically parsed from a
//! config file. Execution collects every run's rows first and writes each
//! output file exactly once at the end, so a failing section leaves no
//! partial files behind. Runs sharing an `out` path are appended into one
//! CSV; runs sharing an `svg` path become series of one chart.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use rachbound::bounds::{
    full_violation_sweep, max_supported_devices, partial_violation_sweep, static_backlog_bound,
    static_violation_sweep, BoundResult, ThetaSearch,
};
use rachbound::oracle::violation_curve;
use rachbound::scenario::{BarringPolicy, QosRequirement, ScenarioParams, SplitConfig};
use rachbound::sim::{monte_carlo_ccdf, BacklogKnowledge, SimConfig};

use crate::rows::{self, Engine, PolicyDesc, ResultRow};
use crate::svg::{Chart, Series};
use crate::ConfigError;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub runs: Vec<EngineRun>,
    /// Presentation-only slot duration; scales SVG time axes, never CSV data.
    pub slot_ms: Option<f64>,
}

/// One engine invocation: scenario, targets, and output destinations.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub engine: Engine,
    pub label: Option<String>,
    pub n: Option<u64>,
    pub m: u32,
    pub policy: BarringPolicy,
    pub knowledge: BacklogKnowledge,
    /// Slots to evaluate (sorted, deduplicated). The oracle takes exactly one
    /// entry and emits the whole curve 0..=t.
    pub ts: Vec<u32>,
    pub b_eps: u64,
    /// Violation targets: backlog mode of bound-static, and dimension.
    pub eps: Vec<f64>,
    pub c: f64,
    pub samples: u64,
    pub seed: u64,
    pub theta: ThetaSearch,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl EngineRun {
    pub fn policy_desc(&self) -> PolicyDesc {
        match (self.policy, self.knowledge) {
            (BarringPolicy::Static { access_prob }, _) => PolicyDesc::Static(access_prob),
            (BarringPolicy::DynamicOptimal, BacklogKnowledge::Exact) => PolicyDesc::Dynamic,
            (BarringPolicy::DynamicOptimal, BacklogKnowledge::Estimated) => PolicyDesc::DynamicEst,
        }
    }

    fn devices(&self) -> Result<u64> {
        self.n
            .ok_or_else(|| ConfigError(format!("{}: missing device count n", self.engine)).into())
    }

    fn series_label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match self.engine {
            Engine::BoundStatic => format!("static bound m={} {}", self.m, self.policy_desc()),
            Engine::BoundPartial => format!("partial bound m={} b={}", self.m, self.b_eps),
            Engine::BoundFull => format!("full bound m={} c={}", self.m, rows::fmt_f64(self.c)),
            Engine::Oracle => format!("oracle m={} {}", self.m, self.policy_desc()),
            Engine::Simulate => match self.knowledge {
                BacklogKnowledge::Exact => format!("sim m={}", self.m),
                BacklogKnowledge::Estimated => format!("sim (est) m={}", self.m),
            },
            Engine::Dimension => format!("analysis m={}", self.m),
        }
    }
}

/// Axis semantics of a chart; runs merged into one SVG must agree on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    ViolationVsT,
    BacklogVsEps,
    DevicesVsEps,
}

struct Executed {
    rows: Vec<ResultRow>,
    nonconverged: usize,
    warnings: Vec<String>,
}

pub struct RunOutcome {
    pub nonconverged: usize,
    pub warnings: Vec<String>,
    pub summaries: Vec<String>,
    /// CSV text for runs without an `out` path, ready for stdout.
    pub stdout_csv: Option<String>,
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    let mut csv_groups: Vec<(PathBuf, Vec<ResultRow>)> = Vec::new();
    let mut charts: Vec<(PathBuf, ChartKind, Vec<Series>)> = Vec::new();
    let mut stdout_rows: Vec<ResultRow> = Vec::new();
    let mut nonconverged = 0usize;
    let mut warnings = Vec::new();
    let mut summaries = Vec::new();

    for run in &spec.runs {
        let executed = execute(run).with_context(|| format!("[{}] failed", run.engine))?;
        nonconverged += executed.nonconverged;
        warnings.extend(executed.warnings);

        if let Some(svg_path) = &run.svg {
            let (kind, series) = chart_series(run, &executed.rows, spec.slot_ms);
            match charts.iter_mut().find(|(p, _, _)| p == svg_path) {
                Some((_, existing_kind, existing)) => {
                    if *existing_kind != kind {
                        bail!(ConfigError(format!(
                            "svg {} mixes incompatible chart kinds",
                            svg_path.display()
                        )));
                    }
                    existing.extend(series);
                }
                None => charts.push((svg_path.clone(), kind, series)),
            }
        }

        let destination = match &run.out {
            Some(path) => {
                let rows_len = executed.rows.len();
                match csv_groups.iter_mut().find(|(p, _)| p == path) {
                    Some((_, rows)) => rows.extend(executed.rows),
                    None => csv_groups.push((path.clone(), executed.rows)),
                }
                format!("{rows_len} row(s) -> {}", path.display())
            }
            None => {
                let rows_len = executed.rows.len();
                stdout_rows.extend(executed.rows);
                format!("{rows_len} row(s) -> stdout")
            }
        };
        summaries.push(format!("{}: {destination}", run.engine));
    }

    for (path, rows) in &csv_groups {
        rows::write_csv(path, rows)?;
    }
    for (path, kind, series) in charts {
        let chart = chart_for(kind, series, &path, spec.slot_ms);
        svg_write(&path, &chart.render())?;
    }

    let stdout_csv = if stdout_rows.is_empty() {
        None
    } else {
        Some(rows::to_csv_string(&stdout_rows))
    };
    Ok(RunOutcome {
        nonconverged,
        warnings,
        summaries,
        stdout_csv,
    })
}

fn svg_write(path: &PathBuf, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn chart_for(kind: ChartKind, series: Vec<Series>, path: &PathBuf, slot_ms: Option<f64>) -> Chart {
    let title = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "chart".to_string());
    match kind {
        ChartKind::ViolationVsT => Chart {
            title,
            x_label: if slot_ms.is_some() {
                "time [ms]".to_string()
            } else {
                "t [slots]".to_string()
            },
            y_label: "violation probability".to_string(),
            log_x: false,
            log_y: true,
            series,
        },
        ChartKind::BacklogVsEps => Chart {
            title,
            x_label: "violation probability target".to_string(),
            y_label: "backlog bound".to_string(),
            log_x: true,
            log_y: false,
            series,
        },
        ChartKind::DevicesVsEps => Chart {
            title,
            x_label: "violation probability target".to_string(),
            y_label: "max supported devices".to_string(),
            log_x: true,
            log_y: false,
            series,
        },
    }
}

/// Splits a run's rows into plot series. Violation curves plot value over t;
/// backlog-mode and dimension runs plot value over the eps target, one series
/// per deadline.
fn chart_series(run: &EngineRun, rows: &[ResultRow], slot_ms: Option<f64>) -> (ChartKind, Vec<Series>) {
    let scale = slot_ms.unwrap_or(1.0);
    let by_eps = |kind: ChartKind| {
        let mut series: Vec<Series> = Vec::new();
        for row in rows {
            let label = format!("{} t={}", run.series_label(), row.t);
            let x = row.eps.unwrap_or(f64::NAN);
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((x, row.value)),
                None => series.push(Series {
                    label,
                    points: vec![(x, row.value)],
                }),
            }
        }
        for s in &mut series {
            s.points
                .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        }
        (kind, series)
    };
    match run.engine {
        Engine::Dimension => by_eps(ChartKind::DevicesVsEps),
        Engine::BoundStatic if !run.eps.is_empty() => by_eps(ChartKind::BacklogVsEps),
        _ => {
            let points = rows
                .iter()
                .map(|r| (r.t as f64 * scale, r.value))
                .collect();
            (
                ChartKind::ViolationVsT,
                vec![Series {
                    label: run.series_label(),
                    points,
                }],
            )
        }
    }
}

fn execute(run: &EngineRun) -> Result<Executed> {
    match run.engine {
        Engine::BoundStatic => execute_bound_static(run),
        Engine::BoundPartial => execute_bound_partial(run),
        Engine::BoundFull => execute_bound_full(run),
        Engine::Oracle => execute_oracle(run),
        Engine::Simulate => execute_simulate(run),
        Engine::Dimension => execute_dimension(run),
    }
}

fn static_access_prob(run: &EngineRun) -> Result<f64> {
    match run.policy {
        BarringPolicy::Static { access_prob } => Ok(access_prob),
        BarringPolicy::DynamicOptimal => bail!(ConfigError(format!(
            "{} needs a static access probability; set p",
            run.engine
        ))),
    }
}

fn base_row(run: &EngineRun, t: u32, value: f64) -> ResultRow {
    ResultRow {
        engine: run.engine,
        n: run.n,
        m: run.m,
        policy: run.policy_desc(),
        c: None,
        b_eps: Some(run.b_eps),
        eps: None,
        t,
        value,
        theta_star: None,
        ci_low: None,
        ci_high: None,
        samples: None,
        seed: None,
    }
}

fn bound_rows(run: &EngineRun, sweep: &[BoundResult]) -> (Vec<ResultRow>, usize) {
    let mut rows = Vec::with_capacity(run.ts.len());
    let mut nonconverged = 0;
    for &t in &run.ts {
        let result = &sweep[(t - 1) as usize];
        if !result.converged {
            nonconverged += 1;
        }
        let mut row = base_row(run, t, result.value);
        row.theta_star = result.theta_star;
        rows.push(row);
    }
    (rows, nonconverged)
}

fn execute_bound_static(run: &EngineRun) -> Result<Executed> {
    let n = run.devices()?;
    let p = static_access_prob(run)?;
    let scenario = ScenarioParams::delta_burst(n, run.m)?;
    if run.eps.is_empty() {
        let max_t = *run.ts.last().expect("validated: ts nonempty");
        let sweep = static_violation_sweep(&scenario, p, max_t, run.b_eps, &run.theta)?;
        let (rows, nonconverged) = bound_rows(run, &sweep);
        return Ok(Executed {
            rows,
            nonconverged,
            warnings: Vec::new(),
        });
    }
    let mut rows = Vec::with_capacity(run.ts.len() * run.eps.len());
    let mut nonconverged = 0;
    for &t in &run.ts {
        for &eps in &run.eps {
            let result = static_backlog_bound(&scenario, p, t, eps, &run.theta)?;
            if !result.converged {
                nonconverged += 1;
            }
            let mut row = base_row(run, t, result.value);
            row.b_eps = None;
            row.eps = Some(eps);
            row.theta_star = result.theta_star;
            rows.push(row);
        }
    }
    Ok(Executed {
        rows,
        nonconverged,
        warnings: Vec::new(),
    })
}

fn execute_bound_partial(run: &EngineRun) -> Result<Executed> {
    let n = run.devices()?;
    let max_t = *run.ts.last().expect("validated: ts nonempty");
    let sweep = partial_violation_sweep(n, run.m, run.b_eps, max_t, &run.theta)?;
    let (rows, nonconverged) = bound_rows(run, &sweep);
    Ok(Executed {
        rows,
        nonconverged,
        warnings: Vec::new(),
    })
}

fn execute_bound_full(run: &EngineRun) -> Result<Executed> {
    let n = run.devices()?;
    let split = SplitConfig::new(run.c)?;
    let max_t = *run.ts.last().expect("validated: ts nonempty");
    let sweep = full_violation_sweep(n, run.m, split, max_t, &run.theta)?;
    let (mut rows, nonconverged) = bound_rows(run, &sweep);
    for row in &mut rows {
        row.c = Some(run.c);
    }
    Ok(Executed {
        rows,
        nonconverged,
        warnings: Vec::new(),
    })
}

fn execute_oracle(run: &EngineRun) -> Result<Executed> {
    let n = run.devices()?;
    let scenario = ScenarioParams::delta_burst(n, run.m)?;
    let t_max = run.ts[0];
    let curve = violation_curve(&scenario, run.policy, t_max, run.b_eps)?;
    let rows = curve
        .iter()
        .enumerate()
        .map(|(t, &value)| base_row(run, t as u32, value))
        .collect();
    Ok(Executed {
        rows,
        nonconverged: 0,
        warnings: Vec::new(),
    })
}

fn execute_simulate(run: &EngineRun) -> Result<Executed> {
    let n = run.devices()?;
    let scenario = ScenarioParams::delta_burst(n, run.m)?;
    let t_max = *run.ts.last().expect("validated: ts nonempty");
    let config = SimConfig::new(
        scenario,
        run.policy,
        run.knowledge,
        run.samples,
        run.seed,
        t_max,
    )?;
    let table = monte_carlo_ccdf(&config, run.b_eps, &run.ts)?;
    let rows = table
        .points
        .iter()
        .map(|point| {
            let mut row = base_row(run, point.slot, point.epsilon);
            row.ci_low = Some(point.ci_low);
            row.ci_high = Some(point.ci_high);
            row.samples = Some(table.samples);
            row.seed = Some(run.seed);
            row
        })
        .collect();
    Ok(Executed {
        rows,
        nonconverged: 0,
        warnings: Vec::new(),
    })
}

fn execute_dimension(run: &EngineRun) -> Result<Executed> {
    let split = SplitConfig::new(run.c)?;
    let mut rows = Vec::with_capacity(run.ts.len() * run.eps.len());
    let mut warnings = Vec::new();
    for &t in &run.ts {
        for &eps in &run.eps {
            let qos = QosRequirement::new(run.b_eps, t, eps)?;
            let result = max_supported_devices(run.m, &qos, split, &run.theta)?;
            if !result.monotone {
                warnings.push(format!(
                    "dimension t={t} eps={}: bound probes not monotone in n; \
                     result may be off by the bracketing step",
                    rows::fmt_f64(eps)
                ));
            }
            let mut row = base_row(run, t, result.n_max as f64);
            row.eps = Some(eps);
            if run.b_eps == 0 {
                row.c = Some(run.c);
            }
            rows.push(row);
        }
    }
    Ok(Executed {
        rows,
        nonconverged: 0,
        warnings,
    })
}
