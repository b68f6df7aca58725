//! Config file parsing.
//!
//! Flat key-value text with one section per engine run:
//!
//! ```text
//! # comment                      -- stripped anywhere on a line
//! slot_ms = 5                    -- top-level keys before the first section
//! m = 10                         --   act as defaults for every section
//!
//! [bound-partial]                -- section name = engine
//! n = 1000
//! b_eps = 30
//! t = 1:400                      -- single value, comma list, or a:b[:step]
//! out = fig3_bounds.csv
//! ```
//!
//! A file without section headers describes a single run; the engine then
//! comes from the CLI verb. Every wrong key or value is reported with its
//! location and the accepted alternatives.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use rachbound::bounds::ThetaSearch;
use rachbound::scenario::BarringPolicy;
use rachbound::sim::BacklogKnowledge;

use crate::engine::{EngineRun, RunSpec};
use crate::rows::Engine;
use crate::ConfigError;

const KNOWN_KEYS: &[&str] = &[
    "b_eps", "c", "eps", "knowledge", "label", "m", "n", "out", "p", "policy", "samples", "seed",
    "slot_ms", "svg", "t", "theta_grid", "theta_max", "theta_min", "theta_tol",
];

const THETA_KEYS: &[&str] = &["theta_min", "theta_max", "theta_grid", "theta_tol"];
const OUTPUT_KEYS: &[&str] = &["label", "out", "svg"];

fn engine_keys(engine: Engine) -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = vec!["m", "t", "b_eps"];
    keys.extend_from_slice(OUTPUT_KEYS);
    match engine {
        Engine::BoundStatic => {
            keys.extend_from_slice(&["n", "p", "policy", "eps"]);
            keys.extend_from_slice(THETA_KEYS);
        }
        Engine::BoundPartial => {
            keys.extend_from_slice(&["n", "policy"]);
            keys.extend_from_slice(THETA_KEYS);
        }
        Engine::BoundFull => {
            keys.extend_from_slice(&["n", "policy", "c"]);
            keys.extend_from_slice(THETA_KEYS);
        }
        Engine::Oracle => keys.extend_from_slice(&["n", "p", "policy"]),
        Engine::Simulate => {
            keys.extend_from_slice(&["n", "p", "policy", "knowledge", "samples", "seed"]);
        }
        Engine::Dimension => {
            keys.extend_from_slice(&["policy", "eps", "c"]);
            keys.extend_from_slice(THETA_KEYS);
        }
    }
    keys.sort_unstable();
    keys
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type Scope = BTreeMap<String, Entry>;

pub fn parse_config(path: &Path, default_engine: Option<Engine>) -> Result<RunSpec> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_str(&text, default_engine, &path.display().to_string())
}

pub fn parse_config_str(
    text: &str,
    default_engine: Option<Engine>,
    origin: &str,
) -> Result<RunSpec> {
    let mut defaults: Scope = Scope::new();
    let mut sections: Vec<(Engine, Scope)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                config_err(origin, line_no, "section header must look like [engine]")
            })?;
            let engine = name
                .trim()
                .parse::<Engine>()
                .map_err(|e| config_err(origin, line_no, &e))?;
            sections.push((engine, Scope::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(origin, line_no, "expected `key = value` or an [engine] header")
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(config_err(
                origin,
                line_no,
                &format!("unknown key `{key}` (known keys: {})", KNOWN_KEYS.join(", ")),
            ));
        }
        if value.is_empty() {
            return Err(config_err(origin, line_no, &format!("key `{key}` has no value")));
        }
        let scope = match sections.last_mut() {
            Some((_, scope)) => scope,
            None => &mut defaults,
        };
        if let Some(previous) = scope.get(&key) {
            return Err(config_err(
                origin,
                line_no,
                &format!("duplicate key `{key}` (first set on line {})", previous.line),
            ));
        }
        scope.insert(key, Entry { value, line: line_no });
    }

    let slot_ms = match defaults.remove("slot_ms") {
        Some(entry) => {
            let v = entry.value.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0);
            match v {
                Some(v) => Some(v),
                None => {
                    return Err(config_err(
                        origin,
                        entry.line,
                        &format!("slot_ms = {}: slot duration must be a positive number", entry.value),
                    ))
                }
            }
        }
        None => None,
    };

    if sections.is_empty() {
        let engine = default_engine.ok_or_else(|| {
            ConfigError(format!(
                "{origin}: config has no [engine] section; add one or run an engine verb"
            ))
        })?;
        sections.push((engine, defaults));
        defaults = Scope::new();
    }

    let mut runs = Vec::with_capacity(sections.len());
    for (engine, scope) in sections {
        let allowed = engine_keys(engine);
        if let Some((key, entry)) = scope.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            let hint = if key == "slot_ms" {
                "it applies to the whole run; set it above the first section or via --slot-ms"
                    .to_string()
            } else {
                format!("valid keys: {}", allowed.join(", "))
            };
            return Err(config_err(
                origin,
                entry.line,
                &format!("key `{key}` is not used by the {engine} engine ({hint})"),
            ));
        }
        let mut merged = scope;
        for (key, entry) in &defaults {
            if allowed.contains(&key.as_str()) {
                merged
                    .entry(key.clone())
                    .or_insert_with(|| entry.clone());
            }
        }
        runs.push(build_run(engine, &merged, origin)?);
    }

    Ok(RunSpec { runs, slot_ms })
}

/// A single run assembled from command-line flags instead of a file.
pub fn spec_from_entries(
    engine: Engine,
    entries: &[(String, String)],
    slot_ms: Option<f64>,
) -> Result<RunSpec> {
    let origin = "command line";
    let mut scope = Scope::new();
    for (key, value) in entries {
        scope.insert(
            key.clone(),
            Entry {
                value: value.clone(),
                line: 0,
            },
        );
    }
    let allowed = engine_keys(engine);
    if let Some((key, _)) = scope.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(ConfigError(format!(
            "{origin}: option `{key}` is not used by the {engine} engine \
             (valid keys: {})",
            allowed.join(", ")
        ))
        .into());
    }
    let run = build_run(engine, &scope, origin)?;
    Ok(RunSpec {
        runs: vec![run],
        slot_ms,
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn config_err(origin: &str, line: usize, msg: &str) -> anyhow::Error {
    if line == 0 {
        ConfigError(format!("{origin}: {msg}")).into()
    } else {
        ConfigError(format!("{origin}:{line}: {msg}")).into()
    }
}

struct Ctx<'a> {
    engine: Engine,
    map: &'a Scope,
    origin: &'a str,
}

impl<'a> Ctx<'a> {
    fn err_at(&self, key: &str, msg: &str) -> anyhow::Error {
        let line = self.map.get(key).map(|e| e.line).unwrap_or(0);
        config_err(self.origin, line, &format!("[{}] {msg}", self.engine))
    }

    fn err(&self, msg: &str) -> anyhow::Error {
        config_err(self.origin, 0, &format!("[{}] {msg}", self.engine))
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(entry) => entry.value.parse::<T>().map(Some).map_err(|_| {
                self.err_at(key, &format!("{key} = {}: expected {what}", entry.value))
            }),
        }
    }

    fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get_parsed(key, "an unsigned integer")
    }

    fn get_u32(&self, key: &str) -> Result<Option<u32>> {
        self.get_parsed(key, "an unsigned integer")
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get_parsed(key, "an unsigned integer")
    }

    fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get_parsed(key, "a number")
    }

    fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }
}

fn build_run(engine: Engine, map: &Scope, origin: &str) -> Result<EngineRun> {
    let ctx = Ctx { engine, map, origin };

    let m = ctx
        .get_u32("m")?
        .ok_or_else(|| ctx.err("missing preamble count m"))?;
    if m == 0 {
        return Err(ctx.err_at("m", "m = 0: at least one preamble is needed"));
    }

    let p = ctx.get_f64("p")?;
    if let Some(p) = p {
        if !(p > 0.0 && p <= 1.0) {
            return Err(ctx.err_at(
                "p",
                &format!("p = {p}: access probability must lie in (0, 1]"),
            ));
        }
    }

    let (policy, knowledge) = resolve_policy(&ctx, p)?;

    let n = ctx.get_u64("n")?;
    if engine != Engine::Dimension {
        match n {
            None => return Err(ctx.err("missing device count n")),
            Some(0) => return Err(ctx.err_at("n", "n = 0: at least one device is needed")),
            Some(_) => {}
        }
    }

    let ts = match ctx.get("t") {
        None => {
            return Err(ctx.err("missing t (a single value, a comma list, or a:b[:step])"))
        }
        Some(spec) => parse_u32_spec(spec).map_err(|e| ctx.err_at("t", &format!("t: {e}")))?,
    };
    if engine == Engine::Oracle {
        if ts.len() != 1 {
            return Err(ctx.err_at(
                "t",
                "oracle takes a single t and emits the whole curve 0..=t",
            ));
        }
    } else if ts[0] == 0 {
        return Err(ctx.err_at("t", "t values must be >= 1 (slots after the burst)"));
    }

    let eps = match ctx.get("eps") {
        None => Vec::new(),
        Some(spec) => {
            let list = parse_f64_list(spec).map_err(|e| ctx.err_at("eps", &format!("eps: {e}")))?;
            for &v in &list {
                if !(v > 0.0 && v < 1.0) {
                    return Err(ctx.err_at(
                        "eps",
                        &format!("eps = {v}: violation target must lie in (0, 1)"),
                    ));
                }
            }
            list
        }
    };

    let b_eps_opt = ctx.get_u64("b_eps")?;
    let b_eps = match engine {
        Engine::BoundStatic => {
            if b_eps_opt.is_some() && !eps.is_empty() {
                return Err(ctx.err(
                    "give either b_eps (violation bound at a backlog level) or \
                     eps (backlog bound at a violation target), not both",
                ));
            }
            b_eps_opt.unwrap_or(0)
        }
        Engine::BoundPartial => {
            let b = b_eps_opt.ok_or_else(|| {
                ctx.err("bound-partial needs b_eps (the partial-resolution backlog target)")
            })?;
            if b < m as u64 {
                return Err(ctx.err_at(
                    "b_eps",
                    &format!(
                        "bound-partial needs b_eps >= m (got b_eps = {b}, m = {m}); \
                         full resolution down to zero is the bound-full engine"
                    ),
                ));
            }
            b
        }
        Engine::BoundFull => {
            let b = b_eps_opt.unwrap_or(0);
            if b != 0 {
                return Err(ctx.err_at(
                    "b_eps",
                    &format!(
                        "bound-full certifies full resolution (b_eps = 0, got {b}); \
                         partial targets are the bound-partial engine"
                    ),
                ));
            }
            b
        }
        Engine::Oracle | Engine::Simulate => b_eps_opt.unwrap_or(0),
        Engine::Dimension => {
            let b = b_eps_opt.unwrap_or(0);
            if b != 0 && b < m as u64 {
                return Err(ctx.err_at(
                    "b_eps",
                    &format!(
                        "dimension b_eps must be 0 (full resolution) or >= m \
                         (got b_eps = {b}, m = {m})"
                    ),
                ));
            }
            b
        }
    };

    if engine == Engine::Dimension && eps.is_empty() {
        return Err(ctx.err("dimension needs eps (one or more violation targets)"));
    }

    let c = ctx.get_f64("c")?.unwrap_or(3.0);
    if !(c.is_finite() && c > 1.0) {
        return Err(ctx.err_at("c", &format!("c = {c}: split factor must exceed 1")));
    }

    let samples = ctx.get_u64("samples")?.unwrap_or(100_000);
    if engine == Engine::Simulate && samples < 100 {
        return Err(ctx.err_at(
            "samples",
            &format!("samples = {samples}: confidence intervals need at least 100 samples"),
        ));
    }
    let seed = ctx.get_u64("seed")?.unwrap_or(0);

    let defaults = ThetaSearch::default();
    let theta = ThetaSearch::new(
        ctx.get_f64("theta_min")?.unwrap_or(defaults.theta_min()),
        ctx.get_f64("theta_max")?.unwrap_or(defaults.theta_max()),
        ctx.get_usize("theta_grid")?.unwrap_or(defaults.grid_points()),
        ctx.get_f64("theta_tol")?.unwrap_or(defaults.tolerance()),
    )
    .map_err(|e| ctx.err(&format!("theta search: {e}")))?;

    Ok(EngineRun {
        engine,
        label: ctx.get("label").map(str::to_string),
        n,
        m,
        policy,
        knowledge,
        ts,
        b_eps,
        eps,
        c,
        samples,
        seed,
        theta,
        out: ctx.get_path("out"),
        svg: ctx.get_path("svg"),
    })
}

fn resolve_policy(ctx: &Ctx<'_>, p: Option<f64>) -> Result<(BarringPolicy, BacklogKnowledge)> {
    let engine = ctx.engine;
    let mut knowledge = match ctx.get("knowledge") {
        None => BacklogKnowledge::Exact,
        Some("exact") => BacklogKnowledge::Exact,
        Some("estimated") => BacklogKnowledge::Estimated,
        Some(other) => {
            return Err(ctx.err_at(
                "knowledge",
                &format!("knowledge = {other}: expected exact or estimated"),
            ))
        }
    };

    let wants_static = match ctx.get("policy") {
        Some("static") => true,
        Some("dynamic") => false,
        Some("dynamic-est") => {
            if engine != Engine::Simulate {
                return Err(ctx.err_at(
                    "policy",
                    "policy = dynamic-est only applies to the simulate engine",
                ));
            }
            knowledge = BacklogKnowledge::Estimated;
            false
        }
        Some(other) => {
            return Err(ctx.err_at(
                "policy",
                &format!("policy = {other}: expected static, dynamic, or dynamic-est"),
            ))
        }
        None => match engine {
            Engine::BoundStatic => true,
            Engine::BoundPartial | Engine::BoundFull | Engine::Dimension => false,
            Engine::Oracle | Engine::Simulate => p.is_some(),
        },
    };

    match engine {
        Engine::BoundStatic if !wants_static => {
            return Err(ctx.err_at(
                "policy",
                "bound-static analyzes a fixed access probability; \
                 dynamic-policy bounds are bound-partial and bound-full",
            ));
        }
        Engine::BoundPartial | Engine::BoundFull | Engine::Dimension if wants_static => {
            return Err(ctx.err_at(
                "policy",
                &format!("the {engine} engine is defined for the dynamic policy"),
            ));
        }
        _ => {}
    }

    if wants_static {
        let p = p.ok_or_else(|| ctx.err("the static policy needs p (access probability)"))?;
        if knowledge == BacklogKnowledge::Estimated {
            return Err(ctx.err_at(
                "knowledge",
                "knowledge = estimated only affects the dynamic policy",
            ));
        }
        Ok((BarringPolicy::fixed(p)?, BacklogKnowledge::Exact))
    } else {
        if p.is_some() {
            return Err(ctx.err_at(
                "p",
                "p is set but the policy is dynamic; drop p or set policy = static",
            ));
        }
        Ok((BarringPolicy::DynamicOptimal, knowledge))
    }
}

/// `"50"`, `"1,5,10"`, `"1:100"`, `"1:100:5"`, and comma mixes of those.
/// The result is sorted and deduplicated.
pub fn parse_u32_spec(spec: &str) -> Result<Vec<u32>, String> {
    let mut values = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err("empty entry in list".to_string());
        }
        if token.contains(':') {
            let parts: Vec<&str> = token.split(':').collect();
            if parts.len() > 3 {
                return Err(format!("range `{token}` must be a:b or a:b:step"));
            }
            let a: u32 = parse_u32(parts[0])?;
            let b: u32 = parse_u32(parts[1])?;
            let step: u32 = if parts.len() == 3 { parse_u32(parts[2])? } else { 1 };
            if step == 0 {
                return Err(format!("range `{token}` has step 0"));
            }
            if b < a {
                return Err(format!("range `{token}` runs backwards"));
            }
            values.extend((a..=b).step_by(step as usize));
        } else {
            values.push(parse_u32(token)?);
        }
    }
    if values.is_empty() {
        return Err("empty list".to_string());
    }
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| format!("`{s}` is not an unsigned integer"))
}

pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err("empty entry in list".to_string());
        }
        let v: f64 = token
            .parse()
            .map_err(|_| format!("`{token}` is not a number"))?;
        if !values.contains(&v) {
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err("empty list".to_string());
    }
    Ok(values)
}

/// Command-line values that override what a config file says.
#[derive(Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub svg: Option<SvgRequest>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub slot_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum SvgRequest {
    /// `--svg` without a path: name the chart after the CSV.
    Derive,
    Path(PathBuf),
}

/// Applies CLI overrides onto a parsed spec. Returns human-readable notes
/// about overrides that had nothing to apply to.
pub fn apply_overrides(spec: &mut RunSpec, overrides: &Overrides) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    if let Some(slot_ms) = overrides.slot_ms {
        spec.slot_ms = Some(slot_ms);
    }

    let simulate_runs = spec
        .runs
        .iter_mut()
        .filter(|r| r.engine == Engine::Simulate)
        .count();
    if let Some(seed) = overrides.seed {
        if simulate_runs == 0 {
            notes.push("--seed ignored: no simulate run".to_string());
        }
        for run in spec.runs.iter_mut().filter(|r| r.engine == Engine::Simulate) {
            run.seed = seed;
        }
    }
    if let Some(samples) = overrides.samples {
        if samples < 100 {
            return Err(ConfigError(format!(
                "--samples {samples}: confidence intervals need at least 100 samples"
            ))
            .into());
        }
        if simulate_runs == 0 {
            notes.push("--samples ignored: no simulate run".to_string());
        }
        for run in spec.runs.iter_mut().filter(|r| r.engine == Engine::Simulate) {
            run.samples = samples;
        }
    }

    if let Some(out) = &overrides.out {
        if spec.runs.len() != 1 {
            return Err(ConfigError(
                "--out is ambiguous for a multi-section config; set out per section".to_string(),
            )
            .into());
        }
        spec.runs[0].out = Some(out.clone());
    }

    match &overrides.svg {
        None => {}
        Some(SvgRequest::Path(path)) => {
            if spec.runs.len() != 1 {
                return Err(ConfigError(
                    "--svg PATH is ambiguous for a multi-section config; set svg per section"
                        .to_string(),
                )
                .into());
            }
            spec.runs[0].svg = Some(path.clone());
        }
        Some(SvgRequest::Derive) => {
            let mut derived = 0;
            for run in &mut spec.runs {
                if run.svg.is_none() {
                    if let Some(out) = &run.out {
                        run.svg = Some(out.with_extension("svg"));
                        derived += 1;
                    }
                }
            }
            if derived == 0 && spec.runs.iter().all(|r| r.svg.is_none()) {
                return Err(ConfigError(
                    "--svg needs an output CSV to name the chart after; \
                     give --out or a per-section out, or pass --svg PATH"
                        .to_string(),
                )
                .into());
            }
        }
    }
    Ok(notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_headerless_config_parses() {
        let text = "n = 100\nm = 30\np = 0.5\nt = 10\nb_eps = 20\n";
        let spec = parse_config_str(text, Some(Engine::BoundStatic), "test").unwrap();
        assert_eq!(spec.runs.len(), 1);
        let run = &spec.runs[0];
        assert_eq!(run.engine, Engine::BoundStatic);
        assert_eq!(run.n, Some(100));
        assert_eq!(run.m, 30);
        assert_eq!(run.ts, vec![10]);
        assert_eq!(run.b_eps, 20);
        assert!(matches!(run.policy, BarringPolicy::Static { access_prob } if access_prob == 0.5));
    }

    #[test]
    fn out_of_range_access_probability_names_the_constraint() {
        let text = "n = 100\nm = 30\np = 1.5\nt = 10\n";
        let err = parse_config_str(text, Some(Engine::BoundStatic), "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p = 1.5"), "{msg}");
        assert!(msg.contains("(0, 1]"), "{msg}");
    }

    #[test]
    fn comments_defaults_and_sections_compose() {
        let text = "\
# shared scenario
slot_ms = 5
m = 10
n = 1000

[bound-partial]
b_eps = 30            # 3M
t = 1:400
out = bounds.csv

[simulate]
b_eps = 30
t = 10:400:10
samples = 1000
";
        let spec = parse_config_str(text, None, "test").unwrap();
        assert_eq!(spec.slot_ms, Some(5.0));
        assert_eq!(spec.runs.len(), 2);
        assert_eq!(spec.runs[0].engine, Engine::BoundPartial);
        assert_eq!(spec.runs[0].n, Some(1000));
        assert_eq!(spec.runs[0].ts.len(), 400);
        assert_eq!(spec.runs[0].out.as_deref(), Some(Path::new("bounds.csv")));
        assert_eq!(spec.runs[1].engine, Engine::Simulate);
        assert_eq!(spec.runs[1].samples, 1000);
        assert!(spec.runs[1].policy.is_dynamic());
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = "n = 10\nm = 5\nt = 3\nbogus = 1\n";
        let err = parse_config_str(text, Some(Engine::Oracle), "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("test:4"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn key_not_used_by_engine_is_rejected() {
        let text = "[oracle]\nn = 10\nm = 5\nt = 3\nsamples = 100\n";
        let err = parse_config_str(text, None, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("samples"), "{msg}");
        assert!(msg.contains("oracle"), "{msg}");
        assert!(msg.contains("valid keys"), "{msg}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = "n = 10\nn = 20\nm = 5\nt = 3\n";
        let err = parse_config_str(text, Some(Engine::Oracle), "test").unwrap_err();
        assert!(err.to_string().contains("duplicate key `n`"), "{err}");
    }

    #[test]
    fn partial_bound_target_below_preambles_is_rejected_with_hint() {
        let text = "[bound-partial]\nn = 100\nm = 10\nb_eps = 5\nt = 10\n";
        let err = parse_config_str(text, None, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("b_eps >= m"), "{msg}");
        assert!(msg.contains("bound-full"), "{msg}");
    }

    #[test]
    fn backlog_and_violation_modes_are_exclusive() {
        let text = "n = 100\nm = 30\np = 0.5\nt = 10\nb_eps = 5\neps = 0.01\n";
        let err = parse_config_str(text, Some(Engine::BoundStatic), "test").unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn range_specs_expand() {
        assert_eq!(parse_u32_spec("5").unwrap(), vec![5]);
        assert_eq!(parse_u32_spec("1,5,3").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_u32_spec("2:6:2").unwrap(), vec![2, 4, 6]);
        assert_eq!(parse_u32_spec("1:3,10").unwrap(), vec![1, 2, 3, 10]);
        assert!(parse_u32_spec("3:1").is_err());
        assert!(parse_u32_spec("1:10:0").is_err());
        assert!(parse_u32_spec("").is_err());
    }

    #[test]
    fn oracle_takes_a_single_t() {
        let text = "n = 10\nm = 5\nt = 1,2\n";
        let err = parse_config_str(text, Some(Engine::Oracle), "test").unwrap_err();
        assert!(err.to_string().contains("single t"), "{err}");
    }

    #[test]
    fn estimated_knowledge_requires_dynamic_policy() {
        let text = "n = 10\nm = 5\np = 0.5\nt = 10\nknowledge = estimated\n";
        let err = parse_config_str(text, Some(Engine::Simulate), "test").unwrap_err();
        assert!(err.to_string().contains("dynamic"), "{err}");
    }

    #[test]
    fn overrides_apply_to_simulate_sections_only() {
        let text = "\
m = 10
n = 50

[bound-full]
t = 1:20
[simulate]
t = 5,10
samples = 500
";
        let mut spec = parse_config_str(text, None, "test").unwrap();
        let notes = apply_overrides(
            &mut spec,
            &Overrides {
                seed: Some(7),
                samples: Some(2000),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert!(notes.is_empty());
        assert_eq!(spec.runs[1].seed, 7);
        assert_eq!(spec.runs[1].samples, 2000);
        assert_eq!(spec.runs[0].seed, 0);
    }

    #[test]
    fn out_override_rejected_for_multi_section_configs() {
        let text = "m = 10\nn = 50\n[bound-full]\nt = 1:5\n[oracle]\nt = 5\n";
        let mut spec = parse_config_str(text, None, "test").unwrap();
        let err = apply_overrides(
            &mut spec,
            &Overrides {
                out: Some(PathBuf::from("x.csv")),
                ..Overrides::default()
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("per section"), "{err}");
    }
}
