//! The CSV result schema shared by every engine.
//!
//! One row per evaluated point, a fixed column order, empty string for
//! not-applicable fields. Values contain no commas or quotes, so no escaping
//! is needed; floats are printed in shortest round-trip form (scientific
//! notation for extreme magnitudes) and parse back to the identical bits.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const CSV_HEADER: &str =
    "engine,n,m,policy,c,b_eps,eps,t,value,theta_star,ci_low,ci_high,samples,seed";

const COLUMNS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    BoundStatic,
    BoundPartial,
    BoundFull,
    Oracle,
    Simulate,
    Dimension,
}

impl Engine {
    pub const ALL: [Engine; 6] = [
        Engine::BoundStatic,
        Engine::BoundPartial,
        Engine::BoundFull,
        Engine::Oracle,
        Engine::Simulate,
        Engine::Dimension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::BoundStatic => "bound-static",
            Engine::BoundPartial => "bound-partial",
            Engine::BoundFull => "bound-full",
            Engine::Oracle => "oracle",
            Engine::Simulate => "simulate",
            Engine::Dimension => "dimension",
        }
    }

    pub fn is_bound(self) -> bool {
        matches!(
            self,
            Engine::BoundStatic | Engine::BoundPartial | Engine::BoundFull
        )
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown engine `{s}` (expected one of: {})",
                    Engine::ALL.map(Engine::name).join(", ")
                )
            })
    }
}

/// Barring policy as it appears in the `policy` CSV column:
/// `static:<p>`, `dynamic`, or `dynamic-est` (dynamic driven by the
/// pseudo-Bayesian backlog estimate instead of the true backlog).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyDesc {
    Static(f64),
    Dynamic,
    DynamicEst,
}

impl PolicyDesc {
    /// Collapses the estimated variant onto `dynamic` so simulation rows can
    /// be matched against bounds computed for the true-backlog policy.
    pub fn normalized(self) -> PolicyDesc {
        match self {
            PolicyDesc::DynamicEst => PolicyDesc::Dynamic,
            other => other,
        }
    }

    /// Stable string form of [`PolicyDesc::normalized`], usable as a map key.
    pub fn match_key(self) -> String {
        self.normalized().to_string()
    }
}

impl fmt::Display for PolicyDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyDesc::Static(p) => write!(f, "static:{}", fmt_f64(*p)),
            PolicyDesc::Dynamic => f.write_str("dynamic"),
            PolicyDesc::DynamicEst => f.write_str("dynamic-est"),
        }
    }
}

impl FromStr for PolicyDesc {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "dynamic" {
            return Ok(PolicyDesc::Dynamic);
        }
        if s == "dynamic-est" {
            return Ok(PolicyDesc::DynamicEst);
        }
        if let Some(p) = s.strip_prefix("static:") {
            let p: f64 = p
                .parse()
                .map_err(|_| format!("bad access probability in policy `{s}`"))?;
            return Ok(PolicyDesc::Static(p));
        }
        Err(format!(
            "unknown policy `{s}` (expected static:<p>, dynamic, or dynamic-est)"
        ))
    }
}

/// One evaluated point. `value` is the engine's headline number: a violation
/// probability (bounds, oracle, simulate), a certified backlog level
/// (bound-static in backlog mode), or a device count (dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub engine: Engine,
    pub n: Option<u64>,
    pub m: u32,
    pub policy: PolicyDesc,
    pub c: Option<f64>,
    pub b_eps: Option<u64>,
    pub eps: Option<f64>,
    pub t: u32,
    pub value: f64,
    pub theta_star: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let mut fields: Vec<String> = Vec::with_capacity(COLUMNS);
        fields.push(self.engine.to_string());
        fields.push(opt(self.n.map(|v| v.to_string())));
        fields.push(self.m.to_string());
        fields.push(self.policy.to_string());
        fields.push(opt(self.c.map(fmt_f64)));
        fields.push(opt(self.b_eps.map(|v| v.to_string())));
        fields.push(opt(self.eps.map(fmt_f64)));
        fields.push(self.t.to_string());
        fields.push(fmt_f64(self.value));
        fields.push(opt(self.theta_star.map(fmt_f64)));
        fields.push(opt(self.ci_low.map(fmt_f64)));
        fields.push(opt(self.ci_high.map(fmt_f64)));
        fields.push(opt(self.samples.map(|v| v.to_string())));
        fields.push(opt(self.seed.map(|v| v.to_string())));
        fields.join(",")
    }

    pub fn parse_csv(line: &str) -> Result<ResultRow> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != COLUMNS {
            bail!(
                "expected {COLUMNS} comma-separated fields, found {}: `{line}`",
                fields.len()
            );
        }
        Ok(ResultRow {
            engine: fields[0].parse::<Engine>().map_err(anyhow::Error::msg)?,
            n: parse_opt(fields[1], "n")?,
            m: parse_req(fields[2], "m")?,
            policy: fields[3]
                .parse::<PolicyDesc>()
                .map_err(anyhow::Error::msg)?,
            c: parse_opt(fields[4], "c")?,
            b_eps: parse_opt(fields[5], "b_eps")?,
            eps: parse_opt(fields[6], "eps")?,
            t: parse_req(fields[7], "t")?,
            value: parse_req(fields[8], "value")?,
            theta_star: parse_opt(fields[9], "theta_star")?,
            ci_low: parse_opt(fields[10], "ci_low")?,
            ci_high: parse_opt(fields[11], "ci_high")?,
            samples: parse_opt(fields[12], "samples")?,
            seed: parse_opt(fields[13], "seed")?,
        })
    }
}

fn opt(v: Option<String>) -> String {
    v.unwrap_or_default()
}

fn parse_opt<T: FromStr>(field: &str, name: &str) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<T>()
        .map(Some)
        .map_err(|_| anyhow::anyhow!("bad value `{field}` in column {name}"))
}

fn parse_req<T: FromStr>(field: &str, name: &str) -> Result<T> {
    parse_opt(field, name)?.ok_or_else(|| anyhow::anyhow!("column {name} must not be empty"))
}

/// Shortest round-trip form; scientific notation outside [1e-4, 1e7) keeps
/// tiny probabilities readable.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a < 1e-4 || a >= 1e7 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn to_csv_string(rows: &[ResultRow]) -> String {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    text
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_all(to_csv_string(rows).as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => bail!(
            "{}: unexpected header `{header}` (expected `{CSV_HEADER}`)",
            path.display()
        ),
        None => bail!("{}: empty file", path.display()),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = ResultRow::parse_csv(line)
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
        rows.push(row);
    }
    Ok(rows)
}
