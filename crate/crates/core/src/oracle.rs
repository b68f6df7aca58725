//! Exact transient analysis of the backlog chain under a synchronized burst.
//!
//! With no arrivals after slot 0 the backlog is a monotone Markov chain: from
//! `n` backlogged devices the slot removes `k` with the success distribution
//! of the contention kernel. Everything here evolves that chain exactly (up to
//! f64 rounding), which is what the Chernoff-style bounds are validated
//! against.

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::prob::{ln_factorials, OccupancyDp};
use crate::scenario::{BarringPolicy, ScenarioParams};

/// Distribution of the backlog at a given slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BacklogDistribution {
    slot: u32,
    pmf: Pmf,
}

impl BacklogDistribution {
    pub fn new(slot: u32, pmf: Pmf) -> Self {
        BacklogDistribution { slot, pmf }
    }

    /// Slot-0 state of a synchronized burst: all devices backlogged.
    pub fn initial(scenario: &ScenarioParams) -> Self {
        BacklogDistribution {
            slot: 0,
            pmf: Pmf::point(scenario.devices()),
        }
    }

    pub fn slot(&self) -> u32 {
        self.slot
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    /// P[backlog > b] at this slot.
    pub fn violation(&self, b: u64) -> f64 {
        self.pmf.tail_above(b)
    }
}

/// One-slot evolution engine with a per-backlog kernel cache.
///
/// The transition row for backlog `n` depends only on `n` (the dynamic policy
/// derives its access probability from `n`), so rows are computed once and
/// reused. An evolver is cheap to construct and not meant to be shared across
/// threads; give each worker its own.
pub struct BacklogEvolver {
    preambles: u32,
    policy: BarringPolicy,
    occupancy: OccupancyDp,
    lnfact: Vec<f64>,
    kernels: Vec<Option<Box<[f64]>>>,
}

impl BacklogEvolver {
    pub fn new(preambles: u32, policy: BarringPolicy) -> Result<Self> {
        if preambles == 0 {
            return Err(Error::invalid("preamble count must be >= 1"));
        }
        policy.validate()?;
        Ok(BacklogEvolver {
            preambles,
            policy,
            occupancy: OccupancyDp::new(preambles),
            lnfact: Vec::new(),
            kernels: Vec::new(),
        })
    }

    /// Transition row for backlog `n`: `kernel(n)[k]` is the probability that
    /// the slot resolves exactly `k` devices.
    pub fn kernel(&mut self, n: u64) -> &[f64] {
        self.ensure_kernels(n);
        self.kernels[n as usize].as_deref().expect("row just built")
    }

    fn ensure_kernels(&mut self, n_max: u64) {
        let n_max = n_max as usize;
        if self.kernels.len() <= n_max {
            self.kernels.resize(n_max + 1, None);
        }
        if self.lnfact.len() <= n_max {
            self.lnfact = ln_factorials(n_max.max(2 * self.lnfact.len()));
        }
        for n in 0..=n_max {
            if self.kernels[n].is_some() {
                continue;
            }
            self.kernels[n] = Some(self.build_kernel(n));
        }
    }

    fn build_kernel(&mut self, n: usize) -> Box<[f64]> {
        let m = self.preambles;
        let p = self.policy.access_prob(n as u64, m);
        let k_cap = n.min(m as usize);
        if p == 1.0 {
            return self.occupancy.row(n)[..=k_cap].into();
        }
        let lp = p.ln();
        let lq = (-p).ln_1p();
        let ln_n = self.lnfact[n];
        let mut row = vec![0.0; k_cap + 1];
        for x in 0..=n {
            let w = (ln_n - self.lnfact[x] - self.lnfact[n - x]
                + x as f64 * lp
                + (n - x) as f64 * lq)
                .exp();
            if w == 0.0 {
                continue;
            }
            for (k, &q) in self.occupancy.row(x).iter().enumerate() {
                row[k] += w * q;
            }
        }
        row.into()
    }

    /// Advances the backlog distribution by one contention slot.
    pub fn evolve(&mut self, dist: &BacklogDistribution) -> BacklogDistribution {
        let max_n = dist.pmf().support_max();
        if max_n == 0 {
            return BacklogDistribution::new(dist.slot() + 1, dist.pmf().clone());
        }
        self.ensure_kernels(max_n);
        let mut next = vec![0.0; max_n as usize + 1];
        for (n, w) in dist.pmf().iter() {
            if w == 0.0 {
                continue;
            }
            let row = self.kernels[n as usize].as_deref().expect("ensured above");
            for (k, &q) in row.iter().enumerate() {
                next[n as usize - k] += w * q;
            }
        }
        let pmf = Pmf::from_masses(0, next).expect("one-slot evolution conserves mass");
        BacklogDistribution::new(dist.slot() + 1, pmf)
    }
}

/// One-slot evolution as a standalone call. Builds a fresh kernel cache each
/// time; loops should use [`BacklogEvolver`] directly.
pub fn evolve(
    dist: &BacklogDistribution,
    policy: BarringPolicy,
    preambles: u32,
) -> Result<BacklogDistribution> {
    let mut evolver = BacklogEvolver::new(preambles, policy)?;
    Ok(evolver.evolve(dist))
}

/// Exact backlog distribution `t` slots after a synchronized burst.
pub fn backlog_distribution(
    scenario: &ScenarioParams,
    policy: BarringPolicy,
    t: u32,
) -> Result<BacklogDistribution> {
    scenario.require_delta("transient backlog analysis")?;
    let mut evolver = BacklogEvolver::new(scenario.preambles(), policy)?;
    let mut dist = BacklogDistribution::initial(scenario);
    for _ in 0..t {
        dist = evolver.evolve(&dist);
    }
    Ok(dist)
}

/// Exact violation probability P[backlog(t) > b].
pub fn exact_violation(
    scenario: &ScenarioParams,
    policy: BarringPolicy,
    t: u32,
    b: u64,
) -> Result<f64> {
    Ok(backlog_distribution(scenario, policy, t)?.violation(b))
}

/// P[backlog(t) > b] for every t = 0..=t_max in one evolution pass.
pub fn violation_curve(
    scenario: &ScenarioParams,
    policy: BarringPolicy,
    t_max: u32,
    b: u64,
) -> Result<Vec<f64>> {
    scenario.require_delta("transient backlog analysis")?;
    let mut evolver = BacklogEvolver::new(scenario.preambles(), policy)?;
    let mut dist = BacklogDistribution::initial(scenario);
    let mut curve = Vec::with_capacity(t_max as usize + 1);
    curve.push(dist.violation(b));
    for _ in 0..t_max {
        dist = evolver.evolve(&dist);
        curve.push(dist.violation(b));
    }
    Ok(curve)
}

/// Distribution of the first slot at which the backlog drops to `target` or
/// below, starting from `start` backlogged devices. Truncated at `t_max`; the
/// unabsorbed remainder shows up as missing mass (partial pmf).
pub fn first_passage_dist(
    start: u64,
    target: u64,
    policy: BarringPolicy,
    preambles: u32,
    t_max: u32,
) -> Result<Pmf> {
    if start <= target {
        return Err(Error::invalid(format!(
            "first passage needs start > target, got start={start} target={target}"
        )));
    }
    let mut evolver = BacklogEvolver::new(preambles, policy)?;
    let mut alive = vec![0.0f64; start as usize + 1];
    alive[start as usize] = 1.0;
    let mut next = vec![0.0f64; start as usize + 1];
    let mut absorbed = vec![0.0f64; t_max as usize + 1];
    evolver.ensure_kernels(start);
    for tau in 1..=t_max as usize {
        next.fill(0.0);
        let mut hit = 0.0;
        let mut alive_total = 0.0;
        for n in (target as usize + 1)..alive.len() {
            let w = alive[n];
            if w == 0.0 {
                continue;
            }
            let row = evolver.kernels[n].as_deref().expect("ensured above");
            for (k, &q) in row.iter().enumerate() {
                let dest = n - k;
                if dest as u64 <= target {
                    hit += w * q;
                } else {
                    next[dest] += w * q;
                    alive_total += w * q;
                }
            }
        }
        absorbed[tau] = hit;
        std::mem::swap(&mut alive, &mut next);
        if alive_total < 1e-18 {
            break;
        }
    }
    Pmf::from_truncated(0, absorbed)
}

/// Default truncation horizon for first-passage evaluations: ten times the
/// coarse resolution estimate start * e / m.
pub fn first_passage_horizon(start: u64, preambles: u32) -> u32 {
    let slots = (start as f64 * std::f64::consts::E / preambles as f64).ceil();
    (10.0 * slots.max(1.0)) as u32
}

/// First-passage distribution evaluated until the residual mass falls below
/// 1e-12, capped at [`first_passage_horizon`].
pub fn first_passage_dist_auto(
    start: u64,
    target: u64,
    policy: BarringPolicy,
    preambles: u32,
) -> Result<Pmf> {
    let cap = first_passage_horizon(start, preambles);
    let pmf = first_passage_dist(start, target, policy, preambles, cap)?;
    Ok(pmf)
}

/// Distribution of the cumulative service (resolved devices) `t` slots into a
/// synchronized burst under a fixed access probability. With no later
/// arrivals the cumulative service is exactly devices - backlog, so this is
/// the backlog law pushed through k -> N - k.
pub fn cumulative_service_dist(
    scenario: &ScenarioParams,
    access_prob: f64,
    t: u32,
) -> Result<Pmf> {
    let policy = BarringPolicy::fixed(access_prob)?;
    let bd = backlog_distribution(scenario, policy, t)?;
    let n = scenario.devices();
    let hi = bd.pmf().support_max();
    let mut masses = vec![0.0; bd.pmf().masses().len()];
    for (v, w) in bd.pmf().iter() {
        masses[(hi - v) as usize] = w;
    }
    Pmf::from_masses(n - hi, masses)
}
