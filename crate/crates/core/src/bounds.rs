//! Chernoff/MGF tail bounds on backlog and burst resolution.
//!
//! The exact transient analysis in [`crate::oracle`] costs O(t * N * M) per
//! slot and becomes the bottleneck when sweeping scenarios or dimensioning.
//! The bounds here replace the exact law with moment generating functions:
//! for a violation target they evaluate
//!
//! ```text
//! eps(b, t) = inf_theta e^{-theta b} ( E[e^{theta B(t)}] + sum_{tau=1..t} M_S(theta, tau, t) )
//! ```
//!
//! where `M_S(theta, tau, t)` is the transform of the service accumulated in
//! slots `tau+1..=t` started from the exact backlog law at `tau`. For the
//! dynamic policy the per-slot service transform is replaced by a
//! backlog-independent one (admitted devices dominated by Poisson(M)), which
//! turns the sum into a geometric series and makes the cost independent of N.

use crate::error::{Error, Result};
use crate::logexp::{ln_one_minus_exp, logsumexp, logsumexp2};
use crate::oracle::{
    first_passage_dist, first_passage_horizon, BacklogDistribution, BacklogEvolver,
};
use crate::prob::occupancy_success_table;
use crate::scenario::{BarringPolicy, QosRequirement, ScenarioParams, SplitConfig};
use rayon::prelude::*;

/// Truncation tolerance for the Poisson admission weights in the dynamic
/// per-slot transform. The discarded tail is folded in as zero-service mass,
/// so truncation only loosens the bound.
const POISSON_TAIL_TOL: f64 = 1e-12;

/// Search window and stopping rule for the transform parameter theta.
#[derive(Debug, Clone, Copy)]
pub struct ThetaSearch {
    theta_min: f64,
    theta_max: f64,
    grid_points: usize,
    tolerance: f64,
}

impl Default for ThetaSearch {
    fn default() -> Self {
        ThetaSearch {
            theta_min: 1e-4,
            theta_max: 50.0,
            grid_points: 64,
            tolerance: 1e-6,
        }
    }
}

impl ThetaSearch {
    pub fn new(theta_min: f64, theta_max: f64, grid_points: usize, tolerance: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite()) || theta_min <= 0.0 {
            return Err(Error::invalid("theta window must be finite and positive"));
        }
        if theta_max <= theta_min {
            return Err(Error::invalid("theta_max must exceed theta_min"));
        }
        if grid_points < 16 {
            return Err(Error::invalid("theta grid needs at least 16 points"));
        }
        if !(tolerance > 0.0 && tolerance < 0.1) {
            return Err(Error::invalid("theta tolerance must lie in (0, 0.1)"));
        }
        Ok(ThetaSearch {
            theta_min,
            theta_max,
            grid_points,
            tolerance,
        })
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Outcome of a single bound evaluation.
///
/// `value` is the bound itself (a probability for violation bounds, a backlog
/// level for backlog bounds), already clamped to its valid range; `log_value`
/// carries the unclamped-precision natural log for probability bounds and is
/// NaN for backlog bounds. `theta_star` is the minimizing transform parameter
/// when the bound comes from a single optimization (mixtures report None).
/// `converged = false` flags an optimum pinned at the upper end of the search
/// window while still descending; the value is a valid bound regardless, just
/// potentially loose. `grid` keeps the coarse (theta, objective) samples as a
/// certificate of where the minimum was found.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub value: f64,
    pub log_value: f64,
    pub theta_star: Option<f64>,
    pub clamped: bool,
    pub converged: bool,
    pub grid: Vec<(f64, f64)>,
}

pub(crate) struct ThetaMinimum {
    pub theta: f64,
    pub objective: f64,
    pub converged: bool,
    pub grid: Vec<(f64, f64)>,
}

/// Minimizes an objective over theta: coarse log-spaced grid, then
/// golden-section refinement around the best grid point. NaN objectives are
/// treated as +inf so the search walks out of invalid regions.
pub(crate) fn minimize_theta<F>(search: &ThetaSearch, mut objective: F) -> ThetaMinimum
where
    F: FnMut(f64) -> f64,
{
    let mut eval = |theta: f64| {
        let v = objective(theta);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = search.grid_points;
    let (lmin, lmax) = (search.theta_min.ln(), search.theta_max.ln());
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let theta = (lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp();
        grid.push((theta, eval(theta)));
    }
    let mut best_i = 0;
    for (i, &(_, v)) in grid.iter().enumerate() {
        if v < grid[best_i].1 {
            best_i = i;
        }
    }
    let (mut best_theta, mut best_v) = grid[best_i];
    let converged = best_i + 1 < n || grid[n - 1].1 >= grid[n - 2].1;

    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = grid[best_i.saturating_sub(1)].0;
    let mut b = grid[(best_i + 1).min(n - 1)].0;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..200 {
        if fc < best_v {
            best_v = fc;
            best_theta = c;
        }
        if fd < best_v {
            best_v = fd;
            best_theta = d;
        }
        if b - a <= search.tolerance * b.max(search.theta_min) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = eval(d);
        }
    }
    ThetaMinimum {
        theta: best_theta,
        objective: best_v,
        converged,
        grid,
    }
}

fn probability_result(min: ThetaMinimum) -> BoundResult {
    let clamped = min.objective > 0.0;
    let log_value = min.objective.min(0.0);
    BoundResult {
        value: log_value.exp(),
        log_value,
        theta_star: Some(min.theta),
        clamped,
        converged: min.converged,
        grid: min.grid,
    }
}

/// Log-MGF of the cumulative arrivals over `(0, t]` plus the initial burst,
/// i.e. log E[e^{theta A(0,t)}]. Only the synchronized burst is supported:
/// everything arrives at slot 0, so the transform is `theta * N` for any t.
pub fn arrival_log_mgf(theta: f64, scenario: &ScenarioParams) -> Result<f64> {
    scenario.require_delta("arrival transform")?;
    Ok(theta * scenario.devices() as f64)
}

/// Log of E[e^{-theta S(0,t)}] for the cumulative service under a fixed
/// access probability, evaluated from the exact service law.
pub fn static_service_log_mgf(
    theta: f64,
    scenario: &ScenarioParams,
    access_prob: f64,
    t: u32,
) -> Result<f64> {
    let svc = crate::oracle::cumulative_service_dist(scenario, access_prob, t)?;
    let terms: Vec<f64> = svc
        .iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(k, w)| -theta * k as f64 + w.ln())
        .collect();
    Ok(logsumexp(&terms))
}

/// Precomputed state for bound evaluation under a fixed access probability:
/// the exact backlog laws up to a horizon plus the transition rows, both of
/// which are theta-independent and shared across the theta search.
pub struct StaticHorizon {
    laws: Vec<Vec<f64>>,
    kernels: Vec<Box<[f64]>>,
    devices: u64,
    preambles: u32,
    horizon: u32,
}

impl StaticHorizon {
    pub fn new(scenario: &ScenarioParams, access_prob: f64, horizon: u32) -> Result<Self> {
        scenario.require_delta("static-policy transform")?;
        if horizon == 0 {
            return Err(Error::invalid("bound horizon must be at least one slot"));
        }
        let policy = BarringPolicy::fixed(access_prob)?;
        let mut evolver = BacklogEvolver::new(scenario.preambles(), policy)?;
        let n = scenario.devices() as usize;
        let mut laws = Vec::with_capacity(horizon as usize + 1);
        let mut dist = BacklogDistribution::initial(scenario);
        laws.push(dense_law(&dist, n));
        for _ in 0..horizon {
            dist = evolver.evolve(&dist);
            laws.push(dense_law(&dist, n));
        }
        let kernels = (0..=scenario.devices())
            .map(|k| evolver.kernel(k).into())
            .collect();
        Ok(StaticHorizon {
            laws,
            kernels,
            devices: scenario.devices(),
            preambles: scenario.preambles(),
            horizon,
        })
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// log( E[e^{theta B(t)}] + sum_{tau=1..t} E[e^{-theta S(tau,t)}] ).
    ///
    /// The tau=0 term of the generic bound, e^{theta N} E[e^{-theta S(0,t)}],
    /// equals E[e^{theta B(t)}] exactly (service is N minus backlog under a
    /// synchronized burst) and is evaluated in the log domain. The tau>=1
    /// terms run a backward pass over per-slot factors e^{-theta k} which all
    /// lie in (0, 1], so plain arithmetic cannot overflow.
    pub fn log_msum(&self, theta: f64, t: u32) -> f64 {
        assert!(
            t >= 1 && t <= self.horizon,
            "t={t} outside prepared horizon {}",
            self.horizon
        );
        let t = t as usize;
        let n = self.devices as usize;
        let weights: Vec<f64> = (0..=self.preambles as usize)
            .map(|k| (-theta * k as f64).exp())
            .collect();

        let terms: Vec<f64> = self.laws[t]
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(i, &w)| theta * i as f64 + w.ln())
            .collect();
        let burst_term = logsumexp(&terms);

        let mut psi = vec![1.0f64; n + 1];
        let mut next = vec![0.0f64; n + 1];
        let mut dot_sum: f64 = self.laws[t].iter().sum();
        for tau in (1..t).rev() {
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, &q) in self.kernels[i].iter().enumerate() {
                    acc += q * weights[k] * psi[i - k];
                }
                *slot = acc;
            }
            std::mem::swap(&mut psi, &mut next);
            dot_sum += self.laws[tau].iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>();
        }
        let service_term = if dot_sum > 0.0 {
            dot_sum.ln()
        } else {
            f64::NEG_INFINITY
        };
        logsumexp2(burst_term, service_term)
    }
}

fn dense_law(dist: &BacklogDistribution, n: usize) -> Vec<f64> {
    let mut law = vec![0.0; n + 1];
    for (v, w) in dist.pmf().iter() {
        law[v as usize] = w;
    }
    law
}

/// Upper bound on P[backlog(t) > b] under a fixed access probability.
pub fn static_violation_bound(
    scenario: &ScenarioParams,
    access_prob: f64,
    t: u32,
    b: u64,
    search: &ThetaSearch,
) -> Result<BoundResult> {
    let horizon = StaticHorizon::new(scenario, access_prob, t)?;
    Ok(static_violation_at(&horizon, t, b, search))
}

fn static_violation_at(horizon: &StaticHorizon, t: u32, b: u64, search: &ThetaSearch) -> BoundResult {
    let min = minimize_theta(search, |theta| {
        -theta * b as f64 + horizon.log_msum(theta, t)
    });
    probability_result(min)
}

/// [`static_violation_bound`] for every t = 1..=t_max, sharing the backlog
/// laws and kernel rows across the sweep.
pub fn static_violation_sweep(
    scenario: &ScenarioParams,
    access_prob: f64,
    t_max: u32,
    b: u64,
    search: &ThetaSearch,
) -> Result<Vec<BoundResult>> {
    let horizon = StaticHorizon::new(scenario, access_prob, t_max)?;
    Ok((1..=t_max)
        .into_par_iter()
        .map(|t| static_violation_at(&horizon, t, b, search))
        .collect())
}

/// Smallest backlog level b such that P[backlog(t) > b] <= eps is certified,
/// under a fixed access probability. The returned value is clamped to
/// [0, devices]; `clamped` reports when the optimizer wanted to leave that
/// range (eps unreachable, or trivially satisfied).
pub fn static_backlog_bound(
    scenario: &ScenarioParams,
    access_prob: f64,
    t: u32,
    eps: f64,
    search: &ThetaSearch,
) -> Result<BoundResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("violation target must lie in (0, 1)"));
    }
    let horizon = StaticHorizon::new(scenario, access_prob, t)?;
    let ln_eps = eps.ln();
    let min = minimize_theta(search, |theta| {
        (horizon.log_msum(theta, t) - ln_eps) / theta
    });
    let n = scenario.devices() as f64;
    let clamped = min.objective < 0.0 || min.objective > n;
    Ok(BoundResult {
        value: min.objective.clamp(0.0, n),
        log_value: f64::NAN,
        theta_star: Some(min.theta),
        clamped,
        converged: min.converged,
        grid: min.grid,
    })
}

/// Per-slot service transform under the dynamic optimal policy with the
/// admitted count replaced by its Poisson(M) majorant: a table of Poisson
/// weights and contention-success rows, independent of the backlog.
pub struct DynamicServiceMgf {
    preambles: u32,
    weights: Vec<f64>,
    occupancy: Vec<Vec<f64>>,
    tail: f64,
}

impl DynamicServiceMgf {
    pub fn new(preambles: u32, tail_tol: f64) -> Result<Self> {
        if preambles == 0 {
            return Err(Error::invalid("preamble count must be >= 1"));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-3) {
            return Err(Error::invalid("Poisson tail tolerance must lie in (0, 1e-3]"));
        }
        let lambda = preambles as f64;
        let mut weights = vec![(-lambda).exp()];
        let mut cum = weights[0];
        while 1.0 - cum > tail_tol {
            let x = weights.len();
            let w = weights[x - 1] * lambda / x as f64;
            weights.push(w);
            cum += w;
        }
        let occupancy = occupancy_success_table(preambles, weights.len() as u64 - 1);
        Ok(DynamicServiceMgf {
            preambles,
            weights,
            occupancy,
            tail: (1.0 - cum).max(0.0),
        })
    }

    /// log E[e^{-theta s}] for one slot. The truncated Poisson tail counts as
    /// zero service (factor 1), so truncation is conservative.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        let weights_k: Vec<f64> = (0..=self.preambles as usize)
            .map(|k| (-theta * k as f64).exp())
            .collect();
        let mut total = self.tail;
        for (x, &w) in self.weights.iter().enumerate() {
            let mut slot = 0.0;
            for (k, &q) in self.occupancy[x].iter().enumerate() {
                slot += q * weights_k[k];
            }
            total += w * slot;
        }
        total.ln()
    }
}

/// One-shot evaluation of the dynamic per-slot service transform.
pub fn dynamic_slot_log_mgf(theta: f64, preambles: u32, tail_tol: f64) -> Result<f64> {
    Ok(DynamicServiceMgf::new(preambles, tail_tol)?.log_mgf(theta))
}

/// Upper bound on P[backlog(t) > b] under the dynamic optimal policy, valid
/// for targets b >= M (the regime where the policy keeps the admitted count
/// near M and the Poisson majorant applies). The geometric series over tau is
/// evaluated in the log domain via expm1 to stay stable near ratio 1.
pub fn partial_violation_bound(
    devices: u64,
    preambles: u32,
    backlog_target: u64,
    t: u32,
    search: &ThetaSearch,
) -> Result<BoundResult> {
    if devices == 0 {
        return Err(Error::invalid("device count must be >= 1"));
    }
    if t == 0 {
        return Err(Error::invalid("bound horizon must be at least one slot"));
    }
    if backlog_target < preambles as u64 {
        return Err(Error::invalid(format!(
            "partial-resolution target must be >= preamble count (got b={backlog_target}, m={preambles}); \
             use the full-resolution bound below that"
        )));
    }
    let mgf = DynamicServiceMgf::new(preambles, POISSON_TAIL_TOL)?;
    Ok(partial_violation_at(
        &mgf,
        devices,
        backlog_target,
        t,
        search,
    ))
}

fn partial_violation_at(
    mgf: &DynamicServiceMgf,
    devices: u64,
    backlog_target: u64,
    t: u32,
    search: &ThetaSearch,
) -> BoundResult {
    let n = devices as f64;
    let b = backlog_target as f64;
    let min = minimize_theta(search, |theta| {
        let lm = mgf.log_mgf(theta);
        let burst = theta * n + t as f64 * lm;
        let geometric = if t == 1 {
            f64::NEG_INFINITY
        } else {
            lm + ln_one_minus_exp((t - 1) as f64 * lm) - ln_one_minus_exp(lm)
        };
        -theta * b + logsumexp2(burst, geometric)
    });
    probability_result(min)
}

/// [`partial_violation_bound`] for every t = 1..=t_max.
pub fn partial_violation_sweep(
    devices: u64,
    preambles: u32,
    backlog_target: u64,
    t_max: u32,
    search: &ThetaSearch,
) -> Result<Vec<BoundResult>> {
    if devices == 0 {
        return Err(Error::invalid("device count must be >= 1"));
    }
    if backlog_target < preambles as u64 {
        return Err(Error::invalid(
            "partial-resolution target must be >= preamble count",
        ));
    }
    let mgf = DynamicServiceMgf::new(preambles, POISSON_TAIL_TOL)?;
    Ok((1..=t_max)
        .into_par_iter()
        .map(|t| partial_violation_at(&mgf, devices, backlog_target, t, search))
        .collect())
}

/// Upper bound on P[backlog(t) > 0] (full resolution) under the dynamic
/// optimal policy.
///
/// The trajectory is split at the level ceil(c * M): the descent from N to
/// the split level is covered by the partial bound, the remainder by the
/// exact first-passage law from the split level to zero, and the two phases
/// are composed by convolution. Residual first-passage mass beyond the
/// horizon is counted as unresolved (factor one), so every approximation
/// loosens rather than tightens. When the split level already covers N the
/// result collapses to the exact first-passage tail.
pub fn full_violation_bound(
    devices: u64,
    preambles: u32,
    split: SplitConfig,
    t: u32,
    search: &ThetaSearch,
) -> Result<BoundResult> {
    let mut sweep = full_violation_sweep(devices, preambles, split, t, search)?;
    sweep.pop().ok_or_else(|| Error::invalid("bound horizon must be at least one slot"))
}

/// [`full_violation_bound`] for every t = 1..=t_max. The first-passage law
/// and the partial-bound sweep are computed once and shared.
pub fn full_violation_sweep(
    devices: u64,
    preambles: u32,
    split: SplitConfig,
    t_max: u32,
    search: &ThetaSearch,
) -> Result<Vec<BoundResult>> {
    if devices == 0 {
        return Err(Error::invalid("device count must be >= 1"));
    }
    if t_max == 0 {
        return Err(Error::invalid("bound horizon must be at least one slot"));
    }
    let boundary = split.boundary(preambles);
    if boundary >= devices {
        return exact_resolution_tail(devices, preambles, t_max);
    }

    let horizon = first_passage_horizon(boundary, preambles).max(t_max);
    let passage = first_passage_dist(
        boundary,
        0,
        BarringPolicy::DynamicOptimal,
        preambles,
        horizon,
    )?;
    let partials = partial_violation_sweep(devices, preambles, boundary, t_max, search)?;

    let mut passage_mass = vec![0.0f64; t_max as usize + 1];
    for (x, w) in passage.iter() {
        if x <= t_max as u64 {
            passage_mass[x as usize] = w;
        }
    }
    let mut results = Vec::with_capacity(t_max as usize);
    let mut converged = true;
    for t in 1..=t_max as usize {
        // (1 - P[descent <= t]) + sum_x w_x * tail(t - x), folded into
        // 1 - sum_x w_x * (1 - tail(t - x)): descent mass beyond t and
        // factor-one terms drop out exactly, so the saturated region stays
        // at exactly 1.0 instead of drifting an ulp below the simulated
        // CCDF it must dominate.
        let mut deficit = 0.0;
        for (x, &w) in passage_mass.iter().enumerate().take(t) {
            if w == 0.0 {
                continue;
            }
            deficit += w * (1.0 - partials[t - x - 1].value);
        }
        let value = (1.0 - deficit).max(0.0);
        converged = converged && partials[t - 1].converged;
        results.push(BoundResult {
            value,
            log_value: value.ln(),
            theta_star: None,
            clamped: false,
            converged,
            grid: Vec::new(),
        });
    }
    Ok(results)
}

/// Exact P[resolution time > t] for t = 1..=t_max, used when the split level
/// covers the whole burst.
fn exact_resolution_tail(devices: u64, preambles: u32, t_max: u32) -> Result<Vec<BoundResult>> {
    let horizon = first_passage_horizon(devices, preambles).max(t_max);
    let passage = first_passage_dist(
        devices,
        0,
        BarringPolicy::DynamicOptimal,
        preambles,
        horizon,
    )?;
    let mut results = Vec::with_capacity(t_max as usize);
    let mut cdf = 0.0;
    for t in 1..=t_max as u64 {
        cdf += passage.mass(t);
        let value = (1.0 - cdf).max(0.0);
        results.push(BoundResult {
            value,
            log_value: value.ln(),
            theta_star: None,
            clamped: false,
            converged: true,
            grid: Vec::new(),
        });
    }
    Ok(results)
}

/// Outcome of a dimensioning search: the largest device count whose bound
/// meets the target, the probed (devices, bound) pairs in evaluation order,
/// and whether those probes were monotone in the device count (a diagnostic
/// for the bound itself; the answer is valid either way).
#[derive(Debug, Clone)]
pub struct Dimensioning {
    pub n_max: u64,
    pub probes: Vec<(u64, f64)>,
    pub monotone: bool,
}

const DEVICE_SEARCH_CAP: u64 = 1 << 34;

/// Largest burst size N whose violation bound meets the QoS target
/// (b, t, eps): the full-resolution bound when b = 0, the partial bound when
/// b >= M. Targets strictly between 0 and M are not certifiable here.
/// Exponential bracketing followed by bisection; the bound is evaluated
/// O(log N) times.
pub fn max_supported_devices(
    preambles: u32,
    qos: &QosRequirement,
    split: SplitConfig,
    search: &ThetaSearch,
) -> Result<Dimensioning> {
    let b = qos.backlog_target;
    if b != 0 && b < preambles as u64 {
        return Err(Error::invalid(format!(
            "dimensioning target b={b} lies strictly between 0 and m={preambles}; \
             certifiable targets are b = 0 or b >= m"
        )));
    }
    let t = qos.deadline;
    let eps = qos.violation_prob;
    let mut probes = Vec::new();
    let eval = |n: u64, probes: &mut Vec<(u64, f64)>| -> Result<f64> {
        let value = if b == 0 {
            full_violation_bound(n, preambles, split, t, search)?.value
        } else {
            partial_violation_bound(n, preambles, b, t, search)?.value
        };
        probes.push((n, value));
        Ok(value)
    };

    if eval(1, &mut probes)? > eps {
        return Ok(Dimensioning {
            n_max: 0,
            monotone: probes_monotone(&probes),
            probes,
        });
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while eval(hi, &mut probes)? <= eps {
        lo = hi;
        if hi >= DEVICE_SEARCH_CAP {
            return Err(Error::unsupported(format!(
                "bound still meets the target at {DEVICE_SEARCH_CAP} devices; \
             the requirement does not constrain the burst size"
            )));
        }
        hi = (hi * 2).min(DEVICE_SEARCH_CAP);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid, &mut probes)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Dimensioning {
        n_max: lo,
        monotone: probes_monotone(&probes),
        probes,
    })
}

fn probes_monotone(probes: &[(u64, f64)]) -> bool {
    let mut sorted = probes.to_vec();
    sorted.sort_by_key(|&(n, _)| n);
    sorted
        .windows(2)
        .all(|w| w[0].0 == w[1].0 || w[1].1 >= w[0].1 - 1e-9 * (1.0 + w[0].1.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{backlog_distribution, exact_violation};
    use crate::prob::{success_dist_given_backlog, ContentionParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn delta(n: u64, m: u32) -> ScenarioParams {
        ScenarioParams::delta_burst(n, m).unwrap()
    }

    fn search() -> ThetaSearch {
        ThetaSearch::default()
    }

    #[test]
    fn theta_search_finds_interior_minimum() {
        let min = minimize_theta(&search(), |t| (t - 3.0).powi(2) + 1.0);
        assert_relative_eq!(min.theta, 3.0, epsilon = 1e-4);
        assert_relative_eq!(min.objective, 1.0, epsilon = 1e-8);
        assert!(min.converged);
        assert_eq!(min.grid.len(), 64);
    }

    #[test]
    fn theta_search_flags_descent_at_window_edge() {
        let min = minimize_theta(&search(), |t| -t);
        assert!(!min.converged);
        assert_relative_eq!(min.theta, 50.0, epsilon = 1e-3);
    }

    #[test]
    fn theta_search_treats_nan_as_infeasible() {
        let min = minimize_theta(&search(), |t| {
            if t > 1.0 {
                f64::NAN
            } else {
                (t - 0.5).powi(2)
            }
        });
        assert_relative_eq!(min.theta, 0.5, epsilon = 1e-4);
        assert!(min.converged);
    }

    #[test]
    fn theta_search_validation() {
        assert!(ThetaSearch::new(0.0, 50.0, 64, 1e-6).is_err());
        assert!(ThetaSearch::new(1.0, 0.5, 64, 1e-6).is_err());
        assert!(ThetaSearch::new(1e-4, 50.0, 8, 1e-6).is_err());
        assert!(ThetaSearch::new(1e-4, 50.0, 64, 0.5).is_err());
    }

    #[test]
    fn arrival_transform_is_linear_in_burst_size() {
        let s = delta(40, 10);
        assert_relative_eq!(arrival_log_mgf(0.25, &s).unwrap(), 10.0, epsilon = 1e-12);
        let uniform =
            ScenarioParams::new(40, 10, crate::scenario::ArrivalModel::Uniform, 5).unwrap();
        assert!(arrival_log_mgf(0.25, &uniform).is_err());
    }

    #[test]
    fn static_service_transform_hand_checked() {
        // Three devices, two preambles, p = 1, one slot: S is 1 w.p. 3/4 and
        // 0 w.p. 1/4, so E[e^{-theta S}] = 1/4 + 3/4 e^{-theta}.
        let theta: f64 = 0.5;
        let got = static_service_log_mgf(theta, &delta(3, 2), 1.0, 1).unwrap();
        let expected = (0.25 + 0.75 * (-theta).exp()).ln();
        assert_relative_eq!(got, expected, epsilon = 1e-12);
    }

    #[test]
    fn dynamic_transform_single_preamble_closed_form() {
        // M = 1: only an admitted count of exactly one yields service, so
        // E[e^{-theta s}] = 1 - e^{-1} (1 - e^{-theta}).
        for theta in [0.1, 0.7, 3.0, 20.0] {
            let got = dynamic_slot_log_mgf(theta, 1, 1e-12).unwrap();
            let expected = (1.0 - (-1.0f64).exp() * (1.0 - (-theta).exp())).ln();
            assert_relative_eq!(got, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn dynamic_transform_dominates_exact_per_slot_transform() {
        // The Poisson majorant must upper-bound the exact one-slot transform
        // E[e^{-theta s} | B = n] under p = m/n, for every backlog n >= m.
        let m = 10u32;
        let mgf = DynamicServiceMgf::new(m, 1e-12).unwrap();
        for n in [30u64, 100, 1000] {
            let p = ContentionParams::new(m, (m as f64 / n as f64).min(1.0)).unwrap();
            let exact = success_dist_given_backlog(n, p);
            for theta in [0.05, 0.3, 1.0, 5.0, 20.0] {
                let exact_lm = exact
                    .iter()
                    .map(|(k, w)| w * (-theta * k as f64).exp())
                    .sum::<f64>()
                    .ln();
                assert!(
                    mgf.log_mgf(theta) >= exact_lm - 1e-12,
                    "majorant violated at n={n} theta={theta}"
                );
            }
        }
    }

    #[test]
    fn static_bound_dominates_exact_violation() {
        let s = delta(10, 3);
        for &p in &[0.3, 1.0] {
            for t in [1u32, 3, 7, 15] {
                for b in [0u64, 2, 5] {
                    let bound = static_violation_bound(&s, p, t, b, &search()).unwrap();
                    let exact =
                        exact_violation(&s, BarringPolicy::fixed(p).unwrap(), t, b).unwrap();
                    assert!(
                        bound.value >= exact - 1e-12,
                        "static bound below exact at p={p} t={t} b={b}: {} < {exact}",
                        bound.value
                    );
                }
            }
        }
    }

    #[test]
    fn static_sweep_matches_pointwise_bounds() {
        let s = delta(8, 2);
        let sweep = static_violation_sweep(&s, 0.6, 12, 1, &search()).unwrap();
        assert_eq!(sweep.len(), 12);
        for t in [1u32, 5, 12] {
            let single = static_violation_bound(&s, 0.6, t, 1, &search()).unwrap();
            assert_relative_eq!(
                sweep[t as usize - 1].value,
                single.value,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn backlog_bound_clamps_when_service_is_impossible() {
        // Five devices on one preamble with p = 1 collide forever: no eps in
        // (0,1) is certifiable below the full burst size.
        let bound = static_backlog_bound(&delta(5, 1), 1.0, 10, 0.5, &search()).unwrap();
        assert_eq!(bound.value, 5.0);
        assert!(bound.clamped);
    }

    #[test]
    fn backlog_bound_dominates_exact_quantile() {
        let s = delta(20, 5);
        let p = 0.5;
        let t = 40u32;
        let eps = 0.25;
        let bound = static_backlog_bound(&s, p, t, eps, &search()).unwrap();
        let dist = backlog_distribution(&s, BarringPolicy::fixed(p).unwrap(), t).unwrap();
        let exact_quantile = (0..=20u64)
            .find(|&b| dist.violation(b) <= eps)
            .unwrap() as f64;
        assert!(bound.value >= exact_quantile - 1e-9);
        assert!(bound.value <= 20.0);
        assert!(bound.log_value.is_nan());
    }

    #[test]
    fn partial_bound_requires_target_at_or_above_preambles() {
        assert!(partial_violation_bound(100, 10, 9, 5, &search()).is_err());
        assert!(partial_violation_bound(100, 10, 10, 5, &search()).is_ok());
    }

    #[test]
    fn partial_bound_dominates_exact_violation() {
        let m = 5u32;
        for n in [30u64, 60] {
            let s = delta(n, m);
            for b in [5u64, 15] {
                for t in [1u32, 8, 15, 29, 40] {
                    let bound = partial_violation_bound(n, m, b, t, &search()).unwrap();
                    let exact = exact_violation(&s, BarringPolicy::DynamicOptimal, t, b).unwrap();
                    assert!(
                        bound.value >= exact - 1e-12,
                        "partial bound below exact at n={n} b={b} t={t}: {} < {exact}",
                        bound.value
                    );
                }
            }
        }
    }

    #[test]
    fn partial_sweep_matches_pointwise_bounds() {
        let sweep = partial_violation_sweep(50, 5, 10, 20, &search()).unwrap();
        assert_eq!(sweep.len(), 20);
        for t in [1u32, 7, 20] {
            let single = partial_violation_bound(50, 5, 10, t, &search()).unwrap();
            assert_relative_eq!(
                sweep[t as usize - 1].value,
                single.value,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn full_bound_degenerates_to_exact_tail_for_small_bursts() {
        // Split level 3 * 10 = 30 covers a 20-device burst entirely.
        let n = 20u64;
        let m = 10u32;
        let s = delta(n, m);
        let sweep =
            full_violation_sweep(n, m, SplitConfig::new(3.0).unwrap(), 25, &search()).unwrap();
        for t in [1u32, 5, 12, 25] {
            let exact = exact_violation(&s, BarringPolicy::DynamicOptimal, t, 0).unwrap();
            assert_abs_diff_eq!(sweep[t as usize - 1].value, exact, epsilon = 1e-11);
            assert!(sweep[t as usize - 1].theta_star.is_none());
        }
    }

    #[test]
    fn full_bound_dominates_exact_violation() {
        let n = 50u64;
        let m = 10u32;
        let s = delta(n, m);
        let split = SplitConfig::new(3.0).unwrap();
        let sweep = full_violation_sweep(n, m, split, 60, &search()).unwrap();
        for t in [1u32, 5, 15, 30, 60] {
            let exact = exact_violation(&s, BarringPolicy::DynamicOptimal, t, 0).unwrap();
            let value = sweep[t as usize - 1].value;
            assert!(
                value >= exact - 1e-12,
                "full bound below exact at t={t}: {value} < {exact}"
            );
            assert!(value <= 1.0);
        }
        let single = full_violation_bound(n, m, split, 30, &search()).unwrap();
        assert_relative_eq!(single.value, sweep[29].value, max_relative = 1e-12);
    }

    #[test]
    fn looser_split_never_tightens_the_full_bound() {
        let n = 200u64;
        let m = 10u32;
        let tight = full_violation_sweep(n, m, SplitConfig::new(4.5).unwrap(), 60, &search())
            .unwrap();
        let loose = full_violation_sweep(n, m, SplitConfig::new(3.0).unwrap(), 60, &search())
            .unwrap();
        for t in 0..60 {
            assert!(
                tight[t].value <= loose[t].value + 1e-9,
                "c=4.5 looser than c=3.0 at t={}",
                t + 1
            );
        }
    }

    #[test]
    fn dimensioning_is_definitionally_tight() {
        let qos = QosRequirement::new(30, 50, 1e-3).unwrap();
        let search = search();
        let dim =
            max_supported_devices(10, &qos, SplitConfig::default(), &search).unwrap();
        assert!(dim.n_max >= 1);
        let at = partial_violation_bound(dim.n_max, 10, 30, 50, &search)
            .unwrap()
            .value;
        let above = partial_violation_bound(dim.n_max + 1, 10, 30, 50, &search)
            .unwrap()
            .value;
        assert!(at <= 1e-3, "bound at n_max exceeds target: {at}");
        assert!(above > 1e-3, "bound just above n_max meets target: {above}");
        assert!(dim.monotone);
        assert!(!dim.probes.is_empty());
    }

    #[test]
    fn dimensioning_full_resolution_path() {
        let qos = QosRequirement::new(0, 60, 1e-2).unwrap();
        let search = search();
        let split = SplitConfig::new(3.0).unwrap();
        let dim = max_supported_devices(5, &qos, split, &search).unwrap();
        assert!(dim.n_max >= 1);
        let at = full_violation_bound(dim.n_max, 5, split, 60, &search)
            .unwrap()
            .value;
        let above = full_violation_bound(dim.n_max + 1, 5, split, 60, &search)
            .unwrap()
            .value;
        assert!(at <= 1e-2);
        assert!(above > 1e-2);
    }

    #[test]
    fn dimensioning_reports_zero_for_unreachable_targets() {
        // One preamble: the per-slot transform is bounded away from zero by
        // the no-service probability, so even a single device cannot be
        // certified at an absurd target.
        let qos = QosRequirement::new(1, 10, 1e-250).unwrap();
        let dim =
            max_supported_devices(1, &qos, SplitConfig::default(), &search()).unwrap();
        assert_eq!(dim.n_max, 0);
        assert_eq!(dim.probes.len(), 1);
    }

    #[test]
    fn dimensioning_rejects_uncertifiable_targets() {
        let qos = QosRequirement::new(5, 10, 1e-2).unwrap();
        assert!(max_supported_devices(10, &qos, SplitConfig::default(), &search()).is_err());
    }
}
