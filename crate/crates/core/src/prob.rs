//! Per-slot contention kernels for preamble random access.
//!
//! A slot offers `m` orthogonal preambles. Each backlogged device transmits
//! with the barring probability `p`, picking a preamble uniformly; a preamble
//! chosen by exactly one device succeeds. Everything else in the crate is
//! built on the distributions computed here.

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use statrs::function::gamma::ln_gamma;

/// Number of preambles plus the access (barring) probability applied to every
/// backlogged device in a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionParams {
    preambles: u32,
    access_prob: f64,
}

impl ContentionParams {
    pub fn new(preambles: u32, access_prob: f64) -> Result<Self> {
        if preambles == 0 {
            return Err(Error::invalid("preamble count must be >= 1"));
        }
        if !(access_prob > 0.0 && access_prob <= 1.0) {
            return Err(Error::invalid(format!(
                "access probability must lie in (0, 1], got {access_prob}"
            )));
        }
        Ok(ContentionParams {
            preambles,
            access_prob,
        })
    }

    pub fn preambles(&self) -> u32 {
        self.preambles
    }

    pub fn access_prob(&self) -> f64 {
        self.access_prob
    }
}

/// Incremental occupancy DP: drops balls (devices) one at a time into `m` bins
/// (preambles), tracking the joint law of (singleton bins, collided bins).
///
/// Keeping the DP state around lets callers extend the table lazily instead of
/// recomputing from scratch for every new x.
pub(crate) struct OccupancyDp {
    m: usize,
    cur: Vec<f64>,
    next: Vec<f64>,
    balls: usize,
    rows: Vec<Vec<f64>>,
}

impl OccupancyDp {
    pub fn new(m: u32) -> Self {
        assert!(m >= 1, "preamble count must be >= 1");
        let m = m as usize;
        let side = m + 1;
        let mut cur = vec![0.0; side * side];
        cur[0] = 1.0;
        OccupancyDp {
            m,
            cur,
            next: vec![0.0; side * side],
            balls: 0,
            rows: vec![vec![1.0]],
        }
    }

    /// Distribution of the singleton count after `x` balls; `row(x)[k]` is the
    /// probability of exactly `k` singletons, k = 0..=min(x, m).
    pub fn row(&mut self, x: usize) -> &[f64] {
        self.extend_to(x);
        &self.rows[x]
    }

    pub fn rows_up_to(&mut self, x: usize) -> &[Vec<f64>] {
        self.extend_to(x);
        &self.rows[..=x]
    }

    fn extend_to(&mut self, x: usize) {
        let side = self.m + 1;
        let mf = self.m as f64;
        while self.balls < x {
            let i = self.balls;
            self.next.fill(0.0);
            let s_hi = i.min(self.m);
            let c_hi = (i / 2).min(self.m);
            for s in 0..=s_hi {
                for c in 0..=c_hi {
                    let w = self.cur[s * side + c];
                    if w == 0.0 {
                        continue;
                    }
                    let empty = (self.m - s - c) as f64;
                    if empty > 0.0 {
                        self.next[(s + 1) * side + c] += w * empty / mf;
                    }
                    if s > 0 {
                        self.next[(s - 1) * side + (c + 1)] += w * s as f64 / mf;
                    }
                    if c > 0 {
                        self.next[s * side + c] += w * c as f64 / mf;
                    }
                }
            }
            std::mem::swap(&mut self.cur, &mut self.next);
            self.balls += 1;
            let k_hi = self.balls.min(self.m);
            let mut row = vec![0.0; k_hi + 1];
            for (k, slot) in row.iter_mut().enumerate() {
                let c_top = (self.balls / 2).min(self.m);
                *slot = (0..=c_top).map(|c| self.cur[k * side + c]).sum();
            }
            self.rows.push(row);
        }
    }
}

/// Distribution of successful preambles when `x` devices each pick one of `m`
/// preambles uniformly at random (success = preamble picked exactly once).
pub fn occupancy_success_dist(x: u64, m: u32) -> Pmf {
    let mut dp = OccupancyDp::new(m);
    let row = dp.row(x as usize).to_vec();
    Pmf::from_masses(0, row).expect("occupancy DP conserves mass")
}

/// Occupancy success distributions for every device count up to `x_max`;
/// `table[x][k]` is the probability of `k` successes given `x` transmitters.
pub fn occupancy_success_table(m: u32, x_max: u64) -> Vec<Vec<f64>> {
    let mut dp = OccupancyDp::new(m);
    dp.rows_up_to(x_max as usize).to_vec()
}

/// ln(i!) for i = 0..=n.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n).map(|i| ln_gamma(i as f64 + 1.0)).collect()
}

fn binomial_masses(n: u64, p: f64, lnfact: &[f64]) -> Vec<f64> {
    let n_us = n as usize;
    let lp = p.ln();
    let lq = (-p).ln_1p();
    let ln_n = lnfact[n_us];
    (0..=n_us)
        .map(|x| {
            (ln_n - lnfact[x] - lnfact[n_us - x] + x as f64 * lp + (n_us - x) as f64 * lq).exp()
        })
        .collect()
}

/// Number of admitted transmitters out of `n` backlogged devices, each passing
/// the barring check independently with probability `p`: Binomial(n, p).
pub fn admission_dist(n: u64, p: f64) -> Pmf {
    assert!(
        p > 0.0 && p <= 1.0,
        "access probability must lie in (0, 1], got {p}"
    );
    if p == 1.0 || n == 0 {
        return Pmf::point(if p == 1.0 { n } else { 0 });
    }
    let lnfact = ln_factorials(n as usize);
    Pmf::from_masses(0, binomial_masses(n, p, &lnfact))
        .expect("binomial masses are normalized")
}

/// Distribution of successes in one slot given `n` backlogged devices:
/// admission mixed over the occupancy distribution.
pub fn success_dist_given_backlog(n: u64, params: ContentionParams) -> Pmf {
    let adm = admission_dist(n, params.access_prob());
    let mut dp = OccupancyDp::new(params.preambles());
    let k_cap = n.min(params.preambles() as u64) as usize;
    let mut masses = vec![0.0; k_cap + 1];
    for (x, w) in adm.iter() {
        if w == 0.0 {
            continue;
        }
        for (k, &q) in dp.row(x as usize).iter().enumerate() {
            masses[k] += w * q;
        }
    }
    Pmf::from_masses(0, masses).expect("success mixture conserves mass")
}

/// First-moment approximation of the per-slot successes when the admitted
/// count is replaced by its mean: E(1 - 1/m)^(E - 1).
pub fn expected_success(mean_admitted: f64, preambles: u32) -> f64 {
    assert!(preambles >= 1, "preamble count must be >= 1");
    assert!(
        mean_admitted >= 0.0,
        "mean admitted count must be non-negative"
    );
    if mean_admitted == 0.0 {
        return 0.0;
    }
    let r = 1.0 - 1.0 / preambles as f64;
    mean_admitted * r.powf(mean_admitted - 1.0)
}

/// Throughput-optimal barring probability min(1, m/B) for a backlog estimate
/// B, with p = 1 when the backlog is zero.
pub fn optimal_barring(backlog: f64, preambles: u32) -> f64 {
    assert!(preambles >= 1, "preamble count must be >= 1");
    assert!(backlog >= 0.0, "backlog must be non-negative");
    let m = preambles as f64;
    if backlog <= m {
        1.0
    } else {
        m / backlog
    }
}
