//! Scenario, policy, and QoS descriptions shared by the oracle, the bound
//! engine, and the simulator.

use crate::error::{Error, Result};
use crate::prob::optimal_barring;

/// When the burst's devices activate. Only the synchronized burst (all devices
/// backlogged at slot 0) is implemented; the spread-out models are reserved
/// variants that every operation currently rejects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalModel {
    /// All devices activate simultaneously at slot 0.
    Delta,
    /// Activation times uniform over the activation span (reserved).
    Uniform,
    /// Activation times Beta(alpha, beta)-distributed over the span (reserved).
    Beta { alpha: f64, beta: f64 },
}

impl ArrivalModel {
    pub fn is_delta(&self) -> bool {
        matches!(self, ArrivalModel::Delta)
    }
}

/// A burst scenario: how many devices contend for how many preambles, and how
/// their activation times are spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    devices: u64,
    preambles: u32,
    arrival: ArrivalModel,
    activation_span: u32,
}

impl ScenarioParams {
    pub fn new(
        devices: u64,
        preambles: u32,
        arrival: ArrivalModel,
        activation_span: u32,
    ) -> Result<Self> {
        if preambles == 0 {
            return Err(Error::invalid("preamble count must be >= 1"));
        }
        match arrival {
            ArrivalModel::Delta => {
                if activation_span != 0 {
                    return Err(Error::invalid(
                        "a synchronized burst has activation span 0",
                    ));
                }
            }
            ArrivalModel::Uniform => {}
            ArrivalModel::Beta { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::invalid(format!(
                        "beta arrival shape parameters must be positive, got ({alpha}, {beta})"
                    )));
                }
            }
        }
        Ok(ScenarioParams {
            devices,
            preambles,
            arrival,
            activation_span,
        })
    }

    /// The common case: `devices` all activating at slot 0.
    pub fn delta_burst(devices: u64, preambles: u32) -> Result<Self> {
        Self::new(devices, preambles, ArrivalModel::Delta, 0)
    }

    pub fn devices(&self) -> u64 {
        self.devices
    }

    pub fn preambles(&self) -> u32 {
        self.preambles
    }

    pub fn arrival(&self) -> ArrivalModel {
        self.arrival
    }

    pub fn activation_span(&self) -> u32 {
        self.activation_span
    }

    /// Error unless the scenario uses the synchronized burst model.
    pub fn require_delta(&self, what: &str) -> Result<()> {
        if self.arrival.is_delta() {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "{what} supports only the synchronized burst arrival model"
            )))
        }
    }
}

/// Access class barring policy: a fixed access probability, or the
/// throughput-optimal min(1, m/backlog) recomputed every slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarringPolicy {
    Static { access_prob: f64 },
    DynamicOptimal,
}

impl BarringPolicy {
    pub fn fixed(access_prob: f64) -> Result<Self> {
        if !(access_prob > 0.0 && access_prob <= 1.0) {
            return Err(Error::invalid(format!(
                "access probability must lie in (0, 1], got {access_prob}"
            )));
        }
        Ok(BarringPolicy::Static { access_prob })
    }

    /// Access probability applied to a slot with the given backlog.
    pub fn access_prob(&self, backlog: u64, preambles: u32) -> f64 {
        match *self {
            BarringPolicy::Static { access_prob } => access_prob,
            BarringPolicy::DynamicOptimal => optimal_barring(backlog as f64, preambles),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BarringPolicy::Static { access_prob } => {
                BarringPolicy::fixed(access_prob).map(|_| ())
            }
            BarringPolicy::DynamicOptimal => Ok(()),
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, BarringPolicy::DynamicOptimal)
    }
}

/// A reliability target: backlog level `backlog_target` must be reached within
/// `deadline` slots except with probability at most `violation_prob`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosRequirement {
    pub backlog_target: u64,
    pub deadline: u32,
    pub violation_prob: f64,
}

impl QosRequirement {
    pub fn new(backlog_target: u64, deadline: u32, violation_prob: f64) -> Result<Self> {
        if deadline == 0 {
            return Err(Error::invalid("deadline must be >= 1 slot"));
        }
        if !(violation_prob > 0.0 && violation_prob < 1.0) {
            return Err(Error::invalid(format!(
                "violation probability target must lie in (0, 1), got {violation_prob}"
            )));
        }
        Ok(QosRequirement {
            backlog_target,
            deadline,
            violation_prob,
        })
    }
}

/// Where the two-phase analysis of full burst resolution switches from the
/// Chernoff bound to the exact small-backlog chain: at backlog c * m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    factor: f64,
}

impl SplitConfig {
    pub fn new(factor: f64) -> Result<Self> {
        if !(factor > 1.0 && factor.is_finite()) {
            return Err(Error::invalid(format!(
                "split factor must be a finite number > 1, got {factor}"
            )));
        }
        Ok(SplitConfig { factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Backlog level where the bound hands over to the exact chain.
    pub fn boundary(&self, preambles: u32) -> u64 {
        (self.factor * preambles as f64).ceil() as u64
    }
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { factor: 3.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_validation() {
        assert!(ScenarioParams::delta_burst(100, 10).is_ok());
        assert!(ScenarioParams::delta_burst(100, 0).is_err());
        assert!(ScenarioParams::new(10, 5, ArrivalModel::Delta, 3).is_err());
        assert!(ScenarioParams::new(10, 5, ArrivalModel::Beta { alpha: 0.0, beta: 1.0 }, 4).is_err());
        let s = ScenarioParams::new(10, 5, ArrivalModel::Uniform, 4).unwrap();
        assert!(s.require_delta("test op").is_err());
    }

    #[test]
    fn policy_access_prob() {
        let fixed = BarringPolicy::fixed(0.3).unwrap();
        assert_eq!(fixed.access_prob(1000, 10), 0.3);
        assert!(BarringPolicy::fixed(0.0).is_err());
        assert!(BarringPolicy::fixed(1.5).is_err());

        let dynamic = BarringPolicy::DynamicOptimal;
        assert_eq!(dynamic.access_prob(0, 10), 1.0);
        assert_eq!(dynamic.access_prob(5, 10), 1.0);
        assert_eq!(dynamic.access_prob(100, 10), 0.1);
    }

    #[test]
    fn qos_validation() {
        assert!(QosRequirement::new(0, 100, 1e-2).is_ok());
        assert!(QosRequirement::new(0, 0, 1e-2).is_err());
        assert!(QosRequirement::new(0, 100, 0.0).is_err());
        assert!(QosRequirement::new(0, 100, 1.0).is_err());
    }

    #[test]
    fn split_boundary() {
        let split = SplitConfig::default();
        assert_eq!(split.factor(), 3.0);
        assert_eq!(split.boundary(10), 30);
        assert_eq!(SplitConfig::new(4.5).unwrap().boundary(10), 45);
        assert_eq!(SplitConfig::new(1.05).unwrap().boundary(10), 11);
        assert!(SplitConfig::new(1.0).is_err());
        assert!(SplitConfig::new(f64::INFINITY).is_err());
    }
}
