//! Finite probability mass functions over non-negative integer support.

use crate::error::{Error, Result};

/// How far the mass sum may drift from 1 before a pmf stops counting as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Trailing masses below this are dropped when a pmf is constructed.
const TRIM_EPS: f64 = 1e-15;
/// Dropped tail mass below this is folded back in by renormalizing.
const RENORM_TOL: f64 = 1e-12;

/// A finite pmf: `masses[i]` is the probability of the value `offset + i`.
///
/// `partial` marks distributions that deliberately carry less than unit mass,
/// e.g. first-passage times truncated at a finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    offset: u64,
    masses: Vec<f64>,
    partial: bool,
}

impl Pmf {
    /// Point mass at `value`.
    pub fn point(value: u64) -> Self {
        Pmf {
            offset: value,
            masses: vec![1.0],
            partial: false,
        }
    }

    /// Builds a normalized pmf. Trailing masses below 1e-15 are dropped; the
    /// dropped total is renormalized away when it is below 1e-12, otherwise the
    /// result keeps a partial-mass flag. Fails if any mass is negative or the
    /// total is not 1 within 1e-9.
    pub fn from_masses(offset: u64, masses: Vec<f64>) -> Result<Self> {
        let mut pmf = Self::build(offset, masses)?;
        if pmf.partial {
            return Err(Error::invalid(format!(
                "pmf mass sums to {} (not 1 within {NORMALIZATION_TOL})",
                pmf.total_mass()
            )));
        }
        pmf.partial = false;
        Ok(pmf)
    }

    /// Builds a pmf that may carry less than unit mass (total > 1 is still an
    /// error beyond tolerance). The partial flag is set when the total differs
    /// from 1 by more than the normalization tolerance.
    pub fn from_truncated(offset: u64, masses: Vec<f64>) -> Result<Self> {
        Self::build(offset, masses)
    }

    fn build(offset: u64, masses: Vec<f64>) -> Result<Self> {
        if let Some(neg) = masses.iter().find(|&&m| !(m >= 0.0)) {
            return Err(Error::invalid(format!("pmf mass {neg} is not non-negative")));
        }
        let mut masses = masses;
        let mut offset = offset;

        // Canonical form: no leading or trailing exact zeros.
        while masses.last().is_some_and(|&m| m == 0.0) {
            masses.pop();
        }
        let lead = masses.iter().take_while(|&&m| m == 0.0).count();
        if lead > 0 {
            masses.drain(..lead);
            offset += lead as u64;
        }

        let mut dropped = 0.0;
        while masses.last().is_some_and(|&m| m < TRIM_EPS) {
            dropped += masses.pop().unwrap();
        }
        let mut total: f64 = masses.iter().sum();
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(Error::invalid(format!("pmf mass sums to {total} > 1")));
        }
        if dropped > 0.0 && dropped < RENORM_TOL && total > 0.0 {
            let scale = (total + dropped) / total;
            for m in &mut masses {
                *m *= scale;
            }
            total += dropped;
        }
        let partial = (total - 1.0).abs() > NORMALIZATION_TOL;
        Ok(Pmf {
            offset,
            masses,
            partial,
        })
    }

    /// First support point.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Largest support point (offset for an empty pmf).
    pub fn support_max(&self) -> u64 {
        self.offset + self.masses.len().saturating_sub(1) as u64
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    /// Mass at `value` (0 outside the stored support).
    pub fn mass(&self, value: u64) -> f64 {
        if value < self.offset {
            return 0.0;
        }
        self.masses
            .get((value - self.offset) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Sum of v * P[v]; for a partial pmf this is the unnormalized partial sum.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, m)| v as f64 * m).sum()
    }

    /// P[X > b] over the stored mass. Clamped to 1: a normalized pmf can
    /// carry rounding excess of a few ulps which must not leak into a
    /// probability.
    pub fn tail_above(&self, b: u64) -> f64 {
        self.iter()
            .filter(|&(v, _)| v > b)
            .map(|(_, m)| m)
            .sum::<f64>()
            .min(1.0)
    }

    /// (value, mass) pairs in increasing value order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, &m)| (self.offset + i as u64, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn point_mass() {
        let p = Pmf::point(7);
        assert_eq!(p.offset(), 7);
        assert_eq!(p.mass(7), 1.0);
        assert_eq!(p.mass(6), 0.0);
        assert_eq!(p.mass(8), 0.0);
        assert!(!p.is_partial());
        assert_eq!(p.mean(), 7.0);
    }

    #[test]
    fn rejects_negative_and_unnormalized() {
        assert!(Pmf::from_masses(0, vec![0.5, -0.1, 0.6]).is_err());
        assert!(Pmf::from_masses(0, vec![0.5, 0.4]).is_err());
        assert!(Pmf::from_masses(0, vec![0.7, 0.7]).is_err());
        assert!(Pmf::from_masses(0, vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn canonicalizes_leading_and_trailing_zeros() {
        let p = Pmf::from_masses(1, vec![0.0, 0.25, 0.75, 0.0]).unwrap();
        assert_eq!(p.offset(), 2);
        assert_eq!(p.masses(), &[0.25, 0.75]);
        assert_eq!(p.support_max(), 3);
    }

    #[test]
    fn renormalizes_tiny_dropped_tail() {
        let tiny = 1e-16;
        let p = Pmf::from_masses(0, vec![0.5, 0.5 - tiny, tiny]).unwrap();
        assert_eq!(p.masses().len(), 2);
        assert_relative_eq!(p.total_mass(), 1.0, epsilon = 1e-15);
        assert!(!p.is_partial());
    }

    #[test]
    fn truncated_keeps_partial_flag() {
        let p = Pmf::from_truncated(1, vec![0.3, 0.3]).unwrap();
        assert!(p.is_partial());
        assert_relative_eq!(p.total_mass(), 0.6);
        assert_relative_eq!(p.tail_above(1), 0.3);
    }

    #[test]
    fn tail_and_mean() {
        let p = Pmf::from_masses(0, vec![0.25, 0.5, 0.25]).unwrap();
        assert_relative_eq!(p.mean(), 1.0);
        assert_relative_eq!(p.tail_above(0), 0.75);
        assert_relative_eq!(p.tail_above(1), 0.25);
        assert_relative_eq!(p.tail_above(2), 0.0);
    }
}
