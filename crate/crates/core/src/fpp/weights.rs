use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{unit_ball_volume, GeoGraph};
use crate::sampling::{derive_stream, unit_uniform};

/// Law of the i.i.d. edge passage times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum WeightDistribution {
    Exponential { rate: f64 },
    /// `P(tau = 0) = p_zero`, `P(tau = 1) = 1 - p_zero`.
    BernoulliZeroOne { p_zero: f64 },
    Deterministic { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl WeightDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Self::BernoulliZeroOne { p_zero } => (0.0..=1.0).contains(&p_zero),
            Self::Deterministic { value } => value >= 0.0 && value.is_finite(),
            Self::Uniform { low, high } => low >= 0.0 && low < high && high.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid weight distribution {self:?}")))
        }
    }

    /// Inverse CDF at `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::BernoulliZeroOne { p_zero } => {
                if u < p_zero {
                    0.0
                } else {
                    1.0
                }
            }
            Self::Deterministic { value } => value,
            Self::Uniform { low, high } => low + (high - low) * u,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::BernoulliZeroOne { p_zero } => 1.0 - p_zero,
            Self::Deterministic { value } => value,
            Self::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    /// `P(tau = 0)`.
    pub fn prob_zero(&self) -> f64 {
        match *self {
            Self::Exponential { .. } | Self::Uniform { .. } => 0.0,
            Self::BernoulliZeroOne { p_zero } => p_zero,
            Self::Deterministic { value } => {
                if value == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Hypothesis flags for a graph in dimension `dim` with radius `radius`
    /// and point intensity `intensity`.
    pub fn conditions(&self, dim: usize, radius: f64, intensity: f64) -> ConditionFlags {
        let p0 = self.prob_zero();
        ConditionFlags {
            satisfies_a1: p0 < a1_threshold(dim, radius, intensity),
            satisfies_a1_prime: p0 == 0.0,
            // every supported law is bounded or exponential
            satisfies_a2_prime: true,
        }
    }
}

/// `1 / (v_d r^d lambda)`, the zero-weight threshold for the shape theorem.
pub fn a1_threshold(dim: usize, radius: f64, intensity: f64) -> f64 {
    1.0 / (unit_ball_volume(dim) * radius.powi(dim as i32) * intensity)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionFlags {
    /// `P(tau = 0) < 1 / (v_d r^d lambda)`.
    pub satisfies_a1: bool,
    /// `P(tau = 0) = 0`.
    pub satisfies_a1_prime: bool,
    /// Finite exponential moment.
    pub satisfies_a2_prime: bool,
}

impl ConditionFlags {
    pub fn require_a1(&self) -> Result<()> {
        if self.satisfies_a1 {
            Ok(())
        } else {
            Err(Error::ConditionViolated("P(tau = 0) is not below 1/(v_d r^d lambda)".into()))
        }
    }

    pub fn require_primed(&self) -> Result<()> {
        if !self.satisfies_a1_prime {
            return Err(Error::ConditionViolated("passage times have an atom at zero".into()));
        }
        if !self.satisfies_a2_prime {
            return Err(Error::ConditionViolated("passage times lack an exponential moment".into()));
        }
        Ok(())
    }
}

/// I.i.d. passage times on the edges of a graph.
#[derive(Clone, Debug)]
pub struct PassageField {
    graph: Arc<GeoGraph>,
    weights: Vec<f64>,
    pub distribution: WeightDistribution,
    pub seed: u64,
    pub flags: ConditionFlags,
}

/// Counter for edge `{u, v}` in the weight stream; independent of edge ordering.
#[inline]
pub fn edge_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (u64::from(a) << 32) | u64::from(b)
}

/// Draws one weight per edge by inverse CDF on the edge's own counter.
pub fn assign_weights(graph: Arc<GeoGraph>, distribution: WeightDistribution, seed: u64) -> Result<PassageField> {
    distribution.validate()?;
    let stream = derive_stream(seed, "weights", 0);
    let weights = graph
        .edges()
        .iter()
        .map(|&(u, v)| distribution.quantile(unit_uniform(stream, edge_key(u, v))))
        .collect();
    let flags = distribution.conditions(graph.dim(), graph.radius(), graph.points().intensity);
    Ok(PassageField { graph, weights, distribution, seed, flags })
}

impl PassageField {
    /// Wraps explicit weights (one per edge, in edge order).
    pub fn from_weights(graph: Arc<GeoGraph>, weights: Vec<f64>, distribution: WeightDistribution, seed: u64) -> Self {
        assert_eq!(weights.len(), graph.edge_count(), "one weight per edge");
        assert!(weights.iter().all(|w| *w >= 0.0), "weights must be nonnegative");
        let flags = distribution.conditions(graph.dim(), graph.radius(), graph.points().intensity);
        Self { graph, weights, distribution, seed, flags }
    }

    pub fn graph(&self) -> &GeoGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<GeoGraph> {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    /// Weight of the edge `{u, v}`, if present.
    pub fn weight_between(&self, u: usize, v: usize) -> Option<f64> {
        self.graph.incident(u).find(|&(w, _)| w as usize == v).map(|(_, e)| self.weights[e as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, SimConfig};

    fn graph(seed: u64, side: f64, intensity: f64) -> Arc<GeoGraph> {
        let cfg = SimConfig::new(2, intensity, 1.0, side, seed);
        Arc::new(GeoGraph::build(sample_ppp(&cfg).unwrap(), 1.0))
    }

    #[test]
    fn deterministic_weights() {
        let f = assign_weights(graph(1, 10.0, 2.0), WeightDistribution::Deterministic { value: 3.0 }, 5).unwrap();
        assert!(!f.weights().is_empty());
        assert!(f.weights().iter().all(|&w| w == 3.0));
    }

    #[test]
    fn bernoulli_zero_fraction() {
        // ~1.4e5 edges: lambda = 5, r = 1, side 60, mean degree 5 pi
        let g = graph(2, 60.0, 5.0);
        let f = assign_weights(g, WeightDistribution::BernoulliZeroOne { p_zero: 0.2 }, 9).unwrap();
        let n = f.weights().len() as f64;
        assert!(n > 1e5);
        let zeros = f.weights().iter().filter(|&&w| w == 0.0).count() as f64;
        let sd = (0.2 * 0.8 / n).sqrt();
        assert!((zeros / n - 0.2).abs() < 3.0 * sd);
    }

    #[test]
    fn a1_flag_uses_unit_ball_volume() {
        let d = WeightDistribution::BernoulliZeroOne { p_zero: 0.2 };
        let flags = d.conditions(2, 1.0, 1.0);
        assert!(flags.satisfies_a1);
        assert!(!flags.satisfies_a1_prime);
        assert!((a1_threshold(2, 1.0, 1.0) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(!WeightDistribution::BernoulliZeroOne { p_zero: 0.35 }.conditions(2, 1.0, 1.0).satisfies_a1);
        assert!(WeightDistribution::Exponential { rate: 1.0 }.conditions(2, 2.0, 1.0).satisfies_a1_prime);
        assert!(!WeightDistribution::Deterministic { value: 0.0 }.conditions(2, 1.0, 1.0).satisfies_a1);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let g = graph(3, 12.0, 2.0);
        let d = WeightDistribution::Exponential { rate: 1.5 };
        let a = assign_weights(g.clone(), d, 77).unwrap();
        let b = assign_weights(g, d, 77).unwrap();
        assert!(a.weights().iter().zip(b.weights()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn quantiles_are_nonnegative() {
        let laws = [
            WeightDistribution::Exponential { rate: 2.0 },
            WeightDistribution::BernoulliZeroOne { p_zero: 0.5 },
            WeightDistribution::Deterministic { value: 0.0 },
            WeightDistribution::Uniform { low: 0.0, high: 2.0 },
        ];
        for law in laws {
            for k in 0..100 {
                assert!(law.quantile(k as f64 / 100.0) >= 0.0);
            }
        }
        assert!(WeightDistribution::Uniform { low: 1.0, high: 1.0 }.validate().is_err());
        assert!(WeightDistribution::Exponential { rate: 0.0 }.validate().is_err());
    }
}
