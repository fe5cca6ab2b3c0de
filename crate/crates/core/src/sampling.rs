//! Seeded Poisson point process sampling and random-stream derivation.
//!
//! Every random quantity in the crate is drawn from a stream identified by
//! `(master_seed, label, replica)`. Streams are derived by integer mixing
//! only, so a fixed configuration reproduces the same draws on every
//! platform. The Poisson count itself goes through `rand_distr`, whose
//! large-mean sampler uses `ln`/`exp`; that is the one transcendental in
//! the sampling path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one random geometric graph experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dimension: usize,
    /// Expected number of points per unit volume.
    pub intensity: f64,
    /// Connection radius.
    pub radius: f64,
    /// Side of the sampling box `[-L/2, L/2]^d`.
    pub box_side: f64,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn new(dimension: usize, intensity: f64, radius: f64, box_side: f64, master_seed: u64) -> Self {
        Self { dimension, intensity, radius, box_side, master_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidConfig(format!("dimension must be >= 2, got {}", self.dimension)));
        }
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(Error::InvalidConfig(format!("intensity must be > 0, got {}", self.intensity)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("radius must be > 0, got {}", self.radius)));
        }
        if !(self.box_side >= 0.0 && self.box_side.is_finite()) {
            return Err(Error::InvalidConfig(format!("box side must be >= 0, got {}", self.box_side)));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.box_side.powi(self.dimension as i32)
    }

    pub fn with_box_side(&self, box_side: f64) -> Self {
        Self { box_side, ..self.clone() }
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        Self { master_seed, ..self.clone() }
    }
}

/// A realization of a homogeneous Poisson point process in a box.
///
/// Coordinates are stored row-major: point `i` occupies
/// `coords[i * dim .. (i + 1) * dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    pub box_side: f64,
    pub intensity: f64,
    pub seed: u64,
}

impl PointSet {
    /// Builds a point set from explicit coordinates.
    ///
    /// Panics if `coords.len()` is not a multiple of `dim`.
    pub fn from_coords(dim: usize, coords: Vec<f64>, box_side: f64, intensity: f64, seed: u64) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0, "coordinate buffer does not match dimension");
        Self { dim, coords, box_side, intensity, seed }
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>], box_side: f64, intensity: f64) -> Self {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            assert_eq!(p.len(), dim, "point of wrong dimension");
            coords.extend_from_slice(p);
        }
        Self::from_coords(dim, coords, box_side, intensity, 0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Restriction to the centered sub-box of side `side`, preserving order.
    pub fn restrict_to_box(&self, side: f64) -> PointSet {
        let half = side / 2.0;
        let coords = self
            .iter()
            .filter(|p| p.iter().all(|c| c.abs() <= half))
            .flatten()
            .copied()
            .collect();
        PointSet { dim: self.dim, coords, box_side: side, intensity: self.intensity, seed: self.seed }
    }

    /// Appends a point; used for planting configurations in tests and experiments.
    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }
}

/// Samples a Poisson point process on `[-L/2, L/2]^d` using the `"points"`
/// stream of replica 0.
pub fn sample_ppp(config: &SimConfig) -> Result<PointSet> {
    sample_ppp_replica(config, 0)
}

/// Samples the point process for a given replica index.
///
/// The count is drawn first, then the points are placed independently and
/// uniformly in the box.
pub fn sample_ppp_replica(config: &SimConfig, replica: u64) -> Result<PointSet> {
    config.validate()?;
    let seed = derive_stream(config.master_seed, "points", replica);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = config.intensity * config.volume();
    let count = poisson_count(&mut rng, mean);
    let half = config.box_side / 2.0;
    let d = config.dimension;
    let mut coords = Vec::with_capacity(count * d);
    for _ in 0..count * d {
        let u: f64 = rng.random();
        // u in [0, 1) maps into [-L/2, L/2)
        coords.push(-half + config.box_side * u);
    }
    Ok(PointSet { dim: d, coords, box_side: config.box_side, intensity: config.intensity, seed })
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}

/// Rescales a point set to unit intensity (`x -> lambda^{1/d} x`).
pub fn rescale_intensity(points: &PointSet) -> PointSet {
    let factor = points.intensity.powf(1.0 / points.dim as f64);
    if factor == 1.0 {
        return points.clone();
    }
    PointSet {
        dim: points.dim,
        coords: points.coords.iter().map(|c| c * factor).collect(),
        box_side: points.box_side * factor,
        intensity: 1.0,
        seed: points.seed,
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the seed of the stream `(master_seed, label, replica)`.
///
/// For fixed `(label, replica)` the map `master_seed -> seed` is a
/// bijection, so two streams with different labels or replicas collide only
/// when two independent-looking 64-bit values happen to agree.
pub fn derive_stream(master_seed: u64, label: &str, replica: u64) -> u64 {
    let tag = mix64(fnv1a64(label.as_bytes()) ^ mix64(replica.wrapping_add(GOLDEN_GAMMA)));
    mix64(mix64(master_seed ^ tag).wrapping_add(tag.rotate_left(17)))
}

/// Counter-based uniform draw in `[0, 1)` for position `counter` of stream `seed`.
#[inline]
pub fn unit_uniform(seed: u64, counter: u64) -> f64 {
    let bits = mix64(seed ^ mix64(counter.wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x6A09_E667_F3BC_C909)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seeded generator for a derived stream.
pub fn stream_rng(master_seed: u64, label: &str, replica: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_stream(master_seed, label, replica))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn zero_box_is_empty() {
        let cfg = SimConfig::new(2, 1.0, 1.0, 0.0, 7);
        assert!(sample_ppp(&cfg).unwrap().is_empty());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = SimConfig::new(3, 2.0, 1.0, 6.0, 42);
        let a = sample_ppp(&cfg).unwrap();
        let b = sample_ppp(&cfg).unwrap();
        assert_eq!(a.coords().len(), b.coords().len());
        assert!(a.coords().iter().zip(b.coords()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn coordinates_stay_in_box() {
        let cfg = SimConfig::new(2, 1.0, 1.0, 10.0, 3);
        let pts = sample_ppp(&cfg).unwrap();
        assert!(pts.coords().iter().all(|c| (-5.0..=5.0).contains(c)));
    }

    #[test]
    fn mean_count_matches_intensity() {
        let cfg = SimConfig::new(2, 1.0, 1.0, 10.0, 11);
        let n = 1000;
        let total: usize = (0..n).map(|r| sample_ppp_replica(&cfg, r).unwrap().len()).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 100.0).abs() < 3.0 * 10.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(SimConfig::new(1, 1.0, 1.0, 1.0, 0).validate().is_err());
        assert!(SimConfig::new(2, 0.0, 1.0, 1.0, 0).validate().is_err());
        assert!(SimConfig::new(2, 1.0, -1.0, 1.0, 0).validate().is_err());
        assert!(SimConfig::new(2, 1.0, 1.0, -1.0, 0).validate().is_err());
    }

    #[test]
    fn rescale_identity_and_doubling() {
        let pts = PointSet::from_points(2, &[vec![1.0, 1.0]], 3.0, 1.0);
        assert_eq!(rescale_intensity(&pts), pts);
        let pts = PointSet::from_points(2, &[vec![1.0, 1.0]], 3.0, 4.0);
        let s = rescale_intensity(&pts);
        assert_eq!(s.point(0), &[2.0, 2.0]);
        assert_eq!(s.box_side, 6.0);
        assert_eq!(s.intensity, 1.0);
    }

    #[test]
    fn rescaled_density_is_unit() {
        // density over 200 replicas; sd of the pooled estimate is sqrt(1 / (200 * V))
        let cfg = SimConfig::new(2, 4.0, 1.0, 5.0, 19);
        let reps = 200;
        let mut count = 0usize;
        let mut volume = 0.0;
        for r in 0..reps {
            let s = rescale_intensity(&sample_ppp_replica(&cfg, r).unwrap());
            count += s.len();
            volume += s.box_side.powi(2);
        }
        let density = count as f64 / volume;
        let sd = (1.0 / volume).sqrt();
        assert!((density - 1.0).abs() < 3.0 * sd, "density {density}, sd {sd}");
    }

    #[test]
    fn derive_stream_is_deterministic() {
        assert_eq!(derive_stream(5, "weights", 3), derive_stream(5, "weights", 3));
    }

    #[test]
    fn derive_stream_collision_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1_000_000 {
            let s: u64 = rng.random();
            let w0 = derive_stream(s, "weights", 0);
            assert_ne!(w0, derive_stream(s, "points", 0));
            assert_ne!(w0, derive_stream(s, "weights", 1));
        }
    }

    #[test]
    fn derived_streams_distinct_across_labels() {
        let labels = ["points", "weights", "colors", "competition", "walks"];
        let mut seen = HashSet::new();
        for l in labels {
            for r in 0..1000 {
                assert!(seen.insert(derive_stream(99, l, r)));
            }
        }
    }

    #[test]
    fn unit_uniform_in_range() {
        for c in 0..10_000 {
            let u = unit_uniform(17, c);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
