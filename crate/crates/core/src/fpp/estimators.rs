//! Replicated Monte Carlo estimators over independent realizations.
//!
//! Replica `k` draws its points from stream `("points", k)` and its weights
//! from `("weights", k)` of the master seed, so every replica can be
//! recomputed in isolation and results are folded in replica order.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fpp::geodesics::{geodesic_deviation, straightness_report};
use crate::fpp::passage::{dijkstra, extract_geodesic};
use crate::fpp::shape::{ShapeProbe, ShapeStats};
use crate::fpp::weights::{assign_weights, PassageField, WeightDistribution};
use crate::graph::{probe_directions, DisjointSets, GeoGraph};
use crate::sampling::{derive_stream, sample_ppp_replica, stream_rng, PointSet, SimConfig};
use crate::stats::{linear_fit, Summary, Z95};

/// Graph and passage times of replica `replica`.
pub fn realize(config: &SimConfig, dist: WeightDistribution, replica: u64) -> Result<PassageField> {
    let points = sample_ppp_replica(config, replica)?;
    realize_on(points, config, dist, replica)
}

/// Builds the graph on given points and draws replica `replica`'s weights.
pub fn realize_on(points: PointSet, config: &SimConfig, dist: WeightDistribution, replica: u64) -> Result<PassageField> {
    let graph = Arc::new(GeoGraph::build(points, config.radius));
    assign_weights(graph, dist, derive_stream(config.master_seed, "weights", replica))
}

fn scaled(u: &[f64], s: f64) -> Vec<f64> {
    u.iter().map(|c| c * s).collect()
}

fn unit(u: &[f64]) -> Vec<f64> {
    let n = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    u.iter().map(|c| c / n).collect()
}

/// Least-squares stretch factor from hop distances along the probe directions.
pub fn stretch_estimate(graph: &GeoGraph, max_scale: f64, scales: usize) -> Result<f64> {
    let d = graph.dim();
    let source = graph.nearest_vertex(&vec![0.0; d], true)?;
    let hops = graph.hop_distances(source);
    let mut samples = Vec::new();
    for u in probe_directions(d) {
        for j in 1..=scales {
            let s = max_scale * j as f64 / scales as f64;
            let v = graph.nearest_vertex(&scaled(&u, s), true)?;
            samples.push((s, hops[v] as f64));
        }
    }
    Ok(linear_fit(&samples).slope)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConstantParams {
    pub direction: Vec<f64>,
    /// Increasing distances `n_1 < ... < n_k` along `direction`.
    pub scales: Vec<f64>,
    pub replicas: usize,
    pub inner_window_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleRow {
    pub scale: f64,
    /// Mean of `T(o, n u) / n`.
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConstantReport {
    pub rows: Vec<ScaleRow>,
    /// `T(o, n u)` per replica and scale.
    pub samples: Vec<Vec<f64>>,
    /// Slope of `E T(o, n u)` between the smallest and largest scale.
    pub pooled: f64,
    pub pooled_se: f64,
    pub stretch_hat: f64,
    /// Largest `a` with `a n <= mean T(o, n u)` on every scale.
    pub lower_bracket: f64,
    /// `stretch_hat * E[tau]`.
    pub upper_bracket: f64,
    pub window_clipped: bool,
    pub satisfies_a1: bool,
}

impl TimeConstantReport {
    pub fn pooled_ci(&self) -> (f64, f64) {
        (self.pooled - Z95 * self.pooled_se, self.pooled + Z95 * self.pooled_se)
    }
}

/// Estimates the inverse time constant along one direction.
///
/// All scales are read from the same realizations, so consecutive means are
/// positively correlated and their differences are less noisy. The pooled
/// estimate removes the additive cost of reaching the graph at both ends by
/// differencing the largest and smallest scale.
pub fn estimate_time_constant(config: &SimConfig, dist: WeightDistribution, params: &TimeConstantParams) -> Result<TimeConstantReport> {
    if params.replicas < 2 || params.scales.len() < 2 {
        return Err(Error::InvalidConfig("need at least 2 replicas and 2 scales".into()));
    }
    if params.scales.windows(2).any(|w| w[0] >= w[1]) || params.scales[0] <= 0.0 {
        return Err(Error::InvalidConfig("scales must be positive and increasing".into()));
    }
    let u = unit(&params.direction);
    let half_window = params.inner_window_fraction * config.box_side / 2.0;
    let window_clipped = u.iter().any(|c| (c * params.scales[params.scales.len() - 1]).abs() > half_window);

    let per_replica: Vec<(Vec<f64>, f64)> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let field = realize(config, dist, rep)?;
            let g = field.graph();
            let source = g.nearest_vertex(&vec![0.0; g.dim()], true)?;
            let times = dijkstra(&field, source, None).time;
            let mut ts = Vec::with_capacity(params.scales.len());
            for &n in &params.scales {
                ts.push(times[g.nearest_vertex(&scaled(&u, n), true)?]);
            }
            let stretch = stretch_estimate(g, 0.9 * half_window, 8)?;
            Ok((ts, stretch))
        })
        .collect::<Result<_>>()?;

    let samples: Vec<Vec<f64>> = per_replica.iter().map(|(t, _)| t.clone()).collect();
    let stretch_hat = per_replica.iter().map(|(_, s)| s).sum::<f64>() / per_replica.len() as f64;
    let rows: Vec<ScaleRow> = params
        .scales
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let xs: Vec<f64> = samples.iter().map(|t| t[k] / n).collect();
            let s = Summary::of(&xs);
            ScaleRow { scale: n, mean: s.mean, std_error: s.std_error() }
        })
        .collect();
    let (n1, nk) = (params.scales[0], params.scales[params.scales.len() - 1]);
    let slopes: Vec<f64> = samples.iter().map(|t| (t[t.len() - 1] - t[0]) / (nk - n1)).collect();
    let pooled = Summary::of(&slopes);
    let lower_bracket = rows.iter().map(|r| r.mean).fold(f64::INFINITY, f64::min);
    let flags = dist.conditions(config.dimension, config.radius, config.intensity);
    Ok(TimeConstantReport {
        rows,
        samples,
        pooled: pooled.mean,
        pooled_se: pooled.std_error(),
        stretch_hat,
        lower_bracket,
        upper_bracket: stretch_hat * dist.mean(),
        window_clipped,
        satisfies_a1: flags.satisfies_a1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationParams {
    pub norms: Vec<f64>,
    pub direction: Vec<f64>,
    pub replicas: usize,
    /// Thresholds for `|T(x) - mean| / sqrt(|x|)`.
    pub ell_grid: Vec<f64>,
    /// First replica index; batches use disjoint replica ranges.
    pub first_replica: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationRow {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
    /// Empirical `P(|T(x) - mean| / sqrt(|x|) > ell)` for each `ell`.
    pub tail: Vec<f64>,
    pub samples: Vec<f64>,
}

impl DeviationRow {
    /// `Var T(x) / (|x| log |x|)`.
    pub fn variance_ratio(&self) -> f64 {
        self.variance / (self.norm * self.norm.ln())
    }
}

/// Mean, variance and centred tail frequencies of `T(x)` on a grid of `|x|`.
pub fn deviation_statistics(config: &SimConfig, dist: WeightDistribution, params: &DeviationParams) -> Result<Vec<DeviationRow>> {
    dist.conditions(config.dimension, config.radius, config.intensity).require_primed()?;
    if params.replicas < 100 {
        return Err(Error::InvalidConfig(format!("deviation statistics need >= 100 replicas, got {}", params.replicas)));
    }
    let u = unit(&params.direction);
    let per_replica: Vec<Vec<f64>> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let field = realize(config, dist, params.first_replica + k)?;
            let g = field.graph();
            let source = g.nearest_vertex(&vec![0.0; g.dim()], true)?;
            let times = dijkstra(&field, source, None).time;
            params.norms.iter().map(|&n| Ok(times[g.nearest_vertex(&scaled(&u, n), true)?])).collect()
        })
        .collect::<Result<_>>()?;
    Ok(params
        .norms
        .iter()
        .enumerate()
        .map(|(k, &norm)| {
            let xs: Vec<f64> = per_replica.iter().map(|r| r[k]).collect();
            let s = Summary::of(&xs);
            let tail = params
                .ell_grid
                .iter()
                .map(|&ell| xs.iter().filter(|&&x| (x - s.mean).abs() / norm.sqrt() > ell).count() as f64 / xs.len() as f64)
                .collect();
            DeviationRow { norm, mean: s.mean, variance: s.variance, tail, samples: xs }
        })
        .collect())
}

/// Slope of `log(tail frequency)` against `ell`, over the nonzero frequencies.
pub fn tail_slope(ell_grid: &[f64], tail: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ell_grid.iter().zip(tail).filter(|(_, &f)| f > 0.0).map(|(&l, &f)| (l, f.ln())).collect();
    (pts.len() >= 2).then(|| linear_fit(&pts).slope)
}

/// Shape statistics of replica `replica` at each time in `times`.
pub fn shape_series(config: &SimConfig, dist: WeightDistribution, times: &[f64], probe_spacing: f64, window_fraction: f64, replica: u64) -> Result<Vec<ShapeStats>> {
    let field = realize(config, dist, replica)?;
    let probe = ShapeProbe::new(&field, &vec![0.0; config.dimension], window_fraction * config.box_side, probe_spacing)?;
    Ok(times.iter().map(|&t| probe.stats(t)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationRow {
    pub scale: f64,
    pub pairs: usize,
    pub mean_deviation: f64,
    /// Fraction of pairs with deviation at least `scale^exponent`.
    pub exceed_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationParams {
    pub scales: Vec<f64>,
    pub sources: usize,
    pub targets_per_source: usize,
    pub exponent: f64,
    pub inner_window_fraction: f64,
}

/// Hausdorff deviation of geodesics from straight segments at several
/// separations, within one realization (one batch).
///
/// Sources are uniform in the inner window shrunk by the largest scale, and
/// targets sit at distance `s` in uniformly random directions.
pub fn geodesic_fluctuations(config: &SimConfig, dist: WeightDistribution, params: &FluctuationParams, replica: u64) -> Result<Vec<FluctuationRow>> {
    let field = realize(config, dist, replica)?;
    let g = field.graph();
    let d = g.dim();
    let mut rng = stream_rng(config.master_seed, "fluctuation-pairs", replica);
    let smax = params.scales.iter().copied().fold(0.0, f64::max);
    let half = (params.inner_window_fraction * config.box_side / 2.0 - smax).max(0.0);
    let resolution = config.radius / 8.0;
    let mut devs = vec![Vec::new(); params.scales.len()];
    for _ in 0..params.sources {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-half..=half)).collect();
        let qx = g.nearest_vertex(&x, true)?;
        let tree = dijkstra(&field, qx, None);
        for (k, &s) in params.scales.iter().enumerate() {
            for _ in 0..params.targets_per_source {
                let u = random_unit(&mut rng, d);
                let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + s * b).collect();
                let qy = g.nearest_vertex(&y, true)?;
                let path: Vec<Vec<f64>> = extract_geodesic(&tree, qy)?.iter().map(|&v| g.points().point(v).to_vec()).collect();
                devs[k].push(geodesic_deviation(&path, &x, &y, resolution));
            }
        }
    }
    Ok(params
        .scales
        .iter()
        .zip(devs)
        .map(|(&s, ds)| {
            let threshold = s.powf(params.exponent);
            FluctuationRow {
                scale: s,
                pairs: ds.len(),
                mean_deviation: ds.iter().sum::<f64>() / ds.len() as f64,
                exceed_fraction: ds.iter().filter(|&&v| v >= threshold).count() as f64 / ds.len() as f64,
            }
        })
        .collect())
}

pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|c| c * c).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Straightness violations of the geodesic tree rooted at `q(o)`, computed
/// on the giant component of the induced subgraph in each centred window.
/// Weights are shared across windows (they are keyed by the parent graph's edges).
pub fn straightness_counts(config: &SimConfig, dist: WeightDistribution, eps: f64, windows: &[f64], replica: u64) -> Result<Vec<usize>> {
    let field = realize(config, dist, replica)?;
    let g = field.graph();
    let d = g.dim();
    windows
        .iter()
        .map(|&w| {
            let (sub, keep) = g.restrict_to_box(w);
            let weights: Vec<f64> = sub
                .edges()
                .iter()
                .map(|&(a, b)| field.weight_between(keep[a as usize] as usize, keep[b as usize] as usize).expect("induced edge"))
                .collect();
            let sub = Arc::new(sub);
            let sub_field = PassageField::from_weights(sub.clone(), weights, dist, field.seed);
            let origin = vec![0.0; d];
            let root = sub.nearest_vertex(&origin, true)?;
            let tree = dijkstra(&sub_field, root, None);
            Ok(straightness_report(&tree, sub.points(), &origin, eps).violation_count())
        })
        .collect()
}

/// Fraction of vertices in the largest cluster joined by zero-weight edges.
pub fn largest_zero_cluster_fraction(field: &PassageField) -> f64 {
    let g = field.graph();
    let n = g.vertex_count();
    if n == 0 {
        return 0.0;
    }
    let mut dsu = DisjointSets::new(n);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if field.weight(e) == 0.0 {
            dsu.union(u, v);
        }
    }
    let mut sizes = vec![0usize; n];
    for v in 0..n as u32 {
        sizes[dsu.find(v) as usize] += 1;
    }
    *sizes.iter().max().unwrap() as f64 / n as f64
}
