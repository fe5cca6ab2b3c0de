//! The augmented graph `G^t`: the geometric graph plus the lattice `tZ^d`,
//! with heavy deterministic edges of weight `K t` joining each lattice vertex
//! to its axis neighbours and to the points of its half-open cell.
//!
//! Vertices `0..n` are the base points; lattice vertices follow. The lattice
//! covers every cell that meets the box, so it can extend one layer past
//! `tZ^d ∩ box` when `L / (2t)` is not aligned.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpp::estimators::realize;
use crate::fpp::passage::{dijkstra, FirstPassageResult, WeightedGraph};
use crate::fpp::weights::{PassageField, WeightDistribution};
use crate::grid::{dist2, lex_cmp};
use crate::sampling::SimConfig;
use crate::stats::{wilson_interval, Z95};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Lattice pitch.
    pub t: f64,
    /// Extra-edge weight multiplier.
    pub k: f64,
    pub delta: f64,
}

impl AugmentConfig {
    pub fn new(t: f64, k: f64, delta: f64) -> Self {
        Self { t, k, delta }
    }

    /// `K = 100 d`, `delta = 0.05`.
    pub fn with_defaults(dim: usize, t: f64) -> Self {
        Self { t, k: 100.0 * dim as f64, delta: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 1.0 && self.t.is_finite()) {
            return Err(Error::InvalidConfig(format!("lattice pitch t = {} must be >= 1", self.t)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) || !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("K and delta must be positive".into()));
        }
        Ok(())
    }

    /// `K' = 3 d K / delta`.
    pub fn k_prime(&self, dim: usize) -> f64 {
        3.0 * dim as f64 * self.k / self.delta
    }

    pub fn extra_weight(&self) -> f64 {
        self.k * self.t
    }

    /// `floor(K' |x|)`.
    pub fn hop_budget(&self, dim: usize, norm: f64) -> u64 {
        (self.k_prime(dim) * norm).floor() as u64
    }
}

#[derive(Clone, Debug)]
pub struct AugmentedGraph {
    field: PassageField,
    pub config: AugmentConfig,
    base: usize,
    lo: Vec<i64>,
    counts: Vec<usize>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

/// Lattice index along one axis of the half-open cell containing `c`.
fn cell_coordinate(c: f64, t: f64) -> i64 {
    (c / t + 0.5).floor() as i64
}

/// Builds `G^t` over a weighted geometric graph.
pub fn build_augmented(field: &PassageField, config: AugmentConfig) -> Result<AugmentedGraph> {
    config.validate()?;
    let g = field.graph();
    let d = g.dim();
    let t = config.t;
    let half = g.points().box_side / 2.0;
    let lo: Vec<i64> = vec![cell_coordinate(-half, t); d];
    let hi = cell_coordinate(half, t);
    let counts: Vec<usize> = vec![(hi - lo[0] + 1) as usize; d];
    let lattice: usize = counts.iter().product();
    let base = g.vertex_count();
    let total = base + lattice;
    let kt = config.extra_weight();

    let flat = |j: &[i64]| -> usize {
        let mut idx = 0;
        for a in (0..d).rev() {
            idx = idx * counts[a] + (j[a] - lo[a]) as usize;
        }
        idx
    };

    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); total];
    for (v, p) in g.points().iter().enumerate() {
        let j: Vec<i64> = p.iter().map(|&c| cell_coordinate(c, t)).collect();
        if p.iter().zip(&j).all(|(&c, &k)| c == k as f64 * t) {
            return Err(Error::LatticeCollision(v));
        }
        let u = base + flat(&j);
        adj[v].push((u as u32, kt));
        adj[u].push((v as u32, kt));
        for (w, e) in g.incident(v) {
            adj[v].push((w, field.weight(e as usize)));
        }
    }
    let mut j = lo.clone();
    for idx in 0..lattice {
        for a in 0..d {
            if j[a] + 1 < lo[a] + counts[a] as i64 {
                let mut k = j.clone();
                k[a] += 1;
                let w = base + flat(&k);
                adj[base + idx].push((w as u32, kt));
                adj[w].push(((base + idx) as u32, kt));
            }
        }
        for a in 0..d {
            j[a] += 1;
            if j[a] < lo[a] + counts[a] as i64 {
                break;
            }
            j[a] = lo[a];
        }
    }
    let mut offsets = Vec::with_capacity(total + 1);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    offsets.push(0);
    for list in &mut adj {
        list.sort_by_key(|&(w, _)| w);
        for &(w, x) in list.iter() {
            targets.push(w);
            weights.push(x);
        }
        offsets.push(targets.len());
    }
    Ok(AugmentedGraph { field: field.clone(), config, base, lo, counts, offsets, targets, weights })
}

impl AugmentedGraph {
    pub fn field(&self) -> &PassageField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn base_count(&self) -> usize {
        self.base
    }

    pub fn lattice_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn total_count(&self) -> usize {
        self.base + self.lattice_count()
    }

    pub fn is_lattice(&self, v: usize) -> bool {
        v >= self.base
    }

    fn lattice_coords(&self, v: usize) -> Vec<i64> {
        let mut rem = v - self.base;
        self.counts
            .iter()
            .zip(&self.lo)
            .map(|(&n, &l)| {
                let k = (rem % n) as i64 + l;
                rem /= n;
                k
            })
            .collect()
    }

    fn lattice_vertex(&self, j: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for a in (0..j.len()).rev() {
            let k = j[a] - self.lo[a];
            if k < 0 || k >= self.counts[a] as i64 {
                return None;
            }
            idx = idx * self.counts[a] + k as usize;
        }
        Some(self.base + idx)
    }

    pub fn position(&self, v: usize) -> Vec<f64> {
        if self.is_lattice(v) {
            self.lattice_coords(v).iter().map(|&k| k as f64 * self.config.t).collect()
        } else {
            self.field.graph().points().point(v).to_vec()
        }
    }

    /// The lattice vertex at the origin.
    pub fn origin(&self) -> usize {
        self.lattice_vertex(&vec![0; self.dim()]).expect("origin lies in the lattice")
    }

    /// Lattice vertex whose half-open cell contains `p`.
    pub fn cell_of(&self, p: &[f64]) -> Option<usize> {
        let j: Vec<i64> = p.iter().map(|&c| cell_coordinate(c, self.config.t)).collect();
        self.lattice_vertex(&j)
    }

    /// Number of lattice vertices with every coordinate in the box.
    pub fn lattice_in_box(&self) -> usize {
        let half = self.field.graph().points().box_side / 2.0;
        (self.base..self.total_count()).filter(|&v| self.position(v).iter().all(|c| c.abs() <= half)).count()
    }

    pub fn arcs(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().zip(&self.weights[r]).map(|(&w, &x)| (w as usize, x))
    }

    /// Extra edges `{u, v}` with `u < v`.
    pub fn extra_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.total_count()).flat_map(move |u| {
            self.arcs(u).filter(move |&(v, _)| u < v && (self.is_lattice(u) || self.is_lattice(v))).map(move |(v, x)| (u, v, x))
        })
    }

    /// `q^t(x)`: nearest vertex of `V ∪ tZ^d`, ties to the lexicographically
    /// smallest position, then the smallest index.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        let t = self.config.t;
        // nearest lattice point; ties round down, which is lexicographically smaller
        let j: Vec<i64> = x.iter().map(|&c| (c / t - 0.5).ceil() as i64).collect();
        let lattice = self.lattice_vertex(&j);
        let g = self.field.graph();
        let base = if g.vertex_count() > 0 { Some(g.nearest_vertex(x, false)?) } else { None };
        match (base, lattice) {
            (None, None) => Err(Error::EmptyTargetSet),
            (Some(b), None) => Ok(b),
            (None, Some(l)) => Ok(l),
            (Some(b), Some(l)) => {
                let (pb, pl) = (self.position(b), self.position(l));
                let (db, dl) = (dist2(&pb, x), dist2(&pl, x));
                Ok(match db.total_cmp(&dl).then_with(|| lex_cmp(&pb, &pl)) {
                    std::cmp::Ordering::Greater => l,
                    _ => b,
                })
            }
        }
    }

    /// Upper bound on `T^t(u, v)` from the all-extra-edge route: `K sqrt(d) |u - v| + K t d`,
    /// plus one connector edge `K t` for each endpoint that is a base vertex.
    pub fn detour_bound(&self, u: usize, v: usize) -> f64 {
        let d = self.dim() as f64;
        let (k, t) = (self.config.k, self.config.t);
        let gap = dist2(&self.position(u), &self.position(v)).sqrt();
        let connectors = [u, v].iter().filter(|&&w| !self.is_lattice(w)).count() as f64;
        k * d.sqrt() * gap + k * t * d + connectors * k * t
    }

    pub fn passage_from(&self, source: usize) -> FirstPassageResult {
        dijkstra(self, source, None)
    }
}

impl WeightedGraph for AugmentedGraph {
    fn vertex_count(&self) -> usize {
        self.total_count()
    }

    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for (w, x) in self.arcs(v) {
            f(w, x);
        }
    }
}

/// `T^t(x, y)` between `q^t(x)` and `q^t(y)`.
pub fn augmented_passage(aug: &AugmentedGraph, x: &[f64], y: &[f64]) -> Result<f64> {
    let (a, b) = (aug.nearest(x)?, aug.nearest(y)?);
    if a == b {
        return Ok(0.0);
    }
    Ok(dijkstra(aug, a, Some(b)).time[b])
}

/// Minimum cost from `source` to `target` over paths of at most `budget` edges.
///
/// Layer `h` holds the best cost with at most `h` edges; only vertices that
/// improved in layer `h` can improve a neighbour in layer `h + 1`, and the
/// layers stop early at the unconstrained fixpoint. Memory is two cost
/// vectors over the vertex set.
pub fn hop_limited_passage<G: WeightedGraph + ?Sized>(graph: &G, source: usize, target: usize, budget: u64) -> f64 {
    let n = graph.vertex_count();
    let mut cur = vec![f64::INFINITY; n];
    cur[source] = 0.0;
    let mut changed = vec![source];
    let mut mark = vec![false; n];
    let mut h = 0;
    while h < budget && !changed.is_empty() {
        let mut next = cur.clone();
        let mut improved = Vec::new();
        for &u in &changed {
            let base = cur[u];
            graph.for_each_arc(u, &mut |w, x| {
                let c = base + x;
                if c < next[w] {
                    next[w] = c;
                    if !mark[w] {
                        mark[w] = true;
                        improved.push(w);
                    }
                }
            });
        }
        for &w in &improved {
            mark[w] = false;
        }
        improved.sort_unstable();
        cur = next;
        changed = improved;
        h += 1;
    }
    cur[target]
}

/// `Y_{t,x}`: cost from the lattice origin to `q^t(x)` over paths with at most
/// `floor(K' |x|)` edges.
pub fn truncated_passage(aug: &AugmentedGraph, x: &[f64]) -> Result<f64> {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm < 1.0 || aug.config.t > norm {
        return Err(Error::InvalidConfig(format!("need |x| >= 1 and t <= |x|, got |x| = {norm}, t = {}", aug.config.t)));
    }
    let budget = aug.config.hop_budget(aug.dim(), norm);
    if budget < 1 {
        return Err(Error::BudgetTooSmall(budget));
    }
    Ok(hop_limited_passage(aug, aug.origin(), aug.nearest(x)?, budget))
}

/// Average edge cost of `walks` random self-avoiding walks with `steps` edges,
/// each grown by uniform choice among unvisited neighbours and restarted when stuck.
pub fn self_avoiding_walk_costs<R: Rng>(aug: &AugmentedGraph, steps: usize, walks: usize, rng: &mut R) -> Vec<f64> {
    let n = aug.total_count();
    let mut out = Vec::with_capacity(walks);
    let mut visited = vec![false; n];
    let mut path = Vec::with_capacity(steps + 1);
    while out.len() < walks {
        for &v in &path {
            visited[v] = false;
        }
        path.clear();
        let mut v = rng.random_range(0..n);
        visited[v] = true;
        path.push(v);
        let mut cost = 0.0;
        let mut options = Vec::new();
        while path.len() <= steps {
            options.clear();
            options.extend(aug.arcs(v).filter(|&(w, _)| !visited[w]));
            if options.is_empty() {
                break;
            }
            let (w, x) = options[rng.random_range(0..options.len())];
            cost += x;
            visited[w] = true;
            path.push(w);
            v = w;
        }
        if path.len() == steps + 1 {
            out.push(cost / steps as f64);
        }
    }
    for &v in &path {
        visited[v] = false;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingParams {
    pub x: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub k: f64,
    pub delta: f64,
    pub first_replica: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingRow {
    pub t: f64,
    pub replicas: usize,
    pub y_neq_tt: usize,
    pub tt_neq_t: usize,
    pub freq_y_neq_tt: f64,
    pub freq_tt_neq_t: f64,
    /// Wilson interval of `freq_tt_neq_t`.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Wilson interval of `freq_y_neq_tt`.
    pub y_ci_low: f64,
    pub y_ci_high: f64,
}

/// Strict difference beyond a relative tolerance of `1e-9`.
pub fn differs(a: f64, b: f64) -> bool {
    if a == b {
        return false;
    }
    (a - b).abs() > 1e-9 * a.abs().max(b.abs())
}

/// Per-replica outcome at one `t`: `(Y != T^t(o, q^t(x)), T^t(q(o), q(x)) != T(x))`.
pub fn coupling_outcome(field: &PassageField, x: &[f64], config: AugmentConfig) -> Result<(bool, bool)> {
    let g = field.graph();
    let d = g.dim();
    let qo = g.nearest_vertex(&vec![0.0; d], true)?;
    let qx = g.nearest_vertex(x, true)?;
    let t_plain = dijkstra(field, qo, Some(qx)).time[qx];
    let aug = build_augmented(field, config)?;
    let from_origin = aug.passage_from(aug.origin());
    let tt_origin = from_origin.time[aug.nearest(x)?];
    let y = truncated_passage(&aug, x)?;
    let tt_q = dijkstra(&aug, qo, Some(qx)).time[qx];
    Ok((differs(y, tt_origin), differs(tt_q, t_plain)))
}

/// Empirical `P(Y != T^t)` and `P(T^t != T)` on a grid of lattice pitches.
pub fn coupling_frequencies(config: &SimConfig, dist: WeightDistribution, params: &CouplingParams) -> Result<Vec<CouplingRow>> {
    dist.conditions(config.dimension, config.radius, config.intensity).require_primed()?;
    if params.replicas < 200 {
        return Err(Error::InvalidConfig(format!("coupling frequencies need >= 200 replicas, got {}", params.replicas)));
    }
    for &t in &params.t_grid {
        AugmentConfig::new(t, params.k, params.delta).validate()?;
    }
    let outcomes: Vec<Vec<(bool, bool)>> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let field = realize(config, dist, params.first_replica + k)?;
            params.t_grid.iter().map(|&t| coupling_outcome(&field, &params.x, AugmentConfig::new(t, params.k, params.delta))).collect()
        })
        .collect::<Result<_>>()?;
    let r = params.replicas;
    Ok(params
        .t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let y = outcomes.iter().filter(|o| o[i].0).count();
            let m = outcomes.iter().filter(|o| o[i].1).count();
            let (ci_low, ci_high) = wilson_interval(m, r, Z95);
            let (y_ci_low, y_ci_high) = wilson_interval(y, r, Z95);
            CouplingRow {
                t,
                replicas: r,
                y_neq_tt: y,
                tt_neq_t: m,
                freq_y_neq_tt: y as f64 / r as f64,
                freq_tt_neq_t: m as f64 / r as f64,
                ci_low,
                ci_high,
                y_ci_low,
                y_ci_high,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpp::weights::assign_weights;
    use crate::graph::GeoGraph;
    use crate::sampling::{sample_ppp, stream_rng, PointSet};
    use std::sync::Arc;

    fn field(side: f64, seed: u64) -> PassageField {
        let cfg = SimConfig::new(2, 1.0, 2.0, side, seed);
        let g = Arc::new(GeoGraph::build(sample_ppp(&cfg).unwrap(), 2.0));
        assign_weights(g, WeightDistribution::Exponential { rate: 1.0 }, seed).unwrap()
    }

    #[test]
    fn lattice_count_matches_enumeration() {
        for (side, t) in [(20.0, 2.0), (20.0, 3.0), (15.0, 1.5), (10.0, 4.0)] {
            let aug = build_augmented(&field(side, 1), AugmentConfig::with_defaults(2, t)).unwrap();
            let mut per_axis = 0;
            let mut j = -1000i64;
            while j <= 1000 {
                if (j as f64 * t).abs() <= side / 2.0 {
                    per_axis += 1;
                }
                j += 1;
            }
            assert_eq!(aug.lattice_in_box(), per_axis * per_axis);
            assert!(aug.lattice_count() >= aug.lattice_in_box());
        }
    }

    #[test]
    fn every_base_vertex_has_one_connector_of_weight_kt() {
        let f = field(20.0, 2);
        let cfg = AugmentConfig::with_defaults(2, 2.5);
        let aug = build_augmented(&f, cfg).unwrap();
        let mut per_base = vec![0usize; aug.base_count()];
        for (u, v, w) in aug.extra_edges() {
            assert_eq!(w, cfg.k * cfg.t);
            if !aug.is_lattice(u) {
                per_base[u] += 1;
                assert_eq!(aug.cell_of(&aug.position(u)), Some(v));
            } else if aug.is_lattice(v) {
                let gap = dist2(&aug.position(u), &aug.position(v)).sqrt();
                assert!((gap - cfg.t).abs() < 1e-12);
            }
        }
        assert!(per_base.iter().all(|&c| c == 1));
    }

    #[test]
    fn half_open_cells() {
        let f = field(20.0, 3);
        let aug = build_augmented(&f, AugmentConfig::with_defaults(2, 2.0)).unwrap();
        let o = aug.origin();
        assert_eq!(aug.cell_of(&[-1.0, -1.0]), Some(o));
        assert_eq!(aug.cell_of(&[0.999, 0.999]), Some(o));
        assert_ne!(aug.cell_of(&[1.0, 0.0]), Some(o));
    }

    #[test]
    fn lattice_neighbour_with_no_points() {
        let pts = PointSet::from_points(2, &[vec![7.3, 7.1]], 20.0, 1.0);
        let g = Arc::new(GeoGraph::build(pts, 1.0));
        let f = PassageField::from_weights(g, vec![], WeightDistribution::Exponential { rate: 1.0 }, 0);
        let cfg = AugmentConfig::new(2.0, 3.0, 0.05);
        let aug = build_augmented(&f, cfg).unwrap();
        assert_eq!(augmented_passage(&aug, &[0.0, 0.0], &[2.0, 0.0]).unwrap(), 6.0);
    }

    #[test]
    fn collision_detected() {
        let pts = PointSet::from_points(2, &[vec![2.0, 4.0], vec![2.5, 4.0]], 20.0, 1.0);
        let g = Arc::new(GeoGraph::build(pts, 1.0));
        let f = PassageField::from_weights(g, vec![1.0], WeightDistribution::Deterministic { value: 1.0 }, 0);
        assert!(matches!(build_augmented(&f, AugmentConfig::new(2.0, 1.0, 0.05)), Err(Error::LatticeCollision(0))));
    }

    #[test]
    fn detour_bound_on_random_pairs() {
        let f = field(30.0, 4);
        let aug = build_augmented(&f, AugmentConfig::new(2.0, 0.3, 0.05)).unwrap();
        let mut rng = stream_rng(4, "pairs", 0);
        let n = aug.total_count();
        for _ in 0..50 {
            let u = rng.random_range(0..n);
            let times = aug.passage_from(u);
            for _ in 0..20 {
                let v = rng.random_range(0..n);
                assert!(times.time[v] <= aug.detour_bound(u, v) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn huge_k_matches_base_passage() {
        // dense pair of lattice-free points; q and q^t coincide
        let pts = PointSet::from_points(2, &[vec![0.3, 0.2], vec![1.2, 0.3], vec![2.1, 0.2], vec![1.3, 1.1]], 6.0, 1.0);
        let g = Arc::new(GeoGraph::build(pts, 1.0));
        let w = vec![0.7; g.edge_count()];
        let f = PassageField::from_weights(g, w, WeightDistribution::Deterministic { value: 0.7 }, 0);
        let aug = build_augmented(&f, AugmentConfig::new(5.0, 1e6, 0.05)).unwrap();
        let (x, y) = ([0.35, 0.2], [2.05, 0.2]);
        assert_eq!(aug.nearest(&x).unwrap(), 0);
        assert_eq!(aug.nearest(&y).unwrap(), 2);
        let base = crate::fpp::passage::passage_time_between(&f, &x, &y).unwrap();
        assert_eq!(augmented_passage(&aug, &x, &y).unwrap(), base);
    }

    #[test]
    fn truncated_passage_bounds_and_budget() {
        let f = field(40.0, 5);
        let x = [12.0, 5.0];
        let norm: f64 = 13.0;
        for t in [1.0, 2.0, 5.0] {
            let cfg = AugmentConfig::new(t, 0.2, 0.05);
            let aug = build_augmented(&f, cfg).unwrap();
            let qx = aug.nearest(&x).unwrap();
            let tt = aug.passage_from(aug.origin()).time[qx];
            let y = truncated_passage(&aug, &x).unwrap();
            assert!(y >= tt);
            assert!(y <= 3.0 * 2.0 * cfg.k * norm);
            // full budget reproduces the unconstrained value exactly
            assert_eq!(hop_limited_passage(&aug, aug.origin(), qx, u64::MAX), tt);
            let mut prev = f64::INFINITY;
            for b in [1, 2, 4, 8, 16, 32, 64, 128, 100_000] {
                let yb = hop_limited_passage(&aug, aug.origin(), qx, b);
                assert!(yb <= prev);
                prev = yb;
            }
        }
        let aug = build_augmented(&f, AugmentConfig::new(1.0, 1e-4, 1.0)).unwrap();
        assert!(matches!(truncated_passage(&aug, &[1.0, 0.0]), Err(Error::BudgetTooSmall(0))));
    }

    #[test]
    fn self_avoiding_walks_are_not_cheap() {
        let f = field(30.0, 6);
        let aug = build_augmented(&f, AugmentConfig::with_defaults(2, 2.0)).unwrap();
        let mut rng = stream_rng(6, "walks", 0);
        let costs = self_avoiding_walk_costs(&aug, 50, 2000, &mut rng);
        assert_eq!(costs.len(), 2000);
        assert_eq!(costs.iter().filter(|&&c| c <= 0.05).count(), 0);
    }

    #[test]
    fn coupling_refuses_zero_atom() {
        let cfg = SimConfig::new(2, 1.0, 2.0, 30.0, 1);
        let params = CouplingParams { x: vec![10.0, 0.0], t_grid: vec![1.0], replicas: 200, k: 200.0, delta: 0.05, first_replica: 0 };
        let d = WeightDistribution::BernoulliZeroOne { p_zero: 0.01 };
        assert!(matches!(coupling_frequencies(&cfg, d, &params), Err(Error::ConditionViolated(_))));
    }
}
