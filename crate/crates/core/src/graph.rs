//! Random geometric graph on a point set, its components, and the
//! structural estimators (giant density, stretch factor, hole diameter).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{dist2, CellGrid};
use crate::sampling::PointSet;

/// Connected-component labelling. Labels are assigned in order of each
/// component's smallest vertex index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub id: Vec<u32>,
    pub sizes: Vec<usize>,
    /// Component of maximum size; ties go to the one holding the smallest vertex index.
    pub giant: Option<u32>,
}

impl Components {
    pub fn giant_size(&self) -> usize {
        self.giant.map_or(0, |g| self.sizes[g as usize])
    }
}

/// Random geometric graph: `{u, v}` is an edge iff `0 < |u - v| < r`.
#[derive(Clone, Debug)]
pub struct GeoGraph {
    points: PointSet,
    radius: f64,
    edges: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    edge_of: Vec<u32>,
    cells: CellGrid,
    giant_cells: CellGrid,
    components: Components,
}

impl GeoGraph {
    pub fn build(points: PointSet, radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        let cells = CellGrid::build(&points, None, radius);
        let r2 = radius * radius;
        let mut edges = Vec::new();
        for i in 0..points.len() as u32 {
            let p = points.point(i as usize);
            cells.for_each_near(p, |j| {
                if j > i {
                    let d2 = dist2(p, points.point(j as usize));
                    if d2 > 0.0 && d2 < r2 {
                        edges.push((i, j));
                    }
                }
            });
        }
        edges.sort_unstable();
        Self::assemble(points, radius, edges, cells, None)
    }

    /// Reassembles a graph from stored parts (used when loading from disk).
    pub fn from_parts(points: PointSet, radius: f64, mut edges: Vec<(u32, u32)>, component_id: Option<Vec<u32>>) -> Self {
        edges.sort_unstable();
        let cells = CellGrid::build(&points, None, radius);
        Self::assemble(points, radius, edges, cells, component_id)
    }

    fn assemble(points: PointSet, radius: f64, edges: Vec<(u32, u32)>, cells: CellGrid, labels: Option<Vec<u32>>) -> Self {
        let n = points.len();
        let mut offsets = vec![0u32; n + 1];
        for &(u, v) in &edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * edges.len()];
        let mut edge_of = vec![0u32; 2 * edges.len()];
        for (e, &(u, v)) in edges.iter().enumerate() {
            targets[fill[u as usize] as usize] = v;
            edge_of[fill[u as usize] as usize] = e as u32;
            fill[u as usize] += 1;
            targets[fill[v as usize] as usize] = u;
            edge_of[fill[v as usize] as usize] = e as u32;
            fill[v as usize] += 1;
        }
        // sorted neighbour lists; edges are sorted so only the u > v half needs fixing
        for i in 0..n {
            let (a, b) = (offsets[i] as usize, offsets[i + 1] as usize);
            let mut pairs: Vec<(u32, u32)> = targets[a..b].iter().copied().zip(edge_of[a..b].iter().copied()).collect();
            pairs.sort_unstable();
            for (k, (t, e)) in pairs.into_iter().enumerate() {
                targets[a + k] = t;
                edge_of[a + k] = e;
            }
        }
        let mut graph = GeoGraph {
            giant_cells: CellGrid::build(&points, Some(&[]), radius),
            points,
            radius,
            edges,
            offsets,
            targets,
            edge_of,
            cells,
            components: Components { id: Vec::new(), sizes: Vec::new(), giant: None },
        };
        graph.components = match labels {
            Some(id) => components_from_labels(id),
            None => label_components(&graph),
        };
        let giant: Vec<u32> = graph.giant_vertices().collect();
        graph.giant_cells = CellGrid::build(&graph.points, Some(&giant), radius);
        graph
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Neighbours of `v` paired with the index of the connecting edge.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let range = self.offsets[v] as usize..self.offsets[v + 1] as usize;
        self.targets[range.clone()].iter().copied().zip(self.edge_of[range].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    pub fn in_giant(&self, v: usize) -> bool {
        self.components.giant == Some(self.components.id[v])
    }

    pub fn giant_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vertex_count() as u32).filter(|&v| self.in_giant(v as usize))
    }

    pub fn cell_index(&self) -> &CellGrid {
        &self.cells
    }

    /// `q(x)` when `restrict_to_giant`, otherwise `q̄(x)`.
    pub fn nearest_vertex(&self, x: &[f64], restrict_to_giant: bool) -> Result<usize> {
        let grid = if restrict_to_giant { &self.giant_cells } else { &self.cells };
        grid.nearest(&self.points, x).map(|v| v as usize).ok_or(Error::EmptyTargetSet)
    }

    /// Unweighted hop distance from `source` to every vertex (`u32::MAX` if unreachable).
    pub fn hop_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source as u32);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in self.neighbors(u as usize) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Hop distance `D(x, y)` between `q(x)` and `q(y)`.
    pub fn graph_distance(&self, x: &[f64], y: &[f64]) -> Result<u32> {
        let a = self.nearest_vertex(x, true)?;
        let b = self.nearest_vertex(y, true)?;
        if a == b {
            return Ok(0);
        }
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[a] = 0;
        queue.push_back(a as u32);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in self.neighbors(u as usize) {
                if dist[w as usize] == u32::MAX {
                    if w as usize == b {
                        return Ok(du + 1);
                    }
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        unreachable!("q(x) and q(y) share the giant component")
    }

    /// Induced subgraph on the vertices inside the centred box of side `side`.
    /// Returns the subgraph and the map from new to old vertex indices.
    pub fn restrict_to_box(&self, side: f64) -> (GeoGraph, Vec<u32>) {
        let half = side / 2.0;
        let keep: Vec<u32> = (0..self.vertex_count() as u32)
            .filter(|&v| self.points.point(v as usize).iter().all(|c| c.abs() <= half))
            .collect();
        let mut new_index = vec![u32::MAX; self.vertex_count()];
        let mut coords = Vec::with_capacity(keep.len() * self.dim());
        for (k, &v) in keep.iter().enumerate() {
            new_index[v as usize] = k as u32;
            coords.extend_from_slice(self.points.point(v as usize));
        }
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (new_index[u as usize], new_index[v as usize]);
                (a != u32::MAX && b != u32::MAX).then_some((a, b))
            })
            .collect();
        let pts = PointSet::from_coords(self.dim(), coords, side, self.points.intensity, self.points.seed);
        (GeoGraph::from_parts(pts, self.radius, edges, None), keep)
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Labels connected components of `graph` with union-find.
pub fn label_components(graph: &GeoGraph) -> Components {
    let n = graph.vertex_count();
    let mut dsu = DisjointSets::new(n);
    for &(u, v) in graph.edges() {
        dsu.union(u, v);
    }
    let mut label_of_root = vec![u32::MAX; n];
    let mut id = vec![0u32; n];
    let mut next = 0u32;
    for v in 0..n as u32 {
        let root = dsu.find(v) as usize;
        if label_of_root[root] == u32::MAX {
            label_of_root[root] = next;
            next += 1;
        }
        id[v as usize] = label_of_root[root];
    }
    components_from_labels(id)
}

/// Canonicalizes arbitrary component labels and picks the giant.
fn components_from_labels(raw: Vec<u32>) -> Components {
    let mut remap = std::collections::HashMap::new();
    let mut id = Vec::with_capacity(raw.len());
    let mut sizes: Vec<usize> = Vec::new();
    for l in raw {
        let next = remap.len() as u32;
        let c = *remap.entry(l).or_insert(next);
        if c as usize == sizes.len() {
            sizes.push(0);
        }
        sizes[c as usize] += 1;
        id.push(c);
    }
    // labels follow first appearance, so the first maximal label holds the smallest vertex
    let giant = sizes
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, usize)>, (c, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((c, s)),
        })
        .map(|(c, _)| c as u32);
    Components { id, sizes, giant }
}

/// Unit-ball volume in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureParams {
    pub inner_window_fraction: f64,
    pub probe_spacing: f64,
    /// Number of scales in the stretch regression.
    pub stretch_scales: usize,
}

impl StructureParams {
    pub fn defaults_for(radius: f64) -> Self {
        Self { inner_window_fraction: 0.5, probe_spacing: radius / 4.0, stretch_scales: 8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub theta_hat: f64,
    pub theta_window: f64,
    pub stretch_hat: f64,
    pub stretch_half_width: f64,
    pub hole_diameter: f64,
    pub probe_spacing: f64,
}

/// Probe directions: 8 evenly spaced angles in the plane; axis and
/// diagonal directions in higher dimension.
pub fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..8)
            .map(|k| {
                let a = k as f64 * std::f64::consts::FRAC_PI_4;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut dirs = Vec::new();
    for a in 0..dim {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; dim];
            u[a] = s;
            dirs.push(u);
        }
    }
    let norm = (dim as f64).sqrt();
    for mask in 0..(1u32 << dim) {
        dirs.push((0..dim).map(|a| if mask >> a & 1 == 1 { -1.0 / norm } else { 1.0 / norm }).collect());
    }
    dirs
}

/// Regular lattice of probe points covering the centred box of side `side`.
pub fn probe_lattice(dim: usize, side: f64, spacing: f64) -> Vec<Vec<f64>> {
    let per_axis = (side / spacing).floor() as usize + 1;
    let start = -((per_axis - 1) as f64) * spacing / 2.0;
    let total = per_axis.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        out.push(idx.iter().map(|&k| start + k as f64 * spacing).collect());
        for a in 0..dim {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

/// Estimates the giant density, the stretch factor and the largest
/// spherical hole inside the inner window of `graph`'s box.
pub fn estimate_structure(graph: &GeoGraph, params: &StructureParams) -> Result<StructureReport> {
    let r = graph.radius();
    if !(params.probe_spacing > 0.0 && params.probe_spacing <= r / 2.0) {
        return Err(Error::InvalidConfig(format!("probe spacing {} must lie in (0, r/2]", params.probe_spacing)));
    }
    if graph.components().giant_size() == 0 {
        return Err(Error::EmptyTargetSet);
    }
    let d = graph.dim();
    let window = params.inner_window_fraction * graph.points().box_side;
    let half = window / 2.0;
    let in_window = graph
        .giant_vertices()
        .filter(|&v| graph.points().point(v as usize).iter().all(|c| c.abs() <= half))
        .count();
    if in_window < 10 {
        return Err(Error::WindowTooSmall { found: in_window, needed: 10 });
    }
    let theta_hat = in_window as f64 / window.powi(d as i32);

    let origin = vec![0.0; d];
    let source = graph.nearest_vertex(&origin, true)?;
    let hops = graph.hop_distances(source);
    let max_scale = 0.9 * half;
    let k = params.stretch_scales.max(2);
    let mut samples = Vec::new();
    for u in probe_directions(d) {
        for j in 1..=k {
            let s = max_scale * j as f64 / k as f64;
            let y: Vec<f64> = u.iter().map(|c| c * s).collect();
            let target = graph.nearest_vertex(&y, true)?;
            samples.push((s, hops[target] as f64));
        }
    }
    let fit = crate::stats::linear_fit(&samples);

    let mut hole: f64 = 0.0;
    for p in probe_lattice(d, window, params.probe_spacing) {
        let q = graph.nearest_vertex(&p, true)?;
        let dist = dist2(graph.points().point(q), &p).sqrt();
        if dist > r {
            hole = hole.max(2.0 * (dist - r));
        }
    }

    Ok(StructureReport {
        theta_hat,
        theta_window: window,
        stretch_hat: fit.slope,
        stretch_half_width: 1.96 * fit.slope_se,
        hole_diameter: hole,
        probe_spacing: params.probe_spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, SimConfig};

    fn brute_edges(points: &PointSet, r: f64) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d2 = dist2(points.point(i), points.point(j));
                if d2 > 0.0 && d2 < r * r {
                    out.push((i as u32, j as u32));
                }
            }
        }
        out
    }

    fn bfs_labels(g: &GeoGraph) -> Vec<u32> {
        let mut label = vec![u32::MAX; g.vertex_count()];
        let mut next = 0;
        for s in 0..g.vertex_count() {
            if label[s] != u32::MAX {
                continue;
            }
            for (v, &h) in g.hop_distances(s).iter().enumerate() {
                if h != u32::MAX {
                    label[v] = next;
                }
            }
            next += 1;
        }
        label
    }

    #[test]
    fn close_pair_is_an_edge() {
        let pts = PointSet::from_points(2, &[vec![0.0, 0.0], vec![0.0, 0.5]], 1.0, 1.0);
        assert_eq!(GeoGraph::build(pts, 1.0).edges(), &[(0, 1)]);
    }

    #[test]
    fn distance_exactly_r_is_not_an_edge() {
        let pts = PointSet::from_points(2, &[vec![0.0, 0.0], vec![1.0, 0.0]], 1.0, 1.0);
        assert!(GeoGraph::build(pts, 1.0).edges().is_empty());
    }

    #[test]
    fn coincident_points_are_not_adjacent() {
        let pts = PointSet::from_points(2, &[vec![0.3, 0.3], vec![0.3, 0.3]], 1.0, 1.0);
        assert!(GeoGraph::build(pts, 1.0).edges().is_empty());
    }

    #[test]
    fn grid_edges_match_all_pairs() {
        let pts = sample_ppp(&SimConfig::new(2, 500.0 / 100.0, 0.3, 10.0, 8)).unwrap();
        let expected = brute_edges(&pts, 0.3);
        let g = GeoGraph::build(pts, 0.3);
        assert_eq!(g.edges(), expected.as_slice());
    }

    #[test]
    fn adjacency_symmetric_and_strict() {
        let pts = sample_ppp(&SimConfig::new(3, 2.0, 0.8, 5.0, 2)).unwrap();
        let g = GeoGraph::build(pts, 0.8);
        for u in 0..g.vertex_count() {
            for &v in g.neighbors(u) {
                assert!(g.neighbors(v as usize).contains(&(u as u32)));
                let d2 = dist2(g.points().point(u), g.points().point(v as usize));
                assert!(d2 > 0.0 && d2 < 0.64);
            }
            assert!(g.neighbors(u).windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn isolated_vertices_tie_rule() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 10.0, 0.0]).collect();
        let g = GeoGraph::build(PointSet::from_points(2, &pts, 50.0, 1.0), 1.0);
        let c = g.components();
        assert_eq!(c.sizes.len(), 5);
        assert_eq!(c.giant_size(), 1);
        assert!(g.in_giant(0));
    }

    #[test]
    fn path_is_one_component() {
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.9, 0.0]).collect();
        let g = GeoGraph::build(PointSet::from_points(2, &pts, 5.0, 1.0), 1.0);
        assert_eq!(g.components().sizes, vec![4]);
    }

    #[test]
    fn labels_match_bfs_flood_fill() {
        let pts = sample_ppp(&SimConfig::new(2, 3.0, 0.6, 10.0, 300)).unwrap();
        let g = GeoGraph::build(pts, 0.6);
        // both label schemes number components by first appearance, so they agree exactly
        assert_eq!(g.components().id, bfs_labels(&g));
    }

    #[test]
    fn nearest_vertex_examples() {
        let pts = PointSet::from_points(2, &[vec![0.0, 2.0], vec![0.0, 0.0], vec![0.0, 1.5]], 4.0, 1.0);
        let g = GeoGraph::build(pts, 1.0);
        // giant is {0, 2} (distance 0.5); vertex 1 is isolated
        assert_eq!(g.nearest_vertex(&[0.0, 1.5], true).unwrap(), 2);
        assert_eq!(g.nearest_vertex(&[0.0, 0.4], false).unwrap(), 1);
        let pts = PointSet::from_points(2, &[vec![0.0, 2.0], vec![0.0, 0.0]], 4.0, 1.0);
        let g = GeoGraph::build(pts, 1.0);
        assert_eq!(g.nearest_vertex(&[0.0, 1.0], false).unwrap(), 1);
    }

    #[test]
    fn empty_graph_reports_empty_target() {
        let g = GeoGraph::build(PointSet::from_coords(2, vec![], 1.0, 1.0, 0), 1.0);
        assert!(matches!(g.nearest_vertex(&[0.0, 0.0], true), Err(Error::EmptyTargetSet)));
    }

    #[test]
    fn graph_distance_on_path() {
        let pts = PointSet::from_points(2, &[vec![0.0, 0.0], vec![0.8, 0.0], vec![1.6, 0.0]], 4.0, 1.0);
        let g = GeoGraph::build(pts, 1.0);
        assert_eq!(g.graph_distance(&[0.0, 0.0], &[1.6, 0.0]).unwrap(), 2);
        assert_eq!(g.graph_distance(&[0.7, 0.1], &[0.7, 0.1]).unwrap(), 0);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn complete_graph_theta_is_point_density() {
        let cfg = SimConfig::new(2, 2.0, 100.0, 8.0, 4);
        let pts = sample_ppp(&cfg).unwrap();
        let g = GeoGraph::build(pts.clone(), 8.0 * 2f64.sqrt() + 1.0);
        let params = StructureParams { inner_window_fraction: 1.0, probe_spacing: 1.0, stretch_scales: 4 };
        let rep = estimate_structure(&g, &params).unwrap();
        assert_eq!(rep.theta_hat, pts.len() as f64 / 64.0);
    }

    #[test]
    fn probe_spacing_checked() {
        let g = GeoGraph::build(sample_ppp(&SimConfig::new(2, 1.0, 2.0, 20.0, 1)).unwrap(), 2.0);
        let params = StructureParams { inner_window_fraction: 0.5, probe_spacing: 1.5, stretch_scales: 4 };
        assert!(estimate_structure(&g, &params).is_err());
    }

    #[test]
    fn tiny_window_rejected() {
        let g = GeoGraph::build(sample_ppp(&SimConfig::new(2, 1.0, 2.0, 20.0, 1)).unwrap(), 2.0);
        let params = StructureParams { inner_window_fraction: 0.05, probe_spacing: 0.5, stretch_scales: 4 };
        assert!(matches!(estimate_structure(&g, &params), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn planted_hole_is_recovered() {
        let r = 1.0;
        let cfg = SimConfig::new(2, 8.0, r, 30.0, 77);
        let mut pts = sample_ppp(&cfg).unwrap();
        let center = [2.3, -1.7];
        let kept: Vec<Vec<f64>> = pts.iter().filter(|p| dist2(p, &center).sqrt() >= 3.0 * r).map(|p| p.to_vec()).collect();
        pts = PointSet::from_points(2, &kept, 30.0, 8.0);
        let g = GeoGraph::build(pts, r);
        let params = StructureParams::defaults_for(r);
        let rep = estimate_structure(&g, &params).unwrap();
        let h = params.probe_spacing;
        assert!(rep.hole_diameter >= 2.0 * (3.0 * r - r) - 2.0 * h, "{}", rep.hole_diameter);
        assert!(rep.hole_diameter <= 6.0 * r, "{}", rep.hole_diameter);
    }

    #[test]
    fn stretch_at_least_inverse_radius() {
        for seed in 0..5 {
            let cfg = SimConfig::new(2, 1.0, 2.0, 40.0, seed);
            let g = GeoGraph::build(sample_ppp(&cfg).unwrap(), 2.0);
            let rep = estimate_structure(&g, &StructureParams::defaults_for(2.0)).unwrap();
            assert!(rep.stretch_hat >= 0.5, "{}", rep.stretch_hat);
        }
    }

    #[test]
    fn lattice_covers_window() {
        let l = probe_lattice(2, 4.0, 1.0);
        assert_eq!(l.len(), 25);
        assert_eq!(l[0], vec![-2.0, -2.0]);
        assert_eq!(l[24], vec![2.0, 2.0]);
    }
}
