use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::fpp::weights::PassageField;

/// Anything Dijkstra can run on: vertices `0..n` and weighted arcs.
pub trait WeightedGraph {
    fn vertex_count(&self) -> usize;
    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, f64));
}

impl WeightedGraph for PassageField {
    fn vertex_count(&self) -> usize {
        self.graph().vertex_count()
    }

    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for (w, e) in self.graph().incident(v) {
            f(w as usize, self.weight(e as usize));
        }
    }
}

/// Passage times from one source and the geodesic tree.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstPassageResult {
    pub source: usize,
    /// `f64::INFINITY` for unreached vertices.
    pub time: Vec<f64>,
    pub predecessor: Vec<Option<u32>>,
}

impl FirstPassageResult {
    pub fn reached(&self, v: usize) -> bool {
        self.time[v].is_finite()
    }

    /// Children lists of the geodesic tree.
    pub fn children(&self) -> Vec<Vec<u32>> {
        let mut kids = vec![Vec::new(); self.time.len()];
        for (v, p) in self.predecessor.iter().enumerate() {
            if let Some(p) = p {
                kids[*p as usize].push(v as u32);
            }
        }
        kids
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    time: f64,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (time, vertex)
        other.time.total_cmp(&self.time).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact single-source shortest paths over nonnegative weights.
///
/// Among the vertices settled before `v` that realize `time[v]`, the
/// predecessor is the one with the smallest index. Restricting the choice to
/// earlier-settled vertices keeps the tree acyclic when zero weights create
/// ties. The search stops early once `stop_at` is settled.
pub fn dijkstra<G: WeightedGraph + ?Sized>(graph: &G, source: usize, stop_at: Option<usize>) -> FirstPassageResult {
    let n = graph.vertex_count();
    let mut time = vec![f64::INFINITY; n];
    let mut predecessor: Vec<Option<u32>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    time[source] = 0.0;
    heap.push(Entry { time: 0.0, vertex: source as u32 });
    while let Some(Entry { time: t, vertex }) = heap.pop() {
        let u = vertex as usize;
        if settled[u] || t > time[u] {
            continue;
        }
        settled[u] = true;
        if stop_at == Some(u) {
            break;
        }
        graph.for_each_arc(u, &mut |w, weight| {
            if settled[w] {
                return;
            }
            let candidate = t + weight;
            if candidate < time[w] {
                time[w] = candidate;
                predecessor[w] = Some(u as u32);
                heap.push(Entry { time: candidate, vertex: w as u32 });
            } else if candidate == time[w] && predecessor[w].is_some_and(|p| (u as u32) < p) {
                predecessor[w] = Some(u as u32);
            }
        });
    }
    if stop_at.is_some() {
        // entries left unsettled hold tentative values only
        for v in 0..n {
            if !settled[v] {
                time[v] = f64::INFINITY;
                predecessor[v] = None;
            }
        }
    }
    FirstPassageResult { source, time, predecessor }
}

/// Passage times from `source` over the whole component of `source`.
pub fn first_passage(field: &PassageField, source: usize, restrict_to_giant: bool) -> Result<FirstPassageResult> {
    if source >= field.graph().vertex_count() {
        return Err(Error::InvalidConfig(format!("source {source} out of range")));
    }
    if restrict_to_giant && !field.graph().in_giant(source) {
        return Err(Error::InvalidConfig(format!("source {source} is outside the giant component")));
    }
    // the component of the source is closed under the search, so no filtering is needed
    Ok(dijkstra(field, source, None))
}

/// `T(x, y)` between the giant-component projections of two coordinates.
pub fn passage_time_between(field: &PassageField, x: &[f64], y: &[f64]) -> Result<f64> {
    let a = field.graph().nearest_vertex(x, true)?;
    let b = field.graph().nearest_vertex(y, true)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(dijkstra(field, a, Some(b)).time[b])
}

/// Backtracks the geodesic from the source to `target`.
pub fn extract_geodesic(result: &FirstPassageResult, target: usize) -> Result<Vec<usize>> {
    if !result.reached(target) {
        return Err(Error::Unreached(target));
    }
    let mut path = vec![target];
    let mut cur = target;
    while let Some(p) = result.predecessor[cur] {
        cur = p as usize;
        path.push(cur);
    }
    debug_assert_eq!(cur, result.source);
    path.reverse();
    Ok(path)
}
