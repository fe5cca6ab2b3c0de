//! Reached regions `H_t` measured on a probe lattice.
//!
//! `H_t` is the union of the Voronoi cells (with respect to the giant
//! component) of the vertices reached by time `t`. A probe point belongs to
//! the measured region when its nearest giant vertex is reached.

use std::fmt::Write as _;

use crate::error::Result;
use crate::fpp::passage::{dijkstra, FirstPassageResult};
use crate::fpp::weights::PassageField;
use crate::grid::dist2;

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeStats {
    pub t: f64,
    pub reached: usize,
    pub rho_in: f64,
    pub rho_out: f64,
    /// `rho_out / rho_in`; infinite while the inner radius is below probe resolution.
    pub roundness: f64,
    pub phi_hat: f64,
    /// The measured region touches the window boundary; radii are then unreliable.
    pub window_clipped: bool,
}

/// Probe lattice around a source coordinate, with each probe's nearest
/// giant vertex and the passage times from the source's projection.
#[derive(Clone, Debug)]
pub struct ShapeProbe {
    pub center: Vec<f64>,
    pub spacing: f64,
    pub window: f64,
    counts: Vec<usize>,
    start: Vec<f64>,
    owner: Vec<u32>,
    distance: Vec<f64>,
    on_boundary: Vec<bool>,
    order: Vec<u32>,
    pub passage: FirstPassageResult,
}

impl ShapeProbe {
    /// Lattice of spacing `spacing` through `center`, clipped to the centred
    /// window of side `window`.
    pub fn new(field: &PassageField, center: &[f64], window: f64, spacing: f64) -> Result<Self> {
        let graph = field.graph();
        let d = graph.dim();
        let half = window / 2.0;
        // lattice indices k with |center + k h| <= half on every axis
        let lo: Vec<i64> = center.iter().map(|c| ((-half - c) / spacing).ceil() as i64).collect();
        let hi: Vec<i64> = center.iter().map(|c| ((half - c) / spacing).floor() as i64).collect();
        let start: Vec<f64> = center.iter().zip(&lo).map(|(c, &l)| c + l as f64 * spacing).collect();
        let counts: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0) as usize).collect();
        let total: usize = counts.iter().product();

        let source = graph.nearest_vertex(center, true)?;
        let passage = dijkstra(field, source, None);

        let mut owner = Vec::with_capacity(total);
        let mut distance = Vec::with_capacity(total);
        let mut on_boundary = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        let mut p = vec![0.0; d];
        for _ in 0..total {
            for a in 0..d {
                p[a] = start[a] + idx[a] as f64 * spacing;
            }
            owner.push(graph.nearest_vertex(&p, true)? as u32);
            distance.push(dist2(&p, center).sqrt());
            on_boundary.push(idx.iter().zip(&counts).any(|(&k, &n)| k == 0 || k + 1 == n));
            for a in 0..d {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let mut order: Vec<u32> = (0..total as u32).collect();
        order.sort_by(|&a, &b| distance[a as usize].total_cmp(&distance[b as usize]));
        Ok(Self {
            center: center.to_vec(),
            spacing,
            window,
            counts,
            start,
            owner,
            distance,
            on_boundary,
            order,
            passage,
        })
    }

    pub fn probe_count(&self) -> usize {
        self.owner.len()
    }

    /// Membership of every probe in the region reached by time `t`.
    pub fn mask(&self, t: f64) -> Vec<bool> {
        self.owner.iter().map(|&v| self.passage.time[v as usize] <= t).collect()
    }

    pub fn stats(&self, t: f64) -> ShapeStats {
        let mask = self.mask(t);
        let reached = self.passage.time.iter().filter(|&&x| x <= t).count();
        let mut rho_out: f64 = 0.0;
        let mut rho_in: f64 = 0.0;
        let mut clean = true;
        for &i in &self.order {
            let i = i as usize;
            if mask[i] {
                rho_out = rho_out.max(self.distance[i]);
                if clean {
                    rho_in = self.distance[i];
                }
            } else {
                clean = false;
            }
        }
        let window_clipped = mask.iter().zip(&self.on_boundary).any(|(&m, &b)| m && b);
        let roundness = if rho_in > 0.0 { rho_out / rho_in } else { f64::INFINITY };
        let phi_hat = if t > 0.0 { 0.5 * (rho_in + rho_out) / t } else { f64::INFINITY };
        ShapeStats { t, reached, rho_in, rho_out, roundness, phi_hat, window_clipped }
    }

    /// Text grid of the planar slice through the centre: `#` inside, `.` outside.
    /// Rows run from the largest second coordinate down.
    pub fn mask_text(&self, t: f64) -> String {
        let mask = self.mask(t);
        let d = self.center.len();
        let counts = &self.counts;
        let n0 = counts[0];
        // slice index along axes >= 2: the lattice layer through the centre
        let mut fixed = 0usize;
        let mut stride = counts[0] * counts[1];
        for a in 2..d {
            let k = ((self.center[a] - self.start[a]) / self.spacing).round() as usize;
            fixed += k * stride;
            stride *= counts[a];
        }
        let mut out = String::new();
        let _ = writeln!(out, "# t={t} spacing={} origin={:?} rows={} cols={n0}", self.spacing, self.start, counts[1]);
        for row in (0..counts[1]).rev() {
            for col in 0..n0 {
                out.push(if mask[fixed + row * n0 + col] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Shape statistics of `H_t` seen from `source`, on the centred window of
/// side `window`.
pub fn shape_statistics(field: &PassageField, source: &[f64], t: f64, probe_spacing: f64, window: f64) -> Result<ShapeStats> {
    Ok(ShapeProbe::new(field, source, window, probe_spacing)?.stats(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpp::weights::{assign_weights, WeightDistribution};
    use crate::graph::GeoGraph;
    use crate::sampling::{sample_ppp, SimConfig};
    use std::sync::Arc;

    fn field(dist: WeightDistribution) -> PassageField {
        let cfg = SimConfig::new(2, 1.0, 2.0, 40.0, 12);
        let g = Arc::new(GeoGraph::build(sample_ppp(&cfg).unwrap(), 2.0));
        assign_weights(g, dist, 5).unwrap()
    }

    #[test]
    fn time_zero_is_voronoi_cell_of_source() {
        let f = field(WeightDistribution::Exponential { rate: 1.0 });
        let probe = ShapeProbe::new(&f, &[0.0, 0.0], 20.0, 0.5).unwrap();
        let q0 = f.graph().nearest_vertex(&[0.0, 0.0], true).unwrap();
        let s = probe.stats(0.0);
        assert_eq!(s.reached, 1);
        for (i, m) in probe.mask(0.0).into_iter().enumerate() {
            assert_eq!(m, probe.owner[i] as usize == q0);
        }
    }

    #[test]
    fn deterministic_weights_below_one_reach_only_source() {
        let f = field(WeightDistribution::Deterministic { value: 1.0 });
        let s = shape_statistics(&f, &[0.0, 0.0], 0.5, 0.5, 20.0).unwrap();
        assert_eq!(s.reached, 1);
    }

    #[test]
    fn radii_ordered_and_monotone() {
        let f = field(WeightDistribution::Exponential { rate: 1.0 });
        let probe = ShapeProbe::new(&f, &[0.0, 0.0], 20.0, 0.5).unwrap();
        let mut prev = probe.mask(0.0);
        for k in 0..20 {
            let t = k as f64 * 0.25;
            let s = probe.stats(t);
            assert!(s.rho_in <= s.rho_out);
            assert!(s.roundness >= 1.0);
            let m = probe.mask(t);
            assert!(prev.iter().zip(&m).all(|(a, b)| !a || *b));
            prev = m;
        }
    }

    #[test]
    fn mask_text_dimensions() {
        let f = field(WeightDistribution::Exponential { rate: 1.0 });
        let probe = ShapeProbe::new(&f, &[0.0, 0.0], 4.0, 1.0).unwrap();
        let text = probe.mask_text(1.0);
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.len() == 5));
    }
}
