//! Uniform cell index over a subset of a point set.
//!
//! Cells have side at least `min_side` along every axis, so two points at
//! distance below `min_side` always sit in cells whose indices differ by at
//! most one per axis.

use crate::sampling::PointSet;

const MAX_CELLS_PER_POINT: usize = 4;

#[derive(Clone, Debug)]
pub struct CellGrid {
    dim: usize,
    origin: Vec<f64>,
    side: Vec<f64>,
    counts: Vec<usize>,
    /// `start[c]..start[c + 1]` indexes `items` for cell `c`.
    start: Vec<u32>,
    items: Vec<u32>,
}

impl CellGrid {
    /// Indexes the vertices listed in `members` (all vertices when `None`).
    pub fn build(points: &PointSet, members: Option<&[u32]>, min_side: f64) -> Self {
        let dim = points.dim();
        let all: Vec<u32>;
        let members = match members {
            Some(m) => m,
            None => {
                all = (0..points.len() as u32).collect();
                &all
            }
        };
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in members {
            for (k, &c) in points.point(i as usize).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        if members.is_empty() {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        // slightly inflated so float rounding never splits a close pair by two cells
        let unit = min_side * (1.0 + 1e-9);
        let mut counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (((h - l) / unit).floor() as usize).max(1))
            .collect();
        let cap = (members.len() * MAX_CELLS_PER_POINT).max(16);
        while counts.iter().product::<usize>() > cap {
            for c in counts.iter_mut() {
                *c = (*c / 2).max(1);
            }
        }
        let side: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .zip(&counts)
            .map(|((l, h), &n)| ((h - l) / n as f64).max(unit))
            .collect();

        let mut grid = CellGrid { dim, origin: lo, side, counts, start: Vec::new(), items: Vec::new() };
        let ncells: usize = grid.counts.iter().product();
        let cell_of: Vec<usize> = members.iter().map(|&i| grid.cell_index(points.point(i as usize))).collect();
        let mut start = vec![0u32; ncells + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for c in 0..ncells {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut items = vec![0u32; members.len()];
        for (&i, &c) in members.iter().zip(&cell_of) {
            items[fill[c] as usize] = i;
            fill[c] += 1;
        }
        grid.start = start;
        grid.items = items;
        grid
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn min_side(&self) -> f64 {
        self.side.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn axis_cell(&self, axis: usize, x: f64) -> usize {
        let k = ((x - self.origin[axis]) / self.side[axis]).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.counts[axis] - 1)
        }
    }

    fn cell_coords(&self, p: &[f64]) -> Vec<usize> {
        (0..self.dim).map(|a| self.axis_cell(a, p[a])).collect()
    }

    fn flatten(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * self.counts[a] + coords[a];
        }
        idx
    }

    fn cell_index(&self, p: &[f64]) -> usize {
        let c = self.cell_coords(p);
        self.flatten(&c)
    }

    pub fn cell_members(&self, cell: usize) -> &[u32] {
        &self.items[self.start[cell] as usize..self.start[cell + 1] as usize]
    }

    /// Visits every indexed vertex in the `3^d` cells around `p`'s cell.
    pub fn for_each_near(&self, p: &[f64], mut f: impl FnMut(u32)) {
        if self.items.is_empty() {
            return;
        }
        let center = self.cell_coords(p);
        self.for_each_cell_in_cube(&center, 1, |cell| {
            for &v in self.cell_members(cell) {
                f(v);
            }
        });
    }

    /// Visits cells with Chebyshev offset at most `k` from `center`; when
    /// `ring_only`, only those at offset exactly `k`.
    fn visit_cells(&self, center: &[usize], k: usize, ring_only: bool, f: &mut impl FnMut(usize)) {
        let d = self.dim;
        let lo: Vec<usize> = center.iter().map(|&c| c.saturating_sub(k)).collect();
        let hi: Vec<usize> = center.iter().zip(&self.counts).map(|(&c, &n)| (c + k).min(n - 1)).collect();
        let mut cur = lo.clone();
        loop {
            let on_ring = !ring_only || cur.iter().zip(center).any(|(&a, &b)| a.abs_diff(b) == k);
            if on_ring {
                f(self.flatten(&cur));
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    fn for_each_cell_in_cube(&self, center: &[usize], k: usize, mut f: impl FnMut(usize)) {
        self.visit_cells(center, k, false, &mut f);
    }

    /// Nearest indexed vertex to `x`. Ties on distance go to the
    /// lexicographically smallest coordinate vector, then the smallest index.
    pub fn nearest(&self, points: &PointSet, x: &[f64]) -> Option<u32> {
        if self.items.is_empty() {
            return None;
        }
        let center = self.cell_coords(x);
        let max_ring = center
            .iter()
            .zip(&self.counts)
            .map(|(&c, &n)| c.max(n - 1 - c))
            .max()
            .unwrap_or(0);
        let step = self.min_side();
        let mut best: Option<(f64, u32)> = None;
        for k in 0..=max_ring {
            if let Some((d2, _)) = best {
                // every vertex beyond ring k - 1 is at least (k - 1) * step away
                let bound = (k as f64 - 1.0) * step;
                if bound > 0.0 && bound * bound > d2 {
                    break;
                }
            }
            self.visit_cells(&center, k, true, &mut |cell| {
                for &v in self.cell_members(cell) {
                    let d2 = dist2(points.point(v as usize), x);
                    best = match best {
                        None => Some((d2, v)),
                        Some((bd, bv)) => {
                            if d2 < bd || (d2 == bd && prefer(points, v, bv)) {
                                Some((d2, v))
                            } else {
                                Some((bd, bv))
                            }
                        }
                    };
                }
            });
        }
        best.map(|(_, v)| v)
    }
}

/// `true` when `a` wins the nearest-vertex tie against `b`.
pub(crate) fn prefer(points: &PointSet, a: u32, b: u32) -> bool {
    let pa = points.point(a as usize);
    let pb = points.point(b as usize);
    match lex_cmp(pa, pb) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a < b,
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, SimConfig};

    #[test]
    fn nearest_matches_scan() {
        let pts = sample_ppp(&SimConfig::new(2, 1.0, 1.0, 20.0, 5)).unwrap();
        let grid = CellGrid::build(&pts, None, 1.3);
        let mut rng = crate::sampling::stream_rng(1, "q", 0);
        for _ in 0..500 {
            use rand::Rng;
            let x = [rng.random_range(-14.0..14.0), rng.random_range(-14.0..14.0)];
            let got = grid.nearest(&pts, &x).unwrap();
            let mut best = 0u32;
            for v in 1..pts.len() as u32 {
                let (d, bd) = (dist2(pts.point(v as usize), &x), dist2(pts.point(best as usize), &x));
                if d < bd || (d == bd && prefer(&pts, v, best)) {
                    best = v;
                }
            }
            assert_eq!(got, best);
        }
    }

    #[test]
    fn empty_grid_has_no_nearest() {
        let pts = PointSet::from_coords(2, vec![], 1.0, 1.0, 0);
        let grid = CellGrid::build(&pts, None, 1.0);
        assert_eq!(grid.nearest(&pts, &[0.0, 0.0]), None);
    }
}
