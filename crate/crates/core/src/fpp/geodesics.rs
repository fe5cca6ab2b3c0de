//! Geometry of geodesics: Hausdorff deviation from the straight segment and
//! cone-straightness of the geodesic tree.

use crate::fpp::passage::FirstPassageResult;
use crate::sampling::PointSet;

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = dot(&ab, &ab);
    let s = if len2 > 0.0 { (dot(&ap, &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let closest: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + s * d).collect();
    norm(&sub(p, &closest))
}

fn distance_to_polyline(p: &[f64], poly: &[Vec<f64>]) -> f64 {
    if poly.len() == 1 {
        return norm(&sub(p, &poly[0]));
    }
    poly.windows(2).map(|w| point_segment_distance(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
}

fn sample_segment(a: &[f64], b: &[f64], resolution: f64) -> Vec<Vec<f64>> {
    let len = norm(&sub(b, a));
    let steps = ((len / resolution).ceil() as usize).max(1);
    (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
        })
        .collect()
}

/// Symmetric Hausdorff distance between the polyline through `path` and
/// the segment `[x, y]`.
///
/// The polyline-to-segment side is exact (the distance to a convex set is
/// convex along each polyline piece, so its maximum sits at a vertex). The
/// segment-to-polyline side samples the segment at spacing `resolution`
/// and measures exact point-to-polyline distances.
pub fn geodesic_deviation(path: &[Vec<f64>], x: &[f64], y: &[f64], resolution: f64) -> f64 {
    assert!(!path.is_empty(), "empty path");
    let forward = path.iter().map(|v| point_segment_distance(v, x, y)).fold(0.0, f64::max);
    let backward = sample_segment(x, y, resolution)
        .iter()
        .map(|s| distance_to_polyline(s, path))
        .fold(0.0, f64::max);
    forward.max(backward)
}

/// Angle between two vectors via clamped arccos; zero when either vanishes.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Cone half-angle `s^(eps - 1/4)` allowed at distance `s` from the root.
pub fn straightness_bound(s: f64, eps: f64) -> f64 {
    s.powf(eps - 0.25)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StraightnessReport {
    pub checked: usize,
    pub violators: Vec<usize>,
}

impl StraightnessReport {
    pub fn violation_count(&self) -> usize {
        self.violators.len()
    }
}

/// Vertices `v` of the geodesic tree whose subtree leaves the cone
/// `x + Cone(v - x, f(|v - x|))`.
///
/// Subtrees are contiguous ranges of one pre-order walk, so the check costs
/// the sum of subtree sizes.
pub fn straightness_report(result: &FirstPassageResult, points: &PointSet, x: &[f64], eps: f64) -> StraightnessReport {
    let children = result.children();
    let n = result.time.len();
    let mut preorder = Vec::with_capacity(n);
    let mut end = vec![0usize; n];
    // iterative DFS: (vertex, exiting)
    let mut stack = vec![(result.source, false)];
    while let Some((v, exiting)) = stack.pop() {
        if exiting {
            end[v] = preorder.len();
            continue;
        }
        preorder.push(v);
        stack.push((v, true));
        for &c in children[v].iter().rev() {
            stack.push((c as usize, false));
        }
    }
    let offsets: Vec<Vec<f64>> = preorder.iter().map(|&v| sub(points.point(v), x)).collect();
    let mut violators = Vec::new();
    let mut checked = 0;
    for (k, &v) in preorder.iter().enumerate() {
        if v == result.source {
            continue;
        }
        checked += 1;
        let axis = &offsets[k];
        let s = norm(axis);
        if s == 0.0 {
            continue;
        }
        let limit = straightness_bound(s, eps);
        if offsets[k + 1..end[v]].iter().any(|u| angle_between(axis, u) > limit) {
            violators.push(v);
        }
    }
    violators.sort_unstable();
    StraightnessReport { checked, violators }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_path_has_zero_deviation() {
        let path = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]];
        assert_eq!(geodesic_deviation(&path, &[0.0, 0.0], &[3.0, 0.0], 0.1), 0.0);
    }

    #[test]
    fn detour_deviation() {
        let path = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 0.0]];
        let d = geodesic_deviation(&path, &[0.0, 0.0], &[2.0, 0.0], 0.05);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn endpoints_far_from_path() {
        // path covers only the middle of the segment; the segment's ends are 1 away
        let path = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        let d = geodesic_deviation(&path, &[0.0, 0.0], &[3.0, 0.0], 0.1);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angles() {
        assert_eq!(angle_between(&[1.0, 0.0], &[3.0, 0.0]), 0.0);
        assert!((angle_between(&[1.0, 0.0], &[0.0, 2.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_between(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    fn tree(source: usize, preds: Vec<Option<u32>>) -> FirstPassageResult {
        FirstPassageResult { source, time: vec![0.0; preds.len()], predecessor: preds }
    }

    #[test]
    fn star_has_no_violations() {
        let pts = PointSet::from_points(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]], 4.0, 1.0);
        let t = tree(0, vec![None, Some(0), Some(0), Some(0)]);
        let rep = straightness_report(&t, &pts, &[0.0, 0.0], 0.1);
        assert_eq!(rep.checked, 3);
        assert!(rep.violators.is_empty());
    }

    #[test]
    fn perpendicular_descendant_violates() {
        // the child of v = (4, 0) sits at (0, 4), a right angle away
        let pts = PointSet::from_points(2, &[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0]], 10.0, 1.0);
        let t = tree(0, vec![None, Some(0), Some(1)]);
        assert!(straightness_bound(4.0, 0.1) < std::f64::consts::FRAC_PI_2);
        let rep = straightness_report(&t, &pts, &[0.0, 0.0], 0.1);
        assert_eq!(rep.violators, vec![1]);
    }
}
