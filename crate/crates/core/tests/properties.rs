use proptest::prelude::*;
use shapelab::fpp::WeightDistribution;
use shapelab::heisenberg::HeisenbergElement as H;
use shapelab::persist::{from_bytes, to_bytes};
use shapelab::sampling::{sample_ppp_replica, PointSet, SimConfig};
use shapelab::stats::{wilson_interval, Summary, Z95};
use shapelab::GeoGraph;
use statrs::distribution::{ContinuousCDF, Exp, Normal, Uniform};
use statrs::statistics::Statistics;

fn element() -> impl Strategy<Value = H> {
    (-10_000i64..10_000, -10_000i64..10_000, -1_000_000i64..1_000_000).prop_map(|(x, y, z)| H::new(x, y, z))
}

proptest! {
    #[test]
    fn heisenberg_group_law(g in element(), h in element(), k in element()) {
        prop_assert_eq!(g.multiply(h).unwrap().multiply(k).unwrap(), g.multiply(h.multiply(k).unwrap()).unwrap());
        prop_assert_eq!(g.multiply(g.inverse().unwrap()).unwrap(), H::IDENTITY);
        let direct = g.multiply(h).unwrap().multiply(g.inverse().unwrap()).unwrap().multiply(h.inverse().unwrap()).unwrap();
        prop_assert_eq!(g.commutator(h).unwrap(), direct);
    }

    #[test]
    fn heisenberg_power_is_iterated_product(g in element(), n in 0u64..30) {
        let mut acc = H::IDENTITY;
        for _ in 0..n {
            acc = acc.multiply(g).unwrap();
        }
        prop_assert_eq!(g.power(n).unwrap(), acc);
    }

    #[test]
    fn grid_edges_equal_all_pairs(coords in prop::collection::vec(0.0f64..6.0, 0..120), r in 0.2f64..3.0) {
        // coordinates snapped to a coarse grid so coincident points and exact-r pairs occur
        let snapped: Vec<f64> = coords.iter().map(|c| (c * 4.0).round() / 4.0).collect();
        let n = snapped.len() / 2;
        let pts = PointSet::from_coords(2, snapped[..2 * n].to_vec(), 6.0, 1.0, 0);
        let mut got = GeoGraph::build(pts.clone(), r).edges().to_vec();
        got.sort_unstable();
        let mut want = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d2: f64 = pts.point(i).iter().zip(pts.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 > 0.0 && d2 < r * r {
                    want.push((i as u32, j as u32));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn point_set_bytes_round_trip(coords in prop::collection::vec(-1e6f64..1e6, 0..90), seed: u64) {
        let n = coords.len() / 3;
        let pts = PointSet::from_coords(3, coords[..3 * n].to_vec(), 12.5, 0.7, seed);
        prop_assert_eq!(from_bytes::<PointSet>(&to_bytes(&pts)).unwrap(), pts);
    }

    #[test]
    fn wilson_interval_contains_the_estimate(trials in 1usize..500, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64).round() as usize;
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        let p = successes as f64 / trials as f64;
        prop_assert!(lo <= p && p <= hi);
    }
}

#[test]
fn normal_quantile_constant() {
    let q = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.975);
    assert!((q - Z95).abs() < 1e-9, "{q}");
}

#[test]
fn summary_matches_reference_statistics() {
    let xs: Vec<f64> = (0..97).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
    let s = Summary::of(&xs);
    assert!((s.mean - xs.iter().mean()).abs() < 1e-12);
    assert!((s.variance - xs.iter().variance()).abs() < 1e-12);
}

#[test]
fn weight_quantiles_invert_reference_cdfs() {
    let exp = Exp::new(2.5).unwrap();
    let uni = Uniform::new(0.5, 3.0).unwrap();
    for i in 1..1000 {
        let u = i as f64 / 1000.0;
        let e = WeightDistribution::Exponential { rate: 2.5 }.quantile(u);
        assert!((exp.cdf(e) - u).abs() < 1e-12);
        let v = WeightDistribution::Uniform { low: 0.5, high: 3.0 }.quantile(u);
        assert!((uni.cdf(v) - u).abs() < 1e-12);
    }
}

#[test]
fn poisson_counts_have_poisson_moments() {
    // volume 100: count mean and variance both 100
    let cfg = SimConfig::new(2, 4.0, 1.0, 5.0, 8);
    let counts: Vec<f64> = (0..2000u64).map(|k| sample_ppp_replica(&cfg, k).unwrap().len() as f64).collect();
    let s = Summary::of(&counts);
    assert!((s.mean - 100.0).abs() < 4.0 * s.std_error(), "mean {}", s.mean);
    // variance of the sample variance is about 2 sigma^4 / n
    assert!((s.variance - 100.0).abs() < 4.0 * (2.0 * 100.0f64.powi(2) / 2000.0).sqrt(), "variance {}", s.variance);
}
