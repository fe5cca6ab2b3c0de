//! Two-species Richardson/voter competition on the giant component.
//!
//! An empty site turns red at rate (#red neighbours) and blue at rate
//! (#blue neighbours); a red site turns blue at rate (#blue neighbours) and a
//! blue site turns red at rate (#red neighbours). All rates are integers, so
//! the engine keeps them in a partial-sum tree of `u64` and samples events
//! exactly with one integer draw.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GeoGraph;
use crate::sampling::{sample_ppp_replica, stream_rng, SimConfig};
use crate::stats::{wilson_interval, Z95};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Events between full rate audits.
pub const AUDIT_INTERVAL: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Empty,
    Red,
    Blue,
}

impl Occupancy {
    pub fn code(self) -> u8 {
        match self {
            Self::Empty => 0,
            Self::Red => 1,
            Self::Blue => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    RedWins,
    BlueWins,
    /// Overlap vertices in increasing index order alternate red, blue, red, ...
    AlternateByIndex,
}

/// Partial sums over a power-of-two leaf array.
#[derive(Clone, Debug)]
struct RateTree {
    leaves: usize,
    nodes: Vec<u64>,
}

impl RateTree {
    fn new(n: usize) -> Self {
        let leaves = n.next_power_of_two().max(1);
        Self { leaves, nodes: vec![0; 2 * leaves] }
    }

    fn set(&mut self, i: usize, value: u64) {
        let mut k = self.leaves + i;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn get(&self, i: usize) -> u64 {
        self.nodes[self.leaves + i]
    }

    fn total(&self) -> u64 {
        self.nodes[1]
    }

    /// Leaf whose cumulative range contains `u < total`, and the offset inside it.
    fn find(&self, mut u: u64) -> (usize, u64) {
        let mut k = 1;
        while k < self.leaves {
            if u < self.nodes[2 * k] {
                k *= 2;
            } else {
                u -= self.nodes[2 * k];
                k = 2 * k + 1;
            }
        }
        (k - self.leaves, u)
    }
}

#[derive(Clone, Debug)]
pub struct CompetitionState {
    graph: Arc<GeoGraph>,
    occupancy: Vec<Occupancy>,
    pub clock: f64,
    pub event_count: u64,
    red_nbrs: Vec<u32>,
    blue_nbrs: Vec<u32>,
    rates: RateTree,
    red: usize,
    blue: usize,
}

/// One transition of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub from: Occupancy,
    pub to: Occupancy,
}

fn site_rate(occ: Occupancy, red: u32, blue: u32) -> u64 {
    match occ {
        Occupancy::Empty => u64::from(red) + u64::from(blue),
        Occupancy::Red => u64::from(blue),
        Occupancy::Blue => u64::from(red),
    }
}

/// `ξ(0) = W`, `ζ(0) = W'` (vertex lists), with the overlap resolved by `tie`.
pub fn init_state(graph: Arc<GeoGraph>, w: &[usize], w_prime: &[usize], tie: TieRule) -> Result<CompetitionState> {
    if graph.components().giant_size() == 0 {
        return Err(Error::EmptyTargetSet);
    }
    let n = graph.vertex_count();
    let mut occupancy = vec![Occupancy::Empty; n];
    let mut in_red = vec![false; n];
    for &v in w {
        in_red[v] = true;
        occupancy[v] = Occupancy::Red;
    }
    let mut overlap: Vec<usize> = Vec::new();
    for &v in w_prime {
        if in_red[v] {
            overlap.push(v);
        } else {
            occupancy[v] = Occupancy::Blue;
        }
    }
    overlap.sort_unstable();
    overlap.dedup();
    for (k, &v) in overlap.iter().enumerate() {
        occupancy[v] = match tie {
            TieRule::RedWins => Occupancy::Red,
            TieRule::BlueWins => Occupancy::Blue,
            TieRule::AlternateByIndex => {
                if k % 2 == 0 {
                    Occupancy::Red
                } else {
                    Occupancy::Blue
                }
            }
        };
    }
    Ok(CompetitionState::from_occupancy(graph, occupancy))
}

impl CompetitionState {
    /// State at clock zero with the given occupancy; caches are computed from scratch.
    pub fn from_occupancy(graph: Arc<GeoGraph>, occupancy: Vec<Occupancy>) -> Self {
        let n = graph.vertex_count();
        assert_eq!(occupancy.len(), n);
        let (red_nbrs, blue_nbrs) = count_neighbours(&graph, &occupancy);
        let mut rates = RateTree::new(n);
        for v in 0..n {
            rates.set(v, site_rate(occupancy[v], red_nbrs[v], blue_nbrs[v]));
        }
        let red = occupancy.iter().filter(|&&o| o == Occupancy::Red).count();
        let blue = occupancy.iter().filter(|&&o| o == Occupancy::Blue).count();
        Self { graph, occupancy, clock: 0.0, event_count: 0, red_nbrs, blue_nbrs, rates, red, blue }
    }

    pub fn graph(&self) -> &GeoGraph {
        &self.graph
    }

    pub fn occupancy(&self) -> &[Occupancy] {
        &self.occupancy
    }

    pub fn red_count(&self) -> usize {
        self.red
    }

    pub fn blue_count(&self) -> usize {
        self.blue
    }

    pub fn occupied_count(&self) -> usize {
        self.red + self.blue
    }

    pub fn total_rate(&self) -> u64 {
        self.rates.total()
    }

    /// Cached `(red-neighbour count, blue-neighbour count)` of `v`.
    pub fn cached_counts(&self, v: usize) -> (u32, u32) {
        (self.red_nbrs[v], self.blue_nbrs[v])
    }

    /// Recomputes every count and rate from scratch and compares with the caches.
    pub fn audit(&self) -> bool {
        let (red, blue) = count_neighbours(&self.graph, &self.occupancy);
        red == self.red_nbrs
            && blue == self.blue_nbrs
            && (0..self.occupancy.len()).all(|v| self.rates.get(v) == site_rate(self.occupancy[v], red[v], blue[v]))
    }

    fn recolor(&mut self, v: usize, to: Occupancy) {
        let from = self.occupancy[v];
        self.occupancy[v] = to;
        match from {
            Occupancy::Red => self.red -= 1,
            Occupancy::Blue => self.blue -= 1,
            Occupancy::Empty => {}
        }
        match to {
            Occupancy::Red => self.red += 1,
            Occupancy::Blue => self.blue += 1,
            Occupancy::Empty => unreachable!("sites never empty"),
        }
        let graph = Arc::clone(&self.graph);
        for &w in graph.neighbors(v) {
            let w = w as usize;
            match from {
                Occupancy::Red => self.red_nbrs[w] -= 1,
                Occupancy::Blue => self.blue_nbrs[w] -= 1,
                Occupancy::Empty => {}
            }
            match to {
                Occupancy::Red => self.red_nbrs[w] += 1,
                Occupancy::Blue => self.blue_nbrs[w] += 1,
                Occupancy::Empty => {}
            }
            self.rates.set(w, site_rate(self.occupancy[w], self.red_nbrs[w], self.blue_nbrs[w]));
        }
        self.rates.set(v, site_rate(to, self.red_nbrs[v], self.blue_nbrs[v]));
    }

    /// Advances to the next event if it happens no later than `horizon`;
    /// otherwise moves the clock to `horizon` and returns `None`.
    pub fn step<R: Rng>(&mut self, horizon: f64, rng: &mut R) -> Option<Event> {
        let total = self.rates.total();
        if total == 0 {
            self.clock = self.clock.max(horizon);
            return None;
        }
        let wait: f64 = Exp1.sample(rng);
        let time = self.clock + wait / total as f64;
        if time > horizon {
            self.clock = horizon;
            return None;
        }
        let (v, offset) = self.rates.find(rng.random_range(0..total));
        let from = self.occupancy[v];
        let to = match from {
            Occupancy::Empty => {
                if offset < u64::from(self.red_nbrs[v]) {
                    Occupancy::Red
                } else {
                    Occupancy::Blue
                }
            }
            Occupancy::Red => Occupancy::Blue,
            Occupancy::Blue => Occupancy::Red,
        };
        self.clock = time;
        self.event_count += 1;
        self.recolor(v, to);
        Some(Event { time, vertex: v, from, to })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { time: self.clock, occupancy: self.occupancy.clone() }
    }
}

fn count_neighbours(graph: &GeoGraph, occupancy: &[Occupancy]) -> (Vec<u32>, Vec<u32>) {
    let n = graph.vertex_count();
    let mut red = vec![0u32; n];
    let mut blue = vec![0u32; n];
    for v in 0..n {
        for &w in graph.neighbors(v) {
            match occupancy[w as usize] {
                Occupancy::Red => red[v] += 1,
                Occupancy::Blue => blue[v] += 1,
                Occupancy::Empty => {}
            }
        }
    }
    (red, blue)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub occupancy: Vec<Occupancy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    /// One snapshot per checkpoint reached, then the final state.
    pub snapshots: Vec<Snapshot>,
    /// The event cap stopped the run before the horizon; the trajectory is partial.
    pub cap_reached: bool,
    pub audits: u64,
    pub audit_mismatches: u64,
}

/// Runs the chain until `horizon` or `max_events` further events, recording
/// the state at each checkpoint time (increasing) and auditing the rate
/// caches every `AUDIT_INTERVAL` events.
pub fn run_competition(state: &mut CompetitionState, horizon: f64, max_events: u64, seed: u64, checkpoints: &[f64]) -> RunOutcome {
    let mut rng = stream_rng(seed, "competition-run", 0);
    run_with_rng(state, horizon, max_events, &mut rng, checkpoints)
}

pub fn run_with_rng(state: &mut CompetitionState, horizon: f64, max_events: u64, rng: &mut ChaCha8Rng, checkpoints: &[f64]) -> RunOutcome {
    let mut snapshots = Vec::new();
    let (mut audits, mut mismatches) = (0, 0);
    let mut events = 0u64;
    let mut cap_reached = false;
    let start = state.clock;
    let mut next_checkpoint = checkpoints.iter().copied().filter(|&c| c >= start && c <= horizon).peekable();
    loop {
        let stop = next_checkpoint.peek().copied().unwrap_or(horizon);
        if events >= max_events {
            cap_reached = true;
            break;
        }
        match state.step(stop, rng) {
            Some(_) => {
                events += 1;
                if state.event_count % AUDIT_INTERVAL == 0 {
                    audits += 1;
                    if !state.audit() {
                        mismatches += 1;
                    }
                }
            }
            None => {
                if next_checkpoint.next().is_some() {
                    snapshots.push(state.snapshot());
                } else {
                    break;
                }
            }
        }
    }
    snapshots.push(state.snapshot());
    RunOutcome { snapshots, cap_reached, audits, audit_mismatches: mismatches }
}

/// Snapshot rows `time,vertex,occupancy` for occupied vertices (1 = red, 2 = blue).
pub fn write_snapshots_csv<W: Write>(out: &mut W, snapshots: &[Snapshot], header_note: &str) -> std::io::Result<()> {
    writeln!(out, "# time,vertex,occupancy{header_note}")?;
    for s in snapshots {
        for (v, o) in s.occupancy.iter().enumerate() {
            if *o != Occupancy::Empty {
                writeln!(out, "{},{},{}", s.time, v, o.code())?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- geometry

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < self.radius * self.radius
    }
}

/// `q(W)` for a union of balls: giant vertices inside `W` plus the nearest
/// giant vertex of every point of a lattice of spacing `spacing` covering `W`.
/// Voronoi cells thinner than the spacing can be missed.
pub fn project_region(graph: &GeoGraph, balls: &[Ball], spacing: f64) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = graph.giant_vertices().map(|v| v as usize).filter(|&v| balls.iter().any(|b| b.contains(graph.points().point(v)))).collect();
    for b in balls {
        let d = b.center.len();
        let k = (b.radius / spacing).ceil() as i64;
        let side = (2 * k + 1) as usize;
        let mut idx = vec![0usize; d];
        for _ in 0..side.pow(d as u32) {
            let p: Vec<f64> = b.center.iter().zip(&idx).map(|(c, &i)| c + (i as i64 - k) as f64 * spacing).collect();
            if b.contains(&p) {
                out.push(graph.nearest_vertex(&p, true)?);
            }
            for a in 0..d {
                idx[a] += 1;
                if idx[a] < side {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Angle between `p` and `z` by clamped arccos; zero at the origin.
pub fn angle(p: &[f64], z: &[f64]) -> f64 {
    crate::fpp::geodesics::angle_between(p, z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionKind {
    /// `Cone(z, s) = {y : θ(z, y) <= s}`.
    Cone(f64),
    /// `B(o, outer) \ B(o, inner)` with open balls.
    Annulus(f64, f64),
    /// `φ · A(o, t_n/(1+d), t_n - t_n^b) ∩ Cone(z, r_n)`.
    Phi { n: usize, phi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub a: f64,
    pub b: f64,
    /// Growth factor `𝔡` of the time sequence.
    pub growth: f64,
    pub t0: f64,
}

impl ScheduleParams {
    /// `s̄ = (2(1+𝔡)/𝔡)^(1/(1-a))`.
    pub fn s_bar(&self) -> f64 {
        (2.0 * (1.0 + self.growth) / self.growth).powf(1.0 / (1.0 - self.a))
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.75 && x < 1.0;
        if !open(self.a) || !open(self.b) {
            return Err(Error::InvalidSchedule(format!("a = {}, b = {} must lie in (3/4, 1)", self.a, self.b)));
        }
        if self.b >= 2.0 * self.a - 1.0 {
            return Err(Error::InvalidSchedule(format!("need b < 2a - 1, got b = {}, 2a - 1 = {}", self.b, 2.0 * self.a - 1.0)));
        }
        if !(self.growth > 0.0 && self.growth < 1.0) {
            return Err(Error::InvalidSchedule(format!("growth {} must lie in (0, 1)", self.growth)));
        }
        if !(self.t0 > self.s_bar()) {
            return Err(Error::InvalidSchedule(format!("t0 = {} must exceed s_bar = {}", self.t0, self.s_bar())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub params: ScheduleParams,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
}

/// `t_n = t0 (1+𝔡)^n` and `r_n = (1 + (1+𝔡)^((a-1)n)) / (1 - (1+𝔡)^(a-1)) · t0^(a-1)`.
pub fn compute_schedule(params: ScheduleParams, n_max: usize) -> Result<Schedule> {
    params.validate()?;
    let q = (1.0 + params.growth).powf(params.a - 1.0);
    let scale = params.t0.powf(params.a - 1.0) / (1.0 - q);
    let t = (0..=n_max).map(|n| params.t0 * (1.0 + params.growth).powi(n as i32)).collect();
    let r = (0..=n_max).map(|n| (1.0 + q.powi(n as i32)) * scale).collect();
    Ok(Schedule { params, t, r })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleCheck {
    /// `max_n |(r_n - r_{n+1}) - t_n^(a-1)| / r_n`.
    pub recurrence_error: f64,
    /// `max_n |t_{n+1} - t_n - 𝔡 t_n| / t_{n+1}`.
    pub growth_error: f64,
    /// `|r_inf - r_0/2| / r_0` with `r_inf = t0^(a-1) / (1 - (1+𝔡)^(a-1))`.
    pub limit_error: f64,
    /// `|r_n - r_0/2|` strictly decreasing and `r_n > r_0/2` throughout.
    pub gap_decreasing: bool,
}

impl Schedule {
    /// Residuals of the defining recurrences, each relative to the magnitude
    /// of the terms being differenced.
    pub fn check(&self) -> ScheduleCheck {
        let p = self.params;
        let n = self.r.len();
        let mut recurrence_error: f64 = 0.0;
        let mut growth_error: f64 = 0.0;
        for k in 0..n - 1 {
            let lhs = self.r[k] - self.r[k + 1];
            let rhs = self.t[k].powf(p.a - 1.0);
            recurrence_error = recurrence_error.max((lhs - rhs).abs() / self.r[k]);
            growth_error = growth_error.max((self.t[k + 1] - self.t[k] - p.growth * self.t[k]).abs() / self.t[k + 1]);
        }
        let q = (1.0 + p.growth).powf(p.a - 1.0);
        let r_inf = p.t0.powf(p.a - 1.0) / (1.0 - q);
        let half = self.r[0] / 2.0;
        let limit_error = (r_inf - half).abs() / self.r[0];
        let gaps: Vec<f64> = self.r.iter().map(|r| r - half).collect();
        let gap_decreasing = gaps.iter().all(|&g| g > 0.0) && gaps.windows(2).all(|w| w[1] < w[0]);
        ScheduleCheck { recurrence_error, growth_error, limit_error, gap_decreasing }
    }

    /// Radii `(inner, outer)` and half-angle of `Φ_n` for shape scale `phi`.
    pub fn phi_region(&self, n: usize, phi: f64) -> (f64, f64, f64) {
        let t = self.t[n];
        (phi * t / (1.0 + self.params.growth), phi * (t - t.powf(self.params.b)), self.r[n])
    }
}

/// Whether `point` lies in the region of kind `kind` with apex direction `z`.
/// `Φ_n` needs the schedule.
pub fn region_membership(point: &[f64], z: &[f64], kind: RegionKind, schedule: Option<&Schedule>) -> Result<bool> {
    if z.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidConfig("apex direction must be nonzero".into()));
    }
    let norm = point.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(match kind {
        RegionKind::Cone(s) => angle(point, z) <= s,
        RegionKind::Annulus(inner, outer) => norm >= inner && norm < outer,
        RegionKind::Phi { n, phi } => {
            let sched = schedule.ok_or_else(|| Error::InvalidConfig("Φ_n needs a schedule".into()))?;
            if n >= sched.t.len() {
                return Err(Error::InvalidConfig(format!("schedule has no index {n}")));
            }
            let (inner, outer, half_angle) = sched.phi_region(n, phi);
            norm >= inner && norm < outer && angle(point, z) <= half_angle
        }
    })
}

// ------------------------------------------------------------- estimation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceParams {
    pub w: Vec<Ball>,
    pub w_prime: Vec<Ball>,
    pub horizon: f64,
    pub replicas: usize,
    #[serde(default)]
    pub tie_rule: TieRule,
    pub max_events: u64,
    /// Probe spacing used to project `W` and `W'` onto the giant component.
    pub projection_spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceReport {
    pub schema_version: u32,
    pub replicas: usize,
    pub coexisting: usize,
    pub red_dead: usize,
    pub blue_dead: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub red_dead_ci: (f64, f64),
    pub blue_dead_ci: (f64, f64),
    pub capped_runs: usize,
    pub audits: u64,
    pub audit_mismatches: u64,
}

impl CoexistenceReport {
    /// Key/value summary text.
    pub fn summary_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Final state of one replica of the competition started from `W`, `W'`.
pub fn competition_replica(config: &SimConfig, params: &CoexistenceParams, replica: u64) -> Result<(CompetitionState, RunOutcome)> {
    let graph = Arc::new(GeoGraph::build(sample_ppp_replica(config, replica)?, config.radius));
    let w = project_region(&graph, &params.w, params.projection_spacing)?;
    let wp = project_region(&graph, &params.w_prime, params.projection_spacing)?;
    let mut state = init_state(graph, &w, &wp, params.tie_rule)?;
    let mut rng = stream_rng(config.master_seed, "competition", replica);
    let outcome = run_with_rng(&mut state, params.horizon, params.max_events, &mut rng, &[]);
    Ok((state, outcome))
}

/// Fraction of replicas with both species alive at the horizon, with a 95% Wilson interval.
pub fn estimate_coexistence(config: &SimConfig, params: &CoexistenceParams) -> Result<CoexistenceReport> {
    if params.replicas < 100 {
        return Err(Error::InvalidConfig(format!("coexistence needs >= 100 replicas, got {}", params.replicas)));
    }
    let finals: Vec<(bool, bool, bool, u64, u64)> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let (state, out) = competition_replica(config, params, k)?;
            Ok((state.red_count() > 0, state.blue_count() > 0, out.cap_reached, out.audits, out.audit_mismatches))
        })
        .collect::<Result<_>>()?;
    let n = params.replicas;
    let coexisting = finals.iter().filter(|f| f.0 && f.1).count();
    let red_dead = finals.iter().filter(|f| !f.0).count();
    let blue_dead = finals.iter().filter(|f| !f.1).count();
    let (ci_low, ci_high) = wilson_interval(coexisting, n, Z95);
    Ok(CoexistenceReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        replicas: n,
        coexisting,
        red_dead,
        blue_dead,
        estimate: coexisting as f64 / n as f64,
        ci_low,
        ci_high,
        red_dead_ci: wilson_interval(red_dead, n, Z95),
        blue_dead_ci: wilson_interval(blue_dead, n, Z95),
        capped_runs: finals.iter().filter(|f| f.2).count(),
        audits: finals.iter().map(|f| f.3).sum(),
        audit_mismatches: finals.iter().map(|f| f.4).sum(),
    })
}

/// `|χ(horizon)|` from direct runs, and from runs stopped at `midpoint` and
/// restarted from that snapshot with a fresh stream. Both samples use
/// replica `k`'s graph; the two families of runs use disjoint streams.
pub fn restart_comparison(config: &SimConfig, params: &CoexistenceParams, midpoint: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let graph = Arc::new(GeoGraph::build(sample_ppp_replica(config, k)?, config.radius));
            let w = project_region(&graph, &params.w, params.projection_spacing)?;
            let wp = project_region(&graph, &params.w_prime, params.projection_spacing)?;
            let start = init_state(graph, &w, &wp, params.tie_rule)?;

            let mut direct = start.clone();
            let mut rng = stream_rng(config.master_seed, "restart-direct", k);
            run_with_rng(&mut direct, params.horizon, params.max_events, &mut rng, &[]);

            let mut staged = start;
            let mut rng = stream_rng(config.master_seed, "restart-first", k);
            run_with_rng(&mut staged, midpoint, params.max_events, &mut rng, &[]);
            let mut resumed = staged.clone();
            let mut rng = stream_rng(config.master_seed, "restart-second", k);
            run_with_rng(&mut resumed, params.horizon, params.max_events, &mut rng, &[]);
            Ok((direct.occupied_count() as f64, resumed.occupied_count() as f64))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Vertices within `radius` hops of `center`.
pub fn hop_ball(graph: &GeoGraph, center: usize, radius: u32) -> Vec<usize> {
    let hops = graph.hop_distances(center);
    (0..graph.vertex_count()).filter(|&v| hops[v] <= radius).collect()
}

/// Frequency with which the centre of an all-red hop ball of radius
/// `floor(rho^b)` turns blue by time `rho`, every other giant vertex blue.
pub fn invasion_frequency(config: &SimConfig, rho: f64, b: f64, replicas: usize, max_events: u64) -> Result<f64> {
    let hits: Vec<bool> = (0..replicas as u64)
        .into_par_iter()
        .map(|k| {
            let graph = Arc::new(GeoGraph::build(sample_ppp_replica(config, k)?, config.radius));
            let center = graph.nearest_vertex(&vec![0.0; graph.dim()], true)?;
            let ball = hop_ball(&graph, center, rho.powf(b).floor() as u32);
            let mut occupancy: Vec<Occupancy> =
                (0..graph.vertex_count()).map(|v| if graph.in_giant(v) { Occupancy::Blue } else { Occupancy::Empty }).collect();
            for v in ball {
                occupancy[v] = Occupancy::Red;
            }
            let mut state = CompetitionState::from_occupancy(graph, occupancy);
            let mut rng = stream_rng(config.master_seed, "invasion", k);
            let mut events = 0;
            while events < max_events {
                match state.step(rho, &mut rng) {
                    Some(e) => {
                        events += 1;
                        if e.vertex == center {
                            return Ok(true);
                        }
                    }
                    None => return Ok(false),
                }
            }
            Err(Error::InvalidConfig(format!("event cap {max_events} reached before time {rho}")))
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / replicas as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, PointSet};

    fn star(k: usize) -> Arc<GeoGraph> {
        let mut pts = vec![vec![0.0, 0.0]];
        for i in 0..k {
            let a = i as f64 * std::f64::consts::TAU / k as f64;
            pts.push(vec![a.cos(), a.sin()]);
        }
        let ps = PointSet::from_points(2, &pts, 4.0, 1.0);
        let edges = (1..=k as u32).map(|i| (0, i)).collect();
        Arc::new(GeoGraph::from_parts(ps, 1.5, edges, None))
    }

    fn rgg(side: f64, seed: u64) -> Arc<GeoGraph> {
        let cfg = SimConfig::new(2, 1.0, 2.0, side, seed);
        Arc::new(GeoGraph::build(sample_ppp(&cfg).unwrap(), 2.0))
    }

    #[test]
    fn rate_tree_find() {
        let mut t = RateTree::new(5);
        for (i, v) in [3u64, 0, 2, 5, 1].iter().enumerate() {
            t.set(i, *v);
        }
        assert_eq!(t.total(), 11);
        assert_eq!(t.find(0), (0, 0));
        assert_eq!(t.find(2), (0, 2));
        assert_eq!(t.find(3), (2, 0));
        assert_eq!(t.find(5), (3, 0));
        assert_eq!(t.find(10), (4, 0));
    }

    #[test]
    fn star_first_event_law() {
        let k = 4;
        let g = star(k);
        let delta = 0.2;
        let trials = 10_000;
        let mut hits = 0;
        let mut rng = stream_rng(1, "star", 0);
        for _ in 0..trials {
            let leaves: Vec<usize> = (1..=k).collect();
            let mut s = init_state(g.clone(), &leaves, &[], TieRule::RedWins).unwrap();
            if s.step(delta, &mut rng).is_some() {
                hits += 1;
            }
        }
        let p = 1.0 - (-(k as f64) * delta).exp();
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 3.0 * sd);
    }

    #[test]
    fn pure_growth_without_blue() {
        let g = rgg(30.0, 2);
        let w = project_region(&g, &[Ball { center: vec![0.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let mut s = init_state(g, &w, &[], TieRule::RedWins).unwrap();
        let mut rng = stream_rng(2, "growth", 0);
        let mut prev = s.occupied_count();
        while let Some(e) = s.step(1.5, &mut rng) {
            assert_eq!(e.from, Occupancy::Empty);
            assert_eq!(e.to, Occupancy::Red);
            assert!(s.occupied_count() > prev);
            prev = s.occupied_count();
        }
        assert_eq!(s.blue_count(), 0);
        assert!(s.audit());
    }

    #[test]
    fn empty_w_means_red_extinct() {
        let g = rgg(20.0, 3);
        let wp = project_region(&g, &[Ball { center: vec![0.0, 0.0], radius: 2.0 }], 0.25).unwrap();
        let s = init_state(g, &[], &wp, TieRule::RedWins).unwrap();
        assert_eq!(s.red_count(), 0);
        assert!(s.blue_count() > 0);
    }

    #[test]
    fn tie_rules() {
        let g = rgg(20.0, 4);
        let w = project_region(&g, &[Ball { center: vec![0.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let wp = project_region(&g, &[Ball { center: vec![1.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let overlap: Vec<usize> = w.iter().copied().filter(|v| wp.contains(v)).collect();
        assert!(overlap.len() >= 2);
        let red = init_state(g.clone(), &w, &wp, TieRule::RedWins).unwrap();
        let blue = init_state(g.clone(), &w, &wp, TieRule::BlueWins).unwrap();
        let alt = init_state(g, &w, &wp, TieRule::AlternateByIndex).unwrap();
        for (k, &v) in overlap.iter().enumerate() {
            assert_eq!(red.occupancy()[v], Occupancy::Red);
            assert_eq!(blue.occupancy()[v], Occupancy::Blue);
            assert_eq!(alt.occupancy()[v], if k % 2 == 0 { Occupancy::Red } else { Occupancy::Blue });
        }
    }

    #[test]
    fn far_apart_sets_are_disjoint() {
        let g = rgg(40.0, 5);
        let w = project_region(&g, &[Ball { center: vec![-10.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let wp = project_region(&g, &[Ball { center: vec![10.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let s = init_state(g, &w, &wp, TieRule::RedWins).unwrap();
        assert_eq!(s.red_count(), w.len());
        assert_eq!(s.blue_count(), wp.len());
    }

    #[test]
    fn run_keeps_caches_exact_and_sites_occupied() {
        let g = rgg(30.0, 6);
        let w = project_region(&g, &[Ball { center: vec![-5.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let wp = project_region(&g, &[Ball { center: vec![5.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let mut s = init_state(g, &w, &wp, TieRule::RedWins).unwrap();
        let out = run_competition(&mut s, 20.0, 60_000, 6, &[0.5, 1.0, 2.0]);
        assert!(out.audits >= 1);
        assert_eq!(out.audit_mismatches, 0);
        assert_eq!(out.snapshots.len(), 4);
        for pair in out.snapshots.windows(2) {
            assert!(pair[0].time <= pair[1].time);
            for (a, b) in pair[0].occupancy.iter().zip(&pair[1].occupancy) {
                assert!(*a == Occupancy::Empty || *b != Occupancy::Empty);
            }
        }
        assert!(s.audit());
    }

    #[test]
    fn event_cap_flags_partial_run() {
        let g = rgg(30.0, 7);
        let w = project_region(&g, &[Ball { center: vec![0.0, 0.0], radius: 3.0 }], 0.25).unwrap();
        let mut s = init_state(g, &w, &[], TieRule::RedWins).unwrap();
        let out = run_competition(&mut s, 100.0, 10, 7, &[]);
        assert!(out.cap_reached);
        assert_eq!(s.event_count, 10);
    }

    #[test]
    fn schedule_recurrences() {
        let p = ScheduleParams { a: 0.95, b: 0.85, growth: 0.5, t0: 0.0 };
        let p = ScheduleParams { t0: p.s_bar() * 1.01, ..p };
        let s = compute_schedule(p, 200).unwrap();
        let c = s.check();
        assert!(c.recurrence_error <= 1e-12 && c.growth_error <= 1e-12 && c.limit_error <= 1e-12);
        assert!(c.gap_decreasing);
        for n in [0, 7, 50] {
            assert_eq!(s.t[n], p.t0 * 1.5f64.powi(n as i32));
        }
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        let ok = ScheduleParams { a: 0.95, b: 0.85, growth: 0.5, t0: 1e30 };
        assert!(compute_schedule(ok, 3).is_ok());
        assert!(matches!(compute_schedule(ScheduleParams { b: 0.9, ..ok }, 3), Err(Error::InvalidSchedule(_))));
        assert!(matches!(compute_schedule(ScheduleParams { t0: 1.0, ..ok }, 3), Err(Error::InvalidSchedule(_))));
        assert!(matches!(compute_schedule(ScheduleParams { a: 0.7, ..ok }, 3), Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn cone_and_annulus_examples() {
        let z = [0.6, 0.8];
        assert!(region_membership(&[1.2, 1.6], &z, RegionKind::Cone(0.01), None).unwrap());
        assert!(region_membership(&[3.0, 4.0], &z, RegionKind::Cone(0.0), None).unwrap());
        assert!(!region_membership(&[-0.8, 0.6], &z, RegionKind::Cone(std::f64::consts::FRAC_PI_4), None).unwrap());
        assert!(region_membership(&[1.0, 0.0], &z, RegionKind::Annulus(1.0, 2.0), None).unwrap());
        assert!(!region_membership(&[2.0, 0.0], &z, RegionKind::Annulus(1.0, 2.0), None).unwrap());
        assert!(region_membership(&[1.0, 0.0], &[0.0, 0.0], RegionKind::Cone(1.0), None).is_err());
    }

    #[test]
    fn summary_has_schema_version() {
        let r = CoexistenceReport {
            schema_version: SUMMARY_SCHEMA_VERSION,
            replicas: 100,
            coexisting: 90,
            red_dead: 5,
            blue_dead: 5,
            estimate: 0.9,
            ci_low: 0.8,
            ci_high: 0.95,
            red_dead_ci: (0.0, 0.1),
            blue_dead_ci: (0.0, 0.1),
            capped_runs: 0,
            audits: 3,
            audit_mismatches: 0,
        };
        let text = r.summary_text();
        assert!(text.contains("schema_version = 1"));
        let back: CoexistenceReport = toml::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
