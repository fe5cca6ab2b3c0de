//! Configuration-driven experiment runner.
//!
//! A run is described by one TOML file; see the README for the grammar.
//! Every CSV table starts with a single comment line naming the columns and
//! the SHA-256 of the canonical spec (the spec with `output` cleared), so a
//! table can always be traced back to the spec that produced it.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augmented::{build_augmented, hop_limited_passage, AugmentConfig, CouplingParams};
use crate::competition::{self, Ball, CoexistenceParams, TieRule};
use crate::error::{Error, Result};
use crate::fpp::estimators::{self, DeviationParams, FluctuationParams, TimeConstantParams};
use crate::fpp::{dijkstra, PassageField, WeightDistribution};
use crate::graph::{estimate_structure, GeoGraph, StructureParams};
use crate::heisenberg::{self, CayleyWeights, HeisenbergElement};
use crate::sampling::{sample_ppp_replica, stream_rng, PointSet, SimConfig};

pub const TOOL_NAME: &str = "shapelab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const KINDS: [&str; 10] =
    ["sample", "build", "fpp-shape", "time-constant", "geodesics", "straightness", "deviations", "coupling", "compete", "cayley"];

/// Geometry of the Poisson sample; the seed lives at the top level of the spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub dimension: usize,
    pub intensity: f64,
    pub radius: f64,
    pub box_side: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Sample,
    Build {
        #[serde(default)]
        structure: bool,
    },
    FppShape {
        times: Vec<f64>,
        probe_spacing: f64,
        window_fraction: f64,
    },
    TimeConstant {
        scales: Vec<f64>,
        inner_window_fraction: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    Geodesics {
        scales: Vec<f64>,
        sources: usize,
        targets_per_source: usize,
        exponent: f64,
        inner_window_fraction: f64,
    },
    Straightness {
        epsilon: f64,
        windows: Vec<f64>,
    },
    Deviations {
        norms: Vec<f64>,
        ell_grid: Vec<f64>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    Coupling {
        x: Vec<f64>,
        t_grid: Vec<f64>,
        #[serde(default)]
        k: Option<f64>,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Compete {
        w: Vec<Ball>,
        w_prime: Vec<Ball>,
        horizon: f64,
        max_events: u64,
        projection_spacing: f64,
        #[serde(default)]
        tie_rule: TieRule,
        /// Times at which replica 0 is snapshotted.
        #[serde(default)]
        checkpoints: Vec<f64>,
    },
    Cayley {
        n_max: u32,
        m_max: u64,
        palette: Vec<f64>,
        element: [i64; 3],
        powers: Vec<u64>,
        ball_radius: u32,
    },
}

fn default_delta() -> f64 {
    0.05
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::Build { .. } => "build",
            Self::FppShape { .. } => "fpp-shape",
            Self::TimeConstant { .. } => "time-constant",
            Self::Geodesics { .. } => "geodesics",
            Self::Straightness { .. } => "straightness",
            Self::Deviations { .. } => "deviations",
            Self::Coupling { .. } => "coupling",
            Self::Compete { .. } => "compete",
            Self::Cayley { .. } => "cayley",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write binary artifacts for each replica's input.
    #[serde(default)]
    pub persist: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GraphConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightDistribution>,
    pub experiment: Experiment,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::SpecInvalid(msg.into())
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Canonical text: the spec without its output location.
    pub fn canonical_toml(&self) -> String {
        Self { output: None, ..self.clone() }.to_toml()
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical_toml().as_bytes()))
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let g = self.config.as_ref().ok_or_else(|| invalid(format!("kind {} needs a [config] table", self.experiment.kind())))?;
        Ok(SimConfig::new(g.dimension, g.intensity, g.radius, g.box_side, self.seed))
    }

    pub fn weight_law(&self) -> Result<WeightDistribution> {
        self.weights.ok_or_else(|| invalid(format!("kind {} needs a [weights] table", self.experiment.kind())))
    }

    /// Completeness and range checks, then theorem hypotheses; nothing is sampled.
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(invalid("replicas must be positive"));
        }
        let spec_err = |e: Error| match e {
            Error::InvalidConfig(m) | Error::InvalidSchedule(m) => invalid(m),
            other => other,
        };
        let positive = |name: &str, xs: &[f64]| {
            if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                Err(invalid(format!("{name} must be a nonempty list of positive numbers")))
            } else {
                Ok(())
            }
        };
        let fraction = |name: &str, f: f64| {
            if f > 0.0 && f <= 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in (0, 1]")))
            }
        };
        let direction = |d: &Option<Vec<f64>>, dim: usize| match d {
            Some(v) if v.len() != dim || v.iter().all(|&c| c == 0.0) => Err(invalid("direction must be a nonzero vector of the sample dimension")),
            _ => Ok(()),
        };
        if let Experiment::Cayley { n_max, m_max, palette, powers, ball_radius, .. } = &self.experiment {
            if *n_max < 2 || *m_max < 1 || powers.is_empty() || *ball_radius == 0 {
                return Err(invalid("cayley needs n_max >= 2, m_max >= 1, nonempty powers and a positive ball_radius"));
            }
            let model = CayleyWeights::RandomColoring { palette: palette.clone() };
            model.validate().map_err(spec_err)?;
            let cond = model.coloring_condition().expect("colouring model");
            if !cond.satisfied {
                return Err(Error::ConditionViolated(format!(
                    "largest colour probability {} is not below {}",
                    cond.max_probability, cond.threshold
                )));
            }
            return Ok(());
        }
        let cfg = self.sim_config()?;
        cfg.validate().map_err(spec_err)?;
        let dim = cfg.dimension;
        let needs_weights = !matches!(self.experiment, Experiment::Sample | Experiment::Build { .. } | Experiment::Compete { .. });
        if !needs_weights {
            if let Experiment::Compete { w, w_prime, horizon, projection_spacing, max_events, .. } = &self.experiment {
                if w.is_empty() || w_prime.is_empty() || w.iter().chain(w_prime).any(|b| b.center.len() != dim || !(b.radius > 0.0)) {
                    return Err(invalid("w and w_prime need balls of positive radius in the sample dimension"));
                }
                if !(*horizon > 0.0) || !(*projection_spacing > 0.0) || *max_events == 0 {
                    return Err(invalid("horizon, projection_spacing and max_events must be positive"));
                }
                if self.replicas < 100 {
                    return Err(invalid("compete needs at least 100 replicas"));
                }
            }
            return Ok(());
        }
        let law = self.weight_law()?;
        law.validate().map_err(spec_err)?;
        let flags = law.conditions(dim, cfg.radius, cfg.intensity);
        match &self.experiment {
            Experiment::FppShape { times, probe_spacing, window_fraction } => {
                positive("times", times)?;
                positive("probe_spacing", &[*probe_spacing])?;
                fraction("window_fraction", *window_fraction)?;
                flags.require_a1()
            }
            Experiment::TimeConstant { scales, inner_window_fraction, direction: d } => {
                positive("scales", scales)?;
                if scales.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("scales must be increasing"));
                }
                fraction("inner_window_fraction", *inner_window_fraction)?;
                direction(d, dim)?;
                flags.require_a1()
            }
            Experiment::Geodesics { scales, sources, targets_per_source, exponent, inner_window_fraction } => {
                positive("scales", scales)?;
                positive("exponent", &[*exponent])?;
                fraction("inner_window_fraction", *inner_window_fraction)?;
                if *sources == 0 || *targets_per_source == 0 {
                    return Err(invalid("sources and targets_per_source must be positive"));
                }
                flags.require_primed()
            }
            Experiment::Straightness { epsilon, windows } => {
                positive("epsilon", &[*epsilon])?;
                positive("windows", windows)?;
                flags.require_primed()
            }
            Experiment::Deviations { norms, ell_grid, direction: d } => {
                positive("norms", norms)?;
                positive("ell_grid", ell_grid)?;
                if norms.iter().any(|&n| n <= 1.0) {
                    return Err(invalid("norms must exceed 1"));
                }
                direction(d, dim)?;
                if self.replicas < 100 {
                    return Err(invalid("deviations need at least 100 replicas"));
                }
                flags.require_primed()
            }
            Experiment::Coupling { x, t_grid, k, delta } => {
                if x.len() != dim {
                    return Err(invalid("x must have the sample dimension"));
                }
                positive("t_grid", t_grid)?;
                let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                if t_grid.iter().any(|&t| t < 1.0 || t > norm) {
                    return Err(invalid("every t must satisfy 1 <= t <= |x|"));
                }
                positive("k", &[k.unwrap_or(1.0)])?;
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(invalid("delta must lie in (0, 1)"));
                }
                if self.replicas < 200 {
                    return Err(invalid("coupling needs at least 200 replicas"));
                }
                flags.require_primed()
            }
            _ => unreachable!("kinds without weights handled above"),
        }
    }

    pub fn resolve_output(&self, root: Option<&Path>) -> PathBuf {
        self.output.clone().unwrap_or_else(|| {
            root.unwrap_or(Path::new("shapelab-out")).join(format!("{}-{}", self.experiment.kind(), &self.hash()[..12]))
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub spec_sha256: String,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
    pub spec: ExperimentSpec,
}

/// A CSV table: one header comment line, then full-precision rows.
struct Table {
    name: String,
    text: String,
}

impl Table {
    fn new(name: &str, columns: &str, hash: &str) -> Self {
        Self { name: name.into(), text: format!("# {columns} spec_sha256={hash}\n") }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }
}

macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

struct Outputs {
    tables: Vec<Table>,
    extra: Vec<(String, Vec<u8>)>,
}

fn fields_for<'a>(cfg: &'a SimConfig, law: WeightDistribution, replicas: usize) -> impl ParallelIterator<Item = Result<PassageField>> + 'a {
    (0..replicas as u64).into_par_iter().map(move |k| estimators::realize(cfg, law, k))
}

fn e1(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

fn execute(spec: &ExperimentSpec) -> Result<Outputs> {
    let h = spec.hash();
    let r = spec.replicas;
    let mut tables = Vec::new();
    let mut extra = Vec::new();
    match &spec.experiment {
        Experiment::Sample => {
            let cfg = spec.sim_config()?;
            let sets: Vec<PointSet> = (0..r as u64).into_par_iter().map(|k| sample_ppp_replica(&cfg, k)).collect::<Result<_>>()?;
            let coords: Vec<String> = (0..cfg.dimension).map(|i| format!("x{i}")).collect();
            let mut points = Table::new("points.csv", &format!("replica,index,{}", coords.join(",")), &h);
            let mut counts = Table::new("counts.csv", "replica,points", &h);
            for (k, s) in sets.iter().enumerate() {
                counts.row(&cells![k, s.len()]);
                for (i, p) in s.iter().enumerate() {
                    let mut row = cells![k, i];
                    row.extend(p.iter().map(f64::to_string));
                    points.row(&row);
                }
                if spec.persist {
                    extra.push((format!("points_{k}.bin"), crate::persist::to_bytes(s)));
                }
            }
            tables.extend([counts, points]);
        }
        Experiment::Build { structure } => {
            let cfg = spec.sim_config()?;
            let graphs: Vec<GeoGraph> = (0..r as u64)
                .into_par_iter()
                .map(|k| Ok(GeoGraph::build(sample_ppp_replica(&cfg, k)?, cfg.radius)))
                .collect::<Result<_>>()?;
            let mut t = Table::new("graph.csv", "replica,vertices,edges,mean_degree,components,giant_size,giant_fraction", &h);
            for (k, g) in graphs.iter().enumerate() {
                let n = g.vertex_count();
                let giant = g.components().giant_size();
                let mean_degree = if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 };
                let fraction = if n == 0 { 0.0 } else { giant as f64 / n as f64 };
                t.row(&cells![k, n, g.edge_count(), mean_degree, g.components().sizes.len(), giant, fraction]);
                if spec.persist {
                    extra.push((format!("graph_{k}.bin"), crate::persist::to_bytes(g)));
                }
            }
            tables.push(t);
            if *structure {
                let p = StructureParams::defaults_for(cfg.radius);
                let reports: Vec<_> = graphs.par_iter().map(|g| estimate_structure(g, &p)).collect::<Result<_>>()?;
                let mut s = Table::new("structure.csv", "replica,theta_hat,stretch_hat,stretch_half_width,hole_diameter", &h);
                for (k, rep) in reports.iter().enumerate() {
                    s.row(&cells![k, rep.theta_hat, rep.stretch_hat, rep.stretch_half_width, rep.hole_diameter]);
                }
                tables.push(s);
            }
        }
        Experiment::FppShape { times, probe_spacing, window_fraction } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let series: Vec<_> = (0..r as u64)
                .into_par_iter()
                .map(|k| estimators::shape_series(&cfg, law, times, *probe_spacing, *window_fraction, k))
                .collect::<Result<_>>()?;
            let mut t = Table::new("shape.csv", "replica,t,reached,rho_in,rho_out,roundness,phi_hat,window_clipped", &h);
            for (k, rows) in series.iter().enumerate() {
                for s in rows {
                    t.row(&cells![k, s.t, s.reached, s.rho_in, s.rho_out, s.roundness, s.phi_hat, s.window_clipped]);
                }
            }
            tables.push(t);
        }
        Experiment::TimeConstant { scales, inner_window_fraction, direction } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let params = TimeConstantParams {
                direction: direction.clone().unwrap_or_else(|| e1(cfg.dimension)),
                scales: scales.clone(),
                replicas: r,
                inner_window_fraction: *inner_window_fraction,
            };
            let rep = estimators::estimate_time_constant(&cfg, law, &params)?;
            let mut t = Table::new("time_constant.csv", "scale,mean,std_error", &h);
            for row in &rep.rows {
                t.row(&cells![row.scale, row.mean, row.std_error]);
            }
            let (lo, hi) = rep.pooled_ci();
            let mut p = Table::new("pooled.csv", "pooled,pooled_se,ci_low,ci_high,stretch_hat,lower_bracket,upper_bracket,window_clipped", &h);
            p.row(&cells![rep.pooled, rep.pooled_se, lo, hi, rep.stretch_hat, rep.lower_bracket, rep.upper_bracket, rep.window_clipped]);
            tables.extend([t, p]);
        }
        Experiment::Geodesics { scales, sources, targets_per_source, exponent, inner_window_fraction } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let params = FluctuationParams {
                scales: scales.clone(),
                sources: *sources,
                targets_per_source: *targets_per_source,
                exponent: *exponent,
                inner_window_fraction: *inner_window_fraction,
            };
            let rows: Vec<_> = (0..r as u64)
                .into_par_iter()
                .map(|k| estimators::geodesic_fluctuations(&cfg, law, &params, k))
                .collect::<Result<_>>()?;
            let mut t = Table::new("fluctuations.csv", "replica,scale,pairs,mean_deviation,exceed_fraction", &h);
            for (k, rs) in rows.iter().enumerate() {
                for row in rs {
                    t.row(&cells![k, row.scale, row.pairs, row.mean_deviation, row.exceed_fraction]);
                }
            }
            tables.push(t);
        }
        Experiment::Straightness { epsilon, windows } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let counts: Vec<_> = (0..r as u64)
                .into_par_iter()
                .map(|k| estimators::straightness_counts(&cfg, law, *epsilon, windows, k))
                .collect::<Result<_>>()?;
            let mut t = Table::new("straightness.csv", "replica,window,violations", &h);
            for (k, cs) in counts.iter().enumerate() {
                for (w, c) in windows.iter().zip(cs) {
                    t.row(&cells![k, w, c]);
                }
            }
            tables.push(t);
        }
        Experiment::Deviations { norms, ell_grid, direction } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let params = DeviationParams {
                norms: norms.clone(),
                direction: direction.clone().unwrap_or_else(|| e1(cfg.dimension)),
                replicas: r,
                ell_grid: ell_grid.clone(),
                first_replica: 0,
            };
            let rows = estimators::deviation_statistics(&cfg, law, &params)?;
            let mut t = Table::new("deviations.csv", "norm,mean,variance,variance_ratio,tail_slope", &h);
            let mut tails = Table::new("deviation_tails.csv", "norm,ell,frequency", &h);
            for row in &rows {
                let slope = estimators::tail_slope(ell_grid, &row.tail).unwrap_or(f64::NAN);
                t.row(&cells![row.norm, row.mean, row.variance, row.variance_ratio(), slope]);
                for (ell, f) in ell_grid.iter().zip(&row.tail) {
                    tails.row(&cells![row.norm, ell, f]);
                }
            }
            tables.extend([t, tails]);
        }
        Experiment::Coupling { x, t_grid, k, delta } => {
            let (cfg, law) = (spec.sim_config()?, spec.weight_law()?);
            let k = k.unwrap_or_else(|| AugmentConfig::with_defaults(cfg.dimension, 1.0).k);
            let params = CouplingParams { x: x.clone(), t_grid: t_grid.clone(), replicas: r, k, delta: *delta, first_replica: 0 };
            let rows = crate::augmented::coupling_frequencies(&cfg, law, &params)?;
            let mut t = Table::new(
                "coupling.csv",
                "t,replicas,y_neq_tt,tt_neq_t,freq_y_neq_tt,freq_tt_neq_t,ci_low,ci_high,y_ci_low,y_ci_high",
                &h,
            );
            for row in &rows {
                t.row(&cells![
                    row.t,
                    row.replicas,
                    row.y_neq_tt,
                    row.tt_neq_t,
                    row.freq_y_neq_tt,
                    row.freq_tt_neq_t,
                    row.ci_low,
                    row.ci_high,
                    row.y_ci_low,
                    row.y_ci_high
                ]);
            }
            tables.push(t);
        }
        Experiment::Compete { w, w_prime, horizon, max_events, projection_spacing, tie_rule, checkpoints } => {
            let cfg = spec.sim_config()?;
            let params = CoexistenceParams {
                w: w.clone(),
                w_prime: w_prime.clone(),
                horizon: *horizon,
                replicas: r,
                tie_rule: *tie_rule,
                max_events: *max_events,
                projection_spacing: *projection_spacing,
            };
            let rep = competition::estimate_coexistence(&cfg, &params)?;
            let mut t = Table::new(
                "coexistence.csv",
                "replicas,coexisting,red_dead,blue_dead,estimate,ci_low,ci_high,capped_runs,audits,audit_mismatches",
                &h,
            );
            t.row(&cells![
                rep.replicas,
                rep.coexisting,
                rep.red_dead,
                rep.blue_dead,
                rep.estimate,
                rep.ci_low,
                rep.ci_high,
                rep.capped_runs,
                rep.audits,
                rep.audit_mismatches
            ]);
            tables.push(t);
            extra.push(("summary.toml".into(), rep.summary_text().into_bytes()));
            if !checkpoints.is_empty() {
                let graph = Arc::new(GeoGraph::build(sample_ppp_replica(&cfg, 0)?, cfg.radius));
                let wv = competition::project_region(&graph, w, *projection_spacing)?;
                let wpv = competition::project_region(&graph, w_prime, *projection_spacing)?;
                let mut state = competition::init_state(graph, &wv, &wpv, *tie_rule)?;
                let mut rng = stream_rng(cfg.master_seed, "competition", 0);
                let out = competition::run_with_rng(&mut state, *horizon, *max_events, &mut rng, checkpoints);
                let mut buf = Vec::new();
                competition::write_snapshots_csv(&mut buf, &out.snapshots, &format!(" spec_sha256={h}"))?;
                tables.push(Table { name: "snapshots.csv".into(), text: String::from_utf8(buf).expect("ascii") });
            }
        }
        Experiment::Cayley { n_max, m_max, palette, element, powers, ball_radius } => {
            let growth = heisenberg::growth_and_central_scaling(*n_max, *m_max)?;
            let mut g = Table::new("growth.csv", "n,ball_size", &h);
            for (n, s) in growth.ball_sizes.iter().enumerate() {
                g.row(&cells![n, s]);
            }
            let mut c = Table::new("central.csv", "m,word_norm,ratio", &h);
            for (m, norm, ratio) in &growth.central {
                c.row(&cells![m, norm, ratio]);
            }
            let mut f = Table::new("growth_fit.csv", "exponent,central_ratio_spread", &h);
            f.row(&cells![growth.exponent, growth.central_ratio_spread()]);
            let model = CayleyWeights::RandomColoring { palette: palette.clone() };
            let el = HeisenbergElement::new(element[0], element[1], element[2]);
            let rows = heisenberg::cocycle_convergence(el, &model, powers, r, *ball_radius, spec.seed)?;
            let mut cc = Table::new("cocycle.csv", "n,mean,std_error", &h);
            for row in &rows {
                cc.row(&cells![row.n, row.mean, row.std_error]);
            }
            tables.extend([g, c, f, cc]);
        }
    }
    if spec.persist && !matches!(spec.experiment, Experiment::Sample | Experiment::Build { .. } | Experiment::Cayley { .. }) {
        let cfg = spec.sim_config()?;
        if let Some(law) = spec.weights {
            let fields: Vec<PassageField> = fields_for(&cfg, law, r).collect::<Result<_>>()?;
            extra.extend(fields.iter().enumerate().map(|(k, f)| (format!("field_{k}.bin"), crate::persist::to_bytes(f))));
        } else {
            for k in 0..r as u64 {
                let g = GeoGraph::build(sample_ppp_replica(&cfg, k)?, cfg.radius);
                extra.push((format!("graph_{k}.bin"), crate::persist::to_bytes(&g)));
            }
        }
    }
    Ok(Outputs { tables, extra })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

/// Validates, runs on a pool of `workers` threads (machine parallelism when
/// `None`) and writes `spec.toml`, the tables and `manifest.toml` into `out`.
/// Nothing is written unless validation passes.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, workers: Option<usize>) -> Result<RunSummary> {
    spec.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Resource(e.to_string()))?;
    let outputs = pool.install(|| execute(spec))?;
    fs::create_dir_all(out)?;
    let mut files = vec!["spec.toml".to_string()];
    fs::write(out.join("spec.toml"), spec.canonical_toml())?;
    for t in &outputs.tables {
        fs::write(out.join(&t.name), &t.text)?;
        files.push(t.name.clone());
    }
    for (name, bytes) in &outputs.extra {
        fs::File::create(out.join(name))?.write_all(bytes)?;
        files.push(name.clone());
    }
    files.push("manifest.toml".into());
    let manifest = Manifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        kind: spec.experiment.kind().into(),
        spec_sha256: spec.hash(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files,
        spec: spec.clone(),
    };
    fs::write(out.join("manifest.toml"), toml::to_string(&manifest).expect("manifest serializes"))?;
    Ok(RunSummary { output_dir: out.to_path_buf(), manifest })
}

// ------------------------------------------------------------- verification

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn brute_edges(points: &PointSet, r: f64) -> Vec<(u32, u32)> {
    let mut e = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2: f64 = points.point(i).iter().zip(points.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 > 0.0 && d2 < r * r {
                e.push((i as u32, j as u32));
            }
        }
    }
    e
}

fn exhaustive(adj: &[Vec<(usize, f64)>], at: usize, cost: f64, seen: &mut Vec<bool>, best: &mut [f64]) {
    best[at] = best[at].min(cost);
    for &(w, c) in &adj[at] {
        if !seen[w] {
            seen[w] = true;
            exhaustive(adj, w, cost + c, seen, best);
            seen[w] = false;
        }
    }
}

fn small_fields(seed: u64, count: u64) -> impl Iterator<Item = PassageField> {
    (0..count).map(move |k| {
        let mut rng = stream_rng(seed, "verify-small", k);
        let n = rng.random_range(2..=9);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)]).collect();
        let g = Arc::new(GeoGraph::build(PointSet::from_points(2, &pts, 3.0, 1.0), 1.6));
        let w = (0..g.edge_count()).map(|_| rng.random_range(0.0..2.0)).collect();
        PassageField::from_weights(g, w, WeightDistribution::Uniform { low: 0.0, high: 2.0 }, k)
    })
}

/// Quick oracle checks for the module behind `kind`.
pub fn verify(kind: &str, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    match kind {
        "sample" | "build" => {
            let mut bad = 0;
            for k in 0..20u64 {
                let cfg = SimConfig::new(2 + (k % 2) as usize, 1.0, 1.5, 8.0, seed);
                let pts = sample_ppp_replica(&cfg, k)?;
                let mut e = GeoGraph::build(pts.clone(), cfg.radius).edges().to_vec();
                e.sort_unstable();
                bad += usize::from(e != brute_edges(&pts, cfg.radius));
            }
            out.push(check("grid edges equal all-pairs edges", bad == 0, format!("{bad} of 20 instances differ")));
        }
        "fpp-shape" | "time-constant" | "geodesics" | "straightness" | "deviations" => {
            let mut worst = 0.0f64;
            for f in small_fields(seed, 200) {
                let n = f.graph().vertex_count();
                let mut adj = vec![Vec::new(); n];
                for (e, &(u, v)) in f.graph().edges().iter().enumerate() {
                    adj[u as usize].push((v as usize, f.weight(e)));
                    adj[v as usize].push((u as usize, f.weight(e)));
                }
                let mut best = vec![f64::INFINITY; n];
                let mut seen = vec![false; n];
                seen[0] = true;
                exhaustive(&adj, 0, 0.0, &mut seen, &mut best);
                let d = dijkstra(&f, 0, None).time;
                for (a, b) in d.iter().zip(&best) {
                    if a.is_finite() || b.is_finite() {
                        worst = worst.max((a - b).abs() / b.abs().max(1e-300));
                    }
                }
            }
            out.push(check("passage times equal exhaustive path search", worst <= 1e-12, format!("max relative error {worst:e}")));
        }
        "coupling" => {
            let mut bad = 0;
            for f in small_fields(seed, 100) {
                let n = f.graph().vertex_count();
                let d = dijkstra(&f, 0, None).time;
                for t in 0..n {
                    let h = hop_limited_passage(&f, 0, t, (n.max(2) - 1) as u64);
                    bad += usize::from(h != d[t]);
                }
            }
            out.push(check("layered passage at full budget equals unrestricted passage", bad == 0, format!("{bad} mismatches")));
            let cfg = SimConfig::new(2, 1.0, 2.0, 20.0, seed);
            let field = estimators::realize(&cfg, WeightDistribution::Exponential { rate: 1.0 }, 0)?;
            let aug = build_augmented(&field, AugmentConfig::with_defaults(2, 2.0))?;
            let base_ok = (0..aug.base_count()).all(|v| !aug.is_lattice(v)) && (aug.base_count()..aug.total_count()).all(|v| aug.is_lattice(v));
            out.push(check("augmented graph keeps base vertices first", base_ok, format!("{} lattice vertices", aug.lattice_count())));
        }
        "compete" => {
            let cfg = SimConfig::new(2, 1.0, 2.0, 30.0, seed);
            let params = CoexistenceParams {
                w: vec![Ball { center: vec![-5.0, 0.0], radius: 3.0 }],
                w_prime: vec![Ball { center: vec![5.0, 0.0], radius: 3.0 }],
                horizon: 20.0,
                replicas: 1,
                tie_rule: TieRule::RedWins,
                max_events: 200_000,
                projection_spacing: 0.25,
            };
            let (state, outcome) = competition::competition_replica(&cfg, &params, 0)?;
            let final_audit = state.audit();
            out.push(check(
                "rate cache equals recount",
                outcome.audit_mismatches == 0 && final_audit,
                format!("{} audits, {} mismatches", outcome.audits, outcome.audit_mismatches),
            ));
        }
        "cayley" => {
            type H = HeisenbergElement;
            let law = H::X.multiply(H::Y)? == H::new(1, 1, 1)
                && H::new(1, 1, 0).inverse()? == H::new(-1, -1, 1)
                && H::new(1, 1, 0).power(3)? == H::new(3, 3, 3);
            out.push(check("group law examples", law, String::new()));
            let ball = heisenberg::enumerate_ball(6)?;
            let sizes = ball.ball_sizes();
            out.push(check("|B(0)| = 1 and |B(1)| = 5", sizes[0] == 1 && sizes[1] == 5, format!("{:?}", &sizes[..2])));
            let sym = ball.elements().iter().enumerate().all(|(i, g)| g.inverse().ok().and_then(|v| ball.word_norm(v).ok()) == Some(ball.norm_at(i)));
            out.push(check("word norm is inversion symmetric", sym, String::new()));
        }
        other => return Err(invalid(format!("unknown experiment kind {other:?}"))),
    }
    Ok(out)
}
