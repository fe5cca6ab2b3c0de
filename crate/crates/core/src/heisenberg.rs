//! The discrete Heisenberg group `H_3(Z)` with generators `X^{±1}, Y^{±1}`:
//! arithmetic, word-metric balls, and first-passage cocycles on the Cayley graph.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpp::passage::{dijkstra, WeightedGraph};
use crate::sampling::{derive_stream, mix64, unit_uniform};
use crate::stats::{linear_fit, Summary};

/// Upper-triangular coordinates: `(x, y, z)` is the matrix `[[1, x, z], [0, 1, y], [0, 0, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

fn ovf<T>(v: Option<T>) -> Result<T> {
    v.ok_or(Error::IntegerOverflow)
}

impl HeisenbergElement {
    pub const IDENTITY: Self = Self::new(0, 0, 0);
    pub const X: Self = Self::new(1, 0, 0);
    pub const Y: Self = Self::new(0, 1, 0);
    pub const Z: Self = Self::new(0, 0, 1);

    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    /// `(x + x', y + y', z + z' + x y')`.
    pub fn multiply(self, h: Self) -> Result<Self> {
        let xy = ovf(self.x.checked_mul(h.y))?;
        Ok(Self::new(
            ovf(self.x.checked_add(h.x))?,
            ovf(self.y.checked_add(h.y))?,
            ovf(self.z.checked_add(h.z).and_then(|s| s.checked_add(xy)))?,
        ))
    }

    /// `(-x, -y, x y - z)`.
    pub fn inverse(self) -> Result<Self> {
        let xy = ovf(self.x.checked_mul(self.y))?;
        Ok(Self::new(ovf(self.x.checked_neg())?, ovf(self.y.checked_neg())?, ovf(xy.checked_sub(self.z))?))
    }

    /// `g h g^-1 h^-1 = (0, 0, x y' - x' y)`.
    pub fn commutator(self, h: Self) -> Result<Self> {
        let a = ovf(self.x.checked_mul(h.y))?;
        let b = ovf(h.x.checked_mul(self.y))?;
        Ok(Self::new(0, 0, ovf(a.checked_sub(b))?))
    }

    /// `(n x, n y, n z + n(n-1)/2 x y)`.
    pub fn power(self, n: u64) -> Result<Self> {
        let n = i64::try_from(n).map_err(|_| Error::IntegerOverflow)?;
        // n(n-1)/2 is exact: one of n, n-1 is even
        let tri = if n % 2 == 0 { ovf((n / 2).checked_mul(n - 1))? } else { ovf(n.checked_mul((n - 1) / 2))? };
        let cross = ovf(tri.checked_mul(self.x).and_then(|v| v.checked_mul(self.y)))?;
        Ok(Self::new(
            ovf(n.checked_mul(self.x))?,
            ovf(n.checked_mul(self.y))?,
            ovf(n.checked_mul(self.z).and_then(|v| v.checked_add(cross)))?,
        ))
    }

    /// Counter identifying the element in random streams.
    pub fn key(self) -> u64 {
        mix64(mix64(mix64(self.x as u64) ^ self.y as u64) ^ self.z as u64)
    }
}

/// `X, X^-1, Y, Y^-1`.
pub const GENERATORS: [HeisenbergElement; 4] =
    [HeisenbergElement::new(1, 0, 0), HeisenbergElement::new(-1, 0, 0), HeisenbergElement::new(0, 1, 0), HeisenbergElement::new(0, -1, 0)];

/// Direction class `{s, s^-1}` of each generator.
pub const GENERATOR_CLASS: [usize; 4] = [0, 0, 1, 1];

/// Word-metric ball `B_S(e, n)` with the Cayley edges `g ~ s g` inside it.
#[derive(Clone, Debug)]
pub struct WordBall {
    pub radius: u32,
    elements: Vec<HeisenbergElement>,
    norms: Vec<u32>,
    index: HashMap<HeisenbergElement, u32>,
    /// `neighbours[4 i + k]` is the index of `GENERATORS[k] · elements[i]`, or `u32::MAX`.
    neighbours: Vec<u32>,
    sphere_sizes: Vec<usize>,
}

/// Breadth-first enumeration of all elements at word norm at most `n`.
pub fn enumerate_ball(n: u32) -> Result<WordBall> {
    let mut elements = vec![HeisenbergElement::IDENTITY];
    let mut norms = vec![0u32];
    let mut index = HashMap::new();
    index.insert(HeisenbergElement::IDENTITY, 0u32);
    let mut sphere_sizes = vec![1usize];
    let mut frontier = 0..1;
    for depth in 1..=n {
        let end = elements.len();
        for i in frontier.clone() {
            let g = elements[i];
            for s in GENERATORS {
                let h = s.multiply(g)?;
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(h) {
                    slot.insert(elements.len() as u32);
                    elements.push(h);
                    norms.push(depth);
                }
            }
        }
        sphere_sizes.push(elements.len() - end);
        frontier = end..elements.len();
    }
    let mut neighbours = Vec::with_capacity(4 * elements.len());
    for g in &elements {
        for s in GENERATORS {
            neighbours.push(s.multiply(*g).ok().and_then(|h| index.get(&h).copied()).unwrap_or(u32::MAX));
        }
    }
    Ok(WordBall { radius: n, elements, norms, index, neighbours, sphere_sizes })
}

impl WordBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HeisenbergElement] {
        &self.elements
    }

    pub fn index_of(&self, g: HeisenbergElement) -> Option<usize> {
        self.index.get(&g).map(|&i| i as usize)
    }

    pub fn norm_at(&self, i: usize) -> u32 {
        self.norms[i]
    }

    /// `|B(k)|` for `k = 0..=radius`.
    pub fn ball_sizes(&self) -> Vec<usize> {
        self.sphere_sizes
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }

    /// `‖g‖_S`; `BudgetExceeded` outside the ball.
    pub fn word_norm(&self, g: HeisenbergElement) -> Result<u32> {
        self.index_of(g).map(|i| self.norms[i]).ok_or(Error::BudgetExceeded(self.radius))
    }

    /// `‖g‖_S = min_b ‖b‖ + ‖g b^-1‖` over `b` in the ball, exact whenever
    /// `‖g‖ <= 2 · radius`.
    pub fn word_norm_split(&self, g: HeisenbergElement) -> Result<u32> {
        if let Some(i) = self.index_of(g) {
            return Ok(self.norms[i]);
        }
        let best = self
            .elements
            .par_iter()
            .zip(&self.norms)
            .filter_map(|(b, &nb)| {
                let rest = g.multiply(b.inverse().ok()?).ok()?;
                self.index.get(&rest).map(|&j| nb + self.norms[j as usize])
            })
            .min();
        best.ok_or(Error::BudgetExceeded(2 * self.radius))
    }

    fn neighbour(&self, i: usize, k: usize) -> Option<usize> {
        let j = self.neighbours[4 * i + k];
        (j != u32::MAX).then_some(j as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `|B(n)|` for `n = 0..=n_max`.
    pub ball_sizes: Vec<usize>,
    /// Log-log slope over `n in [n_max/2, n_max]`.
    pub exponent: f64,
    /// `(m, ‖Z^m‖, ‖Z^m‖ / sqrt(m))` for square `m <= m_max`.
    pub central: Vec<(u64, u32, f64)>,
}

impl GrowthReport {
    pub fn central_ratio_spread(&self) -> f64 {
        let max = self.central.iter().map(|c| c.2).fold(0.0, f64::max);
        let min = self.central.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Ball growth and `‖Z^m‖ / sqrt(m)` on square `m`.
///
/// `‖Z^(k^2)‖ <= 4k` via the commutator `[X^k, Y^k]`, so a ball of radius
/// `ceil(2 sqrt(m_max))` resolves every central norm by splitting.
pub fn growth_and_central_scaling(n_max: u32, m_max: u64) -> Result<GrowthReport> {
    if n_max < 2 {
        return Err(Error::InvalidConfig("n_max must be at least 2".into()));
    }
    let needed = (2.0 * (m_max as f64).sqrt()).ceil() as u32;
    let ball = enumerate_ball(n_max.max(needed))?;
    let sizes: Vec<usize> = ball.ball_sizes()[..=n_max as usize].to_vec();
    let pts: Vec<(f64, f64)> = (n_max / 2..=n_max).map(|n| ((n as f64).ln(), (sizes[n as usize] as f64).ln())).collect();
    let exponent = linear_fit(&pts).slope;
    let mut central = Vec::new();
    let mut k = 1u64;
    while k * k <= m_max {
        let m = k * k;
        let norm = ball.word_norm_split(HeisenbergElement::Z.power(m)?)?;
        central.push((m, norm, norm as f64 / (m as f64).sqrt()));
        k += 1;
    }
    Ok(GrowthReport { ball_sizes: sizes, exponent, central })
}

/// Passage-time laws on the Cayley graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CayleyWeights {
    /// I.i.d. vertex colours with the given palette; an edge costs 1 when its colours differ.
    RandomColoring { palette: Vec<f64> },
    /// Exponential edge weights with rate `rates[0]` on `X^{±1}` edges and `rates[1]` on `Y^{±1}` edges.
    DirectionalExponential { rates: [f64; 2] },
    Constant { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringCondition {
    pub max_probability: f64,
    /// `1 / (|S| - 1)`.
    pub threshold: f64,
    pub satisfied: bool,
}

impl CayleyWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::RandomColoring { palette } => {
                !palette.is_empty() && palette.iter().all(|&p| p >= 0.0) && (palette.iter().sum::<f64>() - 1.0).abs() < 1e-9
            }
            Self::DirectionalExponential { rates } => rates.iter().all(|&r| r > 0.0 && r.is_finite()),
            Self::Constant { value } => *value >= 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid Cayley weight model {self:?}")))
        }
    }

    /// `max p_s < 1 / (|S| - 1)` for colourings; `None` for other models.
    pub fn coloring_condition(&self) -> Option<ColoringCondition> {
        match self {
            Self::RandomColoring { palette } => {
                let max_probability = palette.iter().copied().fold(0.0, f64::max);
                let threshold = 1.0 / (GENERATORS.len() - 1) as f64;
                Some(ColoringCondition { max_probability, threshold, satisfied: max_probability < threshold })
            }
            _ => None,
        }
    }

    fn color(palette: &[f64], stream: u64, g: HeisenbergElement) -> usize {
        let u = unit_uniform(stream, g.key());
        let mut acc = 0.0;
        for (c, &p) in palette.iter().enumerate() {
            acc += p;
            if u < acc {
                return c;
            }
        }
        palette.len() - 1
    }

    /// Weight of the edge `{g, GENERATORS[k] · g}`; depends only on the edge and the seed.
    pub fn edge_weight(&self, seed: u64, g: HeisenbergElement, k: usize) -> Result<f64> {
        let h = GENERATORS[k].multiply(g)?;
        Ok(match self {
            Self::RandomColoring { palette } => {
                let stream = derive_stream(seed, "cayley-colors", 0);
                if Self::color(palette, stream, g) == Self::color(palette, stream, h) {
                    0.0
                } else {
                    1.0
                }
            }
            Self::DirectionalExponential { rates } => {
                let stream = derive_stream(seed, "cayley-weights", 0);
                let (a, b) = if g.key() <= h.key() { (g.key(), h.key()) } else { (h.key(), g.key()) };
                let u = unit_uniform(stream, mix64(a) ^ b);
                -(-u).ln_1p() / rates[GENERATOR_CLASS[k]]
            }
            Self::Constant { value } => *value,
        })
    }
}

/// Weighted Cayley graph induced on a word ball.
#[derive(Clone, Debug)]
pub struct CayleyField<'a> {
    ball: &'a WordBall,
    weights: Vec<f64>,
}

impl<'a> CayleyField<'a> {
    pub fn new(ball: &'a WordBall, model: &CayleyWeights, seed: u64) -> Result<Self> {
        model.validate()?;
        let weights = ball
            .elements
            .par_iter()
            .flat_map_iter(|&g| (0..4).map(move |k| (g, k)))
            .map(|(g, k)| model.edge_weight(seed, g, k))
            .collect::<Result<_>>()?;
        Ok(Self { ball, weights })
    }
}

impl WeightedGraph for CayleyField<'_> {
    fn vertex_count(&self) -> usize {
        self.ball.len()
    }

    fn for_each_arc(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for k in 0..4 {
            if let Some(w) = self.ball.neighbour(v, k) {
                f(w, self.weights[4 * v + k]);
            }
        }
    }
}

/// `c(g)`: passage time from the identity to every element of `ball`,
/// using only paths inside the ball.
pub fn cayley_fpp(ball: &WordBall, model: &CayleyWeights, seed: u64) -> Result<Vec<f64>> {
    let field = CayleyField::new(ball, model, seed)?;
    Ok(dijkstra(&field, 0, None).time)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StablePassage {
    pub target_radius: u32,
    /// Radius of the ball the values were finally read from.
    pub computation_radius: u32,
    /// `c(g)` for the elements of `B(target_radius)`, in enumeration order.
    pub elements: Vec<HeisenbergElement>,
    pub times: Vec<f64>,
    /// Enlarging the margin changed some value before the final radius was reached.
    pub margin_warning: bool,
}

/// Passage times on `B(target)` read from `B(target + margin)`, enlarging the
/// margin until a further doubling changes no reported value.
pub fn stable_cayley_fpp(target: u32, margin: u32, max_radius: u32, model: &CayleyWeights, seed: u64) -> Result<StablePassage> {
    let mut m = margin.max(1);
    let mut warning = false;
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let radius = target + m;
        if radius > max_radius {
            return Err(Error::BudgetExceeded(max_radius));
        }
        let ball = enumerate_ball(radius)?;
        let c = cayley_fpp(&ball, model, seed)?;
        let inner = ball.ball_sizes()[target as usize];
        let times: Vec<f64> = c[..inner].to_vec();
        if let Some(p) = &prev {
            if *p == times {
                return Ok(StablePassage {
                    target_radius: target,
                    computation_radius: target + m / 2,
                    elements: ball.elements[..inner].to_vec(),
                    times,
                    margin_warning: warning,
                });
            }
            warning = true;
        }
        prev = Some(times);
        m *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleRow {
    pub n: u64,
    /// Mean of `c(g^n) / n`.
    pub mean: f64,
    pub std_error: f64,
}

/// Per-`n` sample means of `c(g^n) / n` over `replicas` seeds on one ball of radius `radius`.
pub fn cocycle_convergence(
    g: HeisenbergElement,
    model: &CayleyWeights,
    n_grid: &[u64],
    replicas: usize,
    radius: u32,
    master_seed: u64,
) -> Result<Vec<CocycleRow>> {
    let ball = enumerate_ball(radius)?;
    let targets: Vec<usize> = n_grid.iter().map(|&n| ball.index_of(g.power(n)?).ok_or(Error::BudgetExceeded(radius))).collect::<Result<_>>()?;
    let samples: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|k| {
            let c = cayley_fpp(&ball, model, derive_stream(master_seed, "cocycle", k))?;
            Ok(targets.iter().zip(n_grid).map(|(&i, &n)| c[i] / n as f64).collect())
        })
        .collect::<Result<_>>()?;
    Ok(n_grid
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let s = Summary::of(&samples.iter().map(|row| row[j]).collect::<Vec<_>>());
            CocycleRow { n, mean: s.mean, std_error: s.std_error() }
        })
        .collect())
}

/// Means weakly decreasing: each step up by at most two combined standard errors.
pub fn fekete_trend(rows: &[CocycleRow]) -> bool {
    rows.windows(2).all(|w| w[1].mean <= w[0].mean + 2.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt())
}
