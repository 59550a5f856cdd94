//! Candidate α-bi-Hölder maps `Φ: [0,1] → R^d` and numerical certificates for
//! their constants.
//!
//! Three constructions are provided: a lacunary trigonometric map with one
//! affine coordinate (any α, dimension set by the resolution it must cover),
//! the arc-parametrized generalized Koch curve (α in (1/2, 1), planar), and the
//! Weierstrass embedding `x ↦ (W_{g_1}(x), …, W_{g_m}(x))` on the circle.
//!
//! Certificates are scale-limited: constants hold for tested pairs whose
//! parameter separation is at least the finest grid spacing. A collapsing
//! lower constant along refinements is a negative result, not an error.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functions::{grid_point, HolderFunction, PeriodicGenerator, WeierstrassParams};

/// Embedding dimensions above this are refused unless the caller raises it.
pub const DEFAULT_DIM_CEILING: usize = 64;

/// Grids up to this size are certified with a full pair scan.
pub const FULL_SCAN_LIMIT: usize = 1 << 12;

/// Random pairs added to dyadic-separation pairs on grids above the full-scan limit.
pub const RANDOM_PAIRS: usize = 1_000_000;

/// Default Koch descent depth; `4^{-24}` is below f64 resolution of the curve.
pub const KOCH_DEPTH: usize = 24;

/// Metric on the parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `|x - y|` on `[0, 1]`.
    Interval,
    /// `min(|x - y|, 1 - |x - y|)`, i.e. `[0, 1]` with its ends glued.
    Circle,
}

impl Domain {
    #[inline]
    pub fn distance(self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self {
            Domain::Interval => d,
            Domain::Circle => d.min(1.0 - d),
        }
    }

    /// Distance between grid indices `i`, `j` of a closed grid of size `n`.
    #[inline]
    fn grid_distance(self, gap: usize, n: usize) -> f64 {
        match self {
            Domain::Interval => gap as f64 / n as f64,
            Domain::Circle => gap.min(n - gap) as f64 / n as f64,
        }
    }
}

type CoordinateMap = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// An evaluable map `[0,1] → R^d` with exponent α and optional bi-Hölder
/// constants `c1 ≤ ‖Φ(x)-Φ(y)‖_∞ / d(x,y)^α ≤ c2`.
#[derive(Clone)]
pub struct SnowflakeEmbedding {
    map: CoordinateMap,
    dim: usize,
    alpha: f64,
    domain: Domain,
    c1_estimate: Option<f64>,
    c2_estimate: Option<f64>,
    resolution_floor: Option<f64>,
    description: String,
}

impl fmt::Debug for SnowflakeEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SnowflakeEmbedding")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("domain", &self.domain)
            .field("c1_estimate", &self.c1_estimate)
            .field("c2_estimate", &self.c2_estimate)
            .field("resolution_floor", &self.resolution_floor)
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl SnowflakeEmbedding {
    pub fn new(
        dim: usize,
        alpha: f64,
        domain: Domain,
        map: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "embedding dimension must be at least 1"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        Ok(Self {
            map: Arc::new(map),
            dim,
            alpha,
            domain,
            c1_estimate: None,
            c2_estimate: None,
            resolution_floor: None,
            description: description.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn c1_estimate(&self) -> Option<f64> {
        self.c1_estimate
    }

    pub fn c2_estimate(&self) -> Option<f64> {
        self.c2_estimate
    }

    pub fn resolution_floor(&self) -> Option<f64> {
        self.resolution_floor
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Adopts the constants of a certificate. An existing analytic upper bound
    /// is kept when it is larger than the sampled one.
    pub fn with_certificate(mut self, cert: &BiHolderCertificate) -> Self {
        self.c1_estimate = Some(cert.c1);
        self.c2_estimate = Some(self.c2_estimate.map_or(cert.c2, |c| c.max(cert.c2)));
        self.resolution_floor = Some(1.0 / cert.grid_size as f64);
        self
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        (self.map)(x, out)
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Row-major samples on the closed grid `i/n`.
    pub fn sample(&self, n: usize) -> EmbeddingSamples {
        let dim = self.dim;
        let mut values = vec![0.0; (n + 1) * dim];
        values
            .par_chunks_mut(dim)
            .with_min_len(1024)
            .enumerate()
            .for_each(|(i, row)| self.eval_into(grid_point(i, n), row));
        EmbeddingSamples { n, dim, values }
    }
}

/// Embedding values on a closed grid, one row of length `dim` per grid point.
#[derive(Clone, Debug)]
pub struct EmbeddingSamples {
    pub n: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl EmbeddingSamples {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn max_norm_distance(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `<t, Φ(x_i)>` for every grid point.
    pub fn project(&self, t: &[f64]) -> Vec<f64> {
        assert_eq!(t.len(), self.dim);
        self.values
            .chunks(self.dim)
            .map(|row| row.iter().zip(t).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Lacunary trigonometric embedding.
///
/// Coordinates are `λ^{-αk} (cos πλ^k x, sin πλ^k x)` for `k = 0..=K` with
/// `K = ⌈log_λ(1/δ)⌉`, followed by `λ^{-α(K+1)} x`. Each pair traces a
/// half-turn per unit of `λ^k x`, so the coarsest pair is injective on `[0,1]`.
/// Dimension is `2(K+1)+1`.
pub fn build_lacunary(alpha: f64, lambda: u32, delta: f64) -> Result<SnowflakeEmbedding> {
    build_lacunary_with_ceiling(alpha, lambda, delta, DEFAULT_DIM_CEILING)
}

pub fn build_lacunary_with_ceiling(alpha: f64, lambda: u32, delta: f64, ceiling: usize) -> Result<SnowflakeEmbedding> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if lambda < 2 {
        return Err(invalid("lambda", format!("must be an integer >= 2, got {lambda}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let lam = lambda as f64;
    let mut levels = 0usize;
    let mut reach = 1.0;
    while reach * delta < 1.0 {
        reach *= lam;
        levels += 1;
    }
    let dim = 2 * (levels + 1) + 1;
    if dim > ceiling {
        return Err(invalid(
            "delta",
            format!("resolution {delta} needs dimension {dim}, above the ceiling {ceiling}"),
        ));
    }
    let weights: Vec<f64> = (0..=levels).map(|k| lam.powf(-alpha * k as f64)).collect();
    let freqs: Vec<f64> = (0..=levels).map(|k| PI * lam.powi(k as i32)).collect();
    let affine = lam.powf(-alpha * (levels + 1) as f64);
    let map = move |x: f64, out: &mut [f64]| {
        for (k, (w, f)) in weights.iter().zip(&freqs).enumerate() {
            let (s, c) = (f * x).sin_cos();
            out[2 * k] = w * c;
            out[2 * k + 1] = w * s;
        }
        out[2 * weights.len()] = affine * x;
    };
    let mut emb = SnowflakeEmbedding::new(
        dim,
        alpha,
        Domain::Interval,
        map,
        format!("lacunary alpha={alpha} lambda={lambda} delta={delta} K={levels}"),
    )?;
    emb.c2_estimate = Some(lacunary_upper_bound(alpha, lambda));
    Ok(emb)
}

/// Analytic upper constant `(2π + 1)/(1 - λ^{-α})` of the lacunary map.
pub fn lacunary_upper_bound(alpha: f64, lambda: u32) -> f64 {
    (2.0 * PI + 1.0) / (1.0 - (lambda as f64).powf(-alpha))
}

/// The generalized Koch curve as a planar snowflake map.
#[derive(Clone, Copy, Debug)]
pub struct KochCurve {
    pub ratio: f64,
    pub angle: f64,
    pub depth: usize,
    // similarity i: z ↦ mult[i] z + shift[i], as (re, im) pairs
    mult: [(f64, f64); 4],
    shift: [(f64, f64); 4],
}

impl KochCurve {
    pub fn new(alpha: f64, depth: usize) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(invalid(
                "alpha",
                format!("Koch curves need alpha in (1/2, 1), got {alpha}"),
            ));
        }
        let ratio = 4f64.powf(-alpha);
        let angle = ((4f64.powf(alpha) - 2.0) / 2.0).acos();
        let (s, c) = angle.sin_cos();
        let up = (ratio * c, ratio * s);
        let down = (ratio * c, -ratio * s);
        let mult = [(ratio, 0.0), up, down, (ratio, 0.0)];
        let shift = [(0.0, 0.0), (ratio, 0.0), (ratio + up.0, up.1), (1.0 - ratio, 0.0)];
        Ok(Self {
            ratio,
            angle,
            depth,
            mult,
            shift,
        })
    }

    /// Applies similarity `i` to a point.
    pub fn apply(&self, i: usize, p: (f64, f64)) -> (f64, f64) {
        let (a, b) = self.mult[i];
        let (sx, sy) = self.shift[i];
        (a * p.0 - b * p.1 + sx, a * p.1 + b * p.0 + sy)
    }

    /// Descends the base-4 expansion of `x`, then interpolates linearly along
    /// the remaining chord.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let mut ax = (1.0, 0.0);
        let mut off = (0.0, 0.0);
        let mut u = x.clamp(0.0, 1.0);
        for _ in 0..self.depth {
            let y = 4.0 * u;
            let digit = (y.floor() as usize).min(3);
            u = y - digit as f64;
            let (sx, sy) = self.shift[digit];
            off = (off.0 + ax.0 * sx - ax.1 * sy, off.1 + ax.0 * sy + ax.1 * sx);
            let (mx, my) = self.mult[digit];
            ax = (ax.0 * mx - ax.1 * my, ax.0 * my + ax.1 * mx);
        }
        (off.0 + ax.0 * u, off.1 + ax.1 * u)
    }
}

/// Arc-parametrized generalized Koch curve with ratio `4^{-α}` and bend angle
/// `arccos((4^α - 2)/2)`.
pub fn build_koch(alpha: f64) -> Result<SnowflakeEmbedding> {
    build_koch_with_depth(alpha, KOCH_DEPTH)
}

pub fn build_koch_with_depth(alpha: f64, depth: usize) -> Result<SnowflakeEmbedding> {
    let curve = KochCurve::new(alpha, depth)?;
    SnowflakeEmbedding::new(
        2,
        alpha,
        Domain::Interval,
        move |x, out| {
            let (px, py) = curve.eval(x);
            out[0] = px;
            out[1] = py;
        },
        format!("koch alpha={alpha} depth={depth}"),
    )
}

/// Generators `G = {g_1, …, g_m}` with a shared base and exponent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeierstrassEmbeddingSpec {
    pub generators: Vec<PeriodicGenerator>,
    pub base: u32,
    pub alpha: f64,
}

impl WeierstrassEmbeddingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(invalid("generators", "at least one generator is required"));
        }
        for g in &self.generators {
            if !(g.lipschitz_bound().is_finite() && g.sup_bound().is_finite()) {
                return Err(invalid("generators", "generator bounds must be finite"));
            }
        }
        // base and alpha are checked by WeierstrassParams
        WeierstrassParams::new(self.base, self.alpha, PeriodicGenerator::Cosine)?;
        Ok(())
    }

    pub fn params(&self, depth: Option<usize>) -> Result<Vec<WeierstrassParams>> {
        self.validate()?;
        self.generators
            .iter()
            .map(|g| {
                let p = WeierstrassParams::new(self.base, self.alpha, g.clone())?;
                Ok(match depth {
                    Some(k) => p.with_depth(k),
                    None => p,
                })
            })
            .collect()
    }
}

/// `Φ(x) = (W_{g_1}(x), …, W_{g_m}(x))` on the circle; constants unset until certified.
pub fn build_weierstrass_embedding(
    spec: &WeierstrassEmbeddingSpec,
    depth: Option<usize>,
) -> Result<SnowflakeEmbedding> {
    let params = spec.params(depth)?;
    let dim = params.len();
    SnowflakeEmbedding::new(
        dim,
        spec.alpha,
        Domain::Circle,
        move |x, out| {
            for (o, p) in out.iter_mut().zip(&params) {
                *o = p.eval(x);
            }
        },
        format!("weierstrass embedding b={} alpha={} m={dim}", spec.base, spec.alpha),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub pairs: u64,
}

/// Sampled bi-Hölder constants with their refinement history. Trace values are
/// cumulative over all grids certified so far, so `c1` never increases and
/// `c2` never decreases along the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiHolderCertificate {
    pub c1: f64,
    pub c2: f64,
    pub grid_size: usize,
    pub pair_count: u64,
    pub worst_pair: (f64, f64),
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Copy, Debug)]
struct Extremes {
    min: f64,
    min_pair: (usize, usize),
    max: f64,
    pairs: u64,
}

impl Extremes {
    const EMPTY: Extremes = Extremes {
        min: f64::INFINITY,
        min_pair: (0, 0),
        max: 0.0,
        pairs: 0,
    };

    #[inline]
    fn push(&mut self, ratio: f64, i: usize, j: usize) {
        if ratio < self.min {
            self.min = ratio;
            self.min_pair = (i, j);
        }
        if ratio > self.max {
            self.max = ratio;
        }
        self.pairs += 1;
    }

    // left-biased so ties resolve identically for any worker count
    fn merge(self, other: Extremes) -> Extremes {
        let (min, min_pair) = if other.min < self.min {
            (other.min, other.min_pair)
        } else {
            (self.min, self.min_pair)
        };
        Extremes {
            min,
            min_pair,
            max: self.max.max(other.max),
            pairs: self.pairs + other.pairs,
        }
    }
}

fn scan_full(samples: &EmbeddingSamples, domain: Domain, alpha: f64) -> Extremes {
    let n = samples.n;
    let inv: Vec<f64> = (0..=n)
        .map(|gap| {
            let d = if gap == 0 { 0.0 } else { domain.grid_distance(gap, n) };
            if d > 0.0 {
                d.powf(-alpha)
            } else {
                0.0
            }
        })
        .collect();
    (0..n)
        .into_par_iter()
        .with_min_len(16)
        .fold(
            || Extremes::EMPTY,
            |mut acc, i| {
                for j in i + 1..=n {
                    let w = inv[j - i];
                    if w > 0.0 {
                        acc.push(samples.max_norm_distance(i, j) * w, i, j);
                    }
                }
                acc
            },
        )
        .reduce(|| Extremes::EMPTY, Extremes::merge)
}

fn scan_sampled(samples: &EmbeddingSamples, domain: Domain, alpha: f64, random_pairs: usize, seed: u64) -> Extremes {
    let n = samples.n;
    let ratio = |i: usize, j: usize| -> Option<f64> {
        let d = domain.grid_distance(j - i, n);
        (d > 0.0).then(|| samples.max_norm_distance(i, j) / d.powf(alpha))
    };
    let mut acc = Extremes::EMPTY;
    let mut gap = 1usize;
    while gap <= n {
        let part = (0..n - gap + 1)
            .into_par_iter()
            .with_min_len(4096)
            .fold(
                || Extremes::EMPTY,
                |mut e, i| {
                    if let Some(r) = ratio(i, i + gap) {
                        e.push(r, i, i + gap);
                    }
                    e
                },
            )
            .reduce(|| Extremes::EMPTY, Extremes::merge);
        acc = acc.merge(part);
        gap *= 2;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..random_pairs)
        .map(|_| {
            let a = rng.random_range(0..=n);
            let b = rng.random_range(0..=n);
            (a.min(b), a.max(b))
        })
        .collect();
    let part = pairs
        .par_iter()
        .with_min_len(4096)
        .fold(
            || Extremes::EMPTY,
            |mut e, &(i, j)| {
                if i != j {
                    if let Some(r) = ratio(i, j) {
                        e.push(r, i, j);
                    }
                }
                e
            },
        )
        .reduce(|| Extremes::EMPTY, Extremes::merge);
    acc.merge(part)
}

/// Scans grid pairs at each resolution in `grids` (ascending) and records the
/// extreme ratios `‖Φ(x)-Φ(y)‖_∞ / d(x,y)^α`.
///
/// Grids up to [`FULL_SCAN_LIMIT`] are scanned exhaustively; finer grids use
/// every pair at a dyadic index separation plus [`RANDOM_PAIRS`] seeded
/// uniform pairs.
pub fn certify_biholder(phi: &SnowflakeEmbedding, alpha: f64, grids: &[usize]) -> Result<BiHolderCertificate> {
    certify_biholder_with(phi, alpha, grids, RANDOM_PAIRS)
}

pub fn certify_biholder_with(
    phi: &SnowflakeEmbedding,
    alpha: f64,
    grids: &[usize],
    random_pairs: usize,
) -> Result<BiHolderCertificate> {
    if grids.is_empty() {
        return Err(invalid("grids", "at least one grid size is required"));
    }
    if grids.iter().any(|&n| n < 2) || grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grids", "grid sizes must be ascending and at least 2"));
    }
    let mut best = Extremes::EMPTY;
    let mut worst_pair = (0.0, 0.0);
    let mut trace = Vec::with_capacity(grids.len());
    let mut total_pairs = 0u64;
    for &n in grids {
        let samples = phi.sample(n);
        let ext = if n <= FULL_SCAN_LIMIT {
            scan_full(&samples, phi.domain(), alpha)
        } else {
            scan_sampled(&samples, phi.domain(), alpha, random_pairs, 0x5eed_0000 ^ n as u64)
        };
        total_pairs += ext.pairs;
        if ext.min < best.min {
            worst_pair = (grid_point(ext.min_pair.0, n), grid_point(ext.min_pair.1, n));
        }
        best = best.merge(ext);
        trace.push(TraceEntry {
            n,
            c1: best.min,
            c2: best.max,
            pairs: ext.pairs,
        });
    }
    Ok(BiHolderCertificate {
        c1: best.min,
        c2: best.max,
        grid_size: *grids.last().unwrap(),
        pair_count: total_pairs,
        worst_pair,
        trace,
    })
}

/// Fraction of the `n` cell midpoints `y` of `I = [lo, hi]` with
/// `|W(x) - W(y)| > ε |x - y|^α`.
pub fn reverse_holder_fraction(
    w: &HolderFunction,
    alpha: f64,
    eps: f64,
    x: f64,
    interval: (f64, f64),
    n: usize,
) -> Result<f64> {
    let (lo, hi) = interval;
    if !(hi > lo) || n == 0 {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let wx = w.eval(x);
    let step = (hi - lo) / n as f64;
    let hits = (0..n)
        .filter(|&i| {
            let y = lo + (i as f64 + 0.5) * step;
            (wx - w.eval(y)).abs() > eps * (x - y).abs().powf(alpha)
        })
        .count();
    Ok(hits as f64 / n as f64)
}

/// Settings of the generator search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Highest trigonometric frequency in each generator.
    pub frequency_cutoff: u32,
    /// Offspring per generation (the λ of the (1+λ) strategy).
    pub offspring: usize,
    /// Grid on which candidate fitness (the lower constant) is measured.
    pub working_grid: usize,
    /// Grids for the final certificate of the best specimen.
    pub certify_grids: Vec<usize>,
    pub initial_step: f64,
    /// Generations without improvement before the step is halved.
    pub stagnation: usize,
    /// Series depth used throughout the search.
    pub depth: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            frequency_cutoff: 8,
            offspring: 6,
            working_grid: 256,
            certify_grids: vec![256, 1024, 4096],
            initial_step: 0.3,
            stagnation: 8,
            depth: 40,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub spec: WeierstrassEmbeddingSpec,
    pub certificate: BiHolderCertificate,
    /// Fitness of the seeded initial specimen.
    pub initial_c1: f64,
    /// Best-so-far fitness after each iteration (first entry: the seed specimen).
    pub best_trace: Vec<f64>,
}

fn coefficients_to_spec(coeffs: &[f64], cutoff: u32, m: usize, base: u32, alpha: f64) -> WeierstrassEmbeddingSpec {
    let per = 2 * cutoff as usize;
    let generators = (0..m)
        .map(|g| {
            let raw = &coeffs[g * per..(g + 1) * per];
            let lip: f64 = (0..cutoff as usize)
                .map(|k| 2.0 * PI * (k + 1) as f64 * raw[2 * k].hypot(raw[2 * k + 1]))
                .sum();
            let scale = if lip > 0.0 { 1.0 / lip } else { 0.0 };
            let terms = (0..cutoff as usize)
                .map(|k| crate::functions::TrigTerm {
                    frequency: k as u32 + 1,
                    cos: raw[2 * k] * scale,
                    sin: raw[2 * k + 1] * scale,
                })
                .collect();
            PeriodicGenerator::TrigPolynomial { terms }
        })
        .collect();
    WeierstrassEmbeddingSpec {
        generators,
        base,
        alpha,
    }
}

fn fitness(spec: &WeierstrassEmbeddingSpec, cfg: &SearchConfig) -> f64 {
    let phi = match build_weierstrass_embedding(spec, Some(cfg.depth)) {
        Ok(p) => p,
        Err(_) => return 0.0,
    };
    let samples = phi.sample(cfg.working_grid);
    let e = scan_full(&samples, Domain::Circle, spec.alpha);
    if e.min.is_finite() {
        e.min
    } else {
        0.0
    }
}

/// Seeded (1+λ) evolution strategy over unit-Lipschitz trigonometric
/// generators, maximizing the sampled lower constant of the Weierstrass
/// embedding. `budget` counts iterations including the seed specimen.
/// The outcome is numerical evidence only.
pub fn search_embedding(base: u32, alpha: f64, m: usize, budget: usize, seed: u64) -> Result<SearchOutcome> {
    search_embedding_with(base, alpha, m, budget, seed, &SearchConfig::default())
}

pub fn search_embedding_with(
    base: u32,
    alpha: f64,
    m: usize,
    budget: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(invalid("budget", "must be at least 1"));
    }
    if m == 0 {
        return Err(invalid("m", "at least one generator is required"));
    }
    if cfg.frequency_cutoff == 0 || cfg.offspring == 0 {
        return Err(invalid("search", "frequency_cutoff and offspring must be positive"));
    }
    WeierstrassParams::new(base, alpha, PeriodicGenerator::Cosine)?;
    let normal = rand_distr::StandardNormal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = m * 2 * cfg.frequency_cutoff as usize;
    let mut parent: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(normal)).collect();
    let mut parent_spec = coefficients_to_spec(&parent, cfg.frequency_cutoff, m, base, alpha);
    let mut parent_fit = fitness(&parent_spec, cfg);
    let initial_c1 = parent_fit;
    let mut best_trace = vec![parent_fit];
    let mut step = cfg.initial_step;
    let mut stale = 0usize;

    for _ in 1..budget {
        // draw every child before evaluating so the stream is worker-independent
        let children: Vec<Vec<f64>> = (0..cfg.offspring)
            .map(|_| {
                parent
                    .iter()
                    .map(|&c| c + step * rng.sample::<f64, _>(normal))
                    .collect()
            })
            .collect();
        let scored: Vec<(f64, WeierstrassEmbeddingSpec)> = children
            .par_iter()
            .map(|c| {
                let spec = coefficients_to_spec(c, cfg.frequency_cutoff, m, base, alpha);
                (fitness(&spec, cfg), spec)
            })
            .collect();
        let mut winner: Option<usize> = None;
        for (k, (fit, _)) in scored.iter().enumerate() {
            if *fit > parent_fit && winner.is_none_or(|w| *fit > scored[w].0) {
                winner = Some(k);
            }
        }
        match winner {
            Some(k) => {
                parent_fit = scored[k].0;
                parent_spec = scored[k].1.clone();
                parent = children[k].clone();
                stale = 0;
            }
            None => {
                stale += 1;
                if stale >= cfg.stagnation {
                    step *= 0.5;
                    stale = 0;
                }
            }
        }
        best_trace.push(parent_fit);
    }

    let phi = build_weierstrass_embedding(&parent_spec, Some(cfg.depth))?;
    let certificate = certify_biholder(&phi, alpha, &cfg.certify_grids)?;
    Ok(SearchOutcome {
        spec: parent_spec,
        certificate,
        initial_c1,
        best_trace,
    })
}
