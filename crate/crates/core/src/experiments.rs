//! Desk-scale probes of dimension claims for perturbed Hölder functions.
//!
//! A probe draws `M` points `t` uniformly from the max-norm ball `B(t0, ρ)`,
//! forms `f_t = f + <t, Φ>` on the closed grid of the finest ladder
//! resolution, and runs the estimators of the other modules on it. "Almost
//! every t" is reported as a pass fraction over the sample, never claimed.
//!
//! Graph lifts are read off the same closed grid: the midpoints of the grid of
//! size `n/2` are its odd points.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dimension::{default_window, dyadic_ladder, graph_dim_sampled, LevelSampler};
use crate::embedding::{
    build_koch, build_lacunary, build_weierstrass_embedding, search_embedding_with, EmbeddingSamples, SearchConfig,
    SnowflakeEmbedding, WeierstrassEmbeddingSpec,
};
use crate::error::{invalid, Result};
use crate::functions::{holder_ratio_max, HolderFunction, PeriodicGenerator, WeierstrassParams};
use crate::measures::{decay_exponent, energy, sobolev_integral, DyadicBands, Measure1, Measure2};
use crate::slicing::SliceIndex;

/// Version stamp written into every record.
pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));

/// Grid on which the default band constant (a sampled Hölder constant) is measured.
pub const HOLDER_ESTIMATE_GRID: usize = 2048;

/// Part 2 counts a sample as passing when at least this weighted fraction of
/// its levels qualifies.
pub const PART2_MIN_FRACTION: f64 = 0.5;

/// A Sobolev trace is bounded when its last doubling ratio is at most this.
pub const SOBOLEV_RATIO_BOUND: f64 = 1.1;

/// Largest relative change of the Monte Carlo energy between `n/2` and `n`.
pub const ENERGY_STABILITY: f64 = 0.15;

/// Function families the probes start from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `f ≡ 0`.
    Zero,
    /// `f(x) = x`, Lipschitz.
    Identity,
    /// Triangle-distance generator.
    Takagi { base: u32, alpha: f64 },
    Weierstrass {
        base: u32,
        alpha: f64,
        generator: PeriodicGenerator,
    },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<HolderFunction> {
        match self {
            FunctionSpec::Zero => HolderFunction::constant(1.0, 0.0),
            FunctionSpec::Identity => HolderFunction::identity(1.0),
            FunctionSpec::Takagi { base, alpha } => HolderFunction::takagi(*base, *alpha),
            FunctionSpec::Weierstrass { base, alpha, generator } => Ok(HolderFunction::weierstrass(
                WeierstrassParams::new(*base, *alpha, generator.clone())?,
            )),
        }
    }

    /// Hölder exponent of the function itself (1 for the Lipschitz controls).
    pub fn alpha(&self) -> f64 {
        match self {
            FunctionSpec::Zero | FunctionSpec::Identity => 1.0,
            FunctionSpec::Takagi { alpha, .. } | FunctionSpec::Weierstrass { alpha, .. } => *alpha,
        }
    }
}

/// Probe-space embeddings `Φ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmbeddingSpec {
    /// No perturbation: `f_t = f` and the probe space is `{0}`.
    None,
    /// Lacunary trigonometric map; `delta` defaults to the finest grid spacing.
    Lacunary {
        lambda: u32,
        #[serde(default)]
        delta: Option<f64>,
    },
    Koch,
    Weierstrass {
        spec: WeierstrassEmbeddingSpec,
    },
}

impl EmbeddingSpec {
    pub fn build(&self, alpha: f64, finest: usize) -> Result<Option<SnowflakeEmbedding>> {
        Ok(match self {
            EmbeddingSpec::None => None,
            EmbeddingSpec::Lacunary { lambda, delta } => {
                Some(build_lacunary(alpha, *lambda, delta.unwrap_or(1.0 / finest as f64))?)
            }
            EmbeddingSpec::Koch => Some(build_koch(alpha)?),
            EmbeddingSpec::Weierstrass { spec } => Some(build_weierstrass_embedding(spec, None)?),
        })
    }
}

fn default_rho() -> f64 {
    4.0
}
fn default_samples() -> usize {
    32
}
fn default_ladder() -> Vec<usize> {
    dyadic_ladder(8, 20)
}
fn default_levels() -> usize {
    128
}
fn default_level_fraction() -> f64 {
    0.8
}
fn default_thetas() -> Vec<f64> {
    let mut t: Vec<f64> = (1..=16).map(|k| k as f64 * PI / 17.0).collect();
    t.push(PI / 2.0);
    t
}
fn default_theta_levels() -> usize {
    16
}
fn default_tolerance() -> f64 {
    0.1
}
fn default_slice_radius() -> f64 {
    1.0 / 2048.0
}
fn default_band_start() -> f64 {
    1.0
}
fn default_band_count() -> usize {
    6
}

/// Everything a probe needs. Serialized verbatim into every record.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub base: FunctionSpec,
    pub embedding: EmbeddingSpec,
    /// Exponent of the probe space, and of `Φ`.
    pub alpha: f64,
    /// Centre of the probe ball; empty means the origin.
    #[serde(default)]
    pub t0: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Ascending dyadic resolutions; the last one is the sampling grid.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    /// Scale window of the level-set fits; `None` uses the whole ladder.
    #[serde(default)]
    pub window: Option<Range<usize>>,
    /// Number of levels per sample.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Levels are spread over this central fraction of the range of `f_t`.
    #[serde(default = "default_level_fraction")]
    pub level_fraction: f64,
    /// Band constant of the level-set fits; `None` uses the sampled Hölder constant of each `f_t`.
    #[serde(default)]
    pub band_constant: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub part1_tolerance: f64,
    #[serde(default = "default_tolerance")]
    pub part2_tolerance: f64,
    /// Angles of the slice sweep.
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// Levels per angle in the slice sweep.
    #[serde(default = "default_theta_levels")]
    pub theta_levels: usize,
    /// Slice band half-width as a fraction of the projected range.
    #[serde(default = "default_slice_radius")]
    pub slice_radius: f64,
    /// First Fourier band starts at `band_start · 2π / width` of the projected range.
    #[serde(default = "default_band_start")]
    pub band_start: f64,
    #[serde(default = "default_band_count")]
    pub band_count: usize,
}

impl ProbeConfig {
    /// The Takagi-type probe: `b = 2`, lacunary `Φ` with `λ = 4`.
    pub fn takagi(alpha: f64) -> Self {
        Self {
            base: FunctionSpec::Takagi { base: 2, alpha },
            embedding: EmbeddingSpec::Lacunary { lambda: 4, delta: None },
            alpha,
            t0: Vec::new(),
            rho: default_rho(),
            samples: default_samples(),
            seed: 0,
            ladder: default_ladder(),
            window: None,
            levels: default_levels(),
            level_fraction: default_level_fraction(),
            band_constant: None,
            part1_tolerance: default_tolerance(),
            part2_tolerance: default_tolerance(),
            thetas: default_thetas(),
            theta_levels: default_theta_levels(),
            slice_radius: default_slice_radius(),
            band_start: default_band_start(),
            band_count: default_band_count(),
        }
    }

    /// An unperturbed control: one sample, `f_t = f`.
    pub fn control(base: FunctionSpec, alpha: f64) -> Self {
        Self {
            base,
            embedding: EmbeddingSpec::None,
            samples: 1,
            ..Self::takagi(alpha)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.rho > 0.0) {
            return Err(invalid("rho", format!("must be positive, got {}", self.rho)));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "at least one sample is required"));
        }
        if self.ladder.len() < 4 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("ladder", "need at least 4 strictly ascending resolutions"));
        }
        let finest = self.finest();
        if !finest.is_power_of_two() || finest < 4 {
            return Err(invalid(
                "ladder",
                "the finest resolution must be a power of two, at least 4",
            ));
        }
        if self.ladder.iter().any(|&m| m == 0 || finest % m != 0) {
            return Err(invalid("ladder", "every resolution must divide the finest"));
        }
        if let Some(w) = &self.window {
            if w.end > self.ladder.len() || w.len() < 4 {
                return Err(invalid("window", "window must select at least 4 ladder entries"));
            }
        }
        if self.levels == 0 {
            return Err(invalid("levels", "at least one level is required"));
        }
        if !(self.level_fraction > 0.0 && self.level_fraction <= 1.0) {
            return Err(invalid("level_fraction", "must lie in (0, 1]"));
        }
        if let Some(c) = self.band_constant {
            if !(c >= 0.0) {
                return Err(invalid("band_constant", "must be nonnegative"));
            }
        }
        if !(self.slice_radius > 0.0) {
            return Err(invalid("slice_radius", "must be positive"));
        }
        if !(self.band_start > 0.0) || self.band_count < 4 {
            return Err(invalid("band_count", "need a positive band start and at least 4 bands"));
        }
        if self.thetas.iter().any(|t| !(*t > 0.0 && *t < PI)) {
            return Err(invalid("thetas", "angles must lie in (0, π)"));
        }
        Ok(())
    }

    pub fn finest(&self) -> usize {
        *self.ladder.last().unwrap_or(&0)
    }

    fn fit_window(&self) -> Range<usize> {
        self.window.clone().unwrap_or(0..self.ladder.len())
    }

    /// Exponent shared by `f` and `Φ`; the band width scales with it.
    fn band_alpha(&self) -> f64 {
        match self.embedding {
            EmbeddingSpec::None => self.base.alpha(),
            _ => self.base.alpha().min(self.alpha),
        }
    }
}

/// `M` points uniform in the max-norm ball `B(t0, ρ) ⊂ R^d`, deterministic per seed.
pub fn sample_probe(config: &ProbeConfig, dim: usize) -> Result<Vec<Vec<f64>>> {
    if !config.t0.is_empty() && config.t0.len() != dim {
        return Err(crate::Error::DimensionMismatch {
            expected: dim,
            actual: config.t0.len(),
        });
    }
    if !(config.rho >= 0.0) {
        return Err(invalid("rho", "must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let centre = |k: usize| config.t0.get(k).copied().unwrap_or(0.0);
    Ok((0..config.samples)
        .map(|_| {
            (0..dim)
                .map(|k| {
                    let u: f64 = rng.random_range(-1.0..=1.0);
                    centre(k) + config.rho * u
                })
                .collect()
        })
        .collect())
}

/// Shared per-run state: base and embedding sampled once on the finest grid.
pub struct ProbeSpace {
    config: ProbeConfig,
    n: usize,
    base_values: Vec<f64>,
    embedding: Option<Arc<SnowflakeEmbedding>>,
    embedding_values: Option<EmbeddingSamples>,
    points: Vec<Vec<f64>>,
}

impl ProbeSpace {
    pub fn new(config: &ProbeConfig) -> Result<Self> {
        config.validate()?;
        let n = config.finest();
        let base = config.base.build()?;
        let embedding = config.embedding.build(config.alpha, n)?.map(Arc::new);
        let embedding_values = embedding.as_ref().map(|e| e.sample(n));
        let dim = embedding.as_ref().map_or(0, |e| e.dim());
        let points = sample_probe(config, dim)?;
        Ok(Self {
            config: config.clone(),
            n,
            base_values: base.sample(n),
            embedding,
            embedding_values,
            points,
        })
    }

    pub fn config(&self) -> &ProbeConfig {
        &self.config
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.embedding.as_ref().map_or(0, |e| e.dim())
    }

    pub fn embedding(&self) -> Option<&Arc<SnowflakeEmbedding>> {
        self.embedding.as_ref()
    }

    /// `f_t` on the closed grid `i/n`.
    pub fn values(&self, t: &[f64]) -> Vec<f64> {
        match &self.embedding_values {
            None => self.base_values.clone(),
            Some(es) => self.base_values.iter().zip(es.project(t)).map(|(a, b)| a + b).collect(),
        }
    }

    fn band_constant(&self, values: &[f64]) -> f64 {
        self.config.band_constant.unwrap_or_else(|| {
            let stride = (self.n / HOLDER_ESTIMATE_GRID).max(1);
            let sub: Vec<f64> = values.iter().step_by(stride).copied().collect();
            holder_ratio_max(&sub, self.config.band_alpha())
        })
    }

    fn levels(&self, values: &[f64]) -> Vec<f64> {
        let (lo, hi) = range_of(values);
        spread_levels(lo, hi, self.config.levels, self.config.level_fraction)
    }
}

fn range_of(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn spread_levels(lo: f64, hi: f64, count: usize, fraction: f64) -> Vec<f64> {
    let margin = 0.5 * (1.0 - fraction) * (hi - lo);
    let (a, b) = (lo + margin, hi - margin);
    if count == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..count)
        .map(|k| a + (b - a) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Midpoint lift of `L¹` on the grid of size `m` read off closed-grid values of size `n`.
pub fn lift_from_grid(values: &[f64], m: usize) -> Result<Measure2> {
    let n = values.len().saturating_sub(1);
    if m == 0 || n % (2 * m) != 0 {
        return Err(invalid(
            "m",
            format!("lift size {m} needs 2m to divide the grid size {n}"),
        ));
    }
    let stride = n / m;
    let points = (0..m)
        .map(|i| [(i as f64 + 0.5) / m as f64, values[i * stride + stride / 2]])
        .collect();
    Measure2::new(points, vec![1.0 / m as f64; m])
}

/// `μ^{π/2} = f_*L¹` from the same lift.
fn vertical_projection(values: &[f64], m: usize) -> Result<Measure1> {
    let n = values.len().saturating_sub(1);
    let stride = n / m;
    Measure1::new(
        (0..m).map(|i| [values[i * stride + stride / 2]]).collect(),
        vec![1.0 / m as f64; m],
    )
}

/// One CSV table of a record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn fraction(passed: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        passed as f64 / total as f64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Part1Sample {
    pub max_slope: f64,
    pub argmax_level: f64,
    pub undefined_levels: usize,
    pub band_constant: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Part1Report {
    pub samples: usize,
    pub rho: f64,
    pub ladder: Vec<usize>,
    pub window: Range<usize>,
    pub threshold: f64,
    pub tolerance: f64,
    pub pass_fraction: f64,
    pub per_sample: Vec<Part1Sample>,
    /// Level slopes: one row per `(sample, level)`. Persisted as CSV.
    #[serde(skip)]
    pub levels: Table,
}

impl Part1Report {
    /// Pass fraction under a different tolerance, from the stored maxima.
    pub fn pass_fraction_at(&self, tolerance: f64) -> f64 {
        let threshold = self.threshold - self.tolerance + tolerance;
        fraction(
            self.per_sample.iter().filter(|s| s.max_slope <= threshold).count(),
            self.samples,
        )
    }
}

/// Largest level-set slope of each `f_t` over the level grid, against `1 - α + tol`.
pub fn verify_part1(config: &ProbeConfig) -> Result<Part1Report> {
    if config.alpha >= 0.5 {
        return Err(invalid(
            "alpha",
            format!("part 1 needs alpha < 1/2, got {}", config.alpha),
        ));
    }
    let space = ProbeSpace::new(config)?;
    verify_part1_in(&space)
}

pub fn verify_part1_in(space: &ProbeSpace) -> Result<Part1Report> {
    let config = &space.config;
    let threshold = 1.0 - config.alpha + config.part1_tolerance;
    let window = config.fit_window();
    let results: Vec<(Part1Sample, Vec<Vec<f64>>)> = space
        .points
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let values = space.values(t);
            let c = space.band_constant(&values);
            let sampler = LevelSampler::new(&values, space.n, &config.ladder, config.band_alpha())?;
            let mut best = (f64::NEG_INFINITY, f64::NAN);
            let mut undefined = 0;
            let mut rows = Vec::with_capacity(config.levels);
            for y in space.levels(&values) {
                let fit = sampler.level_dim(y, c, Some(window.clone()))?;
                if fit.undefined {
                    undefined += 1;
                } else if fit.slope > best.0 {
                    best = (fit.slope, y);
                }
                rows.push(vec![k as f64, y, fit.slope, fit.stderr, fit.r2, flag(fit.undefined)]);
            }
            Ok((
                Part1Sample {
                    max_slope: best.0,
                    argmax_level: best.1,
                    undefined_levels: undefined,
                    band_constant: c,
                    passed: best.0 <= threshold,
                },
                rows,
            ))
        })
        .collect::<Result<_>>()?;
    let mut levels = Table::new("levels", &["sample", "y", "slope", "stderr", "r2", "undefined"]);
    let mut per_sample = Vec::with_capacity(results.len());
    for (s, rows) in results {
        per_sample.push(s);
        levels.rows.extend(rows);
    }
    Ok(Part1Report {
        samples: per_sample.len(),
        rho: config.rho,
        ladder: config.ladder.clone(),
        window,
        threshold,
        tolerance: config.part1_tolerance,
        pass_fraction: fraction(per_sample.iter().filter(|s| s.passed).count(), per_sample.len()),
        per_sample,
        levels,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Part2Sample {
    /// `μ^{π/2}`-weighted fraction of levels with a large slope and a stable slice energy.
    pub weighted_fraction: f64,
    pub slope_ok_levels: usize,
    pub stable_levels: usize,
    pub passed: bool,
    /// Fraction of stable slices per angle of the sweep, in `thetas` order.
    pub theta_stable_fraction: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Part2Report {
    pub samples: usize,
    pub rho: f64,
    pub ladder: Vec<usize>,
    pub slope_threshold: f64,
    pub energy_exponent: f64,
    pub slice_radius: f64,
    pub thetas: Vec<f64>,
    pub pass_fraction: f64,
    pub per_sample: Vec<Part2Sample>,
    #[serde(skip)]
    pub levels: Table,
}

/// Levels whose set has slope `≥ 1 - α - tol` and whose `π/2` slice carries a
/// stable energy at `s = 1 - α - 0.05`, weighted by the projected density.
pub fn verify_part2(config: &ProbeConfig) -> Result<Part2Report> {
    let space = ProbeSpace::new(config)?;
    verify_part2_in(&space)
}

pub fn verify_part2_in(space: &ProbeSpace) -> Result<Part2Report> {
    let config = &space.config;
    let slope_threshold = 1.0 - config.alpha - config.part2_tolerance;
    let s = 1.0 - config.alpha - 0.05;
    let window = config.fit_window();
    let lift_size = space.n / 2;
    let results: Vec<(Part2Sample, Vec<Vec<f64>>)> = space
        .points
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let values = space.values(t);
            let c = space.band_constant(&values);
            let sampler = LevelSampler::new(&values, space.n, &config.ladder, config.band_alpha())?;
            let lift = lift_from_grid(&values, lift_size)?;
            let vertical = SliceIndex::new(&lift, PI / 2.0);
            let (lo, hi) = vertical.hull().unwrap_or((0.0, 0.0));
            let r = slice_radius(config, lo, hi);
            let (mut total, mut good) = (0.0, 0.0);
            let (mut slope_ok, mut stable) = (0, 0);
            let mut rows = Vec::with_capacity(config.levels);
            for y in space.levels(&values) {
                let fit = sampler.level_dim(y, c, Some(window.clone()))?;
                let row = vertical.row(y, r, &[s])?;
                let a = !fit.undefined && fit.slope >= slope_threshold;
                let b = row.stable(0);
                slope_ok += a as usize;
                stable += b as usize;
                total += row.density;
                if a && b {
                    good += row.density;
                }
                rows.push(vec![
                    k as f64,
                    y,
                    fit.slope,
                    row.density,
                    row.energies[0],
                    row.stability[0],
                    flag(a && b),
                ]);
            }
            let weighted_fraction = if total > 0.0 { good / total } else { 0.0 };
            let theta_stable_fraction = config
                .thetas
                .iter()
                .map(|&theta| theta_sweep(&lift, theta, config, s))
                .collect::<Result<_>>()?;
            Ok((
                Part2Sample {
                    weighted_fraction,
                    slope_ok_levels: slope_ok,
                    stable_levels: stable,
                    passed: weighted_fraction >= PART2_MIN_FRACTION,
                    theta_stable_fraction,
                },
                rows,
            ))
        })
        .collect::<Result<_>>()?;
    let mut levels = Table::new(
        "levels",
        &[
            "sample",
            "y",
            "slope",
            "density",
            "slice_energy",
            "stability",
            "qualifies",
        ],
    );
    let mut per_sample = Vec::with_capacity(results.len());
    for (p, rows) in results {
        per_sample.push(p);
        levels.rows.extend(rows);
    }
    Ok(Part2Report {
        samples: per_sample.len(),
        rho: config.rho,
        ladder: config.ladder.clone(),
        slope_threshold,
        energy_exponent: s,
        slice_radius: config.slice_radius,
        thetas: config.thetas.clone(),
        pass_fraction: fraction(per_sample.iter().filter(|p| p.passed).count(), per_sample.len()),
        per_sample,
        levels,
    })
}

fn slice_radius(config: &ProbeConfig, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if width > 0.0 {
        config.slice_radius * width
    } else {
        config.slice_radius
    }
}

fn theta_sweep(lift: &Measure2, theta: f64, config: &ProbeConfig, s: f64) -> Result<f64> {
    if config.theta_levels == 0 {
        return Ok(0.0);
    }
    let index = SliceIndex::new(lift, theta);
    let (lo, hi) = index.hull().unwrap_or((0.0, 0.0));
    let r = slice_radius(config, lo, hi);
    let ys = spread_levels(lo, hi, config.theta_levels, config.level_fraction);
    let mut stable = 0;
    for y in &ys {
        stable += index.row(*y, r, &[s])?.stable(0) as usize;
    }
    Ok(fraction(stable, ys.len()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SobolevSample {
    pub eta: f64,
    pub r2: f64,
    pub rejected: bool,
    pub last_ratio: f64,
    pub truncated_integral: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SobolevReport {
    pub samples: usize,
    pub rho: f64,
    pub beta: f64,
    pub band_count: usize,
    pub pass_fraction: f64,
    /// Sample mean of the largest truncated integral.
    pub mean_truncated_integral: f64,
    pub per_sample: Vec<SobolevSample>,
    #[serde(skip)]
    pub bands: Table,
}

/// Fourier decay and Sobolev traces of `μ_t^{π/2}`: a sample passes when
/// `η̂ > β + 1`, the fit is accepted and the doubling trace is bounded.
pub fn verify_sobolev(config: &ProbeConfig, beta: f64) -> Result<SobolevReport> {
    if config.alpha >= 0.5 {
        return Err(invalid("alpha", format!("needs alpha < 1/2, got {}", config.alpha)));
    }
    if !(beta > 1.0) {
        return Err(invalid("beta", format!("needs beta + 1 > 2, got beta = {beta}")));
    }
    let space = ProbeSpace::new(config)?;
    verify_sobolev_in(&space, beta)
}

pub fn verify_sobolev_in(space: &ProbeSpace, beta: f64) -> Result<SobolevReport> {
    let config = &space.config;
    let lift_size = space.n / 2;
    let results: Vec<(SobolevSample, Vec<Vec<f64>>)> = space
        .points
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let values = space.values(t);
            let mu = vertical_projection(&values, lift_size)?;
            let (lo, hi) = mu.hull().unwrap_or((0.0, 0.0));
            // an atom has no natural scale; fall back to unit width
            let width = if hi > lo { hi - lo } else { 1.0 };
            let bands = DyadicBands {
                start: config.band_start * 2.0 * PI / width,
                count: config.band_count,
            };
            let fit = decay_exponent(&mu, &bands, lift_size)?;
            let trace = sobolev_integral(&mu, beta, bands.start, bands.count)?;
            let last_ratio = trace.last_ratio().unwrap_or(f64::NAN);
            let rows = fit
                .profile
                .band_averages
                .iter()
                .map(|&(c, m)| vec![k as f64, c, m])
                .collect();
            Ok((
                SobolevSample {
                    eta: fit.eta,
                    r2: fit.fit.r2,
                    rejected: fit.rejected,
                    last_ratio,
                    truncated_integral: *trace.integrals.last().unwrap_or(&f64::NAN),
                    passed: fit.eta > beta + 1.0 && !fit.rejected && last_ratio <= SOBOLEV_RATIO_BOUND,
                },
                rows,
            ))
        })
        .collect::<Result<_>>()?;
    let mut bands = Table::new("bands", &["sample", "centre", "mean_power"]);
    let mut per_sample = Vec::with_capacity(results.len());
    for (s, rows) in results {
        per_sample.push(s);
        bands.rows.extend(rows);
    }
    let mean_truncated_integral =
        per_sample.iter().map(|s| s.truncated_integral).sum::<f64>() / per_sample.len().max(1) as f64;
    Ok(SobolevReport {
        samples: per_sample.len(),
        rho: config.rho,
        beta,
        band_count: config.band_count,
        pass_fraction: fraction(per_sample.iter().filter(|s| s.passed).count(), per_sample.len()),
        mean_truncated_integral,
        per_sample,
        bands,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergySample {
    pub energy: f64,
    pub energy_half: f64,
    pub diverging: bool,
    pub graph_dim: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    pub samples: usize,
    pub rho: f64,
    pub beta: f64,
    pub exponent: f64,
    pub n: usize,
    pub mean_energy: f64,
    pub mean_energy_half: f64,
    /// `mean_energy / mean_energy_half`.
    pub stability_ratio: f64,
    pub stable: bool,
    pub divergence_flags: usize,
    pub per_sample: Vec<EnergySample>,
}

/// Monte Carlo average of `I_{2-β}(μ_t)` over the probe at lifts of size
/// `n/2` and `n/4` of the finest grid `n`.
pub fn verify_energy_finiteness(config: &ProbeConfig, beta: f64) -> Result<EnergyReport> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    let space = ProbeSpace::new(config)?;
    let s = 2.0 - beta;
    let n = space.n / 2;
    let graph_ladder: Vec<usize> = config.ladder.iter().copied().filter(|&m| m <= space.n / 4).collect();
    // short ladders fit over every scale rather than the middle two-thirds
    let graph_window = match default_window(graph_ladder.len()) {
        w if w.len() >= 4 => w,
        _ => 0..graph_ladder.len(),
    };
    let per_sample: Vec<EnergySample> = space
        .points
        .par_iter()
        .map(|t| {
            let values = space.values(t);
            let full = energy(&lift_from_grid(&values, n)?, s)?;
            let half = energy(&lift_from_grid(&values, n / 2)?, s)?;
            let graph_dim = if graph_ladder.len() >= 4 {
                graph_dim_sampled(&values, &graph_ladder, Some(graph_window.clone()))?.slope
            } else {
                f64::NAN
            };
            Ok(EnergySample {
                energy: full.value,
                energy_half: half.value,
                diverging: full.diverging,
                graph_dim,
            })
        })
        .collect::<Result<_>>()?;
    let m = per_sample.len().max(1) as f64;
    let mean_energy = per_sample.iter().map(|s| s.energy).sum::<f64>() / m;
    let mean_energy_half = per_sample.iter().map(|s| s.energy_half).sum::<f64>() / m;
    let stability_ratio = mean_energy / mean_energy_half;
    Ok(EnergyReport {
        samples: per_sample.len(),
        rho: config.rho,
        beta,
        exponent: s,
        n,
        mean_energy,
        mean_energy_half,
        stability_ratio,
        stable: stability_ratio.is_finite() && (stability_ratio - 1.0).abs() <= ENERGY_STABILITY,
        divergence_flags: per_sample.iter().filter(|s| s.diverging).count(),
        per_sample,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjectureReport {
    /// Pass fractions below hold only insofar as the candidate is bi-Hölder.
    pub conditional_on: String,
    pub base: u32,
    pub alpha: f64,
    pub budget: usize,
    pub candidate: WeierstrassEmbeddingSpec,
    pub c1: f64,
    pub c2: f64,
    pub initial_c1: f64,
    pub c1_trace: Vec<f64>,
    pub part1: Option<Part1Report>,
    pub part2: Part2Report,
}

/// Settings of the conjecture probe beyond `(b, α, seed, budget)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureConfig {
    #[serde(default = "default_generators")]
    pub generators: usize,
    #[serde(default)]
    pub search: Option<SearchConfig>,
    #[serde(default = "default_conjecture_samples")]
    pub samples: usize,
    #[serde(default = "default_conjecture_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_conjecture_levels")]
    pub levels: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_generators() -> usize {
    2
}
fn default_conjecture_samples() -> usize {
    8
}
fn default_conjecture_ladder() -> Vec<usize> {
    dyadic_ladder(6, 16)
}
fn default_conjecture_levels() -> usize {
    32
}

impl Default for ConjectureConfig {
    fn default() -> Self {
        Self {
            generators: default_generators(),
            search: None,
            samples: default_conjecture_samples(),
            ladder: default_conjecture_ladder(),
            levels: default_conjecture_levels(),
            rho: default_rho(),
        }
    }
}

/// Searches for a Weierstrass embedding, then probes the dimension claims for
/// `W = W_{cos} + <t, Φ>` with `Φ` the candidate. Part 1 runs only for `α < 1/2`.
pub fn run_conjecture_probe(
    base: u32,
    alpha: f64,
    seed: u64,
    budget: usize,
    settings: &ConjectureConfig,
) -> Result<ConjectureReport> {
    let search = settings.search.clone().unwrap_or_default();
    let outcome = search_embedding_with(base, alpha, settings.generators, budget, seed, &search)?;
    let mut config = ProbeConfig::takagi(alpha);
    config.base = FunctionSpec::Weierstrass {
        base,
        alpha,
        generator: PeriodicGenerator::Cosine,
    };
    config.embedding = EmbeddingSpec::Weierstrass {
        spec: outcome.spec.clone(),
    };
    config.seed = seed;
    config.samples = settings.samples;
    config.ladder = settings.ladder.clone();
    config.levels = settings.levels;
    config.rho = settings.rho;
    config.thetas = Vec::new();
    let space = ProbeSpace::new(&config)?;
    let part1 = if alpha < 0.5 {
        Some(verify_part1_in(&space)?)
    } else {
        None
    };
    let part2 = verify_part2_in(&space)?;
    Ok(ConjectureReport {
        conditional_on: format!(
            "candidate Weierstrass embedding with sampled c1 = {:.6} down to grid {}",
            outcome.certificate.c1, outcome.certificate.grid_size
        ),
        base,
        alpha,
        budget,
        candidate: outcome.spec,
        c1: outcome.certificate.c1,
        c2: outcome.certificate.c2,
        initial_c1: outcome.initial_c1,
        c1_trace: outcome.best_trace,
        part1,
        part2,
    })
}

/// A persisted run: JSON summary plus CSV tables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: String,
    pub artifact_version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Kept out of `summary.json` so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl ExperimentRecord {
    pub fn new(kind: &str, seed: u64, config: &impl Serialize, summary: &impl Serialize) -> Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            seed,
            config: serde_json::to_value(config)?,
            summary: serde_json::to_value(summary)?,
            tables: Vec::new(),
            wall_clock_seconds: 0.0,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.tables.push(table);
        self
    }

    /// First 16 hex digits of the SHA-256 of kind, version and config.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.as_bytes());
        h.update([0]);
        h.update(self.artifact_version.as_bytes());
        h.update([0]);
        h.update(self.config.to_string().as_bytes());
        hex::encode(h.finalize())[..16].to_string()
    }

    pub fn directory(&self, root: &Path) -> PathBuf {
        root.join(format!("{}-{}", self.kind, self.config_hash()))
    }

    /// Writes `summary.json`, one CSV per table and `timing.json`; returns the directory.
    pub fn persist(&self, root: &Path) -> Result<PathBuf> {
        let dir = self.directory(root);
        std::fs::create_dir_all(&dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
        }
        let mut timing = String::new();
        let _ = writeln!(timing, "{{\"wall_clock_seconds\": {}}}", self.wall_clock_seconds);
        std::fs::write(dir.join("timing.json"), timing)?;
        Ok(dir)
    }
}

/// Quantiles `(min, q25, median, q75, max)` of finite values.
pub fn quantiles(values: &[f64]) -> Option<[f64; 5]> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    Some([q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(base: FunctionSpec) -> ProbeConfig {
        let mut c = ProbeConfig::control(base, 0.4);
        c.ladder = dyadic_ladder(6, 14);
        c.levels = 8;
        c.thetas = Vec::new();
        c
    }

    #[test]
    fn probe_sampling_is_seeded() {
        let mut c = ProbeConfig::takagi(0.4);
        c.samples = 5;
        c.seed = 9;
        let a = sample_probe(&c, 3).unwrap();
        assert_eq!(a, sample_probe(&c, 3).unwrap());
        assert!(a.iter().flatten().all(|v| v.abs() <= c.rho));
        c.samples = 1;
        c.rho = 0.0;
        c.t0 = vec![0.5, -1.0, 2.0];
        assert_eq!(sample_probe(&c, 3).unwrap(), vec![vec![0.5, -1.0, 2.0]]);
    }

    #[test]
    fn probe_means_concentrate() {
        let mut c = ProbeConfig::takagi(0.4);
        c.samples = 10_000;
        c.rho = 1.0;
        let pts = sample_probe(&c, 3).unwrap();
        for k in 0..3 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64;
            assert!(mean.abs() < 0.02, "{mean}");
        }
    }

    #[test]
    fn controls_behave() {
        let zero = verify_part1(&small(FunctionSpec::Zero)).unwrap();
        assert!((zero.per_sample[0].max_slope - 1.0).abs() < 0.05);
        assert_eq!(zero.pass_fraction, 0.0);
        let id = verify_part1(&small(FunctionSpec::Identity)).unwrap();
        assert!(id.per_sample[0].max_slope.abs() < 0.1);
        assert_eq!(id.pass_fraction, 1.0);
        let id2 = verify_part2(&small(FunctionSpec::Identity)).unwrap();
        assert!(id2.per_sample[0].weighted_fraction < 0.05);
    }

    #[test]
    fn config_validation_names_keys() {
        let mut c = ProbeConfig::takagi(0.4);
        c.rho = 0.0;
        assert!(c.validate().unwrap_err().to_string().contains("rho"));
        let mut c = ProbeConfig::takagi(1.5);
        c.alpha = 1.5;
        assert!(c.validate().unwrap_err().to_string().contains("alpha"));
        assert!(verify_part1(&ProbeConfig::takagi(0.6)).is_err());
    }

    #[test]
    fn lift_reads_midpoints() {
        let values: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let mu = lift_from_grid(&values, 4).unwrap();
        assert_eq!(
            mu.points(),
            &[[0.125, 0.125], [0.375, 0.375], [0.625, 0.625], [0.875, 0.875]]
        );
        assert!(lift_from_grid(&values, 3).is_err());
    }
}
