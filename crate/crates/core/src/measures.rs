//! Weighted point clouds standing in for pushforward measures: lifts of
//! Lebesgue measure onto graphs, their projections, Fourier transforms,
//! decay fits, Sobolev-type integrals, Riesz energies and local dimensions.
//!
//! Distances in the plane use the maximum norm throughout.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::functions::HolderFunction;

/// Convergence ratios above this flag an energy as diverging: the discrete
/// sum grows at least like `n^{1/4}`.
pub const DIVERGENCE_RATIO: f64 = 1.189_207_115_002_721;

/// Decay fits with a coefficient of determination below this are rejected.
pub const MIN_DECAY_R2: f64 = 0.5;

/// Sample frequencies per dyadic band.
pub const SAMPLES_PER_BAND: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Lattice {
    start: f64,
    step: f64,
}

/// A finite weighted point cloud in `R^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<const D: usize> {
    points: Vec<[f64; D]>,
    weights: Vec<f64>,
    total_mass: f64,
    // set only when points form an arithmetic progression with equal weights
    lattice: Option<Lattice>,
}

pub type Measure1 = DiscreteMeasure<1>;
pub type Measure2 = DiscreteMeasure<2>;

impl<const D: usize> DiscreteMeasure<D> {
    pub fn new(points: Vec<[f64; D]>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid(
                "weights",
                format!("weights must be positive and finite, got {w}"),
            ));
        }
        if points.iter().flatten().any(|p| !p.is_finite()) {
            return Err(invalid("points", "positions must be finite"));
        }
        Ok(Self::from_parts(points, weights))
    }

    fn from_parts(points: Vec<[f64; D]>, weights: Vec<f64>) -> Self {
        let total_mass = weights.iter().sum();
        Self {
            points,
            weights,
            total_mass,
            lattice: None,
        }
    }

    /// The zero measure.
    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new())
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        let mut out = Self::from_parts(self.points.clone(), weights);
        out.lattice = self.lattice;
        out
    }

    /// Every other point (even indices) with doubled weight.
    pub fn half_resolution(&self) -> Self {
        let points = self.points.iter().step_by(2).copied().collect();
        let weights = self.weights.iter().step_by(2).map(|w| 2.0 * w).collect();
        Self::from_parts(points, weights)
    }

    /// Largest max-norm distance between points.
    pub fn diameter(&self) -> f64 {
        (0..D)
            .map(|k| {
                let (lo, hi) = self
                    .points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[k]), hi.max(p[k]))
                    });
                if hi >= lo {
                    hi - lo
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }

    /// Writes `D` position columns and a weight column with a header row.
    /// Values use the shortest representation that parses back to the same bits.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let header = match D {
            1 => "position,weight",
            2 => "x,y,weight",
            _ => "positions...,weight",
        };
        writeln!(out, "{header}")?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            for c in p {
                write!(out, "{c:?},")?;
            }
            writeln!(out, "{w:?}")?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != D + 1 {
                return Err(Error::MalformedCsv {
                    line: lineno + 1,
                    reason: format!("expected {} columns, found {}", D + 1, fields.len()),
                });
            }
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::MalformedCsv {
                    line: lineno + 1,
                    reason: e.to_string(),
                })
            };
            let mut p = [0.0; D];
            for (k, c) in p.iter_mut().enumerate() {
                *c = parse(fields[k])?;
            }
            points.push(p);
            weights.push(parse(fields[D])?);
        }
        Self::new(points, weights)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

impl Measure1 {
    /// Mass `1/n` at each midpoint `(i + 1/2)/n` of `[0, 1]`.
    pub fn uniform_grid(n: usize) -> Self {
        let n = n.max(1);
        let step = 1.0 / n as f64;
        let points = (0..n).map(|i| [(i as f64 + 0.5) * step]).collect();
        let weights = vec![step; n];
        let mut m = Self::from_parts(points, weights);
        m.lattice = Some(Lattice {
            start: 0.5 * step,
            step,
        });
        m
    }

    /// Midpoint discretization of a density on `[0, 1]`; zero cells are dropped.
    pub fn from_density(n: usize, density: impl Fn(f64) -> f64) -> Result<Self> {
        let step = 1.0 / n as f64;
        let (points, weights): (Vec<_>, Vec<_>) = (0..n)
            .filter_map(|i| {
                let x = (i as f64 + 0.5) * step;
                let w = density(x) * step;
                (w > 0.0).then_some(([x], w))
            })
            .unzip();
        Self::new(points, weights)
    }

    /// A single atom.
    pub fn dirac(at: f64, mass: f64) -> Result<Self> {
        Self::new(vec![[at]], vec![mass])
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p[0])
    }

    /// `(min, max)` of the positions.
    pub fn hull(&self) -> Option<(f64, f64)> {
        if self.is_empty() {
            return None;
        }
        Some(
            self.positions()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p))),
        )
    }

    /// Positions scaled by `a`.
    pub fn dilate(&self, a: f64) -> Self {
        let points = self.points.iter().map(|p| [p[0] * a]).collect();
        Self::from_parts(points, self.weights.clone())
    }

    pub fn mass_index(&self) -> MassIndex {
        MassIndex::new(self)
    }
}

impl Measure2 {
    pub fn from_graph(xs: &[f64], ys: &[f64], weight: f64) -> Result<Self> {
        let points = xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect();
        Self::new(points, vec![weight; xs.len()])
    }
}

/// Sorted positions with prefix masses, for ball-mass queries in `O(log n)`.
#[derive(Clone, Debug)]
pub struct MassIndex {
    sorted: Vec<f64>,
    // prefix[k] = mass of the first k sorted points
    prefix: Vec<f64>,
}

impl MassIndex {
    pub fn new(mu: &Measure1) -> Self {
        let mut pairs: Vec<(f64, f64)> = mu.points.iter().map(|p| p[0]).zip(mu.weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(pairs.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &(_, w) in &pairs {
            acc += w;
            prefix.push(acc);
        }
        Self {
            sorted: pairs.into_iter().map(|p| p.0).collect(),
            prefix,
        }
    }

    /// Mass of the open ball `(y - r, y + r)`.
    pub fn ball_mass(&self, y: f64, r: f64) -> f64 {
        let lo = self.sorted.partition_point(|&p| p <= y - r);
        let hi = self.sorted.partition_point(|&p| p < y + r);
        if hi > lo {
            self.prefix[hi] - self.prefix[lo]
        } else {
            0.0
        }
    }
}

/// Lift of Lebesgue measure onto the graph: mass `1/n` at `(x_i, f(x_i))`,
/// `x_i = (i + 1/2)/n`.
pub fn lift_measure(f: &HolderFunction, n: usize) -> Measure2 {
    let n = n.max(1);
    let step = 1.0 / n as f64;
    let points: Vec<[f64; 2]> = (0..n)
        .into_par_iter()
        .with_min_len(4096)
        .map(|i| {
            let x = (i as f64 + 0.5) * step;
            [x, f.eval(x)]
        })
        .collect();
    Measure2::from_parts(points, vec![step; n])
}

/// Pushforward under `proj_θ(x, y) = x cos θ + y sin θ`.
pub fn project(mu: &Measure2, theta: f64) -> Measure1 {
    let (s, c) = theta.sin_cos();
    let points = mu.points.iter().map(|p| [p[0] * c + p[1] * s]).collect();
    Measure1::from_parts(points, mu.weights.clone())
}

const FOURIER_CHUNK: usize = 1 << 14;

/// `μ̂(ξ) = Σ_j w_j e^{iξ y_j}`.
pub fn fourier(mu: &Measure1, xi: f64) -> Complex64 {
    if xi == 0.0 {
        return Complex64::new(mu.total_mass, 0.0);
    }
    if let Some(lat) = mu.lattice {
        return lattice_transform(lat, mu.weights[0], mu.len(), xi);
    }
    let partials: Vec<Complex64> = mu
        .points
        .par_chunks(FOURIER_CHUNK)
        .zip(mu.weights.par_chunks(FOURIER_CHUNK))
        .map(|(ps, ws)| {
            ps.iter()
                .zip(ws)
                .map(|(p, w)| {
                    let (s, c) = (xi * p[0]).sin_cos();
                    Complex64::new(w * c, w * s)
                })
                .sum()
        })
        .collect();
    partials.into_iter().sum()
}

// w Σ_{j<n} e^{iξ(a + jh)} in closed form
fn lattice_transform(lat: Lattice, w: f64, n: usize, xi: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, xi * lat.start);
    let q = Complex64::from_polar(1.0, xi * lat.step);
    let denom = Complex64::new(1.0, 0.0) - q;
    if denom.norm() < 1e-12 {
        // ξh on a multiple of 2π: every term has the same phase
        return phase * w * n as f64;
    }
    let qn = Complex64::from_polar(1.0, xi * lat.step * n as f64);
    phase * w * (Complex64::new(1.0, 0.0) - qn) / denom
}

/// `μ̂` at many arbitrary frequencies.
pub fn fourier_many(mu: &Measure1, xis: &[f64]) -> Vec<Complex64> {
    if mu.lattice.is_some() || mu.len() < FOURIER_CHUNK {
        return xis.iter().map(|&xi| fourier(mu, xi)).collect();
    }
    // one pass over the points, all frequencies at once
    let k = xis.len();
    let partials: Vec<Vec<Complex64>> = mu
        .points
        .par_chunks(FOURIER_CHUNK)
        .zip(mu.weights.par_chunks(FOURIER_CHUNK))
        .map(|(ps, ws)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); k];
            for (p, w) in ps.iter().zip(ws) {
                for (a, &xi) in acc.iter_mut().zip(xis) {
                    let (s, c) = (xi * p[0]).sin_cos();
                    a.re += w * c;
                    a.im += w * s;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    for (o, &xi) in out.iter_mut().zip(xis) {
        if xi == 0.0 {
            *o = Complex64::new(mu.total_mass, 0.0);
        }
    }
    out
}

/// `μ̂` on the uniform frequency grid `ξ_k = k·dξ`, `k = 0..count`, via a
/// per-point phase recurrence.
pub fn fourier_uniform(mu: &Measure1, dxi: f64, count: usize) -> Vec<Complex64> {
    if mu.lattice.is_some() {
        return (0..count).map(|k| fourier(mu, k as f64 * dxi)).collect();
    }
    let partials: Vec<Vec<Complex64>> = mu
        .points
        .par_chunks(FOURIER_CHUNK)
        .zip(mu.weights.par_chunks(FOURIER_CHUNK))
        .map(|(ps, ws)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); count];
            for (p, &w) in ps.iter().zip(ws) {
                let rot = Complex64::from_polar(1.0, dxi * p[0]);
                let mut z = Complex64::new(w, 0.0);
                for a in acc.iter_mut() {
                    *a += z;
                    z *= rot;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    if let Some(first) = out.first_mut() {
        *first = Complex64::new(mu.total_mass, 0.0);
    }
    out
}

/// Dyadic frequency bands `[start·2^j, start·2^{j+1}]`, `j = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBands {
    pub start: f64,
    pub count: usize,
}

impl DyadicBands {
    pub fn ceiling(&self) -> f64 {
        self.start * 2f64.powi(self.count as i32)
    }

    /// Geometric centre of band `j`.
    pub fn center(&self, j: usize) -> f64 {
        self.start * 2f64.powf(j as f64 + 0.5)
    }

    /// Log-spaced sample frequencies strictly inside band `j`.
    pub fn samples(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let lo = self.start * 2f64.powi(j as i32);
        (0..SAMPLES_PER_BAND).map(move |k| lo * 2f64.powf((k as f64 + 0.5) / SAMPLES_PER_BAND as f64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierProfile {
    pub frequencies: Vec<f64>,
    pub values: Vec<(f64, f64)>,
    /// `(band centre, mean |μ̂|²)` per band.
    pub band_averages: Vec<(f64, f64)>,
}

pub fn fourier_profile(mu: &Measure1, bands: &DyadicBands) -> FourierProfile {
    let frequencies: Vec<f64> = (0..bands.count).flat_map(|j| bands.samples(j)).collect();
    let values = fourier_many(mu, &frequencies);
    let band_averages = values
        .chunks(SAMPLES_PER_BAND)
        .enumerate()
        .map(|(j, chunk)| {
            let mean = chunk.iter().map(|v| v.norm_sqr()).sum::<f64>() / chunk.len() as f64;
            (bands.center(j), mean)
        })
        .collect();
    FourierProfile {
        frequencies,
        values: values.iter().map(|v| (v.re, v.im)).collect(),
        band_averages,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Average decay exponent: `mean |μ̂|² ~ ξ^{-η}` over the bands.
    pub eta: f64,
    pub fit: LineFit,
    /// Set when the fit's R² is below [`MIN_DECAY_R2`].
    pub rejected: bool,
    pub profile: FourierProfile,
}

/// Least-squares slope of `log mean|μ̂|²` against `log(band centre)`, negated.
///
/// `grid_size` is the resolution of the grid the measure was sampled from; no
/// band may reach above `π·grid_size`.
pub fn decay_exponent(mu: &Measure1, bands: &DyadicBands, grid_size: usize) -> Result<DecayFit> {
    if bands.count < 4 {
        return Err(invalid("bands", format!("need at least 4 bands, got {}", bands.count)));
    }
    if !(bands.start > 0.0) {
        return Err(invalid("bands", "band start must be positive"));
    }
    if bands.ceiling() > PI * grid_size as f64 {
        return Err(invalid(
            "bands",
            format!(
                "band ceiling {} exceeds the aliasing limit π·{grid_size}",
                bands.ceiling()
            ),
        ));
    }
    let profile = fourier_profile(mu, bands);
    let (xs, ys): (Vec<f64>, Vec<f64>) = profile
        .band_averages
        .iter()
        .map(|&(c, m)| (c.ln(), m.max(f64::MIN_POSITIVE).ln()))
        .unzip();
    let fit = least_squares(&xs, &ys).ok_or_else(|| invalid("bands", "degenerate band ladder"))?;
    Ok(DecayFit {
        eta: -fit.slope,
        rejected: fit.r2 < MIN_DECAY_R2,
        fit,
        profile,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevTrace {
    pub beta: f64,
    pub cutoffs: Vec<f64>,
    pub integrals: Vec<f64>,
    /// `integrals[k] / integrals[k-1]`.
    pub ratios: Vec<f64>,
}

impl SobolevTrace {
    pub fn last_ratio(&self) -> Option<f64> {
        self.ratios.last().copied()
    }
}

/// Truncated integrals of `|ξ|^β |μ̂(ξ)|²` over `[-Ξ 2^k, Ξ 2^k]`,
/// `k = 0..=levels`, by the trapezoid rule.
///
/// `|μ̂|²` is band-limited by the diameter `D` of the support, so a step of
/// `π/2D` resolves it with a factor two to spare.
pub fn sobolev_integral(mu: &Measure1, beta: f64, cutoff: f64, levels: usize) -> Result<SobolevTrace> {
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(cutoff > 0.0) {
        return Err(invalid("cutoff", "must be positive"));
    }
    let diam = mu.diameter().max(1.0);
    let per_cutoff = ((cutoff * diam * 2.0 / PI).ceil() as usize).max(16);
    let h = cutoff / per_cutoff as f64;
    let nodes = per_cutoff << levels;
    let values = fourier_uniform(mu, h, nodes + 1);
    let integrand: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 * h).powf(beta) * v.norm_sqr())
        .collect();
    let mut cutoffs = Vec::with_capacity(levels + 1);
    let mut integrals = Vec::with_capacity(levels + 1);
    let mut running = 0.0;
    let mut done = 0usize;
    for level in 0..=levels {
        let upto = per_cutoff << level;
        for k in done..upto {
            running += 0.5 * h * (integrand[k] + integrand[k + 1]);
        }
        done = upto;
        cutoffs.push(cutoff * 2f64.powi(level as i32));
        // symmetric in ξ for real measures
        integrals.push(2.0 * running);
    }
    let ratios = integrals.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(SobolevTrace {
        beta,
        cutoffs,
        integrals,
        ratios,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub s: f64,
    /// Off-diagonal pair sum; `+∞` when distinct atoms coincide.
    pub value: f64,
    /// Same sum on the half-resolution subsample.
    pub half_value: f64,
    pub n: usize,
    /// `value / half_value`; tends to 1 for finite energies.
    pub convergence_ratio: f64,
    pub diverging: bool,
}

#[inline]
fn max_dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut d = 0.0f64;
    for k in 0..D {
        d = d.max((a[k] - b[k]).abs());
    }
    d
}

/// `Σ_{i≠j} w_i w_j ‖p_i - p_j‖^{-s}`; `+∞` if two atoms coincide.
pub fn pair_energy<const D: usize>(mu: &DiscreteMeasure<D>, s: f64) -> f64 {
    let n = mu.len();
    if n < 2 {
        return 0.0;
    }
    let rows: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .with_min_len(32)
        .map(|i| {
            let p = &mu.points[i];
            let mut acc = 0.0;
            for (q, w) in mu.points[i + 1..].iter().zip(&mu.weights[i + 1..]) {
                let d = max_dist(p, q);
                acc += w * d.powf(-s);
            }
            mu.weights[i] * acc
        })
        .collect();
    2.0 * rows.iter().sum::<f64>()
}

/// Riesz `s`-energy estimate with a half-resolution convergence check.
pub fn energy<const D: usize>(mu: &DiscreteMeasure<D>, s: f64) -> Result<EnergyEstimate> {
    if !(s > 0.0) {
        return Err(invalid("s", format!("must be positive, got {s}")));
    }
    let value = pair_energy(mu, s);
    let half_value = if mu.len() >= 4 {
        pair_energy(&mu.half_resolution(), s)
    } else {
        value
    };
    let convergence_ratio = if half_value > 0.0 { value / half_value } else { 1.0 };
    Ok(EnergyEstimate {
        s,
        value,
        half_value,
        n: mu.len(),
        convergence_ratio,
        diverging: !value.is_finite() || convergence_ratio > DIVERGENCE_RATIO,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDimension {
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    /// `None` when fewer than two balls carry mass.
    pub fit: Option<LineFit>,
}

impl LocalDimension {
    pub fn estimate(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Slope of `log μ(B(y, r))` against `log r` over a radius ladder.
pub fn local_dimension(mu: &Measure1, y: f64, radii: &[f64]) -> Result<LocalDimension> {
    local_dimension_indexed(&mu.mass_index(), y, radii)
}

pub fn local_dimension_indexed(index: &MassIndex, y: f64, radii: &[f64]) -> Result<LocalDimension> {
    if radii.len() < 4 {
        return Err(invalid("radii", format!("need at least 4 radii, got {}", radii.len())));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("radii", "radii must be positive"));
    }
    let masses: Vec<f64> = radii.iter().map(|&r| index.ball_mass(y, r)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&masses)
        .filter(|(_, m)| **m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .unzip();
    Ok(LocalDimension {
        radii: radii.to_vec(),
        masses,
        fit: least_squares(&xs, &ys),
    })
}

/// `μ(B(y, r)) / 2r`.
pub fn density_estimate(mu: &Measure1, y: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", "radius must be positive"));
    }
    let mass: f64 = mu
        .points
        .iter()
        .zip(&mu.weights)
        .filter(|(p, _)| (p[0] - y).abs() < r)
        .map(|(_, w)| w)
        .sum();
    Ok(mass / (2.0 * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_examples() {
        let zero = HolderFunction::constant(0.5, 0.0).unwrap();
        let mu = lift_measure(&zero, 2);
        assert_eq!(mu.points(), &[[0.25, 0.0], [0.75, 0.0]]);
        assert_eq!(mu.weights(), &[0.5, 0.5]);
        let id = HolderFunction::identity(1.0).unwrap();
        let mu = lift_measure(&id, 4);
        assert!(mu.points().iter().all(|p| p[0] == p[1]));
        for n in [1, 3, 1000] {
            assert!((lift_measure(&id, n).total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_examples() {
        let mu = Measure2::new(vec![[0.3, 7.0]], vec![1.0]).unwrap();
        assert_eq!(project(&mu, 0.0).points()[0][0], 0.3);
        assert!((project(&mu, PI / 2.0).points()[0][0] - 7.0).abs() < 1e-15);
        let mu = Measure2::new(vec![[1.0, 1.0]], vec![1.0]).unwrap();
        assert!((project(&mu, PI / 4.0).points()[0][0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fourier_examples() {
        let u = Measure1::uniform_grid(4096);
        assert_eq!(fourier(&u, 0.0).re, 1.0);
        assert!((fourier(&u, PI).norm() - 2.0 / PI).abs() < 1e-3);
        let atom = Measure1::dirac(0.0, 1.0).unwrap();
        for xi in [0.3, 17.0, -4.0] {
            assert!((fourier(&atom, xi).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_path_matches_direct_sum() {
        let u = Measure1::uniform_grid(777);
        let direct = Measure1::new(u.points().to_vec(), u.weights().to_vec()).unwrap();
        for xi in [0.1, 3.0, 50.0, 2.0 * PI * 777.0] {
            assert!((fourier(&u, xi) - fourier(&direct, xi)).norm() < 1e-10);
        }
    }

    #[test]
    fn uniform_frequency_grid_matches_direct_sum() {
        let mu = Measure1::new(
            (0..40_000).map(|i| [((i * 7919) % 1000) as f64 / 333.0]).collect(),
            vec![1.0 / 40_000.0; 40_000],
        )
        .unwrap();
        let fast = fourier_uniform(&mu, 0.37, 200);
        for (k, v) in fast.iter().enumerate().step_by(17) {
            assert!((v - fourier(&mu, k as f64 * 0.37)).norm() < 1e-10);
        }
        let many = fourier_many(&mu, &[0.37 * 5.0, 0.37 * 150.0]);
        assert!((many[0] - fast[5]).norm() < 1e-10);
        assert!((many[1] - fast[150]).norm() < 1e-10);
    }

    #[test]
    fn energy_examples() {
        let two = Measure1::new(vec![[0.0], [1.0]], vec![0.5, 0.5]).unwrap();
        for s in [0.3, 1.0, 2.5] {
            assert!((energy(&two, s).unwrap().value - 0.5).abs() < 1e-15);
        }
        let coincident = Measure1::new(vec![[0.2], [0.2], [0.5]], vec![0.3, 0.3, 0.4]).unwrap();
        let e = energy(&coincident, 0.5).unwrap();
        assert!(e.diverging && e.value.is_infinite());
        assert!(energy(&two, 0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let u = Measure1::uniform_grid(1000);
        assert!((density_estimate(&u, 0.5, 0.1).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(density_estimate(&u, 5.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn local_dimension_examples() {
        let u = Measure1::uniform_grid(1 << 16);
        let radii: Vec<f64> = (3..10).map(|k| 2f64.powi(-k)).collect();
        let d = local_dimension(&u, 0.5, &radii).unwrap().estimate().unwrap();
        assert!((d - 1.0).abs() < 0.05);
        let atom = Measure1::dirac(0.3, 1.0).unwrap();
        let d = local_dimension(&atom, 0.3, &radii).unwrap().estimate().unwrap();
        assert!(d.abs() < 1e-12);
        let far = local_dimension(&atom, 10.0, &radii).unwrap();
        assert!(far.fit.is_none());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mu = Measure2::new(
            vec![[0.1, -3.0e-300], [1.0 / 3.0, 2.5e17], [f64::MIN_POSITIVE, 0.0]],
            vec![0.2, 1e-5, 7.0 / 11.0],
        )
        .unwrap();
        let mut buf = Vec::new();
        mu.write_csv(&mut buf).unwrap();
        let back = Measure2::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, mu);
        assert!(Measure1::read_csv("position,weight\n0.5,0.1,3\n".as_bytes()).is_err());
    }
}
