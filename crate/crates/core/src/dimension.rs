//! Packing counts, level sets by value bands, and log-log dimension fits.
//!
//! Packings are greedy: points are visited in sorted order (lexicographic in
//! the plane) and kept when they sit at max-norm distance at least `2r` from
//! every centre kept so far. Greedy and maximal packings differ by a bounded
//! factor, which leaves fitted slopes unchanged.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fit::least_squares;
use crate::functions::{grid_point, HolderFunction};

const DEDUP_RESOLUTION: f64 = 1.0 / (1u64 << 52) as f64;

/// A finite subset of the line or the plane, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSet {
    Line(Vec<f64>),
    Plane(Vec<[f64; 2]>),
}

impl PointSet {
    pub fn line(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < DEDUP_RESOLUTION);
        PointSet::Line(points)
    }

    pub fn plane(mut points: Vec<[f64; 2]>) -> Self {
        points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        points.dedup_by(|a, b| (a[0] - b[0]).abs() < DEDUP_RESOLUTION && (a[1] - b[1]).abs() < DEDUP_RESOLUTION);
        PointSet::Plane(points)
    }

    pub fn ambient(&self) -> usize {
        match self {
            PointSet::Line(_) => 1,
            PointSet::Plane(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Line(p) => p.len(),
            PointSet::Plane(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Greedy packing number: how many centres from `a` can be chosen pairwise at
/// max-norm distance at least `2r`.
pub fn pack_count(a: &PointSet, r: f64) -> Result<usize> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("radius must be positive, got {r}")));
    }
    Ok(match a {
        PointSet::Line(p) => pack_sorted_line(p, r),
        PointSet::Plane(p) => pack_sorted_plane(p, r),
    })
}

/// Greedy packing of ascending positions.
pub fn pack_sorted_line(points: &[f64], r: f64) -> usize {
    let sep = 2.0 * r;
    let mut iter = points.iter();
    let Some(&first) = iter.next() else {
        return 0;
    };
    let mut last = first;
    let mut count = 1;
    for &p in iter {
        if p - last >= sep {
            last = p;
            count += 1;
        }
    }
    count
}

/// Greedy packing of lexicographically sorted plane points.
pub fn pack_sorted_plane(points: &[[f64; 2]], r: f64) -> usize {
    pack_plane_stream(points.iter().copied(), r)
}

/// Greedy packing of a stream of plane points sorted by `x`.
fn pack_plane_stream(points: impl Iterator<Item = [f64; 2]>, r: f64) -> usize {
    let mut grid = CentreGrid::new(r);
    for p in points {
        grid.advance(p[0]);
        if grid.blocker(p).is_none() {
            grid.insert(p);
        }
    }
    grid.count
}

/// Accepted centres bucketed in cells of side `2r`. Only the columns of cells
/// that can still block an `x`-sorted stream are retained.
struct CentreGrid {
    sep: f64,
    columns: BTreeMap<i64, HashMap<i64, Vec<[f64; 2]>>>,
    count: usize,
}

impl CentreGrid {
    fn new(r: f64) -> Self {
        Self {
            sep: 2.0 * r,
            columns: BTreeMap::new(),
            count: 0,
        }
    }

    fn cell(&self, v: f64) -> i64 {
        (v / self.sep).floor() as i64
    }

    fn advance(&mut self, x: f64) {
        let cx = self.cell(x);
        while self.columns.first_key_value().is_some_and(|(&c, _)| c < cx - 1) {
            self.columns.pop_first();
        }
    }

    /// Some centre closer than `2r` to `p`.
    fn blocker(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let (cx, cy) = (self.cell(p[0]), self.cell(p[1]));
        (cx - 1..=cx + 1)
            .filter_map(|x| self.columns.get(&x))
            .flat_map(|col| (cy - 1..=cy + 1).filter_map(move |y| col.get(&y)))
            .flatten()
            .copied()
            .find(|q| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()) < self.sep)
    }

    fn insert(&mut self, p: [f64; 2]) {
        let (cx, cy) = (self.cell(p[0]), self.cell(p[1]));
        self.columns.entry(cx).or_default().entry(cy).or_default().push(p);
        self.count += 1;
    }
}

/// Greedy packing of the piecewise-linear interpolant of closed-grid samples,
/// traversed left to right.
///
/// Each new centre is the first point of the curve at max-norm distance at
/// least `2r` from every earlier centre. A centre blocks an open parameter
/// interval of each segment, so the walk jumps to the end of that interval.
fn pack_polyline(values: &[f64], r: f64) -> usize {
    let n = values.len().saturating_sub(1).max(1);
    let mut grid = CentreGrid::new(r);
    let sep = grid.sep;
    if let [only] = values {
        grid.insert([0.0, *only]);
    }
    for (i, w) in values.windows(2).enumerate() {
        let a = [grid_point(i, n), w[0]];
        let d = [grid_point(i + 1, n) - a[0], w[1] - w[0]];
        let at = |u: f64| [a[0] + u * d[0], a[1] + u * d[1]];
        grid.advance(a[0]);
        let mut u = 0.0;
        while u <= 1.0 {
            let p = at(u);
            match grid.blocker(p) {
                None => grid.insert(p),
                Some(q) => {
                    let exit = (0..2)
                        .filter(|&k| d[k] != 0.0)
                        .map(|k| ((q[k] - a[k]) + sep.copysign(d[k])) / d[k])
                        .fold(f64::INFINITY, f64::min);
                    u = if exit > u { exit } else { u + f64::EPSILON * u.max(1.0) };
                    continue;
                }
            }
            // The new centre blocks the segment until it exits its square.
            let exit = (0..2)
                .filter(|&k| d[k] != 0.0)
                .map(|k| sep.abs() / d[k].abs())
                .fold(f64::INFINITY, f64::min);
            u += exit.max(f64::EPSILON);
        }
    }
    grid.count
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    /// Radii, decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub window: Range<usize>,
    /// Counts are constant over the window.
    pub degenerate: bool,
    /// Some count in the window is zero; the slope uses the nonzero ones only.
    pub undefined: bool,
}

impl DimensionFit {
    /// `(r, N, residual of log N about the fitted line)` per scale in the window.
    pub fn residuals(&self) -> Vec<(f64, usize, f64)> {
        let intercept = self.intercept();
        self.window
            .clone()
            .map(|j| {
                let (r, n) = (self.scales[j], self.counts[j]);
                let resid = if n > 0 {
                    (n as f64).ln() - (intercept + self.slope * -r.ln())
                } else {
                    f64::NAN
                };
                (r, n, resid)
            })
            .collect()
    }

    fn intercept(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .window
            .clone()
            .filter(|&j| self.counts[j] > 0)
            .map(|j| (-self.scales[j].ln(), (self.counts[j] as f64).ln()))
            .collect();
        if pts.is_empty() {
            return 0.0;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        my - self.slope * mx
    }
}

/// Middle two-thirds of a ladder of `len` scales.
pub fn default_window(len: usize) -> Range<usize> {
    let drop = (len + 3) / 6;
    drop..len - drop
}

/// Slope of `log N_j` against `-log r_j` over `window` (default: middle two-thirds).
pub fn dim_fit(scales: &[f64], counts: &[usize], window: Option<Range<usize>>) -> Result<DimensionFit> {
    if scales.len() != counts.len() {
        return Err(invalid("counts", "scales and counts differ in length"));
    }
    let window = window.unwrap_or_else(|| default_window(scales.len()));
    if window.end > scales.len() || window.len() < 4 {
        return Err(invalid(
            "window",
            format!(
                "need at least 4 scales in the window, got {window:?} of {}",
                scales.len()
            ),
        ));
    }
    if scales.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("scales", "radii must be positive"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = window
        .clone()
        .filter(|&j| counts[j] > 0)
        .map(|j| (-scales[j].ln(), (counts[j] as f64).ln()))
        .unzip();
    let undefined = xs.len() < window.len();
    let degenerate = ys.windows(2).all(|w| w[0] == w[1]);
    let (slope, stderr, r2) = match least_squares(&xs, &ys) {
        Some(f) if !degenerate => (f.slope, f.stderr, f.r2),
        Some(_) => (0.0, 0.0, 1.0),
        None => (0.0, 0.0, 0.0),
    };
    Ok(DimensionFit {
        scales: scales.to_vec(),
        counts: counts.to_vec(),
        slope,
        stderr,
        r2,
        window,
        degenerate,
        undefined: undefined || xs.len() < 2,
    })
}

/// `{x_i : |f(x_i) - y| ≤ ε}` on the closed grid `i/n`.
pub fn level_set(f: &HolderFunction, y: f64, n: usize, eps: f64) -> Result<PointSet> {
    if !(eps >= 0.0) {
        return Err(invalid(
            "eps",
            format!("band half-width must be nonnegative, got {eps}"),
        ));
    }
    let values = f.sample(n);
    Ok(PointSet::Line(
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| (**v - y).abs() <= eps)
            .map(|(i, _)| grid_point(i, n))
            .collect(),
    ))
}

fn check_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.len() < 4 {
        return Err(invalid(
            "ladder",
            format!("need at least 4 resolutions, got {}", ladder.len()),
        ));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(invalid("ladder", "resolutions must be positive and strictly ascending"));
    }
    Ok(())
}

/// Dyadic ladder `2^lo, ..., 2^hi`.
pub fn dyadic_ladder(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

/// Grid values of one function at every resolution of a ladder, sorted by value
/// so that bands are found by binary search.
#[derive(Clone, Debug)]
pub struct LevelSampler {
    ladder: Vec<usize>,
    alpha: f64,
    // per level: (value, grid index) sorted by value
    levels: Vec<Vec<(f64, u32)>>,
}

impl LevelSampler {
    /// `values` are samples on the closed grid of size `n`; every ladder entry must divide `n`.
    pub fn new(values: &[f64], n: usize, ladder: &[usize], alpha: f64) -> Result<Self> {
        check_ladder(ladder)?;
        if values.len() != n + 1 {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", n + 1, values.len()),
            ));
        }
        if let Some(bad) = ladder.iter().find(|&&m| n % m != 0) {
            return Err(invalid("ladder", format!("resolution {bad} does not divide {n}")));
        }
        let levels = ladder
            .par_iter()
            .map(|&m| {
                let stride = n / m;
                let mut level: Vec<(f64, u32)> = (0..=m).map(|i| (values[i * stride], i as u32)).collect();
                level.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                level
            })
            .collect();
        Ok(Self {
            ladder: ladder.to_vec(),
            alpha,
            levels,
        })
    }

    pub fn from_function(f: &HolderFunction, ladder: &[usize]) -> Result<Self> {
        check_ladder(ladder)?;
        let n = *ladder.last().unwrap_or(&1);
        Self::new(&f.sample(n), n, ladder, f.alpha())
    }

    pub fn ladder(&self) -> &[usize] {
        &self.ladder
    }

    /// Pack counts of the band sets `|f - y| ≤ c·n_j^{-α}` at `r_j = 1/n_j`.
    pub fn band_counts(&self, y: f64, c: f64) -> Vec<usize> {
        self.ladder
            .iter()
            .zip(&self.levels)
            .map(|(&m, level)| {
                let eps = c * (m as f64).powf(-self.alpha);
                let lo = level.partition_point(|p| p.0 < y - eps);
                let hi = level.partition_point(|p| p.0 <= y + eps);
                let mut idx: Vec<u32> = level[lo..hi].iter().map(|p| p.1).collect();
                idx.sort_unstable();
                pack_indices(&idx)
            })
            .collect()
    }

    pub fn level_dim(&self, y: f64, c: f64, window: Option<Range<usize>>) -> Result<DimensionFit> {
        let counts = self.band_counts(y, c);
        let scales: Vec<f64> = self.ladder.iter().map(|&m| 1.0 / m as f64).collect();
        dim_fit(&scales, &counts, window)
    }
}

// Greedy packing of grid indices at r = 1/m: centres at least two steps apart.
fn pack_indices(sorted: &[u32]) -> usize {
    let mut iter = sorted.iter();
    let Some(&first) = iter.next() else {
        return 0;
    };
    let mut last = first;
    let mut count = 1;
    for &i in iter {
        if i >= last + 2 {
            last = i;
            count += 1;
        }
    }
    count
}

/// Upper Minkowski estimate of `f^{-1}({y})` from value bands of half-width
/// `c·n_j^{-α}`. `c` defaults to the function's Hölder constant.
pub fn level_dim(
    f: &HolderFunction,
    y: f64,
    ladder: &[usize],
    c: Option<f64>,
    window: Option<Range<usize>>,
) -> Result<DimensionFit> {
    let c = band_constant(f, c)?;
    LevelSampler::from_function(f, ladder)?.level_dim(y, c, window)
}

pub(crate) fn band_constant(f: &HolderFunction, c: Option<f64>) -> Result<f64> {
    let c = c.or(f.holder_constant()).unwrap_or(1.0);
    if !(c >= 0.0) {
        return Err(invalid("c", format!("band constant must be nonnegative, got {c}")));
    }
    Ok(c)
}

/// Packing dimension of the graph sampled on the closed grid of size `n`,
/// counted at `r_j = 1/n_j` for each ladder entry.
///
/// The packed set is the graph of the piecewise-linear interpolant of the
/// samples, walked exactly segment by segment. Bare samples undercount once
/// the jump between neighbouring values exceeds `2r_j`, which for an α-Hölder
/// graph happens well above the grid spacing.
pub fn graph_dim(f: &HolderFunction, n: usize, ladder: &[usize], window: Option<Range<usize>>) -> Result<DimensionFit> {
    graph_dim_sampled(&f.sample(n), ladder, window)
}

/// As [`graph_dim`] from precomputed samples on the closed grid `i/(len-1)`.
pub fn graph_dim_sampled(values: &[f64], ladder: &[usize], window: Option<Range<usize>>) -> Result<DimensionFit> {
    check_ladder(ladder)?;
    if values.len() < 2 {
        return Err(invalid("values", "need at least two samples"));
    }
    let counts: Vec<usize> = ladder
        .par_iter()
        .map(|&m| {
            let r = 1.0 / m as f64;
            pack_polyline(values, r)
        })
        .collect();
    let scales: Vec<f64> = ladder.iter().map(|&m| 1.0 / m as f64).collect();
    dim_fit(&scales, &counts, window)
}
