//! Conditional measures on the slices `proj_θ^{-1}({y})`, realized as band
//! restrictions of half-width `r` normalized by `1/2r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functions::proj;
use crate::measures::{energy, project, EnergyEstimate, Measure2};

/// Relative change allowed between slice energies at `r` and `r/2`.
pub const SLICE_STABILITY: f64 = 0.2;

/// Fraction of the projection hull covered by the default level grid.
pub const CENTRAL_FRACTION: f64 = 0.8;

#[derive(Clone, Debug, PartialEq)]
pub struct BandMeasure {
    pub theta: f64,
    pub y: f64,
    pub r: f64,
    /// Unnormalized mass of the base measure inside the band.
    pub band_mass: f64,
    /// Points with `|proj_θ(p) - y| < r`, weights divided by `2r`.
    pub restricted: Measure2,
}

pub fn band_measure(mu: &Measure2, theta: f64, y: f64, r: f64) -> Result<BandMeasure> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("band half-width must be positive, got {r}")));
    }
    let scale = 1.0 / (2.0 * r);
    let (points, weights): (Vec<[f64; 2]>, Vec<f64>) = mu
        .points()
        .iter()
        .zip(mu.weights())
        .filter(|(p, _)| (proj(theta, p[0], p[1]) - y).abs() < r)
        .map(|(p, w)| (*p, *w))
        .unzip();
    let band_mass = weights.iter().sum();
    let restricted = Measure2::new(points, weights.into_iter().map(|w| w * scale).collect())?;
    Ok(BandMeasure {
        theta,
        y,
        r,
        band_mass,
        restricted,
    })
}

/// `|Σ_k ν_{θ,y_k}(R²)·Δ - μ(R²)|` over the levels `y_k = (k + 1/2)Δ` that
/// lie within `r` of the projection hull.
///
/// Levels sit on a fixed lattice rather than one anchored at the hull, so grid
/// measures with dyadic spacing never put atoms exactly on a band edge.
pub fn disintegration_defect(mu: &Measure2, theta: f64, r: f64, delta: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", "band half-width must be positive"));
    }
    if !(delta > 0.0 && delta <= r) {
        return Err(invalid(
            "delta",
            format!("grid spacing must lie in (0, r], got {delta}"),
        ));
    }
    let projected = project(mu, theta);
    let Some((lo, hi)) = projected.hull() else {
        return Ok(0.0);
    };
    let index = projected.mass_index();
    let first = ((lo - r) / delta).floor() as i64 - 1;
    let last = ((hi + r) / delta).ceil() as i64 + 1;
    let total: f64 = (first..=last)
        .map(|k| index.ball_mass((k as f64 + 0.5) * delta, r) / (2.0 * r) * delta)
        .sum();
    Ok((total - mu.total_mass()).abs())
}

/// Riesz `s`-energy of the normalized slice measure.
pub fn slice_energy(nu: &BandMeasure, s: f64) -> Result<EnergyEstimate> {
    energy(&nu.restricted, s)
}

/// `n` equally spaced levels across the central [`CENTRAL_FRACTION`] of `[lo, hi]`.
pub fn central_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let margin = 0.5 * (1.0 - CENTRAL_FRACTION) * (hi - lo);
    let (a, b) = (lo + margin, hi - margin);
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub theta: f64,
    pub y: f64,
    pub r: f64,
    pub band_mass: f64,
    /// Kernel estimate of the projected density at `y`, reported, never divided out.
    pub density: f64,
    pub exponents: Vec<f64>,
    /// Slice energies at `r`, one per exponent.
    pub energies: Vec<f64>,
    /// Slice energies at `r/2` over those at `r`.
    pub stability: Vec<f64>,
}

impl SliceRow {
    /// Finite at both radii with relative change at most [`SLICE_STABILITY`].
    pub fn stable(&self, k: usize) -> bool {
        let ratio = self.stability[k];
        self.energies[k].is_finite() && self.energies[k] > 0.0 && (ratio - 1.0).abs() <= SLICE_STABILITY
    }

    pub const CSV_HEADER: &'static str = "theta,y,r,band_mass,density,s,energy,stability";

    /// One CSV line per exponent.
    pub fn csv_lines(&self) -> Vec<String> {
        self.exponents
            .iter()
            .zip(&self.energies)
            .zip(&self.stability)
            .map(|((s, e), q)| {
                format!(
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    self.theta, self.y, self.r, self.band_mass, self.density, s, e, q
                )
            })
            .collect()
    }
}

/// A measure's atoms sorted by their projection, for repeated band queries.
#[derive(Clone, Debug)]
pub struct SliceIndex {
    theta: f64,
    keys: Vec<f64>,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl SliceIndex {
    pub fn new(mu: &Measure2, theta: f64) -> Self {
        let mut rows: Vec<(f64, [f64; 2], f64)> = mu
            .points()
            .iter()
            .zip(mu.weights())
            .map(|(p, w)| (proj(theta, p[0], p[1]), *p, *w))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Self {
            theta,
            keys: Vec::with_capacity(rows.len()),
            points: Vec::with_capacity(rows.len()),
            weights: Vec::with_capacity(rows.len()),
        };
        for (k, p, w) in rows {
            out.keys.push(k);
            out.points.push(p);
            out.weights.push(w);
        }
        out
    }

    pub fn band(&self, y: f64, r: f64) -> Result<BandMeasure> {
        if !(r > 0.0) {
            return Err(invalid("r", format!("band half-width must be positive, got {r}")));
        }
        let lo = self.keys.partition_point(|&k| k <= y - r);
        let hi = self.keys.partition_point(|&k| k < y + r);
        let range = lo..hi.max(lo);
        let weights = &self.weights[range.clone()];
        let scale = 1.0 / (2.0 * r);
        Ok(BandMeasure {
            theta: self.theta,
            y,
            r,
            band_mass: weights.iter().sum(),
            restricted: Measure2::new(self.points[range].to_vec(), weights.iter().map(|w| w * scale).collect())?,
        })
    }

    /// `(min, max)` of the projected positions.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((*self.keys.first()?, *self.keys.last()?))
    }

    /// Projected mass in `(y - r, y + r)` divided by `2r`.
    pub fn density(&self, y: f64, r: f64) -> f64 {
        let lo = self.keys.partition_point(|&k| k <= y - r);
        let hi = self.keys.partition_point(|&k| k < y + r);
        self.weights[lo..hi.max(lo)].iter().sum::<f64>() / (2.0 * r)
    }

    /// Slice energies at `r` and `r/2` at level `y`.
    pub fn row(&self, y: f64, r: f64, exponents: &[f64]) -> Result<SliceRow> {
        if exponents.iter().any(|s| !(*s > 0.0)) {
            return Err(invalid("s", "exponents must be positive"));
        }
        let wide = self.band(y, r)?;
        let narrow = self.band(y, 0.5 * r)?;
        let mut energies = Vec::with_capacity(exponents.len());
        let mut stability = Vec::with_capacity(exponents.len());
        for &s in exponents {
            let e = slice_energy(&wide, s)?.value;
            let e_half = slice_energy(&narrow, s)?.value;
            energies.push(e);
            stability.push(if e > 0.0 { e_half / e } else { f64::NAN });
        }
        Ok(SliceRow {
            theta: self.theta,
            y,
            r,
            band_mass: wide.band_mass,
            density: self.density(y, r),
            exponents: exponents.to_vec(),
            energies,
            stability,
        })
    }
}

/// Slice energies at radii `r` and `r/2` for every level in `ys`.
pub fn slice_report(mu: &Measure2, theta: f64, ys: &[f64], r: f64, exponents: &[f64]) -> Result<Vec<SliceRow>> {
    let index = SliceIndex::new(mu, theta);
    ys.par_iter().map(|&y| index.row(y, r, exponents)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::HolderFunction;
    use crate::measures::lift_measure;
    use std::f64::consts::PI;

    #[test]
    fn band_examples() {
        let zero = lift_measure(&HolderFunction::constant(0.5, 0.0).unwrap(), 1000);
        let b = band_measure(&zero, PI / 2.0, 0.0, 0.1).unwrap();
        assert!((b.restricted.total_mass() - 5.0).abs() < 1e-9);
        let id = lift_measure(&HolderFunction::identity(1.0).unwrap(), 1000);
        let b = band_measure(&id, 0.0, 0.5, 0.25).unwrap();
        assert!((b.restricted.total_mass() - 1.0).abs() < 1e-9);
        let b = band_measure(&id, PI / 2.0, 3.0, 0.1).unwrap();
        assert!(b.restricted.is_empty() && b.band_mass == 0.0);
    }

    #[test]
    fn defect_examples() {
        let n = 1 << 12;
        let zero = lift_measure(&HolderFunction::constant(0.5, 0.0).unwrap(), n);
        let step = 1.0 / n as f64;
        assert!(disintegration_defect(&zero, PI / 2.0, step, step).unwrap() <= 1e-3);
        let id = lift_measure(&HolderFunction::identity(1.0).unwrap(), n);
        let h = 2f64.powi(-8);
        assert!(disintegration_defect(&id, PI / 2.0, h, h).unwrap() <= 1e-2);
        assert_eq!(disintegration_defect(&Measure2::empty(), 0.3, h, h).unwrap(), 0.0);
    }

    #[test]
    fn slice_energy_matches_pair_sum() {
        let zero = lift_measure(&HolderFunction::constant(0.5, 0.0).unwrap(), 256);
        let r = 0.5;
        let b = band_measure(&zero, PI / 2.0, 0.0, r).unwrap();
        let e = slice_energy(&b, 0.5).unwrap().value;
        let pts = zero.points();
        let mut oracle = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i != j {
                    oracle += (1.0 / 256.0f64).powi(2) * (pts[i][0] - pts[j][0]).abs().powf(-0.5);
                }
            }
        }
        oracle /= (2.0 * r) * (2.0 * r);
        assert!((e - oracle).abs() < 1e-10 * oracle);
        let lonely = band_measure(&zero, 0.0, 0.5 / 256.0, 1e-4).unwrap();
        assert_eq!(slice_energy(&lonely, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn index_bands_match_direct_restriction() {
        let mu = lift_measure(&HolderFunction::takagi(2, 0.5).unwrap(), 4096);
        let index = SliceIndex::new(&mu, 1.1);
        for y in [0.2, 0.5, 0.9] {
            let a = band_measure(&mu, 1.1, y, 0.01).unwrap();
            let b = index.band(y, 0.01).unwrap();
            assert_eq!(a.restricted.len(), b.restricted.len());
            assert!((a.band_mass - b.band_mass).abs() < 1e-12);
        }
    }

    #[test]
    fn central_levels_avoid_the_edges() {
        let ys = central_levels(0.0, 1.0, 5);
        assert_eq!(ys.len(), 5);
        assert!((ys[0] - 0.1).abs() < 1e-15 && (ys[4] - 0.9).abs() < 1e-15);
    }
}
