//! Hölder functions on the unit interval.
//!
//! Covers the Weierstrass-type lacunary series `Σ b^{-αk} g(b^k x)` with a
//! Z-periodic Lipschitz generator `g`, arbitrary closures carrying an exponent
//! and an optional Hölder-constant certificate, probe-space perturbations
//! `f_t(x) = f(x) + <t, Φ(x)>`, and the sheared family `f_t(x) + x cot θ`.
//!
//! Sampling always uses the closed grid `x_i = i/n`, `i = 0..=n`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::SnowflakeEmbedding;
use crate::error::{invalid, Error, Result};

/// Shared, thread-safe point evaluator.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default truncation target for Weierstrass series: 2^-40.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// Closed uniform grid point `i/n`.
#[inline]
pub fn grid_point(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

/// Fractional part in `[0, 1)`.
#[inline]
pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    // x.floor() can round so that f == 1.0 for tiny negative x
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub frequency: u32,
    pub cos: f64,
    pub sin: f64,
}

/// A Z-periodic Lipschitz generator `g` for Weierstrass-type series.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PeriodicGenerator {
    /// `x ↦ dist(x, Z)`, the Takagi generator.
    TriangleDistance,
    /// `x ↦ cos 2πx`, the classical Weierstrass generator.
    Cosine,
    /// `x ↦ Σ a_k cos 2πkx + b_k sin 2πkx`.
    TrigPolynomial { terms: Vec<TrigTerm> },
    /// Caller-supplied periodic function; bounds cannot be inferred.
    #[serde(skip)]
    Custom {
        f: Evaluator,
        lipschitz_bound: f64,
        sup_bound: f64,
    },
}

impl fmt::Debug for PeriodicGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TriangleDistance => write!(f, "TriangleDistance"),
            Self::Cosine => write!(f, "Cosine"),
            Self::TrigPolynomial { terms } => f.debug_struct("TrigPolynomial").field("terms", terms).finish(),
            Self::Custom {
                lipschitz_bound,
                sup_bound,
                ..
            } => f
                .debug_struct("Custom")
                .field("lipschitz_bound", lipschitz_bound)
                .field("sup_bound", sup_bound)
                .finish_non_exhaustive(),
        }
    }
}

impl PeriodicGenerator {
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lipschitz_bound: f64,
        sup_bound: f64,
    ) -> Result<Self> {
        if !(lipschitz_bound >= 0.0 && sup_bound >= 0.0) {
            return Err(invalid(
                "generator",
                "custom generators need nonnegative lipschitz_bound and sup_bound",
            ));
        }
        Ok(Self::Custom {
            f: Arc::new(f),
            lipschitz_bound,
            sup_bound,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let u = frac(x);
        match self {
            Self::TriangleDistance => u.min(1.0 - u),
            Self::Cosine => (TAU * u).cos(),
            Self::TrigPolynomial { terms } => terms
                .iter()
                .map(|t| {
                    let (s, c) = (TAU * frac(t.frequency as f64 * u)).sin_cos();
                    t.cos * c + t.sin * s
                })
                .sum(),
            Self::Custom { f, .. } => f(u),
        }
    }

    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Self::TriangleDistance => 1.0,
            Self::Cosine => TAU,
            Self::TrigPolynomial { terms } => terms
                .iter()
                .map(|t| TAU * t.frequency as f64 * t.cos.hypot(t.sin))
                .sum(),
            Self::Custom { lipschitz_bound, .. } => *lipschitz_bound,
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::TriangleDistance => 0.5,
            Self::Cosine => 1.0,
            Self::TrigPolynomial { terms } => terms.iter().map(|t| t.cos.hypot(t.sin)).sum(),
            Self::Custom { sup_bound, .. } => *sup_bound,
        }
    }
}

/// Parameters of the truncated series `Σ_{k=0}^{K} b^{-αk} g(b^k x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeierstrassParams {
    base: u32,
    alpha: f64,
    generator: PeriodicGenerator,
    depth: usize,
}

impl WeierstrassParams {
    /// Builds parameters with the default depth: the least `K` whose tail
    /// bound is at most 2^-40.
    pub fn new(base: u32, alpha: f64, generator: PeriodicGenerator) -> Result<Self> {
        if base < 2 {
            return Err(invalid("base", format!("must be an integer >= 2, got {base}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        let mut params = Self {
            base,
            alpha,
            generator,
            depth: 0,
        };
        params.depth = params.depth_for_tolerance(DEFAULT_TAIL_TOLERANCE);
        Ok(params)
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn generator(&self) -> &PeriodicGenerator {
        &self.generator
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Ratio `b^{-α}` of the geometric weights.
    fn ratio(&self) -> f64 {
        (self.base as f64).powf(-self.alpha)
    }

    /// Least depth whose tail bound does not exceed `tol`.
    pub fn depth_for_tolerance(&self, tol: f64) -> usize {
        let sup = self.generator.sup_bound();
        if sup == 0.0 {
            return 0;
        }
        let q = self.ratio();
        let mut k = 0usize;
        let mut tail = sup * q / (1.0 - q);
        while tail > tol && k < 10_000 {
            k += 1;
            tail *= q;
        }
        k
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(self)
    }

    /// A Hölder constant valid for the infinite series and every truncation:
    /// `L b^{1-α}/(b^{1-α}-1) + 2S/(1-b^{-α})` with `L`, `S` the generator's
    /// Lipschitz and sup bounds.
    pub fn holder_certificate(&self) -> f64 {
        let b = self.base as f64;
        let lip = self.generator.lipschitz_bound();
        let sup = self.generator.sup_bound();
        let grow = b.powf(1.0 - self.alpha);
        lip * grow / (grow - 1.0) + 2.0 * sup / (1.0 - self.ratio())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let b = self.base as f64;
        let q = self.ratio();
        let mut u = frac(x);
        // x = 1 is congruent to 0; keep it so periodic generators agree at both ends.
        if x == 1.0 {
            u = 0.0;
        }
        let mut weight = 1.0;
        let mut sum = 0.0;
        for _ in 0..=self.depth {
            sum += weight * self.generator.eval(u);
            weight *= q;
            u = frac(b * u);
        }
        sum
    }
}

/// Partial sum `Σ_{k=0}^{K} b^{-αk} g(b^k x)`; differs from the full series by
/// at most [`tail_bound`].
pub fn eval_weierstrass(params: &WeierstrassParams, x: f64) -> f64 {
    params.eval(x)
}

/// `sup|g| · b^{-α(K+1)} / (1 - b^{-α})`.
pub fn tail_bound(params: &WeierstrassParams) -> f64 {
    let q = params.ratio();
    params.generator.sup_bound() * q.powi(params.depth as i32 + 1) / (1.0 - q)
}

/// An evaluable α-Hölder map `[0,1] → R` with an optional constant certificate.
#[derive(Clone)]
pub struct HolderFunction {
    evaluator: Evaluator,
    alpha: f64,
    holder_constant: Option<f64>,
    description: String,
}

impl fmt::Debug for HolderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolderFunction")
            .field("alpha", &self.alpha)
            .field("holder_constant", &self.holder_constant)
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl HolderFunction {
    pub fn new(
        alpha: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        Ok(Self {
            evaluator: Arc::new(f),
            alpha,
            holder_constant: None,
            description: description.into(),
        })
    }

    pub fn with_holder_constant(mut self, c: f64) -> Self {
        self.holder_constant = Some(c);
        self
    }

    /// `f ≡ c`.
    pub fn constant(alpha: f64, c: f64) -> Result<Self> {
        Ok(Self::new(alpha, move |_| c, format!("constant {c}"))?.with_holder_constant(0.0))
    }

    /// `f(x) = x`.
    pub fn identity(alpha: f64) -> Result<Self> {
        Ok(Self::new(alpha, |x| x, "identity")?.with_holder_constant(1.0))
    }

    pub fn weierstrass(params: WeierstrassParams) -> Self {
        let alpha = params.alpha;
        let certificate = params.holder_certificate();
        let description = format!(
            "weierstrass b={} alpha={} g={:?} depth={}",
            params.base, params.alpha, params.generator, params.depth
        );
        Self {
            evaluator: Arc::new(move |x| params.eval(x)),
            alpha,
            holder_constant: Some(certificate),
            description,
        }
    }

    /// Takagi-type function: triangle-distance generator.
    pub fn takagi(base: u32, alpha: f64) -> Result<Self> {
        Ok(Self::weierstrass(WeierstrassParams::new(
            base,
            alpha,
            PeriodicGenerator::TriangleDistance,
        )?))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn holder_constant(&self) -> Option<f64> {
        self.holder_constant
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn evaluator(&self) -> Evaluator {
        Arc::clone(&self.evaluator)
    }

    /// Values on the closed grid `i/n`, `i = 0..=n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n + 1)
            .into_par_iter()
            .with_min_len(4096)
            .map(|i| self.eval(grid_point(i, n)))
            .collect()
    }
}

/// A probe-space direction: `t ∈ R^d` paired with an embedding `Φ: [0,1] → R^d`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    t: Vec<f64>,
    embedding: Arc<SnowflakeEmbedding>,
}

impl Perturbation {
    pub fn new(t: Vec<f64>, embedding: Arc<SnowflakeEmbedding>) -> Result<Self> {
        if t.len() != embedding.dim() {
            return Err(Error::DimensionMismatch {
                expected: embedding.dim(),
                actual: t.len(),
            });
        }
        Ok(Self { t, embedding })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn embedding(&self) -> &Arc<SnowflakeEmbedding> {
        &self.embedding
    }

    /// `<t, Φ(x)>`.
    pub fn eval(&self, x: f64) -> f64 {
        let phi = self.embedding.eval(x);
        self.t.iter().zip(&phi).map(|(a, b)| a * b).sum()
    }
}

/// `f_t(x) = f(x) + <t, Φ(x)>`.
///
/// The certificate is `C_f + ‖t‖₁ C_Φ`: the embedding's constants are stated
/// in the max norm, whose dual is ℓ¹.
pub fn perturb(f: &HolderFunction, p: &Perturbation) -> Result<HolderFunction> {
    let base = f.evaluator();
    let probe = p.clone();
    let holder_constant = match (f.holder_constant, p.embedding.c2_estimate()) {
        (Some(cf), Some(cphi)) => Some(cf + p.t.iter().map(|v| v.abs()).sum::<f64>() * cphi),
        (Some(cf), None) if p.t.iter().all(|&v| v == 0.0) => Some(cf),
        _ => None,
    };
    Ok(HolderFunction {
        evaluator: Arc::new(move |x| base(x) + probe.eval(x)),
        alpha: f.alpha,
        holder_constant,
        description: format!("{} + <t, Φ> (d={})", f.description, p.t.len()),
    })
}

/// `f_t^θ(x) = f_t(x) + x cot θ`, so that `sin θ · f_t^θ(x) = proj_θ(x, f_t(x))`.
pub fn shear(f: &HolderFunction, theta: f64) -> Result<HolderFunction> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(invalid("theta", format!("must lie in (0, π), got {theta}")));
    }
    let (sin, cos) = theta.sin_cos();
    let cot = cos / sin;
    let base = f.evaluator();
    Ok(HolderFunction {
        evaluator: Arc::new(move |x| base(x) + x * cot),
        alpha: f.alpha,
        // |x - y| <= |x - y|^α on [0, 1]
        holder_constant: f.holder_constant.map(|c| c + cot.abs()),
        description: format!("{} sheared at θ={theta}", f.description),
    })
}

/// `proj_θ(x, y) = x cos θ + y sin θ`.
#[inline]
pub fn proj(theta: f64, x: f64, y: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    x * c + y * s
}

/// Largest `|f(x_i) - f(x_j)| / |x_i - x_j|^α` over all pairs of the closed
/// grid of size `n`. A lower bound for the true constant; nondecreasing along
/// nested grids.
pub fn estimate_holder_constant(f: &HolderFunction, n: usize, alpha: f64) -> f64 {
    let n = n.max(1);
    holder_ratio_max(&f.sample(n), alpha)
}

/// Pairwise Hölder ratio maximum of values sampled on a closed uniform grid.
pub fn holder_ratio_max(values: &[f64], alpha: f64) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let n = (m - 1) as f64;
    // |x_i - x_j|^{-α} depends only on the index gap
    let inv_pow: Vec<f64> = (0..m)
        .map(|k| if k == 0 { 0.0 } else { (k as f64 / n).powf(-alpha) })
        .collect();
    (0..m - 1)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let vi = values[i];
            values[i + 1..]
                .iter()
                .zip(&inv_pow[1..])
                .map(|(vj, w)| (vi - vj).abs() * w)
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn takagi_half() -> WeierstrassParams {
        WeierstrassParams::new(2, 0.5, PeriodicGenerator::TriangleDistance).unwrap()
    }

    #[test]
    fn triangle_series_examples() {
        let p = takagi_half();
        assert_eq!(eval_weierstrass(&p, 0.0), 0.0);
        assert!((eval_weierstrass(&p, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_series_at_zero_is_geometric() {
        let p = WeierstrassParams::new(3, 0.5, PeriodicGenerator::Cosine).unwrap();
        let expected = 1.0 / (1.0 - 3f64.powf(-0.5));
        assert!((eval_weierstrass(&p, 0.0) - expected).abs() < 1e-11);
        assert!((expected - 2.3660).abs() < 1e-4);
    }

    #[test]
    fn tail_bound_examples() {
        let p = WeierstrassParams::new(2, 0.5, PeriodicGenerator::TriangleDistance)
            .unwrap()
            .with_depth(20);
        // oracle: explicit summation of the discarded weights
        let oracle: f64 = (21..2000).map(|k| 0.5 * 2f64.powf(-0.5 * k as f64)).sum();
        assert!((tail_bound(&p) - oracle).abs() < 1e-15);
        assert!((tail_bound(&p) - 1.179e-3).abs() < 1e-6);

        let zero = PeriodicGenerator::TrigPolynomial { terms: vec![] };
        let p = WeierstrassParams::new(5, 0.3, zero).unwrap();
        assert_eq!(tail_bound(&p), 0.0);
        assert_eq!(p.depth(), 0);

        let p = WeierstrassParams::new(4, 0.5, PeriodicGenerator::Cosine)
            .unwrap()
            .with_depth(0);
        assert!((tail_bound(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_depth_meets_tolerance() {
        let p = WeierstrassParams::new(2, 0.4, PeriodicGenerator::TriangleDistance).unwrap();
        assert!(p.tail_bound() <= DEFAULT_TAIL_TOLERANCE);
        let shallower = p.clone().with_depth(p.depth() - 1);
        assert!(shallower.tail_bound() > DEFAULT_TAIL_TOLERANCE);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeierstrassParams::new(1, 0.5, PeriodicGenerator::Cosine).is_err());
        assert!(WeierstrassParams::new(2, 0.0, PeriodicGenerator::Cosine).is_err());
        assert!(WeierstrassParams::new(2, 1.0, PeriodicGenerator::Cosine).is_err());
        assert!(PeriodicGenerator::custom(|x| x, -1.0, 1.0).is_err());
    }

    #[test]
    fn shear_examples() {
        let f = HolderFunction::takagi(2, 0.5).unwrap();
        let g = shear(&f, std::f64::consts::FRAC_PI_2).unwrap();
        for i in 0..=100 {
            let x = grid_point(i, 100);
            assert!((g.eval(x) - f.eval(x)).abs() < 1e-15);
        }
        let zero = HolderFunction::constant(0.5, 0.0).unwrap();
        let s = shear(&zero, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((s.eval(0.5) - 0.5).abs() < 1e-15);

        let theta = std::f64::consts::PI / 3.0;
        let s = shear(&f, theta).unwrap();
        let worst = (0..1000)
            .map(|i| {
                let x = grid_point(i, 999);
                (theta.sin() * s.eval(x) - proj(theta, x, f.eval(x))).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12);

        assert!(shear(&f, 0.0).is_err());
        assert!(shear(&f, std::f64::consts::PI).is_err());
    }

    #[test]
    fn holder_constant_examples() {
        let id = HolderFunction::identity(1.0).unwrap();
        for n in [2, 7, 64] {
            assert!((estimate_holder_constant(&id, n, 1.0) - 1.0).abs() < 1e-12);
        }
        let c = HolderFunction::constant(0.3, 4.0).unwrap();
        assert_eq!(estimate_holder_constant(&c, 50, 0.3), 0.0);
    }

    #[test]
    fn takagi_holder_estimate_is_resolution_stable() {
        let f = HolderFunction::takagi(2, 0.5).unwrap();
        let coarse = estimate_holder_constant(&f, 1 << 12, 0.5);
        let fine = estimate_holder_constant(&f, 1 << 14, 0.5);
        assert!(fine >= coarse);
        assert!((fine - coarse) / coarse < 0.05, "coarse {coarse} fine {fine}");
        assert!(fine <= f.holder_constant().unwrap());
    }

    #[test]
    fn trig_polynomial_bounds() {
        let g = PeriodicGenerator::TrigPolynomial {
            terms: vec![
                TrigTerm {
                    frequency: 1,
                    cos: 0.3,
                    sin: 0.4,
                },
                TrigTerm {
                    frequency: 3,
                    cos: -0.1,
                    sin: 0.0,
                },
            ],
        };
        assert!((g.sup_bound() - 0.6).abs() < 1e-15);
        assert!((g.lipschitz_bound() - TAU * (0.5 + 0.3)).abs() < 1e-12);
        for i in 0..200 {
            let x = i as f64 / 137.0;
            let y = x + 1e-3;
            assert!((g.eval(x) - g.eval(y)).abs() <= g.lipschitz_bound() * 1e-3 + 1e-15);
        }
    }
}
