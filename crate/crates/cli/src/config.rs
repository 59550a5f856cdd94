//! Run configuration: one JSON document per run, with every default spelled
//! out after parsing so that the stored config reproduces the run.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use holder_core::dimension::dyadic_ladder;
use holder_core::experiments::{ConjectureConfig, EmbeddingSpec, FunctionSpec, ProbeConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Every estimator and experiment reachable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the function at `estimator.x`.
    Eval,
    /// Truncation error bound of the Weierstrass series.
    TailBound,
    /// Evaluate `f_t(x) = f(x) + <t, Φ(x)>` at `estimator.t`, `estimator.x`.
    PerturbEval,
    /// Packing dimension of the graph.
    GraphDim,
    /// Packing dimension of the level set at `estimator.y`.
    LevelDim,
    /// Grid points of the band level set at `estimator.y`.
    Levelset,
    /// Fitted Fourier decay exponent of the projected graph measure.
    FourierDecay,
    /// Truncated Sobolev integrals of the projected graph measure.
    Sobolev,
    /// Riesz energies of the graph measure.
    Energy,
    /// Slice energies of the graph measure along `estimator.theta`.
    Slice,
    /// Band disintegration defect of the graph measure.
    DisintegrationCheck,
    /// Build and sample the probe embedding.
    EmbeddingBuild,
    /// Sampled bi-Hölder constants of the probe embedding.
    EmbeddingCertify,
    /// Search for a bi-Hölder Weierstrass embedding.
    EmbeddingSearch,
    /// Fraction of an interval where the reverse Hölder bound holds.
    ReverseHolder,
    /// Level-set dimension upper bound over the probe space.
    VerifyPart1,
    /// Slice dimension lower bound over the probe space.
    VerifyPart2,
    /// Fourier decay and Sobolev traces over the probe space.
    VerifySobolev,
    /// Energy finiteness of the graph measures over the probe space.
    VerifyEnergy,
    /// Embedding search followed by the level-set probes.
    ConjectureProbe,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::TailBound => "tail-bound",
            Command::PerturbEval => "perturb-eval",
            Command::GraphDim => "graph-dim",
            Command::LevelDim => "level-dim",
            Command::Levelset => "levelset",
            Command::FourierDecay => "fourier-decay",
            Command::Sobolev => "sobolev",
            Command::Energy => "energy",
            Command::Slice => "slice",
            Command::DisintegrationCheck => "disintegration-check",
            Command::EmbeddingBuild => "embedding-build",
            Command::EmbeddingCertify => "embedding-certify",
            Command::EmbeddingSearch => "embedding-search",
            Command::ReverseHolder => "reverse-holder",
            Command::VerifyPart1 => "verify-part1",
            Command::VerifyPart2 => "verify-part2",
            Command::VerifySobolev => "verify-sobolev",
            Command::VerifyEnergy => "verify-energy",
            Command::ConjectureProbe => "conjecture-probe",
        }
    }

    pub const ALL: [Command; 20] = [
        Command::Eval,
        Command::TailBound,
        Command::PerturbEval,
        Command::GraphDim,
        Command::LevelDim,
        Command::Levelset,
        Command::FourierDecay,
        Command::Sobolev,
        Command::Energy,
        Command::Slice,
        Command::DisintegrationCheck,
        Command::EmbeddingBuild,
        Command::EmbeddingCertify,
        Command::EmbeddingSearch,
        Command::ReverseHolder,
        Command::VerifyPart1,
        Command::VerifyPart2,
        Command::VerifySobolev,
        Command::VerifyEnergy,
        Command::ConjectureProbe,
    ];
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Missing { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    /// The offending key, when the error is tied to one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Probe-space settings; everything in [`ProbeConfig`] except the function,
/// the embedding, the exponent and the seed, which live at the top level.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub t0: Vec<f64>,
    pub rho: f64,
    pub samples: usize,
    pub ladder: Vec<usize>,
    pub window: Option<Range<usize>>,
    pub levels: usize,
    pub level_fraction: f64,
    pub band_constant: Option<f64>,
    pub part1_tolerance: f64,
    pub part2_tolerance: f64,
    pub thetas: Vec<f64>,
    pub theta_levels: usize,
    pub slice_radius: f64,
    pub band_start: f64,
    pub band_count: usize,
}

impl Default for ProbeParams {
    fn default() -> Self {
        let p = ProbeConfig::takagi(0.4);
        Self {
            t0: p.t0,
            rho: p.rho,
            samples: p.samples,
            ladder: p.ladder,
            window: p.window,
            levels: p.levels,
            level_fraction: p.level_fraction,
            band_constant: p.band_constant,
            part1_tolerance: p.part1_tolerance,
            part2_tolerance: p.part2_tolerance,
            thetas: p.thetas,
            theta_levels: p.theta_levels,
            slice_radius: p.slice_radius,
            band_start: p.band_start,
            band_count: p.band_count,
        }
    }
}

/// Parameters of the single-shot estimators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    pub x: f64,
    /// Probe point for `perturb-eval`; empty means the origin.
    pub t: Vec<f64>,
    /// Finest sampling grid.
    pub n: usize,
    pub ladder: Vec<usize>,
    pub window: Option<Range<usize>>,
    pub y: f64,
    /// Band half-width for `levelset`; defaults to `C n^{-α}`.
    pub epsilon: Option<f64>,
    /// Band constant for `level-dim`; defaults to the function's Hölder constant.
    pub band_constant: Option<f64>,
    pub theta: f64,
    /// Band half-width for slices and the disintegration check.
    pub r: f64,
    /// Level spacing of the disintegration check; defaults to `r`.
    pub delta: Option<f64>,
    /// Riesz exponents.
    pub s: Vec<f64>,
    /// Defaults per subcommand: 1.1 for the Sobolev runs, 0.25 for `verify-energy`.
    pub beta: Option<f64>,
    pub cutoff: f64,
    pub doublings: usize,
    pub band_start: f64,
    pub band_count: usize,
    /// Number of levels for `slice`.
    pub levels: usize,
    pub grids: Vec<usize>,
    pub interval: (f64, f64),
    pub eps: f64,
    pub budget: usize,
    pub generators: usize,
    pub plot: bool,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            x: 0.5,
            t: Vec::new(),
            n: 1 << 16,
            ladder: dyadic_ladder(6, 14),
            window: None,
            y: 0.5,
            epsilon: None,
            band_constant: None,
            theta: PI / 2.0,
            r: 1.0 / 256.0,
            delta: None,
            s: vec![0.5],
            beta: None,
            cutoff: 16.0,
            doublings: 6,
            band_start: 2.0 * PI,
            band_count: 8,
            levels: 16,
            grids: vec![1024, 4096],
            interval: (0.0, 1.0),
            eps: 0.1,
            budget: 40,
            generators: 2,
            plot: true,
        }
    }
}

fn default_alpha() -> f64 {
    0.4
}
fn default_base() -> u32 {
    2
}
fn default_embedding() -> EmbeddingSpec {
    EmbeddingSpec::Lacunary { lambda: 4, delta: None }
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// A complete run description. After [`parse_config`] every optional field
/// is filled, so serializing and parsing again is the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Command,
    /// Exponent of the probe embedding and of the default function.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Base of the default function.
    #[serde(default = "default_base")]
    pub base: u32,
    /// Defaults to the Takagi-type function with `base` and `alpha`.
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default = "default_embedding")]
    pub embedding: EmbeddingSpec,
    #[serde(default)]
    pub probe: ProbeParams,
    #[serde(default)]
    pub estimator: EstimatorParams,
    #[serde(default)]
    pub conjecture: ConjectureConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line values layered over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub subcommand: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub base: Option<u32>,
    /// `dotted.key=value` pairs; values are parsed as JSON, falling back to strings.
    pub set: Vec<String>,
}

impl RunConfig {
    pub fn function(&self) -> &FunctionSpec {
        self.function.as_ref().expect("filled by parse_config")
    }

    /// The probe-space configuration for the verify subcommands.
    pub fn probe_config(&self) -> ProbeConfig {
        let p = self.probe.clone();
        ProbeConfig {
            base: self.function().clone(),
            embedding: self.embedding.clone(),
            alpha: self.alpha,
            t0: p.t0,
            rho: p.rho,
            samples: p.samples,
            seed: self.seed,
            ladder: p.ladder,
            window: p.window,
            levels: p.levels,
            level_fraction: p.level_fraction,
            band_constant: p.band_constant,
            part1_tolerance: p.part1_tolerance,
            part2_tolerance: p.part2_tolerance,
            thetas: p.thetas,
            theta_levels: p.theta_levels,
            slice_radius: p.slice_radius,
            band_start: p.band_start,
            band_count: p.band_count,
        }
    }

    /// The config as hashed into the output directory name; the output root
    /// itself is left out so that relocating a run does not rename it.
    pub fn identity(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut v {
            map.remove("out");
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Reads `path` (if any), applies `overrides`, fills defaults and validates.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Missing {
                path: p.to_path_buf(),
                source,
            })?;
            serde_json::from_str::<Value>(&text).map_err(|e| ConfigError::Syntax(e.to_string()))?
        }
        None => Value::Object(Default::default()),
    };
    let Value::Object(map) = &mut doc else {
        return Err(ConfigError::Syntax("top level must be an object".into()));
    };
    if let Some(c) = overrides.subcommand {
        map.insert("subcommand".into(), Value::String(c.name().into()));
    }
    if let Some(s) = overrides.seed {
        map.insert("seed".into(), s.into());
    }
    if let Some(o) = &overrides.out {
        map.insert("out".into(), Value::String(o.display().to_string()));
    }
    if let Some(a) = overrides.alpha {
        map.insert("alpha".into(), a.into());
    }
    if let Some(b) = overrides.base {
        map.insert("base".into(), b.into());
    }
    for assignment in &overrides.set {
        apply_assignment(&mut doc, assignment)?;
    }
    parse_value(doc)
}

/// As [`parse_config`] from an in-memory document.
pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    let doc = serde_json::from_str::<Value>(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    parse_value(doc)
}

fn parse_value(doc: Value) -> Result<RunConfig, ConfigError> {
    if !doc.get("subcommand").is_some_and(|v| !v.is_null()) {
        return Err(invalid("subcommand", "missing"));
    }
    let mut config: RunConfig = serde_json::from_value(doc).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if config.function.is_none() {
        config.function = Some(FunctionSpec::Takagi {
            base: config.base,
            alpha: config.alpha,
        });
    }
    validate(&config)?;
    Ok(config)
}

fn apply_assignment(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "expected KEY=VALUE"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let Value::Object(map) = node else {
            return Err(invalid(key, "cannot descend into a non-object"));
        };
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(invalid(key, "empty key"))
}

fn check_alpha(key: &str, alpha: f64) -> Result<(), ConfigError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must lie in (0, 1), got {alpha}")))
    }
}

fn check_base(key: &str, base: u32) -> Result<(), ConfigError> {
    if base >= 2 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be at least 2, got {base}")))
    }
}

fn check_ladder(key: &str, ladder: &[usize]) -> Result<(), ConfigError> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(invalid(key, "need at least 2 strictly ascending positive resolutions"));
    }
    Ok(())
}

fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    check_alpha("alpha", c.alpha)?;
    check_base("base", c.base)?;
    match c.function() {
        FunctionSpec::Takagi { base, alpha } | FunctionSpec::Weierstrass { base, alpha, .. } => {
            check_alpha("function.alpha", *alpha)?;
            check_base("function.base", *base)?;
        }
        FunctionSpec::Zero | FunctionSpec::Identity => {}
    }
    if let EmbeddingSpec::Lacunary { lambda, delta } = &c.embedding {
        check_base("embedding.lambda", *lambda)?;
        if let Some(d) = delta {
            if !(*d > 0.0 && *d < 1.0) {
                return Err(invalid("embedding.delta", "must lie in (0, 1)"));
            }
        }
    }
    if !(c.probe.rho > 0.0) {
        return Err(invalid("rho", format!("must be positive, got {}", c.probe.rho)));
    }
    if !(c.conjecture.rho > 0.0) {
        return Err(invalid("conjecture.rho", "must be positive"));
    }
    let e = &c.estimator;
    if !(0.0..=1.0).contains(&e.x) {
        return Err(invalid("estimator.x", "must lie in [0, 1]"));
    }
    if e.n < 2 {
        return Err(invalid("estimator.n", "grid must have at least 2 cells"));
    }
    check_ladder("estimator.ladder", &e.ladder)?;
    if !(e.r > 0.0) {
        return Err(invalid("estimator.r", "must be positive"));
    }
    if e.s.iter().any(|s| !(*s > 0.0)) {
        return Err(invalid("estimator.s", "exponents must be positive"));
    }
    if !(e.cutoff > 0.0) {
        return Err(invalid("estimator.cutoff", "must be positive"));
    }
    if !(e.band_start > 0.0) {
        return Err(invalid("estimator.band_start", "must be positive"));
    }
    if e.grids.is_empty() || e.grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("estimator.grids", "need strictly ascending grid sizes"));
    }
    Ok(())
}
