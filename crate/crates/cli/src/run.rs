//! Subcommand dispatch: each subcommand maps to one estimator or experiment,
//! whose summary, tables and plots are persisted as an experiment record.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use holder_core::dimension::{graph_dim, level_dim, level_set, DimensionFit, PointSet};
use holder_core::embedding::{certify_biholder, reverse_holder_fraction, search_embedding};
use holder_core::experiments::{
    run_conjecture_probe, verify_energy_finiteness, verify_part1, verify_part2, verify_sobolev, ExperimentRecord,
    FunctionSpec, Table,
};
use holder_core::functions::{perturb, tail_bound, PeriodicGenerator, Perturbation, WeierstrassParams};
use holder_core::measures::{decay_exponent, energy, lift_measure, project, sobolev_integral, DyadicBands};
use holder_core::slicing::{central_levels, disintegration_defect, slice_report, SliceIndex, SliceRow};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::plot::{emit_plot, LogLogPlot};

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_UNDEFINED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] holder_core::Error),
    #[error(transparent)]
    Plot(#[from] crate::plot::PlotError),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

fn invalid(key: &'static str, reason: impl Into<String>) -> RunError {
    RunError::Invalid {
        key,
        reason: reason.into(),
    }
}

/// What a finished run produced.
#[derive(Debug)]
pub struct Outcome {
    pub command: Command,
    pub summary: Value,
    /// Text for standard output.
    pub display: String,
    pub directory: PathBuf,
    pub exit_code: i32,
}

/// Result of one subcommand before persistence.
struct Product {
    summary: Value,
    tables: Vec<Table>,
    plots: Vec<(String, LogLogPlot)>,
    /// Overrides the pretty-printed summary on standard output.
    display: Option<String>,
    undefined: bool,
}

impl Product {
    fn new(summary: Value) -> Self {
        Self {
            summary,
            tables: Vec::new(),
            plots: Vec::new(),
            display: None,
            undefined: false,
        }
    }

    fn table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }
}

/// Runs the configured subcommand and writes its record under `config.out`.
pub fn dispatch(config: &RunConfig) -> Result<Outcome, RunError> {
    let started = Instant::now();
    let product = run(config)?;
    let mut record = ExperimentRecord::new(
        config.subcommand.name(),
        config.seed,
        &config.identity(),
        &product.summary,
    )?;
    for t in product.tables {
        record = record.with_table(t);
    }
    record.wall_clock_seconds = started.elapsed().as_secs_f64();
    let directory = record.persist(&config.out)?;
    if config.estimator.plot {
        for (name, plot) in &product.plots {
            emit_plot(plot, &directory.join(format!("{name}.svg")))?;
        }
    }
    let display = product
        .display
        .unwrap_or_else(|| serde_json::to_string_pretty(&product.summary).expect("summary serializes"));
    Ok(Outcome {
        command: config.subcommand,
        summary: product.summary,
        display,
        directory,
        exit_code: if product.undefined { EXIT_UNDEFINED } else { EXIT_OK },
    })
}

fn run(c: &RunConfig) -> Result<Product, RunError> {
    let e = &c.estimator;
    match c.subcommand {
        Command::Eval => {
            let f = c.function().build()?;
            let value = f.eval(e.x);
            let mut p = Product::new(json!({ "x": e.x, "value": value }));
            p.display = Some(format!("{value}"));
            Ok(p)
        }
        Command::TailBound => {
            let params = weierstrass_params(c.function())?;
            let bound = tail_bound(&params);
            let mut p = Product::new(json!({ "depth": params.depth(), "tail_bound": bound }));
            p.display = Some(format!("{bound}"));
            Ok(p)
        }
        Command::PerturbEval => {
            let f = c.function().build()?;
            let phi = Arc::new(embedding(c)?);
            let t = if e.t.is_empty() {
                vec![0.0; phi.dim()]
            } else {
                e.t.clone()
            };
            let ft = perturb(&f, &Perturbation::new(t.clone(), phi)?)?;
            let value = ft.eval(e.x);
            let mut p = Product::new(json!({ "x": e.x, "t": t, "value": value, "base_value": f.eval(e.x) }));
            p.display = Some(format!("{value}"));
            Ok(p)
        }
        Command::GraphDim => {
            let f = c.function().build()?;
            let fit = graph_dim(&f, e.n, &e.ladder, e.window.clone())?;
            Ok(fit_product("graph_dim", "graph packing", &fit))
        }
        Command::LevelDim => {
            let f = c.function().build()?;
            let fit = level_dim(&f, e.y, &e.ladder, e.band_constant, e.window.clone())?;
            Ok(fit_product("level_dim", "level set packing", &fit))
        }
        Command::Levelset => {
            let f = c.function().build()?;
            let eps = e
                .epsilon
                .unwrap_or_else(|| f.holder_constant().unwrap_or(1.0) * (e.n as f64).powf(-f.alpha()));
            let PointSet::Line(points) = level_set(&f, e.y, e.n, eps)? else {
                unreachable!("level sets lie on the line")
            };
            let mut table = Table::new("levelset", &["x"]);
            for x in &points {
                table.push(vec![*x]);
            }
            Ok(Product::new(json!({ "y": e.y, "n": e.n, "epsilon": eps, "points": points.len() })).table(table))
        }
        Command::FourierDecay => {
            let mu = project(&lift_measure(&c.function().build()?, e.n), e.theta);
            let bands = DyadicBands {
                start: e.band_start,
                count: e.band_count,
            };
            let fit = decay_exponent(&mu, &bands, e.n)?;
            let mut table = Table::new("bands", &["frequency", "mean_power"]);
            for (xi, m) in &fit.profile.band_averages {
                table.push(vec![*xi, *m]);
            }
            let mut p = Product::new(json!({
                "theta": e.theta,
                "n": e.n,
                "bands": bands,
                "eta": fit.eta,
                "r2": fit.fit.r2,
                "rejected": fit.rejected,
            }))
            .table(table);
            p.plots.push((
                "fourier_decay".into(),
                LogLogPlot::from_decay_fit("Fourier decay", &fit),
            ));
            p.undefined = fit.rejected;
            Ok(p)
        }
        Command::Sobolev => {
            let beta = e.beta.unwrap_or(1.1);
            let mu = project(&lift_measure(&c.function().build()?, e.n), e.theta);
            let trace = sobolev_integral(&mu, beta, e.cutoff, e.doublings)?;
            let mut table = Table::new("sobolev", &["cutoff", "integral"]);
            for (k, v) in trace.cutoffs.iter().zip(&trace.integrals) {
                table.push(vec![*k, *v]);
            }
            Ok(Product::new(json!({
                "theta": e.theta,
                "n": e.n,
                "beta": beta,
                "trace": trace,
                "last_ratio": trace.last_ratio(),
            }))
            .table(table))
        }
        Command::Energy => {
            let mu = lift_measure(&c.function().build()?, e.n);
            let estimates = e.s.iter().map(|&s| energy(&mu, s)).collect::<Result<Vec<_>, _>>()?;
            let mut table = Table::new("energy", &["s", "energy", "half_resolution", "ratio"]);
            for est in &estimates {
                table.push(vec![est.s, est.value, est.half_value, est.convergence_ratio]);
            }
            Ok(Product::new(json!({ "n": e.n, "estimates": estimates })).table(table))
        }
        Command::Slice => {
            let mu = lift_measure(&c.function().build()?, e.n);
            let (lo, hi) = SliceIndex::new(&mu, e.theta)
                .hull()
                .ok_or_else(|| invalid("estimator.n", "empty measure"))?;
            let ys = central_levels(lo, hi, e.levels);
            let rows = slice_report(&mu, e.theta, &ys, e.r, &e.s)?;
            let mut table = Table::new(
                "slices",
                &["theta", "y", "r", "band_mass", "density", "s", "energy", "stability"],
            );
            for row in &rows {
                for k in 0..row.exponents.len() {
                    table.push(vec![
                        row.theta,
                        row.y,
                        row.r,
                        row.band_mass,
                        row.density,
                        row.exponents[k],
                        row.energies[k],
                        row.stability[k],
                    ]);
                }
            }
            let stable: Vec<usize> = (0..e.s.len())
                .map(|k| rows.iter().filter(|r: &&SliceRow| r.stable(k)).count())
                .collect();
            Ok(Product::new(json!({
                "theta": e.theta,
                "r": e.r,
                "n": e.n,
                "exponents": e.s,
                "levels": ys.len(),
                "stable_levels": stable,
            }))
            .table(table))
        }
        Command::DisintegrationCheck => {
            let mu = lift_measure(&c.function().build()?, e.n);
            let delta = e.delta.unwrap_or(e.r);
            let defect = disintegration_defect(&mu, e.theta, e.r, delta)?;
            let mut p = Product::new(json!({ "theta": e.theta, "r": e.r, "delta": delta, "defect": defect }));
            p.display = Some(format!("{defect}"));
            Ok(p)
        }
        Command::EmbeddingBuild => {
            let phi = embedding(c)?;
            let samples = phi.sample(e.n);
            let header: Vec<String> = std::iter::once("x".to_string())
                .chain((0..phi.dim()).map(|k| format!("phi{k}")))
                .collect();
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut table = Table::new("embedding", &header_refs);
            for i in 0..=e.n {
                let mut row = vec![holder_core::functions::grid_point(i, e.n)];
                row.extend_from_slice(samples.row(i));
                table.push(row);
            }
            Ok(Product::new(json!({
                "description": phi.description(),
                "dim": phi.dim(),
                "alpha": phi.alpha(),
                "c1_estimate": phi.c1_estimate(),
                "c2_estimate": phi.c2_estimate(),
                "resolution_floor": phi.resolution_floor(),
            }))
            .table(table))
        }
        Command::EmbeddingCertify => {
            let phi = embedding(c)?;
            let cert = certify_biholder(&phi, c.alpha, &e.grids)?;
            let mut table = Table::new("certificate", &["n", "c1", "c2", "pairs"]);
            for t in &cert.trace {
                table.push(vec![t.n as f64, t.c1, t.c2, t.pairs as f64]);
            }
            Ok(Product::new(json!({ "description": phi.description(), "certificate": cert })).table(table))
        }
        Command::EmbeddingSearch => {
            let outcome = search_embedding(c.base, c.alpha, e.generators, e.budget, c.seed)?;
            let mut table = Table::new("search", &["iteration", "best_c1"]);
            for (i, v) in outcome.best_trace.iter().enumerate() {
                table.push(vec![i as f64, *v]);
            }
            Ok(Product::new(serde_json::to_value(&outcome).map_err(holder_core::Error::from)?).table(table))
        }
        Command::ReverseHolder => {
            let f = c.function().build()?;
            let fraction = reverse_holder_fraction(&f, f.alpha(), e.eps, e.x, e.interval, e.n)?;
            let mut p = Product::new(json!({
                "x": e.x,
                "interval": e.interval,
                "eps": e.eps,
                "n": e.n,
                "fraction": fraction,
            }));
            p.display = Some(format!("{fraction}"));
            Ok(p)
        }
        Command::VerifyPart1 => {
            let report = verify_part1(&c.probe_config())?;
            let total_levels = report.samples * c.probe.levels;
            let undefined: usize = report.per_sample.iter().map(|s| s.undefined_levels).sum();
            let mut p = Product::new(to_value(&report)?).table(report.levels.clone());
            p.undefined = 2 * undefined > total_levels;
            Ok(p)
        }
        Command::VerifyPart2 => {
            let report = verify_part2(&c.probe_config())?;
            Ok(Product::new(to_value(&report)?).table(report.levels.clone()))
        }
        Command::VerifySobolev => {
            let report = verify_sobolev(&c.probe_config(), e.beta.unwrap_or(1.1))?;
            Ok(Product::new(to_value(&report)?).table(report.bands.clone()))
        }
        Command::VerifyEnergy => {
            let report = verify_energy_finiteness(&c.probe_config(), e.beta.unwrap_or(0.25))?;
            let mut table = Table::new("samples", &["energy", "energy_half", "diverging", "graph_dim"]);
            for s in &report.per_sample {
                table.push(vec![
                    s.energy,
                    s.energy_half,
                    if s.diverging { 1.0 } else { 0.0 },
                    s.graph_dim,
                ]);
            }
            Ok(Product::new(to_value(&report)?).table(table))
        }
        Command::ConjectureProbe => {
            let report = run_conjecture_probe(c.base, c.alpha, c.seed, e.budget, &c.conjecture)?;
            let renamed = |t: &Table, name: &str| Table {
                name: name.to_string(),
                ..t.clone()
            };
            let mut p = Product::new(to_value(&report)?).table(renamed(&report.part2.levels, "part2_levels"));
            if let Some(part1) = &report.part1 {
                p = p.table(renamed(&part1.levels, "part1_levels"));
            }
            Ok(p)
        }
    }
}

fn to_value(v: &impl serde::Serialize) -> Result<Value, RunError> {
    Ok(serde_json::to_value(v).map_err(holder_core::Error::from)?)
}

fn fit_product(name: &str, title: &str, fit: &DimensionFit) -> Product {
    let mut table = Table::new("counts", &["r", "count"]);
    for (r, n) in fit.scales.iter().zip(&fit.counts) {
        table.push(vec![*r, *n as f64]);
    }
    let mut p = Product::new(json!({
        "slope": fit.slope,
        "stderr": fit.stderr,
        "r2": fit.r2,
        "window": [fit.window.start, fit.window.end],
        "counts": fit.counts,
        "degenerate": fit.degenerate,
        "undefined": fit.undefined,
    }))
    .table(table);
    if fit.counts.iter().filter(|&&n| n > 0).count() >= 2 {
        p.plots
            .push((name.to_string(), LogLogPlot::from_dimension_fit(title, fit)));
    }
    p.undefined = fit.undefined || fit.degenerate;
    p
}

fn weierstrass_params(spec: &FunctionSpec) -> Result<WeierstrassParams, RunError> {
    Ok(match spec {
        FunctionSpec::Takagi { base, alpha } => {
            WeierstrassParams::new(*base, *alpha, PeriodicGenerator::TriangleDistance)?
        }
        FunctionSpec::Weierstrass { base, alpha, generator } => {
            WeierstrassParams::new(*base, *alpha, generator.clone())?
        }
        FunctionSpec::Zero | FunctionSpec::Identity => {
            return Err(invalid("function", "tail bounds need a Weierstrass-type function"))
        }
    })
}

fn embedding(c: &RunConfig) -> Result<holder_core::embedding::SnowflakeEmbedding, RunError> {
    c.embedding
        .build(c.alpha, c.estimator.n)?
        .ok_or_else(|| invalid("embedding", "this subcommand needs an embedding"))
}
