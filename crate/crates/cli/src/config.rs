//! Config file loading and flag resolution.

use std::path::Path;

use fpplab_core::experiments::{ExperimentConfig, SeedValue, SCHEMA_VERSION};

use crate::{Failure, Flags, Kind};

pub const DEFAULT_SEED: u64 = 20_241_019;

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub n: usize,
    pub n_grid: Vec<usize>,
    pub k: usize,
    pub eps: f64,
    pub c: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<String>,
    pub bonsai_eps_variant: bool,
    /// Echo of the resolved values, without `workers` and `out`.
    pub echo: ExperimentConfig,
}

/// Reads a JSON config; a blank file means all defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(ExperimentConfig::default());
    }
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn from_flags(flags: &Flags) -> ExperimentConfig {
    ExperimentConfig {
        n: flags.n,
        n_grid: flags.n_grid.clone(),
        k: flags.k,
        eps: flags.eps,
        c: flags.c,
        delta: flags.delta,
        trials: flags.trials,
        seed: flags.seed.clone().map(SeedValue::Text),
        workers: flags.workers,
        out: flags.out.clone(),
        bonsai_eps_variant: flags.bonsai_eps_variant.then_some(true),
        ..Default::default()
    }
}

struct Defaults {
    n: usize,
    k: usize,
    eps: f64,
    trials: usize,
}

fn defaults(kind: Kind) -> Defaults {
    let d = |n, k, eps, trials| Defaults { n, k, eps, trials };
    match kind {
        Kind::Constants => d(1_000_000, 1, 0.1, 1),
        Kind::Simulate => d(1000, 1, 0.1, 100),
        Kind::Hops => d(1000, 1, 0.1, 200),
        Kind::VerifySptTail => d(10_000, 1, 0.1, 100_000),
        Kind::VerifyRrtHeight => d(10_000, 1, 0.1, 100_000),
        Kind::VerifyMaxTail => d(500, 1, 0.1, 200),
        Kind::CountPairs => d(7, 4, 0.1, 1),
        Kind::LightPaths => d(30, 3, 0.1, 10_000),
        Kind::LightestGivenLight => d(1000, 5, 0.3, 2000),
        Kind::Predicates => d(200, 5, 0.3, 200),
        Kind::KeyLemma => d(7, 1, 0.1, 1000),
        Kind::Coupling => d(1000, 1, 0.1, 100),
        Kind::OrderStats => d(100, 1, 0.1, 1000),
        Kind::EstimateAlpha => d(1000, 1, 0.1, 50),
    }
}

pub fn resolve(kind: Kind, flags: &Flags) -> Result<Resolved, Failure> {
    let file = match &flags.config {
        Some(path) => load_config(Path::new(path))?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &file.experiment {
        if name != kind.name() {
            return Err(Failure::Usage(format!(
                "config is for experiment {name:?}, not {:?}",
                kind.name()
            )));
        }
    }
    let merged = file.overridden_by(&from_flags(flags));
    merged.validate()?;
    let d = defaults(kind);
    let n = merged.n.unwrap_or(d.n);
    let n_grid = match (&merged.n_grid, kind) {
        (Some(grid), _) => grid.clone(),
        (None, Kind::EstimateAlpha) => vec![250, 500, 1000, 2000],
        (None, _) => vec![n],
    };
    let seed = match &merged.seed {
        Some(s) => s.resolve()?,
        None => DEFAULT_SEED,
    };
    let workers = merged.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    });
    let mut r = Resolved {
        n,
        n_grid,
        k: merged.k.unwrap_or(d.k),
        eps: merged.eps.unwrap_or(d.eps),
        c: merged.c.unwrap_or(1.0),
        delta: merged.delta.unwrap_or(0.1),
        trials: merged.trials.unwrap_or(d.trials),
        seed,
        workers,
        out: merged.out.clone(),
        bonsai_eps_variant: merged.bonsai_eps_variant.unwrap_or(false),
        echo: ExperimentConfig::default(),
    };
    r.echo = ExperimentConfig {
        schema_version: Some(SCHEMA_VERSION),
        experiment: Some(kind.name().to_string()),
        n: Some(r.n),
        n_grid: Some(r.n_grid.clone()),
        k: Some(r.k),
        eps: Some(r.eps),
        c: Some(r.c),
        delta: Some(r.delta),
        trials: Some(r.trials),
        seed: Some(SeedValue::Number(r.seed)),
        workers: None,
        out: None,
        bonsai_eps_variant: Some(r.bonsai_eps_variant),
    };
    Ok(r)
}
