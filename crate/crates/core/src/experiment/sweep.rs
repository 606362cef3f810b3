use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::manifest::{canonical_config, content_hash, run_one, RunManifest};
use crate::error::{Error, Result};
use crate::train::TrainConfig;

/// Manifests of a sweep in plan order.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub manifests: Vec<RunManifest>,
    /// Runs trained in this call.
    pub computed: usize,
    /// Runs found complete on disk and skipped.
    pub reused: usize,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &RunManifest> {
        self.manifests.iter().filter(|m| !m.is_complete())
    }
}

/// Every (variant, λ, seed) training configuration, with runs that share a
/// content hash (standard runs across λ) listed once.
pub fn plan(cfg: &ExperimentConfig) -> Result<Vec<TrainConfig>> {
    cfg.validate()?;
    let lambdas = cfg.lambda_values()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &variant in &cfg.variants {
        for &lambda in &lambdas {
            for &seed in &cfg.seeds {
                let c = canonical_config(&TrainConfig {
                    variant,
                    lambda,
                    seed,
                    ..cfg.train.clone()
                });
                if seen.insert(content_hash(&cfg.data, &c)?) {
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

pub fn runs_dir(out: &Path) -> PathBuf {
    out.join("runs")
}

fn manifest_path(out: &Path, hash: &str) -> PathBuf {
    runs_dir(out).join(format!("{hash}.json"))
}

/// Trains every planned run not already completed under `cfg.out`, writing
/// each manifest as soon as its run finishes. Up to `cfg.jobs` runs train
/// concurrently.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let configs = plan(cfg)?;
    std::fs::create_dir_all(runs_dir(&cfg.out))?;
    let mut slots: Vec<Option<RunManifest>> = Vec::with_capacity(configs.len());
    let mut todo = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        let path = manifest_path(&cfg.out, &content_hash(&cfg.data, c)?);
        match RunManifest::load(&path) {
            Ok(m) if m.is_complete() => slots.push(Some(m)),
            _ => {
                slots.push(None);
                todo.push(i);
            }
        }
    }
    let reused = configs.len() - todo.len();
    if !todo.is_empty() {
        let splits = cfg.data.load()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        let done: Vec<Result<(usize, RunManifest)>> = pool.install(|| {
            todo.par_iter()
                .map(|&i| {
                    let (m, _) = run_one(&cfg.data, &splits, &configs[i])?;
                    m.save(&manifest_path(&cfg.out, &m.hash))?;
                    Ok((i, m))
                })
                .collect()
        });
        for r in done {
            let (i, m) = r?;
            slots[i] = Some(m);
        }
    }
    Ok(SweepOutcome {
        manifests: slots
            .into_iter()
            .map(|m| m.expect("every slot filled"))
            .collect(),
        computed: todo.len(),
        reused,
    })
}

/// All manifests under `out/runs`, sorted by file name.
pub fn load_manifests(out: &Path) -> Result<Vec<RunManifest>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(runs_dir(out))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunManifest::load(p)).collect()
}
