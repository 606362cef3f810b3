use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{DataConfig, Splits};
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::models::Variant;
use crate::train::{evaluate_model, train, Checkpoint, EpochLog, TrainConfig};

const MANIFEST_VERSION: u32 = 1;

/// Record of one training run, sufficient to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub hash: String,
    pub data: DataConfig,
    pub config: TrainConfig,
    pub seed: u64,
    pub history: Vec<EpochLog>,
    pub best_epoch: Option<usize>,
    pub dev: Option<EvalReport>,
    pub test: Option<EvalReport>,
    pub error: Option<String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn is_complete(&self) -> bool {
        self.error.is_none() && self.dev.is_some() && self.test.is_some()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Canonical form of a run's settings. λ is irrelevant without an adversary,
/// so standard runs normalize it to 0 and share a hash across the λ grid.
pub fn canonical_config(config: &TrainConfig) -> TrainConfig {
    let mut c = config.clone();
    if c.variant == Variant::Standard {
        c.lambda = 0.0;
    }
    c
}

/// Content hash of the run inputs: the data description (and the file bytes
/// for CSV sources) plus the canonical training settings.
pub fn content_hash(data: &DataConfig, config: &TrainConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(format!("fairlab-run v{MANIFEST_VERSION}\n"));
    h.update(serde_json::to_vec(data)?);
    h.update(b"\n");
    h.update(serde_json::to_vec(&canonical_config(config))?);
    if !data.is_generated() {
        h.update(b"\n");
        h.update(std::fs::read(&data.source)?);
    }
    Ok(hex::encode(&h.finalize()[..8]))
}

/// Trains one configuration on already loaded data. Training errors are
/// recorded in the manifest rather than returned.
pub fn run_one(
    data: &DataConfig,
    splits: &Splits,
    config: &TrainConfig,
) -> Result<(RunManifest, Option<Checkpoint>)> {
    let config = canonical_config(config);
    let hash = content_hash(data, &config)?;
    let start = Instant::now();
    let outcome = train(&config, &splits.train, &splits.dev).and_then(|(ck, history)| {
        let test = evaluate_model(&ck.model, &splits.test)?;
        Ok((ck, history, test))
    });
    let duration_secs = start.elapsed().as_secs_f64();
    let mut manifest = RunManifest {
        version: MANIFEST_VERSION,
        hash,
        data: data.clone(),
        seed: config.seed,
        config,
        history: Vec::new(),
        best_epoch: None,
        dev: None,
        test: None,
        error: None,
        duration_secs,
    };
    match outcome {
        Ok((ck, history, test)) => {
            manifest.history = history;
            manifest.best_epoch = Some(ck.epoch);
            manifest.dev = Some(ck.dev);
            manifest.test = Some(test);
            Ok((manifest, Some(ck)))
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            Ok((manifest, None))
        }
    }
}

/// Re-runs a manifest's configuration from scratch.
pub fn replay(manifest: &RunManifest) -> Result<RunManifest> {
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Format {
            what: "manifest",
            msg: format!("unsupported version {}", manifest.version),
        });
    }
    let splits = manifest.data.load()?;
    Ok(run_one(&manifest.data, &splits, &manifest.config)?.0)
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (DataConfig, TrainConfig) {
        let data = DataConfig {
            n_train: 120,
            n_dev: 40,
            n_test: 40,
            ..Default::default()
        };
        let cfg = TrainConfig {
            variant: Variant::Adv,
            lambda: 0.5,
            epochs: 3,
            hidden: 6,
            batch_size: 32,
            seed: 4,
            ..Default::default()
        };
        (data, cfg)
    }

    #[test]
    fn standard_hash_ignores_lambda() {
        let (data, cfg) = tiny();
        let s1 = TrainConfig {
            variant: Variant::Standard,
            lambda: 0.1,
            ..cfg.clone()
        };
        let s2 = TrainConfig {
            lambda: 10.0,
            ..s1.clone()
        };
        assert_eq!(
            content_hash(&data, &s1).unwrap(),
            content_hash(&data, &s2).unwrap()
        );
        let a2 = TrainConfig {
            lambda: 10.0,
            ..cfg.clone()
        };
        assert_ne!(
            content_hash(&data, &cfg).unwrap(),
            content_hash(&data, &a2).unwrap()
        );
    }

    #[test]
    fn replay_reproduces_reports() {
        let (data, cfg) = tiny();
        let splits = data.load().unwrap();
        let (m, _) = run_one(&data, &splits, &cfg).unwrap();
        assert!(m.is_complete());
        let again = replay(&m).unwrap();
        assert_eq!(again.history, m.history);
        assert_eq!(again.test, m.test);
        assert_eq!(again.hash, m.hash);
    }

    #[test]
    fn manifest_json_round_trip() {
        let (data, cfg) = tiny();
        let (m, _) = run_one(&data, &data.load().unwrap(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs").join("x.json");
        m.save(&p).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
    }

    #[test]
    fn training_errors_are_recorded() {
        let (mut data, cfg) = tiny();
        data.protected_fraction = 0.0;
        let (m, ck) = run_one(&data, &data.load().unwrap(), &cfg).unwrap();
        assert!(ck.is_none());
        assert!(m.error.as_deref().unwrap().contains("protected"));
    }
}
