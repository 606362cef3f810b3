use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{generate, load_csv, mask_protected, split, Dataset, JointSpec};
use crate::error::{Error, Result};
use crate::models::Variant;
use crate::train::TrainConfig;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "FAIRLAB_OUT";

/// Where the train/dev/test data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// Generator spec name (`moji_default`, `bios_like`) or a CSV path.
    pub source: String,
    pub n_train: usize,
    pub n_dev: usize,
    pub n_test: usize,
    /// Train/dev/test fractions when the source is a CSV file.
    pub split: [f64; 3],
    pub data_seed: u64,
    /// Fraction of training instances that keep their protected label.
    pub protected_fraction: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: "moji_default".into(),
            n_train: 20_000,
            n_dev: 2_000,
            n_test: 2_000,
            split: [0.8, 0.1, 0.1],
            data_seed: 0,
            protected_fraction: 1.0,
        }
    }
}

/// Train, dev and test sets.
#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
}

impl DataConfig {
    pub fn is_generated(&self) -> bool {
        JointSpec::by_name(&self.source).is_ok()
    }

    pub fn load(&self) -> Result<Splits> {
        let (train, dev, test) = match JointSpec::by_name(&self.source) {
            Ok(spec) => {
                let n = self.n_train + self.n_dev + self.n_test;
                let all = generate(&spec, n, self.data_seed)?;
                let idx: Vec<usize> = (0..n).collect();
                let (a, rest) = idx.split_at(self.n_train);
                let (b, c) = rest.split_at(self.n_dev);
                (all.subset(a), all.subset(b), all.subset(c))
            }
            Err(_) => {
                let ds = load_csv(Path::new(&self.source))?;
                split(&ds, self.split, self.data_seed)?
            }
        };
        let train = if self.protected_fraction < 1.0 {
            mask_protected(&train, self.protected_fraction, self.data_seed)?
        } else {
            train
        };
        Ok(Splits { train, dev, test })
    }
}

/// A sweep over variants × λ × seeds on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub variants: Vec<Variant>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    /// Explicit λ values; when non-empty they replace the log grid.
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Base training settings; variant, λ and seed are set per run.
    pub train: TrainConfig,
    pub out: PathBuf,
    /// Concurrent training runs.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataConfig::default(),
            variants: vec![Variant::Standard, Variant::Adv, Variant::AAdv],
            lambda_min: 1e-3,
            lambda_max: 1e3,
            lambda_count: 7,
            lambdas: Vec::new(),
            seeds: (0..5).collect(),
            train: TrainConfig::default(),
            out: default_out_dir(),
            jobs: 1,
        }
    }
}

/// `$FAIRLAB_OUT`, or `out` when unset.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from)
}

/// `count` values evenly spaced in log10 between `min` and `max`, inclusive.
/// Exact powers of ten come out exact.
pub fn lambda_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda endpoints must satisfy 0 < min <= max, got [{min}, {max}]"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("lambda_count must be >= 1".into()));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.log10(), max.log10());
    Ok((0..count)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let rounded = e.round();
            if (e - rounded).abs() < 1e-9 {
                10f64.powi(rounded as i32)
            } else {
                10f64.powf(e)
            }
        })
        .collect())
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad entry {s:?} for {key}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    pub fn lambda_values(&self) -> Result<Vec<f64>> {
        if self.lambdas.is_empty() {
            lambda_grid(self.lambda_min, self.lambda_max, self.lambda_count)
        } else {
            Ok(self.lambdas.clone())
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one variant is required".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one seed is required".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidArgument("jobs must be >= 1".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda values must be > 0, got {l}"
            )));
        }
        self.lambda_values()?;
        if !(0.0..=1.0).contains(&self.data.protected_fraction) {
            return Err(Error::InvalidArgument(
                "protected_fraction must lie in [0, 1]".into(),
            ));
        }
        self.train.validate()
    }

    /// Applies one `key = value` setting. Keys are field names; data fields
    /// and training fields may be given bare (`epochs`) or qualified
    /// (`train.epochs`, `data.n_train`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "variants" => self.variants = parse_list(key, value)?,
            "lambda_min" => self.lambda_min = parse_one(key, value)?,
            "lambda_max" => self.lambda_max = parse_one(key, value)?,
            "lambda_count" => self.lambda_count = parse_one(key, value)?,
            "lambdas" => self.lambdas = parse_list(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = parse_one(key, value)?,
            "data" | "source" | "data.source" => self.data.source = value.to_string(),
            _ => {
                let bare = key
                    .strip_prefix("data.")
                    .or_else(|| key.strip_prefix("train."))
                    .unwrap_or(key);
                if set_field(&mut self.data, bare, value)?
                    || set_field(&mut self.train, bare, value)?
                {
                    return Ok(());
                }
                return Err(Error::InvalidArgument(format!(
                    "unknown config key `{key}`"
                )));
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// skipped; later keys override earlier ones.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "config".into(),
                line: n + 1,
                msg: format!("expected key = value, found {line:?}"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                path: "config".into(),
                line: n + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            },
            other => other,
        })
    }
}

/// Sets `key` on a serde struct from text. Returns `false` if the struct has
/// no such field.
fn set_field<T: Serialize + serde::de::DeserializeOwned>(
    target: &mut T,
    key: &str,
    value: &str,
) -> Result<bool> {
    let mut json = serde_json::to_value(&*target)?;
    let obj = json
        .as_object_mut()
        .expect("config serializes to an object");
    let Some(slot) = obj.get_mut(key) else {
        return Ok(false);
    };
    *slot = match serde_json::from_str::<serde_json::Value>(value) {
        Ok(v) if !slot.is_string() => v,
        _ => serde_json::Value::String(value.to_string()),
    };
    *target = serde_json::from_value(json)
        .map_err(|e| Error::InvalidArgument(format!("bad value {value:?} for {key}: {e}")))?;
    Ok(true)
}
