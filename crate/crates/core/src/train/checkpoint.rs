use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::models::MainModel;
use crate::nn::{Dense, MlpParams, MlpSpec, Tensors};

const MAGIC: &str = "fairlab-checkpoint 1";

/// Per-epoch training record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-indexed.
    pub epoch: usize,
    pub train_loss: f64,
    pub adv_loss: Option<f64>,
    pub dev_accuracy: f64,
    pub dev_fairness: f64,
    pub dev_dto: f64,
    /// Main learning rate used during this epoch.
    pub lr: f64,
}

/// Main model snapshot at the best dev-DTO epoch. The adversary is not kept.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: MainModel,
    pub epoch: usize,
    pub dev: EvalReport,
}

fn hex_line(out: &mut String, label: &str, values: &[f64]) {
    out.push_str(label);
    for v in values {
        let _ = write!(out, " {:016x}", v.to_bits());
    }
    out.push('\n');
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format {
        what: "checkpoint",
        msg: msg.into(),
    }
}

impl Checkpoint {
    /// Line-oriented text with every float stored as its IEEE-754 bit
    /// pattern, so loading reproduces the model bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let _ = writeln!(out, "epoch {}", self.epoch);
        let d = &self.dev;
        hex_line(&mut out, "dev", &[d.accuracy, d.rms_gap, d.fairness, d.dto]);
        for (name, net) in [
            ("encoder", &self.model.encoder),
            ("classifier", &self.model.classifier),
        ] {
            let spec = serde_json::to_string(&net.spec).expect("spec serializes");
            let _ = writeln!(out, "{name} {spec}");
            for t in net.tensors() {
                hex_line(&mut out, "tensor", t);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| format_err(format!("missing {what}")))
        };
        if next("header")? != MAGIC {
            return Err(format_err("unrecognized header"));
        }
        let epoch = next("epoch")?
            .strip_prefix("epoch ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err("bad epoch line"))?;
        let dev = parse_hex(next("dev")?, "dev")?;
        if dev.len() != 4 {
            return Err(format_err("dev line needs 4 values"));
        }
        let mut nets = Vec::new();
        for name in ["encoder", "classifier"] {
            let spec_line = next(name)?;
            let json = spec_line
                .strip_prefix(name)
                .ok_or_else(|| format_err(format!("expected {name} line")))?;
            let spec: MlpSpec = serde_json::from_str(json.trim())?;
            spec.validate()?;
            let layers = spec
                .layer_dims()
                .into_iter()
                .map(|(i, o)| Dense::zeros(i, o))
                .collect();
            let mut net = MlpParams::from_layers(spec, layers)?;
            for t in net.tensors_mut() {
                let values = parse_hex(next("tensor")?, "tensor")?;
                if values.len() != t.len() {
                    return Err(format_err(format!(
                        "tensor has {} values, expected {}",
                        values.len(),
                        t.len()
                    )));
                }
                t.copy_from_slice(&values);
            }
            nets.push(net);
        }
        let classifier = nets.pop().expect("two nets");
        let encoder = nets.pop().expect("two nets");
        Ok(Checkpoint {
            model: MainModel::from_parts(encoder, classifier)?,
            epoch,
            dev: EvalReport {
                accuracy: dev[0],
                rms_gap: dev[1],
                fairness: dev[2],
                dto: dev[3],
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn parse_hex(line: &str, label: &str) -> Result<Vec<f64>> {
    let mut parts = line.split_ascii_whitespace();
    if parts.next() != Some(label) {
        return Err(format_err(format!("expected {label} line")));
    }
    parts
        .map(|p| {
            u64::from_str_radix(p, 16)
                .map(f64::from_bits)
                .map_err(|_| format_err(format!("bad hex value {p:?}")))
        })
        .collect()
}
