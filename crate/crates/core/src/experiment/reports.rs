use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::manifest::{write_atomic, RunManifest};
use crate::error::{Error, Result};
use crate::metrics::{constrained_select, mean_std, pareto_frontier, CandidatePoint, Provenance};
use crate::models::Variant;

/// Slack levels reported in `selection.csv`.
pub const SELECTION_SLACKS: [f64; 2] = [0.05, 0.10];

/// One line of `runs.csv`. `dto` is the test-set DTO.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub variant: Variant,
    pub lambda: f64,
    pub seed: u64,
    pub dev_acc: f64,
    pub dev_fair: f64,
    pub test_acc: f64,
    pub test_fair: f64,
    pub dto: f64,
}

/// One line of `summary.csv`: seed statistics for a (variant, λ) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: Variant,
    pub lambda: f64,
    pub n: usize,
    pub dev_acc_mean: f64,
    pub dev_acc_std: f64,
    pub dev_fair_mean: f64,
    pub dev_fair_std: f64,
    pub test_acc_mean: f64,
    pub test_acc_std: f64,
    pub test_fair_mean: f64,
    pub test_fair_std: f64,
    pub dto_mean: f64,
    pub dto_std: f64,
}

/// One point of a variant's seed-mean test frontier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub variant: Variant,
    pub lambda: f64,
    pub accuracy: f64,
    pub fairness: f64,
}

/// Constrained pick for one variant (or `all`) at one slack level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub variant: String,
    pub slack: f64,
    pub lambda: f64,
    pub dev_acc: f64,
    pub dev_fair: f64,
    pub test_acc: f64,
    pub test_fair: f64,
    pub floor: f64,
    pub reference: f64,
    /// `standard`, or `best-any` when the sweep has no standard runs.
    pub reference_source: String,
    pub fallback: bool,
}

const RUNS_HEADER: [&str; 8] = [
    "variant",
    "lambda",
    "seed",
    "dev_acc",
    "dev_fair",
    "test_acc",
    "test_fair",
    "dto",
];
const SUMMARY_HEADER: [&str; 13] = [
    "variant",
    "lambda",
    "n",
    "dev_acc_mean",
    "dev_acc_std",
    "dev_fair_mean",
    "dev_fair_std",
    "test_acc_mean",
    "test_acc_std",
    "test_fair_mean",
    "test_fair_std",
    "dto_mean",
    "dto_std",
];
const PARETO_HEADER: [&str; 4] = ["variant", "lambda", "accuracy", "fairness"];
const SELECTION_HEADER: [&str; 11] = [
    "variant",
    "slack",
    "lambda",
    "dev_acc",
    "dev_fair",
    "test_acc",
    "test_fair",
    "floor",
    "reference",
    "reference_source",
    "fallback",
];

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

fn from_csv<T: serde::de::DeserializeOwned, R: Read>(
    r: R,
    header: &[&str],
    name: &str,
) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Parse {
            path: name.into(),
            line: 1,
            msg: format!(
                "expected header {}, found {}",
                header.join(","),
                found.join(",")
            ),
        });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                path: name.into(),
                line: i + 2,
                msg: e.to_string(),
            })
        })
        .collect()
}

fn read_file<T: serde::de::DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    from_csv(
        std::fs::File::open(path)?,
        header,
        &path.display().to_string(),
    )
}

/// `runs.csv` line for a completed manifest.
pub fn run_record(m: &RunManifest) -> Option<Vec<String>> {
    let (dev, test) = (m.dev?, m.test?);
    Some(vec![
        m.config.variant.to_string(),
        f6(m.config.lambda),
        m.seed.to_string(),
        f6(dev.accuracy),
        f6(dev.fairness),
        f6(test.accuracy),
        f6(test.fairness),
        f6(test.dto),
    ])
}

/// `runs.csv` text for the completed manifests, sorted by variant, λ, seed.
pub fn format_runs(manifests: &[RunManifest]) -> Result<Vec<u8>> {
    let mut done: Vec<&RunManifest> = manifests.iter().filter(|m| m.is_complete()).collect();
    done.sort_by(|a, b| {
        a.config
            .variant
            .cmp(&b.config.variant)
            .then(a.config.lambda.total_cmp(&b.config.lambda))
            .then(a.seed.cmp(&b.seed))
    });
    to_csv(&RUNS_HEADER, done.into_iter().filter_map(run_record))
}

pub fn read_runs_from<R: Read>(r: R, name: &str) -> Result<Vec<RunRow>> {
    from_csv(r, &RUNS_HEADER, name)
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>> {
    read_file(path, &RUNS_HEADER)
}

/// Seed statistics per (variant, λ) in first-appearance order.
pub fn summarize(rows: &[RunRow]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(Variant, f64)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.variant, r.lambda)) {
            keys.push((r.variant, r.lambda));
        }
    }
    keys.into_iter()
        .map(|(variant, lambda)| {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| (r.variant, r.lambda) == (variant, lambda))
                .collect();
            let stat =
                |f: fn(&RunRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (da, df, ta, tf, d) = (
                stat(|r| r.dev_acc)?,
                stat(|r| r.dev_fair)?,
                stat(|r| r.test_acc)?,
                stat(|r| r.test_fair)?,
                stat(|r| r.dto)?,
            );
            Ok(SummaryRow {
                variant,
                lambda,
                n: group.len(),
                dev_acc_mean: da.mean,
                dev_acc_std: da.std,
                dev_fair_mean: df.mean,
                dev_fair_std: df.std,
                test_acc_mean: ta.mean,
                test_acc_std: ta.std,
                test_fair_mean: tf.mean,
                test_fair_std: tf.std,
                dto_mean: d.mean,
                dto_std: d.std,
            })
        })
        .collect()
}

pub fn format_summary(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    to_csv(
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.variant.to_string(),
                f6(r.lambda),
                r.n.to_string(),
                f6(r.dev_acc_mean),
                f6(r.dev_acc_std),
                f6(r.dev_fair_mean),
                f6(r.dev_fair_std),
                f6(r.test_acc_mean),
                f6(r.test_acc_std),
                f6(r.test_fair_mean),
                f6(r.test_fair_std),
                f6(r.dto_mean),
                f6(r.dto_std),
            ]
        }),
    )
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_file(path, &SUMMARY_HEADER)
}

fn point(variant: Variant, lambda: f64, accuracy: f64, fairness: f64) -> CandidatePoint {
    CandidatePoint::new(
        accuracy,
        fairness,
        Provenance {
            variant: variant.to_string(),
            lambda,
            seed: 0,
            epoch: 0,
        },
    )
}

/// Seed-mean test frontier of each variant, variants in first-appearance
/// order.
pub fn pareto_rows(summary: &[SummaryRow]) -> Vec<ParetoRow> {
    let mut variants: Vec<Variant> = Vec::new();
    for s in summary {
        if !variants.contains(&s.variant) {
            variants.push(s.variant);
        }
    }
    let mut out = Vec::new();
    for v in variants {
        let pts: Vec<CandidatePoint> = summary
            .iter()
            .filter(|s| s.variant == v)
            .map(|s| point(v, s.lambda, s.test_acc_mean, s.test_fair_mean))
            .collect();
        for p in pareto_frontier(&pts) {
            out.push(ParetoRow {
                variant: v,
                lambda: p.provenance.lambda,
                accuracy: p.accuracy,
                fairness: p.fairness,
            });
        }
    }
    out
}

pub fn format_pareto(rows: &[ParetoRow]) -> Result<Vec<u8>> {
    to_csv(
        &PARETO_HEADER,
        rows.iter().map(|r| {
            vec![
                r.variant.to_string(),
                f6(r.lambda),
                f6(r.accuracy),
                f6(r.fairness),
            ]
        }),
    )
}

pub fn read_pareto(path: &Path) -> Result<Vec<ParetoRow>> {
    read_file(path, &PARETO_HEADER)
}

/// Constrained picks over seed-mean (variant, λ) candidates: one row per
/// variant and slack, plus a pooled `all` row per slack. The reference is
/// the best standard dev accuracy, or the best of any variant when the
/// sweep has no standard runs.
pub fn selection_rows(summary: &[SummaryRow], slacks: &[f64]) -> Result<Vec<SelectionRow>> {
    if summary.is_empty() {
        return Err(Error::Empty("selection over an empty summary"));
    }
    let best = |it: &mut dyn Iterator<Item = &SummaryRow>| {
        it.map(|s| s.dev_acc_mean)
            .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v))))
    };
    let (reference, source) =
        match best(&mut summary.iter().filter(|s| s.variant == Variant::Standard)) {
            Some(r) => (r, "standard"),
            None => (best(&mut summary.iter()).expect("nonempty"), "best-any"),
        };
    let mut groups: Vec<(String, Vec<&SummaryRow>)> = Vec::new();
    for s in summary {
        match groups
            .iter_mut()
            .find(|(name, _)| *name == s.variant.to_string())
        {
            Some((_, g)) => g.push(s),
            None => groups.push((s.variant.to_string(), vec![s])),
        }
    }
    groups.push(("all".into(), summary.iter().collect()));
    let mut out = Vec::new();
    for (name, members) in &groups {
        let dev: Vec<CandidatePoint> = members
            .iter()
            .map(|s| point(s.variant, s.lambda, s.dev_acc_mean, s.dev_fair_mean))
            .collect();
        let test: Vec<CandidatePoint> = members
            .iter()
            .map(|s| point(s.variant, s.lambda, s.test_acc_mean, s.test_fair_mean))
            .collect();
        for &slack in slacks {
            let pick = constrained_select(&dev, &test, reference, slack)?;
            out.push(SelectionRow {
                variant: name.clone(),
                slack,
                lambda: pick.dev.provenance.lambda,
                dev_acc: pick.dev.accuracy,
                dev_fair: pick.dev.fairness,
                test_acc: pick.test.accuracy,
                test_fair: pick.test.fairness,
                floor: pick.floor,
                reference,
                reference_source: source.into(),
                fallback: pick.fallback,
            });
        }
    }
    Ok(out)
}

pub fn format_selection(rows: &[SelectionRow]) -> Result<Vec<u8>> {
    to_csv(
        &SELECTION_HEADER,
        rows.iter().map(|r| {
            vec![
                r.variant.clone(),
                f6(r.slack),
                f6(r.lambda),
                f6(r.dev_acc),
                f6(r.dev_fair),
                f6(r.test_acc),
                f6(r.test_fair),
                f6(r.floor),
                f6(r.reference),
                r.reference_source.clone(),
                r.fallback.to_string(),
            ]
        }),
    )
}

pub fn read_selection(path: &Path) -> Result<Vec<SelectionRow>> {
    read_file(path, &SELECTION_HEADER)
}

/// Paths of the four report files.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub pareto: PathBuf,
    pub selection: PathBuf,
}

impl ReportFiles {
    pub fn in_dir(dir: &Path) -> Self {
        ReportFiles {
            runs: dir.join("runs.csv"),
            summary: dir.join("summary.csv"),
            pareto: dir.join("pareto.csv"),
            selection: dir.join("selection.csv"),
        }
    }
}

/// Writes `runs.csv`, then derives the other reports from the re-parsed
/// `runs.csv` so that every number traces back to that file.
pub fn emit_reports(manifests: &[RunManifest], outdir: &Path) -> Result<ReportFiles> {
    if !manifests.iter().any(RunManifest::is_complete) {
        return Err(Error::Empty("no completed runs to report"));
    }
    let files = ReportFiles::in_dir(outdir);
    write_atomic(&files.runs, &format_runs(manifests)?)?;
    let rows = read_runs(&files.runs)?;
    let summary = summarize(&rows)?;
    write_atomic(&files.summary, &format_summary(&summary)?)?;
    write_atomic(&files.pareto, &format_pareto(&pareto_rows(&summary))?)?;
    write_atomic(
        &files.selection,
        &format_selection(&selection_rows(&summary, &SELECTION_SLACKS)?)?,
    )?;
    Ok(files)
}
