//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.
//!
//! The sweep writes to `$FAIRLAB_ACCEPTANCE_OUT` when set (completed runs are
//! reused), otherwise to a temporary directory.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::{
    augment_per_row, composite_case, group_symmetric_predictions, metric_oracle, mlp_case,
    rand_labels, rand_matrix, random_predictions,
};
use fairlab_core::data::{generate, JointSpec};
use fairlab_core::experiment::{
    emit_reports, format_runs, read_pareto, read_runs, read_selection, replay, run_sweep,
    DataConfig, ExperimentConfig, ReportFiles, RunManifest,
};
use fairlab_core::metrics::{
    accuracy, dto, evaluate, frontier_coverage, gap_per_class, pareto_frontier, tpr_table,
    CandidatePoint, PredictionSet, Provenance, Utopia,
};
use fairlab_core::models::{AugmentationLayer, Variant};
use fairlab_core::nn::{count_params, Activation, MlpSpec, Tensors};
use fairlab_core::rng::seeded;
use fairlab_core::train::{balanced_weights, train, TrainConfig};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_dto_arithmetic() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, f, printed) in [
        (72.2981, 61.1870, 47.6849),
        (74.1810, 90.4656, 27.5232),
        (81.5181, 55.5411, 48.1475),
    ] {
        let d = dto(a, f, Utopia::default());
        worst = worst.max((d - printed).abs());
        ensure(
            (d - printed).abs() < 1e-3,
            format!("dto({a}, {f}) = {d:.6}, expected {printed}"),
        )?;
    }
    Ok(format!("max abs diff {worst:.2e}"))
}

fn c2_param_counts() -> Outcome {
    let adv = count_params(&MlpSpec::new(300, &[300, 300], 2));
    let large = count_params(&MlpSpec::new(300, &[512, 512, 512], 2));
    ensure(
        adv == 181_202 && large == 680_450,
        format!("got {adv} and {large}"),
    )?;
    Ok(format!("{adv} / {large}"))
}

fn c3_gradients() -> Outcome {
    let variants: Vec<Variant> = Variant::ALL
        .into_iter()
        .filter(|v| v.is_adversarial())
        .collect();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        // Alternate plain networks and composite paths, A-Adv included.
        let err = if seed % 2 == 0 {
            mlp_case(seed)
        } else {
            let v = if seed % 4 == 1 {
                Variant::AAdv
            } else {
                variants[seed as usize % variants.len()]
            };
            composite_case(seed, v).max_rel_error()
        };
        worst = worst.max(err);
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.3e} over 50 networks"))
}

fn bits<T: Tensors>(t: &T) -> Vec<u64> {
    t.tensors()
        .iter()
        .flat_map(|s| s.iter().map(|v| v.to_bits()))
        .collect()
}

fn c4_reversal_contract() -> Outcome {
    let spec = JointSpec::moji_default();
    let (tr, dev) = (
        generate(&spec, 2000, 1).map_err(|e| e.to_string())?,
        generate(&spec, 500, 2).map_err(|e| e.to_string())?,
    );
    let base = TrainConfig {
        hidden: 32,
        batch_size: 256,
        epochs: 8,
        seed: 4,
        ..Default::default()
    };
    let (s, hs) = train(
        &TrainConfig {
            variant: Variant::Standard,
            lambda: 0.0,
            ..base.clone()
        },
        &tr,
        &dev,
    )
    .map_err(|e| e.to_string())?;
    let (a, ha) = train(
        &TrainConfig {
            variant: Variant::Adv,
            lambda: 0.0,
            ..base
        },
        &tr,
        &dev,
    )
    .map_err(|e| e.to_string())?;
    ensure(bits(&s.model) == bits(&a.model), "final parameters differ")?;
    let d = |h: &[fairlab_core::EpochLog]| {
        h.iter()
            .map(|e| (e.train_loss.to_bits(), e.dev_dto.to_bits()))
            .collect::<Vec<_>>()
    };
    ensure(d(&hs) == d(&ha), "epoch histories differ")?;
    Ok(format!("{} epochs identical", hs.len()))
}

fn c5_augmentation() -> Outcome {
    let mut rng = seeded(5);
    let mut zero_checked = 0;
    for t in 0..100 {
        let hidden = rng.random_range(1..=8);
        let classes = rng.random_range(1..=6);
        let n = rng.random_range(1..=20);
        let layer = AugmentationLayer::new(hidden, classes, Activation::Tanh, &mut rng)
            .map_err(|e| e.to_string())?;
        let h = rand_matrix(&mut rng, n, hidden);
        // Leave at least one class unselected when there is more than one.
        let used = if classes > 1 { classes - 1 } else { 1 };
        let y = rand_labels(&mut rng, n, used);
        let (out, trace) = layer.forward(&h, &y).map_err(|e| e.to_string())?;
        ensure(
            out == augment_per_row(&layer, &h, &y),
            format!("triple {t}: output mismatch"),
        )?;
        let dout = rand_matrix(&mut rng, n, hidden);
        let (grads, _) = layer.backward(&trace, &dout).map_err(|e| e.to_string())?;
        for c in (0..classes).filter(|c| !y.contains(c)) {
            ensure(
                grads.private[c]
                    .tensors()
                    .iter()
                    .all(|s| s.iter().all(|&v| v == 0.0)),
                format!("triple {t}: class {c} gradient non-zero"),
            )?;
            zero_checked += 1;
        }
    }
    Ok(format!(
        "100 triples exact, {zero_checked} unselected projectors zero"
    ))
}

fn c6_metrics() -> Outcome {
    let mut rng = seeded(6);
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let (yhat, y, g, nc, ng) = random_predictions(&mut rng);
        let o = metric_oracle(&yhat, &y, &g, nc, ng);
        let p = PredictionSet::new(yhat, y, g, nc, ng).map_err(|e| e.to_string())?;
        let table = tpr_table(&p);
        ensure(table.cells == o.tpr, format!("set {t}: tpr table differs"))?;
        let mut diffs = vec![(accuracy(&p).map_err(|e| e.to_string())? - o.accuracy).abs()];
        for c in 0..nc {
            match (o.gaps[c], gap_per_class(&table, c)) {
                (Some(a), Ok(b)) => diffs.push((a - b).abs()),
                (None, Err(_)) => {}
                _ => return Err(format!("set {t}: gap definedness differs for class {c}")),
            }
        }
        let r = evaluate(&p, Utopia::default()).map_err(|e| e.to_string())?;
        diffs.push((r.rms_gap - o.rms_gap).abs());
        // Fairness is in percent, so compare on the unit scale.
        diffs.push((r.fairness - o.fairness).abs() / 100.0);
        let d = diffs.into_iter().fold(0.0, f64::max);
        worst = worst.max(d);
        ensure(d <= 1e-12, format!("set {t}: diff {d:e}"))?;
    }
    for _ in 0..20 {
        let (yhat, y, g, nc, ng) = group_symmetric_predictions(&mut rng);
        let r = evaluate(
            &PredictionSet::new(yhat, y, g, nc, ng).map_err(|e| e.to_string())?,
            Utopia::default(),
        )
        .map_err(|e| e.to_string())?;
        ensure(
            r.rms_gap == 0.0,
            format!("symmetric predictor rms_gap {}", r.rms_gap),
        )?;
    }
    Ok(format!("max diff {worst:.1e}; symmetric rms_gap 0"))
}

fn c7_balanced_weights() -> Outcome {
    let mut rng = seeded(7);
    for t in 0..100 {
        let nc = rng.random_range(1..=6);
        let ng = rng.random_range(1..=4);
        let n_extra = rng.random_range(0..300);
        let extra = rand_labels(&mut rng, n_extra, nc * ng);
        let cells: Vec<usize> = (0..nc * ng).chain(extra).collect();
        let y: Vec<usize> = cells.iter().map(|c| c / ng).collect();
        let g: Vec<usize> = cells.iter().map(|c| c % ng).collect();
        let w = balanced_weights(&y, &g).map_err(|e| e.to_string())?;
        for c in 0..nc {
            let totals: Vec<f64> = (0..ng)
                .map(|k| {
                    (0..y.len())
                        .filter(|&i| y[i] == c && g[i] == k)
                        .map(|i| w[i])
                        .sum()
                })
                .collect();
            ensure(
                totals.iter().all(|x| (x - totals[0]).abs() < 1e-12),
                format!("set {t}: class {c} totals {totals:?}"),
            )?;
        }
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        ensure((mean - 1.0).abs() < 1e-12, format!("set {t}: mean {mean}"))?;
    }
    Ok("100 label sets".into())
}

fn c8_skew() -> Outcome {
    let target = [0.4, 0.1, 0.1, 0.4];
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let ds = generate(&JointSpec::moji_default(), 100_000, seed).map_err(|e| e.to_string())?;
        for (f, t) in ds.joint_frequencies().iter().zip(target) {
            worst = worst.max((f - t).abs());
        }
    }
    ensure(worst <= 0.005, format!("max cell deviation {worst:.4}"))?;
    Ok(format!("max cell deviation {worst:.4}"))
}

struct Sweep {
    manifests: Vec<RunManifest>,
    files: ReportFiles,
}

fn run_acceptance_sweep(out: &Path) -> Result<Sweep, String> {
    let cfg = ExperimentConfig {
        data: DataConfig {
            n_train: 20_000,
            n_dev: 2_000,
            n_test: 2_000,
            ..Default::default()
        },
        variants: vec![Variant::Standard, Variant::Adv, Variant::AAdv],
        lambdas: vec![0.01, 0.1, 1.0, 10.0],
        seeds: (0..5).collect(),
        train: TrainConfig {
            hidden: 64,
            batch_size: 1024,
            dropout: 0.5,
            ..Default::default()
        },
        out: out.to_path_buf(),
        jobs: 1,
        ..Default::default()
    };
    let outcome = run_sweep(&cfg).map_err(|e| e.to_string())?;
    if let Some(f) = outcome.failures().next() {
        return Err(format!("run {} failed: {:?}", f.hash, f.error));
    }
    let files = emit_reports(&outcome.manifests, out).map_err(|e| e.to_string())?;
    Ok(Sweep {
        manifests: outcome.manifests,
        files,
    })
}

fn c9_debiasing(s: &Sweep) -> Outcome {
    let rows = read_runs(&s.files.runs).map_err(|e| e.to_string())?;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let std_fair: Vec<f64> = rows
        .iter()
        .filter(|r| r.variant == Variant::Standard)
        .map(|r| r.test_fair)
        .collect();
    ensure(!std_fair.is_empty(), "no standard runs")?;
    let standard = mean(&std_fair);
    let mut notes = vec![format!("standard {standard:.2}")];
    for v in [Variant::Adv, Variant::AAdv] {
        let mut by_lambda: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.variant == v) {
            by_lambda
                .entry(r.lambda.to_bits())
                .or_default()
                .push((dto(r.dev_acc, r.dev_fair, Utopia::default()), r.test_fair));
        }
        let (lambda, runs) = by_lambda
            .iter()
            .min_by(|a, b| {
                let da = mean(&a.1.iter().map(|p| p.0).collect::<Vec<_>>());
                let db = mean(&b.1.iter().map(|p| p.0).collect::<Vec<_>>());
                da.total_cmp(&db)
            })
            .ok_or(format!("no {v} runs"))?;
        let fair = mean(&runs.iter().map(|p| p.1).collect::<Vec<_>>());
        let lambda = f64::from_bits(*lambda);
        notes.push(format!("{v}@{lambda} {fair:.2}"));
        ensure(
            fair >= standard + 5.0,
            format!("(a) {v} at λ={lambda}: {fair:.2} < {standard:.2} + 5"),
        )?;
    }
    let pareto = read_pareto(&s.files.pareto).map_err(|e| e.to_string())?;
    let frontier = |v: Variant| {
        let pts: Vec<CandidatePoint> = pareto
            .iter()
            .filter(|p| p.variant == v)
            .map(|p| {
                CandidatePoint::new(
                    p.accuracy,
                    p.fairness,
                    Provenance {
                        variant: v.to_string(),
                        lambda: p.lambda,
                        seed: 0,
                        epoch: 0,
                    },
                )
            })
            .collect();
        pareto_frontier(&pts)
    };
    let cov = frontier_coverage(&frontier(Variant::AAdv), &frontier(Variant::Adv));
    notes.push(format!("coverage {cov:.2}"));
    ensure(
        cov >= 0.5,
        format!("(b) a-adv frontier at or above adv at {cov:.2} of levels"),
    )?;
    Ok(notes.join(", "))
}

fn c10_selection(s: &Sweep) -> Outcome {
    let rows = read_selection(&s.files.selection).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let variants: Vec<String> = rows
        .iter()
        .map(|r| r.variant.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    for v in &variants {
        let at = |slack: f64| {
            rows.iter()
                .find(|r| &r.variant == v && (r.slack - slack).abs() < 1e-9)
                .map(|r| r.dev_fair)
        };
        let (five, ten) = (
            at(0.05).ok_or(format!("{v}: no 5% row"))?,
            at(0.10).ok_or(format!("{v}: no 10% row"))?,
        );
        ensure(
            ten >= five,
            format!("{v}: 10% slack {ten:.4} < 5% slack {five:.4}"),
        )?;
        checked += 1;
    }
    Ok(format!("{checked} variants monotone"))
}

fn c11_replay(s: &Sweep) -> Outcome {
    let runs = std::fs::read_to_string(&s.files.runs).map_err(|e| e.to_string())?;
    let mut replayed = 0;
    for v in [Variant::Standard, Variant::Adv, Variant::AAdv] {
        let m = s
            .manifests
            .iter()
            .find(|m| m.config.variant == v && m.seed == 1)
            .ok_or(format!("no {v} manifest"))?;
        let again = replay(m).map_err(|e| e.to_string())?;
        let text = String::from_utf8(format_runs(&[again]).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let line = text.lines().nth(1).ok_or("replay produced no row")?;
        ensure(
            runs.lines().any(|l| l == line),
            format!("replayed row not in runs.csv: {line}"),
        )?;
        replayed += 1;
    }
    Ok(format!("{replayed} manifests replayed byte-identically"))
}

fn report(id: &str, name: &str, started: Instant, outcome: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS {id:>3} {name}: {detail} ({secs:.1}s)");
            true
        }
        Err(detail) => {
            println!("FAIL {id:>3} {name}: {detail} ({secs:.1}s)");
            false
        }
    }
}

fn main() -> ExitCode {
    let quick: [Criterion; 8] = [
        ("1", "DTO arithmetic", c1_dto_arithmetic),
        ("2", "discriminator parameter counts", c2_param_counts),
        ("3", "gradient correctness", c3_gradients),
        (
            "4",
            "gradient reversal at zero lambda",
            c4_reversal_contract,
        ),
        ("5", "augmentation selection", c5_augmentation),
        ("6", "metric oracle equivalence", c6_metrics),
        ("7", "balanced weights", c7_balanced_weights),
        ("8", "synthetic skew fidelity", c8_skew),
    ];
    let mut all = true;
    for (id, name, f) in quick {
        all &= report(id, name, Instant::now(), f());
    }

    let tmp;
    let out = match std::env::var_os("FAIRLAB_ACCEPTANCE_OUT") {
        Some(dir) => std::path::PathBuf::from(dir),
        None => {
            tmp = tempfile::tempdir().expect("temporary directory");
            tmp.path().to_path_buf()
        }
    };
    let started = Instant::now();
    match run_acceptance_sweep(&out) {
        Ok(sweep) => {
            all &= report("9", "end-to-end debiasing", started, c9_debiasing(&sweep));
            all &= report(
                "10",
                "selection monotonicity",
                Instant::now(),
                c10_selection(&sweep),
            );
            all &= report("11", "manifest replay", Instant::now(), c11_replay(&sweep));
        }
        Err(e) => {
            for (id, name) in [
                ("9", "end-to-end debiasing"),
                ("10", "selection monotonicity"),
                ("11", "manifest replay"),
            ] {
                all &= report(id, name, started, Err(format!("sweep failed: {e}")));
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
