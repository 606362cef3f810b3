//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop)]

use fairlab_core::models::{
    AdversaryConfig, AdversaryStack, AugmentationLayer, MainModel, MainModelConfig, Variant,
};
use fairlab_core::nn::{softmax_xent, Activation, Matrix, MlpParams, MlpSpec, Tensors};
use fairlab_core::rng::{seeded, SeededRng};
use fairlab_core::train::{main_step_grads, Batch};
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;
/// Below this magnitude gradients are compared on an absolute scale.
pub const FD_FLOOR: f64 = 1e-6;

pub fn rand_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect(),
    )
    .unwrap()
}

pub fn rand_labels(rng: &mut SeededRng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn rel_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FD_FLOOR)
}

/// Largest relative error between `analytic` and central differences of
/// `loss` over every parameter of `params`.
pub fn fd_max_rel_error<T: Tensors + Clone>(
    params: &T,
    analytic: &[Vec<f64>],
    loss: impl Fn(&T) -> f64,
) -> f64 {
    let mut p = params.clone();
    let lens = p.tensor_lens();
    assert_eq!(lens, analytic.iter().map(Vec::len).collect::<Vec<_>>());
    let mut worst: f64 = 0.0;
    for (k, &len) in lens.iter().enumerate() {
        for i in 0..len {
            let orig = p.tensors()[k][i];
            p.tensors_mut()[k][i] = orig + FD_STEP;
            let up = loss(&p);
            p.tensors_mut()[k][i] = orig - FD_STEP;
            let down = loss(&p);
            p.tensors_mut()[k][i] = orig;
            worst = worst.max(rel_error(analytic[k][i], (up - down) / (2.0 * FD_STEP)));
        }
    }
    worst
}

pub fn owned<T: Tensors>(t: &T) -> Vec<Vec<f64>> {
    t.tensors().iter().map(|s| s.to_vec()).collect()
}

/// Random tanh MLP with dropout; the same mask is replayed for every
/// evaluation.
pub fn mlp_case(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let depth = rng.random_range(0..3);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(2..6)).collect();
    let (input, output, batch) = (
        rng.random_range(1..5),
        rng.random_range(2..4),
        rng.random_range(2..7),
    );
    let spec = MlpSpec::new(input, &hidden, output)
        .with_activation(Activation::Tanh)
        .with_dropout(if depth > 0 { 0.3 } else { 0.0 });
    let net = MlpParams::init(&spec, seed).unwrap();
    let x = rand_matrix(&mut rng, batch, input);
    let y = rand_labels(&mut rng, batch, output);
    let loss = |n: &MlpParams| {
        let mut mask_rng = seeded(seed ^ 0xabc);
        let (out, _) = n.forward(&x, Some(&mut mask_rng)).unwrap();
        softmax_xent(&out, &y, None).unwrap().0
    };
    let mut mask_rng = seeded(seed ^ 0xabc);
    let (out, trace) = net.forward(&x, Some(&mut mask_rng)).unwrap();
    let (_, dout) = softmax_xent(&out, &y, None).unwrap();
    let (grads, _) = net.backward(&trace, &dout).unwrap();
    fd_max_rel_error(&net, &owned(&grads), loss)
}

/// One random encoder → classifier / adversary composite.
pub struct CompositeCase {
    pub model: MainModel,
    pub stack: AdversaryStack,
    pub batch: Batch,
    pub y: Vec<usize>,
    pub g: Vec<usize>,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

pub fn composite_case(seed: u64, variant: Variant) -> CompositeCase {
    let mut rng = seeded(seed);
    let input = rng.random_range(2..5);
    let hidden = rng.random_range(2..5);
    let classes = rng.random_range(2..4);
    let groups = rng.random_range(2..4);
    let n = rng.random_range(4..9);
    let model = MainModel::build(
        &MainModelConfig {
            hidden,
            n_hidden: rng.random_range(1..3),
            ..MainModelConfig::new(input, classes)
        },
        seed,
    )
    .unwrap();
    let cfg = AdversaryConfig {
        large_width: 5,
        large_depth: 2,
        n_sub: 3,
        ortho_weight: 0.7,
        ..AdversaryConfig::new(variant, hidden, groups, classes)
    };
    let stack = AdversaryStack::build(&cfg, seed + 1).unwrap();
    let x = rand_matrix(&mut rng, n, input);
    let y = rand_labels(&mut rng, n, classes);
    let g = rand_labels(&mut rng, n, groups);
    let weights = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    CompositeCase {
        batch: Batch {
            x,
            y: y.clone(),
            g: g.iter().map(|&v| Some(v)).collect(),
        },
        model,
        stack,
        y,
        g,
        weights,
        lambda: rng.random_range(0.1..3.0),
    }
}

impl CompositeCase {
    /// `X(y, ŷ) − λ X(g, ĝ)` as a function of the main model.
    pub fn main_objective(&self, m: &MainModel) -> f64 {
        let h = m.encode(&self.batch.x).unwrap();
        let (cls, _) = softmax_xent(&m.classifier.predict(&h).unwrap(), &self.y, None).unwrap();
        let adv = self
            .stack
            .loss_and_grads(&h, Some(&self.y), &self.g, None, false)
            .unwrap();
        cls - self.lambda * adv.xent
    }

    /// Adversary objective (weighted, with the diversity penalty).
    pub fn adversary_objective(&self, s: &AdversaryStack) -> f64 {
        let h = self.model.encode(&self.batch.x).unwrap();
        s.loss_and_grads(&h, Some(&self.y), &self.g, Some(&self.weights), true)
            .unwrap()
            .objective
    }

    /// Worst relative error over θ (through gradient reversal) and φ*.
    pub fn max_rel_error(&self) -> f64 {
        let step = main_step_grads(
            &self.model,
            Some(&self.stack),
            self.lambda,
            &self.batch,
            None,
        )
        .unwrap();
        let theta = fd_max_rel_error(&self.model, &owned(&step.grads), |m| self.main_objective(m));
        let h = self.model.encode(&self.batch.x).unwrap();
        let pass = self
            .stack
            .loss_and_grads(&h, Some(&self.y), &self.g, Some(&self.weights), true)
            .unwrap();
        let phi = fd_max_rel_error(&self.stack, &owned(&pass.grads), |s| {
            self.adversary_objective(s)
        });
        theta.max(phi)
    }
}

/// `shared(h_i) + private_{y_i}(h_i)` one row at a time.
pub fn augment_per_row(layer: &AugmentationLayer, h: &Matrix, y: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(h.rows(), h.cols());
    for i in 0..h.rows() {
        let row = Matrix::from_rows(&[h.row(i)]).unwrap();
        let s = layer.shared.predict(&row).unwrap();
        let p = layer.private[y[i]].predict(&row).unwrap();
        for j in 0..h.cols() {
            out.set(i, j, s.get(0, j) + p.get(0, j));
        }
    }
    out
}

/// Counting-loop evaluation of one prediction set.
pub struct MetricOracle {
    pub accuracy: f64,
    /// `[class][group]`, `None` without support.
    pub tpr: Vec<Vec<Option<f64>>>,
    pub overall: Vec<Option<f64>>,
    pub gaps: Vec<Option<f64>>,
    pub rms_gap: f64,
    pub fairness: f64,
}

pub fn metric_oracle(
    yhat: &[usize],
    y: &[usize],
    g: &[Option<usize>],
    nc: usize,
    ng: usize,
) -> MetricOracle {
    let n = y.len();
    let correct = (0..n).filter(|&i| yhat[i] == y[i]).count();
    let count = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| pred(i)).count();
    let mut tpr = vec![vec![None; ng]; nc];
    let mut overall = vec![None; nc];
    for c in 0..nc {
        for k in 0..ng {
            let support = count(&|i| y[i] == c && g[i] == Some(k));
            let hits = count(&|i| y[i] == c && g[i] == Some(k) && yhat[i] == c);
            if support > 0 {
                tpr[c][k] = Some(hits as f64 / support as f64);
            }
        }
        let support = count(&|i| y[i] == c && g[i].is_some());
        let hits = count(&|i| y[i] == c && g[i].is_some() && yhat[i] == c);
        if support > 0 {
            overall[c] = Some(hits as f64 / support as f64);
        }
    }
    let gaps: Vec<Option<f64>> = (0..nc)
        .map(|c| overall[c].map(|o| tpr[c].iter().flatten().map(|t| (t - o).abs()).sum()))
        .collect();
    let defined: Vec<f64> = gaps.iter().flatten().copied().collect();
    let rms_gap = if defined.is_empty() {
        0.0
    } else {
        (defined.iter().map(|v| v * v).sum::<f64>() / defined.len() as f64).sqrt()
    };
    MetricOracle {
        accuracy: 100.0 * correct as f64 / n as f64,
        tpr,
        overall,
        gaps,
        rms_gap,
        fairness: 100.0 * (1.0 - rms_gap),
    }
}

/// Random prediction set with at most 10 classes, 4 groups and 1000 rows.
pub fn random_predictions(
    rng: &mut SeededRng,
) -> (Vec<usize>, Vec<usize>, Vec<Option<usize>>, usize, usize) {
    let nc = rng.random_range(1..=10);
    let ng = rng.random_range(1..=4);
    let n = rng.random_range(1..=1000);
    let y = rand_labels(rng, n, nc);
    let yhat = (0..n)
        .map(|i| {
            if rng.random_bool(0.6) {
                y[i]
            } else {
                rng.random_range(0..nc)
            }
        })
        .collect();
    let g = (0..n)
        .map(|_| (!rng.random_bool(0.1)).then(|| rng.random_range(0..ng)))
        .collect();
    (yhat, y, g, nc, ng)
}

/// Every group sees the same per-class confusion pattern, so TPRs agree
/// across groups exactly.
pub fn group_symmetric_predictions(
    rng: &mut SeededRng,
) -> (Vec<usize>, Vec<usize>, Vec<Option<usize>>, usize, usize) {
    let nc = rng.random_range(2..=6);
    let ng = rng.random_range(2..=4);
    let per_group: Vec<(usize, usize)> = (0..rng.random_range(5..60))
        .map(|_| {
            let y = rng.random_range(0..nc);
            let yhat = if rng.random_bool(0.7) {
                y
            } else {
                rng.random_range(0..nc)
            };
            (y, yhat)
        })
        .collect();
    let (mut yhat, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..ng {
        for &(yy, pp) in &per_group {
            y.push(yy);
            yhat.push(pp);
            g.push(Some(k));
        }
    }
    (yhat, y, g, nc, ng)
}
