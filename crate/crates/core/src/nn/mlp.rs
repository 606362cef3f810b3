use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::{seeded, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            _ => Err(Error::InvalidArgument(format!("unknown activation `{s}`"))),
        }
    }

    fn apply(self, z: &Matrix) -> Matrix {
        match self {
            Activation::Tanh => z.map(f64::tanh),
            Activation::Relu => z.map(|v| v.max(0.0)),
            Activation::Linear => z.clone(),
        }
    }

    /// Multiplies `delta` in place by the derivative at (`pre`, `post`).
    fn backprop(self, delta: &mut Matrix, pre: &Matrix, post: &Matrix) {
        match self {
            Activation::Tanh => {
                for (d, a) in delta.data_mut().iter_mut().zip(post.data()) {
                    *d *= 1.0 - a * a;
                }
            }
            Activation::Relu => {
                for (d, z) in delta.data_mut().iter_mut().zip(pre.data()) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Linear => {}
        }
    }
}

/// Architecture of a fully connected network.
///
/// Hidden layers use `activation`; the output layer uses `output_activation`
/// (linear for logit heads, the hidden activation for encoders and
/// projectors). `output_dropout` applies to the final hidden representation,
/// i.e. the input of the last layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    pub output_activation: Activation,
    pub output_dropout: f64,
}

impl MlpSpec {
    /// Tanh hidden layers, linear output, no dropout.
    pub fn new(input_dim: usize, hidden_dims: &[usize], output_dim: usize) -> Self {
        MlpSpec {
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
            output_dim,
            activation: Activation::Tanh,
            output_activation: Activation::Linear,
            output_dropout: 0.0,
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_output_activation(mut self, activation: Activation) -> Self {
        self.output_activation = activation;
        self
    }

    pub fn with_dropout(mut self, p: f64) -> Self {
        self.output_dropout = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "all layer widths must be >= 1 (input {}, hidden {:?}, output {})",
                self.input_dim, self.hidden_dims, self.output_dim
            )));
        }
        if !(0.0..1.0).contains(&self.output_dropout) {
            return Err(Error::InvalidSpec(format!(
                "dropout must lie in [0, 1), got {}",
                self.output_dropout
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden_dims.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden_dims);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Σ over layers of `out·in + out`.
pub fn count_params(spec: &MlpSpec) -> usize {
    spec.layer_dims()
        .iter()
        .map(|&(fan_in, fan_out)| fan_out * fan_in + fan_out)
        .sum()
}

/// One affine layer: `weight` is `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weight: Matrix::zeros(fan_out, fan_in),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.rows()
    }

    fn tensors(&self) -> [&[f64]; 2] {
        [self.weight.data(), &self.bias]
    }

    fn tensors_mut(&mut self) -> [&mut [f64]; 2] {
        let Dense { weight, bias } = self;
        [weight.data_mut(), bias.as_mut_slice()]
    }
}

/// Anything exposing its trainable arrays in a fixed order.
pub trait Tensors {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn tensor_lens(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub spec: MlpSpec,
    pub layers: Vec<Dense>,
}

/// Per-layer gradients, shaped like [`MlpParams::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<Dense>,
}

impl Tensors for MlpParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(Dense::tensors).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(Dense::tensors_mut)
            .collect()
    }
}

impl Tensors for MlpGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(Dense::tensors).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(Dense::tensors_mut)
            .collect()
    }
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            layers: params
                .layers
                .iter()
                .map(|l| Dense::zeros(l.fan_in(), l.fan_out()))
                .collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= k);
        }
    }

    pub fn add_assign(&mut self, other: &MlpGrads) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0))
    }
}

/// Everything the backward pass needs from a forward call.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// Input seen by each layer (after dropout for the last layer).
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
    /// Final hidden representation before dropout.
    hidden: Matrix,
    /// Inverted-dropout multipliers (0 or 1/(1-p)) on the last layer input.
    mask: Option<Matrix>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("trace of a network without layers")
    }

    /// The final hidden representation (input of the last layer, pre-dropout).
    pub fn last_hidden(&self) -> &Matrix {
        &self.hidden
    }

    pub fn dropout_mask(&self) -> Option<&Matrix> {
        self.mask.as_ref()
    }

    pub fn batch(&self) -> usize {
        self.hidden.rows()
    }
}

impl MlpParams {
    /// Weights uniform in ±√(1/fan_in), biases zero.
    pub fn init(spec: &MlpSpec, seed: u64) -> Result<Self> {
        Self::init_with(spec, &mut seeded(seed))
    }

    pub fn init_with(spec: &MlpSpec, rng: &mut SeededRng) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_dims()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let bound = (1.0 / fan_in as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                Dense {
                    weight: Matrix::from_vec(fan_out, fan_in, data)
                        .expect("length matches by construction"),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(MlpParams {
            spec: spec.clone(),
            layers,
        })
    }

    /// Builds params from explicit layers, checking they chain and match `spec`.
    pub fn from_layers(spec: MlpSpec, layers: Vec<Dense>) -> Result<Self> {
        spec.validate()?;
        let dims = spec.layer_dims();
        if dims.len() != layers.len() {
            return Err(Error::shape(
                "MlpParams::from_layers",
                dims.len(),
                layers.len(),
            ));
        }
        for (k, ((fan_in, fan_out), layer)) in dims.iter().zip(&layers).enumerate() {
            if layer.weight.shape() != (*fan_out, *fan_in) || layer.bias.len() != *fan_out {
                return Err(Error::shape(
                    "MlpParams::from_layers",
                    format!("layer {k}: {fan_out}x{fan_in} + {fan_out}"),
                    format!(
                        "{}x{} + {}",
                        layer.weight.rows(),
                        layer.weight.cols(),
                        layer.bias.len()
                    ),
                ));
            }
        }
        Ok(MlpParams { spec, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    /// Eval-mode forward returning only the output.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward(x, None)?.0)
    }

    /// Forward pass. Dropout is active iff `dropout_rng` is given.
    pub fn forward(
        &self,
        x: &Matrix,
        dropout_rng: Option<&mut SeededRng>,
    ) -> Result<(Matrix, ForwardTrace)> {
        if x.cols() != self.spec.input_dim {
            return Err(Error::shape(
                "mlp_forward",
                format!("{} input columns", self.spec.input_dim),
                x.cols(),
            ));
        }
        let n_layers = self.layers.len();
        let p = self.spec.output_dropout;
        let mut inputs = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers);
        let mut post: Vec<Matrix> = Vec::with_capacity(n_layers);
        let mut hidden = None;
        let mut mask = None;
        let mut dropout_rng = dropout_rng;

        for (k, layer) in self.layers.iter().enumerate() {
            let last = k + 1 == n_layers;
            let mut input = if k == 0 {
                x.clone()
            } else {
                post[k - 1].clone()
            };
            if last {
                hidden = Some(input.clone());
                if let Some(rng) = dropout_rng.as_deref_mut() {
                    if p > 0.0 {
                        let keep = 1.0 / (1.0 - p);
                        let mut m = Matrix::zeros(input.rows(), input.cols());
                        for v in m.data_mut() {
                            *v = if rng.random::<f64>() >= p { keep } else { 0.0 };
                        }
                        for (a, s) in input.data_mut().iter_mut().zip(m.data()) {
                            *a *= s;
                        }
                        mask = Some(m);
                    }
                }
            }
            let mut z = input.matmul_t(&layer.weight)?;
            z.add_row_vector(&layer.bias)?;
            let act = if last {
                self.spec.output_activation
            } else {
                self.spec.activation
            };
            let a = act.apply(&z);
            inputs.push(input);
            pre.push(z);
            post.push(a);
        }
        let out = post.last().cloned().expect("validated spec has >= 1 layer");
        out.ensure_finite("mlp_forward")?;
        Ok((
            out,
            ForwardTrace {
                inputs,
                pre,
                post,
                hidden: hidden.expect("last layer visited"),
                mask,
            },
        ))
    }

    /// Backpropagates `dout` (gradient w.r.t. the network output).
    /// Returns parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, trace: &ForwardTrace, dout: &Matrix) -> Result<(MlpGrads, Matrix)> {
        self.backward_with_hidden(trace, dout, None)
    }

    /// Like [`backward`](Self::backward), with an extra upstream gradient
    /// flowing directly into the final hidden representation.
    pub fn backward_with_hidden(
        &self,
        trace: &ForwardTrace,
        dout: &Matrix,
        dhidden: Option<&Matrix>,
    ) -> Result<(MlpGrads, Matrix)> {
        let n_layers = self.layers.len();
        if trace.pre.len() != n_layers {
            return Err(Error::shape("mlp_backward", n_layers, trace.pre.len()));
        }
        let out_shape = trace.output().shape();
        if dout.shape() != out_shape {
            return Err(Error::shape(
                "mlp_backward",
                format!("{out_shape:?}"),
                format!("{:?}", dout.shape()),
            ));
        }
        if let Some(dh) = dhidden {
            if dh.shape() != trace.hidden.shape() {
                return Err(Error::shape(
                    "mlp_backward (hidden)",
                    format!("{:?}", trace.hidden.shape()),
                    format!("{:?}", dh.shape()),
                ));
            }
        }

        let mut grads = Vec::with_capacity(n_layers);
        let mut delta = dout.clone();
        for k in (0..n_layers).rev() {
            let layer = &self.layers[k];
            let act = if k + 1 == n_layers {
                self.spec.output_activation
            } else {
                self.spec.activation
            };
            act.backprop(&mut delta, &trace.pre[k], &trace.post[k]);
            let dw = delta.t_matmul(&trace.inputs[k])?;
            let db = delta.column_sums();
            let mut dinput = delta.matmul(&layer.weight)?;
            if k + 1 == n_layers {
                if let Some(mask) = &trace.mask {
                    for (d, m) in dinput.data_mut().iter_mut().zip(mask.data()) {
                        *d *= m;
                    }
                }
                if let Some(dh) = dhidden {
                    dinput.add_assign(dh)?;
                }
            }
            grads.push(Dense {
                weight: dw,
                bias: db,
            });
            delta = dinput;
        }
        grads.reverse();
        Ok((MlpGrads { layers: grads }, delta))
    }
}
