use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::{stream, Stream};

/// Joint distribution of (target, group) with one Gaussian cluster per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub n_classes: usize,
    pub n_groups: usize,
    /// `P(y, g)`, indexed `[y][g]`.
    pub probs: Vec<Vec<f64>>,
    pub dim: usize,
    /// Cluster mean per cell, indexed `y * n_groups + g`.
    pub means: Vec<Vec<f64>>,
    pub sigma: f64,
    /// Distance between group means within a class.
    pub leakage: f64,
}

impl JointSpec {
    /// Places class signal on coordinates `0..C` and group signal on
    /// `C..C+G`, so that class means sit `class_sep` apart and group means
    /// within a class sit `leakage` apart. Remaining coordinates are noise.
    pub fn orthogonal(
        probs: Vec<Vec<f64>>,
        dim: usize,
        class_sep: f64,
        leakage: f64,
        sigma: f64,
    ) -> Result<Self> {
        let n_classes = probs.len();
        let n_groups = probs.first().map_or(0, Vec::len);
        if n_classes + n_groups > dim {
            return Err(Error::InvalidSpec(format!(
                "dim {dim} too small for {n_classes} class + {n_groups} group coordinates"
            )));
        }
        let c_off = class_sep / std::f64::consts::SQRT_2;
        let g_off = leakage / std::f64::consts::SQRT_2;
        let mut means = Vec::with_capacity(n_classes * n_groups);
        for y in 0..n_classes {
            for g in 0..n_groups {
                let mut m = vec![0.0; dim];
                m[y] = c_off;
                m[n_classes + g] = g_off;
                means.push(m);
            }
        }
        let spec = JointSpec {
            n_classes,
            n_groups,
            probs,
            dim,
            means,
            sigma,
            leakage,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Binary target × binary group with a 40/10/10/40 joint skew, marginally
    /// balanced on both labels.
    pub fn moji_default() -> Self {
        JointSpec::orthogonal(vec![vec![0.40, 0.10], vec![0.10, 0.40]], 16, 2.0, 2.0, 1.0)
            .expect("built-in spec is valid")
    }

    /// Eight classes × four intersectional groups with strongly class-dependent
    /// group mixes. A shape analogue of a real occupation dataset, not a copy
    /// of its proportions.
    pub fn bios_like() -> Self {
        let class_mass = [0.30, 0.20, 0.14, 0.10, 0.09, 0.07, 0.06, 0.04];
        // Share of the first binary attribute per class, from 60/40 up to 95/5
        // in either direction.
        let first_share = [0.60, 0.90, 0.25, 0.95, 0.13, 0.70, 0.05, 0.80];
        let second_share = 0.84;
        let probs = class_mass
            .iter()
            .zip(first_share)
            .map(|(&m, s)| {
                vec![
                    m * s * (1.0 - second_share),
                    m * s * second_share,
                    m * (1.0 - s) * (1.0 - second_share),
                    m * (1.0 - s) * second_share,
                ]
            })
            .collect();
        JointSpec::orthogonal(probs, 16, 2.0, 2.0, 1.0).expect("built-in spec is valid")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "moji_default" => Ok(Self::moji_default()),
            "bios_like" => Ok(Self::bios_like()),
            _ => Err(Error::InvalidArgument(format!(
                "unknown generator spec `{name}`"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.n_groups == 0 || self.dim == 0 {
            return Err(Error::InvalidSpec(
                "classes, groups and dim must be >= 1".into(),
            ));
        }
        if self.probs.len() != self.n_classes || self.probs.iter().any(|r| r.len() != self.n_groups)
        {
            return Err(Error::InvalidSpec(format!(
                "probability table must be {}x{}",
                self.n_classes, self.n_groups
            )));
        }
        let flat = self.probs.iter().flatten();
        if flat.clone().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSpec(
                "probabilities must be finite and >= 0".into(),
            ));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if self.means.len() != self.n_classes * self.n_groups
            || self.means.iter().any(|m| m.len() != self.dim)
        {
            return Err(Error::InvalidSpec(
                "one mean of length dim per cell required".into(),
            ));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn mean(&self, y: usize, g: usize) -> &[f64] {
        &self.means[y * self.n_groups + g]
    }
}

/// Samples `n` instances: cell from `P(y, g)`, then `x = mean + σ·N(0, I)`.
pub fn generate(spec: &JointSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let mut rng = stream(seed, Stream::Data);
    let cells: Vec<f64> = spec.probs.iter().flatten().copied().collect();
    let mut x = Matrix::zeros(n, spec.dim);
    let mut y = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut cell = cells.len() - 1;
        for (k, p) in cells.iter().enumerate() {
            acc += p;
            if u < acc {
                cell = k;
                break;
            }
        }
        // Skip zero-probability cells that the fallback might land on.
        while cells[cell] == 0.0 && cell > 0 {
            cell -= 1;
        }
        let (yi, gi) = (cell / spec.n_groups, cell % spec.n_groups);
        let mean = &spec.means[cell];
        for (j, v) in x.row_mut(i).iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v = mean[j] + spec.sigma * z;
        }
        y.push(yi);
        g.push(Some(gi));
    }
    Dataset::new(x, y, g, spec.n_classes, spec.n_groups)
}
