//! A fixed-topology multi-layer perceptron (4 -> 4 -> 2 -> 1) with rectifier
//! hidden units and a sigmoid output, trained by full-batch gradient descent
//! on the cross-entropy loss.
//!
//! The loss and its gradient are both computed from the output logit, so the
//! pair stays consistent for finite-difference checks and neither can
//! overflow for extreme logits.

use alloc::vec::Vec;

// Inherent f64 methods cover std builds; the trait supplies exp/ln_1p etc.
// (via libm) when the crate is compiled without std.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::scenario::RngSeed;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x), stable for large |x|.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Total parameter count: 4*4 + 4 + 2*4 + 2 + 2 + 1.
pub const MLP_PARAM_COUNT: usize = 33;

/// The network's weights. Layer sizes are fixed; only the values train.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mlp {
    w1: [[f64; 4]; 4],
    b1: [f64; 4],
    w2: [[f64; 4]; 2],
    b2: [f64; 2],
    w3: [f64; 2],
    b3: f64,
}

impl Mlp {
    /// Random start, drawn in [`Mlp::params`] order so two nets from one
    /// seed are identical: weights uniform on [-0.5, 0.5), hidden biases
    /// uniform on [0.01, 0.2) — slightly positive so the rectifier units
    /// begin active (a dead start never recovers under plain gradient
    /// descent) — and the output bias at zero.
    pub fn seeded(seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let mut mlp = Mlp {
            w1: [[0.0; 4]; 4],
            b1: [0.0; 4],
            w2: [[0.0; 4]; 2],
            b2: [0.0; 2],
            w3: [0.0; 2],
            b3: 0.0,
        };
        let mut flat: Vec<f64> = Vec::with_capacity(MLP_PARAM_COUNT);
        for _ in 0..16 {
            flat.push(rng.gen_range(-0.5..0.5)); // w1
        }
        for _ in 0..4 {
            flat.push(rng.gen_range(0.01..0.2)); // b1
        }
        for _ in 0..8 {
            flat.push(rng.gen_range(-0.5..0.5)); // w2
        }
        for _ in 0..2 {
            flat.push(rng.gen_range(0.01..0.2)); // b2
        }
        for _ in 0..2 {
            flat.push(rng.gen_range(-0.5..0.5)); // w3
        }
        flat.push(0.0); // b3
        mlp.set_params(&flat);
        mlp
    }

    /// Output logit for one input; the drift probability is its sigmoid.
    pub fn logit(&self, x: &[f64; 4]) -> f64 {
        self.forward(x).3
    }

    /// Predicted probability of the drift class (z = 1).
    pub fn prob_drift(&self, x: &[f64; 4]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Activations of both hidden layers plus their pre-activations and the
    /// output logit, as the backward pass needs them.
    fn forward(&self, x: &[f64; 4]) -> ([f64; 4], [f64; 2], [f64; 2], f64) {
        let mut a1 = self.b1;
        for (j, row) in self.w1.iter().enumerate() {
            for (w, xi) in row.iter().zip(x) {
                a1[j] += w * xi;
            }
        }
        let h1 = a1.map(|v| v.max(0.0));
        let mut a2 = self.b2;
        for (j, row) in self.w2.iter().enumerate() {
            for (w, hi) in row.iter().zip(&h1) {
                a2[j] += w * hi;
            }
        }
        let h2 = a2.map(|v| v.max(0.0));
        let s = self.w3[0] * h2[0] + self.w3[1] * h2[1] + self.b3;
        (a1, a2, h2, s)
    }

    /// Mean cross-entropy of the labels under the network, written in logit
    /// form: mean of softplus(s) - z*s.
    pub fn loss(&self, xs: &[[f64; 4]], zs: &[f64]) -> f64 {
        debug_assert_eq!(xs.len(), zs.len());
        let total: f64 = xs
            .iter()
            .zip(zs)
            .map(|(x, z)| {
                let s = self.logit(x);
                softplus(s) - z * s
            })
            .sum();
        total / xs.len() as f64
    }

    /// Gradient of [`Mlp::loss`] with respect to every parameter, flattened
    /// in [`Mlp::params`] order.
    pub fn loss_gradient(&self, xs: &[[f64; 4]], zs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(xs.len(), zs.len());
        let mut gw1 = [[0.0; 4]; 4];
        let mut gb1 = [0.0; 4];
        let mut gw2 = [[0.0; 4]; 2];
        let mut gb2 = [0.0; 2];
        let mut gw3 = [0.0; 2];
        let mut gb3 = 0.0;
        let scale = 1.0 / xs.len() as f64;

        for (x, z) in xs.iter().zip(zs) {
            let (a1, a2, h2, s) = self.forward(x);
            let h1 = a1.map(|v| v.max(0.0));
            // d(mean loss)/ds for this example
            let ds = (sigmoid(s) - z) * scale;

            gw3[0] += ds * h2[0];
            gw3[1] += ds * h2[1];
            gb3 += ds;

            let mut da2 = [0.0; 2];
            for j in 0..2 {
                // rectifier gate: gradient flows only through active units
                da2[j] = if a2[j] > 0.0 { ds * self.w3[j] } else { 0.0 };
                gb2[j] += da2[j];
                for i in 0..4 {
                    gw2[j][i] += da2[j] * h1[i];
                }
            }

            for i in 0..4 {
                let dh1 = da2[0] * self.w2[0][i] + da2[1] * self.w2[1][i];
                let da1 = if a1[i] > 0.0 { dh1 } else { 0.0 };
                gb1[i] += da1;
                for t in 0..4 {
                    gw1[i][t] += da1 * x[t];
                }
            }
        }

        let grads = Mlp {
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
            w3: gw3,
            b3: gb3,
        };
        grads.params()
    }

    /// Flattened parameters: w1 row by row, then b1, w2 row by row, b2, w3,
    /// b3. The order is the contract for [`Mlp::set_params`],
    /// [`Mlp::loss_gradient`], and persistence.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(MLP_PARAM_COUNT);
        for row in &self.w1 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b1);
        for row in &self.w2 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b2);
        out.extend_from_slice(&self.w3);
        out.push(self.b3);
        out
    }

    /// Overwrites every parameter from a flat slice in [`Mlp::params`] order.
    ///
    /// Panics if the slice is not exactly [`MLP_PARAM_COUNT`] long.
    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), MLP_PARAM_COUNT, "wrong parameter count");
        let mut it = flat.iter().copied();
        let mut next = move || it.next().unwrap();
        for row in &mut self.w1 {
            for w in row {
                *w = next();
            }
        }
        for b in &mut self.b1 {
            *b = next();
        }
        for row in &mut self.w2 {
            for w in row {
                *w = next();
            }
        }
        for b in &mut self.b2 {
            *b = next();
        }
        for w in &mut self.w3 {
            *w = next();
        }
        self.b3 = next();
    }
}

/// Full-batch gradient descent from a seeded start. Returns the trained net
/// and the loss recorded after each epoch's step.
pub fn train_mlp(
    xs: &[[f64; 4]],
    zs: &[f64],
    rate: f64,
    epochs: usize,
    seed: RngSeed,
) -> (Mlp, Vec<f64>) {
    let mut mlp = Mlp::seeded(seed);
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let grad = mlp.loss_gradient(xs, zs);
        let mut params = mlp.params();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= rate * g;
        }
        mlp.set_params(&params);
        history.push(mlp.loss(xs, zs));
    }
    (mlp, history)
}
