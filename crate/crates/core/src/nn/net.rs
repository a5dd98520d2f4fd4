//! Five-layer residual denoiser: conv(2→64)+ReLU, three conv(64→64)+ReLU,
//! conv(64→2), plus a global input-to-output skip connection.

use rand::Rng;
use rayon::prelude::*;

use super::conv::{col2im, gemm, im2col, Mat, Real};
use super::patch::TwoChannelPatch;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// `(input channels, output channels)` of each convolution, in order.
pub const LAYERS: [(usize, usize); 5] = [(2, 64), (64, 64), (64, 64), (64, 64), (64, 2)];

/// Output rows computed per parallel work item when running on whole images.
const BAND_ROWS: usize = 8;

/// Offsets of one layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSlots {
    pub cin: usize,
    pub cout: usize,
    pub weight: usize,
    pub bias: usize,
}

impl LayerSlots {
    pub fn fan_in(&self) -> usize {
        self.cin * 9
    }

    pub fn weight_len(&self) -> usize {
        self.cout * self.fan_in()
    }

    pub fn end(&self) -> usize {
        self.bias + self.cout
    }
}

pub fn layer_slots() -> [LayerSlots; 5] {
    let mut out = [LayerSlots {
        cin: 0,
        cout: 0,
        weight: 0,
        bias: 0,
    }; 5];
    let mut offset = 0;
    for (slot, &(cin, cout)) in out.iter_mut().zip(LAYERS.iter()) {
        let weight = offset;
        let bias = weight + cout * cin * 9;
        *slot = LayerSlots { cin, cout, weight, bias };
        offset = bias + cout;
    }
    out
}

/// Total number of weights and biases.
pub fn parameter_count() -> usize {
    layer_slots()[4].end()
}

/// Network parameters θ stored as one flat vector: for each layer, the
/// `[cout, cin, 3, 3]` kernel followed by the `cout` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiserNet<T: Real> {
    params: Vec<T>,
}

impl<T: Real> DenoiserNet<T> {
    /// All-zero parameters; the skip connection makes this the identity map.
    pub fn zeros() -> Self {
        Self {
            params: vec![T::zero(); parameter_count()],
        }
    }

    /// Fresh random initialization: kernels uniform in `±1/√fan_in`, zero biases.
    pub fn init(seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Init);
        let mut params = vec![T::zero(); parameter_count()];
        for slot in layer_slots() {
            let bound = 1.0 / (slot.fan_in() as f64).sqrt();
            for p in &mut params[slot.weight..slot.bias] {
                *p = T::lit(rng.random_range(-bound..bound));
            }
        }
        Self { params }
    }

    pub fn from_params(params: Vec<T>) -> Result<Self> {
        if params.len() != parameter_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                parameter_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite network parameter"));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn cast<U: Real>(&self) -> DenoiserNet<U> {
        DenoiserNet {
            params: self.params.iter().map(|p| U::lit(p.as_f64())).collect(),
        }
    }

    fn layer_forward(&self, slot: &LayerSlots, input: &[T], h: usize, w: usize, relu: bool) -> Vec<T> {
        let hw = h * w;
        let kernel = &self.params[slot.weight..slot.bias];
        let bias = &self.params[slot.bias..slot.end()];
        let run_band = |y0: usize, y1: usize| -> Vec<T> {
            let band = (y1 - y0) * w;
            let mut cols = Vec::new();
            im2col(input, slot.cin, h, w, y0, y1, &mut cols);
            let mut out = vec![T::zero(); slot.cout * band];
            for (co, row) in out.chunks_mut(band).enumerate() {
                row.fill(bias[co]);
            }
            gemm(slot.cout, slot.fan_in(), band, Mat::rows(kernel, slot.fan_in()), Mat::rows(&cols, band), T::one(), &mut out);
            if relu {
                out.iter_mut().for_each(|v| *v = v.max(T::zero()));
            }
            out
        };
        if h <= BAND_ROWS {
            return run_band(0, h);
        }
        let bands: Vec<(usize, usize)> = (0..h).step_by(BAND_ROWS).map(|y0| (y0, (y0 + BAND_ROWS).min(h))).collect();
        let pieces: Vec<Vec<T>> = bands.par_iter().map(|&(y0, y1)| run_band(y0, y1)).collect();
        let mut out = vec![T::zero(); slot.cout * hw];
        for (&(y0, y1), piece) in bands.iter().zip(&pieces) {
            let band = (y1 - y0) * w;
            for co in 0..slot.cout {
                out[co * hw + y0 * w..co * hw + y1 * w].copy_from_slice(&piece[co * band..(co + 1) * band]);
            }
        }
        out
    }

    /// Runs the network, keeping every layer's input for backpropagation.
    /// Returns the activations `[x, a1, a2, a3, a4]` and the residual branch output.
    fn forward_cached(&self, input: &[T], h: usize, w: usize) -> (Vec<Vec<T>>, Vec<T>) {
        let slots = layer_slots();
        let mut acts = vec![input.to_vec()];
        for slot in &slots[..4] {
            let next = self.layer_forward(slot, acts.last().unwrap(), h, w, true);
            acts.push(next);
        }
        let residual = self.layer_forward(&slots[4], acts.last().unwrap(), h, w, false);
        (acts, residual)
    }

    /// `f(x; θ) = x + residual(x)` on one two-channel patch of any size.
    pub fn forward(&self, patch: &TwoChannelPatch<T>) -> Result<TwoChannelPatch<T>> {
        patch.validate()?;
        let (h, w) = (patch.height(), patch.width());
        let slots = layer_slots();
        let mut act = patch.data().to_vec();
        for slot in &slots[..4] {
            act = self.layer_forward(slot, &act, h, w, true);
        }
        let residual = self.layer_forward(&slots[4], &act, h, w, false);
        let out = patch.data().iter().zip(&residual).map(|(&x, &r)| x + r).collect();
        TwoChannelPatch::new(h, w, out)
    }

    /// Squared-error loss `‖f(noisy) − clean‖²` and its exact gradient with
    /// respect to every parameter, scaled by `scale`.
    fn sample_gradient(&self, noisy: &TwoChannelPatch<T>, clean: &TwoChannelPatch<T>, scale: T) -> (Vec<T>, T) {
        let (h, w) = (noisy.height(), noisy.width());
        let hw = h * w;
        let (acts, residual) = self.forward_cached(noisy.data(), h, w);

        let mut loss = T::zero();
        let mut delta: Vec<T> = residual
            .iter()
            .zip(noisy.data())
            .zip(clean.data())
            .map(|((&r, &x), &c)| {
                let e = x + r - c;
                loss += e * e;
                (e + e) * scale
            })
            .collect();

        let mut grad = vec![T::zero(); self.params.len()];
        let mut cols = Vec::new();
        for (l, slot) in layer_slots().iter().enumerate().rev() {
            let input = &acts[l];
            im2col(input, slot.cin, h, w, 0, h, &mut cols);
            let k = slot.fan_in();
            gemm(slot.cout, hw, k, Mat::rows(&delta, hw), Mat::transposed(&cols, hw), T::zero(), &mut grad[slot.weight..slot.bias]);
            for (co, g) in grad[slot.bias..slot.end()].iter_mut().enumerate() {
                *g = delta[co * hw..(co + 1) * hw].iter().fold(T::zero(), |acc, &d| acc + d);
            }
            if l == 0 {
                break;
            }
            let kernel = &self.params[slot.weight..slot.bias];
            let mut dcols = vec![T::zero(); k * hw];
            gemm(k, slot.cout, hw, Mat::transposed(kernel, k), Mat::rows(&delta, hw), T::zero(), &mut dcols);
            let mut dinput = vec![T::zero(); slot.cin * hw];
            col2im(&dcols, slot.cin, h, w, &mut dinput);
            // ReLU: the stored activation is post-ReLU, so zero means inactive.
            for (d, &a) in dinput.iter_mut().zip(input) {
                if a <= T::zero() {
                    *d = T::zero();
                }
            }
            delta = dinput;
        }
        (grad, loss)
    }

    /// Loss `‖f(noisy) − clean‖²` (summed over pixels and channels) and its gradient.
    pub fn gradient(&self, noisy: &TwoChannelPatch<T>, clean: &TwoChannelPatch<T>) -> Result<(Vec<T>, T)> {
        noisy.validate()?;
        clean.validate()?;
        if noisy.shape() != clean.shape() {
            return Err(Error::invalid(format!(
                "noisy patch {:?} and clean patch {:?} differ in shape",
                noisy.shape(),
                clean.shape()
            )));
        }
        Ok(self.sample_gradient(noisy, clean, T::one()))
    }

    /// Mean loss and mean gradient over a minibatch of `(noisy, clean)` pairs.
    ///
    /// Per-sample gradients may be computed in parallel; they are always
    /// summed in batch order so the result does not depend on thread count.
    pub fn batch_gradient(&self, batch: &[(&TwoChannelPatch<T>, &TwoChannelPatch<T>)]) -> Result<(Vec<T>, T)> {
        if batch.is_empty() {
            return Err(Error::invalid("empty minibatch"));
        }
        for (n, c) in batch {
            n.validate()?;
            c.validate()?;
            if n.shape() != c.shape() {
                return Err(Error::invalid("noisy and clean patches differ in shape"));
            }
        }
        let inv = T::one() / T::lit(batch.len() as f64);
        let parts: Vec<(Vec<T>, T)> = batch.par_iter().map(|(n, c)| self.sample_gradient(n, c, inv)).collect();
        let mut grad = vec![T::zero(); self.params.len()];
        let mut loss = T::zero();
        for (g, l) in parts {
            grad.iter_mut().zip(&g).for_each(|(a, &b)| *a += b);
            loss += l;
        }
        Ok((grad, loss * inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_patch(h: usize, w: usize, rng: &mut ChaCha8Rng) -> TwoChannelPatch<f64> {
        TwoChannelPatch::new(h, w, (0..2 * h * w).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn parameter_count_follows_architecture() {
        let weights: usize = LAYERS.iter().map(|&(i, o)| i * o * 9).sum();
        let biases: usize = LAYERS.iter().map(|&(_, o)| o).sum();
        assert_eq!(weights, 112_896);
        assert_eq!(biases, 258);
        assert_eq!(parameter_count(), 113_154);
    }

    #[test]
    fn zero_network_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = DenoiserNet::<f64>::zeros();
        for &(h, w) in &[(64, 64), (33, 47)] {
            let p = random_patch(h, w, &mut rng);
            assert_eq!(net.forward(&p).unwrap(), p);
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = DenoiserNet::<f64>::init(5);
        assert_eq!(a, DenoiserNet::<f64>::init(5));
        assert_ne!(a, DenoiserNet::<f64>::init(6));
        for slot in layer_slots() {
            let bound = 1.0 / (slot.fan_in() as f64).sqrt();
            assert!(a.params()[slot.weight..slot.bias].iter().all(|p| p.abs() <= bound));
            assert!(a.params()[slot.bias..slot.end()].iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn matching_target_gives_zero_loss_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = DenoiserNet::<f64>::init(3);
        let noisy = random_patch(6, 5, &mut rng);
        let clean = net.forward(&noisy).unwrap();
        let (g, loss) = net.gradient(&noisy, &clean).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DenoiserNet::<f64>::zeros();
        let a = random_patch(4, 4, &mut rng);
        let b = random_patch(4, 5, &mut rng);
        assert!(matches!(net.gradient(&a, &b), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn batch_gradient_is_mean_of_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = DenoiserNet::<f64>::init(9);
        let pairs: Vec<_> = (0..3).map(|_| (random_patch(5, 5, &mut rng), random_patch(5, 5, &mut rng))).collect();
        let refs: Vec<_> = pairs.iter().map(|(a, b)| (a, b)).collect();
        let (g, loss) = net.batch_gradient(&refs).unwrap();
        let mut expect_g = vec![0.0; g.len()];
        let mut expect_loss = 0.0;
        for (a, b) in &pairs {
            let (gi, li) = net.gradient(a, b).unwrap();
            expect_g.iter_mut().zip(&gi).for_each(|(e, v)| *e += v / 3.0);
            expect_loss += li / 3.0;
        }
        assert!((loss - expect_loss).abs() < 1e-12 * expect_loss);
        for (a, b) in g.iter().zip(&expect_g) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
