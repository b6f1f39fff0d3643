use super::{check_len, glorot, NeuralError};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Linear,
}

/// Fully connected feed-forward network.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs; its weights
/// (row-major, one row per output) are followed by its bias in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
}

/// Activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct DenseCache {
    sizes: Vec<usize>,
    /// Input of each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    pre: Vec<Vec<f64>>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl DenseNet {
    /// Glorot-initialised network with `hidden` activations on every layer
    /// but the last, which uses `output`. Biases start at zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Result<Self, NeuralError> {
        let mut net = Self::zeros(sizes, hidden, output)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = glorot(rng, fan_in, fan_out);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self, NeuralError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NeuralError::Architecture(format!("layer sizes {sizes:?}")));
        }
        let n_layers = sizes.len() - 1;
        let activations = (0..n_layers).map(|l| if l + 1 == n_layers { output } else { hidden }).collect();
        Ok(Self { sizes: sizes.to_vec(), activations, params: vec![0.0; param_count(sizes)] })
    }

    pub fn from_parts(sizes: Vec<usize>, activations: Vec<Activation>, params: Vec<f64>) -> Result<Self, NeuralError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NeuralError::Architecture(format!("layer sizes {sizes:?}")));
        }
        check_len("activations", sizes.len() - 1, activations.len())?;
        check_len("parameters", param_count(&sizes), params.len())?;
        Ok(Self { sizes, activations, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Same layer sizes and activations.
    pub fn same_architecture(&self, other: &DenseNet) -> bool {
        self.sizes == other.sizes && self.activations == other.activations
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.sizes[..=layer].windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Weight matrix of `layer`, row-major `(out, in)`.
    pub fn weights(&self, layer: usize) -> &[f64] {
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let off = self.layer_offset(layer);
        &self.params[off..off + i * o]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let off = self.layer_offset(layer);
        &mut self.params[off..off + i * o]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let off = self.layer_offset(layer) + i * o;
        &self.params[off..off + o]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let off = self.layer_offset(layer) + i * o;
        &mut self.params[off..off + o]
    }

    /// Offset of the bias of `layer` inside the flat parameter/gradient vector.
    pub fn bias_offset(&self, layer: usize) -> usize {
        self.layer_offset(layer) + self.sizes[layer] * self.sizes[layer + 1]
    }

    fn run(&self, x: &[f64], mut cache: Option<&mut DenseCache>) -> Result<Vec<f64>, NeuralError> {
        check_len("dense input", self.input_dim(), x.len())?;
        let mut current = x.to_vec();
        let mut offset = 0;
        for (l, act) in self.activations.iter().enumerate() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let pre: Vec<f64> = w.chunks_exact(n_in).zip(b).map(|(row, bias)| bias + dot(row, &current)).collect();
            let out = match act {
                Activation::Relu => pre.iter().map(|z| z.max(0.0)).collect(),
                Activation::Linear => pre.clone(),
            };
            if let Some(c) = cache.as_deref_mut() {
                c.inputs.push(std::mem::take(&mut current));
                c.pre.push(pre);
            }
            current = out;
            offset += n_in * n_out + n_out;
        }
        Ok(current)
    }

    /// Output and the activations needed by [`DenseNet::backward`].
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseCache), NeuralError> {
        let mut cache =
            DenseCache { sizes: self.sizes.clone(), inputs: Vec::with_capacity(self.n_layers()), pre: Vec::with_capacity(self.n_layers()) };
        let out = self.run(x, Some(&mut cache))?;
        Ok((out, cache))
    }

    /// Inference-only forward pass.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.run(x, None)
    }

    /// Gradient of the loss with respect to every parameter, given the
    /// gradient with respect to the network output.
    pub fn backward(&self, cache: &DenseCache, grad_out: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(cache, grad_out, &mut grads)?;
        Ok(grads)
    }

    /// Accumulates parameter gradients into `grads` and returns the gradient
    /// with respect to the input.
    pub fn backward_into(&self, cache: &DenseCache, grad_out: &[f64], grads: &mut [f64]) -> Result<Vec<f64>, NeuralError> {
        if cache.sizes != self.sizes || cache.inputs.len() != self.n_layers() {
            return Err(NeuralError::Shape { context: "stale dense cache", expected: self.n_layers(), actual: cache.inputs.len() });
        }
        check_len("dense output gradient", self.output_dim(), grad_out.len())?;
        check_len("dense gradient buffer", self.params.len(), grads.len())?;
        let mut delta = grad_out.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if self.activations[l] == Activation::Relu {
                for (d, z) in delta.iter_mut().zip(&cache.pre[l]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let off = self.layer_offset(l);
            let input = &cache.inputs[l];
            let w = &self.params[off..off + n_in * n_out];
            let mut grad_in = vec![0.0; n_in];
            {
                let (gw, gb) = grads[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let row = &mut gw[o * n_in..(o + 1) * n_in];
                    for (g, x) in row.iter_mut().zip(input) {
                        *g += d * x;
                    }
                    for (gi, wv) in grad_in.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *gi += d * wv;
                    }
                }
            }
            delta = grad_in;
        }
        Ok(delta)
    }
}

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
