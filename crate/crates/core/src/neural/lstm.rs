use super::dense::dot;
use super::{check_len, glorot, sigmoid, NeuralError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gate blocks in the stacked pre-activation vector, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Candidate = 2,
    Output = 3,
}

/// Single LSTM cell.
///
/// Parameters: `W` with shape `(4H, I + H)` acting on `[x; h]`, followed by a
/// bias of length `4H`. Rows are grouped by [`Gate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    input_dim: usize,
    hidden_dim: usize,
    params: Vec<f64>,
}

/// Values saved by [`LstmCell::step`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    concat: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let n = 4 * hidden_dim * (input_dim + hidden_dim) + 4 * hidden_dim;
        Self { input_dim, hidden_dim, params: vec![0.0; n] }
    }

    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut cell = Self::zeros(input_dim, hidden_dim);
        let n_w = 4 * hidden_dim * (input_dim + hidden_dim);
        for p in &mut cell.params[..n_w] {
            *p = glorot(rng, input_dim + hidden_dim, 4 * hidden_dim);
        }
        cell
    }

    pub fn from_parts(input_dim: usize, hidden_dim: usize, params: Vec<f64>) -> Result<Self, NeuralError> {
        let cell = Self::zeros(input_dim, hidden_dim);
        check_len("lstm parameters", cell.params.len(), params.len())?;
        Ok(Self { params, ..cell })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn width(&self) -> usize {
        self.input_dim + self.hidden_dim
    }

    fn bias_offset(&self) -> usize {
        4 * self.hidden_dim * self.width()
    }

    /// Bias entries of one gate.
    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden_dim;
        let off = self.bias_offset() + gate as usize * h;
        &mut self.params[off..off + h]
    }

    /// Weight rows of one gate, row-major `(H, I + H)`.
    pub fn gate_weights_mut(&mut self, gate: Gate) -> &mut [f64] {
        let rows = self.hidden_dim * self.width();
        let off = gate as usize * rows;
        &mut self.params[off..off + rows]
    }

    /// One time step: returns `(h', c', cache)`.
    pub fn step(&self, x: &[f64], h: &[f64], c: &[f64]) -> Result<(Vec<f64>, Vec<f64>, LstmStepCache), NeuralError> {
        check_len("lstm input", self.input_dim, x.len())?;
        check_len("lstm hidden state", self.hidden_dim, h.len())?;
        check_len("lstm cell state", self.hidden_dim, c.len())?;
        let hd = self.hidden_dim;
        let width = self.width();
        let mut concat = Vec::with_capacity(width);
        concat.extend_from_slice(x);
        concat.extend_from_slice(h);
        let (w, b) = self.params.split_at(self.bias_offset());
        let z: Vec<f64> = w.chunks_exact(width).zip(b).map(|(row, bias)| bias + dot(row, &concat)).collect();
        let i: Vec<f64> = z[..hd].iter().map(|v| sigmoid(*v)).collect();
        let f: Vec<f64> = z[hd..2 * hd].iter().map(|v| sigmoid(*v)).collect();
        let g: Vec<f64> = z[2 * hd..3 * hd].iter().map(|v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * hd..].iter().map(|v| sigmoid(*v)).collect();
        let c_new: Vec<f64> = (0..hd).map(|k| f[k] * c[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c_new.iter().map(|v| v.tanh()).collect();
        let h_new: Vec<f64> = (0..hd).map(|k| o[k] * tanh_c[k]).collect();
        let cache = LstmStepCache { concat, c_prev: c.to_vec(), i, f, g, o, tanh_c };
        Ok((h_new, c_new, cache))
    }

    /// Backward through one step. Accumulates parameter gradients into
    /// `grads` and returns `(dx, dh_prev, dc_prev)`.
    pub fn backward_step(
        &self,
        cache: &LstmStepCache,
        dh: &[f64],
        dc: &[f64],
        grads: &mut [f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), NeuralError> {
        let hd = self.hidden_dim;
        let width = self.width();
        check_len("lstm cache width", width, cache.concat.len())?;
        check_len("lstm dh", hd, dh.len())?;
        check_len("lstm dc", hd, dc.len())?;
        check_len("lstm gradient buffer", self.params.len(), grads.len())?;
        let mut dz = vec![0.0; 4 * hd];
        let mut dc_prev = vec![0.0; hd];
        for k in 0..hd {
            let (i, f, g, o, tc) = (cache.i[k], cache.f[k], cache.g[k], cache.o[k], cache.tanh_c[k]);
            let d_o = dh[k] * tc;
            let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
            dz[k] = dct * g * i * (1.0 - i);
            dz[hd + k] = dct * cache.c_prev[k] * f * (1.0 - f);
            dz[2 * hd + k] = dct * i * (1.0 - g * g);
            dz[3 * hd + k] = d_o * o * (1.0 - o);
            dc_prev[k] = dct * f;
        }
        let bias_off = self.bias_offset();
        let mut dconcat = vec![0.0; width];
        let (gw, gb) = grads.split_at_mut(bias_off);
        let w = &self.params[..bias_off];
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            gb[r] += d;
            for (g, x) in gw[r * width..(r + 1) * width].iter_mut().zip(&cache.concat) {
                *g += d * x;
            }
            for (dcv, wv) in dconcat.iter_mut().zip(&w[r * width..(r + 1) * width]) {
                *dcv += d * wv;
            }
        }
        let dh_prev = dconcat.split_off(self.input_dim);
        Ok((dconcat, dh_prev, dc_prev))
    }
}
