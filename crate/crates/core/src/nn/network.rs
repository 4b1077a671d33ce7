use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

/// Height, width, channels. Dense layers produce `1 x 1 x units`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape {
    pub fn new(h: usize, w: usize, c: usize) -> Self {
        Self { h, w, c }
    }

    pub fn flat(n: usize) -> Self {
        Self { h: 1, w: 1, c: n }
    }

    pub fn len(&self) -> usize {
        self.h * self.w * self.c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    /// Valid convolution, weights laid out `[out][ky][kx][in]`.
    Conv {
        out_channels: usize,
        kernel: (usize, usize),
        stride: usize,
    },
    /// Non-overlapping max pooling; trailing rows/columns are dropped.
    MaxPool { size: (usize, usize) },
    /// Fully connected, weights laid out `[out][in]`.
    Dense { units: usize },
    Relu,
    Sigmoid,
}

impl Layer {
    pub fn conv(out_channels: usize, kh: usize, kw: usize) -> Self {
        Layer::Conv {
            out_channels,
            kernel: (kh, kw),
            stride: 1,
        }
    }

    pub fn maxpool(h: usize, w: usize) -> Self {
        Layer::MaxPool { size: (h, w) }
    }

    pub fn dense(units: usize) -> Self {
        Layer::Dense { units }
    }

    fn output_shape(&self, input: Shape) -> Result<Shape, NnError> {
        let bad = |m: String| Err(NnError::InvalidSpec(m));
        match *self {
            Layer::Conv {
                out_channels,
                kernel: (kh, kw),
                stride,
            } => {
                if out_channels == 0 || kh == 0 || kw == 0 || stride == 0 {
                    return bad("conv needs positive channels, kernel and stride".into());
                }
                if kh > input.h || kw > input.w {
                    return bad(format!("kernel {kh}x{kw} larger than input {}x{}", input.h, input.w));
                }
                Ok(Shape::new(
                    (input.h - kh) / stride + 1,
                    (input.w - kw) / stride + 1,
                    out_channels,
                ))
            }
            Layer::MaxPool { size: (ph, pw) } => {
                if ph == 0 || pw == 0 || ph > input.h || pw > input.w {
                    return bad(format!("pool {ph}x{pw} does not fit input {}x{}", input.h, input.w));
                }
                Ok(Shape::new(input.h / ph, input.w / pw, input.c))
            }
            Layer::Dense { units } => {
                if units == 0 {
                    return bad("dense layer needs at least one unit".into());
                }
                Ok(Shape::flat(units))
            }
            Layer::Relu | Layer::Sigmoid => Ok(input),
        }
    }

    /// (weights, biases) parameter counts.
    fn param_counts(&self, input: Shape) -> (usize, usize) {
        match *self {
            Layer::Conv {
                out_channels,
                kernel: (kh, kw),
                ..
            } => (out_channels * kh * kw * input.c, out_channels),
            Layer::Dense { units } => (units * input.len(), units),
            _ => (0, 0),
        }
    }

    fn fans(&self, input: Shape) -> (usize, usize) {
        match *self {
            Layer::Conv {
                out_channels,
                kernel: (kh, kw),
                ..
            } => (kh * kw * input.c, kh * kw * out_channels),
            Layer::Dense { units } => (input.len(), units),
            _ => (0, 0),
        }
    }
}

/// Layer stack with its input shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input: Shape,
    pub layers: Vec<Layer>,
}

impl NetworkSpec {
    pub fn new(input: Shape, layers: Vec<Layer>) -> Result<Self, NnError> {
        let spec = Self { input, layers };
        spec.shapes()?;
        Ok(spec)
    }

    /// Checks shapes and that the network emits exactly `outputs` values.
    pub fn with_outputs(input: Shape, layers: Vec<Layer>, outputs: usize) -> Result<Self, NnError> {
        let spec = Self::new(input, layers)?;
        if spec.output_len()? != outputs {
            return Err(NnError::InvalidSpec(format!(
                "network emits {} values, {outputs} labels expected",
                spec.output_len()?
            )));
        }
        Ok(spec)
    }

    /// Convolutional default: conv-pool twice, then two dense layers with a
    /// sigmoid head.
    pub fn lenet(input: Shape, outputs: usize) -> Result<Self, NnError> {
        Self::with_outputs(
            input,
            vec![
                Layer::conv(8, 3, 3),
                Layer::maxpool(2, 2),
                Layer::conv(16, 3, 3),
                Layer::maxpool(2, 2),
                Layer::dense(64),
                Layer::Relu,
                Layer::dense(outputs),
                Layer::Sigmoid,
            ],
            outputs,
        )
    }

    pub fn mlp(input: Shape, hidden: usize, outputs: usize) -> Result<Self, NnError> {
        Self::with_outputs(
            input,
            vec![
                Layer::dense(hidden),
                Layer::Relu,
                Layer::dense(outputs),
                Layer::Sigmoid,
            ],
            outputs,
        )
    }

    /// Input shape of every layer followed by the final output shape.
    pub fn shapes(&self) -> Result<Vec<Shape>, NnError> {
        if self.input.is_empty() {
            return Err(NnError::InvalidSpec("empty input shape".into()));
        }
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        let mut s = self.input;
        shapes.push(s);
        for layer in &self.layers {
            s = layer.output_shape(s)?;
            shapes.push(s);
        }
        Ok(shapes)
    }

    pub fn output_len(&self) -> Result<usize, NnError> {
        Ok(self.shapes()?.last().expect("at least the input").len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerParams {
    fn zeros(w: usize, b: usize) -> Self {
        Self {
            weights: vec![0.0; w],
            bias: vec![0.0; b],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weights followed by biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    /// Flat index over weights then biases.
    pub fn value_mut(&mut self, k: usize) -> &mut f64 {
        let nw = self.weights.len();
        if k < nw {
            &mut self.weights[k]
        } else {
            &mut self.bias[k - nw]
        }
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

/// Learned parameters plus Adam moments of identical shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
    pub first_moment: Vec<LayerParams>,
    pub second_moment: Vec<LayerParams>,
    pub step: u64,
}

impl NetworkParams {
    pub fn zeros(spec: &NetworkSpec) -> Result<Self, NnError> {
        let shapes = spec.shapes()?;
        let layers: Vec<LayerParams> = spec
            .layers
            .iter()
            .zip(&shapes)
            .map(|(l, &s)| {
                let (w, b) = l.param_counts(s);
                LayerParams::zeros(w, b)
            })
            .collect();
        Ok(Self {
            first_moment: layers.clone(),
            second_moment: layers.clone(),
            layers,
            step: 0,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Result<Self, NnError> {
        let mut params = Self::zeros(spec)?;
        let shapes = spec.shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ((layer, &shape), p) in spec.layers.iter().zip(&shapes).zip(params.layers.iter_mut()) {
            let (fan_in, fan_out) = layer.fans(shape);
            if fan_in + fan_out == 0 {
                continue;
            }
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in p.weights.iter_mut() {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(params)
    }

    pub fn check_matches(&self, spec: &NetworkSpec) -> Result<(), NnError> {
        let reference = Self::zeros(spec)?;
        let same = |a: &[LayerParams]| {
            a.len() == reference.layers.len()
                && a.iter().zip(&reference.layers).all(|(x, y)| {
                    x.weights.len() == y.weights.len() && x.bias.len() == y.bias.len()
                })
        };
        if same(&self.layers) && same(&self.first_moment) && same(&self.second_moment) {
            Ok(())
        } else {
            Err(NnError::ShapeMismatch("parameters do not match the network spec".into()))
        }
    }

    pub fn count(&self) -> usize {
        self.layers.iter().map(LayerParams::len).sum()
    }
}

/// Per-layer gradients, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerParams::zeros(l.weights.len(), l.bias.len()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(|l| l.values().all(|&g| g == 0.0))
    }
}

/// Activations saved by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    batch: usize,
    shapes: Vec<Shape>,
    /// `activations[l]` is the batch input of layer `l`; the last entry is
    /// the network output.
    activations: Vec<Vec<f64>>,
    /// Flat input index of each pooled maximum, per pooling layer.
    argmax: Vec<Vec<usize>>,
}

impl ForwardPass {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Network outputs, `batch * outputs` values.
    pub fn outputs(&self) -> &[f64] {
        self.activations.last().expect("output activation")
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn conv_forward(
    input: &[f64],
    ins: Shape,
    outs: Shape,
    kernel: (usize, usize),
    stride: usize,
    p: &LayerParams,
    out: &mut [f64],
) {
    let (kh, kw) = kernel;
    let ic = ins.c;
    let oc = outs.c;
    let ksize = kh * kw * ic;
    for oy in 0..outs.h {
        for ox in 0..outs.w {
            let o = &mut out[(oy * outs.w + ox) * oc..(oy * outs.w + ox + 1) * oc];
            o.copy_from_slice(&p.bias);
            for ky in 0..kh {
                for kx in 0..kw {
                    let base = ((oy * stride + ky) * ins.w + ox * stride + kx) * ic;
                    let x = &input[base..base + ic];
                    let woff = (ky * kw + kx) * ic;
                    for (c, acc) in o.iter_mut().enumerate() {
                        let w = &p.weights[c * ksize + woff..c * ksize + woff + ic];
                        *acc += w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_backward(
    input: &[f64],
    ins: Shape,
    outs: Shape,
    kernel: (usize, usize),
    stride: usize,
    p: &LayerParams,
    dout: &[f64],
    grad: &mut LayerParams,
    din: Option<&mut [f64]>,
) {
    let (kh, kw) = kernel;
    let ic = ins.c;
    let oc = outs.c;
    let ksize = kh * kw * ic;
    let mut din = din;
    for oy in 0..outs.h {
        for ox in 0..outs.w {
            let d = &dout[(oy * outs.w + ox) * oc..(oy * outs.w + ox + 1) * oc];
            for (c, &g) in d.iter().enumerate() {
                grad.bias[c] += g;
            }
            for ky in 0..kh {
                for kx in 0..kw {
                    let base = ((oy * stride + ky) * ins.w + ox * stride + kx) * ic;
                    let woff = (ky * kw + kx) * ic;
                    let x = &input[base..base + ic];
                    for (c, &g) in d.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let gw = &mut grad.weights[c * ksize + woff..c * ksize + woff + ic];
                        for (a, &b) in gw.iter_mut().zip(x) {
                            *a += g * b;
                        }
                        if let Some(di) = din.as_deref_mut() {
                            let w = &p.weights[c * ksize + woff..c * ksize + woff + ic];
                            for (a, &b) in di[base..base + ic].iter_mut().zip(w) {
                                *a += g * b;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn pool_forward(input: &[f64], ins: Shape, outs: Shape, size: (usize, usize), out: &mut [f64], argmax: &mut [usize]) {
    let (ph, pw) = size;
    for oy in 0..outs.h {
        for ox in 0..outs.w {
            for c in 0..ins.c {
                let mut best = f64::NEG_INFINITY;
                let mut at = 0;
                for ky in 0..ph {
                    for kx in 0..pw {
                        let k = ((oy * ph + ky) * ins.w + ox * pw + kx) * ins.c + c;
                        if input[k] > best {
                            best = input[k];
                            at = k;
                        }
                    }
                }
                let o = (oy * outs.w + ox) * outs.c + c;
                out[o] = best;
                argmax[o] = at;
            }
        }
    }
}

fn dense_forward(input: &[f64], p: &LayerParams, out: &mut [f64]) {
    let n = input.len();
    for (u, o) in out.iter_mut().enumerate() {
        let w = &p.weights[u * n..(u + 1) * n];
        *o = p.bias[u] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Runs a batch through the network. `inputs` holds `batch` consecutive
/// input vectors.
pub fn forward(
    params: &NetworkParams,
    spec: &NetworkSpec,
    inputs: &[f64],
    batch: usize,
) -> Result<ForwardPass, NnError> {
    let shapes = spec.shapes()?;
    params.check_matches(spec)?;
    if inputs.len() != batch * spec.input.len() {
        return Err(NnError::ShapeMismatch(format!(
            "batch of {batch} needs {} input values, got {}",
            batch * spec.input.len(),
            inputs.len()
        )));
    }
    let mut activations = Vec::with_capacity(spec.layers.len() + 1);
    activations.push(inputs.to_vec());
    let mut argmax = Vec::new();
    for (l, layer) in spec.layers.iter().enumerate() {
        let (ins, outs) = (shapes[l], shapes[l + 1]);
        let x = &activations[l];
        let mut y = vec![0.0; batch * outs.len()];
        let p = &params.layers[l];
        match *layer {
            Layer::Conv { kernel, stride, .. } => {
                for (xi, yi) in x.chunks_exact(ins.len()).zip(y.chunks_exact_mut(outs.len())) {
                    conv_forward(xi, ins, outs, kernel, stride, p, yi);
                }
            }
            Layer::MaxPool { size } => {
                let mut idx = vec![0usize; batch * outs.len()];
                for ((xi, yi), ai) in x
                    .chunks_exact(ins.len())
                    .zip(y.chunks_exact_mut(outs.len()))
                    .zip(idx.chunks_exact_mut(outs.len()))
                {
                    pool_forward(xi, ins, outs, size, yi, ai);
                }
                argmax.push(idx);
            }
            Layer::Dense { .. } => {
                for (xi, yi) in x.chunks_exact(ins.len()).zip(y.chunks_exact_mut(outs.len())) {
                    dense_forward(xi, p, yi);
                }
            }
            Layer::Relu => {
                for (a, b) in y.iter_mut().zip(x) {
                    *a = b.max(0.0);
                }
            }
            Layer::Sigmoid => {
                for (a, &b) in y.iter_mut().zip(x) {
                    *a = sigmoid(b);
                }
            }
        }
        activations.push(y);
    }
    Ok(ForwardPass {
        batch,
        shapes,
        activations,
        argmax,
    })
}

/// Backpropagates `error_signal` (derivative of the loss with respect to the
/// outputs) and returns parameter gradients summed over the batch.
pub fn backward(
    params: &NetworkParams,
    spec: &NetworkSpec,
    pass: &ForwardPass,
    error_signal: &[f64],
) -> Result<Gradients, NnError> {
    if pass.shapes != spec.shapes()? || pass.activations.len() != spec.layers.len() + 1 {
        return Err(NnError::MissingForward);
    }
    params.check_matches(spec)?;
    if error_signal.len() != pass.outputs().len() {
        return Err(NnError::ShapeMismatch(format!(
            "error signal has {} values, outputs have {}",
            error_signal.len(),
            pass.outputs().len()
        )));
    }
    let batch = pass.batch;
    let mut grads = Gradients::zeros_like(params);
    let mut delta = error_signal.to_vec();
    let mut pool_idx = pass.argmax.len();
    for (l, layer) in spec.layers.iter().enumerate().rev() {
        let (ins, outs) = (pass.shapes[l], pass.shapes[l + 1]);
        let x = &pass.activations[l];
        let y = &pass.activations[l + 1];
        let need_input_grad = l > 0;
        let mut dx = vec![0.0; if need_input_grad { batch * ins.len() } else { 0 }];
        match *layer {
            Layer::Conv { kernel, stride, .. } => {
                let p = &params.layers[l];
                let g = &mut grads.layers[l];
                for b in 0..batch {
                    let xi = &x[b * ins.len()..(b + 1) * ins.len()];
                    let di = &delta[b * outs.len()..(b + 1) * outs.len()];
                    let dxi = need_input_grad.then(|| &mut dx[b * ins.len()..(b + 1) * ins.len()]);
                    conv_backward(xi, ins, outs, kernel, stride, p, di, g, dxi);
                }
            }
            Layer::MaxPool { .. } => {
                pool_idx -= 1;
                let idx = &pass.argmax[pool_idx];
                if need_input_grad {
                    for b in 0..batch {
                        for k in 0..outs.len() {
                            dx[b * ins.len() + idx[b * outs.len() + k]] += delta[b * outs.len() + k];
                        }
                    }
                }
            }
            Layer::Dense { .. } => {
                let p = &params.layers[l];
                let g = &mut grads.layers[l];
                let n = ins.len();
                for b in 0..batch {
                    let xi = &x[b * n..(b + 1) * n];
                    for u in 0..outs.len() {
                        let d = delta[b * outs.len() + u];
                        if d == 0.0 {
                            continue;
                        }
                        g.bias[u] += d;
                        let gw = &mut g.weights[u * n..(u + 1) * n];
                        for (a, &v) in gw.iter_mut().zip(xi) {
                            *a += d * v;
                        }
                        if need_input_grad {
                            let w = &p.weights[u * n..(u + 1) * n];
                            for (a, &v) in dx[b * n..(b + 1) * n].iter_mut().zip(w) {
                                *a += d * v;
                            }
                        }
                    }
                }
            }
            Layer::Relu => {
                if need_input_grad {
                    for k in 0..dx.len() {
                        dx[k] = if x[k] > 0.0 { delta[k] } else { 0.0 };
                    }
                }
            }
            Layer::Sigmoid => {
                if need_input_grad {
                    for k in 0..dx.len() {
                        dx[k] = delta[k] * y[k] * (1.0 - y[k]);
                    }
                }
            }
        }
        delta = dx;
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_checked() {
        let spec = NetworkSpec::lenet(Shape::new(16, 12, 3), 289).unwrap();
        let shapes = spec.shapes().unwrap();
        assert_eq!(shapes[1], Shape::new(14, 10, 8));
        assert_eq!(shapes[2], Shape::new(7, 5, 8));
        assert_eq!(shapes[3], Shape::new(5, 3, 16));
        assert_eq!(shapes[4], Shape::new(2, 1, 16));
        assert_eq!(spec.output_len().unwrap(), 289);
        assert!(NetworkSpec::with_outputs(Shape::flat(4), vec![Layer::dense(3)], 2).is_err());
        assert!(NetworkSpec::new(Shape::new(2, 2, 1), vec![Layer::conv(1, 3, 3)]).is_err());
        assert!(NetworkSpec::new(Shape::new(2, 2, 1), vec![Layer::maxpool(3, 1)]).is_err());
    }

    #[test]
    fn zero_params_give_half() {
        let spec = NetworkSpec::mlp(Shape::flat(6), 5, 4).unwrap();
        let params = NetworkParams::zeros(&spec).unwrap();
        let pass = forward(&params, &spec, &[0.3; 12], 2).unwrap();
        assert_eq!(pass.outputs(), &[0.5; 8]);
    }

    #[test]
    fn single_dense_layer_arithmetic() {
        let spec = NetworkSpec::new(Shape::flat(2), vec![Layer::dense(2)]).unwrap();
        let mut params = NetworkParams::zeros(&spec).unwrap();
        params.layers[0].weights = vec![1.0, 0.0, 0.0, 1.0];
        params.layers[0].bias = vec![0.5, -0.5];
        let pass = forward(&params, &spec, &[1.0, 2.0], 1).unwrap();
        assert_eq!(pass.outputs(), &[1.5, 1.5]);
        let spec = NetworkSpec::new(Shape::flat(2), vec![Layer::dense(2), Layer::Sigmoid]).unwrap();
        params.layers.push(LayerParams::zeros(0, 0));
        params.first_moment.push(LayerParams::zeros(0, 0));
        params.second_moment.push(LayerParams::zeros(0, 0));
        let pass = forward(&params, &spec, &[1.0, 2.0], 1).unwrap();
        assert!((pass.outputs()[0] - 1.0 / (1.0 + (-1.5f64).exp())).abs() < 1e-15);
    }

    /// Direct nested-loop convolution.
    fn naive_conv(x: &[f64], s: Shape, w: &[f64], b: &[f64], oc: usize, k: (usize, usize), stride: usize) -> Vec<f64> {
        let oh = (s.h - k.0) / stride + 1;
        let ow = (s.w - k.1) / stride + 1;
        let mut out = vec![0.0; oh * ow * oc];
        for oy in 0..oh {
            for ox in 0..ow {
                for c in 0..oc {
                    let mut acc = b[c];
                    for ky in 0..k.0 {
                        for kx in 0..k.1 {
                            for ic in 0..s.c {
                                let xv = x[((oy * stride + ky) * s.w + ox * stride + kx) * s.c + ic];
                                let wv = w[((c * k.0 + ky) * k.1 + kx) * s.c + ic];
                                acc += xv * wv;
                            }
                        }
                    }
                    out[(oy * ow + ox) * oc + c] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn conv_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let s = Shape::new(rng.random_range(3..8), rng.random_range(3..8), rng.random_range(1..4));
            let k = (rng.random_range(1..=3), rng.random_range(1..=3));
            let stride = rng.random_range(1..=2);
            let oc = rng.random_range(1..5);
            let spec = NetworkSpec::new(
                s,
                vec![Layer::Conv { out_channels: oc, kernel: k, stride }],
            )
            .unwrap();
            let mut params = NetworkParams::init(&spec, trial).unwrap();
            for b in params.layers[0].bias.iter_mut() {
                *b = rng.random_range(-1.0..1.0);
            }
            let x: Vec<f64> = (0..2 * s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let pass = forward(&params, &spec, &x, 2).unwrap();
            let out_len = spec.output_len().unwrap();
            for b in 0..2 {
                let oracle = naive_conv(
                    &x[b * s.len()..(b + 1) * s.len()],
                    s,
                    &params.layers[0].weights,
                    &params.layers[0].bias,
                    oc,
                    k,
                    stride,
                );
                for (a, o) in pass.outputs()[b * out_len..(b + 1) * out_len].iter().zip(&oracle) {
                    assert!((a - o).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn maxpool_picks_maximum() {
        let spec = NetworkSpec::new(Shape::new(2, 4, 1), vec![Layer::maxpool(2, 2)]).unwrap();
        let params = NetworkParams::zeros(&spec).unwrap();
        let pass = forward(&params, &spec, &[1.0, 5.0, -1.0, 0.0, 2.0, 3.0, -4.0, -0.5], 1).unwrap();
        assert_eq!(pass.outputs(), &[5.0, 0.0]);
    }

    #[test]
    fn zero_error_gives_zero_gradients() {
        let spec = NetworkSpec::lenet(Shape::new(10, 10, 2), 3).unwrap();
        let params = NetworkParams::init(&spec, 1).unwrap();
        let x: Vec<f64> = (0..200).map(|k| (k as f64 * 0.37).sin()).collect();
        let pass = forward(&params, &spec, &x, 1).unwrap();
        let g = backward(&params, &spec, &pass, &[0.0; 3]).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn backward_rejects_foreign_pass() {
        let a = NetworkSpec::mlp(Shape::flat(4), 3, 2).unwrap();
        let b = NetworkSpec::mlp(Shape::flat(5), 3, 2).unwrap();
        let pa = NetworkParams::zeros(&a).unwrap();
        let pass = forward(&pa, &a, &[0.0; 4], 1).unwrap();
        let pb = NetworkParams::zeros(&b).unwrap();
        assert!(matches!(backward(&pb, &b, &pass, &[0.0; 2]), Err(NnError::MissingForward)));
        assert!(backward(&pa, &a, &pass, &[0.0; 3]).is_err());
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let spec = NetworkSpec::mlp(Shape::flat(10), 20, 5).unwrap();
        let a = NetworkParams::init(&spec, 3).unwrap();
        let b = NetworkParams::init(&spec, 3).unwrap();
        assert_eq!(a, b);
        let limit = (6.0f64 / 30.0).sqrt();
        assert!(a.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert!(a.layers[0].bias.iter().all(|&b| b == 0.0));
        assert_eq!(a.count(), 10 * 20 + 20 + 20 * 5 + 5);
    }
}
