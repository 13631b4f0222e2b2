//! Parameterized network: flat parameter storage addressed per layer,
//! evaluation, training-mode forward/backward and prediction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ops::{self, ConvGeom, PoolGeom};
use super::spec::{self, GlobalPoolKind, LayerSpec, Shape, Variant, INPUT_SHAPE};
use crate::gesture::GestureLabel;
use crate::math::{argmax, sqrt};
use crate::norm::{normalize, NormStats};
use crate::window::ImuWindow;
use crate::{Error, Result};

/// Everything needed to rebuild a network except its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input: Shape,
    pub layers: Vec<LayerSpec>,
    /// Output index -> gesture.
    pub labels: Vec<GestureLabel>,
    pub norm: NormStats,
    pub variant: Option<Variant>,
    pub init_seed: u64,
}

impl ModelSpec {
    pub fn standard(variant: Variant, global: GlobalPoolKind, norm: NormStats, init_seed: u64) -> Self {
        ModelSpec {
            input: INPUT_SHAPE,
            layers: spec::architecture(variant, global),
            labels: GestureLabel::ALL.to_vec(),
            norm,
            variant: Some(variant),
            init_seed,
        }
    }

    pub fn param_count(&self) -> usize {
        spec::param_count(&self.layers)
    }

    /// Checks the layer chain and the label map against the output width.
    pub fn validate(&self) -> Result<Vec<Shape>> {
        let shapes = spec::shape_chain(self.input, &self.layers)?;
        if let Some(i) = self.layers.iter().position(|l| *l == LayerSpec::Softmax) {
            if i + 1 != self.layers.len() {
                return Err(Error::ShapeMismatch(format!("softmax must be the last layer, found at {i}")));
            }
        }
        match shapes.last() {
            Some(Shape::Vector(n)) if *n == self.labels.len() => Ok(shapes),
            other => Err(Error::ShapeMismatch(format!(
                "network output {:?} does not match {} labels",
                other,
                self.labels.len()
            ))),
        }
    }
}

/// Result of classifying one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: GestureLabel,
    pub confidence: f64,
    pub probs: Vec<f64>,
}

/// Arg-max decision with a confidence floor for the signal classes.
///
/// The smallest index wins ties. A signal whose probability is below
/// `threshold` falls back to Random, reported with Random's probability.
pub fn predict_from_probs(labels: &[GestureLabel], probs: &[f64], threshold: f64) -> Prediction {
    let k = argmax(probs);
    let (mut label, mut confidence) = (labels[k], probs[k]);
    if label.is_signal() && confidence < threshold {
        label = GestureLabel::Random;
        confidence = labels.iter().position(|l| *l == GestureLabel::Random).map_or(0.0, |r| probs[r]);
    }
    Prediction { label, confidence, probs: probs.to_vec() }
}

enum Aux {
    None,
    Cols(Vec<f64>),
    Argmax(Vec<u32>),
    Mask(Vec<f64>),
}

/// Cached activations from a training-mode forward pass over a batch.
pub struct Trace {
    batch: usize,
    input: Vec<f64>,
    outputs: Vec<Vec<f64>>,
    aux: Vec<Aux>,
}

impl Trace {
    /// Pre-softmax scores, `batch × n_out`.
    pub fn logits(&self) -> &[f64] {
        let n = self.outputs.len();
        &self.outputs[n - 1]
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    shapes: Vec<Shape>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

impl Model {
    /// Validates the spec and draws He-uniform weights (fan-in) with zero
    /// biases from `spec.init_seed`.
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let mut m = Self::zeroed(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(m.spec.init_seed);
        for i in 0..m.spec.layers.len() {
            let layer = m.spec.layers[i];
            let limit = sqrt(6.0 / layer.fan_in().max(1) as f64);
            let start = m.offsets[i];
            for w in &mut m.params[start..start + layer.weight_count()] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(m)
    }

    /// A model with every parameter set to zero.
    pub fn zeroed(spec: ModelSpec) -> Result<Self> {
        let shapes = spec.validate()?;
        spec.norm.validate()?;
        let mut offsets = Vec::with_capacity(spec.layers.len() + 1);
        let mut total = 0;
        for l in &spec.layers {
            offsets.push(total);
            total += l.param_count();
        }
        offsets.push(total);
        Ok(Model { spec, shapes, offsets, params: vec![0.0; total] })
    }

    pub fn with_params(spec: ModelSpec, params: Vec<f64>) -> Result<Self> {
        let mut m = Self::zeroed(spec)?;
        if params.len() != m.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "model needs {} parameters, got {}",
                m.params.len(),
                params.len()
            )));
        }
        m.params = params;
        Ok(m)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn set_norm(&mut self, norm: NormStats) -> Result<()> {
        norm.validate()?;
        self.spec.norm = norm;
        Ok(())
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Parameter block of layer `i` (weights followed by bias).
    pub fn layer_params(&self, i: usize) -> &[f64] {
        &self.params[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn layer_params_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.params[self.offsets[i]..self.offsets[i + 1]]
    }

    fn input_shape(&self, i: usize) -> Shape {
        if i == 0 {
            self.spec.input
        } else {
            self.shapes[i - 1]
        }
    }

    fn conv_geom(&self, i: usize) -> ConvGeom {
        let Shape::Map { c, h, w } = self.input_shape(i) else { unreachable!("validated") };
        match self.spec.layers[i] {
            LayerSpec::Conv2d { kh, kw, c_out, .. } => ConvGeom::stride1(c, h, w, c_out, kh, kw),
            LayerSpec::LatentPool { ph, pw, .. } => {
                ConvGeom { c_in: c, h, w, c_out: c, kh: ph, kw: pw, sh: ph, sw: pw }
            }
            _ => unreachable!("not a convolution"),
        }
    }

    fn pool_geom(&self, i: usize, ph: usize, pw: usize) -> PoolGeom {
        let Shape::Map { c, h, w } = self.input_shape(i) else { unreachable!("validated") };
        PoolGeom { c, h, w, ph, pw }
    }

    fn map_dims(&self, i: usize) -> (usize, usize) {
        match self.input_shape(i) {
            Shape::Map { c, h, w } => (c, h * w),
            Shape::Vector(n) => (n, 1),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input.len() {
            return Err(Error::ShapeMismatch(format!(
                "model input needs {} values, got {}",
                self.spec.input.len(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Runs layer `i` on a batch. Dropout is applied only when `rng` is given.
    fn layer_forward(&self, i: usize, batch: usize, x: &[f64], rng: Option<&mut ChaCha8Rng>) -> (Vec<f64>, Aux) {
        let layer = self.spec.layers[i];
        let p = self.layer_params(i);
        let wc = layer.weight_count();
        let in_len = self.input_shape(i).len();
        // Shapes were validated at construction, so kernel errors cannot occur.
        match layer {
            LayerSpec::Conv2d { .. } | LayerSpec::LatentPool { .. } => {
                let (y, cols) = ops::conv2d_forward_batch(&self.conv_geom(i), batch, x, &p[..wc], &p[wc..])
                    .expect("validated shape");
                (y, Aux::Cols(cols))
            }
            LayerSpec::MaxPool { ph, pw } => {
                let g = self.pool_geom(i, ph, pw);
                let mut y = Vec::with_capacity(batch * g.out_len());
                let mut arg = Vec::with_capacity(batch * g.out_len());
                for (b, xb) in x.chunks_exact(in_len).enumerate() {
                    let (yb, ab) = ops::maxpool_forward(&g, xb).expect("validated shape");
                    y.extend(yb);
                    arg.extend(ab.into_iter().map(|a| a + (b * in_len) as u32));
                }
                (y, Aux::Argmax(arg))
            }
            LayerSpec::GlobalPool { kind } => {
                let (c, hw) = self.map_dims(i);
                match kind {
                    GlobalPoolKind::Avg => {
                        let y = x
                            .chunks_exact(in_len)
                            .flat_map(|xb| ops::global_avg_pool_forward(c, hw, xb).expect("validated shape"));
                        (y.collect(), Aux::None)
                    }
                    GlobalPoolKind::Max => {
                        let mut y = Vec::with_capacity(batch * c);
                        let mut arg = Vec::with_capacity(batch * c);
                        for (b, xb) in x.chunks_exact(in_len).enumerate() {
                            let (yb, ab) = ops::global_max_pool_forward(c, hw, xb).expect("validated shape");
                            y.extend(yb);
                            arg.extend(ab.into_iter().map(|a| a + (b * in_len) as u32));
                        }
                        (y, Aux::Argmax(arg))
                    }
                }
            }
            LayerSpec::Dense { n_in, n_out } => {
                let y = x
                    .chunks_exact(n_in)
                    .flat_map(|xb| ops::dense_forward(n_in, n_out, xb, &p[..wc], &p[wc..]).expect("validated shape"));
                (y.collect(), Aux::None)
            }
            LayerSpec::Dropout { p } => match rng {
                Some(rng) => {
                    let (y, mask) = ops::dropout_forward(p, x, rng);
                    (y, Aux::Mask(mask))
                }
                None => (x.to_vec(), Aux::None),
            },
            LayerSpec::Relu => (ops::relu_forward(x), Aux::None),
            LayerSpec::Softmax => (x.chunks_exact(in_len).flat_map(ops::softmax).collect(), Aux::None),
        }
    }

    fn check_batch(&self, x: &[f64]) -> Result<usize> {
        let n = self.spec.input.len();
        if x.is_empty() || !x.len().is_multiple_of(n) {
            return Err(Error::ShapeMismatch(format!(
                "model input needs a positive multiple of {n} values, got {}",
                x.len()
            )));
        }
        Ok(x.len() / n)
    }

    /// Eval-mode outputs of every layer for an already-normalized input.
    pub fn activations_normalized(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let mut outs: Vec<Vec<f64>> = Vec::with_capacity(self.spec.layers.len());
        for i in 0..self.spec.layers.len() {
            let input = if i == 0 { x } else { &outs[i - 1] };
            let (y, _) = self.layer_forward(i, 1, input, None);
            outs.push(y);
        }
        Ok(outs)
    }

    /// Eval-mode class probabilities for a batch of already-normalized
    /// inputs, `batch × n_classes`.
    pub fn forward_batch_normalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = self.check_batch(x)?;
        let mut cur = x.to_vec();
        for i in 0..self.spec.layers.len() {
            cur = self.layer_forward(i, batch, &cur, None).0;
        }
        if self.spec.layers.last() != Some(&LayerSpec::Softmax) {
            let n = self.spec.labels.len();
            cur = cur.chunks_exact(n).flat_map(ops::softmax).collect();
        }
        Ok(cur)
    }

    /// Eval-mode class probabilities for an already-normalized input.
    pub fn forward_normalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.forward_batch_normalized(x)
    }

    /// Eval-mode class probabilities for a raw window, normalized with the
    /// model's frozen statistics.
    pub fn forward(&self, window: &ImuWindow) -> Vec<f64> {
        let x = normalize(window, &self.spec.norm);
        self.forward_normalized(x.as_slice()).expect("window matches the standard input")
    }

    pub fn predict(&self, window: &ImuWindow, threshold: f64) -> Prediction {
        predict_from_probs(&self.spec.labels, &self.forward(window), threshold)
    }

    /// Training-mode forward pass over a batch (dropout active when `rng` is
    /// given), stopping before a trailing softmax.
    pub fn forward_trace(&self, x: &[f64], mut rng: Option<&mut ChaCha8Rng>) -> Result<Trace> {
        let batch = self.check_batch(x)?;
        let n = self.trainable_depth();
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut aux = Vec::with_capacity(n);
        for i in 0..n {
            let input = if i == 0 { x } else { &outputs[i - 1] };
            let (y, a) = self.layer_forward(i, batch, input, rng.as_deref_mut());
            outputs.push(y);
            aux.push(a);
        }
        Ok(Trace { batch, input: x.to_vec(), outputs, aux })
    }

    fn trainable_depth(&self) -> usize {
        match self.spec.layers.last() {
            Some(LayerSpec::Softmax) => self.spec.layers.len() - 1,
            _ => self.spec.layers.len(),
        }
    }

    /// Back-propagates `dlogits` (gradient at the pre-softmax output,
    /// `batch × n_out`) and accumulates parameter gradients into `grad`.
    /// Returns the gradient with respect to the input; it is empty when the
    /// first layer is a convolution and `need_input_grad` is false.
    pub fn backward(
        &self,
        trace: &Trace,
        dlogits: &[f64],
        grad: &mut [f64],
        need_input_grad: bool,
    ) -> Result<Vec<f64>> {
        if grad.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!("gradient buffer needs {} values", self.params.len())));
        }
        let batch = trace.batch;
        let mut dy = dlogits.to_vec();
        for i in (0..self.trainable_depth()).rev() {
            let layer = self.spec.layers[i];
            let wc = layer.weight_count();
            let in_len = self.input_shape(i).len();
            let p = self.layer_params(i);
            let g = &mut grad[self.offsets[i]..self.offsets[i + 1]];
            dy = match (layer, &trace.aux[i]) {
                (LayerSpec::Conv2d { .. } | LayerSpec::LatentPool { .. }, Aux::Cols(cols)) => {
                    let (gw, gb) = g.split_at_mut(wc);
                    let need_dx = i > 0 || need_input_grad;
                    ops::conv2d_backward_batch(&self.conv_geom(i), batch, cols, &p[..wc], &dy, gw, gb, need_dx)?
                        .unwrap_or_default()
                }
                (LayerSpec::MaxPool { .. } | LayerSpec::GlobalPool { kind: GlobalPoolKind::Max }, Aux::Argmax(arg)) => {
                    let mut dx = vec![0.0; batch * in_len];
                    for (&a, &d) in arg.iter().zip(&dy) {
                        dx[a as usize] += d;
                    }
                    dx
                }
                (LayerSpec::GlobalPool { kind: GlobalPoolKind::Avg }, _) => {
                    let (c, hw) = self.map_dims(i);
                    let mut dx = Vec::with_capacity(batch * in_len);
                    for db in dy.chunks_exact(c) {
                        dx.extend(ops::global_avg_pool_backward(c, hw, db)?);
                    }
                    dx
                }
                (LayerSpec::Dense { n_in, n_out }, _) => {
                    let (gw, gb) = g.split_at_mut(wc);
                    let input: &[f64] = if i == 0 { &trace.input } else { &trace.outputs[i - 1] };
                    let mut dx = Vec::with_capacity(batch * n_in);
                    for (xb, db) in input.chunks_exact(n_in).zip(dy.chunks_exact(n_out)) {
                        dx.extend(ops::dense_backward(n_in, n_out, xb, &p[..wc], db, gw, gb)?);
                    }
                    dx
                }
                (LayerSpec::Dropout { .. }, Aux::Mask(mask)) => ops::dropout_backward(mask, &dy),
                (LayerSpec::Dropout { .. }, _) => dy,
                (LayerSpec::Relu, _) => ops::relu_backward(&trace.outputs[i], &dy),
                (LayerSpec::Softmax, _) => {
                    return Err(Error::ShapeMismatch("softmax is only supported as the last layer".into()))
                }
                (l, _) => return Err(Error::ShapeMismatch(format!("missing cached state for {}", l.name()))),
            };
        }
        Ok(dy)
    }

    /// Summed cross-entropy over a batch; accumulates the gradient of that
    /// sum into `grad`. Returns the summed loss and the arg-max output index
    /// of every sample.
    pub fn loss_and_grad(
        &self,
        x: &[f64],
        targets: &[usize],
        rng: Option<&mut ChaCha8Rng>,
        grad: &mut [f64],
    ) -> Result<(f64, Vec<usize>)> {
        let trace = self.forward_trace(x, rng)?;
        if targets.len() != trace.batch {
            return Err(Error::ShapeMismatch(format!("{} targets for a batch of {}", targets.len(), trace.batch)));
        }
        let n_out = trace.logits().len() / trace.batch;
        let mut total = 0.0;
        let mut dlogits = Vec::with_capacity(trace.logits().len());
        let mut predicted = Vec::with_capacity(trace.batch);
        for (z, &t) in trace.logits().chunks_exact(n_out).zip(targets) {
            let (loss, d) = ops::softmax_cross_entropy(z, t);
            total += loss;
            dlogits.extend(d);
            predicted.push(argmax(z));
        }
        self.backward(&trace, &dlogits, grad, false)?;
        Ok((total, predicted))
    }

    /// Eval-mode output of one layer for a raw window, split into one series
    /// per output channel taken along sensor row `row` (clamped to the map
    /// height). Vector outputs give one single-value series per unit.
    pub fn dump_activations(&self, window: &ImuWindow, layer: usize, row: usize) -> Result<Vec<Vec<f64>>> {
        if layer >= self.spec.layers.len() {
            return Err(Error::InvalidConfig(format!(
                "layer index {layer} out of range (model has {} layers)",
                self.spec.layers.len()
            )));
        }
        let x = normalize(window, &self.spec.norm);
        self.dump_activations_normalized(x.as_slice(), layer, row)
    }

    pub fn dump_activations_normalized(&self, x: &[f64], layer: usize, row: usize) -> Result<Vec<Vec<f64>>> {
        let mut outs = self.activations_normalized(x)?;
        let y = outs.swap_remove(layer);
        Ok(match self.shapes[layer] {
            Shape::Map { c, h, w } => {
                let r = row.min(h - 1);
                (0..c).map(|k| (0..w).map(|j| y[(r * w + j) * c + k]).collect()).collect()
            }
            Shape::Vector(_) => y.into_iter().map(|v| vec![v]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{N_CHANNELS, WINDOW_LEN};

    fn standard(variant: Variant, seed: u64) -> Model {
        Model::new(ModelSpec::standard(variant, GlobalPoolKind::Avg, NormStats::IDENTITY, seed)).unwrap()
    }

    fn ramp_window() -> ImuWindow {
        ImuWindow::from_vec((0..N_CHANNELS * WINDOW_LEN).map(|i| ((i * 37) % 101) as f64 / 50.0 - 1.0).collect())
            .unwrap()
    }

    #[test]
    fn param_counts_of_built_models() {
        assert_eq!(standard(Variant::CnnMax, 1).param_count(), 54_254);
        assert_eq!(standard(Variant::CnnLp, 1).param_count(), 56_018);
    }

    #[test]
    fn eval_forward_is_deterministic_and_normalized() {
        let m = standard(Variant::CnnLp, 5);
        let w = ramp_window();
        let a = m.forward(&w);
        let b = m.forward(&w);
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn predict_rules() {
        let labels = GestureLabel::ALL;
        let mut p = [0.02; 6];
        p[4] = 0.9;
        let r = predict_from_probs(&labels, &p, 0.0);
        assert_eq!((r.label, r.confidence), (GestureLabel::Fire, 0.9));
        let p = [0.05, 0.1, 0.1, 0.1, 0.55, 0.1];
        let r = predict_from_probs(&labels, &p, 0.6);
        assert_eq!(r.label, GestureLabel::Random);
        assert_eq!(r.confidence, 0.05);
        let u = [1.0 / 6.0; 6];
        assert_eq!(predict_from_probs(&labels, &u, 0.0).label, GestureLabel::Random);
        let mut tie = [0.0; 6];
        tie[2] = 0.5;
        tie[5] = 0.5;
        assert_eq!(predict_from_probs(&labels, &tie, 0.0).label, GestureLabel::RecommendedEvacuation);
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let m =
            Model::zeroed(ModelSpec::standard(Variant::CnnMax, GlobalPoolKind::Avg, NormStats::IDENTITY, 0)).unwrap();
        let p = m.forward(&ramp_window());
        assert!(p.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn activation_dumps() {
        let spec = ModelSpec {
            input: INPUT_SHAPE,
            layers: alloc::vec![
                LayerSpec::Conv2d { kh: 1, kw: 1, c_in: 1, c_out: 1 },
                LayerSpec::GlobalPool { kind: GlobalPoolKind::Avg },
                LayerSpec::Dense { n_in: 1, n_out: 6 },
                LayerSpec::Softmax,
            ],
            labels: GestureLabel::ALL.to_vec(),
            norm: NormStats::IDENTITY,
            variant: None,
            init_seed: 0,
        };
        let mut m = Model::zeroed(spec).unwrap();
        m.layer_params_mut(0).copy_from_slice(&[1.0, 0.0]);
        let w = ramp_window();
        for row in 0..N_CHANNELS {
            let rows = m.dump_activations(&w, 0, row).unwrap();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0], w.channel(row));
        }

        let m = standard(Variant::CnnLp, 2);
        let conv2 = m.dump_activations(&w, 4, 0).unwrap();
        assert_eq!(conv2.len(), 24);
        assert!(conv2.iter().all(|r| r.len() == 50));
        let lp2 = m.dump_activations(&w, 6, 0).unwrap();
        assert_eq!((lp2.len(), lp2[0].len()), (24, 25));
        assert!(m.dump_activations(&w, 14, 0).is_err());
    }

    #[test]
    fn latent_pool_with_averaging_kernel_is_average_pooling() {
        // c = 3 channels, window (1, 4): diagonal weights 1/4 are exact in binary.
        let spec = ModelSpec {
            input: Shape::Map { c: 3, h: 2, w: 16 },
            layers: alloc::vec![
                LayerSpec::LatentPool { ph: 1, pw: 4, c: 3 },
                LayerSpec::GlobalPool { kind: GlobalPoolKind::Avg },
            ],
            labels: GestureLabel::ALL[..3].to_vec(),
            norm: NormStats::IDENTITY,
            variant: None,
            init_seed: 0,
        };
        let mut m = Model::zeroed(spec).unwrap();
        {
            let p = m.layer_params_mut(0);
            for o in 0..3 {
                for v in 0..4 {
                    p[(o * 3 + o) * 4 + v] = 0.25;
                }
            }
        }
        let x: Vec<f64> = (0..96).map(|i| ((i * 7919) % 113) as f64 - 40.0).collect();
        let at = |r: usize, t: usize, c: usize| x[(r * 16 + t) * 3 + c];
        let y = &m.activations_normalized(&x).unwrap()[0];
        for c in 0..3 {
            for r in 0..2 {
                for j in 0..4 {
                    let avg = (at(r, 4 * j, c) + at(r, 4 * j + 1, c) + at(r, 4 * j + 2, c) + at(r, 4 * j + 3, c)) / 4.0;
                    assert_eq!(y[(r * 4 + j) * 3 + c], avg);
                }
            }
        }
    }
}
