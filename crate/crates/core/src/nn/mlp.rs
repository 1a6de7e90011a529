use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MLP_FORMAT: &str = "qsynth-mlp";
pub const MLP_VERSION: u32 = 1;

/// Fully connected network: ReLU on hidden layers, linear output.
///
/// All parameters live in one flat vector. Layer `l` contributes its weight
/// matrix (`fan_in × fan_out`, row-major, so `w[i * fan_out + j]` connects
/// input `i` to output `j`) followed by its `fan_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

fn layout(sizes: &[usize]) -> Result<(Vec<usize>, usize)> {
    if sizes.len() < 2 {
        return invalid("an MLP needs at least an input and an output layer");
    }
    if sizes.iter().any(|&s| s == 0) {
        return invalid("layer sizes must be positive");
    }
    let mut offsets = Vec::with_capacity(sizes.len() - 1);
    let mut total = 0;
    for w in sizes.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    Ok((offsets, total))
}

impl Mlp {
    /// He-normal weights (`std = sqrt(2 / fan_in)`), zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let (offsets, total) = layout(layer_sizes)?;
        let mut params = vec![0.0; total];
        for (l, w) in layer_sizes.windows(2).enumerate() {
            let normal = Normal::new(0.0, (2.0 / w[0] as f64).sqrt())
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let o = offsets[l];
            for v in &mut params[o..o + w[0] * w[1]] {
                *v = normal.sample(rng);
            }
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
            offsets,
        })
    }

    pub fn from_params(layer_sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let (offsets, total) = layout(layer_sizes)?;
        if params.len() != total {
            return invalid(format!(
                "layer sizes {layer_sizes:?} need {total} parameters, got {}",
                params.len()
            ));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite network parameter".into()));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
            offsets,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn d_in(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn d_out(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weight matrix of layer `l`, `fan_in × fan_out` row-major.
    pub fn weights(&self, l: usize) -> &[f64] {
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        &self.params[self.offsets[l]..self.offsets[l] + i * o]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let s = self.offsets[l] + i * o;
        &self.params[s..s + o]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d_in() {
            return invalid(format!(
                "network expects {} inputs, got {}",
                self.d_in(),
                x.len()
            ));
        }
        Ok(())
    }

    fn layer(&self, l: usize, x: &[f64], out: &mut Vec<f64>) {
        let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let w = self.weights(l);
        out.clear();
        out.extend_from_slice(self.biases(l));
        for (i, &xi) in x.iter().enumerate().take(n_in) {
            if xi == 0.0 {
                continue;
            }
            let row = &w[i * n_out..(i + 1) * n_out];
            for (o, &wij) in out.iter_mut().zip(row) {
                *o += xi * wij;
            }
        }
        if l + 1 < self.n_layers() {
            out.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }

    /// Activations of every layer, input included.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(x.to_vec());
        for l in 0..self.n_layers() {
            let mut out = Vec::with_capacity(self.layer_sizes[l + 1]);
            self.layer(l, &acts[l], &mut out);
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in 0..self.n_layers() {
            self.layer(l, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.forward(x)).collect()
    }

    /// Accumulates `scale · ∂(q_action)/∂params` into `grad`.
    fn backprop_output(&self, acts: &[Vec<f64>], action: usize, scale: f64, grad: &mut [f64]) {
        let mut delta = vec![0.0; self.d_out()];
        delta[action] = scale;
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let o = self.offsets[l];
            let x = &acts[l];
            for i in 0..n_in {
                if x[i] == 0.0 {
                    continue;
                }
                let g = &mut grad[o + i * n_out..o + (i + 1) * n_out];
                for (gj, &dj) in g.iter_mut().zip(&delta) {
                    *gj += x[i] * dj;
                }
            }
            for (gb, &dj) in grad[o + n_in * n_out..o + n_in * n_out + n_out]
                .iter_mut()
                .zip(&delta)
            {
                *gb += dj;
            }
            if l == 0 {
                break;
            }
            let w = self.weights(l);
            let mut prev = vec![0.0; n_in];
            for i in 0..n_in {
                // ReLU derivative: the activation is zero exactly where the unit is off.
                if x[i] > 0.0 {
                    let row = &w[i * n_out..(i + 1) * n_out];
                    prev[i] = row.iter().zip(&delta).map(|(a, b)| a * b).sum();
                }
            }
            delta = prev;
        }
    }

    /// Masked MSE over the batch and its gradient. Samples with a non-finite
    /// target are skipped.
    pub fn loss_and_grad(
        &self,
        inputs: &[Vec<f64>],
        actions: &[usize],
        targets: &[f64],
    ) -> Result<BatchGrad> {
        if inputs.len() != actions.len() || inputs.len() != targets.len() {
            return invalid("inputs, actions and targets must have equal length");
        }
        for (x, &a) in inputs.iter().zip(actions) {
            self.check_input(x)?;
            if a >= self.d_out() {
                return invalid(format!("action {a} out of range for {} outputs", self.d_out()));
            }
        }
        let used: Vec<usize> = (0..inputs.len()).filter(|&i| targets[i].is_finite()).collect();
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let m = used.len().max(1) as f64;
        for &i in &used {
            let acts = self.activations(&inputs[i]);
            let err = acts.last().unwrap()[actions[i]] - targets[i];
            loss += err * err;
            self.backprop_output(&acts, actions[i], 2.0 * err / m, &mut grad);
        }
        Ok(BatchGrad {
            loss: loss / m,
            grad,
            used: used.len(),
            skipped: inputs.len() - used.len(),
        })
    }

    pub fn to_file(&self) -> MlpFile {
        MlpFile {
            format: MLP_FORMAT.into(),
            version: MLP_VERSION,
            layer_sizes: self.layer_sizes.clone(),
            params: self.params.clone(),
        }
    }

    pub fn from_file(file: MlpFile) -> Result<Self> {
        if file.format != MLP_FORMAT {
            return Err(Error::Format(format!(
                "expected format {MLP_FORMAT:?}, found {:?}",
                file.format
            )));
        }
        if file.version != MLP_VERSION {
            return Err(Error::Format(format!(
                "unsupported network file version {}",
                file.version
            )));
        }
        Self::from_params(&file.layer_sizes, file.params)
            .map_err(|e| Error::Format(format!("bad network record: {e}")))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(&self.to_file())?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: MlpFile = serde_json::from_slice(bytes)
            .map_err(|e| Error::Format(format!("not a network file: {e}")))?;
        Self::from_file(file)
    }
}

/// On-disk network record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpFile {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub used: usize,
    pub skipped: usize,
}

/// `target ← (1 − τ)·target + τ·online`, elementwise.
pub fn polyak(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if target.layer_sizes != online.layer_sizes {
        return invalid("polyak averaging needs identical architectures");
    }
    if !(0.0..=1.0).contains(&tau) {
        return invalid(format!("tau must lie in [0, 1], got {tau}"));
    }
    if tau == 1.0 {
        target.params.copy_from_slice(&online.params);
        return Ok(());
    }
    for (t, &o) in target.params.iter_mut().zip(&online.params) {
        *t = (1.0 - tau) * *t + tau * o;
    }
    Ok(())
}

/// Largest disagreement between the backprop gradient of the single-sample
/// loss `(q_action(x) − target)²` and central differences over every
/// parameter. Entries are compared relative to `max(|a|, |b|, 1e-3)`, so
/// near-zero entries are effectively held to an absolute 1e-7 at the 1e-4
/// level.
pub fn gradient_check(net: &Mlp, x: &[f64], action: usize, target: f64) -> Result<f64> {
    let bg = net.loss_and_grad(&[x.to_vec()], &[action], &[target])?;
    let mut probe = net.clone();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let loss_at = |n: &Mlp| {
        let q = n.forward(x).map(|v| v[action])?;
        Ok::<f64, Error>((q - target).powi(2))
    };
    for k in 0..net.params.len() {
        let orig = probe.params[k];
        probe.params[k] = orig + h;
        let fp = loss_at(&probe)?;
        probe.params[k] = orig - h;
        let fm = loss_at(&probe)?;
        probe.params[k] = orig;
        let fd = (fp - fm) / (2.0 * h);
        let a = bg.grad[k];
        let err = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-3);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{train_batch, AdamState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn shapes_and_zero_input() {
        let net = Mlp::new(&[4, 8, 3], &mut rng(0)).unwrap();
        assert_eq!(net.weights(0).len(), 4 * 8);
        assert_eq!(net.weights(1).len(), 8 * 3);
        assert_eq!(net.params().len(), 4 * 8 + 8 + 8 * 3 + 3);
        assert_eq!(net.forward(&[0.0; 4]).unwrap(), vec![0.0; 3]);
        assert!(Mlp::new(&[4], &mut rng(0)).is_err());
        assert!(Mlp::new(&[4, 0, 2], &mut rng(0)).is_err());
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = Mlp::new(&[5, 7, 2], &mut rng(9)).unwrap();
        let b = Mlp::new(&[5, 7, 2], &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_single_layer() {
        let mut p = vec![0.0; 3 * 3 + 3];
        for i in 0..3 {
            p[i * 3 + i] = 1.0;
        }
        let net = Mlp::from_params(&[3, 3], p).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
        let rows = net.forward_batch(&[vec![0.3, 0.1, 0.2], vec![0.3, 0.1, 0.2]]).unwrap();
        assert_eq!(rows[0], rows[1]);
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let mut r = rng(seed);
            let net = Mlp::new(&[6, 10, 9, 8, 4], &mut r).unwrap();
            let x: Vec<f64> = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
            let err = gradient_check(&net, &x, (seed % 4) as usize, 0.7).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_loss_point_has_zero_gradient() {
        let mut r = rng(1);
        let net = Mlp::new(&[3, 5, 2], &mut r).unwrap();
        let x = [0.2, -0.4, 0.9];
        let q = net.forward(&x).unwrap()[1];
        let bg = net.loss_and_grad(&[x.to_vec()], &[1], &[q]).unwrap();
        assert!(bg.grad.iter().all(|g| g.abs() < 1e-8));
        assert!(gradient_check(&net, &x, 1, q).unwrap() < 1e-4);
    }

    #[test]
    fn masked_outputs_get_no_gradient() {
        let net = Mlp::new(&[3, 4], &mut rng(2)).unwrap();
        let bg = net.loss_and_grad(&[vec![1.0, 2.0, 3.0]], &[1], &[5.0]).unwrap();
        for i in 0..3 {
            for j in [0, 2, 3] {
                assert_eq!(bg.grad[i * 4 + j], 0.0);
            }
        }
        for j in [0, 2, 3] {
            assert_eq!(bg.grad[12 + j], 0.0);
        }
    }

    #[test]
    fn polyak_rules() {
        let sizes = [2, 2];
        let mut t = Mlp::from_params(&sizes, vec![0.0; 6]).unwrap();
        let o = Mlp::from_params(&sizes, vec![1.0; 6]).unwrap();
        polyak(&mut t, &o, 0.01).unwrap();
        assert!(t.params().iter().all(|&v| (v - 0.01).abs() < 1e-15));
        polyak(&mut t, &o, 1.0).unwrap();
        assert_eq!(t, o);
        let before = t.clone();
        polyak(&mut t, &o, 0.3).unwrap();
        assert_eq!(t, before);
        let other = Mlp::from_params(&[2, 3], vec![0.0; 9]).unwrap();
        assert!(polyak(&mut t, &other, 0.5).is_err());
    }

    #[test]
    fn learns_a_synthetic_mapping() {
        let mut r = rng(5);
        let mut net = Mlp::new(&[3, 32, 2], &mut r).unwrap();
        let mut adam = AdamState::new(&net, 1e-2);
        let xs: Vec<Vec<f64>> = (0..32)
            .map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect())
            .collect();
        let acts: Vec<usize> = (0..32).map(|i| i % 2).collect();
        let ts: Vec<f64> = xs
            .iter()
            .zip(&acts)
            .map(|(x, &a)| if a == 0 { x[0] - 0.5 * x[1] } else { x[2] * x[2] })
            .collect();
        let first = train_batch(&mut net, &mut adam, &xs, &acts, &ts).unwrap().loss;
        let mut last = first;
        for _ in 0..500 {
            last = train_batch(&mut net, &mut adam, &xs, &acts, &ts).unwrap().loss;
        }
        assert!(last < 0.01 * first, "{first} -> {last}");
    }

    #[test]
    fn json_round_trip_and_corruption() {
        let net = Mlp::new(&[3, 4, 2], &mut rng(4)).unwrap();
        let bytes = net.to_json().unwrap();
        assert_eq!(Mlp::from_json(&bytes).unwrap(), net);
        assert!(matches!(Mlp::from_json(b"[1,2]"), Err(Error::Format(_))));
        let mut f = net.to_file();
        f.version = 7;
        assert!(Mlp::from_file(f).is_err());
        let mut f = net.to_file();
        f.params.pop();
        assert!(Mlp::from_file(f).is_err());
    }
}
