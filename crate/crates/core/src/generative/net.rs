use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
            Activation::Tanh => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Activation::Linear,
            1 => Activation::Relu,
            2 => Activation::Sigmoid,
            3 => Activation::Tanh,
            other => return Err(Error::Format(format!("unknown activation code {other}"))),
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Linear => v,
            Activation::Relu => v.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `pre` and output `out`.
    /// ReLU takes subgradient 0 at the kink.
    fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

/// Affine map `W·v + b` followed by an activation. `weights` is `out × in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        check_len("layer weights", in_dim * out_dim, weights.len())?;
        check_len("layer bias", out_dim, bias.len())?;
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("layer parameters must be finite".into()));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        })
    }

    fn pre_activation(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

/// Feed-forward generator `G: R^p → R^n` built from dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet {
    layers: Vec<DenseLayer>,
}

struct LayerTrace {
    pre: Vec<f64>,
    out: Vec<f64>,
}

impl GeneratorNet {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("generator needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            check_len("layer input", pair[0].out_dim, pair[1].in_dim)?;
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn latent_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn forward(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len("latent vector", self.latent_dim(), z.len())?;
        let mut v = z.to_vec();
        for layer in &self.layers {
            v = layer
                .pre_activation(&v)
                .into_iter()
                .map(|p| layer.activation.apply(p))
                .collect();
        }
        Ok(v)
    }

    fn forward_traced(&self, z: &[f64]) -> Vec<LayerTrace> {
        let mut traces: Vec<LayerTrace> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = traces.last().map_or(z, |t| t.out.as_slice());
            let pre = layer.pre_activation(input);
            let out = pre.iter().map(|&p| layer.activation.apply(p)).collect();
            traces.push(LayerTrace { pre, out });
        }
        traces
    }

    /// `G(z)` together with the vector-Jacobian product `J_G(z)ᵀ · cotangent`.
    pub fn forward_and_vjp(&self, z: &[f64], cotangent: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("latent vector", self.latent_dim(), z.len())?;
        check_len("cotangent", self.output_dim(), cotangent.len())?;
        let traces = self.forward_traced(z);
        let mut delta = cotangent.to_vec();
        for (layer, trace) in self.layers.iter().zip(&traces).rev() {
            let local: Vec<f64> = delta
                .iter()
                .zip(trace.pre.iter().zip(&trace.out))
                .map(|(d, (&p, &o))| d * layer.activation.derivative(p, o))
                .collect();
            let mut back = vec![0.0; layer.in_dim];
            for (row, l) in layer.weights.chunks_exact(layer.in_dim).zip(&local) {
                if *l == 0.0 {
                    continue;
                }
                for (b, w) in back.iter_mut().zip(row) {
                    *b += w * l;
                }
            }
            delta = back;
        }
        let output = traces.into_iter().last().map(|t| t.out).unwrap_or_default();
        Ok((output, delta))
    }

    pub fn vjp(&self, z: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_and_vjp(z, cotangent)?.1)
    }
}
