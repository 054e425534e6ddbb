//! Dense layers and the two-layer stacks both policies are built from.

use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tape::{Tape, ValueId};
use crate::rng::RandomStream;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
    Relu,
}

#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weight: ParamId,
    pub bias: ParamId,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl DenseLayer {
    pub fn init(
        ps: &mut ParamSet,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut RandomStream,
    ) -> Self {
        let weight = ps.add_weight(&format!("{name}.w"), out_dim, in_dim, rng);
        let bias = ps.add_bias(&format!("{name}.b"), out_dim);
        Self { weight, bias, activation, in_dim, out_dim }
    }

    pub fn forward(&self, tape: &mut Tape, ps: &ParamSet, x: ValueId) -> Result<ValueId> {
        let w = tape.param(ps, self.weight);
        let b = tape.param(ps, self.bias);
        let wx = tape.matvec(w, x)?;
        let z = tape.add(wx, b)?;
        Ok(match self.activation {
            Activation::Tanh => tape.tanh(z),
            Activation::Identity => z,
            Activation::Relu => tape.relu(z),
        })
    }
}

/// Two dense layers: tanh on the first, the given activation on the second.
/// Heads use `Identity` to emit raw logits; trunk blocks keep `Identity` too
/// so outputs stay unsquashed into the recurrent core.
#[derive(Debug, Clone)]
pub struct DenseStack {
    pub first: DenseLayer,
    pub second: DenseLayer,
}

impl DenseStack {
    pub fn init(
        ps: &mut ParamSet,
        name: &str,
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        final_activation: Activation,
        rng: &mut RandomStream,
    ) -> Self {
        let first = DenseLayer::init(ps, &format!("{name}.0"), in_dim, hidden, Activation::Tanh, rng);
        let second = DenseLayer::init(ps, &format!("{name}.1"), hidden, out_dim, final_activation, rng);
        Self { first, second }
    }

    pub fn forward(&self, tape: &mut Tape, ps: &ParamSet, x: ValueId) -> Result<ValueId> {
        let h = self.first.forward(tape, ps, x)?;
        self.second.forward(tape, ps, h)
    }

    pub fn in_dim(&self) -> usize {
        self.first.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.second.out_dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tensor::Tensor;

    #[test]
    fn tanh_layer_output_is_bounded() {
        let mut rng = RandomStream::from_seed(5);
        let mut ps = ParamSet::new();
        let layer = DenseLayer::init(&mut ps, "l", 5, 3, Activation::Tanh, &mut rng);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![0.3, -2.0, 1.5, 0.0, 4.0]));
        let y = layer.forward(&mut tape, &ps, x).unwrap();
        assert_eq!(tape.value(y).len(), 3);
        for v in &tape.value(y).data {
            assert!(v.abs() < 1.0);
        }
    }

    #[test]
    fn stack_dims() {
        let mut rng = RandomStream::from_seed(5);
        let mut ps = ParamSet::new();
        let stack = DenseStack::init(&mut ps, "s", 7, 10, 4, Activation::Identity, &mut rng);
        assert_eq!(stack.in_dim(), 7);
        assert_eq!(stack.out_dim(), 4);
        // (7*10 + 10) + (10*4 + 4)
        assert_eq!(ps.total_params(), 80 + 44);
    }
}
