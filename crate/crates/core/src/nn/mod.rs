//! Minimal f64 neural-network stack: tensors, a Wengert-tape autodiff engine,
//! dense/LSTM building blocks, categorical heads, actor-critic losses, and
//! SGD/adaptive optimizers. No BLAS, no threads; determinism over speed.

pub mod gradcheck;
pub mod layers;
pub mod losses;
pub mod lstm;
pub mod optim;
pub mod params;
pub mod tape;
pub mod tensor;

pub use layers::{Activation, DenseLayer, DenseStack};
pub use losses::{
    a2c_loss_on_tape, a2c_losses, argmax, discounted_returns, force_categorical_on_tape,
    sample_categorical, sample_categorical_on_tape, CategoricalDraw,
};
pub use lstm::{LstmState, RecurrentCell};
pub use optim::{OptimKind, Optimizer};
pub use params::{ParamId, ParamSet};
pub use tape::{log_softmax_values, Tape, ValueId};
pub use tensor::Tensor;
