//! A single LSTM cell. Both policies run it step by step over variable-length
//! sequences, so there is no batched sequence API.

use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tape::{Tape, ValueId};
use crate::nn::tensor::Tensor;
use crate::rng::RandomStream;
use crate::Result;

#[derive(Debug, Clone)]
pub struct RecurrentCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    // One (W_x, W_h, b) triple per gate: input, forget, cell, output.
    gates: [(ParamId, ParamId, ParamId); 4],
}

/// Hidden and cell state as tape nodes.
#[derive(Debug, Clone, Copy)]
pub struct LstmState {
    pub h: ValueId,
    pub c: ValueId,
}

impl RecurrentCell {
    pub fn init(
        ps: &mut ParamSet,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut RandomStream,
    ) -> Self {
        let gate = |label: &str, ps: &mut ParamSet, rng: &mut RandomStream| {
            (
                ps.add_weight(&format!("{name}.{label}.wx"), hidden_dim, input_dim, rng),
                ps.add_weight(&format!("{name}.{label}.wh"), hidden_dim, hidden_dim, rng),
                ps.add_bias(&format!("{name}.{label}.b"), hidden_dim),
            )
        };
        let gates = [
            gate("i", ps, rng),
            gate("f", ps, rng),
            gate("g", ps, rng),
            gate("o", ps, rng),
        ];
        Self { input_dim, hidden_dim, gates }
    }

    /// Zero initial state, materialized on the tape.
    pub fn zero_state(&self, tape: &mut Tape) -> LstmState {
        let h = tape.constant(Tensor::zeros(&[self.hidden_dim]));
        let c = tape.constant(Tensor::zeros(&[self.hidden_dim]));
        LstmState { h, c }
    }

    pub fn step(
        &self,
        tape: &mut Tape,
        ps: &ParamSet,
        x: ValueId,
        state: LstmState,
    ) -> Result<LstmState> {
        let pre = |tape: &mut Tape, idx: usize| -> Result<ValueId> {
            let (wx, wh, b) = self.gates[idx];
            let wxv = tape.param(ps, wx);
            let whv = tape.param(ps, wh);
            let bv = tape.param(ps, b);
            let a = tape.matvec(wxv, x)?;
            let u = tape.matvec(whv, state.h)?;
            let s = tape.add(a, u)?;
            tape.add(s, bv)
        };
        let zi = pre(tape, 0)?;
        let zf = pre(tape, 1)?;
        let zg = pre(tape, 2)?;
        let zo = pre(tape, 3)?;

        let i = tape.sigmoid(zi);
        let f = tape.sigmoid(zf);
        let g = tape.tanh(zg);
        let o = tape.sigmoid(zo);

        let fc = tape.mul(f, state.c)?;
        let ig = tape.mul(i, g)?;
        let c = tape.add(fc, ig)?;
        let tc = tape.tanh(c);
        let h = tape.mul(o, tc)?;
        Ok(LstmState { h, c })
    }

    pub fn param_count(&self) -> usize {
        4 * (self.hidden_dim * self.input_dim + self.hidden_dim * self.hidden_dim + self.hidden_dim)
    }
}
