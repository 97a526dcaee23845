//! The BP message lattice of a polar code.
//!
//! The graph has `m + 1` columns of `n` nodes. Column 0 holds the message
//! (leaf) nodes and column `m` the codeword nodes. Processing element (PE)
//! stage `s` sits between columns `s` and `s + 1` and pairs node `i` with
//! node `i + 2^s` for every `i` whose bit `s` is clear.
//!
//! `L` messages travel from the channel towards the leaves, `R` messages from
//! the leaves towards the channel. All messages are LLRs, positive favouring
//! bit 0, saturated at [`SAT`].

use serde::{Deserialize, Serialize};

use crate::code::{expect_len, PolarCode};
use crate::error::{Error, Result};

/// Finite stand-in for an infinitely reliable LLR.
pub const SAT: f64 = 1e30;

pub type Llr = f64;

#[inline]
pub fn saturate(x: Llr) -> Llr {
    x.clamp(-SAT, SAT)
}

#[inline]
pub fn sat_add(a: Llr, b: Llr) -> Llr {
    saturate(a + b)
}

/// Min-sum box-plus: `sign(x) sign(y) min(|x|, |y|)`, with `sign(0) = +1`.
#[inline]
pub fn g_minsum(x: Llr, y: Llr) -> Llr {
    let mag = x.abs().min(y.abs()).min(SAT);
    if (x < 0.0) != (y < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Scaled min-sum: `alpha * g_minsum(x, y)`.
pub fn g_scaled(x: Llr, y: Llr, alpha: f64) -> Result<Llr> {
    let kernel = Kernel::scaled(alpha)?;
    Ok(kernel.apply(x, y))
}

/// Check-node approximation used inside the processing elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Kernel {
    MinSum,
    ScaledMinSum { alpha: f64 },
}

impl Kernel {
    /// Conventional hardware-friendly scale, 15/16.
    pub const DEFAULT_ALPHA: f64 = 0.9375;

    pub fn scaled(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidScale(alpha));
        }
        Ok(Kernel::ScaledMinSum { alpha })
    }

    #[inline]
    pub fn apply(self, x: Llr, y: Llr) -> Llr {
        match self {
            Kernel::MinSum => g_minsum(x, y),
            Kernel::ScaledMinSum { alpha } => alpha * g_minsum(x, y),
        }
    }

    pub fn is_scaled(self) -> bool {
        matches!(self, Kernel::ScaledMinSum { .. })
    }
}

/// One processing element: a stage and the top node of its butterfly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeIndex {
    stage: usize,
    top: usize,
}

impl PeIndex {
    /// Panics unless bit `stage` of `top` is clear.
    pub fn new(stage: usize, top: usize) -> Self {
        assert_eq!(
            top >> stage & 1,
            0,
            "node {top} is not a top node of stage {stage}"
        );
        Self { stage, top }
    }

    pub fn stage(self) -> usize {
        self.stage
    }

    pub fn top(self) -> usize {
        self.top
    }

    pub fn offset(self) -> usize {
        1 << self.stage
    }

    pub fn bottom(self) -> usize {
        self.top + self.offset()
    }
}

/// All `n / 2` PEs of a stage, in increasing top index.
pub fn stage_pes(n: usize, stage: usize) -> impl Iterator<Item = PeIndex> {
    (0..n)
        .filter(move |i| i >> stage & 1 == 0)
        .map(move |i| PeIndex { stage, top: i })
}

/// The `L`/`R` lattice for one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    n: usize,
    m: usize,
    l: Vec<Llr>,
    r: Vec<Llr>,
    pruned: bool,
}

impl MessageState {
    /// Channel LLRs into the codeword column, `+SAT` at frozen leaves, zero
    /// everywhere else.
    pub fn new(code: &PolarCode, channel: &[Llr]) -> Result<Self> {
        let n = code.n();
        expect_len(n, channel.len())?;
        if let Some(i) = channel.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteLlr(i));
        }
        let m = code.m();
        let mut l = vec![0.0; (m + 1) * n];
        let mut r = vec![0.0; (m + 1) * n];
        for (dst, &y) in l[m * n..].iter_mut().zip(channel) {
            *dst = saturate(y);
        }
        for (dst, &fr) in r[..n].iter_mut().zip(code.frozen()) {
            if fr {
                *dst = SAT;
            }
        }
        Ok(Self {
            n,
            m,
            l,
            r,
            pruned: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn l(&self, i: usize, col: usize) -> Llr {
        self.l[col * self.n + i]
    }

    #[inline]
    pub fn r(&self, i: usize, col: usize) -> Llr {
        self.r[col * self.n + i]
    }

    pub fn set_l(&mut self, i: usize, col: usize, v: Llr) {
        self.l[col * self.n + i] = v;
    }

    pub fn set_r(&mut self, i: usize, col: usize, v: Llr) {
        self.r[col * self.n + i] = v;
    }

    pub fn l_column(&self, col: usize) -> &[Llr] {
        &self.l[col * self.n..(col + 1) * self.n]
    }

    pub fn r_column(&self, col: usize) -> &[Llr] {
        &self.r[col * self.n..(col + 1) * self.n]
    }

    pub(crate) fn mark_pruned(&mut self) {
        self.pruned = true;
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    /// `LLR(x̂_i) = R[i, m] + L[i, m]`.
    pub fn posterior_codeword_llr(&self) -> Vec<Llr> {
        self.r_column(self.m)
            .iter()
            .zip(self.l_column(self.m))
            .map(|(&r, &l)| sat_add(r, l))
            .collect()
    }

    /// `LLR(û_i) = L[i, 0]`; not available for pruned decodes.
    pub fn posterior_message_llr(&self) -> Result<Vec<Llr>> {
        if self.pruned {
            return Err(Error::Unsupported);
        }
        Ok(self.l_column(0).to_vec())
    }

    /// Top-node `L` output of a PE.
    #[inline]
    pub(crate) fn left_top(&mut self, stage: usize, i: usize, kernel: Kernel) {
        let (n, o) = (self.n, 1 << stage);
        let (cur, next) = (stage * n, (stage + 1) * n);
        let v = kernel.apply(
            self.l[next + i],
            sat_add(self.l[next + i + o], self.r[cur + i + o]),
        );
        self.l[cur + i] = v;
    }

    /// Bottom-node `L` output of a PE.
    #[inline]
    pub(crate) fn left_bottom(&mut self, stage: usize, i: usize, kernel: Kernel) {
        let (n, o) = (self.n, 1 << stage);
        let (cur, next) = (stage * n, (stage + 1) * n);
        let v = sat_add(
            kernel.apply(self.r[cur + i], self.l[next + i]),
            self.l[next + i + o],
        );
        self.l[cur + i + o] = v;
    }

    /// Both `R` outputs of a PE.
    #[inline]
    pub(crate) fn right_pair(&mut self, stage: usize, i: usize, kernel: Kernel) {
        let (n, o) = (self.n, 1 << stage);
        let (cur, next) = (stage * n, (stage + 1) * n);
        let r_top = self.r[cur + i];
        let r_bot = self.r[cur + i + o];
        self.r[next + i] = kernel.apply(r_top, sat_add(self.l[next + i + o], r_bot));
        self.r[next + i + o] = sat_add(kernel.apply(r_top, self.l[next + i]), r_bot);
    }
}

/// Writes `L[i, s]` and `L[i + o, s]` of one PE from the column `s + 1`
/// messages and the column `s` `R` messages.
pub fn update_left(pe: PeIndex, state: &mut MessageState, kernel: Kernel) {
    state.left_top(pe.stage, pe.top, kernel);
    state.left_bottom(pe.stage, pe.top, kernel);
}

/// Writes `R[i, s + 1]` and `R[i + o, s + 1]` of one PE.
pub fn update_right(pe: PeIndex, state: &mut MessageState, kernel: Kernel) {
    state.right_pair(pe.stage, pe.top, kernel);
}

pub fn init_messages(code: &PolarCode, channel: &[Llr]) -> Result<MessageState> {
    MessageState::new(code, channel)
}
