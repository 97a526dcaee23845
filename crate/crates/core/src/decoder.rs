//! Belief-propagation decoders: conventional schedule, round-trip schedule,
//! and the pruned round-trip decoder that stops at constituent-code roots.
//!
//! Cost accounting counts one unit per directed message written through a
//! plain PE, so one unpruned iteration costs `2 n m` units. A repetition or
//! single-parity-check root of size `l` costs `2l - 1`; N0 and N1 subtrees cost
//! nothing. With `count_scaling` set and a scaled kernel, every kernel
//! evaluation in a plain PE adds one more unit.

use serde::{Deserialize, Serialize};

use crate::code::{ParityCheck, PolarCode};
use crate::constituent::{classify, kind_of, rep_into, spc_into, ConstituentTree, Kind};
use crate::error::{Error, Result};
use crate::graph::{Kernel, Llr, MessageState, SAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// One left-to-right sweep per iteration, both directions at each stage.
    Conventional,
    /// A right-to-left `L` pass followed by a left-to-right `R` pass.
    RoundTrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeOptions {
    pub max_iters: usize,
    pub kernel: Kernel,
    pub schedule: Schedule,
    /// Stop at constituent-code roots; requires the round-trip schedule.
    pub pruning: bool,
    pub early_termination: bool,
    /// Charge one unit per scaling multiply of a scaled kernel.
    pub count_scaling: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            max_iters: 60,
            kernel: Kernel::MinSum,
            schedule: Schedule::RoundTrip,
            pruning: false,
            early_termination: true,
            count_scaling: false,
        }
    }
}

impl DecodeOptions {
    pub fn conventional() -> Self {
        Self {
            schedule: Schedule::Conventional,
            ..Self::default()
        }
    }

    pub fn round_trip() -> Self {
        Self::default()
    }

    pub fn xjbp() -> Self {
        Self {
            pruning: true,
            ..Self::default()
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidOptions("max_iters must be at least 1"));
        }
        if self.pruning && self.schedule != Schedule::RoundTrip {
            return Err(Error::InvalidOptions(
                "pruning requires the round-trip schedule",
            ));
        }
        if let Kernel::ScaledMinSum { alpha } = self.kernel {
            Kernel::scaled(alpha)?;
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        match (self.schedule, self.pruning) {
            (_, true) => Variant::XjBp,
            (Schedule::Conventional, false) => Variant::Conventional,
            (Schedule::RoundTrip, false) => Variant::RoundTrip,
        }
    }
}

/// Decoder family, as far as per-iteration cost is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Conventional,
    RoundTrip,
    XjBp,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Conventional => "conventional",
            Variant::RoundTrip => "round-trip",
            Variant::XjBp => "xjbp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub codeword: Vec<u8>,
    pub info_bits: Vec<u8>,
    /// Iterations executed, including the one in which termination fired.
    pub iterations: usize,
    /// The returned codeword satisfies every parity check.
    pub converged: bool,
    pub op_units: u64,
}

/// `0` where the LLR is strictly positive, `1` otherwise.
pub fn hard_decision(llrs: &[Llr]) -> Vec<u8> {
    llrs.iter().map(|&x| u8::from(x <= 0.0)).collect()
}

/// A PLAIN interior node of the pruned graph: the PEs of one stage over a
/// block of `size` leaves, with flags for which children consume `L`.
#[derive(Debug, Clone, Copy)]
struct PlainBlock {
    start: usize,
    size: usize,
    stage: usize,
    l_top: bool,
    l_bottom: bool,
}

#[derive(Debug, Clone)]
struct PrunedPlan {
    /// Pre-order, so parents precede children.
    blocks: Vec<PlainBlock>,
    rep: Vec<(usize, usize)>,
    spc: Vec<(usize, usize)>,
    n0: Vec<(usize, usize)>,
}

impl PrunedPlan {
    fn new(code: &PolarCode, tree: &ConstituentTree) -> Self {
        let frozen = code.frozen();
        let consumes_l = |start: usize, size: usize| match kind_of(frozen, start, size) {
            Kind::Rep | Kind::Spc => true,
            Kind::Plain => size >= 2,
            Kind::N0 | Kind::N1 => false,
        };
        let blocks = tree
            .interior
            .iter()
            .map(|nd| {
                let half = nd.size / 2;
                PlainBlock {
                    start: nd.leaf_start,
                    size: nd.size,
                    stage: nd.column() - 1,
                    l_top: consumes_l(nd.leaf_start, half),
                    l_bottom: consumes_l(nd.leaf_start + half, half),
                }
            })
            .collect();
        let of_kind = |kind: Kind| {
            tree.nodes
                .iter()
                .filter(|nd| nd.kind == kind)
                .map(|nd| (nd.leaf_start, nd.size))
                .collect::<Vec<_>>()
        };
        Self {
            blocks,
            rep: of_kind(Kind::Rep),
            spc: of_kind(Kind::Spc),
            n0: of_kind(Kind::N0),
        }
    }

    fn units(&self, scale_cost: u64) -> u64 {
        let plain: u64 = self
            .blocks
            .iter()
            .map(|b| {
                let half = (b.size / 2) as u64;
                let l = half * (u64::from(b.l_top) + u64::from(b.l_bottom));
                (l + b.size as u64) * (1 + scale_cost)
            })
            .sum();
        let closed: u64 = self
            .rep
            .iter()
            .chain(&self.spc)
            .map(|&(_, size)| 2 * size as u64 - 1)
            .sum();
        plain + closed
    }
}

/// A decoder bound to one code and one option set. Holds only immutable data
/// and can be shared between threads.
#[derive(Debug, Clone)]
pub struct Decoder {
    code: PolarCode,
    h: ParityCheck,
    tree: ConstituentTree,
    plan: Option<PrunedPlan>,
    opts: DecodeOptions,
}

impl Decoder {
    pub fn new(code: PolarCode, opts: DecodeOptions) -> Result<Self> {
        opts.validate()?;
        let h = code.parity_check();
        let tree = classify(&code);
        let plan = opts.pruning.then(|| PrunedPlan::new(&code, &tree));
        Ok(Self {
            code,
            h,
            tree,
            plan,
            opts,
        })
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    pub fn options(&self) -> &DecodeOptions {
        &self.opts
    }

    pub fn tree(&self) -> &ConstituentTree {
        &self.tree
    }

    fn scale_cost(&self) -> u64 {
        u64::from(self.opts.count_scaling && self.opts.kernel.is_scaled())
    }

    /// Units charged by one iteration.
    pub fn units_per_iteration(&self) -> u64 {
        match &self.plan {
            Some(plan) => plan.units(self.scale_cost()),
            None => 2 * (self.code.n() * self.code.m()) as u64 * (1 + self.scale_cost()),
        }
    }

    /// Initial message lattice; N0 subtrees are pinned when pruning.
    pub fn start(&self, channel: &[Llr]) -> Result<MessageState> {
        let mut state = MessageState::new(&self.code, channel)?;
        if let Some(plan) = &self.plan {
            state.mark_pruned();
            for &(start, size) in &plan.n0 {
                let top = size.trailing_zeros() as usize;
                for col in 0..=top {
                    for i in start..start + size {
                        state.set_r(i, col, SAT);
                    }
                }
            }
        }
        Ok(state)
    }

    /// Runs one iteration and returns the units it cost.
    pub fn iterate(&self, state: &mut MessageState) -> u64 {
        let kernel = self.opts.kernel;
        let (n, m) = (self.code.n(), self.code.m());
        match (&self.plan, self.opts.schedule) {
            (Some(plan), _) => self.iterate_pruned(plan, state),
            (None, Schedule::Conventional) => {
                for stage in 0..m {
                    for i in top_nodes(n, stage) {
                        state.left_top(stage, i, kernel);
                        state.left_bottom(stage, i, kernel);
                        state.right_pair(stage, i, kernel);
                    }
                }
                self.units_per_iteration()
            }
            (None, Schedule::RoundTrip) => {
                for stage in (0..m).rev() {
                    for i in top_nodes(n, stage) {
                        state.left_top(stage, i, kernel);
                        state.left_bottom(stage, i, kernel);
                    }
                }
                for stage in 0..m {
                    for i in top_nodes(n, stage) {
                        state.right_pair(stage, i, kernel);
                    }
                }
                self.units_per_iteration()
            }
        }
    }

    fn iterate_pruned(&self, plan: &PrunedPlan, state: &mut MessageState) -> u64 {
        let kernel = self.opts.kernel;
        let per_message = 1 + self.scale_cost();
        let mut units = 0;
        for b in &plan.blocks {
            let half = b.size / 2;
            for i in b.start..b.start + half {
                if b.l_top {
                    state.left_top(b.stage, i, kernel);
                }
                if b.l_bottom {
                    state.left_bottom(b.stage, i, kernel);
                }
            }
            units += half as u64 * (u64::from(b.l_top) + u64::from(b.l_bottom)) * per_message;
        }
        let mut buf_in = Vec::new();
        let mut buf_out = Vec::new();
        let closed = plan
            .rep
            .iter()
            .map(|&nd| (nd, rep_into as fn(&[Llr], &mut [Llr])))
            .chain(
                plan.spc
                    .iter()
                    .map(|&nd| (nd, spc_into as fn(&[Llr], &mut [Llr]))),
            );
        for ((start, size), update) in closed {
            let col = size.trailing_zeros() as usize;
            buf_in.clear();
            buf_in.extend_from_slice(&state.l_column(col)[start..start + size]);
            buf_out.resize(size, 0.0);
            update(&buf_in, &mut buf_out);
            for (i, &v) in (start..start + size).zip(&buf_out) {
                state.set_r(i, col, v);
            }
            units += 2 * size as u64 - 1;
        }
        for b in plan.blocks.iter().rev() {
            for i in b.start..b.start + b.size / 2 {
                state.right_pair(b.stage, i, kernel);
            }
            units += b.size as u64 * per_message;
        }
        units
    }

    /// Decodes one frame of channel LLRs.
    pub fn decode(&self, channel: &[Llr]) -> Result<DecodeResult> {
        self.decode_with_state(channel).map(|(res, _)| res)
    }

    /// Decodes and also returns the final message lattice.
    pub fn decode_with_state(&self, channel: &[Llr]) -> Result<(DecodeResult, MessageState)> {
        let mut state = self.start(channel)?;
        let mut op_units = 0;
        let mut iterations = 0;
        let mut codeword = Vec::new();
        let mut converged = false;
        while iterations < self.opts.max_iters {
            op_units += self.iterate(&mut state);
            iterations += 1;
            codeword = hard_decision(&state.posterior_codeword_llr());
            converged = self.h.check(&codeword)?;
            if converged && self.opts.early_termination {
                break;
            }
        }
        let info_bits = self.code.recover_message(&codeword)?;
        Ok((
            DecodeResult {
                codeword,
                info_bits,
                iterations,
                converged,
                op_units,
            },
            state,
        ))
    }
}

fn top_nodes(n: usize, stage: usize) -> impl Iterator<Item = usize> {
    let o = 1usize << stage;
    (0..n).step_by(2 * o).flat_map(move |base| base..base + o)
}

fn decode_as(
    code: &PolarCode,
    channel: &[Llr],
    opts: DecodeOptions,
    want: Variant,
) -> Result<DecodeResult> {
    if opts.variant() != want {
        return Err(Error::InvalidOptions("options do not select this decoder"));
    }
    Decoder::new(code.clone(), opts)?.decode(channel)
}

pub fn decode_conventional(
    code: &PolarCode,
    channel: &[Llr],
    opts: DecodeOptions,
) -> Result<DecodeResult> {
    decode_as(code, channel, opts, Variant::Conventional)
}

pub fn decode_roundtrip(
    code: &PolarCode,
    channel: &[Llr],
    opts: DecodeOptions,
) -> Result<DecodeResult> {
    decode_as(code, channel, opts, Variant::RoundTrip)
}

pub fn decode_xjbp(code: &PolarCode, channel: &[Llr], opts: DecodeOptions) -> Result<DecodeResult> {
    decode_as(code, channel, opts, Variant::XjBp)
}

/// Units charged per iteration by `variant` on `code`, min-sum kernel.
pub fn count_units_per_iteration(code: &PolarCode, variant: Variant) -> u64 {
    match variant {
        Variant::Conventional | Variant::RoundTrip => 2 * (code.n() * code.m()) as u64,
        Variant::XjBp => PrunedPlan::new(code, &classify(code)).units(0),
    }
}
