//! Constituent-code classification of the frozen pattern and the
//! closed-form `R` updates at repetition and single-parity-check roots.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::code::PolarCode;
use crate::error::{Error, Result};
use crate::graph::{saturate, Llr, SAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// All leaves frozen.
    N0,
    /// No leaf frozen.
    N1,
    /// Only the last leaf carries information.
    Rep,
    /// Only the first leaf is frozen.
    Spc,
    Plain,
}

impl Kind {
    pub const SPECIAL: [Kind; 4] = [Kind::N0, Kind::N1, Kind::Rep, Kind::Spc];

    pub fn label(self) -> &'static str {
        match self {
            Kind::N0 => "N0",
            Kind::N1 => "N1",
            Kind::Rep => "REP",
            Kind::Spc => "SPC",
            Kind::Plain => "PLAIN",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A subtree of the encoding graph covering `size` consecutive leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstituentNode {
    pub kind: Kind,
    pub leaf_start: usize,
    pub size: usize,
}

impl ConstituentNode {
    /// Graph column of the subtree root, `log2(size)`.
    pub fn column(&self) -> usize {
        self.size.trailing_zeros() as usize
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.leaf_start..self.leaf_start + self.size
    }
}

/// The pruned decoding tree of a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstituentTree {
    /// Maximal constituent nodes and single PLAIN leaves, tiling `0..n` in order.
    pub nodes: Vec<ConstituentNode>,
    /// PLAIN internal nodes (size >= 2) in pre-order.
    pub interior: Vec<ConstituentNode>,
}

impl ConstituentTree {
    /// Counts of the special kinds keyed by `(kind, size)`.
    pub fn census(&self) -> BTreeMap<(Kind, usize), usize> {
        let mut census = BTreeMap::new();
        for node in self.nodes.iter().filter(|nd| nd.kind != Kind::Plain) {
            *census.entry((node.kind, node.size)).or_insert(0) += 1;
        }
        census
    }

    /// Total count of `kind` over sizes of at least `min_size`.
    pub fn total(&self, kind: Kind, min_size: usize) -> usize {
        self.nodes
            .iter()
            .filter(|nd| nd.kind == kind && nd.size >= min_size)
            .count()
    }

    /// The census as `kind,size,count` CSV; kinds in N0, N1, REP, SPC order,
    /// sizes ascending, zero counts omitted.
    pub fn census_csv(&self) -> String {
        let mut out = String::from("kind,size,count\n");
        for ((kind, size), count) in self.census() {
            let _ = writeln!(out, "{kind},{size},{count}");
        }
        out
    }
}

/// Kind of the leaf range `start..start + size`, or `Plain` if none applies.
pub fn kind_of(frozen: &[bool], start: usize, size: usize) -> Kind {
    let leaves = &frozen[start..start + size];
    if size < 2 {
        return Kind::Plain;
    }
    let (first, rest) = leaves.split_first().unwrap();
    let (last, init) = leaves.split_last().unwrap();
    if leaves.iter().all(|&f| f) {
        Kind::N0
    } else if leaves.iter().all(|&f| !f) {
        Kind::N1
    } else if !last && init.iter().all(|&f| f) {
        Kind::Rep
    } else if *first && rest.iter().all(|&f| !f) {
        Kind::Spc
    } else {
        Kind::Plain
    }
}

/// Splits the leaf range top-down, stopping at the first node that matches a
/// special kind (tested in N0, N1, REP, SPC order).
pub fn classify(code: &PolarCode) -> ConstituentTree {
    let mut tree = ConstituentTree {
        nodes: Vec::new(),
        interior: Vec::new(),
    };
    descend(code.frozen(), 0, code.n(), &mut tree);
    tree
}

fn descend(frozen: &[bool], start: usize, size: usize, tree: &mut ConstituentTree) {
    let kind = kind_of(frozen, start, size);
    let node = ConstituentNode {
        kind,
        leaf_start: start,
        size,
    };
    if kind != Kind::Plain || size == 1 {
        tree.nodes.push(node);
        return;
    }
    tree.interior.push(node);
    let half = size / 2;
    descend(frozen, start, half, tree);
    descend(frozen, start + half, half, tree);
}

/// Repetition-node update: `R_i = sum_{k != i} L_k`.
pub fn rep_update(l: &[Llr]) -> Result<Vec<Llr>> {
    if l.len() < 2 {
        return Err(Error::TooShort(l.len()));
    }
    let mut out = vec![0.0; l.len()];
    rep_into(l, &mut out);
    Ok(out)
}

/// Single-parity-check update: `R_i = prod_{k != i} sgn(L_k) * min_{k != i} |L_k|`.
pub fn spc_update(l: &[Llr]) -> Result<Vec<Llr>> {
    if l.len() < 2 {
        return Err(Error::TooShort(l.len()));
    }
    let mut out = vec![0.0; l.len()];
    spc_into(l, &mut out);
    Ok(out)
}

/// Total-minus-self sum. Saturated inputs are tallied as infinities so that
/// removing a saturated self term does not wipe out its finite partners.
pub(crate) fn rep_into(l: &[Llr], out: &mut [Llr]) {
    let mut finite = 0.0;
    let (mut pos, mut neg) = (0usize, 0usize);
    for &x in l {
        if x >= SAT {
            pos += 1;
        } else if x <= -SAT {
            neg += 1;
        } else {
            finite += x;
        }
    }
    for (r, &x) in out.iter_mut().zip(l) {
        let (mut p, mut q, mut f) = (pos, neg, finite);
        if x >= SAT {
            p -= 1;
        } else if x <= -SAT {
            q -= 1;
        } else {
            f -= x;
        }
        *r = match p.cmp(&q) {
            std::cmp::Ordering::Greater => SAT,
            std::cmp::Ordering::Less => -SAT,
            std::cmp::Ordering::Equal => saturate(f),
        };
    }
}

/// Sign product plus the two smallest magnitudes.
pub(crate) fn spc_into(l: &[Llr], out: &mut [Llr]) {
    let mut negative = false;
    let (mut min1, mut min2, mut argmin) = (f64::INFINITY, f64::INFINITY, 0);
    for (i, &x) in l.iter().enumerate() {
        negative ^= x < 0.0;
        let a = x.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            argmin = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (i, (r, &x)) in out.iter_mut().zip(l).enumerate() {
        let mag = if i == argmin { min2 } else { min1 }.min(SAT);
        *r = if negative != (x < 0.0) { -mag } else { mag };
    }
}
