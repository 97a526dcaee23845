//! BPSK over AWGN and the Monte Carlo campaign runner.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::PolarCode;
use crate::decoder::{DecodeOptions, Decoder};
use crate::error::{Error, Result};
use crate::graph::{Kernel, Llr};

/// Frames decoded in parallel between stopping-rule checks.
const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebno_db: f64,
    pub rate: f64,
    pub sigma2: f64,
}

impl ChannelParams {
    /// Unit-energy BPSK, `Eb/N0` per information bit.
    pub fn new(ebno_db: f64, rate: f64) -> Self {
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0));
        Self {
            ebno_db,
            rate,
            sigma2,
        }
    }
}

/// BPSK-modulates `x`, adds Gaussian noise and returns channel LLRs `2y/σ²`.
pub fn transmit(x: &[u8], params: &ChannelParams, seed: u64) -> Vec<Llr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    transmit_with(x, params, &mut rng)
}

fn transmit_with(x: &[u8], params: &ChannelParams, rng: &mut impl Rng) -> Vec<Llr> {
    let sigma = params.sigma2.sqrt();
    x.iter()
        .map(|&b| {
            let noise: f64 = rng.sample(StandardNormal);
            let y = (1.0 - 2.0 * f64::from(b)) + sigma * noise;
            2.0 * y / params.sigma2
        })
        .collect()
}

/// A named decoder configuration taking part in a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVariant {
    pub name: String,
    pub options: DecodeOptions,
}

impl NamedVariant {
    /// Parses `conv-ms`, `conv-sms`, `rt-ms`, `rt-sms`, `xj-ms` or `xj-sms`.
    pub fn parse(name: &str, alpha: f64, max_iters: usize) -> Result<Self> {
        let (sched, kern) = name
            .split_once('-')
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant {name:?}")))?;
        let base = match sched {
            "conv" => DecodeOptions::conventional(),
            "rt" => DecodeOptions::round_trip(),
            "xj" => DecodeOptions::xjbp(),
            _ => return Err(Error::InvalidConfig(format!("unknown variant {name:?}"))),
        };
        let kernel = match kern {
            "ms" => Kernel::MinSum,
            "sms" => Kernel::scaled(alpha)?,
            _ => return Err(Error::InvalidConfig(format!("unknown variant {name:?}"))),
        };
        let options = base.with_kernel(kernel).with_max_iters(max_iters);
        options.validate()?;
        Ok(Self {
            name: name.to_string(),
            options,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_frames: u64,
    pub min_frame_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_frames: 10_000,
            min_frame_errors: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub variants: Vec<NamedVariant>,
    pub ebno_db: Vec<f64>,
    pub stop: StopRule,
    pub base_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Aggregates for one `(variant, Eb/N0)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub variant: String,
    pub ebno_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iters: f64,
    pub mean_op_units: f64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
}

pub const CSV_HEADER: &str =
    "variant,ebno_db,frames,bit_errors,frame_errors,ber,fer,mean_iters,mean_op_units";

impl StatsReport {
    pub fn row(&self, variant: &str, ebno_db: f64) -> Option<&StatsRow> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.ebno_db == ebno_db)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.variant,
                r.ebno_db,
                r.frames,
                r.bit_errors,
                r.frame_errors,
                r.ber,
                r.fer,
                r.mean_iters,
                r.mean_op_units
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Per-frame seed from the campaign seed, variant name, Eb/N0 and frame index.
pub fn frame_seed(base_seed: u64, variant: &str, ebno_db: f64, frame: u64) -> u64 {
    let name_hash = variant.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    });
    [name_hash, ebno_db.to_bits(), frame]
        .into_iter()
        .fold(splitmix64(base_seed), |acc, v| splitmix64(acc ^ v))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameOutcome {
    bit_errors: u64,
    frame_error: bool,
    iterations: u64,
    op_units: u64,
}

fn run_frame(dec: &Decoder, params: &ChannelParams, seed: u64) -> FrameOutcome {
    let code = dec.code();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    let x = code
        .encode(&code.embed(&info).expect("k info bits"))
        .expect("frozen bits are zero");
    let llr = transmit_with(&x, params, &mut rng);
    let res = dec.decode(&llr).expect("valid frame");
    FrameOutcome {
        bit_errors: res
            .info_bits
            .iter()
            .zip(&info)
            .filter(|(a, b)| a != b)
            .count() as u64,
        frame_error: res.codeword != x,
        iterations: res.iterations as u64,
        op_units: res.op_units,
    }
}

fn run_point(dec: &Decoder, name: &str, ebno_db: f64, cfg: &CampaignConfig) -> StatsRow {
    let started = Instant::now();
    let code = dec.code();
    let params = ChannelParams::new(ebno_db, code.rate());
    let (mut frames, mut bit_errors, mut frame_errors, mut iters, mut units) = (0u64, 0, 0, 0, 0);
    'outer: while frames < cfg.stop.max_frames {
        let batch = (cfg.stop.max_frames - frames).min(BATCH as u64);
        let outcomes: Vec<FrameOutcome> = (frames..frames + batch)
            .into_par_iter()
            .map(|f| run_frame(dec, &params, frame_seed(cfg.base_seed, name, ebno_db, f)))
            .collect();
        for o in outcomes {
            frames += 1;
            bit_errors += o.bit_errors;
            frame_errors += u64::from(o.frame_error);
            iters += o.iterations;
            units += o.op_units;
            if frame_errors >= cfg.stop.min_frame_errors {
                break 'outer;
            }
        }
    }
    let f = frames as f64;
    StatsRow {
        variant: name.to_string(),
        ebno_db,
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / (f * code.k() as f64),
        fer: frame_errors as f64 / f,
        mean_iters: iters as f64 / f,
        mean_op_units: units as f64 / f,
        wall_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Runs every variant at every Eb/N0 (ascending). Results depend only on the
/// configuration, not on the thread count.
pub fn run_campaign(code: &PolarCode, cfg: &CampaignConfig) -> Result<StatsReport> {
    if cfg.variants.is_empty() || cfg.ebno_db.is_empty() {
        return Err(Error::InvalidConfig(
            "need at least one variant and one Eb/N0".into(),
        ));
    }
    if cfg.stop.max_frames == 0 {
        return Err(Error::InvalidConfig("max_frames must be at least 1".into()));
    }
    if let Some(bad) = cfg.ebno_db.iter().find(|e| !e.is_finite()) {
        return Err(Error::InvalidConfig(format!("Eb/N0 {bad} is not finite")));
    }
    let mut ebnos = cfg.ebno_db.clone();
    ebnos.sort_by(f64::total_cmp);
    let decoders = cfg
        .variants
        .iter()
        .map(|v| Decoder::new(code.clone(), v.options))
        .collect::<Result<Vec<_>>>()?;
    let run = || {
        let mut rows = Vec::new();
        for (v, dec) in cfg.variants.iter().zip(&decoders) {
            for &e in &ebnos {
                rows.push(run_point(dec, &v.name, e, cfg));
            }
        }
        StatsReport { rows }
    };
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}
