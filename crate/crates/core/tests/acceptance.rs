//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs the full Monte Carlo campaigns, so expect several minutes in release
//! mode. Exits nonzero on failure only when `POLARBP_ACCEPTANCE_STRICT` is set,
//! so that `cargo test --workspace` still runs the remaining targets.

use std::time::Instant;

use polarbp::code::transform_in_place;
use polarbp::{
    classify, count_units_per_iteration, hard_decision, rep_update, run_campaign, spc_update,
    transmit, CampaignConfig, ChannelParams, DecodeOptions, Decoder, Kind, Llr, NamedVariant,
    PolarCode, StatsReport, StopRule, Variant, DEFAULT_ERASURE, SAT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Tally {
    failed: Vec<u32>,
}

impl Tally {
    fn report(&mut self, id: u32, pass: bool, started: Instant, detail: impl AsRef<str>) {
        if !pass {
            self.failed.push(id);
        }
        println!(
            "criterion {id:>2}: {} ({:.1}s) {}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            detail.as_ref()
        );
    }
}

fn code(n: usize, k: usize) -> PolarCode {
    PolarCode::construct(n, k, DEFAULT_ERASURE).unwrap()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn variants(names: &[&str]) -> Vec<NamedVariant> {
    names
        .iter()
        .map(|s| NamedVariant::parse(s, 0.9375, 60).unwrap())
        .collect()
}

fn campaign(code: &PolarCode, names: &[&str], ebno: &[f64], stop: StopRule) -> StatsReport {
    let cfg = CampaignConfig {
        variants: variants(names),
        ebno_db: ebno.to_vec(),
        stop,
        base_seed: 0,
        threads: None,
    };
    run_campaign(code, &cfg).unwrap()
}

/// Wilson score interval at 95%.
fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    (centre - half, centre + half)
}

const SIZES: [usize; 5] = [128, 256, 512, 1024, 2048];

fn criterion_1(t: &mut Tally) {
    let start = Instant::now();
    let want = [1792u64, 4096, 9216, 20480, 45056];
    let got: Vec<u64> = SIZES
        .iter()
        .map(|&n| count_units_per_iteration(&code(n, n / 2), Variant::Conventional))
        .collect();
    t.report(
        1,
        got == want,
        start,
        format!("conventional units {got:?}, expected {want:?}"),
    );
}

fn criterion_2(t: &mut Tally) {
    let start = Instant::now();
    let want = [1040.0, 2488.0, 5536.0, 12160.0, 27304.0];
    let got: Vec<u64> = SIZES
        .iter()
        .map(|&n| count_units_per_iteration(&code(n, n / 2), Variant::XjBp))
        .collect();
    let counts_ok = got
        .iter()
        .zip(want)
        .all(|(&g, w)| within(g as f64, w, 0.10));
    let c = code(1024, 512);
    let ratio = 100.0 * count_units_per_iteration(&c, Variant::XjBp) as f64
        / count_units_per_iteration(&c, Variant::Conventional) as f64;
    let ratio_ok = (ratio - 59.4).abs() <= 5.0;
    t.report(
        2,
        counts_ok && ratio_ok,
        start,
        format!("xjbp units {got:?} vs {want:?} (+-10%), n=1024 ratio {ratio:.1}% vs 59.4 +- 5"),
    );
}

fn criterion_3(t: &mut Tally) {
    let start = Instant::now();
    let ks = [512, 682, 768, 853, 896];
    let want = [12160.0, 11488.0, 10680.0, 9376.0, 8936.0];
    let got: Vec<u64> = ks
        .iter()
        .map(|&k| count_units_per_iteration(&code(1024, k), Variant::XjBp))
        .collect();
    let decreasing = got.windows(2).all(|w| w[1] < w[0]);
    let close = got
        .iter()
        .zip(want)
        .all(|(&g, w)| within(g as f64, w, 0.10));
    t.report(
        3,
        decreasing && close,
        start,
        format!("k={ks:?}: {got:?} vs {want:?} (+-10%, strictly decreasing: {decreasing})"),
    );
}

fn criterion_4(t: &mut Tally) {
    let start = Instant::now();
    let tree = classify(&code(1024, 512));
    let kinds = [Kind::N0, Kind::N1, Kind::Rep, Kind::Spc];
    let want = [11.0, 9.0, 31.0, 25.0];
    let got: Vec<usize> = kinds.iter().map(|&k| tree.total(k, 4)).collect();
    let pass = got
        .iter()
        .zip(want)
        .all(|(&g, w)| within(g as f64, w, 0.10));
    t.report(
        4,
        pass,
        start,
        format!("totals N0,N1,REP,SPC = {got:?} vs {want:?} (+-10%)"),
    );
    let swapped = [got[0], got[1], got[3], got[2]];
    println!(
        "    info: with REP and SPC rows exchanged the totals read {swapped:?}; per-size census {:?}",
        tree.census()
            .iter()
            .filter(|((k, s), _)| *s >= 4 && matches!(k, Kind::Rep | Kind::Spc))
            .map(|((k, s), c)| format!("{k}{s}:{c}"))
            .collect::<Vec<_>>()
    );
}

fn criteria_5_to_7(t: &mut Tally) {
    let start = Instant::now();
    let c = code(1024, 512);
    let stop = StopRule {
        max_frames: 10_000,
        min_frame_errors: u64::MAX,
    };
    let conv = campaign(&c, &["conv-ms"], &[3.5], stop);
    let fast = campaign(&c, &["rt-ms", "xj-ms"], &[2.5, 3.0, 3.5], stop);
    print!(
        "{}",
        conv.to_csv()
            .lines()
            .skip(1)
            .map(|l| format!("    {l}\n"))
            .collect::<String>()
    );
    print!(
        "{}",
        fast.to_csv()
            .lines()
            .skip(1)
            .map(|l| format!("    {l}\n"))
            .collect::<String>()
    );

    let conv35 = conv.row("conv-ms", 3.5).unwrap();
    let rt35 = fast.row("rt-ms", 3.5).unwrap();
    let xj35 = fast.row("xj-ms", 3.5).unwrap();

    let reduction = 100.0 * (1.0 - rt35.mean_iters / conv35.mean_iters);
    let pass5 = (3.0..=6.0).contains(&rt35.mean_iters)
        && (18.0..=32.0).contains(&conv35.mean_iters)
        && reduction >= 70.0;
    t.report(
        5,
        pass5,
        start,
        format!(
            "3.5 dB: round-trip {:.2} iters (3..6), conventional {:.2} iters (18..32), reduction {reduction:.1}% (>=70)",
            rt35.mean_iters, conv35.mean_iters
        ),
    );

    let share = 100.0 * xj35.mean_op_units / conv35.mean_op_units;
    t.report(
        6,
        share <= 15.0,
        start,
        format!(
            "3.5 dB: xjbp {:.0} units/frame vs conventional {:.0} = {share:.1}% (<=15)",
            xj35.mean_op_units, conv35.mean_op_units
        ),
    );

    let mut pass7 = true;
    let mut parts = Vec::new();
    for e in [2.5, 3.0, 3.5] {
        let rt = fast.row("rt-ms", e).unwrap().mean_iters;
        let xj = fast.row("xj-ms", e).unwrap().mean_iters;
        let rel = 100.0 * (xj - rt).abs() / rt;
        pass7 &= rel < 10.0;
        parts.push(format!("{e} dB: rt {rt:.2} xj {xj:.2} ({rel:.1}%)"));
    }
    t.report(7, pass7, start, format!("{} (<10% each)", parts.join(", ")));
    pinned_round_trip_diagnostic(&c);
}

/// Round-trip decoding with N0 right messages saturated at every column from
/// the start, as the pruned decoder does. Not a criterion.
fn pinned_round_trip_diagnostic(c: &PolarCode) {
    let rt = Decoder::new(c.clone(), DecodeOptions::round_trip()).unwrap();
    let xj = Decoder::new(c.clone(), DecodeOptions::xjbp()).unwrap();
    let h = c.parity_check();
    let params = ChannelParams::new(3.5, c.rate());
    let frames = 2000u64;
    let (mut plain, mut pinned, mut pruned) = (0usize, 0usize, 0usize);
    for f in 0..frames {
        let llr = transmit(&vec![0u8; c.n()], &params, f);
        plain += rt.decode(&llr).unwrap().iterations;
        pruned += xj.decode(&llr).unwrap().iterations;
        let mut st = rt.start(&llr).unwrap();
        for nd in rt.tree().nodes.iter().filter(|nd| nd.kind == Kind::N0) {
            for col in 0..=nd.column() {
                for i in nd.leaves() {
                    st.set_r(i, col, SAT);
                }
            }
        }
        let mut it = 0;
        loop {
            rt.iterate(&mut st);
            it += 1;
            if h.check(&hard_decision(&st.posterior_codeword_llr()))
                .unwrap()
                || it == 60
            {
                break;
            }
        }
        pinned += it;
    }
    let f = frames as f64;
    println!(
        "    info: 3.5 dB, {frames} shared frames: round-trip {:.2}, round-trip with N0 pinned at start {:.2}, xjbp {:.2} mean iterations",
        plain as f64 / f,
        pinned as f64 / f,
        pruned as f64 / f
    );
}

fn criterion_8(t: &mut Tally) {
    let start = Instant::now();
    let c = code(1024, 512);
    let stop = StopRule {
        max_frames: 2_000_000,
        min_frame_errors: 100,
    };
    let fast = campaign(&c, &["rt-ms", "xj-ms"], &[2.5, 3.0], stop);
    let conv = campaign(&c, &["conv-ms"], &[3.0], stop);
    let mut pass = true;
    let mut parts = Vec::new();
    for e in [2.5, 3.0] {
        let rt = fast.row("rt-ms", e).unwrap();
        let xj = fast.row("xj-ms", e).unwrap();
        let (a_lo, a_hi) = wilson(rt.frame_errors, rt.frames);
        let (b_lo, b_hi) = wilson(xj.frame_errors, xj.frames);
        let enough = rt.frame_errors >= 100 && xj.frame_errors >= 100;
        let overlap = a_lo <= b_hi && b_lo <= a_hi;
        pass &= enough && overlap;
        parts.push(format!(
            "{e} dB: rt {:.2e} [{a_lo:.2e},{a_hi:.2e}] ({} errs), xj {:.2e} [{b_lo:.2e},{b_hi:.2e}] ({} errs)",
            rt.fer, rt.frame_errors, xj.fer, xj.frame_errors
        ));
    }
    let rt30 = fast.row("rt-ms", 3.0).unwrap().fer;
    let conv30 = conv.row("conv-ms", 3.0).unwrap().fer;
    pass &= rt30 < conv30;
    parts.push(format!("3.0 dB: rt {rt30:.2e} < conv {conv30:.2e}"));
    t.report(8, pass, start, parts.join("; "));
}

/// Max-log extrinsic of bit `i` by enumerating the codebook.
fn brute_extrinsic(codebook: &[Vec<u8>], l: &[f64], i: usize) -> f64 {
    let metric = |c: &Vec<u8>| -> f64 {
        (0..l.len())
            .filter(|&j| j != i)
            .map(|j| if c[j] == 0 { l[j] / 2.0 } else { -l[j] / 2.0 })
            .sum()
    };
    let best = |bit: u8| {
        codebook
            .iter()
            .filter(|c| c[i] == bit)
            .map(metric)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    best(0) - best(1)
}

fn oracle_suite() -> Result<(), String> {
    for len in 2..=4usize {
        let rep: Vec<Vec<u8>> = vec![vec![0; len], vec![1; len]];
        let spc: Vec<Vec<u8>> = (0..1u32 << len)
            .filter(|w| w.count_ones() % 2 == 0)
            .map(|w| (0..len).map(|j| (w >> j & 1) as u8).collect())
            .collect();
        for signs in 0..1u32 << len {
            for mags in 0..4usize.pow(len as u32) {
                let mut code = mags;
                let l: Vec<f64> = (0..len)
                    .map(|j| {
                        let mag = [0.5, 1.0, 2.5, 4.0][code % 4];
                        code /= 4;
                        if signs >> j & 1 == 1 {
                            -mag
                        } else {
                            mag
                        }
                    })
                    .collect();
                let r = rep_update(&l).map_err(|e| e.to_string())?;
                let s = spc_update(&l).map_err(|e| e.to_string())?;
                for i in 0..len {
                    let (wr, ws) = (brute_extrinsic(&rep, &l, i), brute_extrinsic(&spc, &l, i));
                    if (r[i] - wr).abs() > 1e-12 || (s[i] - ws).abs() > 1e-12 {
                        return Err(format!("oracle mismatch at {l:?} bit {i}"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn algebra_suite() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=11 {
        let n = 1usize << m;
        for _ in 0..50 {
            let k = rng.random_range(1..n);
            let mut w = random_bits(&mut rng, n);
            let orig = w.clone();
            transform_in_place(&mut w);
            transform_in_place(&mut w);
            if w != orig {
                return Err(format!("transform is not an involution at n={n}"));
            }
            let c = code(n, k);
            let u = c
                .embed(&random_bits(&mut rng, k))
                .map_err(|e| e.to_string())?;
            let x = c.encode(&u).map_err(|e| e.to_string())?;
            let mut back = x.clone();
            transform_in_place(&mut back);
            if back != u {
                return Err(format!("encode is not an involution at n={n}"));
            }
            let h = c.parity_check();
            if !h.check(&x).map_err(|e| e.to_string())? {
                return Err(format!("codeword outside null space at n={n} k={k}"));
            }
        }
    }
    for k in 1..8 {
        let c = code(8, k);
        let h = c.parity_check();
        let mut codebook = std::collections::HashSet::new();
        for msg in 0..1u32 << k {
            let info: Vec<u8> = (0..k).map(|j| (msg >> j & 1) as u8).collect();
            codebook.insert(c.encode(&c.embed(&info).unwrap()).unwrap());
        }
        for w in 0..256u32 {
            let word: Vec<u8> = (0..8).map(|j| (w >> j & 1) as u8).collect();
            if h.check(&word).unwrap() != codebook.contains(&word) {
                return Err(format!(
                    "syndrome disagrees with codebook at n=8 k={k} word {w:08b}"
                ));
            }
        }
    }
    Ok(())
}

fn transparency_suite() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    let mut checked = 0;
    for mask in 1u32..255 {
        let text: String = (0..8)
            .map(|j| if mask >> j & 1 == 1 { '1' } else { '0' })
            .collect();
        let c = PolarCode::parse_mask(&text).map_err(|e| e.to_string())?;
        let tree = classify(&c);
        if !tree
            .nodes
            .iter()
            .any(|nd| matches!(nd.kind, Kind::N0 | Kind::N1) && nd.size >= 2)
        {
            continue;
        }
        let rt = Decoder::new(c.clone(), DecodeOptions::round_trip()).unwrap();
        let frozen = c.frozen();
        for _ in 0..5 {
            let x = c
                .encode(&c.embed(&random_bits(&mut rng, c.k())).unwrap())
                .unwrap();
            let llr: Vec<Llr> = x
                .iter()
                .map(|&b| {
                    let s = if b == 0 { 1.0 } else { -1.0 };
                    2.0 * (s + 0.8 * rng.sample::<f64, _>(normal))
                })
                .collect();
            let mut st = rt.start(&llr).unwrap();
            for _ in 0..6 {
                rt.iterate(&mut st);
                for nd in tree.nodes.iter().filter(|nd| nd.size >= 2) {
                    let want = match nd.kind {
                        Kind::N0 => SAT,
                        Kind::N1 => 0.0,
                        _ => continue,
                    };
                    for col in 0..=nd.column() {
                        for i in nd.leaves() {
                            if st.r(i, col) != want {
                                return Err(format!("{text}: R({i},{col}) not transparent"));
                            }
                        }
                    }
                    debug_assert!(nd.leaves().all(|i| frozen[i] == (nd.kind == Kind::N0)));
                }
            }
            checked += 1;
        }
    }
    if checked == 0 {
        return Err("no n=8 mask with N0/N1 nodes".into());
    }
    Ok(())
}

fn determinism_suite() -> Result<(), String> {
    let c = code(64, 32);
    let run = |threads| {
        let cfg = CampaignConfig {
            variants: variants(&["conv-ms", "rt-sms", "xj-ms"]),
            ebno_db: vec![1.0, 2.0],
            stop: StopRule {
                max_frames: 600,
                min_frame_errors: 40,
            },
            base_seed: 3,
            threads: Some(threads),
        };
        run_campaign(&c, &cfg).unwrap().to_csv()
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        if run(threads) != one {
            return Err(format!("report differs with {threads} threads"));
        }
    }
    Ok(())
}

type Suite = fn() -> Result<(), String>;

fn criterion_9(t: &mut Tally) {
    let start = Instant::now();
    let suites: [(&str, Suite); 4] = [
        ("involution/null space/n=8 syndrome", algebra_suite),
        ("REP/SPC codebook oracle", oracle_suite),
        ("N0/N1 transparency n=8", transparency_suite),
        ("thread-count determinism", determinism_suite),
    ];
    let mut failures = Vec::new();
    for (name, f) in suites {
        if let Err(e) = f() {
            failures.push(format!("{name}: {e}"));
        }
    }
    let detail = if failures.is_empty() {
        "all property suites hold".to_string()
    } else {
        failures.join("; ")
    };
    t.report(9, failures.is_empty(), start, detail);
}

fn criterion_10(t: &mut Tally) {
    let start = Instant::now();
    let names = ["conv-ms", "conv-sms", "rt-ms", "rt-sms", "xj-ms", "xj-sms"];
    let stop = StopRule {
        max_frames: 100,
        min_frame_errors: u64::MAX,
    };
    let mut bad = Vec::new();
    for n in [8, 64, 1024] {
        let report = campaign(&code(n, n / 2), &names, &[60.0], stop);
        for row in &report.rows {
            if row.frames != 100
                || row.bit_errors != 0
                || row.frame_errors != 0
                || row.mean_iters != 1.0
            {
                bad.push(format!(
                    "n={n} {} iters {} errors {}",
                    row.variant, row.mean_iters, row.bit_errors
                ));
            }
        }
    }
    let detail = if bad.is_empty() {
        "60 dB, 100 frames, n=8/64/1024, 6 variants: 1 iteration, 0 errors".to_string()
    } else {
        bad.join("; ")
    };
    t.report(10, bad.is_empty(), start, detail);
}

fn main() {
    let mut t = Tally { failed: Vec::new() };
    criterion_1(&mut t);
    criterion_2(&mut t);
    criterion_3(&mut t);
    criterion_4(&mut t);
    criteria_5_to_7(&mut t);
    criterion_8(&mut t);
    criterion_9(&mut t);
    criterion_10(&mut t);
    if t.failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!(
            "acceptance: {} of 10 criteria fail: {:?}",
            t.failed.len(),
            t.failed
        );
        if std::env::var_os("POLARBP_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
