use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarbp::decoder::Variant;
use polarbp::{
    classify, count_units_per_iteration, run_campaign, CampaignConfig, DecodeOptions, Decoder,
    Kernel, NamedVariant, PolarCode, Schedule, StopRule, DEFAULT_ERASURE,
};
use serde::{Deserialize, Serialize};

mod error;

use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "polarbp",
    version,
    about = "Polar code BP decoding and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the frozen mask of a BEC-constructed code
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode k-bit messages (one per line) into n-bit codewords
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Print the constituent-code census as CSV (mask on stdin when no code is given)
    Classify {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Print per-iteration operation units for each decoder family
    CountOps {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode LLR frames (one per line) and print per-frame results as CSV
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        decoder: DecoderArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run a Monte Carlo campaign and print BER/FER/iteration/unit statistics
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CodeArgs {
    /// Code length (power of two)
    #[arg(long)]
    n: Option<usize>,
    /// Information bit count
    #[arg(long)]
    k: Option<usize>,
    /// Design erasure probability of the construction channel
    #[arg(long)]
    erasure: Option<f64>,
    /// Read the frozen mask from a file instead of constructing it
    #[arg(long, conflicts_with_all = ["n", "k", "erasure"])]
    mask: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct IoArgs {
    /// Input file (default: stdin)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ScheduleArg {
    Conventional,
    RoundTrip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KernelArg {
    Ms,
    Sms,
}

#[derive(Args, Debug, Clone)]
struct DecoderArgs {
    #[arg(long, value_enum, default_value = "round-trip")]
    schedule: ScheduleArg,
    /// Prune at constituent-code roots (requires the round-trip schedule)
    #[arg(long)]
    pruning: bool,
    #[arg(long, value_enum, default_value = "ms")]
    kernel: KernelArg,
    /// Scale of the scaled min-sum kernel
    #[arg(long, default_value_t = Kernel::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 60)]
    max_iters: usize,
    /// Run every iteration even after the syndrome check passes
    #[arg(long)]
    no_early_termination: bool,
    /// Charge one unit per scaling multiply of the scaled kernel
    #[arg(long)]
    count_scaling: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Decoder variants: conv-ms, conv-sms, rt-ms, rt-sms, xj-ms, xj-sms
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "conv-ms,rt-ms,conv-sms,xj-ms"
    )]
    variants: Vec<String>,
    /// Eb/N0 points in dB
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebno: Vec<f64>,
    #[arg(long, default_value_t = Kernel::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 60)]
    max_iters: usize,
    #[arg(long)]
    count_scaling: bool,
    /// Maximum frames per point
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    /// Stop a point once this many frame errors are collected
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-run the configuration embedded in a JSON report
    #[arg(long, conflicts_with_all = ["n", "k", "erasure", "mask", "ebno"])]
    replay: Option<PathBuf>,
}

/// Everything that determines a campaign's results; embedded in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SimConfig {
    n: usize,
    k: usize,
    erasure: Option<f64>,
    mask: String,
    variants: Vec<String>,
    ebno: Vec<f64>,
    alpha: f64,
    max_iters: usize,
    count_scaling: bool,
    frames: u64,
    min_errors: u64,
    seed: u64,
    threads: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    config: SimConfig,
    rows: Vec<polarbp::StatsRow>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Construct { code, out } => {
            let code = code.build()?;
            write_output(out.as_ref(), &format!("{code}\n"))
        }
        Command::Encode { code, io } => {
            let code = code.build()?;
            let input = read_input(io.input.as_ref())?;
            let mut out = String::new();
            for (lineno, line) in numbered_lines(&input) {
                let info = parse_bits(line).map_err(|e| CliError::data_at(lineno, e))?;
                let x = code
                    .embed(&info)
                    .and_then(|u| code.encode(&u))
                    .map_err(|e| CliError::data_at(lineno, e))?;
                out.extend(x.iter().map(|&b| if b == 1 { '1' } else { '0' }));
                out.push('\n');
            }
            write_output(io.out.as_ref(), &out)
        }
        Command::Classify { code, io } => {
            let code = if code.is_empty() {
                let text = read_input(io.input.as_ref())?;
                PolarCode::parse_mask(&text).map_err(|e| CliError::data_at(1, e))?
            } else {
                code.build()?
            };
            write_output(io.out.as_ref(), &classify(&code).census_csv())
        }
        Command::CountOps { code, out } => {
            let code = code.build()?;
            let base = count_units_per_iteration(&code, Variant::Conventional);
            let mut text = String::from("variant,units_per_iteration,ratio\n");
            for v in [Variant::Conventional, Variant::RoundTrip, Variant::XjBp] {
                let units = count_units_per_iteration(&code, v);
                text.push_str(&format!(
                    "{},{},{}\n",
                    v.label(),
                    units,
                    units as f64 / base as f64
                ));
            }
            write_output(out.as_ref(), &text)
        }
        Command::Decode { code, decoder, io } => {
            let code = code.build()?;
            let opts = decoder.options()?;
            let dec = Decoder::new(code.clone(), opts).map_err(CliError::usage)?;
            let input = read_input(io.input.as_ref())?;
            let mut out = String::from("frame_index,converged,iterations,op_units,codeword\n");
            for (frame, (lineno, line)) in numbered_lines(&input).enumerate() {
                let llrs = parse_llrs(line).map_err(|e| CliError::data_at(lineno, e))?;
                let res = dec
                    .decode(&llrs)
                    .map_err(|e| CliError::data_at(lineno, e))?;
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    frame,
                    res.converged,
                    res.iterations,
                    res.op_units,
                    hex_pack(&res.codeword)
                ));
            }
            write_output(io.out.as_ref(), &out)
        }
        Command::Simulate(args) => simulate(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = match &args.replay {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let report: JsonReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            report.config
        }
        None => {
            let code = args.code.build()?;
            if args.ebno.is_empty() {
                return Err(CliError::Usage("--ebno needs at least one value".into()));
            }
            SimConfig {
                n: code.n(),
                k: code.k(),
                erasure: code.design_erasure(),
                mask: code.to_string(),
                variants: args.variants.clone(),
                ebno: args.ebno.clone(),
                alpha: args.alpha,
                max_iters: args.max_iters,
                count_scaling: args.count_scaling,
                frames: args.frames,
                min_errors: args.min_errors,
                seed: args.seed,
                threads: args.threads,
                format: args.format,
                out: args.out.clone(),
            }
        }
    };
    let code = PolarCode::parse_mask(&config.mask).map_err(CliError::data)?;
    let variants = config
        .variants
        .iter()
        .map(|name| {
            NamedVariant::parse(name, config.alpha, config.max_iters).map(|mut v| {
                v.options.count_scaling = config.count_scaling;
                v
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::usage)?;
    let campaign = CampaignConfig {
        variants,
        ebno_db: config.ebno.clone(),
        stop: StopRule {
            max_frames: config.frames,
            min_frame_errors: config.min_errors,
        },
        base_seed: config.seed,
        threads: args.threads.or(config.threads),
    };
    let report = run_campaign(&code, &campaign).map_err(CliError::usage)?;
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let json = JsonReport {
                config,
                rows: report.rows,
            };
            let mut s = serde_json::to_string_pretty(&json).expect("report serializes");
            s.push('\n');
            s
        }
    };
    write_output(args.out.as_ref(), &text)
}

impl CodeArgs {
    fn is_empty(&self) -> bool {
        self.n.is_none() && self.k.is_none() && self.erasure.is_none() && self.mask.is_none()
    }

    fn build(&self) -> Result<PolarCode, CliError> {
        if let Some(path) = &self.mask {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return PolarCode::parse_mask(&text)
                .map_err(|e| CliError::Data(format!("{}: line 1: {e}", path.display())));
        }
        match (self.n, self.k) {
            (Some(n), Some(k)) => {
                PolarCode::construct(n, k, self.erasure.unwrap_or(DEFAULT_ERASURE))
                    .map_err(CliError::usage)
            }
            _ => Err(CliError::Usage(
                "give either --mask or both --n and --k".into(),
            )),
        }
    }
}

impl DecoderArgs {
    fn options(&self) -> Result<DecodeOptions, CliError> {
        let kernel = match self.kernel {
            KernelArg::Ms => Kernel::MinSum,
            KernelArg::Sms => Kernel::scaled(self.alpha).map_err(CliError::usage)?,
        };
        let opts = DecodeOptions {
            max_iters: self.max_iters,
            kernel,
            schedule: match self.schedule {
                ScheduleArg::Conventional => Schedule::Conventional,
                ScheduleArg::RoundTrip => Schedule::RoundTrip,
            },
            pruning: self.pruning,
            early_termination: !self.no_early_termination,
            count_scaling: self.count_scaling,
        };
        opts.validate().map_err(CliError::usage)?;
        Ok(opts)
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::io(p, e)),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Data(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_bits(line: &str) -> Result<Vec<u8>, String> {
    line.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("unexpected character {other:?}")),
        })
        .collect()
}

fn parse_llrs(line: &str) -> Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| format!("cannot parse {tok:?} as a number"))
        })
        .collect()
}

/// Codeword bits in index order, packed MSB first into bytes, lowercase hex.
fn hex_pack(bits: &[u8]) -> String {
    bits.chunks(8)
        .map(|chunk| {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)));
            format!("{byte:02x}")
        })
        .collect()
}
