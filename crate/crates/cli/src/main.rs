use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cawl::metrics::DisplayPsnr;
use cawl::{
    decode_sequence, encode_sequence, extract_temporal_layers, load_raw_sequence, psnr_lp_t,
    rate_report, save_raw_sequence, EncodeConfig, HpDistortion, Lambda, McMode, McParams,
    RateReport, Sequence, Strategy,
};

/// Lossless temporally scalable video coding with content-adaptive wavelet lifting.
#[derive(Parser)]
#[command(name = "cawl", version)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a raw 8-bit grayscale sequence into a layered container.
    Encode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        codec: CodecArgs,
        /// Temporal levels; the GOP holds 2^levels frames.
        #[arg(long, default_value_t = 3)]
        levels: u8,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Decode a container. Complete streams give the original sequence;
    /// layer-reduced streams give a preview plus a position index.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Enhancement layers to use, counted from the deepest (default: all).
        #[arg(long)]
        keep_levels: Option<u8>,
        /// Repeat each preview frame over its temporal support.
        #[arg(long)]
        hold: bool,
    },
    /// Drop the finest enhancement layers without re-encoding.
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        keep_levels: u8,
    },
    /// Sweep levels x lambda x motion mode and write a CSV of file size and
    /// base-layer quality.
    Analyze {
        input: PathBuf,
        /// CSV destination (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        levels: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,7")]
        lambdas: Vec<f64>,
        #[arg(long = "mc-modes", value_delimiter = ',', default_value = "none,block")]
        mc_modes: Vec<McArg>,
    },
}

#[derive(Args)]
struct Dims {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
}

#[derive(Args)]
struct CodecArgs {
    /// Motion compensation (encode only; analyze uses --mc-modes).
    #[arg(long, value_enum, default_value_t = McArg::None)]
    mc: McArg,
    #[arg(long, default_value_t = 8)]
    block_size: usize,
    #[arg(long, default_value_t = 8)]
    search_init: usize,
    #[arg(long, default_value_t = 64)]
    search_max: usize,
    /// Decision mode; u-wl decomposes every pair to full depth.
    #[arg(long, value_enum, default_value_t = Mode::CaWl)]
    mode: Mode,
    /// Same as --mode u-wl.
    #[arg(long)]
    force_uniform: bool,
    #[arg(long, value_enum, default_value_t = HpArg::Energy)]
    hp_distortion: HpArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum McArg {
    None,
    Block,
}

impl McArg {
    fn mode(self) -> McMode {
        match self {
            McArg::None => McMode::None,
            McArg::Block => McMode::Block,
        }
    }

    fn name(self) -> &'static str {
        match self {
            McArg::None => "none",
            McArg::Block => "block",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    CaWl,
    UWl,
}

#[derive(Clone, Copy, ValueEnum)]
enum HpArg {
    Energy,
    Zero,
}

impl CodecArgs {
    fn config(&self, levels: u8, lambda: f64, mc: McArg) -> Result<EncodeConfig> {
        let uniform = self.force_uniform || self.mode == Mode::UWl;
        Ok(EncodeConfig {
            i_max: levels,
            lambda: Lambda::new(lambda)?,
            mc_mode: mc.mode(),
            mc_params: McParams::new(self.block_size, self.search_init, self.search_max)?,
            hp_distortion: match self.hp_distortion {
                HpArg::Energy => HpDistortion::Energy,
                HpArg::Zero => HpDistortion::Zero,
            },
            strategy: if uniform {
                Strategy::Uniform
            } else {
                Strategy::RateDistortion
            },
        })
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("frame-io: cannot read {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .with_context(|| format!("frame-io: cannot write {}", path.display()))
}

fn print_report(r: &RateReport, pixels: usize, frames: usize) {
    let bpp = |b: usize| (b * 8) as f64 / (pixels * frames).max(1) as f64;
    println!("total {} bytes ({:.4} bpp)", r.total, bpp(r.total));
    println!("  header        {:>10}", r.header);
    println!("  depth vectors {:>10}", r.depth_vectors);
    println!("  motion        {:>10}", r.motion);
    println!("  BL            {:>10}", r.base_layer);
    for (k, &b) in r.enhancement.iter().enumerate().rev() {
        println!("  EL{:<11} {:>10}", k + 1, b);
    }
}

fn cmd_encode(input: &Path, output: &Path, dims: &Dims, config: &EncodeConfig) -> Result<()> {
    let seq = load_raw_sequence(input, dims.width, dims.height)?;
    let encoded = encode_sequence(&seq, config)?;
    write(output, &encoded.bytes)?;
    let report = rate_report(&encoded.bytes)?;
    print_report(&report, seq.width() * seq.height(), seq.frame_count());
    let mut histogram = vec![0usize; usize::from(config.i_max) + 1];
    for gop in &encoded.gops {
        for f in &gop.base {
            histogram[usize::from(f.level)] += 1 << f.level;
        }
    }
    histogram[0] += encoded.stream.trailing.len();
    let hist: Vec<String> = histogram
        .iter()
        .enumerate()
        .map(|(d, n)| format!("{d}:{n}"))
        .collect();
    println!("depth histogram (frames per depth) {}", hist.join(" "));
    Ok(())
}

fn index_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".idx.csv");
    PathBuf::from(name)
}

fn cmd_decode(input: &Path, output: &Path, keep_levels: Option<u8>, hold: bool) -> Result<()> {
    let mut bytes = read(input)?;
    if let Some(k) = keep_levels {
        bytes = extract_temporal_layers(&bytes, k)?;
    }
    let decoded = decode_sequence(&bytes)?;
    if decoded.is_complete() {
        let n = decoded.frames.len();
        save_raw_sequence(&decoded.into_sequence()?, output)?;
        println!("decoded {n} frames");
        return Ok(());
    }
    save_raw_sequence(&decoded.to_preview(hold)?, output)?;
    if hold {
        println!("wrote {} held preview frames", decoded.header.frame_count);
    } else {
        let idx = index_path(output);
        let mut w = csv::Writer::from_path(&idx)
            .with_context(|| format!("frame-io: cannot write {}", idx.display()))?;
        w.write_record(["frame", "position", "support"])?;
        for (i, f) in decoded.frames.iter().enumerate() {
            w.write_record([i.to_string(), f.position.to_string(), f.support.to_string()])?;
        }
        w.flush()?;
        println!(
            "wrote {} preview frames; index in {}",
            decoded.frames.len(),
            idx.display()
        );
    }
    Ok(())
}

fn cmd_extract(input: &Path, output: &Path, keep_levels: u8) -> Result<()> {
    let out = extract_temporal_layers(&read(input)?, keep_levels)?;
    write(output, &out)?;
    println!("wrote {} bytes", out.len());
    Ok(())
}

/// One analysis point: file size of the full stream and PSNR of its base layer.
fn measure(seq: &Sequence, config: &EncodeConfig) -> Result<(usize, f64)> {
    let bytes = encode_sequence(seq, config)?.bytes;
    let base = decode_sequence(&extract_temporal_layers(&bytes, 0)?)?;
    Ok((bytes.len(), psnr_lp_t(&base, seq)?))
}

fn cmd_analyze(
    input: &Path,
    output: Option<&Path>,
    dims: &Dims,
    codec: &CodecArgs,
    levels: &[u8],
    lambdas: &[f64],
    mc_modes: &[McArg],
) -> Result<()> {
    let seq = load_raw_sequence(input, dims.width, dims.height)?;
    let sink: Box<dyn std::io::Write> = match output {
        Some(p) => Box::new(
            std::fs::File::create(p)
                .with_context(|| format!("frame-io: cannot write {}", p.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["level", "mode", "lambda", "file_size_bytes", "psnr_lp_t_db"])?;
    for &mc in mc_modes {
        for &lambda in lambdas {
            for &level in levels {
                let config = codec.config(level, lambda, mc)?;
                let (size, psnr) = measure(&seq, &config)?;
                log::info!(
                    "levels {level} mc {} lambda {lambda}: {size} bytes, {} dB",
                    mc.name(),
                    DisplayPsnr(psnr)
                );
                w.write_record([
                    level.to_string(),
                    mc.name().to_string(),
                    lambda.to_string(),
                    size.to_string(),
                    psnr.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("cli: --threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cli: cannot size the worker pool")?;
    }
    match &cli.command {
        Command::Encode {
            input,
            output,
            dims,
            codec,
            levels,
            lambda,
        } => cmd_encode(
            input,
            output,
            dims,
            &codec.config(*levels, *lambda, codec.mc)?,
        ),
        Command::Decode {
            input,
            output,
            keep_levels,
            hold,
        } => cmd_decode(input, output, *keep_levels, *hold),
        Command::Extract {
            input,
            output,
            keep_levels,
        } => cmd_extract(input, output, *keep_levels),
        Command::Analyze {
            input,
            output,
            dims,
            codec,
            levels,
            lambdas,
            mc_modes,
        } => cmd_analyze(
            input,
            output.as_deref(),
            dims,
            codec,
            levels,
            lambdas,
            mc_modes,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
