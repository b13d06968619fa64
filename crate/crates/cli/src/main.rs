use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wavemark::attacks::{AttackSpec, DropSpec, DEFAULT_BOOST, DEFAULT_Q_BASE, DEFAULT_RADIUS};
use wavemark::motion::{DEFAULT_BLOCK_SIZE, DEFAULT_SEARCH_RANGE, DEFAULT_THRESHOLD};
use wavemark::pipeline::{
    embed_video, extract_video, run_experiment, Clip, ExperimentConfig, RunConfig,
    DEFAULT_DETECTION_THRESHOLD, DEFAULT_SEED,
};
use wavemark::video_io::{read_raw_yuv, read_y4m, write_raw_yuv, write_y4m, RawGeometry};
use wavemark::watermark::{WatermarkShape, DEFAULT_ALPHA, XOSHIRO_GENERATOR};
use wavemark::{
    synth, ChromaLayout, Domain, EmbedManifest, Error, ErrorClass, FrameRate, FrameSequence, Result,
};

#[derive(Parser)]
#[command(
    name = "wavemark",
    version,
    about = "Motion-guided blind-key video watermarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a watermark into the motion blocks of a video.
    Embed(EmbedArgs),
    /// Apply a degradation to a video.
    Attack(AttackArgs),
    /// Compare a suspect video with the original and report similarity.
    Extract(ExtractArgs),
    /// Embed, attack and extract over clips and write a report.
    Evaluate(EvaluateArgs),
    /// Write the bundled synthetic clips as Y4M files.
    Synth(SynthArgs),
}

/// How to read headerless `.yuv` input.
#[derive(Args, Clone)]
struct RawArgs {
    /// Frame size of raw input, WxH.
    #[arg(long)]
    raw_size: Option<String>,
    /// Chroma layout of raw input.
    #[arg(long, default_value = "420")]
    raw_format: ChromaLayout,
    /// Frame rate of raw input, N/D.
    #[arg(long, default_value = "25/1")]
    fps: FrameRate,
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// Side of the square watermark.
    #[arg(long, default_value_t = 32, conflicts_with = "wm_samples")]
    wm_size: usize,
    /// Watermark length in samples (1024 or 512).
    #[arg(long)]
    wm_samples: Option<usize>,
    /// Motion threshold on block distortion.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Motion search range in pixels.
    #[arg(long, default_value_t = DEFAULT_SEARCH_RANGE)]
    range: i32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl ParamArgs {
    fn run_config(&self, domain: Domain) -> Result<RunConfig> {
        let shape = match self.wm_samples {
            Some(n) => WatermarkShape::for_samples(n)?,
            None => WatermarkShape::square(self.wm_size),
        };
        let cfg = RunConfig {
            domain,
            alpha: self.alpha,
            block_size: self.block_size,
            shape,
            threshold: self.threshold,
            search_range: self.range,
            seed: self.seed,
            generator_id: XOSHIRO_GENERATOR.to_string(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "frequency")]
    domain: Domain,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    raw: RawArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    Quant,
    Lowpass,
    Highpass,
    Drop,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    kind: AttackKind,
    /// Base quantizer step.
    #[arg(long, default_value_t = DEFAULT_Q_BASE)]
    q: f64,
    /// Use the same step everywhere instead of scaling it by block activity.
    #[arg(long)]
    no_adaptive: bool,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: usize,
    #[arg(long, default_value_t = DEFAULT_BOOST)]
    boost: f64,
    #[arg(long, conflicts_with = "drop_frames")]
    drop_ratio: Option<f64>,
    /// Comma-separated original frame indices.
    #[arg(long, value_delimiter = ',')]
    drop_frames: Option<Vec<usize>>,
    #[command(flatten)]
    raw: RawArgs,
}

impl AttackArgs {
    fn spec(&self) -> Result<AttackSpec> {
        let spec = match self.kind {
            AttackKind::Quant => AttackSpec::AdaptiveQuantization {
                q_base: self.q,
                adaptive: !self.no_adaptive,
            },
            AttackKind::Lowpass => AttackSpec::Lowpass {
                radius: self.radius,
            },
            AttackKind::Highpass => AttackSpec::Highpass {
                radius: self.radius,
                boost: self.boost,
            },
            AttackKind::Drop => match (&self.drop_ratio, &self.drop_frames) {
                (Some(r), _) => AttackSpec::FrameDrop(DropSpec::Ratio(*r)),
                (None, Some(ix)) => AttackSpec::FrameDrop(DropSpec::Indices(ix.clone())),
                (None, None) => {
                    return Err(Error::Config(
                        "drop needs --drop-ratio or --drop-frames".into(),
                    ));
                }
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    suspect: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    raw: RawArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Input clip; repeat for several. Without any, the bundled clips are used.
    #[arg(long)]
    clip: Vec<PathBuf>,
    /// Also evaluate the bundled synthetic clips.
    #[arg(long)]
    bundled: bool,
    /// Report path; the extension (.csv or .json) picks the format.
    #[arg(long)]
    out: PathBuf,
    /// Directory for the per-clip, per-domain manifests.
    #[arg(long)]
    manifest_dir: Option<PathBuf>,
    /// Domains to evaluate (default: both).
    #[arg(long)]
    domain: Vec<Domain>,
    /// Attacks to apply (default: quant, lowpass, highpass).
    #[arg(long, value_enum)]
    attack: Vec<AttackKind>,
    #[arg(long, default_value_t = DEFAULT_DETECTION_THRESHOLD)]
    detection_threshold: f64,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    raw: RawArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

fn is_y4m(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
}

fn read_video(path: &Path, raw: &RawArgs) -> Result<FrameSequence> {
    if is_y4m(path) {
        return read_y4m(path);
    }
    let size = raw.raw_size.as_deref().ok_or_else(|| {
        Error::Config(format!(
            "{} is not a .y4m file; pass --raw-size WxH to read it as raw YUV",
            path.display()
        ))
    })?;
    let (width, height) = RawGeometry::parse_size(size)?;
    read_raw_yuv(
        path,
        RawGeometry {
            width,
            height,
            layout: raw.raw_format,
            frame_rate: raw.fps,
        },
    )
}

fn write_video(seq: &FrameSequence, path: &Path) -> Result<()> {
    if is_y4m(path) {
        write_y4m(seq, path)
    } else {
        write_raw_yuv(seq, path)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_manifest(path: &Path) -> Result<EmbedManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    EmbedManifest::from_json(&text)
}

fn embed(args: &EmbedArgs) -> Result<()> {
    let cfg = args.params.run_config(args.domain)?;
    let seq = read_video(&args.input, &args.raw)?;
    let out = embed_video(&seq, &cfg)?;
    write_video(&out.video, &args.output)?;
    write_text(&args.manifest, &out.manifest.to_json()?)?;
    println!(
        "watermarked {} of {} frames ({} skipped, {} blocks each, domain {})",
        out.manifest.frames.len(),
        seq.len(),
        out.manifest.skipped.len(),
        cfg.required_blocks(),
        cfg.domain
    );
    Ok(())
}

fn attack(args: &AttackArgs) -> Result<()> {
    let spec = args.spec()?;
    let seq = read_video(&args.input, &args.raw)?;
    let out = spec.apply(&seq)?;
    write_video(&out, &args.output)?;
    println!("{spec}: {} frames in, {} frames out", seq.len(), out.len());
    Ok(())
}

fn extract(args: &ExtractArgs) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let original = read_video(&args.original, &args.raw)?;
    let suspect = read_video(&args.suspect, &args.raw)?;
    let result = extract_video(&original, &suspect, &manifest)?;
    for f in &result.frames {
        match f.delta {
            Some(d) => println!("frame {:>5}  delta {d:.6}", f.index),
            None => println!("frame {:>5}  dropped", f.index),
        }
    }
    match result.mean_delta {
        Some(d) => println!(
            "mean delta {d:.6} over {} frames",
            result.frames.len() - result.dropped()
        ),
        None => println!("mean delta n/a (all watermarked frames dropped)"),
    }
    Ok(())
}

fn clip_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut clips = Vec::new();
    for path in &args.clip {
        clips.push(Clip {
            name: clip_name(path),
            video: read_video(path, &args.raw)?,
        });
    }
    if args.bundled || args.clip.is_empty() {
        clips.extend(synth::bundled_clips());
    }
    let domains = if args.domain.is_empty() {
        vec![Domain::Spatial, Domain::Frequency]
    } else {
        args.domain.clone()
    };
    let attacks = if args.attack.is_empty() {
        AttackSpec::standard_set()
    } else {
        args.attack
            .iter()
            .map(|k| match k {
                AttackKind::Quant => Ok(AttackSpec::quantization()),
                AttackKind::Lowpass => Ok(AttackSpec::lowpass()),
                AttackKind::Highpass => Ok(AttackSpec::highpass()),
                AttackKind::Drop => Err(Error::Config(
                    "evaluate supports quant, lowpass and highpass; use attack --kind drop with extract".into(),
                )),
            })
            .collect::<Result<_>>()?
    };
    let cfg = ExperimentConfig {
        base: args.params.run_config(Domain::Frequency)?,
        domains,
        attacks,
        detection_threshold: args.detection_threshold,
    };
    let out = run_experiment(&clips, &cfg)?;
    out.report.write(&args.out)?;
    if let Some(dir) = &args.manifest_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        for rec in &out.manifests {
            let path = dir.join(format!("{}_{}.json", rec.clip, rec.domain));
            write_text(&path, &rec.manifest.to_json()?)?;
        }
    }
    print!("{}", out.report.render_tables());
    println!("report written to {}", args.out.display());
    Ok(())
}

fn synth_clips(args: &SynthArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io {
        path: args.out_dir.clone(),
        source: e,
    })?;
    for clip in synth::bundled_clips() {
        let path = args.out_dir.join(format!("{}.y4m", clip.name));
        write_y4m(&clip.video, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err.class() {
        ErrorClass::Config => 2,
        ErrorClass::Capacity => 3,
        ErrorClass::Io => 4,
        ErrorClass::Other => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(a) => embed(a),
        Command::Attack(a) => attack(a),
        Command::Extract(a) => extract(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Synth(a) => synth_clips(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
