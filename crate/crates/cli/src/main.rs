//! `mixkit` command-line front end.
//!
//! Exit codes: 0 success, 1 flag or parse error, 2 I/O or decode failure,
//! 3 dimension / heatmap / dataset contract violation. Machine-readable output
//! goes to stdout as JSON; diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixkit::imgcore::{load_heatmap, load_image, save_image};
use mixkit::mixers::{mix_matrix, mixup};
use mixkit::pipeline::{
    grid_from_manifest, load_index_with_classes, run_batch, run_halfres, stats_report_with_sets,
    MixRecord, StrategySummary, MANIFEST_FILE,
};
use mixkit::region::saliency_sets;
use mixkit::{
    seeded_rng, AreaLaw, Error, Filter, HalfResMode, Heatmap, MixConfig, MixedLabel, Obtain,
    PasteTo,
};

#[derive(Parser, Debug)]
#[command(
    name = "mixkit",
    version,
    about = "Image mixing augmentations with exact soft labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mix one source/target pair and print its record.
    Mix(MixArgs),
    /// Mix pairs drawn from a dataset manifest.
    Batch(BatchArgs),
    /// Write half-resolution train/val copies of a dataset.
    Halfres(HalfresArgs),
    /// Simulate mixing geometry and report λ / τ statistics.
    Stats(StatsArgs),
    /// Tile manifest outputs into a contact sheet.
    Grid(GridArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StrategyName {
    Cutmix,
    Resizemix,
    Matrix,
    Mixup,
}

#[derive(Args, Debug)]
struct StrategyArgs {
    #[arg(long, value_enum, default_value = "resizemix")]
    strategy: StrategyName,
    /// How the patch is obtained (matrix only): cut_random, cut_salient, cut_non_salient, resize_whole.
    #[arg(long)]
    obtain: Option<Obtain>,
    /// Where the patch is pasted (matrix only): corresponding, random, salient, non_salient.
    #[arg(long)]
    paste: Option<PasteTo>,
    /// Lower bound of the resize scale range [default: 0.1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Upper bound of the resize scale range [default: 0.8].
    #[arg(long)]
    beta: Option<f64>,
    /// Patch-size law for cut modes: uniform_0_1 or scale_range.
    #[arg(long)]
    area_law: Option<AreaLaw>,
    /// Filter for shrinking a whole source: area or bilinear [default: area].
    #[arg(long)]
    resize_filter: Option<Filter>,
    /// Mixing ratio (mixup only).
    #[arg(long = "lambda")]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct MixArgs {
    src: PathBuf,
    tgt: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long, env = "MIXKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    src_class: u32,
    #[arg(long, default_value_t = 1)]
    tgt_class: u32,
    #[arg(long)]
    src_heatmap: Option<PathBuf>,
    #[arg(long)]
    tgt_heatmap: Option<PathBuf>,
    /// Nearest-neighbour resample heatmaps to their image's size.
    #[arg(long)]
    resize_heatmaps: bool,
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long = "n")]
    n: u64,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long, env = "MIXKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Number of classes; inferred from the manifest when omitted.
    #[arg(long)]
    class_count: Option<u32>,
}

#[derive(Args, Debug)]
struct HalfresArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// rand_crop, resize or center_crop.
    #[arg(long)]
    train_mode: HalfResMode,
    /// rand_crop, resize or center_crop.
    #[arg(long)]
    val_mode: HalfResMode,
    #[arg(long, env = "MIXKIT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long = "n", default_value_t = 100_000)]
    n: u64,
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "224x224", value_parser = parse_dims)]
    dims: (u32, u32),
    #[arg(long, env = "MIXKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    src_heatmap: Option<PathBuf>,
    #[arg(long)]
    tgt_heatmap: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    rows: u32,
    #[arg(long)]
    cols: u32,
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got '{s}'"))?;
    let w: u32 = w.parse().map_err(|_| format!("bad width '{w}'"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad height '{h}'"))?;
    if w == 0 || h == 0 {
        return Err("dimensions must be nonzero".into());
    }
    Ok((w, h))
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) => match e {
                Error::InvalidArgument(_) | Error::Manifest { .. } => 1,
                Error::Io { .. } | Error::Decode { .. } => 2,
                Error::DimensionMismatch(_)
                | Error::MissingHeatmap(_)
                | Error::EmptyDataset
                | Error::NotEnoughEntries { .. } => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

enum Plan {
    Matrix(MixConfig),
    Mixup(f64),
}

impl StrategyArgs {
    fn plan(&self, allow_mixup: bool) -> Result<Plan, Failure> {
        let matrix = self.strategy == StrategyName::Matrix;
        if !matrix && (self.obtain.is_some() || self.paste.is_some()) {
            return Err(usage("--obtain/--paste require --strategy matrix"));
        }
        if self.strategy != StrategyName::Mixup && self.lambda.is_some() {
            return Err(usage("--lambda requires --strategy mixup"));
        }
        let scale_used = match self.strategy {
            StrategyName::Resizemix => true,
            StrategyName::Matrix => {
                self.obtain == Some(Obtain::ResizeWhole)
                    || self.area_law == Some(AreaLaw::ScaleRange)
            }
            _ => false,
        };
        if !scale_used && (self.alpha.is_some() || self.beta.is_some()) {
            return Err(usage(
                "--alpha/--beta only apply to resizemix, resize_whole or the scale_range area law",
            ));
        }
        if self.area_law.is_some() && !matrix && self.strategy != StrategyName::Cutmix {
            return Err(usage("--area-law only applies to cut modes"));
        }
        let resizes = match self.strategy {
            StrategyName::Resizemix => true,
            StrategyName::Matrix => self.obtain == Some(Obtain::ResizeWhole),
            _ => false,
        };
        if self.resize_filter.is_some() && !resizes {
            return Err(usage(
                "--resize-filter only applies to resizemix or resize_whole",
            ));
        }
        let alpha = self.alpha.unwrap_or(MixConfig::DEFAULT_ALPHA);
        let beta = self.beta.unwrap_or(MixConfig::DEFAULT_BETA);
        let law = self.area_law.unwrap_or_default();
        let cfg = match self.strategy {
            StrategyName::Cutmix => MixConfig::cutmix().with_area_law(law),
            StrategyName::Resizemix => MixConfig::resizemix(alpha, beta),
            StrategyName::Matrix => {
                let (Some(obtain), Some(paste)) = (self.obtain, self.paste) else {
                    return Err(usage("--strategy matrix needs both --obtain and --paste"));
                };
                MixConfig::new(obtain, paste)
                    .with_scale_range(alpha, beta)
                    .with_area_law(law)
            }
            StrategyName::Mixup => {
                if !allow_mixup {
                    return Err(usage("mixup is only available for single-pair `mix`"));
                }
                let lambda = self
                    .lambda
                    .ok_or_else(|| usage("--strategy mixup needs --lambda"))?;
                if !(0.0..=1.0).contains(&lambda) {
                    return Err(usage(format!("--lambda {lambda} outside [0, 1]")));
                }
                return Ok(Plan::Mixup(lambda));
            }
        };
        let cfg = match self.resize_filter {
            Some(f) => cfg.with_resize_filter(f),
            None => cfg,
        };
        cfg.validate()?;
        Ok(Plan::Matrix(cfg))
    }
}

fn require_heatmaps(cfg: &MixConfig, src: Option<&Path>, tgt: Option<&Path>) -> CmdResult {
    if cfg.needs_source_heatmap() && src.is_none() {
        return Err(Error::MissingHeatmap(format!(
            "--src-heatmap is required for --obtain {}",
            cfg.obtain
        ))
        .into());
    }
    if cfg.needs_target_heatmap() && tgt.is_none() {
        return Err(Error::MissingHeatmap(format!(
            "--tgt-heatmap is required for --paste {}",
            cfg.paste_to
        ))
        .into());
    }
    Ok(())
}

fn load_optional_heatmap(
    needed: bool,
    path: Option<&Path>,
    dims: (u32, u32),
    resize: bool,
) -> Result<Option<Heatmap>, Failure> {
    match path {
        Some(p) if needed => {
            let h = load_heatmap(p)?;
            if resize && h.dims() != dims {
                Ok(Some(h.resize_nearest(dims.0, dims.1)?))
            } else {
                Ok(Some(h))
            }
        }
        _ => Ok(None),
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string(value).expect("serializable output")
    );
}

fn cmd_mix(args: MixArgs) -> CmdResult {
    let plan = args.strategy.plan(true)?;
    if let Plan::Matrix(cfg) = &plan {
        require_heatmaps(
            cfg,
            args.src_heatmap.as_deref(),
            args.tgt_heatmap.as_deref(),
        )?;
    }

    let src = load_image(&args.src)?;
    let tgt = load_image(&args.tgt)?;
    let ls = MixedLabel::one_hot(args.src_class);
    let lt = MixedLabel::one_hot(args.tgt_class);
    let (result, strategy) = match plan {
        Plan::Mixup(lambda) => (
            mixup(&src, &tgt, &ls, &lt, lambda)?,
            StrategySummary::Mixup { lambda },
        ),
        Plan::Matrix(cfg) => {
            let sh = load_optional_heatmap(
                cfg.needs_source_heatmap(),
                args.src_heatmap.as_deref(),
                src.dims(),
                args.resize_heatmaps,
            )?;
            let th = load_optional_heatmap(
                cfg.needs_target_heatmap(),
                args.tgt_heatmap.as_deref(),
                tgt.dims(),
                args.resize_heatmaps,
            )?;
            let mut rng = seeded_rng(args.seed);
            let r = mix_matrix(
                &src,
                &tgt,
                &ls,
                &lt,
                &cfg,
                sh.as_ref(),
                th.as_ref(),
                &mut rng,
            )?;
            (r, StrategySummary::Matrix(cfg))
        }
    };
    save_image(&result.image, &args.output)?;
    print_json(&MixRecord::from_result(
        args.output.display().to_string(),
        args.src.display().to_string(),
        args.tgt.display().to_string(),
        strategy,
        &result,
        args.seed,
    ));
    Ok(())
}

fn cmd_batch(args: BatchArgs) -> CmdResult {
    let Plan::Matrix(cfg) = args.strategy.plan(false)? else {
        unreachable!("mixup rejected by plan(false)");
    };
    if args.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let index = load_index_with_classes(&args.manifest, args.class_count)?;
    let records = run_batch(&index, &cfg, args.n, args.seed, &args.out_dir, args.workers)?;
    eprintln!(
        "mixkit: wrote {} outputs to {}",
        records.len(),
        args.out_dir.display()
    );
    print_json(&serde_json::json!({
        "outputs": records.len(),
        "manifest": args.out_dir.join(MANIFEST_FILE),
    }));
    Ok(())
}

fn cmd_halfres(args: HalfresArgs) -> CmdResult {
    let index = load_index_with_classes(&args.manifest, None)?;
    let records = run_halfres(
        &index,
        args.train_mode,
        args.val_mode,
        args.seed,
        &args.out_dir,
    )?;
    print_json(&serde_json::json!({
        "outputs": records.len(),
        "train_mode": args.train_mode,
        "val_mode": args.val_mode,
        "manifest": args.out_dir.join(MANIFEST_FILE),
    }));
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> CmdResult {
    let Plan::Matrix(cfg) = args.strategy.plan(false)? else {
        unreachable!("mixup rejected by plan(false)");
    };
    require_heatmaps(
        &cfg,
        args.src_heatmap.as_deref(),
        args.tgt_heatmap.as_deref(),
    )?;
    let sets = |needed: bool, p: Option<&Path>| -> Result<_, Failure> {
        match p {
            Some(p) if needed => Ok(Some(saliency_sets(&load_heatmap(p)?)?)),
            _ => Ok(None),
        }
    };
    let ss = sets(cfg.needs_source_heatmap(), args.src_heatmap.as_deref())?;
    let ts = sets(cfg.needs_target_heatmap(), args.tgt_heatmap.as_deref())?;
    for s in ss.iter().chain(&ts) {
        if s.dims() != args.dims {
            return Err(Error::DimensionMismatch(format!(
                "heatmap is {}x{}, --dims is {}x{}",
                s.dims().0,
                s.dims().1,
                args.dims.0,
                args.dims.1
            ))
            .into());
        }
    }
    let report =
        stats_report_with_sets(&cfg, args.n, args.dims, args.seed, ss.as_ref(), ts.as_ref())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable report")
    );
    Ok(())
}

fn cmd_grid(args: GridArgs) -> CmdResult {
    if args.rows == 0 || args.cols == 0 {
        return Err(usage("--rows and --cols must be at least 1"));
    }
    let sheet = grid_from_manifest(&args.manifest, args.rows, args.cols)?;
    save_image(&sheet, &args.output)?;
    print_json(&serde_json::json!({
        "output": args.output,
        "width": sheet.width(),
        "height": sheet.height(),
    }));
    Ok(())
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
    let result = match cli.command {
        Command::Mix(a) => cmd_mix(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Halfres(a) => cmd_halfres(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Grid(a) => cmd_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mixkit: error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
