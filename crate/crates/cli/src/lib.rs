//! `irisgauge` command-line front end.
//!
//! Exit codes: 0 on success, 1 on data errors (message names the file and
//! cause), 2 on usage errors. Output files appear only when a command
//! succeeds.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use irisgauge_core::analysis::{
    cohort_curves_with, cohort_grid, session_boxstats, BOXSTATS_CSV_HEADER,
};
use irisgauge_core::ingestion::{
    read_manifest, rasterize_eye, write_measurements_csv_many, MANIFEST_FILE,
};
use irisgauge_core::metrics::REPORT_CSV_HEADER;
use irisgauge_core::synth::Dynamics;
use irisgauge_core::{
    aggregate, decode_mask, encode_mask, frame_error, gen_cohort, load_session,
    parse_annotations, parse_measurements_csv, rasterize, segmentation_eval, Cohort, CohortSpec,
    Eye, FrameMeasurement, GapKind, Label, LabelMask, LocalizationConfig, Method, Pooling,
    Quantity, RadiusRange, SessionRecord,
};

use output::{write_dir_atomic, write_file_atomic};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] irisgauge_core::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "irisgauge", version, about = "Pupil and iris geometry from eye segmentation masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic cohorts as session directories of PGM masks.
    Synth(SynthArgs),
    /// Rasterize polygon annotations into PGM label masks.
    Rasterize(RasterizeArgs),
    /// Localize pupil and iris in session directories and write a measurement CSV.
    Fit(FitArgs),
    /// Score predicted masks and fits against ground truth.
    Eval(EvalArgs),
    /// Grand-mean cohort curves over a 100-point grid.
    Grandmean(GrandmeanArgs),
    /// Five-number summaries of pupil-iris ratios per protocol session.
    Boxstats(BoxstatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CohortArg {
    Alcohol,
    #[value(name = "no_alcohol")]
    NoAlcohol,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EyeArg {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    Radius,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    #[value(name = "per-eye")]
    PerEye,
    #[value(name = "per-subject")]
    PerSubject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mixed,
    Lms,
    Hough,
    #[value(name = "mass-center")]
    MassCenter,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Mixed => Method::Mixed,
            MethodArg::Lms => Method::Lms,
            MethodArg::Hough => Method::Hough,
            MethodArg::MassCenter => Method::MassCenter,
        }
    }
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let dim = |v: &str| match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("invalid dimension {v:?} in {s:?}")),
    };
    Ok((dim(w)?, dim(h)?))
}

fn parse_range(s: &str) -> std::result::Result<RadiusRange, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected MIN,MAX, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("invalid number {v:?}"));
    RadiusRange::new(num(a)?, num(b)?).map_err(|e| e.to_string())
}

fn parse_session(s: &str) -> std::result::Result<u8, String> {
    match s.parse::<u8>() {
        Ok(n) if n <= 4 => Ok(n),
        _ => Err(format!("session must be 0-4, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub subjects: usize,
    #[arg(long, value_enum, default_value_t = CohortArg::Both)]
    pub cohort: CohortArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; one subdirectory per subject, session and eye.
    #[arg(long)]
    pub out: PathBuf,
    /// Protocol sessions to generate, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_session, default_value = "0")]
    pub sessions: Vec<u8>,
    #[arg(long, value_enum, default_value_t = EyeArg::Right)]
    pub eyes: EyeArg,
    #[arg(long, default_value_t = 100)]
    pub frames: u32,
    /// Pupil dilation added to the alcohol cohort, pixels.
    #[arg(long, default_value_t = 2.0)]
    pub dilation: f64,
    /// Subject base pupil radius, pixels.
    #[arg(long, default_value_t = 9.0)]
    pub base_radius: f64,
    #[arg(long, default_value_t = 0.5)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0.2)]
    pub max_occlusion: f64,
    #[arg(long, value_parser = parse_size, default_value = "320x320")]
    pub size: (usize, usize),
}

#[derive(Debug, Args)]
pub struct RasterizeArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long, value_parser = parse_size)]
    pub size: (usize, usize),
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only regions of one eye.
    #[arg(long, value_enum)]
    pub eye: Option<EyeArg>,
}

#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    /// Flat key=value localization config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_parser = parse_range, value_name = "MIN,MAX")]
    pub pupil_range: Option<RadiusRange>,
    #[arg(long, value_parser = parse_range, value_name = "MIN,MAX")]
    pub iris_range: Option<RadiusRange>,
    #[arg(long)]
    pub openness_threshold: Option<f64>,
    #[arg(long)]
    pub horiz_ratio: Option<f64>,
    #[arg(long)]
    pub hough_stride: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<LocalizationConfig> {
        let mut cfg = LocalizationConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg = config::parse_config(&text, cfg, path)?;
        }
        if let Some(m) = self.method {
            cfg.method = m.into();
        }
        if let Some(r) = self.pupil_range {
            cfg.pupil_radius_range = r;
        }
        if let Some(r) = self.iris_range {
            cfg.iris_radius_range = r;
        }
        if let Some(v) = self.openness_threshold {
            cfg.openness_threshold = v;
        }
        if let Some(v) = self.horiz_ratio {
            cfg.horiz_ratio = v;
        }
        if let Some(v) = self.hough_stride {
            cfg.hough_center_stride = v;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// A session directory (with manifest.txt) or a directory of them.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write masks reconstructed from the fitted ellipses here, one
    /// subdirectory per session.
    #[arg(long)]
    pub recon: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted masks; paired with --gt by relative path.
    #[arg(long, requires = "gt")]
    pub pred: Option<PathBuf>,
    #[arg(long, requires = "pred")]
    pub gt: Option<PathBuf>,
    /// Measurement CSV to score against --truth.
    #[arg(long, requires = "truth")]
    pub fits: Option<PathBuf>,
    /// Ground-truth measurement CSV, or a directory searched for truth.csv files.
    #[arg(long, requires = "fits")]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GrandmeanArgs {
    /// Measurement CSV, session directory, or directory of either.
    #[arg(long)]
    pub sessions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = QuantityArg::Radius)]
    pub quantity: QuantityArg,
    #[arg(long, value_enum, default_value_t = PoolingArg::PerEye)]
    pub pooling: PoolingArg,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct BoxstatsArgs {
    /// Measurement CSV, session directory, or directory of either.
    #[arg(long)]
    pub sessions: PathBuf,
    /// Protocol session 0-4; all sessions present when omitted.
    #[arg(long, value_parser = parse_session)]
    pub session: Option<u8>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Parse `args` (including the program name) and run the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(&a),
        Command::Rasterize(a) => rasterize_cmd(&a),
        Command::Fit(a) => fit(&a),
        Command::Eval(a) => eval(&a),
        Command::Grandmean(a) => grandmean(&a),
        Command::Boxstats(a) => boxstats(&a),
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cohorts: &[Cohort] = match a.cohort {
        CohortArg::Alcohol => &[Cohort::Alcohol],
        CohortArg::NoAlcohol => &[Cohort::NoAlcohol],
        CohortArg::Both => &[Cohort::Alcohol, Cohort::NoAlcohol],
    };
    let eyes = match a.eyes {
        EyeArg::Left => vec![Eye::Left],
        EyeArg::Right => vec![Eye::Right],
        EyeArg::Both => vec![Eye::Left, Eye::Right],
    };
    let mut sessions_arg = a.sessions.clone();
    sessions_arg.sort_unstable();
    sessions_arg.dedup();
    if a.subjects == 0 {
        return Err(CliError::Usage("--subjects must be at least 1".into()));
    }
    let mut sessions = Vec::new();
    for &cohort in cohorts {
        let spec = CohortSpec {
            n_subjects: a.subjects,
            cohort,
            dynamics: Dynamics {
                base_radius: a.base_radius,
                dilation_offset: a.dilation,
                frames: a.frames,
                boundary_jitter: a.jitter,
                max_occlusion: a.max_occlusion,
                ..Dynamics::default()
            },
            seed: a.seed,
            sessions: sessions_arg.clone(),
            eyes: eyes.clone(),
            width: a.size.0,
            height: a.size.1,
        };
        sessions.extend(gen_cohort(&spec).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    // Validate every frame before touching the filesystem.
    for s in &sessions {
        for spec in &s.specs {
            spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    write_dir_atomic(&a.out, |dir| {
        for s in &sessions {
            s.write_dir(&dir.join(s.dir_name()))?;
        }
        Ok(())
    })
}

fn output_name(image_id: &str) -> String {
    let stem = Path::new(image_id)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(image_id);
    let clean: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{clean}.pgm")
}

fn rasterize_cmd(a: &RasterizeArgs) -> Result<()> {
    let bytes = fs::read(&a.annotations).map_err(|e| CliError::io(&a.annotations, e))?;
    let anns = parse_annotations(&bytes).map_err(|e| irisgauge_core::Error::in_file(&a.annotations, e))?;
    let (w, h) = a.size;
    let mut outputs = Vec::with_capacity(anns.len());
    for ann in &anns {
        let mask = match a.eye {
            None | Some(EyeArg::Both) => rasterize(ann, w, h)?,
            Some(EyeArg::Left) => rasterize_eye(ann, Eye::Left, w, h)?,
            Some(EyeArg::Right) => rasterize_eye(ann, Eye::Right, w, h)?,
        };
        let name = output_name(&ann.image_id);
        if outputs.iter().any(|(n, _)| n == &name) {
            return Err(CliError::Data(format!(
                "{}: two images map to output {name}",
                a.annotations.display()
            )));
        }
        outputs.push((name, encode_mask(&mask)));
    }
    write_dir_atomic(&a.out, |dir| {
        for (name, bytes) in &outputs {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    })
}

/// Session directories under `root`: `root` itself when it holds a
/// manifest, otherwise its immediate subdirectories that do, sorted.
fn session_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(CliError::Data(format!("{}: not a directory", root.display())));
    }
    if root.join(MANIFEST_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| CliError::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn report_gaps(dir: &Path, rec: &SessionRecord) {
    for gap in &rec.gaps {
        let why = match &gap.kind {
            GapKind::Missing => "missing".to_string(),
            GapKind::EmptyEye => "no iris or pupil".to_string(),
            GapKind::FitFailed(m) => format!("fit failed: {m}"),
        };
        eprintln!("warning: {}: frame {}: {why}", dir.display(), gap.frame_idx);
    }
}

fn load_sessions(root: &Path, cfg: &LocalizationConfig) -> Result<Vec<(PathBuf, SessionRecord)>> {
    let dirs = session_dirs(root)?;
    if dirs.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no session directories (with {MANIFEST_FILE}) found",
            root.display()
        )));
    }
    dirs.into_iter()
        .map(|dir| {
            let rec = load_session(&dir, cfg)?;
            report_gaps(&dir, &rec);
            Ok((dir, rec))
        })
        .collect()
}

/// Mask drawn from fitted ellipses. The sclera is copied from `source`
/// outside the fitted iris since it is not localized.
fn reconstruct(source: &LabelMask, fit: &FrameMeasurement) -> Result<LabelMask> {
    let (w, h) = (source.width(), source.height());
    let mut out = LabelMask::filled(w, h, Label::Background)?;
    out.paint(&source.class_plane(Label::Sclera), Label::Sclera)?;
    out.paint(&fit.iris.to_mask(w, h), Label::Iris)?;
    out.paint(&fit.pupil.to_mask(w, h), Label::Pupil)?;
    Ok(out)
}

fn fit(a: &FitArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let sessions = load_sessions(&a.masks, &cfg)?;
    let records: Vec<SessionRecord> = sessions.iter().map(|(_, r)| r.clone()).collect();
    let csv = write_measurements_csv_many(&records);

    if let Some(recon) = &a.recon {
        write_dir_atomic(recon, |out| {
            for (dir, rec) in &sessions {
                let name = dir.file_name().map(PathBuf::from).unwrap_or_else(|| "session".into());
                let target = out.join(name);
                fs::create_dir_all(&target).map_err(|e| CliError::io(&target, e))?;
                for f in &rec.frames {
                    let src_path = find_frame(dir, f.frame_idx)?;
                    let bytes = fs::read(&src_path).map_err(|e| CliError::io(&src_path, e))?;
                    let src = decode_mask(&bytes).map_err(|e| irisgauge_core::Error::in_file(&src_path, e))?;
                    let path = target.join(src_path.file_name().expect("frame file name"));
                    fs::write(&path, encode_mask(&reconstruct(&src, f)?))
                        .map_err(|e| CliError::io(&path, e))?;
                }
                let manifest = target.join(MANIFEST_FILE);
                fs::write(&manifest, read_manifest(dir)?.to_manifest())
                    .map_err(|e| CliError::io(&manifest, e))?;
            }
            Ok(())
        })?;
    }
    write_file_atomic(&a.out, &csv)
}

fn find_frame(dir: &Path, idx: u32) -> Result<PathBuf> {
    irisgauge_core::ingestion::list_frames(dir)?
        .into_iter()
        .find(|(i, _)| *i == idx)
        .map(|(_, p)| p)
        .ok_or_else(|| CliError::Data(format!("{}: frame {idx} disappeared", dir.display())))
}

/// Files under `root` accepted by `keep`, as paths relative to `root`,
/// sorted.
fn files_under(root: &Path, keep: &dyn Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, rel: &Path, keep: &dyn Fn(&Path) -> bool, out: &mut Vec<PathBuf>) -> Result<()> {
        let dir = root.join(rel);
        for entry in fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let entry = entry.map_err(|e| CliError::io(&dir, e))?;
            let rel_path = rel.join(entry.file_name());
            let path = root.join(&rel_path);
            if path.is_dir() {
                walk(root, &rel_path, keep, out)?;
            } else if keep(&path) {
                out.push(rel_path);
            }
        }
        Ok(())
    }
    if !root.is_dir() {
        return Err(CliError::Data(format!("{}: not a directory", root.display())));
    }
    let mut out = Vec::new();
    walk(root, Path::new(""), keep, &mut out)?;
    out.sort();
    Ok(out)
}

fn pgm_files(root: &Path) -> Result<Vec<PathBuf>> {
    files_under(root, &|p| p.extension().is_some_and(|x| x == "pgm"))
}

fn read_mask(path: &Path) -> Result<LabelMask> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(decode_mask(&bytes).map_err(|e| irisgauge_core::Error::in_file(path, e))?)
}

fn read_measurements(path: &Path) -> Result<Vec<SessionRecord>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_measurements_csv(&bytes).map_err(|e| irisgauge_core::Error::in_file(path, e))?)
}

fn truth_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let files = files_under(path, &|p| p.file_name().is_some_and(|n| n == "truth.csv"))?;
    if files.is_empty() {
        return Err(CliError::Data(format!("{}: no truth.csv found", path.display())));
    }
    Ok(files.into_iter().map(|rel| path.join(rel)).collect())
}

type FrameKey = (String, u8, Eye, u32);

fn frame_map(records: &[SessionRecord]) -> std::collections::BTreeMap<FrameKey, FrameMeasurement> {
    records
        .iter()
        .flat_map(|r| {
            r.frames.iter().map(move |f| {
                ((r.meta.subject_id.clone(), r.meta.session, r.meta.eye, f.frame_idx), *f)
            })
        })
        .collect()
}

fn eval(a: &EvalArgs) -> Result<()> {
    if a.pred.is_none() && a.fits.is_none() {
        return Err(CliError::Usage(
            "eval needs --pred/--gt, --fits/--truth, or both".into(),
        ));
    }
    let mut report = format!("{REPORT_CSV_HEADER}\n");
    if let (Some(pred), Some(gt)) = (&a.pred, &a.gt) {
        let files = pgm_files(gt)?;
        if files.is_empty() {
            return Err(CliError::Data(format!("{}: no .pgm masks", gt.display())));
        }
        let mut preds = Vec::with_capacity(files.len());
        let mut gts = Vec::with_capacity(files.len());
        for rel in &files {
            let p = pred.join(rel);
            if !p.is_file() {
                return Err(CliError::Data(format!(
                    "{}: no prediction for ground-truth mask {}",
                    p.display(),
                    gt.join(rel).display()
                )));
            }
            let (pm, gm) = (read_mask(&p)?, read_mask(&gt.join(rel))?);
            if (pm.width(), pm.height()) != (gm.width(), gm.height()) {
                return Err(CliError::Data(format!(
                    "{}: {}x{} does not match ground truth {}x{}",
                    p.display(),
                    pm.width(),
                    pm.height(),
                    gm.width(),
                    gm.height()
                )));
            }
            preds.push(pm);
            gts.push(gm);
        }
        report.push_str(&segmentation_eval(&preds, &gts)?.csv_rows());
    }
    if let (Some(fits), Some(truth)) = (&a.fits, &a.truth) {
        let predicted = frame_map(&read_measurements(fits)?);
        let mut truth_recs = Vec::new();
        for f in truth_files(truth)? {
            truth_recs.extend(read_measurements(&f)?);
        }
        let truth_map = frame_map(&truth_recs);
        let errors: Vec<_> = truth_map
            .iter()
            .filter_map(|(k, gt)| predicted.get(k).map(|p| frame_error(p, gt)))
            .collect();
        if errors.is_empty() {
            return Err(CliError::Data(format!(
                "{}: no frames in common with {}",
                fits.display(),
                truth.display()
            )));
        }
        let missing = truth_map.len() - errors.len();
        if missing > 0 {
            eprintln!("warning: {missing} ground-truth frames have no fit");
        }
        report.push_str(&aggregate(&errors)?.csv_rows());
    }
    write_file_atomic(&a.out, report.as_bytes())
}

/// Records from a measurement CSV, a session directory, or a directory
/// holding measurement CSVs and/or session directories.
fn collect_records(path: &Path, cfg: &ConfigArgs) -> Result<Vec<SessionRecord>> {
    if path.is_file() {
        return read_measurements(path);
    }
    if !path.is_dir() {
        return Err(CliError::Data(format!("{}: no such file or directory", path.display())));
    }
    let mut records = Vec::new();
    let mut csvs: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    for csv in csvs {
        records.extend(read_measurements(&csv)?);
    }
    let dirs = session_dirs(path)?;
    if !dirs.is_empty() {
        let cfg = cfg.resolve()?;
        records.extend(load_sessions(path, &cfg)?.into_iter().map(|(_, r)| r));
    }
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no measurement CSVs or session directories found",
            path.display()
        )));
    }
    Ok(records)
}

fn grandmean(a: &GrandmeanArgs) -> Result<()> {
    let records = collect_records(&a.sessions, &a.config)?;
    let quantity = match a.quantity {
        QuantityArg::Radius => Quantity::Radius,
        QuantityArg::Ratio => Quantity::Ratio,
    };
    let pooling = match a.pooling {
        PoolingArg::PerEye => Pooling::PerEye,
        PoolingArg::PerSubject => Pooling::PerSubject,
    };
    let curves = cohort_curves_with(&records, &cohort_grid(), quantity, pooling)
        .map_err(|e| irisgauge_core::Error::in_file(&a.sessions, e))?;
    write_file_atomic(&a.out, curves.to_csv().as_bytes())
}

fn boxstats(a: &BoxstatsArgs) -> Result<()> {
    let records = collect_records(&a.sessions, &a.config)?;
    let sessions: Vec<u8> = match a.session {
        Some(s) => vec![s],
        None => {
            let mut s: Vec<u8> = records.iter().map(|r| r.meta.session).collect();
            s.sort_unstable();
            s.dedup();
            s
        }
    };
    let mut out = format!("{BOXSTATS_CSV_HEADER}\n");
    for s in sessions {
        let stats = session_boxstats(&records, s).map_err(|e| irisgauge_core::Error::in_file(&a.sessions, e))?;
        out.push_str(&stats.csv_row(s));
        out.push('\n');
    }
    match &a.out {
        Some(path) => write_file_atomic(path, out.as_bytes()),
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_size("320x240"), Ok((320, 240)));
        assert!(parse_size("0x5").is_err());
        assert!(parse_size("320").is_err());
        assert_eq!(parse_range("5,25").unwrap(), RadiusRange { min: 5.0, max: 25.0 });
        assert!(parse_range("25,5").is_err());
        assert_eq!(parse_session("4"), Ok(4));
        assert!(parse_session("5").is_err());
    }

    #[test]
    fn output_names() {
        assert_eq!(output_name("img_01.png"), "img_01.pgm");
        assert_eq!(output_name("dir/a b.jpg"), "a_b.pgm");
    }
}
