//! Command-line surface. Data goes to files; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 a processing error on some item, 2 usage or
//! configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::criteria::{assess, CRITERIA_COUNT};
use crate::error::{Error, Result};
use crate::io::config::{load_config, RunConfig};
use crate::io::overlay::render_overlay;
use crate::io::report::write_report;
use crate::io::spreadsheet::{read_spreadsheet, validate_image_id, write_spreadsheet, SpreadsheetRow};
use crate::metrics::{aggregate_overlap, classification_scores, confusion_counts, overlap_scores};
use crate::phantom::{generate_phantom, sample_params};
use crate::raster::{decode_image, decode_mask, encode_image, encode_mask, Label};

pub const JOBS_ENV: &str = "CRLQA_JOBS";
pub const IMAGE_SUFFIX: &str = ".img.png";
pub const MASK_SUFFIX: &str = ".mask.png";
pub const OVERLAY_SUFFIX: &str = ".overlay.png";

#[derive(Debug, Parser)]
#[command(name = "crlqa", version, about = "Quality assessment of crown-rump-length ultrasound views")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assess one image/mask pair and write a JSON report.
    Assess(AssessArgs),
    /// Assess every `<id>.img.png` + `<id>.mask.png` pair in a directory.
    Audit(AuditArgs),
    /// Segmentation or criteria-classification metrics.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Synthetic phantoms with known criteria.
    #[command(subcommand)]
    Phantom(PhantomCommand),
    /// Run the built-in phantom consistency check.
    Selftest,
}

#[derive(Debug, Args)]
struct AssessArgs {
    /// Grayscale scan; without it the caliper criteria are indeterminate.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write an RGB overlay PNG here (requires --image).
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_csv: PathBuf,
    /// Worker threads (falls back to the config file, then CRLQA_JOBS, then 1).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum MetricsCommand {
    /// Per-class Dice/Jaccard/precision/recall, mean and std over mask pairs.
    Seg {
        #[arg(long)]
        pred_dir: PathBuf,
        #[arg(long)]
        truth_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-criterion accuracy/precision/recall/F1 between two spreadsheets.
    Cls {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PhantomCommand {
    /// Write image/mask pairs plus `truth.csv`.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            other => Failure::Failed(other.to_string()),
        }
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Assess(args) => cmd_assess(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Metrics(MetricsCommand::Seg {
            pred_dir,
            truth_dir,
            out,
        }) => cmd_metrics_seg(&pred_dir, &truth_dir, &out),
        Command::Metrics(MetricsCommand::Cls { pred, truth, out }) => cmd_metrics_cls(&pred, &truth, &out),
        Command::Phantom(PhantomCommand::Gen {
            seed,
            count,
            out_dir,
        }) => cmd_phantom_gen(seed, count, &out_dir),
        Command::Selftest => cmd_selftest(),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_run_config(path: Option<&Path>) -> std::result::Result<RunConfig, Failure> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let bytes = read(p).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Failure::Usage(format!("{}: config is not UTF-8", p.display())))?;
            load_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_assess(args: AssessArgs) -> CliResult {
    let cfg = load_run_config(args.config.as_deref())?;
    if args.overlay.is_some() && args.image.is_none() {
        return Err(Failure::Usage("--overlay requires --image".into()));
    }
    let mask = decode_mask(&read(&args.mask)?).map_err(|e| Error::Decode(format!("{}: {e}", args.mask.display())))?;
    let image = match &args.image {
        Some(p) => Some(decode_image(&read(p)?).map_err(|e| Error::Decode(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let report = assess(image.as_ref(), &mask, &cfg.assess)?;
    write(&args.out, write_report(&report))?;
    if let (Some(path), Some(img)) = (&args.overlay, &image) {
        write(path, render_overlay(img, &mask, &report, cfg.assess.caliper_window)?)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

fn resolve_jobs(flag: Option<usize>, cfg: &RunConfig) -> std::result::Result<usize, Failure> {
    if let Some(n) = flag.or(cfg.jobs) {
        return if n == 0 {
            Err(Failure::Usage("--jobs must be >= 1".into()))
        } else {
            Ok(n)
        };
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::Usage(format!("{JOBS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(1),
    }
}

/// Image ids of every `<id>.img.png` in `dir`, sorted.
fn audit_ids(dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(name) = entry.file_name().to_str() {
            if let Some(id) = name.strip_suffix(IMAGE_SUFFIX) {
                ids.push(id.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

struct AuditItem {
    row: SpreadsheetRow,
    overlay: Option<Vec<u8>>,
}

fn audit_one(dir: &Path, id: &str, cfg: &RunConfig) -> Result<AuditItem> {
    validate_image_id(id)?;
    let image = decode_image(&read(&dir.join(format!("{id}{IMAGE_SUFFIX}")))?)?;
    let mask = decode_mask(&read(&dir.join(format!("{id}{MASK_SUFFIX}")))?)?;
    let report = assess(Some(&image), &mask, &cfg.assess)?;
    let overlay = if cfg.overlay {
        Some(render_overlay(&image, &mask, &report, cfg.assess.caliper_window)?)
    } else {
        None
    };
    Ok(AuditItem {
        row: SpreadsheetRow::from_report(id, &report)?,
        overlay,
    })
}

fn cmd_audit(args: AuditArgs) -> CliResult {
    let cfg = load_run_config(args.config.as_deref())?;
    let jobs = resolve_jobs(args.jobs, &cfg)?;
    let ids = audit_ids(&args.dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let results: Vec<(String, Result<AuditItem>)> = pool.install(|| {
        ids.par_iter()
            .map(|id| (id.clone(), audit_one(&args.dir, id, &cfg)))
            .collect()
    });

    let overlay_dir = args
        .out_csv
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (id, result) in results {
        match result {
            Ok(item) => {
                if let Some(png) = item.overlay {
                    write(&overlay_dir.join(format!("{id}{OVERLAY_SUFFIX}")), png)?;
                }
                rows.push(item.row);
            }
            Err(e) => {
                failures += 1;
                eprintln!("failed: {id}: {e}");
            }
        }
    }
    write(&args.out_csv, write_spreadsheet(&rows)?)?;
    let accepted = rows.iter().filter(|r| r.accepted).count();
    eprintln!("accepted {accepted}/{}", rows.len());
    if failures > 0 {
        eprintln!("{failures} item(s) failed");
        Ok(1)
    } else {
        Ok(0)
    }
}

fn is_raster(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "pgm")
    )
}

fn cmd_metrics_seg(pred_dir: &Path, truth_dir: &Path, out: &Path) -> CliResult {
    let mut names = Vec::new();
    for entry in fs::read_dir(pred_dir).map_err(|e| Error::io(pred_dir, e))? {
        let path = entry.map_err(|e| Error::io(pred_dir, e))?.path();
        if path.is_file() && is_raster(&path) {
            names.push(path.file_name().expect("file has a name").to_owned());
        }
    }
    names.sort();
    let mut per_class: Vec<Vec<_>> = vec![Vec::new(); Label::STRUCTURES.len()];
    let mut failures = 0usize;
    for name in &names {
        let pair = (|| -> Result<_> {
            let pred = decode_mask(&read(&pred_dir.join(name))?)?;
            let truth = decode_mask(&read(&truth_dir.join(name))?)?;
            Label::STRUCTURES
                .iter()
                .map(|&l| overlap_scores(&pred, &truth, l))
                .collect::<Result<Vec<_>>>()
        })();
        match pair {
            Ok(scores) => {
                for (bucket, s) in per_class.iter_mut().zip(scores) {
                    bucket.push(s);
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("failed: {}: {e}", name.to_string_lossy());
            }
        }
    }
    if per_class[0].is_empty() {
        return Err(Failure::Failed(format!(
            "no comparable mask pairs between {} and {}",
            pred_dir.display(),
            truth_dir.display()
        )));
    }
    let mut csv = String::from(
        "label,n,dice_mean,dice_std,jaccard_mean,jaccard_std,precision_mean,precision_std,recall_mean,recall_std\n",
    );
    for scores in &per_class {
        let a = aggregate_overlap(scores)?;
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            a.label, a.n, a.dice.mean, a.dice.std, a.jaccard.mean, a.jaccard.std,
            a.precision.mean, a.precision.std, a.recall.mean, a.recall.std
        ));
    }
    write(out, csv)?;
    Ok(if failures > 0 { 1 } else { 0 })
}

fn read_rows(path: &Path) -> Result<Vec<SpreadsheetRow>> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        line: 1,
        message: format!("{}: not UTF-8", path.display()),
    })?;
    read_spreadsheet(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn cmd_metrics_cls(pred: &Path, truth: &Path, out: &Path) -> CliResult {
    let pred_rows = read_rows(pred)?;
    let truth_rows = read_rows(truth)?;
    let truth_by_id: std::collections::BTreeMap<&str, &SpreadsheetRow> =
        truth_rows.iter().map(|r| (r.image_id.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let mut failures = 0usize;
    for row in &pred_rows {
        match truth_by_id.get(row.image_id.as_str()) {
            Some(t) => pairs.push((row, *t)),
            None => {
                failures += 1;
                eprintln!("failed: {}: not in {}", row.image_id, truth.display());
            }
        }
    }
    let pred_ids: std::collections::BTreeSet<&str> = pred_rows.iter().map(|r| r.image_id.as_str()).collect();
    for id in truth_by_id.keys().filter(|id| !pred_ids.contains(*id)) {
        failures += 1;
        eprintln!("failed: {id}: not in {}", pred.display());
    }
    if pairs.is_empty() {
        return Err(Failure::Failed("no image ids in common".into()));
    }

    let mut csv = String::from("criterion,tp,fp,fn,tn,accuracy,precision,recall,f1\n");
    let columns = (0..CRITERIA_COUNT)
        .map(|i| (format!("c{}", i + 1), Box::new(move |r: &SpreadsheetRow| r.criteria[i]) as Box<dyn Fn(&SpreadsheetRow) -> bool>))
        .chain(std::iter::once(("accepted".to_string(), Box::new(|r: &SpreadsheetRow| r.accepted) as Box<dyn Fn(&SpreadsheetRow) -> bool>)));
    for (name, get) in columns {
        let p: Vec<bool> = pairs.iter().map(|(p, _)| get(p)).collect();
        let t: Vec<bool> = pairs.iter().map(|(_, t)| get(t)).collect();
        let c = confusion_counts(&p, &t)?;
        let s = classification_scores(&c);
        csv.push_str(&format!(
            "{name},{},{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
            c.tp, c.fp, c.fn_, c.tn, s.accuracy, s.precision, s.recall, s.f1
        ));
    }
    write(out, csv)?;
    Ok(if failures > 0 { 1 } else { 0 })
}

pub fn phantom_id(index: usize) -> String {
    format!("phantom_{index:04}")
}

fn cmd_phantom_gen(seed: u64, count: usize, out_dir: &Path) -> CliResult {
    if count == 0 {
        return Err(Failure::Usage("--count must be >= 1".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let params = sample_params(seed, count);
    let mut truth = Vec::with_capacity(count);
    for (i, p) in params.iter().enumerate() {
        let phantom = generate_phantom(p)?;
        let id = phantom_id(i);
        write(&out_dir.join(format!("{id}{IMAGE_SUFFIX}")), encode_image(&phantom.image))?;
        write(&out_dir.join(format!("{id}{MASK_SUFFIX}")), encode_mask(&phantom.mask))?;
        truth.push(SpreadsheetRow::new(id, phantom.truth.criteria)?);
    }
    write(&out_dir.join("truth.csv"), write_spreadsheet(&truth)?)?;
    eprintln!("wrote {count} phantoms to {}", out_dir.display());
    Ok(0)
}

pub const SELFTEST_SEED: u64 = 20_240_601;
pub const SELFTEST_COUNT: usize = 24;

fn cmd_selftest() -> CliResult {
    let params = sample_params(SELFTEST_SEED, SELFTEST_COUNT);
    let mut disagreements = 0usize;
    for (i, p) in params.iter().enumerate() {
        let phantom = generate_phantom(p)?;
        let report = assess(Some(&phantom.image), &phantom.mask, &Default::default())?;
        if report.vector() != phantom.truth.criteria {
            disagreements += 1;
            eprintln!(
                "selftest: {} expected {:?}, got {:?}",
                phantom_id(i),
                phantom.truth.criteria,
                report.vector()
            );
        }
    }
    eprintln!(
        "selftest: {}/{} phantoms agree with their truth vectors",
        params.len() - disagreements,
        params.len()
    );
    Ok(if disagreements == 0 { 0 } else { 1 })
}
