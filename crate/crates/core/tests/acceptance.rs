//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crlqa::criteria::{assess, is_accepted, CRITERIA_COUNT};
use crlqa::io::report::write_report;
use crlqa::metrics::{classification_scores, overlap_scores, ConfusionCounts};
use crlqa::phantom::{generate_phantom, sample_params, PhantomParams};
use crlqa::raster::{encode_image, encode_mask, Label, LabelMask};
use crlqa::{fit_crl_line, AssessConfig};

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crlqa"))
}

#[test]
fn phantom_oracle_agreement() {
    let start = Instant::now();
    let params = sample_params(1, 500);
    let cfg = AssessConfig::default();
    let mut per_criterion = [0usize; CRITERIA_COUNT];
    let (mut full, mut verdict_ok, mut margin_ok) = (0usize, 0usize, 0usize);
    let mut worst_angle = 0.0f64;
    for p in &params {
        let phantom = generate_phantom(p).unwrap();
        margin_ok += phantom.truth.margin_ok as usize;
        let report = assess(Some(&phantom.image), &phantom.mask, &cfg).unwrap();
        let got = report.vector();
        for (i, hit) in per_criterion.iter_mut().enumerate() {
            *hit += (got[i] == phantom.truth.criteria[i]) as usize;
        }
        if got == phantom.truth.criteria {
            full += 1;
            verdict_ok += (report.accepted == is_accepted(phantom.truth.total())) as usize;
        }
        worst_angle = worst_angle.max((report.crl_line.angle_deg - phantom.truth.expected_angle_deg).abs());
    }
    let elapsed = start.elapsed();
    let n = params.len() as f64;
    let worst = per_criterion.iter().map(|&c| c as f64 / n).fold(1.0, f64::min);
    let pass = margin_ok == params.len()
        && worst >= 0.995
        && full as f64 / n >= 0.98
        && verdict_ok == full
        && worst_angle <= 2.0
        && elapsed < Duration::from_secs(60);
    verdict(
        "phantom oracle agreement",
        pass,
        format!(
            "n={} margin_ok={margin_ok} per-criterion min {:.4} {per_criterion:?}, full-vector {:.4}, verdict {verdict_ok}/{full}, worst angle error {worst_angle:.3} deg, {:.1}s",
            params.len(),
            worst,
            full as f64 / n,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn angle_fidelity() {
    let mut errors = Vec::new();
    for theta in [-30.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0] {
        let params = PhantomParams {
            scene_rotation_deg: theta,
            scale: 0.6,
            ..PhantomParams::favorable(400, 300)
        };
        let phantom = generate_phantom(&params).unwrap();
        let line = fit_crl_line(&phantom.mask, 50).unwrap();
        errors.push((theta, (line.angle_deg - theta).abs()));
    }
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let detail = errors
        .iter()
        .map(|(t, e)| format!("{t}:{e:.3}"))
        .collect::<Vec<_>>()
        .join(" ");
    verdict("angle fidelity", worst <= 2.0, format!("max error {worst:.3} deg [{detail}]"));
}

#[test]
fn acceptance_rule_exhaustive() {
    let mut bad = 0;
    for bits in 0u32..128 {
        let passes = bits.count_ones() as u8;
        if is_accepted(passes) != (passes >= 4) {
            bad += 1;
        }
        let row = crlqa::io::spreadsheet::SpreadsheetRow::new(
            format!("c{bits}"),
            std::array::from_fn(|i| bits >> i & 1 == 1),
        )
        .unwrap();
        if row.accepted != (passes >= 4) || row.total != passes {
            bad += 1;
        }
    }
    verdict("acceptance rule", bad == 0, format!("128 combinations, {bad} mismatches"));
}

type PixelSet = HashSet<(u32, u32)>;

fn set_of(mask: &LabelMask, label: Label) -> PixelSet {
    let mut s = HashSet::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) == label {
                s.insert((x, y));
            }
        }
    }
    s
}

/// Set-arithmetic reference for dice, jaccard, precision, recall.
fn oracle(a: &PixelSet, b: &PixelSet) -> [f64; 4] {
    if a.is_empty() && b.is_empty() {
        return [1.0; 4];
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    let frac = |n: f64, d: f64| if d == 0.0 { 0.0 } else { n / d };
    [
        frac(2.0 * inter, (a.len() + b.len()) as f64),
        frac(inter, union),
        frac(inter, a.len() as f64),
        frac(inter, b.len() as f64),
    ]
}

fn random_mask(rng: &mut ChaCha8Rng) -> LabelMask {
    // vary density so that empty classes turn up regularly
    let density = rng.random_range(0.0..1.0f64).powi(3);
    LabelMask::from_fn(16, 16, |_, _| {
        if rng.random_bool(density) {
            Label::STRUCTURES[rng.random_range(0..4)]
        } else {
            Label::Background
        }
    })
    .unwrap()
}

#[test]
fn overlap_metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut identity_worst) = (0.0f64, 0.0f64);
    let (mut both_empty, mut one_empty) = (0, 0);
    for _ in 0..200 {
        let pred = random_mask(&mut rng);
        let truth = random_mask(&mut rng);
        for label in Label::STRUCTURES {
            let (a, b) = (set_of(&pred, label), set_of(&truth, label));
            both_empty += (a.is_empty() && b.is_empty()) as usize;
            one_empty += (a.is_empty() != b.is_empty()) as usize;
            let s = overlap_scores(&pred, &truth, label).unwrap();
            let want = oracle(&a, &b);
            for (got, want) in [s.dice, s.jaccard, s.precision, s.recall].iter().zip(want) {
                worst = worst.max((got - want).abs());
            }
            identity_worst = identity_worst.max((s.dice - 2.0 * s.jaccard / (1.0 + s.jaccard)).abs());
        }
    }
    verdict(
        "overlap metric oracle",
        worst < 1e-12 && identity_worst < 1e-12 && both_empty > 0 && one_empty > 0,
        format!(
            "200 pairs x 4 classes, max error {worst:.2e}, dice identity error {identity_worst:.2e}, both-empty {both_empty}, one-empty {one_empty}"
        ),
    );
}

#[test]
fn classification_metric_check() {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let s = classification_scores(&ConfusionCounts { tp: 2, fp: 1, fn_: 1, tn: 6 });
    let main = close(s.accuracy, 0.8) && close(s.precision, 2.0 / 3.0) && close(s.recall, 2.0 / 3.0) && close(s.f1, 2.0 / 3.0);
    let p = classification_scores(&ConfusionCounts { tp: 5, fp: 0, fn_: 0, tn: 5 });
    let perfect = [p.accuracy, p.precision, p.recall, p.f1].iter().all(|&v| close(v, 1.0));
    let n = classification_scores(&ConfusionCounts { tp: 0, fp: 0, fn_: 0, tn: 10 });
    let negative = close(n.accuracy, 1.0) && n.precision == 0.0 && n.recall == 0.0 && n.f1 == 0.0;
    verdict(
        "classification metric check",
        main && perfect && negative,
        format!("(2,1,1,6) -> {s:?}; perfect {perfect}; all-negative {negative}"),
    );
}

fn write_phantoms(dir: &Path, seed: u64, count: usize) {
    for (i, p) in sample_params(seed, count).iter().enumerate() {
        let phantom = generate_phantom(p).unwrap();
        fs::write(dir.join(format!("p{i:03}.img.png")), encode_image(&phantom.image)).unwrap();
        fs::write(dir.join(format!("p{i:03}.mask.png")), encode_mask(&phantom.mask)).unwrap();
    }
}

fn run_audit(dir: &Path, out: &Path, jobs: usize) -> std::process::Output {
    bin()
        .args(["audit", "--dir"])
        .arg(dir)
        .arg("--out-csv")
        .arg(out)
        .args(["--jobs", &jobs.to_string()])
        .output()
        .unwrap()
}

#[test]
fn determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir(&data).unwrap();
    write_phantoms(&data, 3, 24);

    let mut csvs = Vec::new();
    for (run, jobs) in [1, 8, 1, 8].into_iter().enumerate() {
        let out = tmp.path().join(format!("audit{run}.csv"));
        let status = run_audit(&data, &out, jobs);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        csvs.push(fs::read(out).unwrap());
    }
    let audit_same = csvs.windows(2).all(|w| w[0] == w[1]);

    let mut jsons = Vec::new();
    for run in 0..3 {
        let out = tmp.path().join(format!("report{run}.json"));
        let status = bin()
            .arg("assess")
            .arg("--image")
            .arg(data.join("p000.img.png"))
            .arg("--mask")
            .arg(data.join("p000.mask.png"))
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        jsons.push(fs::read(out).unwrap());
    }
    // in-process reports match the CLI output too
    let phantom = generate_phantom(&sample_params(3, 1)[0]).unwrap();
    let direct = write_report(&assess(Some(&phantom.image), &phantom.mask, &AssessConfig::default()).unwrap());
    let assess_same = jsons.windows(2).all(|w| w[0] == w[1]) && jsons[0] == direct.as_bytes();
    verdict(
        "determinism",
        audit_same && assess_same,
        format!("audit jobs 1/8 x2 identical: {audit_same}; assess JSON x3 identical: {assess_same}"),
    );
}

#[test]
fn performance() {
    let phantom = generate_phantom(&PhantomParams::favorable(640, 480)).unwrap();
    let cfg = AssessConfig::default();
    assess(Some(&phantom.image), &phantom.mask, &cfg).unwrap();
    let mut times = Vec::new();
    for _ in 0..9 {
        let t = Instant::now();
        assess(Some(&phantom.image), &phantom.mask, &cfg).unwrap();
        times.push(t.elapsed());
    }
    times.sort();
    let median = times[times.len() / 2];

    let tmp = tempfile::tempdir().unwrap();
    let seeds = tmp.path().join("seeds");
    let data = tmp.path().join("data");
    fs::create_dir(&seeds).unwrap();
    fs::create_dir(&data).unwrap();
    write_phantoms(&seeds, 5, 10);
    for i in 0..1000 {
        for kind in ["img", "mask"] {
            fs::copy(
                seeds.join(format!("p{:03}.{kind}.png", i % 10)),
                data.join(format!("item{i:04}.{kind}.png")),
            )
            .unwrap();
        }
    }
    let out = tmp.path().join("audit.csv");
    let t = Instant::now();
    let status = run_audit(&data, &out, 4);
    let batch = t.elapsed();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = fs::read_to_string(&out).unwrap().lines().count() - 1;

    verdict(
        "performance",
        median < Duration::from_millis(50) && batch < Duration::from_secs(30) && rows == 1000,
        format!(
            "640x480 assess median {:.2} ms; 1000-item audit at jobs 4 {:.2} s ({rows} rows)",
            median.as_secs_f64() * 1e3,
            batch.as_secs_f64()
        ),
    );
}
