//! The seven view-quality criteria, the acceptance rule and the assembled
//! report.
//!
//! Every criterion reports a pass flag, the numbers it was decided on and a
//! one-sentence explanation, so a verdict can always be traced back to
//! measurable evidence in the mask or the scan.

use crate::error::{Error, Result};
use crate::geometry::{fit_crl_line_from, usable_component, horizontal_extent, side_of_line, CrlLine, Point, Side};
use crate::raster::{
    adjacency_centroid, connected_components, largest_component, Component, GrayImage, Label,
    LabelMask,
};

/// Number of criteria in a report.
pub const CRITERIA_COUNT: usize = 7;

/// Minimum number of passed criteria for a view to be accepted.
pub const ACCEPT_MIN_SCORE: u8 = 4;

/// Fraction of the nominal caliper window that must survive clipping.
pub const CALIPER_MIN_AREA_FRACTION: f64 = 0.25;

/// Thresholds used by the evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessConfig {
    /// Maximum |angle| of the CRL line, inclusive.
    pub angle_limit_deg: f64,
    /// The horizontal CRL extent must strictly exceed this fraction of the width.
    pub magnification_min: f64,
    /// Neutral band for gap area / head area.
    pub gap_ratio_lo: f64,
    pub gap_ratio_hi: f64,
    pub palate_min_area: usize,
    /// Side of the square caliper window in pixels.
    pub caliper_window: u32,
    /// Minimum intensity standard deviation inside a caliper window.
    pub caliper_std_min: f64,
    pub min_component_area: usize,
    /// Inverts the face-up convention of criterion 7.
    pub face_up_flip: bool,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            angle_limit_deg: 15.0,
            magnification_min: 0.60,
            gap_ratio_lo: 0.02,
            gap_ratio_hi: 0.30,
            palate_min_area: 25,
            caliper_window: 20,
            caliper_std_min: 12.0,
            min_component_area: 50,
            face_up_flip: false,
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<()> {
        fn bad(key: &str, message: &str) -> Result<()> {
            Err(Error::Config {
                key: key.to_string(),
                message: message.to_string(),
            })
        }
        if !(self.angle_limit_deg > 0.0 && self.angle_limit_deg < 90.0) {
            return bad("angle_limit_deg", "must lie in (0, 90)");
        }
        if !(self.magnification_min > 0.0 && self.magnification_min < 1.0) {
            return bad("magnification_min", "must lie in (0, 1)");
        }
        if !(self.gap_ratio_lo >= 0.0 && self.gap_ratio_lo.is_finite()) {
            return bad("gap_ratio_lo", "must be >= 0");
        }
        if !(self.gap_ratio_hi > self.gap_ratio_lo && self.gap_ratio_hi.is_finite()) {
            return bad("gap_ratio_hi", "must be greater than gap_ratio_lo");
        }
        if self.palate_min_area < 1 {
            return bad("palate_min_area", "must be >= 1");
        }
        if self.caliper_window < 3 {
            return bad("caliper_window", "must be >= 3");
        }
        if !(self.caliper_std_min >= 0.0 && self.caliper_std_min.is_finite()) {
            return bad("caliper_std_min", "must be >= 0");
        }
        Ok(())
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    /// 1..=7 in guideline order.
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    /// Set when the criterion could not be evaluated; implies `pass == false`.
    pub indeterminate: bool,
    /// Fixed, per-criterion list of named measurements.
    pub evidence: Vec<(&'static str, f64)>,
    pub explanation: String,
    /// Report-level warning raised while evaluating this criterion.
    pub warning: Option<String>,
}

impl CriterionResult {
    fn decided(id: u8, pass: bool, evidence: Vec<(&'static str, f64)>, explanation: String) -> Self {
        Self {
            id,
            name: criterion_name(id),
            pass,
            indeterminate: false,
            evidence,
            explanation,
            warning: None,
        }
    }

    pub fn evidence(&self, name: &str) -> Option<f64> {
        self.evidence.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

/// Stable machine name of criterion `id`.
pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "neutral_position",
        2 => "horizontal_orientation",
        3 => "fetal_palate",
        4 => "magnification",
        5 => "left_caliper",
        6 => "right_caliper",
        7 => "face_direction",
        _ => "unknown",
    }
}

/// `true` when a total score accepts the view (more than 3 of 7).
pub fn is_accepted(total_score: u8) -> bool {
    total_score >= ACCEPT_MIN_SCORE
}

/// Seven criterion outcomes plus the overall verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub results: Vec<CriterionResult>,
    pub total_score: u8,
    pub accepted: bool,
    pub crl_line: CrlLine,
    pub warnings: Vec<String>,
}

impl CriteriaReport {
    /// Assembles a report, deriving the score and verdict from `results`.
    pub fn new(results: Vec<CriterionResult>, crl_line: CrlLine, mut warnings: Vec<String>) -> Result<Self> {
        let ids: Vec<u8> = results.iter().map(|r| r.id).collect();
        if ids != (1..=CRITERIA_COUNT as u8).collect::<Vec<_>>() {
            return Err(Error::InvalidReport(format!(
                "report needs criteria 1..=7 in order, got {ids:?}"
            )));
        }
        for r in &results {
            if let Some(w) = &r.warning {
                if !warnings.contains(w) {
                    warnings.push(w.clone());
                }
            }
        }
        let total_score = results.iter().filter(|r| r.pass).count() as u8;
        Ok(Self {
            results,
            total_score,
            accepted: is_accepted(total_score),
            crl_line,
            warnings,
        })
    }

    pub fn criterion(&self, id: u8) -> &CriterionResult {
        &self.results[id as usize - 1]
    }

    /// Pass flags in criterion order.
    pub fn vector(&self) -> [bool; CRITERIA_COUNT] {
        std::array::from_fn(|i| self.results[i].pass)
    }
}

fn head_component(mask: &LabelMask, config: &AssessConfig) -> Result<Component> {
    structure(mask, Label::Head, config)
}

fn structure(mask: &LabelMask, label: Label, config: &AssessConfig) -> Result<Component> {
    usable_component(mask, label, config.min_component_area)
}

fn pct(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn neutral_position(head_area: usize, gap_area: usize, config: &AssessConfig) -> CriterionResult {
    let ratio = gap_area as f64 / head_area as f64;
    let pass = ratio >= config.gap_ratio_lo && ratio <= config.gap_ratio_hi;
    let band = format!("[{}, {}]", pct(config.gap_ratio_lo), pct(config.gap_ratio_hi));
    let explanation = if pass {
        format!("Chin-chest gap is {} of head area, inside the neutral band {band}.", pct(ratio))
    } else if ratio < config.gap_ratio_lo {
        format!("Chin-chest gap is {} of head area, below {band}: the fetus looks hyperflexed.", pct(ratio))
    } else {
        format!("Chin-chest gap is {} of head area, above {band}: the fetus looks hyperextended.", pct(ratio))
    };
    CriterionResult::decided(
        1,
        pass,
        vec![
            ("gap_area", gap_area as f64),
            ("head_area", head_area as f64),
            ("gap_ratio", ratio),
        ],
        explanation,
    )
}

/// Criterion 1: the chin-chest gap relative to head size must sit in the neutral band.
pub fn eval_neutral_position(mask: &LabelMask, config: &AssessConfig) -> Result<CriterionResult> {
    let head = head_component(mask, config)?;
    Ok(neutral_position(head.area, mask.count(Label::Gap), config))
}

/// Criterion 2: the CRL line lies within the angle limit of horizontal.
pub fn eval_horizontal_orientation(line: &CrlLine, config: &AssessConfig) -> CriterionResult {
    let angle = line.angle_deg;
    let pass = angle.abs() <= config.angle_limit_deg;
    let explanation = format!(
        "CRL line is {angle:.1} degrees from horizontal, {} the {:.1} degree limit.",
        if pass { "within" } else { "outside" },
        config.angle_limit_deg
    );
    CriterionResult::decided(2, pass, vec![("angle_deg", angle)], explanation)
}

fn fetal_palate(palate_area: usize, config: &AssessConfig) -> CriterionResult {
    let pass = palate_area >= config.palate_min_area;
    let explanation = if palate_area == 0 {
        "No palate region is segmented, so the view is not mid-sagittal.".to_string()
    } else if pass {
        format!("Palate region of {palate_area} px is clearly visible.")
    } else {
        format!(
            "Largest palate region has only {palate_area} px, below the {} px minimum.",
            config.palate_min_area
        )
    };
    CriterionResult::decided(3, pass, vec![("palate_area", palate_area as f64)], explanation)
}

/// Criterion 3: a palate region of sufficient size is present.
pub fn eval_fetal_palate(mask: &LabelMask, config: &AssessConfig) -> CriterionResult {
    let comps = connected_components(mask, Label::Palate);
    fetal_palate(largest_component(&comps).map_or(0, |c| c.area), config)
}

/// Criterion 4: the horizontal projection of the CRL line covers enough of the width.
pub fn eval_magnification(line: &CrlLine, image_width: u32, config: &AssessConfig) -> CriterionResult {
    let extent = horizontal_extent(line);
    let width = image_width.max(1) as f64;
    let ratio = extent / width;
    let pass = ratio > config.magnification_min;
    let explanation = format!(
        "CRL spans {} of the image width, {} the required more-than {}.",
        pct(ratio),
        if pass { "meeting" } else { "short of" },
        pct(config.magnification_min)
    );
    CriterionResult::decided(
        4,
        pass,
        vec![("extent_px", extent), ("image_width", width), ("ratio", ratio)],
        explanation,
    )
}

/// Which CRL endpoint a caliper criterion inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaliperSide {
    Left,
    Right,
}

impl CaliperSide {
    pub fn criterion_id(self) -> u8 {
        match self {
            CaliperSide::Left => 5,
            CaliperSide::Right => 6,
        }
    }

    pub fn endpoint(self, line: &CrlLine) -> Point {
        let (left, right) = line.left_right();
        match self {
            CaliperSide::Left => left,
            CaliperSide::Right => right,
        }
    }
}

/// Intensity statistics of a square window clipped to the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    /// Population standard deviation.
    pub std: f64,
    pub mean: f64,
    /// Pixels remaining after clipping.
    pub area: usize,
    pub nominal_area: usize,
}

/// Half-open pixel ranges of a `size`-wide square centered on `center`, clipped to `dims`.
pub fn window_bounds(center: Point, size: u32, dims: (u32, u32)) -> (std::ops::Range<u32>, std::ops::Range<u32>) {
    let clip = |c: f64, limit: u32| {
        let start = c.round() as i64 - (size / 2) as i64;
        let end = start + size as i64;
        (start.clamp(0, limit as i64) as u32)..(end.clamp(0, limit as i64) as u32)
    };
    (clip(center.x, dims.0), clip(center.y, dims.1))
}

pub fn window_stats(image: &GrayImage, center: Point, size: u32) -> WindowStats {
    let (xs, ys) = window_bounds(center, size, image.dims());
    let (mut n, mut s, mut s2) = (0u64, 0u64, 0u64);
    for y in ys {
        for x in xs.clone() {
            let v = image.get(x, y) as u64;
            n += 1;
            s += v;
            s2 += v * v;
        }
    }
    let (mean, std) = if n == 0 {
        (0.0, 0.0)
    } else {
        // n^2 * var = n*s2 - s^2, exact in integers
        let scaled = (n as u128 * s2 as u128 - s as u128 * s as u128) as f64;
        (s as f64 / n as f64, scaled.sqrt() / n as f64)
    };
    WindowStats {
        std,
        mean,
        area: n as usize,
        nominal_area: size as usize * size as usize,
    }
}

/// Criteria 5 and 6: local contrast around the left or right CRL endpoint.
pub fn eval_caliper_definition(
    image: &GrayImage,
    line: &CrlLine,
    side: CaliperSide,
    config: &AssessConfig,
) -> Result<CriterionResult> {
    if image.dims() != line.frame {
        return Err(Error::shape(line.frame, image.dims()));
    }
    let endpoint = side.endpoint(line);
    let stats = window_stats(image, endpoint, config.caliper_window);
    let enough_area = stats.area as f64 >= CALIPER_MIN_AREA_FRACTION * stats.nominal_area as f64;
    let pass = enough_area && stats.std >= config.caliper_std_min;
    let which = match side {
        CaliperSide::Left => "Left",
        CaliperSide::Right => "Right",
    };
    let explanation = if !enough_area {
        format!(
            "{which} caliper window keeps only {} of {} px inside the image.",
            stats.area, stats.nominal_area
        )
    } else {
        format!(
            "{which} caliper window intensity spread is {:.1}, {} the {:.1} needed for a clear endpoint.",
            stats.std,
            if pass { "meeting" } else { "below" },
            config.caliper_std_min
        )
    };
    Ok(CriterionResult::decided(
        side.criterion_id(),
        pass,
        vec![
            ("endpoint_x", endpoint.x),
            ("endpoint_y", endpoint.y),
            ("window_std", stats.std),
            ("window_area", stats.area as f64),
        ],
        explanation,
    ))
}

fn caliper_indeterminate(line: &CrlLine, side: CaliperSide) -> CriterionResult {
    let endpoint = side.endpoint(line);
    CriterionResult {
        id: side.criterion_id(),
        name: criterion_name(side.criterion_id()),
        pass: false,
        indeterminate: true,
        evidence: vec![
            ("endpoint_x", endpoint.x),
            ("endpoint_y", endpoint.y),
            ("window_std", 0.0),
            ("window_area", 0.0),
        ],
        explanation: "No scan was supplied, so endpoint contrast could not be measured.".to_string(),
        warning: None,
    }
}

/// Where the ventral reference point for criterion 7 came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReferenceSource {
    Gap,
    Neck,
    Midpoint,
}

fn face_direction(reference: Point, source: ReferenceSource, line: &CrlLine, config: &AssessConfig) -> CriterionResult {
    let side = side_of_line(reference, line);
    let pass = match side {
        Side::On => false,
        Side::Above => !config.face_up_flip,
        Side::Below => config.face_up_flip,
    };
    let from = match source {
        ReferenceSource::Gap => "chin-chest gap",
        ReferenceSource::Neck => "head-body junction",
        ReferenceSource::Midpoint => "head-body midpoint",
    };
    let explanation = match side {
        Side::On => format!("The {from} lies on the CRL line, so the face direction is ambiguous."),
        _ => format!(
            "The {from} lies {} the CRL line, so the face is looking {}.",
            if side == Side::Above { "above" } else { "below" },
            if pass { "up" } else { "down" }
        ),
    };
    let warning = match (side, source) {
        (Side::On, _) => Some("ambiguous face direction".to_string()),
        (_, ReferenceSource::Midpoint) => {
            Some("face direction from head-body midpoint; no gap or junction found".to_string())
        }
        _ => None,
    };
    let mut result = CriterionResult::decided(
        7,
        pass,
        vec![
            ("ref_x", reference.x),
            ("ref_y", reference.y),
            ("side", side.code() as f64),
        ],
        explanation,
    );
    result.warning = warning;
    result
}

fn ventral_reference(mask: &LabelMask, head: &Component, body: &Component) -> (Point, ReferenceSource) {
    if let Some(c) = mask.label_centroid(Label::Gap) {
        (c, ReferenceSource::Gap)
    } else if let Some(c) = adjacency_centroid(mask, Label::Head, Label::Body) {
        (c, ReferenceSource::Neck)
    } else {
        (head.centroid.midpoint(body.centroid), ReferenceSource::Midpoint)
    }
}

/// Criterion 7: the ventral reference point must lie above the CRL line.
///
/// The reference is the gap centroid, else the head-body junction, else the
/// midpoint of the head and body centroids.
pub fn eval_face_direction(mask: &LabelMask, line: &CrlLine, config: &AssessConfig) -> Result<CriterionResult> {
    let head = head_component(mask, config)?;
    let body = structure(mask, Label::Body, config)?;
    let (reference, source) = ventral_reference(mask, &head, &body);
    Ok(face_direction(reference, source, line, config))
}

/// Runs all seven criteria on a mask and, when available, its scan.
///
/// Without a scan the caliper criteria come back indeterminate.
pub fn assess(image: Option<&GrayImage>, mask: &LabelMask, config: &AssessConfig) -> Result<CriteriaReport> {
    if let Some(img) = image {
        if img.dims() != mask.dims() {
            return Err(Error::shape(mask.dims(), img.dims()));
        }
    }
    let head = head_component(mask, config)?;
    let body = structure(mask, Label::Body, config)?;
    let line = fit_crl_line_from(&head, &body, mask.dims())?;
    let mut warnings = Vec::new();

    let gap_area = mask.count(Label::Gap);
    let palate = connected_components(mask, Label::Palate);
    let palate_area = largest_component(&palate).map_or(0, |c| c.area);

    let (left, right) = match image {
        Some(img) => (
            eval_caliper_definition(img, &line, CaliperSide::Left, config)?,
            eval_caliper_definition(img, &line, CaliperSide::Right, config)?,
        ),
        None => {
            warnings.push("no image supplied; caliper criteria 5 and 6 are indeterminate".to_string());
            (
                caliper_indeterminate(&line, CaliperSide::Left),
                caliper_indeterminate(&line, CaliperSide::Right),
            )
        }
    };
    let (reference, source) = ventral_reference(mask, &head, &body);

    let results = vec![
        neutral_position(head.area, gap_area, config),
        eval_horizontal_orientation(&line, config),
        fetal_palate(palate_area, config),
        eval_magnification(&line, mask.width(), config),
        left,
        right,
        face_direction(reference, source, &line, config),
    ];
    CriteriaReport::new(results, line, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(a: (f64, f64), b: (f64, f64), frame: (u32, u32)) -> CrlLine {
        CrlLine::new(Point::new(a.0, a.1), Point::new(b.0, b.1), frame).unwrap()
    }

    fn cfg() -> AssessConfig {
        AssessConfig::default()
    }

    #[test]
    fn default_config_is_valid() {
        cfg().validate().unwrap();
        let bad = AssessConfig {
            gap_ratio_lo: 0.5,
            gap_ratio_hi: 0.3,
            ..cfg()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "gap_ratio_hi"));
        let bad = AssessConfig {
            caliper_window: 2,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn neutral_position_band() {
        assert!(!neutral_position(1000, 0, &cfg()).pass);
        let mid = neutral_position(1000, 100, &cfg());
        assert!(mid.pass);
        assert_abs_diff_eq!(mid.evidence("gap_ratio").unwrap(), 0.10);
        assert!(!neutral_position(1000, 500, &cfg()).pass);
        // both ends of the band are inclusive
        assert!(neutral_position(1000, 20, &cfg()).pass);
        assert!(neutral_position(1000, 300, &cfg()).pass);
    }

    #[test]
    fn neutral_position_needs_head() {
        let mask = LabelMask::empty(20, 20).unwrap();
        assert!(matches!(
            eval_neutral_position(&mask, &cfg()),
            Err(Error::MissingStructure(Label::Head))
        ));
    }

    #[test]
    fn orientation_limits() {
        let f = (400, 400);
        let at = |deg: f64| {
            let r = deg.to_radians();
            line((100.0, 100.0), (100.0 + 100.0 * r.cos(), 100.0 + 100.0 * r.sin()), f)
        };
        assert!(eval_horizontal_orientation(&at(0.0), &cfg()).pass);
        let exact = CrlLine {
            angle_deg: 15.0,
            ..at(15.0)
        };
        assert!(eval_horizontal_orientation(&exact, &cfg()).pass);
        assert!(!eval_horizontal_orientation(&at(-20.0), &cfg()).pass);
        let tight = AssessConfig {
            angle_limit_deg: 10.0,
            ..cfg()
        };
        assert!(!eval_horizontal_orientation(&at(12.0), &tight).pass);
    }

    #[test]
    fn palate_presence() {
        assert!(!fetal_palate(0, &cfg()).pass);
        assert!(fetal_palate(100, &cfg()).pass);
        let mut mask = LabelMask::empty(40, 40).unwrap();
        for (cx, cy) in [(5u32, 5u32), (20, 20), (30, 8)] {
            for (dx, dy) in [(0i32, 0i32), (1, 0), (-1, 0), (0, 1), (0, -1)] {
                mask.set((cx as i32 + dx) as u32, (cy as i32 + dy) as u32, Label::Palate);
            }
        }
        let r = eval_fetal_palate(&mask, &cfg());
        assert!(!r.pass);
        assert_eq!(r.evidence("palate_area"), Some(5.0));
    }

    #[test]
    fn magnification_is_strict() {
        let l = line((100.0, 50.0), (484.0, 50.0), (640, 480));
        let r = eval_magnification(&l, 640, &cfg());
        assert_abs_diff_eq!(r.evidence("ratio").unwrap(), 0.6);
        assert!(!r.pass);
        let l = line((100.0, 50.0), (500.0, 50.0), (640, 480));
        let r = eval_magnification(&l, 640, &cfg());
        assert_abs_diff_eq!(r.evidence("ratio").unwrap(), 0.625);
        assert!(r.pass);
        let v = line((100.0, 0.0), (100.0, 90.0), (640, 480));
        assert!(!eval_magnification(&v, 640, &cfg()).pass);
    }

    #[test]
    fn caliper_uniform_window_fails() {
        let img = GrayImage::filled(100, 100, 0).unwrap();
        let l = line((30.0, 50.0), (70.0, 50.0), (100, 100));
        let r = eval_caliper_definition(&img, &l, CaliperSide::Left, &cfg()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.evidence("window_std"), Some(0.0));
        assert_eq!(r.evidence("window_area"), Some(400.0));
        assert_eq!(r.evidence("endpoint_x"), Some(30.0));
    }

    #[test]
    fn caliper_checkerboard_passes() {
        let img = GrayImage::from_fn(100, 100, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap();
        let l = line((70.0, 50.0), (30.0, 50.0), (100, 100));
        let r = eval_caliper_definition(&img, &l, CaliperSide::Right, &cfg()).unwrap();
        assert_eq!(r.id, 6);
        assert_eq!(r.evidence("endpoint_x"), Some(70.0));
        assert_abs_diff_eq!(r.evidence("window_std").unwrap(), 127.5, epsilon = 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn caliper_corner_window_is_still_evaluated() {
        let img = GrayImage::from_fn(100, 100, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap();
        let l = line((0.0, 0.0), (60.0, 10.0), (100, 100));
        let r = eval_caliper_definition(&img, &l, CaliperSide::Left, &cfg()).unwrap();
        assert_eq!(r.evidence("window_area"), Some(100.0));
        assert!(r.pass);
    }

    #[test]
    fn caliper_shape_mismatch() {
        let img = GrayImage::filled(50, 50, 0).unwrap();
        let l = line((10.0, 10.0), (40.0, 10.0), (60, 50));
        assert!(matches!(
            eval_caliper_definition(&img, &l, CaliperSide::Left, &cfg()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn face_direction_sides() {
        let l = line((10.0, 50.0), (110.0, 50.0), (200, 100));
        let up = face_direction(Point::new(60.0, 30.0), ReferenceSource::Gap, &l, &cfg());
        assert!(up.pass);
        assert_eq!(up.evidence("side"), Some(1.0));
        let down = face_direction(Point::new(60.0, 70.0), ReferenceSource::Gap, &l, &cfg());
        assert!(!down.pass);
        assert_eq!(down.evidence("side"), Some(-1.0));
        let on = face_direction(Point::new(60.0, 50.0), ReferenceSource::Gap, &l, &cfg());
        assert!(!on.pass);
        assert_eq!(on.warning.as_deref(), Some("ambiguous face direction"));
        let flipped = AssessConfig {
            face_up_flip: true,
            ..cfg()
        };
        assert!(face_direction(Point::new(60.0, 70.0), ReferenceSource::Gap, &l, &flipped).pass);
        assert!(!face_direction(Point::new(60.0, 50.0), ReferenceSource::Gap, &l, &flipped).pass);
    }

    #[test]
    fn report_verdict_follows_score() {
        let l = line((0.0, 0.0), (10.0, 0.0), (20, 20));
        let make = |passes: usize| {
            let results = (1..=7u8)
                .map(|id| CriterionResult::decided(id, (id as usize) <= passes, vec![], String::new()))
                .collect();
            CriteriaReport::new(results, l, vec![]).unwrap()
        };
        assert!(make(4).accepted);
        assert_eq!(make(4).total_score, 4);
        assert!(!make(3).accepted);
    }

    #[test]
    fn report_rejects_wrong_ids() {
        let l = line((0.0, 0.0), (10.0, 0.0), (20, 20));
        let results = (1..=6u8)
            .map(|id| CriterionResult::decided(id, true, vec![], String::new()))
            .collect();
        assert!(CriteriaReport::new(results, l, vec![]).is_err());
    }
}
