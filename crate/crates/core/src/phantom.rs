//! Parametric synthetic fetus with analytically known criteria outcomes.
//!
//! The scene is described in a fetus-local frame: the crown-rump axis runs
//! along +x and local y follows the image convention (down). Rendering maps
//! every image pixel back into that frame, so rotation and scaling never
//! resample an already rasterized mask.
//!
//! Truth is derived from the parameters. A phantom is `margin_ok` only when
//! the rendered measurements also sit clear of every decision threshold, so
//! any correct evaluator must agree with the truth vector on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::criteria::{window_stats, AssessConfig, CaliperSide, CRITERIA_COUNT};
use crate::error::{Error, Result};
use crate::geometry::{fit_crl_line, horizontal_extent, CrlLine, Point};
use crate::raster::{
    adjacency_centroid, connected_components, largest_component, GrayImage, Label, LabelMask,
};

pub const FETUS_INTENSITY: f64 = 180.0;
pub const PALATE_INTENSITY: f64 = 230.0;
pub const BACKGROUND_INTENSITY: f64 = 20.0;

/// Side of the square neighborhood flattened by caliper degradation.
pub const DEGRADE_WINDOW: u32 = 30;

/// Half-angle of the fan the gap region grows in, around the ventral direction.
const GAP_HALF_ANGLE_DEG: f64 = 75.0;
/// Reach of the gap fan in local units.
const GAP_MAX_RADIUS: f64 = 0.45;

// Guard bands around the default decision thresholds.
const ANGLE_GUARD_DEG: f64 = 3.0;
const MEASURED_ANGLE_GUARD_DEG: f64 = 1.0;
const MAGNIFICATION_GUARD: f64 = 0.03;
const GAP_GUARD: f64 = 0.02;
/// Narrow gaps only need to clear the lower threshold by this much.
const GAP_GUARD_NARROW: f64 = 0.01;
const PALATE_GUARD_PX: usize = 10;
const CALIPER_STD_GUARD: f64 = 6.0;
const FACE_GUARD_PX: f64 = 3.0;
const BORDER_GUARD_PX: u32 = 2;

/// Ellipse in the fetus-local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: Point,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub rotation_deg: f64,
}

impl Ellipse {
    pub fn contains(&self, p: Point) -> bool {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let d = p - self.center;
        let u = d.x * c + d.y * s;
        let v = -d.x * s + d.y * c;
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2) <= 1.0
    }

    /// Half of the ellipse's extent along local x.
    pub fn half_width(&self) -> f64 {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        ((self.semi_major * c).powi(2) + (self.semi_minor * s).powi(2)).sqrt()
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_major * self.semi_minor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomParams {
    pub width: u32,
    pub height: u32,
    pub head: Ellipse,
    pub body: Ellipse,
    /// Target gap area as a fraction of rendered head area.
    pub flexion: f64,
    pub palate_present: bool,
    /// Palate disk radius in image pixels.
    pub palate_radius: f64,
    /// Five-pixel palate-labelled specks scattered in the head.
    pub palate_specks: u32,
    pub face_up: bool,
    pub scene_rotation_deg: f64,
    /// Target horizontal crown-rump extent as a fraction of the width.
    pub scale: f64,
    pub speckle_seed: u64,
    pub speckle_sigma: f64,
    pub degrade_left_caliper: bool,
    pub degrade_right_caliper: bool,
}

impl PhantomParams {
    /// A scene meeting every criterion with comfortable margins.
    pub fn favorable(width: u32, height: u32) -> Self {
        let (head, body) = fetus_ellipses(0.22, 0.165, 0.135, 0.075);
        Self {
            width,
            height,
            head,
            body,
            flexion: 0.10,
            palate_present: true,
            palate_radius: 6.0,
            palate_specks: 0,
            face_up: true,
            scene_rotation_deg: 5.0,
            scale: 0.75,
            speckle_seed: 1,
            speckle_sigma: 6.0,
            degrade_left_caliper: false,
            degrade_right_caliper: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::PhantomDegenerate(msg.to_string()));
        if self.width < 32 || self.height < 32 {
            return bad("image must be at least 32x32");
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return bad("scale must lie in (0, 1]");
        }
        if self.scene_rotation_deg.is_nan() || self.scene_rotation_deg.abs() >= 45.0 {
            return bad("scene rotation must lie in (-45, 45)");
        }
        if !(self.flexion >= 0.0 && self.flexion.is_finite()) {
            return bad("flexion must be a finite ratio >= 0");
        }
        if !(self.speckle_sigma >= 0.0 && self.speckle_sigma.is_finite()) {
            return bad("speckle sigma must be >= 0");
        }
        for e in [self.head, self.body] {
            if !(e.semi_minor > 0.0 && e.semi_major >= e.semi_minor) {
                return bad("ellipse semi-axes must satisfy a >= b > 0");
            }
        }
        if self.palate_present && (self.palate_radius.is_nan() || self.palate_radius < 1.0) {
            return bad("palate radius must be >= 1 px");
        }
        Ok(())
    }
}

/// Head and body ellipses for a fetus of unit crown-rump length.
///
/// `overlap` is how far the head reaches into the body along the axis.
pub fn fetus_ellipses(head_a: f64, head_b: f64, body_b: f64, overlap: f64) -> (Ellipse, Ellipse) {
    let body_a = (1.0 + overlap - 2.0 * head_a) / 2.0;
    let head = Ellipse {
        center: Point::new(head_a, 0.0),
        semi_major: head_a,
        semi_minor: head_b,
        rotation_deg: 0.0,
    };
    let body = Ellipse {
        center: Point::new(2.0 * head_a - overlap + body_a, 0.0),
        semi_major: body_a,
        semi_minor: body_b,
        rotation_deg: 0.0,
    };
    (head, body)
}

/// Analytic outcome for a phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomTruth {
    pub criteria: [bool; CRITERIA_COUNT],
    pub expected_angle_deg: f64,
    pub expected_magnification: f64,
    /// Every measured quantity sits outside its guard band.
    pub margin_ok: bool,
}

impl PhantomTruth {
    pub fn total(&self) -> u8 {
        self.criteria.iter().filter(|&&c| c).count() as u8
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    pub mask: LabelMask,
    pub truth: PhantomTruth,
    /// Line fitted on the rendered mask.
    pub line: CrlLine,
}

/// Image-to-local similarity transform of the scene.
struct Frame {
    scale_px: f64,
    cos: f64,
    sin: f64,
    local_center: Point,
    image_center: Point,
}

impl Frame {
    fn new(params: &PhantomParams) -> Self {
        let (h, b) = (params.head, params.body);
        let x_min = (h.center.x - h.half_width()).min(b.center.x - b.half_width());
        let x_max = (h.center.x + h.half_width()).max(b.center.x + b.half_width());
        let (sin, cos) = params.scene_rotation_deg.to_radians().sin_cos();
        let scale_px = params.scale * params.width as f64 / ((x_max - x_min) * cos);
        let (ah, ab) = (h.area(), b.area());
        let local_center = (h.center * ah + b.center * ab) * (1.0 / (ah + ab));
        Self {
            scale_px,
            cos,
            sin,
            local_center,
            image_center: Point::new(
                (params.width as f64 - 1.0) / 2.0,
                (params.height as f64 - 1.0) / 2.0,
            ),
        }
    }

    fn to_local(&self, p: Point) -> Point {
        let d = (p - self.image_center) * (1.0 / self.scale_px);
        self.local_center + Point::new(d.x * self.cos + d.y * self.sin, -d.x * self.sin + d.y * self.cos)
    }

    fn to_image(&self, q: Point) -> Point {
        let d = (q - self.local_center) * self.scale_px;
        self.image_center + Point::new(d.x * self.cos - d.y * self.sin, d.x * self.sin + d.y * self.cos)
    }

    /// Rotates a local direction into image space.
    fn direction_to_image(&self, v: Point) -> Point {
        Point::new(v.x * self.cos - v.y * self.sin, v.x * self.sin + v.y * self.cos)
    }
}

fn render_mask(params: &PhantomParams, frame: &Frame) -> Result<LabelMask> {
    let (w, h) = (params.width, params.height);
    let ventral = if params.face_up { -1.0 } else { 1.0 };
    let head = params.head;
    let palate_center = frame.to_image(
        head.center + Point::new(-0.35 * head.semi_major, ventral * 0.35 * head.semi_minor),
    );

    let mut mask = LabelMask::from_fn(w, h, |x, y| {
        let p = Point::new(x as f64, y as f64);
        let q = frame.to_local(p);
        if params.head.contains(q) {
            if params.palate_present && p.distance(palate_center) <= params.palate_radius {
                Label::Palate
            } else {
                Label::Head
            }
        } else if params.body.contains(q) {
            Label::Body
        } else {
            Label::Background
        }
    })?;

    for i in 0..params.palate_specks {
        let local = head.center
            + Point::new(
                (-0.45 + 0.3 * i as f64) * head.semi_major,
                -ventral * 0.3 * head.semi_minor,
            );
        let c = frame.to_image(local);
        let (cx, cy) = (c.x.round() as i64, c.y.round() as i64);
        for (dx, dy) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && mask.get(x as u32, y as u32) == Label::Head {
                mask.set(x as u32, y as u32, Label::Palate);
            }
        }
    }

    if params.flexion > 0.0 {
        add_gap(&mut mask, params, frame, ventral);
    }
    Ok(mask)
}

/// Grows the chin-chest gap from the ventral notch between head and body,
/// taking the background pixels nearest the notch inside a ventral fan.
fn add_gap(mask: &mut LabelMask, params: &PhantomParams, frame: &Frame, ventral: f64) {
    let (head, body) = (params.head, params.body);
    let neck_x = ((head.center.x + head.half_width()) + (body.center.x - body.half_width())) / 2.0;
    let mut notch = Point::new(neck_x, 0.0);
    let step = 1e-3;
    while head.contains(notch) || body.contains(notch) {
        notch.y += ventral * step;
    }
    let apex = frame.to_image(notch);
    let dir = frame.direction_to_image(Point::new(0.0, ventral));
    let cos_limit = GAP_HALF_ANGLE_DEG.to_radians().cos();
    let reach = GAP_MAX_RADIUS * frame.scale_px;

    let target = (params.flexion * mask.count(Label::Head) as f64).round() as usize;
    let (w, h) = mask.dims();
    let x0 = (apex.x - reach).floor().max(0.0) as u32;
    let x1 = ((apex.x + reach).ceil().max(0.0) as u32).min(w - 1);
    let y0 = (apex.y - reach).floor().max(0.0) as u32;
    let y1 = ((apex.y + reach).ceil().max(0.0) as u32).min(h - 1);

    let mut candidates = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if mask.get(x, y) != Label::Background {
                continue;
            }
            let d = Point::new(x as f64, y as f64) - apex;
            let dist = d.norm();
            if dist <= reach && d.dot(dir) >= dist * cos_limit {
                candidates.push((dist, y, x));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for &(_, y, x) in candidates.iter().take(target) {
        mask.set(x, y, Label::Gap);
    }
}

fn render_image(mask: &LabelMask, params: &PhantomParams) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(params.speckle_seed);
    let noise = (params.speckle_sigma > 0.0)
        .then(|| Normal::new(0.0, params.speckle_sigma).expect("sigma validated"));
    GrayImage::from_fn(mask.width(), mask.height(), |x, y| {
        let base = match mask.get(x, y) {
            Label::Head | Label::Body => FETUS_INTENSITY,
            Label::Palate => PALATE_INTENSITY,
            Label::Background | Label::Gap => BACKGROUND_INTENSITY,
        };
        let n = noise.as_ref().map_or(0.0, |d| d.sample(&mut rng));
        (base + n).round().clamp(0.0, 255.0) as u8
    })
    .expect("dimensions come from a valid mask")
}

/// Replaces the neighborhood of `center` by its rounded mean intensity.
fn flatten_neighborhood(image: &mut GrayImage, center: Point) {
    let stats = window_stats(image, center, DEGRADE_WINDOW);
    let fill = stats.mean.round() as u8;
    let (xs, ys) = crate::criteria::window_bounds(center, DEGRADE_WINDOW, image.dims());
    for y in ys {
        for x in xs.clone() {
            image.set(x, y, fill);
        }
    }
}

fn fully_inside(center: Point, size: u32, dims: (u32, u32)) -> bool {
    let (xs, ys) = crate::criteria::window_bounds(center, size, dims);
    xs.len() == size as usize && ys.len() == size as usize
}

/// Renders the phantom and derives its truth vector.
pub fn generate_phantom(params: &PhantomParams) -> Result<Phantom> {
    params.validate()?;
    let cfg = AssessConfig::default();
    let frame = Frame::new(params);
    let mask = render_mask(params, &frame)?;

    let neck = adjacency_centroid(&mask, Label::Head, Label::Body)
        .ok_or_else(|| Error::PhantomDegenerate("rendered head and body do not touch".into()))?;
    let line = fit_crl_line(&mask, cfg.min_component_area)
        .map_err(|e| Error::PhantomDegenerate(format!("cannot fit CRL line: {e}")))?;

    let mut image = render_image(&mask, params);
    let (left, right) = line.left_right();
    if params.degrade_left_caliper {
        flatten_neighborhood(&mut image, left);
    }
    if params.degrade_right_caliper {
        flatten_neighborhood(&mut image, right);
    }

    let criteria = [
        params.flexion >= cfg.gap_ratio_lo && params.flexion <= cfg.gap_ratio_hi,
        params.scene_rotation_deg.abs() <= cfg.angle_limit_deg,
        params.palate_present,
        // magnification truth comes from the rendered geometry, see below
        horizontal_extent(&line) / params.width as f64 > cfg.magnification_min,
        !params.degrade_left_caliper,
        !params.degrade_right_caliper,
        params.face_up,
    ];
    let expected_magnification = horizontal_extent(&line) / params.width as f64;

    // measurements for the guard bands
    let heads = connected_components(&mask, Label::Head);
    let head_area = largest_component(&heads).map_or(0, |c| c.area);
    let gap_area = mask.count(Label::Gap);
    let gap_ratio = gap_area as f64 / head_area.max(1) as f64;
    let palates = connected_components(&mask, Label::Palate);
    let palate_area = largest_component(&palates).map_or(0, |c| c.area);
    let reference = mask.label_centroid(Label::Gap).unwrap_or(neck);
    let face_offset = -line.signed_distance(reference); // positive above the line

    let gap_clear = |r: f64| {
        if criteria[0] {
            r >= cfg.gap_ratio_lo + GAP_GUARD && r <= cfg.gap_ratio_hi - GAP_GUARD
        } else {
            r <= cfg.gap_ratio_lo - GAP_GUARD_NARROW || r >= cfg.gap_ratio_hi + GAP_GUARD
        }
    };
    let angle_clear = |a: f64, guard: f64| {
        let limit = cfg.angle_limit_deg;
        if criteria[1] {
            a.abs() <= limit - guard
        } else {
            a.abs() >= limit + guard
        }
    };
    let palate_clear = if criteria[2] {
        palate_area >= cfg.palate_min_area + PALATE_GUARD_PX
    } else {
        palate_area + PALATE_GUARD_PX <= cfg.palate_min_area
    };
    let caliper_clear = |side: CaliperSide, pass: bool| {
        let p = side.endpoint(&line);
        let stats = window_stats(&image, p, cfg.caliper_window);
        let contrast_ok = if pass {
            stats.std >= cfg.caliper_std_min + CALIPER_STD_GUARD
        } else {
            stats.std <= cfg.caliper_std_min - CALIPER_STD_GUARD
        };
        contrast_ok && fully_inside(p, DEGRADE_WINDOW, image.dims())
    };
    let face_clear = if criteria[6] {
        face_offset >= FACE_GUARD_PX
    } else {
        face_offset <= -FACE_GUARD_PX
    };

    let margin_ok = gap_clear(params.flexion)
        && gap_clear(gap_ratio)
        && angle_clear(params.scene_rotation_deg, ANGLE_GUARD_DEG)
        && angle_clear(line.angle_deg, MEASURED_ANGLE_GUARD_DEG)
        && palate_clear
        && (expected_magnification - cfg.magnification_min).abs() >= MAGNIFICATION_GUARD
        && caliper_clear(CaliperSide::Left, criteria[4])
        && caliper_clear(CaliperSide::Right, criteria[5])
        && face_clear
        && scene_inside(&mask);

    Ok(Phantom {
        image,
        mask,
        truth: PhantomTruth {
            criteria,
            expected_angle_deg: params.scene_rotation_deg,
            expected_magnification,
            margin_ok,
        },
        line,
    })
}

/// No fetus pixel within the border guard of the image edge.
fn scene_inside(mask: &LabelMask) -> bool {
    let (w, h) = mask.dims();
    let g = BORDER_GUARD_PX;
    (0..h).all(|y| {
        (0..w).all(|x| {
            let inner = x >= g && y >= g && x + g < w && y + g < h;
            inner || matches!(mask.get(x, y), Label::Background | Label::Gap)
        })
    })
}

/// Frame size used by [`sample_params`].
pub const SAMPLE_WIDTH: u32 = 400;
pub const SAMPLE_HEIGHT: u32 = 300;

fn draw_params(rng: &mut ChaCha8Rng, wanted: &[bool; CRITERIA_COUNT]) -> PhantomParams {
    let head_a = rng.random_range(0.20..0.24);
    let head_b = rng.random_range(0.15..0.18);
    let body_b = rng.random_range(0.12..0.15);
    let overlap = rng.random_range(0.06..0.09);
    let (head, body) = fetus_ellipses(head_a, head_b, body_b, overlap);

    let flexion = if wanted[0] {
        rng.random_range(0.05..0.25)
    } else if rng.random_bool(0.5) {
        rng.random_range(0.003..0.008)
    } else {
        rng.random_range(0.34..0.50)
    };
    let magnitude = if wanted[1] {
        rng.random_range(0.0..11.0)
    } else {
        rng.random_range(19.0..32.0)
    };
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let palate_radius = rng.random_range(5.0..8.0);
    let palate_specks = if wanted[2] { 0 } else { rng.random_range(0..=3) };
    let scale = if wanted[3] {
        rng.random_range(0.66..0.80)
    } else {
        rng.random_range(0.40..0.54)
    };
    PhantomParams {
        width: SAMPLE_WIDTH,
        height: SAMPLE_HEIGHT,
        head,
        body,
        flexion,
        palate_present: wanted[2],
        palate_radius,
        palate_specks,
        face_up: wanted[6],
        scene_rotation_deg: sign * magnitude,
        scale,
        speckle_seed: rng.random(),
        speckle_sigma: rng.random_range(0.0..12.0),
        degrade_left_caliper: !wanted[4],
        degrade_right_caliper: !wanted[5],
    }
}

/// Deterministic, stratified parameter sets whose phantoms are all `margin_ok`.
///
/// Each criterion is drawn true or false with probability 1/2 independently;
/// draws whose rendering lands inside a guard band are rejected.
pub fn sample_params(seed: u64, count: usize) -> Vec<PhantomParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let wanted: [bool; CRITERIA_COUNT] = std::array::from_fn(|_| rng.random_bool(0.5));
        let params = draw_params(&mut rng, &wanted);
        if let Ok(p) = generate_phantom(&params) {
            if p.truth.margin_ok && p.truth.criteria == wanted {
                out.push(params);
            }
        }
    }
    out
}
