//! Visual overlay of a report on its scan.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};

use crate::criteria::{window_bounds, CaliperSide, CriteriaReport};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::{GrayImage, Label, LabelMask};

pub const TINT_OPACITY: f64 = 0.4;
pub const LINE_COLOR: [u8; 3] = [255, 255, 255];
pub const WINDOW_COLOR: [u8; 3] = [0, 255, 255];
pub const REFERENCE_COLOR: [u8; 3] = [255, 0, 255];

pub fn tint(label: Label) -> Option<[u8; 3]> {
    match label {
        Label::Background => None,
        Label::Head => Some([255, 0, 0]),
        Label::Body => Some([0, 0, 255]),
        Label::Palate => Some([255, 255, 0]),
        Label::Gap => Some([0, 255, 0]),
    }
}

fn put(canvas: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < canvas.width() && (y as u32) < canvas.height() {
        canvas.put_pixel(x as u32, y as u32, Rgb(color));
    }
}

/// Bresenham segment between two pixel centers.
fn draw_line(canvas: &mut RgbImage, a: Point, b: Point, color: [u8; 3]) {
    let (mut x0, mut y0) = (a.x.round() as i64, a.y.round() as i64);
    let (x1, y1) = (b.x.round() as i64, b.y.round() as i64);
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        put(canvas, x0, y0, color);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn outline(canvas: &mut RgbImage, xs: std::ops::Range<u32>, ys: std::ops::Range<u32>, color: [u8; 3]) {
    if xs.is_empty() || ys.is_empty() {
        return;
    }
    let (x0, x1, y0, y1) = (xs.start as i64, xs.end as i64 - 1, ys.start as i64, ys.end as i64 - 1);
    for x in x0..=x1 {
        put(canvas, x, y0, color);
        put(canvas, x, y1, color);
    }
    for y in y0..=y1 {
        put(canvas, x0, y, color);
        put(canvas, x1, y, color);
    }
}

fn cross(canvas: &mut RgbImage, p: Point, color: [u8; 3]) {
    let (cx, cy) = (p.x.round() as i64, p.y.round() as i64);
    for d in -3..=3 {
        put(canvas, cx + d, cy, color);
        put(canvas, cx, cy + d, color);
    }
}

/// Draws the tinted mask, caliper windows, ventral reference and CRL line.
pub fn render_overlay_rgb(image: &GrayImage, mask: &LabelMask, report: &CriteriaReport, caliper_window: u32) -> Result<RgbImage> {
    if image.dims() != mask.dims() {
        return Err(Error::shape(mask.dims(), image.dims()));
    }
    let (w, h) = image.dims();
    let mut canvas = RgbImage::from_fn(w, h, |x, y| {
        let g = image.get(x, y) as f64;
        match tint(mask.get(x, y)) {
            None => Rgb([g as u8; 3]),
            Some(c) => Rgb(c.map(|t| ((1.0 - TINT_OPACITY) * g + TINT_OPACITY * t as f64).round() as u8)),
        }
    });
    let line = &report.crl_line;
    for side in [CaliperSide::Left, CaliperSide::Right] {
        let (xs, ys) = window_bounds(side.endpoint(line), caliper_window, (w, h));
        outline(&mut canvas, xs, ys, WINDOW_COLOR);
    }
    let face = report.criterion(7);
    if let (Some(x), Some(y)) = (face.evidence("ref_x"), face.evidence("ref_y")) {
        cross(&mut canvas, Point::new(x, y), REFERENCE_COLOR);
    }
    draw_line(&mut canvas, line.crown, line.rump, LINE_COLOR);
    Ok(canvas)
}

/// Overlay encoded as an RGB PNG.
pub fn render_overlay(image: &GrayImage, mask: &LabelMask, report: &CriteriaReport, caliper_window: u32) -> Result<Vec<u8>> {
    let canvas = render_overlay_rgb(image, mask, report, caliper_window)?;
    let mut out = Cursor::new(Vec::new());
    canvas
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out.into_inner())
}
