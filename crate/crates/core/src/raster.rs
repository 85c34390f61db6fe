//! Raster data model: grayscale scans, indexed label masks, connected
//! components and inter-class boundary extraction.
//!
//! Coordinates are pixel centers with the origin at the top-left corner,
//! x growing rightward and y growing downward.

use std::fmt;
use std::io::Cursor;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Segmentation class stored in a [`LabelMask`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    Background = 0,
    Head = 1,
    Body = 2,
    Palate = 3,
    /// Chin-to-chest gap region.
    Gap = 4,
}

impl Label {
    pub const ALL: [Label; 5] = [
        Label::Background,
        Label::Head,
        Label::Body,
        Label::Palate,
        Label::Gap,
    ];

    /// Foreground classes, i.e. everything that can form a component.
    pub const STRUCTURES: [Label; 4] = [Label::Head, Label::Body, Label::Palate, Label::Gap];

    pub fn from_u8(value: u8) -> Option<Label> {
        Label::ALL.get(value as usize).copied()
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Background => "background",
            Label::Head => "head",
            Label::Body => "body",
            Label::Palate => "palate",
            Label::Gap => "gap",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_dims(width: u32, height: u32, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if len != width as usize * height as usize {
        return Err(Error::InvalidRaster(format!(
            "{width}x{height} raster needs {} samples, got {len}",
            width as usize * height as usize
        )));
    }
    Ok(())
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }
}

/// Indexed segmentation mask, one [`Label`] per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<Label>,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, labels: Vec<Label>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// All-background mask.
    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![Label::Background; width as usize * height as usize],
        )
    }

    /// Builds a mask from raw class ids, rejecting ids outside `0..=4`.
    pub fn from_raw(width: u32, height: u32, raw: &[u8]) -> Result<Self> {
        check_dims(width, height, raw.len())?;
        let labels = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                Label::from_u8(v).ok_or(Error::InvalidLabel {
                    value: v,
                    x: (i % width as usize) as u32,
                    y: (i / width as usize) as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, labels)
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Label) -> Result<Self> {
        let mut labels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> Label {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, label: Label) {
        self.labels[y as usize * self.width as usize + x as usize] = label;
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.as_u8()).collect()
    }

    /// Number of pixels carrying `label`.
    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Centroid of all pixels carrying `label`, if any.
    pub fn label_centroid(&self, label: Label) -> Option<Point> {
        let (mut n, mut sx, mut sy) = (0u64, 0u64, 0u64);
        for (i, &l) in self.labels.iter().enumerate() {
            if l == label {
                n += 1;
                sx += (i % self.width as usize) as u64;
                sy += (i / self.width as usize) as u64;
            }
        }
        (n > 0).then(|| Point::new(sx as f64 / n as f64, sy as f64 / n as f64))
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BBox {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min as f64
            && p.x <= self.x_max as f64
            && p.y >= self.y_min as f64
            && p.y <= self.y_max as f64
    }
}

/// Maximal 8-connected region of one label.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: Label,
    /// Member pixels in row-major order.
    pub pixels: Vec<(u32, u32)>,
    pub area: usize,
    pub centroid: Point,
    pub bbox: BBox,
}

impl Component {
    fn from_pixels(label: Label, mut pixels: Vec<(u32, u32)>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let mut bbox = BBox {
            x_min: u32::MAX,
            y_min: u32::MAX,
            x_max: 0,
            y_max: 0,
        };
        let (mut sx, mut sy) = (0u64, 0u64);
        for &(x, y) in &pixels {
            bbox.x_min = bbox.x_min.min(x);
            bbox.y_min = bbox.y_min.min(y);
            bbox.x_max = bbox.x_max.max(x);
            bbox.y_max = bbox.y_max.max(y);
            sx += x as u64;
            sy += y as u64;
        }
        let area = pixels.len();
        Component {
            label,
            centroid: Point::new(sx as f64 / area as f64, sy as f64 / area as f64),
            pixels,
            area,
            bbox,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.pixels
            .iter()
            .map(|&(x, y)| Point::new(x as f64, y as f64))
    }
}

/// Splits the pixels carrying `label` into maximal 8-connected components.
///
/// Output is sorted by descending area; equal areas are ordered by the
/// `(y_min, x_min)` corner of their bounding boxes.
pub fn connected_components(mask: &LabelMask, label: Label) -> Vec<Component> {
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut seen = vec![false; mask.labels.len()];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for start in 0..mask.labels.len() {
        if seen[start] || mask.labels[start] != label {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            pixels.push((x as u32, y as u32));
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if !seen[j] && mask.labels[j] == label {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        components.push(Component::from_pixels(label, pixels));
    }

    components.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then((a.bbox.y_min, a.bbox.x_min).cmp(&(b.bbox.y_min, b.bbox.x_min)))
    });
    components
}

/// First (largest) component of a list produced by [`connected_components`].
pub fn largest_component(components: &[Component]) -> Option<&Component> {
    components.first()
}

/// Centroid of the `label_a` pixels that are 4-adjacent to at least one
/// `label_b` pixel.
pub fn adjacency_centroid(mask: &LabelMask, label_a: Label, label_b: Label) -> Option<Point> {
    let (w, h) = (mask.width, mask.height);
    let (mut n, mut sx, mut sy) = (0u64, 0u64, 0u64);
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) != label_a {
                continue;
            }
            let touches = (x > 0 && mask.get(x - 1, y) == label_b)
                || (x + 1 < w && mask.get(x + 1, y) == label_b)
                || (y > 0 && mask.get(x, y - 1) == label_b)
                || (y + 1 < h && mask.get(x, y + 1) == label_b);
            if touches {
                n += 1;
                sx += x as u64;
                sy += y as u64;
            }
        }
    }
    (n > 0).then(|| Point::new(sx as f64 / n as f64, sy as f64 / n as f64))
}

fn decode_luma(bytes: &[u8]) -> Result<image::GrayImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    match decoded {
        DynamicImage::ImageLuma8(buf) => Ok(buf),
        other => Err(Error::Decode(format!(
            "expected 8-bit single-channel image, got {:?}",
            other.color()
        ))),
    }
}

fn encode_luma(width: u32, height: u32, raw: &[u8], format: ImageFormat) -> Vec<u8> {
    let buf = image::GrayImage::from_raw(width, height, raw.to_vec())
        .expect("raster length checked at construction");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, format)
        .expect("encoding to memory cannot fail");
    out.into_inner()
}

/// Raster encodings accepted for masks and scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RasterFormat {
    #[default]
    Png,
    Pgm,
}

impl RasterFormat {
    fn image_format(self) -> ImageFormat {
        match self {
            RasterFormat::Png => ImageFormat::Png,
            RasterFormat::Pgm => ImageFormat::Pnm,
        }
    }
}

/// Decodes an 8-bit single-channel PNG or PGM whose pixel values are class ids.
pub fn decode_mask(bytes: &[u8]) -> Result<LabelMask> {
    let buf = decode_luma(bytes)?;
    LabelMask::from_raw(buf.width(), buf.height(), buf.as_raw())
}

/// Encodes a mask as an 8-bit single-channel PNG.
pub fn encode_mask(mask: &LabelMask) -> Vec<u8> {
    encode_mask_as(mask, RasterFormat::Png)
}

pub fn encode_mask_as(mask: &LabelMask, format: RasterFormat) -> Vec<u8> {
    encode_luma(mask.width, mask.height, &mask.to_raw(), format.image_format())
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    let buf = decode_luma(bytes)?;
    let (w, h) = buf.dimensions();
    GrayImage::new(w, h, buf.into_raw())
}

pub fn encode_image(image: &GrayImage) -> Vec<u8> {
    encode_image_as(image, RasterFormat::Png)
}

pub fn encode_image_as(image: &GrayImage, format: RasterFormat) -> Vec<u8> {
    encode_luma(image.width, image.height, &image.data, format.image_format())
}
