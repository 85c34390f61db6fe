//! Moment-based axis estimation and the crown-rump line.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::raster::{connected_components, largest_component, Component, Label, LabelMask};

/// Real-valued pixel coordinate (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Centroid and dominant direction of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub centroid: Point,
    /// Unit vector with `x >= 0` (and `y > 0` when `x == 0`).
    pub direction: Point,
}

/// Principal axis from second-order central moments.
///
/// The direction is the eigenvector of the coordinate covariance matrix
/// belonging to the larger eigenvalue.
pub fn principal_axis<I>(points: I) -> Result<Axis>
where
    I: IntoIterator<Item = Point>,
{
    let mut iter = points.into_iter();
    let origin = iter
        .next()
        .ok_or(Error::DegenerateGeometry("principal axis of an empty set"))?;
    // shift by the first point so the raw sums stay small
    let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (1.0f64, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in iter {
        let d = p - origin;
        n += 1.0;
        sx += d.x;
        sy += d.y;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    let (mx, my) = (sx / n, sy / n);
    let cxx = sxx / n - mx * mx;
    let cyy = syy / n - my * my;
    let cxy = sxy / n - mx * my;
    let centroid = Point::new(origin.x + mx, origin.y + my);

    let trace = cxx + cyy;
    if trace <= 1e-12 {
        return Err(Error::DegenerateGeometry("all points coincide"));
    }
    let half_diff = (cxx - cyy) / 2.0;
    let disc = half_diff.hypot(cxy);
    if disc <= 1e-9 * trace {
        return Err(Error::IsotropicAxis);
    }
    let lambda = trace / 2.0 + disc;
    // pick the better-conditioned of the two eigenvector formulas
    let v1 = Point::new(lambda - cyy, cxy);
    let v2 = Point::new(cxy, lambda - cxx);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    let mut direction = v * (1.0 / v.norm());
    if direction.x < 0.0 || (direction.x == 0.0 && direction.y < 0.0) {
        direction = direction * -1.0;
    }
    direction = direction + Point::new(0.0, 0.0); // normalise -0.0
    Ok(Axis {
        centroid,
        direction,
    })
}

/// Angle of the undirected line through `a` and `b`, folded into (-90, 90].
///
/// Positive angles descend left-to-right on screen.
pub fn line_angle(a: Point, b: Point) -> Result<f64> {
    let d = b - a;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(Error::DegenerateGeometry("line endpoints coincide"));
    }
    let mut deg = d.y.atan2(d.x).to_degrees();
    if deg > 90.0 {
        deg -= 180.0;
    } else if deg <= -90.0 {
        deg += 180.0;
    }
    Ok(deg + 0.0)
}

/// Crown-rump line fitted on a segmentation mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlLine {
    pub crown: Point,
    pub rump: Point,
    pub length_px: f64,
    pub angle_deg: f64,
    /// Width and height of the mask the line was fitted on.
    pub frame: (u32, u32),
}

impl CrlLine {
    pub fn new(crown: Point, rump: Point, frame: (u32, u32)) -> Result<Self> {
        let angle_deg = line_angle(crown, rump)?;
        Ok(Self {
            crown,
            rump,
            length_px: crown.distance(rump),
            angle_deg,
            frame,
        })
    }

    /// Endpoints ordered left to right (ties: upper first).
    pub fn left_right(&self) -> (Point, Point) {
        let (a, b) = (self.crown, self.rump);
        if (a.x, a.y) <= (b.x, b.y) {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Translated copy; the frame is kept.
    pub fn translated(&self, offset: Point) -> CrlLine {
        CrlLine {
            crown: self.crown + offset,
            rump: self.rump + offset,
            ..*self
        }
    }

    /// Distance of `p` from the infinite line, positive on the `below` side.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let (a, b) = self.ordered();
        (b - a).cross(p - a) / self.length_px
    }

    fn ordered(&self) -> (Point, Point) {
        if self.crown.x <= self.rump.x {
            (self.crown, self.rump)
        } else {
            (self.rump, self.crown)
        }
    }
}

/// Endpoint candidates within this projection distance of the extreme are ties.
pub const TIE_TOLERANCE_PX: f64 = 0.5;

/// Picks the pixel with the most extreme projection; `sign` selects min (-1) or max (+1).
/// Among pixels within [`TIE_TOLERANCE_PX`] of the extreme, the one nearest the
/// axis wins; remaining ties go to the first in row-major order (smaller y, then x).
fn extreme_pixel(component: &Component, axis: &Axis, sign: f64) -> Point {
    let proj = |p: Point| sign * (p - axis.centroid).dot(axis.direction);
    let off_axis = |p: Point| (p - axis.centroid).cross(axis.direction).abs();
    let best = component
        .points()
        .map(proj)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<(Point, f64)> = None;
    for p in component.points().filter(|&p| proj(p) >= best - TIE_TOLERANCE_PX) {
        let d = off_axis(p);
        if chosen.is_none_or(|(_, best_d)| d < best_d - 1e-9) {
            chosen = Some((p, d));
        }
    }
    chosen.expect("components are never empty").0
}

pub(crate) fn usable_component(mask: &LabelMask, label: Label, min_area: usize) -> Result<Component> {
    let mut comps = connected_components(mask, label);
    match largest_component(&comps) {
        Some(c) if c.area >= min_area.max(1) => Ok(comps.swap_remove(0)),
        _ => Err(Error::MissingStructure(label)),
    }
}

/// Fits the crown-rump line from the largest head and body components.
///
/// The joint principal axis of both components orients the line; the crown
/// is the head pixel projecting furthest out on the head's side and the rump
/// is the body pixel projecting furthest out on the other side.
pub fn fit_crl_line(mask: &LabelMask, min_component_area: usize) -> Result<CrlLine> {
    let head = usable_component(mask, Label::Head, min_component_area)?;
    let body = usable_component(mask, Label::Body, min_component_area)?;
    fit_crl_line_from(&head, &body, mask.dims())
}

pub(crate) fn fit_crl_line_from(head: &Component, body: &Component, frame: (u32, u32)) -> Result<CrlLine> {
    let axis = principal_axis(head.points().chain(body.points()))?;
    let head_t = (head.centroid - axis.centroid).dot(axis.direction);
    let body_t = (body.centroid - axis.centroid).dot(axis.direction);
    let (crown, rump) = if head_t <= body_t {
        (extreme_pixel(head, &axis, -1.0), extreme_pixel(body, &axis, 1.0))
    } else {
        (extreme_pixel(head, &axis, 1.0), extreme_pixel(body, &axis, -1.0))
    };
    CrlLine::new(crown, rump, frame)
}

/// Horizontal projection of the line.
pub fn horizontal_extent(line: &CrlLine) -> f64 {
    (line.crown.x - line.rump.x).abs()
}

/// Position of a point relative to a line, as seen on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
    On,
}

impl Side {
    /// +1 above, -1 below, 0 on the line.
    pub fn code(self) -> i8 {
        match self {
            Side::Above => 1,
            Side::On => 0,
            Side::Below => -1,
        }
    }
}

pub fn side_of_line(p: Point, line: &CrlLine) -> Side {
    let (a, b) = line.ordered();
    let cross = (b - a).cross(p - a);
    if cross.abs() < 1e-9 * line.length_px {
        Side::On
    } else if cross > 0.0 {
        Side::Below
    } else {
        Side::Above
    }
}
