//! Planar primitives, hull and disk-set construction, and exact euclidean
//! distance queries.
//!
//! Every set used by the toolkit is a finite union of closed primitive
//! shapes. Half-plane hulls are built from vertical slits, rooted boxes and
//! half-disks; compact sets of the unit disk from radial slits and annular
//! sectors. Each primitive reaches the boundary of its space, and pairwise
//! closures may only meet on that boundary, which keeps the complement simply
//! connected.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::new(z.re, z.im)
    }
}

impl From<Point> for Complex64 {
    fn from(p: Point) -> Self {
        Complex64::new(p.x, p.y)
    }
}

/// The two ambient spaces: the upper half-plane and the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    HalfPlane,
    Disk,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::HalfPlane => "halfplane",
            Space::Disk => "disk",
        }
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x0, self.x1), p.y.clamp(self.y0, self.y1))
    }

    pub fn dist(&self, p: Point) -> f64 {
        p.dist(self.clamp(p))
    }

    /// Largest distance from `p` to a point of the rectangle.
    pub fn max_dist(&self, p: Point) -> f64 {
        let dx = (p.x - self.x0).abs().max((p.x - self.x1).abs());
        let dy = (p.y - self.y0).abs().max((p.y - self.y1).abs());
        dx.hypot(dy)
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(
            self.x0.min(o.x0),
            self.y0.min(o.y0),
            self.x1.max(o.x1),
            self.y1.max(o.y1),
        )
    }
}

/// A closed primitive point set.
///
/// `Dot` is a degenerate single point. It is accepted by the distance,
/// neighborhood and cover routines as a test probe, but never by
/// [`HalfPlaneHull`] or [`DiskCompact`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    /// Segment from `(x, 0)` to `(x, h)`.
    VSlit { x: f64, h: f64 },
    /// `[x0, x1] × [y0, y1]`.
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// `{|z − c| ≤ r, Im z ≥ 0}`.
    HalfDisk { c: f64, r: f64 },
    /// Segment from `rho·e^{iθ}` to `e^{iθ}`.
    RadialSlit { theta: f64, rho: f64 },
    /// `{rho ≤ |z| ≤ 1, arg z ∈ [theta0, theta1]}`; a sweep of 2π is a full ring.
    ArcBox { theta0: f64, theta1: f64, rho: f64 },
    Dot { p: Point },
}

/// Angle of `a` measured counter-clockwise from `start`, in `[0, 2π)`.
pub fn angle_offset(a: f64, start: f64) -> f64 {
    let d = (a - start).rem_euclid(TAU);
    if d >= TAU {
        0.0
    } else {
        d
    }
}

fn nearest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Nearest point of the arc `{R e^{iφ} : φ ∈ [start, start + sweep]}`.
fn nearest_on_centered_arc(p: Point, radius: f64, start: f64, sweep: f64) -> Point {
    let r = p.norm();
    if r > 0.0 && angle_offset(p.arg(), start) <= sweep {
        return p * (radius / r);
    }
    let a = Point::polar(radius, start);
    let b = Point::polar(radius, start + sweep);
    if p.dist(a) <= p.dist(b) {
        a
    } else {
        b
    }
}

/// Liang–Barsky test of a closed segment against a closed rectangle.
fn segment_meets_rect(a: Point, b: Point, r: &Rect) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - r.x0),
        (d.x, r.x1 - a.x),
        (-d.y, a.y - r.y0),
        (d.y, r.y1 - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

impl Shape {
    pub fn vslit(x: f64, h: f64) -> Result<Shape, ShapeViolation> {
        Shape::VSlit { x, h }.checked()
    }

    pub fn rooted_box(x0: f64, x1: f64, y1: f64) -> Result<Shape, ShapeViolation> {
        Shape::Box { x0, x1, y0: 0.0, y1 }.checked()
    }

    pub fn boxed(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Shape, ShapeViolation> {
        Shape::Box { x0, x1, y0, y1 }.checked()
    }

    pub fn half_disk(c: f64, r: f64) -> Result<Shape, ShapeViolation> {
        Shape::HalfDisk { c, r }.checked()
    }

    pub fn radial_slit(theta: f64, rho: f64) -> Result<Shape, ShapeViolation> {
        Shape::RadialSlit { theta, rho }.checked()
    }

    pub fn arc_box(theta0: f64, theta1: f64, rho: f64) -> Result<Shape, ShapeViolation> {
        Shape::ArcBox { theta0, theta1, rho }.checked()
    }

    /// The full annulus `{rho ≤ |z| < 1}`.
    pub fn ring(rho: f64) -> Result<Shape, ShapeViolation> {
        Shape::arc_box(0.0, TAU, rho)
    }

    pub fn dot(x: f64, y: f64) -> Shape {
        Shape::Dot { p: Point::new(x, y) }
    }

    /// Checks parameter ranges; degenerate shapes are rejected.
    pub fn checked(self) -> Result<Shape, ShapeViolation> {
        let bad = |reason: &str| {
            Err(ShapeViolation::Degenerate {
                index: 0,
                reason: reason.to_string(),
            })
        };
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::VSlit { x, h } => {
                if !finite(&[x, h]) || h <= 0.0 {
                    return bad("vslit needs finite x and h > 0");
                }
            }
            Shape::Box { x0, x1, y0, y1 } => {
                if !finite(&[x0, x1, y0, y1]) || x0 >= x1 || y0 >= y1 || y0 < 0.0 {
                    return bad("box needs x0 < x1 and 0 <= y0 < y1");
                }
            }
            Shape::HalfDisk { c, r } => {
                if !finite(&[c, r]) || r <= 0.0 {
                    return bad("halfdisk needs r > 0");
                }
            }
            Shape::RadialSlit { theta, rho } => {
                if !finite(&[theta, rho]) || rho <= 0.0 || rho >= 1.0 {
                    return bad("rslit needs 0 < rho < 1");
                }
            }
            Shape::ArcBox { theta0, theta1, rho } => {
                let sweep = theta1 - theta0;
                if !finite(&[theta0, theta1, rho]) || rho <= 0.0 || rho >= 1.0 {
                    return bad("arcbox needs 0 < rho < 1");
                }
                if sweep <= 0.0 || sweep > TAU * (1.0 + 1e-15) {
                    return bad("arcbox needs 0 < theta1 - theta0 <= 2π");
                }
            }
            Shape::Dot { p } => {
                if !p.is_finite() {
                    return bad("dot needs finite coordinates");
                }
            }
        }
        Ok(self)
    }

    pub fn space(&self) -> Option<Space> {
        match self {
            Shape::VSlit { .. } | Shape::Box { .. } | Shape::HalfDisk { .. } => {
                Some(Space::HalfPlane)
            }
            Shape::RadialSlit { .. } | Shape::ArcBox { .. } => Some(Space::Disk),
            Shape::Dot { .. } => None,
        }
    }

    fn is_full_ring(sweep: f64) -> bool {
        sweep >= TAU
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Box { x0, x1, y0, y1 } => Rect::new(x0, y0, x1, y1).contains(p),
            Shape::HalfDisk { c, r } => p.y >= 0.0 && (p.x - c).hypot(p.y) <= r,
            Shape::ArcBox { theta0, theta1, rho } => {
                let m = p.norm();
                m >= rho
                    && m <= 1.0
                    && (Self::is_full_ring(theta1 - theta0)
                        || angle_offset(p.arg(), theta0) <= theta1 - theta0)
            }
            _ => self.nearest_point(p) == p,
        }
    }

    /// Nearest point of the closed shape to `p` (`p` itself when inside).
    pub fn nearest_point(&self, p: Point) -> Point {
        match *self {
            Shape::VSlit { x, h } => Point::new(x, p.y.clamp(0.0, h)),
            Shape::Box { x0, x1, y0, y1 } => Rect::new(x0, y0, x1, y1).clamp(p),
            Shape::HalfDisk { c, r } => {
                let center = Point::new(c, 0.0);
                if p.y >= 0.0 {
                    let d = p.dist(center);
                    if d <= r {
                        p
                    } else {
                        center + (p - center) * (r / d)
                    }
                } else {
                    Point::new(p.x.clamp(c - r, c + r), 0.0)
                }
            }
            Shape::RadialSlit { theta, rho } => {
                nearest_on_segment(p, Point::polar(rho, theta), Point::polar(1.0, theta))
            }
            Shape::ArcBox { theta0, theta1, rho } => {
                if self.contains(p) {
                    return p;
                }
                let sweep = theta1 - theta0;
                let m = p.norm();
                if Self::is_full_ring(sweep) {
                    return if m > 1.0 {
                        p * (1.0 / m)
                    } else if m == 0.0 {
                        Point::new(rho, 0.0)
                    } else {
                        p * (rho / m)
                    };
                }
                let candidates = [
                    nearest_on_segment(p, Point::polar(rho, theta0), Point::polar(1.0, theta0)),
                    nearest_on_segment(p, Point::polar(rho, theta1), Point::polar(1.0, theta1)),
                    nearest_on_centered_arc(p, rho, theta0, sweep),
                    nearest_on_centered_arc(p, 1.0, theta0, sweep),
                ];
                candidates
                    .into_iter()
                    .min_by(|a, b| p.dist(*a).total_cmp(&p.dist(*b)))
                    .unwrap()
            }
            Shape::Dot { p: q } => q,
        }
    }

    /// Euclidean distance from `p` to the shape; zero inside or on it.
    pub fn dist(&self, p: Point) -> f64 {
        p.dist(self.nearest_point(p))
    }

    /// Whether the closed disk of `radius` about `center` meets the shape.
    pub fn intersects_disk(&self, center: Point, radius: f64) -> bool {
        self.dist(center) <= radius
    }

    /// Whether the closed rectangle may meet the shape.
    ///
    /// Exact for half-plane shapes, segments and dots; a conservative
    /// (never falsely negative) answer for annular sectors.
    pub fn may_meet_rect(&self, r: &Rect) -> bool {
        match *self {
            Shape::VSlit { x, h } => {
                segment_meets_rect(Point::new(x, 0.0), Point::new(x, h), r)
            }
            Shape::Box { x0, x1, y0, y1 } => Rect::new(x0, y0, x1, y1).intersects(r),
            Shape::HalfDisk { c, r: rad } => {
                if r.y1 < 0.0 {
                    return false;
                }
                let upper = Rect::new(r.x0, r.y0.max(0.0), r.x1, r.y1);
                upper.dist(Point::new(c, 0.0)) <= rad
            }
            Shape::RadialSlit { theta, rho } => {
                segment_meets_rect(Point::polar(rho, theta), Point::polar(1.0, theta), r)
            }
            Shape::ArcBox { .. } => self.dist(r.center()) <= r.half_diagonal(),
            Shape::Dot { p } => r.contains(p),
        }
    }

    /// Whether the closed rectangle lies inside the shape (conservative:
    /// may answer `false` for contained rectangles of annular sectors).
    pub fn contains_rect(&self, r: &Rect) -> bool {
        match *self {
            Shape::Box { x0, x1, y0, y1 } => {
                r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1
            }
            Shape::HalfDisk { .. } => r.corners().iter().all(|&p| self.contains(p)),
            _ => false,
        }
    }

    pub fn bbox(&self) -> Rect {
        match *self {
            Shape::VSlit { x, h } => Rect::new(x, 0.0, x, h),
            Shape::Box { x0, x1, y0, y1 } => Rect::new(x0, y0, x1, y1),
            Shape::HalfDisk { c, r } => Rect::new(c - r, 0.0, c + r, r),
            Shape::RadialSlit { theta, rho } => {
                let a = Point::polar(rho, theta);
                let b = Point::polar(1.0, theta);
                Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y))
            }
            Shape::ArcBox { .. } => Rect::new(-1.0, -1.0, 1.0, 1.0),
            Shape::Dot { p } => Rect::new(p.x, p.y, p.x, p.y),
        }
    }

    /// Euclidean area (zero for slits and dots).
    pub fn area(&self) -> f64 {
        match *self {
            Shape::Box { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Shape::HalfDisk { r, .. } => 0.5 * std::f64::consts::PI * r * r,
            Shape::ArcBox { theta0, theta1, rho } => {
                0.5 * (theta1 - theta0).min(TAU) * (1.0 - rho * rho)
            }
            _ => 0.0,
        }
    }

    /// Largest distance from `p` to a point of the shape.
    pub fn max_dist(&self, p: Point) -> f64 {
        match *self {
            Shape::VSlit { x, h } => {
                p.dist(Point::new(x, 0.0)).max(p.dist(Point::new(x, h)))
            }
            Shape::Box { x0, x1, y0, y1 } => Rect::new(x0, y0, x1, y1).max_dist(p),
            Shape::HalfDisk { c, r } => {
                // farthest point lies on the arc or at a diameter end
                let center = Point::new(c, 0.0);
                let dir = center - p;
                let arc = if dir.y >= 0.0 && dir.norm() > 0.0 {
                    p.dist(center) + r
                } else {
                    0.0
                };
                arc.max(p.dist(Point::new(c - r, 0.0)))
                    .max(p.dist(Point::new(c + r, 0.0)))
                    .max(p.dist(Point::new(c, r)))
            }
            Shape::RadialSlit { theta, rho } => p
                .dist(Point::polar(rho, theta))
                .max(p.dist(Point::polar(1.0, theta))),
            Shape::ArcBox { .. } => p.norm() + 1.0,
            Shape::Dot { p: q } => p.dist(q),
        }
    }

    pub fn translated(&self, t: f64) -> Shape {
        match *self {
            Shape::VSlit { x, h } => Shape::VSlit { x: x + t, h },
            Shape::Box { x0, x1, y0, y1 } => Shape::Box {
                x0: x0 + t,
                x1: x1 + t,
                y0,
                y1,
            },
            Shape::HalfDisk { c, r } => Shape::HalfDisk { c: c + t, r },
            Shape::Dot { p } => Shape::Dot {
                p: Point::new(p.x + t, p.y),
            },
            other => other,
        }
    }

    pub fn scaled(&self, s: f64) -> Shape {
        match *self {
            Shape::VSlit { x, h } => Shape::VSlit { x: x * s, h: h * s },
            Shape::Box { x0, x1, y0, y1 } => Shape::Box {
                x0: x0 * s,
                x1: x1 * s,
                y0: y0 * s,
                y1: y1 * s,
            },
            Shape::HalfDisk { c, r } => Shape::HalfDisk { c: c * s, r: r * s },
            Shape::Dot { p } => Shape::Dot { p: p * s },
            other => other,
        }
    }

    /// Mirror image across the imaginary axis.
    pub fn reflected(&self) -> Shape {
        match *self {
            Shape::VSlit { x, h } => Shape::VSlit { x: -x, h },
            Shape::Box { x0, x1, y0, y1 } => Shape::Box {
                x0: -x1,
                x1: -x0,
                y0,
                y1,
            },
            Shape::HalfDisk { c, r } => Shape::HalfDisk { c: -c, r },
            Shape::RadialSlit { theta, rho } => Shape::RadialSlit {
                theta: std::f64::consts::PI - theta,
                rho,
            },
            Shape::ArcBox { theta0, theta1, rho } => Shape::ArcBox {
                theta0: std::f64::consts::PI - theta1,
                theta1: std::f64::consts::PI - theta0,
                rho,
            },
            Shape::Dot { p } => Shape::Dot {
                p: Point::new(-p.x, p.y),
            },
        }
    }
}

/// Nearest point of a finite union, with the index of the shape that
/// realizes it. Ties go to the lowest index.
pub fn nearest_in(shapes: &[Shape], p: Point) -> Option<(usize, Point, f64)> {
    let mut best: Option<(usize, Point, f64)> = None;
    for (i, s) in shapes.iter().enumerate() {
        let q = s.nearest_point(p);
        let d = p.dist(q);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((i, q, d));
        }
    }
    best
}

/// Euclidean distance from `p` to a finite union (`+∞` when empty).
pub fn dist_to_union(shapes: &[Shape], p: Point) -> f64 {
    shapes
        .iter()
        .map(|s| s.dist(p))
        .fold(f64::INFINITY, f64::min)
}

pub fn euclid_dist(p: Point, s: &Shape) -> f64 {
    s.dist(p)
}

pub fn shape_intersects_disk(s: &Shape, center: Point, radius: f64) -> bool {
    s.intersects_disk(center, radius)
}

/// First violated constraint of a shape list.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapeViolation {
    #[error("shape {index} is degenerate: {reason}")]
    Degenerate { index: usize, reason: String },
    #[error("shape {index} does not belong to the {space} space")]
    WrongSpace { index: usize, space: &'static str },
    #[error("shape {index} is not rooted on the boundary")]
    NotRooted { index: usize },
    #[error("shape {index} leaves the annulus 1/2 < |z| < 1")]
    OutsideAnnulus { index: usize },
    #[error("shapes {a} and {b} overlap away from the boundary")]
    Overlap { a: usize, b: usize },
}

impl ShapeViolation {
    fn at(self, i: usize) -> Self {
        match self {
            ShapeViolation::Degenerate { reason, .. } => {
                ShapeViolation::Degenerate { index: i, reason }
            }
            other => other,
        }
    }
}

/// Interval `[lo, hi]` with per-end openness.
#[derive(Clone, Copy)]
struct Footprint {
    lo: f64,
    hi: f64,
    open: bool,
}

impl Footprint {
    fn meets(&self, o: &Footprint) -> bool {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        if self.open || o.open {
            lo < hi
        } else {
            lo <= hi
        }
    }
}

/// x-range of a rooted half-plane shape at small positive heights. Every
/// primitive contains the vertical segment below each of its points, so two
/// closures meet in the open half-plane iff these footprints meet.
fn halfplane_footprint(s: &Shape) -> Footprint {
    match *s {
        Shape::VSlit { x, .. } => Footprint { lo: x, hi: x, open: false },
        Shape::Box { x0, x1, .. } => Footprint { lo: x0, hi: x1, open: false },
        Shape::HalfDisk { c, r } => Footprint {
            lo: c - r,
            hi: c + r,
            open: true,
        },
        _ => unreachable!("not a half-plane shape"),
    }
}

/// Checks boundedness, real-axis rooting and pairwise disjointness.
pub fn validate_hull(shapes: &[Shape]) -> Result<(), ShapeViolation> {
    for (i, s) in shapes.iter().enumerate() {
        s.checked().map_err(|e| e.at(i))?;
        if s.space() != Some(Space::HalfPlane) {
            return Err(ShapeViolation::WrongSpace {
                index: i,
                space: "halfplane",
            });
        }
        if let Shape::Box { y0, .. } = *s {
            if y0 != 0.0 {
                return Err(ShapeViolation::NotRooted { index: i });
            }
        }
    }
    for a in 0..shapes.len() {
        let fa = halfplane_footprint(&shapes[a]);
        for b in a + 1..shapes.len() {
            if fa.meets(&halfplane_footprint(&shapes[b])) {
                return Err(ShapeViolation::Overlap { a, b });
            }
        }
    }
    Ok(())
}

fn angular_range(s: &Shape) -> (f64, f64) {
    match *s {
        Shape::RadialSlit { theta, .. } => (theta, 0.0),
        Shape::ArcBox { theta0, theta1, .. } => (theta0, (theta1 - theta0).min(TAU)),
        _ => unreachable!("not a disk shape"),
    }
}

fn arcs_meet((a0, aw): (f64, f64), (b0, bw): (f64, f64)) -> bool {
    aw >= TAU || bw >= TAU || angle_offset(b0, a0) <= aw || angle_offset(a0, b0) <= bw
}

/// Checks annulus containment and pairwise disjointness inside the disk.
pub fn validate_disk(shapes: &[Shape]) -> Result<(), ShapeViolation> {
    for (i, s) in shapes.iter().enumerate() {
        s.checked().map_err(|e| e.at(i))?;
        if s.space() != Some(Space::Disk) {
            return Err(ShapeViolation::WrongSpace {
                index: i,
                space: "disk",
            });
        }
        let rho = match *s {
            Shape::RadialSlit { rho, .. } | Shape::ArcBox { rho, .. } => rho,
            _ => unreachable!(),
        };
        if rho <= 0.5 {
            return Err(ShapeViolation::OutsideAnnulus { index: i });
        }
    }
    for a in 0..shapes.len() {
        for b in a + 1..shapes.len() {
            if arcs_meet(angular_range(&shapes[a]), angular_range(&shapes[b])) {
                return Err(ShapeViolation::Overlap { a, b });
            }
        }
    }
    Ok(())
}

/// A bounded subset of the upper half-plane with simply connected complement.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HalfPlaneHull {
    shapes: Vec<Shape>,
}

impl HalfPlaneHull {
    pub fn new(shapes: Vec<Shape>) -> Result<Self, ShapeViolation> {
        validate_hull(&shapes)?;
        Ok(HalfPlaneHull { shapes })
    }

    pub fn empty() -> Self {
        HalfPlaneHull::default()
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn bbox(&self) -> Option<Rect> {
        self.shapes.iter().map(Shape::bbox).reduce(|a, b| a.union(&b))
    }

    /// Midpoint of the hull's footprint on the real axis.
    pub fn center_x(&self) -> f64 {
        self.bbox().map_or(0.0, |b| 0.5 * (b.x0 + b.x1))
    }

    /// `sup |z − x_c|` over the hull.
    pub fn radius_about(&self, xc: f64) -> f64 {
        let c = Point::new(xc, 0.0);
        self.shapes
            .iter()
            .map(|s| s.max_dist(c))
            .fold(0.0, f64::max)
    }

    pub fn sup_modulus(&self) -> f64 {
        self.radius_about(0.0)
    }

    pub fn max_height(&self) -> f64 {
        self.bbox().map_or(0.0, |b| b.y1)
    }

    pub fn diameter(&self) -> f64 {
        self.bbox().map_or(0.0, |b| (b.x1 - b.x0).max(b.y1))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.shapes.iter().any(|s| s.contains(p))
    }

    pub fn translated(&self, t: f64) -> Self {
        HalfPlaneHull {
            shapes: self.shapes.iter().map(|s| s.translated(t)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0, "scale must be positive");
        HalfPlaneHull {
            shapes: self.shapes.iter().map(|x| x.scaled(s)).collect(),
        }
    }

    pub fn reflected(&self) -> Self {
        HalfPlaneHull {
            shapes: self.shapes.iter().map(Shape::reflected).collect(),
        }
    }

    pub fn with_shape(&self, s: Shape) -> Result<Self, ShapeViolation> {
        let mut shapes = self.shapes.clone();
        shapes.push(s);
        HalfPlaneHull::new(shapes)
    }
}

/// A relatively closed subset of `{1/2 < |z| < 1}` with simply connected
/// complement in the unit disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DiskCompact {
    shapes: Vec<Shape>,
}

impl DiskCompact {
    pub fn new(shapes: Vec<Shape>) -> Result<Self, ShapeViolation> {
        validate_disk(&shapes)?;
        Ok(DiskCompact { shapes })
    }

    pub fn empty() -> Self {
        DiskCompact::default()
    }

    pub fn ring(rho: f64) -> Result<Self, ShapeViolation> {
        DiskCompact::new(vec![Shape::ring(rho).map_err(|e| e.at(0))?])
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.shapes.iter().map(Shape::area).sum()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.shapes.iter().any(|s| s.contains(p))
    }

    /// Smallest `|z|` over the set (1 when empty).
    pub fn min_modulus(&self) -> f64 {
        self.shapes
            .iter()
            .map(|s| match *s {
                Shape::RadialSlit { rho, .. } | Shape::ArcBox { rho, .. } => rho,
                _ => 1.0,
            })
            .fold(1.0, f64::min)
    }

    pub fn with_shape(&self, s: Shape) -> Result<Self, ShapeViolation> {
        let mut shapes = self.shapes.clone();
        shapes.push(s);
        DiskCompact::new(shapes)
    }
}

/// Either kind of validated set.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSet {
    HalfPlane(HalfPlaneHull),
    Disk(DiskCompact),
}

impl ShapeSet {
    pub fn space(&self) -> Space {
        match self {
            ShapeSet::HalfPlane(_) => Space::HalfPlane,
            ShapeSet::Disk(_) => Space::Disk,
        }
    }

    pub fn shapes(&self) -> &[Shape] {
        match self {
            ShapeSet::HalfPlane(h) => h.shapes(),
            ShapeSet::Disk(d) => d.shapes(),
        }
    }
}

/// JSON shape file: `{"space": "halfplane" | "disk", "shapes": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeFile {
    pub space: Space,
    pub shapes: Vec<ShapeSpec>,
}

/// One entry of a shape file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeSpec {
    Vslit { x: f64, h: f64 },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    Halfdisk { c: f64, r: f64 },
    Rslit { theta: f64, rho: f64 },
    Arcbox { theta0: f64, theta1: f64, rho: f64 },
}

impl From<ShapeSpec> for Shape {
    fn from(s: ShapeSpec) -> Shape {
        match s {
            ShapeSpec::Vslit { x, h } => Shape::VSlit { x, h },
            ShapeSpec::Box { x0, x1, y0, y1 } => Shape::Box { x0, x1, y0, y1 },
            ShapeSpec::Halfdisk { c, r } => Shape::HalfDisk { c, r },
            ShapeSpec::Rslit { theta, rho } => Shape::RadialSlit { theta, rho },
            ShapeSpec::Arcbox { theta0, theta1, rho } => Shape::ArcBox { theta0, theta1, rho },
        }
    }
}

impl TryFrom<Shape> for ShapeSpec {
    type Error = ShapeViolation;
    fn try_from(s: Shape) -> Result<ShapeSpec, ShapeViolation> {
        Ok(match s {
            Shape::VSlit { x, h } => ShapeSpec::Vslit { x, h },
            Shape::Box { x0, x1, y0, y1 } => ShapeSpec::Box { x0, x1, y0, y1 },
            Shape::HalfDisk { c, r } => ShapeSpec::Halfdisk { c, r },
            Shape::RadialSlit { theta, rho } => ShapeSpec::Rslit { theta, rho },
            Shape::ArcBox { theta0, theta1, rho } => ShapeSpec::Arcbox { theta0, theta1, rho },
            Shape::Dot { .. } => {
                return Err(ShapeViolation::Degenerate {
                    index: 0,
                    reason: "dots have no file representation".into(),
                })
            }
        })
    }
}

impl ShapeFile {
    pub fn parse(text: &str) -> Result<ShapeFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn into_set(self) -> Result<ShapeSet, ShapeViolation> {
        let shapes: Vec<Shape> = self.shapes.into_iter().map(Shape::from).collect();
        Ok(match self.space {
            Space::HalfPlane => ShapeSet::HalfPlane(HalfPlaneHull::new(shapes)?),
            Space::Disk => ShapeSet::Disk(DiskCompact::new(shapes)?),
        })
    }

    pub fn from_set(set: &ShapeSet) -> ShapeFile {
        ShapeFile {
            space: set.space(),
            shapes: set
                .shapes()
                .iter()
                .map(|s| ShapeSpec::try_from(*s).expect("validated sets contain no dots"))
                .collect(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Brute-force distance by dense sampling of the shape's boundary and interior.
    fn sampled_dist(p: Point, pts: impl Iterator<Item = Point>) -> f64 {
        pts.map(|q| p.dist(q)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn slit_distances() {
        let s = Shape::vslit(0.0, 1.0).unwrap();
        assert_eq!(s.dist(Point::new(0.0, 2.0)), 1.0);
        assert_eq!(s.dist(Point::new(0.0, 1.0)), 0.0);
    }

    #[test]
    fn halfdisk_distance_matches_sampling() {
        let s = Shape::half_disk(0.0, 1.0).unwrap();
        let p = Point::new(3.0, 4.0);
        assert!((s.dist(p) - 4.0).abs() < 1e-15);
        let n = 200_000;
        let arc = (0..=n).map(|i| Point::polar(1.0, PI * i as f64 / n as f64));
        assert!((sampled_dist(p, arc) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn disk_intersection_examples() {
        let s = Shape::vslit(0.0, 1.0).unwrap();
        assert!(s.intersects_disk(Point::new(0.0, 2.0), 1.0));
        assert!(!s.intersects_disk(Point::new(0.0, 2.0), 0.5));
        let a = Shape::arc_box(0.0, FRAC_PI_2, 0.8).unwrap();
        assert!(!a.intersects_disk(Point::ORIGIN, 0.79));
        assert!(a.intersects_disk(Point::ORIGIN, 0.8));
        // sampling oracle for the minimum modulus over the sector
        let n = 400;
        let pts = (0..=n).flat_map(|i| {
            (0..=n).map(move |j| {
                Point::polar(0.8 + 0.2 * i as f64 / n as f64, FRAC_PI_2 * j as f64 / n as f64)
            })
        });
        assert!((sampled_dist(Point::ORIGIN, pts) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn arcbox_distance_from_outside_angle() {
        let a = Shape::arc_box(0.0, FRAC_PI_2, 0.8).unwrap();
        let p = Point::polar(0.9, -0.3);
        let n = 600;
        let pts = (0..=n).flat_map(|i| {
            (0..=n).map(move |j| {
                Point::polar(0.8 + 0.2 * i as f64 / n as f64, FRAC_PI_2 * j as f64 / n as f64)
            })
        });
        assert!((a.dist(p) - sampled_dist(p, pts)).abs() < 1e-3);
        assert!(a.contains(Point::polar(0.9, 0.3)));
        assert_eq!(a.dist(Point::polar(0.9, 0.3)), 0.0);
    }

    #[test]
    fn ring_distance() {
        let r = Shape::ring(0.7).unwrap();
        assert!((r.dist(Point::new(0.1, 0.2)) - (0.7 - 0.05f64.sqrt())).abs() < 1e-15);
        assert_eq!(r.dist(Point::polar(0.8, 2.0)), 0.0);
    }

    #[test]
    fn hull_validation() {
        let two_slits = vec![Shape::vslit(0.0, 1.0).unwrap(), Shape::vslit(1.0, 1.0).unwrap()];
        assert!(HalfPlaneHull::new(two_slits).is_ok());
        let disks = vec![
            Shape::half_disk(0.0, 1.0).unwrap(),
            Shape::half_disk(1.0, 1.0).unwrap(),
        ];
        assert_eq!(
            validate_hull(&disks),
            Err(ShapeViolation::Overlap { a: 0, b: 1 })
        );
        assert!(HalfPlaneHull::new(vec![]).is_ok());
    }

    #[test]
    fn hull_touching_only_on_axis_is_valid() {
        let shapes = vec![
            Shape::rooted_box(0.0, 1.0, 1.0).unwrap(),
            Shape::half_disk(2.0, 1.0).unwrap(),
            Shape::half_disk(4.0, 1.0).unwrap(),
        ];
        assert!(validate_hull(&shapes).is_ok());
        let touching_boxes = vec![
            Shape::rooted_box(0.0, 1.0, 1.0).unwrap(),
            Shape::rooted_box(1.0, 2.0, 1.0).unwrap(),
        ];
        assert!(validate_hull(&touching_boxes).is_err());
    }

    #[test]
    fn hull_rejects_unrooted_and_degenerate() {
        let floating = vec![Shape::boxed(0.0, 1.0, 0.5, 1.0).unwrap()];
        assert_eq!(
            validate_hull(&floating),
            Err(ShapeViolation::NotRooted { index: 0 })
        );
        assert!(Shape::vslit(0.0, 0.0).is_err());
        let zero = vec![Shape::vslit(0.0, 1.0).unwrap(), Shape::VSlit { x: 3.0, h: 0.0 }];
        assert!(matches!(
            validate_hull(&zero),
            Err(ShapeViolation::Degenerate { index: 1, .. })
        ));
        assert!(validate_hull(&[Shape::dot(0.0, 1.0)]).is_err());
    }

    #[test]
    fn disk_validation() {
        let ok = vec![
            Shape::radial_slit(0.0, 0.8).unwrap(),
            Shape::arc_box(1.0, 2.0, 0.6).unwrap(),
        ];
        assert!(DiskCompact::new(ok).is_ok());
        let wrap = vec![
            Shape::arc_box(6.0, 6.5, 0.6).unwrap(),
            Shape::radial_slit(0.1, 0.9).unwrap(),
        ];
        assert!(DiskCompact::new(wrap).is_err());
        let deep = vec![Shape::radial_slit(0.0, 0.4).unwrap()];
        assert_eq!(
            validate_disk(&deep),
            Err(ShapeViolation::OutsideAnnulus { index: 0 })
        );
        assert!(DiskCompact::ring(0.7).is_ok());
    }

    #[test]
    fn shape_file_roundtrip_and_errors() {
        let text = r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0,"h":1},{"type":"halfdisk","c":3,"r":1}]}"#;
        let set = ShapeFile::parse(text).unwrap().into_set().unwrap();
        assert_eq!(set.shapes().len(), 2);
        let back = serde_json::to_string(&ShapeFile::from_set(&set)).unwrap();
        assert_eq!(ShapeFile::parse(&back).unwrap().into_set().unwrap(), set);

        let err = ShapeFile::parse(r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("`h`"), "{err}");
        let wrong = ShapeFile::parse(r#"{"space":"disk","shapes":[{"type":"vslit","x":0,"h":1}]}"#)
            .unwrap()
            .into_set();
        assert!(wrong.is_err());
    }

    #[test]
    fn rect_queries() {
        let r = Rect::new(-0.1, 0.5, 0.1, 0.7);
        assert!(Shape::vslit(0.0, 1.0).unwrap().may_meet_rect(&r));
        assert!(!Shape::vslit(0.0, 0.4).unwrap().may_meet_rect(&r));
        assert!(Shape::half_disk(0.0, 1.0).unwrap().contains_rect(&r));
        assert!(!Shape::half_disk(0.0, 0.6).unwrap().contains_rect(&r));
        assert!(Shape::half_disk(0.0, 0.6).unwrap().may_meet_rect(&r));
        assert!(!Shape::half_disk(0.0, 0.4).unwrap().may_meet_rect(&r));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_shape() -> impl Strategy<Value = Shape> {
            prop_oneof![
                (-3.0..3.0f64, 0.1..2.0f64).prop_map(|(x, h)| Shape::VSlit { x, h }),
                (-3.0..3.0f64, 0.1..2.0f64, 0.1..2.0f64)
                    .prop_map(|(x0, w, y1)| Shape::Box { x0, x1: x0 + w, y0: 0.0, y1 }),
                (-3.0..3.0f64, 0.1..2.0f64).prop_map(|(c, r)| Shape::HalfDisk { c, r }),
                (-4.0..4.0f64, 0.51..0.99f64)
                    .prop_map(|(theta, rho)| Shape::RadialSlit { theta, rho }),
                (-4.0..4.0f64, 0.05..6.0f64, 0.51..0.99f64).prop_map(|(t0, w, rho)| {
                    Shape::ArcBox { theta0: t0, theta1: t0 + w, rho }
                }),
            ]
        }

        proptest! {
            #[test]
            fn distance_is_a_metric_projection(s in any_shape(), x in -5.0..5.0f64, y in -1.0..5.0f64) {
                let p = Point::new(x, y);
                let d = s.dist(p);
                prop_assert!(s.intersects_disk(p, d));
                let scale = 1.0 + p.norm();
                if d > 1e-12 * scale {
                    prop_assert!(!s.intersects_disk(p, d - 1e-12 * scale));
                }
                // nearest point lies in the shape
                prop_assert!(s.dist(s.nearest_point(p)) <= 1e-12 * scale);
            }

            #[test]
            fn distance_is_translation_equivariant(
                s in any_shape(), x in -5.0..5.0f64, y in 0.0..5.0f64, t in -10.0..10.0f64
            ) {
                prop_assume!(s.space() == Some(Space::HalfPlane));
                let p = Point::new(x, y);
                let d0 = s.dist(p);
                let d1 = s.translated(t).dist(Point::new(x + t, y));
                prop_assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0 + t.abs()));
            }
        }
    }
}
