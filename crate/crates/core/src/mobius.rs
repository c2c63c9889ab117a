//! The Cayley-type transport `T_y(z) = (z − iy)/(z + iy)` from ℍ to 𝔻 and
//! the images of half-plane hulls under it.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_offset, HalfPlaneHull, Point, Rect, Shape};
use crate::quadtree::{certified_area, square_root, AreaBounds, CellClass, QuadtreeOptions, Region, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportMap {
    pub y: f64,
}

impl TransportMap {
    pub fn new(y: f64) -> Result<Self> {
        if y > 0.0 && y.is_finite() {
            Ok(TransportMap { y })
        } else {
            Err(Error::Argument(format!("transport height must be positive, got {y}")))
        }
    }

    pub fn apply(&self, z: Point) -> Point {
        let z = Complex64::from(z);
        let iy = Complex64::new(0.0, self.y);
        ((z - iy) / (z + iy)).into()
    }

    pub fn inverse(&self, w: Point) -> Point {
        let w = Complex64::from(w);
        let iy = Complex64::new(0.0, self.y);
        (iy * (1.0 + w) / (1.0 - w)).into()
    }

    /// `|T_y'(z)|² = 4y²/|z + iy|⁴`.
    pub fn jacobian(&self, z: Point) -> f64 {
        let m = z.x * z.x + (z.y + self.y) * (z.y + self.y);
        4.0 * self.y * self.y / (m * m)
    }
}

pub fn t_y(y: f64, z: Point) -> Result<Point> {
    if z.y < 0.0 || !z.is_finite() {
        return Err(Error::Domain { x: z.x, y: z.y, space: "half-plane" });
    }
    Ok(TransportMap::new(y)?.apply(z))
}

pub fn t_y_jacobian(y: f64, z: Point) -> Result<f64> {
    Ok(TransportMap::new(y)?.jacobian(z))
}

/// A segment or circular arc: the image of a segment or arc under a Möbius map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenArc {
    Segment { a: Point, b: Point },
    Circle { center: Point, radius: f64, start: f64, sweep: f64 },
}

impl GenArc {
    /// The generalized circle through three points, traversed from `p0` via `pm` to `p1`.
    pub fn through(p0: Point, pm: Point, p1: Point) -> GenArc {
        let (u, v) = (pm - p0, p1 - p0);
        let cross = u.x * v.y - u.y * v.x;
        let scale = u.norm_sqr().max(v.norm_sqr());
        if cross.abs() <= 1e-12 * scale {
            return GenArc::Segment { a: p0, b: p1 };
        }
        // circumcentre relative to p0
        let (uu, vv) = (u.norm_sqr(), v.norm_sqr());
        let cx = (v.y * uu - u.y * vv) / (2.0 * cross);
        let cy = (u.x * vv - v.x * uu) / (2.0 * cross);
        let center = p0 + Point::new(cx, cy);
        let radius = Point::new(cx, cy).norm();
        let a0 = (p0 - center).arg();
        let am = (pm - center).arg();
        let a1 = (p1 - center).arg();
        let s1 = angle_offset(a1, a0);
        let sm = angle_offset(am, a0);
        if sm <= s1 {
            GenArc::Circle { center, radius, start: a0, sweep: s1 }
        } else {
            GenArc::Circle { center, radius, start: a1, sweep: TAU - s1 }
        }
    }

    pub fn nearest_point(&self, p: Point) -> Point {
        match *self {
            GenArc::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return a;
                }
                let t = (((p - a).x * d.x + (p - a).y * d.y) / len2).clamp(0.0, 1.0);
                a + d * t
            }
            GenArc::Circle { center, radius, start, sweep } => {
                let q = p - center;
                let ang = if q.norm() == 0.0 { start } else { q.arg() };
                if angle_offset(ang, start) <= sweep {
                    center + Point::polar(radius, ang)
                } else {
                    let e0 = center + Point::polar(radius, start);
                    let e1 = center + Point::polar(radius, start + sweep);
                    if p.dist(e0) <= p.dist(e1) {
                        e0
                    } else {
                        e1
                    }
                }
            }
        }
    }

    pub fn dist(&self, p: Point) -> f64 {
        p.dist(self.nearest_point(p))
    }
}

/// Boundary pieces of a half-plane shape as `(start, mid, end)` triples.
fn boundary_pieces(s: &Shape) -> Vec<(Point, Point, Point)> {
    let seg = |a: Point, b: Point| (a, (a + b) * 0.5, b);
    match *s {
        Shape::VSlit { x, h } => vec![seg(Point::new(x, 0.0), Point::new(x, h))],
        Shape::Box { x0, x1, y0, y1 } => {
            let c = [Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)];
            (0..4).map(|i| seg(c[i], c[(i + 1) % 4])).collect()
        }
        Shape::HalfDisk { c, r } => vec![
            (Point::new(c + r, 0.0), Point::new(c, r), Point::new(c - r, 0.0)),
            seg(Point::new(c - r, 0.0), Point::new(c + r, 0.0)),
        ],
        Shape::Dot { p } => vec![(p, p, p)],
        _ => Vec::new(),
    }
}

/// The image `T_y(A)` of a hull, with exact euclidean distance queries.
#[derive(Debug, Clone)]
pub struct PushedHull {
    pub map: TransportMap,
    shapes: Vec<Shape>,
    arcs: Vec<(usize, GenArc)>,
}

impl PushedHull {
    pub fn new(hull: &HalfPlaneHull, y: f64) -> Result<Self> {
        let map = TransportMap::new(y)?;
        let mut arcs = Vec::new();
        for (i, s) in hull.shapes().iter().enumerate() {
            for (a, m, b) in boundary_pieces(s) {
                let arc = if a == b {
                    let p = map.apply(a);
                    GenArc::Segment { a: p, b: p }
                } else {
                    GenArc::through(map.apply(a), map.apply(m), map.apply(b))
                };
                arcs.push((i, arc));
            }
        }
        Ok(PushedHull {
            map,
            shapes: hull.shapes().to_vec(),
            arcs,
        })
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn member(&self, w: Point) -> bool {
        if w.norm() >= 1.0 {
            return false;
        }
        let z = self.map.inverse(w);
        self.shapes.iter().any(|s| s.contains(z))
    }

    /// Nearest point of `T_y(A)`: shape index, point and distance.
    pub fn nearest(&self, w: Point) -> Option<(usize, Point, f64)> {
        if self.member(w) {
            let z = self.map.inverse(w);
            let i = self.shapes.iter().position(|s| s.contains(z))?;
            return Some((i, w, 0.0));
        }
        let mut best: Option<(usize, Point, f64)> = None;
        for &(i, ref arc) in &self.arcs {
            let q = arc.nearest_point(w);
            let d = w.dist(q);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((i, q, d));
            }
        }
        best
    }

    pub fn dist(&self, w: Point) -> f64 {
        self.nearest(w).map_or(f64::INFINITY, |(_, _, d)| d)
    }

    /// `min |w|` over the image, or an error unless the image lies in
    /// `1/2 < |w| < 1`.
    pub fn check_annulus(&self) -> Result<f64> {
        let m = self.dist(Point::ORIGIN);
        if m > 0.5 {
            Ok(m)
        } else {
            Err(Error::Annulus { y: self.map.y, min_modulus: m })
        }
    }
}

struct Pullback<'a> {
    shapes: &'a [Shape],
    map: TransportMap,
}

impl Region for Pullback<'_> {
    fn classify(&self, cell: &Rect) -> CellClass {
        if cell.y1 <= 0.0 {
            return CellClass::Exterior;
        }
        if self.shapes.iter().any(|s| s.contains_rect(cell)) {
            CellClass::Inside
        } else if self.shapes.iter().any(|s| s.may_meet_rect(cell)) {
            CellClass::Boundary
        } else {
            CellClass::Outside
        }
    }

    fn density_bounds(&self, cell: &Rect) -> (f64, f64) {
        let y = self.map.y;
        let near_x = if cell.x0 <= 0.0 && cell.x1 >= 0.0 { 0.0 } else { cell.x0.abs().min(cell.x1.abs()) };
        let far_x = cell.x0.abs().max(cell.x1.abs());
        let lo_y = cell.y0.max(0.0) + y;
        let hi_y = cell.y1.max(0.0) + y;
        let m_min = near_x * near_x + lo_y * lo_y;
        let m_max = far_x * far_x + hi_y * hi_y;
        (4.0 * y * y / (m_max * m_max), 4.0 * y * y / (m_min * m_min))
    }
}

/// Membership and distance oracle for `T_y(A)`.
pub fn pushforward_set(hull: &HalfPlaneHull, y: f64) -> Result<PushedHull> {
    PushedHull::new(hull, y)
}

/// Certified euclidean area of `T_y(S)`, computed as `∫_S |T_y'|²`.
/// `S` may be any union of half-plane shapes, rooted or not.
pub fn image_area(shapes: &[Shape], y: f64, tol: Tolerance) -> Result<AreaBounds> {
    let map = TransportMap::new(y)?;
    let Some(bbox) = shapes.iter().map(Shape::bbox).reduce(|a, b| a.union(&b)) else {
        return Ok(AreaBounds::ZERO);
    };
    let region = Pullback { shapes, map };
    let root = square_root(&bbox);
    let q = certified_area(&region, root, &QuadtreeOptions::with_tol(tol));
    Ok(q.bounds)
}

/// Leading-order image area `4|S|/y²` for a set far below `iy`.
pub fn image_area_asymptotic(shapes: &[Shape], y: f64) -> f64 {
    let a: f64 = shapes.iter().map(Shape::area).sum();
    4.0 * a / (y * y)
}
