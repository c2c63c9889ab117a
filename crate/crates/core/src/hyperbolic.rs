//! Hyperbolic metric on the half-plane and the disk (curvature −1), balls as
//! euclidean disks, and certified areas of hyperbolic neighborhoods.
//!
//! Neighborhood membership is exact: `z ∈ N_ρ(S)` iff the euclidean disk
//! equal to the closed hyperbolic ball of radius ρ about `z` meets `S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_offset, dist_to_union, DiskCompact, Point, Rect, Shape, Space};
use crate::quadtree::{
    certified_area, square_root, AreaBounds, CellClass, QuadtreeOptions, Region, Tolerance,
};

/// Hyperbolic radius used for `N(·)` unless stated otherwise.
pub const DEFAULT_RADIUS: f64 = 1.0;

fn check_h(z: Point) -> Result<()> {
    if z.y > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            x: z.x,
            y: z.y,
            space: "halfplane",
        })
    }
}

fn check_d(z: Point) -> Result<()> {
    if z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            x: z.x,
            y: z.y,
            space: "disk",
        })
    }
}

/// Distance in the upper half-plane, `arccosh(1 + |z−w|²/(2 Im z Im w))`.
pub fn hyp_dist_h(z: Point, w: Point) -> Result<f64> {
    check_h(z)?;
    check_h(w)?;
    // 2 asinh form is stable for nearby points
    Ok(2.0 * (z.dist(w) / (2.0 * (z.y * w.y).sqrt())).asinh())
}

/// Distance in the unit disk, `2 atanh(|z−w| / |1 − z̄w|)`.
pub fn hyp_dist_d(z: Point, w: Point) -> Result<f64> {
    check_d(z)?;
    check_d(w)?;
    let num = z.dist(w);
    // |1 − z̄ w|
    let re = 1.0 - (z.x * w.x + z.y * w.y);
    let im = -(z.x * w.y - z.y * w.x);
    Ok(2.0 * (num / re.hypot(im)).atanh())
}

/// Hyperbolic distance from the origin of the disk to a point of modulus `t`.
fn radial_coordinate(t: f64) -> f64 {
    2.0 * t.atanh()
}

/// A closed hyperbolic ball together with the euclidean disk it equals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypBall {
    pub euclidean_center: Point,
    pub euclidean_radius: f64,
    pub hyp_center: Point,
    pub hyp_radius: f64,
    pub space: Space,
}

impl HypBall {
    pub fn contains(&self, p: Point) -> bool {
        p.dist(self.euclidean_center) <= self.euclidean_radius
    }
}

pub fn hyp_ball(space: Space, center: Point, rho: f64) -> Result<HypBall> {
    if !(rho > 0.0) {
        return Err(Error::Argument(format!("ball radius must be positive, got {rho}")));
    }
    let (euclidean_center, euclidean_radius) = match space {
        Space::HalfPlane => {
            check_h(center)?;
            (
                Point::new(center.x, center.y * rho.cosh()),
                center.y * rho.sinh(),
            )
        }
        Space::Disk => {
            check_d(center)?;
            let t2 = center.norm_sqr();
            let tau = (0.5 * rho).tanh();
            let tau2 = tau * tau;
            let denom = 1.0 - t2 * tau2;
            (center * ((1.0 - tau2) / denom), tau * (1.0 - t2) / denom)
        }
    };
    Ok(HypBall {
        euclidean_center,
        euclidean_radius,
        hyp_center: center,
        hyp_radius: rho,
        space,
    })
}

/// Whether `z` lies in the closed hyperbolic ρ-neighborhood of the union.
pub fn neighborhood_member(space: Space, z: Point, shapes: &[Shape], rho: f64) -> Result<bool> {
    let ball = hyp_ball(space, z, rho)?;
    Ok(shapes
        .iter()
        .any(|s| s.intersects_disk(ball.euclidean_center, ball.euclidean_radius)))
}

fn member_unchecked(space: Space, z: Point, shapes: &[Shape], rho: f64) -> bool {
    neighborhood_member(space, z, shapes, rho).unwrap_or(false)
}

/// Minimum over `s ∈ [s0, s1]` of the distance from a point at polar
/// hyperbolic coordinates `(r, γ)` to the geodesic ray at angle 0, radius `s`.
fn dist_to_radial_segment(r: f64, gamma_cos: f64, s0: f64, s1: f64) -> f64 {
    let (a, b) = (r.cosh(), r.sinh() * gamma_cos);
    // a cosh s − b sinh s is convex and minimized at tanh s = b / a
    let s_star = if b > 0.0 { (b / a).atanh() } else { 0.0 };
    let s = s_star.clamp(s0, s1);
    (a * s.cosh() - b * s.sinh()).max(1.0).acosh()
}

/// Distance to the hyperbolic circle of radius `s0` about the origin, at the
/// angular offset whose cosine is `gamma_cos`.
fn dist_to_circle_point(r: f64, gamma_cos: f64, s0: f64) -> f64 {
    (r.cosh() * s0.cosh() - r.sinh() * s0.sinh() * gamma_cos)
        .max(1.0)
        .acosh()
}

/// Exact hyperbolic distance in the disk from `w` to a disk shape.
pub fn hyp_dist_to_shape_d(w: Point, s: &Shape) -> f64 {
    hyp_dist_to_band_d(w, s, 0.0, 1.0)
}

/// Exact hyperbolic distance from `w` to the part of a disk shape with
/// modulus in `[r_in, r_out]`; infinite if that part is empty.
pub fn hyp_dist_to_band_d(w: Point, s: &Shape, r_in: f64, r_out: f64) -> f64 {
    let r = radial_coordinate(w.norm());
    let alpha = w.arg();
    let s1 = if r_out >= 1.0 { f64::INFINITY } else { radial_coordinate(r_out) };
    match *s {
        Shape::RadialSlit { theta, rho } => {
            let lo = rho.max(r_in);
            if lo > r_out {
                return f64::INFINITY;
            }
            dist_to_radial_segment(r, (alpha - theta).cos(), radial_coordinate(lo), s1)
        }
        Shape::ArcBox { theta0, theta1, rho } => {
            let lo = rho.max(r_in);
            if lo > r_out {
                return f64::INFINITY;
            }
            let t = w.norm();
            let sweep = theta1 - theta0;
            let full = sweep >= std::f64::consts::TAU;
            let off = angle_offset(alpha, theta0);
            if t >= lo && t <= r_out && (full || off <= sweep) {
                return 0.0;
            }
            let s0 = radial_coordinate(lo);
            if full {
                return if r < s0 { s0 - r } else { r - s1 };
            }
            // nearest angle of the arcs to alpha
            let arc_cos = if off <= sweep {
                1.0
            } else {
                (off - sweep).cos().max((std::f64::consts::TAU - off).cos())
            };
            let mut d = dist_to_radial_segment(r, (alpha - theta0).cos(), s0, s1)
                .min(dist_to_radial_segment(r, (alpha - theta1).cos(), s0, s1))
                .min(dist_to_circle_point(r, arc_cos, s0));
            if s1.is_finite() {
                d = d.min(dist_to_circle_point(r, arc_cos, s1));
            }
            d
        }
        Shape::Dot { p } => {
            let m = p.norm();
            if m < r_in || m > r_out {
                return f64::INFINITY;
            }
            hyp_dist_d(w, p).unwrap_or(f64::INFINITY)
        }
        _ => panic!("hyperbolic disk distance requested for a half-plane shape"),
    }
}

pub fn hyp_dist_to_union_d(w: Point, shapes: &[Shape]) -> f64 {
    shapes
        .iter()
        .map(|s| hyp_dist_to_shape_d(w, s))
        .fold(f64::INFINITY, f64::min)
}

/// Radius of the largest euclidean disk about `w` (|w| = t) contained in
/// the hyperbolic ball of radius `delta` about `w`.
pub fn inscribed_euclidean_radius(t: f64, delta: f64) -> f64 {
    let tau = (0.5 * delta).tanh();
    (1.0 - t * t) * tau / (1.0 + t * tau)
}

/// The neighborhood `N_ρ(S)` as a quadtree region.
struct Neighborhood<'a> {
    space: Space,
    shapes: &'a [Shape],
    rho: f64,
}

impl Neighborhood<'_> {
    fn root(&self) -> Rect {
        match self.space {
            Space::Disk => Rect::new(-1.0, -1.0, 1.0, 1.0),
            Space::HalfPlane => {
                let b = self
                    .shapes
                    .iter()
                    .map(Shape::bbox)
                    .reduce(|a, b| a.union(&b))
                    .expect("non-empty set");
                let pad = b.y1 * self.rho.sinh();
                let lo = b.y0 * (-self.rho).exp();
                let hi = b.y1 * self.rho.exp();
                let r = Rect::new(b.x0 - pad, lo, b.x1 + pad, hi);
                // small margin so no boundary point sits on the root edge
                let m = 1e-9 * (r.x1 - r.x0).max(r.y1 - r.y0);
                square_root(&Rect::new(r.x0 - m, r.y0, r.x1 + m, r.y1 + m))
            }
        }
    }

    fn member(&self, z: Point, rho: f64) -> bool {
        member_unchecked(self.space, z, self.shapes, rho)
    }
}

impl Region for Neighborhood<'_> {
    fn classify(&self, cell: &Rect) -> CellClass {
        let c = cell.center();
        match self.space {
            Space::HalfPlane => {
                // union of the balls of all cell points fits in this box
                let sh = self.rho.sinh();
                let reach = Rect::new(
                    cell.x0 - cell.y1 * sh,
                    cell.y0 * (-self.rho).exp(),
                    cell.x1 + cell.y1 * sh,
                    cell.y1 * self.rho.exp(),
                );
                if !self.shapes.iter().any(|s| s.may_meet_rect(&reach)) {
                    return CellClass::Outside;
                }
                let s = 0.5 * (cell.x1 - cell.x0);
                if cell.y0 > 0.0 {
                    let rc = (1.0 + s * s / (c.y * (c.y - s))).acosh();
                    if rc < self.rho && self.member(c, self.rho - rc) {
                        return CellClass::Inside;
                    }
                    if !self.member(c, self.rho + rc) {
                        return CellClass::Outside;
                    }
                }
                CellClass::Boundary
            }
            Space::Disk => {
                if cell.dist(Point::ORIGIN) >= 1.0 {
                    return CellClass::Exterior;
                }
                let d = cell.half_diagonal();
                let cm = c.norm();
                // each ball about p lies within 2(1 − |p|) sinh ρ of p
                let reach = d + 2.0 * (1.0 - cm + d).max(0.0) * self.rho.sinh();
                if dist_to_union(self.shapes, c) > reach {
                    return CellClass::Outside;
                }
                if cell.max_dist(Point::ORIGIN) < 1.0 {
                    let outer = cm + d;
                    let rc = 2.0 * d / (1.0 - outer * outer);
                    if rc < self.rho && self.member(c, self.rho - rc) {
                        return CellClass::Inside;
                    }
                    if !self.member(c, self.rho + rc) {
                        return CellClass::Outside;
                    }
                }
                CellClass::Boundary
            }
        }
    }
}

fn check_radius(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("neighborhood radius must be positive, got {rho}")))
    }
}

/// Certified euclidean area of `N_ρ(S)`.
pub fn neighborhood_area(space: Space, shapes: &[Shape], rho: f64, tol: Tolerance) -> Result<AreaBounds> {
    check_radius(rho)?;
    if shapes.is_empty() {
        return Ok(AreaBounds::ZERO);
    }
    let region = Neighborhood { space, shapes, rho };
    let q = certified_area(&region, region.root(), &QuadtreeOptions::with_tol(tol));
    Ok(q.bounds)
}

/// Certified euclidean area of the filled neighborhood `N̂_ρ(B)`: `N_ρ(B)`
/// together with every complementary component that misses the origin.
pub fn filled_neighborhood_area(b: &DiskCompact, rho: f64, tol: Tolerance) -> Result<AreaBounds> {
    filled_area_of(b.shapes(), rho, tol)
}

/// Whether `cell ∩ 𝔻` lies inside one of the shapes. Only convex sectors
/// are tested; anything else answers `false`.
fn disk_part_covered(shapes: &[Shape], cell: &Rect) -> bool {
    shapes.iter().any(|s| match *s {
        Shape::ArcBox { theta0, theta1, rho } => {
            let sweep = theta1 - theta0;
            if cell.dist(Point::ORIGIN) < rho {
                return false;
            }
            if sweep >= std::f64::consts::TAU {
                return true;
            }
            sweep <= std::f64::consts::PI
                && cell
                    .corners()
                    .iter()
                    .all(|p| crate::geom::angle_offset(p.arg(), theta0) <= sweep)
        }
        _ => false,
    })
}

pub(crate) fn filled_area_of(shapes: &[Shape], rho: f64, tol: Tolerance) -> Result<AreaBounds> {
    check_radius(rho)?;
    if shapes.is_empty() {
        return Ok(AreaBounds::ZERO);
    }
    if neighborhood_member(Space::Disk, Point::ORIGIN, shapes, rho)? {
        return Err(Error::OriginInNeighborhood);
    }
    let region = Neighborhood {
        space: Space::Disk,
        shapes,
        rho,
    };
    let q = certified_area(&region, region.root(), &QuadtreeOptions::with_tol(tol));
    let straddles = |l: &crate::quadtree::Leaf| q.cell_rect(l.key).max_dist(Point::ORIGIN) > 1.0;
    let blocked = |l: &crate::quadtree::Leaf| straddles(l) && disk_part_covered(shapes, &q.cell_rect(l.key));

    // only certainly-outside cells connect to the origin
    let strict = q.flood(Point::ORIGIN, |l| l.class == CellClass::Outside);
    // undecided cells may connect as well
    let generous = q.flood(Point::ORIGIN, |l| {
        matches!(l.class, CellClass::Outside | CellClass::Boundary) && !blocked(l)
    });

    let (mut lower, mut upper) = (0.0, 0.0);
    for (i, l) in q.leaves.iter().enumerate() {
        if l.class == CellClass::Exterior {
            continue;
        }
        let a = q.leaf_area(l);
        if !strict[i] {
            upper += a;
        }
        if !generous[i] && !(l.class == CellClass::Boundary && straddles(l)) {
            lower += a;
        }
    }
    let mut bounds = AreaBounds {
        lower,
        upper,
        cells_refined: q.bounds.cells_refined,
        tolerance_met: false,
    };
    bounds.tolerance_met = tol.met(&bounds);
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn halfplane_distance_examples() {
        assert_eq!(hyp_dist_h(Point::new(0.0, 1.0), Point::new(0.0, 1.0)).unwrap(), 0.0);
        let d = hyp_dist_h(Point::new(0.0, 1.0), Point::new(0.0, 2.0)).unwrap();
        // geodesic integral ∫₁² dy/y by Simpson's rule
        let n = 1000;
        let h = 1.0 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w / (1.0 + i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((d - simpson).abs() < 1e-12);
        assert!((d - 0.693147).abs() < 1e-6);
        let d = hyp_dist_h(Point::new(1.0, 1.0), Point::new(0.0, 1.0)).unwrap();
        assert!((d - 1.5f64.acosh()).abs() < 1e-14);
        assert!((d - 0.962424).abs() < 1e-6);
        assert!(hyp_dist_h(Point::new(0.0, 0.0), Point::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn disk_distance_examples() {
        assert_eq!(hyp_dist_d(Point::ORIGIN, Point::ORIGIN).unwrap(), 0.0);
        let d = hyp_dist_d(Point::ORIGIN, Point::new(0.5, 0.0)).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        let di = hyp_dist_d(Point::ORIGIN, Point::new(0.0, 0.5)).unwrap();
        assert!((d - di).abs() < 1e-15);
        assert!(hyp_dist_d(Point::ORIGIN, Point::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn ball_examples() {
        let b = hyp_ball(Space::HalfPlane, Point::new(0.0, 1.0), 1.0).unwrap();
        assert!((b.euclidean_center.y - 1.543081).abs() < 1e-6);
        assert!((b.euclidean_radius - 1.175201).abs() < 1e-6);
        let b2 = hyp_ball(Space::HalfPlane, Point::new(0.0, 2.0), 1.0).unwrap();
        assert!((b2.euclidean_center.y - 2.0 * b.euclidean_center.y).abs() < 1e-14);
        assert!((b2.euclidean_radius - 2.0 * b.euclidean_radius).abs() < 1e-14);
        let d = hyp_ball(Space::Disk, Point::ORIGIN, 1.0).unwrap();
        assert_eq!(d.euclidean_center, Point::ORIGIN);
        assert!((d.euclidean_radius - 0.462117).abs() < 1e-6);
        assert!(hyp_ball(Space::Disk, Point::new(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn ball_boundary_is_at_the_right_distance() {
        for &(space, c) in &[
            (Space::HalfPlane, Point::new(0.3, 0.7)),
            (Space::Disk, Point::new(0.4, -0.5)),
        ] {
            let b = hyp_ball(space, c, 0.8).unwrap();
            for k in 0..16 {
                let p = b.euclidean_center + Point::polar(b.euclidean_radius, k as f64 * 0.4);
                let d = match space {
                    Space::HalfPlane => hyp_dist_h(c, p).unwrap(),
                    Space::Disk => hyp_dist_d(c, p).unwrap(),
                };
                assert!((d - 0.8).abs() < 1e-12, "{space:?} {d}");
            }
        }
    }

    #[test]
    fn membership_examples() {
        let s = [Shape::vslit(0.0, 1.0).unwrap()];
        assert!(neighborhood_member(Space::HalfPlane, Point::new(0.0, 2.0), &s, 1.0).unwrap());
        assert!(!neighborhood_member(Space::HalfPlane, Point::new(10.0, 1.0), &s, 1.0).unwrap());
        assert!(neighborhood_member(Space::HalfPlane, Point::new(0.0, 0.5), &s, 1.0).unwrap());
    }

    #[test]
    fn disk_distance_to_shapes_matches_sampling() {
        let shapes = [
            Shape::radial_slit(0.4, 0.7).unwrap(),
            Shape::arc_box(1.0, 2.2, 0.8).unwrap(),
            Shape::ring(0.9).unwrap(),
        ];
        let probes = [
            Point::new(0.1, 0.2),
            Point::polar(0.6, 0.2),
            Point::polar(0.95, 0.5),
            Point::polar(0.5, 2.8),
            Point::polar(0.85, 0.9),
        ];
        for s in &shapes {
            let samples: Vec<Point> = match *s {
                Shape::RadialSlit { theta, rho } => (0..4000)
                    .map(|i| Point::polar(rho + (0.999 - rho) * i as f64 / 3999.0, theta))
                    .collect(),
                Shape::ArcBox { theta0, theta1, rho } => (0..300)
                    .flat_map(|i| {
                        (0..300).map(move |j| {
                            Point::polar(
                                rho + (0.999 - rho) * i as f64 / 299.0,
                                theta0 + (theta1 - theta0) * j as f64 / 299.0,
                            )
                        })
                    })
                    .collect(),
                _ => unreachable!(),
            };
            for &w in &probes {
                let exact = hyp_dist_to_shape_d(w, s);
                if s.contains(w) {
                    assert_eq!(exact, 0.0);
                    continue;
                }
                let sampled = samples
                    .iter()
                    .map(|&q| hyp_dist_d(w, q).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert!(exact <= sampled + 1e-9, "{s:?} {w}: {exact} > {sampled}");
                assert!(sampled - exact < 2e-2, "{s:?} {w}: {exact} vs {sampled}");
            }
        }
    }

    #[test]
    fn band_distance_matches_sampling() {
        let shapes = [Shape::radial_slit(0.4, 0.6).unwrap(), Shape::arc_box(1.0, 2.2, 0.6).unwrap(), Shape::ring(0.6).unwrap()];
        let (r_in, r_out) = (0.75, 0.875);
        let probes = [Point::ORIGIN, Point::polar(0.8, 0.1), Point::polar(0.95, 1.5), Point::polar(0.7, 3.0), Point::polar(0.8, 1.6)];
        for s in &shapes {
            let (t0, t1) = match *s {
                Shape::RadialSlit { theta, .. } => (theta, theta),
                Shape::ArcBox { theta0, theta1, .. } => (theta0, theta1),
                _ => unreachable!(),
            };
            let samples: Vec<Point> = (0..400)
                .flat_map(|i| {
                    (0..400).map(move |j| {
                        Point::polar(r_in + (r_out - r_in) * i as f64 / 399.0, t0 + (t1 - t0) * j as f64 / 399.0)
                    })
                })
                .collect();
            for &w in &probes {
                let exact = hyp_dist_to_band_d(w, s, r_in, r_out);
                if exact == 0.0 {
                    assert!(s.contains(w) && w.norm() >= r_in && w.norm() <= r_out);
                    continue;
                }
                let sampled = samples.iter().map(|&q| hyp_dist_d(w, q).unwrap()).fold(f64::INFINITY, f64::min);
                assert!(exact <= sampled + 1e-9, "{s:?} {w}: {exact} > {sampled}");
                assert!(sampled - exact < 2e-2, "{s:?} {w}: {exact} vs {sampled}");
            }
        }
        assert_eq!(hyp_dist_to_band_d(Point::ORIGIN, &shapes[0], 0.2, 0.5), f64::INFINITY);
    }

    #[test]
    fn empty_and_point_neighborhoods() {
        let tol = Tolerance::Absolute(1e-2);
        assert_eq!(neighborhood_area(Space::HalfPlane, &[], 1.0, tol).unwrap(), AreaBounds::ZERO);
        let a = neighborhood_area(Space::HalfPlane, &[Shape::dot(0.0, 1.0)], 1.0, tol).unwrap();
        let exact = PI * 1f64.sinh().powi(2);
        assert!((exact - 4.33879).abs() < 1e-4);
        assert!(a.contains(exact), "{a:?}");
        assert!(a.width() <= 1e-2);

        let d = neighborhood_area(Space::Disk, &[Shape::dot(0.3, 0.2)], 0.7, tol).unwrap();
        let b = hyp_ball(Space::Disk, Point::new(0.3, 0.2), 0.7).unwrap();
        assert!(d.contains(PI * b.euclidean_radius.powi(2)), "{d:?}");
    }

    #[test]
    fn slit_neighborhood_scales_quadratically() {
        let tol = 2e-3;
        let s = [Shape::vslit(0.0, 1.0).unwrap()];
        let a1 = neighborhood_area(Space::HalfPlane, &s, 1.0, Tolerance::Absolute(tol)).unwrap();
        for r in [0.5, 2.0] {
            let sr = [s[0].scaled(r)];
            let ar =
                neighborhood_area(Space::HalfPlane, &sr, 1.0, Tolerance::Absolute(tol * r * r)).unwrap();
            assert!((ar.mid() - r * r * a1.mid()).abs() <= 2.0 * tol * r * r, "{r}: {ar:?} {a1:?}");
        }
    }

    #[test]
    fn filled_neighborhood_of_a_single_slit_is_unfilled() {
        let b = DiskCompact::new(vec![Shape::radial_slit(0.3, 0.8).unwrap()]).unwrap();
        let tol = Tolerance::Absolute(2e-3);
        let n = neighborhood_area(Space::Disk, b.shapes(), 1.0, tol).unwrap();
        let f = filled_neighborhood_area(&b, 1.0, tol).unwrap();
        assert!((n.mid() - f.mid()).abs() <= 2.0 * 2e-3, "{n:?} {f:?}");
        assert_eq!(filled_neighborhood_area(&DiskCompact::empty(), 1.0, tol).unwrap(), AreaBounds::ZERO);
    }

    /// Flood fill on a uniform grid with exact point membership.
    fn grid_filled_area(shapes: &[Shape], rho: f64, n: usize) -> (f64, f64) {
        let h = 2.0 / n as f64;
        let idx = |i: usize, j: usize| i * n + j;
        let mut inside = vec![false; n * n];
        let mut in_disk = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = Point::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                if p.norm() < 1.0 {
                    in_disk[idx(i, j)] = true;
                    inside[idx(i, j)] = neighborhood_member(Space::Disk, p, shapes, rho).unwrap();
                }
            }
        }
        let mut seen = vec![false; n * n];
        let mut stack = vec![(n / 2, n / 2)];
        seen[idx(n / 2, n / 2)] = true;
        while let Some((i, j)) = stack.pop() {
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                    continue;
                }
                let k = idx(a as usize, b as usize);
                if !seen[k] && in_disk[k] && !inside[k] {
                    seen[k] = true;
                    stack.push((a as usize, b as usize));
                }
            }
        }
        let cell = h * h;
        let n_area = inside.iter().filter(|&&v| v).count() as f64 * cell;
        let filled = (0..n * n).filter(|&k| in_disk[k] && !seen[k]).count() as f64 * cell;
        (n_area, filled)
    }

    #[test]
    fn pocket_between_arcs_is_filled() {
        let b = DiskCompact::new(vec![
            Shape::arc_box(0.0, 1.0, 0.6).unwrap(),
            Shape::arc_box(1.3, 2.3, 0.6).unwrap(),
        ])
        .unwrap();
        let tol = Tolerance::Relative(2e-3);
        let n = neighborhood_area(Space::Disk, b.shapes(), 1.0, tol).unwrap();
        let f = filled_neighborhood_area(&b, 1.0, tol).unwrap();
        assert!(f.lower > n.upper, "{n:?} {f:?}");
        let (grid_n, grid_f) = grid_filled_area(b.shapes(), 1.0, 800);
        assert!(grid_f > grid_n);
        assert!((grid_f - f.mid()).abs() < 0.02, "{grid_f} vs {f:?}");
    }

    #[test]
    fn origin_inside_neighborhood_is_rejected() {
        let shapes = [Shape::dot(0.1, 0.0)];
        assert!(matches!(
            filled_area_of(&shapes, 1.0, Tolerance::Absolute(1e-2)),
            Err(Error::OriginInNeighborhood)
        ));
    }
}
