//! Worked examples with known values, through the public API.

use std::f64::consts::PI;

use hcap_core::capacity::{
    capacity_report, crad_halfplane, dcap_mc, default_y_grid, hcap_exact, hcap_mc, CanonicalHull, ReportOptions,
};
use hcap_core::dyadic::{dyadic_cover, layer_of_modulus, lipschitz_majorant_area, whitney_cover_area, DyadicSquare};
use hcap_core::geom::{euclid_dist, shape_intersects_disk, validate_hull};
use hcap_core::hyperbolic::{
    filled_neighborhood_area, hyp_ball, hyp_dist_d, hyp_dist_h, neighborhood_area, neighborhood_member,
};
use hcap_core::mobius::{image_area, t_y, t_y_jacobian};
use hcap_core::wos::{expected_log_modulus, DiskDomain, WalkParams};
use hcap_core::{DiskCompact, HalfPlaneHull, Point, Shape, ShapeFile, ShapeSet, Space, Tolerance};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn distances_to_shapes() {
    let slit = Shape::vslit(0.0, 1.0).unwrap();
    assert!(close(euclid_dist(Point::new(0.0, 2.0), &slit), 1.0, 1e-15));
    assert_eq!(euclid_dist(Point::new(0.0, 1.0), &slit), 0.0);
    let hd = Shape::half_disk(0.0, 1.0).unwrap();
    assert!(close(euclid_dist(Point::new(3.0, 4.0), &hd), 4.0, 1e-12));
    assert!(shape_intersects_disk(&slit, Point::new(0.0, 2.0), 1.0));
    assert!(!shape_intersects_disk(&slit, Point::new(0.0, 2.0), 0.5));
    let ab = Shape::arc_box(0.0, PI / 2.0, 0.8).unwrap();
    assert!(!shape_intersects_disk(&ab, Point::ORIGIN, 0.79));
}

#[test]
fn hull_validation() {
    validate_hull(&[Shape::vslit(0.0, 1.0).unwrap(), Shape::vslit(1.0, 1.0).unwrap()]).unwrap();
    assert!(validate_hull(&[Shape::half_disk(0.0, 1.0).unwrap(), Shape::half_disk(1.0, 1.0).unwrap()]).is_err());
    validate_hull(&[]).unwrap();
}

#[test]
#[allow(clippy::approx_constant)]
fn hyperbolic_distances_and_balls() {
    assert_eq!(hyp_dist_h(Point::new(0.0, 1.0), Point::new(0.0, 1.0)).unwrap(), 0.0);
    assert!(close(hyp_dist_h(Point::new(0.0, 1.0), Point::new(0.0, 2.0)).unwrap(), 0.693147, 1e-6));
    assert!(close(hyp_dist_h(Point::new(1.0, 1.0), Point::new(0.0, 1.0)).unwrap(), 0.962424, 1e-6));
    assert_eq!(hyp_dist_d(Point::ORIGIN, Point::ORIGIN).unwrap(), 0.0);
    assert!(close(hyp_dist_d(Point::ORIGIN, Point::new(0.5, 0.0)).unwrap(), 1.098612, 1e-6));

    let b = hyp_ball(Space::HalfPlane, Point::new(0.0, 1.0), 1.0).unwrap();
    assert!(close(b.euclidean_center.y, 1.543081, 1e-6) && close(b.euclidean_radius, 1.175201, 1e-6));
    let b = hyp_ball(Space::Disk, Point::ORIGIN, 1.0).unwrap();
    assert!(b.euclidean_center.norm() < 1e-15 && close(b.euclidean_radius, 0.462117, 1e-6));
    let b = hyp_ball(Space::HalfPlane, Point::new(0.0, 2.0), 1.0).unwrap();
    assert!(close(b.euclidean_center.y, 3.086161, 1e-6) && close(b.euclidean_radius, 2.350402, 1e-6));
}

#[test]
fn neighborhood_membership_and_area() {
    let slit = [Shape::vslit(0.0, 1.0).unwrap()];
    assert!(neighborhood_member(Space::HalfPlane, Point::new(0.0, 2.0), &slit, 1.0).unwrap());
    assert!(!neighborhood_member(Space::HalfPlane, Point::new(10.0, 1.0), &slit, 1.0).unwrap());
    assert!(neighborhood_member(Space::HalfPlane, Point::new(0.0, 0.5), &slit, 1.0).unwrap());

    let tol = Tolerance::Relative(1e-3);
    let empty = neighborhood_area(Space::HalfPlane, &[], 1.0, tol).unwrap();
    assert_eq!((empty.lower, empty.upper), (0.0, 0.0));
    let dot = neighborhood_area(Space::HalfPlane, &[Shape::dot(0.0, 1.0)], 1.0, tol).unwrap();
    let exact = PI * 1f64.sinh().powi(2);
    assert!(dot.lower <= exact && exact <= dot.upper, "{dot:?}");
    assert!(close(exact, 4.33879, 1e-4));
}

#[test]
fn filled_neighborhoods() {
    let tol = Tolerance::Relative(1e-3);
    let one = DiskCompact::new(vec![Shape::radial_slit(0.0, 0.9).unwrap()]).unwrap();
    let n = neighborhood_area(Space::Disk, one.shapes(), 1.0, tol).unwrap();
    let f = filled_neighborhood_area(&one, 1.0, tol).unwrap();
    assert!((f.mid() - n.mid()).abs() <= 2e-3 * n.mid(), "{n:?} {f:?}");

    // sectors reach the circle, so a nearly full ring leaves nothing to fill
    let c = DiskCompact::new(vec![Shape::arc_box(0.0, 2.0 * PI - 0.01, 0.9).unwrap()]).unwrap();
    let n = neighborhood_area(Space::Disk, c.shapes(), 1.0, tol).unwrap();
    let f = filled_neighborhood_area(&c, 1.0, tol).unwrap();
    assert!((f.mid() - n.mid()).abs() <= 2e-3 * n.mid(), "{n:?} {f:?}");

    let pocket = DiskCompact::new(vec![
        Shape::arc_box(0.0, 1.0, 0.6).unwrap(),
        Shape::arc_box(1.3, 2.3, 0.6).unwrap(),
    ])
    .unwrap();
    let n = neighborhood_area(Space::Disk, pocket.shapes(), 1.0, tol).unwrap();
    let f = filled_neighborhood_area(&pocket, 1.0, tol).unwrap();
    assert!(f.lower > n.upper, "{n:?} {f:?}");
    assert_eq!(filled_neighborhood_area(&DiskCompact::empty(), 1.0, tol).unwrap().upper, 0.0);
}

#[test]
fn dyadic_examples() {
    let q = dyadic_cover(&[Shape::dot(0.8, 0.0)], 20).unwrap();
    assert_eq!(q.squares, vec![DyadicSquare::new(2, 1).unwrap()]);
    assert_eq!(dyadic_cover(&[], 20).unwrap().squares.len(), 0);
    assert_eq!(layer_of_modulus(0.8), Some(2));
    assert_eq!(layer_of_modulus(0.75), Some(1));
    assert_eq!(layer_of_modulus(0.99), Some(6));

    assert!(close(whitney_cover_area(&[Shape::dot(0.5, 1.5)]).mid(), 1.0, 1e-12));
    assert!(close(whitney_cover_area(&[Shape::vslit(0.0, 1.0).unwrap()]).mid(), 8.0 / 3.0, 1e-6));
    assert_eq!(whitney_cover_area(&[]).mid(), 0.0);
    assert!(close(lipschitz_majorant_area(&[Shape::vslit(0.0, 1.0).unwrap()]), 1.0, 1e-12));
    let two = [Shape::vslit(0.0, 1.0).unwrap(), Shape::vslit(10.0, 1.0).unwrap()];
    assert!(close(lipschitz_majorant_area(&two), 2.0, 1e-12));
    assert_eq!(lipschitz_majorant_area(&[]), 0.0);
}

#[test]
fn transport_map_examples() {
    assert!(t_y(1.0, Point::new(0.0, 1.0)).unwrap().norm() < 1e-16);
    assert!(close(t_y(1.0, Point::new(0.0, 3.0)).unwrap().x, 0.5, 1e-15));
    assert!(close(t_y(1.0, Point::ORIGIN).unwrap().x, -1.0, 1e-15));
    assert!(close(t_y_jacobian(1.0, Point::new(0.0, 1.0)).unwrap(), 0.25, 1e-15));

    let s = [Shape::boxed(0.0, 1.0, 1.0, 2.0).unwrap()];
    let y = 400.0;
    let a = image_area(&s, y, Tolerance::Relative(1e-3)).unwrap();
    let r = (y * y * a.lower / 4.0, y * y * a.upper / 4.0);
    assert!(r.0 >= 0.97 && r.1 <= 1.0, "{r:?}");
    assert_eq!(image_area(&[], y, Tolerance::Relative(1e-3)).unwrap().upper, 0.0);
}

#[test]
fn exact_capacities() {
    assert_eq!(hcap_exact(&CanonicalHull::half_disk(1.0).unwrap()).unwrap(), 1.0);
    assert_eq!(hcap_exact(&CanonicalHull::vslit(1.0).unwrap()).unwrap(), 0.5);
    assert_eq!(hcap_exact(&CanonicalHull::vslit(1.0).unwrap().translated(7.0)).unwrap(), 0.5);
    let c = CanonicalHull::half_disk(0.3).unwrap();
    assert!(close(c.crad_exact(Point::new(0.0, 1.0)).unwrap(), 1.669725, 1e-6));
}

#[test]
fn monte_carlo_capacities() {
    let p = WalkParams::new(40_000, 1e-4, 21);
    let ring = DiskCompact::ring(0.7).unwrap();
    let d = dcap_mc(&ring, &p).unwrap();
    assert!(close(d.mean, 0.356675, 1e-3), "{d:?}");
    let e = expected_log_modulus(&DiskDomain::new(&DiskCompact::empty()), &p).unwrap();
    assert!(e.mean.abs() < 1e-3);
    assert!(dcap_mc(&DiskCompact::empty(), &p).unwrap().mean.abs() < 1e-3);

    let hd = HalfPlaneHull::new(vec![Shape::half_disk(0.0, 1.0).unwrap()]).unwrap();
    let h = hcap_mc(&hd, &default_y_grid(&hd), &p).unwrap();
    for s in &h.per_y {
        assert!(s.value.within(1.0, 4.0, 1e-3), "{s:?}");
    }
    let empty = crad_halfplane(&HalfPlaneHull::empty(), 1.0, &p).unwrap();
    assert!(close(empty.crad, 2.0, 1e-3));
}

#[test]
fn report_for_a_shape_file() {
    let f = ShapeFile::parse(r#"{"space":"halfplane","shapes":[{"type":"halfdisk","c":0,"r":1}]}"#).unwrap();
    let set = f.clone().into_set().unwrap();
    assert!(matches!(set, ShapeSet::HalfPlane(_)));
    assert_eq!(ShapeFile::from_set(&set), f);
    let opts = ReportOptions {
        params: WalkParams::new(1000, 1e-4, 1),
        tol_area: 1e-2,
        y_grid: None,
        exact: true,
    };
    let r = capacity_report(&set, &opts).unwrap();
    assert_eq!(r.hcap.unwrap().value(), 1.0);
    assert!(r.areas.contains_key("neighborhood") && r.ratios.contains_key("hcap/neighborhood"));
    assert!(r.provenance.exact);
}
