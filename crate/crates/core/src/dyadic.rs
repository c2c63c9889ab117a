//! Dyadic geometry: Carleson-type squares and layers of the unit disk,
//! Whitney squares of the half-plane, and the minimal 1-Lipschitz majorant.

use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Shape};
use crate::quadtree::AreaBounds;

/// Default deepest scale accepted by [`dyadic_cover`].
pub const DEFAULT_N_MAX: u32 = 20;

fn pow2_neg(n: u32) -> f64 {
    (-(n as f64)).exp2()
}

/// `Q_J = {z : z/|z| ∈ e^{2πiJ}, 1 − |z| ≤ 2^{−n}}` with
/// `J = [(k−1)/2ⁿ, k/2ⁿ)`, `1 ≤ k ≤ 2ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub n: u32,
    pub k: u64,
}

impl DyadicSquare {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        if n == 0 || n > 62 || k == 0 || k > 1u64 << n {
            return Err(Error::Argument(format!("no dyadic square ({n}, {k})")));
        }
        Ok(DyadicSquare { n, k })
    }

    pub fn area(&self) -> f64 {
        let s = pow2_neg(self.n);
        PI * s * (2.0 * s - s * s)
    }

    /// Angular range `[θ0, θ1)` in radians.
    pub fn angles(&self) -> (f64, f64) {
        let w = TAU * pow2_neg(self.n);
        ((self.k - 1) as f64 * w, self.k as f64 * w)
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 - pow2_neg(self.n)
    }

    /// The square as a closed annular sector.
    pub fn as_shape(&self) -> Shape {
        let (t0, t1) = self.angles();
        Shape::ArcBox {
            theta0: t0,
            theta1: t1,
            rho: self.inner_radius(),
        }
    }

    fn angle_index(&self, z: Point) -> u64 {
        let turns = (z.arg() / TAU).rem_euclid(1.0);
        ((turns * (1u64 << self.n) as f64).floor() as u64).min((1u64 << self.n) - 1) + 1
    }

    pub fn contains(&self, z: Point) -> bool {
        let m = z.norm();
        m < 1.0 && 1.0 - m <= pow2_neg(self.n) && self.angle_index(z) == self.k
    }

    /// Membership in the top half `{z ∈ Q : 1 − |z| > 2^{−(n+1)}}`.
    pub fn top_half_contains(&self, z: Point) -> bool {
        self.contains(z) && 1.0 - z.norm() > pow2_neg(self.n + 1)
    }

    /// Whether `other` is contained in this square (same or finer scale).
    pub fn contains_square(&self, other: &DyadicSquare) -> bool {
        other.n >= self.n && (other.k - 1) >> (other.n - self.n) == self.k - 1
    }
}

/// A dyadic layer `D_n = {2^{−(n+1)} ≤ 1 − |z| < 2^{−n}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LayerIndex(pub u32);

/// Layer of a modulus, allowing `n = 0` for `1/2 ≤ 1 − t < 1`.
pub fn layer_of_modulus(t: f64) -> Option<u32> {
    let u = 1.0 - t;
    if !(u > 0.0 && u <= 1.0) {
        return None;
    }
    let mut n = 0u32;
    while u < pow2_neg(n + 1) {
        n += 1;
    }
    Some(n)
}

pub fn layer_of(z: Point) -> Result<LayerIndex> {
    let t = z.norm();
    match layer_of_modulus(t) {
        Some(n) if n >= 1 => Ok(LayerIndex(n)),
        _ => Err(Error::Domain {
            x: z.x,
            y: z.y,
            space: "dyadic layers",
        }),
    }
}

/// Radial extent `[a, b]` of `1 − |z|` and angular extent `(start, sweep)`
/// in turns, for a disk shape.
fn disk_extent(s: &Shape) -> Result<((f64, f64), (f64, f64))> {
    Ok(match *s {
        Shape::RadialSlit { theta, rho } => ((0.0, 1.0 - rho), (theta / TAU, 0.0)),
        Shape::ArcBox { theta0, theta1, rho } => (
            (0.0, 1.0 - rho),
            (theta0 / TAU, ((theta1 - theta0) / TAU).min(1.0)),
        ),
        Shape::Dot { p } => {
            let u = 1.0 - p.norm();
            ((u, u), (p.arg() / TAU, 0.0))
        }
        _ => return Err(Error::Argument("dyadic cover needs disk shapes".into())),
    })
}

/// Union of all dyadic squares whose top half meets the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCover {
    /// Maximal squares of the union, disjoint modulo boundaries.
    pub squares: Vec<DyadicSquare>,
    pub area: AreaBounds,
}

impl DyadicCover {
    pub fn contains(&self, z: Point) -> bool {
        self.squares.iter().any(|q| q.contains(z))
    }

    pub fn shapes(&self) -> Vec<Shape> {
        self.squares.iter().map(DyadicSquare::as_shape).collect()
    }
}

/// Computes `Q(B)`.
///
/// Top halves at scale `n` cover `2^{−(n+1)} < 1 − |z| ≤ 2^{−n}`. A shape that
/// reaches the circle meets the top halves of every scale from its coarsest
/// one on, and the finer squares sit inside the coarser ones, so only the
/// coarsest scale of each shape contributes maximal squares.
pub fn dyadic_cover(shapes: &[Shape], n_max: u32) -> Result<DyadicCover> {
    let mut all = BTreeSet::new();
    for (index, s) in shapes.iter().enumerate() {
        let ((a, b), (start, sweep)) = disk_extent(s)?;
        let mut scale = None;
        for n in 1..=n_max {
            if pow2_neg(n + 1) < b && a <= pow2_neg(n) {
                scale = Some(n);
                break;
            }
        }
        let Some(n) = scale else {
            if b <= pow2_neg(n_max + 1) && b > 0.0 {
                let needed = (-b.log2()).ceil() as u32;
                return Err(Error::CoverTooDeep { index, needed, n_max });
            }
            continue;
        };
        let count = 1u64 << n;
        let first = ((start.rem_euclid(1.0)) * count as f64).floor() as u64 % count;
        let span = if sweep >= 1.0 {
            count
        } else {
            let last = ((start.rem_euclid(1.0) + sweep) * count as f64).floor() as u64;
            (last - first + 1).min(count)
        };
        for i in 0..span {
            all.insert(DyadicSquare {
                n,
                k: (first + i) % count + 1,
            });
        }
    }
    let squares: Vec<DyadicSquare> = all
        .iter()
        .filter(|q| !all.iter().any(|p| p.n < q.n && p.contains_square(q)))
        .copied()
        .collect();
    let area = squares.iter().map(DyadicSquare::area).sum();
    Ok(DyadicCover {
        squares,
        area: AreaBounds::exact(area),
    })
}

/// Part of a shape lying in one dyadic layer: radii `(r_in, r_out]`
/// intersected with the shape's radial range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerPiece {
    pub shape: usize,
    pub n: u32,
    pub r_in: f64,
    pub r_out: f64,
}

/// Splits each shape into its layer pieces `B_n = B ∩ D_n` up to `n_max`;
/// the remainder beyond `1 − 2^{−(n_max+1)}` is returned with `n = n_max + 1`.
pub fn layer_pieces(shapes: &[Shape], n_max: u32) -> Vec<LayerPiece> {
    let mut out = Vec::new();
    for (i, s) in shapes.iter().enumerate() {
        let rho = match *s {
            Shape::RadialSlit { rho, .. } | Shape::ArcBox { rho, .. } => rho,
            _ => continue,
        };
        for n in 0..=n_max {
            // D_n in radius: (1 − 2^{−n}, 1 − 2^{−(n+1)}]
            let lo = (1.0 - pow2_neg(n)).max(rho);
            let hi = 1.0 - pow2_neg(n + 1);
            if hi > lo {
                out.push(LayerPiece { shape: i, n, r_in: lo, r_out: hi });
            }
        }
        let tail = (1.0 - pow2_neg(n_max + 1)).max(rho);
        out.push(LayerPiece { shape: i, n: n_max + 1, r_in: tail, r_out: 1.0 });
    }
    out
}

/// x-extent of `shape ∩ {s ≤ y ≤ 2s}`.
fn band_extent(shape: &Shape, s: f64) -> Option<(f64, f64)> {
    match *shape {
        Shape::VSlit { x, h } => (s <= h).then_some((x, x)),
        Shape::Box { x0, x1, y0, y1 } => (s <= y1 && 2.0 * s >= y0).then_some((x0, x1)),
        Shape::HalfDisk { c, r } => (s <= r).then(|| {
            let w = (r * r - s * s).sqrt();
            (c - w, c + w)
        }),
        Shape::Dot { p } => (s <= p.y && p.y <= 2.0 * s).then_some((p.x, p.x)),
        _ => None,
    }
}

fn rooted_width(shape: &Shape) -> Option<f64> {
    match *shape {
        Shape::VSlit { .. } => Some(0.0),
        Shape::Box { x0, x1, y0, .. } if y0 == 0.0 => Some(x1 - x0),
        Shape::HalfDisk { r, .. } => Some(2.0 * r),
        _ => None,
    }
}

/// Total area of the distinct closed Whitney squares
/// `[j2^k, (j+1)2^k] × [2^k, 2^{k+1}]` that meet the set.
///
/// Scales are enumerated from the top down; rooted shapes meet every finer
/// band, and the contribution of the unenumerated bands is bounded by
/// `Σ (W_i s + 2s²/3)`, which becomes the gap between `lower` and `upper`.
pub fn whitney_cover_area(shapes: &[Shape]) -> AreaBounds {
    let top = shapes
        .iter()
        .map(|s| s.bbox().y1)
        .fold(0.0f64, f64::max);
    if top <= 0.0 {
        return AreaBounds::ZERO;
    }
    let widths: Vec<f64> = shapes.iter().filter_map(rooted_width).collect();
    let lowest = shapes
        .iter()
        .filter(|s| rooted_width(s).is_none())
        .map(|s| s.bbox().y0)
        .fold(f64::INFINITY, f64::min);

    let mut k = top.log2().floor() as i32;
    let mut total = 0.0f64;
    let mut tail;
    loop {
        let s = (k as f64).exp2();
        let mut intervals: Vec<(i128, i128)> = shapes
            .iter()
            .filter_map(|sh| band_extent(sh, s))
            .map(|(xl, xr)| ((xl / s).ceil() as i128 - 1, (xr / s).floor() as i128))
            .collect();
        intervals.sort_unstable();
        let mut count: i128 = 0;
        let mut cur: Option<(i128, i128)> = None;
        for (a, b) in intervals {
            cur = match cur {
                Some((ca, cb)) if a <= cb + 1 => Some((ca, cb.max(b))),
                Some((ca, cb)) => {
                    count += cb - ca + 1;
                    Some((a, b))
                }
                None => Some((a, b)),
            };
        }
        if let Some((ca, cb)) = cur {
            count += cb - ca + 1;
        }
        total += count as f64 * s * s;

        tail = widths.iter().map(|w| w * s + 2.0 * s * s / 3.0).sum::<f64>();
        let floating_done = 2.0 * s < lowest || lowest.is_infinite();
        if floating_done && (tail <= 1e-16 * total || k < -1000) {
            break;
        }
        k -= 1;
    }
    AreaBounds {
        lower: total,
        upper: total + tail,
        cells_refined: 0,
        tolerance_met: true,
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `y = a + b t`
    Line { a: f64, b: f64, t0: f64, t1: f64 },
    /// `y = √(r² − (t − c)²)`
    Arc { c: f64, r: f64, t0: f64, t1: f64 },
}

impl Piece {
    fn domain(&self) -> (f64, f64) {
        match *self {
            Piece::Line { t0, t1, .. } | Piece::Arc { t0, t1, .. } => (t0, t1),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Piece::Line { a, b, .. } => a + b * t,
            Piece::Arc { c, r, .. } => (r * r - (t - c) * (t - c)).max(0.0).sqrt(),
        }
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Piece::Line { .. } => 0.5 * (self.eval(lo) + self.eval(hi)) * (hi - lo),
            Piece::Arc { c, r, .. } => {
                let f = |t: f64| {
                    let u = ((t - c) / r).clamp(-1.0, 1.0);
                    0.5 * r * r * (u * (1.0 - u * u).sqrt() + u.asin())
                };
                f(hi) - f(lo)
            }
        }
    }
}

fn tent(u: f64, v: f64, lo: f64, hi: f64, out: &mut Vec<Piece>) {
    out.push(Piece::Line { a: v - lo, b: 1.0, t0: lo - v, t1: lo });
    if hi > lo {
        out.push(Piece::Line { a: v, b: 0.0, t0: lo, t1: hi });
    }
    out.push(Piece::Line { a: v + hi, b: -1.0, t0: hi, t1: hi + v });
    let _ = u;
}

fn profile(shape: &Shape, out: &mut Vec<Piece>) {
    match *shape {
        Shape::VSlit { x, h } => tent(x, h, x, x, out),
        Shape::Box { x0, x1, y1, .. } => tent(0.5 * (x0 + x1), y1, x0, x1, out),
        Shape::Dot { p } if p.y > 0.0 => tent(p.x, p.y, p.x, p.x, out),
        Shape::HalfDisk { c, r } => {
            let k = r / SQRT_2;
            out.push(Piece::Line { a: r * SQRT_2 - c, b: 1.0, t0: c - r * SQRT_2, t1: c - k });
            out.push(Piece::Arc { c, r, t0: c - k, t1: c + k });
            out.push(Piece::Line { a: r * SQRT_2 + c, b: -1.0, t0: c + k, t1: c + r * SQRT_2 });
        }
        _ => {}
    }
}

fn crossings(p: &Piece, q: &Piece, out: &mut Vec<f64>) {
    match (*p, *q) {
        (Piece::Line { a: a1, b: b1, .. }, Piece::Line { a: a2, b: b2, .. }) => {
            if b1 != b2 {
                out.push((a2 - a1) / (b1 - b2));
            }
        }
        (Piece::Line { a, b, .. }, Piece::Arc { c, r, .. })
        | (Piece::Arc { c, r, .. }, Piece::Line { a, b, .. }) => {
            let qa = 1.0 + b * b;
            let qb = 2.0 * a * b - 2.0 * c;
            let qc = a * a + c * c - r * r;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                out.push((-qb - sq) / (2.0 * qa));
                out.push((-qb + sq) / (2.0 * qa));
            }
        }
        (Piece::Arc { c: c1, r: r1, .. }, Piece::Arc { c: c2, r: r2, .. }) => {
            if c1 != c2 {
                out.push((r2 * r2 - r1 * r1 - c1 * c1 + c2 * c2) / (2.0 * (c2 - c1)));
            }
        }
    }
}

/// `∫ L(x) dx` for the minimal 1-Lipschitz function `L` lying above the set,
/// `L(x) = sup_{(u,v)} (v − |x − u|)⁺`.
///
/// Each shape contributes a piecewise profile (tents, trapezoids, and for
/// half-disks a circular cap between two slopes); the envelope is swept
/// between all piece endpoints and pairwise crossings and integrated exactly.
pub fn lipschitz_majorant_area(shapes: &[Shape]) -> f64 {
    let mut pieces = Vec::new();
    for s in shapes {
        profile(s, &mut pieces);
    }
    if pieces.is_empty() {
        return 0.0;
    }
    let mut cuts: Vec<f64> = pieces
        .iter()
        .flat_map(|p| {
            let (a, b) = p.domain();
            [a, b]
        })
        .collect();
    let mut scratch = Vec::new();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let (a0, a1) = pieces[i].domain();
            let (b0, b1) = pieces[j].domain();
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo >= hi {
                continue;
            }
            scratch.clear();
            crossings(&pieces[i], &pieces[j], &mut scratch);
            cuts.extend(scratch.iter().copied().filter(|t| *t > lo && *t < hi));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let m = 0.5 * (lo + hi);
        let top = pieces
            .iter()
            .filter(|p| {
                let (a, b) = p.domain();
                a <= m && m <= b
            })
            .max_by(|p, q| p.eval(m).total_cmp(&q.eval(m)));
        if let Some(p) = top {
            if p.eval(m) > 0.0 {
                area += p.integral(lo, hi);
            }
        }
    }
    area
}
