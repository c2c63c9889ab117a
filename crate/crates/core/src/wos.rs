//! Walk-on-spheres sampling of Brownian exit points.
//!
//! Every walk draws from its own ChaCha8 stream selected by `(seed, index)`,
//! and reductions use a fixed pairwise tree, so results do not depend on the
//! number of worker threads.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geom::{nearest_in, DiskCompact, HalfPlaneHull, Point, Shape, Space};
use crate::hyperbolic::{hyp_dist_to_shape_d, inscribed_euclidean_radius};
use crate::mobius::PushedHull;

pub const DEFAULT_STEP_CAP: u64 = 100_000;
pub const DEFAULT_EPS_STOP: f64 = 1e-4;
/// Estimators fail when more than this fraction of walks hit the step cap.
pub const MAX_FLAGGED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLabel {
    RealAxis,
    UnitCircle,
    Obstacle(usize),
}

/// A planar domain seen through its distance to the boundary.
pub trait Domain: Sync {
    fn space(&self) -> Space;

    /// Radius of an open disk about `p` inside the domain; zero off the domain.
    fn dist_to_boundary(&self, p: Point) -> f64;

    /// Boundary point assigned to a walk stopped at `p`, and its label.
    fn project(&self, p: Point) -> (Point, BoundaryLabel);
}

/// `ℍ ∖ A`.
#[derive(Debug, Clone)]
pub struct HalfPlaneDomain {
    shapes: Vec<Shape>,
}

impl HalfPlaneDomain {
    pub fn new(hull: &HalfPlaneHull) -> Self {
        HalfPlaneDomain { shapes: hull.shapes().to_vec() }
    }
}

impl Domain for HalfPlaneDomain {
    fn space(&self) -> Space {
        Space::HalfPlane
    }

    fn dist_to_boundary(&self, p: Point) -> f64 {
        if p.y <= 0.0 {
            return 0.0;
        }
        self.shapes.iter().fold(p.y, |d, s| d.min(s.dist(p)))
    }

    fn project(&self, p: Point) -> (Point, BoundaryLabel) {
        match nearest_in(&self.shapes, p) {
            Some((i, q, d)) if d <= p.y.max(0.0) => (q, BoundaryLabel::Obstacle(i)),
            _ => (Point::new(p.x, 0.0), BoundaryLabel::RealAxis),
        }
    }
}

/// `𝔻 ∖ B` for raw disk shapes.
#[derive(Debug, Clone)]
pub struct DiskDomain {
    shapes: Vec<Shape>,
}

impl DiskDomain {
    pub fn new(b: &DiskCompact) -> Self {
        DiskDomain { shapes: b.shapes().to_vec() }
    }

    /// Any disk shapes, without the compact-set validation.
    pub fn from_shapes(shapes: Vec<Shape>) -> Self {
        DiskDomain { shapes }
    }
}

fn circle_point(p: Point) -> Point {
    let m = p.norm();
    if m == 0.0 {
        Point::new(1.0, 0.0)
    } else {
        p * (1.0 / m)
    }
}

impl Domain for DiskDomain {
    fn space(&self) -> Space {
        Space::Disk
    }

    fn dist_to_boundary(&self, p: Point) -> f64 {
        let edge = (1.0 - p.norm()).max(0.0);
        self.shapes.iter().fold(edge, |d, s| d.min(s.dist(p)))
    }

    fn project(&self, p: Point) -> (Point, BoundaryLabel) {
        match nearest_in(&self.shapes, p) {
            Some((i, q, d)) if d <= (1.0 - p.norm()).max(0.0) => (q, BoundaryLabel::Obstacle(i)),
            _ => (circle_point(p), BoundaryLabel::UnitCircle),
        }
    }
}

impl Domain for PushedHull {
    fn space(&self) -> Space {
        Space::Disk
    }

    fn dist_to_boundary(&self, w: Point) -> f64 {
        (1.0 - w.norm()).max(0.0).min(self.dist(w))
    }

    fn project(&self, w: Point) -> (Point, BoundaryLabel) {
        match self.nearest(w) {
            Some((i, q, d)) if d <= (1.0 - w.norm()).max(0.0) => (q, BoundaryLabel::Obstacle(i)),
            _ => (circle_point(w), BoundaryLabel::UnitCircle),
        }
    }
}

/// `𝔻 ∖ N_ρ(S)`. Step radii are the euclidean disks inscribed in the
/// hyperbolic balls that miss the neighborhood, so they are never larger
/// than the true distance. Walks stopped near the neighborhood keep their
/// position as terminal point.
#[derive(Debug, Clone)]
pub struct NeighborhoodDomain {
    shapes: Vec<Shape>,
    rho: f64,
}

impl NeighborhoodDomain {
    pub fn new(shapes: Vec<Shape>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Argument(format!("neighborhood radius must be positive, got {rho}")));
        }
        Ok(NeighborhoodDomain { shapes, rho })
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Hyperbolic gap `d(p, S) − ρ` and the nearest shape.
    pub fn gap(&self, p: Point) -> (f64, Option<usize>) {
        let mut best = (f64::INFINITY, None);
        for (i, s) in self.shapes.iter().enumerate() {
            let d = hyp_dist_to_shape_d(p, s);
            if d < best.0 {
                best = (d, Some(i));
            }
        }
        (best.0 - self.rho, best.1)
    }
}

impl Domain for NeighborhoodDomain {
    fn space(&self) -> Space {
        Space::Disk
    }

    fn dist_to_boundary(&self, p: Point) -> f64 {
        let t = p.norm();
        if t >= 1.0 {
            return 0.0;
        }
        let (gap, _) = self.gap(p);
        if gap <= 0.0 {
            return 0.0;
        }
        inscribed_euclidean_radius(t, gap)
    }

    fn project(&self, p: Point) -> (Point, BoundaryLabel) {
        match self.gap(p) {
            (gap, Some(i)) if gap <= 1.0 => (p, BoundaryLabel::Obstacle(i)),
            _ => (circle_point(p), BoundaryLabel::UnitCircle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub terminal: Point,
    pub label: BoundaryLabel,
    pub steps: u64,
    pub stop_dist: f64,
    /// The walk reached the step cap before stopping.
    pub capped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub n_walks: usize,
    pub eps_stop: f64,
    pub seed: u64,
    pub step_cap: u64,
}

impl WalkParams {
    pub fn new(n_walks: usize, eps_stop: f64, seed: u64) -> Self {
        WalkParams {
            n_walks,
            eps_stop,
            seed,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        WalkParams { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n_walks < 2 {
            return Err(Error::Argument("at least two walks are needed".into()));
        }
        if !(self.eps_stop > 0.0 && self.eps_stop.is_finite()) {
            return Err(Error::Argument(format!("eps_stop must be positive, got {}", self.eps_stop)));
        }
        Ok(())
    }
}

/// The random stream of walk `index` under `seed`.
pub fn walk_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A seed for a named sub-computation.
pub fn derive_seed(base: u64, tag: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub fn wos_walk<D: Domain + ?Sized, R: Rng>(
    d: &D,
    start: Point,
    eps_stop: f64,
    step_cap: u64,
    rng: &mut R,
) -> WalkResult {
    let mut z = start;
    let mut steps = 0u64;
    loop {
        let r = d.dist_to_boundary(z);
        if r < eps_stop || steps >= step_cap {
            let (terminal, label) = d.project(z);
            return WalkResult {
                terminal,
                label,
                steps,
                stop_dist: r,
                capped: r >= eps_stop,
            };
        }
        let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
        z = Point::new(z.x + r * c, z.y + r * s);
        steps += 1;
    }
}

/// A walk ensemble from one start point.
#[derive(Debug, Clone)]
pub struct Walks {
    pub results: Vec<WalkResult>,
    pub params: WalkParams,
    pub n_flagged: usize,
}

impl Walks {
    pub fn values(&self, f: impl Fn(&WalkResult) -> f64 + Sync + Send) -> Vec<f64> {
        self.results.par_iter().map(f).collect()
    }

    pub fn estimate(&self, f: impl Fn(&WalkResult) -> f64 + Sync + Send, bias_note: &str) -> Estimate {
        Estimate::from_values(&self.values(f), &self.params, self.n_flagged, bias_note)
    }
}

pub fn sample_walks<D: Domain + ?Sized>(d: &D, start: Point, params: &WalkParams) -> Result<Walks> {
    params.validate()?;
    let inside = match d.space() {
        Space::HalfPlane => start.y > 0.0,
        Space::Disk => start.norm() < 1.0,
    };
    if !inside || d.dist_to_boundary(start) <= 0.0 {
        return Err(Error::Domain {
            x: start.x,
            y: start.y,
            space: "walk",
        });
    }
    let results: Vec<WalkResult> = (0..params.n_walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = walk_stream(params.seed, i);
            wos_walk(d, start, params.eps_stop, params.step_cap, &mut rng)
        })
        .collect();
    let n_flagged = results.iter().filter(|w| w.capped).count();
    if n_flagged as f64 > MAX_FLAGGED_FRACTION * params.n_walks as f64 {
        return Err(Error::StepCap {
            flagged: n_flagged,
            total: params.n_walks,
        });
    }
    Ok(Walks {
        results,
        params: *params,
        n_flagged,
    })
}

/// Sum in a fixed binary tree over the slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_walks: usize,
    pub eps_stop: f64,
    pub seed: u64,
    pub bias_note: String,
    #[serde(default)]
    pub n_flagged: usize,
}

impl Estimate {
    pub fn from_values(v: &[f64], params: &WalkParams, n_flagged: usize, bias_note: &str) -> Estimate {
        let n = v.len() as f64;
        let mean = pairwise_sum(v) / n;
        let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if v.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
            n_walks: v.len(),
            eps_stop: params.eps_stop,
            seed: params.seed,
            bias_note: bias_note.to_string(),
            n_flagged,
        }
    }

    /// Applies an affine map `a·x + b` to the estimate.
    pub fn affine(&self, a: f64, b: f64) -> Estimate {
        Estimate {
            mean: a * self.mean + b,
            std_error: a.abs() * self.std_error,
            ..self.clone()
        }
    }

    pub fn within(&self, target: f64, sigmas: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= (sigmas * self.std_error).max(floor)
    }
}

/// Fraction of walks whose exit satisfies `target`.
pub fn harmonic_measure<D: Domain + ?Sized>(
    d: &D,
    start: Point,
    target: impl Fn(BoundaryLabel, Point) -> bool + Sync + Send,
    params: &WalkParams,
) -> Result<Estimate> {
    let w = sample_walks(d, start, params)?;
    Ok(w.estimate(
        |r| if target(r.label, r.terminal) { 1.0 } else { 0.0 },
        "exit classification is exact up to eps_stop",
    ))
}

/// `log|B_τ|` for walks from 0; outer-circle exits contribute 0.
pub fn log_modulus(r: &WalkResult) -> f64 {
    match r.label {
        BoundaryLabel::UnitCircle => 0.0,
        _ => r.terminal.norm().ln().min(0.0),
    }
}

pub fn expected_log_modulus<D: Domain + ?Sized>(d: &D, params: &WalkParams) -> Result<Estimate> {
    if d.space() != Space::Disk {
        return Err(Error::Argument("log-modulus functional needs a disk domain".into()));
    }
    let w = sample_walks(d, Point::ORIGIN, params)?;
    Ok(w.estimate(log_modulus, "terminal projection bias is O(eps_stop)"))
}

/// `Im B_τ`; real-axis exits contribute 0.
pub fn height(r: &WalkResult) -> f64 {
    match r.label {
        BoundaryLabel::RealAxis => 0.0,
        _ => r.terminal.y,
    }
}

pub fn expected_height<D: Domain + ?Sized>(d: &D, start: Point, params: &WalkParams) -> Result<Estimate> {
    if d.space() != Space::HalfPlane {
        return Err(Error::Argument("height functional needs a half-plane domain".into()));
    }
    let w = sample_walks(d, start, params)?;
    Ok(w.estimate(height, "terminal projection bias is O(eps_stop)"))
}
