//! Half-plane capacity, disk capacity and conformal radius: closed forms for
//! the canonical families and walk-on-spheres estimators for everything else.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::layer_of_modulus;
use crate::error::{Error, Result};
use crate::geom::{DiskCompact, HalfPlaneHull, Point, Shape, Space};
use crate::mobius::PushedHull;
use crate::quadtree::AreaBounds;
use crate::wos::{
    derive_seed, height, log_modulus, pairwise_sum, sample_walks, BoundaryLabel, DiskDomain, Domain, Estimate,
    HalfPlaneDomain, WalkParams, Walks,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalKind {
    HalfDisk { r: f64 },
    VSlit { h: f64 },
    Ring { rho: f64 },
}

/// A hull with a closed-form normalized map: the base shape scaled by
/// `scale` about the origin, then shifted by `shift` along the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalHull {
    pub kind: CanonicalKind,
    pub shift: f64,
    pub scale: f64,
}

impl CanonicalHull {
    fn new(kind: CanonicalKind) -> Result<Self> {
        let ok = match kind {
            CanonicalKind::HalfDisk { r } => r > 0.0 && r.is_finite(),
            CanonicalKind::VSlit { h } => h > 0.0 && h.is_finite(),
            CanonicalKind::Ring { rho } => rho > 0.5 && rho < 1.0,
        };
        if !ok {
            return Err(Error::Argument(format!("invalid canonical hull {kind:?}")));
        }
        Ok(CanonicalHull { kind, shift: 0.0, scale: 1.0 })
    }

    pub fn half_disk(r: f64) -> Result<Self> {
        Self::new(CanonicalKind::HalfDisk { r })
    }

    pub fn vslit(h: f64) -> Result<Self> {
        Self::new(CanonicalKind::VSlit { h })
    }

    pub fn ring(rho: f64) -> Result<Self> {
        Self::new(CanonicalKind::Ring { rho })
    }

    pub fn translated(self, t: f64) -> Self {
        CanonicalHull { shift: self.shift + t, ..self }
    }

    pub fn scaled(self, s: f64) -> Self {
        CanonicalHull {
            shift: self.shift * s,
            scale: self.scale * s,
            ..self
        }
    }

    pub fn space(&self) -> Space {
        match self.kind {
            CanonicalKind::Ring { .. } => Space::Disk,
            _ => Space::HalfPlane,
        }
    }

    /// Recognizes a single half-disk, a single slit, or a full ring.
    pub fn recognize(shapes: &[Shape]) -> Option<Self> {
        match shapes {
            [Shape::HalfDisk { c, r }] => Some(CanonicalHull {
                kind: CanonicalKind::HalfDisk { r: *r },
                shift: *c,
                scale: 1.0,
            }),
            [Shape::VSlit { x, h }] => Some(CanonicalHull {
                kind: CanonicalKind::VSlit { h: *h },
                shift: *x,
                scale: 1.0,
            }),
            [Shape::ArcBox { theta0, theta1, rho }] if theta1 - theta0 >= std::f64::consts::TAU => {
                CanonicalHull::ring(*rho).ok()
            }
            _ => None,
        }
    }

    fn effective(&self) -> CanonicalKind {
        match self.kind {
            CanonicalKind::HalfDisk { r } => CanonicalKind::HalfDisk { r: r * self.scale },
            CanonicalKind::VSlit { h } => CanonicalKind::VSlit { h: h * self.scale },
            k => k,
        }
    }

    pub fn hull(&self) -> Result<HalfPlaneHull> {
        let s = match self.effective() {
            CanonicalKind::HalfDisk { r } => Shape::half_disk(self.shift, r)?,
            CanonicalKind::VSlit { h } => Shape::vslit(self.shift, h)?,
            CanonicalKind::Ring { .. } => return Err(Error::Argument("a ring is not a half-plane hull".into())),
        };
        Ok(HalfPlaneHull::new(vec![s])?)
    }

    pub fn compact(&self) -> Result<DiskCompact> {
        match self.kind {
            CanonicalKind::Ring { rho } => Ok(DiskCompact::ring(rho)?),
            _ => Err(Error::Argument("only the ring is a disk set".into())),
        }
    }

    /// Radius of the smallest half-disk about the base point containing the hull.
    pub fn radius(&self) -> f64 {
        match self.effective() {
            CanonicalKind::HalfDisk { r } => r,
            CanonicalKind::VSlit { h } => h,
            CanonicalKind::Ring { .. } => 1.0,
        }
    }

    /// The hydrodynamically normalized map `g_A`, principal branch for slits.
    pub fn g(&self, z: Point) -> Result<Complex64> {
        let w = self.local(z)?;
        let t = Complex64::new(self.shift, 0.0);
        Ok(match self.effective() {
            CanonicalKind::HalfDisk { r } => w + r * r / w + t,
            CanonicalKind::VSlit { h } => w * (1.0 + h * h / (w * w)).sqrt() + t,
            CanonicalKind::Ring { .. } => unreachable!(),
        })
    }

    pub fn g_prime(&self, z: Point) -> Result<Complex64> {
        let w = self.local(z)?;
        Ok(match self.effective() {
            CanonicalKind::HalfDisk { r } => 1.0 - r * r / (w * w),
            CanonicalKind::VSlit { h } => w / (w * (1.0 + h * h / (w * w)).sqrt()),
            CanonicalKind::Ring { .. } => unreachable!(),
        })
    }

    fn local(&self, z: Point) -> Result<Complex64> {
        if self.space() != Space::HalfPlane {
            return Err(Error::Argument("the ring has no half-plane map".into()));
        }
        let inside = self.hull()?.contains(z);
        if z.y <= 0.0 || inside {
            return Err(Error::Domain { x: z.x, y: z.y, space: "hull complement" });
        }
        Ok(Complex64::new(z.x - self.shift, z.y))
    }

    /// `crad(ℍ ∖ A, z) = 2 Im g(z) / |g'(z)|`.
    pub fn crad_exact(&self, z: Point) -> Result<f64> {
        Ok(2.0 * self.g(z)?.im / self.g_prime(z)?.norm())
    }

    /// `dcap(T_y(A)) = −log(crad(ℍ ∖ A, iy) / 2y)`.
    pub fn transported_dcap_exact(&self, y: f64) -> Result<f64> {
        Ok(-(self.crad_exact(Point::new(0.0, y))? / (2.0 * y)).ln())
    }
}

pub fn hcap_exact(c: &CanonicalHull) -> Result<f64> {
    match c.effective() {
        CanonicalKind::HalfDisk { r } => Ok(r * r),
        CanonicalKind::VSlit { h } => Ok(0.5 * h * h),
        CanonicalKind::Ring { .. } => Err(Error::Argument("hcap is defined for half-plane hulls".into())),
    }
}

pub fn dcap_exact(c: &CanonicalHull) -> Result<f64> {
    match c.kind {
        CanonicalKind::Ring { rho } => Ok(-rho.ln()),
        _ => Err(Error::Argument("closed-form dcap is known for rings only".into())),
    }
}

/// Default stopping distance: `1e-4` times the domain scale.
pub fn default_eps_stop(space: Space, hull: Option<&HalfPlaneHull>) -> f64 {
    match space {
        Space::Disk => 1e-4,
        Space::HalfPlane => 1e-4 * (hull.map_or(0.0, HalfPlaneHull::diameter) + 1.0),
    }
}

fn negated_log_modulus(r: &crate::wos::WalkResult) -> f64 {
    -log_modulus(r)
}

/// `−E log|B_τ|` for walks from 0 in any disk domain.
pub fn dcap_of_domain<D: Domain + ?Sized>(d: &D, params: &WalkParams) -> Result<(Estimate, Walks)> {
    let walks = sample_walks(d, Point::ORIGIN, params)?;
    let est = walks.estimate(negated_log_modulus, "terminal projection bias is O(eps_stop)");
    Ok((est, walks))
}

pub fn dcap_mc(b: &DiskCompact, params: &WalkParams) -> Result<Estimate> {
    Ok(dcap_of_domain(&DiskDomain::new(b), params)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightSample {
    pub y: f64,
    /// `y · E[Im B_τ]` for walks started at `x_c + iy`.
    pub value: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcapEstimate {
    /// Extrapolated value, or the largest-y raw value when the fit is rejected.
    pub fitted: Estimate,
    pub slope: f64,
    pub fit_accepted: bool,
    pub center_x: f64,
    pub per_y: Vec<HeightSample>,
}

/// Heights `{4, 8, 16, 32} × R`, `R` the hull radius about its centre.
pub fn default_y_grid(hull: &HalfPlaneHull) -> Vec<f64> {
    let r = hull.radius_about(hull.center_x()).max(f64::MIN_POSITIVE);
    [4.0, 8.0, 16.0, 32.0].iter().map(|m| m * r).collect()
}

/// Weighted least squares of `v = h + c u`; returns `(h, c, var h)`.
fn weighted_line(u: &[f64], v: &[f64], sigma: &[f64]) -> (f64, f64, f64) {
    let floor = 1e-12 * v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1e-300;
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / s.max(floor).powi(2)).collect();
    let s: f64 = w.iter().sum();
    let su: f64 = w.iter().zip(u).map(|(w, u)| w * u).sum();
    let suu: f64 = w.iter().zip(u).map(|(w, u)| w * u * u).sum();
    let sv: f64 = w.iter().zip(v).map(|(w, v)| w * v).sum();
    let suv: f64 = w.iter().zip(u).zip(v).map(|((w, u), v)| w * u * v).sum();
    let det = s * suu - su * su;
    if det.abs() <= f64::EPSILON * s * suu {
        return (sv / s, 0.0, 1.0 / s);
    }
    ((suu * sv - su * suv) / det, (s * suv - su * sv) / det, suu / det)
}

/// Estimates `hcap(A)` from `ĥ(y) = y E[Im B_τ]` on a grid of heights,
/// extrapolated with the model `ĥ(y) = h + c/y²`.
pub fn hcap_mc(a: &HalfPlaneHull, y_grid: &[f64], params: &WalkParams) -> Result<HcapEstimate> {
    if y_grid.len() < 3 {
        return Err(Error::Argument("the y grid needs at least three heights".into()));
    }
    let xc = a.center_x();
    let reach = a.radius_about(xc);
    if let Some(&bad) = y_grid.iter().find(|&&y| !(y > 2.0 * reach) || !y.is_finite()) {
        return Err(Error::Argument(format!(
            "height {bad} is not above twice the hull radius {reach}"
        )));
    }
    let domain = HalfPlaneDomain::new(a);
    let mut per_y = Vec::with_capacity(y_grid.len());
    for (i, &y) in y_grid.iter().enumerate() {
        let p = params.with_seed(derive_seed(params.seed, "hcap", i as u64));
        let walks = sample_walks(&domain, Point::new(xc, y), &p)?;
        let e = walks.estimate(height, "per-height bias is O(1/y²)").affine(y, 0.0);
        per_y.push(HeightSample { y, value: e });
    }
    let u: Vec<f64> = y_grid.iter().map(|y| 1.0 / (y * y)).collect();
    let v: Vec<f64> = per_y.iter().map(|s| s.value.mean).collect();
    let sig: Vec<f64> = per_y.iter().map(|s| s.value.std_error).collect();
    let (h, c, var) = weighted_line(&u, &v, &sig);
    let accepted = per_y
        .iter()
        .zip(&u)
        .all(|(s, u)| (s.value.mean - h - c * u).abs() <= 5.0 * s.value.std_error.max(1e-15 * h.abs()));
    let total: usize = per_y.iter().map(|s| s.value.n_walks).sum();
    let fitted = if accepted {
        Estimate {
            mean: h,
            std_error: var.max(0.0).sqrt(),
            n_walks: total,
            eps_stop: params.eps_stop,
            seed: params.seed,
            bias_note: "extrapolated with h + c/y^2".into(),
            n_flagged: per_y.iter().map(|s| s.value.n_flagged).sum(),
        }
    } else {
        let mut last = per_y.last().expect("grid is non-empty").value.clone();
        last.bias_note = "fit rejected; largest-y raw value".into();
        last
    };
    Ok(HcapEstimate {
        fitted,
        slope: c,
        fit_accepted: accepted,
        center_x: xc,
        per_y,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CradEstimate {
    pub y: f64,
    pub crad: f64,
    pub std_error: f64,
    /// `dcap(T_y(A))`, the quantity actually sampled.
    pub dcap: Estimate,
}

/// `crad(ℍ ∖ A, iy) = 2y · exp(−dcap(T_y(A)))`.
pub fn crad_halfplane(a: &HalfPlaneHull, y: f64, params: &WalkParams) -> Result<CradEstimate> {
    let pushed = PushedHull::new(a, y)?;
    if a.contains(Point::new(0.0, y)) || pushed.dist(Point::ORIGIN) <= 0.0 {
        return Err(Error::Domain { x: 0.0, y, space: "hull complement" });
    }
    let (dcap, _) = dcap_of_domain(&pushed, params)?;
    let crad = 2.0 * y * (-dcap.mean).exp();
    Ok(CradEstimate {
        y,
        crad,
        std_error: crad * dcap.std_error,
        dcap,
    })
}

/// `dcap(T_y(A))` by walks in the transported domain.
pub fn transported_dcap(a: &HalfPlaneHull, y: f64, params: &WalkParams) -> Result<Estimate> {
    Ok(crad_halfplane(a, y, params)?.dcap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSum {
    /// `omega[n]` is the fraction of walks ending on the layer `D_n`.
    pub omega: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub dcap: Estimate,
    /// Walks whose own bracket `[2^{−(n+1)}, 2 ln2 · 2^{−n}]` misses `−log|u|`.
    pub violations: usize,
}

impl LayerSum {
    pub fn sandwich_holds(&self, slack: f64) -> bool {
        self.lower <= self.dcap.mean + slack && self.dcap.mean <= self.upper + slack
    }
}

/// Layer decomposition of the `dcap` walk ensemble; uses the same walks as
/// [`dcap_mc`] for equal parameters.
pub fn dcap_layer_sum(b: &DiskCompact, params: &WalkParams) -> Result<LayerSum> {
    let walks = sample_walks(&DiskDomain::new(b), Point::ORIGIN, params)?;
    layer_sum_of(&walks)
}

pub fn layer_sum_of(walks: &Walks) -> Result<LayerSum> {
    let slack = 2.0 * walks.params.eps_stop;
    let n = walks.results.len();
    let mut counts: Vec<usize> = Vec::new();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let mut vals = vec![0.0; n];
    let mut violations = 0;
    for (i, r) in walks.results.iter().enumerate() {
        let m = r.terminal.norm();
        if !matches!(r.label, BoundaryLabel::Obstacle(_)) || m >= 1.0 {
            continue;
        }
        let Some(layer) = layer_of_modulus(m) else { continue };
        let k = layer as usize;
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
        let v = -m.ln();
        let (l, h) = ((-(layer as f64 + 1.0)).exp2(), 2.0 * LN_2 * (-(layer as f64)).exp2());
        if v + slack < l || v > h + slack {
            violations += 1;
        }
        vals[i] = v;
        lo[i] = l;
        hi[i] = h;
    }
    let omega: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let dcap = Estimate::from_values(&vals, &walks.params, walks.n_flagged, "terminal projection bias is O(eps_stop)");
    Ok(LayerSum {
        omega,
        lower: pairwise_sum(&lo) / n as f64,
        upper: pairwise_sum(&hi) / n as f64,
        dcap,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Exact { value: f64 },
    Estimate(Estimate),
}

impl Quantity {
    pub fn value(&self) -> f64 {
        match self {
            Quantity::Exact { value } => *value,
            Quantity::Estimate(e) => e.mean,
        }
    }

    pub fn std_error(&self) -> Option<f64> {
        match self {
            Quantity::Exact { .. } => None,
            Quantity::Estimate(e) => Some(e.std_error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub n_walks: usize,
    pub eps_stop: f64,
    pub tol_area: f64,
    pub y_grid: Vec<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub space: Space,
    pub hcap: Option<Quantity>,
    pub dcap: Option<Quantity>,
    /// Conformal radius at `crad_at`: `iy` with the smallest grid height in
    /// the half-plane, the origin in the disk.
    pub crad: Option<f64>,
    pub crad_at: Option<Point>,
    pub areas: BTreeMap<String, AreaBounds>,
    pub ratios: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

/// Largest `|g(z) − z|` over a polar grid of points at moduli `1.05R` to
/// `20R` about the base point, kept away from the slit cut.
pub fn max_map_displacement(c: &CanonicalHull) -> Result<f64> {
    let r = c.radius();
    let mut worst = 0.0f64;
    for i in 0..24 {
        let m = r * 1.05 * (20.0f64 / 1.05).powf(i as f64 / 23.0);
        for k in 1..48 {
            let a = std::f64::consts::PI * k as f64 / 48.0;
            let z = Point::new(c.shift + m * a.cos(), m * a.sin());
            if (z.x - c.shift).abs() < 1e-3 * r {
                continue;
            }
            let g = c.g(z)?;
            worst = worst.max((g - Complex64::new(z.x, z.y)).norm());
        }
    }
    Ok(worst)
}

/// Empirical constants `C₁ = |g(i) − i + ih| / (hε)` and
/// `C₂ = |1/g'(i) − 1 + h| / (hε)` for a hull of radius `ε` based at 0.
pub fn map_residual_constants(c: &CanonicalHull) -> Result<(f64, f64)> {
    let h = hcap_exact(c)?;
    let eps = c.radius();
    let i = Point::new(0.0, 1.0);
    let ci = Complex64::new(0.0, 1.0);
    let r1 = (c.g(i)? - ci + ci * h).norm();
    let r2 = (1.0 / c.g_prime(i)? - 1.0 + h).norm();
    Ok((r1 / (h * eps), r2 / (h * eps)))
}

/// `|(2 − crad(ℍ ∖ A, i)) / hcap(A) − 4|` from closed forms.
pub fn hcap_crad_residual_exact(c: &CanonicalHull) -> Result<f64> {
    let crad = c.crad_exact(Point::new(0.0, 1.0))?;
    Ok(((2.0 - crad) / hcap_exact(c)? - 4.0).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub params: WalkParams,
    /// Relative tolerance of every certified area.
    pub tol_area: f64,
    /// Heights for the hcap fit; `None` selects [`default_y_grid`].
    pub y_grid: Option<Vec<f64>>,
    /// Use closed forms; fails on non-canonical input.
    pub exact: bool,
}

fn ratio_of(ratios: &mut BTreeMap<String, f64>, num: &str, value: f64, areas: &BTreeMap<String, AreaBounds>) {
    for (name, a) in areas {
        if a.mid() > 0.0 {
            ratios.insert(format!("{num}/{name}"), value / a.mid());
        }
    }
}

/// Everything the `capacity` command reports for one shape set.
pub fn capacity_report(set: &crate::geom::ShapeSet, opts: &ReportOptions) -> Result<CapacityReport> {
    let tol = crate::quadtree::Tolerance::Relative(opts.tol_area);
    let p = opts.params;
    let mut areas = BTreeMap::new();
    let mut ratios = BTreeMap::new();
    let mut notes = Vec::new();
    let canonical = CanonicalHull::recognize(set.shapes());
    if opts.exact && canonical.is_none() && !set.shapes().is_empty() {
        return Err(Error::Argument("exact mode needs a single half-disk, slit or ring".into()));
    }
    let (hcap, dcap, crad, crad_at, y_grid) = match set {
        crate::geom::ShapeSet::HalfPlane(a) => {
            let grid = opts.y_grid.clone().unwrap_or_else(|| default_y_grid(a));
            let at = if a.shapes().iter().all(|s| s.dist(Point::new(0.0, 1.0)) > 0.0) {
                1.0
            } else {
                grid[0]
            };
            let z = Point::new(0.0, at);
            let (hcap, dcap, crad) = match canonical.filter(|_| opts.exact) {
                Some(c) => {
                    let crad = c.crad_exact(z)?;
                    let d = -(crad / (2.0 * at)).ln();
                    (Quantity::Exact { value: hcap_exact(&c)? }, Quantity::Exact { value: d }, crad)
                }
                None if a.shapes().is_empty() => {
                    (Quantity::Exact { value: 0.0 }, Quantity::Exact { value: 0.0 }, 2.0 * at)
                }
                None => {
                    let h = hcap_mc(a, &grid, &p)?;
                    if !h.fit_accepted {
                        notes.push("hcap fit rejected; value is the largest-y raw estimate".to_string());
                    }
                    let c = crad_halfplane(a, at, &p.with_seed(derive_seed(p.seed, "crad", 0)))?;
                    (Quantity::Estimate(h.fitted), Quantity::Estimate(c.dcap), c.crad)
                }
            };
            areas.insert("neighborhood".to_string(), crate::hyperbolic::neighborhood_area(Space::HalfPlane, a.shapes(), 1.0, tol)?);
            areas.insert("whitney".to_string(), crate::dyadic::whitney_cover_area(a.shapes()));
            areas.insert("lipschitz".to_string(), AreaBounds::exact(crate::dyadic::lipschitz_majorant_area(a.shapes())));
            ratio_of(&mut ratios, "hcap", hcap.value(), &areas);
            (Some(hcap), Some(dcap), crad, z, grid)
        }
        crate::geom::ShapeSet::Disk(b) => {
            let dcap = match canonical.filter(|_| opts.exact) {
                Some(c) => Quantity::Exact { value: dcap_exact(&c)? },
                None if b.shapes().is_empty() => Quantity::Exact { value: 0.0 },
                None => Quantity::Estimate(dcap_mc(b, &p)?),
            };
            areas.insert("set".to_string(), AreaBounds::exact(b.area()));
            areas.insert("neighborhood".to_string(), crate::hyperbolic::neighborhood_area(Space::Disk, b.shapes(), 1.0, tol)?);
            match crate::hyperbolic::filled_neighborhood_area(b, 1.0, tol) {
                Ok(f) => {
                    areas.insert("filled_neighborhood".to_string(), f);
                }
                Err(Error::OriginInNeighborhood) => notes.push("origin lies in N(B); filled neighborhood omitted".to_string()),
                Err(e) => return Err(e),
            }
            match crate::dyadic::dyadic_cover(b.shapes(), crate::dyadic::DEFAULT_N_MAX) {
                Ok(q) => {
                    areas.insert("dyadic_cover".to_string(), q.area);
                }
                Err(e @ Error::CoverTooDeep { .. }) => notes.push(format!("dyadic cover omitted: {e}")),
                Err(e) => return Err(e),
            }
            ratio_of(&mut ratios, "dcap", dcap.value(), &areas);
            let crad = (-dcap.value()).exp();
            (None, Some(dcap), crad, Point::ORIGIN, Vec::new())
        }
    };
    Ok(CapacityReport {
        space: set.space(),
        hcap,
        dcap,
        crad: Some(crad),
        crad_at: Some(crad_at),
        areas,
        ratios,
        notes,
        provenance: Provenance {
            seed: p.seed,
            n_walks: p.n_walks,
            eps_stop: p.eps_stop,
            tol_area: opts.tol_area,
            y_grid,
            exact: opts.exact,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn exact_capacities() {
        assert_eq!(hcap_exact(&CanonicalHull::half_disk(1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(hcap_exact(&CanonicalHull::vslit(1.0).unwrap()).unwrap(), 0.5);
        assert_eq!(hcap_exact(&CanonicalHull::vslit(1.0).unwrap().translated(7.0)).unwrap(), 0.5);
        assert_eq!(hcap_exact(&CanonicalHull::half_disk(1.0).unwrap().scaled(3.0)).unwrap(), 9.0);
        assert!(hcap_exact(&CanonicalHull::ring(0.7).unwrap()).is_err());
        assert!((dcap_exact(&CanonicalHull::ring(0.7).unwrap()).unwrap() - 0.356675).abs() < 1e-6);
        assert!(CanonicalHull::ring(0.4).is_err());
    }

    /// `z (g(z) − z)` at a far point, for comparison with the closed form.
    fn laurent_coefficient(c: &CanonicalHull) -> f64 {
        let z = Complex64::new(c.shift + 3e3, 4e3);
        let g = c.g(Point::new(z.re, z.im)).unwrap();
        ((z - c.shift) * (g - z)).re
    }

    #[test]
    fn closed_form_maps_match_their_capacities() {
        for c in [
            CanonicalHull::half_disk(0.7).unwrap(),
            CanonicalHull::vslit(1.3).unwrap().translated(-2.0),
            CanonicalHull::vslit(0.4).unwrap().scaled(2.5).translated(1.0),
        ] {
            let h = hcap_exact(&c).unwrap();
            assert!((laurent_coefficient(&c) - h).abs() < 1e-6 * h.max(1.0), "{c:?}");
        }
    }

    #[test]
    fn maps_send_the_hull_boundary_to_the_axis() {
        let slit = CanonicalHull::vslit(1.0).unwrap().translated(0.5);
        for t in [0.1, 0.5, 0.99] {
            for side in [-1e-9, 1e-9] {
                let g = slit.g(Point::new(0.5 + side, t)).unwrap();
                assert!(g.im.abs() < 1e-6, "{g}");
            }
        }
        let hd = CanonicalHull::half_disk(2.0).unwrap();
        for k in 1..10 {
            let p = Point::polar(2.0 + 1e-12, k as f64 * 0.3);
            assert!(hd.g(p).unwrap().im.abs() < 1e-9);
        }
        assert!(hd.g(Point::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn g_prime_matches_finite_differences() {
        for c in [CanonicalHull::half_disk(0.8).unwrap(), CanonicalHull::vslit(0.9).unwrap().translated(0.2)] {
            for z in [Point::new(0.3, 1.5), Point::new(-2.0, 0.4), Point::new(1.1, 0.05)] {
                let h = 1e-6;
                let fd = (c.g(z + Point::new(h, 0.0)).unwrap() - c.g(z - Point::new(h, 0.0)).unwrap()) / (2.0 * h);
                assert!((fd - c.g_prime(z).unwrap()).norm() < 1e-6, "{c:?} {z}");
            }
        }
    }

    #[test]
    fn conformal_radius_examples() {
        let hd = CanonicalHull::half_disk(0.3).unwrap();
        let crad = hd.crad_exact(Point::new(0.0, 1.0)).unwrap();
        assert!((crad - 2.0 * 0.91 / 1.09).abs() < 1e-14);
        assert!((crad - 1.669725).abs() < 1e-6);
        let slit = CanonicalHull::vslit(0.5).unwrap();
        assert!((slit.crad_exact(Point::new(0.0, 2.0)).unwrap() - 2.0 * (4.0 - 0.25) / 2.0).abs() < 1e-14);
        let one = CanonicalHull::half_disk(1.0).unwrap();
        let y: f64 = 8.0;
        let expected = (y * y * ((y * y + 1.0) / (y * y - 1.0)).ln()) / 1.0;
        assert!((y * y * one.transported_dcap_exact(y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn dcap_estimates() {
        let p = WalkParams::new(20_000, 1e-4, 1);
        let ring = dcap_mc(&DiskCompact::ring(0.7).unwrap(), &p).unwrap();
        assert!((ring.mean - 0.356675).abs() < 1e-5);
        assert_eq!(dcap_mc(&DiskCompact::empty(), &p).unwrap().mean, 0.0);
        let small = DiskCompact::new(vec![Shape::arc_box(0.0, 0.5, 0.85).unwrap()]).unwrap();
        let big = DiskCompact::new(vec![Shape::arc_box(-0.2, 0.9, 0.75).unwrap()]).unwrap();
        let a = dcap_mc(&small, &p).unwrap();
        let b = dcap_mc(&big, &p).unwrap();
        assert!(a.mean <= b.mean + 3.0 * a.std_error.hypot(b.std_error));
    }

    #[test]
    fn hcap_of_a_half_disk_is_unbiased_at_every_height() {
        let a = HalfPlaneHull::new(vec![Shape::half_disk(0.0, 1.0).unwrap()]).unwrap();
        let est = hcap_mc(&a, &default_y_grid(&a), &WalkParams::new(40_000, 3e-4, 2)).unwrap();
        for s in &est.per_y {
            assert!(s.value.within(1.0, 3.5, 0.0), "{s:?}");
        }
        assert!(est.fit_accepted);
        assert!(est.fitted.within(1.0, 3.5, 0.0), "{:?}", est.fitted);
    }

    #[test]
    fn hcap_preconditions() {
        let a = HalfPlaneHull::new(vec![Shape::vslit(0.0, 1.0).unwrap()]).unwrap();
        let p = WalkParams::new(100, 1e-4, 1);
        assert!(hcap_mc(&a, &[4.0, 8.0], &p).is_err());
        assert!(hcap_mc(&a, &[1.5, 8.0, 16.0], &p).is_err());
        let e = hcap_mc(&HalfPlaneHull::empty(), &[1.0, 2.0, 3.0], &p).unwrap();
        assert_eq!(e.fitted.mean, 0.0);
    }

    #[test]
    fn weighted_fit_recovers_a_line() {
        let u = [1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0];
        let v: Vec<f64> = u.iter().map(|u| 0.5 + 0.125 * u).collect();
        let (h, c, _) = weighted_line(&u, &v, &[0.01, 0.02, 0.04]);
        assert!((h - 0.5).abs() < 1e-12 && (c - 0.125).abs() < 1e-10);
    }

    #[test]
    fn crad_examples() {
        let p = WalkParams::new(20_000, 1e-4, 5);
        let empty = crad_halfplane(&HalfPlaneHull::empty(), 1.0, &p).unwrap();
        assert_eq!(empty.crad, 2.0);
        let hd = HalfPlaneHull::new(vec![Shape::half_disk(0.0, 0.3).unwrap()]).unwrap();
        let e = crad_halfplane(&hd, 1.0, &p).unwrap();
        assert!((e.crad - 1.669725).abs() <= 3.5 * e.std_error + 1e-3, "{e:?}");
        let tall = HalfPlaneHull::new(vec![Shape::vslit(0.0, 2.0).unwrap()]).unwrap();
        assert!(crad_halfplane(&tall, 1.0, &p).is_err());
    }

    #[test]
    fn layer_sum_examples() {
        let p = WalkParams::new(5_000, 1e-4, 3);
        let ring = dcap_layer_sum(&DiskCompact::ring(0.7).unwrap(), &p).unwrap();
        assert_eq!(ring.omega, vec![0.0, 1.0]);
        assert!((ring.lower - 0.25).abs() < 1e-15 && (ring.upper - 2.0 * LN_2 / 2.0).abs() < 1e-15);
        assert!(ring.sandwich_holds(0.0));
        let empty = dcap_layer_sum(&DiskCompact::empty(), &p).unwrap();
        assert!(empty.omega.is_empty());
        assert_eq!((empty.lower, empty.upper, empty.dcap.mean), (0.0, 0.0, 0.0));
        let b = DiskCompact::new(vec![
            Shape::radial_slit(0.5, 0.6).unwrap(),
            Shape::arc_box(2.0, 2.0 + TAU / 8.0, 0.9).unwrap(),
        ])
        .unwrap();
        let s = dcap_layer_sum(&b, &p).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.sandwich_holds(2e-4));
        assert_eq!(s.dcap.mean, dcap_mc(&b, &p).unwrap().mean);
    }

    #[test]
    fn recognizes_canonical_shapes() {
        let c = CanonicalHull::recognize(&[Shape::vslit(3.0, 2.0).unwrap()]).unwrap();
        assert_eq!(hcap_exact(&c).unwrap(), 2.0);
        assert!(CanonicalHull::recognize(&[Shape::vslit(3.0, 2.0).unwrap(), Shape::vslit(5.0, 1.0).unwrap()]).is_none());
        let r = CanonicalHull::recognize(&[Shape::ring(0.8).unwrap()]).unwrap();
        assert!((dcap_exact(&r).unwrap() + 0.8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn small_hulls_move_points_by_at_most_three_eps() {
        for eps in [0.3, 0.1, 0.03] {
            for c in [CanonicalHull::half_disk(eps).unwrap(), CanonicalHull::vslit(eps).unwrap()] {
                let d = max_map_displacement(&c).unwrap();
                assert!(d <= 3.0 * eps, "{c:?} {d}");
            }
        }
    }

    #[test]
    fn residual_constants_are_finite_and_shrink() {
        let mut prev = [f64::INFINITY; 2];
        for eps in [0.3, 0.1, 0.03] {
            let (a1, a2) = map_residual_constants(&CanonicalHull::half_disk(eps).unwrap()).unwrap();
            let (b1, b2) = map_residual_constants(&CanonicalHull::vslit(eps).unwrap()).unwrap();
            for v in [a1, a2, b1, b2] {
                assert!(v.is_finite() && v < 5.0);
            }
            assert!(a1.max(b1) <= prev[0] && a2.max(b2) <= prev[1]);
            prev = [a1.max(b1), a2.max(b2)];
        }
    }

    #[test]
    fn hcap_crad_residual_closed_form() {
        for eps in [0.3, 0.1, 0.03] {
            let r = hcap_crad_residual_exact(&CanonicalHull::half_disk(eps).unwrap()).unwrap();
            assert!((r - 4.0 * eps * eps / (1.0 + eps * eps)).abs() < 1e-9);
        }
        let r = hcap_crad_residual_exact(&CanonicalHull::half_disk(0.3).unwrap()).unwrap();
        assert!((r - 0.330275).abs() < 1e-6);
        let s = hcap_crad_residual_exact(&CanonicalHull::vslit(0.1).unwrap()).unwrap();
        assert!(s.is_finite() && s <= 0.1 * 10.0);
    }

    #[test]
    fn reports_carry_every_ratio_operand() {
        use crate::geom::ShapeSet;
        let opts = ReportOptions {
            params: WalkParams::new(4_000, 1e-3, 1),
            tol_area: 1e-2,
            y_grid: None,
            exact: true,
        };
        let hd = ShapeSet::HalfPlane(HalfPlaneHull::new(vec![Shape::half_disk(0.0, 1.0).unwrap()]).unwrap());
        let r = capacity_report(&hd, &opts).unwrap();
        assert_eq!(r.hcap, Some(Quantity::Exact { value: 1.0 }));
        for name in r.ratios.keys() {
            let (num, den) = name.split_once('/').unwrap();
            assert!(num == "hcap" && r.areas.contains_key(den));
        }
        let ring = ShapeSet::Disk(DiskCompact::ring(0.7).unwrap());
        let r = capacity_report(&ring, &ReportOptions { exact: false, ..opts.clone() }).unwrap();
        assert!((r.dcap.unwrap().value() - 0.356675).abs() < 1e-3);
        assert!(r.areas.contains_key("dyadic_cover") && r.areas.contains_key("set"));
        let two = ShapeSet::HalfPlane(
            HalfPlaneHull::new(vec![Shape::vslit(0.0, 1.0).unwrap(), Shape::vslit(3.0, 1.0).unwrap()]).unwrap(),
        );
        assert!(capacity_report(&two, &opts).is_err());
    }
}
