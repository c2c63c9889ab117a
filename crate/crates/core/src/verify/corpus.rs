//! Seeded random hulls and disk sets.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{validate_disk, validate_hull, DiskCompact, HalfPlaneHull, Shape, ShapeSet, Space};
use crate::wos::{derive_seed, walk_stream};

/// Per-shape placement attempts before the element is redrawn.
const PLACE_ATTEMPTS: usize = 200;
/// Redraws of a whole element before giving up.
const ELEMENT_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    SlitForest,
    Staircase,
    HalfdiskMix,
    RadialSlitSet,
    ArcboxSet,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 5] = [
        CorpusKind::SlitForest,
        CorpusKind::Staircase,
        CorpusKind::HalfdiskMix,
        CorpusKind::RadialSlitSet,
        CorpusKind::ArcboxSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::SlitForest => "slit-forest",
            CorpusKind::Staircase => "staircase",
            CorpusKind::HalfdiskMix => "halfdisk-mix",
            CorpusKind::RadialSlitSet => "radial-slit-set",
            CorpusKind::ArcboxSet => "arcbox-set",
        }
    }

    pub fn space(self) -> Space {
        match self {
            CorpusKind::RadialSlitSet | CorpusKind::ArcboxSet => Space::Disk,
            _ => Space::HalfPlane,
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown corpus kind {s:?}")))
    }
}

/// `log₂` of the overall size is uniform on `[log2_min, log2_max]`. In the
/// half-plane the size is the hull diameter; in the disk it is the distance
/// `1 − ρ` of the deepest shape point to the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleDist {
    pub log2_min: f64,
    pub log2_max: f64,
}

impl ScaleDist {
    pub fn for_kind(kind: CorpusKind) -> Self {
        match kind.space() {
            Space::HalfPlane => ScaleDist { log2_min: -2.0, log2_max: 2.0 },
            Space::Disk => ScaleDist { log2_min: -5.0, log2_max: -1.5 },
        }
    }

    fn validate(&self, space: Space) -> Result<()> {
        let ok = self.log2_min.is_finite() && self.log2_max.is_finite() && self.log2_min <= self.log2_max;
        let disk_ok = space == Space::HalfPlane || (self.log2_max < -1.0 && self.log2_min > -30.0);
        if ok && disk_ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid scale range {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub kind: CorpusKind,
    pub count: usize,
    pub scale: ScaleDist,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind, count: usize, seed: u64) -> Self {
        CorpusSpec {
            kind,
            count,
            scale: ScaleDist::for_kind(kind),
            seed,
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Footprint `[lo, hi]` on the axis, or angular range `[start, start + sweep]`.
type Interval = (f64, f64);

fn clear(taken: &[Interval], (lo, hi): Interval, gap: f64) -> bool {
    taken.iter().all(|&(a, b)| hi + gap < a || b + gap < lo)
}

fn clear_on_circle(taken: &[Interval], (start, sweep): Interval, gap: f64) -> bool {
    taken.iter().all(|&(a, w)| {
        let ahead = (a - start).rem_euclid(TAU);
        let behind = (start - a).rem_euclid(TAU);
        ahead > sweep + gap && behind > w + gap
    })
}

/// Places `k` shapes produced by `draw` so that their intervals stay `gap`
/// apart; `None` when some shape finds no room.
fn place(
    rng: &mut ChaCha8Rng,
    k: usize,
    gap: f64,
    on_circle: bool,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> (Shape, Interval),
) -> Option<Vec<Shape>> {
    let mut taken = Vec::with_capacity(k);
    let mut shapes = Vec::with_capacity(k);
    for _ in 0..k {
        let mut placed = false;
        for _ in 0..PLACE_ATTEMPTS {
            let (s, iv) = draw(rng);
            let ok = if on_circle {
                clear_on_circle(&taken, iv, gap)
            } else {
                clear(&taken, iv, gap)
            };
            if ok {
                taken.push(iv);
                shapes.push(s);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(shapes)
}

fn draw_element(kind: CorpusKind, scale: &ScaleDist, rng: &mut ChaCha8Rng) -> Option<Vec<Shape>> {
    let size = uniform(rng, scale.log2_min, scale.log2_max).exp2();
    match kind {
        CorpusKind::SlitForest => {
            let k = rng.random_range(3..=12);
            place(rng, k, size / (8.0 * k as f64), false, |r| {
                let x = uniform(r, 0.0, size);
                let h = log_uniform(r, size / 16.0, size);
                (Shape::VSlit { x, h }, (x, x))
            })
        }
        CorpusKind::Staircase => {
            let k = rng.random_range(2..=6);
            place(rng, k, size / (8.0 * k as f64), false, |r| {
                let w = log_uniform(r, size / 16.0, size / 4.0);
                let x0 = uniform(r, 0.0, size - w);
                let h = log_uniform(r, size / 16.0, size);
                (Shape::Box { x0, x1: x0 + w, y0: 0.0, y1: h }, (x0, x0 + w))
            })
        }
        CorpusKind::HalfdiskMix => {
            let k = rng.random_range(2..=6);
            place(rng, k, size / (8.0 * k as f64), false, |r| {
                if r.random::<f64>() < 0.5 {
                    let rad = log_uniform(r, size / 16.0, size / 4.0);
                    let c = uniform(r, rad, size - rad);
                    (Shape::HalfDisk { c, r: rad }, (c - rad, c + rad))
                } else {
                    let x = uniform(r, 0.0, size);
                    let h = log_uniform(r, size / 16.0, size);
                    (Shape::VSlit { x, h }, (x, x))
                }
            })
        }
        CorpusKind::RadialSlitSet => {
            let k = rng.random_range(3..=12);
            place(rng, k, TAU / (8.0 * k as f64), true, |r| {
                let theta = uniform(r, 0.0, TAU);
                let depth = log_uniform(r, size / 8.0, size);
                (Shape::RadialSlit { theta, rho: 1.0 - depth }, (theta, 0.0))
            })
        }
        CorpusKind::ArcboxSet => {
            let k = rng.random_range(1..=5);
            place(rng, k, TAU / (16.0 * k as f64), true, |r| {
                let depth = log_uniform(r, size / 4.0, size);
                let sweep = (depth * uniform(r, 1.0, 6.0)).min(TAU / (2.0 * k as f64));
                let t0 = uniform(r, 0.0, TAU);
                (
                    Shape::ArcBox {
                        theta0: t0,
                        theta1: t0 + sweep,
                        rho: 1.0 - depth,
                    },
                    (t0, sweep),
                )
            })
        }
    }
}

/// Deterministic corpus: element `j` depends only on `(seed, kind, j)`.
pub fn corpus_generate(spec: &CorpusSpec) -> Result<Vec<ShapeSet>> {
    spec.scale.validate(spec.kind.space())?;
    let mut out = Vec::with_capacity(spec.count);
    for j in 0..spec.count {
        let mut rng = walk_stream(derive_seed(spec.seed, spec.kind.name(), j as u64), 0);
        let mut element = None;
        for _ in 0..ELEMENT_ATTEMPTS {
            if let Some(shapes) = draw_element(spec.kind, &spec.scale, &mut rng) {
                let ok = match spec.kind.space() {
                    Space::HalfPlane => validate_hull(&shapes).is_ok(),
                    Space::Disk => validate_disk(&shapes).is_ok(),
                };
                if ok {
                    element = Some(shapes);
                    break;
                }
            }
        }
        let shapes = element.ok_or(Error::Corpus {
            attempts: ELEMENT_ATTEMPTS,
        })?;
        out.push(match spec.kind.space() {
            Space::HalfPlane => ShapeSet::HalfPlane(HalfPlaneHull::new(shapes)?),
            Space::Disk => ShapeSet::Disk(DiskCompact::new(shapes)?),
        });
    }
    Ok(out)
}

/// `count` hulls drawn in turn from the three half-plane kinds.
pub fn halfplane_corpus(count: usize, seed: u64) -> Result<Vec<HalfPlaneHull>> {
    mixed(count, seed, &[CorpusKind::SlitForest, CorpusKind::Staircase, CorpusKind::HalfdiskMix])?
        .into_iter()
        .map(|s| match s {
            ShapeSet::HalfPlane(h) => Ok(h),
            ShapeSet::Disk(_) => unreachable!(),
        })
        .collect()
}

/// `count` disk sets drawn in turn from the radial-slit and arc-box kinds.
pub fn disk_corpus(count: usize, seed: u64) -> Result<Vec<DiskCompact>> {
    mixed(count, seed, &[CorpusKind::RadialSlitSet, CorpusKind::ArcboxSet])?
        .into_iter()
        .map(|s| match s {
            ShapeSet::Disk(b) => Ok(b),
            ShapeSet::HalfPlane(_) => unreachable!(),
        })
        .collect()
}

fn mixed(count: usize, seed: u64, kinds: &[CorpusKind]) -> Result<Vec<ShapeSet>> {
    let m = kinds.len();
    let mut per_kind: Vec<std::vec::IntoIter<ShapeSet>> = kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| corpus_generate(&CorpusSpec::new(k, count / m + usize::from(i < count % m), seed)).map(Vec::into_iter))
        .collect::<Result<_>>()?;
    Ok((0..count).filter_map(|j| per_kind[j % m].next()).collect())
}
