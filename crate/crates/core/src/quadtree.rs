//! Certified area integration on an adaptive quadtree.
//!
//! A [`Region`] classifies closed square cells as inside, outside or
//! undecided and bounds an integrand over each cell. Refinement proceeds
//! level by level: cells are classified in parallel, accumulated in index
//! order, and only undecided cells (or inside cells whose integrand still
//! varies too much) are split. The bounds are valid after every level, so a
//! depth or cell cap only costs tightness.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{Point, Rect};

/// Certified lower/upper bounds on an area (or on an integral over an area).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBounds {
    pub lower: f64,
    pub upper: f64,
    pub cells_refined: usize,
    pub tolerance_met: bool,
}

impl AreaBounds {
    pub const ZERO: AreaBounds = AreaBounds {
        lower: 0.0,
        upper: 0.0,
        cells_refined: 0,
        tolerance_met: true,
    };

    pub fn exact(v: f64) -> Self {
        AreaBounds {
            lower: v,
            upper: v,
            cells_refined: 0,
            tolerance_met: true,
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn scaled(&self, s: f64) -> AreaBounds {
        AreaBounds {
            lower: self.lower * s,
            upper: self.upper * s,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// Relative to the current lower bound.
    Relative(f64),
}

impl Tolerance {
    fn absolute(self, lower: f64) -> f64 {
        match self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(r) => r * lower,
        }
    }

    pub fn met(self, b: &AreaBounds) -> bool {
        b.width() <= self.absolute(b.lower)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    /// Cell lies inside the region.
    Inside,
    /// Cell misses the region.
    Outside,
    /// Undecided at this resolution.
    Boundary,
    /// Cell lies outside the ambient space; never counted.
    Exterior,
}

pub trait Region: Sync {
    fn classify(&self, cell: &Rect) -> CellClass;

    /// Lower and upper bounds of the integrand over the cell.
    fn density_bounds(&self, _cell: &Rect) -> (f64, f64) {
        (1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadtreeOptions {
    pub max_depth: u8,
    pub tol: Tolerance,
    /// Refinement stops (with `tolerance_met = false`) once a level would
    /// exceed this many active cells.
    pub max_active: usize,
}

impl Default for QuadtreeOptions {
    fn default() -> Self {
        QuadtreeOptions {
            max_depth: 24,
            tol: Tolerance::Relative(1e-3),
            max_active: 4_000_000,
        }
    }
}

impl QuadtreeOptions {
    pub fn with_tol(tol: Tolerance) -> Self {
        QuadtreeOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellKey {
    pub depth: u8,
    pub ix: u32,
    pub iy: u32,
}

impl CellKey {
    fn children(self) -> [CellKey; 4] {
        let (d, x, y) = (self.depth + 1, self.ix * 2, self.iy * 2);
        [
            CellKey { depth: d, ix: x, iy: y },
            CellKey { depth: d, ix: x + 1, iy: y },
            CellKey { depth: d, ix: x, iy: y + 1 },
            CellKey { depth: d, ix: x + 1, iy: y + 1 },
        ]
    }

    fn parent(self) -> Option<CellKey> {
        (self.depth > 0).then(|| CellKey {
            depth: self.depth - 1,
            ix: self.ix / 2,
            iy: self.iy / 2,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Leaf {
    pub key: CellKey,
    pub class: CellClass,
}

/// Result of a refinement: the bounds and the final leaf partition.
#[derive(Debug, Clone)]
pub struct Quadtree {
    pub root: Rect,
    pub leaves: Vec<Leaf>,
    pub bounds: AreaBounds,
}

impl Quadtree {
    pub fn cell_rect(&self, key: CellKey) -> Rect {
        cell_rect(&self.root, key)
    }

    pub fn leaf_area(&self, leaf: &Leaf) -> f64 {
        self.cell_rect(leaf.key).area()
    }

    /// Breadth-first flood over edge-adjacent leaves starting from every
    /// leaf that contains `start` and is passable.
    pub fn flood(&self, start: Point, passable: impl Fn(&Leaf) -> bool) -> Vec<bool> {
        let index: HashMap<CellKey, usize> = self
            .leaves
            .iter()
            .enumerate()
            .map(|(i, l)| (l.key, i))
            .collect();
        let mut internal = HashSet::new();
        for l in &self.leaves {
            let mut k = l.key;
            while let Some(p) = k.parent() {
                if !internal.insert(p) {
                    break;
                }
                k = p;
            }
        }

        let mut reached = vec![false; self.leaves.len()];
        let mut queue = std::collections::VecDeque::new();
        for (i, l) in self.leaves.iter().enumerate() {
            if passable(l) && self.cell_rect(l.key).contains(start) {
                reached[i] = true;
                queue.push_back(i);
            }
        }
        let mut found = Vec::new();
        while let Some(i) = queue.pop_front() {
            let key = self.leaves[i].key;
            for dir in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                found.clear();
                neighbors(key, dir, &index, &internal, &mut found);
                for &j in &found {
                    if !reached[j] && passable(&self.leaves[j]) {
                        reached[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        reached
    }
}

fn cell_rect(root: &Rect, key: CellKey) -> Rect {
    let side = (root.x1 - root.x0) / (1u64 << key.depth) as f64;
    let x0 = root.x0 + side * key.ix as f64;
    let y0 = root.y0 + side * key.iy as f64;
    Rect::new(x0, y0, x0 + side, y0 + side)
}

/// Leaves sharing an edge with `key` on side `dir`.
fn neighbors(
    key: CellKey,
    dir: (i64, i64),
    index: &HashMap<CellKey, usize>,
    internal: &HashSet<CellKey>,
    out: &mut Vec<usize>,
) {
    let n = 1i64 << key.depth;
    let (tx, ty) = (key.ix as i64 + dir.0, key.iy as i64 + dir.1);
    if tx < 0 || ty < 0 || tx >= n || ty >= n {
        return;
    }
    let target = CellKey {
        depth: key.depth,
        ix: tx as u32,
        iy: ty as u32,
    };
    if internal.contains(&target) {
        descend(target, dir, index, internal, out);
        return;
    }
    let mut k = Some(target);
    while let Some(c) = k {
        if let Some(&i) = index.get(&c) {
            out.push(i);
            return;
        }
        k = c.parent();
    }
}

fn descend(
    key: CellKey,
    dir: (i64, i64),
    index: &HashMap<CellKey, usize>,
    internal: &HashSet<CellKey>,
    out: &mut Vec<usize>,
) {
    if let Some(&i) = index.get(&key) {
        out.push(i);
        return;
    }
    if !internal.contains(&key) {
        return;
    }
    for c in key.children() {
        // keep the children on the side facing the originating cell
        let keep = match dir {
            (1, _) => c.ix % 2 == 0,
            (-1, _) => c.ix % 2 == 1,
            (_, 1) => c.iy % 2 == 0,
            _ => c.iy % 2 == 1,
        };
        if keep {
            descend(c, dir, index, internal, out);
        }
    }
}

/// Square root cell containing `r`, anchored at its lower-left corner.
pub fn square_root(r: &Rect) -> Rect {
    let side = (r.x1 - r.x0).max(r.y1 - r.y0).max(f64::MIN_POSITIVE);
    let cx = 0.5 * (r.x0 + r.x1);
    Rect::new(cx - 0.5 * side, r.y0, cx + 0.5 * side, r.y0 + side)
}

struct Classified {
    key: CellKey,
    class: CellClass,
    lo: f64,
    hi: f64,
}

/// Integrates the region's density over the region with certified bounds.
pub fn certified_area<R: Region>(region: &R, root: Rect, opts: &QuadtreeOptions) -> Quadtree {
    let root_area = root.area();
    let mut leaves = Vec::new();
    let mut active = vec![CellKey { depth: 0, ix: 0, iy: 0 }];
    let (mut lower_fin, mut upper_fin) = (0.0f64, 0.0f64);
    let mut refined = 0usize;
    let mut prev_lower = 0.0f64;

    loop {
        let depth = active[0].depth;
        let classified: Vec<Classified> = active
            .par_iter()
            .map(|&key| {
                let rect = cell_rect(&root, key);
                let class = region.classify(&rect);
                let (lo, hi) = match class {
                    CellClass::Inside | CellClass::Boundary => region.density_bounds(&rect),
                    _ => (0.0, 0.0),
                };
                Classified { key, class, lo, hi }
            })
            .collect();

        let cell_area = root_area / (1u64 << (2 * depth as u32)) as f64;
        // inside cells are split only while the integrand varies by more
        // than a quarter of the tolerance density
        let density_tol = 0.25 * opts.tol.absolute(prev_lower) / root_area;
        let (mut pend_lower, mut pend_upper) = (0.0f64, 0.0f64);
        let mut pending = Vec::new();
        for c in &classified {
            match c.class {
                CellClass::Outside | CellClass::Exterior => leaves.push(Leaf {
                    key: c.key,
                    class: c.class,
                }),
                CellClass::Inside if c.hi - c.lo <= density_tol => {
                    lower_fin += c.lo * cell_area;
                    upper_fin += c.hi * cell_area;
                    leaves.push(Leaf {
                        key: c.key,
                        class: c.class,
                    });
                }
                CellClass::Inside => {
                    pend_lower += c.lo * cell_area;
                    pend_upper += c.hi * cell_area;
                    pending.push((c.key, c.class));
                }
                CellClass::Boundary => {
                    pend_upper += c.hi * cell_area;
                    pending.push((c.key, c.class));
                }
            }
        }

        let lower = lower_fin + pend_lower;
        let upper = upper_fin + pend_upper;
        let width = upper - lower;
        let met = width <= opts.tol.absolute(lower);
        let capped = depth >= opts.max_depth || pending.len() * 4 > opts.max_active;
        if met || capped || pending.is_empty() {
            leaves.extend(pending.into_iter().map(|(key, class)| Leaf { key, class }));
            return Quadtree {
                root,
                leaves,
                bounds: AreaBounds {
                    lower,
                    upper,
                    cells_refined: refined,
                    tolerance_met: met || width == 0.0,
                },
            };
        }
        prev_lower = lower;
        refined += pending.len();
        active = pending
            .into_iter()
            .flat_map(|(key, _)| key.children())
            .collect();
    }
}
