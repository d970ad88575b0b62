//! Measurement patterns: the pairs of averaging cells that define the rows of
//! the sensing operator.
//!
//! Coordinates are continuous patch coordinates in which pixel `(i, j)` has
//! its center at `(i, j)`. A cell covers the pixel columns
//! `round(x - r) ..= round(x + r)` and rows `round(y - r) ..= round(y + r)`,
//! clipped to the patch, and carries a uniform weight of `1 / area` so that
//! each cell has unit l1 mass.

use crate::error::{LbdError, Result};
use fnv::FnvHasher;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::hash::Hasher;

/// Number of retinal sampling points of the FREAK layout.
pub const FREAK_POINTS: usize = 43;
/// Relative ring radii of the retinal layout, as a fraction of half the patch side.
pub const FREAK_RING_RADII: [f64; 6] = [0.12, 0.2, 0.3, 0.42, 0.58, 0.78];
const FREAK_RING_SIZE: usize = 7;
const FREAK_CELL_SCALE: f64 = 0.4;

/// Number of distinct unordered point pairs of the retinal layout.
pub const FREAK_ALL_PAIRS: usize = FREAK_POINTS * (FREAK_POINTS - 1) / 2;

/// A square box average centered at `(x, y)` with half-width `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCell {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Inclusive pixel rectangle of a cell after clipping to the patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CellBox {
    pub fn area(&self) -> usize {
        (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }
}

impl MeasurementCell {
    pub fn new(x: f64, y: f64, r: f64) -> Self {
        Self { x, y, r }
    }

    /// Clipped support on a `side × side` patch, or `None` if the clipped
    /// support is empty.
    pub fn support(&self, side: usize) -> Option<CellBox> {
        let (x0, x1) = clip_interval(self.x - self.r, self.x + self.r, side)?;
        let (y0, y1) = clip_interval(self.y - self.r, self.y + self.r, side)?;
        Some(CellBox { x0, y0, x1, y1 })
    }
}

fn clip_interval(lo: f64, hi: f64, side: usize) -> Option<(usize, usize)> {
    let lo = lo.round().max(0.0);
    let hi = hi.round().min(side as f64 - 1.0);
    if !(lo <= hi) {
        return None;
    }
    Some((lo as usize, hi as usize))
}

/// One row of the sensing operator: mean over `pos` minus mean over `neg`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPair {
    pub pos: MeasurementCell,
    pub neg: MeasurementCell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    Brief,
    Freak,
    RaFreak,
    ExFreak,
    Custom,
}

impl PatternKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PatternKind::Brief => "brief",
            PatternKind::Freak => "freak",
            PatternKind::RaFreak => "ra-freak",
            PatternKind::ExFreak => "ex-freak",
            PatternKind::Custom => "custom",
        }
    }
}

/// Which pair selection to apply on top of the retinal layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreakVariant {
    /// Deterministic coarse-to-fine selection.
    Freak,
    /// `m` distinct pairs drawn uniformly at random.
    RaFreak,
    /// Every pair of the layout.
    ExFreak,
}

/// The ordered list of measurement pairs defining a sensing operator on
/// `patch_side × patch_side` patches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    kind: PatternKind,
    patch_side: usize,
    seed: u64,
    pairs: Vec<MeasurementPair>,
}

impl Pattern {
    /// Builds a pattern from explicit pairs, validating every cell.
    pub fn new(
        kind: PatternKind,
        patch_side: usize,
        seed: u64,
        pairs: Vec<MeasurementPair>,
    ) -> Result<Self> {
        if patch_side == 0 {
            return Err(LbdError::Parameter("patch side must be positive".into()));
        }
        if pairs.is_empty() {
            return Err(LbdError::Parameter("a pattern needs at least one pair".into()));
        }
        for (i, pair) in pairs.iter().enumerate() {
            for cell in [&pair.pos, &pair.neg] {
                if !(cell.x.is_finite() && cell.y.is_finite() && cell.r.is_finite()) || cell.r < 0.0
                {
                    return Err(LbdError::Parameter(format!("pair {i}: invalid cell {cell:?}")));
                }
                if cell.support(patch_side).is_none() {
                    return Err(LbdError::Parameter(format!(
                        "pair {i}: cell {cell:?} does not intersect the patch"
                    )));
                }
            }
            if pair.pos == pair.neg {
                return Err(LbdError::Parameter(format!("pair {i}: identical cells")));
            }
        }
        Ok(Self {
            kind,
            patch_side,
            seed,
            pairs,
        })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    /// Number of pixels `N` of a patch.
    pub fn patch_len(&self) -> usize {
        self.patch_side * self.patch_side
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pairs(&self) -> &[MeasurementPair] {
        &self.pairs
    }

    /// Number of measurements `M`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Canonical JSON form: compact, keys in fixed order, floats with six
    /// decimals. This is both the on-disk format and the hashed content.
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::with_capacity(64 + self.pairs.len() * 110);
        write!(
            out,
            "{{\"kind\":\"{}\",\"patch_side\":{},\"seed\":{},\"pairs\":[",
            self.kind.as_str(),
            self.patch_side,
            self.seed
        )
        .unwrap();
        for (i, pair) in self.pairs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"pos\":");
            write_cell(&mut out, &pair.pos);
            out.push_str(",\"neg\":");
            write_cell(&mut out, &pair.neg);
            out.push('}');
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Pattern = serde_json::from_str(text)?;
        Pattern::new(raw.kind, raw.patch_side, raw.seed, raw.pairs)
    }

    /// 64-bit FNV-1a hash of the canonical JSON.
    pub fn id(&self) -> u64 {
        let mut hasher = FnvHasher::default();
        hasher.write(self.to_canonical_json().as_bytes());
        hasher.finish()
    }
}

fn write_cell(out: &mut String, cell: &MeasurementCell) {
    // + 0.0 turns -0.0 into 0.0 so the printed form is unique
    write!(
        out,
        "{{\"x\":{:.6},\"y\":{:.6},\"r\":{:.6}}}",
        cell.x + 0.0,
        cell.y + 0.0,
        cell.r + 0.0
    )
    .unwrap();
}

/// Rounds to the six-decimal grid of the canonical JSON, so that a pattern
/// read back from disk is bit-identical to the one that was written.
fn quantize(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// BRIEF: `m` pairs of 3×3 box cells with centers uniform over the patch
/// interior (one pixel margin so the support never overhangs the border).
pub fn build_brief(patch_side: usize, m: usize, seed: u64) -> Result<Pattern> {
    if patch_side < 4 {
        return Err(LbdError::Parameter(format!(
            "BRIEF needs a patch side of at least 4, got {patch_side}"
        )));
    }
    if m == 0 {
        return Err(LbdError::Parameter("m must be at least 1".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let hi = patch_side - 2;
    let cell = |rng: &mut SplitMix64| {
        let x = rng.random_range(1..=hi) as f64;
        let y = rng.random_range(1..=hi) as f64;
        MeasurementCell::new(x, y, 1.0)
    };
    let mut pairs = Vec::with_capacity(m);
    while pairs.len() < m {
        let pos = cell(&mut rng);
        let neg = cell(&mut rng);
        if pos != neg {
            pairs.push(MeasurementPair { pos, neg });
        }
    }
    Pattern::new(PatternKind::Brief, patch_side, seed, pairs)
}

/// The 43 retinal sampling points: the center followed by six rings of seven
/// points, odd rings rotated by half a step. Cell size grows with the ring.
pub fn retinal_points(patch_side: usize) -> Vec<MeasurementCell> {
    let c = (patch_side as f64 - 1.0) / 2.0;
    let half = patch_side as f64 / 2.0;
    let mut points = Vec::with_capacity(FREAK_POINTS);
    points.push(MeasurementCell::new(quantize(c), quantize(c), 1.0));
    for (k, frac) in FREAK_RING_RADII.iter().enumerate() {
        let ring = k + 1;
        let radius = half * frac;
        let cell_r = (FREAK_CELL_SCALE * radius).round().max(1.0);
        let phase = (ring % 2) as f64 * PI / FREAK_RING_SIZE as f64;
        for j in 0..FREAK_RING_SIZE {
            let a = 2.0 * PI * j as f64 / FREAK_RING_SIZE as f64 + phase;
            points.push(MeasurementCell::new(
                quantize(c + radius * a.cos()),
                quantize(c + radius * a.sin()),
                cell_r,
            ));
        }
    }
    points
}

/// All unordered point pairs `(i, j)`, `i < j`, in lexicographic order.
fn canonical_pairs(points: &[MeasurementCell]) -> Vec<MeasurementPair> {
    let mut pairs = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pairs.push(MeasurementPair {
                pos: points[i],
                neg: points[j],
            });
        }
    }
    pairs
}

fn center_distance(pair: &MeasurementPair) -> f64 {
    (pair.pos.x - pair.neg.x).hypot(pair.pos.y - pair.neg.y)
}

/// Coarse-to-fine selection: with the pairs sorted by decreasing center
/// distance, take every `ceil(total / m)`-th one, then top up with the
/// shortest (finest, central) pairs not yet taken.
fn select_coarse_to_fine(all: &[MeasurementPair], m: usize) -> Vec<MeasurementPair> {
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| center_distance(&all[b]).total_cmp(&center_distance(&all[a])));
    let step = all.len().div_ceil(m);
    let mut taken = vec![false; all.len()];
    let mut selected = Vec::with_capacity(m);
    for &idx in order.iter().step_by(step).take(m) {
        taken[idx] = true;
        selected.push(all[idx]);
    }
    for &idx in order.iter().rev() {
        if selected.len() == m {
            break;
        }
        if !taken[idx] {
            taken[idx] = true;
            selected.push(all[idx]);
        }
    }
    selected
}

/// FREAK-family pattern on the retinal layout. `m` is ignored for
/// [`FreakVariant::ExFreak`], which always yields every pair.
pub fn build_freak(patch_side: usize, m: usize, variant: FreakVariant, seed: u64) -> Result<Pattern> {
    if patch_side < 8 {
        return Err(LbdError::Parameter(format!(
            "FREAK needs a patch side of at least 8, got {patch_side}"
        )));
    }
    let all = canonical_pairs(&retinal_points(patch_side));
    if variant != FreakVariant::ExFreak && (m == 0 || m > all.len()) {
        return Err(LbdError::Parameter(format!(
            "m must be in 1..={}, got {m}",
            all.len()
        )));
    }
    let (kind, pairs) = match variant {
        FreakVariant::ExFreak => (PatternKind::ExFreak, all),
        FreakVariant::Freak => (PatternKind::Freak, select_coarse_to_fine(&all, m)),
        FreakVariant::RaFreak => {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let picks = index::sample(&mut rng, all.len(), m);
            (PatternKind::RaFreak, picks.iter().map(|i| all[i]).collect())
        }
    };
    Pattern::new(kind, patch_side, seed, pairs)
}
