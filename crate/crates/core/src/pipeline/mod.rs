//! Whole-image protocol: patch sampling on a grid or at FAST keypoints,
//! per-patch description and inversion, and overlap-averaged assembly.

mod fast;
mod image;
mod metrics;

pub use self::fast::{detect_fast, segment_score, FastParams, Keypoint, KeypointSet};
pub use self::image::{GrayImage, Position};
pub use self::metrics::{edge_correlation, laplacian_magnitude, pearson, psnr};

use crate::biht::{reconstruct_binary, BihtConfig};
use crate::error::{LbdError, Result};
use crate::field::Patch;
use crate::primal_dual::{reconstruct_real, PdConfig};
use crate::sensing::{describe, Descriptor, Pattern};
use rayon::prelude::*;

/// Patches at `(i·offset, j·offset)` that fit entirely in the image, in
/// row-major order.
pub fn extract_grid(image: &GrayImage, patch_side: usize, offset: usize) -> Result<Vec<(Position, Patch)>> {
    grid_positions(image.width(), image.height(), patch_side, offset)?
        .into_iter()
        .map(|pos| Ok((pos, image.patch_at(pos, patch_side)?)))
        .collect()
}

pub fn grid_positions(width: usize, height: usize, patch_side: usize, offset: usize) -> Result<Vec<Position>> {
    if offset == 0 || offset > patch_side || patch_side > width.min(height) {
        return Err(LbdError::Parameter(format!(
            "grid needs 1 <= offset ({offset}) <= side ({patch_side}) <= min(width, height) ({})",
            width.min(height)
        )));
    }
    let mut out = Vec::new();
    for y in (0..=height - patch_side).step_by(offset) {
        for x in (0..=width - patch_side).step_by(offset) {
            out.push(Position::new(x, y));
        }
    }
    Ok(out)
}

/// Top-left corner of the patch centered on a keypoint, clamped into the image.
pub fn keypoint_origin(kp: &Keypoint, patch_side: usize, width: usize, height: usize) -> Position {
    let half = patch_side / 2;
    Position::new(
        kp.x.saturating_sub(half).min(width.saturating_sub(patch_side)),
        kp.y.saturating_sub(half).min(height.saturating_sub(patch_side)),
    )
}

/// Per-pixel running sums and coverage counts.
#[derive(Clone, Debug)]
pub struct Accumulator {
    width: usize,
    height: usize,
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl Accumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            sum: vec![0.0; width * height],
            count: vec![0; width * height],
        }
    }

    pub fn add(&mut self, pos: Position, patch: &Patch) -> Result<()> {
        let side = patch.side();
        if pos.x + side > self.width || pos.y + side > self.height {
            return Err(LbdError::Parameter(format!(
                "patch of side {side} at ({}, {}) leaves the {}x{} canvas",
                pos.x, pos.y, self.width, self.height
            )));
        }
        for y in 0..side {
            let row = (pos.y + y) * self.width + pos.x;
            for x in 0..side {
                self.sum[row + x] += patch.get(x, y);
                self.count[row + x] += 1;
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> &[u32] {
        &self.count
    }

    /// Average where covered, black elsewhere.
    pub fn finish(&self) -> GrayImage {
        let values = self
            .sum
            .iter()
            .zip(&self.count)
            .map(|(&s, &c)| if c > 0 { s / f64::from(c) } else { 0.0 })
            .collect();
        GrayImage::new(self.width, self.height, values).expect("canvas size")
    }
}

/// Averages overlapping patches, accumulating in list order.
pub fn assemble(reconstructions: &[(Position, Patch)], width: usize, height: usize) -> Result<GrayImage> {
    let mut acc = Accumulator::new(width, height);
    for (pos, patch) in reconstructions {
        acc.add(*pos, patch)?;
    }
    Ok(acc.finish())
}

#[derive(Clone, Debug, PartialEq)]
pub enum SamplingMode {
    Grid { offset: usize },
    Keypoints(FastParams),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverChoice {
    PrimalDual(PdConfig),
    Biht(BihtConfig),
}

impl SolverChoice {
    /// Whether descriptors fed to this solver should be binarized.
    pub fn wants_binary(&self) -> bool {
        matches!(self, SolverChoice::Biht(_))
    }
}

/// One described patch: where it came from and its descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchRecord {
    pub position: Position,
    pub descriptor: Descriptor,
}

/// Patch origins for a sampling mode.
pub fn sample_positions(image: &GrayImage, patch_side: usize, mode: &SamplingMode) -> Result<Vec<Position>> {
    match mode {
        SamplingMode::Grid { offset } => grid_positions(image.width(), image.height(), patch_side, *offset),
        SamplingMode::Keypoints(params) => {
            if patch_side > image.width().min(image.height()) {
                return Err(LbdError::Parameter(format!(
                    "patch side {patch_side} exceeds the {}x{} image",
                    image.width(),
                    image.height()
                )));
            }
            let params = FastParams {
                patch_side,
                ..*params
            };
            Ok(detect_fast(image, &params)
                .iter()
                .map(|kp| keypoint_origin(kp, patch_side, image.width(), image.height()))
                .collect())
        }
    }
}

pub fn describe_image(
    image: &GrayImage,
    pattern: &Pattern,
    mode: &SamplingMode,
    binary: bool,
) -> Result<Vec<PatchRecord>> {
    let side = pattern.patch_side();
    sample_positions(image, side, mode)?
        .into_iter()
        .map(|position| {
            let patch = image.patch_at(position, side)?;
            Ok(PatchRecord {
                position,
                descriptor: describe(pattern, &patch, binary)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub image: GrayImage,
    /// Number of patches covering each pixel.
    pub coverage: Vec<u32>,
    pub patches: usize,
    /// Mean final consistency ratio, for BIHT runs.
    pub mean_consistency: Option<f64>,
}

/// Runs `f(0..n)` on up to `workers` threads (0 = all cores) and returns the
/// results in index order.
fn run_indexed<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if workers == 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LbdError::Parameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Inverts every record independently and averages them on a
/// `width × height` canvas. The output does not depend on `workers`.
pub fn invert_records(
    records: &[PatchRecord],
    pattern: &Pattern,
    solver: &SolverChoice,
    width: usize,
    height: usize,
    workers: usize,
) -> Result<Reconstruction> {
    let solved = run_indexed(records.len(), workers, |i| {
        let d = &records[i].descriptor;
        match solver {
            SolverChoice::PrimalDual(cfg) => Ok((reconstruct_real(d, pattern, cfg)?, None)),
            SolverChoice::Biht(cfg) => {
                let sol = reconstruct_binary(d, pattern, cfg)?;
                Ok((sol.patch, Some(sol.consistency)))
            }
        }
    })?;

    let mut acc = Accumulator::new(width, height);
    let mut consistency = Vec::new();
    for (record, (patch, c)) in records.iter().zip(&solved) {
        acc.add(record.position, patch)?;
        consistency.extend(c);
    }
    Ok(Reconstruction {
        image: acc.finish(),
        coverage: acc.counts().to_vec(),
        patches: records.len(),
        mean_consistency: (!consistency.is_empty())
            .then(|| consistency.iter().sum::<f64>() / consistency.len() as f64),
    })
}

/// Describes `image` (binary descriptors for BIHT, real ones for the
/// primal-dual solver) and inverts the descriptors back.
pub fn reconstruct_image(
    image: &GrayImage,
    pattern: &Pattern,
    solver: &SolverChoice,
    mode: &SamplingMode,
    workers: usize,
) -> Result<Reconstruction> {
    let records = describe_image(image, pattern, mode, solver.wants_binary())?;
    invert_records(&records, pattern, solver, image.width(), image.height(), workers)
}
