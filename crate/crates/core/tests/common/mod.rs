//! Oracles and fixtures shared by the integration suites. Everything here is
//! written against the public data types only (cells, fields, images) and
//! deliberately avoids the crate's own operator code paths.

#![allow(dead_code)]

use lbd_core::field::{Field, Patch};
use lbd_core::pipeline::GrayImage;
use lbd_core::sensing::{MeasurementCell, Pattern};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut SplitMix64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Pixel membership of a cell, straight from the cell definition: columns
/// `round(x - r) ..= round(x + r)` and rows likewise, clipped to the patch.
pub fn cell_weights(cell: &MeasurementCell, side: usize) -> Vec<f64> {
    let inside = |p: usize, c: f64| {
        let lo = (c - cell.r).round();
        let hi = (c + cell.r).round();
        (lo..=hi).contains(&(p as f64))
    };
    let mut w = vec![0.0; side * side];
    let mut area = 0usize;
    for y in 0..side {
        for x in 0..side {
            if inside(x, cell.x) && inside(y, cell.y) {
                w[y * side + x] = 1.0;
                area += 1;
            }
        }
    }
    assert!(area > 0, "empty cell {cell:?}");
    w.iter_mut().for_each(|v| *v /= area as f64);
    w
}

/// Row-major dense `M × N` sensing matrix.
pub fn dense_matrix(pattern: &Pattern) -> Vec<Vec<f64>> {
    let side = pattern.patch_side();
    pattern
        .pairs()
        .iter()
        .map(|p| {
            let a = cell_weights(&p.pos, side);
            let b = cell_weights(&p.neg, side);
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        })
        .collect()
}

/// Direct per-pixel summation of every cell mean, no summed-area tables.
pub fn direct_forward(pattern: &Pattern, x: &[f64]) -> Vec<f64> {
    let side = pattern.patch_side();
    let mean = |cell: &MeasurementCell| {
        let (mut s, mut n) = (0.0, 0usize);
        for py in 0..side {
            for px in 0..side {
                let inx = ((cell.x - cell.r).round()..=(cell.x + cell.r).round()).contains(&(px as f64));
                let iny = ((cell.y - cell.r).round()..=(cell.y + cell.r).round()).contains(&(py as f64));
                if inx && iny {
                    s += x[py * side + px];
                    n += 1;
                }
            }
        }
        s / n as f64
    };
    pattern.pairs().iter().map(|p| mean(&p.pos) - mean(&p.neg)).collect()
}

pub fn signs(v: &[f64]) -> Vec<i8> {
    v.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect()
}

/// Step edge through the patch center. `angle_deg` is the direction of the
/// edge line measured from the x axis (y pointing down); pixels on the
/// positive side of the normal get `hi`.
pub fn edge_patch(side: usize, angle_deg: f64, lo: f64, hi: f64) -> Patch {
    let c = (side as f64 - 1.0) / 2.0;
    let a = angle_deg.to_radians();
    let (nx, ny) = (-a.sin(), a.cos());
    let f = Field::from_fn(side, |x, y| {
        if (x as f64 - c) * nx + (y as f64 - c) * ny > 1e-9 {
            hi
        } else {
            lo
        }
    });
    Patch::try_from(f).unwrap()
}

/// Dominant edge-line direction in degrees `[0, 180)`, from the structure
/// tensor of central-difference gradients over the patch interior.
pub fn edge_orientation(f: &Field) -> f64 {
    let s = f.side();
    let (mut jxx, mut jxy, mut jyy) = (0.0, 0.0, 0.0);
    for y in 1..s - 1 {
        for x in 1..s - 1 {
            let gx = 0.5 * (f.get(x + 1, y) - f.get(x - 1, y));
            let gy = 0.5 * (f.get(x, y + 1) - f.get(x, y - 1));
            jxx += gx * gx;
            jxy += gx * gy;
            jyy += gy * gy;
        }
    }
    let gradient = 0.5 * (2.0 * jxy).atan2(jxx - jyy);
    (gradient.to_degrees() + 90.0).rem_euclid(180.0)
}

/// Unsigned difference of two line orientations, in `[0, 90]`.
pub fn angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Smooth random "natural" patch: a few random blobs and ramps.
pub fn natural_patch(rng: &mut SplitMix64, side: usize) -> Patch {
    let mut v = vec![0.0; side * side];
    let blobs: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.0..side as f64),
                rng.random_range(0.0..side as f64),
                rng.random_range(2.0..side as f64 / 2.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let (gx, gy) = (rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02));
    for y in 0..side {
        for x in 0..side {
            let mut s = 0.5 + gx * (x as f64 - side as f64 / 2.0) + gy * (y as f64 - side as f64 / 2.0);
            for &(cx, cy, r, a) in &blobs {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                s += 0.4 * a * (-d2 / (2.0 * r * r)).exp();
            }
            v[y * side + x] = s;
        }
    }
    Patch::clamped(Field::new(side, v).unwrap())
}

/// 64×64 test scene: a bright disc and a dark rectangle on mid-gray.
pub fn two_shapes(size: usize) -> GrayImage {
    let s = size as f64;
    GrayImage::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        if (fx - 0.32 * s).powi(2) + (fy - 0.35 * s).powi(2) < (0.18 * s).powi(2) {
            0.9
        } else if (0.5 * s..0.85 * s).contains(&fx) && (0.55 * s..0.8 * s).contains(&fy) {
            0.1
        } else {
            0.5
        }
    })
}

/// Minimizes `h` over the grid `lo, lo + 1e-5, …, hi`.
pub fn grid_argmin(lo: f64, hi: f64, h: impl Fn(f64) -> f64) -> f64 {
    const STEP: f64 = 1e-5;
    let n = ((hi - lo) / STEP).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let u = lo + i as f64 * STEP;
        let v = h(u);
        if v < best.0 {
            best = (v, u);
        }
    }
    best.1
}
