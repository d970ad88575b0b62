//! FAST segment-test corner detection with 3×3 non-maximum suppression.

use super::image::GrayImage;

/// Bresenham circle of radius 3, clockwise from the top.
const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastParams {
    /// Intensity difference on the `[0, 1]` scale.
    pub threshold: f64,
    /// Minimum length of the contiguous arc.
    pub arc: usize,
    pub nonmax_suppression: bool,
    /// Keypoints closer than `patch_side / 2` to the border are dropped.
    pub patch_side: usize,
}

impl Default for FastParams {
    fn default() -> Self {
        Self {
            threshold: 0.08,
            arc: 9,
            nonmax_suppression: true,
            patch_side: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Keypoint {
    pub x: usize,
    pub y: usize,
}

/// Keypoints in row-major order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeypointSet(pub Vec<Keypoint>);

impl KeypointSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Keypoint> {
        self.0.iter()
    }
}

/// Largest `t` for which some run of `arc` consecutive circle pixels is
/// entirely brighter than `center + t`, or entirely darker than `center - t`.
/// A pixel is a corner at threshold `t` iff its score exceeds `t`.
pub fn segment_score(image: &GrayImage, x: usize, y: usize, arc: usize) -> f64 {
    let c = image.get(x, y);
    let ring: Vec<f64> = CIRCLE
        .iter()
        .map(|&(dx, dy)| image.get((x as isize + dx) as usize, (y as isize + dy) as usize) - c)
        .collect();
    let mut best = f64::NEG_INFINITY;
    for start in 0..ring.len() {
        let (mut brighter, mut darker) = (f64::INFINITY, f64::INFINITY);
        for k in 0..arc {
            let d = ring[(start + k) % ring.len()];
            brighter = brighter.min(d);
            darker = darker.min(-d);
        }
        best = best.max(brighter).max(darker);
    }
    best
}

pub fn detect_fast(image: &GrayImage, params: &FastParams) -> KeypointSet {
    let (w, h) = (image.width(), image.height());
    let arc = params.arc.clamp(1, CIRCLE.len());
    if w < 7 || h < 7 {
        return KeypointSet::default();
    }
    let mut scores = vec![f64::NEG_INFINITY; w * h];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = segment_score(image, x, y, arc);
            if s > params.threshold {
                scores[y * w + x] = s;
            }
        }
    }

    let half = params.patch_side / 2;
    let mut keypoints = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = scores[y * w + x];
            if s == f64::NEG_INFINITY {
                continue;
            }
            if params.nonmax_suppression && !is_local_max(&scores, w, x, y) {
                continue;
            }
            if x < half || y < half || x + half > w || y + half > h {
                continue;
            }
            keypoints.push(Keypoint { x, y });
        }
    }
    KeypointSet(keypoints)
}

/// Strictly greater than every later neighbor (raster order) and at least
/// as large as every earlier one, so plateaus keep their first pixel.
fn is_local_max(scores: &[f64], w: usize, x: usize, y: usize) -> bool {
    let s = scores[y * w + x];
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let n = scores[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let earlier = dy < 0 || (dy == 0 && dx < 0);
            if n > s || (earlier && n == s) {
                return false;
            }
        }
    }
    true
}
