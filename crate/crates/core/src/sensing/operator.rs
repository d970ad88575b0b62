//! The sensing operator `L` and its adjoint, evaluated through summed-area
//! tables instead of a materialized `M × N` matrix.
//!
//! Forward box sums are accumulated in fixed point (40 fractional bits
//! relative to the largest magnitude of the input), so every box lying in a
//! region of equal pixel values yields a bit-identical mean. Constant fields
//! therefore map to exactly zero, and `B(0) = -1` is not perturbed by
//! rounding noise.

use super::pattern::{CellBox, Pattern};
use crate::error::{check_len, LbdError, Result};
use crate::field::Field;

#[derive(Clone, Copy, Debug)]
struct WeightedBox {
    rect: CellBox,
    area: f64,
    weight: f64,
}

impl WeightedBox {
    fn new(rect: CellBox) -> Self {
        let area = rect.area() as f64;
        Self {
            rect,
            area,
            weight: 1.0 / area,
        }
    }
}

/// Rasterized form of a [`Pattern`], ready for repeated forward/adjoint
/// evaluations on `side × side` fields.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    side: usize,
    rows: Vec<(WeightedBox, WeightedBox)>,
}

impl SensingOperator {
    pub fn new(pattern: &Pattern) -> Self {
        let side = pattern.patch_side();
        let support = |c: &super::MeasurementCell| {
            // Pattern::new guarantees non-empty supports.
            WeightedBox::new(c.support(side).expect("validated cell"))
        };
        let rows = pattern
            .pairs()
            .iter()
            .map(|p| (support(&p.pos), support(&p.neg)))
            .collect();
        Self { side, rows }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of measurements `M`.
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.side * self.side
    }

    fn check_side(&self, field: &Field) -> Result<()> {
        if field.side() != self.side {
            return Err(LbdError::Shape {
                expected: self.side,
                found: field.side(),
            });
        }
        Ok(())
    }

    /// `L x`: each entry is the box mean over the positive cell minus the box
    /// mean over the negative cell.
    pub fn forward(&self, field: &Field) -> Result<Vec<f64>> {
        self.check_side(field)?;
        let mut out = vec![0.0; self.rows.len()];
        self.forward_into(field.values(), &mut out);
        Ok(out)
    }

    pub(crate) fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let Some(table) = SummedArea::new(x, self.side) else {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        };
        for ((pos, neg), o) in self.rows.iter().zip(out.iter_mut()) {
            let mean_pos = table.sum(&pos.rect) as f64 / pos.area;
            let mean_neg = table.sum(&neg.rect) as f64 / neg.area;
            *o = (mean_pos - mean_neg) * table.unit;
        }
    }

    /// `Lᵀ c = Σ c_i L_i`. Each weighted box is scattered as four corner
    /// increments into a difference grid that a 2-D prefix sum integrates.
    pub fn adjoint(&self, coeffs: &[f64]) -> Result<Field> {
        check_len(self.rows.len(), coeffs.len())?;
        let mut out = vec![0.0; self.cols()];
        self.adjoint_into(coeffs, &mut out);
        Field::new(self.side, out)
    }

    pub(crate) fn adjoint_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let stride = self.side + 1;
        let mut diff = vec![0.0; stride * stride];
        let mut scatter = |b: &WeightedBox, c: f64| {
            let w = c * b.weight;
            let r = &b.rect;
            diff[r.y0 * stride + r.x0] += w;
            diff[r.y0 * stride + r.x1 + 1] -= w;
            diff[(r.y1 + 1) * stride + r.x0] -= w;
            diff[(r.y1 + 1) * stride + r.x1 + 1] += w;
        };
        for ((pos, neg), &c) in self.rows.iter().zip(coeffs) {
            if c != 0.0 {
                scatter(pos, c);
                scatter(neg, -c);
            }
        }
        for y in 0..self.side {
            let mut run = 0.0;
            for x in 0..self.side {
                run += diff[y * stride + x];
                let above = if y > 0 { out[(y - 1) * self.side + x] } else { 0.0 };
                // column accumulation of the row-wise running sums
                out[y * self.side + x] = above + run;
            }
        }
    }

    /// Dense image of row `L_i`.
    pub fn row(&self, i: usize) -> Field {
        let (pos, neg) = &self.rows[i];
        Field::from_fn(self.side, |x, y| {
            let mut v = 0.0;
            if pos.rect.contains(x, y) {
                v += pos.weight;
            }
            if neg.rect.contains(x, y) {
                v -= neg.weight;
            }
            v
        })
    }

    /// `max_i ‖L_i‖∞`.
    pub fn max_row_amplitude(&self) -> f64 {
        (0..self.rows.len())
            .map(|i| self.row(i).values().iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

const FIXED_POINT_BITS: i32 = 40;

/// Zero-padded fixed-point summed-area table: `table[(y+1)*(side+1) + (x+1)]`
/// holds the sum of all quantized pixels `(i, j)` with `i <= x`, `j <= y`.
/// Pixel `v` is stored as `round(v / unit)`.
struct SummedArea {
    stride: usize,
    unit: f64,
    table: Vec<i64>,
}

impl SummedArea {
    /// `None` for an all-zero field.
    fn new(x: &[f64], side: usize) -> Option<Self> {
        let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amax == 0.0 {
            return None;
        }
        // |quantized| <= 2^40, so a full table stays far below i64::MAX
        let exponent = FIXED_POINT_BITS - amax.log2().ceil() as i32;
        let scale = 2f64.powi(exponent);
        let stride = side + 1;
        let mut table = vec![0i64; stride * stride];
        for y in 0..side {
            let mut row = 0i64;
            for xi in 0..side {
                row += (x[y * side + xi] * scale).round() as i64;
                table[(y + 1) * stride + xi + 1] = table[y * stride + xi + 1] + row;
            }
        }
        Some(Self {
            stride,
            unit: 1.0 / scale,
            table,
        })
    }

    #[inline]
    fn sum(&self, r: &CellBox) -> i64 {
        let s = self.stride;
        self.table[(r.y1 + 1) * s + r.x1 + 1] - self.table[r.y0 * s + r.x1 + 1]
            - self.table[(r.y1 + 1) * s + r.x0]
            + self.table[r.y0 * s + r.x0]
    }
}
