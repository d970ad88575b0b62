//! Orthonormal 2-D Haar transform on square power-of-two fields and hard
//! thresholding of the coefficients.
//!
//! Coefficients use the standard dyadic (Mallat) layout: after a full-depth
//! decomposition of a `side × side` field, the single approximation
//! coefficient sits at index 0 (top-left). For the level with block size `s`
//! (`s = side, side/2, …, 2`), the detail bands occupy the top-left `s × s`
//! block minus its top-left `s/2 × s/2` quadrant: horizontal-lowpass/
//! vertical-highpass bottom-left, horizontal-highpass top-right, diagonal
//! bottom-right.

use crate::error::{check_len, LbdError, Result};
use crate::field::Field;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletCoeffs {
    side: usize,
    levels: usize,
    values: Vec<f64>,
}

fn levels_for(side: usize) -> Result<usize> {
    if side < 2 || !side.is_power_of_two() {
        return Err(LbdError::Parameter(format!(
            "Haar transform needs a power-of-two side >= 2, got {side}"
        )));
    }
    Ok(side.trailing_zeros() as usize)
}

impl WaveletCoeffs {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        let levels = levels_for(side)?;
        check_len(side * side, values.len())?;
        Ok(Self {
            side,
            levels,
            values,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn nonzeros(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }
}

/// Full-depth orthonormal Haar analysis `W x`.
pub fn analyze(field: &Field) -> Result<WaveletCoeffs> {
    let side = field.side();
    let levels = levels_for(side)?;
    let mut values = field.values().to_vec();
    forward_in_place(&mut values, side);
    Ok(WaveletCoeffs {
        side,
        levels,
        values,
    })
}

/// Haar synthesis `Wᵀ c`, the exact inverse of [`analyze`].
pub fn synthesize(coeffs: &WaveletCoeffs) -> Field {
    let mut values = coeffs.values.clone();
    inverse_in_place(&mut values, coeffs.side);
    Field::new(coeffs.side, values).expect("coefficient layout matches side")
}

/// In-place analysis on a row-major `side × side` buffer; `side` must be a
/// power of two.
pub(crate) fn forward_in_place(data: &mut [f64], side: usize) {
    transform(data, side, false);
}

pub(crate) fn inverse_in_place(data: &mut [f64], side: usize) {
    transform(data, side, true);
}

fn transform(data: &mut [f64], side: usize, inverse: bool) {
    let mut line = vec![0.0; side];
    let mut out = vec![0.0; side];
    let mut sizes: Vec<usize> =
        std::iter::successors(Some(side), |&s| (s > 2).then_some(s / 2)).collect();
    if inverse {
        sizes.reverse();
    }
    let filter = if inverse { merge } else { split };
    for s in sizes {
        // analysis filters rows first then columns; synthesis undoes in reverse
        for pass in 0..2 {
            let by_rows = (pass == 0) != inverse;
            for j in 0..s {
                for i in 0..s {
                    line[i] = if by_rows { data[j * side + i] } else { data[i * side + j] };
                }
                filter(&line[..s], &mut out[..s]);
                for i in 0..s {
                    if by_rows {
                        data[j * side + i] = out[i];
                    } else {
                        data[i * side + j] = out[i];
                    }
                }
            }
        }
    }
}

fn split(src: &[f64], dst: &mut [f64]) {
    let h = src.len() / 2;
    for i in 0..h {
        let (a, b) = (src[2 * i], src[2 * i + 1]);
        dst[i] = (a + b) * FRAC_1_SQRT_2;
        dst[h + i] = (a - b) * FRAC_1_SQRT_2;
    }
}

fn merge(src: &[f64], dst: &mut [f64]) {
    let h = src.len() / 2;
    for i in 0..h {
        let (s, d) = (src[i], src[h + i]);
        dst[2 * i] = (s + d) * FRAC_1_SQRT_2;
        dst[2 * i + 1] = (s - d) * FRAC_1_SQRT_2;
    }
}

/// `H_K` on a plain slice: keeps the `k` entries of largest magnitude
/// untouched and zeroes the rest. Ties go to the lower index.
pub fn keep_largest(values: &mut [f64], k: usize) {
    if k >= values.len() {
        return;
    }
    if k == 0 {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.select_nth_unstable_by(k - 1, |&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(a.cmp(&b))
    });
    for &i in &order[k..] {
        values[i] = 0.0;
    }
}

/// `H_K` on wavelet coefficients.
pub fn hard_threshold(coeffs: &WaveletCoeffs, k: usize) -> WaveletCoeffs {
    let mut out = coeffs.clone();
    keep_largest(&mut out.values, k);
    out
}
