//! Diagnostic quality measures for whole-image reconstructions.

use super::image::GrayImage;
use crate::error::{LbdError, Result};

fn same_size(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(LbdError::Parameter(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// `10 log10(1 / MSE)` over the pixels where `mask` is set (all pixels when
/// `mask` is `None`). Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &GrayImage, b: &GrayImage, mask: Option<&[bool]>) -> Result<f64> {
    same_size(a, b)?;
    let (mut sum, mut count) = (0.0, 0usize);
    for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        if mask.is_none_or(|m| m[i]) {
            sum += (x - y) * (x - y);
            count += 1;
        }
    }
    if count == 0 {
        return Err(LbdError::Parameter("PSNR mask selects no pixel".into()));
    }
    let mse = sum / count as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    })
}

/// `|Δ u|` with the 4-neighbor Laplacian; border pixels are 0.
pub fn laplacian_magnitude(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let mut out = vec![0.0; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let lap = img.get(x - 1, y) + img.get(x + 1, y) + img.get(x, y - 1) + img.get(x, y + 1)
                - 4.0 * img.get(x, y);
            out[y * w + x] = lap.abs();
        }
    }
    out
}

/// Pearson correlation. Degenerate (zero-variance) inputs give 1 when the
/// two sequences are identical and 0 otherwise.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    sab / (saa * sbb).sqrt()
}

/// Correlation between the Laplacian-magnitude maps of two images.
pub fn edge_correlation(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_size(a, b)?;
    Ok(pearson(&laplacian_magnitude(a), &laplacian_magnitude(b)))
}
