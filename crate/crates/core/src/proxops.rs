//! Proximal maps of the conjugated data and sparsity terms, and the
//! projections that enforce the validity domain `S = S1 ∩ S2`.
//!
//! `S1` is the pixel box `[0, h_pix]^N` and `S2` the hyperplane of fields whose
//! mean equals `target_mean`. The projection onto `S` is approximated by the
//! composition "shift to the target mean, then clip to the box", which can
//! leave the mean slightly off target when clipping is active.

use crate::error::{check_len, LbdError, Result};
use crate::field::{Field, H_PIX};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityDomain {
    pub h_pix: f64,
    pub target_mean: f64,
}

impl Default for ValidityDomain {
    fn default() -> Self {
        Self {
            h_pix: H_PIX,
            target_mean: 0.5,
        }
    }
}

impl ValidityDomain {
    pub fn new(h_pix: f64, target_mean: f64) -> Result<Self> {
        if !(0.0 < target_mean && target_mean < h_pix) {
            return Err(LbdError::Parameter(format!(
                "target mean {target_mean} must lie strictly inside (0, {h_pix})"
            )));
        }
        Ok(Self { h_pix, target_mean })
    }

    /// Applies [`project_validity`] in place.
    pub fn project(&self, x: &mut [f64]) {
        project_mean_in_place(x, self.target_mean);
        project_box_in_place(x, self.h_pix);
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        (mean - self.target_mean).abs() <= tol
            && x.iter().all(|&v| (-tol..=self.h_pix + tol).contains(&v))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `prox_{σF1*}` with `F1 = λ‖· − p̄‖₁`:
/// `sign(r_i − σp̄_i) · min(λ, |r_i − σp̄_i|)`.
pub fn prox_f1_star(r: &[f64], sigma: f64, lambda: f64, pbar: &[f64]) -> Result<Vec<f64>> {
    check_len(r.len(), pbar.len())?;
    if !(sigma > 0.0 && lambda > 0.0) {
        return Err(LbdError::Parameter(format!(
            "sigma and lambda must be positive (sigma={sigma}, lambda={lambda})"
        )));
    }
    let mut out = r.to_vec();
    prox_f1_star_in_place(&mut out, sigma, lambda, pbar);
    Ok(out)
}

pub(crate) fn prox_f1_star_in_place(r: &mut [f64], sigma: f64, lambda: f64, pbar: &[f64]) {
    for (ri, &p) in r.iter_mut().zip(pbar) {
        let t = *ri - sigma * p;
        *ri = sign(t) * lambda.min(t.abs());
    }
}

/// `prox_{σF2*}` with `F2 = ‖·‖₁`: clipping to the unit ∞-ball, whatever σ.
pub fn prox_f2_star(s: &[f64]) -> Vec<f64> {
    let mut out = s.to_vec();
    prox_f2_star_in_place(&mut out);
    out
}

pub(crate) fn prox_f2_star_in_place(s: &mut [f64]) {
    for v in s {
        *v = sign(*v) * 1f64.min(v.abs());
    }
}

pub fn project_box(x: &[f64], h_pix: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    project_box_in_place(&mut out, h_pix);
    out
}

fn project_box_in_place(x: &mut [f64], h_pix: f64) {
    for v in x {
        *v = v.clamp(0.0, h_pix);
    }
}

/// Orthogonal projection onto `{y : mean(y) = target_mean}`: a constant shift.
pub fn project_mean(x: &[f64], target_mean: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    project_mean_in_place(&mut out, target_mean);
    out
}

fn project_mean_in_place(x: &mut [f64], target_mean: f64) {
    if x.is_empty() {
        return;
    }
    let shift = target_mean - x.iter().sum::<f64>() / x.len() as f64;
    for v in x {
        *v += shift;
    }
}

/// `proj_S1 ∘ proj_S2`.
pub fn project_validity(x: &[f64], domain: &ValidityDomain) -> Vec<f64> {
    let mut out = x.to_vec();
    domain.project(&mut out);
    out
}

/// `prox_G` of the product-space indicator: both blocks become
/// `proj_S((y + z) / 2)`.
pub fn prox_g(y: &Field, z: &Field, domain: &ValidityDomain) -> Result<(Field, Field)> {
    check_len(y.len(), z.len())?;
    let avg: Vec<f64> = y
        .values()
        .iter()
        .zip(z.values())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let w = Field::new(y.side(), project_validity(&avg, domain))?;
    Ok((w.clone(), w))
}
