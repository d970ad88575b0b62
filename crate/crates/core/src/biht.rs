//! Binary iterative hard thresholding for 1-bit descriptors.
//!
//! Each iteration back-projects the sign errors `p̄ − B(Lx)` with step
//! `τ/2`, `τ = 1/M`, keeps the `K` largest Haar coefficients of the result
//! and projects the synthesized field onto the validity domain.

use crate::error::{LbdError, Result};
use crate::field::{Field, Patch};
use crate::proxops::ValidityDomain;
use crate::sensing::{binarize, Descriptor, Pattern, Payload, SensingOperator};
use crate::wavelet;

/// Number of wavelet coefficients kept by the hard threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sparsity {
    /// `round(fraction · N)`.
    Fraction(f64),
    Count(usize),
}

impl Sparsity {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match *self {
            Sparsity::Fraction(f) => {
                if !(0.0..=1.0).contains(&f) {
                    return Err(LbdError::Parameter(format!("sparsity fraction {f} outside [0, 1]")));
                }
                (f * n as f64).round() as usize
            }
            Sparsity::Count(k) => k,
        };
        if k == 0 || k > n {
            return Err(LbdError::Parameter(format!("sparsity K={k} must lie in 1..={n}")));
        }
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BihtConfig {
    pub sparsity: Sparsity,
    pub iterations: usize,
    pub domain: ValidityDomain,
}

impl Default for BihtConfig {
    fn default() -> Self {
        Self {
            sparsity: Sparsity::Fraction(0.4),
            iterations: 200,
            domain: ValidityDomain::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BihtSolution {
    pub patch: Patch,
    /// `1 − J/M` at the returned iterate.
    pub consistency: f64,
    /// `1 − J/M` at the zero initialization.
    pub initial_consistency: f64,
    /// `J` before each iteration, then at the returned iterate.
    pub trace: Vec<usize>,
}

fn binary_payload<'a>(descriptor: &'a Descriptor, pattern: &Pattern) -> Result<&'a [i8]> {
    descriptor.check_pattern(pattern)?;
    match descriptor.payload() {
        Payload::Binary(v) => Ok(v),
        Payload::Real(_) => Err(LbdError::PayloadType(
            "BIHT expects a binary descriptor; use the primal-dual solver for real ones".into(),
        )),
    }
}

fn mismatches(lx: &[f64], pbar: &[i8]) -> usize {
    binarize(lx).iter().zip(pbar).filter(|(a, b)| a != b).count()
}

/// `J(x) = ‖[p̄ ⊙ B(Lx)]₋‖₁`, the number of sign-inconsistent measurements.
pub fn data_fidelity(x: &Field, descriptor: &Descriptor, pattern: &Pattern) -> Result<usize> {
    let pbar = binary_payload(descriptor, pattern)?;
    Ok(mismatches(&pattern.forward(x)?, pbar))
}

/// `x + (τ/2) Lᵀ(p̄ − B(Lx))`.
pub fn subgradient_step(x: &Field, descriptor: &Descriptor, pattern: &Pattern, tau: f64) -> Result<Field> {
    let pbar = binary_payload(descriptor, pattern)?;
    if !(tau > 0.0) {
        return Err(LbdError::Parameter(format!("step must be positive, got {tau}")));
    }
    let op = pattern.operator();
    let err = sign_error(&op.forward(x)?, pbar);
    let back = op.adjoint(&err)?;
    let values = x
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| a + 0.5 * tau * b)
        .collect();
    Field::new(x.side(), values)
}

fn sign_error(lx: &[f64], pbar: &[i8]) -> Vec<f64> {
    binarize(lx)
        .iter()
        .zip(pbar)
        .map(|(&b, &p)| f64::from(p - b))
        .collect()
}

/// Stepwise BIHT, for callers that inspect intermediate iterates.
pub struct Biht<'a> {
    op: SensingOperator,
    pbar: &'a [i8],
    k: usize,
    tau: f64,
    domain: ValidityDomain,
    x: Field,
    coeffs: Vec<f64>,
    lx: Vec<f64>,
    back: Vec<f64>,
}

impl<'a> Biht<'a> {
    pub fn new(descriptor: &'a Descriptor, pattern: &Pattern, config: &BihtConfig) -> Result<Self> {
        let pbar = binary_payload(descriptor, pattern)?;
        let n = pattern.patch_len();
        let k = config.sparsity.resolve(n)?;
        Ok(Self {
            op: pattern.operator(),
            pbar,
            k,
            tau: 1.0 / pattern.len() as f64,
            domain: config.domain,
            x: Field::zeros(pattern.patch_side()),
            coeffs: vec![0.0; n],
            lx: vec![0.0; pattern.len()],
            back: vec![0.0; n],
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn x(&self) -> &Field {
        &self.x
    }

    /// Thresholded wavelet coefficients of the last iteration, before synthesis.
    pub fn sparse_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `J` at the current iterate.
    pub fn inconsistency(&mut self) -> usize {
        self.op.forward_into(self.x.values(), &mut self.lx);
        mismatches(&self.lx, self.pbar)
    }

    /// One iteration; returns `J` of the iterate it started from.
    pub fn step(&mut self) -> usize {
        self.op.forward_into(self.x.values(), &mut self.lx);
        let err = sign_error(&self.lx, self.pbar);
        let j = err.iter().filter(|&&e| e != 0.0).count();
        self.op.adjoint_into(&err, &mut self.back);

        let side = self.op.side();
        for ((c, x), b) in self.coeffs.iter_mut().zip(self.x.values()).zip(&self.back) {
            *c = x + 0.5 * self.tau * b;
        }
        wavelet::forward_in_place(&mut self.coeffs, side);
        wavelet::keep_largest(&mut self.coeffs, self.k);

        let xs = self.x.values_mut();
        xs.copy_from_slice(&self.coeffs);
        wavelet::inverse_in_place(xs, side);
        self.domain.project(xs);
        j
    }
}

/// Runs BIHT from `x = 0` for `config.iterations` iterations.
pub fn reconstruct_binary(descriptor: &Descriptor, pattern: &Pattern, config: &BihtConfig) -> Result<BihtSolution> {
    let mut solver = Biht::new(descriptor, pattern, config)?;
    let m = pattern.len() as f64;
    let mut trace = Vec::with_capacity(config.iterations + 1);
    for _ in 0..config.iterations {
        trace.push(solver.step());
    }
    let last = solver.inconsistency();
    trace.push(last);
    Ok(BihtSolution {
        patch: Patch::clamped(solver.x.clone()),
        consistency: 1.0 - last as f64 / m,
        initial_consistency: 1.0 - trace[0] as f64 / m,
        trace,
    })
}
