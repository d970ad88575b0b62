//! Descriptor patterns, the linear sensing operator and binarization.

mod operator;
mod pattern;

pub use operator::SensingOperator;
pub use pattern::{
    build_brief, build_freak, retinal_points, CellBox, FreakVariant, MeasurementCell,
    MeasurementPair, Pattern, PatternKind, FREAK_ALL_PAIRS, FREAK_POINTS, FREAK_RING_RADII,
};

use crate::error::{check_len, LbdError, Result};
use crate::field::{Field, Patch};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Multiplier applied to the power-method estimate so that the returned value
/// upper-bounds `‖L‖`.
pub const NORM_SAFETY_FACTOR: f64 = 1.01;

impl Pattern {
    pub fn operator(&self) -> SensingOperator {
        SensingOperator::new(self)
    }

    /// `L p`, the real-valued measurements of a field.
    pub fn forward(&self, field: &Field) -> Result<Vec<f64>> {
        self.operator().forward(field)
    }

    /// `Lᵀ c`, an unclipped field.
    pub fn adjoint(&self, coeffs: &[f64]) -> Result<Field> {
        self.operator().adjoint(coeffs)
    }

    pub fn describe(&self, patch: &Patch, binary: bool) -> Result<Descriptor> {
        describe(self, patch, binary)
    }
}

/// Sign map with `0 ↦ -1`.
pub fn binarize(v: &[f64]) -> Vec<i8> {
    v.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Real(Vec<f64>),
    /// Entries are exactly `-1` or `+1`.
    Binary(Vec<i8>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Real(v) => v.len(),
            Payload::Binary(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Payload::Binary(_))
    }

    /// The payload as reals; signs map to `±1.0`.
    pub fn to_real(&self) -> Vec<f64> {
        match self {
            Payload::Real(v) => v.clone(),
            Payload::Binary(v) => v.iter().map(|&s| s as f64).collect(),
        }
    }
}

/// A descriptor together with the id of the pattern that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    payload: Payload,
    pattern_id: u64,
}

impl Descriptor {
    pub fn real(values: Vec<f64>, pattern_id: u64) -> Self {
        Self {
            payload: Payload::Real(values),
            pattern_id,
        }
    }

    pub fn binary(signs: Vec<i8>, pattern_id: u64) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(LbdError::Parameter(format!("binary descriptor entry {bad} is not ±1")));
        }
        Ok(Self {
            payload: Payload::Binary(signs),
            pattern_id,
        })
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn pattern_id(&self) -> u64 {
        self.pattern_id
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.payload.is_binary()
    }

    /// Fails unless this descriptor was produced by `pattern`.
    pub fn check_pattern(&self, pattern: &Pattern) -> Result<()> {
        let id = pattern.id();
        if id != self.pattern_id {
            return Err(LbdError::PatternMismatch {
                descriptor: self.pattern_id,
                pattern: id,
            });
        }
        check_len(pattern.len(), self.len())
    }
}

/// `B(L p)` when `binary`, `L p` otherwise.
pub fn describe(pattern: &Pattern, patch: &Patch, binary: bool) -> Result<Descriptor> {
    let measurements = pattern.forward(patch)?;
    Ok(if binary {
        Descriptor {
            payload: Payload::Binary(binarize(&measurements)),
            pattern_id: pattern.id(),
        }
    } else {
        Descriptor::real(measurements, pattern.id())
    })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Power-method trace of `‖L‖`: entry `k` is `sqrt(‖LᵀL x_k‖)` for the
/// normalized iterate `x_k`. The sequence is non-decreasing.
pub fn power_iterations(pattern: &Pattern, iterations: usize, seed: u64) -> Vec<f64> {
    let op = pattern.operator();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.cols()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let n = l2(&x);
    x.iter_mut().for_each(|v| *v /= n);

    let mut lx = vec![0.0; op.rows()];
    let mut y = vec![0.0; op.cols()];
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        op.forward_into(&x, &mut lx);
        op.adjoint_into(&lx, &mut y);
        let norm = l2(&y);
        trace.push(norm.sqrt());
        if norm == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    trace
}

/// Estimate of the largest singular value of `L`, inflated by
/// [`NORM_SAFETY_FACTOR`].
pub fn operator_norm(pattern: &Pattern, iterations: usize, seed: u64) -> Result<f64> {
    if iterations == 0 {
        return Err(LbdError::Parameter("power method needs at least one iteration".into()));
    }
    let trace = power_iterations(pattern, iterations, seed);
    Ok(NORM_SAFETY_FACTOR * trace.last().copied().unwrap_or(0.0))
}
