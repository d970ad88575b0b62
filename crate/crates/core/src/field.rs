//! Square scalar fields and image patches.

use crate::error::{check_len, LbdError, Result};
use std::ops::Deref;

/// Upper bound of the pixel dynamic range.
pub const H_PIX: f64 = 1.0;

/// A `side × side` real field stored row-major (`values[y * side + x]`).
///
/// Unlike [`Patch`], values are unconstrained: adjoints, gradients and
/// extrapolated iterates live here.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    side: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        check_len(side * side, values.len())?;
        Ok(Self { side, values })
    }

    pub fn zeros(side: usize) -> Self {
        Self::filled(side, 0.0)
    }

    pub fn filled(side: usize, value: f64) -> Self {
        Self {
            side,
            values: vec![value; side * side],
        }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(side * side);
        for y in 0..side {
            for x in 0..side {
                values.push(f(x, y));
            }
        }
        Self { side, values }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.side + x]
    }

    pub fn dot(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// A vectorized grayscale image block with every pixel in `[0, H_PIX]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch(Field);

impl Patch {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        Self::try_from(Field::new(side, values)?)
    }

    /// Builds a patch by clamping every value into `[0, H_PIX]`.
    pub fn clamped(mut field: Field) -> Self {
        for v in field.values_mut() {
            *v = v.clamp(0.0, H_PIX);
        }
        Patch(field)
    }

    pub fn constant(side: usize, value: f64) -> Result<Self> {
        Self::try_from(Field::filled(side, value))
    }

    pub fn field(&self) -> &Field {
        &self.0
    }

    pub fn into_field(self) -> Field {
        self.0
    }
}

impl TryFrom<Field> for Patch {
    type Error = LbdError;

    fn try_from(field: Field) -> Result<Self> {
        if let Some(bad) = field.values().iter().find(|v| !(0.0..=H_PIX).contains(*v)) {
            return Err(LbdError::Parameter(format!(
                "patch value {bad} outside [0, {H_PIX}]"
            )));
        }
        Ok(Patch(field))
    }
}

impl Deref for Patch {
    type Target = Field;

    fn deref(&self) -> &Field {
        &self.0
    }
}
