use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{Amplitude, VALIDATION_TOL};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unitary acting on one qubit (dimension 2) or two qubits (dimension 4),
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    dimension: usize,
    entries: Vec<Amplitude>,
}

impl GateMatrix {
    /// Builds a gate, rejecting anything that is not unitary within `1e-9`.
    pub fn new(dimension: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if !(dimension == 2 || dimension == 4) || entries.len() != dimension * dimension {
            return Err(Error::BadDimension { len: entries.len() });
        }
        if let Some(index) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        let gate = Self { dimension, entries };
        let deviation = gate.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(gate)
    }

    fn from_static(dimension: usize, entries: Vec<Amplitude>) -> Self {
        Self { dimension, entries }
    }

    pub fn identity() -> Self {
        Self::from_static(2, vec![ONE, ZERO, ZERO, ONE])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_static(2, vec![h, h, h, -h])
    }

    pub fn pauli_x() -> Self {
        Self::from_static(2, vec![ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::from_static(2, vec![ZERO, -i, i, ZERO])
    }

    pub fn pauli_z() -> Self {
        Self::from_static(2, vec![ONE, ZERO, ZERO, -ONE])
    }

    /// CNOT with the first (most significant) qubit as control.
    pub fn cnot() -> Self {
        let mut entries = vec![ZERO; 16];
        for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            entries[row * 4 + col] = ONE;
        }
        Self::from_static(4, entries)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dimension + col]
    }

    /// max |(U†U − I)ᵢⱼ|
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dimension;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}
