use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{Amplitude, PureState, VALIDATION_TOL};
use crate::error::{Error, Result};

/// Hermitian, positive, trace-one operator on `num_qubits` qubits, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityOperator {
    num_qubits: usize,
    entries: Vec<Amplitude>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and eigenvalues ≥ −1e-9.
    pub fn new(num_qubits: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 12 {
            return Err(Error::InvalidDensity(format!(
                "unsupported qubit count {num_qubits}"
            )));
        }
        let dim = 1usize << num_qubits;
        if entries.len() != dim * dim {
            return Err(Error::InvalidDensity(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let rho = Self::from_raw(num_qubits, entries);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(num_qubits: usize, entries: Vec<Amplitude>) -> Self {
        Self {
            num_qubits,
            entries,
        }
    }

    /// Single-qubit operator from its four entries `[[r00, r01], [r10, r11]]`.
    pub fn qubit(r00: Amplitude, r01: Amplitude, r10: Amplitude, r11: Amplitude) -> Result<Self> {
        Self::new(1, vec![r00, r01, r10, r11])
    }

    /// |ψ⟩⟨ψ|
    pub fn pure(state: &PureState) -> Self {
        let a = state.amplitudes();
        let entries = a
            .iter()
            .flat_map(|&r| a.iter().map(move |&c| r * c.conj()))
            .collect();
        Self::from_raw(state.num_qubits(), entries)
    }

    /// The single-qubit maximally mixed state I/2.
    pub fn maximally_mixed() -> Self {
        let h = Complex64::new(0.5, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::from_raw(1, vec![h, z, z, h])
    }

    /// `w·a + (1 − w)·b`
    pub fn convex_combination(w: f64, a: &Self, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidProbability(w));
        }
        if a.num_qubits != b.num_qubits {
            return Err(Error::WrongQubitCount {
                expected: a.num_qubits,
                actual: b.num_qubits,
            });
        }
        let entries = a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| x * w + y * (1.0 - w))
            .collect();
        Ok(Self::from_raw(a.num_qubits, entries))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim() + col]
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, c| self.entry(r, c));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Single-qubit marginal of qubit `index`.
    pub fn reduced(&self, index: usize) -> Result<DensityOperator> {
        if index >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index,
                num_qubits: self.num_qubits,
            });
        }
        let m = 1usize << (self.num_qubits - 1 - index);
        let mut out = vec![Complex64::new(0.0, 0.0); 4];
        for rest in (0..self.dim()).filter(|i| i & m == 0) {
            for r in 0..2 {
                for c in 0..2 {
                    out[r * 2 + c] += self.entry(rest | (r * m), rest | (c * m));
                }
            }
        }
        Ok(Self::from_raw(1, out))
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        if self.num_qubits != other.num_qubits {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for r in 0..d {
            for c in r..d {
                if (self.entry(r, c) - self.entry(c, r).conj()).norm() > VALIDATION_TOL {
                    return Err(Error::InvalidDensity(format!("not Hermitian at ({r},{c})")));
                }
            }
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < -VALIDATION_TOL {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }
}

/// `Σ wᵢ |sᵢ⟩⟨sᵢ|` over states sharing a qubit count.
pub fn density_from_ensemble(parts: &[(f64, PureState)]) -> Result<DensityOperator> {
    let Some((_, first)) = parts.first() else {
        return Err(Error::EmptyInput);
    };
    let n = first.num_qubits();
    let sum: f64 = parts.iter().map(|(w, _)| w).sum();
    if parts.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0))
        || (sum - 1.0).abs() > VALIDATION_TOL
    {
        return Err(Error::WeightSum { sum });
    }
    let dim = 1usize << n;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (w, state) in parts {
        state.require_qubits(n)?;
        state.check_normalized()?;
        let proj = DensityOperator::pure(state);
        for (acc, x) in entries.iter_mut().zip(proj.entries()) {
            *acc += x * *w;
        }
    }
    Ok(DensityOperator::from_raw(n, entries))
}
