use crate::error::{Error, Result};
use crate::operator::{max_abs, CMatrix, CVector, HermitianOperator, C64};
use crate::space::SpaceLabel;

/// Normalization and positivity tolerance for states.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A pure or mixed state on a labeled space at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    space: SpaceLabel,
    payload: Payload,
    pub t: f64,
}

impl SystemState {
    pub fn pure(space: SpaceLabel, psi: CVector, t: f64) -> Result<Self> {
        let s = Self { space, payload: Payload::Pure(psi), t };
        s.validate()?;
        Ok(s)
    }

    pub fn mixed(space: SpaceLabel, rho: CMatrix, t: f64) -> Result<Self> {
        let s = Self { space, payload: Payload::Mixed(rho), t };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn from_parts(space: SpaceLabel, payload: Payload, t: f64) -> Self {
        Self { space, payload, t }
    }

    /// The basis vector `|index>`.
    pub fn basis(space: &SpaceLabel, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::State(format!("basis index {index} outside dimension {}", space.dim())));
        }
        let mut psi = CVector::zeros(space.dim());
        psi[index] = C64::new(1.0, 0.0);
        Ok(Self::from_parts(space.clone(), Payload::Pure(psi), 0.0))
    }

    /// Equal mixture of the basis states selected by `mask`.
    pub fn uniform_mixture(space: &SpaceLabel, mask: &[bool]) -> Result<Self> {
        let n = mask.iter().filter(|&&m| m).count();
        if mask.len() != space.dim() || n == 0 {
            return Err(Error::State("mask selects no basis state".into()));
        }
        let diag: Vec<f64> = mask.iter().map(|&m| if m { 1.0 / n as f64 } else { 0.0 }).collect();
        Ok(Self::diagonal(space, &diag, 0.0))
    }

    pub(crate) fn diagonal(space: &SpaceLabel, populations: &[f64], t: f64) -> Self {
        let v = CVector::from_iterator(populations.len(), populations.iter().map(|&p| C64::new(p, 0.0)));
        Self::from_parts(space.clone(), Payload::Mixed(CMatrix::from_diagonal(&v)), t)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.space.dim();
        match &self.payload {
            Payload::Pure(psi) => {
                if psi.len() != d {
                    return Err(Error::State(format!("vector length {} for dimension {d}", psi.len())));
                }
                let n = psi.norm();
                if (n - 1.0).abs() > STATE_TOL {
                    return Err(Error::State(format!("norm {n} differs from 1")));
                }
            }
            Payload::Mixed(rho) => {
                if rho.nrows() != d || rho.ncols() != d {
                    return Err(Error::State(format!(
                        "density matrix is {}x{} for dimension {d}",
                        rho.nrows(),
                        rho.ncols()
                    )));
                }
                let deviation = max_abs(&(rho - rho.adjoint()));
                if deviation > STATE_TOL {
                    return Err(Error::NotHermitian { deviation });
                }
                let tr = rho.trace().re;
                if (tr - 1.0).abs() > STATE_TOL {
                    return Err(Error::State(format!("trace {tr} differs from 1")));
                }
                let low = HermitianOperator::from_parts(self.space.clone(), rho.clone())
                    .spectrum()
                    .first()
                    .copied()
                    .unwrap_or(0.0);
                if low < -STATE_TOL {
                    return Err(Error::State(format!("negative eigenvalue {low}")));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub(crate) fn payload_mut(&mut self) -> &mut Payload {
        &mut self.payload
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.payload, Payload::Pure(_))
    }

    pub fn density(&self) -> CMatrix {
        match &self.payload {
            Payload::Pure(psi) => psi * psi.adjoint(),
            Payload::Mixed(rho) => rho.clone(),
        }
    }

    pub fn into_mixed(self) -> Self {
        let rho = self.density();
        Self { space: self.space, payload: Payload::Mixed(rho), t: self.t }
    }

    /// Diagonal of the density operator in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.payload {
            Payload::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).collect(),
            Payload::Mixed(rho) => (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// True when the density operator has no off-diagonal entries above `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        match &self.payload {
            Payload::Pure(psi) => psi.iter().filter(|z| z.norm() > tol).count() <= 1,
            Payload::Mixed(rho) => {
                let n = rho.nrows();
                (0..n).all(|j| (0..n).all(|i| i == j || rho[(i, j)].norm() <= tol))
            }
        }
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        assert_eq!(op.space(), &self.space, "operator and state live on different spaces");
        match &self.payload {
            Payload::Pure(psi) => (psi.adjoint() * op.matrix() * psi)[(0, 0)].re,
            Payload::Mixed(rho) => (rho * op.matrix()).trace().re,
        }
    }

    /// Total weight on basis states outside `mask`.
    pub fn weight_outside(&self, mask: &[bool]) -> f64 {
        self.populations().iter().zip(mask).filter(|(_, &m)| !m).map(|(p, _)| p).sum()
    }

    /// Trace distance `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "states live on different spaces");
        if let (Payload::Pure(a), Payload::Pure(b)) = (&self.payload, &other.payload) {
            let overlap = a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared());
            return (1.0 - overlap).max(0.0).sqrt();
        }
        let diff = HermitianOperator::from_parts(self.space.clone(), self.density() - other.density());
        0.5 * diff.spectrum().iter().map(|v| v.abs()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let s = SpaceLabel::spin1(1);
        let psi = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(SystemState::pure(s.clone(), psi.clone(), 0.0).is_err());
        assert!(SystemState::pure(s.clone(), psi.unscale(2f64.sqrt()), 0.0).is_ok());
        let mut rho = CMatrix::identity(3, 3) / C64::new(3.0, 0.0);
        assert!(SystemState::mixed(s.clone(), rho.clone(), 0.0).is_ok());
        rho[(0, 0)] = C64::new(-0.1, 0.0);
        rho[(1, 1)] = C64::new(0.1 + 2.0 / 3.0, 0.0);
        assert!(SystemState::mixed(s.clone(), rho, 0.0).is_err());
        assert!(SystemState::mixed(s, CMatrix::identity(3, 3), 0.0).is_err());
    }

    #[test]
    fn distances() {
        let s = SpaceLabel::spin1(1);
        let a = SystemState::basis(&s, 0).unwrap();
        let b = SystemState::basis(&s, 1).unwrap();
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-12);
        assert!((a.clone().into_mixed().trace_distance(&b) - 1.0).abs() < 1e-12);
        assert!(a.trace_distance(&a) < 1e-12);
        let mix = SystemState::uniform_mixture(&s, &[true, true, true]).unwrap();
        assert!((mix.trace_distance(&a) - 2.0 / 3.0).abs() < 1e-12);
        assert!((mix.weight_outside(&[true, false, false]) - 2.0 / 3.0).abs() < 1e-12);
        assert!(mix.is_diagonal(1e-15));
    }
}
