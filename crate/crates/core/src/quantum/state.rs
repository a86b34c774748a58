use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DfsError, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Computational basis index for the product state `|q1 q2⟩`.
#[inline]
pub const fn basis_index(q1: u8, q2: u8) -> usize {
    ((q1 as usize) << 1) | q2 as usize
}

/// Bit of `ion` (0 or 1) in basis index `index`.
#[inline]
pub(crate) const fn ion_bit(index: usize, ion: usize) -> usize {
    (index >> (1 - ion)) & 1
}

/// Exact two-ion density operator over `{|00⟩, |01⟩, |10⟩, |11⟩}`.
///
/// The first label is ion 1. Values are immutable; every evolution op
/// returns a new state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    matrix: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(matrix: Matrix4<Complex64>) -> Result<Self> {
        let state = Self { matrix };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(matrix: Matrix4<Complex64>) -> Self {
        Self { matrix }
    }

    /// Pure state from (not necessarily normalized) amplitudes.
    pub fn pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        let v = Vector4::from(amplitudes);
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(DfsError::InvalidState("zero or non-finite amplitude vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self {
            matrix: v * v.adjoint(),
        })
    }

    pub fn basis(q1: u8, q2: u8) -> Self {
        let mut m = Matrix4::zeros();
        let i = basis_index(q1 & 1, q2 & 1);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn ground() -> Self {
        Self::basis(0, 0)
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Matrix4::identity() * Complex64::new(0.25, 0.0),
        }
    }

    /// `ρ_p = ½|Ψ_φ⟩⟨Ψ_φ| + ¼|00⟩⟨00| + ¼|11⟩⟨11|` with
    /// `|Ψ_φ⟩ = (|01⟩ + e^{iφ}|10⟩)/√2`, so `⟨01|ρ|10⟩ = ¼e^{−iφ}`.
    pub fn rho_p(phi: f64) -> Self {
        let mut m = Matrix4::zeros();
        let q = Complex64::new(0.25, 0.0);
        for i in 0..4 {
            m[(i, i)] = q;
        }
        let c = Complex64::from_polar(0.25, -phi);
        m[(1, 2)] = c;
        m[(2, 1)] = c.conj();
        Self { matrix: m }
    }

    /// `|Ψ_φ⟩` itself.
    pub fn dfs_bell(phi: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure([
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::from_polar(s, phi),
            Complex64::new(0.0, 0.0),
        ])
        .expect("normalized amplitudes")
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// Diagonal in basis order `p00, p01, p10, p11`.
    pub fn populations(&self) -> [f64; 4] {
        [
            self.matrix[(0, 0)].re,
            self.matrix[(1, 1)].re,
            self.matrix[(2, 2)].re,
            self.matrix[(3, 3)].re,
        ]
    }

    /// Born-rule outcome probabilities with rounding noise removed
    /// (tiny negatives clamped, renormalized to one).
    pub fn probabilities(&self) -> [f64; 4] {
        let mut p = self.populations().map(|x| x.max(0.0));
        let sum: f64 = p.iter().sum();
        if sum > 0.0 {
            p.iter_mut().for_each(|x| *x /= sum);
        }
        p
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        // Symmetrize so the Hermitian solver sees an exactly Hermitian input.
        let h = (self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvalues;
        [v[0], v[1], v[2], v[3]]
    }

    pub fn validate(&self) -> Result<()> {
        for r in 0..4 {
            for c in 0..4 {
                let a = self.matrix[(r, c)];
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(DfsError::InvalidState(format!("non-finite element ({r},{c})")));
                }
                let d = (a - self.matrix[(c, r)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(DfsError::InvalidState(format!(
                        "not Hermitian at ({r},{c}): deviation {d:.3e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(DfsError::InvalidState(format!("trace {tr} != 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(DfsError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }
}
