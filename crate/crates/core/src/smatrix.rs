//! The truncated low-energy scattering matrix on a real spherical-harmonic
//! basis.
//!
//! At small relative wavenumber `k` the scattering matrix acts as
//! `S(k) = I + i k Sigma1 - k^2 Sigma2` with two finite-rank real operators
//! built from the scattering length `c0` and the three l = 1 anisotropy
//! coefficients `Y1`:
//!
//! * `Sigma1` is rank one, `-2 c0` on the isotropic harmonic,
//! * `Sigma2` carries `2 c0^2` on the isotropic harmonic plus the
//!   antisymmetric couplings `(00, 1m) = +Y1[m]`, `(1m, 00) = -Y1[m]`.
//!
//! Unitarity of the full scattering matrix survives truncation as the exact
//! operator identity `Sigma2 + Sigma2^T = Sigma1^2`, which is what makes the
//! first-order norm change of scattered states cancel.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

/// Complex amplitude vector entry.
pub type Complex = nalgebra::Complex<f64>;

/// Truncated low-energy scattering matrix.
#[derive(Debug, Clone, Serialize)]
pub struct LowEnergySMatrix {
    c0: f64,
    y1: [f64; 3],
    lmax: usize,
    #[serde(skip)]
    sigma1: DMatrix<f64>,
    #[serde(skip)]
    sigma2: DMatrix<f64>,
}

/// Index of the real harmonic `(l, m)` in the flattened basis, `l^2 + l + m`.
pub fn harmonic_index(l: usize, m: isize) -> usize {
    l * l + (l as isize + m) as usize
}

impl LowEnergySMatrix {
    /// Identity scattering (free case): `c0 = 0`, no anisotropy.
    pub fn identity(lmax: usize) -> Result<Self> {
        build(0.0, [0.0; 3], lmax)
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Cartesian l = 1 coefficients `(x, y, z)` of the anisotropy function.
    pub fn y1(&self) -> [f64; 3] {
        self.y1
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Basis dimension `(lmax + 1)^2`.
    pub fn dim(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    pub fn sigma1(&self) -> &DMatrix<f64> {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &DMatrix<f64> {
        &self.sigma2
    }

    /// Applies `S(k) = I + i k Sigma1 - k^2 Sigma2` to a coefficient vector.
    pub fn apply(&self, k: f64, coeffs: &[Complex]) -> Result<Vec<Complex>> {
        if k < 0.0 {
            return Err(Error::Domain(format!("wavenumber must be >= 0, got {k}")));
        }
        let dim = self.dim();
        if coeffs.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: coeffs.len(),
            });
        }
        let mut out = coeffs.to_vec();
        for (i, entry) in out.iter_mut().enumerate() {
            let mut s1 = Complex::new(0.0, 0.0);
            let mut s2 = Complex::new(0.0, 0.0);
            for (j, &c) in coeffs.iter().enumerate() {
                s1 += self.sigma1[(i, j)] * c;
                s2 += self.sigma2[(i, j)] * c;
            }
            *entry += Complex::new(0.0, k) * s1 - k * k * s2;
        }
        Ok(out)
    }

    /// Frobenius norm of `Sigma2 + Sigma2^T - Sigma1^2`; zero to machine
    /// precision for every `(c0, Y1)`.
    pub fn unitarity_defect(&self) -> f64 {
        let defect = &self.sigma2 + self.sigma2.transpose() - &self.sigma1 * &self.sigma1;
        defect.norm()
    }
}

/// Builds the truncated matrix for scattering length `c0` and Cartesian
/// anisotropy coefficients `y1`; `lmax >= 1` (the expansion has no content
/// above l = 1, larger bases just embed it in more harmonics).
pub fn build(c0: f64, y1: [f64; 3], lmax: usize) -> Result<LowEnergySMatrix> {
    if lmax < 1 {
        return Err(Error::Domain(format!("lmax must be >= 1, got {lmax}")));
    }
    let dim = (lmax + 1) * (lmax + 1);
    let mut sigma1 = DMatrix::zeros(dim, dim);
    let mut sigma2 = DMatrix::zeros(dim, dim);
    let s = harmonic_index(0, 0);
    sigma1[(s, s)] = -2.0 * c0;
    sigma2[(s, s)] = 2.0 * c0 * c0;
    // Cartesian (x, y, z) -> real harmonics (m = +1, -1, 0)
    let slots = [
        (harmonic_index(1, 1), y1[0]),
        (harmonic_index(1, -1), y1[1]),
        (harmonic_index(1, 0), y1[2]),
    ];
    for (idx, coeff) in slots {
        sigma2[(s, idx)] = coeff;
        sigma2[(idx, s)] = -coeff;
    }
    Ok(LowEnergySMatrix {
        c0,
        y1,
        lmax,
        sigma1,
        sigma2,
    })
}
