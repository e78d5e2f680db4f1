use nalgebra::{Matrix4, RealField};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_probs, theta_soliton, theta_standard, BranchTable, ExperimentConfig};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Trace and Hermiticity tolerance.
pub const MATRIX_TOLERANCE: f64 = 1e-12;

/// Two-spin density matrix in the basis `++, +-, -+, --`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDensityMatrix<T: Real> {
    pub matrix: Matrix4<Complex<T>>,
}

impl<T: Real> Serialize for SpinDensityMatrix<T> {
    /// Row-major nested arrays of `[re, im]` pairs.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| [self.matrix[(r, c)].re.as_f64(), self.matrix[(r, c)].im.as_f64()])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for SpinDensityMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[T; 2]>> = Vec::deserialize(d)?;
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(serde::de::Error::custom("density matrix must be 4 x 4"));
        }
        Ok(Self {
            matrix: Matrix4::from_fn(|r, c| Complex::new(rows[r][c][0], rows[r][c][1])),
        })
    }
}

fn projector<T: Real>(psi: &[Complex<T>; 4]) -> Matrix4<Complex<T>> {
    Matrix4::from_fn(|r, c| psi[r] * psi[c].conj())
}

/// Product amplitudes `a_i b_j e^{i theta_ij}` in basis order.
fn phased_state<T: Real>(config: &ExperimentConfig<T>, theta: &BranchTable<T>) -> [Complex<T>; 4] {
    let (a, b) = config.amplitudes();
    let mut psi = [Complex::new(T::zero(), T::zero()); 4];
    for i in 0..2 {
        for j in 0..2 {
            psi[2 * i + j] = a[i] * b[j] * cis(theta[i][j]);
        }
    }
    psi
}

impl<T: Real> SpinDensityMatrix<T> {
    /// Wraps `matrix` after checking Hermiticity and unit trace.
    pub fn new(matrix: Matrix4<Complex<T>>) -> Result<Self> {
        let tol = T::lit(MATRIX_TOLERANCE);
        for r in 0..4 {
            for c in 0..4 {
                if (matrix[(r, c)] - matrix[(c, r)].conj()).norm() > tol {
                    return Err(Error::InvalidDensityMatrix(format!("not Hermitian at ({r}, {c})")));
                }
            }
        }
        let tr = (0..4).fold(Complex::new(T::zero(), T::zero()), |s, i| s + matrix[(i, i)]);
        if (tr - Complex::new(T::one(), T::zero())).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        Ok(Self { matrix })
    }

    pub fn trace(&self) -> Complex<T> {
        (0..4).fold(Complex::new(T::zero(), T::zero()), |s, i| s + self.matrix[(i, i)])
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> T {
        let mut s = T::zero();
        for r in 0..4 {
            for c in 0..4 {
                s = s + self.matrix[(r, c)].norm_sqr();
            }
        }
        s
    }

    /// Transpose on the B spin: `(i j),(k l) -> (i l),(k j)`.
    pub fn partial_transpose_b(&self) -> Matrix4<Complex<T>> {
        Matrix4::from_fn(|r, c| {
            let (i, j) = (r / 2, r % 2);
            let (k, l) = (c / 2, c % 2);
            self.matrix[(2 * i + l, 2 * k + j)]
        })
    }
}

impl<T: Real + RealField> SpinDensityMatrix<T> {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 4] {
        sorted_eigenvalues(self.matrix)
    }

    /// Sum of the magnitudes of the negative eigenvalues of the partial
    /// transpose.
    pub fn negativity(&self) -> T {
        sorted_eigenvalues(self.partial_transpose_b())
            .iter()
            .filter(|l| **l < T::zero())
            .fold(T::zero(), |s, l| s - *l)
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &Self) -> T {
        let root = psd_sqrt(self.matrix);
        let inner = root * other.matrix * root;
        let inner = (inner + inner.adjoint()).map(|z| z.scale(T::lit(0.5)));
        let ev = sorted_eigenvalues(inner);
        let floor = eigen_floor(ev[3]);
        let s = ev.iter().fold(T::zero(), |s, l| s + clamped_sqrt(*l, floor));
        s * s
    }
}

/// Eigenvalues below this are indistinguishable from zero for a Hermitian
/// matrix whose largest eigenvalue is `top`.
fn eigen_floor<T: Real>(top: T) -> T {
    T::lit(16.0) * T::epsilon() * num_traits::Float::abs(top)
}

fn clamped_sqrt<T: Real>(x: T, floor: T) -> T {
    if x <= floor {
        T::zero()
    } else {
        num_traits::Float::sqrt(x)
    }
}

fn sorted_eigenvalues<T: Real + RealField>(m: Matrix4<Complex<T>>) -> [T; 4] {
    let eig = m.symmetric_eigen();
    let mut out = [T::zero(); 4];
    for (o, v) in out.iter_mut().zip(eig.eigenvalues.iter()) {
        *o = *v;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Square root of a positive semidefinite matrix; rounding-level
/// eigenvalues are set to zero.
fn psd_sqrt<T: Real + RealField>(m: Matrix4<Complex<T>>) -> Matrix4<Complex<T>> {
    let eig = m.symmetric_eigen();
    let v = eig.eigenvectors;
    let top = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, l| num_traits::Float::max(m, *l));
    let floor = eigen_floor(top);
    let d = Matrix4::from_fn(|r, c| {
        if r == c {
            Complex::new(clamped_sqrt(eig.eigenvalues[r], floor), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    v * d * v.adjoint()
}

/// Pure state of the linear theory after the parallel flight.
pub fn final_state_standard<T: Real>(
    config: &ExperimentConfig<T>,
    constants: &PhysicalConstants<T>,
) -> Result<SpinDensityMatrix<T>> {
    let theta = theta_standard(config, constants)?;
    SpinDensityMatrix::new(projector(&phased_state(config, &theta)))
}

/// Mixture over mass paths `(k, l)` with weights `branch_probs` (the
/// config's probabilities, or the Born weights, when `None`).
pub fn final_state_soliton<T: Real>(
    config: &ExperimentConfig<T>,
    branch_probs: Option<&BranchTable<T>>,
    constants: &PhysicalConstants<T>,
) -> Result<SpinDensityMatrix<T>> {
    config.validate()?;
    let p = branch_probs.copied().unwrap_or_else(|| config.branch_probabilities());
    check_probs(&p)?;
    let mut rho = Matrix4::from_element(Complex::new(T::zero(), T::zero()));
    for k in 0..2 {
        for l in 0..2 {
            if p[k][l] == T::zero() {
                continue;
            }
            let theta = theta_soliton(config, k, l, constants)?;
            let term = projector(&phased_state(config, &theta));
            rho = rho.zip_map(&term, |a, b| a + b.scale(p[k][l]));
        }
    }
    SpinDensityMatrix::new(rho)
}

/// Comparison of the two predicted final states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport<T> {
    pub purity_standard: T,
    pub purity_soliton: T,
    pub fidelity: T,
    pub negativity_standard: T,
    pub negativity_soliton: T,
    /// `arg(rho_standard) - arg(rho_soliton)` per element, wrapped to
    /// `(-pi, pi]`, and zero where either element vanishes.
    pub phase_differences: [[T; 4]; 4],
}

/// Purities, fidelity, negativities and element phase differences.
pub fn tomography_report<T: Real + RealField>(
    standard: &SpinDensityMatrix<T>,
    soliton: &SpinDensityMatrix<T>,
) -> TomographyReport<T> {
    let mut phase_differences = [[T::zero(); 4]; 4];
    let tiny = T::lit(MATRIX_TOLERANCE);
    for (r, row) in phase_differences.iter_mut().enumerate() {
        for (c, out) in row.iter_mut().enumerate() {
            let (a, b) = (standard.matrix[(r, c)], soliton.matrix[(r, c)]);
            if a.norm() > tiny && b.norm() > tiny {
                *out = (a * b.conj()).arg();
            }
        }
    }
    TomographyReport {
        purity_standard: standard.purity(),
        purity_soliton: soliton.purity(),
        fidelity: standard.fidelity(soliton),
        negativity_standard: standard.negativity(),
        negativity_soliton: soliton.negativity(),
        phase_differences,
    }
}
