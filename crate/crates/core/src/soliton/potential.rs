use num_complex::Complex;

use crate::error::{Error, Result};
use crate::pilot::PilotWave;
use crate::scalar::Real;
use crate::spectral::{ComplexField, Spectral};

/// Nodes with `|phi| <= AMP_FLOOR * max|phi|` are masked: quotients by
/// `|phi|` are not evaluated there.
pub const AMP_FLOOR: f64 = 1e-12;

/// `V^NL` on the grid, split into its two parts.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearPotential<T> {
    /// `cross + self_term`; zero on masked nodes.
    pub values: Vec<T>,
    /// `(hbar^2/m) (grad R_L / R_L) . (grad|phi| / |phi|)`.
    pub cross: Vec<T>,
    /// `(hbar^2/2m) lap|phi| / |phi|`.
    pub self_term: Vec<T>,
    pub masked: Vec<bool>,
}

/// Quantum potentials `Q = -(hbar^2/2m) lap|psi| / |psi|` of the full wave
/// `psi = psi_L phi` and of the pilot alone. On unmasked nodes
/// `V^NL = linear - full`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumPotentials<T> {
    pub full: Vec<T>,
    pub linear: Vec<T>,
    pub masked: Vec<bool>,
}

/// Modulus of each value and the amplitude mask.
pub(crate) fn modulus_and_mask<T: Real>(values: &[Complex<T>], rel_floor: T) -> (Vec<T>, Vec<bool>) {
    let amp: Vec<T> = values.iter().map(|z| z.norm()).collect();
    let max = amp.iter().fold(T::zero(), |m, &a| if a > m { a } else { m });
    let floor = rel_floor * max;
    let mask = amp.iter().map(|&a| a <= floor).collect();
    (amp, mask)
}

fn as_complex<T: Real>(v: &[T]) -> Vec<Complex<T>> {
    v.iter().map(|&x| Complex::new(x, T::zero())).collect()
}

pub fn nonlinear_potential<T: Real>(
    phi: &ComplexField<T>,
    pilot: &PilotWave<T>,
    t: T,
) -> Result<NonlinearPotential<T>> {
    let grid = phi.grid();
    if grid.dims() != pilot.dims() {
        return Err(Error::GridMismatch);
    }
    if phi.max_abs() == T::zero() {
        return Err(Error::ZeroNorm);
    }
    let sp = Spectral::new(grid);
    let (amp, masked) = modulus_and_mask(phi.values(), T::lit(AMP_FLOOR));
    let (grad, lap) = sp.gradient_and_laplacian(&as_complex(&amp));
    let h2m = pilot.hbar() * pilot.hbar() / pilot.mass();
    let n = grid.len();
    let mut cross = vec![T::zero(); n];
    let mut self_term = vec![T::zero(); n];
    for i in 0..n {
        if masked[i] {
            continue;
        }
        let pd = pilot.phase_data_unchecked(t, &grid.node(i))?;
        let dot = (0..grid.dims()).fold(T::zero(), |s, a| s + pd.grad_log_amplitude[a] * grad[a][i].re / amp[i]);
        cross[i] = h2m * dot;
        self_term[i] = h2m * T::lit(0.5) * lap[i].re / amp[i];
    }
    let values = cross.iter().zip(&self_term).map(|(a, b)| *a + *b).collect();
    Ok(NonlinearPotential {
        values,
        cross,
        self_term,
        masked,
    })
}

/// Independent route to `V^NL` through the spectral Laplacian of the product
/// `|psi_L| |phi|` and the pilot's own `lap R_L / R_L`.
pub fn quantum_potentials<T: Real>(phi: &ComplexField<T>, pilot: &PilotWave<T>, t: T) -> Result<QuantumPotentials<T>> {
    let grid = phi.grid();
    if grid.dims() != pilot.dims() {
        return Err(Error::GridMismatch);
    }
    let sp = Spectral::new(grid);
    let (amp, masked) = modulus_and_mask(phi.values(), T::lit(AMP_FLOOR));
    let nodes = grid.nodes();
    let r_l = nodes
        .iter()
        .map(|x| Ok(pilot.evaluate(t, x)?.norm()))
        .collect::<Result<Vec<T>>>()?;
    let full_mod: Vec<T> = amp.iter().zip(&r_l).map(|(a, r)| *a * *r).collect();
    let lap_full = sp.laplacian(&as_complex(&full_mod));
    let c = -pilot.hbar() * pilot.hbar() / (T::lit(2.0) * pilot.mass());
    let n = grid.len();
    let mut full = vec![T::zero(); n];
    let mut linear = vec![T::zero(); n];
    for i in 0..n {
        if masked[i] || full_mod[i] == T::zero() {
            continue;
        }
        let pd = pilot.phase_data_unchecked(t, &nodes[i])?;
        full[i] = c * lap_full[i].re / full_mod[i];
        linear[i] = c * pd.laplacian_amplitude_ratio;
    }
    Ok(QuantumPotentials { full, linear, masked })
}
