use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scalar::{cis, Point, Real};

use super::{ComplexField, Spectral};

/// Relative boundary amplitude above which the periodic domain is too small.
pub const EDGE_AMPLITUDE_THRESHOLD: f64 = 1e-12;

/// External potentials with a closed form, usable from scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinearPotential<T> {
    Free,
    /// `m omega^2 |x|^2 / 2`, centred on the origin.
    Harmonic {
        omega: T,
    },
}

impl<T: Real> LinearPotential<T> {
    pub fn value(&self, x: &Point<T>, mass: T) -> T {
        match *self {
            LinearPotential::Free => T::zero(),
            LinearPotential::Harmonic { omega } => {
                T::lit(0.5) * mass * omega * omega * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
            }
        }
    }
}

/// Strang-split propagator for `i hbar dpsi/dt = (-hbar^2 Delta / 2m + V) psi`.
///
/// Each step applies a half potential kick, a full kinetic step in Fourier
/// space and a second half kick. The potential is sampled at the step
/// midpoint, which keeps the scheme second order for time-dependent `V`.
pub struct LinearPropagator<T: Real> {
    spectral: Spectral<T>,
    nodes: Vec<Point<T>>,
    kinetic: Vec<Complex<T>>,
    hbar: T,
    dt: T,
}

impl<T: Real> LinearPropagator<T> {
    pub fn new(spectral: Spectral<T>, dt: T, constants: &PhysicalConstants<T>) -> Result<Self> {
        constants.validate()?;
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let coef = constants.hbar * dt / (T::lit(2.0) * constants.mass);
        let kinetic = spectral.k_squared().iter().map(|k2| cis(-coef * *k2)).collect();
        let nodes = spectral.grid().nodes();
        Ok(Self {
            spectral,
            nodes,
            kinetic,
            hbar: constants.hbar,
            dt,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Advances `values` from `t` to `t + dt`.
    pub fn step<P>(&self, values: &mut [Complex<T>], t: T, potential: &P)
    where
        P: Fn(T, &Point<T>) -> T + ?Sized,
    {
        let tm = t + self.dt * T::lit(0.5);
        let half = self.dt * T::lit(0.5) / self.hbar;
        let kicks: Vec<Complex<T>> = self.nodes.iter().map(|x| cis(-potential(tm, x) * half)).collect();
        for (v, k) in values.iter_mut().zip(&kicks) {
            *v = *v * *k;
        }
        self.spectral.forward(values);
        for (v, k) in values.iter_mut().zip(&self.kinetic) {
            *v = *v * *k;
        }
        self.spectral.inverse(values);
        for (v, k) in values.iter_mut().zip(&kicks) {
            *v = *v * *k;
        }
    }

    /// Runs `n_steps` steps starting at `t0`, checking for non-finite values.
    pub fn run<P>(&self, field: &mut ComplexField<T>, t0: T, n_steps: usize, potential: &P) -> Result<()>
    where
        P: Fn(T, &Point<T>) -> T + ?Sized,
    {
        for s in 0..n_steps {
            let t = t0 + T::count(s) * self.dt;
            self.step(field.values_mut(), t, potential);
            if !field.is_finite() {
                return Err(Error::NonFinite {
                    step: s + 1,
                    time: (t + self.dt).as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Propagates `f` under the linear Schrödinger equation with a real
/// potential `V(t, x)` for `n_steps` Strang steps of size `dt`.
pub fn split_step_linear<T, P>(
    f: &ComplexField<T>,
    t0: T,
    potential: &P,
    dt: T,
    n_steps: usize,
    constants: &PhysicalConstants<T>,
) -> Result<ComplexField<T>>
where
    T: Real,
    P: Fn(T, &Point<T>) -> T + ?Sized,
{
    let prop = LinearPropagator::new(Spectral::new(f.grid()), dt, constants)?;
    let mut out = f.clone();
    prop.run(&mut out, t0, n_steps, potential)?;
    let edge = out.edge_amplitude();
    if edge > T::lit(EDGE_AMPLITUDE_THRESHOLD) {
        log::warn!("boundary amplitude {edge:e} relative to peak; enlarge the domain");
    }
    Ok(out)
}
