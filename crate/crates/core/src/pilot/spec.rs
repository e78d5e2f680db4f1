use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{GridSpec, LinearPotential};

/// Convention for the spatially constant phase of the coherent state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalPhase {
    /// Keeps the phase that makes the state an exact Schrödinger solution.
    #[default]
    Dynamical,
    /// Drops every spatially constant phase term.
    Zero,
}

/// One harmonic-oscillator eigenfunction product with quantum numbers `n`
/// per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenTerm<T> {
    pub n: Vec<usize>,
    /// Complex coefficient, serialized as `[re, im]`.
    pub coefficient: Complex<T>,
}

/// Description of a linear pilot wave. Vectors carry one entry per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub enum PilotSpec<T> {
    PlaneWave {
        k: Vec<T>,
    },
    /// Harmonic-oscillator coherent state whose centre follows
    /// `amplitude[a] * cos(omega t + phase_offsets[a])`.
    CoherentState {
        omega: T,
        amplitude: Vec<T>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase_offsets: Option<Vec<T>>,
        #[serde(default)]
        global_phase: GlobalPhase,
    },
    EigenstateSuperposition {
        omega: T,
        terms: Vec<EigenTerm<T>>,
    },
    /// Freely spreading Gaussian packet. `sigma0` is the initial rms width
    /// of `|psi|^2` per axis (one entry is broadcast).
    FreeGaussian {
        sigma0: Vec<T>,
        center: Vec<T>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        k0: Vec<T>,
    },
    /// Pilot obtained by propagating an analytic initial state with the
    /// split-step solver and interpolating the stored snapshots.
    NumericField {
        initial: Box<PilotSpec<T>>,
        potential: LinearPotential<T>,
        grid: GridSpec<T>,
        #[serde(default = "zero")]
        t0: T,
        t_end: T,
        snapshot_dt: T,
        #[serde(default = "default_substeps")]
        substeps: usize,
    },
}

fn zero<T: Real>() -> T {
    T::zero()
}

fn default_substeps() -> usize {
    10
}

fn check_dims(len: usize, what: &str) -> Result<usize> {
    if (1..=3).contains(&len) {
        Ok(len)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} needs 1 to 3 components, got {len}"
        )))
    }
}

fn check_finite<T: Real>(v: &[T], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite")))
    }
}

fn check_positive<T: Real>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

impl<T: Real> PilotSpec<T> {
    /// Validates the parameters and returns the spatial dimension.
    pub fn validate(&self) -> Result<usize> {
        match self {
            PilotSpec::PlaneWave { k } => {
                check_finite(k, "k")?;
                check_dims(k.len(), "k")
            }
            PilotSpec::CoherentState {
                omega,
                amplitude,
                phase_offsets,
                ..
            } => {
                check_positive(*omega, "omega")?;
                check_finite(amplitude, "amplitude")?;
                let d = check_dims(amplitude.len(), "amplitude")?;
                if let Some(p) = phase_offsets {
                    check_finite(p, "phase_offsets")?;
                    if p.len() != d {
                        return Err(Error::InvalidParameter(format!(
                            "phase_offsets has {} entries, amplitude has {d}",
                            p.len()
                        )));
                    }
                }
                Ok(d)
            }
            PilotSpec::EigenstateSuperposition { omega, terms } => {
                check_positive(*omega, "omega")?;
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("superposition needs at least one term".into()))?;
                let d = check_dims(first.n.len(), "n")?;
                if terms.iter().any(|t| t.n.len() != d) {
                    return Err(Error::InvalidParameter(
                        "all terms need the same number of quantum numbers".into(),
                    ));
                }
                if terms.iter().all(|t| t.coefficient.norm_sqr() == T::zero()) {
                    return Err(Error::InvalidParameter(
                        "superposition coefficients are all zero".into(),
                    ));
                }
                if terms
                    .iter()
                    .any(|t| !t.coefficient.re.is_finite() || !t.coefficient.im.is_finite())
                {
                    return Err(Error::InvalidParameter("coefficients must be finite".into()));
                }
                Ok(d)
            }
            PilotSpec::FreeGaussian { sigma0, center, k0 } => {
                check_finite(center, "center")?;
                let d = check_dims(center.len(), "center")?;
                if sigma0.len() != 1 && sigma0.len() != d {
                    return Err(Error::InvalidParameter(format!(
                        "sigma0 needs 1 or {d} entries, got {}",
                        sigma0.len()
                    )));
                }
                for s in sigma0 {
                    check_positive(*s, "sigma0")?;
                }
                if !k0.is_empty() && k0.len() != d {
                    return Err(Error::InvalidParameter(format!(
                        "k0 needs {d} entries, got {}",
                        k0.len()
                    )));
                }
                check_finite(k0, "k0")?;
                Ok(d)
            }
            PilotSpec::NumericField {
                initial,
                grid,
                t0,
                t_end,
                snapshot_dt,
                substeps,
                ..
            } => {
                if matches!(**initial, PilotSpec::NumericField { .. }) {
                    return Err(Error::InvalidParameter(
                        "numeric pilot needs an analytic initial state".into(),
                    ));
                }
                let d = initial.validate()?;
                let g = grid.build()?;
                if g.dims() != d {
                    return Err(Error::InvalidParameter(format!(
                        "initial state has {d} dims, grid has {}",
                        g.dims()
                    )));
                }
                check_positive(*snapshot_dt, "snapshot_dt")?;
                check_positive(*t_end - *t0, "t_end - t0")?;
                if *substeps == 0 {
                    return Err(Error::InvalidParameter("substeps must be >= 1".into()));
                }
                Ok(d)
            }
        }
    }

    /// True when the phase gradient does not depend on position.
    pub fn has_uniform_phase_gradient(&self) -> bool {
        matches!(self, PilotSpec::PlaneWave { .. } | PilotSpec::CoherentState { .. })
    }

    /// Per-axis `sigma0`, broadcasting a single entry.
    pub(crate) fn sigma_axis(sigma0: &[T], a: usize) -> T {
        if sigma0.len() == 1 {
            sigma0[0]
        } else {
            sigma0[a]
        }
    }
}
