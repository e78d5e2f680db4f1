//! Gravitational phase calculator for two spin-split mesoscopic spheres.
//!
//! All quantities are SI. Branch tables are indexed `[i][j]` with `i` the
//! spin path of system A and `j` that of system B, `0` for `+` and `1` for
//! `-`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scalar::Real;

mod density;

pub use density::{final_state_soliton, final_state_standard, tomography_report, SpinDensityMatrix, TomographyReport};


/// One value per pair of spin paths.
pub type BranchTable<T> = [[T; 2]; 2];

/// Labels of the two spin paths, in table order.
pub const BRANCH_LABELS: [&str; 2] = ["+", "-"];

/// Homogeneous sphere of mass `mass` (kg) and radius `radius` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfGravitySphere<T> {
    pub mass: T,
    pub radius: T,
}

impl<T: Real> SelfGravitySphere<T> {
    pub fn new(mass: T, radius: T) -> Result<Self> {
        positive(mass, "mass")?;
        positive(radius, "radius")?;
        Ok(Self { mass, radius })
    }
}

fn positive<T: Real>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// Gravitational energy of a point mass `m` at distance `d` from the centre
/// of a homogeneous sphere of the same mass: harmonic inside, Newtonian
/// outside.
pub fn sphere_potential<T: Real>(sphere: &SelfGravitySphere<T>, d: T, constants: &PhysicalConstants<T>) -> Result<T> {
    if !(d >= T::zero()) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "distance must be non-negative, got {d}"
        )));
    }
    let (m, r) = (sphere.mass, sphere.radius);
    let gm2 = constants.g * m * m;
    Ok(if d <= r {
        let s = d / r;
        gm2 / r * (T::lit(-1.5) + T::lit(0.5) * s * s)
    } else {
        -gm2 / d
    })
}

/// Reduced Compton wavelength `hbar / (m c)`.
pub fn compton_radius<T: Real>(m: T, constants: &PhysicalConstants<T>) -> Result<T> {
    positive(m, "mass")?;
    Ok(constants.hbar / (m * constants.c))
}

/// `G m^2 / (hbar c)`: self-gravity relative to the focusing scale.
pub fn self_coupling_ratio<T: Real>(m: T, constants: &PhysicalConstants<T>) -> Result<T> {
    positive(m, "mass")?;
    Ok(constants.g * m * m / (constants.hbar * constants.c))
}

/// Spring constants of a Compton-sized soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringConstants<T> {
    /// `G rho m` with the density scale `rho = m^4 c^3 / hbar^3`.
    pub k_grav: T,
    /// `k_grav / ratio`: the focusing strength needed at the Compton size.
    pub k_focus: T,
    /// `G m^2 / (hbar c)`.
    pub ratio: T,
}

/// Order-of-magnitude spring constants, with the convention
/// `k_grav = G rho m` and `rho = m^4 c^3 / hbar^3`.
pub fn soliton_spring_constant<T: Real>(m: T, constants: &PhysicalConstants<T>) -> Result<SpringConstants<T>> {
    let ratio = self_coupling_ratio(m, constants)?;
    let (h, c) = (constants.hbar, constants.c);
    let rho = m.powi(4) * c.powi(3) / h.powi(3);
    let k_grav = constants.g * rho * m;
    Ok(SpringConstants {
        k_grav,
        k_focus: k_grav / ratio,
        ratio,
    })
}

/// Two spin-split spheres on parallel paths for a time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ExperimentConfig<T> {
    pub m_a: T,
    pub m_b: T,
    pub r_a: T,
    pub r_b: T,
    pub tau: T,
    /// `d[i][j]`: distance between path `i` of A and path `j` of B.
    pub d: BranchTable<T>,
    /// Distance between the two paths inside device A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_intra_a: Option<T>,
    /// Distance between the two paths inside device B.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_intra_b: Option<T>,
    /// Spin amplitudes, serialized as `[re, im]`.
    pub alpha_a: Complex<T>,
    pub beta_a: Complex<T>,
    pub alpha_b: Complex<T>,
    pub beta_b: Complex<T>,
    /// Probabilities that the masses travel along paths `(k, l)`. Defaults
    /// to the Born weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_probs: Option<BranchTable<T>>,
}

/// Tolerance on amplitude and probability normalisation.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

impl<T: Real> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        positive(self.m_a, "m_a")?;
        positive(self.m_b, "m_b")?;
        positive(self.r_a, "r_a")?;
        positive(self.r_b, "r_b")?;
        if !(self.tau >= T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau must be non-negative, got {}",
                self.tau
            )));
        }
        let r_max = self.r_a.max(self.r_b);
        let mut distances = vec![];
        for i in 0..2 {
            for j in 0..2 {
                distances.push((format!("d[{i}][{j}]"), self.d[i][j]));
            }
        }
        if let Some(d) = self.d_intra_a {
            distances.push(("d_intra_a".into(), d));
        }
        if let Some(d) = self.d_intra_b {
            distances.push(("d_intra_b".into(), d));
        }
        for (name, d) in distances {
            if !(d > r_max) || !d.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {d} must exceed the largest radius {r_max}"
                )));
            }
        }
        let tol = T::lit(NORMALIZATION_TOLERANCE);
        for (name, a, b) in [("A", self.alpha_a, self.beta_a), ("B", self.alpha_b, self.beta_b)] {
            let n = a.norm_sqr() + b.norm_sqr();
            if !((n - T::one()).abs() <= tol) {
                return Err(Error::InvalidParameter(format!(
                    "spin amplitudes of {name} have norm {n}, not 1"
                )));
            }
        }
        if let Some(p) = &self.branch_probs {
            check_probs(p)?;
        }
        Ok(())
    }

    /// Spin amplitudes of A and B as `[alpha, beta]`.
    pub fn amplitudes(&self) -> ([Complex<T>; 2], [Complex<T>; 2]) {
        ([self.alpha_a, self.beta_a], [self.alpha_b, self.beta_b])
    }

    /// `|a_k|^2 |b_l|^2`.
    pub fn born_weights(&self) -> BranchTable<T> {
        let (a, b) = self.amplitudes();
        let mut p = [[T::zero(); 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                p[k][l] = a[k].norm_sqr() * b[l].norm_sqr();
            }
        }
        p
    }

    /// Configured branch probabilities, or the Born weights.
    pub fn branch_probabilities(&self) -> BranchTable<T> {
        self.branch_probs.unwrap_or_else(|| self.born_weights())
    }
}

pub(crate) fn check_probs<T: Real>(p: &BranchTable<T>) -> Result<()> {
    let flat = [p[0][0], p[0][1], p[1][0], p[1][1]];
    if flat.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "branch probabilities must be non-negative".into(),
        ));
    }
    let sum = flat.iter().fold(T::zero(), |s, x| s + *x);
    if !((sum - T::one()).abs() <= T::lit(NORMALIZATION_TOLERANCE)) {
        return Err(Error::InvalidParameter(format!(
            "branch probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Phases `tau G m_A m_B / (hbar d[i][j])` of the linear theory.
pub fn theta_standard<T: Real>(
    config: &ExperimentConfig<T>,
    constants: &PhysicalConstants<T>,
) -> Result<BranchTable<T>> {
    config.validate()?;
    let pre = config.tau * constants.g / constants.hbar * config.m_a * config.m_b;
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = pre / config.d[i][j];
        }
    }
    Ok(out)
}

/// Contributions to one soliton-model phase, each already multiplied by
/// `tau G / hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonPhaseTerms<T> {
    /// A's wave on path `i` feels A's mass on path `k`.
    pub self_a: T,
    pub self_b: T,
    /// `m_A m_B (1/d[i][l] + 1/d[k][j] - delta_ki delta_lj / d[k][l])`.
    pub cross: T,
}

impl<T: Real> SolitonPhaseTerms<T> {
    pub fn total(&self) -> T {
        self.self_a + self.self_b + self.cross
    }
}

/// Phase terms of every branch `(i, j)` when the masses of A and B travel
/// along paths `k` and `l`.
pub fn theta_soliton_terms<T: Real>(
    config: &ExperimentConfig<T>,
    k: usize,
    l: usize,
    constants: &PhysicalConstants<T>,
) -> Result<BranchTable<SolitonPhaseTerms<T>>> {
    config.validate()?;
    if k > 1 || l > 1 {
        return Err(Error::InvalidParameter(format!("branch ({k}, {l}) out of range")));
    }
    let pre = config.tau * constants.g / constants.hbar;
    let (ma, mb) = (config.m_a, config.m_b);
    let intra = |d: Option<T>, name: &str| {
        d.ok_or_else(|| Error::InvalidParameter(format!("{name} is required for soliton phases")))
    };
    let self_term = |same: bool, m: T, r: T, d: Option<T>, name: &str| -> Result<T> {
        Ok(if same {
            T::lit(1.5) * m * m / r
        } else {
            m * m / intra(d, name)?
        })
    };
    let zero = SolitonPhaseTerms {
        self_a: T::zero(),
        self_b: T::zero(),
        cross: T::zero(),
    };
    let mut out = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let both = if k == i && l == j {
                T::one() / config.d[k][l]
            } else {
                T::zero()
            };
            out[i][j] = SolitonPhaseTerms {
                self_a: pre * self_term(k == i, ma, config.r_a, config.d_intra_a, "d_intra_a")?,
                self_b: pre * self_term(l == j, mb, config.r_b, config.d_intra_b, "d_intra_b")?,
                cross: pre * ma * mb * (T::one() / config.d[i][l] + T::one() / config.d[k][j] - both),
            };
        }
    }
    Ok(out)
}

/// Soliton-model phases of every branch `(i, j)` given mass paths `(k, l)`.
pub fn theta_soliton<T: Real>(
    config: &ExperimentConfig<T>,
    k: usize,
    l: usize,
    constants: &PhysicalConstants<T>,
) -> Result<BranchTable<T>> {
    let terms = theta_soliton_terms(config, k, l, constants)?;
    Ok([
        [terms[0][0].total(), terms[0][1].total()],
        [terms[1][0].total(), terms[1][1].total()],
    ])
}

/// Relative phase between the two paths of a single device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceDephasing<T> {
    /// `tau (G m^2 / hbar) (3/(2R) - 1/d)`.
    pub magnitude: T,
    /// `(+magnitude, |alpha|^2)` when the mass takes the `+` path and
    /// `(-magnitude, |beta|^2)` otherwise.
    pub outcomes: [(T, T); 2],
}

/// Dephasing of one sphere between paths a distance `d` apart.
pub fn single_device_dephasing<T: Real>(
    sphere: &SelfGravitySphere<T>,
    d: T,
    tau: T,
    alpha: Complex<T>,
    beta: Complex<T>,
    constants: &PhysicalConstants<T>,
) -> Result<DeviceDephasing<T>> {
    if !(d > sphere.radius) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "path separation {d} must exceed the radius {}",
            sphere.radius
        )));
    }
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if !((n - T::one()).abs() <= T::lit(NORMALIZATION_TOLERANCE)) {
        return Err(Error::InvalidParameter(format!("spin amplitudes have norm {n}, not 1")));
    }
    let m = sphere.mass;
    let magnitude = tau * constants.g * m * m / constants.hbar * (T::lit(1.5) / sphere.radius - T::one() / d);
    Ok(DeviceDephasing {
        magnitude,
        outcomes: [(magnitude, alpha.norm_sqr()), (-magnitude, beta.norm_sqr())],
    })
}
