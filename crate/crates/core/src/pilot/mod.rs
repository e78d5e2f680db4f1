//! Linear pilot waves: closed-form families and a numeric snapshot pilot.
//!
//! Every pilot produces a [`Jet`] (value, gradient, Laplacian) at a point.
//! Amplitude and phase derivatives are recovered from the jet without any
//! phase unwrapping:
//!
//! ```text
//! grad(phi)   = Im(psi* grad psi) / |psi|^2
//! grad(R)/R   = Re(psi* grad psi) / |psi|^2
//! lap(phi)    = Im(psi* lap psi) / |psi|^2 - 2 grad(R)/R . grad(phi)
//! lap(R)/R    = Re(psi* lap psi) / |psi|^2 + |grad(phi)|^2
//! ```

mod hermite;
mod jet;
mod numeric;
mod spec;

use std::sync::Arc;

use num_complex::Complex;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scalar::{cis, point_to_f64, Point, Real};
use crate::spectral::{ComplexField, Grid};

pub use jet::{Jet, Jet1};
pub use numeric::NumericPilot;
pub use spec::{EigenTerm, GlobalPhase, PilotSpec};

/// Default node threshold, relative to the reference amplitude.
pub const NODE_EPSILON: f64 = 1e-8;

/// Amplitude and phase derivatives of a pilot wave at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseData<T> {
    /// `R_L = |psi|`.
    pub amplitude: T,
    pub grad_phase: Point<T>,
    pub laplacian_phase: T,
    /// `grad(R_L) / R_L`.
    pub grad_log_amplitude: Point<T>,
    /// `lap(R_L) / R_L`.
    pub laplacian_amplitude_ratio: T,
}

impl<T: Real> PhaseData<T> {
    /// Splits a jet into amplitude and phase parts. The caller guarantees
    /// a non-zero value.
    pub fn from_jet(j: &Jet<T>) -> Self {
        let rho = j.value.norm_sqr();
        let conj = j.value.conj();
        let dlog = [conj * j.grad[0] / rho, conj * j.grad[1] / rho, conj * j.grad[2] / rho];
        Self::from_log_derivatives(rho.sqrt(), &dlog, conj * j.lap / rho)
    }

    /// Builds the data from `grad psi / psi` and `lap psi / psi`.
    pub fn from_log_derivatives(amplitude: T, dlog: &[Complex<T>; 3], w: Complex<T>) -> Self {
        let mut grad_phase = [T::zero(); 3];
        let mut grad_log = [T::zero(); 3];
        for a in 0..3 {
            grad_log[a] = dlog[a].re;
            grad_phase[a] = dlog[a].im;
        }
        let cross = (0..3).fold(T::zero(), |s, a| s + grad_log[a] * grad_phase[a]);
        let gp2 = (0..3).fold(T::zero(), |s, a| s + grad_phase[a] * grad_phase[a]);
        Self {
            amplitude,
            grad_phase,
            laplacian_phase: w.im - T::lit(2.0) * cross,
            grad_log_amplitude: grad_log,
            laplacian_amplitude_ratio: w.re + gp2,
        }
    }
}

#[derive(Debug, Clone)]
enum Source<T: Real> {
    Analytic(PilotSpec<T>),
    Numeric {
        spec: Option<PilotSpec<T>>,
        data: Arc<NumericPilot<T>>,
    },
}

/// A pilot wave bound to the `hbar` and `m` of its species.
///
/// Cloning is cheap; numeric snapshots are shared.
#[derive(Debug, Clone)]
pub struct PilotWave<T: Real> {
    source: Source<T>,
    dims: usize,
    hbar: T,
    mass: T,
    scale: Complex<T>,
    node_epsilon: T,
}

impl<T: Real> PilotWave<T> {
    pub fn new(spec: PilotSpec<T>, constants: &PhysicalConstants<T>) -> Result<Self> {
        constants.validate()?;
        let dims = spec.validate()?;
        let source = match &spec {
            PilotSpec::NumericField {
                initial,
                potential,
                grid,
                t0,
                t_end,
                snapshot_dt,
                substeps,
            } => {
                let grid = grid.build()?;
                let start = PilotWave::new((**initial).clone(), constants)?.sample(&grid, *t0)?;
                let data = NumericPilot::generate(start, potential, constants, *t0, *t_end, *snapshot_dt, *substeps)?;
                Source::Numeric {
                    spec: Some(spec.clone()),
                    data: Arc::new(data),
                }
            }
            _ => Source::Analytic(spec),
        };
        Ok(Self {
            source,
            dims,
            hbar: constants.hbar,
            mass: constants.mass,
            scale: Complex::new(T::one(), T::zero()),
            node_epsilon: T::lit(NODE_EPSILON),
        })
    }

    /// Wraps precomputed snapshots.
    pub fn from_numeric(data: NumericPilot<T>, constants: &PhysicalConstants<T>) -> Result<Self> {
        constants.validate()?;
        Ok(Self {
            dims: data.grid().dims(),
            source: Source::Numeric {
                spec: None,
                data: Arc::new(data),
            },
            hbar: constants.hbar,
            mass: constants.mass,
            scale: Complex::new(T::one(), T::zero()),
            node_epsilon: T::lit(NODE_EPSILON),
        })
    }

    /// The same pilot multiplied by a complex constant.
    pub fn scaled(&self, lambda: Complex<T>) -> Result<Self> {
        if lambda.norm_sqr() == T::zero() || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidParameter(
                "scale factor must be finite and non-zero".into(),
            ));
        }
        let mut out = self.clone();
        out.scale = out.scale * lambda;
        Ok(out)
    }

    pub fn with_node_epsilon(mut self, eps: T) -> Self {
        self.node_epsilon = eps;
        self
    }

    pub fn node_epsilon(&self) -> T {
        self.node_epsilon
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// The serializable description, if the pilot was built from one.
    pub fn spec(&self) -> Option<&PilotSpec<T>> {
        match &self.source {
            Source::Analytic(s) => Some(s),
            Source::Numeric { spec, .. } => spec.as_ref(),
        }
    }

    pub fn numeric(&self) -> Option<&NumericPilot<T>> {
        match &self.source {
            Source::Numeric { data, .. } => Some(data),
            Source::Analytic(_) => None,
        }
    }

    pub fn has_uniform_phase_gradient(&self) -> bool {
        matches!(&self.source, Source::Analytic(s) if s.has_uniform_phase_gradient())
    }

    /// Angular frequency of harmonic pilots.
    pub fn omega(&self) -> Option<T> {
        match self.spec() {
            Some(PilotSpec::CoherentState { omega, .. }) | Some(PilotSpec::EigenstateSuperposition { omega, .. }) => {
                Some(*omega)
            }
            Some(PilotSpec::NumericField { potential, .. }) => match potential {
                crate::spectral::LinearPotential::Harmonic { omega } => Some(*omega),
                crate::spectral::LinearPotential::Free => None,
            },
            _ => None,
        }
    }

    pub fn jet(&self, t: T, x: &Point<T>) -> Result<Jet<T>> {
        let raw = match &self.source {
            Source::Analytic(spec) => self.analytic_jet(spec, t, x),
            Source::Numeric { data, .. } => data.jet(t, x)?,
        };
        Ok(raw.scale(self.scale))
    }

    pub fn evaluate(&self, t: T, x: &Point<T>) -> Result<Complex<T>> {
        Ok(self.jet(t, x)?.value)
    }

    /// Samples the pilot on every node of `grid`.
    pub fn sample(&self, grid: &Grid<T>, t: T) -> Result<ComplexField<T>> {
        if grid.dims() != self.dims {
            return Err(Error::GridMismatch);
        }
        let values = grid
            .nodes()
            .iter()
            .map(|x| self.evaluate(t, x))
            .collect::<Result<Vec<_>>>()?;
        ComplexField::new(grid.clone(), values)
    }

    /// Amplitude and phase derivatives, or `NodeProximity` when
    /// `|psi| <= node_epsilon * reference_amplitude(t)`.
    pub fn phase_data(&self, t: T, x: &Point<T>) -> Result<PhaseData<T>> {
        let pd = self.phase_data_unchecked(t, x)?;
        self.check_node(t, x, pd.amplitude)?;
        Ok(pd)
    }

    /// Amplitude and phase derivatives without the node threshold. Product
    /// families are differentiated through `log psi`, so the quotients stay
    /// exact far into the tails where `|psi|` underflows. Other pilots fail
    /// with `NodeProximity` only where the value is exactly zero.
    pub fn phase_data_unchecked(&self, t: T, x: &Point<T>) -> Result<PhaseData<T>> {
        if let Source::Analytic(spec) = &self.source {
            if let Some(axes) = self.log_axes(spec, t, x) {
                let zero = Complex::new(T::zero(), T::zero());
                let mut dlog = [zero; 3];
                let mut lap = zero;
                let mut log_value = zero;
                let mut pref = self.scale;
                for (a, ax) in axes.iter().enumerate() {
                    dlog[a] = ax.g1;
                    lap = lap + ax.g2 + ax.g1 * ax.g1;
                    log_value = log_value + ax.g;
                    pref = pref * ax.pref;
                }
                let amplitude = pref.norm() * log_value.re.exp();
                return Ok(PhaseData::from_log_derivatives(amplitude, &dlog, lap));
            }
        }
        let j = self.jet(t, x)?;
        let amp = j.value.norm();
        if amp == T::zero() || !amp.is_finite() {
            return Err(Error::NodeProximity {
                time: t.as_f64(),
                position: point_to_f64(x),
                amplitude: amp.as_f64(),
            });
        }
        Ok(PhaseData::from_jet(&j))
    }

    pub(crate) fn check_node(&self, t: T, x: &Point<T>, amplitude: T) -> Result<()> {
        let floor = self.node_epsilon * self.reference_amplitude(t);
        if amplitude <= floor || !amplitude.is_finite() {
            return Err(Error::NodeProximity {
                time: t.as_f64(),
                position: point_to_f64(x),
                amplitude: amplitude.as_f64(),
            });
        }
        Ok(())
    }

    /// `(hbar/m) grad(phi_L)`.
    pub fn guidance_velocity(&self, t: T, x: &Point<T>) -> Result<Point<T>> {
        let pd = self.phase_data(t, x)?;
        let f = self.hbar / self.mass;
        Ok([f * pd.grad_phase[0], f * pd.grad_phase[1], f * pd.grad_phase[2]])
    }

    /// Scale against which node proximity is judged: the peak modulus where
    /// it is known in closed form, and an upper bound for superpositions.
    pub fn reference_amplitude(&self, t: T) -> T {
        let s = self.scale.norm();
        let m = self.mass;
        let hbar = self.hbar;
        let base = match &self.source {
            Source::Numeric { data, .. } => data.max_abs(t),
            Source::Analytic(spec) => match spec {
                PilotSpec::PlaneWave { .. } => T::one(),
                PilotSpec::CoherentState { omega, .. } => {
                    (m * *omega / (T::PI() * hbar)).powf(T::count(self.dims) / T::lit(4.0))
                }
                PilotSpec::FreeGaussian { sigma0, .. } => (0..self.dims).fold(T::one(), |p, a| {
                    let sig = PilotSpec::sigma_axis(sigma0, a);
                    let tau = hbar * t / (T::lit(2.0) * m * sig * sig);
                    let width2 = sig * sig * (T::one() + tau * tau);
                    p * (T::lit(2.0) * T::PI() * width2).powf(T::lit(-0.25))
                }),
                PilotSpec::EigenstateSuperposition { omega, terms } => {
                    let per_axis = (m * *omega / hbar).powf(T::lit(0.25))
                        * T::lit(hermite::CRAMER_BOUND)
                        * T::PI().powf(T::lit(-0.25));
                    let total = terms.iter().fold(T::zero(), |s, t| s + t.coefficient.norm());
                    total * per_axis.powi(self.dims as i32)
                }
                PilotSpec::NumericField { .. } => unreachable!("numeric specs build snapshots"),
            },
        };
        s * base
    }

    /// Root-mean-square width of `|psi|^2` per axis (averaged over axes),
    /// or `None` for plane waves. For superpositions the interference terms
    /// are ignored, giving a time-independent scale.
    pub fn rms_width(&self, t: T) -> Option<T> {
        let m = self.mass;
        let hbar = self.hbar;
        let d = T::count(self.dims);
        match &self.source {
            Source::Numeric { data, .. } => Some(data.rms_width(t)),
            Source::Analytic(spec) => match spec {
                PilotSpec::PlaneWave { .. } => None,
                PilotSpec::CoherentState { omega, .. } => Some((hbar / (T::lit(2.0) * m * *omega)).sqrt()),
                PilotSpec::FreeGaussian { sigma0, .. } => {
                    let sum = (0..self.dims).fold(T::zero(), |acc, a| {
                        let sig = PilotSpec::sigma_axis(sigma0, a);
                        let tau = hbar * t / (T::lit(2.0) * m * sig * sig);
                        acc + sig * sig * (T::one() + tau * tau)
                    });
                    Some((sum / d).sqrt())
                }
                PilotSpec::EigenstateSuperposition { omega, terms } => {
                    let l2 = hbar / (m * *omega);
                    let (num, den) = terms.iter().fold((T::zero(), T::zero()), |(n, w), term| {
                        let p = term.coefficient.norm_sqr();
                        let e = term.n.iter().fold(T::zero(), |s, &k| s + T::count(k) + T::lit(0.5));
                        (n + p * e, w + p)
                    });
                    Some((l2 * num / (den * d)).sqrt())
                }
                PilotSpec::NumericField { .. } => None,
            },
        }
    }

    /// Natural time scale: the oscillator period, the plane-wave phase
    /// period, the spreading time of a free packet, or the stored span.
    pub fn characteristic_time(&self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        match &self.source {
            Source::Numeric { data, .. } => data.t_end() - data.t_start(),
            Source::Analytic(spec) => match spec {
                PilotSpec::CoherentState { omega, .. } | PilotSpec::EigenstateSuperposition { omega, .. } => {
                    two_pi / *omega
                }
                PilotSpec::PlaneWave { k } => {
                    let k2 = k.iter().fold(T::zero(), |s, v| s + *v * *v);
                    if k2 > T::zero() {
                        two_pi * T::lit(2.0) * self.mass / (self.hbar * k2)
                    } else {
                        T::one()
                    }
                }
                PilotSpec::FreeGaussian { sigma0, .. } => {
                    let s = (0..self.dims)
                        .map(|a| PilotSpec::sigma_axis(sigma0, a))
                        .fold(T::infinity(), T::min);
                    T::lit(2.0) * self.mass * s * s / self.hbar
                }
                PilotSpec::NumericField { .. } => T::one(),
            },
        }
    }

    /// Per-axis factors `pref * exp(g)` of the product-form families, with
    /// `g'` and `g''`. `None` for superpositions.
    fn log_axes(&self, spec: &PilotSpec<T>, t: T, x: &Point<T>) -> Option<Vec<LogAxis<T>>> {
        let hbar = self.hbar;
        let m = self.mass;
        let zero = T::zero();
        let i = Complex::new(zero, T::one());
        let c = |re: T| Complex::new(re, zero);
        let two = T::lit(2.0);
        let dims = self.dims;
        match spec {
            PilotSpec::PlaneWave { k } => Some(
                (0..dims)
                    .map(|a| {
                        let ka = k[a];
                        let g = i * (ka * x[a] - hbar * ka * ka * t / (two * m));
                        LogAxis {
                            pref: c(T::one()),
                            g,
                            g1: i * ka,
                            g2: c(zero),
                        }
                    })
                    .collect(),
            ),
            PilotSpec::CoherentState {
                omega,
                amplitude,
                phase_offsets,
                global_phase,
            } => {
                let w = *omega;
                let l2 = hbar / (m * w);
                let norm = (m * w / (T::PI() * hbar)).powf(T::lit(0.25));
                Some(
                    (0..dims)
                        .map(|a| {
                            let delta = phase_offsets.as_ref().map_or(zero, |p| p[a]);
                            let arg = w * t + delta;
                            let xc = amplitude[a] * arg.cos();
                            let pc = -m * w * amplitude[a] * arg.sin();
                            let u = x[a] - xc;
                            let mut phase = pc * x[a] / hbar;
                            if *global_phase == GlobalPhase::Dynamical {
                                phase = phase - pc * xc / (two * hbar) - w * t / two;
                            }
                            LogAxis {
                                pref: c(norm),
                                g: Complex::new(-u * u / (two * l2), phase),
                                g1: Complex::new(-u / l2, pc / hbar),
                                g2: c(-T::one() / l2),
                            }
                        })
                        .collect(),
                )
            }
            PilotSpec::FreeGaussian { sigma0, center, k0 } => Some(
                (0..dims)
                    .map(|a| {
                        let sig = PilotSpec::sigma_axis(sigma0, a);
                        let kk = if k0.is_empty() { zero } else { k0[a] };
                        let v = hbar * kk / m;
                        let tau = hbar * t / (two * m * sig * sig);
                        let s = Complex::new(T::one(), tau);
                        let pref = c((two * T::PI() * sig * sig).powf(T::lit(-0.25))) / s.sqrt();
                        let u = c(x[a] - center[a] - v * t);
                        let four_s = s * (T::lit(4.0) * sig * sig);
                        LogAxis {
                            pref,
                            g: -u * u / four_s + i * (kk * (x[a] - center[a]) - hbar * kk * kk * t / (two * m)),
                            g1: -u * two / four_s + i * kk,
                            g2: -c(two) / four_s,
                        }
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    fn analytic_jet(&self, spec: &PilotSpec<T>, t: T, x: &Point<T>) -> Jet<T> {
        if let Some(axes) = self.log_axes(spec, t, x) {
            let factors: Vec<Jet1<T>> = axes
                .iter()
                .map(|ax| Jet1::exp_of(ax.pref, ax.g, ax.g1, ax.g2))
                .collect();
            return Jet::product(&factors);
        }
        let hbar = self.hbar;
        let m = self.mass;
        let dims = self.dims;
        match spec {
            PilotSpec::EigenstateSuperposition { omega, terms } => {
                let alpha = (m * *omega / hbar).sqrt();
                let sa = alpha.sqrt();
                let mut total = Jet::zero();
                for term in terms {
                    let axes: Vec<Jet1<T>> = (0..dims)
                        .map(|a| {
                            let n = term.n[a];
                            let (h, h1, h2) = hermite::hermite_jet(n, alpha * x[a]);
                            let ph = cis(-*omega * (T::count(n) + T::lit(0.5)) * t);
                            Jet1 {
                                value: ph * (sa * h),
                                d1: ph * (sa * alpha * h1),
                                d2: ph * (sa * alpha * alpha * h2),
                            }
                        })
                        .collect();
                    total = total.add(&Jet::product(&axes).scale(term.coefficient));
                }
                total
            }
            _ => unreachable!("product families and numeric specs are handled above"),
        }
    }
}

struct LogAxis<T> {
    pref: Complex<T>,
    g: Complex<T>,
    g1: Complex<T>,
    g2: Complex<T>,
}

/// Free-function form of [`PilotWave::evaluate`].
pub fn evaluate<T: Real>(pilot: &PilotWave<T>, t: T, x: &Point<T>) -> Result<Complex<T>> {
    pilot.evaluate(t, x)
}

/// Free-function form of [`PilotWave::phase_data`].
pub fn phase_data<T: Real>(pilot: &PilotWave<T>, t: T, x: &Point<T>) -> Result<PhaseData<T>> {
    pilot.phase_data(t, x)
}

/// Free-function form of [`PilotWave::guidance_velocity`].
pub fn guidance_velocity<T: Real>(pilot: &PilotWave<T>, t: T, x: &Point<T>) -> Result<Point<T>> {
    pilot.guidance_velocity(t, x)
}
