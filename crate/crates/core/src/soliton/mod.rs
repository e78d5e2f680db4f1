//! Soliton field `phi_NL` guided by a linear pilot wave.
//!
//! With `psi = psi_L phi` and `v = (hbar/m) grad(phi_L)`, the soliton obeys
//!
//! ```text
//! d phi/dt = (i hbar/2m) (lap phi - (lap|phi|/|phi|) phi)
//!          - v . grad phi
//!          + (i hbar/m) (grad R_L/R_L) . (grad phi - (grad|phi|/|phi|) phi)
//! ```
//!
//! which is pure advection for a real positive `phi`. Each step is a Strang
//! splitting: the uniform part `u(t) = v(t, x_ref)` of the advection is an
//! exact spectral translation, and the remainder (residual advection plus
//! the amplitude-coupling terms) is integrated with classical RK4.

mod diagnostics;
mod potential;
pub mod profiles;

use num_complex::Complex;

use crate::error::{Error, Result, Warning};
use crate::pilot::{PhaseData, PilotWave};
use crate::scalar::{Point, Real};
use crate::spectral::{ComplexField, Spectral, EDGE_AMPLITUDE_THRESHOLD};

pub use diagnostics::{drift_decomposition, norm_evolution_check, shape_error, DriftDecomposition, NormReport};
pub use potential::{nonlinear_potential, quantum_potentials, NonlinearPotential, QuantumPotentials, AMP_FLOOR};

/// Relative amplitude `a_c` of the taper on the terms that divide by
/// `|phi|`: they are weighted by `a^2 / (a^2 + a_c^2)`. Far below `a_c` the
/// soliton phase is FFT roundoff, and the pressure-free phase dynamics would
/// focus that noise explosively; a hard cutoff instead leaves a jump that
/// the spectral translation spreads over the grid. The weight is smooth in
/// `|phi|^2` and differs from one by less than `1e-4` where
/// `|phi| > 100 a_c`.
pub const TAPER_AMPLITUDE: f64 = 1e-5;

/// Order of the exponential filter applied to each step's increment.
pub const FILTER_ORDER: i32 = 36;

/// Filter cutoff as a fraction of the Nyquist wavenumber. The quotient
/// terms are not polynomial in `phi`, so each increment carries aliased
/// modes; keeping it inside two thirds of the band removes them.
pub const FILTER_CUTOFF: f64 = 2.0 / 3.0;

/// Bound on `k_c v h` for each RK4 sub-step of the residual flow, where
/// `k_c` is the filter cutoff and `v` the fastest transport speed the flow
/// sees: the soliton's own velocity field relative to its mean and, for
/// pilots with curved phase, the pilot velocity relative to the barycentre
/// guidance. Written through the current, the phase-to-amplitude coupling
/// is nilpotent and adds no stiffness of its own.
pub const B_STABILITY: f64 = 1.5;

/// `width_ratio` above which an `ApproximationBreach` warning is recorded.
pub const BREACH_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepRecord<T> {
    pub t_prev: T,
    pub x0_prev: Point<T>,
    pub v_int_prev: Point<T>,
}

/// Soliton field together with its pilot and the running diagnostics.
#[derive(Debug, Clone)]
pub struct SolitonState<T: Real> {
    phi: ComplexField<T>,
    time: T,
    pilot: PilotWave<T>,
    last_step: Option<StepRecord<T>>,
    width_ratio: T,
    max_width_ratio: T,
    warnings: Vec<Warning>,
}

impl<T: Real> SolitonState<T> {
    pub fn new(phi: ComplexField<T>, time: T, pilot: PilotWave<T>) -> Result<Self> {
        if phi.grid().dims() != pilot.dims() {
            return Err(Error::GridMismatch);
        }
        if !(phi.norm_sqr() > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        let mut s = Self {
            phi,
            time,
            pilot,
            last_step: None,
            width_ratio: T::zero(),
            max_width_ratio: T::zero(),
            warnings: Vec::new(),
        };
        s.update_width_ratio()?;
        Ok(s)
    }

    pub fn field(&self) -> &ComplexField<T> {
        &self.phi
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn pilot(&self) -> &PilotWave<T> {
        &self.pilot
    }

    pub fn hbar(&self) -> T {
        self.pilot.hbar()
    }

    pub fn mass(&self) -> T {
        self.pilot.mass()
    }

    /// `<phi|phi>`.
    pub fn norm_sqr(&self) -> T {
        self.phi.norm_sqr()
    }

    pub fn barycentre(&self) -> Result<Point<T>> {
        self.phi.expectation_position()
    }

    /// rms width of `|phi|^2` per axis.
    pub fn width(&self) -> Result<T> {
        Ok((self.phi.position_variance()? / T::count(self.phi.grid().dims())).sqrt())
    }

    /// `(hbar/m) Im<phi|grad phi> / <phi|phi>`.
    pub fn v_internal(&self) -> Result<Point<T>> {
        v_internal(&self.phi, self.hbar() / self.mass())
    }

    pub fn width_ratio(&self) -> T {
        self.width_ratio
    }

    pub fn max_width_ratio(&self) -> T {
        self.max_width_ratio
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub(crate) fn last_step(&self) -> Option<&StepRecord<T>> {
        self.last_step.as_ref()
    }

    /// Soliton size against the pilot's variation scale:
    /// `width |lap phi_L| / |grad phi_L|` at the barycentre, or
    /// `width / pilot rms width` where the phase gradient vanishes.
    pub fn compute_width_ratio(&self) -> Result<T> {
        let x0 = self.barycentre()?;
        let w = self.width()?;
        let pd = self.pilot.phase_data_unchecked(self.time, &x0)?;
        let g = (0..3)
            .fold(T::zero(), |s, a| s + pd.grad_phase[a] * pd.grad_phase[a])
            .sqrt();
        if g * w > T::lit(1e-12) {
            Ok(w * pd.laplacian_phase.abs() / g)
        } else {
            Ok(self.pilot.rms_width(self.time).map_or(T::zero(), |s| w / s))
        }
    }

    fn update_width_ratio(&mut self) -> Result<()> {
        let r = self.compute_width_ratio()?;
        self.width_ratio = r;
        if r > self.max_width_ratio {
            self.max_width_ratio = r;
        }
        if r > T::lit(BREACH_THRESHOLD) {
            let max = self.max_width_ratio.as_f64();
            let existing = self.warnings.iter_mut().find_map(|w| match w {
                Warning::ApproximationBreach { max_width_ratio, .. } => Some(max_width_ratio),
                _ => None,
            });
            match existing {
                Some(m) => *m = max,
                None => {
                    log::warn!("soliton width ratio {r} exceeds {BREACH_THRESHOLD}");
                    self.warnings.push(Warning::ApproximationBreach {
                        first_time: self.time.as_f64(),
                        max_width_ratio: max,
                    });
                }
            }
        }
        Ok(())
    }

    fn note_edge_mass(&mut self) {
        let edge = self.phi.edge_amplitude();
        if edge > T::lit(EDGE_AMPLITUDE_THRESHOLD)
            && !self.warnings.iter().any(|w| matches!(w, Warning::EdgeMass { .. }))
        {
            log::warn!("soliton boundary amplitude {edge:e} at t = {}", self.time);
            self.warnings.push(Warning::EdgeMass {
                time: self.time.as_f64(),
                relative_amplitude: edge.as_f64(),
            });
        }
    }
}

pub(crate) fn v_internal<T: Real>(phi: &ComplexField<T>, hbar_over_m: T) -> Result<Point<T>> {
    let sp = Spectral::new(phi.grid());
    let grad = sp.gradient(phi.values());
    let n = phi.norm_sqr();
    if !(n > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let dv = phi.grid().cell_volume();
    let mut out = [T::zero(); 3];
    for (a, g) in grad.iter().enumerate() {
        let s = phi
            .values()
            .iter()
            .zip(g)
            .fold(T::zero(), |acc, (p, d)| acc + (p.conj() * d).im);
        out[a] = hbar_over_m * s * dv / n;
    }
    Ok(out)
}

/// Three-point Gauss-Legendre rule for `int_a^b u(s) ds`.
fn gauss3<T: Real>(a: T, b: T, mut u: impl FnMut(T) -> Result<Point<T>>) -> Result<Point<T>> {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let r = T::lit(0.6).sqrt() * half;
    let nodes = [
        (mid - r, T::lit(5.0 / 9.0)),
        (mid, T::lit(8.0 / 9.0)),
        (mid + r, T::lit(5.0 / 9.0)),
    ];
    let mut out = [T::zero(); 3];
    for (s, w) in nodes {
        let v = u(s)?;
        for a in 0..3 {
            out[a] = out[a] + w * half * v[a];
        }
    }
    Ok(out)
}

/// `hbar |kbar|^2 / 2m` for the mean internal velocity `vbar = hbar kbar / m`.
fn uniform_rotation<T: Real>(vbar: &Point<T>, m: T, hbar: T) -> T {
    m / (T::lit(2.0) * hbar) * (vbar[0] * vbar[0] + vbar[1] * vbar[1] + vbar[2] * vbar[2])
}

/// Reusable stepping machinery for one grid and pilot.
struct Stepper<T: Real> {
    spectral: Spectral<T>,
    nodes: Vec<Point<T>>,
    dims: usize,
}

impl<T: Real> Stepper<T> {
    fn new(state: &SolitonState<T>) -> Self {
        let grid = state.phi.grid();
        Self {
            spectral: Spectral::new(grid),
            nodes: grid.nodes(),
            dims: grid.dims(),
        }
    }

    /// Right-hand side of the non-translational part at time `s`.
    fn rhs(
        &self,
        pilot: &PilotWave<T>,
        s: T,
        phi: &[Complex<T>],
        u: &Point<T>,
        vbar: &Point<T>,
        cache: &mut [Option<PhaseData<T>>],
    ) -> Result<Vec<Complex<T>>> {
        let hbar = pilot.hbar();
        let m = pilot.mass();
        let uniform = pilot.has_uniform_phase_gradient();
        let (amp, masked) = potential::modulus_and_mask(phi, T::lit(AMP_FLOOR));
        let max = amp.iter().fold(T::zero(), |m, &a| if a > m { a } else { m });
        let ac2 = (T::lit(TAPER_AMPLITUDE) * max).powi(2);
        let (g_phi, l_phi) = self.spectral.gradient_and_laplacian(phi);
        let i_h2m = Complex::new(T::zero(), hbar / (T::lit(2.0) * m));
        let i_hm = Complex::new(T::zero(), hbar / m);
        // Uniform part of the soliton's own motion, carried by the
        // translation: phi = exp(i kbar.x) chi with kbar = (m/hbar) vbar.
        let kbar: Point<T> = [vbar[0] * m / hbar, vbar[1] * m / hbar, vbar[2] * m / hbar];
        let omega_bar = Complex::new(T::zero(), uniform_rotation(vbar, m, hbar));
        let mut out = vec![Complex::new(T::zero(), T::zero()); phi.len()];
        for i in 0..phi.len() {
            let pd = match cache[i] {
                Some(pd) => pd,
                None => match pilot.phase_data_unchecked(s, &self.nodes[i]) {
                    Ok(pd) => {
                        cache[i] = Some(pd);
                        pd
                    }
                    // The pilot underflows only far outside the soliton.
                    Err(_) if masked[i] => continue,
                    Err(e) => return Err(e),
                },
            };
            let mut val = Complex::new(T::zero(), T::zero());
            if !uniform {
                for a in 0..self.dims {
                    let vres = hbar / m * pd.grad_phase[a] - u[a];
                    val = val - g_phi[a][i] * vres;
                }
            }
            let k_dot_g = (0..self.dims).fold(T::zero(), |s, a| s + kbar[a] * pd.grad_log_amplitude[a]);
            let growth = Complex::new(-hbar / m * k_dot_g, T::zero());
            val = val + growth * phi[i];
            // The uniform rotation i*omega_bar*phi is applied exactly by the
            // caller, which keeps it out of the sub-step bound.
            let linear = omega_bar + growth;
            if !masked[i] {
                let q = phi[i] / amp[i];
                let a2 = amp[i] * amp[i];
                let weight = Complex::new(a2 / (a2 + ac2), T::zero());
                // Both quotient terms are written through the current
                // Im(phi* grad phi) and Im(phi* lap phi): differentiating
                // |phi| spectrally would ring wherever rounding noise flips
                // the sign of the far tail, and that ringing feeds back.
                let mut j = [T::zero(); 3];
                let mut j2 = T::zero();
                for a in 0..self.dims {
                    j[a] = (phi[i].conj() * g_phi[a][i]).im;
                    j2 = j2 + j[a] * j[a];
                }
                let div_j = (phi[i].conj() * l_phi[i]).im;
                let a = amp[i];
                let lap_quotient = q * Complex::new(-j2 / (a * a * a), div_j / a);
                let mut nl = i_h2m * lap_quotient - linear * phi[i];
                for ax in 0..self.dims {
                    let coupling = q * Complex::new(T::zero(), j[ax] / a);
                    nl = nl + i_hm * coupling * pd.grad_log_amplitude[ax] + g_phi[ax][i] * vbar[ax];
                }
                val = val + nl * weight;
            }
            out[i] = val;
        }
        Ok(out)
    }

    /// Largest transport speed of the residual flow at time `s`; the
    /// soliton's own part is weighted like the quotient terms.
    fn transport_speed(&self, pilot: &PilotWave<T>, s: T, phi: &[Complex<T>], u: &Point<T>, vbar: &Point<T>) -> T {
        let hm = pilot.hbar() / pilot.mass();
        let uniform = pilot.has_uniform_phase_gradient();
        let (amp, masked) = potential::modulus_and_mask(phi, T::lit(AMP_FLOOR));
        let max = amp.iter().fold(T::zero(), |m, &a| if a > m { a } else { m });
        let ac2 = (T::lit(TAPER_AMPLITUDE) * max).powi(2);
        let grad = self.spectral.gradient(phi);
        let mut top = T::zero();
        for i in 0..phi.len() {
            let mut carried = T::zero();
            if !uniform {
                if let Ok(pd) = pilot.phase_data_unchecked(s, &self.nodes[i]) {
                    for a in 0..self.dims {
                        let w = hm * pd.grad_phase[a] - u[a];
                        carried = carried + w * w;
                    }
                }
            }
            let mut own = T::zero();
            if !masked[i] {
                let a2 = amp[i] * amp[i];
                for a in 0..self.dims {
                    let v = hm * (phi[i].conj() * grad[a][i]).im / a2 - vbar[a];
                    own = own + v * v;
                }
                own = own.sqrt() * a2 / (a2 + ac2);
            }
            top = top.max(own + carried.sqrt());
        }
        top
    }

    fn step(&self, state: &mut SolitonState<T>, dt: T) -> Result<()> {
        let pilot = state.pilot.clone();
        let t = state.time;
        let x_ref = state.phi.expectation_position()?;
        let u = |s: T| pilot.guidance_velocity(s, &x_ref);
        let half = dt / T::lit(2.0);
        let vbar = v_internal(&state.phi, pilot.hbar() / pilot.mass())?;
        let shift = |d: Point<T>| [d[0] + vbar[0] * half, d[1] + vbar[1] * half, d[2] + vbar[2] * half];

        let d1 = shift(gauss3(t, t + half, u)?);
        self.spectral.translate(state.phi.values_mut(), &d1);

        let n = state.phi.values().len();
        let (m, hbar) = (pilot.mass(), pilot.hbar());
        let k_c = self.spectral.band_edge_k_squared(T::lit(FILTER_CUTOFF)).sqrt();
        let speed = self.transport_speed(&pilot, t, state.phi.values(), &u(t)?, &vbar);
        let subs = (k_c * speed * dt / T::lit(B_STABILITY))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let h = dt / T::count(subs);
        let hh = h / T::lit(2.0);
        let two = Complex::new(T::lit(2.0), T::zero());
        let sixth = Complex::new(h / T::lit(6.0), T::zero());
        let rot = crate::scalar::cis(uniform_rotation(&vbar, m, hbar) * h);
        for j in 0..subs {
            let s0 = t + h * T::count(j);
            let mut caches: [Vec<Option<PhaseData<T>>>; 3] = [vec![None; n], vec![None; n], vec![None; n]];
            let u0 = u(s0)?;
            let um = u(s0 + hh)?;
            let u1 = u(s0 + h)?;
            let y = state.phi.values().to_vec();
            let axpy = |k: &[Complex<T>], step: T| -> Vec<Complex<T>> {
                y.iter()
                    .zip(k)
                    .map(|(a, b)| *a + *b * Complex::new(step, T::zero()))
                    .collect()
            };
            let [c0, cm, c1] = &mut caches;
            let k1 = self.rhs(&pilot, s0, &y, &u0, &vbar, c0)?;
            let k2 = self.rhs(&pilot, s0 + hh, &axpy(&k1, hh), &um, &vbar, cm)?;
            let k3 = self.rhs(&pilot, s0 + hh, &axpy(&k2, hh), &um, &vbar, cm)?;
            let k4 = self.rhs(&pilot, s0 + h, &axpy(&k3, h), &u1, &vbar, c1)?;
            // Only the increment is filtered: the translated field keeps its
            // full spectrum, so a real positive soliton is never touched.
            let mut incr: Vec<Complex<T>> = (0..n)
                .map(|i| (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth)
                .collect();
            self.spectral
                .filter_exponential(&mut incr, FILTER_ORDER, T::lit(FILTER_CUTOFF));
            for (i, v) in state.phi.values_mut().iter_mut().enumerate() {
                *v = (y[i] + incr[i]) * rot;
            }
        }

        let d2 = shift(gauss3(t + half, t + dt, u)?);
        self.spectral.translate(state.phi.values_mut(), &d2);
        Ok(())
    }
}

/// Advances `state` by `n_steps` steps of size `dt`.
pub fn evolve_soliton<T: Real>(state: &SolitonState<T>, dt: T, n_steps: usize) -> Result<SolitonState<T>> {
    Ok(evolve_soliton_sampled(state, dt, n_steps, 0)?.0)
}

/// One row of a soliton time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSample<T> {
    pub t: T,
    pub x0: Point<T>,
    pub norm: T,
    pub v_int: Point<T>,
    pub drift: Option<DriftDecomposition<T>>,
    /// Deformation relative to the initial shape moved to the current
    /// barycentre (norm and global phase removed).
    pub shape_error: T,
    pub width_ratio: T,
}

/// Like [`evolve_soliton`], also returning a sample every `every` steps
/// (and at the start). `every = 0` disables sampling.
pub fn evolve_soliton_sampled<T: Real>(
    state: &SolitonState<T>,
    dt: T,
    n_steps: usize,
    every: usize,
) -> Result<(SolitonState<T>, Vec<SolitonSample<T>>)> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let stepper = Stepper::new(state);
    let mut s = state.clone();
    let initial = state.phi.clone();
    let x_init = state.barycentre()?;
    let mut samples = Vec::new();
    let sample = |s: &SolitonState<T>| -> Result<SolitonSample<T>> {
        let x0 = s.barycentre()?;
        let shift = [x0[0] - x_init[0], x0[1] - x_init[1], x0[2] - x_init[2]];
        Ok(SolitonSample {
            t: s.time,
            x0,
            norm: s.norm_sqr(),
            v_int: s.v_internal()?,
            drift: s.last_step.map(|_| drift_decomposition(s)).transpose()?,
            shape_error: shape_error(&s.phi, &initial, &shift)?,
            width_ratio: s.width_ratio,
        })
    };
    if every > 0 {
        samples.push(sample(&s)?);
    }
    for k in 0..n_steps {
        let t_prev = s.time;
        let x0_prev = s.barycentre()?;
        let v_int_prev = s.v_internal()?;
        stepper.step(&mut s, dt)?;
        s.time = t_prev + dt;
        if !s.phi.is_finite() {
            return Err(Error::NonFinite {
                step: k + 1,
                time: s.time.as_f64(),
            });
        }
        if !(s.phi.norm_sqr() > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        s.last_step = Some(StepRecord {
            t_prev,
            x0_prev,
            v_int_prev,
        });
        s.update_width_ratio()?;
        s.note_edge_mass();
        if every > 0 && (k + 1) % every == 0 {
            samples.push(sample(&s)?);
        }
    }
    Ok((s, samples))
}

#[cfg(test)]
mod tests;
