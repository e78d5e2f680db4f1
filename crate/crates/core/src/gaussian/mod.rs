//! Reduced dynamics for Gaussian solitons.
//!
//! Along each axis the soliton is `exp(-A x^2 / 2 + B x + C)` with complex
//! coefficients. For pilots whose phase gradient does not depend on
//! position (plane waves and coherent states), the self-potential of this
//! family is exactly quadratic and the nonlinear equation closes on the
//! coefficients. The system evolved here is
//!
//! ```text
//! i dA/dt = (hbar/m) A^2 - (hbar/m) (Re A)^2
//! i dB/dt = (hbar/m) A B + V1/hbar + i (hbar/m) A g
//! i dC/dt = (hbar/2m)(A - B^2) + V0/hbar - i (hbar/m) B g
//! ```
//!
//! with `g` the pilot phase gradient, `V1 = -(hbar^2/m) Re A Re B` and
//! `V0 = (hbar^2/2m)((Re B)^2 - Re A)` the Taylor coefficients of the
//! self-potential `(hbar^2/2m) lap|phi|/|phi|`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pilot::PilotWave;
use crate::scalar::{Point, Real};
use crate::spectral::{ComplexField, Grid};


/// Half-width of the region, in rms widths of `|phi|^2`, that a sampling
/// grid must contain.
pub const COVERAGE_WIDTHS: f64 = 6.0;

/// Coefficients of one axis of the Gaussian soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisParams<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
}

impl<T: Real> AxisParams<T> {
    /// Real soliton with curvature `a0`, centred at `x0` with unit peak.
    pub fn real(a0: T, x0: T) -> Self {
        let re = |v: T| Complex::new(v, T::zero());
        Self {
            a: re(a0),
            b: re(a0 * x0),
            c: re(-a0 * x0 * x0 / T::lit(2.0)),
        }
    }

    /// Barycentre `Re B / Re A`.
    pub fn barycentre(&self) -> T {
        self.b.re / self.a.re
    }

    /// Rms width of `|phi|^2` along this axis.
    pub fn rms_width(&self) -> T {
        (T::lit(2.0) * self.a.re).sqrt().recip()
    }

    fn axpy(&self, d: &Self, h: T) -> Self {
        let h = Complex::new(h, T::zero());
        Self {
            a: self.a + d.a * h,
            b: self.b + d.b * h,
            c: self.c + d.c * h,
        }
    }

    fn is_finite(&self) -> bool {
        [self.a, self.b, self.c]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Gaussian soliton parameters at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSolitonParams<T> {
    pub axes: Vec<AxisParams<T>>,
    pub time: T,
}

impl<T: Real> GaussianSolitonParams<T> {
    /// Real soliton with per-axis curvature `a0` centred at `x0`.
    pub fn real(a0: &[T], x0: &[T], time: T) -> Result<Self> {
        if a0.len() != x0.len() {
            return Err(Error::InvalidParameter(format!(
                "a0 has {} axes but x0 has {}",
                a0.len(),
                x0.len()
            )));
        }
        let p = Self {
            axes: a0.iter().zip(x0).map(|(&a, &x)| AxisParams::real(a, x)).collect(),
            time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Checks the axis count, `Re A > 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.axes.len()) {
            return Err(Error::InvalidParameter(format!(
                "need 1 to 3 axes, got {}",
                self.axes.len()
            )));
        }
        for (i, ax) in self.axes.iter().enumerate() {
            if !ax.is_finite() || !self.time.is_finite() {
                return Err(Error::InvalidParameter(format!("axis {i} is not finite")));
            }
            if !(ax.a.re > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "axis {i}: Re A must be positive, got {}",
                    ax.a.re
                )));
            }
        }
        Ok(())
    }

    pub fn barycentre(&self) -> Point<T> {
        let mut p = [T::zero(); 3];
        for (dst, ax) in p.iter_mut().zip(&self.axes) {
            *dst = ax.barycentre();
        }
        p
    }

    /// Self-potential Taylor coefficients `(V0, V1, V2)` of one axis, for
    /// `V(x) = V0 + V1 x + V2 x^2 / 2`.
    pub fn taylor_coefficients(&self, axis: usize, hbar: T, mass: T) -> (T, T, T) {
        let ax = &self.axes[axis];
        let (ra, rb) = (ax.a.re, ax.b.re);
        let k = hbar * hbar / mass;
        (k / T::lit(2.0) * (rb * rb - ra), -k * ra * rb, k * ra * ra)
    }
}

/// Time derivatives of the coefficients of every axis at time `t`.
///
/// Fails with `UnsupportedPilot` unless the pilot's phase gradient is
/// uniform in space.
pub fn ode_rhs<T: Real>(params: &GaussianSolitonParams<T>, pilot: &PilotWave<T>, t: T) -> Result<Vec<AxisParams<T>>> {
    if !pilot.has_uniform_phase_gradient() {
        return Err(Error::UnsupportedPilot(
            "the Gaussian reduction needs a plane-wave or coherent-state pilot".into(),
        ));
    }
    if pilot.dims() != params.dims() {
        return Err(Error::InvalidParameter(format!(
            "pilot has {} axes, soliton has {}",
            pilot.dims(),
            params.dims()
        )));
    }
    let (hbar, m) = (pilot.hbar(), pilot.mass());
    let hm = hbar / m;
    // The gradient is uniform, so any point works; the barycentre keeps the
    // evaluation where the pilot is largest for coherent states.
    let g = pilot.phase_data_unchecked(t, &params.barycentre())?.grad_phase;
    let i = Complex::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let out = params
        .axes
        .iter()
        .enumerate()
        .map(|(k, ax)| {
            let (v0, v1, _) = params.taylor_coefficients(k, hbar, m);
            let (a, b) = (ax.a, ax.b);
            let ra = Complex::new(a.re, T::zero());
            let gk = g[k];
            let ia = (a * a - ra * ra) * hm;
            let ib = a * b * hm + v1 / hbar + i * a * (hm * gk);
            let ic = (a - b * b) * (hm * half) + v0 / hbar - i * b * (hm * gk);
            AxisParams {
                a: -i * ia,
                b: -i * ib,
                c: -i * ic,
            }
        })
        .collect();
    Ok(out)
}

/// Parameter history from [`integrate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamHistory<T> {
    /// One entry per step, starting with the initial parameters.
    pub samples: Vec<GaussianSolitonParams<T>>,
    /// Largest `|A(t) - A(0)|` over time and axes. For real initial `A`
    /// the exact value is zero.
    pub max_a_drift: T,
    /// Largest `|Im B(t) - Im B(0)|`; zero for real initial `A` and `B`.
    pub max_im_b_drift: T,
}

/// Integrates the coefficient system with classical RK4 up to `t_final`.
///
/// The step is `(t_final - t0) / ceil((t_final - t0) / dt)`, so it never
/// exceeds `dt`. Harmonic pilots need `dt <= period / 200`.
pub fn integrate_params<T: Real>(
    params0: &GaussianSolitonParams<T>,
    pilot: &PilotWave<T>,
    t_final: T,
    dt: T,
) -> Result<ParamHistory<T>> {
    params0.validate()?;
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if let Some(omega) = pilot.omega() {
        let limit = T::lit(2.0) * T::PI() / omega.abs() / T::lit(200.0);
        if dt > limit {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt} exceeds period / 200 = {limit}"
            )));
        }
    }
    let span = t_final - params0.time;
    if !(span >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "t_final = {t_final} precedes t0 = {}",
            params0.time
        )));
    }
    let n = (span / dt).ceil().to_usize().unwrap_or(0);
    let h = if n > 0 { span / T::count(n) } else { T::zero() };
    let half = h / T::lit(2.0);

    let a0: Vec<Complex<T>> = params0.axes.iter().map(|ax| ax.a).collect();
    let ib0: Vec<T> = params0.axes.iter().map(|ax| ax.b.im).collect();
    let mut history = ParamHistory {
        samples: Vec::with_capacity(n + 1),
        max_a_drift: T::zero(),
        max_im_b_drift: T::zero(),
    };
    history.samples.push(params0.clone());
    let mut p = params0.clone();
    let shifted = |p: &GaussianSolitonParams<T>, d: &[AxisParams<T>], s: T, t: T| GaussianSolitonParams {
        axes: p.axes.iter().zip(d).map(|(ax, dx)| ax.axpy(dx, s)).collect(),
        time: t,
    };
    for step in 0..n {
        let t = params0.time + h * T::count(step);
        let k1 = ode_rhs(&p, pilot, t)?;
        let k2 = ode_rhs(&shifted(&p, &k1, half, t + half), pilot, t + half)?;
        let k3 = ode_rhs(&shifted(&p, &k2, half, t + half), pilot, t + half)?;
        let k4 = ode_rhs(&shifted(&p, &k3, h, t + h), pilot, t + h)?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let axes: Vec<AxisParams<T>> = p
            .axes
            .iter()
            .enumerate()
            .map(|(k, ax)| {
                let incr = AxisParams {
                    a: k1[k].a + k2[k].a * two + k3[k].a * two + k4[k].a,
                    b: k1[k].b + k2[k].b * two + k3[k].b * two + k4[k].b,
                    c: k1[k].c + k2[k].c * two + k3[k].c * two + k4[k].c,
                };
                ax.axpy(&incr, sixth)
            })
            .collect();
        // The last step lands on t_final exactly.
        let time = if step + 1 == n {
            t_final
        } else {
            params0.time + h * T::count(step + 1)
        };
        let next = GaussianSolitonParams { axes, time };
        if next.axes.iter().any(|ax| !ax.is_finite()) {
            return Err(Error::NonFinite {
                step: step + 1,
                time: time.as_f64(),
            });
        }
        for (k, ax) in next.axes.iter().enumerate() {
            history.max_a_drift = history.max_a_drift.max((ax.a - a0[k]).norm());
            history.max_im_b_drift = history.max_im_b_drift.max((ax.b.im - ib0[k]).abs());
        }
        history.samples.push(next.clone());
        p = next;
    }
    Ok(history)
}

/// Samples the product over axes of `exp(-A x^2 / 2 + B x + C)` on `grid`.
///
/// The grid must contain the barycentre plus or minus
/// [`COVERAGE_WIDTHS`] rms widths on every axis.
pub fn params_to_field<T: Real>(params: &GaussianSolitonParams<T>, grid: &Grid<T>) -> Result<ComplexField<T>> {
    params.validate()?;
    if grid.dims() != params.dims() {
        return Err(Error::GridMismatch);
    }
    let lengths = grid.lengths();
    let spacing = grid.spacing();
    for (k, ax) in params.axes.iter().enumerate() {
        let lo = -lengths[k] / T::lit(2.0);
        let hi = lo + lengths[k] - spacing[k];
        let (x0, w) = (ax.barycentre(), ax.rms_width() * T::lit(COVERAGE_WIDTHS));
        if x0 - w < lo || x0 + w > hi {
            return Err(Error::GridCoverage(format!(
                "axis {k}: [{}, {}] is not inside [{lo}, {hi}]",
                x0 - w,
                x0 + w
            )));
        }
    }
    // Completing the square keeps the exponent free of the cancellation
    // between -A x^2 / 2 and C when the centre is far from the origin.
    let two = Complex::new(T::lit(2.0), T::zero());
    let forms: Vec<(Complex<T>, Complex<T>, Complex<T>)> = params
        .axes
        .iter()
        .map(|ax| {
            let centre = ax.b / ax.a;
            (ax.a, centre, ax.c + ax.b * ax.b / (ax.a * two))
        })
        .collect();
    Ok(ComplexField::from_fn(grid.clone(), |x| {
        let exponent = forms
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |s, (k, (a, c, d))| {
                let dx = Complex::new(x[k], T::zero()) - c;
                s - a * dx * dx / two + d
            });
        exponent.exp()
    }))
}
