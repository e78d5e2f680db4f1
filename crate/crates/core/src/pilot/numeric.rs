use num_complex::Complex;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scalar::{point_to_f64, Point, Real};
use crate::spectral::{ComplexField, Grid, LinearPotential, LinearPropagator, Spectral};

use super::jet::Jet;

struct Frame<T> {
    values: Vec<Complex<T>>,
    grad: Vec<Vec<Complex<T>>>,
    lap: Vec<Complex<T>>,
    max_abs: T,
    rms_width: T,
}

/// Pilot wave stored as snapshots of a split-step run.
///
/// Values, gradients and Laplacians are precomputed spectrally on every
/// snapshot and interpolated with cubic Lagrange stencils in each spatial
/// axis (periodic wrap) and in time.
pub struct NumericPilot<T: Real> {
    grid: Grid<T>,
    t0: T,
    dt: T,
    frames: Vec<Frame<T>>,
}

impl<T: Real> std::fmt::Debug for NumericPilot<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumericPilot")
            .field("grid", &self.grid)
            .field("t0", &self.t0)
            .field("dt", &self.dt)
            .field("frames", &self.frames.len())
            .finish()
    }
}

/// Weights of the cubic Lagrange polynomial through nodes 0, 1, 2, 3.
fn lagrange4<T: Real>(u: T) -> [T; 4] {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    [
        -(u - one) * (u - two) * (u - three) / six,
        u * (u - two) * (u - three) / two,
        -u * (u - one) * (u - three) / two,
        u * (u - one) * (u - two) / six,
    ]
}

impl<T: Real> NumericPilot<T> {
    /// Propagates `initial` from `t0` to at least `t_end`, storing a frame
    /// every `snapshot_dt` (rounded so that frames land on `t_end`), with
    /// `substeps` split-step steps between frames.
    pub fn generate(
        initial: ComplexField<T>,
        potential: &LinearPotential<T>,
        constants: &PhysicalConstants<T>,
        t0: T,
        t_end: T,
        snapshot_dt: T,
        substeps: usize,
    ) -> Result<Self> {
        if !(t_end > t0) || !(snapshot_dt > T::zero()) || substeps == 0 {
            return Err(Error::InvalidParameter(
                "numeric pilot needs t_end > t0, snapshot_dt > 0, substeps >= 1".into(),
            ));
        }
        if initial.norm_sqr() <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        let intervals = ((t_end - t0) / snapshot_dt).ceil().as_f64().max(3.0) as usize;
        let dt = (t_end - t0) / T::count(intervals);
        let grid = initial.grid().clone();
        let spectral = Spectral::new(&grid);
        let prop = LinearPropagator::new(spectral.clone(), dt / T::count(substeps), constants)?;
        let mass = constants.mass;
        let v = |_: T, x: &Point<T>| potential.value(x, mass);

        let mut field = initial;
        let mut frames = Vec::with_capacity(intervals + 1);
        frames.push(Self::frame(&spectral, &field)?);
        for f in 0..intervals {
            let t = t0 + T::count(f) * dt;
            prop.run(&mut field, t, substeps, &v)?;
            frames.push(Self::frame(&spectral, &field)?);
        }
        Ok(Self { grid, t0, dt, frames })
    }

    fn frame(spectral: &Spectral<T>, field: &ComplexField<T>) -> Result<Frame<T>> {
        let (grad, lap) = spectral.gradient_and_laplacian(field.values());
        let var = field.position_variance()?;
        Ok(Frame {
            values: field.values().to_vec(),
            grad,
            lap,
            max_abs: field.max_abs(),
            rms_width: (var / T::count(field.grid().dims())).sqrt(),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn t_start(&self) -> T {
        self.t0
    }

    pub fn t_end(&self) -> T {
        self.t0 + self.dt * T::count(self.frames.len() - 1)
    }

    fn nearest(&self, t: T) -> &Frame<T> {
        let s = ((t - self.t0) / self.dt).round().as_f64();
        let i = s.clamp(0.0, (self.frames.len() - 1) as f64) as usize;
        &self.frames[i]
    }

    pub(crate) fn max_abs(&self, t: T) -> T {
        self.nearest(t).max_abs
    }

    pub(crate) fn rms_width(&self, t: T) -> T {
        self.nearest(t).rms_width
    }

    /// The stored frame closest to `t`, as a field.
    pub fn snapshot(&self, t: T) -> ComplexField<T> {
        ComplexField::from_parts_unchecked(self.grid.clone(), self.nearest(t).values.clone())
    }

    pub(crate) fn jet(&self, t: T, x: &Point<T>) -> Result<Jet<T>> {
        let tol = self.dt * T::lit(1e-9);
        if t < self.t0 - tol || t > self.t_end() + tol || !self.grid.contains(x) {
            return Err(Error::OutsideNumericDomain {
                time: t.as_f64(),
                position: point_to_f64(x),
            });
        }
        let dims = self.grid.dims();
        let n_frames = self.frames.len();
        let s = ((t - self.t0) / self.dt).as_f64();
        let base_t = (s.floor() as isize - 1).clamp(0, n_frames as isize - 4) as usize;
        let wt = lagrange4(T::lit(s - base_t as f64));

        // Per-axis stencil indices and weights.
        let mut idx = [[0usize; 4]; 3];
        let mut w = [[T::zero(); 4]; 3];
        let spacing = self.grid.spacing();
        let lengths = self.grid.lengths();
        let points = self.grid.points();
        for a in 0..3 {
            if a >= dims {
                w[a] = [T::one(), T::zero(), T::zero(), T::zero()];
                continue;
            }
            let s = ((x[a] + lengths[a] * T::lit(0.5)) / spacing[a]).as_f64();
            let base = s.floor() as isize - 1;
            w[a] = lagrange4(T::lit(s - base as f64));
            for (m, slot) in idx[a].iter_mut().enumerate() {
                *slot = (base + m as isize).rem_euclid(points[a] as isize) as usize;
            }
        }
        let span = |a: usize| if a < dims { 4 } else { 1 };

        let mut out = Jet::zero();
        for (ft, &wtf) in wt.iter().enumerate() {
            let frame = &self.frames[base_t + ft];
            for i in 0..span(0) {
                for j in 0..span(1) {
                    for k in 0..span(2) {
                        let weight = wtf * w[0][i] * w[1][j] * w[2][k];
                        let node = self.grid.ravel([idx[0][i], idx[1][j], idx[2][k]]);
                        let wc = Complex::new(weight, T::zero());
                        out.value = out.value + frame.values[node] * wc;
                        for (a, g) in frame.grad.iter().enumerate() {
                            out.grad[a] = out.grad[a] + g[node] * wc;
                        }
                        out.lap = out.lap + frame.lap[node] * wc;
                    }
                }
            }
        }
        Ok(out)
    }
}
