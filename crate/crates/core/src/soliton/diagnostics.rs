use num_complex::Complex;

use crate::error::{Error, Result};
use crate::pilot::PilotWave;
use crate::scalar::{norm3, Point, Real};
use crate::spectral::{ComplexField, Grid, Spectral};

use super::{SolitonSample, SolitonState};

/// Barycentre velocity split into guidance and internal parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDecomposition<T> {
    /// Midpoint of the last step, where all three terms are evaluated.
    pub time: T,
    pub v_drift: Point<T>,
    pub v_dbb: Point<T>,
    pub v_int: Point<T>,
    /// `|v_drift - v_dbb - v_int|`.
    pub residual: T,
}

/// Decomposes the barycentre velocity over the most recent step.
///
/// `v_drift` is the barycentre difference quotient, which is a second-order
/// estimate of the velocity at the step midpoint. `v_dbb` is therefore taken
/// at the midpoint time and position, and `v_int` as the mean of its values
/// at the two ends of the step.
pub fn drift_decomposition<T: Real>(state: &SolitonState<T>) -> Result<DriftDecomposition<T>> {
    let rec = state
        .last_step()
        .ok_or(Error::InsufficientHistory { needed: 2, got: 1 })?;
    let dt = state.time() - rec.t_prev;
    let x1 = state.barycentre()?;
    let v_now = state.v_internal()?;
    let half = T::lit(0.5);
    let mut v_drift = [T::zero(); 3];
    let mut x_mid = [T::zero(); 3];
    let mut v_int = [T::zero(); 3];
    for a in 0..3 {
        v_drift[a] = (x1[a] - rec.x0_prev[a]) / dt;
        x_mid[a] = (x1[a] + rec.x0_prev[a]) * half;
        v_int[a] = (v_now[a] + rec.v_int_prev[a]) * half;
    }
    let t_mid = rec.t_prev + dt * half;
    let v_dbb = state.pilot().guidance_velocity(t_mid, &x_mid)?;
    let r = [
        v_drift[0] - v_dbb[0] - v_int[0],
        v_drift[1] - v_dbb[1] - v_int[1],
        v_drift[2] - v_dbb[2] - v_int[2],
    ];
    Ok(DriftDecomposition {
        time: t_mid,
        v_drift,
        v_dbb,
        v_int,
        residual: norm3(&r),
    })
}

/// Comparison of a soliton norm history with the peaked-soliton laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport<T> {
    /// `max |dN/dt - rhs| / max |rhs|` over interior samples, where `rhs` is
    /// `(hbar/m) lap(phi_L)(x0) N - 2 (grad R_L/R_L)(x0) . N v_int`. When
    /// `rhs` vanishes identically this is `max |dN/dt| / N(0)` instead.
    pub max_rate_deviation: T,
    /// `max |N(t)/N(0) / (R_L^2(x0(0), 0) / R_L^2(x0(t), t)) - 1|`.
    pub max_ratio_deviation: T,
    /// `max |N(t)/N(0) - 1|`.
    pub max_norm_drift: T,
}

pub fn norm_evolution_check<T: Real>(history: &[SolitonSample<T>], pilot: &PilotWave<T>) -> Result<NormReport<T>> {
    if history.len() < 3 {
        return Err(Error::InsufficientHistory {
            needed: 3,
            got: history.len(),
        });
    }
    let hm = pilot.hbar() / pilot.mass();
    let first = &history[0];
    let n0 = first.norm;
    let r0 = pilot.evaluate(first.t, &first.x0)?.norm();

    let mut ratio_dev = T::zero();
    let mut drift = T::zero();
    for s in history {
        let r = pilot.evaluate(s.t, &s.x0)?.norm();
        let predicted = (r0 * r0) / (r * r);
        let observed = s.norm / n0;
        ratio_dev = ratio_dev.max((observed / predicted - T::one()).abs());
        drift = drift.max((observed - T::one()).abs());
    }

    let mut max_dev = T::zero();
    let mut max_rhs = T::zero();
    let mut max_rate = T::zero();
    for w in history.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let rate = (c.norm - a.norm) / (c.t - a.t);
        let pd = pilot.phase_data(b.t, &b.x0)?;
        let coupling = (0..3).fold(T::zero(), |s, k| s + pd.grad_log_amplitude[k] * b.v_int[k]);
        let rhs = hm * pd.laplacian_phase * b.norm - T::lit(2.0) * coupling * b.norm;
        max_dev = max_dev.max((rate - rhs).abs());
        max_rhs = max_rhs.max(rhs.abs());
        max_rate = max_rate.max(rate.abs());
    }
    let max_rate_deviation = if max_rhs > T::zero() {
        max_dev / max_rhs
    } else {
        max_rate / n0
    };
    Ok(NormReport {
        max_rate_deviation,
        max_ratio_deviation: ratio_dev,
        max_norm_drift: drift,
    })
}

fn nearest_node<T: Real>(grid: &Grid<T>, x: &Point<T>) -> usize {
    let mut ix = [0usize; 3];
    let (p, l, h) = (grid.points(), grid.lengths(), grid.spacing());
    for a in 0..grid.dims() {
        let j = ((x[a] + l[a] * T::lit(0.5)) / h[a]).round().as_f64() as isize;
        ix[a] = j.rem_euclid(p[a] as isize) as usize;
    }
    grid.ravel(ix)
}

/// Relative L2 distance between `field` and `reference` translated by
/// `shift`, after rescaling `field` to the reference norm and aligning the
/// phases at the node nearest the barycentre of `field`.
pub fn shape_error<T: Real>(field: &ComplexField<T>, reference: &ComplexField<T>, shift: &Point<T>) -> Result<T> {
    if field.grid() != reference.grid() {
        return Err(Error::GridMismatch);
    }
    let mut moved = reference.clone();
    Spectral::new(reference.grid()).translate(moved.values_mut(), shift);
    let nf = field.l2_norm();
    let nr = reference.l2_norm();
    if !(nf > T::zero()) || !(nr > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let k = nearest_node(field.grid(), &field.expectation_position()?);
    let (zf, zr) = (field.values()[k], moved.values()[k]);
    let align = if zf.norm() > T::zero() && zr.norm() > T::zero() {
        (zr / zf) / (zr / zf).norm()
    } else {
        let o = field.overlap(&moved)?;
        if o.norm() > T::zero() {
            o / o.norm()
        } else {
            Complex::new(T::one(), T::zero())
        }
    };
    let aligned = field.scaled(align * Complex::new(nr / nf, T::zero()));
    Ok(aligned.l2_distance(&moved)? / nr)
}
