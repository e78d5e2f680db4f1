//! Guidance trajectories, configuration-space guidance for a few identical
//! or distinguishable particles, ensembles and relaxation diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pilot::PilotWave;
use crate::scalar::{norm3, point_to_f64, Point, Real};

mod ensemble;
mod many_body;

pub use ensemble::{
    born_marginal_cdf, evolve_ensemble, ks_critical_value, ks_statistic, relaxation_h, Bins, Ensemble, EnsembleRun,
    MarginalCdf, Sampling,
};
pub use many_body::{ManyBodyPilot, Symmetry};

#[cfg(test)]
mod tests;

/// A stage speed above this multiple of the typical speed triggers step
/// halving.
pub const SPIKE_FACTOR: f64 = 1e3;

/// Relative agreement between one step and two half steps at which a
/// refined step is accepted.
pub const HALVING_TOLERANCE: f64 = 1e-8;

/// Maximum number of successive halvings of one nominal step.
pub const MAX_HALVINGS: u32 = 12;

/// Time-stamped positions and velocities of one particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub id: usize,
    pub times: Vec<T>,
    pub positions: Vec<Point<T>>,
    pub velocities: Vec<Point<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_position(&self) -> Option<Point<T>> {
        self.positions.last().copied()
    }
}

/// Fixed-step RK4 for `N` particles with recursive halving of a step whose
/// stages hit a node or a speed spike.
pub(crate) struct Integrator<T, F> {
    field: F,
    _scalar: std::marker::PhantomData<T>,
}

fn axpy<T: Real>(x: &[Point<T>], k: &[Point<T>], h: T) -> Vec<Point<T>> {
    x.iter()
        .zip(k)
        .map(|(p, v)| [p[0] + v[0] * h, p[1] + v[1] * h, p[2] + v[2] * h])
        .collect()
}

fn max_speed<T: Real>(v: &[Point<T>]) -> T {
    v.iter().fold(T::zero(), |m, p| m.max(norm3(p)))
}

impl<T, F> Integrator<T, F>
where
    T: Real,
    F: Fn(T, &[Point<T>]) -> Result<Vec<Point<T>>>,
{
    pub(crate) fn new(field: F) -> Self {
        Self {
            field,
            _scalar: std::marker::PhantomData,
        }
    }

    pub(crate) fn velocity(&self, t: T, x: &[Point<T>]) -> Result<Vec<Point<T>>> {
        (self.field)(t, x)
    }

    fn spiked(&self, v: &[Point<T>], typical: T) -> bool {
        typical > T::zero() && max_speed(v) > T::lit(SPIKE_FACTOR) * typical
    }

    /// One RK4 step from `(t, x)` with first stage `k1`. Returns `None` when
    /// a stage fails or the result is not finite; the flag reports a speed
    /// spike in any stage.
    fn try_step(&self, t: T, x: &[Point<T>], k1: &[Point<T>], h: T, typical: T) -> Option<(Vec<Point<T>>, bool)> {
        let half = h / T::lit(2.0);
        let k2 = self.velocity(t + half, &axpy(x, k1, half)).ok()?;
        let k3 = self.velocity(t + half, &axpy(x, &k2, half)).ok()?;
        let k4 = self.velocity(t + h, &axpy(x, &k3, h)).ok()?;
        let spiked = [k1, &k2, &k3, &k4].iter().any(|k| self.spiked(k, typical));
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let out: Vec<Point<T>> = (0..x.len())
            .map(|i| {
                let mut p = x[i];
                for a in 0..3 {
                    p[a] = p[a] + sixth * (k1[i][a] + two * k2[i][a] + two * k3[i][a] + k4[i][a]);
                }
                p
            })
            .collect();
        out.iter()
            .all(|p| p.iter().all(|c| c.is_finite()))
            .then_some((out, spiked))
    }

    /// Two half steps, or `None` if either fails.
    fn two_halves(&self, t: T, x: &[Point<T>], k1: &[Point<T>], h: T, typical: T) -> Option<Vec<Point<T>>> {
        let half = h / T::lit(2.0);
        let (mid, _) = self.try_step(t, x, k1, half, typical)?;
        let k1_mid = self.velocity(t + half, &mid).ok()?;
        Some(self.try_step(t + half, &mid, &k1_mid, half, typical)?.0)
    }

    /// Advances by `h`. A step that fails or spikes is compared with two
    /// half steps and accepted once they agree to [`HALVING_TOLERANCE`];
    /// otherwise each half is refined in turn, at most [`MAX_HALVINGS`]
    /// levels deep, where a spiking step is accepted as is.
    fn advance(&self, t: T, x: &[Point<T>], k1: &[Point<T>], h: T, typical: T, depth: u32) -> Result<Vec<Point<T>>> {
        let full = self.try_step(t, x, k1, h, typical);
        if let Some((next, false)) = &full {
            return Ok(next.clone());
        }
        if depth >= MAX_HALVINGS {
            // A spike alone is a heuristic; only a failed evaluation aborts.
            if let Some((next, true)) = full {
                return Ok(next);
            }
            return Err(Error::TrajectoryAborted {
                time: t.as_f64(),
                position: point_to_f64(&x[0]),
                reason: format!(
                    "step still fails after {MAX_HALVINGS} halvings; positions {:?}",
                    x.iter().map(point_to_f64).collect::<Vec<_>>()
                ),
            });
        }
        if let (Some((coarse, _)), Some(fine)) = (&full, self.two_halves(t, x, k1, h, typical)) {
            let diff = max_speed(&axpy(&fine, coarse, -T::one()));
            let moved = max_speed(&axpy(&fine, x, -T::one()));
            if diff <= T::lit(HALVING_TOLERANCE) * (moved + h * typical) {
                return Ok(fine);
            }
        }
        let half = h / T::lit(2.0);
        let mid = self.advance(t, x, k1, half, typical, depth + 1)?;
        let k1_mid = self.velocity(t + half, &mid).map_err(|e| abort(t + half, &mid, e))?;
        self.advance(t + half, &mid, &k1_mid, half, typical, depth + 1)
    }

    /// Integrates from `t0` to `t1` with steps of at most `dt`, calling
    /// `observe(t, x, v)` at the start and after every nominal step.
    pub(crate) fn run(
        &self,
        x0: Vec<Point<T>>,
        t0: T,
        t1: T,
        dt: T,
        mut observe: impl FnMut(T, &[Point<T>], &[Point<T>]),
    ) -> Result<Vec<Point<T>>> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(t1 >= t0) {
            return Err(Error::InvalidParameter(format!("t1 = {t1} precedes t0 = {t0}")));
        }
        let n = ((t1 - t0) / dt).ceil().to_usize().unwrap_or(0);
        let h = if n > 0 { (t1 - t0) / T::count(n) } else { T::zero() };
        let mut x = x0;
        let mut v = self.velocity(t0, &x)?;
        observe(t0, &x, &v);
        let mut speed_sum = max_speed(&v);
        for step in 0..n {
            let t = t0 + h * T::count(step);
            let typical = speed_sum / T::count(step + 1);
            x = self.advance(t, &x, &v, h, typical, 0)?;
            let t_next = if step + 1 == n { t1 } else { t + h };
            v = self.velocity(t_next, &x).map_err(|e| abort(t_next, &x, e))?;
            speed_sum = speed_sum + max_speed(&v);
            observe(t_next, &x, &v);
        }
        Ok(x)
    }
}

fn abort<T: Real>(t: T, x: &[Point<T>], e: Error) -> Error {
    Error::TrajectoryAborted {
        time: t.as_f64(),
        position: point_to_f64(&x[0]),
        reason: e.to_string(),
    }
}

/// Integrates `dx/dt = (hbar/m) grad(phi_L)(t, x)` from `x0` at `t0` to `t1`
/// with RK4 steps of at most `dt`, recording every step.
///
/// A step whose stages meet a node, or a speed above [`SPIKE_FACTOR`] times
/// the running mean speed, is refined by step halving. The run aborts
/// with `TrajectoryAborted` once a step has been halved [`MAX_HALVINGS`]
/// times; the error carries the last good state.
pub fn integrate_trajectory<T: Real>(
    pilot: &PilotWave<T>,
    x0: &Point<T>,
    t0: T,
    t1: T,
    dt: T,
) -> Result<Trajectory<T>> {
    let integ = Integrator::new(|t: T, x: &[Point<T>]| Ok(vec![pilot.guidance_velocity(t, &x[0])?]));
    let mut traj = Trajectory {
        id: 0,
        times: Vec::new(),
        positions: Vec::new(),
        velocities: Vec::new(),
    };
    integ.run(vec![*x0], t0, t1, dt, |t, x, v| {
        traj.times.push(t);
        traj.positions.push(x[0]);
        traj.velocities.push(v[0]);
    })?;
    Ok(traj)
}

/// Integrates all particles of a many-body pilot together in configuration
/// space. Returns one trajectory per particle, sharing time stamps.
pub fn integrate_configuration<T: Real>(
    pilot: &ManyBodyPilot<T>,
    x0: &[Point<T>],
    t0: T,
    t1: T,
    dt: T,
) -> Result<Vec<Trajectory<T>>> {
    if x0.len() != pilot.particles() {
        return Err(Error::InvalidParameter(format!(
            "{} initial positions for {} particles",
            x0.len(),
            pilot.particles()
        )));
    }
    let integ = Integrator::new(|t: T, x: &[Point<T>]| pilot.velocities(t, x));
    let mut out: Vec<Trajectory<T>> = (0..x0.len())
        .map(|id| Trajectory {
            id,
            times: Vec::new(),
            positions: Vec::new(),
            velocities: Vec::new(),
        })
        .collect();
    integ.run(x0.to_vec(), t0, t1, dt, |t, x, v| {
        for (i, tr) in out.iter_mut().enumerate() {
            tr.times.push(t);
            tr.positions.push(x[i]);
            tr.velocities.push(v[i]);
        }
    })?;
    Ok(out)
}
