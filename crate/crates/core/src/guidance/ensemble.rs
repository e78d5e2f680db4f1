use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Integrator;
use crate::error::{Error, Result};
use crate::pilot::PilotWave;
use crate::scalar::{point_to_f64, Point, Real};

/// Additive smoothing applied to both densities in the H-function.
pub const H_SMOOTHING: f64 = 1e-12;

/// Default number of bins per axis when only the domain is given.
pub const DEFAULT_BINS_PER_AXIS: usize = 64;

/// Rectangular grid of equal cells on `[lo, hi)` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Bins<T> {
    dims: usize,
    lo: Point<T>,
    width: Point<T>,
    cells: [usize; 3],
}

impl<T: Real> Bins<T> {
    /// `cells[a]` equal cells on `[lo[a], hi[a])`.
    pub fn new(lo: &[T], hi: &[T], cells: &[usize]) -> Result<Self> {
        let dims = lo.len();
        if !(1..=3).contains(&dims) || hi.len() != dims || cells.len() != dims {
            return Err(Error::InvalidParameter(format!(
                "bins need matching lo, hi and cells with 1 to 3 axes, got {}, {}, {}",
                lo.len(),
                hi.len(),
                cells.len()
            )));
        }
        let mut b = Self {
            dims,
            lo: [T::zero(); 3],
            width: [T::one(); 3],
            cells: [1; 3],
        };
        for a in 0..dims {
            if !(hi[a] > lo[a]) || !lo[a].is_finite() || !hi[a].is_finite() || cells[a] == 0 {
                return Err(Error::InvalidParameter(format!(
                    "axis {a}: need lo < hi and at least one cell"
                )));
            }
            b.lo[a] = lo[a];
            b.cells[a] = cells[a];
            b.width[a] = (hi[a] - lo[a]) / T::count(cells[a]);
        }
        Ok(b)
    }

    /// Cells of side close to `width`: the count per axis is
    /// `round((hi - lo) / width)`, and the side is adjusted to fit exactly.
    pub fn with_width(lo: &[T], hi: &[T], width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "bin width must be positive, got {width}"
            )));
        }
        let cells: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| ((*h - *l) / width).round().to_usize().unwrap_or(0).max(1))
            .collect();
        Self::new(lo, hi, &cells)
    }

    /// [`DEFAULT_BINS_PER_AXIS`] cells per axis.
    pub fn default_for(lo: &[T], hi: &[T]) -> Result<Self> {
        Self::new(lo, hi, &vec![DEFAULT_BINS_PER_AXIS; lo.len()])
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.cells[..self.dims].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> T {
        self.width[..self.dims].iter().fold(T::one(), |p, w| p * *w)
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dims]
    }

    pub fn lo(&self) -> &[T] {
        &self.lo[..self.dims]
    }

    pub fn width(&self) -> &[T] {
        &self.width[..self.dims]
    }

    fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut ix = [0; 3];
        for a in (0..self.dims).rev() {
            ix[a] = flat % self.cells[a];
            flat /= self.cells[a];
        }
        ix
    }

    /// Flat index of the cell containing `x`, if any.
    pub fn locate(&self, x: &Point<T>) -> Option<usize> {
        let mut flat = 0;
        for a in 0..self.dims {
            let s = ((x[a] - self.lo[a]) / self.width[a]).floor();
            if !(s >= T::zero()) {
                return None;
            }
            let j = s.to_usize()?;
            if j >= self.cells[a] {
                return None;
            }
            flat = flat * self.cells[a] + j;
        }
        Some(flat)
    }

    /// Lower corner of cell `flat`.
    pub fn corner(&self, flat: usize) -> Point<T> {
        let ix = self.multi_index(flat);
        let mut p = [T::zero(); 3];
        for a in 0..self.dims {
            p[a] = self.lo[a] + self.width[a] * T::count(ix[a]);
        }
        p
    }

    /// Mean of `f` over every cell by three-point Gauss-Legendre per axis.
    pub fn cell_averages(&self, f: impl Fn(&Point<T>) -> Result<T>) -> Result<Vec<T>> {
        let r = T::lit(0.6).sqrt() / T::lit(2.0);
        let nodes = [T::lit(0.5) - r, T::lit(0.5), T::lit(0.5) + r];
        let weights = [T::lit(5.0 / 18.0), T::lit(8.0 / 18.0), T::lit(5.0 / 18.0)];
        let q = 3usize.pow(self.dims as u32);
        (0..self.len())
            .map(|cell| {
                let c = self.corner(cell);
                let mut acc = T::zero();
                for k in 0..q {
                    let mut p = [T::zero(); 3];
                    let mut w = T::one();
                    let mut rest = k;
                    for a in 0..self.dims {
                        let j = rest % 3;
                        rest /= 3;
                        p[a] = c[a] + self.width[a] * nodes[j];
                        w = w * weights[j];
                    }
                    acc = acc + w * f(&p)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

/// Distribution of the initial positions of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub enum Sampling<T> {
    /// `|psi_L(t0)|^2`, tabulated as cell averages on `cells` equal cells
    /// of `[lo, hi)` and sampled uniformly inside the chosen cell.
    Born { lo: Vec<T>, hi: Vec<T>, cells: Vec<usize> },
    /// Uniform on the box `[lo, hi)`.
    Uniform { lo: Vec<T>, hi: Vec<T> },
    /// Piecewise-constant density with one non-negative weight per cell,
    /// in row-major order.
    Histogram {
        lo: Vec<T>,
        hi: Vec<T>,
        cells: Vec<usize>,
        weights: Vec<T>,
    },
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn uniform_in<T: Real>(rng: &mut ChaCha8Rng, lo: &Point<T>, width: &Point<T>, dims: usize) -> Point<T> {
    let mut p = [T::zero(); 3];
    for a in 0..dims {
        p[a] = lo[a] + width[a] * T::lit(rng.random::<f64>());
    }
    p
}

fn sample_histogram<T: Real>(bins: &Bins<T>, weights: &[T], n: usize, seed: u64) -> Result<Vec<Point<T>>> {
    if weights.len() != bins.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} cells",
            weights.len(),
            bins.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidParameter(
            "histogram weights must be finite and non-negative".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = T::zero();
    for w in weights {
        acc = acc + *w;
        cdf.push(acc);
    }
    if !(acc > T::zero()) {
        return Err(Error::InvalidParameter("histogram has zero total weight".into()));
    }
    let width = {
        let mut w = [T::zero(); 3];
        w[..bins.dims].copy_from_slice(bins.width());
        w
    };
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let target = T::lit(rng.random::<f64>()) * acc;
            let cell = cdf.partition_point(|c| *c <= target).min(cdf.len() - 1);
            uniform_in(&mut rng, &bins.corner(cell), &width, bins.dims)
        })
        .collect())
}

/// Initial positions of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T> {
    pub positions: Vec<Point<T>>,
    pub sampling: Sampling<T>,
    pub time: T,
    pub seed: u64,
}

impl<T: Real> Ensemble<T> {
    /// Draws `n` positions. Sample `i` uses its own ChaCha8 stream derived
    /// from `seed`, so the result does not depend on thread scheduling.
    pub fn sample(pilot: &PilotWave<T>, sampling: Sampling<T>, n: usize, t0: T, seed: u64) -> Result<Self> {
        let positions = match &sampling {
            Sampling::Born { lo, hi, cells } => {
                let bins = Bins::new(lo, hi, cells)?;
                check_dims(&bins, pilot)?;
                let w = bins.cell_averages(|x| Ok(pilot.evaluate(t0, x)?.norm_sqr()))?;
                sample_histogram(&bins, &w, n, seed)?
            }
            Sampling::Uniform { lo, hi } => {
                let bins = Bins::new(lo, hi, &vec![1; lo.len()])?;
                check_dims(&bins, pilot)?;
                sample_histogram(&bins, &[T::one()], n, seed)?
            }
            Sampling::Histogram { lo, hi, cells, weights } => {
                let bins = Bins::new(lo, hi, cells)?;
                check_dims(&bins, pilot)?;
                sample_histogram(&bins, weights, n, seed)?
            }
        };
        Ok(Self {
            positions,
            sampling,
            time: t0,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn check_dims<T: Real>(bins: &Bins<T>, pilot: &PilotWave<T>) -> Result<()> {
    if bins.dims() == pilot.dims() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sampling box has {} axes, pilot has {}",
            bins.dims(),
            pilot.dims()
        )))
    }
}

/// Ensemble positions at the requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun<T> {
    pub times: Vec<T>,
    /// `positions[k][i]`: particle `i` at `times[k]`.
    pub positions: Vec<Vec<Point<T>>>,
}

/// Transports every member along its guidance trajectory, in parallel, and
/// records positions at `times` (increasing, not before the ensemble time).
pub fn evolve_ensemble<T: Real>(
    ensemble: &Ensemble<T>,
    pilot: &PilotWave<T>,
    times: &[T],
    dt: T,
) -> Result<EnsembleRun<T>> {
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.first().is_some_and(|t| *t < ensemble.time) {
        return Err(Error::InvalidParameter(
            "output times must be increasing and not before the ensemble time".into(),
        ));
    }
    let integ = Integrator::new(|t: T, x: &[Point<T>]| Ok(vec![pilot.guidance_velocity(t, &x[0])?]));
    let per_particle: Vec<Vec<Point<T>>> = ensemble
        .positions
        .par_iter()
        .map(|x0| {
            let mut x = *x0;
            let mut t = ensemble.time;
            let mut out = Vec::with_capacity(times.len());
            for &tk in times {
                if tk > t {
                    x = integ.run(vec![x], t, tk, dt, |_, _, _| {})?[0];
                    t = tk;
                }
                out.push(x);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let positions = (0..times.len())
        .map(|k| per_particle.iter().map(|p| p[k]).collect())
        .collect();
    Ok(EnsembleRun {
        times: times.to_vec(),
        positions,
    })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and the continuous distribution function `cdf`.
pub fn ks_statistic<T: Real>(samples: &[T], cdf: impl Fn(T) -> T) -> T {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::count(s.len());
    s.iter().enumerate().fold(T::zero(), |d, (i, x)| {
        let f = cdf(*x);
        let above = T::count(i + 1) / n - f;
        let below = f - T::count(i) / n;
        d.max(above).max(below)
    })
}

/// Asymptotic one-sample KS critical value `1.63 / sqrt(n)` at the 1% level.
pub fn ks_critical_value(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Piecewise-linear distribution function of a marginal density.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCdf<T> {
    edges: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> MarginalCdf<T> {
    pub fn eval(&self, x: T) -> T {
        let n = self.edges.len();
        if x <= self.edges[0] {
            return T::zero();
        }
        if x >= self.edges[n - 1] {
            return T::one();
        }
        let j = self.edges.partition_point(|e| *e <= x) - 1;
        let s = (x - self.edges[j]) / (self.edges[j + 1] - self.edges[j]);
        self.cumulative[j] + s * (self.cumulative[j + 1] - self.cumulative[j])
    }
}

/// Marginal distribution of `|psi_L(t)|^2` along `axis`, from cell averages
/// on `bins`, normalised over the bins.
pub fn born_marginal_cdf<T: Real>(pilot: &PilotWave<T>, t: T, bins: &Bins<T>, axis: usize) -> Result<MarginalCdf<T>> {
    check_dims(bins, pilot)?;
    if axis >= bins.dims() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    let avg = bins.cell_averages(|x| Ok(pilot.evaluate(t, x)?.norm_sqr()))?;
    let n = bins.cells()[axis];
    let mut marginal = vec![T::zero(); n];
    for (cell, w) in avg.iter().enumerate() {
        let j = bins.multi_index(cell)[axis];
        marginal[j] = marginal[j] + *w;
    }
    let total = marginal.iter().fold(T::zero(), |s, w| s + *w);
    let mut cumulative = vec![T::zero(); n + 1];
    for j in 0..n {
        cumulative[j + 1] = cumulative[j] + marginal[j] / total;
    }
    let edges = (0..=n)
        .map(|j| bins.lo()[axis] + bins.width()[axis] * T::count(j))
        .collect();
    Ok(MarginalCdf { edges, cumulative })
}

/// Coarse-grained H-function `sum_bins rho ln(rho / |psi|^2) dV` of the
/// positions against `|psi_L(t)|^2`.
///
/// `rho` is the ensemble histogram density and `|psi|^2` the cell average
/// of the pilot density, renormalised to unit mass over the bins. Both get
/// [`H_SMOOTHING`] added, so empty cells contribute nothing. Every position
/// must lie inside the bins.
pub fn relaxation_h<T: Real>(positions: &[Point<T>], pilot: &PilotWave<T>, t: T, bins: &Bins<T>) -> Result<T> {
    check_dims(bins, pilot)?;
    if positions.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let mut counts = vec![0usize; bins.len()];
    for x in positions {
        let cell = bins.locate(x).ok_or_else(|| Error::SupportNotCovered {
            position: point_to_f64(x),
        })?;
        counts[cell] += 1;
    }
    let vol = bins.cell_volume();
    let born = bins.cell_averages(|x| Ok(pilot.evaluate(t, x)?.norm_sqr()))?;
    let mass = born.iter().fold(T::zero(), |s, p| s + *p) * vol;
    if !(mass > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let eps = T::lit(H_SMOOTHING);
    let n = T::count(positions.len());
    Ok(counts.iter().zip(&born).fold(T::zero(), |h, (c, p)| {
        let rho = T::count(*c) / (n * vol) + eps;
        let psi = *p / mass + eps;
        h + rho * (rho / psi).ln() * vol
    }))
}
