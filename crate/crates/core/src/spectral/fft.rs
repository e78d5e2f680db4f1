use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{cis, Point, Real};

use super::{ComplexField, Grid};

/// Planned multi-dimensional FFTs and wavenumber tables for one grid.
///
/// Plans are shared behind `Arc`, so cloning is cheap and clones can be
/// moved to other threads.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
    k: Vec<Vec<T>>,
    /// `k` with the Nyquist entry zeroed, for odd-order derivatives.
    k_odd: Vec<Vec<T>>,
    k_sq: Vec<T>,
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let dims = grid.dims();
        let points = grid.points();
        let mut forward = Vec::with_capacity(dims);
        let mut inverse = Vec::with_capacity(dims);
        let mut k = Vec::with_capacity(dims);
        let mut k_odd = Vec::with_capacity(dims);
        for a in 0..dims {
            forward.push(planner.plan_fft_forward(points[a]));
            inverse.push(planner.plan_fft_inverse(points[a]));
            let ka = grid.wavenumbers(a);
            let mut ko = ka.clone();
            ko[points[a] / 2] = T::zero();
            k.push(ka);
            k_odd.push(ko);
        }
        let k_sq = (0..grid.len())
            .map(|i| {
                let ix = grid.unravel(i);
                (0..dims).fold(T::zero(), |s, a| s + k[a][ix[a]] * k[a][ix[a]])
            })
            .collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
            k,
            k_odd,
            k_sq,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// `|k|^2` per node in FFT order.
    pub fn k_squared(&self) -> &[T] {
        &self.k_sq
    }

    fn transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        let points = self.grid.points();
        let total = data.len();
        for (a, plan) in plans.iter().enumerate() {
            let n = points[a];
            let stride: usize = points[a + 1..].iter().product();
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let mut line = vec![Complex::new(T::zero(), T::zero()); n];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform in place, including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let s = T::one() / T::count(data.len());
        for v in data.iter_mut() {
            *v = *v * s;
        }
    }

    /// Spectrum of `values`.
    pub fn spectrum(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut s = values.to_vec();
        self.forward(&mut s);
        s
    }

    /// Inverse-transforms `spectrum` after multiplying by `factor(node index)`.
    fn apply(&self, spectrum: &[Complex<T>], factor: impl Fn(usize) -> Complex<T>) -> Vec<Complex<T>> {
        let mut out: Vec<Complex<T>> = spectrum.iter().enumerate().map(|(i, z)| *z * factor(i)).collect();
        self.inverse(&mut out);
        out
    }

    pub fn laplacian_from_spectrum(&self, spectrum: &[Complex<T>]) -> Vec<Complex<T>> {
        self.apply(spectrum, |i| Complex::new(-self.k_sq[i], T::zero()))
    }

    /// Derivative along `axis`.
    pub fn derivative_from_spectrum(&self, spectrum: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        self.apply(spectrum, |i| {
            let ix = self.grid.unravel(i);
            Complex::new(T::zero(), self.k_odd[axis][ix[axis]])
        })
    }

    pub fn laplacian(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        self.laplacian_from_spectrum(&self.spectrum(values))
    }

    /// Gradient components for each active axis.
    pub fn gradient(&self, values: &[Complex<T>]) -> Vec<Vec<Complex<T>>> {
        let s = self.spectrum(values);
        (0..self.grid.dims())
            .map(|a| self.derivative_from_spectrum(&s, a))
            .collect()
    }

    /// Gradient and Laplacian from a single forward transform.
    pub fn gradient_and_laplacian(&self, values: &[Complex<T>]) -> (Vec<Vec<Complex<T>>>, Vec<Complex<T>>) {
        let s = self.spectrum(values);
        let grad = (0..self.grid.dims())
            .map(|a| self.derivative_from_spectrum(&s, a))
            .collect();
        (grad, self.laplacian_from_spectrum(&s))
    }

    /// Translates the periodic band-limited interpolant of `values` by
    /// `displacement`: `f(x) -> f(x - d)`.
    pub fn translate(&self, values: &mut [Complex<T>], displacement: &Point<T>) {
        self.forward(values);
        let dims = self.grid.dims();
        let points = self.grid.points();
        for (i, v) in values.iter_mut().enumerate() {
            let ix = self.grid.unravel(i);
            let mut factor = Complex::new(T::one(), T::zero());
            for a in 0..dims {
                let kd = self.k[a][ix[a]] * displacement[a];
                // The Nyquist mode is its own alias; keep real data real.
                factor = factor
                    * if ix[a] == points[a] / 2 {
                        Complex::new(kd.cos(), T::zero())
                    } else {
                        cis(-kd)
                    };
            }
            *v = *v * factor;
        }
        self.inverse(values);
    }

    /// Largest `|k|^2` inside the box `|k_a| <= cutoff * k_nyquist_a`.
    pub fn band_edge_k_squared(&self, cutoff: T) -> T {
        let points = self.grid.points();
        (0..self.grid.dims()).fold(T::zero(), |s, a| {
            let k = self.k[a][points[a] / 2].abs() * cutoff;
            s + k * k
        })
    }

    /// Applies the exponential filter `exp(-36 eta^order)` per axis, with
    /// `eta = |k| / (cutoff k_max)`. For `order >= 36`, modes below half the
    /// cutoff change by less than one ulp and modes above it are removed.
    pub fn filter_exponential(&self, values: &mut [Complex<T>], order: i32, cutoff: T) {
        self.forward(values);
        let dims = self.grid.dims();
        let points = self.grid.points();
        let alpha = T::lit(36.0);
        let k_max: Vec<T> = (0..dims).map(|a| self.k[a][points[a] / 2].abs() * cutoff).collect();
        for (i, v) in values.iter_mut().enumerate() {
            let ix = self.grid.unravel(i);
            let mut sigma = T::one();
            for a in 0..dims {
                if k_max[a] > T::zero() {
                    let eta = self.k[a][ix[a]].abs() / k_max[a];
                    sigma = sigma * (-alpha * eta.powi(order)).exp();
                }
            }
            *v = *v * sigma;
        }
        self.inverse(values);
    }
}

/// `Delta f` by Fourier multiplication with `-|k|^2` (periodic boundaries).
pub fn spectral_laplacian<T: Real>(f: &ComplexField<T>) -> ComplexField<T> {
    let sp = Spectral::new(f.grid());
    ComplexField::from_parts_unchecked(f.grid().clone(), sp.laplacian(f.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use approx::assert_relative_eq;

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let g = make_grid(1, &[128], &[10.0]).unwrap();
        let k = 2.0 * std::f64::consts::PI / 10.0 * 7.0;
        let f = ComplexField::from_fn(g, |x| cis(k * x[0]));
        let lap = spectral_laplacian(&f);
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((*a + *b * (k * k)).norm() < 1e-11);
        }
    }

    #[test]
    fn constant_has_zero_laplacian() {
        let g = make_grid(2, &[16, 32], &[3.0, 5.0]).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex::new(2.5, -1.0));
        assert!(spectral_laplacian(&f).max_abs() < 1e-13);
    }

    #[test]
    fn gaussian_matches_fourth_order_differences() {
        // Oracle: fourth-order central differences of the analytic Gaussian
        // with a step fine enough that truncation error stays below 1e-9.
        let g = make_grid(1, &[512], &[40.0]).unwrap();
        let h = 1e-2;
        let gauss = |x: f64| (-x * x / 2.0).exp();
        let f = ComplexField::from_fn(g.clone(), |x| Complex::new(gauss(x[0]), 0.0));
        let lap = spectral_laplacian(&f);
        let fd = |x: f64| {
            (-gauss(x - 2.0 * h) + 16.0 * gauss(x - h) - 30.0 * gauss(x) + 16.0 * gauss(x + h) - gauss(x + 2.0 * h))
                / (12.0 * h * h)
        };
        let scale = (2..510).map(|j| fd(g.coord(0, j)).abs()).fold(0.0, f64::max);
        for j in 2..510 {
            let sp = lap.values()[j];
            let oracle = fd(g.coord(0, j));
            assert!((sp.re - oracle).abs() < 1e-6 * scale, "node {j}: {} vs {oracle}", sp.re);
            assert!(sp.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_mixed_plane_wave_in_2d() {
        let g = make_grid(2, &[32, 64], &[4.0, 8.0]).unwrap();
        let (kx, ky) = (
            2.0 * std::f64::consts::PI / 4.0 * 3.0,
            2.0 * std::f64::consts::PI / 8.0 * -5.0,
        );
        let f = ComplexField::from_fn(g.clone(), |x| cis(kx * x[0] + ky * x[1]));
        let sp = Spectral::new(&g);
        let grad = sp.gradient(f.values());
        for (i, v) in f.values().iter().enumerate() {
            assert!((grad[0][i] - *v * Complex::new(0.0, kx)).norm() < 1e-11);
            assert!((grad[1][i] - *v * Complex::new(0.0, ky)).norm() < 1e-11);
        }
    }

    #[test]
    fn translation_moves_the_barycentre() {
        let g = make_grid(1, &[256], &[20.0]).unwrap();
        let mut f = ComplexField::from_fn(g.clone(), |x: &Point<f64>| Complex::new((-x[0] * x[0]).exp(), 0.0));
        let sp = Spectral::new(&g);
        sp.translate(f.values_mut(), &[1.2345, 0.0, 0.0]);
        let c = f.expectation_position().unwrap();
        assert_relative_eq!(c[0], 1.2345, epsilon = 1e-12);
        let exact = ComplexField::from_fn(g, |x| Complex::new((-(x[0] - 1.2345f64).powi(2)).exp(), 0.0));
        assert!(f.l2_distance(&exact).unwrap() < 1e-12);
    }
}
