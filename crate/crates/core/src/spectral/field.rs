use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Point, Real};

use super::Grid;

/// Complex amplitude sampled on every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { step: 0, time: 0.0 });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(&Point<T>) -> Complex<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self { grid, values }
    }

    pub(crate) fn from_parts_unchecked(grid: Grid<T>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, z| if z.norm() > m { z.norm() } else { m })
    }

    /// `<f|f>` by Riemann quadrature (spectrally accurate for periodic,
    /// well-resolved fields).
    pub fn norm_sqr(&self) -> T {
        self.values.iter().fold(T::zero(), |s, z| s + z.norm_sqr()) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Returns a copy with unit L2 norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.l2_norm();
        if !(n > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex::new(T::one() / n, T::zero())))
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        Ok(s * self.grid.cell_volume())
    }

    /// `|| self - other ||_2`.
    pub fn l2_distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b).norm_sqr());
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// Barycentre `<x>` weighted by `|f|^2`.
    pub fn expectation_position(&self) -> Result<Point<T>> {
        let mut w = T::zero();
        let mut m = [T::zero(); 3];
        for (i, z) in self.values.iter().enumerate() {
            let p = z.norm_sqr();
            if p == T::zero() {
                continue;
            }
            let x = self.grid.node(i);
            w = w + p;
            for a in 0..self.grid.dims() {
                m[a] = m[a] + p * x[a];
            }
        }
        if !(w > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        Ok([m[0] / w, m[1] / w, m[2] / w])
    }

    /// Mean of `|x - <x>|^2` weighted by `|f|^2`, summed over axes.
    pub fn position_variance(&self) -> Result<T> {
        let c = self.expectation_position()?;
        let mut w = T::zero();
        let mut v = T::zero();
        for (i, z) in self.values.iter().enumerate() {
            let p = z.norm_sqr();
            let x = self.grid.node(i);
            let mut r2 = T::zero();
            for a in 0..self.grid.dims() {
                r2 = r2 + (x[a] - c[a]) * (x[a] - c[a]);
            }
            w = w + p;
            v = v + p * r2;
        }
        Ok(v / w)
    }

    /// Largest boundary amplitude relative to the field maximum.
    pub fn edge_amplitude(&self) -> T {
        let max = self.max_abs();
        if max == T::zero() {
            return T::zero();
        }
        let edge = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.is_edge(*i))
            .fold(T::zero(), |m, (_, z)| if z.norm() > m { z.norm() } else { m });
        edge / max
    }

    /// Index of the node with the largest modulus.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut val = T::neg_infinity();
        for (i, z) in self.values.iter().enumerate() {
            if z.norm() > val {
                val = z.norm();
                best = i;
            }
        }
        best
    }
}

/// `|f|_2`.
pub fn l2_norm<T: Real>(f: &ComplexField<T>) -> T {
    f.l2_norm()
}

/// `<f|g>`.
pub fn overlap<T: Real>(f: &ComplexField<T>, g: &ComplexField<T>) -> Result<Complex<T>> {
    f.overlap(g)
}

/// Barycentre weighted by `|f|^2`.
pub fn expectation_position<T: Real>(f: &ComplexField<T>) -> Result<Point<T>> {
    f.expectation_position()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn gaussian(grid: &Grid<f64>, sigma: f64, center: f64) -> ComplexField<f64> {
        ComplexField::from_fn(grid.clone(), |x| {
            Complex::new((-(x[0] - center).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn barycentre_of_shifted_gaussian() {
        let g = make_grid(1, &[512], &[40.0]).unwrap();
        let f = gaussian(&g, 1.0, 1.5).normalized().unwrap();
        let c = f.expectation_position().unwrap();
        assert!((c[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn self_overlap_is_norm_squared() {
        let g = make_grid(1, &[256], &[20.0]).unwrap();
        let f = ComplexField::from_fn(g, |x: &Point<f64>| {
            Complex::new((-x[0] * x[0]).exp(), 0.3 * (-x[0] * x[0] / 2.0).exp() * x[0])
        });
        let o = f.overlap(&f).unwrap();
        assert!((o.re - f.l2_norm().powi(2)).abs() < 1e-14);
        assert!(o.im.abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form_moments() {
        // exp(-(x-a)^2/(2 s^2)): integral of |f|^2 = s sqrt(pi), mean a,
        // variance s^2/2.
        let g = make_grid(1, &[512], &[40.0]).unwrap();
        let (s, a) = (1.0, 0.3);
        let f = gaussian(&g, s, a);
        let norm = f.norm_sqr();
        assert!((norm - s * std::f64::consts::PI.sqrt()).abs() < 1e-9);
        assert!((f.expectation_position().unwrap()[0] - a).abs() < 1e-9);
        assert!((f.position_variance().unwrap() - s * s / 2.0).abs() < 1e-9);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = ComplexField::<f64>::zeros(make_grid(1, &[16], &[1.0]).unwrap());
        let b = ComplexField::<f64>::zeros(make_grid(1, &[32], &[1.0]).unwrap());
        assert_eq!(a.overlap(&b), Err(Error::GridMismatch));
        assert_eq!(a.expectation_position(), Err(Error::ZeroNorm));
    }

    #[test]
    fn edge_amplitude_detects_boundary_mass() {
        let g = make_grid(1, &[64], &[10.0]).unwrap();
        let narrow = gaussian(&g, 0.5, 0.0);
        assert!(narrow.edge_amplitude() < 1e-12);
        let wide = gaussian(&g, 3.0, 0.0);
        assert!(wide.edge_amplitude() > 1e-3);
    }
}
