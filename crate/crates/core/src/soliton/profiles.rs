//! Initial soliton shapes. Widths are the rms width of `|phi|^2` per axis.

use num_complex::Complex;

use crate::scalar::{cis, Point, Real};
use crate::spectral::{ComplexField, Grid};

fn product<T: Real>(grid: &Grid<T>, f: impl Fn(T) -> T, center: &Point<T>) -> ComplexField<T> {
    let dims = grid.dims();
    ComplexField::from_fn(grid.clone(), |x| {
        let v = (0..dims).fold(T::one(), |p, a| p * f(x[a] - center[a]));
        Complex::new(v, T::zero())
    })
}

/// `exp(-|x - c|^2 / (4 w^2))`, unit peak.
pub fn gaussian<T: Real>(grid: &Grid<T>, center: &Point<T>, rms_width: T) -> ComplexField<T> {
    let k = T::one() / (T::lit(4.0) * rms_width * rms_width);
    product(grid, |u| (-k * u * u).exp(), center)
}

/// Product of `sech(u / a)` with `a` chosen so that `|phi|^2` has the given
/// rms width (`var = pi^2 a^2 / 12`).
pub fn sech<T: Real>(grid: &Grid<T>, center: &Point<T>, rms_width: T) -> ComplexField<T> {
    let a = rms_width * T::lit(12.0).sqrt() / T::PI();
    product(grid, |u| T::one() / (u / a).cosh(), center)
}

/// Compactly supported `(1 + cos(pi u / h)) / 2` for `|u| < h`, else 0.
pub fn raised_cosine<T: Real>(grid: &Grid<T>, center: &Point<T>, half_width: T) -> ComplexField<T> {
    product(
        grid,
        |u| {
            if u.abs() < half_width {
                (T::one() + (T::PI() * u / half_width).cos()) / T::lit(2.0)
            } else {
                T::zero()
            }
        },
        center,
    )
}

/// Multiplies by `exp(i q . x)`.
pub fn with_momentum<T: Real>(field: &ComplexField<T>, q: &Point<T>) -> ComplexField<T> {
    let grid = field.grid().clone();
    let mut out = field.clone();
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        let x = grid.node(i);
        *v = *v * cis(q[0] * x[0] + q[1] * x[1] + q[2] * x[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn widths_are_rms_widths() {
        let g = make_grid::<f64>(1, &[1024], &[20.0]).unwrap();
        let c = [0.7, 0.0, 0.0];
        for f in [gaussian(&g, &c, 0.4), sech(&g, &c, 0.4)] {
            let x0 = f.expectation_position().unwrap()[0];
            assert!((x0 - 0.7).abs() < 1e-12);
            assert!((f.position_variance().unwrap().sqrt() - 0.4).abs() < 1e-10);
        }
        let r = raised_cosine(&g, &c, 1.0);
        assert_eq!(r.values()[g.len() - 1].re, 0.0);
        assert!((r.max_abs() - 1.0).abs() < 1e-3);
    }
}
