use num_complex::Complex;

use crate::scalar::Real;

/// Value, gradient and Laplacian of a complex field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: Complex<T>,
    pub grad: [Complex<T>; 3],
    pub lap: Complex<T>,
}

impl<T: Real> Jet<T> {
    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self {
            value: z,
            grad: [z; 3],
            lap: z,
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            value: self.value * s,
            grad: [self.grad[0] * s, self.grad[1] * s, self.grad[2] * s],
            lap: self.lap * s,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            value: self.value + o.value,
            grad: [
                self.grad[0] + o.grad[0],
                self.grad[1] + o.grad[1],
                self.grad[2] + o.grad[2],
            ],
            lap: self.lap + o.lap,
        }
    }

    /// Product of one-dimensional jets `(f, f', f'')`, one per axis.
    pub fn product(axes: &[Jet1<T>]) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let mut out = Self::zero();
        out.value = axes.iter().fold(one, |p, j| p * j.value);
        for (a, ja) in axes.iter().enumerate() {
            let others = axes
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .fold(one, |p, (_, j)| p * j.value);
            out.grad[a] = ja.d1 * others;
            out.lap = out.lap + ja.d2 * others;
        }
        out
    }
}

/// One-dimensional jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1<T> {
    pub value: Complex<T>,
    pub d1: Complex<T>,
    pub d2: Complex<T>,
}

impl<T: Real> Jet1<T> {
    /// Jet of `exp(g)` given `g`, `g'`, `g''` and a prefactor.
    pub fn exp_of(prefactor: Complex<T>, g: Complex<T>, g1: Complex<T>, g2: Complex<T>) -> Self {
        let v = prefactor * g.exp();
        Self {
            value: v,
            d1: g1 * v,
            d2: (g2 + g1 * g1) * v,
        }
    }
}
