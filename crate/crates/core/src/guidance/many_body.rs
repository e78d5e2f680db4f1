use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pilot::{Jet, PilotWave};
use crate::scalar::{point_to_f64, Point, Real};

/// Pilot value together with its gradient at each particle.
type ValueAndGradients<T> = (Complex<T>, Vec<[Complex<T>; 3]>);

/// How single-particle orbitals combine into the configuration-space pilot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `psi_1(x_1) psi_2(x_2) ...`; particles move independently.
    Product,
    /// Sum over permutations of the orbital assignment.
    Symmetric,
    /// Signed sum over permutations (a Slater determinant).
    Antisymmetric,
}

/// Pilot wave of up to three particles built from single-particle pilots.
#[derive(Debug, Clone)]
pub struct ManyBodyPilot<T: Real> {
    orbitals: Vec<PilotWave<T>>,
    symmetry: Symmetry,
    perms: Vec<(Vec<usize>, i8)>,
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    if n == 1 {
        return vec![(vec![0], 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // Insert n-1 at every position; each move to the left is a swap.
        for pos in (0..n).rev() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            let sign = if (n - 1 - pos).is_multiple_of(2) { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

impl<T: Real> ManyBodyPilot<T> {
    /// `orbitals[j]` is the single-particle pilot of orbital `j`; for a
    /// product, particle `j` occupies orbital `j`.
    pub fn new(orbitals: Vec<PilotWave<T>>, symmetry: Symmetry) -> Result<Self> {
        let n = orbitals.len();
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "many-body pilots support 1 to 3 particles, got {n}"
            )));
        }
        let dims = orbitals[0].dims();
        if orbitals.iter().any(|o| o.dims() != dims) {
            return Err(Error::InvalidParameter("orbitals differ in dimension".into()));
        }
        if symmetry != Symmetry::Product {
            let (h, m) = (orbitals[0].hbar(), orbitals[0].mass());
            if orbitals.iter().any(|o| o.hbar() != h || o.mass() != m) {
                return Err(Error::InvalidParameter(
                    "symmetrized pilots need identical particles (same hbar and mass)".into(),
                ));
            }
        }
        Ok(Self {
            perms: permutations(n),
            orbitals,
            symmetry,
        })
    }

    pub fn particles(&self) -> usize {
        self.orbitals.len()
    }

    pub fn dims(&self) -> usize {
        self.orbitals[0].dims()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn orbitals(&self) -> &[PilotWave<T>] {
        &self.orbitals
    }

    /// Value of the configuration-space pilot and its gradient with respect
    /// to each particle position.
    fn value_and_gradients(&self, t: T, xs: &[Point<T>]) -> Result<ValueAndGradients<T>> {
        let n = self.particles();
        // jets[i][j]: orbital j evaluated at particle i.
        let jets: Vec<Vec<Jet<T>>> = xs
            .iter()
            .map(|x| self.orbitals.iter().map(|o| o.jet(t, x)).collect())
            .collect::<Result<_>>()?;
        let zero = Complex::new(T::zero(), T::zero());
        let mut value = zero;
        let mut grads = vec![[zero; 3]; n];
        for (perm, sign) in &self.perms {
            let s = match self.symmetry {
                Symmetry::Antisymmetric => T::lit(f64::from(*sign)),
                _ => T::one(),
            };
            let term = (0..n).fold(Complex::new(s, T::zero()), |p, i| p * jets[i][perm[i]].value);
            value = value + term;
            for (i, g) in grads.iter_mut().enumerate() {
                let others = (0..n)
                    .filter(|&k| k != i)
                    .fold(Complex::new(s, T::zero()), |p, k| p * jets[k][perm[k]].value);
                for a in 0..3 {
                    g[a] = g[a] + others * jets[i][perm[i]].grad[a];
                }
            }
        }
        Ok((value, grads))
    }

    /// Configuration-space pilot value.
    pub fn evaluate(&self, t: T, xs: &[Point<T>]) -> Result<Complex<T>> {
        self.check_len(xs)?;
        match self.symmetry {
            Symmetry::Product => xs
                .iter()
                .zip(&self.orbitals)
                .try_fold(Complex::new(T::one(), T::zero()), |p, (x, o)| Ok(p * o.evaluate(t, x)?)),
            _ => Ok(self.value_and_gradients(t, xs)?.0),
        }
    }

    fn check_len(&self, xs: &[Point<T>]) -> Result<()> {
        if xs.len() == self.particles() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} positions for {} particles",
                xs.len(),
                self.particles()
            )))
        }
    }

    /// `(hbar/m) grad_i(phase)` for every particle `i`.
    pub fn velocities(&self, t: T, xs: &[Point<T>]) -> Result<Vec<Point<T>>> {
        self.check_len(xs)?;
        if self.symmetry == Symmetry::Product {
            return xs
                .iter()
                .zip(&self.orbitals)
                .map(|(x, o)| o.guidance_velocity(t, x))
                .collect();
        }
        let (value, grads) = self.value_and_gradients(t, xs)?;
        let reference = self.orbitals.iter().fold(T::one(), |p, o| p * o.reference_amplitude(t));
        let amp = value.norm();
        if !(amp > self.orbitals[0].node_epsilon() * reference) {
            return Err(Error::NodeProximity {
                time: t.as_f64(),
                position: point_to_f64(&xs[0]),
                amplitude: amp.as_f64(),
            });
        }
        let f = self.orbitals[0].hbar() / self.orbitals[0].mass();
        let inv = value.inv();
        Ok(grads
            .iter()
            .map(|g| {
                let mut v = [T::zero(); 3];
                for a in 0..self.dims() {
                    v[a] = f * (g[a] * inv).im;
                }
                v
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::permutations;

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        for (perm, sign) in &p {
            let inversions = (0..3)
                .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                .filter(|&(i, j)| perm[i] > perm[j])
                .count();
            assert_eq!(*sign, if inversions % 2 == 0 { 1 } else { -1 }, "{perm:?}");
        }
        let mut sorted: Vec<_> = p.iter().map(|(q, _)| q.clone()).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
    }
}
