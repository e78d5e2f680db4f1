use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Point, Real};

/// Uniform periodic Cartesian grid with nodes centered on the origin.
///
/// Node `j` on axis `a` sits at `-L_a/2 + j * dx_a`. Values are stored
/// row-major with axis 0 varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    dims: usize,
    points: [usize; 3],
    lengths: [T; 3],
    spacing: [T; 3],
}

impl<T: Real> Grid<T> {
    /// Builds a grid. `points` and `lengths` hold either one entry (shared by
    /// all axes) or one entry per axis.
    pub fn new(dims: usize, points: &[usize], lengths: &[T]) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidGrid(format!("dims must be 1..=3, got {dims}")));
        }
        let pick = |len: usize, what: &str| -> Result<()> {
            if len == 1 || len == dims {
                Ok(())
            } else {
                Err(Error::InvalidGrid(format!(
                    "{what} needs 1 or {dims} entries, got {len}"
                )))
            }
        };
        pick(points.len(), "points")?;
        pick(lengths.len(), "lengths")?;

        let mut p = [1usize; 3];
        let mut l = [T::zero(); 3];
        let mut h = [T::zero(); 3];
        for a in 0..dims {
            let n = if points.len() == 1 { points[0] } else { points[a] };
            let len = if lengths.len() == 1 { lengths[0] } else { lengths[a] };
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: points must be a power of two >= 8, got {n}"
                )));
            }
            if !(len > T::zero()) || !len.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: length must be positive, got {len}"
                )));
            }
            p[a] = n;
            l[a] = len;
            h[a] = len / T::count(n);
        }
        Ok(Self {
            dims,
            points: p,
            lengths: l,
            spacing: h,
        })
    }

    pub fn uniform(dims: usize, points: usize, length: T) -> Result<Self> {
        Self::new(dims, &[points], &[length])
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Points per axis; unused axes report 1.
    #[inline]
    pub fn points(&self) -> [usize; 3] {
        self.points
    }

    #[inline]
    pub fn lengths(&self) -> [T; 3] {
        self.lengths
    }

    #[inline]
    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell (length, area or volume depending on `dims`).
    pub fn cell_volume(&self) -> T {
        (0..self.dims).fold(T::one(), |acc, a| acc * self.spacing[a])
    }

    /// Coordinate of node `j` on `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, j: usize) -> T {
        -self.lengths[axis] / T::lit(2.0) + T::count(j) * self.spacing[axis]
    }

    /// Multi-index of the flat node index.
    #[inline]
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..3).rev() {
            out[a] = idx % self.points[a];
            idx /= self.points[a];
        }
        out
    }

    #[inline]
    pub fn ravel(&self, ix: [usize; 3]) -> usize {
        (ix[0] * self.points[1] + ix[1]) * self.points[2] + ix[2]
    }

    pub fn node(&self, idx: usize) -> Point<T> {
        let ix = self.unravel(idx);
        let mut p = [T::zero(); 3];
        for a in 0..self.dims {
            p[a] = self.coord(a, ix[a]);
        }
        p
    }

    /// All node coordinates in storage order.
    pub fn nodes(&self) -> Vec<Point<T>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Whether `x` lies in the half-open box `[-L/2, L/2)` on every active axis.
    pub fn contains(&self, x: &Point<T>) -> bool {
        let half = T::lit(0.5);
        (0..self.dims).all(|a| x[a] >= -self.lengths[a] * half && x[a] < self.lengths[a] * half)
    }

    /// True for nodes with an index of 0 or `n-1` on some active axis.
    pub fn is_edge(&self, idx: usize) -> bool {
        let ix = self.unravel(idx);
        (0..self.dims).any(|a| ix[a] == 0 || ix[a] + 1 == self.points[a])
    }

    /// Angular wavenumbers in FFT order for `axis`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<T> {
        let n = self.points[axis];
        let dk = T::lit(2.0) * T::PI() / self.lengths[axis];
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                T::lit(m) * dk
            })
            .collect()
    }
}

/// Serializable grid description; [`GridSpec::build`] validates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec<T> {
    pub dims: usize,
    #[serde(default = "default_points")]
    pub points: Vec<usize>,
    pub lengths: Vec<T>,
}

fn default_points() -> Vec<usize> {
    vec![256]
}

impl<T: Real> GridSpec<T> {
    pub fn build(&self) -> Result<Grid<T>> {
        Grid::new(self.dims, &self.points, &self.lengths)
    }
}

impl<T: Real> From<&Grid<T>> for GridSpec<T> {
    fn from(g: &Grid<T>) -> Self {
        Self {
            dims: g.dims,
            points: g.points[..g.dims].to_vec(),
            lengths: g.lengths[..g.dims].to_vec(),
        }
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid<T: Real>(dims: usize, points: &[usize], lengths: &[T]) -> Result<Grid<T>> {
    Grid::new(dims, points, lengths)
}
