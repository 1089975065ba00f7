//! Periodic cubic lattice of photon modes, one mode per cell.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// A finite periodic region of `cells_per_axis^dims` cubic cells.
///
/// Cells are indexed with the first axis varying fastest:
/// `index = i0 + n * i1 + n^2 * i2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLattice<T> {
    dims: usize,
    cells_per_axis: usize,
    cell_size: T,
}

impl<T: Real> ModeLattice<T> {
    pub fn new(dims: usize, cells_per_axis: usize, cell_size: T) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(invalid("dims", format!("{dims} is not in {{1, 2, 3}}")));
        }
        if cells_per_axis == 0 {
            return Err(invalid("cells_per_axis", "must be at least 1"));
        }
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(invalid("cell_size", "must be positive and finite"));
        }
        Ok(Self {
            dims,
            cells_per_axis,
            cell_size,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dims as u32)
    }

    /// Edge length `L` of the periodic box.
    pub fn edge_length(&self) -> T {
        T::count(self.cells_per_axis) * self.cell_size
    }

    /// `cell_size^dims`.
    pub fn cell_volume(&self) -> T {
        (0..self.dims).fold(T::one(), |v, _| v * self.cell_size)
    }

    /// Total volume, `cell_count * cell_size^dims`.
    pub fn volume(&self) -> T {
        T::count(self.cell_count()) * self.cell_volume()
    }

    /// Integer grid coordinates of a cell (unused axes are zero).
    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let n = self.cells_per_axis;
        let mut out = [0; 3];
        let mut rest = cell;
        for c in out.iter_mut().take(self.dims) {
            *c = rest % n;
            rest /= n;
        }
        out
    }

    pub fn index_of(&self, coords: [usize; 3]) -> usize {
        let n = self.cells_per_axis;
        (0..self.dims).rev().fold(0, |acc, d| acc * n + coords[d] % n)
    }

    /// Position of the cell center, `(i + 1/2) * cell_size` along each axis.
    pub fn center(&self, cell: usize) -> Result<Vec<T>> {
        self.check(cell)?;
        let half = T::lit(0.5);
        Ok(self.coords(cell)[..self.dims]
            .iter()
            .map(|&i| (T::count(i) + half) * self.cell_size)
            .collect())
    }

    pub fn centers(&self) -> Vec<Vec<T>> {
        (0..self.cell_count())
            .map(|c| self.center(c).expect("cell index in range"))
            .collect()
    }

    /// Per-axis minimal-image offsets between two cells, in cell units.
    pub fn min_image_offsets(&self, a: usize, b: usize) -> [usize; 3] {
        let n = self.cells_per_axis;
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut out = [0; 3];
        for d in 0..self.dims {
            let delta = ca[d].abs_diff(cb[d]);
            out[d] = delta.min(n - delta);
        }
        out
    }

    /// Squared minimal-image distance between two cell centers.
    pub fn distance_sq(&self, a: usize, b: usize) -> T {
        let off = self.min_image_offsets(a, b);
        off[..self.dims].iter().fold(T::zero(), |acc, &k| {
            let d = T::count(k) * self.cell_size;
            acc + d * d
        })
    }

    pub(crate) fn check(&self, cell: usize) -> Result<()> {
        let len = self.cell_count();
        if cell >= len {
            return Err(Error::IndexOutOfBounds {
                what: "lattice cells",
                index: cell,
                len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_pair() {
        let l = ModeLattice::<f64>::new(1, 2, 1e-4).unwrap();
        assert_eq!(l.cell_count(), 2);
        assert!((l.center(0).unwrap()[0] - 0.5e-4).abs() < 1e-18);
        assert!((l.center(1).unwrap()[0] - 1.5e-4).abs() < 1e-18);
        assert!((l.volume() - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn single_cube() {
        let l = ModeLattice::<f64>::new(3, 1, 1.0).unwrap();
        assert_eq!(l.cell_count(), 1);
        assert_eq!(l.volume(), 1.0);
        assert_eq!(l.center(0).unwrap(), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn nine_cells_in_the_plane() {
        let l = ModeLattice::<f64>::new(2, 3, 0.1).unwrap();
        assert_eq!(l.cell_count(), 9);
        assert!((l.volume() - 0.09).abs() < 1e-15);
        assert_eq!(l.coords(5), [2, 1, 0]);
        assert_eq!(l.index_of([2, 1, 0]), 5);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ModeLattice::<f64>::new(0, 2, 1.0).is_err());
        assert!(ModeLattice::<f64>::new(4, 2, 1.0).is_err());
        assert!(ModeLattice::<f64>::new(1, 0, 1.0).is_err());
        assert!(ModeLattice::<f64>::new(1, 2, 0.0).is_err());
        assert!(ModeLattice::<f64>::new(1, 2, -1.0).is_err());
    }

    #[test]
    fn minimal_image_wraps() {
        let l = ModeLattice::<f64>::new(1, 5, 1.0).unwrap();
        assert_eq!(l.distance_sq(0, 4), 1.0);
        assert_eq!(l.distance_sq(0, 2), 4.0);
        assert_eq!(l.distance_sq(1, 4), 4.0);
        let sq = ModeLattice::<f64>::new(2, 4, 0.5).unwrap();
        // (0,0) to (3,3): one step in each axis through the boundary.
        assert!((sq.distance_sq(0, sq.index_of([3, 3, 0])) - 0.5).abs() < 1e-15);
    }
}
