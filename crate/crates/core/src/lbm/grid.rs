//! Periodic grids with power-of-two side lengths.
//!
//! Sites are flattened row-major: the last listed dimension varies fastest,
//! so on a 2D grid `site = x * Ly + y`. This matches the qubit layout, where
//! the last dimension's coordinate occupies the least significant grid qubits.

use crate::error::{QlbmError, Result};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
}

impl Grid {
    /// Periodic grid with the given side lengths, each a power of two >= 2.
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(QlbmError::InvalidConfig(format!(
                "grid must have 1-3 dimensions, got {}",
                dims.len()
            )));
        }
        for &side in dims {
            if side < 2 || !side.is_power_of_two() {
                return Err(QlbmError::BadGridSide(side));
            }
        }
        Ok(Grid {
            dims: dims.to_vec(),
        })
    }

    pub fn square(side: usize) -> Result<Self> {
        Grid::new(&[side, side])
    }

    pub fn cube(side: usize) -> Result<Self> {
        Grid::new(&[side, side, side])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    /// Total number of lattice sites.
    pub fn sites(&self) -> usize {
        self.dims.iter().product()
    }

    /// Qubits per coordinate register.
    pub fn coord_qubits(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.trailing_zeros() as usize).collect()
    }

    /// Total grid qubits log2(N).
    pub fn total_qubits(&self) -> usize {
        self.coord_qubits().iter().sum()
    }

    /// Flatten integer coordinates into a site index.
    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        let mut idx = 0;
        for (c, d) in coords.iter().zip(&self.dims) {
            debug_assert!(c < d);
            idx = idx * d + c;
        }
        idx
    }

    /// Inverse of [`Grid::index`].
    pub fn coords(&self, mut site: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            out[axis] = site % self.dims[axis];
            site /= self.dims[axis];
        }
        out
    }

    /// Site reached from `site` by adding velocity `c` with periodic wrap.
    pub fn shift(&self, site: usize, c: &[i32]) -> usize {
        let mut coords = self.coords(site);
        for (axis, &step) in c.iter().enumerate() {
            let side = self.dims[axis] as i64;
            let v = (coords[axis] as i64 + step as i64).rem_euclid(side);
            coords[axis] = v as usize;
        }
        self.index(&coords)
    }

    /// Unit-interval coordinates of a site: x_j = index_j / L_j in [0,1).
    pub fn unit_coords(&self, site: usize) -> Vec<f64> {
        self.coords(site)
            .iter()
            .zip(&self.dims)
            .map(|(&c, &d)| c as f64 / d as f64)
            .collect()
    }

    pub fn label(&self) -> String {
        let side = self.dims[0];
        if self.dims.iter().all(|&d| d == side) {
            format!("{}^{}", side, self.dims.len())
        } else {
            self.dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid::new(&[12]).is_err());
        assert!(Grid::new(&[1]).is_err());
        assert!(Grid::new(&[16, 16]).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(&[8, 4, 2]).unwrap();
        for site in 0..g.sites() {
            assert_eq!(g.index(&g.coords(site)), site);
        }
        assert_eq!(g.total_qubits(), 3 + 2 + 1);
    }

    #[test]
    fn last_dimension_varies_fastest() {
        let g = Grid::new(&[4, 8]).unwrap();
        assert_eq!(g.index(&[0, 1]), 1);
        assert_eq!(g.index(&[1, 0]), 8);
    }

    #[test]
    fn periodic_shift_wraps() {
        let g = Grid::new(&[8]).unwrap();
        assert_eq!(g.shift(7, &[1]), 0);
        assert_eq!(g.shift(0, &[-1]), 7);
        let g2 = Grid::square(16).unwrap();
        let s = g2.index(&[3, 9]);
        assert_eq!(g2.coords(g2.shift(s, &[1, 0])), vec![4, 9]);
    }
}
