//! Register bookkeeping for the simulator.
//!
//! Qubits are little-endian: qubit 0 is the least significant bit of a basis
//! index. Registers are packed grid, direction, ancilla, flag from low to
//! high. Within the grid register the last grid dimension occupies the lowest
//! qubits, so a basis index restricted to the grid register equals the
//! row-major site index.

use crate::error::{QlbmError, Result};
use crate::lbm::grid::Grid;

/// Hard cap for dense statevector simulation.
pub const MAX_QUBITS: usize = 30;

/// How the direction register encodes the M lattice directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DirectionEncoding {
    /// ceil(log2 M) qubits, direction i stored as the binary word i.
    Dense,
    /// M qubits, direction i stored as the Hamming-weight-1 word e_i.
    OneHot,
}

impl DirectionEncoding {
    pub fn qubits(&self, directions: usize) -> usize {
        match self {
            DirectionEncoding::Dense => (directions as f64).log2().ceil() as usize,
            DirectionEncoding::OneHot => directions,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(DirectionEncoding::Dense),
            "one-hot" | "onehot" | "one_hot" => Ok(DirectionEncoding::OneHot),
            other => Err(QlbmError::InvalidConfig(format!(
                "unknown encoding '{other}'"
            ))),
        }
    }
}

/// Named register roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Register {
    Grid,
    Direction,
    Ancilla,
    Flag,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegisterLayout {
    /// Qubits per grid coordinate, in grid dimension order.
    pub coord_qubits: Vec<usize>,
    pub grid_qubits: usize,
    pub direction_qubits: usize,
    pub encoding: DirectionEncoding,
    pub directions: usize,
    pub ancilla_qubits: usize,
    pub flag_qubits: usize,
}

impl RegisterLayout {
    pub fn new(
        grid: &Grid,
        directions: usize,
        encoding: DirectionEncoding,
        ancilla_qubits: usize,
        flag_qubits: usize,
    ) -> Result<Self> {
        let layout = RegisterLayout {
            coord_qubits: grid.coord_qubits(),
            grid_qubits: grid.total_qubits(),
            direction_qubits: encoding.qubits(directions),
            encoding,
            directions,
            ancilla_qubits,
            flag_qubits,
        };
        let n = layout.total_qubits();
        if n == 0 {
            return Err(QlbmError::EmptyLayout);
        }
        if n > MAX_QUBITS {
            return Err(QlbmError::TooManyQubits(n));
        }
        Ok(layout)
    }

    /// Grid-register-only layout, used by loader and readout tests.
    pub fn grid_only(grid: &Grid) -> Result<Self> {
        let layout = RegisterLayout {
            coord_qubits: grid.coord_qubits(),
            grid_qubits: grid.total_qubits(),
            direction_qubits: 0,
            encoding: DirectionEncoding::Dense,
            directions: 0,
            ancilla_qubits: 0,
            flag_qubits: 0,
        };
        if layout.grid_qubits == 0 {
            return Err(QlbmError::EmptyLayout);
        }
        if layout.grid_qubits > MAX_QUBITS {
            return Err(QlbmError::TooManyQubits(layout.grid_qubits));
        }
        Ok(layout)
    }

    pub fn total_qubits(&self) -> usize {
        self.grid_qubits + self.direction_qubits + self.ancilla_qubits + self.flag_qubits
    }

    /// Qubit indices of a register, low to high.
    pub fn register_qubits(&self, reg: Register) -> std::ops::Range<usize> {
        let g = self.grid_qubits;
        let d = self.direction_qubits;
        let a = self.ancilla_qubits;
        match reg {
            Register::Grid => 0..g,
            Register::Direction => g..g + d,
            Register::Ancilla => g + d..g + d + a,
            Register::Flag => g + d + a..g + d + a + self.flag_qubits,
        }
    }

    /// Qubit range of one grid coordinate register. The last grid dimension
    /// sits lowest so that the grid bits of a basis index spell the row-major
    /// site index.
    pub fn coord_register(&self, axis: usize) -> std::ops::Range<usize> {
        let after: usize = self.coord_qubits[axis + 1..].iter().sum();
        after..after + self.coord_qubits[axis]
    }

    /// Qubit index of one-hot direction i.
    pub fn direction_qubit(&self, i: usize) -> usize {
        debug_assert_eq!(self.encoding, DirectionEncoding::OneHot);
        self.grid_qubits + i
    }

    /// Qubit index of flag ancilla `k`.
    pub fn flag_qubit(&self, k: usize) -> usize {
        self.register_qubits(Register::Flag).start + k
    }

    /// Extract a register's bits from a full basis index.
    pub fn extract(&self, basis: usize, reg: Register) -> usize {
        let range = self.register_qubits(reg);
        (basis >> range.start) & ((1usize << (range.end - range.start)) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_packing_and_extraction() {
        let grid = Grid::square(16).unwrap();
        let layout =
            RegisterLayout::new(&grid, 5, DirectionEncoding::OneHot, 2, 4).unwrap();
        assert_eq!(layout.total_qubits(), 8 + 5 + 2 + 4);
        assert_eq!(layout.register_qubits(Register::Grid), 0..8);
        assert_eq!(layout.register_qubits(Register::Direction), 8..13);
        assert_eq!(layout.register_qubits(Register::Ancilla), 13..15);
        assert_eq!(layout.register_qubits(Register::Flag), 15..19);
        let basis = (0b1010usize << 15) | (0b01usize << 13) | (0b00100usize << 8) | 0xA5;
        assert_eq!(layout.extract(basis, Register::Grid), 0xA5);
        assert_eq!(layout.extract(basis, Register::Direction), 0b00100);
        assert_eq!(layout.extract(basis, Register::Ancilla), 0b01);
        assert_eq!(layout.extract(basis, Register::Flag), 0b1010);
    }

    #[test]
    fn coordinate_registers_follow_row_major_order() {
        let grid = Grid::new(&[8, 4]).unwrap(); // site = x*4 + y
        let layout = RegisterLayout::grid_only(&grid).unwrap();
        assert_eq!(layout.coord_register(1), 0..2); // y in low bits
        assert_eq!(layout.coord_register(0), 2..5); // x above
    }

    #[test]
    fn qubit_bound_enforced() {
        let grid = Grid::cube(512).unwrap(); // 27 grid qubits
        let err = RegisterLayout::new(&grid, 27, DirectionEncoding::OneHot, 0, 0);
        assert!(matches!(err, Err(QlbmError::TooManyQubits(_))));
    }

    #[test]
    fn dense_encoding_width() {
        assert_eq!(DirectionEncoding::Dense.qubits(5), 3);
        assert_eq!(DirectionEncoding::Dense.qubits(9), 4);
        assert_eq!(DirectionEncoding::Dense.qubits(27), 5);
        assert_eq!(DirectionEncoding::OneHot.qubits(5), 5);
    }
}
