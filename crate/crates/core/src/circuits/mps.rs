//! Matrix product state loading: sequential-SVD truncation of a smooth field
//! and its conversion into staircase layers of two-qubit gates.
//!
//! Site 0 of the tensor train is the most significant grid qubit. A bond
//! dimension 2 state converts exactly into a single staircase layer of
//! n_G - 1 two-qubit gates; further layers absorb the residual by repeating
//! the truncate-and-disentangle sweep on the partially unwound target.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circuits::spec::{CircuitSpec, Segment};
use crate::error::{QlbmError, Result};
use crate::lbm::field::DensityField;
use crate::lbm::grid::Grid;
use crate::qsim::gate::GateOp;
use crate::qsim::layout::RegisterLayout;

/// One tensor of the train, indexed `[left][physical][right]`.
#[derive(Debug, Clone)]
pub struct SiteTensor {
    pub left: usize,
    pub right: usize,
    data: Vec<f64>,
}

impl SiteTensor {
    fn get(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[(l * 2 + s) * self.right + r]
    }
}

/// Truncated matrix product state of a density field.
#[derive(Debug, Clone)]
pub struct MpsApprox {
    pub grid: Grid,
    pub tensors: Vec<SiteTensor>,
    pub bond_dimension: usize,
    pub fidelity_to_target: f64,
    /// Normalized target amplitudes.
    target: Vec<f64>,
}

impl MpsApprox {
    /// Bond dimension at each cut (between site j and j+1).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.tensors.len() - 1]
            .iter()
            .map(|t| t.right)
            .collect()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Contract the train back to a dense (unnormalized) statevector.
    pub fn contract(&self) -> Vec<f64> {
        contract_tensors(&self.tensors)
    }
}

fn contract_tensors(tensors: &[SiteTensor]) -> Vec<f64> {
    let mut cur = DMatrix::from_element(1, 1, 1.0);
    for t in tensors {
        let rows = cur.nrows() * 2;
        let mut next = DMatrix::zeros(rows, t.right);
        for p in 0..cur.nrows() {
            for s in 0..2 {
                for r in 0..t.right {
                    let mut acc = 0.0;
                    for b in 0..t.left {
                        acc += cur[(p, b)] * t.get(b, s, r);
                    }
                    next[(p * 2 + s, r)] = acc;
                }
            }
        }
        cur = next;
    }
    cur.column(0).iter().copied().collect()
}

/// Sequential SVD sweep truncating every bond to `chi`.
pub fn mps_fit(field: &DensityField, chi: usize) -> Result<MpsApprox> {
    if chi < 1 {
        return Err(QlbmError::InvalidConfig("bond dimension must be >= 1".into()));
    }
    let n = field.grid.total_qubits();
    let psi = field.normalized();
    let tensors = tt_sweep(&psi, n, chi);
    let mut approx = MpsApprox {
        grid: field.grid.clone(),
        tensors,
        bond_dimension: chi,
        fidelity_to_target: 0.0,
        target: psi,
    };
    let rec = approx.contract();
    let norm = rec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let overlap: f64 = rec.iter().zip(&approx.target).map(|(a, b)| a * b).sum();
    approx.fidelity_to_target = (overlap / norm).abs();
    Ok(approx)
}

fn tt_sweep(psi: &[f64], n: usize, chi: usize) -> Vec<SiteTensor> {
    let mut tensors = Vec::with_capacity(n);
    let mut rest = DMatrix::from_row_slice(1, psi.len(), psi);
    for _site in 0..n - 1 {
        let bond = rest.nrows();
        let half = rest.ncols() / 2;
        let m = DMatrix::from_fn(bond * 2, half, |r, c| rest[(r / 2, (r % 2) * half + c)]);
        let (u, s, vt) = sorted_svd(&m);
        let rank = s
            .iter()
            .take_while(|&&sv| sv > 1e-14)
            .count()
            .clamp(1, chi.min(s.len()));
        let mut data = vec![0.0; bond * 2 * rank];
        for r in 0..bond * 2 {
            for j in 0..rank {
                data[r * rank + j] = u[(r, j)];
            }
        }
        tensors.push(SiteTensor {
            left: bond,
            right: rank,
            data,
        });
        let mut next = DMatrix::zeros(rank, half);
        for j in 0..rank {
            for c in 0..half {
                next[(j, c)] = s[j] * vt[(j, c)];
            }
        }
        rest = next;
    }
    // last site: (bond, 2) block with trivial right bond
    let bond = rest.nrows();
    let mut data = vec![0.0; bond * 2];
    for b in 0..bond {
        for s in 0..2 {
            data[b * 2 + s] = rest[(b, s)];
        }
    }
    tensors.push(SiteTensor {
        left: bond,
        right: 1,
        data,
    });
    tensors
}

/// Thin SVD with singular values sorted in decreasing order.
fn sorted_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let s: Vec<f64> = order.iter().map(|&j| svd.singular_values[j]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    (u_sorted, s, vt_sorted)
}

/// Staircase loader circuit for an MPS target.
///
/// Returns the circuit (2 * n_layers * (n_G - 1) CX worth of two-qubit
/// blocks) and the exact fidelity of the prepared state to the target.
pub fn mps_loader_circuit(mps: &MpsApprox, n_layers: usize) -> Result<(CircuitSpec, f64)> {
    if n_layers < 1 {
        return Err(QlbmError::InvalidConfig("need at least one layer".into()));
    }
    let n = mps.grid.total_qubits();
    if n < 2 {
        return Err(QlbmError::UnsupportedSynthesis(
            "staircase loader needs at least two grid qubits".into(),
        ));
    }
    let layout = RegisterLayout::grid_only(&mps.grid)?;
    let mut work = mps.target.to_vec();
    let mut layers: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let gates = extract_staircase_layer(&work, n);
        // unwind the layer: work <- L^T work, applying G_0^T first
        for (j, g) in gates.iter().enumerate() {
            let gt = g.transpose();
            apply_two_qubit(&mut work, n, n - 1 - j, n - 2 - j, &gt);
        }
        layers.push(gates);
    }
    let fidelity = work[0].abs();

    let mut circuit = CircuitSpec::new(layout);
    for gates in layers.iter().rev() {
        for (j, g) in gates.iter().enumerate().rev() {
            let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] = Complex64::new(g[(r, c)], 0.0);
                }
            }
            circuit.push(
                Segment::Loader,
                GateOp::unitary4(n - 1 - j, n - 2 - j, m)?,
            );
        }
    }
    Ok((circuit, fidelity))
}

/// One staircase layer exactly preparing the bond-dimension-2 truncation of
/// `psi`: gate j acts on sites (j, j+1) and disentangles site j.
fn extract_staircase_layer(psi: &[f64], n: usize) -> Vec<DMatrix<f64>> {
    let mut current = contract_tensors(&tt_sweep(psi, n, 2));
    let norm = current.iter().map(|x| x * x).sum::<f64>().sqrt();
    for v in current.iter_mut() {
        *v /= norm;
    }

    let mut gates = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let rem = n - j;
        let cols = 1usize << (rem - 2);
        let a = DMatrix::from_fn(4, cols, |r, c| current[r * cols + c]);
        let (u, s, _) = sorted_svd(&a);
        let mut basis: Vec<DVector<f64>> = vec![u.column(0).into_owned()];
        if s.len() > 1 && s[1] > 1e-14 {
            basis.push(u.column(1).into_owned());
        }
        let cols4 = complete_orthonormal(basis);
        let g = DMatrix::from_fn(4, 4, |r, c| cols4[c][r]);
        // disentangle: current <- G^T current, keep the s_j = 0 block
        let gt = g.transpose();
        let reduced = &gt * &a;
        let mut next = vec![0.0; 1usize << (rem - 1)];
        for sb in 0..2 {
            for c in 0..cols {
                next[sb * cols + c] = reduced[(sb, c)];
            }
        }
        debug_assert!(
            (2..4).all(|r| (0..cols).all(|c| reduced[(r, c)].abs() < 1e-9)),
            "residual outside the chi=2 block"
        );
        // renormalize against float drift
        let nn = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        for v in next.iter_mut() {
            *v /= nn;
        }
        current = next;
        gates.push(g);
    }
    gates
}

/// Extend up to two orthonormal columns to an orthonormal basis of R^4.
fn complete_orthonormal(mut basis: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut candidate = 0;
    while basis.len() < 4 {
        let mut v = DVector::zeros(4);
        v[candidate % 4] = 1.0;
        candidate += 1;
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    basis
}

fn apply_two_qubit(amps: &mut [f64], n: usize, hi: usize, lo: usize, g: &DMatrix<f64>) {
    debug_assert!(hi < n && lo < n && hi != lo);
    let hb = 1usize << hi;
    let lb = 1usize << lo;
    for i in 0..amps.len() {
        if i & hb == 0 && i & lb == 0 {
            let idx = [i, i | lb, i | hb, i | hb | lb];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for (r, &b) in idx.iter().enumerate() {
                amps[b] = g[(r, 0)] * v[0] + g[(r, 1)] * v[1] + g[(r, 2)] * v[2] + g[(r, 3)] * v[3];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::spec::apply_circuit;
    use crate::lbm::field::{initial_field, isotropic_cov, InitialCondition};
    use crate::qsim::state::init_state;
    use approx::assert_abs_diff_eq;

    fn gaussian_1d(len: usize, mean: f64, sigma: f64) -> DensityField {
        let grid = Grid::new(&[len]).unwrap();
        let values = (0..len)
            .map(|i| (-((i as f64 - mean) / sigma).powi(2) / 2.0).exp())
            .collect();
        DensityField::new(grid, values).unwrap()
    }

    #[test]
    fn delta_field_is_exact_at_chi_one() {
        let grid = Grid::new(&[16]).unwrap();
        let mut values = vec![0.0; 16];
        values[11] = 1.0;
        let f = DensityField::new(grid, values).unwrap();
        let mps = mps_fit(&f, 1).unwrap();
        assert!(mps.bond_dims().iter().all(|&b| b == 1));
        assert_abs_diff_eq!(mps.fidelity_to_target, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_field_has_unit_bond_at_coordinate_cut() {
        // 16x16 separable Gaussian: rank 1 across the x|y boundary
        let grid = Grid::square(16).unwrap();
        let gx = gaussian_1d(16, 7.0, 2.0);
        let gy = gaussian_1d(16, 9.0, 3.0);
        let values: Vec<f64> = (0..256)
            .map(|s| {
                let c = grid.coords(s);
                gx.values[c[0]] * gy.values[c[1]]
            })
            .collect();
        let f = DensityField::new(grid, values).unwrap();
        let mps = mps_fit(&f, 4).unwrap();
        // cut 3 separates the four x qubits from the four y qubits
        assert_eq!(mps.bond_dims()[3], 1);
        assert_abs_diff_eq!(mps.fidelity_to_target, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_256_chi2_fidelity_exceeds_threshold() {
        let f = gaussian_1d(256, 128.0, 24.0);
        let mps = mps_fit(&f, 2).unwrap();
        assert!(
            mps.fidelity_to_target >= 0.999,
            "fidelity {}",
            mps.fidelity_to_target
        );
        // reported fidelity agrees with an independent contraction
        let rec = mps.contract();
        let norm = rec.iter().map(|x| x * x).sum::<f64>().sqrt();
        let overlap: f64 = rec
            .iter()
            .zip(mps.target())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / norm;
        assert_abs_diff_eq!(mps.fidelity_to_target, overlap.abs(), epsilon = 1e-12);
    }

    #[test]
    fn loader_cx_budget_matches_formula() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: isotropic_cov(2, 2.0),
            },
            &grid,
        )
        .unwrap();
        let mps = mps_fit(&f, 2).unwrap();
        let (c2, _) = mps_loader_circuit(&mps, 2).unwrap();
        assert_eq!(c2.total_cx_cost(), 28); // 2 * 2 * (8 - 1)
        assert_eq!(c2.gate_count(), 14);
        let (c3, _) = mps_loader_circuit(&mps, 3).unwrap();
        assert_eq!(c3.total_cx_cost(), 42);
    }

    #[test]
    fn loader_prepares_reported_state() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: isotropic_cov(2, 2.0),
            },
            &grid,
        )
        .unwrap();
        let mps = mps_fit(&f, 2).unwrap();
        let (circuit, reported) = mps_loader_circuit(&mps, 2).unwrap();
        let mut s = init_state(&circuit.layout).unwrap();
        apply_circuit(&mut s, &circuit).unwrap();
        let target = f.normalized();
        let overlap: f64 = s
            .amps
            .iter()
            .zip(&target)
            .map(|(a, t)| a.re * t)
            .sum();
        assert_abs_diff_eq!(overlap.abs(), reported, epsilon = 1e-10);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-10);
        assert!(reported > 0.99);
    }

    #[test]
    fn loader_fidelity_nondecreasing_in_layers() {
        let grid = Grid::square(16).unwrap();
        let f = initial_field(
            &InitialCondition::Gaussian {
                mean: vec![6.0, 10.0],
                cov: vec![vec![4.0, 1.0], vec![1.0, 2.5]],
            },
            &grid,
        )
        .unwrap();
        let mps = mps_fit(&f, 2).unwrap();
        let mut last = 0.0;
        for layers in 1..=3 {
            let (_, fid) = mps_loader_circuit(&mps, layers).unwrap();
            assert!(
                fid >= last - 1e-9,
                "fidelity dropped from {last} to {fid} at {layers} layers"
            );
            last = fid;
        }
        // single chi=2 layer can do no better than the chi=2 truncation
        let (_, fid1) = mps_loader_circuit(&mps, 1).unwrap();
        assert_abs_diff_eq!(fid1, mps.fidelity_to_target, epsilon = 1e-6);
    }

    #[test]
    fn zero_layers_rejected() {
        let f = gaussian_1d(16, 8.0, 2.0);
        let mps = mps_fit(&f, 2).unwrap();
        assert!(mps_loader_circuit(&mps, 0).is_err());
    }
}
