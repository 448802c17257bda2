//! DdQq lattice models: velocity sets, collision weights and lattice sound speed.

use crate::error::{QlbmError, Result};

/// Supported DdQq velocity sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ModelName {
    D2Q5,
    D2Q9,
    D3Q7,
    D3Q19,
    D3Q27,
}

impl ModelName {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d2q5" => Ok(ModelName::D2Q5),
            "d2q9" => Ok(ModelName::D2Q9),
            "d3q7" => Ok(ModelName::D3Q7),
            "d3q19" => Ok(ModelName::D3Q19),
            "d3q27" => Ok(ModelName::D3Q27),
            other => Err(QlbmError::UnsupportedModel(other.to_string())),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::D2Q5 => "D2Q5",
            ModelName::D2Q9 => "D2Q9",
            ModelName::D3Q7 => "D3Q7",
            ModelName::D3Q19 => "D3Q19",
            ModelName::D3Q27 => "D3Q27",
        }
    }
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A DdQq lattice: discrete velocities `c_i` (one lattice site per step),
/// collision weights `w_i` and squared sound speed.
///
/// The rest velocity is always listed first and every nonzero velocity is
/// paired with its negation. Weight conventions: D2Q5 uses 1/3 + 4x1/6,
/// D3Q7 uses 1/4 + 6x1/8 (both with c_s^2 = 1/3), the remaining sets are
/// the standard ones.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub name: ModelName,
    pub dimension: usize,
    pub velocities: Vec<Vec<i32>>,
    pub weights: Vec<f64>,
    pub sound_speed_sq: f64,
}

/// Build a lattice model by name.
pub fn make_model(name: ModelName) -> LatticeModel {
    let (dimension, velocities, weights): (usize, Vec<Vec<i32>>, Vec<f64>) = match name {
        ModelName::D2Q5 => (
            2,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![-1, 0],
                vec![0, 1],
                vec![0, -1],
            ],
            vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        ),
        ModelName::D2Q9 => {
            let velocities = vec![
                vec![0, 0],
                vec![1, 0],
                vec![-1, 0],
                vec![0, 1],
                vec![0, -1],
                vec![1, 1],
                vec![-1, -1],
                vec![1, -1],
                vec![-1, 1],
            ];
            let mut weights = vec![4.0 / 9.0];
            weights.extend(std::iter::repeat(1.0 / 9.0).take(4));
            weights.extend(std::iter::repeat(1.0 / 36.0).take(4));
            (2, velocities, weights)
        }
        ModelName::D3Q7 => {
            let velocities = vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![-1, 0, 0],
                vec![0, 1, 0],
                vec![0, -1, 0],
                vec![0, 0, 1],
                vec![0, 0, -1],
            ];
            let mut weights = vec![1.0 / 4.0];
            weights.extend(std::iter::repeat(1.0 / 8.0).take(6));
            (3, velocities, weights)
        }
        ModelName::D3Q19 => {
            let mut velocities = vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![-1, 0, 0],
                vec![0, 1, 0],
                vec![0, -1, 0],
                vec![0, 0, 1],
                vec![0, 0, -1],
            ];
            // face diagonals, negation pairs adjacent
            for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
                for (sa, sb) in [(1, 1), (1, -1)] {
                    let mut v = vec![0i32; 3];
                    v[a] = sa;
                    v[b] = sb;
                    let neg: Vec<i32> = v.iter().map(|x| -x).collect();
                    velocities.push(v);
                    velocities.push(neg);
                }
            }
            let mut weights = vec![1.0 / 3.0];
            weights.extend(std::iter::repeat(1.0 / 18.0).take(6));
            weights.extend(std::iter::repeat(1.0 / 36.0).take(12));
            (3, velocities, weights)
        }
        ModelName::D3Q27 => {
            let mut velocities = vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![-1, 0, 0],
                vec![0, 1, 0],
                vec![0, -1, 0],
                vec![0, 0, 1],
                vec![0, 0, -1],
            ];
            for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
                for (sa, sb) in [(1, 1), (1, -1)] {
                    let mut v = vec![0i32; 3];
                    v[a] = sa;
                    v[b] = sb;
                    let neg: Vec<i32> = v.iter().map(|x| -x).collect();
                    velocities.push(v);
                    velocities.push(neg);
                }
            }
            for (sy, sz) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                velocities.push(vec![1, sy, sz]);
                velocities.push(vec![-1, -sy, -sz]);
            }
            let mut weights = vec![8.0 / 27.0];
            weights.extend(std::iter::repeat(2.0 / 27.0).take(6));
            weights.extend(std::iter::repeat(1.0 / 54.0).take(12));
            weights.extend(std::iter::repeat(1.0 / 216.0).take(8));
            (3, velocities, weights)
        }
    };

    let model = LatticeModel {
        name,
        dimension,
        velocities,
        weights,
        sound_speed_sq: 1.0 / 3.0,
    };
    debug_assert!(model.check_invariants().is_ok());
    model
}

impl LatticeModel {
    /// Number of discrete velocities M.
    pub fn directions(&self) -> usize {
        self.velocities.len()
    }

    /// Indices of the nonzero velocities.
    pub fn nonzero_directions(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.velocities.len()).filter(move |&i| self.velocities[i].iter().any(|&c| c != 0))
    }

    /// Index of the direction with velocity `-c_i`.
    pub fn opposite(&self, i: usize) -> usize {
        let neg: Vec<i32> = self.velocities[i].iter().map(|x| -x).collect();
        self.velocities
            .iter()
            .position(|v| *v == neg)
            .expect("velocity set is closed under negation")
    }

    pub fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| w <= 0.0) {
            return Err(QlbmError::BadWeights(format!(
                "weights of {} do not form a distribution",
                self.name
            )));
        }
        if self.velocities[0].iter().any(|&c| c != 0) {
            return Err(QlbmError::BadWeights(
                "rest velocity must be listed first".into(),
            ));
        }
        for i in 1..self.velocities.len() {
            let neg: Vec<i32> = self.velocities[i].iter().map(|x| -x).collect();
            if !self.velocities.contains(&neg) {
                return Err(QlbmError::BadWeights(format!(
                    "velocity {:?} has no negation partner",
                    self.velocities[i]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_models_satisfy_invariants() {
        for name in [
            ModelName::D2Q5,
            ModelName::D2Q9,
            ModelName::D3Q7,
            ModelName::D3Q19,
            ModelName::D3Q27,
        ] {
            let m = make_model(name);
            m.check_invariants().unwrap();
            assert_eq!(m.velocities.len(), m.weights.len());
            assert!(m.velocities.iter().all(|v| v.len() == m.dimension));
        }
    }

    #[test]
    fn d3q7_weights_forced_by_prep_amplitudes() {
        // Squaring the uniform-preparation amplitudes [1/2, 1/(2 sqrt 2) x 6]
        // gives k0 = 1/4 and 1/8 for each axis direction.
        let m = make_model(ModelName::D3Q7);
        assert_eq!(m.directions(), 7);
        assert_abs_diff_eq!(m.weights[0], 0.25, epsilon = 1e-15);
        for i in 1..7 {
            assert_abs_diff_eq!(m.weights[i], 0.125, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m.sound_speed_sq, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(m.velocities[0], vec![0, 0, 0]);
        assert_eq!(m.velocities[1], vec![1, 0, 0]);
        assert_eq!(m.velocities[2], vec![-1, 0, 0]);
        assert_eq!(m.velocities[3], vec![0, 1, 0]);
    }

    #[test]
    fn d2q5_velocities_and_weights() {
        let m = make_model(ModelName::D2Q5);
        assert_eq!(m.directions(), 5);
        assert_abs_diff_eq!(m.weights[0], 1.0 / 3.0, epsilon = 1e-15);
        for i in 1..5 {
            assert_abs_diff_eq!(m.weights[i], 1.0 / 6.0, epsilon = 1e-15);
        }
        // velocity pairing: (1,0) has (-1,0)
        assert_eq!(m.opposite(1), 2);
        assert_eq!(m.opposite(3), 4);
    }

    #[test]
    fn unknown_model_name_rejected() {
        assert!(ModelName::parse("d4q9").is_err());
        assert_eq!(ModelName::parse("D3Q19").unwrap(), ModelName::D3Q19);
    }

    #[test]
    fn d3q19_and_d3q27_direction_counts() {
        assert_eq!(make_model(ModelName::D3Q19).directions(), 19);
        assert_eq!(make_model(ModelName::D3Q27).directions(), 27);
        let m27 = make_model(ModelName::D3Q27);
        assert_eq!(m27.nonzero_directions().count(), 26);
    }
}
