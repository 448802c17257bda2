//! Experiment configuration: defaults, validation, key=value config files
//! and flag-style value parsing shared with the CLI.

use std::path::PathBuf;

use crate::error::{QlbmError, Result};
use crate::lbm::field::InitialCondition;
use crate::lbm::grid::Grid;
use crate::lbm::lattice::{make_model, ModelName};
use crate::lbm::velocity::VelocityField;
use crate::qsim::layout::DirectionEncoding;
use crate::qsim::noise::NoiseParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RunMode {
    PerStepReadout,
    SingleCircuit,
}

impl RunMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "per-step" | "per_step" | "per-step-readout" => Ok(RunMode::PerStepReadout),
            "single-circuit" | "single_circuit" => Ok(RunMode::SingleCircuit),
            other => Err(QlbmError::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum LoaderSpec {
    Exact,
    Mps { chi: usize, layers: usize },
}

impl LoaderSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "exact" {
            return Ok(LoaderSpec::Exact);
        }
        if let Some(rest) = s.strip_prefix("mps:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                let chi = parts[0]
                    .parse()
                    .map_err(|_| QlbmError::InvalidConfig(format!("bad chi in '{s}'")))?;
                let layers = parts[1]
                    .parse()
                    .map_err(|_| QlbmError::InvalidConfig(format!("bad layers in '{s}'")))?;
                return Ok(LoaderSpec::Mps { chi, layers });
            }
        }
        Err(QlbmError::InvalidConfig(format!(
            "loader must be 'exact' or 'mps:chi,layers', got '{s}'"
        )))
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentConfig {
    pub model: ModelName,
    pub grid_dims: Vec<usize>,
    pub velocity: VelocityField,
    pub initial: InitialCondition,
    pub steps: usize,
    pub mode: RunMode,
    pub encoding: DirectionEncoding,
    pub loader: LoaderSpec,
    /// 0 means exact distributions.
    pub shots: u64,
    pub noise: NoiseParams,
    /// Flag checkpoints per step (one after each of the first k streaming
    /// directions).
    pub flag_checks: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelName::D2Q5,
            grid_dims: vec![16, 16],
            velocity: VelocityField::Uniform(vec![0.125, 0.125]),
            initial: InitialCondition::Gaussian {
                mean: vec![8.0, 8.0],
                cov: crate::lbm::field::isotropic_cov(2, 2.0),
            },
            steps: 10,
            mode: RunMode::PerStepReadout,
            encoding: DirectionEncoding::OneHot,
            loader: LoaderSpec::Mps { chi: 2, layers: 2 },
            shots: 0,
            noise: NoiseParams::OFF,
            flag_checks: 0,
            seed: 1,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.grid_dims)
    }

    pub fn validate(&self) -> Result<()> {
        let model = make_model(self.model);
        let grid = self.grid()?;
        if grid.dimension() != model.dimension {
            return Err(QlbmError::InvalidConfig(format!(
                "{} needs a {}-dimensional grid, got {}",
                model.name,
                model.dimension,
                grid.dimension()
            )));
        }
        self.noise.validate()?;
        match &self.velocity {
            VelocityField::Uniform(u) if u.len() != model.dimension => {
                return Err(QlbmError::InvalidConfig(
                    "uniform velocity dimension mismatch".into(),
                ));
            }
            VelocityField::Swirl2d if self.model != ModelName::D2Q5 => {
                return Err(QlbmError::InvalidConfig(
                    "the 2D swirl field is synthesized for D2Q5".into(),
                ));
            }
            VelocityField::Swirl3d if self.model != ModelName::D3Q7 => {
                return Err(QlbmError::InvalidConfig(
                    "the 3D swirl field is synthesized for D3Q7".into(),
                ));
            }
            _ => {}
        }
        if self.mode == RunMode::PerStepReadout
            && !matches!(self.initial, InitialCondition::Gaussian { .. })
        {
            return Err(QlbmError::InvalidConfig(
                "per-step readout parameterizes a Gaussian; use mode=single-circuit for other initial conditions".into(),
            ));
        }
        if self.flag_checks > 0 {
            if self.encoding != DirectionEncoding::OneHot {
                return Err(QlbmError::InvalidConfig(
                    "flag checks require the one-hot encoding".into(),
                ));
            }
            if self.mode == RunMode::SingleCircuit {
                return Err(QlbmError::InvalidConfig(
                    "flag checks need fresh ancillas per step; use per-step mode".into(),
                ));
            }
            let nonzero = model.nonzero_directions().count();
            if self.flag_checks > nonzero {
                return Err(QlbmError::InvalidConfig(format!(
                    "at most {nonzero} flag checkpoints for {}",
                    model.name
                )));
            }
        }
        if self.mode == RunMode::SingleCircuit && !self.noise.is_off() {
            return Err(QlbmError::InvalidConfig(
                "the noise model applies to per-step readout runs".into(),
            ));
        }
        if let LoaderSpec::Mps { chi, layers } = self.loader {
            if chi < 1 || layers < 1 {
                return Err(QlbmError::InvalidConfig(
                    "mps loader needs chi >= 1 and layers >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Apply one `key=value` assignment (config-file line or flag mirror).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = ModelName::parse(value)?,
            "grid" => self.grid_dims = parse_grid_dims(value)?,
            "field" => self.velocity = parse_field(value)?,
            "init" => self.initial = parse_init(value)?,
            "steps" => self.steps = parse_num(key, value)?,
            "mode" => self.mode = RunMode::parse(value)?,
            "encoding" => self.encoding = DirectionEncoding::parse(value)?,
            "loader" => self.loader = LoaderSpec::parse(value)?,
            "shots" => self.shots = parse_num(key, value)?,
            "noise-lambda" => self.noise.lambda = parse_num(key, value)?,
            "noise-background" => self.noise.background = parse_num(key, value)?,
            "flag-checks" => self.flag_checks = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(QlbmError::InvalidConfig(format!(
                    "unknown config key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Parse a config file of `key=value` lines (# starts a comment).
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                QlbmError::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| QlbmError::InvalidConfig(format!("bad value '{value}' for {key}")))
}

pub fn parse_grid_dims(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X'])
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| QlbmError::InvalidConfig(format!("bad grid '{s}'")))
        })
        .collect()
}

pub fn parse_field(s: &str) -> Result<VelocityField> {
    let lower = s.to_ascii_lowercase();
    if lower == "swirl2d" {
        return Ok(VelocityField::Swirl2d);
    }
    if lower == "swirl3d" {
        return Ok(VelocityField::Swirl3d);
    }
    if let Some(rest) = lower.strip_prefix("uniform:") {
        let u: std::result::Result<Vec<f64>, _> =
            rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
        return u
            .map(VelocityField::Uniform)
            .map_err(|_| QlbmError::InvalidConfig(format!("bad field '{s}'")));
    }
    Err(QlbmError::InvalidConfig(format!(
        "field must be uniform:ux,uy[,uz], swirl2d or swirl3d; got '{s}'"
    )))
}

pub fn parse_init(s: &str) -> Result<InitialCondition> {
    let lower = s.to_ascii_lowercase();
    if lower == "sin2d" {
        return Ok(InitialCondition::Sin2d);
    }
    if lower == "sin3d" {
        return Ok(InitialCondition::Sin3d);
    }
    if let Some(rest) = lower.strip_prefix("gaussian:") {
        let nums: std::result::Result<Vec<f64>, _> =
            rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|_| QlbmError::InvalidConfig(format!("bad init '{s}'")))?;
        if nums.len() < 2 {
            return Err(QlbmError::InvalidConfig(
                "gaussian init needs mx,my[,mz],sigma".into(),
            ));
        }
        let (mean, sigma) = nums.split_at(nums.len() - 1);
        return Ok(InitialCondition::Gaussian {
            mean: mean.to_vec(),
            cov: crate::lbm::field::isotropic_cov(mean.len(), sigma[0]),
        });
    }
    Err(QlbmError::InvalidConfig(format!(
        "init must be gaussian:means...,sigma / sin2d / sin3d; got '{s}'"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn per_step_rejects_sinusoidal_init() {
        let mut cfg = ExperimentConfig::default();
        cfg.initial = InitialCondition::Sin2d;
        assert!(matches!(cfg.validate(), Err(QlbmError::InvalidConfig(_))));
        cfg.mode = RunMode::SingleCircuit;
        cfg.validate().unwrap();
    }

    #[test]
    fn config_file_roundtrip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(
            "# comment\n\
             model = d3q7\n\
             grid = 8x8x8\n\
             field = swirl3d\n\
             init = sin3d\n\
             mode = single-circuit\n\
             steps = 20\n\
             loader = exact\n\
             seed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.model, ModelName::D3Q7);
        assert_eq!(cfg.grid_dims, vec![8, 8, 8]);
        assert_eq!(cfg.velocity, VelocityField::Swirl3d);
        assert_eq!(cfg.steps, 20);
        assert_eq!(cfg.loader, LoaderSpec::Exact);
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_keys_and_values_rejected() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply_file("turbo=yes").is_err());
        assert!(cfg.set("steps", "many").is_err());
        assert!(parse_field("vortex").is_err());
        assert!(parse_init("gaussian:8").is_err());
    }

    #[test]
    fn swirl_model_pairing_enforced() {
        let mut cfg = ExperimentConfig::default();
        cfg.velocity = VelocityField::Swirl2d;
        cfg.initial = InitialCondition::Sin2d;
        cfg.mode = RunMode::SingleCircuit;
        cfg.model = ModelName::D2Q9;
        assert!(cfg.validate().is_err());
        cfg.model = ModelName::D2Q5;
        cfg.validate().unwrap();
    }

    #[test]
    fn flag_checks_capped_by_directions() {
        let mut cfg = ExperimentConfig::default();
        cfg.flag_checks = 5; // D2Q5 has 4 nonzero directions
        assert!(cfg.validate().is_err());
        cfg.flag_checks = 4;
        cfg.validate().unwrap();
    }
}
