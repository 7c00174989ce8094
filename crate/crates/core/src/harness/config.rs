use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::{Materials, Physics, ProblemSpec};
use crate::lspg::GaussNewtonConfig;
use crate::pod::ReferenceChoice;
use crate::precond::PreconditionerKind;

/// Train/test sweep description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: Physics,
    /// Full problem description; the built-in beam for `problem` when absent.
    pub spec: Option<ProblemSpec>,
    /// Sampled parameters, by name, as `[lo, hi]`.
    pub ranges: BTreeMap<String, [f64; 2]>,
    pub training_cases: usize,
    pub testing_cases: usize,
    pub dims: Vec<usize>,
    pub kinds: Vec<PreconditionerKind>,
    pub seed: u64,
    /// Test on the training parameters instead of a fresh sample.
    pub replay_training: bool,
    pub reference: ReferenceChoice,
    pub gauss_newton: GaussNewtonConfig,
    /// Worker threads for the cell pool; all cores when absent.
    pub threads: Option<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self::thermomechanical()
    }
}

impl StudyConfig {
    pub fn mechanical() -> Self {
        Self {
            problem: Physics::Mechanical,
            spec: None,
            ranges: BTreeMap::from([
                ("E_b".to_string(), [1.27725e11, 2.12875e11]),
                ("nu_b".to_string(), [0.24, 0.4]),
            ]),
            training_cases: 5,
            testing_cases: 4,
            dims: vec![2, 4, 8, 16, 32],
            kinds: PreconditionerKind::ALL.to_vec(),
            seed: 2024,
            replay_training: false,
            reference: ReferenceChoice::Initial,
            gauss_newton: GaussNewtonConfig::default(),
            threads: None,
        }
    }

    pub fn thermomechanical() -> Self {
        Self {
            problem: Physics::Thermomechanical,
            ranges: BTreeMap::from([
                ("E_b".to_string(), [1.27725e9, 2.12875e9]),
                ("nu_b".to_string(), [0.24, 0.4]),
                ("rho_b".to_string(), [5.94e-5, 9.9e-5]),
                ("T_ref_b".to_string(), [219.75, 366.25]),
            ]),
            ..Self::mechanical()
        }
    }

    pub fn for_physics(physics: Physics) -> Self {
        match physics {
            Physics::Mechanical => Self::mechanical(),
            Physics::Thermomechanical => Self::thermomechanical(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        self.spec.clone().unwrap_or_else(|| match self.problem {
            Physics::Mechanical => ProblemSpec::mechanical_beam(),
            Physics::Thermomechanical => ProblemSpec::thermomechanical_beam(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in &self.ranges {
            if !Materials::NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown parameter '{name}'")));
            }
            if !(lo < hi) {
                return Err(Error::Config(format!("range of {name} is degenerate: [{lo}, {hi}]")));
            }
        }
        if self.training_cases == 0 || (!self.replay_training && self.testing_cases == 0) {
            return Err(Error::Config("need at least one training and one testing case".into()));
        }
        if self.dims.is_empty() || self.dims[0] == 0 || self.dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("dims must be positive and strictly ascending".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("at least one preconditioner kind is required".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.gauss_newton.validate()?;
        let spec = self.problem_spec();
        spec.schedule.validate()?;
        spec.newton.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for cfg in [StudyConfig::mechanical(), StudyConfig::thermomechanical()] {
            cfg.validate().unwrap();
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(StudyConfig::from_toml_str(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let cfg = StudyConfig::from_toml_str("dims = [1, 3]\nkinds = [\"none\", \"ideal\"]\nseed = 5\n").unwrap();
        assert_eq!(cfg.dims, vec![1, 3]);
        assert_eq!(cfg.kinds, vec![PreconditionerKind::None, PreconditionerKind::Ideal]);
        assert_eq!(cfg.problem, Physics::Thermomechanical);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = StudyConfig::mechanical();
        c.dims = vec![4, 2];
        assert!(c.validate().is_err());
        let mut c = StudyConfig::mechanical();
        c.ranges.insert("E_b".into(), [2.0, 1.0]);
        assert!(c.validate().is_err());
        let mut c = StudyConfig::mechanical();
        c.ranges.insert("bogus".into(), [0.0, 1.0]);
        assert!(c.validate().is_err());
    }
}
