use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    NelderMead,
    Subplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbcConfig {
    /// Number of food sources (SN).
    pub population: usize,
    /// Trials without improvement before a source is abandoned; `None`
    /// means `population · dim`.
    pub limit: Option<usize>,
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            population: 40,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalConfig {
    pub method: LocalMethod,
    /// Initial simplex edge length in cube units.
    pub init_step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub subspace_min: usize,
    pub subspace_max: usize,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            method: LocalMethod::Subplex,
            init_step: 0.1,
            x_tol: 1e-4,
            f_tol: 1e-8,
            subspace_min: 2,
            subspace_max: 5,
        }
    }
}

/// Optimizer settings. `budget` caps the objective evaluations of one call;
/// [`two_stage`](super::two_stage) gives `stage_split` of it to the global
/// stage and the remainder to the local stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    pub budget: usize,
    pub stage_split: f64,
    pub abc: AbcConfig,
    pub local: LocalConfig,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            budget: 4000,
            stage_split: 0.6,
            abc: AbcConfig::default(),
            local: LocalConfig::default(),
            seed: 0,
        }
    }
}

impl OptimConfig {
    pub fn with_budget(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.abc.population < 4 {
            return Err(Error::InvalidConfig(format!(
                "population {} is below 4",
                self.abc.population
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.stage_split) {
            return Err(Error::InvalidConfig(format!(
                "stage_split {} outside [0, 1]",
                self.stage_split
            )));
        }
        let l = &self.local;
        if !(2 <= l.subspace_min && l.subspace_min <= l.subspace_max) {
            return Err(Error::InvalidConfig(format!(
                "subspace bounds [{}, {}] invalid",
                l.subspace_min, l.subspace_max
            )));
        }
        if !(l.init_step > 0.0 && l.init_step <= 1.0) || l.x_tol < 0.0 || l.f_tol < 0.0 {
            return Err(Error::InvalidConfig("local tolerances/step invalid".into()));
        }
        Ok(())
    }

    /// Evaluations given to the global stage of a two-stage run.
    pub fn global_evals(&self) -> usize {
        ((self.budget as f64 * self.stage_split).round() as usize).min(self.budget)
    }

    pub fn local_evals(&self) -> usize {
        self.budget - self.global_evals()
    }

    /// This configuration restricted to the global stage's share.
    pub fn global_stage(&self) -> OptimConfig {
        OptimConfig {
            budget: self.global_evals(),
            ..self.clone()
        }
    }

    /// This configuration restricted to the local stage's share.
    pub fn local_stage(&self) -> OptimConfig {
        OptimConfig {
            budget: self.local_evals(),
            ..self.clone()
        }
    }

    pub fn limit_for(&self, dim: usize) -> usize {
        self.abc.limit.unwrap_or(self.abc.population * dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_split() {
        let c = OptimConfig::with_budget(1000, 0);
        assert_eq!(c.global_evals(), 600);
        assert_eq!(c.local_evals(), 400);
        assert_eq!(c.global_stage().budget + c.local_stage().budget, 1000);
        assert_eq!(c.limit_for(4), 160);
    }

    #[test]
    fn validation() {
        let mut c = OptimConfig::default();
        assert!(c.validate().is_ok());
        c.abc.population = 3;
        assert!(c.validate().is_err());
        let mut c = OptimConfig::default();
        c.local.subspace_min = 6;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_defaults_fill_missing_fields() {
        let c: OptimConfig =
            serde_json::from_str(r#"{"budget": 500, "local": {"method": "nelder_mead"}}"#).unwrap();
        assert_eq!(c.budget, 500);
        assert_eq!(c.local.method, LocalMethod::NelderMead);
        assert_eq!(c.local.subspace_max, 5);
        assert_eq!(c.abc.population, 40);
    }
}
