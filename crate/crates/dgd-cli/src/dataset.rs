//! Dataset container: a versioned JSON file holding the generated design
//! matrix and targets together with the seed and shape that produced them,
//! so every experiment runs against the serialized copy rather than an
//! in-memory regeneration.

use std::fs;
use std::path::Path;

use dgd_core::problems::{
    constants_of, gen_classification_data, gen_pl_data, gen_regression_data, LogisticProblem,
    PLLeastSquares, Problem, RidgeLSProblem, DEFAULT_REGULARIZER,
};
use serde::{Deserialize, Serialize};

use crate::{config_err, CliError};

pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub version: u32,
    /// One of "ridge_ls", "logistic", "pl_ls".
    pub problem: String,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    /// Ridge weight; 0 for the flat least-squares problem.
    pub mu_reg: f64,
    /// Smallest eigenvalue of the row Gram matrix, recorded for the flat
    /// problem where it certifies the gradient-domination constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    /// Row-major m x d design matrix.
    pub a: Vec<f64>,
    /// Targets, labels, or right-hand side depending on the problem.
    pub y: Vec<f64>,
}

pub fn generate(problem: &str, m: usize, d: usize, seed: u64) -> Result<Dataset, CliError> {
    match problem {
        "ridge_ls" => {
            let p = gen_regression_data(m, d, seed).map_err(|e| CliError::Data(e.to_string()))?;
            Ok(Dataset {
                version: DATASET_VERSION,
                problem: problem.to_string(),
                m,
                d,
                seed,
                mu_reg: p.mu_reg(),
                lambda_min: None,
                a: p.a().to_vec(),
                y: p.y().to_vec(),
            })
        }
        "logistic" => {
            let p =
                gen_classification_data(m, d, seed).map_err(|e| CliError::Data(e.to_string()))?;
            Ok(Dataset {
                version: DATASET_VERSION,
                problem: problem.to_string(),
                m,
                d,
                seed,
                mu_reg: p.mu_reg(),
                lambda_min: None,
                a: p.a().to_vec(),
                y: p.y().to_vec(),
            })
        }
        "pl_ls" => {
            let p = gen_pl_data(m, d, seed).map_err(|e| CliError::Data(e.to_string()))?;
            let constants = constants_of(&Problem::Pl(p.clone()), 1e-10)
                .map_err(|e| CliError::Data(e.to_string()))?;
            Ok(Dataset {
                version: DATASET_VERSION,
                problem: problem.to_string(),
                m,
                d,
                seed,
                mu_reg: 0.0,
                lambda_min: Some(constants.zeta),
                a: p.a().to_vec(),
                y: p.b().to_vec(),
            })
        }
        other => Err(config_err(format!(
            "unknown problem '{other}', expected ridge_ls, logistic or pl_ls"
        ))),
    }
}

impl Dataset {
    pub fn problem(&self) -> Result<Problem, CliError> {
        let build = || -> Result<Problem, dgd_core::problems::ProblemError> {
            match self.problem.as_str() {
                "ridge_ls" => Ok(Problem::Ridge(RidgeLSProblem::new(
                    self.m,
                    self.d,
                    self.a.clone(),
                    self.y.clone(),
                    self.mu_reg,
                )?)),
                "logistic" => Ok(Problem::Logistic(LogisticProblem::new(
                    self.m,
                    self.d,
                    self.a.clone(),
                    self.y.clone(),
                    self.mu_reg,
                )?)),
                _ => Ok(Problem::Pl(PLLeastSquares::new(
                    self.m,
                    self.d,
                    self.a.clone(),
                    self.y.clone(),
                )?)),
            }
        };
        if !matches!(self.problem.as_str(), "ridge_ls" | "logistic" | "pl_ls") {
            return Err(CliError::Data(format!("dataset names unknown problem '{}'", self.problem)));
        }
        build().map_err(|e| CliError::Data(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string(self)
            .map_err(|e| CliError::Data(format!("dataset serialization failed: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let ds: Dataset = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if ds.version != DATASET_VERSION {
            return Err(CliError::Data(format!(
                "{}: dataset version {} unsupported (expected {DATASET_VERSION})",
                path.display(),
                ds.version
            )));
        }
        if ds.a.len() != ds.m * ds.d || ds.y.len() != ds.m {
            return Err(CliError::Data(format!(
                "{}: dataset shape fields disagree with array lengths",
                path.display()
            )));
        }
        Ok(ds)
    }
}

/// Default ridge weight used by the generators, re-exported where the CLI
/// needs to print it.
pub fn default_regularizer() -> f64 {
    DEFAULT_REGULARIZER
}
