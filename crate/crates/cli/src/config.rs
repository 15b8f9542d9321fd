//! Problem configuration files.

use std::path::Path;

use bdm_core::potential::PotentialSpec;
use bdm_core::traces::AnglePair;
use bdm_core::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values_re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values_im: Option<Vec<f64>>,
    },
    Sampled {
        grid: Vec<f64>,
        values_re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values_im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleConfig {
    pub theta0_re: f64,
    #[serde(default)]
    pub theta0_im: f64,
    #[serde(rename = "thetaR_re")]
    pub theta_r_re: f64,
    #[serde(rename = "thetaR_im", default)]
    pub theta_r_im: f64,
}

impl AngleConfig {
    pub fn pair(&self) -> AnglePair {
        AnglePair::new(
            Complex64::new(self.theta0_re, self.theta0_im),
            Complex64::new(self.theta_r_re, self.theta_r_im),
        )
    }
}

/// Either an explicit list of `[re, im]` points or a uniform rectangle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZGrid {
    Points(Vec<[f64; 2]>),
    Rect {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        n_re: usize,
        n_im: usize,
    },
}

impl ZGrid {
    pub fn points(&self) -> Vec<Complex64> {
        match self {
            ZGrid::Points(p) => p.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            ZGrid::Rect { re_min, re_max, im_min, im_max, n_re, n_im } => {
                let lin = |a: f64, b: f64, n: usize, i: usize| {
                    if n <= 1 {
                        a
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                };
                let mut out = Vec::with_capacity(n_re * n_im);
                for j in 0..*n_im {
                    for i in 0..*n_re {
                        out.push(Complex64::new(lin(*re_min, *re_max, *n_re, i), lin(*im_min, *im_max, *n_im, j)));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(default = "zero_potential")]
    pub potential: PotentialConfig,
    pub theta: AngleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_prime: Option<AngleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<ZGrid>,
}

fn zero_potential() -> PotentialConfig {
    PotentialConfig::Zero
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn complex_values(re: &[f64], im: &Option<Vec<f64>>) -> Result<Vec<Complex64>, ConfigError> {
    match im {
        None => Ok(re.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
        Some(im) if im.len() == re.len() => Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()),
        Some(im) => Err(ConfigError::Invalid(format!(
            "values_re has {} entries but values_im has {}",
            re.len(),
            im.len()
        ))),
    }
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ProblemConfig = serde_json::from_str(text)?;
        cfg.potential()?;
        if let Some(t) = cfg.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::Invalid(format!("tol must be positive, got {t}")));
            }
        }
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<PotentialSpec, ConfigError> {
        let spec = match &self.potential {
            PotentialConfig::Zero => PotentialSpec::zero(self.r),
            PotentialConfig::PiecewiseConstant { breakpoints, values_re, values_im } => {
                PotentialSpec::piecewise_constant(self.r, breakpoints.clone(), complex_values(values_re, values_im)?)
            }
            PotentialConfig::Sampled { grid, values_re, values_im } => {
                PotentialSpec::sampled(self.r, grid.clone(), complex_values(values_re, values_im)?)
            }
        };
        spec.map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn pair(&self) -> AnglePair {
        self.theta.pair()
    }

    pub fn primed(&self) -> Option<AnglePair> {
        self.theta_prime.map(|a| a.pair())
    }
}
