//! TOML run settings. Every key is optional; command-line flags win.
//!
//! ```toml
//! lambda0 = 0.01
//! n_modes = 20
//! workers = 4
//! omega0 = "pi/16"
//! grid_a0 = "0.01:100:40"
//! grid_omega0 = [0.1, 0.2, 0.4]
//! [integrator]
//! richardson_tol = 1e-9
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{parse_number, GridSpec};
use crate::cell::IntegratorConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A number written either as a literal or as a `pi` expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(s) => {
                parse_number(s).ok_or_else(|| Error::invalid("config", format!("bad number `{s}`")))
            }
        }
    }
}

/// A grid axis: `"min:max:count"`, `{ min, max, count }` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValues {
    Spec(String),
    Range(GridSpec),
    List(Vec<Number>),
}

impl GridValues {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridValues::Spec(s) => s.parse::<GridSpec>()?.values(),
            GridValues::Range(g) => g.values(),
            GridValues::List(v) => v.iter().map(Number::value).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    pub a0: Option<Number>,
    pub omega0: Option<Number>,
    pub lambda0: Option<f64>,
    pub n_modes: Option<usize>,
    pub grid_a0: Option<GridValues>,
    pub grid_omega0: Option<GridValues>,
    pub n_list: Option<Vec<usize>>,
    pub length_m: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub integrator: Option<IntegratorConfig>,
}

impl FileSettings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
