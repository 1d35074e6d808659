use std::path::Path;

use qpoly_core::qspecial::PrecisionBudget;
use serde::Deserialize;

use crate::error::CliError;

pub const DIGITS_ENV: &str = "QPOLY_PRECISION_DIGITS";

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub rel_tol: Option<f64>,
    pub digits: Option<u32>,
    pub max_terms: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Flag(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Flag(format!("bad config {}: {e}", path.display())))
    }
}

/// Budget overrides from the command line.
#[derive(Debug, Default, Clone, Copy)]
pub struct FlagBudget {
    pub rel_tol: Option<f64>,
    pub digits: Option<u32>,
    pub max_terms: Option<usize>,
}

/// Defaults, then the environment, then the config file, then flags.
pub fn resolve_budget(
    env_digits: Option<&str>,
    file: &FileConfig,
    flags: FlagBudget,
) -> Result<PrecisionBudget, CliError> {
    let mut b = PrecisionBudget::default();
    if let Some(raw) = env_digits {
        b.digits = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Flag(format!("{DIGITS_ENV} must be a positive integer, got {raw:?}")))?;
    }
    if let Some(v) = file.rel_tol {
        b.rel_tol = v;
    }
    if let Some(v) = file.digits {
        b.digits = v;
    }
    if let Some(v) = file.max_terms {
        b.max_terms = v;
    }
    if let Some(v) = flags.rel_tol {
        b.rel_tol = v;
    }
    if let Some(v) = flags.digits {
        b.digits = v;
    }
    if let Some(v) = flags.max_terms {
        b.max_terms = v;
    }
    b.validate().map_err(|e| CliError::Flag(e.to_string()))?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file = FileConfig {
            rel_tol: Some(1e-15),
            digits: Some(40),
            max_terms: None,
        };
        let b = resolve_budget(Some("60"), &FileConfig::default(), FlagBudget::default()).unwrap();
        assert_eq!(b.digits, 60);
        let b = resolve_budget(Some("60"), &file, FlagBudget::default()).unwrap();
        assert_eq!((b.digits, b.rel_tol, b.max_terms), (40, 1e-15, 100_000));
        let flags = FlagBudget {
            digits: Some(80),
            ..Default::default()
        };
        assert_eq!(resolve_budget(Some("60"), &file, flags).unwrap().digits, 80);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(resolve_budget(Some("many"), &FileConfig::default(), FlagBudget::default()).is_err());
        let flags = FlagBudget {
            rel_tol: Some(-1.0),
            ..Default::default()
        };
        assert!(resolve_budget(None, &FileConfig::default(), flags).is_err());
        assert!(toml::from_str::<FileConfig>("precision = 3").is_err());
        let f: FileConfig = toml::from_str("rel_tol = 1e-12\nmax_terms = 500\n").unwrap();
        assert_eq!(f.max_terms, Some(500));
    }
}
