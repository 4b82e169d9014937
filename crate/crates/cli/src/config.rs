//! Experiment configuration files.
//!
//! Flat `key = value` text, one setting per line, `#` comments, commas for
//! lists. Unknown and duplicate keys are errors, so typos fail loudly instead
//! of silently running with defaults. `to_text` emits keys in a fixed
//! canonical order with normalized spacing; serializing a parsed file is
//! idempotent after one normalization pass.

use std::fmt;
use std::path::Path;

use transvect_core::{RegistrationConfig, Scheme, Variant};

/// Settings shared by every subcommand: kernel, discretization, optimizer,
/// and study axes (regularization weights and operator variants).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Kernel width.
    pub sigma: f64,
    /// Regularization weights to sweep; at least one.
    pub alpha_squared: Vec<f64>,
    /// Integration steps per unit time.
    pub n_steps: usize,
    pub scheme: Scheme,
    /// Control-grid spacing; defaults to `sigma` when the key is absent.
    pub control_point_spacing: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub initial_step: f64,
    pub freeze_control_points: bool,
    /// Operator variants to evaluate; at least one.
    pub variants: Vec<Variant>,
    /// Parallel-transport rungs.
    pub n_rungs: usize,
    /// Seed for synthetic data generation.
    pub seed: u64,
    /// Default output directory when a subcommand is not given `--out`.
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sigma: 1.0,
            alpha_squared: vec![1.0],
            n_steps: 10,
            scheme: Scheme::Rk2,
            control_point_spacing: 1.0,
            max_iterations: 200,
            convergence_tol: 1e-6,
            initial_step: 1e-2,
            freeze_control_points: false,
            variants: vec![Variant::WithResidual, Variant::WithoutResidual],
            n_rungs: 1,
            seed: 42,
            output_dir: String::from("."),
        }
    }
}

impl ExperimentConfig {
    /// The registration settings for one regularization weight.
    pub fn registration(&self, alpha_squared: f64) -> RegistrationConfig {
        RegistrationConfig {
            sigma: self.sigma,
            alpha_squared,
            n_steps: self.n_steps,
            scheme: self.scheme,
            control_point_spacing: self.control_point_spacing,
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            initial_step: self.initial_step,
            freeze_control_points: self.freeze_control_points,
        }
    }

    /// Canonical text form: fixed key order, `key = value`, lists joined by
    /// `", "`. Floats use the shortest representation that round-trips.
    pub fn to_text(&self) -> String {
        let alpha = self
            .alpha_squared
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let variants = self
            .variants
            .iter()
            .map(|v| v.name())
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "sigma = {}\n\
             alpha_squared = {}\n\
             n_steps = {}\n\
             scheme = {}\n\
             control_point_spacing = {}\n\
             max_iterations = {}\n\
             convergence_tol = {}\n\
             initial_step = {}\n\
             freeze_control_points = {}\n\
             variants = {}\n\
             n_rungs = {}\n\
             seed = {}\n\
             output_dir = {}\n",
            self.sigma,
            alpha,
            self.n_steps,
            scheme_name(self.scheme),
            self.control_point_spacing,
            self.max_iterations,
            self.convergence_tol,
            self.initial_step,
            self.freeze_control_points,
            variants,
            self.n_rungs,
            self.seed,
            self.output_dir,
        )
    }
}

fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Euler => "euler",
        Scheme::Rk2 => "rk2",
    }
}

/// Malformed configuration text; `line` is 1-based.
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| config_error(line, format!("invalid number '{value}' for {key}")))?;
    if !x.is_finite() || x <= 0.0 {
        return Err(config_error(line, format!("{key} must be positive and finite, got '{value}'")));
    }
    Ok(x)
}

/// Parses configuration text; missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut spacing_given = false;
    let mut seen: Vec<&str> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line_no, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();

        if seen.contains(&key) {
            return Err(config_error(line_no, format!("duplicate key '{key}'")));
        }

        match key {
            "sigma" => cfg.sigma = parse_positive(line_no, key, value)?,
            "alpha_squared" => {
                let mut alphas = Vec::new();
                for item in value.split(',') {
                    alphas.push(parse_positive(line_no, key, item.trim())?);
                }
                if alphas.is_empty() {
                    return Err(config_error(line_no, "alpha_squared list must be non-empty"));
                }
                cfg.alpha_squared = alphas;
            }
            "n_steps" => {
                cfg.n_steps = value
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| {
                        config_error(line_no, format!("n_steps must be a positive integer, got '{value}'"))
                    })?;
            }
            "scheme" => {
                cfg.scheme = match value {
                    "euler" => Scheme::Euler,
                    "rk2" => Scheme::Rk2,
                    other => {
                        return Err(config_error(
                            line_no,
                            format!("scheme must be 'euler' or 'rk2', got '{other}'"),
                        ))
                    }
                };
            }
            "control_point_spacing" => {
                cfg.control_point_spacing = parse_positive(line_no, key, value)?;
                spacing_given = true;
            }
            "max_iterations" => {
                cfg.max_iterations = value
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| {
                        config_error(
                            line_no,
                            format!("max_iterations must be a positive integer, got '{value}'"),
                        )
                    })?;
            }
            "convergence_tol" => cfg.convergence_tol = parse_positive(line_no, key, value)?,
            "initial_step" => cfg.initial_step = parse_positive(line_no, key, value)?,
            "freeze_control_points" => {
                cfg.freeze_control_points = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(config_error(
                            line_no,
                            format!("freeze_control_points must be 'true' or 'false', got '{other}'"),
                        ))
                    }
                };
            }
            "variants" => {
                let mut variants = Vec::new();
                for item in value.split(',') {
                    variants.push(match item.trim() {
                        "with_residual" => Variant::WithResidual,
                        "without_residual" => Variant::WithoutResidual,
                        other => {
                            return Err(config_error(
                                line_no,
                                format!(
                                    "variant must be 'with_residual' or 'without_residual', got '{other}'"
                                ),
                            ))
                        }
                    });
                }
                if variants.is_empty() {
                    return Err(config_error(line_no, "variants list must be non-empty"));
                }
                cfg.variants = variants;
            }
            "n_rungs" => {
                cfg.n_rungs = value
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| {
                        config_error(line_no, format!("n_rungs must be a positive integer, got '{value}'"))
                    })?;
            }
            "seed" => {
                cfg.seed = value.parse().map_err(|_| {
                    config_error(line_no, format!("seed must be an unsigned integer, got '{value}'"))
                })?;
            }
            "output_dir" => {
                if value.is_empty() {
                    return Err(config_error(line_no, "output_dir must not be empty"));
                }
                cfg.output_dir = value.to_string();
            }
            other => return Err(config_error(line_no, format!("unknown key '{other}'"))),
        }

        seen.push(key);
    }

    if !spacing_given {
        cfg.control_point_spacing = cfg.sigma;
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, crate::CliError> {
    let text = std::fs::read_to_string(&path).map_err(crate::CliError::Io)?;
    parse_config(&text).map_err(crate::CliError::Config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn serialization_is_idempotent_after_one_normalization() {
        let messy = "# experiment\nseed=7\n  sigma =  0.5\nalpha_squared = 0.01,1,100\n";
        let once = parse_config(messy).unwrap();
        let normalized = once.to_text();
        let twice = parse_config(&normalized).unwrap();
        assert_eq!(twice, once);
        assert_eq!(twice.to_text(), normalized);
    }

    #[test]
    fn spacing_defaults_to_sigma_when_absent() {
        let cfg = parse_config("sigma = 0.25\n").unwrap();
        assert_eq!(cfg.control_point_spacing, 0.25);
        let explicit = parse_config("sigma = 0.25\ncontrol_point_spacing = 2\n").unwrap();
        assert_eq!(explicit.control_point_spacing, 2.0);
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let err = parse_config("sigma = 1\nsigmaa = 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("sigmaa"), "{}", err.message);
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse_config("sigma = 1\n# other\nsigma = 2\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate"), "{}", err.message);
    }

    #[test]
    fn empty_alpha_list_is_rejected() {
        assert!(parse_config("alpha_squared = \n").is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(parse_config("sigma = -1\n").is_err());
        assert!(parse_config("sigma = nan\n").is_err());
        assert!(parse_config("n_steps = 0\n").is_err());
        assert!(parse_config("scheme = rk4\n").is_err());
        assert!(parse_config("freeze_control_points = yes\n").is_err());
        assert!(parse_config("variants = both\n").is_err());
        assert!(parse_config("seed = -3\n").is_err());
        assert!(parse_config("not a setting\n").is_err());
    }

    #[test]
    fn lists_and_variants_parse() {
        let cfg = parse_config(
            "alpha_squared = 0.01, 1, 100, 1e6\nvariants = without_residual\nscheme = euler\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha_squared, vec![0.01, 1.0, 100.0, 1e6]);
        assert_eq!(cfg.variants, vec![Variant::WithoutResidual]);
        assert_eq!(cfg.scheme, Scheme::Euler);
    }

    #[test]
    fn registration_settings_carry_over() {
        let cfg = parse_config("sigma = 0.4\nn_steps = 12\nfreeze_control_points = true\n").unwrap();
        let reg = cfg.registration(0.5);
        assert_eq!(reg.sigma, 0.4);
        assert_eq!(reg.alpha_squared, 0.5);
        assert_eq!(reg.n_steps, 12);
        assert_eq!(reg.control_point_spacing, 0.4);
        assert!(reg.freeze_control_points);
    }
}
