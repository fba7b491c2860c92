//! Experiment configuration: flags, optional JSON config file, resolution.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use luders_core::experiments::default_parallelism;
use luders_core::{EngineKind, RandomStream, DEFAULT_GROUP_TOL};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_DELTA: f64 = 0.1;

/// `--marked` value: an index, `none`, or `random`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarkedSpec {
    Index(usize),
    Word(String),
}

impl std::str::FromStr for MarkedSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" | "random" => Ok(Self::Word(s.to_string())),
            _ => s
                .parse()
                .map(Self::Index)
                .map_err(|_| format!("expected an index, 'none' or 'random', got '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Dense,
    Analytic,
}

impl From<Engine> for EngineKind {
    fn from(e: Engine) -> Self {
        match e {
            Engine::Dense => EngineKind::Dense,
            Engine::Analytic => EngineKind::Analytic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum TruthArg {
    #[value(name = "I", alias = "i")]
    I,
    #[value(name = "J", alias = "j")]
    J,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Luders,
    VonNeumann,
}

/// Every setting an experiment can take. Used both as the on-disk config file
/// (all fields optional) and, fully resolved, as the `config` block of every
/// report, so a report's config can be fed back with `--config`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marked: Option<MarkedSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copies: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &PathBuf) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `self` win over `base`.
    pub fn or(self, base: ExperimentConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { ExperimentConfig { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            dim,
            records,
            marked,
            delta,
            a1,
            a2,
            m,
            m_range,
            trials,
            runs,
            copies,
            truth,
            rule,
            verify,
            seed,
            engine,
            group_tol,
            format,
            parallelism
        )
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available CPUs). Results do not depend on it.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Splitting δ; a1 defaults to 1 + δ.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    /// Relative eigenvalue grouping tolerance.
    #[arg(long)]
    pub group_tol: Option<f64>,
}

impl CommonArgs {
    pub fn base(&self) -> Result<ExperimentConfig, CliError> {
        match &self.config {
            Some(p) => ExperimentConfig::load(p),
            None => Ok(ExperimentConfig::default()),
        }
    }

    pub fn overrides(&self) -> ExperimentConfig {
        ExperimentConfig {
            seed: self.seed,
            parallelism: self.parallelism,
            format: self.format,
            delta: self.delta,
            a1: self.a1,
            a2: self.a2,
            group_tol: self.group_tol,
            ..Default::default()
        }
    }
}

/// Observable parameters after defaults.
#[derive(Clone, Copy, Debug)]
pub struct Physics {
    pub delta: f64,
    pub a1: f64,
    pub a2: f64,
    pub group_tol: f64,
}

pub fn resolve_physics(cfg: &mut ExperimentConfig) -> Result<Physics, CliError> {
    let delta = *cfg.delta.get_or_insert(DEFAULT_DELTA);
    if delta == 0.0 || !delta.is_finite() {
        return Err(CliError::Usage(format!(
            "--delta must be nonzero, got {delta}"
        )));
    }
    let a2 = *cfg.a2.get_or_insert(1.0);
    let a1 = *cfg.a1.get_or_insert(a2 + delta);
    let group_tol = *cfg.group_tol.get_or_insert(DEFAULT_GROUP_TOL);
    if group_tol.is_nan() || group_tol <= 0.0 {
        return Err(CliError::Usage(format!(
            "--group-tol must be positive, got {group_tol}"
        )));
    }
    Ok(Physics {
        delta,
        a1,
        a2,
        group_tol,
    })
}

pub fn resolve_seed(cfg: &mut ExperimentConfig) -> u64 {
    *cfg.seed.get_or_insert(0)
}

pub fn resolve_parallelism(cfg: &mut ExperimentConfig) -> Result<usize, CliError> {
    let p = *cfg.parallelism.get_or_insert_with(default_parallelism);
    if p == 0 {
        return Err(CliError::Usage("--parallelism must be at least 1".into()));
    }
    Ok(p)
}

pub fn require_power_of_two(name: &str, n: usize, min: usize) -> Result<(), CliError> {
    if n < min || !n.is_power_of_two() {
        return Err(CliError::Usage(format!(
            "--{name} must be a power of two >= {min}, got {n}"
        )));
    }
    Ok(())
}

pub fn require_positive(name: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

/// Resolves `marked` against a register of `size` records. `random` is drawn
/// from a stream seeded directly by the master seed, before any trial stream
/// is derived, and the resolved index replaces it in the config.
pub fn resolve_marked(
    cfg: &mut ExperimentConfig,
    size: usize,
    default: &str,
    allow_none: bool,
) -> Result<Option<usize>, CliError> {
    let spec = cfg
        .marked
        .clone()
        .unwrap_or_else(|| MarkedSpec::Word(default.to_string()));
    let resolved = match spec {
        MarkedSpec::Index(k) if k < size => Some(k),
        MarkedSpec::Index(k) => {
            return Err(CliError::Usage(format!(
                "--marked {k} out of range for {size} records"
            )))
        }
        MarkedSpec::Word(w) if w == "none" => {
            if !allow_none {
                return Err(CliError::Usage("--marked none is not allowed here".into()));
            }
            None
        }
        MarkedSpec::Word(w) if w == "random" => {
            let seed = resolve_seed(cfg);
            Some(RandomStream::new(seed).below(size as u64) as usize)
        }
        MarkedSpec::Word(w) => {
            return Err(CliError::Usage(format!("invalid --marked value '{w}'")))
        }
    };
    cfg.marked = Some(match resolved {
        Some(k) => MarkedSpec::Index(k),
        None => MarkedSpec::Word("none".into()),
    });
    Ok(resolved)
}

/// Parses `lo..hi` (inclusive).
pub fn parse_m_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--m-range must look like lo..hi, got '{s}'"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    if lo == 0 || hi < lo {
        return Err(CliError::Usage(format!(
            "--m-range needs 1 <= lo <= hi, got {lo}..{hi}"
        )));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marked_spec_parsing() {
        assert_eq!("3".parse::<MarkedSpec>().unwrap(), MarkedSpec::Index(3));
        assert_eq!(
            "none".parse::<MarkedSpec>().unwrap(),
            MarkedSpec::Word("none".into())
        );
        assert!("x".parse::<MarkedSpec>().is_err());
    }

    #[test]
    fn marked_json_forms() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"marked": 5, "records": 8}"#).unwrap();
        assert_eq!(c.marked, Some(MarkedSpec::Index(5)));
        let c: ExperimentConfig = serde_json::from_str(r#"{"marked": "random"}"#).unwrap();
        assert_eq!(c.marked, Some(MarkedSpec::Word("random".into())));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig {
            records: Some(16),
            seed: Some(1),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.records, Some(16));
        assert_eq!(merged.seed, Some(9));
    }

    #[test]
    fn random_marked_is_seed_determined() {
        let mut a = ExperimentConfig {
            seed: Some(7),
            marked: Some(MarkedSpec::Word("random".into())),
            ..Default::default()
        };
        let mut b = a.clone();
        let x = resolve_marked(&mut a, 16, "random", false).unwrap();
        let y = resolve_marked(&mut b, 16, "random", false).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.marked, Some(MarkedSpec::Index(x.unwrap())));
    }

    #[test]
    fn m_range_parsing() {
        assert_eq!(parse_m_range("1..8").unwrap(), (1, 8));
        assert_eq!(parse_m_range("2..=5").unwrap(), (2, 5));
        assert!(parse_m_range("5..2").is_err());
        assert!(parse_m_range("0..2").is_err());
        assert!(parse_m_range("3").is_err());
    }

    #[test]
    fn physics_defaults() {
        let mut c = ExperimentConfig::default();
        let p = resolve_physics(&mut c).unwrap();
        assert!((p.a1 - 1.1).abs() < 1e-15 && p.a2 == 1.0);
        let mut c = ExperimentConfig {
            delta: Some(0.0),
            ..Default::default()
        };
        assert!(resolve_physics(&mut c).is_err());
    }
}
