//! Flat `section.key = value` experiment configuration.
//!
//! Precedence, lowest first: file contents, `ODIA_*` environment variables,
//! explicit overrides (command-line flags).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{db_to_linear, NetworkConfig};
use crate::codebook::CodebookKind;
use crate::error::{Error, Result};
use crate::receiver::GainExponent;
use crate::scheduler::{Algorithm, OutagePolicy, SeOdiaParams};

pub const ENV_PREFIX: &str = "ODIA_";

pub const DEFAULT_RATE_TRIALS: usize = 2000;
pub const DEFAULT_TUNING_TRIALS: usize = 500;
pub const DEFAULT_VALIDATION_SAMPLES: usize = 100_000;
pub const DEFAULT_VALIDATION_TRIALS: usize = 1000;

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "network.K",
    "network.M",
    "network.L",
    "network.N",
    "network.S",
    "network.snr_db",
    "algorithms",
    "sweep.variable",
    "sweep.values",
    "sweep.common_random_numbers",
    "trials",
    "seed",
    "workers",
    "feedback.codebook",
    "feedback.bits",
    "feedback.path",
    "feedback.gain_exponent",
    "feedback.iterations",
    "se_odia.mode",
    "se_odia.eta_I",
    "se_odia.eta_D",
    "se_odia.alpha",
    "se_odia.eps_D",
    "se_odia.eps_I",
    "se_odia.outage_policy",
    "gridsearch.eta_I",
    "gridsearch.eta_D",
    "gridsearch.alpha",
    "gridsearch.trials",
    "validate.samples",
    "validate.step",
    "validate.trials",
];

/// Keys that do not affect results and are left out of the config hash.
const NON_SEMANTIC_KEYS: &[&str] = &["workers"];

/// `network.snr_db` becomes `ODIA_NETWORK_SNR_DB`.
pub fn env_var_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('.', "_"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    NUsers,
    NFeedbackBits,
    EtaI,
    EtaD,
    Alpha,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        SweepVariable::SnrDb,
        SweepVariable::NUsers,
        SweepVariable::NFeedbackBits,
        SweepVariable::EtaI,
        SweepVariable::EtaD,
        SweepVariable::Alpha,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::NUsers => "n_users",
            SweepVariable::NFeedbackBits => "n_feedback_bits",
            SweepVariable::EtaI => "eta_I",
            SweepVariable::EtaD => "eta_D",
            SweepVariable::Alpha => "alpha",
        }
    }

    fn is_integral(self) -> bool {
        matches!(self, SweepVariable::NUsers | SweepVariable::NFeedbackBits)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config(format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// When set, trial `t` sees the same channel draws at every grid point.
    pub common_random_numbers: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CodebookSource {
    Generate { kind: CodebookKind, iterations: usize },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSpec {
    pub source: CodebookSource,
    /// `n_f`; the codebook holds `2^{n_f}` codewords. Ignored for files.
    pub bits: u32,
    pub gain_exponent: GainExponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeOdiaMode {
    Fixed(SeOdiaParams),
    /// `η_D = ε_D ln SNR`, `η_I = ε_I / SNR` at each grid point.
    Theorem4 {
        eps_d: f64,
        eps_i: f64,
        alpha: f64,
    },
    /// Per-point grid search on an independent seed.
    Autotune,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub eta_i: Vec<f64>,
    pub eta_d: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ParamGrid {
    pub fn triples(&self) -> Vec<SeOdiaParams> {
        let mut out = Vec::with_capacity(self.eta_i.len() * self.eta_d.len() * self.alpha.len());
        for &eta_i in &self.eta_i {
            for &eta_d in &self.eta_d {
                for &alpha in &self.alpha {
                    out.push(SeOdiaParams { eta_i, eta_d, alpha });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_i.is_empty() || self.eta_d.is_empty() || self.alpha.is_empty() {
            return Err(Error::config("grid-search axes must be nonempty"));
        }
        self.triples().iter().try_for_each(SeOdiaParams::validate)
    }
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            eta_i: vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            eta_d: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            alpha: vec![0.6, 0.8, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Network at the nominal operating point (before sweeping).
    pub network: NetworkConfig,
    pub snr_db: f64,
    pub algorithms: Vec<Algorithm>,
    pub sweep: Sweep,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub feedback: Option<FeedbackSpec>,
    pub se_odia: SeOdiaMode,
    pub outage_policy: OutagePolicy,
    pub grid: ParamGrid,
    pub tuning_trials: usize,
    pub validation_samples: usize,
    pub validation_step: usize,
    pub validation_trials: usize,
    /// Effective key/value pairs after every override.
    pub entries: BTreeMap<String, String>,
}

/// Raw `key = value` pairs with their source line numbers.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let canonical = KNOWN_KEYS
            .iter()
            .find(|k| k.eq_ignore_ascii_case(key))
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            })?;
        if out
            .insert(canonical.to_string(), (line_no, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{canonical}`"),
            });
        }
    }
    Ok(out)
}

struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_float_list(key, v)).transpose()
    }
}

fn parse_float(key: &str, token: &str) -> Result<f64> {
    let t = token.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::config(format!("invalid number `{t}` in `{key}`"))),
    }
}

fn parse_float_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_float(key, t))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::config(format!("invalid boolean `{other}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Parses `text`, applying environment overrides from `env` and then
    /// `overrides` (key, value) on top.
    pub fn from_text_with(
        text: &str,
        env: impl Fn(&str) -> Option<String>,
        overrides: &[(&str, String)],
    ) -> Result<Self> {
        let mut map: BTreeMap<String, String> = parse_entries(text)?.into_iter().map(|(k, (_, v))| (k, v)).collect();
        for key in KNOWN_KEYS {
            if let Some(v) = env(&env_var_name(key)) {
                map.insert(key.to_string(), v.trim().to_string());
            }
        }
        for (key, value) in overrides {
            let canonical = KNOWN_KEYS
                .iter()
                .find(|k| k.eq_ignore_ascii_case(key))
                .ok_or_else(|| Error::config(format!("unknown key `{key}`")))?;
            map.insert(canonical.to_string(), value.clone());
        }
        Self::from_entries(map)
    }

    /// Parses without consulting the environment.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_text_with(text, |_| None, &[])
    }

    /// Reads a config file, applying `ODIA_*` environment overrides and then
    /// `overrides`.
    pub fn load(path: impl AsRef<Path>, overrides: &[(&str, String)]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text_with(&text, |name| std::env::var(name).ok(), overrides)
    }

    fn from_entries(map: BTreeMap<String, String>) -> Result<Self> {
        let e = Entries { map };
        let snr_db: f64 = e.require("network.snr_db")?;
        let network = NetworkConfig {
            k: e.require("network.K")?,
            m: e.require("network.M")?,
            l: e.require("network.L")?,
            n: e.require("network.N")?,
            s: e.require("network.S")?,
            snr: db_to_linear(snr_db),
        };

        let algorithms: Vec<Algorithm> = match e.get("algorithms") {
            Some(list) => list
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?,
            None => vec![Algorithm::Odia],
        };

        let variable = e.or("sweep.variable", SweepVariable::SnrDb)?;
        let values = match e.list("sweep.values")? {
            Some(v) => v,
            None if variable == SweepVariable::SnrDb => vec![snr_db],
            None => return Err(Error::config("`sweep.values` is required when sweeping")),
        };
        let common_random_numbers = e
            .get("sweep.common_random_numbers")
            .map(|v| parse_bool("sweep.common_random_numbers", v))
            .transpose()?
            .unwrap_or(false);
        let sweep = Sweep {
            variable,
            values,
            common_random_numbers,
        };

        let feedback = if e.get("feedback.codebook").is_some() || e.get("feedback.bits").is_some() {
            let gain_exponent = GainExponent::from_exponent(e.or("feedback.gain_exponent", 2u32)?)?;
            let kind = e.get("feedback.codebook").unwrap_or("random").to_ascii_lowercase();
            let source = if kind == "file" {
                let path: String = e.require("feedback.path")?;
                CodebookSource::File(PathBuf::from(path))
            } else {
                CodebookSource::Generate {
                    kind: kind.parse()?,
                    iterations: e.or("feedback.iterations", crate::codebook::DEFAULT_GRASSMANNIAN_ITERATIONS)?,
                }
            };
            let bits = match source {
                CodebookSource::File(_) => e.or("feedback.bits", 0u32)?,
                CodebookSource::Generate { .. } => e.require("feedback.bits")?,
            };
            Some(FeedbackSpec {
                source,
                bits,
                gain_exponent,
            })
        } else {
            None
        };

        let mode = e.get("se_odia.mode").unwrap_or("fixed").to_ascii_lowercase();
        let se_odia = match mode.as_str() {
            "fixed" => SeOdiaMode::Fixed(SeOdiaParams {
                eta_i: e
                    .get("se_odia.eta_I")
                    .map(|v| parse_float("se_odia.eta_I", v))
                    .transpose()?
                    .unwrap_or(1.0),
                eta_d: e.or("se_odia.eta_D", 1.0)?,
                alpha: e.or("se_odia.alpha", 0.8)?,
            }),
            "theorem4" => SeOdiaMode::Theorem4 {
                eps_d: e.require("se_odia.eps_D")?,
                eps_i: e.require("se_odia.eps_I")?,
                alpha: e.or("se_odia.alpha", 0.8)?,
            },
            "autotune" => SeOdiaMode::Autotune,
            other => return Err(Error::config(format!("unknown se_odia.mode `{other}`"))),
        };
        let outage_policy = e.or("se_odia.outage_policy", OutagePolicy::default())?;

        let defaults = ParamGrid::default();
        let grid = ParamGrid {
            eta_i: e.list("gridsearch.eta_I")?.unwrap_or(defaults.eta_i),
            eta_d: e.list("gridsearch.eta_D")?.unwrap_or(defaults.eta_d),
            alpha: e.list("gridsearch.alpha")?.unwrap_or(defaults.alpha),
        };

        let cfg = ExperimentConfig {
            network,
            snr_db,
            algorithms,
            sweep,
            trials: e.or("trials", DEFAULT_RATE_TRIALS)?,
            master_seed: e.or("seed", 1u64)?,
            workers: e.or("workers", 0usize)?,
            feedback,
            se_odia,
            outage_policy,
            grid,
            tuning_trials: e.or("gridsearch.trials", DEFAULT_TUNING_TRIALS)?,
            validation_samples: e.or("validate.samples", DEFAULT_VALIDATION_SAMPLES)?,
            validation_step: e.or("validate.step", 1usize)?,
            validation_trials: e.or("validate.trials", DEFAULT_VALIDATION_TRIALS)?,
            entries: e.map,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::config("algorithms are listed more than once"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::config("sweep grid contains NaN"));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::config("sweep grid must be strictly monotone"));
        }
        if self.sweep.variable.is_integral() && values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(Error::config(format!(
                "{} takes nonnegative integers",
                self.sweep.variable
            )));
        }
        if self.algorithms.contains(&Algorithm::OdiaLf) && self.feedback.is_none() {
            return Err(Error::config(
                "odia_lf needs a codebook (`feedback.codebook`, `feedback.bits`)",
            ));
        }
        if self.sweep.variable == SweepVariable::NFeedbackBits {
            match &self.feedback {
                Some(FeedbackSpec {
                    source: CodebookSource::Generate { .. },
                    ..
                }) => {}
                _ => return Err(Error::config("sweeping n_feedback_bits needs a generated codebook")),
            }
        }
        if matches!(
            self.sweep.variable,
            SweepVariable::EtaI | SweepVariable::EtaD | SweepVariable::Alpha
        ) && !matches!(self.se_odia, SeOdiaMode::Fixed(_))
        {
            return Err(Error::config(
                "sweeping an SE-ODIA threshold needs se_odia.mode = fixed",
            ));
        }
        if let SeOdiaMode::Fixed(p) = self.se_odia {
            p.validate()?;
        }
        if self.algorithms.contains(&Algorithm::SeOdia) || self.se_odia == SeOdiaMode::Autotune {
            self.grid.validate()?;
        }
        if self.tuning_trials == 0 {
            return Err(Error::config("gridsearch.trials must be at least 1"));
        }
        if self.validation_step == 0 || self.validation_step > self.network.s {
            return Err(Error::config(format!(
                "validate.step must lie in 1..={}",
                self.network.s
            )));
        }
        for &v in values {
            let point = self.point(v)?;
            point.network.validate()?;
            if let Some(p) = point.fixed_params {
                p.validate()?;
            }
        }
        Ok(())
    }

    /// Settings in force at sweep value `value`.
    pub fn point(&self, value: f64) -> Result<PointSettings> {
        let mut network = self.network;
        let mut bits = self.feedback.as_ref().map(|f| f.bits);
        let mut fixed = match self.se_odia {
            SeOdiaMode::Fixed(p) => Some(p),
            _ => None,
        };
        match self.sweep.variable {
            SweepVariable::SnrDb => network.snr = db_to_linear(value),
            SweepVariable::NUsers => network.n = value as usize,
            SweepVariable::NFeedbackBits => bits = Some(value as u32),
            SweepVariable::EtaI => fixed.as_mut().expect("validated").eta_i = value,
            SweepVariable::EtaD => fixed.as_mut().expect("validated").eta_d = value,
            SweepVariable::Alpha => fixed.as_mut().expect("validated").alpha = value,
        }
        let fixed_params = match self.se_odia {
            SeOdiaMode::Theorem4 { eps_d, eps_i, alpha } => {
                Some(SeOdiaParams::theorem4(eps_d, eps_i, network.snr, alpha)?)
            }
            _ => fixed,
        };
        Ok(PointSettings {
            network,
            feedback_bits: bits,
            fixed_params,
        })
    }

    /// `key = value` lines in sorted key order, excluding non-semantic keys.
    pub fn canonical_text(&self) -> String {
        self.entries
            .iter()
            .filter(|(k, _)| !NON_SEMANTIC_KEYS.contains(&k.as_str()))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn config_hash(&self) -> String {
        Sha256::digest(self.canonical_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Resolved parameters of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSettings {
    pub network: NetworkConfig,
    pub feedback_bits: Option<u32>,
    /// SE-ODIA thresholds unless they are tuned per point.
    pub fixed_params: Option<SeOdiaParams>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
network.K = 3
network.M = 4
network.L = 2
network.N = 20
network.S = 2
network.snr_db = 20
";

    #[test]
    fn minimal_config_defaults() {
        let cfg = ExperimentConfig::from_text(BASE).unwrap();
        assert_eq!(cfg.network.k, 3);
        assert!((cfg.network.snr - 100.0).abs() < 1e-12);
        assert_eq!(cfg.algorithms, vec![Algorithm::Odia]);
        assert_eq!(cfg.sweep.values, vec![20.0]);
        assert_eq!(cfg.trials, DEFAULT_RATE_TRIALS);
        assert_eq!(cfg.outage_policy, OutagePolicy::FallbackMinEta);
    }

    #[test]
    fn full_config() {
        let text = format!(
            "{BASE}algorithms = odia, se_odia, odia_lf # all\n\
             sweep.variable = n_feedback_bits\nsweep.values = 4, 6, 8\n\
             feedback.codebook = grassmannian\nfeedback.bits = 6\nfeedback.gain_exponent = 1\n\
             se_odia.eta_I = inf\nse_odia.eta_D = 0\nse_odia.alpha = 1\n trials=10\nseed=99\n"
        );
        let cfg = ExperimentConfig::from_text(&text).unwrap();
        assert_eq!(cfg.algorithms.len(), 3);
        assert_eq!(cfg.sweep.variable, SweepVariable::NFeedbackBits);
        let fb = cfg.feedback.as_ref().unwrap();
        assert_eq!(fb.gain_exponent, GainExponent::Norm);
        assert_eq!(cfg.point(8.0).unwrap().feedback_bits, Some(8));
        assert_eq!(cfg.se_odia, SeOdiaMode::Fixed(SeOdiaParams::unconstrained()));
        assert_eq!((cfg.trials, cfg.master_seed), (10, 99));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match ExperimentConfig::from_text("network.K = 3\nbogus line\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::from_text("network.K = 3\nnetwork.Q = 1\n") {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("network.Q")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ExperimentConfig::from_text("network.K = 3\nnetwork.K = 4\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            format!("{BASE}trials = 0\n"),
            format!("{BASE}sweep.values = 0, 10, 5\n"),
            format!("{BASE}sweep.variable = n_users\n"),
            format!("{BASE}algorithms = odia_lf\n"),
            format!("{BASE}algorithms = odia, odia\n"),
            format!("{BASE}se_odia.alpha = 0\nalgorithms = se_odia\n"),
            format!("{BASE}sweep.variable = n_users\nsweep.values = 1, 20\n"),
            format!("{BASE}network.K = 1\n").replacen("network.K = 3\n", "", 1),
            format!("{BASE}sweep.variable = eta_I\nsweep.values = 1, 2\nse_odia.mode = autotune\n"),
        ];
        for text in &bad {
            assert!(ExperimentConfig::from_text(text).is_err(), "accepted:\n{text}");
        }
        assert!(ExperimentConfig::from_text("network.K = 3\n").is_err());
    }

    #[test]
    fn environment_and_flag_overrides() {
        let env = |name: &str| match name {
            "ODIA_NETWORK_N" => Some("50".to_string()),
            "ODIA_TRIALS" => Some("7".to_string()),
            _ => None,
        };
        let cfg = ExperimentConfig::from_text_with(BASE, env, &[("trials", "3".to_string())]).unwrap();
        assert_eq!(cfg.network.n, 50);
        assert_eq!(cfg.trials, 3);
        assert_eq!(env_var_name("network.snr_db"), "ODIA_NETWORK_SNR_DB");
        assert_eq!(env_var_name("se_odia.eta_I"), "ODIA_SE_ODIA_ETA_I");
    }

    #[test]
    fn sweep_points_resolve() {
        let text = format!("{BASE}sweep.variable = n_users\nsweep.values = 10, 30\n");
        let cfg = ExperimentConfig::from_text(&text).unwrap();
        assert_eq!(cfg.point(30.0).unwrap().network.n, 30);
        let text = format!("{BASE}se_odia.mode = theorem4\nse_odia.eps_D = 0.5\nse_odia.eps_I = 1\n");
        let cfg = ExperimentConfig::from_text(&text).unwrap();
        let p = cfg.point(20.0).unwrap().fixed_params.unwrap();
        assert!((p.eta_i - 0.01).abs() < 1e-12);
    }

    #[test]
    fn hash_ignores_workers_but_not_seed() {
        let a = ExperimentConfig::from_text(&format!("{BASE}workers = 1\n")).unwrap();
        let b = ExperimentConfig::from_text(&format!("{BASE}workers = 8\n")).unwrap();
        let c = ExperimentConfig::from_text(&format!("{BASE}seed = 5\n")).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
