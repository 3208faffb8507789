//! Structured-text run configuration (TOML). Unknown keys are rejected
//! everywhere so typos fail loudly instead of silently running defaults.

use serde::{Deserialize, Serialize};

use hw2f::curve_model::{DiscountCurve, Hw2fParams, VolSpec};
use hw2f::error::Hw2fError;
use hw2f::swap_analytics::{proxy_par_rate, Direction, SwapSpec};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curve: CurveConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub corr_curve: Option<CorrCurveConfig>,
    #[serde(default)]
    pub scatter: Option<ScatterConfig>,
    #[serde(default)]
    pub maturity_sweep: Option<MaturitySweepConfig>,
    #[serde(default)]
    pub exposure: Option<ExposureConfig>,
    #[serde(default)]
    pub calibrate: Option<CalibrateConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    #[serde(default)]
    pub flat_rate: Option<f64>,
    /// Pillars as `[time, discount_factor]` pairs.
    #[serde(default)]
    pub pillars: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub non_negative_rates: bool,
}

impl CurveConfig {
    pub fn build(&self) -> Result<DiscountCurve, CliError> {
        match (self.flat_rate, &self.pillars) {
            (Some(rate), None) => {
                if self.non_negative_rates && rate < 0.0 {
                    return Err(CliError::config(format!(
                        "curve flagged non-negative-rates but flat_rate is {rate}"
                    )));
                }
                Ok(DiscountCurve::flat(rate)?)
            }
            (None, Some(pillars)) => Ok(DiscountCurve::from_pillars(
                pillars,
                self.non_negative_rates,
            )?),
            _ => Err(CliError::config(
                "curve section needs exactly one of flat_rate or pillars",
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a1: f64,
    pub a2: f64,
    /// Defaults to the longest cashflow date of the experiment.
    #[serde(default)]
    pub numeraire_maturity: Option<f64>,
    pub vol: VolConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolConfig {
    Constant {
        sigma1: f64,
        sigma2: f64,
        rho12: f64,
    },
    Terminal {
        horizon: f64,
        xi1: f64,
        xi2: f64,
        rho_m: f64,
    },
}

impl From<&VolConfig> for VolSpec {
    fn from(v: &VolConfig) -> VolSpec {
        match *v {
            VolConfig::Constant {
                sigma1,
                sigma2,
                rho12,
            } => VolSpec::ConstantSigma {
                sigma1,
                sigma2,
                rho12,
            },
            VolConfig::Terminal {
                horizon,
                xi1,
                xi2,
                rho_m,
            } => VolSpec::TerminalCovariance {
                horizon,
                xi1,
                xi2,
                rho_m,
            },
        }
    }
}

impl From<&VolSpec> for VolConfig {
    fn from(v: &VolSpec) -> VolConfig {
        match *v {
            VolSpec::ConstantSigma {
                sigma1,
                sigma2,
                rho12,
            } => VolConfig::Constant {
                sigma1,
                sigma2,
                rho12,
            },
            VolSpec::TerminalCovariance {
                horizon,
                xi1,
                xi2,
                rho_m,
            } => VolConfig::Terminal {
                horizon,
                xi1,
                xi2,
                rho_m,
            },
        }
    }
}

impl ModelConfig {
    /// Build the parameters; `S` falls back to the experiment's longest
    /// cashflow date and must cover it when given explicitly.
    pub fn build(&self, longest_cashflow: f64) -> Result<Hw2fParams, CliError> {
        let s = self.numeraire_maturity.unwrap_or(longest_cashflow);
        if s + 1e-12 < longest_cashflow {
            return Err(CliError::config(format!(
                "numeraire_maturity {s} does not cover the longest cashflow date \
                 {longest_cashflow}"
            )));
        }
        Ok(Hw2fParams::new(
            self.a1,
            self.a2,
            VolSpec::from(&self.vol),
            s,
        )?)
    }
}

/// Evenly spaced grid description.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridConfig {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.count < 2 {
            return Err(CliError::config("grid needs count >= 2"));
        }
        Ok(hw2f::swap_analytics::linspace(
            self.start, self.stop, self.count,
        ))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub observation: f64,
    pub short_end: f64,
    pub long_end: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrCurveConfig {
    pub observation: f64,
    pub short_end: f64,
    pub long_end: f64,
    pub delta: f64,
    pub rho_grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub observation: f64,
    pub short_end: f64,
    pub long_end: f64,
    pub delta: f64,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaturitySweepConfig {
    pub observation: f64,
    pub short_end: f64,
    pub delta: f64,
    pub long_end_grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureConfig {
    pub observation: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub rho_grid: GridConfig,
    /// Re-solve the variance level at every grid point instead of holding
    /// the factor variances fixed across the sweep.
    #[serde(default)]
    pub recalibrate_each_point: bool,
    pub swaps: Vec<SwapConfig>,
    #[serde(default)]
    pub calibration: Option<CalibrationInstrument>,
    #[serde(default)]
    pub cva: Option<CvaConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapConfig {
    pub direction: DirectionConfig,
    pub notional: f64,
    /// A rate, or the string `"atm"` for the inception forward rate.
    pub strike: StrikeConfig,
    /// Defaults to the experiment's observation date.
    #[serde(default)]
    pub start: Option<f64>,
    pub end: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConfig {
    Payer,
    Receiver,
}

impl From<DirectionConfig> for Direction {
    fn from(d: DirectionConfig) -> Direction {
        match d {
            DirectionConfig::Payer => Direction::Payer,
            DirectionConfig::Receiver => Direction::Receiver,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum StrikeConfig {
    Rate(f64),
    Keyword(AtmKeyword),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtmKeyword {
    Atm,
}

impl SwapConfig {
    /// Resolve against the curve; `"atm"` strikes are set to the time-0
    /// forward (compounded proxy) rate of the swap's own span.
    pub fn build(&self, curve: &DiscountCurve, default_start: f64) -> Result<SwapSpec, CliError> {
        let start = self.start.unwrap_or(default_start);
        let shape = SwapSpec::co_initial(start, self.end, self.delta)?;
        let strike = match self.strike {
            StrikeConfig::Rate(k) => k,
            StrikeConfig::Keyword(AtmKeyword::Atm) => proxy_par_rate(curve, &shape)?,
        };
        Ok(SwapSpec::new(
            start,
            self.end,
            self.delta,
            strike,
            self.direction.into(),
            self.notional,
        )?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationInstrument {
    pub expiry: f64,
    pub tenor: f64,
    pub delta: f64,
    pub target_normal_vol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvaConfig {
    pub hazard_rate: f64,
    pub lgd: f64,
    pub observation_grid: GridConfig,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CalibrateConfig {
    /// Solve the terminal factor correlation from a co-initial pair's
    /// swap-rate correlation target.
    Rho {
        observation: f64,
        short_end: f64,
        long_end: f64,
        delta: f64,
        target_correlation: f64,
    },
    /// Scale the factor variances to a normal swaption volatility.
    Level {
        observation: f64,
        swap_end: f64,
        delta: f64,
        target_normal_vol: f64,
    },
}

pub fn load(path: &std::path::Path) -> Result<(RunConfig, toml::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let value: toml::Value = text
        .parse()
        .map_err(|e| CliError::config(format!("invalid TOML in {}: {e}", path.display())))?;
    let config: RunConfig = value
        .clone()
        .try_into()
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
    Ok((config, value))
}

impl From<Hw2fError> for CliError {
    fn from(e: Hw2fError) -> CliError {
        match e {
            Hw2fError::Degenerate(_) | Hw2fError::UnattainableTarget { .. } => {
                CliError::Numeric(e.to_string())
            }
            Hw2fError::InvalidInput(_) | Hw2fError::Io(_) => CliError::Config(e.to_string()),
        }
    }
}
