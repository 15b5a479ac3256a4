//! Pipeline configuration: a key-value config file plus flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::TrendTimeScale;
use crate::error::{Error, Result};
use crate::forecast::ArimaOrder;
use crate::time::MonthWindow;

/// Input and output locations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub taxonomy: PathBuf,
    pub soc_families: PathBuf,
    pub postings: PathBuf,
    pub annual_stats: PathBuf,
    pub out_dir: PathBuf,
}

/// Full pipeline configuration. Analysis constants (3-month smoothing,
/// 72 training months, the 96-month window) live here rather than in code.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub window: MonthWindow,
    pub smoothing_window: usize,
    pub train_months: usize,
    pub trend_time_scale: TrendTimeScale,
    /// Month each annual statistic anchors to (1 = January).
    pub anchor_month: u32,
    /// Year whose average hourly wage defines the terciles.
    pub base_wage_year: i32,
    /// Keep all-zero pair series instead of dropping them.
    pub keep_zeros: bool,
    /// Forecast on raw rather than smoothed series.
    pub raw_forecast_series: bool,
    /// Fixed `p,d,q` instead of AIC grid selection.
    pub order: Option<String>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            paths: Paths::default(),
            window: MonthWindow::default_analysis(),
            smoothing_window: 3,
            train_months: 72,
            trend_time_scale: TrendTimeScale::Unit,
            anchor_month: 1,
            base_wage_year: 2010,
            keep_zeros: false,
            raw_forecast_series: false,
            order: None,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(s)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.display().to_string()));
        }
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Parsed order override, if configured.
    pub fn order_override(&self) -> Result<Option<ArimaOrder>> {
        self.order.as_deref().map(ArimaOrder::parse).transpose()
    }

    pub fn validate(&self) -> Result<()> {
        if self.smoothing_window == 0 || self.smoothing_window % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "smoothing_window must be odd and >= 1, got {}",
                self.smoothing_window
            )));
        }
        if self.smoothing_window > self.window.len() {
            return Err(Error::InvalidConfig(
                "smoothing_window exceeds the window length".into(),
            ));
        }
        if self.train_months >= self.window.len() {
            return Err(Error::InvalidConfig(format!(
                "train_months {} must be less than the window length {}",
                self.train_months,
                self.window.len()
            )));
        }
        if !(1..=12).contains(&self.anchor_month) {
            return Err(Error::InvalidConfig(format!(
                "anchor_month must be in 1..=12, got {}",
                self.anchor_month
            )));
        }
        self.order_override()?;
        Ok(())
    }
}
