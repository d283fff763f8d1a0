//! Scenario parameters shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::channel::CorrelationSpec;
use crate::error::{Error, Result};

/// Trace normalization applied to the non-stationary covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Same channel energy as a stationary channel: `tr(Theta) = M_sub`.
    #[default]
    Norm1,
    /// Energy proportional to the visible antennas: `tr(Theta) = D`.
    Norm2,
}

/// All parameters of one XL-MIMO scenario.
///
/// Defaults reproduce the reference simulation setup: 256 antennas in four
/// subarrays of 64, 16 users split evenly, unit noise power, `tau = 0.3`,
/// 150 Kaczmarz iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Total base-station antennas.
    pub m: usize,
    /// Number of subarrays.
    pub s: usize,
    /// Total single-antenna users.
    pub k: usize,
    /// Explicit user partition over subarrays; even split when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_per_subarray: Option<Vec<usize>>,
    /// Transmit SNR `P / sigma2` in dB.
    pub snr_db: f64,
    /// Noise variance.
    pub sigma2: f64,
    /// CSI error weight in `[0, 1]`.
    pub tau: f64,
    /// Kaczmarz iteration budget `T`.
    pub iterations: usize,
    pub normalization: Normalization,
    pub correlation: CorrelationSpec,
    /// Smallest visibility-region length; `M_sub / 4` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vr_min: Option<usize>,
    /// Largest visibility-region length; `M_sub` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vr_max: Option<usize>,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 256,
            s: 4,
            k: 16,
            k_per_subarray: None,
            snr_db: 10.0,
            sigma2: 1.0,
            tau: 0.3,
            iterations: 150,
            normalization: Normalization::Norm1,
            correlation: CorrelationSpec::default(),
            vr_min: None,
            vr_max: None,
            seed: 1,
        }
    }
}

impl SystemConfig {
    /// Small preset for quick runs: 64 antennas, 8 users, 2 subarrays.
    pub fn small() -> Self {
        Self {
            m: 64,
            s: 2,
            k: 8,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::param("s", "must be >= 1"));
        }
        if self.m == 0 || !self.m.is_multiple_of(self.s) {
            return Err(Error::param(
                "m",
                format!("must be a positive multiple of s = {}", self.s),
            ));
        }
        if self.k < self.s && self.k_per_subarray.is_none() {
            return Err(Error::param("k", "even split needs k >= s"));
        }
        if let Some(parts) = &self.k_per_subarray {
            if parts.len() != self.s {
                return Err(Error::param(
                    "k_per_subarray",
                    format!("needs {} entries, got {}", self.s, parts.len()),
                ));
            }
            if parts.iter().sum::<usize>() != self.k {
                return Err(Error::param("k_per_subarray", "entries must sum to k"));
            }
            if parts.contains(&0) {
                return Err(Error::param(
                    "k_per_subarray",
                    "every subarray needs a user",
                ));
            }
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", "must be finite"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::param("sigma2", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::param("tau", "must lie in [0,1]"));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be >= 1"));
        }
        self.correlation.validate()?;
        let (lo, hi) = self.vr_range();
        if lo == 0 || lo > hi || hi > self.m_sub() {
            return Err(Error::param(
                "vr_min/vr_max",
                format!("need 1 <= vr_min <= vr_max <= {}", self.m_sub()),
            ));
        }
        Ok(())
    }

    /// Antennas per subarray.
    pub fn m_sub(&self) -> usize {
        self.m / self.s.max(1)
    }

    /// Users per subarray.
    pub fn k_sub(&self) -> Vec<usize> {
        match &self.k_per_subarray {
            Some(p) => p.clone(),
            None => {
                let base = self.k / self.s;
                let extra = self.k % self.s;
                (0..self.s).map(|j| base + usize::from(j < extra)).collect()
            }
        }
    }

    /// Total transmit power `P = sigma2 * 10^(snr/10)`.
    pub fn power(&self) -> f64 {
        self.sigma2 * 10f64.powf(self.snr_db / 10.0)
    }

    /// Regularization factor `xi = sigma2 / P`.
    pub fn xi(&self) -> f64 {
        self.sigma2 / self.power()
    }

    /// Per-subarray power budget (equal split).
    pub fn subarray_power(&self) -> f64 {
        self.power() / self.s as f64
    }

    pub fn vr_range(&self) -> (usize, usize) {
        let m_sub = self.m_sub();
        (
            self.vr_min.unwrap_or((m_sub / 4).max(1)),
            self.vr_max.unwrap_or(m_sub),
        )
    }
}
