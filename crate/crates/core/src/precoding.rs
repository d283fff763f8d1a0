//! Per-subarray RZF precoders: direct inversion or Kaczmarz approximation.

use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::kaczmarz::{RegularizedSystem, SelectionMode, SolveOptions};
use crate::linalg::{frobenius_sq, CMat};
use crate::rng::{role, Streams};
use crate::C64;

/// How a precoder was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RZF")]
    RzfDirect,
    #[serde(rename = "rKA")]
    Rka,
    #[serde(rename = "SwoR-rKA")]
    SworRka,
    /// Experimental Kaczmarz with per-sweep random permutations.
    #[serde(rename = "rKA-perm")]
    RkaPermutation,
}

impl Method {
    /// The three schemes compared throughout: direct RZF, rKA and SwoR-rKA.
    pub const REFERENCE: [Method; 3] = [Method::RzfDirect, Method::Rka, Method::SworRka];

    pub fn from_mode(mode: SelectionMode) -> Self {
        match mode {
            SelectionMode::Uniform => Method::Rka,
            SelectionMode::NormWeighted => Method::SworRka,
            SelectionMode::Permutation => Method::RkaPermutation,
        }
    }

    /// Row-selection law, `None` for direct inversion.
    pub fn selection_mode(self) -> Option<SelectionMode> {
        match self {
            Method::RzfDirect => None,
            Method::Rka => Some(SelectionMode::Uniform),
            Method::SworRka => Some(SelectionMode::NormWeighted),
            Method::RkaPermutation => Some(SelectionMode::Permutation),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::RzfDirect => "RZF",
            Method::Rka => "rKA",
            Method::SworRka => "SwoR-rKA",
            Method::RkaPermutation => "rKA-perm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RZF" => Ok(Method::RzfDirect),
            "rKA" => Ok(Method::Rka),
            "SwoR-rKA" => Ok(Method::SworRka),
            "rKA-perm" => Ok(Method::RkaPermutation),
            _ => Err(Error::param("method", format!("unknown method {s:?}"))),
        }
    }
}

/// Channel knowledge a precoder was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Csi {
    Perfect,
    Imperfect(f64),
}

/// Precoding matrices of every subarray.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    /// `g[s]`: `M_sub x K_sub[s]`, already scaled by `beta[s]`.
    pub g: Vec<CMat>,
    pub beta: Vec<f64>,
    /// Power budget `trace(G^H G)` of each subarray.
    pub power: Vec<f64>,
    pub method: Method,
    /// Kaczmarz iterations per column; 0 for direct inversion.
    pub iterations_used: usize,
    pub csi: Csi,
}

impl Precoder {
    pub fn subarrays(&self) -> usize {
        self.g.len()
    }

    fn single(g: CMat, beta: f64, power: f64, method: Method, iterations_used: usize) -> Self {
        Self {
            g: vec![g],
            beta: vec![beta],
            power: vec![power],
            method,
            iterations_used,
            csi: Csi::Perfect,
        }
    }
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::param("P", "must be finite and > 0"));
    }
    Ok(())
}

/// `F = H W`, `beta = sqrt(P / tr(F^H F))`, `G = beta F` for one subarray.
pub fn precoder_from_weights(
    h: &CMat,
    w: &CMat,
    power: f64,
    method: Method,
    iterations_used: usize,
) -> Result<Precoder> {
    check_power(power)?;
    if w.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "W has {} rows, H has {} columns",
            w.nrows(),
            h.ncols()
        )));
    }
    let f = h * w;
    let energy = frobenius_sq(&f);
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::NoRadiatingDirections);
    }
    let beta = (power / energy).sqrt();
    Ok(Precoder::single(
        f * C64::new(beta, 0.0),
        beta,
        power,
        method,
        iterations_used,
    ))
}

/// Direct RZF `beta H (H^H H + xi I)^{-1}`.
pub fn rzf_direct(h: &CMat, xi: f64, power: f64) -> Result<Precoder> {
    check_power(power)?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::param("xi", "must be finite and > 0"));
    }
    let k = h.ncols();
    let gram = h.adjoint() * h + CMat::identity(k, k) * C64::new(xi, 0.0);
    let w = Cholesky::new(gram)
        .ok_or_else(|| Error::Singular("H^H H + xi I".into()))?
        .inverse();
    precoder_from_weights(h, &w, power, Method::RzfDirect, 0)
}

/// RZF with `(H^H H + xi I)^{-1}` approximated column by column with
/// `iterations` Kaczmarz steps. Each column gets its own stream seeded from
/// `rng`, so the columns are independent and may be solved in any order.
pub fn rka_precoder<R: Rng + ?Sized>(
    h: &CMat,
    xi: f64,
    power: f64,
    iterations: usize,
    mode: SelectionMode,
    rng: &mut R,
) -> Result<Precoder> {
    check_power(power)?;
    let sys = RegularizedSystem::new(h, xi)?;
    let k = h.ncols();
    let seeds: Vec<u64> = (0..k).map(|_| rng.random()).collect();
    let opts = SolveOptions::new(iterations, mode);
    let mut w = CMat::zeros(k, k);
    for (col, seed) in seeds.into_iter().enumerate() {
        let run = sys.solve(col, &opts, &mut ChaCha8Rng::seed_from_u64(seed))?;
        w.set_column(col, &run.n);
    }
    precoder_from_weights(h, &w, power, Method::from_mode(mode), iterations)
}

/// Which channel matrices the precoders are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiSource {
    Perfect,
    Estimated,
}

/// Precoders for all subarrays, each from its local channel `H[s][s]` (or
/// the estimate) with an equal power split `P / S`. Kaczmarz streams are
/// keyed by subarray under `streams`.
pub fn build_all_precoders(
    channels: &ChannelRealization,
    config: &SystemConfig,
    method: Method,
    csi: CsiSource,
    streams: &Streams,
) -> Result<Precoder> {
    let s_count = channels.subarrays();
    let xi = config.xi();
    let power = config.subarray_power();
    let mut out = Precoder {
        g: Vec::with_capacity(s_count),
        beta: Vec::with_capacity(s_count),
        power: Vec::with_capacity(s_count),
        method,
        iterations_used: 0,
        csi: match csi {
            CsiSource::Perfect => Csi::Perfect,
            CsiSource::Estimated => Csi::Imperfect(channels.tau),
        },
    };
    for s in 0..s_count {
        let h = match csi {
            CsiSource::Perfect => &channels.h[s][s],
            CsiSource::Estimated => &channels.h_hat[s][s],
        };
        let local = match method.selection_mode() {
            None => rzf_direct(h, xi, power),
            Some(mode) => {
                let mut rng = streams.rng(&[role::KACZMARZ, s as u64]);
                rka_precoder(h, xi, power, config.iterations, mode, &mut rng)
            }
        }
        .map_err(|e| e.with_context(format!("subarray {s}")))?;
        out.g
            .push(local.g.into_iter().next().expect("one subarray"));
        out.beta.push(local.beta[0]);
        out.power.push(power);
        out.iterations_used = local.iterations_used;
    }
    Ok(out)
}
