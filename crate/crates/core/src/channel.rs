//! Spatially non-stationary channel model.
//!
//! The channel from the `M_sub` antennas of subarray `s` to user `k` of group
//! `j` is `h = sqrt(M_sub) * Theta^{1/2} * z` with `z ~ CN(0, I / M_sub)` and
//! `Theta = D^{1/2} R D^{1/2}`. `R` is the spatial correlation and `D` a
//! diagonal mask selecting the user's visibility region (VR), a contiguous
//! block of antennas. The mask's nonzero entries are `M_sub / len` under
//! [`Normalization::Norm1`] and `1` under [`Normalization::Norm2`].
//!
//! Imperfect CSI mixes the true channel with an independent draw sharing its
//! covariance: `h_hat = sqrt(1 - tau^2) h + tau Theta^{1/2} v`, `v ~ CN(0, I)`.

use std::io::Write;
use std::sync::{Arc, OnceLock};

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Normalization, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{complex_normal, hermitian_sqrt, CMat, CVec};
use crate::rng::{role, Streams};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationModel {
    Identity,
    /// Toeplitz `R[m][n] = rho^{|m - n|}`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSpec {
    pub model: CorrelationModel,
    #[serde(default)]
    pub rho: f64,
}

impl Default for CorrelationSpec {
    fn default() -> Self {
        Self {
            model: CorrelationModel::Exponential,
            rho: 0.5,
        }
    }
}

impl CorrelationSpec {
    pub fn identity() -> Self {
        Self {
            model: CorrelationModel::Identity,
            rho: 0.0,
        }
    }

    pub fn exponential(rho: f64) -> Self {
        Self {
            model: CorrelationModel::Exponential,
            rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::param("correlation.rho", "must lie in [0,1)"));
        }
        Ok(())
    }
}

/// Spatial correlation matrix with unit diagonal.
pub fn build_correlation(spec: &CorrelationSpec, m_sub: usize) -> Result<CMat> {
    spec.validate()?;
    if m_sub == 0 {
        return Err(Error::param("m_sub", "must be >= 1"));
    }
    Ok(match spec.model {
        CorrelationModel::Identity => CMat::identity(m_sub, m_sub),
        CorrelationModel::Exponential => CMat::from_fn(m_sub, m_sub, |m, n| {
            C64::new(spec.rho.powi(m.abs_diff(n) as i32), 0.0)
        }),
    })
}

/// Contiguous visibility region `[start, start + length)` of a subarray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VrMask {
    pub start: usize,
    pub length: usize,
    pub m_sub: usize,
}

impl VrMask {
    pub fn new(start: usize, length: usize, m_sub: usize) -> Result<Self> {
        if length == 0 || length > m_sub || start + length > m_sub {
            return Err(Error::param(
                "vr",
                format!("start {start} + length {length} must fit in 1..={m_sub}"),
            ));
        }
        Ok(Self {
            start,
            length,
            m_sub,
        })
    }

    pub fn full(m_sub: usize) -> Self {
        Self {
            start: 0,
            length: m_sub,
            m_sub,
        }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.length
    }

    /// Diagonal entry of `D` inside the region.
    pub fn gain(&self, normalization: Normalization) -> f64 {
        match normalization {
            Normalization::Norm1 => self.m_sub as f64 / self.length as f64,
            Normalization::Norm2 => 1.0,
        }
    }
}

/// Draw a VR: length uniform on `[d_min, d_max]`, then start uniform on
/// `[0, M_sub - length]`.
pub fn sample_vr<R: Rng + ?Sized>(
    m_sub: usize,
    rng: &mut R,
    (d_min, d_max): (usize, usize),
) -> Result<VrMask> {
    if d_min == 0 || d_min > d_max || d_max > m_sub {
        return Err(Error::param(
            "vr_range",
            format!("need 1 <= {d_min} <= {d_max} <= {m_sub}"),
        ));
    }
    let length = rng.random_range(d_min..=d_max);
    let start = rng.random_range(0..=m_sub - length);
    VrMask::new(start, length, m_sub)
}

/// `Theta = D^{1/2} R D^{1/2}` for the given region and normalization.
pub fn build_theta(r: &CMat, vr: &VrMask, normalization: Normalization) -> CMat {
    assert_eq!(r.nrows(), vr.m_sub, "R must be M_sub x M_sub");
    let gain = vr.gain(normalization);
    let range = vr.range();
    CMat::from_fn(vr.m_sub, vr.m_sub, |m, n| {
        if range.contains(&m) && range.contains(&n) {
            r[(m, n)] * gain
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// One channel vector `sqrt(M_sub) * Theta^{1/2} * z`, `z ~ CN(0, I/M_sub)`.
pub fn sample_channel_vector<R: Rng + ?Sized>(theta_sqrt: &CMat, rng: &mut R) -> CVec {
    let m_sub = theta_sqrt.nrows();
    let z = complex_normal(rng, m_sub, 1.0 / m_sub as f64);
    theta_sqrt * z * C64::new((m_sub as f64).sqrt(), 0.0)
}

/// Imperfect channel estimate with error covariance equal to `Theta`.
pub fn corrupt_csi<R: Rng + ?Sized>(h: &CVec, theta: &CMat, tau: f64, rng: &mut R) -> Result<CVec> {
    check_tau(tau)?;
    let v = complex_normal(rng, h.len(), 1.0);
    Ok(mix_csi(h, &hermitian_sqrt(theta), &v, tau))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::param("tau", "must lie in [0,1]"));
    }
    Ok(())
}

fn mix_csi(h: &CVec, theta_sqrt: &CMat, v: &CVec, tau: f64) -> CVec {
    if tau == 0.0 {
        return h.clone();
    }
    h * C64::new((1.0 - tau * tau).sqrt(), 0.0) + theta_sqrt * v * C64::new(tau, 0.0)
}

/// Precomputed pieces of the channel law for one configuration.
///
/// `Theta^{1/2}` only depends on the VR placement (R and the normalization
/// are shared by all users), so square roots are cached per `(start, length)`.
#[derive(Debug)]
pub struct ChannelModel {
    config: SystemConfig,
    r: Arc<CMat>,
    sqrt_cache: Vec<OnceLock<CMat>>,
}

impl ChannelModel {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let m_sub = config.m_sub();
        let r = Arc::new(build_correlation(&config.correlation, m_sub)?);
        let sqrt_cache = (0..m_sub * (m_sub + 1)).map(|_| OnceLock::new()).collect();
        Ok(Self {
            config: config.clone(),
            r,
            sqrt_cache,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn correlation(&self) -> &CMat {
        &self.r
    }

    /// `Theta^{1/2}` restricted to the VR block.
    fn block_sqrt(&self, vr: &VrMask) -> &CMat {
        let idx = vr.start * (vr.m_sub + 1) + vr.length;
        self.sqrt_cache[idx].get_or_init(|| {
            let block = self.r.view((vr.start, vr.start), (vr.length, vr.length));
            let gain = vr.gain(self.config.normalization);
            hermitian_sqrt(&(block.into_owned() * C64::new(gain, 0.0)))
        })
    }

    /// Full `M_sub x M_sub` square root of `Theta` for a region.
    pub fn theta_sqrt(&self, vr: &VrMask) -> CMat {
        let mut out = CMat::zeros(vr.m_sub, vr.m_sub);
        out.view_mut((vr.start, vr.start), (vr.length, vr.length))
            .copy_from(self.block_sqrt(vr));
        out
    }

    /// Draw one realization from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let cfg = &self.config;
        let (m_sub, s_count) = (cfg.m_sub(), cfg.s);
        let k_sub = cfg.k_sub();
        let range = cfg.vr_range();
        let scale = C64::new((m_sub as f64).sqrt(), 0.0);
        let tau_w = C64::new(cfg.tau, 0.0);
        let keep_w = C64::new((1.0 - cfg.tau * cfg.tau).sqrt(), 0.0);

        let mut h: Vec<Vec<CMat>> = k_sub
            .iter()
            .map(|&kj| vec![CMat::zeros(m_sub, kj); s_count])
            .collect();
        let mut h_hat = h.clone();
        let mut vr = Vec::with_capacity(s_count);

        for (j, &kj) in k_sub.iter().enumerate() {
            let mut vr_j = Vec::with_capacity(kj);
            for k in 0..kj {
                let mut vr_jk = Vec::with_capacity(s_count);
                for s in 0..s_count {
                    let mask = sample_vr(m_sub, rng, range).expect("range validated");
                    // z and v are always drawn so the true channel does not
                    // depend on tau.
                    let z = complex_normal(rng, m_sub, 1.0 / m_sub as f64);
                    let v = complex_normal(rng, m_sub, 1.0);
                    let root = self.block_sqrt(&mask);
                    let rows = mask.range();
                    let hb = root * z.rows(mask.start, mask.length) * scale;

                    let mut col = h[j][s].column_mut(k);
                    col.rows_mut(mask.start, mask.length).copy_from(&hb);
                    let mut col_hat = h_hat[j][s].column_mut(k);
                    if cfg.tau == 0.0 {
                        col_hat.rows_mut(mask.start, mask.length).copy_from(&hb);
                    } else {
                        let err = root * v.rows(mask.start, mask.length);
                        for (i, m) in rows.clone().enumerate() {
                            col_hat[m] = hb[i] * keep_w + err[i] * tau_w;
                        }
                    }
                    vr_jk.push(mask);
                }
                vr_j.push(vr_jk);
            }
            vr.push(vr_j);
        }

        ChannelRealization {
            h,
            h_hat,
            vr,
            r: Arc::clone(&self.r),
            normalization: cfg.normalization,
            tau: cfg.tau,
            stream: None,
        }
    }

    /// Realization `trial` of the ensemble rooted at `streams`.
    pub fn sample_trial(&self, streams: &Streams, trial: u64) -> ChannelRealization {
        let mut rng = streams.rng(&[trial, role::CHANNEL]);
        let mut out = self.sample(&mut rng);
        out.stream = Some((streams.root(), trial));
        out
    }
}

/// One draw of every channel in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `h[j][s]`: `M_sub x K_sub[j]`, subarray `s` to the users of group `j`.
    pub h: Vec<Vec<CMat>>,
    /// Estimated channels, same layout as `h`.
    pub h_hat: Vec<Vec<CMat>>,
    /// `vr[j][k][s]`.
    pub vr: Vec<Vec<Vec<VrMask>>>,
    r: Arc<CMat>,
    normalization: Normalization,
    pub tau: f64,
    /// `(root seed, trial)` when drawn through [`ChannelModel::sample_trial`].
    pub stream: Option<(u64, u64)>,
}

impl ChannelRealization {
    pub fn subarrays(&self) -> usize {
        self.h.len()
    }

    pub fn users_in(&self, j: usize) -> usize {
        self.h[j][0].ncols()
    }

    pub fn theta(&self, j: usize, k: usize, s: usize) -> CMat {
        build_theta(&self.r, &self.vr[j][k][s], self.normalization)
    }

    /// Dump `h[j][s]` (or `h_hat`) as CSV: one row per antenna, `re_k,im_k`
    /// column pairs per user.
    pub fn write_csv<W: Write>(&self, j: usize, s: usize, estimated: bool, out: W) -> Result<()> {
        let mat = if estimated {
            &self.h_hat[j][s]
        } else {
            &self.h[j][s]
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["antenna".to_string()];
        for k in 0..mat.ncols() {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        w.write_record(&header)?;
        for m in 0..mat.nrows() {
            let mut row = vec![m.to_string()];
            for k in 0..mat.ncols() {
                row.push(mat[(m, k)].re.to_string());
                row.push(mat[(m, k)].im.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draw one realization for `config`.
pub fn sample_channel<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(ChannelModel::new(config)?.sample(rng))
}

/// Column `k` of `mat` as an owned vector.
pub fn column(mat: &CMat, k: usize) -> CVec {
    DVector::from_iterator(mat.nrows(), mat.column(k).iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_sq, is_hermitian, NeumaierSum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn trace(a: &CMat) -> f64 {
        a.diagonal().iter().map(|z| z.re).sum()
    }

    #[test]
    fn identity_and_degenerate_exponential() {
        let r = build_correlation(&CorrelationSpec::identity(), 4).unwrap();
        assert_eq!(r, CMat::identity(4, 4));
        let r = build_correlation(&CorrelationSpec::exponential(0.0), 8).unwrap();
        assert_eq!(r, CMat::identity(8, 8));
    }

    #[test]
    fn exponential_entries() {
        let r = build_correlation(&CorrelationSpec::exponential(0.5), 3).unwrap();
        let want = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]];
        for m in 0..3 {
            for n in 0..3 {
                assert_eq!(r[(m, n)], C64::new(want[m][n], 0.0));
            }
        }
        assert!(is_hermitian(&r, 0.0));
    }

    #[test]
    fn correlation_rejects_bad_rho() {
        assert!(build_correlation(&CorrelationSpec::exponential(1.0), 4).is_err());
        assert!(build_correlation(&CorrelationSpec::exponential(-0.1), 4).is_err());
    }

    #[test]
    fn full_visibility_range() {
        let vr = sample_vr(16, &mut rng(1), (16, 16)).unwrap();
        assert_eq!(vr, VrMask::full(16));
    }

    #[test]
    fn vr_is_reproducible() {
        let a = sample_vr(64, &mut rng(99), (16, 48)).unwrap();
        let b = sample_vr(64, &mut rng(99), (16, 48)).unwrap();
        assert_eq!(a, b);
        assert!((16..=48).contains(&a.length));
    }

    #[test]
    fn vr_rejects_bad_ranges() {
        assert!(sample_vr(8, &mut rng(0), (0, 3)).is_err());
        assert!(sample_vr(8, &mut rng(0), (4, 3)).is_err());
        assert!(sample_vr(8, &mut rng(0), (3, 9)).is_err());
        assert!(VrMask::new(6, 3, 8).is_err());
    }

    #[test]
    fn vr_start_is_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut g = rng(2024);
        let mut counts = [0usize; 6];
        let n = 10_000;
        for _ in 0..n {
            let vr = sample_vr(8, &mut g, (3, 3)).unwrap();
            assert_eq!(vr.length, 3);
            counts[vr.start] += 1;
        }
        let expected = n as f64 / 6.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p = 1.0 - ChiSquared::new(5.0).unwrap().cdf(stat);
        assert!(p > 0.01, "chi2 {stat}, p {p}");
    }

    #[test]
    fn theta_norm2_identity() {
        let r = CMat::identity(8, 8);
        let vr = VrMask::new(2, 3, 8).unwrap();
        let th = build_theta(&r, &vr, Normalization::Norm2);
        for m in 0..8 {
            let want = if (2..5).contains(&m) { 1.0 } else { 0.0 };
            assert_eq!(th[(m, m)], C64::new(want, 0.0));
        }
        assert_eq!(trace(&th), 3.0);
        assert_eq!(frobenius_sq(&th), 3.0);
    }

    #[test]
    fn theta_norm1_identity() {
        let vr = VrMask::new(0, 4, 8).unwrap();
        let th = build_theta(&CMat::identity(8, 8), &vr, Normalization::Norm1);
        for m in 0..4 {
            assert_eq!(th[(m, m)].re, 2.0);
        }
        assert_eq!(trace(&th), 8.0);
    }

    #[test]
    fn theta_full_vr_is_r() {
        let r = build_correlation(&CorrelationSpec::exponential(0.7), 16).unwrap();
        let th = build_theta(&r, &VrMask::full(16), Normalization::Norm1);
        assert_eq!(th, r);
        assert!((trace(&th) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zero_theta_gives_zero_channel() {
        let h = sample_channel_vector(&CMat::zeros(6, 6), &mut rng(3));
        assert!(h.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    fn mean_energy(theta: &CMat, draws: usize, seed: u64) -> f64 {
        let root = hermitian_sqrt(theta);
        let mut g = rng(seed);
        let s: NeumaierSum = (0..draws)
            .map(|_| sample_channel_vector(&root, &mut g).norm_squared())
            .collect();
        s.value() / draws as f64
    }

    #[test]
    fn norm1_energy_matches_m_sub() {
        let th = build_theta(
            &CMat::identity(64, 64),
            &VrMask::full(64),
            Normalization::Norm1,
        );
        let e = mean_energy(&th, 10_000, 5);
        assert!((e - 64.0).abs() / 64.0 < 0.03, "{e}");
    }

    #[test]
    fn norm2_energy_matches_d() {
        let r = build_correlation(&CorrelationSpec::exponential(0.5), 32).unwrap();
        let th = build_theta(&r, &VrMask::new(5, 12, 32).unwrap(), Normalization::Norm2);
        let e = mean_energy(&th, 10_000, 6);
        assert!((e - 12.0).abs() / 12.0 < 0.03, "{e}");
    }

    #[test]
    fn csi_limits() {
        let th = build_theta(
            &CMat::identity(8, 8),
            &VrMask::full(8),
            Normalization::Norm1,
        );
        let root = hermitian_sqrt(&th);
        let h = sample_channel_vector(&root, &mut rng(7));
        assert_eq!(corrupt_csi(&h, &th, 0.0, &mut rng(8)).unwrap(), h);
        assert!(corrupt_csi(&h, &th, 1.2, &mut rng(8)).is_err());
        assert!(corrupt_csi(&h, &th, -0.2, &mut rng(8)).is_err());
    }

    #[test]
    fn csi_tau_one_is_uncorrelated() {
        let th = build_theta(
            &CMat::identity(4, 4),
            &VrMask::full(4),
            Normalization::Norm1,
        );
        let root = hermitian_sqrt(&th);
        let mut g = rng(11);
        let (mut cross, mut eh, mut ehat) = (C64::new(0.0, 0.0), 0.0, 0.0);
        let n = 10_000;
        for _ in 0..n {
            let h = sample_channel_vector(&root, &mut g);
            let hh = corrupt_csi(&h, &th, 1.0, &mut g).unwrap();
            cross += h[0].conj() * hh[0];
            eh += h[0].norm_sqr();
            ehat += hh[0].norm_sqr();
        }
        let rho = cross.norm() / (eh * ehat).sqrt();
        assert!(rho < 0.05, "{rho}");
    }

    #[test]
    fn csi_preserves_second_moment() {
        let r = build_correlation(&CorrelationSpec::exponential(0.5), 16).unwrap();
        let th = build_theta(&r, &VrMask::new(3, 9, 16).unwrap(), Normalization::Norm1);
        let root = hermitian_sqrt(&th);
        let mut g = rng(12);
        let n = 10_000;
        let (mut eh, mut ehat) = (NeumaierSum::default(), NeumaierSum::default());
        for _ in 0..n {
            let h = sample_channel_vector(&root, &mut g);
            let hh = corrupt_csi(&h, &th, 0.3, &mut g).unwrap();
            eh.add(h.norm_squared());
            ehat.add(hh.norm_squared());
        }
        let (eh, ehat) = (eh.value() / n as f64, ehat.value() / n as f64);
        assert!((ehat - eh).abs() / eh < 0.03, "{eh} vs {ehat}");
    }

    #[test]
    fn model_sqrt_matches_generic_root() {
        let cfg = SystemConfig {
            m: 32,
            s: 2,
            k: 4,
            ..SystemConfig::default()
        };
        let model = ChannelModel::new(&cfg).unwrap();
        let vr = VrMask::new(4, 7, 16).unwrap();
        let fast = model.theta_sqrt(&vr);
        let slow = hermitian_sqrt(&build_theta(model.correlation(), &vr, cfg.normalization));
        assert!(frobenius_sq(&(fast - slow)).sqrt() < 1e-10);
    }

    #[test]
    fn realization_layout_and_support() {
        let cfg = SystemConfig {
            m: 32,
            s: 2,
            k: 5,
            ..SystemConfig::default()
        };
        let real = sample_channel(&cfg, &mut rng(13)).unwrap();
        assert_eq!(real.subarrays(), 2);
        assert_eq!(real.users_in(0), 3);
        assert_eq!(real.users_in(1), 2);
        for j in 0..2 {
            for s in 0..2 {
                assert_eq!(real.h[j][s].shape(), (16, real.users_in(j)));
                for k in 0..real.users_in(j) {
                    let vr = real.vr[j][k][s];
                    for m in 0..16 {
                        if !vr.range().contains(&m) {
                            assert_eq!(real.h[j][s][(m, k)], C64::new(0.0, 0.0));
                            assert_eq!(real.h_hat[j][s][(m, k)], C64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn csv_dump_has_one_row_per_antenna() {
        let cfg = SystemConfig::small();
        let real = sample_channel(&cfg, &mut rng(1)).unwrap();
        let mut buf = Vec::new();
        real.write_csv(0, 1, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 1 + cfg.m_sub());
        assert_eq!(lines[0], "antenna,re_0,im_0,re_1,im_1,re_2,im_2,re_3,im_3");
    }
}
