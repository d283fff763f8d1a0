//! Link-level metrics: hardening-bound SINR/SE, QPSK BER, NMSE and
//! closed-form complexity counts.
//!
//! Every metric is computed from [`LinkGains`], the matrix of effective gains
//! `h_jk^{s H} g_si` from every precoded stream `(s, i)` to every user
//! `(j, k)`, including the inter-subarray terms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{ChannelModel, ChannelRealization};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::kaczmarz::{RegularizedSystem, SelectionMode, SolveOptions};
use crate::linalg::{frobenius_sq, CMat, NeumaierSum};
use crate::precoding::{build_all_precoders, CsiSource, Method, Precoder};
use crate::rng::{role, Streams};
use crate::C64;

/// Effective gains of one realization.
///
/// Precoder columns are rescaled to unit average norm, `g / sqrt(P_s/K_s)`,
/// and the per-user power `p = P_s/K_s` is carried in `powers`; the radiated
/// power of subarray `s` is then `sum_i p_si ||g_si||^2 = P_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    /// `gains[(u, v)]` for user `u` and stream `v`, both in global order
    /// (group-major).
    pub gains: CMat,
    /// Symbol power per stream.
    pub powers: Vec<f64>,
    /// Users per group.
    pub groups: Vec<usize>,
}

impl LinkGains {
    pub fn new(channels: &ChannelRealization, precoder: &Precoder) -> Result<Self> {
        let s_count = channels.subarrays();
        if precoder.subarrays() != s_count {
            return Err(Error::Dimension(format!(
                "{} precoders for {} subarrays",
                precoder.subarrays(),
                s_count
            )));
        }
        let groups: Vec<usize> = (0..s_count).map(|j| channels.users_in(j)).collect();
        let offsets = offsets(&groups);
        let total: usize = groups.iter().sum();
        let mut gains = CMat::zeros(total, total);
        let mut powers = vec![0.0; total];
        for s in 0..s_count {
            let per_user = precoder.power[s] / groups[s] as f64;
            let unit = &precoder.g[s] * C64::new(1.0 / per_user.sqrt(), 0.0);
            powers[offsets[s]..offsets[s] + groups[s]].fill(per_user);
            for j in 0..s_count {
                let block = channels.h[j][s].adjoint() * &unit;
                gains
                    .view_mut((offsets[j], offsets[s]), (groups[j], groups[s]))
                    .copy_from(&block);
            }
        }
        Ok(Self {
            gains,
            powers,
            groups,
        })
    }

    /// Interference-free unit-gain link for `users` users.
    pub fn identity(users: usize, power: f64) -> Self {
        Self {
            gains: CMat::identity(users, users),
            powers: vec![power; users],
            groups: vec![users],
        }
    }

    pub fn users(&self) -> usize {
        self.gains.nrows()
    }
}

fn offsets(groups: &[usize]) -> Vec<usize> {
    groups
        .iter()
        .scan(0, |acc, &g| {
            let o = *acc;
            *acc += g;
            Some(o)
        })
        .collect()
}

/// Ensemble moments `E{c_uv}` and `E{|c_uv|^2}` of the link gains.
#[derive(Debug, Clone)]
pub struct HardeningStats {
    mean_re: Vec<NeumaierSum>,
    mean_im: Vec<NeumaierSum>,
    mean_sq: Vec<NeumaierSum>,
    users: usize,
    groups: Vec<usize>,
    count: usize,
}

impl HardeningStats {
    pub fn new(groups: &[usize]) -> Self {
        let users: usize = groups.iter().sum();
        let n = users * users;
        Self {
            mean_re: vec![NeumaierSum::default(); n],
            mean_im: vec![NeumaierSum::default(); n],
            mean_sq: vec![NeumaierSum::default(); n],
            users,
            groups: groups.to_vec(),
            count: 0,
        }
    }

    pub fn add(&mut self, g: &LinkGains) {
        assert_eq!(g.users(), self.users, "user count changed within ensemble");
        for u in 0..self.users {
            for v in 0..self.users {
                let c = g.gains[(u, v)];
                let i = u * self.users + v;
                self.mean_re[i].add(c.re);
                self.mean_im[i].add(c.im);
                self.mean_sq[i].add(c.norm_sqr());
            }
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `E{c_uv}`.
    pub fn mean(&self, u: usize, v: usize) -> C64 {
        let i = u * self.users + v;
        C64::new(self.mean_re[i].value(), self.mean_im[i].value()) / self.count as f64
    }

    /// `E{|c_uv|^2}`.
    pub fn mean_sq(&self, u: usize, v: usize) -> f64 {
        self.mean_sq[u * self.users + v].value() / self.count as f64
    }

    /// Effective gains `E{g_u^H h_u}` used by the statistical equalizer.
    pub fn effective_gains(&self) -> Vec<C64> {
        (0..self.users).map(|u| self.mean(u, u)).collect()
    }

    /// Hardening-bound SINR per user, grouped by subarray.
    pub fn sinr(&self, powers: &[f64], sigma2: f64) -> Result<Vec<Vec<f64>>> {
        if self.count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if powers.len() != self.users {
            return Err(Error::Dimension("one power per stream".into()));
        }
        let mut flat = Vec::with_capacity(self.users);
        for u in 0..self.users {
            let signal = powers[u] * self.mean(u, u).norm_sqr();
            let total: NeumaierSum = (0..self.users)
                .map(|v| powers[v] * self.mean_sq(u, v))
                .collect();
            let interference = (total.value() - signal).max(0.0);
            flat.push(signal / (interference + sigma2));
        }
        let mut out = Vec::with_capacity(self.groups.len());
        let mut it = flat.into_iter();
        for &g in &self.groups {
            out.push(it.by_ref().take(g).collect());
        }
        Ok(out)
    }
}

/// SINR under channel hardening with expectations replaced by ensemble means.
pub fn sinr_hardening(
    ensemble: &[LinkGains],
    powers: &[f64],
    sigma2: f64,
) -> Result<Vec<Vec<f64>>> {
    let first = ensemble.first().ok_or(Error::EmptyEnsemble)?;
    let mut stats = HardeningStats::new(&first.groups);
    for g in ensemble {
        stats.add(g);
    }
    stats.sinr(powers, sigma2)
}

/// [`sinr_hardening`] over `(realization, precoder)` pairs.
pub fn sinr_hardening_pairs(
    ensemble: &[(ChannelRealization, Precoder)],
    sigma2: f64,
) -> Result<Vec<Vec<f64>>> {
    let gains = ensemble
        .iter()
        .map(|(c, p)| LinkGains::new(c, p))
        .collect::<Result<Vec<_>>>()?;
    let powers = gains.first().ok_or(Error::EmptyEnsemble)?.powers.clone();
    sinr_hardening(&gains, &powers, sigma2)
}

/// Per-subarray sum SE `sum_k log2(1 + SINR)` and the total.
pub fn sum_se(sinr: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let per: Vec<f64> = sinr
        .iter()
        .map(|g| g.iter().map(|&x| (1.0 + x).log2()).sum())
        .collect();
    let total = per.iter().sum();
    (per, total)
}

/// Gray-mapped QPSK: bit 0 drives the in-phase sign, bit 1 the quadrature.
pub fn qpsk_map(bits: u8) -> C64 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(
        if bits & 1 == 0 { a } else { -a },
        if bits & 2 == 0 { a } else { -a },
    )
}

pub fn qpsk_demap(z: C64) -> u8 {
    u8::from(z.re < 0.0) | (u8::from(z.im < 0.0) << 1)
}

/// Bit-error tally.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BerEstimate {
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Standard error across independent channel realizations.
    pub std_err: f64,
    pub realizations: usize,
}

impl BerEstimate {
    fn from_tallies(tallies: &[(u64, u64)]) -> Self {
        let errors: u64 = tallies.iter().map(|t| t.0).sum();
        let bits: u64 = tallies.iter().map(|t| t.1).sum();
        let ber = if bits == 0 {
            0.0
        } else {
            errors as f64 / bits as f64
        };
        let n = tallies.len();
        let std_err = if n > 1 {
            let var: NeumaierSum = tallies
                .iter()
                .map(|&(e, b)| (e as f64 / b as f64 - ber).powi(2))
                .collect();
            (var.value() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            errors,
            bits,
            ber,
            std_err,
            realizations: n,
        }
    }
}

/// Send `slots` QPSK vectors through fixed gains and count bit errors.
///
/// Users equalize with `eq[u]` (the ensemble-mean effective gain), not the
/// instantaneous one. Noise is drawn as unit `CN(0,1)` and scaled, so runs at
/// different `sigma2` share the same underlying draws.
pub fn transmit_qpsk<R: Rng + ?Sized>(
    link: &LinkGains,
    eq: &[C64],
    sigma2: f64,
    slots: usize,
    rng: &mut R,
) -> (u64, u64) {
    let users = link.users();
    let amp: Vec<f64> = link.powers.iter().map(|p| p.sqrt()).collect();
    let noise_scale = (sigma2 / 2.0).sqrt();
    let mut bits = vec![0u8; users];
    let mut x = vec![C64::new(0.0, 0.0); users];
    let mut errors = 0u64;
    for _ in 0..slots {
        for v in 0..users {
            bits[v] = rng.random_range(0..4u8);
            x[v] = qpsk_map(bits[v]) * amp[v];
        }
        for u in 0..users {
            let mut y = C64::new(0.0, 0.0);
            for v in 0..users {
                y += link.gains[(u, v)] * x[v];
            }
            let nre: f64 = rng.sample(StandardNormal);
            let nim: f64 = rng.sample(StandardNormal);
            y += C64::new(nre, nim) * noise_scale;
            let decided = qpsk_demap(y / (eq[u] * amp[u]));
            errors += u64::from((decided ^ bits[u]).count_ones());
        }
    }
    (errors, 2 * (slots * users) as u64)
}

/// QPSK over an interference-free unit-gain AWGN link at `Eb/N0` (dB).
pub fn ber_awgn_qpsk<R: Rng + ?Sized>(ebn0_db: f64, n_symbols: usize, rng: &mut R) -> BerEstimate {
    let sigma2 = 1.0 / (2.0 * 10f64.powf(ebn0_db / 10.0));
    let link = LinkGains::identity(1, 1.0);
    let tally = transmit_qpsk(&link, &[C64::new(1.0, 0.0)], sigma2, n_symbols, rng);
    BerEstimate::from_tallies(&[tally])
}

/// Result of one simulated operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPoint {
    pub sinr: Vec<Vec<f64>>,
    pub se: Vec<f64>,
    pub se_total: f64,
    pub ber: Option<BerEstimate>,
    pub trials: usize,
}

/// Channel draws, precoders, link gains and hardening statistics for one
/// configuration. Trials are independent (parallel over rayon) and reduced in
/// trial order.
#[derive(Debug, Clone)]
pub struct LinkSimulation {
    pub method: Method,
    pub csi: CsiSource,
    pub trials: usize,
    /// QPSK vectors per realization; 0 skips the BER pass.
    pub slots_per_trial: usize,
}

impl LinkSimulation {
    pub fn run(&self, config: &SystemConfig, streams: &Streams) -> Result<LinkPoint> {
        if self.trials == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let model = ChannelModel::new(config)?;
        let gains = (0..self.trials as u64)
            .into_par_iter()
            .map(|t| {
                let real = model.sample_trial(streams, t);
                let pre =
                    build_all_precoders(&real, config, self.method, self.csi, &streams.child(t))?;
                LinkGains::new(&real, &pre)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut stats = HardeningStats::new(&gains[0].groups);
        for g in &gains {
            stats.add(g);
        }
        let sinr = stats.sinr(&gains[0].powers, config.sigma2)?;
        let (se, se_total) = sum_se(&sinr);

        let ber = (self.slots_per_trial > 0).then(|| {
            let eq = stats.effective_gains();
            let tallies: Vec<(u64, u64)> = gains
                .par_iter()
                .enumerate()
                .map(|(t, g)| {
                    let mut rng = streams.rng(&[t as u64, role::SYMBOLS]);
                    transmit_qpsk(g, &eq, config.sigma2, self.slots_per_trial, &mut rng)
                })
                .collect();
            BerEstimate::from_tallies(&tallies)
        });

        Ok(LinkPoint {
            sinr,
            se,
            se_total,
            ber,
            trials: self.trials,
        })
    }
}

/// Default QPSK vectors sent per channel realization in [`ber_mc`].
pub const BER_SLOTS_PER_TRIAL: usize = 250;

/// Monte-Carlo BER with at least `n_symbols` QPSK symbols (over all users).
/// Precoders use the estimated channel when `config.tau > 0`.
pub fn ber_mc(
    config: &SystemConfig,
    method: Method,
    n_symbols: usize,
    streams: &Streams,
) -> Result<BerEstimate> {
    let per_trial = config.k * BER_SLOTS_PER_TRIAL;
    let sim = LinkSimulation {
        method,
        csi: if config.tau > 0.0 {
            CsiSource::Estimated
        } else {
            CsiSource::Perfect
        },
        trials: n_symbols.div_ceil(per_trial).max(2),
        slots_per_trial: BER_SLOTS_PER_TRIAL,
    };
    Ok(sim.run(config, streams)?.ber.expect("BER pass enabled"))
}

/// `||W_approx - W_exact||_F^2 / ||W_exact||_F^2`.
pub fn nmse(approx: &CMat, exact: &CMat) -> Result<f64> {
    if approx.shape() != exact.shape() {
        return Err(Error::Dimension("NMSE operands differ in shape".into()));
    }
    let denom = frobenius_sq(exact);
    if denom == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(frobenius_sq(&(approx - exact)) / denom)
}

/// NMSE of the Kaczmarz estimate of `(H^H H + xi I)^{-1}` after each
/// iteration count in `checkpoints` (0 gives 1). Columns use independent
/// streams seeded from `rng`, as in [`crate::precoding::rka_precoder`].
pub fn nmse_curve<R: Rng + ?Sized>(
    h: &CMat,
    xi: f64,
    mode: SelectionMode,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    let sys = RegularizedSystem::new(h, xi)?;
    let exact = sys.exact_inverse()?;
    let k = h.ncols();
    let t_max = checkpoints.iter().copied().max().unwrap_or(0);
    let mut snapshots = vec![CMat::zeros(k, k); checkpoints.len()];
    let seeds: Vec<u64> = (0..k).map(|_| rng.random()).collect();
    if t_max > 0 {
        let opts = SolveOptions::new(t_max, mode);
        for (col, seed) in seeds.into_iter().enumerate() {
            sys.solve_observed(col, &opts, &mut ChaCha8Rng::seed_from_u64(seed), |run| {
                for (i, &t) in checkpoints.iter().enumerate() {
                    if t == run.t {
                        snapshots[i].set_column(col, &run.n);
                    }
                }
            })?;
        }
    }
    checkpoints
        .iter()
        .zip(&snapshots)
        .map(|(&t, w)| Ok((t, nmse(w, &exact)?)))
        .collect()
}

/// Complex-multiplication counts of the three precoding schemes, with
/// per-subarray sizes `m`, `k`:
///
/// - RZF: `S [3 K^2 M / 2 + 3 K M / 2 + (K^3 - K) / 3]`
/// - rKA: `S [M T + M]`
/// - SwoR-rKA: `S [M T + 2 M K]`
///
/// The experimental permutation mode is counted like rKA.
pub fn complexity_count(method: Method, m: u64, k: u64, s: u64, t: u64) -> u64 {
    let per = match method {
        // 3KM(K+1)/2 is exact since K(K+1) is even; K^3 - K = (K-1)K(K+1)
        // is divisible by 3.
        Method::RzfDirect => 3 * k * m * (k + 1) / 2 + (k * k * k - k) / 3,
        Method::Rka | Method::RkaPermutation => m * t + m,
        Method::SworRka => m * t + 2 * m * k,
    };
    s * per
}

/// Everything measured for one `(method, SNR, tau)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: Method,
    pub snr_db: f64,
    pub tau: f64,
    pub sinr: Vec<Vec<f64>>,
    pub se: Vec<f64>,
    pub se_total: f64,
    pub ber: Option<BerEstimate>,
    pub nmse_curve: Vec<(usize, f64)>,
    pub complexity: u64,
    pub trials: usize,
    pub seed: u64,
}
