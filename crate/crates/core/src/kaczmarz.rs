//! Randomized Kaczmarz solver for regularized normal equations.
//!
//! Column `k` of `(H^H H + xi I)^{-1}` is recovered by running Kaczmarz on the
//! consistent, underdetermined system `A^H z = e_k` with `A = [H; sqrt(xi) I]`.
//! Starting from `z = 0`, the iterates converge to the minimum-norm solution
//! `z* = A w`, whose last `K` entries divided by `sqrt(xi)` are `w`. The solver
//! keeps `z = [m; sqrt(xi) n]` split into the antenna-domain state `m` and the
//! user-domain state `n`, so `n` converges to `w` directly.
//!
//! Row `r` of `A^H` is `[h_r^H, sqrt(xi) e_r^T]` with squared norm
//! `||h_r||^2 + xi`, which gives the projection step in [`rka_step`].

use nalgebra::{Cholesky, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMat, CVec};
use crate::C64;

/// Residual magnitude treated as converged by the optional early exit.
pub const EARLY_EXIT_TOL: f64 = 1e-12;

/// Row-selection law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    /// `P_r = 1 / K` (rKA).
    Uniform,
    /// `P_r = (||h_r||^2 + xi) / (||H||_F^2 + K xi)` (SwoR-rKA).
    NormWeighted,
    /// Experimental: sweeps over a fresh random permutation of the rows, i.e.
    /// sampling without replacement within each sweep.
    Permutation,
}

/// Selection probabilities of each row under `mode`.
///
/// For [`SelectionMode::Permutation`] this is the per-step marginal, which is
/// uniform.
pub fn selection_probs(h: &CMat, xi: f64, mode: SelectionMode) -> Result<Vec<f64>> {
    let k = h.ncols();
    if k == 0 || h.nrows() == 0 {
        return Err(Error::Dimension("H must be nonempty".into()));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::param("xi", "must be finite and >= 0"));
    }
    match mode {
        SelectionMode::Uniform | SelectionMode::Permutation => Ok(vec![1.0 / k as f64; k]),
        SelectionMode::NormWeighted => {
            let weights: Vec<f64> = column_norms_sq(h).into_iter().map(|n| n + xi).collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::DegenerateSelection);
            }
            Ok(weights.into_iter().map(|w| w / total).collect())
        }
    }
}

fn column_norms_sq(h: &CMat) -> Vec<f64> {
    h.column_iter().map(|c| c.norm_squared()).collect()
}

/// State of one Kaczmarz solve for the right-hand side `e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KaczmarzRun {
    /// Antenna-domain state, length `M_sub`.
    pub m: CVec,
    /// User-domain state, length `K_sub`; converges to `w_k`.
    pub n: CVec,
    /// Completed iterations.
    pub t: usize,
    pub rhs_index: usize,
    /// Row projected in the latest iteration.
    pub last_row: Option<usize>,
    /// `|eta|` per iteration, when logging is enabled.
    pub residual_log: Option<Vec<f64>>,
}

impl KaczmarzRun {
    pub fn new(m_sub: usize, k_sub: usize, rhs_index: usize) -> Self {
        assert!(rhs_index < k_sub, "basis index out of range");
        Self {
            m: CVec::zeros(m_sub),
            n: CVec::zeros(k_sub),
            t: 0,
            rhs_index,
            last_row: None,
            residual_log: None,
        }
    }

    pub fn with_residual_log(mut self) -> Self {
        self.residual_log = Some(Vec::new());
        self
    }

    /// Augmented iterate `z = [m; sqrt(xi) n]`.
    pub fn augmented(&self, xi: f64) -> CVec {
        let s = xi.sqrt();
        let mut z = CVec::zeros(self.m.len() + self.n.len());
        z.rows_mut(0, self.m.len()).copy_from(&self.m);
        for (i, v) in self.n.iter().enumerate() {
            z[self.m.len() + i] = v * s;
        }
        z
    }

    /// `[e_k]_r - h_r^H m - xi n_r`, the residual of row `r`.
    pub fn row_residual(&self, h: &CMat, xi: f64, r: usize) -> C64 {
        let e = if r == self.rhs_index { 1.0 } else { 0.0 };
        C64::new(e, 0.0) - h.column(r).dotc(&self.m) - self.n[r] * xi
    }
}

/// One projection onto row `r`; returns `eta`.
pub fn rka_step(run: &mut KaczmarzRun, h: &CMat, xi: f64, r: usize) -> C64 {
    let norm = h.column(r).norm_squared() + xi;
    step_with_norm(run, h, xi, r, norm)
}

#[inline]
fn step_with_norm(run: &mut KaczmarzRun, h: &CMat, xi: f64, r: usize, row_norm: f64) -> C64 {
    let eta = run.row_residual(h, xi, r) / row_norm;
    run.m.axpy(eta, &h.column(r), C64::new(1.0, 0.0));
    run.n[r] += eta;
    run.t += 1;
    run.last_row = Some(r);
    if let Some(log) = run.residual_log.as_mut() {
        log.push(eta.norm());
    }
    eta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub iterations: usize,
    pub mode: SelectionMode,
    /// Stop once every row has produced `|eta| < 1e-12` within one unbroken
    /// run of small residuals.
    pub early_exit: bool,
    pub log_residuals: bool,
}

impl SolveOptions {
    pub fn new(iterations: usize, mode: SelectionMode) -> Self {
        Self {
            iterations,
            mode,
            early_exit: false,
            log_residuals: false,
        }
    }
}

enum RowSampler {
    Uniform(usize),
    Weighted(WeightedIndex<f64>),
    Permutation { order: Vec<usize>, pos: usize },
}

impl RowSampler {
    fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self {
            RowSampler::Uniform(k) => rng.random_range(0..*k),
            RowSampler::Weighted(w) => w.sample(rng),
            RowSampler::Permutation { order, pos } => {
                if *pos == 0 {
                    order.shuffle(rng);
                }
                let r = order[*pos];
                *pos = (*pos + 1) % order.len();
                r
            }
        }
    }
}

/// `(H^H H + xi I) w = e_k` for one subarray channel, with the row norms
/// precomputed once and shared across right-hand sides.
#[derive(Debug, Clone)]
pub struct RegularizedSystem<'a> {
    h: &'a CMat,
    xi: f64,
    row_norms: Vec<f64>,
}

impl<'a> RegularizedSystem<'a> {
    pub fn new(h: &'a CMat, xi: f64) -> Result<Self> {
        if h.ncols() == 0 || h.nrows() == 0 {
            return Err(Error::Dimension("H must be nonempty".into()));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::param("xi", "must be finite and > 0"));
        }
        let row_norms = column_norms_sq(h).into_iter().map(|n| n + xi).collect();
        Ok(Self { h, xi, row_norms })
    }

    pub fn channel(&self) -> &CMat {
        self.h
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    fn sampler(&self, mode: SelectionMode) -> Result<RowSampler> {
        Ok(match mode {
            SelectionMode::Uniform => RowSampler::Uniform(self.users()),
            SelectionMode::NormWeighted => RowSampler::Weighted(
                WeightedIndex::new(&self.row_norms).map_err(|_| Error::DegenerateSelection)?,
            ),
            SelectionMode::Permutation => RowSampler::Permutation {
                order: (0..self.users()).collect(),
                pos: 0,
            },
        })
    }

    /// Run the solver for `e_k`, calling `observe` after every iteration.
    pub fn solve_observed<R, F>(
        &self,
        k: usize,
        opts: &SolveOptions,
        rng: &mut R,
        mut observe: F,
    ) -> Result<KaczmarzRun>
    where
        R: Rng + ?Sized,
        F: FnMut(&KaczmarzRun),
    {
        if k >= self.users() {
            return Err(Error::param(
                "k",
                format!("basis index {k} >= {}", self.users()),
            ));
        }
        if opts.iterations == 0 {
            return Err(Error::param("iterations", "must be >= 1"));
        }
        let mut sampler = self.sampler(opts.mode)?;
        let mut run = KaczmarzRun::new(self.h.nrows(), self.users(), k);
        if opts.log_residuals {
            run = run.with_residual_log();
        }
        // Rows confirmed converged since the last large residual. A repeated
        // row always gives eta ~ 0, so consecutive small steps alone prove
        // nothing about the other rows.
        let mut settled = vec![false; self.users()];
        let mut settled_count = 0;
        for _ in 0..opts.iterations {
            let r = sampler.next(rng);
            let eta = step_with_norm(&mut run, self.h, self.xi, r, self.row_norms[r]);
            observe(&run);
            if opts.early_exit {
                if eta.norm() < EARLY_EXIT_TOL {
                    if !settled[r] {
                        settled[r] = true;
                        settled_count += 1;
                    }
                    if settled_count == self.users() {
                        break;
                    }
                } else if settled_count > 0 {
                    settled.fill(false);
                    settled_count = 0;
                }
            }
        }
        Ok(run)
    }

    pub fn solve<R: Rng + ?Sized>(
        &self,
        k: usize,
        opts: &SolveOptions,
        rng: &mut R,
    ) -> Result<KaczmarzRun> {
        self.solve_observed(k, opts, rng, |_| {})
    }

    /// `A = [H; sqrt(xi) I]`.
    pub fn augmented_matrix(&self) -> CMat {
        let (m, k) = self.h.shape();
        let mut a = CMat::zeros(m + k, k);
        a.view_mut((0, 0), (m, k)).copy_from(self.h);
        let s = C64::new(self.xi.sqrt(), 0.0);
        for i in 0..k {
            a[(m + i, i)] = s;
        }
        a
    }

    /// `(H^H H + xi I)^{-1}` by Cholesky.
    pub fn exact_inverse(&self) -> Result<CMat> {
        let k = self.users();
        let gram = self.h.adjoint() * self.h + CMat::identity(k, k) * C64::new(self.xi, 0.0);
        let chol = Cholesky::new(gram).ok_or_else(|| Error::Singular("H^H H + xi I".into()))?;
        Ok(chol.inverse())
    }

    pub fn exact_column(&self, k: usize) -> Result<CVec> {
        let inv = self.exact_inverse()?;
        Ok(DVector::from_iterator(
            inv.nrows(),
            inv.column(k).iter().copied(),
        ))
    }
}

/// Approximate column `k` of `(H^H H + xi I)^{-1}` with `iterations` steps.
pub fn rka_solve<R: Rng + ?Sized>(
    h: &CMat,
    xi: f64,
    k: usize,
    iterations: usize,
    mode: SelectionMode,
    rng: &mut R,
) -> Result<CVec> {
    let sys = RegularizedSystem::new(h, xi)?;
    Ok(sys.solve(k, &SolveOptions::new(iterations, mode), rng)?.n)
}

/// Normalized minimum gain `sigma_min_nonzero(A)^2 / ||A||_F^2`.
pub fn kchi(a: &CMat) -> Result<f64> {
    let fro = frobenius_sq(a);
    if fro == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let tol = max * a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    let min = sv
        .iter()
        .cloned()
        .filter(|&s| s > tol)
        .fold(f64::INFINITY, f64::min);
    Ok((min * min / fro).min(1.0))
}

/// Upper bound `(1 - kchi)^t * init_err_sq` on the expected squared error.
pub fn convergence_bound(kchi: f64, t: usize, init_err_sq: f64) -> f64 {
    debug_assert!(kchi > 0.0 && kchi <= 1.0);
    if t == 0 {
        return init_err_sq;
    }
    (1.0 - kchi).max(0.0).powf(t as f64) * init_err_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_normal;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_h(m: usize, k: usize, seed: u64) -> CMat {
        let v = complex_normal(&mut rng(seed), m * k, 1.0);
        CMat::from_iterator(m, k, v.iter().copied())
    }

    fn rel_err(a: &CVec, b: &CVec) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn uniform_probs() {
        let p = selection_probs(&random_h(3, 4, 1), 0.1, SelectionMode::Uniform).unwrap();
        assert_eq!(p, vec![0.25; 4]);
    }

    #[test]
    fn weighted_probs_equal_norms_are_uniform() {
        let h = CMat::identity(4, 4) * C64::new(2.0, 0.0);
        let p = selection_probs(&h, 0.3, SelectionMode::NormWeighted).unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_probs_by_hand() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(0, 1)] = C64::new(1.0, 1.0);
        h[(1, 1)] = C64::new(1.0, 0.0);
        let p = selection_probs(&h, 1.0, SelectionMode::NormWeighted).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_probs_reject_degenerate() {
        let h = CMat::zeros(3, 2);
        assert!(matches!(
            selection_probs(&h, 0.0, SelectionMode::NormWeighted),
            Err(Error::DegenerateSelection)
        ));
    }

    #[test]
    fn zero_channel_first_step() {
        let h = CMat::zeros(3, 2);
        let mut run = KaczmarzRun::new(3, 2, 1);
        let eta = rka_step(&mut run, &h, 1.0, 1);
        assert_eq!(eta, C64::new(1.0, 0.0));
        assert_eq!(run.n[1], C64::new(1.0, 0.0));
        assert_eq!(run.n[0], C64::new(0.0, 0.0));
        assert!(run.m.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn single_user_converges_in_one_step() {
        let h = CMat::from_column_slice(
            3,
            1,
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
        );
        let mut run = KaczmarzRun::new(3, 1, 0);
        let eta = rka_step(&mut run, &h, 1.0, 0);
        assert!((eta - C64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((run.n[0] - C64::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_channel_solution() {
        let h = CMat::zeros(4, 3);
        let w = rka_solve(&h, 2.0, 0, 200, SelectionMode::Uniform, &mut rng(1)).unwrap();
        assert!((w[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(w[1], C64::new(0.0, 0.0));
        assert_eq!(w[2], C64::new(0.0, 0.0));
    }

    #[test]
    fn matches_direct_inverse() {
        let h = random_h(8, 4, 42);
        let sys = RegularizedSystem::new(&h, 0.1).unwrap();
        for mode in [
            SelectionMode::Uniform,
            SelectionMode::NormWeighted,
            SelectionMode::Permutation,
        ] {
            for k in 0..4 {
                let w = rka_solve(&h, 0.1, k, 2000, mode, &mut rng(k as u64)).unwrap();
                let exact = sys.exact_column(k).unwrap();
                assert!(
                    rel_err(&w, &exact) < 1e-6,
                    "{mode:?} k={k}: {}",
                    rel_err(&w, &exact)
                );
            }
        }
    }

    #[test]
    fn oracle_equivalence_small_instances() {
        for mode in [SelectionMode::Uniform, SelectionMode::NormWeighted] {
            for &xi in &[0.01, 0.1, 1.0] {
                let mut total = 0.0;
                for seed in 0..20u64 {
                    let m = 4 + (seed as usize % 13);
                    let k = 1 + (seed as usize % 8).min(m - 1);
                    let h = random_h(m, k, 1000 + seed);
                    let sys = RegularizedSystem::new(&h, xi).unwrap();
                    let col = (seed as usize) % k;
                    let w = rka_solve(&h, xi, col, 5000, mode, &mut rng(seed)).unwrap();
                    let e = rel_err(&w, &sys.exact_column(col).unwrap());
                    assert!(e < 1e-4, "{mode:?} xi={xi} seed={seed}: {e}");
                    total += e;
                }
                assert!(
                    total / 20.0 < 1e-5,
                    "{mode:?} xi={xi}: mean {}",
                    total / 20.0
                );
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let h = random_h(6, 3, 3);
        for mode in [
            SelectionMode::Uniform,
            SelectionMode::NormWeighted,
            SelectionMode::Permutation,
        ] {
            let a = rka_solve(&h, 0.1, 2, 300, mode, &mut rng(9)).unwrap();
            let b = rka_solve(&h, 0.1, 2, 300, mode, &mut rng(9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn scaling_covariance() {
        let h = random_h(6, 3, 4);
        let c = 3.0;
        let hc = &h * C64::new(c, 0.0);
        for mode in [SelectionMode::Uniform, SelectionMode::NormWeighted] {
            let w = rka_solve(&h, 0.2, 1, 500, mode, &mut rng(5)).unwrap();
            let wc = rka_solve(&hc, 0.2 * c * c, 1, 500, mode, &mut rng(5)).unwrap();
            assert!(rel_err(&(wc * C64::new(c * c, 0.0)), &w) < 1e-12);
        }
    }

    #[test]
    fn permutation_visits_every_row_per_sweep() {
        let h = random_h(5, 4, 6);
        let sys = RegularizedSystem::new(&h, 0.1).unwrap();
        let mut rows = Vec::new();
        sys.solve_observed(
            0,
            &SolveOptions::new(12, SelectionMode::Permutation),
            &mut rng(2),
            |run| {
                rows.push(run.last_row.unwrap());
            },
        )
        .unwrap();
        assert_eq!(rows.len(), 12);
        for sweep in rows.chunks(4) {
            let mut s = sweep.to_vec();
            s.sort_unstable();
            assert_eq!(s, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn early_exit_stops_converged_runs() {
        let h = random_h(6, 2, 8);
        let sys = RegularizedSystem::new(&h, 0.5).unwrap();
        let mut opts = SolveOptions::new(100_000, SelectionMode::NormWeighted);
        opts.early_exit = true;
        opts.log_residuals = true;
        let run = sys.solve(0, &opts, &mut rng(1)).unwrap();
        assert!(run.t < 100_000);
        let log = run.residual_log.unwrap();
        assert_eq!(log.len(), run.t);
        assert!(log[log.len() - 2..].iter().all(|&e| e < EARLY_EXIT_TOL));
        assert!(rel_err(&run.n, &sys.exact_column(0).unwrap()) < 1e-9);
    }

    #[test]
    fn solver_rejects_bad_inputs() {
        let h = random_h(3, 2, 1);
        assert!(RegularizedSystem::new(&h, 0.0).is_err());
        assert!(RegularizedSystem::new(&CMat::zeros(0, 0), 1.0).is_err());
        let sys = RegularizedSystem::new(&h, 1.0).unwrap();
        assert!(sys
            .solve(
                2,
                &SolveOptions::new(5, SelectionMode::Uniform),
                &mut rng(0)
            )
            .is_err());
        assert!(sys
            .solve(
                0,
                &SolveOptions::new(0, SelectionMode::Uniform),
                &mut rng(0)
            )
            .is_err());
    }

    #[test]
    fn kchi_examples() {
        assert!((kchi(&CMat::identity(5, 5)).unwrap() - 0.2).abs() < 1e-15);
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = C64::new(2.0, 0.0);
        d[(1, 1)] = C64::new(1.0, 0.0);
        assert!((kchi(&d).unwrap() - 0.2).abs() < 1e-14);
        assert!(matches!(kchi(&CMat::zeros(3, 2)), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn kchi_ignores_null_directions() {
        // Rank-one: only one nonzero singular value, so kchi = 1.
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = C64::new(2.0, 0.0);
        a[(0, 1)] = C64::new(2.0, 0.0);
        assert!((kchi(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(convergence_bound(0.3, 0, 2.5), 2.5);
        assert_eq!(convergence_bound(1.0, 4, 2.5), 0.0);
        assert!((convergence_bound(0.1, 10, 1.0) - 0.348_678_440_1).abs() < 1e-10);
    }

    #[test]
    fn uniform_error_decreases_in_expectation() {
        let h = random_h(6, 4, 77);
        let xi = 0.1;
        let sys = RegularizedSystem::new(&h, xi).unwrap();
        let z_star = sys.augmented_matrix() * sys.exact_column(2).unwrap();
        let t_max = 60;
        let runs = 300;
        let mut mean = vec![0.0; t_max];
        for seed in 0..runs {
            sys.solve_observed(
                2,
                &SolveOptions::new(t_max, SelectionMode::Uniform),
                &mut rng(seed),
                |run| {
                    mean[run.t - 1] += (run.augmented(xi) - &z_star).norm_squared() / runs as f64;
                },
            )
            .unwrap();
        }
        let init = z_star.norm_squared();
        assert!(mean[0] < init);
        for t in 1..t_max {
            assert!(mean[t] <= mean[t - 1] * (1.0 + 1e-12), "t={t}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projection_zeroes_selected_row(
            m in 1usize..10, k in 1usize..6, seed in any::<u64>(),
            xi in 1e-3f64..10.0, steps in 0usize..20,
        ) {
            let h = random_h(m, k, seed);
            let mut g = rng(seed ^ 0xabc);
            let mut run = KaczmarzRun::new(m, k, (seed as usize) % k);
            for _ in 0..steps {
                let r = g.random_range(0..k);
                rka_step(&mut run, &h, xi, r);
            }
            let r = (seed as usize / 7) % k;
            rka_step(&mut run, &h, xi, r);
            let res = run.row_residual(&h, xi, r);
            let scale = 1.0 + run.n.norm() * xi + run.m.norm() * h.column(r).norm();
            prop_assert!(res.norm() <= 1e-12 * scale, "residual {}", res.norm());
        }

        #[test]
        fn probabilities_are_normalized(
            m in 1usize..10, k in 1usize..8, seed in any::<u64>(), xi in 0.0f64..5.0,
        ) {
            let h = random_h(m, k, seed);
            for mode in [SelectionMode::Uniform, SelectionMode::NormWeighted, SelectionMode::Permutation] {
                let p = selection_probs(&h, xi, mode).unwrap();
                prop_assert!(p.iter().all(|&x| x >= 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn m_tracks_h_times_n(m in 1usize..8, k in 1usize..5, seed in any::<u64>()) {
            // m = H n holds along the whole trajectory since both start at 0.
            let h = random_h(m, k, seed);
            let sys = RegularizedSystem::new(&h, 0.3).unwrap();
            let run = sys.solve(0, &SolveOptions::new(50, SelectionMode::NormWeighted), &mut rng(seed)).unwrap();
            let diff = (&run.m - &h * &run.n).norm();
            prop_assert!(diff < 1e-10 * (1.0 + run.m.norm()));
        }
    }
}
