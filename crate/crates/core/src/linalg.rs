//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues below this are treated as zero when taking square roots.
pub const EIG_CLAMP: f64 = 1e-12;

/// Principal square root of a Hermitian positive-semidefinite matrix.
///
/// Eigenvalues below [`EIG_CLAMP`] (including small negative round-off) are
/// clamped to zero.
pub fn hermitian_sqrt(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return CMat::zeros(n, n);
    }
    // Symmetrize to guard the eigensolver against round-off asymmetry.
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|l| if l < EIG_CLAMP { 0.0 } else { l.sqrt() });
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(roots[j], 0.0);
    }
    &scaled * v.adjoint()
}

/// Draw a vector with i.i.d. `CN(0, variance)` entries.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVec {
    let s = (variance / 2.0).sqrt();
    DVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

pub fn frobenius_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && (a - a.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Compensated (Neumaier) accumulator. Reductions over Monte-Carlo trials run
/// through this in trial order, so results are independent of scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = CMat::from_fn(n, n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        &b * b.adjoint()
    }

    #[test]
    fn sqrt_squares_back() {
        let a = random_psd(6, 1);
        let r = hermitian_sqrt(&a);
        assert!(is_hermitian(&r, 1e-10));
        let err = frobenius_sq(&(&r * &r - &a)).sqrt() / frobenius_sq(&a).sqrt();
        assert!(err < 1e-12, "err {err}");
    }

    #[test]
    fn sqrt_of_rank_deficient_block() {
        let mut a = CMat::zeros(5, 5);
        a.view_mut((1, 1), (2, 2)).copy_from(&random_psd(2, 3));
        let r = hermitian_sqrt(&a);
        for (i, j) in [(0, 0), (4, 4), (0, 2), (3, 1)] {
            assert!(r[(i, j)].norm() < 1e-7);
        }
        assert!((frobenius_sq(&(&r * &r - &a))).sqrt() < 1e-9);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s: NeumaierSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
