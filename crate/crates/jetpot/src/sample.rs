//! Seeded random jets and matrices for the sampled checks.
//!
//! Distribution: r and p entries are uniform on [−1, 1] times a magnitude
//! 10^U[−1,1]; A = QΛQᵀ with Haar-ish Q (QR of a Gaussian matrix).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::jets::{Jet, SymMatrix, Vector};

pub type JetRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

/// `JETPOT_SEED` if set and parseable, else 42.
pub fn default_seed() -> u64 {
    std::env::var("JETPOT_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> JetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut JetRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn magnitude(rng: &mut JetRng) -> f64 {
    10f64.powf(uniform(rng, -1.0, 1.0))
}

pub fn gaussian(rng: &mut JetRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vector(rng: &mut JetRng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| gaussian(rng))
}

pub fn unit_vector(rng: &mut JetRng, n: usize) -> Vector {
    loop {
        let v = gaussian_vector(rng, n);
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}

pub fn orthogonal(rng: &mut JetRng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Symmetric matrix with spectrum uniform on [−scale, scale].
pub fn symmetric(rng: &mut JetRng, n: usize, scale: f64) -> SymMatrix {
    let q = orthogonal(rng, n);
    let lam: Vec<f64> = (0..n).map(|_| scale * uniform(rng, -1.0, 1.0)).collect();
    SymMatrix::from_spectrum(&q, &lam)
}

/// Positive semidefinite matrix with spectrum uniform on [0, scale].
pub fn psd(rng: &mut JetRng, n: usize, scale: f64) -> SymMatrix {
    let q = orthogonal(rng, n);
    let lam: Vec<f64> = (0..n).map(|_| scale * rng.random::<f64>()).collect();
    SymMatrix::from_spectrum(&q, &lam)
}

/// A random jet from the harness distribution.
pub fn jet(rng: &mut JetRng, n: usize) -> Jet {
    let sr = magnitude(rng);
    let r = sr * uniform(rng, -1.0, 1.0);
    let sp = magnitude(rng);
    let p = Vector::from_fn(n, |_, _| sp * uniform(rng, -1.0, 1.0));
    let sa = magnitude(rng);
    let a = symmetric(rng, n, sa);
    Jet::from_parts(r, p, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut g = rng(1);
        let q = orthogonal(&mut g, 4);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = jet(&mut rng(7), 3);
        let b = jet(&mut rng(7), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn psd_spectrum_is_nonnegative() {
        let mut g = rng(3);
        for _ in 0..50 {
            assert!(psd(&mut g, 3, 2.0).lambda_min() >= -1e-12);
        }
    }
}
