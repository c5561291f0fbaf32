//! Seeded random inputs for the verification harnesses.
//!
//! Every trial draws from its own ChaCha8 stream, seeded with
//! `splitmix64(seed ^ splitmix64(index))`. Trials are therefore
//! independent of evaluation order, and a run is reproducible from
//! `(seed, trials)` alone.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{qr_unitary, OperatorMatrix};

pub const GENERATOR: &str = "ChaCha8, per-trial seed splitmix64(seed ^ splitmix64(trial))";

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| gaussian(rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorEnsemble {
    /// i.i.d. complex Gaussian entries.
    Ginibre,
    /// `u v†` with Gaussian `u`, `v`.
    RankOne,
    /// Diagonal with Gaussian entries.
    Diagonal,
    /// `U S U†` with `S` holding a handful of Gaussian entries and `U` Haar-like.
    ConjugatedSparse,
}

impl OperatorEnsemble {
    pub const ALL: [OperatorEnsemble; 4] = [
        OperatorEnsemble::Ginibre,
        OperatorEnsemble::RankOne,
        OperatorEnsemble::Diagonal,
        OperatorEnsemble::ConjugatedSparse,
    ];

    /// Round-robin choice used by the harnesses.
    pub fn for_trial(index: u64) -> Self {
        Self::ALL[(index % Self::ALL.len() as u64) as usize]
    }

    pub fn sample(self, n: usize, rng: &mut impl Rng) -> OperatorMatrix {
        match self {
            OperatorEnsemble::Ginibre => ginibre(n, rng),
            OperatorEnsemble::RankOne => {
                let u = gaussian_vector(rng, n);
                let v = gaussian_vector(rng, n);
                OperatorMatrix::from_fn(n, |i, j| u[i] * v[j].conj())
            }
            OperatorEnsemble::Diagonal => OperatorMatrix::diagonal(&gaussian_vector(rng, n)),
            OperatorEnsemble::ConjugatedSparse => {
                let mut s = OperatorMatrix::zeros(n);
                let k = rng.gen_range(1..=n.min(3));
                for idx in sample(rng, n * n, k) {
                    s[(idx / n, idx % n)] = gaussian(rng);
                }
                let u = random_unitary(n, rng);
                u.matmul(&s).and_then(|us| us.matmul(&u.adjoint())).expect("square")
            }
        }
    }
}

pub fn ginibre(n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    OperatorMatrix::from_row_major(n, gaussian_vector(rng, n * n)).expect("finite Gaussian entries")
}

/// Unitary from the QR factor of a Ginibre matrix (Haar distributed up to
/// the phase convention of the QR).
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    loop {
        if let Ok(q) = qr_unitary(&ginibre(n, rng)) {
            return q;
        }
    }
}

/// Shapes of random functions on a finite dual group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionEnsemble {
    /// i.i.d. complex Gaussian values.
    Gaussian,
    /// Gaussian values on a few random points, zero elsewhere.
    Sparse,
    /// Unimodular random phases on a random subset.
    PhasedIndicator,
    /// Gaussian magnitudes decaying away from one random point.
    Peaked,
}

impl FunctionEnsemble {
    pub const ALL: [FunctionEnsemble; 4] = [
        FunctionEnsemble::Gaussian,
        FunctionEnsemble::Sparse,
        FunctionEnsemble::PhasedIndicator,
        FunctionEnsemble::Peaked,
    ];

    pub fn for_trial(index: u64) -> Self {
        Self::ALL[(index % Self::ALL.len() as u64) as usize]
    }

    pub fn sample(self, len: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); len];
        match self {
            FunctionEnsemble::Gaussian => v = gaussian_vector(rng, len),
            FunctionEnsemble::Sparse => {
                let k = rng.gen_range(1..=len.min(4));
                for i in sample(rng, len, k) {
                    v[i] = gaussian(rng);
                }
            }
            FunctionEnsemble::PhasedIndicator => {
                let k = rng.gen_range(1..=len);
                for i in sample(rng, len, k) {
                    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    v[i] = Complex64::from_polar(1.0, theta);
                }
            }
            FunctionEnsemble::Peaked => {
                let center = rng.gen_range(0..len);
                let width: f64 = rng.gen_range(0.5..4.0);
                for (i, slot) in v.iter_mut().enumerate() {
                    let d = (i as f64 - center as f64).abs();
                    *slot = gaussian(rng) * (-d / width).exp();
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| trial_rng(42, 3).gen()).collect();
        let b: Vec<f64> = (0..4).map(|_| trial_rng(42, 3).gen()).collect();
        assert_eq!(a, b);
        let x: f64 = trial_rng(42, 3).gen();
        let y: f64 = trial_rng(42, 4).gen();
        let z: f64 = trial_rng(43, 3).gen();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn ensembles_have_expected_structure() {
        let mut rng = trial_rng(7, 0);
        let r1 = OperatorEnsemble::RankOne.sample(5, &mut rng);
        let s = crate::linalg::singular_values(&r1).unwrap();
        assert_eq!(s.rank(1e-10), 1);
        let d = OperatorEnsemble::Diagonal.sample(4, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(d[(i, j)], Complex64::default());
                }
            }
        }
        let u = random_unitary(6, &mut rng);
        let e = &u.adjoint().matmul(&u).unwrap() - &OperatorMatrix::identity(6);
        assert!(e.frobenius_norm() < 1e-12);
        for ens in FunctionEnsemble::ALL {
            let f = ens.sample(16, &mut rng);
            assert_eq!(f.len(), 16);
            assert!(f.iter().any(|z| z.norm() > 0.0));
        }
    }
}
