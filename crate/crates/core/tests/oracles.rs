//! Values frozen from an independent dense implementation (explicit Weyl
//! matrices, LAPACK SVD) and a nalgebra eigen-decomposition oracle.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;

use qsobolev::embedding::{counterexample_run, multiplier_norm, SetSelector};
use qsobolev::ensemble::{ginibre, trial_rng};
use qsobolev::group::HaarConvention;
use qsobolev::linalg::{schatten_norm, singular_values, OperatorMatrix};
use qsobolev::sobolev::{pairing_analytic_bound, sobolev_norm, NegativeOrderSpec, SobolevSpec, TestWeightSign, Weight};
use qsobolev::weyl::WeylSystem;

fn fixed_operator(n: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(n, |j, k| {
        let (jf, kf) = (j as f64, k as f64);
        let mut z = Complex64::new(jf + 1.0 - 0.25 * jf * kf, 0.5 * (2.0 * kf - jf));
        if j == k {
            z += Complex64::new(0.7, -0.3) * (jf + 1.0);
        }
        z
    })
}

#[test]
fn singular_values_of_fixed_operator() {
    let s = singular_values(&fixed_operator(4)).unwrap();
    let expected = [11.377225084520736, 2.662880307288134, 1.9986369700603632, 1.274075393027069];
    for (got, want) in s.values().iter().zip(expected) {
        assert_relative_eq!(*got, want, max_relative = 1e-13);
    }
}

#[test]
fn schatten_norms_of_fixed_operator() {
    let t = fixed_operator(4);
    for (p, want) in [
        (1.0, 17.3128177548963),
        (1.5, 13.020774633839162),
        (2.0, 11.92266748676654),
        (3.0, 11.451252677196141),
    ] {
        assert_relative_eq!(schatten_norm(&t, p).unwrap(), want, max_relative = 1e-13);
    }
}

#[test]
fn sobolev_norms_of_fixed_operator() {
    let sys = WeylSystem::standard(4).unwrap();
    let t = fixed_operator(4);
    let w = Weight::euclidean(sys.group());
    for (s, q, homogeneous, want) in [
        (1.0, 4.0, false, 19.448015093150467),
        (2.0, 3.0, false, 44.78325832087834),
        (1.5, 4.0, true, 24.14642984155476),
    ] {
        let spec = SobolevSpec::from_q(s, q, w.clone(), homogeneous).unwrap();
        assert_relative_eq!(sobolev_norm(&sys, &t, &spec).unwrap(), want, max_relative = 1e-13);
    }
}

#[test]
fn pairing_bound_constants() {
    let sys = WeylSystem::standard(8).unwrap();
    let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(sys.group())).unwrap();
    assert_relative_eq!(
        pairing_analytic_bound(&sys, &spec, TestWeightSign::Plus),
        10.911599723647202,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        pairing_analytic_bound(&sys, &spec, TestWeightSign::Minus),
        1.0925542455436243,
        max_relative = 1e-13
    );
}

#[test]
fn multiplier_norm_constants() {
    let s4 = WeylSystem::standard(4).unwrap();
    let m = multiplier_norm(&Weight::euclidean(s4.group()), 1.0, 2.0, true, HaarConvention::phase_space(4));
    assert_relative_eq!(m, 1.1737877907772674, max_relative = 1e-14);
    let s8 = WeylSystem::standard(8).unwrap();
    let m = multiplier_norm(&Weight::euclidean(s8.group()), 1.0, 4.0, false, HaarConvention::phase_space(8));
    assert_relative_eq!(m, 0.649636641163454, max_relative = 1e-14);
}

#[test]
fn counterexample_lex_first_norms() {
    let sys = |n| WeylSystem::standard(n).unwrap();
    let sweep = vec![(sys(8), 8), (sys(32), 100), (sys(16), 4)];
    let r = counterexample_run(&sweep, 4.0, 8.0, SetSelector::LexFirst).unwrap();
    let norms: Vec<f64> = r.points.iter().map(|p| p.schatten_beta_norm).collect();
    // sorted by decreasing epsilon: 3.125, 1, 0.25
    assert_relative_eq!(norms[0], 1.834179197779879, max_relative = 1e-12);
    assert_relative_eq!(norms[1], 1.0, max_relative = 1e-12);
    assert_relative_eq!(norms[2], 1.6034957733717385, max_relative = 1e-12);
}

fn to_nalgebra(t: &OperatorMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(t.dim(), t.dim(), t.entries())
}

#[test]
fn singular_values_match_eigen_oracle() {
    for i in 0..200u64 {
        let n = 1 + (i % 8) as usize;
        let t = ginibre(n, &mut trial_rng(0x5eed, i));
        let a = to_nalgebra(&t);
        let gram = a.adjoint() * &a;
        let mut oracle: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).collect();
        oracle.sort_by(|x, y| y.total_cmp(x));
        let ours = singular_values(&t).unwrap();
        for (got, want) in ours.values().iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-10, "trial {i}: {got} vs {want}");
        }
    }
}
