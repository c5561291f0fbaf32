use num_complex::Complex64;
use proptest::prelude::*;

use qsobolev::embedding::compute_exponents;
use qsobolev::ensemble::{ginibre, trial_rng, FunctionEnsemble};
use qsobolev::group::{conjugate_exponent, lq_norm_of_moduli};
use qsobolev::linalg::{schatten_norm, singular_values, trace_pairing};
use qsobolev::qft::{qft_forward, qft_inverse, PhaseFunction};
use qsobolev::sobolev::{
    make_test_element, pairing_analytic_bound, pairing_ratio, sobolev_norm, NegativeOrderSpec, SobolevSpec,
    TestWeightSign, Weight,
};
use qsobolev::weyl::{WeylConvention, WeylSystem};

fn system() -> impl Strategy<Value = WeylSystem> {
    (1usize..=6, prop_oneof![Just(WeylConvention::Standard), Just(WeylConvention::Symmetric)])
        .prop_map(|(n, c)| WeylSystem::new(n, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plancherel_holds(sys in system(), seed in any::<u64>()) {
        let t = ginibre(sys.dim(), &mut trial_rng(seed, 0));
        let f = qft_forward(&sys, &t).unwrap();
        let s2 = t.frobenius_norm();
        prop_assert!((f.l_q_norm(2.0).unwrap() - s2).abs() <= 1e-11 * s2);
        let back = qft_inverse(&sys, &f).unwrap();
        prop_assert!((&back - &t).frobenius_norm() <= 1e-11 * s2);
    }

    #[test]
    fn hausdorff_young_forward(sys in system(), seed in any::<u64>(), p in 1.0f64..=2.0) {
        let t = ginibre(sys.dim(), &mut trial_rng(seed, 1));
        let lhs = qft_forward(&sys, &t).unwrap().l_q_norm(conjugate_exponent(p)).unwrap();
        prop_assert!(lhs <= schatten_norm(&t, p).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn hausdorff_young_inverse(sys in system(), seed in any::<u64>(), p in 1.0f64..=2.0, which in 0u64..4) {
        let n = sys.dim();
        let vals = FunctionEnsemble::for_trial(which).sample(n * n, &mut trial_rng(seed, 2));
        let f = PhaseFunction::on_phase_space(&sys, vals).unwrap();
        let lhs = schatten_norm(&qft_inverse(&sys, &f).unwrap(), conjugate_exponent(p)).unwrap();
        prop_assert!(lhs <= f.l_q_norm(p).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn schatten_holder(seed in any::<u64>(), n in 1usize..=6, p in 1.0f64..8.0, q in 1.0f64..8.0) {
        let mut rng = trial_rng(seed, 3);
        let a = ginibre(n, &mut rng);
        let b = ginibre(n, &mut rng);
        let r = 1.0 / (1.0 / p + 1.0 / q);
        let lhs = schatten_norm(&a.matmul(&b).unwrap(), r).unwrap();
        let rhs = schatten_norm(&a, p).unwrap() * schatten_norm(&b, q).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }

    #[test]
    fn trace_duality(seed in any::<u64>(), n in 1usize..=6, p in 1.0f64..8.0) {
        let mut rng = trial_rng(seed, 4);
        let t = ginibre(n, &mut rng);
        let w = ginibre(n, &mut rng);
        let lhs = trace_pairing(&t, &w).unwrap().norm();
        let rhs = schatten_norm(&t, p).unwrap() * schatten_norm(&w, conjugate_exponent(p)).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }

    #[test]
    fn singular_values_are_unitarily_invariant(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = trial_rng(seed, 5);
        let t = ginibre(n, &mut rng);
        let u = qsobolev::ensemble::random_unitary(n, &mut rng);
        let ut = u.matmul(&t).unwrap();
        let a = singular_values(&t).unwrap();
        let b = singular_values(&ut).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * a.largest());
        }
    }

    #[test]
    fn sobolev_triangle_and_homogeneity(
        sys in system(), seed in any::<u64>(), s in 0.1f64..3.0, q in 2.1f64..8.0, re in -3.0f64..3.0, im in -3.0f64..3.0
    ) {
        let mut rng = trial_rng(seed, 6);
        let t = ginibre(sys.dim(), &mut rng);
        let u = ginibre(sys.dim(), &mut rng);
        let spec = SobolevSpec::from_q(s, q, Weight::euclidean(sys.group()), false).unwrap();
        let nt = sobolev_norm(&sys, &t, &spec).unwrap();
        let nu = sobolev_norm(&sys, &u, &spec).unwrap();
        prop_assert!(sobolev_norm(&sys, &(&t + &u), &spec).unwrap() <= (nt + nu) * (1.0 + 1e-10));
        let c = Complex64::new(re, im);
        let nct = sobolev_norm(&sys, &t.scale(c), &spec).unwrap();
        prop_assert!((nct - c.norm() * nt).abs() <= 1e-12 * c.norm() * nt + 1e-300);
    }

    #[test]
    fn weighted_holder_on_dual(seed in any::<u64>(), len in 1usize..64, a in 1.0f64..10.0, b in 1.0f64..10.0) {
        let mut rng = trial_rng(seed, 7);
        let f: Vec<f64> = FunctionEnsemble::Gaussian.sample(len, &mut rng).iter().map(|z| z.norm()).collect();
        let g: Vec<f64> = FunctionEnsemble::Gaussian.sample(len, &mut rng).iter().map(|z| z.norm()).collect();
        let sigma = 1.0 / (1.0 / a + 1.0 / b);
        let fg: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x * y).collect();
        let mass = 1.0 / 7.0;
        let lhs = lq_norm_of_moduli(&fg, sigma, mass);
        let rhs = lq_norm_of_moduli(&f, a, mass) * lq_norm_of_moduli(&g, b, mass);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn exponent_identities(alpha in 0.1f64..100.0, q in 1.01f64..50.0, s in 0.01f64..10.0) {
        let r = compute_exponents(alpha, q, s).unwrap();
        prop_assert!(r.exponent_identity_residual <= 1e-15);
        prop_assert!(r.sigma <= alpha.min(q) * (1.0 + 1e-15));
        prop_assert_eq!(r.beta_paper_defined, alpha * (q - 1.0) > s);
        prop_assert!(r.is_consistent());
    }

    #[test]
    fn pairing_ratio_below_chained_bound(
        seed in any::<u64>(), n in 1usize..=6, p in 2.2f64..10.0, s in 0.1f64..3.0, plus in any::<bool>()
    ) {
        let sys = WeylSystem::standard(n).unwrap();
        let spec = NegativeOrderSpec::from_primal(s, p, Weight::euclidean(sys.group())).unwrap();
        let sign = if plus { TestWeightSign::Plus } else { TestWeightSign::Minus };
        let mut rng = trial_rng(seed, 8);
        let t = ginibre(n, &mut rng);
        let phi = PhaseFunction::on_phase_space(&sys, FunctionEnsemble::Gaussian.sample(n * n, &mut rng)).unwrap();
        let r = pairing_ratio(&sys, &spec, sign, &t, &phi).unwrap().unwrap();
        prop_assert!(r <= pairing_analytic_bound(&sys, &spec, sign) * (1.0 + 1e-10));
    }

    #[test]
    fn test_family_is_linear(seed in any::<u64>(), n in 1usize..=5, re in -2.0f64..2.0) {
        let sys = WeylSystem::standard(n).unwrap();
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(sys.group())).unwrap();
        let mut rng = trial_rng(seed, 9);
        let f = PhaseFunction::on_phase_space(&sys, FunctionEnsemble::Gaussian.sample(n * n, &mut rng)).unwrap();
        let g = PhaseFunction::on_phase_space(&sys, FunctionEnsemble::Gaussian.sample(n * n, &mut rng)).unwrap();
        let c = Complex64::new(re, 0.5);
        let one = Complex64::new(1.0, 0.0);
        let combo = f.linear_combination(c, &g, one).unwrap();
        let sign = TestWeightSign::Minus;
        let lhs = make_test_element(&sys, &spec, &combo, sign).unwrap().operator;
        let wf = make_test_element(&sys, &spec, &f, sign).unwrap().operator;
        let wg = make_test_element(&sys, &spec, &g, sign).unwrap().operator;
        let rhs = &wf.scale(c) + &wg;
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-12 * (1.0 + rhs.frobenius_norm()));
    }
}
