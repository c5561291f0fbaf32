//! The quantum Fourier transform `F_U(T)(ξ) = tr(T π(ξ)†)` on the Weyl
//! system, its reconstruction formula, and harnesses for the Plancherel and
//! Hausdorff–Young inequalities.
//!
//! The dual `Z_N × Z_N` carries mass `1/N` per point. With that choice the
//! transform is unitary `S_2 → L^2`, and both Hausdorff–Young directions hold
//! with constant 1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{trial_rng, FunctionEnsemble, OperatorEnsemble};
use crate::error::{Error, Result};
use crate::group::{conjugate_exponent, l_q_norm, stable_sum_complex, FiniteAbelianGroup, GroupPoint, HaarConvention};
use crate::linalg::{schatten_norm, OperatorMatrix};
use crate::weyl::WeylSystem;

/// Slack allowed on inequalities that hold with constant 1.
pub const HY_TOLERANCE: f64 = 1e-10;

/// A complex function on a finite dual group, tabulated in lexicographic
/// point order, together with the Haar mass of each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunction {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
    convention: HaarConvention,
}

impl PhaseFunction {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Complex64>, convention: HaarConvention) -> Result<Self> {
        if values.len() != group.total_order() {
            return Err(Error::DimensionMismatch {
                expected: group.total_order(),
                actual: values.len(),
            });
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("phase function has non-finite values"));
        }
        Ok(PhaseFunction {
            group,
            values,
            convention,
        })
    }

    /// A function on the phase-space dual of `sys` with its default masses.
    pub fn on_phase_space(sys: &WeylSystem, values: Vec<Complex64>) -> Result<Self> {
        Self::new(sys.group().clone(), values, HaarConvention::phase_space(sys.dim()))
    }

    pub fn zeros(sys: &WeylSystem) -> Self {
        let len = sys.group().total_order();
        Self::on_phase_space(sys, vec![Complex64::default(); len]).expect("length matches")
    }

    /// `value · δ_ξ`.
    pub fn delta(sys: &WeylSystem, xi: &GroupPoint, value: Complex64) -> Result<Self> {
        let mut f = Self::zeros(sys);
        let i = sys.group().index_of(xi)?;
        f.values[i] = value;
        Ok(f)
    }

    /// `scale · 1_E` for the points with the given lexicographic indices.
    pub fn indicator(sys: &WeylSystem, indices: &[usize], scale: f64) -> Result<Self> {
        let mut f = Self::zeros(sys);
        for &i in indices {
            let slot = f
                .values
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("point index {i} out of range")))?;
            *slot = Complex64::new(scale, 0.0);
        }
        Ok(f)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn convention(&self) -> HaarConvention {
        self.convention
    }

    pub fn mass_per_point(&self) -> f64 {
        self.convention.mass_per_point_dual()
    }

    /// Total Haar mass of the dual.
    pub fn total_mass(&self) -> f64 {
        self.group.total_order() as f64 * self.mass_per_point()
    }

    pub fn get(&self, xi: &GroupPoint) -> Result<Complex64> {
        Ok(self.values[self.group.index_of(xi)?])
    }

    pub fn l_q_norm(&self, q: f64) -> Result<f64> {
        l_q_norm(&self.values, q, self.mass_per_point())
    }

    /// Pointwise product with a real table on the same group.
    pub fn weighted(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: weights.len(),
            });
        }
        Self::new(
            self.group.clone(),
            self.values.iter().zip(weights).map(|(v, &w)| v * w).collect(),
            self.convention,
        )
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::invalid("phase functions live on different groups"));
        }
        Self::new(
            self.group.clone(),
            self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
            self.convention,
        )
    }
}

/// `F_U(T)(ξ) = tr(T π(ξ)†)` at every point of the dual.
///
/// Uses the monomial structure of `π(ξ)`, so each value is an `N`-term sum.
pub fn qft_forward(sys: &WeylSystem, t: &OperatorMatrix) -> Result<PhaseFunction> {
    let n = sys.dim();
    if t.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: t.dim(),
        });
    }
    let mut values = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            // π(a,b) has entry v_t at (t, t+a), so tr(T π†) = Σ_t T[t, t+a] conj(v_t)
            values.push(stable_sum_complex(
                (0..n).map(|tt| t[(tt, (tt + a) % n)] * sys.entry(a, b, tt).conj()),
            ));
        }
    }
    PhaseFunction::on_phase_space(sys, values)
}

/// Reconstruction `Σ_ξ f(ξ) π(ξ) · mass(ξ)`.
pub fn qft_inverse(sys: &WeylSystem, f: &PhaseFunction) -> Result<OperatorMatrix> {
    if f.group() != sys.group() {
        return Err(Error::invalid(format!(
            "phase function lives on {:?}, system dual is {:?}",
            f.group().orders(),
            sys.group().orders()
        )));
    }
    let n = sys.dim();
    let mass = f.mass_per_point();
    let mut out = OperatorMatrix::zeros(n);
    for a in 0..n {
        for tt in 0..n {
            let entry = stable_sum_complex((0..n).map(|b| f.values[a * n + b] * sys.entry(a, b, tt)));
            out[(tt, (tt + a) % n)] = entry * mass;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// `max |‖F_U(T)‖_{L²} − ‖T‖_{S₂}| / ‖T‖_{S₂}`.
    pub worst_relative_deviation: f64,
    /// `max ‖F⁻¹(F(T)) − T‖_{S₂} / ‖T‖_{S₂}`.
    pub worst_operator_roundtrip: f64,
    /// `max ‖F(F⁻¹(f)) − f‖_{L²} / ‖f‖_{L²}`.
    pub worst_function_roundtrip: f64,
}

/// Samples random operators (and random phase functions for the reverse
/// round trip) and measures how far the transform is from unitary.
pub fn verify_plancherel(sys: &WeylSystem, trials: u64, seed: u64) -> Result<PlancherelReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = sys.dim();
    let per_trial: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let t = OperatorEnsemble::for_trial(i).sample(n, &mut rng);
            let ft = qft_forward(sys, &t)?;
            let s2 = t.frobenius_norm();
            let dev = (ft.l_q_norm(2.0)? - s2).abs() / s2;
            let back = qft_inverse(sys, &ft)?;
            let op_rt = (&back - &t).frobenius_norm() / s2;

            let f = PhaseFunction::on_phase_space(
                sys,
                FunctionEnsemble::for_trial(i).sample(n * n, &mut rng),
            )?;
            let ff = qft_forward(sys, &qft_inverse(sys, &f)?)?;
            let diff = ff.linear_combination(Complex64::new(1.0, 0.0), &f, Complex64::new(-1.0, 0.0))?;
            let fn_rt = diff.l_q_norm(2.0)? / f.l_q_norm(2.0)?;
            Ok((dev, op_rt, fn_rt))
        })
        .collect::<Result<_>>()?;
    let max = |k: fn(&(f64, f64, f64)) -> f64| per_trial.iter().map(k).fold(0.0f64, f64::max);
    Ok(PlancherelReport {
        n,
        trials,
        seed,
        worst_relative_deviation: max(|r| r.0),
        worst_operator_roundtrip: max(|r| r.1),
        worst_function_roundtrip: max(|r| r.2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `‖F_U(T)‖_{L^q} ≤ ‖T‖_{S_p}`.
    Forward,
    /// `‖F_U⁻¹(f)‖_{S_q} ≤ ‖f‖_{L^p}`.
    Inverse,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Inverse => "inverse",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "inverse" => Ok(Direction::Inverse),
            other => Err(Error::invalid(format!("unknown direction '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffYoungReport {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub direction: Direction,
    pub trials: u64,
    pub seed: u64,
    pub worst_ratio: f64,
    /// Trial index attaining the worst ratio; regenerable from the seed.
    pub witness_trial: Option<u64>,
    pub witness_available: bool,
    pub tolerance: f64,
    pub passed: bool,
    /// Per-trial ratios in trial order.
    pub ratios: Vec<f64>,
}

/// Checks one direction of Hausdorff–Young, `1 ≤ p ≤ 2`, on random inputs.
pub fn verify_hausdorff_young(
    sys: &WeylSystem,
    p: f64,
    direction: Direction,
    trials: u64,
    seed: u64,
) -> Result<HausdorffYoungReport> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::invalid(format!("Hausdorff-Young needs 1 <= p <= 2, got {p}")));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let q = conjugate_exponent(p);
    let n = sys.dim();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            match direction {
                Direction::Forward => {
                    let t = OperatorEnsemble::for_trial(i).sample(n, &mut rng);
                    Ok(qft_forward(sys, &t)?.l_q_norm(q)? / schatten_norm(&t, p)?)
                }
                Direction::Inverse => {
                    let f = PhaseFunction::on_phase_space(
                        sys,
                        FunctionEnsemble::for_trial(i).sample(n * n, &mut rng),
                    )?;
                    Ok(schatten_norm(&qft_inverse(sys, &f)?, q)? / f.l_q_norm(p)?)
                }
            }
        })
        .collect::<Result<_>>()?;
    let (witness, worst) = argmax(&ratios);
    Ok(HausdorffYoungReport {
        n,
        p,
        q,
        direction,
        trials,
        seed,
        worst_ratio: worst,
        witness_trial: witness,
        witness_available: witness.is_some(),
        tolerance: HY_TOLERANCE,
        passed: worst <= 1.0 + HY_TOLERANCE,
        ratios,
    })
}

/// Worst ratio `‖F_U(E_jk)‖_{L^∞} / ‖E_jk‖_{S_1}` over every matrix unit.
pub fn hy_matrix_unit_endpoint(sys: &WeylSystem) -> Result<f64> {
    let n = sys.dim();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let e = OperatorMatrix::unit(n, j, k);
            let r = qft_forward(sys, &e)?.l_q_norm(f64::INFINITY)? / schatten_norm(&e, 1.0)?;
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// First index of the maximum, ignoring NaN; `None` for an empty slice.
pub(crate) fn argmax(values: &[f64]) -> (Option<u64>, f64) {
    values
        .iter()
        .enumerate()
        .fold((None, 0.0f64), |(best_i, best), (i, &v)| {
            if best_i.is_none() || v > best {
                (Some(i as u64), v)
            } else {
                (best_i, best)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{ginibre, trial_rng};
    use crate::linalg::trace_pairing;
    use crate::weyl::{weyl_operator, WeylConvention};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn forward_examples() {
        let s = WeylSystem::standard(4).unwrap();
        let f = qft_forward(&s, &OperatorMatrix::identity(4)).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let expected = if i == 0 { 4.0 } else { 0.0 };
            assert!((v - c(expected)).norm() < 1e-15);
        }
        let z = qft_forward(&s, &OperatorMatrix::zeros(4)).unwrap();
        assert!(z.values().iter().all(|v| *v == Complex64::default()));

        let e00 = qft_forward(&s, &OperatorMatrix::unit(4, 0, 0)).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == 0 { 1.0 } else { 0.0 };
                assert!((e00.values()[a * 4 + b] - c(expected)).norm() < 1e-15);
            }
        }
        assert!(matches!(
            qft_forward(&s, &OperatorMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forward_matches_dense_trace_definition() {
        for conv in [WeylConvention::Standard, WeylConvention::Symmetric] {
            let s = WeylSystem::new(5, conv).unwrap();
            let t = ginibre(5, &mut trial_rng(1, 0));
            let f = qft_forward(&s, &t).unwrap();
            for xi in s.group().points() {
                let direct = trace_pairing(&t, &weyl_operator(&s, &xi).unwrap()).unwrap();
                assert!((f.get(&xi).unwrap() - direct).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let n = 4;
        let s = WeylSystem::standard(n).unwrap();
        let f = PhaseFunction::delta(&s, &(0, 0).into(), c(n as f64)).unwrap();
        let back = qft_inverse(&s, &f).unwrap();
        assert!((&back - &OperatorMatrix::identity(n)).frobenius_norm() < 1e-15);
        assert_eq!(qft_inverse(&s, &PhaseFunction::zeros(&s)).unwrap(), OperatorMatrix::zeros(n));

        let t = ginibre(n, &mut trial_rng(9, 0));
        let rt = qft_inverse(&s, &qft_forward(&s, &t).unwrap()).unwrap();
        assert!((&rt - &t).frobenius_norm() <= 1e-11);

        let other = WeylSystem::standard(3).unwrap();
        assert!(qft_inverse(&other, &f).is_err());
    }

    #[test]
    fn linearity() {
        let s = WeylSystem::new(6, WeylConvention::Symmetric).unwrap();
        let mut rng = trial_rng(3, 0);
        for _ in 0..10 {
            let t = ginibre(6, &mut rng);
            let u = ginibre(6, &mut rng);
            let (a, b) = (crate::ensemble::gaussian(&mut rng), crate::ensemble::gaussian(&mut rng));
            let combo = &t.scale(a) + &u.scale(b);
            let lhs = qft_forward(&s, &combo).unwrap();
            let rhs = qft_forward(&s, &t)
                .unwrap()
                .linear_combination(a, &qft_forward(&s, &u).unwrap(), b)
                .unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn plancherel_closed_forms() {
        let s4 = WeylSystem::standard(4).unwrap();
        let f = qft_forward(&s4, &OperatorMatrix::identity(4)).unwrap();
        assert!((f.l_q_norm(2.0).unwrap().powi(2) - 4.0).abs() < 1e-14);
        for n in [1, 3, 7] {
            let s = WeylSystem::standard(n).unwrap();
            let f = qft_forward(&s, &OperatorMatrix::unit(n, 0, 0)).unwrap();
            assert!((f.l_q_norm(2.0).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn plancherel_harness() {
        let r = verify_plancherel(&WeylSystem::standard(8).unwrap(), 100, 42).unwrap();
        assert!(r.worst_relative_deviation <= 1e-11, "{r:?}");
        assert!(r.worst_operator_roundtrip <= 1e-11);
        assert!(r.worst_function_roundtrip <= 1e-11);
        assert!(verify_plancherel(&WeylSystem::standard(2).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn hausdorff_young_endpoints() {
        let s = WeylSystem::standard(4).unwrap();
        for dir in [Direction::Forward, Direction::Inverse] {
            let r = verify_hausdorff_young(&s, 2.0, dir, 40, 5).unwrap();
            assert!(r.ratios.iter().all(|x| (x - 1.0).abs() < 1e-12), "{dir}");
            let r1 = verify_hausdorff_young(&s, 1.0, dir, 40, 5).unwrap();
            assert!(r1.passed && r1.q.is_infinite());
        }
        assert!(hy_matrix_unit_endpoint(&s).unwrap() <= 1.0 + 1e-15);
        assert!(verify_hausdorff_young(&s, 0.9, Direction::Forward, 1, 1).is_err());
        assert!(verify_hausdorff_young(&s, 2.5, Direction::Inverse, 1, 1).is_err());
    }

    #[test]
    fn hausdorff_young_interior() {
        let s = WeylSystem::standard(8).unwrap();
        let r = verify_hausdorff_young(&s, 4.0 / 3.0, Direction::Forward, 500, 11).unwrap();
        assert!(r.passed, "worst {}", r.worst_ratio);
        assert_eq!(r.ratios.len(), 500);
        assert!(r.witness_available);
    }

    #[test]
    fn harness_is_deterministic() {
        let s = WeylSystem::standard(4).unwrap();
        let a = verify_hausdorff_young(&s, 1.5, Direction::Inverse, 30, 77).unwrap();
        let b = verify_hausdorff_young(&s, 1.5, Direction::Inverse, 30, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("forward".parse::<Direction>().unwrap(), Direction::Forward);
        assert!("sideways".parse::<Direction>().is_err());
    }
}
