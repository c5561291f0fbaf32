//! Weights on the dual, quantum Sobolev norms (inhomogeneous and
//! homogeneous), the weighted transform `Φ`, the negative-order test family,
//! and the trace-pairing duality between `S_p` and that family.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{trial_rng, FunctionEnsemble, OperatorEnsemble};
use crate::error::{Error, Result};
use crate::group::{conjugate_exponent, lq_norm_of_moduli, FiniteAbelianGroup};
use crate::linalg::{schatten_norm, singular_values, trace_pairing, OperatorMatrix};
use crate::qft::{argmax, qft_forward, qft_inverse, PhaseFunction};
use crate::weyl::WeylSystem;

/// Floor added under the square root of the euclidean weight so `γ(0) = 1`.
pub const EUCLIDEAN_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightProvenance {
    EuclideanRepresentative,
    Constant,
    CustomTable,
}

/// A strictly positive function `γ` on the dual group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    group: FiniteAbelianGroup,
    values: Vec<f64>,
    provenance: WeightProvenance,
}

/// Symmetric representative of `x mod n` in `(−n/2, n/2]`.
pub fn symmetric_representative(x: usize, n: usize) -> i64 {
    if 2 * x > n {
        x as i64 - n as i64
    } else {
        x as i64
    }
}

impl Weight {
    /// `γ(ξ) = sqrt(Σ_j ξ̄_j² + 1)` with `ξ̄_j` the symmetric representatives.
    pub fn euclidean(dual: &FiniteAbelianGroup) -> Self {
        let values = dual
            .points()
            .map(|xi| {
                let sq: i64 = xi
                    .residues()
                    .iter()
                    .zip(dual.orders())
                    .map(|(&r, &n)| symmetric_representative(r, n).pow(2))
                    .sum();
                (sq as f64 + EUCLIDEAN_FLOOR).sqrt()
            })
            .collect();
        Weight {
            group: dual.clone(),
            values,
            provenance: WeightProvenance::EuclideanRepresentative,
        }
    }

    pub fn constant(dual: &FiniteAbelianGroup, gamma: f64) -> Result<Self> {
        Self::checked(dual, vec![gamma; dual.total_order()], WeightProvenance::Constant)
    }

    pub fn from_table(dual: &FiniteAbelianGroup, values: Vec<f64>) -> Result<Self> {
        Self::checked(dual, values, WeightProvenance::CustomTable)
    }

    fn checked(dual: &FiniteAbelianGroup, values: Vec<f64>, provenance: WeightProvenance) -> Result<Self> {
        if values.len() != dual.total_order() {
            return Err(Error::DimensionMismatch {
                expected: dual.total_order(),
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!("weight values must be positive and finite, got {v}")));
        }
        Ok(Weight {
            group: dual.clone(),
            values,
            provenance,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> WeightProvenance {
        self.provenance
    }

    /// `(1+γ²)^{s/2}`, or `γ^s` when `homogeneous`. Negative `s` gives the
    /// reciprocal multiplier.
    pub fn fourier_multiplier(&self, s: f64, homogeneous: bool) -> Vec<f64> {
        self.values
            .iter()
            .map(|&g| {
                if homogeneous {
                    g.powf(s)
                } else {
                    (1.0 + g * g).powf(s / 2.0)
                }
            })
            .collect()
    }

    /// Writes `a,b,gamma` rows (with header) for a weight on `Z_N × Z_N`,
    /// values printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        if self.group.rank() != 2 {
            return Err(Error::invalid("CSV weights are defined on Z_N x Z_N only"));
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["a", "b", "gamma"])?;
        for (xi, v) in self.group.points().zip(&self.values) {
            let r = xi.residues();
            w.write_record([r[0].to_string(), r[1].to_string(), format!("{v:.16e}")])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads `a,b,gamma` rows; every point of `dual` must appear exactly once.
    pub fn read_csv<R: Read>(dual: &FiniteAbelianGroup, reader: R) -> Result<Self> {
        if dual.rank() != 2 {
            return Err(Error::invalid("CSV weights are defined on Z_N x Z_N only"));
        }
        let mut values = vec![f64::NAN; dual.total_order()];
        let mut seen = vec![false; dual.total_order()];
        let mut rdr = csv::Reader::from_reader(reader);
        for record in rdr.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Csv(format!("expected 3 columns, got {}", record.len())));
            }
            let field = |i: usize| record[i].trim().to_string();
            let a: usize = field(0).parse().map_err(|_| Error::Csv(format!("bad a '{}'", field(0))))?;
            let b: usize = field(1).parse().map_err(|_| Error::Csv(format!("bad b '{}'", field(1))))?;
            let g: f64 = field(2)
                .parse()
                .map_err(|_| Error::Csv(format!("bad gamma '{}'", field(2))))?;
            let idx = dual.index_of(&(a, b).into())?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Csv(format!("duplicate row for ({a}, {b})")));
            }
            values[idx] = g;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let p = dual.point_at(missing)?;
            return Err(Error::Csv(format!("missing row for {:?}", p.residues())));
        }
        Self::from_table(dual, values)
    }
}

/// Parameters of a quantum Sobolev norm `‖w · F_U(T)‖_{L^q}` with
/// `w = (1+γ²)^{s/2}` (or `γ^s` in the homogeneous case) and `1/p + 1/q = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevSpec {
    s: f64,
    p: f64,
    q: f64,
    #[serde(skip)]
    weight: Option<Weight>,
    weight_kind: WeightProvenance,
    homogeneous: bool,
}

impl SobolevSpec {
    pub fn new(s: f64, p: f64, weight: Weight, homogeneous: bool) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("smoothness s must be positive, got {s}")));
        }
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::invalid(format!("Sobolev exponent p must lie in (1, 2), got {p}")));
        }
        Ok(Self::unchecked(s, p, weight, homogeneous))
    }

    /// Builds the spec from the Fourier-side exponent `q > 2`.
    pub fn from_q(s: f64, q: f64, weight: Weight, homogeneous: bool) -> Result<Self> {
        if !(q > 2.0 && q.is_finite()) {
            return Err(Error::invalid(format!("Fourier exponent q must be finite and > 2, got {q}")));
        }
        let mut spec = Self::new(s, conjugate_exponent(q), weight, homogeneous)?;
        spec.q = q;
        Ok(spec)
    }

    pub(crate) fn unchecked(s: f64, p: f64, weight: Weight, homogeneous: bool) -> Self {
        SobolevSpec {
            s,
            p,
            q: conjugate_exponent(p),
            weight_kind: weight.provenance(),
            weight: Some(weight),
            homogeneous,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn weight(&self) -> &Weight {
        self.weight.as_ref().expect("spec constructed with a weight")
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(s, self.p, self.weight().clone(), self.homogeneous)
    }

    pub fn with_homogeneous(&self, homogeneous: bool) -> Self {
        let mut out = self.clone();
        out.homogeneous = homogeneous;
        out
    }

    /// `w(ξ)` as a table over the dual.
    pub fn multiplier(&self) -> Vec<f64> {
        self.weight().fourier_multiplier(self.s, self.homogeneous)
    }
}

fn check_weight_matches(sys: &WeylSystem, weight: &Weight) -> Result<()> {
    if weight.group() != sys.group() {
        return Err(Error::invalid("weight lives on a different dual group than the system"));
    }
    Ok(())
}

/// `‖w · F_U(T)‖_{L^q}`, accumulating `(w(ξ)·|F_U(T)(ξ)|)^q` directly.
pub fn sobolev_norm(sys: &WeylSystem, t: &OperatorMatrix, spec: &SobolevSpec) -> Result<f64> {
    check_weight_matches(sys, spec.weight())?;
    let f = qft_forward(sys, t)?;
    let moduli: Vec<f64> = f
        .values()
        .iter()
        .zip(spec.multiplier())
        .map(|(v, w)| w * v.norm())
        .collect();
    Ok(lq_norm_of_moduli(&moduli, spec.q(), f.mass_per_point()))
}

/// `Φ(T) = w · F_U(T)` as a function on the dual.
pub fn phi(sys: &WeylSystem, t: &OperatorMatrix, spec: &SobolevSpec) -> Result<PhaseFunction> {
    check_weight_matches(sys, spec.weight())?;
    qft_forward(sys, t)?.weighted(&spec.multiplier())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub trials: u64,
    pub seed: u64,
    pub worst_abs_deviation: f64,
    pub worst_rel_deviation: f64,
}

/// Compares `‖Φ(T)‖_{L^q}` (complex values weighted, then normed) against
/// [`sobolev_norm`] (moduli weighted and accumulated) on random operators.
pub fn phi_isometry_check(sys: &WeylSystem, spec: &SobolevSpec, trials: u64, seed: u64) -> Result<IsometryReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let devs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = OperatorEnsemble::for_trial(i).sample(sys.dim(), &mut trial_rng(seed, i));
            let a = phi(sys, &t, spec)?.l_q_norm(spec.q())?;
            let b = sobolev_norm(sys, &t, spec)?;
            let d = (a - b).abs();
            Ok((d, if b > 0.0 { d / b } else { d }))
        })
        .collect::<Result<_>>()?;
    Ok(IsometryReport {
        trials,
        seed,
        worst_abs_deviation: devs.iter().map(|d| d.0).fold(0.0, f64::max),
        worst_rel_deviation: devs.iter().map(|d| d.1).fold(0.0, f64::max),
    })
}

/// Measured norm-axiom behaviour of a Sobolev norm on random operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormAxiomReport {
    pub trials: u64,
    pub seed: u64,
    /// `max |‖cT‖ − |c|‖T‖| / (|c|‖T‖)`.
    pub homogeneity_max_rel_deviation: f64,
    /// `max (‖T+S‖ − ‖T‖ − ‖S‖) / (‖T‖ + ‖S‖)`; negative when the inequality is strict.
    pub triangle_max_rel_excess: f64,
    pub triangle_violations: u64,
    pub monotonicity_violations: u64,
    pub homogeneous_exceeds_inhomogeneous: u64,
    /// `‖0‖ = 0` and every sampled nonzero operator has positive norm.
    pub definite: bool,
}

pub const TRIANGLE_SLACK: f64 = 1e-10;

pub fn norm_axioms_check(sys: &WeylSystem, spec: &SobolevSpec, trials: u64, seed: u64) -> Result<NormAxiomReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = sys.dim();
    let hom = spec.with_homogeneous(true);
    let inhom = spec.with_homogeneous(false);
    let zero_ok = sobolev_norm(sys, &OperatorMatrix::zeros(n), spec)? == 0.0;
    struct Trial {
        homogeneity: f64,
        excess: f64,
        monotone_violation: bool,
        hom_violation: bool,
        positive: bool,
    }
    let rows: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            let mut rng = trial_rng(seed, i);
            let t = OperatorEnsemble::for_trial(i).sample(n, &mut rng);
            let u = OperatorEnsemble::for_trial(i + 1).sample(n, &mut rng);
            let c = crate::ensemble::gaussian(&mut rng) * rng.gen_range(0.1..10.0);
            let nt = sobolev_norm(sys, &t, spec)?;
            let nu = sobolev_norm(sys, &u, spec)?;
            let nct = sobolev_norm(sys, &t.scale(c), spec)?;
            let homogeneity = (nct - c.norm() * nt).abs() / (c.norm() * nt);
            let ntu = sobolev_norm(sys, &(&t + &u), spec)?;
            let excess = (ntu - nt - nu) / (nt + nu);

            let s1 = spec.s() * rng.gen_range(0.05..1.0);
            let s2 = s1 + rng.gen_range(0.1..2.0);
            let inh1 = sobolev_norm(sys, &t, &inhom.with_s(s1)?.with_homogeneous(false))?;
            let inh2 = sobolev_norm(sys, &t, &inhom.with_s(s2)?.with_homogeneous(false))?;
            let monotone_violation = inh1 > inh2;

            let h = sobolev_norm(sys, &t, &hom)?;
            let ih = sobolev_norm(sys, &t, &inhom)?;
            Ok(Trial {
                homogeneity,
                excess,
                monotone_violation,
                hom_violation: h > ih,
                positive: nt > 0.0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(NormAxiomReport {
        trials,
        seed,
        homogeneity_max_rel_deviation: rows.iter().map(|r| r.homogeneity).fold(0.0, f64::max),
        triangle_max_rel_excess: rows.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max),
        triangle_violations: rows.iter().filter(|r| r.excess > TRIANGLE_SLACK).count() as u64,
        monotonicity_violations: rows.iter().filter(|r| r.monotone_violation).count() as u64,
        homogeneous_exceeds_inhomogeneous: rows.iter().filter(|r| r.hom_violation).count() as u64,
        definite: zero_ok && rows.iter().all(|r| r.positive),
    })
}

/// Sign of the exponent applied to `(1+γ²)^{±s/2}` when building test
/// elements `W_φ = F_U⁻¹((1+γ²)^{±s/2} φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestWeightSign {
    Plus,
    #[default]
    Minus,
}

impl TestWeightSign {
    pub fn factor(self) -> f64 {
        match self {
            TestWeightSign::Plus => 1.0,
            TestWeightSign::Minus => -1.0,
        }
    }
}

impl fmt::Display for TestWeightSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestWeightSign::Plus => "+1",
            TestWeightSign::Minus => "-1",
        })
    }
}

impl FromStr for TestWeightSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" | "plus" => Ok(TestWeightSign::Plus),
            "-1" | "minus" => Ok(TestWeightSign::Minus),
            other => Err(Error::invalid(format!("unknown sign '{other}'"))),
        }
    }
}

/// Exponents of the negative-order space paired against `S_p`, `p > 2`:
/// `p' = p/(p−1) ∈ (1, 2)` and `q'` with `1/p' + 1/q' = 1` (so `q' = p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeOrderSpec {
    pub s: f64,
    /// Schatten exponent on the operator side of the pairing.
    pub p: f64,
    pub p_prime: f64,
    pub q_prime: f64,
    #[serde(skip)]
    weight: Option<Weight>,
}

impl NegativeOrderSpec {
    /// From the primal exponent `p > 2`.
    pub fn from_primal(s: f64, p: f64, weight: Weight) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::invalid(format!("pairing needs a finite p > 2, got {p}")));
        }
        Self::from_dual_exponent(s, conjugate_exponent(p), weight)
    }

    /// From `p' ∈ [1, 2)` supplied directly.
    pub fn from_dual_exponent(s: f64, p_prime: f64, weight: Weight) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("smoothness s must be positive, got {s}")));
        }
        if !(1.0..2.0).contains(&p_prime) {
            return Err(Error::invalid(format!("p' must lie in [1, 2), got {p_prime}")));
        }
        let q_prime = conjugate_exponent(p_prime);
        let closure = 1.0 / p_prime + 1.0 / q_prime - 1.0;
        assert!(closure.abs() <= 1e-15, "1/p' + 1/q' = 1 violated by {closure:e}");
        Ok(NegativeOrderSpec {
            s,
            p: conjugate_exponent(p_prime),
            p_prime,
            q_prime,
            weight: Some(weight),
        })
    }

    pub fn weight(&self) -> &Weight {
        self.weight.as_ref().expect("spec constructed with a weight")
    }

    /// `(1+γ²)^{sign·s/2}`.
    pub fn test_multiplier(&self, sign: TestWeightSign) -> Vec<f64> {
        self.weight().fourier_multiplier(sign.factor() * self.s, false)
    }
}

/// An element `W_φ` of the test family with its negative-order norm `‖φ‖_{L^{q'}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFamilyElement {
    pub phi: PhaseFunction,
    pub operator: OperatorMatrix,
    pub negative_norm: f64,
}

pub fn make_test_element(
    sys: &WeylSystem,
    spec: &NegativeOrderSpec,
    phi: &PhaseFunction,
    sign: TestWeightSign,
) -> Result<TestFamilyElement> {
    check_weight_matches(sys, spec.weight())?;
    let weighted = phi.weighted(&spec.test_multiplier(sign))?;
    Ok(TestFamilyElement {
        phi: phi.clone(),
        operator: qft_inverse(sys, &weighted)?,
        negative_norm: phi.l_q_norm(spec.q_prime)?,
    })
}

/// Inverts `φ ↦ W_φ`: `φ = (1+γ²)^{∓s/2} F_U(W_φ)`.
pub fn recover_generator(
    sys: &WeylSystem,
    spec: &NegativeOrderSpec,
    operator: &OperatorMatrix,
    sign: TestWeightSign,
) -> Result<PhaseFunction> {
    let inverse_sign = match sign {
        TestWeightSign::Plus => TestWeightSign::Minus,
        TestWeightSign::Minus => TestWeightSign::Plus,
    };
    qft_forward(sys, operator)?.weighted(&spec.test_multiplier(inverse_sign))
}

/// Constant `C` in `|tr(T W_φ†)| ≤ C ‖T‖_{S_p} ‖φ‖_{L^{q'}}`, chained as
/// Schatten Hölder, the power-mean bound `‖W‖_{S_{p'}} ≤ N^{1/p'−1/2}‖W‖_{S_2}`,
/// Plancherel, and Hölder on the dual with `1/2 = 1/r + 1/q'`:
/// `C = N^{1/p'−1/2} · ‖(1+γ²)^{±s/2}‖_{L^r}`, `r = 2p/(p−2)`.
pub fn pairing_analytic_bound(sys: &WeylSystem, spec: &NegativeOrderSpec, sign: TestWeightSign) -> f64 {
    let n = sys.dim() as f64;
    let r = 2.0 * spec.p / (spec.p - 2.0);
    let mult = spec.test_multiplier(sign);
    let mass = 1.0 / n;
    n.powf(1.0 / spec.p_prime - 0.5) * lq_norm_of_moduli(&mult, r, mass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub p_prime: f64,
    pub q_prime: f64,
    pub sign: TestWeightSign,
    pub trials: u64,
    pub seed: u64,
    pub max_ratio: f64,
    pub analytic_bound: f64,
    pub skipped: u64,
    pub passed: bool,
    pub ratios: Vec<f64>,
}

pub const PAIRING_TOLERANCE: f64 = 1e-10;

/// Samples `|tr(T W_φ†)| / (‖T‖_{S_p} ‖φ‖_{L^{q'}})` and compares the maximum
/// with [`pairing_analytic_bound`]. Trials with a zero denominator are skipped.
pub fn pairing_bound_estimate(
    sys: &WeylSystem,
    spec: &NegativeOrderSpec,
    sign: TestWeightSign,
    trials: u64,
    seed: u64,
) -> Result<PairingReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    check_weight_matches(sys, spec.weight())?;
    let n = sys.dim();
    let raw: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let t = OperatorEnsemble::for_trial(i).sample(n, &mut rng);
            let phi_fn = PhaseFunction::on_phase_space(sys, FunctionEnsemble::for_trial(i).sample(n * n, &mut rng))?;
            pairing_ratio(sys, spec, sign, &t, &phi_fn)
        })
        .collect::<Result<_>>()?;
    let skipped = raw.iter().filter(|r| r.is_none()).count() as u64;
    let ratios: Vec<f64> = raw.into_iter().flatten().collect();
    let (_, max_ratio) = argmax(&ratios);
    let analytic_bound = pairing_analytic_bound(sys, spec, sign);
    Ok(PairingReport {
        n,
        s: spec.s,
        p: spec.p,
        p_prime: spec.p_prime,
        q_prime: spec.q_prime,
        sign,
        trials,
        seed,
        max_ratio,
        analytic_bound,
        skipped,
        passed: max_ratio <= analytic_bound * (1.0 + PAIRING_TOLERANCE),
        ratios,
    })
}

/// One pairing ratio, or `None` if `‖T‖_{S_p} ‖φ‖_{L^{q'}} = 0`.
pub fn pairing_ratio(
    sys: &WeylSystem,
    spec: &NegativeOrderSpec,
    sign: TestWeightSign,
    t: &OperatorMatrix,
    phi_fn: &PhaseFunction,
) -> Result<Option<f64>> {
    let w = make_test_element(sys, spec, phi_fn, sign)?;
    let denom = schatten_norm(t, spec.p)? * w.negative_norm;
    if denom == 0.0 {
        return Ok(None);
    }
    Ok(Some(trace_pairing(t, &w.operator)?.norm() / denom))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub n: usize,
    pub sign: TestWeightSign,
    pub expected_rank: usize,
    pub rank: usize,
    pub deficiency: usize,
    /// Smallest over largest singular value of the Gram matrix.
    pub condition_ratio: f64,
    pub passed: bool,
}

pub const NONDEGENERACY_MAX_N: usize = 8;
const GRAM_RANK_TOL: f64 = 1e-10;

/// Rank of the Gram matrix `G_{ξη} = tr(W_{δ_ξ} W_{δ_η}†)` of the
/// delta-generated test family. Full rank `N²` means no nonzero operator is
/// orthogonal to every test element.
pub fn nondegeneracy_check(sys: &WeylSystem, spec: &NegativeOrderSpec, sign: TestWeightSign) -> Result<NondegeneracyReport> {
    let n = sys.dim();
    if n > NONDEGENERACY_MAX_N {
        return Err(Error::invalid(format!(
            "nondegeneracy check limited to N <= {NONDEGENERACY_MAX_N}, got {n}"
        )));
    }
    let order = n * n;
    let elements: Vec<OperatorMatrix> = sys
        .group()
        .points()
        .map(|xi| {
            let delta = PhaseFunction::delta(sys, &xi, Complex64::new(1.0, 0.0))?;
            Ok(make_test_element(sys, spec, &delta, sign)?.operator)
        })
        .collect::<Result<_>>()?;
    let mut gram = OperatorMatrix::zeros(order);
    for (i, wi) in elements.iter().enumerate() {
        for (j, wj) in elements.iter().enumerate() {
            gram[(i, j)] = trace_pairing(wi, wj)?;
        }
    }
    let spectrum = singular_values(&gram)?;
    let rank = spectrum.rank(GRAM_RANK_TOL);
    let smallest = spectrum.values().last().copied().unwrap_or(0.0);
    Ok(NondegeneracyReport {
        n,
        sign,
        expected_rank: order,
        rank,
        deficiency: order - rank,
        condition_ratio: if spectrum.largest() > 0.0 { smallest / spectrum.largest() } else { 0.0 },
        passed: rank == order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ginibre;
    use crate::weyl::weyl_operator;
    use approx::assert_abs_diff_eq;

    fn sys(n: usize) -> WeylSystem {
        WeylSystem::standard(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn euclidean_weight_examples() {
        let s8 = sys(8);
        let w = Weight::euclidean(s8.group());
        let at = |a, b| w.values()[s8.group().index_of(&(a, b).into()).unwrap()];
        assert_eq!(at(0, 0), 1.0);
        assert_abs_diff_eq!(at(7, 0), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(at(4, 4), 33f64.sqrt(), epsilon = 1e-15);
        assert!(w.values().iter().all(|&g| g >= 1.0));
    }

    #[test]
    fn weight_validation() {
        let g = sys(2).group().clone();
        assert!(Weight::constant(&g, 0.0).is_err());
        assert!(Weight::from_table(&g, vec![1.0, 2.0, f64::INFINITY, 1.0]).is_err());
        assert!(Weight::from_table(&g, vec![1.0; 3]).is_err());
    }

    #[test]
    fn weight_csv_roundtrip_is_exact() {
        let s = sys(5);
        let vals: Vec<f64> = (0..25).map(|i| (1.0 + i as f64).ln() * std::f64::consts::PI + 0.1).collect();
        let w = Weight::from_table(s.group(), vals).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b,gamma\n0,0,"));
        let back = Weight::read_csv(s.group(), buf.as_slice()).unwrap();
        assert_eq!(back.values(), w.values());
    }

    #[test]
    fn weight_csv_rejects_bad_tables() {
        let g = sys(2).group().clone();
        let missing = "a,b,gamma\n0,0,1\n0,1,1\n1,0,1\n";
        assert!(Weight::read_csv(&g, missing.as_bytes()).is_err());
        let dup = "a,b,gamma\n0,0,1\n0,0,1\n1,0,1\n1,1,1\n";
        assert!(Weight::read_csv(&g, dup.as_bytes()).is_err());
        let neg = "a,b,gamma\n0,0,1\n0,1,-1\n1,0,1\n1,1,1\n";
        assert!(Weight::read_csv(&g, neg.as_bytes()).is_err());
        let range = "a,b,gamma\n0,0,1\n0,2,1\n1,0,1\n1,1,1\n";
        assert!(Weight::read_csv(&g, range.as_bytes()).is_err());
    }

    #[test]
    fn spec_validation() {
        let w = Weight::euclidean(sys(2).group());
        assert!(SobolevSpec::new(0.0, 1.5, w.clone(), false).is_err());
        assert!(SobolevSpec::new(1.0, 2.0, w.clone(), false).is_err());
        assert!(SobolevSpec::new(1.0, 1.0, w.clone(), false).is_err());
        let spec = SobolevSpec::from_q(1.0, 4.0, w, false).unwrap();
        assert_abs_diff_eq!(spec.p(), 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(spec.q(), 4.0);
    }

    #[test]
    fn sobolev_norm_examples() {
        let s4 = sys(4);
        let w = Weight::euclidean(s4.group());
        let spec = SobolevSpec::from_q(2.0, 4.0, w.clone(), false).unwrap();
        assert_eq!(sobolev_norm(&s4, &OperatorMatrix::zeros(4), &spec).unwrap(), 0.0);
        // F_U(I) = 4 δ_0, γ(0) = 1: (1+1)^1 · 4 · (1/4)^{1/4}
        let expected = 8.0 * 0.25f64.powf(0.25);
        let got = sobolev_norm(&s4, &OperatorMatrix::identity(4), &spec).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);

        // s = 0 with γ ≡ 1 degenerates to ‖F_U(T)‖_q
        let one = Weight::constant(s4.group(), 1.0).unwrap();
        let flat = SobolevSpec::unchecked(0.0, 4.0 / 3.0, one, false);
        let t = ginibre(4, &mut trial_rng(2, 0));
        let plain = qft_forward(&s4, &t).unwrap().l_q_norm(4.0).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&s4, &t, &flat).unwrap(), plain, epsilon = 1e-13);

        assert!(sobolev_norm(&s4, &OperatorMatrix::identity(3), &spec).is_err());
        let wrong = SobolevSpec::from_q(1.0, 4.0, Weight::euclidean(sys(3).group()), false).unwrap();
        assert!(sobolev_norm(&s4, &OperatorMatrix::identity(4), &wrong).is_err());
    }

    #[test]
    fn phi_isometry() {
        let s8 = sys(8);
        let spec = SobolevSpec::from_q(1.0, 4.0, Weight::euclidean(s8.group()), false).unwrap();
        let r = phi_isometry_check(&s8, &spec, 100, 3).unwrap();
        assert!(r.worst_abs_deviation <= 1e-12, "{r:?}");
        let zero = phi(&s8, &OperatorMatrix::zeros(8), &spec).unwrap();
        assert_eq!(zero.l_q_norm(4.0).unwrap(), 0.0);
    }

    #[test]
    fn norm_axioms() {
        let s4 = sys(4);
        let spec = SobolevSpec::from_q(1.5, 3.0, Weight::euclidean(s4.group()), false).unwrap();
        let r = norm_axioms_check(&s4, &spec, 200, 8).unwrap();
        assert!(r.homogeneity_max_rel_deviation <= 1e-12, "{r:?}");
        assert_eq!(r.triangle_violations, 0);
        assert_eq!(r.monotonicity_violations, 0);
        assert_eq!(r.homogeneous_exceeds_inhomogeneous, 0);
        assert!(r.definite);
    }

    #[test]
    fn multiplier_is_locally_bounded() {
        let w = Weight::euclidean(sys(16).group());
        for s in [0.5, 1.0, 4.0] {
            assert!(w.fourier_multiplier(s, false).iter().all(|m| m.is_finite()));
            assert!(w.fourier_multiplier(-s, false).iter().all(|m| m.is_finite() && *m > 0.0));
        }
    }

    #[test]
    fn negative_order_exponents() {
        let w = Weight::euclidean(sys(2).group());
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, w.clone()).unwrap();
        assert_abs_diff_eq!(spec.p_prime, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.q_prime, 4.0, epsilon = 1e-14);
        assert!(NegativeOrderSpec::from_primal(1.0, 2.0, w.clone()).is_err());
        assert!(NegativeOrderSpec::from_dual_exponent(1.0, 2.0, w.clone()).is_err());
        let endpoint = NegativeOrderSpec::from_dual_exponent(1.0, 1.0, w).unwrap();
        assert!(endpoint.q_prime.is_infinite());
    }

    #[test]
    fn test_element_examples() {
        let n = 4;
        let s = sys(n);
        let w = Weight::constant(s.group(), 1.0).unwrap();
        let spec = NegativeOrderSpec::from_primal(2.0, 4.0, w).unwrap();
        let zero = make_test_element(&s, &spec, &PhaseFunction::zeros(&s), TestWeightSign::Minus).unwrap();
        assert_eq!(zero.operator, OperatorMatrix::zeros(n));
        assert_eq!(zero.negative_norm, 0.0);

        let delta = PhaseFunction::delta(&s, &(0, 0).into(), c(1.0)).unwrap();
        let plus = make_test_element(&s, &spec, &delta, TestWeightSign::Plus).unwrap();
        let expected = OperatorMatrix::identity(n).scale_real(2.0 / n as f64);
        assert!((&plus.operator - &expected).frobenius_norm() < 1e-15);
        let minus = make_test_element(&s, &spec, &delta, TestWeightSign::Minus).unwrap();
        let expected = OperatorMatrix::identity(n).scale_real(0.5 / n as f64);
        assert!((&minus.operator - &expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn test_family_map_is_injective() {
        let s = sys(4);
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(s.group())).unwrap();
        let mut rng = trial_rng(4, 0);
        for sign in [TestWeightSign::Plus, TestWeightSign::Minus] {
            let phi_fn = PhaseFunction::on_phase_space(&s, FunctionEnsemble::Gaussian.sample(16, &mut rng)).unwrap();
            let el = make_test_element(&s, &spec, &phi_fn, sign).unwrap();
            let back = recover_generator(&s, &spec, &el.operator, sign).unwrap();
            for (a, b) in back.values().iter().zip(phi_fn.values()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn test_family_norm_is_additive_on_disjoint_supports() {
        // ‖φ+ψ‖_{q'}^{q'} = ‖φ‖^{q'} + ‖ψ‖^{q'} for disjoint supports
        let s = sys(4);
        let spec = NegativeOrderSpec::from_primal(1.0, 3.0, Weight::euclidean(s.group())).unwrap();
        let mut rng = trial_rng(5, 0);
        let vals = FunctionEnsemble::Gaussian.sample(16, &mut rng);
        let left: Vec<_> = vals.iter().enumerate().map(|(i, v)| if i < 7 { *v } else { c(0.0) }).collect();
        let right: Vec<_> = vals.iter().enumerate().map(|(i, v)| if i >= 7 { *v } else { c(0.0) }).collect();
        let sign = TestWeightSign::Minus;
        let norm = |v: Vec<Complex64>| {
            make_test_element(&s, &spec, &PhaseFunction::on_phase_space(&s, v).unwrap(), sign)
                .unwrap()
                .negative_norm
        };
        let q = spec.q_prime;
        let (a, b, ab) = (norm(left), norm(right), norm(vals));
        assert!((ab.powf(q) - a.powf(q) - b.powf(q)).abs() <= 1e-12 * ab.powf(q));
    }

    #[test]
    fn single_character_pairing_closed_form() {
        // W from φ = δ_ξ and T = c·π(ξ): ratio = (1+γ(ξ)²)^{sign·s/2}
        let n = 4;
        let s = sys(n);
        let weight = Weight::euclidean(s.group());
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, weight.clone()).unwrap();
        let xi = (1, 3).into();
        let gamma = weight.values()[s.group().index_of(&xi).unwrap()];
        for sign in [TestWeightSign::Plus, TestWeightSign::Minus] {
            let t = weyl_operator(&s, &xi).unwrap().scale(Complex64::new(0.3, -1.2));
            let delta = PhaseFunction::delta(&s, &xi, c(1.0)).unwrap();
            let r = pairing_ratio(&s, &spec, sign, &t, &delta).unwrap().unwrap();
            let expected = (1.0 + gamma * gamma).powf(sign.factor() * 0.5);
            assert_abs_diff_eq!(r, expected, epsilon = 1e-13);
            assert!(r <= pairing_analytic_bound(&s, &spec, sign));
        }
        let zero = pairing_ratio(&s, &spec, TestWeightSign::Minus, &OperatorMatrix::zeros(n), &PhaseFunction::delta(&s, &xi, c(1.0)).unwrap()).unwrap();
        assert!(zero.is_none());
    }

    #[test]
    fn pairing_harness_respects_bound() {
        let s = sys(8);
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(s.group())).unwrap();
        for sign in [TestWeightSign::Plus, TestWeightSign::Minus] {
            let r = pairing_bound_estimate(&s, &spec, sign, 100, 21).unwrap();
            assert!(r.passed, "{sign}: {} > {}", r.max_ratio, r.analytic_bound);
            assert_eq!(r.skipped, 0);
        }
    }

    #[test]
    fn nondegeneracy_examples() {
        for (n, sign) in [(2, TestWeightSign::Minus), (4, TestWeightSign::Plus), (1, TestWeightSign::Minus)] {
            let s = sys(n);
            let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(s.group())).unwrap();
            let r = nondegeneracy_check(&s, &spec, sign).unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.rank, n * n);
        }
        let s = sys(9);
        let spec = NegativeOrderSpec::from_primal(1.0, 4.0, Weight::euclidean(s.group())).unwrap();
        assert!(nondegeneracy_check(&s, &spec, TestWeightSign::Minus).is_err());
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("-1".parse::<TestWeightSign>().unwrap(), TestWeightSign::Minus);
        assert_eq!("+1".parse::<TestWeightSign>().unwrap(), TestWeightSign::Plus);
        assert_eq!(TestWeightSign::default(), TestWeightSign::Minus);
        assert!("0".parse::<TestWeightSign>().is_err());
    }
}
