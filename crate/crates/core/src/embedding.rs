//! Embedding exponents, the weighted Hölder + Hausdorff–Young chain
//! `H^{s,p}_γ ↪ S_β`, and the counterexample scaling sweep showing the
//! embedding cannot be upgraded to `S_{ρ'}` for `ρ > q`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{trial_rng, OperatorEnsemble};
use crate::error::{Error, Result};
use crate::group::{conjugate_exponent, lq_norm_of_moduli, HaarConvention};
use crate::linalg::schatten_norm;
use crate::qft::{argmax, qft_forward, qft_inverse, PhaseFunction, HY_TOLERANCE};
use crate::sobolev::{sobolev_norm, symmetric_representative, SobolevSpec, Weight};
use crate::weyl::WeylSystem;

const EXPONENT_IDENTITY_TOL: f64 = 1e-15;
pub const HOLDER_TOLERANCE: f64 = 1e-12;
pub const COMPOSITE_TOLERANCE: f64 = 1e-10;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
pub const SLOPE_RELATIVE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub alpha: f64,
    pub q: f64,
    pub s: f64,
    /// `αq/(α+q)`, so that `1/σ = 1/α + 1/q`.
    pub sigma: f64,
    /// `σ/(σ−1)`; absent when `σ ≤ 1`.
    pub beta_corrected: Option<f64>,
    /// `αq/(α(q−1)−s)`; absent when the denominator is not positive.
    pub beta_paper: Option<f64>,
    /// `αq/(α+s)`, whose conjugate exponent is `beta_paper`.
    pub sigma_substituted: f64,
    pub sigma_in_range: bool,
    pub beta_paper_defined: bool,
    /// `|1/σ − 1/α − 1/q|`.
    pub exponent_identity_residual: f64,
}

impl ExponentReport {
    pub fn beta(&self, choice: BetaChoice) -> Option<f64> {
        match choice {
            BetaChoice::Corrected => self.beta_corrected,
            BetaChoice::Paper => self.beta_paper,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.exponent_identity_residual <= EXPONENT_IDENTITY_TOL
            && self.sigma <= self.alpha.min(self.q)
            && self
                .beta_corrected
                .is_none_or(|b| (b - self.sigma / (self.sigma - 1.0)).abs() <= EXPONENT_IDENTITY_TOL * b)
    }
}

/// Exponent arithmetic for the embedding; `alpha` may be `f64::INFINITY`.
pub fn compute_exponents(alpha: f64, q: f64, s: f64) -> Result<ExponentReport> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("q must be finite and > 1, got {q}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("s must be positive, got {s}")));
    }
    let (sigma, sigma_substituted, beta_paper) = if alpha.is_infinite() {
        (q, q, Some(q / (q - 1.0)))
    } else {
        let denom = alpha * (q - 1.0) - s;
        (
            alpha * q / (alpha + q),
            alpha * q / (alpha + s),
            (denom > 0.0).then(|| alpha * q / denom),
        )
    };
    let residual = (1.0 / sigma - 1.0 / alpha - 1.0 / q).abs();
    Ok(ExponentReport {
        alpha,
        q,
        s,
        sigma,
        beta_corrected: (sigma > 1.0).then(|| conjugate_exponent(sigma)),
        beta_paper,
        sigma_substituted,
        sigma_in_range: sigma > 1.0 && sigma <= 2.0,
        beta_paper_defined: beta_paper.is_some(),
        exponent_identity_residual: residual,
    })
}

/// `‖m‖_{L^α}` of `m = (1+γ²)^{−s/2}` (or `γ^{−s}` when homogeneous) under
/// the dual Haar mass of `convention`.
pub fn multiplier_norm(weight: &Weight, s: f64, alpha: f64, homogeneous: bool, convention: HaarConvention) -> f64 {
    let m = weight.fourier_multiplier(-s, homogeneous);
    lq_norm_of_moduli(&m, alpha, convention.mass_per_point_dual())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaChoice {
    #[default]
    Corrected,
    Paper,
}

impl fmt::Display for BetaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetaChoice::Corrected => "corrected",
            BetaChoice::Paper => "paper",
        })
    }
}

impl FromStr for BetaChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(BetaChoice::Corrected),
            "paper" => Ok(BetaChoice::Paper),
            other => Err(Error::invalid(format!("unknown beta choice '{other}'"))),
        }
    }
}

/// Per-trial measurements of the embedding chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainTrial {
    pub trial: u64,
    pub sobolev_norm: f64,
    /// `‖F_U(T)‖_{L^σ} / (‖m‖_α ‖T‖_{H^{s,p}_γ})`.
    pub link1_ratio: f64,
    /// `‖T‖_{S_{σ'}} / ‖F_U(T)‖_{L^σ}`.
    pub link2_ratio: f64,
    /// `‖T‖_{S_β} / ‖T‖_{H^{s,p}_γ}`.
    pub composite_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRunReport {
    pub n: usize,
    pub spec: SobolevSpec,
    pub alpha: f64,
    pub exponents: ExponentReport,
    pub beta_choice: BetaChoice,
    pub beta_used: f64,
    pub multiplier_norm: f64,
    pub max_ratio: f64,
    pub max_link1_ratio: f64,
    pub max_link2_ratio: f64,
    pub trials: u64,
    pub seed: u64,
    pub skipped: u64,
    /// Trials whose composite ratio exceeds `multiplier_norm·(1+tolerance)`.
    pub violations: u64,
    pub link1_violations: u64,
    pub link2_violations: u64,
    pub per_trial: Vec<ChainTrial>,
}

impl EmbeddingRunReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.link1_violations == 0 && self.link2_violations == 0
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.per_trial.iter().map(|t| t.composite_ratio).collect()
    }
}

pub fn verify_embedding_chain(
    sys: &WeylSystem,
    spec: &SobolevSpec,
    alpha: f64,
    beta_choice: BetaChoice,
    trials: u64,
    seed: u64,
) -> Result<EmbeddingRunReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let exponents = compute_exponents(alpha, spec.q(), spec.s())?;
    if !exponents.sigma_in_range {
        return Err(Error::PreconditionViolation(format!(
            "Hausdorff-Young step needs 1 < sigma <= 2, got sigma = {} from alpha = {alpha}, q = {}",
            exponents.sigma,
            spec.q()
        )));
    }
    let beta_used = exponents.beta(beta_choice).ok_or_else(|| {
        Error::PreconditionViolation(format!(
            "paper beta undefined: alpha(q-1) = {} <= s = {}",
            alpha * (spec.q() - 1.0),
            spec.s()
        ))
    })?;
    let sigma = exponents.sigma;
    let sigma_prime = conjugate_exponent(sigma);
    let m_norm = multiplier_norm(
        spec.weight(),
        spec.s(),
        alpha,
        spec.homogeneous(),
        HaarConvention::phase_space(sys.dim()),
    );
    let n = sys.dim();
    let rows: Vec<Option<ChainTrial>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = OperatorEnsemble::for_trial(i).sample(n, &mut trial_rng(seed, i));
            let sob = sobolev_norm(sys, &t, spec)?;
            if sob == 0.0 {
                return Ok(None);
            }
            let f_sigma = qft_forward(sys, &t)?.l_q_norm(sigma)?;
            Ok(Some(ChainTrial {
                trial: i,
                sobolev_norm: sob,
                link1_ratio: f_sigma / (m_norm * sob),
                link2_ratio: schatten_norm(&t, sigma_prime)? / f_sigma,
                composite_ratio: schatten_norm(&t, beta_used)? / sob,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count() as u64;
    let per_trial: Vec<ChainTrial> = rows.into_iter().flatten().collect();
    let max_of = |f: fn(&ChainTrial) -> f64| argmax(&per_trial.iter().map(f).collect::<Vec<_>>()).1;
    Ok(EmbeddingRunReport {
        n,
        spec: spec.clone(),
        alpha,
        exponents,
        beta_choice,
        beta_used,
        multiplier_norm: m_norm,
        max_ratio: max_of(|t| t.composite_ratio),
        max_link1_ratio: max_of(|t| t.link1_ratio),
        max_link2_ratio: max_of(|t| t.link2_ratio),
        trials,
        seed,
        skipped,
        violations: per_trial
            .iter()
            .filter(|t| t.composite_ratio > m_norm * (1.0 + COMPOSITE_TOLERANCE))
            .count() as u64,
        link1_violations: per_trial
            .iter()
            .filter(|t| t.link1_ratio > 1.0 + HOLDER_TOLERANCE)
            .count() as u64,
        link2_violations: per_trial
            .iter()
            .filter(|t| t.link2_ratio > 1.0 + HY_TOLERANCE)
            .count() as u64,
        per_trial,
    })
}

/// Shape of the set `E` carrying the counterexample function `ε^{−1/q} 1_E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetSelector {
    /// First `k` dual points in lexicographic order.
    #[default]
    LexFirst,
    /// `k` points nearest the origin in symmetric representatives, ties
    /// broken lexicographically.
    FrequencyLocalized,
    /// The subgroup `{(0, b) : b ∈ (N/k)Z_N}`; requires `k | N`.
    Lattice,
}

impl fmt::Display for SetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetSelector::LexFirst => "lex-first",
            SetSelector::FrequencyLocalized => "frequency-localized",
            SetSelector::Lattice => "lattice",
        })
    }
}

impl FromStr for SetSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex-first" => Ok(SetSelector::LexFirst),
            "frequency-localized" => Ok(SetSelector::FrequencyLocalized),
            "lattice" => Ok(SetSelector::Lattice),
            other => Err(Error::invalid(format!("unknown set selector '{other}'"))),
        }
    }
}

impl SetSelector {
    /// Dual indices of the selected set of `k` points.
    pub fn select(self, sys: &WeylSystem, k: usize) -> Result<Vec<usize>> {
        let n = sys.dim();
        if k == 0 || k > n * n {
            return Err(Error::invalid(format!("set size must lie in 1..={}, got {k}", n * n)));
        }
        match self {
            SetSelector::LexFirst => Ok((0..k).collect()),
            SetSelector::FrequencyLocalized => {
                let mut idx: Vec<(i64, usize)> = (0..n * n)
                    .map(|i| {
                        let (a, b) = (i / n, i % n);
                        let d = symmetric_representative(a, n).pow(2) + symmetric_representative(b, n).pow(2);
                        (d, i)
                    })
                    .collect();
                idx.sort_unstable();
                Ok(idx.into_iter().take(k).map(|(_, i)| i).collect())
            }
            SetSelector::Lattice => {
                if !n.is_multiple_of(k) {
                    return Err(Error::invalid(format!("lattice selector needs k | N, got k = {k}, N = {n}")));
                }
                let step = n / k;
                Ok((0..k).map(|j| j * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexamplePoint {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    /// `‖a‖_{L^q}`; equals 1 by construction.
    pub sobolev_norm: f64,
    /// `‖a‖_{L^ρ}`, closed form `ε^{1/ρ−1/q}`.
    pub rho_norm: f64,
    /// `‖T‖_{S_{ρ'}}` with `T = F_U⁻¹(a)`.
    pub schatten_beta_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub q: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub selector: SetSelector,
    /// Sorted by decreasing `epsilon`.
    pub points: Vec<CounterexamplePoint>,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub decades_spanned: f64,
    pub normalization_ok: bool,
    pub slope_within_tolerance: bool,
    pub strictly_increasing: bool,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.normalization_ok && self.slope_within_tolerance && self.strictly_increasing
    }
}

/// Ordinary least squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Builds `a = ε^{−1/q} 1_E` with `|E| = k` on each system, inverts it, and
/// fits `log ‖T‖_{S_{ρ'}}` against `log ε`.
pub fn counterexample_run(
    sweep: &[(WeylSystem, usize)],
    q: f64,
    rho: f64,
    selector: SetSelector,
) -> Result<CounterexampleReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("q must be finite and > 1, got {q}")));
    }
    if !(rho > q) {
        return Err(Error::invalid(format!("rho must exceed q, got rho = {rho}, q = {q}")));
    }
    if sweep.len() < 2 {
        return Err(Error::invalid("sweep needs at least two points to fit a slope"));
    }
    let rho_prime = conjugate_exponent(rho);
    let mut points: Vec<CounterexamplePoint> = sweep
        .par_iter()
        .map(|(sys, k)| {
            let n = sys.dim();
            let indices = selector.select(sys, *k)?;
            let epsilon = *k as f64 / n as f64;
            let a = PhaseFunction::indicator(sys, &indices, indicator_height(epsilon, q))?;
            let t = qft_inverse(sys, &a)?;
            Ok(CounterexamplePoint {
                n,
                k: *k,
                epsilon,
                sobolev_norm: a.l_q_norm(q)?,
                rho_norm: a.l_q_norm(rho)?,
                schatten_beta_norm: schatten_norm(&t, rho_prime)?,
            })
        })
        .collect::<Result<_>>()?;
    points.sort_by(|x, y| y.epsilon.total_cmp(&x.epsilon));
    let log_eps: Vec<f64> = points.iter().map(|p| p.epsilon.ln()).collect();
    let log_norm: Vec<f64> = points.iter().map(|p| p.schatten_beta_norm.ln()).collect();
    let fitted_slope = ols_slope(&log_eps, &log_norm);
    let predicted_slope = 1.0 / rho - 1.0 / q;
    let eps_max = points.first().map_or(0.0, |p| p.epsilon);
    let eps_min = points.last().map_or(0.0, |p| p.epsilon);
    Ok(CounterexampleReport {
        q,
        rho,
        rho_prime,
        selector,
        normalization_ok: points
            .iter()
            .all(|p| (p.sobolev_norm - 1.0).abs() <= NORMALIZATION_TOLERANCE),
        strictly_increasing: points
            .windows(2)
            .all(|w| w[1].epsilon < w[0].epsilon && w[1].schatten_beta_norm > w[0].schatten_beta_norm),
        slope_within_tolerance: (fitted_slope - predicted_slope).abs()
            <= SLOPE_RELATIVE_TOLERANCE * predicted_slope.abs(),
        decades_spanned: (eps_max / eps_min).log10(),
        fitted_slope,
        predicted_slope,
        points,
    })
}

/// Height `ε^{−1/q}` of the indicator with unit `L^q` norm on a set of mass `ε`.
pub fn indicator_height(epsilon: f64, q: f64) -> f64 {
    epsilon.powf(-1.0 / q)
}
