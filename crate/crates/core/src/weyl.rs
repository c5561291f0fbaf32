//! The finite Heisenberg–Weyl system: the projective representation of the
//! phase-space group `Z_N × Z_N` on `C^N` by cyclic translations and
//! modulations, its multiplier, and an exhaustive axiom checker.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{root_of_unity, stable_sum, stable_sum_complex, FiniteAbelianGroup, GroupPoint};
use crate::linalg::{trace_pairing, OperatorMatrix};

/// Largest `N` accepted by [`check_axioms`]; the cocycle check is `O(N^6)`.
pub const AXIOM_CHECK_MAX_N: usize = 16;

const COMPOSITION_TOL: f64 = 1e-11;
const PHASE_TOL: f64 = 1e-12;
const MULTIPLIER_MODULUS_TOL: f64 = 1e-8;

/// Phase convention for the Weyl operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeylConvention {
    /// `(π(a,b)ψ)(t) = ω^{bt} ψ(t+a)`, `ω = e^{2πi/N}`.
    #[default]
    Standard,
    /// `π(a,b) = τ^{-ab} π_standard(a,b)`, `τ = e^{iπ/N}`, with `a, b ∈ [0, N)`.
    Symmetric,
}

impl fmt::Display for WeylConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeylConvention::Standard => "standard",
            WeylConvention::Symmetric => "symmetric",
        })
    }
}

impl FromStr for WeylConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(WeylConvention::Standard),
            "symmetric" => Ok(WeylConvention::Symmetric),
            other => Err(Error::invalid(format!("unknown Weyl convention '{other}'"))),
        }
    }
}

/// The Weyl representation of `Z_N × Z_N` on `C^N`.
///
/// Every `π(a,b)` is a monomial matrix: row `t` holds a single unimodular
/// entry in column `t + a mod N`. Phases are stored as exponents of the
/// primitive `2N`-th root of unity so both conventions are exact in integer
/// arithmetic up to the final table lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSystem {
    n: usize,
    convention: WeylConvention,
    group: FiniteAbelianGroup,
    roots: Vec<Complex64>,
}

impl WeylSystem {
    pub fn new(n: usize, convention: WeylConvention) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("Hilbert dimension N must be positive"));
        }
        let group = FiniteAbelianGroup::new(&[n, n])?;
        let roots = (0..2 * n as u64).map(|k| root_of_unity(k, 2 * n as u64)).collect();
        Ok(WeylSystem {
            n,
            convention,
            group,
            roots,
        })
    }

    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, WeylConvention::Standard)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> WeylConvention {
        self.convention
    }

    /// The phase-space group `Z_N × Z_N`, which is also its own dual.
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub(crate) fn coords(&self, x: &GroupPoint) -> Result<(usize, usize)> {
        self.group.validate(x)?;
        Ok((x.residues()[0], x.residues()[1]))
    }

    /// Value of `π(a,b)` at row `t`, column `t + a mod N`.
    #[inline]
    pub(crate) fn entry(&self, a: usize, b: usize, t: usize) -> Complex64 {
        let two_n = 2 * self.n;
        let modulation = 2 * (b * t % self.n);
        let k = match self.convention {
            WeylConvention::Standard => modulation,
            WeylConvention::Symmetric => (modulation + two_n - (a * b) % two_n) % two_n,
        };
        self.roots[k]
    }

    /// Nonzero entries of `π(x)` as `(row, column, value)`.
    pub fn monomial(&self, x: &GroupPoint) -> Result<Vec<(usize, usize, Complex64)>> {
        let (a, b) = self.coords(x)?;
        Ok((0..self.n)
            .map(|t| (t, (t + a) % self.n, self.entry(a, b, t)))
            .collect())
    }
}

/// Dense matrix of `π(x)`.
pub fn weyl_operator(sys: &WeylSystem, x: &GroupPoint) -> Result<OperatorMatrix> {
    let mut m = OperatorMatrix::zeros(sys.dim());
    for (row, col, v) in sys.monomial(x)? {
        m[(row, col)] = v;
    }
    Ok(m)
}

/// The scalar `m(x,y)` with `π(x)π(y) = m(x,y) π(x+y)`, read off as
/// `tr(π(x+y)† π(x)π(y)) / N`.
pub fn extract_multiplier(sys: &WeylSystem, x: &GroupPoint, y: &GroupPoint) -> Result<Complex64> {
    let xy = sys.group().sum(x, y)?;
    let prod = weyl_operator(sys, x)?.matmul(&weyl_operator(sys, y)?)?;
    let m = trace_pairing(&prod, &weyl_operator(sys, &xy)?)? / sys.dim() as f64;
    if (m.norm() - 1.0).abs() > MULTIPLIER_MODULUS_TOL {
        return Err(Error::RepresentationInconsistency {
            x: x.residues().to_vec(),
            y: y.residues().to_vec(),
            modulus: m.norm(),
        });
    }
    Ok(m)
}

/// All multipliers `m(x,y)` of a system, indexed by lexicographic point
/// indices, together with the worst composition residual
/// `‖π(x)π(y) − m(x,y)π(x+y)‖_F`.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    order: usize,
    values: Vec<Complex64>,
    worst_residual: f64,
    worst_residual_at: (usize, usize),
}

impl MultiplierTable {
    /// Builds the table from the monomial structure of the operators, in
    /// `O(N^5)` rather than through dense products.
    pub fn compute(sys: &WeylSystem) -> Self {
        let n = sys.dim();
        let order = n * n;
        let mut values = Vec::with_capacity(order * order);
        let mut worst_residual = 0.0f64;
        let mut worst_residual_at = (0, 0);
        for ix in 0..order {
            let (a, b) = (ix / n, ix % n);
            for iy in 0..order {
                let (c, d) = (iy / n, iy % n);
                let (e, f) = ((a + c) % n, (b + d) % n);
                // row t of π(x)π(y) has value π(x)[t, t+a] · π(y)[t+a, t+a+c]
                let prod: Vec<Complex64> = (0..n)
                    .map(|t| sys.entry(a, b, t) * sys.entry(c, d, (t + a) % n))
                    .collect();
                let m = stable_sum_complex(
                    prod.iter().enumerate().map(|(t, p)| p * sys.entry(e, f, t).conj()),
                ) / n as f64;
                let residual = stable_sum(
                    prod.iter()
                        .enumerate()
                        .map(|(t, p)| (p - m * sys.entry(e, f, t)).norm_sqr()),
                )
                .sqrt();
                if residual > worst_residual {
                    worst_residual = residual;
                    worst_residual_at = (ix, iy);
                }
                values.push(m);
            }
        }
        MultiplierTable {
            order,
            values,
            worst_residual,
            worst_residual_at,
        }
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.order + iy]
    }

    pub fn worst_residual(&self) -> f64 {
        self.worst_residual
    }
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub id: String,
    pub statement: String,
    pub passed: bool,
    pub tolerance: f64,
    pub worst_deviation: f64,
    /// Points at which the worst deviation occurs.
    pub witness: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub n: usize,
    pub convention: WeylConvention,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn check(&self, id: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

struct Worst {
    dev: f64,
    at: Vec<usize>,
}

impl Worst {
    fn new() -> Self {
        Worst { dev: 0.0, at: Vec::new() }
    }

    fn update(&mut self, dev: f64, at: &[usize]) {
        if dev > self.dev || self.at.is_empty() {
            self.dev = dev.max(self.dev);
            self.at = at.to_vec();
        }
    }
}

/// Exhaustively checks the projective-representation axioms over all pairs
/// (and, for the cocycle identity, all triples) of phase-space points.
///
/// Checks reported, by id:
/// - `composition`: `π(x)π(y) = m(x,y)π(x+y)`
/// - `unimodular`: `|m(x,y)| = 1`
/// - `inverse_conjugation`: `m(x,y) = conj(m(−x,−y))`
/// - `inverse_conjugation_swapped`: `m(x,y) = conj(m(−y,−x))`
/// - `cocycle`: `m(x,y)m(x+y,z) = m(y,z)m(x,y+z)`
///
/// A failing identity is report content, not an error.
pub fn check_axioms(sys: &WeylSystem) -> Result<AxiomReport> {
    let n = sys.dim();
    if n > AXIOM_CHECK_MAX_N {
        return Err(Error::invalid(format!(
            "exhaustive axiom check limited to N <= {AXIOM_CHECK_MAX_N}, got {n}"
        )));
    }
    let g = sys.group();
    let order = g.total_order();
    let table = MultiplierTable::compute(sys);
    let neg: Vec<usize> = (0..order)
        .map(|i| {
            let p = g.point_at(i).expect("index in range");
            g.index_of(&g.neg(&p).expect("valid")).expect("valid")
        })
        .collect();
    let add = |i: usize, j: usize| {
        let (a, b) = (i / n, i % n);
        let (c, d) = (j / n, j % n);
        ((a + c) % n) * n + (b + d) % n
    };
    let pt = |i: usize| vec![i / n, i % n];

    let mut unimodular = Worst::new();
    let mut inverse = Worst::new();
    let mut swapped = Worst::new();
    for ix in 0..order {
        for iy in 0..order {
            let m = table.get(ix, iy);
            let at = [pt(ix), pt(iy)].concat();
            unimodular.update((m.norm() - 1.0).abs(), &at);
            inverse.update((m - table.get(neg[ix], neg[iy]).conj()).norm(), &at);
            swapped.update((m - table.get(neg[iy], neg[ix]).conj()).norm(), &at);
        }
    }

    let mut cocycle = Worst::new();
    for ix in 0..order {
        for iy in 0..order {
            let ixy = add(ix, iy);
            let mxy = table.get(ix, iy);
            for iz in 0..order {
                let lhs = mxy * table.get(ixy, iz);
                let rhs = table.get(iy, iz) * table.get(ix, add(iy, iz));
                cocycle.update((lhs - rhs).norm(), &[pt(ix), pt(iy), pt(iz)].concat());
            }
        }
    }

    let (rx, ry) = table.worst_residual_at;
    let split = |w: Worst, arity: usize| -> Vec<Vec<usize>> {
        w.at.chunks(2).take(arity).map(|c| c.to_vec()).collect()
    };
    let mk = |id: &str, statement: &str, tol: f64, w: Worst, arity: usize| {
        let dev = w.dev;
        AxiomCheck {
            id: id.to_string(),
            statement: statement.to_string(),
            passed: dev <= tol,
            tolerance: tol,
            worst_deviation: dev,
            witness: split(w, arity),
        }
    };
    let checks = vec![
        AxiomCheck {
            id: "composition".into(),
            statement: "pi(x)pi(y) = m(x,y) pi(x+y)".into(),
            passed: table.worst_residual() <= COMPOSITION_TOL,
            tolerance: COMPOSITION_TOL,
            worst_deviation: table.worst_residual(),
            witness: vec![pt(rx), pt(ry)],
        },
        mk("unimodular", "|m(x,y)| = 1", PHASE_TOL, unimodular, 2),
        mk(
            "inverse_conjugation",
            "m(x,y) = conj(m(-x,-y))",
            PHASE_TOL,
            inverse,
            2,
        ),
        mk(
            "inverse_conjugation_swapped",
            "m(x,y) = conj(m(-y,-x))",
            PHASE_TOL,
            swapped,
            2,
        ),
        mk(
            "cocycle",
            "m(x,y) m(x+y,z) = m(y,z) m(x,y+z)",
            PHASE_TOL,
            cocycle,
            3,
        ),
    ];
    Ok(AxiomReport {
        n,
        convention: sys.convention(),
        checks,
    })
}

/// `max_x ‖π(x)†π(x) − I‖_F`.
pub fn unitarity_defect(sys: &WeylSystem) -> Result<f64> {
    let id = OperatorMatrix::identity(sys.dim());
    sys.group().points().try_fold(0.0f64, |worst, x| {
        let u = weyl_operator(sys, &x)?;
        let d = (&u.adjoint().matmul(&u)? - &id).frobenius_norm();
        Ok(worst.max(d))
    })
}

/// `max_{x,y} |tr(π(x)†π(y)) − N δ_{x,y}|`, computed from dense matrices.
pub fn trace_orthogonality_defect(sys: &WeylSystem) -> Result<f64> {
    let ops: Vec<OperatorMatrix> = sys
        .group()
        .points()
        .map(|x| weyl_operator(sys, &x))
        .collect::<Result<_>>()?;
    let n = sys.dim() as f64;
    let mut worst = 0.0f64;
    for (i, u) in ops.iter().enumerate() {
        for (j, v) in ops.iter().enumerate() {
            // tr(π(x)†π(y)) = conj(tr(π(x) π(y)†))
            let t = trace_pairing(u, v)?.conj();
            let expected = if i == j { n } else { 0.0 };
            worst = worst.max((t - Complex64::new(expected, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// The matrix coefficients `x ↦ ⟨π(x)ψ, ψ⟩` over all of phase space. On a
/// finite group this function is trivially integrable.
pub fn matrix_coefficients(sys: &WeylSystem, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    if psi.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            actual: psi.len(),
        });
    }
    sys.group()
        .points()
        .map(|x| {
            let mono = sys.monomial(&x)?;
            // (π(x)ψ)(t) = v_t ψ(col_t); ⟨π(x)ψ, ψ⟩ = Σ_t (π(x)ψ)(t) conj(ψ(t))
            Ok(stable_sum_complex(
                mono.iter().map(|&(t, col, v)| v * psi[col] * psi[t].conj()),
            ))
        })
        .collect()
}
