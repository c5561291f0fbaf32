//! Dense complex square matrices standing in for operators on `H = C^N`,
//! with singular values by one-sided Jacobi and the Schatten norms built on them.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{lq_norm_of_moduli, stable_sum, stable_sum_complex};

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_OFF_TOL: f64 = 1e-14;
const SINGULAR_CLAMP: f64 = 1e-13;

/// An `N × N` complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix {
            dim,
            entries: vec![Complex64::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit `E_{jk}`.
    pub fn unit(dim: usize, j: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(j, k)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let vals: Vec<_> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::diagonal(&vals)
    }

    /// Builds a matrix from row-major entries, rejecting non-square or
    /// non-finite input.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let m = OperatorMatrix { dim, entries };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<_> = rows.iter().flatten().copied().collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("rows must all have length equal to the row count"));
        }
        Self::from_row_major(dim, entries)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        OperatorMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::default() {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        stable_sum_complex((0..self.dim).map(|i| self[(i, i)]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let max = self.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if max == 0.0 {
            return 0.0;
        }
        max * stable_sum(self.entries.iter().map(|z| (z.norm() / max).powi(2))).sqrt()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for OperatorMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for OperatorMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

// Operator sugar panics on mismatched dimensions; the `try_*` and
// `matmul` methods report the mismatch instead.
impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.try_add(rhs).expect("dimension mismatch in +")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.try_sub(rhs).expect("dimension mismatch in -")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs).expect("dimension mismatch in *")
    }
}

/// Singular values, sorted nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `(Σ s_n^p)^{1/p}`, or `s_1` for `p = ∞`. For `p < 1` this is the
    /// Schatten quasi-norm.
    pub fn schatten(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::invalid(format!("Schatten exponent must be positive, got {p}")));
        }
        Ok(lq_norm_of_moduli(&self.values, p, 1.0))
    }

    /// Number of singular values above `rel_tol · s_1`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.largest();
        self.values.iter().filter(|&&s| s > cut).count()
    }
}

/// Singular values by one-sided (Hestenes) Jacobi on the columns of `T`.
///
/// Sweeps stop once the off-diagonal Frobenius mass of the column Gram
/// matrix `T†T` drops below `1e-14 · ‖T‖_F²`, or a sweep applies no
/// rotation; after 30 sweeps the routine gives up with
/// [`Error::NoConvergence`]. Values below `1e-13 · s_1` are clamped to zero.
pub fn singular_values(t: &OperatorMatrix) -> Result<SingularSpectrum> {
    t.check_finite()?;
    let n = t.dim();
    // column-major working copy
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| t.column(j)).collect();
    let fro = t.frobenius_norm();
    if fro == 0.0 {
        return Ok(SingularSpectrum { values: vec![0.0; n] });
    }
    // Work with unit Frobenius norm so Gram entries stay O(1).
    for c in cols.iter_mut() {
        for z in c.iter_mut() {
            *z /= fro;
        }
    }
    let tol = JACOBI_OFF_TOL;

    let mut converged = false;
    let mut off = f64::INFINITY;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        off = off_diagonal_mass(&cols);
        if off <= tol {
            converged = true;
            break;
        }
        if !jacobi_sweep(&mut cols) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let mut values: Vec<f64> = cols.iter().map(|c| fro * column_norm(c)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let cut = SINGULAR_CLAMP * values[0];
    for v in values.iter_mut() {
        if *v < cut {
            *v = 0.0;
        }
    }
    Ok(SingularSpectrum { values })
}

fn column_norm(c: &[Complex64]) -> f64 {
    stable_sum(c.iter().map(|z| z.norm_sqr())).sqrt()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    stable_sum_complex(a.iter().zip(b).map(|(x, y)| x.conj() * y))
}

fn off_diagonal_mass(cols: &[Vec<Complex64>]) -> f64 {
    let mut acc = 0.0;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            acc += inner(&cols[i], &cols[j]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// One cyclic sweep over all column pairs; returns whether any rotation ran.
fn jacobi_sweep(cols: &mut [Vec<Complex64>]) -> bool {
    let n = cols.len();
    let mut rotated = false;
    for i in 0..n {
        for j in i + 1..n {
            let alpha = stable_sum(cols[i].iter().map(|z| z.norm_sqr()));
            let beta = stable_sum(cols[j].iter().map(|z| z.norm_sqr()));
            let gamma = inner(&cols[i], &cols[j]);
            let g = gamma.norm();
            if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            // Rotate column j by the phase of gamma so the 2×2 Gram block is real.
            let phase = (gamma / g).conj();
            let zeta = (beta - alpha) / (2.0 * g);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let (left, right) = cols.split_at_mut(j);
            let (ci, cj) = (&mut left[i], &mut right[0]);
            for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                let yp = *y * phase;
                let xi = *x;
                *x = xi * c - yp * s;
                *y = xi * s + yp * c;
            }
        }
    }
    rotated
}

/// Schatten `p`-norm; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(t: &OperatorMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("Schatten exponent must be positive, got {p}")));
    }
    singular_values(t)?.schatten(p)
}

/// `⟨T, W⟩ = tr(T W†) = Σ_{jk} T_{jk} conj(W_{jk})`.
pub fn trace_pairing(t: &OperatorMatrix, w: &OperatorMatrix) -> Result<Complex64> {
    t.check_same_dim(w)?;
    Ok(stable_sum_complex(
        t.entries.iter().zip(&w.entries).map(|(a, b)| a * b.conj()),
    ))
}

/// Unitary factor of a QR decomposition by modified Gram–Schmidt, with the
/// phases fixed so that `R` has a positive diagonal. Fails on rank-deficient
/// input.
pub fn qr_unitary(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let n = a.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = inner(&done[k], &rest[0]);
                for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * q;
                }
            }
        }
        let norm = column_norm(&cols[j]);
        if norm <= 1e-12 * a.frobenius_norm() {
            return Err(Error::invalid("matrix is numerically rank deficient"));
        }
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    Ok(OperatorMatrix::from_fn(n, |i, j| cols[j][i]))
}
