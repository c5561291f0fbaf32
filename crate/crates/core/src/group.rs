//! Finite abelian groups `Z_{n1} × … × Z_{nk}`, their characters, and the
//! Haar masses that turn integrals over a group or its dual into weighted sums.
//!
//! The dual of a finite abelian group is represented by the same
//! [`FiniteAbelianGroup`] value; the pairing between the two is fixed by
//! [`FiniteAbelianGroup::character`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A product of cyclic groups with a fixed lexicographic enumeration of its
/// points (the last factor varies fastest).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    total_order: usize,
}

/// A point of a [`FiniteAbelianGroup`], one residue per cyclic factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupPoint {
    residues: Vec<usize>,
}

impl GroupPoint {
    pub fn new(residues: Vec<usize>) -> Self {
        GroupPoint { residues }
    }

    pub fn residues(&self) -> &[usize] {
        &self.residues
    }
}

impl From<(usize, usize)> for GroupPoint {
    fn from((a, b): (usize, usize)) -> Self {
        GroupPoint::new(vec![a, b])
    }
}

impl From<usize> for GroupPoint {
    fn from(a: usize) -> Self {
        GroupPoint::new(vec![a])
    }
}

impl FiniteAbelianGroup {
    /// Builds `Z_{n1} × … × Z_{nk}`. Fails on an empty list or a zero order.
    pub fn new(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::invalid("group needs at least one cyclic factor"));
        }
        if let Some(pos) = orders.iter().position(|&n| n == 0) {
            return Err(Error::invalid(format!("cyclic factor {pos} has order 0")));
        }
        let total_order = orders
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::invalid("group order overflows usize"))?;
        Ok(FiniteAbelianGroup {
            orders: orders.to_vec(),
            total_order,
        })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn total_order(&self) -> usize {
        self.total_order
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// The Pontryagin dual. Finite duality is an isomorphism, so this is the
    /// same group; the pairing is carried by [`Self::character`].
    pub fn dual(&self) -> FiniteAbelianGroup {
        self.clone()
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::new(vec![0; self.rank()])
    }

    /// Checks that `x` has the right number of residues, each in range.
    pub fn validate(&self, x: &GroupPoint) -> Result<()> {
        if x.residues.len() != self.rank() {
            return Err(Error::invalid(format!(
                "point has {} residues, group has rank {}",
                x.residues.len(),
                self.rank()
            )));
        }
        for (j, (&r, &n)) in x.residues.iter().zip(&self.orders).enumerate() {
            if r >= n {
                return Err(Error::invalid(format!(
                    "residue {r} out of range for factor {j} of order {n}"
                )));
            }
        }
        Ok(())
    }

    /// Reduces arbitrary integers component-wise into a valid point.
    pub fn reduce(&self, residues: &[i64]) -> Result<GroupPoint> {
        if residues.len() != self.rank() {
            return Err(Error::invalid("wrong number of residues"));
        }
        Ok(GroupPoint::new(
            residues
                .iter()
                .zip(&self.orders)
                .map(|(&r, &n)| r.rem_euclid(n as i64) as usize)
                .collect(),
        ))
    }

    /// Lexicographic index of a point (last factor fastest).
    pub fn index_of(&self, x: &GroupPoint) -> Result<usize> {
        self.validate(x)?;
        Ok(x
            .residues
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (&r, &n)| acc * n + r))
    }

    pub fn point_at(&self, mut index: usize) -> Result<GroupPoint> {
        if index >= self.total_order {
            return Err(Error::invalid(format!(
                "index {index} out of range for group of order {}",
                self.total_order
            )));
        }
        let mut residues = vec![0; self.rank()];
        for (slot, &n) in residues.iter_mut().zip(&self.orders).rev() {
            *slot = index % n;
            index /= n;
        }
        Ok(GroupPoint::new(residues))
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        (0..self.total_order).map(move |i| self.point_at(i).expect("index in range"))
    }

    pub fn sum(&self, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(GroupPoint::new(
            x.residues
                .iter()
                .zip(&y.residues)
                .zip(&self.orders)
                .map(|((&a, &b), &n)| (a + b) % n)
                .collect(),
        ))
    }

    pub fn neg(&self, x: &GroupPoint) -> Result<GroupPoint> {
        self.validate(x)?;
        Ok(GroupPoint::new(
            x.residues
                .iter()
                .zip(&self.orders)
                .map(|(&a, &n)| (n - a) % n)
                .collect(),
        ))
    }

    /// `χ_ξ(x) = exp(2πi Σ_j ξ_j x_j / n_j)`.
    ///
    /// Each phase is reduced to an exact rational turn before the
    /// exponential is taken, so characters of equal points agree bitwise.
    pub fn character(&self, xi: &GroupPoint, x: &GroupPoint) -> Result<Complex64> {
        self.validate(xi)?;
        self.validate(x)?;
        let lcm = self.orders.iter().fold(1u128, |acc, &n| lcm(acc, n as u128));
        let turns = xi
            .residues
            .iter()
            .zip(&x.residues)
            .zip(&self.orders)
            .fold(0u128, |acc, ((&a, &b), &n)| {
                let step = lcm / n as u128;
                (acc + (a as u128 * b as u128 % n as u128) * step) % lcm
            });
        Ok(root_of_unity(turns as u64, lcm as u64))
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

/// `exp(2πi k / n)`, with the exact values at quarter turns.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * PI * k as f64 / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Per-point Haar masses on a finite group and on its dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarConvention {
    mass_per_point_g: f64,
    mass_per_point_dual: f64,
}

impl HaarConvention {
    pub fn new(mass_per_point_g: f64, mass_per_point_dual: f64) -> Result<Self> {
        for (name, m) in [("G", mass_per_point_g), ("dual", mass_per_point_dual)] {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid(format!("Haar mass on {name} must be positive, got {m}")));
            }
        }
        Ok(HaarConvention {
            mass_per_point_g,
            mass_per_point_dual,
        })
    }

    /// Counting measure on both sides.
    pub fn counting() -> Self {
        HaarConvention {
            mass_per_point_g: 1.0,
            mass_per_point_dual: 1.0,
        }
    }

    /// Phase-space convention for the Weyl system on `C^N`: mass `1/N` per
    /// point of `Z_N × Z_N`. Since `tr(π(x)†π(y)) = N δ_{x,y}`, this makes the
    /// quantum Fourier transform unitary `S_2 → L^2` with constant 1.
    pub fn phase_space(n: usize) -> Self {
        let m = 1.0 / n as f64;
        HaarConvention {
            mass_per_point_g: m,
            mass_per_point_dual: m,
        }
    }

    pub fn mass_per_point_g(&self) -> f64 {
        self.mass_per_point_g
    }

    pub fn mass_per_point_dual(&self) -> f64 {
        self.mass_per_point_dual
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.value()
}

/// Compensated sum of complex values (real and imaginary parts separately).
pub fn stable_sum_complex<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for v in values {
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `(Σ_i |f_i|^q · mass)^{1/q}` for moduli `|f_i|`, or `max |f_i|` when `q = ∞`.
///
/// The moduli are rescaled by their maximum before powering so that large
/// or small `q` neither overflows nor underflows.
pub fn lq_norm_of_moduli(moduli: &[f64], q: f64, mass_per_point: f64) -> f64 {
    assert!(q > 0.0, "exponent must be positive");
    let max = moduli.iter().fold(0.0f64, |m, &v| m.max(v));
    if max == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return max;
    }
    let s = stable_sum(moduli.iter().map(|&v| (v / max).powf(q)));
    max * (s * mass_per_point).powf(1.0 / q)
}

/// `L^q` norm of a table of complex values over a dual group whose points
/// each carry `mass_per_point`.
pub fn l_q_norm(values: &[Complex64], q: f64, mass_per_point: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::invalid(format!("L^q exponent must be positive, got {q}")));
    }
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    Ok(lq_norm_of_moduli(&moduli, q, mass_per_point))
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`; `1 ↦ ∞` and `∞ ↦ 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}
