//! Quantum Sobolev spaces of Schatten-class operators on the finite
//! Heisenberg-Weyl systems `Z_N x Z_N`.
//!
//! The quantum Fourier transform `F_U(T)(x) = tr(T π(x)*)` carries operators on
//! `C^N` to functions on phase space with mass `1/N` per point, which makes it
//! unitary `S_2 → L^2` and gives Hausdorff-Young with constant one. Sobolev
//! norms weight `F_U(T)` by `(1+γ²)^{s/2}`; the [`embedding`] module measures
//! how those norms control Schatten norms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod ensemble;
pub mod error;
pub mod group;
pub mod linalg;
pub mod qft;
pub mod sobolev;
pub mod weyl;

pub use error::{Error, Result};
