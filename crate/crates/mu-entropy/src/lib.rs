//! Operator entropy on weighted sequence spaces ℓ²(μ).
//!
//! The crate computes, for operators U acting on ℓ²(μ) through coordinate
//! matrices (Ux)_j = Σ_k U_{jk} x_k:
//!
//! - the μ-norm ‖W‖²_μ = Σ_{j,k} μ_j |W_{jk}|² and its partition functional
//!   M_χ ([`mu_norm`]);
//! - the semibistochastic image B = b(U), B_{jk} = (μ_j/μ_k)|U_{jk}|², with
//!   its Cesàro (mean-ergodic) projector onto Ker(B − I) ([`stochastic`]);
//! - partition entropies 𝔥(U,χ,n) and 𝔥₁(U,χ,n) by path-weight enumeration,
//!   the exact finite-dimensional closed form
//!   𝔥(U) = −Σ (PᵀE)_j B_{jk} (Pμ)_k log B_{jk}, entropy rates, truncation
//!   limits 𝔍, and a zero-entropy classifier ([`entropy`]);
//! - an operator gallery (shifts, Koopman, two-band, column, Hankel, block
//!   families) materialized through finite truncations ([`operators`]);
//! - JSON experiment configs ([`config`]) and a built-in verification table
//!   pinning the worked examples ([`verify`]).
//!
//! All entropies are reported in nats unless a log base is requested at the
//! CLI layer.

pub mod config;
pub mod entropy;
pub mod error;
pub mod measure;
pub mod mu_norm;
pub mod operators;
pub mod stochastic;
pub mod verify;

pub use error::{Error, Result};
