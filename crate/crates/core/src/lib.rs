//! Turing-instability classification for reaction-diffusion systems with a
//! single diffusible species.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! - [`numerics`]: small-degree polynomials, characteristic polynomials,
//!   Hessenberg QR eigenvalues, companion-matrix roots and Hurwitz tests.
//! - [`model`]: the linearized system, its diffuser partition, the local
//!   transfer function `h(s) = n(s)/d(s)` and the closed-loop family
//!   `p(λ, s) = d(s) + λ n(s)`.
//! - [`classify`]: dominant closed-loop poles, Type-I / Type-II verdicts and
//!   the closed-form three-species conditions.
//! - [`grayscott`]: the extended Gray-Scott model with `Z` as the only
//!   diffuser, its equilibria, Jacobian and `(γ, k)` region sweeps.
//! - [`pdesim`]: a 1-D method-of-lines simulator with Neumann boundaries and
//!   cosine-mode spectra.
//!
//! ```
//! use turing_one_core::classify::{classify, ClassifyOptions, VerdictKind};
//! use turing_one_core::grayscott::{Branch, GsParams};
//! use turing_one_core::model::{LambdaPolicy, LinearSystem, SpatialSpec};
//!
//! let params = GsParams::preset_a();
//! let plus = params.equilibrium(Branch::Plus).unwrap();
//! let sys = LinearSystem::new(params.jacobian_at(&plus)).unwrap();
//! let spatial = SpatialSpec::new(1.0e-3, 1.0, 200, LambdaPolicy::Discrete).unwrap();
//! let verdict = classify(&sys, &spatial, &ClassifyOptions::default()).unwrap();
//! assert_eq!(verdict.kind, VerdictKind::TypeI);
//! assert_eq!(verdict.dominant_modes(), [2]);
//! ```
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classify;
mod error;
pub mod grayscott;
pub mod model;
pub mod numerics;
pub mod pdesim;

pub use error::Error;
pub use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;
