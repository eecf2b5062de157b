//! Step hyperbolic cross approximation of periodic functions whose mixed
//! smoothness is described by a power-logarithmic majorant `Ω`.
//!
//! The crate provides:
//!
//! - [`majorant`]: the majorant `Ω(t)` and an audit of its structural conditions;
//! - [`indexsets`]: the dyadic blocks `ρ(s)`, the index families `χ(N)`, `Θ(N)`,
//!   `Θ′(N)`, the step hyperbolic cross `Q(N)` and tail sums over `χ^⊥(N)`;
//! - [`trigpoly`]: sparse trigonometric polynomials with `L_p` norms;
//! - [`kernels`]: Vallée Poussin, Fejér, band filters `A_s` and Fejér packets;
//! - [`besov`]: `B^Ω_{p,θ}` norms in block and band-filter form;
//! - [`extremal`]: the lower-bound witness functions;
//! - [`approx`]: the orthoprojector onto `Q(N)`, rate formulas, experiments and fits;
//! - [`verify`]: the desk-scale verification suite.

pub mod approx;
pub mod besov;
pub mod error;
pub mod extremal;
pub mod indexsets;
pub mod kernels;
pub mod majorant;
pub mod rng;
pub mod trigpoly;
pub mod verify;

pub use error::{Error, Result};
