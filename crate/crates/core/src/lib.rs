//! Zero-noise selection laboratory.
//!
//! Simulates scalar SDEs `dX = b(X) dt + ε dW^H` with a two-sided power-law
//! drift `b(x) = A⁺ x^γ` (x > 0), `b(x) = −A⁻ |x|^γ` (x < 0) driven by
//! fractional Brownian motion, and measures how the solutions select one of
//! the two extremal solutions of the ill-posed ODE as `ε → 0`.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod fbm;
pub mod flow;
pub mod grid;
pub mod io;
mod math;
pub mod norms;
mod parallel;
pub mod sde;

pub mod seed;
pub mod selection;
pub mod stats;
pub mod volterra;

pub use error::{Error, Result};
pub use fbm::{generate_fbm_exact, sample_brownian, FbmGenerator, FbmMethod};
pub use grid::{Path, TimeGrid};
pub use volterra::{
    bridge_decompose, kernel_g, past_process, riemann_liouville, NoiseBundle, PastWindow,
};
