//! Numerical kernels for n-linear spherical averages
//!
//! `A_t(f_1, ..., f_n)(x) = ∫_{S^{nd-1}} f_1(x - t y_1) ... f_n(x - t y_n) dσ(y)`
//!
//! and the objects built around them: the density of the difference
//! push-forward of the sphere measure, lacunary and continuous maximal
//! operators, Littlewood–Paley frequency pieces, Lebesgue-norm probes and the
//! exponent regions where strong bounds hold.
//!
//! All kernels are deterministic: reductions use fixed chunking and
//! compensated sums, and Monte Carlo draws per-chunk seeded streams, so
//! results do not depend on the worker count. The `parallel` feature (on by
//! default) runs the chunks on rayon.

pub mod analysis;
pub mod averages;
pub mod error;
pub mod exponents;
pub mod freqdecomp;
pub mod func;
pub mod grid;
pub mod numeric;
pub mod par;
pub mod pushforward;
pub mod region;
pub mod seed;
pub mod spherequad;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::ExponentTuple;
pub use func::{ConstantOne, Evaluate, FunctionTuple, Profile, TestFunction};
pub use grid::{sample_grid, GridFunction, GridShape};
pub use seed::Seed;
