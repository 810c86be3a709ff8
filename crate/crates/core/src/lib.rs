//! Numerical laboratory for mean-oscillation analysis of divergence-form
//! elliptic systems `∂_α(A_ij^{αβ} ∂_β u^j) = 0` on the ball `B_4 ⊂ R^n`.
//!
//! The crate measures how the regularity of the coefficient tensor `A`
//! controls the oscillation of solution gradients:
//!
//! * [`modulus`] / [`dini`] — moduli of continuity `ω(t)`, the Dini integral
//!   `∫ ω/t dt`, and the C-weighted functional `X(C, r)` whose limit as
//!   `r ↓ 0` separates vanishing (VMO) from bounded (BMO) mean oscillation
//!   of `∇u`.
//! * [`fields`] — closed-form coefficient/solution pairs built from the
//!   radial ansatz `A = Id + a(|x|)(Id − x̂⊗x̂)`, `u = x¹v(|x|)`, including
//!   an example with unbounded gradient and an example with discontinuous
//!   bounded gradient, plus synthetic fields realizing a prescribed modulus.
//! * [`oscillation`] — mean-oscillation profiles `ω_{A,p}(r)` of sampled
//!   fields over balls, BMO seminorms, and VMO trend detection.
//! * [`solver`] — a bilinear finite-element solver for the planar scalar
//!   case, harmonic replacement at a scale, and the contraction cascade
//!   across dyadic scales.
//! * [`estimates`] — gradient-oscillation estimates with explicit structural
//!   right-hand sides and fitted constants.
//! * [`quadrature`] — deterministic ball quadrature rules shared by all of
//!   the above.

pub mod dini;
pub mod error;
pub mod estimates;
pub mod fields;
pub mod io;
pub mod logs;
pub mod modulus;
pub mod oscillation;
pub mod quadrature;
pub mod solver;

pub use error::{CoreError, Result};
