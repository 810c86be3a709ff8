//! Iterated logarithms of 64/r.
//!
//! The closed-form example fields and moduli are all built from the chain
//! `L(r) = ln(64/r)`, `K(r) = ln L(r)`, `M(r) = ln K(r)`. The constant 64
//! keeps all three logarithms positive on the working domain `r ∈ (0, 4]`
//! (`L(4) = ln 16 ≈ 2.77`, `K(4) ≈ 1.02`, `M(4) ≈ 0.02`). Expressions are
//! evaluated by nested calls without algebraic rearrangement so that every
//! consumer sees bit-identical values.

/// `ln(64/r)`; positive for `r < 64`.
#[inline]
pub fn ln1(r: f64) -> f64 {
    (64.0 / r).ln()
}

/// `ln ln(64/r)`; positive for `r < 64/e ≈ 23.5`.
#[inline]
pub fn ln2(r: f64) -> f64 {
    ln1(r).ln()
}

/// `ln ln ln(64/r)`; positive for `r < 64·e^{-e} ≈ 4.23`.
#[inline]
pub fn ln3(r: f64) -> f64 {
    ln2(r).ln()
}
