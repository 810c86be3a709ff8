//! Modulus-of-continuity functions `ω: (0, 2] → [0, ∞)`.
//!
//! Moduli enter the laboratory in two forms: closed-form families addressed
//! by spec strings (`const:c`, `powlog:kappa`, `loglog:beta`) and tabulated
//! profiles measured from a field (`table:<path.csv>` on the command line).
//! Both are consumed by the integral functionals in [`crate::dini`] and by
//! the synthetic coefficient fields in [`crate::fields`].

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::logs::{ln1, ln2};

/// Closed-form modulus families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormModulus {
    /// `ω(t) = c`.
    Const(f64),
    /// `ω(t) = κ / max(1, ln(1/t))`.
    ///
    /// The plain `κ/ln(1/t)` is negative on `t ∈ (1, 2]` and singular at
    /// `t = 1`; capping the denominator at 1 keeps the modulus non-negative
    /// on the whole domain while leaving it untouched for `t < 1/e`, which is
    /// the regime every asymptotic statement concerns.
    PowLog(f64),
    /// `ω(t) = 1 / (ln(64/t) · (ln ln(64/t))^β)`.
    LogLog(f64),
    /// `ω(t) = c·t` — a Lipschitz-type modulus, mostly a test fixture with
    /// exact integrals. Not part of the CLI spec-string grammar.
    Linear(f64),
}

impl ClosedFormModulus {
    /// Evaluates the modulus at `t ∈ (0, 2]`.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ClosedFormModulus::Const(c) => c,
            ClosedFormModulus::PowLog(kappa) => kappa / (1.0f64).max((1.0 / t).ln()),
            ClosedFormModulus::LogLog(beta) => 1.0 / (ln1(t) * ln2(t).powf(beta)),
            ClosedFormModulus::Linear(c) => c * t,
        }
    }
}

/// A modulus sampled at radius knots, interpolated linearly in `ln t`.
///
/// Exact at the knots. Outside the knot range the boundary segment is
/// extended; use below the smallest knot raises the shared
/// [`extrapolation flag`](TabulatedModulus::extrapolation_used), because such
/// values are a convention rather than a measurement.
#[derive(Clone)]
pub struct TabulatedModulus {
    /// Knots sorted by increasing radius; `(ln t, value)` pairs.
    knots: Vec<(f64, f64)>,
    extrapolated: Arc<AtomicBool>,
}

impl TabulatedModulus {
    /// Builds a tabulated modulus from `(radius, value)` pairs.
    ///
    /// Requires at least two knots with distinct positive radii in `(0, 2]`
    /// and finite non-negative values.
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.retain(|&(r, _)| r.is_finite());
        if pairs.len() < 2 {
            return Err(CoreError::InvalidArgument(
                "tabulated modulus needs at least two knots".into(),
            ));
        }
        for &(r, v) in &pairs {
            if !(r > 0.0 && r <= 2.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "tabulated modulus knot radius {r} outside (0, 2]"
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::NonFiniteSample(format!(
                    "tabulated modulus value {v} at radius {r}"
                )));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        if pairs.len() < 2 {
            return Err(CoreError::InvalidArgument(
                "tabulated modulus needs two distinct knot radii".into(),
            ));
        }
        let knots = pairs.into_iter().map(|(r, v)| (r.ln(), v)).collect();
        Ok(Self {
            knots,
            extrapolated: Arc::new(AtomicBool::new(false)),
        })
    }

    /// Whether any evaluation below the smallest knot has occurred.
    pub fn extrapolation_used(&self) -> bool {
        self.extrapolated.load(Ordering::Relaxed)
    }

    /// Evaluates by piecewise-linear interpolation in `ln t`, clamped at 0.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t.ln();
        let first = self.knots.first().expect("validated: >= 2 knots");
        if s < first.0 {
            self.extrapolated.store(true, Ordering::Relaxed);
        }
        let idx = match self
            .knots
            .binary_search_by(|&(ks, _)| ks.total_cmp(&s))
        {
            Ok(i) => return self.knots[i].1,
            Err(i) => i,
        };
        // Segment used: interior hit → enclosing pair; outside → boundary pair.
        let hi = idx.clamp(1, self.knots.len() - 1);
        let (s0, v0) = self.knots[hi - 1];
        let (s1, v1) = self.knots[hi];
        let w = (s - s0) / (s1 - s0);
        (v0 + w * (v1 - v0)).max(0.0)
    }
}

impl fmt::Debug for TabulatedModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedModulus")
            .field("knots", &self.knots.len())
            .field("extrapolated", &self.extrapolation_used())
            .finish()
    }
}

/// A modulus of either kind, evaluable on `(0, 2]`.
#[derive(Debug, Clone)]
pub enum Modulus {
    ClosedForm(ClosedFormModulus),
    Tabulated(TabulatedModulus),
}

impl Modulus {
    pub fn constant(c: f64) -> Self {
        Modulus::ClosedForm(ClosedFormModulus::Const(c))
    }

    pub fn pow_log(kappa: f64) -> Self {
        Modulus::ClosedForm(ClosedFormModulus::PowLog(kappa))
    }

    pub fn log_log(beta: f64) -> Self {
        Modulus::ClosedForm(ClosedFormModulus::LogLog(beta))
    }

    pub fn linear(c: f64) -> Self {
        Modulus::ClosedForm(ClosedFormModulus::Linear(c))
    }

    pub fn tabulated(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Modulus::Tabulated(TabulatedModulus::new(pairs)?))
    }

    /// Evaluates the modulus at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Modulus::ClosedForm(m) => m.eval(t),
            Modulus::Tabulated(m) => m.eval(t),
        }
    }

    /// Whether a tabulated modulus has been evaluated below its knots.
    pub fn extrapolation_used(&self) -> bool {
        match self {
            Modulus::ClosedForm(_) => false,
            Modulus::Tabulated(m) => m.extrapolation_used(),
        }
    }
}

/// Parsed form of a modulus spec string.
///
/// Grammar: `const:<c>` | `powlog:<kappa>` | `loglog:<beta>` |
/// `table:<path.csv>`. The table variant carries the path only; callers load
/// the file (see `io::read_modulus_table`) and build a [`Modulus`] from it.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusSpec {
    Const(f64),
    PowLog(f64),
    LogLog(f64),
    Table(std::path::PathBuf),
}

impl ModulusSpec {
    /// Parses a spec string.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| CoreError::Parse(format!("modulus spec `{s}` lacks `kind:arg`")))?;
        let num = |what: &str| -> Result<f64> {
            arg.trim()
                .parse::<f64>()
                .map_err(|_| CoreError::Parse(format!("modulus spec `{s}`: bad {what} `{arg}`")))
        };
        match kind.trim() {
            "const" => {
                let c = num("constant")?;
                if c < 0.0 || !c.is_finite() {
                    return Err(CoreError::Parse(format!(
                        "modulus spec `{s}`: constant must be finite and >= 0"
                    )));
                }
                Ok(ModulusSpec::Const(c))
            }
            "powlog" => {
                let k = num("kappa")?;
                if k < 0.0 || !k.is_finite() {
                    return Err(CoreError::Parse(format!(
                        "modulus spec `{s}`: kappa must be finite and >= 0"
                    )));
                }
                Ok(ModulusSpec::PowLog(k))
            }
            "loglog" => {
                let b = num("beta")?;
                if !b.is_finite() {
                    return Err(CoreError::Parse(format!(
                        "modulus spec `{s}`: beta must be finite"
                    )));
                }
                Ok(ModulusSpec::LogLog(b))
            }
            "table" => {
                if arg.trim().is_empty() {
                    return Err(CoreError::Parse(format!("modulus spec `{s}`: empty path")));
                }
                Ok(ModulusSpec::Table(arg.trim().into()))
            }
            other => Err(CoreError::Parse(format!(
                "unknown modulus kind `{other}` (expected const|powlog|loglog|table)"
            ))),
        }
    }

    /// Converts a non-table spec into an evaluable modulus.
    pub fn to_closed_form(&self) -> Result<Modulus> {
        match *self {
            ModulusSpec::Const(c) => Ok(Modulus::constant(c)),
            ModulusSpec::PowLog(k) => Ok(Modulus::pow_log(k)),
            ModulusSpec::LogLog(b) => Ok(Modulus::log_log(b)),
            ModulusSpec::Table(ref p) => Err(CoreError::InvalidArgument(format!(
                "table modulus `{}` must be loaded from disk first",
                p.display()
            ))),
        }
    }
}
