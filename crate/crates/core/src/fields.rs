//! Evaluable coefficient and solution fields.
//!
//! A coefficient field is a tensor map `A(x) = (A_{ij}^{αβ}(x))` on the ball
//! `B_4 ⊂ R^n` with declared ellipticity metadata; a solution field is a
//! vector map `u: B_4 → R^N` with a gradient (closed form or finite
//! difference). The shipped examples are radial-ansatz pairs
//!
//! ```text
//! A^{αβ}(x) = δ^{αβ} + a(|x|)(δ^{αβ} − x^α x^β/|x|²),   u(x) = x¹ v(|x|),
//! ```
//!
//! for which the divergence-form operator reduces to the exact radial
//! identity checked by [`radial_residual`]:
//!
//! ```text
//! ∂_α(A^{αβ} ∂_β u) = x¹ ( v″(r) + (n+1) v′(r)/r − (n−1) a(r) v(r)/r² ).
//! ```
//!
//! Matrix norms are Frobenius norms of the flattened `(N·n) × (N·n)` tensor
//! throughout (so the identity has norm `√(nN)`).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dini::dini_integral;
use crate::error::{CoreError, Result};
use crate::logs::{ln1, ln2, ln3};
use crate::modulus::Modulus;
use crate::quadrature::{QuadratureRule, RuleKind};

/// Smallest radius fed into the iterated-logarithm chain; below this the
/// chain is evaluated at the clamp value (documented convention for the
/// removable point singularity at the origin).
const RADIAL_CLAMP: f64 = 1e-300;

/// A point of the closed ball `B_4 ⊂ R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Validates `|coords| ≤ 4` (with a 1e-12 relative slack) and finiteness.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(CoreError::InvalidArgument("empty point".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::Domain(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 4.0 * (1.0 + 1e-12) {
            return Err(CoreError::Domain(format!(
                "point {coords:?} has norm {norm:.6} > 4"
            )));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Anything that can be sampled pointwise into a flat component buffer.
///
/// Evaluation is pure and thread-safe; implementations hold no mutable state
/// after construction.
pub trait SampledField: Send + Sync {
    /// Ambient dimension `n`.
    fn dim(&self) -> usize;
    /// Number of output components per sample.
    fn output_len(&self) -> usize;
    /// Writes the sample at `x` (`x.len() == dim`) into `out`
    /// (`out.len() == output_len`).
    fn eval_into(&self, x: &[f64], out: &mut [f64]);
    /// Human-readable identifier used in reports.
    fn label(&self) -> &str;
}

pub(crate) fn frob(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

type EvalFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tensor coefficient field `A_{ij}^{αβ}(x)` with ellipticity metadata.
///
/// Output layout: component `(i, α, j, β)` at flat index
/// `((i·n + α)·N + j)·n + β`.
#[derive(Clone)]
pub struct CoefficientField {
    n: usize,
    components: usize,
    ellipticity: f64,
    bound: f64,
    name: String,
    eval: EvalFn,
}

impl CoefficientField {
    /// Builds a field from an evaluation closure.
    ///
    /// `ellipticity` is the declared coercivity constant λ of the bilinear
    /// form and `bound` the declared sup of the Frobenius norm Λ.
    pub fn from_fn(
        name: impl Into<String>,
        n: usize,
        components: usize,
        ellipticity: f64,
        bound: f64,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if n < 2 || components < 1 {
            return Err(CoreError::InvalidArgument(format!(
                "coefficient field needs n >= 2 and N >= 1, got n={n}, N={components}"
            )));
        }
        if !(ellipticity > 0.0) || !(bound > 0.0) {
            return Err(CoreError::InvalidArgument(
                "ellipticity and bound metadata must be positive".into(),
            ));
        }
        Ok(Self {
            n,
            components,
            ellipticity,
            bound,
            name: name.into(),
            eval: Arc::new(eval),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of solution components `N`.
    pub fn components(&self) -> usize {
        self.components
    }

    /// Declared coercivity constant λ.
    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// Declared Frobenius-norm bound Λ.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tensor_len(&self) -> usize {
        (self.n * self.components).pow(2)
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.tensor_len()];
        (self.eval)(x, &mut out);
        out
    }

    /// Samples the field as a symmetrized 2×2 matrix `[a11, a12, a22]`.
    ///
    /// Requires the scalar planar case `n = 2, N = 1` used by the solver.
    pub fn matrix2(&self, x: &[f64], out: &mut [f64; 3]) -> Result<()> {
        if self.n != 2 || self.components != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "matrix2 needs n=2, N=1, field `{}` has n={}, N={}",
                self.name, self.n, self.components
            )));
        }
        let mut buf = [0.0; 4];
        (self.eval)(x, &mut buf);
        out[0] = buf[0];
        out[1] = 0.5 * (buf[1] + buf[2]);
        out[2] = buf[3];
        Ok(())
    }
}

impl SampledField for CoefficientField {
    fn dim(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.tensor_len()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    fn label(&self) -> &str {
        &self.name
    }
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("N", &self.components)
            .field("ellipticity", &self.ellipticity)
            .field("bound", &self.bound)
            .finish()
    }
}

/// Vector solution field `u: B_4 → R^N` with gradient access.
#[derive(Clone)]
pub struct VectorSolutionField {
    n: usize,
    components: usize,
    name: String,
    eval: EvalFn,
    /// Closed-form gradient, row-major `N × n`; finite differences otherwise.
    grad: Option<EvalFn>,
    /// A certified finite bound for `sup |∇u|`, when one is known.
    gradient_sup: Option<f64>,
}

impl VectorSolutionField {
    pub fn from_fn(
        name: impl Into<String>,
        n: usize,
        components: usize,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if n < 2 || components < 1 {
            return Err(CoreError::InvalidArgument(format!(
                "solution field needs n >= 2 and N >= 1, got n={n}, N={components}"
            )));
        }
        Ok(Self {
            n,
            components,
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            gradient_sup: None,
        })
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_gradient_sup(mut self, bound: f64) -> Self {
        self.gradient_sup = Some(bound);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Certified `sup |∇u|` bound, if the constructor supplied one.
    pub fn gradient_sup(&self) -> Option<f64> {
        self.gradient_sup
    }

    pub fn has_closed_form_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.components];
        (self.eval)(x, &mut out);
        out
    }

    /// Writes the `N × n` gradient (row-major) at `x`.
    ///
    /// Uses the closed form when present; otherwise 4th-order central
    /// differences with step `h = max(1e-5, 1e-3·|x|)`, which respects the
    /// logarithmic sharpening of the examples toward the origin.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        if let Some(g) = &self.grad {
            g(x, out);
            return;
        }
        let h = 1e-5f64.max(1e-3 * frob(x));
        let mut xp = x.to_vec();
        let mut f1 = vec![0.0; self.components];
        let mut f2 = vec![0.0; self.components];
        let mut f3 = vec![0.0; self.components];
        let mut f4 = vec![0.0; self.components];
        for d in 0..self.n {
            let x0 = x[d];
            xp[d] = x0 + 2.0 * h;
            (self.eval)(&xp, &mut f1);
            xp[d] = x0 + h;
            (self.eval)(&xp, &mut f2);
            xp[d] = x0 - h;
            (self.eval)(&xp, &mut f3);
            xp[d] = x0 - 2.0 * h;
            (self.eval)(&xp, &mut f4);
            xp[d] = x0;
            for i in 0..self.components {
                out[i * self.n + d] = (-f1[i] + 8.0 * f2[i] - 8.0 * f3[i] + f4[i]) / (12.0 * h);
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.components * self.n];
        self.gradient_into(x, &mut out);
        out
    }
}

impl SampledField for VectorSolutionField {
    fn dim(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.components
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    fn label(&self) -> &str {
        &self.name
    }
}

impl std::fmt::Debug for VectorSolutionField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorSolutionField")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("N", &self.components)
            .field("gradient_sup", &self.gradient_sup)
            .finish()
    }
}

/// Adapter presenting the gradient `∇u` of a solution field as a sampled
/// field with `N·n` components (for oscillation profiling).
pub struct GradientField<'a> {
    field: &'a VectorSolutionField,
}

impl<'a> GradientField<'a> {
    pub fn new(field: &'a VectorSolutionField) -> Self {
        Self { field }
    }
}

impl SampledField for GradientField<'_> {
    fn dim(&self) -> usize {
        self.field.n()
    }

    fn output_len(&self) -> usize {
        self.field.components() * self.field.n()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.field.gradient_into(x, out)
    }

    fn label(&self) -> &str {
        self.field.name()
    }
}

/// Scalar field depending on `|x|` only (e.g. the triple-log field
/// `ℓ(x) = ln ln ln(64/|x|)` whose oscillation decays like `1/(L·K)`).
pub struct ScalarRadialField {
    n: usize,
    name: String,
    f: RadialFn,
}

impl ScalarRadialField {
    pub fn new(name: impl Into<String>, n: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            n,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `ℓ(x) = ln ln ln(64/|x|)`.
    pub fn triple_log(n: usize) -> Self {
        Self::new("triple-log-scalar", n, ln3)
    }
}

impl SampledField for ScalarRadialField {
    fn dim(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        1
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = (self.f)(frob(x).max(RADIAL_CLAMP));
    }

    fn label(&self) -> &str {
        &self.name
    }
}

/// Radial ansatz `(a, v)` with optional closed-form derivatives.
#[derive(Clone)]
pub struct RadialAnsatz {
    pub name: String,
    pub a: RadialFn,
    pub v: RadialFn,
    pub a_deriv: Option<RadialFn>,
    pub v_deriv: Option<RadialFn>,
    pub v_deriv2: Option<RadialFn>,
}

impl RadialAnsatz {
    /// Minimum and maximum of the induced coefficient eigenvalues
    /// `{1, 1 + a(r)}` over a log grid of `samples` radii in `[r_min, r_max]`.
    pub fn eigenvalue_range(&self, r_min: f64, r_max: f64, samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..samples {
            let t = i as f64 / (samples - 1).max(1) as f64;
            let r = r_min * (r_max / r_min).powf(t);
            let e = 1.0 + (self.a)(r);
            lo = lo.min(e.min(1.0));
            hi = hi.max(e.max(1.0));
        }
        (lo, hi)
    }

    /// Induced coefficient field
    /// `A^{αβ}(x) = δ^{αβ} + a(|x|)(δ^{αβ} − x^α x^β/|x|²)` (N = 1).
    ///
    /// Ellipticity metadata comes from the eigenvalue scan
    /// (eigenvalues are exactly `1` along `x` and `1 + a(|x|)` across);
    /// errors if the scan finds a non-positive eigenvalue.
    pub fn coefficient_field(&self, n: usize) -> Result<CoefficientField> {
        let (min_eig, max_eig) = self.eigenvalue_range(1e-9, 4.0, 4096);
        if min_eig <= 0.0 {
            return Err(CoreError::EllipticityViolation {
                point: vec![],
                detail: format!(
                    "ansatz `{}` has min eigenvalue {min_eig:.6e} <= 0 on the sampled range",
                    self.name
                ),
            });
        }
        let bound = (1.0 + (n as f64 - 1.0) * max_eig * max_eig).sqrt();
        let a = Arc::clone(&self.a);
        CoefficientField::from_fn(
            self.name.clone(),
            n,
            1,
            min_eig,
            bound,
            move |x: &[f64], out: &mut [f64]| {
                let r2 = x.iter().map(|c| c * c).sum::<f64>();
                let r = r2.sqrt().max(RADIAL_CLAMP);
                let av = a(r);
                let n = x.len();
                for al in 0..n {
                    for be in 0..n {
                        let delta = if al == be { 1.0 } else { 0.0 };
                        let proj = x[al] * x[be] / (r * r);
                        out[al * n + be] = delta + av * (delta - proj);
                    }
                }
            },
        )
    }

    /// Induced solution field `u(x) = x¹ v(|x|)` with `u(0) = 0` (the radial
    /// limit: the vanishing factor `x¹` dominates the logarithmic growth of
    /// `v`). The gradient is closed-form when `v_deriv` is available:
    /// `∂_β u = δ^{1β} v(r) + x¹ x^β v′(r)/r`.
    pub fn solution_field(&self, n: usize, gradient_sup: Option<f64>) -> Result<VectorSolutionField> {
        let v = Arc::clone(&self.v);
        let name = format!("{}-u", self.name);
        let mut field = VectorSolutionField::from_fn(name, n, 1, {
            let v = Arc::clone(&v);
            move |x: &[f64], out: &mut [f64]| {
                let r = frob(x);
                out[0] = if r == 0.0 { 0.0 } else { x[0] * v(r.max(RADIAL_CLAMP)) };
            }
        })?;
        if let Some(vp) = &self.v_deriv {
            let vp = Arc::clone(vp);
            field = field.with_gradient(move |x: &[f64], out: &mut [f64]| {
                let n = x.len();
                let r = frob(x).max(RADIAL_CLAMP);
                let vv = v(r);
                let dv = vp(r);
                for be in 0..n {
                    let delta = if be == 0 { 1.0 } else { 0.0 };
                    out[be] = delta * vv + x[0] * x[be] * dv / r;
                }
            });
        }
        if let Some(b) = gradient_sup {
            field = field.with_gradient_sup(b);
        }
        Ok(field)
    }
}

impl std::fmt::Debug for RadialAnsatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialAnsatz")
            .field("name", &self.name)
            .field("closed_form_derivatives", &self.v_deriv2.is_some())
            .finish()
    }
}

/// Evaluates the radial residual
/// `v″(r) + (n+1) v′(r)/r − (n−1) a(r) v(r)/r²`.
///
/// A vanishing residual certifies that `u = x¹ v(|x|)` solves the
/// divergence-form system for the induced coefficient. Uses closed-form
/// derivatives when the ansatz carries them, otherwise 4th-order central
/// differences with step `h = 1e-3·r`.
pub fn radial_residual(ansatz: &RadialAnsatz, r: f64, n: usize) -> Result<f64> {
    if !(r > 0.0 && r <= 4.0) {
        return Err(CoreError::InvalidArgument(format!(
            "radial residual needs r in (0, 4], got {r}"
        )));
    }
    if r < RADIAL_CLAMP {
        return Err(CoreError::Domain(format!(
            "radius {r:.3e} underflows the iterated-logarithm chain"
        )));
    }
    let (vp, vpp) = match (&ansatz.v_deriv, &ansatz.v_deriv2) {
        (Some(d1), Some(d2)) => (d1(r), d2(r)),
        _ => {
            let h = 1e-3 * r;
            let f = |t: f64| (ansatz.v)(t);
            let d1 = (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h))
                / (12.0 * h);
            let d2 = (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r) + 16.0 * f(r - h)
                - f(r - 2.0 * h))
                / (12.0 * h * h);
            (d1, d2)
        }
    };
    let nf = n as f64;
    Ok(vpp + (nf + 1.0) * vp / r - (nf - 1.0) * (ansatz.a)(r) * (ansatz.v)(r) / (r * r))
}

/// The blow-up example: `v = ln ln(64/r)` with
/// `a(r) = −(1 + n·L)/((n−1)·L²·K)`, `L = ln(64/r)`, `K = ln L`.
///
/// Solves the system exactly: `v″ + (n+1)v′/r = −(1+nL)/(r²L²) = (n−1)a v/r²`.
pub fn prop_c1_ansatz(n: usize) -> RadialAnsatz {
    let nf = n as f64;
    RadialAnsatz {
        name: "prop-c1".into(),
        a: Arc::new(move |r| {
            let l = ln1(r);
            -(1.0 + nf * l) / ((nf - 1.0) * l * l * ln2(r))
        }),
        v: Arc::new(ln2),
        a_deriv: None,
        v_deriv: Some(Arc::new(|r| -1.0 / (r * ln1(r)))),
        v_deriv2: Some(Arc::new(|r| {
            let l = ln1(r);
            (l - 1.0) / (r * r * l * l)
        })),
    }
}

/// Which reading of the oscillating example's coefficient to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropC2Variant {
    /// Numerator `sin M + cos M·(1 + L + nLK)`, denominator factor
    /// `(2 + sin K)` — the double-log reading.
    DoubleLog,
    /// Numerator `sin M + cos M·(1 + K + nLK)`, denominator factor
    /// `(2 + sin M) = v(r)` — the triple-log reading, consistent with the
    /// radial residual identity.
    TripleLog,
}

/// The bounded-oscillation example: `v = 2 + sin ln ln ln(64/r)` with one of
/// two candidate coefficients (see [`PropC2Variant`]). Exactly one variant
/// makes [`radial_residual`] vanish; run both through the checker to select.
pub fn prop_c2_ansatz(n: usize, variant: PropC2Variant) -> RadialAnsatz {
    let nf = n as f64;
    let a: RadialFn = match variant {
        PropC2Variant::DoubleLog => Arc::new(move |r| {
            let (l, k, m) = (ln1(r), ln2(r), ln3(r));
            -(m.sin() + m.cos() * (1.0 + l + nf * l * k))
                / ((nf - 1.0) * l * l * k * k * (2.0 + k.sin()))
        }),
        PropC2Variant::TripleLog => Arc::new(move |r| {
            let (l, k, m) = (ln1(r), ln2(r), ln3(r));
            -(m.sin() + m.cos() * (1.0 + k + nf * l * k))
                / ((nf - 1.0) * l * l * k * k * (2.0 + m.sin()))
        }),
    };
    RadialAnsatz {
        name: match variant {
            PropC2Variant::DoubleLog => "prop-c2-double-log".into(),
            PropC2Variant::TripleLog => "prop-c2-triple-log".into(),
        },
        a,
        v: Arc::new(|r| 2.0 + ln3(r).sin()),
        a_deriv: None,
        v_deriv: Some(Arc::new(|r| -ln3(r).cos() / (r * ln1(r) * ln2(r)))),
        v_deriv2: Some(Arc::new(|r| {
            let (l, k, m) = (ln1(r), ln2(r), ln3(r));
            (-m.sin() + m.cos() * (l * k - k - 1.0)) / (r * r * l * l * k * k)
        })),
    }
}

/// Named example fields addressable from the command line.
#[derive(Debug, Clone)]
pub enum ExampleName {
    /// Radial pair with `∇u ∉ L^∞` but gradient oscillation decaying to 0.
    PropC1,
    /// Oscillating radial pair, coefficient read with the double-log
    /// denominator (does not solve the system; kept for disambiguation).
    PropC2DoubleLog,
    /// Oscillating radial pair, residual-consistent coefficient.
    PropC2TripleLog,
    /// Scalar coefficient `A = (2 + sin ln ln ln(64/|x|)) δ_{ij} δ^{αβ}` —
    /// discontinuous at the origin yet with vanishing mean oscillation.
    SinLogLogLog,
    /// `A = Id`.
    ConstantIdentity,
    /// `A = (1 + F(|x|))·Id` with `F(r) = ∫_r^2 m(t)/t dt`, so the field's
    /// oscillation at scale `t` tracks the prescribed modulus `m(t)` up to a
    /// bounded factor.
    Synthetic(Modulus),
}

impl ExampleName {
    /// Parses a CLI name. Accepted (case-insensitive): `prop-c1`,
    /// `prop-c2-double-log`, `prop-c2-triple-log`, `prop-c2` (alias for the
    /// residual-consistent variant), `sin-log-log-log`, `constant-identity`,
    /// `synthetic:<modulus-spec>`.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let canon: String = lower.chars().filter(|c| *c != '-' && *c != '_').collect();
        if let Some(rest) = lower.strip_prefix("synthetic:") {
            let spec = crate::modulus::ModulusSpec::parse(rest)?;
            return Ok(ExampleName::Synthetic(spec.to_closed_form()?));
        }
        match canon.as_str() {
            "propc1" => Ok(ExampleName::PropC1),
            "propc2doublelog" => Ok(ExampleName::PropC2DoubleLog),
            "propc2triplelog" | "propc2" => Ok(ExampleName::PropC2TripleLog),
            "sinlogloglog" => Ok(ExampleName::SinLogLogLog),
            "constantidentity" | "identity" => Ok(ExampleName::ConstantIdentity),
            other => Err(CoreError::Parse(format!(
                "unknown example `{other}` (expected prop-c1, prop-c2-double-log, \
                 prop-c2-triple-log, sin-log-log-log, constant-identity, synthetic:<spec>)"
            ))),
        }
    }

    /// The radial ansatz behind the example, when it has one.
    pub fn ansatz(&self, n: usize) -> Option<RadialAnsatz> {
        match self {
            ExampleName::PropC1 => Some(prop_c1_ansatz(n)),
            ExampleName::PropC2DoubleLog => Some(prop_c2_ansatz(n, PropC2Variant::DoubleLog)),
            ExampleName::PropC2TripleLog => Some(prop_c2_ansatz(n, PropC2Variant::TripleLog)),
            _ => None,
        }
    }
}

/// Certified closed-form bound for the ansatz gradient:
/// `|∇u| ≤ |v(r)| + r|v′(r)|` pointwise, maximized over a log grid.
fn ansatz_gradient_sup(ansatz: &RadialAnsatz) -> Option<f64> {
    let vp = ansatz.v_deriv.as_ref()?;
    let mut sup = 0.0f64;
    for i in 0..4096 {
        let t = i as f64 / 4095.0;
        let r = 1e-12f64 * (4.0f64 / 1e-12).powf(t);
        sup = sup.max((ansatz.v)(r).abs() + r * vp(r).abs());
    }
    Some(sup * 1.02)
}

/// Builds a named example: the coefficient field and, when the example ships
/// one, the companion solution field.
pub fn make_example(
    name: &ExampleName,
    n: usize,
) -> Result<(CoefficientField, Option<VectorSolutionField>)> {
    match name {
        ExampleName::PropC1 => {
            let ansatz = prop_c1_ansatz(n);
            let coeff = ansatz.coefficient_field(n)?;
            // v = ln ln(64/r) is unbounded toward the origin: no finite
            // gradient bound exists, and none is declared.
            let u = ansatz.solution_field(n, None)?;
            Ok((coeff, Some(u)))
        }
        ExampleName::PropC2DoubleLog | ExampleName::PropC2TripleLog => {
            let variant = match name {
                ExampleName::PropC2DoubleLog => PropC2Variant::DoubleLog,
                _ => PropC2Variant::TripleLog,
            };
            let ansatz = prop_c2_ansatz(n, variant);
            let coeff = ansatz.coefficient_field(n)?;
            let sup = ansatz_gradient_sup(&ansatz);
            let u = ansatz.solution_field(n, sup)?;
            Ok((coeff, Some(u)))
        }
        ExampleName::SinLogLogLog => {
            let coeff = CoefficientField::from_fn(
                "sin-log-log-log",
                n,
                1,
                1.0,
                3.0 * (n as f64).sqrt(),
                move |x: &[f64], out: &mut [f64]| {
                    let r = frob(x).max(RADIAL_CLAMP);
                    let s = 2.0 + ln3(r).sin();
                    let n = x.len();
                    for al in 0..n {
                        for be in 0..n {
                            out[al * n + be] = if al == be { s } else { 0.0 };
                        }
                    }
                },
            )?;
            Ok((coeff, None))
        }
        ExampleName::ConstantIdentity => {
            let coeff = CoefficientField::from_fn(
                "constant-identity",
                n,
                1,
                1.0,
                (n as f64).sqrt(),
                move |x: &[f64], out: &mut [f64]| {
                    let n = x.len();
                    for al in 0..n {
                        for be in 0..n {
                            out[al * n + be] = if al == be { 1.0 } else { 0.0 };
                        }
                    }
                },
            )?;
            Ok((coeff, None))
        }
        ExampleName::Synthetic(modulus) => Ok((synthetic_field(modulus, n)?, None)),
    }
}

/// `A = (1 + F(|x|))·Id` with `F(r) = ∫_r^2 m(t)/t dt` (zero for `r ≥ 2`).
///
/// `|F(x) − F(y)| ≈ m(t)·ln 2` at separation scale `t`, so the field's mean
/// oscillation tracks the prescribed modulus up to a bounded factor. `F` is
/// precomputed on a log grid and interpolated linearly in `ln r`.
fn synthetic_field(modulus: &Modulus, n: usize) -> Result<CoefficientField> {
    const KNOTS: usize = 2048;
    const R_FLOOR: f64 = 1e-9;
    let mut grid = Vec::with_capacity(KNOTS);
    for i in 0..KNOTS {
        let t = i as f64 / (KNOTS - 1) as f64;
        grid.push(R_FLOOR * (2.0 / R_FLOOR).powf(t));
    }
    // Accumulate F from the outer endpoint inward, one segment at a time.
    let mut f_vals = vec![0.0f64; KNOTS];
    for i in (0..KNOTS - 1).rev() {
        f_vals[i] = f_vals[i + 1] + dini_integral(modulus, grid[i], grid[i + 1])?;
    }
    let f_max = f_vals[0];
    let lo = grid[0].ln();
    let hi = grid[KNOTS - 1].ln();
    let step = (hi - lo) / (KNOTS - 1) as f64;
    let interp = move |r: f64| -> f64 {
        if r >= 2.0 {
            return 0.0;
        }
        if r <= R_FLOOR {
            return f_max;
        }
        let pos = (r.ln() - lo) / step;
        let i = (pos.floor() as usize).min(KNOTS - 2);
        let w = pos - i as f64;
        f_vals[i] * (1.0 - w) + w * f_vals[i + 1]
    };
    CoefficientField::from_fn(
        "synthetic",
        n,
        1,
        1.0,
        (1.0 + f_max) * (n as f64).sqrt(),
        move |x: &[f64], out: &mut [f64]| {
            let s = 1.0 + interp(frob(x));
            let n = x.len();
            for al in 0..n {
                for be in 0..n {
                    out[al * n + be] = if al == be { s } else { 0.0 };
                }
            }
        },
    )
}

/// Outcome of the boundedness/coercivity audit of a coefficient field.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EllipticityReport {
    /// Largest sampled Frobenius norm and where it occurred.
    pub max_norm: f64,
    pub max_norm_point: Vec<f64>,
    /// Smallest sampled Rayleigh ratio `∫A∂φ∂φ / ∫|∇φ|²` over the bump family.
    pub min_form_ratio: f64,
    pub samples_used: usize,
    pub test_functions_used: usize,
    /// Sampled points whose norm exceeds the declared bound.
    pub bound_violations: Vec<(Vec<f64>, f64)>,
    /// True iff no sampled point exceeds the declared bound.
    pub bound_ok: bool,
    /// True iff the sampled form ratio stays above the declared coercivity
    /// constant (within a 1e-6 relative quadrature slack).
    pub coercivity_ok: bool,
}

/// Audits `|A| ≤ Λ` pointwise and integral coercivity
/// `∫ A ∂φ ∂φ ≥ λ ∫ |∇φ|²` against a seeded family of smooth bump test
/// functions supported in balls inside `B_4`.
pub fn check_bounded_elliptic(
    field: &CoefficientField,
    samples: usize,
    test_functions: usize,
    seed: u64,
) -> Result<EllipticityReport> {
    if samples < 1 || test_functions < 1 {
        return Err(CoreError::InvalidArgument(
            "need at least one sample and one test function".into(),
        ));
    }
    let n = field.n();
    let big_n = field.components();

    // Pointwise norm audit over a low-discrepancy cloud filling B_4.
    let cloud = QuadratureRule {
        kind: RuleKind::LowDiscrepancy,
        points: samples,
        seed,
    }
    .ball_rule(&vec![0.0; n], 4.0 * (1.0 - 1e-9))?;
    let mut buf = vec![0.0; field.tensor_len()];
    let mut max_norm = f64::NEG_INFINITY;
    let mut max_point = vec![0.0; n];
    let mut violations = Vec::new();
    for (x, _) in cloud.iter() {
        field.eval_into(x, &mut buf);
        let norm = frob(&buf);
        if norm > max_norm {
            max_norm = norm;
            max_point.copy_from_slice(x);
        }
        if norm > field.bound() * (1.0 + 1e-9) && violations.len() < 8 {
            violations.push((x.to_vec(), norm));
        }
    }

    // Coercivity audit: smooth vector bumps φ(x) = c·cos²(π|x−z|/(2ρ)).
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut min_ratio = f64::INFINITY;
    let mut grad_phi = vec![0.0; big_n * n];
    for _ in 0..test_functions {
        let rho: f64 = rng.gen_range(0.5..1.5);
        let z: Vec<f64> = loop {
            let cand: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if frob(&cand) <= 2.0 {
                break cand;
            }
        };
        let mut c: Vec<f64> = (0..big_n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cn = frob(&c);
        if cn == 0.0 {
            c[0] = 1.0;
        } else {
            c.iter_mut().for_each(|v| *v /= cn);
        }
        let support = QuadratureRule {
            kind: RuleKind::LowDiscrepancy,
            points: 2048,
            seed: rng.gen(),
        }
        .ball_rule(&z, rho)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, w) in support.iter() {
            let dist2: f64 = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            let dist = dist2.sqrt();
            if dist >= rho || dist < 1e-14 {
                continue;
            }
            let t = dist / rho;
            let arg = std::f64::consts::FRAC_PI_2 * t;
            // d/dt cos²(πt/2) = −(π/2)·sin(πt).
            let dpsi = -std::f64::consts::FRAC_PI_2 * (2.0 * arg).sin() / rho;
            for i in 0..big_n {
                for al in 0..n {
                    grad_phi[i * n + al] = c[i] * dpsi * (x[al] - z[al]) / dist;
                }
            }
            field.eval_into(x, &mut buf);
            let mut form = 0.0;
            for i in 0..big_n {
                for al in 0..n {
                    for j in 0..big_n {
                        for be in 0..n {
                            form += buf[((i * n + al) * big_n + j) * n + be]
                                * grad_phi[i * n + al]
                                * grad_phi[j * n + be];
                        }
                    }
                }
            }
            num += w * form;
            den += w * grad_phi.iter().map(|g| g * g).sum::<f64>();
        }
        if den > 0.0 {
            min_ratio = min_ratio.min(num / den);
        }
    }

    Ok(EllipticityReport {
        max_norm,
        max_norm_point: max_point,
        min_form_ratio: min_ratio,
        samples_used: cloud.len(),
        test_functions_used: test_functions,
        bound_ok: violations.is_empty(),
        coercivity_ok: min_ratio >= field.ellipticity() * (1.0 - 1e-6),
        bound_violations: violations,
    })
}
