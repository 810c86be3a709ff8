//! Mean-oscillation functionals of sampled fields.
//!
//! For a tensor field `A` and ball `B_r(x) ⊆ B_4` the basic quantity is the
//! `L^p` mean oscillation
//!
//! ```text
//! ( |B_r|⁻¹ ∫_{B_r(x)} |A − (A)_{B_r(x)}|^p )^{1/p},
//! ```
//!
//! maximized over centers `x ∈ B_2` to form the modulus profile
//! `ω_{A,p}(r)`. Two stronger variants are also profiled: the uniform pair
//! modulus (sup of `|A(x) − A(y)|` over sampled pairs at distance `< r`) and
//! the pointwise-center `L²` modulus (center value replaces the ball
//! average). Any finite center scan yields a certified *lower* bound for the
//! true sup, so every profile records its estimator.
//!
//! Profiles double as tabulated moduli (log-linear in `r`), feeding the
//! integral functionals in [`crate::dini`].

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fields::{frob, GradientField, Point, SampledField, VectorSolutionField};
use crate::modulus::Modulus;
use crate::quadrature::{BallQuadrature, QuadratureRule, RuleKind};

/// Nodes closer to the origin than this are excluded from ball quadratures:
/// the shipped examples have their (integrable) singularities exactly there.
/// The excluded set has measure zero, so averages are unaffected in the
/// limit; weight renormalization keeps constants exact at finite resolution.
pub const ORIGIN_EXCLUSION: f64 = 1e-12;

/// A ball `B_radius(center)` that must fit inside the domain `B_4`.
#[derive(Debug, Clone)]
pub struct BallSpec {
    center: Point,
    radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.norm() + radius > 4.0 * (1.0 + 1e-12) {
            return Err(CoreError::Domain(format!(
                "ball B_{radius}({:?}) exits the domain B_4",
                center.coords()
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn origin(dim: usize, radius: f64) -> Result<Self> {
        Self::new(Point::origin(dim), radius)
    }

    pub fn center(&self) -> &[f64] {
        self.center.coords()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// How profile operations approximate the sup over centers `x ∈ B_2`.
#[derive(Debug, Clone)]
pub enum CenterStrategy {
    /// Deterministic lattice of centers in `B_2` with spacing
    /// `spacing_factor · r`, subsampled to at most `max_centers` per radius
    /// (plus the origin, which is always scanned).
    SupOverCenters {
        spacing_factor: f64,
        max_centers: usize,
    },
    /// Only the origin-centered ball (exact for radially structured fields).
    OriginOnly,
}

impl Default for CenterStrategy {
    fn default() -> Self {
        CenterStrategy::SupOverCenters {
            spacing_factor: 0.5,
            max_centers: 512,
        }
    }
}

/// Estimator provenance recorded next to profile values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    SupOverCenters,
    OriginOnly,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Estimator::SupOverCenters => write!(f, "supOverCenters"),
            Estimator::OriginOnly => write!(f, "originOnly"),
        }
    }
}

/// Which strengthened modulus [`sup_modulus`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupModulusKind {
    /// `sup |A(x) − A(y)|` over sampled pairs with `|x − y| < r`.
    Uniform,
    /// `sup_x (|B_r|⁻¹ ∫_{B_r(x)} |A(y) − A(x)|² dy)^{1/2}` — the center
    /// value, not the ball average, is subtracted.
    PointwiseL2,
}

/// A measured modulus: oscillation values along a decreasing radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct OscillationProfile {
    p: f64,
    radii: Vec<f64>,
    values: Vec<f64>,
    centers_tried: usize,
    estimator: Estimator,
    doubling_constant: f64,
    perturbed_nodes: usize,
}

impl OscillationProfile {
    fn from_parts(
        p: f64,
        radii: Vec<f64>,
        values: Vec<f64>,
        centers_tried: usize,
        estimator: Estimator,
        perturbed_nodes: usize,
    ) -> Result<Self> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(CoreError::InvalidArgument(
                "profile needs matching non-empty radius/value lists".into(),
            ));
        }
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(CoreError::InvalidArgument(
                "profile radii must be strictly decreasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CoreError::NonFiniteSample(
                "profile contains a non-finite or negative value".into(),
            ));
        }
        let doubling_constant = doubling_constant(&radii, &values);
        Ok(Self {
            p,
            radii,
            values,
            centers_tried,
            estimator,
            doubling_constant,
            perturbed_nodes,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest per-radius center count scanned.
    pub fn centers_tried(&self) -> usize {
        self.centers_tried
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    /// Smallest `C` with `value(t) ≤ C · value(s)` over all represented
    /// pairs `t ≤ s ≤ 4t`; `+∞` when a zero blocks the certificate.
    pub fn doubling_constant(&self) -> f64 {
        self.doubling_constant
    }

    /// Number of quadrature nodes that needed the singular-sample nudge.
    pub fn perturbed_nodes(&self) -> usize {
        self.perturbed_nodes
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().cloned().zip(self.values.iter().cloned())
    }

    /// Reinterprets the profile as a tabulated modulus (log-linear in `r`),
    /// ready for the Dini/X functionals.
    pub fn as_modulus(&self) -> Result<Modulus> {
        Modulus::tabulated(self.pairs().collect())
    }
}

fn doubling_constant(radii: &[f64], values: &[f64]) -> f64 {
    let mut c: f64 = 1.0;
    for i in 0..radii.len() {
        for j in (i + 1)..radii.len() {
            // radii decreasing: t = radii[j] ≤ s = radii[i].
            if radii[i] <= 4.0 * radii[j] {
                let (vt, vs) = (values[j], values[i]);
                if vs > 0.0 {
                    c = c.max(vt / vs);
                } else if vt > 0.0 {
                    return f64::INFINITY;
                }
            }
        }
    }
    c
}

/// Gradient oscillation summary: the profile plus BMO/VMO diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct GradientOscillationReport {
    pub profile: OscillationProfile,
    /// Max of the profile — the sampled BMO seminorm of `∇u`.
    pub bmo_seminorm: f64,
    /// True when the tail of the profile decays (sampled VMO behaviour):
    /// tail non-increasing and final value `≤ 0.8 ×` the first.
    pub vmo_trend: bool,
}

/// Default per-ball quadrature: `max(256, 64/r)` points, capped at `2¹⁶`,
/// product-polar kind (deterministic, no seed dependence).
pub fn auto_rule(radius: f64) -> QuadratureRule {
    let points = (64.0 / radius).ceil().max(256.0).min(65536.0) as usize;
    QuadratureRule {
        kind: RuleKind::ProductPolar,
        points,
        seed: 0,
    }
}

fn resolve_rule(rule: Option<&QuadratureRule>, radius: f64) -> QuadratureRule {
    match rule {
        Some(r) => r.clone(),
        None => auto_rule(radius),
    }
}

/// Evaluates the field at a node, nudging once off a singular sample.
fn eval_guarded(
    field: &dyn SampledField,
    x: &[f64],
    out: &mut [f64],
    perturbed: &AtomicUsize,
) -> Result<()> {
    field.eval_into(x, out);
    if out.iter().all(|v| v.is_finite()) {
        return Ok(());
    }
    let mut nudged = x.to_vec();
    nudged[0] += 1e-10;
    field.eval_into(&nudged, out);
    perturbed.fetch_add(1, Ordering::Relaxed);
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CoreError::NonFiniteSample(format!(
            "field `{}` non-finite at {x:?} even after nudge",
            field.label()
        )))
    }
}

/// Weighted average over the quadrature, excluding near-origin nodes and
/// renormalizing by the included weight.
fn average_on(
    field: &dyn SampledField,
    quad: &BallQuadrature,
    perturbed: &AtomicUsize,
) -> Result<(Vec<f64>, f64)> {
    let mut acc = vec![0.0; field.output_len()];
    let mut buf = vec![0.0; field.output_len()];
    let mut wsum = 0.0;
    for (x, w) in quad.iter() {
        if frob(x) < ORIGIN_EXCLUSION {
            continue;
        }
        eval_guarded(field, x, &mut buf, perturbed)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += w * b;
        }
        wsum += w;
    }
    if wsum <= 0.0 {
        return Err(CoreError::Quadrature(
            "no usable quadrature nodes in ball".into(),
        ));
    }
    for a in &mut acc {
        *a /= wsum;
    }
    Ok((acc, wsum))
}

/// `p`-th root of the weighted `p`-moment of `|field − reference|` over the
/// quadrature (Frobenius norm across components).
fn p_moment_about(
    field: &dyn SampledField,
    quad: &BallQuadrature,
    reference: &[f64],
    p: f64,
    perturbed: &AtomicUsize,
) -> Result<f64> {
    let mut buf = vec![0.0; field.output_len()];
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for (x, w) in quad.iter() {
        if frob(x) < ORIGIN_EXCLUSION {
            continue;
        }
        eval_guarded(field, x, &mut buf, perturbed)?;
        let dev2: f64 = buf
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        acc += w * dev2.sqrt().powf(p);
        wsum += w;
    }
    if wsum <= 0.0 {
        return Err(CoreError::Quadrature(
            "no usable quadrature nodes in ball".into(),
        ));
    }
    Ok((acc / wsum).powf(1.0 / p))
}

/// `|B_r(x)|⁻¹ ∫_{B_r(x)} field` by ball quadrature.
pub fn ball_average(
    field: &dyn SampledField,
    ball: &BallSpec,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let quad = rule.ball_rule(ball.center(), ball.radius())?;
    let counter = AtomicUsize::new(0);
    Ok(average_on(field, &quad, &counter)?.0)
}

/// `( |B_r|⁻¹ ∫_{B_r(x)} |field − (field)_{B_r(x)}|^p )^{1/p}`.
pub fn mean_oscillation_at(
    field: &dyn SampledField,
    ball: &BallSpec,
    p: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "oscillation exponent p must be >= 1, got {p}"
        )));
    }
    let quad = rule.ball_rule(ball.center(), ball.radius())?;
    let counter = AtomicUsize::new(0);
    let (avg, _) = average_on(field, &quad, &counter)?;
    p_moment_about(field, &quad, &avg, p, &counter)
}

/// Deterministic lattice of ball centers inside `B_2`, spacing `d`,
/// index-space strided down to `max_centers`, origin always first.
fn center_grid(n: usize, spacing: f64, max_centers: usize) -> Vec<Vec<f64>> {
    let d = spacing.max(1e-9);
    let per_axis = ((4.0 / d).floor() as u128 + 1).max(2);
    let total: u128 = per_axis.saturating_pow(n as u32);
    let want = max_centers.max(1) as u128;
    let stride = total.div_ceil(want).max(1);
    let mut centers = vec![vec![0.0; n]];
    let mut idx: u128 = 0;
    while idx < total && centers.len() <= max_centers {
        let mut rem = idx;
        let mut z = vec![0.0; n];
        for zi in z.iter_mut() {
            let k = (rem % per_axis) as f64;
            rem /= per_axis;
            *zi = -2.0 + k * d;
        }
        if frob(&z) <= 2.0 && frob(&z) > 0.0 {
            centers.push(z);
        }
        idx += stride;
    }
    centers
}

fn strategy_centers(n: usize, radius: f64, strategy: &CenterStrategy) -> (Vec<Vec<f64>>, Estimator) {
    match strategy {
        CenterStrategy::OriginOnly => (vec![vec![0.0; n]], Estimator::OriginOnly),
        CenterStrategy::SupOverCenters {
            spacing_factor,
            max_centers,
        } => (
            center_grid(n, spacing_factor * radius, *max_centers),
            Estimator::SupOverCenters,
        ),
    }
}

fn profile_over_centers<F>(
    n: usize,
    radii: &[f64],
    strategy: &CenterStrategy,
    p: f64,
    per_ball: F,
) -> Result<OscillationProfile>
where
    F: Fn(&[f64], f64, &AtomicUsize) -> Result<f64> + Sync,
{
    if radii.is_empty() {
        return Err(CoreError::InvalidArgument("empty radius list".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= 2.0)) {
        return Err(CoreError::InvalidArgument(
            "profile radii must lie in (0, 2]".into(),
        ));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();

    let perturbed = AtomicUsize::new(0);
    let mut values = Vec::with_capacity(sorted.len());
    let mut max_centers_used = 0usize;
    for &r in &sorted {
        let (centers, _) = strategy_centers(n, r, strategy);
        max_centers_used = max_centers_used.max(centers.len());
        let value = centers
            .par_iter()
            .map(|z| per_ball(z, r, &perturbed))
            .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
        values.push(value);
    }
    let estimator = match strategy {
        CenterStrategy::OriginOnly => Estimator::OriginOnly,
        _ => Estimator::SupOverCenters,
    };
    OscillationProfile::from_parts(
        p,
        sorted,
        values,
        max_centers_used,
        estimator,
        perturbed.load(Ordering::Relaxed),
    )
}

/// Profile of `ω_{field,p}(r)`: sup over tried centers of the `L^p` mean
/// oscillation on `B_r`, for each radius.
pub fn modulus_profile(
    field: &dyn SampledField,
    radii: &[f64],
    p: f64,
    strategy: &CenterStrategy,
    rule: Option<&QuadratureRule>,
) -> Result<OscillationProfile> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "oscillation exponent p must be >= 1, got {p}"
        )));
    }
    profile_over_centers(field.dim(), radii, strategy, p, |z, r, counter| {
        let quad = resolve_rule(rule, r).ball_rule(z, r)?;
        let (avg, _) = average_on(field, &quad, counter)?;
        p_moment_about(field, &quad, &avg, p, counter)
    })
}

/// Profile of a strengthened modulus: uniform pair sup or pointwise-center
/// `L²` (see [`SupModulusKind`]). Center scan and per-ball quadrature match
/// [`modulus_profile`]'s, so the ordering `ω_{A,2} ≤ φ̄_A` holds exactly on
/// the sampled data.
pub fn sup_modulus(
    field: &dyn SampledField,
    radii: &[f64],
    kind: SupModulusKind,
    rule: Option<&QuadratureRule>,
) -> Result<OscillationProfile> {
    let strategy = CenterStrategy::default();
    let p = 2.0;
    profile_over_centers(field.dim(), radii, &strategy, p, |z, r, counter| {
        let quad = resolve_rule(rule, r).ball_rule(z, r)?;
        let mut center_val = vec![0.0; field.output_len()];
        eval_guarded(field, z, &mut center_val, counter)?;
        match kind {
            SupModulusKind::PointwiseL2 => {
                p_moment_about(field, &quad, &center_val, 2.0, counter)
            }
            SupModulusKind::Uniform => {
                let mut buf = vec![0.0; field.output_len()];
                let mut sup = 0.0f64;
                for (x, _) in quad.iter() {
                    if frob(x) < ORIGIN_EXCLUSION {
                        continue;
                    }
                    eval_guarded(field, x, &mut buf, counter)?;
                    let dev2: f64 = buf
                        .iter()
                        .zip(&center_val)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    sup = sup.max(dev2.sqrt());
                }
                Ok(sup)
            }
        }
    })
}

/// True when the profile tail decays: tail (last `max(3, ⌈len/3⌉)` entries)
/// non-increasing within slack, and final value `≤ 0.8 ×` the first.
fn decaying_trend(values: &[f64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let tail_len = values.len().div_ceil(3).max(3).min(values.len());
    let tail = &values[values.len() - tail_len..];
    let non_increasing = tail
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    non_increasing && values[values.len() - 1] <= 0.8 * values[0] + 1e-12
}

/// Oscillation profile of `∇u` with BMO seminorm (profile max) and sampled
/// VMO trend flag.
pub fn gradient_oscillation_profile(
    u: &VectorSolutionField,
    radii: &[f64],
    p: f64,
    strategy: &CenterStrategy,
    rule: Option<&QuadratureRule>,
) -> Result<GradientOscillationReport> {
    let grad = GradientField::new(u);
    let profile = modulus_profile(&grad, radii, p, strategy, rule)?;
    let bmo = profile
        .values()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let vmo = decaying_trend(profile.values());
    Ok(GradientOscillationReport {
        bmo_seminorm: bmo,
        vmo_trend: vmo,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::CoefficientField;
    use approx::assert_relative_eq;

    fn constant_field(c: f64) -> CoefficientField {
        CoefficientField::from_fn("const", 2, 1, 1.0, 2.0 * c.abs().max(1.0), move |_, out| {
            out.copy_from_slice(&[c, 0.0, 0.0, c]);
        })
        .unwrap()
    }

    struct Coord1;
    impl SampledField for Coord1 {
        fn dim(&self) -> usize {
            2
        }
        fn output_len(&self) -> usize {
            1
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0];
        }
        fn label(&self) -> &str {
            "x1"
        }
    }

    struct NormSquared;
    impl SampledField for NormSquared {
        fn dim(&self) -> usize {
            2
        }
        fn output_len(&self) -> usize {
            1
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] * x[0] + x[1] * x[1];
        }
        fn label(&self) -> &str {
            "norm2"
        }
    }

    #[test]
    fn average_of_constant_is_exact() {
        let f = constant_field(3.25);
        let ball = BallSpec::origin(2, 0.5).unwrap();
        let avg = ball_average(&f, &ball, &auto_rule(0.5)).unwrap();
        assert_relative_eq!(avg[0], 3.25, max_relative = 1e-12);
        assert_relative_eq!(avg[3], 3.25, max_relative = 1e-12);
        assert_relative_eq!(avg[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn average_of_odd_field_vanishes() {
        let ball = BallSpec::origin(2, 1.0).unwrap();
        let avg = ball_average(&Coord1, &ball, &auto_rule(1.0)).unwrap();
        assert!(avg[0].abs() < 1e-12, "got {}", avg[0]);
    }

    #[test]
    fn average_of_norm_squared_matches_polar_integral() {
        let r = 0.75;
        let ball = BallSpec::origin(2, r).unwrap();
        let avg = ball_average(&NormSquared, &ball, &auto_rule(r)).unwrap();
        assert_relative_eq!(avg[0], r * r / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn oscillation_of_coordinate_matches_closed_form() {
        // ⨍_{B_r} |x¹| = 4r/(3π) and the average of x¹ is 0. The integrand
        // has angular kinks, so midpoint-in-angle converges at 2nd order:
        // 256 angles put the error near 2e-5.
        let r = 1.0;
        let ball = BallSpec::origin(2, r).unwrap();
        let rich = QuadratureRule {
            kind: RuleKind::ProductPolar,
            points: 65536,
            seed: 0,
        };
        let v = mean_oscillation_at(&Coord1, &ball, 1.0, &rich).unwrap();
        assert_relative_eq!(v, 4.0 * r / (3.0 * std::f64::consts::PI), max_relative = 1e-4);
    }

    #[test]
    fn p_monotone_on_fixed_ball() {
        let ball = BallSpec::origin(2, 1.0).unwrap();
        let rule = auto_rule(1.0);
        let mut prev = 0.0;
        for &p in &[1.0, 1.5, 2.0, 4.0] {
            let v = mean_oscillation_at(&Coord1, &ball, p, &rule).unwrap();
            assert!(v >= prev * (1.0 - 1e-12), "p={p}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn constant_profiles_are_zero_with_unit_doubling() {
        let f = constant_field(1.0);
        let radii: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
        let prof = modulus_profile(&f, &radii, 2.0, &CenterStrategy::default(), None).unwrap();
        assert!(prof.values().iter().all(|&v| v == 0.0));
        assert_eq!(prof.doubling_constant(), 1.0);
        let sup = sup_modulus(&f, &radii, SupModulusKind::Uniform, None).unwrap();
        assert!(sup.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn profile_rejects_bad_radii() {
        let f = constant_field(1.0);
        assert!(modulus_profile(&f, &[], 2.0, &CenterStrategy::default(), None).is_err());
        assert!(modulus_profile(&f, &[3.0], 2.0, &CenterStrategy::default(), None).is_err());
        assert!(modulus_profile(&f, &[0.5], 0.5, &CenterStrategy::default(), None).is_err());
    }

    #[test]
    fn center_grid_is_bounded_and_deterministic() {
        let a = center_grid(2, 1e-6, 512);
        let b = center_grid(2, 1e-6, 512);
        assert_eq!(a.len(), b.len());
        assert!(a.len() <= 513);
        assert!(a.iter().zip(&b).all(|(x, y)| x == y));
        assert!(a.iter().all(|z| frob(z) <= 2.0));
        assert_eq!(a[0], vec![0.0, 0.0]);
    }

    #[test]
    fn doubling_detects_spike() {
        // value at t = 0.5 far above value at s = 1.0 with t ≤ s ≤ 4t.
        let c = doubling_constant(&[1.0, 0.5], &[0.1, 0.9]);
        assert_relative_eq!(c, 9.0, max_relative = 1e-12);
        assert_eq!(doubling_constant(&[1.0, 0.5], &[0.0, 0.5]), f64::INFINITY);
    }

    #[test]
    fn linear_solution_has_zero_gradient_oscillation() {
        let u = VectorSolutionField::from_fn("linear", 2, 1, |x, out| {
            out[0] = 3.0 * x[0] - 2.0 * x[1];
        })
        .unwrap()
        .with_gradient(|_, out| {
            out[0] = 3.0;
            out[1] = -2.0;
        });
        let radii: Vec<f64> = (2..=5).map(|k| 2f64.powi(-k)).collect();
        let report =
            gradient_oscillation_profile(&u, &radii, 2.0, &CenterStrategy::OriginOnly, None)
                .unwrap();
        assert!(report.profile.values().iter().all(|&v| v < 1e-12));
        assert!(report.bmo_seminorm < 1e-12);
    }
}
