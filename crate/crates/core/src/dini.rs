//! Integral functionals on oscillation moduli.
//!
//! Three related quantities, all integrated on the logarithmic scale
//! `s = ln(1/t)` (substitution `t = e^{−s}`, `dt/t = −ds`):
//!
//! * the Dini integral `∫_a^b ω(t)/t dt`,
//! * the weighted functional
//!   `X(C, r) = r·∫_r^R (ω(t)/t²)·exp(C·∫_t^R ω(s)/s ds) dt`, whose
//!   vanishing/finiteness as `r ↓ 0` separates VMO from BMO gradient
//!   behaviour,
//! * the probe `r·∫_r^δ t⁻²(ln 1/t)^{a−1} dt`, whose `a ⋚ 1` dichotomy the
//!   X classification mirrors.
//!
//! The X integrand spans hundreds of orders of magnitude, so the running
//! antiderivative is accumulated in shifted-exponent form: contributions are
//! tracked as `exp(M)·Ĵ` with a running maximum `M` of the log-integrand,
//! and overflow of the final value is reported as `+∞` rather than an error.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::modulus::Modulus;

/// Default log-grid resolution: quadrature nodes per unit of `ln(1/t)`.
pub const DEFAULT_LOG_DENSITY: f64 = 256.0;

/// Default radius sequence for limsup estimation: `4^{−k}`, `k = 4..=500`.
///
/// The deep tail (down to `4^{−500} ≈ 9·10⁻³⁰²`, still a normal double) is
/// needed because iterated-log moduli change trend only at astronomically
/// small radii; a shallow sequence misclassifies them.
pub fn default_radius_sequence() -> Vec<f64> {
    (4..=500).map(|k| 4f64.powi(-k)).collect()
}

fn check_modulus_sample(v: f64, t: f64) -> Result<f64> {
    if !v.is_finite() || v < 0.0 {
        return Err(CoreError::NonFiniteSample(format!(
            "modulus sample {v:?} at t = {t:.6e}"
        )));
    }
    Ok(v)
}

/// `∫_a^b ω(t)/t dt` at the default log-grid density.
pub fn dini_integral(omega: &Modulus, a: f64, b: f64) -> Result<f64> {
    dini_integral_with_density(omega, a, b, DEFAULT_LOG_DENSITY)
}

/// `∫_a^b ω(t)/t dt` via composite Simpson on `s = ln(1/t)` with a chosen
/// node density (nodes per unit of `s`).
pub fn dini_integral_with_density(omega: &Modulus, a: f64, b: f64, density: f64) -> Result<f64> {
    if !(a > 0.0 && b <= 2.0 * (1.0 + 1e-12) && a <= b) {
        return Err(CoreError::InvalidArgument(format!(
            "dini integral needs 0 < a <= b <= 2, got a={a:.3e}, b={b:.3e}"
        )));
    }
    if !(density > 0.0) {
        return Err(CoreError::InvalidArgument("density must be positive".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    // ∫_a^b ω(t)/t dt = ∫_{ln(1/b)}^{ln(1/a)} ω(e^{−s}) ds.
    let s_lo = (1.0 / b).ln();
    let s_hi = (1.0 / a).ln();
    let span = s_hi - s_lo;
    let mut intervals = ((span * density).ceil() as usize).max(32);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = span / intervals as f64;
    let f = |i: usize| -> Result<f64> {
        let t = (-(s_lo + i as f64 * h)).exp();
        check_modulus_sample(omega.eval(t), t)
    };
    let mut acc = f(0)? + f(intervals)?;
    for i in 1..intervals {
        acc += f(i)? * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(acc * h / 3.0)
}

/// `X(C, r) = r·∫_r^R (ω(t)/t²)·exp(C·∫_t^R ω(s)/s ds) dt`.
///
/// Both integrals run on one shared log grid in a single pass: the inner one
/// as a running antiderivative, the outer one as a cumulative shifted-
/// exponent Simpson sum. Overflow is reported as `+∞`.
pub fn x_functional(omega: &Modulus, c: f64, r: f64, big_r: f64) -> Result<f64> {
    Ok(x_values(omega, c, &[r], big_r, DEFAULT_LOG_DENSITY)?[0])
}

/// [`x_functional`] along a batch of radii sharing one grid (and one inner
/// antiderivative). Radii may be in any order; values are returned in the
/// input order.
pub fn x_values(
    omega: &Modulus,
    c: f64,
    radii: &[f64],
    big_r: f64,
    density: f64,
) -> Result<Vec<f64>> {
    if !(big_r > 0.0 && big_r <= 2.0 * (1.0 + 1e-12)) {
        return Err(CoreError::InvalidArgument(format!(
            "outer radius R must lie in (0, 2], got {big_r:.3e}"
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "weight parameter C must be finite and >= 0, got {c}"
        )));
    }
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    for &r in radii {
        if !(r > 0.0 && r < big_r) {
            return Err(CoreError::InvalidArgument(format!(
                "radius {r:.3e} outside (0, R) with R = {big_r:.3e}"
            )));
        }
    }
    if !(density > 0.0) {
        return Err(CoreError::InvalidArgument("density must be positive".into()));
    }

    let s0 = (1.0 / big_r).ln();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&i, &j| radii[j].partial_cmp(&radii[i]).unwrap());
    let targets: Vec<f64> = order.iter().map(|&i| (1.0 / radii[i]).ln()).collect();
    let span = targets.last().unwrap() - s0;

    let mut intervals = ((span * density).ceil() as usize).max(32);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = span / intervals as f64;

    // Sample ω on the grid.
    let n_nodes = intervals + 1;
    let mut w_samples = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let t = (-(s0 + i as f64 * h)).exp();
        w_samples.push(check_modulus_sample(omega.eval(t), t)?);
    }

    // Running antiderivative W(s) = ∫_{s0}^{s} ω(e^{−σ}) dσ by cumulative
    // Simpson (asymmetric three-point rule at odd nodes).
    let mut w_cum = vec![0.0f64; n_nodes];
    for k in 0..intervals / 2 {
        let (a, b, cc) = (w_samples[2 * k], w_samples[2 * k + 1], w_samples[2 * k + 2]);
        w_cum[2 * k + 1] = w_cum[2 * k] + h * (5.0 * a + 8.0 * b - cc) / 12.0;
        w_cum[2 * k + 2] = w_cum[2 * k] + h * (a + 4.0 * b + cc) / 3.0;
    }

    // Log-integrand of the outer integral after substitution:
    // ω(t)/t²·dt = ω(e^{−s})·e^{s}·ds, so P(s) = s + C·W(s) + ln ω.
    let log_g = |i: usize| -> f64 {
        let lw = if w_samples[i] > 0.0 {
            w_samples[i].ln()
        } else {
            f64::NEG_INFINITY
        };
        s0 + i as f64 * h + c * w_cum[i] + lw
    };
    let p: Vec<f64> = (0..n_nodes).map(log_g).collect();

    // Cumulative outer integral in shifted-exponent form J = exp(M)·Ĵ.
    // Even nodes chain through the positive-weight composite rule; odd nodes
    // are derived from the previous even node.
    let mut scale = vec![f64::NEG_INFINITY; n_nodes];
    let mut mantissa = vec![0.0f64; n_nodes];
    for k in 0..intervals / 2 {
        let i0 = 2 * k;
        let local = scale[i0].max(p[i0]).max(p[i0 + 1]).max(p[i0 + 2]);
        let (rebase, e0, e1, e2) = if local == f64::NEG_INFINITY {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            (
                if scale[i0] == f64::NEG_INFINITY {
                    0.0
                } else {
                    (scale[i0] - local).exp()
                },
                (p[i0] - local).exp(),
                (p[i0 + 1] - local).exp(),
                (p[i0 + 2] - local).exp(),
            )
        };
        let base = mantissa[i0] * rebase;
        scale[i0 + 1] = local;
        mantissa[i0 + 1] = (base + h * (5.0 * e0 + 8.0 * e1 - e2) / 12.0).max(0.0);
        scale[i0 + 2] = local;
        mantissa[i0 + 2] = base + h * (e0 + 4.0 * e1 + e2) / 3.0;
    }

    // Finalize each target, adding the partial interval beyond its left
    // neighbour node (three-point Simpson with locally continued W).
    let mut out = vec![0.0f64; radii.len()];
    for (&orig, &s_t) in order.iter().zip(&targets) {
        let pos = (s_t - s0) / h;
        let i = (pos.floor() as usize).min(intervals);
        let delta = s_t - (s0 + i as f64 * h);
        let (mut m, mut j) = (scale[i], mantissa[i]);
        if delta > 1e-13 * (1.0 + s_t.abs()) && i < n_nodes {
            let t_mid = (-(s_t - 0.5 * delta)).exp();
            let t_end = (-s_t).exp();
            let w_mid = check_modulus_sample(omega.eval(t_mid), t_mid)?;
            let w_end = check_modulus_sample(omega.eval(t_end), t_end)?;
            let wc_mid = w_cum[i] + 0.25 * delta * (w_samples[i] + w_mid);
            let wc_end = wc_mid + 0.25 * delta * (w_mid + w_end);
            let lp = |s: f64, w: f64, wc: f64| -> f64 {
                if w > 0.0 {
                    s + c * wc + w.ln()
                } else {
                    f64::NEG_INFINITY
                }
            };
            let p0 = p[i];
            let p1 = lp(s_t - 0.5 * delta, w_mid, wc_mid);
            let p2 = lp(s_t, w_end, wc_end);
            let local = m.max(p0).max(p1).max(p2);
            if local > f64::NEG_INFINITY {
                let re = |v: f64| {
                    if v == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (v - local).exp()
                    }
                };
                j = j * re(m)
                    + delta / 6.0 * (re(p0) + 4.0 * re(p1) + re(p2));
                m = local;
            }
        }
        // X = e^{−s_t}·J; detect overflow in log space.
        let value = if j <= 0.0 || m == f64::NEG_INFINITY {
            0.0
        } else {
            let ln_x = -s_t + m + j.ln();
            if ln_x > 709.0 {
                f64::INFINITY
            } else {
                ln_x.exp()
            }
        };
        out[orig] = value;
    }
    Ok(out)
}

/// Slow reference implementation of [`x_functional`]: nested Gauss–Legendre
/// quadrature over geometric panels, no shared grid. Used to cross-validate
/// the single-pass running-antiderivative version.
pub fn direct_x_functional(omega: &Modulus, c: f64, r: f64, big_r: f64) -> Result<f64> {
    if !(r > 0.0 && r < big_r && big_r <= 2.0 * (1.0 + 1e-12)) {
        return Err(CoreError::InvalidArgument(format!(
            "need 0 < r < R <= 2, got r={r:.3e}, R={big_r:.3e}"
        )));
    }
    let inner = |t: f64| -> Result<f64> {
        if c == 0.0 {
            return Ok(0.0);
        }
        Ok(c * dini_integral_with_density(omega, t, big_r, 512.0)?)
    };
    // Outer integral on s = ln(1/t): ∫ ω e^{s} e^{C·W} ds over [s_R, s_r],
    // split into unit panels with 16-point composite Gauss on each.
    const GX: [f64; 8] = [
        -0.960_289_856_497_536_2,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_2,
    ];
    const GW: [f64; 8] = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_29,
        0.362_683_783_378_361_98,
        0.362_683_783_378_361_98,
        0.313_706_645_877_887_29,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ];
    let s_lo = (1.0 / big_r).ln();
    let s_hi = (1.0 / r).ln();
    // Split at s = 1 (t = 1/e): the capped powlog family has a derivative
    // kink there, and Gauss panels must not straddle it.
    let mut cuts = vec![s_lo];
    if s_lo < 1.0 && 1.0 < s_hi {
        cuts.push(1.0);
    }
    cuts.push(s_hi);
    let mut acc = 0.0;
    for seg in cuts.windows(2) {
        let panels = ((seg[1] - seg[0]).ceil() as usize).max(1) * 2;
        let ph = (seg[1] - seg[0]) / panels as f64;
        for pidx in 0..panels {
            let a = seg[0] + pidx as f64 * ph;
            for (x, w) in GX.iter().zip(&GW) {
                let s = a + 0.5 * ph * (x + 1.0);
                let t = (-s).exp();
                let om = check_modulus_sample(omega.eval(t), t)?;
                if om == 0.0 {
                    continue;
                }
                // r·e^{s} stays bounded by 1 on the integration range.
                let ln_term = om.ln() + (s - s_hi) + inner(t)?;
                acc += 0.5 * ph * w * ln_term.exp();
            }
        }
    }
    Ok(acc)
}

/// Trend classification of `X(C, r)` along a decreasing radius sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum XClassification {
    /// Tail decreasing and final value below `0.1 ×` the initial one.
    XZero,
    /// Tail flat within a factor of 2: bounded, not vanishing.
    XFinite,
    /// Tail increasing past `10 ×` the initial value, or overflow.
    XInfinite,
    /// No stable trend on the probed range.
    Inconclusive,
}

/// Report of Dini/X diagnostics along a radius sequence.
#[derive(Debug, Clone, Serialize)]
pub struct DiniReport {
    /// `∫ ω/t dt` truncated at [`DiniReport::dini_cutoff`]; `+∞` when the
    /// per-decade increments of the integral stop decaying (clear
    /// divergence). Slowly divergent integrals appear as their truncated
    /// value.
    pub dini_integral: f64,
    /// Lower endpoint actually used for the truncated Dini integral.
    pub dini_cutoff: f64,
    /// `(r, X(C, r))` pairs in the order supplied; `+∞` flags overflow.
    pub x_values: Vec<(f64, f64)>,
    pub c_parameter: f64,
    pub classification: XClassification,
}

/// Tolerance of the decay test: tail must end below `0.1 ×` the first value.
pub const CLASSIFY_TOLERANCE: f64 = 0.1;
/// Growth threshold of the divergence test: tail must exceed `10 ×`.
pub const CLASSIFY_GROWTH: f64 = 10.0;

/// Classifies a sequence of X values by its tail trend.
///
/// The tail is the last `max(3, ⌈len/3⌉)` entries. Any overflowed (`+∞`)
/// entry forces `XInfinite`. A non-increasing tail ending at
/// `≤ 0.1 × first value` is `XZero`; a non-decreasing tail ending at
/// `≥ 10 × first value` is `XInfinite`; otherwise a tail flat within a
/// factor of 2 is `XFinite`, and anything else is `Inconclusive`.
pub fn classify_trend(values: &[f64]) -> XClassification {
    if values.is_empty() {
        return XClassification::Inconclusive;
    }
    if values.iter().any(|v| v.is_infinite()) {
        return XClassification::XInfinite;
    }
    let tail_len = (values.len().div_ceil(3)).max(3).min(values.len());
    let tail = &values[values.len() - tail_len..];
    let slack = 1e-12;
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) + slack);
    let non_decreasing = tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack) - slack);
    let first = values[0];
    let last = *values.last().unwrap();
    if non_increasing && last <= CLASSIFY_TOLERANCE * first + slack {
        return XClassification::XZero;
    }
    if non_decreasing && last >= CLASSIFY_GROWTH * first {
        return XClassification::XInfinite;
    }
    let t_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if t_min > 0.0 && t_max / t_min <= 2.0 {
        XClassification::XFinite
    } else if t_max == 0.0 {
        // Identically zero tail: already vanished.
        XClassification::XZero
    } else {
        XClassification::Inconclusive
    }
}

/// Evaluates `X(C, ·)` along a decreasing radius sequence and classifies the
/// tail trend; also reports the truncated Dini integral with a per-decade
/// divergence probe.
pub fn x_limsup_estimate(omega: &Modulus, c: f64, r_sequence: &[f64]) -> Result<DiniReport> {
    if r_sequence.is_empty() {
        return Err(CoreError::InvalidArgument("empty radius sequence".into()));
    }
    if r_sequence
        .windows(2)
        .any(|w| !(w[1] < w[0]))
        || r_sequence.iter().any(|&r| !(r > 0.0 && r < 1.0))
    {
        return Err(CoreError::InvalidArgument(
            "radius sequence must be strictly decreasing within (0, 1)".into(),
        ));
    }
    let values = x_values(omega, c, r_sequence, 2.0, DEFAULT_LOG_DENSITY)?;

    // Truncated Dini integral with a per-decade divergence probe: if the
    // increment over the final probed decade has not decayed relative to the
    // one before it, report +∞.
    let cutoff = r_sequence.last().unwrap().min(1e-12);
    let mut decades = Vec::new();
    let mut upper = 2.0f64;
    while upper * 0.1 >= cutoff {
        decades.push(dini_integral(omega, upper * 0.1, upper)?);
        upper *= 0.1;
    }
    let head = dini_integral(omega, cutoff, upper)?;
    let total: f64 = head + decades.iter().sum::<f64>();
    let divergent = match decades.len() {
        0 | 1 => false,
        l => decades[l - 1] >= 0.99 * decades[l - 2] && decades[l - 1] > 1e-300,
    };
    Ok(DiniReport {
        dini_integral: if divergent { f64::INFINITY } else { total },
        dini_cutoff: cutoff,
        x_values: r_sequence.iter().cloned().zip(values.iter().cloned()).collect(),
        c_parameter: c,
        classification: classify_trend(&values),
    })
}

/// `r·∫_r^δ t⁻²(ln 1/t)^{a−1} dt`, the scale-family probe whose behaviour
/// flips at `a = 1` (bounded for `a ≤ 1`, divergent like `(ln 1/r)^{a−1}`
/// for `a > 1`).
pub fn lemma_ex_probe(a: f64, delta: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < delta && delta < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "need 0 < r < delta < 1, got r={r:.3e}, delta={delta:.3e}"
        )));
    }
    // Substituting t = e^{−s}: r·∫ e^{s} s^{a−1} ds = ∫ e^{s−s_r} s^{a−1} ds
    // on [ln(1/δ), ln(1/r)] — the integrand is ≤ s^{a−1}, no overflow.
    let s_lo = (1.0 / delta).ln();
    let s_hi = (1.0 / r).ln();
    let span = s_hi - s_lo;
    let mut intervals = ((span * DEFAULT_LOG_DENSITY).ceil() as usize).max(32);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = span / intervals as f64;
    let g = |i: usize| -> f64 {
        let s = s_lo + i as f64 * h;
        (s - s_hi).exp() * s.powf(a - 1.0)
    };
    let mut acc = g(0) + g(intervals);
    for i in 1..intervals {
        acc += g(i) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(acc * h / 3.0)
}
