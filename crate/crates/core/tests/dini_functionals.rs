//! Integral functionals on moduli: the scale-family probe, the weighted
//! functional X with its C-parameterized dichotomy, and divergence detection.

mod common;

use common::rel_err;
use oscillab_core::dini::{
    default_radius_sequence, dini_integral, direct_x_functional, lemma_ex_probe,
    x_functional, x_limsup_estimate, XClassification,
};
use oscillab_core::modulus::Modulus;

fn classify(omega: &Modulus, c: f64) -> XClassification {
    let radii = default_radius_sequence();
    x_limsup_estimate(omega, c, &radii).unwrap().classification
}

#[test]
fn probe_matches_independent_quadrature() {
    // Frozen from a from-scratch Simpson evaluation of
    // r·∫_r^δ t⁻²(ln 1/t)^{a−1} dt on a two-million-point grid.
    let cases = [
        (1.0, 1e-8, 1.0 - 1e-7),
        (0.5, 1e-4, 0.350_915_080_6),
        (0.5, 1e-10, 0.213_255_567_9),
        (1.5, 1e-8, 4.171_970_644_815),
    ];
    for (a, r, want) in cases {
        let got = lemma_ex_probe(a, 0.1, r).unwrap();
        assert!(
            rel_err(got, want) < 1e-6,
            "probe(a={a}, r={r:e}) = {got}, independently {want}"
        );
    }
}

#[test]
fn probe_exhibits_the_exponent_dichotomy() {
    // a = 1: exactly 1 − r/δ.
    let unit = lemma_ex_probe(1.0, 0.1, 1e-8).unwrap();
    assert!((unit - 1.0).abs() < 1e-4, "a = 1 probe: {unit}");

    // a < 1: uniformly bounded by (ln 1/δ)^{a−1}.
    let cap = 10f64.ln().powf(-0.5) + 1e-3;
    for k in 4..=10 {
        let v = lemma_ex_probe(0.5, 0.1, 10f64.powi(-k)).unwrap();
        assert!(v <= cap, "a = 1/2 at r = 1e-{k}: {v} > {cap}");
        assert!(v > 0.0);
    }

    // a > 1: grows like (ln 1/r)^{a−1}.
    let v = lemma_ex_probe(1.5, 0.1, 1e-8).unwrap();
    let leading = (1e8f64).ln().sqrt();
    assert!(
        (v / leading - 1.0).abs() < 0.10,
        "a = 3/2 at r = 1e-8: {v} vs leading term {leading}"
    );
}

#[test]
fn probe_rejects_misordered_arguments() {
    assert!(lemma_ex_probe(1.0, 0.1, 0.2).is_err());
    assert!(lemma_ex_probe(1.0, 1.5, 0.2).is_err());
    assert!(lemma_ex_probe(1.0, 0.1, 0.0).is_err());
}

#[test]
fn x_dichotomy_for_the_log_family_at_wide_margins() {
    // ω(t) = κ/ln(1/t) makes X behave like κ·(ln 1/r)^{Cκ−1}: it vanishes
    // for Cκ = 1/2 and diverges for Cκ = 2, whatever the split between
    // C and κ.
    for c in [1.0, 5.0, 20.0] {
        let vanishing = Modulus::pow_log(0.5 / c);
        assert_eq!(
            classify(&vanishing, c),
            XClassification::XZero,
            "Cκ = 1/2 with C = {c}"
        );
        let divergent = Modulus::pow_log(2.0 / c);
        assert_eq!(
            classify(&divergent, c),
            XClassification::XInfinite,
            "Cκ = 2 with C = {c}"
        );
    }
}

#[test]
fn x_classification_of_the_log_family_at_tight_margins_is_unresolved() {
    // At Cκ = 0.9 and Cκ = 1.1 the exact asymptotics are
    // X ≍ (ln 1/r)^{∓0.1}: monotone to 0 and ∞ respectively, but so slowly
    // that over every double-precision radius window (r ≥ 4⁻⁵⁰⁰) the sampled
    // values move by less than a factor 2. The tail classifier therefore
    // reports XFinite on both sides; the margins where the dichotomy is
    // numerically decidable are Cκ ≤ 1/2 and Cκ ≥ 2 (previous test).
    // See README "Known limitations".
    for c in [1.0, 5.0, 20.0] {
        for margin in [0.9, 1.1] {
            let omega = Modulus::pow_log(margin / c);
            assert_eq!(
                classify(&omega, c),
                XClassification::XFinite,
                "Cκ = {margin} with C = {c}: sub-resolution trend"
            );
        }
    }
}

#[test]
fn x_classification_of_the_double_log_family() {
    // ω(t) = 1/(ln(64/t)·(ln ln(64/t))^β). The weight exp(C∫ω/s) grows like
    // (ln ln)^{C·…}, so X ≍ (ln ln(64/r))^{g(C,β)} / ln(64/r):
    //   - C = 1: the denominator wins within double precision → XZero.
    //   - C ∈ {5, 20}: the numerator dominates every representable radius
    //     (the crossover needs ln(64/r) > (ln ln(64/r))^{C−1}, i.e. radii far
    //     below 1e-308), so the measured trend grows or stalls even though
    //     the limit is 0. See README "Known limitations".
    for beta in [0.5, 1.0] {
        assert_eq!(
            classify(&Modulus::log_log(beta), 1.0),
            XClassification::XZero,
            "β = {beta}, C = 1"
        );
    }
    assert_eq!(
        classify(&Modulus::log_log(0.5), 5.0),
        XClassification::XInfinite
    );
    assert_eq!(
        classify(&Modulus::log_log(1.0), 5.0),
        XClassification::XFinite
    );
    for beta in [0.5, 1.0] {
        assert_eq!(
            classify(&Modulus::log_log(beta), 20.0),
            XClassification::XInfinite,
            "β = {beta}, C = 20"
        );
    }
}

#[test]
fn x_of_zero_modulus_vanishes_identically() {
    let omega = Modulus::constant(0.0);
    let report = x_limsup_estimate(&omega, 1.0, &default_radius_sequence()).unwrap();
    assert_eq!(report.classification, XClassification::XZero);
    assert!(report.x_values.iter().all(|&(_, v)| v == 0.0));
    assert_eq!(report.dini_integral, 0.0);
}

#[test]
fn x_agrees_with_direct_integration_when_both_are_stable() {
    // The production evaluation integrates on a log scale with the exponent
    // shifted before exponentiation; the naive direct quadrature is accurate
    // while nothing overflows. Cross-validate the two on a moderate family.
    let omega = Modulus::pow_log(0.4);
    for c in [0.0, 1.0, 3.0] {
        for (r, big_r) in [(1e-2, 1.0), (1e-4, 0.5), (1e-6, 2.0)] {
            let fast = x_functional(&omega, c, r, big_r).unwrap();
            let direct = direct_x_functional(&omega, c, r, big_r).unwrap();
            // The two schemes use different panelizations; agreement to 1e-5
            // relative over six log-decades certifies both.
            assert!(
                rel_err(fast, direct) < 1e-5,
                "C = {c}, r = {r:e}, R = {big_r}: {fast} vs {direct}"
            );
        }
    }
}

#[test]
fn x_is_monotone_in_c() {
    let omega = Modulus::log_log(0.5);
    for (r, big_r) in [(1e-3, 1.0), (1e-6, 2.0)] {
        let mut prev = 0.0;
        for c in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let v = x_functional(&omega, c, r, big_r).unwrap();
            assert!(
                v >= prev * (1.0 - 1e-12),
                "X must grow with C: X({c}) = {v} < X(prev) = {prev}"
            );
            prev = v;
        }
    }
}

#[test]
fn overflow_is_mapped_to_infinity_not_panic() {
    // A huge constant modulus drives the inner exponent past the f64 range;
    // the evaluation must saturate to +∞ and classify as divergent.
    let omega = Modulus::constant(10.0);
    let v = x_functional(&omega, 50.0, 1e-6, 2.0).unwrap();
    assert!(v.is_infinite() && v > 0.0);
    let report = x_limsup_estimate(&omega, 50.0, &default_radius_sequence()).unwrap();
    assert_eq!(report.classification, XClassification::XInfinite);
}

#[test]
fn dini_divergence_probe_flags_the_borderline_family() {
    // ∫₀ dt/(t·ln(1/t)) diverges (iterated-log antiderivative): flagged ∞.
    let report =
        x_limsup_estimate(&Modulus::pow_log(1.0), 0.0, &default_radius_sequence()).unwrap();
    assert!(report.dini_integral.is_infinite());

    // A Lipschitz modulus is summable: ∫ c·t/t dt = c·(b − a).
    let lin = Modulus::linear(1.0);
    let report = x_limsup_estimate(&lin, 0.0, &default_radius_sequence()).unwrap();
    assert!(report.dini_integral.is_finite());
    let head = dini_integral(&lin, 0.25, 2.0).unwrap();
    assert!(rel_err(head, 1.75) < 1e-9, "exact segment integral: {head}");
}

#[test]
fn radius_sequences_must_decrease_strictly() {
    let omega = Modulus::constant(0.1);
    assert!(x_limsup_estimate(&omega, 1.0, &[0.5, 0.5, 0.25]).is_err());
    assert!(x_limsup_estimate(&omega, 1.0, &[0.25, 0.5]).is_err());
    assert!(x_limsup_estimate(&omega, 1.0, &[]).is_err());
    assert!(x_limsup_estimate(&omega, 1.0, &[0.5, 0.25]).is_ok());
}

#[test]
fn default_radius_sequence_is_the_dyadic_quarter_ladder() {
    let radii = default_radius_sequence();
    assert_eq!(radii.len(), 497);
    assert!(rel_err(radii[0], 4f64.powi(-4)) < 1e-15);
    assert!(rel_err(*radii.last().unwrap(), 4f64.powi(-500)) < 1e-12);
    assert!(radii.windows(2).all(|w| w[1] < w[0]));
}
