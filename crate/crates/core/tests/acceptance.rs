//! Acceptance checklist: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see the PASS lines; failures
//! always surface their output).
//!
//! Tests are serialized through a mutex so the reported wall times reflect
//! the computation itself rather than scheduler contention.

mod common;

use std::sync::Mutex;
use std::time::Instant;

use common::log_grid;
use oscillab_core::dini::{
    default_radius_sequence, lemma_ex_probe, x_limsup_estimate, XClassification,
};
use oscillab_core::estimates::{
    dyadic_scales, est3_report, hrep_report, log_log_slope, within_factor, C_CAP,
};
use oscillab_core::fields::{
    make_example, radial_residual, CoefficientField, ExampleName, SampledField,
};
use oscillab_core::modulus::Modulus;
use oscillab_core::oscillation::{
    gradient_oscillation_profile, mean_oscillation_at, modulus_profile, BallSpec, CenterStrategy,
};
use oscillab_core::quadrature::{QuadratureRule, RuleKind};
use oscillab_core::solver::{
    assemble_and_solve, harmonic_replacement, l2_error_against, replacement_cascade,
    DiscreteProblem, Grid, SolvePolicy, UData,
};
use oscillab_core::CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static GATE: Mutex<()> = Mutex::new(());

fn serialize() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn finish(id: &str, title: &str, limit_s: f64, t0: Instant, detail: &str) {
    let elapsed = t0.elapsed().as_secs_f64();
    println!("[acceptance {id}] {title}: PASS — {detail} ({elapsed:.2} s)");
    assert!(
        elapsed < limit_s,
        "{title}: runtime {elapsed:.2} s exceeds the {limit_s} s budget"
    );
}

#[test]
fn a01_counterexample_certification() {
    let _g = serialize();
    let t0 = Instant::now();
    let ansatz = ExampleName::PropC1.ansatz(2).unwrap();
    let max_residual = log_grid(1e-3, 4.0, 200)
        .into_iter()
        .map(|r| radial_residual(&ansatz, r, 2).unwrap().abs())
        .fold(0.0, f64::max);
    let (min_eig, _) = ansatz.eigenvalue_range(1e-6, 4.0, 4096);
    let ok = max_residual < 1e-8 && min_eig > 0.0;
    if !ok {
        println!(
            "[acceptance 01] counterexample certification: FAIL — residual {max_residual:.3e}, min eig {min_eig:.4}"
        );
    }
    assert!(ok, "residual {max_residual:.3e} (< 1e-8?), min eig {min_eig}");
    finish(
        "01",
        "counterexample certification",
        1.0,
        t0,
        &format!("max residual {max_residual:.2e}, min eigenvalue {min_eig:.4}"),
    );
}

#[test]
fn a02_variant_disambiguation() {
    let _g = serialize();
    let t0 = Instant::now();
    let grid = log_grid(1e-3, 4.0, 200);
    let consistent = ExampleName::PropC2TripleLog.ansatz(2).unwrap();
    let inconsistent = ExampleName::PropC2DoubleLog.ansatz(2).unwrap();
    let good = grid
        .iter()
        .map(|&r| radial_residual(&consistent, r, 2).unwrap().abs())
        .fold(0.0, f64::max);
    let bad = grid
        .iter()
        .map(|&r| radial_residual(&inconsistent, r, 2).unwrap().abs())
        .fold(0.0, f64::max);
    let ok = good < 1e-6 && bad > 1e-2;
    if !ok {
        println!(
            "[acceptance 02] variant disambiguation: FAIL — consistent {good:.3e}, other {bad:.3e}"
        );
    }
    assert!(ok, "exactly one reading solves the system: {good:.3e} vs {bad:.3e}");
    finish(
        "02",
        "variant disambiguation",
        1.0,
        t0,
        &format!("consistent residual {good:.2e}, other {bad:.2e}"),
    );
}

#[test]
fn a03_scale_family_probe() {
    let _g = serialize();
    let t0 = Instant::now();
    let unit = lemma_ex_probe(1.0, 0.1, 1e-8).unwrap();
    assert!((unit - 1.0).abs() < 1e-4, "a = 1 probe: {unit}");
    let cap = 10f64.ln().powf(-0.5) + 1e-3;
    for k in 4..=10 {
        let v = lemma_ex_probe(0.5, 0.1, 10f64.powi(-k)).unwrap();
        assert!(v <= cap, "a = 1/2 at r = 1e-{k}: {v} > {cap}");
    }
    let grown = lemma_ex_probe(1.5, 0.1, 1e-8).unwrap();
    let leading = (1e8f64).ln().sqrt();
    assert!(
        (grown / leading - 1.0).abs() < 0.10,
        "a = 3/2 probe {grown} vs {leading}"
    );
    finish(
        "03",
        "scale-family probe",
        1.0,
        t0,
        &format!("probe(1) = {unit:.7}, probe(3/2)/(ln 1e8)^½ = {:.4}", grown / leading),
    );
}

#[test]
fn a04_x_dichotomy_with_parameterized_c() {
    let _g = serialize();
    let t0 = Instant::now();
    let radii = default_radius_sequence();
    let classify = |omega: &Modulus, c: f64| -> XClassification {
        x_limsup_estimate(omega, c, &radii).unwrap().classification
    };

    // Wide-margin dichotomy for ω = κ/ln(1/t): must hold outright.
    for c in [1.0, 5.0, 20.0] {
        assert_eq!(
            classify(&Modulus::pow_log(0.5 / c), c),
            XClassification::XZero,
            "Cκ = 1/2, C = {c}"
        );
        assert_eq!(
            classify(&Modulus::pow_log(2.0 / c), c),
            XClassification::XInfinite,
            "Cκ = 2, C = {c}"
        );
    }

    // Double-log family: required XZero for every tested C ≤ 20.
    let mut misses = Vec::new();
    for beta in [0.5, 1.0] {
        for c in [1.0, 5.0, 20.0] {
            let got = classify(&Modulus::log_log(beta), c);
            if got != XClassification::XZero {
                misses.push(format!("β = {beta}, C = {c}: {got:?}"));
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    if misses.is_empty() {
        println!(
            "[acceptance 04] x dichotomy with parameterized C: PASS — all 12 classifications ({elapsed:.2} s)"
        );
    } else {
        println!(
            "[acceptance 04] x dichotomy with parameterized C: FAIL — log-family margins hold; double-log family misclassified at [{}] ({elapsed:.2} s)",
            misses.join("; ")
        );
    }
    assert!(elapsed < 5.0);
    assert!(
        misses.is_empty(),
        "for ω = 1/(ln(64/t)(ln ln(64/t))^β) the requirement is XZero for all \
         C ≤ 20, but the measured classifications are [{}]. Analysis: \
         X(C, r) ≍ (ln ln(64/r))^{{g(C, β)}}/ln(64/r) with g growing in C; for \
         C ∈ {{5, 20}} the numerator dominates until ln(64/r) exceeds \
         (ln ln(64/r))^{{C−1}}, i.e. at radii far below the smallest positive \
         double-precision number, so no finite-precision sample of X can \
         exhibit the limit. The classifier correctly reports the observable \
         trend; the requirement is unattainable at f64. The same resolution \
         limit affects the tight-margin log-family invariant (Cκ = 0.9/1.1, \
         where X ≍ (ln 1/r)^{{±0.1}} moves less than 2× over all representable \
         radii). See README, Known limitations.",
        misses.join("; ")
    );
}

#[test]
fn a05_slowly_varying_modulus_asymptotics() {
    let _g = serialize();
    let t0 = Instant::now();
    let (coeff, _) = make_example(&ExampleName::SinLogLogLog, 2).unwrap();
    let radii: Vec<f64> = (4..=16).map(|k| 2f64.powi(-k)).collect();
    let profile =
        modulus_profile(&coeff, &radii, 2.0, &CenterStrategy::default(), None).unwrap();
    let products: Vec<f64> = profile
        .pairs()
        .map(|(t, v)| {
            let big_l = (64.0 / t).ln();
            v * big_l * big_l.ln()
        })
        .collect();
    let max = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = products.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    let ok = min > 0.0 && ratio < 2.0;
    if !ok {
        println!("[acceptance 05] slowly varying modulus asymptotics: FAIL — ratio {ratio:.3}");
    }
    assert!(ok, "compensated product max/min = {ratio}");
    finish(
        "05",
        "slowly varying modulus asymptotics",
        60.0,
        t0,
        &format!("value·ln·lnln within [{min:.3}, {max:.3}], ratio {ratio:.3}"),
    );
}

#[test]
fn a06_solver_convergence_order() {
    let _g = serialize();
    let t0 = Instant::now();
    let exact = |x: &[f64]| (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
    let data = |x: &[f64]| {
        let pi = std::f64::consts::PI;
        [
            2.0 * pi * (pi * x[0]).cos() * (pi * x[1]).sin(),
            pi * (pi * x[0]).sin() * (pi * x[1]).cos(),
        ]
    };
    let mut errors = Vec::new();
    for cells in [64usize, 128, 256] {
        let grid = Grid::for_ball(cells, 2.0).unwrap();
        let problem = DiscreteProblem::from_constant(
            grid,
            [2.0, 0.0, 1.0],
            &exact,
            Some(&data as &dyn Fn(&[f64]) -> [f64; 2]),
        )
        .unwrap();
        let policy = SolvePolicy {
            cells,
            tol: 1e-11,
            max_iterations: 60_000,
        };
        let sol = assemble_and_solve(&problem, &policy).unwrap();
        errors.push(l2_error_against(&sol, &exact));
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    if !ok {
        println!("[acceptance 06] solver convergence order: FAIL — ratios {ratios:?}");
    }
    assert!(ok, "L² error ratios per halving: {ratios:?} (errors {errors:?})");
    finish(
        "06",
        "solver convergence order",
        60.0,
        t0,
        &format!("error ratios {:.2} and {:.2} per halving", ratios[0], ratios[1]),
    );
}

#[test]
fn a07_replacement_scaling_in_the_data() {
    let _g = serialize();
    let t0 = Instant::now();
    let epsilons = [1e-1, 1e-2, 1e-3];
    let identity = [1.0, 0.0, 1.0];
    let big_r = 0.5;
    let boundary = |x: &[f64]| x[0] - 0.4 * x[1];
    let forcing = |x: &[f64]| {
        let pi = std::f64::consts::PI;
        [
            (pi * x[0]).sin() * (pi * x[1]).cos(),
            x[0] * x[1] + 0.25 * (pi * x[0]).cos(),
        ]
    };
    let sweep = |cells: usize| {
        let policy = SolvePolicy {
            cells,
            tol: 1e-10,
            max_iterations: 20_000,
        };
        let mut records = Vec::new();
        let mut errors = Vec::new();
        for &eps in &epsilons {
            let data = move |x: &[f64]| {
                let f = forcing(x);
                [eps * f[0], eps * f[1]]
            };
            let grid = Grid::for_ball(cells, 2.0 * big_r).unwrap();
            let problem = DiscreteProblem::from_constant(
                grid,
                identity,
                &boundary,
                Some(&data as &dyn Fn(&[f64]) -> [f64; 2]),
            )
            .unwrap();
            let u_eps = assemble_and_solve(&problem, &policy).unwrap();
            let rec = harmonic_replacement(
                &UData::Discrete(&u_eps),
                None,
                identity,
                big_r,
                Some(&data as &dyn Fn(&[f64]) -> [f64; 2]),
                &policy,
            )
            .unwrap();
            errors.push(rec.err_l2_grad);
            records.push(rec);
        }
        (records, errors)
    };
    let (coarse_records, errors) = sweep(64);
    let slope = log_log_slope(&epsilons, &errors).unwrap();
    let coarse_fit = hrep_report(&coarse_records).unwrap().fitted_c.unwrap();
    let (fine_records, _) = sweep(128);
    let fine_fit = hrep_report(&fine_records).unwrap().fitted_c.unwrap();
    let ok = (0.9..=1.1).contains(&slope) && within_factor(coarse_fit, fine_fit, 2.0);
    if !ok {
        println!(
            "[acceptance 07] replacement scaling: FAIL — slope {slope:.4}, fits {coarse_fit:.4}/{fine_fit:.4}"
        );
    }
    assert!(
        ok,
        "slope {slope} must lie in [0.9, 1.1]; fitted constants {coarse_fit} vs {fine_fit} within 2×"
    );
    finish(
        "07",
        "replacement scaling",
        300.0,
        t0,
        &format!("slope {slope:.4}, fitted C {coarse_fit:.4} → {fine_fit:.4} under refinement"),
    );
}

#[test]
fn a08_cascade_recursions() {
    let _g = serialize();
    let t0 = Instant::now();
    let (coeff, u) = make_example(&ExampleName::PropC1, 2).unwrap();
    let policy = SolvePolicy {
        cells: 128,
        tol: 1e-10,
        max_iterations: 20_000,
    };
    let seq = replacement_cascade(&u.unwrap(), &coeff, 5, &policy).unwrap();
    let radii: Vec<f64> = seq.levels.iter().map(|l| 2.0 * l.radius).collect();
    let profile =
        modulus_profile(&coeff, &radii, 2.0, &CenterStrategy::default(), None).unwrap();
    let omega = profile.as_modulus().unwrap();
    let witness = seq.recursion_witness(&|t| omega.eval(t));
    let slack = seq.triangle_slack();
    let ok = witness.c() <= 100.0 && slack <= 1e-3;
    if !ok {
        println!(
            "[acceptance 08] cascade recursions: FAIL — witness C {:.3}, triangle slack {slack:.3e}",
            witness.c()
        );
    }
    assert!(
        ok,
        "one constant C = {} ≤ 100 must close both recursions at every level \
         and the triangle bound must hold within 1e-3 relative (slack {slack})",
        witness.c()
    );
    finish(
        "08",
        "cascade recursions",
        600.0,
        t0,
        &format!(
            "witness C = {:.3} (error {:.3}, growth {:.3}), triangle slack {slack:.2e}",
            witness.c(),
            witness.c_error,
            witness.c_growth
        ),
    );
}

#[test]
fn a09_vmo_unboundedness_split() {
    let _g = serialize();
    let t0 = Instant::now();
    let (_, u) = make_example(&ExampleName::PropC1, 2).unwrap();
    let u = u.unwrap();
    let radii: Vec<f64> = (2..=6).map(|k| 2f64.powi(-2 * k)).collect();
    let report =
        gradient_oscillation_profile(&u, &radii, 2.0, &CenterStrategy::OriginOnly, None).unwrap();
    let values = report.profile.values();
    let decay = values[values.len() - 1] / values[0];

    let norm_at = |r: f64| {
        let g = u.gradient(&[r, 0.0]);
        (g[0] * g[0] + g[1] * g[1]).sqrt()
    };
    let growth = norm_at(1e-9) - norm_at(1e-3);
    let ok = decay < 0.8 && growth >= 0.5;
    if !ok {
        println!(
            "[acceptance 09] vmo/unboundedness split: FAIL — decay {decay:.4}, growth {growth:.4}"
        );
    }
    assert!(
        ok,
        "oscillation ratio {decay} must fall below 0.8 while the pointwise \
         gradient grows by {growth} ≥ 0.5"
    );
    finish(
        "09",
        "vmo/unboundedness split",
        60.0,
        t0,
        &format!("oscillation value(2⁻¹²)/value(2⁻⁴) = {decay:.3}, |∇u| grows by {growth:.3}"),
    );
}

#[test]
fn a10_sup_estimate_gate() {
    let _g = serialize();
    let t0 = Instant::now();
    let (coeff, u_bounded) = make_example(&ExampleName::PropC2TripleLog, 2).unwrap();
    let (_, u_unbounded) = make_example(&ExampleName::PropC1, 2).unwrap();
    let u_bounded = u_bounded.unwrap();
    let profile_radii = |step: f64| {
        let floor = 2.0 * 4f64.powi(-6);
        let mut radii = Vec::new();
        let mut t = 2.0;
        while t > floor * (1.0 - 1e-12) {
            radii.push(t);
            t *= step;
        }
        radii
    };
    let strategy = CenterStrategy::default();
    let scales = dyadic_scales(6, 2.0);

    let omega = modulus_profile(&coeff, &profile_radii(0.5), 2.0, &strategy, None)
        .unwrap()
        .as_modulus()
        .unwrap();
    let fitted = est3_report(&u_bounded, &omega, &scales)
        .unwrap()
        .fitted_c
        .unwrap();

    let omega_dense = modulus_profile(&coeff, &profile_radii(0.5f64.sqrt()), 2.0, &strategy, None)
        .unwrap()
        .as_modulus()
        .unwrap();
    let fitted_dense = est3_report(&u_bounded, &omega_dense, &scales)
        .unwrap()
        .fitted_c
        .unwrap();

    let rejection = matches!(
        est3_report(&u_unbounded.unwrap(), &omega, &scales),
        Err(CoreError::UnboundedGradient(_))
    );
    let ok = fitted <= C_CAP && within_factor(fitted, fitted_dense, 2.0) && rejection;
    if !ok {
        println!(
            "[acceptance 10] sup-estimate gate: FAIL — fitted {fitted:.3}/{fitted_dense:.3}, rejection {rejection}"
        );
    }
    assert!(
        ok,
        "fitted C {fitted} ≤ 100 with refinement stability ({fitted_dense}), \
         and the unbounded-gradient input must be rejected ({rejection})"
    );
    finish(
        "10",
        "sup-estimate gate",
        300.0,
        t0,
        &format!(
            "fitted C = {fitted:.3} (dense profile {fitted_dense:.3}), unbounded input rejected"
        ),
    );
}

#[test]
fn a11_oscillation_algebra() {
    let _g = serialize();
    let t0 = Instant::now();
    let rule = QuadratureRule {
        kind: RuleKind::ProductPolar,
        points: 2048,
        seed: 0,
    };
    let balls = [
        BallSpec::origin(2, 1.0).unwrap(),
        BallSpec::origin(2, 0.3).unwrap(),
    ];
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = [[0.0f64; 4]; 3];
        for comp in &mut coeffs {
            for c in comp.iter_mut() {
                *c = rng.gen_range(-0.1..0.1);
            }
        }
        let build = move |x: &[f64], slot: usize| -> f64 {
            let c = &coeffs[slot];
            c[0] * (x[0]).sin()
                + c[1] * (x[1]).cos()
                + c[2] * (2.0 * x[0] + x[1]).sin()
                + c[3] * (x[0] * 0.5 - x[1]).cos()
        };
        let field = CoefficientField::from_fn(
            format!("seeded-{seed}"),
            2,
            1,
            0.5,
            4.0,
            move |x, out| {
                let q = build(x, 1);
                out[0] = 1.5 + build(x, 0);
                out[1] = q;
                out[2] = q;
                out[3] = 1.5 + build(x, 2);
            },
        )
        .unwrap();
        let affine = |scale: f64, shift: f64| {
            let inner = field.clone();
            CoefficientField::from_fn("affine", 2, 1, 0.25, 20.0, move |x, out| {
                inner.eval_into(x, out);
                for v in out.iter_mut() {
                    *v *= scale;
                }
                out[0] += shift;
                out[3] += shift;
            })
            .unwrap()
        };
        for ball in &balls {
            // Scaling homogeneity at 1e-12 relative.
            let base = mean_oscillation_at(&field, ball, 2.0, &rule).unwrap();
            let tripled = mean_oscillation_at(&affine(3.0, 0.0), ball, 2.0, &rule).unwrap();
            assert!(
                (tripled - 3.0 * base).abs() <= 1e-12 * (3.0 * base).max(1e-30),
                "seed {seed}: scaling {tripled} vs 3·{base}"
            );
            // Shift invariance at 1e-12 relative.
            let shifted = mean_oscillation_at(&affine(1.0, 0.9), ball, 2.0, &rule).unwrap();
            assert!(
                (shifted - base).abs() <= 1e-12 * base.max(1e-30),
                "seed {seed}: shift {shifted} vs {base}"
            );
            // p-monotonicity across p = 1, 1.5, 2, 4.
            let mut prev = 0.0;
            for p in [1.0, 1.5, 2.0, 4.0] {
                let v = mean_oscillation_at(&field, ball, p, &rule).unwrap();
                assert!(v >= prev * (1.0 - 1e-12), "seed {seed}: p-monotonicity at {p}");
                prev = v;
            }
        }
    }
    finish(
        "11",
        "oscillation algebra",
        60.0,
        t0,
        "scaling, shift, and p-monotonicity on 20 seeded fields",
    );
}
