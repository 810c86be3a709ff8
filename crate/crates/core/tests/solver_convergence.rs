//! Manufactured-solution convergence: the bilinear solver must reproduce
//! second-order L² decay and first-order energy decay under mesh halving.

mod common;

use std::f64::consts::PI;

use oscillab_core::solver::{
    assemble_and_solve, l2_error_against, DiscreteProblem, Grid, SolvePolicy,
};

struct Manufactured {
    label: &'static str,
    abar: [f64; 3],
    exact: fn(&[f64]) -> f64,
    data: fn(&[f64]) -> [f64; 2],
}

/// u = sin(πx)sin(πy) with A = diag(2, 1): data f = A∇u makes the discrete
/// solution the Ritz projection of u.
fn trig_exact(x: &[f64]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}
fn trig_data(x: &[f64]) -> [f64; 2] {
    [
        2.0 * PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
        PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
    ]
}

/// u = x² + y²/2 with A = Id and non-trivial boundary trace. (A pure saddle
/// x² − y² would be degenerate here: its two cell-center interpolation
/// errors cancel exactly, leaving only solver noise.)
fn paraboloid_exact(x: &[f64]) -> f64 {
    x[0] * x[0] + 0.5 * x[1] * x[1]
}
fn paraboloid_data(x: &[f64]) -> [f64; 2] {
    [2.0 * x[0], x[1]]
}

fn l2_error_at(case: &Manufactured, cells: usize) -> f64 {
    let grid = Grid::for_ball(cells, 2.0).unwrap();
    let problem = DiscreteProblem::from_constant(
        grid,
        case.abar,
        &case.exact,
        Some(&case.data as &dyn Fn(&[f64]) -> [f64; 2]),
    )
    .unwrap();
    let policy = SolvePolicy {
        cells,
        tol: 1e-11,
        max_iterations: 60_000,
    };
    let sol = assemble_and_solve(&problem, &policy).unwrap();
    assert!(
        sol.residual < 1e-9,
        "{} at {cells} cells: solver residual {}",
        case.label,
        sol.residual
    );
    l2_error_against(&sol, &case.exact)
}

#[test]
fn manufactured_solutions_converge_at_second_order() {
    let cases = [
        Manufactured {
            label: "trig/diag(2,1)",
            abar: [2.0, 0.0, 1.0],
            exact: trig_exact,
            data: trig_data,
        },
        Manufactured {
            label: "paraboloid/identity",
            abar: [1.0, 0.0, 1.0],
            exact: paraboloid_exact,
            data: paraboloid_data,
        },
    ];
    for case in &cases {
        let errors: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&m| l2_error_at(case, m))
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (3.5..=4.5).contains(&ratio),
                "{}: L² error ratio per halving = {ratio} (errors {errors:?})",
                case.label
            );
        }
    }
}

#[test]
fn cell_center_gradients_superconverge() {
    // On a translation-invariant mesh the midpoint gradient of the Ritz
    // projection is second-order accurate (one order better than the global
    // H¹ rate): ratios near 4 per halving.
    let case = Manufactured {
        label: "trig/diag(2,1)",
        abar: [2.0, 0.0, 1.0],
        exact: trig_exact,
        data: trig_data,
    };
    let grad_exact = |x: &[f64]| {
        [
            PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
            PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
        ]
    };
    let mut errs = Vec::new();
    for cells in [64usize, 128, 256] {
        let grid = Grid::for_ball(cells, 2.0).unwrap();
        let problem = DiscreteProblem::from_constant(
            grid,
            case.abar,
            &case.exact,
            Some(&case.data as &dyn Fn(&[f64]) -> [f64; 2]),
        )
        .unwrap();
        let policy = SolvePolicy {
            cells,
            tol: 1e-11,
            max_iterations: 60_000,
        };
        let sol = assemble_and_solve(&problem, &policy).unwrap();
        let h = sol.grid().h();
        let mut acc = 0.0;
        for (center, g) in sol.cell_gradients() {
            let ge = grad_exact(&center);
            acc += ((g[0] - ge[0]).powi(2) + (g[1] - ge[1]).powi(2)) * h * h;
        }
        errs.push(acc.sqrt());
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (3.5..=4.5).contains(&ratio),
            "center-gradient error ratio per halving = {ratio} (errors {errs:?})"
        );
    }
}

#[test]
fn solver_scales_boundary_data_linearly() {
    // Pure Dirichlet problem: scaling the boundary trace scales the whole
    // solution; checks the elimination path end to end.
    let grid = Grid::for_ball(64, 2.0).unwrap();
    let boundary = |x: &[f64]| x[0] * x[0] - x[1] * x[1] + 0.5 * x[0];
    let scaled = |x: &[f64]| 3.0 * (x[0] * x[0] - x[1] * x[1] + 0.5 * x[0]);
    let policy = SolvePolicy {
        cells: 64,
        tol: 1e-11,
        max_iterations: 60_000,
    };
    let base = assemble_and_solve(
        &DiscreteProblem::from_constant(grid, [1.0, 0.2, 1.5], &boundary, None).unwrap(),
        &policy,
    )
    .unwrap();
    let grid2 = Grid::for_ball(64, 2.0).unwrap();
    let tripled = assemble_and_solve(
        &DiscreteProblem::from_constant(grid2, [1.0, 0.2, 1.5], &scaled, None).unwrap(),
        &policy,
    )
    .unwrap();
    for x in [[0.3, -0.7], [1.2, 0.4], [-1.5, 1.5], [0.0, 0.0]] {
        let a = base.value_at(&x);
        let b = tripled.value_at(&x);
        assert!(
            (b - 3.0 * a).abs() < 1e-8,
            "linearity at {x:?}: {b} vs 3·{a}"
        );
    }
}
