//! Structured-grid finite-element solver and the dyadic replacement cascade.
//!
//! Scope is the planar scalar case (`n = 2`, `N = 1`). Dirichlet problems on
//! a ball `B_{2R}` are discretized on the circumscribed square `[−2R, 2R]²`
//! with bilinear (Q1) elements: boundary values are the trace of the
//! supplied field on the square's boundary, and all norms are integrated
//! over the cells whose centers lie in the target ball. This ball-in-box
//! convention changes constants relative to exact ball domains — a
//! deliberate trade for structured linear algebra — so cascade statements
//! are fitted-constant existence claims, never specific constant values.
//!
//! The harmonic replacement at scale `R` solves the constant-coefficient
//! system `div(Ā ∇h) = 0` with `h = u` on the boundary and compares
//! gradients; the cascade iterates this across `R_k = 4^{−k}` with
//! `Ā_k = (A)_{B_{2R_k}}`, recording
//!
//! ```text
//! a_k = (⨍_{B_{R_k}} |∇(u − h_k)|²)^{1/2},   b_k = max_cells |∇h_k|,
//! ```
//!
//! the mean-normalized error and the discrete gradient sup driving the
//! Campanato-style recursion. With these conventions the triangle bound
//! `(⨍|∇u|²)^{1/2} ≤ a_k + b_k` holds exactly on the shared cell set.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fields::{CoefficientField, VectorSolutionField};
use crate::oscillation::BallSpec;

/// Square structured grid over an axis-aligned box.
#[derive(Debug, Clone)]
pub struct Grid {
    cells: usize,
    center: [f64; 2],
    half_side: f64,
}

impl Grid {
    /// Builds a grid with `cells × cells` elements (cells a power of two,
    /// at least 4) over the box `center ± half_side`, which must sit inside
    /// the domain `B_4`.
    pub fn new(cells: usize, center: [f64; 2], half_side: f64) -> Result<Self> {
        if !cells.is_power_of_two() || cells < 4 {
            return Err(CoreError::InvalidArgument(format!(
                "cells per side must be a power of two >= 4, got {cells}"
            )));
        }
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "box half side must be positive, got {half_side}"
            )));
        }
        let corner = (center[0].powi(2) + center[1].powi(2)).sqrt()
            + half_side * std::f64::consts::SQRT_2;
        if corner > 4.0 * (1.0 + 1e-9) {
            return Err(CoreError::Domain(format!(
                "grid box (center {center:?}, half side {half_side}) exits B_4"
            )));
        }
        Ok(Self {
            cells,
            center,
            half_side,
        })
    }

    /// Circumscribed-square grid for the ball `B_{2R}(0)`.
    pub fn for_ball(cells: usize, two_r: f64) -> Result<Self> {
        Self::new(cells, [0.0, 0.0], two_r)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Mesh size.
    pub fn h(&self) -> f64 {
        2.0 * self.half_side / self.cells as f64
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side() * self.nodes_per_side()
    }

    pub fn node_coords(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.h();
        [
            self.center[0] - self.half_side + i as f64 * h,
            self.center[1] - self.half_side + j as f64 * h,
        ]
    }

    pub fn cell_center(&self, ci: usize, cj: usize) -> [f64; 2] {
        let h = self.h();
        [
            self.center[0] - self.half_side + (ci as f64 + 0.5) * h,
            self.center[1] - self.half_side + (cj as f64 + 0.5) * h,
        ]
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nodes_per_side() + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Index of the cell containing `x`, clamped to the box.
    pub fn cell_of(&self, x: &[f64]) -> (usize, usize) {
        let h = self.h();
        let fx = ((x[0] - (self.center[0] - self.half_side)) / h).floor();
        let fy = ((x[1] - (self.center[1] - self.half_side)) / h).floor();
        let clamp = |v: f64| (v.max(0.0) as usize).min(self.cells - 1);
        (clamp(fx), clamp(fy))
    }
}

/// Reference-square element matrices for `∫ ∂_a N_i ∂_b N_j`; independent of
/// the mesh size in 2D. Local node order: (0,0), (1,0), (0,1), (1,1).
struct ElementMatrices {
    kxx: [[f64; 4]; 4],
    kxy: [[f64; 4]; 4],
    kyx: [[f64; 4]; 4],
    kyy: [[f64; 4]; 4],
    /// `∫ ∂_x N_i` and `∫ ∂_y N_i` over the reference square.
    bx: [f64; 4],
    by: [f64; 4],
}

fn element_matrices() -> &'static ElementMatrices {
    static CELL: OnceLock<ElementMatrices> = OnceLock::new();
    CELL.get_or_init(|| {
        // 2×2 Gauss on [0,1]² integrates these biquadratic products exactly.
        let g = 0.5 / 3.0f64.sqrt();
        let pts = [0.5 - g, 0.5 + g];
        let mut m = ElementMatrices {
            kxx: [[0.0; 4]; 4],
            kxy: [[0.0; 4]; 4],
            kyx: [[0.0; 4]; 4],
            kyy: [[0.0; 4]; 4],
            bx: [0.0; 4],
            by: [0.0; 4],
        };
        let dshape = |xi: f64, eta: f64| -> ([f64; 4], [f64; 4]) {
            (
                [-(1.0 - eta), 1.0 - eta, -eta, eta],
                [-(1.0 - xi), -xi, 1.0 - xi, xi],
            )
        };
        for &xi in &pts {
            for &eta in &pts {
                let (dx, dy) = dshape(xi, eta);
                for i in 0..4 {
                    m.bx[i] += 0.25 * dx[i];
                    m.by[i] += 0.25 * dy[i];
                    for j in 0..4 {
                        m.kxx[i][j] += 0.25 * dx[i] * dx[j];
                        m.kxy[i][j] += 0.25 * dx[i] * dy[j];
                        m.kyx[i][j] += 0.25 * dy[i] * dx[j];
                        m.kyy[i][j] += 0.25 * dy[i] * dy[j];
                    }
                }
            }
        }
        m
    })
}

/// Discretized Dirichlet problem: per-cell coefficient samples, nodal
/// boundary values, optional per-cell divergence data `f` (the equation is
/// `div(A ∇u) = div f` in weak form).
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    grid: Grid,
    /// Per cell `[a11, a12, a22]`, midpoint-sampled and symmetrized.
    coeff: Vec<[f64; 3]>,
    /// Per cell `[f1, f2]` when present.
    div_data: Option<Vec<[f64; 2]>>,
    /// Nodal values; only boundary entries are consumed.
    dirichlet: Vec<f64>,
}

impl DiscreteProblem {
    /// Samples coefficient, boundary trace, and optional divergence data on
    /// the grid. Verifies the per-cell eigenvalue bounds against the
    /// declared ellipticity metadata.
    pub fn from_fields(
        grid: Grid,
        coefficient: &CoefficientField,
        boundary: &dyn Fn(&[f64]) -> f64,
        div_data: Option<&dyn Fn(&[f64]) -> [f64; 2]>,
    ) -> Result<Self> {
        if coefficient.n() != 2 || coefficient.components() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "solver scope is n=2, N=1; field `{}` has n={}, N={}",
                coefficient.name(),
                coefficient.n(),
                coefficient.components()
            )));
        }
        let cells = grid.cells();
        let mut coeff = Vec::with_capacity(cells * cells);
        let mut fdata = div_data.map(|_| Vec::with_capacity(cells * cells));
        let mut sample = [0.0f64; 3];
        for cj in 0..cells {
            for ci in 0..cells {
                let c = grid.cell_center(ci, cj);
                coefficient.matrix2(&c, &mut sample)?;
                let mean = 0.5 * (sample[0] + sample[2]);
                let disc = (0.25 * (sample[0] - sample[2]).powi(2) + sample[1] * sample[1]).sqrt();
                let min_eig = mean - disc;
                if min_eig < coefficient.ellipticity() * (1.0 - 1e-6) - 1e-12 {
                    return Err(CoreError::EllipticityViolation {
                        point: c.to_vec(),
                        detail: format!(
                            "cell eigenvalue {min_eig:.6e} under declared ellipticity {:.6e}",
                            coefficient.ellipticity()
                        ),
                    });
                }
                coeff.push(sample);
                if let (Some(fv), Some(ff)) = (fdata.as_mut(), div_data) {
                    fv.push(ff(&c));
                }
            }
        }
        let dirichlet = sample_boundary(&grid, boundary);
        Ok(Self {
            grid,
            coeff,
            div_data: fdata,
            dirichlet,
        })
    }

    /// Constant-coefficient problem (the replacement operator `Ā`).
    pub fn from_constant(
        grid: Grid,
        abar: [f64; 3],
        boundary: &dyn Fn(&[f64]) -> f64,
        div_data: Option<&dyn Fn(&[f64]) -> [f64; 2]>,
    ) -> Result<Self> {
        let mean = 0.5 * (abar[0] + abar[2]);
        let disc = (0.25 * (abar[0] - abar[2]).powi(2) + abar[1] * abar[1]).sqrt();
        if mean - disc <= 0.0 {
            return Err(CoreError::EllipticityViolation {
                point: vec![],
                detail: format!("constant matrix {abar:?} is not positive definite"),
            });
        }
        let cells = grid.cells();
        let coeff = vec![abar; cells * cells];
        let fdata = div_data.map(|ff| {
            let mut v = Vec::with_capacity(cells * cells);
            for cj in 0..cells {
                for ci in 0..cells {
                    v.push(ff(&grid.cell_center(ci, cj)));
                }
            }
            v
        });
        let dirichlet = sample_boundary(&grid, boundary);
        Ok(Self {
            grid,
            coeff,
            div_data: fdata,
            dirichlet,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficient_at_cell(&self, ci: usize, cj: usize) -> [f64; 3] {
        self.coeff[cj * self.grid.cells() + ci]
    }
}

fn sample_boundary(grid: &Grid, boundary: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let m = grid.nodes_per_side();
    let mut out = vec![0.0; grid.node_count()];
    for j in 0..m {
        for i in 0..m {
            if grid.is_boundary(i, j) {
                out[grid.node_index(i, j)] = boundary(&grid.node_coords(i, j));
            }
        }
    }
    out
}

/// Compressed sparse row matrix over the free (interior) nodes.
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut trip: Vec<(u32, u32, f64)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().expect("merged entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r as usize + 1] = cols.len();
                last = Some((r, c));
            }
        }
        // Carry the prefix sums across rows that received no entries.
        for r in 1..=n {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        Self {
            row_ptr,
            cols,
            vals,
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..out.len() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            out[r] = acc;
        }
    }

    fn diagonal(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] as usize == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Finite-element solution on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSolution {
    #[serde(skip)]
    grid_cells: usize,
    #[serde(skip)]
    grid_center: [f64; 2],
    #[serde(skip)]
    grid_half_side: f64,
    pub nodal: Vec<f64>,
    /// Gradient per cell, evaluated at the cell center.
    pub cell_grad: Vec<[f64; 2]>,
    /// True relative residual `‖Kx − b‖/‖b‖` after the solve.
    pub residual: f64,
    pub iterations: usize,
}

impl DiscreteSolution {
    pub fn grid(&self) -> Grid {
        Grid {
            cells: self.grid_cells,
            center: self.grid_center,
            half_side: self.grid_half_side,
        }
    }

    /// Bilinear interpolation of the nodal values.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let grid = self.grid();
        let (ci, cj) = grid.cell_of(x);
        let h = grid.h();
        let base = grid.node_coords(ci, cj);
        let xi = ((x[0] - base[0]) / h).clamp(0.0, 1.0);
        let eta = ((x[1] - base[1]) / h).clamp(0.0, 1.0);
        let n = |i: usize, j: usize| self.nodal[grid.node_index(i, j)];
        n(ci, cj) * (1.0 - xi) * (1.0 - eta)
            + n(ci + 1, cj) * xi * (1.0 - eta)
            + n(ci, cj + 1) * (1.0 - xi) * eta
            + n(ci + 1, cj + 1) * xi * eta
    }

    /// Cell-constant gradient at the cell containing `x`.
    pub fn grad_at(&self, x: &[f64]) -> [f64; 2] {
        let grid = self.grid();
        let (ci, cj) = grid.cell_of(x);
        self.cell_grad[cj * self.grid_cells + ci]
    }

    /// Gradient at the origin: average over the cells meeting it (interior
    /// grids place the origin on a node).
    pub fn grad_at_origin(&self) -> [f64; 2] {
        let grid = self.grid();
        let (ci, cj) = grid.cell_of(&[0.0, 0.0]);
        let mut acc = [0.0; 2];
        let mut count = 0.0;
        for dj in 0..2usize {
            for di in 0..2usize {
                let (i, j) = (ci.wrapping_sub(di), cj.wrapping_sub(dj));
                if i < self.grid_cells && j < self.grid_cells {
                    let g = self.cell_grad[j * self.grid_cells + i];
                    acc[0] += g[0];
                    acc[1] += g[1];
                    count += 1.0;
                }
            }
        }
        [acc[0] / count, acc[1] / count]
    }

    /// Iterator over `(cell center, gradient)` pairs.
    pub fn cell_gradients(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let grid = self.grid();
        (0..self.grid_cells * self.grid_cells).map(move |idx| {
            let ci = idx % self.grid_cells;
            let cj = idx / self.grid_cells;
            (grid.cell_center(ci, cj), self.cell_grad[idx])
        })
    }

    /// Discrete `⨍_{B_r(0)} |∇u_h|²` over cells with center in the ball.
    pub fn mean_grad_sq_in_ball(&self, radius: f64) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for (c, g) in self.cell_gradients() {
            if c[0] * c[0] + c[1] * c[1] <= radius * radius {
                acc += g[0] * g[0] + g[1] * g[1];
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            acc / count as f64
        }
    }

    /// Energy `Σ_cells (∇u)ᵀ A_cell (∇u) · h²` for the problem's samples.
    pub fn energy(&self, problem: &DiscreteProblem) -> f64 {
        let h2 = self.grid().h().powi(2);
        self.cell_grad
            .iter()
            .zip(&problem.coeff)
            .map(|(g, a)| (a[0] * g[0] * g[0] + 2.0 * a[1] * g[0] * g[1] + a[2] * g[1] * g[1]) * h2)
            .sum()
    }

    /// `Σ_cells |∇u_h|² · h²` (square of the H¹ seminorm).
    pub fn h1_seminorm_sq(&self) -> f64 {
        let h2 = self.grid().h().powi(2);
        self.cell_grad
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1]) * h2)
            .sum()
    }
}

/// Solver knobs shared by replacement and cascade runs.
#[derive(Debug, Clone)]
pub struct SolvePolicy {
    /// Cells per box side (power of two).
    pub cells: usize,
    /// CG relative-residual tolerance.
    pub tol: f64,
    /// CG iteration cap.
    pub max_iterations: usize,
}

impl Default for SolvePolicy {
    fn default() -> Self {
        Self {
            cells: 256,
            tol: 1e-10,
            max_iterations: 20_000,
        }
    }
}

/// Assembles the Q1 stiffness system and solves it by Jacobi-preconditioned
/// conjugate gradients to the requested relative residual.
pub fn assemble_and_solve(problem: &DiscreteProblem, policy: &SolvePolicy) -> Result<DiscreteSolution> {
    if !(policy.tol > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "solver tolerance must be positive, got {}",
            policy.tol
        )));
    }
    let grid = &problem.grid;
    let cells = grid.cells();
    let free_per_side = cells - 1;
    let nfree = free_per_side * free_per_side;
    let free_index = |i: usize, j: usize| -> Option<usize> {
        if i >= 1 && i <= cells - 1 && j >= 1 && j <= cells - 1 {
            Some((j - 1) * free_per_side + (i - 1))
        } else {
            None
        }
    };

    let em = element_matrices();
    let h = grid.h();
    let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(nfree * 9);
    let mut rhs = vec![0.0f64; nfree];

    for cj in 0..cells {
        for ci in 0..cells {
            let [p, q, s] = problem.coeff[cj * cells + ci];
            let mut ke = [[0.0f64; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    ke[a][b] = p * em.kxx[a][b]
                        + q * (em.kxy[a][b] + em.kyx[a][b])
                        + s * em.kyy[a][b];
                }
            }
            let locals = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)];
            for (a, &(ia, ja)) in locals.iter().enumerate() {
                let Some(fa) = free_index(ia, ja) else {
                    continue;
                };
                if let Some(f) = &problem.div_data {
                    let [f1, f2] = f[cj * cells + ci];
                    rhs[fa] += h * (f1 * em.bx[a] + f2 * em.by[a]);
                }
                for (b, &(ib, jb)) in locals.iter().enumerate() {
                    match free_index(ib, jb) {
                        Some(fb) => triplets.push((fa as u32, fb as u32, ke[a][b])),
                        None => {
                            let g = problem.dirichlet[grid.node_index(ib, jb)];
                            rhs[fa] -= ke[a][b] * g;
                        }
                    }
                }
            }
        }
    }

    let mat = Csr::from_triplets(nfree, triplets);
    let diag = mat.diagonal(nfree);
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(CoreError::EllipticityViolation {
            point: vec![],
            detail: "assembled stiffness has a non-positive diagonal entry".into(),
        });
    }

    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0f64; nfree];
    let mut iterations = 0usize;
    if bnorm > 0.0 {
        let mut r = rhs.clone();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(v, d)| v / d).collect();
        let mut pdir = z.clone();
        let mut q = vec![0.0f64; nfree];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        loop {
            mat.mul(&pdir, &mut q);
            let pq: f64 = pdir.iter().zip(&q).map(|(a, b)| a * b).sum();
            if !(pq > 0.0) {
                return Err(CoreError::SolverDiverged {
                    iterations,
                    residual: f64::NAN,
                    tolerance: policy.tol,
                });
            }
            let alpha = rz / pq;
            for k in 0..nfree {
                x[k] += alpha * pdir[k];
                r[k] -= alpha * q[k];
            }
            iterations += 1;
            let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm <= policy.tol * bnorm {
                break;
            }
            if iterations >= policy.max_iterations {
                return Err(CoreError::SolverDiverged {
                    iterations,
                    residual: rnorm / bnorm,
                    tolerance: policy.tol,
                });
            }
            for k in 0..nfree {
                z[k] = r[k] / diag[k];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..nfree {
                pdir[k] = z[k] + beta * pdir[k];
            }
        }
    }

    // True residual certificate.
    let mut check = vec![0.0f64; nfree];
    mat.mul(&x, &mut check);
    let true_res = check
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let residual = if bnorm > 0.0 { true_res / bnorm } else { 0.0 };

    // Full nodal vector: Dirichlet boundary + free interior.
    let mut nodal = problem.dirichlet.clone();
    for j in 1..cells {
        for i in 1..cells {
            nodal[grid.node_index(i, j)] = x[(j - 1) * free_per_side + (i - 1)];
        }
    }

    // Cell-center gradients of the bilinear interpolant.
    let mut cell_grad = Vec::with_capacity(cells * cells);
    for cj in 0..cells {
        for ci in 0..cells {
            let n00 = nodal[grid.node_index(ci, cj)];
            let n10 = nodal[grid.node_index(ci + 1, cj)];
            let n01 = nodal[grid.node_index(ci, cj + 1)];
            let n11 = nodal[grid.node_index(ci + 1, cj + 1)];
            cell_grad.push([
                ((n10 + n11) - (n00 + n01)) / (2.0 * h),
                ((n01 + n11) - (n00 + n10)) / (2.0 * h),
            ]);
        }
    }

    Ok(DiscreteSolution {
        grid_cells: cells,
        grid_center: grid.center,
        grid_half_side: grid.half_side,
        nodal,
        cell_grad,
        residual,
        iterations,
    })
}

/// Data driving a replacement comparison: a closed-form solution field or a
/// previously computed discrete solution.
pub enum UData<'a> {
    Field(&'a VectorSolutionField),
    Discrete(&'a DiscreteSolution),
}

impl UData<'_> {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            UData::Field(u) => u.evaluate(x)[0],
            UData::Discrete(s) => s.value_at(x),
        }
    }

    pub fn grad(&self, x: &[f64]) -> [f64; 2] {
        match self {
            UData::Field(u) => {
                let g = u.gradient(x);
                [g[0], g[1]]
            }
            UData::Discrete(s) => s.grad_at(x),
        }
    }
}

/// Outcome of a harmonic replacement at scale `R`.
#[derive(Debug, Clone, Serialize)]
pub struct ReplacementRecord {
    pub radius: f64,
    /// `‖∇(u − h)‖_{L²(B_{3R/2})}` (discrete, shared cell set).
    pub err_l2_grad: f64,
    /// Same error restricted to `B_R`.
    pub err_l2_grad_inner: f64,
    /// `‖f‖_{L²(B_{2R})}` (zero when no divergence data).
    pub f_norm: f64,
    /// `R^{−n/2}·‖A − Ā‖_{L²(B_{2R})}·‖∇u‖_{L²(B_{2R})}`.
    pub oscillation_term: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl ReplacementRecord {
    /// The structural right-hand side `‖f‖ + R^{−n/2}‖A−Ā‖‖∇u‖`, to be
    /// scaled by a fitted constant.
    pub fn rhs_structural(&self) -> f64 {
        self.f_norm + self.oscillation_term
    }
}

/// Solves `div(Ā ∇h) = 0` on the box around `B_{2R}` with `h = u` on the
/// box boundary and measures `‖∇(u − h)‖` plus the structural right-hand
/// side of the replacement bound.
pub fn harmonic_replacement(
    u: &UData,
    coefficient: Option<&CoefficientField>,
    abar: [f64; 3],
    big_r: f64,
    div_data: Option<&dyn Fn(&[f64]) -> [f64; 2]>,
    policy: &SolvePolicy,
) -> Result<ReplacementRecord> {
    let grid = Grid::for_ball(policy.cells, 2.0 * big_r)?;
    let boundary = |x: &[f64]| u.value(x);
    // The replacement solves the data-free constant-coefficient equation;
    // `div_data` only enters the right-hand-side norm below.
    let problem = DiscreteProblem::from_constant(grid, abar, &boundary, None)?;
    let sol = assemble_and_solve(&problem, policy)?;

    let mut err_32 = 0.0f64;
    let mut err_inner = 0.0f64;
    let mut n_32 = 0usize;
    let mut n_inner = 0usize;
    let mut f_sq = 0.0f64;
    let mut osc_sq = 0.0f64;
    let mut grad_sq = 0.0f64;
    let h2 = sol.grid().h().powi(2);
    let mut abuf = [0.0f64; 3];
    for (c, gh) in sol.cell_gradients() {
        let r2 = c[0] * c[0] + c[1] * c[1];
        let gu = u.grad(&c);
        let d2 = (gu[0] - gh[0]).powi(2) + (gu[1] - gh[1]).powi(2);
        if r2 <= (1.5 * big_r).powi(2) {
            err_32 += d2 * h2;
            n_32 += 1;
        }
        if r2 <= big_r * big_r {
            err_inner += d2 * h2;
            n_inner += 1;
        }
        // All cells lie inside the circumscribed box of B_{2R}; restrict the
        // RHS norms to the ball itself.
        if r2 <= (2.0 * big_r).powi(2) {
            if let Some(f) = div_data {
                let fv = f(&c);
                f_sq += (fv[0] * fv[0] + fv[1] * fv[1]) * h2;
            }
            if let Some(a) = coefficient {
                a.matrix2(&c, &mut abuf)?;
                let da = [abuf[0] - abar[0], abuf[1] - abar[1], abuf[2] - abar[2]];
                osc_sq += (da[0] * da[0] + 2.0 * da[1] * da[1] + da[2] * da[2]) * h2;
            }
            grad_sq += (gu[0] * gu[0] + gu[1] * gu[1]) * h2;
        }
    }
    if n_32 == 0 || n_inner == 0 {
        return Err(CoreError::Quadrature(
            "grid too coarse: no cell centers inside the measurement ball".into(),
        ));
    }
    Ok(ReplacementRecord {
        radius: big_r,
        err_l2_grad: err_32.sqrt(),
        err_l2_grad_inner: err_inner.sqrt(),
        f_norm: f_sq.sqrt(),
        oscillation_term: (1.0 / big_r) * osc_sq.sqrt() * grad_sq.sqrt(),
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// One level of the replacement cascade.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeLevel {
    pub k: usize,
    /// `R_k = 4^{−k}` exactly.
    pub radius: f64,
    /// `Ā_k = (A)_{B_{2R_k}}` as `[a11, a12, a22]`.
    pub abar: [f64; 3],
    /// `a_k = (⨍_{B_{R_k}} |∇(u − h_k)|²)^{1/2}`.
    pub a_value: f64,
    /// `b_k = max_{cells ⊂ B_{R_k}} |∇h_k|` (discrete lower bound of the sup).
    pub b_value: f64,
    /// `(⨍_{B_{R_k}} |∇u|²)^{1/2}` on the same cells (for the triangle check).
    pub u_rms: f64,
    /// `∇h_k(0)`.
    pub grad_at_origin: [f64; 2],
    pub iterations: usize,
    pub residual: f64,
}

/// The cascade record across levels `k = 0..=kMax`.
#[derive(Debug, Clone, Serialize)]
pub struct ReplacementSequence {
    pub levels: Vec<CascadeLevel>,
}

/// Witness constants extracted from a cascade against a modulus `ω`.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeWitness {
    /// `max_k a_{k+1} / (ω(2R_k)(a_k + b_k))`.
    pub c_error: f64,
    /// `max_k (b_{k+1} − b_k)_+ / (ω(2R_k)(a_k + b_k))`.
    pub c_growth: f64,
}

impl CascadeWitness {
    pub fn c(&self) -> f64 {
        self.c_error.max(self.c_growth)
    }
}

impl ReplacementSequence {
    /// Smallest constants making the level recursions
    /// `a_{k+1} ≤ C·ω(2R_k)(a_k + b_k)` and
    /// `b_{k+1} ≤ b_k + C·ω(2R_k)(a_k + b_k)` hold on the computed levels.
    pub fn recursion_witness(&self, omega: &dyn Fn(f64) -> f64) -> CascadeWitness {
        let mut c_error = 0.0f64;
        let mut c_growth = 0.0f64;
        for w in self.levels.windows(2) {
            let denom = omega(2.0 * w[0].radius) * (w[0].a_value + w[0].b_value);
            if denom > 0.0 {
                c_error = c_error.max(w[1].a_value / denom);
                c_growth = c_growth.max((w[1].b_value - w[0].b_value).max(0.0) / denom);
            } else if w[1].a_value > 0.0 {
                c_error = f64::INFINITY;
            }
        }
        CascadeWitness { c_error, c_growth }
    }

    /// Largest relative violation of the triangle bound
    /// `(⨍|∇u|²)^{1/2} ≤ a_k + b_k` across levels (`≤ 0` when it holds).
    pub fn triangle_slack(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| {
                let bound = l.a_value + l.b_value;
                if l.u_rms > 0.0 {
                    (l.u_rms - bound) / l.u_rms
                } else {
                    0.0
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the replacement cascade: per level `k`, a fresh grid over
/// `B_{2R_k}`, `Ā_k` from a ball average of `A`, one constant-coefficient
/// solve, and the `(a_k, b_k)` pair. Levels are independent and run in
/// parallel.
pub fn replacement_cascade(
    u: &VectorSolutionField,
    coefficient: &CoefficientField,
    k_max: usize,
    policy: &SolvePolicy,
) -> Result<ReplacementSequence> {
    if coefficient.n() != 2 || coefficient.components() != 1 {
        return Err(CoreError::InvalidArgument(
            "cascade scope is n=2, N=1".into(),
        ));
    }
    // Resolution policy: the finest ball must still contain grid cells.
    if 4f64.powi(-(k_max as i32)) < 16.0 * f64::EPSILON {
        return Err(CoreError::InvalidArgument(format!(
            "kMax = {k_max} underflows the grid resolution policy"
        )));
    }
    let levels: Result<Vec<CascadeLevel>> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let radius = 4f64.powi(-(k as i32));
            // Ā_k = (A)_{B_{2R_k}} by polar ball quadrature.
            let ball = BallSpec::origin(2, 2.0 * radius)?;
            let avg = crate::oscillation::ball_average(
                coefficient,
                &ball,
                &crate::oscillation::auto_rule(2.0 * radius),
            )?;
            let abar = [avg[0], 0.5 * (avg[1] + avg[2]), avg[3]];

            let grid = Grid::for_ball(policy.cells, 2.0 * radius)?;
            let boundary = |x: &[f64]| u.evaluate(x)[0];
            let problem = DiscreteProblem::from_constant(grid, abar, &boundary, None)?;
            let sol = assemble_and_solve(&problem, policy)?;
            let mut err_sq = 0.0f64;
            let mut u_sq = 0.0f64;
            let mut b_sup = 0.0f64;
            let mut count = 0usize;
            for (c, gh) in sol.cell_gradients() {
                if c[0] * c[0] + c[1] * c[1] <= radius * radius {
                    let gu = u.gradient(&c);
                    err_sq += (gu[0] - gh[0]).powi(2) + (gu[1] - gh[1]).powi(2);
                    u_sq += gu[0] * gu[0] + gu[1] * gu[1];
                    b_sup = b_sup.max((gh[0] * gh[0] + gh[1] * gh[1]).sqrt());
                    count += 1;
                }
            }
            if count == 0 {
                return Err(CoreError::Quadrature(format!(
                    "no cells inside B_{radius} at level {k}"
                )));
            }
            Ok(CascadeLevel {
                k,
                radius,
                abar,
                a_value: (err_sq / count as f64).sqrt(),
                b_value: b_sup,
                u_rms: (u_sq / count as f64).sqrt(),
                grad_at_origin: sol.grad_at_origin(),
                iterations: sol.iterations,
                residual: sol.residual,
            })
        })
        .collect();
    Ok(ReplacementSequence { levels: levels? })
}

/// Continuity diagnostics from a cascade: per-level `∇h_k(0)` and whether
/// the increments look summable.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub grad_at_origin: Vec<[f64; 2]>,
    /// `|∇h_{k+1}(0) − ∇h_k(0)|` per level pair.
    pub increments: Vec<f64>,
    /// True when increments trend down: at least 2/3 of consecutive steps
    /// decrease and the final increment is `≤ 0.5 ×` the first (or all are
    /// negligible).
    pub cauchy_trend: bool,
}

/// Extracts the gradient-at-origin Cauchy diagnostics from a cascade.
pub fn continuity_recovery(seq: &ReplacementSequence) -> ContinuityReport {
    let grads: Vec<[f64; 2]> = seq.levels.iter().map(|l| l.grad_at_origin).collect();
    let increments: Vec<f64> = grads
        .windows(2)
        .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
        .collect();
    let cauchy_trend = if increments.is_empty() {
        false
    } else if increments.iter().all(|&d| d < 1e-12) {
        true
    } else {
        let decreasing = increments.windows(2).filter(|w| w[1] <= w[0]).count();
        let enough = 3 * decreasing >= 2 * increments.len().saturating_sub(1);
        enough && increments[increments.len() - 1] <= 0.5 * increments[0]
    };
    ContinuityReport {
        grad_at_origin: grads,
        increments,
        cauchy_trend,
    }
}

/// Convenience: discrete L² norm of `u_h − reference` over all cells
/// (midpoint sampling), used by convergence tests.
pub fn l2_error_against(sol: &DiscreteSolution, reference: &dyn Fn(&[f64]) -> f64) -> f64 {
    let grid = sol.grid();
    let h2 = grid.h().powi(2);
    let mut acc = 0.0;
    for cj in 0..grid.cells() {
        for ci in 0..grid.cells() {
            let c = grid.cell_center(ci, cj);
            let d = sol.value_at(&c) - reference(&c);
            acc += d * d * h2;
        }
    }
    acc.sqrt()
}

/// Convenience used by tests: a constant-coefficient Dirichlet solve on a
/// fresh ball grid with boundary data from a closure.
pub fn solve_constant_dirichlet(
    abar: [f64; 3],
    two_r: f64,
    cells: usize,
    boundary: &dyn Fn(&[f64]) -> f64,
    div_data: Option<&dyn Fn(&[f64]) -> [f64; 2]>,
    tol: f64,
) -> Result<DiscreteSolution> {
    let grid = Grid::for_ball(cells, two_r)?;
    let problem = DiscreteProblem::from_constant(grid, abar, boundary, div_data)?;
    assemble_and_solve(
        &problem,
        &SolvePolicy {
            cells,
            tol,
            max_iterations: 20_000,
        },
    )
}
