//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use flatcert::envelope::MultiGraph;
use flatcert::grid::{Grid, GridFunction};
use flatcert::harmonic::PoissonOptions;
use flatcert::ledger::{derive_ledger, Constants, HarnackParams};
use flatcert::mse::{solve_with_data, SolveOptions};
use flatcert::pipeline::PipelineOptions;

/// Flatness values of the sandwich/closeness/certificate runs.
pub const EPS_RUNS: [f64; 3] = [0.03162277660168379, 0.01, 0.0031622776601683794];

pub fn disk(radius: f64, nodes: usize) -> Arc<Grid<f64>> {
    Arc::new(Grid::with_nodes_per_diameter(2, radius, nodes).unwrap())
}

pub fn params() -> HarnackParams<f64> {
    HarnackParams::new(3, 0.25, 0.2).unwrap()
}

pub fn consts() -> Constants<f64> {
    derive_ledger(&params()).unwrap().constants()
}

/// Odd, smooth, non-affine boundary data with `sup ≤ 0.81 eps` on the unit
/// disk.
pub fn odd_data(eps: f64) -> impl Fn([f64; 2]) -> Option<f64> {
    move |x: [f64; 2]| Some(eps * (0.3 * x[0] - 0.2 * x[1] + 0.45 * (x[0].powi(3) - 3.0 * x[0] * x[1] * x[1])))
}

/// Data with an even quadratic component.
pub fn generic_data(eps: f64) -> impl Fn([f64; 2]) -> Option<f64> {
    move |x: [f64; 2]| Some(eps * (0.3 * x[0] + 0.4 * (x[0] * x[0] - x[1] * x[1]) + 0.2 * x[0] * x[1]))
}

pub fn tight_solve() -> SolveOptions<f64> {
    SolveOptions { tol: Some(1e-13), max_iter: 50 }
}

pub fn solved_graph(eps: f64, nodes: usize) -> GridFunction<f64> {
    solve_with_data(disk(1.0, nodes), odd_data(eps), &tight_solve()).unwrap().u
}

pub fn pipeline_options() -> PipelineOptions<f64> {
    let d = PipelineOptions::default();
    PipelineOptions {
        mse: tight_solve(),
        poisson: PoissonOptions { tol: 1e-13, ..d.poisson },
        ..d
    }
}

/// `max |f(x) - f(y)| / (h √m)^σ` over pairs `i < j` of `nodes`, first
/// maximizing pair kept.
pub fn brute_holder(f: &GridFunction<f64>, sigma: f64, nodes: &[usize]) -> (f64, (usize, usize)) {
    let g = f.grid();
    let mut best = (0.0, (nodes[0], nodes[1]));
    let mut first = true;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let (i, j) = (nodes[a], nodes[b]);
            let ki = g.offset(i);
            let kj = g.offset(j);
            let m = ((ki[0] - kj[0]).pow(2) + (ki[1] - kj[1]).pow(2)) as f64;
            let q = (f.value(i) - f.value(j)).abs() / (g.h() * m.sqrt()).powf(sigma);
            if first || q > best.0 {
                best = (q, (i, j));
                first = false;
            }
        }
    }
    best
}

/// Inf-convolution by a double loop over the nodes of `B'_{3/4}`.
pub fn brute_inf_convolve(mg: &MultiGraph<f64>, k: f64, alpha: f64) -> Vec<(usize, f64, usize)> {
    let g = mg.grid();
    let nodes = g.nodes_in_ball([0.0, 0.0], 0.75);
    let mut out = Vec::new();
    for &i in &nodes {
        let mut best = (f64::INFINITY, usize::MAX);
        for &j in &nodes {
            let v = mg.lower.value(j);
            if !v.is_finite() {
                continue;
            }
            let ki = g.offset(i);
            let kj = g.offset(j);
            let m = ((ki[0] - kj[0]).pow(2) + (ki[1] - kj[1]).pow(2)) as f64;
            let c = v / mg.eps_eff + k * (g.h() * m.sqrt()).powf(alpha);
            if c < best.0 {
                best = (c, j);
            }
        }
        out.push((i, best.0, best.1));
    }
    out
}

/// Smallest-index minimizer of `values` over `nodes`.
pub fn brute_argmin(values: impl Fn(usize) -> f64, nodes: &[usize]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for &i in nodes {
        let v = values(i);
        if v < best.1 || (v == best.1 && i < best.0) {
            best = (i, v);
        }
    }
    best
}
