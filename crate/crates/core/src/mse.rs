//! The minimal surface operator `(1+|Du|²)Δu - Duᵀ D²u Du`, a damped Newton
//! solver for its Dirichlet problem, exact solutions, and the one-sided
//! touching test used to probe viscosity solutions.

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{derivatives, Grid, GridError, GridFunction, NodeKind};
use crate::scalar::Scalar;
use crate::sparse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MseError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("Newton did not converge after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("linear solve failed: {0}")]
    Linear(String),
    #[error("Scherk surface needs a 2-dimensional base and 0 < scale·radius ≤ 1.4, got scale {scale}, radius {radius}")]
    ScherkDomain { scale: f64, radius: f64 },
    #[error("touching hypothesis violated at node {node}: gap {gap:e}")]
    TouchViolated { node: usize, gap: f64 },
    #[error("boundary data unavailable at {0:?}")]
    BoundaryData([f64; 2]),
    #[error("boundary data not finite at node {0}")]
    NonFinite(usize),
}

/// The operator applied to a gradient and Hessian.
pub fn mse_operator<T: Scalar>(g: [T; 2], h: [[T; 2]; 2]) -> T {
    let lap = h[0][0] + h[1][1];
    let norm2 = g[0] * g[0] + g[1] * g[1];
    let quad = g[0] * g[0] * h[0][0] + T::cst(2.0) * g[0] * g[1] * h[0][1] + g[1] * g[1] * h[1][1];
    (T::one() + norm2) * lap - quad
}

fn residual_at<T: Scalar>(grid: &Grid<T>, v: &[T], idx: usize) -> T {
    let (g, h) = derivatives(grid, v, idx);
    mse_operator(g, h)
}

/// Operator value at every interior node; NaN elsewhere.
pub fn mse_residual<T: Scalar>(u: &GridFunction<T>) -> GridFunction<T> {
    let grid = u.grid();
    let values = (0..grid.len())
        .map(|i| {
            if grid.kind(i) == NodeKind::Interior {
                residual_at(grid, u.values(), i)
            } else {
                T::nan()
            }
        })
        .collect();
    GridFunction::new(grid.clone(), values).expect("length matches grid")
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    /// Residual tolerance, clipped below by [`rounding_floor`]; `None`
    /// selects [`default_tolerance`].
    pub tol: Option<T>,
    pub max_iter: usize,
}

impl<T> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions { tol: None, max_iter: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct MseSolution<T> {
    pub u: GridFunction<T>,
    pub iterations: usize,
    /// Final interior `max |F|`.
    pub residual: T,
    pub tol: T,
}

/// `10⁻¹⁰ (1 + osc g)`, raised to [`rounding_floor`] when the scalar type
/// cannot reach it.
pub fn default_tolerance<T: Scalar>(boundary: &GridFunction<T>) -> T {
    let (osc, floor) = boundary_scales(boundary);
    (T::cst(1e-10) * (T::one() + osc)).max(floor)
}

/// Rounding floor `8 ε max(|g|∞, 1) / h²` of the discrete operator; no
/// tolerance below it is honoured.
pub fn rounding_floor<T: Scalar>(boundary: &GridFunction<T>) -> T {
    boundary_scales(boundary).1
}

fn boundary_scales<T: Scalar>(boundary: &GridFunction<T>) -> (T, T) {
    let grid = boundary.grid();
    let (lo, hi, sup) = grid.boundary_nodes().iter().fold(
        (T::infinity(), T::neg_infinity(), T::zero()),
        |(lo, hi, s), &i| {
            let v = boundary.value(i);
            (lo.min(v), hi.max(v), s.max(v.abs()))
        },
    );
    let osc = if hi >= lo { hi - lo } else { T::zero() };
    let floor = T::cst(8.0) * T::epsilon() * sup.max(T::one()) / (grid.h() * grid.h());
    (osc, floor)
}

struct Unknowns {
    nodes: Vec<usize>,
    slot: Vec<usize>,
}

impl Unknowns {
    fn new<T: Scalar>(grid: &Grid<T>) -> Self {
        let nodes = grid.interior_nodes();
        let mut slot = vec![usize::MAX; grid.len()];
        for (k, &i) in nodes.iter().enumerate() {
            slot[i] = k;
        }
        Unknowns { nodes, slot }
    }
}

fn check_boundary<T: Scalar>(b: &GridFunction<T>) -> Result<(), MseError> {
    match b.grid().boundary_nodes().into_iter().find(|&i| !b.value(i).is_finite()) {
        Some(i) => Err(MseError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Discrete harmonic extension of the boundary ring (five-point Laplacian).
pub fn harmonic_extension<T: Scalar>(boundary: &GridFunction<T>) -> Result<GridFunction<T>, MseError> {
    check_boundary(boundary)?;
    let grid = boundary.grid().clone();
    let unk = Unknowns::new(&grid);
    let d = grid.base_dim();
    let strides = grid.strides();
    let mut entries = Vec::with_capacity(unk.nodes.len() * (2 * d + 1));
    let mut rhs = vec![0.0; unk.nodes.len()];
    for (r, &i) in unk.nodes.iter().enumerate() {
        entries.push((r, r, -2.0 * d as f64));
        for &s in strides.iter().take(d) {
            for j in [i + s, i - s] {
                match unk.slot[j] {
                    usize::MAX => rhs[r] -= boundary.value(j).as_f64(),
                    c => entries.push((r, c, 1.0)),
                }
            }
        }
    }
    let x = sparse::solve(unk.nodes.len(), &entries, &rhs).map_err(MseError::Linear)?;
    let mut out = boundary.clone();
    for (k, &i) in unk.nodes.iter().enumerate() {
        out.set(i, T::cst(x[k]));
    }
    Ok(out)
}

fn jacobian<T: Scalar>(grid: &Grid<T>, v: &[T], unk: &Unknowns) -> Vec<(usize, usize, f64)> {
    let h = grid.h().as_f64();
    let h2 = h * h;
    let [s0, s1] = grid.strides();
    let two_d = grid.base_dim() == 2;
    let mut entries = Vec::with_capacity(unk.nodes.len() * 9);
    for (r, &i) in unk.nodes.iter().enumerate() {
        let (g, hs) = derivatives(grid, v, i);
        let (g0, g1) = (g[0].as_f64(), g[1].as_f64());
        let (h00, h01, h11) = (hs[0][0].as_f64(), hs[0][1].as_f64(), hs[1][1].as_f64());
        let a00 = 1.0 + g1 * g1;
        let a11 = 1.0 + g0 * g0;
        let a01 = -2.0 * g0 * g1;
        let b0 = 2.0 * g0 * h11 - 2.0 * g1 * h01;
        let b1 = 2.0 * g1 * h00 - 2.0 * g0 * h01;
        let mut push = |j: usize, val: f64| {
            if unk.slot[j] != usize::MAX && val != 0.0 {
                entries.push((r, unk.slot[j], val));
            }
        };
        push(i, -2.0 * a00 / h2 - if two_d { 2.0 * a11 / h2 } else { 0.0 });
        push(i + s0, a00 / h2 + b0 / (2.0 * h));
        push(i - s0, a00 / h2 - b0 / (2.0 * h));
        if two_d {
            push(i + s1, a11 / h2 + b1 / (2.0 * h));
            push(i - s1, a11 / h2 - b1 / (2.0 * h));
            let q = a01 / (4.0 * h2);
            push(i + s0 + s1, q);
            push(i + s0 - s1, -q);
            push(i - s0 + s1, -q);
            push(i - s0 - s1, q);
        }
    }
    entries
}

fn residuals<T: Scalar>(grid: &Grid<T>, v: &[T], unk: &Unknowns) -> Vec<T> {
    unk.nodes.iter().map(|&i| residual_at(grid, v, i)).collect()
}

fn max_abs<T: Scalar>(f: &[T]) -> T {
    f.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn norm2<T: Scalar>(f: &[T]) -> f64 {
    f.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt()
}

/// Solves the Dirichlet problem with the boundary ring of `boundary` as data,
/// by Newton's method on the discrete operator with step halving on the
/// residual 2-norm, starting from the harmonic extension.
pub fn solve_mse<T: Scalar>(boundary: &GridFunction<T>, opts: &SolveOptions<T>) -> Result<MseSolution<T>, MseError> {
    let tol = opts
        .tol
        .map_or_else(|| default_tolerance(boundary), |t| t.max(rounding_floor(boundary)));
    let mut u = harmonic_extension(boundary)?;
    let grid = u.grid().clone();
    let unk = Unknowns::new(&grid);
    if unk.nodes.is_empty() {
        return Ok(MseSolution {
            u,
            iterations: 0,
            residual: T::zero(),
            tol,
        });
    }
    let mut vals = u.values().to_vec();
    let mut f = residuals(&grid, &vals, &unk);
    for it in 0..=opts.max_iter {
        let fmax = max_abs(&f);
        if fmax <= tol {
            for &i in &unk.nodes {
                u.set(i, vals[i]);
            }
            return Ok(MseSolution {
                u,
                iterations: it,
                residual: fmax,
                tol,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let entries = jacobian(&grid, &vals, &unk);
        let rhs: Vec<f64> = f.iter().map(|v| -v.as_f64()).collect();
        let delta = sparse::solve(unk.nodes.len(), &entries, &rhs).map_err(MseError::Linear)?;
        let n0 = norm2(&f);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = vals.clone();
            for (k, &i) in unk.nodes.iter().enumerate() {
                trial[i] = vals[i] + T::cst(lambda * delta[k]);
            }
            let ft = residuals(&grid, &trial, &unk);
            if norm2(&ft) < n0 {
                vals = trial;
                f = ft;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(MseError::NonConvergence {
                iterations: it + 1,
                residual: fmax.as_f64(),
            });
        }
    }
    Err(MseError::NonConvergence {
        iterations: opts.max_iter,
        residual: max_abs(&f).as_f64(),
    })
}

/// Solves on the grid `grid` with boundary values supplied by `data`.
pub fn solve_with_data<T: Scalar>(
    grid: Arc<Grid<T>>,
    data: impl Fn([T; 2]) -> Option<T>,
    opts: &SolveOptions<T>,
) -> Result<MseSolution<T>, MseError> {
    let mut values = vec![T::zero(); grid.len()];
    for i in grid.boundary_nodes() {
        let x = grid.coord(i);
        values[i] = data(x).ok_or(MseError::BoundaryData([x[0].as_f64(), x[1].as_f64()]))?;
    }
    let b = GridFunction::new(grid, values)?;
    solve_mse(&b, opts)
}

/// Re-solves on the ball `B'_radius(center)` at spacing `h`, with boundary
/// data interpolated from `u`. The result is expressed in coordinates
/// centered at `center`.
pub fn solve_patch<T: Scalar>(
    u: &GridFunction<T>,
    center: [T; 2],
    radius: T,
    h: T,
    opts: &SolveOptions<T>,
) -> Result<MseSolution<T>, MseError> {
    let grid = Arc::new(Grid::new(u.grid().base_dim(), radius, h)?);
    solve_with_data(grid, |x| u.interpolate([center[0] + x[0], center[1] + x[1]]), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactKind<T> {
    /// `a·x' + b`.
    Affine { slope: [T; 2], offset: T },
    /// `(1/s) log(cos(s x₁)/cos(s x₂))`.
    Scherk { scale: T },
}

impl<T: Scalar> ExactKind<T> {
    pub fn eval(&self, x: [T; 2]) -> T {
        match *self {
            ExactKind::Affine { slope, offset } => slope[0] * x[0] + slope[1] * x[1] + offset,
            ExactKind::Scherk { scale } => ((scale * x[0]).cos() / (scale * x[1]).cos()).ln() / scale,
        }
    }
}

/// Samples an exact solution on `grid`.
pub fn exact_solution<T: Scalar>(kind: ExactKind<T>, grid: Arc<Grid<T>>) -> Result<GridFunction<T>, MseError> {
    if let ExactKind::Scherk { scale } = kind {
        let r = grid.radius();
        if grid.base_dim() != 2 || !(scale > T::zero()) || scale * r > T::cst(1.4) {
            return Err(MseError::ScherkDomain {
                scale: scale.as_f64(),
                radius: r.as_f64(),
            });
        }
    }
    Ok(GridFunction::from_fn(grid, |x| kind.eval(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `φ ≥ surface` near the touching point.
    Above,
    /// `φ ≤ surface` near the touching point.
    Below,
}

/// Which side of the surface holds the test region. `E` is the subgraph of
/// the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    E,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityVerdict<T> {
    pub side: Side,
    pub containment: Containment,
    pub touch: usize,
    pub operator_value: T,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TouchOptions<T> {
    /// Neighbourhood radius on which one-signedness is checked.
    pub radius: T,
    /// Slack on the operator sign.
    pub tol: T,
    /// Slack on the contact and one-signedness conditions.
    pub touch_tol: T,
}

/// Checks that `phi` touches `surface` from `side` at node `touch` and
/// evaluates the operator on `phi` there. From below the subgraph of `phi`
/// lies in `E` and the operator must be `≤ tol`; from above the supergraph of
/// `phi` lies in `Eᶜ` and the operator must be `≥ -tol`.
pub fn viscosity_touch_check<T: Scalar>(
    surface: &GridFunction<T>,
    phi: &GridFunction<T>,
    side: Side,
    touch: usize,
    opts: &TouchOptions<T>,
) -> Result<ViscosityVerdict<T>, MseError> {
    surface.check_same(phi)?;
    let grid = surface.grid();
    if touch >= grid.len() || grid.kind(touch) != NodeKind::Interior {
        return Err(GridError::NotInterior(touch).into());
    }
    let contact = phi.value(touch) - surface.value(touch);
    if contact.abs() > opts.touch_tol {
        return Err(MseError::TouchViolated {
            node: touch,
            gap: contact.as_f64(),
        });
    }
    for j in surface.sampled_in_ball(grid.coord(touch), opts.radius) {
        let gap = phi.value(j) - surface.value(j);
        let bad = match side {
            Side::Below => gap > opts.touch_tol,
            Side::Above => gap < -opts.touch_tol,
        };
        if bad {
            return Err(MseError::TouchViolated {
                node: j,
                gap: gap.as_f64(),
            });
        }
    }
    let (g, h) = derivatives(grid, phi.values(), touch);
    let value = mse_operator(g, h);
    let (containment, satisfied) = match side {
        Side::Below => (Containment::E, value <= opts.tol),
        Side::Above => (Containment::Complement, value >= -opts.tol),
    };
    Ok(ViscosityVerdict {
        side,
        containment,
        touch,
        operator_value: value,
        satisfied,
    })
}
