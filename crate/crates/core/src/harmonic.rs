//! Poisson solves on balls, the barrier pair trapping the regularized graph,
//! harmonic replacement with its closeness bound, the sliding-paraboloid
//! touching test, and interior/boundary estimates for harmonic functions.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{argmin_over, dist, GridError, GridFunction, NodeKind};
use crate::ledger::{Constants, ThresholdKind};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("relaxation did not converge after {sweeps} sweeps (error bound {bound:e})")]
    NonConvergence { sweeps: usize, bound: f64 },
    #[error("boundary data not finite at node {0}")]
    NonFinite(usize),
    #[error("log2 eps = {eps_log2} exceeds the barrier threshold {threshold_log2}")]
    Threshold { eps_log2: f64, threshold_log2: f64 },
    #[error("derivative cap violated at node {node}: {value:e} > {cap:e} ({what})")]
    DerivativeCap {
        node: usize,
        value: f64,
        cap: f64,
        what: &'static str,
    },
    #[error("minimizer at node {node} lies on the boundary of the scan ball")]
    TouchOnBoundary { node: usize },
    #[error("touching hypothesis violated at node {node}: gap {gap:e}")]
    Hypothesis { node: usize, gap: f64 },
    #[error("ball of radius {rho} around node {node} leaves the domain")]
    BallExits { node: usize, rho: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct PoissonOptions<T> {
    /// Target for the certified error bound, relative to the data scale.
    pub tol: T,
    pub max_sweeps: usize,
}

impl<T: Scalar> Default for PoissonOptions<T> {
    fn default() -> Self {
        PoissonOptions {
            tol: T::cst(1e-12),
            max_sweeps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution<T> {
    /// The solution, `harmonic + particular`.
    pub w: GridFunction<T>,
    /// Harmonic part, with boundary data `g - particular`.
    pub harmonic: GridFunction<T>,
    /// Explicit quadratic `(c/2d)(|x|² - R²)`.
    pub particular: GridFunction<T>,
    pub sweeps: usize,
    /// Sup-norm bound on the error of the harmonic part against the exact
    /// discrete solution, `R²/(2d) · max |Δ_h v|`.
    pub error_bound: T,
    /// Whether the harmonic part stays within its boundary extremes.
    pub max_principle: bool,
}

/// Solves `Δw = c` with `w = g` on the boundary ring of `boundary`'s grid.
///
/// The quadratic `(c/2d)(|x|² - R²)` absorbs the source and the remaining
/// Laplace problem is relaxed by red-black SOR until the discrete maximum
/// principle bound `R²/(2d) · max |Δ_h v|` drops below `tol · scale`, or to
/// the rounding floor `64 ε max|v| / h²` of the stencil if that is larger.
pub fn solve_poisson_ball<T: Scalar>(
    c: T,
    boundary: &GridFunction<T>,
    opts: &PoissonOptions<T>,
) -> Result<PoissonSolution<T>, HarmonicError> {
    let grid = boundary.grid().clone();
    let d = T::from_usize_(grid.base_dim());
    let r = grid.radius();
    let particular = GridFunction::from_fn(grid.clone(), |x| c / (T::cst(2.0) * d) * (x[0] * x[0] + x[1] * x[1] - r * r));
    let ring = grid.boundary_nodes();
    let interior = grid.interior_nodes();
    let mut v = vec![T::nan(); grid.len()];
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for &i in &ring {
        let g = boundary.value(i);
        if !g.is_finite() {
            return Err(HarmonicError::NonFinite(i));
        }
        v[i] = g - particular.value(i);
        lo = lo.min(v[i]);
        hi = hi.max(v[i]);
    }
    // Relax the deviation from the mid-range constant, which is harmonic and
    // may dominate the data (barrier lifts), so the stencil rounds at the
    // scale of the oscillation.
    let mean = if ring.is_empty() { T::zero() } else { (lo + hi) / T::cst(2.0) };
    for &i in &ring {
        v[i] -= mean;
    }
    for &i in &interior {
        v[i] = T::zero();
    }
    let (lo, hi) = (lo - mean, hi - mean);
    let scale = hi.max(c.abs() * r * r).max(T::min_positive_value());
    let h = grid.h();
    let bound_factor = r * r / (T::cst(2.0) * d);
    let strides = grid.strides();
    let dim = grid.base_dim();
    let laplace = |v: &[T], i: usize| {
        let mut acc = T::zero();
        for &s in strides.iter().take(dim) {
            acc += v[i + s] + v[i - s];
        }
        (acc - T::cst(2.0) * d * v[i]) / (h * h)
    };
    let colors: [Vec<usize>; 2] = {
        let (red, black): (Vec<usize>, Vec<usize>) = interior.iter().partition(|&&i| {
            let k = grid.offset(i);
            (k[0] + k[1]).rem_euclid(2) == 0
        });
        [red, black]
    };
    let pi = T::cst(std::f64::consts::PI);
    let omega = T::cst(2.0) / (T::one() + (pi * h / (T::cst(2.0) * r)).sin());
    let mut sweeps = 0;
    let mut bound;
    loop {
        let res = interior.iter().fold(T::zero(), |m, &i| m.max(laplace(&v, i).abs()));
        bound = bound_factor * res;
        let vmax = interior.iter().fold(hi.abs().max(lo.abs()), |m, &i| m.max(v[i].abs()));
        let floor = bound_factor * T::cst(64.0) * T::epsilon() * vmax / (h * h);
        if bound <= opts.tol * scale || bound <= floor || interior.is_empty() {
            break;
        }
        if sweeps >= opts.max_sweeps {
            return Err(HarmonicError::NonConvergence {
                sweeps,
                bound: bound.as_f64(),
            });
        }
        for _ in 0..10 {
            for color in &colors {
                let updates: Vec<T> = color
                    .par_iter()
                    .map(|&i| {
                        let mut acc = T::zero();
                        for &s in strides.iter().take(dim) {
                            acc += v[i + s] + v[i - s];
                        }
                        let gs = acc / (T::cst(2.0) * d);
                        v[i] + omega * (gs - v[i])
                    })
                    .collect();
                for (&i, u) in color.iter().zip(updates) {
                    v[i] = u;
                }
            }
            sweeps += 1;
        }
    }
    let tol = bound + T::epsilon() * T::cst(16.0) * scale;
    let max_principle = interior.iter().all(|&i| v[i] <= hi + tol && v[i] >= lo - tol);
    for &i in ring.iter().chain(&interior) {
        v[i] += mean;
    }
    let harmonic = GridFunction::new(grid.clone(), v)?;
    let w = harmonic.zip_map(&particular, |a, b| a + b)?;
    Ok(PoissonSolution {
        w,
        harmonic,
        particular,
        sweeps,
        error_bound: bound,
        max_principle,
    })
}

/// Measured and bounded norms of the boundary Hölder estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCheck<T> {
    /// `sup |w| + [w]_{σ/2}` in the unit-ball frame.
    pub measured: T,
    /// `2n 5^σ (sup |g| + [g]_σ)` in the unit-ball frame, boundary ring only.
    pub bound: T,
    pub verdict: bool,
}

/// Compares the `C^{σ/2}` norm of `w` on its closed ball against
/// `2n 5^σ ‖g‖_{C^σ}` on the boundary ring, after dilating the ball of radius
/// `R` to the unit ball (seminorms pick up `R^s`). Here `n = baseDim + 1`.
pub fn boundary_holder_check<T: Scalar>(
    w: &GridFunction<T>,
    g: &GridFunction<T>,
    sigma: T,
) -> Result<HolderCheck<T>, HarmonicError> {
    w.check_same(g)?;
    let grid = w.grid();
    let r = grid.radius();
    let half = sigma / T::cst(2.0);
    let nodes = w.sampled_in_ball([T::zero(); 2], r);
    let w_semi = w.holder_seminorm_on(half, &nodes)?.value;
    let measured = w.sup_norm() + r.powf(half) * w_semi;
    let ring = grid.boundary_nodes();
    let g_sup = ring.iter().fold(T::zero(), |m, &i| m.max(g.value(i).abs()));
    let g_semi = g.holder_seminorm_on(sigma, &ring)?.value;
    let n = T::from_usize_(grid.base_dim() + 1);
    let bound = T::cst(2.0) * n * T::cst(5.0).powf(sigma) * (g_sup + r.powf(sigma) * g_semi);
    Ok(HolderCheck {
        measured,
        bound,
        verdict: measured <= bound,
    })
}

/// Gradient and second-derivative caps measured at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMeasure<T> {
    pub max_first: T,
    pub max_second: T,
    /// Operator norm of the Hessian.
    pub hessian_norm: T,
}

fn cap_measure<T: Scalar>(f: &GridFunction<T>, i: usize) -> Result<CapMeasure<T>, GridError> {
    let g = f.gradient(i)?;
    let h = f.hessian(i)?;
    let max_first = g[0].abs().max(g[1].abs());
    let max_second = h[0][0].abs().max(h[1][1].abs()).max(h[0][1].abs());
    // Eigenvalues of a symmetric 2x2 matrix.
    let tr = (h[0][0] + h[1][1]) / T::cst(2.0);
    let disc = (((h[0][0] - h[1][1]) / T::cst(2.0)).powi(2) + h[0][1] * h[0][1]).sqrt();
    let hessian_norm = (tr + disc).abs().max((tr - disc).abs());
    Ok(CapMeasure {
        max_first,
        max_second,
        hessian_norm,
    })
}

/// Derivative caps on the barrier, its harmonic part and its quadratic part,
/// with the worst node of each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapReport<T> {
    /// `ε^(-1/2)`.
    pub cap: T,
    /// `max{|Dw|, sup|D_ij w|, |D²w|}` over `B'_{1/2-r}`.
    pub full: T,
    pub full_node: usize,
    /// `max{sup|D_i (w)_1|, sup|D_ij (w)_1|}`, capped by `ε^(-1/2)/(2n²)`.
    pub harmonic_part: T,
    pub harmonic_node: usize,
    /// Same for the quadratic part.
    pub quadratic_part: T,
    pub split_cap: T,
    /// Nodes in `B'_{1/2-r}`; zero whenever `r ≥ 1/2`, and the caps then hold
    /// vacuously.
    pub region_nodes: usize,
    /// `max{|Dw|, sup|D_ij w|, |D²w|}` over every interior node, for
    /// reference when the region is empty.
    pub interior_full: T,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Hypothesis or cap violations are errors.
    Strict,
    /// Violations are recorded in the result.
    Report,
}

#[derive(Debug, Clone)]
pub struct BarrierPair<T> {
    pub w_plus: PoissonSolution<T>,
    pub w_minus: PoissonSolution<T>,
    /// `r = ε^(γα/4)`.
    pub r: T,
    /// `δ = 4C₃ε^(1+γα/2)`.
    pub delta_slide: T,
    /// `ε^(-1/2)`.
    pub derivative_cap: T,
    /// Boundary lift `4C₅ r^(α/2)`.
    pub lift: T,
    /// Source magnitude `2C₄ε^(γα/2)`.
    pub source: T,
    pub caps_plus: CapReport<T>,
    pub caps_minus: CapReport<T>,
    /// Whether `eps ≤ T_barrier`.
    pub threshold_ok: bool,
}

fn caps<T: Scalar>(sol: &PoissonSolution<T>, r: T, cap: T, n: T) -> Result<CapReport<T>, GridError> {
    let grid = sol.w.grid();
    let nodes: Vec<usize> = grid
        .nodes_in_ball([T::zero(); 2], grid.radius() - r)
        .into_iter()
        .filter(|&i| grid.kind(i) == NodeKind::Interior)
        .collect();
    let mut full = (T::zero(), grid.origin());
    let mut harm = (T::zero(), grid.origin());
    let mut quad = T::zero();
    for &i in &nodes {
        let m = cap_measure(&sol.w, i)?;
        let v = m.max_first.max(m.max_second).max(m.hessian_norm);
        if v > full.0 {
            full = (v, i);
        }
        let mh = cap_measure(&sol.harmonic, i)?;
        let vh = mh.max_first.max(mh.max_second);
        if vh > harm.0 {
            harm = (vh, i);
        }
        let mq = cap_measure(&sol.particular, i)?;
        quad = quad.max(mq.max_first.max(mq.max_second));
    }
    let mut interior_full = T::zero();
    for i in grid.interior_nodes() {
        let m = cap_measure(&sol.w, i)?;
        interior_full = interior_full.max(m.max_first.max(m.max_second).max(m.hessian_norm));
    }
    let split_cap = cap / (T::cst(2.0) * n * n);
    Ok(CapReport {
        cap,
        full: full.0,
        full_node: full.1,
        harmonic_part: harm.0,
        harmonic_node: harm.1,
        quadratic_part: quad,
        split_cap,
        region_nodes: nodes.len(),
        interior_full,
        holds: full.0 <= cap && harm.0 <= split_cap && quad <= split_cap,
    })
}

/// Radius of the barrier and replacement domain.
pub fn barrier_radius<T: Scalar>() -> T {
    T::cst(0.5)
}

/// Solves `Δw± = ∓2C₄ε^(γα/2)` on `B'_{1/2}` with `w± = u ± 4C₅r^(α/2)` on the
/// ring, and measures the derivative caps on `B'_{1/2-r}`.
pub fn build_barriers<T: Scalar>(
    u: &GridFunction<T>,
    eps: T,
    consts: &Constants<T>,
    mode: CheckMode,
    opts: &PoissonOptions<T>,
) -> Result<BarrierPair<T>, HarmonicError> {
    let threshold_ok = consts.below_threshold(eps, ThresholdKind::Barrier);
    if mode == CheckMode::Strict && !threshold_ok {
        return Err(HarmonicError::Threshold {
            eps_log2: eps.as_f64().log2(),
            threshold_log2: consts.threshold_log2(ThresholdKind::Barrier),
        });
    }
    let uh = u.restrict(barrier_radius())?;
    let r = consts.regularization_scale(eps);
    let lift = consts.barrier_lift(eps);
    let k = consts.touch_floor(eps);
    let source = T::cst(2.0) * k;
    let w_plus = solve_poisson_ball(-source, &uh.map(|v| v + lift), opts)?;
    let w_minus = solve_poisson_ball(source, &uh.map(|v| v - lift), opts)?;
    let cap = consts.derivative_cap(eps);
    let n = T::from_usize_(consts.n);
    let caps_plus = caps(&w_plus, r, cap, n)?;
    let caps_minus = caps(&w_minus, r, cap, n)?;
    if mode == CheckMode::Strict {
        for c in [&caps_plus, &caps_minus] {
            if !c.holds {
                return Err(HarmonicError::DerivativeCap {
                    node: c.full_node,
                    value: c.full.as_f64(),
                    cap: c.cap.as_f64(),
                    what: "barrier derivatives",
                });
            }
        }
    }
    Ok(BarrierPair {
        w_plus,
        w_minus,
        r,
        delta_slide: consts.slide_opening(eps),
        derivative_cap: cap,
        lift,
        source,
        caps_plus,
        caps_minus,
        threshold_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport<T> {
    /// `min (w₊ - u)` and where it is attained.
    pub plus_margin: T,
    pub plus_node: usize,
    /// `min (u - w₋)`.
    pub minus_margin: T,
    pub minus_node: usize,
    pub verdict: bool,
}

/// Checks `w₋ < u < w₊` on every node of the barrier domain.
pub fn verify_barrier_separation<T: Scalar>(
    u: &GridFunction<T>,
    pair: &BarrierPair<T>,
) -> Result<SeparationReport<T>, HarmonicError> {
    let uh = u.restrict(barrier_radius())?;
    let dp = pair.w_plus.w.zip_map(&uh, |a, b| a - b)?;
    let dm = uh.zip_map(&pair.w_minus.w, |a, b| a - b)?;
    let (pn, pm) = dp.argmin().ok_or(GridError::TooFewNodes(0))?;
    let (mn, mm) = dm.argmin().ok_or(GridError::TooFewNodes(0))?;
    Ok(SeparationReport {
        plus_margin: pm,
        plus_node: pn,
        minus_margin: mm,
        minus_node: mn,
        verdict: pm > T::zero() && mm > T::zero(),
    })
}

/// Harmonic function on `B'_{1/2}` agreeing with `u` on the ring.
pub fn harmonic_replacement<T: Scalar>(
    u: &GridFunction<T>,
    opts: &PoissonOptions<T>,
) -> Result<PoissonSolution<T>, HarmonicError> {
    let uh = u.restrict(barrier_radius())?;
    solve_poisson_ball(T::zero(), &uh, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessReport<T> {
    /// `max |u - w|` over `B'_{1/2}`.
    pub measured: T,
    /// `C₆ε^(γα²/8)`.
    pub bound: T,
    pub margin: T,
    /// `max (w₊ - w₋)`, also bounded by `C₆ε^(γα²/8)`.
    pub barrier_gap: T,
    /// `min (w - w₋)` and `min (w₊ - w)`.
    pub below_margin: T,
    pub above_margin: T,
    pub verdict: bool,
}

pub fn verify_harmonic_closeness<T: Scalar>(
    u: &GridFunction<T>,
    w: &GridFunction<T>,
    pair: &BarrierPair<T>,
    eps: T,
    consts: &Constants<T>,
) -> Result<ClosenessReport<T>, HarmonicError> {
    let uh = u.restrict(barrier_radius())?;
    let measured = uh.zip_map(w, |a, b| a - b)?.sup_norm();
    let bound = consts.closeness_bound(eps);
    let gap = pair.w_plus.w.zip_map(&pair.w_minus.w, |a, b| a - b)?;
    let barrier_gap = gap.argmax().map(|x| x.1).unwrap_or_else(T::zero);
    let below = w.zip_map(&pair.w_minus.w, |a, b| a - b)?.argmin().map(|x| x.1).unwrap_or_else(T::zero);
    let above = pair.w_plus.w.zip_map(w, |a, b| a - b)?.argmin().map(|x| x.1).unwrap_or_else(T::zero);
    Ok(ClosenessReport {
        measured,
        bound,
        margin: bound - measured,
        barrier_gap,
        below_margin: below,
        above_margin: above,
        verdict: measured <= bound && barrier_gap <= bound && below >= T::zero() && above >= T::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate<T> {
    /// `max_i |D_i w(p)|` and `(2n/ρ) sup_{B'_ρ(p)} |w|`.
    pub gradient: T,
    pub gradient_bound: T,
    /// `max_ij |D_ij w(p)|` and `(4n/ρ)² sup_{B'_ρ(p)} |w|`.
    pub second: T,
    pub second_bound: T,
    pub verdict: bool,
}

/// Interior estimate for harmonic `w` at node `p` on `B'_ρ(p)`, with
/// `n = baseDim + 1`.
pub fn harmonic_derivative_estimate<T: Scalar>(
    w: &GridFunction<T>,
    p: usize,
    rho: T,
) -> Result<DerivativeEstimate<T>, HarmonicError> {
    let grid = w.grid();
    let x = grid.coord(p);
    if dist(x, [T::zero(); 2]) + rho > grid.radius() * (T::one() + T::cst(1e-12)) {
        return Err(HarmonicError::BallExits {
            node: p,
            rho: rho.as_f64(),
        });
    }
    let m = cap_measure(w, p)?;
    let sup = w.sup_abs(x, rho)?;
    let n = T::from_usize_(grid.base_dim() + 1);
    let gradient_bound = T::cst(2.0) * n / rho * sup;
    let second_bound = (T::cst(4.0) * n / rho).powi(2) * sup;
    Ok(DerivativeEstimate {
        gradient: m.max_first,
        gradient_bound,
        second: m.max_second,
        second_bound,
        verdict: m.max_first <= gradient_bound && m.max_second <= second_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchResult<T> {
    /// Minimizer `x₁` of `εφ + (δ/2)|x - x₀|² - u⁺` over `B'_r(x₀)`.
    pub x1: usize,
    pub laplacian_at_touch: T,
    /// `-C₄ε^(γα/2)`.
    pub floor: T,
    /// Whether the caps `max{sup|D_ij φ|, |Dφ|, |D²φ|} ≤ ε^(-1/2)` hold on the
    /// scan region.
    pub caps_hold: bool,
    pub passed: bool,
}

/// Slides the paraboloid `εφ + (δ/2)|x - x₀|²` against `u⁺` over `B'_r(x₀)`.
///
/// `upper` is `u⁺` in height units, `u` the regularized graph and `phi` the
/// test function, both stretched; all three share the lattice and are looked
/// up by node offset. `phi` must touch `u + C₃ε^(γα)` from above at `x0`.
pub fn sliding_paraboloid_touch<T: Scalar>(
    upper: &GridFunction<T>,
    u: &GridFunction<T>,
    phi: &GridFunction<T>,
    x0: usize,
    consts: &Constants<T>,
    eps: T,
) -> Result<TouchResult<T>, HarmonicError> {
    let grid = phi.grid();
    let h = grid.h();
    if upper.grid().h() != h || u.grid().h() != h {
        return Err(GridError::Mismatch.into());
    }
    let r = consts.regularization_scale(eps);
    let delta = consts.slide_opening(eps);
    let lift = consts.stretched_gap(eps);
    let k0 = grid.offset(x0);
    let c0 = grid.coord(x0);
    let region: Vec<usize> = phi.sampled_in_ball(c0, r);
    let lookup = |f: &GridFunction<T>, i: usize| f.at(grid.offset(i)).filter(|v| v.is_finite());

    let scale = lookup(u, x0).map_or(T::one(), |v| v.abs().max(T::one()));
    let contact_tol = T::cst(1e-12) * scale;
    let base = lookup(u, x0).ok_or(GridError::NotInterior(x0))? + lift;
    if (phi.value(x0) - base).abs() > contact_tol {
        return Err(HarmonicError::Hypothesis {
            node: x0,
            gap: (phi.value(x0) - base).as_f64(),
        });
    }
    for &i in &region {
        if let Some(ui) = lookup(u, i) {
            let gap = phi.value(i) - ui - lift;
            if gap < -contact_tol {
                return Err(HarmonicError::Hypothesis { node: i, gap: gap.as_f64() });
            }
        }
    }

    let scan = region.iter().filter_map(|&i| {
        let up = lookup(upper, i)?;
        let k = grid.offset(i);
        let m = ((k[0] - k0[0]).pow(2) + (k[1] - k0[1]).pow(2)) as usize;
        let d2 = h * h * T::from_usize_(m);
        Some((i, eps * phi.value(i) + delta / T::cst(2.0) * d2 - up))
    });
    let (x1, _) = argmin_over(scan).ok_or(GridError::EmptyBall {
        center: [c0[0].as_f64(), c0[1].as_f64()],
        r: r.as_f64(),
    })?;
    if dist(grid.coord(x1), c0) > r - h {
        return Err(HarmonicError::TouchOnBoundary { node: x1 });
    }
    let lap = phi.laplacian_at(x1)?;
    let cap = consts.derivative_cap(eps);
    let caps_hold = region
        .iter()
        .filter(|&&i| grid.kind(i) == NodeKind::Interior)
        .all(|&i| {
            cap_measure(phi, i)
                .map(|m| m.max_first.max(m.max_second).max(m.hessian_norm) <= cap)
                .unwrap_or(false)
        });
    let floor = -consts.touch_floor(eps);
    Ok(TouchResult {
        x1,
        laplacian_at_touch: lap,
        floor,
        caps_hold,
        passed: lap >= floor,
    })
}
