//! End-to-end runs: the decay audit of a flat surface, one improvement of
//! flatness step producing a certificate, and iteration across scales.

use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::envelope::{
    extract_multigraph, inf_convolve, verify_modulus, verify_sandwich, EnvelopeError, ModulusReport, MultiGraph,
    Sample, SandwichReport, SurfaceSamples,
};
use crate::geometry::{graph_height_in_frame, mat_vec, normalize, to_vec3, transpose, Frame, Vec3};
use crate::grid::{Grid, GridError, GridFunction};
use crate::harmonic::{
    build_barriers, harmonic_replacement, verify_barrier_separation, verify_harmonic_closeness, CapReport,
    CheckMode, ClosenessReport, HarmonicError, PoissonOptions, SeparationReport,
};
use crate::ledger::{max_harnack_depth, Constants, HarnackParams, LedgerError};
use crate::mse::{solve_patch, solve_with_data, MseError, SolveOptions};
use crate::scalar::{fmt_real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Mse(#[from] MseError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("ledger dimension {ledger} does not match samples of base dimension {base}")]
    Dimension { ledger: usize, base: usize },
    #[error("stage {stage} failed with margin {margin:e}")]
    Stage {
        stage: &'static str,
        margin: f64,
        stages: Vec<StageRecord>,
    },
}

/// Outcome of one pipeline stage. Margins are `bound - measured` in the
/// stage's own units.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: &'static str,
    pub verdict: bool,
    pub margin: f64,
}

impl StageRecord {
    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "verdict": self.verdict, "margin": fmt_real(self.margin)})
    }
}

/// Surface samples, optionally backed by a solved graph from which finer
/// samples can be manufactured on demand.
#[derive(Debug, Clone)]
pub struct Surface<T> {
    pub samples: SurfaceSamples<T>,
    pub graph: Option<GridFunction<T>>,
}

impl<T: Scalar> Surface<T> {
    pub fn from_graph(u: GridFunction<T>) -> Self {
        Surface {
            samples: SurfaceSamples::from_graph(&u),
            graph: Some(u),
        }
    }

    pub fn from_samples(samples: SurfaceSamples<T>) -> Self {
        Surface { samples, graph: None }
    }

    pub fn base_dim(&self) -> usize {
        self.samples.base_dim
    }

    /// Samples over `B'_radius(center)` re-solved at spacing `h` when a graph
    /// is available, in the original coordinates.
    fn refined(&self, center: [T; 2], radius: T, h: T, opts: &SolveOptions<T>) -> Result<Option<SurfaceSamples<T>>, PipelineError> {
        let Some(g) = &self.graph else { return Ok(None) };
        let patch = solve_patch(g, center, radius, h, opts)?;
        let mut s = SurfaceSamples::from_graph(&patch.u);
        for p in &mut s.points {
            p.base = [p.base[0] + center[0], p.base[1] + center[1]];
        }
        Ok(Some(s))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions<T> {
    /// Nodes per diameter of the unit-ball grid.
    pub nodes: usize,
    /// Radius of the empirical inclusion test.
    pub empirical_radius: T,
    /// Spacing divisor for locally refined patches.
    pub refine: usize,
    /// Audit rows with fewer samples are refined or truncated.
    pub min_row_samples: usize,
    pub poisson: PoissonOptions<T>,
    pub mse: SolveOptions<T>,
}

impl<T: Scalar> Default for PipelineOptions<T> {
    fn default() -> Self {
        PipelineOptions {
            nodes: 129,
            empirical_radius: T::cst(0.125),
            refine: 4,
            min_row_samples: 9,
            poisson: PoissonOptions::default(),
            mse: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow<T> {
    pub m: i64,
    pub radius: T,
    /// `max |(x - x₀)·e_n|` over samples in `B_{2^-m}(x₀)`.
    pub measured: T,
    /// `2ε(1-η)^(m-2)`.
    pub bound: T,
    pub samples: usize,
    pub refined: bool,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct DecayAudit<T> {
    pub center: Vec3<T>,
    pub eps: T,
    /// Real depth `M` and its floor `M̃`.
    pub m: f64,
    pub m_tilde: i64,
    pub rows: Vec<AuditRow<T>>,
    /// Set when rows below this depth could not be sampled.
    pub truncated_at: Option<i64>,
    pub modulus: ModulusReport<T>,
    pub verdict: bool,
}

impl<T: Scalar> DecayAudit<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,radius,measured,bound\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.m, fmt_real(r.radius), fmt_real(r.measured), fmt_real(r.bound)));
        }
        s
    }
}

fn unit_grid<T: Scalar>(base_dim: usize, nodes: usize) -> Result<Arc<Grid<T>>, GridError> {
    Ok(Arc::new(Grid::with_nodes_per_diameter(base_dim, T::one(), nodes)?))
}

fn nearest_sample<T: Scalar>(samples: &SurfaceSamples<T>, target: Vec3<T>) -> Option<Vec3<T>> {
    let mut best: Option<(T, Vec3<T>)> = None;
    for p in &samples.points {
        let x = to_vec3(p);
        let d = (0..3).fold(T::zero(), |a, k| a + (x[k] - target[k]) * (x[k] - target[k]));
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, x));
        }
    }
    best.map(|b| b.1)
}

/// Audits `∂E ∩ B_{2^-m}(x₀) ⊂ {|(x - x₀)·e_n| ≤ 2ε(1-η)^(m-2)}` for
/// `m = 3..M̃`, with `x₀` the sample nearest to `(center, 0)`, and checks the
/// certified modulus on `B'_{3/4}` by pair scan.
pub fn harnack_decay_audit<T: Scalar>(
    surface: &Surface<T>,
    center: [T; 2],
    eps: T,
    params: &HarnackParams<f64>,
    consts: &Constants<T>,
    opts: &PipelineOptions<T>,
) -> Result<DecayAudit<T>, PipelineError> {
    let depth = max_harnack_depth(&eps.as_f64(), params)?;
    let x0 = nearest_sample(&surface.samples, [center[0], center[1], T::zero()])
        .ok_or(GridError::TooFewNodes(0))?;
    let eta = T::cst(params.eta);
    let grid = unit_grid::<T>(surface.base_dim(), opts.nodes)?;
    let mut rows = Vec::new();
    let mut truncated_at = None;
    for m in 3..=depth.m_tilde {
        let radius = T::cst(0.5).powi(m as i32);
        let scan = |s: &SurfaceSamples<T>| {
            s.points.iter().fold((0usize, T::zero()), |(k, mx), p| {
                let x = to_vec3(p);
                let d = (0..3).fold(T::zero(), |a, j| a + (x[j] - x0[j]) * (x[j] - x0[j])).sqrt();
                if d <= radius {
                    (k + 1, mx.max((x[2] - x0[2]).abs()))
                } else {
                    (k, mx)
                }
            })
        };
        let (mut count, mut measured) = scan(&surface.samples);
        let mut refined = false;
        if count < opts.min_row_samples {
            let h = radius / T::from_usize_(8 * opts.refine.max(1));
            if let Some(s) = surface.refined([x0[0], x0[1]], radius * T::cst(1.25), h, &opts.mse)? {
                (count, measured) = scan(&s);
                refined = true;
            }
        }
        if count < opts.min_row_samples {
            truncated_at = Some(m);
            break;
        }
        let bound = T::cst(2.0) * eps * (T::one() - eta).powi(m as i32 - 2);
        rows.push(AuditRow {
            m,
            radius,
            measured,
            bound,
            samples: count,
            refined,
            holds: measured <= bound,
        });
    }
    let mg = extract_multigraph(&surface.samples, grid, eps)?;
    let modulus = verify_modulus(&mg, consts)?;
    let verdict = rows.iter().all(|r| r.holds) && modulus.verdict;
    Ok(DecayAudit {
        center: x0,
        eps,
        m: depth.m,
        m_tilde: depth.m_tilde,
        rows,
        truncated_at,
        modulus,
        verdict,
    })
}

/// Terms of the triangle inequality
/// `|u(x') - ∇w(0)·x'| ≤ |u - w|(x') + |u(0) - w(0)| + |w(x') - w(0) - ∇w(0)·x'|`
/// on `B'_{2r₀}`, plus `sup |A - u|` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticInclusion<T> {
    pub r0: T,
    /// Bound on `|u - w|` over `B'_{2r₀}`: the smaller of the global maximum
    /// and the second-order Taylor estimate of `u - w` at the origin.
    pub closeness_term: T,
    pub origin_term: T,
    /// `128 n² r₀² ‖w‖`.
    pub taylor_bound: T,
    /// `2 r₀² |D²w(0)|` from the stencil, for comparison.
    pub taylor_stencil: T,
    pub a_deviation: T,
    /// `r₀/2 - (sum of the above)`.
    pub margin: T,
}

#[derive(Debug, Clone)]
pub struct FlatnessCertificate<T> {
    pub nu: Vec3<T>,
    /// `∇w(0)` in stretched units.
    pub gradient: [T; 2],
    pub eps: T,
    pub eps_eff: T,
    pub shift: T,
    /// `r₀/8 - 128 n² r₀² ‖w‖`.
    pub taylor_margin: T,
    pub closeness_margin: T,
    pub inclusion_analytic_margin: T,
    /// `ε ρ/2 - max |x·ν|` over samples in `B_ρ`.
    pub inclusion_empirical_margin: T,
    pub empirical_radius: T,
    /// `max |x·ν| / (ε ρ)`.
    pub empirical_ratio: T,
    pub empirical_samples: usize,
    pub analytic: AnalyticInclusion<T>,
    pub sandwich: SandwichReport<T>,
    pub separation: SeparationReport<T>,
    pub closeness: ClosenessReport<T>,
    pub caps: [CapReport<T>; 2],
    /// Whether `ε` lies below the barrier threshold and below `ε₀`.
    pub barrier_threshold_ok: bool,
    pub eps0_ok: bool,
    pub stages: Vec<StageRecord>,
    pub ledger_ref: String,
    pub verdict: bool,
}

impl<T: Scalar> FlatnessCertificate<T> {
    pub fn to_json(&self) -> Value {
        let f = |x: T| fmt_real(x);
        json!({
            "nu": self.nu.iter().map(|&v| f(v)).collect::<Vec<_>>(),
            "margins": {
                "taylor": f(self.taylor_margin),
                "closeness": f(self.closeness_margin),
                "inclusionAnalytic": f(self.inclusion_analytic_margin),
                "inclusionEmpirical": f(self.inclusion_empirical_margin),
            },
            "stages": self.stages.iter().map(StageRecord::to_json).collect::<Vec<_>>(),
            "eps": f(self.eps),
            "epsEff": f(self.eps_eff),
            "shift": f(self.shift),
            "gradient": [f(self.gradient[0]), f(self.gradient[1])],
            "empiricalRadius": f(self.empirical_radius),
            "empiricalRatio": f(self.empirical_ratio),
            "closeness": {
                "measured": f(self.closeness.measured),
                "bound": f(self.closeness.bound),
                "barrierGap": f(self.closeness.barrier_gap),
            },
            "analytic": {
                "r0": f(self.analytic.r0),
                "closenessTerm": f(self.analytic.closeness_term),
                "originTerm": f(self.analytic.origin_term),
                "taylorBound": f(self.analytic.taylor_bound),
                "taylorStencil": f(self.analytic.taylor_stencil),
                "aDeviation": f(self.analytic.a_deviation),
            },
            "derivativeCaps": self.caps.iter().map(|c| json!({
                "cap": f(c.cap),
                "full": f(c.full),
                "harmonicPart": f(c.harmonic_part),
                "quadraticPart": f(c.quadratic_part),
                "splitCap": f(c.split_cap),
                "regionNodes": c.region_nodes,
                "interiorFull": f(c.interior_full),
                "holds": c.holds,
            })).collect::<Vec<_>>(),
            "barrierThresholdOk": self.barrier_threshold_ok,
            "eps0Ok": self.eps0_ok,
            "ledgerRef": self.ledger_ref,
            "verdict": self.verdict,
        })
    }
}

/// Identifies the ledger a certificate was produced against.
pub fn ledger_ref<T: Scalar>(consts: &Constants<T>) -> String {
    format!("n={},eps1={},eta={}", consts.n, fmt_real(consts.eps1), fmt_real(consts.eta))
}

struct Stages(Vec<StageRecord>);

impl Stages {
    fn push(&mut self, name: &'static str, verdict: bool, margin: f64) -> Result<(), PipelineError> {
        self.0.push(StageRecord { name, verdict, margin });
        if verdict {
            Ok(())
        } else {
            Err(PipelineError::Stage {
                stage: name,
                margin,
                stages: self.0.clone(),
            })
        }
    }
}

fn min_f64<T: Scalar>(xs: &[T]) -> f64 {
    xs.iter().fold(f64::INFINITY, |m, x| m.min(x.as_f64()))
}

/// Operator norm of a symmetric 2x2 matrix.
fn sym_norm<T: Scalar>(h: [[T; 2]; 2]) -> T {
    let tr = (h[0][0] + h[1][1]) / T::cst(2.0);
    let disc = (((h[0][0] - h[1][1]) / T::cst(2.0)).powi(2) + h[0][1] * h[0][1]).sqrt();
    (tr + disc).abs().max((tr - disc).abs())
}

/// One improvement of flatness step on a surface with `|x_n| ≤ eps` over
/// `B'_1`. Runs the regularization, barriers, harmonic replacement and
/// closeness checks, then the inclusion at `r₀` through the triangle
/// inequality and the inclusion at the empirical radius on a refined patch.
pub fn improvement_step<T: Scalar>(
    surface: &Surface<T>,
    eps: T,
    consts: &Constants<T>,
    opts: &PipelineOptions<T>,
) -> Result<FlatnessCertificate<T>, PipelineError> {
    let base_dim = surface.base_dim();
    if consts.n != base_dim + 1 {
        return Err(PipelineError::Dimension {
            ledger: consts.n,
            base: base_dim,
        });
    }
    let mut stages = Stages(Vec::new());
    let grid = unit_grid::<T>(base_dim, opts.nodes)?;
    let mg: MultiGraph<T> = extract_multigraph(&surface.samples, grid, eps)?;
    let eps_eff = mg.eps_eff;
    stages.push("extract", true, (eps_eff - mg.sup_abs() * eps_eff).as_f64())?;

    let reg = inf_convolve(&mg, consts)?;
    let u = reg.u;
    stages.push("inf_convolve", true, 0.0)?;

    let sandwich = verify_sandwich(&u, &mg, consts)?;
    stages.push(
        "sandwich",
        sandwich.verdict,
        min_f64(&[
            sandwich.lower_margin,
            sandwich.upper_margin,
            sandwich.a_bound - sandwich.a_deviation,
            sandwich.norm_bound - sandwich.norm_half,
        ]),
    )?;

    let pair = build_barriers(&u, eps_eff, consts, CheckMode::Report, &opts.poisson)?;
    let separation = verify_barrier_separation(&u, &pair)?;
    stages.push(
        "barriers",
        separation.verdict && pair.w_plus.max_principle && pair.w_minus.max_principle,
        min_f64(&[separation.plus_margin, separation.minus_margin]),
    )?;

    let w = harmonic_replacement(&u, &opts.poisson)?;
    stages.push("replacement", w.max_principle, 0.0)?;
    let w = w.w;

    let closeness = verify_harmonic_closeness(&u, &w, &pair, eps_eff, consts)?;
    stages.push("closeness", closeness.verdict, closeness.margin.as_f64())?;

    // Linear model and normal.
    let wg = w.grid().clone();
    let o = wg.origin();
    let gradient = w.gradient(o)?;
    // `0 - x` rather than `-x` so a flat gradient reports `+0`.
    let nu = normalize([T::zero() - eps_eff * gradient[0], T::zero() - eps_eff * gradient[1], T::one()]);

    // Inclusion at r₀ through the triangle inequality.
    let r0 = consts.r0;
    let two_r0 = T::cst(2.0) * r0;
    let n = T::from_usize_(consts.n);
    let uh = u.restrict(T::cst(0.5))?;
    let diff = uh.zip_map(&w, |a, b| a - b)?;
    let global = diff.sup_norm();
    let dg = diff.gradient(o)?;
    let local = diff.value(o).abs()
        + two_r0 * (dg[0] * dg[0] + dg[1] * dg[1]).sqrt()
        + T::cst(2.0) * r0 * r0 * sym_norm(diff.hessian(o)?);
    let closeness_term = global.min(local);
    let origin_term = diff.value(o).abs();
    let taylor_bound = T::cst(128.0) * n * n * r0 * r0 * w.sup_norm();
    let taylor_stencil = T::cst(2.0) * r0 * r0 * sym_norm(w.hessian(o)?);
    let ug = u.grid();
    let a_deviation = ug.nodes_in_ball([T::zero(); 2], two_r0).into_iter().fold(T::zero(), |m, i| {
        let col = mg.grid().index(ug.offset(i)).map(|j| &mg.columns[j]);
        col.into_iter().flatten().fold(m, |m, &a| m.max((a - u.value(i)).abs()))
    });
    let taylor_margin = r0 / T::cst(8.0) - taylor_bound;
    stages.push("taylor", taylor_margin >= T::zero(), taylor_margin.as_f64())?;
    let inclusion_analytic_margin = r0 / T::cst(2.0) - (closeness_term + origin_term + taylor_bound + a_deviation);
    let analytic = AnalyticInclusion {
        r0,
        closeness_term,
        origin_term,
        taylor_bound,
        taylor_stencil,
        a_deviation,
        margin: inclusion_analytic_margin,
    };
    stages.push(
        "inclusion_analytic",
        inclusion_analytic_margin >= T::zero(),
        inclusion_analytic_margin.as_f64(),
    )?;

    // Inclusion at the empirical radius, on a refined patch when possible.
    let rho = opts.empirical_radius;
    let h_fine = mg.grid().h() / T::from_usize_(opts.refine.max(1));
    let fine = surface
        .refined([T::zero(); 2], T::cst(2.0) * rho, h_fine, &opts.mse)?
        .unwrap_or_else(|| surface.samples.clone());
    let (count, worst) = fine.points.iter().fold((0usize, T::zero()), |(k, m), p| {
        let x = [p.base[0], p.base[1], p.height + mg.shift];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r <= rho {
            (k + 1, m.max((x[0] * nu[0] + x[1] * nu[1] + x[2] * nu[2]).abs()))
        } else {
            (k, m)
        }
    });
    let empirical_ratio = worst / (eps_eff * rho);
    let inclusion_empirical_margin = eps_eff * rho / T::cst(2.0) - worst;
    stages.push(
        "inclusion_empirical",
        count > 0 && inclusion_empirical_margin >= T::zero(),
        inclusion_empirical_margin.as_f64(),
    )?;

    Ok(FlatnessCertificate {
        nu,
        gradient,
        eps,
        eps_eff,
        shift: mg.shift,
        taylor_margin,
        closeness_margin: closeness.margin,
        inclusion_analytic_margin,
        inclusion_empirical_margin,
        empirical_radius: rho,
        empirical_ratio,
        empirical_samples: count,
        analytic,
        sandwich,
        separation,
        closeness,
        caps: [pair.caps_plus, pair.caps_minus],
        barrier_threshold_ok: pair.threshold_ok,
        eps0_ok: eps_eff.as_f64().log2() <= consts.log2_eps0,
        stages: stages.0,
        ledger_ref: ledger_ref(consts),
        verdict: true,
    })
}

/// One step of [`iterate_flatness`].
#[derive(Debug, Clone)]
pub struct IterationStep<T> {
    pub certificate: FlatnessCertificate<T>,
    /// `ν` in the original coordinates.
    pub nu_global: Vec3<T>,
    /// Frame of the next step relative to the original coordinates.
    pub frame: Frame<T>,
    /// Measured flatness of the surface in the next frame.
    pub next_flatness: T,
}

#[derive(Debug, Clone)]
pub struct Iteration<T> {
    pub steps: Vec<IterationStep<T>>,
    /// `ε₀, ε₁, …`: the input flatness followed by the measured flatness
    /// after each passing step.
    pub flatness: Vec<T>,
    /// Error that stopped the sequence early.
    pub failure: Option<PipelineError>,
}

impl<T: Scalar> Iteration<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "flatness": self.flatness.iter().map(|&e| fmt_real(e)).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(|s| {
                let mut c = s.certificate.to_json();
                c["nuGlobal"] = json!(s.nu_global.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>());
                c["nextFlatness"] = json!(fmt_real(s.next_flatness));
                c
            }).collect::<Vec<_>>(),
            "failure": self.failure.as_ref().map(|e| e.to_string()),
        })
    }
}

/// Smallest flatness handed to a further step; below it the stretched data
/// would be dominated by rounding.
pub fn flatness_floor<T: Scalar>() -> T {
    T::epsilon() * T::cst(1e4)
}

/// The surface seen in `frame`, restricted to the unit base disk. With a
/// graph the new frame is re-solved on a fresh unit grid from boundary data
/// found by [`graph_height_in_frame`].
fn reframe<T: Scalar>(
    surface: &Surface<T>,
    source: Option<&GridFunction<T>>,
    frame: &Frame<T>,
    opts: &PipelineOptions<T>,
) -> Result<Surface<T>, PipelineError> {
    if let Some(g) = source {
        let grid = unit_grid::<T>(surface.base_dim(), opts.nodes)?;
        let sol = solve_with_data(grid, |y| graph_height_in_frame(g, frame, y), &opts.mse)?;
        return Ok(Surface::from_graph(sol.u));
    }
    let moved = frame.apply(&surface.samples);
    let points: Vec<Sample<T>> = moved
        .points
        .into_iter()
        .filter(|p| (p.base[0] * p.base[0] + p.base[1] * p.base[1]).sqrt() <= T::one())
        .collect();
    Ok(Surface::from_samples(SurfaceSamples {
        base_dim: surface.base_dim(),
        points,
    }))
}

/// Repeats [`improvement_step`], re-centering at the sample nearest the
/// origin, rotating `ν` to `e_n` and dilating by the empirical radius after
/// each passing step.
pub fn iterate_flatness<T: Scalar>(
    surface: &Surface<T>,
    eps: T,
    steps: usize,
    consts: &Constants<T>,
    opts: &PipelineOptions<T>,
) -> Iteration<T> {
    let mut out = Iteration {
        steps: Vec::new(),
        flatness: vec![eps],
        failure: None,
    };
    let mut current = surface.clone();
    let mut eps_k = eps;
    let mut total = Frame::identity();
    for _ in 0..steps {
        let cert = match improvement_step(&current, eps_k, consts, opts) {
            Ok(c) => c,
            Err(e) => {
                out.failure = Some(e);
                break;
            }
        };
        let rho = opts.empirical_radius;
        let next = (|| -> Result<(Surface<T>, Frame<T>), PipelineError> {
            let center = nearest_sample(&current.samples, [T::zero(); 3]).ok_or(GridError::TooFewNodes(0))?;
            let rel = Frame::new(center, cert.nu, rho);
            // Re-solve from a refined patch so the boundary data of the next
            // frame is interpolated at the finer spacing.
            let h_fine = T::cst(2.0) / T::from_usize_(opts.nodes - 1) / T::from_usize_(opts.refine.max(1));
            // The patch is centered at the origin, so its coordinates are
            // those of the current frame.
            let patch = match &current.graph {
                Some(g) => Some(solve_patch(g, [T::zero(); 2], T::cst(2.0) * rho, h_fine, &opts.mse)?.u),
                None => None,
            };
            let s = reframe(&current, patch.as_ref(), &rel, opts)?;
            Ok((s, rel))
        })();
        let (s, rel) = match next {
            Ok(v) => v,
            Err(e) => {
                out.failure = Some(e);
                break;
            }
        };
        let nu_global = mat_vec(&transpose(&total.rotation), cert.nu);
        total = total.then(&rel);
        let measured = s.samples.flatness_over_base(T::one());
        out.flatness.push(measured);
        out.steps.push(IterationStep {
            certificate: cert,
            nu_global,
            frame: total,
            next_flatness: measured,
        });
        eps_k = measured.max(flatness_floor());
        current = s;
    }
    out
}

/// One row of the closeness report: `(eps, measured max|u - w|, bound)`.
pub type ClosenessRow<T> = (T, T, T);

pub fn closeness_csv<T: Scalar>(rows: &[ClosenessRow<T>]) -> String {
    let mut s = String::from("eps,measured_closeness,bound\n");
    for &(e, m, b) in rows {
        s.push_str(&format!("{},{},{}\n", fmt_real(e), fmt_real(m), fmt_real(b)));
    }
    s
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(x, y)| {
        let dx = x.ln() - mx;
        (n + dx * (y.ln() - my), d + dx * dx)
    });
    num / den
}
