//! Stretched multivalued graphs, their envelopes, and the Hölder
//! inf-convolution that regularizes the lower envelope.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFunction};
use crate::ledger::Constants;
use crate::scalar::{fmt_real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("sample {index} at height {height} leaves the slab |x_n| <= {eps}")]
    Slab { index: usize, height: f64, eps: f64 },
    #[error("no sample over the origin")]
    MissingOrigin,
    #[error("flatness must be positive, got {0}")]
    Flatness(f64),
    #[error("base dimension mismatch: samples {samples}, grid {grid}")]
    BaseDim { samples: usize, grid: usize },
}

/// A point `(x', x_n)` of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub base: [T; 2],
    pub height: T,
}

/// Point samples of a surface over a base of dimension 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples<T> {
    pub base_dim: usize,
    pub points: Vec<Sample<T>>,
}

impl<T: Scalar> SurfaceSamples<T> {
    /// One sample per sampled node of a graph.
    pub fn from_graph(u: &GridFunction<T>) -> Self {
        let g = u.grid();
        let points = (0..g.len())
            .filter(|&i| u.value(i).is_finite())
            .map(|i| Sample {
                base: g.coord(i),
                height: u.value(i),
            })
            .collect();
        SurfaceSamples {
            base_dim: g.base_dim(),
            points,
        }
    }

    pub fn extend(&mut self, other: &SurfaceSamples<T>) {
        self.points.extend_from_slice(&other.points);
    }

    /// `max |x_n|` over samples with `|x| ≤ r` (full-space ball).
    pub fn flatness_in_ball(&self, r: T) -> T {
        self.points
            .iter()
            .filter(|p| norm3(p) <= r)
            .fold(T::zero(), |m, p| m.max(p.height.abs()))
    }

    /// `max |x_n|` over samples with `|x'| ≤ r`.
    pub fn flatness_over_base(&self, r: T) -> T {
        self.points
            .iter()
            .filter(|p| (p.base[0] * p.base[0] + p.base[1] * p.base[1]).sqrt() <= r)
            .fold(T::zero(), |m, p| m.max(p.height.abs()))
    }
}

pub(crate) fn norm3<T: Scalar>(p: &Sample<T>) -> T {
    (p.base[0] * p.base[0] + p.base[1] * p.base[1] + p.height * p.height).sqrt()
}

/// Stretched multivalued graph `A = heights / ε` with envelopes
/// `u⁻ = ε inf A` and `u⁺ = ε sup A` on the nodes that carry samples.
#[derive(Debug, Clone)]
pub struct MultiGraph<T> {
    /// Sorted, deduplicated stretched heights per node; empty when uncovered.
    pub columns: Vec<Vec<T>>,
    pub lower: GridFunction<T>,
    pub upper: GridFunction<T>,
    /// Flatness supplied by the caller.
    pub eps: T,
    /// Vertical shift applied so that `u⁻(0) = 0`.
    pub shift: T,
    /// Flatness of the shifted data, `eps + |shift| ≤ 2 eps`; used for the
    /// stretching and every downstream comparison.
    pub eps_eff: T,
}

impl<T: Scalar> MultiGraph<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.lower.grid()
    }

    /// Builds the two-valued graph with the given envelopes (no shift).
    pub fn from_envelopes(lower: GridFunction<T>, upper: GridFunction<T>, eps: T) -> Result<Self, EnvelopeError> {
        lower.check_same(&upper)?;
        let columns = (0..lower.grid().len())
            .map(|i| {
                let (a, b) = (lower.value(i), upper.value(i));
                if !a.is_finite() || !b.is_finite() {
                    Vec::new()
                } else if a == b {
                    vec![a / eps]
                } else {
                    vec![a / eps, b / eps]
                }
            })
            .collect();
        Ok(MultiGraph {
            columns,
            lower,
            upper,
            eps,
            shift: T::zero(),
            eps_eff: eps,
        })
    }

    pub fn covered(&self, idx: usize) -> bool {
        !self.columns[idx].is_empty()
    }

    /// `sup |A|` over covered nodes.
    pub fn sup_abs(&self) -> T {
        self.columns
            .iter()
            .flatten()
            .fold(T::zero(), |m, a| m.max(a.abs()))
    }

    /// JSON sidecar accompanying the gf1 envelope pair.
    pub fn sidecar_json(&self) -> Value {
        json!({
            "eps": fmt_real(self.eps),
            "epsEff": fmt_real(self.eps_eff),
            "shift": fmt_real(self.shift),
        })
    }
}

/// Bins samples to the nearest node of `grid`, checks the slab hypothesis and
/// shifts vertically so that `u⁻(0) = 0`. Samples whose nearest node lies
/// outside the grid domain are dropped; nodes without samples stay uncovered.
pub fn extract_multigraph<T: Scalar>(
    samples: &SurfaceSamples<T>,
    grid: Arc<Grid<T>>,
    eps: T,
) -> Result<MultiGraph<T>, EnvelopeError> {
    if !(eps > T::zero()) {
        return Err(EnvelopeError::Flatness(eps.as_f64()));
    }
    if samples.base_dim != grid.base_dim() {
        return Err(EnvelopeError::BaseDim {
            samples: samples.base_dim,
            grid: grid.base_dim(),
        });
    }
    let slab = eps * (T::one() + T::epsilon() * T::cst(4.0));
    let mut raw: Vec<Vec<T>> = vec![Vec::new(); grid.len()];
    for (k, p) in samples.points.iter().enumerate() {
        if !(p.height.abs() <= slab) {
            return Err(EnvelopeError::Slab {
                index: k,
                height: p.height.as_f64(),
                eps: eps.as_f64(),
            });
        }
        if let Some(i) = grid.nearest_node(p.base) {
            raw[i].push(p.height);
        }
    }
    let origin = grid.origin();
    let shift = -raw[origin]
        .iter()
        .copied()
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))))
        .ok_or(EnvelopeError::MissingOrigin)?;
    let eps_eff = eps + shift.abs();
    let mut lower = vec![T::nan(); grid.len()];
    let mut upper = vec![T::nan(); grid.len()];
    let columns = raw
        .into_iter()
        .enumerate()
        .map(|(i, col)| {
            let mut z: Vec<T> = col.into_iter().map(|v| v + shift).collect();
            z.sort_by(|x, y| x.partial_cmp(y).expect("finite heights"));
            z.dedup();
            if let (Some(&lo), Some(&hi)) = (z.first(), z.last()) {
                lower[i] = lo;
                upper[i] = hi;
            }
            z.into_iter().map(|v| v / eps_eff).collect()
        })
        .collect();
    // The origin column is exactly zero after the shift.
    lower[origin] = T::zero();
    Ok(MultiGraph {
        columns,
        lower: GridFunction::new(grid.clone(), lower)?,
        upper: GridFunction::new(grid, upper)?,
        eps,
        shift,
        eps_eff,
    })
}

/// The regularized graph and, per node, the minimizing node of the
/// inf-convolution.
#[derive(Debug, Clone)]
pub struct InfConvolution<T> {
    pub u: GridFunction<T>,
    pub argmin: Vec<Option<usize>>,
}

/// Radius of the regularization domain.
pub fn regularization_radius<T: Scalar>() -> T {
    T::cst(0.75)
}

/// `u(x₀) = min { u⁻(x)/ε + K |x - x₀|^α : x ∈ B'_{3/4} covered }` with
/// `K = 2^α C₁`, evaluated on the nodes of `B'_{3/4}`. Node distances come
/// from [`Grid::power_table`]; ties pick the smallest node index.
pub fn inf_convolve<T: Scalar>(mg: &MultiGraph<T>, consts: &Constants<T>) -> Result<InfConvolution<T>, EnvelopeError> {
    inf_convolve_with(mg, consts.holder_cone(), consts.alpha)
}

/// [`inf_convolve`] with an explicit cone constant and exponent.
pub fn inf_convolve_with<T: Scalar>(mg: &MultiGraph<T>, k: T, alpha: T) -> Result<InfConvolution<T>, EnvelopeError> {
    let sub = mg.lower.restrict(regularization_radius())?;
    let grid = sub.grid().clone();
    let table = grid.power_table(alpha);
    let eps = mg.eps_eff;
    let sources: Vec<(usize, T)> = (0..grid.len())
        .filter(|&j| sub.value(j).is_finite())
        .map(|j| (j, sub.value(j) / eps))
        .collect();
    let results: Vec<(T, Option<usize>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !grid.in_domain(i) {
                return (T::nan(), None);
            }
            let mut best = (T::infinity(), None);
            for &(j, v) in &sources {
                let c = v + k * table[grid.offset_sq(i, j)];
                if c < best.0 {
                    best = (c, Some(j));
                }
            }
            best
        })
        .collect();
    let (values, argmin): (Vec<T>, Vec<Option<usize>>) = results.into_iter().unzip();
    Ok(InfConvolution {
        u: GridFunction::new(grid, values)?,
        argmin,
    })
}

/// Margins of the sandwich `εu ≤ u⁻ ≤ u⁺ ≤ εu + C₃ε^(1+γα)` and the derived
/// Hölder bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport<T> {
    /// `min (u⁻ - εu)`.
    pub lower_margin: T,
    /// `min (εu + C₃ε^(1+γα) - u⁺)`.
    pub upper_margin: T,
    /// `sup |A - u|` and its bound `C₃ε^(γα)`.
    pub a_deviation: T,
    pub a_bound: T,
    /// `[u]_α` on `B'_{3/4}` and its bound `2^(4+5α)`.
    pub seminorm: T,
    pub seminorm_bound: T,
    /// `sup |u| + [u]_α` on `B'_{1/2}` and its bound `2^(6+5α)`.
    pub norm_half: T,
    pub norm_bound: T,
    pub verdict: bool,
}

/// Checks the sandwich and Hölder bounds for `u` regularizing `mg`.
pub fn verify_sandwich<T: Scalar>(
    u: &GridFunction<T>,
    mg: &MultiGraph<T>,
    consts: &Constants<T>,
) -> Result<SandwichReport<T>, EnvelopeError> {
    let eps = mg.eps_eff;
    let gap = consts.sandwich_gap(eps);
    let a_bound = consts.stretched_gap(eps);
    let ug = u.grid();
    let mut lower_margin = T::infinity();
    let mut upper_margin = T::infinity();
    let mut a_dev = T::zero();
    for i in 0..ug.len() {
        let ui = u.value(i);
        if !ui.is_finite() {
            continue;
        }
        let Some(j) = mg.grid().index(ug.offset(i)) else { continue };
        if !mg.covered(j) {
            continue;
        }
        // Compared in stretched units, so the lower margin is exactly zero
        // wherever the minimizer is the node itself.
        let col = &mg.columns[j];
        let (lo, hi) = (col[0], col[col.len() - 1]);
        lower_margin = lower_margin.min(eps * (lo - ui));
        upper_margin = upper_margin.min(eps * (ui - hi) + gap);
        for &a in col {
            a_dev = a_dev.max((a - ui).abs());
        }
    }
    let zero = [T::zero(); 2];
    let alpha = consts.alpha;
    let seminorm = u.holder_seminorm(alpha, zero, regularization_radius())?.value;
    let half = T::cst(0.5);
    let norm_half = u.sup_abs(zero, half)? + u.holder_seminorm(alpha, zero, half)?.value;
    let seminorm_bound = consts.holder_cone();
    let norm_bound = consts.holder_norm_cap();
    let verdict = lower_margin >= T::zero()
        && upper_margin >= T::zero()
        && a_dev <= a_bound
        && seminorm <= seminorm_bound * (T::one() + T::epsilon() * T::cst(64.0))
        && norm_half <= norm_bound;
    Ok(SandwichReport {
        lower_margin,
        upper_margin,
        a_deviation: a_dev,
        a_bound,
        seminorm,
        seminorm_bound,
        norm_half,
        norm_bound,
        verdict,
    })
}

/// Pair-scan of the certified modulus
/// `|A(x') - A(y')| ≤ C₁(|x'-y'| + C₂ε^γ)^α` on `B'_{3/4}`, with the two-sided
/// set difference `max(sup A(x') - inf A(y'), sup A(y') - inf A(x'))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusReport<T> {
    /// `min` over pairs of `bound - difference`.
    pub margin: T,
    /// Pair attaining the margin.
    pub worst_pair: (usize, usize),
    pub pairs: usize,
    pub verdict: bool,
}

pub fn verify_modulus<T: Scalar>(mg: &MultiGraph<T>, consts: &Constants<T>) -> Result<ModulusReport<T>, EnvelopeError> {
    let grid = mg.grid();
    let eps = mg.eps_eff;
    let nodes: Vec<usize> = grid
        .nodes_in_ball([T::zero(); 2], regularization_radius())
        .into_iter()
        .filter(|&i| mg.covered(i))
        .collect();
    if nodes.len() < 2 {
        return Err(GridError::TooFewNodes(nodes.len()).into());
    }
    let floor = consts.c2 * eps.powf(consts.gamma);
    let w = 2 * grid.half();
    let bound_table: Vec<T> = (0..=grid.base_dim() * w * w)
        .map(|m| consts.c1 * (grid.offset_distance(m) + floor).powf(consts.alpha))
        .collect();
    let lo: Vec<T> = nodes.iter().map(|&i| *mg.columns[i].first().unwrap()).collect();
    let hi: Vec<T> = nodes.iter().map(|&i| *mg.columns[i].last().unwrap()).collect();
    let (margin, pair) = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let mut best = (T::infinity(), (nodes[a], nodes[a]));
            for b in a + 1..nodes.len() {
                let diff = (hi[a] - lo[b]).max(hi[b] - lo[a]);
                let m = bound_table[grid.offset_sq(nodes[a], nodes[b])] - diff;
                if m < best.0 {
                    best = (m, (nodes[a], nodes[b]));
                }
            }
            best
        })
        .reduce(
            || (T::infinity(), (usize::MAX, usize::MAX)),
            |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x },
        );
    Ok(ModulusReport {
        margin,
        worst_pair: pair,
        pairs: nodes.len() * (nodes.len() - 1) / 2,
        verdict: margin >= T::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> Arc<Grid<f64>> {
        Arc::new(Grid::with_nodes_per_diameter(2, 1.0, 17).unwrap())
    }

    #[test]
    fn plane_gives_zero_envelopes() {
        let g = disk();
        let s = SurfaceSamples::from_graph(&GridFunction::constant(g.clone(), 0.0));
        let mg = extract_multigraph(&s, g, 0.01).unwrap();
        assert_eq!(mg.shift, 0.0);
        assert_eq!(mg.eps_eff, 0.01);
        assert_eq!(mg.lower.sup_norm(), 0.0);
        assert_eq!(mg.upper.sup_norm(), 0.0);
    }

    #[test]
    fn two_sheets() {
        let g = disk();
        let eps = 0.02;
        let mut s = SurfaceSamples::from_graph(&GridFunction::constant(g.clone(), 0.0));
        s.extend(&SurfaceSamples::from_graph(&GridFunction::constant(g.clone(), eps)));
        let mg = extract_multigraph(&s, g.clone(), eps).unwrap();
        for i in g.domain_nodes() {
            assert_eq!(mg.lower.value(i), 0.0);
            assert_eq!(mg.upper.value(i), eps);
            assert_eq!(mg.columns[i], vec![0.0, 1.0]);
        }
    }

    #[test]
    fn shift_normalizes_origin() {
        let g = disk();
        let s = SurfaceSamples::from_graph(&GridFunction::constant(g.clone(), 0.005));
        let mg = extract_multigraph(&s, g.clone(), 0.01).unwrap();
        assert_eq!(mg.shift, -0.005);
        assert_eq!(mg.eps_eff, 0.015);
        assert_eq!(mg.lower.value(g.origin()), 0.0);
    }

    #[test]
    fn slab_and_origin_errors() {
        let g = disk();
        let s = SurfaceSamples::from_graph(&GridFunction::from_fn(g.clone(), |x| 0.1 * x[0]));
        assert!(matches!(
            extract_multigraph(&s, g.clone(), 0.05),
            Err(EnvelopeError::Slab { .. })
        ));
        let s = SurfaceSamples {
            base_dim: 2,
            points: vec![Sample { base: [0.5, 0.0], height: 0.0 }],
        };
        assert_eq!(extract_multigraph(&s, g, 0.05).unwrap_err(), EnvelopeError::MissingOrigin);
    }

    #[test]
    fn constant_envelope_is_fixed() {
        let g = disk();
        let eps = 0.01;
        let c = 0.3;
        let lower = GridFunction::constant(g.clone(), c * eps);
        let mg = MultiGraph::from_envelopes(lower.clone(), lower, eps).unwrap();
        let inf = inf_convolve_with(&mg, 20.0, 0.25).unwrap();
        for i in inf.u.grid().domain_nodes() {
            assert!((inf.u.value(i) - c).abs() < 1e-15);
        }
    }
}
