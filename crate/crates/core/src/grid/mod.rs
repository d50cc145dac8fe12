//! Uniform grids over balls in the base `ℝ^(n-1)`, `n-1 ∈ {1, 2}`, with
//! centered stencils and the measurement scans used by every inequality check.
//!
//! Nodes live on the lattice `hℤ^d` clipped to the box `[-N h, N h]^d`, stored
//! row-major with the first axis slowest. A node belongs to the ball when its
//! center does; it is interior when all `3^d - 1` neighbours (diagonals
//! included) also do, so the mixed-derivative cross is always available.
//! Distances between nodes are computed from integer offsets, which makes the
//! pair scans reproducible bit-for-bit.

pub mod gf1;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

pub use gf1::{parse_gf1, read_gf1, write_gf1, Gf1Error};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("base dimension {0} unsupported (expected 1 or 2)")]
    BaseDim(usize),
    #[error("invalid grid geometry: radius {radius}, spacing {h}")]
    Geometry { radius: f64, h: f64 },
    #[error("node {0} is not interior")]
    NotInterior(usize),
    #[error("ball of radius {r} around {center:?} contains no sampled node")]
    EmptyBall { center: [f64; 2], r: f64 },
    #[error("need at least two sampled nodes, found {0}")]
    TooFewNodes(usize),
    #[error("Hölder exponent {0} outside (0, 1]")]
    Exponent(f64),
    #[error("grid functions live on different grids")]
    Mismatch,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("grid of radius {big} cannot be restricted to radius {small}")]
    Restrict { big: f64, small: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    base_dim: usize,
    radius: T,
    h: T,
    half: usize,
    kinds: Vec<NodeKind>,
}

fn snap_tol<T: Scalar>() -> T {
    T::cst(1e-9).max(T::epsilon() * T::cst(64.0))
}

impl<T: Scalar> Grid<T> {
    pub fn new(base_dim: usize, radius: T, h: T) -> Result<Self, GridError> {
        if !(1..=2).contains(&base_dim) {
            return Err(GridError::BaseDim(base_dim));
        }
        let geom = GridError::Geometry {
            radius: radius.as_f64(),
            h: h.as_f64(),
        };
        if !(radius > T::zero() && h > T::zero() && radius.is_finite() && h <= radius) {
            return Err(geom);
        }
        let half = (radius / h + snap_tol::<T>()).floor().to_usize().ok_or(geom)?;
        let mut grid = Grid {
            base_dim,
            radius,
            h,
            half,
            kinds: Vec::new(),
        };
        let len = grid.side().pow(base_dim as u32);
        let inside: Vec<bool> = (0..len).map(|i| grid.offset_inside(grid.offset(i))).collect();
        grid.kinds = (0..len)
            .map(|i| {
                if !inside[i] {
                    return NodeKind::Exterior;
                }
                let k = grid.offset(i);
                let all = grid.neighbour_offsets().all(|d| {
                    let nk = [k[0] + d[0], k[1] + d[1]];
                    grid.index(nk).is_some_and(|j| inside[j])
                });
                if all {
                    NodeKind::Interior
                } else {
                    NodeKind::Boundary
                }
            })
            .collect();
        Ok(grid)
    }

    /// Grid with `nodes` samples along a diameter (odd, at least 3).
    pub fn with_nodes_per_diameter(base_dim: usize, radius: T, nodes: usize) -> Result<Self, GridError> {
        if nodes < 3 || nodes.is_multiple_of(2) {
            return Err(GridError::Geometry {
                radius: radius.as_f64(),
                h: f64::NAN,
            });
        }
        let h = T::cst(2.0) * radius / T::from_usize_(nodes - 1);
        Self::new(base_dim, radius, h)
    }

    fn neighbour_offsets(&self) -> impl Iterator<Item = [isize; 2]> + '_ {
        let r1: isize = if self.base_dim == 2 { 1 } else { 0 };
        (-1..=1isize)
            .flat_map(move |a| (-r1..=r1).map(move |b| [a, b]))
            .filter(|d| *d != [0, 0])
    }

    fn offset_inside(&self, k: [isize; 2]) -> bool {
        let m = (k[0] * k[0] + k[1] * k[1]) as f64;
        let h = self.h.as_f64();
        let r = self.radius.as_f64() + 1e-9 * h;
        m.sqrt() * h <= r
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Number of nodes from the origin to the box edge along an axis.
    pub fn half(&self) -> usize {
        self.half
    }

    pub fn side(&self) -> usize {
        2 * self.half + 1
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Index strides per axis.
    pub fn strides(&self) -> [usize; 2] {
        if self.base_dim == 2 {
            [self.side(), 1]
        } else {
            [1, 0]
        }
    }

    pub fn offset(&self, idx: usize) -> [isize; 2] {
        let n = self.half as isize;
        if self.base_dim == 2 {
            let s = self.side();
            [(idx / s) as isize - n, (idx % s) as isize - n]
        } else {
            [idx as isize - n, 0]
        }
    }

    pub fn index(&self, k: [isize; 2]) -> Option<usize> {
        let n = self.half as isize;
        let ok = |v: isize| (-n..=n).contains(&v);
        if self.base_dim == 2 {
            (ok(k[0]) && ok(k[1])).then(|| ((k[0] + n) as usize) * self.side() + (k[1] + n) as usize)
        } else {
            (ok(k[0]) && k[1] == 0).then(|| (k[0] + n) as usize)
        }
    }

    pub fn coord(&self, idx: usize) -> [T; 2] {
        let k = self.offset(idx);
        [T::from_isize_(k[0]) * self.h, T::from_isize_(k[1]) * self.h]
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    pub fn in_domain(&self, idx: usize) -> bool {
        self.kinds[idx] != NodeKind::Exterior
    }

    pub fn origin(&self) -> usize {
        self.index([0, 0]).expect("origin is a node")
    }

    pub fn domain_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.in_domain(i)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kinds[i] == NodeKind::Interior).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kinds[i] == NodeKind::Boundary).collect()
    }

    /// Domain nodes whose centers lie in the closed ball `B'_r(center)`.
    pub fn nodes_in_ball(&self, center: [T; 2], r: T) -> Vec<usize> {
        let r_tol = r + snap_tol::<T>() * self.h;
        (0..self.len())
            .filter(|&i| self.in_domain(i) && dist(self.coord(i), center) <= r_tol)
            .collect()
    }

    /// Domain node nearest to `p` (ties resolved toward the origin by rounding).
    pub fn nearest_node(&self, p: [T; 2]) -> Option<usize> {
        let k0 = (p[0] / self.h).round().to_isize()?;
        let k1 = if self.base_dim == 2 {
            (p[1] / self.h).round().to_isize()?
        } else {
            0
        };
        self.index([k0, k1]).filter(|&i| self.in_domain(i))
    }

    /// Squared offset length `|k_i - k_j|²` between two nodes.
    pub fn offset_sq(&self, i: usize, j: usize) -> usize {
        let a = self.offset(i);
        let b = self.offset(j);
        let d0 = a[0] - b[0];
        let d1 = a[1] - b[1];
        (d0 * d0 + d1 * d1) as usize
    }

    /// Canonical node distance `h √m` for a squared offset length `m`.
    pub fn offset_distance(&self, m: usize) -> T {
        self.h * T::from_usize_(m).sqrt()
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        self.offset_distance(self.offset_sq(i, j))
    }

    /// `d^p` for every squared offset length that occurs on the grid.
    pub fn power_table(&self, p: T) -> Vec<T> {
        let w = 2 * self.half;
        let max_m = self.base_dim * w * w;
        (0..=max_m).map(|m| self.offset_distance(m).powf(p)).collect()
    }

    /// Whether two grids share lattice and domain.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.base_dim == other.base_dim && self.half == other.half && self.h == other.h && self.radius == other.radius
    }
}

pub fn dist<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    (d0 * d0 + d1 * d1).sqrt()
}

/// Pair-scan result of a Hölder seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate<T> {
    pub value: T,
    /// Maximizing node pair, `i < j`.
    pub pair: (usize, usize),
    /// Bound on the gap to the continuum seminorm from restricting to nodes,
    /// `value · h^σ`.
    pub quantization: T,
}

/// A scalar field sampled at the nodes of a [`Grid`]. Exterior entries are NaN.
#[derive(Debug, Clone)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, mut values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !grid.in_domain(i) {
                *v = T::nan();
            }
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = (0..grid.len())
            .map(|i| if grid.in_domain(i) { f(grid.coord(i)) } else { T::nan() })
            .collect();
        GridFunction { grid, values }
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn set(&mut self, idx: usize, v: T) {
        if self.grid.in_domain(idx) {
            self.values[idx] = v;
        }
    }

    pub fn at(&self, k: [isize; 2]) -> Option<T> {
        self.grid.index(k).map(|i| self.values[i])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.grid.in_domain(i) { f(v) } else { T::nan() })
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, GridError> {
        self.check_same(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (&a, &b))| if self.grid.in_domain(i) { f(a, b) } else { T::nan() })
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn check_same(&self, other: &Self) -> Result<(), GridError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(GridError::Mismatch)
        }
    }

    /// Copy of this field with the boundary ring taken from `other`.
    pub fn with_boundary_of(&self, other: &Self) -> Result<Self, GridError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for i in self.grid.boundary_nodes() {
            out.values[i] = other.values[i];
        }
        Ok(out)
    }

    /// Restriction to the concentric ball of radius `radius` on the same lattice.
    pub fn restrict(&self, radius: T) -> Result<Self, GridError> {
        let small = Arc::new(Grid::new(self.grid.base_dim, radius, self.grid.h)?);
        if small.half > self.grid.half {
            return Err(GridError::Restrict {
                big: self.grid.radius.as_f64(),
                small: radius.as_f64(),
            });
        }
        let values = (0..small.len())
            .map(|i| {
                if small.in_domain(i) {
                    self.grid
                        .index(small.offset(i))
                        .map(|j| self.values[j])
                        .unwrap_or_else(T::nan)
                } else {
                    T::nan()
                }
            })
            .collect();
        Ok(GridFunction { grid: small, values })
    }

    fn require_interior(&self, idx: usize) -> Result<(), GridError> {
        if idx < self.grid.len() && self.grid.kind(idx) == NodeKind::Interior {
            Ok(())
        } else {
            Err(GridError::NotInterior(idx))
        }
    }

    /// Central-difference gradient. Unused components are zero when `d = 1`.
    pub fn gradient(&self, idx: usize) -> Result<[T; 2], GridError> {
        self.require_interior(idx)?;
        Ok(derivatives(&self.grid, &self.values, idx).0)
    }

    /// Central-difference Hessian; the mixed entry uses the four-point cross.
    pub fn hessian(&self, idx: usize) -> Result<[[T; 2]; 2], GridError> {
        self.require_interior(idx)?;
        Ok(derivatives(&self.grid, &self.values, idx).1)
    }

    /// Bilinear interpolation at an arbitrary base point; `None` when a corner
    /// of the enclosing cell is unsampled.
    pub fn interpolate(&self, p: [T; 2]) -> Option<T> {
        let g = &self.grid;
        let s0 = p[0] / g.h;
        let f0 = s0.floor();
        let t0 = s0 - f0;
        let k0 = f0.to_isize()?;
        if g.base_dim == 1 {
            let a = self.at([k0, 0])?;
            if t0 == T::zero() {
                return a.is_finite().then_some(a);
            }
            let b = self.at([k0 + 1, 0])?;
            let v = a * (T::one() - t0) + b * t0;
            return v.is_finite().then_some(v);
        }
        let s1 = p[1] / g.h;
        let f1 = s1.floor();
        let t1 = s1 - f1;
        let k1 = f1.to_isize()?;
        let mut acc = T::zero();
        for (d0, w0) in [(0, T::one() - t0), (1, t0)] {
            for (d1, w1) in [(0, T::one() - t1), (1, t1)] {
                let w = w0 * w1;
                if w == T::zero() {
                    continue;
                }
                acc += w * self.at([k0 + d0, k1 + d1])?;
            }
        }
        acc.is_finite().then_some(acc)
    }

    /// Discrete Laplacian at one interior node.
    pub fn laplacian_at(&self, idx: usize) -> Result<T, GridError> {
        self.require_interior(idx)?;
        let h2 = self.grid.h * self.grid.h;
        let v = &self.values;
        let mut acc = T::zero();
        for s in self.grid.strides().into_iter().take(self.grid.base_dim) {
            acc += v[idx + s] - T::cst(2.0) * v[idx] + v[idx - s];
        }
        Ok(acc / h2)
    }

    /// Discrete Laplacian on interior nodes; NaN elsewhere.
    pub fn laplacian(&self) -> Self {
        let values = (0..self.grid.len())
            .map(|i| self.laplacian_at(i).unwrap_or_else(|_| T::nan()))
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Sampled nodes (finite values) in `B'_r(center)`.
    pub fn sampled_in_ball(&self, center: [T; 2], r: T) -> Vec<usize> {
        self.grid
            .nodes_in_ball(center, r)
            .into_iter()
            .filter(|&i| self.values[i].is_finite())
            .collect()
    }

    fn sampled_or_err(&self, center: [T; 2], r: T) -> Result<Vec<usize>, GridError> {
        let nodes = self.sampled_in_ball(center, r);
        if nodes.is_empty() {
            Err(GridError::EmptyBall {
                center: [center[0].as_f64(), center[1].as_f64()],
                r: r.as_f64(),
            })
        } else {
            Ok(nodes)
        }
    }

    /// `max - min` of the samples in `B'_r(center)`.
    pub fn oscillation(&self, center: [T; 2], r: T) -> Result<T, GridError> {
        let nodes = self.sampled_or_err(center, r)?;
        let (lo, hi) = nodes.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &i| {
            let v = self.values[i];
            (lo.min(v), hi.max(v))
        });
        Ok(hi - lo)
    }

    /// Largest `|f|` over `B'_r(center)`.
    pub fn sup_abs(&self, center: [T; 2], r: T) -> Result<T, GridError> {
        let nodes = self.sampled_or_err(center, r)?;
        Ok(nodes.iter().fold(T::zero(), |m, &i| m.max(self.values[i].abs())))
    }

    /// Largest `|f|` over every sampled node.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Minimum over sampled nodes with its node; ties go to the smallest index.
    pub fn argmin(&self) -> Option<(usize, T)> {
        argmin_over(self.values.iter().copied().enumerate().filter(|(_, v)| v.is_finite()))
    }

    pub fn argmax(&self) -> Option<(usize, T)> {
        argmin_over(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .map(|(i, &v)| (i, -v)),
        )
        .map(|(i, v)| (i, -v))
    }

    /// `sup |f(x) - f(y)| / |x - y|^σ` over distinct sampled node pairs in
    /// `B'_r(center)`.
    pub fn holder_seminorm(&self, sigma: T, center: [T; 2], r: T) -> Result<HolderEstimate<T>, GridError> {
        let nodes = self.sampled_in_ball(center, r);
        self.holder_seminorm_on(sigma, &nodes)
    }

    /// Hölder seminorm over an explicit, increasing list of sampled nodes.
    pub fn holder_seminorm_on(&self, sigma: T, nodes: &[usize]) -> Result<HolderEstimate<T>, GridError> {
        if !(sigma > T::zero() && sigma <= T::one()) {
            return Err(GridError::Exponent(sigma.as_f64()));
        }
        if nodes.len() < 2 {
            return Err(GridError::TooFewNodes(nodes.len()));
        }
        let table = self.grid.power_table(sigma);
        let grid = &self.grid;
        let vals = &self.values;
        let best = nodes
            .par_iter()
            .enumerate()
            .map(|(a, &i)| {
                let mut best = (T::zero(), (i, nodes[a + 1..].first().copied().unwrap_or(i)));
                for &j in &nodes[a + 1..] {
                    let q = (vals[i] - vals[j]).abs() / table[grid.offset_sq(i, j)];
                    if q > best.0 {
                        best = (q, (i, j));
                    }
                }
                best
            })
            .reduce(|| (T::neg_infinity(), (usize::MAX, usize::MAX)), max_pair);
        Ok(HolderEstimate {
            value: best.0,
            pair: best.1,
            quantization: best.0 * grid.h.powf(sigma),
        })
    }
}

/// Central-difference gradient and Hessian at `idx`, which must be interior.
pub(crate) fn derivatives<T: Scalar>(grid: &Grid<T>, v: &[T], idx: usize) -> ([T; 2], [[T; 2]; 2]) {
    let h = grid.h;
    let h2 = h * h;
    let c = v[idx];
    let two = T::cst(2.0);
    let [s0, s1] = grid.strides();
    let mut g = [T::zero(); 2];
    let mut hs = [[T::zero(); 2]; 2];
    g[0] = (v[idx + s0] - v[idx - s0]) / (two * h);
    hs[0][0] = (v[idx + s0] - two * c + v[idx - s0]) / h2;
    if grid.base_dim == 2 {
        g[1] = (v[idx + s1] - v[idx - s1]) / (two * h);
        hs[1][1] = (v[idx + s1] - two * c + v[idx - s1]) / h2;
        let m = (v[idx + s0 + s1] - v[idx + s0 - s1] - v[idx - s0 + s1] + v[idx - s0 - s1]) / (T::cst(4.0) * h2);
        hs[0][1] = m;
        hs[1][0] = m;
    }
    (g, hs)
}

/// Keeps the larger value; equal values keep the lexicographically smaller pair.
fn max_pair<T: Scalar>(a: (T, (usize, usize)), b: (T, (usize, usize))) -> (T, (usize, usize)) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Minimum of `(index, value)` pairs, ties broken toward the smaller index.
pub fn argmin_over<T: Scalar>(it: impl Iterator<Item = (usize, T)>) -> Option<(usize, T)> {
    it.fold(None, |best: Option<(usize, T)>, (i, v)| match best {
        Some((bi, bv)) if bv < v || (bv == v && bi < i) => Some((bi, bv)),
        _ => Some((i, v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(nodes: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::with_nodes_per_diameter(2, 1.0, nodes).unwrap())
    }

    #[test]
    fn geometry_of_small_disk() {
        let g = disk(9);
        assert_eq!(g.half(), 4);
        assert_eq!(g.len(), 81);
        assert_eq!(g.coord(g.origin()), [0.0, 0.0]);
        assert_eq!(g.kind(g.index([4, 0]).unwrap()), NodeKind::Boundary);
        assert_eq!(g.kind(g.index([3, 3]).unwrap()), NodeKind::Exterior);
        assert_eq!(g.kind(g.origin()), NodeKind::Interior);
        for i in g.interior_nodes() {
            let k = g.offset(i);
            for d in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
                assert!(g.in_domain(g.index([k[0] + d[0], k[1] + d[1]]).unwrap()));
            }
        }
    }

    #[test]
    fn interval_grid() {
        let g = Arc::new(Grid::<f64>::new(1, 0.5, 0.125).unwrap());
        assert_eq!(g.len(), 9);
        assert_eq!(g.boundary_nodes().len(), 2);
        let f = GridFunction::from_fn(g.clone(), |x| x[0] * x[0]);
        assert_eq!(f.laplacian_at(g.origin()).unwrap(), 2.0);
        assert_eq!(f.hessian(g.origin()).unwrap()[1][1], 0.0);
        assert!(f.gradient(g.boundary_nodes()[0]).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert_eq!(Grid::<f64>::new(3, 1.0, 0.1).unwrap_err(), GridError::BaseDim(3));
        assert!(Grid::<f64>::new(2, 1.0, 0.0).is_err());
        assert!(Grid::<f64>::with_nodes_per_diameter(2, 1.0, 8).is_err());
    }

    #[test]
    fn linear_oscillation_and_holder() {
        let g = disk(33);
        let f = GridFunction::from_fn(g.clone(), |x| 3.0 * x[0] - x[1]);
        let osc = f.oscillation([0.0, 0.0], 1.0).unwrap();
        let exact = 2.0 * 10f64.sqrt();
        assert!(osc <= exact && osc >= exact - 2.0 * 10f64.sqrt() * g.h());
        let c = GridFunction::constant(g.clone(), 2.0);
        assert_eq!(c.holder_seminorm(0.5, [0.0, 0.0], 1.0).unwrap().value, 0.0);
        assert!(c.oscillation([5.0, 5.0], 0.1).is_err());
    }

    #[test]
    fn restrict_keeps_values() {
        let g = disk(33);
        let f = GridFunction::from_fn(g, |x| x[0] + 2.0 * x[1]);
        let r = f.restrict(0.5).unwrap();
        assert_eq!(r.grid().half(), 8);
        let i = r.grid().index([3, -2]).unwrap();
        assert_eq!(r.value(i), f.at([3, -2]).unwrap());
        assert!(r.restrict(0.75).is_err());
    }
}
