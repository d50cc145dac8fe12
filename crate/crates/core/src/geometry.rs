//! Rigid motions and dilations of surface samples, and re-sampling of a
//! graph in a rotated frame.

use crate::envelope::{Sample, SurfaceSamples};
use crate::grid::GridFunction;
use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub fn to_vec3<T: Scalar>(p: &Sample<T>) -> Vec3<T> {
    [p.base[0], p.base[1], p.height]
}

pub fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn normalize<T: Scalar>(a: Vec3<T>) -> Vec3<T> {
    let s = dot(a, a).sqrt();
    [a[0] / s, a[1] / s, a[2] / s]
}

pub fn mat_vec<T: Scalar>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn transpose<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let mut t = [[T::zero(); 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[j][i] = v;
        }
    }
    t
}

/// Rotation taking the unit vector `nu` to `e_n = (0, 0, 1)` about the axis
/// `nu × e_n`. For `nu` in the `x₁x₃`-plane the rotation fixes `x₂`, so
/// samples of a one-dimensional base stay in that plane.
pub fn rotation_to_en<T: Scalar>(nu: Vec3<T>) -> Mat3<T> {
    let nu = normalize(nu);
    // Axis k = nu × e₃ = (nu₁, -nu₀, 0), |k| = sin θ, cos θ = nu₂.
    let (kx, ky) = (nu[1], -nu[0]);
    let c = nu[2];
    let s2 = kx * kx + ky * ky;
    let mut r = [[T::zero(); 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = T::one();
    }
    if s2 == T::zero() {
        if c < T::zero() {
            // Half turn about x₁.
            r[1][1] = -T::one();
            r[2][2] = -T::one();
        }
        return r;
    }
    // R = I + [k]ₓ + [k]ₓ² (1 - c)/s².
    let kmat = [[T::zero(), T::zero(), ky], [T::zero(), T::zero(), -kx], [-ky, kx, T::zero()]];
    let f = (T::one() - c) / s2;
    for i in 0..3 {
        for j in 0..3 {
            let mut sq = T::zero();
            for (l, kl) in kmat.iter().enumerate() {
                sq += kmat[i][l] * kl[j];
            }
            r[i][j] += kmat[i][j] + f * sq;
        }
    }
    r
}

/// Similarity `x ↦ R(x - center)/scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub center: Vec3<T>,
    pub rotation: Mat3<T>,
    pub scale: T,
}

impl<T: Scalar> Frame<T> {
    pub fn identity() -> Self {
        Frame {
            center: [T::zero(); 3],
            rotation: rotation_to_en([T::zero(), T::zero(), T::one()]),
            scale: T::one(),
        }
    }

    pub fn new(center: Vec3<T>, nu: Vec3<T>, scale: T) -> Self {
        Frame {
            center,
            rotation: rotation_to_en(nu),
            scale,
        }
    }

    pub fn forward(&self, x: Vec3<T>) -> Vec3<T> {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let y = mat_vec(&self.rotation, d);
        [y[0] / self.scale, y[1] / self.scale, y[2] / self.scale]
    }

    pub fn inverse(&self, y: Vec3<T>) -> Vec3<T> {
        let s = [y[0] * self.scale, y[1] * self.scale, y[2] * self.scale];
        let x = mat_vec(&transpose(&self.rotation), s);
        [x[0] + self.center[0], x[1] + self.center[1], x[2] + self.center[2]]
    }

    /// Composition: first `self`, then `next`.
    pub fn then(&self, next: &Frame<T>) -> Frame<T> {
        let mut rot = [[T::zero(); 3]; 3];
        for (i, row) in rot.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).fold(T::zero(), |acc, l| acc + next.rotation[i][l] * self.rotation[l][j]);
            }
        }
        Frame {
            center: self.inverse(next.center),
            rotation: rot,
            scale: self.scale * next.scale,
        }
    }

    pub fn apply(&self, samples: &SurfaceSamples<T>) -> SurfaceSamples<T> {
        let points = samples
            .points
            .iter()
            .map(|p| {
                let y = self.forward(to_vec3(p));
                Sample {
                    base: [y[0], y[1]],
                    height: y[2],
                }
            })
            .collect();
        SurfaceSamples {
            base_dim: samples.base_dim,
            points,
        }
    }
}

/// Height `t` with `frame.inverse(y', t)` on the graph of `u`, found by the
/// fixed-point iteration `t ← (u(q' + s t ν') - q_n)/(s ν_n)`, which
/// contracts while `|∇u| |ν'| < ν_n`. `None` when the point leaves the
/// interpolation domain or the iteration stalls.
pub fn graph_height_in_frame<T: Scalar>(u: &GridFunction<T>, frame: &Frame<T>, y: [T; 2]) -> Option<T> {
    let q = frame.inverse([y[0], y[1], T::zero()]);
    let nu = mat_vec(&transpose(&frame.rotation), [T::zero(), T::zero(), T::one()]);
    let s = frame.scale;
    let mut t = T::zero();
    let tol = T::epsilon() * T::cst(16.0);
    for _ in 0..200 {
        let base = [q[0] + s * t * nu[0], q[1] + s * t * nu[1]];
        let next = (u.interpolate(base)? - q[2]) / (s * nu[2]);
        if !next.is_finite() {
            return None;
        }
        if (next - t).abs() <= tol * (T::one() + next.abs()) {
            return Some(next);
        }
        t = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_maps_nu_to_en() {
        let nu: Vec3<f64> = normalize([0.1, -0.2, 1.0]);
        let r = rotation_to_en(nu);
        let e = mat_vec(&r, nu);
        assert!((e[0]).abs() < 1e-15 && (e[1]).abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
        // Rows are orthonormal.
        for (i, a) in r.iter().enumerate() {
            for (j, b) in r.iter().enumerate() {
                assert!((dot(*a, *b) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn planar_nu_fixes_second_axis() {
        let r: Mat3<f64> = rotation_to_en(normalize([0.3, 0.0, 1.0]));
        assert_eq!(r[1], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn frame_round_trip_and_composition() {
        let f: Frame<f64> = Frame::new([0.1, 0.0, 0.02], normalize([0.05, 0.01, 1.0]), 0.125);
        let g: Frame<f64> = Frame::new([0.2, -0.1, 0.0], normalize([-0.02, 0.03, 1.0]), 0.5);
        let x = [0.3, -0.2, 0.05];
        let back = f.inverse(f.forward(x));
        for k in 0..3 {
            assert!((back[k] - x[k]).abs() < 1e-15);
        }
        let a = g.forward(f.forward(x));
        let b = f.then(&g).forward(x);
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-13, "{a:?} {b:?}");
        }
    }
}
