//! Uniform radial grid for radially symmetric functions on R^N.
//!
//! Node `j` (1-based in the formulas, 0-based in code) sits at `r_j = j h` with
//! `h = r_max / (n + 1)`. Each node owns the spherical shell between the edge
//! midpoints `r_{j-1/2}` and `r_{j+1/2}` (the first shell is the ball of
//! radius `3h/2`), so the quadrature weight of a node is the exact volume of
//! its shell. Profiles are extended by even reflection at the origin
//! (`u_0 = u_1`) and by the homogeneous Dirichlet value `u_{n+1} = 0`.
//!
//! The discrete Laplacian is *defined* as the negative gradient of the
//! edge-based Dirichlet energy divided by the node weights, which makes
//! `sum_j w_j (-Δu)_j φ_j` exactly twice the discrete Dirichlet form.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Smallest admissible number of interior nodes.
pub const MIN_NODES: usize = 16;

/// Volume of the unit ball in R^N.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // α(0) = 1, α(1) = 2, α(N) = 2π/N · α(N-2)
    let even = dim.is_multiple_of(2);
    let mut alpha = if even { 1.0 } else { 2.0 };
    let mut d = if even { 2 } else { 3 };
    while d <= dim {
        alpha *= 2.0 * PI / d as f64;
        d += 2;
    }
    alpha
}

/// Compensated (Neumaier) summation. Used for every quadrature so that energy
/// differences near a minimizer stay above the rounding floor.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Nodal values of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile(Vec<f64>);

impl Profile {
    pub fn new(values: Vec<f64>) -> Self {
        Profile(values)
    }

    pub fn zeros(n: usize) -> Self {
        Profile(vec![0.0; n])
    }

    /// Samples `f(r_j)` at every node of `grid`.
    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Profile(grid.nodes().iter().map(|&r| f(r)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for Profile {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Profile {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Profile {
    fn from(v: Vec<f64>) -> Self {
        Profile(v)
    }
}

/// One-dimensional discretization of radial functions on R^N.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    r_max: f64,
    h: f64,
    ball_volume: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `S_N r_{e+1/2}^{N-1} / h` for the edge between node `e` and `e + 1`;
    /// the last entry couples node `n - 1` to the Dirichlet ghost.
    edge_coeffs: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, r_max: f64, n: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension N = {dim}; need N >= 3 for a subcritical window 2 < p < 2N/(N-2)"
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "r_max = {r_max} must be positive"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "n = {n} interior nodes; need at least {MIN_NODES}"
            )));
        }
        let h = r_max / (n as f64 + 1.0);
        let alpha = unit_ball_volume(dim);
        let sphere = dim as f64 * alpha;
        let nodes: Vec<f64> = (1..=n).map(|j| j as f64 * h).collect();
        let ball = |r: f64| alpha * r.powi(dim as i32);
        let weights = (1..=n)
            .map(|j| {
                let outer = (j as f64 + 0.5) * h;
                let inner = if j == 1 { 0.0 } else { (j as f64 - 0.5) * h };
                ball(outer) - ball(inner)
            })
            .collect();
        let edge_coeffs = (1..=n)
            .map(|e| sphere * ((e as f64 + 0.5) * h).powi(dim as i32 - 1) / h)
            .collect();
        Ok(RadialGrid {
            dim,
            r_max,
            h,
            ball_volume: alpha,
            nodes,
            weights,
            edge_coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// α(N), the volume of the unit ball.
    pub fn ball_volume(&self) -> f64 {
        self.ball_volume
    }

    /// S_N = N α(N), the area of the unit sphere.
    pub fn sphere_area(&self) -> f64 {
        self.dim as f64 * self.ball_volume
    }

    /// Volume of the ball of radius `r` in R^N.
    pub fn ball_measure(&self, r: f64) -> f64 {
        self.ball_volume * r.powi(self.dim as i32)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `sum_j w_j f_j`, approximating the integral of `f(|x|)` over R^N.
    pub fn integrate(&self, f: &Profile) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.integrate_slice(f))
    }

    pub(crate) fn integrate_slice(&self, f: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f)
            .map(|(w, v)| w * v)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Weighted inner product `sum_j w_j a_j b_j`.
    pub(crate) fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .collect::<CompensatedSum>()
            .value()
    }

    pub(crate) fn norm_sq(&self, a: &[f64]) -> f64 {
        self.inner(a, a)
    }

    /// Half the squared L² norm of the gradient, edge-midpoint weighted.
    pub fn dirichlet_energy(&self, u: &Profile) -> Result<f64> {
        self.check_len(u.len())?;
        Ok(self.dirichlet_slice(u))
    }

    pub(crate) fn dirichlet_slice(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let mut acc = CompensatedSum::new();
        for e in 0..n {
            let next = if e + 1 < n { u[e + 1] } else { 0.0 };
            let d = next - u[e];
            acc.add(self.edge_coeffs[e] * d * d);
        }
        0.5 * acc.value()
    }

    /// Gradient of the Dirichlet energy with respect to the nodal values,
    /// written into `out` (this is `w_j (-Δu)_j`).
    pub(crate) fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for j in 0..n {
            let next = if j + 1 < n { u[j + 1] } else { 0.0 };
            let mut g = self.edge_coeffs[j] * (u[j] - next);
            if j > 0 {
                g += self.edge_coeffs[j - 1] * (u[j] - u[j - 1]);
            }
            out[j] = g;
        }
    }

    /// Discrete radial Laplacian Δu.
    pub fn laplacian(&self, u: &Profile) -> Result<Profile> {
        self.check_len(u.len())?;
        let mut out = vec![0.0; u.len()];
        self.stiffness_apply(u, &mut out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = -*o / w;
        }
        Ok(Profile(out))
    }

    /// Solves `(K + shift W) x = rhs` where `K` is the Dirichlet stiffness
    /// matrix and `W = diag(w)`. `shift` must be positive.
    pub(crate) fn solve_shifted(&self, shift: f64, rhs: &[f64], x: &mut [f64]) {
        // Thomas algorithm on the symmetric tridiagonal system.
        let n = rhs.len();
        let c = &self.edge_coeffs;
        let mut upper = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut prev_upper = 0.0;
        let mut prev_y = 0.0;
        for j in 0..n {
            let diag = c[j] + if j > 0 { c[j - 1] } else { 0.0 } + shift * self.weights[j];
            let lower = if j > 0 { -c[j - 1] } else { 0.0 };
            let denom = diag - lower * prev_upper;
            upper[j] = if j + 1 < n { -c[j] / denom } else { 0.0 };
            y[j] = (rhs[j] - lower * prev_y) / denom;
            prev_upper = upper[j];
            prev_y = y[j];
        }
        x[n - 1] = y[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = y[j] - upper[j] * x[j + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            unit_ball_volume(5),
            8.0 * PI * PI / 15.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(unit_ball_volume(3), 4.18879, epsilon = 1e-5);
        assert_relative_eq!(unit_ball_volume(4), 4.93480, epsilon = 1e-5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            RadialGrid::new(2, 10.0, 100),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(3, 0.0, 100),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(3, -1.0, 100),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(3, 10.0, 15),
            Err(Error::InvalidGrid(_))
        ));
        assert!(RadialGrid::new(3, 10.0, 16).is_ok());
    }

    #[test]
    fn grid_layout() {
        let g = RadialGrid::new(3, 10.0, 99).unwrap();
        assert_relative_eq!(g.spacing(), 0.1);
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(g.nodes()[g.len() - 1] < g.r_max());
        assert!(g.weights().iter().all(|&w| w > 0.0));
        // shells tile the ball of radius r_{n+1/2}
        let total: f64 = g.weights().iter().sum();
        assert_relative_eq!(total, g.ball_measure(9.95), max_relative = 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = RadialGrid::new(3, 2.0, 2000).unwrap();
        let ind = Profile::from_fn(&g, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        let v = g.integrate(&ind).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 10.0 * g.spacing());

        let g = RadialGrid::new(3, 8.0, 2000).unwrap();
        let gauss = Profile::from_fn(&g, |r| (-r * r).exp());
        assert!((g.integrate(&gauss).unwrap() - PI.powf(1.5)).abs() < 1e-4);

        assert_eq!(g.integrate(&Profile::zeros(g.len())).unwrap(), 0.0);
        assert!(matches!(
            g.integrate(&Profile::zeros(3)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ball_indicator_consistency_improves() {
        let err = |n| {
            let g = RadialGrid::new(3, 3.0, n).unwrap();
            let rho = 1.2345;
            let ind = Profile::from_fn(&g, |r| if r <= rho { 1.0 } else { 0.0 });
            (g.integrate(&ind).unwrap() - g.ball_measure(rho)).abs()
        };
        assert!(err(4000) < err(250));
        assert!(err(4000) < 0.05);
    }

    #[test]
    fn dirichlet_energy_of_ramp_profile() {
        // plateau 1 on [0,10], unit-slope ramp to 0 on [10,11]:
        // ½ ∫|∇u|² = ½ α(3) (11³ - 10³)
        let g = RadialGrid::new(3, 20.0, 1999).unwrap();
        assert!(g.spacing() <= 0.01);
        let u = Profile::from_fn(&g, |r| (11.0 - r).clamp(0.0, 1.0));
        let exact = 0.5 * unit_ball_volume(3) * (11f64.powi(3) - 1000.0);
        assert_relative_eq!(exact, 693.25, epsilon = 0.01);
        let d = g.dirichlet_energy(&u).unwrap();
        assert!((d - exact).abs() / exact < 0.01);
        assert_eq!(g.dirichlet_energy(&Profile::zeros(g.len())).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_energy_is_surface_order() {
        let g = RadialGrid::new(3, 100.0, 20000).unwrap();
        let ratio = |r0: f64| {
            let u = Profile::from_fn(&g, |r| (1.0 + r0 - r).clamp(0.0, 1.0));
            g.dirichlet_energy(&u).unwrap() / (g.ball_measure(r0))
        };
        let (a, b) = (ratio(10.0), ratio(80.0));
        assert!(b < a / 5.0);
    }

    #[test]
    fn laplacian_of_gaussian_is_second_order() {
        let max_err = |n| {
            let g = RadialGrid::new(3, 8.0, n).unwrap();
            let u = Profile::from_fn(&g, |r| (-r * r).exp());
            let lap = g.laplacian(&u).unwrap();
            g.nodes()
                .iter()
                .zip(lap.iter())
                .filter(|(r, _)| **r < 6.0)
                .map(|(r, l)| (l - (4.0 * r * r - 6.0) * (-r * r).exp()).abs())
                .fold(0.0, f64::max)
        };
        let coarse = max_err(399);
        let fine = max_err(799);
        assert!(coarse < 1e-2);
        assert!(coarse / fine > 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn laplacian_of_dirichlet_mode() {
        let r_max = 10.0;
        let k = PI / r_max;
        let err = |n| {
            let g = RadialGrid::new(3, r_max, n).unwrap();
            let u = Profile::from_fn(&g, |r| (k * r).sin() / r);
            let lap = g.laplacian(&u).unwrap();
            lap.iter()
                .zip(u.iter())
                .map(|(l, v)| (-l - k * k * v).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(499), err(999));
        assert!(a < 1e-5);
        assert!(a / b > 3.5);
        let g = RadialGrid::new(3, r_max, 100).unwrap();
        assert!(g
            .laplacian(&Profile::zeros(100))
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn shifted_solve_inverts_operator() {
        let g = RadialGrid::new(4, 5.0, 64).unwrap();
        let x: Vec<f64> = (0..64).map(|j| ((j * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let mut rhs = vec![0.0; 64];
        g.stiffness_apply(&x, &mut rhs);
        for (r, (w, v)) in rhs.iter_mut().zip(g.weights().iter().zip(&x)) {
            *r += 2.5 * w * v;
        }
        let mut y = vec![0.0; 64];
        g.solve_shifted(2.5, &rhs, &mut y);
        for (a, b) in x.iter().zip(&y) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
