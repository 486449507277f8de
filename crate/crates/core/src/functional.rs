//! The constrained energy on radial fields and its ω-eliminated reduction.
//!
//! With `ω_i = C_i / ‖u_i‖²` the charge constraint `ω_i ‖u_i‖² = C_i` holds by
//! construction, and the energy becomes
//!
//! ```text
//! J(u) = ∫ F(u) + Σ_i ½‖∇u_i‖² + ½ Σ_i C_i² / ‖u_i‖²
//! ```
//!
//! whose weighted-L² gradient is `-Δu_i + D_iF(u) - ω_i² u_i`, the
//! Euler–Lagrange operator of the elliptic system with multiplier `λ_i = ω_i`.
//!
//! All norms here are plain L² norms (and the Dirichlet energy); they are
//! equivalent to, but not the same as, the mass-weighted Hilbertian norm.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, Profile, RadialGrid};
use crate::potential::PotentialSpec;

/// `k` radial profiles sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    components: Vec<Profile>,
}

impl FieldSet {
    pub fn new(components: Vec<Profile>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument(
                "field set needs at least one component".into(),
            ));
        };
        let n = first.len();
        for c in &components {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument("field values must be finite".into()));
            }
        }
        Ok(FieldSet { components })
    }

    /// One profile per closure, sampled on `grid`.
    pub fn from_fns<F: Fn(f64) -> f64>(grid: &RadialGrid, fns: &[F]) -> Result<Self> {
        Self::new(fns.iter().map(|f| Profile::from_fn(grid, f)).collect())
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn nodes(&self) -> usize {
        self.components[0].len()
    }

    pub fn component(&self, i: usize) -> &Profile {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut Profile {
        &mut self.components[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Profile> {
        self.components.iter()
    }

    pub fn into_components(self) -> Vec<Profile> {
        self.components
    }

    fn check_shape(&self, grid: &RadialGrid, spec: &PotentialSpec) -> Result<()> {
        if self.components() != spec.components() {
            return Err(Error::ComponentMismatch {
                expected: spec.components(),
                actual: self.components(),
            });
        }
        grid.check_len(self.nodes())
    }
}

/// Frequencies `ω_1..ω_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequencies(pub Vec<f64>);

impl Frequencies {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Strictly positive charges `C_1..C_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeVector(Vec<f64>);

impl ChargeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty charge vector".into()));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::NonPositiveCharge { index, value });
        }
        Ok(ChargeVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Guard below which a component is considered lost: `1e-12 α(N) r_max^N`.
pub fn floor_norm(grid: &RadialGrid) -> f64 {
    1e-12 * grid.ball_measure(grid.r_max())
}

/// Squared L² norms of every component.
pub fn norms_sq(grid: &RadialGrid, u: &FieldSet) -> Result<Vec<f64>> {
    grid.check_len(u.nodes())?;
    Ok(u.iter().map(|c| grid.norm_sq(c)).collect())
}

/// `∫ F(u(|x|)) dx`, evaluated nodewise and quadratured.
pub fn potential_integral(grid: &RadialGrid, spec: &PotentialSpec, u: &FieldSet) -> Result<f64> {
    u.check_shape(grid, spec)?;
    let mut point = vec![0.0; u.components()];
    let mut acc = CompensatedSum::new();
    for (j, w) in grid.weights().iter().enumerate() {
        for (p, c) in point.iter_mut().zip(u.iter()) {
            *p = c[j];
        }
        acc.add(w * spec.eval(&point));
    }
    Ok(acc.value())
}

fn check_charges(u: &FieldSet, c: &ChargeVector) -> Result<()> {
    if c.len() != u.components() {
        return Err(Error::ComponentMismatch {
            expected: u.components(),
            actual: c.len(),
        });
    }
    Ok(())
}

/// `E(u, ω) = ∫F(u) + Σ ½‖∇u_i‖² + ½ Σ ω_i² ‖u_i‖²`.
pub fn total_energy(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    omega: &Frequencies,
) -> Result<f64> {
    u.check_shape(grid, spec)?;
    if omega.0.len() != u.components() {
        return Err(Error::ComponentMismatch {
            expected: u.components(),
            actual: omega.0.len(),
        });
    }
    let mut e = potential_integral(grid, spec, u)?;
    for (c, w) in u.iter().zip(&omega.0) {
        e += grid.dirichlet_slice(c) + 0.5 * w * w * grid.norm_sq(c);
    }
    Ok(e)
}

/// `ω_i = C_i / ‖u_i‖²`.
pub fn recover_omega(grid: &RadialGrid, u: &FieldSet, c: &ChargeVector) -> Result<Frequencies> {
    check_charges(u, c)?;
    let norms = checked_norms(grid, u)?;
    Ok(Frequencies(
        c.as_slice()
            .iter()
            .zip(&norms)
            .map(|(c, n)| c / n)
            .collect(),
    ))
}

fn checked_norms(grid: &RadialGrid, u: &FieldSet) -> Result<Vec<f64>> {
    let norms = norms_sq(grid, u)?;
    let floor = floor_norm(grid);
    if let Some((index, &norm_sq)) = norms.iter().enumerate().find(|(_, n)| **n < floor) {
        return Err(Error::ComponentCollapse {
            index,
            norm_sq,
            floor,
        });
    }
    Ok(norms)
}

/// Reduced energy `J(u)`; identical to `total_energy(u, recover_omega(u, C))`.
pub fn reduced_energy(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    c: &ChargeVector,
) -> Result<f64> {
    u.check_shape(grid, spec)?;
    check_charges(u, c)?;
    Ok(evaluate(grid, spec, u, c, None)?.energy)
}

/// Weighted-L² gradient of [`reduced_energy`]:
/// `-Δu_i + D_iF(u) - ω_i² u_i` at every node.
pub fn reduced_gradient(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    c: &ChargeVector,
) -> Result<FieldSet> {
    u.check_shape(grid, spec)?;
    check_charges(u, c)?;
    let mut grad = vec![vec![0.0; u.nodes()]; u.components()];
    evaluate(grid, spec, u, c, Some(&mut grad))?;
    Ok(FieldSet {
        components: grad.into_iter().map(Profile::new).collect(),
    })
}

/// Pieces of one reduced-energy evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub energy: f64,
    pub norms_sq: Vec<f64>,
    pub dirichlet: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Reduced energy and, optionally, its gradient. Shapes must already be checked.
pub(crate) fn evaluate(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    c: &ChargeVector,
    grad: Option<&mut [Vec<f64>]>,
) -> Result<Evaluation> {
    let norms = checked_norms(grid, u)?;
    let omega: Vec<f64> = c
        .as_slice()
        .iter()
        .zip(&norms)
        .map(|(c, n)| c / n)
        .collect();
    let dirichlet: Vec<f64> = u.iter().map(|p| grid.dirichlet_slice(p)).collect();
    let pot = potential_integral(grid, spec, u)?;
    let mut energy = CompensatedSum::new();
    energy.add(pot);
    for ((d, cc), n) in dirichlet.iter().zip(c.as_slice()).zip(&norms) {
        energy.add(*d);
        energy.add(0.5 * cc * cc / n);
    }

    if let Some(grad) = grad {
        let k = u.components();
        let weights = grid.weights();
        for (g, p) in grad.iter_mut().zip(u.iter()) {
            grid.stiffness_apply(p, g);
            for (gj, w) in g.iter_mut().zip(weights) {
                *gj /= w;
            }
        }
        let mut point = vec![0.0; k];
        let mut dr = vec![0.0; k];
        let masses = spec.masses();
        for j in 0..u.nodes() {
            for (p, comp) in point.iter_mut().zip(u.iter()) {
                *p = comp[j];
            }
            spec.grad_interaction_into(&point, &mut dr);
            for i in 0..k {
                grad[i][j] +=
                    masses[i] * masses[i] * point[i] + dr[i] - omega[i] * omega[i] * point[i];
            }
        }
    }

    Ok(Evaluation {
        energy: energy.value(),
        norms_sq: norms,
        dirichlet,
        omega,
    })
}

/// Euler–Lagrange residual of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    /// `false` when `‖u_i‖ = 0` and `value` is the unnormalized norm.
    pub normalized: bool,
}

/// `‖-Δu_i + D_iF(u) - ω_i² u_i‖ / ‖u_i‖` per component (weighted L²).
pub fn el_residual(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    omega: &Frequencies,
) -> Result<Vec<Residual>> {
    u.check_shape(grid, spec)?;
    if omega.0.len() != u.components() {
        return Err(Error::ComponentMismatch {
            expected: u.components(),
            actual: omega.0.len(),
        });
    }
    let k = u.components();
    let n = u.nodes();
    let mut res = vec![vec![0.0; n]; k];
    for (r, p) in res.iter_mut().zip(u.iter()) {
        grid.stiffness_apply(p, r);
        for (x, w) in r.iter_mut().zip(grid.weights()) {
            *x /= w;
        }
    }
    let mut point = vec![0.0; k];
    let mut dr = vec![0.0; k];
    let masses = spec.masses();
    for j in 0..n {
        for (p, comp) in point.iter_mut().zip(u.iter()) {
            *p = comp[j];
        }
        spec.grad_interaction_into(&point, &mut dr);
        for i in 0..k {
            let w = omega.0[i];
            res[i][j] += masses[i] * masses[i] * point[i] + dr[i] - w * w * point[i];
        }
    }
    Ok(res
        .iter()
        .zip(u.iter())
        .map(|(r, p)| {
            let num = grid.norm_sq(r).sqrt();
            let den = grid.norm_sq(p).sqrt();
            if den > 0.0 {
                Residual {
                    value: num / den,
                    normalized: true,
                }
            } else {
                Residual {
                    value: num,
                    normalized: false,
                }
            }
        })
        .collect())
}

/// Plateau `v_i` on `[0, r]`, linear ramp to zero on `[r, r + 1]`, zero beyond.
pub fn build_test_profile(grid: &RadialGrid, v: &[f64], r: f64) -> Result<FieldSet> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty plateau vector".into()));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "plateau radius {r} must be >= 0"
        )));
    }
    if r + 1.0 >= grid.r_max() {
        return Err(Error::SupportExceedsGrid {
            extent: r + 1.0,
            r_max: grid.r_max(),
        });
    }
    let shape = |rho: f64| (1.0 + r - rho).clamp(0.0, 1.0);
    FieldSet::new(
        v.iter()
            .map(|&vi| Profile::from_fn(grid, |rho| vi * shape(rho)))
            .collect(),
    )
}
