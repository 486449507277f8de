//! Hylomorphy margins of the plateau test profiles and a posteriori checks of
//! a computed solution.
//!
//! Charges here are induced by the profile: `C_i = ω_i ‖u_{r,i}‖²`, so every
//! scan row is a feasible point of the constraint set for its own `C`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{
    build_test_profile, el_residual, norms_sq, total_energy, ChargeVector, FieldSet, Frequencies,
    Residual,
};
use crate::grid::RadialGrid;
use crate::potential::PotentialSpec;

/// One radius of a hylomorphy scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: f64,
    pub charges: Vec<f64>,
    pub energy: f64,
    /// `E / (α(N) r^N)`.
    pub normalized_energy: f64,
    /// `2E - m_h C_h` for every component.
    pub margins: Vec<f64>,
}

impl ScanRow {
    pub fn admissible(&self) -> bool {
        self.margins.iter().all(|m| *m < 0.0)
    }
}

/// Rows ordered by increasing radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HylomorphyScan {
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub rows: Vec<ScanRow>,
}

impl HylomorphyScan {
    /// Smallest scanned radius from which every row has all margins negative.
    pub fn threshold_radius(&self) -> Option<f64> {
        threshold_radius(&self.rows)
    }
}

/// Smallest `r` such that all rows with radius `>= r` are admissible.
pub fn threshold_radius(rows: &[ScanRow]) -> Option<f64> {
    let mut found = None;
    for row in rows.iter().rev() {
        if !row.admissible() {
            break;
        }
        found = Some(row.r);
    }
    found
}

/// 8 geometric radii from `r_max / 8` to `r_max / 2`.
pub fn default_radii(r_max: f64) -> Vec<f64> {
    let (lo, hi) = (r_max / 8.0, r_max / 2.0);
    (0..8)
        .map(|i| lo * (hi / lo).powf(i as f64 / 7.0))
        .collect()
}

/// Limit of the normalized energy as `r → ∞`: `F(v) + ½ Σ ω_i² v_i²`.
pub fn asymptotic_density(spec: &PotentialSpec, v: &[f64], omega: &[f64]) -> f64 {
    spec.eval(v) + 0.5 * v.iter().zip(omega).map(|(x, w)| w * w * x * x).sum::<f64>()
}

/// `C_i = ω_i ‖u_{r,i}‖²` for the plateau profile of radius `r`.
pub fn charge_from_profile(
    grid: &RadialGrid,
    v: &[f64],
    omega: &Frequencies,
    r: f64,
) -> Result<ChargeVector> {
    let u = build_test_profile(grid, v, r)?;
    if omega.0.len() != v.len() {
        return Err(Error::ComponentMismatch {
            expected: v.len(),
            actual: omega.0.len(),
        });
    }
    let norms = norms_sq(grid, &u)?;
    ChargeVector::new(omega.0.iter().zip(&norms).map(|(w, n)| w * n).collect())
}

fn check_scan_inputs(spec: &PotentialSpec, v: &[f64], omega: &Frequencies) -> Result<()> {
    let k = spec.components();
    for len in [v.len(), omega.0.len()] {
        if len != k {
            return Err(Error::ComponentMismatch {
                expected: k,
                actual: len,
            });
        }
    }
    if let Some(i) = v.iter().position(|x| *x == 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "v_{} must be nonzero",
            i + 1
        )));
    }
    if let Some(i) = omega.0.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "ω_{} must be positive",
            i + 1
        )));
    }
    Ok(())
}

/// A single scan row at radius `r`.
pub fn hylomorphy_row(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    v: &[f64],
    omega: &Frequencies,
    r: f64,
) -> Result<ScanRow> {
    check_scan_inputs(spec, v, omega)?;
    let u = build_test_profile(grid, v, r)?;
    let norms = norms_sq(grid, &u)?;
    let charges: Vec<f64> = omega.0.iter().zip(&norms).map(|(w, n)| w * n).collect();
    let energy = total_energy(grid, spec, &u, omega)?;
    let margins = spec
        .masses()
        .iter()
        .zip(&charges)
        .map(|(m, c)| 2.0 * energy - m * c)
        .collect();
    Ok(ScanRow {
        r,
        charges,
        energy,
        normalized_energy: energy / grid.ball_measure(r),
        margins,
    })
}

/// Margins `2E(u_r, ω) - m_h C_h(r)` over a list of radii, sorted ascending.
/// Fails on the first radius whose ramp does not fit in the grid.
pub fn hylomorphy_scan(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    v: &[f64],
    omega: &Frequencies,
    radii: &[f64],
) -> Result<HylomorphyScan> {
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let rows = radii
        .iter()
        .map(|&r| hylomorphy_row(grid, spec, v, omega, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(HylomorphyScan {
        v: v.to_vec(),
        omega: omega.0.clone(),
        rows,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `max |u|` over the outer tenth of `[0, r_max]` divided by `max |u|`.
///
/// Decaying profiles give values near zero; profiles that are held up by
/// the Dirichlet wall (spreading modes, plateaus filling the ball) do not.
pub fn boundary_ratio(grid: &RadialGrid, u: &[f64]) -> f64 {
    let cut = 0.9 * grid.r_max();
    let peak = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tail = grid
        .nodes()
        .iter()
        .zip(u)
        .filter(|(r, _)| **r >= cut)
        .fold(0.0f64, |a, (_, x)| a.max(x.abs()));
    if peak > 0.0 {
        tail / peak
    } else {
        0.0
    }
}

/// Thresholds behind the pass flags of a [`VerificationReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationTolerances {
    pub el_residual: f64,
    pub constraint: f64,
    pub multiplier: f64,
    /// Largest admissible [`boundary_ratio`] of a localized component.
    pub boundary_ratio: f64,
}

impl Default for VerificationTolerances {
    fn default() -> Self {
        VerificationTolerances {
            el_residual: 1e-6,
            constraint: 1e-12,
            multiplier: 1e-6,
            boundary_ratio: 1e-3,
        }
    }
}

/// A posteriori checks on `(u, ω)`. Norms are plain L² (not mass weighted).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tolerances: VerificationTolerances,
    pub energy: f64,
    /// `|ω_i ‖u_i‖² - C_i| / C_i`.
    pub constraint_residuals: Vec<f64>,
    pub constraint_pass: bool,
    pub el_residuals: Vec<Residual>,
    pub el_pass: bool,
    pub omega_below_mass: Vec<bool>,
    /// `2E - m_i C_i`; negative means the hylomorphy inequality holds.
    pub hylomorphy_margins: Vec<f64>,
    pub hylomorphy_pass: bool,
    /// `ω_i ≤ 2E / C_i`.
    pub coercivity_omega: Vec<bool>,
    /// `Σ ‖∇u_i‖² ≤ 2E`.
    pub coercivity_gradient: bool,
    /// Multipliers from projecting the field equations onto `u_i`:
    /// `λ_i = <∂_u E, u_i> / <∂_u H_i, u_i>` with `H_i = ω_i ‖u_i‖²`.
    pub multipliers: Vec<f64>,
    /// `max_i |λ_i - ω_i| / ω_i`.
    pub multiplier_residual: f64,
    pub multiplier_pass: bool,
    pub boundary_ratios: Vec<f64>,
    pub localized: Vec<bool>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn coercivity_pass(&self) -> bool {
        self.coercivity_gradient && self.coercivity_omega.iter().all(|&b| b)
    }

    /// Every conclusion of the existence statement holds at this point.
    pub fn all_pass(&self) -> bool {
        self.constraint_pass
            && self.el_pass
            && self.omega_below_mass.iter().all(|&b| b)
            && self.hylomorphy_pass
            && self.coercivity_pass()
            && self.multiplier_pass
            && self.localized.iter().all(|&b| b)
    }
}

/// Evaluates constraint, field-equation, frequency, hylomorphy, coercivity
/// and multiplier checks at `(u, ω)` for charges `C`.
pub fn verify_solution(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    omega: &Frequencies,
    charges: &ChargeVector,
    tol: VerificationTolerances,
) -> Result<VerificationReport> {
    let k = spec.components();
    if charges.len() != k {
        return Err(Error::ComponentMismatch {
            expected: k,
            actual: charges.len(),
        });
    }
    let energy = total_energy(grid, spec, u, omega)?;
    let norms = norms_sq(grid, u)?;
    let c = charges.as_slice();
    let w = omega.as_slice();
    let masses = spec.masses();

    let constraint_residuals: Vec<f64> = (0..k)
        .map(|i| (w[i] * norms[i] - c[i]).abs() / c[i])
        .collect();
    let el_residuals = el_residual(grid, spec, u, omega)?;
    let omega_below_mass = (0..k).map(|i| w[i] > 0.0 && w[i] < masses[i]).collect();
    let hylomorphy_margins: Vec<f64> = (0..k).map(|i| 2.0 * energy - masses[i] * c[i]).collect();
    let coercivity_omega = (0..k).map(|i| w[i] * c[i] <= 2.0 * energy).collect();
    let grad_sq: f64 = u.iter().map(|p| 2.0 * grid.dirichlet_slice(p)).sum();

    // <∂_u E, u_i> = 2D_i + <D_iF(u), u_i> + ω_i² ‖u_i‖², <∂_u H_i, u_i> = 2 ω_i ‖u_i‖²
    let mut pairing = vec![0.0; k];
    let mut point = vec![0.0; k];
    let mut dr = vec![0.0; k];
    for (j, wj) in grid.weights().iter().enumerate() {
        for (p, comp) in point.iter_mut().zip(u.iter()) {
            *p = comp[j];
        }
        spec.grad_interaction_into(&point, &mut dr);
        for i in 0..k {
            pairing[i] += wj * (masses[i] * masses[i] * point[i] + dr[i]) * point[i];
        }
    }
    let multipliers: Vec<f64> = (0..k)
        .map(|i| {
            let num =
                2.0 * grid.dirichlet_slice(u.component(i)) + pairing[i] + w[i] * w[i] * norms[i];
            num / (2.0 * w[i] * norms[i])
        })
        .collect();
    let multiplier_residual = (0..k)
        .map(|i| (multipliers[i] - w[i]).abs() / w[i])
        .fold(0.0, f64::max);

    let boundary_ratios: Vec<f64> = u.iter().map(|p| boundary_ratio(grid, p)).collect();
    Ok(VerificationReport {
        tolerances: tol,
        localized: boundary_ratios
            .iter()
            .map(|b| *b <= tol.boundary_ratio)
            .collect(),
        boundary_ratios,
        energy,
        constraint_pass: constraint_residuals.iter().all(|r| *r <= tol.constraint),
        constraint_residuals,
        el_pass: el_residuals.iter().all(|r| r.value <= tol.el_residual),
        el_residuals,
        omega_below_mass,
        hylomorphy_pass: hylomorphy_margins.iter().all(|m| *m < 0.0),
        hylomorphy_margins,
        coercivity_omega,
        coercivity_gradient: grad_sq <= 2.0 * energy,
        multiplier_pass: multiplier_residual.is_finite() && multiplier_residual <= tol.multiplier,
        multipliers,
        multiplier_residual,
        notes: vec![
            "norms are unweighted L² plus the Dirichlet energy".into(),
            "coercivity bounds are guaranteed only when F >= 0".into(),
        ],
    })
}
