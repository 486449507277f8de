//! Descent on the reduced energy with backtracking line search.
//!
//! Each step moves along the negative gradient, optionally mapped through the
//! inverse of `-Δ + m_i²` (the Riesz map of the mass-weighted H¹ norm). The
//! step length adapts: it doubles after an accepted step and halves on every
//! rejected trial until the Armijo condition holds.

use serde::Serialize;

use crate::conditions::{
    boundary_ratio, verify_solution, VerificationReport, VerificationTolerances,
};
use crate::error::{Error, Result};
use crate::functional::{
    el_residual, evaluate, floor_norm, norms_sq, ChargeVector, FieldSet, Frequencies, Residual,
};
use crate::grid::{Profile, RadialGrid};
use crate::potential::{H3Search, PotentialSpec};

/// Starting fields for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Plateau profile at the first H3 witness found, radius `r_max / 5`.
    Auto,
    /// Plateau `v` on `[0, r]` with a unit ramp.
    TestProfile { v: Vec<f64>, r: f64 },
    /// `a_i exp(-(ρ/σ_i)²)`.
    Gaussian {
        amplitudes: Vec<f64>,
        widths: Vec<f64>,
    },
    /// Explicit nodal values.
    Values(FieldSet),
}

impl InitMode {
    pub fn describe(&self) -> String {
        match self {
            InitMode::Auto => "auto".into(),
            InitMode::TestProfile { v, r } => format!("test_profile v={v:?} r={r}"),
            InitMode::Gaussian { amplitudes, widths } => {
                format!("gaussian amplitudes={amplitudes:?} widths={widths:?}")
            }
            InitMode::Values(_) => "values".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preconditioner {
    /// Riesz map of `Σ ‖∇u_i‖² + m_i² ‖u_i‖²`.
    Sobolev,
    /// Plain weighted-L² gradient.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Stop when `max_i ‖g_i‖ / ‖u_i‖ <= gradient_tolerance`.
    pub gradient_tolerance: f64,
    /// Stall when the energy drops by at most this fraction of `|E|` over
    /// `stall_window` iterations.
    pub energy_stall_tolerance: f64,
    pub stall_window: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub init: InitMode,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    /// Replace every accepted iterate by its absolute value.
    pub absolute_value: bool,
    pub tolerances: VerificationTolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 20_000,
            gradient_tolerance: 1e-7,
            energy_stall_tolerance: 1e-12,
            stall_window: 50,
            initial_step: 1e-2,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            init: InitMode::Auto,
            seed: 0,
            preconditioner: Preconditioner::Sobolev,
            absolute_value: false,
            tolerances: VerificationTolerances::default(),
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("energy_stall_tolerance", self.energy_stall_tolerance),
            ("initial_step", self.initial_step),
            ("sufficient_decrease", self.sufficient_decrease),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {x} must be positive"
                )));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink = {} must lie in (0, 1)",
                self.shrink
            )));
        }
        if self.sufficient_decrease >= 1.0 {
            return Err(Error::InvalidArgument(
                "sufficient_decrease must be < 1".into(),
            ));
        }
        if self.stall_window == 0 {
            return Err(Error::InvalidArgument("stall_window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    ComponentCollapse { index: usize },
    Stalled { detail: String },
    IterationCap,
    LineSearchFailure,
}

impl TerminationReason {
    pub fn label(&self) -> &'static str {
        match self {
            TerminationReason::Converged => "converged",
            TerminationReason::ComponentCollapse { .. } => "component collapse",
            TerminationReason::Stalled { .. } => "stalled",
            TerminationReason::IterationCap => "iteration cap",
            TerminationReason::LineSearchFailure => "line-search failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub fields: FieldSet,
    pub omega: Frequencies,
    pub energy: f64,
    pub charges: Vec<f64>,
    pub el_residuals: Vec<Residual>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: TerminationReason,
    pub verification: VerificationReport,
    /// Energy after every accepted step, starting with the initial value.
    pub energy_history: Vec<f64>,
    /// Iterates violating `ω_i C_i <= 2E` or `Σ‖∇u_i‖² <= 2E`.
    pub coercivity_violations: usize,
    pub init: String,
}

struct State {
    u: FieldSet,
    energy: f64,
    grad: Vec<Vec<f64>>,
    norms: Vec<f64>,
    dirichlet: Vec<f64>,
    omega: Vec<f64>,
}

impl State {
    fn at(grid: &RadialGrid, spec: &PotentialSpec, c: &ChargeVector, u: FieldSet) -> Result<Self> {
        let mut grad = vec![vec![0.0; u.nodes()]; u.components()];
        let ev = evaluate(grid, spec, &u, c, Some(&mut grad))?;
        Ok(State {
            u,
            energy: ev.energy,
            grad,
            norms: ev.norms_sq,
            dirichlet: ev.dirichlet,
            omega: ev.omega,
        })
    }

    fn relative_gradient(&self, grid: &RadialGrid) -> f64 {
        self.grad
            .iter()
            .zip(&self.norms)
            .map(|(g, n)| (grid.norm_sq(g) / n).sqrt())
            .fold(0.0, f64::max)
    }

    fn coercive(&self, c: &ChargeVector) -> bool {
        let two_e = 2.0 * self.energy;
        let slack = 1e-12 * two_e.abs();
        let grad_sq: f64 = self.dirichlet.iter().map(|d| 2.0 * d).sum();
        grad_sq <= two_e + slack
            && self
                .omega
                .iter()
                .zip(c.as_slice())
                .all(|(w, c)| w * c <= two_e + slack)
    }
}

fn initial_fields(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    init: &InitMode,
    seed: u64,
) -> Result<(FieldSet, String)> {
    let k = spec.components();
    let fields = match init {
        InitMode::Auto => {
            let search = H3Search {
                seed,
                ..H3Search::default()
            };
            let v = spec
                .find_h3_witness(&search)
                .map(|w| w.v)
                .unwrap_or_else(|| vec![1.0; k]);
            let r = grid.r_max() / 5.0;
            let u = crate::functional::build_test_profile(grid, &v, r)?;
            return Ok((u, format!("test_profile v={v:?} r={r}")));
        }
        InitMode::TestProfile { v, r } => crate::functional::build_test_profile(grid, v, *r)?,
        InitMode::Gaussian { amplitudes, widths } => {
            if amplitudes.len() != k || widths.len() != k {
                return Err(Error::ComponentMismatch {
                    expected: k,
                    actual: amplitudes.len().min(widths.len()),
                });
            }
            if widths.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::InvalidArgument(
                    "gaussian widths must be positive".into(),
                ));
            }
            FieldSet::new(
                amplitudes
                    .iter()
                    .zip(widths)
                    .map(|(a, s)| Profile::from_fn(grid, |r| a * (-(r / s).powi(2)).exp()))
                    .collect(),
            )?
        }
        InitMode::Values(u) => u.clone(),
    };
    if fields.components() != k {
        return Err(Error::ComponentMismatch {
            expected: k,
            actual: fields.components(),
        });
    }
    grid.check_len(fields.nodes())?;
    Ok((fields, init.describe()))
}

fn direction(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    pre: Preconditioner,
    grad: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    grad.iter()
        .zip(spec.masses())
        .map(|(g, m)| {
            let mut d = vec![0.0; g.len()];
            match pre {
                Preconditioner::Sobolev => {
                    let rhs: Vec<f64> = g.iter().zip(grid.weights()).map(|(x, w)| w * x).collect();
                    grid.solve_shifted(m * m, &rhs, &mut d);
                    d.iter_mut().for_each(|x| *x = -*x);
                }
                Preconditioner::None => d.iter_mut().zip(g).for_each(|(x, y)| *x = -y),
            }
            d
        })
        .collect()
}

/// Minimizes the reduced energy for charges `c`.
///
/// Errors are returned only for invalid input (including a collapsed
/// starting point); everything that happens during the descent is reported
/// through [`SolveResult::termination`].
pub fn minimize(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    c: &ChargeVector,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let (h2, report) = spec.check_h2(grid.dim())?;
    if !report.pass {
        return Err(Error::InvalidPotential(format!(
            "growth condition fails (p = {:?}, q = {:?})",
            h2.as_ref().map(|g| g.p),
            h2.as_ref().map(|g| g.q)
        )));
    }
    if c.len() != spec.components() {
        return Err(Error::ComponentMismatch {
            expected: spec.components(),
            actual: c.len(),
        });
    }
    let (mut u0, init) = initial_fields(grid, spec, &opts.init, opts.seed)?;
    if opts.absolute_value {
        for i in 0..u0.components() {
            u0.component_mut(i).iter_mut().for_each(|x| *x = x.abs());
        }
    }
    let floor = floor_norm(grid);

    let mut state = State::at(grid, spec, c, u0)?;
    let mut history = vec![state.energy];
    let mut violations = usize::from(!state.coercive(c));
    let mut step = opts.initial_step;
    let mut iterations = 0;
    let mut gnorm = state.relative_gradient(grid);

    let termination = loop {
        if gnorm <= opts.gradient_tolerance {
            break classify_stationary(grid, spec, &state, opts.tolerances.boundary_ratio);
        }
        if iterations >= opts.max_iterations {
            break TerminationReason::IterationCap;
        }
        let dir = direction(grid, spec, opts.preconditioner, &state.grad);
        let slope: f64 = state
            .grad
            .iter()
            .zip(&dir)
            .map(|(g, d)| grid.inner(g, d))
            .sum();
        if slope.is_nan() || slope >= 0.0 {
            break TerminationReason::LineSearchFailure;
        }

        let mut collapsed = None;
        let accepted = loop {
            if step < 1e-20 {
                break None;
            }
            let trial: Vec<Profile> = state
                .u
                .iter()
                .zip(&dir)
                .map(|(u, d)| {
                    Profile::new(
                        u.iter()
                            .zip(d)
                            .map(|(a, b)| {
                                let x = a + step * b;
                                if opts.absolute_value {
                                    x.abs()
                                } else {
                                    x
                                }
                            })
                            .collect(),
                    )
                })
                .collect();
            let trial = FieldSet::new(trial);
            match trial.and_then(|t| State::at(grid, spec, c, t)) {
                Ok(next)
                    if next.energy.is_finite()
                        && next.energy
                            <= state.energy + opts.sufficient_decrease * step * slope =>
                {
                    break Some(next)
                }
                Ok(_) => {}
                Err(Error::ComponentCollapse { index, .. }) => collapsed = Some(index),
                Err(Error::InvalidArgument(_)) => {}
                Err(e) => return Err(e),
            }
            step *= opts.shrink;
        };

        let Some(next) = accepted else {
            break match collapsed {
                Some(index) => TerminationReason::ComponentCollapse { index },
                None => TerminationReason::LineSearchFailure,
            };
        };
        state = next;
        iterations += 1;
        step = (step * 2.0).min(1e6);
        history.push(state.energy);
        violations += usize::from(!state.coercive(c));
        gnorm = state.relative_gradient(grid);
        if state.norms.iter().any(|n| *n < 1e3 * floor) {
            let index = state
                .norms
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            break TerminationReason::ComponentCollapse { index };
        }
        let w = opts.stall_window;
        if history.len() > w && gnorm > opts.gradient_tolerance {
            let drop = history[history.len() - 1 - w] - state.energy;
            if drop <= opts.energy_stall_tolerance * state.energy.abs() {
                break TerminationReason::Stalled {
                    detail: format!("energy decrease {drop:e} over {w} iterations"),
                };
            }
        }
    };

    finish(
        grid,
        spec,
        c,
        opts,
        state,
        termination,
        iterations,
        gnorm,
        history,
        violations,
        init,
    )
}

/// A stationary point with some `ω_i >= m_i`, or with a component that does
/// not decay before `r_max`, is held in place by the outer boundary; it is
/// not reported as converged.
fn classify_stationary(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    state: &State,
    max_boundary_ratio: f64,
) -> TerminationReason {
    let omega = &state.omega;
    if let Some(i) = omega.iter().zip(spec.masses()).position(|(w, m)| w >= m) {
        return TerminationReason::Stalled {
            detail: format!(
                "stationary with ω_{} = {} >= m_{} = {}: spreading, held by the r_max boundary",
                i + 1,
                omega[i],
                i + 1,
                spec.masses()[i]
            ),
        };
    }
    for (i, u) in state.u.iter().enumerate() {
        let ratio = boundary_ratio(grid, u);
        if ratio > max_boundary_ratio {
            return TerminationReason::Stalled {
                detail: format!(
                    "stationary but component {} does not decay (boundary ratio {ratio:e}): held by the r_max boundary",
                    i + 1
                ),
            };
        }
    }
    TerminationReason::Converged
}

#[allow(clippy::too_many_arguments)]
fn finish(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    c: &ChargeVector,
    opts: &SolveOptions,
    state: State,
    termination: TerminationReason,
    iterations: usize,
    gradient_norm: f64,
    energy_history: Vec<f64>,
    coercivity_violations: usize,
    init: String,
) -> Result<SolveResult> {
    let omega = Frequencies(state.omega.clone());
    let verification = verify_solution(grid, spec, &state.u, &omega, c, opts.tolerances)?;
    let el_residuals = el_residual(grid, spec, &state.u, &omega)?;
    let charges = state
        .omega
        .iter()
        .zip(&state.norms)
        .map(|(w, n)| w * n)
        .collect();
    Ok(SolveResult {
        converged: termination == TerminationReason::Converged,
        fields: state.u,
        omega,
        energy: state.energy,
        charges,
        el_residuals,
        gradient_norm,
        iterations,
        termination,
        verification,
        energy_history,
        coercivity_violations,
        init,
    })
}

/// Solves for each charge vector in order, warm-starting from the previous
/// result rescaled so that `‖u_i‖² = C_i / ω_prev,i`.
pub fn scan_charge(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    charges: &[ChargeVector],
    opts: &SolveOptions,
) -> Result<Vec<Result<SolveResult>>> {
    if charges.is_empty() {
        return Err(Error::InvalidArgument("empty charge list".into()));
    }
    let mut out = Vec::with_capacity(charges.len());
    let mut previous: Option<(FieldSet, Vec<f64>)> = None;
    for c in charges {
        let mut run_opts = opts.clone();
        if let Some((fields, omega)) = &previous {
            if let Some(warm) = rescale(grid, fields, omega, c) {
                run_opts.init = InitMode::Values(warm);
            }
        }
        let res = minimize(grid, spec, c, &run_opts);
        if let Ok(r) = &res {
            previous = Some((r.fields.clone(), r.omega.0.clone()));
        }
        out.push(res);
    }
    Ok(out)
}

fn rescale(grid: &RadialGrid, u: &FieldSet, omega: &[f64], c: &ChargeVector) -> Option<FieldSet> {
    let norms = norms_sq(grid, u).ok()?;
    let comps = u
        .iter()
        .zip(&norms)
        .zip(omega.iter().zip(c.as_slice()))
        .map(|((p, n), (w, ci))| {
            let s = (ci / w / n).sqrt();
            s.is_finite()
                .then(|| Profile::new(p.iter().map(|x| s * x).collect()))
        })
        .collect::<Option<Vec<_>>>()?;
    FieldSet::new(comps).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::charge_from_profile;
    use crate::potential::Monomial;

    fn scalar() -> PotentialSpec {
        PotentialSpec::new(
            vec![1.0],
            vec![
                Monomial::new(-1.5, vec![4.0]),
                Monomial::new(1.0, vec![5.0]),
            ],
        )
        .unwrap()
    }

    fn small_problem() -> (RadialGrid, PotentialSpec, ChargeVector, SolveOptions) {
        let g = RadialGrid::new(3, 30.0, 600).unwrap();
        let c = charge_from_profile(&g, &[1.0], &Frequencies(vec![0.5]), 8.0).unwrap();
        let opts = SolveOptions {
            init: InitMode::TestProfile {
                v: vec![1.0],
                r: 8.0,
            },
            ..SolveOptions::default()
        };
        (g, scalar(), c, opts)
    }

    #[test]
    fn converges_on_small_problem() {
        let (g, spec, c, opts) = small_problem();
        let res = minimize(&g, &spec, &c, &opts).unwrap();
        assert!(res.converged, "{:?}", res.termination);
        assert!(res.omega.0[0] > 0.0 && res.omega.0[0] < 1.0);
        assert!(res.verification.all_pass(), "{:?}", res.verification);
        assert!(res.energy_history.windows(2).all(|e| e[1] < e[0]));
        assert_eq!(res.coercivity_violations, 0);
        assert!(res.el_residuals[0].value <= 1e-6);
    }

    #[test]
    fn deterministic() {
        let (g, spec, c, opts) = small_problem();
        let a = minimize(&g, &spec, &c, &opts).unwrap();
        let b = minimize(&g, &spec, &c, &opts).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.fields, b.fields);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn free_potential_never_converges() {
        let (g, _, c, opts) = small_problem();
        let spec = PotentialSpec::free(vec![1.0]).unwrap();
        let res = minimize(&g, &spec, &c, &opts).unwrap();
        assert!(!res.converged);
        assert!(matches!(
            res.termination,
            TerminationReason::Stalled { .. } | TerminationReason::ComponentCollapse { .. }
        ));
        assert!(!res.verification.hylomorphy_pass);
    }

    #[test]
    fn rejects_bad_input() {
        let (g, spec, c, opts) = small_problem();
        let critical = PotentialSpec::new(
            vec![1.0],
            vec![
                Monomial::new(-1.0, vec![4.0]),
                Monomial::new(1.0, vec![6.0]),
            ],
        )
        .unwrap();
        assert!(matches!(
            minimize(&g, &critical, &c, &opts),
            Err(Error::InvalidPotential(_))
        ));
        let bad = SolveOptions {
            shrink: 1.5,
            ..opts.clone()
        };
        assert!(minimize(&g, &spec, &c, &bad).is_err());
        assert!(scan_charge(&g, &spec, &[], &opts).is_err());
        let zero = SolveOptions {
            init: InitMode::Values(FieldSet::new(vec![Profile::zeros(600)]).unwrap()),
            ..opts
        };
        assert!(matches!(
            minimize(&g, &spec, &c, &zero),
            Err(Error::ComponentCollapse { .. })
        ));
    }

    #[test]
    fn unpreconditioned_descent_still_decreases() {
        let (g, spec, c, mut opts) = small_problem();
        opts.preconditioner = Preconditioner::None;
        opts.max_iterations = 200;
        let res = minimize(&g, &spec, &c, &opts).unwrap();
        assert!(res.energy < res.energy_history[0]);
        assert!(res.energy_history.windows(2).all(|e| e[1] < e[0]));
    }

    #[test]
    fn charge_scan_warm_starts() {
        let (g, spec, c, opts) = small_problem();
        let base = c.as_slice()[0];
        let ladder: Vec<ChargeVector> = [1.0, 1.2, 1.44]
            .iter()
            .map(|f| ChargeVector::new(vec![base * f]).unwrap())
            .collect();
        let results = scan_charge(&g, &spec, &ladder, &opts).unwrap();
        let energies: Vec<f64> = results
            .iter()
            .map(|r| {
                let r = r.as_ref().unwrap();
                assert!(r.converged, "{:?}", r.termination);
                r.energy
            })
            .collect();
        assert!(energies.windows(2).all(|e| e[1] > e[0]));
    }
}
