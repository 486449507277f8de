//! Potentials `F(u) = ½ Σ m_i² u_i² + R(u)` with a polynomial interaction
//! `R(u) = Σ_terms a · Π_i |u_i|^{α_i}`, and the H1–H3 hypothesis checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Threshold below which `F(v)` counts as a zero when looking for an H3 witness.
pub const ZERO_TOLERANCE: f64 = 1e-10;

/// Upper bound on the number of lattice points sampled by [`PotentialSpec::check_h1`].
pub const MAX_LATTICE_POINTS: u128 = 20_000_000;

/// `|x|^a`, using repeated multiplication for small integer exponents.
#[inline]
pub(crate) fn abs_pow(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    let ax = x.abs();
    if a.fract() == 0.0 && a <= 64.0 {
        ax.powi(a as i32)
    } else {
        ax.powf(a)
    }
}

/// One interaction term `coefficient · Π_i |u_i|^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<f64>,
}

impl Monomial {
    pub fn new(coefficient: f64, exponents: Vec<f64>) -> Self {
        Monomial {
            coefficient,
            exponents,
        }
    }

    pub fn degree(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// Number of components the term actually depends on.
    pub fn arity(&self) -> usize {
        self.exponents.iter().filter(|&&a| a > 0.0).count()
    }

    /// `Π_i |u_i|^{α_i}` without the coefficient.
    pub fn product(&self, u: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(u)
            .map(|(&a, &x)| abs_pow(x, a))
            .product()
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.coefficient * self.product(u)
    }

    fn accumulate_gradient(&self, u: &[f64], out: &mut [f64]) {
        for (i, &ai) in self.exponents.iter().enumerate() {
            if ai == 0.0 || u[i] == 0.0 {
                // α_i > 1: derivative vanishes at 0; α_i = 1: sign(0) = 0.
                continue;
            }
            let mut d = self.coefficient * ai * abs_pow(u[i], ai - 1.0) * u[i].signum();
            for (l, &al) in self.exponents.iter().enumerate() {
                if l != i {
                    d *= abs_pow(u[l], al);
                }
            }
            out[i] += d;
        }
    }
}

/// Growth data for `|∇R(u)| ≤ c_{p-1}|u|^{p-1} + c_{q-1}|u|^{q-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthData {
    pub p: f64,
    pub q: f64,
    pub c_p_minus_1: f64,
    pub c_q_minus_1: f64,
}

impl GrowthData {
    /// Right-hand side of the growth bound at Euclidean norm `norm`.
    pub fn bound(&self, norm: f64) -> f64 {
        self.c_p_minus_1 * norm.powf(self.p - 1.0) + self.c_q_minus_1 * norm.powf(self.q - 1.0)
    }
}

/// Outcome of one hypothesis check.
///
/// `margin` is a signed distance to failure whose sign convention depends on
/// the check (see each `check_*` method); `pass` always agrees with it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Option<Vec<Vec<f64>>>,
    pub notes: Vec<String>,
}

/// Search controls for [`PotentialSpec::find_h3_witness`].
#[derive(Debug, Clone, PartialEq)]
pub struct H3Search {
    /// User-provided plateau values (zero-set hints), tried first.
    pub candidates: Vec<Vec<f64>>,
    pub box_half_width: f64,
    pub samples_per_axis: usize,
    /// Decreasing ε values; ω_h = min_i(m_i) · ε^{s_h}.
    pub eps_ladder: Vec<f64>,
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for H3Search {
    fn default() -> Self {
        H3Search {
            candidates: Vec::new(),
            box_half_width: 3.0,
            samples_per_axis: 61,
            eps_ladder: (0..40).map(|j| 0.9 * 0.75f64.powi(j)).collect(),
            random_trials: 20_000,
            seed: 0,
        }
    }
}

/// A pair `(v, ω)` satisfying H3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Witness {
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

/// Masses plus a polynomial interaction term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    masses: Vec<f64>,
    terms: Vec<Monomial>,
}

impl PotentialSpec {
    pub fn new(masses: Vec<f64>, terms: Vec<Monomial>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidPotential(
                "need at least one component".into(),
            ));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidPotential(format!(
                "mass {m} must be positive"
            )));
        }
        let k = masses.len();
        for (t, term) in terms.iter().enumerate() {
            if term.exponents.len() != k {
                return Err(Error::InvalidPotential(format!(
                    "term {t} has {} exponents, expected {k}",
                    term.exponents.len()
                )));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "term {t}: non-finite coefficient"
                )));
            }
            for &a in &term.exponents {
                if !a.is_finite() || a < 0.0 || (a > 0.0 && a < 1.0) {
                    return Err(Error::InvalidPotential(format!(
                        "term {t}: exponent {a} must be 0 or >= 1"
                    )));
                }
            }
            if term.degree() == 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "term {t} is constant, R(0) = 0 would fail"
                )));
            }
        }
        Ok(PotentialSpec { masses, terms })
    }

    /// The quadratic potential with `R = 0`.
    pub fn free(masses: Vec<f64>) -> Result<Self> {
        Self::new(masses, Vec::new())
    }

    pub fn components(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    fn check_arity(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.components() {
            return Err(Error::ComponentMismatch {
                expected: self.components(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// `R(u)`.
    pub fn interaction(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(u)).sum()
    }

    /// `F(u)`. Panics if `u` has the wrong arity.
    pub fn eval(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.components());
        let quad: f64 = self
            .masses
            .iter()
            .zip(u)
            .map(|(m, x)| 0.5 * m * m * x * x)
            .sum();
        quad + self.interaction(u)
    }

    /// `∇R(u)` written into `out`.
    pub fn grad_interaction_into(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for t in &self.terms {
            t.accumulate_gradient(u, out);
        }
    }

    /// `∇R(u)`.
    pub fn grad_interaction(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.components());
        let mut out = vec![0.0; u.len()];
        self.grad_interaction_into(u, &mut out);
        out
    }

    /// Checked variant of [`eval`](Self::eval).
    pub fn try_eval(&self, u: &[f64]) -> Result<f64> {
        self.check_arity(u)?;
        Ok(self.eval(u))
    }

    /// H1 by sampling: `F ≥ 0` on the lattice of `[-A, A]^k` plus far-field rays.
    ///
    /// Margin is the smallest sampled value; the check passes iff it is
    /// `>= -tolerance`. Sampling is evidence, not a proof of nonnegativity.
    pub fn check_h1(
        &self,
        box_half_width: f64,
        samples_per_axis: usize,
        tolerance: f64,
    ) -> Result<ConditionReport> {
        if !(box_half_width.is_finite() && box_half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "box half-width {box_half_width} must be positive"
            )));
        }
        if samples_per_axis < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 samples per axis".into(),
            ));
        }
        let k = self.components();
        let requested = (samples_per_axis as u128)
            .checked_pow(k as u32)
            .unwrap_or(u128::MAX);
        if requested > MAX_LATTICE_POINTS {
            return Err(Error::SampleBudget {
                requested,
                limit: MAX_LATTICE_POINTS,
            });
        }
        let axis: Vec<f64> = (0..samples_per_axis)
            .map(|s| {
                -box_half_width + 2.0 * box_half_width * s as f64 / (samples_per_axis - 1) as f64
            })
            .collect();

        let mut best = f64::INFINITY;
        let mut witness = vec![0.0; k];
        let mut point = vec![0.0; k];
        let mut idx = vec![0usize; k];
        loop {
            for (p, &i) in point.iter_mut().zip(&idx) {
                *p = axis[i];
            }
            let f = self.eval(&point);
            if f < best {
                best = f;
                witness.clone_from(&point);
            }
            // odometer increment
            let mut d = 0;
            while d < k {
                idx[d] += 1;
                if idx[d] < samples_per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == k {
                break;
            }
        }

        // Far field: rays along sign patterns of coordinate and diagonal directions.
        let mut far_best = f64::INFINITY;
        let mut far_witness = vec![0.0; k];
        let directions = (1u32..3u32.pow(k as u32)).map(|code| {
            let mut c = code;
            let dir: Vec<f64> = (0..k)
                .map(|_| {
                    let digit = c % 3;
                    c /= 3;
                    digit as f64 - 1.0
                })
                .collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            dir.into_iter().map(|x| x / norm).collect::<Vec<_>>()
        });
        for dir in directions.take(100_000) {
            for j in 1..=24 {
                let radius = box_half_width * 2f64.powi(j);
                let p: Vec<f64> = dir.iter().map(|d| d * radius).collect();
                let f = self.eval(&p);
                if f < far_best {
                    far_best = f;
                    far_witness = p;
                }
            }
        }

        let mut notes = vec![format!(
            "sampled {requested} lattice points on [-{box_half_width}, {box_half_width}]^{k} \
             plus far-field rays; sampling is evidence of F >= 0, not a proof"
        )];
        let mut witnesses = vec![witness];
        if far_best < best {
            notes.push(format!(
                "far-field minimum {far_best:e} below lattice minimum"
            ));
            best = far_best;
            witnesses.insert(0, far_witness);
        }
        Ok(ConditionReport {
            name: "H1".into(),
            pass: best >= -tolerance,
            margin: best,
            witness: Some(witnesses),
            notes,
        })
    }

    /// H2: subcritical growth `2 < p <= q < 2N/(N-2)`.
    ///
    /// Returns the growth data (absent when `R = 0`) and a report whose margin
    /// is `min(p - 2, 2* - q)`; it passes iff the margin is positive.
    pub fn check_h2(&self, dim: usize) -> Result<(Option<GrowthData>, ConditionReport)> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!("dimension {dim} < 3")));
        }
        let critical = 2.0 * dim as f64 / (dim as f64 - 2.0);
        if self.terms.is_empty() {
            return Ok((
                None,
                ConditionReport {
                    name: "H2".into(),
                    pass: true,
                    margin: f64::INFINITY,
                    witness: None,
                    notes: vec!["R = 0: growth condition holds vacuously".into()],
                },
            ));
        }
        let degrees: Vec<f64> = self.terms.iter().map(Monomial::degree).collect();
        let p = degrees.iter().copied().fold(f64::INFINITY, f64::min);
        let q = degrees.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        // |∇ term| <= |a| ‖α‖₂ |u|^{d-1}; intermediate degrees are split between
        // the two powers by Young's inequality.
        let mut c_p = 0.0;
        let mut c_q = 0.0;
        for (t, &d) in self.terms.iter().zip(&degrees) {
            let norm_alpha = t.exponents.iter().map(|a| a * a).sum::<f64>().sqrt();
            let kappa = t.coefficient.abs() * norm_alpha;
            if q == p {
                c_p += kappa;
            } else {
                let theta = (q - d) / (q - p);
                c_p += theta * kappa;
                c_q += (1.0 - theta) * kappa;
            }
        }
        let margin = (p - 2.0).min(critical - q);
        let mut notes = vec![format!("p = {p}, q = {q}, 2* = {critical}")];
        if q >= critical {
            notes.push("q >= 2*: critical or supercritical growth is not covered".into());
        }
        if p <= 2.0 {
            notes.push("p <= 2: interaction is not superquadratic at the origin".into());
        }
        Ok((
            Some(GrowthData {
                p,
                q,
                c_p_minus_1: c_p,
                c_q_minus_1: c_q,
            }),
            ConditionReport {
                name: "H2".into(),
                pass: margin > 0.0,
                margin,
                witness: None,
                notes,
            },
        ))
    }

    /// Left-hand sides `2F(v) + Σ ω_i² v_i² - m_h ω_h v_h²` for every `h`.
    pub fn h3_values(&self, v: &[f64], omega: &[f64]) -> Vec<f64> {
        let common =
            2.0 * self.eval(v) + omega.iter().zip(v).map(|(w, x)| w * w * x * x).sum::<f64>();
        self.masses
            .iter()
            .zip(omega.iter().zip(v))
            .map(|(m, (w, x))| common - m * w * x * x)
            .collect()
    }

    /// H3 at a given `(v, ω)`; margin is the largest left-hand value and the
    /// check passes iff it is strictly negative.
    pub fn check_h3(&self, v: &[f64], omega: &[f64]) -> Result<(Vec<f64>, ConditionReport)> {
        self.check_arity(v)?;
        self.check_arity(omega)?;
        if let Some(i) = v.iter().position(|x| *x == 0.0 || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "v_{} must be nonzero and finite",
                i + 1
            )));
        }
        if let Some(i) = omega.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "ω_{} must be positive",
                i + 1
            )));
        }
        let values = self.h3_values(v, omega);
        let margin = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((
            values,
            ConditionReport {
                name: "H3".into(),
                pass: margin < 0.0,
                margin,
                witness: Some(vec![v.to_vec(), omega.to_vec()]),
                notes: vec!["v and ω are both treated as existentially quantified".into()],
            },
        ))
    }

    /// Looks for `(v, ω)` satisfying H3.
    ///
    /// Zeros of `F` with nonzero coordinates are tried first against a
    /// staggered ladder `ω_h = m_min ε^{s_h}` with `s_h ∈ [1, 1.9)`, so that
    /// `ω_i² = o(ω_j)` for every pair; then a seeded random search over
    /// `(v, ω)`.
    pub fn find_h3_witness(&self, search: &H3Search) -> Option<H3Witness> {
        let k = self.components();
        let m_min = self.masses.iter().copied().fold(f64::INFINITY, f64::min);

        let mut zeros: Vec<(f64, Vec<f64>)> = search
            .candidates
            .iter()
            .filter(|v| v.len() == k && v.iter().all(|x| *x != 0.0 && x.is_finite()))
            .map(|v| (self.eval(v), v.clone()))
            .filter(|(f, _)| *f <= ZERO_TOLERANCE)
            .collect();

        let lattice_ok = (search.samples_per_axis as u128)
            .checked_pow(k as u32)
            .is_some_and(|n| n <= MAX_LATTICE_POINTS);
        if lattice_ok && search.samples_per_axis >= 2 {
            let s = search.samples_per_axis;
            let a = search.box_half_width;
            let axis: Vec<f64> = (0..s)
                .map(|i| -a + 2.0 * a * i as f64 / (s - 1) as f64)
                .collect();
            let mut idx = vec![0usize; k];
            let mut lattice_zeros = Vec::new();
            'outer: loop {
                let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
                if p.iter().all(|x| *x != 0.0) {
                    let f = self.eval(&p);
                    if f <= ZERO_TOLERANCE {
                        lattice_zeros.push((f, p));
                    }
                }
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < s {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break;
            }
            // deterministic order: smallest F, then lexicographic
            lattice_zeros.sort_by(|a, b| {
                a.0.total_cmp(&b.0).then_with(|| {
                    a.1.iter()
                        .zip(&b.1)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            });
            zeros.extend(lattice_zeros.into_iter().take(64));
        }

        let exponents: Vec<f64> = (0..k).map(|h| 1.0 + 0.9 * h as f64 / k as f64).collect();
        for (_, v) in &zeros {
            for &eps in &search.eps_ladder {
                if !(eps > 0.0 && eps < 1.0) {
                    continue;
                }
                let omega: Vec<f64> = exponents.iter().map(|s| m_min * eps.powf(*s)).collect();
                let values = self.h3_values(v, &omega);
                if values.iter().all(|x| *x < 0.0) {
                    return Some(H3Witness {
                        v: v.clone(),
                        omega,
                        values,
                    });
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        for _ in 0..search.random_trials {
            let v: Vec<f64> = (0..k)
                .map(|_| rng.random_range(-search.box_half_width..search.box_half_width))
                .collect();
            if v.contains(&0.0) {
                continue;
            }
            let omega: Vec<f64> = self
                .masses
                .iter()
                .map(|m| rng.random_range(0.0..*m))
                .collect();
            if omega.iter().any(|w| *w <= 0.0) {
                continue;
            }
            let values = self.h3_values(&v, &omega);
            if values.iter().all(|x| *x < 0.0) {
                return Some(H3Witness { v, omega, values });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// F(t) = ½t² - 1.5|t|⁴ + |t|⁵ = t²(|t| - 1)²(|t| + ½)
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

    #[test]
    fn scalar_values() {
        let f = scalar();
        assert_eq!(f.eval(&[1.0]), 0.0);
        assert_eq!(f.eval(&[-1.0]), 0.0);
        assert_eq!(f.eval(&[2.0]), 10.0);
        assert_eq!(f.eval(&[0.0]), 0.0);
        for t in [-2.3, -0.4, 0.7, 1.9] {
            let a: f64 = t;
            let factored = a * a * (a.abs() - 1.0).powi(2) * (a.abs() + 0.5);
            assert_relative_eq!(f.eval(&[t]), factored, max_relative = 1e-13);
        }
        assert_eq!(f.grad_interaction(&[1.0]), vec![-1.0]);
        assert_eq!(f.grad_interaction(&[0.0]), vec![0.0]);
        assert_eq!(f.grad_interaction(&[-1.0]), vec![1.0]);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(PotentialSpec::new(vec![], vec![]).is_err());
        assert!(PotentialSpec::new(vec![0.0], vec![]).is_err());
        assert!(PotentialSpec::new(vec![1.0], vec![Monomial::new(1.0, vec![0.5])]).is_err());
        assert!(PotentialSpec::new(vec![1.0], vec![Monomial::new(1.0, vec![0.0])]).is_err());
        assert!(PotentialSpec::new(vec![1.0], vec![Monomial::new(1.0, vec![4.0, 1.0])]).is_err());
        assert!(
            PotentialSpec::new(vec![1.0, 1.0], vec![Monomial::new(1.0, vec![1.0, 2.0])]).is_ok()
        );
    }

    #[test]
    fn h1_examples() {
        let r = scalar().check_h1(3.0, 61, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, 0.0);
        let w = &r.witness.as_ref().unwrap()[0];
        assert!(w[0] == 0.0 || w[0].abs() == 1.0);

        let neg = PotentialSpec::new(vec![1.0], vec![Monomial::new(-1.0, vec![4.0])]).unwrap();
        let r = neg.check_h1(3.0, 61, 0.0).unwrap();
        assert!(!r.pass);
        assert!(r.margin < 0.0);

        let free = PotentialSpec::free(vec![1.0, 2.0]).unwrap();
        let r = free.check_h1(3.0, 21, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn h1_far_field_catches_escape_outside_box() {
        // negative only for |t| > 10, outside the sampled box
        let f = PotentialSpec::new(
            vec![1.0],
            vec![
                Monomial::new(1.0, vec![3.0]),
                Monomial::new(-0.01, vec![5.0]),
            ],
        )
        .unwrap();
        let r = f.check_h1(2.0, 41, 0.0).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn h1_sample_budget() {
        let f = PotentialSpec::free(vec![1.0; 8]).unwrap();
        assert!(matches!(
            f.check_h1(1.0, 100, 0.0),
            Err(Error::SampleBudget { .. })
        ));
    }

    #[test]
    fn h2_examples() {
        let (g, r) = scalar().check_h2(3).unwrap();
        let g = g.unwrap();
        assert!(r.pass);
        assert_eq!((g.p, g.q), (4.0, 5.0));
        assert_eq!((g.c_p_minus_1, g.c_q_minus_1), (6.0, 5.0));

        let quartic_sextic = PotentialSpec::new(
            vec![1.0],
            vec![
                Monomial::new(-1.0, vec![4.0]),
                Monomial::new(1.0, vec![6.0]),
            ],
        )
        .unwrap();
        let (g, r) = quartic_sextic.check_h2(3).unwrap();
        assert_eq!(g.unwrap().q, 6.0);
        assert!(!r.pass);
        // fine in N = 3 is not fine in N = 5 (2* = 10/3)
        let (_, r5) = scalar().check_h2(5).unwrap();
        assert!(!r5.pass);

        let (g, r) = PotentialSpec::free(vec![1.0]).unwrap().check_h2(3).unwrap();
        assert!(g.is_none());
        assert!(r.pass);
    }

    #[test]
    fn h3_examples() {
        let f = scalar();
        let (vals, r) = f.check_h3(&[1.0], &[0.1]).unwrap();
        assert_relative_eq!(vals[0], -0.09, epsilon = 1e-15);
        assert!(r.pass);
        let (vals, r) = f.check_h3(&[1.0], &[1.0]).unwrap();
        assert_eq!(vals[0], 0.0);
        assert!(!r.pass);
        assert!(f.check_h3(&[0.0], &[0.1]).is_err());
        assert!(f.check_h3(&[1.0], &[0.0]).is_err());
        assert!(f.check_h3(&[1.0], &[-0.5]).is_err());
    }

    #[test]
    fn h3_staggered_small_frequencies() {
        // two decoupled copies, F(1,1) = 0, ω_1 = ε, ω_2 = ε^1.5
        let f = PotentialSpec::new(
            vec![1.0, 1.0],
            vec![
                Monomial::new(-1.5, vec![4.0, 0.0]),
                Monomial::new(1.0, vec![5.0, 0.0]),
                Monomial::new(-1.5, vec![0.0, 4.0]),
                Monomial::new(1.0, vec![0.0, 5.0]),
            ],
        )
        .unwrap();
        for eps in [0.3, 0.1, 0.01, 1e-4] {
            let (_, r) = f.check_h3(&[1.0, 1.0], &[eps, eps.powf(1.5)]).unwrap();
            assert!(r.pass, "eps = {eps}");
        }
    }

    #[test]
    fn witness_search() {
        let w = scalar().find_h3_witness(&H3Search::default()).unwrap();
        assert_eq!(w.v[0].abs(), 1.0);
        assert!(w.omega[0] > 0.0 && w.omega[0] < 1.0);

        let free = PotentialSpec::free(vec![1.0]).unwrap();
        assert!(free.find_h3_witness(&H3Search::default()).is_none());

        let doubled = PotentialSpec::new(
            vec![1.0, 1.0],
            vec![
                Monomial::new(-1.5, vec![4.0, 0.0]),
                Monomial::new(1.0, vec![5.0, 0.0]),
                Monomial::new(-1.5, vec![0.0, 4.0]),
                Monomial::new(1.0, vec![0.0, 5.0]),
            ],
        )
        .unwrap();
        let w = doubled.find_h3_witness(&H3Search::default()).unwrap();
        assert!(w.v.iter().all(|x| x.abs() == 1.0));
        assert!(w.omega[1] < w.omega[0]);
        assert!(w.values.iter().all(|x| *x < 0.0));
    }
}
