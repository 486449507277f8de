//! Finite-difference checks of the reduced gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semilinear_core::functional::{reduced_energy, reduced_gradient};
use semilinear_core::*;

/// Exponent splits with total degree 3, 4 or 5, avoiding the kink of `|t|`.
const SPLITS: [[f64; 2]; 11] = [
    [1.5, 1.5],
    [3.0, 0.0],
    [0.0, 3.0],
    [2.0, 2.0],
    [1.5, 2.5],
    [4.0, 0.0],
    [0.0, 4.0],
    [2.0, 3.0],
    [2.5, 2.5],
    [1.5, 3.5],
    [5.0, 0.0],
];

fn random_spec(rng: &mut ChaCha8Rng, k: usize) -> PotentialSpec {
    let masses = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    let terms = (0..rng.random_range(1..=3))
        .map(|_| {
            let coefficient = rng.random_range(-2.0..2.0);
            let exponents = if k == 1 {
                vec![[3.0, 4.0, 5.0, 3.5][rng.random_range(0..4)]]
            } else {
                SPLITS[rng.random_range(0..SPLITS.len())].to_vec()
            };
            Monomial::new(coefficient, exponents)
        })
        .collect();
    PotentialSpec::new(masses, terms).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, grid: &RadialGrid) -> Profile {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-1.5..1.5),
                rng.random_range(0.0..6.0),
                rng.random_range(0.5..3.0),
            )
        })
        .collect();
    Profile::from_fn(grid, |r| {
        bumps
            .iter()
            .map(|(a, c, s)| a * (-((r - c) / s).powi(2)).exp())
            .sum::<f64>()
            + 0.3 * (-r * r / 4.0).exp()
    })
}

/// Richardson-extrapolated central difference of `reduced_energy` along `dir`.
fn directional_derivative(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    u: &FieldSet,
    dir: &FieldSet,
    c: &ChargeVector,
    eps: f64,
) -> f64 {
    let shifted = |s: f64| {
        let comps = u
            .iter()
            .zip(dir.iter())
            .map(|(a, d)| Profile::new(a.iter().zip(d.iter()).map(|(x, y)| x + s * y).collect()))
            .collect();
        reduced_energy(grid, spec, &FieldSet::new(comps).unwrap(), c).unwrap()
    };
    let central = |h: f64| (shifted(h) - shifted(-h)) / (2.0 * h);
    (4.0 * central(eps / 2.0) - central(eps)) / 3.0
}

fn pairing(grid: &RadialGrid, g: &FieldSet, d: &FieldSet) -> f64 {
    g.iter()
        .zip(d.iter())
        .map(|(a, b)| {
            let prod = Profile::new(a.iter().zip(b.iter()).map(|(x, y)| x * y).collect());
            grid.integrate(&prod).unwrap()
        })
        .sum()
}

#[test]
fn gradient_matches_finite_differences() {
    let grid = RadialGrid::new(3, 10.0, 200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let k = 1 + trial % 2;
        let spec = random_spec(&mut rng, k);
        let u = FieldSet::new((0..k).map(|_| random_profile(&mut rng, &grid)).collect()).unwrap();
        let c = ChargeVector::new((0..k).map(|_| rng.random_range(0.5..50.0)).collect()).unwrap();
        let g = reduced_gradient(&grid, &spec, &u, &c).unwrap();
        let dir = FieldSet::new((0..k).map(|_| random_profile(&mut rng, &grid)).collect()).unwrap();
        let exact = pairing(&grid, &g, &dir);
        let fd = directional_derivative(&grid, &spec, &u, &dir, &c, 1e-6);
        let rel = (fd - exact).abs() / exact.abs().max(1e-8);
        worst = worst.max(rel);
        assert!(
            rel <= 1e-6,
            "trial {trial}: fd {fd} vs {exact} (rel {rel:e})"
        );
    }
    assert!(worst <= 1e-6);
}

#[test]
fn gradient_along_twenty_directions() {
    let grid = RadialGrid::new(3, 12.0, 300).unwrap();
    let spec = PotentialSpec::new(
        vec![1.0],
        vec![
            Monomial::new(-1.5, vec![4.0]),
            Monomial::new(1.0, vec![5.0]),
        ],
    )
    .unwrap();
    let u = FieldSet::new(vec![Profile::from_fn(&grid, |r| (-r * r / 9.0).exp())]).unwrap();
    let c = ChargeVector::new(vec![20.0]).unwrap();
    let g = reduced_gradient(&grid, &spec, &u, &c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let dir = FieldSet::new(vec![random_profile(&mut rng, &grid)]).unwrap();
        let exact = pairing(&grid, &g, &dir);
        let fd = directional_derivative(&grid, &spec, &u, &dir, &c, 1e-6);
        assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn collapsed_component_is_an_error() {
    let grid = RadialGrid::new(3, 10.0, 100).unwrap();
    let spec = PotentialSpec::free(vec![1.0, 1.0]).unwrap();
    let u = FieldSet::new(vec![
        Profile::from_fn(&grid, |r| (-r * r).exp()),
        Profile::from_fn(&grid, |r| 1e-20 * (-r * r).exp()),
    ])
    .unwrap();
    let c = ChargeVector::new(vec![1.0, 1.0]).unwrap();
    assert!(matches!(
        reduced_gradient(&grid, &spec, &u, &c),
        Err(Error::ComponentCollapse { index: 1, .. })
    ));
}
