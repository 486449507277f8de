use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semilinear_core::rearrange::{nodal_distribution, symmetric_decreasing};
use semilinear_core::*;

fn two_rings(grid: &RadialGrid) -> Profile {
    Profile::from_fn(grid, |r| {
        (-((r - 3.0) / 0.6).powi(2)).exp() + 0.6 * (-((r - 6.5) / 0.8).powi(2)).exp()
    })
}

fn lp(grid: &RadialGrid, u: &Profile, p: i32) -> f64 {
    grid.integrate(&Profile::new(u.iter().map(|x| x.abs().powi(p)).collect()))
        .unwrap()
}

#[test]
fn equimeasurable_at_random_thresholds() {
    let g = RadialGrid::new(3, 10.0, 1000).unwrap();
    let u = two_rings(&g);
    let s = symmetric_decreasing(&g, &u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let t = rng.random_range(0.0..1.0);
        let a = nodal_distribution(&g, &u, t).unwrap();
        let b = nodal_distribution(&g, &s, t).unwrap();
        assert!((a - b).abs() <= 2.0 * g.max_weight(), "t = {t}: {a} vs {b}");
    }
}

#[test]
fn lp_drift_shrinks_under_refinement() {
    for p in [2, 4] {
        let drift = |n| {
            let g = RadialGrid::new(3, 10.0, n).unwrap();
            let u = two_rings(&g);
            let s = symmetric_decreasing(&g, &u).unwrap();
            let (a, b) = (lp(&g, &u, p), lp(&g, &s, p));
            (a - b).abs() / a
        };
        let (coarse, fine) = (drift(1000), drift(2001));
        assert!(coarse < 1e-3, "p = {p}: {coarse}");
        assert!(coarse >= 2.0 * fine, "p = {p}: {coarse} vs {fine}");
    }
}

#[test]
fn dirichlet_energy_does_not_grow() {
    for n in [1000, 2001] {
        let g = RadialGrid::new(3, 10.0, n).unwrap();
        let u = two_rings(&g);
        let s = symmetric_decreasing(&g, &u).unwrap();
        let (before, after) = (
            g.dirichlet_energy(&u).unwrap(),
            g.dirichlet_energy(&s).unwrap(),
        );
        assert!(after <= before * (1.0 + 1e-3), "{after} > {before}");
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn works_in_higher_dimension() {
    let g = RadialGrid::new(5, 8.0, 1200).unwrap();
    let u = Profile::from_fn(&g, |r| (-((r - 4.0) / 0.7).powi(2)).exp());
    let s = symmetric_decreasing(&g, &u).unwrap();
    let (a, b) = (lp(&g, &u, 2), lp(&g, &s, 2));
    assert!((a - b).abs() / a < 1e-3);
    assert!(g.dirichlet_energy(&s).unwrap() < g.dirichlet_energy(&u).unwrap());
}
