use proptest::prelude::*;
use semilinear_cli::RunConfig;

fn list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

proptest! {
    #[test]
    fn echo_reparses_to_the_same_config(
        dim in 1usize..8,
        r_max in 1.0f64..1e3,
        nodes in 16usize..100_000,
        masses in prop::collection::vec(1e-3f64..1e3, 1..4),
        coeffs in prop::collection::vec(-10.0f64..10.0, 0..4),
        grad_tol in 1e-15f64..1.0,
        seed in any::<u64>(),
        explicit in any::<bool>(),
        factors in prop::collection::vec(0.1f64..10.0, 1..6),
    ) {
        let k = masses.len();
        let mut text = format!(
            "dimension = {dim}\nr_max = {r_max}\nnodes = {nodes}\nmasses = {}\n",
            list(&masses)
        );
        for (i, c) in coeffs.iter().enumerate() {
            let exps: Vec<f64> = (0..k).map(|j| ((i + j) % 3) as f64 + 1.5).collect();
            text.push_str(&format!("term = {c} {}\n", list(&exps)));
        }
        if explicit {
            text.push_str(&format!("charges = {}\n", list(&masses)));
        }
        text.push_str(&format!(
            "gradient_tolerance = {grad_tol}\nseed = {seed}\ncharge_factors = {}\n",
            list(&factors)
        ));
        let cfg = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&cfg.echo()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.echo(), again.echo());
    }
}
