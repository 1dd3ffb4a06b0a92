use std::f64::consts::PI;

use fracorder_core::spectral::{project_initial_data, InitialDataSource, SpectralModel};
use proptest::prelude::*;

fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect()
}

fn trapezoid(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let h = PI / n as f64;
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n]))
}

#[test]
fn discrete_orthonormality() {
    let m = SpectralModel::neumann_cosine(32).unwrap();
    let xs = grid(4001);
    for i in 1..=32 {
        for j in i..=32 {
            let prod: Vec<f64> = xs
                .iter()
                .map(|&x| m.eigenfunction_value(i, x).unwrap() * m.eigenfunction_value(j, x).unwrap())
                .collect();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((trapezoid(&prod) - want).abs() <= 1e-6, "({i}, {j})");
        }
    }
}

#[test]
fn projection_of_two_mode_data() {
    let m = SpectralModel::neumann_cosine(12).unwrap();
    let samples: Vec<f64> = grid(2001).iter().map(|x| 1.0 + (2.0 * x).cos()).collect();
    let d = project_initial_data(&m, &samples, 12).unwrap();
    assert!((d.coefficient(1) - PI.sqrt()).abs() < 1e-8);
    assert!((d.coefficient(3) - (PI / 2.0).sqrt()).abs() < 1e-8);
    for j in [2, 4, 5, 6, 7, 8, 9, 10, 11, 12] {
        assert!(d.coefficient(j).abs() < 1e-8, "mode {j}");
    }
    assert_eq!(
        d.source(),
        &InitialDataSource::SampledFunction { grid_points: 2001, spacing: PI / 2000.0, quadrature_order: 2 }
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn band_limited_data_is_reproduced(
        amps in prop::collection::vec(-2.0f64..2.0, 1..10),
        extra in 0usize..6,
    ) {
        let num_modes = amps.len() + extra;
        let m = SpectralModel::neumann_cosine(num_modes).unwrap();
        let phi = |x: f64| amps.iter().enumerate().map(|(k, a)| a * (k as f64 * x).cos()).sum::<f64>();
        let samples: Vec<f64> = grid(4 * num_modes + 1).iter().map(|&x| phi(x)).collect();
        let d = project_initial_data(&m, &samples, num_modes).unwrap();
        for x in grid(97) {
            let synth: f64 = (1..=num_modes)
                .map(|j| d.coefficient(j) * m.eigenfunction_value(j, x).unwrap())
                .sum();
            prop_assert!((synth - phi(x)).abs() <= 1e-6, "x = {}", x);
        }
    }
}
