use dwell_core::agmon::{agmon_a, AgmonGeometry};
use dwell_core::harness::fit_values;
use dwell_core::hartree::fix_phase;
use dwell_core::model::kernel_min_fourier;
use dwell_core::operators::{apply_laplacian, convolve_kernel, ConvolutionMethod};
use dwell_core::quasimodes::{half_line_partition, smoothstep};
use dwell_core::spectrum::{gap_via_quotient, QUOTIENT_FLOOR};
use dwell_core::{parse_config, Grid, GridField, InteractionSpec};
use proptest::prelude::*;

fn field(half_points: usize, spacing: f64, seed: &[f64]) -> GridField {
    let grid = Grid::from_half_points(half_points, spacing).unwrap();
    let n = grid.n_points();
    let values = (0..n)
        .map(|i| seed[i % seed.len()] * (1.0 + (i as f64 * 0.37).sin()))
        .collect();
    GridField::new(grid, values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution(seed in prop::collection::vec(-5.0f64..5.0, 1..20), m in 1usize..60) {
        let u = field(m, 0.1, &seed);
        prop_assert_eq!(u.reflect().reflect(), u.clone());
        prop_assert!((u.reflect().mass() - u.mass()).abs() <= 1e-12 * u.mass().max(1.0));
    }

    #[test]
    fn tent_kernel_is_fourier_positive(radius in 0.05f64..3.0, height in 0.1f64..5.0, spacing in 0.005f64..0.1) {
        let spec = InteractionSpec::new(1.0, radius, height).unwrap();
        prop_assert!(kernel_min_fourier(spacing, &spec) > -1e-10 * height * radius);
    }

    #[test]
    fn agmon_action_is_increasing(s in 1.0f64..6.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(agmon_a(lo, s) <= agmon_a(hi, s));
        prop_assert!(AgmonGeometry::new(s, 2.0 * hi + 1.0).tunneling() <= AgmonGeometry::new(s, 2.0 * lo + 1.0).tunneling());
    }

    #[test]
    fn agmon_distance_is_a_metric(
        s in prop::sample::select(vec![2.0, 3.0, 4.0]),
        sep in 2.0f64..8.0,
        x in -6.0f64..6.0,
        y in -6.0f64..6.0,
        z in -6.0f64..6.0,
    ) {
        let g = AgmonGeometry::new(s, sep);
        let h = 0.01;
        // Simpson is exact on the piecewise quadratic integrand of s = 2, 4;
        // for other powers the slack is the quadrature error near the wells.
        let slack = if s == 2.0 || s == 4.0 { 1e-9 } else { 1e-5 };
        let dxz = g.distance(x, z, h);
        prop_assert!(dxz <= g.distance(x, y, h) + g.distance(y, z, h) + slack);
        prop_assert!((dxz - g.distance(z, x, h)).abs() <= 1e-9);
        prop_assert!(g.distance(x, x, h).abs() <= 1e-12);
    }

    #[test]
    fn fft_and_direct_convolution_agree(seed in prop::collection::vec(0.0f64..2.0, 1..12), m in 5usize..120, radius in 0.1f64..2.0) {
        let rho = field(m, 0.05, &seed).map(f64::abs);
        let spec = InteractionSpec::new(1.0, radius, 1.0).unwrap();
        let a = convolve_kernel(&rho, &spec, ConvolutionMethod::Direct);
        let b = convolve_kernel(&rho, &spec, ConvolutionMethod::Fft);
        let scale = a.max_abs().max(1.0);
        prop_assert!(a.sub(&b).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn convolution_preserves_reflection_symmetry(seed in prop::collection::vec(0.0f64..2.0, 1..12), m in 5usize..80) {
        let raw = field(m, 0.05, &seed);
        let rho = raw.add(&raw.reflect());
        let spec = InteractionSpec::new(1.0, 0.5, 1.0).unwrap();
        let out = convolve_kernel(&rho, &spec, ConvolutionMethod::Direct);
        prop_assert!(out.asymmetry() <= 1e-12 * out.max_abs().max(1.0));
    }

    #[test]
    fn laplacian_is_symmetric(a in prop::collection::vec(-1.0f64..1.0, 1..9), b in prop::collection::vec(-1.0f64..1.0, 1..9), m in 2usize..50) {
        let u = field(m, 0.1, &a);
        let v = field(m, 0.1, &b);
        let lhs = apply_laplacian(&u).dot(&v);
        let rhs = u.dot(&apply_laplacian(&v));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (lhs.abs() + 1.0));
    }

    #[test]
    fn fit_recovers_exact_power_laws(slope in 0.2f64..3.0, prefactor in 0.01f64..100.0) {
        let samples: Vec<(f64, f64)> = [1e-2, 2e-3, 5e-4, 1e-4, 3e-5]
            .iter()
            .map(|&t: &f64| (t, prefactor * t.powf(slope)))
            .collect();
        let fit = fit_values("q", &samples, 0.0).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn phase_fix_is_idempotent(seed in prop::collection::vec(0.0f64..3.0, 1..10), flip in any::<bool>(), m in 1usize..40) {
        let u = field(m, 0.1, &seed);
        let u = if flip { u.scaled(-1.0) } else { u };
        let once = fix_phase(&u).unwrap();
        prop_assert_eq!(fix_phase(&once).unwrap(), once.clone());
        prop_assert!(once.integral() >= 0.0);
    }

    #[test]
    fn smoothstep_is_a_monotone_ramp(a in -1.0f64..2.0, b in -1.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(smoothstep(lo) <= smoothstep(hi));
        prop_assert!((0.0..=1.0).contains(&smoothstep(a)));
    }

    #[test]
    fn half_line_partition_is_a_partition_of_unity(m in 5usize..200, width in 0.2f64..3.0) {
        let grid = Grid::from_half_points(m, 0.05).unwrap();
        let (right, left) = half_line_partition(&grid, width);
        let sum = right.density().add(&left.density());
        prop_assert!(sum.values().iter().all(|v| (v - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn quotient_gap_is_nonnegative(a in prop::collection::vec(0.1f64..2.0, 1..9), b in prop::collection::vec(-2.0f64..2.0, 1..9), m in 2usize..50) {
        let plus = field(m, 0.1, &a).map(f64::abs).map(|v| v + 0.1);
        let minus = field(m, 0.1, &b);
        prop_assert!(gap_via_quotient(&plus, &minus, QUOTIENT_FLOOR).value >= 0.0);
    }

    #[test]
    fn overrides_set_coupling(lambda in 0.0f64..5.0) {
        let cfg = parse_config(None, &[format!("lambda={lambda:?}")]).unwrap();
        prop_assert_eq!(cfg.lambda, lambda);
    }
}
