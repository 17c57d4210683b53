use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use lightfluid::atomic::{saturated_cross_section, two_level_steady_state};
use lightfluid::dispersion::{polariton_branches, BogoliubovParams};
use lightfluid::fluid::{
    fresnel_propagate, split_step_nlse, square_loop, winding_number, ComplexField, Grid, MediumSpec,
};
use lightfluid::gem::{gem_propagate, gradient_schedule, GaussianPulse, GemConfig};

proptest! {
    #[test]
    fn two_level_state_is_physical(d in -1e3f64..1e3, rabi in 0.0f64..1e2, g in 1e-2f64..1e2) {
        let s = two_level_steady_state(d, rabi, g).unwrap();
        prop_assert!((-1.0..=0.0).contains(&s.inversion));
        prop_assert!(s.coherence.norm() <= 0.5 + 1e-15);
        prop_assert!((0.0..=0.5).contains(&s.excited_population()));
        let m = two_level_steady_state(-d, rabi, g).unwrap();
        prop_assert!((m.inversion - s.inversion).abs() < 1e-15);
        prop_assert!((m.coherence.im - s.coherence.im).abs() < 1e-15);
    }

    #[test]
    fn saturation_only_lowers_the_cross_section(d in -10.0f64..10.0, i1 in 0.0f64..1e3, i2 in 0.0f64..1e3) {
        let (lo, hi) = if i1 < i2 { (i1, i2) } else { (i2, i1) };
        let a = saturated_cross_section(1.0, d, 1.0, lo, 1.0).unwrap();
        let b = saturated_cross_section(1.0, d, 1.0, hi, 1.0).unwrap();
        prop_assert!(b <= a && a <= 1.0);
    }

    #[test]
    fn hopfield_weights_sum_to_one(wc in 0.9f64..1.1, wx in 0.9f64..1.1, rabi in 0.0f64..0.05) {
        let b = polariton_branches(&[0.0], &[wc], &[wx], rabi).unwrap();
        let (x, c) = (b.hopfield_x[0], b.hopfield_c[0]);
        prop_assert!((x * x + c * c - 1.0).abs() < 1e-12);
        prop_assert!(b.lower[0] <= wc.min(wx) + 1e-15 && b.upper[0] >= wc.max(wx) - 1e-15);
        prop_assert!(b.upper[0] - b.lower[0] >= 2.0 * rabi * (1.0 - 1e-12));
    }

    #[test]
    fn bogoliubov_branch_lies_above_both_limits(q1 in 1e2f64..1e6, q2 in 1e2f64..1e6, gn in 0.0f64..1e-2) {
        let p = BogoliubovParams::Optical { k0: 8e6, chi3: -gn, field_sq: 1.0, n0: 1.0 };
        let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
        let (a, b) = (p.spectrum(lo).unwrap(), p.spectrum(hi).unwrap());
        prop_assert!(a <= b);
        prop_assert!(a >= p.free_energy(lo) * (1.0 - 1e-12));
        if gn > 0.0 {
            let cs = p.sound_speed().unwrap();
            prop_assert!(a >= cs * lo * (1.0 - 1e-12));
            prop_assert!(p.group_velocity(lo).unwrap() >= cs * (1.0 - 1e-9));
        }
    }

    #[test]
    fn winding_flips_with_the_phase(m in -5i64..=5, ox in -3.0f64..3.0, oy in -3.0f64..3.0) {
        let grid = Grid::square(32, 1.0).unwrap();
        // keep the core off the grid points
        let (cx, cy) = (ox.floor() + 0.5, oy.floor() + 0.5);
        let phase: Vec<f64> = (0..grid.len())
            .map(|n| m as f64 * (grid.y(n / 32) - cy).atan2(grid.x(n % 32) - cx))
            .collect();
        let flipped: Vec<f64> = phase.iter().map(|p| -p).collect();
        let path = square_loop(16, 16, 10);
        prop_assert_eq!(winding_number(&phase, &grid, &path, None).unwrap(), m);
        prop_assert_eq!(winding_number(&flipped, &grid, &path, None).unwrap(), -m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kerr_propagation_conserves_power(amps in prop::collection::vec(-1.0f64..1.0, 8), chi3 in -1.0f64..1.0) {
        let grid = Grid::square(32, 0.5).unwrap();
        let field = ComplexField::from_fn(grid, 1.0, 1.0, |x, y| {
            let r = (-(x * x + y * y) / 16.0).exp();
            Complex64::new(amps[0] + amps[1] * x / 8.0 + amps[2] * y / 8.0, amps[3] + amps[4] * (x * y / 64.0)) * r
                + Complex64::new(amps[5], amps[6]) * (amps[7] * x).cos()
        });
        let p0 = field.power();
        let out = split_step_nlse(field, &MediumSpec::kerr(chi3, 1.0), 0.01, 200).unwrap();
        prop_assert!((out.power() / p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn memory_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, phase in 0.0f64..(2.0 * PI)) {
        let c = small_memory();
        let t = c.times();
        let p1 = GaussianPulse { center: 0.0, fwhm: 1e-6, amplitude: 1.0 }.sample_on(&t);
        let p2 = GaussianPulse { center: -1e-6, fwhm: 0.7e-6, amplitude: 1.0 }.sample_on(&t);
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::from_polar(b, phase));
        let mix: Vec<Complex64> = p1.iter().zip(&p2).map(|(x, y)| ca * x + cb * y).collect();
        let o1 = gem_propagate(&c, &p1).unwrap().0.output;
        let o2 = gem_propagate(&c, &p2).unwrap().0.output;
        let om = gem_propagate(&c, &mix).unwrap().0.output;
        let scale = o1.iter().chain(&o2).map(|z| z.norm()).fold(0.0, f64::max);
        for ((x, y), m) in o1.iter().zip(&o2).zip(&om) {
            prop_assert!((ca * x + cb * y - m).norm() <= 1e-10 * scale);
        }
    }
}

fn small_memory() -> GemConfig {
    GemConfig {
        coupling: 1e4,
        control_rabi: 2.0 * PI * 5e6,
        detuning: 2.0 * PI * 1e9,
        excited_linewidth: 2.0 * PI * 6e6,
        optical_depth: 2.0,
        ground_decay: 1e4,
        length: 0.1,
        schedule: gradient_schedule(3e-6, 2.0 * PI * 2e6 / 0.1).unwrap(),
        z_points: 81,
        t_points: 801,
        t_start: -4e-6,
        t_end: 10e-6,
        record_every: 20,
        strict: false,
    }
}

#[test]
fn free_propagation_matches_the_fresnel_kernel() {
    let grid = Grid::square(128, 2e-6).unwrap();
    let k0 = 2.0 * PI / 780e-9;
    let beam = ComplexField::from_fn(grid, k0, 1.0, |x, y| {
        Complex64::new((-(x * x + 2.0 * y * y) / (20e-6f64).powi(2)).exp(), 0.0) * Complex64::from_polar(1.0, 3e4 * x)
    });
    let z = 2e-3;
    let exact = fresnel_propagate(&beam, z);
    let stepped = split_step_nlse(beam, &MediumSpec::kerr(0.0, z), z / 7.0, 7).unwrap();
    let worst = exact.data.iter().zip(&stepped.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn gaussian_beam_spreads_as_the_rayleigh_law() {
    let w0 = 10e-6;
    let k0 = 2.0 * PI / 780e-9;
    let grid = Grid::square(256, w0 / 8.0).unwrap();
    let beam = ComplexField::from_fn(grid, k0, 1.0, |x, y| Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0));
    let z_r = 0.5 * k0 * w0 * w0;
    for z in [0.5 * z_r, z_r, 2.0 * z_r] {
        let out = fresnel_propagate(&beam, z);
        let centre = out.at(128, 128).norm_sqr();
        // on-axis intensity falls as 1/(1 + (z/z_R)²)
        let expected = 1.0 / (1.0 + (z / z_r).powi(2));
        assert!((centre / expected - 1.0).abs() < 1e-9, "z = {z}: {centre} vs {expected}");
    }
}
