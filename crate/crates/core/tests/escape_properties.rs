use multinacci::fractals::{
    escape_iterate, julia_iteration_count, mandelbrot_member, EscapeSettings, QuadraticParams,
    SetSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Plain orbit of `z0` under `z^2 + c`, no early exit.
fn orbit(cv: Complex64, z0: Complex64, steps: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(steps);
    let mut z = z0;
    for _ in 0..steps {
        z = z * z + cv;
        out.push(z);
    }
    out
}

fn complex_in(range: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (range.clone(), range).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn escaped_orbits_have_left_the_disk_for_good(cv in complex_in(-1.4..1.4), z0 in complex_in(-2.5..2.5)) {
        // |c| <= 2 here, so |z| > 2 forces |z^2 + c| > |z|.
        let settings = EscapeSettings::default().with_max_iterations(200);
        let r = escape_iterate(&QuadraticParams::new(cv, z0, settings).unwrap());
        if r.escaped {
            prop_assert!(r.final_modulus > 2.0);
            let n = r.iterations as usize;
            let path = orbit(cv, z0, n + 10);
            prop_assert!(path[..n - 1].iter().all(|z| z.norm() <= 2.0));
            for w in path[n - 1..].windows(2).filter(|w| w[1].is_finite()) {
                prop_assert!(w[1].norm() > w[0].norm());
            }
        } else {
            prop_assert_eq!(r.iterations, 201);
        }
    }

    #[test]
    fn larger_budgets_keep_escape_counts(cv in complex_in(-2.2..1.0), budget in 1u32..300, extra in 0u32..300) {
        let small = EscapeSettings::default().with_max_iterations(budget);
        let large = EscapeSettings::default().with_max_iterations(budget + extra);
        let zero = c(0.0, 0.0);
        let a = escape_iterate(&QuadraticParams::new(cv, zero, small).unwrap());
        let b = escape_iterate(&QuadraticParams::new(cv, zero, large).unwrap());
        if a.escaped {
            prop_assert!(b.escaped);
            prop_assert_eq!(a.iterations, b.iterations);
        }
        if b.escaped && b.iterations <= budget {
            prop_assert_eq!(a.iterations, b.iterations);
        }
        // Members at the larger budget are members at the smaller one.
        if !b.escaped {
            prop_assert!(!a.escaped);
        }
    }

    #[test]
    fn conjugation_symmetry(cv in complex_in(-2.0..0.5), z0 in complex_in(-2.0..2.0)) {
        prop_assert_eq!(mandelbrot_member(cv, 300).0, mandelbrot_member(cv.conj(), 300).0);
        for real in [-1.0, -2.0] {
            prop_assert_eq!(
                julia_iteration_count(c(real, 0.0), z0, 300),
                julia_iteration_count(c(real, 0.0), z0.conj(), 300)
            );
        }
    }

    #[test]
    fn cycle_detection_never_changes_a_verdict(cv in complex_in(-2.0..0.5)) {
        let plain = EscapeSettings::default().with_max_iterations(500);
        let fast = EscapeSettings { cycle_detection: true, ..plain };
        let zero = c(0.0, 0.0);
        let a = escape_iterate(&QuadraticParams::new(cv, zero, plain).unwrap());
        let b = escape_iterate(&QuadraticParams::new(cv, zero, fast).unwrap());
        prop_assert_eq!((a.iterations, a.escaped), (b.iterations, b.escaped));
    }
}

#[test]
fn julia_minus_two_matches_the_segment_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let set = SetSpec::Julia(c(-2.0, 0.0));
    let settings = EscapeSettings::default();
    let (mut agree, mut counted) = (0, 0);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-2.5..2.5);
        if (x.abs() - 2.0).abs() < 1e-9 {
            continue;
        }
        counted += 1;
        let member = !set.escape(c(x, 0.0), settings).escaped;
        if Some(member) == set.oracle(c(x, 0.0)) {
            agree += 1;
        }
    }
    assert_eq!(agree, counted);
}

#[test]
fn real_mandelbrot_slice_matches_the_interval_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut agree, mut counted) = (0, 0);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-2.2..0.5);
        if (x + 2.0).abs() < 1e-6 || (x - 0.25).abs() < 1e-6 {
            continue;
        }
        counted += 1;
        let member = mandelbrot_member(c(x, 0.0), 1000).0;
        if Some(member) == SetSpec::Mandelbrot.oracle(c(x, 0.0)) {
            agree += 1;
        }
    }
    assert!(agree as f64 / counted as f64 >= 0.999, "{agree}/{counted}");
}

#[test]
fn brute_force_segment_grid() {
    // 10^3 evenly spaced real starting points in [-2, 2] never leave it.
    for i in 0..1000 {
        let x = -2.0 + 4.0 * i as f64 / 999.0;
        assert_eq!(
            julia_iteration_count(c(-2.0, 0.0), c(x, 0.0), 1000),
            1001,
            "z0 = {x}"
        );
        assert!(orbit(c(-2.0, 0.0), c(x, 0.0), 1000)
            .iter()
            .all(|z| z.norm() <= 2.0));
    }
}

#[test]
fn golden_inverse_escapes_the_mandelbrot_set_quickly() {
    let (member, r) = mandelbrot_member(c(0.618034, 0.0), 1000);
    assert!(!member);
    assert!(r.iterations <= 30, "{}", r.iterations);
}

#[test]
fn negative_golden_ratio_orbit_stays_bounded_for_long_runs() {
    let (member, _) = mandelbrot_member(c(-1.618034, 0.0), 100_000);
    assert!(member);
}

#[test]
fn non_real_points_escape_under_z2_minus_2() {
    let n = julia_iteration_count(c(-2.0, 0.0), c(0.5, 0.5), 1000);
    let expected = orbit(c(-2.0, 0.0), c(0.5, 0.5), 1000)
        .iter()
        .position(|z| z.norm() > 2.0)
        .unwrap() as u32
        + 1;
    assert_eq!(n, expected);
    assert!(n < 10);
}
