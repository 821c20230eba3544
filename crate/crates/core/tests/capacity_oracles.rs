use heislab::capacity::{
    capacity_bound_parabolic, mc_spatial_integral, spatial_integral_subcritical,
    sphere_weight_constant, time_integral, time_integral_constant, time_power, Exponents,
};
use heislab::montecarlo::McConfig;
use heislab::test_functions::{PhiTest, SpaceTimeTest, TemporalFactor};
use heislab::GroupPoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::gamma;

/// Surface integral of `omega^s` over the unit gauge sphere in closed form.
fn sphere_closed_form(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    2.0 * pi.powf(nf) * pi.sqrt() * gamma((s + nf) / 2.0)
        / (gamma(nf) * gamma((s + nf + 1.0) / 2.0))
}

#[test]
fn sphere_constant_matches_gamma_closed_form() {
    let mc = McConfig {
        samples: 1_000_000,
        seed: 11,
    };
    for n in 1..=3 {
        for s in [0.0, 1.5, 2.0, 3.0] {
            let est = sphere_weight_constant(n, s, mc).unwrap();
            let exact = sphere_closed_form(n, s);
            let z = (est.value - exact).abs() / est.stderr;
            assert!(
                z < 4.0,
                "n = {n}, s = {s}: {} +- {} vs {exact}",
                est.value,
                est.stderr
            );
        }
    }
}

#[test]
fn sphere_closed_form_sanity() {
    let pi = std::f64::consts::PI;
    assert!((sphere_closed_form(1, 0.0) - 2.0 * pi * pi).abs() < 1e-12);
    assert!((sphere_closed_form(2, 0.0) - 4.0 * pi * pi).abs() < 1e-12);
}

#[test]
fn factorized_and_direct_integrals_agree() {
    let factor_mc = McConfig {
        samples: 1_000_000,
        seed: 42,
    };
    let direct_mc = McConfig {
        samples: 1_000_000,
        seed: 1234,
    };
    for (q, r) in [(1.5, 8.0), (2.0, 20.0), (3.0, 5.0)] {
        let e = Exponents::new(q, 1, None, None).unwrap();
        let f = spatial_integral_subcritical(&e, e.power_cutoff(), r, factor_mc).unwrap();
        let d = mc_spatial_integral(&e, e.power_cutoff(), r, direct_mc).unwrap();
        let z = (f.value - d.value).abs() / (f.stderr.powi(2) + d.stderr.powi(2)).sqrt();
        assert!(
            z <= 3.0,
            "q = {q}, R = {r}: {} vs {} ({z} sigma)",
            f.value,
            d.value
        );
    }
}

#[test]
fn zero_data_bound_decreases_in_r() {
    let e = Exponents::new(1.5, 1, None, None).unwrap();
    let mc = McConfig::default();
    let bounds: Vec<f64> = [2.0, 4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&r| capacity_bound_parabolic(&e, 1.0, r, 0.0, mc).unwrap().bound)
        .collect();
    for w in bounds.windows(2) {
        assert!(w[1] < w[0], "{bounds:?}");
    }
}

#[test]
fn supercritical_bound_grows() {
    let e = Exponents::new(3.0, 1, None, None).unwrap();
    let mc = McConfig::default();
    let a = capacity_bound_parabolic(&e, 1.0, 4.0, 0.0, mc).unwrap();
    let b = capacity_bound_parabolic(&e, 1.0, 8.0, 0.0, mc).unwrap();
    assert!(!a.critical && b.bound > a.bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn time_integral_is_power_times_constant(
        q in 1.1f64..4.0,
        extra in 0.05f64..4.0,
        big_t in 0.01f64..1e3,
        k in 0u8..3,
    ) {
        let ell = (q + 1.0) / (q - 1.0) + extra;
        let e = Exponents::new(q, 1, Some(ell), None).unwrap();
        let got = time_integral(&e, big_t, k).unwrap().value;
        let qc = q / (q - 1.0);
        let want = big_t.powf(time_power(&e, k)) * time_integral_constant(&e, k).unwrap();
        prop_assert!(((got - want) / want).abs() <= 1e-8, "{got} vs {want}");
        prop_assert!((time_power(&e, k) - (1.0 - k as f64 * qc)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spatial_integral_dilates_exactly(q in 1.2f64..3.5, r in 2.0f64..200.0) {
        let e = Exponents::new(q, 1, None, None).unwrap();
        let mc = McConfig { samples: 50_000, seed: 3 };
        let qc = q / (q - 1.0);
        let a = spatial_integral_subcritical(&e, e.power_cutoff(), r, mc).unwrap().value;
        let b = spatial_integral_subcritical(&e, e.power_cutoff(), 1.0, mc).unwrap().value;
        let scaled = a * r.powf(2.0 * qc - 4.0);
        prop_assert!(((scaled - b) / b).abs() <= 1e-6, "{scaled} vs {b}");
    }

    /// Hölder step of the capacity argument on a midpoint grid, with a random
    /// nonnegative step function `u`.
    #[test]
    fn holder_step_holds_for_step_functions(q in 1.2f64..3.0, seed in 0u64..1000) {
        let ell = TemporalFactor::default_ell(q);
        let e = Exponents::new(q, 1, None, None).unwrap();
        let r_scale = 2.0;
        let phi = PhiTest {
            n: 1,
            temporal: TemporalFactor::new(1.0, ell).unwrap(),
            cutoff: e.power_cutoff(),
            r_scale,
        };
        let qc = q / (q - 1.0);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (nt, ns) = (6usize, 10usize);
        let hs = [2.0 * r_scale / ns as f64, 2.0 * r_scale / ns as f64, 2.0 * r_scale * r_scale / ns as f64];
        let vol = hs.iter().product::<f64>() / nt as f64;
        let (mut lhs, mut a, mut b) = (0.0, 0.0, 0.0);
        for it in 0..nt {
            let t = (it as f64 + 0.5) / nt as f64;
            for i in 0..ns {
                for j in 0..ns {
                    for k in 0..ns {
                        let p = GroupPoint::h1(
                            -r_scale + (i as f64 + 0.5) * hs[0],
                            -r_scale + (j as f64 + 0.5) * hs[1],
                            -r_scale * r_scale + (k as f64 + 0.5) * hs[2],
                        );
                        let ev = phi.eval(t, &p).unwrap();
                        if ev.value == 0.0 {
                            prop_assert!(ev.lap_t == 0.0);
                            continue;
                        }
                        let u: f64 = rng.gen_range(0.0..3.0);
                        lhs += vol * u * ev.lap_t.abs();
                        a += vol * u.powf(q) * ev.value;
                        b += vol * ev.value.powf(-1.0 / (q - 1.0)) * ev.lap_t.abs().powf(qc);
                    }
                }
            }
        }
        let rhs = a.powf(1.0 / q) * b.powf(1.0 / qc);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }
}
