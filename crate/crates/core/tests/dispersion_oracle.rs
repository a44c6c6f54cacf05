//! Dispersion values checked against high-precision reference values and
//! against independent evaluations through `statrs` and a product recurrence.

use patchlab_core::dispersion::{c_alpha, scan_divisors, Alpha, Dispersion};
use patchlab_core::util::loglog_fit;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma as ln_gamma_ref;

fn disp(a: f64) -> Dispersion {
    Dispersion::new(Alpha::new(a).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

// Reference values computed with 30-digit arithmetic.
const GOLD: [(f64, f64, f64, f64, f64, f64, f64); 4] = [
    // alpha, c_alpha, C_alpha, V_alpha, omega(2), omega(3), L(3)
    (0.25, 4.111135488429876608, 0.61367067881884807847, 0.60613815086731638491,
     0.48491052069385310792, 1.0119871736219543122, 0.33732905787398477073),
    (0.5, 2.0920992401062032979, 0.83462684167407318628, 0.82312989008935857551,
     0.47035993719391918601, 1.0262398629685509513, 0.34207995432285031710),
    (0.75, 1.3895190660734924952, 1.4815320756351666641, 1.4688732372393635132,
     0.45196099607365031176, 1.0330537053112007126, 0.34435123510373357087),
    (1.5, 0.47798879748612499536, -0.38137988175090659403, -0.38670675189457049974,
     0.30936540151565639979, 0.82497440404175039944, 0.27499146801391679981),
];

#[test]
fn reference_constants() {
    for &(a, c, big_c, v, w2, w3, l3) in &GOLD {
        let d = disp(a);
        assert!(close(c_alpha(a).unwrap(), c, 1e-12), "c_alpha at {a}");
        assert!(close(d.prefactor(), big_c, 1e-12), "prefactor at {a}");
        assert!(close(d.v_alpha(), v, 1e-12), "v_alpha at {a}");
        assert!(close(d.omega(2).unwrap(), w2, 1e-11), "omega(2) at {a}");
        assert!(close(d.omega(3).unwrap(), w3, 1e-11), "omega(3) at {a}");
        assert!(close(d.l_alpha(3).unwrap(), l3, 1e-11), "L(3) at {a}");
        assert!(close(d.omega_dot(1).unwrap(), -v, 1e-13), "omega_dot(1) at {a}");
    }
}

/// The transport constant equals α times the closed form
/// `c_α/(2(1-α/2)) · Γ(2-α)/((1-α) Γ(1-α/2)²)`.
#[test]
fn transport_constant_relation() {
    for a in [0.1, 0.3, 0.5, 0.9, 1.3, 1.8] {
        let d = disp(a);
        let bare = d.c_alpha() / (2.0 * (1.0 - a / 2.0)) / (1.0 - a)
            * (ln_gamma_ref(2.0 - a) - 2.0 * ln_gamma_ref(1.0 - a / 2.0)).exp();
        assert!(close(d.v_alpha() / bare, a, 1e-12));
    }
}

/// Γ(α/2 + j)/Γ(1 - α/2 + j) by the recurrence Γ(x+1) = xΓ(x).
fn ratio_by_recurrence(a: f64, j: u32) -> f64 {
    let (p, q) = (a / 2.0, 1.0 - a / 2.0);
    let mut r = (ln_gamma_ref(p) - ln_gamma_ref(q)).exp();
    for i in 0..j {
        r *= (p + i as f64) / (q + i as f64);
    }
    r
}

#[test]
fn omega_dot_against_independent_gamma() {
    for a in [0.2, 0.5, 0.8] {
        let d = disp(a);
        for j in [1u32, 2, 5, 17, 64, 199] {
            let expect = -d.prefactor() * j as f64 * ratio_by_recurrence(a, j);
            assert!(close(d.omega_dot(j as i64).unwrap(), expect, 1e-11), "alpha {a} j {j}");
        }
        for j in [300i64, 1000, 5000] {
            let x = j as f64;
            let lr = ln_gamma_ref(a / 2.0 + x) - ln_gamma_ref(1.0 - a / 2.0 + x);
            let expect = -d.prefactor() * x * lr.exp();
            assert!(close(d.omega_dot(j).unwrap(), expect, 1e-9), "alpha {a} j {j}");
        }
    }
}

#[test]
fn growth_rate_is_alpha() {
    for a in [0.25, 0.5, 0.75] {
        let d = disp(a);
        let js: Vec<f64> = (64..=512).map(|j| j as f64).collect();
        let ws: Vec<f64> = (64..=512).map(|j| d.omega_dot(j).unwrap().abs()).collect();
        let (slope, _, _) = loglog_fit(&js, &ws);
        assert!((slope - a).abs() < 1e-2, "alpha {a}: slope {slope}");
        // leading coefficient -C_α |j|^α
        let j: f64 = 1.0e6;
        let lead = d.omega_dot(j as i64).unwrap() / (-d.prefactor() * j.powf(a));
        assert!((lead - 1.0).abs() < 1e-6);
    }
}

#[test]
fn three_wave_floor_alpha_half() {
    let d = disp(0.5);
    let rep = d.resonance_scan(128).unwrap();
    assert!(rep.min_abs_divisor >= d.omega(2).unwrap() * (1.0 - 1e-12));
    assert!(rep.floor_ratio >= 1.0 - 1e-12);
}

#[test]
fn scan_is_invariant_under_linear_shift() {
    let d = disp(0.5);
    let base = scan_divisors(48, |j| d.omega_dot_real(j as f64)).unwrap();
    let shifted = scan_divisors(48, |j| d.omega_dot_real(j as f64) + 3.7 * j as f64).unwrap();
    assert!((base.min_abs_divisor - shifted.min_abs_divisor).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divisor_is_symmetric_and_odd(a in 0.05f64..0.95, j in -200i64..200, n in -200i64..200) {
        prop_assume!(j != 0 && n != 0 && j + n != 0);
        let d = disp(a);
        let x = d.three_wave_divisor(j, n).unwrap();
        prop_assert_eq!(x, d.three_wave_divisor(n, j).unwrap());
        prop_assert!((x + d.three_wave_divisor(-j, -n).unwrap()).abs() < 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn floor_holds_on_random_triads(a in 0.05f64..0.95, j in -300i64..300, n in -300i64..300) {
        prop_assume!(j != 0 && n != 0 && j + n != 0);
        let d = disp(a);
        let x = d.three_wave_divisor(j, n).unwrap().abs();
        prop_assert!(x >= d.omega(2).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn l_alpha_even(a in 0.05f64..1.95, j in 1i64..10_000) {
        prop_assume!((a - 1.0).abs() > 1e-3);
        let d = disp(a);
        prop_assert_eq!(d.l_alpha(j).unwrap(), d.l_alpha(-j).unwrap());
    }
}
