use std::f64::consts::PI;

use approx::assert_relative_eq;
use gsqg_core::specialfn::*;
use gsqg_core::Alpha;
use proptest::prelude::*;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn oracle_beta(a: Alpha, n: u32) -> f64 {
    let x = PI / (2.0 * n as f64);
    let estimate = kernel_quadrature_oracle(a, n, KernelKind::Sine, x, 1e-8).unwrap();
    estimate.value / (n as f64 * x).sin()
}

#[test]
fn beta_matches_the_quadrature_oracle() {
    for a in [1.0, 1.3, 1.6, 1.95] {
        for n in [1, 2, 5, 17, 40, 64] {
            let exact = beta_coefficient(alpha(a), n).unwrap();
            assert_relative_eq!(exact, oracle_beta(alpha(a), n), max_relative = 1e-7);
        }
    }
}

#[test]
fn cosine_kernel_has_the_same_coefficient() {
    let a = alpha(1.25);
    let x = 0.3;
    let estimate = kernel_quadrature_oracle(a, 4, KernelKind::Cosine, x, 1e-10).unwrap();
    assert_relative_eq!(estimate.value / (4.0 * x).cos(), beta_coefficient(a, 4).unwrap(), max_relative = 1e-8);
}

#[test]
fn unit_alpha_sums() {
    let one = alpha(1.0);
    assert_relative_eq!(beta_coefficient(one, 1).unwrap(), 8.0, epsilon = 1e-15);
    assert_relative_eq!(beta_coefficient(one, 2).unwrap(), 8.0 * (1.0 + 1.0 / 3.0), max_relative = 1e-15);
    assert_relative_eq!(sigma_coefficient(one, 2).unwrap(), 8.0 / (3.0 * PI), max_relative = 1e-15);
    assert_relative_eq!(linearization_symbol(one, 2).unwrap(), 2.0 / (3.0 * PI), max_relative = 1e-15);
    assert!(xi_constant(one).is_err());
}

#[test]
fn point_vortex_constant_is_alpha_times_kernel_constant() {
    for k in 0..50 {
        let a = alpha(1.0 + k as f64 / 50.0);
        let c = biot_savart_constant(a);
        assert_relative_eq!(point_vortex_constant(a), a.value() * c, max_relative = 1e-13);
    }
}

#[test]
fn corrected_constant_ratio_holds() {
    for k in 1..=50 {
        let a = alpha(1.0 + k as f64 / 51.0);
        let xi = xi_constant(a).unwrap();
        let expected =
            (a.value() + 2.0) * a.value() * biot_savart_constant(a) / (2.0 * linearization_symbol(a, 2).unwrap());
        assert_relative_eq!(xi, expected, max_relative = 1e-10);
    }
}

#[test]
fn printed_constant_ratio_is_half_the_true_ratio() {
    for a in [1.1, 1.5, 1.9] {
        let a = alpha(a);
        let ratio = constant_ratio(a).unwrap() / printed_constant_ratio(a).unwrap();
        assert_relative_eq!(ratio, 2.0, max_relative = 1e-10);
    }
}

#[test]
fn zero_mode_is_rejected() {
    assert!(matches!(beta_coefficient(alpha(1.5), 0), Err(SpecialFnError::ZeroMode)));
    assert!(matches!(sigma_coefficient(alpha(1.5), 0), Err(SpecialFnError::ZeroMode)));
    assert!(Alpha::new(2.0).is_err());
    assert!(Alpha::new(0.99).is_err());
    assert!(Alpha::new(f64::NAN).is_err());
}

proptest! {
    #[test]
    fn sigma_is_strictly_increasing(a in 1.0f64..1.999, n in 1u32..200) {
        let a = alpha(a);
        prop_assert!(sigma_coefficient(a, n + 1).unwrap() > sigma_coefficient(a, n).unwrap());
        prop_assert!(linearization_symbol(a, n + 2).unwrap() > linearization_symbol(a, n + 1).unwrap());
    }

    #[test]
    fn beta_grows_like_a_power(a in 1.0f64..1.999, n in 1u32..5000) {
        let a = alpha(a);
        let ratio = beta_coefficient(a, n).unwrap() / (n as f64).powf(a.value() - 1.0);
        // The unit branch grows logarithmically; the bound covers n ≤ 5000.
        let bound = if a.is_unit() { 8.0 * (1.0 + 0.5 * (2.0 * n as f64).ln()) } else { 64.0 / (2.0 - a.value()) };
        prop_assert!(ratio > 0.0 && ratio <= bound, "ratio {ratio}, bound {bound}");
    }
}
