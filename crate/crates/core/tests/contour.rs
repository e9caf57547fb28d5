use std::f64::consts::PI;

use approx::assert_relative_eq;
use gsqg_core::contour::*;
use gsqg_core::pointvortex::{corotating_pair, equilibrium_residual, stationary_tripole, traveling_pair, MotionKind};
use gsqg_core::pointvortex::{PointVortexConfiguration};
use gsqg_core::quadrature::PanelSettings;
use gsqg_core::Alpha;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn ensemble(config: &PointVortexConfiguration, eps: f64, shapes: Vec<PatchShape>) -> PatchEnsemble {
    let scales = vec![1.0; config.len()];
    PatchEnsemble::from_configuration(config, eps, &scales, shapes).unwrap()
}

#[test]
fn radial_profile_examples() {
    let one = alpha(1.0);
    let zero = PatchShape::zero(4);
    assert_eq!(radial_profile(&zero, 0.3, 1.0, one, 1.2), 1.0);
    let cos2 = PatchShape::from_modes(4, &[(2, 1.0, 0.0)]).unwrap();
    assert_relative_eq!(radial_profile(&cos2, 0.1, 1.0, one, 0.0), 1.01, epsilon = 1e-15);
    assert_relative_eq!(radial_profile(&cos2, -0.1, 1.0, one, 0.0), 0.99, epsilon = 1e-15);
    assert_relative_eq!(radial_profile(&cos2, -0.1, 2.0, one, 0.0), 1.0 - 0.01 * 4.0, epsilon = 1e-15);
    let [r, rp, rpp] = radial_derivatives(&cos2, 0.1, 1.0, one, 0.3);
    assert_relative_eq!(r, 1.0 + 0.01 * (0.6f64).cos(), epsilon = 1e-15);
    assert_relative_eq!(rp, -0.02 * (0.6f64).sin(), epsilon = 1e-15);
    assert_relative_eq!(rpp, -0.04 * (0.6f64).cos(), epsilon = 1e-15);
}

#[test]
fn shape_rejects_low_modes() {
    let mut shape = PatchShape::zero(5);
    assert!(matches!(shape.set(1, 1.0, 0.0), Err(ContourError::InvalidMode(1))));
    assert!(matches!(shape.set(6, 1.0, 0.0), Err(ContourError::InvalidMode(6))));
    assert_eq!(shape.coefficient(0), (0.0, 0.0));
    let flat = PatchShape::from_modes(5, &[(3, 0.5, -0.25)]).unwrap().to_flat();
    assert_eq!(PatchShape::from_flat(&flat).coefficient(3), (0.5, -0.25));
}

#[test]
fn circle_curvature_is_one() {
    let zero = PatchShape::zero(6);
    for k in 0..32 {
        assert_eq!(curvature(&zero, 0.05, 1.0, alpha(1.5), k as f64 * 0.2), 1.0);
    }
}

#[test]
fn curvature_matches_boundary_finite_differences() {
    let shape = PatchShape::from_modes(4, &[(2, 1.0, 0.0), (3, 0.2, 0.4)]).unwrap();
    let (eps, a) = (0.2, alpha(1.0));
    let point = |x: f64| {
        let r = radial_profile(&shape, eps, 1.0, a, x);
        [r * x.cos(), r * x.sin()]
    };
    let h = 1e-4;
    for x in [0.1, 1.0, 2.5, 4.0] {
        let (p0, pp, pm) = (point(x), point(x + h), point(x - h));
        let d1 = [(pp[0] - pm[0]) / (2.0 * h), (pp[1] - pm[1]) / (2.0 * h)];
        let d2 = [(pp[0] - 2.0 * p0[0] + pm[0]) / (h * h), (pp[1] - 2.0 * p0[1] + pm[1]) / (h * h)];
        let kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / (d1[0].hypot(d1[1])).powi(3);
        assert_relative_eq!(curvature(&shape, eps, 1.0, a, x), kappa, max_relative = 1e-6);
    }
    // First order: κ ≈ 1 + δ(n² - 1) f.
    let single = PatchShape::from_modes(2, &[(2, 1.0, 0.0)]).unwrap();
    let delta = 0.01 * 0.01;
    assert_relative_eq!(curvature(&single, 0.01, 1.0, a, 0.0) - 1.0, 3.0 * delta, max_relative = 1e-3);
}

#[test]
fn ensemble_validation_errors() {
    let config = corotating_pair(1.0, 1.0, 1.0, alpha(1.5)).unwrap();
    let big = PatchShape::from_modes(2, &[(2, 1e6, 0.0)]).unwrap();
    let bad = PatchEnsemble::from_configuration(&config, 0.1, &[1.0, 1.0], vec![big, PatchShape::zero(2)]);
    assert!(matches!(bad, Err(ContourError::NonPositiveRadius { patch: 0, .. })));
    let overlap = PatchEnsemble::from_configuration(&config, 1.2, &[1.0, 1.0], vec![PatchShape::zero(2); 2]);
    assert!(matches!(overlap, Err(ContourError::Overlap { .. })), "{overlap:?}");
}

#[test]
fn zero_size_mode_one_is_the_point_vortex_residual() {
    let config = corotating_pair(1.0, 0.5, 1.0, alpha(1.25)).unwrap();
    let mut lambda = config.parameters();
    lambda[0] += 0.1;
    lambda[6] *= 1.3;
    let perturbed = config.with_parameters(&lambda).unwrap();
    let residual = equilibrium_residual(&perturbed).unwrap();
    let spectrum = functional_residual(&ensemble(&perturbed, 0.0, vec![PatchShape::zero(8); 2])).unwrap();
    for i in 0..2 {
        let (s1, c1) = spectrum.patches[i].mode(1);
        assert_relative_eq!(s1, -residual[2 * i], epsilon = 1e-14);
        assert_relative_eq!(c1, residual[2 * i + 1], epsilon = 1e-14);
        for n in 2..=8 {
            let (s, c) = spectrum.patches[i].mode(n);
            assert!(s.abs().max(c.abs()) < 1e-12, "mode {n}: {s:e} {c:e}");
        }
    }
}

#[test]
fn zero_size_equilibria_have_no_residual() {
    for a in [1.0, 1.5, 1.9] {
        for config in [
            corotating_pair(1.0, 0.5, 1.0, alpha(a)).unwrap(),
            traveling_pair(1.0, 1.0, alpha(a)).unwrap(),
            stationary_tripole(0.5, 1.0, alpha(a)).unwrap(),
        ] {
            let n = config.len();
            let spectrum = functional_residual(&ensemble(&config, 0.0, vec![PatchShape::zero(6); n])).unwrap();
            assert!(spectrum.sup_norm() < 1e-10, "{:?}: {:e}", config.motion(), spectrum.sup_norm());
        }
    }
}

#[test]
fn single_circular_patch_has_no_residual() {
    for a in [1.0, 1.5] {
        let config = PointVortexConfiguration::new(alpha(a), vec![[0.0, 0.0]], vec![1.0], 0.0, 0.0, MotionKind::Stationary)
            .unwrap();
        let ens = ensemble(&config, 0.05, vec![PatchShape::zero(4)]);
        let terms = Evaluator::for_ensemble(&ens).unwrap().terms(&ens).unwrap();
        assert!(terms.selfs[0].iter().all(|v| v.abs() < 1e-14));
        assert_eq!(mutual_interaction_term(&ens, 0, 0.4).unwrap(), 0.0);
    }
}

#[test]
fn kinematic_term_examples() {
    let config = PointVortexConfiguration::new(alpha(1.0), vec![[1.0, 0.0]], vec![1.0], 1.0, 0.0, MotionKind::Rotating)
        .unwrap();
    let ens = ensemble(&config, 0.0, vec![PatchShape::zero(2)]);
    for x in [0.0f64, 0.7, 2.0] {
        assert_relative_eq!(kinematic_term(&ens, 0, x).unwrap(), -x.sin(), epsilon = 1e-15);
        let moving = ens.with_motion(0.0, 2.0);
        assert_relative_eq!(kinematic_term(&moving, 0, x).unwrap(), -2.0 * x.sin(), epsilon = 1e-15);
        assert_eq!(kinematic_term(&ens.with_motion(0.0, 0.0), 0, x).unwrap(), 0.0);
    }
}

#[test]
fn cosine_shapes_give_reflection_symmetric_self_terms() {
    let config = PointVortexConfiguration::new(alpha(1.5), vec![[0.0, 0.0]], vec![1.0], 0.0, 0.0, MotionKind::Stationary)
        .unwrap();
    let shape = PatchShape::from_modes(6, &[(2, 0.4, 0.0), (5, -0.2, 0.0)]).unwrap();
    let ens = ensemble(&config, 0.1, vec![shape]);
    for x in [0.3f64, 1.1, 2.9] {
        let plus = self_interaction_term(&ens, 0, x).unwrap();
        let minus = self_interaction_term(&ens, 0, -x).unwrap();
        assert_relative_eq!(plus, -minus, epsilon = 1e-13);
    }
}

#[test]
fn small_size_self_term_approaches_the_spectral_limit() {
    let config = corotating_pair(1.0, 0.5, 1.0, alpha(1.5)).unwrap();
    let shape = PatchShape::from_modes(6, &[(2, 0.3, -0.2), (3, 0.1, 0.05)]).unwrap();
    let limit = self_interaction_term(&ensemble(&config, 0.0, vec![shape.clone(); 2]), 0, 0.7).unwrap();
    let mut previous = f64::INFINITY;
    for eps in [0.04, 0.02, 0.01] {
        let value = self_interaction_term(&ensemble(&config, eps, vec![shape.clone(); 2]), 0, 0.7).unwrap();
        let gap = (value - limit).abs();
        assert!(gap < previous);
        previous = gap;
    }
    assert!(previous < 1e-6);
}

#[test]
fn quadrature_route_reproduces_the_spectral_route() {
    for a in [1.0, 1.25, 1.9] {
        let config = corotating_pair(1.0, 0.5, 1.0, alpha(a)).unwrap();
        let shape = PatchShape::from_modes(8, &[(2, 0.3, -0.2), (3, 0.1, 0.05), (8, 0.01, 0.02)]).unwrap();
        let ens = ensemble(&config, 0.0, vec![shape.clone(), shape]);
        let spectral = Evaluator::new(alpha(a), EvaluatorSettings::new(8)).unwrap();
        let quadrature = spectral.with_route(SelfTermRoute::Quadrature);
        for x in [0.0, 0.7, 3.0] {
            assert_relative_eq!(
                quadrature.self_at(&ens, 0, x).unwrap(),
                spectral.self_at(&ens, 0, x).unwrap(),
                epsilon = 1e-12
            );
        }
    }
}

#[test]
fn panel_doubling_changes_self_terms_by_less_than_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in [1.0, 1.5, 1.9] {
        for eps in [0.01, 0.05] {
            for modes in [8, 32] {
                let config = corotating_pair(1.0, 0.5, 1.0, alpha(a)).unwrap();
                let shapes = vec![random_shape(&mut rng, modes, 1.0), random_shape(&mut rng, modes, 1.0)];
                let ens = ensemble(&config, eps, shapes);
                let base = EvaluatorSettings::new(modes);
                let mut doubled = base;
                doubled.panels = PanelSettings {
                    levels: 2 * base.panels.levels,
                    order: base.panels.order,
                    max_panel: 0.5 * base.panels.max_panel,
                };
                let coarse = Evaluator::new(alpha(a), base).unwrap().terms(&ens).unwrap();
                let fine = Evaluator::new(alpha(a), doubled).unwrap().terms(&ens).unwrap();
                let gap = coarse.selfs[0].iter().zip(&fine.selfs[0]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                assert!(gap <= 1e-8, "alpha {a}, eps {eps}, M {modes}: {gap:e}");
            }
        }
    }
}

#[test]
fn incremental_updates_match_full_evaluation() {
    let config = stationary_tripole(0.5, 1.0, alpha(1.5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shapes: Vec<PatchShape> = (0..3).map(|_| random_shape(&mut rng, 6, 1.0)).collect();
    let ens = ensemble(&config, 0.02, shapes);
    let evaluator = Evaluator::for_ensemble(&ens).unwrap();
    let base = evaluator.terms(&ens).unwrap();
    let mut moved = ens.clone();
    moved.patches_mut()[1].center[1] += 0.01;
    moved.patches_mut()[2].circulation *= 1.5;
    moved.patches_mut()[0].shape = random_shape(&mut rng, 6, 1.0);
    let moved = moved.with_motion(0.0, 0.0);
    let updated = evaluator
        .update_terms(&moved, &base, &[Change::Center(1), Change::Circulation(2), Change::Shape(0)])
        .unwrap();
    let full = evaluator.terms(&moved).unwrap();
    let (u, f) = (updated.total(evaluator.grid()), full.total(evaluator.grid()));
    for (p, q) in u.values.iter().flatten().zip(f.values.iter().flatten()) {
        assert_relative_eq!(p, q, epsilon = 1e-14);
    }
}

#[test]
fn mutual_term_limit_is_the_point_vortex_pairing() {
    let a = 1.5;
    let config = corotating_pair(1.0, 0.5, 1.0, alpha(a)).unwrap();
    let c_hat = gsqg_core::specialfn::point_vortex_constant(alpha(a));
    let gamma_j = config.circulations()[1];
    let dw = [config.centers()[0][0] - config.centers()[1][0], config.centers()[0][1] - config.centers()[1][1]];
    let dist = dw[0].hypot(dw[1]);
    let x = 0.9f64;
    let limit = 0.5 * c_hat * gamma_j * (dw[0] * x.sin() - dw[1] * x.cos()) / dist.powf(a + 2.0);
    let at = |eps: f64| mutual_interaction_term(&ensemble(&config, eps, vec![PatchShape::zero(4); 2]), 0, x).unwrap();
    assert_relative_eq!(at(0.0), limit, epsilon = 1e-15);
    // Three-level Richardson removes the O(ε) and O(ε²) corrections.
    let richardson = (8.0 * at(0.001) - 6.0 * at(0.002) + at(0.004)) / 3.0;
    assert_relative_eq!(richardson, limit, epsilon = 1e-8);
}

#[test]
fn integral_identities_vanish_on_random_ensembles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for a in [1.0, 1.5] {
        for _ in 0..5 {
            let ens = random_ensemble(&mut rng, MotionKind::Traveling, alpha(a), 8);
            let values = Evaluator::for_ensemble(&ens).unwrap().values(&ens).unwrap();
            let t = translation_identity(&ens, &values).unwrap();
            assert!(t[0].hypot(t[1]) < 1e-10, "{t:?}");

            let ens = random_ensemble(&mut rng, MotionKind::Rotating, alpha(a), 8);
            let values = Evaluator::for_ensemble(&ens).unwrap().values(&ens).unwrap();
            assert!(rotation_identity(&ens, &values).unwrap().abs() < 1e-10);

            let ens = random_ensemble(&mut rng, MotionKind::Stationary, alpha(a), 8);
            let values = Evaluator::for_ensemble(&ens).unwrap().values(&ens).unwrap();
            let v = stationary_identity_vector(&ens, &values).unwrap();
            assert!(v.iter().all(|c| c.abs() < 1e-10), "{v:?}");

            let m = stream_moment_identities(&ens, 64).unwrap();
            assert!(m.scalar.abs() < 1e-8 && m.vector[0].abs() < 1e-8 && m.vector[1].abs() < 1e-8, "{m:?}");
        }
    }
}

#[test]
fn stationary_identities_require_rest() {
    let config = corotating_pair(1.0, 0.5, 1.0, alpha(1.0)).unwrap();
    let ens = ensemble(&config, 0.01, vec![PatchShape::zero(4); 2]);
    let values = Evaluator::for_ensemble(&ens).unwrap().values(&ens).unwrap();
    assert!(matches!(stationary_identity_vector(&ens, &values), Err(ContourError::Invalid(_))));
}

#[test]
fn stream_function_of_a_circular_patch_is_radial() {
    let config =
        PointVortexConfiguration::new(alpha(1.5), vec![[0.3, -0.2]], vec![1.0], 0.0, 0.0, MotionKind::Stationary).unwrap();
    let ens = ensemble(&config, 0.1, vec![PatchShape::zero(4)]);
    for r in [0.05, 0.25, 1.0] {
        let p = stream_function(&ens, [0.3 + r, -0.2]).unwrap();
        let q = stream_function(&ens, [0.3 + r * (2.0f64).cos(), -0.2 + r * (2.0f64).sin()]).unwrap();
        assert_relative_eq!(p, q, max_relative = 1e-9);
    }
    let far = stream_function(&ens, [10.3, -0.2]).unwrap();
    let c = gsqg_core::specialfn::biot_savart_constant(alpha(1.5));
    assert_relative_eq!(far, 0.5 * c * 10f64.powf(-1.5), max_relative = 1e-3);
    assert!(matches!(stream_function(&ens, [0.4, -0.2]), Err(ContourError::NearBoundary { patch: 0, .. })));
}

#[test]
fn boundary_samples_follow_patch_order() {
    let config = traveling_pair(1.0, 1.0, alpha(1.0)).unwrap();
    let ens = ensemble(&config, 0.1, vec![PatchShape::zero(2); 2]);
    let rows = boundary_samples(&ens, 8);
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[8].patch, 1);
    assert_relative_eq!(rows[2].x, PI / 2.0, epsilon = 1e-15);
    assert_relative_eq!(rows[2].point[1], 0.1, epsilon = 1e-15);
    assert!(rows.iter().all(|r| r.radius == 1.0 && r.curvature == 1.0));
}
