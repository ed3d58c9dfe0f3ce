use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphere_degree::chains::boundary;
use sphere_degree::degree::maps::{AntipodalOf, AzimuthalPower, FnMap, Identity, Precomposed, Rotated};
use sphere_degree::degree::{
    codomain, compute_degree, designated_path, evaluate, face_chains, refine, DegreeOptions,
};
use sphere_degree::rotation::{sample_so3_uniform, Rotation};
use sphere_degree::sphere::{spherical_point, to_spherical, UnitVector};
use sphere_degree::triangulation::build_complex;
use sphere_degree::{compute_degree_with, Error};

fn rotation_from_seed(seed: u64) -> Rotation {
    sample_so3_uniform(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn parallel_and_sequential_reports_match() {
    let f = Rotated { rotation: rotation_from_seed(3), inner: AzimuthalPower { k: -2 } };
    let run = |parallel| {
        compute_degree_with(&f, &DegreeOptions { n: None, oracle: true, parallel }).unwrap()
    };
    assert_eq!(run(true), run(false));
}

#[test]
fn refinement_agrees_across_several_steps() {
    let f = AzimuthalPower { k: 3 };
    let mut n = 29;
    for _ in 0..4 {
        assert_eq!(compute_degree(&f, Some(n)).unwrap().degree, 3, "n = {n}");
        n = refine(n);
    }
}

#[test]
fn smooth_non_product_map() {
    // (θ, φ) ↦ (2θ + sin φ, φ) is homotopic to the power-2 map
    let f = FnMap::new(
        |p: UnitVector| {
            let c = to_spherical(p);
            Ok(spherical_point(2.0 * c.theta() + c.phi().sin(), c.phi()))
        },
        Some(3.0),
    );
    assert_eq!(compute_degree(&f, None).unwrap().degree, 2);
}

#[test]
fn failing_map_propagates_error() {
    let f = FnMap::new(|_| Err(Error::DegenerateProjection { norm: 0.0, threshold: 0.1 }), Some(1.0));
    assert!(matches!(compute_degree(&f, None), Err(Error::DegenerateProjection { .. })));
}

#[test]
fn missing_lipschitz_needs_mesh() {
    let f = FnMap::new(Ok, None);
    assert!(matches!(compute_degree(&f, None), Err(Error::InvalidParameter(_))));
    assert_eq!(compute_degree(&f, Some(12)).unwrap().degree, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn postcomposed_rotation_keeps_degree(seed in any::<u64>(), k in -3i32..=3) {
        let base = compute_degree(&AzimuthalPower { k }, None).unwrap().degree;
        let f = Rotated { rotation: rotation_from_seed(seed), inner: AzimuthalPower { k } };
        prop_assert_eq!(compute_degree(&f, None).unwrap().degree, base);
    }

    #[test]
    fn precomposed_rotation_keeps_degree(seed in any::<u64>(), k in -3i32..=3) {
        let f = Precomposed { rotation: rotation_from_seed(seed), inner: AzimuthalPower { k } };
        let n = sphere_degree::degree::choose_n(k.unsigned_abs().max(1) as f64).unwrap();
        prop_assert_eq!(compute_degree(&f, Some(n)).unwrap().degree, k as i64);
    }

    #[test]
    fn antipodal_negates_degree(seed in any::<u64>(), k in -3i32..=3) {
        let inner = Rotated { rotation: rotation_from_seed(seed), inner: AzimuthalPower { k } };
        let d = compute_degree(&inner, None).unwrap().degree;
        prop_assert_eq!(compute_degree(&AntipodalOf(inner), None).unwrap().degree, -d);
    }

    #[test]
    fn chain_map_law_for_rotations(seed in any::<u64>(), n in 10usize..16) {
        let f = Rotated { rotation: rotation_from_seed(seed), inner: Identity };
        let complex = build_complex(n).unwrap();
        let images = evaluate(&f, &complex, false).unwrap();
        let t3 = codomain().complex();
        for (lift, bnd) in face_chains(&complex, &images).unwrap() {
            prop_assert_eq!(boundary(t3, &lift).unwrap(), bnd);
        }
    }

    #[test]
    fn designated_paths_are_antisymmetric_cycles(a in 0usize..11, b in 0usize..11, c in 0usize..11) {
        let cd = codomain();
        prop_assert_eq!(cd.path(a, b), &cd.path(b, a).scaled(-1));
        let vs = cd.complex().vertices();
        let steps = designated_path(&vs[a], &vs[b]);
        prop_assert_eq!(steps.is_empty(), a == b);
        // the boundary of the corner loop is zero
        let loop_chain = cd.corner_boundary([a, b, c]);
        prop_assert!(boundary(cd.complex(), &loop_chain).unwrap().is_zero());
    }
}
