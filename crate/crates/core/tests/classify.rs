mod common;

use common::{random_hurwitz, random_hurwitz_3x3, random_matrix, rng};
use turing_one_core::classify::{
    classify, dominance_tolerance, lemma3_check, proposition1_check, scan_rightmost, subsystem_poles,
    theorem1_property, theorem2_conditions, Alphas, ClassifyOptions, Verdict, VerdictKind,
};
use turing_one_core::model::{LambdaPolicy, LinearSystem, SpatialSpec};
use turing_one_core::numerics::{is_hurwitz, poly_roots, Matrix};

/// Type-I by the dense gain scan: some finite gain puts the rightmost pole
/// in the closed right half-plane and strictly right of `β`.
fn scan_says_type_one(sys: &LinearSystem) -> bool {
    let tf = sys.transfer_function().unwrap();
    let scale = 1.0 + sys.matrix().norm_inf();
    let beta = poly_roots(tf.num()).unwrap().max_real();
    let scan = scan_rightmost(&tf, 1e-6 * scale, 1e6 * scale, 2000).unwrap();
    scan.max_real >= 0.0 && scan.max_real > beta + dominance_tolerance(sys)
}

/// Every Type-I verdict has non-real dominant poles, and its dominant modes
/// maximize the rightmost real part over the discrete modes, strictly right
/// of the limit `β + tol_dom`.
fn check_type_one(sys: &LinearSystem, spec: &SpatialSpec, v: &Verdict) {
    assert!(
        proposition1_check(v).unwrap(),
        "real dominant pole for {:?}",
        sys.matrix()
    );
    let tf = sys.transfer_function().unwrap();
    let best = (0..=spec.k_max)
        .map(|k| subsystem_poles(&tf, spec, k).unwrap().max_real())
        .fold(f64::NEG_INFINITY, f64::max);
    for k in v.dominant_modes() {
        let r = subsystem_poles(&tf, spec, k).unwrap().max_real();
        assert!(r >= best - v.tol_dom);
    }
    let beta = poly_roots(tf.num()).unwrap().max_real();
    assert!(best > beta + v.tol_dom);
}

#[test]
fn two_species_are_never_type_one() {
    let mut rng = rng(31);
    let spec = SpatialSpec::new(1e-2, std::f64::consts::PI, 200, LambdaPolicy::Discrete).unwrap();
    let mut type_two = 0;
    for _ in 0..1000 {
        let a = random_hurwitz(&mut rng, 2, 2.0, 0.0);
        assert!(theorem1_property(&a).unwrap(), "{a:?}");
        let sys = LinearSystem::new(a).unwrap();
        assert!(!scan_says_type_one(&sys));
        let v = classify(&sys, &spec, &ClassifyOptions::default()).unwrap();
        assert_ne!(v.kind, VerdictKind::TypeI);
        type_two += usize::from(v.kind == VerdictKind::TypeII);
    }
    assert!(type_two > 0, "sample never exercised Type-II");
    assert!(theorem1_property(&Matrix::diag(&[1.0, -2.0])).is_err());
}

#[test]
fn closed_form_conditions_match_gain_scan() {
    let mut rng = rng(32);
    let (mut compared, mut positive, mut skipped) = (0, 0, 0);
    for i in 0.. {
        if compared == 2000 {
            break;
        }
        let a = random_hurwitz_3x3(&mut rng, i);
        let sys = LinearSystem::new(a).unwrap();
        let alphas = Alphas::of(&sys).unwrap();
        if alphas.margins().iter().any(|m| m.abs() < 1e-6) {
            skipped += 1;
            continue;
        }
        let closed = theorem2_conditions(&sys).unwrap().type_one();
        let scanned = scan_says_type_one(&sys);
        let lemma3 = lemma3_check(&sys).unwrap().satisfied;
        assert_eq!(closed, scanned, "{:?} {alphas:?}", sys.matrix());
        assert_eq!(lemma3, scanned, "{:?}", sys.matrix());
        compared += 1;
        positive += usize::from(closed);
    }
    assert!(positive >= 200, "only {positive} Type-I samples");
    assert!(skipped < 200);
}

#[test]
fn verdict_invariants_on_random_systems() {
    let mut rng = rng(33);
    let spec = SpatialSpec::new(1e-2, std::f64::consts::PI, 200, LambdaPolicy::Discrete).unwrap();
    let mut counts = [0usize; 4];
    for trial in 0..1500 {
        let a = match trial % 4 {
            0 => random_matrix(&mut rng, 2, 2.0),
            1 => random_matrix(&mut rng, 3, 2.0),
            2 => random_matrix(&mut rng, 4, 2.0),
            _ => random_hurwitz_3x3(&mut rng, 1),
        };
        let sys = LinearSystem::new(a).unwrap();
        let v = classify(&sys, &spec, &ClassifyOptions::default()).unwrap();
        let hurwitz = is_hurwitz(sys.transfer_function().unwrap().den()).unwrap();
        if !hurwitz {
            assert_eq!(v.kind, VerdictKind::NotTuring);
        }
        match v.kind {
            VerdictKind::Stable => counts[0] += 1,
            VerdictKind::NotTuring => counts[1] += 1,
            VerdictKind::TypeI => {
                counts[2] += 1;
                check_type_one(&sys, &spec, &v);
            }
            VerdictKind::TypeII => {
                counts[3] += 1;
                assert!(v.dominant.as_ref().unwrap().has_limit());
                assert!(v.dominant_modes().is_empty());
            }
        }
        assert_eq!(v.evidence.len() > spec.k_max, hurwitz);
    }
    assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
}

#[test]
fn discrete_type_one_implies_continuous() {
    let mut rng = rng(34);
    let spec = SpatialSpec::new(1e-2, std::f64::consts::PI, 200, LambdaPolicy::Discrete).unwrap();
    let cont = SpatialSpec {
        policy: LambdaPolicy::Continuous,
        ..spec
    };
    let mut seen = 0;
    for i in 0..600 {
        let sys = LinearSystem::new(random_hurwitz_3x3(&mut rng, i)).unwrap();
        let v = classify(&sys, &spec, &ClassifyOptions::default()).unwrap();
        if v.kind != VerdictKind::TypeI {
            continue;
        }
        seen += 1;
        let c = classify(&sys, &cont, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.kind, VerdictKind::TypeI);
        assert!(proposition1_check(&c).unwrap());
        assert!(theorem2_conditions(&sys).unwrap().type_one());
    }
    assert!(seen > 50, "{seen}");
}

#[test]
fn zero_diffusion_sees_only_k0() {
    let a = Matrix::from_rows(&[[-1.0, 0.0, 2.0], [0.0, -1.0, 1.0], [1.0, 0.5, -3.0]]).unwrap();
    let sys = LinearSystem::new(a).unwrap();
    let spec = SpatialSpec::new(0.0, 1.0, 10, LambdaPolicy::Discrete).unwrap();
    let v = classify(&sys, &spec, &ClassifyOptions::default()).unwrap();
    assert!(matches!(v.kind, VerdictKind::Stable | VerdictKind::NotTuring));
    assert!(v.critical_lambda.is_none());
}
