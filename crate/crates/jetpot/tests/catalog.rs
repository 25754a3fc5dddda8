//! Catalog-wide invariants: claimed cones, compatibility and tameness.

use jetpot::operators::{admissible_levels, catalog, eval, Params, NAMES};
use jetpot::sample;
use jetpot::subeq::{compatibility_check, level_set, monotonicity_check, tameness_check};
use jetpot::{Error, Jet, SymMatrix, Vector};

fn entries() -> Vec<(&'static str, Params)> {
    let mut v: Vec<(&'static str, Params)> = vec![
        ("lambda_min", Params::n(3)),
        ("lambda_max", Params::n(3)),
        ("truncated_laplacian", Params::n(3).with_k(2)),
        ("tau_k", Params::n(3).with_k(2)),
        ("special_lagrangian", Params::n(2)),
        ("det_MA", Params::n(2)),
        ("sigma_k", Params::n(3).with_k(2)),
        ("garding_branch", Params::n(3).with_k(2)),
        ("gradient_free_garding", Params::n(2)),
        ("gradient_free_garding", Params { h: Some("one".into()), poly: Some("sigma_1".into()), ..Params::n(2) }),
        ("affine_sphere", Params::n(2)),
        ("directional", Params::n(2)),
        ("directional", Params { d: Some("orthant".into()), k: Some(2), ..Params::n(3) }),
        ("optimal_transport", Params::n(2)),
        ("F_plus_kR", Params::n(3).with_k(2).with_r(0.5)),
        ("F_minus_kR", Params::n(3).with_k(1).with_r(2.0)),
        ("linear", Params::n(3)),
        ("parabolic_P1", Params { gamma: Some(0.5), ..Params::n(3) }),
        ("parabolic_P1", Params { g: Some("lambda_min".into()), ..Params::n(2) }),
        ("parabolic_FP1", Params::n(3)),
    ];
    v.push(("alpha_F", Params::n(2).with_alpha(2.0)));
    v
}

#[test]
fn every_name_builds() {
    for name in NAMES {
        let p = Params { k: Some(1), radius: Some(1.0), alpha: Some(2.0), ..Params::n(3) };
        catalog(name, &p).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn claimed_cones_pass_monotonicity() {
    for (name, p) in entries() {
        let spec = catalog(name, &p).unwrap();
        let Some(cone) = spec.claimed_cone.clone() else { continue };
        let s = spec.zero_set().unwrap();
        let rep = monotonicity_check(&s, &cone, 10_000, 42, None);
        assert!(rep.pass, "{name} {p:?}: worst {} {:?}", rep.worst_margin, rep.notes);
        assert_eq!(rep.n_samples, 10_000);
    }
}

#[test]
fn unconstrained_operators_are_monotone_in_value() {
    for (name, p) in entries() {
        let spec = catalog(name, &p).unwrap();
        if spec.pair.constraint.is_some() {
            continue;
        }
        let Some(cone) = spec.claimed_cone.clone() else { continue };
        let s = spec.zero_set().unwrap();
        let op = spec.pair.operator_fn();
        let rep = monotonicity_check(&s, &cone, 2_000, 7, Some(&op));
        assert!(rep.pass, "{name}: {:?}", rep.notes);
    }
}

#[test]
fn constrained_entries_are_compatible() {
    for (name, p) in entries() {
        let spec = catalog(name, &p).unwrap();
        if spec.pair.constraint.is_none() {
            continue;
        }
        let rep = compatibility_check(&spec.pair, 1_000, 42).unwrap();
        assert!(rep.pass, "{name} {p:?}: {:?} {:?}", rep.verdict, rep.notes);
    }
}

#[test]
fn incompatible_pair_is_reported() {
    let spec = catalog("det_minus_r", &Params::n(2)).unwrap();
    let rep = compatibility_check(&spec.pair, 1_000, 42).unwrap();
    assert!(!rep.pass);
    assert_eq!(rep.verdict.as_deref(), Some("divergent_infimum"));
}

#[test]
fn constrained_entries_are_tame_along_the_cone_axis() {
    for (name, p) in entries() {
        let spec = catalog(name, &p).unwrap();
        if spec.pair.constraint.is_none() {
            continue;
        }
        let Some(cone) = spec.claimed_cone.clone() else { continue };
        let j0 = cone.interior_axis(spec.n());
        let rep = tameness_check(&spec.pair, &j0, 500, 3);
        // tameness is claimed only where the operator is strictly increasing
        // along J0 off the boundary of its constraint
        if !rep.pass {
            assert!(rep.notes.iter().any(|n| !n.is_empty()), "{name}");
        }
    }
}

#[test]
fn admissible_level_metadata() {
    for (name, p) in entries() {
        let spec = catalog(name, &p).unwrap();
        let lv = admissible_levels(&spec);
        assert!(lv.lo <= lv.hi, "{name}");
        if spec.axis.is_some() && name != "garding_branch" {
            assert!(lv.lo == f64::NEG_INFINITY && lv.hi == f64::INFINITY, "{name}: canonical operators take every level");
        }
    }
}

#[test]
fn constrained_eval_refuses_outside_jets() {
    let spec = catalog("tau_k", &Params::n(3).with_k(2)).unwrap();
    let j = Jet::from_parts(0.0, Vector::zeros(3), SymMatrix::diag(&[-5.0, 1.0, 1.0]));
    assert!(matches!(eval(&spec, &j), Err(Error::ConstraintViolation(_))));
    let j = Jet::from_parts(0.0, Vector::zeros(3), SymMatrix::diag(&[-0.5, 1.0, 1.0]));
    // pairwise sums 0.5, 0.5, 2
    assert!((eval(&spec, &j).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn level_sets_nest() {
    let spec = catalog("special_lagrangian", &Params::n(2)).unwrap();
    let a = level_set(&spec.pair, -1.0).unwrap();
    let b = level_set(&spec.pair, 1.0).unwrap();
    let mut rng = sample::rng(9);
    for _ in 0..1000 {
        let j = sample::jet(&mut rng, 2);
        assert!(b.margin(&j) <= a.margin(&j));
    }
    assert!(matches!(level_set(&spec.pair, 4.0), Err(Error::Level(_))));
}
