mod common;

use common::{all_functions, probe_points};
use radex::regularity::{chain_report, classify_regularity, ConditionKind, EqualityFlag};
use radex::{get_function, Error, Point, Schedule64};

#[test]
fn support_conditions_imply_their_equalities() {
    let s = Schedule64::default();
    for (name, f) in all_functions() {
        for x in probe_points(name) {
            let report = classify_regularity(&f, &Point::scalar(x), &s).unwrap();
            assert!(report.chain.ordering_ok, "{name} at {x}: {:?}", report.chain.records);
            assert!(report.consistent, "{name} at {x}: flags {:?}", report.chain.equality_flags);
            // contrapositive, stated separately
            for kind in ConditionKind::ALL {
                if kind.implied_flags().iter().any(|flag| report.chain.refutes(*flag)) {
                    assert!(!report.holds(kind), "{name} at {x}: {kind} holds without its equalities");
                }
            }
            for (kind, verdict) in &report.conditions {
                if let Ok(v) = verdict {
                    assert_eq!(v.holds, v.witness.is_none(), "{name} at {x}: {kind}");
                }
            }
        }
    }
}

#[test]
fn radially_regular_points_have_the_full_chain() {
    let s = Schedule64::default();
    for (name, x) in [("f1", 3.0), ("f3", -2.0), ("f3", -3.0), ("f8", -1.0)] {
        let f = get_function::<f64>(name).unwrap();
        let report = classify_regularity(&f, &Point::scalar(x), &s).unwrap();
        assert_eq!(report.chain.equality_flags, EqualityFlag::ALL.to_vec(), "{name} at {x}");
    }
}

#[test]
fn oscillation_shows_up_as_missing_reference() {
    let s = Schedule64::default();
    let f5 = get_function::<f64>("f5").unwrap();
    let report = classify_regularity(&f5, &Point::scalar(0.0), &s).unwrap();
    assert!(matches!(report.verdict(ConditionKind::DirDerSupport), Some(Err(Error::ReferenceNotAvailable { .. }))));
    assert!(report.holds(ConditionKind::SubderSupport));
    assert!(report.chain.has(EqualityFlag::REqD));
}

#[test]
fn f6_chain_is_strict_at_both_ends() {
    let s = Schedule64::default();
    let f6 = get_function::<f64>("f6").unwrap();
    let report = chain_report(&f6, &Point::scalar(0.0), &[vec![1.0]], &s).unwrap();
    let rec = &report.records[0];
    let v: Vec<f64> = (0..4).map(|i| rec.usable(i).unwrap().to_f64()).collect();
    assert!(v[0] < -0.2 && v[0] > -0.3, "{v:?}");
    assert!(v[1].abs() < 1e-2 && v[2].abs() < 1e-2, "{v:?}");
    assert!((v[3] - 1.0).abs() < 1e-1, "{v:?}");
    assert_eq!(report.equality_flags, vec![EqualityFlag::DEqPrime]);
    assert_eq!(report.refuted_flags, vec![EqualityFlag::REqD, EqualityFlag::PrimeEqCircle]);
}

#[test]
fn empty_grid_is_rejected() {
    let f = get_function::<f64>("f1").unwrap();
    assert!(chain_report(&f, &Point::scalar(0.0), &[], &Schedule64::default()).is_err());
}
