use radex::optimize::{best_descent_direction, radial_descent, stationarity_check, DescentParams, DescentStatus};
use radex::registry::expression_oracle;
use radex::weaksub::global_min_certificate;
use radex::{get_function, Oracle64, Point, Schedule64};

fn check_trace(f: &Oracle64, x0: &[f64], params: &DescentParams<f64>) -> radex::optimize::DescentTrace<f64> {
    let trace = radial_descent(f, &Point::new(x0.to_vec()).unwrap(), params).unwrap();
    for w in trace.iterates.windows(2) {
        let t = w[1].t.unwrap();
        assert!(w[1].f < w[0].f - params.descent_tol * t / 2.0, "{}: {:?}", f.label(), trace.iterates);
        assert_eq!(f.eval_finite(&w[1].x).unwrap(), w[1].f);
    }
    if trace.status == DescentStatus::GlobalMinCertified {
        let x = Point::new(trace.last().x.clone()).unwrap();
        let grid = params.direction_grid(x0.len(), false);
        assert!(global_min_certificate(f, &x, &params.certificate).unwrap().holds);
        assert!(stationarity_check(f, &x, &grid, &params.schedule, params.descent_tol).unwrap());
    }
    trace
}

#[test]
fn traces_descend_strictly_and_certificates_are_consistent() {
    let params = DescentParams::default();
    for (name, x0) in [("f1", -3.0), ("f1", 0.5), ("f3", 1.0), ("f3", 2.5), ("f3", -3.0), ("f9", 2.0), ("f9", -4.0), ("f7", 0.7)] {
        let f = get_function::<f64>(name).unwrap();
        let trace = check_trace(&f, &[x0], &params);
        assert_ne!(trace.status, DescentStatus::PossiblyUnbounded, "{name} from {x0}");
    }
}

#[test]
fn local_minimum_is_left_in_one_step() {
    let f3 = get_function::<f64>("f3").unwrap();
    let trace = check_trace(&f3, &[1.0], &DescentParams::default());
    assert!(trace.iterates.len() >= 2);
    assert!(trace.iterates[1].f < 3.0);
    assert_eq!(trace.iterates[1].h, Some(vec![-1.0]));
}

#[test]
fn descent_direction_examples() {
    let s = Schedule64::default();
    let grid = vec![vec![-1.0], vec![1.0]];
    let pick = |name: &str, x: f64| best_descent_direction(&get_function::<f64>(name).unwrap(), &Point::scalar(x), &grid, &s, 1e-4).unwrap();
    let d = pick("f3", 1.0);
    assert_eq!(d.h, vec![-1.0]);
    assert!((d.fr.to_f64() + 1.5).abs() < 5e-2 && d.qualifies);
    let d = pick("f8", 0.0);
    assert_eq!(d.h, vec![1.0]);
    assert!((d.fr.to_f64() + 1.0).abs() < 5e-2 && d.qualifies);
    assert!(!pick("f9", 0.0).qualifies);
    assert!(!pick("f3", -1.0).qualifies);
}

#[test]
fn nonsmooth_problem_in_two_dimensions() {
    // global minimum 0 at (1, -1); a local trap at the origin for gradient steps
    let f = expression_oracle::<f64>("g", "abs(x1 - 1) + 2*abs(x2 + 1)", 2).unwrap();
    let params = DescentParams {
        certificate: radex::weaksub::SampleSpec { points: 3000, ..Default::default() },
        ..Default::default()
    };
    let trace = check_trace(&f, &[-2.0, 3.0], &params);
    assert_eq!(trace.status, DescentStatus::GlobalMinCertified, "{:?}", trace.iterates);
    assert!(trace.last().f < 1e-6);
}

#[test]
fn unbounded_function_is_flagged() {
    let f = get_function::<f64>("f8").unwrap();
    let trace = check_trace(&f, &[0.0], &DescentParams::default());
    assert_eq!(trace.status, DescentStatus::PossiblyUnbounded);
    let trace = check_trace(&f, &[-3.0], &DescentParams::default());
    assert_eq!(trace.status, DescentStatus::PossiblyUnbounded);
}
