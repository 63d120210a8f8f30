#![allow(dead_code)]

use radex::registry::BUILTIN_FUNCTIONS;
use radex::{get_function, Oracle64};

/// Five probe points per built-in function: kinks, oscillation centres and a
/// smooth point.
pub fn probe_points(name: &str) -> [f64; 5] {
    match name {
        "f1" | "f2" => [-1.0, 0.0, 1.0, 1.5, 3.0],
        "f3" => [-2.0, -1.0, -1.0 / 3.0, 0.0, 1.0],
        "f8" | "f9" => [-1.0, 0.0, 0.5, 1.0, 2.0],
        _ => [0.0, 0.3, -0.5, 1.0, 2.0],
    }
}

pub fn all_functions() -> Vec<(&'static str, Oracle64)> {
    BUILTIN_FUNCTIONS.iter().map(|n| (*n, get_function::<f64>(n).unwrap())).collect()
}

/// Hand-written branch formulas, kept apart from the registry on purpose.
pub fn by_hand(name: &str, x: f64) -> f64 {
    match name {
        "f1" => if x < 1.0 { 3.0 - x } else { x },
        "f2" => if x <= 1.0 { 3.0 - x } else { x },
        "f3" => {
            if x <= -1.0 {
                -4.0 * x - 4.0
            } else if x <= 0.0 {
                4.0 * x + 4.0
            } else if x <= 1.0 {
                4.0 - x
            } else {
                x + 2.0
            }
        }
        "f4" => if x == 0.0 { 0.0 } else { x * (1.0 / x).sin() },
        "f5" => if x == 0.0 { 0.0 } else { x * x.abs().ln().sin() },
        "f6" => if x == 0.0 { 0.0 } else { x * x * (1.0 / x).sin() },
        "f7" => if x == 0.0 { 0.0 } else { x * x * (1.0 / x).sin().powi(2) },
        "f8" => if x <= 0.0 { x * x } else { 1.0 - x },
        "f9" => if x <= 0.0 { x * x } else { x + 1.0 },
        _ => unreachable!("{name}"),
    }
}

pub mod properties {
    //! Property sweeps over every built-in function and its probe points. Each
    //! returns the list of violations so callers can report or assert.

    use super::{all_functions, probe_points};
    use radex::exact1d::exact_radial_epiderivative;
    use radex::genderiv::{estimate, radial_epiderivative, DerivativeKind};
    use radex::registry::exact_form;
    use radex::sampling::halton;
    use radex::{get_function, Direction, ExtendedReal, Point, Schedule64};
    use rayon::prelude::*;

    pub fn homogeneity(s: &Schedule64) -> Vec<String> {
        let mut bad = Vec::new();
        for (name, f) in all_functions() {
            for x in probe_points(name) {
                let xbar = Point::scalar(x);
                for h in [-1.0, 1.0] {
                    let base = radial_epiderivative(&f, &xbar, &Direction::scalar(h), s).unwrap();
                    for lambda in [0.5, 2.0, 10.0] {
                        let scaled = radial_epiderivative(&f, &xbar, &Direction::scalar(lambda * h), s).unwrap();
                        let ok = match (base.converged_value(), scaled.converged_value()) {
                            (Some(a), Some(b)) => (b - lambda * a).abs() <= lambda * s.tol,
                            _ => base.value.is_finite() || scaled.value == base.value,
                        };
                        if !ok {
                            bad.push(format!("{name} at {x}, h={h}, λ={lambda}: {} vs {}", base.value, scaled.value));
                        }
                    }
                }
            }
        }
        bad
    }

    /// `f^r ≤ df + tol ≤ f′ + 2tol ≤ f° + 3tol` where all four converged.
    pub fn ordering(s: &Schedule64) -> (Vec<String>, usize) {
        let mut bad = Vec::new();
        let mut cells = 0;
        for (name, f) in all_functions() {
            for x in probe_points(name) {
                for h in [-1.0, 1.0] {
                    let vals: Option<Vec<f64>> = DerivativeKind::ALL
                        .iter()
                        .map(|k| estimate(*k, &f, &Point::scalar(x), &Direction::scalar(h), s).unwrap().converged_value())
                        .collect();
                    let Some(v) = vals else { continue };
                    cells += 1;
                    let t = s.tol * (1.0 + v.iter().fold(0.0f64, |m, a| m.max(a.abs())));
                    if !(v[0] <= v[1] + t && v[1] + t <= v[2] + 2.0 * t && v[2] + 2.0 * t <= v[3] + 3.0 * t) {
                        bad.push(format!("{name} at {x}, h={h}: {v:?}"));
                    }
                }
            }
        }
        (bad, cells)
    }

    /// `f^r(x̄; x − x̄) ≤ f(x) − f(x̄) + tol·(1 + |x − x̄|)` on 200 points.
    pub fn global_support(s: &Schedule64) -> Vec<String> {
        let mut bad = Vec::new();
        for (name, f) in all_functions() {
            for x in probe_points(name) {
                let fbar = f.eval_finite(&[x]).unwrap();
                // half near x̄, half spread log-uniformly over the box
                let ys: Vec<f64> = (1..=200u64)
                    .map(|k| {
                        let u = 2.0 * halton(k, 3) - 1.0;
                        if k % 2 == 0 { x + 10.0 * u } else { u.signum() * 10f64.powf(6.0 * u.abs()) }
                    })
                    .filter(|y| *y != x)
                    .collect();
                let found: Vec<String> = ys
                    .par_iter()
                    .filter_map(|y| {
                        let d = y - x;
                        let fr = radial_epiderivative(&f, &Point::scalar(x), &Direction::scalar(d), s).unwrap().value;
                        let rhs = f.eval_finite(&[*y]).unwrap() - fbar;
                        let ok = match fr {
                            ExtendedReal::Finite(v) => v <= rhs + s.tol * (1.0 + d.abs()),
                            other => other == ExtendedReal::MinusInfinity,
                        };
                        (!ok).then(|| format!("{name} at {x}, y={y}: {fr} > {rhs}"))
                    })
                    .collect();
                bad.extend(found);
            }
        }
        bad
    }

    /// Exact breakpoint values against the sampling estimator on the
    /// piecewise functions, within `tol`.
    pub fn exact_vs_sampled(s: &Schedule64, tol: f64) -> Vec<String> {
        let mut bad = Vec::new();
        for name in ["f1", "f3", "f8", "f9"] {
            let f = get_function::<f64>(name).unwrap();
            let pw = exact_form::<f64>(name).unwrap();
            for x in probe_points(name) {
                for h in [-1.0, 1.0, 2.5] {
                    let exact = exact_radial_epiderivative(&pw, &x, &h).unwrap();
                    let est = radial_epiderivative(&f, &Point::scalar(x), &Direction::scalar(h), s).unwrap().value;
                    let ok = match (exact.finite(), est.finite()) {
                        (Some(a), Some(b)) => (a - b).abs() <= tol,
                        _ => exact == est,
                    };
                    if !ok {
                        bad.push(format!("{name} at {x}, h={h}: exact {exact}, sampled {est}"));
                    }
                }
            }
        }
        bad
    }
}
