use crate::error::Result;
use crate::extended::ExtendedReal;
use crate::scalar::Field;

use super::piecewise::{Piece, PiecewiseFn1D};

/// Range of `t > 0` for which `x̄ + t·s` lies in a piece, `s = ±1`.
/// `None` as the upper bound means unbounded; a lower bound of zero means
/// the range reaches `t → 0⁺`.
struct TRange<F> {
    lo: F,
    hi: Option<F>,
}

fn t_range<F: Field>(piece: &Piece<F>, xbar: &F, forward: bool) -> Option<TRange<F>> {
    // in the ray parameter, endpoint ownership no longer matters: the closure
    // of the range is what the liminf sees
    let (near, far) = if forward {
        (piece.lo.as_ref().map(|e| e.value.clone() - xbar.clone()), piece.hi.as_ref().map(|e| e.value.clone() - xbar.clone()))
    } else {
        (
            piece.hi.as_ref().map(|e| xbar.clone() - e.value.clone()),
            piece.lo.as_ref().map(|e| xbar.clone() - e.value.clone()),
        )
    };
    let zero = F::zero();
    let lo = match near {
        Some(v) if v > zero => v,
        _ => zero.clone(),
    };
    match far {
        Some(v) if v <= zero => None,
        Some(v) if v < lo => None,
        Some(v) => Some(TRange { lo, hi: Some(v) }),
        None => Some(TRange { lo, hi: None }),
    }
}

/// Exact `inf_{t>0} liminf_{u→h} (f(x̄+tu) − f(x̄))/t` for a piecewise
/// quadratic `f`.
///
/// On each piece the quotient is `α·t + β + γ/t`. Candidates are the
/// closure endpoints of every piece's `t`-range (which realizes the liminf
/// at breakpoints owned by the neighbouring piece), the limits `t → 0⁺` and
/// `t → ∞`, and the interior stationary point `√(γ/α)`.
///
/// The analysis runs on `sign(h)` and is scaled by `|h|`, so homogeneity is
/// exact over rationals.
pub fn exact_radial_epiderivative<F: Field>(pw: &PiecewiseFn1D<F>, xbar: &F, h: &F) -> Result<ExtendedReal<F>> {
    let zero = F::zero();
    if *h == zero {
        return Ok(ExtendedReal::Finite(zero));
    }
    let forward = *h > zero;
    let abs_h = if forward { h.clone() } else { -h.clone() };
    let s = if forward { F::one() } else { -F::one() };
    let fbar = pw.eval(xbar);
    let two = F::integer(2);

    let mut best = ExtendedReal::PlusInfinity;
    for piece in pw.pieces() {
        let Some(range) = t_range(piece, xbar, forward) else {
            continue;
        };
        let alpha = piece.a.clone();
        let beta = (two.clone() * piece.a.clone() * xbar.clone() + piece.b.clone()) * s.clone();
        let gamma = piece.poly(xbar) - fbar.clone();
        let q = |t: &F| alpha.clone() * t.clone() + beta.clone() + gamma.clone() / t.clone();

        let near = if range.lo == zero {
            if gamma < zero {
                ExtendedReal::MinusInfinity
            } else if gamma > zero {
                ExtendedReal::PlusInfinity
            } else {
                ExtendedReal::Finite(beta.clone())
            }
        } else {
            ExtendedReal::Finite(q(&range.lo))
        };
        best = best.min(near);

        let far = match &range.hi {
            Some(t) => ExtendedReal::Finite(q(t)),
            None if alpha > zero => ExtendedReal::PlusInfinity,
            None if alpha < zero => ExtendedReal::MinusInfinity,
            None => ExtendedReal::Finite(beta.clone()),
        };
        best = best.min(far);

        if alpha > zero && gamma > zero {
            let t_star = (gamma.clone() / alpha.clone()).sqrt_nonneg();
            let inside = t_star > range.lo && range.hi.as_ref().is_none_or(|hi| t_star < *hi);
            if inside {
                let v = two.clone() * (alpha.clone() * gamma.clone()).sqrt_nonneg() + beta.clone();
                best = best.min(ExtendedReal::Finite(v));
            }
        }
    }
    Ok(match best {
        ExtendedReal::Finite(v) => ExtendedReal::Finite(v * abs_h),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact1d::piecewise::Owner;
    use num_rational::Rational64 as Q;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn f3() -> PiecewiseFn1D<Q> {
        PiecewiseFn1D::from_breakpoints(
            vec![
                [q(0, 1), q(-4, 1), q(-4, 1)],
                [q(0, 1), q(4, 1), q(4, 1)],
                [q(0, 1), q(-1, 1), q(4, 1)],
                [q(0, 1), q(1, 1), q(2, 1)],
            ],
            vec![(q(-1, 1), Owner::Left), (q(0, 1), Owner::Left), (q(1, 1), Owner::Left)],
        )
        .unwrap()
    }

    #[test]
    fn single_quadratic_is_one_sided_derivative() {
        // x² at 1: quotient 2 + t decreases to 2 as t → 0
        let sq = PiecewiseFn1D::from_breakpoints(vec![[q(1, 1), q(0, 1), q(0, 1)]], vec![]).unwrap();
        assert_eq!(exact_radial_epiderivative(&sq, &q(1, 1), &q(1, 1)).unwrap(), ExtendedReal::Finite(q(2, 1)));
        assert_eq!(exact_radial_epiderivative(&sq, &q(1, 1), &q(-1, 1)).unwrap(), ExtendedReal::Finite(q(-2, 1)));
    }

    #[test]
    fn stationary_point_candidate() {
        // x² for x ≤ 0 and 1 + x² for x > 0, at 0: q(t) = t + 1/t, minimal at t = 1
        let pw = PiecewiseFn1D::from_breakpoints(vec![[q(1, 1), q(0, 1), q(0, 1)], [q(1, 1), q(0, 1), q(1, 1)]], vec![(q(0, 1), Owner::Left)])
            .unwrap();
        assert_eq!(exact_radial_epiderivative(&pw, &q(0, 1), &q(1, 1)).unwrap(), ExtendedReal::Finite(q(2, 1)));
    }

    #[test]
    fn f3_spot_values() {
        let f = f3();
        assert_eq!(exact_radial_epiderivative(&f, &q(-1, 3), &q(1, 1)).unwrap(), ExtendedReal::Finite(q(1, 4)));
        assert_eq!(exact_radial_epiderivative(&f, &q(1, 2), &q(-1, 1)).unwrap(), ExtendedReal::Finite(q(-7, 3)));
        assert_eq!(exact_radial_epiderivative(&f, &q(0, 1), &q(0, 1)).unwrap(), ExtendedReal::Finite(q(0, 1)));
    }

    proptest! {
        #[test]
        fn homogeneity_is_exact(xn in -12i64..12, hn in prop_oneof![-6i64..-1, 1i64..6], ln in 1i64..9, ld in 1i64..9) {
            let f = f3();
            let xbar = q(xn, 4);
            let h = q(hn, 2);
            let lambda = q(ln, ld);
            let base = exact_radial_epiderivative(&f, &xbar, &h).unwrap();
            let scaled = exact_radial_epiderivative(&f, &xbar, &(h * lambda)).unwrap();
            prop_assert_eq!(scaled, match base { ExtendedReal::Finite(v) => ExtendedReal::Finite(v * lambda), o => o });
        }
    }
}
