use crate::error::{Error, Result};
use crate::scalar::Field;

/// Which side of a breakpoint owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Left,
    Right,
}

/// One end of a piece's interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint<F> {
    pub value: F,
    pub closed: bool,
}

/// `a·x² + b·x + c` on an interval. `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<F> {
    pub lo: Option<Endpoint<F>>,
    pub hi: Option<Endpoint<F>>,
    pub a: F,
    pub b: F,
    pub c: F,
}

impl<F: Field> Piece<F> {
    pub fn contains(&self, x: &F) -> bool {
        let above = match &self.lo {
            None => true,
            Some(e) if e.closed => *x >= e.value,
            Some(e) => *x > e.value,
        };
        let below = match &self.hi {
            None => true,
            Some(e) if e.closed => *x <= e.value,
            Some(e) => *x < e.value,
        };
        above && below
    }

    /// The polynomial, ignoring the interval.
    pub fn poly(&self, x: &F) -> F {
        self.a.clone() * x.clone() * x.clone() + self.b.clone() * x.clone() + self.c.clone()
    }
}

/// A piecewise quadratic function on the real line with explicit endpoint
/// ownership. The pieces are sorted and partition ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn1D<F> {
    pieces: Vec<Piece<F>>,
}

impl<F: Field> PiecewiseFn1D<F> {
    /// Validates that `pieces` partition ℝ: sorted, no gaps, no overlaps.
    pub fn new(pieces: Vec<Piece<F>>) -> Result<Self> {
        let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
            return Err(Error::PieceCover("no pieces".into()));
        };
        if first.lo.is_some() {
            return Err(Error::PieceCover("first piece must extend to -inf".into()));
        }
        if last.hi.is_some() {
            return Err(Error::PieceCover("last piece must extend to +inf".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (&p.lo, &p.hi) {
                let ok = lo.value < hi.value || (lo.value == hi.value && lo.closed && hi.closed);
                if !ok {
                    return Err(Error::PieceCover(format!("piece {k} has an empty interval")));
                }
            }
        }
        for (k, w) in pieces.windows(2).enumerate() {
            match (&w[0].hi, &w[1].lo) {
                (Some(hi), Some(lo)) => {
                    if hi.value != lo.value {
                        return Err(Error::PieceCover(format!("gap or overlap between pieces {k} and {}", k + 1)));
                    }
                    if hi.closed == lo.closed {
                        let what = if hi.closed { "claimed twice" } else { "unowned" };
                        return Err(Error::PieceCover(format!("breakpoint between pieces {k} and {} is {what}", k + 1)));
                    }
                }
                _ => return Err(Error::PieceCover(format!("interior infinite bound at piece {k}"))),
            }
        }
        Ok(Self { pieces })
    }

    /// Builds from `n + 1` coefficient triples `(a, b, c)` and `n` sorted
    /// breakpoints, each tagged with the piece that owns it.
    pub fn from_breakpoints(coeffs: Vec<[F; 3]>, breaks: Vec<(F, Owner)>) -> Result<Self> {
        if coeffs.len() != breaks.len() + 1 {
            return Err(Error::PieceCover(format!(
                "{} coefficient triples for {} breakpoints",
                coeffs.len(),
                breaks.len()
            )));
        }
        let mut pieces = Vec::with_capacity(coeffs.len());
        for (k, [a, b, c]) in coeffs.into_iter().enumerate() {
            let lo = (k > 0).then(|| {
                let (v, owner) = &breaks[k - 1];
                Endpoint {
                    value: v.clone(),
                    closed: *owner == Owner::Right,
                }
            });
            let hi = breaks.get(k).map(|(v, owner)| Endpoint {
                value: v.clone(),
                closed: *owner == Owner::Left,
            });
            pieces.push(Piece { lo, hi, a, b, c });
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        &self.pieces
    }

    pub fn piece_at(&self, x: &F) -> &Piece<F> {
        self.pieces
            .iter()
            .find(|p| p.contains(x))
            .expect("validated pieces cover the real line")
    }

    pub fn eval(&self, x: &F) -> F {
        self.piece_at(x).poly(x)
    }

    /// Same function over another field; coefficients are converted through
    /// their rational or floating value.
    pub fn convert<G: Field>(&self) -> PiecewiseFn1D<G> {
        let conv = |v: &F| -> G { to_field(v) };
        PiecewiseFn1D {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: p.lo.as_ref().map(|e| Endpoint {
                        value: conv(&e.value),
                        closed: e.closed,
                    }),
                    hi: p.hi.as_ref().map(|e| Endpoint {
                        value: conv(&e.value),
                        closed: e.closed,
                    }),
                    a: conv(&p.a),
                    b: conv(&p.b),
                    c: conv(&p.c),
                })
                .collect(),
        }
    }
}

fn to_field<F: Field, G: Field>(v: &F) -> G {
    let x = v.to_f64().expect("coefficient representable as f64");
    if x == x.trunc() && x.abs() < 9.0e15 {
        return G::integer(x as i64);
    }
    // short rationals survive exactly; everything else rounds through f64
    for denom in 2..=1024i64 {
        let n = x * denom as f64;
        if n == n.trunc() && n.abs() < 9.0e15 {
            return G::ratio(n as i64, denom);
        }
    }
    let scale = 1i64 << 52;
    G::ratio((x * scale as f64).round() as i64, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn endpoint_ownership_distinguishes_values() {
        let f1 = PiecewiseFn1D::from_breakpoints(vec![[r(0), r(-1), r(3)], [r(0), r(1), r(0)]], vec![(r(1), Owner::Right)])
            .unwrap();
        let f2 = PiecewiseFn1D::from_breakpoints(vec![[r(0), r(-1), r(3)], [r(0), r(1), r(0)]], vec![(r(1), Owner::Left)])
            .unwrap();
        assert_eq!(f1.eval(&r(1)), r(1));
        assert_eq!(f2.eval(&r(1)), r(2));
        assert_eq!(f1.eval(&r(2)), r(2));
    }

    #[test]
    fn cover_errors() {
        let gap = vec![
            Piece { lo: None, hi: Some(Endpoint { value: 0.0, closed: false }), a: 0.0, b: 0.0, c: 0.0 },
            Piece { lo: Some(Endpoint { value: 0.0, closed: false }), hi: None, a: 0.0, b: 0.0, c: 0.0 },
        ];
        assert!(matches!(PiecewiseFn1D::new(gap), Err(Error::PieceCover(_))));
        let bounded = vec![Piece { lo: Some(Endpoint { value: 0.0, closed: true }), hi: None, a: 0.0, b: 0.0, c: 0.0 }];
        assert!(PiecewiseFn1D::new(bounded).is_err());
        assert!(PiecewiseFn1D::<f64>::from_breakpoints(vec![[0.0; 3]], vec![(0.0, Owner::Left)]).is_err());
    }

    #[test]
    fn conversion_keeps_short_rationals() {
        let f = PiecewiseFn1D::from_breakpoints(vec![[0.25, 1.0 / 3.0, -2.0]], vec![]).unwrap();
        let q: PiecewiseFn1D<Rational64> = f.convert();
        assert_eq!(q.pieces()[0].a, Rational64::new(1, 4));
        assert_eq!(q.pieces()[0].b, Rational64::new(1, 3));
    }
}
