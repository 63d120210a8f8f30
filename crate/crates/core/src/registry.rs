//! The nine example functions, plus user-registered expressions.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::exact1d::{Owner, PiecewiseFn1D};
use crate::expr::parse;
use crate::func::FunctionOracle;
use crate::scalar::{Field, Scalar};

fn pw<F: Field>(coeffs: &[[i64; 3]], breaks: &[(i64, Owner)]) -> PiecewiseFn1D<F> {
    PiecewiseFn1D::from_breakpoints(
        coeffs.iter().map(|c| c.map(F::integer)).collect(),
        breaks.iter().map(|(v, o)| (F::integer(*v), *o)).collect(),
    )
    .expect("built-in pieces partition the line")
}

/// Exact piecewise forms of the piecewise example functions, over any field.
///
/// `f1`: `−x+3` on `x < 1`, `x` on `x ≥ 1`; `f2` moves the breakpoint to the
/// left piece; `f3`: `4|x+1|` on `x ≤ 0`, `|x−1|+3` on `x > 0`;
/// `f8`: `x²` on `x ≤ 0`, `−x+1` after; `f9`: `x²` on `x ≤ 0`, `x+1` after.
pub fn exact_form<F: Field>(name: &str) -> Option<PiecewiseFn1D<F>> {
    use Owner::{Left, Right};
    Some(match name {
        "f1" => pw(&[[0, -1, 3], [0, 1, 0]], &[(1, Right)]),
        "f2" => pw(&[[0, -1, 3], [0, 1, 0]], &[(1, Left)]),
        "f3" => pw(&[[0, -4, -4], [0, 4, 4], [0, -1, 4], [0, 1, 2]], &[(-1, Left), (0, Left), (1, Left)]),
        "f8" => pw(&[[1, 0, 0], [0, -1, 1]], &[(0, Left)]),
        "f9" => pw(&[[1, 0, 0], [0, 1, 1]], &[(0, Left)]),
        _ => return None,
    })
}

/// Expression sources of the transcendental example functions. The
/// removable point `x = 0` is an explicit branch.
pub fn expression_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "f4" => "piecewise(x1 == 0 ? 0 : x1*sin(1/x1))",
        "f5" => "piecewise(x1 == 0 ? 0 : x1*sin(ln(abs(x1))))",
        "f6" => "piecewise(x1 == 0 ? 0 : x1^2*sin(1/x1))",
        "f7" => "piecewise(x1 == 0 ? 0 : x1^2*sin(1/x1)^2)",
        _ => return None,
    })
}

pub const BUILTIN_FUNCTIONS: [&str; 9] = ["f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9"];

/// Name → oracle map. Built once, then read-only.
#[derive(Debug, Clone)]
pub struct FunctionRegistry<S> {
    entries: BTreeMap<String, FunctionOracle<S>>,
}

impl<S: Scalar> Default for FunctionRegistry<S> {
    fn default() -> Self {
        Self::builtin()
    }
}

impl<S: Scalar> FunctionRegistry<S> {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Registry holding `f1` … `f9`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        for name in BUILTIN_FUNCTIONS {
            let oracle = if let Some(form) = exact_form::<Rational64>(name) {
                FunctionOracle::from_piecewise(name, form)
            } else {
                let src = expression_source(name).expect("every example has a form");
                FunctionOracle::from_expr(name, parse(src, 1).expect("built-in sources parse"))
            };
            reg.entries.insert(name.to_string(), oracle);
        }
        reg
    }

    pub fn get(&self, name: &str) -> Result<FunctionOracle<S>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    /// Parses `source` and stores it under `name`, replacing any previous entry.
    pub fn register_expression(&mut self, name: &str, source: &str, dimension: usize) -> Result<FunctionOracle<S>> {
        let oracle = expression_oracle(name, source, dimension)?;
        self.entries.insert(name.to_string(), oracle.clone());
        Ok(oracle)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FunctionOracle<S>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Oracle for a parsed expression, without a registry.
pub fn expression_oracle<S: Scalar>(name: &str, source: &str, dimension: usize) -> Result<FunctionOracle<S>> {
    Ok(FunctionOracle::from_expr(name, parse(source, dimension)?))
}

/// Looks up one of the example functions.
pub fn get_function<S: Scalar>(name: &str) -> Result<FunctionOracle<S>> {
    if !BUILTIN_FUNCTIONS.contains(&name) {
        return Err(Error::UnknownFunction(name.to_string()));
    }
    FunctionRegistry::builtin().get(name)
}
