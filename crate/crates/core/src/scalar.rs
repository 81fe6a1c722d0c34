//! Real-to-real coefficient functions used as `A(t)` and `B(t)` in rule families.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type BoxedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuous function of the ratio `t = Y / Z`.
///
/// Everything except [`ScalarFn::Custom`] is a polynomial and round-trips
/// through the rule grammar. Custom functions are library-only.
#[derive(Clone)]
pub enum ScalarFn {
    Constant(f64),
    Identity,
    /// `t -> c * t`
    Scale(f64),
    /// `t -> slope * t + intercept`
    Affine { slope: f64, intercept: f64 },
    /// Coefficients in ascending powers: `c[0] + c[1] t + c[2] t^2 + ...`
    Polynomial(Vec<f64>),
    Custom { name: String, f: BoxedFn },
}

impl ScalarFn {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant(c) => *c,
            ScalarFn::Identity => t,
            ScalarFn::Scale(c) => c * t,
            ScalarFn::Affine { slope, intercept } => slope * t + intercept,
            ScalarFn::Polynomial(coeffs) => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            ScalarFn::Custom { f, .. } => f(t),
        }
    }

    /// Ascending coefficients, or `None` for custom functions.
    pub fn coefficients(&self) -> Option<Vec<f64>> {
        Some(match self {
            ScalarFn::Constant(c) => vec![*c],
            ScalarFn::Identity => vec![0.0, 1.0],
            ScalarFn::Scale(c) => vec![0.0, *c],
            ScalarFn::Affine { slope, intercept } => vec![*intercept, *slope],
            ScalarFn::Polynomial(c) => c.clone(),
            ScalarFn::Custom { .. } => return None,
        })
    }

    /// The simplest catalog member for a coefficient list.
    pub fn from_coefficients(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        match coeffs.as_slice() {
            [] => ScalarFn::Constant(0.0),
            [c] => ScalarFn::Constant(*c),
            [b, a] if *b == 0.0 && *a == 1.0 => ScalarFn::Identity,
            [b, a] if *b == 0.0 => ScalarFn::Scale(*a),
            [b, a] => ScalarFn::Affine {
                slope: *a,
                intercept: *b,
            },
            _ => ScalarFn::Polynomial(coeffs),
        }
    }

    /// `t -> self(1 - t)`.
    pub fn reflect(&self) -> ScalarFn {
        match self.coefficients() {
            Some(c) => ScalarFn::from_coefficients(reflect_coefficients(&c)),
            None => {
                let inner = self.clone();
                ScalarFn::custom(format!("{}(1-t)", self.name()), move |t| inner.eval(1.0 - t))
            }
        }
    }

    /// `t -> c - self(t) - other(t)`, used for the dual `B` coefficient.
    pub fn complement(c: f64, first: &ScalarFn, second: &ScalarFn) -> ScalarFn {
        match (first.coefficients(), second.coefficients()) {
            (Some(p), Some(q)) => {
                let len = p.len().max(q.len()).max(1);
                let mut out = vec![0.0; len];
                out[0] = c;
                for (i, v) in p.iter().enumerate() {
                    out[i] -= v;
                }
                for (i, v) in q.iter().enumerate() {
                    out[i] -= v;
                }
                ScalarFn::from_coefficients(out)
            }
            _ => {
                let (f, g) = (first.clone(), second.clone());
                ScalarFn::custom(
                    format!("{c}-{}-{}", first.name(), second.name()),
                    move |t| c - f.eval(t) - g.eval(t),
                )
            }
        }
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, ScalarFn::Custom { .. })
    }

    fn name(&self) -> String {
        match self {
            ScalarFn::Custom { name, .. } => name.clone(),
            other => other.to_string(),
        }
    }

    /// Grammar form (`const:<r> | id | scale:<r> | affine:<r>,<r> | poly:<r>,...`).
    pub fn to_grammar(&self) -> Result<String> {
        match self {
            ScalarFn::Custom { name, .. } => Err(Error::NonRepresentable(name.clone())),
            other => Ok(other.to_string()),
        }
    }
}

/// Coefficients of `p(1 - t)` given those of `p(t)`.
fn reflect_coefficients(c: &[f64]) -> Vec<f64> {
    // (1 - t)^k = sum_j C(k, j) (-1)^j t^j
    let mut out = vec![0.0; c.len().max(1)];
    let mut binom: Vec<f64> = vec![1.0];
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            let mut next = vec![1.0; k + 1];
            for j in 1..k {
                next[j] = binom[j - 1] + binom[j];
            }
            binom = next;
        }
        for (j, b) in binom.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out[j] += ck * b * sign;
        }
    }
    out
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Constant(c) => write!(f, "const:{c}"),
            ScalarFn::Identity => f.write_str("id"),
            ScalarFn::Scale(c) => write!(f, "scale:{c}"),
            ScalarFn::Affine { slope, intercept } => write!(f, "affine:{slope},{intercept}"),
            ScalarFn::Polynomial(c) => {
                f.write_str("poly:")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            ScalarFn::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialEq for ScalarFn {
    fn eq(&self, other: &Self) -> bool {
        use ScalarFn::*;
        match (self, other) {
            (Constant(a), Constant(b)) | (Scale(a), Scale(b)) => a == b,
            (Identity, Identity) => true,
            (
                Affine {
                    slope: a,
                    intercept: b,
                },
                Affine {
                    slope: c,
                    intercept: d,
                },
            ) => a == c && b == d,
            (Polynomial(a), Polynomial(b)) => a == b,
            (Custom { f: a, .. }, Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}
