//! Linear specifications: conjunctions of (possibly strict) linear rows.
//!
//! These are the input/output specification objects of the decision
//! problems and the raw material for every feasibility query. Metric balls
//! under L1/Linf are expressible as specs; for L1 this introduces
//! auxiliary variables that are appended after the real ones so witnesses
//! can be projected back.

use serde::{Deserialize, Serialize};

use crate::rat::{dist, ExtRational, Metric, RatVector, Rational};
use crate::Error;

/// Relation of a linear row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
}

/// One row `coeffs . x REL rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinRow {
    pub coeffs: RatVector,
    pub rel: Rel,
    pub rhs: Rational,
}

impl LinRow {
    pub fn new(coeffs: Vec<Rational>, rel: Rel, rhs: Rational) -> Self {
        LinRow {
            coeffs: RatVector::new(coeffs),
            rel,
            rhs,
        }
    }

    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Rel::Le, rhs)
    }

    pub fn lt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Rel::Lt, rhs)
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Rel::Eq, rhs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// Exact check of the row at a point.
    pub fn holds_at(&self, x: &RatVector) -> Result<bool, Error> {
        if x.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let mut lhs = Rational::zero();
        for (c, v) in self.coeffs.iter().zip(x.iter()) {
            lhs += &(c * v);
        }
        Ok(match self.rel {
            Rel::Le => lhs <= self.rhs,
            Rel::Lt => lhs < self.rhs,
            Rel::Eq => lhs == self.rhs,
        })
    }
}

/// A conjunction of rows over `dim` variables. An empty row list is the
/// trivially true spec (the whole space).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinSpec {
    pub dim: usize,
    pub rows: Vec<LinRow>,
}

impl LinSpec {
    pub fn new(dim: usize, rows: Vec<LinRow>) -> Result<Self, Error> {
        for row in &rows {
            if row.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: row.dim(),
                });
            }
        }
        Ok(LinSpec { dim, rows })
    }

    pub fn trivial(dim: usize) -> Self {
        LinSpec { dim, rows: vec![] }
    }

    pub fn is_trivial(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Exact row-by-row satisfaction check.
pub fn satisfied_by(spec: &LinSpec, x: &RatVector) -> Result<bool, Error> {
    if x.dim() != spec.dim {
        return Err(Error::DimMismatch {
            expected: spec.dim,
            got: x.dim(),
        });
    }
    for row in &spec.rows {
        if !row.holds_at(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `eps`-ball around `center` as a spec, plus the number of auxiliary
/// variables appended after the real ones.
///
/// Linf yields `2n` rows `-eps <= x_i - c_i <= eps` and no auxiliaries.
/// L1 introduces one `u_i` per coordinate with `u_i >= +-(x_i - c_i)` and
/// `sum u_i <= eps`, which holds for some `u` exactly when the point is in
/// the ball. `eps = inf` yields the empty spec.
pub fn ball_spec(
    metric: Metric,
    center: &RatVector,
    eps: &ExtRational,
) -> Result<(LinSpec, usize), Error> {
    let n = center.dim();
    let eps = match eps {
        ExtRational::Infinity => return Ok((LinSpec::trivial(n), 0)),
        ExtRational::Finite(e) => {
            if e.is_negative() {
                return Err(Error::Malformed("negative ball radius".into()));
            }
            e.clone()
        }
    };
    match metric {
        Metric::Linf => {
            let mut rows = Vec::with_capacity(2 * n);
            for i in 0..n {
                let mut plus = vec![Rational::zero(); n];
                plus[i] = Rational::one();
                rows.push(LinRow::le(plus, &center[i] + &eps));
                let mut minus = vec![Rational::zero(); n];
                minus[i] = -Rational::one();
                rows.push(LinRow::le(minus, &eps - &center[i]));
            }
            Ok((LinSpec::new(n, rows)?, 0))
        }
        Metric::L1 => {
            // Variables: x_0..x_{n-1}, u_0..u_{n-1}.
            let dim = 2 * n;
            let mut rows = Vec::with_capacity(2 * n + 1);
            for i in 0..n {
                // x_i - c_i <= u_i
                let mut a = vec![Rational::zero(); dim];
                a[i] = Rational::one();
                a[n + i] = -Rational::one();
                rows.push(LinRow::le(a, center[i].clone()));
                // c_i - x_i <= u_i
                let mut b = vec![Rational::zero(); dim];
                b[i] = -Rational::one();
                b[n + i] = -Rational::one();
                rows.push(LinRow::le(b, -&center[i]));
            }
            let mut s = vec![Rational::zero(); dim];
            for u in s.iter_mut().skip(n) {
                *u = Rational::one();
            }
            rows.push(LinRow::le(s, eps));
            Ok((LinSpec::new(dim, rows)?, n))
        }
    }
}

/// Membership in the metric ball, checked directly against the distance.
pub fn in_ball(
    metric: Metric,
    center: &RatVector,
    eps: &ExtRational,
    x: &RatVector,
) -> Result<bool, Error> {
    let d = dist(metric, x, center)?;
    Ok(eps.at_least(&d))
}

/// Negation of a single row as a disjunction of rows.
///
/// `a.x <= b` negates to the strict `a.x > b` (encoded `-a.x < -b`);
/// `a.x < b` negates to `a.x >= b`; `a.x = b` splits into two strict
/// branches.
pub fn negate_row(row: &LinRow) -> Vec<LinRow> {
    let neg: Vec<Rational> = row.coeffs.iter().map(|c| -c).collect();
    let neg_rhs = -&row.rhs;
    match row.rel {
        Rel::Le => vec![LinRow::lt(neg, neg_rhs)],
        Rel::Lt => vec![LinRow::le(neg, neg_rhs)],
        Rel::Eq => vec![
            LinRow::lt(row.coeffs.as_slice().to_vec(), row.rhs.clone()),
            LinRow::lt(neg, neg_rhs),
        ],
    }
}
