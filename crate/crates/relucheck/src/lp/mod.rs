//! Exact feasibility and optimization for mixed strict/non-strict linear
//! systems.
//!
//! Strict rows are handled through a single shared slack `t`: each
//! `c.x < d` is relaxed to `c.x + t <= d`, `t` is capped at 1, and `t` is
//! maximized. The original system is feasible exactly when the optimum is
//! positive, in which case the optimal point satisfies every strict row
//! strictly and is returned as the witness.

mod fm;
mod simplex;
mod smallq;

pub use fm::fm_feasible;

use crate::linspec::{LinSpec, Rel};
use crate::rat::{RatVector, Rational};
pub(crate) use simplex::{LpProblem, LpResult, LpRow};

/// Outcome of an exact feasibility query.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Infeasible,
    Feasible(RatVector),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&RatVector> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible => None,
        }
    }
}

fn slack_problem(spec: &LinSpec) -> LpProblem {
    let n = spec.dim;
    let mut rows = Vec::with_capacity(spec.rows.len() + 1);
    for row in &spec.rows {
        let mut coeffs: Vec<Rational> = row.coeffs.iter().cloned().collect();
        match row.rel {
            Rel::Le => coeffs.push(Rational::zero()),
            Rel::Lt => coeffs.push(Rational::one()),
            Rel::Eq => coeffs.push(Rational::zero()),
        }
        rows.push(LpRow {
            coeffs,
            eq: row.rel == Rel::Eq,
            rhs: row.rhs.clone(),
        });
    }
    // t <= 1 caps the objective.
    let mut cap = vec![Rational::zero(); n + 1];
    cap[n] = Rational::one();
    rows.push(LpRow {
        coeffs: cap,
        eq: false,
        rhs: Rational::one(),
    });
    let mut objective = vec![Rational::zero(); n + 1];
    objective[n] = Rational::one();
    LpProblem {
        n_vars: n + 1,
        rows,
        objective,
    }
}

/// Decides the mixed strict/non-strict system exactly. A `Feasible` result
/// carries an exact point satisfying every row, strict ones strictly.
pub fn feasible(spec: &LinSpec) -> Feasibility {
    match simplex::solve(&slack_problem(spec)) {
        LpResult::Infeasible => Feasibility::Infeasible,
        LpResult::Unbounded => unreachable!("slack objective is capped at 1"),
        LpResult::Optimal { objective, point } => {
            if objective.is_positive() {
                Feasibility::Feasible(RatVector::new(point[..spec.dim].to_vec()))
            } else {
                Feasibility::Infeasible
            }
        }
    }
}

/// Optimum of the auxiliary slack LP; `None` when even the non-strict
/// relaxation is infeasible. The spec is feasible exactly when the returned
/// value is positive.
pub fn max_slack(spec: &LinSpec) -> Option<Rational> {
    match simplex::solve(&slack_problem(spec)) {
        LpResult::Infeasible => None,
        LpResult::Unbounded => unreachable!("slack objective is capped at 1"),
        LpResult::Optimal { objective, .. } => Some(objective),
    }
}

/// Extremum of a linear objective over the non-strict rows of a spec.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Extremum {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, point: RatVector },
}

/// Maximizes (or minimizes) `objective . x` over the spec. Strict rows are
/// not supported here; region rows are closed by construction.
pub(crate) fn optimize(spec: &LinSpec, objective: &[Rational], maximize: bool) -> Extremum {
    debug_assert!(spec.rows.iter().all(|r| r.rel != Rel::Lt));
    debug_assert_eq!(objective.len(), spec.dim);
    let obj: Vec<Rational> = if maximize {
        objective.to_vec()
    } else {
        objective.iter().map(|c| -c).collect()
    };
    let problem = LpProblem {
        n_vars: spec.dim,
        rows: spec
            .rows
            .iter()
            .map(|r| LpRow {
                coeffs: r.coeffs.iter().cloned().collect(),
                eq: r.rel == Rel::Eq,
                rhs: r.rhs.clone(),
            })
            .collect(),
        objective: obj,
    };
    match simplex::solve(&problem) {
        LpResult::Infeasible => Extremum::Infeasible,
        LpResult::Unbounded => Extremum::Unbounded,
        LpResult::Optimal { objective, point } => Extremum::Optimal {
            value: if maximize { objective } else { -objective },
            point: RatVector::new(point),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linspec::{satisfied_by, LinRow};
    use crate::rat::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn boundary_point_with_strict_row() {
        // x <= 1, x >= 1, x < 2 -> feasible exactly at x = 1
        let spec = LinSpec::new(
            1,
            vec![
                LinRow::le(vec![q("1")], q("1")),
                LinRow::le(vec![q("-1")], q("-1")),
                LinRow::lt(vec![q("1")], q("2")),
            ],
        )
        .unwrap();
        match feasible(&spec) {
            Feasibility::Feasible(w) => {
                assert_eq!(w[0], q("1"));
                assert!(satisfied_by(&spec, &w).unwrap());
            }
            Feasibility::Infeasible => panic!("expected feasible"),
        }
    }

    #[test]
    fn open_empty_interval() {
        let spec = LinSpec::new(
            1,
            vec![
                LinRow::lt(vec![q("1")], q("0")),
                LinRow::lt(vec![q("-1")], q("0")),
            ],
        )
        .unwrap();
        assert_eq!(feasible(&spec), Feasibility::Infeasible);
        let t = max_slack(&spec).unwrap();
        assert!(!t.is_positive());
    }

    #[test]
    fn open_interval_has_positive_slack() {
        // 0 < x < 1
        let spec = LinSpec::new(
            1,
            vec![
                LinRow::lt(vec![q("1")], q("1")),
                LinRow::lt(vec![q("-1")], q("0")),
            ],
        )
        .unwrap();
        let t = max_slack(&spec).unwrap();
        assert!(t.is_positive());
        assert!(feasible(&spec).is_feasible());
    }

    #[test]
    fn empty_spec_is_feasible_at_origin() {
        let spec = LinSpec::trivial(2);
        match feasible(&spec) {
            Feasibility::Feasible(w) => {
                assert_eq!(w.dim(), 2);
                assert!(w.iter().all(|c| c.is_zero()));
            }
            Feasibility::Infeasible => panic!("trivial spec must be feasible"),
        }
    }

    #[test]
    fn relaxation_infeasible_is_none() {
        let spec = LinSpec::new(
            1,
            vec![
                LinRow::le(vec![q("1")], q("0")),
                LinRow::le(vec![q("-1")], q("-1")),
            ],
        )
        .unwrap();
        assert_eq!(max_slack(&spec), None);
        assert_eq!(feasible(&spec), Feasibility::Infeasible);
    }

    #[test]
    fn optimize_over_box() {
        let spec = LinSpec::new(
            1,
            vec![
                LinRow::le(vec![q("1")], q("3")),
                LinRow::le(vec![q("-1")], q("2")),
            ],
        )
        .unwrap();
        match optimize(&spec, &[q("2")], true) {
            Extremum::Optimal { value, point } => {
                assert_eq!(value, q("6"));
                assert_eq!(point[0], q("3"));
            }
            other => panic!("expected optimum, got {:?}", other),
        }
        match optimize(&spec, &[q("2")], false) {
            Extremum::Optimal { value, .. } => assert_eq!(value, q("-4")),
            other => panic!("expected optimum, got {:?}", other),
        }
        let free = LinSpec::trivial(1);
        assert_eq!(optimize(&free, &[q("1")], true), Extremum::Unbounded);
    }
}
