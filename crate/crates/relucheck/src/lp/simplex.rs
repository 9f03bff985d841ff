//! Dense two-phase simplex over exact scalars with Bland's rule.
//!
//! Variables are free reals; each is split into a nonnegative pair
//! internally. Phase 1 runs with one artificial per row, phase 2 with the
//! caller's objective. Bland's rule (lowest eligible index enters, lowest
//! basic index breaks ratio ties) guarantees termination on degenerate
//! inputs. The solver is generic so it can run first over `Q128` and fall
//! back to arbitrary precision only when a machine-word overflow occurs.

use std::cmp::Ordering;

use crate::lp::smallq::Q128;
use crate::rat::Rational;

/// Scalar interface for the solver. Operations return `None` on overflow.
pub(crate) trait LpNum: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn neg2(&self) -> Option<Self>;
    fn sub2(&self, o: &Self) -> Option<Self>;
    fn mul2(&self, o: &Self) -> Option<Self>;
    fn div2(&self, o: &Self) -> Option<Self>;
    fn cmp2(&self, o: &Self) -> Option<Ordering>;
    fn from_rational(r: &Rational) -> Option<Self>;
    fn into_rational(self) -> Rational;
}

impl LpNum for Q128 {
    fn zero() -> Self {
        Q128::ZERO
    }
    fn one() -> Self {
        Q128::ONE
    }
    fn is_zero(&self) -> bool {
        Q128::is_zero(*self)
    }
    fn is_pos(&self) -> bool {
        Q128::is_pos(*self)
    }
    fn is_neg(&self) -> bool {
        Q128::is_neg(*self)
    }
    fn neg2(&self) -> Option<Self> {
        Q128::neg(*self)
    }
    fn sub2(&self, o: &Self) -> Option<Self> {
        Q128::sub(*self, *o)
    }
    fn mul2(&self, o: &Self) -> Option<Self> {
        Q128::mul(*self, *o)
    }
    fn div2(&self, o: &Self) -> Option<Self> {
        Q128::div(*self, *o)
    }
    fn cmp2(&self, o: &Self) -> Option<Ordering> {
        Q128::cmp2(*self, *o)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        Q128::from_rational(r)
    }
    fn into_rational(self) -> Rational {
        Q128::to_rational(self)
    }
}

impl LpNum for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Rational::is_positive(self)
    }
    fn is_neg(&self) -> bool {
        Rational::is_negative(self)
    }
    fn neg2(&self) -> Option<Self> {
        Some(-self)
    }
    fn sub2(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul2(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div2(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn cmp2(&self, o: &Self) -> Option<Ordering> {
        self.partial_cmp(o)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn into_rational(self) -> Rational {
        self
    }
}

/// One constraint `coeffs . x (<= | =) rhs` over free variables.
#[derive(Clone, Debug)]
pub(crate) struct LpRow {
    pub coeffs: Vec<Rational>,
    pub eq: bool,
    pub rhs: Rational,
}

/// Maximization problem over `n_vars` free variables.
#[derive(Clone, Debug)]
pub(crate) struct LpProblem {
    pub n_vars: usize,
    pub rows: Vec<LpRow>,
    pub objective: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpResult {
    Infeasible,
    Unbounded,
    Optimal {
        objective: Rational,
        point: Vec<Rational>,
    },
}

struct Overflow;

struct Tableau<N> {
    t: Vec<Vec<N>>,
    b: Vec<N>,
    basis: Vec<usize>,
    active: Vec<bool>,
    n_struct: usize,
    n_cols: usize,
}

impl<N: LpNum> Tableau<N> {
    fn pivot(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.div2(&p).ok_or(Overflow)?;
        }
        self.b[r] = self.b[r].div2(&p).ok_or(Overflow)?;
        for i in 0..self.t.len() {
            if i == r || !self.active[i] {
                continue;
            }
            let f = self.t[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.n_cols {
                let adj = f.mul2(&self.t[r][j]).ok_or(Overflow)?;
                self.t[i][j] = self.t[i][j].sub2(&adj).ok_or(Overflow)?;
            }
            let adj = f.mul2(&self.b[r]).ok_or(Overflow)?;
            self.b[i] = self.b[i].sub2(&adj).ok_or(Overflow)?;
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Reduced cost of column `j` under cost vector `cost`.
    fn reduced_cost(&self, cost: &[N], j: usize) -> Result<N, Overflow> {
        let mut d = cost[j].clone();
        for (i, row) in self.t.iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            let cb = &cost[self.basis[i]];
            if cb.is_zero() || row[j].is_zero() {
                continue;
            }
            let adj = cb.mul2(&row[j]).ok_or(Overflow)?;
            d = d.sub2(&adj).ok_or(Overflow)?;
        }
        Ok(d)
    }

    /// Runs max-simplex with Bland's rule over columns `0..col_limit`.
    /// Returns false when the objective is unbounded.
    fn run(&mut self, cost: &[N], col_limit: usize) -> Result<bool, Overflow> {
        loop {
            let mut entering = None;
            for j in 0..col_limit {
                if self.basis.contains(&j) {
                    continue;
                }
                if self.reduced_cost(cost, j)?.is_pos() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, N)> = None;
            for i in 0..self.t.len() {
                if !self.active[i] || !self.t[i][c].is_pos() {
                    continue;
                }
                let ratio = self.b[i].div2(&self.t[i][c]).ok_or(Overflow)?;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => match ratio.cmp2(&br).ok_or(Overflow)? {
                        Ordering::Less => Some((i, ratio)),
                        Ordering::Equal if self.basis[i] < self.basis[bi] => Some((i, ratio)),
                        _ => Some((bi, br)),
                    },
                };
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c)?;
        }
    }

    fn col_value(&self, j: usize) -> N {
        for (i, &bj) in self.basis.iter().enumerate() {
            if self.active[i] && bj == j {
                return self.b[i].clone();
            }
        }
        N::zero()
    }
}

fn solve_typed<N: LpNum>(p: &LpProblem) -> Result<LpResult, Overflow> {
    let n = p.n_vars;
    let n_slack = p.rows.iter().filter(|r| !r.eq).count();
    let n_struct = 2 * n + n_slack;
    let n_rows = p.rows.len();
    let n_cols = n_struct + n_rows;

    let mut t: Vec<Vec<N>> = Vec::with_capacity(n_rows);
    let mut b: Vec<N> = Vec::with_capacity(n_rows);
    let mut slack_at = 0usize;
    for (i, row) in p.rows.iter().enumerate() {
        debug_assert_eq!(row.coeffs.len(), n);
        let mut tr = vec![N::zero(); n_cols];
        for (j, cj) in row.coeffs.iter().enumerate() {
            let v = N::from_rational(cj).ok_or(Overflow)?;
            tr[2 * j + 1] = v.neg2().ok_or(Overflow)?;
            tr[2 * j] = v;
        }
        if !row.eq {
            tr[2 * n + slack_at] = N::one();
            slack_at += 1;
        }
        let mut rhs = N::from_rational(&row.rhs).ok_or(Overflow)?;
        if rhs.is_neg() {
            for v in tr.iter_mut() {
                *v = v.neg2().ok_or(Overflow)?;
            }
            rhs = rhs.neg2().ok_or(Overflow)?;
        }
        tr[n_struct + i] = N::one();
        t.push(tr);
        b.push(rhs);
    }

    let mut tab = Tableau {
        t,
        b,
        basis: (0..n_rows).map(|i| n_struct + i).collect(),
        active: vec![true; n_rows],
        n_struct,
        n_cols,
    };

    // Phase 1: maximize minus the artificial sum.
    let mut phase1 = vec![N::zero(); n_cols];
    for c in phase1.iter_mut().skip(n_struct) {
        *c = N::one().neg2().ok_or(Overflow)?;
    }
    let bounded = tab.run(&phase1, n_cols)?;
    debug_assert!(bounded, "phase 1 objective is bounded by zero");
    for i in 0..n_rows {
        if tab.basis[i] >= tab.n_struct && !tab.b[i].is_zero() {
            return Ok(LpResult::Infeasible);
        }
    }
    // Drive surviving artificials out of the basis; rows that cannot be
    // pivoted are redundant.
    for i in 0..n_rows {
        if tab.basis[i] < tab.n_struct {
            continue;
        }
        let mut pivoted = false;
        for j in 0..tab.n_struct {
            if !tab.t[i][j].is_zero() {
                tab.pivot(i, j)?;
                pivoted = true;
                break;
            }
        }
        if !pivoted {
            tab.active[i] = false;
        }
    }

    // Phase 2 with the real objective; artificial columns may not enter.
    let mut phase2 = vec![N::zero(); n_cols];
    for (j, oj) in p.objective.iter().enumerate() {
        let v = N::from_rational(oj).ok_or(Overflow)?;
        phase2[2 * j + 1] = v.neg2().ok_or(Overflow)?;
        phase2[2 * j] = v;
    }
    if !tab.run(&phase2, tab.n_struct)? {
        return Ok(LpResult::Unbounded);
    }

    let mut point = Vec::with_capacity(n);
    for j in 0..n {
        let pos = tab.col_value(2 * j);
        let neg = tab.col_value(2 * j + 1);
        point.push(pos.sub2(&neg).ok_or(Overflow)?.into_rational());
    }
    let mut objective = Rational::zero();
    for (oj, xj) in p.objective.iter().zip(point.iter()) {
        objective += &(oj * xj);
    }
    Ok(LpResult::Optimal { objective, point })
}

/// Solves the problem exactly, preferring machine-word fractions.
pub(crate) fn solve(p: &LpProblem) -> LpResult {
    if let Ok(res) = solve_typed::<Q128>(p) {
        return res;
    }
    match solve_typed::<Rational>(p) {
        Ok(res) => res,
        Err(_) => unreachable!("big-rational arithmetic does not overflow"),
    }
}
