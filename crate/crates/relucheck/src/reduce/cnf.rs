//! 3-CNF formulas in DIMACS form, with a truth-table satisfiability
//! oracle for cross-checking the hardness gadgets at desk scale.

use std::fmt::Write as _;

use crate::Error;

/// A literal over a 0-based variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lit {
    pub var: usize,
    pub negated: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit { var, negated: false }
    }

    pub fn neg(var: usize) -> Lit {
        Lit { var, negated: true }
    }
}

/// Exactly three literals; repetition is allowed and expresses shorter
/// clauses without changing satisfiability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clause(pub [Lit; 3]);

impl Clause {
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.0
            .iter()
            .any(|l| assignment[l.var] != l.negated)
    }

    /// Distinct literals, in first-occurrence order.
    pub fn distinct_lits(&self) -> Vec<Lit> {
        let mut out: Vec<Lit> = Vec::with_capacity(3);
        for l in self.0 {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Cnf3, Error> {
        if num_vars == 0 {
            return Err(Error::Dimacs("a formula needs at least one variable".into()));
        }
        if clauses.is_empty() {
            return Err(Error::Dimacs("empty formula".into()));
        }
        for c in &clauses {
            for l in c.0 {
                if l.var >= num_vars {
                    return Err(Error::Dimacs(format!(
                        "literal references variable {} but only {} are declared",
                        l.var + 1,
                        num_vars
                    )));
                }
            }
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    /// Exhaustive truth-table satisfiability; desk-scale oracle only.
    pub fn satisfiable(&self) -> bool {
        assert!(
            self.num_vars <= 24,
            "truth-table oracle is limited to 24 variables"
        );
        (0u64..(1u64 << self.num_vars)).any(|mask| {
            let assignment: Vec<bool> =
                (0..self.num_vars).map(|i| mask >> i & 1 == 1).collect();
            self.clauses.iter().all(|c| c.satisfied_by(&assignment))
        })
    }
}

/// Parses DIMACS CNF. Every clause must have exactly three literals.
pub fn parse_dimacs(text: &str) -> Result<Cnf3, Error> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses: Option<usize> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let mut parts = rest.split_whitespace();
            if parts.next() != Some("cnf") {
                return Err(Error::Dimacs("expected 'p cnf <vars> <clauses>'".into()));
            }
            num_vars = Some(
                parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Dimacs("bad variable count".into()))?,
            );
            declared_clauses = Some(
                parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Dimacs("bad clause count".into()))?,
            );
            continue;
        }
        let nv =
            num_vars.ok_or_else(|| Error::Dimacs("clause before the problem line".into()))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::Dimacs(format!("bad literal '{}'", tok)))?;
            if v == 0 {
                if pending.len() != 3 {
                    return Err(Error::ClauseArity(clauses.len() + 1, pending.len()));
                }
                clauses.push(Clause([pending[0], pending[1], pending[2]]));
                pending.clear();
            } else {
                let var = v.unsigned_abs() as usize;
                if var > nv {
                    return Err(Error::Dimacs(format!(
                        "literal {} exceeds declared variable count {}",
                        v, nv
                    )));
                }
                pending.push(Lit {
                    var: var - 1,
                    negated: v < 0,
                });
            }
        }
    }
    if !pending.is_empty() {
        return Err(Error::Dimacs("clause not terminated by 0".into()));
    }
    let nv = num_vars.ok_or_else(|| Error::Dimacs("missing problem line".into()))?;
    if let Some(dc) = declared_clauses {
        if dc != clauses.len() {
            return Err(Error::Dimacs(format!(
                "declared {} clauses but found {}",
                dc,
                clauses.len()
            )));
        }
    }
    Cnf3::new(nv, clauses)
}

pub fn to_dimacs(cnf: &Cnf3) -> String {
    let mut s = String::new();
    writeln!(s, "p cnf {} {}", cnf.num_vars, cnf.clauses.len()).unwrap();
    for c in &cnf.clauses {
        for l in c.0 {
            let v = (l.var + 1) as i64;
            write!(s, "{} ", if l.negated { -v } else { v }).unwrap();
        }
        writeln!(s, "0").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let text = "c tiny\np cnf 3 2\n1 -2 3 0\n-1 -1 -1 0\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses.len(), 2);
        let back = parse_dimacs(&to_dimacs(&cnf)).unwrap();
        assert_eq!(back, cnf);
    }

    #[test]
    fn arity_enforced() {
        let text = "p cnf 2 1\n1 2 0\n";
        assert!(matches!(
            parse_dimacs(text),
            Err(Error::ClauseArity(1, 2))
        ));
    }

    #[test]
    fn truth_table_oracle() {
        // a and not-a: unsatisfiable.
        let cnf = Cnf3::new(
            1,
            vec![
                Clause([Lit::pos(0); 3]),
                Clause([Lit::neg(0); 3]),
            ],
        )
        .unwrap();
        assert!(!cnf.satisfiable());
        let sat = Cnf3::new(2, vec![Clause([Lit::pos(0), Lit::neg(1), Lit::pos(1)])]).unwrap();
        assert!(sat.satisfiable());
    }
}
