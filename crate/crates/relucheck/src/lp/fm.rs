//! Fourier-Motzkin elimination with strictness tracking.
//!
//! This is the deliberately small cross-check oracle for the simplex path:
//! verdict only, guarded to few variables because elimination blows up
//! quadratically per round. Combining a strict row with anything keeps the
//! result strict, which is exactly what makes the verdict correct over the
//! reals.

use crate::linspec::{LinSpec, Rel};
use crate::rat::Rational;
use crate::Error;

pub(crate) const FM_DIM_GUARD: usize = 6;

#[derive(Clone)]
struct FmRow {
    coeffs: Vec<Rational>,
    strict: bool,
    rhs: Rational,
}

/// Exact feasibility verdict by variable elimination.
pub fn fm_feasible(spec: &LinSpec) -> Result<bool, Error> {
    if spec.dim > FM_DIM_GUARD {
        return Err(Error::FmDimGuard(spec.dim, FM_DIM_GUARD));
    }
    let mut rows: Vec<FmRow> = Vec::new();
    for row in &spec.rows {
        let coeffs: Vec<Rational> = row.coeffs.iter().cloned().collect();
        match row.rel {
            Rel::Le => rows.push(FmRow {
                coeffs,
                strict: false,
                rhs: row.rhs.clone(),
            }),
            Rel::Lt => rows.push(FmRow {
                coeffs,
                strict: true,
                rhs: row.rhs.clone(),
            }),
            Rel::Eq => {
                rows.push(FmRow {
                    coeffs: coeffs.clone(),
                    strict: false,
                    rhs: row.rhs.clone(),
                });
                rows.push(FmRow {
                    coeffs: coeffs.iter().map(|c| -c).collect(),
                    strict: false,
                    rhs: -&row.rhs,
                });
            }
        }
    }

    for var in 0..spec.dim {
        let mut keep: Vec<FmRow> = Vec::new();
        let mut upper: Vec<FmRow> = Vec::new(); // positive coefficient on var
        let mut lower: Vec<FmRow> = Vec::new(); // negative coefficient on var
        for r in rows {
            if r.coeffs[var].is_zero() {
                keep.push(r);
            } else if r.coeffs[var].is_positive() {
                upper.push(r);
            } else {
                lower.push(r);
            }
        }
        for u in &upper {
            for l in &lower {
                // Scale so the var cancels: u * |l_v| + l * u_v.
                let uv = &u.coeffs[var];
                let lv_abs = l.coeffs[var].abs();
                let coeffs: Vec<Rational> = u
                    .coeffs
                    .iter()
                    .zip(l.coeffs.iter())
                    .map(|(a, b)| &(a * &lv_abs) + &(b * uv))
                    .collect();
                debug_assert!(coeffs[var].is_zero());
                keep.push(FmRow {
                    coeffs,
                    strict: u.strict || l.strict,
                    rhs: &(&u.rhs * &lv_abs) + &(&l.rhs * uv),
                });
            }
        }
        rows = keep;
    }

    for r in &rows {
        debug_assert!(r.coeffs.iter().all(|c| c.is_zero()));
        let ok = if r.strict {
            r.rhs.is_positive()
        } else {
            !r.rhs.is_negative()
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
