//! Fixed-width exact fractions for the solver hot path.
//!
//! `Q128` is a reduced fraction over `i128` with every operation checked;
//! any overflow bubbles up as `None` and the caller re-runs the solve over
//! arbitrary-precision rationals. Keeping the common case in machine words
//! makes pivoting roughly two orders of magnitude faster than big-integer
//! arithmetic.

use std::cmp::Ordering;

use num::integer::gcd;
use num::ToPrimitive;

use crate::rat::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Q128 {
    n: i128,
    d: i128, // always > 0, gcd(|n|, d) == 1
}

impl Q128 {
    pub(crate) const ZERO: Q128 = Q128 { n: 0, d: 1 };
    pub(crate) const ONE: Q128 = Q128 { n: 1, d: 1 };

    fn reduced(n: i128, d: i128) -> Option<Q128> {
        debug_assert!(d != 0);
        let (n, d) = if d < 0 {
            (n.checked_neg()?, d.checked_neg()?)
        } else {
            (n, d)
        };
        if n == 0 {
            return Some(Q128::ZERO);
        }
        let g = gcd(n.unsigned_abs(), d.unsigned_abs());
        let g = i128::try_from(g).ok()?;
        Some(Q128 { n: n / g, d: d / g })
    }

    pub(crate) fn from_rational(r: &Rational) -> Option<Q128> {
        let n = r.numer().to_i128()?;
        let d = r.denom().to_i128()?;
        // Already canonical in Rational.
        Some(Q128 { n, d })
    }

    pub(crate) fn to_rational(self) -> Rational {
        Rational::from_big(self.n.into(), self.d.into()).expect("positive denominator")
    }

    pub(crate) fn is_zero(self) -> bool {
        self.n == 0
    }

    pub(crate) fn is_pos(self) -> bool {
        self.n > 0
    }

    pub(crate) fn is_neg(self) -> bool {
        self.n < 0
    }

    pub(crate) fn neg(self) -> Option<Q128> {
        Some(Q128 {
            n: self.n.checked_neg()?,
            d: self.d,
        })
    }

    pub(crate) fn add(self, o: Q128) -> Option<Q128> {
        // Shared-denominator gcd keeps intermediate products small.
        let g = gcd(self.d, o.d);
        let od = o.d / g;
        let sd = self.d / g;
        let n = self.n.checked_mul(od)?.checked_add(o.n.checked_mul(sd)?)?;
        let d = self.d.checked_mul(od)?;
        Q128::reduced(n, d)
    }

    pub(crate) fn sub(self, o: Q128) -> Option<Q128> {
        self.add(o.neg()?)
    }

    pub(crate) fn mul(self, o: Q128) -> Option<Q128> {
        if self.n == 0 || o.n == 0 {
            return Some(Q128::ZERO);
        }
        let g1 = i128::try_from(gcd(self.n.unsigned_abs(), o.d.unsigned_abs())).ok()?;
        let g2 = i128::try_from(gcd(o.n.unsigned_abs(), self.d.unsigned_abs())).ok()?;
        let n = (self.n / g1).checked_mul(o.n / g2)?;
        let d = (self.d / g2).checked_mul(o.d / g1)?;
        Some(Q128 { n, d })
    }

    pub(crate) fn div(self, o: Q128) -> Option<Q128> {
        debug_assert!(o.n != 0);
        let flip = if o.n < 0 {
            Q128 {
                n: o.d.checked_neg()?,
                d: o.n.checked_neg()?,
            }
        } else {
            Q128 { n: o.d, d: o.n }
        };
        self.mul(flip)
    }

    pub(crate) fn cmp2(self, o: Q128) -> Option<Ordering> {
        let lhs = self.n.checked_mul(o.d)?;
        let rhs = o.n.checked_mul(self.d)?;
        Some(lhs.cmp(&rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::parse_rational;

    fn q(s: &str) -> Q128 {
        Q128::from_rational(&parse_rational(s).unwrap()).unwrap()
    }

    #[test]
    fn arithmetic_matches_bigrational() {
        let a = q("3/4");
        let b = q("-5/6");
        assert_eq!(a.add(b).unwrap(), q("-1/12"));
        assert_eq!(a.mul(b).unwrap(), q("-5/8"));
        assert_eq!(a.div(b).unwrap(), q("-9/10"));
        assert_eq!(a.sub(b).unwrap(), q("19/12"));
        assert_eq!(a.cmp2(b), Some(Ordering::Greater));
    }

    #[test]
    fn overflow_reports_none() {
        let big = Q128 {
            n: i128::MAX / 2,
            d: 1,
        };
        assert!(big.mul(big).is_none());
        assert!(big.add(big).and_then(|x| x.add(big)).is_none());
    }
}
