//! Hardness-instance generators from 3-CNF.
//!
//! Both gadget networks share the literal stage: inputs are clamped to
//! [0, 1] by the ReLU pair `psi(t) = ReLU(t) - ReLU(t - 1)`, a negation
//! rail computes `1 - psi`, and the literal value is
//! `ReLU(2 psi - 1)`, which is zero on one side of 1/2 and reaches 1 at a
//! committed assignment, so at most one of a literal and its negation is
//! ever positive.
//!
//! The global-robustness gadget aggregates each clause with the clamp of
//! the literal sum and adds the clause values: the output ranges over
//! [0, n], reaches n exactly at satisfying 0/1 assignments, and is 0 at
//! the all-halves point. The Lipschitz gadgets aggregate each clause with
//! a ReLU max chain instead: a dead clause pins its term to zero, which
//! bounds the growth from any point by 2(n-1) per unit of input distance
//! and keeps the slope budget 2n-1 sound, while a satisfying
//! corner still forces the full spread of n at distance 1/2.

use crate::net::{Activation, Network, Node};
use crate::rat::{ExtRational, Metric, RatVector, Rational};
use crate::reduce::cnf::Cnf3;
use crate::verify::ProblemInstance;
use crate::Error;

fn sparse(width: usize, entries: &[(usize, Rational)]) -> Vec<Rational> {
    let mut w = vec![Rational::zero(); width];
    for (i, v) in entries {
        w[*i] += v;
    }
    w
}

fn relu(width: usize, bias: Rational, entries: &[(usize, Rational)]) -> Node {
    Node::new(Activation::ReLU, bias, sparse(width, entries))
}

fn one() -> Rational {
    Rational::one()
}

/// The shared literal stage: four layers mapping inputs to the 2v literal
/// values, laid out as `2*var + (negated as usize)`.
fn literal_layers(v: usize) -> Vec<Vec<Node>> {
    let mut layers = Vec::with_capacity(4);
    // p_i = ReLU(x_i), q_i = ReLU(x_i - 1)
    layers.push(
        (0..v)
            .flat_map(|i| {
                [
                    relu(v, Rational::zero(), &[(i, one())]),
                    relu(v, -Rational::one(), &[(i, one())]),
                ]
            })
            .collect(),
    );
    // clamp_i = p_i - q_i, nonnegative by construction
    layers.push(
        (0..v)
            .map(|i| {
                relu(
                    2 * v,
                    Rational::zero(),
                    &[(2 * i, one()), (2 * i + 1, -one())],
                )
            })
            .collect(),
    );
    // pos_i = clamp_i, neg_i = 1 - clamp_i
    layers.push(
        (0..v)
            .flat_map(|i| {
                [
                    relu(v, Rational::zero(), &[(i, one())]),
                    relu(v, Rational::one(), &[(i, -one())]),
                ]
            })
            .collect(),
    );
    // literal value: ReLU(2 rail - 1)
    layers.push(
        (0..2 * v)
            .map(|r| relu(2 * v, -Rational::one(), &[(r, Rational::from_int(2))]))
            .collect(),
    );
    layers
}

fn lit_slot(l: crate::reduce::cnf::Lit) -> usize {
    2 * l.var + usize::from(l.negated)
}

/// Clause aggregation by clamped sum: value `psi(a + b + c)` per clause,
/// then the total. Output range [0, n]; n is reached exactly by
/// satisfying 0/1 assignments and 0 at the all-halves point.
pub fn sat_spread_network(cnf: &Cnf3) -> Network {
    let v = cnf.num_vars;
    let n = cnf.clauses.len();
    let mut layers = literal_layers(v);
    // r_k = ReLU(sum), s_k = ReLU(sum - 1), with literal multiplicity.
    layers.push(
        cnf.clauses
            .iter()
            .flat_map(|c| {
                let entries: Vec<(usize, Rational)> =
                    c.0.iter().map(|l| (lit_slot(*l), one())).collect();
                [
                    relu(2 * v, Rational::zero(), &entries),
                    relu(2 * v, -Rational::one(), &entries),
                ]
            })
            .collect(),
    );
    layers.push(
        (0..n)
            .map(|k| {
                relu(
                    2 * n,
                    Rational::zero(),
                    &[(2 * k, one()), (2 * k + 1, -one())],
                )
            })
            .collect(),
    );
    layers.push(vec![relu(
        n,
        Rational::zero(),
        &(0..n).map(|k| (k, one())).collect::<Vec<_>>(),
    )]);
    Network::new(v, layers).expect("gadget layers are width-consistent")
}

/// Clause aggregation by a ReLU max chain over the clause's distinct
/// literal values, then the total.
pub fn sat_slope_network(cnf: &Cnf3) -> Network {
    let v = cnf.num_vars;
    let n = cnf.clauses.len();
    let mut layers = literal_layers(v);

    let lits: Vec<Vec<usize>> = cnf
        .clauses
        .iter()
        .map(|c| c.distinct_lits().iter().map(|l| lit_slot(*l)).collect())
        .collect();

    // M1: carry the first value, difference for the second, carry the third.
    let mut m1 = Vec::new();
    let mut m1_slots: Vec<(usize, Option<usize>, Option<usize>)> = Vec::new();
    for ls in &lits {
        let v1 = m1.len();
        m1.push(relu(2 * v, Rational::zero(), &[(ls[0], one())]));
        let t1 = if ls.len() >= 2 {
            m1.push(relu(
                2 * v,
                Rational::zero(),
                &[(ls[1], one()), (ls[0], -one())],
            ));
            Some(m1.len() - 1)
        } else {
            None
        };
        let v3 = if ls.len() == 3 {
            m1.push(relu(2 * v, Rational::zero(), &[(ls[2], one())]));
            Some(m1.len() - 1)
        } else {
            None
        };
        m1_slots.push((v1, t1, v3));
    }
    let m1_width = m1.len();
    layers.push(m1);

    // M2: m1 = max of the first two (v1 + t1); carry the third.
    let mut m2 = Vec::new();
    let mut m2_slots: Vec<(usize, Option<usize>)> = Vec::new();
    for (v1, t1, v3) in &m1_slots {
        let max12 = m2.len();
        match t1 {
            Some(t) => m2.push(relu(
                m1_width,
                Rational::zero(),
                &[(*v1, one()), (*t, one())],
            )),
            None => m2.push(relu(m1_width, Rational::zero(), &[(*v1, one())])),
        }
        let v3s = v3.map(|x| {
            m2.push(relu(m1_width, Rational::zero(), &[(x, one())]));
            m2.len() - 1
        });
        m2_slots.push((max12, v3s));
    }
    let m2_width = m2.len();
    layers.push(m2);

    // M3: carry max12; difference for the third.
    let mut m3 = Vec::new();
    let mut m3_slots: Vec<(usize, Option<usize>)> = Vec::new();
    for (max12, v3) in &m2_slots {
        let carried = m3.len();
        m3.push(relu(m2_width, Rational::zero(), &[(*max12, one())]));
        let t2 = v3.map(|x| {
            m3.push(relu(
                m2_width,
                Rational::zero(),
                &[(x, one()), (*max12, -one())],
            ));
            m3.len() - 1
        });
        m3_slots.push((carried, t2));
    }
    let m3_width = m3.len();
    layers.push(m3);

    // M4: clause value = max of all three.
    let mut m4 = Vec::new();
    for (carried, t2) in &m3_slots {
        match t2 {
            Some(t) => m4.push(relu(
                m3_width,
                Rational::zero(),
                &[(*carried, one()), (*t, one())],
            )),
            None => m4.push(relu(m3_width, Rational::zero(), &[(*carried, one())])),
        }
    }
    layers.push(m4);

    layers.push(vec![relu(
        n,
        Rational::zero(),
        &(0..n).map(|k| (k, one())).collect::<Vec<_>>(),
    )]);
    Network::new(v, layers).expect("gadget layers are width-consistent")
}

fn half() -> Rational {
    Rational::new(1, 2).expect("nonzero")
}

/// Global standard robustness instance `(N, inf, n - 1/2)`: it holds
/// exactly when the formula is unsatisfiable.
pub fn sat3_to_gsr(cnf: &Cnf3) -> Result<ProblemInstance, Error> {
    let n = cnf.clauses.len();
    Ok(ProblemInstance::Gsr {
        net: sat_spread_network(cnf),
        metric: Metric::Linf,
        eps: ExtRational::Infinity,
        delta: ExtRational::Finite(&Rational::from_int(n as i64) - &half()),
    })
}

/// Local Lipschitz robustness instance
/// `(N, 1/2, 2n - 1, (1/2, ..., 1/2))`: holds exactly when the formula is
/// unsatisfiable.
pub fn sat3_to_lr(cnf: &Cnf3) -> Result<ProblemInstance, Error> {
    let n = cnf.clauses.len();
    let v = cnf.num_vars;
    Ok(ProblemInstance::Lr {
        net: sat_slope_network(cnf),
        metric: Metric::Linf,
        eps: ExtRational::Finite(half()),
        lip: ExtRational::Finite(Rational::from_int(2 * n as i64 - 1)),
        center: RatVector::new(vec![half(); v]),
    })
}

/// Global Lipschitz robustness instance `(N, 1/2, 2n - 1)`: holds exactly
/// when the formula is unsatisfiable.
pub fn sat3_to_glr(cnf: &Cnf3) -> Result<ProblemInstance, Error> {
    let n = cnf.clauses.len();
    Ok(ProblemInstance::Glr {
        net: sat_slope_network(cnf),
        metric: Metric::Linf,
        eps: ExtRational::Finite(half()),
        lip: ExtRational::Finite(Rational::from_int(2 * n as i64 - 1)),
    })
}
