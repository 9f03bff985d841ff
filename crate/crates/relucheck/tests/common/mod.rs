//! Shared fixtures, random generators and independent oracles for the
//! integration and acceptance suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relucheck::linspec::{LinRow, LinSpec, Rel};
use relucheck::net::{Activation, Network, Node, Phase};
use relucheck::rat::{parse_rational, ExtRational, Metric, RatVector, Rational};
use relucheck::verify::ProblemInstance;

pub fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

pub fn vq(ss: &[&str]) -> RatVector {
    RatVector::new(ss.iter().map(|s| q(s)).collect())
}

pub fn fin(s: &str) -> ExtRational {
    ExtRational::Finite(q(s))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------
// Worked example networks.
// ---------------------------------------------------------------------

/// x -> (ReLU(x), ReLU(-x)) -> y1 - y2: computes the identity with two
/// individually necessary hidden nodes.
pub fn split_identity_net() -> Network {
    Network::new(
        1,
        vec![
            vec![
                Node::new(Activation::ReLU, q("0"), vec![q("1")]),
                Node::new(Activation::ReLU, q("0"), vec![q("-1")]),
            ],
            vec![Node::new(Activation::Id, q("0"), vec![q("1"), q("-1")])],
        ],
    )
    .unwrap()
}

/// ReLU(x) - ReLU(x): the zero function through a cancelling pair.
pub fn cancelling_zero_net() -> Network {
    Network::new(
        1,
        vec![
            vec![
                Node::new(Activation::ReLU, q("0"), vec![q("1")]),
                Node::new(Activation::ReLU, q("0"), vec![q("1")]),
            ],
            vec![Node::new(Activation::Id, q("0"), vec![q("1"), q("-1")])],
        ],
    )
    .unwrap()
}

/// The zero function via an output node with no incoming edges.
pub fn empty_sum_zero_net() -> Network {
    relucheck::net::delete_nodes(
        &split_identity_net(),
        &[
            relucheck::net::NodeRef::new(1, 0),
            relucheck::net::NodeRef::new(1, 1),
        ],
    )
    .unwrap()
}

/// Two-output plateau classifier (f, 1 - f) with a flat strip of width 1
/// between the class regions; globally classification robust at radius 1.
pub fn plateau_classifier() -> Network {
    Network::new(
        1,
        vec![
            vec![
                Node::new(Activation::ReLU, q("1"), vec![q("1")]),
                Node::new(Activation::ReLU, q("1/2"), vec![q("1")]),
                Node::new(Activation::ReLU, q("-1/2"), vec![q("1")]),
                Node::new(Activation::ReLU, q("-1"), vec![q("1")]),
            ],
            vec![
                Node::new(
                    Activation::Id,
                    q("0"),
                    vec![q("1"), q("-1"), q("1"), q("-1")],
                ),
                Node::new(
                    Activation::Id,
                    q("1"),
                    vec![q("-1"), q("1"), q("-1"), q("1")],
                ),
            ],
        ],
    )
    .unwrap()
}

// ---------------------------------------------------------------------
// Random generation.
// ---------------------------------------------------------------------

/// Small rational with numerator in [-num..num] and denominator in
/// [1..=den].
pub fn rand_rational(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    let d = r.gen_range(1..=den);
    let n = r.gen_range(-num * d..=num * d);
    Rational::new(n, d).unwrap()
}

pub fn rand_nonneg(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    rand_rational(r, num, den).abs()
}

pub fn rand_vector(r: &mut ChaCha8Rng, dim: usize) -> RatVector {
    (0..dim).map(|_| rand_rational(r, 3, 4)).collect()
}

/// Random network with exactly `relu_budget` ReLU nodes spread over one
/// or two hidden layers plus the output layer.
pub fn rand_net(r: &mut ChaCha8Rng, n_in: usize, n_out: usize, relu_budget: usize) -> Network {
    let hidden_layers = if relu_budget == 0 {
        r.gen_range(0..=1)
    } else {
        r.gen_range(1..=2)
    };
    let mut widths = Vec::new();
    let mut remaining = relu_budget;
    for l in 0..hidden_layers {
        let last = l + 1 == hidden_layers;
        let relus_here = if last {
            remaining
        } else {
            r.gen_range(0..=remaining)
        };
        remaining -= relus_here;
        let ids_here = r.gen_range(0..=1);
        widths.push((relus_here, ids_here));
    }
    let mut layers: Vec<Vec<Node>> = Vec::new();
    let mut prev = n_in;
    for (relus, ids) in widths {
        let width = (relus + ids).max(1);
        let mut layer = Vec::with_capacity(width);
        for k in 0..width {
            let act = if k < relus {
                Activation::ReLU
            } else {
                Activation::Id
            };
            let weights = (0..prev).map(|_| rand_rational(r, 2, 2)).collect();
            layer.push(Node::new(act, rand_rational(r, 2, 2), weights));
        }
        prev = layer.len();
        layers.push(layer);
    }
    let out = (0..n_out)
        .map(|_| {
            Node::new(
                Activation::Id,
                rand_rational(r, 2, 2),
                (0..prev).map(|_| rand_rational(r, 2, 2)).collect(),
            )
        })
        .collect();
    layers.push(out);
    Network::new(n_in, layers).unwrap()
}

/// Random conjunction of rows over `dim` variables.
pub fn rand_spec(r: &mut ChaCha8Rng, dim: usize, max_rows: usize) -> LinSpec {
    let rows = (0..r.gen_range(0..=max_rows))
        .map(|_| {
            let coeffs = (0..dim).map(|_| rand_rational(r, 2, 2)).collect();
            let rel = match r.gen_range(0..6) {
                0 => Rel::Lt,
                1 => Rel::Eq,
                _ => Rel::Le,
            };
            LinRow::new(coeffs, rel, rand_rational(r, 4, 2))
        })
        .collect();
    LinSpec::new(dim, rows).unwrap()
}

/// Random radius, mostly small and finite, occasionally zero or infinite.
pub fn rand_eps(r: &mut ChaCha8Rng, allow_inf: bool) -> ExtRational {
    match r.gen_range(0..10) {
        0 if allow_inf => ExtRational::Infinity,
        1 => ExtRational::Finite(Rational::zero()),
        _ => ExtRational::Finite(rand_nonneg(r, 2, 2)),
    }
}

/// Random instance of the named problem, sized so that the canonical
/// search model stays within `relu_cap` ReLU nodes in total.
pub fn rand_instance(r: &mut ChaCha8Rng, problem: &str, relu_cap: usize) -> ProblemInstance {
    match problem {
        "nnr" | "vip" => {
            let n = r.gen_range(1..=3);
            let m = r.gen_range(1..=2);
            let budget = r.gen_range(0..=relu_cap.min(8));
            let net = rand_net(r, n, m, budget);
            let inspec = rand_spec(r, n, 3);
            let outspec = rand_spec(r, m, 3);
            if problem == "nnr" {
                ProblemInstance::Nnr { net, inspec, outspec }
            } else {
                ProblemInstance::Vip { net, inspec, outspec }
            }
        }
        "ne" => {
            let n = r.gen_range(1..=2);
            let m = r.gen_range(1..=2);
            let budget = relu_cap.min(10);
            let r1 = r.gen_range(0..=budget / 2);
            let r2 = r.gen_range(0..=(budget - r1).min(budget / 2));
            let net1 = rand_net(r, n, m, r1);
            // Half the time compare against a structural variant of the
            // same function so both verdicts appear.
            let net2 = if r.gen_bool(0.3) {
                relucheck::net::id_to_relu(&net1)
            } else {
                rand_net(r, n, m, r2)
            };
            ProblemInstance::Ne { net1, net2 }
        }
        "sr" => {
            let n = r.gen_range(1..=2);
            let m = r.gen_range(1..=2);
            let metric = if r.gen_bool(0.5) { Metric::L1 } else { Metric::Linf };
            let budget = match metric {
                Metric::L1 => relu_cap.saturating_sub(2 * m).min(6),
                Metric::Linf => relu_cap.min(8),
            };
            ProblemInstance::Sr {
                net: {
                    let b = r.gen_range(0..=budget);
                    rand_net(r, n, m, b)
                },
                metric,
                eps: rand_eps(r, true),
                delta: if r.gen_bool(0.1) {
                    ExtRational::Infinity
                } else {
                    ExtRational::Finite(rand_nonneg(r, 3, 2))
                },
                center: rand_vector(r, n),
            }
        }
        "cr" | "acr" => {
            let n = r.gen_range(1..=2);
            let m = r.gen_range(2..=3);
            let metric = if r.gen_bool(0.5) { Metric::L1 } else { Metric::Linf };
            let budget = r.gen_range(0..=relu_cap.min(7));
            let net = rand_net(r, n, m, budget);
            let eps = rand_eps(r, true);
            let center = rand_vector(r, n);
            if problem == "cr" {
                let label = r.gen_range(1..=m);
                ProblemInstance::Cr { net, metric, eps, center, label }
            } else {
                ProblemInstance::Acr { net, metric, eps, center }
            }
        }
        "lr" => {
            let n = r.gen_range(1..=2);
            let m = r.gen_range(1..=2);
            ProblemInstance::Lr {
                net: {
                    let b = r.gen_range(0..=relu_cap.min(6));
                    rand_net(r, n, m, b)
                },
                metric: Metric::Linf,
                eps: rand_eps(r, true),
                lip: ExtRational::Finite(rand_nonneg(r, 3, 2)),
                center: rand_vector(r, n),
            }
        }
        "gsr" => {
            let n = r.gen_range(1..=2);
            let m = r.gen_range(1..=2);
            ProblemInstance::Gsr {
                net: {
                    let b = r.gen_range(0..=(relu_cap / 2).min(5));
                    rand_net(r, n, m, b)
                },
                metric: Metric::Linf,
                eps: rand_eps(r, true),
                delta: if r.gen_bool(0.1) {
                    ExtRational::Infinity
                } else {
                    ExtRational::Finite(rand_nonneg(r, 3, 2))
                },
            }
        }
        "glr" => {
            let n = r.gen_range(1..=2);
            let m = 1;
            ProblemInstance::Glr {
                net: {
                    let b = r.gen_range(0..=(relu_cap / 2).min(4));
                    rand_net(r, n, m, b)
                },
                metric: Metric::Linf,
                eps: rand_eps(r, true),
                lip: ExtRational::Finite(rand_nonneg(r, 3, 2)),
            }
        }
        other => panic!("unknown problem tag '{}'", other),
    }
}

// ---------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------

/// Evaluates the affine map a pattern induces, with no dependency on the
/// library's symbolic machinery: ReLU nodes take the piece their phase
/// dictates regardless of the sign of the pre-activation.
pub fn affine_piece_eval(net: &Network, pattern: &[Phase], x: &RatVector) -> RatVector {
    let mut prev: Vec<Rational> = x.as_slice().to_vec();
    let mut at = 0usize;
    for layer in net.layers() {
        let mut next = Vec::with_capacity(layer.len());
        for node in layer {
            let mut pre = node.bias.clone();
            for (w, v) in node.weights.iter().zip(prev.iter()) {
                pre += &(w * v);
            }
            let out = match node.activation {
                Activation::Id => pre,
                Activation::ReLU => {
                    let phase = pattern[at];
                    at += 1;
                    match phase {
                        Phase::Active => pre,
                        Phase::Inactive => Rational::zero(),
                    }
                }
            };
            next.push(out);
        }
        prev = next;
    }
    RatVector::new(prev)
}

/// Pre-activation values of every ReLU node at a point, in topological
/// order; computed by a plain forward pass.
pub fn relu_pre_values(net: &Network, x: &RatVector) -> Vec<Rational> {
    let mut prev: Vec<Rational> = x.as_slice().to_vec();
    let mut pres = Vec::new();
    for layer in net.layers() {
        let mut next = Vec::with_capacity(layer.len());
        for node in layer {
            let mut pre = node.bias.clone();
            for (w, v) in node.weights.iter().zip(prev.iter()) {
                pre += &(w * v);
            }
            if node.activation == Activation::ReLU {
                pres.push(pre.clone());
            }
            next.push(node.activation.apply(pre));
        }
        prev = next;
    }
    pres
}

/// All 3-literal clauses over `vars` variables as sorted multisets.
pub fn all_clauses(vars: usize) -> Vec<relucheck::reduce::cnf::Clause> {
    use relucheck::reduce::cnf::{Clause, Lit};
    let mut lits = Vec::new();
    for v in 0..vars {
        lits.push(Lit::pos(v));
        lits.push(Lit::neg(v));
    }
    let mut out = Vec::new();
    for a in 0..lits.len() {
        for b in a..lits.len() {
            for c in b..lits.len() {
                out.push(Clause([lits[a], lits[b], lits[c]]));
            }
        }
    }
    out
}
