//! Constructive reductions between the decision problems.
//!
//! Every function here emits a genuine instance of the target problem
//! whose verdict equals the source's; the verdict-preservation property
//! is what the test corpus exercises for each of them. Emitted networks
//! freely use identity nodes for carries and equalization layers; apply
//! `purify_instance` when a pure-ReLU hidden structure is required.

pub mod cnf;
mod sat3;

pub use sat3::{sat3_to_glr, sat3_to_gsr, sat3_to_lr, sat_slope_network, sat_spread_network};

use crate::linspec::{ball_spec, LinRow, LinSpec};
use crate::net::{
    append_abs_sum, freeze_input, id_to_relu, stack_parallel, Activation, Network, Node,
};
use crate::rat::{ExtRational, Metric, RatVector, Rational};
use crate::verify::ProblemInstance;
use crate::Error;

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn sparse(n: usize, entries: &[(usize, Rational)]) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    for (i, c) in entries {
        v[*i] += c;
    }
    v
}

fn one() -> Rational {
    Rational::one()
}

fn expect_finite<'a>(v: &'a ExtRational, what: &'static str) -> Result<&'a Rational, Error> {
    v.finite().ok_or(Error::InfinityNotAllowed(what))
}

fn expect_positive_radius(eps: &ExtRational) -> Result<(), Error> {
    match eps {
        ExtRational::Infinity => Ok(()),
        ExtRational::Finite(e) if e.is_positive() => Ok(()),
        _ => Err(Error::BadInstance(
            "this reduction needs a positive ball radius".into(),
        )),
    }
}

/// Standard robustness to the interval property: two copies side by side,
/// the first pinned to the center by the input specification, the second
/// ranging over the ball, with the output specification demanding the
/// delta-ball on the output gap.
pub fn sr_to_vip(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Sr {
        net,
        metric,
        eps,
        delta,
        center,
    } = inst
    else {
        return Err(Error::BadInstance("sr_to_vip takes an SR instance".into()));
    };
    if *metric != Metric::Linf {
        return Err(Error::UnsupportedMetric(*metric));
    }
    let n = net.input_dim();
    let m = net.output_dim();
    let pair = stack_parallel(net, net, false)?;
    let mut a_rows = Vec::new();
    for i in 0..n {
        a_rows.push(LinRow::eq(unit(2 * n, i), center[i].clone()));
    }
    if let ExtRational::Finite(e) = eps {
        for i in 0..n {
            a_rows.push(LinRow::le(
                sparse(2 * n, &[(i, one()), (n + i, -one())]),
                e.clone(),
            ));
            a_rows.push(LinRow::le(
                sparse(2 * n, &[(i, -one()), (n + i, one())]),
                e.clone(),
            ));
        }
    }
    let mut b_rows = Vec::new();
    if let ExtRational::Finite(d) = delta {
        for i in 0..m {
            b_rows.push(LinRow::le(
                sparse(2 * m, &[(i, one()), (m + i, -one())]),
                d.clone(),
            ));
            b_rows.push(LinRow::le(
                sparse(2 * m, &[(i, -one()), (m + i, one())]),
                d.clone(),
            ));
        }
    }
    Ok(ProblemInstance::Vip {
        net: pair,
        inspec: LinSpec::new(2 * n, a_rows)?,
        outspec: LinSpec::new(2 * m, b_rows)?,
    })
}

/// Classification robustness to the interval property: the network stays,
/// the ball becomes the input specification, and the output specification
/// is the conjunction of comparison rows against the label.
pub fn cr_to_vip(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Cr {
        net,
        metric,
        eps,
        center,
        label,
    } = inst
    else {
        return Err(Error::BadInstance("cr_to_vip takes a CR instance".into()));
    };
    if *metric != Metric::Linf {
        return Err(Error::UnsupportedMetric(*metric));
    }
    let m = net.output_dim();
    let j = label - 1;
    let (inspec, aux) = ball_spec(Metric::Linf, center, eps)?;
    debug_assert_eq!(aux, 0);
    let mut b_rows = Vec::new();
    for i in (0..m).filter(|i| *i != j) {
        b_rows.push(LinRow::le(
            sparse(m, &[(i, one()), (j, -one())]),
            Rational::zero(),
        ));
    }
    Ok(ProblemInstance::Vip {
        net: net.clone(),
        inspec,
        outspec: LinSpec::new(m, b_rows)?,
    })
}

/// Standard robustness to classification robustness: a frozen copy
/// supplies the center outputs one layer late, the live copy is padded
/// with an identity layer, and a new output layer exposes the signed gaps
/// next to a detached delta node that must stay maximal.
pub fn sr_to_cr(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Sr {
        net,
        metric,
        eps,
        delta,
        center,
    } = inst
    else {
        return Err(Error::BadInstance("sr_to_cr takes an SR instance".into()));
    };
    if *metric != Metric::Linf {
        return Err(Error::UnsupportedMetric(*metric));
    }
    let delta = expect_finite(delta, "delta")?;
    let m = net.output_dim();
    let frozen = freeze_input(net, center)?;
    let live = net.append_identity_layer();
    let both = stack_parallel(&frozen, &live, true)?;
    let mut out = Vec::with_capacity(2 * m + 1);
    for i in 0..m {
        out.push(Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(2 * m, &[(m + i, one()), (i, -one())]),
        ));
    }
    for i in 0..m {
        out.push(Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(2 * m, &[(i, one()), (m + i, -one())]),
        ));
    }
    out.push(Node::detached(Activation::Id, delta.clone()));
    Ok(ProblemInstance::Cr {
        net: both.append_layer(out)?,
        metric: Metric::Linf,
        eps: eps.clone(),
        center: center.clone(),
        label: 2 * m + 1,
    })
}

/// Classification robustness to standard robustness with delta zero: the
/// overlap collector `ReLU(sum_i ReLU(N_i - N_j))` runs next to the
/// strictly-positive-away-from-center distance net, and the merged
/// network must be exactly constant on the ball.
pub fn cr_to_sr(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Cr {
        net,
        metric,
        eps,
        center,
        label,
    } = inst
    else {
        return Err(Error::BadInstance("cr_to_sr takes a CR instance".into()));
    };
    expect_positive_radius(eps)?;
    let n = net.input_dim();
    let m = net.output_dim();
    let j = label - 1;

    // f(x) = sum_i ReLU(x_i - c_i) + ReLU(c_i - x_i), zero only at the center.
    let f_net = Network::new(
        n,
        vec![
            (0..n)
                .flat_map(|i| {
                    [
                        Node::new(Activation::ReLU, -&center[i], unit(n, i)),
                        Node::new(
                            Activation::ReLU,
                            center[i].clone(),
                            sparse(n, &[(i, -one())]),
                        ),
                    ]
                })
                .collect(),
            vec![Node::new(
                Activation::Id,
                Rational::zero(),
                vec![one(); 2 * n],
            )],
        ],
    )?;

    let both = stack_parallel(net, &f_net, true)?;
    // Overlap terms next to the carried distance value.
    let mut alpha = Vec::with_capacity(m + 1);
    for i in 0..m {
        alpha.push(Node::new(
            Activation::ReLU,
            Rational::zero(),
            sparse(m + 1, &[(i, one()), (j, -one())]),
        ));
    }
    alpha.push(Node::new(Activation::Id, Rational::zero(), unit(m + 1, m)));
    let with_alpha = both.append_layer(alpha)?;
    let collect = vec![
        Node::new(
            Activation::ReLU,
            Rational::zero(),
            sparse(m + 1, &(0..m).map(|i| (i, one())).collect::<Vec<_>>()),
        ),
        Node::new(Activation::Id, Rational::zero(), unit(m + 1, m)),
    ];
    let with_beta = with_alpha.append_layer(collect)?;
    let out = vec![
        Node::new(Activation::Id, Rational::zero(), unit(2, 0)),
        Node::new(
            Activation::ReLU,
            Rational::zero(),
            sparse(2, &[(0, one()), (1, -one())]),
        ),
    ];
    Ok(ProblemInstance::Sr {
        net: with_beta.append_layer(out)?,
        metric: *metric,
        eps: eps.clone(),
        delta: ExtRational::Finite(Rational::zero()),
        center: center.clone(),
    })
}

/// Arbitrary classification robustness holds exactly when one of the
/// per-label instances does.
pub fn acr_to_cr(inst: &ProblemInstance) -> Result<Vec<ProblemInstance>, Error> {
    let ProblemInstance::Acr {
        net,
        metric,
        eps,
        center,
    } = inst
    else {
        return Err(Error::BadInstance("acr_to_cr takes an ACR instance".into()));
    };
    Ok((1..=net.output_dim())
        .map(|label| ProblemInstance::Cr {
            net: net.clone(),
            metric: *metric,
            eps: eps.clone(),
            center: center.clone(),
            label,
        })
        .collect())
}

/// Classification robustness to arbitrary classification robustness: the
/// clamped overlap rides next to a constant-zero output, and two escort
/// outputs are driven below -1 at points just off the center along the
/// first axis, so the zero output is the only possible winner.
pub fn cr_to_acr(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Cr {
        net,
        metric,
        eps,
        center,
        label,
    } = inst
    else {
        return Err(Error::BadInstance("cr_to_acr takes a CR instance".into()));
    };
    match eps {
        ExtRational::Finite(e) if !e.is_positive() => {
            return Err(Error::BadInstance(
                "the reverse reduction needs a positive radius".into(),
            ))
        }
        _ => {}
    }
    // An interior offset strictly inside the ball along the first axis.
    let small = match eps {
        ExtRational::Finite(e) => e / &Rational::from_int(2),
        ExtRational::Infinity => Rational::one(),
    };
    let penalty = &Rational::from_int(2) / &small;
    let n = net.input_dim();
    let m = net.output_dim();
    let j = label - 1;

    let probes = Network::new(
        n,
        vec![vec![
            Node::new(Activation::ReLU, -&center[0], unit(n, 0)),
            Node::new(Activation::ReLU, center[0].clone(), sparse(n, &[(0, -one())])),
        ]],
    )?;
    let both = stack_parallel(net, &probes, true)?;
    // Overlap terms and the carried probes.
    let mut alpha = Vec::with_capacity(m + 2);
    for i in 0..m {
        alpha.push(Node::new(
            Activation::ReLU,
            Rational::zero(),
            sparse(m + 2, &[(i, one()), (j, -one())]),
        ));
    }
    alpha.push(Node::new(Activation::Id, Rational::zero(), unit(m + 2, m)));
    alpha.push(Node::new(Activation::Id, Rational::zero(), unit(m + 2, m + 1)));
    let with_alpha = both.append_layer(alpha)?;
    // f, the clamp helper ReLU(f - 1), and the probes again.
    let sums: Vec<(usize, Rational)> = (0..m).map(|i| (i, one())).collect();
    let clamp = vec![
        Node::new(Activation::Id, Rational::zero(), sparse(m + 2, &sums)),
        Node::new(Activation::ReLU, -Rational::one(), sparse(m + 2, &sums)),
        Node::new(Activation::Id, Rational::zero(), unit(m + 2, m)),
        Node::new(Activation::Id, Rational::zero(), unit(m + 2, m + 1)),
    ];
    let with_clamp = with_alpha.append_layer(clamp)?;
    let out = vec![
        Node::detached(Activation::Id, Rational::zero()),
        Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(4, &[(0, one()), (1, -one()), (2, -&penalty)]),
        ),
        Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(4, &[(0, one()), (1, -one()), (3, -&penalty)]),
        ),
    ];
    Ok(ProblemInstance::Acr {
        net: with_clamp.append_layer(out)?,
        metric: *metric,
        eps: eps.clone(),
        center: center.clone(),
    })
}

/// Network equivalence to classification robustness: signed output gaps
/// both ways next to a detached zero node that must stay maximal over the
/// whole space.
pub fn ne_to_cr(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Ne { net1, net2 } = inst else {
        return Err(Error::BadInstance("ne_to_cr takes an NE instance".into()));
    };
    inst.validate()?;
    let n = net1.input_dim();
    let m = net1.output_dim();
    let both = stack_parallel(net1, net2, true)?;
    let mut out = Vec::with_capacity(2 * m + 1);
    for k in 0..m {
        out.push(Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(2 * m, &[(k, one()), (m + k, -one())]),
        ));
    }
    for k in 0..m {
        out.push(Node::new(
            Activation::Id,
            Rational::zero(),
            sparse(2 * m, &[(m + k, one()), (k, -one())]),
        ));
    }
    out.push(Node::detached(Activation::Id, Rational::zero()));
    Ok(ProblemInstance::Cr {
        net: both.append_layer(out)?,
        metric: Metric::Linf,
        eps: ExtRational::Infinity,
        center: RatVector::zeros(n),
        label: 2 * m + 1,
    })
}

/// Global standard robustness to network equivalence. For a finite radius
/// the second input block drives a clamp that shifts the first block by
/// any vector in the radius cube; with an unbounded radius both blocks
/// feed the network directly. Either way the comparison outputs
/// `ReLU(+-gap - delta)` are all zero exactly when the property holds,
/// which is equivalence with the all-zero network.
pub fn gsr_to_ne(inst: &ProblemInstance) -> Result<ProblemInstance, Error> {
    let ProblemInstance::Gsr {
        net,
        metric,
        eps,
        delta,
    } = inst
    else {
        return Err(Error::BadInstance("gsr_to_ne takes a GSR instance".into()));
    };
    if *metric != Metric::Linf {
        return Err(Error::UnsupportedMetric(*metric));
    }
    let delta = expect_finite(delta, "delta")?;
    let n = net.input_dim();
    let m = net.output_dim();
    let pair = stack_parallel(net, net, false)?;
    let evaluated = match eps {
        ExtRational::Infinity => pair,
        ExtRational::Finite(e) => {
            // (x, y) -> (x, x + 2 eps psi(y) - eps), the shifted copy
            // covering exactly the radius cube around x.
            let two_eps = &Rational::from_int(2) * e;
            let squash = Network::new(
                2 * n,
                vec![
                    (0..n)
                        .map(|i| Node::new(Activation::Id, Rational::zero(), unit(2 * n, i)))
                        .chain((0..n).flat_map(|i| {
                            [
                                Node::new(Activation::ReLU, Rational::zero(), unit(2 * n, n + i)),
                                Node::new(Activation::ReLU, -Rational::one(), unit(2 * n, n + i)),
                            ]
                        }))
                        .collect(),
                    (0..n)
                        .map(|i| Node::new(Activation::Id, Rational::zero(), unit(3 * n, i)))
                        .chain((0..n).map(|i| {
                            Node::new(
                                Activation::Id,
                                -e,
                                sparse(
                                    3 * n,
                                    &[
                                        (i, one()),
                                        (n + 2 * i, two_eps.clone()),
                                        (n + 2 * i + 1, -&two_eps),
                                    ],
                                ),
                            )
                        }))
                        .collect(),
                ],
            )?;
            squash.then(&pair)?
        }
    };
    let mut cmp = Vec::with_capacity(2 * m);
    for i in 0..m {
        cmp.push(Node::new(
            Activation::ReLU,
            -delta,
            sparse(2 * m, &[(m + i, one()), (i, -one())]),
        ));
        cmp.push(Node::new(
            Activation::ReLU,
            -delta,
            sparse(2 * m, &[(i, one()), (m + i, -one())]),
        ));
    }
    Ok(ProblemInstance::Ne {
        net1: evaluated.append_layer(cmp)?,
        net2: Network::zero(2 * n, 2 * m),
    })
}

/// Which algebraic form of the retraction to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetractionForm {
    /// Negative side mirrors the positive side with a subtraction, so the
    /// image always lands inside the ball.
    Symmetric,
    /// A historical form whose negative branch adds the two rectifier
    /// terms instead; it escapes the ball far below the center and is
    /// kept for comparison only.
    Legacy,
}

/// The retraction gadget `T`: collapses the whole space onto the
/// `eps`-ball around `center` under the source metric while fixing the
/// ball pointwise. Returned as a standalone network from inputs to the
/// retracted coordinates.
pub fn retraction_gadget(
    source: Metric,
    center: &RatVector,
    eps: &Rational,
    form: RetractionForm,
) -> Result<Network, Error> {
    if eps.is_negative() {
        return Err(Error::Malformed("negative ball radius".into()));
    }
    let n = center.dim();
    match source {
        Metric::Linf => {
            // Independent per-coordinate clamps to [c_i - eps, c_i + eps].
            let mut stage = Vec::with_capacity(4 * n);
            for i in 0..n {
                stage.push(Node::new(Activation::ReLU, -&center[i], unit(n, i)));
                stage.push(Node::new(Activation::ReLU, -&(&center[i] + eps), unit(n, i)));
                stage.push(Node::new(
                    Activation::ReLU,
                    center[i].clone(),
                    sparse(n, &[(i, -one())]),
                ));
                stage.push(Node::new(
                    Activation::ReLU,
                    &center[i] - eps,
                    sparse(n, &[(i, -one())]),
                ));
            }
            let out = (0..n)
                .map(|i| {
                    Node::new(
                        Activation::Id,
                        center[i].clone(),
                        sparse(
                            4 * n,
                            &[
                                (4 * i, one()),
                                (4 * i + 1, -one()),
                                (4 * i + 2, -one()),
                                (4 * i + 3, one()),
                            ],
                        ),
                    )
                })
                .collect();
            Network::new(n, vec![stage, out])
        }
        Metric::L1 => {
            // Sequential clamps with a running absolute-value budget.
            // State between stages: [T_0..T_{i-1}, S_i, x_i..x_{n-1}].
            let width = n + 1;
            let mut layers: Vec<Vec<Node>> = Vec::with_capacity(2 * n + 2);
            let mut init = vec![Node::detached(Activation::Id, Rational::zero())];
            for i in 0..n {
                init.push(Node::new(Activation::Id, Rational::zero(), unit(n, i)));
            }
            layers.push(init);
            for i in 0..n {
                // Layer A: carries, then a b c d, then pending inputs.
                let xa = i + 1; // position of x_i in the state
                let mut a_layer = Vec::with_capacity(n + 4);
                for k in 0..i {
                    a_layer.push(Node::new(Activation::Id, Rational::zero(), unit(width, k)));
                }
                a_layer.push(Node::new(Activation::Id, Rational::zero(), unit(width, i)));
                a_layer.push(Node::new(
                    Activation::ReLU,
                    -&center[i],
                    sparse(width, &[(xa, one())]),
                ));
                a_layer.push(Node::new(
                    Activation::ReLU,
                    &(-&center[i]) - eps,
                    sparse(width, &[(xa, one()), (i, one())]),
                ));
                a_layer.push(Node::new(
                    Activation::ReLU,
                    center[i].clone(),
                    sparse(width, &[(xa, -one())]),
                ));
                a_layer.push(Node::new(
                    Activation::ReLU,
                    &center[i] - eps,
                    sparse(width, &[(xa, -one()), (i, one())]),
                ));
                for k in i + 1..n {
                    a_layer.push(Node::new(
                        Activation::Id,
                        Rational::zero(),
                        unit(width, k + 1),
                    ));
                }
                layers.push(a_layer);

                // Layer B: T_i and the updated budget.
                let wa = n + 4; // width after layer A
                let (s, a, b, c, d) = (i, i + 1, i + 2, i + 3, i + 4);
                let mut b_layer = Vec::with_capacity(width);
                for k in 0..i {
                    b_layer.push(Node::new(Activation::Id, Rational::zero(), unit(wa, k)));
                }
                let d_sign = match form {
                    RetractionForm::Symmetric => one(),
                    RetractionForm::Legacy => -one(),
                };
                b_layer.push(Node::new(
                    Activation::Id,
                    Rational::zero(),
                    sparse(wa, &[(a, one()), (b, -one()), (c, -one()), (d, d_sign.clone())]),
                ));
                b_layer.push(Node::new(
                    Activation::Id,
                    Rational::zero(),
                    sparse(wa, &[(s, one()), (a, one()), (b, -one()), (c, one()), (d, -d_sign)]),
                ));
                for k in i + 1..n {
                    b_layer.push(Node::new(
                        Activation::Id,
                        Rational::zero(),
                        unit(wa, k + 4),
                    ));
                }
                layers.push(b_layer);
            }
            let out = (0..n)
                .map(|i| Node::new(Activation::Id, center[i].clone(), unit(width, i)))
                .collect();
            layers.push(out);
            Network::new(n, layers)
        }
    }
}

/// Prepends the retraction so the result behaves like `net` on the source
/// ball while every input lands in it; with `collapse_output` the result
/// is additionally reduced to the absolute output sum, the form standard
/// robustness targets need.
pub fn metric_retraction(
    net: &Network,
    source: Metric,
    center: &RatVector,
    eps: &ExtRational,
    form: RetractionForm,
    collapse_output: bool,
) -> Result<Network, Error> {
    let eps = expect_finite(eps, "the retraction radius")?;
    let t = retraction_gadget(source, center, eps, form)?;
    let composed = t.then(net)?;
    Ok(if collapse_output {
        append_abs_sum(&composed)
    } else {
        composed
    })
}

/// Replaces hidden identity nodes by ReLU pairs in every network of the
/// instance.
pub fn purify_instance(inst: &ProblemInstance) -> ProblemInstance {
    let mut out = inst.clone();
    match &mut out {
        ProblemInstance::Nnr { net, .. }
        | ProblemInstance::Vip { net, .. }
        | ProblemInstance::Sr { net, .. }
        | ProblemInstance::Cr { net, .. }
        | ProblemInstance::Acr { net, .. }
        | ProblemInstance::Lr { net, .. }
        | ProblemInstance::Gsr { net, .. }
        | ProblemInstance::Glr { net, .. } => *net = id_to_relu(net),
        ProblemInstance::Ne { net1, net2 } => {
            *net1 = id_to_relu(net1);
            *net2 = id_to_relu(net2);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::parse_rational;
    use crate::verify::{decide, witness_confirms, DecideOptions};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn vq(ss: &[&str]) -> RatVector {
        RatVector::new(ss.iter().map(|s| q(s)).collect())
    }

    fn fin(s: &str) -> ExtRational {
        ExtRational::Finite(q(s))
    }

    fn opts() -> DecideOptions {
        DecideOptions::default()
    }

    fn holds(inst: &ProblemInstance) -> bool {
        decide(inst, &opts()).unwrap().holds
    }

    fn relu_identity() -> Network {
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

    fn sr_identity(eps: &str, delta: &str) -> ProblemInstance {
        ProblemInstance::Sr {
            net: Network::identity(1),
            metric: Metric::Linf,
            eps: fin(eps),
            delta: fin(delta),
            center: vq(&["0"]),
        }
    }

    #[test]
    fn sr_to_vip_preserves_both_verdicts() {
        for (eps, delta, expect) in [("1", "1/2", false), ("1", "1", true)] {
            let sr = sr_identity(eps, delta);
            let vip = sr_to_vip(&sr).unwrap();
            assert_eq!(holds(&sr), expect);
            assert_eq!(holds(&vip), expect);
        }
    }

    #[test]
    fn sr_to_vip_with_infinite_radius() {
        let sr = ProblemInstance::Sr {
            net: relu_identity(),
            metric: Metric::Linf,
            eps: ExtRational::Infinity,
            delta: fin("2"),
            center: vq(&["0"]),
        };
        let vip = sr_to_vip(&sr).unwrap();
        assert_eq!(holds(&sr), holds(&vip));
        assert!(!holds(&sr));
    }

    #[test]
    fn cr_to_vip_mirrors_cr() {
        let seesaw = Network::new(
            1,
            vec![vec![
                Node::new(Activation::Id, q("0"), vec![q("1")]),
                Node::new(Activation::Id, q("1"), vec![q("-1")]),
            ]],
        )
        .unwrap();
        for (eps, expect) in [("1/4", true), ("2", false)] {
            let cr = ProblemInstance::Cr {
                net: seesaw.clone(),
                metric: Metric::Linf,
                eps: fin(eps),
                center: vq(&["1"]),
                label: 1,
            };
            let vip = cr_to_vip(&cr).unwrap();
            assert_eq!(holds(&cr), expect);
            assert_eq!(holds(&vip), expect);
        }
    }

    #[test]
    fn sr_to_cr_mirrors_sr_and_carries_delta_node() {
        for (eps, delta, expect) in [("1", "1/2", false), ("1", "1", true)] {
            let sr = sr_identity(eps, delta);
            let cr = sr_to_cr(&sr).unwrap();
            assert_eq!(holds(&cr), expect);
            if let ProblemInstance::Cr { net, label, .. } = &cr {
                assert_eq!(*label, 3);
                for x in ["-5", "0", "7/3"] {
                    let out = net.evaluate(&vq(&[x])).unwrap();
                    assert_eq!(out[2], q(delta));
                }
            } else {
                panic!("expected CR");
            }
        }
    }

    #[test]
    fn cr_to_sr_mirrors_cr() {
        let seesaw = Network::new(
            1,
            vec![vec![
                Node::new(Activation::Id, q("0"), vec![q("1")]),
                Node::new(Activation::Id, q("1"), vec![q("-1")]),
            ]],
        )
        .unwrap();
        for (eps, expect) in [("1/4", true), ("2", false)] {
            let cr = ProblemInstance::Cr {
                net: seesaw.clone(),
                metric: Metric::Linf,
                eps: fin(eps),
                center: vq(&["1"]),
                label: 1,
            };
            let sr = cr_to_sr(&cr).unwrap();
            assert_eq!(holds(&sr), expect);
        }
        let zero_radius = ProblemInstance::Cr {
            net: seesaw,
            metric: Metric::Linf,
            eps: fin("0"),
            center: vq(&["1"]),
            label: 1,
        };
        assert!(cr_to_sr(&zero_radius).is_err());
    }

    #[test]
    fn acr_round_trip_reductions() {
        let seesaw = Network::new(
            1,
            vec![vec![
                Node::new(Activation::Id, q("0"), vec![q("1")]),
                Node::new(Activation::Id, q("1"), vec![q("-1")]),
            ]],
        )
        .unwrap();
        let acr = ProblemInstance::Acr {
            net: seesaw.clone(),
            metric: Metric::Linf,
            eps: fin("1/4"),
            center: vq(&["1"]),
        };
        let subs = acr_to_cr(&acr).unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(holds(&acr), subs.iter().any(holds));

        for (eps, label) in [("1/4", 1), ("2", 1)] {
            let cr = ProblemInstance::Cr {
                net: seesaw.clone(),
                metric: Metric::Linf,
                eps: fin(eps),
                center: vq(&["1"]),
                label,
            };
            let acr = cr_to_acr(&cr).unwrap();
            assert_eq!(holds(&cr), holds(&acr), "radius {}", eps);
        }
    }

    #[test]
    fn ne_to_cr_worked_examples() {
        let n = relu_identity();
        let id = Network::identity(1);
        let equal = ProblemInstance::Ne {
            net1: n.clone(),
            net2: id,
        };
        let cr = ne_to_cr(&equal).unwrap();
        assert!(holds(&cr));
        if let ProblemInstance::Cr { eps, label, .. } = &cr {
            assert!(eps.is_infinite());
            assert_eq!(*label, 3);
        }

        let clipped = crate::net::delete_nodes(&n, &[crate::net::NodeRef::new(1, 0)]).unwrap();
        let unequal = ProblemInstance::Ne {
            net1: n,
            net2: clipped,
        };
        let cr = ne_to_cr(&unequal).unwrap();
        assert!(!holds(&cr));
    }

    #[test]
    fn gsr_to_ne_finite_and_infinite_radius() {
        for (eps, delta, expect) in [
            (fin("1"), "1/2", false),
            (fin("1"), "1", true),
            (ExtRational::Infinity, "5", false),
        ] {
            let gsr = ProblemInstance::Gsr {
                net: Network::identity(1),
                metric: Metric::Linf,
                eps: eps.clone(),
                delta: fin(delta),
            };
            let ne = gsr_to_ne(&gsr).unwrap();
            assert_eq!(holds(&gsr), expect);
            assert_eq!(holds(&ne), expect, "eps {:?} delta {}", eps, delta);
        }

        let constant = ProblemInstance::Gsr {
            net: Network::zero(2, 1),
            metric: Metric::Linf,
            eps: fin("3"),
            delta: fin("0"),
        };
        let ne = gsr_to_ne(&constant).unwrap();
        assert!(holds(&ne));
    }

    #[test]
    fn retraction_fixes_ball_and_collapses_outside() {
        let center = vq(&["0"]);
        for metric in [Metric::L1, Metric::Linf] {
            let t = retraction_gadget(metric, &center, &q("1"), RetractionForm::Symmetric)
                .unwrap();
            assert_eq!(t.evaluate(&vq(&["1/2"])).unwrap()[0], q("1/2"));
            assert_eq!(t.evaluate(&vq(&["5"])).unwrap()[0], q("1"));
            assert_eq!(t.evaluate(&vq(&["-5"])).unwrap()[0], q("-1"));
        }
        let legacy = retraction_gadget(
            Metric::L1,
            &center,
            &q("1"),
            RetractionForm::Legacy,
        )
        .unwrap();
        assert_eq!(legacy.evaluate(&vq(&["-5"])).unwrap()[0], q("-9"));
        assert_eq!(legacy.evaluate(&vq(&["5"])).unwrap()[0], q("1"));
        assert_eq!(legacy.evaluate(&vq(&["1/2"])).unwrap()[0], q("1/2"));
    }

    #[test]
    fn retraction_stays_in_l1_ball_in_two_dims() {
        use crate::rat::dist;
        let center = vq(&["1", "-1"]);
        let t = retraction_gadget(Metric::L1, &center, &q("2"), RetractionForm::Symmetric)
            .unwrap();
        for p in [
            vq(&["1", "-1"]),
            vq(&["2", "-1"]),
            vq(&["10", "10"]),
            vq(&["-7", "3"]),
            vq(&["3/2", "-3/2"]),
        ] {
            let tp = t.evaluate(&p).unwrap();
            let d = dist(Metric::L1, &tp, &center).unwrap();
            assert!(d <= q("2"), "retracted point {:?} has distance {}", tp, d);
            if dist(Metric::L1, &p, &center).unwrap() <= q("2") {
                assert_eq!(tp, p, "ball points must be fixed");
            }
        }
    }

    #[test]
    fn metric_retraction_composes_and_collapses() {
        let net = Network::identity(1);
        let composed = metric_retraction(
            &net,
            Metric::L1,
            &vq(&["0"]),
            &fin("1"),
            RetractionForm::Symmetric,
            true,
        )
        .unwrap();
        assert_eq!(composed.output_dim(), 1);
        assert_eq!(composed.evaluate(&vq(&["-5"])).unwrap()[0], q("1"));
        assert!(matches!(
            metric_retraction(
                &net,
                Metric::L1,
                &vq(&["0"]),
                &ExtRational::Infinity,
                RetractionForm::Symmetric,
                false,
            ),
            Err(Error::InfinityNotAllowed(_))
        ));
    }

    #[test]
    fn purified_instances_keep_verdicts() {
        let sr = sr_identity("1", "1/2");
        let cr = sr_to_cr(&sr).unwrap();
        let pure = purify_instance(&cr);
        if let ProblemInstance::Cr { net, .. } = &pure {
            assert!(net.hidden_ids_absent());
        }
        assert_eq!(holds(&cr), holds(&pure));
    }

    #[test]
    fn gadget_instances_match_satisfiability() {
        use crate::reduce::cnf::{Clause, Cnf3, Lit};
        let sat = Cnf3::new(3, vec![Clause([Lit::pos(0), Lit::pos(1), Lit::pos(2)])]).unwrap();
        let unsat = Cnf3::new(
            1,
            vec![Clause([Lit::pos(0); 3]), Clause([Lit::neg(0); 3])],
        )
        .unwrap();
        for (cnf, is_sat) in [(&sat, true), (&unsat, false)] {
            let gsr = sat3_to_gsr(cnf).unwrap();
            assert_eq!(holds(&gsr), !is_sat, "gsr gadget");
            let v = decide(&gsr, &opts()).unwrap();
            if let Some(w) = &v.witness {
                assert!(witness_confirms(&gsr, w).unwrap());
            }
        }
    }

    #[test]
    fn lr_and_glr_gadgets_match_satisfiability() {
        use crate::reduce::cnf::{Clause, Cnf3, Lit};
        let sat = Cnf3::new(1, vec![Clause([Lit::pos(0); 3])]).unwrap();
        let unsat = Cnf3::new(
            1,
            vec![Clause([Lit::pos(0); 3]), Clause([Lit::neg(0); 3])],
        )
        .unwrap();
        for (cnf, is_sat) in [(&sat, true), (&unsat, false)] {
            let lr = sat3_to_lr(cnf).unwrap();
            assert_eq!(holds(&lr), !is_sat, "lr gadget");
            let glr = sat3_to_glr(cnf).unwrap();
            assert_eq!(holds(&glr), !is_sat, "glr gadget");
        }
    }
}
