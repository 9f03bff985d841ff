//! Node-necessity analysis: is a set of hidden nodes load-bearing, and is
//! every nonempty hidden subset?
//!
//! A hidden subset is necessary exactly when deleting it changes the
//! computed function, so each check is one equivalence decision between
//! the network and its induced subnetwork. The all-subsets variant
//! enumerates ascending by cardinality and stops at the first unnecessary
//! subset, which is therefore one of minimal size.

use crate::net::{delete_nodes, stack_parallel, Activation, Network, Node, NodeRef};
use crate::rat::Rational;
use crate::verify::{decide, DecideOptions, ProblemInstance, SearchStats, Verdict};
use crate::Error;

/// Default ceiling on the hidden-node count for subset enumeration.
pub const SUBSET_ENUMERATION_CAP: usize = 16;

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

/// Decides whether the hidden nodes in `subset` are necessary: `holds`
/// means deleting them changes the function, and the witness is an input
/// where the original and the pruned network differ.
pub fn decide_nece(
    net: &Network,
    subset: &[NodeRef],
    opts: &DecideOptions,
) -> Result<Verdict, Error> {
    if subset.is_empty() {
        return Err(Error::BadInstance(
            "necessity is asked of nonempty subsets".into(),
        ));
    }
    let pruned = delete_nodes(net, subset)?;
    let ne = decide(
        &ProblemInstance::Ne {
            net1: net.clone(),
            net2: pruned,
        },
        opts,
    )?;
    Ok(Verdict {
        holds: !ne.holds,
        witness: ne.witness,
        label_witnesses: None,
        unnecessary_subset: None,
        certificate: ne.certificate,
        stats: ne.stats,
    })
}

fn combinations(pool: &[NodeRef], k: usize) -> Vec<Vec<NodeRef>> {
    fn rec(
        pool: &[NodeRef],
        k: usize,
        start: usize,
        cur: &mut Vec<NodeRef>,
        out: &mut Vec<Vec<NodeRef>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Decides whether every nonempty hidden subset is necessary, refusing
/// networks above the enumeration cap rather than truncating. On failure
/// the reported subset has minimal cardinality.
pub fn decide_anece(net: &Network, opts: &DecideOptions) -> Result<Verdict, Error> {
    decide_anece_capped(net, SUBSET_ENUMERATION_CAP, opts)
}

pub fn decide_anece_capped(
    net: &Network,
    cap: usize,
    opts: &DecideOptions,
) -> Result<Verdict, Error> {
    let hidden = net.hidden_refs();
    if hidden.len() > cap {
        return Err(Error::CapExceeded(hidden.len(), cap));
    }
    let mut stats = SearchStats::default();
    for k in 1..=hidden.len() {
        for subset in combinations(&hidden, k) {
            let v = decide_nece(net, &subset, opts)?;
            stats.absorb(v.stats);
            if !v.holds {
                return Ok(Verdict {
                    holds: false,
                    witness: None,
                    label_witnesses: None,
                    unnecessary_subset: Some(subset),
                    certificate: None,
                    stats,
                });
            }
        }
    }
    Ok(Verdict {
        holds: true,
        witness: None,
        label_witnesses: None,
        unnecessary_subset: None,
        certificate: None,
        stats,
    })
}

/// Equivalence to single-node necessity: a merged network whose last
/// hidden node aggregates the absolute output gaps, so deleting it yields
/// the zero function. The node is unnecessary exactly when the two
/// networks agree.
pub fn ne_to_nece(net1: &Network, net2: &Network) -> Result<(Network, NodeRef), Error> {
    let inst = ProblemInstance::Ne {
        net1: net1.clone(),
        net2: net2.clone(),
    };
    inst.validate()?;
    let m = net1.output_dim();
    let both = stack_parallel(net1, net2, true)?;
    // Signed gaps, rectified in pairs, summed into the single aggregate.
    let mut diff = Vec::with_capacity(2 * m);
    for k in 0..m {
        let mut w = vec![Rational::zero(); 2 * m];
        w[k] = Rational::one();
        w[m + k] = -Rational::one();
        diff.push(Node::new(Activation::ReLU, Rational::zero(), w.clone()));
        diff.push(Node::new(
            Activation::ReLU,
            Rational::zero(),
            w.iter().map(|c| -c).collect(),
        ));
    }
    let with_diff = both.append_layer(diff)?;
    let aggregate = Node::new(
        Activation::Id,
        Rational::zero(),
        vec![Rational::one(); 2 * m],
    );
    let with_y = with_diff.append_layer(vec![aggregate])?;
    let merged = with_y.append_layer(vec![Node::new(
        Activation::Id,
        Rational::zero(),
        unit(1, 0),
    )])?;
    // The aggregate sits in the last hidden layer.
    let y = NodeRef::new(merged.depth() - 1, 0);
    debug_assert!(merged.is_hidden_ref(&y));
    Ok((merged, y))
}

/// Single-output net reading one node's value, for exact zero tests.
fn node_value_net(net: &Network, r: &NodeRef) -> Network {
    let layers: Vec<Vec<Node>> = net.layers()[..r.layer].to_vec();
    let width = layers.last().map(|l| l.len()).unwrap_or(net.input_dim());
    let probe = Node::new(Activation::Id, Rational::zero(), unit(width, r.index));
    Network::new(net.input_dim(), layers)
        .and_then(|n| n.append_layer(vec![probe]))
        .expect("prefix of a valid network stays valid")
}

/// Hidden nodes with no weighted path to any output.
fn unreachable_hidden(net: &Network) -> Vec<NodeRef> {
    let depth = net.depth();
    let mut alive: Vec<Vec<bool>> = net
        .layers()
        .iter()
        .map(|l| vec![false; l.len()])
        .collect();
    for a in alive[depth - 1].iter_mut() {
        *a = true;
    }
    for l in (0..depth - 1).rev() {
        let width = net.layers()[l].len();
        for i in 0..width {
            let feeds_alive = net.layers()[l + 1].iter().enumerate().any(|(k, node)| {
                alive[l + 1][k]
                    && node
                        .weights
                        .get(i)
                        .map(|w| !w.is_zero())
                        .unwrap_or(false)
            });
            alive[l][i] = feeds_alive;
        }
    }
    let mut dead = Vec::new();
    for (l, layer) in alive.iter().enumerate().take(depth - 1) {
        for (i, ok) in layer.iter().enumerate() {
            if !ok {
                dead.push(NodeRef::new(l + 1, i));
            }
        }
    }
    dead
}

/// Equivalence to all-subsets necessity. The difference of the two
/// networks is collapsed to an absolute sum; hidden nodes that are
/// constantly zero (certified by exact equivalence checks against the
/// zero network) and hidden nodes with no path to the output are deleted.
/// When the networks agree nothing survives, so the all-subsets property
/// holds vacuously; otherwise a duplicated aggregate pair is appended
/// whose two nodes are individually necessary but jointly deletable.
pub fn ne_to_anece(
    net1: &Network,
    net2: &Network,
    opts: &DecideOptions,
) -> Result<Network, Error> {
    let inst = ProblemInstance::Ne {
        net1: net1.clone(),
        net2: net2.clone(),
    };
    inst.validate()?;
    let m = net1.output_dim();
    let both = stack_parallel(net1, net2, true)?;
    let mut diff = Vec::with_capacity(m);
    for k in 0..m {
        let mut w = vec![Rational::zero(); 2 * m];
        w[k] = Rational::one();
        w[m + k] = -Rational::one();
        diff.push(Node::new(Activation::Id, Rational::zero(), w));
    }
    let w = crate::net::append_abs_sum(&both.append_layer(diff)?);

    // Exact layer-wise zero tests, certified against the zero network.
    let zero_probe = Network::zero(w.input_dim(), 1);
    let mut zeros = Vec::new();
    for r in w.hidden_refs() {
        let probe = node_value_net(&w, &r);
        let v = decide(
            &ProblemInstance::Ne {
                net1: probe,
                net2: zero_probe.clone(),
            },
            opts,
        )?;
        if v.holds {
            zeros.push(r);
        }
    }
    let pruned = delete_nodes(&w, &zeros)?;
    let cleaned = delete_nodes(&pruned, &unreachable_hidden(&pruned))?;

    if cleaned.hidden_refs().is_empty() {
        return Ok(cleaned);
    }

    // Duplicate the output aggregation into a cancelling pair: each node
    // alone is necessary, the pair together is not.
    let out = cleaned.layers().last().expect("networks have layers")[0].clone();
    let hidden_layers = cleaned.layers()[..cleaned.depth() - 1].to_vec();
    let body = Network::new(cleaned.input_dim(), hidden_layers)?;
    let with_pair = body.append_layer(vec![out.clone(), out])?;
    let final_out = Node::new(
        Activation::Id,
        Rational::zero(),
        vec![Rational::one(), -Rational::one()],
    );
    with_pair.append_layer(vec![final_out])
}
