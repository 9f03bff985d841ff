//! Feedforward networks of ReLU and identity nodes with rational weights,
//! exact evaluation, and the structural builders the reductions are made
//! of: parallel stacking, input freezing, identity elimination, node
//! deletion, absolute-value summation and sequential composition.
//!
//! Layer 0 is the input layer and carries no weights or biases. A node
//! whose weight list is empty is detached and computes its activation
//! applied to the bias alone (the empty sum). Networks are immutable;
//! every builder returns a fresh value.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rat::{RatVector, Rational};
use crate::Error;

/// Node activation; the set F of a network is the set of tags present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    #[serde(rename = "relu")]
    ReLU,
    #[serde(rename = "id")]
    Id,
}

impl Activation {
    pub fn apply(&self, t: Rational) -> Rational {
        match self {
            Activation::Id => t,
            Activation::ReLU => {
                if t.is_negative() {
                    Rational::zero()
                } else {
                    t
                }
            }
        }
    }
}

/// One computation node: an activation over an affine combination of the
/// previous layer. An empty weight list means detached.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub activation: Activation,
    pub bias: Rational,
    pub weights: Vec<Rational>,
}

impl Node {
    pub fn new(activation: Activation, bias: Rational, weights: Vec<Rational>) -> Self {
        Node {
            activation,
            bias,
            weights,
        }
    }

    pub fn detached(activation: Activation, bias: Rational) -> Self {
        Node {
            activation,
            bias,
            weights: vec![],
        }
    }

    pub fn is_detached(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Addresses one node by layer number, counting the input layer as 0.
/// Only hidden nodes are addressable for deletion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub layer: usize,
    pub index: usize,
}

impl NodeRef {
    pub fn new(layer: usize, index: usize) -> Self {
        NodeRef { layer, index }
    }
}

impl std::fmt::Display for NodeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.layer, self.index)
    }
}

impl std::str::FromStr for NodeRef {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, i) = s
            .split_once(':')
            .ok_or_else(|| Error::Malformed(format!("node ref '{}' is not layer:index", s)))?;
        let layer = l
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("bad layer in node ref '{}'", s)))?;
        let index = i
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("bad index in node ref '{}'", s)))?;
        Ok(NodeRef { layer, index })
    }
}

/// A layered feedforward network. `layers` holds the computation layers;
/// the last one is the output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Vec<Node>>,
}

impl Network {
    /// Validates widths: every non-detached node must have exactly one
    /// weight per node of the previous layer, and there must be at least
    /// one computation layer.
    pub fn new(input_dim: usize, layers: Vec<Vec<Node>>) -> Result<Self, Error> {
        if layers.is_empty() {
            return Err(Error::Malformed(
                "a network needs at least an output layer".into(),
            ));
        }
        let mut prev = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            for (i, node) in layer.iter().enumerate() {
                if !node.weights.is_empty() && node.weights.len() != prev {
                    return Err(Error::Malformed(format!(
                        "node {}:{} has {} weights but the previous layer has width {}",
                        l + 1,
                        i,
                        node.weights.len(),
                        prev
                    )));
                }
            }
            prev = layer.len();
        }
        Ok(Network { input_dim, layers })
    }

    /// The n-dimensional identity map: no hidden nodes, id outputs.
    pub fn identity(n: usize) -> Network {
        let layer = (0..n)
            .map(|i| {
                let mut w = vec![Rational::zero(); n];
                w[i] = Rational::one();
                Node::new(Activation::Id, Rational::zero(), w)
            })
            .collect();
        Network {
            input_dim: n,
            layers: vec![layer],
        }
    }

    /// The constant-zero map with explicit all-zero weights.
    pub fn zero(n: usize, m: usize) -> Network {
        let layer = (0..m)
            .map(|_| Node::new(Activation::Id, Rational::zero(), vec![Rational::zero(); n]))
            .collect();
        Network {
            input_dim: n,
            layers: vec![layer],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.len()).unwrap_or(0)
    }

    /// Computation layers (the input layer is implicit).
    pub fn layers(&self) -> &[Vec<Node>] {
        &self.layers
    }

    /// Number of computation layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn node_count(&self) -> usize {
        self.input_dim + self.layers.iter().map(|l| l.len()).sum::<usize>()
    }

    /// ReLU nodes in topological (layer-major) order.
    pub fn relu_nodes(&self) -> Vec<NodeRef> {
        let mut refs = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (i, node) in layer.iter().enumerate() {
                if node.activation == Activation::ReLU {
                    refs.push(NodeRef::new(l + 1, i));
                }
            }
        }
        refs
    }

    pub fn relu_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.iter())
            .filter(|n| n.activation == Activation::ReLU)
            .count()
    }

    /// Hidden-node references (everything except input and output layers).
    pub fn hidden_refs(&self) -> Vec<NodeRef> {
        let mut refs = Vec::new();
        for (l, layer) in self.layers.iter().enumerate().take(self.layers.len() - 1) {
            for i in 0..layer.len() {
                refs.push(NodeRef::new(l + 1, i));
            }
        }
        refs
    }

    pub fn is_hidden_ref(&self, r: &NodeRef) -> bool {
        r.layer >= 1
            && r.layer < self.layers.len()
            && r.index < self.layers[r.layer - 1].len()
    }

    /// True when no hidden node uses the identity activation.
    pub fn hidden_ids_absent(&self) -> bool {
        self.layers[..self.layers.len() - 1]
            .iter()
            .flat_map(|l| l.iter())
            .all(|n| n.activation == Activation::ReLU)
    }

    fn pre_activation(node: &Node, prev: &[Rational]) -> Rational {
        let mut acc = node.bias.clone();
        for (w, v) in node.weights.iter().zip(prev.iter()) {
            acc += &(w * v);
        }
        acc
    }

    /// Exact forward pass.
    pub fn evaluate(&self, x: &RatVector) -> Result<RatVector, Error> {
        if x.dim() != self.input_dim {
            return Err(Error::DimMismatch {
                expected: self.input_dim,
                got: x.dim(),
            });
        }
        let mut prev: Vec<Rational> = x.as_slice().to_vec();
        for layer in &self.layers {
            let mut next = Vec::with_capacity(layer.len());
            for node in layer {
                let pre = Self::pre_activation(node, &prev);
                next.push(node.activation.apply(pre));
            }
            prev = next;
        }
        Ok(RatVector::new(prev))
    }

    /// One phase per ReLU node in topological order; a pre-activation of
    /// exactly zero reports Active (both pieces agree there).
    pub fn pattern_of(&self, x: &RatVector) -> Result<ActivationPattern, Error> {
        if x.dim() != self.input_dim {
            return Err(Error::DimMismatch {
                expected: self.input_dim,
                got: x.dim(),
            });
        }
        let mut prev: Vec<Rational> = x.as_slice().to_vec();
        let mut phases = Vec::new();
        for layer in &self.layers {
            let mut next = Vec::with_capacity(layer.len());
            for node in layer {
                let pre = Self::pre_activation(node, &prev);
                if node.activation == Activation::ReLU {
                    phases.push(if pre.is_negative() {
                        Phase::Inactive
                    } else {
                        Phase::Active
                    });
                }
                next.push(node.activation.apply(pre));
            }
            prev = next;
        }
        Ok(ActivationPattern(phases))
    }

    /// Appends one computation layer; the new layer becomes the output.
    pub fn append_layer(&self, nodes: Vec<Node>) -> Result<Network, Error> {
        let mut layers = self.layers.clone();
        layers.push(nodes);
        Network::new(self.input_dim, layers)
    }

    /// Appends an identity passthrough layer (preserves the function).
    pub fn append_identity_layer(&self) -> Network {
        let m = self.output_dim();
        let layer = (0..m)
            .map(|i| {
                let mut w = vec![Rational::zero(); m];
                w[i] = Rational::one();
                Node::new(Activation::Id, Rational::zero(), w)
            })
            .collect();
        let mut layers = self.layers.clone();
        layers.push(layer);
        Network {
            input_dim: self.input_dim,
            layers,
        }
    }

    /// Sequential composition: `self.then(g)` computes `g(self(x))`.
    pub fn then(&self, g: &Network) -> Result<Network, Error> {
        if g.input_dim != self.output_dim() {
            return Err(Error::DimMismatch {
                expected: self.output_dim(),
                got: g.input_dim,
            });
        }
        let mut layers = self.layers.clone();
        layers.extend(g.layers.iter().cloned());
        Network::new(self.input_dim, layers)
    }
}

/// Phase of a ReLU node: which affine piece it is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "active")]
    Active,
    #[serde(rename = "inactive")]
    Inactive,
}

/// One phase per ReLU node in topological order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivationPattern(pub Vec<Phase>);

impl ActivationPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Runs `a` and `b` side by side. With `share_input` both copies read the
/// same input (dimensions must agree); otherwise the input is the
/// concatenation and each copy reads its half. Depths are equalized by
/// appending identity layers to the shallower network.
pub fn stack_parallel(a: &Network, b: &Network, share_input: bool) -> Result<Network, Error> {
    if share_input && a.input_dim != b.input_dim {
        return Err(Error::DimMismatch {
            expected: a.input_dim,
            got: b.input_dim,
        });
    }
    let mut a = a.clone();
    let mut b = b.clone();
    while a.depth() < b.depth() {
        a = a.append_identity_layer();
    }
    while b.depth() < a.depth() {
        b = b.append_identity_layer();
    }
    let input_dim = if share_input {
        a.input_dim
    } else {
        a.input_dim + b.input_dim
    };
    let mut layers = Vec::with_capacity(a.depth());
    for (l, (la, lb)) in a.layers.iter().zip(b.layers.iter()).enumerate() {
        let (prev_a, prev_b) = if l == 0 {
            (a.input_dim, b.input_dim)
        } else {
            (a.layers[l - 1].len(), b.layers[l - 1].len())
        };
        let shared_first = l == 0 && share_input;
        let mut layer = Vec::with_capacity(la.len() + lb.len());
        for node in la {
            if node.is_detached() || shared_first {
                layer.push(node.clone());
            } else {
                let mut w = node.weights.clone();
                w.resize(prev_a + prev_b, Rational::zero());
                layer.push(Node::new(node.activation, node.bias.clone(), w));
            }
        }
        for node in lb {
            if node.is_detached() || shared_first {
                layer.push(node.clone());
            } else {
                let mut w = vec![Rational::zero(); prev_a];
                w.extend(node.weights.iter().cloned());
                layer.push(Node::new(node.activation, node.bias.clone(), w));
            }
        }
        layers.push(layer);
    }
    Network::new(input_dim, layers)
}

/// Disconnects the input: the old input layer becomes a layer of detached
/// bias nodes holding `x_bar`, so the result computes `net(x_bar)` for
/// every input.
pub fn freeze_input(net: &Network, x_bar: &RatVector) -> Result<Network, Error> {
    if x_bar.dim() != net.input_dim {
        return Err(Error::DimMismatch {
            expected: net.input_dim,
            got: x_bar.dim(),
        });
    }
    let frozen: Vec<Node> = x_bar
        .iter()
        .map(|v| Node::detached(Activation::Id, v.clone()))
        .collect();
    let mut layers = vec![frozen];
    layers.extend(net.layers.iter().cloned());
    Network::new(net.input_dim, layers)
}

/// Replaces every hidden identity node by the ReLU pair
/// `ReLU(t) - ReLU(-t)`; consumers read the pair with opposite signs.
/// Output-layer nodes are untouched. The computed function is identical.
pub fn id_to_relu(net: &Network) -> Network {
    // For each layer, map old node index to its new indices with signs.
    let mut prev_map: Vec<Vec<(usize, bool)>> = (0..net.input_dim)
        .map(|i| vec![(i, true)])
        .collect();
    let mut prev_new_width = net.input_dim;
    let mut layers = Vec::with_capacity(net.depth());
    let last = net.depth() - 1;
    for (l, layer) in net.layers.iter().enumerate() {
        let mut new_layer: Vec<Node> = Vec::new();
        let mut map: Vec<Vec<(usize, bool)>> = Vec::with_capacity(layer.len());
        for node in layer {
            let weights = if node.is_detached() {
                vec![]
            } else {
                let mut w = vec![Rational::zero(); prev_new_width];
                for (j, wj) in node.weights.iter().enumerate() {
                    for &(nj, positive) in &prev_map[j] {
                        w[nj] = if positive { wj.clone() } else { -wj };
                    }
                }
                w
            };
            if l != last && node.activation == Activation::Id {
                let pos = Node::new(Activation::ReLU, node.bias.clone(), weights.clone());
                let neg = Node::new(
                    Activation::ReLU,
                    -&node.bias,
                    weights.iter().map(|w| -w).collect(),
                );
                let at = new_layer.len();
                new_layer.push(pos);
                new_layer.push(neg);
                map.push(vec![(at, true), (at + 1, false)]);
            } else {
                let at = new_layer.len();
                new_layer.push(Node::new(node.activation, node.bias.clone(), weights));
                map.push(vec![(at, true)]);
            }
        }
        prev_new_width = new_layer.len();
        prev_map = map;
        layers.push(new_layer);
    }
    Network::new(net.input_dim, layers).expect("width bookkeeping is consistent")
}

/// The induced subnetwork after deleting the hidden nodes in `refs`.
/// Surviving weights, biases and activations are unchanged; nodes left
/// with no incoming edges compute the activation of their bias.
pub fn delete_nodes(net: &Network, refs: &[NodeRef]) -> Result<Network, Error> {
    for r in refs {
        if !net.is_hidden_ref(r) {
            return Err(Error::BadNodeRef {
                layer: r.layer,
                index: r.index,
            });
        }
    }
    let mut layers = Vec::with_capacity(net.depth());
    // kept[j] = Some(position among survivors) for nodes of the previous layer.
    let mut prev_kept: Vec<bool> = vec![true; net.input_dim];
    for (l, layer) in net.layers.iter().enumerate() {
        let mut new_layer = Vec::new();
        let mut kept = Vec::with_capacity(layer.len());
        for (i, node) in layer.iter().enumerate() {
            let gone = refs.contains(&NodeRef::new(l + 1, i));
            kept.push(!gone);
            if gone {
                continue;
            }
            let weights = if node.is_detached() {
                vec![]
            } else {
                node.weights
                    .iter()
                    .zip(prev_kept.iter())
                    .filter(|(_, &k)| k)
                    .map(|(w, _)| w.clone())
                    .collect()
            };
            new_layer.push(Node::new(node.activation, node.bias.clone(), weights));
        }
        prev_kept = kept;
        layers.push(new_layer);
    }
    Network::new(net.input_dim, layers)
}

/// Collapses the output to the single value `sum_i |out_i|`, built from
/// ReLU pairs feeding one summing node.
pub fn append_abs_sum(net: &Network) -> Network {
    let m = net.output_dim();
    let mut pairs = Vec::with_capacity(2 * m);
    for i in 0..m {
        let mut plus = vec![Rational::zero(); m];
        plus[i] = Rational::one();
        pairs.push(Node::new(Activation::ReLU, Rational::zero(), plus));
        let mut minus = vec![Rational::zero(); m];
        minus[i] = -Rational::one();
        pairs.push(Node::new(Activation::ReLU, Rational::zero(), minus));
    }
    let sum = Node::new(
        Activation::Id,
        Rational::zero(),
        vec![Rational::one(); 2 * m],
    );
    net.append_layer(pairs)
        .and_then(|n| n.append_layer(vec![sum]))
        .expect("abs-sum layers are width-consistent")
}

// ---------------------------------------------------------------------
// JSON format: { "layers": [ [ {"act":..,"bias":..,"weights":[..]} ] ] }
// with layer 0 listed as bare input markers carrying no weights or bias.
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeJson {
    act: Activation,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    layers: Vec<Vec<NodeJson>>,
}

impl Serialize for Network {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(
            (0..self.input_dim)
                .map(|_| NodeJson {
                    act: Activation::Id,
                    bias: None,
                    weights: None,
                })
                .collect(),
        );
        for layer in &self.layers {
            layers.push(
                layer
                    .iter()
                    .map(|n| NodeJson {
                        act: n.activation,
                        bias: Some(n.bias.clone()),
                        weights: Some(n.weights.clone()),
                    })
                    .collect(),
            );
        }
        NetworkJson { layers }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = NetworkJson::deserialize(deserializer)?;
        if raw.layers.len() < 2 {
            return Err(D::Error::custom(
                "a network needs an input layer and at least one computation layer",
            ));
        }
        let input_dim = raw.layers[0].len();
        for n in &raw.layers[0] {
            if n.bias.is_some() || n.weights.is_some() {
                return Err(D::Error::custom("input nodes carry no weights or bias"));
            }
        }
        let mut layers = Vec::with_capacity(raw.layers.len() - 1);
        for layer in raw.layers.into_iter().skip(1) {
            let mut nodes = Vec::with_capacity(layer.len());
            for n in layer {
                nodes.push(Node::new(
                    n.act,
                    n.bias
                        .ok_or_else(|| D::Error::custom("computation node without bias"))?,
                    n.weights
                        .ok_or_else(|| D::Error::custom("computation node without weights"))?,
                ));
            }
            layers.push(nodes);
        }
        Network::new(input_dim, layers).map_err(D::Error::custom)
    }
}
