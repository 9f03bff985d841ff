//! Affine forms over the search variables.
//!
//! Under a fixed activation pattern every node output is an affine
//! function of the network inputs. The search keeps these forms
//! substituted down to input space, so region and branch rows stay small
//! regardless of network depth.

use crate::net::{ActivationPattern, Network, Phase};
use crate::rat::{RatVector, Rational};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Form {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl Form {
    pub fn zero(dim: usize) -> Form {
        Form {
            coeffs: vec![Rational::zero(); dim],
            constant: Rational::zero(),
        }
    }

    pub fn unit(dim: usize, i: usize) -> Form {
        let mut coeffs = vec![Rational::zero(); dim];
        coeffs[i] = Rational::one();
        Form {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Form {
        Form {
            coeffs: vec![Rational::zero(); dim],
            constant: c,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add_scaled(&mut self, w: &Rational, other: &Form) {
        if w.is_zero() {
            return;
        }
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += &(w * b);
        }
        self.constant += &(w * &other.constant);
    }

    pub fn eval(&self, x: &RatVector) -> Rational {
        let mut acc = self.constant.clone();
        for (c, v) in self.coeffs.iter().zip(x.iter()) {
            acc += &(c * v);
        }
        acc
    }
}

/// Node forms for a full pattern: one form per computation node, preceded
/// by the unit forms of the inputs. Panics if the pattern length does not
/// match the ReLU count.
pub(crate) fn forms_under_pattern(net: &Network, pattern: &ActivationPattern) -> Vec<Form> {
    let n = net.input_dim();
    let mut forms: Vec<Form> = (0..n).map(|i| Form::unit(n, i)).collect();
    let mut relu_at = 0usize;
    let mut prev_offset = 0usize;
    let mut prev_width = n;
    for layer in net.layers() {
        let offset = forms.len();
        for node in layer {
            let mut pre = Form::constant(n, node.bias.clone());
            for (j, w) in node.weights.iter().enumerate() {
                debug_assert!(j < prev_width);
                let prev = forms[prev_offset + j].clone();
                pre.add_scaled(w, &prev);
            }
            let out = match node.activation {
                crate::net::Activation::Id => pre,
                crate::net::Activation::ReLU => {
                    let phase = pattern.0[relu_at];
                    relu_at += 1;
                    match phase {
                        Phase::Active => pre,
                        Phase::Inactive => Form::zero(n),
                    }
                }
            };
            forms.push(out);
        }
        prev_offset = offset;
        prev_width = layer.len();
    }
    debug_assert_eq!(relu_at, pattern.len());
    forms
}

/// Pre-activation forms of the ReLU nodes under a full pattern, in
/// topological order, paired with the phase. Used to rebuild region rows.
pub(crate) fn relu_pre_forms(
    net: &Network,
    pattern: &ActivationPattern,
) -> Vec<(Form, Phase)> {
    let n = net.input_dim();
    let mut forms: Vec<Form> = (0..n).map(|i| Form::unit(n, i)).collect();
    let mut pres = Vec::with_capacity(pattern.len());
    let mut relu_at = 0usize;
    let mut prev_offset = 0usize;
    for layer in net.layers() {
        let offset = forms.len();
        for node in layer {
            let mut pre = Form::constant(n, node.bias.clone());
            for (j, w) in node.weights.iter().enumerate() {
                let prev = forms[prev_offset + j].clone();
                pre.add_scaled(w, &prev);
            }
            let out = match node.activation {
                crate::net::Activation::Id => pre,
                crate::net::Activation::ReLU => {
                    let phase = pattern.0[relu_at];
                    relu_at += 1;
                    pres.push((pre.clone(), phase));
                    match phase {
                        Phase::Active => pre,
                        Phase::Inactive => Form::zero(n),
                    }
                }
            };
            forms.push(out);
        }
        prev_offset = offset;
    }
    pres
}

/// Output forms of the network under a full pattern.
pub(crate) fn output_forms(net: &Network, pattern: &ActivationPattern) -> Vec<Form> {
    let forms = forms_under_pattern(net, pattern);
    let m = net.output_dim();
    forms[forms.len() - m..].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Activation, Network, Node};
    use crate::rat::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn pattern_forms_agree_with_evaluation() {
        // x -> (ReLU(x), ReLU(-x)) -> y1 - y2
        let net = Network::new(
            1,
            vec![
                vec![
                    Node::new(Activation::ReLU, q("0"), vec![q("1")]),
                    Node::new(Activation::ReLU, q("0"), vec![q("-1")]),
                ],
                vec![Node::new(Activation::Id, q("0"), vec![q("1"), q("-1")])],
            ],
        )
        .unwrap();
        for s in ["-3", "0", "5/2"] {
            let x = RatVector::new(vec![q(s)]);
            let pat = net.pattern_of(&x).unwrap();
            let outs = output_forms(&net, &pat);
            assert_eq!(outs.len(), 1);
            assert_eq!(outs[0].eval(&x), net.evaluate(&x).unwrap()[0]);
        }
    }
}
