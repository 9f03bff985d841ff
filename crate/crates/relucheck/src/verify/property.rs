//! Direct evaluation of the defining property at a point.
//!
//! These checks close the loop on every failing verdict: a reported
//! witness must make the instance's property fail under plain exact
//! forward evaluation, with no LP and no pattern machinery involved.

use crate::linspec::{in_ball, satisfied_by};
use crate::net::Network;
use crate::rat::{dist, RatVector, Rational};
use crate::verify::ProblemInstance;
use crate::Error;

/// Labels (1-based) attaining the weak maximum of the output vector.
pub(crate) fn argmax_labels(out: &RatVector) -> Vec<usize> {
    let mut best: Option<&Rational> = None;
    for v in out.iter() {
        best = Some(match best {
            None => v,
            Some(b) if v > b => v,
            Some(b) => b,
        });
    }
    let best = best.expect("nonempty output");
    out.iter()
        .enumerate()
        .filter(|(_, v)| *v == best)
        .map(|(i, _)| i + 1)
        .collect()
}

/// True when no label that is weakly maximal at the ball center stays
/// weakly maximal at `w`; such a point refutes every candidate label of
/// an arbitrary-classification-robustness instance at once.
pub(crate) fn acr_single_refutation(
    net: &Network,
    center: &RatVector,
    w: &RatVector,
) -> Result<bool, Error> {
    let at_center = argmax_labels(&net.evaluate(center)?);
    let at_w = argmax_labels(&net.evaluate(w)?);
    Ok(at_center.iter().all(|j| !at_w.contains(j)))
}

/// Exact check that `w` demonstrates the decisive side of the instance:
/// for reachability it satisfies both specifications (so `holds = true`);
/// for every universally quantified problem it violates the property (so
/// `holds = false`). Pair problems take `w` as the concatenation (x, y).
pub fn witness_confirms(inst: &ProblemInstance, w: &RatVector) -> Result<bool, Error> {
    witness_confirms_opt(inst, w, false)
}

/// Like `witness_confirms`, with the strict-argmax reading of
/// classification robustness.
pub fn witness_confirms_opt(
    inst: &ProblemInstance,
    w: &RatVector,
    strict_argmax: bool,
) -> Result<bool, Error> {
    match inst {
        ProblemInstance::Nnr { net, inspec, outspec } => Ok(satisfied_by(inspec, w)?
            && satisfied_by(outspec, &net.evaluate(w)?)?),
        ProblemInstance::Vip { net, inspec, outspec } => Ok(satisfied_by(inspec, w)?
            && !satisfied_by(outspec, &net.evaluate(w)?)?),
        ProblemInstance::Ne { net1, net2 } => Ok(net1.evaluate(w)? != net2.evaluate(w)?),
        ProblemInstance::Sr {
            net,
            metric,
            eps,
            delta,
            center,
        } => {
            if !in_ball(*metric, center, eps, w)? {
                return Ok(false);
            }
            let gap = dist(*metric, &net.evaluate(w)?, &net.evaluate(center)?)?;
            Ok(!delta.at_least(&gap))
        }
        ProblemInstance::Cr {
            net,
            metric,
            eps,
            center,
            label,
        } => {
            if !in_ball(*metric, center, eps, w)? {
                return Ok(false);
            }
            let out = net.evaluate(w)?;
            let j = label - 1;
            Ok((0..out.dim()).any(|i| {
                i != j
                    && if strict_argmax {
                        out[i] >= out[j]
                    } else {
                        out[i] > out[j]
                    }
            }))
        }
        ProblemInstance::Acr {
            net,
            metric,
            eps,
            center,
        } => {
            if !in_ball(*metric, center, eps, w)? {
                return Ok(false);
            }
            acr_single_refutation(net, center, w)
        }
        ProblemInstance::Lr {
            net,
            metric,
            eps,
            lip,
            center,
        } => {
            if !in_ball(*metric, center, eps, w)? {
                return Ok(false);
            }
            let r = dist(*metric, w, center)?;
            let gap = dist(*metric, &net.evaluate(w)?, &net.evaluate(center)?)?;
            let lip = lip.finite().expect("validated finite");
            Ok(gap > lip * &r)
        }
        ProblemInstance::Gsr {
            net,
            metric,
            eps,
            delta,
        } => {
            let n = net.input_dim();
            if w.dim() != 2 * n {
                return Err(Error::DimMismatch {
                    expected: 2 * n,
                    got: w.dim(),
                });
            }
            let (x, y) = (w.take(n), w.skip(n));
            if !eps.at_least(&dist(*metric, &x, &y)?) {
                return Ok(false);
            }
            let gap = dist(*metric, &net.evaluate(&x)?, &net.evaluate(&y)?)?;
            Ok(!delta.at_least(&gap))
        }
        ProblemInstance::Glr {
            net,
            metric,
            eps,
            lip,
        } => {
            let n = net.input_dim();
            if w.dim() != 2 * n {
                return Err(Error::DimMismatch {
                    expected: 2 * n,
                    got: w.dim(),
                });
            }
            let (x, y) = (w.take(n), w.skip(n));
            let r = dist(*metric, &x, &y)?;
            if !eps.at_least(&r) {
                return Ok(false);
            }
            let gap = dist(*metric, &net.evaluate(&x)?, &net.evaluate(&y)?)?;
            let lip = lip.finite().expect("validated finite");
            Ok(gap > lip * &r)
        }
    }
}

/// ACR refutations are per-label: each listed point must beat its label
/// inside the ball.
pub fn label_witness_confirms(
    inst: &ProblemInstance,
    label: usize,
    w: &RatVector,
) -> Result<bool, Error> {
    let ProblemInstance::Acr {
        net,
        metric,
        eps,
        center,
    } = inst
    else {
        return Err(Error::BadInstance(
            "label witnesses only exist for ACR instances".into(),
        ));
    };
    let sub = ProblemInstance::Cr {
        net: net.clone(),
        metric: *metric,
        eps: eps.clone(),
        center: center.clone(),
        label,
    };
    witness_confirms(&sub, w)
}
