//! Decision procedures for the network verification problems.
//!
//! Every universally quantified property is decided by a complement
//! search: a depth-first walk over activation patterns in topological
//! order (Inactive branch first) whose partial regions are pruned by exact
//! LP feasibility, with the per-problem disjunction of violation rows
//! checked at each feasible leaf. A failing verdict carries an exact
//! witness and a certificate (pattern plus violated branch) that a single
//! LP re-validates; a holding verdict means the whole search space is
//! exhausted.

mod encode;
mod exhaustive;
mod forms;
mod property;
mod sample;
mod search;

pub use exhaustive::decide_exhaustive;
pub use property::{label_witness_confirms, witness_confirms, witness_confirms_opt};
pub use sample::sample_falsify;

use serde::{Deserialize, Serialize};

use crate::linspec::LinSpec;
use crate::net::{ActivationPattern, Network};
use crate::rat::{ExtRational, Metric, RatVector};
use crate::Error;

pub(crate) use encode::{build_model, ModelOutcome};
#[allow(unused_imports)]
pub(crate) use encode::SearchModel;

/// Instance of one of the decision problems. Labels are 1-based.
#[derive(Clone, Debug)]
pub enum ProblemInstance {
    Nnr {
        net: Network,
        inspec: LinSpec,
        outspec: LinSpec,
    },
    Vip {
        net: Network,
        inspec: LinSpec,
        outspec: LinSpec,
    },
    Ne {
        net1: Network,
        net2: Network,
    },
    Sr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        delta: ExtRational,
        center: RatVector,
    },
    Cr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        center: RatVector,
        label: usize,
    },
    Acr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        center: RatVector,
    },
    Lr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        lip: ExtRational,
        center: RatVector,
    },
    Gsr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        delta: ExtRational,
    },
    Glr {
        net: Network,
        metric: Metric,
        eps: ExtRational,
        lip: ExtRational,
    },
}

impl ProblemInstance {
    pub fn problem_name(&self) -> &'static str {
        match self {
            ProblemInstance::Nnr { .. } => "nnr",
            ProblemInstance::Vip { .. } => "vip",
            ProblemInstance::Ne { .. } => "ne",
            ProblemInstance::Sr { .. } => "sr",
            ProblemInstance::Cr { .. } => "cr",
            ProblemInstance::Acr { .. } => "acr",
            ProblemInstance::Lr { .. } => "lr",
            ProblemInstance::Gsr { .. } => "gsr",
            ProblemInstance::Glr { .. } => "glr",
        }
    }

    /// Structural validation: dimensions, label ranges, metric support and
    /// the placement of infinities.
    pub fn validate(&self) -> Result<(), Error> {
        fn nonneg(v: &ExtRational, what: &str) -> Result<(), Error> {
            if v.is_negative() {
                Err(Error::BadInstance(format!("{} must be nonnegative", what)))
            } else {
                Ok(())
            }
        }
        match self {
            ProblemInstance::Nnr { net, inspec, outspec }
            | ProblemInstance::Vip { net, inspec, outspec } => {
                if inspec.dim != net.input_dim() {
                    return Err(Error::BadInstance(format!(
                        "input spec has dimension {} but the network reads {} inputs",
                        inspec.dim,
                        net.input_dim()
                    )));
                }
                if outspec.dim != net.output_dim() {
                    return Err(Error::BadInstance(format!(
                        "output spec has dimension {} but the network writes {} outputs",
                        outspec.dim,
                        net.output_dim()
                    )));
                }
                Ok(())
            }
            ProblemInstance::Ne { net1, net2 } => {
                if net1.input_dim() != net2.input_dim() {
                    return Err(Error::DimMismatch {
                        expected: net1.input_dim(),
                        got: net2.input_dim(),
                    });
                }
                if net1.output_dim() != net2.output_dim() {
                    return Err(Error::DimMismatch {
                        expected: net1.output_dim(),
                        got: net2.output_dim(),
                    });
                }
                Ok(())
            }
            ProblemInstance::Sr {
                net,
                eps,
                delta,
                center,
                ..
            } => {
                if center.dim() != net.input_dim() {
                    return Err(Error::DimMismatch {
                        expected: net.input_dim(),
                        got: center.dim(),
                    });
                }
                nonneg(eps, "eps")?;
                nonneg(delta, "delta")
            }
            ProblemInstance::Cr {
                net,
                eps,
                center,
                label,
                ..
            } => {
                if center.dim() != net.input_dim() {
                    return Err(Error::DimMismatch {
                        expected: net.input_dim(),
                        got: center.dim(),
                    });
                }
                if *label < 1 || *label > net.output_dim() {
                    return Err(Error::BadInstance(format!(
                        "label {} out of range 1..={}",
                        label,
                        net.output_dim()
                    )));
                }
                nonneg(eps, "eps")
            }
            ProblemInstance::Acr { net, eps, center, .. } => {
                if center.dim() != net.input_dim() {
                    return Err(Error::DimMismatch {
                        expected: net.input_dim(),
                        got: center.dim(),
                    });
                }
                if net.output_dim() == 0 {
                    return Err(Error::BadInstance("network has no outputs".into()));
                }
                nonneg(eps, "eps")
            }
            ProblemInstance::Lr {
                net,
                metric,
                eps,
                lip,
                center,
            } => {
                if *metric != Metric::Linf {
                    return Err(Error::UnsupportedMetric(*metric));
                }
                if center.dim() != net.input_dim() {
                    return Err(Error::DimMismatch {
                        expected: net.input_dim(),
                        got: center.dim(),
                    });
                }
                if lip.is_infinite() {
                    return Err(Error::InfinityNotAllowed("the Lipschitz constant"));
                }
                nonneg(eps, "eps")?;
                nonneg(lip, "lip")
            }
            ProblemInstance::Gsr {
                metric, eps, delta, ..
            } => {
                if *metric != Metric::Linf {
                    return Err(Error::UnsupportedMetric(*metric));
                }
                nonneg(eps, "eps")?;
                nonneg(delta, "delta")
            }
            ProblemInstance::Glr {
                metric, eps, lip, ..
            } => {
                if *metric != Metric::Linf {
                    return Err(Error::UnsupportedMetric(*metric));
                }
                if lip.is_infinite() {
                    return Err(Error::InfinityNotAllowed("the Lipschitz constant"));
                }
                nonneg(eps, "eps")?;
                nonneg(lip, "lip")
            }
        }
    }
}

/// Knobs for the deciders. The default is sequential and deterministic:
/// the first witness found is reproducible. Parallel mode may return a
/// different but equally valid witness; the verdict itself is
/// schedule-independent.
#[derive(Clone, Debug, Default)]
pub struct DecideOptions {
    /// Require the label to be the unique argmax instead of a maximal one.
    pub strict_argmax: bool,
    /// Explore violation branches on a worker pool.
    pub parallel: bool,
}

/// Search effort counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub lp_solved: usize,
    pub patterns_explored: usize,
}

impl SearchStats {
    pub(crate) fn absorb(&mut self, other: SearchStats) {
        self.lp_solved += other.lp_solved;
        self.patterns_explored += other.patterns_explored;
    }
}

/// The co-NP style certificate: a full activation pattern plus the index
/// of the violated branch in the instance's canonical branch list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pattern: ActivationPattern,
    pub branch: usize,
}

/// Decision outcome. For the universally quantified problems a failing
/// verdict carries a witness at which direct evaluation violates the
/// property; for reachability the witness accompanies `holds = true` and
/// satisfies both specifications. ACR refutations list one ball point per
/// label at which that label is beaten.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<RatVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_witnesses: Option<Vec<(usize, RatVector)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unnecessary_subset: Option<Vec<crate::net::NodeRef>>,
    pub certificate: Option<Certificate>,
    pub stats: SearchStats,
}

impl Verdict {
    fn clean(holds: bool, stats: SearchStats) -> Verdict {
        Verdict {
            holds,
            witness: None,
            label_witnesses: None,
            unnecessary_subset: None,
            certificate: None,
            stats,
        }
    }
}

/// Decides any instance. See the per-problem helpers for the exact
/// semantics of each verdict.
pub fn decide(inst: &ProblemInstance, opts: &DecideOptions) -> Result<Verdict, Error> {
    inst.validate()?;
    match inst {
        ProblemInstance::Acr {
            net,
            metric,
            eps,
            center,
        } => decide_acr_by_labels(net, *metric, eps, center, opts),
        ProblemInstance::Gsr {
            net, eps, delta, ..
        } if eps.is_infinite() && !delta.is_infinite() => {
            search::decide_gsr_unbounded(inst, net, delta.finite().expect("finite"), opts)
        }
        _ => match build_model(inst, opts)? {
            ModelOutcome::Trivial(holds) => Ok(Verdict::clean(holds, SearchStats::default())),
            ModelOutcome::Search(model) => Ok(search::run(&model, inst, opts)),
        },
    }
}

fn decide_acr_by_labels(
    net: &Network,
    metric: Metric,
    eps: &ExtRational,
    center: &RatVector,
    opts: &DecideOptions,
) -> Result<Verdict, Error> {
    let m = net.output_dim();
    let mut stats = SearchStats::default();
    let mut refutations = Vec::with_capacity(m);
    for label in 1..=m {
        let sub = ProblemInstance::Cr {
            net: net.clone(),
            metric,
            eps: eps.clone(),
            center: center.clone(),
            label,
        };
        let v = decide(&sub, opts)?;
        stats.absorb(v.stats);
        if v.holds {
            let mut out = Verdict::clean(true, stats);
            out.label_witnesses = None;
            return Ok(out);
        }
        let w = v
            .witness
            .expect("a failing classification verdict carries a witness");
        refutations.push((label, w));
    }
    // A single point refutes ACR outright when every label that is
    // maximal at the center loses there; surface one if any of the
    // per-label witnesses qualifies.
    let single = refutations
        .iter()
        .map(|(_, w)| w)
        .find(|w| property::acr_single_refutation(net, center, w).unwrap_or(false))
        .cloned();
    Ok(Verdict {
        holds: false,
        witness: single,
        label_witnesses: Some(refutations),
        unnecessary_subset: None,
        certificate: None,
        stats,
    })
}

/// Re-validates a certificate with a single LP: the pattern's region rows
/// plus the chosen branch rows plus the instance's input rows must be
/// feasible together.
pub fn check_certificate(
    inst: &ProblemInstance,
    cert: &Certificate,
    opts: &DecideOptions,
) -> Result<bool, Error> {
    inst.validate()?;
    let model = match build_model(inst, opts)? {
        ModelOutcome::Trivial(_) => {
            return Err(Error::BadInstance(
                "instance decided trivially; it has no certificates".into(),
            ))
        }
        ModelOutcome::Search(m) => m,
    };
    encode::certificate_feasible(&model, cert)
}

// ---------------------------------------------------------------------
// Instance JSON:
// {"problem":"vip"|..., "net":..., "net2":..., "inspec":..., "outspec":...,
//  "metric":"l1"|"linf", "eps":"p/q"|"inf", "delta":..., "lip":...,
//  "center":[...], "label": j}
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    problem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    net: Option<Network>,
    #[serde(skip_serializing_if = "Option::is_none")]
    net2: Option<Network>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inspec: Option<LinSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outspec: Option<LinSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<ExtRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<ExtRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lip: Option<ExtRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<RatVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

impl Serialize for ProblemInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut j = InstanceJson {
            problem: self.problem_name().to_string(),
            net: None,
            net2: None,
            inspec: None,
            outspec: None,
            metric: None,
            eps: None,
            delta: None,
            lip: None,
            center: None,
            label: None,
        };
        match self {
            ProblemInstance::Nnr { net, inspec, outspec }
            | ProblemInstance::Vip { net, inspec, outspec } => {
                j.net = Some(net.clone());
                j.inspec = Some(inspec.clone());
                j.outspec = Some(outspec.clone());
            }
            ProblemInstance::Ne { net1, net2 } => {
                j.net = Some(net1.clone());
                j.net2 = Some(net2.clone());
            }
            ProblemInstance::Sr {
                net,
                metric,
                eps,
                delta,
                center,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.delta = Some(delta.clone());
                j.center = Some(center.clone());
            }
            ProblemInstance::Cr {
                net,
                metric,
                eps,
                center,
                label,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.center = Some(center.clone());
                j.label = Some(*label);
            }
            ProblemInstance::Acr {
                net,
                metric,
                eps,
                center,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.center = Some(center.clone());
            }
            ProblemInstance::Lr {
                net,
                metric,
                eps,
                lip,
                center,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.lip = Some(lip.clone());
                j.center = Some(center.clone());
            }
            ProblemInstance::Gsr {
                net,
                metric,
                eps,
                delta,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.delta = Some(delta.clone());
            }
            ProblemInstance::Glr {
                net,
                metric,
                eps,
                lip,
            } => {
                j.net = Some(net.clone());
                j.metric = Some(*metric);
                j.eps = Some(eps.clone());
                j.lip = Some(lip.clone());
            }
        }
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProblemInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let j = InstanceJson::deserialize(d)?;
        fn need<T, E: DeError>(v: Option<T>, what: &str, prob: &str) -> Result<T, E> {
            v.ok_or_else(|| E::custom(format!("{} instance needs '{}'", prob, what)))
        }
        let p = j.problem.to_ascii_lowercase();
        let inst = match p.as_str() {
            "nnr" | "vip" => {
                let net = need(j.net, "net", &p)?;
                let inspec = need(j.inspec, "inspec", &p)?;
                let outspec = need(j.outspec, "outspec", &p)?;
                if p == "nnr" {
                    ProblemInstance::Nnr { net, inspec, outspec }
                } else {
                    ProblemInstance::Vip { net, inspec, outspec }
                }
            }
            "ne" => ProblemInstance::Ne {
                net1: need(j.net, "net", &p)?,
                net2: need(j.net2, "net2", &p)?,
            },
            "sr" => ProblemInstance::Sr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                delta: need(j.delta, "delta", &p)?,
                center: need(j.center, "center", &p)?,
            },
            "cr" => ProblemInstance::Cr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                center: need(j.center, "center", &p)?,
                label: need(j.label, "label", &p)?,
            },
            "acr" => ProblemInstance::Acr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                center: need(j.center, "center", &p)?,
            },
            "lr" => ProblemInstance::Lr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                lip: need(j.lip, "lip", &p)?,
                center: need(j.center, "center", &p)?,
            },
            "gsr" => ProblemInstance::Gsr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                delta: need(j.delta, "delta", &p)?,
            },
            "glr" => ProblemInstance::Glr {
                net: need(j.net, "net", &p)?,
                metric: need(j.metric, "metric", &p)?,
                eps: need(j.eps, "eps", &p)?,
                lip: need(j.lip, "lip", &p)?,
            },
            other => return Err(D::Error::custom(format!("unknown problem '{}'", other))),
        };
        Ok(inst)
    }
}
