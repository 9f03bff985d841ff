//! Full pattern enumeration: every one of the 2^R closed sign vectors is
//! tried against every violation branch with one LP each.
//!
//! This is the cross-check oracle for the pruned search; it deliberately
//! shares nothing with the walk beyond the canonical model encoding and
//! the LP solver. Exponential by construction and guarded accordingly.

use crate::linspec::LinSpec;
use crate::lp::{feasible, Feasibility};
use crate::net::{ActivationPattern, Phase};
use crate::rat::{ExtRational, Metric, RatVector};
use crate::verify::encode::{region_rows_for_pattern, resolve_row};
use crate::verify::forms::output_forms;
use crate::verify::{
    build_model, Certificate, DecideOptions, ModelOutcome, ProblemInstance, SearchStats, Verdict,
};
use crate::{net::Network, Error};

const ENUMERATION_GUARD: usize = 24;

/// Decides an instance by enumerating all activation patterns. Verdicts
/// (and their soundness guarantees) match `decide` exactly; only the
/// search strategy differs.
pub fn decide_exhaustive(inst: &ProblemInstance, opts: &DecideOptions) -> Result<Verdict, Error> {
    inst.validate()?;
    if let ProblemInstance::Acr {
        net,
        metric,
        eps,
        center,
    } = inst
    {
        return acr_exhaustive(net, *metric, eps, center, opts);
    }
    let model = match build_model(inst, opts)? {
        ModelOutcome::Trivial(holds) => {
            return Ok(Verdict {
                holds,
                witness: None,
                label_witnesses: None,
                unnecessary_subset: None,
                certificate: None,
                stats: SearchStats::default(),
            })
        }
        ModelOutcome::Search(m) => m,
    };
    let r = model.net.relu_count();
    if r > ENUMERATION_GUARD {
        return Err(Error::BadInstance(format!(
            "exhaustive enumeration over {} ReLU nodes exceeds the guard of {}",
            r, ENUMERATION_GUARD
        )));
    }
    let mut stats = SearchStats::default();
    let dim = model.lp_dim();
    for mask in 0u64..(1u64 << r) {
        let pattern = ActivationPattern(
            (0..r)
                .map(|k| {
                    if mask >> k & 1 == 1 {
                        Phase::Active
                    } else {
                        Phase::Inactive
                    }
                })
                .collect(),
        );
        stats.patterns_explored += 1;
        let region = region_rows_for_pattern(&model, &pattern);
        let outs = output_forms(&model.net, &pattern);
        for (bi, branch) in model.branches.iter().enumerate() {
            let mut rows = model.input_rows.clone();
            rows.extend(region.iter().cloned());
            for row in &branch.rows {
                rows.push(resolve_row(row, &outs, dim));
            }
            stats.lp_solved += 1;
            if let Feasibility::Feasible(w) = feasible(&LinSpec { dim, rows }) {
                return Ok(Verdict {
                    holds: model.exists_goal,
                    witness: Some(w.take(model.witness_dim)),
                    label_witnesses: None,
                    unnecessary_subset: None,
                    certificate: Some(Certificate { pattern, branch: bi }),
                    stats,
                });
            }
        }
    }
    Ok(Verdict {
        holds: !model.exists_goal,
        witness: None,
        label_witnesses: None,
        unnecessary_subset: None,
        certificate: None,
        stats,
    })
}

fn acr_exhaustive(
    net: &Network,
    metric: Metric,
    eps: &ExtRational,
    center: &RatVector,
    opts: &DecideOptions,
) -> Result<Verdict, Error> {
    let mut stats = SearchStats::default();
    let mut refutations = Vec::new();
    for label in 1..=net.output_dim() {
        let sub = ProblemInstance::Cr {
            net: net.clone(),
            metric,
            eps: eps.clone(),
            center: center.clone(),
            label,
        };
        let v = decide_exhaustive(&sub, opts)?;
        stats.absorb(v.stats);
        if v.holds {
            return Ok(Verdict {
                holds: true,
                witness: None,
                label_witnesses: None,
                unnecessary_subset: None,
                certificate: None,
                stats,
            });
        }
        refutations.push((label, v.witness.expect("failing CR has a witness")));
    }
    Ok(Verdict {
        holds: false,
        witness: None,
        label_witnesses: Some(refutations),
        unnecessary_subset: None,
        certificate: None,
        stats,
    })
}
