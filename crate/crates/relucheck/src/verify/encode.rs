//! Canonical search models: one per instance, shared by the depth-first
//! decider, the exhaustive enumeration oracle and the certificate checker
//! so that pattern order and branch numbering always agree.
//!
//! A model is the subject network (possibly a stacked pair or a metric
//! gadget), conjunction rows over the LP variables (network inputs
//! followed by any ball auxiliaries), and the disjunction of violation
//! branches. A leaf of the pattern search is feasible exactly when input
//! rows, the pattern's region rows and one branch hold simultaneously.

use crate::linspec::{ball_spec, negate_row, LinRow, LinSpec, Rel};
use crate::lp::{feasible, Feasibility};
use crate::net::{append_abs_sum, stack_parallel, Activation, Network, Node};
use crate::rat::{ExtRational, Metric, RatVector, Rational};
use crate::verify::forms::{output_forms, relu_pre_forms, Form};
use crate::verify::{Certificate, DecideOptions, ProblemInstance};
use crate::{net::Phase, Error};

/// A row that may mention network outputs. `base` indexes the model
/// inputs, `out` the model outputs; ball auxiliaries never occur here.
#[derive(Clone, Debug)]
pub(crate) struct OutRow {
    pub base: Vec<Rational>,
    pub out: Vec<Rational>,
    pub rel: Rel,
    pub rhs: Rational,
}

impl OutRow {
    fn le(base: Vec<Rational>, out: Vec<Rational>, rhs: Rational) -> OutRow {
        OutRow {
            base,
            out,
            rel: Rel::Le,
            rhs,
        }
    }

    /// `base . x + out . N(x) > rhs`, encoded as a strict row.
    fn gt(base: Vec<Rational>, out: Vec<Rational>, rhs: Rational) -> OutRow {
        OutRow {
            base: base.iter().map(|c| -c).collect(),
            out: out.iter().map(|c| -c).collect(),
            rel: Rel::Lt,
            rhs: -rhs,
        }
    }
}

/// One violation branch: a conjunction of rows.
#[derive(Clone, Debug)]
pub(crate) struct Branch {
    pub rows: Vec<OutRow>,
}

pub(crate) struct SearchModel {
    pub net: Network,
    pub n_aux: usize,
    /// Rows over base + aux variables, output-free.
    pub input_rows: Vec<LinRow>,
    pub branches: Vec<Branch>,
    /// Leading LP coordinates reported as the witness.
    pub witness_dim: usize,
    /// Reachability searches report a feasible leaf as `holds = true`.
    pub exists_goal: bool,
}

impl SearchModel {
    pub fn n_base(&self) -> usize {
        self.net.input_dim()
    }

    pub fn lp_dim(&self) -> usize {
        self.n_base() + self.n_aux
    }
}

pub(crate) enum ModelOutcome {
    Trivial(bool),
    Search(SearchModel),
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

/// Converts a spec over `n (+ aux)` variables into LP rows over the
/// model's base+aux space, padding with zeros as needed.
fn spec_rows(spec: &LinSpec, n_base: usize, n_aux: usize) -> Vec<LinRow> {
    spec.rows
        .iter()
        .map(|r| {
            let mut coeffs: Vec<Rational> = r.coeffs.iter().cloned().collect();
            coeffs.resize(n_base + n_aux, Rational::zero());
            LinRow::new(coeffs, r.rel, r.rhs.clone())
        })
        .collect()
}

fn ball_rows(
    metric: Metric,
    center: &RatVector,
    eps: &ExtRational,
    n_base: usize,
) -> Result<(Vec<LinRow>, usize), Error> {
    let (spec, aux) = ball_spec(metric, center, eps)?;
    debug_assert!(spec.dim == center.dim() + aux || spec.is_trivial());
    let n = center.dim();
    let rows = spec
        .rows
        .iter()
        .map(|r| {
            // Ball coordinates occupy the leading base slots; auxiliaries
            // go after all base variables.
            let mut coeffs = vec![Rational::zero(); n_base + aux];
            for (i, c) in r.coeffs.iter().enumerate() {
                if i < n {
                    coeffs[i] = c.clone();
                } else {
                    coeffs[n_base + (i - n)] = c.clone();
                }
            }
            LinRow::new(coeffs, r.rel, r.rhs.clone())
        })
        .collect();
    Ok((rows, aux))
}

/// Appends an affine output layer `out_i - shift_i` and collapses to the
/// absolute sum; used for the L1 output distance.
fn abs_sum_of_shifted(net: &Network, shift: &RatVector) -> Network {
    let m = net.output_dim();
    let layer = (0..m)
        .map(|i| Node::new(Activation::Id, -&shift[i], unit(m, i)))
        .collect();
    let shifted = net.append_layer(layer).expect("shift layer is consistent");
    append_abs_sum(&shifted)
}

pub(crate) fn build_model(
    inst: &ProblemInstance,
    opts: &DecideOptions,
) -> Result<ModelOutcome, Error> {
    match inst {
        ProblemInstance::Nnr { net, inspec, outspec } => {
            let n = net.input_dim();
            let rows = outspec
                .rows
                .iter()
                .map(|r| OutRow {
                    base: zeros(n),
                    out: r.coeffs.iter().cloned().collect(),
                    rel: r.rel,
                    rhs: r.rhs.clone(),
                })
                .collect();
            Ok(ModelOutcome::Search(SearchModel {
                net: net.clone(),
                n_aux: 0,
                input_rows: spec_rows(inspec, n, 0),
                branches: vec![Branch { rows }],
                witness_dim: n,
                exists_goal: true,
            }))
        }
        ProblemInstance::Vip { net, inspec, outspec } => {
            let n = net.input_dim();
            let mut branches = Vec::new();
            for row in &outspec.rows {
                for neg in negate_row(row) {
                    branches.push(Branch {
                        rows: vec![OutRow {
                            base: zeros(n),
                            out: neg.coeffs.iter().cloned().collect(),
                            rel: neg.rel,
                            rhs: neg.rhs.clone(),
                        }],
                    });
                }
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: net.clone(),
                n_aux: 0,
                input_rows: spec_rows(inspec, n, 0),
                branches,
                witness_dim: n,
                exists_goal: false,
            }))
        }
        ProblemInstance::Ne { net1, net2 } => {
            let m = net1.output_dim();
            let stacked = stack_parallel(net1, net2, true)?;
            let n = stacked.input_dim();
            let mut branches = Vec::with_capacity(2 * m);
            for k in 0..m {
                let mut diff = zeros(2 * m);
                diff[k] = Rational::one();
                diff[m + k] = -Rational::one();
                branches.push(Branch {
                    rows: vec![OutRow::gt(zeros(n), diff.clone(), Rational::zero())],
                });
                branches.push(Branch {
                    rows: vec![OutRow::gt(
                        zeros(n),
                        diff.iter().map(|c| -c).collect(),
                        Rational::zero(),
                    )],
                });
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: stacked,
                n_aux: 0,
                input_rows: vec![],
                branches,
                witness_dim: n,
                exists_goal: false,
            }))
        }
        ProblemInstance::Sr {
            net,
            metric,
            eps,
            delta,
            center,
        } => {
            let delta = match delta {
                ExtRational::Infinity => return Ok(ModelOutcome::Trivial(true)),
                ExtRational::Finite(d) => d.clone(),
            };
            let at_center = net.evaluate(center)?;
            let n = net.input_dim();
            let (input_rows, n_aux) = ball_rows(*metric, center, eps, n)?;
            match metric {
                Metric::Linf => {
                    let m = net.output_dim();
                    let mut branches = Vec::with_capacity(2 * m);
                    for i in 0..m {
                        branches.push(Branch {
                            rows: vec![OutRow::gt(
                                zeros(n),
                                unit(m, i),
                                &delta + &at_center[i],
                            )],
                        });
                        branches.push(Branch {
                            rows: vec![OutRow::gt(
                                zeros(n),
                                unit(m, i).iter().map(|c| -c).collect(),
                                &delta - &at_center[i],
                            )],
                        });
                    }
                    Ok(ModelOutcome::Search(SearchModel {
                        net: net.clone(),
                        n_aux,
                        input_rows,
                        branches,
                        witness_dim: n,
                        exists_goal: false,
                    }))
                }
                Metric::L1 => {
                    // The gadget's ReLU pairs join the pattern search; the
                    // violation is the single strict row sum > delta.
                    let gadget = abs_sum_of_shifted(net, &at_center);
                    let branches = vec![Branch {
                        rows: vec![OutRow::gt(zeros(n), vec![Rational::one()], delta)],
                    }];
                    Ok(ModelOutcome::Search(SearchModel {
                        net: gadget,
                        n_aux,
                        input_rows,
                        branches,
                        witness_dim: n,
                        exists_goal: false,
                    }))
                }
            }
        }
        ProblemInstance::Cr {
            net,
            metric,
            eps,
            center,
            label,
        } => {
            let n = net.input_dim();
            let m = net.output_dim();
            let j = label - 1;
            let (input_rows, n_aux) = ball_rows(*metric, center, eps, n)?;
            let mut branches = Vec::new();
            for i in (0..m).filter(|i| *i != j) {
                let mut diff = zeros(m);
                diff[i] = Rational::one();
                diff[j] = -Rational::one();
                if opts.strict_argmax {
                    // Violation of unique argmax: N_i >= N_j.
                    branches.push(Branch {
                        rows: vec![OutRow::le(
                            zeros(n),
                            diff.iter().map(|c| -c).collect(),
                            Rational::zero(),
                        )],
                    });
                } else {
                    // Violation of weak maximality: N_i > N_j.
                    branches.push(Branch {
                        rows: vec![OutRow::gt(zeros(n), diff, Rational::zero())],
                    });
                }
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: net.clone(),
                n_aux,
                input_rows,
                branches,
                witness_dim: n,
                exists_goal: false,
            }))
        }
        ProblemInstance::Acr { .. } => Err(Error::BadInstance(
            "arbitrary classification robustness is decided label by label".into(),
        )),
        ProblemInstance::Lr {
            net,
            eps,
            lip,
            center,
            ..
        } => {
            let n = net.input_dim();
            let m = net.output_dim();
            let lip = lip.finite().expect("validated finite").clone();
            let at_center = net.evaluate(center)?;
            let (input_rows, n_aux) = ball_rows(Metric::Linf, center, eps, n)?;
            let signs = [Rational::one(), -Rational::one()];
            let mut branches = Vec::new();
            for jc in 0..n {
                for sigma in &signs {
                    // s := sigma * (x_jc - c_jc) dominates every gap.
                    let mut s_rows = Vec::with_capacity(2 * n);
                    for k in 0..n {
                        let mut plus = zeros(n);
                        plus[k] += &Rational::one();
                        plus[jc] -= sigma;
                        s_rows.push(OutRow::le(
                            plus,
                            zeros(m),
                            &center[k] - &(sigma * &center[jc]),
                        ));
                        let mut minus = zeros(n);
                        minus[k] -= &Rational::one();
                        minus[jc] -= sigma;
                        s_rows.push(OutRow::le(
                            minus,
                            zeros(m),
                            -&center[k] - &(sigma * &center[jc]),
                        ));
                    }
                    for i in 0..m {
                        for tau in &signs {
                            let mut rows = s_rows.clone();
                            // tau (N_i - c_i) > lip * s
                            let mut base = zeros(n);
                            base[jc] = -&(&lip * sigma);
                            let mut out = zeros(m);
                            out[i] = tau.clone();
                            let rhs =
                                &(tau * &at_center[i]) - &(&(&lip * sigma) * &center[jc]);
                            rows.push(OutRow::gt(base, out, rhs));
                            branches.push(Branch { rows });
                        }
                    }
                }
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: net.clone(),
                n_aux,
                input_rows,
                branches,
                witness_dim: n,
                exists_goal: false,
            }))
        }
        ProblemInstance::Gsr {
            net, eps, delta, ..
        } => {
            let delta = match delta {
                ExtRational::Infinity => return Ok(ModelOutcome::Trivial(true)),
                ExtRational::Finite(d) => d.clone(),
            };
            let n = net.input_dim();
            let m = net.output_dim();
            let pair = stack_parallel(net, net, false)?;
            let input_rows = pair_link_rows(n, eps);
            let mut branches = Vec::with_capacity(2 * m);
            for i in 0..m {
                let mut diff = zeros(2 * m);
                diff[i] = Rational::one();
                diff[m + i] = -Rational::one();
                branches.push(Branch {
                    rows: vec![OutRow::gt(zeros(2 * n), diff.clone(), delta.clone())],
                });
                branches.push(Branch {
                    rows: vec![OutRow::gt(
                        zeros(2 * n),
                        diff.iter().map(|c| -c).collect(),
                        delta.clone(),
                    )],
                });
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: pair,
                n_aux: 0,
                input_rows,
                branches,
                witness_dim: 2 * n,
                exists_goal: false,
            }))
        }
        ProblemInstance::Glr { net, eps, lip, .. } => {
            let n = net.input_dim();
            let m = net.output_dim();
            let lip = lip.finite().expect("validated finite").clone();
            let pair = stack_parallel(net, net, false)?;
            let input_rows = pair_link_rows(n, eps);
            let signs = [Rational::one(), -Rational::one()];
            let mut branches = Vec::new();
            for jc in 0..n {
                for sigma in &signs {
                    // s := sigma * (x_jc - y_jc)
                    let mut s_rows = Vec::with_capacity(2 * n);
                    for k in 0..n {
                        let mut plus = zeros(2 * n);
                        plus[k] += &Rational::one();
                        plus[n + k] -= &Rational::one();
                        plus[jc] -= sigma;
                        plus[n + jc] += sigma;
                        s_rows.push(OutRow::le(plus, zeros(2 * m), Rational::zero()));
                        let mut minus = zeros(2 * n);
                        minus[k] -= &Rational::one();
                        minus[n + k] += &Rational::one();
                        minus[jc] -= sigma;
                        minus[n + jc] += sigma;
                        s_rows.push(OutRow::le(minus, zeros(2 * m), Rational::zero()));
                    }
                    for i in 0..m {
                        for tau in &signs {
                            let mut rows = s_rows.clone();
                            // tau (N(x)_i - N(y)_i) > lip * s
                            let mut base = zeros(2 * n);
                            base[jc] = -&(&lip * sigma);
                            base[n + jc] = &lip * sigma;
                            let mut out = zeros(2 * m);
                            out[i] = tau.clone();
                            out[m + i] = -tau;
                            rows.push(OutRow::gt(base, out, Rational::zero()));
                            branches.push(Branch { rows });
                        }
                    }
                }
            }
            Ok(ModelOutcome::Search(SearchModel {
                net: pair,
                n_aux: 0,
                input_rows,
                branches,
                witness_dim: 2 * n,
                exists_goal: false,
            }))
        }
    }
}

/// `|x_k - y_k| <= eps` rows linking the two halves of a pair model;
/// empty for an infinite radius.
fn pair_link_rows(n: usize, eps: &ExtRational) -> Vec<LinRow> {
    let eps = match eps {
        ExtRational::Infinity => return vec![],
        ExtRational::Finite(e) => e.clone(),
    };
    let mut rows = Vec::with_capacity(2 * n);
    for k in 0..n {
        let mut plus = vec![Rational::zero(); 2 * n];
        plus[k] = Rational::one();
        plus[n + k] = -Rational::one();
        rows.push(LinRow::le(plus, eps.clone()));
        let mut minus = vec![Rational::zero(); 2 * n];
        minus[k] = -Rational::one();
        minus[n + k] = Rational::one();
        rows.push(LinRow::le(minus, eps.clone()));
    }
    rows
}

/// Region rows of a full pattern over base+aux variables: the sign of
/// every ReLU pre-activation, including constant ones.
pub(crate) fn region_rows_for_pattern(
    model: &SearchModel,
    pattern: &crate::net::ActivationPattern,
) -> Vec<LinRow> {
    let dim = model.lp_dim();
    relu_pre_forms(&model.net, pattern)
        .into_iter()
        .map(|(pre, phase)| region_row(&pre, phase, dim))
        .collect()
}

/// The closed sign row for one decided ReLU node.
pub(crate) fn region_row(pre: &Form, phase: Phase, lp_dim: usize) -> LinRow {
    let mut coeffs: Vec<Rational>;
    let rhs;
    match phase {
        Phase::Inactive => {
            coeffs = pre.coeffs.clone();
            rhs = -&pre.constant;
        }
        Phase::Active => {
            coeffs = pre.coeffs.iter().map(|c| -c).collect();
            rhs = pre.constant.clone();
        }
    }
    coeffs.resize(lp_dim, Rational::zero());
    LinRow::le(coeffs, rhs)
}

/// Instantiates a branch row at a leaf by substituting output forms.
pub(crate) fn resolve_row(row: &OutRow, out_forms: &[Form], lp_dim: usize) -> LinRow {
    let mut coeffs = row.base.clone();
    coeffs.resize(lp_dim, Rational::zero());
    let mut rhs = row.rhs.clone();
    for (c, form) in row.out.iter().zip(out_forms.iter()) {
        if c.is_zero() {
            continue;
        }
        for (i, fc) in form.coeffs.iter().enumerate() {
            coeffs[i] += &(c * fc);
        }
        rhs -= &(c * &form.constant);
    }
    LinRow::new(coeffs, row.rel, rhs)
}

/// Single-LP validation of a certificate against the canonical model.
pub(crate) fn certificate_feasible(
    model: &SearchModel,
    cert: &Certificate,
) -> Result<bool, Error> {
    let relu_count = model.net.relu_count();
    if cert.pattern.len() != relu_count {
        return Err(Error::BadInstance(format!(
            "certificate pattern has {} phases but the model has {} ReLU nodes",
            cert.pattern.len(),
            relu_count
        )));
    }
    if cert.branch >= model.branches.len() {
        return Err(Error::BadInstance(format!(
            "certificate branch {} out of range ({} branches)",
            cert.branch,
            model.branches.len()
        )));
    }
    let dim = model.lp_dim();
    let mut rows = model.input_rows.clone();
    rows.extend(region_rows_for_pattern(model, &cert.pattern));
    let outs = output_forms(&model.net, &cert.pattern);
    for row in &model.branches[cert.branch].rows {
        rows.push(resolve_row(row, &outs, dim));
    }
    let spec = LinSpec { dim, rows };
    Ok(matches!(feasible(&spec), Feasibility::Feasible(_)))
}
