//! The pattern search: depth-first over ReLU phases in topological order,
//! Inactive branch first, pruning each child by exact LP feasibility of
//! the accumulated region.
//!
//! Two refinements keep the walk tight without losing completeness. A
//! node whose pre-activation form is constant gets its phase assigned
//! outright. A node whose pre-activation cannot be strictly negative
//! inside the current region skips the Inactive child entirely: on the
//! shared boundary both pieces compute the same value, so the Active
//! child covers it. Every feasibility probe returns a point, and each
//! child first re-checks the parent's point before spending an LP.

use rayon::prelude::*;

use crate::linspec::{LinRow, LinSpec, Rel};
use crate::lp::{feasible, optimize, Extremum, Feasibility};
use crate::net::{stack_parallel, ActivationPattern, Activation, Network, Phase};
use crate::rat::{RatVector, Rational};
use crate::verify::encode::{region_row, resolve_row, Branch, OutRow, SearchModel};
use crate::verify::forms::Form;
use crate::verify::{Certificate, DecideOptions, ProblemInstance, SearchStats, Verdict};
use crate::Error;

pub(crate) struct Found {
    pub point: RatVector,
    pub pattern: ActivationPattern,
    pub branch: usize,
}

enum Goal {
    Violation,
    Extremize { out_idx: usize, maximize: bool },
}

struct FlatNode {
    layer: usize,
    index: usize,
    prev_offset: usize,
    relu_ordinal: Option<usize>,
}

struct Engine<'a> {
    model: &'a SearchModel,
    goal: Goal,
    nodes: Vec<FlatNode>,
    forms: Vec<Form>,
    region: Vec<LinRow>,
    pattern: Vec<Phase>,
    stats: SearchStats,
    found: Option<Found>,
    best: Option<(Rational, RatVector)>,
    unbounded: bool,
}

impl<'a> Engine<'a> {
    fn new(model: &'a SearchModel, goal: Goal) -> Engine<'a> {
        let net = &model.net;
        let n = net.input_dim();
        let mut nodes = Vec::new();
        let mut relu_ordinal = 0usize;
        let mut offset = 0usize;
        let mut prev_width = n;
        for (l, layer) in net.layers().iter().enumerate() {
            let prev_offset = offset;
            for (i, node) in layer.iter().enumerate() {
                nodes.push(FlatNode {
                    layer: l,
                    index: i,
                    prev_offset,
                    relu_ordinal: if node.activation == Activation::ReLU {
                        let o = relu_ordinal;
                        relu_ordinal += 1;
                        Some(o)
                    } else {
                        None
                    },
                });
            }
            offset = prev_offset + prev_width;
            prev_width = layer.len();
        }
        let forms = (0..n).map(|i| Form::unit(n, i)).collect();
        Engine {
            model,
            goal,
            nodes,
            forms,
            region: Vec::new(),
            pattern: vec![Phase::Active; net.relu_count()],
            stats: SearchStats::default(),
            found: None,
            best: None,
            unbounded: false,
        }
    }

    fn probe(&mut self, extra: Option<LinRow>) -> Feasibility {
        let mut rows = self.model.input_rows.clone();
        rows.extend(self.region.iter().cloned());
        if let Some(r) = extra {
            rows.push(r);
        }
        self.stats.lp_solved += 1;
        feasible(&LinSpec {
            dim: self.model.lp_dim(),
            rows,
        })
    }

    fn pre_form(&self, cursor: usize) -> Form {
        let fnode = &self.nodes[cursor];
        let node = &self.model.net.layers()[fnode.layer][fnode.index];
        let mut pre = Form::constant(self.model.n_base(), node.bias.clone());
        for (j, w) in node.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let prev = self.forms[fnode.prev_offset + j].clone();
            pre.add_scaled(w, &prev);
        }
        pre
    }

    /// Returns true when the walk should stop early.
    fn walk(&mut self, cursor: usize, witness: &Option<RatVector>) -> bool {
        if cursor == self.nodes.len() {
            return self.leaf(witness);
        }
        let fnode = &self.nodes[cursor];
        let pre = self.pre_form(cursor);
        let Some(ordinal) = fnode.relu_ordinal else {
            self.forms.push(pre);
            let stop = self.walk(cursor + 1, witness);
            self.forms.pop();
            return stop;
        };
        if pre.is_constant() {
            let phase = if pre.constant.is_negative() {
                Phase::Inactive
            } else {
                Phase::Active
            };
            self.pattern[ordinal] = phase;
            self.forms.push(match phase {
                Phase::Active => pre,
                Phase::Inactive => Form::zero(self.model.n_base()),
            });
            let stop = self.walk(cursor + 1, witness);
            self.forms.pop();
            return stop;
        }
        let lp_dim = self.model.lp_dim();

        // Inactive side only if the region can make the pre-activation
        // strictly negative; the boundary belongs to the Active side.
        let strict_neg = {
            let mut coeffs = pre.coeffs.clone();
            coeffs.resize(lp_dim, Rational::zero());
            LinRow::new(coeffs, Rel::Lt, -&pre.constant)
        };
        let inactive_witness = match witness {
            Some(w) if pre.eval(w).is_negative() => Feasibility::Feasible(w.clone()),
            _ => self.probe(Some(strict_neg)),
        };
        if let Feasibility::Feasible(w) = inactive_witness {
            self.pattern[ordinal] = Phase::Inactive;
            self.region.push(region_row(&pre, Phase::Inactive, lp_dim));
            self.forms.push(Form::zero(self.model.n_base()));
            let stop = self.walk(cursor + 1, &Some(w));
            self.forms.pop();
            self.region.pop();
            if stop {
                return true;
            }
        }

        let active_row = region_row(&pre, Phase::Active, lp_dim);
        let active_witness = match witness {
            Some(w) if !pre.eval(w).is_negative() => Feasibility::Feasible(w.clone()),
            _ => self.probe(Some(active_row.clone())),
        };
        if let Feasibility::Feasible(w) = active_witness {
            self.pattern[ordinal] = Phase::Active;
            self.region.push(active_row);
            self.forms.push(pre);
            let stop = self.walk(cursor + 1, &Some(w));
            self.forms.pop();
            self.region.pop();
            if stop {
                return true;
            }
        }
        false
    }

    fn leaf(&mut self, witness: &Option<RatVector>) -> bool {
        self.stats.patterns_explored += 1;
        let m = self.model.net.output_dim();
        let outs = &self.forms[self.forms.len() - m..];
        match &self.goal {
            Goal::Violation => {
                let outs = outs.to_vec();
                for (bi, branch) in self.model.branches.iter().enumerate() {
                    if self.branch_feasible(branch, &outs, witness, bi) {
                        return true;
                    }
                }
                false
            }
            Goal::Extremize { out_idx, maximize } => {
                let maximize = *maximize;
                let form = outs[*out_idx].clone();
                let mut rows = self.model.input_rows.clone();
                rows.extend(self.region.iter().cloned());
                let spec = LinSpec {
                    dim: self.model.lp_dim(),
                    rows,
                };
                let mut obj = form.coeffs.clone();
                obj.resize(self.model.lp_dim(), Rational::zero());
                self.stats.lp_solved += 1;
                match optimize(&spec, &obj, maximize) {
                    Extremum::Unbounded => {
                        self.unbounded = true;
                        true
                    }
                    Extremum::Infeasible => false,
                    Extremum::Optimal { value, point } => {
                        let value = value + form.constant.clone();
                        let better = match &self.best {
                            None => true,
                            Some((b, _)) => {
                                if maximize {
                                    value > *b
                                } else {
                                    value < *b
                                }
                            }
                        };
                        if better {
                            self.best = Some((value, point));
                        }
                        false
                    }
                }
            }
        }
    }

    fn branch_feasible(
        &mut self,
        branch: &Branch,
        outs: &[Form],
        witness: &Option<RatVector>,
        branch_id: usize,
    ) -> bool {
        let lp_dim = self.model.lp_dim();
        let rows: Vec<LinRow> = branch
            .rows
            .iter()
            .map(|r| resolve_row(r, outs, lp_dim))
            .collect();
        if let Some(w) = witness {
            if rows.iter().all(|r| r.holds_at(w).unwrap_or(false)) {
                self.found = Some(Found {
                    point: w.clone(),
                    pattern: ActivationPattern(self.pattern.clone()),
                    branch: branch_id,
                });
                return true;
            }
        }
        let mut all = self.model.input_rows.clone();
        all.extend(self.region.iter().cloned());
        all.extend(rows);
        self.stats.lp_solved += 1;
        if let Feasibility::Feasible(w) = feasible(&LinSpec { dim: lp_dim, rows: all }) {
            self.found = Some(Found {
                point: w,
                pattern: ActivationPattern(self.pattern.clone()),
                branch: branch_id,
            });
            return true;
        }
        false
    }
}

fn search_sequential(model: &SearchModel) -> (Option<Found>, SearchStats) {
    let mut eng = Engine::new(model, Goal::Violation);
    eng.walk(0, &None);
    (eng.found, eng.stats)
}

fn search_parallel(model: &SearchModel) -> (Option<Found>, SearchStats) {
    let results: Vec<(Option<Found>, SearchStats)> = model
        .branches
        .par_iter()
        .enumerate()
        .map(|(bi, branch)| {
            let single = SearchModel {
                net: model.net.clone(),
                n_aux: model.n_aux,
                input_rows: model.input_rows.clone(),
                branches: vec![Branch {
                    rows: branch.rows.clone(),
                }],
                witness_dim: model.witness_dim,
                exists_goal: model.exists_goal,
            };
            let (found, stats) = search_sequential(&single);
            (
                found.map(|f| Found {
                    point: f.point,
                    pattern: f.pattern,
                    branch: bi,
                }),
                stats,
            )
        })
        .collect();
    let mut stats = SearchStats::default();
    let mut found = None;
    for (f, s) in results {
        stats.absorb(s);
        if found.is_none() {
            found = f;
        }
    }
    (found, stats)
}

/// Runs the search and shapes the verdict. A feasible leaf means
/// `holds = true` for reachability goals and `holds = false` for
/// complement searches.
pub(crate) fn run(model: &SearchModel, _inst: &ProblemInstance, opts: &DecideOptions) -> Verdict {
    let (found, stats) = if opts.parallel && !model.exists_goal && model.branches.len() > 1 {
        search_parallel(model)
    } else {
        search_sequential(model)
    };
    match found {
        Some(f) => Verdict {
            holds: model.exists_goal,
            witness: Some(f.point.take(model.witness_dim)),
            label_witnesses: None,
            unnecessary_subset: None,
            certificate: Some(Certificate {
                pattern: f.pattern,
                branch: f.branch,
            }),
            stats,
        },
        None => Verdict {
            holds: !model.exists_goal,
            witness: None,
            label_witnesses: None,
            unnecessary_subset: None,
            certificate: None,
            stats,
        },
    }
}

enum Bound {
    Finite(Rational, RatVector),
    Infinite,
}

/// Sweep every region of a single copy and take the exact extremum of one
/// output coordinate over each.
fn extremum(net: &Network, out_idx: usize, maximize: bool, stats: &mut SearchStats) -> Bound {
    let model = SearchModel {
        net: net.clone(),
        n_aux: 0,
        input_rows: vec![],
        branches: vec![],
        witness_dim: net.input_dim(),
        exists_goal: false,
    };
    let mut eng = Engine::new(&model, Goal::Extremize { out_idx, maximize });
    eng.walk(0, &None);
    stats.absorb(eng.stats);
    if eng.unbounded {
        Bound::Infinite
    } else {
        let (v, p) = eng.best.expect("every network has at least one region");
        Bound::Finite(v, p.take(net.input_dim()))
    }
}

/// Finds a point where output `out_idx` is strictly beyond `bound`
/// (above when `above`, below otherwise). Caller guarantees existence.
fn point_beyond(
    net: &Network,
    out_idx: usize,
    bound: &Rational,
    above: bool,
    stats: &mut SearchStats,
) -> (RatVector, SearchStats) {
    let n = net.input_dim();
    let m = net.output_dim();
    let mut out = vec![Rational::zero(); m];
    out[out_idx] = Rational::one();
    let row = if above {
        OutRow {
            base: vec![Rational::zero(); n],
            out: out.iter().map(|c| -c).collect(),
            rel: Rel::Lt,
            rhs: -bound,
        }
    } else {
        OutRow {
            base: vec![Rational::zero(); n],
            out,
            rel: Rel::Lt,
            rhs: bound.clone(),
        }
    };
    let model = SearchModel {
        net: net.clone(),
        n_aux: 0,
        input_rows: vec![],
        branches: vec![Branch { rows: vec![row] }],
        witness_dim: n,
        exists_goal: true,
    };
    let (found, s) = search_sequential(&model);
    stats.absorb(s);
    let f = found.expect("an unbounded output direction always yields a point");
    (f.point.take(n), SearchStats::default())
}

/// Global standard robustness with an infinite radius: the two copies are
/// linked only through the violated output row, so the pair search
/// factorizes into per-dimension extremum sweeps over a single copy.
pub(crate) fn decide_gsr_unbounded(
    _inst: &ProblemInstance,
    net: &Network,
    delta: &Rational,
    _opts: &DecideOptions,
) -> Result<Verdict, Error> {
    let m = net.output_dim();
    let mut stats = SearchStats::default();
    for i in 0..m {
        let hi = extremum(net, i, true, &mut stats);
        let lo = extremum(net, i, false, &mut stats);
        let pair = match (hi, lo) {
            (Bound::Finite(max_v, max_p), Bound::Finite(min_v, min_p)) => {
                if &(&max_v - &min_v) > delta {
                    Some((max_p, min_p))
                } else {
                    None
                }
            }
            (Bound::Infinite, Bound::Finite(min_v, min_p)) => {
                let (p, _) = point_beyond(net, i, &(&min_v + delta), true, &mut stats);
                Some((p, min_p))
            }
            (Bound::Finite(max_v, max_p), Bound::Infinite) => {
                let (q, _) = point_beyond(net, i, &(&max_v - delta), false, &mut stats);
                Some((max_p, q))
            }
            (Bound::Infinite, Bound::Infinite) => {
                let origin = RatVector::zeros(net.input_dim());
                let v0 = net.evaluate(&origin)?[i].clone();
                let (p, _) = point_beyond(net, i, &(&v0 + delta), true, &mut stats);
                Some((p, origin))
            }
        };
        if let Some((x, y)) = pair {
            let witness = x.concat(&y);
            let pair_net = stack_parallel(net, net, false)?;
            let pattern = pair_net.pattern_of(&witness)?;
            return Ok(Verdict {
                holds: false,
                witness: Some(witness),
                label_witnesses: None,
                unnecessary_subset: None,
                certificate: Some(Certificate {
                    pattern,
                    branch: 2 * i,
                }),
                stats,
            });
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
