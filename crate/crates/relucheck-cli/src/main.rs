//! Command-line front door: decide instances, emit reductions, generate
//! hardness gadgets, and re-check certificates.
//!
//! Verdicts go to standard output as single-line JSON for machine
//! consumption; a human-readable summary goes to standard error. Exit
//! codes: 0 when the instance was decided (either way), 2 on usage or
//! input errors, 3 on internal errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use relucheck::linspec::LinSpec;
use relucheck::minimize;
use relucheck::net::{Network, NodeRef};
use relucheck::rat::{ExtRational, Metric, RatVector, Rational};
use relucheck::reduce::{self, cnf, RetractionForm};
use relucheck::verify::{
    check_certificate, decide, sample_falsify, Certificate, DecideOptions, ProblemInstance,
    Verdict,
};

#[derive(Parser)]
#[command(
    name = "relucheck",
    about = "Exact decision procedures for ReLU/identity network verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a verification problem and print the verdict as JSON.
    Check(CheckArgs),
    /// Transform an instance of one problem into an equivalent instance
    /// of another and write it to a file.
    Reduce(ReduceArgs),
    /// Build a hardness instance from a 3-CNF formula in DIMACS format.
    Gadget(GadgetArgs),
    /// Re-validate a previously emitted certificate with a single LP.
    Certify(CertifyArgs),
    /// Randomized falsification: sample the region and test the property
    /// directly.
    Falsify(FalsifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemName {
    Nnr,
    Vip,
    Ne,
    Sr,
    Cr,
    Acr,
    Lr,
    Gsr,
    Glr,
    Nece,
    Anece,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file; alternative to the per-field flags.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Network JSON file.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Second network JSON file (equivalence problems).
    #[arg(long)]
    net2: Option<PathBuf>,
    /// Input specification JSON file.
    #[arg(long)]
    inspec: Option<PathBuf>,
    /// Output specification JSON file.
    #[arg(long)]
    outspec: Option<PathBuf>,
    /// Metric: l1 or linf.
    #[arg(long)]
    metric: Option<Metric>,
    /// Ball radius; "inf" for the whole space.
    #[arg(long)]
    eps: Option<ExtRational>,
    /// Output tolerance.
    #[arg(long)]
    delta: Option<ExtRational>,
    /// Lipschitz constant.
    #[arg(long)]
    lip: Option<ExtRational>,
    /// Ball center, comma-separated rationals like "1/2,0,-3".
    #[arg(long)]
    center: Option<String>,
    /// 1-based output label.
    #[arg(long)]
    label: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    /// Which problem to decide.
    problem: ProblemName,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Hidden nodes as comma-separated layer:index pairs (necessity).
    #[arg(long)]
    nodes: Option<String>,
    /// Subset-enumeration cap override (all-subsets necessity).
    #[arg(long)]
    cap: Option<usize>,
    /// Require a unique argmax for classification robustness.
    #[arg(long)]
    strict_argmax: bool,
    /// Explore violation branches on a worker pool of N threads.
    #[arg(long, value_name = "N")]
    parallel: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionName {
    Sr2vip,
    Cr2vip,
    Sr2cr,
    Cr2sr,
    Acr2cr,
    Cr2acr,
    Ne2cr,
    Gsr2ne,
    Ne2nece,
    Ne2anece,
    Retract,
}

#[derive(Args)]
struct ReduceArgs {
    /// Which reduction to run.
    name: ReductionName,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Where to write the emitted instance.
    #[arg(long)]
    out: PathBuf,
    /// Replace hidden identity nodes by ReLU pairs in emitted networks.
    #[arg(long)]
    pure_relu: bool,
    /// Build the retraction in its historical additive form.
    #[arg(long)]
    legacy_t: bool,
    /// Source metric of the retraction ball.
    #[arg(long)]
    source_metric: Option<Metric>,
    /// Target metric tag recorded for the emitted retraction instance.
    #[arg(long)]
    lambda: Option<String>,
    /// Collapse the retracted network's output to the absolute sum.
    #[arg(long)]
    abs_sum: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetTarget {
    Gsr,
    Lr,
    Glr,
}

#[derive(Args)]
struct GadgetArgs {
    /// DIMACS CNF file with exactly three literals per clause.
    #[arg(long)]
    cnf: PathBuf,
    /// Which hardness instance to emit.
    #[arg(long)]
    target: GadgetTarget,
    /// Output prefix; writes <out>.net.json and <out>.instance.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Certificate JSON file (as printed by check).
    #[arg(long)]
    certificate: PathBuf,
    #[arg(long)]
    strict_argmax: bool,
}

#[derive(Args)]
struct FalsifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Problem name for flag-assembled instances.
    problem: ProblemName,
    /// Number of sample points.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    strict_argmax: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {} file '{}'", what, path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {} file '{}'", what, path.display()))
}

fn parse_center(s: &str) -> Result<RatVector> {
    s.split(',')
        .map(|t| {
            relucheck::parse_rational(t.trim())
                .map_err(|e| anyhow!("bad center coordinate '{}': {}", t, e))
        })
        .collect::<Result<Vec<Rational>>>()
        .map(RatVector::new)
}

fn parse_nodes(s: &str) -> Result<Vec<NodeRef>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<NodeRef>()
                .map_err(|e| anyhow!("bad node reference '{}': {}", t, e))
        })
        .collect()
}

impl InstanceArgs {
    fn net(&self) -> Result<Network> {
        let p = self
            .net
            .as_ref()
            .ok_or_else(|| anyhow!("--net is required"))?;
        read_json(p, "network")
    }

    fn assemble(&self, problem: ProblemName) -> Result<ProblemInstance> {
        if let Some(path) = &self.instance {
            let inst: ProblemInstance = read_json(path, "instance")?;
            return Ok(inst);
        }
        let metric = || self.metric.ok_or_else(|| anyhow!("--metric is required"));
        let eps = || {
            self.eps
                .clone()
                .ok_or_else(|| anyhow!("--eps is required"))
        };
        let center = || -> Result<RatVector> {
            parse_center(
                self.center
                    .as_ref()
                    .ok_or_else(|| anyhow!("--center is required"))?,
            )
        };
        let inspec: Option<LinSpec> = match &self.inspec {
            Some(p) => Some(read_json(p, "input spec")?),
            None => None,
        };
        let outspec: Option<LinSpec> = match &self.outspec {
            Some(p) => Some(read_json(p, "output spec")?),
            None => None,
        };
        Ok(match problem {
            ProblemName::Nnr | ProblemName::Vip => {
                let net = self.net()?;
                let inspec = inspec
                    .unwrap_or_else(|| LinSpec::trivial(net.input_dim()));
                let outspec = outspec
                    .unwrap_or_else(|| LinSpec::trivial(net.output_dim()));
                if matches!(problem, ProblemName::Nnr) {
                    ProblemInstance::Nnr { net, inspec, outspec }
                } else {
                    ProblemInstance::Vip { net, inspec, outspec }
                }
            }
            ProblemName::Ne => ProblemInstance::Ne {
                net1: self.net()?,
                net2: read_json(
                    self.net2
                        .as_ref()
                        .ok_or_else(|| anyhow!("--net2 is required"))?,
                    "network",
                )?,
            },
            ProblemName::Sr => ProblemInstance::Sr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                delta: self
                    .delta
                    .clone()
                    .ok_or_else(|| anyhow!("--delta is required"))?,
                center: center()?,
            },
            ProblemName::Cr => ProblemInstance::Cr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                center: center()?,
                label: self.label.ok_or_else(|| anyhow!("--label is required"))?,
            },
            ProblemName::Acr => ProblemInstance::Acr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                center: center()?,
            },
            ProblemName::Lr => ProblemInstance::Lr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                lip: self
                    .lip
                    .clone()
                    .ok_or_else(|| anyhow!("--lip is required"))?,
                center: center()?,
            },
            ProblemName::Gsr => ProblemInstance::Gsr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                delta: self
                    .delta
                    .clone()
                    .ok_or_else(|| anyhow!("--delta is required"))?,
            },
            ProblemName::Glr => ProblemInstance::Glr {
                net: self.net()?,
                metric: metric()?,
                eps: eps()?,
                lip: self
                    .lip
                    .clone()
                    .ok_or_else(|| anyhow!("--lip is required"))?,
            },
            ProblemName::Nece | ProblemName::Anece => {
                bail!("necessity problems are assembled from --net and --nodes")
            }
        })
    }
}

fn print_verdict(v: &Verdict) -> Result<()> {
    println!("{}", serde_json::to_string(v)?);
    eprintln!(
        "verdict: {} ({} LPs, {} patterns){}",
        if v.holds { "holds" } else { "fails" },
        v.stats.lp_solved,
        v.stats.patterns_explored,
        match &v.witness {
            Some(w) => format!(", witness {:?}", w),
            None => String::new(),
        }
    );
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<()> {
    if let Some(n) = args.parallel {
        if n > 0 {
            // Ignore failure when a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let opts = DecideOptions {
        strict_argmax: args.strict_argmax,
        parallel: args.parallel.map(|n| n != 1).unwrap_or(false),
    };
    let verdict = match args.problem {
        ProblemName::Nece => {
            let net: Network = args.instance.net()?;
            let nodes = parse_nodes(
                args.nodes
                    .as_ref()
                    .ok_or_else(|| anyhow!("--nodes is required for necessity"))?,
            )?;
            minimize::decide_nece(&net, &nodes, &opts)?
        }
        ProblemName::Anece => {
            let net: Network = args.instance.net()?;
            match args.cap {
                Some(cap) => minimize::decide_anece_capped(&net, cap, &opts)?,
                None => minimize::decide_anece(&net, &opts)?,
            }
        }
        p => {
            let inst = args.instance.assemble(p)?;
            decide(&inst, &opts)?
        }
    };
    print_verdict(&verdict)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text)
        .with_context(|| format!("cannot write '{}'", path.display()))?;
    Ok(())
}

fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    let purify = |inst: ProblemInstance| -> ProblemInstance {
        if args.pure_relu {
            reduce::purify_instance(&inst)
        } else {
            inst
        }
    };
    let meta = |target: &str| {
        println!(
            "{}",
            serde_json::json!({
                "reduction": reduction_tag(args.name),
                "target": target,
                "wrote": args.out.display().to_string(),
            })
        );
    };
    match args.name {
        ReductionName::Sr2vip => {
            let src = args.instance.assemble(ProblemName::Sr)?;
            write_json(&args.out, &purify(reduce::sr_to_vip(&src)?))?;
            meta("vip");
        }
        ReductionName::Cr2vip => {
            let src = args.instance.assemble(ProblemName::Cr)?;
            write_json(&args.out, &purify(reduce::cr_to_vip(&src)?))?;
            meta("vip");
        }
        ReductionName::Sr2cr => {
            let src = args.instance.assemble(ProblemName::Sr)?;
            write_json(&args.out, &purify(reduce::sr_to_cr(&src)?))?;
            meta("cr");
        }
        ReductionName::Cr2sr => {
            let src = args.instance.assemble(ProblemName::Cr)?;
            write_json(&args.out, &purify(reduce::cr_to_sr(&src)?))?;
            meta("sr");
        }
        ReductionName::Acr2cr => {
            let src = args.instance.assemble(ProblemName::Acr)?;
            let list: Vec<ProblemInstance> = reduce::acr_to_cr(&src)?
                .into_iter()
                .map(purify)
                .collect();
            write_json(&args.out, &list)?;
            meta("cr list");
        }
        ReductionName::Cr2acr => {
            let src = args.instance.assemble(ProblemName::Cr)?;
            write_json(&args.out, &purify(reduce::cr_to_acr(&src)?))?;
            meta("acr");
        }
        ReductionName::Ne2cr => {
            let src = args.instance.assemble(ProblemName::Ne)?;
            write_json(&args.out, &purify(reduce::ne_to_cr(&src)?))?;
            meta("cr");
        }
        ReductionName::Gsr2ne => {
            let src = args.instance.assemble(ProblemName::Gsr)?;
            write_json(&args.out, &purify(reduce::gsr_to_ne(&src)?))?;
            meta("ne");
        }
        ReductionName::Ne2nece => {
            let src = args.instance.assemble(ProblemName::Ne)?;
            let ProblemInstance::Ne { net1, net2 } = &src else {
                unreachable!()
            };
            let (net, node) = minimize::ne_to_nece(net1, net2)?;
            let net = if args.pure_relu {
                relucheck::net::id_to_relu(&net)
            } else {
                net
            };
            write_json(
                &args.out,
                &serde_json::json!({ "net": net, "nodes": [node.to_string()] }),
            )?;
            meta("nece");
        }
        ReductionName::Ne2anece => {
            let src = args.instance.assemble(ProblemName::Ne)?;
            let ProblemInstance::Ne { net1, net2 } = &src else {
                unreachable!()
            };
            let net = minimize::ne_to_anece(net1, net2, &DecideOptions::default())?;
            let net = if args.pure_relu {
                relucheck::net::id_to_relu(&net)
            } else {
                net
            };
            write_json(&args.out, &net)?;
            meta("anece");
        }
        ReductionName::Retract => {
            let net = args.instance.net()?;
            let source = args
                .source_metric
                .or(args.instance.metric)
                .ok_or_else(|| anyhow!("--source-metric is required"))?;
            let center = parse_center(
                args.instance
                    .center
                    .as_ref()
                    .ok_or_else(|| anyhow!("--center is required"))?,
            )?;
            let eps = args
                .instance
                .eps
                .clone()
                .ok_or_else(|| anyhow!("--eps is required"))?;
            let form = if args.legacy_t {
                RetractionForm::Legacy
            } else {
                RetractionForm::Symmetric
            };
            let composed =
                reduce::metric_retraction(&net, source, &center, &eps, form, args.abs_sum)?;
            let composed = if args.pure_relu {
                relucheck::net::id_to_relu(&composed)
            } else {
                composed
            };
            write_json(&args.out, &composed)?;
            println!(
                "{}",
                serde_json::json!({
                    "reduction": "retract",
                    "target_metric": args.lambda.clone().unwrap_or_else(|| "lambda".into()),
                    "wrote": args.out.display().to_string(),
                })
            );
        }
    }
    Ok(())
}

fn reduction_tag(name: ReductionName) -> &'static str {
    match name {
        ReductionName::Sr2vip => "sr2vip",
        ReductionName::Cr2vip => "cr2vip",
        ReductionName::Sr2cr => "sr2cr",
        ReductionName::Cr2sr => "cr2sr",
        ReductionName::Acr2cr => "acr2cr",
        ReductionName::Cr2acr => "cr2acr",
        ReductionName::Ne2cr => "ne2cr",
        ReductionName::Gsr2ne => "gsr2ne",
        ReductionName::Ne2nece => "ne2nece",
        ReductionName::Ne2anece => "ne2anece",
        ReductionName::Retract => "retract",
    }
}

fn cmd_gadget(args: &GadgetArgs) -> Result<()> {
    let text = fs::read_to_string(&args.cnf)
        .with_context(|| format!("cannot read CNF file '{}'", args.cnf.display()))?;
    let formula = cnf::parse_dimacs(&text)?;
    let inst = match args.target {
        GadgetTarget::Gsr => reduce::sat3_to_gsr(&formula)?,
        GadgetTarget::Lr => reduce::sat3_to_lr(&formula)?,
        GadgetTarget::Glr => reduce::sat3_to_glr(&formula)?,
    };
    let net = match &inst {
        ProblemInstance::Gsr { net, .. }
        | ProblemInstance::Lr { net, .. }
        | ProblemInstance::Glr { net, .. } => net.clone(),
        _ => unreachable!(),
    };
    let net_path = args.out.with_extension("net.json");
    let inst_path = args.out.with_extension("instance.json");
    write_json(&net_path, &net)?;
    write_json(&inst_path, &inst)?;
    println!(
        "{}",
        serde_json::json!({
            "gadget": match args.target {
                GadgetTarget::Gsr => "gsr",
                GadgetTarget::Lr => "lr",
                GadgetTarget::Glr => "glr",
            },
            "clauses": formula.clauses.len(),
            "variables": formula.num_vars,
            "net": net_path.display().to_string(),
            "instance": inst_path.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_certify(args: &CertifyArgs) -> Result<()> {
    let inst: ProblemInstance = read_json(&args.instance, "instance")?;
    let cert: Certificate = read_json(&args.certificate, "certificate")?;
    let opts = DecideOptions {
        strict_argmax: args.strict_argmax,
        parallel: false,
    };
    let ok = check_certificate(&inst, &cert, &opts)?;
    println!("{}", serde_json::json!({ "valid": ok }));
    eprintln!(
        "certificate {}",
        if ok { "accepted" } else { "rejected" }
    );
    Ok(())
}

fn cmd_falsify(args: &FalsifyArgs) -> Result<()> {
    let inst = args.instance.assemble(args.problem)?;
    let opts = DecideOptions {
        strict_argmax: args.strict_argmax,
        parallel: false,
    };
    let found = sample_falsify(&inst, args.trials, args.seed, &opts)?;
    println!(
        "{}",
        serde_json::json!({ "witness": found.as_ref().map(|w| serde_json::to_value(w).unwrap()) })
    );
    eprintln!(
        "{}",
        match found {
            Some(_) => "found a decisive point",
            None => "no decisive point in the sample budget",
        }
    );
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Gadget(a) => cmd_gadget(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Falsify(a) => cmd_falsify(a),
    }
}

fn main() -> ExitCode {
    match std::panic::catch_unwind(run) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("internal error");
            ExitCode::from(3)
        }
    }
}
