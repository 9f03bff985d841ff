//! Randomized falsification by exact sampling.
//!
//! Points are drawn as exact rationals inside the instance's relevant
//! region (metric ball, input polytope, or free space) and the defining
//! property is evaluated directly at each. Whatever comes back is a real
//! witness by construction; on instances where the property holds the
//! sampler can only ever return nothing.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linspec::{satisfied_by, LinSpec};
use crate::lp::{feasible, Feasibility};
use crate::rat::{ExtRational, Metric, RatVector, Rational};
use crate::verify::property::witness_confirms_opt;
use crate::verify::{DecideOptions, ProblemInstance};
use crate::Error;

/// A fraction in [-1, 1] with denominator up to `den_max`.
fn rand_frac(rng: &mut ChaCha8Rng, den_max: i64) -> Rational {
    let den = rng.gen_range(1..=den_max);
    let num = rng.gen_range(-den..=den);
    Rational::new(num, den).expect("nonzero denominator")
}

/// A spread-out rational in [-8, 8].
fn rand_spread(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.gen_range(1..=8i64);
    let num = rng.gen_range(-8 * den..=8 * den);
    Rational::new(num, den).expect("nonzero denominator")
}

/// Exact point in the metric ball around `center`.
fn ball_point(
    rng: &mut ChaCha8Rng,
    metric: Metric,
    center: &RatVector,
    eps: &ExtRational,
) -> RatVector {
    let n = center.dim();
    let offsets: Vec<Rational> = match eps {
        ExtRational::Infinity => (0..n).map(|_| rand_spread(rng)).collect(),
        ExtRational::Finite(e) => {
            let mut t: Vec<Rational> = (0..n).map(|_| e * &rand_frac(rng, 12)).collect();
            if metric == Metric::L1 {
                let s: Rational = t
                    .iter()
                    .fold(Rational::zero(), |acc, v| acc + v.abs());
                if &s > e && !s.is_zero() {
                    // Scale into the ball, keeping everything rational.
                    let shrink = &(e / &s) * &rand_frac(rng, 8).abs();
                    for v in t.iter_mut() {
                        *v = &*v * &shrink;
                    }
                }
            }
            t
        }
    };
    center
        .iter()
        .zip(offsets.iter())
        .map(|(c, o)| c + o)
        .collect()
}

/// Rejection sampling around a feasible anchor of the polytope.
fn polytope_point(
    rng: &mut ChaCha8Rng,
    spec: &LinSpec,
    anchor: &RatVector,
    attempt: usize,
) -> Option<RatVector> {
    let scale = Rational::new(1, 1 << (attempt % 4)).expect("power of two");
    let candidate: RatVector = anchor
        .iter()
        .map(|c| c + &(&rand_spread(rng) * &scale))
        .collect();
    match satisfied_by(spec, &candidate) {
        Ok(true) => Some(candidate),
        _ => None,
    }
}

/// Draws up to `trials` exact points in the instance's region and returns
/// the first at which direct evaluation decides the instance: a violation
/// witness for the universal problems, a reaching point for reachability.
pub fn sample_falsify(
    inst: &ProblemInstance,
    trials: usize,
    seed: u64,
    opts: &DecideOptions,
) -> Result<Option<RatVector>, Error> {
    inst.validate()?;
    if trials == 0 {
        return Err(Error::BadInstance("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = match inst {
        ProblemInstance::Nnr { inspec, .. } | ProblemInstance::Vip { inspec, .. } => {
            match feasible(inspec) {
                Feasibility::Feasible(w) => Some(w),
                Feasibility::Infeasible => return Ok(None),
            }
        }
        _ => None,
    };
    for attempt in 0..trials {
        let candidate = match inst {
            ProblemInstance::Nnr { inspec, .. } | ProblemInstance::Vip { inspec, .. } => {
                let anchor = anchor.as_ref().expect("anchor computed above");
                let Some(p) = polytope_point(&mut rng, inspec, anchor, attempt) else {
                    continue;
                };
                p
            }
            ProblemInstance::Ne { net1, .. } => {
                (0..net1.input_dim()).map(|_| rand_spread(&mut rng)).collect()
            }
            ProblemInstance::Sr {
                metric, eps, center, ..
            }
            | ProblemInstance::Cr {
                metric, eps, center, ..
            }
            | ProblemInstance::Acr {
                metric, eps, center, ..
            }
            | ProblemInstance::Lr {
                metric, eps, center, ..
            } => ball_point(&mut rng, *metric, center, eps),
            ProblemInstance::Gsr { net, eps, .. } | ProblemInstance::Glr { net, eps, .. } => {
                let y: RatVector = (0..net.input_dim())
                    .map(|_| rand_spread(&mut rng))
                    .collect();
                let x = ball_point(&mut rng, Metric::Linf, &y, eps);
                x.concat(&y)
            }
        };
        if witness_confirms_opt(inst, &candidate, opts.strict_argmax)? {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}
