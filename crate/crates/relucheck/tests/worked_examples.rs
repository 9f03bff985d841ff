//! End-to-end walks through the worked example networks and the gadget
//! constructions, exercised through the public API only.

mod common;

use common::{
    cancelling_zero_net, empty_sum_zero_net, fin, plateau_classifier, q, split_identity_net, vq,
};
use relucheck::linspec::{LinRow, LinSpec};
use relucheck::minimize::{decide_anece, decide_nece, ne_to_anece, ne_to_nece};
use relucheck::net::{delete_nodes, freeze_input, Network, NodeRef};
use relucheck::rat::{ExtRational, Metric, RatVector};
use relucheck::reduce::cnf::{parse_dimacs, Clause, Cnf3, Lit};
use relucheck::reduce::{sat3_to_gsr, sat3_to_lr, sat_spread_network};
use relucheck::verify::{
    decide, decide_exhaustive, sample_falsify, witness_confirms, DecideOptions, ProblemInstance,
};

fn opts() -> DecideOptions {
    DecideOptions::default()
}

#[test]
fn split_identity_net_computes_identity_and_its_parts() {
    let n = split_identity_net();
    assert_eq!(n.evaluate(&vq(&["-3"])).unwrap(), vq(&["-3"]));

    let negative_part = delete_nodes(&n, &[NodeRef::new(1, 0)]).unwrap();
    assert_eq!(negative_part.evaluate(&vq(&["-2"])).unwrap(), vq(&["-2"]));
    assert_eq!(negative_part.evaluate(&vq(&["3"])).unwrap(), vq(&["0"]));

    let positive_part = delete_nodes(&n, &[NodeRef::new(1, 1)]).unwrap();
    assert_eq!(positive_part.evaluate(&vq(&["3"])).unwrap(), vq(&["3"]));
    assert_eq!(positive_part.evaluate(&vq(&["-2"])).unwrap(), vq(&["0"]));

    let zero = empty_sum_zero_net();
    for s in ["-9", "0", "22/7"] {
        assert_eq!(zero.evaluate(&vq(&[s])).unwrap(), vq(&["0"]));
    }
}

#[test]
fn equivalence_web_around_the_worked_nets() {
    let n = split_identity_net();
    let direct = Network::identity(1);
    assert!(decide(
        &ProblemInstance::Ne { net1: n.clone(), net2: direct },
        &opts()
    )
    .unwrap()
    .holds);

    let k = cancelling_zero_net();
    let q_net = empty_sum_zero_net();
    assert!(decide(
        &ProblemInstance::Ne { net1: k, net2: q_net },
        &opts()
    )
    .unwrap()
    .holds);
}

#[test]
fn necessity_results_for_the_worked_nets() {
    let n = split_identity_net();
    let v = decide_nece(&n, &[NodeRef::new(1, 0)], &opts()).unwrap();
    assert!(v.holds);
    assert!(v.witness.unwrap()[0].is_positive());
    assert!(decide_anece(&n, &opts()).unwrap().holds);

    let k = cancelling_zero_net();
    let both = [NodeRef::new(1, 0), NodeRef::new(1, 1)];
    assert!(!decide_nece(&k, &both, &opts()).unwrap().holds);
    let v = decide_anece(&k, &opts()).unwrap();
    assert!(!v.holds);
    assert_eq!(v.unnecessary_subset.unwrap(), both.to_vec());
}

#[test]
fn necessity_bridges_agree_with_equivalence() {
    let n = split_identity_net();
    let clipped = delete_nodes(&n, &[NodeRef::new(1, 0)]).unwrap();

    let (p, y) = ne_to_nece(&n, &clipped).unwrap();
    assert!(decide_nece(&p, &[y], &opts()).unwrap().holds);

    let z = ne_to_anece(&n, &Network::identity(1), &opts()).unwrap();
    assert!(decide_anece(&z, &opts()).unwrap().holds);
    let z = ne_to_anece(&n, &clipped, &opts()).unwrap();
    assert!(!decide_anece(&z, &opts()).unwrap().holds);
}

#[test]
fn frozen_nets_are_constant() {
    let n = split_identity_net();
    let frozen = freeze_input(&n, &vq(&["7"])).unwrap();
    for s in ["-5", "0", "3/2"] {
        assert_eq!(frozen.evaluate(&vq(&[s])).unwrap(), vq(&["7"]));
    }
}

#[test]
fn plateau_classifier_robustness_geometry() {
    let f = plateau_classifier();
    // At radius 1/2 some label is safe at every center: the ball never
    // spans the whole plateau into both strict-class regions.
    for c in ["-3", "-1", "-3/4", "-1/2", "0", "1/4", "1/2", "3/4", "1", "3"] {
        let inst = ProblemInstance::Acr {
            net: f.clone(),
            metric: Metric::Linf,
            eps: fin("1/2"),
            center: vq(&[c]),
        };
        assert!(decide(&inst, &opts()).unwrap().holds, "center {}", c);
    }
    // At radius 1 only centers at distance >= 1/2 from the plateau
    // midpoint stay robust; a ball centered inside the plateau reaches
    // both strict-class regions.
    for (c, expect) in [
        ("-2", true),
        ("-1", true),
        ("-1/2", true),
        ("-1/4", false),
        ("0", false),
        ("1/4", false),
        ("1/2", true),
        ("2", true),
    ] {
        let inst = ProblemInstance::Acr {
            net: f.clone(),
            metric: Metric::Linf,
            eps: fin("1"),
            center: vq(&[c]),
        };
        assert_eq!(decide(&inst, &opts()).unwrap().holds, expect, "center {}", c);
    }
}

#[test]
fn reachability_of_the_zero_net() {
    let zero = empty_sum_zero_net();
    let inst = ProblemInstance::Nnr {
        net: zero,
        inspec: LinSpec::trivial(1),
        outspec: LinSpec::new(1, vec![LinRow::eq(vec![q("1")], q("0"))]).unwrap(),
    };
    let v = decide(&inst, &opts()).unwrap();
    assert!(v.holds);
    assert!(witness_confirms(&inst, v.witness.as_ref().unwrap()).unwrap());
}

#[test]
fn gadget_values_and_verdicts_for_a_single_clause() {
    let cnf = Cnf3::new(3, vec![Clause([Lit::pos(0), Lit::pos(1), Lit::pos(2)])]).unwrap();
    let net = sat_spread_network(&cnf);
    assert_eq!(
        net.evaluate(&vq(&["1", "1", "1"])).unwrap(),
        vq(&["1"])
    );
    assert_eq!(
        net.evaluate(&vq(&["1/2", "1/2", "1/2"])).unwrap(),
        vq(&["0"])
    );
    let gsr = sat3_to_gsr(&cnf).unwrap();
    let v = decide(&gsr, &opts()).unwrap();
    assert!(!v.holds, "a satisfiable formula breaks global robustness");
    assert!(witness_confirms(&gsr, v.witness.as_ref().unwrap()).unwrap());
}

#[test]
fn lr_gadget_parameter_shape() {
    let cnf = Cnf3::new(2, vec![Clause([Lit::pos(0), Lit::neg(1), Lit::pos(1)])]).unwrap();
    let lr = sat3_to_lr(&cnf).unwrap();
    let ProblemInstance::Lr {
        eps, lip, center, ..
    } = &lr
    else {
        panic!("expected LR instance");
    };
    assert_eq!(eps, &fin("1/2"));
    assert_eq!(lip, &fin("1")); // 2n - 1 with one clause
    assert_eq!(center, &RatVector::new(vec![q("1/2"), q("1/2")]));
    assert!(!decide(&lr, &opts()).unwrap().holds);
}

#[test]
fn dimacs_to_verdict_pipeline() {
    let unsat = parse_dimacs("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    assert!(!unsat.satisfiable());
    let gsr = sat3_to_gsr(&unsat).unwrap();
    assert!(decide(&gsr, &opts()).unwrap().holds);
    let lr = sat3_to_lr(&unsat).unwrap();
    assert!(decide(&lr, &opts()).unwrap().holds);
}

#[test]
fn exhaustive_oracle_handles_every_problem_shape() {
    let mut r = common::rng(41);
    for problem in ["nnr", "vip", "ne", "sr", "cr", "acr", "lr", "gsr", "glr"] {
        let inst = common::rand_instance(&mut r, problem, 6);
        let fast = decide(&inst, &opts()).unwrap();
        let slow = decide_exhaustive(&inst, &opts()).unwrap();
        assert_eq!(fast.holds, slow.holds, "{} disagreed", problem);
    }
}

#[test]
fn sampling_respects_l1_balls() {
    let inst = ProblemInstance::Sr {
        net: Network::identity(2),
        metric: Metric::L1,
        eps: fin("1"),
        delta: fin("1/4"),
        center: vq(&["0", "0"]),
    };
    let w = sample_falsify(&inst, 2000, 3, &opts())
        .unwrap()
        .expect("identity moves a quarter past somewhere in the ball");
    assert!(witness_confirms(&inst, &w).unwrap());
    assert!(
        relucheck::linspec::in_ball(Metric::L1, &vq(&["0", "0"]), &fin("1"), &w).unwrap()
    );
}

#[test]
fn certificates_replay_across_serialization() {
    let inst = ProblemInstance::Vip {
        net: split_identity_net(),
        inspec: LinSpec::new(
            1,
            vec![
                LinRow::le(vec![q("1")], q("1")),
                LinRow::le(vec![q("-1")], q("1")),
            ],
        )
        .unwrap(),
        outspec: LinSpec::new(1, vec![LinRow::le(vec![q("1")], q("1/2"))]).unwrap(),
    };
    let v = decide(&inst, &opts()).unwrap();
    assert!(!v.holds);
    let cert = v.certificate.unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    let back: relucheck::verify::Certificate = serde_json::from_str(&json).unwrap();
    assert!(relucheck::verify::check_certificate(&inst, &back, &opts()).unwrap());
}

#[test]
fn instance_files_roundtrip_through_json() {
    let inst = ProblemInstance::Gsr {
        net: split_identity_net(),
        metric: Metric::Linf,
        eps: ExtRational::Infinity,
        delta: fin("3/2"),
    };
    let text = serde_json::to_string_pretty(&inst).unwrap();
    let back: ProblemInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(
        decide(&back, &opts()).unwrap().holds,
        decide(&inst, &opts()).unwrap().holds
    );
}
