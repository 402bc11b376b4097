mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use weaktrace::engine::{outcome_distribution, propagate};
use weaktrace::envtrace::{evolve_env, local_trace, EnvModel};
use weaktrace::tsvf::{backward_unchecked, presence_probability, trace_map, PRESENCE_THRESHOLD};
use weaktrace::{ConcreteNetwork, Network};

fn concrete(seed: u64) -> ConcreteNetwork {
    Network::parse(&common::random_network(seed, 14)).unwrap().concrete().unwrap()
}

/// Detectors that click with some margin.
fn bright(net: &ConcreteNetwork) -> Vec<String> {
    let fwd = propagate(net);
    net.nodes
        .iter()
        .enumerate()
        .filter(|(i, n)| n.op.is_terminal() && fwd.terminal[*i].norm() > 1e-4 && net.detector(&n.name).is_ok())
        .map(|(_, n)| n.name.clone())
        .collect()
}

/// Put a phase plate between the source and whatever it feeds.
fn with_source_phase(text: &str, alpha: f64) -> String {
    let mut t = text.replacen("S.c ->", "G.c ->", 1);
    t += &format!("elem G : phase({alpha}) @ A\narm g0 : S.c -> G.a @ A\n");
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn probability_is_conserved(seed in any::<u64>()) {
        let net = concrete(seed);
        let fwd = propagate(&net);
        prop_assert!((fwd.total() - 1.0).abs() < 1e-12);
        prop_assert!((outcome_distribution(&net).total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitudes_agree_with_linear_solve(seed in any::<u64>()) {
        let net = concrete(seed);
        let fwd = propagate(&net);
        let dense = common::dense_amplitudes(&net);
        for (a, b) in fwd.amp.iter().zip(&dense) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn weak_values_sum_to_one_across_every_cut(seed in any::<u64>()) {
        let net = concrete(seed);
        for det in bright(&net) {
            let tm = trace_map(&net, &det).unwrap();
            let d = net.detector(&det).unwrap();
            for cut in 1..net.order.len() {
                let head = &net.order[..cut];
                if head.contains(&d) {
                    break;
                }
                let sum: Complex64 = net
                    .arms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| head.contains(&a.from) && !head.contains(&a.to))
                    .map(|(k, _)| tm.w[k])
                    .sum();
                prop_assert!((sum - 1.0).norm() < 1e-9, "cut {cut}: {sum}");
            }
        }
    }

    #[test]
    fn strong_presence_follows_the_weak_value(seed in any::<u64>()) {
        let net = concrete(seed);
        for det in bright(&net) {
            let tm = trace_map(&net, &det).unwrap();
            for (k, arm) in net.arms.iter().enumerate() {
                let p = presence_probability(&net, std::slice::from_ref(&arm.name), &det).unwrap().found_any;
                let w = tm.w[k];
                let expect = w.norm_sqr() / (w.norm_sqr() + (Complex64::new(1.0, 0.0) - w).norm_sqr());
                prop_assert!((p - expect).abs() < 1e-9, "{}: {p} vs {expect}", arm.name);
                if w.norm() < PRESENCE_THRESHOLD {
                    prop_assert!(p < 1e-12);
                }
            }
        }
    }

    #[test]
    fn backward_amplitude_is_a_transfer_amplitude(seed in any::<u64>()) {
        // conj(φ_s) is the detector amplitude from a unit excitation on arm s;
        // at the source arm this is the forward detector amplitude
        let net = concrete(seed);
        let fwd = propagate(&net);
        for det in bright(&net) {
            let d = net.detector(&det).unwrap();
            let b = backward_unchecked(&net, d);
            let first = net.nodes[net.source].outputs[0].unwrap();
            prop_assert!((b.amp[first].conj() - fwd.terminal[d]).norm() < 1e-12);
        }
    }

    #[test]
    fn global_phase_changes_nothing_observable(seed in any::<u64>(), alpha in 0.0..std::f64::consts::TAU) {
        let text = common::random_network(seed, 14);
        let a: ConcreteNetwork = Network::parse(&text).unwrap().concrete().unwrap();
        let b: ConcreteNetwork = Network::parse(&with_source_phase(&text, alpha)).unwrap().concrete().unwrap();
        let (pa, pb) = (outcome_distribution(&a), outcome_distribution(&b));
        for o in &pa.outcomes {
            prop_assert!((o.p - pb.get(&o.name).unwrap()).abs() < 1e-12);
        }
        for det in bright(&a) {
            let (ta, tb) = (trace_map(&a, &det).unwrap(), trace_map(&b, &det).unwrap());
            for (k, arm) in a.arms.iter().enumerate() {
                let j = b.arm_index(&arm.name).unwrap();
                prop_assert!((ta.w[k] - tb.w[j]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let net = Network::parse(&common::random_network(seed, 14)).unwrap();
        let again = Network::parse(&net.print()).unwrap();
        prop_assert_eq!(&again, &net);
        prop_assert_eq!(again.print(), net.print());
    }

    #[test]
    fn untruncated_environment_keeps_the_norm(seed in any::<u64>(), eps in 0.01..0.5f64) {
        let net = concrete(seed);
        let st = evolve_env(&net, EnvModel::new(eps, net.arms.len()).unwrap()).unwrap();
        // absorption is a branch of its own
        prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_environment_term_is_the_weak_value(seed in any::<u64>()) {
        let net = concrete(seed);
        let eps = 1e-4;
        for det in bright(&net) {
            let tm = trace_map(&net, &det).unwrap();
            let st = evolve_env(&net, EnvModel::new(eps, 2).unwrap()).unwrap();
            for (k, arm) in net.arms.iter().enumerate() {
                let l = local_trace(&net, &st, &det, &arm.name).unwrap() / eps;
                prop_assert!((l - tm.w[k]).norm() < 1e-6 * tm.w[k].norm().max(1.0) + 1e-12 * 1e4);
            }
        }
    }
}
