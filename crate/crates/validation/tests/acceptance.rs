//! One line per criterion, PASS or FAIL, then a nonzero exit if any failed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weaktrace::engine::{classical_path, propagate, Loc, Op};
use weaktrace::envtrace::{default_grid, evolve_env, joint_trace, local_trace, order_fit, region_env_trace, EnvModel};
use weaktrace::netlist::{Kind, Value};
use weaktrace::protocol::{error_probability, per_trial, sample, session, stream, ProtocolSpec};
use weaktrace::tsvf::{presence_probability, region_trace, trace_map, DARK_AMPLITUDE};
use weaktrace::tuner::{tune, TuneOptions};
use weaktrace::{ConcreteNetwork, Network};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn outside_alice() -> Vec<String> {
    vec!["Channel".into(), "Bob".into()]
}

fn cfg(net: &Network, name: &str) -> ConcreteNetwork {
    net.apply_config(name).unwrap()
}

fn order_of(f: impl Fn(f64) -> f64) -> f64 {
    order_fit(|e| Ok(f(e)), &default_grid()).map(|f| f.exponent).unwrap_or(f64::NAN)
}

fn outside_order(cn: &ConcreteNetwork, det: &str, cap: usize) -> f64 {
    order_of(|e| {
        let st = evolve_env(cn, EnvModel::new(e, cap).unwrap()).unwrap();
        region_env_trace(cn, &st, det, &outside_alice()).unwrap().0
    })
}

fn ratio_is(net: &Network, elem: &str, m: f64, n: f64) -> bool {
    matches!(&net.element(elem).unwrap().kind,
        Kind::BeamSplitter { m: Value::Lit(a), n: Value::Lit(b), .. } if *a / (*a + *b) == m / (m + n))
}

/// Every shipped network under every config.
fn shipped() -> Vec<(String, ConcreteNetwork)> {
    let mut out = Vec::new();
    let fig1 = common::tuned("fig1.net");
    let nets = [
        ("fig1", fig1.clone()),
        ("fig1/repartition", fig1.relabel(&common::repartition()).unwrap()),
        ("fig4", common::tuned("fig4.net")),
        ("mzi", common::load("mzi.net")),
        ("ifm", common::load("ifm.net")),
    ];
    for (label, net) in nets {
        for c in &net.configs {
            out.push((format!("{label}:{}", c.name), cfg(&net, &c.name)));
        }
    }
    out
}

fn random_nets(count: u64) -> Vec<(String, ConcreteNetwork)> {
    (0..count)
        .map(|s| (format!("random#{s}"), Network::parse(&common::random_network(s, 10)).unwrap().concrete().unwrap()))
        .collect()
}

/// Detectors that can be post-selected on.
fn lit_detectors(cn: &ConcreteNetwork) -> Vec<String> {
    let fwd = propagate(cn);
    cn.nodes
        .iter()
        .enumerate()
        .filter(|(i, n)| matches!(n.op, Op::Detector) && fwd.terminal[*i].norm() >= DARK_AMPLITUDE)
        .map(|(_, n)| n.name.clone())
        .collect()
}

fn c1_tuning() -> Outcome {
    let net = common::load("fig1.net");
    ensure(ratio_is(&net, "BS1", 3.0, 8.0) && ratio_is(&net, "BS2", 1.0, 2.0), "ratios are not 3:8 and 1:2")?;
    for e in ["X", "W", "Z", "V"] {
        ensure(ratio_is(&net, e, 1.0, 1.0), format!("{e} is not 1:1"))?;
    }
    let (tuned, sol) = tune(&net, false, &TuneOptions::default()).map_err(|e| e.to_string())?;
    let open = propagate(&cfg(&tuned, "open"));
    let blocked = propagate(&cfg(&tuned, "blocked"));
    let d1 = open.terminal[cfg(&tuned, "open").node_index("D1").unwrap()].norm();
    let d2 = blocked.terminal[cfg(&tuned, "blocked").node_index("D2").unwrap()].norm();
    ensure(sol.residual < 1e-10, format!("residual {:.3e}", sol.residual))?;
    ensure(d1 < 1e-10 && d2 < 1e-10, format!("|D1|open = {d1:.3e}, |D2|blocked = {d2:.3e}"))?;
    Ok(format!("residual {:.2e}, |D1|open {d1:.1e}, |D2|blocked {d2:.1e}", sol.residual))
}

fn c2_success() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (file, want) in [("fig1.net", 2.0 / 11.0), ("fig4.net", 2.0 / 35.0)] {
        let s = ProtocolSpec::standard(common::tuned(file)).unwrap();
        let p0 = per_trial(&s, 0).unwrap().get("D2").unwrap();
        let p1 = per_trial(&s, 1).unwrap().get("D1").unwrap();
        ok &= (p0 - want).abs() < 1e-9 && (p1 - want).abs() < 1e-9;
        detail.push(format!("{file}: P(D2|open) {p0:.6}, P(D1|blocked) {p1:.6}, want {want:.6}"));
    }
    let d = detail.join("; ");
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

fn c3_zero_error() -> Outcome {
    let mut worst = 0.0f64;
    for file in ["fig1.net", "fig4.net"] {
        let s = ProtocolSpec::standard(common::tuned(file)).unwrap();
        for b in 0..2 {
            worst = worst.max(error_probability(&s, b).unwrap());
        }
    }
    ensure(worst < 1e-18, format!("wrong-detector probability {worst:.3e}"))?;
    let s = ProtocolSpec::standard(common::tuned("fig1.net")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<u8> = (0..1000).map(|_| rng.random_range(0..2)).collect();
    let st = session(&s, &bits, 1).map_err(|e| e.to_string())?;
    ensure(st.errors == 0, format!("{} errors in 1000 bits", st.errors))?;
    Ok(format!("max wrong-detector probability {worst:.1e}; 1000 bits, 0 errors, {:.2} photons per bit", st.mean_trials))
}

fn c4_classical_path() -> Outcome {
    let net = common::tuned("fig1.net");
    for (c, det) in [("open", "D2"), ("blocked", "D1")] {
        let cn = cfg(&net, c);
        let fwd = propagate(&cn);
        for region in [vec!["Bob".to_string()], outside_alice()] {
            let p = classical_path(&cn, &fwd, &region, det, 1e-9).unwrap();
            ensure(!p, format!("{c}: bright path through {region:?} to {det}"))?;
        }
    }
    Ok("no bright path through Bob (nor Channel) for either bit".into())
}

fn c5_trace_maps() -> Outcome {
    let fig1 = common::tuned("fig1.net");
    let away = outside_alice();
    let ch = vec!["Channel".to_string()];

    let cn = cfg(&fig1, "blocked");
    let v = region_trace(&cn, &trace_map(&cn, "D1").unwrap(), &away).unwrap();
    ensure(!v.present, format!("fig1 bit 1 has a trace outside Alice on {:?}", v.arms))?;

    let cn = cfg(&fig1, "open");
    let tm = trace_map(&cn, "D2").unwrap();
    let wb = tm.w[cn.arm_index("B").unwrap()];
    ensure(tm.present[cn.arm_index("B").unwrap()], "fig1 bit 0 has no trace in B")?;

    let rp = fig1.relabel(&common::repartition()).unwrap();
    let cn = cfg(&rp, "open");
    let v0 = region_trace(&cn, &trace_map(&cn, "D2").unwrap(), &ch).unwrap();
    let cn = cfg(&rp, "blocked");
    let v1 = region_trace(&cn, &trace_map(&cn, "D1").unwrap(), &ch).unwrap();
    ensure(!v0.present && v1.present, format!("repartition: bit 0 {:?}, bit 1 {:?}", v0.arms, v1.arms))?;

    let fig4 = common::tuned("fig4.net");
    for (c, det) in [("open", "D2"), ("blocked", "D1")] {
        let cn = cfg(&fig4, c);
        let v = region_trace(&cn, &trace_map(&cn, det).unwrap(), &away).unwrap();
        ensure(!v.present, format!("fig4 {c}: trace outside Alice on {:?}", v.arms))?;
    }
    Ok(format!("fig1 w_B = {:.3}{:+.3}i; repartition channel arms for bit 1: {:?}", wb.re, wb.im, v1.arms))
}

fn c6_exhaustive() -> Outcome {
    let fig1 = common::tuned("fig1.net");
    let ch = vec!["Channel".to_string()];
    let mut lines = Vec::new();
    for (label, net) in [("original", fig1.clone()), ("repartition", fig1.relabel(&common::repartition()).unwrap())] {
        let mut hit = Vec::new();
        for (bit, c, det) in [(0, "open", "D2"), (1, "blocked", "D1")] {
            let cn = cfg(&net, c);
            if region_trace(&cn, &trace_map(&cn, det).unwrap(), &ch).unwrap().present {
                hit.push(bit);
            }
        }
        ensure(!hit.is_empty(), format!("{label}: no bit leaves a channel trace"))?;
        lines.push(format!("{label}: channel trace for bit {hit:?}"));
    }
    Ok(lines.join("; "))
}

fn c7_orders() -> Outcome {
    let fig4 = cfg(&common::tuned("fig4.net"), "open");
    let p4 = outside_order(&fig4, "D2", 3);
    let chain3 = cfg(&common::tuned_chain(3), "open");
    let p3 = outside_order(&chain3, "D2", 4);
    let pj = order_of(|e| {
        let st = evolve_env(&fig4, EnvModel::new(e, 3).unwrap()).unwrap();
        joint_trace(&fig4, &st, "D2", ("B", "B'")).unwrap().norm()
    });
    let line: ConcreteNetwork = Network::parse(
        "network two\nsite L\nelem S : source @ L\nelem M : mirror @ L\nelem D : detector @ L\n\
         arm a : S.c -> M.a @ L\narm b : M.c -> D.a @ L\n",
    )
    .unwrap()
    .concrete()
    .unwrap();
    let pr = order_of(|e| {
        let st = evolve_env(&line, EnvModel::new(e, 2).unwrap()).unwrap();
        joint_trace(&line, &st, "D", ("a", "b")).unwrap().norm()
    });
    let d = format!("fig4 {p4:.3}, chain(3) {p3:.3}, joint(B,B') {pj:.3}, two-arm reference {pr:.3}");
    let ok = (p4 - 2.0).abs() <= 0.1 && (p3 - 3.0).abs() <= 0.1 && (pj - 2.0).abs() <= 0.1 && (pj - pr).abs() <= 0.1;
    if ok {
        Ok(d)
    } else {
        Err(d)
    }
}

/// Ratios scaled and phases shifted by up to 5%.
fn perturb(cn: &ConcreteNetwork, rng: &mut ChaCha8Rng) -> ConcreteNetwork {
    let mut out = cn.clone();
    let jitter = |rng: &mut ChaCha8Rng| rng.random_range(-0.05..0.05);
    for node in &mut out.nodes {
        match &mut node.op {
            Op::Split { r, phase } => {
                *r = (*r * (1.0 + jitter(rng))).clamp(1e-6, 1.0 - 1e-6);
                *phase += jitter(rng) * std::f64::consts::TAU;
            }
            Op::Phase(t) => *t += jitter(rng) * std::f64::consts::TAU,
            _ => {}
        }
    }
    out
}

/// Largest detector-term amplitude with a flipped environment outside Alice.
fn outside_leak(cn: &ConcreteNetwork, eps: f64) -> f64 {
    let sites = cn.region(&outside_alice()).unwrap();
    let mask: u128 = cn
        .arms
        .iter()
        .enumerate()
        .filter(|(_, a)| sites.contains(&a.site))
        .fold(0, |m, (k, _)| m | 1u128 << k);
    let st = evolve_env(cn, EnvModel::new(eps, 3).unwrap()).unwrap();
    st.terms
        .iter()
        .filter(|t| matches!(t.loc, Loc::Terminal(i) if matches!(cn.nodes[i].op, Op::Detector)) && t.flips & mask != 0)
        .map(|t| t.amp.norm())
        .fold(0.0, f64::max)
}

fn c8_robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut runs = 0;
    for file in ["fig1.net", "fig4.net"] {
        let blocked = cfg(&common::tuned(file), "blocked");
        for _ in 0..25 {
            let p = perturb(&blocked, &mut rng);
            for eps in [0.01, 0.1] {
                worst = worst.max(outside_leak(&p, eps));
                runs += 1;
            }
        }
    }
    ensure(worst <= 1e-12, format!("opacity 1: outside amplitude {worst:.3e}"))?;
    let leaky = cfg(&common::tuned("fig1.net"), "leaky");
    let leak = outside_leak(&leaky, 0.01);
    ensure(leak > 1e-12, "opacity 0.99 leaves no trace outside Alice")?;
    Ok(format!("{runs} perturbed runs, max outside amplitude {worst:.1e}; leaky {leak:.2e}"))
}

fn c9_presence() -> Outcome {
    let mut checked = 0usize;
    for (label, cn) in shipped().into_iter().chain(random_nets(100)) {
        for det in lit_detectors(&cn) {
            let tm = trace_map(&cn, &det).unwrap();
            for (k, arm) in cn.arms.iter().enumerate() {
                let p = presence_probability(&cn, std::slice::from_ref(&arm.name), &det).unwrap().found_any;
                let w = tm.w[k];
                let (w1, w0) = ((w - 1.0).norm() < 1e-9, w.norm() < 1e-9);
                let (p1, p0) = ((p - 1.0).abs() < 1e-9, p < 1e-9);
                ensure(w1 == p1 && w0 == p0, format!("{label} {det} {}: w = {w}, P = {p}", arm.name))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (network, detector, arm) cases"))
}

fn c10_oracles() -> Outcome {
    let mut dense_err = 0.0f64;
    let mut trace_err = 0.0f64;
    let all: Vec<_> = shipped().into_iter().chain(random_nets(100)).collect();
    for (_, cn) in &all {
        let fwd = propagate(cn);
        for (a, b) in fwd.amp.iter().zip(common::dense_amplitudes(cn)) {
            dense_err = dense_err.max((a - b).norm());
        }
    }
    let eps = 1e-3;
    for (_, cn) in &all {
        for det in lit_detectors(cn) {
            let tm = trace_map(cn, &det).unwrap();
            let st = evolve_env(cn, EnvModel::new(eps, 2).unwrap()).unwrap();
            for (k, arm) in cn.arms.iter().enumerate() {
                let l: Complex64 = local_trace(cn, &st, &det, &arm.name).unwrap();
                trace_err = trace_err.max((l / eps - tm.w[k]).norm());
            }
        }
    }
    ensure(dense_err < 1e-12, format!("engine vs dense {dense_err:.3e}"))?;
    ensure(trace_err < 1e-4, format!("local/eps vs w {trace_err:.3e}"))?;

    let n = 100_000u64;
    let mut worst_z = 0.0f64;
    for (i, file) in ["fig1.net", "fig4.net"].into_iter().enumerate() {
        let s = ProtocolSpec::standard(common::tuned(file)).unwrap();
        for bit in 0..2u8 {
            let d = per_trial(&s, bit).unwrap();
            let probs: Vec<f64> = d.outcomes.iter().map(|o| o.p).collect();
            let mut counts = vec![0u64; probs.len()];
            let mut rng = stream(10, 2 * i + bit as usize);
            for _ in 0..n {
                counts[sample(&mut rng, &probs)] += 1;
            }
            for ((o, p), c) in d.outcomes.iter().zip(&probs).zip(&counts) {
                let sigma = (n as f64 * p * (1.0 - p)).sqrt();
                let dev = (*c as f64 - n as f64 * p).abs();
                if sigma == 0.0 {
                    ensure(*c == 0, format!("{file} bit {bit}: impossible outcome {} drawn", o.name))?;
                    continue;
                }
                let z = dev / sigma;
                worst_z = worst_z.max(z);
                ensure(z <= 3.0, format!("{file} bit {bit} {}: {z:.2} sigma", o.name))?;
            }
        }
    }
    Ok(format!(
        "dense {dense_err:.1e}, local/eps {trace_err:.1e} over {} networks; Monte Carlo worst {worst_z:.2} sigma",
        all.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fig1 tuning", c1_tuning),
        ("success probabilities", c2_success),
        ("zero-error communication", c3_zero_error),
        ("no classical path through Bob", c4_classical_path),
        ("trace maps", c5_trace_maps),
        ("partition exhaustiveness", c6_exhaustive),
        ("environment orders", c7_orders),
        ("bit-1 robustness", c8_robustness),
        ("weak value and strong presence agree", c9_presence),
        ("cross-module oracles", c10_oracles),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
