#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weaktrace::engine::Op;
use weaktrace::tuner::{self, TuneOptions};
use weaktrace::{ConcreteNetwork, Network};

pub fn network_path(name: &str) -> String {
    format!("{}/../../networks/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(network_path(name)).unwrap()
}

pub fn load(name: &str) -> Network {
    Network::parse(&read(name)).unwrap()
}

pub fn tuned(name: &str) -> Network {
    tuner::tune(&load(name), false, &TuneOptions::default()).unwrap().0
}

/// fig1 with its stage repeated `n` times and BS1 retuned.
pub fn tuned_chain(n: usize) -> Network {
    tuner::tune(&load("fig1.net").chain(n).unwrap(), true, &TuneOptions::default()).unwrap().0
}

pub fn repartition() -> Vec<(String, String)> {
    weaktrace::netlist::parse_sites(&read("fig1_repartition.sites")).unwrap()
}

/// Arm amplitudes from `(I - S) ψ = b`, where `S[k][j]` is the amplitude to
/// go from arm `j` into arm `k` through one element and `b` is the source
/// emission. Written against the element definitions, not the engine.
pub fn dense_amplitudes(net: &ConcreteNetwork) -> Vec<Complex64> {
    let n = net.arms.len();
    let i = Complex64::i();
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    for node in &net.nodes {
        let out = node.outputs;
        let inp = node.inputs;
        let mut link = |from: Option<usize>, to: Option<usize>, a: Complex64| {
            if let (Some(f), Some(t)) = (from, to) {
                s[(t, f)] += a;
            }
        };
        match node.op {
            Op::Source => {
                if let Some(k) = out[0] {
                    b[k] = Complex64::new(1.0, 0.0);
                }
            }
            Op::Split { r, phase } => {
                let (sr, st) = (r.sqrt(), (1.0 - r).sqrt());
                let e = Complex64::from_polar(1.0, phase);
                link(inp[0], out[0], e * sr);
                link(inp[1], out[0], e * i * st);
                link(inp[0], out[1], i * st);
                link(inp[1], out[1], Complex64::new(sr, 0.0));
            }
            Op::Phase(t) => link(inp[0], out[0], Complex64::from_polar(1.0, t)),
            Op::Mirror => link(inp[0], out[0], Complex64::new(1.0, 0.0)),
            Op::Shutter(o) => link(inp[0], out[0], Complex64::new((1.0 - o).sqrt(), 0.0)),
            Op::Detector | Op::Dump => {}
        }
    }
    let m = DMatrix::<Complex64>::identity(n, n) - s;
    let psi = m.lu().solve(&b).unwrap();
    psi.iter().copied().collect()
}

/// Random acyclic network text. Every beam splitter has a random ratio and
/// phase; shutters get random opacities.
pub fn random_network(seed: u64, max_elems: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = ["A", "B", "C"];
    let mut t = String::from("network rnd\nsite A\nsite B\nsite C\nelem S : source @ A\n");
    let mut open: Vec<String> = vec!["S.c".into()];
    let mut arms = Vec::new();
    let n = rng.random_range(1..=max_elems);
    for e in 0..n {
        let site = sites[rng.random_range(0..3)];
        let name = format!("E{e}");
        let kind = rng.random_range(0..10);
        let take = |rng: &mut ChaCha8Rng, open: &mut Vec<String>| open.remove(rng.random_range(0..open.len()));
        match kind {
            0..=5 => {
                let m = rng.random_range(0.2..5.0);
                let ph = rng.random_range(0.0..std::f64::consts::TAU);
                t += &format!("elem {name} : bs(ratio={m}:1, phase={ph}) @ {site}\n");
                let a = take(&mut rng, &mut open);
                arms.push((a, format!("{name}.a")));
                if !open.is_empty() && rng.random_bool(0.7) {
                    let b = take(&mut rng, &mut open);
                    arms.push((b, format!("{name}.b")));
                }
                open.push(format!("{name}.c"));
                open.push(format!("{name}.d"));
            }
            6 | 7 => {
                let ph = rng.random_range(0.0..std::f64::consts::TAU);
                t += &format!("elem {name} : phase({ph}) @ {site}\n");
                let a = take(&mut rng, &mut open);
                arms.push((a, format!("{name}.a")));
                open.push(format!("{name}.c"));
            }
            8 => {
                t += &format!("elem {name} : mirror @ {site}\n");
                let a = take(&mut rng, &mut open);
                arms.push((a, format!("{name}.a")));
                open.push(format!("{name}.c"));
            }
            _ => {
                let o: f64 = if rng.random_bool(0.3) { 1.0 } else { rng.random_range(0.0..1.0) };
                t += &format!("elem {name} : shutter(opacity={o}) @ {site}\n");
                let a = take(&mut rng, &mut open);
                arms.push((a, format!("{name}.a")));
                open.push(format!("{name}.c"));
            }
        }
    }
    for (k, p) in open.iter().enumerate() {
        let word = if k % 3 == 2 { "dump" } else { "detector" };
        t += &format!("elem T{k} : {word} @ {}\n", sites[k % 3]);
        arms.push((p.clone(), format!("T{k}.a")));
    }
    for (k, (from, to)) in arms.iter().enumerate() {
        t += &format!("arm a{k} : {from} -> {to} @ {}\n", sites[rng.random_range(0..3)]);
    }
    t
}
