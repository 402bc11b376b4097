//! `weaktrace` command line.
//!
//! Exit codes: 0 success, 1 parse or validation failure, 2 unsatisfiable
//! constraints or impossible post-selection, 3 numeric failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use weaktrace::engine::{self, propagate, ConcreteNetwork, OutcomeKind};
use weaktrace::envtrace::{self, EnvError, EnvModel};
use weaktrace::netlist::{parse_sites, Diagnostic};
use weaktrace::protocol::{self, ProtocolError, ProtocolSpec, ReportOptions};
use weaktrace::tsvf::{self, TsvfError};
use weaktrace::tuner::{self, TuneOptions, TunerError};
use weaktrace::{NetlistError, Network};

/// Amplitude below which a terminal is reported dark.
const DARK_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "weaktrace", version, about = "Single-photon interferometer networks: probabilities, weak traces, environment orders")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a netlist.
    Check(Common),
    /// Outcome probabilities and dark ports.
    Run(Common),
    /// Weak values per arm and region verdicts.
    Trace(Common),
    /// Environment traces and their ε-orders.
    Env(Common),
    /// Exact per-trial table and a sampled session.
    Protocol(Common),
    /// Solve the free parameters from the dark constraints.
    Tune(Common),
    /// Counterfactuality verdict for both bits.
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Netlist file.
    file: PathBuf,
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    detector: Option<String>,
    /// Comma-separated sites; defaults to every site except home.
    #[arg(long, value_delimiter = ',')]
    region: Vec<String>,
    /// Site relabeling file (`NAME @ SITE` per line).
    #[arg(long)]
    sites: Option<PathBuf>,
    #[arg(long, default_value = "Alice")]
    home: String,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Comma-separated ε values for order fits.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long, default_value_t = envtrace::DEFAULT_ORDER)]
    order_cap: usize,
    /// Arm pairs for joint traces, as `A:B`.
    #[arg(long, value_delimiter = ',')]
    pair: Vec<String>,
    /// Bit string to send, e.g. `0110`.
    #[arg(long)]
    bits: Option<String>,
    /// Send this many seeded random bits instead of `--bits`.
    #[arg(long)]
    random_bits: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum photons per bit.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Replace the first block by this many copies in series.
    #[arg(long)]
    chain: Option<usize>,
    /// Let the tuner vary free ratio parameters.
    #[arg(long)]
    free_ratios: bool,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Input(String, Vec<Diagnostic>),
    Unsatisfiable(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(..) => 1,
            Failure::Unsatisfiable(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<NetlistError> for Failure {
    fn from(e: NetlistError) -> Self {
        match e {
            NetlistError::UnresolvedParam(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Input(e.to_string(), e.diagnostics().to_vec()),
        }
    }
}

impl From<TsvfError> for Failure {
    fn from(e: TsvfError) -> Self {
        match e {
            TsvfError::ImpossiblePostSelection(_) => Failure::Unsatisfiable(e.to_string()),
            TsvfError::Engine(_) | TsvfError::RepeatedArm(_) | TsvfError::EmptyRegion => {
                Failure::Input(e.to_string(), Vec::new())
            }
        }
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::ImpossiblePostSelection(_) => Failure::Unsatisfiable(e.to_string()),
            EnvError::Engine(_) | EnvError::EpsilonRange(_) | EnvError::Order | EnvError::Grid => {
                Failure::Input(e.to_string(), Vec::new())
            }
            EnvError::ExactZero | EnvError::PartialZero => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<TunerError> for Failure {
    fn from(e: TunerError) -> Self {
        match e {
            TunerError::Unsatisfiable { .. } => Failure::Unsatisfiable(e.to_string()),
            TunerError::Netlist(n) => n.into(),
            _ => Failure::Input(e.to_string(), Vec::new()),
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Netlist(n) => n.into(),
            ProtocolError::Tsvf(t) => t.into(),
            ProtocolError::Env(v) => v.into(),
            ProtocolError::NeverClicks(_) => Failure::Unsatisfiable(e.to_string()),
            ProtocolError::MaxTrials { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Input(e.to_string(), Vec::new()),
        }
    }
}

impl From<weaktrace::EngineError> for Failure {
    fn from(e: weaktrace::EngineError) -> Self {
        Failure::Input(e.to_string(), Vec::new())
    }
}

/// Round to 15 significant digits; non-finite values become null.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.14e}").parse().unwrap();
    json!(r + 0.0)
}

fn rounded(x: f64) -> String {
    match num(x) {
        Value::Number(n) => n.to_string(),
        _ => "nan".into(),
    }
}

struct Loaded {
    net: Network,
    tuning: Option<Value>,
}

fn load(o: &Common) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(&o.file)
        .map_err(|e| Failure::Input(format!("{}: {e}", o.file.display()), Vec::new()))?;
    let mut net = Network::parse(&text)?;
    let mut free_ratios = o.free_ratios;
    if let Some(n) = o.chain {
        net = net.chain(n)?;
        free_ratios |= n > 1;
    }
    if let Some(path) = &o.sites {
        let t = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display()), Vec::new()))?;
        let labels = parse_sites(&t).map_err(|d| Failure::Input("bad site file".into(), d))?;
        net = net.relabel(&labels)?;
    }
    let mut tuning = None;
    if !net.free_params().is_empty() && !net.darks.is_empty() {
        let (tuned, sol) = tuner::tune(&net, free_ratios, &tune_options(o))?;
        tuning = Some(solution_json(&sol));
        net = tuned;
    }
    Ok(Loaded { net, tuning })
}

fn tune_options(o: &Common) -> TuneOptions {
    TuneOptions { tol: o.tol, seed: o.seed, ..TuneOptions::default() }
}

fn solution_json(sol: &tuner::Solution) -> Value {
    let mut a = Map::new();
    for (k, v) in &sol.assignment {
        a.insert(k.clone(), num(*v));
    }
    json!({ "assignment": a, "residual": num(sol.residual), "start": sol.start, "iterations": sol.iterations })
}

fn config_of<'a>(o: &'a Common, net: &'a Network) -> Result<&'a str, Failure> {
    match &o.config {
        Some(c) => Ok(c),
        None => net
            .configs
            .first()
            .map(|c| c.name.as_str())
            .ok_or_else(|| Failure::Input("network declares no configuration; pass --config".into(), Vec::new())),
    }
}

fn concrete(o: &Common, net: &Network) -> Result<(String, ConcreteNetwork), Failure> {
    if net.configs.is_empty() && o.config.is_none() {
        return Ok((String::new(), net.concrete()?));
    }
    let c = config_of(o, net)?.to_string();
    let cn = net.apply_config(&c)?;
    Ok((c, cn))
}

/// The detector given, or the brightest one.
fn detector_of(o: &Common, cn: &ConcreteNetwork) -> Result<String, Failure> {
    if let Some(d) = &o.detector {
        return Ok(d.clone());
    }
    let fwd = propagate(cn);
    cn.terminals()
        .filter(|&i| cn.nodes[i].op == engine::Op::Detector)
        .max_by(|&a, &b| fwd.terminal[a].norm().total_cmp(&fwd.terminal[b].norm()))
        .map(|i| cn.nodes[i].name.clone())
        .ok_or_else(|| Failure::Input("network has no detector".into(), Vec::new()))
}

fn region_of(o: &Common, net: &Network) -> Vec<String> {
    if o.region.is_empty() {
        net.sites_except(&o.home)
    } else {
        o.region.clone()
    }
}

fn envelope(cmd: &str, o: &Common, net: &Network, tuning: &Option<Value>, results: Value) -> Value {
    json!({
        "schema": 1,
        "command": cmd,
        "network": net.name,
        "config": o.config,
        "seed": o.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "tuning": tuning,
        "results": results,
    })
}

fn cmd_check(o: &Common) -> Result<(Value, String), Failure> {
    let text = std::fs::read_to_string(&o.file)
        .map_err(|e| Failure::Input(format!("{}: {e}", o.file.display()), Vec::new()))?;
    let net = Network::parse(&text)?;
    let free = net.free_params();
    let res = json!({
        "valid": true,
        "elements": net.elements.len(),
        "arms": net.arms.len(),
        "sites": net.sites,
        "configs": net.configs.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
        "free_params": free,
    });
    let txt = format!(
        "{}: ok ({} elements, {} arms, {} configs, free parameters: {})\n",
        net.name,
        net.elements.len(),
        net.arms.len(),
        net.configs.len(),
        if free.is_empty() { "none".to_string() } else { free.join(" ") }
    );
    Ok((envelope("check", o, &net, &None, res), txt))
}

fn cmd_run(o: &Common) -> Result<(Value, String), Failure> {
    let Loaded { net, tuning } = load(o)?;
    let (cfg, cn) = concrete(o, &net)?;
    let fwd = propagate(&cn);
    let dist = engine::distribution_of(&cn, &fwd);
    let dark = engine::dark_ports(&cn, &fwd, DARK_TOL);
    let mut rows = Vec::new();
    let mut txt = format!("{} [{cfg}]\n", net.name);
    for out in &dist.outcomes {
        let kind = match out.kind {
            OutcomeKind::Detector => "detector",
            OutcomeKind::Dump => "dump",
            OutcomeKind::Absorbed => "absorbed",
        };
        let is_dark = dark.contains(&out.name);
        rows.push(json!({ "name": out.name, "kind": kind, "p": num(out.p), "dark": is_dark }));
        txt += &format!("  {:<8} {:<9} {}{}\n", out.name, kind, rounded(out.p), if is_dark { "  DARK" } else { "" });
    }
    txt += &format!("  total {}\n", rounded(dist.total()));
    let res = json!({ "config": cfg, "outcomes": rows, "dark_ports": dark, "total": num(dist.total()) });
    Ok((envelope("run", o, &net, &tuning, res), txt))
}

fn cmd_trace(o: &Common) -> Result<(Value, String), Failure> {
    let Loaded { net, tuning } = load(o)?;
    let (cfg, cn) = concrete(o, &net)?;
    let det = detector_of(o, &cn)?;
    let tm = tsvf::trace_map(&cn, &det)?;
    let mut arms = Vec::new();
    let mut txt = format!("{} [{cfg}] post-selected on {det}\n", net.name);
    for (k, a) in cn.arms.iter().enumerate() {
        let w = tm.w[k];
        arms.push(json!({
            "arm": a.name, "site": cn.sites[a.site], "re": num(w.re), "im": num(w.im),
            "abs": num(w.norm()), "present": tm.present[k],
        }));
        txt += &format!(
            "  {:<6} {:<8} w = {}{}{}i  {}\n",
            a.name,
            cn.sites[a.site],
            rounded(w.re),
            if w.im.is_sign_negative() { "" } else { "+" },
            rounded(w.im),
            if tm.present[k] { "present" } else { "absent" }
        );
    }
    let mut sites = Vec::new();
    for (i, s) in cn.sites.iter().enumerate() {
        let v = tsvf::region_trace(&cn, &tm, std::slice::from_ref(s))?;
        sites.push(json!({ "site": s, "max": num(tm.site_max[i]), "present": v.present, "arms": v.arms }));
        txt += &format!("  site {:<8} {}\n", s, if v.present { "trace" } else { "no trace" });
    }
    let region = region_of(o, &net);
    let rv = tsvf::region_trace(&cn, &tm, &region)?;
    txt += &format!("  region {} : {}\n", region.join(","), if rv.present { "trace" } else { "no trace" });
    let res = json!({
        "config": cfg, "detector": det, "threshold": num(tm.threshold), "arms": arms, "sites": sites,
        "region": { "sites": region, "present": rv.present, "max": num(rv.max), "arms": rv.arms },
    });
    Ok((envelope("trace", o, &net, &tuning, res), txt))
}

fn fit_json(f: &Result<envtrace::OrderFit, EnvError>) -> Result<Value, Failure> {
    match f {
        Ok(f) => Ok(json!({ "exponent": num(f.exponent), "residual": num(f.residual), "zero": false })),
        Err(EnvError::ExactZero) => Ok(json!({ "exponent": null, "residual": null, "zero": true })),
        Err(e) => Err(e.clone().into()),
    }
}

fn fit_text(f: &Result<envtrace::OrderFit, EnvError>) -> String {
    match f {
        Ok(f) => format!("order {}", rounded(f.exponent)),
        Err(_) => "identically zero".into(),
    }
}

fn cmd_env(o: &Common) -> Result<(Value, String), Failure> {
    let Loaded { net, tuning } = load(o)?;
    let (cfg, cn) = concrete(o, &net)?;
    let det = detector_of(o, &cn)?;
    let region = region_of(o, &net);
    let grid = if o.grid.is_empty() { envtrace::default_grid() } else { o.grid.clone() };
    let model = EnvModel::new(o.epsilon, o.order_cap)?;
    let st = envtrace::evolve_env(&cn, model)?;
    let mut txt = format!("{} [{cfg}] post-selected on {det}, ε = {}\n", net.name, o.epsilon);
    let mut local = Vec::new();
    for a in &cn.arms {
        let t = envtrace::local_trace(&cn, &st, &det, &a.name)?;
        local.push(json!({ "arm": a.name, "re": num(t.re), "im": num(t.im), "abs": num(t.norm()) }));
        txt += &format!("  {:<6} local {}\n", a.name, rounded(t.norm()));
    }
    let mut pairs = Vec::new();
    for p in &o.pair {
        let (a, b) = p
            .split_once(':')
            .ok_or_else(|| Failure::Input(format!("pair `{p}` is not of the form A:B"), Vec::new()))?;
        let j = envtrace::joint_trace(&cn, &st, &det, (a, b))?;
        let fit = envtrace::order_fit(
            |e| {
                let s = envtrace::evolve_env(&cn, EnvModel::new(e, o.order_cap)?)?;
                Ok(envtrace::joint_trace(&cn, &s, &det, (a, b))?.norm())
            },
            &grid,
        );
        txt += &format!("  joint {a}+{b} {}  {}\n", rounded(j.norm()), fit_text(&fit));
        pairs.push(json!({ "pair": [a, b], "abs": num(j.norm()), "fit": fit_json(&fit)? }));
    }
    let (m, flips) = envtrace::region_env_trace(&cn, &st, &det, &region)?;
    let fit = envtrace::order_fit(
        |e| {
            let s = envtrace::evolve_env(&cn, EnvModel::new(e, o.order_cap)?)?;
            Ok(envtrace::region_env_trace(&cn, &s, &det, &region)?.0)
        },
        &grid,
    );
    let witness = envtrace::flip_names(&cn, flips);
    txt += &format!("  outside {}: max {} via [{}]  {}\n", region.join(","), rounded(m), witness.join(" "), fit_text(&fit));
    let res = json!({
        "config": cfg, "detector": det, "epsilon": num(o.epsilon), "order_cap": o.order_cap,
        "grid": grid.iter().map(|g| num(*g)).collect::<Vec<_>>(),
        "local": local, "joint": pairs,
        "region": { "sites": region, "max": num(m), "witness": witness, "fit": fit_json(&fit)? },
    });
    Ok((envelope("env", o, &net, &tuning, res), txt))
}

fn spec_of(o: &Common, net: Network) -> Result<ProtocolSpec, Failure> {
    let mut spec = ProtocolSpec::standard(net)?;
    spec.max_trials = o.trials;
    if spec.home != o.home {
        spec = ProtocolSpec::new(spec.network, spec.configs, spec.decode, spec.max_trials, &o.home)?;
    }
    if !o.region.is_empty() {
        spec = spec.with_region(o.region.clone())?;
    }
    Ok(spec)
}

fn cmd_protocol(o: &Common) -> Result<(Value, String), Failure> {
    let Loaded { net, tuning } = load(o)?;
    let spec = spec_of(o, net.clone())?;
    let mut txt = format!("{}\n", net.name);
    let mut table = Vec::new();
    for bit in 0..2u8 {
        let d = protocol::per_trial(&spec, bit)?;
        let click = protocol::click_probability(&spec, bit)?;
        let err = protocol::error_probability(&spec, bit)?;
        let expected = if click > 0.0 { num(1.0 / click) } else { Value::Null };
        let outs: Vec<Value> = d.outcomes.iter().map(|x| json!({ "name": x.name, "p": num(x.p) })).collect();
        txt += &format!("  bit {bit} [{}]\n", spec.configs[bit as usize]);
        for x in &d.outcomes {
            txt += &format!("    {:<8} {}\n", x.name, rounded(x.p));
        }
        txt += &format!("    click {}  wrong {}\n", rounded(click), rounded(err));
        table.push(json!({
            "bit": bit, "config": spec.configs[bit as usize], "outcomes": outs,
            "click": num(click), "error": num(err), "expected_trials": expected,
        }));
    }
    let bits: Option<Vec<u8>> = match (&o.bits, o.random_bits) {
        (Some(s), _) => Some(
            s.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Failure::Input(format!("bit string `{s}` may only contain 0 and 1"), Vec::new())),
                })
                .collect::<Result<_, _>>()?,
        ),
        (None, Some(n)) => Some(random_bits(o.seed, n)),
        (None, None) => None,
    };
    let session = match bits {
        Some(bits) => {
            let s = protocol::session(&spec, &bits, o.seed)?;
            let decoded: String = s.bits.iter().map(|b| char::from(b'0' + b.decoded)).collect();
            txt += &format!(
                "  session: {} bits, {} errors, mean trials {}\n  decoded {decoded}\n",
                s.bits.len(),
                s.errors,
                rounded(s.mean_trials)
            );
            let per: Vec<Value> = s
                .bits
                .iter()
                .map(|b| {
                    let tally: Map<String, Value> = b.tally.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                    json!({ "sent": b.sent, "decoded": b.decoded, "trials": b.trials, "tally": tally })
                })
                .collect();
            json!({
                "bits": per, "errors": s.errors, "mean_trials": num(s.mean_trials),
                "success_rate": num(s.success_rate), "decoded": decoded,
            })
        }
        None => Value::Null,
    };
    let res = json!({ "per_trial": table, "session": session });
    Ok((envelope("protocol", o, &net, &tuning, res), txt))
}

/// Seeded random bit string, drawn from a stream no photon stream uses.
fn random_bits(seed: u64, n: usize) -> Vec<u8> {
    let mut rng = protocol::stream(seed, usize::MAX);
    (0..n).map(|_| protocol::sample(&mut rng, &[0.5, 0.5]) as u8).collect()
}

fn cmd_tune(o: &Common) -> Result<(Value, String), Failure> {
    let text = std::fs::read_to_string(&o.file)
        .map_err(|e| Failure::Input(format!("{}: {e}", o.file.display()), Vec::new()))?;
    let mut net = Network::parse(&text)?;
    let mut free_ratios = o.free_ratios;
    if let Some(n) = o.chain {
        net = net.chain(n)?;
        free_ratios |= n > 1;
    }
    let (tuned, sol) = tuner::tune(&net, free_ratios, &tune_options(o))?;
    let printed = tuned.print();
    let mut txt = format!("# residual {}\n", rounded(sol.residual));
    txt += &printed;
    let res = json!({ "solution": solution_json(&sol), "netlist": printed });
    Ok((envelope("tune", o, &tuned, &None, res), txt))
}

fn cmd_report(o: &Common) -> Result<(Value, String), Failure> {
    let Loaded { net, tuning } = load(o)?;
    let spec = spec_of(o, net.clone())?;
    let mut opts = ReportOptions { order_cap: o.order_cap, ..ReportOptions::default() };
    if !o.grid.is_empty() {
        opts.grid = o.grid.clone();
    }
    let r = protocol::counterfactuality_report(&spec, &opts)?;
    let mut txt = format!("{} (region {})\n", net.name, spec.outside().join(","));
    let mut bits = Vec::new();
    for b in &r.bits {
        let order = b.env_order.map(|f| num(f.exponent)).unwrap_or(Value::Null);
        txt += &format!(
            "  bit {} via {}: classical path {}, first-order trace outside [{}], env order {}: {}\n",
            b.bit,
            b.detector,
            if b.classical_path { "yes" } else { "no" },
            b.first_order.arms.join(" "),
            b.env_order.map(|f| rounded(f.exponent)).unwrap_or_else(|| "none".into()),
            b.class.label()
        );
        bits.push(json!({
            "bit": b.bit, "detector": b.detector, "classical_path": b.classical_path,
            "first_order": { "present": b.first_order.present, "max": num(b.first_order.max), "arms": b.first_order.arms },
            "env_order": order, "env_witness": b.env_witness, "class": b.class.label(),
        }));
    }
    txt += &format!("  overall: {}\n", r.overall.label());
    let res = json!({ "home": spec.home, "outside": spec.outside(), "bits": bits, "overall": r.overall.label() });
    Ok((envelope("report", o, &net, &tuning, res), txt))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (o, out) = match &cli.cmd {
        Cmd::Check(o) => (o, cmd_check(o)),
        Cmd::Run(o) => (o, cmd_run(o)),
        Cmd::Trace(o) => (o, cmd_trace(o)),
        Cmd::Env(o) => (o, cmd_env(o)),
        Cmd::Protocol(o) => (o, cmd_protocol(o)),
        Cmd::Tune(o) => (o, cmd_tune(o)),
        Cmd::Report(o) => (o, cmd_report(o)),
    };
    match out {
        Ok((v, txt)) => {
            let body = if o.json { serde_json::to_string_pretty(&v).unwrap() + "\n" } else { txt };
            // a closed pipe (`| head`) is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            let file = o.file.display();
            match &f {
                Failure::Input(msg, diags) => {
                    if diags.is_empty() {
                        eprintln!("error: {msg}");
                    }
                    for d in diags {
                        eprintln!("{file}:{d}");
                    }
                }
                Failure::Unsatisfiable(msg) | Failure::Numeric(msg) => eprintln!("error: {msg}"),
            }
            if o.json {
                let (kind, msg, diags) = match &f {
                    Failure::Input(m, d) => ("input", m.clone(), d.clone()),
                    Failure::Unsatisfiable(m) => ("unsatisfiable", m.clone(), Vec::new()),
                    Failure::Numeric(m) => ("numeric", m.clone(), Vec::new()),
                };
                let d: Vec<Value> = diags
                    .iter()
                    .map(|d| json!({ "line": d.line, "col": d.col, "kind": format!("{:?}", d.kind), "message": d.message }))
                    .collect();
                println!("{}", json!({ "schema": 1, "error": { "kind": kind, "message": msg, "diagnostics": d } }));
            }
            ExitCode::from(f.code())
        }
    }
}
