use std::collections::{HashMap, HashSet};

use super::{DiagKind, Diagnostic, Kind, Network, Port, SettingValue, Spans, Value};

struct Ctx<'a> {
    spans: &'a Spans,
    out: Vec<Diagnostic>,
}

impl Ctx<'_> {
    fn push(&mut self, at: (usize, usize), kind: DiagKind, message: String) {
        self.out.push(Diagnostic { line: at.0, col: at.1, kind, message });
    }
    fn elem_at(&self, name: &str) -> (usize, usize) {
        self.spans.elems.get(name).copied().unwrap_or((0, 0))
    }
    fn arm_at(&self, name: &str) -> (usize, usize) {
        self.spans.arms.get(name).copied().unwrap_or((0, 0))
    }
}

pub(crate) fn validate(net: &Network, spans: &Spans) -> Vec<Diagnostic> {
    let mut cx = Ctx { spans, out: Vec::new() };
    let params: HashSet<&str> = net.params.iter().map(|p| p.name.as_str()).collect();
    let elems: HashMap<&str, &Kind> = net.elements.iter().map(|e| (e.name.as_str(), &e.kind)).collect();

    let mut names = HashSet::new();
    for e in &net.elements {
        if !names.insert(e.name.as_str()) {
            cx.push(cx.elem_at(&e.name), DiagKind::Duplicate, format!("element `{}` declared twice", e.name));
        }
    }
    let mut arm_names = HashSet::new();
    for a in &net.arms {
        if !arm_names.insert(a.name.as_str()) || names.contains(a.name.as_str()) {
            cx.push(cx.arm_at(&a.name), DiagKind::Duplicate, format!("name `{}` used twice", a.name));
        }
    }

    // sites
    for e in &net.elements {
        if !net.sites.contains(&e.site) {
            cx.push(cx.elem_at(&e.name), DiagKind::UnknownSite, format!("element `{}` uses undeclared site `{}`", e.name, e.site));
        }
    }
    for a in &net.arms {
        if !net.sites.contains(&a.site) {
            cx.push(cx.arm_at(&a.name), DiagKind::UnknownSite, format!("arm `{}` uses undeclared site `{}`", a.name, a.site));
        }
    }

    // element parameters
    let check_value = |cx: &mut Ctx, at, owner: &str, v: &Value| {
        if let Value::Param(p) = v {
            if !params.contains(p.as_str()) {
                cx.push(at, DiagKind::UnknownParam, format!("`{owner}` refers to undeclared parameter `{p}`"));
            }
        }
    };
    let lit_of = |v: &Value| -> Option<f64> {
        match v {
            Value::Lit(x) => Some(*x),
            Value::Param(p) => net.params.iter().find(|q| &q.name == p).and_then(|q| q.value),
        }
    };
    for e in &net.elements {
        let at = cx.elem_at(&e.name);
        match &e.kind {
            Kind::BeamSplitter { m, n, phase, .. } => {
                check_value(&mut cx, at, &e.name, m);
                check_value(&mut cx, at, &e.name, n);
                if let Some(ph) = phase {
                    check_value(&mut cx, at, &e.name, ph);
                }
                for v in [m, n] {
                    if let Some(x) = lit_of(v) {
                        if !(x > 0.0 && x.is_finite()) {
                            cx.push(at, DiagKind::BadRatio, format!("`{}` ratio components must be positive", e.name));
                        }
                    }
                }
            }
            Kind::Phase(v) => check_value(&mut cx, at, &e.name, v),
            Kind::Shutter { opacity } => {
                check_value(&mut cx, at, &e.name, opacity);
                if let Some(x) = lit_of(opacity) {
                    if !(0.0..=1.0).contains(&x) {
                        cx.push(at, DiagKind::BadOpacity, format!("`{}` opacity {x} outside [0, 1]", e.name));
                    }
                }
            }
            _ => {}
        }
    }

    // sources
    let sources: Vec<&str> = net
        .elements
        .iter()
        .filter(|e| e.kind == Kind::Source)
        .map(|e| e.name.as_str())
        .collect();
    if sources.len() != 1 {
        let at = sources.get(1).map(|s| cx.elem_at(s)).unwrap_or((0, 0));
        cx.push(at, DiagKind::SourceCount, format!("expected exactly one source, found {}", sources.len()));
    }

    // ports
    let mut used: HashMap<(&str, Port), &str> = HashMap::new();
    let mut graph_ok = true;
    for a in &net.arms {
        let at = cx.arm_at(&a.name);
        for (end, want_input) in [(&a.from, false), (&a.to, true)] {
            let Some(kind) = elems.get(end.elem.as_str()) else {
                cx.push(at, DiagKind::UnknownElement, format!("arm `{}` refers to undeclared element `{}`", a.name, end.elem));
                graph_ok = false;
                continue;
            };
            let legal = if want_input { kind.inputs() } else { kind.outputs() };
            if !legal.contains(&end.port) {
                let role = if want_input { "input" } else { "output" };
                cx.push(at, DiagKind::UnknownPort, format!("arm `{}`: `{}` is not an {role} port of a {}", a.name, end, kind.word()));
                graph_ok = false;
                continue;
            }
            if let Some(prev) = used.insert((end.elem.as_str(), end.port), a.name.as_str()) {
                cx.push(at, DiagKind::PortReused, format!("port `{}` already attached to arm `{prev}`", end));
                graph_ok = false;
            }
        }
    }
    for e in &net.elements {
        // An unattached beam-splitter input is vacuum.
        let splitter = matches!(e.kind, Kind::BeamSplitter { .. });
        let inputs = if splitter { &[][..] } else { e.kind.inputs() };
        for &port in inputs.iter().chain(e.kind.outputs()) {
            if !used.contains_key(&(e.name.as_str(), port)) {
                cx.push(cx.elem_at(&e.name), DiagKind::DanglingPort, format!("port `{}.{}` is not attached", e.name, port.letter()));
                graph_ok = false;
            }
        }
    }

    if graph_ok {
        check_graph(net, &mut cx, sources.first().copied());
    }

    // configurations
    for c in &net.configs {
        let at = spans.configs.get(&c.name).copied().unwrap_or((0, 0));
        for s in &c.settings {
            let Some(kind) = elems.get(s.elem.as_str()) else {
                cx.push(at, DiagKind::BadSetting, format!("config `{}` refers to undeclared element `{}`", c.name, s.elem));
                continue;
            };
            let ok = matches!(
                (kind, s.key.as_str(), &s.value),
                (Kind::Shutter { .. }, "opacity", SettingValue::Scalar(_))
                    | (Kind::BeamSplitter { .. }, "phase", SettingValue::Scalar(_))
                    | (Kind::Phase(_), "phase", SettingValue::Scalar(_))
                    | (Kind::BeamSplitter { .. }, "ratio", SettingValue::Ratio(..))
            );
            if !ok {
                cx.push(at, DiagKind::BadSetting, format!("config `{}`: `{}.{}` is not a setting of a {}", c.name, s.elem, s.key, kind.word()));
                continue;
            }
            let values: Vec<&Value> = match &s.value {
                SettingValue::Scalar(v) => vec![v],
                SettingValue::Ratio(m, n) => vec![m, n],
            };
            for v in values {
                check_value(&mut cx, at, &c.name, v);
            }
            if let (Kind::Shutter { .. }, SettingValue::Scalar(v)) = (kind, &s.value) {
                if let Some(x) = lit_of(v) {
                    if !(0.0..=1.0).contains(&x) {
                        cx.push(at, DiagKind::BadOpacity, format!("config `{}`: opacity {x} outside [0, 1]", c.name));
                    }
                }
            }
        }
    }

    // blocks
    for b in &net.blocks {
        let at = spans.blocks.get(&b.name).copied().unwrap_or((0, 0));
        for e in &b.elems {
            if !elems.contains_key(e.as_str()) {
                cx.push(at, DiagKind::BadBlock, format!("block `{}` lists undeclared element `{e}`", b.name));
            }
        }
        if graph_ok && b.elems.iter().all(|e| elems.contains_key(e.as_str())) {
            if let Err(msg) = super::chain::block_boundary(net, b) {
                cx.push(at, DiagKind::BadBlock, format!("block `{}`: {msg}", b.name));
            }
        }
    }

    // dark declarations
    for (i, d) in net.darks.iter().enumerate() {
        let at = spans.darks.get(i).copied().unwrap_or((0, 0));
        if net.config(&d.config).is_none() {
            cx.push(at, DiagKind::BadDark, format!("dark constraint refers to undeclared configuration `{}`", d.config));
        }
        for t in &d.targets {
            let is_terminal = elems.get(t.as_str()).is_some_and(|k| k.is_terminal());
            if !is_terminal && !arm_names.contains(t.as_str()) {
                cx.push(at, DiagKind::BadDark, format!("dark target `{t}` is neither a detector, dump nor arm"));
            }
        }
    }

    cx.out
}

/// Acyclicity and source-to-terminal coverage. Assumes every port is wired
/// exactly once.
fn check_graph(net: &Network, cx: &mut Ctx, source: Option<&str>) {
    let idx: HashMap<&str, usize> = net.elements.iter().enumerate().map(|(i, e)| (e.name.as_str(), i)).collect();
    let n = net.elements.len();
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for a in &net.arms {
        let (f, t) = (idx[a.from.elem.as_str()], idx[a.to.elem.as_str()]);
        succ[f].push(t);
        indeg[t] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    let mut deg = indeg.clone();
    while let Some(i) = queue.pop() {
        seen += 1;
        for &j in &succ[i] {
            deg[j] -= 1;
            if deg[j] == 0 {
                queue.push(j);
            }
        }
    }
    if seen < n {
        let first = (0..n).find(|&i| deg[i] > 0).unwrap();
        let name = &net.elements[first].name;
        cx.push(cx.elem_at(name), DiagKind::Cycle, format!("cycle through element `{name}`"));
        return;
    }
    let Some(src) = source else { return };
    let mut reach = vec![false; n];
    let mut stack = vec![idx[src]];
    while let Some(i) = stack.pop() {
        if !reach[i] {
            reach[i] = true;
            stack.extend(&succ[i]);
        }
    }
    for a in &net.arms {
        if !reach[idx[a.from.elem.as_str()]] {
            cx.push(cx.arm_at(&a.name), DiagKind::Unreachable, format!("arm `{}` is not reachable from source `{src}`", a.name));
        }
    }
}
