use std::fmt::Write;

use super::{Kind, Network, SettingValue, Value};

fn value(v: &Value) -> String {
    match v {
        Value::Lit(x) => num(*x),
        Value::Param(p) => p.clone(),
    }
}

// `{:?}` gives the shortest text that reads back to the same f64.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn kind(k: &Kind) -> String {
    match k {
        Kind::BeamSplitter { m, n, swap, phase } => {
            let mut s = format!("bs(ratio={}:{}", value(m), value(n));
            if *swap {
                s.push_str(", swap");
            }
            if let Some(p) = phase {
                let _ = write!(s, ", phase={}", value(p));
            }
            s.push(')');
            s
        }
        Kind::Phase(v) => format!("phase({})", value(v)),
        Kind::Shutter { opacity } => format!("shutter(opacity={})", value(opacity)),
        other => other.word().to_string(),
    }
}

pub(crate) fn print(net: &Network) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "network {}", net.name);
    for site in &net.sites {
        let _ = writeln!(s, "site {site}");
    }
    for p in &net.params {
        match p.value {
            Some(v) => {
                let _ = writeln!(s, "param {} = {}", p.name, num(v));
            }
            None => {
                let _ = writeln!(s, "param {}", p.name);
            }
        }
    }
    for e in &net.elements {
        let _ = writeln!(s, "elem {} : {} @ {}", e.name, kind(&e.kind), e.site);
    }
    for a in &net.arms {
        let _ = writeln!(s, "arm {} : {} -> {} @ {}", a.name, a.from, a.to, a.site);
    }
    for c in &net.configs {
        let items: Vec<String> = c
            .settings
            .iter()
            .map(|st| {
                let v = match &st.value {
                    SettingValue::Scalar(v) => value(v),
                    SettingValue::Ratio(m, n) => format!("{}:{}", value(m), value(n)),
                };
                format!("{}.{} = {}", st.elem, st.key, v)
            })
            .collect();
        if items.is_empty() {
            let _ = writeln!(s, "config {} {{ }}", c.name);
        } else {
            let _ = writeln!(s, "config {} {{ {} }}", c.name, items.join(", "));
        }
    }
    for b in &net.blocks {
        let _ = writeln!(s, "block {} {{ {} }}", b.name, b.elems.join(" "));
    }
    for d in &net.darks {
        let _ = writeln!(s, "dark {} : {}", d.config, d.targets.join(" "));
    }
    s
}
