use std::collections::HashMap;

use super::{Kind, Network, NetlistError, SettingValue, Value};
use crate::engine::{ConcreteNetwork, Node, Op, Segment};
use crate::scalar::Scalar;

impl Network {
    /// Numeric network with the named configuration's overrides applied.
    pub fn apply_config<T: Scalar>(&self, config: &str) -> Result<ConcreteNetwork<T>, NetlistError> {
        let c = self.config(config).ok_or_else(|| NetlistError::UnknownConfig(config.to_string()))?;
        self.build(&c.settings)
    }

    /// Numeric network with the declared defaults.
    pub fn concrete<T: Scalar>(&self) -> Result<ConcreteNetwork<T>, NetlistError> {
        self.build(&[])
    }

    /// Elements whose phase is the parameter `param` once `config` (or the
    /// defaults, for `None`) is applied.
    pub fn phase_users(&self, config: Option<&str>, param: &str) -> Result<Vec<String>, NetlistError> {
        let settings: &[super::Setting] = match config {
            Some(c) => &self.config(c).ok_or_else(|| NetlistError::UnknownConfig(c.to_string()))?.settings,
            None => &[],
        };
        let mut users = Vec::new();
        for e in &self.elements {
            let default = match &e.kind {
                Kind::BeamSplitter { phase, .. } => phase.as_ref(),
                Kind::Phase(v) => Some(v),
                _ => continue,
            };
            let over = settings.iter().rev().find(|s| s.elem == e.name && s.key == "phase");
            let v = match over.map(|s| &s.value) {
                Some(SettingValue::Scalar(v)) => Some(v),
                _ => default,
            };
            if matches!(v, Some(Value::Param(p)) if p == param) {
                users.push(e.name.clone());
            }
        }
        Ok(users)
    }

    fn resolve(&self, v: &Value) -> Result<f64, NetlistError> {
        match v {
            Value::Lit(x) => Ok(*x),
            Value::Param(p) => {
                let q = self
                    .params
                    .iter()
                    .find(|q| &q.name == p)
                    .ok_or_else(|| NetlistError::UnknownParam(p.clone()))?;
                q.value.ok_or_else(|| NetlistError::UnresolvedParam(p.clone()))
            }
        }
    }

    fn build<T: Scalar>(&self, settings: &[super::Setting]) -> Result<ConcreteNetwork<T>, NetlistError> {
        let over = |elem: &str, key: &str| settings.iter().rev().find(|s| s.elem == elem && s.key == key);
        let site_of = |s: &str| {
            self.sites.iter().position(|x| x == s).ok_or_else(|| NetlistError::UnknownSite(s.to_string()))
        };
        let index: HashMap<&str, usize> =
            self.elements.iter().enumerate().map(|(i, e)| (e.name.as_str(), i)).collect();

        let mut nodes = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let op = match &e.kind {
                Kind::Source => Op::Source,
                Kind::BeamSplitter { m, n, swap, phase } => {
                    let (m, n) = match over(&e.name, "ratio").map(|s| &s.value) {
                        Some(SettingValue::Ratio(m, n)) => (self.resolve(m)?, self.resolve(n)?),
                        _ => (self.resolve(m)?, self.resolve(n)?),
                    };
                    let ph = match over(&e.name, "phase").map(|s| &s.value) {
                        Some(SettingValue::Scalar(v)) => self.resolve(v)?,
                        _ => match phase {
                            Some(v) => self.resolve(v)?,
                            None => 0.0,
                        },
                    };
                    let (rm, rn) = if *swap { (n, m) } else { (m, n) };
                    Op::Split { r: T::of(rm / (rm + rn)), phase: T::of(ph) }
                }
                Kind::Phase(v) => {
                    let ph = match over(&e.name, "phase").map(|s| &s.value) {
                        Some(SettingValue::Scalar(o)) => self.resolve(o)?,
                        _ => self.resolve(v)?,
                    };
                    Op::Phase(T::of(ph))
                }
                Kind::Mirror => Op::Mirror,
                Kind::Shutter { opacity } => {
                    let o = match over(&e.name, "opacity").map(|s| &s.value) {
                        Some(SettingValue::Scalar(v)) => self.resolve(v)?,
                        _ => self.resolve(opacity)?,
                    };
                    Op::Shutter(T::of(o))
                }
                Kind::Detector => Op::Detector,
                Kind::Dump => Op::Dump,
            };
            nodes.push(Node { name: e.name.clone(), op, site: site_of(&e.site)?, inputs: [None; 2], outputs: [None; 2] });
        }

        let mut arms = Vec::with_capacity(self.arms.len());
        for (k, a) in self.arms.iter().enumerate() {
            let from = *index.get(a.from.elem.as_str()).ok_or_else(|| NetlistError::UnknownName(a.from.elem.clone()))?;
            let to = *index.get(a.to.elem.as_str()).ok_or_else(|| NetlistError::UnknownName(a.to.elem.clone()))?;
            nodes[from].outputs[a.from.port.index()] = Some(k);
            nodes[to].inputs[a.to.port.index()] = Some(k);
            arms.push(Segment { name: a.name.clone(), from, to, site: site_of(&a.site)? });
        }

        // Kahn's algorithm, lowest declaration index first for a stable order.
        let n = nodes.len();
        let mut indeg = vec![0usize; n];
        for a in &arms {
            indeg[a.to] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for k in nodes[i].outputs.iter().flatten() {
                let j = arms[*k].to;
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        let source = nodes.iter().position(|x| x.op == Op::Source).ok_or_else(|| {
            NetlistError::Invalid(vec![super::Diagnostic {
                line: 0,
                col: 0,
                kind: super::DiagKind::SourceCount,
                message: "no source".into(),
            }])
        })?;
        Ok(ConcreteNetwork { name: self.name.clone(), sites: self.sites.clone(), nodes, arms, order, source })
    }
}
