//! Forward propagation of a single photon through a numeric network.
//!
//! Beam splitter convention, with `R` the reflectance after any swap:
//! `c = e^{iθ}(√R·a + i√T·b)`, `d = i√T·a + √R·b`.

mod marked;

use num_complex::Complex;

use crate::scalar::{cis, czero, i_unit, Scalar};

pub use marked::{marked_propagate, Loc, MarkedState, MAX_MARKED_ARMS};

/// Element action with every parameter resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Op<T = f64> {
    Source,
    /// `r` is the reflectance actually applied; `phase` multiplies output c.
    Split { r: T, phase: T },
    Phase(T),
    Mirror,
    Shutter(T),
    Detector,
    Dump,
}

impl<T> Op<T> {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Op::Detector | Op::Dump)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node<T = f64> {
    pub name: String,
    pub op: Op<T>,
    pub site: usize,
    /// Arm index on ports a, b.
    pub inputs: [Option<usize>; 2],
    /// Arm index on ports c, d.
    pub outputs: [Option<usize>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub site: usize,
}

/// Fully numeric network, elements kept in topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteNetwork<T = f64> {
    pub name: String,
    pub sites: Vec<String>,
    pub nodes: Vec<Node<T>>,
    pub arms: Vec<Segment>,
    /// Node indices, every arm's tail before its head.
    pub order: Vec<usize>,
    pub source: usize,
}

impl<T: Scalar> ConcreteNetwork<T> {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn arm_index(&self, name: &str) -> Option<usize> {
        self.arms.iter().position(|a| a.name == name)
    }

    pub fn site_index(&self, name: &str) -> Option<usize> {
        self.sites.iter().position(|s| s == name)
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.op.is_terminal()).map(|(i, _)| i)
    }

    pub fn detector(&self, name: &str) -> Result<usize, EngineError> {
        match self.node_index(name) {
            Some(i) if self.nodes[i].op.is_terminal() => Ok(i),
            _ => Err(EngineError::UnknownTerminal(name.to_string())),
        }
    }

    /// Site indices for a list of site names.
    pub fn region(&self, sites: &[String]) -> Result<Vec<usize>, EngineError> {
        sites
            .iter()
            .map(|s| self.site_index(s).ok_or_else(|| EngineError::UnknownSite(s.clone())))
            .collect()
    }

    /// Convert every number to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ConcreteNetwork<U> {
        let c = |x: T| U::of(x.as_f64());
        ConcreteNetwork {
            name: self.name.clone(),
            sites: self.sites.clone(),
            arms: self.arms.clone(),
            order: self.order.clone(),
            source: self.source,
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    name: n.name.clone(),
                    site: n.site,
                    inputs: n.inputs,
                    outputs: n.outputs,
                    op: match &n.op {
                        Op::Source => Op::Source,
                        Op::Split { r, phase } => Op::Split { r: c(*r), phase: c(*phase) },
                        Op::Phase(p) => Op::Phase(c(*p)),
                        Op::Mirror => Op::Mirror,
                        Op::Shutter(o) => Op::Shutter(c(*o)),
                        Op::Detector => Op::Detector,
                        Op::Dump => Op::Dump,
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("`{0}` is not a detector or dump")]
    UnknownTerminal(String),
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("unknown arm `{0}`")]
    UnknownArm(String),
    #[error("network has {0} arms; marked propagation supports at most {MAX_MARKED_ARMS}")]
    TooManyArms(usize),
}

/// Output amplitudes of one element given its input amplitudes, plus the
/// probability it absorbs.
#[inline]
pub(crate) fn scatter<T: Scalar>(op: &Op<T>, a: Complex<T>, b: Complex<T>) -> ([Complex<T>; 2], T) {
    let z = czero();
    match op {
        Op::Source => ([Complex::new(T::one(), T::zero()), z], T::zero()),
        Op::Split { r, phase } => {
            let sr = r.sqrt();
            let st = (T::one() - *r).sqrt();
            let i = i_unit::<T>();
            let c = (a * sr + i * b * st) * cis(*phase);
            let d = i * a * st + b * sr;
            ([c, d], T::zero())
        }
        Op::Phase(p) => ([a * cis(*p), z], T::zero()),
        Op::Mirror => ([a, z], T::zero()),
        Op::Shutter(o) => ([a * (T::one() - *o).sqrt(), z], *o * a.norm_sqr()),
        Op::Detector | Op::Dump => ([z, z], T::zero()),
    }
}

/// Adjoint action: input-side backward amplitudes from output-side ones.
#[inline]
pub(crate) fn scatter_adjoint<T: Scalar>(op: &Op<T>, c: Complex<T>, d: Complex<T>) -> [Complex<T>; 2] {
    let z = czero();
    match op {
        Op::Source => [z, z],
        Op::Split { r, phase } => {
            let sr = r.sqrt();
            let st = (T::one() - *r).sqrt();
            let mi = -i_unit::<T>();
            let c = c * cis(-*phase);
            [c * sr + mi * d * st, mi * c * st + d * sr]
        }
        Op::Phase(p) => [c * cis(-*p), z],
        Op::Mirror => [c, z],
        Op::Shutter(o) => [c * (T::one() - *o).sqrt(), z],
        Op::Detector | Op::Dump => [z, z],
    }
}

/// Forward amplitudes on every arm, terminal amplitudes and absorption.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardState<T = f64> {
    /// Per arm.
    pub amp: Vec<Complex<T>>,
    /// Per node; nonzero only at detectors and dumps.
    pub terminal: Vec<Complex<T>>,
    /// Per node; nonzero only at shutters.
    pub absorbed: Vec<T>,
}

impl<T: Scalar> ForwardState<T> {
    /// Sum of terminal and absorbed probabilities.
    pub fn total(&self) -> T {
        self.terminal.iter().map(|a| a.norm_sqr()).sum::<T>() + self.absorbed.iter().copied().sum::<T>()
    }
}

pub fn propagate<T: Scalar>(net: &ConcreteNetwork<T>) -> ForwardState<T> {
    let z = czero::<T>();
    let mut amp = vec![z; net.arms.len()];
    let mut terminal = vec![z; net.nodes.len()];
    let mut absorbed = vec![T::zero(); net.nodes.len()];
    for &i in &net.order {
        let node = &net.nodes[i];
        let a = node.inputs[0].map_or(z, |k| amp[k]);
        let b = node.inputs[1].map_or(z, |k| amp[k]);
        if node.op.is_terminal() {
            terminal[i] = a;
            continue;
        }
        let (out, abs) = scatter(&node.op, a, b);
        absorbed[i] = abs;
        for (slot, v) in node.outputs.iter().zip(out) {
            if let Some(k) = slot {
                amp[*k] = v;
            }
        }
    }
    ForwardState { amp, terminal, absorbed }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Detector,
    Dump,
    Absorbed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<T = f64> {
    pub name: String,
    pub kind: OutcomeKind,
    pub p: T,
}

/// Probability of every way a single photon can end.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T = f64> {
    pub outcomes: Vec<Outcome<T>>,
}

impl<T: Scalar> OutcomeDistribution<T> {
    pub fn get(&self, name: &str) -> Option<T> {
        self.outcomes.iter().find(|o| o.name == name).map(|o| o.p)
    }

    pub fn total(&self) -> T {
        self.outcomes.iter().map(|o| o.p).sum()
    }
}

pub fn outcome_distribution<T: Scalar>(net: &ConcreteNetwork<T>) -> OutcomeDistribution<T> {
    distribution_of(net, &propagate(net))
}

pub fn distribution_of<T: Scalar>(net: &ConcreteNetwork<T>, fwd: &ForwardState<T>) -> OutcomeDistribution<T> {
    let mut outcomes = Vec::new();
    for (i, n) in net.nodes.iter().enumerate() {
        let kind = match n.op {
            Op::Detector => OutcomeKind::Detector,
            Op::Dump => OutcomeKind::Dump,
            Op::Shutter(_) => OutcomeKind::Absorbed,
            _ => continue,
        };
        let p = match kind {
            OutcomeKind::Absorbed => fwd.absorbed[i],
            _ => fwd.terminal[i].norm_sqr(),
        };
        outcomes.push(Outcome { name: n.name.clone(), kind, p });
    }
    OutcomeDistribution { outcomes }
}

/// Terminals whose amplitude magnitude is below `tol`.
pub fn dark_ports<T: Scalar>(net: &ConcreteNetwork<T>, fwd: &ForwardState<T>, tol: T) -> Vec<String> {
    net.terminals()
        .filter(|&i| fwd.terminal[i].norm() < tol)
        .map(|i| net.nodes[i].name.clone())
        .collect()
}

/// Whether some directed path from the source to `detector` runs only over
/// arms with `|ψ| > tau` and touches the region (an arm or a node labeled
/// with one of its sites).
pub fn classical_path<T: Scalar>(
    net: &ConcreteNetwork<T>,
    fwd: &ForwardState<T>,
    region: &[String],
    detector: &str,
    tau: T,
) -> Result<bool, EngineError> {
    let target = net.detector(detector)?;
    let region = net.region(region)?;
    let in_region = |site: usize| region.contains(&site);
    // state: (node, visited region yet)
    let mut seen = vec![[false; 2]; net.nodes.len()];
    let start = (net.source, in_region(net.nodes[net.source].site));
    let mut stack = vec![start];
    while let Some((i, hit)) = stack.pop() {
        if seen[i][hit as usize] {
            continue;
        }
        seen[i][hit as usize] = true;
        if i == target && hit {
            return Ok(true);
        }
        for k in net.nodes[i].outputs.iter().flatten() {
            if fwd.amp[*k].norm() <= tau {
                continue;
            }
            let arm = &net.arms[*k];
            let h = hit || in_region(arm.site) || in_region(net.nodes[arm.to].site);
            stack.push((arm.to, h));
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Network;

    fn mzi(phase: f64) -> ConcreteNetwork {
        let text = format!(
            "network m\nsite L\nelem S : source @ L\nelem X : bs(ratio=1:1) @ L\nelem P : phase({phase}) @ L\n\
             elem Y : bs(ratio=1:1) @ L\nelem DL : detector @ L\nelem DR : detector @ L\n\
             arm i : S.c -> X.a @ L\narm A : X.c -> P.a @ L\narm A2 : P.c -> Y.a @ L\narm B : X.d -> Y.b @ L\n\
             arm l : Y.c -> DL.a @ L\narm r : Y.d -> DR.a @ L\n"
        );
        Network::parse(&text).unwrap().concrete().unwrap()
    }

    #[test]
    fn single_splitter_convention() {
        let (out, _) = scatter(&Op::Split { r: 0.5, phase: 0.0 }, Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        let s = 0.5f64.sqrt();
        assert!((out[0] - Complex::new(s, 0.0)).norm() < 1e-15);
        assert!((out[1] - Complex::new(0.0, s)).norm() < 1e-15);
    }

    #[test]
    fn balanced_mzi_is_dark_on_the_left() {
        let net = mzi(0.0);
        let f = propagate(&net);
        let dl = net.node_index("DL").unwrap();
        let dr = net.node_index("DR").unwrap();
        assert!(f.terminal[dl].norm() < 1e-15);
        assert!((f.terminal[dr] - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(dark_ports(&net, &f, 1e-9), vec!["DL".to_string()]);
    }

    #[test]
    fn adjoint_preserves_inner_product() {
        let op = Op::Split { r: 0.3, phase: 1.1 };
        let (a, b) = (Complex::new(0.2, -0.7), Complex::new(0.5, 0.1));
        let (c, d) = (Complex::new(-0.4, 0.3), Complex::new(0.9, -0.2));
        let (out, _) = scatter(&op, a, b);
        let back = scatter_adjoint(&op, c, d);
        let lhs = c.conj() * out[0] + d.conj() * out[1];
        let rhs = back[0].conj() * a + back[1].conj() * b;
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn classical_path_through_either_arm() {
        let net = mzi(0.0);
        let f = propagate(&net);
        assert!(classical_path(&net, &f, &["L".into()], "DR", 1e-9).unwrap());
        assert!(!classical_path(&net, &f, &["L".into()], "DL", 1e-9).unwrap());
    }
}
