//! Netlist language: parse, validate, print and transform networks.
//!
//! ```text
//! network mzi
//! site Lab
//! param phi
//! elem S  : source @ Lab
//! elem X  : bs(ratio=1:1) @ Lab
//! elem P  : phase(phi) @ Lab
//! elem Y  : bs(ratio=1:1) @ Lab
//! elem DL : detector @ Lab
//! elem DR : detector @ Lab
//! arm in : S.c -> X.a @ Lab
//! arm up : X.c -> P.a @ Lab
//! arm p  : P.c -> Y.a @ Lab
//! arm lo : X.d -> Y.b @ Lab
//! arm l  : Y.c -> DL.a @ Lab
//! arm r  : Y.d -> DR.a @ Lab
//! dark base : DL
//! ```
//!
//! Two statements go beyond plain wiring. `block NAME { ELEM ... }` marks a
//! self-contained stage with one entry arm and one continuing exit arm, which
//! [`Network::chain`] repeats. `dark CONFIG : TARGET ...` declares ports or
//! arms the tuner must make dark under a configuration.

mod chain;
mod concrete;
mod parse;
mod print;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use parse::parse_sites;

/// A literal number or a reference to a declared parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Lit(f64),
    Param(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Port {
    A,
    B,
    C,
    D,
}

impl Port {
    pub fn is_input(self) -> bool {
        matches!(self, Port::A | Port::B)
    }

    fn index(self) -> usize {
        match self {
            Port::A | Port::C => 0,
            Port::B | Port::D => 1,
        }
    }

    fn letter(self) -> char {
        match self {
            Port::A => 'a',
            Port::B => 'b',
            Port::C => 'c',
            Port::D => 'd',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Source,
    /// Ratio `m:n` is reflectance to transmittance. `swap` exchanges them.
    BeamSplitter {
        m: Value,
        n: Value,
        swap: bool,
        phase: Option<Value>,
    },
    Phase(Value),
    Mirror,
    Shutter {
        opacity: Value,
    },
    Detector,
    Dump,
}

impl Kind {
    fn inputs(&self) -> &'static [Port] {
        match self {
            Kind::Source => &[],
            Kind::BeamSplitter { .. } => &[Port::A, Port::B],
            _ => &[Port::A],
        }
    }

    fn outputs(&self) -> &'static [Port] {
        match self {
            Kind::Source => &[Port::C],
            Kind::BeamSplitter { .. } => &[Port::C, Port::D],
            Kind::Detector | Kind::Dump => &[],
            _ => &[Port::C],
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Kind::Detector | Kind::Dump)
    }

    fn word(&self) -> &'static str {
        match self {
            Kind::Source => "source",
            Kind::BeamSplitter { .. } => "bs",
            Kind::Phase(_) => "phase",
            Kind::Mirror => "mirror",
            Kind::Shutter { .. } => "shutter",
            Kind::Detector => "detector",
            Kind::Dump => "dump",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: Kind,
    pub site: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub elem: String,
    pub port: Port,
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.elem, self.port.letter())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub name: String,
    pub from: PortRef,
    pub to: PortRef,
    pub site: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    /// `None` marks a free parameter left for the tuner.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SettingValue {
    Scalar(Value),
    Ratio(Value, Value),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub elem: String,
    pub key: String,
    pub value: SettingValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub name: String,
    pub settings: Vec<Setting>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub elems: Vec<String>,
}

/// Targets the tuner drives to zero amplitude under one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DarkDecl {
    pub config: String,
    pub targets: Vec<String>,
}

/// Validated network description. Immutable once built; transformations
/// return new values.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub name: String,
    pub sites: Vec<String>,
    pub params: Vec<Param>,
    pub elements: Vec<Element>,
    pub arms: Vec<Arm>,
    pub configs: Vec<Config>,
    pub blocks: Vec<Block>,
    pub darks: Vec<DarkDecl>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Syntax,
    Duplicate,
    UnknownElement,
    UnknownPort,
    PortReused,
    DanglingPort,
    Cycle,
    SourceCount,
    UnknownSite,
    Unreachable,
    BadRatio,
    BadOpacity,
    UnknownParam,
    BadSetting,
    BadBlock,
    BadDark,
}

/// A positioned problem. Line and column are 1-based; 0 means the item was
/// not read from text.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub kind: DiagKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("{} problem(s):\n{}", .0.len(), join_diags(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown configuration `{0}`")]
    UnknownConfig(String),
    #[error("parameter `{0}` has no value")]
    UnresolvedParam(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("unknown element or arm `{0}`")]
    UnknownName(String),
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("chain length must be at least 1")]
    ZeroChain,
    #[error("network has no block to repeat")]
    NoBlock,
    #[error("block `{0}`: {1}")]
    BlockShape(String, String),
}

fn join_diags(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

impl NetlistError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            NetlistError::Invalid(d) => d,
            _ => &[],
        }
    }
}

/// Source positions recorded while parsing, keyed by declared name.
#[derive(Clone, Debug, Default)]
pub(crate) struct Spans {
    pub elems: HashMap<String, (usize, usize)>,
    pub arms: HashMap<String, (usize, usize)>,
    pub configs: HashMap<String, (usize, usize)>,
    pub blocks: HashMap<String, (usize, usize)>,
    pub darks: Vec<(usize, usize)>,
}

impl Network {
    /// Parse and validate netlist text.
    pub fn parse(text: &str) -> Result<Network, NetlistError> {
        let (net, spans) = parse::parse(text).map_err(NetlistError::Invalid)?;
        let diags = validate::validate(&net, &spans);
        if diags.is_empty() {
            Ok(net)
        } else {
            Err(NetlistError::Invalid(diags))
        }
    }

    /// Validate a network that was built or edited in code.
    pub fn validate(&self) -> Result<(), NetlistError> {
        let diags = validate::validate(self, &Spans::default());
        if diags.is_empty() {
            Ok(())
        } else {
            Err(NetlistError::Invalid(diags))
        }
    }

    /// Canonical text form; `parse(print(n)) == n`.
    pub fn print(&self) -> String {
        print::print(self)
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn arm(&self, name: &str) -> Option<&Arm> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn config(&self, name: &str) -> Option<&Config> {
        self.configs.iter().find(|c| c.name == name)
    }

    /// Names of parameters without a value.
    pub fn free_params(&self) -> Vec<String> {
        self.params
            .iter()
            .filter(|p| p.value.is_none())
            .map(|p| p.name.clone())
            .collect()
    }

    /// Copy with parameter values assigned. Names must be declared.
    pub fn with_params(&self, values: &[(String, f64)]) -> Result<Network, NetlistError> {
        let mut out = self.clone();
        for (name, v) in values {
            let p = out
                .params
                .iter_mut()
                .find(|p| &p.name == name)
                .ok_or_else(|| NetlistError::UnknownParam(name.clone()))?;
            p.value = Some(*v);
        }
        Ok(out)
    }

    /// Copy with some arms or elements moved to other sites. New site names
    /// are appended to the site list.
    pub fn relabel(&self, labels: &[(String, String)]) -> Result<Network, NetlistError> {
        let mut out = self.clone();
        for (name, site) in labels {
            if !out.sites.contains(site) {
                out.sites.push(site.clone());
            }
            if let Some(a) = out.arms.iter_mut().find(|a| &a.name == name) {
                a.site = site.clone();
            } else if let Some(e) = out.elements.iter_mut().find(|e| &e.name == name) {
                e.site = site.clone();
            } else {
                return Err(NetlistError::UnknownName(name.clone()));
            }
        }
        Ok(out)
    }

    /// Repeat the first declared block `n` times in series.
    pub fn chain(&self, n: usize) -> Result<Network, NetlistError> {
        chain::chain(self, n)
    }

    /// Names of arms labeled with one of `sites`.
    pub fn arms_in_sites(&self, sites: &[String]) -> Vec<String> {
        self.arms
            .iter()
            .filter(|a| sites.contains(&a.site))
            .map(|a| a.name.clone())
            .collect()
    }

    /// Every site except the one named.
    pub fn sites_except(&self, site: &str) -> Vec<String> {
        self.sites.iter().filter(|s| *s != site).cloned().collect()
    }
}
