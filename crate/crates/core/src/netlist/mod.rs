//! Circuit data model and the SPICE-like netlist dialect.
//!
//! A [`Netlist`] owns an ordered node table (ground is always node 0), the
//! device instances, the MOSFET model cards and the analysis directives.
//! Nodes are interned in first-use order, which is also the order the text
//! serializer reproduces, so `parse(serialize(n)) == n` holds structurally.

mod number;
mod parse;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::devices::ModelCard;

pub use number::{format_number, parse_number};
pub use parse::parse_netlist;
pub use write::serialize_netlist;

/// Index into a netlist's node table. Ground is `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

/// Time-dependent value of an independent voltage source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SourceSpec {
    Dc(f64),
    /// `(time, volts)` corners; linear in between, clamped outside.
    Pwl(Vec<(f64, f64)>),
    /// Periodic trapezoid `v_start -> v_end -> v_start`.
    Ramp {
        v_start: f64,
        v_end: f64,
        delay: f64,
        rise: f64,
        hold: f64,
        fall: f64,
        period: f64,
    },
    Sine {
        offset: f64,
        amplitude: f64,
        freq: f64,
        delay: f64,
    },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            SourceSpec::Dc(v) => finite(*v, "DC value"),
            SourceSpec::Pwl(points) => {
                if points.is_empty() {
                    return Err("PWL needs at least one point".into());
                }
                for &(t, v) in points {
                    finite(t, "PWL time")?;
                    finite(v, "PWL value")?;
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err("PWL times must be strictly increasing".into());
                }
                Ok(())
            }
            SourceSpec::Ramp {
                v_start,
                v_end,
                delay,
                rise,
                hold,
                fall,
                period,
            } => {
                for (v, what) in [
                    (*v_start, "RAMP v_start"),
                    (*v_end, "RAMP v_end"),
                    (*delay, "RAMP delay"),
                    (*rise, "RAMP rise"),
                    (*hold, "RAMP hold"),
                    (*fall, "RAMP fall"),
                    (*period, "RAMP period"),
                ] {
                    finite(v, what)?;
                }
                if *rise <= 0.0 || *fall <= 0.0 {
                    return Err("RAMP rise and fall must be > 0".into());
                }
                if *delay < 0.0 || *hold < 0.0 {
                    return Err("RAMP delay and hold must be >= 0".into());
                }
                if *period < rise + hold + fall {
                    return Err("RAMP period must cover rise + hold + fall".into());
                }
                Ok(())
            }
            SourceSpec::Sine {
                offset,
                amplitude,
                freq,
                delay,
            } => {
                finite(*offset, "SINE offset")?;
                finite(*amplitude, "SINE amplitude")?;
                finite(*delay, "SINE delay")?;
                if !(freq.is_finite() && *freq > 0.0) {
                    return Err("SINE frequency must be > 0".into());
                }
                if *delay < 0.0 {
                    return Err("SINE delay must be >= 0".into());
                }
                Ok(())
            }
        }
    }
}

fn finite(v: f64, what: &str) -> Result<(), String> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(format!("{what} must be finite"))
    }
}

/// Element kind plus terminals and value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Element {
    Resistor {
        nodes: [NodeId; 2],
        ohms: f64,
    },
    Capacitor {
        nodes: [NodeId; 2],
        farads: f64,
    },
    /// `nodes` are `[positive, negative]`.
    VoltageSource {
        nodes: [NodeId; 2],
        spec: SourceSpec,
    },
    /// `nodes` are `[drain, gate, source, body]`.
    Mosfet {
        nodes: [NodeId; 4],
        model: String,
        w: f64,
        l: f64,
    },
}

impl Element {
    pub fn nodes(&self) -> &[NodeId] {
        match self {
            Element::Resistor { nodes, .. }
            | Element::Capacitor { nodes, .. }
            | Element::VoltageSource { nodes, .. } => nodes,
            Element::Mosfet { nodes, .. } => nodes,
        }
    }

    pub fn prefix(&self) -> char {
        match self {
            Element::Resistor { .. } => 'R',
            Element::Capacitor { .. } => 'C',
            Element::VoltageSource { .. } => 'V',
            Element::Mosfet { .. } => 'M',
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Element::Resistor { ohms, .. } if !(ohms.is_finite() && *ohms > 0.0) => {
                Err("resistance must be > 0".into())
            }
            Element::Capacitor { farads, .. } if !(farads.is_finite() && *farads > 0.0) => {
                Err("capacitance must be > 0".into())
            }
            Element::VoltageSource { spec, .. } => spec.validate(),
            Element::Mosfet { w, l, .. } if !(w.is_finite() && *w > 0.0 && l.is_finite() && *l > 0.0) => {
                Err("MOSFET W and L must be > 0".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceInstance {
    pub name: String,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Analysis {
    Op,
    Dc {
        source: String,
        start: f64,
        stop: f64,
        step: f64,
    },
    Tran {
        dt: f64,
        tstop: f64,
    },
}

impl Analysis {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Analysis::Op => Ok(()),
            Analysis::Dc { start, stop, step, .. } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(".dc values must be finite".into());
                }
                if *step == 0.0 {
                    return Err(".dc step must be non-zero".into());
                }
                if stop != start && (stop - start).signum() != step.signum() {
                    return Err(".dc step sign does not match stop - start".into());
                }
                Ok(())
            }
            Analysis::Tran { dt, tstop } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(".tran dt must be > 0".into());
                }
                if !(tstop.is_finite() && *tstop >= *dt) {
                    return Err(".tran tstop must be >= dt".into());
                }
                Ok(())
            }
        }
    }
}

/// What went wrong, independent of where.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetlistErrorKind {
    #[error("unknown device prefix '{0}'")]
    UnknownDevicePrefix(char),
    #[error("undefined model '{0}'")]
    UndefinedModel(String),
    #[error("duplicate device name '{0}'")]
    DuplicateDeviceName(String),
    #[error("malformed number '{0}'")]
    MalformedNumber(String),
    #[error("missing .end directive")]
    MissingEnd,
    #[error("unknown directive '{0}'")]
    UnknownDirective(String),
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("unknown source '{0}'")]
    UnknownSource(String),
    #[error("duplicate model '{0}'")]
    DuplicateModel(String),
    #[error("invalid name '{0}'")]
    InvalidName(String),
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

/// A netlist diagnostic. `line` is 1-based and present for parse errors.
#[derive(Debug, Clone, PartialEq)]
pub struct NetlistError {
    pub line: Option<usize>,
    pub kind: NetlistErrorKind,
}

impl NetlistError {
    pub fn at(line: usize, kind: NetlistErrorKind) -> Self {
        Self { line: Some(line), kind }
    }

    fn bare(kind: NetlistErrorKind) -> Self {
        Self { line: None, kind }
    }
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl std::error::Error for NetlistError {}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Netlist {
    pub title: String,
    nodes: Vec<String>,
    devices: Vec<DeviceInstance>,
    models: BTreeMap<String, ModelCard>,
    analyses: Vec<Analysis>,
}

pub(crate) fn valid_identifier(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '=' | ';') || c.is_control())
}

fn canonical_node(name: &str) -> &str {
    if name.eq_ignore_ascii_case("gnd") {
        "0"
    } else {
        name
    }
}

impl Netlist {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            nodes: vec!["0".to_string()],
            devices: Vec::new(),
            models: BTreeMap::new(),
            analyses: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    /// Look up a node; `"gnd"` is an alias for ground.
    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        let name = canonical_node(name);
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    /// Intern a node name, returning its id.
    pub fn node(&mut self, name: &str) -> Result<NodeId, NetlistError> {
        let name = canonical_node(name);
        if !valid_identifier(name) {
            return Err(NetlistError::bare(NetlistErrorKind::InvalidName(name.to_string())));
        }
        if let Some(id) = self.find_node(name) {
            return Ok(id);
        }
        self.nodes.push(name.to_string());
        Ok(NodeId(self.nodes.len() - 1))
    }

    pub fn devices(&self) -> &[DeviceInstance] {
        &self.devices
    }

    pub fn device(&self, name: &str) -> Option<&DeviceInstance> {
        self.devices.iter().find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn models(&self) -> &BTreeMap<String, ModelCard> {
        &self.models
    }

    /// Model names are case-insensitive and stored lowercased.
    pub fn model(&self, name: &str) -> Option<&ModelCard> {
        self.models.get(&name.to_ascii_lowercase())
    }

    pub fn analyses(&self) -> &[Analysis] {
        &self.analyses
    }

    /// Add a device whose terminals were already interned with [`Netlist::node`].
    pub fn add_device(&mut self, name: impl Into<String>, element: Element) -> Result<(), NetlistError> {
        let name = name.into();
        if !valid_identifier(&name) {
            return Err(NetlistError::bare(NetlistErrorKind::InvalidName(name)));
        }
        let first = name.chars().next().unwrap_or(' ').to_ascii_uppercase();
        if first != element.prefix() {
            return Err(NetlistError::bare(NetlistErrorKind::InvalidName(format!(
                "{name} (a {} element must start with '{}')",
                element.prefix(),
                element.prefix()
            ))));
        }
        if self.device(&name).is_some() {
            return Err(NetlistError::bare(NetlistErrorKind::DuplicateDeviceName(name)));
        }
        if element.nodes().iter().any(|n| n.0 >= self.nodes.len()) {
            return Err(NetlistError::bare(NetlistErrorKind::Malformed(format!(
                "{name} references an undeclared node"
            ))));
        }
        element
            .validate()
            .map_err(|e| NetlistError::bare(NetlistErrorKind::InvalidValue(format!("{name}: {e}"))))?;
        self.devices.push(DeviceInstance { name, element });
        Ok(())
    }

    pub fn add_resistor(&mut self, name: &str, a: &str, b: &str, ohms: f64) -> Result<(), NetlistError> {
        let nodes = [self.node(a)?, self.node(b)?];
        self.add_device(name, Element::Resistor { nodes, ohms })
    }

    pub fn add_capacitor(&mut self, name: &str, a: &str, b: &str, farads: f64) -> Result<(), NetlistError> {
        let nodes = [self.node(a)?, self.node(b)?];
        self.add_device(name, Element::Capacitor { nodes, farads })
    }

    pub fn add_vsource(&mut self, name: &str, pos: &str, neg: &str, spec: SourceSpec) -> Result<(), NetlistError> {
        let nodes = [self.node(pos)?, self.node(neg)?];
        self.add_device(name, Element::VoltageSource { nodes, spec })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_mosfet(
        &mut self,
        name: &str,
        drain: &str,
        gate: &str,
        source: &str,
        body: &str,
        model: &str,
        w: f64,
        l: f64,
    ) -> Result<(), NetlistError> {
        let nodes = [
            self.node(drain)?,
            self.node(gate)?,
            self.node(source)?,
            self.node(body)?,
        ];
        self.add_device(
            name,
            Element::Mosfet {
                nodes,
                model: model.to_ascii_lowercase(),
                w,
                l,
            },
        )
    }

    pub fn add_model(&mut self, name: &str, card: ModelCard) -> Result<(), NetlistError> {
        let key = name.to_ascii_lowercase();
        if !valid_identifier(&key) {
            return Err(NetlistError::bare(NetlistErrorKind::InvalidName(key)));
        }
        card.validate()
            .map_err(|e| NetlistError::bare(NetlistErrorKind::InvalidValue(format!("model {key}: {e}"))))?;
        if self.models.contains_key(&key) {
            return Err(NetlistError::bare(NetlistErrorKind::DuplicateModel(key)));
        }
        self.models.insert(key, card);
        Ok(())
    }

    pub fn add_analysis(&mut self, analysis: Analysis) -> Result<(), NetlistError> {
        analysis
            .validate()
            .map_err(|e| NetlistError::bare(NetlistErrorKind::InvalidValue(e)))?;
        self.analyses.push(analysis);
        Ok(())
    }

    /// Replace the waveform of an existing voltage source.
    pub fn set_source(&mut self, name: &str, spec: SourceSpec) -> Result<(), NetlistError> {
        spec.validate()
            .map_err(|e| NetlistError::bare(NetlistErrorKind::InvalidValue(format!("{name}: {e}"))))?;
        match self.devices.iter_mut().find(|d| d.name.eq_ignore_ascii_case(name)) {
            Some(DeviceInstance {
                element: Element::VoltageSource { spec: s, .. },
                ..
            }) => {
                *s = spec;
                Ok(())
            }
            _ => Err(NetlistError::bare(NetlistErrorKind::UnknownSource(name.to_string()))),
        }
    }

    /// Check the cross-references that cannot be enforced while building
    /// incrementally: MOSFET models and `.dc` source names.
    pub fn validate(&self) -> Result<(), NetlistError> {
        for d in &self.devices {
            if let Element::Mosfet { model, .. } = &d.element {
                if !self.models.contains_key(model) {
                    return Err(NetlistError::bare(NetlistErrorKind::UndefinedModel(model.clone())));
                }
            }
        }
        for a in &self.analyses {
            if let Analysis::Dc { source, .. } = a {
                self.check_sweep_source(source)?;
            }
        }
        Ok(())
    }

    pub(crate) fn check_sweep_source(&self, source: &str) -> Result<(), NetlistError> {
        match self.device(source) {
            Some(DeviceInstance {
                element: Element::VoltageSource { .. },
                ..
            }) => Ok(()),
            _ => Err(NetlistError::bare(NetlistErrorKind::UnknownSource(source.to_string()))),
        }
    }

    pub fn mosfet_count(&self) -> usize {
        self.devices
            .iter()
            .filter(|d| matches!(d.element, Element::Mosfet { .. }))
            .count()
    }
}
