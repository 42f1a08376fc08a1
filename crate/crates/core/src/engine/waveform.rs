//! Uniformly sampled transient results.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;

use super::mna::Circuit;
use crate::devices::mosfet_stamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignalKind {
    /// `v(node)`, volts.
    NodeVoltage,
    /// `i(Vname)`, amperes, positive into the positive terminal.
    SourceCurrent,
    /// `id(Mname)`, amperes, channel current into the drain.
    DrainCurrent,
}

/// Time series on the grid `t0 + k*dt`. All signals have the same length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Waveform {
    pub t0: f64,
    pub dt: f64,
    names: Vec<String>,
    kinds: Vec<SignalKind>,
    samples: Vec<Vec<f64>>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
    /// Terminal node names `(pos, neg)` of every voltage source.
    source_terminals: BTreeMap<String, (String, String)>,
}

impl Waveform {
    /// Empty waveform with the given signals.
    pub fn new(t0: f64, dt: f64, signals: Vec<(String, SignalKind)>) -> Self {
        let mut w = Self {
            t0,
            dt,
            names: Vec::new(),
            kinds: Vec::new(),
            samples: Vec::new(),
            index: BTreeMap::new(),
            source_terminals: BTreeMap::new(),
        };
        for (name, kind) in signals {
            w.index.insert(name.to_ascii_lowercase(), w.names.len());
            w.names.push(name);
            w.kinds.push(kind);
            w.samples.push(Vec::new());
        }
        w
    }

    pub(crate) fn for_circuit(c: &Circuit, dt: f64, capacity: usize) -> Self {
        let mut signals: Vec<(String, SignalKind)> = c
            .node_names
            .iter()
            .skip(1)
            .map(|n| (format!("v({n})"), SignalKind::NodeVoltage))
            .collect();
        signals.extend(
            c.sources
                .iter()
                .map(|s| (format!("i({})", s.name), SignalKind::SourceCurrent)),
        );
        signals.extend(
            c.mosfets
                .iter()
                .map(|m| (format!("id({})", m.name), SignalKind::DrainCurrent)),
        );
        let mut w = Self::new(0.0, dt, signals);
        for s in &mut w.samples {
            s.reserve(capacity);
        }
        for s in &c.sources {
            w.source_terminals.insert(
                s.name.clone(),
                (c.node_names[s.pos].clone(), c.node_names[s.neg].clone()),
            );
        }
        w
    }

    pub(crate) fn push(&mut self, c: &Circuit, x: &DVector<f64>) {
        let nodes = c.node_names.len() - 1;
        let mut col = 0;
        for k in 0..nodes {
            self.samples[col].push(x[k]);
            col += 1;
        }
        for k in 0..c.sources.len() {
            self.samples[col].push(x[c.branch_index(k)]);
            col += 1;
        }
        for m in &c.mosfets {
            let v = m.nodes.map(|n| Circuit::voltage(x, n));
            self.samples[col].push(mosfet_stamp(&m.card, m.w, m.l, v).ids);
            col += 1;
        }
    }

    /// Append one sample row in signal order.
    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.samples.len(), "row width must match signal count");
        for (s, &v) in self.samples.iter_mut().zip(row) {
            s.push(v);
        }
    }

    pub fn set_source_terminals(&mut self, source: &str, pos: &str, neg: &str) {
        self.source_terminals
            .insert(source.to_string(), (pos.to_string(), neg.to_string()));
    }

    /// `(pos, neg)` node names of a voltage source.
    pub fn source_terminals(&self, source: &str) -> Option<(&str, &str)> {
        self.source_terminals
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(source))
            .map(|(_, (p, n))| (p.as_str(), n.as_str()))
    }

    pub fn source_names(&self) -> impl Iterator<Item = &str> {
        self.source_terminals.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kind(&self, name: &str) -> Option<SignalKind> {
        self.index.get(&name.to_ascii_lowercase()).map(|&i| self.kinds[i])
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Samples of a signal by name (case-insensitive). `v(0)` and `v(gnd)`
    /// are not stored; see [`Waveform::node_voltage`].
    pub fn signal(&self, name: &str) -> Option<&[f64]> {
        self.index
            .get(&name.to_ascii_lowercase())
            .map(|&i| self.samples[i].as_slice())
    }

    /// Node voltage series, with ground as all zeros.
    pub fn node_voltage(&self, node: &str) -> Option<Vec<f64>> {
        if node == "0" || node.eq_ignore_ascii_case("gnd") {
            return Some(vec![0.0; self.len()]);
        }
        self.signal(&format!("v({node})")).map(<[f64]>::to_vec)
    }

    /// Linear interpolation of a signal at time `t`, clamped to the span.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        let s = self.signal(name)?;
        Some(interpolate(s, (t - self.t0) / self.dt))
    }

    /// Fractional sample position of `t`.
    pub fn position(&self, t: f64) -> f64 {
        (t - self.t0) / self.dt
    }
}

pub(crate) fn interpolate(s: &[f64], pos: f64) -> f64 {
    if s.is_empty() {
        return f64::NAN;
    }
    let last = s.len() - 1;
    if pos <= 0.0 {
        return s[0];
    }
    if pos >= last as f64 {
        return s[last];
    }
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    s[k] + (s[k + 1] - s[k]) * frac
}
