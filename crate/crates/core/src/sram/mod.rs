//! The 6T SRAM cell: programmatic netlist construction, stimulus sequences
//! for write/read/hold under DC and ramped supplies, and the paired
//! conventional-versus-adiabatic power experiments.

mod config;
mod experiment;
mod sequence;

use serde::Serialize;
use thiserror::Error;

use crate::devices::ModelCard;
use crate::engine::{dc_operating_point_preloaded, transient, SimConfig, SimError, Solution};
use crate::measure::MeasureError;
use crate::netlist::{Netlist, NetlistError, SourceSpec};

pub use config::{parse_key_values, ConfigError};
pub use experiment::{compare_supplies, run_experiment, ArmReport, ExperimentMode, ExperimentPlan, ExperimentReport};
pub use sequence::{
    build_sequence, hold_sequence, read_sequence, run_sequence, write_sequence, Op, SequenceBench, SequencePlan,
    SequenceRun, SlotOutcome, SlotWindow, SupplyKind, Timing,
};

/// Model name of the cell NMOS devices.
pub const NMOS_MODEL: &str = "nch";
/// Model name of the cell PMOS devices.
pub const PMOS_MODEL: &str = "pch";
/// Subthreshold pre-exponential of the cell cards (A per unit W/L).
pub const CELL_LEAK_I0: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SramError {
    #[error("invalid cell parameters: {0}")]
    InvalidParams(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("unsupported supply for SRAM sequences: {0}")]
    UnsupportedSupply(String),
    #[error("{phase}: {source}")]
    Simulation {
        phase: String,
        #[source]
        source: SimError,
    },
    #[error("write of {bit} failed in slot {slot}: node A at {v_a:.4} V, node B at {v_b:.4} V")]
    WriteFailed { slot: usize, bit: u8, v_a: f64, v_b: f64 },
    #[error("read upset in slot {slot}: cell flipped to {now}")]
    ReadUpset { slot: usize, now: u8 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl SramError {
    pub(crate) fn sim(phase: impl Into<String>) -> impl FnOnce(SimError) -> SramError {
        let phase = phase.into();
        move |source| SramError::Simulation { phase, source }
    }
}

impl From<NetlistError> for SramError {
    fn from(e: NetlistError) -> Self {
        SramError::InvalidParams(e.to_string())
    }
}

/// Geometry, cards and supply of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SramCellParams {
    pub nmos: ModelCard,
    pub pmos: ModelCard,
    /// Channel length of every device (m).
    pub length: f64,
    /// Pull-down (NMOS1, NMOS2) W/L.
    pub driver_wl: f64,
    /// Access (NMOS3, NMOS4) W/L.
    pub access_wl: f64,
    /// Load (PMOS1, PMOS2) W/L.
    pub load_wl: f64,
    pub vdd: f64,
    /// Lumped capacitance of each bitline (F).
    pub bitline_c: f64,
}

impl Default for SramCellParams {
    fn default() -> Self {
        Self {
            nmos: ModelCard::nmos_default().with_leakage(CELL_LEAK_I0, 1.5),
            pmos: ModelCard::pmos_default().with_leakage(CELL_LEAK_I0, 1.5),
            length: 180e-9,
            driver_wl: 4.0,
            access_wl: 2.0,
            load_wl: 2.0,
            vdd: 1.8,
            bitline_c: 10e-15,
        }
    }
}

impl SramCellParams {
    pub fn cell_ratio(&self) -> f64 {
        self.driver_wl / self.access_wl
    }

    /// Same cell with the driver resized to give `ratio`; the access device is kept.
    pub fn with_cell_ratio(&self, ratio: f64) -> Self {
        Self {
            driver_wl: ratio * self.access_wl,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SramError> {
        let geo = [
            self.length,
            self.driver_wl,
            self.access_wl,
            self.load_wl,
            self.vdd,
            self.bitline_c,
        ];
        if geo.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SramError::InvalidParams(
                "length, W/L ratios, vdd and bitline_c must be finite and > 0".into(),
            ));
        }
        self.nmos.validate().map_err(SramError::InvalidParams)?;
        self.pmos.validate().map_err(SramError::InvalidParams)?;
        if self.nmos.kind != crate::devices::MosKind::Nmos || self.pmos.kind != crate::devices::MosKind::Pmos {
            return Err(SramError::InvalidParams("card polarities are swapped".into()));
        }
        Ok(())
    }

    fn width(&self, ratio: f64) -> f64 {
        ratio * self.length
    }

    /// Rough largest RC time constant of the cell and its bitline path (s):
    /// bitline capacitance behind a fully-on access device.
    pub fn estimated_rc(&self) -> f64 {
        let r_on = 1.0 / (self.nmos.kp * self.access_wl * (self.vdd - self.nmos.vt0));
        r_on * self.bitline_c
    }
}

/// The bare cell: nodes VDD, WL, BL, BLB, A, B and ground, with no sources.
pub fn build_6t_cell(p: &SramCellParams) -> Result<Netlist, SramError> {
    p.validate()?;
    let mut n = Netlist::new("6t sram cell");
    n.add_model(NMOS_MODEL, p.nmos.clone())?;
    n.add_model(PMOS_MODEL, p.pmos.clone())?;
    let l = p.length;
    n.add_mosfet("MP1", "A", "B", "VDD", "VDD", PMOS_MODEL, p.width(p.load_wl), l)?;
    n.add_mosfet("MN1", "A", "B", "0", "0", NMOS_MODEL, p.width(p.driver_wl), l)?;
    n.add_mosfet("MP2", "B", "A", "VDD", "VDD", PMOS_MODEL, p.width(p.load_wl), l)?;
    n.add_mosfet("MN2", "B", "A", "0", "0", NMOS_MODEL, p.width(p.driver_wl), l)?;
    n.add_mosfet("MN3", "BL", "WL", "A", "0", NMOS_MODEL, p.width(p.access_wl), l)?;
    n.add_mosfet("MN4", "BLB", "WL", "B", "0", NMOS_MODEL, p.width(p.access_wl), l)?;
    n.add_capacitor("CBL", "BL", "0", p.bitline_c)?;
    n.add_capacitor("CBLB", "BLB", "0", p.bitline_c)?;
    Ok(n)
}

/// Cell with DC rail at `vdd`, WL grounded and both bitlines held at `vdd`.
pub fn hold_bench(p: &SramCellParams) -> Result<Netlist, SramError> {
    let mut n = build_6t_cell(p)?;
    n.add_vsource("VRAIL", "VDD", "0", SourceSpec::Dc(p.vdd))?;
    n.add_vsource("VWL", "WL", "0", SourceSpec::Dc(0.0))?;
    n.add_vsource("VBL", "BL", "0", SourceSpec::Dc(p.vdd))?;
    n.add_vsource("VBLB", "BLB", "0", SourceSpec::Dc(p.vdd))?;
    Ok(n)
}

/// DC state of the held cell reached from a preload of node A (B gets the complement).
pub fn hold_state(p: &SramCellParams, a_high: bool, cfg: &SimConfig) -> Result<Solution, SramError> {
    let n = hold_bench(p)?;
    let (va, vb) = if a_high { (p.vdd, 0.0) } else { (0.0, p.vdd) };
    dc_operating_point_preloaded(&n, cfg, &[("A", va), ("B", vb)]).map_err(SramError::sim("hold preload"))
}

/// Let the held cell evolve freely from `(v_a, v_b)` for `duration` and
/// return the final `(v_a, v_b)`.
pub fn release_cell(
    p: &SramCellParams,
    v_a: f64,
    v_b: f64,
    duration: f64,
    cfg: &SimConfig,
) -> Result<(f64, f64), SramError> {
    let n = hold_bench(p)?;
    let start = dc_operating_point_preloaded(&n, cfg, &[("A", v_a), ("B", v_b)]).map_err(SramError::sim("release"))?;
    // The preload solve lands on the nearest DC solution; restore the exact
    // requested imbalance so the transient starts off the metastable point.
    let mut init = start.clone();
    for (node, v) in [("A", v_a), ("B", v_b)] {
        if let Some(k) = init.node_names.iter().position(|x| x == node) {
            init.node_voltages[k] = v;
        }
    }
    let dt = 5e-12;
    let w = transient(&n, cfg, dt, duration, Some(&init)).map_err(SramError::sim("release"))?;
    let t = w.t_end();
    Ok((
        w.value_at("v(A)", t).unwrap_or(f64::NAN),
        w.value_at("v(B)", t).unwrap_or(f64::NAN),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_topology() {
        let n = build_6t_cell(&SramCellParams::default()).unwrap();
        assert_eq!(n.mosfet_count(), 6);
        assert_eq!(n.devices().len(), 8);
        for node in ["VDD", "WL", "BL", "BLB", "A", "B", "0"] {
            assert!(n.find_node(node).is_some(), "{node}");
        }
        assert_eq!(n.node_count(), 7);
        let gate_of = |m: &str| match &n.device(m).unwrap().element {
            crate::netlist::Element::Mosfet { nodes, .. } => {
                (n.node_name(nodes[0]).to_string(), n.node_name(nodes[1]).to_string())
            }
            _ => unreachable!(),
        };
        assert_eq!(gate_of("MN1"), ("A".into(), "B".into()));
        assert_eq!(gate_of("MP2"), ("B".into(), "A".into()));
        assert_eq!(gate_of("MN3"), ("BL".into(), "WL".into()));
        assert_eq!(gate_of("MN4"), ("BLB".into(), "WL".into()));
    }

    #[test]
    fn ratio_accessor() {
        let p = SramCellParams::default();
        assert_eq!(p.cell_ratio(), 2.0);
        assert_eq!(p.with_cell_ratio(0.5).driver_wl, 1.0);
        assert!(SramCellParams { vdd: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn two_stable_states() {
        let p = SramCellParams::default();
        let cfg = SimConfig::default();
        let one = hold_state(&p, true, &cfg).unwrap();
        let zero = hold_state(&p, false, &cfg).unwrap();
        assert!(one.voltage("A").unwrap() > 0.99 * p.vdd && one.voltage("B").unwrap() < 0.01 * p.vdd);
        assert!(zero.voltage("B").unwrap() > 0.99 * p.vdd && zero.voltage("A").unwrap() < 0.01 * p.vdd);
    }
}
