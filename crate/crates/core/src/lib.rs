//! Circuit simulation core for SRAM and adiabatic-charging experiments.
//!
//! The crate is layered bottom-up: [`netlist`] holds the circuit data model,
//! [`devices`] evaluates MOSFETs and sources, [`engine`] solves the MNA
//! system, [`measure`] turns waveforms into energy and leakage figures,
//! [`sram`] builds and drives the 6T cell, and [`snm`] extracts noise margins.

pub mod devices;
pub mod engine;
pub mod measure;
pub mod netlist;
pub mod snm;
pub mod sram;

pub use devices::{mosfet_ids, mosfet_stamp, source_value, DeviceEval, ModelCard, MosKind};
pub use engine::{
    dc_operating_point, dc_operating_point_preloaded, dc_sweep, transient, DcSweep, Integrator, SimConfig, SimError,
    Solution, Waveform,
};
pub use measure::{ChargingLaw, MeasureError, PowerReport};
pub use netlist::{parse_netlist, serialize_netlist, Analysis, Netlist, NetlistError, SourceSpec};
pub use snm::{max_square_snm, noise_margins, snm_experiment, Curve, MirroredCurve, SnmError, SnmMode, SnmResult};
pub use sram::{
    build_6t_cell, run_experiment, ExperimentMode, ExperimentPlan, ExperimentReport, SramCellParams, SramError,
};
