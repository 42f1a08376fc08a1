//! Slot-based stimulus for write, read and hold operations.
//!
//! Every operation occupies one slot. A slot opens with a plateau where the
//! supply sits at `vdd` and the access sequence runs:
//!
//! ```text
//! | EN down | WL up | WL high | WL down | EN up | rail down | low | rail up |
//! |  ramp   | ramp  | wl_high |  ramp   | ramp  |   ramp    | low |  ramp   |
//! ```
//!
//! EN gates the bitline driver switches and only drops for reads, which
//! leaves the precharged bitlines floating. WL and EN are logic controls with
//! `edge`-long transitions under either supply. Under an adiabatic supply the
//! rail dips to 0 between slots and the bitline data returns to zero with it,
//! every data edge being a `ramp`-long linear ramp. Under a conventional
//! supply the rail is DC and the data switches in `edge` only when it changes.

use serde::Serialize;

use super::{SramCellParams, SramError};
use crate::devices::ModelCard;
use crate::engine::{dc_operating_point_preloaded, transient, SimConfig, Waveform};
use crate::netlist::{Netlist, SourceSpec};

/// W/L of the bitline driver switches.
const SWITCH_WL: f64 = 8.0;
/// Model of the bitline driver switches: the cell NMOS card without gate
/// capacitance or leakage, so the switches act as ideal releasable drivers.
pub const SWITCH_MODEL: &str = "nsw";
/// WL driver series resistance (Ohm).
const WL_DRIVE_OHMS: f64 = 1e3;
/// Bitline tie that keeps released bitlines defined (Ohm).
const BITLINE_TIE_OHMS: f64 = 10e6;
/// Bitline differential that counts as a sensed read (V).
pub const SENSE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Op {
    Write(bool),
    Read,
    Hold,
}

impl Op {
    fn data(self, vdd: f64) -> (f64, f64) {
        match self {
            Op::Write(true) => (vdd, 0.0),
            Op::Write(false) => (0.0, vdd),
            Op::Read | Op::Hold => (vdd, vdd),
        }
    }

    fn pulses_wordline(self) -> bool {
        !matches!(self, Op::Hold)
    }
}

/// Durations of one slot (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    /// Ramp length of every adiabatic edge.
    pub ramp: f64,
    /// Wordline high time between its edges.
    pub wl_high: f64,
    /// Time the adiabatic rail rests at 0 between slots.
    pub low: f64,
    /// Conventional edge length.
    pub edge: f64,
    /// Transient time step.
    pub dt: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            ramp: 2e-9,
            wl_high: 1e-9,
            low: 0.5e-9,
            edge: 20e-12,
            dt: 5e-12,
        }
    }
}

impl Timing {
    pub fn plateau(&self) -> f64 {
        4.0 * self.ramp + self.wl_high
    }

    pub fn slot(&self) -> f64 {
        self.plateau() + 2.0 * self.ramp + self.low
    }

    pub fn validate(&self) -> Result<(), SramError> {
        let all = [self.ramp, self.wl_high, self.low, self.edge, self.dt];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SramError::InvalidPlan(
                "all timing values must be finite and > 0".into(),
            ));
        }
        if self.edge > self.ramp {
            return Err(SramError::InvalidPlan("edge must not exceed ramp".into()));
        }
        if self.dt > self.edge {
            return Err(SramError::InvalidPlan("dt must not exceed edge".into()));
        }
        Ok(())
    }
}

/// How the cell rail (and, by default, the drivers) is powered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SupplyKind {
    Conventional { vdd: f64 },
    Adiabatic(SourceSpec),
}

impl SupplyKind {
    pub fn conventional(p: &SramCellParams) -> Self {
        SupplyKind::Conventional { vdd: p.vdd }
    }

    /// The rail waveform matching the slot schedule: full `vdd` through each
    /// plateau, a ramped dip to 0 between slots.
    pub fn adiabatic(p: &SramCellParams, t: &Timing) -> Self {
        SupplyKind::Adiabatic(SourceSpec::Ramp {
            v_start: p.vdd,
            v_end: 0.0,
            delay: t.plateau(),
            rise: t.ramp,
            hold: t.low,
            fall: t.ramp,
            period: t.slot(),
        })
    }

    pub fn is_adiabatic(&self) -> bool {
        matches!(self, SupplyKind::Adiabatic(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SupplyKind::Conventional { .. } => "conventional",
            SupplyKind::Adiabatic(_) => "adiabatic",
        }
    }

    fn check(&self, p: &SramCellParams, t: &Timing) -> Result<(), SramError> {
        match self {
            SupplyKind::Conventional { vdd } if (vdd - p.vdd).abs() <= 1e-12 * p.vdd => Ok(()),
            SupplyKind::Conventional { vdd } => Err(SramError::InvalidPlan(format!(
                "conventional supply {vdd} V differs from cell vdd {} V",
                p.vdd
            ))),
            SupplyKind::Adiabatic(SourceSpec::Sine { .. }) => Err(SramError::UnsupportedSupply(
                "a sinusoidal rail has no flat phase to align write and read pulses with; use the ramp supply".into(),
            )),
            SupplyKind::Adiabatic(spec @ SourceSpec::Ramp { .. }) => {
                if *spec == *SupplyKind::adiabatic(p, t).spec().unwrap() {
                    Ok(())
                } else {
                    Err(SramError::InvalidPlan(
                        "adiabatic ramp must peak at vdd and follow the slot timing".into(),
                    ))
                }
            }
            SupplyKind::Adiabatic(_) => Err(SramError::UnsupportedSupply(
                "adiabatic supply must be RAMP or SINE".into(),
            )),
        }
    }

    fn spec(&self) -> Option<&SourceSpec> {
        match self {
            SupplyKind::Adiabatic(s) => Some(s),
            SupplyKind::Conventional { .. } => None,
        }
    }
}

/// A sequence of operations on one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePlan {
    /// Bit stored in the cell (the value of node A) before the first slot.
    pub initial: bool,
    pub ops: Vec<Op>,
    pub supply: SupplyKind,
    pub timing: Timing,
    /// Ramp only the cell rail and keep the bitline data drivers conventional.
    pub rail_only: bool,
    /// When false the wordline never rises (fault injection).
    pub wordline_enabled: bool,
}

impl SequencePlan {
    pub fn new(p: &SramCellParams, initial: bool, ops: Vec<Op>, adiabatic: bool, timing: Timing) -> Self {
        let supply = if adiabatic {
            SupplyKind::adiabatic(p, &timing)
        } else {
            SupplyKind::conventional(p)
        };
        Self {
            initial,
            ops,
            supply,
            timing,
            rail_only: false,
            wordline_enabled: true,
        }
    }

    pub fn duration(&self) -> f64 {
        self.ops.len() as f64 * self.timing.slot()
    }
}

/// Boundaries and probe instants of one slot (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotWindow {
    pub op: Op,
    pub start: f64,
    pub end: f64,
    /// End of the plateau: the stored state is sampled here.
    pub check_time: f64,
    /// End of WL high: the bitline differential is sampled here.
    pub sense_time: f64,
}

/// A ready-to-simulate sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceBench {
    pub netlist: Netlist,
    /// Source name and waveform for every driver.
    pub stimulus: Vec<(String, SourceSpec)>,
    pub slots: Vec<SlotWindow>,
    /// Node preloads for the initial DC solve.
    pub preload: Vec<(String, f64)>,
}

impl SequenceBench {
    pub fn source_names(&self) -> Vec<&str> {
        self.stimulus.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// Piecewise-linear signal built from level changes.
struct Track {
    points: Vec<(f64, f64)>,
    level: f64,
}

impl Track {
    fn new(level: f64) -> Self {
        Self {
            points: vec![(0.0, level)],
            level,
        }
    }

    fn change(&mut self, start: f64, length: f64, target: f64) {
        if target == self.level {
            return;
        }
        if start > self.points.last().map_or(0.0, |p| p.0) {
            self.points.push((start, self.level));
        }
        self.points.push((start + length, target));
        self.level = target;
    }

    fn into_spec(self) -> SourceSpec {
        if self.points.len() == 1 {
            SourceSpec::Dc(self.level)
        } else {
            SourceSpec::Pwl(self.points)
        }
    }
}

/// Build the netlist and driver waveforms for a plan.
pub fn build_sequence(p: &SramCellParams, plan: &SequencePlan) -> Result<SequenceBench, SramError> {
    p.validate()?;
    let t = plan.timing;
    t.validate()?;
    plan.supply.check(p, &t)?;
    if plan.ops.is_empty() {
        return Err(SramError::InvalidPlan("at least one operation is required".into()));
    }
    let vdd = p.vdd;
    let ramped = plan.supply.is_adiabatic();
    let ramped_drivers = ramped && !plan.rail_only;
    let edge = t.edge;
    let data_edge = if ramped_drivers { t.ramp } else { t.edge };
    let slot = t.slot();
    let plateau = t.plateau();
    let en_high = 2.0 * vdd;

    let (bl0, blb0) = plan.ops[0].data(vdd);
    let mut bl = Track::new(bl0);
    let mut blb = Track::new(blb0);
    let mut wl = Track::new(0.0);
    let mut en = Track::new(en_high);
    let mut slots = Vec::with_capacity(plan.ops.len());

    for (k, &op) in plan.ops.iter().enumerate() {
        let t0 = k as f64 * slot;
        if op == Op::Read {
            en.change(t0, edge, 0.0);
            en.change(t0 + 3.0 * t.ramp + t.wl_high, edge, en_high);
        }
        if op.pulses_wordline() && plan.wordline_enabled {
            wl.change(t0 + t.ramp, edge, vdd);
            wl.change(t0 + 2.0 * t.ramp + t.wl_high, edge, 0.0);
        }
        let (next_bl, next_blb) = plan.ops.get(k + 1).map_or((vdd, vdd), |o| o.data(vdd));
        let up = t0 + plateau + t.ramp + t.low;
        if ramped_drivers {
            bl.change(t0 + plateau, t.ramp, 0.0);
            blb.change(t0 + plateau, t.ramp, 0.0);
        }
        bl.change(up, data_edge, next_bl);
        blb.change(up, data_edge, next_blb);
        slots.push(SlotWindow {
            op,
            start: t0,
            end: t0 + slot,
            check_time: t0 + plateau,
            sense_time: t0 + 2.0 * t.ramp + t.wl_high,
        });
    }

    let rail = match &plan.supply {
        SupplyKind::Conventional { vdd } => SourceSpec::Dc(*vdd),
        SupplyKind::Adiabatic(spec) => spec.clone(),
    };
    let stimulus = vec![
        ("VRAIL".to_string(), rail),
        ("VWL".to_string(), wl.into_spec()),
        ("VBL".to_string(), bl.into_spec()),
        ("VBLB".to_string(), blb.into_spec()),
        ("VEN".to_string(), en.into_spec()),
    ];

    let mut n = super::build_6t_cell(p)?;
    n.title = format!("6t sram {} sequence", plan.supply.label());
    let l = p.length;
    n.add_vsource("VRAIL", "VDD", "0", stimulus[0].1.clone())?;
    n.add_vsource("VWL", "WLD", "0", stimulus[1].1.clone())?;
    n.add_resistor("RWL", "WLD", "WL", WL_DRIVE_OHMS)?;
    n.add_vsource("VBL", "BLD", "0", stimulus[2].1.clone())?;
    n.add_vsource("VBLB", "BLBD", "0", stimulus[3].1.clone())?;
    n.add_vsource("VEN", "EN", "0", stimulus[4].1.clone())?;
    n.add_model(
        SWITCH_MODEL,
        ModelCard {
            cgs_per_area: 0.0,
            cgd_per_area: 0.0,
            leak_i0: 0.0,
            ..p.nmos.clone()
        },
    )?;
    n.add_mosfet("MSW1", "BLD", "EN", "BL", "0", SWITCH_MODEL, SWITCH_WL * l, l)?;
    n.add_mosfet("MSW2", "BLBD", "EN", "BLB", "0", SWITCH_MODEL, SWITCH_WL * l, l)?;
    n.add_resistor("RTIE1", "BLD", "BL", BITLINE_TIE_OHMS)?;
    n.add_resistor("RTIE2", "BLBD", "BLB", BITLINE_TIE_OHMS)?;

    let (va, vb) = if plan.initial { (vdd, 0.0) } else { (0.0, vdd) };
    Ok(SequenceBench {
        netlist: n,
        stimulus,
        slots,
        preload: vec![("A".into(), va), ("B".into(), vb)],
    })
}

/// What one slot did to the cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotOutcome {
    pub index: usize,
    pub op: Op,
    pub v_a: f64,
    pub v_b: f64,
    /// Bit held at the end of the plateau (node A high means 1).
    pub stored: bool,
    /// `v(BL) - v(BLB)` at the sense instant (reads only).
    pub bitline_differential: Option<f64>,
    /// Sensed value when the differential exceeds the threshold.
    pub read_value: Option<bool>,
    /// The cell flipped during a read.
    pub upset: bool,
}

/// A simulated sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceRun {
    pub bench: SequenceBench,
    pub outcomes: Vec<SlotOutcome>,
    #[serde(skip)]
    pub waveform: Waveform,
}

impl SequenceRun {
    /// Fails with `ReadUpset` if any read flipped the cell.
    pub fn check_reads(&self) -> Result<&Self, SramError> {
        match self.outcomes.iter().find(|o| o.upset) {
            Some(o) => Err(SramError::ReadUpset {
                slot: o.index,
                now: u8::from(o.stored),
            }),
            None => Ok(self),
        }
    }

    pub fn final_state(&self) -> Option<bool> {
        self.outcomes.last().map(|o| o.stored)
    }
}

/// Simulate a plan from its preloaded initial state.
///
/// A write whose destination node does not cross `vdd/2` by the end of the
/// plateau is an error; a read that flips the cell is only recorded.
pub fn run_sequence(p: &SramCellParams, plan: &SequencePlan, cfg: &SimConfig) -> Result<SequenceRun, SramError> {
    let bench = build_sequence(p, plan)?;
    let preload: Vec<(&str, f64)> = bench.preload.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let label = plan.supply.label();
    let init = dc_operating_point_preloaded(&bench.netlist, cfg, &preload)
        .map_err(SramError::sim(format!("{label} initial state")))?;
    let w = transient(&bench.netlist, cfg, plan.timing.dt, plan.duration(), Some(&init))
        .map_err(SramError::sim(format!("{label} sequence")))?;

    let probe = |name: &str, t: f64| w.value_at(name, t).unwrap_or(f64::NAN);
    let mut previous = plan.initial;
    let mut outcomes = Vec::with_capacity(bench.slots.len());
    for (index, s) in bench.slots.iter().enumerate() {
        let (v_a, v_b) = (probe("v(A)", s.check_time), probe("v(B)", s.check_time));
        let stored = v_a > v_b;
        if let Op::Write(bit) = s.op {
            let crossed = if bit { v_a > p.vdd / 2.0 } else { v_a < p.vdd / 2.0 };
            if !crossed {
                return Err(SramError::WriteFailed {
                    slot: index,
                    bit: u8::from(bit),
                    v_a,
                    v_b,
                });
            }
        }
        let (diff, read_value, upset) = if s.op == Op::Read {
            let d = probe("v(BL)", s.sense_time) - probe("v(BLB)", s.sense_time);
            let value = (d.abs() >= SENSE_THRESHOLD).then_some(d > 0.0);
            (Some(d), value, stored != previous)
        } else {
            (None, None, false)
        };
        outcomes.push(SlotOutcome {
            index,
            op: s.op,
            v_a,
            v_b,
            stored,
            bitline_differential: diff,
            read_value,
            upset,
        });
        previous = stored;
    }
    Ok(SequenceRun {
        bench,
        outcomes,
        waveform: w,
    })
}

/// Write `bit` into a cell holding its complement, then hold for one slot.
pub fn write_sequence(bit: bool, supply: SupplyKind, timing: Timing) -> SequencePlan {
    SequencePlan {
        initial: !bit,
        ops: vec![Op::Write(bit), Op::Hold],
        supply,
        timing,
        rail_only: false,
        wordline_enabled: true,
    }
}

/// Read a cell holding `stored`.
pub fn read_sequence(stored: bool, supply: SupplyKind, timing: Timing) -> SequencePlan {
    SequencePlan {
        initial: stored,
        ops: vec![Op::Read],
        supply,
        timing,
        rail_only: false,
        wordline_enabled: true,
    }
}

/// Hold `stored` for `slots` slots.
pub fn hold_sequence(stored: bool, slots: usize, supply: SupplyKind, timing: Timing) -> SequencePlan {
    SequencePlan {
        initial: stored,
        ops: vec![Op::Hold; slots.max(1)],
        supply,
        timing,
        rail_only: false,
        wordline_enabled: true,
    }
}
