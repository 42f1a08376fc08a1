//! Paired conventional/adiabatic runs of the same operation sequence.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::sequence::{run_sequence, Op, SequencePlan, SequenceRun, SlotOutcome, SupplyKind, Timing};
use super::{SramCellParams, SramError};
use crate::engine::{SimConfig, Waveform};
use crate::measure::{leakage_currents, PowerReport};

/// Devices whose off-state current is reported.
pub const LEAKAGE_DEVICES: [&str; 2] = ["MN3", "MN4"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExperimentMode {
    /// Write 0 into a cell holding 1, then write 1.
    Write0Write1,
    /// Write 0, then hold.
    WriteHold,
    /// Write 0, then read.
    WriteRead,
}

impl ExperimentMode {
    pub const ALL: [ExperimentMode; 3] = [
        ExperimentMode::Write0Write1,
        ExperimentMode::WriteHold,
        ExperimentMode::WriteRead,
    ];

    pub fn ops(self) -> Vec<Op> {
        match self {
            ExperimentMode::Write0Write1 => vec![Op::Write(false), Op::Write(true)],
            ExperimentMode::WriteHold => vec![Op::Write(false), Op::Hold],
            ExperimentMode::WriteRead => vec![Op::Write(false), Op::Read],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentMode::Write0Write1 => "write01",
            ExperimentMode::WriteHold => "write-hold",
            ExperimentMode::WriteRead => "write-read",
        }
    }
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentMode {
    type Err = SramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "write01" | "write0-write1" => Ok(ExperimentMode::Write0Write1),
            "write-hold" | "writehold" => Ok(ExperimentMode::WriteHold),
            "write-read" | "writeread" => Ok(ExperimentMode::WriteRead),
            other => Err(SramError::InvalidPlan(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub mode: ExperimentMode,
    pub timing: Timing,
    /// Ramp only the cell rail on the adiabatic arm.
    pub rail_only: bool,
}

impl ExperimentPlan {
    pub fn new(mode: ExperimentMode) -> Self {
        Self {
            mode,
            timing: Timing::default(),
            rail_only: false,
        }
    }

    fn sequence(&self, supply: SupplyKind) -> SequencePlan {
        SequencePlan {
            initial: true,
            ops: self.mode.ops(),
            supply,
            timing: self.timing,
            rail_only: self.rail_only,
            wordline_enabled: true,
        }
    }
}

/// One arm of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmReport {
    pub supply: String,
    pub power: PowerReport,
    pub outcomes: Vec<SlotOutcome>,
    /// Hold-slot leakage of the access devices, when the mode has a hold slot.
    pub hold_leakage: Option<BTreeMap<String, f64>>,
    #[serde(skip)]
    pub waveform: Waveform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub timing: Timing,
    pub conventional: ArmReport,
    pub adiabatic: ArmReport,
    /// `(P_conventional - P_adiabatic) / P_conventional`.
    pub reduction: f64,
}

impl ExperimentReport {
    pub fn reduction_percent(&self) -> f64 {
        100.0 * self.reduction
    }
}

fn arm(run: SequenceRun, plan: &SequencePlan) -> Result<ArmReport, SramError> {
    let w = &run.waveform;
    let sources = run.bench.source_names();
    let power = PowerReport::measure(w, &run.bench.netlist, &sources, &LEAKAGE_DEVICES, 0.0, plan.duration())?;
    let hold_leakage = run
        .bench
        .slots
        .iter()
        .find(|s| s.op == Op::Hold)
        .map(|s| leakage_currents(w, &LEAKAGE_DEVICES, s.start, s.end))
        .transpose()?;
    Ok(ArmReport {
        supply: plan.supply.label().to_string(),
        power,
        outcomes: run.outcomes,
        hold_leakage,
        waveform: run.waveform,
    })
}

/// Run the plan under two supplies concurrently; the first is the baseline.
pub fn compare_supplies(
    plan: &ExperimentPlan,
    p: &SramCellParams,
    baseline: SupplyKind,
    candidate: SupplyKind,
    cfg: &SimConfig,
) -> Result<ExperimentReport, SramError> {
    let (pa, pb) = (plan.sequence(baseline), plan.sequence(candidate));
    let (a, b) = rayon::join(
        || run_sequence(p, &pa, cfg).and_then(|r| arm(r, &pa)),
        || run_sequence(p, &pb, cfg).and_then(|r| arm(r, &pb)),
    );
    let (a, b) = (a?, b?);
    let pc = a.power.average_power;
    let reduction = if pc != 0.0 {
        (pc - b.power.average_power) / pc
    } else {
        0.0
    };
    Ok(ExperimentReport {
        mode: plan.mode,
        timing: plan.timing,
        conventional: a,
        adiabatic: b,
        reduction,
    })
}

/// Conventional versus adiabatic supply for one mode.
pub fn run_experiment(
    plan: &ExperimentPlan,
    p: &SramCellParams,
    cfg: &SimConfig,
) -> Result<ExperimentReport, SramError> {
    compare_supplies(
        plan,
        p,
        SupplyKind::conventional(p),
        SupplyKind::adiabatic(p, &plan.timing),
        cfg,
    )
}
