//! `sramlab sram`: conventional versus adiabatic supply for one operation sequence.

use clap::Args;
use sramlab_core::sram::{ArmReport, ExperimentMode, ExperimentPlan, ExperimentReport, Timing};
use sramlab_core::{run_experiment, SimConfig, SramCellParams};

use crate::error::CliError;
use crate::output::{num, Output};
use crate::parse_value;
use crate::sizing::SizingArgs;

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    /// Supply ramp duration in seconds [default: 2n].
    #[arg(long, value_parser = parse_value)]
    pub ramp_period: Option<f64>,
    /// Wordline-high plateau in seconds [default: 1n].
    #[arg(long, value_parser = parse_value)]
    pub wl_high: Option<f64>,
    /// Low time closing each slot in seconds [default: 0.5n].
    #[arg(long, value_parser = parse_value)]
    pub low: Option<f64>,
    /// Wordline and enable edge time in seconds [default: 20p].
    #[arg(long, value_parser = parse_value)]
    pub edge: Option<f64>,
    /// Transient time step in seconds [default: 5p].
    #[arg(long, value_parser = parse_value)]
    pub dt: Option<f64>,
    /// Ramp only the cell rail on the adiabatic arm; bitline data switches sharply.
    #[arg(long)]
    pub rail_only: bool,
}

impl TimingArgs {
    pub fn timing(&self) -> Timing {
        let mut t = Timing::default();
        for (slot, v) in [
            (&mut t.ramp, self.ramp_period),
            (&mut t.wl_high, self.wl_high),
            (&mut t.low, self.low),
            (&mut t.edge, self.edge),
            (&mut t.dt, self.dt),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        t
    }
}

#[derive(Debug, Clone, Args)]
pub struct SramArgs {
    /// Operation sequence: write01, write-hold or write-read.
    #[arg(long, default_value = "write01", value_parser = parse_mode)]
    pub mode: ExperimentMode,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[command(flatten)]
    pub sizing: SizingArgs,
}

fn parse_mode(s: &str) -> Result<ExperimentMode, String> {
    s.parse::<ExperimentMode>().map_err(|e| e.to_string())
}

pub fn plan(mode: ExperimentMode, t: &TimingArgs) -> Result<ExperimentPlan, CliError> {
    let plan = ExperimentPlan {
        timing: t.timing(),
        rail_only: t.rail_only,
        ..ExperimentPlan::new(mode)
    };
    plan.timing.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(plan)
}

pub fn experiment(plan: &ExperimentPlan, p: &SramCellParams) -> Result<ExperimentReport, CliError> {
    run_experiment(plan, p, &SimConfig::default()).map_err(CliError::sim(format!("sram {}", plan.mode)))
}

fn decrease(c: f64, a: f64) -> String {
    num(if c != 0.0 { 100.0 * (c - a) / c } else { 0.0 })
}

fn table_rows(r: &ExperimentReport) -> Vec<Vec<String>> {
    let (c, a) = (&r.conventional.power, &r.adiabatic.power);
    [
        ("average_power_w", c.average_power, a.average_power),
        ("dissipated_energy_j", c.dissipated_energy, a.dissipated_energy),
        ("total_supply_energy_j", c.total_supply_energy, a.total_supply_energy),
        ("gross_supply_energy_j", c.gross_supply_energy, a.gross_supply_energy),
        ("stored_energy_delta_j", c.stored_energy_delta, a.stored_energy_delta),
    ]
    .into_iter()
    .map(|(name, c, a)| vec![name.to_string(), num(c), num(a), decrease(c, a)])
    .collect()
}

fn leakage_rows(c: &ArmReport, a: &ArmReport) -> Option<Vec<Vec<String>>> {
    let (c, a) = (c.hold_leakage.as_ref()?, a.hold_leakage.as_ref()?);
    Some(
        c.iter()
            .map(|(dev, ic)| {
                let ia = a.get(dev).copied().unwrap_or(f64::NAN);
                vec![dev.clone(), num(*ic), num(ia), decrease(*ic, ia)]
            })
            .collect(),
    )
}

pub fn run(args: &SramArgs, out: &mut Output) -> Result<serde_json::Value, CliError> {
    let p = args.sizing.resolve(out)?;
    let plan = plan(args.mode, &args.timing)?;
    if plan.timing.ramp < 50.0 * p.estimated_rc() {
        out.note(format!(
            "ramp {:e} s is shorter than 50x the estimated node RC ({:e} s)",
            plan.timing.ramp,
            p.estimated_rc()
        ));
    }
    let r = experiment(&plan, &p)?;
    let header = ["quantity", "conventional", "adiabatic", "decrease_percent"];
    out.write_csv("table.csv", &header, table_rows(&r))?;
    if let Some(rows) = leakage_rows(&r.conventional, &r.adiabatic) {
        out.write_csv(
            "leakage.csv",
            &["device", "conventional_a", "adiabatic_a", "decrease_percent"],
            rows,
        )?;
    }
    out.write_json("report.json", &r)?;
    out.write_waveform("wave_conventional.csv", &r.conventional.waveform)?;
    out.write_waveform("wave_adiabatic.csv", &r.adiabatic.waveform)?;
    println!(
        "{}: conventional {:.4e} W, adiabatic {:.4e} W, reduction {:.2}%",
        r.mode,
        r.conventional.power.average_power,
        r.adiabatic.power.average_power,
        r.reduction_percent()
    );
    Ok(serde_json::json!({ "cell": p, "plan": plan }))
}
