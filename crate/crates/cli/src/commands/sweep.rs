//! `sramlab sweep`: repeat an experiment over one parameter.

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use sramlab_core::measure::{adiabatic_energy_law, charge_experiment, ChargeProfile, ChargingLaw};
use sramlab_core::snm::SnmMode;
use sramlab_core::sram::ExperimentMode;
use sramlab_core::{SimConfig, SramCellParams};

use crate::commands::{snm, sram};
use crate::error::CliError;
use crate::output::{num, Output};
use crate::parse_value;
use crate::sizing::SizingArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    RampPeriod,
    Vdd,
    CellRatio,
    BitlineC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// RC charging fixture driven by a linear ramp.
    Charge,
    /// Conventional versus adiabatic SRAM experiment.
    Sram,
    /// Static noise margin at the nominal supply.
    Snm,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: Param,
    /// Comma-separated values with optional suffixes, e.g. `10n,20n,40n`.
    #[arg(
        long,
        value_name = "LIST",
        conflicts_with = "range",
        required_unless_present = "range"
    )]
    pub values: Option<String>,
    /// `START:STOP:COUNT`, linearly spaced and inclusive.
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub range: Option<String>,
    #[arg(long, value_enum, default_value = "sram")]
    pub target: Target,
    /// Experiment mode of the target: write01, write-hold or write-read for
    /// `sram`; hold or read for `snm` [default: write01 or hold].
    #[arg(long)]
    pub mode: Option<String>,
    /// Charge target resistance in ohms.
    #[arg(long, default_value = "1k", value_parser = parse_value)]
    pub r: f64,
    /// Charge target capacitance in farads.
    #[arg(long, default_value = "100f", value_parser = parse_value)]
    pub c: f64,
    /// Charge target ramp when not swept, in seconds.
    #[arg(long, default_value = "10n", value_parser = parse_value)]
    pub ramp: f64,
    #[command(flatten)]
    pub timing: sram::TimingArgs,
    #[command(flatten)]
    pub sizing: SizingArgs,
}

/// Sweep points from `--values` or `--range`, sorted ascending.
pub fn points(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    let mut pts = if let Some(list) = &args.values {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(s).map_err(CliError::Usage))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let spec = args.range.as_deref().unwrap_or_default();
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(CliError::Usage(format!(
                "--range expects START:STOP:COUNT, got '{spec}'"
            )));
        };
        let (start, stop) = (
            parse_value(start).map_err(CliError::Usage)?,
            parse_value(stop).map_err(CliError::Usage)?,
        );
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad range count '{count}'")))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    };
    if pts.is_empty() {
        return Err(CliError::Usage("sweep range is empty".into()));
    }
    if pts.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Usage("sweep values must be finite and > 0".into()));
    }
    pts.sort_by(f64::total_cmp);
    Ok(pts)
}

fn apply(p: &SramCellParams, param: Param, v: f64) -> SramCellParams {
    match param {
        Param::Vdd => SramCellParams { vdd: v, ..p.clone() },
        Param::CellRatio => p.with_cell_ratio(v),
        Param::BitlineC => SramCellParams {
            bitline_c: v,
            ..p.clone()
        },
        Param::RampPeriod => p.clone(),
    }
}

fn charge_rows(args: &SweepArgs, pts: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let vdd = args.sizing.vdd.unwrap_or(SramCellParams::default().vdd);
    pts.par_iter()
        .map(|&x| {
            let (t, v) = match args.param {
                Param::RampPeriod => (x, vdd),
                Param::Vdd => (args.ramp, x),
                _ => unreachable!("checked by the caller"),
            };
            let law = ChargingLaw::new(args.r, args.c, v, t).map_err(|e| CliError::Usage(e.to_string()))?;
            let o = charge_experiment(&law, ChargeProfile::Ramp, None, &SimConfig::default())
                .map_err(CliError::sim(format!("charge at {x:e}")))?;
            Ok(vec![
                x,
                o.supply_energy,
                o.dissipated_energy,
                adiabatic_energy_law(&law),
            ])
        })
        .collect()
}

fn sram_rows(
    args: &SweepArgs,
    p: &SramCellParams,
    mode: ExperimentMode,
    pts: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    let base = sram::plan(mode, &args.timing)?;
    pts.par_iter()
        .map(|&x| {
            let mut plan = base.clone();
            if args.param == Param::RampPeriod {
                plan.timing.ramp = x;
            }
            let r = sram::experiment(&plan, &apply(p, args.param, x))?;
            let (c, a) = (&r.conventional.power, &r.adiabatic.power);
            Ok(vec![
                x,
                c.average_power,
                a.average_power,
                c.dissipated_energy,
                a.dissipated_energy,
                r.reduction_percent(),
            ])
        })
        .collect()
}

fn snm_rows(p: &SramCellParams, mode: SnmMode, param: Param, pts: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    pts.par_iter()
        .map(|&x| {
            let q = apply(p, param, x);
            let e = snm::measure(&q, mode, q.vdd)?;
            Ok(vec![x, e.result.snm, e.result.snm_lobe_high, e.result.snm_lobe_low])
        })
        .collect()
}

fn param_name(p: Param) -> &'static str {
    match p {
        Param::RampPeriod => "ramp_period_s",
        Param::Vdd => "vdd_v",
        Param::CellRatio => "cell_ratio",
        Param::BitlineC => "bitline_c_f",
    }
}

pub fn run(args: &SweepArgs, out: &mut Output) -> Result<serde_json::Value, CliError> {
    let pts = points(args)?;
    let unsupported = |t: &str| CliError::Usage(format!("--param {:?} does not apply to the {t} target", args.param));
    let (header, rows, mode) = match args.target {
        Target::Charge => {
            if !matches!(args.param, Param::RampPeriod | Param::Vdd) {
                return Err(unsupported("charge"));
            }
            let h = ["supply_energy_j", "dissipated_energy_j", "law_energy_j"];
            (h.to_vec(), charge_rows(args, &pts)?, None)
        }
        Target::Sram => {
            let mode: ExperimentMode = args
                .mode
                .as_deref()
                .unwrap_or("write01")
                .parse()
                .map_err(|e: sramlab_core::SramError| CliError::Usage(e.to_string()))?;
            let p = args.sizing.resolve(out)?;
            let h = [
                "conventional_power_w",
                "adiabatic_power_w",
                "conventional_dissipated_j",
                "adiabatic_dissipated_j",
                "reduction_percent",
            ];
            (h.to_vec(), sram_rows(args, &p, mode, &pts)?, Some(mode.to_string()))
        }
        Target::Snm => {
            if args.param == Param::RampPeriod || args.param == Param::BitlineC {
                return Err(unsupported("snm"));
            }
            let mode: SnmMode = args
                .mode
                .as_deref()
                .unwrap_or("hold")
                .parse()
                .map_err(CliError::Usage)?;
            let p = args.sizing.resolve(out)?;
            let h = ["snm_v", "snm_lobe_high_v", "snm_lobe_low_v"];
            (
                h.to_vec(),
                snm_rows(&p, mode, args.param, &pts)?,
                Some(format!("{mode:?}").to_lowercase()),
            )
        }
    };
    let mut full = vec![param_name(args.param)];
    full.extend(header);
    out.write_csv(
        "sweep.csv",
        &full,
        rows.iter().map(|r| r.iter().map(|v| num(*v)).collect::<Vec<_>>()),
    )?;
    println!("{} points written to sweep.csv", rows.len());
    Ok(serde_json::json!({
        "param": param_name(args.param),
        "target": format!("{:?}", args.target).to_lowercase(),
        "mode": mode,
        "values": pts,
    }))
}
