//! `sramlab snm`: butterfly curves and the maximum-square noise margin.

use clap::Args;
use serde::Serialize;
use sramlab_core::snm::{butterfly_rows, snm_experiment, SnmExperiment, SnmMode};
use sramlab_core::{SimConfig, SramCellParams};

use crate::error::CliError;
use crate::output::{num, Output};
use crate::parse_value;
use crate::sizing::SizingArgs;

#[derive(Debug, Clone, Args)]
pub struct SnmArgs {
    /// hold (wordline low) or read (wordline high).
    #[arg(long, default_value = "hold", value_parser = clap::value_parser!(SnmModeArg))]
    pub mode: SnmModeArg,
    /// Supply level the curves are evaluated at [default: vdd, or vdd/2 for
    /// the adiabatic arm with --compare].
    #[arg(long, value_parser = parse_value)]
    pub supply_sample: Option<f64>,
    /// Evaluate both arms: conventional at vdd, adiabatic at the sampled level.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub sizing: SizingArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SnmModeArg {
    Hold,
    Read,
}

impl From<SnmModeArg> for SnmMode {
    fn from(m: SnmModeArg) -> Self {
        match m {
            SnmModeArg::Hold => SnmMode::Hold,
            SnmModeArg::Read => SnmMode::Read,
        }
    }
}

#[derive(Debug, Serialize)]
struct Comparison {
    mode: SnmMode,
    conventional_supply_v: f64,
    adiabatic_supply_v: f64,
    conventional_snm_v: f64,
    adiabatic_snm_v: f64,
}

pub fn measure(p: &SramCellParams, mode: SnmMode, sample: f64) -> Result<SnmExperiment, CliError> {
    snm_experiment(p, mode, sample, &SimConfig::default()).map_err(|e| match e {
        sramlab_core::SnmError::InvalidSupplySample { .. } => CliError::Usage(e.to_string()),
        other => CliError::sim("snm")(other),
    })
}

fn write_arm(out: &mut Output, suffix: &str, e: &SnmExperiment) -> Result<(), CliError> {
    let rows = butterfly_rows(&e.result)
        .into_iter()
        .map(|r| r.iter().map(|v| num(*v)).collect());
    out.write_csv(
        &format!("butterfly{suffix}.csv"),
        &["x", "y_curve1", "y_curve2_mirrored"],
        rows,
    )?;
    out.write_json(&format!("snm{suffix}.json"), e)
}

pub fn run(args: &SnmArgs, out: &mut Output) -> Result<serde_json::Value, CliError> {
    let p = args.sizing.resolve(out)?;
    let mode = SnmMode::from(args.mode);
    if args.compare {
        let sample = args.supply_sample.unwrap_or(p.vdd / 2.0);
        let (c, a) = rayon::join(|| measure(&p, mode, p.vdd), || measure(&p, mode, sample));
        let (c, a) = (c?, a?);
        write_arm(out, "_conventional", &c)?;
        write_arm(out, "_adiabatic", &a)?;
        let cmp = Comparison {
            mode,
            conventional_supply_v: c.supply_sample,
            adiabatic_supply_v: a.supply_sample,
            conventional_snm_v: c.result.snm,
            adiabatic_snm_v: a.result.snm,
        };
        out.write_json("comparison.json", &cmp)?;
        out.write_csv(
            "comparison.csv",
            &["quantity", "conventional", "adiabatic"],
            [
                vec!["supply_v".to_string(), num(c.supply_sample), num(a.supply_sample)],
                vec!["snm_v".to_string(), num(c.result.snm), num(a.result.snm)],
            ],
        )?;
        println!(
            "{mode:?} SNM: conventional {:.4} V, adiabatic {:.4} V at {sample:.4} V",
            c.result.snm, a.result.snm
        );
        Ok(serde_json::json!({ "cell": p, "mode": mode, "compare": true, "supply_sample": sample }))
    } else {
        let sample = args.supply_sample.unwrap_or(p.vdd);
        let e = measure(&p, mode, sample)?;
        write_arm(out, "", &e)?;
        println!("{mode:?} SNM: {:.4} V at {sample:.4} V", e.result.snm);
        Ok(serde_json::json!({ "cell": p, "mode": mode, "compare": false, "supply_sample": sample }))
    }
}
