//! `sramlab run`: execute the analyses of a netlist file.

use std::path::PathBuf;

use clap::Args;
use sramlab_core::engine::{dc_operating_point, dc_sweep, transient};
use sramlab_core::netlist::{parse_netlist, Analysis, SourceSpec};
use sramlab_core::SimConfig;

use crate::error::CliError;
use crate::output::{num, Output};
use crate::parse_value;

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Netlist file.
    pub netlist: PathBuf,
    /// Replace a voltage source with a DC value, e.g. `--set V1=1.2`. Repeatable.
    #[arg(long = "set", value_name = "SOURCE=VALUE", value_parser = parse_assignment)]
    pub overrides: Vec<(String, f64)>,
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected SOURCE=VALUE, got '{s}'"))?;
    Ok((name.trim().to_string(), parse_value(value.trim())?))
}

pub fn run(args: &RunArgs, out: &mut Output) -> Result<serde_json::Value, CliError> {
    let bytes = std::fs::read(&args.netlist).map_err(CliError::io(&args.netlist))?;
    out.input(&args.netlist, &bytes);
    let text = String::from_utf8_lossy(&bytes);
    let mut n = parse_netlist(&text).map_err(|source| CliError::Netlist {
        path: args.netlist.clone(),
        source,
    })?;
    for (name, value) in &args.overrides {
        n.set_source(name, SourceSpec::Dc(*value))
            .map_err(|e| CliError::Usage(format!("--set {name}: {e}")))?;
    }
    if n.analyses().is_empty() {
        eprintln!("warning: no analyses");
        out.note("no analyses");
    }
    let cfg = SimConfig::default();
    for (i, a) in n.analyses().iter().enumerate() {
        let k = i + 1;
        match a {
            Analysis::Op => {
                let s = dc_operating_point(&n, &cfg).map_err(CliError::sim(format!("analysis {k} (.op)")))?;
                let volts = s
                    .node_names
                    .iter()
                    .zip(&s.node_voltages)
                    .skip(1)
                    .map(|(name, v)| vec![format!("v({name})"), num(*v)]);
                let amps = s
                    .source_names
                    .iter()
                    .zip(&s.source_currents)
                    .map(|(name, i)| vec![format!("i({name})"), num(*i)]);
                out.write_csv(&format!("op_{k}.csv"), &["signal", "value"], volts.chain(amps))?;
            }
            Analysis::Dc {
                source,
                start,
                stop,
                step,
            } => {
                let sw = dc_sweep(&n, source, *start, *stop, *step, &cfg)
                    .map_err(CliError::sim(format!("analysis {k} (.dc)")))?;
                let nodes: Vec<&String> = n.nodes().iter().skip(1).collect();
                let mut header = vec![source.clone()];
                header.extend(nodes.iter().map(|name| format!("v({name})")));
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                let rows = sw.values.iter().zip(&sw.solutions).map(|(x, s)| {
                    let mut row = vec![num(*x)];
                    row.extend(nodes.iter().map(|name| num(s.voltage(name).unwrap_or(f64::NAN))));
                    row
                });
                out.write_csv(&format!("dc_{k}.csv"), &header, rows)?;
            }
            Analysis::Tran { dt, tstop } => {
                let w =
                    transient(&n, &cfg, *dt, *tstop, None).map_err(CliError::sim(format!("analysis {k} (.tran)")))?;
                out.write_waveform(&format!("tran_{k}.csv"), &w)?;
            }
        }
    }
    Ok(serde_json::json!({
        "netlist": args.netlist.display().to_string(),
        "title": n.title,
        "analyses": n.analyses(),
        "overrides": args.overrides,
        "sim": cfg,
    }))
}
