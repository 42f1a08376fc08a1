//! Cell sizing shared by the `sram`, `snm` and `sweep` subcommands.

use std::path::PathBuf;

use clap::Args;
use sramlab_core::sram::parse_key_values;
use sramlab_core::SramCellParams;

use crate::error::CliError;
use crate::output::Output;
use crate::parse_value;

#[derive(Debug, Clone, Args)]
pub struct SizingArgs {
    /// `key = value` sizing file (vdd, length, driver_wl, access_wl, load_wl,
    /// bitline_c, cell_ratio). A missing file falls back to the defaults.
    #[arg(long, value_name = "PATH")]
    pub sizing: Option<PathBuf>,
    /// Supply voltage [default: 1.8].
    #[arg(long, value_parser = parse_value)]
    pub vdd: Option<f64>,
    /// Driver to access W/L ratio [default: 2].
    #[arg(long, value_parser = parse_value)]
    pub cell_ratio: Option<f64>,
    /// Capacitance of each bitline in farads [default: 10f].
    #[arg(long, value_parser = parse_value)]
    pub bitline_c: Option<f64>,
}

impl SizingArgs {
    /// Defaults, then the sizing file, then individual flags.
    pub fn resolve(&self, out: &mut Output) -> Result<SramCellParams, CliError> {
        let mut p = SramCellParams::default();
        if let Some(path) = &self.sizing {
            match std::fs::read(path) {
                Ok(bytes) => {
                    out.input(path, &bytes);
                    let text = String::from_utf8_lossy(&bytes);
                    let kv =
                        parse_key_values(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    p = p
                        .with_overrides(&kv)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    out.note(format!(
                        "sizing file {} not found; using default sizing",
                        path.display()
                    ));
                }
                Err(e) => return Err(CliError::io(path)(e)),
            }
        }
        if let Some(v) = self.vdd {
            p.vdd = v;
        }
        if let Some(r) = self.cell_ratio {
            p = p.with_cell_ratio(r);
        }
        if let Some(c) = self.bitline_c {
            p.bitline_c = c;
        }
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}
