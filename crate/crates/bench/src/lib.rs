//! Shared fixtures for the benchmarks.

use sramlab_core::netlist::{serialize_netlist, Netlist, SourceSpec};
use sramlab_core::sram::build_6t_cell;
use sramlab_core::SramCellParams;

/// Series RC charged by a 1 ps step, tau = 100 ps.
pub fn rc_step() -> Netlist {
    let mut n = Netlist::new("rc step");
    n.add_vsource("V1", "in", "0", SourceSpec::Pwl(vec![(0.0, 0.0), (1e-12, 1.8)]))
        .and_then(|_| n.add_resistor("R1", "in", "out", 1e3))
        .and_then(|_| n.add_capacitor("C1", "out", "0", 100e-15))
        .expect("fixture is valid");
    n
}

/// The default 6T cell with DC rail, wordline and bitlines attached.
pub fn biased_cell() -> Netlist {
    let p = SramCellParams::default();
    let mut n = build_6t_cell(&p).expect("default cell is valid");
    for (name, node, v) in [
        ("VRAIL", "VDD", p.vdd),
        ("VWL", "WL", 0.0),
        ("VBL", "BL", p.vdd),
        ("VBLB", "BLB", p.vdd),
    ] {
        n.add_vsource(name, node, "0", SourceSpec::Dc(v))
            .expect("fixture is valid");
    }
    n
}

/// Deck text of [`biased_cell`].
pub fn cell_deck() -> String {
    serialize_netlist(&biased_cell())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sramlab_core::parse_netlist;

    #[test]
    fn fixtures_round_trip() {
        assert_eq!(parse_netlist(&cell_deck()).unwrap(), biased_cell());
        assert_eq!(parse_netlist(&serialize_netlist(&rc_step())).unwrap(), rc_step());
    }
}
