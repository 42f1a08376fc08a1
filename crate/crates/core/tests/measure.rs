use sramlab_core::devices::ModelCard;
use sramlab_core::engine::transient;
use sramlab_core::measure::{
    adiabatic_energy_law, charge_experiment, dissipated_energy, element_dissipation, leakage_currents,
    storage_elements, ChargeProfile, ChargingLaw,
};
use sramlab_core::netlist::{Netlist, SourceSpec};
use sramlab_core::sram::{hold_sequence, run_sequence, SramCellParams, SupplyKind, Timing};
use sramlab_core::SimConfig;

const R: f64 = 1e3;
const C: f64 = 100e-15;
const VDD: f64 = 1.8;
const TAU: f64 = R * C;

fn law(k: f64) -> ChargingLaw {
    ChargingLaw::new(R, C, VDD, k * TAU).unwrap()
}

fn ramp(k: f64, dt: Option<f64>) -> f64 {
    charge_experiment(&law(k), ChargeProfile::Ramp, dt, &SimConfig::default())
        .unwrap()
        .dissipated_energy
}

#[test]
fn dissipation_times_ramp_is_constant() {
    let products: Vec<f64> = [50.0, 100.0, 200.0, 400.0]
        .iter()
        .map(|&k| ramp(k, None) * k * TAU)
        .collect();
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    for p in &products {
        assert!((p - mean).abs() / mean < 0.05, "{products:?}");
    }
}

#[test]
fn crossover_of_the_law_sits_at_two_rc() {
    let half = 0.5 * C * VDD * VDD;
    assert!(adiabatic_energy_law(&law(1.0)) > half);
    assert!((adiabatic_energy_law(&law(2.0)) - half).abs() <= 1e-12 * half);
    assert!(adiabatic_energy_law(&law(4.0)) < half);
}

#[test]
fn simulated_ramps_never_exceed_the_step_budget() {
    let half = 0.5 * C * VDD * VDD;
    let step = charge_experiment(&law(1.0), ChargeProfile::Step, None, &SimConfig::default()).unwrap();
    assert!((step.dissipated_energy - half).abs() / half < 0.02);
    let mut last = step.dissipated_energy;
    for k in [1.0, 2.0, 4.0, 8.0] {
        let e = ramp(k, None);
        assert!(e < last, "T = {k} RC: {e:e} >= {last:e}");
        last = e;
    }
}

#[test]
fn halving_dt_barely_moves_the_energies() {
    for (profile, k) in [
        (ChargeProfile::Step, 1.0),
        (ChargeProfile::Ramp, 100.0),
        (ChargeProfile::RampCycle, 100.0),
    ] {
        let cfg = SimConfig::default();
        let a = charge_experiment(&law(k), profile, Some(TAU / 50.0), &cfg).unwrap();
        let b = charge_experiment(&law(k), profile, Some(TAU / 100.0), &cfg).unwrap();
        for (x, y) in [
            (a.supply_energy, b.supply_energy),
            (a.dissipated_energy, b.dissipated_energy),
        ] {
            assert!((x - y).abs() / y.abs() < 0.005, "{profile:?}: {x:e} vs {y:e}");
        }
    }
}

#[test]
fn rc_fixtures_conserve_energy() {
    for (profile, k) in [
        (ChargeProfile::Step, 1.0),
        (ChargeProfile::Ramp, 1.0),
        (ChargeProfile::Ramp, 100.0),
        (ChargeProfile::RampCycle, 100.0),
    ] {
        let o = charge_experiment(&law(k), profile, None, &SimConfig::default()).unwrap();
        assert!(
            o.conservation_residual() <= 0.01,
            "{profile:?} {k}: {}",
            o.conservation_residual()
        );
    }
}

#[test]
fn mosfet_circuit_conserves_energy() {
    // Inverter driving a load capacitor through a full input swing.
    let p = SramCellParams::default();
    let mut n = Netlist::new("inverter load");
    n.add_model("nch", p.nmos.clone()).unwrap();
    n.add_model("pch", p.pmos.clone()).unwrap();
    n.add_vsource("VDD", "vdd", "0", SourceSpec::Dc(1.8)).unwrap();
    n.add_vsource(
        "VIN",
        "in",
        "0",
        SourceSpec::Pwl(vec![(0.0, 0.0), (1e-9, 0.0), (1.2e-9, 1.8), (3e-9, 1.8), (3.2e-9, 0.0)]),
    )
    .unwrap();
    n.add_mosfet("MP", "out", "in", "vdd", "vdd", "pch", 720e-9, 180e-9)
        .unwrap();
    n.add_mosfet("MN", "out", "in", "0", "0", "nch", 360e-9, 180e-9)
        .unwrap();
    n.add_resistor("RL", "out", "load", 500.0).unwrap();
    n.add_capacitor("CL", "load", "0", 20e-15).unwrap();
    let w = transient(&n, &SimConfig::default(), 1e-12, 5e-9, None).unwrap();
    let t1 = w.t_end();
    let diss = dissipated_energy(&w, &["VDD", "VIN"], &storage_elements(&n), 0.0, t1).unwrap();
    let elems = element_dissipation(&w, &n, 0.0, t1).unwrap();
    assert!((diss - elems).abs() / diss.abs() < 0.01, "{diss:e} vs {elems:e}");
}

#[test]
fn off_transistor_leakage_matches_closed_form() {
    let card = ModelCard {
        vt0: 0.5,
        leak_i0: 1e-12,
        leak_n: 1.5,
        ..ModelCard::nmos_default()
    };
    let mut n = Netlist::new("off nmos");
    n.add_model("nch", card).unwrap();
    n.add_vsource("VD", "d", "0", SourceSpec::Dc(1.8)).unwrap();
    n.add_mosfet("M1", "d", "0", "0", "0", "nch", 1e-6, 1e-6).unwrap();
    let w = transient(&n, &SimConfig::default(), 1e-11, 1e-9, None).unwrap();
    let leak = leakage_currents(&w, &["M1"], 0.0, 1e-9).unwrap()["M1"];
    let want = 1e-12 * (-0.5f64 / (1.5 * 0.02585)).exp() * (1.0 - (-1.8f64 / 0.02585).exp());
    assert!((leak - want).abs() / want < 0.01, "{leak:e} vs {want:e}");
}

#[test]
fn pure_level1_cell_leaks_only_through_gmin() {
    let p = SramCellParams {
        nmos: ModelCard::nmos_default(),
        pmos: ModelCard::pmos_default(),
        ..SramCellParams::default()
    };
    let t = Timing::default();
    let run = run_sequence(
        &p,
        &hold_sequence(true, 1, SupplyKind::conventional(&p), t),
        &SimConfig::default(),
    )
    .unwrap();
    let leak = leakage_currents(&run.waveform, &["MN3", "MN4"], 0.0, run.waveform.t_end()).unwrap();
    for (dev, i) in leak {
        assert!(i <= 1e-12 * p.vdd, "{dev}: {i:e}");
    }
}

#[test]
fn ramped_supply_barely_moves_grounded_side_leakage() {
    // Node A holds 0, so MN3 sees the bitline swing in both arms. Without
    // drain-induced barrier lowering the off current is flat in vds, and the
    // ramped arm only shifts it through small excursions of node A.
    let p = SramCellParams::default();
    let cfg = SimConfig::default();
    for ramp in [1e-9, 2e-9, 4e-9] {
        let t = Timing {
            ramp,
            ..Timing::default()
        };
        let leak = |supply: SupplyKind| {
            let run = run_sequence(&p, &hold_sequence(false, 1, supply, t), &cfg).unwrap();
            leakage_currents(&run.waveform, &["MN3", "MN4"], 0.0, run.waveform.t_end()).unwrap()
        };
        let conv = leak(SupplyKind::conventional(&p));
        let adia = leak(SupplyKind::adiabatic(&p, &t));
        let ratio = adia["MN3"] / conv["MN3"];
        assert!((0.9..1.1).contains(&ratio), "ramp {ramp:e}: {conv:?} vs {adia:?}");
    }
}
