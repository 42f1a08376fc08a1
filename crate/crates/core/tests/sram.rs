use sramlab_core::sram::{
    compare_supplies, hold_sequence, read_sequence, run_experiment, run_sequence, write_sequence, ExperimentMode,
    ExperimentPlan, Op, SequencePlan, SramCellParams, SramError, SupplyKind, Timing,
};
use sramlab_core::SimConfig;

fn supplies(p: &SramCellParams, t: &Timing) -> [SupplyKind; 2] {
    [SupplyKind::conventional(p), SupplyKind::adiabatic(p, t)]
}

#[test]
fn writes_reach_the_rails_under_both_supplies() {
    let (p, t, cfg) = (SramCellParams::default(), Timing::default(), SimConfig::default());
    for supply in supplies(&p, &t) {
        for bit in [false, true] {
            let run = run_sequence(&p, &write_sequence(bit, supply.clone(), t), &cfg).unwrap();
            let end = run.outcomes.last().unwrap();
            let (hi, lo) = if bit { (end.v_a, end.v_b) } else { (end.v_b, end.v_a) };
            assert!(
                hi >= 0.9 * p.vdd && lo <= 0.1 * p.vdd,
                "{} bit {bit}: {end:?}",
                supply.label()
            );
            assert_eq!(run.final_state(), Some(bit));
        }
    }
}

#[test]
fn write_without_wordline_fails() {
    let (p, t) = (SramCellParams::default(), Timing::default());
    let mut plan = write_sequence(true, SupplyKind::conventional(&p), t);
    plan.wordline_enabled = false;
    let err = run_sequence(&p, &plan, &SimConfig::default()).unwrap_err();
    assert!(matches!(err, SramError::WriteFailed { slot: 0, bit: 1, .. }), "{err}");
}

#[test]
fn default_read_senses_and_preserves_both_values() {
    let (p, t, cfg) = (SramCellParams::default(), Timing::default(), SimConfig::default());
    for supply in supplies(&p, &t) {
        for stored in [false, true] {
            let run = run_sequence(&p, &read_sequence(stored, supply.clone(), t), &cfg).unwrap();
            let o = &run.outcomes[0];
            assert!(o.bitline_differential.unwrap().abs() >= 0.1, "{o:?}");
            assert_eq!(o.read_value, Some(stored));
            assert!(!o.upset);
            run.check_reads().unwrap();
            // The bitline on the stored-0 side is the one that discharges.
            let s = run.bench.slots[0].sense_time;
            let (bl, blb) = (
                run.waveform.value_at("v(BL)", s).unwrap(),
                run.waveform.value_at("v(BLB)", s).unwrap(),
            );
            if stored {
                assert!(
                    bl > 0.95 * p.vdd && blb < bl - 0.1,
                    "{} bl {bl} blb {blb}",
                    supply.label()
                );
            } else {
                assert!(
                    blb > 0.95 * p.vdd && bl < blb - 0.1,
                    "{} bl {bl} blb {blb}",
                    supply.label()
                );
            }
        }
    }
}

#[test]
fn read_without_wordline_leaves_bitlines_precharged() {
    let (p, t) = (SramCellParams::default(), Timing::default());
    let mut plan = read_sequence(true, SupplyKind::conventional(&p), t);
    plan.wordline_enabled = false;
    let run = run_sequence(&p, &plan, &SimConfig::default()).unwrap();
    let o = &run.outcomes[0];
    assert!(o.bitline_differential.unwrap().abs() < 1e-3, "{o:?}");
    assert_eq!(o.read_value, None);
}

#[test]
fn long_hold_keeps_the_state() {
    let (p, t, cfg) = (SramCellParams::default(), Timing::default(), SimConfig::default());
    let run = run_sequence(&p, &hold_sequence(true, 10, SupplyKind::conventional(&p), t), &cfg).unwrap();
    let a = run.waveform.node_voltage("A").unwrap();
    let droop = a.iter().fold(0.0f64, |m, v| m.max(p.vdd - v));
    assert!(droop <= 0.01 * p.vdd, "droop {droop}");
    for stored in [false, true] {
        let run = run_sequence(&p, &hold_sequence(stored, 3, SupplyKind::adiabatic(&p, &t), t), &cfg).unwrap();
        assert!(run.outcomes.iter().all(|o| o.stored == stored));
    }
}

#[test]
fn round_trips_agree_across_supplies() {
    let (p, t, cfg) = (SramCellParams::default(), Timing::default(), SimConfig::default());
    let ops = vec![
        Op::Write(false),
        Op::Read,
        Op::Write(true),
        Op::Read,
        Op::Hold,
        Op::Read,
    ];
    let outcomes: Vec<Vec<(bool, Option<bool>)>> = [false, true]
        .iter()
        .map(|&adiabatic| {
            let plan = SequencePlan::new(&p, true, ops.clone(), adiabatic, t);
            let run = run_sequence(&p, &plan, &cfg).unwrap();
            run.check_reads().unwrap();
            run.outcomes.iter().map(|o| (o.stored, o.read_value)).collect()
        })
        .collect();
    assert_eq!(outcomes[0], outcomes[1]);
    let reads: Vec<Option<bool>> = outcomes[0].iter().filter_map(|o| o.1.map(Some)).collect();
    assert_eq!(reads, [Some(false), Some(true), Some(true)]);
}

#[test]
fn adiabatic_arm_dissipates_less_in_every_mode() {
    let (p, cfg) = (SramCellParams::default(), SimConfig::default());
    for mode in ExperimentMode::ALL {
        let plan = ExperimentPlan::new(mode);
        assert!(plan.timing.ramp >= 50.0 * p.estimated_rc());
        let r = run_experiment(&plan, &p, &cfg).unwrap();
        assert!(r.reduction > 0.0, "{mode}: {}", r.reduction_percent());
        assert!(r.conventional.power.dissipated_energy > 0.0);
    }
}

#[test]
fn adiabatic_power_falls_as_the_ramp_lengthens() {
    let (p, cfg) = (SramCellParams::default(), SimConfig::default());
    let powers: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&k| {
            let mut plan = ExperimentPlan::new(ExperimentMode::Write0Write1);
            plan.timing.ramp *= k;
            run_experiment(&plan, &p, &cfg).unwrap().adiabatic.power.average_power
        })
        .collect();
    assert!(powers.windows(2).all(|w| w[1] < w[0]), "{powers:?}");
}

#[test]
fn self_comparison_shows_no_reduction() {
    let p = SramCellParams::default();
    let plan = ExperimentPlan::new(ExperimentMode::WriteHold);
    let conv = SupplyKind::conventional(&p);
    let r = compare_supplies(&plan, &p, conv.clone(), conv, &SimConfig::default()).unwrap();
    assert!(r.reduction.abs() < 1e-3, "{}", r.reduction);
}

#[test]
fn write_hold_reports_access_device_leakage() {
    let p = SramCellParams::default();
    let r = run_experiment(
        &ExperimentPlan::new(ExperimentMode::WriteHold),
        &p,
        &SimConfig::default(),
    )
    .unwrap();
    for arm in [&r.conventional, &r.adiabatic] {
        let leak = arm.hold_leakage.as_ref().unwrap();
        assert_eq!(leak.keys().collect::<Vec<_>>(), ["MN3", "MN4"]);
        assert!(leak.values().all(|i| i.is_finite() && *i >= 0.0));
    }
}
