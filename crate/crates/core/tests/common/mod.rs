//! Generators and fixtures shared by the integration tests and the
//! acceptance harness.

#![allow(dead_code)]

use proptest::prelude::*;
use sramlab_core::devices::{ModelCard, MosKind};
use sramlab_core::netlist::{Analysis, Netlist, SourceSpec};

const NODES: [&str; 7] = ["0", "1", "2", "out", "in", "VDD", "n_7"];

/// Log-uniform positive value in `[10^lo, 10^hi]`.
fn positive(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|e: f64| 10f64.powf(e))
}

fn source_spec() -> impl Strategy<Value = SourceSpec> {
    prop_oneof![
        (-5.0..5.0f64).prop_map(SourceSpec::Dc),
        prop::collection::vec((positive(-12.0, -8.0), -2.0..2.0f64), 1..5).prop_map(|steps| {
            let mut t = 0.0;
            SourceSpec::Pwl(
                steps
                    .into_iter()
                    .map(|(dt, v)| {
                        let p = (t, v);
                        t += dt;
                        p
                    })
                    .collect(),
            )
        }),
        (
            -1.0..1.0f64,
            0.5..2.0f64,
            positive(-10.0, -8.0),
            positive(-10.0, -8.0),
            positive(-10.0, -8.0),
            positive(-10.0, -8.0),
            positive(-10.0, -8.0)
        )
            .prop_map(|(v_start, v_end, delay, rise, hold, fall, slack)| SourceSpec::Ramp {
                v_start,
                v_end,
                delay,
                rise,
                hold,
                fall,
                period: rise + hold + fall + slack,
            }),
        (-1.0..1.0f64, 0.0..2.0f64, positive(6.0, 10.0), 0.0..1e-8f64).prop_map(|(offset, amplitude, freq, delay)| {
            SourceSpec::Sine {
                offset,
                amplitude,
                freq,
                delay,
            }
        }),
    ]
}

#[derive(Debug, Clone)]
enum Part {
    R(usize, usize, f64),
    C(usize, usize, f64),
    V(usize, usize, SourceSpec),
    M([usize; 4], bool, f64, f64),
}

fn part() -> impl Strategy<Value = Part> {
    let node = || 0..NODES.len();
    prop_oneof![
        (node(), node(), positive(-1.0, 7.0)).prop_map(|(a, b, v)| Part::R(a, b, v)),
        (node(), node(), positive(-16.0, -9.0)).prop_map(|(a, b, v)| Part::C(a, b, v)),
        (node(), node(), source_spec()).prop_map(|(a, b, s)| Part::V(a, b, s)),
        (
            [node(), node(), node(), node()],
            any::<bool>(),
            positive(-7.0, -5.0),
            positive(-7.5, -6.0)
        )
            .prop_map(|(n, p, w, l)| Part::M(n, p, w, l)),
    ]
}

fn card(kind: MosKind) -> impl Strategy<Value = ModelCard> {
    (
        0.2..0.8f64,
        positive(-5.0, -3.5),
        0.0..0.2f64,
        0.0..1e-6f64,
        1.0..2.0f64,
    )
        .prop_map(move |(vt0, kp, lambda, leak_i0, leak_n)| ModelCard {
            vt0,
            kp,
            lambda,
            leak_i0,
            leak_n,
            ..ModelCard::default_for(kind)
        })
}

/// Valid netlists over every element, source and analysis kind.
pub fn arb_netlist() -> impl Strategy<Value = Netlist> {
    (
        "[A-Za-z][A-Za-z0-9 _-]{0,20}[A-Za-z0-9]",
        prop::collection::vec(part(), 0..10),
        card(MosKind::Nmos),
        card(MosKind::Pmos),
        any::<bool>(),
        prop::option::of((positive(-12.0, -10.0), 1usize..100)),
        any::<prop::sample::Index>(),
        (-1.0..0.0f64, 0.5..2.0f64, positive(-3.0, -1.0)),
    )
        .prop_map(|(title, parts, nch, pch, op, tran, pick, (start, stop, step))| {
            let mut n = Netlist::new(title.trim());
            let mut sources = Vec::new();
            let mut has_mos = false;
            for (i, p) in parts.into_iter().enumerate() {
                match p {
                    Part::R(a, b, v) => n.add_resistor(&format!("R{i}"), NODES[a], NODES[b], v),
                    Part::C(a, b, v) => n.add_capacitor(&format!("C{i}"), NODES[a], NODES[b], v),
                    Part::V(a, b, s) => {
                        sources.push(format!("V{i}"));
                        n.add_vsource(&format!("V{i}"), NODES[a], NODES[b], s)
                    }
                    Part::M(t, pmos, w, l) => {
                        has_mos = true;
                        let model = if pmos { "pch" } else { "nch" };
                        n.add_mosfet(
                            &format!("M{i}"),
                            NODES[t[0]],
                            NODES[t[1]],
                            NODES[t[2]],
                            NODES[t[3]],
                            model,
                            w,
                            l,
                        )
                    }
                }
                .expect("generated element is valid");
            }
            if has_mos {
                n.add_model("nch", nch).expect("valid card");
                n.add_model("pch", pch).expect("valid card");
            }
            if op {
                n.add_analysis(Analysis::Op).expect("valid");
            }
            if let Some((dt, k)) = tran {
                n.add_analysis(Analysis::Tran {
                    dt,
                    tstop: dt * k as f64,
                })
                .expect("valid");
            }
            if !sources.is_empty() {
                let source = pick.get(&sources).clone();
                n.add_analysis(Analysis::Dc {
                    source,
                    start,
                    stop,
                    step,
                })
                .expect("valid");
            }
            n
        })
}

/// A MOSFET bias point away from the region boundaries, where the drain
/// current is smooth enough for central differences.
#[derive(Debug, Clone)]
pub struct BiasPoint {
    pub card: ModelCard,
    pub w: f64,
    pub l: f64,
    pub vgs: f64,
    pub vds: f64,
}

pub fn arb_bias_point() -> impl Strategy<Value = BiasPoint> {
    (
        prop_oneof![card(MosKind::Nmos), card(MosKind::Pmos)],
        positive(-7.0, -5.0),
        positive(-7.5, -6.0),
        -2.5..2.5f64,
        -2.5..2.5f64,
    )
        .prop_map(|(card, w, l, vgs, vds)| BiasPoint { card, w, l, vgs, vds })
        .prop_filter("too close to a region boundary", |b| {
            let p = match b.card.kind {
                MosKind::Nmos => 1.0,
                MosKind::Pmos => -1.0,
            };
            let (vgs, vds) = (p * b.vgs, p * b.vds);
            // Normal orientation after a possible source/drain swap.
            let (vgs, vds) = if vds >= 0.0 { (vgs, vds) } else { (vgs - vds, -vds) };
            let vov = vgs - b.card.vt0;
            let gap = 1e-3;
            vov.abs() > gap && (vds - vov).abs() > gap && vds.abs() > gap
        })
}

/// Relative mismatch between the analytic `(gm, gds)` and central
/// differences with step `h`.
///
/// Conductances below `floor` siemens, or below `1e-5 * |ids|` per volt,
/// are compared absolutely against that level: double-precision differences
/// of the current resolve only about `1e-16 * |ids| / h`.
pub fn derivative_mismatch(b: &BiasPoint, h: f64, floor: f64) -> (f64, f64) {
    use sramlab_core::devices::{mosfet_ids, mosfet_stamp};
    let ids = |vgs: f64, vds: f64| mosfet_ids(&b.card, b.w, b.l, vgs, vds);
    let e = mosfet_stamp(&b.card, b.w, b.l, [b.vds, b.vgs, 0.0, 0.0]);
    let gm_fd = (ids(b.vgs + h, b.vds) - ids(b.vgs - h, b.vds)) / (2.0 * h);
    let gds_fd = (ids(b.vgs, b.vds + h) - ids(b.vgs, b.vds - h)) / (2.0 * h);
    let floor = floor.max(1e-5 * e.ids.abs());
    let rel = |a: f64, f: f64| (a - f).abs() / a.abs().max(f.abs()).max(floor);
    (rel(e.gm, gm_fd), rel(e.gds, gds_fd))
}

/// Series RC driven by `spec` on node `in`, capacitor on node `out`.
pub fn rc_fixture(r: f64, c: f64, spec: SourceSpec) -> Netlist {
    let mut n = Netlist::new("rc");
    n.add_vsource("V1", "in", "0", spec).unwrap();
    n.add_resistor("R1", "in", "out", r).unwrap();
    n.add_capacitor("C1", "out", "0", c).unwrap();
    n
}

/// Smooth logistic inverter curve on `[0, vdd]`.
pub fn logistic(vdd: f64, trip: f64, gain: f64, n: usize) -> sramlab_core::snm::Curve {
    sramlab_core::snm::Curve::from_fn(0.0, vdd, n, |x| vdd / (1.0 + ((x - trip) * gain).exp())).unwrap()
}
