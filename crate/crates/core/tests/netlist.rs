mod common;

use proptest::prelude::*;
use sramlab_core::netlist::{parse_netlist, serialize_netlist, NetlistErrorKind};
use sramlab_core::sram::{build_6t_cell, SramCellParams};
use sramlab_core::SourceSpec;

/// Deck text, expected line, and a check on the error kind.
type ErrorCase = (&'static str, usize, fn(&NetlistErrorKind) -> bool);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_then_parse_is_identity(n in common::arb_netlist()) {
        let text = serialize_netlist(&n);
        let back = parse_netlist(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &n);
        prop_assert_eq!(serialize_netlist(&back), text);
    }

    #[test]
    fn parser_never_panics(text in "[ -~\n]{0,200}") {
        match parse_netlist(&text) {
            Ok(_) => {}
            Err(e) => prop_assert!(e.line.is_some(), "{e}"),
        }
    }

    #[test]
    fn mutated_decks_fail_with_line_numbers(n in common::arb_netlist(), cut in any::<prop::sample::Index>()) {
        let text = serialize_netlist(&n);
        let lines: Vec<&str> = text.lines().collect();
        let keep = cut.index(lines.len().max(1));
        let truncated = lines[..keep].join("\n");
        if let Err(e) = parse_netlist(&truncated) {
            prop_assert!(e.line.is_some());
        }
    }
}

#[test]
fn sram_cell_round_trips() {
    let mut n = build_6t_cell(&SramCellParams::default()).unwrap();
    n.add_vsource("VRAIL", "VDD", "0", SourceSpec::Dc(1.8)).unwrap();
    let text = serialize_netlist(&n);
    let back = parse_netlist(&text).unwrap();
    assert_eq!(back.mosfet_count(), 6);
    assert_eq!(back.models().len(), 2);
    assert_eq!(back, n);
}

#[test]
fn hand_written_cell_deck() {
    let deck = "6t cell
* cross-coupled pair
MP1 A B VDD VDD pch W=360n L=180n
MN1 A B 0 0 nch W=720n L=180n
MP2 B A VDD VDD pch W=360n L=180n
MN2 B A 0 0 nch W=720n L=180n
MN3 BL WL A 0 nch W=360n
+ L=180n
MN4 BLB WL B 0 nch W=360n L=180n
VDD VDD 0 DC 1.8
.model nch NMOS vt0=0.45 kp=170u lambda=0.05
.model pch PMOS vt0=-0.45 kp=60u lambda=0.05
.op
.end
";
    let n = parse_netlist(deck).unwrap();
    assert_eq!(n.mosfet_count(), 6);
    assert_eq!(n.devices().len(), 7);
    assert_eq!(parse_netlist(&serialize_netlist(&n)).unwrap(), n);
}

#[test]
fn every_documented_error_names_its_line() {
    let cases: [ErrorCase; 5] = [
        ("t\nR1 1 0 1k\nQ1 1 0 1k\n.end", 3, |k| {
            matches!(k, NetlistErrorKind::UnknownDevicePrefix('Q'))
        }),
        ("t\nM1 d g 0 0 nope W=1u L=1u\n.end", 2, |k| {
            matches!(k, NetlistErrorKind::UndefinedModel(_))
        }),
        ("t\nR1 1 0 1k\nR1 2 0 1k\n.end", 3, |k| {
            matches!(k, NetlistErrorKind::DuplicateDeviceName(_))
        }),
        ("t\n* c\nC1 1 0 1.2.3p\n.end", 3, |k| {
            matches!(k, NetlistErrorKind::MalformedNumber(_))
        }),
        ("t\nR1 1 0 1k\n", 3, |k| matches!(k, NetlistErrorKind::MissingEnd)),
    ];
    for (text, line, check) in cases {
        let e = parse_netlist(text).unwrap_err();
        assert_eq!(e.line, Some(line), "{text:?}: {e}");
        assert!(check(&e.kind), "{text:?}: {e}");
        assert!(e.to_string().starts_with(&format!("line {line}:")));
    }
}
