use std::fmt::Write as _;

use super::number::format_number as num;
use super::{Analysis, Element, Netlist, SourceSpec};
use crate::devices::MosKind;

/// Render a netlist in the canonical dialect accepted by [`super::parse_netlist`].
pub fn serialize_netlist(n: &Netlist) -> String {
    let mut out = String::new();
    out.push_str(&n.title);
    out.push('\n');
    for d in n.devices() {
        let node = |i: usize| n.node_name(d.element.nodes()[i]);
        match &d.element {
            Element::Resistor { ohms, .. } => {
                let _ = writeln!(out, "{} {} {} {}", d.name, node(0), node(1), num(*ohms));
            }
            Element::Capacitor { farads, .. } => {
                let _ = writeln!(out, "{} {} {} {}", d.name, node(0), node(1), num(*farads));
            }
            Element::VoltageSource { spec, .. } => {
                let _ = writeln!(out, "{} {} {} {}", d.name, node(0), node(1), source_text(spec));
            }
            Element::Mosfet { model, w, l, .. } => {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {} W={} L={}",
                    d.name,
                    node(0),
                    node(1),
                    node(2),
                    node(3),
                    model,
                    num(*w),
                    num(*l)
                );
            }
        }
    }
    for (name, card) in n.models() {
        let kind = match card.kind {
            MosKind::Nmos => "NMOS",
            MosKind::Pmos => "PMOS",
        };
        let _ = writeln!(
            out,
            ".model {name} {kind} vt0={} kp={} lambda={} leak_i0={} leak_n={} cgs={} cgd={} temp_vt={}",
            num(card.vt0),
            num(card.kp),
            num(card.lambda),
            num(card.leak_i0),
            num(card.leak_n),
            num(card.cgs_per_area),
            num(card.cgd_per_area),
            num(card.temp_vt),
        );
    }
    for a in n.analyses() {
        let _ = match a {
            Analysis::Op => writeln!(out, ".op"),
            Analysis::Dc {
                source,
                start,
                stop,
                step,
            } => writeln!(out, ".dc {source} {} {} {}", num(*start), num(*stop), num(*step)),
            Analysis::Tran { dt, tstop } => writeln!(out, ".tran {} {}", num(*dt), num(*tstop)),
        };
    }
    out.push_str(".end");
    out
}

fn source_text(spec: &SourceSpec) -> String {
    match spec {
        SourceSpec::Dc(v) => format!("DC {}", num(*v)),
        SourceSpec::Pwl(points) => {
            let body: Vec<String> = points.iter().map(|(t, v)| format!("{} {}", num(*t), num(*v))).collect();
            format!("PWL({})", body.join(" "))
        }
        SourceSpec::Ramp {
            v_start,
            v_end,
            delay,
            rise,
            hold,
            fall,
            period,
        } => format!(
            "RAMP({} {} {} {} {} {} {})",
            num(*v_start),
            num(*v_end),
            num(*delay),
            num(*rise),
            num(*hold),
            num(*fall),
            num(*period)
        ),
        SourceSpec::Sine {
            offset,
            amplitude,
            freq,
            delay,
        } => format!(
            "SIN({} {} {} {})",
            num(*offset),
            num(*amplitude),
            num(*freq),
            num(*delay)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    #[test]
    fn empty_netlist_is_title_and_end() {
        assert_eq!(serialize_netlist(&Netlist::new("title")), "title\n.end");
    }

    #[test]
    fn one_resistor_one_line() {
        let n = parse_netlist("t\nR1 1 0 1k\n.end").unwrap();
        let text = serialize_netlist(&n);
        assert_eq!(text.lines().filter(|l| l.starts_with('R')).count(), 1);
        assert_eq!(parse_netlist(&text).unwrap(), n);
    }
}
