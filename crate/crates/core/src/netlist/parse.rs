use super::number::parse_number;
use super::{valid_identifier, Analysis, Element, Netlist, NetlistError, NetlistErrorKind, SourceSpec};
use crate::devices::{ModelCard, MosKind};

type Result<T> = std::result::Result<T, NetlistError>;

struct Line {
    number: usize,
    tokens: Vec<String>,
}

/// Split into logical lines: drop comments and blanks, fold `+` continuations.
fn logical_lines(body: &[(usize, &str)]) -> Result<Vec<Line>> {
    let mut out: Vec<Line> = Vec::new();
    for &(number, raw) in body {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('+') {
            match out.last_mut() {
                Some(prev) => prev.tokens.extend(tokenize(rest)),
                None => {
                    return Err(NetlistError::at(
                        number,
                        NetlistErrorKind::Malformed("continuation line with nothing to continue".into()),
                    ))
                }
            }
            continue;
        }
        out.push(Line {
            number,
            tokens: tokenize(trimmed),
        });
    }
    Ok(out)
}

/// Whitespace split that treats `(`, `)` and `,` as separators and glues
/// `key = value` back into a single `key=value` token.
fn tokenize(text: &str) -> Vec<String> {
    let spaced: String = text
        .chars()
        .map(|c| if matches!(c, '(' | ')' | ',') { ' ' } else { c })
        .collect();
    let raw: Vec<&str> = spaced.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let tok = raw[i];
        if tok == "=" && !out.is_empty() && i + 1 < raw.len() {
            let last = out.pop().unwrap_or_default();
            out.push(format!("{last}={}", raw[i + 1]));
            i += 2;
        } else if tok.ends_with('=') && tok.len() > 1 && i + 1 < raw.len() {
            out.push(format!("{tok}{}", raw[i + 1]));
            i += 2;
        } else if tok.starts_with('=') && tok.len() > 1 && !out.is_empty() {
            let last = out.pop().unwrap_or_default();
            out.push(format!("{last}{tok}"));
            i += 1;
        } else {
            out.push(tok.to_string());
            i += 1;
        }
    }
    out
}

fn number(line: usize, token: &str) -> Result<f64> {
    parse_number(token).ok_or_else(|| NetlistError::at(line, NetlistErrorKind::MalformedNumber(token.to_string())))
}

fn malformed(line: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::at(line, NetlistErrorKind::Malformed(msg.into()))
}

fn with_line(line: usize, mut e: NetlistError) -> NetlistError {
    e.line = Some(line);
    e
}

fn split_kv(line: usize, token: &str) -> Result<(String, f64)> {
    let (k, v) = token
        .split_once('=')
        .ok_or_else(|| malformed(line, format!("expected key=value, found '{token}'")))?;
    Ok((k.to_ascii_lowercase(), number(line, v)?))
}

/// Parse netlist text. The first line is the title; the deck must end with `.end`.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let Some(&(_, title)) = lines.first() else {
        return Err(NetlistError::at(1, NetlistErrorKind::MissingEnd));
    };
    let mut netlist = Netlist::new(title.trim());

    let mut body = Vec::new();
    let mut saw_end = false;
    for &(number, raw) in &lines[1..] {
        if raw.trim().eq_ignore_ascii_case(".end") {
            saw_end = true;
            break;
        }
        body.push((number, raw));
    }
    if !saw_end {
        return Err(NetlistError::at(lines.len() + 1, NetlistErrorKind::MissingEnd));
    }

    let mut mosfet_lines = Vec::new();
    let mut dc_lines = Vec::new();
    for line in logical_lines(&body)? {
        let head = line.tokens[0].clone();
        if let Some(directive) = head.strip_prefix('.') {
            parse_directive(&mut netlist, &line, &directive.to_ascii_lowercase(), &mut dc_lines)?;
        } else {
            let is_mos = parse_element(&mut netlist, &line)?;
            if is_mos {
                mosfet_lines.push(line.number);
            }
        }
    }

    // Models may be declared after their first use, so resolve at the end.
    let mut mos_index = 0;
    for d in netlist.devices() {
        if let Element::Mosfet { model, .. } = &d.element {
            let line = mosfet_lines[mos_index];
            mos_index += 1;
            if netlist.model(model).is_none() {
                return Err(NetlistError::at(line, NetlistErrorKind::UndefinedModel(model.clone())));
            }
        }
    }
    for (line, source) in dc_lines {
        netlist.check_sweep_source(&source).map_err(|e| with_line(line, e))?;
    }
    Ok(netlist)
}

fn parse_element(netlist: &mut Netlist, line: &Line) -> Result<bool> {
    let n = line.number;
    let t = &line.tokens;
    let name = &t[0];
    let prefix = name.chars().next().unwrap_or(' ').to_ascii_uppercase();
    let need = |count: usize, usage: &str| -> Result<()> {
        if t.len() < count {
            Err(malformed(n, format!("expected `{usage}`")))
        } else {
            Ok(())
        }
    };
    let node = |netlist: &mut Netlist, s: &str| netlist.node(s).map_err(|e| with_line(n, e));

    let element = match prefix {
        'R' | 'C' => {
            need(4, "<name> <n1> <n2> <value>")?;
            if t.len() > 4 {
                return Err(malformed(n, format!("unexpected token '{}'", t[4])));
            }
            let nodes = [node(netlist, &t[1])?, node(netlist, &t[2])?];
            let value = number(n, &t[3])?;
            if prefix == 'R' {
                Element::Resistor { nodes, ohms: value }
            } else {
                Element::Capacitor { nodes, farads: value }
            }
        }
        'V' => {
            need(4, "<name> <n+> <n-> <source>")?;
            let nodes = [node(netlist, &t[1])?, node(netlist, &t[2])?];
            let spec = parse_source(n, &t[3..])?;
            Element::VoltageSource { nodes, spec }
        }
        'M' => {
            need(6, "<name> <d> <g> <s> <b> <model> W=<w> L=<l>")?;
            let nodes = [
                node(netlist, &t[1])?,
                node(netlist, &t[2])?,
                node(netlist, &t[3])?,
                node(netlist, &t[4])?,
            ];
            let model = t[5].to_ascii_lowercase();
            if !valid_identifier(&model) || model.contains('=') {
                return Err(malformed(n, format!("bad model name '{}'", t[5])));
            }
            let (mut w, mut l) = (None, None);
            for tok in &t[6..] {
                match split_kv(n, tok)? {
                    (k, v) if k == "w" => w = Some(v),
                    (k, v) if k == "l" => l = Some(v),
                    (k, _) => return Err(NetlistError::at(n, NetlistErrorKind::UnknownParameter(k))),
                }
            }
            let (Some(w), Some(l)) = (w, l) else {
                return Err(malformed(n, "MOSFET needs W= and L="));
            };
            Element::Mosfet { nodes, model, w, l }
        }
        other => return Err(NetlistError::at(n, NetlistErrorKind::UnknownDevicePrefix(other))),
    };
    let is_mos = matches!(element, Element::Mosfet { .. });
    netlist.add_device(name.clone(), element).map_err(|e| with_line(n, e))?;
    Ok(is_mos)
}

fn parse_source(n: usize, t: &[String]) -> Result<SourceSpec> {
    let kind = t[0].to_ascii_lowercase();
    let nums = |from: usize| -> Result<Vec<f64>> { t[from..].iter().map(|s| number(n, s)).collect() };
    let spec = match kind.as_str() {
        "dc" => {
            let v = nums(1)?;
            if v.len() != 1 {
                return Err(malformed(n, "DC takes one value"));
            }
            SourceSpec::Dc(v[0])
        }
        "pwl" => {
            let v = nums(1)?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(malformed(n, "PWL takes time/value pairs"));
            }
            SourceSpec::Pwl(v.chunks(2).map(|c| (c[0], c[1])).collect())
        }
        "ramp" => {
            let v = nums(1)?;
            if v.len() != 7 {
                return Err(malformed(n, "RAMP takes v_start v_end delay rise hold fall period"));
            }
            SourceSpec::Ramp {
                v_start: v[0],
                v_end: v[1],
                delay: v[2],
                rise: v[3],
                hold: v[4],
                fall: v[5],
                period: v[6],
            }
        }
        "sin" | "sine" => {
            let v = nums(1)?;
            if !(3..=4).contains(&v.len()) {
                return Err(malformed(n, "SIN takes offset amplitude freq [delay]"));
            }
            SourceSpec::Sine {
                offset: v[0],
                amplitude: v[1],
                freq: v[2],
                delay: v.get(3).copied().unwrap_or(0.0),
            }
        }
        _ => {
            if t.len() != 1 {
                return Err(malformed(n, format!("unknown source type '{}'", t[0])));
            }
            SourceSpec::Dc(number(n, &t[0])?)
        }
    };
    spec.validate()
        .map_err(|e| NetlistError::at(n, NetlistErrorKind::InvalidValue(e)))?;
    Ok(spec)
}

fn parse_directive(
    netlist: &mut Netlist,
    line: &Line,
    directive: &str,
    dc_lines: &mut Vec<(usize, String)>,
) -> Result<()> {
    let n = line.number;
    let t = &line.tokens;
    match directive {
        "model" => {
            if t.len() < 3 {
                return Err(malformed(n, "expected `.model <name> NMOS|PMOS key=value...`"));
            }
            let kind = match t[2].to_ascii_lowercase().as_str() {
                "nmos" => MosKind::Nmos,
                "pmos" => MosKind::Pmos,
                other => return Err(malformed(n, format!("unknown model type '{other}'"))),
            };
            let mut card = ModelCard::default_for(kind);
            let mut seen = [false; 3];
            for tok in &t[3..] {
                let (key, value) = split_kv(n, tok)?;
                match key.as_str() {
                    "vt0" | "vto" => {
                        card.vt0 = value.abs();
                        seen[0] = true;
                    }
                    "kp" => {
                        card.kp = value;
                        seen[1] = true;
                    }
                    "lambda" => {
                        card.lambda = value;
                        seen[2] = true;
                    }
                    "leak_i0" => card.leak_i0 = value,
                    "leak_n" => card.leak_n = value,
                    "cgs" => card.cgs_per_area = value,
                    "cgd" => card.cgd_per_area = value,
                    "temp_vt" => card.temp_vt = value,
                    _ => return Err(NetlistError::at(n, NetlistErrorKind::UnknownParameter(key))),
                }
            }
            if let Some(missing) = ["vt0", "kp", "lambda"].iter().zip(seen).find(|(_, s)| !s) {
                return Err(malformed(n, format!(".model requires {}", missing.0)));
            }
            netlist.add_model(&t[1], card).map_err(|e| with_line(n, e))
        }
        "op" => {
            if t.len() != 1 {
                return Err(malformed(n, ".op takes no arguments"));
            }
            netlist.add_analysis(Analysis::Op).map_err(|e| with_line(n, e))
        }
        "dc" => {
            if t.len() != 5 {
                return Err(malformed(n, "expected `.dc <source> <start> <stop> <step>`"));
            }
            let analysis = Analysis::Dc {
                source: t[1].clone(),
                start: number(n, &t[2])?,
                stop: number(n, &t[3])?,
                step: number(n, &t[4])?,
            };
            dc_lines.push((n, t[1].clone()));
            netlist.add_analysis(analysis).map_err(|e| with_line(n, e))
        }
        "tran" => {
            if t.len() != 3 {
                return Err(malformed(n, "expected `.tran <dt> <tstop>`"));
            }
            let analysis = Analysis::Tran {
                dt: number(n, &t[1])?,
                tstop: number(n, &t[2])?,
            };
            netlist.add_analysis(analysis).map_err(|e| with_line(n, e))
        }
        other => Err(NetlistError::at(
            n,
            NetlistErrorKind::UnknownDirective(format!(".{other}")),
        )),
    }
}
