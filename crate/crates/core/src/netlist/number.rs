//! SPICE numeric literals: `1k`, `100f`, `1meg`, `2.5e-3`, `10pF`.

/// Scale suffixes, longest first so `meg` wins over `m`.
/// Values are decimal exponents so `170u` decodes to the same double as `170e-6`.
const SUFFIXES: &[(&str, i32)] = &[
    ("meg", 6),
    ("f", -15),
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("m", -3),
    ("k", 3),
    ("g", 9),
    ("t", 12),
];

/// Decode a numeric field. Trailing letters after the scale suffix are
/// treated as units and ignored (`10pF`), anything else is an error.
pub fn parse_number(token: &str) -> Option<f64> {
    let bytes = token.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let mantissa_start = i;
    let mut digits = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
        digits += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
    }
    if digits == 0 || i == mantissa_start {
        return None;
    }
    let mantissa_end = i;
    let mut exponent: i32 = 0;
    // Exponent only if it is followed by digits; otherwise `e` is a unit letter.
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits_start {
            exponent = token[i + 1..j].parse().ok()?;
            i = j;
        }
    }
    let rest = token[i..].to_ascii_lowercase();
    if !rest.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let scale = SUFFIXES
        .iter()
        .find(|(s, _)| rest.starts_with(s))
        .map_or(0, |&(_, scale)| scale);
    let v: f64 = format!("{}e{}", &token[..mantissa_end], exponent.checked_add(scale)?)
        .parse()
        .ok()?;
    v.is_finite().then_some(v)
}

/// Canonical text for a number: shortest exponent form that parses back exactly.
pub fn format_number(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_table() {
        let cases = [
            ("1k", 1e3),
            ("100f", 1e-13),
            ("1meg", 1e6),
            ("1MEG", 1e6),
            ("1m", 1e-3),
            ("2.5u", 2.5e-6),
            ("10n", 1e-8),
            ("3p", 3e-12),
            ("1g", 1e9),
            ("1.8", 1.8),
            ("-0.5", -0.5),
            ("2.5e-3", 2.5e-3),
            ("1E3", 1e3),
            ("10pF", 1e-11),
            ("1kohm", 1e3),
            (".5", 0.5),
            ("5.", 5.0),
        ];
        for (text, want) in cases {
            let got = parse_number(text).unwrap_or_else(|| panic!("{text} failed"));
            assert!((got - want).abs() <= 1e-12 * want.abs(), "{text}: {got} vs {want}");
        }
    }

    #[test]
    fn malformed() {
        for bad in ["", "k", "abc", "1.2.3", "1k5", "--1", "1e+", "."] {
            if bad == "1e+" {
                // `1` followed by unit letters `e+`; the `+` makes it malformed.
                assert!(parse_number(bad).is_none());
                continue;
            }
            assert!(parse_number(bad).is_none(), "{bad} should be rejected");
        }
    }

    #[test]
    fn canonical_format_round_trips() {
        for v in [1e3, 1e-13, 0.1, 1.8, 170e-6, 1.2345678901234567e-13, -3.0, 0.0] {
            assert_eq!(parse_number(&format_number(v)), Some(v));
        }
    }
}
