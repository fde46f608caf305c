//! Input files: one `name = value` line per input or parameter override.
//! A piecewise-constant signal lists `time:value` changes separated by
//! commas, e.g. `x1 = 0:1, 4:0.5`. `#` starts a comment.

use std::collections::BTreeMap;

use ghasmt_core::sim::Input;

pub fn parse_inputs(text: &str) -> Result<BTreeMap<String, Input>, String> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| format!("line {}: {m}", n + 1);
        let (name, rhs) = line.split_once('=').ok_or_else(|| err("expected `name = value`"))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(err(&format!("bad name `{name}`")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err(&format!("bad number `{}`", s.trim())));
        let sig = if rhs.contains(':') {
            let steps = rhs
                .split(',')
                .map(|p| {
                    let (t, x) = p.split_once(':').ok_or_else(|| err("expected `time:value`"))?;
                    Ok((num(t)?, num(x)?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            Input::Piecewise(steps)
        } else {
            Input::Constant(num(rhs)?)
        };
        if out.insert(name.to_string(), sig).is_some() {
            return Err(err(&format!("`{name}` given twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_signals() {
        let m = parse_inputs("# fig 1\nx1 = 1\nx2 = 0:2, 4:0.5 # steps\n\n").unwrap();
        assert_eq!(m["x1"], Input::Constant(1.0));
        assert_eq!(m["x2"], Input::Piecewise(vec![(0.0, 2.0), (4.0, 0.5)]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_inputs("x1 = 1\nx1 = 2").unwrap_err(), "line 2: `x1` given twice");
        assert_eq!(parse_inputs("\nx = a").unwrap_err(), "line 2: bad number `a`");
        assert!(parse_inputs("x 1").is_err());
    }
}
