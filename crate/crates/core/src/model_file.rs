//! Plain-text model definitions.
//!
//! ```text
//! # two-state chain
//! [states]
//! a b
//! [kernel]
//! 0.7 0.3
//! 0.3 0.7
//! [g]
//! 1 -1
//! ```
//!
//! Values are separated by whitespace or commas and `#` starts a comment.
//! `[pi]` may be given; otherwise the stationary law is computed. An
//! observable with non-zero `π`-mean is centered and a warning is recorded.

use std::path::Path;

use crate::chain::MarkovModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub model: MarkovModel,
    /// Non-fatal notes, such as automatic centering of `g`.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    States,
    Kernel,
    Pi,
    G,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "states" => Some(Section::States),
            "kernel" => Some(Section::Kernel),
            "pi" => Some(Section::Pi),
            "g" => Some(Section::G),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Section::States => "states",
            Section::Kernel => "kernel",
            Section::Pi => "pi",
            Section::G => "g",
        }
    }
}

#[derive(Default)]
struct Raw {
    states: Option<(usize, Vec<String>)>,
    kernel: Option<(usize, Vec<Vec<f64>>)>,
    pi: Option<(usize, Vec<f64>)>,
    g: Option<(usize, Vec<f64>)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelParse { line, message: message.into() }
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

fn numbers(line_no: usize, text: &str) -> Result<Vec<f64>> {
    tokens(text)
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line_no, format!("{t:?} is not a number"))))
        .collect()
}

pub fn parse_model(text: &str) -> Result<ParsedModel> {
    let mut raw = Raw::default();
    let mut current: Option<Section> = None;
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| parse_err(line_no, "unterminated section header"))?;
            let section = Section::parse(name).ok_or_else(|| parse_err(line_no, format!("unknown section [{name}]")))?;
            let seen = match section {
                Section::States => raw.states.is_some(),
                Section::Kernel => raw.kernel.is_some(),
                Section::Pi => raw.pi.is_some(),
                Section::G => raw.g.is_some(),
            };
            if seen {
                return Err(parse_err(line_no, format!("duplicate section [{}]", section.name())));
            }
            match section {
                Section::States => raw.states = Some((line_no, Vec::new())),
                Section::Kernel => raw.kernel = Some((line_no, Vec::new())),
                Section::Pi => raw.pi = Some((line_no, Vec::new())),
                Section::G => raw.g = Some((line_no, Vec::new())),
            }
            current = Some(section);
            continue;
        }
        match current {
            None => return Err(parse_err(line_no, "data before the first section header")),
            Some(Section::States) => {
                let names = &mut raw.states.as_mut().expect("section opened").1;
                names.extend(tokens(content).map(str::to_string));
            }
            Some(Section::Kernel) => {
                let row = numbers(line_no, content)?;
                raw.kernel.as_mut().expect("section opened").1.push(row);
            }
            Some(Section::Pi) => raw.pi.as_mut().expect("section opened").1.extend(numbers(line_no, content)?),
            Some(Section::G) => raw.g.as_mut().expect("section opened").1.extend(numbers(line_no, content)?),
        }
    }
    let eof = last_line.max(1);

    let (kernel_line, rows) = raw.kernel.ok_or_else(|| parse_err(eof, "missing [kernel] section"))?;
    if rows.is_empty() {
        return Err(parse_err(kernel_line, "[kernel] has no rows"));
    }
    let s = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != s) {
        return Err(parse_err(kernel_line + 1 + bad, format!("kernel row {} has {} entries, expected {s}", bad + 1, rows[bad].len())));
    }
    let states = match raw.states {
        Some((line, names)) => {
            if names.len() != s {
                return Err(parse_err(line, format!("{} state names for a {s}x{s} kernel", names.len())));
            }
            names
        }
        None => (0..s).map(|i| i.to_string()).collect(),
    };
    let pi = match raw.pi {
        Some((line, p)) if p.len() != s => return Err(parse_err(line, format!("[pi] has {} entries, expected {s}", p.len()))),
        Some((_, p)) => Some(p),
        None => None,
    };
    let (g_line, g) = raw.g.ok_or_else(|| parse_err(eof, "missing [g] section"))?;
    if g.len() != s {
        return Err(parse_err(g_line, format!("[g] has {} entries, expected {s}", g.len())));
    }

    let wrap = |e: Error| parse_err(kernel_line, e.to_string());
    // an already-centered g is kept bit for bit
    let mut warnings = Vec::new();
    let model = match MarkovModel::new(states.clone(), &rows, pi.clone(), g.clone()) {
        Ok(m) => m,
        Err(Error::NotCentered { .. }) => {
            let (m, mean) = MarkovModel::with_raw_observable(states, &rows, pi, g).map_err(wrap)?;
            warnings.push(format!("g had stationary mean {mean:e}; it was centered"));
            m
        }
        Err(e) => return Err(wrap(e)),
    };
    Ok(ParsedModel { model, warnings })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ParsedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

/// Inverse of [`parse_model`] up to float formatting.
pub fn write_model(model: &MarkovModel) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    let mut out = String::from("[states]\n");
    out.push_str(&model.states().join(" "));
    out.push_str("\n[kernel]\n");
    for x in 0..model.num_states() {
        out.push_str(&join(model.kernel_row(x)));
        out.push('\n');
    }
    out.push_str("[pi]\n");
    out.push_str(&join(model.pi()));
    out.push_str("\n[g]\n");
    out.push_str(&join(model.g_values()));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const TWO: &str = "# comment\n[states]\na b\n[kernel]\n0.7, 0.3\n0.3 0.7  # trailing\n[g]\n-1 1\n";

    #[test]
    fn parses_two_state() {
        let p = parse_model(TWO).unwrap();
        assert!(p.warnings.is_empty());
        assert_eq!(p.model.states(), ["a", "b"]);
        assert!((p.model.pi()[0] - 0.5).abs() < 1e-14);
        let preset = presets::two_state(0.3, 0.3);
        assert_eq!(p.model.kernel_rows(), preset.kernel_rows());
        assert_eq!(p.model.g_values(), preset.g_values());
    }

    #[test]
    fn centers_with_warning() {
        let p = parse_model("[kernel]\n0.5 0.5\n0.5 0.5\n[g]\n2 0\n").unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.model.g_values(), [1.0, -1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[states]\na b\n[g]\n1 -1\n", 4, "missing [kernel]"),
            ("[kernel]\n0.5 0.5\n0.5\n[g]\n1 -1\n", 3, "row 2"),
            ("[kernel]\n0.5 x\n", 2, "not a number"),
            ("0.5\n", 1, "before the first"),
            ("[kernel]\n1 0\n0 1\n[kernel]\n", 4, "duplicate"),
            ("[kernel]\n0.5 0.5\n0.5 0.5\n[pi]\n1\n[g]\n1 -1\n", 4, "[pi]"),
            ("[nope]\n", 1, "unknown section"),
            ("[kernel]\n0.5 0.6\n0.5 0.5\n[g]\n1 -1\n", 1, "row-stochastic"),
        ];
        for (text, line, needle) in cases {
            match parse_model(text) {
                Err(Error::ModelParse { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        for m in [presets::three_state(), presets::coboundary(), presets::sparse_ring(5)] {
            let back = parse_model(&write_model(&m)).unwrap();
            assert!(back.warnings.is_empty());
            assert_eq!(back.model.hash(), m.hash());
        }
    }
}
