//! Grid specifications: `8,16,32`, `2^3..2^12` (dyadic) or `1..10` (unit step).
//! Plain numbers may use exponent notation (`1e3`).

use crate::error::CliError;

fn bad(spec: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Grid(format!("{spec:?}: {why}"))
}

enum Point {
    Plain(usize),
    Power(u32),
}

fn point(spec: &str, s: &str) -> Result<Point, CliError> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let e: u32 = e.parse().map_err(|_| bad(spec, format!("bad exponent in {s:?}")))?;
        if e > 40 {
            return Err(bad(spec, "exponent above 40"));
        }
        return Ok(Point::Power(e));
    }
    let v: f64 = s.parse().map_err(|_| bad(spec, format!("{s:?} is not a number")))?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > 1e12 {
        return Err(bad(spec, format!("{s:?} is not a positive integer")));
    }
    Ok(Point::Plain(v as usize))
}

fn value(p: &Point) -> usize {
    match p {
        Point::Plain(v) => *v,
        Point::Power(e) => 1usize << e,
    }
}

/// Strictly increasing list of positive sizes.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => match (point(spec, a)?, point(spec, b)?) {
                (Point::Power(a), Point::Power(b)) => out.extend((a..=b).map(|e| 1usize << e)),
                (a, b) => out.extend(value(&a)..=value(&b)),
            },
            None => out.push(value(&point(spec, item)?)),
        }
    }
    if out.is_empty() {
        return Err(bad(spec, "empty grid"));
    }
    if out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(spec, "grid must be strictly increasing"));
    }
    Ok(out)
}
