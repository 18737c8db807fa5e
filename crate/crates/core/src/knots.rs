//! Built-in diagrams and torus knots.

use crate::diagram::{braid_to_pd, parse_pd, BraidWord, PlanarDiagram};
use crate::error::{Error, Result};

const DATA: &str = include_str!("../data/knots.txt");

/// `(name, code)` pairs of the built-in table.
pub fn table() -> Vec<(&'static str, &'static str)> {
    DATA.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once(char::is_whitespace))
        .map(|(n, c)| (n, c.trim()))
        .collect()
}

pub fn names() -> Vec<&'static str> {
    table().into_iter().map(|e| e.0).collect()
}

/// Closure of `(s1 s2 ... s_{p-1})^q` on `p` strands.
pub fn torus_knot(p: u32, q: u32) -> Result<PlanarDiagram> {
    if p < 2 {
        return Err(Error::Argument("torus knot needs at least two strands".into()));
    }
    let letters = (0..q).flat_map(|_| 1..p as i32).collect();
    braid_to_pd(&BraidWord { strand_count: p, letters })
}

pub fn parse_diagram(text: &str) -> Result<PlanarDiagram> {
    let t = text.trim();
    if t.starts_with("BR") {
        braid_to_pd(&crate::diagram::parse_braid(t)?)
    } else {
        parse_pd(t)
    }
}

/// A table entry, or `T(p,q)` / `TorusKnot[p,q]`.
pub fn builtin(name: &str) -> Result<PlanarDiagram> {
    if let Some((_, code)) = table().into_iter().find(|e| e.0 == name) {
        return parse_diagram(code);
    }
    let inner = name
        .strip_prefix("T(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| name.strip_prefix("TorusKnot[").and_then(|r| r.strip_suffix(']')));
    if let Some(inner) = inner {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if let [a, b] = parts[..] {
            if let (Ok(a), Ok(b)) = (a.parse::<u32>(), b.parse::<u32>()) {
                let (p, q) = (a.min(b), a.max(b));
                return torus_knot(p, q);
            }
        }
    }
    Err(Error::Argument(format!("unknown knot '{name}'")))
}
