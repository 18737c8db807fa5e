use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// `coeff * H^power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub coeff: i64,
    pub power: u32,
}

impl Monomial {
    pub fn new(coeff: i64, power: u32) -> Self {
        Monomial { coeff, power }
    }

    pub fn parse(s: &str) -> Result<Monomial> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("bad monomial '{s}'"));
        let Some(pos) = s.find('H') else {
            return s.parse().map(|c| Monomial::new(c, 0)).map_err(|_| bad());
        };
        let coeff = match &s[..pos] {
            "" | "+" => 1,
            "-" => -1,
            c => c.trim_end_matches('*').parse().map_err(|_| bad())?,
        };
        let power = match &s[pos + 1..] {
            "" => 1,
            p => p.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?,
        };
        Ok(Monomial::new(coeff, power))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, k) = (self.coeff, self.power);
        if c == 0 || k == 0 {
            return write!(f, "{c}");
        }
        match c {
            1 => {}
            -1 => write!(f, "-")?,
            _ => write!(f, "{c}")?,
        }
        if k == 1 {
            write!(f, "H")
        } else {
            write!(f, "H^{k}")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    pub degree: i32,
    pub q: i32,
}

/// A complex of special lines over `Z[H]` with monomial differentials.
/// Entries are keyed by (source, target).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UniversalComplex {
    pub lines: Vec<Line>,
    pub entries: BTreeMap<(usize, usize), Monomial>,
}

pub const SCHEMA: &str = "khuniv.universal/1";

impl UniversalComplex {
    pub fn add_line(&mut self, degree: i32, q: i32) -> usize {
        self.lines.push(Line { degree, q });
        self.lines.len() - 1
    }

    pub fn set(&mut self, from: usize, to: usize, m: Monomial) {
        if m.coeff == 0 {
            self.entries.remove(&(from, to));
        } else {
            self.entries.insert((from, to), m);
        }
    }

    pub fn degrees(&self) -> Option<(i32, i32)> {
        let min = self.lines.iter().map(|l| l.degree).min()?;
        let max = self.lines.iter().map(|l| l.degree).max()?;
        Some((min, max))
    }

    pub fn column(&self, degree: i32) -> Vec<usize> {
        (0..self.lines.len()).filter(|&i| self.lines[i].degree == degree).collect()
    }

    /// Exact `d∘d = 0` over `Z[H]` and degree-0 entries.
    pub fn verify(&self) -> Result<()> {
        let mut two: BTreeMap<(usize, usize, u32), i64> = BTreeMap::new();
        for (&(s, t), m) in &self.entries {
            let (a, b) = (self.lines[s], self.lines[t]);
            if b.degree != a.degree + 1 {
                return Err(Error::Assertion(format!("entry {s}->{t} does not raise degree by one")));
            }
            if b.q - a.q != 2 * m.power as i32 {
                return Err(Error::Assertion(format!(
                    "entry {s}->{t} at homological degree {} has degree {}",
                    a.degree,
                    b.q - a.q - 2 * m.power as i32
                )));
            }
            for (&(s2, t2), m2) in self.entries.range((t, 0)..(t + 1, 0)) {
                debug_assert_eq!(s2, t);
                *two.entry((s, t2, m.power + m2.power)).or_default() += m.coeff * m2.coeff;
            }
        }
        if let Some((k, _)) = two.iter().find(|(_, &v)| v != 0) {
            return Err(Error::Assertion(format!("d∘d is nonzero from line {} to line {}", k.0, k.1)));
        }
        Ok(())
    }

    /// Lines sorted by degree, then q descending.
    pub fn canonical(&self) -> UniversalComplex {
        let mut order: Vec<usize> = (0..self.lines.len()).collect();
        order.sort_by_key(|&i| (self.lines[i].degree, -self.lines[i].q, i));
        let mut pos = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        UniversalComplex {
            lines: order.iter().map(|&i| self.lines[i]).collect(),
            entries: self.entries.iter().map(|(&(s, t), &m)| ((pos[s], pos[t]), m)).collect(),
        }
    }

    /// Tensor with an unknotted circle: every line splits into q+1 and q-1.
    pub fn with_free_loop(&self) -> UniversalComplex {
        let mut out = UniversalComplex::default();
        for l in &self.lines {
            out.add_line(l.degree, l.q + 1);
            out.add_line(l.degree, l.q - 1);
        }
        for (&(s, t), &m) in &self.entries {
            out.set(2 * s, 2 * t, m);
            out.set(2 * s + 1, 2 * t + 1, m);
        }
        out
    }

    /// The matrix of the differential leaving `degree`, rows indexed by the
    /// next column.
    pub fn matrix(&self, degree: i32) -> Vec<Vec<Monomial>> {
        let src = self.column(degree);
        let tgt = self.column(degree + 1);
        tgt.iter()
            .map(|&t| {
                src.iter()
                    .map(|&s| self.entries.get(&(s, t)).copied().unwrap_or(Monomial::new(0, 0)))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let c = self.canonical();
        let Some((lo, hi)) = c.degrees() else {
            return json!({"schema": SCHEMA, "columns": [], "differentials": []});
        };
        let columns: Vec<Value> = (lo..=hi)
            .map(|i| json!({"degree": i, "q": c.column(i).iter().map(|&k| c.lines[k].q).collect::<Vec<_>>()}))
            .collect();
        let diffs: Vec<Value> = (lo..hi)
            .filter(|&i| c.entries.keys().any(|&(s, _)| c.lines[s].degree == i))
            .map(|i| {
                let m: Vec<Vec<String>> =
                    c.matrix(i).iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
                json!({"degree": i, "matrix": m})
            })
            .collect();
        json!({"schema": SCHEMA, "columns": columns, "differentials": diffs})
    }

    pub fn from_json(v: &Value) -> Result<UniversalComplex> {
        let bad = |m: &str| Error::Parse(format!("universal complex json: {m}"));
        if v.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
            return Err(bad("missing or unknown schema"));
        }
        let mut u = UniversalComplex::default();
        let mut cols: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for c in v["columns"].as_array().ok_or_else(|| bad("columns"))? {
            let deg = c["degree"].as_i64().ok_or_else(|| bad("degree"))? as i32;
            for q in c["q"].as_array().ok_or_else(|| bad("q"))? {
                let q = q.as_i64().ok_or_else(|| bad("q"))? as i32;
                let id = u.add_line(deg, q);
                cols.entry(deg).or_default().push(id);
            }
        }
        for d in v["differentials"].as_array().ok_or_else(|| bad("differentials"))? {
            let deg = d["degree"].as_i64().ok_or_else(|| bad("degree"))? as i32;
            let src = cols.get(&deg).cloned().unwrap_or_default();
            let tgt = cols.get(&(deg + 1)).cloned().unwrap_or_default();
            let rows = d["matrix"].as_array().ok_or_else(|| bad("matrix"))?;
            if rows.len() != tgt.len() {
                return Err(bad("matrix row count"));
            }
            for (r, row) in rows.iter().enumerate() {
                let row = row.as_array().ok_or_else(|| bad("matrix row"))?;
                if row.len() != src.len() {
                    return Err(bad("matrix column count"));
                }
                for (k, e) in row.iter().enumerate() {
                    let m = Monomial::parse(e.as_str().ok_or_else(|| bad("entry"))?)?;
                    u.set(src[k], tgt[r], m);
                }
            }
        }
        Ok(u)
    }

    /// Parse the text layout written by `Display`.
    pub fn parse_text(text: &str) -> Result<UniversalComplex> {
        let mut u = UniversalComplex::default();
        let mut last: Option<(i32, Vec<usize>)> = None;
        let mut pending: Option<Vec<Vec<Monomial>>> = None;
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(body) = line.strip_prefix('(').and_then(|l| l.strip_suffix(')')) {
                let rows: Result<Vec<Vec<Monomial>>> = body
                    .split(';')
                    .map(|r| r.split(',').map(Monomial::parse).collect())
                    .collect();
                pending = Some(rows?);
                continue;
            }
            let (deg, rest) = line.split_once(':').ok_or_else(|| Error::Parse(format!("bad line '{line}'")))?;
            let deg: i32 = deg.trim().parse().map_err(|_| Error::Parse(format!("bad degree in '{line}'")))?;
            let body = rest
                .trim()
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("bad column in '{line}'")))?;
            let mut ids = Vec::new();
            for q in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let q: i32 = q.parse().map_err(|_| Error::Parse(format!("bad q in '{line}'")))?;
                ids.push(u.add_line(deg, q));
            }
            if let Some(m) = pending.take() {
                let (pdeg, src) = last.as_ref().ok_or_else(|| Error::Parse("matrix before first column".into()))?;
                if *pdeg + 1 != deg || m.len() != ids.len() || m.iter().any(|r| r.len() != src.len()) {
                    return Err(Error::Parse(format!("matrix shape mismatch before degree {deg}")));
                }
                for (r, row) in m.iter().enumerate() {
                    for (k, &e) in row.iter().enumerate() {
                        u.set(src[k], ids[r], e);
                    }
                }
            }
            last = Some((deg, ids));
        }
        if pending.is_some() {
            return Err(Error::Parse("trailing matrix".into()));
        }
        Ok(u)
    }
}

impl fmt::Display for UniversalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.canonical();
        let Some((lo, hi)) = c.degrees() else {
            return Ok(());
        };
        for i in lo..=hi {
            let qs: Vec<String> = c.column(i).iter().map(|&k| c.lines[k].q.to_string()).collect();
            writeln!(f, "{i:>3}: [{}]", qs.join(", "))?;
            if i < hi && c.entries.keys().any(|&(s, _)| c.lines[s].degree == i) {
                let rows: Vec<String> = c
                    .matrix(i)
                    .iter()
                    .map(|r| r.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "))
                    .collect();
                writeln!(f, "     ({})", rows.join("; "))?;
            }
        }
        Ok(())
    }
}
