//! Splitting a universal complex into pawns, lines, diamonds and the rest.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::complex::{Line, Monomial, UniversalComplex};
use crate::error::{Error, Result};
use crate::homology::HomologyTable;
use crate::ring::{Field, PrimeField, Rationals};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKind {
    Pawn,
    Line { order: u32, coeff: i64 },
    Diamond { order: u32 },
    Other,
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::Pawn => "pawn",
            BlockKind::Line { .. } => "line",
            BlockKind::Diamond { .. } => "diamond",
            BlockKind::Other => "other",
        }
    }

    pub fn order(&self) -> Option<u32> {
        match self {
            BlockKind::Line { order, .. } | BlockKind::Diamond { order } => Some(*order),
            _ => None,
        }
    }
}

/// A direct summand. `lines` are sorted by degree then q descending and
/// `complex` uses the same indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    pub kind: BlockKind,
    pub complex: UniversalComplex,
}

impl PartialOrd for UniversalComplex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UniversalComplex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.lines, &self.entries).cmp(&(&other.lines, &other.entries))
    }
}

impl std::hash::Hash for UniversalComplex {
    fn hash<S: std::hash::Hasher>(&self, state: &mut S) {
        self.lines.hash(state);
        self.entries.hash(state);
    }
}

impl Block {
    pub fn positions(&self) -> Vec<(i32, i32)> {
        self.complex.lines.iter().map(|l| (l.degree, l.q)).collect()
    }

    pub fn to_json(&self) -> Value {
        let m: Vec<Value> = self
            .complex
            .entries
            .iter()
            .map(|(&(s, t), m)| json!({"from": s, "to": t, "entry": m.to_string()}))
            .collect();
        json!({
            "kind": self.kind.name(),
            "order": self.kind.order(),
            "positions": self.positions().iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
            "matrix": m,
        })
    }
}

/// Coefficient arithmetic for monomial elimination.
trait Coeffs {
    type E: Clone + std::fmt::Debug;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn is_unit(&self, a: &Self::E) -> bool;
    /// `a / b` for a unit `b`.
    fn div(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

struct Ints;

impl Coeffs for Ints {
    type E = i64;
    fn is_zero(&self, a: &i64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &i64) -> bool {
        a.abs() == 1
    }
    fn div(&self, a: &i64, b: &i64) -> i64 {
        a * b
    }
    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a.checked_mul(*b).expect("coefficient overflow")
    }
    fn sub(&self, a: &i64, b: &i64) -> i64 {
        a.checked_sub(*b).expect("coefficient overflow")
    }
}

struct FieldCoeffs<F: Field>(F);

impl<F: Field> Coeffs for FieldCoeffs<F> {
    type E = F::E;
    fn is_zero(&self, a: &F::E) -> bool {
        self.0.is_zero(a)
    }
    fn is_unit(&self, a: &F::E) -> bool {
        !self.0.is_zero(a)
    }
    fn div(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.mul(a, &self.0.inv(b))
    }
    fn mul(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.mul(a, b)
    }
    fn sub(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.sub(a, b)
    }
}

/// Monomial complex under elimination: entry `(s, t) -> (c, power)`.
struct Work<C: Coeffs> {
    c: C,
    lines: Vec<Line>,
    alive: Vec<bool>,
    out: Vec<BTreeMap<usize, (C::E, u32)>>,
    inc: Vec<BTreeSet<usize>>,
}

impl<C: Coeffs> Work<C> {
    fn new(c: C, u: &UniversalComplex, conv: impl Fn(i64) -> C::E) -> Self {
        let n = u.lines.len();
        let mut w = Work { c, lines: u.lines.clone(), alive: vec![true; n], out: vec![BTreeMap::new(); n], inc: vec![BTreeSet::new(); n] };
        for (&(s, t), m) in &u.entries {
            let e = conv(m.coeff);
            if !w.c.is_zero(&e) {
                w.out[s].insert(t, (e, m.power));
                w.inc[t].insert(s);
            }
        }
        w
    }

    fn get(&self, s: usize, t: usize) -> Option<&(C::E, u32)> {
        self.out[s].get(&t)
    }

    /// entry(s, t) -= x * H^k
    fn sub_entry(&mut self, s: usize, t: usize, x: &C::E, k: u32) {
        if self.c.is_zero(x) {
            return;
        }
        let new = match self.out[s].get(&t) {
            Some((e, p)) => {
                assert_eq!(*p, k, "inhomogeneous entry");
                self.c.sub(e, x)
            }
            None => self.c.sub(&self.c.sub(x, x), x),
        };
        if self.c.is_zero(&new) {
            self.out[s].remove(&t);
            self.inc[t].remove(&s);
        } else {
            self.out[s].insert(t, (new, k));
            self.inc[t].insert(s);
        }
    }

    fn remove(&mut self, g: usize) {
        self.alive[g] = false;
        for t in std::mem::take(&mut self.out[g]).into_keys() {
            self.inc[t].remove(&g);
        }
        for s in std::mem::take(&mut self.inc[g]) {
            self.out[s].remove(&g);
        }
    }

    /// Unit entry whose power is minimal in its row and column.
    fn pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(u32, usize, usize)> = None;
        for s in 0..self.lines.len() {
            if !self.alive[s] {
                continue;
            }
            for (&t, (e, n)) in &self.out[s] {
                if !self.c.is_unit(e) || best.map_or(false, |b| b.0 <= *n) {
                    continue;
                }
                let row_ok = self.out[s].values().all(|(_, m)| m >= n);
                let col_ok = self.inc[t].iter().all(|&r| self.out[r][&t].1 >= *n);
                if row_ok && col_ok {
                    best = Some((*n, s, t));
                }
            }
        }
        best.map(|b| (b.1, b.2))
    }

    /// Split off the pair `(s, t)` as a line. Returns its power.
    fn split(&mut self, s: usize, t: usize) -> u32 {
        let (c, n) = self.get(s, t).cloned().unwrap();
        // column: s' -> s' - (c'/c) H^k s
        for s2 in self.inc[t].iter().copied().filter(|&x| x != s).collect::<Vec<_>>() {
            let (c2, n2) = self.get(s2, t).cloned().unwrap();
            let lam = self.c.div(&c2, &c);
            let k = n2 - n;
            for (u, (e, m)) in self.out[s].clone() {
                self.sub_entry(s2, u, &self.c.mul(&lam, &e), k + m);
            }
            for r in self.inc[s2].clone() {
                let (e, m) = self.get(r, s2).cloned().unwrap();
                let x = self.c.mul(&e, &lam);
                let neg = self.c.sub(&self.c.sub(&x, &x), &x);
                self.sub_entry(r, s, &neg, m + k);
            }
        }
        self.remove(s);
        self.remove(t);
        n
    }
}

fn components(lines: &[Line], alive: &[bool], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let n = lines.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let z = p[y];
            p[y] = r;
            y = z;
        }
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..n).filter(|&i| alive[i]) {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sub_complex(u_lines: &[Line], ids: &[usize], entries: &[(usize, usize, Monomial)]) -> UniversalComplex {
    let mut c = UniversalComplex::default();
    let mut pos = BTreeMap::new();
    for &i in ids {
        pos.insert(i, c.add_line(u_lines[i].degree, u_lines[i].q));
    }
    for &(s, t, m) in entries {
        if let (Some(&a), Some(&b)) = (pos.get(&s), pos.get(&t)) {
            c.set(a, b, m);
        }
    }
    c.canonical()
}

/// Canonical signs: flip basis vectors to the lexicographically smallest
/// entry list. Blocks above 16 lines keep their signs.
pub fn canonical_signs(u: &UniversalComplex) -> UniversalComplex {
    let u = u.canonical();
    let n = u.lines.len();
    if n > 16 || u.entries.is_empty() {
        return u;
    }
    let key = |mask: u32| -> Vec<(usize, usize, i64, u32)> {
        u.entries
            .iter()
            .map(|(&(s, t), m)| {
                let flip = ((mask >> s) ^ (mask >> t)) & 1 == 1;
                (s, t, if flip { -m.coeff } else { m.coeff }, m.power)
            })
            .map(|(s, t, c, p)| (s, t, -c, p))
            .collect()
    };
    let best = (0..1u32 << n).min_by_key(|&m| key(m)).unwrap();
    let mut out = u.clone();
    for (&(s, t), m) in out.entries.iter_mut() {
        if ((best >> s) ^ (best >> t)) & 1 == 1 {
            m.coeff = -m.coeff;
        }
        let _ = (s, t);
    }
    out
}

fn coeff_weight(u: &UniversalComplex) -> i64 {
    u.entries.values().map(|m| m.coeff.abs()).sum()
}

/// Replace `b` by `b + lam H^k a` for two lines in one column with
/// `q_b = q_a - 2k`.
fn shear(u: &UniversalComplex, a: usize, b: usize, lam: i64) -> UniversalComplex {
    let k = ((u.lines[a].q - u.lines[b].q) / 2) as u32;
    let mut acc: BTreeMap<(usize, usize), Monomial> = u.entries.clone();
    let mut add = |s: usize, t: usize, c: i64, p: u32| {
        let e = acc.entry((s, t)).or_insert(Monomial::new(0, p));
        e.coeff += c;
        e.power = p;
    };
    // incoming: old b = b' - lam H^k a
    for (&(r, t), m) in &u.entries {
        if t == b {
            add(r, a, -lam * m.coeff, m.power + k);
        }
    }
    // outgoing: d b' = d b + lam H^k d a
    for (&(s, w), m) in &u.entries {
        if s == a {
            add(b, w, lam * m.coeff, m.power + k);
        }
    }
    let mut out = UniversalComplex { lines: u.lines.clone(), entries: BTreeMap::new() };
    for ((s, t), m) in acc {
        out.set(s, t, m);
    }
    out
}

/// Shrink coefficients by basis changes inside columns.
fn minimize_coefficients(u: &UniversalComplex) -> UniversalComplex {
    let mut cur = u.clone();
    loop {
        let mut best = (coeff_weight(&cur), None);
        for a in 0..cur.lines.len() {
            for b in 0..cur.lines.len() {
                let (la, lb) = (cur.lines[a], cur.lines[b]);
                if a == b || la.degree != lb.degree || lb.q > la.q {
                    continue;
                }
                for lam in [-3, -2, -1, 1, 2, 3] {
                    let c = shear(&cur, a, b, lam);
                    let w = coeff_weight(&c);
                    if w < best.0 {
                        best = (w, Some(c));
                    }
                }
            }
        }
        match best.1 {
            Some(c) => cur = c,
            None => return cur,
        }
    }
}

fn classify(c: &UniversalComplex) -> BlockKind {
    let n = c.lines.len();
    let max_power = c.entries.values().map(|m| m.power).max().unwrap_or(0);
    match (n, c.entries.len()) {
        (1, 0) => BlockKind::Pawn,
        (2, 1) => {
            let m = c.entries.values().next().unwrap();
            BlockKind::Line { order: m.power, coeff: m.coeff }
        }
        (4, 4) => {
            let d0 = c.lines[0].degree;
            let shape: Vec<i32> = c.lines.iter().map(|l| l.degree - d0).collect();
            if shape == [0, 1, 1, 2] {
                BlockKind::Diamond { order: max_power }
            } else {
                BlockKind::Other
            }
        }
        _ => BlockKind::Other,
    }
}

/// Split off lines `±H^n` with unit pivots, then cut the rest into
/// connected components.
pub fn decompose(u: &UniversalComplex) -> Vec<Block> {
    let mut w = Work::new(Ints, u, |x| x);
    let mut blocks = Vec::new();
    while let Some((s, t)) = w.pivot() {
        let coeff = w.get(s, t).unwrap().0.signum();
        let order = w.split(s, t);
        let mut c = UniversalComplex::default();
        let a = c.add_line(u.lines[s].degree, u.lines[s].q);
        let b = c.add_line(u.lines[t].degree, u.lines[t].q);
        c.set(a, b, Monomial::new(coeff, order));
        blocks.push(Block { kind: BlockKind::Line { order, coeff: 1 }, complex: canonical_signs(&c) });
    }
    let entries: Vec<(usize, usize, Monomial)> = (0..w.lines.len())
        .flat_map(|s| w.out[s].iter().map(move |(&t, &(c, p))| (s, t, Monomial::new(c, p))))
        .collect();
    let edges: Vec<(usize, usize)> = entries.iter().map(|e| (e.0, e.1)).collect();
    for comp in components(&w.lines, &w.alive, &edges) {
        let mut c = sub_complex(&w.lines, &comp, &entries);
        let mut kind = classify(&c);
        if kind != BlockKind::Pawn {
            c = minimize_coefficients(&c);
            kind = classify(&c);
        }
        let c = canonical_signs(&c);
        if let BlockKind::Line { coeff, .. } = kind {
            kind = BlockKind::Line { order: c.entries.values().next().unwrap().power, coeff: coeff.abs() };
        }
        blocks.push(Block { kind, complex: c });
    }
    blocks.sort();
    blocks
}

/// Lines and pawns over `Q` (`p = 0`) or `Z_p`. Returns pawn positions and
/// lines as (source, target, order); order-0 lines are dropped.
pub fn field_decompose(u: &UniversalComplex, p: u64) -> (Vec<Line>, Vec<(Line, Line, u32)>) {
    fn run<F: Field + Clone>(f: F, u: &UniversalComplex) -> (Vec<Line>, Vec<(Line, Line, u32)>) {
        let conv = |x: i64| f.from_int(&BigInt::from(x));
        let mut w = Work::new(FieldCoeffs(f.clone()), u, conv);
        let mut lines = Vec::new();
        while let Some((s, t)) = w.pivot() {
            let n = w.split(s, t);
            if n > 0 {
                lines.push((u.lines[s], u.lines[t], n));
            }
        }
        let pawns = (0..u.lines.len()).filter(|&i| w.alive[i]).map(|i| u.lines[i]).collect();
        (pawns, lines)
    }
    if p == 0 {
        run(Rationals, u)
    } else {
        run(PrimeField { p }, u)
    }
}

/// Number of diagonals `2i - j` carrying homology.
pub fn width(t: &HomologyTable) -> Result<usize> {
    let d: BTreeSet<i32> = t.cells.iter().filter(|(_, c)| !c.is_zero()).map(|(&(i, j), _)| 2 * i - j).collect();
    if d.is_empty() {
        return Err(Error::Argument("empty homology table".into()));
    }
    Ok(d.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub pattern: String,
    pub degree: i32,
    pub q: i32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhenoReport {
    pub width: usize,
    pub pieces: Vec<Piece>,
    pub thin: bool,
    pub torsion_thin: bool,
    pub torsion_rich: bool,
}

impl PhenoReport {
    pub fn to_json(&self) -> Value {
        json!({
            "width": self.width,
            "thin": self.thin,
            "torsion_thin": self.torsion_thin,
            "torsion_rich": self.torsion_rich,
            "pieces": self.pieces.iter().map(|p| json!({"pattern": p.pattern, "i": p.degree, "j": p.q})).collect::<Vec<_>>(),
        })
    }
}

/// Patterns each block leaves in the standard tables. `rational` is the
/// standard table over Q, `integral` over Z.
pub fn classify_patterns(blocks: &[Block], rational: &HomologyTable, integral: &HomologyTable) -> Result<PhenoReport> {
    let mut pieces = Vec::new();
    for b in blocks {
        let (i, q) = (b.complex.lines[0].degree, b.complex.lines[0].q);
        let names: &[&str] = match b.kind {
            BlockKind::Pawn => &["Q pawn"],
            BlockKind::Line { order: 1, .. } => &["Q knight move", "Z2 torsion knight", "Z2 tetris piece"],
            BlockKind::Line { order: 0, .. } => &[],
            BlockKind::Line { .. } => &["double knight move"],
            BlockKind::Diamond { .. } => &["excess torsion (wide)"],
            BlockKind::Other => &["unclassified"],
        };
        for n in names {
            pieces.push(Piece { pattern: n.to_string(), degree: i, q });
        }
    }
    let w = width(rational)?;
    let odd_torsion = integral
        .cells
        .values()
        .any(|c| c.torsion.iter().any(|t| t.to_u64() != Some(2)));
    let rich_blocks = blocks.iter().any(|b| matches!(b.kind, BlockKind::Diamond { .. } | BlockKind::Other));
    let only_order_one = blocks
        .iter()
        .all(|b| matches!(b.kind, BlockKind::Pawn | BlockKind::Line { order: 1, .. }));
    Ok(PhenoReport {
        width: w,
        pieces,
        thin: w == 2,
        torsion_thin: only_order_one && !odd_torsion,
        torsion_rich: rich_blocks || odd_torsion,
    })
}

pub fn is_unit_line(b: &Block) -> bool {
    matches!(b.kind, BlockKind::Line { coeff, .. } if coeff == 1)
}
