//! Homology of promoted complexes, the s-invariant and Lee's spectral sequence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::complex::{Line, Monomial, UniversalComplex};
use crate::decomp::{decompose, field_decompose, BlockKind};
use crate::error::{Error, Result};
use crate::linalg::{self, ZMat};
use crate::promote::{promote, AlgebraicComplex, PromotionSpec};
use crate::ring::{CoeffRing, Field, PrimeField, Rationals};

pub const SCHEMA: &str = "khuniv.homology/1";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cell {
    pub free: usize,
    /// Prime powers, ascending.
    pub torsion: Vec<BigInt>,
}

impl Cell {
    pub fn is_zero(&self) -> bool {
        self.free == 0 && self.torsion.is_empty()
    }

    fn merge(&mut self, o: &Cell) {
        self.free += o.free;
        self.torsion.extend(o.torsion.iter().cloned());
        self.torsion.sort();
    }
}

/// Cells keyed by (homological degree, q). Ungraded tables put everything
/// at `q = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyTable {
    pub ring: CoeffRing,
    pub graded: bool,
    pub cells: BTreeMap<(i32, i32), Cell>,
}

impl HomologyTable {
    pub fn new(ring: CoeffRing, graded: bool) -> Self {
        HomologyTable { ring, graded, cells: BTreeMap::new() }
    }

    pub fn get(&self, i: i32, j: i32) -> Cell {
        self.cells.get(&(i, j)).cloned().unwrap_or_default()
    }

    fn add(&mut self, i: i32, j: i32, c: Cell) {
        if !c.is_zero() {
            self.cells.entry((i, j)).or_default().merge(&c);
        }
    }

    pub fn merge(&mut self, o: &HomologyTable) {
        for (&(i, j), c) in &o.cells {
            self.add(i, j, c.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cells.values().all(Cell::is_zero)
    }

    pub fn total_rank(&self) -> usize {
        self.cells.values().map(|c| c.free).sum()
    }

    pub fn cell_text(&self, c: &Cell) -> String {
        let sym = match self.ring {
            CoeffRing::Zp(p) => format!("Z{p}"),
            r => r.to_string(),
        };
        let mut parts = Vec::new();
        match c.free {
            0 => {}
            1 => parts.push(sym),
            k => parts.push(format!("{sym}^{k}")),
        }
        parts.extend(c.torsion.iter().map(|t| format!("Z{t}")));
        parts.join("+")
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&(i, j), c)| {
                let tors: Vec<Value> = c.torsion.iter().map(|t| t.to_u64().map_or(json!(t.to_string()), |x| json!(x))).collect();
                json!({"i": i, "j": j, "free": c.free, "torsion": tors})
            })
            .collect();
        json!({"schema": SCHEMA, "ring": self.ring.to_string(), "graded": self.graded, "cells": cells})
    }
}

impl fmt::Display for HomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let live: Vec<(&(i32, i32), &Cell)> = self.cells.iter().filter(|(_, c)| !c.is_zero()).collect();
        if live.is_empty() {
            return writeln!(f, "(zero)");
        }
        let i_min = live.iter().map(|(k, _)| k.0).min().unwrap();
        let i_max = live.iter().map(|(k, _)| k.0).max().unwrap();
        let mut rows: Vec<i32> = live.iter().map(|(k, _)| k.1).collect();
        rows.sort_unstable_by(|a, b| b.cmp(a));
        rows.dedup();
        let w = live.iter().map(|(_, c)| self.cell_text(c).len()).max().unwrap().max(3);
        write!(f, "{:>5} |", if self.graded { "j\\i" } else { "i" })?;
        for i in i_min..=i_max {
            write!(f, " {:>w$}", i)?;
        }
        writeln!(f)?;
        for j in rows {
            if self.graded {
                write!(f, "{:>5} |", j)?;
            } else {
                write!(f, "{:>5} |", "")?;
            }
            for i in i_min..=i_max {
                let c = self.get(i, j);
                let s = if c.is_zero() { ".".to_string() } else { self.cell_text(&c) };
                write!(f, " {:>w$}", s)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Split an invariant factor into prime powers.
fn prime_powers(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut n = n.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut q = BigInt::one();
        while n.is_multiple_of(&p) {
            n /= &p;
            q *= &p;
        }
        if !q.is_one() {
            out.push(q);
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

/// Sparse Gaussian elimination of unit entries.
trait Elim {
    type E: Clone;
    fn convert(&self, c: i64) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn unit_inv(&self, a: &Self::E) -> Option<Self::E>;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

struct ZElim;

impl Elim for ZElim {
    type E = BigInt;
    fn convert(&self, c: i64) -> BigInt {
        BigInt::from(c)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn unit_inv(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
}

struct FElim<F: Field>(F);

impl<F: Field> Elim for FElim<F> {
    type E = F::E;
    fn convert(&self, c: i64) -> F::E {
        self.0.from_int(&BigInt::from(c))
    }
    fn is_zero(&self, a: &F::E) -> bool {
        self.0.is_zero(a)
    }
    fn unit_inv(&self, a: &F::E) -> Option<F::E> {
        (!self.0.is_zero(a)).then(|| self.0.inv(a))
    }
    fn mul(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.mul(a, b)
    }
    fn sub(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.sub(a, b)
    }
}

struct Sparse<R: Elim> {
    r: R,
    alive: Vec<bool>,
    out: Vec<HashMap<usize, R::E>>,
    inc: Vec<HashSet<usize>>,
}

impl<R: Elim> Sparse<R> {
    fn new(r: R, n: usize, entries: &[(usize, usize, i64)]) -> Self {
        let mut s = Sparse { r, alive: vec![true; n], out: vec![HashMap::new(); n], inc: vec![HashSet::new(); n] };
        for &(a, b, c) in entries {
            let e = s.r.convert(c);
            if !s.r.is_zero(&e) {
                s.out[a].insert(b, e);
                s.inc[b].insert(a);
            }
        }
        s
    }

    fn eliminate(&mut self) {
        for s in 0..self.alive.len() {
            while self.alive[s] {
                let pick = self.out[s]
                    .iter()
                    .filter_map(|(&t, e)| self.r.unit_inv(e).map(|inv| (self.inc[t].len() * self.out[s].len(), t, inv)))
                    .min_by_key(|x| (x.0, x.1));
                let Some((_, t, inv)) = pick else { break };
                self.cancel(s, t, inv);
            }
        }
    }

    fn cancel(&mut self, s: usize, t: usize, inv: R::E) {
        let row: Vec<(usize, R::E)> = self.out[s].iter().filter(|(&u, _)| u != t).map(|(&u, e)| (u, e.clone())).collect();
        let col: Vec<usize> = self.inc[t].iter().copied().filter(|&r| r != s).collect();
        for r in col {
            let f = self.r.mul(&self.out[r][&t], &inv);
            for (u, e) in &row {
                let x = self.r.mul(&f, e);
                let new = match self.out[r].get(u) {
                    Some(old) => self.r.sub(old, &x),
                    None => self.r.sub(&self.r.sub(&x, &x), &x),
                };
                if self.r.is_zero(&new) {
                    self.out[r].remove(u);
                    self.inc[*u].remove(&r);
                } else {
                    self.out[r].insert(*u, new);
                    self.inc[*u].insert(r);
                }
            }
        }
        for g in [s, t] {
            self.alive[g] = false;
            for u in std::mem::take(&mut self.out[g]).into_keys() {
                self.inc[u].remove(&g);
            }
            for r in std::mem::take(&mut self.inc[g]) {
                self.out[r].remove(&g);
            }
        }
    }
}

fn constant_entries(a: &AlgebraicComplex) -> Result<Vec<(usize, usize, i64)>> {
    a.entries
        .iter()
        .map(|(&(s, t), p)| {
            p.as_constant()
                .map(|c| (s, t, c))
                .ok_or_else(|| Error::Unsupported("homology needs constant entries; specialize h and t first".into()))
        })
        .collect()
}

/// Homology of `a` with coefficients in `ring` (Z, Q or Z_p).
pub fn homology(a: &AlgebraicComplex, ring: CoeffRing) -> Result<HomologyTable> {
    if !ring.supports_homology() {
        return Err(Error::Unsupported(format!("homology over {ring}")));
    }
    let entries = constant_entries(a)?;
    let key = |g: usize| -> (i32, i32) {
        let (i, j) = a.gens[g];
        (i, if a.graded { j } else { 0 })
    };
    let mut table = HomologyTable::new(ring, a.graded);
    let n = a.gens.len();
    match ring {
        CoeffRing::Q => field_homology(Rationals, n, &entries, &key, &mut table),
        CoeffRing::Zp(p) => field_homology(PrimeField { p }, n, &entries, &key, &mut table),
        _ => {
            let mut s = Sparse::new(ZElim, n, &entries);
            s.eliminate();
            // what is left has no unit entries: Smith form per (degree, q)
            let mut by_key: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
            for g in (0..n).filter(|&g| s.alive[g]) {
                by_key.entry(key(g)).or_default().push(g);
            }
            let mut ranks: BTreeMap<(i32, i32), usize> = BTreeMap::new();
            for (&(i, j), cols) in &by_key {
                let Some(rows) = by_key.get(&(i + 1, j)) else { continue };
                let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(k, &g)| (g, k)).collect();
                let mut m: ZMat = linalg::zeros(rows.len(), cols.len());
                for (c, &g) in cols.iter().enumerate() {
                    for (t, e) in &s.out[g] {
                        m[pos[t]][c] = e.clone();
                    }
                }
                let sm = linalg::smith(&m, cols.len());
                ranks.insert((i, j), sm.d.len());
                let tors: Vec<BigInt> = sm.d.iter().filter(|d| !d.is_one()).flat_map(prime_powers).collect();
                table.add(i + 1, j, Cell { free: 0, torsion: tors });
            }
            for (&(i, j), gens) in &by_key {
                let r_out = ranks.get(&(i, j)).copied().unwrap_or(0);
                let r_in = ranks.get(&(i - 1, j)).copied().unwrap_or(0);
                table.add(i, j, Cell { free: gens.len() - r_out - r_in, torsion: vec![] });
            }
        }
    }
    for c in table.cells.values_mut() {
        c.torsion.sort();
    }
    Ok(table)
}

fn field_homology<F: Field>(
    f: F,
    n: usize,
    entries: &[(usize, usize, i64)],
    key: &dyn Fn(usize) -> (i32, i32),
    table: &mut HomologyTable,
) {
    let mut s = Sparse::new(FElim(f), n, entries);
    s.eliminate();
    for g in (0..n).filter(|&g| s.alive[g]) {
        debug_assert!(s.out[g].is_empty());
        let (i, j) = key(g);
        table.add(i, j, Cell { free: 1, torsion: vec![] });
    }
}

pub fn reduced_homology(u: &UniversalComplex, ring: CoeffRing) -> Result<HomologyTable> {
    homology(&promote(u, &PromotionSpec::named("reduced_standard")?)?, ring)
}

/// q of the unique isolated line at degree 0.
pub fn s_invariant(u: &UniversalComplex) -> Result<i32> {
    let blocks = decompose(u);
    check_unit_lines(&blocks)?;
    let pawns: Vec<i32> = blocks
        .iter()
        .filter(|b| b.kind == BlockKind::Pawn && b.complex.lines[0].degree == 0)
        .map(|b| b.complex.lines[0].q)
        .collect();
    match pawns[..] {
        [q] => Ok(q),
        _ => Err(Error::Assertion(format!("expected one isolated line at degree 0, found {}", pawns.len()))),
    }
}

/// Every two-line block must be `±H^n`.
pub fn check_unit_lines(blocks: &[crate::decomp::Block]) -> Result<()> {
    for b in blocks {
        if let BlockKind::Line { coeff, .. } = b.kind {
            if coeff != 1 {
                return Err(Error::Assertion(format!("line with coefficient {coeff}")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSReport {
    pub ring: CoeffRing,
    /// E_1, E_2, ... up to the convergence page.
    pub pages: Vec<HomologyTable>,
    pub convergence_page: usize,
    pub fast: bool,
    /// False when some block was too large to analyse.
    pub conclusive: bool,
}

impl SSReport {
    fn new(ring: CoeffRing, pages: Vec<HomologyTable>, conclusive: bool) -> Self {
        let n = pages.len().max(1);
        SSReport { ring, pages, convergence_page: n, fast: n <= 2, conclusive }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ring": self.ring.to_string(),
            "convergence_page": self.convergence_page,
            "fast": self.fast,
            "conclusive": self.conclusive,
            "pages": self.pages.iter().map(HomologyTable::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Page on which an order-`n` line is gone.
pub fn death_page(n: u32) -> usize {
    n.div_ceil(2) as usize + 1
}

fn line_complex(lines: &[(Line, Line, u32)], pawns: &[Line]) -> UniversalComplex {
    let mut u = UniversalComplex::default();
    for p in pawns {
        u.add_line(p.degree, p.q);
    }
    for (a, b, n) in lines {
        let s = u.add_line(a.degree, a.q);
        let t = u.add_line(b.degree, b.q);
        u.set(s, t, Monomial::new(1, *n));
    }
    u
}

fn field_ring(p: u64) -> CoeffRing {
    if p == 0 {
        CoeffRing::Q
    } else {
        CoeffRing::Zp(p)
    }
}

/// Lee's spectral sequence over `Q` (`p = 0`) or `Z_p` from the line
/// decomposition over the field.
pub fn lee_ss_field(u: &UniversalComplex, p: u64) -> Result<SSReport> {
    let ring = field_ring(p);
    let standard = PromotionSpec::named("standard")?;
    let (pawns, lines) = field_decompose(u, p);
    // in characteristic 2 the Lee differential vanishes
    let last = if p == 2 { 1 } else { lines.iter().map(|l| death_page(l.2)).max().unwrap_or(1) };
    let mut pages = Vec::new();
    for r in 1..=last {
        let live: Vec<_> = lines.iter().filter(|l| p == 2 || death_page(l.2) > r).cloned().collect();
        let c = line_complex(&live, &pawns);
        pages.push(homology(&promote(&c, &standard)?, ring)?);
    }
    while pages.len() > 1 && pages[pages.len() - 2] == pages[pages.len() - 1] {
        pages.pop();
    }
    Ok(SSReport::new(ring, pages, true))
}

/// Lee's spectral sequence over Z: blocks of the decomposition over `Z[H]`
/// are run through the filtered computation one at a time.
pub fn lee_ss_z(u: &UniversalComplex, block_bound: usize) -> Result<SSReport> {
    let lee = PromotionSpec::named("generalized_lee")?;
    let standard = PromotionSpec::named("standard")?;
    let blocks = decompose(u);
    check_unit_lines(&blocks)?;
    let mut conclusive = true;
    let mut per_block: Vec<Vec<HomologyTable>> = Vec::new();
    for b in &blocks {
        if b.kind == BlockKind::Pawn {
            per_block.push(vec![homology(&promote(&b.complex, &standard)?, CoeffRing::Z)?]);
        } else if b.complex.lines.len() > block_bound {
            conclusive = false;
            per_block.push(vec![homology(&promote(&b.complex, &standard)?, CoeffRing::Z)?]);
        } else {
            per_block.push(filtered_pages(&promote(&b.complex, &lee)?, CoeffRing::Z)?);
        }
    }
    let last = per_block.iter().map(Vec::len).max().unwrap_or(1);
    let pages = (0..last)
        .map(|r| {
            let mut t = HomologyTable::new(CoeffRing::Z, true);
            for pb in &per_block {
                t.merge(&pb[r.min(pb.len() - 1)]);
            }
            t
        })
        .collect();
    Ok(SSReport::new(CoeffRing::Z, pages, conclusive))
}

/// Lattice or vector-space arithmetic for the filtered computation.
trait Backend {
    type E: Clone;
    fn convert(&self, c: i64) -> Self::E;
    fn zero(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// Kernel of an `rows x cols` matrix, saturated over Z.
    fn kernel(&self, m: &[Vec<Self::E>], cols: usize) -> Vec<Vec<Self::E>>;
    /// `span(ambient) / span(sub)` where `sub` lies in `span(ambient)`.
    fn quotient(&self, ambient: &[Vec<Self::E>], sub: &[Vec<Self::E>]) -> Cell;
}

struct ZBackend;

impl Backend for ZBackend {
    type E = BigInt;
    fn convert(&self, c: i64) -> BigInt {
        BigInt::from(c)
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn kernel(&self, m: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
        linalg::kernel(&m.to_vec(), cols)
    }
    fn quotient(&self, ambient: &[Vec<BigInt>], sub: &[Vec<BigInt>]) -> Cell {
        let coords = linalg::coordinates(ambient, sub);
        let (free, tors) = linalg::quotient(ambient.len(), &coords);
        Cell { free, torsion: tors.iter().flat_map(prime_powers).collect() }
    }
}

struct FBackend<F: Field>(F);

impl<F: Field> Backend for FBackend<F> {
    type E = F::E;
    fn convert(&self, c: i64) -> F::E {
        self.0.from_int(&BigInt::from(c))
    }
    fn zero(&self) -> F::E {
        self.0.zero()
    }
    fn add(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.add(a, b)
    }
    fn mul(&self, a: &F::E, b: &F::E) -> F::E {
        self.0.mul(a, b)
    }
    fn kernel(&self, m: &[Vec<F::E>], cols: usize) -> Vec<Vec<F::E>> {
        linalg::field_kernel(&self.0, m, cols)
    }
    fn quotient(&self, ambient: &[Vec<F::E>], sub: &[Vec<F::E>]) -> Cell {
        let cols = ambient.first().or(sub.first()).map_or(0, Vec::len);
        let r = linalg::field_rank(&self.0, sub, cols);
        Cell { free: ambient.len() - r, torsion: vec![] }
    }
}

/// Pages `E_1 .. E_inf` of the spectral sequence of the q-filtration on a
/// complex whose entries are `c * t^k` (each `t` raises q by 4), computed
/// directly from the filtration. Pages after the last change are dropped.
pub fn filtered_pages(a: &AlgebraicComplex, ring: CoeffRing) -> Result<Vec<HomologyTable>> {
    let mut entries = Vec::new();
    for (&(s, t), p) in &a.entries {
        for (&(h, k), &c) in &p.terms {
            if h != 0 || a.gens[t].1 - a.gens[s].1 != 4 * k as i32 {
                return Err(Error::Unsupported("filtered pages need entries c*t^k raising q by 4k".into()));
            }
            entries.push((s, t, c));
        }
    }
    match ring {
        CoeffRing::Z => Ok(run_filtered(&ZBackend, a, &entries, ring)),
        CoeffRing::Q => Ok(run_filtered(&FBackend(Rationals), a, &entries, ring)),
        CoeffRing::Zp(p) => Ok(run_filtered(&FBackend(PrimeField { p }), a, &entries, ring)),
        r => Err(Error::Unsupported(format!("filtered pages over {r}"))),
    }
}

fn run_filtered<B: Backend>(b: &B, a: &AlgebraicComplex, entries: &[(usize, usize, i64)], ring: CoeffRing) -> Vec<HomologyTable> {
    let level = |g: usize| a.gens[g].1.div_euclid(4);
    let mut all_pages: Vec<HomologyTable> = Vec::new();
    let span = match (a.gens.iter().map(|g| g.1).min(), a.gens.iter().map(|g| g.1).max()) {
        (Some(lo), Some(hi)) => (hi.div_euclid(4) - lo.div_euclid(4)) as usize,
        _ => 0,
    };
    let last = span + 2;
    for rho in 0..4 {
        let gens: Vec<usize> = (0..a.gens.len()).filter(|&g| a.gens[g].1.rem_euclid(4) == rho).collect();
        if gens.is_empty() {
            continue;
        }
        // per homological degree: local index of each generator
        let mut cols: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for &g in &gens {
            cols.entry(a.gens[g].0).or_default().push(g);
        }
        let local: HashMap<usize, usize> = cols.values().flat_map(|v| v.iter().enumerate().map(|(k, &g)| (g, k))).collect();
        let mut d: BTreeMap<i32, Vec<Vec<B::E>>> = BTreeMap::new();
        for (&i, v) in &cols {
            let rows = cols.get(&(i + 1)).map_or(0, Vec::len);
            d.insert(i, vec![vec![b.zero(); v.len()]; rows]);
        }
        for &(s, t, c) in entries {
            if a.gens[s].1.rem_euclid(4) != rho {
                continue;
            }
            let m = d.get_mut(&a.gens[s].0).unwrap();
            let e = &mut m[local[&t]][local[&s]];
            *e = b.add(e, &b.convert(c));
        }
        let ctx = Filtered { b, cols: &cols, d: &d, level: &level };
        let levels: Vec<i32> = {
            let mut l: Vec<i32> = gens.iter().map(|&g| level(g)).collect();
            l.sort();
            l.dedup();
            l
        };
        for r in 1..=last {
            if all_pages.len() < r {
                all_pages.push(HomologyTable::new(ring, true));
            }
            for &i in cols.keys() {
                for &p in &levels {
                    let cell = ctx.page_cell(i, p, r as i32);
                    all_pages[r - 1].add(i, 4 * p + rho, cell);
                }
            }
        }
    }
    while all_pages.len() > 1 && all_pages[all_pages.len() - 2] == all_pages[all_pages.len() - 1] {
        all_pages.pop();
    }
    if all_pages.is_empty() {
        all_pages.push(HomologyTable::new(ring, true));
    }
    all_pages
}

struct Filtered<'a, B: Backend, L: Fn(usize) -> i32> {
    b: &'a B,
    cols: &'a BTreeMap<i32, Vec<usize>>,
    d: &'a BTreeMap<i32, Vec<Vec<B::E>>>,
    level: &'a L,
}

impl<B: Backend, L: Fn(usize) -> i32> Filtered<'_, B, L> {
    fn gens(&self, i: i32) -> &[usize] {
        self.cols.get(&i).map_or(&[], Vec::as_slice)
    }

    /// `{x in F_p C_i : d x in F_{p+r}}` in full coordinates.
    fn cycles(&self, i: i32, p: i32, r: i32) -> Vec<Vec<B::E>> {
        let src = self.gens(i);
        let dst = self.gens(i + 1);
        let keep: Vec<usize> = (0..src.len()).filter(|&k| (self.level)(src[k]) >= p).collect();
        let low: Vec<usize> = (0..dst.len()).filter(|&k| (self.level)(dst[k]) < p + r).collect();
        let m: Vec<Vec<B::E>> = match self.d.get(&i) {
            Some(d) => low.iter().map(|&row| keep.iter().map(|&c| d[row][c].clone()).collect()).collect(),
            None => vec![],
        };
        self.b
            .kernel(&m, keep.len())
            .into_iter()
            .map(|v| {
                let mut full = vec![self.b.zero(); src.len()];
                for (k, x) in keep.iter().zip(v) {
                    full[*k] = x;
                }
                full
            })
            .collect()
    }

    fn apply(&self, i: i32, x: &[B::E]) -> Vec<B::E> {
        let d = &self.d[&i];
        d.iter()
            .map(|row| row.iter().zip(x).fold(self.b.zero(), |acc, (a, y)| self.b.add(&acc, &self.b.mul(a, y))))
            .collect()
    }

    /// `E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})`.
    fn page_cell(&self, i: i32, p: i32, r: i32) -> Cell {
        if !self.gens(i).iter().any(|&g| (self.level)(g) == p) {
            return Cell::default();
        }
        let z = self.cycles(i, p, r);
        let mut sub = self.cycles(i, p + 1, r - 1);
        if self.cols.contains_key(&(i - 1)) {
            for y in self.cycles(i - 1, p - r + 1, r - 1) {
                sub.push(self.apply(i - 1, &y));
            }
        }
        self.b.quotient(&z, &sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_universal, BuildOptions};
    use crate::knots;

    fn universal(name: &str) -> UniversalComplex {
        build_universal(&knots::builtin(name).unwrap(), &BuildOptions::default()).unwrap()
    }

    fn standard(u: &UniversalComplex, ring: CoeffRing) -> HomologyTable {
        homology(&promote(u, &PromotionSpec::named("standard").unwrap()).unwrap(), ring).unwrap()
    }

    fn single_line(n: u32) -> UniversalComplex {
        let mut u = UniversalComplex::default();
        let a = u.add_line(0, 0);
        let b = u.add_line(1, 2 * n as i32);
        u.set(a, b, Monomial::new(1, n));
        u
    }

    #[test]
    fn trefoil_rational() {
        let t = standard(&universal("3_1"), CoeffRing::Q);
        let cells: Vec<(i32, i32)> = t.cells.keys().copied().collect();
        assert_eq!(cells, vec![(-3, -9), (-2, -5), (0, -3), (0, -1)]);
    }

    #[test]
    fn line_tables() {
        let u = single_line(1);
        let z = standard(&u, CoeffRing::Z);
        assert_eq!(z.get(0, -1).free, 1);
        assert_eq!(z.get(1, 3).free, 1);
        assert_eq!(z.get(1, 1).torsion, vec![BigInt::from(2)]);
        assert_eq!(standard(&u, CoeffRing::Zp(2)).total_rank(), 4);
        assert!(standard(&UniversalComplex::default(), CoeffRing::Z).is_zero());
    }

    #[test]
    fn s_values() {
        assert_eq!(s_invariant(&universal("3_1")).unwrap(), -2);
        assert_eq!(s_invariant(&universal("4_1")).unwrap(), 0);
        assert_eq!(s_invariant(&universal("unknot")).unwrap(), 0);
    }

    #[test]
    fn death_rule_matches_filtration() {
        let lee = PromotionSpec::named("generalized_lee").unwrap();
        for n in 1..=4 {
            let a = promote(&single_line(n), &lee).unwrap();
            for ring in [CoeffRing::Q, CoeffRing::Zp(3)] {
                let pages = filtered_pages(&a, ring).unwrap();
                assert_eq!(pages.len(), death_page(n), "order {n} over {ring}");
                assert!(pages.last().unwrap().is_zero());
            }
        }
    }

    #[test]
    fn integral_line_keeps_torsion() {
        let lee = PromotionSpec::named("generalized_lee").unwrap();
        let pages = filtered_pages(&promote(&single_line(1), &lee).unwrap(), CoeffRing::Z).unwrap();
        assert_eq!(pages.len(), 2);
        let last = pages.last().unwrap();
        assert_eq!(last.cells.values().flat_map(|c| c.torsion.clone()).count(), 2);
        assert_eq!(last.total_rank(), 0);
    }

    #[test]
    fn pawn_survives() {
        let r = lee_ss_field(&universal("3_1"), 0).unwrap();
        assert!(r.fast);
        assert_eq!(r.pages.last().unwrap().total_rank(), 2);
        let z = lee_ss_z(&universal("3_1"), 12).unwrap();
        assert!(z.fast && z.conclusive);
    }
}
