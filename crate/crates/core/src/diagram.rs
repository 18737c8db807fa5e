//! Planar diagrams: PD codes, braid closures, orientation and crossing order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Edge label. After `cut_open` the label 0 is the special endpoint.
pub type Label = u32;

pub const SPECIAL: Label = 0;

/// A crossing `X[a,b,c,d]`, slots counterclockwise from the incoming under-strand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub slots: [Label; 4],
    pub sign: i8,
}

impl Crossing {
    /// Slot pairs joined by the 0-smoothing.
    pub fn zero_pairs() -> [(usize, usize); 2] {
        [(0, 1), (2, 3)]
    }

    pub fn one_pairs() -> [(usize, usize); 2] {
        [(0, 3), (1, 2)]
    }

    pub fn pairs(x: u8) -> [(usize, usize); 2] {
        if x == 0 {
            Self::zero_pairs()
        } else {
            Self::one_pairs()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarDiagram {
    pub crossings: Vec<Crossing>,
    pub edge_count: u32,
    pub marked_edge: Label,
    /// Crossingless components.
    pub free_loops: u32,
    /// True once the marked edge has been split into the endpoints 0 and `marked_edge`.
    pub open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidWord {
    pub strand_count: u32,
    pub letters: Vec<i32>,
}

impl PlanarDiagram {
    pub fn from_slots(slots: &[[Label; 4]], free_loops: u32) -> Result<Self> {
        let mut d = PlanarDiagram {
            crossings: slots.iter().map(|&s| Crossing { slots: s, sign: 0 }).collect(),
            edge_count: 0,
            marked_edge: 1,
            free_loops,
            open: false,
        };
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for c in &d.crossings {
            for &l in &c.slots {
                *count.entry(l).or_default() += 1;
            }
        }
        let n = count.len() as u32;
        for (i, (&l, &k)) in count.iter().enumerate() {
            if l != i as u32 + 1 {
                return Err(Error::Diagram(format!("edge labels must be 1..{n}, found {l}")));
            }
            if k != 2 {
                return Err(Error::Diagram(format!("edge {l} appears {k} times")));
            }
        }
        d.edge_count = n;
        if n == 0 && d.free_loops == 0 {
            d.free_loops = 1;
        }
        d.assign_signs()?;
        Ok(d)
    }

    pub fn n_plus(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign < 0).count()
    }

    pub fn writhe(&self) -> i32 {
        self.crossings.iter().map(|c| c.sign as i32).sum()
    }

    fn occurrences(&self) -> BTreeMap<Label, Vec<(usize, usize)>> {
        let mut occ: BTreeMap<Label, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, c) in self.crossings.iter().enumerate() {
            for (s, &l) in c.slots.iter().enumerate() {
                occ.entry(l).or_default().push((i, s));
            }
        }
        occ
    }

    /// Orientation from the under-strand slots, propagated along edges.
    /// Components that never pass under fall back to the label rule.
    fn assign_signs(&mut self) -> Result<()> {
        let n = self.crossings.len();
        let occ = self.occurrences();
        // incoming[c][s]
        let mut incoming: Vec<[Option<bool>; 4]> = vec![[None; 4]; n];
        let mut queue = VecDeque::new();
        for c in 0..n {
            queue.push_back((c, 0, true));
            queue.push_back((c, 2, false));
        }
        let mut seed = 0;
        loop {
            while let Some((c, s, v)) = queue.pop_front() {
                match incoming[c][s] {
                    Some(old) if old == v => continue,
                    Some(_) => {
                        return Err(Error::Diagram(format!(
                            "inconsistent orientation at crossing {}",
                            c + 1
                        )))
                    }
                    None => {}
                }
                incoming[c][s] = Some(v);
                if s == 1 || s == 3 {
                    queue.push_back((c, 4 - s, !v));
                }
                let l = self.crossings[c].slots[s];
                for &(c2, s2) in &occ[&l] {
                    if (c2, s2) != (c, s) {
                        queue.push_back((c2, s2, !v));
                    }
                }
            }
            while seed < n && incoming[seed][3].is_some() {
                seed += 1;
            }
            if seed == n {
                break;
            }
            let [_, b, _, d] = self.crossings[seed].slots;
            let d_in = b == d + 1 || d > b + 1;
            queue.push_back((seed, 3, d_in));
        }
        for (c, inc) in self.crossings.iter_mut().zip(&incoming) {
            c.sign = if inc[3] == Some(true) { 1 } else { -1 };
        }
        Ok(())
    }

    /// Number of link components, free loops included.
    pub fn component_count(&self) -> usize {
        let occ = self.occurrences();
        let mut parent: Vec<usize> = (0..=self.edge_count as usize).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in &self.crossings {
            for (s, t) in [(0, 2), (1, 3)] {
                let a = find(&mut parent, c.slots[s] as usize);
                let b = find(&mut parent, c.slots[t] as usize);
                parent[a] = b;
            }
        }
        let labels: Vec<usize> = occ.keys().map(|&l| l as usize).collect();
        let mut roots: Vec<usize> = labels.iter().map(|&l| find(&mut parent, l)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len() + self.free_loops as usize
    }

    pub fn is_knot(&self) -> bool {
        self.component_count() == 1
    }

    /// Mirror image: every crossing switches over and under.
    pub fn mirror(&self) -> PlanarDiagram {
        let mut m = self.clone();
        for c in &mut m.crossings {
            let [a, b, cc, d] = c.slots;
            c.slots = if c.sign > 0 { [d, a, b, cc] } else { [b, cc, d, a] };
            c.sign = -c.sign;
        }
        m
    }

    /// Reorder crossings; used to test order independence.
    pub fn permuted(&self, order: &[usize]) -> PlanarDiagram {
        let mut m = self.clone();
        m.crossings = order.iter().map(|&i| self.crossings[i]).collect();
        m
    }

    pub fn with_mark(&self, edge: Label) -> PlanarDiagram {
        let mut m = self.clone();
        m.marked_edge = edge;
        m
    }
}

impl fmt::Display for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PD[")?;
        for (i, c) in self.crossings.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let [a, b, cc, d] = c.slots;
            write!(f, "X[{a},{b},{cc},{d}]")?;
        }
        write!(f, "]")
    }
}

struct Scanner<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(s: &'a str) -> Self {
        Scanner { s: s.as_bytes(), pos: 0 }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{tok}' at offset {}", self.pos)))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse(format!("expected integer at offset {start}")))
    }

    fn end(&mut self) -> Result<()> {
        self.ws();
        if self.pos == self.s.len() {
            Ok(())
        } else {
            Err(Error::Parse(format!("trailing input at offset {}", self.pos)))
        }
    }
}

/// Parse `PD[X[a,b,c,d], ...]`. The marked edge defaults to 1.
pub fn parse_pd(text: &str) -> Result<PlanarDiagram> {
    let mut sc = Scanner::new(text);
    sc.expect("PD[")?;
    let mut slots = Vec::new();
    if sc.peek() != Some(b']') {
        loop {
            sc.expect("X[")?;
            let mut x = [0; 4];
            for (k, v) in x.iter_mut().enumerate() {
                if k > 0 {
                    sc.expect(",")?;
                }
                let n = sc.int()?;
                if n < 1 || n > u32::MAX as i64 / 2 {
                    return Err(Error::Parse(format!("edge label {n} out of range")));
                }
                *v = n as Label;
            }
            sc.expect("]")?;
            slots.push(x);
            if sc.peek() == Some(b',') {
                sc.expect(",")?;
            } else {
                break;
            }
        }
    }
    sc.expect("]")?;
    sc.end()?;
    PlanarDiagram::from_slots(&slots, 0)
}

/// Parse `BR[n, {±i, ...}]`.
pub fn parse_braid(text: &str) -> Result<BraidWord> {
    let mut sc = Scanner::new(text);
    sc.expect("BR[")?;
    let n = sc.int()?;
    sc.expect(",")?;
    sc.expect("{")?;
    let mut letters = Vec::new();
    if sc.peek() != Some(b'}') {
        loop {
            letters.push(sc.int()? as i32);
            if sc.peek() == Some(b',') {
                sc.expect(",")?;
            } else {
                break;
            }
        }
    }
    sc.expect("}")?;
    sc.expect("]")?;
    sc.end()?;
    if n < 1 {
        return Err(Error::Parse("strand count must be positive".into()));
    }
    Ok(BraidWord { strand_count: n as u32, letters })
}

/// Closure of a braid. A positive letter `i` is a positive crossing where
/// strand `i` passes over strand `i+1`.
pub fn braid_to_pd(word: &BraidWord) -> Result<PlanarDiagram> {
    let m = word.strand_count as usize;
    if m == 0 {
        return Err(Error::Diagram("braid has no strands".into()));
    }
    for &l in &word.letters {
        if l == 0 || l.unsigned_abs() as usize >= m {
            return Err(Error::Diagram(format!("generator {l} out of range for {m} strands")));
        }
    }
    let mut next = m as Label;
    let mut cur: Vec<Label> = (0..m as Label).collect();
    let mut raw = Vec::new();
    for &l in &word.letters {
        let i = l.unsigned_abs() as usize - 1;
        let (sw, se) = (cur[i], cur[i + 1]);
        let (nw, ne) = (next, next + 1);
        next += 2;
        // counterclockwise from the incoming under-strand
        raw.push(if l > 0 { [se, ne, nw, sw] } else { [sw, se, ne, nw] });
        cur[i] = nw;
        cur[i + 1] = ne;
    }
    // closing identifies the top of each position with its bottom
    let mut rename: Vec<Label> = (0..next).collect();
    for (k, &top) in cur.iter().enumerate() {
        rename[top as usize] = k as Label;
    }
    let free = (0..m).filter(|&k| cur[k] == k as Label).count() as u32;
    // relabel 1..E in order of first appearance
    let mut fresh: BTreeMap<Label, Label> = BTreeMap::new();
    let slots: Vec<[Label; 4]> = raw
        .iter()
        .map(|x| {
            x.map(|l| {
                let r = rename[l as usize];
                let k = fresh.len() as Label + 1;
                *fresh.entry(r).or_insert(k)
            })
        })
        .collect();
    PlanarDiagram::from_slots(&slots, free)
}

/// Split the marked edge: the occurrence entering a crossing becomes label 0.
pub fn cut_open(d: &PlanarDiagram, edge: Label) -> Result<PlanarDiagram> {
    if d.open {
        return Err(Error::Diagram("diagram is already cut open".into()));
    }
    let mut m = d.clone();
    m.open = true;
    m.marked_edge = edge;
    if d.crossings.is_empty() {
        if edge != 1 {
            return Err(Error::Diagram(format!("edge {edge} not found")));
        }
        m.free_loops -= 1;
        return Ok(m);
    }
    if edge < 1 || edge > d.edge_count {
        return Err(Error::Diagram(format!("edge {edge} not found")));
    }
    let inc = d.incoming_slots();
    'outer: for (ci, c) in m.crossings.iter_mut().enumerate() {
        for s in 0..4 {
            if c.slots[s] == edge && inc[ci][s] {
                c.slots[s] = SPECIAL;
                break 'outer;
            }
        }
    }
    Ok(m)
}

impl PlanarDiagram {
    /// Whether each slot is the head end of its edge.
    pub fn incoming_slots(&self) -> Vec<[bool; 4]> {
        self.crossings
            .iter()
            .map(|c| {
                let d_in = c.sign > 0;
                [true, !d_in, false, d_in]
            })
            .collect()
    }

    /// Boundary labels of the partial tangle made of the given crossings.
    fn boundary_of(&self, chosen: &[bool]) -> usize {
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for (c, _) in self.crossings.iter().zip(chosen).filter(|(_, &b)| b) {
            for &l in &c.slots {
                *count.entry(l).or_default() += 1;
            }
        }
        count.values().filter(|&&k| k == 1).count()
    }

    /// Greedy girth-minimizing order. A cut-open diagram starts at the crossing
    /// holding the special endpoint.
    pub fn processing_order(&self) -> Vec<usize> {
        let n = self.crossings.len();
        let mut chosen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        if self.open && n > 0 {
            let first = self
                .crossings
                .iter()
                .position(|c| c.slots.contains(&SPECIAL))
                .expect("cut diagram has a special slot");
            chosen[first] = true;
            order.push(first);
        }
        while order.len() < n {
            let mut best = None;
            for i in 0..n {
                if chosen[i] {
                    continue;
                }
                chosen[i] = true;
                let g = self.boundary_of(&chosen);
                chosen[i] = false;
                if best.map_or(true, |(k, _)| g < k) {
                    best = Some((g, i));
                }
            }
            let (_, i) = best.unwrap();
            chosen[i] = true;
            order.push(i);
        }
        order
    }

    /// Largest boundary size along an order.
    pub fn max_girth(&self, order: &[usize]) -> usize {
        let mut chosen = vec![false; self.crossings.len()];
        let mut best = 0;
        for &i in order {
            chosen[i] = true;
            best = best.max(self.boundary_of(&chosen));
        }
        best
    }
}
