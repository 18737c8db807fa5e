use std::fmt;

use super::smoothing::{Cycles, Smoothing};
use crate::diagram::Label;
use crate::error::{Error, Result};

/// Normal-form generator: one disk on every boundary cycle, dotted on the
/// cycles in `mask`, times `coeff * H^h`. The special cycle is never dotted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub mask: u64,
    pub h: u32,
    pub coeff: i64,
}

/// Integer combination of generators between two fixed smoothings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CobSum {
    pub terms: Vec<Term>,
}

fn mul(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("coefficient overflow")
}

impl CobSum {
    pub fn zero() -> Self {
        CobSum::default()
    }

    /// `c * H^h` times the all-undotted generator.
    pub fn scalar(c: i64, h: u32) -> Self {
        CobSum::from_terms(vec![Term { mask: 0, h, coeff: c }])
    }

    pub fn from_terms(mut terms: Vec<Term>) -> Self {
        terms.sort_unstable_by_key(|t| (t.mask, t.h));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(l) if l.mask == t.mask && l.h == t.h => {
                    l.coeff = l.coeff.checked_add(t.coeff).expect("coefficient overflow")
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0);
        CobSum { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &CobSum, c: i64) {
        if c == 0 || other.is_zero() {
            return;
        }
        let mut v = std::mem::take(&mut self.terms);
        v.extend(other.terms.iter().map(|t| Term { coeff: mul(t.coeff, c), ..*t }));
        *self = CobSum::from_terms(v);
    }

    pub fn scaled(&self, c: i64, dh: u32) -> CobSum {
        if c == 0 {
            return CobSum::zero();
        }
        CobSum {
            terms: self
                .terms
                .iter()
                .map(|t| Term { mask: t.mask, h: t.h + dh, coeff: mul(t.coeff, c) })
                .collect(),
        }
    }

    /// Degree of the sum, None if empty or inhomogeneous.
    pub fn degree(&self, cy: &Cycles) -> Option<i32> {
        let mut it = self.terms.iter().map(|t| cy.degree(t.mask.count_ones(), t.h));
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    /// `Some((c, k))` when the sum is `c * H^k` times the undotted generator.
    pub fn as_monomial(&self) -> Option<(i64, u32)> {
        match self.terms.as_slice() {
            [t] if t.mask == 0 => Some((t.coeff, t.h)),
            _ => None,
        }
    }
}

impl fmt::Display for CobSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} * H^{} * [", t.coeff, t.h)?;
            let dots: Vec<String> = (0..64)
                .filter(|b| t.mask >> b & 1 == 1)
                .map(|b| format!("{b}*"))
                .collect();
            write!(f, "{}]", dots.join(" "))?;
        }
        Ok(())
    }
}

/// A connected surface piece before normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawComp {
    pub cycles: u64,
    pub genus: u32,
    pub dots: u32,
}

/// `X^dots (2X - H)^genus = a*H^n + b*H^(n-1)*X` in `Z[H][X]/(X^2 - HX)`.
pub fn handle_expansion(dots: u32, genus: u32) -> (i64, i64, u32) {
    let (mut a, mut b) = if dots == 0 { (1, 0) } else { (0, 1) };
    for _ in 0..genus {
        (a, b) = (-a, 2 * a + b);
    }
    (a, b, dots + genus)
}

/// Genus-0 replacement of a handled component: list of (dotted, h, coeff).
pub fn handle_relation(genus: u32, dots: u32) -> Vec<(bool, u32, i64)> {
    let (a, b, n) = handle_expansion(dots, genus);
    let mut v = Vec::new();
    if a != 0 {
        v.push((false, n, a));
    }
    if b != 0 {
        v.push((true, n - 1, b));
    }
    v
}

/// Expand one component into generators: (mask, h, coeff).
fn expand(c: &RawComp, special: bool) -> Vec<(u64, u32, i64)> {
    let (a, b, n) = handle_expansion(c.dots, c.genus);
    if c.cycles == 0 {
        // closed: the counit picks the X coefficient
        return if b == 0 { vec![] } else { vec![(0, n - 1, b)] };
    }
    if special && c.cycles & 1 == 1 {
        // a dot on the special component is H, so everything attaches to it
        let s = a + b;
        return if s == 0 { vec![] } else { vec![(c.cycles & !1, n, s)] };
    }
    let nb = c.cycles.count_ones();
    let mut out = Vec::with_capacity(1 << nb);
    if b != 0 {
        out.push((c.cycles, n - 1, b));
    }
    if a != 0 {
        let mut sub = c.cycles;
        loop {
            sub = (sub.wrapping_sub(1)) & c.cycles;
            let k = sub.count_ones();
            let e = nb - 1 - k;
            out.push((sub, n + e, if e % 2 == 0 { a } else { -a }));
            if sub == 0 {
                break;
            }
        }
    }
    out
}

/// Normal form of a disjoint union of components, scaled by `coeff * H^h`.
pub fn evaluate(special: bool, comps: &[RawComp], coeff: i64, h: u32, out: &mut Vec<Term>) {
    let mut acc: Vec<(u64, u32, i64)> = vec![(0, h, coeff)];
    for c in comps {
        let e = expand(c, special);
        if e.is_empty() {
            return;
        }
        if e.len() == 1 {
            let (m, k, x) = e[0];
            for t in &mut acc {
                *t = (t.0 | m, t.1 + k, mul(t.2, x));
            }
        } else {
            let mut next = Vec::with_capacity(acc.len() * e.len());
            for t in &acc {
                for &(m, k, x) in &e {
                    next.push((t.0 | m, t.1 + k, mul(t.2, x)));
                }
            }
            acc = next;
        }
    }
    out.extend(acc.into_iter().map(|(mask, h, coeff)| Term { mask, h, coeff }));
}

pub fn evaluate_sum(special: bool, comps: &[RawComp]) -> CobSum {
    let mut v = Vec::new();
    evaluate(special, comps, 1, 0, &mut v);
    CobSum::from_terms(v)
}

/// Connected components of a glued surface. Pieces `0..na` come from the
/// first surface, `na..` from the second; each piece is a disk on one cycle.
#[derive(Clone, Debug)]
pub struct Topology {
    pub comps: Vec<TopComp>,
    pub special: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct TopComp {
    pub a_mask: u64,
    pub b_mask: u64,
    pub out_mask: u64,
    pub genus: u32,
}

pub struct TopologyBuilder {
    na: usize,
    parent: Vec<usize>,
    chi: Vec<i32>,
}

impl TopologyBuilder {
    pub fn new(na: usize, nb: usize) -> Self {
        TopologyBuilder { na, parent: (0..na + nb).collect(), chi: vec![1; na + nb] }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut x = x;
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Glue two pieces along an interval (`arc`) or along a circle.
    pub fn glue(&mut self, x: usize, y: usize, arc: bool) {
        let (rx, ry) = (self.find(x), self.find(y));
        let d = if arc { 1 } else { 0 };
        if rx == ry {
            self.chi[rx] -= d;
        } else {
            self.parent[rx] = ry;
            self.chi[ry] += self.chi[rx] - d;
        }
    }

    /// `out_piece[c]` is some piece containing output cycle `c`.
    pub fn finish(mut self, out_piece: &[usize], special: bool) -> Topology {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut comps: Vec<(TopComp, i32)> = Vec::new();
        for p in 0..n {
            let r = self.find(p);
            if slot[r] == usize::MAX {
                slot[r] = comps.len();
                let tc = TopComp { a_mask: 0, b_mask: 0, out_mask: 0, genus: 0 };
                comps.push((tc, self.chi[r]));
            }
            let c = &mut comps[slot[r]].0;
            if p < self.na {
                c.a_mask |= 1 << p;
            } else {
                c.b_mask |= 1 << (p - self.na);
            }
        }
        for (i, &p) in out_piece.iter().enumerate() {
            let r = self.find(p);
            comps[slot[r]].0.out_mask |= 1 << i;
        }
        let comps = comps
            .into_iter()
            .map(|(mut c, chi)| {
                let g2 = 2 - chi - c.out_mask.count_ones() as i32;
                assert!(g2 >= 0 && g2 % 2 == 0, "inconsistent Euler characteristic");
                c.genus = (g2 / 2) as u32;
                c
            })
            .collect();
        Topology { comps, special }
    }
}

impl Topology {
    pub fn apply(&self, a: &CobSum, b: &CobSum) -> CobSum {
        let mut out = Vec::new();
        let mut comps: Vec<RawComp> = Vec::with_capacity(self.comps.len());
        for ta in &a.terms {
            for tb in &b.terms {
                comps.clear();
                comps.extend(self.comps.iter().map(|c| RawComp {
                    cycles: c.out_mask,
                    genus: c.genus,
                    dots: (ta.mask & c.a_mask).count_ones() + (tb.mask & c.b_mask).count_ones(),
                }));
                evaluate(self.special, &comps, mul(ta.coeff, tb.coeff), ta.h + tb.h, &mut out);
            }
        }
        CobSum::from_terms(out)
    }
}

/// Gluing pattern of `top ∘ bottom` for `S -> M -> T`.
pub fn compose_topology(s: &Smoothing, m: &Smoothing, t: &Smoothing) -> Topology {
    let sm = Cycles::new(s, m);
    let mt = Cycles::new(m, t);
    let st = Cycles::new(s, t);
    let na = sm.count;
    let mut b = TopologyBuilder::new(na, mt.count);
    for j in 0..m.arcs.len() {
        b.glue(sm.t_arc[j] as usize, na + mt.s_arc[j] as usize, true);
    }
    for k in 0..m.loops.len() {
        b.glue(sm.t_loop(k), na + mt.s_loop(k), false);
    }
    let mut out = vec![usize::MAX; st.count];
    for (i, &c) in st.s_arc.iter().enumerate() {
        if out[c as usize] == usize::MAX {
            out[c as usize] = sm.s_arc[i] as usize;
        }
    }
    for k in 0..s.loops.len() {
        out[st.s_loop(k)] = sm.s_loop(k);
    }
    for k in 0..t.loops.len() {
        out[st.t_loop(k)] = na + mt.t_loop(k);
    }
    b.finish(&out, st.special)
}

/// A cobordism together with its boundary smoothings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cobordism {
    pub source: Smoothing,
    pub target: Smoothing,
    pub sum: CobSum,
}

impl Cobordism {
    pub fn cycles(&self) -> Cycles {
        Cycles::new(&self.source, &self.target)
    }

    pub fn from_comps(source: Smoothing, target: Smoothing, comps: &[RawComp]) -> Self {
        let cy = Cycles::new(&source, &target);
        let sum = evaluate_sum(cy.special, comps);
        Cobordism { source, target, sum }
    }

    pub fn identity(s: &Smoothing) -> Self {
        let cy = Cycles::new(s, s);
        let mut comps: Vec<RawComp> =
            (0..cy.n_arc).map(|c| RawComp { cycles: 1 << c, genus: 0, dots: 0 }).collect();
        for k in 0..s.loops.len() {
            let cycles = 1 << cy.s_loop(k) | 1 << cy.t_loop(k);
            comps.push(RawComp { cycles, genus: 0, dots: 0 });
        }
        Cobordism::from_comps(s.clone(), s.clone(), &comps)
    }

    /// Cap off loop `k` of `s`.
    pub fn cap(s: &Smoothing, k: usize, dotted: bool) -> Self {
        let t = s.without_loop(k);
        let cy = Cycles::new(s, &t);
        let mut comps: Vec<RawComp> =
            (0..cy.n_arc).map(|c| RawComp { cycles: 1 << c, genus: 0, dots: 0 }).collect();
        comps.push(RawComp { cycles: 1 << cy.s_loop(k), genus: 0, dots: dotted as u32 });
        for j in (0..s.loops.len()).filter(|&j| j != k) {
            let jt = if j < k { j } else { j - 1 };
            comps.push(RawComp { cycles: 1 << cy.s_loop(j) | 1 << cy.t_loop(jt), genus: 0, dots: 0 });
        }
        Cobordism::from_comps(s.clone(), t, &comps)
    }

    /// Cup creating loop `k` of `s` from `s` without it.
    pub fn cup(s: &Smoothing, k: usize, dotted: bool) -> Self {
        let src = s.without_loop(k);
        let cy = Cycles::new(&src, s);
        let mut comps: Vec<RawComp> =
            (0..cy.n_arc).map(|c| RawComp { cycles: 1 << c, genus: 0, dots: 0 }).collect();
        comps.push(RawComp { cycles: 1 << cy.t_loop(k), genus: 0, dots: dotted as u32 });
        for j in (0..s.loops.len()).filter(|&j| j != k) {
            let js = if j < k { j } else { j - 1 };
            comps.push(RawComp { cycles: 1 << cy.s_loop(js) | 1 << cy.t_loop(j), genus: 0, dots: 0 });
        }
        Cobordism::from_comps(src, s.clone(), &comps)
    }

    /// `self ∘ bottom`.
    pub fn compose(&self, bottom: &Cobordism) -> Result<Cobordism> {
        if bottom.target != self.source {
            return Err(Error::Argument("boundary mismatch in composition".into()));
        }
        let top = compose_topology(&bottom.source, &self.source, &self.target);
        Ok(Cobordism {
            source: bottom.source.clone(),
            target: self.target.clone(),
            sum: top.apply(&bottom.sum, &self.sum),
        })
    }

    pub fn add(&self, other: &Cobordism, c: i64) -> Cobordism {
        assert_eq!((&self.source, &self.target), (&other.source, &other.target));
        let mut s = self.clone();
        s.sum.add_scaled(&other.sum, c);
        s
    }

    pub fn scaled(&self, c: i64, dh: u32) -> Cobordism {
        Cobordism { sum: self.sum.scaled(c, dh), ..self.clone() }
    }

    pub fn degree(&self) -> Option<i32> {
        self.sum.degree(&self.cycles())
    }
}

/// The four delooping maps for loop `k` of `s`: the projections to the
/// copies shifted by +1 and -1, and the inclusions back.
pub struct DeloopLegs {
    pub to_plus: Cobordism,
    pub to_minus: Cobordism,
    pub from_plus: Cobordism,
    pub from_minus: Cobordism,
}

pub fn deloop_legs(s: &Smoothing, k: usize) -> DeloopLegs {
    let cup = Cobordism::cup(s, k, false);
    let dot_cup = Cobordism::cup(s, k, true);
    DeloopLegs {
        to_plus: Cobordism::cap(s, k, true),
        to_minus: Cobordism::cap(s, k, false),
        from_plus: cup.clone(),
        from_minus: dot_cup.add(&cup.scaled(1, 1), -1),
    }
}

/// Where a piece of a horizontally glued smoothing came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    LeftArc(usize),
    LeftLoop(usize),
    RightArc(usize),
}

/// Glue `left` to a crossing smoothing given on slots `0..4` with edge labels
/// `slots`. Labels shared between the two, or repeated within the slots, are
/// joined and disappear from the boundary.
pub fn glue_smoothings(
    left: &Smoothing,
    right: &[(usize, usize)],
    slots: &[Label; 4],
) -> (Smoothing, Vec<Origin>, Vec<Origin>) {
    let pts = left.points();
    let na = pts.len();
    let n = na + 4;
    let label = |x: usize| if x < na { pts[x] } else { slots[x - na] };
    let mut arc = vec![(0usize, Origin::LeftArc(0)); n];
    for (i, &(a, b)) in left.arcs.iter().enumerate() {
        let (x, y) = (pts.binary_search(&a).unwrap(), pts.binary_search(&b).unwrap());
        arc[x] = (y, Origin::LeftArc(i));
        arc[y] = (x, Origin::LeftArc(i));
    }
    for (j, &(a, b)) in right.iter().enumerate() {
        arc[na + a] = (na + b, Origin::RightArc(j));
        arc[na + b] = (na + a, Origin::RightArc(j));
    }
    let mut glue: Vec<Option<usize>> = vec![None; n];
    for s in 0..4 {
        let l = slots[s];
        if let Ok(x) = pts.binary_search(&l) {
            glue[x] = Some(na + s);
            glue[na + s] = Some(x);
        } else if let Some(s2) = (0..4).find(|&s2| s2 != s && slots[s2] == l) {
            glue[na + s] = Some(na + s2);
        }
    }
    let mut seen = vec![false; n];
    let mut arcs = Vec::new();
    for start in 0..n {
        if seen[start] || glue[start].is_some() {
            continue;
        }
        let mut cur = start;
        let mut origin = None;
        let end = loop {
            seen[cur] = true;
            let (nxt, o) = arc[cur];
            origin.get_or_insert(o);
            seen[nxt] = true;
            match glue[nxt] {
                None => break nxt,
                Some(z) => cur = z,
            }
        };
        let (a, b) = (label(start), label(end));
        arcs.push(((a.min(b), a.max(b)), origin.unwrap()));
    }
    let mut loops: Vec<(Vec<Label>, Origin)> = left
        .loops
        .iter()
        .enumerate()
        .map(|(k, l)| (l.clone(), Origin::LeftLoop(k)))
        .collect();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cur = start;
        let mut labels = Vec::new();
        let origin = arc[start].1;
        loop {
            seen[cur] = true;
            let nxt = arc[cur].0;
            seen[nxt] = true;
            labels.push(label(nxt));
            cur = glue[nxt].unwrap();
            if cur == start {
                break;
            }
        }
        labels.sort_unstable();
        labels.dedup();
        loops.push((labels, origin));
    }
    arcs.sort_by_key(|a| a.0);
    loops.sort_by(|a, b| a.0.cmp(&b.0));
    let s = Smoothing {
        arcs: arcs.iter().map(|a| a.0).collect(),
        loops: loops.iter().map(|l| l.0.clone()).collect(),
    };
    (s, arcs.into_iter().map(|a| a.1).collect(), loops.into_iter().map(|l| l.1).collect())
}

/// Result of gluing a cobordism `S -> S'` with a crossing cobordism `C -> C'`.
#[derive(Clone, Debug)]
pub struct Glued {
    pub source: Smoothing,
    pub target: Smoothing,
    pub topology: Topology,
}

fn local(pairs: &[(usize, usize)]) -> Smoothing {
    Smoothing::new(pairs.iter().map(|&(a, b)| (a as Label, b as Label)).collect(), vec![])
}

pub fn glue_topology(
    s: &Smoothing,
    s2: &Smoothing,
    c: &[(usize, usize)],
    c2: &[(usize, usize)],
    slots: &[Label; 4],
) -> Glued {
    let (ns, src_arc, src_loop) = glue_smoothings(s, c, slots);
    let (nt, _, tgt_loop) = glue_smoothings(s2, c2, slots);
    let ca = Cycles::new(s, s2);
    let (lc, lc2) = (local(c), local(c2));
    let cb = Cycles::new(&lc, &lc2);
    let na = ca.count;
    let mut b = TopologyBuilder::new(na, cb.count);
    let mut joined = [false; 4];
    for sl in 0..4 {
        let l = slots[sl];
        let bp = na + cb.of_point(&lc, sl as Label);
        if s.arc_of(l).is_some() {
            b.glue(ca.of_point(s, l), bp, true);
        } else if !joined[sl] {
            if let Some(s3) = (sl + 1..4).find(|&s3| slots[s3] == l) {
                joined[s3] = true;
                b.glue(bp, na + cb.of_point(&lc, s3 as Label), true);
            }
        }
    }
    let cn = Cycles::new(&ns, &nt);
    let piece = |o: Origin, source_side: bool| -> usize {
        match o {
            Origin::LeftArc(i) => {
                if source_side {
                    ca.s_arc[i] as usize
                } else {
                    ca.t_arc[i] as usize
                }
            }
            Origin::LeftLoop(k) => {
                if source_side {
                    ca.s_loop(k)
                } else {
                    ca.t_loop(k)
                }
            }
            Origin::RightArc(j) => {
                na + if source_side { cb.s_arc[j] } else { cb.t_arc[j] } as usize
            }
        }
    };
    let mut out = vec![usize::MAX; cn.count];
    for (i, &cyc) in cn.s_arc.iter().enumerate() {
        if out[cyc as usize] == usize::MAX {
            out[cyc as usize] = piece(src_arc[i], true);
        }
    }
    for (k, &o) in src_loop.iter().enumerate() {
        out[cn.s_loop(k)] = piece(o, true);
    }
    for (k, &o) in tgt_loop.iter().enumerate() {
        out[cn.t_loop(k)] = piece(o, false);
    }
    Glued { source: ns, target: nt, topology: b.finish(&out, cn.special) }
}
