use std::collections::HashMap;
use std::rc::Rc;

use super::geometric::{GeometricComplex, ObjId, SmId};
use super::universal::{Monomial, UniversalComplex};
use crate::cobalg::{evaluate_sum, glue_topology, CobSum, RawComp, Smoothing, Topology};
use crate::diagram::{cut_open, Crossing, Label, PlanarDiagram, SPECIAL};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Abort when a homological degree holds more objects than this.
    pub size_limit: usize,
    /// Crossing order; defaults to the girth heuristic.
    pub order: Option<Vec<usize>>,
    /// Check `d∘d = 0` after every crossing.
    pub verify_steps: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { size_limit: 20_000, order: None, verify_steps: false }
    }
}

fn opened(d: &PlanarDiagram) -> Result<PlanarDiagram> {
    if d.open {
        Ok(d.clone())
    } else {
        cut_open(d, d.marked_edge)
    }
}

fn shifts(c: &Crossing, x: u8) -> (i32, i32) {
    let x = x as i32;
    if c.sign > 0 {
        (x, x + 1)
    } else {
        (x - 1, x - 2)
    }
}

fn check_size(c: &GeometricComplex, limit: usize) -> Result<()> {
    let mut per: HashMap<i32, usize> = HashMap::new();
    for id in c.ids() {
        let n = per.entry(c.object(id).degree).or_default();
        *n += 1;
        if *n > limit {
            return Err(Error::SizeLimit(format!(
                "more than {limit} objects at homological degree {}",
                c.object(id).degree
            )));
        }
    }
    Ok(())
}

type GlueKey = (SmId, SmId, u8, u8);

/// Tensor the complex with one crossing.
fn glue_crossing(old: &GeometricComplex, c: &Crossing) -> GeometricComplex {
    let mut new = GeometricComplex::new();
    let mut objects: HashMap<ObjId, [ObjId; 2]> = HashMap::new();
    let mut glued: HashMap<GlueKey, Rc<(SmId, SmId, Topology)>> = HashMap::new();
    let mut glue = |new: &mut GeometricComplex, s: SmId, t: SmId, x: u8, y: u8| {
        glued
            .entry((s, t, x, y))
            .or_insert_with(|| {
                let g = glue_topology(
                    old.smoothings.get(s),
                    old.smoothings.get(t),
                    &Crossing::pairs(x),
                    &Crossing::pairs(y),
                    &c.slots,
                );
                let src = new.smoothings.intern(g.source);
                let tgt = new.smoothings.intern(g.target);
                Rc::new((src, tgt, g.topology))
            })
            .clone()
    };
    let unit = CobSum::scalar(1, 0);
    for id in old.ids() {
        let o = old.object(id);
        let mut pair = [0; 2];
        for x in 0..2u8 {
            let g = glue(&mut new, o.smoothing, o.smoothing, x, x);
            let (dd, dq) = shifts(c, x);
            pair[x as usize] = new.add_interned(o.degree + dd, o.q + dq, g.0);
        }
        objects.insert(id, pair);
    }
    for id in old.ids() {
        let o = old.object(id);
        let [a0, a1] = objects[&id];
        for (t, f) in old.outgoing(id) {
            let [b0, b1] = objects[&t];
            let ts = old.object(t).smoothing;
            for (x, a, b) in [(0u8, a0, b0), (1, a1, b1)] {
                let g = glue(&mut new, o.smoothing, ts, x, x);
                new.set_entry(a, b, g.2.apply(f, &unit));
            }
        }
        let g = glue(&mut new, o.smoothing, o.smoothing, 0, 1);
        let sign = if o.degree.rem_euclid(2) == 0 { 1 } else { -1 };
        new.set_entry(a0, a1, g.2.apply(&unit, &unit).scaled(sign, 0));
    }
    new
}

/// Read off a complex of bare special lines.
pub fn to_universal(c: &GeometricComplex, end: Label) -> Result<UniversalComplex> {
    let line = Smoothing::special_line(end);
    let mut u = UniversalComplex::default();
    let mut index = HashMap::new();
    for id in c.ids() {
        if *c.smoothing_of(id) != line {
            return Err(Error::Assertion(format!("object {id} is not a special line: {}", c.smoothing_of(id))));
        }
        let o = c.object(id);
        index.insert(id, u.add_line(o.degree, o.q));
    }
    for id in c.ids() {
        for (t, f) in c.outgoing(id) {
            let (coeff, power) = f
                .as_monomial()
                .ok_or_else(|| Error::Assertion(format!("entry {id}->{t} is not a monomial: {f}")))?;
            u.set(index[&id], index[&t], Monomial::new(coeff, power));
        }
    }
    Ok(u)
}

/// Crossing-by-crossing construction: glue, deloop, eliminate.
pub fn build_universal(d: &PlanarDiagram, opts: &BuildOptions) -> Result<UniversalComplex> {
    let d = opened(d)?;
    let end = if d.crossings.is_empty() { 1 } else { d.marked_edge };
    let mut c = GeometricComplex::new();
    if d.crossings.is_empty() {
        c.add_object(0, 0, Smoothing::special_line(end));
    } else {
        c.add_object(0, 0, Smoothing::default());
    }
    let order = opts.order.clone().unwrap_or_else(|| d.processing_order());
    if order.len() != d.crossings.len() {
        return Err(Error::Argument("crossing order has the wrong length".into()));
    }
    for &i in &order {
        let x = d.crossings.get(i).ok_or_else(|| Error::Argument(format!("no crossing {i}")))?;
        c = glue_crossing(&c, x);
        check_size(&c, 2 * opts.size_limit)?;
        c.deloop_all()?;
        c.eliminate_all()?;
        check_size(&c, opts.size_limit)?;
        if opts.verify_steps {
            c.verify()?;
        }
    }
    let mut u = to_universal(&c, end)?;
    for _ in 0..d.free_loops {
        u = u.with_free_loop();
    }
    Ok(u)
}

/// Smoothing of one cube vertex. Free loops get labels above every edge.
fn vertex_smoothing(d: &PlanarDiagram, state: u64, end: Label) -> Smoothing {
    let n = d.crossings.len();
    let mut occ: HashMap<Label, Vec<usize>> = HashMap::new();
    for (i, c) in d.crossings.iter().enumerate() {
        for s in 0..4 {
            occ.entry(c.slots[s]).or_default().push(4 * i + s);
        }
    }
    let label = |v: usize| d.crossings[v / 4].slots[v % 4];
    let inside = |v: usize| {
        let x = ((state >> (v / 4)) & 1) as u8;
        let s = v % 4;
        let [p, q] = Crossing::pairs(x);
        let other = if p.0 == s {
            p.1
        } else if p.1 == s {
            p.0
        } else if q.0 == s {
            q.1
        } else {
            q.0
        };
        4 * (v / 4) + other
    };
    let across = |v: usize| -> Option<usize> { occ[&label(v)].iter().copied().find(|&w| w != v) };
    let mut seen = vec![false; 4 * n];
    let mut loops = Vec::new();
    if n > 0 {
        let mut cur = occ[&SPECIAL][0];
        loop {
            seen[cur] = true;
            let p = inside(cur);
            seen[p] = true;
            match across(p) {
                Some(w) => cur = w,
                None => break,
            }
        }
    }
    for start in 0..4 * n {
        if seen[start] {
            continue;
        }
        let mut labels = Vec::new();
        let mut cur = start;
        loop {
            seen[cur] = true;
            let p = inside(cur);
            seen[p] = true;
            labels.push(label(p));
            cur = across(p).expect("closed loop");
            if cur == start {
                break;
            }
        }
        loops.push(labels);
    }
    for k in 0..d.free_loops {
        loops.push(vec![d.edge_count + 1 + k]);
    }
    Smoothing::new(vec![(SPECIAL, end)], loops)
}

/// Saddle between adjacent vertices at crossing `j`.
fn saddle(s: &Smoothing, t: &Smoothing, slots: &[Label; 4]) -> CobSum {
    let cy = crate::cobalg::Cycles::new(s, t);
    let mut mask = 0u64;
    for &l in slots {
        mask |= 1 << s.loops.iter().position(|lp| lp.contains(&l)).map_or(0, |k| cy.s_loop(k));
        mask |= 1 << t.loops.iter().position(|lp| lp.contains(&l)).map_or(0, |k| cy.t_loop(k));
    }
    let mut comps = vec![RawComp { cycles: mask, genus: 0, dots: 0 }];
    if mask & 1 == 0 {
        comps.push(RawComp { cycles: 1, genus: 0, dots: 0 });
    }
    for (k, lp) in s.loops.iter().enumerate() {
        if mask >> cy.s_loop(k) & 1 == 1 {
            continue;
        }
        let m = t.loops.iter().position(|x| x == lp).expect("untouched loop survives");
        comps.push(RawComp { cycles: 1 << cy.s_loop(k) | 1 << cy.t_loop(m), genus: 0, dots: 0 });
    }
    evaluate_sum(cy.special, &comps)
}

/// The full cube of resolutions, with no reduction.
pub fn cube(d: &PlanarDiagram, max_crossings: usize) -> Result<GeometricComplex> {
    let d = opened(d)?;
    let n = d.crossings.len();
    if n > max_crossings {
        return Err(Error::SizeLimit(format!("cube of {n} crossings exceeds the limit of {max_crossings}")));
    }
    let end = if n == 0 { 1 } else { d.marked_edge };
    let (np, nm) = (d.n_plus() as i32, d.n_minus() as i32);
    let mut c = GeometricComplex::new();
    let mut ids = Vec::with_capacity(1 << n);
    let mut sms = Vec::with_capacity(1 << n);
    for state in 0..1u64 << n {
        let h = state.count_ones() as i32;
        let s = vertex_smoothing(&d, state, end);
        ids.push(c.add_object(h - nm, h + np - 2 * nm, s.clone()));
        sms.push(s);
    }
    for state in 0..1u64 << n {
        for j in 0..n {
            if state >> j & 1 == 1 {
                continue;
            }
            let t = state | 1 << j;
            let below = (state & ((1 << j) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1 } else { -1 };
            let f = saddle(&sms[state as usize], &sms[t as usize], &d.crossings[j].slots).scaled(sign, 0);
            c.set_entry(ids[state as usize], ids[t as usize], f);
        }
    }
    Ok(c)
}

/// The cube with every loop delooped and nothing eliminated.
pub fn cube_universal(d: &PlanarDiagram, max_crossings: usize) -> Result<UniversalComplex> {
    let mut c = cube(d, max_crossings)?;
    c.deloop_all()?;
    let end = if d.crossings.is_empty() { 1 } else { d.marked_edge };
    to_universal(&c, end)
}
