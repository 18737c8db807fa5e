use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::cobalg::{compose_topology, deloop_legs, CobSum, Cobordism, Cycles, Smoothing, Topology};
use crate::error::{Error, Result};

pub type ObjId = usize;
pub type SmId = u32;

#[derive(Clone, Debug)]
pub struct GradedObject {
    pub degree: i32,
    pub q: i32,
    pub smoothing: SmId,
    out: BTreeMap<ObjId, CobSum>,
    inc: BTreeSet<ObjId>,
}

/// Interned smoothings plus cached gluing patterns between them.
#[derive(Default)]
pub struct Smoothings {
    list: Vec<Smoothing>,
    index: HashMap<Smoothing, SmId>,
    compose: HashMap<(SmId, SmId, SmId), Rc<Topology>>,
    cycles: HashMap<(SmId, SmId), Rc<Cycles>>,
}

impl Smoothings {
    pub fn intern(&mut self, s: Smoothing) -> SmId {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.list.len() as SmId;
        self.list.push(s.clone());
        self.index.insert(s, i);
        i
    }

    pub fn get(&self, i: SmId) -> &Smoothing {
        &self.list[i as usize]
    }

    pub fn compose_topology(&mut self, s: SmId, m: SmId, t: SmId) -> Rc<Topology> {
        if let Some(t) = self.compose.get(&(s, m, t)) {
            return t.clone();
        }
        let top = Rc::new(compose_topology(self.get(s), self.get(m), self.get(t)));
        self.compose.insert((s, m, t), top.clone());
        top
    }

    pub fn cycles(&mut self, s: SmId, t: SmId) -> Rc<Cycles> {
        if let Some(c) = self.cycles.get(&(s, t)) {
            return c.clone();
        }
        let c = Rc::new(Cycles::new(self.get(s), self.get(t)));
        self.cycles.insert((s, t), c.clone());
        c
    }

    /// `top ∘ bottom` for `s -> m -> t`.
    pub fn compose(&mut self, top: &CobSum, bottom: &CobSum, s: SmId, m: SmId, t: SmId) -> CobSum {
        if top.is_zero() || bottom.is_zero() {
            return CobSum::zero();
        }
        self.compose_topology(s, m, t).apply(bottom, top)
    }

    /// Drop the gluing caches, keeping the interned smoothings.
    pub fn clear_caches(&mut self) {
        self.compose.clear();
        self.cycles.clear();
    }
}

/// Chain complex over the cobordism category. Objects live in an arena and
/// keep both their outgoing entries and the sources of incoming ones.
#[derive(Default)]
pub struct GeometricComplex {
    pub smoothings: Smoothings,
    objects: Vec<Option<GradedObject>>,
    alive: usize,
}

impl GeometricComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_object(&mut self, degree: i32, q: i32, smoothing: Smoothing) -> ObjId {
        let sm = self.smoothings.intern(smoothing);
        self.add_interned(degree, q, sm)
    }

    pub fn add_interned(&mut self, degree: i32, q: i32, smoothing: SmId) -> ObjId {
        self.objects.push(Some(GradedObject { degree, q, smoothing, out: BTreeMap::new(), inc: BTreeSet::new() }));
        self.alive += 1;
        self.objects.len() - 1
    }

    pub fn object(&self, id: ObjId) -> &GradedObject {
        self.objects[id].as_ref().expect("removed object")
    }

    pub fn is_alive(&self, id: ObjId) -> bool {
        self.objects.get(id).map_or(false, |o| o.is_some())
    }

    pub fn len(&self) -> usize {
        self.alive
    }

    pub fn is_empty(&self) -> bool {
        self.alive == 0
    }

    pub fn ids(&self) -> Vec<ObjId> {
        (0..self.objects.len()).filter(|&i| self.objects[i].is_some()).collect()
    }

    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let degs: Vec<i32> = self.ids().iter().map(|&i| self.object(i).degree).collect();
        Some((*degs.iter().min()?, *degs.iter().max()?))
    }

    pub fn column(&self, degree: i32) -> Vec<ObjId> {
        self.ids().into_iter().filter(|&i| self.object(i).degree == degree).collect()
    }

    pub fn smoothing_of(&self, id: ObjId) -> &Smoothing {
        self.smoothings.get(self.object(id).smoothing)
    }

    pub fn outgoing(&self, id: ObjId) -> impl Iterator<Item = (ObjId, &CobSum)> {
        self.object(id).out.iter().map(|(&k, v)| (k, v))
    }

    pub fn incoming(&self, id: ObjId) -> Vec<ObjId> {
        self.object(id).inc.iter().copied().collect()
    }

    pub fn entry(&self, from: ObjId, to: ObjId) -> Option<&CobSum> {
        self.object(from).out.get(&to)
    }

    pub fn set_entry(&mut self, from: ObjId, to: ObjId, sum: CobSum) {
        if sum.is_zero() {
            self.remove_entry(from, to);
            return;
        }
        self.objects[from].as_mut().unwrap().out.insert(to, sum);
        self.objects[to].as_mut().unwrap().inc.insert(from);
    }

    pub fn add_to_entry(&mut self, from: ObjId, to: ObjId, sum: &CobSum, c: i64) {
        let mut cur = self.entry(from, to).cloned().unwrap_or_default();
        cur.add_scaled(sum, c);
        self.set_entry(from, to, cur);
    }

    pub fn remove_entry(&mut self, from: ObjId, to: ObjId) {
        if let Some(o) = self.objects[from].as_mut() {
            o.out.remove(&to);
        }
        if let Some(o) = self.objects[to].as_mut() {
            o.inc.remove(&from);
        }
    }

    pub fn remove_object(&mut self, id: ObjId) {
        let o = self.objects[id].take().expect("removed object");
        for p in o.inc {
            if let Some(po) = self.objects[p].as_mut() {
                po.out.remove(&id);
            }
        }
        for (d, _) in o.out {
            if let Some(dobj) = self.objects[d].as_mut() {
                dobj.inc.remove(&id);
            }
        }
        self.alive -= 1;
    }

    /// Replace loop `k` of an object by two copies shifted by +1 and -1.
    pub fn deloop(&mut self, id: ObjId, k: usize) -> Result<(ObjId, ObjId)> {
        let o = self.object(id).clone();
        let s = self.smoothings.get(o.smoothing).clone();
        if k >= s.loops.len() {
            return Err(Error::Argument("object has no such loop".into()));
        }
        let legs = deloop_legs(&s, k);
        let t = self.smoothings.intern(s.without_loop(k));
        let plus = self.add_interned(o.degree, o.q + 1, t);
        let minus = self.add_interned(o.degree, o.q - 1, t);
        for &p in &o.inc {
            let f = self.entry(p, id).unwrap().clone();
            let ps = self.object(p).smoothing;
            let a = self.smoothings.compose(&legs.to_plus.sum, &f, ps, o.smoothing, t);
            let b = self.smoothings.compose(&legs.to_minus.sum, &f, ps, o.smoothing, t);
            self.set_entry(p, plus, a);
            self.set_entry(p, minus, b);
        }
        for (&r, g) in &o.out {
            let rs = self.object(r).smoothing;
            let a = self.smoothings.compose(g, &legs.from_plus.sum, t, o.smoothing, rs);
            let b = self.smoothings.compose(g, &legs.from_minus.sum, t, o.smoothing, rs);
            self.set_entry(plus, r, a);
            self.set_entry(minus, r, b);
        }
        self.remove_object(id);
        Ok((plus, minus))
    }

    /// Deloop until no object carries a loop.
    pub fn deloop_all(&mut self) -> Result<()> {
        let mut work: Vec<ObjId> = self.ids();
        while let Some(id) = work.pop() {
            if !self.is_alive(id) || self.smoothing_of(id).loops.is_empty() {
                continue;
            }
            let (a, b) = self.deloop(id, 0)?;
            work.push(a);
            work.push(b);
        }
        Ok(())
    }

    /// `±1` when the entry is plus or minus an identity.
    pub fn invertible_sign(&self, from: ObjId, to: ObjId) -> Option<i64> {
        let (a, b) = (self.object(from), self.object(to));
        if a.smoothing != b.smoothing || a.q != b.q || !self.smoothings.get(a.smoothing).loops.is_empty() {
            return None;
        }
        match self.entry(from, to)?.as_monomial() {
            Some((c, 0)) if c == 1 || c == -1 => Some(c),
            _ => None,
        }
    }

    /// Cancel an invertible entry `b1 -> b2`, updating the remaining
    /// differential to `ε - γ φ⁻¹ δ`. Returns the sources whose rows changed.
    pub fn gaussian_eliminate(&mut self, b1: ObjId, b2: ObjId) -> Result<Vec<ObjId>> {
        let sign = self
            .invertible_sign(b1, b2)
            .ok_or_else(|| Error::Argument("entry is not invertible".into()))?;
        let mid = self.object(b1).smoothing;
        let deltas: Vec<(ObjId, CobSum)> = self
            .incoming(b2)
            .into_iter()
            .filter(|&c| c != b1)
            .map(|c| (c, self.entry(c, b2).unwrap().clone()))
            .collect();
        let gammas: Vec<(ObjId, CobSum)> = self
            .outgoing(b1)
            .filter(|&(d, _)| d != b2)
            .map(|(d, g)| (d, g.clone()))
            .collect();
        for (c, delta) in &deltas {
            let cs = self.object(*c).smoothing;
            for (d, gamma) in &gammas {
                let ds = self.object(*d).smoothing;
                let corr = self.smoothings.compose(gamma, delta, cs, mid, ds);
                self.add_to_entry(*c, *d, &corr, -sign);
            }
        }
        self.remove_object(b1);
        self.remove_object(b2);
        Ok(deltas.into_iter().map(|(c, _)| c).collect())
    }

    /// Cancel invertible entries until none is left.
    pub fn eliminate_all(&mut self) -> Result<usize> {
        let mut work: BTreeSet<ObjId> = self.ids().into_iter().collect();
        let mut count = 0;
        while let Some(o) = work.pop_first() {
            if !self.is_alive(o) {
                continue;
            }
            let target = self.outgoing(o).map(|(d, _)| d).find(|&d| self.invertible_sign(o, d).is_some());
            if let Some(d) = target {
                let touched = self.gaussian_eliminate(o, d)?;
                work.extend(touched);
                count += 1;
            }
        }
        Ok(count)
    }

    /// Exact check of `d∘d = 0` and of degree-0 entries.
    pub fn verify(&mut self) -> Result<()> {
        for id in self.ids() {
            let o = self.object(id).clone();
            for (&t, f) in &o.out {
                let to = self.object(t).clone();
                if to.degree != o.degree + 1 {
                    return Err(Error::Assertion(format!("entry {id}->{t} does not raise degree by one")));
                }
                let cy = self.smoothings.cycles(o.smoothing, to.smoothing);
                match f.degree(&cy) {
                    Some(d) if d + to.q - o.q == 0 => {}
                    _ => {
                        return Err(Error::Assertion(format!(
                            "entry {id}->{t} at homological degree {} is not of degree 0",
                            o.degree
                        )))
                    }
                }
            }
            let mut two: BTreeMap<ObjId, CobSum> = BTreeMap::new();
            for (&m, f) in &o.out {
                let mo = self.object(m).clone();
                for (&t, g) in &mo.out {
                    let ts = self.object(t).smoothing;
                    let c = self.smoothings.compose(g, f, o.smoothing, mo.smoothing, ts);
                    two.entry(t).or_default().add_scaled(&c, 1);
                }
            }
            if let Some((t, _)) = two.iter().find(|(_, s)| !s.is_zero()) {
                return Err(Error::Assertion(format!(
                    "d∘d is nonzero from object {id} to {t} at homological degree {}",
                    o.degree
                )));
            }
        }
        Ok(())
    }

    /// An entry together with its boundary smoothings.
    pub fn cobordism(&self, from: ObjId, to: ObjId) -> Option<Cobordism> {
        Some(Cobordism {
            source: self.smoothing_of(from).clone(),
            target: self.smoothing_of(to).clone(),
            sum: self.entry(from, to)?.clone(),
        })
    }
}
