//! Abstract surfaces and the closed-form reduction formulas, used to check
//! the relation engine independently of composition.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cobsum::{evaluate_sum, RawComp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceComponent {
    pub genus: u32,
    pub circles: Vec<u32>,
    pub special: bool,
}

/// A union of surfaces. Circle ids are distinct across components; the
/// special circle, if any, is the first circle of the special component.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SurfaceSpec {
    pub components: Vec<SurfaceComponent>,
}

/// Generators over `Z[1/2, T]`: the set of circles carrying a handle and a power of T.
pub type QSum = BTreeMap<(Vec<u32>, u32), Rational64>;

/// Generators over `Z[H]`: circles attached to the special component and a power of H.
pub type ZSum = BTreeMap<(Vec<u32>, u32), i64>;

fn odd(n: u32) -> i64 {
    (n % 2) as i64
}

fn add_q(out: &mut QSum, key: (Vec<u32>, u32), c: Rational64) {
    if c == Rational64::from_integer(0) {
        return;
    }
    let e = out.entry(key.clone()).or_insert_with(|| Rational64::from_integer(0));
    *e += c;
    if *e == Rational64::from_integer(0) {
        out.remove(&key);
    }
}

fn add_z(out: &mut ZSum, key: (Vec<u32>, u32), c: i64) {
    if c == 0 {
        return;
    }
    let e = out.entry(key.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        out.remove(&key);
    }
}

fn merge_keys(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

/// Reduction of one component over `Z[1/2, T]`.
fn reduce_component_q(c: &SurfaceComponent) -> QSum {
    let n = c.circles.len();
    let g = c.genus;
    let mut out = QSum::new();
    if n == 0 {
        let v = 2 * odd(g);
        add_q(&mut out, (vec![], g / 2), Rational64::from_integer(v));
        return out;
    }
    let scale = Rational64::new(1, 1 << (n - 1));
    for bits in 0u32..(1 << n) {
        let z = n as u32 - bits.count_ones();
        if odd(g + z) == 0 {
            continue;
        }
        let handled: Vec<u32> = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| c.circles[i]).collect();
        add_q(&mut out, (handled, (g + z) / 2), scale);
    }
    out
}

pub fn reduce_surface_q(s: &SurfaceSpec) -> QSum {
    let mut acc = QSum::new();
    acc.insert((vec![], 0), Rational64::from_integer(1));
    for c in &s.components {
        let r = reduce_component_q(c);
        let mut next = QSum::new();
        for ((ka, ta), ca) in &acc {
            for ((kb, tb), cb) in &r {
                add_q(&mut next, (merge_keys(ka, kb), ta + tb), ca * cb);
            }
        }
        acc = next;
    }
    acc
}

/// Reduction of one component over `Z[H]`, applying the special-component,
/// genus and neck formulas in turn. Closed components become scalars.
fn reduce_component_z(c: &SurfaceComponent) -> ZSum {
    let mut out = ZSum::new();
    let g = c.genus;
    if c.special {
        add_z(&mut out, (c.circles[1..].to_vec(), g), 1);
        return out;
    }
    if c.circles.is_empty() {
        if g % 2 == 1 {
            add_z(&mut out, (vec![], g - 1), 2);
        }
        return out;
    }
    let alpha = &c.circles;
    if g >= 1 && g % 2 == 1 {
        add_z(&mut out, (alpha.clone(), g - 1), 2);
    }
    let sign = if g % 2 == 0 { 1 } else { -1 };
    // neck reduction of the genus-zero part
    let n = alpha.len();
    for bits in 0u32..(1 << n) {
        let k = bits.count_ones() as usize;
        if k == n {
            continue;
        }
        let e = (n - k - 1) as u32;
        let beta: Vec<u32> = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| alpha[i]).collect();
        let c = if e % 2 == 0 { sign } else { -sign };
        add_z(&mut out, (beta, g + e), c);
    }
    out
}

pub fn reduce_surface_z(s: &SurfaceSpec) -> Option<ZSum> {
    if !s.components.iter().any(|c| c.special && !c.circles.is_empty()) {
        return None;
    }
    let mut acc = ZSum::new();
    acc.insert((vec![], 0), 1);
    for c in &s.components {
        let r = reduce_component_z(c);
        let mut next = ZSum::new();
        for ((ka, ha), ca) in &acc {
            for ((kb, hb), cb) in &r {
                add_z(&mut next, (merge_keys(ka, kb), ha + hb), ca * cb);
            }
        }
        acc = next;
    }
    Some(acc)
}

/// The same surface pushed through the composition evaluator. Circles are
/// renumbered so that the special circle is cycle 0.
pub fn evaluate_surface(s: &SurfaceSpec) -> Option<ZSum> {
    let sp = s.components.iter().find(|c| c.special && !c.circles.is_empty())?;
    let mut ids: Vec<u32> = vec![sp.circles[0]];
    let mut rest: Vec<u32> = s.components.iter().flat_map(|c| c.circles.iter().copied()).collect();
    rest.sort_unstable();
    rest.retain(|&x| x != sp.circles[0]);
    ids.extend(rest);
    let bit = |x: u32| 1u64 << ids.iter().position(|&y| y == x).unwrap();
    let comps: Vec<RawComp> = s
        .components
        .iter()
        .map(|c| RawComp { cycles: c.circles.iter().map(|&x| bit(x)).fold(0, |a, b| a | b), genus: c.genus, dots: 0 })
        .collect();
    let sum = evaluate_sum(true, &comps);
    let mut out = ZSum::new();
    for t in sum.terms {
        let attached: Vec<u32> = (0..64).filter(|b| t.mask >> b & 1 == 1).map(|b| ids[b]).collect();
        let mut attached = attached;
        attached.sort_unstable();
        add_z(&mut out, (attached, t.h), t.coeff);
    }
    Some(out)
}

/// Map a `Z[1/2,T]` reduction into `Z[1/2][H]` with `T = H^2`, a handle on the
/// special circle being `H` and elsewhere `2*dot - H`.
pub fn q_to_h(s: &SurfaceSpec, q: &QSum) -> BTreeMap<(Vec<u32>, u32), Rational64> {
    let special = s.components.iter().find(|c| c.special).and_then(|c| c.circles.first().copied());
    let mut out: BTreeMap<(Vec<u32>, u32), Rational64> = BTreeMap::new();
    for ((handled, t), c) in q {
        let mut terms: Vec<(BTreeSet<u32>, u32, Rational64)> = vec![(BTreeSet::new(), 2 * t, *c)];
        for &x in handled {
            if Some(x) == special {
                for tt in &mut terms {
                    tt.1 += 1;
                }
                continue;
            }
            let mut next = Vec::new();
            for (set, h, k) in terms {
                let mut s2 = set.clone();
                s2.insert(x);
                next.push((s2, h, k * 2));
                next.push((set, h + 1, -k));
            }
            terms = next;
        }
        for (set, h, k) in terms {
            let key = (set.into_iter().collect(), h);
            let e = out.entry(key).or_insert_with(|| Rational64::from_integer(0));
            *e += k;
        }
    }
    out.retain(|_, v| *v != Rational64::from_integer(0));
    out
}

pub fn z_to_rational(z: &ZSum) -> BTreeMap<(Vec<u32>, u32), Rational64> {
    z.iter().map(|(k, &v)| (k.clone(), Rational64::from_integer(v))).collect()
}

/// Add a tube between two sites, each given as a component index.
pub fn tube(s: &SurfaceSpec, i: usize, j: usize) -> SurfaceSpec {
    let mut out = s.clone();
    if i == j {
        out.components[i].genus += 1;
        return out;
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let b = out.components.remove(hi);
    let a = &mut out.components[lo];
    a.genus += b.genus;
    if b.special {
        let mut circles = b.circles;
        circles.extend(a.circles.iter().copied());
        a.circles = circles;
        a.special = true;
    } else {
        a.circles.extend(b.circles);
    }
    out
}

/// Dotted neck cutting of component `k` separating the circles `left` from
/// the rest, with genus split `(g1, g2)`. Returns the three summands
/// `(dots on the two sides, extra H power, coefficient)`.
pub fn neck_cut(
    s: &SurfaceSpec,
    k: usize,
    left: &[u32],
    g1: u32,
) -> Vec<(Vec<RawComp>, u32, i64)> {
    let c = &s.components[k];
    let right_genus = c.genus - g1;
    let ids: Vec<u32> = {
        let mut v: Vec<u32> = s.components.iter().flat_map(|c| c.circles.iter().copied()).collect();
        v.sort_unstable();
        v
    };
    let bit = |x: u32| 1u64 << ids.iter().position(|&y| y == x).unwrap();
    let lmask: u64 = left.iter().map(|&x| bit(x)).fold(0, |a, b| a | b);
    let all: u64 = c.circles.iter().map(|&x| bit(x)).fold(0, |a, b| a | b);
    let others: Vec<RawComp> = s
        .components
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, c)| RawComp { cycles: c.circles.iter().map(|&x| bit(x)).fold(0, |a, b| a | b), genus: c.genus, dots: 0 })
        .collect();
    let side = |dl: u32, dr: u32| {
        let mut v = others.clone();
        v.push(RawComp { cycles: lmask, genus: g1, dots: dl });
        v.push(RawComp { cycles: all & !lmask, genus: right_genus, dots: dr });
        v
    };
    vec![(side(1, 0), 0, 1), (side(0, 1), 0, 1), (side(0, 0), 1, -1)]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationKind {
    NeckCutting,
    FourTube,
    ThreeSphere,
}

#[derive(Clone, Debug)]
pub struct RelationFailure {
    pub kind: RelationKind,
    pub surface: SurfaceSpec,
    pub sites: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct RelationReport {
    pub neck_cutting: usize,
    pub four_tube: usize,
    pub three_sphere: usize,
}

pub fn random_surface(rng: &mut impl Rng, with_special: bool) -> SurfaceSpec {
    let ncomp = rng.gen_range(1..=4);
    let ncirc = rng.gen_range(if with_special { 1 } else { 0 }..=6);
    let mut comps: Vec<SurfaceComponent> = (0..ncomp)
        .map(|_| SurfaceComponent { genus: rng.gen_range(0..=3), circles: vec![], special: false })
        .collect();
    for id in 0..ncirc {
        let k = rng.gen_range(0..ncomp);
        comps[k].circles.push(id as u32);
    }
    if with_special {
        let k = comps.iter().position(|c| !c.circles.is_empty()).unwrap();
        comps[k].special = true;
    }
    SurfaceSpec { components: comps }
}

fn sub_q(a: &QSum, b: &QSum, out: &mut QSum, sa: i64, sb: i64) {
    for (k, v) in a {
        add_q(out, k.clone(), v * sa);
    }
    for (k, v) in b {
        add_q(out, k.clone(), v * sb);
    }
}

/// Randomized check that the reduction formulas kill the local relations:
/// neck cutting over `Z[1/2,T]`, four-tube and three-sphere over `Z[H]`.
pub fn verify_relations(seed: u64, count: usize) -> Result<RelationReport, RelationFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = RelationReport::default();
    for _ in 0..count {
        // NC: Σ_{g1+1}(α)Σ_{g2}(β) + Σ_{g1}(α)Σ_{g2+1}(β) - 2Σ_{g1+g2}(α,β)
        let s = random_surface(&mut rng, false);
        let k = rng.gen_range(0..s.components.len());
        let c = s.components[k].clone();
        let split = rng.gen_range(0..=c.circles.len());
        let g1 = rng.gen_range(0..=c.genus);
        let mut a = s.clone();
        a.components[k] = SurfaceComponent { genus: g1, circles: c.circles[..split].to_vec(), special: false };
        a.components.push(SurfaceComponent { genus: c.genus - g1, circles: c.circles[split..].to_vec(), special: false });
        let mut b = a.clone();
        a.components[k].genus += 1;
        let last = b.components.len() - 1;
        b.components[last].genus += 1;
        let mut total = QSum::new();
        sub_q(&reduce_surface_q(&a), &reduce_surface_q(&b), &mut total, 1, 1);
        sub_q(&QSum::new(), &reduce_surface_q(&s), &mut total, 0, -2);
        if !total.is_empty() {
            return Err(RelationFailure { kind: RelationKind::NeckCutting, surface: s, sites: vec![k] });
        }
        rep.neck_cutting += 1;

        // 4TU: C12 + C34 - C13 - C24, sites on random components; with
        // sites 3 and 4 on the special component this is the 3S1 case
        let s = random_surface(&mut rng, true);
        let n = s.components.len();
        let sp = s.components.iter().position(|c| c.special).unwrap();
        let three = rng.gen_bool(0.5);
        let mut sites: Vec<usize> = (0..4).map(|_| rng.gen_range(0..n)).collect();
        if three {
            sites[2] = sp;
            sites[3] = sp;
        }
        let tu = |i: usize, j: usize| reduce_surface_z(&tube(&s, sites[i], sites[j])).unwrap();
        let mut total = ZSum::new();
        for (sum, c) in [(tu(0, 1), 1), (tu(2, 3), 1), (tu(0, 2), -1), (tu(1, 3), -1)] {
            for (k, v) in sum {
                add_z(&mut total, k, v * c);
            }
        }
        if !total.is_empty() {
            let kind = if three { RelationKind::ThreeSphere } else { RelationKind::FourTube };
            return Err(RelationFailure { kind, surface: s, sites });
        }
        if three {
            rep.three_sphere += 1;
        } else {
            rep.four_tube += 1;
        }
    }
    Ok(rep)
}
