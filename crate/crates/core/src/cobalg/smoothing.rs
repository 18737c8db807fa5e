use std::fmt;

use crate::diagram::{Label, SPECIAL};

/// Crossingless tangle: arcs between boundary points plus closed loops.
/// Loops remember the edge labels they pass through so that equal loops
/// in source and target can be matched.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Smoothing {
    pub arcs: Vec<(Label, Label)>,
    pub loops: Vec<Vec<Label>>,
}

impl Smoothing {
    pub fn new(mut arcs: Vec<(Label, Label)>, mut loops: Vec<Vec<Label>>) -> Self {
        for a in &mut arcs {
            if a.0 > a.1 {
                *a = (a.1, a.0);
            }
        }
        arcs.sort_unstable();
        for l in &mut loops {
            l.sort_unstable();
        }
        loops.sort();
        Smoothing { arcs, loops }
    }

    /// The special line from 0 to `end`.
    pub fn special_line(end: Label) -> Self {
        Smoothing::new(vec![(SPECIAL, end)], vec![])
    }

    pub fn points(&self) -> Vec<Label> {
        let mut p: Vec<Label> = self.arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
        p.sort_unstable();
        p
    }

    pub fn has_special(&self) -> bool {
        self.arcs.first().map_or(false, |a| a.0 == SPECIAL)
    }

    pub fn without_loop(&self, k: usize) -> Smoothing {
        let mut s = self.clone();
        s.loops.remove(k);
        s
    }

    pub fn with_loop(&self, labels: Vec<Label>) -> (Smoothing, usize) {
        let mut s = self.clone();
        let pos = s.loops.partition_point(|l| *l <= labels);
        s.loops.insert(pos, labels);
        (s, pos)
    }

    pub fn arc_of(&self, p: Label) -> Option<usize> {
        self.arcs.iter().position(|&(a, b)| a == p || b == p)
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<String> = self.arcs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "{{{}", arcs.join(" "))?;
        for _ in &self.loops {
            write!(f, " o")?;
        }
        write!(f, "}}")
    }
}

/// Boundary cycles of `S ∪ T` for two smoothings on the same points.
/// Arc cycles come first ordered by their smallest point, then the loops of
/// `S`, then the loops of `T`. The cycle through the special point is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycles {
    pub count: usize,
    pub n_arc: usize,
    pub s_arc: Vec<u8>,
    pub t_arc: Vec<u8>,
    pub s_loops: usize,
    pub t_loops: usize,
    pub special: bool,
    pub n_points: usize,
}

impl Cycles {
    pub fn new(s: &Smoothing, t: &Smoothing) -> Cycles {
        let pts = s.points();
        debug_assert_eq!(pts, t.points(), "smoothings have different boundaries");
        let idx = |p: Label| pts.binary_search(&p).unwrap();
        let n = pts.len();
        let mut s_partner = vec![(0usize, 0usize); n];
        let mut t_partner = vec![(0usize, 0usize); n];
        for (i, &(a, b)) in s.arcs.iter().enumerate() {
            s_partner[idx(a)] = (idx(b), i);
            s_partner[idx(b)] = (idx(a), i);
        }
        for (i, &(a, b)) in t.arcs.iter().enumerate() {
            t_partner[idx(a)] = (idx(b), i);
            t_partner[idx(b)] = (idx(a), i);
        }
        let mut seen = vec![false; n];
        let mut s_arc = vec![0u8; s.arcs.len()];
        let mut t_arc = vec![0u8; t.arcs.len()];
        let mut n_arc = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut p = start;
            loop {
                seen[p] = true;
                let (q, i) = s_partner[p];
                s_arc[i] = n_arc as u8;
                seen[q] = true;
                let (r, j) = t_partner[q];
                t_arc[j] = n_arc as u8;
                p = r;
                if p == start {
                    break;
                }
            }
            n_arc += 1;
        }
        let count = n_arc + s.loops.len() + t.loops.len();
        assert!(count <= 64, "too many boundary cycles");
        Cycles {
            count,
            n_arc,
            s_arc,
            t_arc,
            s_loops: s.loops.len(),
            t_loops: t.loops.len(),
            special: s.has_special(),
            n_points: n,
        }
    }

    pub fn s_loop(&self, k: usize) -> usize {
        self.n_arc + k
    }

    pub fn t_loop(&self, k: usize) -> usize {
        self.n_arc + self.s_loops + k
    }

    /// Cycle through a boundary point, given the source smoothing.
    pub fn of_point(&self, s: &Smoothing, p: Label) -> usize {
        self.s_arc[s.arc_of(p).expect("point not on boundary")] as usize
    }

    /// Degree of a generator with the given dots and power of H.
    pub fn degree(&self, dots: u32, h: u32) -> i32 {
        self.count as i32 - (self.n_points / 2) as i32 - 2 * dots as i32 - 2 * h as i32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_of_pairs() {
        let s = Smoothing::new(vec![(0, 1), (2, 3)], vec![vec![7]]);
        let t = Smoothing::new(vec![(0, 3), (1, 2)], vec![]);
        let c = Cycles::new(&s, &t);
        assert_eq!(c.n_arc, 1);
        assert_eq!(c.count, 2);
        assert!(c.special);
        let c = Cycles::new(&s, &s);
        assert_eq!(c.n_arc, 2);
        assert_eq!(c.count, 4);
        assert_eq!(c.s_loop(0), 2);
        assert_eq!(c.t_loop(0), 3);
    }
}
