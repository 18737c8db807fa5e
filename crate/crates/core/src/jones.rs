//! Unnormalized Jones polynomial from the Kauffman bracket state sum, with
//! the unknot evaluating to `q + q^-1`.

use crate::diagram::{Crossing, PlanarDiagram, SPECIAL};
use crate::error::{Error, Result};
use crate::poly::Laurent;

fn loops(d: &PlanarDiagram, state: u64) -> usize {
    let label = |l: u32| if l == SPECIAL && d.open { d.marked_edge } else { l } as usize;
    let n = d.edge_count as usize + 1;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut used = vec![false; n];
    for (k, c) in d.crossings.iter().enumerate() {
        for (s, t) in Crossing::pairs((state >> k & 1) as u8) {
            let (a, b) = (label(c.slots[s]), label(c.slots[t]));
            used[a] = true;
            used[b] = true;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    (0..n).filter(|&x| used[x] && find(&mut parent, x) == x).count()
}

pub fn jones(d: &PlanarDiagram) -> Result<Laurent> {
    let n = d.crossings.len();
    if n > 24 {
        return Err(Error::SizeLimit(format!("state sum over {n} crossings")));
    }
    let circle = Laurent::monomial(1, 1).add(&Laurent::monomial(1, -1));
    let mut powers = vec![Laurent::monomial(1, 0)];
    let (np, nm) = (d.n_plus() as i32, d.n_minus() as i32);
    let mut total = Laurent::default();
    for state in 0..1u64 << n {
        let r = state.count_ones() as i32;
        let k = loops(d, state) + d.free_loops as usize;
        while powers.len() <= k {
            let next = powers.last().unwrap().mul(&circle);
            powers.push(next);
        }
        let sign = if (r - nm).rem_euclid(2) == 0 { 1 } else { -1 };
        total = total.add(&powers[k].mul(&Laurent::monomial(sign, r + np - 2 * nm)));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots;

    #[test]
    fn trefoil_and_unknot() {
        assert_eq!(jones(&knots::builtin("unknot").unwrap()).unwrap().to_string(), "q + q^-1");
        let j = jones(&knots::builtin("3_1").unwrap()).unwrap();
        // left trefoil: q^-1 + q^-3 + q^-5 - q^-9
        assert_eq!(j.to_string(), "q^-1 + q^-3 + q^-5 - q^-9");
    }
}
