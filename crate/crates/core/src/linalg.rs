//! Dense exact linear algebra: Smith normal form over Z, lattices, and
//! row reduction over fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ring::Field;

pub type ZMat = Vec<Vec<BigInt>>;

pub fn zeros(rows: usize, cols: usize) -> ZMat {
    vec![vec![BigInt::zero(); cols]; rows]
}

pub fn identity(n: usize) -> ZMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn from_i64(rows: &[Vec<i64>]) -> ZMat {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn mat_mul(a: &ZMat, b: &ZMat, inner: usize) -> ZMat {
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = zeros(a.len(), cols);
    for (i, row) in a.iter().enumerate() {
        for k in 0..inner {
            if row[k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] += &row[k] * &b[k][j];
                }
            }
        }
    }
    out
}

/// `u * a * v = diag(d)` with `u`, `v` unimodular and each `d[k]` dividing
/// the next. `d` holds the nonzero invariant factors.
#[derive(Clone, Debug)]
pub struct Smith {
    pub d: Vec<BigInt>,
    pub u: ZMat,
    pub v: ZMat,
}

fn swap_cols(m: &mut ZMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// row[dst] -= q * row[src]
fn row_axpy(m: &mut ZMat, dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let s = m[src].clone();
    for (x, y) in m[dst].iter_mut().zip(&s) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

fn col_axpy(m: &mut ZMat, dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }
}

pub fn smith(a: &ZMat, cols: usize) -> Smith {
    let rows = a.len();
    let mut m = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut d = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        u.swap(t, bi);
        swap_cols(&mut m, t, bj);
        swap_cols(&mut v, t, bj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                row_axpy(&mut m, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    u.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                col_axpy(&mut m, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !m[t][j].is_zero() {
                    swap_cols(&mut m, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the rest of the block
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !m[i][j].is_multiple_of(&m[t][t])));
            match bad {
                Some(i) => {
                    let neg = -BigInt::one();
                    row_axpy(&mut m, t, i, &neg);
                    row_axpy(&mut u, t, i, &neg);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        d.push(m[t][t].clone());
        t += 1;
    }
    Smith { d, u, v }
}

pub fn rank(a: &ZMat, cols: usize) -> usize {
    smith(a, cols).d.len()
}

/// Basis of the integer kernel, as vectors of length `cols`.
pub fn kernel(a: &ZMat, cols: usize) -> Vec<Vec<BigInt>> {
    let s = smith(a, cols);
    (s.d.len()..cols).map(|j| s.v.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Free rank and torsion of `Z^k / <gens>` where `gens` are given in
/// coordinates of a basis of the ambient lattice.
pub fn quotient(k: usize, gens: &[Vec<BigInt>]) -> (usize, Vec<BigInt>) {
    if gens.is_empty() {
        return (k, vec![]);
    }
    let m: ZMat = (0..k).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
    let s = smith(&m, gens.len());
    let tors = s.d.iter().filter(|x| !x.is_one()).cloned().collect();
    (k - s.d.len(), tors)
}

/// Coordinates of `vectors` in a saturated lattice basis. Panics when a
/// vector is outside the lattice.
pub fn coordinates(basis: &[Vec<BigInt>], vectors: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = basis.len();
    if k == 0 {
        return vectors.iter().map(|_| vec![]).collect();
    }
    let n = basis[0].len();
    let b: ZMat = (0..n).map(|i| basis.iter().map(|v| v[i].clone()).collect()).collect();
    let s = smith(&b, k);
    assert!(s.d.len() == k, "basis is not independent");
    vectors
        .iter()
        .map(|x| {
            let ux: Vec<BigInt> = s.u.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            let y: Vec<BigInt> = (0..k)
                .map(|i| {
                    let (q, r) = ux[i].div_rem(&s.d[i]);
                    assert!(r.is_zero(), "vector outside lattice");
                    q
                })
                .collect();
            assert!(ux[k..].iter().all(|z| z.is_zero()), "vector outside lattice span");
            (0..k).map(|j| (0..k).map(|i| &s.v[j][i] * &y[i]).sum()).collect()
        })
        .collect()
}

/// Reduced row echelon basis of the row span. Returns rows and pivot columns.
pub fn rref<F: Field>(f: &F, rows: &[Vec<F::E>], cols: usize) -> (Vec<Vec<F::E>>, Vec<usize>) {
    let mut m: Vec<Vec<F::E>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !f.is_zero(&m[i][c])) else { continue };
        m.swap(r, p);
        let inv = f.inv(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = f.mul(x, &inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !f.is_zero(&row[c]) {
                let k = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(x, &f.mul(&k, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn field_rank<F: Field>(f: &F, rows: &[Vec<F::E>], cols: usize) -> usize {
    rref(f, rows, cols).1.len()
}

/// Basis of `{x : a x = 0}`.
pub fn field_kernel<F: Field>(f: &F, a: &[Vec<F::E>], cols: usize) -> Vec<Vec<F::E>> {
    let (r, pivots) = rref(f, a, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![f.zero(); cols];
            v[fc] = f.one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = f.neg(&row[fc]);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PrimeField;
    use proptest::prelude::*;

    fn check(a: &ZMat, cols: usize) {
        let s = smith(a, cols);
        let rows = a.len();
        let uav = mat_mul(&mat_mul(&s.u, a, rows), &s.v, cols);
        for i in 0..rows {
            for j in 0..cols {
                let want = if i == j && i < s.d.len() { s.d[i].clone() } else { BigInt::zero() };
                assert_eq!(uav[i][j], want);
            }
        }
        for w in s.d.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn smith_examples() {
        let a = from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith(&a, 3);
        assert_eq!(s.d, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        check(&a, 3);
        assert!(smith(&zeros(2, 3), 3).d.is_empty());
    }

    proptest! {
        #[test]
        fn smith_random(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(-9i64..10, 25)) {
            let a: ZMat = (0..rows).map(|i| (0..cols).map(|j| BigInt::from(seed[i * 5 + j])).collect()).collect();
            check(&a, cols);
            for k in kernel(&a, cols) {
                for row in &a {
                    let dot: BigInt = row.iter().zip(&k).map(|(x, y)| x * y).sum();
                    prop_assert!(dot.is_zero());
                }
            }
        }
    }

    #[test]
    fn quotient_groups() {
        let g = vec![vec![BigInt::from(2), BigInt::from(0)], vec![BigInt::from(0), BigInt::from(4)]];
        assert_eq!(quotient(3, &[g[0].clone().into_iter().chain([BigInt::zero()]).collect()]).0, 2);
        let (free, tors) = quotient(2, &g);
        assert_eq!(free, 0);
        assert_eq!(tors, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn coordinates_round_trip() {
        let basis = vec![
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)],
        ];
        let x = vec![vec![BigInt::from(2), BigInt::from(5), BigInt::from(3)]];
        assert_eq!(coordinates(&basis, &x), vec![vec![BigInt::from(2), BigInt::from(3)]]);
    }

    #[test]
    fn field_ops() {
        let f = PrimeField { p: 3 };
        let a = vec![vec![1u64, 2, 0], vec![2, 1, 0]];
        assert_eq!(field_rank(&f, &a, 3), 1);
        assert_eq!(field_kernel(&f, &a, 3).len(), 2);
    }
}
