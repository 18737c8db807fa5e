//! Promotions: replace the special line by a free module and `H` by a matrix.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::complex::{Monomial, UniversalComplex};
use crate::error::{Error, Result};
use crate::poly::{Laurent, Poly};
use crate::ring::{is_square, CoeffRing};

pub const NAMES: &[&str] = &["big_ht", "generalized_lee", "lee", "standard", "reduced_standard", "universal_H"];

#[derive(Clone, Debug, PartialEq)]
pub struct PromotionSpec {
    pub name: String,
    pub ring: CoeffRing,
    pub rank: usize,
    /// `h_image[i][j]` is the coefficient of basis vector `i` in `H e_j`.
    pub h_image: Vec<Vec<Poly>>,
    pub basis_degrees: Vec<i32>,
}

fn p(s: &str) -> Poly {
    Poly::parse(s).expect("valid literal")
}

impl PromotionSpec {
    pub fn named(name: &str) -> Result<PromotionSpec> {
        let (ring, m): (CoeffRing, Vec<Vec<&str>>) = match name {
            "big_ht" => (CoeffRing::Zht, vec![vec!["-h", "2t"], vec!["2", "h"]]),
            "generalized_lee" => (CoeffRing::Zt, vec![vec!["0", "2t"], vec!["2", "0"]]),
            "lee" => (CoeffRing::Z, vec![vec!["0", "2"], vec!["2", "0"]]),
            "standard" => (CoeffRing::Z, vec![vec!["0", "0"], vec!["2", "0"]]),
            "reduced_standard" => (CoeffRing::Z, vec![vec!["0"]]),
            "universal_H" => (CoeffRing::ZH, vec![vec!["h"]]),
            _ => return Err(Error::Argument(format!("unknown promotion '{name}'"))),
        };
        let basis_degrees = match m.len() {
            2 => vec![1, -1],
            _ if name == "universal_H" => vec![0],
            _ => vec![-1],
        };
        Ok(PromotionSpec {
            name: name.to_string(),
            ring,
            rank: m.len(),
            h_image: m.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect(),
            basis_degrees,
        })
    }

    /// `{"ring": "Z", "rank": 2, "H": [["0","0"],["2","0"]], "degrees": [1,-1]}`
    pub fn from_json(v: &Value) -> Result<PromotionSpec> {
        let bad = |m: &str| Error::Parse(format!("promotion json: {m}"));
        let ring: CoeffRing = v["ring"].as_str().ok_or_else(|| bad("ring"))?.parse()?;
        let rows = v["H"].as_array().ok_or_else(|| bad("H"))?;
        let rank = v.get("rank").and_then(Value::as_u64).map_or(rows.len(), |r| r as usize);
        if rank == 0 || rows.len() != rank {
            return Err(bad("H must be rank x rank"));
        }
        let mut h_image = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| bad("H row"))?;
            if r.len() != rank {
                return Err(bad("H must be rank x rank"));
            }
            let row: Result<Vec<Poly>> = r
                .iter()
                .map(|e| match e {
                    Value::String(s) => Poly::parse(s),
                    Value::Number(n) => n.as_i64().map(Poly::constant).ok_or_else(|| bad("entry")),
                    _ => Err(bad("entry")),
                })
                .collect();
            h_image.push(row?);
        }
        let basis_degrees: Vec<i32> = match v.get("degrees") {
            Some(d) => d
                .as_array()
                .ok_or_else(|| bad("degrees"))?
                .iter()
                .map(|x| x.as_i64().map(|x| x as i32).ok_or_else(|| bad("degrees")))
                .collect::<Result<_>>()?,
            None => vec![0; rank],
        };
        if basis_degrees.len() != rank {
            return Err(bad("degrees must have rank entries"));
        }
        let name = v.get("name").and_then(Value::as_str).unwrap_or("custom").to_string();
        Ok(PromotionSpec { name, ring, rank, h_image, basis_degrees })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "ring": self.ring.to_string(),
            "rank": self.rank,
            "H": self.h_image.iter().map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "degrees": self.basis_degrees,
        })
    }

    /// Whether every entry of the image of `H` has the degree the basis
    /// degrees require.
    pub fn is_graded(&self) -> bool {
        (0..self.rank).all(|i| {
            (0..self.rank).all(|j| {
                let e = &self.h_image[i][j];
                e.is_zero() || e.degree() == Some(self.basis_degrees[j] - self.basis_degrees[i] - 2)
            })
        })
    }

    fn matrix_mul(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(Poly::default(), |acc, k| acc.add(&a[i][k].mul(&b[k][j]))))
                    .collect()
            })
            .collect()
    }

    pub fn h_power(&self, k: u32) -> Vec<Vec<Poly>> {
        let mut m: Vec<Vec<Poly>> = (0..self.rank)
            .map(|i| (0..self.rank).map(|j| Poly::constant((i == j) as i64)).collect())
            .collect();
        for _ in 0..k {
            m = Self::matrix_mul(&m, &self.h_image);
        }
        m
    }

    /// `Some(c)` when the square of the image of `H` is `c` times the identity.
    pub fn square_scalar(&self) -> Option<Poly> {
        let sq = self.h_power(2);
        let c = sq[0][0].clone();
        (0..self.rank)
            .all(|i| (0..self.rank).all(|j| sq[i][j] == if i == j { c.clone() } else { Poly::default() }))
            .then_some(c)
    }
}

/// A complex of free modules with polynomial entries, keyed (source, target).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlgebraicComplex {
    pub ring: Option<CoeffRing>,
    pub gens: Vec<(i32, i32)>,
    pub entries: BTreeMap<(usize, usize), Poly>,
    /// False when the differential only respects a filtration.
    pub graded: bool,
}

impl AlgebraicComplex {
    pub fn ring(&self) -> CoeffRing {
        self.ring.unwrap_or(CoeffRing::Z)
    }

    pub fn verify(&self) -> Result<()> {
        let mut two: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
        for (&(s, t), e) in &self.entries {
            let (a, b) = (self.gens[s], self.gens[t]);
            if b.0 != a.0 + 1 {
                return Err(Error::Assertion(format!("entry {s}->{t} does not raise degree by one")));
            }
            if self.graded && e.degree().map_or(true, |d| b.1 + d != a.1) {
                return Err(Error::Assertion(format!("entry {s}->{t} is not of degree 0")));
            }
            for (&(_, t2), e2) in self.entries.range((t, 0)..(t + 1, 0)) {
                let acc = two.entry((s, t2)).or_default();
                *acc = acc.add(&e.mul(e2));
            }
        }
        if let Some((k, _)) = two.iter().find(|(_, v)| !v.is_zero()) {
            return Err(Error::Assertion(format!("d∘d is nonzero from generator {} to {}", k.0, k.1)));
        }
        Ok(())
    }

    /// Inverse of `promote` with `universal_H`.
    pub fn to_universal(&self) -> Result<UniversalComplex> {
        let mut u = UniversalComplex::default();
        for &(i, q) in &self.gens {
            u.add_line(i, q);
        }
        for (&(s, t), e) in &self.entries {
            if e.terms.len() != 1 {
                return Err(Error::Unsupported("entry is not a monomial in H".into()));
            }
            let (&(h, tt), &c) = e.terms.iter().next().unwrap();
            if tt != 0 {
                return Err(Error::Unsupported("entry involves t".into()));
            }
            u.set(s, t, Monomial::new(c, h));
        }
        Ok(u)
    }
}

pub fn promote(u: &UniversalComplex, spec: &PromotionSpec) -> Result<AlgebraicComplex> {
    if spec.rank == 0 || spec.h_image.len() != spec.rank || spec.basis_degrees.len() != spec.rank {
        return Err(Error::Argument("malformed promotion".into()));
    }
    let mut out = AlgebraicComplex { ring: Some(spec.ring), graded: spec.is_graded(), ..Default::default() };
    for l in &u.lines {
        for &b in &spec.basis_degrees {
            out.gens.push((l.degree, l.q + b));
        }
    }
    let mut powers: BTreeMap<u32, Vec<Vec<Poly>>> = BTreeMap::new();
    let r = spec.rank;
    for (&(s, t), m) in &u.entries {
        let mp = powers.entry(m.power).or_insert_with(|| spec.h_power(m.power));
        for i in 0..r {
            for j in 0..r {
                let e = mp[i][j].scale(m.coeff);
                if !e.is_zero() {
                    out.entries.insert((s * r + j, t * r + i), e);
                }
            }
        }
    }
    Ok(out)
}

/// `sum (-1)^i q^j` over generators.
pub fn euler_characteristic(a: &AlgebraicComplex) -> Result<Laurent> {
    if !a.graded {
        return Err(Error::Unsupported("Euler characteristic needs a graded promotion".into()));
    }
    let mut l = Laurent::default();
    for &(i, j) in &a.gens {
        l.add_term(if i.rem_euclid(2) == 0 { 1 } else { -1 }, j);
    }
    Ok(l)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub standard_equivalent: bool,
    pub diagonalizable: bool,
}

/// Classify the specialization `h, t` over `Q` or `Z_p`.
pub fn equivalence_class(h: &BigRational, t: &BigRational, ring: CoeffRing) -> Result<Equivalence> {
    let p = match ring {
        CoeffRing::Q => 0,
        CoeffRing::Zp(p) => p,
        _ => return Err(Error::Unsupported(format!("{ring} is not a field"))),
    };
    let mut disc = h * h + BigRational::from_integer(BigInt::from(4)) * t;
    if p != 0 {
        let pp = BigInt::from(p);
        let n = ((disc.numer() % &pp) + &pp) % &pp;
        disc = BigRational::from_integer(n * (disc.denom() % &pp));
    }
    let zero = disc.is_zero();
    Ok(Equivalence { standard_equivalent: zero, diagonalizable: p == 2 || (!zero && is_square(&disc, p)) })
}
