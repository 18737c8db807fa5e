//! Laurent polynomials in `q` and integer polynomials in `h`, `t`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Laurent {
    pub coeffs: BTreeMap<i32, i64>,
}

impl Laurent {
    pub fn monomial(c: i64, k: i32) -> Self {
        let mut l = Laurent::default();
        l.add_term(c, k);
        l
    }

    pub fn add_term(&mut self, c: i64, k: i32) {
        let e = self.coeffs.entry(k).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut r = self.clone();
        for (&k, &c) in &o.coeffs {
            r.add_term(c, k);
        }
        r
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut r = Laurent::default();
        for (&a, &x) in &self.coeffs {
            for (&b, &y) in &o.coeffs {
                r.add_term(x * y, a + b);
            }
        }
        r
    }

    pub fn scale(&self, c: i64) -> Laurent {
        let mut r = Laurent::default();
        for (&k, &x) in &self.coeffs {
            r.add_term(c * x, k);
        }
        r
    }

    /// `q -> q^-1`.
    pub fn invert(&self) -> Laurent {
        Laurent { coeffs: self.coeffs.iter().map(|(&k, &c)| (-k, c)).collect() }
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (&k, &c)) in self.coeffs.iter().rev().enumerate() {
            let a = c.abs();
            if n == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if c < 0 { " - " } else { " + " })?;
            }
            let var = match k {
                0 => String::new(),
                1 => "q".into(),
                _ => format!("q^{k}"),
            };
            match (a, var.is_empty()) {
                (_, true) => write!(f, "{a}")?,
                (1, false) => write!(f, "{var}")?,
                _ => write!(f, "{a}*{var}")?,
            }
        }
        Ok(())
    }
}

/// Integer polynomial in `h` and `t`, keyed by exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    pub terms: BTreeMap<(u32, u32), i64>,
}

impl Poly {
    pub fn constant(c: i64) -> Poly {
        Poly::monomial(c, 0, 0)
    }

    pub fn monomial(c: i64, h: u32, t: u32) -> Poly {
        let mut p = Poly::default();
        if c != 0 {
            p.terms.insert((h, t), c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, c: i64, h: u32, t: u32) {
        let e = self.terms.entry((h, t)).or_insert(0);
        *e = e.checked_add(c).expect("coefficient overflow");
        if *e == 0 {
            self.terms.remove(&(h, t));
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (&(h, t), &c) in &o.terms {
            r.add_term(c, h, t);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::default();
        for (&(h1, t1), &a) in &self.terms {
            for (&(h2, t2), &b) in &o.terms {
                r.add_term(a.checked_mul(b).expect("coefficient overflow"), h1 + h2, t1 + t2);
            }
        }
        r
    }

    pub fn scale(&self, c: i64) -> Poly {
        self.mul(&Poly::constant(c))
    }

    /// `Some(d)` when every term has degree `d` (`deg h = -2`, `deg t = -4`).
    pub fn degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|&(h, t)| -2 * h as i32 - 4 * t as i32);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn as_constant(&self) -> Option<i64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&(0, 0)).copied(),
            _ => None,
        }
    }

    /// Substitute `h = 0`, `t = 1`, returning `(t-power, coefficient)` pairs.
    pub fn t_terms(&self) -> Vec<(u32, i64)> {
        self.terms.iter().filter(|(k, _)| k.0 == 0).map(|(k, &c)| (k.1, c)).collect()
    }

    /// Parse `2t`, `-h`, `h^2 + 4*t`, `3`.
    pub fn parse(s: &str) -> Result<Poly> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("bad polynomial '{s}'"));
        if s.is_empty() {
            return Err(bad());
        }
        let mut p = Poly::default();
        let mut chunks = Vec::new();
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                chunks.push(&s[start..i]);
                start = i;
            }
        }
        chunks.push(&s[start..]);
        for chunk in chunks {
            let (sign, body) = match chunk.strip_prefix('-') {
                Some(b) => (-1, b),
                None => (1, chunk.strip_prefix('+').unwrap_or(chunk)),
            };
            let (mut c, mut h, mut t) = (1i64, 0u32, 0u32);
            let mut rest = body;
            let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
            if digits > 0 {
                c = rest[..digits].parse().map_err(|_| bad())?;
                rest = rest[digits..].strip_prefix('*').unwrap_or(&rest[digits..]);
            }
            for factor in rest.split('*').filter(|f| !f.is_empty()) {
                let (var, exp) = match factor.split_once('^') {
                    Some((v, e)) => (v, e.parse::<u32>().map_err(|_| bad())?),
                    None => (factor, 1),
                };
                match var {
                    "h" => h += exp,
                    "t" => t += exp,
                    _ => {
                        let mut chars = var.chars();
                        match (chars.next(), chars.next(), chars.next()) {
                            (Some('h'), Some('t'), None) if exp == 1 => {
                                h += 1;
                                t += 1;
                            }
                            _ => return Err(bad()),
                        }
                    }
                }
            }
            if digits == 0 && rest.is_empty() {
                return Err(bad());
            }
            p.add_term(sign * c, h, t);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(h, t), &c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, "{}", if c < 0 { " - " } else { " + " })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            let mut vars = Vec::new();
            for (name, e) in [("h", h), ("t", t)] {
                match e {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    _ => vars.push(format!("{name}^{e}")),
                }
            }
            let a = c.abs();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_display() {
        let u = Laurent::monomial(1, 1).add(&Laurent::monomial(1, -1));
        assert_eq!(u.to_string(), "q + q^-1");
        assert_eq!(Laurent::monomial(-2, 0).to_string(), "-2");
        assert_eq!(u.mul(&u).to_string(), "q^2 + 2 + q^-2");
    }

    #[test]
    fn poly_parse() {
        for s in ["2t", "-h", "h", "0", "h^2 + 4t", "3"] {
            let p = Poly::parse(s).unwrap();
            assert_eq!(Poly::parse(&p.to_string()).unwrap(), p);
        }
        assert_eq!(Poly::parse("2t").unwrap().degree(), Some(-4));
        assert_eq!(Poly::parse("h^2+4*t").unwrap().degree(), Some(-4));
        assert!(Poly::parse("x").is_err());
    }
}
