//! Univariate polynomial arithmetic over a small finite field, enough for
//! order computations at closed points: division, gcd, derivative,
//! squarefreeness, and factorization by trial division (inputs here have
//! degree at most a few dozen).

use super::gf::{Fq, Gf};
use crate::error::{Error, Result};

/// Dense little-endian coefficient vector; always trimmed (no leading zeros).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Fq>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(field: &Gf, coeffs: Vec<Fq>) -> Self {
        let mut p = Poly { coeffs };
        p.trim(field);
        p
    }

    /// Coefficients given as element indices in [0, q).
    pub fn from_indices(field: &Gf, idx: &[u64]) -> Self {
        Poly::from_coeffs(field, idx.iter().map(|&n| field.element(n)).collect())
    }

    pub fn constant(field: &Gf, c: Fq) -> Self {
        Poly::from_coeffs(field, vec![c])
    }

    pub fn x(field: &Gf) -> Self {
        Poly::from_coeffs(field, vec![field.zero(), field.one()])
    }

    fn trim(&mut self, field: &Gf) {
        while self.coeffs.last().map(|c| field.is_zero(c)) == Some(true) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self, field: &Gf) -> Fq {
        self.coeffs.last().cloned().unwrap_or_else(|| field.zero())
    }

    pub fn add(&self, field: &Gf, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.add(&a, &b));
        }
        Poly::from_coeffs(field, out)
    }

    pub fn sub(&self, field: &Gf, other: &Poly) -> Poly {
        self.add(field, &other.neg(field))
    }

    pub fn neg(&self, field: &Gf) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| field.neg(c)).collect(),
        }
    }

    pub fn mul(&self, field: &Gf, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(&out[i + j], &field.mul(a, b));
            }
        }
        Poly::from_coeffs(field, out)
    }

    pub fn scale(&self, field: &Gf, c: &Fq) -> Poly {
        Poly::from_coeffs(field, self.coeffs.iter().map(|a| field.mul(a, c)).collect())
    }

    pub fn pow(&self, field: &Gf, mut e: u32) -> Poly {
        let mut acc = Poly::constant(field, field.one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            base = base.mul(field, &base.clone());
            e >>= 1;
        }
        acc
    }

    pub fn divrem(&self, field: &Gf, divisor: &Poly) -> Result<(Poly, Poly)> {
        if divisor.is_zero() {
            return Err(Error::BadInput("division by zero polynomial".into()));
        }
        let dd = divisor.degree().unwrap();
        let lead_inv = field.inv(&divisor.leading(field))?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![field.zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let factor = field.mul(&rem[rem.len() - 1], &lead_inv);
            if !field.is_zero(&factor) {
                quot[k] = factor.clone();
                for (j, c) in divisor.coeffs.iter().enumerate() {
                    let t = field.mul(&factor, c);
                    rem[k + j] = field.sub(&rem[k + j], &t);
                }
            }
            rem.pop();
            while rem.last().map(|c| field.is_zero(c)) == Some(true) {
                rem.pop();
            }
        }
        Ok((
            Poly::from_coeffs(field, quot),
            Poly::from_coeffs(field, rem),
        ))
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, field: &Gf, other: &Poly) -> Result<Poly> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(field, &b)?;
            a = b;
            b = r;
        }
        Ok(a.monic(field)?)
    }

    pub fn monic(&self, field: &Gf) -> Result<Poly> {
        if self.is_zero() {
            return Ok(Poly::zero());
        }
        let inv = field.inv(&self.leading(field))?;
        Ok(self.scale(field, &inv))
    }

    pub fn derivative(&self, field: &Gf) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let out: Vec<Fq> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| field.scalar_mul(i as u64 % field.p, c))
            .collect();
        Poly::from_coeffs(field, out)
    }

    /// Squarefree over F_q: gcd(f, f') constant and f not a p-th power
    /// (f' = 0 with deg f > 0 means f is a p-th power, hence not squarefree).
    pub fn is_squarefree(&self, field: &Gf) -> Result<bool> {
        if self.is_constant() {
            return Ok(!self.is_zero());
        }
        let d = self.derivative(field);
        if d.is_zero() {
            return Ok(false);
        }
        Ok(self.gcd(field, &d)?.is_constant())
    }

    /// Evaluate at a point of the same field.
    pub fn eval(&self, field: &Gf, x: &Fq) -> Fq {
        let mut acc = field.zero();
        for c in self.coeffs.iter().rev() {
            acc = field.add(&field.mul(&acc, x), c);
        }
        acc
    }

    /// Evaluate a prime-field polynomial at a point of an extension of the
    /// same characteristic (constants embed coordinate-wise).
    pub fn eval_in(&self, ext: &Gf, x: &Fq) -> Result<Fq> {
        let mut acc = ext.zero();
        for c in self.coeffs.iter().rev() {
            if c.len() != 1 {
                return Err(Error::BadInput(
                    "extension evaluation needs prime-field coefficients".into(),
                ));
            }
            acc = ext.add(&ext.mul(&acc, x), &ext.embed(c[0]));
        }
        Ok(acc)
    }

    /// Multiplicity of `factor` in self (0 if coprime).
    pub fn order_at(&self, field: &Gf, factor: &Poly) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::BadInput("order of the zero polynomial".into()));
        }
        let mut f = self.clone();
        let mut ord = 0;
        loop {
            let (q, r) = f.divrem(field, factor)?;
            if !r.is_zero() {
                return Ok(ord);
            }
            ord += 1;
            f = q;
        }
    }

    /// Monic irreducible factors with multiplicities, by trial division in
    /// increasing degree (any monic divisor found this way is irreducible).
    pub fn factor(&self, field: &Gf) -> Result<Vec<(Poly, u32)>> {
        if self.is_zero() {
            return Err(Error::BadInput("factor of the zero polynomial".into()));
        }
        let mut f = self.monic(field)?;
        let mut out = Vec::new();
        let mut deg = 1usize;
        while f.degree().unwrap_or(0) >= 2 * deg {
            for idx in 0..field.q().pow(deg as u32) {
                let mut coeffs: Vec<Fq> = Vec::with_capacity(deg + 1);
                let mut n = idx;
                for _ in 0..deg {
                    coeffs.push(field.element(n % field.q()));
                    n /= field.q();
                }
                coeffs.push(field.one());
                let cand = Poly::from_coeffs(field, coeffs);
                let mut mult = 0;
                loop {
                    let (q, r) = f.divrem(field, &cand)?;
                    if !r.is_zero() {
                        break;
                    }
                    mult += 1;
                    f = q;
                }
                if mult > 0 {
                    out.push((cand, mult));
                }
                if f.degree().unwrap_or(0) < 2 * deg {
                    break;
                }
            }
            deg += 1;
        }
        if !f.is_constant() {
            out.push((f, 1));
        }
        out.sort_by(|a, b| {
            (a.0.coeffs.len(), key(field, &a.0)).cmp(&(b.0.coeffs.len(), key(field, &b.0)))
        });
        Ok(out)
    }

    /// Canonical display: terms in decreasing degree, coefficients as indices.
    pub fn render(&self, field: &Gf) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if field.is_zero(c) {
                continue;
            }
            let ci = field.index(c);
            let term = match (i, ci) {
                (0, _) => format!("{ci}"),
                (1, 1) => "x".into(),
                (1, _) => format!("{ci}*x"),
                (_, 1) => format!("x^{i}"),
                _ => format!("{ci}*x^{i}"),
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

fn key(field: &Gf, p: &Poly) -> Vec<u64> {
    p.coeffs.iter().rev().map(|c| field.index(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Gf {
        Gf::new(5, 1).unwrap()
    }

    #[test]
    fn divrem_roundtrip() {
        let f = f5();
        let a = Poly::from_indices(&f, &[1, 2, 0, 3, 4]);
        let b = Poly::from_indices(&f, &[2, 1, 1]);
        let (q, r) = a.divrem(&f, &b).unwrap();
        let back = q.mul(&f, &b).add(&f, &r);
        assert_eq!(back, a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = f5();
        let h = Poly::from_indices(&f, &[3, 1]); // x + 3
        let a = h.mul(&f, &Poly::from_indices(&f, &[1, 1]));
        let b = h.mul(&f, &Poly::from_indices(&f, &[2, 0, 1]));
        let g = a.gcd(&f, &b).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn squarefree_detection() {
        let f = f5();
        let h = Poly::from_indices(&f, &[3, 1]);
        assert!(h.is_squarefree(&f).unwrap());
        let sq = h.mul(&f, &h);
        assert!(!sq.is_squarefree(&f).unwrap());
        // x^5 + 1 = (x + 1)^5 in char 5: derivative vanishes
        let frob = Poly::from_indices(&f, &[1, 0, 0, 0, 0, 1]);
        assert!(!frob.is_squarefree(&f).unwrap());
    }

    #[test]
    fn factor_matches_construction() {
        let f = f5();
        let p1 = Poly::from_indices(&f, &[1, 1]); // x + 1
        let p2 = Poly::from_indices(&f, &[2, 1, 1]); // x^2 + x + 2, no roots mod 5
        for x in 0..5 {
            assert!(!f.is_zero(&p2.eval(&f, &f.element(x))));
        }
        let prod = p1.pow(&f, 3).mul(&f, &p2);
        let factors = prod.factor(&f).unwrap();
        assert_eq!(factors, vec![(p1.clone(), 3), (p2.clone(), 1)]);
        assert_eq!(prod.order_at(&f, &p1).unwrap(), 3);
        assert_eq!(prod.order_at(&f, &p2).unwrap(), 1);
    }

    #[test]
    fn eval_in_extension() {
        let f = f5();
        let ext = Gf::new(5, 2).unwrap();
        let p2 = Poly::from_indices(&f, &[2, 1, 1]);
        // irreducible quadratic gains roots in F_25
        let mut roots = 0;
        for n in 0..25 {
            if ext.is_zero(&p2.eval_in(&ext, &ext.element(n)).unwrap()) {
                roots += 1;
            }
        }
        assert_eq!(roots, 2);
    }
}
