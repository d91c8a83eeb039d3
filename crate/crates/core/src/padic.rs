//! Exact arithmetic in Z/p^N and in the cyclotomic orders Z_p[zeta_{p^n}],
//! represented as Z[x]/(Phi_{p^n}(x), p^N) with dense residue vectors.
//!
//! Every scalar carries its own absolute precision `prec`: residues are
//! known modulo p^prec.  Operations that mix precisions truncate to the
//! minimum; dividing by the uniformizer pi = zeta - 1 costs one digit.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The prime together with the working precision exponent N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prime {
    pub p: u64,
    #[serde(rename = "N")]
    pub precision: u32,
}

impl Prime {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::BadInput("precision must be >= 1".into()));
        }
        if p < 2 || !is_prime(p) {
            return Err(Error::BadInput(format!("{p} is not prime")));
        }
        Ok(Prime { p, precision })
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// phi(p^n): the degree of the p^n-th cyclotomic polynomial.
pub fn phi_pn(p: u64, level: u32) -> usize {
    if level == 0 {
        1
    } else {
        (p.pow(level - 1) * (p - 1)) as usize
    }
}

/// p-adic valuation, a rational with denominator dividing phi(p^n).
///
/// `Exhausted` marks a value congruent to 0 at working precision whose true
/// valuation cannot be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(Ratio<i64>),
    Infinite,
    Exhausted,
}

impl Valuation {
    pub fn finite(num: i64, den: i64) -> Self {
        Valuation::Finite(Ratio::new(num, den))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Valuation::Finite(r) if r.is_zero())
    }

    pub fn as_finite(&self) -> Option<Ratio<i64>> {
        match self {
            Valuation::Finite(r) => Some(*r),
            _ => None,
        }
    }
}

/// An element of Z_p[zeta_{p^level}] known modulo p^prec.
///
/// `coeffs` has length phi(p^level) and holds residues in [0, p^prec)
/// with respect to the power basis 1, x, ..., x^{phi-1}, x = zeta_{p^level}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    pub p: u64,
    pub prec: u32,
    pub level: u32,
    pub(crate) coeffs: Vec<BigUint>,
}

static CYCLO_CACHE: Lazy<Mutex<HashMap<(u64, u32, u32), CycloAux>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Clone)]
struct CycloAux {
    /// pi^{phi-1} mod p^prec, pi = x - 1.
    pi_pow: Vec<BigUint>,
    /// Inverse of the unit u with pi^phi = p * u, mod p^prec.
    u_inv: Vec<BigUint>,
}

pub fn pow_mod(p: u64, prec: u32) -> BigUint {
    BigUint::from(p).pow(prec)
}

fn mod_add(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    let s = a + b;
    if &s >= m {
        s - m
    } else {
        s
    }
}

fn mod_sub(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

impl PadicScalar {
    pub fn zero(p: u64, prec: u32, level: u32) -> Self {
        PadicScalar {
            p,
            prec,
            level,
            coeffs: vec![BigUint::zero(); phi_pn(p, level)],
        }
    }

    pub fn one(p: u64, prec: u32, level: u32) -> Self {
        let mut s = Self::zero(p, prec, level);
        s.coeffs[0] = BigUint::one();
        s
    }

    /// Level-0 scalar from a signed integer.
    pub fn from_i64(p: u64, prec: u32, v: i64) -> Self {
        let m = pow_mod(p, prec);
        let r = if v >= 0 {
            BigUint::from(v as u64) % &m
        } else {
            let neg = BigUint::from(v.unsigned_abs()) % &m;
            mod_sub(&BigUint::zero(), &neg, &m)
        };
        PadicScalar {
            p,
            prec,
            level: 0,
            coeffs: vec![r],
        }
    }

    pub fn from_biguint(p: u64, prec: u32, v: BigUint) -> Self {
        let m = pow_mod(p, prec);
        PadicScalar {
            p,
            prec,
            level: 0,
            coeffs: vec![v % m],
        }
    }

    /// zeta_{p^level}^exp as a scalar at the given level.
    pub fn zeta_pow(p: u64, prec: u32, level: u32, exp: i64) -> Self {
        if level == 0 {
            return Self::one(p, prec, 0);
        }
        let order = p.pow(level) as i64;
        let e = exp.rem_euclid(order) as usize;
        let phi = phi_pn(p, level);
        let m = pow_mod(p, prec);
        // x^e for e < p^level: reduce mod Phi once if e >= phi.
        let mut raw = vec![BigUint::zero(); e + 1];
        raw[e] = BigUint::one();
        let coeffs = reduce_mod_phi(raw, p, level, phi, &m);
        PadicScalar {
            p,
            prec,
            level,
            coeffs,
        }
    }

    pub fn is_zero_residue(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn phi(&self) -> usize {
        phi_pn(self.p, self.level)
    }

    pub fn reduce_prec(&self, prec: u32) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let m = pow_mod(self.p, prec);
        PadicScalar {
            p: self.p,
            prec,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c % &m).collect(),
        }
    }

    /// Embed into a higher cyclotomic level via x -> x^{p^{dl}}.
    pub fn raise_level(&self, level: u32) -> Self {
        assert!(level >= self.level, "cannot lower cyclotomic level");
        if level == self.level {
            return self.clone();
        }
        let step = self.p.pow(level - self.level) as usize;
        let phi_new = phi_pn(self.p, level);
        let mut coeffs = vec![BigUint::zero(); phi_new];
        for (i, c) in self.coeffs.iter().enumerate() {
            // max index (phi_old-1)*step < phi_new, no reduction needed
            coeffs[i * step] = c.clone();
        }
        PadicScalar {
            p: self.p,
            prec: self.prec,
            level,
            coeffs,
        }
    }

    /// The level-0 (rational) residue, if the element lies in Z_p: in the
    /// power basis that means every non-constant coordinate vanishes.
    pub fn descend_level_zero(&self) -> Option<Self> {
        if self.coeffs[1..].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(PadicScalar {
            p: self.p,
            prec: self.prec,
            level: 0,
            coeffs: vec![self.coeffs[0].clone()],
        })
    }

    fn unify(&self, other: &Self) -> Result<(Self, Self)> {
        if self.p != other.p {
            return Err(Error::MixedRings);
        }
        let level = self.level.max(other.level);
        let prec = self.prec.min(other.prec);
        Ok((
            self.raise_level(level).reduce_prec(prec),
            other.raise_level(level).reduce_prec(prec),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let m = pow_mod(a.p, a.prec);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| mod_add(x, y, &m))
            .collect();
        Ok(PadicScalar { coeffs, ..a })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let m = pow_mod(a.p, a.prec);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| mod_sub(x, y, &m))
            .collect();
        Ok(PadicScalar { coeffs, ..a })
    }

    pub fn neg(&self) -> Self {
        let m = pow_mod(self.p, self.prec);
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| mod_sub(&BigUint::zero(), x, &m))
            .collect();
        PadicScalar {
            coeffs,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let m = pow_mod(a.p, a.prec);
        let phi = a.phi();
        if phi == 1 {
            let c = (&a.coeffs[0] * &b.coeffs[0]) % &m;
            return Ok(PadicScalar {
                coeffs: vec![c],
                ..a
            });
        }
        let mut raw = vec![BigUint::zero(); 2 * phi - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                raw[i + j] += x * y;
            }
        }
        for r in raw.iter_mut() {
            *r %= &m;
        }
        let coeffs = reduce_mod_phi(raw, a.p, a.level, phi, &m);
        Ok(PadicScalar { coeffs, ..a })
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        let f = Self::from_i64(self.p, self.prec, k);
        self.mul(&f).expect("same prime")
    }

    pub fn pow(&self, mut e: u64) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::one(self.p, self.prec, self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The p-residue of the image in O/(pi) = F_p (the coefficient sum).
    pub fn residue_mod_pi(&self) -> u64 {
        let p = BigUint::from(self.p);
        let mut s = BigUint::zero();
        for c in &self.coeffs {
            s += c % &p;
        }
        (s % &p).to_u64_digits().first().copied().unwrap_or(0)
    }

    pub fn is_unit(&self) -> bool {
        self.residue_mod_pi() != 0
    }

    /// Minimal p-adic valuation consistent with the residues.
    pub fn valuation(&self) -> Valuation {
        if self.is_zero_residue() {
            return Valuation::Exhausted;
        }
        let phi = self.phi() as i64;
        // p-content: min over coefficients of ord_p.
        let content = self
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    self.prec
                } else {
                    ord_p_residue(c, self.p)
                }
            })
            .min()
            .unwrap();
        let mut b = self.div_p_exact(content).expect("content divides");
        if self.level == 0 {
            return Valuation::finite(content as i64, 1);
        }
        let mut steps = 0i64;
        loop {
            if b.residue_mod_pi() != 0 {
                return Valuation::Finite(
                    Ratio::new(content as i64, 1) + Ratio::new(steps, phi),
                );
            }
            if b.prec <= 1 || steps as usize + 1 >= phi as usize {
                // cannot certify further pi-divisions at this precision
                return Valuation::Exhausted;
            }
            b = match b.div_pi() {
                Ok(x) => x,
                Err(_) => return Valuation::Exhausted,
            };
            if b.is_zero_residue() {
                return Valuation::Exhausted;
            }
            steps += 1;
        }
    }

    /// Exact division by p^k; requires every residue divisible by p^k.
    /// Costs k digits of precision.
    pub fn div_p_exact(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.prec {
            return Err(Error::PrecisionExhausted("division by p^k eats all digits"));
        }
        let pk = pow_mod(self.p, k);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if (c % &pk) != BigUint::zero() {
                return Err(Error::NotAUnit);
            }
            coeffs.push(c / &pk);
        }
        Ok(PadicScalar {
            p: self.p,
            prec: self.prec - k,
            level: self.level,
            coeffs,
        })
    }

    /// Exact division by pi = zeta - 1 (level >= 1); costs one digit.
    pub fn div_pi(&self) -> Result<Self> {
        assert!(self.level >= 1, "pi-division needs level >= 1");
        if self.prec <= 1 {
            return Err(Error::PrecisionExhausted("pi-division eats the last digit"));
        }
        let aux = cyclo_aux(self.p, self.level, self.prec);
        let pi_pow = PadicScalar {
            p: self.p,
            prec: self.prec,
            level: self.level,
            coeffs: aux.pi_pow.clone(),
        };
        let u_inv = PadicScalar {
            p: self.p,
            prec: self.prec,
            level: self.level,
            coeffs: aux.u_inv.clone(),
        };
        // self * pi^{phi-1} * u^{-1} = p * (self / pi)
        let c = self.mul(&pi_pow)?.mul(&u_inv)?;
        c.div_p_exact(1).map_err(|_| Error::NotAUnit)
    }

    /// Exact division by pi^k via p-content plus residual pi-steps.
    pub fn div_pi_pow(&self, k: u32) -> Result<Self> {
        let phi = self.phi() as u32;
        let whole = k / phi;
        let rest = k % phi;
        let mut out = self.clone();
        if whole > 0 {
            // pi^phi = p*u, so divide by p^whole and by u^whole
            out = out.div_p_exact(whole)?;
            if whole >= 1 {
                let aux = cyclo_aux(self.p, self.level, self.prec);
                let u = PadicScalar {
                    p: self.p,
                    prec: self.prec,
                    level: self.level,
                    coeffs: aux.u_inv.clone(),
                };
                // u_inv^whole multiplies back the unit part
                out = out.mul(&u.pow(whole as u64)?)?;
            }
        }
        for _ in 0..rest {
            out = out.div_pi()?;
        }
        Ok(out)
    }

    /// Multiplication by pi^k.
    pub fn mul_pi_pow(&self, k: u32) -> Result<Self> {
        if self.level == 0 {
            assert!(k == 0, "pi-power at level 0");
            return Ok(self.clone());
        }
        let pi = Self::zeta_pow(self.p, self.prec, self.level, 1)
            .sub(&Self::one(self.p, self.prec, self.level))?;
        self.mul(&pi.pow(k as u64)?)
    }

    /// Inverse of a unit: series inversion mod p followed by Hensel lifting.
    pub fn invert(&self) -> Result<Self> {
        match self.valuation() {
            Valuation::Finite(r) if r.is_zero() => {}
            _ => return Err(Error::NotAUnit),
        }
        let phi = self.phi();
        let p = self.p;
        let mut b = if phi == 1 {
            // inverse mod p by Fermat, then lifted below
            let a0 = &self.coeffs[0] % BigUint::from(p);
            let inv0 = a0.modpow(&BigUint::from(p - 2), &BigUint::from(p));
            PadicScalar {
                p,
                prec: 1,
                level: 0,
                coeffs: vec![inv0],
            }
        } else {
            self.invert_mod_p()?
        };
        // Newton: b <- b(2 - ab), doubling p-adic precision each step
        while b.prec < self.prec {
            let new_prec = (b.prec * 2).min(self.prec);
            let m = pow_mod(p, new_prec);
            let mut bl = b.clone();
            bl.prec = new_prec;
            for c in bl.coeffs.iter_mut() {
                *c %= &m; // residues already < p^old <= p^new
            }
            let a = self.reduce_prec(new_prec);
            let two = PadicScalar::from_i64(p, new_prec, 2).raise_level(self.level);
            let t = two.sub(&a.mul(&bl)?)?;
            b = bl.mul(&t)?;
        }
        Ok(b)
    }

    /// Inverse mod (p, Phi_{p^n}) computed as a power series in y = x - 1.
    fn invert_mod_p(&self) -> Result<Self> {
        let p = self.p;
        let phi = self.phi();
        let pp = BigUint::from(p);
        // binomial transform to the y-basis mod p
        let binom = binomial_table_mod_p(phi, p);
        let mut yb = vec![0u64; phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            let ci = (c % &pp).to_u64_digits().first().copied().unwrap_or(0);
            if ci == 0 {
                continue;
            }
            for (j, yj) in yb.iter_mut().enumerate().take(i + 1) {
                *yj = (*yj + ci * binom[i][j]) % p;
            }
        }
        if yb[0] == 0 {
            return Err(Error::NotAUnit);
        }
        // power series inversion mod y^phi over F_p
        let inv0 = mod_inverse_u64(yb[0], p);
        let mut inv = vec![0u64; phi];
        inv[0] = inv0;
        for k in 1..phi {
            let mut acc: u64 = 0;
            for j in 1..=k {
                acc = (acc + yb[j] * inv[k - j]) % p;
            }
            inv[k] = (p - (acc * inv0) % p) % p;
        }
        // back to the x-basis: y^j = (x-1)^j
        let mut xb = vec![0u64; phi];
        for (j, &bj) in inv.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            for i in 0..=j {
                let sign_neg = (j - i) % 2 == 1;
                let term = (bj * binom[j][i]) % p;
                if sign_neg {
                    xb[i] = (xb[i] + p - term) % p;
                } else {
                    xb[i] = (xb[i] + term) % p;
                }
            }
        }
        Ok(PadicScalar {
            p,
            prec: 1,
            level: self.level,
            coeffs: xb.into_iter().map(BigUint::from).collect(),
        })
    }

    /// Equality at the coarser of the two precisions (after level unification).
    pub fn congruent(&self, other: &Self) -> bool {
        match self.unify(other) {
            Ok((a, b)) => a.coeffs == b.coeffs,
            Err(_) => false,
        }
    }
}

fn ord_p_residue(c: &BigUint, p: u64) -> u32 {
    let pp = BigUint::from(p);
    let mut v = 0u32;
    let mut c = c.clone();
    while (&c % &pp).is_zero() {
        c /= &pp;
        v += 1;
        if c.is_zero() {
            break;
        }
    }
    v
}

fn mod_inverse_u64(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p
    let mut base = a % p;
    let mut e = p - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.wrapping_mul(base) % p;
        }
        base = base.wrapping_mul(base) % p;
        e >>= 1;
    }
    acc
}

/// Pascal triangle mod p up to n rows.
fn binomial_table_mod_p(n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n]; n];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = 1;
        for j in 1..=i.min(n - 1) {
            row[j] = 1;
        }
    }
    for i in 1..n {
        for j in 1..=i {
            let up = t[i - 1][j - 1];
            let upr = if j <= i - 1 { t[i - 1][j] } else { 0 };
            t[i][j] = (up + upr) % p;
        }
    }
    t
}

/// Reduce a raw coefficient vector modulo Phi_{p^level}(x) = sum_i x^{i p^{level-1}}.
fn reduce_mod_phi(
    mut raw: Vec<BigUint>,
    p: u64,
    level: u32,
    phi: usize,
    modulus: &BigUint,
) -> Vec<BigUint> {
    let m = p.pow(level - 1) as usize;
    let mut deg = raw.len();
    while deg > phi {
        deg -= 1;
        let c = std::mem::replace(&mut raw[deg], BigUint::zero());
        if c.is_zero() {
            continue;
        }
        // x^deg = -sum_{i=0}^{p-2} x^{deg - phi + i*m}
        let base = deg - phi;
        for i in 0..(p - 1) as usize {
            let idx = base + i * m;
            raw[idx] = mod_sub(&raw[idx], &c, modulus);
        }
    }
    raw.truncate(phi);
    raw.resize(phi, BigUint::zero());
    raw
}

fn cyclo_aux(p: u64, level: u32, prec: u32) -> CycloAux {
    let key = (p, level, prec);
    {
        let cache = CYCLO_CACHE.lock().unwrap();
        if let Some(a) = cache.get(&key) {
            return a.clone();
        }
    }
    let phi = phi_pn(p, level) as u64;
    // compute pi^{phi-1} and pi^phi at one digit extra, pi = x - 1
    let hi = prec + 1;
    let one = PadicScalar::one(p, hi, level);
    let pi = PadicScalar::zeta_pow(p, hi, level, 1).sub(&one).unwrap();
    let pi_pow = pi.pow(phi - 1).unwrap();
    let pi_phi = pi_pow.mul(&pi).unwrap();
    let u = pi_phi.div_p_exact(1).expect("pi^phi is exactly divisible by p");
    let u_inv = u.invert().expect("pi^phi / p is a unit").reduce_prec(prec);
    let aux = CycloAux {
        pi_pow: pi_pow.reduce_prec(prec).coeffs,
        u_inv: u_inv.coeffs,
    };
    CYCLO_CACHE.lock().unwrap().insert(key, aux.clone());
    aux
}

// ---------------------------------------------------------------------------
// canonical serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    level: u32,
    coeffs: Vec<String>,
}

impl Serialize for PadicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarRepr {
            p: self.p,
            n: self.prec,
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.to_str_radix(10)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let r = ScalarRepr::deserialize(d)?;
        let phi = phi_pn(r.p, r.level);
        if r.coeffs.len() != phi {
            return Err(D::Error::custom(format!(
                "expected {phi} coefficients for level {}, got {}",
                r.level,
                r.coeffs.len()
            )));
        }
        let m = pow_mod(r.p, r.n);
        let mut coeffs = Vec::with_capacity(phi);
        for c in &r.coeffs {
            let v = BigUint::parse_bytes(c.as_bytes(), 10)
                .ok_or_else(|| D::Error::custom(format!("bad decimal string {c:?}")))?;
            if v >= m {
                return Err(D::Error::custom(format!(
                    "residue {c} out of range [0, p^N)"
                )));
            }
            coeffs.push(v);
        }
        Ok(PadicScalar {
            p: r.p,
            prec: r.n,
            level: r.level,
            coeffs,
        })
    }
}
