//! Small finite fields F_{p^r} in a polynomial basis over F_p, sized for
//! the fibration checks (q up to a few hundred).

use crate::error::{Error, Result};

/// Field context: p, r, and a monic irreducible modulus of degree r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf {
    pub p: u64,
    pub r: u32,
    /// monic modulus, little-endian, length r + 1
    modulus: Vec<u64>,
}

/// Field element: little-endian coordinates of length r.
pub type Fq = Vec<u64>;

// ---- arithmetic on F_p[x] used to build the modulus ----

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    fp_rem(&mut prod, m, p);
    prod
}

fn fp_rem(a: &mut Vec<u64>, m: &[u64], p: u64) {
    let dm = m.len() - 1;
    fp_trim(a);
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            // m is monic
            for (j, &c) in m.iter().enumerate() {
                let idx = shift + j;
                a[idx] = (a[idx] + (p - lead % p) * c) % p;
            }
        }
        fp_trim(a);
        if a.len() == shift + dm + 1 {
            a.pop();
            fp_trim(a);
        }
    }
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        // make b monic for remainder
        let lead = *b.last().unwrap();
        let inv = mod_inv(lead, p);
        let monic: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
        fp_rem(&mut a, &monic, p);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat: p prime
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// x^{p^k} mod m by repeated Frobenius.
fn fp_frobenius_power(m: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut x = vec![0, 1];
    fp_rem(&mut x, m, p);
    for _ in 0..k {
        // x <- x^p mod m by square-and-multiply
        let base = x.clone();
        let mut acc = vec![1u64];
        let mut e = p;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_mulmod(&acc, &sq, m, p);
            }
            sq = fp_mulmod(&sq.clone(), &sq, m, p);
            e >>= 1;
        }
        x = acc;
    }
    x
}

fn fp_is_irreducible(m: &[u64], p: u64) -> bool {
    let r = (m.len() - 1) as u32;
    if r == 0 {
        return false;
    }
    // x^{p^r} == x mod m
    let mut xr = fp_frobenius_power(m, p, r);
    if xr.len() < 2 {
        xr.resize(2, 0);
    }
    if xr != [0, 1] {
        return false;
    }
    // gcd(x^{p^{r/t}} - x, m) trivial for each prime t | r
    let mut n = r;
    let mut t = 2;
    let mut primes = Vec::new();
    while t * t <= n {
        if n % t == 0 {
            primes.push(t);
            while n % t == 0 {
                n /= t;
            }
        }
        t += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for t in primes {
        let mut y = fp_frobenius_power(m, p, r / t);
        // y - x
        if y.len() < 2 {
            y.resize(2, 0);
        }
        y[1] = (y[1] + p - 1) % p;
        let g = fp_gcd(&y, m, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl Gf {
    /// Build F_{p^r}, locating a monic irreducible modulus by enumeration.
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::BadInput(format!("{p} is not prime")));
        }
        if r == 0 || r > 8 {
            return Err(Error::BadInput("extension degree out of range".into()));
        }
        if r == 1 {
            return Ok(Gf {
                p,
                r,
                modulus: vec![0, 1],
            });
        }
        let count = p.pow(r);
        for idx in 0..count {
            let mut m = digits(idx, p, r as usize);
            m.push(1); // monic
            if fp_is_irreducible(&m, p) {
                return Ok(Gf { p, r, modulus: m });
            }
        }
        Err(Error::SearchExhausted(count))
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.r)
    }

    pub fn zero(&self) -> Fq {
        vec![0; self.r as usize]
    }

    pub fn one(&self) -> Fq {
        self.embed(1)
    }

    /// Constant of the prime field.
    pub fn embed(&self, c: u64) -> Fq {
        let mut v = self.zero();
        v[0] = c % self.p;
        v
    }

    /// The element with index n in [0, q), base-p little-endian digits.
    pub fn element(&self, n: u64) -> Fq {
        digits(n % self.q(), self.p, self.r as usize)
    }

    pub fn index(&self, a: &Fq) -> u64 {
        a.iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.p + d % self.p)
    }

    pub fn is_zero(&self, a: &Fq) -> bool {
        a.iter().all(|&d| d % self.p == 0)
    }

    pub fn add(&self, a: &Fq, b: &Fq) -> Fq {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y % self.p) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &Fq) -> Fq {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        let mut out = fp_mulmod(a, b, &self.modulus, self.p);
        out.resize(self.r as usize, 0);
        out
    }

    pub fn scalar_mul(&self, c: u64, a: &Fq) -> Fq {
        a.iter().map(|&x| x * (c % self.p) % self.p).collect()
    }

    pub fn pow(&self, a: &Fq, mut e: u64) -> Fq {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base.clone(), &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &Fq) -> Result<Fq> {
        if self.is_zero(a) {
            return Err(Error::BadInput("inverse of zero".into()));
        }
        Ok(self.pow(a, self.q() - 2))
    }
}

fn digits(mut n: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for d in out.iter_mut() {
        *d = n % p;
        n /= p;
    }
    out
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
