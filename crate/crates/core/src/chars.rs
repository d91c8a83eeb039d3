//! Finite-order characters of Gamma = Z_p^d and the twisting operators
//! built from them: the twist f_chi, the norm descent to a finite-index
//! subgroup, and the composite one-variable map chi_map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicScalar;
use crate::series::{specialize, IwasawaSeries, SeriesRing, SubgroupMap};

/// A character of p-power order: sigma_i maps to zeta_{p^level}^{images[i]}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCharacter {
    pub level: u32,
    pub images: Vec<i64>,
}

impl FiniteCharacter {
    pub fn trivial(d: usize) -> Self {
        FiniteCharacter {
            level: 0,
            images: vec![0; d],
        }
    }

    pub fn vars(&self) -> usize {
        self.images.len()
    }

    pub fn is_trivial(&self, p: u64) -> bool {
        let order = p.pow(self.level);
        self.images.iter().all(|c| c.rem_euclid(order as i64) == 0)
    }

    /// The scalar chi(sigma_i).
    pub fn value(&self, p: u64, prec: u32, i: usize) -> PadicScalar {
        PadicScalar::zeta_pow(p, prec, self.level, self.images[i])
    }

    /// chi(sigma^e) for an exponent vector e.
    pub fn value_at(&self, p: u64, prec: u32, exps: &[i64]) -> PadicScalar {
        let c: i64 = self
            .images
            .iter()
            .zip(exps)
            .map(|(a, b)| a.wrapping_mul(*b))
            .sum();
        PadicScalar::zeta_pow(p, prec, self.level, c)
    }

    /// Pointwise product of characters (levels unified to the maximum).
    pub fn mul(&self, other: &Self, p: u64) -> Result<Self> {
        if self.vars() != other.vars() {
            return Err(Error::BadInput("character arities differ".into()));
        }
        let level = self.level.max(other.level);
        let lift = |c: i64, from: u32| c * (p.pow(level - from) as i64);
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| lift(*a, self.level) + lift(*b, other.level))
            .collect();
        Ok(FiniteCharacter { level, images })
    }

    /// The complex-conjugate (inverse) character.
    pub fn inverse(&self) -> Self {
        FiniteCharacter {
            level: self.level,
            images: self.images.iter().map(|c| -c).collect(),
        }
    }

    /// Pull a character on the target of `m` back to its source:
    /// (pullback omega)(sigma_i) = omega(m(sigma_i)).
    pub fn pullback(&self, m: &SubgroupMap) -> Result<Self> {
        if self.vars() != m.target_vars() {
            return Err(Error::BadInput(
                "character arity does not match the map target".into(),
            ));
        }
        let d = m.source_vars();
        let images = (0..d)
            .map(|i| {
                m.matrix
                    .iter()
                    .zip(&self.images)
                    .map(|(row, c)| row[i] * c)
                    .sum()
            })
            .collect();
        Ok(FiniteCharacter {
            level: self.level,
            images,
        })
    }
}

/// A finite-index subgroup Phi of Gamma = Z_p^d, generated by the columns
/// of the integer matrix H (index = |det H|, a p-power).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteIndexSubgroup {
    #[serde(rename = "H")]
    pub h: Vec<Vec<i64>>,
}

impl FiniteIndexSubgroup {
    pub fn new(h: Vec<Vec<i64>>) -> Result<Self> {
        let d = h.len();
        if h.iter().any(|r| r.len() != d) {
            return Err(Error::BadInput("H must be square".into()));
        }
        Ok(FiniteIndexSubgroup { h })
    }

    pub fn full(d: usize) -> Self {
        let h = (0..d)
            .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
            .collect();
        FiniteIndexSubgroup { h }
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }
}

fn is_p_power(mut v: i128, p: u64) -> Option<u32> {
    if v <= 0 {
        return None;
    }
    let mut e = 0;
    while v > 1 {
        if v % p as i128 != 0 {
            return None;
        }
        v /= p as i128;
        e += 1;
    }
    Some(e)
}

/// Diagonalization U * H * V = diag(d_1, ..., d_d) with U, V unimodular;
/// returns (U, diag) — V is not needed for character enumeration.
fn diagonalize(h: &[Vec<i64>]) -> Result<(Vec<Vec<i128>>, Vec<i128>)> {
    let d = h.len();
    let mut m: Vec<Vec<i128>> = h
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..d)
        .map(|i| (0..d).map(|j| i128::from(i == j)).collect())
        .collect();
    for k in 0..d {
        loop {
            // pick the smallest nonzero entry of the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..d {
                for j in k..d {
                    if m[i][j] != 0
                        && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Err(Error::BadInput("H is singular".into()));
            };
            m.swap(k, pi);
            u.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            // clear column k with row operations
            let mut dirty = false;
            for i in k + 1..d {
                if m[i][k] != 0 {
                    let q = m[i][k].div_euclid(m[k][k]);
                    for j in 0..d {
                        m[i][j] -= q * m[k][j];
                        u[i][j] -= q * u[k][j];
                    }
                    if m[i][k] != 0 {
                        dirty = true;
                    }
                }
            }
            // clear row k with column operations
            for j in k + 1..d {
                if m[k][j] != 0 {
                    let q = m[k][j].div_euclid(m[k][k]);
                    for i in 0..d {
                        m[i][j] -= q * m[i][k];
                    }
                    if m[k][j] != 0 {
                        dirty = true;
                    }
                }
            }
            let clean = (k + 1..d).all(|i| m[i][k] == 0) && (k + 1..d).all(|j| m[k][j] == 0);
            if clean && !dirty {
                break;
            }
        }
    }
    let diag = (0..d).map(|i| m[i][i].abs()).collect();
    Ok((u, diag))
}

/// The characters of Gamma/Phi in canonical (lexicographic) enumeration
/// order, including the trivial character.
pub fn quotient_characters(sub: &FiniteIndexSubgroup, p: u64) -> Result<Vec<FiniteCharacter>> {
    let d = sub.dim();
    let (u, diag) = diagonalize(&sub.h)?;
    let mut exps = Vec::with_capacity(d);
    for &di in &diag {
        let Some(e) = is_p_power(di, p) else {
            return Err(Error::BadInput(
                "index of the subgroup is not a p-power".into(),
            ));
        };
        exps.push(e);
    }
    let n = exps.iter().copied().max().unwrap_or(0);
    let pn = (p as i128).pow(n);
    let mut out = Vec::new();
    let mut a = vec![0i128; d];
    loop {
        // chi_a(sigma_i) = zeta_{p^n} ^ sum_j a_j (p^n / d_j) U_{ji}
        let images = (0..d)
            .map(|i| {
                let mut c: i128 = 0;
                for j in 0..d {
                    c += a[j] * (pn / diag[j]) * u[j][i];
                }
                (c.rem_euclid(pn)) as i64
            })
            .collect();
        out.push(FiniteCharacter { level: n, images });
        // lexicographic increment
        let mut k = d;
        while k > 0 {
            k -= 1;
            a[k] += 1;
            if a[k] < diag[k] {
                break;
            }
            a[k] = 0;
            if k == 0 {
                return Ok(out);
            }
        }
        if d == 0 {
            return Ok(out);
        }
    }
}

/// Twist by a character: the automorphism sigma_i -> chi(sigma_i) sigma_i,
/// i.e. (1 + t_i) -> zeta^{c_i} (1 + t_i).  Degree-preserving, hence exact
/// at truncation.
pub fn twist(f: &IwasawaSeries, chi: &FiniteCharacter) -> Result<IwasawaSeries> {
    if chi.vars() != f.ring.vars {
        return Err(Error::BadInput("character arity mismatch".into()));
    }
    let p = f.ring.prime.p;
    let prec = f.ring.prime.precision;
    let ring = f.ring.with_level(chi.level);
    let one = PadicScalar::one(p, prec, 0);
    let images: Vec<IwasawaSeries> = (0..f.ring.vars)
        .map(|i| {
            let z = chi.value(p, prec, i);
            let zm1 = z.sub(&one).expect("same prime");
            let mut e = vec![0u32; f.ring.vars];
            e[i] = 1;
            IwasawaSeries::constant(ring, zm1)
                .add(&IwasawaSeries::monomial(ring, e, z))
                .expect("same ring")
        })
        .collect();
    f.substitute(&images)
}

/// Norm descent: the product of f_chi over all characters chi of Gamma/Phi,
/// verified to have level-0 coefficients (membership in Lambda_Phi).  The
/// result is returned in the coordinates of Gamma; `subgroup_coordinates`
/// re-expresses it for diagonal H.
pub fn norm_descent(f: &IwasawaSeries, sub: &FiniteIndexSubgroup) -> Result<IwasawaSeries> {
    if f.denom_exp != 0 {
        return Err(Error::BadInput("norm descent requires an integral series".into()));
    }
    if sub.dim() != f.ring.vars {
        return Err(Error::BadInput("subgroup dimension mismatch".into()));
    }
    let p = f.ring.prime.p;
    let chars = quotient_characters(sub, p)?;
    let mut acc = IwasawaSeries::one(f.ring);
    for chi in &chars {
        acc = acc.mul(&twist(f, chi)?)?;
    }
    descend_to_level_zero(&acc)
}

/// Check every coefficient is a level-0 (rational) residue and rebuild the
/// series over level 0.
fn descend_to_level_zero(f: &IwasawaSeries) -> Result<IwasawaSeries> {
    let mut out = IwasawaSeries::zero(SeriesRing {
        level: 0,
        ..f.ring
    });
    for (e, c) in f.iter_terms() {
        let c0 = c.descend_level_zero().ok_or(Error::IntegralityViolation)?;
        out = out.add(&IwasawaSeries::monomial(out.ring, e.clone(), c0))?;
    }
    out.denom_exp = f.denom_exp;
    Ok(out.renormalized())
}

/// Re-express a series known to lie in Lambda_Phi in the coordinates of
/// Phi, for diagonal H = diag(p^{a_0}, ..., p^{a_{d-1}}): solve
/// g(t) = h(s(t)) with s_i = (1 + t_i)^{p^{a_i}} - 1 degree by degree.
/// The coefficient of s^e is certified to N - sum_i a_i e_i digits only.
pub fn subgroup_coordinates(
    g: &IwasawaSeries,
    sub: &FiniteIndexSubgroup,
) -> Result<IwasawaSeries> {
    let d = sub.dim();
    if d != g.ring.vars {
        return Err(Error::BadInput("subgroup dimension mismatch".into()));
    }
    let p = g.ring.prime.p;
    let mut shifts = Vec::with_capacity(d);
    for (i, row) in sub.h.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i != j && x != 0 {
                return Err(Error::BadInput(
                    "coordinate rewrite is implemented for diagonal H only".into(),
                ));
            }
        }
        let Some(a) = is_p_power(row[i].abs() as i128, p) else {
            return Err(Error::BadInput(
                "diagonal entries must be p-powers".into(),
            ));
        };
        shifts.push(a);
    }
    let ring = g.ring;
    let one = IwasawaSeries::one(ring);
    let s: Vec<IwasawaSeries> = (0..d)
        .map(|i| {
            crate::series::binomial_power(ring, i, p.pow(shifts[i]) as i64)
                .sub(&one)
                .expect("same ring")
        })
        .collect();
    // power tables for s_i
    let dd = ring.degree as usize;
    let mut pows: Vec<Vec<IwasawaSeries>> = Vec::with_capacity(d);
    for si in &s {
        let mut v = vec![one.clone()];
        for k in 1..=dd {
            let next = v[k - 1].mul(si)?;
            v.push(next);
        }
        pows.push(v);
    }
    let mut residual = g.clone();
    let mut out = IwasawaSeries::zero(ring);
    let exps = graded_exponents(d, ring.degree);
    for e in exps {
        let c = residual.coefficient(&e);
        if c.is_zero_residue() {
            continue;
        }
        let loss: u32 = e
            .iter()
            .zip(&shifts)
            .map(|(&x, &a)| x * a)
            .sum();
        if loss >= c.prec {
            return Err(Error::PrecisionExhausted(
                "coordinate rewrite divides away every certified digit",
            ));
        }
        let h_e = c
            .div_p_exact(loss)
            .map_err(|_| Error::IntegralityViolation)?;
        // subtract h_e * s^e from the residual
        let mut term = IwasawaSeries::constant(ring, h_e.clone());
        for (i, &x) in e.iter().enumerate() {
            if x > 0 {
                term = term.mul(&pows[i][x as usize])?;
            }
        }
        residual = residual.sub(&term)?;
        out = out.add(&IwasawaSeries::monomial(ring, e, h_e))?;
    }
    out.denom_exp = g.denom_exp;
    Ok(out)
}

/// All exponent vectors of arity d with total degree <= max, in an order
/// extending the componentwise partial order (graded lexicographic).
fn graded_exponents(d: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut e = vec![0u32; d.max(1)];
    if d == 0 {
        return vec![Vec::new()];
    }
    fn rec(out: &mut Vec<Vec<u32>>, e: &mut Vec<u32>, i: usize, left: u32, deg: u32) {
        if i == e.len() {
            if e.iter().sum::<u32>() == deg {
                out.push(e.clone());
            }
            return;
        }
        for x in 0..=left {
            e[i] = x;
            rec(out, e, i + 1, left - x, deg);
        }
        e[i] = 0;
    }
    for deg in 0..=max {
        rec(&mut out, &mut e, 0, deg, deg);
    }
    out
}

/// The composite one-variable map: specialize(twist(f, chi), m).
pub fn chi_map(
    f: &IwasawaSeries,
    chi: &FiniteCharacter,
    m: &SubgroupMap,
    target: SeriesRing,
) -> Result<IwasawaSeries> {
    let twisted = twist(f, chi)?;
    specialize(&twisted, m, target.with_level(chi.level))
}

/// Evaluate f at the character omega: t_i -> omega(sigma_i) - 1.
pub fn evaluate_at_character(f: &IwasawaSeries, omega: &FiniteCharacter) -> Result<PadicScalar> {
    if omega.vars() != f.ring.vars {
        return Err(Error::BadInput("character arity mismatch".into()));
    }
    let p = f.ring.prime.p;
    let prec = f.ring.prime.precision;
    let one = PadicScalar::one(p, prec, 0);
    let images: Vec<PadicScalar> = (0..f.ring.vars)
        .map(|i| omega.value(p, prec, i).sub(&one).expect("same prime"))
        .collect();
    f.evaluate(&images)
}

/// Like `evaluate_at_character` but without clearing the denominator.
pub fn evaluate_at_character_raw(
    f: &IwasawaSeries,
    omega: &FiniteCharacter,
) -> Result<(PadicScalar, u32)> {
    let p = f.ring.prime.p;
    let prec = f.ring.prime.precision;
    let one = PadicScalar::one(p, prec, 0);
    let images: Vec<PadicScalar> = (0..f.ring.vars)
        .map(|i| omega.value(p, prec, i).sub(&one).expect("same prime"))
        .collect();
    f.evaluate_raw(&images)
}
