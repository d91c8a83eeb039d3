//! Local arithmetic data of a semistable elliptic fibration and the
//! explicit Euler-type factors attached to a p-adic Lie tower: the unit
//! root alpha_v, the correction terms varrho and theta, the dagger and
//! diamond factors, the Xi product, the star interpolation constant, and
//! the L-value element c_chi.
//!
//! Class-field-theoretic inputs (Frobenius exponent vectors, component
//! group orders m_v, Gauss sums tau, the Tate character ideal w_v, and
//! torsion orders) are supplied data, never computed here.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::chars::{evaluate_at_character, FiniteCharacter};
use crate::error::{Error, Result};
use crate::padic::{PadicScalar, Prime};
use crate::series::{binomial_power, group_element, specialize, IwasawaSeries, SeriesRing, SubgroupMap};

/// Reduction type of the fibre at a place, with the supplied trace of
/// Frobenius in the good ordinary case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Reduction {
    GoodOrdinary {
        #[serde(rename = "a")]
        a_v: i64,
    },
    SplitMult,
    NonsplitMult,
}

impl Reduction {
    pub fn is_multiplicative(&self) -> bool {
        matches!(self, Reduction::SplitMult | Reduction::NonsplitMult)
    }

    /// lambda_v: +1 for split, -1 for non-split multiplicative reduction.
    pub fn lambda(&self) -> Option<i64> {
        match self {
            Reduction::GoodOrdinary { .. } => None,
            Reduction::SplitMult => Some(1),
            Reduction::NonsplitMult => Some(-1),
        }
    }
}

/// A generator of a principal ideal, with an explicit zero marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealGen {
    Zero,
    Gen(IwasawaSeries),
}

impl IdealGen {
    pub fn gen_i64(ring: SeriesRing, v: i64) -> Self {
        IdealGen::Gen(IwasawaSeries::from_i64(ring, v))
    }

    pub fn one(ring: SeriesRing) -> Self {
        IdealGen::Gen(IwasawaSeries::one(ring))
    }

    /// Multiply two generators; Zero is absorbing.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (IdealGen::Zero, _) | (_, IdealGen::Zero) => Ok(IdealGen::Zero),
            (IdealGen::Gen(a), IdealGen::Gen(b)) => Ok(IdealGen::Gen(a.mul(b)?)),
        }
    }

    /// Push the generator through a quotient map of the ambient group.
    pub fn specialize(&self, m: &SubgroupMap, target: SeriesRing) -> Result<Self> {
        match self {
            IdealGen::Zero => Ok(IdealGen::Zero),
            IdealGen::Gen(f) => {
                let g = specialize(f, m, target)?;
                // a generator may die under specialization
                if g.is_literal_zero() {
                    Ok(IdealGen::Zero)
                } else {
                    Ok(IdealGen::Gen(g))
                }
            }
        }
    }
}

/// Arithmetic data of one place of the base curve.
///
/// `frobenius` gives the exponent vector of [v]_{L/K} on the chosen
/// topological generators of Gamma whenever v is unramified in the
/// relevant subextension; `sigma` is the pinned topological generator of
/// the decomposition group Gamma_v when it has rank one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceData {
    pub id: String,
    /// residue field cardinality, a power of p
    #[serde(rename = "q")]
    pub q_v: u64,
    pub reduction: Reduction,
    /// invariant component group count m_v
    #[serde(rename = "m")]
    pub m_v: u64,
    pub frobenius: Vec<i64>,
    pub in_s: bool,
    /// generator of Gamma_v in Gamma-coordinates, when rank(Gamma_v) = 1
    #[serde(default)]
    pub sigma: Option<Vec<i64>>,
    /// rank of the decomposition group Gamma_v inside Gamma
    #[serde(default)]
    pub gamma_rank: u32,
    /// whether the quadratic residue extension F_{q_v^2} lies in L_v
    #[serde(default)]
    pub fq2_in_l: bool,
    /// whether v ramifies over the anticyclotomic-type piece L'_0/K
    #[serde(default)]
    pub ramified_in_l0_prime: bool,
    /// supplied Tate character ideal w_v, as an element of Lambda_Gamma
    #[serde(default)]
    pub tate_char_ideal: Option<IdealGen>,
}

impl PlaceData {
    pub fn validate(&self, p: u64) -> Result<()> {
        if p_power_exponent(p, self.q_v).is_none() {
            return Err(Error::BadInput(format!(
                "q_v = {} is not a power of p = {}",
                self.q_v, p
            )));
        }
        if self.m_v == 0 {
            return Err(Error::BadInput("m_v must be positive".into()));
        }
        if let Reduction::GoodOrdinary { a_v } = self.reduction {
            if a_v.rem_euclid(p as i64) == 0 {
                return Err(Error::NotOrdinary);
            }
        }
        Ok(())
    }
}

/// Local shape of a place relative to one subextension L'/K of the tower:
/// the rank of Psi_v = Gal(L/L')_v, the rank of the decomposition group
/// Gamma'_v in the quotient, the ramification flag v in S', and the
/// residue-quadratic flag F_{q_v^2} in L'_v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalShape {
    pub psi_rank: u32,
    pub gamma_rank: u32,
    /// generator of Gamma'_v in target coordinates, when its rank is one
    #[serde(default)]
    pub sigma: Option<Vec<i64>>,
    pub in_s_prime: bool,
    pub fq2_in_l_prime: bool,
}

/// Global data of the tower L/K: the rank d of Gamma, the index of the
/// designated unramified direction Gamma_0, the intermediate quotient
/// maps, the ramification locus S, and the supplied torsion order
/// |A_{p^infty}(K)|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub d: usize,
    pub gamma0_index: usize,
    #[serde(default)]
    pub maps: Vec<SubgroupMap>,
    #[serde(default)]
    pub s_places: Vec<String>,
    pub torsion_order: u64,
}

impl TowerConfig {
    pub fn validate(&self, places: &[PlaceData], p: u64) -> Result<()> {
        if self.gamma0_index >= self.d.max(1) {
            return Err(Error::BadInput("gamma0_index out of range".into()));
        }
        let ids: BTreeSet<&str> = places.iter().map(|v| v.id.as_str()).collect();
        for id in &self.s_places {
            if !ids.contains(id.as_str()) {
                return Err(Error::BadInput(format!("unknown place {id} in S")));
            }
        }
        for v in places {
            v.validate(p)?;
            if self.s_places.contains(&v.id) != v.in_s {
                return Err(Error::InconsistentFlags("in_s does not match S"));
            }
        }
        Ok(())
    }
}

/// L-polynomial P_{chi^{-1}}(T) with P(0) = 1, coefficients supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LPolynomial {
    pub coeffs: Vec<PadicScalar>,
}

impl LPolynomial {
    pub fn validate(&self) -> Result<()> {
        let c0 = self
            .coeffs
            .first()
            .ok_or_else(|| Error::BadInput("empty L-polynomial".into()))?;
        let one = PadicScalar::one(c0.p, c0.prec, c0.level);
        if !c0.congruent(&one) {
            return Err(Error::BadInput("L-polynomial constant term is not 1".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// ord_p of a pure p-power, or None.
pub fn p_power_exponent(p: u64, q: u64) -> Option<u32> {
    if q == 0 {
        return None;
    }
    let mut q = q;
    let mut r = 0u32;
    while q % p == 0 {
        q /= p;
        r += 1;
    }
    if q == 1 {
        Some(r)
    } else {
        None
    }
}

/// Unit root of X^2 - a_v X + q_v, lifted by Newton iteration from the
/// residue a_v mod p to the working precision.
pub fn unit_root(prime: Prime, v: &PlaceData) -> Result<PadicScalar> {
    let Reduction::GoodOrdinary { a_v } = v.reduction else {
        return Err(Error::NotOrdinary);
    };
    let p = prime.p;
    let prec = prime.precision;
    if a_v.rem_euclid(p as i64) == 0 {
        return Err(Error::NotOrdinary);
    }
    let a = PadicScalar::from_i64(p, prec, a_v);
    let q = PadicScalar::from_biguint(p, prec, BigUint::from(v.q_v));
    let two = PadicScalar::from_i64(p, prec, 2);
    let mut x = a.clone();
    // quadratic convergence: precision doubles each step, so N+2 steps
    // always suffice; stop early once the iterate is stable
    for _ in 0..(prec + 2) {
        // f(x) = x^2 - a x + q, f'(x) = 2x - a (a unit by ordinarity)
        let fx = x.mul(&x)?.sub(&a.mul(&x)?)?.add(&q)?;
        let dfx = two.mul(&x)?.sub(&a)?;
        let next = x.sub(&fx.mul(&dfx.invert()?)?)?;
        if next.congruent(&x) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// varrho correction term: 1 when the target rank e is positive, the
/// square of the supplied torsion order when e = 0.
pub fn varrho(tower: &TowerConfig, e: usize, target: SeriesRing) -> Result<IwasawaSeries> {
    if target.vars != e {
        return Err(Error::BadInput("target ring rank does not match e".into()));
    }
    if e >= 1 {
        return Ok(IwasawaSeries::one(target));
    }
    let t = BigUint::from(tower.torsion_order);
    Ok(IwasawaSeries::constant(
        target,
        PadicScalar::from_biguint(target.prime.p, target.prime.precision, &t * &t),
    ))
}

fn shape_sigma(shape: &LocalShape) -> Result<&Vec<i64>> {
    shape
        .sigma
        .as_ref()
        .ok_or(Error::InconsistentFlags("rank-one decomposition group without a pinned generator"))
}

/// theta_{L/L',v}: the local correction ideal generator for the
/// subextension cut out by the quotient map `m`, per the four-part case
/// table over reduction type, ramification, and residue extensions.
pub fn theta_factor(
    v: &PlaceData,
    shape: &LocalShape,
    m: &SubgroupMap,
    target: SeriesRing,
) -> Result<IdealGen> {
    v.validate(target.prime.p)?;
    if shape.in_s_prime && !v.in_s {
        return Err(Error::InconsistentFlags("v in S' requires v in S"));
    }
    if m.target_vars() != target.vars {
        return Err(Error::BadInput("target ring rank does not match the map".into()));
    }
    // (a) v unramified in L/K
    if !v.in_s {
        if shape.psi_rank > 0 {
            return Ok(IdealGen::gen_i64(target, v.m_v as i64));
        }
        return Ok(IdealGen::one(target));
    }
    match v.reduction {
        // (b) good ordinary
        Reduction::GoodOrdinary { .. } => {
            if shape.in_s_prime {
                return Ok(IdealGen::one(target));
            }
            let alpha_inv = unit_root(target.prime, v)?.invert()?;
            let fr = m.map_exponents(&v.frobenius);
            let fr_inv: Vec<i64> = fr.iter().map(|x| -x).collect();
            let one = IwasawaSeries::one(target);
            let f1 = one.sub(&group_element(target, &fr)?.mul_scalar(&alpha_inv)?)?;
            let f2 = one.sub(&group_element(target, &fr_inv)?.mul_scalar(&alpha_inv)?)?;
            Ok(IdealGen::Gen(f1.mul(&f2)?))
        }
        // (c) split multiplicative
        Reduction::SplitMult => {
            if shape.psi_rank > 0 && shape.gamma_rank == 0 {
                let w = v
                    .tate_char_ideal
                    .as_ref()
                    .ok_or(Error::InconsistentFlags("case (c) requires the supplied w_v"))?;
                return w.specialize(m, target);
            }
            if shape.psi_rank > 0 && shape.gamma_rank == 1 {
                let s = shape_sigma(shape)?;
                let g = group_element(target, s)?.sub(&IwasawaSeries::one(target))?;
                return Ok(IdealGen::Gen(g));
            }
            Ok(IdealGen::one(target))
        }
        // (d) non-split multiplicative
        Reduction::NonsplitMult => {
            let two_m = 2 * v.m_v as i64;
            if shape.gamma_rank == 0 && shape.psi_rank >= 2 {
                return Ok(IdealGen::gen_i64(target, two_m));
            }
            if shape.gamma_rank == 0 && shape.psi_rank == 1 {
                if v.fq2_in_l {
                    return Ok(IdealGen::gen_i64(target, v.m_v as i64));
                }
                return Ok(IdealGen::gen_i64(target, two_m));
            }
            if shape.psi_rank > 0 && !shape.in_s_prime && shape.gamma_rank == 1 {
                let fr = m.map_exponents(&v.frobenius);
                let g = IwasawaSeries::one(target).add(&group_element(target, &fr)?)?;
                return Ok(IdealGen::Gen(g));
            }
            if shape.psi_rank > 0
                && shape.in_s_prime
                && shape.gamma_rank == 1
                && shape.fq2_in_l_prime
            {
                let s = shape_sigma(shape)?;
                let g = IwasawaSeries::one(target).add(&group_element(target, s)?)?;
                return Ok(IdealGen::Gen(g));
            }
            Ok(IdealGen::one(target))
        }
    }
}

/// dagger_{A/L}: product over the supplied places of the three-case
/// table; equal to 1 whenever S_1 is empty.
pub fn dagger(
    tower: &TowerConfig,
    places: &[PlaceData],
    ring: SeriesRing,
) -> Result<IwasawaSeries> {
    tower.validate(places, ring.prime.p)?;
    if ring.vars != tower.d {
        return Err(Error::BadInput("dagger lives in Lambda_Gamma".into()));
    }
    let mut acc = IwasawaSeries::one(ring);
    for v in places {
        let factor = dagger_local(v, ring)?;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

fn dagger_local(v: &PlaceData, ring: SeriesRing) -> Result<IwasawaSeries> {
    // (1) unramified with trivial decomposition group: the component count
    if !v.in_s && v.gamma_rank == 0 {
        return Ok(IwasawaSeries::from_i64(ring, v.m_v as i64));
    }
    // (2) v in S_1 (procyclic decomposition group), split multiplicative
    // or non-split with the quadratic residue extension inside L_v
    if v.in_s && v.gamma_rank == 1 {
        let applies = match v.reduction {
            Reduction::SplitMult => true,
            Reduction::NonsplitMult => v.fq2_in_l,
            Reduction::GoodOrdinary { .. } => false,
        };
        if applies {
            let lambda = v.reduction.lambda().expect("multiplicative");
            let sigma = v
                .sigma
                .as_ref()
                .ok_or(Error::InconsistentFlags("v in S_1 without a pinned generator"))?;
            return IwasawaSeries::from_i64(ring, lambda).sub(&group_element(ring, sigma)?);
        }
    }
    // (3) all remaining cases contribute 1
    Ok(IwasawaSeries::one(ring))
}

/// diamond_{v,chi}: the local interpolation factor in Lambda_{Gamma_0},
/// for v in S.
pub fn diamond(
    v: &PlaceData,
    chi: &FiniteCharacter,
    tower: &TowerConfig,
    ring: SeriesRing,
) -> Result<IwasawaSeries> {
    let p = ring.prime.p;
    let prec = ring.prime.precision;
    v.validate(p)?;
    if ring.vars != 1 {
        return Err(Error::BadInput("diamond lives in Lambda_Gamma_0".into()));
    }
    if !v.in_s {
        return Err(Error::BadInput("diamond is defined for v in S".into()));
    }
    if chi.vars() != v.frobenius.len() {
        return Err(Error::BadInput("character arity mismatch".into()));
    }
    if v.ramified_in_l0_prime {
        return Ok(IwasawaSeries::one(ring));
    }
    let ring = ring.with_level(chi.level);
    let a = v.frobenius[tower.gamma0_index];
    let chi_v = chi.value_at(p, prec, &v.frobenius);
    let chi_v_inv = chi.inverse().value_at(p, prec, &v.frobenius);
    let one = IwasawaSeries::one(ring);
    match v.reduction {
        Reduction::GoodOrdinary { .. } => {
            let alpha_inv = unit_root(ring.prime, v)?.invert()?;
            let f1 = one.sub(
                &binomial_power(ring, 0, -a).mul_scalar(&alpha_inv.mul(&chi_v_inv)?)?,
            )?;
            let f2 = one.sub(
                &binomial_power(ring, 0, a).mul_scalar(&alpha_inv.mul(&chi_v)?)?,
            )?;
            f1.mul(&f2)
        }
        Reduction::SplitMult => {
            one.sub(&binomial_power(ring, 0, -a).mul_scalar(&chi_v_inv)?)
        }
        Reduction::NonsplitMult => {
            if p != 2 {
                return Ok(one);
            }
            one.add(&binomial_power(ring, 0, -a).mul_scalar(&chi_v_inv)?)
                .map(|f| f.neg())
        }
    }
}

/// Xi_{S,omega}: the product of local terms over the places of S outside
/// the conductor support of omega.
pub fn xi_factor(
    prime: Prime,
    places: &[PlaceData],
    omega: &FiniteCharacter,
    conductor_support: &BTreeSet<String>,
) -> Result<PadicScalar> {
    let p = prime.p;
    let prec = prime.precision;
    let mut acc = PadicScalar::one(p, prec, omega.level);
    for v in places {
        if !v.in_s || conductor_support.contains(&v.id) {
            continue;
        }
        if omega.vars() != v.frobenius.len() {
            return Err(Error::BadInput("character arity mismatch".into()));
        }
        let w = omega.value_at(p, prec, &v.frobenius);
        let w_inv = omega.inverse().value_at(p, prec, &v.frobenius);
        let factor = match v.reduction {
            Reduction::GoodOrdinary { .. } => {
                let alpha_inv = unit_root(prime, v)?.invert()?;
                let one = PadicScalar::one(p, prec, omega.level);
                one.sub(&alpha_inv.mul(&w)?)?
                    .mul(&one.sub(&alpha_inv.mul(&w_inv)?)?)?
            }
            _ => {
                let lambda = v.reduction.lambda().expect("multiplicative");
                PadicScalar::from_i64(p, prec, lambda).sub(&w_inv)?
            }
        };
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// alpha_{D_omega}: product of alpha_v^{ord_v} over ordinary places and
/// lambda_v^{ord_v - 1} over multiplicative places in the conductor
/// support.
pub fn alpha_conductor(
    prime: Prime,
    places: &[PlaceData],
    conductor: &BTreeMap<String, u32>,
) -> Result<PadicScalar> {
    let mut acc = PadicScalar::one(prime.p, prime.precision, 0);
    for v in places {
        let ord = conductor.get(&v.id).copied().unwrap_or(0);
        match v.reduction {
            Reduction::GoodOrdinary { .. } => {
                if v.in_s && ord > 0 {
                    acc = acc.mul(&unit_root(prime, v)?.pow(ord as u64)?)?;
                }
            }
            _ => {
                if v.in_s && ord > 0 {
                    let lambda = v.reduction.lambda().expect("multiplicative");
                    let sign = if lambda == -1 && (ord - 1) % 2 == 1 {
                        -1
                    } else {
                        1
                    };
                    acc = acc.mul(&PadicScalar::from_i64(prime.p, prime.precision, sign))?;
                }
            }
        }
    }
    Ok(acc)
}

/// star_omega: the interpolation constant
/// omega(dagger)^{-1} alpha_{D_omega}^{-1} tau_omega q^{deg(Delta)/12 + kappa - 1} Xi_{S,omega}.
#[allow(clippy::too_many_arguments)]
pub fn star_factor(
    omega: &FiniteCharacter,
    tower: &TowerConfig,
    places: &[PlaceData],
    dagger_elt: &IwasawaSeries,
    conductor: &BTreeMap<String, u32>,
    tau: &PadicScalar,
    deg_delta: i64,
    kappa: i64,
    q: u64,
) -> Result<PadicScalar> {
    let prime = dagger_elt.ring.prime;
    tower.validate(places, prime.p)?;
    if deg_delta % 12 != 0 {
        return Err(Error::NotDivisibleBy12(deg_delta));
    }
    let e = deg_delta / 12 + kappa - 1;
    if e < 0 {
        return Err(Error::BadInput(
            "negative exponent deg(Delta)/12 + kappa - 1".into(),
        ));
    }
    if p_power_exponent(prime.p, q).is_none() {
        return Err(Error::BadInput("q is not a power of p".into()));
    }
    let omega_dag = evaluate_at_character(dagger_elt, omega)?;
    if omega_dag.is_zero_residue() {
        return Err(Error::DaggerVanishes);
    }
    let support: BTreeSet<String> = conductor
        .iter()
        .filter(|(_, &ord)| ord > 0)
        .map(|(id, _)| id.clone())
        .collect();
    let alpha_d = alpha_conductor(prime, places, conductor)?;
    let xi = xi_factor(prime, places, omega, &support)?;
    let q_pow = PadicScalar::from_biguint(
        prime.p,
        prime.precision,
        BigUint::from(q).pow(e as u32),
    );
    omega_dag
        .invert()?
        .mul(&alpha_d.invert()?)?
        .mul(tau)?
        .mul(&q_pow)?
        .mul(&xi)
}

/// c_chi = P_{chi^{-1}}(q^{-1} F_q^{-1}), substituting the inverse of the
/// arithmetic Frobenius (1 + t_0) for F_q.
pub fn c_chi(p_poly: &LPolynomial, q: u64, ring: SeriesRing) -> Result<IwasawaSeries> {
    p_poly.validate()?;
    if ring.vars != 1 {
        return Err(Error::BadInput("c_chi lives in Lambda_Gamma_0".into()));
    }
    let r = p_power_exponent(ring.prime.p, q)
        .ok_or_else(|| Error::BadInput("q is not a power of p".into()))?;
    let level = p_poly.coeffs.iter().map(|c| c.level).max().unwrap_or(0);
    let ring = ring.with_level(level);
    let g = binomial_power(ring, 0, -1); // (1 + t_0)^{-1}
    let mut acc = IwasawaSeries::zero(ring);
    let mut g_pow = IwasawaSeries::one(ring);
    for (i, c) in p_poly.coeffs.iter().enumerate() {
        if i > 0 {
            g_pow = g_pow.mul(&g)?;
        }
        // q^{-i} g^i c_i: the denominator is a pure p-power p^{ri}
        let mut term = g_pow.mul_scalar(c)?;
        term.denom_exp += r * i as u32;
        acc = acc.add(&term.renormalized())?;
    }
    Ok(acc)
}

/// rho_v = (1 - lambda_v chi([v])^{-1} [v]_{L_0/K} q_v^{-1})^sharp,
/// which the descent argument requires to be a unit of Q_chi Lambda_Gamma_0.
pub fn rho_unit_check(
    v: &PlaceData,
    chi: &FiniteCharacter,
    tower: &TowerConfig,
    ring: SeriesRing,
) -> Result<bool> {
    let p = ring.prime.p;
    let prec = ring.prime.precision;
    v.validate(p)?;
    if ring.vars != 1 {
        return Err(Error::BadInput("rho_v lives in Lambda_Gamma_0".into()));
    }
    let lambda = v
        .reduction
        .lambda()
        .ok_or_else(|| Error::BadInput("rho_v is defined at multiplicative places".into()))?;
    if chi.vars() != v.frobenius.len() {
        return Err(Error::BadInput("character arity mismatch".into()));
    }
    let r = p_power_exponent(p, v.q_v)
        .ok_or_else(|| Error::BadInput("q_v is not a power of p".into()))?;
    let ring = ring.with_level(chi.level);
    let a = v.frobenius[tower.gamma0_index];
    let chi_v_inv = chi.inverse().value_at(p, prec, &v.frobenius);
    let c = chi_v_inv.mul_i64(lambda);
    // rho_v = q_v^{-1} (q_v - c (1 + t_0)^a)
    let qv = IwasawaSeries::constant(
        ring,
        PadicScalar::from_biguint(p, prec, BigUint::from(v.q_v)),
    );
    let mut rho = qv.sub(&binomial_power(ring, 0, a).mul_scalar(&c)?)?;
    rho.denom_exp += r;
    Ok(rho.renormalized().sharp()?.is_unit())
}

/// dagger_chi: the unit alpha_{D_chi} tau_{chi^{-1}} q^{deg(Delta)/12 + kappa - 1}
/// F_q^{-2 + 2 kappa + deg(D_chi)} prod_v epsilon_v in Q_chi Lambda_Gamma_0,
/// with F_q realized as (1 + t_0).
#[allow(clippy::too_many_arguments)]
pub fn dagger_chi(
    chi: &FiniteCharacter,
    tower: &TowerConfig,
    places: &[PlaceData],
    conductor: &BTreeMap<String, u32>,
    tau: &PadicScalar,
    deg_delta: i64,
    kappa: i64,
    deg_d_chi: i64,
    q: u64,
    ring: SeriesRing,
) -> Result<IwasawaSeries> {
    let prime = ring.prime;
    if ring.vars != 1 {
        return Err(Error::BadInput("dagger_chi lives in Lambda_Gamma_0".into()));
    }
    if deg_delta % 12 != 0 {
        return Err(Error::NotDivisibleBy12(deg_delta));
    }
    let e = deg_delta / 12 + kappa - 1;
    if e < 0 {
        return Err(Error::BadInput(
            "negative exponent deg(Delta)/12 + kappa - 1".into(),
        ));
    }
    if p_power_exponent(prime.p, q).is_none() {
        return Err(Error::BadInput("q is not a power of p".into()));
    }
    let ring = ring.with_level(chi.level);
    let alpha_d = alpha_conductor(prime, places, conductor)?;
    let q_pow = PadicScalar::from_biguint(prime.p, prime.precision, BigUint::from(q).pow(e as u32));
    let scalar = alpha_d.mul(tau)?.mul(&q_pow)?;
    let fq_exp = -2 + 2 * kappa + deg_d_chi;
    let mut acc = binomial_power(ring, 0, fq_exp).mul_scalar(&scalar)?;
    for v in places {
        if v.reduction != Reduction::NonsplitMult || !v.in_s {
            continue;
        }
        let eps = if prime.p != 2 {
            let chi_v = chi.value_at(prime.p, prime.precision, &v.frobenius);
            let a = v.frobenius[tower.gamma0_index];
            IwasawaSeries::one(ring)
                .add(&binomial_power(ring, 0, a).mul_scalar(&chi_v)?)?
                .neg()
        } else {
            IwasawaSeries::one(ring)
        };
        acc = acc.mul(&eps)?;
    }
    Ok(acc)
}
